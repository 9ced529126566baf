use hsumma::experiment::{sweep_procs, DeskGuard, GroupRule, Mode, Setup, EXASCALE};
use hsumma::BroadcastAlg;

fn main() {
    let setup = Setup::from_preset(&EXASCALE, BroadcastAlg::VanDeGeijn);
    let procs: Vec<u64> = (3..=10).map(|k| 4u64.pow(k)).collect();
    let table = sweep_procs(&setup, &procs, GroupRule::Best, Mode::Model, DeskGuard::default()).unwrap();
    print!("{}", table.to_csv());

    println!("\nNB_procs,summa_over_hsumma");
    for pair in table.rows.chunks(2) {
        let ratio = pair[0].overall_comm.unwrap() / pair[1].overall_comm.unwrap();
        println!("{},{ratio:.3}", pair[0].key);
    }
}
