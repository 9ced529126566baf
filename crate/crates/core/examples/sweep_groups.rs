// Communication time against the number of groups, model and simulation
// side by side, as CSV.

use hsumma::experiment::{admissible_groups, sweep_groups, DeskGuard, Mode, Setup, BGP};
use hsumma::{BroadcastAlg, HockneyParams};

fn main() {
    // Full-size BlueGene/P: closed forms only.
    let bgp = Setup::from_preset(&BGP, BroadcastAlg::VanDeGeijn);
    let groups = admissible_groups(bgp.p).unwrap();
    print!("{}", sweep_groups(&bgp, &groups, Mode::Model, DeskGuard::default()).unwrap().to_csv());
    println!();

    // Desk scale: simulate and compare. G = 2 is not a square and is skipped.
    let desk = Setup {
        n: 256,
        p: 64,
        b: 8,
        outer_b: 8,
        alg: BroadcastAlg::VanDeGeijn,
        params: HockneyParams::new(1e-4, 1e-9, 0.0).unwrap(),
        seed: 1,
    };
    let table = sweep_groups(&desk, &[1, 2, 4, 16, 64], Mode::Both, DeskGuard::default()).unwrap();
    print!("{}", table.to_csv());
}
