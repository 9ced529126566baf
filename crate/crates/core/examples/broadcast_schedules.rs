// Builds each broadcast schedule, replays it and checks the closed form.

use hsumma::broadcast::Phase;
use hsumma::{make_schedule, simulate_schedule, BroadcastAlg, ClockState, HockneyParams};

fn main() {
    let params = HockneyParams::new(1.0, 0.01, 0.0).unwrap();
    let (q, m) = (8, 800);
    let ranks: Vec<usize> = (0..q).collect();
    for alg in BroadcastAlg::ALL {
        let sched = make_schedule(alg, 0, &ranks, m).unwrap();
        sched.validate().unwrap();
        let clocks = simulate_schedule(&sched, &params, &ClockState::zeros(q)).unwrap();
        println!(
            "{alg:>13}: {:>3} messages, {:>5} elements, makespan {:.2} (closed form {:.2})",
            sched.events().len(),
            sched.volume(),
            clocks.makespan(),
            alg.closed_form(q, m, &params)
        );
    }

    // Van de Geijn on 4 ranks: scatter by recursive halving, then a ring.
    let sched = make_schedule(BroadcastAlg::VanDeGeijn, 0, &[0, 1, 2, 3], 100).unwrap();
    for e in sched.events() {
        let phase = if e.phase == Phase::Scatter { "scatter" } else { "ring" };
        println!("{phase:>8} {} -> {} elements {:?}", e.from, e.to, e.range);
    }

    // Late arrivals delay only the ranks that depend on them.
    let sched = make_schedule(BroadcastAlg::BinomialTree, 0, &[0, 1, 2, 3], 100).unwrap();
    let start = ClockState::from_times(vec![0.0, 5.0, 0.0, 0.0]);
    let end = simulate_schedule(&sched, &params, &start).unwrap();
    println!("binomial with rank 1 entering at t=5: {:?}", end.times());
}
