// One HSUMMA run on a 4x4 grid: verify the product, compare with SUMMA and
// with the closed-form model.

use hsumma::grid::gather_matrix;
use hsumma::{
    hsumma_comm_cost, make_grid, measured_vs_model, reference_multiply, run_hsumma, run_summa, BroadcastAlg,
    HockneyParams, ModelProblem, SimConfig,
};

fn main() {
    let params = HockneyParams::new(1e-4, 1e-9, 1e-10).unwrap();
    let alg = BroadcastAlg::VanDeGeijn;
    let cfg = SimConfig::new(make_grid(4, 4).unwrap(), (2, 2), 64, 4, 4, alg, params)
        .unwrap()
        .with_seed(42);

    let (a, b) = cfg.random_inputs().unwrap();
    let (c, h) = run_hsumma(&a, &b, &cfg).unwrap();
    let (_, s) = run_summa(&a, &b, &cfg).unwrap();

    let (ga, gb) = cfg.random_globals();
    let err = gather_matrix(&c).relative_error(&reference_multiply(&ga, &gb).unwrap());
    println!("relative error against the sequential product: {err:.2e}");

    for m in [&s, &h] {
        println!(
            "{:>6}: comm {:.4e} s, compute {:.4e} s, {} messages ({} between groups)",
            m.algorithm, m.comm_time_s, m.compute_time_s, m.msg_count, m.outer.msg_count
        );
    }

    let prob = ModelProblem::new(64, 16, 4).unwrap();
    let model = hsumma_comm_cost(&prob, &params, alg.cost_model(), 4).unwrap();
    print!("{}", measured_vs_model(&h, &model).unwrap());
}
