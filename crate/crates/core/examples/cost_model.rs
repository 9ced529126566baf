use hsumma::cost::exact_sqrt;
use hsumma::{
    hsumma_comm_cost, hsumma_cost_derivative_sign, optimal_groups, regime_check, summa_comm_cost, BcastCostModel,
    HockneyParams, ModelProblem,
};

fn main() {
    // BlueGene/P-like machine: 16384 cores, n = 65536.
    let prob = ModelProblem::new(65536, 16384, 256).unwrap();
    let params = HockneyParams::new(3e-6, 1e-9, 0.0).unwrap();
    let model = BcastCostModel::VanDeGeijn;

    let summa = summa_comm_cost(&prob, &params, model);
    println!("SUMMA: latency {:.4} s, bandwidth {:.4} s", summa.latency_s, summa.bandwidth_s);
    println!("regime: {}", regime_check(&prob, &params));

    let groups = prob.admissible_groups();
    for &g in &groups {
        let c = hsumma_comm_cost(&prob, &params, model, g).unwrap();
        println!(
            "G = {g:>5}: comm {:.4} s (inner {:.4}, between groups {:.4}), slope {:?}",
            c.comm_s(),
            c.latency_inner_s + c.bandwidth_inner_s,
            c.latency_outer_s + c.bandwidth_outer_s,
            hsumma_cost_derivative_sign(&prob, &params, g as f64)
        );
    }
    let (best, cost) = optimal_groups(&prob, &params, model, &groups).unwrap();
    println!("best G = {best} (sqrt(p) = {}), {:.2}x less communication than SUMMA", exact_sqrt(prob.p).unwrap(), summa.comm_s() / cost.comm_s());

    // A slow network flips the curve: sqrt(p) becomes the worst choice.
    let slow = HockneyParams::new(3e-6, 1e-7, 0.0).unwrap();
    println!("with beta = 1e-7: {}", regime_check(&prob, &slow));
}
