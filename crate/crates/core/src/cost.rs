//! Closed-form communication costs of SUMMA and HSUMMA on a `sqrt(p) x sqrt(p)`
//! grid, and the analysis of the HSUMMA cost as a function of the group count.
//!
//! Message sizes are in elements and `beta` is seconds per element; nothing
//! in here converts to bytes.
//!
//! A broadcast of `m` elements among `q` ranks costs `L(q)*alpha + m*W(q)*beta`
//! ([`BcastCostModel`]). Each SUMMA step broadcasts a panel along rows and one
//! along columns, which is where the factor 2 in front of every term comes
//! from:
//!
//! ```text
//! T_summa  = 2 (n/b) L(sqrt p) alpha + 2 (n^2/sqrt p) W(sqrt p) beta
//! T_hsumma = 2 (n/b) L(sqrt(p/G)) alpha + 2 (n/B) L(sqrt G) alpha
//!          + 2 (n^2/sqrt p) (W(sqrt(p/G)) + W(sqrt G)) beta
//! ```

use std::cmp::Ordering;
use std::fmt;

use crate::error::{Error, Result};

/// Hockney point-to-point model plus a compute rate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HockneyParams {
    /// Latency, seconds.
    pub alpha: f64,
    /// Reciprocal bandwidth, seconds per element.
    pub beta: f64,
    /// Seconds per floating-point operation; a multiply-add pair costs `2 gamma`.
    pub gamma: f64,
}

impl HockneyParams {
    pub fn new(alpha: f64, beta: f64, gamma: f64) -> Result<Self> {
        for (name, value) in [("alpha", alpha), ("beta", beta), ("gamma", gamma)] {
            if !(value.is_finite() && value >= 0.0) {
                return Err(Error::InvalidParameter { name, value });
            }
        }
        Ok(Self { alpha, beta, gamma })
    }

    /// `alpha + m * beta`
    pub fn message_time(&self, elems: f64) -> f64 {
        self.alpha + elems * self.beta
    }

    pub fn with_gamma(self, gamma: f64) -> Self {
        Self { gamma, ..self }
    }
}

/// Bytes per matrix element assumed when reporting volumes in bytes.
pub const DEFAULT_ELEMENT_BYTES: u64 = 8;

/// Converts an element count to bytes for display only.
pub fn elements_to_bytes(elems: u64, bytes_per_element: u64) -> u64 {
    elems * bytes_per_element
}

/// Latency and bandwidth multipliers `L(q)`, `W(q)` of a broadcast algorithm.
///
/// All built-in models satisfy `L(1) = W(1) = 0` and are monotone on `q > 1`.
#[derive(Clone, Copy)]
pub enum BcastCostModel {
    /// `L(q) = W(q) = q - 1`
    Flat,
    /// `L(q) = W(q) = log2 q`
    Binomial,
    /// `L(q) = log2 q + q - 1`, `W(q) = 2 (q - 1) / q`
    VanDeGeijn,
    /// User-supplied multipliers; derivatives are taken numerically.
    Custom {
        name: &'static str,
        latency: fn(f64) -> f64,
        bandwidth: fn(f64) -> f64,
    },
}

impl BcastCostModel {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Flat => "flat",
            Self::Binomial => "binomial",
            Self::VanDeGeijn => "van-de-geijn",
            Self::Custom { name, .. } => name,
        }
    }

    pub fn latency_factor(&self, q: f64) -> f64 {
        match self {
            Self::Flat => q - 1.0,
            Self::Binomial => q.log2(),
            Self::VanDeGeijn => q.log2() + q - 1.0,
            Self::Custom { latency, .. } => latency(q),
        }
    }

    pub fn bandwidth_factor(&self, q: f64) -> f64 {
        match self {
            Self::Flat => q - 1.0,
            Self::Binomial => q.log2(),
            Self::VanDeGeijn => 2.0 * (q - 1.0) / q,
            Self::Custom { bandwidth, .. } => bandwidth(q),
        }
    }

    /// `dL/dq`
    pub fn latency_slope(&self, q: f64) -> f64 {
        match self {
            Self::Flat => 1.0,
            Self::Binomial => 1.0 / (q * std::f64::consts::LN_2),
            Self::VanDeGeijn => 1.0 / (q * std::f64::consts::LN_2) + 1.0,
            Self::Custom { latency, .. } => central_difference(*latency, q),
        }
    }

    /// `dW/dq`
    pub fn bandwidth_slope(&self, q: f64) -> f64 {
        match self {
            Self::Flat => 1.0,
            Self::Binomial => 1.0 / (q * std::f64::consts::LN_2),
            Self::VanDeGeijn => 2.0 / (q * q),
            Self::Custom { bandwidth, .. } => central_difference(*bandwidth, q),
        }
    }

    /// `L(q) alpha + m W(q) beta`
    pub fn broadcast_time(&self, q: f64, m: f64, params: &HockneyParams) -> f64 {
        self.latency_factor(q) * params.alpha + m * self.bandwidth_factor(q) * params.beta
    }
}

fn central_difference(f: fn(f64) -> f64, x: f64) -> f64 {
    let h = 1e-6 * x.abs().max(1.0);
    (f(x + h) - f(x - h)) / (2.0 * h)
}

impl fmt::Debug for BcastCostModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl PartialEq for BcastCostModel {
    fn eq(&self, other: &Self) -> bool {
        self.name() == other.name()
    }
}

/// `n`, `p`, inner block `b` and outer block `B` of one model evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ModelProblem {
    pub n: u64,
    pub p: u64,
    pub b: u64,
    pub outer_b: u64,
}

impl ModelProblem {
    /// A problem with `B = b`.
    pub fn new(n: u64, p: u64, b: u64) -> Result<Self> {
        Self::with_outer_block(n, p, b, b)
    }

    pub fn with_outer_block(n: u64, p: u64, b: u64, outer_b: u64) -> Result<Self> {
        for (what, v) in [("n", n), ("p", p), ("b", b), ("B", outer_b)] {
            if v == 0 {
                return Err(Error::ZeroExtent { what });
            }
        }
        if exact_sqrt(p).is_none() {
            return Err(Error::NotSquare { what: "p", value: p });
        }
        if n % b != 0 {
            return Err(Error::Divisibility {
                what: "n",
                value: n,
                divisor: b,
            });
        }
        if n % outer_b != 0 {
            return Err(Error::Divisibility {
                what: "n",
                value: n,
                divisor: outer_b,
            });
        }
        if b > outer_b {
            return Err(Error::InnerBlockTooLarge { inner: b, outer: outer_b });
        }
        Ok(Self { n, p, b, outer_b })
    }

    pub fn sqrt_p(&self) -> u64 {
        exact_sqrt(self.p).expect("p is square by construction")
    }

    /// `p^(1/4)` when it is an integer.
    pub fn fourth_root_p(&self) -> Option<u64> {
        exact_sqrt(self.sqrt_p())
    }

    /// Square group counts whose side divides `sqrt(p)`: the groupings
    /// `sqrt(G) x sqrt(G)` available on the square grid.
    pub fn admissible_groups(&self) -> Vec<u64> {
        let side = self.sqrt_p();
        (1..=side).filter(|d| side % d == 0).map(|d| d * d).collect()
    }
}

/// Integer square root when `v` is a perfect square.
pub fn exact_sqrt(v: u64) -> Option<u64> {
    let r = v.isqrt();
    (r * r == v).then_some(r)
}

/// Analytic cost of one configuration, in seconds.
///
/// "Inner" terms are broadcasts inside a group, "outer" terms between groups.
/// SUMMA puts everything in the inner terms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CostBreakdown {
    pub problem: ModelProblem,
    pub params: HockneyParams,
    pub model: BcastCostModel,
    pub groups: f64,
    pub latency_inner_s: f64,
    pub latency_outer_s: f64,
    pub bandwidth_inner_s: f64,
    pub bandwidth_outer_s: f64,
    pub latency_s: f64,
    pub bandwidth_s: f64,
    pub compute_s: f64,
    pub total_s: f64,
}

impl CostBreakdown {
    /// `latency_s + bandwidth_s`
    pub fn comm_s(&self) -> f64 {
        self.latency_s + self.bandwidth_s
    }
}

/// `2 n^3 gamma / p`
pub fn compute_cost(prob: &ModelProblem, params: &HockneyParams) -> f64 {
    let n = prob.n as f64;
    2.0 * n * n * n * params.gamma / prob.p as f64
}

pub fn summa_comm_cost(
    prob: &ModelProblem,
    params: &HockneyParams,
    model: BcastCostModel,
) -> CostBreakdown {
    let n = prob.n as f64;
    let sqrt_p = (prob.p as f64).sqrt();
    let latency = 2.0 * (n / prob.b as f64) * model.latency_factor(sqrt_p) * params.alpha;
    let bandwidth = 2.0 * (n * n / sqrt_p) * model.bandwidth_factor(sqrt_p) * params.beta;
    let compute = compute_cost(prob, params);
    CostBreakdown {
        problem: *prob,
        params: *params,
        model,
        groups: 1.0,
        latency_inner_s: latency,
        latency_outer_s: 0.0,
        bandwidth_inner_s: bandwidth,
        bandwidth_outer_s: 0.0,
        latency_s: latency,
        bandwidth_s: bandwidth,
        compute_s: compute,
        total_s: latency + bandwidth + compute,
    }
}

/// HSUMMA cost with `G` groups arranged `sqrt(G) x sqrt(G)`.
///
/// `G` must be a perfect square whose root divides `sqrt(p)`. Use
/// [`hsumma_comm_cost_continuous`] for real-valued `G`.
pub fn hsumma_comm_cost(
    prob: &ModelProblem,
    params: &HockneyParams,
    model: BcastCostModel,
    groups: u64,
) -> Result<CostBreakdown> {
    check_groups(prob, groups)?;
    hsumma_comm_cost_continuous(prob, params, model, groups as f64)
}

fn check_groups(prob: &ModelProblem, groups: u64) -> Result<()> {
    if groups == 0 || groups > prob.p {
        return Err(Error::GroupCountOutOfRange {
            groups: groups as f64,
            procs: prob.p,
        });
    }
    let Some(side) = exact_sqrt(groups) else {
        return Err(Error::InadmissibleGroups {
            groups,
            procs: prob.p,
            reason: "G is not a perfect square",
        });
    };
    if prob.sqrt_p() % side != 0 {
        return Err(Error::InadmissibleGroups {
            groups,
            procs: prob.p,
            reason: "sqrt(G) does not divide sqrt(p)",
        });
    }
    Ok(())
}

/// The HSUMMA closed form for any real `G` in `[1, p]`.
pub fn hsumma_comm_cost_continuous(
    prob: &ModelProblem,
    params: &HockneyParams,
    model: BcastCostModel,
    groups: f64,
) -> Result<CostBreakdown> {
    let p = prob.p as f64;
    if !(1.0..=p).contains(&groups) {
        return Err(Error::GroupCountOutOfRange {
            groups,
            procs: prob.p,
        });
    }
    let n = prob.n as f64;
    let sqrt_p = p.sqrt();
    let inside = (p / groups).sqrt();
    let between = groups.sqrt();

    let latency_inner = 2.0 * (n / prob.b as f64) * model.latency_factor(inside) * params.alpha;
    let latency_outer =
        2.0 * (n / prob.outer_b as f64) * model.latency_factor(between) * params.alpha;
    let bandwidth_inner = 2.0 * (n * n / sqrt_p) * model.bandwidth_factor(inside) * params.beta;
    let bandwidth_outer = 2.0 * (n * n / sqrt_p) * model.bandwidth_factor(between) * params.beta;

    let latency = latency_inner + latency_outer;
    let bandwidth = bandwidth_inner + bandwidth_outer;
    let compute = compute_cost(prob, params);
    Ok(CostBreakdown {
        problem: *prob,
        params: *params,
        model,
        groups,
        latency_inner_s: latency_inner,
        latency_outer_s: latency_outer,
        bandwidth_inner_s: bandwidth_inner,
        bandwidth_outer_s: bandwidth_outer,
        latency_s: latency,
        bandwidth_s: bandwidth,
        compute_s: compute,
        total_s: latency + bandwidth + compute,
    })
}

/// HSUMMA with Van de Geijn broadcasts at `G = sqrt(p)` and `b = B`:
/// `(log2 p + 4(p^(1/4) - 1)) (n/b) alpha + 8 (1 - p^(-1/4)) (n^2/sqrt p) beta`.
pub fn vdg_sqrt_p_comm_cost(prob: &ModelProblem, params: &HockneyParams) -> f64 {
    let n = prob.n as f64;
    let p = prob.p as f64;
    let root4 = p.sqrt().sqrt();
    (p.log2() + 4.0 * (root4 - 1.0)) * (n / prob.b as f64) * params.alpha
        + 8.0 * (1.0 - 1.0 / root4) * (n * n / p.sqrt()) * params.beta
}

/// `dT_hsumma/dG` for `b = B` from the slopes of `L` and `W`:
///
/// ```text
/// dT/dG = (n/b) L1 alpha + (n^2/sqrt p) W1 beta
/// L1 = L'(sqrt G)/sqrt G - L'(sqrt(p/G)) sqrt p/(G sqrt G)
/// ```
///
/// and the same for `W1`. The outer block size is ignored.
pub fn hsumma_cost_derivative(
    prob: &ModelProblem,
    params: &HockneyParams,
    model: BcastCostModel,
    groups: f64,
) -> f64 {
    let n = prob.n as f64;
    let p = prob.p as f64;
    let sqrt_p = p.sqrt();
    let sqrt_g = groups.sqrt();
    let inside = sqrt_p / sqrt_g;
    let chain = sqrt_p / (groups * sqrt_g);
    let l1 = model.latency_slope(sqrt_g) / sqrt_g - model.latency_slope(inside) * chain;
    let w1 = model.bandwidth_slope(sqrt_g) / sqrt_g - model.bandwidth_slope(inside) * chain;
    (n / prob.b as f64) * l1 * params.alpha + (n * n / sqrt_p) * w1 * params.beta
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sign {
    Negative,
    Zero,
    Positive,
}

impl Sign {
    fn of(x: f64) -> Self {
        match x.partial_cmp(&0.0) {
            Some(Ordering::Less) => Self::Negative,
            Some(Ordering::Greater) => Self::Positive,
            _ => Self::Zero,
        }
    }
}

/// Sign of the Van de Geijn HSUMMA cost slope in `G` (with `b = B`):
/// `sign((G - sqrt p)(n alpha / b - 2 n^2 beta / p))`.
pub fn hsumma_cost_derivative_sign(
    prob: &ModelProblem,
    params: &HockneyParams,
    groups: f64,
) -> Sign {
    let n = prob.n as f64;
    let p = prob.p as f64;
    let position = groups - p.sqrt();
    let balance = n * params.alpha / prob.b as f64 - 2.0 * n * n * params.beta / p;
    match (Sign::of(position), Sign::of(balance)) {
        (Sign::Zero, _) | (_, Sign::Zero) => Sign::Zero,
        (a, b) if a == b => Sign::Positive,
        _ => Sign::Negative,
    }
}

/// Shape of the Van de Geijn HSUMMA cost on `(1, p)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Regime {
    /// `alpha/beta > 2nb/p`: minimum at `G = sqrt(p)`.
    InteriorMinimum,
    /// `alpha/beta < 2nb/p`: maximum at `G = sqrt(p)`, minimum at `G = 1` or `G = p`.
    InteriorMaximum,
    /// `alpha/beta = 2nb/p`: the cost is flat in `G`.
    Degenerate,
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::InteriorMinimum => "InteriorMinimum",
            Self::InteriorMaximum => "InteriorMaximum",
            Self::Degenerate => "Degenerate",
        })
    }
}

pub fn regime_check(prob: &ModelProblem, params: &HockneyParams) -> Regime {
    // alpha/beta vs 2nb/p, cross-multiplied so beta = 0 is handled.
    let lhs = params.alpha * prob.p as f64;
    let rhs = 2.0 * prob.n as f64 * prob.b as f64 * params.beta;
    match lhs.partial_cmp(&rhs) {
        Some(Ordering::Greater) => Regime::InteriorMinimum,
        Some(Ordering::Less) => Regime::InteriorMaximum,
        _ => Regime::Degenerate,
    }
}

/// Picks the point with the smallest cost; ties go to the group count
/// nearest `sqrt(p)`, then to the smaller count.
pub fn argmin_groups<T: Copy>(
    p: u64,
    points: impl IntoIterator<Item = (u64, f64, T)>,
) -> Option<(u64, f64, T)> {
    let sqrt_p = (p as f64).sqrt();
    points.into_iter().min_by(|a, b| {
        a.1.total_cmp(&b.1)
            .then_with(|| (a.0 as f64 - sqrt_p).abs().total_cmp(&(b.0 as f64 - sqrt_p).abs()))
            .then_with(|| a.0.cmp(&b.0))
    })
}

/// The candidate group count minimizing the HSUMMA total cost.
pub fn optimal_groups(
    prob: &ModelProblem,
    params: &HockneyParams,
    model: BcastCostModel,
    candidates: &[u64],
) -> Result<(u64, CostBreakdown)> {
    if candidates.is_empty() {
        return Err(Error::EmptyCandidates);
    }
    let mut points = Vec::with_capacity(candidates.len());
    for &g in candidates {
        let cost = hsumma_comm_cost(prob, params, model, g)?;
        points.push((g, cost.total_s, cost));
    }
    let (g, _, cost) = argmin_groups(prob.p, points).expect("non-empty");
    Ok((g, cost))
}

/// Predicted HSUMMA execution time: `2 n^3 gamma / p` plus communication.
pub fn predict_execution(
    prob: &ModelProblem,
    params: &HockneyParams,
    model: BcastCostModel,
    groups: f64,
) -> Result<f64> {
    hsumma_comm_cost_continuous(prob, params, model, groups).map(|c| c.total_s)
}
