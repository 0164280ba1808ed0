//! Step sizes, iteration bounds and the worst-case recursions behind them.
//!
//! All logarithms are natural. Iteration counts are rounded up.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hypergraph::{GraphStats, StatsMode};
use crate::problems::CostFunction;

/// Problem-level constants entering the convergence bounds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProblemConstants {
    /// Strong convexity modulus.
    pub c: f64,
    /// Lipschitz constant of the gradient.
    pub l: f64,
    /// Bound on `‖G_e‖₂`.
    pub m: f64,
    pub omega: f64,
    pub delta: f64,
    pub rho: f64,
    /// Maximum update lag, taken as the number of workers.
    pub tau: f64,
}

impl ProblemConstants {
    pub fn from_stats(c: f64, l: f64, m: f64, stats: &GraphStats, tau: f64) -> Self {
        Self {
            c,
            l,
            m,
            omega: stats.omega as f64,
            delta: stats.delta,
            rho: stats.rho,
            tau,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("c", self.c),
            ("L", self.l),
            ("M", self.m),
            ("omega", self.omega),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::param(format!("{name} must be > 0, got {v}")));
            }
        }
        let nonneg = [("delta", self.delta), ("rho", self.rho), ("tau", self.tau)];
        for (name, v) in nonneg {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::param(format!("{name} must be >= 0, got {v}")));
            }
        }
        if self.c > self.l {
            return Err(Error::param(format!(
                "c = {} exceeds L = {}",
                self.c, self.l
            )));
        }
        Ok(())
    }
}

/// Parameters of the affine recursion `a_{k+1} = (1 − c_r γ)(a_k − a∞) + a∞`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RecursionSpec {
    pub c_r: f64,
    /// Noise constant: `a∞(γ) ≤ γ B`.
    pub b: f64,
    pub gamma: f64,
    pub beta: f64,
    pub a0: f64,
    pub theta: f64,
}

fn check_positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::param(format!("{name} must be > 0, got {v}")))
    }
}

fn check_theta(theta: f64) -> Result<()> {
    if theta > 0.0 && theta <= 1.0 {
        Ok(())
    } else {
        Err(Error::param(format!(
            "theta must be in (0, 1], got {theta}"
        )))
    }
}

fn ceil_count(x: f64) -> u64 {
    if x <= 0.0 {
        0
    } else {
        x.ceil() as u64
    }
}

/// Constant stepsize guaranteeing `E[f(x_k) − f⋆] ≤ ε` for the lock-free
/// scheme: `ϑεc / (2LM²Ω(1 + 6ρτ + 4τ²ΩΔ^½))`.
pub fn gamma_prop1(pc: &ProblemConstants, epsilon: f64, theta: f64) -> Result<f64> {
    pc.validate()?;
    check_positive("epsilon", epsilon)?;
    check_theta(theta)?;
    let lag = 1.0 + 6.0 * pc.rho * pc.tau + 4.0 * pc.tau * pc.tau * pc.omega * pc.delta.sqrt();
    Ok(theta * epsilon * pc.c / (2.0 * pc.l * pc.m * pc.m * pc.omega * lag))
}

/// Number of component updates after which the stepsize from
/// [`gamma_prop1`] reaches accuracy `ε` from initial squared distance `D0`.
/// Zero when `L·D0 ≤ ε`.
pub fn k_prop1(pc: &ProblemConstants, epsilon: f64, theta: f64, d0: f64) -> Result<u64> {
    pc.validate()?;
    check_positive("epsilon", epsilon)?;
    check_theta(theta)?;
    check_positive("D0", d0)?;
    let log = (pc.l * d0 / epsilon).ln();
    if log <= 0.0 {
        return Ok(0);
    }
    let lag = 1.0 + 6.0 * pc.tau * pc.rho + 6.0 * pc.tau * pc.tau * pc.omega * pc.delta.sqrt();
    let k = 2.0 * pc.l * pc.m * pc.m * pc.omega * lag * log / (pc.c * pc.c * theta * epsilon);
    Ok(ceil_count(k))
}

/// Fixed point of the lag-perturbed recursion at stepsize `γ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FixedPoint {
    /// `C M² γ / (2c)`, an upper bound on `a_inf_exact`.
    pub a_inf: f64,
    /// `(M²γ²/2)(ΩτΔ^½ + √(Ω²τ²Δ + Q/(cγ)))²`.
    pub a_inf_exact: f64,
    /// `C = (ΩτΔ^½ + √(Ω²τ²Δ + Q))²`.
    pub c_const: f64,
    /// Contraction loss from linearizing about the fixed point; the
    /// effective curvature is `c(1 − delta_lin)`.
    pub delta_lin: f64,
    /// `Ω + 2τρ + 4Ωρτ + 2τ²Ω²Δ^½`.
    pub q: f64,
}

pub fn a_infinity(pc: &ProblemConstants, gamma: f64) -> Result<FixedPoint> {
    pc.validate()?;
    check_positive("gamma", gamma)?;
    let cg = pc.c * gamma;
    if cg >= 1.0 {
        return Err(Error::param(format!("c·gamma must be < 1, got {cg}")));
    }
    let (om, tau, rho, del) = (pc.omega, pc.tau, pc.rho, pc.delta);
    let q = om + 2.0 * tau * rho + 4.0 * om * rho * tau + 2.0 * tau * tau * om * om * del.sqrt();
    let lag2 = om * om * tau * tau * del;
    let lag = lag2.sqrt();
    let c_const = (lag + (lag2 + q).sqrt()).powi(2);
    let m2 = pc.m * pc.m;
    let a_inf = c_const * m2 * gamma / (2.0 * pc.c);
    let a_inf_exact = 0.5 * m2 * gamma * gamma * (lag + (lag2 + q / cg).sqrt()).powi(2);
    let delta_lin = if lag2 == 0.0 {
        0.0
    } else {
        1.0 / (1.0 + (1.0 + q / (cg * lag2)).sqrt())
    };
    Ok(FixedPoint {
        a_inf,
        a_inf_exact,
        c_const,
        delta_lin,
        q,
    })
}

/// `a_0 ..= a_steps` for the recursion taken with equality.
pub fn recursion_trace(spec: &RecursionSpec, a_inf: f64, steps: usize) -> Result<Vec<f64>> {
    let rate = spec.c_r * spec.gamma;
    if !(rate > 0.0 && rate <= 1.0) {
        return Err(Error::param(format!(
            "c_r·gamma must be in (0, 1], got {rate}"
        )));
    }
    let mut out = Vec::with_capacity(steps + 1);
    let mut a = spec.a0;
    out.push(a);
    for _ in 0..steps {
        a = (1.0 - rate) * (a - a_inf) + a_inf;
        out.push(a);
    }
    Ok(out)
}

/// Steps at stepsize `γ = ϑε/(2B)` after which `a_k ≤ ε`:
/// `⌈2B log(2a₀/ε) / (ϑεc_r)⌉`.
pub fn epoch_k_bound(spec: &RecursionSpec, epsilon: f64) -> Result<u64> {
    check_positive("epsilon", epsilon)?;
    check_theta(spec.theta)?;
    let log = (2.0 * spec.a0 / epsilon).ln();
    if log <= 0.0 {
        return Ok(0);
    }
    Ok(ceil_count(
        2.0 * spec.b * log / (spec.theta * epsilon * spec.c_r),
    ))
}

/// Iteration budget for the two-phase backoff scheme.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BackoffBound {
    /// `ϑ⁻¹ log(a₀c_r/(ϑB))`, clamped at zero: steps at `γ = ϑ/c_r` to
    /// enter the ball of squared radius `2ϑB/c_r`.
    pub linear_phase: f64,
    /// `(2B/(c_r ε)) log(2/β)/(1 − β)`: steps while shrinking `γ` by `β`
    /// per epoch.
    pub backoff_phase: f64,
    pub total: u64,
}

pub fn backoff_total_bound(spec: &RecursionSpec, epsilon: f64) -> Result<BackoffBound> {
    check_positive("epsilon", epsilon)?;
    check_theta(spec.theta)?;
    check_positive("B", spec.b)?;
    check_positive("c_r", spec.c_r)?;
    if !(spec.beta > 0.0 && spec.beta < 1.0) {
        return Err(Error::param(format!(
            "beta must be in (0, 1), got {}",
            spec.beta
        )));
    }
    let linear_phase = linear_phase(spec).max(0.0);
    let backoff_phase = 2.0 * spec.b / (spec.c_r * epsilon) * backoff_objective(spec.beta);
    Ok(BackoffBound {
        linear_phase,
        backoff_phase,
        total: ceil_count(linear_phase + backoff_phase),
    })
}

fn linear_phase(spec: &RecursionSpec) -> f64 {
    (spec.a0 * spec.c_r / (spec.theta * spec.b)).ln() / spec.theta
}

/// `log(2/β)/(1 − β)`.
pub fn backoff_objective(beta: f64) -> f64 {
    (2.0 / beta).ln() / (1.0 - beta)
}

/// Outcome of running the backoff scheme on the worst-case recursion.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BackoffSimulation {
    pub steps: u64,
    pub epochs: u64,
    pub final_a: f64,
}

/// Runs the two-phase scheme with `a∞(γ) = γB` and stops as soon as
/// `a ≤ ε`.
///
/// Phase one holds `γ = ϑ/c_r` for the linear-phase step count. Phase two
/// targets radii `A_ν = max(β A_{ν−1}, ε)` from `A_0 = 2ϑB/c_r`, each at
/// `γ = A_ν/(2B)` for `⌈2B log(2/β)/(c_r A_ν)⌉` steps.
pub fn simulate_backoff(spec: &RecursionSpec, epsilon: f64) -> Result<BackoffSimulation> {
    backoff_total_bound(spec, epsilon)?;
    let mut a = spec.a0;
    let mut steps = 0u64;
    let mut epochs = 0u64;
    let step = |a: f64, gamma: f64| {
        let a_inf = gamma * spec.b;
        (1.0 - spec.c_r * gamma) * (a - a_inf) + a_inf
    };

    let gamma1 = spec.theta / spec.c_r;
    let phase1 = ceil_count(linear_phase(spec));
    for _ in 0..phase1 {
        if a <= epsilon {
            break;
        }
        a = step(a, gamma1);
        steps += 1;
    }

    let mut target = 2.0 * spec.theta * spec.b / spec.c_r;
    let log = (2.0 / spec.beta).ln();
    while a > epsilon {
        target = (spec.beta * target).max(epsilon);
        let gamma = target / (2.0 * spec.b);
        let len = ceil_count(2.0 * spec.b * log / (spec.c_r * target));
        epochs += 1;
        for _ in 0..len {
            if a <= epsilon {
                break;
            }
            a = step(a, gamma);
            steps += 1;
        }
    }
    Ok(BackoffSimulation {
        steps,
        epochs,
        final_a: a,
    })
}

/// Accuracy guaranteed after `k` total steps of the backoff scheme, or
/// `None` while `k` does not exceed the linear phase.
pub fn epsilon_from_k(spec: &RecursionSpec, k: f64) -> Option<f64> {
    let denom = k - linear_phase(spec).max(0.0);
    if denom <= 0.0 {
        return None;
    }
    Some(2.0 * backoff_objective(spec.beta) * spec.b / spec.c_r / denom)
}

/// Recursion constants for serial SGD at a constant stepsize.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SerialConstants {
    pub c_r: f64,
    pub b: f64,
    pub a_inf: f64,
}

pub fn serial_constants(m: f64, c: f64, gamma: f64) -> Result<SerialConstants> {
    check_positive("M", m)?;
    check_positive("c", c)?;
    check_positive("gamma", gamma)?;
    Ok(SerialConstants {
        c_r: 2.0 * c,
        b: m * m / (4.0 * c),
        a_inf: gamma * m * m / (4.0 * c),
    })
}

/// `Θ²/(4Θ − 4)`, the constant of the `Θ/(2ck)` schedule. Negative for
/// `Θ < 1`, where that schedule loses its `1/k` rate.
pub fn theta_constant(theta: f64) -> f64 {
    theta * theta / (4.0 * theta - 4.0)
}

/// Minimizer of [`backoff_objective`] on `(0, 1)` and its value.
pub fn optimal_beta() -> (f64, f64) {
    // Golden-section search; the objective is unimodal on (0, 1).
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut lo, mut hi) = (1e-6, 1.0 - 1e-6);
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let (mut f1, mut f2) = (backoff_objective(x1), backoff_objective(x2));
    while hi - lo > 1e-12 {
        if f1 < f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = backoff_objective(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = backoff_objective(x2);
        }
    }
    let beta = 0.5 * (lo + hi);
    (beta, backoff_objective(beta))
}

/// The worst-case recursion evaluated at the stepsize and iteration count
/// from [`gamma_prop1`] and [`k_prop1`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Prop1Check {
    pub gamma: f64,
    pub k: u64,
    pub c_r: f64,
    pub a_inf: f64,
    pub a0: f64,
    pub a_k: f64,
    /// `ε/L`: the distance that guarantees suboptimality `ε`.
    pub target: f64,
}

impl Prop1Check {
    pub fn holds(&self) -> bool {
        self.a_k <= self.target
    }
}

pub fn prop1_check(pc: &ProblemConstants, epsilon: f64, theta: f64, d0: f64) -> Result<Prop1Check> {
    let gamma = gamma_prop1(pc, epsilon, theta)?;
    let k = k_prop1(pc, epsilon, theta, d0)?;
    let fp = a_infinity(pc, gamma)?;
    let c_r = pc.c * (1.0 - fp.delta_lin);
    let a0 = d0 / 2.0;
    let rate = c_r * gamma;
    // Closed form of the affine recursion; avoids iterating k times.
    let a_k = fp.a_inf_exact + (1.0 - rate).powf(k as f64) * (a0 - fp.a_inf_exact);
    Ok(Prop1Check {
        gamma,
        k,
        c_r,
        a_inf: fp.a_inf_exact,
        a0,
        a_k,
        target: epsilon / pc.l,
    })
}

/// Empirical constants for a concrete problem.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstantEstimate {
    pub constants: ProblemConstants,
    pub stats: GraphStats,
    /// True when `c > 0` and `L` is finite, so the strongly convex bounds
    /// apply.
    pub applicable: bool,
    pub samples: usize,
}

/// `M` is 1.1 times the largest `‖G_e‖₂` over `samples` draws of a uniform
/// edge and a local point from the problem's sampling region; `c` and `L`
/// come from the problem's analytic curvature. A missing smoothness
/// constant is reported as infinity.
pub fn estimate_constants(
    problem: &dyn CostFunction,
    samples: usize,
    seed: u64,
    tau: f64,
    stats_mode: StatsMode,
) -> Result<ConstantEstimate> {
    if samples == 0 {
        return Err(Error::param("samples must be >= 1"));
    }
    let stats = problem.hypergraph().compute_stats(stats_mode)?;
    let m = max_gradient_norm(problem, samples, seed) * 1.1;
    let curv = problem.curvature();
    let l = curv.smoothness.unwrap_or(f64::INFINITY);
    let c = curv.strong_convexity;
    Ok(ConstantEstimate {
        constants: ProblemConstants::from_stats(c, l, m, &stats, tau),
        applicable: c > 0.0 && l.is_finite() && m > 0.0,
        stats,
        samples,
    })
}

/// Largest sampled `‖G_e‖₂`. The draws for `n` samples are a prefix of the
/// draws for `n + 1`, so the result is monotone in `samples`.
pub fn max_gradient_norm(problem: &dyn CostFunction, samples: usize, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let h = problem.hypergraph();
    let mut xe = Vec::new();
    let mut g = Vec::new();
    let mut best = 0.0f64;
    for _ in 0..samples {
        let e = rng.random_range(0..h.num_edges());
        let len = h.edge_vars(e).len();
        xe.clear();
        xe.resize(len, 0.0);
        g.clear();
        g.resize(len, 0.0);
        problem.sample_local_point(e, &mut rng, &mut xe);
        problem.local_subgradient(e, &xe, &mut g);
        best = best.max(g.iter().map(|v| v * v).sum::<f64>().sqrt());
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit(tau: f64) -> ProblemConstants {
        ProblemConstants {
            c: 1.0,
            l: 1.0,
            m: 1.0,
            omega: 1.0,
            delta: 0.0,
            rho: 0.0,
            tau,
        }
    }

    #[test]
    fn gamma_hand_value() {
        assert!((gamma_prop1(&unit(0.0), 0.1, 0.5).unwrap() - 0.025).abs() < 1e-15);
    }

    #[test]
    fn k_hand_value() {
        assert_eq!(k_prop1(&unit(0.0), 0.01, 1.0, 1.0).unwrap(), 922);
        assert_eq!(k_prop1(&unit(0.0), 1.0, 1.0, 1.0).unwrap(), 0);
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(gamma_prop1(&unit(0.0), 0.0, 0.5).is_err());
        assert!(gamma_prop1(&unit(0.0), 0.1, 0.0).is_err());
        assert!(gamma_prop1(&unit(0.0), 0.1, 1.5).is_err());
        let mut pc = unit(0.0);
        pc.c = 2.0;
        assert!(gamma_prop1(&pc, 0.1, 0.5).is_err());
        assert!(a_infinity(&unit(0.0), 1.0).is_err());
    }

    #[test]
    fn recursion_hand_values() {
        let spec = RecursionSpec {
            c_r: 1.0,
            b: 1.0,
            gamma: 0.5,
            beta: 0.5,
            a0: 5.0,
            theta: 1.0,
        };
        assert_eq!(
            recursion_trace(&spec, 1.0, 4).unwrap(),
            vec![5.0, 3.0, 2.0, 1.5, 1.25]
        );
    }

    #[test]
    fn epoch_bound_hand_value() {
        let spec = RecursionSpec {
            c_r: 1.0,
            b: 1.0,
            gamma: 0.05,
            beta: 0.5,
            a0: 1.0,
            theta: 1.0,
        };
        assert_eq!(epoch_k_bound(&spec, 0.1).unwrap(), 60);
        assert_eq!(
            epoch_k_bound(&RecursionSpec { a0: 0.05, ..spec }, 0.1).unwrap(),
            0
        );
    }

    #[test]
    fn backoff_phase_hand_value() {
        let spec = RecursionSpec {
            c_r: 1.0,
            b: 1.0,
            gamma: 0.1,
            beta: 0.5,
            a0: 1.0,
            theta: 1.0,
        };
        let b = backoff_total_bound(&spec, 0.01).unwrap();
        assert!((b.backoff_phase - 200.0 * 4f64.ln() / 0.5).abs() < 1e-9);
        assert!((b.backoff_phase - 554.5).abs() < 0.05);
    }

    #[test]
    fn serial_constants_hand_value() {
        let s = serial_constants(2.0, 1.0, 0.1).unwrap();
        assert_eq!((s.c_r, s.b), (2.0, 1.0));
        assert!((s.a_inf - 0.1).abs() < 1e-15);
        assert_eq!(theta_constant(2.0), 1.0);
        assert!(theta_constant(0.2) < 0.0);
    }
}
