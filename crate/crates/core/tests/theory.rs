use hogwild::io::synth;
use hogwild::problems::{SeparableQuadratic, SvmProblem};
use hogwild::theory::{
    a_infinity, backoff_objective, backoff_total_bound, epoch_k_bound, epsilon_from_k,
    estimate_constants, gamma_prop1, k_prop1, max_gradient_norm, optimal_beta, prop1_check,
    recursion_trace, serial_constants, simulate_backoff, theta_constant, ProblemConstants,
    RecursionSpec,
};
use hogwild::StatsMode;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_constants(rng: &mut ChaCha8Rng) -> ProblemConstants {
    let l = 10f64.powf(rng.random_range(-1.0..2.0));
    let rho = rng.random_range(0.001..=1.0);
    ProblemConstants {
        c: l * rng.random_range(0.01..=1.0),
        l,
        m: 10f64.powf(rng.random_range(-1.0..2.0)),
        omega: rng.random_range(1..=50) as f64,
        delta: rho * rng.random_range(0.0..=1.0),
        rho,
        tau: rng.random_range(0..=64) as f64,
    }
}

#[test]
fn prop1_bound_is_consistent_with_the_recursion() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut checked = 0;
    while checked < 100 {
        let pc = random_constants(&mut rng);
        let theta = rng.random_range(0.05..=1.0);
        let d0 = 10f64.powf(rng.random_range(-1.0..2.0));
        let epsilon = pc.l * d0 * 10f64.powf(rng.random_range(-4.0..-0.5));
        let Ok(check) = prop1_check(&pc, epsilon, theta, d0) else {
            continue;
        };
        assert!(
            check.holds(),
            "{pc:?} ε={epsilon} ϑ={theta} D0={d0}: {check:?}"
        );
        if check.k <= 200_000 {
            let spec = RecursionSpec {
                c_r: check.c_r,
                b: 0.0,
                gamma: check.gamma,
                beta: 1.0,
                a0: check.a0,
                theta,
            };
            let trace = recursion_trace(&spec, check.a_inf, check.k as usize).unwrap();
            let last = *trace.last().unwrap();
            assert!(
                last <= check.target * (1.0 + 1e-9),
                "{last} > {}",
                check.target
            );
            assert!((last - check.a_k).abs() <= 1e-9 * check.a0);
        }
        checked += 1;
    }
}

#[test]
fn linearized_constant_obeys_the_final_chain() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut checked = 0;
    while checked < 10_000 {
        let pc = random_constants(&mut rng);
        let gamma = rng.random_range(1e-6..1.0) / pc.c;
        let Ok(fp) = a_infinity(&pc, gamma) else {
            continue;
        };
        let (om, tau) = (pc.omega, pc.tau);
        let chain = 2.0 * om * (1.0 + 6.0 * tau * pc.rho + 6.0 * tau * tau * om * pc.delta.sqrt());
        let lhs = fp.c_const / (1.0 - fp.delta_lin);
        assert!(
            lhs <= chain * (1.0 + 1e-12),
            "{pc:?} γ={gamma}: {lhs} > {chain}"
        );
        assert!(fp.a_inf_exact <= fp.a_inf * (1.0 + 1e-12));
        checked += 1;
    }
}

#[test]
fn square_root_bounds_on_a_log_grid() {
    let mut xs = vec![0.0];
    xs.extend((0..=1200).map(|i| 10f64.powf(-6.0 + i as f64 * 0.01)));
    for x in xs {
        let s = (1.0 + x).sqrt();
        assert!(
            (1.0 + s).powi(2) <= 4.0 + 2.0 * x + 1e-12 * x.max(1.0),
            "x = {x}"
        );
        assert!(
            (1.0 + s).powi(3) / s <= 8.0 + 2.0 * x + 1e-12 * x.max(1.0),
            "x = {x}"
        );
    }
}

#[test]
fn serial_reduction() {
    let pc = ProblemConstants {
        c: 0.5,
        l: 2.0,
        m: 3.0,
        omega: 1.0,
        delta: 0.3,
        rho: 0.6,
        tau: 0.0,
    };
    let (eps, theta, d0) = (0.01, 0.7, 4.0);
    let gamma = gamma_prop1(&pc, eps, theta).unwrap();
    let serial_gamma = theta * eps * pc.c / (2.0 * pc.l * pc.m * pc.m * pc.omega);
    assert!((gamma - serial_gamma).abs() <= 1e-15 * serial_gamma);
    let k = k_prop1(&pc, eps, theta, d0).unwrap();
    let serial_k = (2.0 * pc.l * pc.m * pc.m * (pc.l * d0 / eps).ln() / (pc.c * pc.c * theta * eps))
        .ceil() as u64;
    assert_eq!(k, serial_k);

    let fp = a_infinity(&pc, gamma).unwrap();
    assert_eq!((fp.q, fp.c_const, fp.delta_lin), (1.0, 1.0, 0.0));

    let sc = serial_constants(2.0, 1.0, 0.1).unwrap();
    assert_eq!((sc.c_r, sc.b), (2.0, 1.0));
    assert!((sc.a_inf - 0.1).abs() < 1e-15);
}

#[test]
fn hand_values() {
    let unit = ProblemConstants {
        c: 1.0,
        l: 1.0,
        m: 1.0,
        omega: 1.0,
        delta: 0.0,
        rho: 0.0,
        tau: 0.0,
    };
    assert!((gamma_prop1(&unit, 0.1, 0.5).unwrap() - 0.025).abs() < 1e-15);
    assert_eq!(
        gamma_prop1(&unit, 0.1, 1.0).unwrap(),
        2.0 * gamma_prop1(&unit, 0.1, 0.5).unwrap()
    );
    assert_eq!(k_prop1(&unit, 0.01, 1.0, 1.0).unwrap(), 922);
    assert_eq!(k_prop1(&unit, 0.5, 1.0, 0.5).unwrap(), 0);

    let lagged = ProblemConstants { tau: 1.0, ..unit };
    let fp = a_infinity(&lagged, 0.1).unwrap();
    assert_eq!((fp.q, fp.c_const), (1.0, 1.0));
    assert!((fp.a_inf - 0.05).abs() < 1e-15);

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
    assert_eq!(recursion_trace(&spec, 5.0, 3).unwrap(), vec![5.0; 4]);

    let spec = RecursionSpec { a0: 1.0, ..spec };
    assert_eq!(epoch_k_bound(&spec, 0.1).unwrap(), 60);
    assert_eq!(
        epoch_k_bound(&RecursionSpec { a0: 0.05, ..spec }, 0.1).unwrap(),
        0
    );
    let bound = backoff_total_bound(&spec, 0.01).unwrap();
    assert!((bound.backoff_phase - 200.0 * 4f64.ln() / 0.5).abs() < 1e-9);
}

#[test]
fn epoch_bound_is_reached_by_the_trace() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..100 {
        let b = 10f64.powf(rng.random_range(-1.0..1.0));
        let c_r = 10f64.powf(rng.random_range(-1.0..1.0));
        let theta = rng.random_range(0.1..=1.0);
        let eps = 10f64.powf(rng.random_range(-2.0..0.0));
        let gamma = theta * eps / (2.0 * b);
        if c_r * gamma > 1.0 {
            continue;
        }
        let spec = RecursionSpec {
            c_r,
            b,
            gamma,
            beta: 0.5,
            a0: 10f64.powf(rng.random_range(-1.0..1.0)),
            theta,
        };
        let k = epoch_k_bound(&spec, eps).unwrap();
        let trace = recursion_trace(&spec, gamma * b, k as usize).unwrap();
        assert!(*trace.last().unwrap() <= eps, "{spec:?} ε={eps} k={k}");
    }
}

fn random_spec(rng: &mut ChaCha8Rng) -> RecursionSpec {
    RecursionSpec {
        c_r: 10f64.powf(rng.random_range(-1.0..1.0)),
        b: 10f64.powf(rng.random_range(-1.0..1.0)),
        gamma: 0.0,
        beta: rng.random_range(0.1..0.9),
        a0: 10f64.powf(rng.random_range(-1.0..2.0)),
        theta: rng.random_range(0.1..=1.0),
    }
}

#[test]
fn backoff_simulation_finishes_within_the_bound() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..100 {
        let spec = random_spec(&mut rng);
        let eps = 10f64.powf(rng.random_range(-3.0..-1.0));
        let sim = simulate_backoff(&spec, eps).unwrap();
        let bound = backoff_total_bound(&spec, eps).unwrap();
        assert!(sim.final_a <= eps);
        assert!(
            sim.steps <= bound.total,
            "{spec:?} ε={eps}: {} > {}",
            sim.steps,
            bound.total
        );
    }
}

#[test]
fn backoff_rate_is_one_over_k() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..20 {
        let spec = random_spec(&mut rng);
        let products: Vec<f64> = [1e-1, 1e-2, 1e-3, 1e-4]
            .iter()
            .map(|&eps| eps * backoff_total_bound(&spec, eps).unwrap().total as f64)
            .collect();
        let limit = 2.0 * spec.b / spec.c_r * backoff_objective(spec.beta);
        let lp = (spec.a0 * spec.c_r / (spec.theta * spec.b)).ln().max(0.0) / spec.theta;
        for (eps, p) in [1e-1, 1e-2, 1e-3, 1e-4].iter().zip(&products) {
            assert!(*p <= limit + eps * (lp + 1.0) + 1e-9, "{products:?}");
        }
        let k = backoff_total_bound(&spec, 1e-3).unwrap().total as f64;
        assert!(epsilon_from_k(&spec, k).unwrap() <= 1e-3 * (1.0 + 1e-9));
    }
}

#[test]
fn optimal_backoff_factor() {
    let (beta, g) = optimal_beta();
    assert!((0.36..=0.38).contains(&beta), "{beta}");
    assert!(((2.0 / beta).ln() - (1.0 - beta) / beta).abs() < 1e-6);
    assert!(g < backoff_objective(0.2) && g < backoff_objective(0.8));
    // Independent oracle: bisection on the stationarity condition.
    let h = |b: f64| (2.0 / b).ln() - (1.0 - b) / b;
    let (mut lo, mut hi) = (0.1, 0.9);
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if h(lo) * h(mid) <= 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    assert!((beta - 0.5 * (lo + hi)).abs() < 1e-6);
}

#[test]
fn theta_schedule_constant() {
    assert!((theta_constant(2.0) - 1.0).abs() < 1e-15);
    assert!(theta_constant(0.2) < 0.0);
    for t in [1.5, 3.0, 10.0] {
        assert!(theta_constant(t) > 1.0);
    }
}

#[test]
fn constant_estimates() {
    let s = synth::svm(200, 50, 5, 0.0, 1).unwrap();
    let flat = SvmProblem::new(50, s.examples.clone(), 0.0).unwrap();
    let est = estimate_constants(&flat, 100, 0, 4.0, StatsMode::Exact).unwrap();
    assert_eq!(est.constants.c, 0.0);
    assert!(!est.applicable);
    let ridge = SvmProblem::new(50, s.examples, 0.1).unwrap();
    let est = estimate_constants(&ridge, 100, 0, 4.0, StatsMode::Exact).unwrap();
    assert!(est.applicable && (est.constants.c - 0.2).abs() < 1e-15);

    let q = SeparableQuadratic::singletons(5, 1.0).unwrap();
    let est = estimate_constants(&q, 100, 0, 1.0, StatsMode::Exact).unwrap();
    assert_eq!((est.constants.c, est.constants.l), (2.0, 2.0));

    let mut prev = 0.0;
    for n in [1, 5, 20, 100, 500] {
        let m = max_gradient_norm(&ridge, n, 7);
        assert!(m >= prev);
        prev = m;
    }
}
