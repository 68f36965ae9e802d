//! Acceptance battery: one test per release criterion, each ending in a
//! single `[PASS]` line (visible with `--nocapture`; cargo's own per-test
//! ok/FAILED line mirrors it otherwise). Tolerances and instance counts are
//! part of the contract — do not loosen them to make a failure go away.

use std::time::Instant;

use popdyn::bias::{AdditiveBias, MultiplicativeBias, ScalarFamily};
use popdyn::certify::{self, CertificateId};
use popdyn::logit::LogitParams;
use popdyn::mechanism::{ConjugatePair, PiGains, SaturatedGains};
use popdyn::sim::{self, BiasChoice, CostInput, MechanismChoice, Scenario, Sinusoid};
use popdyn::simplex::PopulationState;
use popdyn::storage::{storage_brute_force, storage_closed_form};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn rng_for(criterion: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(0xACCE_0000 + criterion)
}

fn random_sinusoid_mix(rng: &mut ChaCha8Rng, n: usize, max_terms: usize) -> CostInput {
    let base: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
    let terms = (0..rng.random_range(1..=max_terms))
        .map(|_| Sinusoid {
            amplitude: (0..n).map(|_| rng.random_range(-1.0..1.0)).collect(),
            angular_frequency: rng.random_range(0.2..3.0),
            phase: rng.random_range(0.0..std::f64::consts::TAU),
        })
        .collect();
    CostInput::SinusoidMix { base, terms }
}

fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

#[test]
fn criterion_1_storage_oracle_equivalence() {
    let started = Instant::now();
    let mut rng = rng_for(1);
    let rates = [0.5, 1.0, 2.0];
    let mut worst: f64 = 0.0;
    for case in 0..100 {
        let n = [2, 3, 4][case % 3];
        let eta = rates[rng.random_range(0..3)];
        let beta = rates[rng.random_range(0..3)];
        let params = LogitParams::new(eta, beta, n).unwrap();
        let pi = PopulationState::random_interior(n, &mut rng).unwrap();
        let tau: Vec<f64> = (0..n).map(|_| rng.random_range(-2.0..2.0)).collect();
        let closed = storage_closed_form(&params, pi.as_slice(), &tau);
        let brute = storage_brute_force(&params, pi.as_slice(), &tau, 60).unwrap();
        worst = worst.max((closed - brute).abs());
        assert!(
            (closed - brute).abs() <= 1e-6,
            "case {case}: closed {closed} vs brute {brute} (n={n}, eta={eta}, beta={beta})"
        );
    }
    let elapsed = started.elapsed();
    assert!(elapsed.as_secs_f64() < 60.0, "oracle comparison took {elapsed:?}");
    println!(
        "[PASS] criterion 1: storage oracle equivalence, 100 instances, worst gap {worst:.3e} \
         in {elapsed:.2?}"
    );
}

#[test]
fn criterion_2_plain_passivity_certificate_on_sinusoid_drives() {
    let started = Instant::now();
    let mut rng = rng_for(2);
    let params = LogitParams::new(1.0, 1.0, 3).unwrap();
    let mut worst = f64::INFINITY;
    for case in 0..20 {
        let cost = random_sinusoid_mix(&mut rng, 3, 3);
        let pi0 = PopulationState::random_interior(3, &mut rng).unwrap();
        let mut sc = Scenario::driven(params, BiasChoice::Unbiased, cost, pi0, 50.0);
        // Oscillations up to omega = 3 need a fine record spacing for the
        // second-order difference quotients to sit well inside the tolerance.
        sc.record_interval = 0.005;
        let traj = sim::run(&sc).unwrap();
        let report =
            certify::certify_delta_passive(&traj, CertificateId::PlainPassivity).unwrap();
        assert!(
            report.passed(),
            "case {case}: worst residual {} at t = {} (tol {})",
            report.worst_residual,
            report.worst_time,
            report.tolerance
        );
        worst = worst.min(report.worst_residual);
    }
    let elapsed = started.elapsed();
    assert!(elapsed.as_secs_f64() < 60.0, "certificate runs took {elapsed:?}");
    println!(
        "[PASS] criterion 2: plain passivity residual >= -tol on 20 sinusoid drives, \
         worst residual {worst:.3e} in {elapsed:.2?}"
    );
}

#[test]
fn criterion_3_shortage_certificates_for_both_bias_models() {
    let mut rng = rng_for(3);
    let params = LogitParams::new(1.0, 1.0, 3).unwrap();

    for c in [0.5, 1.0, 2.0] {
        let bias =
            AdditiveBias::uniform(ScalarFamily::affine(1.0, c).unwrap(), 3).unwrap();
        let cost = random_sinusoid_mix(&mut rng, 3, 3);
        let pi0 = PopulationState::random_interior(3, &mut rng).unwrap();
        let mut sc = Scenario::driven(params, BiasChoice::Additive(bias), cost, pi0, 50.0);
        sc.record_interval = 0.01;
        let traj = sim::run(&sc).unwrap();
        let report =
            certify::certify_delta_passive(&traj, CertificateId::AdditiveShortage).unwrap();
        assert!(
            report.passed(),
            "additive bias c = {c}: worst residual {} (tol {})",
            report.worst_residual,
            report.tolerance
        );
    }

    for v in [0.2, 0.5] {
        // Positive weights with slope -v; drive kept positive and bounded so
        // the observed cost ceiling is meaningful.
        let bias =
            MultiplicativeBias::uniform(ScalarFamily::affine(1.2, v).unwrap(), 3).unwrap();
        let base: Vec<f64> = (0..3).map(|_| rng.random_range(0.8..1.2)).collect();
        let cost = CostInput::SinusoidMix {
            base,
            terms: vec![Sinusoid {
                amplitude: (0..3).map(|_| rng.random_range(-0.4..0.4)).collect(),
                angular_frequency: rng.random_range(0.3..2.0),
                phase: rng.random_range(0.0..std::f64::consts::TAU),
            }],
        };
        let pi0 = PopulationState::random_interior(3, &mut rng).unwrap();
        let mut sc =
            Scenario::driven(params, BiasChoice::Multiplicative(bias), cost, pi0, 50.0);
        sc.record_interval = 0.01;
        let traj = sim::run(&sc).unwrap();
        let report =
            certify::certify_delta_passive(&traj, CertificateId::MultiplicativeShortage)
                .unwrap();
        assert!(
            report.passed(),
            "multiplicative bias v = {v}: worst residual {} (tol {})",
            report.worst_residual,
            report.tolerance
        );
    }
    println!(
        "[PASS] criterion 3: shortage certificates hold for additive c in {{0.5, 1, 2}} and \
         multiplicative v in {{0.2, 0.5}}"
    );
}

#[test]
fn criterion_4_pi_inducement_reproduction() {
    let started = Instant::now();
    let mut rng = rng_for(4);
    let params = LogitParams::new(1.0, 1.0, 3).unwrap();
    let target = PopulationState::new(vec![0.2, 0.3, 0.5]).unwrap();
    let mut worst_final = 0.0f64;
    for seed in 0..10 {
        let bias = AdditiveBias::uniform(ScalarFamily::affine(1.0, 1.0).unwrap(), 3).unwrap();
        let pi0 = PopulationState::random_interior(3, &mut rng).unwrap();
        let mut sc = Scenario::regulated(
            params,
            BiasChoice::Additive(bias),
            MechanismChoice::Pi(PiGains::new(1.0, 2.0).unwrap()),
            target.clone(),
            pi0,
            200.0,
        );
        sc.record_interval = 0.05;
        let traj = sim::run(&sc).unwrap();
        let (converged, _) = sim::detect_convergence(&traj, 1e-4, 20.0).unwrap();
        assert!(converged, "seed {seed}: trailing window not within 1e-4");
        let final_dist = distance(&traj.samples.last().unwrap().pi, target.as_slice());
        worst_final = worst_final.max(final_dist);
        assert!(final_dist < 1e-4, "seed {seed}: final distance {final_dist}");
        for pair in traj.samples.windows(2) {
            assert!(
                pair[1].lyapunov - pair[0].lyapunov <= 1e-4,
                "seed {seed}: combined energy rose by {} at t = {}",
                pair[1].lyapunov - pair[0].lyapunov,
                pair[1].t
            );
        }
    }
    let elapsed = started.elapsed();
    assert!(elapsed.as_secs_f64() < 120.0, "PI reproduction took {elapsed:?}");
    println!(
        "[PASS] criterion 4: PI inducement reaches the target within 1e-4 on 10 seeds \
         (worst final distance {worst_final:.3e}) with nonincreasing energy, in {elapsed:.2?}"
    );
}

#[test]
fn criterion_5_saturated_inducement_reproduction() {
    let mut rng = rng_for(5);
    let params = LogitParams::new(1.0, 1.0, 3).unwrap();
    let target = PopulationState::new(vec![0.2, 0.3, 0.5]).unwrap();
    // kappa wL > 2 vH (base + kappa): 1 > 2 * 0.05 * 2 = 0.2.
    let gains = SaturatedGains::new(1.0, 1.0, 1.0, 1.0).unwrap();
    let ceiling = gains.cost_bound();
    let mut worst_final = 0.0f64;
    for seed in 0..10 {
        let family = ScalarFamily::affine(1.05, 0.05).unwrap();
        let bias = MultiplicativeBias::uniform(family, 3).unwrap();
        let pi0 = PopulationState::random_interior(3, &mut rng).unwrap();
        let mut sc = Scenario::regulated(
            params,
            BiasChoice::Multiplicative(bias),
            MechanismChoice::Saturated(gains.clone()),
            target.clone(),
            pi0,
            200.0,
        );
        sc.record_interval = 0.05;
        let traj = sim::run(&sc).unwrap();
        let (converged, _) = sim::detect_convergence(&traj, 1e-3, 20.0).unwrap();
        assert!(converged, "seed {seed}: trailing window not within 1e-3");
        let final_dist = distance(&traj.samples.last().unwrap().pi, target.as_slice());
        worst_final = worst_final.max(final_dist);

        // Energy decay away from switch/clamp samples.
        let decay = certify::certify_lyapunov_saturated(&traj).unwrap();
        assert!(
            decay.passed(),
            "seed {seed}: decay residual {} at t = {} (tol {}, {} intervals excluded)",
            decay.worst_residual,
            decay.worst_time,
            decay.tolerance,
            decay.excluded
        );

        // Structural guarantees at every recorded sample.
        for s in &traj.samples {
            assert!(s.mu.iter().all(|&m| m <= 1e-12), "seed {seed}: mu > 0 at t = {}", s.t);
            assert!(
                s.cost.iter().all(|&t_k| t_k < ceiling),
                "seed {seed}: cost reached ceiling at t = {}",
                s.t
            );
        }
    }
    println!(
        "[PASS] criterion 5: saturated inducement reaches the target within 1e-3 on 10 seeds \
         (worst final distance {worst_final:.3e}) with bounded costs and nonpositive integrator"
    );
}

#[test]
fn criterion_6_conjugate_machinery() {
    // Spot values for w(x) = 2 - x.
    let spot = ConjugatePair::for_family(&ScalarFamily::affine(2.0, 1.0).unwrap()).unwrap();
    let f_half = spot.primitive(0.5);
    assert!((f_half - 0.2291667).abs() < 1e-7, "F(0.5) = {f_half}");
    let conj = spot.conjugate_value(0.875);
    assert!((conj - 0.2083333).abs() < 1e-7, "F*(0.875) = {conj}");

    let families = [
        ScalarFamily::affine(2.0, 1.0).unwrap(),
        ScalarFamily::cubic(1.5, 0.3, 0.4).unwrap(),
        ScalarFamily::tabulated(&[(0.0, 1.9), (0.25, 1.6), (0.5, 1.2), (0.75, 1.05), (1.0, 0.95)])
            .unwrap(),
    ];
    for (idx, family) in families.iter().enumerate() {
        let pair = ConjugatePair::for_family(family).unwrap();
        for i in 0..=100 {
            let x = i as f64 / 100.0;
            let zeta = pair.grad_primitive(x);
            let back = pair.conjugate_grad(zeta);
            assert!(
                (back - x).abs() < 1e-8,
                "family {idx}: round trip at x = {x} gave {back}"
            );
            let gap = pair.primitive(x) + pair.conjugate_value(zeta) - x * zeta;
            assert!((gap).abs() < 1e-8, "family {idx}: Fenchel-Young gap {gap} at x = {x}");
        }
    }
    println!(
        "[PASS] criterion 6: conjugate round trips and Fenchel-Young equalities within 1e-8, \
         affine spot values within 1e-7"
    );
}

#[test]
fn criterion_7_integrator_order() {
    let params = LogitParams::new(1.0, 1.0, 3).unwrap();
    let cost = vec![0.6, -0.2, 0.3];
    let pi0 = vec![0.5, 0.2, 0.3];
    let q = popdyn::softmax_q(&cost, params.beta);
    let error_at = |step: f64| -> f64 {
        let mut sc = Scenario::driven(
            params,
            BiasChoice::Unbiased,
            CostInput::Constant(cost.clone()),
            PopulationState::new(pi0.clone()).unwrap(),
            8.0,
        );
        sc.step = step;
        sc.record_interval = 8.0;
        let traj = sim::run(&sc).unwrap();
        let last = &traj.samples.last().unwrap().pi;
        let decay = (-params.eta * 8.0f64).exp();
        last.iter()
            .zip(&q)
            .zip(&pi0)
            .map(|((p, qk), p0)| (p - (qk + decay * (p0 - qk))).abs())
            .fold(0.0, f64::max)
    };
    let ratio = error_at(0.08) / error_at(0.04);
    assert!(
        (12.0..=20.0).contains(&ratio),
        "expected fourth-order step halving, got ratio {ratio}"
    );
    println!("[PASS] criterion 7: RK4 step-halving error ratio {ratio:.2} in [12, 20]");
}

#[test]
fn criterion_8_structural_invariant_battery() {
    let mut rng = rng_for(8);
    let params = LogitParams::new(1.0, 1.0, 3).unwrap();
    let target = PopulationState::new(vec![0.2, 0.3, 0.5]).unwrap();

    let check_simplex = |label: &str, traj: &sim::TrajectoryRecord| {
        for s in &traj.samples {
            let sum: f64 = s.pi.iter().sum();
            assert!((sum - 1.0).abs() <= 1e-7, "{label}: sum drift {} at t = {}", sum - 1.0, s.t);
            assert!(
                s.pi.iter().all(|&p| p > 0.0 && p < 1.0),
                "{label}: interiority lost at t = {}",
                s.t
            );
        }
    };

    // PI loop with a nonzero integrator start: total cost stays conserved.
    let bias = AdditiveBias::uniform(ScalarFamily::affine(1.0, 0.8).unwrap(), 3).unwrap();
    let mut sc = Scenario::regulated(
        params,
        BiasChoice::Additive(bias),
        MechanismChoice::Pi(PiGains::new(1.0, 2.0).unwrap()),
        target.clone(),
        PopulationState::random_interior(3, &mut rng).unwrap(),
        120.0,
    );
    sc.initial_mu = vec![0.3, -0.2, 0.1];
    let total0: f64 = sc.initial_mu.iter().sum();
    let traj = sim::run(&sc).unwrap();
    check_simplex("pi loop", &traj);
    for s in &traj.samples {
        let total: f64 = s.cost.iter().sum();
        assert!(
            (total - total0).abs() <= 1e-7,
            "pi loop: total cost drifted by {} at t = {}",
            total - total0,
            s.t
        );
    }

    // Saturated loop: sign and ceiling guarantees.
    let gains = SaturatedGains::new(1.0, 1.0, 1.0, 1.0).unwrap();
    let ceiling = gains.cost_bound();
    let family = ScalarFamily::affine(1.05, 0.05).unwrap();
    let sc = Scenario::regulated(
        params,
        BiasChoice::Multiplicative(MultiplicativeBias::uniform(family, 3).unwrap()),
        MechanismChoice::Saturated(gains),
        target,
        PopulationState::random_interior(3, &mut rng).unwrap(),
        120.0,
    );
    let traj = sim::run(&sc).unwrap();
    check_simplex("saturated loop", &traj);
    for s in &traj.samples {
        assert!(s.mu.iter().all(|&m| m <= 1e-12));
        assert!(s.cost.iter().all(|&t_k| t_k < ceiling));
    }

    // Driven biased run over a long horizon.
    let bias = AdditiveBias::uniform(ScalarFamily::affine(1.0, 1.5).unwrap(), 3).unwrap();
    let cost = random_sinusoid_mix(&mut rng, 3, 3);
    let sc = Scenario::driven(
        params,
        BiasChoice::Additive(bias),
        cost,
        PopulationState::random_interior(3, &mut rng).unwrap(),
        300.0,
    );
    let traj = sim::run(&sc).unwrap();
    check_simplex("driven run", &traj);

    println!(
        "[PASS] criterion 8: simplex sum, interiority, PI cost conservation, and saturated \
         bounds hold at every recorded sample"
    );
}
