//! Exit criteria. Each test prints one `PASS`/`FAIL` line; run with
//! `cargo test -p ecp-core --test acceptance -- --nocapture --test-threads=1`
//! to see them in order.

use std::time::{Duration, Instant};

use ecp_core::comparison::{
    default_curves, figure3_grid, figure3_point, figure3_sweep, prior_total_prob,
    sweep_alpha_range, sweep_beta, PriorEcpParams, DEFAULT_GRID_POINTS,
};
use ecp_core::protocols::{
    analytic_total_probability, execute_plan, plan_transmittances, run_ecp, run_single_photon_ecp,
    CircuitEvent, PlanStep, ProtocolPlan, WCoefficients, WKind,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn verdict(id: u32, name: &str, ok: bool, detail: String) {
    println!(
        "[{}] criterion {id}: {name} ({detail})",
        if ok { "PASS" } else { "FAIL" }
    );
    assert!(ok, "criterion {id} failed: {detail}");
}

fn within(elapsed: Duration, limit: Duration) -> bool {
    elapsed < limit
}

#[test]
fn criterion_1_three_mode_worked_example() {
    let c = WCoefficients::from_real(&[0.5f64.sqrt(), 0.3f64.sqrt(), 0.2f64.sqrt()]).unwrap();
    // Warm-up so the timing reflects the run, not first-touch allocation.
    let _ = run_single_photon_ecp(&c).unwrap();
    let start = Instant::now();
    let r = run_single_photon_ecp(&c).unwrap();
    let elapsed = start.elapsed();

    let ok = r.step_probs.len() == 2
        && (r.step_probs[0] - 0.7).abs() < 1e-12
        && (r.step_probs[1] - 6.0 / 7.0).abs() < 1e-12
        && (r.total_prob - 0.6).abs() < 1e-12
        && (r.total_prob - 3.0 * 0.2).abs() < 1e-12
        && r.fidelity_to_target >= 1.0 - 1e-10
        && within(elapsed, Duration::from_millis(1));
    verdict(
        1,
        "N=3 single-photon worked example",
        ok,
        format!(
            "steps {:?}, total {:.12}, fidelity {:.12}, {:?}",
            r.step_probs, r.total_prob, r.fidelity_to_target, elapsed
        ),
    );
}

#[test]
fn criterion_2_general_n_law() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0002);
    let start = Instant::now();
    let mut max_err = 0f64;
    let mut min_fid = 1f64;
    for _ in 0..1000 {
        let n = rng.gen_range(2..=8);
        let phased = rng.gen_bool(0.5);
        let c = WCoefficients::random(&mut rng, n, phased).unwrap();
        let law = n as f64 * c.min_squared_modulus();
        for kind in [WKind::SinglePhoton, WKind::Polarization] {
            let r = run_ecp(&c, kind).unwrap();
            max_err = max_err.max((r.total_prob - law).abs());
            min_fid = min_fid.min(r.fidelity_to_target);
        }
    }
    let elapsed = start.elapsed();
    let ok = max_err < 1e-10 && min_fid >= 1.0 - 1e-10 && within(elapsed, Duration::from_secs(5));
    verdict(
        2,
        "total = N|a_min|^2 on 1000 random instances, both drivers",
        ok,
        format!("max error {max_err:.3e}, min fidelity {min_fid:.15}, {elapsed:?}"),
    );
}

#[test]
fn criterion_3_protocol_equivalence() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0003);
    let mut max_diff = 0f64;
    let mut len_mismatch = 0;
    for _ in 0..200 {
        let n = rng.gen_range(3..=5);
        let phased = rng.gen_bool(0.5);
        let c = WCoefficients::random(&mut rng, n, phased).unwrap();
        let a = run_ecp(&c, WKind::SinglePhoton).unwrap();
        let b = run_ecp(&c, WKind::Polarization).unwrap();
        if a.step_probs.len() != b.step_probs.len() {
            len_mismatch += 1;
        }
        for (x, y) in a.step_probs.iter().zip(&b.step_probs) {
            max_diff = max_diff.max((x - y).abs());
        }
    }
    verdict(
        3,
        "single-photon and polarization step probabilities agree",
        max_diff < 1e-12 && len_mismatch == 0,
        format!("max elementwise difference {max_diff:.3e}, length mismatches {len_mismatch}"),
    );
}

#[test]
fn criterion_4_comparison_curves() {
    let start = Instant::now();
    let curves = default_curves();
    let (lo, _) = sweep_alpha_range();
    let at_lo = figure3_point(lo, &curves).unwrap();
    let value = |label| at_lo.iter().find(|r| r.curve == label).unwrap().probability;
    let d0 = value('D');
    let c0 = value('C');

    let grid = figure3_grid(DEFAULT_GRID_POINTS);
    let table = figure3_sweep(&grid, &curves).unwrap();
    let mut order_violations = 0;
    let mut worst_tail = 0f64;
    for &alpha in &grid {
        let p = |l| table.get(alpha, l).unwrap();
        let (a, b, c, d) = (p('A'), p('B'), p('C'), p('D'));
        if !(a <= b && b <= c && c <= d + 1e-9) {
            order_violations += 1;
        }
        let long = PriorEcpParams::from_alpha_beta(alpha, sweep_beta(), 25, 25).unwrap();
        worst_tail = worst_tail.max((prior_total_prob(&long) - d).abs());
    }
    let elapsed = start.elapsed();
    let ok = (d0 - 1.0).abs() < 1e-9
        && (c0 - 0.93).abs() <= 0.01
        && table.rows.len() == 4 * DEFAULT_GRID_POINTS
        && order_violations == 0
        && worst_tail < 1e-3
        && within(elapsed, Duration::from_secs(1));
    verdict(
        4,
        "comparison sweep at beta = 1/sqrt(3)",
        ok,
        format!(
            "D(1/sqrt3) = {d0:.12}, C(1/sqrt3) = {c0:.6}, ordering violations {order_violations}, \
             max |caps25 - D| {worst_tail:.3e}, {elapsed:?}"
        ),
    );
}

#[test]
fn criterion_5_conservation() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0005);
    let (mut detects, mut elements) = (0usize, 0usize);
    let mut worst_detect = 0f64;
    let mut worst_norm = 0f64;
    for _ in 0..500 {
        let n = rng.gen_range(2..=6);
        let phased = rng.gen_bool(0.5);
        let c = WCoefficients::random(&mut rng, n, phased).unwrap();
        let kind = if rng.gen_bool(0.5) {
            WKind::SinglePhoton
        } else {
            WKind::Polarization
        };
        // Random parties with random transmittances, not just the optimal plan.
        let mut steps = Vec::new();
        for party in 0..n {
            if rng.gen_bool(0.7) {
                steps.push(PlanStep {
                    party,
                    transmittance: rng.gen_range(0.0..=1.0),
                });
            }
        }
        let plan = ProtocolPlan::custom(&c, steps).unwrap();
        let r = match execute_plan(&c, &plan, kind) {
            Ok(r) => r,
            // A run whose kept branch empties cannot continue; only
            // possible when some transmittance is exactly 0.
            Err(ecp_core::Error::ZeroState) => continue,
            Err(e) => panic!("{e}"),
        };
        for e in r.events {
            match e {
                CircuitEvent::Detect { kept, discarded } => {
                    detects += 1;
                    worst_detect = worst_detect.max((kept + discarded - 1.0).abs());
                }
                CircuitEvent::Vbs { norm_in, norm_out }
                | CircuitEvent::Pbs { norm_in, norm_out } => {
                    elements += 1;
                    worst_norm = worst_norm.max((norm_in - norm_out).abs());
                }
            }
        }
    }
    verdict(
        5,
        "probability and norm conservation over 500 random circuits",
        worst_detect < 1e-12 && worst_norm < 1e-12 && detects > 0 && elements > 0,
        format!(
            "{detects} detections (worst |kept+discarded-1| {worst_detect:.3e}), \
             {elements} beam splitters (worst norm drift {worst_norm:.3e})"
        ),
    );
}

#[test]
fn criterion_6_optimality_bound() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0006);
    let start = Instant::now();
    let mut bound_violations = 0usize;
    let mut high_fidelity_points = 0usize;
    let mut worst_planner = 0f64;
    for k in 0..20 {
        // Generic draws almost never put the optimum on a 0.01 grid, which
        // would leave no unit-fidelity point to test. Every other instance
        // is built backwards from random grid transmittances so the grid
        // contains its optimum.
        let c = if k % 2 == 0 {
            WCoefficients::random(&mut rng, 3, false).unwrap()
        } else {
            let t1 = rng.gen_range(2..=99) as f64 / 100.0;
            let t2 = rng.gen_range(2..=99) as f64 / 100.0;
            let m = 1.0 / (1.0 + 1.0 / t1 + 1.0 / t2);
            WCoefficients::from_squared_moduli(&[m / t1, m / t2, m], None).unwrap()
        };
        let bound = 3.0 * c.min_squared_modulus();
        let plan = plan_transmittances(&c);
        let r = execute_plan(&c, &plan, WKind::SinglePhoton).unwrap();
        worst_planner = worst_planner.max((r.total_prob - bound).abs());
        if r.fidelity_to_target <= 1.0 - 1e-9 {
            bound_violations += 1;
        }

        // The two parties that are not the minimum get the swept settings.
        let mut parties: Vec<usize> = (0..3).filter(|&i| i != c.min_index()).collect();
        parties.sort_by(|&i, &j| c.amps()[j].norm_sqr().total_cmp(&c.amps()[i].norm_sqr()));
        for i in 1..=100 {
            for j in 1..=100 {
                let steps = vec![
                    PlanStep {
                        party: parties[0],
                        transmittance: i as f64 / 100.0,
                    },
                    PlanStep {
                        party: parties[1],
                        transmittance: j as f64 / 100.0,
                    },
                ];
                let plan = ProtocolPlan::custom(&c, steps).unwrap();
                let r = execute_plan(&c, &plan, WKind::SinglePhoton).unwrap();
                if r.fidelity_to_target > 1.0 - 1e-9 {
                    high_fidelity_points += 1;
                    if r.total_prob > bound + 1e-9 {
                        bound_violations += 1;
                    }
                }
            }
        }
    }
    let elapsed = start.elapsed();
    let ok =
        bound_violations == 0 && worst_planner < 1e-10 && within(elapsed, Duration::from_secs(30));
    verdict(
        6,
        "no grid setting beats 3|a_min|^2 at unit fidelity; planner attains it",
        ok,
        format!(
            "{high_fidelity_points} unit-fidelity grid points, {bound_violations} violations, \
             planner error {worst_planner:.3e}, {elapsed:?}"
        ),
    );
}

#[test]
fn analytic_law_is_what_the_planner_targets() {
    let c = WCoefficients::from_squared_moduli(&[0.4, 0.35, 0.25], None).unwrap();
    assert!((analytic_total_probability(&c) - 0.75).abs() < 1e-15);
}
