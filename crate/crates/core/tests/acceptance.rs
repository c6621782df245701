//! Acceptance gate: one PASS/FAIL line per criterion.
//!
//! Runs as a plain binary (`harness = false`) so the report is always printed.
//! The process fails if any criterion fails, except those listed in
//! `KNOWN_UNATTAINABLE`, which are still evaluated and reported as FAIL.

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use smcalc_core::calculus::{field_catalog, verify_chain_rule, verify_substitution_rule, DEFAULT_STEP, FIELD_NAMES};
use smcalc_core::counterexamples::{
    construct_oscillator1, construct_oscillator2, diagonal_s, parseval_check,
};
use smcalc_core::integration::{
    boundedness_quantile, dyadic_partition, strong_variation_estimate, sum_squared_increments,
    symmetric_sum, uniform_partition, Partition,
};
use smcalc_core::sde::{
    build_flow, check_inverse_pde, drift_catalog, sigma_catalog, solve_sde, verify_solution_identity,
    DEFAULT_H, DRIFT_NAMES, SIGMA_NAMES,
};
use smcalc_core::sm::{CoefficientProfile, FourierSM, GridSpec, SampledPath};
use smcalc_core::summation::NeumaierSum;

/// The 99%-quantile of `S_n` for a 64-mode profile shrinks like `2^{-n}` once
/// the dyadic cells are finer than the highest mode; see README.
const KNOWN_UNATTAINABLE: &[u32] = &[11];

type Outcome = Result<(bool, String), String>;

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

/// `r_{k+1} ≤ r_k`, allowing for rounding once both sit at the noise floor.
fn non_increasing(rs: &[f64]) -> bool {
    const FLOOR: f64 = 1e-12;
    rs.windows(2).all(|w| w[1] <= w[0] + FLOOR || (w[0] <= FLOOR && w[1] <= FLOOR))
}

fn mu_path(profile: &CoefficientProfile, seed: u64, t_end: f64, intervals: usize) -> Result<SampledPath, String> {
    let sm = FourierSM::with_seed(profile.clone(), seed).map_err(err)?;
    sm.sample_path(GridSpec::uniform(t_end, intervals).map_err(err)?).map_err(err)
}

fn c1_parseval() -> Outcome {
    let start = Instant::now();
    let mut worst = 0.0f64;
    let mut ok = true;
    for eps in [1.0, 0.5, 0.1] {
        let m = 1_000_000u64;
        let c = parseval_check(eps, m).map_err(err)?;
        let allowed = 1.0 / (m as f64 * eps) + 1e-9;
        ok &= c.deviation() <= allowed;
        worst = worst.max(c.deviation() / allowed);
    }
    let secs = start.elapsed().as_secs_f64();
    Ok((ok && secs < 5.0, format!("worst deviation/allowance {worst:.3e}, {secs:.2}s (< 5s)")))
}

fn c2_telescoping() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst = 0.0f64;
    for _ in 0..50 {
        let m = rng.gen_range(1..=16u64);
        let n = m + rng.gen_range(0..=48u64);
        let profile = CoefficientProfile::block(m, n).map_err(err)?;
        let t_end = rng.gen_range(0.5..=2.0 * PI);
        let intervals = 1 << 10;
        let eta = mu_path(&profile, rng.gen(), t_end, intervals)?;
        let mut nodes: Vec<usize> = (0..rng.gen_range(1..64)).map(|_| rng.gen_range(1..intervals)).collect();
        nodes.sort_unstable();
        nodes.dedup();
        let mut points = vec![0.0];
        points.extend(nodes.iter().map(|&k| eta.time(k)));
        points.push(t_end);
        let p = Partition::new(points).map_err(err)?;
        let one = SampledPath::constant(eta.grid(), 1.0).map_err(err)?;
        let vals: Vec<f64> = p.points().iter().map(|&t| eta.value_at(t)).collect::<Result<_, _>>().map_err(err)?;

        let first = symmetric_sum(&one, &eta, &p).map_err(err)?;
        let target = eta.last() - eta.first();
        let scale: f64 = vals.windows(2).map(|w| (w[1] - w[0]).abs()).sum::<f64>().max(target.abs());
        worst = worst.max((first - target).abs() / scale);

        let second = symmetric_sum(&eta, &eta, &p).map_err(err)?;
        let target = 0.5 * (eta.last().powi(2) - eta.first().powi(2));
        let scale: f64 = vals
            .windows(2)
            .map(|w| (0.5 * (w[0] + w[1]) * (w[1] - w[0])).abs())
            .sum::<f64>()
            .max(target.abs());
        worst = worst.max((second - target).abs() / scale);
    }
    Ok((worst <= 1e-12, format!("worst relative error {worst:.3e} over 50 triples (≤ 1e-12)")))
}

fn refinement(t_end: f64, js: &[usize]) -> Result<Vec<Partition>, String> {
    js.iter().map(|&j| uniform_partition(t_end, j).map_err(err)).collect()
}

fn c3_chain_rule() -> Outcome {
    let start = Instant::now();
    let t_end = 2.0 * PI;
    let grid = GridSpec::uniform(t_end, 1 << 12).map_err(err)?;
    let profile = CoefficientProfile::block(1, 8).map_err(err)?;
    let parts = refinement(t_end, &[1 << 8, 1 << 10, 1 << 12])?;
    let vs = [
        SampledPath::constant(grid, 0.0).map_err(err)?,
        SampledPath::from_fn(grid, |t| t).map_err(err)?,
        SampledPath::from_fn(grid, |t| 0.5 * t).map_err(err)?,
    ];
    let (mut worst, mut monotone, mut cases) = (0.0f64, true, 0);
    for name in ["linear", "quadratic", "bilinear", "sin-shift"] {
        let f = field_catalog(name).map_err(err)?;
        for seed in 0..5 {
            let mu = mu_path(&profile, seed, t_end, 1 << 12)?;
            for v in &vs {
                let check = verify_chain_rule(&f, &mu, v, &parts, 1e-2, DEFAULT_STEP).map_err(err)?;
                worst = worst.max(check.residual);
                let rs: Vec<f64> = check.residuals_by_mesh.iter().map(|r| r.1).collect();
                monotone &= non_increasing(&rs);
                cases += 1;
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    Ok((
        worst < 1e-2 && monotone && secs < 30.0,
        format!("{cases} cases, worst residual {worst:.3e} (< 1e-2), monotone in mesh: {monotone}, {secs:.2}s (< 30s)"),
    ))
}

fn c4_substitution_rule() -> Outcome {
    let t_end = 2.0 * PI;
    let grid = GridSpec::uniform(t_end, 1 << 12).map_err(err)?;
    let profile = CoefficientProfile::block(1, 8).map_err(err)?;
    let parts = refinement(t_end, &[1 << 8, 1 << 10, 1 << 12])?;
    let v = SampledPath::from_fn(grid, |t| t).map_err(err)?;
    let (mut worst, mut worst_identity) = (0.0f64, 0.0f64);
    for seed in 0..5 {
        let mu = mu_path(&profile, seed, t_end, 1 << 12)?;
        for g_name in ["identity-g", "square-g"] {
            let g = field_catalog(g_name).map_err(err)?;
            for f_name in ["one", "linear"] {
                let f = field_catalog(f_name).map_err(err)?;
                let check = verify_substitution_rule(&f, &g, &mu, &v, &parts, 1e-2).map_err(err)?;
                let r = check.residuals_by_mesh.last().map_or(f64::NAN, |r| r.1);
                if g_name == "identity-g" {
                    worst_identity = worst_identity.max(r);
                } else {
                    worst = worst.max(r);
                }
            }
        }
    }
    Ok((
        worst < 1e-2 && worst_identity <= 1e-12,
        format!("worst residual at j=2^12 {worst:.3e} (< 1e-2), g = x case {worst_identity:.3e} (≤ 1e-12)"),
    ))
}

fn c5_doss_sussmann() -> Outcome {
    let t_end = 2.0 * PI;
    let profile = CoefficientProfile::block(1, 8).map_err(err)?;
    let lin = sigma_catalog("linear-sigma", 0.0).map_err(err)?;
    let zero_b = drift_catalog("zero-drift", 0.0).map_err(err)?;
    let mut worst_exp = 0.0f64;
    for seed in 0..5 {
        let mu = mu_path(&profile, seed, t_end, 1 << 12)?;
        let sol = solve_sde(&lin, &zero_b, 1.0, &mu, 1e-3).map_err(err)?;
        for (x, m) in sol.x.values().iter().zip(mu.values()) {
            worst_exp = worst_exp.max((x - m.exp()).abs());
        }
    }
    let zero_s = sigma_catalog("zero-sigma", 0.0).map_err(err)?;
    let lin_b = drift_catalog("linear-drift", 0.0).map_err(err)?;
    let mu = mu_path(&profile, 0, t_end, 1 << 12)?;
    let sol = solve_sde(&zero_s, &lin_b, 1.0, &mu, 1e-3).map_err(err)?;
    let worst_ode = sol
        .x
        .values()
        .iter()
        .enumerate()
        .map(|(k, x)| (x - sol.x.time(k).exp()).abs())
        .fold(0.0, f64::max);
    Ok((
        worst_exp < 1e-5 && worst_ode < 1e-7,
        format!("max|X − e^μ| {worst_exp:.3e} (< 1e-5), max|X − e^t| {worst_ode:.3e} (< 1e-7)"),
    ))
}

fn c6_solution_identity() -> Outcome {
    let t_end = 1.0;
    let profile = CoefficientProfile::block(1, 8).map_err(err)?;
    let mu = mu_path(&profile, 1, t_end, 1 << 12)?;
    let coarse = uniform_partition(t_end, 1 << 8).map_err(err)?;
    let fine = uniform_partition(t_end, 1 << 12).map_err(err)?;
    let (mut worst, mut improving, mut cases) = (0.0f64, true, 0);
    for s_name in SIGMA_NAMES {
        let sigma = sigma_catalog(s_name, 1.0).map_err(err)?;
        for b_name in DRIFT_NAMES {
            let b = drift_catalog(b_name, 1.0).map_err(err)?;
            let sol = solve_sde(&sigma, &b, 0.5, &mu, DEFAULT_H).map_err(err)?;
            for psi_name in FIELD_NAMES {
                let psi = field_catalog(psi_name).map_err(err)?;
                let r_fine = verify_solution_identity(&sol, &sigma, &b, &mu, &psi, &fine).map_err(err)?;
                let r_coarse = verify_solution_identity(&sol, &sigma, &b, &mu, &psi, &coarse).map_err(err)?;
                worst = worst.max(r_fine);
                improving &= non_increasing(&[r_coarse, r_fine]);
                cases += 1;
            }
        }
    }
    Ok((
        worst < 1e-2 && improving,
        format!("{cases} (σ, b, ψ) combinations, worst residual at j=2^12 {worst:.3e} (< 1e-2), finer ≤ coarser: {improving}"),
    ))
}

fn c7_inverse_pde() -> Outcome {
    let lin = sigma_catalog("linear-sigma", 0.0).map_err(err)?;
    let flow = build_flow(&lin, (-1.0, 1.0), (-2.0, 2.0), 1e-3).map_err(err)?;
    let r_lin = check_inverse_pde(&flow, 50).map_err(err)?;
    let cst = sigma_catalog("const-sigma", 1.0).map_err(err)?;
    let flow = build_flow(&cst, (-1.0, 1.0), (-2.0, 2.0), 1e-3).map_err(err)?;
    let r_cst = check_inverse_pde(&flow, 50).map_err(err)?;
    Ok((
        r_lin < 1e-4 && r_cst < 1e-6,
        format!("σ = x residual {r_lin:.3e} (< 1e-4), σ = 1 residual {r_cst:.3e} (< 1e-6)"),
    ))
}

/// Sequential compensated sum of `sin²(iε/2)/(i²ε)` over `[m, n]`.
fn resum(m: u64, n: u64, eps: f64) -> f64 {
    let mut acc = NeumaierSum::new();
    for i in m..=n {
        let x = i as f64;
        acc += (0.5 * x * eps).sin().powi(2) / (x * x * eps);
    }
    acc.value()
}

fn c8_oscillator1() -> Outcome {
    let start = Instant::now();
    let cert = construct_oscillator1(2, 0.01).map_err(err)?;
    let blocks = cert.profile.intervals();
    let eps = &cert.eps_sequence;
    if eps.len() != 4 || cert.tail_starts.len() != 2 {
        return Ok((false, format!("expected 4 scales, got {}", eps.len())));
    }
    // Slack for rounding in sums of at most a few million positive terms.
    let slack = 1e-12;
    let mut lines = Vec::new();
    let mut ok = true;
    for (j, &e) in eps.iter().enumerate() {
        let f: f64 = blocks.iter().map(|&(m, n)| resum(m, n, e)).sum();
        if j % 2 == 0 {
            ok &= f - slack > 0.5;
        } else {
            let k = j / 2;
            // Any continuation of the profile lives above m_{k+1}.
            let m_next = cert.tail_starts[k];
            let tail = (2.0 * PI - e) / 8.0 - resum(1, m_next - 1, e);
            let head: f64 = blocks[..=k].iter().map(|&(m, n)| resum(m, n, e)).sum();
            ok &= f + slack < 0.25 && head + tail + slack < 0.25;
        }
        lines.push(format!("f({e:.3e})={f:.4}"));
    }
    let verified = cert.verify().map_err(err)?.passed;
    let secs = start.elapsed().as_secs_f64();
    Ok((
        ok && verified && secs < 60.0,
        format!("{}, certificate re-verifies: {verified}, {secs:.2}s (< 60s)", lines.join(" ")),
    ))
}

/// `Σ_k (∫_{Δ_k} cos(it) dt)²` summed directly over the cells.
fn brute_mode_energy(i: u64, level: u32) -> f64 {
    let cells = 1u64 << level;
    let h = 2.0 * PI / cells as f64;
    let x = i as f64;
    (0..cells)
        .map(|k| {
            let (a, b) = (k as f64 * h, (k + 1) as f64 * h);
            ((x * b).sin() - (x * a).sin()).powi(2) / (x * x)
        })
        .sum()
}

fn c9_oscillator2() -> Outcome {
    let cert = construct_oscillator2(2, 100).map_err(err)?;
    let mut ok = cert.scale_pairs.len() == 2;
    ok &= cert.s_lower.iter().take(2).all(|&s| s >= 2.0);
    ok &= cert.a_values.iter().all(|&a| a < 0.25) && cert.eb_values.iter().all(|&b| b < 1.0 / 16.0);
    let verified = cert.verify().map_err(err)?.passed;
    ok &= verified;

    // E[B] at ñ₁ directly over every mode of block 2; at ñ₂ on a sample of
    // modes of block 3, compared term by term with the closed form.
    let mut eb_oracle_ok = true;
    let (_, nt1) = cert.scale_pairs[0];
    let (a, b) = cert.profile.intervals()[1];
    let brute: f64 = (a..=b).map(|i| brute_mode_energy(i, nt1)).sum();
    eb_oracle_ok &= (brute - cert.eb_values[0]).abs() < 1e-9 * brute.max(1e-3);
    let (_, nt2) = cert.scale_pairs[1];
    let (a, b) = cert.profile.intervals()[2];
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for _ in 0..32 {
        let i = rng.gen_range(a..=b);
        let single = CoefficientProfile::block(i, i).map_err(err)?;
        let formula = smcalc_core::counterexamples::expected_b(&single, nt2).map_err(err)?;
        let brute = brute_mode_energy(i, nt2);
        eb_oracle_ok &= (formula - brute).abs() < 1e-9 * brute.max(1e-18) + 1e-20;
    }
    ok &= eb_oracle_ok;

    let fractions: Vec<f64> = cert.empirical.iter().map(|e| e.fraction_below_one).collect();
    ok &= fractions.len() == 2 && fractions.iter().all(|&f| f >= 0.9);

    let mut rng = ChaCha8Rng::seed_from_u64(20);
    let mut worst_diag = 0.0f64;
    for _ in 0..20 {
        let n = rng.gen_range(4..=8u32);
        let limit = (1u64 << (n - 1)) - 1;
        let m = rng.gen_range(1..=limit);
        let top = rng.gen_range(m..=limit);
        let profile = CoefficientProfile::block(m, top).map_err(err)?;
        let d = diagonal_s(&profile, n).map_err(err)?;
        let sm = FourierSM::with_seed(profile, rng.gen()).map_err(err)?;
        let brute = sum_squared_increments(&sm, &dyadic_partition(2.0 * PI, n).map_err(err)?).map_err(err)?;
        worst_diag = worst_diag.max((d - brute).abs());
    }
    ok &= worst_diag < 1e-10;
    Ok((
        ok,
        format!(
            "pairs {:?}, S at n_j {:?}, A {:?}, E[B] {:?}, fraction S<1 {:?}, E[B] oracle: {eb_oracle_ok}, diagonal vs brute force {worst_diag:.2e} (< 1e-10), re-verifies: {verified}",
            cert.scale_pairs,
            &cert.s_lower[..2],
            cert.a_values.iter().map(|a| format!("{a:.4}")).collect::<Vec<_>>(),
            cert.eb_values.iter().map(|b| format!("{b:.4}")).collect::<Vec<_>>(),
            fractions
        ),
    ))
}

fn c10_cubic_variation() -> Outcome {
    let t_end = 2.0 * PI;
    let t1 = t_end - 0.2;
    let profile = CoefficientProfile::block(1, 64).map_err(err)?;
    let mut qs = Vec::new();
    for eps in [0.1, 0.05, 0.01] {
        let q = boundedness_quantile(
            |seed| {
                let path = mu_path(&profile, seed, t_end, 1 << 14).map_err(smcalc_core::Error::Domain)?;
                strong_variation_estimate(&path, 3, eps, t1)
            },
            50,
            0.95,
        )
        .map_err(err)?;
        qs.push(q);
    }
    let decreasing = qs.windows(2).all(|w| w[1] < w[0]);
    let ratio = qs[2] / qs[0];
    Ok((
        decreasing && ratio < 0.2,
        format!("95% quantiles at ε = 0.1, 0.05, 0.01: {qs:.4?}; ratio {ratio:.3} (< 0.2), decreasing: {decreasing}"),
    ))
}

fn c11_boundedness() -> Outcome {
    let profile = CoefficientProfile::block(1, 64).map_err(err)?;
    let mut qs = Vec::new();
    for level in [6u32, 8, 10] {
        let p = dyadic_partition(2.0 * PI, level).map_err(err)?;
        let q = boundedness_quantile(
            |seed| sum_squared_increments(&FourierSM::with_seed(profile.clone(), seed)?, &p),
            100,
            0.99,
        )
        .map_err(err)?;
        qs.push(q);
    }
    let (lo, hi) = qs.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), &q| (lo.min(q), hi.max(q)));
    let factor = hi / lo;
    Ok((
        factor < 2.0,
        format!("99% quantiles at levels 6, 8, 10: {qs:.4?}; max/min {factor:.2} (< 2)"),
    ))
}

type Criterion = (u32, &'static str, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 11] = [
        (1, "Parseval identity", c1_parseval),
        (2, "telescoping exactness", c2_telescoping),
        (3, "chain rule", c3_chain_rule),
        (4, "substitution rule", c4_substitution_rule),
        (5, "Doss-Sussmann linear oracle", c5_doss_sussmann),
        (6, "solution identity", c6_solution_identity),
        (7, "inverse-flow PDE", c7_inverse_pde),
        (8, "counterexample 1", c8_oscillator1),
        (9, "counterexample 2", c9_oscillator2),
        (10, "cubic-variation trend", c10_cubic_variation),
        (11, "boundedness surrogate", c11_boundedness),
    ];
    let mut unexpected = Vec::new();
    let mut total = Duration::ZERO;
    for (id, name, run) in criteria {
        let start = Instant::now();
        let (passed, detail) = match run() {
            Ok(r) => r,
            Err(e) => (false, format!("error: {e}")),
        };
        let elapsed = start.elapsed();
        total += elapsed;
        let known = KNOWN_UNATTAINABLE.contains(&id);
        let tag = match (passed, known) {
            (true, _) => "PASS",
            (false, true) => "FAIL (known unattainable)",
            (false, false) => "FAIL",
        };
        println!("criterion {id:>2} [{tag}] {name}: {detail} [{:.2}s]", elapsed.as_secs_f64());
        if !passed && !known {
            unexpected.push(id);
        }
    }
    println!("acceptance total {:.1}s", total.as_secs_f64());
    if !unexpected.is_empty() {
        eprintln!("unexpected failures: {unexpected:?}");
        std::process::exit(1);
    }
}
