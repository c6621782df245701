use std::f64::consts::PI;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::{bail, ensure, Context, Result};
use clap::Args;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use smcalc_core::calculus::{field_catalog, verify_chain_rule, verify_substitution_rule, RuleCheck};
use smcalc_core::counterexamples::{
    construct_oscillator1_with, construct_oscillator2_with, parseval_check, ConstructionFailure,
    Oscillator1Budget, Oscillator1Certificate, Oscillator2Certificate, Oscillator2Options, VerificationReport,
};
use smcalc_core::integration::{
    dyadic_partition, empirical_quantile, strong_variation_estimate, sum_squared_increments,
    symmetric_integral, uniform_partition, ConvergenceReport, Partition,
};
use smcalc_core::sde::{
    check_inverse_pde, drift_catalog, sigma_catalog, solve_sde, verify_solution_identity, Drift,
    SdeSolution, Sigma,
};
use smcalc_core::sm::{
    holder_diagnostic, CoefficientProfile, FourierSM, GridSpec, RademacherSequence, SampledPath, TruncationPolicy,
};

use crate::config::{resolve, Defaults};
use crate::output::{display, to_json_string, OutDir};

pub struct Ctx {
    pub out: PathBuf,
    pub threads: Option<usize>,
    pub deterministic: bool,
    pub file: Option<Map<String, Value>>,
}

impl Ctx {
    fn resolve<T: Serialize + DeserializeOwned + Defaults>(&self, flags: T) -> Result<T> {
        resolve(flags, self.file.as_ref())
    }

    fn out(&self) -> Result<OutDir> {
        OutDir::new(self.out.clone())
    }

    /// Writes `{command, version, timestamp, threads, config, passed, result}`.
    fn report<C: Serialize, R: Serialize>(
        &self,
        dir: &OutDir,
        command: &str,
        config: &C,
        passed: bool,
        result: &R,
    ) -> Result<PathBuf> {
        let timestamp = if self.deterministic {
            None
        } else {
            Some(SystemTime::now().duration_since(UNIX_EPOCH)?.as_secs())
        };
        let envelope = json!({
            "command": command,
            "version": env!("CARGO_PKG_VERSION"),
            "timestamp": timestamp,
            "threads": self.threads,
            "config": config,
            "passed": passed,
            "result": result,
        });
        dir.json(&format!("{}.json", command.replace('-', "_")), &envelope)
    }
}

fn announce(command: &str, passed: bool, files: &[PathBuf], summary: &str) {
    let status = if passed { "ok" } else { "FAILED" };
    let files: Vec<String> = files.iter().map(|p| display(p)).collect();
    println!("{command}: {status}: {summary} [{}]", files.join(", "));
}

fn parse_profile(s: &str) -> Result<CoefficientProfile, String> {
    if s == "full" {
        return Ok(CoefficientProfile::full());
    }
    serde_json::from_str(s).map_err(|e| format!("malformed profile `{s}`: {e}"))
}

/// Parameters of the driving measure and its sampling grid.
#[derive(Args, Serialize, Deserialize, Debug, Clone, Default)]
pub struct SmArgs {
    /// Coefficient profile as a JSON array of [m, n] blocks, or `full`.
    #[arg(long, value_parser = parse_profile)]
    pub profile: Option<CoefficientProfile>,
    /// Seed of the Rademacher signs.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Time horizon T.
    #[arg(long)]
    pub t_end: Option<f64>,
    /// Grid intervals on [0, T].
    #[arg(long)]
    pub intervals: Option<usize>,
    /// Largest Fourier index kept for infinite profiles.
    #[arg(long)]
    pub max_index: Option<u64>,
}

impl Defaults for SmArgs {
    fn with_defaults(self) -> Self {
        Self {
            profile: Some(self.profile.unwrap_or_else(|| CoefficientProfile::block(1, 8).expect("valid block"))),
            seed: Some(self.seed.unwrap_or(0)),
            t_end: Some(self.t_end.unwrap_or(2.0 * PI)),
            intervals: Some(self.intervals.unwrap_or(1 << 12)),
            max_index: Some(self.max_index.unwrap_or(TruncationPolicy::default().max_index)),
        }
    }
}

impl SmArgs {
    fn t_end(&self) -> f64 {
        self.t_end.expect("resolved")
    }

    fn measure_with_seed(&self, seed: u64) -> Result<FourierSM> {
        let policy = TruncationPolicy {
            max_index: self.max_index.expect("resolved"),
            ..TruncationPolicy::default()
        };
        let profile = self.profile.clone().expect("resolved");
        Ok(FourierSM::new(profile, RademacherSequence::new(seed), policy, self.t_end())?)
    }

    fn grid(&self) -> Result<GridSpec> {
        Ok(GridSpec::uniform(self.t_end(), self.intervals.expect("resolved"))?)
    }

    fn path_with_seed(&self, seed: u64) -> Result<SampledPath> {
        Ok(self.measure_with_seed(seed)?.sample_path(self.grid()?)?)
    }

    fn path(&self) -> Result<SampledPath> {
        self.path_with_seed(self.seed.expect("resolved"))
    }
}

/// `zero`, `t` or `half-t`.
fn v_path(name: &str, grid: GridSpec) -> Result<SampledPath> {
    Ok(match name {
        "zero" => SampledPath::constant(grid, 0.0)?,
        "t" => SampledPath::clock(grid)?,
        "half-t" => SampledPath::from_fn(grid, |t| 0.5 * t)?,
        other => bail!("unknown V path `{other}` (known: zero, t, half-t)"),
    })
}

/// `mu`, `t`, `one`, or a field name evaluated at `(μ_t, V_t)`.
fn integrand(name: &str, mu: &SampledPath, v: &SampledPath) -> Result<SampledPath> {
    Ok(match name {
        "mu" => mu.clone(),
        "t" => SampledPath::clock(mu.grid())?,
        other => {
            let f = field_catalog(other)?;
            mu.zip_map(v, |x, w| f.value(x, w))?
        }
    })
}

fn refinement(t_end: f64, levels: &[u32]) -> Result<Vec<Partition>> {
    levels
        .iter()
        .map(|&l| {
            ensure!(l < 31, "refinement level {l} too large");
            Ok(uniform_partition(t_end, 1usize << l)?)
        })
        .collect()
}

fn default_levels() -> Vec<u32> {
    vec![8, 10, 12]
}

// ---------------------------------------------------------------- sample-path

#[derive(Args, Serialize, Deserialize, Debug, Clone, Default)]
pub struct SamplePathArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub sm: SmArgs,
    /// Also fit a Hölder exponent over this many dyadic levels.
    #[arg(long)]
    pub holder_levels: Option<u32>,
}

impl Defaults for SamplePathArgs {
    fn with_defaults(self) -> Self {
        Self {
            sm: self.sm.with_defaults(),
            holder_levels: self.holder_levels,
        }
    }
}

pub fn sample_path(ctx: &Ctx, flags: SamplePathArgs) -> Result<bool> {
    let cfg = ctx.resolve(flags)?;
    let dir = ctx.out()?;
    let sm = cfg.sm.measure_with_seed(cfg.sm.seed.expect("resolved"))?;
    let path = sm.sample_path(cfg.sm.grid()?)?;
    let holder = cfg.holder_levels.map(|l| holder_diagnostic(&path, l)).transpose()?;
    let (lo, hi) = path.min_max();
    let csv = dir.with_writer("sample_path.csv", |w| path.write_csv(w))?;
    let result = json!({
        "points": path.len(),
        "min": lo,
        "max": hi,
        "last": path.last(),
        "path_tail_bound": sm.path_tail_bound(),
        "holder": holder,
    });
    let report = ctx.report(&dir, "sample-path", &cfg, true, &result)?;
    announce("sample-path", true, &[csv, report], &format!("{} points in [{lo:.4}, {hi:.4}]", path.len()));
    Ok(true)
}

// --------------------------------------------------------------- sym-integral

#[derive(Args, Serialize, Deserialize, Debug, Clone, Default)]
pub struct SymIntegralArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub sm: SmArgs,
    /// Integrand: mu, t, or a field name applied to (μ, V).
    #[arg(long)]
    pub xi: Option<String>,
    /// Integrator: mu, t, or a field name applied to (μ, V).
    #[arg(long)]
    pub eta: Option<String>,
    /// Bounded-variation path V: zero, t or half-t.
    #[arg(long)]
    pub v: Option<String>,
    /// Uniform partitions with 2^level intervals.
    #[arg(long, value_delimiter = ',')]
    pub levels: Option<Vec<u32>>,
    #[arg(long)]
    pub tol: Option<f64>,
}

impl Defaults for SymIntegralArgs {
    fn with_defaults(self) -> Self {
        Self {
            sm: self.sm.with_defaults(),
            xi: Some(self.xi.unwrap_or_else(|| "mu".into())),
            eta: Some(self.eta.unwrap_or_else(|| "mu".into())),
            v: Some(self.v.unwrap_or_else(|| "zero".into())),
            levels: Some(self.levels.unwrap_or_else(default_levels)),
            tol: Some(self.tol.unwrap_or(smcalc_core::integration::DEFAULT_TOL)),
        }
    }
}

fn mesh_table(r: &ConvergenceReport) -> Vec<(f64, f64)> {
    r.estimates.clone()
}

pub fn sym_integral(ctx: &Ctx, flags: SymIntegralArgs) -> Result<bool> {
    let cfg = ctx.resolve(flags)?;
    let dir = ctx.out()?;
    let mu = cfg.sm.path()?;
    let v = v_path(cfg.v.as_deref().expect("resolved"), mu.grid())?;
    let xi = integrand(cfg.xi.as_deref().expect("resolved"), &mu, &v)?;
    let eta = integrand(cfg.eta.as_deref().expect("resolved"), &mu, &v)?;
    let parts = refinement(cfg.sm.t_end(), cfg.levels.as_deref().expect("resolved"))?;
    let report = symmetric_integral(&xi, &eta, &parts, cfg.tol.expect("resolved"))?;
    let csv = dir.table("sym_integral.csv", ("mesh", "sum"), &mesh_table(&report))?;
    let passed = report.converged;
    let json = ctx.report(&dir, "sym-integral", &cfg, passed, &report)?;
    announce(
        "sym-integral",
        passed,
        &[csv, json],
        &format!("value {:.12e}, spread {:.3e}", report.extrapolated, report.spread),
    );
    Ok(passed)
}

// ---------------------------------------------------- chain and substitution

#[derive(Args, Serialize, Deserialize, Debug, Clone, Default)]
pub struct ChainRuleArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub sm: SmArgs,
    /// Field f(x, v).
    #[arg(long)]
    pub f: Option<String>,
    /// Bounded-variation path V: zero, t or half-t.
    #[arg(long)]
    pub v: Option<String>,
    #[arg(long, value_delimiter = ',')]
    pub levels: Option<Vec<u32>>,
    #[arg(long)]
    pub tol: Option<f64>,
    /// Simpson step for the antiderivative.
    #[arg(long)]
    pub step: Option<f64>,
}

impl Defaults for ChainRuleArgs {
    fn with_defaults(self) -> Self {
        Self {
            sm: self.sm.with_defaults(),
            f: Some(self.f.unwrap_or_else(|| "quadratic".into())),
            v: Some(self.v.unwrap_or_else(|| "zero".into())),
            levels: Some(self.levels.unwrap_or_else(default_levels)),
            tol: Some(self.tol.unwrap_or(1e-2)),
            step: Some(self.step.unwrap_or(smcalc_core::calculus::DEFAULT_STEP)),
        }
    }
}

fn write_rule(ctx: &Ctx, command: &str, cfg: &impl Serialize, check: &RuleCheck) -> Result<bool> {
    let dir = ctx.out()?;
    let stem = command.replace('-', "_");
    let csv = dir.table(&format!("{stem}.csv"), ("mesh", "sum"), &mesh_table(&check.lhs))?;
    let res = dir.table(&format!("{stem}_residuals.csv"), ("mesh", "residual"), &check.residuals_by_mesh)?;
    let json = ctx.report(&dir, command, cfg, check.passed, check)?;
    announce(
        command,
        check.passed,
        &[csv, res, json],
        &format!("residual {:.3e} (tol {:.1e})", check.residual, check.lhs.tol),
    );
    Ok(check.passed)
}

pub fn chain_rule(ctx: &Ctx, flags: ChainRuleArgs) -> Result<bool> {
    let cfg = ctx.resolve(flags)?;
    let mu = cfg.sm.path()?;
    let v = v_path(cfg.v.as_deref().expect("resolved"), mu.grid())?;
    let f = field_catalog(cfg.f.as_deref().expect("resolved"))?;
    let parts = refinement(cfg.sm.t_end(), cfg.levels.as_deref().expect("resolved"))?;
    let check = verify_chain_rule(&f, &mu, &v, &parts, cfg.tol.expect("resolved"), cfg.step.expect("resolved"))?;
    write_rule(ctx, "chain-rule", &cfg, &check)
}

#[derive(Args, Serialize, Deserialize, Debug, Clone, Default)]
pub struct SubstitutionArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub sm: SmArgs,
    /// Integrand field f(x, v).
    #[arg(long)]
    pub f: Option<String>,
    /// Integrator field g(x, v); needs a second x-derivative.
    #[arg(long)]
    pub g: Option<String>,
    #[arg(long)]
    pub v: Option<String>,
    #[arg(long, value_delimiter = ',')]
    pub levels: Option<Vec<u32>>,
    #[arg(long)]
    pub tol: Option<f64>,
}

impl Defaults for SubstitutionArgs {
    fn with_defaults(self) -> Self {
        Self {
            sm: self.sm.with_defaults(),
            f: Some(self.f.unwrap_or_else(|| "linear".into())),
            g: Some(self.g.unwrap_or_else(|| "square-g".into())),
            v: Some(self.v.unwrap_or_else(|| "t".into())),
            levels: Some(self.levels.unwrap_or_else(default_levels)),
            tol: Some(self.tol.unwrap_or(1e-2)),
        }
    }
}

pub fn substitution_rule(ctx: &Ctx, flags: SubstitutionArgs) -> Result<bool> {
    let cfg = ctx.resolve(flags)?;
    let mu = cfg.sm.path()?;
    let v = v_path(cfg.v.as_deref().expect("resolved"), mu.grid())?;
    let f = field_catalog(cfg.f.as_deref().expect("resolved"))?;
    let g = field_catalog(cfg.g.as_deref().expect("resolved"))?;
    let parts = refinement(cfg.sm.t_end(), cfg.levels.as_deref().expect("resolved"))?;
    let check = verify_substitution_rule(&f, &g, &mu, &v, &parts, cfg.tol.expect("resolved"))?;
    write_rule(ctx, "substitution-rule", &cfg, &check)
}

// ----------------------------------------------------------------------- nvar

#[derive(Args, Serialize, Deserialize, Debug, Clone, Default)]
pub struct NvarArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub sm: SmArgs,
    /// Power n ≥ 2.
    #[arg(long)]
    pub n: Option<u32>,
    /// Comma-separated ε values.
    #[arg(long, value_delimiter = ',')]
    pub eps: Option<Vec<f64>>,
    /// Upper end T₁ of the integral; defaults to T − 2·max ε.
    #[arg(long)]
    pub t1: Option<f64>,
}

impl Defaults for NvarArgs {
    fn with_defaults(self) -> Self {
        let sm = self.sm.with_defaults();
        let eps = self.eps.unwrap_or_else(|| vec![0.1, 0.05, 0.01]);
        let widest = eps.iter().copied().fold(0.0, f64::max);
        Self {
            t1: Some(self.t1.unwrap_or(sm.t_end() - 2.0 * widest)),
            sm,
            n: Some(self.n.unwrap_or(3)),
            eps: Some(eps),
        }
    }
}

pub fn nvar(ctx: &Ctx, flags: NvarArgs) -> Result<bool> {
    let cfg = ctx.resolve(flags)?;
    let dir = ctx.out()?;
    let path = cfg.sm.path()?;
    let (n, t1) = (cfg.n.expect("resolved"), cfg.t1.expect("resolved"));
    let rows = cfg
        .eps
        .as_deref()
        .expect("resolved")
        .iter()
        .map(|&e| Ok((e, strong_variation_estimate(&path, n, e, t1)?)))
        .collect::<Result<Vec<_>>>()?;
    let csv = dir.table("nvar.csv", ("eps", "estimate"), &rows)?;
    let result = json!({ "estimates": rows });
    let json = ctx.report(&dir, "nvar", &cfg, true, &result)?;
    announce("nvar", true, &[csv, json], &format!("{} estimates of the strong {n}-variation", rows.len()));
    Ok(true)
}

// ------------------------------------------------------------------------ sde

#[derive(Args, Serialize, Deserialize, Debug, Clone, Default)]
pub struct SdeArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub sm: SmArgs,
    /// Diffusion coefficient: const-sigma, linear-sigma, zero-sigma.
    #[arg(long)]
    pub sigma: Option<String>,
    /// Constant for const-sigma.
    #[arg(long)]
    pub sigma_c: Option<f64>,
    /// Drift: zero-drift, linear-drift, unit-drift, bounded-drift.
    #[arg(long)]
    pub drift: Option<String>,
    /// Constant K for bounded-drift.
    #[arg(long)]
    pub drift_k: Option<f64>,
    #[arg(long)]
    pub x0: Option<f64>,
    /// Step of the flow and of the Y equation.
    #[arg(long)]
    pub h: Option<f64>,
}

impl Defaults for SdeArgs {
    fn with_defaults(self) -> Self {
        Self {
            sm: self.sm.with_defaults(),
            sigma: Some(self.sigma.unwrap_or_else(|| "linear-sigma".into())),
            sigma_c: Some(self.sigma_c.unwrap_or(1.0)),
            drift: Some(self.drift.unwrap_or_else(|| "zero-drift".into())),
            drift_k: Some(self.drift_k.unwrap_or(1.0)),
            x0: Some(self.x0.unwrap_or(1.0)),
            h: Some(self.h.unwrap_or(smcalc_core::sde::DEFAULT_H)),
        }
    }
}

impl SdeArgs {
    fn solve(&self) -> Result<(Sigma, Drift, SampledPath, SdeSolution)> {
        let sigma = sigma_catalog(self.sigma.as_deref().expect("resolved"), self.sigma_c.expect("resolved"))?;
        let drift = drift_catalog(self.drift.as_deref().expect("resolved"), self.drift_k.expect("resolved"))?;
        let mu = self.sm.path()?;
        let sol = solve_sde(&sigma, &drift, self.x0.expect("resolved"), &mu, self.h.expect("resolved"))?;
        Ok((sigma, drift, mu, sol))
    }
}

pub fn sde_solve(ctx: &Ctx, flags: SdeArgs) -> Result<bool> {
    let cfg = ctx.resolve(flags)?;
    let dir = ctx.out()?;
    let (_, _, _, sol) = cfg.solve()?;
    let x = dir.with_writer("sde_x.csv", |w| sol.x.write_csv(w))?;
    let y = dir.with_writer("sde_y.csv", |w| sol.y.write_csv(w))?;
    let result = json!({ "x_last": sol.x.last(), "y_last": sol.y.last(), "diagnostics": sol.diagnostics });
    let json = ctx.report(&dir, "sde-solve", &cfg, true, &result)?;
    announce("sde-solve", true, &[x, y, json], &format!("X_T = {:.12e}", sol.x.last()));
    Ok(true)
}

#[derive(Args, Serialize, Deserialize, Debug, Clone, Default)]
pub struct SdeVerifyArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub sde: SdeArgs,
    /// Test field ψ(x, v) applied to (μ, X).
    #[arg(long)]
    pub psi: Option<String>,
    #[arg(long, value_delimiter = ',')]
    pub levels: Option<Vec<u32>>,
    #[arg(long)]
    pub tol: Option<f64>,
    /// Random points for the inverse-flow PDE check.
    #[arg(long)]
    pub pde_samples: Option<usize>,
}

impl Defaults for SdeVerifyArgs {
    fn with_defaults(self) -> Self {
        Self {
            sde: self.sde.with_defaults(),
            psi: Some(self.psi.unwrap_or_else(|| "one".into())),
            levels: Some(self.levels.unwrap_or_else(default_levels)),
            tol: Some(self.tol.unwrap_or(1e-2)),
            pde_samples: Some(self.pde_samples.unwrap_or(50)),
        }
    }
}

pub fn sde_verify(ctx: &Ctx, flags: SdeVerifyArgs) -> Result<bool> {
    let cfg = ctx.resolve(flags)?;
    let dir = ctx.out()?;
    let (sigma, drift, mu, sol) = cfg.sde.solve()?;
    let psi = field_catalog(cfg.psi.as_deref().expect("resolved"))?;
    let parts = refinement(cfg.sde.sm.t_end(), cfg.levels.as_deref().expect("resolved"))?;
    let rows = parts
        .iter()
        .map(|p| Ok((p.mesh(), verify_solution_identity(&sol, &sigma, &drift, &mu, &psi, p)?)))
        .collect::<Result<Vec<(f64, f64)>>>()?;
    let pde = check_inverse_pde(&sol.flow, cfg.pde_samples.expect("resolved"))?;
    let tol = cfg.tol.expect("resolved");
    let (first, last) = (rows.first().map_or(0.0, |r| r.1), rows.last().map_or(0.0, |r| r.1));
    let passed = last < tol && (last <= first || last <= 1e-12);
    let csv = dir.table("sde_verify.csv", ("mesh", "residual"), &rows)?;
    let result = json!({
        "residuals_by_mesh": rows,
        "inverse_pde_residual": pde,
        "diagnostics": sol.diagnostics,
    });
    let json = ctx.report(&dir, "sde-verify", &cfg, passed, &result)?;
    announce("sde-verify", passed, &[csv, json], &format!("finest residual {last:.3e} (tol {tol:.1e}), PDE {pde:.2e}"));
    Ok(passed)
}

// ------------------------------------------------------------------- parseval

#[derive(Args, Serialize, Deserialize, Debug, Clone, Default)]
pub struct ParsevalArgs {
    #[arg(long)]
    pub eps: Option<f64>,
    /// Number of series terms.
    #[arg(long = "M")]
    #[serde(rename = "M")]
    pub m: Option<u64>,
}

impl Defaults for ParsevalArgs {
    fn with_defaults(self) -> Self {
        Self {
            eps: Some(self.eps.unwrap_or(1.0)),
            m: Some(self.m.unwrap_or(1_000_000)),
        }
    }
}

pub fn parseval(ctx: &Ctx, flags: ParsevalArgs) -> Result<bool> {
    let cfg = ctx.resolve(flags)?;
    let dir = ctx.out()?;
    let c = parseval_check(cfg.eps.expect("resolved"), cfg.m.expect("resolved"))?;
    let passed = c.holds();
    let result = json!({
        "partial_sum": c.partial_sum,
        "tail_bound": c.tail_bound,
        "target": c.target,
        "deviation": c.deviation(),
    });
    let json = ctx.report(&dir, "parseval", &cfg, passed, &result)?;
    announce(
        "parseval",
        passed,
        &[json],
        &format!("|partial − target| = {:.3e} ≤ {:.3e}", c.deviation(), c.tail_bound),
    );
    Ok(passed)
}

// ------------------------------------------------------------ counterexamples

/// Reads a certificate from a previous report (or a bare certificate file).
fn read_certificate<C: DeserializeOwned>(path: &Path) -> Result<C> {
    let text = std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    let value: Value = serde_json::from_str(&text).with_context(|| format!("malformed JSON in {}", path.display()))?;
    let cert = value.pointer("/result/certificate").cloned().unwrap_or(value);
    serde_json::from_value(cert).with_context(|| format!("{} does not hold a certificate", path.display()))
}

fn print_check(command: &str, path: &Path, report: &VerificationReport) -> Result<bool> {
    print!("{}", to_json_string(report)?);
    for f in report.failures() {
        eprintln!("{command}: check failed: {}", f.label);
    }
    announce(command, report.passed, &[path.to_path_buf()], &format!("{} checks re-evaluated", report.checks.len()));
    Ok(report.passed)
}

fn write_construction<C, A>(
    ctx: &Ctx,
    command: &str,
    cfg: &A,
    built: std::result::Result<C, ConstructionFailure<C>>,
    verify: impl Fn(&C) -> Result<VerificationReport>,
    summary: impl Fn(&C) -> String,
) -> Result<bool>
where
    C: Serialize,
    A: Serialize,
{
    let dir = ctx.out()?;
    match built {
        Ok(cert) => {
            let report = verify(&cert)?;
            let result = json!({ "complete": true, "certificate": &cert, "verification": &report });
            let json = ctx.report(&dir, command, cfg, report.passed, &result)?;
            announce(command, report.passed, &[json], &summary(&cert));
            Ok(report.passed)
        }
        Err(ConstructionFailure { error, partial }) => {
            let report = verify(&partial)?;
            let result = json!({
                "complete": false,
                "error": error.to_string(),
                "certificate": &partial,
                "verification": &report,
            });
            let json = ctx.report(&dir, command, cfg, false, &result)?;
            bail!("{error}; partial certificate written to {}", display(&json))
        }
    }
}

#[derive(Args, Serialize, Deserialize, Debug, Clone, Default)]
pub struct Oscillator1Args {
    /// Number of (ε_{2k−1}, ε_{2k}) pairs.
    #[arg(long)]
    pub depth: Option<usize>,
    /// Room demanded beyond each threshold during the search.
    #[arg(long)]
    pub margin: Option<f64>,
    #[arg(long)]
    pub max_index: Option<u64>,
    #[arg(long)]
    pub min_eps: Option<f64>,
    /// Re-verify this certificate instead of building one.
    #[arg(long)]
    #[serde(skip)]
    pub check: Option<PathBuf>,
}

impl Defaults for Oscillator1Args {
    fn with_defaults(self) -> Self {
        let budget = Oscillator1Budget::default();
        Self {
            depth: Some(self.depth.unwrap_or(2)),
            margin: Some(self.margin.unwrap_or(0.01)),
            max_index: Some(self.max_index.unwrap_or(budget.max_index)),
            min_eps: Some(self.min_eps.unwrap_or(budget.min_eps)),
            check: self.check,
        }
    }
}

pub fn counterexample1(ctx: &Ctx, flags: Oscillator1Args) -> Result<bool> {
    if let Some(path) = &flags.check {
        let cert: Oscillator1Certificate = read_certificate(path)?;
        return print_check("counterexample1", path, &cert.verify()?);
    }
    let cfg = ctx.resolve(flags)?;
    let budget = Oscillator1Budget {
        max_index: cfg.max_index.expect("resolved"),
        min_eps: cfg.min_eps.expect("resolved"),
    };
    let built = construct_oscillator1_with(cfg.depth.expect("resolved"), cfg.margin.expect("resolved"), budget);
    write_construction(
        ctx,
        "counterexample1",
        &cfg,
        built,
        |c| Ok(c.verify()?),
        |c| {
            let fs: Vec<String> = c.f_values.iter().map(|f| format!("{:.4}", f.value)).collect();
            format!("{} pairs, f(ε_j) = {}", c.pairs(), fs.join(", "))
        },
    )
}

#[derive(Args, Serialize, Deserialize, Debug, Clone, Default)]
pub struct Oscillator2Args {
    /// Number of (n_j, ñ_j) pairs.
    #[arg(long)]
    pub depth: Option<usize>,
    /// Monte Carlo realizations of S at each ñ_j.
    #[arg(long)]
    pub seeds: Option<usize>,
    /// n₁.
    #[arg(long)]
    pub first_level: Option<u32>,
    #[arg(long)]
    pub slack: Option<f64>,
    #[arg(long)]
    pub max_level: Option<u32>,
    /// Re-verify this certificate instead of building one.
    #[arg(long)]
    #[serde(skip)]
    pub check: Option<PathBuf>,
}

impl Defaults for Oscillator2Args {
    fn with_defaults(self) -> Self {
        let o = Oscillator2Options::default();
        Self {
            depth: Some(self.depth.unwrap_or(2)),
            seeds: Some(self.seeds.unwrap_or(100)),
            first_level: Some(self.first_level.unwrap_or(o.first_level)),
            slack: Some(self.slack.unwrap_or(o.slack)),
            max_level: Some(self.max_level.unwrap_or(o.max_level)),
            check: self.check,
        }
    }
}

fn verify_oscillator2(c: &Oscillator2Certificate) -> Result<VerificationReport> {
    let mut report = c.verify()?;
    let empirical = c.verify_empirical()?;
    report.passed &= empirical.passed;
    report.checks.extend(empirical.checks);
    Ok(report)
}

pub fn counterexample2(ctx: &Ctx, flags: Oscillator2Args) -> Result<bool> {
    if let Some(path) = &flags.check {
        let cert: Oscillator2Certificate = read_certificate(path)?;
        return print_check("counterexample2", path, &verify_oscillator2(&cert)?);
    }
    let cfg = ctx.resolve(flags)?;
    let opts = Oscillator2Options {
        first_level: cfg.first_level.expect("resolved"),
        slack: cfg.slack.expect("resolved"),
        max_level: cfg.max_level.expect("resolved"),
    };
    let built = construct_oscillator2_with(cfg.depth.expect("resolved"), cfg.seeds.expect("resolved"), opts);
    write_construction(ctx, "counterexample2", &cfg, built, verify_oscillator2, |c| {
        let fr: Vec<String> = c.empirical.iter().map(|e| format!("{:.2}", e.fraction_below_one)).collect();
        format!("pairs {:?}, fraction of seeds with S_ñ < 1: {}", c.scale_pairs, fr.join(", "))
    })
}

// ------------------------------------------------------------------- quantile

#[derive(Args, Serialize, Deserialize, Debug, Clone, Default)]
pub struct QuantileArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub sm: SmArgs,
    /// squared-increments (over dyadic levels) or strong-variation (over ε).
    #[arg(long)]
    pub experiment: Option<String>,
    /// Number of seeds, starting at --seed.
    #[arg(long)]
    pub seeds: Option<usize>,
    #[arg(long)]
    pub q: Option<f64>,
    /// Dyadic levels for squared-increments.
    #[arg(long, value_delimiter = ',')]
    pub levels: Option<Vec<u32>>,
    /// ε values for strong-variation.
    #[arg(long, value_delimiter = ',')]
    pub eps: Option<Vec<f64>>,
    /// Power for strong-variation.
    #[arg(long)]
    pub n: Option<u32>,
    /// Upper end T₁ for strong-variation; defaults to T − 2·max ε.
    #[arg(long)]
    pub t1: Option<f64>,
}

impl Defaults for QuantileArgs {
    fn with_defaults(self) -> Self {
        let sm = self.sm.with_defaults();
        let eps = self.eps.unwrap_or_else(|| vec![0.1, 0.05, 0.01]);
        let widest = eps.iter().copied().fold(0.0, f64::max);
        Self {
            t1: Some(self.t1.unwrap_or(sm.t_end() - 2.0 * widest)),
            sm,
            experiment: Some(self.experiment.unwrap_or_else(|| "squared-increments".into())),
            seeds: Some(self.seeds.unwrap_or(100)),
            q: Some(self.q.unwrap_or(0.99)),
            levels: Some(self.levels.unwrap_or_else(|| vec![6, 8, 10])),
            eps: Some(eps),
            n: Some(self.n.unwrap_or(3)),
        }
    }
}

pub fn quantile(ctx: &Ctx, flags: QuantileArgs) -> Result<bool> {
    use rayon::prelude::*;

    let cfg = ctx.resolve(flags)?;
    let dir = ctx.out()?;
    let seeds = cfg.seeds.expect("resolved");
    ensure!(seeds >= 10, "need at least 10 seeds");
    let base = cfg.sm.seed.expect("resolved");
    let q = cfg.q.expect("resolved");
    let run = |experiment: &(dyn Fn(u64) -> Result<f64> + Sync)| -> Result<(f64, Vec<f64>)> {
        let values = (0..seeds as u64)
            .into_par_iter()
            .map(|s| experiment(base + s))
            .collect::<Result<Vec<f64>>>()?;
        Ok((empirical_quantile(&values, q)?, values))
    };
    let (label, rows) = match cfg.experiment.as_deref().expect("resolved") {
        "squared-increments" => {
            let mut rows = Vec::new();
            for &level in cfg.levels.as_deref().expect("resolved") {
                let p = dyadic_partition(cfg.sm.t_end(), level)?;
                let (qv, values) = run(&|seed| Ok(sum_squared_increments(&cfg.sm.measure_with_seed(seed)?, &p)?))?;
                rows.push((f64::from(level), qv, values));
            }
            ("level", rows)
        }
        "strong-variation" => {
            let (n, t1) = (cfg.n.expect("resolved"), cfg.t1.expect("resolved"));
            let mut rows = Vec::new();
            for &eps in cfg.eps.as_deref().expect("resolved") {
                let (qv, values) = run(&|seed| Ok(strong_variation_estimate(&cfg.sm.path_with_seed(seed)?, n, eps, t1)?))?;
                rows.push((eps, qv, values));
            }
            ("eps", rows)
        }
        other => bail!("unknown experiment `{other}` (known: squared-increments, strong-variation)"),
    };
    let table: Vec<(f64, f64)> = rows.iter().map(|r| (r.0, r.1)).collect();
    let csv = dir.table("quantile.csv", (label, "quantile"), &table)?;
    let result: Vec<Value> = rows
        .iter()
        .map(|(x, qv, values)| json!({ label: x, "quantile": qv, "values": values }))
        .collect();
    let json = ctx.report(&dir, "quantile", &cfg, true, &json!({ "rows": result }))?;
    let qs: Vec<String> = table.iter().map(|r| format!("{:.4}", r.1)).collect();
    announce("quantile", true, &[csv, json], &format!("{q} quantiles: {}", qs.join(", ")));
    Ok(true)
}

