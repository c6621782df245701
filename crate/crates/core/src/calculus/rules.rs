use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{Antiderivative, ScalarField2};
use crate::error::Result;
use crate::integration::{
    stieltjes_integral, symmetric_integral, symmetric_sum, ConvergenceReport, Partition,
};
use crate::sm::SampledPath;

/// Outcome of comparing a symmetric-integral refinement with its closed form.
///
/// `rhs` and `residual` refer to the finest partition; `residuals_by_mesh`
/// pairs each mesh with `|lhs − rhs|` evaluated on that same partition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RuleCheck {
    pub lhs: ConvergenceReport,
    pub rhs: f64,
    pub residual: f64,
    pub residuals_by_mesh: Vec<(f64, f64)>,
    pub passed: bool,
}

/// The path `t ↦ f(μ_t, V_t)` on the common grid.
pub fn compose(f: &ScalarField2, mu: &SampledPath, v: &SampledPath) -> Result<SampledPath> {
    mu.zip_map(v, |x, w| f.value(x, w))
}

fn par_compose(
    mu: &SampledPath,
    v: &SampledPath,
    g: impl Fn(f64, f64) -> Result<f64> + Sync,
) -> Result<SampledPath> {
    mu.require_same_grid(v)?;
    let values = mu
        .values()
        .par_iter()
        .zip(v.values())
        .map(|(&x, &w)| g(x, w))
        .collect::<Result<Vec<f64>>>()?;
    SampledPath::new(mu.t0(), mu.dt(), values)
}

struct ChainRhs<'a> {
    antiderivative: Antiderivative,
    f2_path: SampledPath,
    mu: &'a SampledPath,
    v: &'a SampledPath,
}

impl<'a> ChainRhs<'a> {
    fn new(f: &ScalarField2, mu: &'a SampledPath, v: &'a SampledPath, step: f64) -> Result<Self> {
        let antiderivative = Antiderivative::new(f.clone(), step)?;
        antiderivative.field().d_dv_fn()?;
        let f2_path = par_compose(mu, v, |x, w| antiderivative.d_dv(x, w))?;
        Ok(Self {
            antiderivative,
            f2_path,
            mu,
            v,
        })
    }

    fn at(&self, p: &Partition) -> Result<f64> {
        let (t0, t1) = (p.points()[0], p.t_end());
        let f_end = self
            .antiderivative
            .value(self.mu.value_at(t1)?, self.v.value_at(t1)?)?;
        let f_start = self
            .antiderivative
            .value(self.mu.value_at(t0)?, self.v.value_at(t0)?)?;
        Ok(f_end - f_start - stieltjes_integral(&self.f2_path, self.v, p)?)
    }
}

/// `F(μ_T, V_T) − F(μ_0, V_0) − ∫ F₂′(μ_t, V_t) dV_t` on partition `p`.
pub fn chain_rule_rhs(
    f: &ScalarField2,
    mu: &SampledPath,
    v: &SampledPath,
    p: &Partition,
    step: f64,
) -> Result<f64> {
    ChainRhs::new(f, mu, v, step)?.at(p)
}

/// Symmetric integral of `f(μ, V)` against `μ` versus the chain-rule closed form.
pub fn verify_chain_rule(
    f: &ScalarField2,
    mu: &SampledPath,
    v: &SampledPath,
    refinement: &[Partition],
    tol: f64,
    step: f64,
) -> Result<RuleCheck> {
    let integrand = compose(f, mu, v)?;
    let lhs = symmetric_integral(&integrand, mu, refinement, tol)?;
    let rhs = ChainRhs::new(f, mu, v, step)?;
    let rhs_values = refinement
        .iter()
        .map(|p| rhs.at(p))
        .collect::<Result<Vec<f64>>>()?;
    Ok(RuleCheck::assemble(lhs, rhs_values, tol))
}

/// Symmetric integral of `f(μ, V)` against `g(μ, V)` versus
/// `∫ f g₁′ ∘dμ + ∫ f g₂′ dV`.
pub fn verify_substitution_rule(
    f: &ScalarField2,
    g: &ScalarField2,
    mu: &SampledPath,
    v: &SampledPath,
    refinement: &[Partition],
    tol: f64,
) -> Result<RuleCheck> {
    g.d2_dxx_fn()?;
    let g_dv = g.d_dv_fn()?;
    let f_path = compose(f, mu, v)?;
    let g_path = compose(g, mu, v)?;
    let lhs = symmetric_integral(&f_path, &g_path, refinement, tol)?;
    let f_g1 = mu.zip_map(v, |x, w| f.value(x, w) * g.d_dx(x, w))?;
    let f_g2 = mu.zip_map(v, |x, w| f.value(x, w) * g_dv(x, w))?;
    let rhs_values = refinement
        .iter()
        .map(|p| Ok(symmetric_sum(&f_g1, mu, p)? + stieltjes_integral(&f_g2, v, p)?))
        .collect::<Result<Vec<f64>>>()?;
    Ok(RuleCheck::assemble(lhs, rhs_values, tol))
}

impl RuleCheck {
    fn assemble(lhs: ConvergenceReport, rhs_values: Vec<f64>, tol: f64) -> Self {
        let residuals_by_mesh: Vec<(f64, f64)> = lhs
            .estimates
            .iter()
            .zip(&rhs_values)
            .map(|(&(mesh, l), &r)| (mesh, (l - r).abs()))
            .collect();
        let rhs = *rhs_values.last().expect("refinement is non-empty");
        let residual = (lhs.extrapolated - rhs).abs();
        Self {
            passed: residual < tol && lhs.converged,
            lhs,
            rhs,
            residual,
            residuals_by_mesh,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calculus::{field_catalog, DEFAULT_STEP};
    use crate::integration::uniform_partition;
    use crate::sm::{CoefficientProfile, FourierSM, GridSpec};

    const T: f64 = 5.0;

    fn setup(m: u64, n: u64, seed: u64) -> (SampledPath, SampledPath, Vec<Partition>) {
        let sm = FourierSM::with_seed(CoefficientProfile::block(m, n).unwrap(), seed).unwrap();
        let grid = GridSpec::uniform(T, 1 << 12).unwrap();
        let mu = sm.sample_path(grid).unwrap();
        let zero = SampledPath::constant(grid, 0.0).unwrap();
        let refinement = [1 << 8, 1 << 10, 1 << 12]
            .iter()
            .map(|&j| uniform_partition(T, j).unwrap())
            .collect();
        (mu, zero, refinement)
    }

    #[test]
    fn trivial_chain_rule_cases() {
        let (mu, zero, refinement) = setup(1, 8, 3);
        let p = refinement.last().unwrap();
        let lin = field_catalog("linear").unwrap();
        let rhs = chain_rule_rhs(&lin, &mu, &zero, p, DEFAULT_STEP).unwrap();
        let expect = 0.5 * (mu.last().powi(2) - mu.first().powi(2));
        assert!((rhs - expect).abs() < 1e-12);

        let one = field_catalog("one").unwrap();
        let rhs = chain_rule_rhs(&one, &mu, &zero, p, DEFAULT_STEP).unwrap();
        assert!((rhs - (mu.last() - mu.first())).abs() < 1e-12);

        let check = verify_chain_rule(&lin, &mu, &zero, &refinement, 1e-3, DEFAULT_STEP).unwrap();
        assert!(check.residuals_by_mesh.iter().all(|&(_, r)| r < 1e-10));
        assert!(check.passed);
    }

    #[test]
    fn one_against_mu_matches_rhs_on_every_partition() {
        let (mu, zero, _) = setup(1, 8, 9);
        let one = field_catalog("one").unwrap();
        let one_path = compose(&one, &mu, &zero).unwrap();
        for j in [1, 3, 17, 256] {
            let p = uniform_partition(T, j).unwrap();
            let lhs = symmetric_sum(&one_path, &mu, &p).unwrap();
            let rhs = chain_rule_rhs(&one, &mu, &zero, &p, DEFAULT_STEP).unwrap();
            assert!((lhs - rhs).abs() < 1e-13);
        }
    }

    #[test]
    fn bilinear_against_time() {
        let (mu, _, refinement) = setup(1, 4, 21);
        let clock = SampledPath::clock(mu.grid()).unwrap();
        let xv = field_catalog("bilinear").unwrap();
        let p = refinement.last().unwrap();
        let rhs = chain_rule_rhs(&xv, &mu, &clock, p, DEFAULT_STEP).unwrap();
        let lhs = symmetric_sum(&compose(&xv, &mu, &clock).unwrap(), &mu, p).unwrap();
        assert!((lhs - rhs).abs() < 1e-3);
    }

    #[test]
    fn substitution_identity_is_bit_exact() {
        let (mu, _, refinement) = setup(1, 8, 4);
        let v = SampledPath::clock(mu.grid()).unwrap();
        let g = field_catalog("identity-g").unwrap();
        for f in ["one", "linear", "sin-shift"] {
            let f = field_catalog(f).unwrap();
            let check = verify_substitution_rule(&f, &g, &mu, &v, &refinement, 1e-3).unwrap();
            let plain = symmetric_integral(&compose(&f, &mu, &v).unwrap(), &mu, &refinement, 1e-3)
                .unwrap();
            assert_eq!(check.lhs, plain);
            assert_eq!(check.residual, 0.0);
        }
    }

    #[test]
    fn substitution_needs_second_derivative() {
        let (mu, zero, refinement) = setup(1, 2, 4);
        let f = field_catalog("one").unwrap();
        let g = ScalarField2::new("g", |x, _| x, |_, _| 1.0).with_d_dv(|_, _| 0.0);
        assert!(verify_substitution_rule(&f, &g, &mu, &zero, &refinement, 1e-3).is_err());
    }
}
