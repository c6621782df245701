use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

type Fn1 = Arc<dyn Fn(f64) -> f64 + Send + Sync>;
type Fn2 = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;

/// Diffusion coefficient `σ ∈ C²` with bounded `σ′`, `σ″`.
#[derive(Clone)]
pub struct Sigma {
    name: String,
    value: Fn1,
    d1: Fn1,
    d2: Fn1,
    derivative_bound: f64,
}

impl fmt::Debug for Sigma {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Sigma")
            .field("name", &self.name)
            .field("derivative_bound", &self.derivative_bound)
            .finish()
    }
}

impl Sigma {
    pub fn new(
        name: impl Into<String>,
        value: impl Fn(f64) -> f64 + Send + Sync + 'static,
        d1: impl Fn(f64) -> f64 + Send + Sync + 'static,
        d2: impl Fn(f64) -> f64 + Send + Sync + 'static,
        derivative_bound: f64,
    ) -> Result<Self> {
        if !(derivative_bound > 0.0 && derivative_bound.is_finite()) {
            return Err(Error::domain("derivative bound must be positive"));
        }
        Ok(Self {
            name: name.into(),
            value: Arc::new(value),
            d1: Arc::new(d1),
            d2: Arc::new(d2),
            derivative_bound,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    #[inline]
    pub fn value(&self, x: f64) -> f64 {
        (self.value)(x)
    }

    #[inline]
    pub fn d1(&self, x: f64) -> f64 {
        (self.d1)(x)
    }

    #[inline]
    pub fn d2(&self, x: f64) -> f64 {
        (self.d2)(x)
    }

    pub fn derivative_bound(&self) -> f64 {
        self.derivative_bound
    }

    /// Checks `|σ′|, |σ″| ≤ bound` on `samples` points of `[lo, hi]`.
    pub fn check_bounds(&self, lo: f64, hi: f64, samples: usize) -> Result<()> {
        let n = samples.max(2);
        for k in 0..n {
            let x = lo + (hi - lo) * k as f64 / (n - 1) as f64;
            let worst = self.d1(x).abs().max(self.d2(x).abs());
            if !(worst <= self.derivative_bound) {
                return Err(Error::Contract(format!(
                    "σ `{}`: |σ′| or |σ″| = {worst} at x = {x} exceeds {}",
                    self.name, self.derivative_bound
                )));
            }
        }
        Ok(())
    }
}

/// Drift `b(x, t)` with local Lipschitz constants `L(C)` and growth constant `K`.
#[derive(Clone)]
pub struct Drift {
    name: String,
    value: Fn2,
    lipschitz_of_box: Fn1,
    linear_growth_k: f64,
}

impl fmt::Debug for Drift {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Drift")
            .field("name", &self.name)
            .field("linear_growth_k", &self.linear_growth_k)
            .finish()
    }
}

impl Drift {
    pub fn new(
        name: impl Into<String>,
        value: impl Fn(f64, f64) -> f64 + Send + Sync + 'static,
        lipschitz_of_box: impl Fn(f64) -> f64 + Send + Sync + 'static,
        linear_growth_k: f64,
    ) -> Result<Self> {
        if !(linear_growth_k > 0.0 && linear_growth_k.is_finite()) {
            return Err(Error::domain("growth constant K must be positive"));
        }
        Ok(Self {
            name: name.into(),
            value: Arc::new(value),
            lipschitz_of_box: Arc::new(lipschitz_of_box),
            linear_growth_k,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    #[inline]
    pub fn value(&self, x: f64, t: f64) -> f64 {
        (self.value)(x, t)
    }

    pub fn lipschitz(&self, c: f64) -> f64 {
        (self.lipschitz_of_box)(c)
    }

    pub fn linear_growth_k(&self) -> f64 {
        self.linear_growth_k
    }

    /// Spot-checks `|b(x, t)| ≤ K(1 + |x|)` on a lattice of the box.
    pub fn check_growth(&self, x: (f64, f64), t: (f64, f64), samples: usize) -> Result<()> {
        let n = samples.max(2);
        for i in 0..n {
            for j in 0..n {
                let xi = x.0 + (x.1 - x.0) * i as f64 / (n - 1) as f64;
                let tj = t.0 + (t.1 - t.0) * j as f64 / (n - 1) as f64;
                let b = self.value(xi, tj);
                if !(b.abs() <= self.linear_growth_k * (1.0 + xi.abs())) {
                    return Err(Error::Contract(format!(
                        "drift `{}` violates linear growth at ({xi}, {tj})",
                        self.name
                    )));
                }
            }
        }
        Ok(())
    }
}

pub const SIGMA_NAMES: &[&str] = &["const-sigma", "linear-sigma", "zero-sigma"];
pub const DRIFT_NAMES: &[&str] = &["zero-drift", "linear-drift", "unit-drift", "bounded-drift"];

/// `const-sigma` (σ ≡ c), `linear-sigma` (σ(x) = x), `zero-sigma`.
pub fn sigma_catalog(name: &str, c: f64) -> Result<Sigma> {
    match name {
        "const-sigma" => Sigma::new(name, move |_| c, |_| 0.0, |_| 0.0, 1.0),
        "linear-sigma" => Sigma::new(name, |x| x, |_| 1.0, |_| 0.0, 1.0),
        "zero-sigma" => Sigma::new(name, |_| 0.0, |_| 0.0, |_| 0.0, 1.0),
        other => Err(Error::domain(format!(
            "unknown σ `{other}` (known: {})",
            SIGMA_NAMES.join(", ")
        ))),
    }
}

/// `zero-drift`, `linear-drift` (b = x), `unit-drift` (b ≡ 1) and
/// `bounded-drift` (b = K·x/(1 + x²)).
pub fn drift_catalog(name: &str, k: f64) -> Result<Drift> {
    match name {
        "zero-drift" => Drift::new(name, |_, _| 0.0, |_| 0.0, 1.0),
        "linear-drift" => Drift::new(name, |x, _| x, |_| 1.0, 1.0),
        "unit-drift" => Drift::new(name, |_, _| 1.0, |_| 0.0, 1.0),
        "bounded-drift" => {
            let k_abs = k.abs();
            Drift::new(
                name,
                move |x, _| k * x / (1.0 + x * x),
                move |_| k_abs,
                k_abs.max(f64::MIN_POSITIVE),
            )
        }
        other => Err(Error::domain(format!(
            "unknown drift `{other}` (known: {})",
            DRIFT_NAMES.join(", ")
        ))),
    }
}
