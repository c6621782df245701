use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

/// A reentrant real function of `(x, v)`.
pub type Field2Fn = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;

/// A `C^{1,1}` (optionally `C^{2,1}`) field with analytic derivatives.
///
/// Callbacks must be pure: they are shared between threads.
#[derive(Clone)]
pub struct ScalarField2 {
    name: String,
    value: Field2Fn,
    d_dx: Field2Fn,
    d_dv: Option<Field2Fn>,
    d2_dxx: Option<Field2Fn>,
}

impl fmt::Debug for ScalarField2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ScalarField2")
            .field("name", &self.name)
            .field("d_dv", &self.d_dv.is_some())
            .field("d2_dxx", &self.d2_dxx.is_some())
            .finish()
    }
}

/// Rectangle `[x₀, x₁] × [v₀, v₁]` for derivative validation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TestBox {
    pub x: (f64, f64),
    pub v: (f64, f64),
}

impl ScalarField2 {
    pub fn new<F, Fx>(name: impl Into<String>, value: F, d_dx: Fx) -> Self
    where
        F: Fn(f64, f64) -> f64 + Send + Sync + 'static,
        Fx: Fn(f64, f64) -> f64 + Send + Sync + 'static,
    {
        Self {
            name: name.into(),
            value: Arc::new(value),
            d_dx: Arc::new(d_dx),
            d_dv: None,
            d2_dxx: None,
        }
    }

    pub fn with_d_dv(mut self, f: impl Fn(f64, f64) -> f64 + Send + Sync + 'static) -> Self {
        self.d_dv = Some(Arc::new(f));
        self
    }

    pub fn with_d2_dxx(mut self, f: impl Fn(f64, f64) -> f64 + Send + Sync + 'static) -> Self {
        self.d2_dxx = Some(Arc::new(f));
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    #[inline]
    pub fn value(&self, x: f64, v: f64) -> f64 {
        (self.value)(x, v)
    }

    #[inline]
    pub fn d_dx(&self, x: f64, v: f64) -> f64 {
        (self.d_dx)(x, v)
    }

    pub fn d_dv_fn(&self) -> Result<&Field2Fn> {
        self.d_dv
            .as_ref()
            .ok_or_else(|| Error::Contract(format!("field `{}` has no ∂/∂v", self.name)))
    }

    pub fn d2_dxx_fn(&self) -> Result<&Field2Fn> {
        self.d2_dxx
            .as_ref()
            .ok_or_else(|| Error::Contract(format!("field `{}` has no ∂²/∂x²", self.name)))
    }

    /// Largest mismatch between supplied derivatives and central differences
    /// on a `samples × samples` lattice, measured as
    /// `|fd − d| / max(1, |d|)`.
    pub fn derivative_mismatch(&self, test_box: TestBox, samples: usize) -> f64 {
        let lattice = |(lo, hi): (f64, f64), k: usize| {
            if samples <= 1 {
                0.5 * (lo + hi)
            } else {
                lo + (hi - lo) * k as f64 / (samples - 1) as f64
            }
        };
        let rel = |fd: f64, d: f64| (fd - d).abs() / d.abs().max(1.0);
        let step = |z: f64| 1e-5 * z.abs().max(1.0);
        let mut worst = 0.0f64;
        for i in 0..samples.max(1) {
            for j in 0..samples.max(1) {
                let (x, v) = (lattice(test_box.x, i), lattice(test_box.v, j));
                let hx = step(x);
                let fd = (self.value(x + hx, v) - self.value(x - hx, v)) / (2.0 * hx);
                worst = worst.max(rel(fd, self.d_dx(x, v)));
                if let Some(d_dv) = &self.d_dv {
                    let hv = step(v);
                    let fd = (self.value(x, v + hv) - self.value(x, v - hv)) / (2.0 * hv);
                    worst = worst.max(rel(fd, d_dv(x, v)));
                }
                if let Some(d2) = &self.d2_dxx {
                    let fd = (self.d_dx(x + hx, v) - self.d_dx(x - hx, v)) / (2.0 * hx);
                    worst = worst.max(rel(fd, d2(x, v)));
                }
            }
        }
        worst
    }

    /// Fails unless [`Self::derivative_mismatch`] is within `tol`.
    pub fn validate_derivatives(&self, test_box: TestBox, samples: usize, tol: f64) -> Result<()> {
        let worst = self.derivative_mismatch(test_box, samples);
        if worst <= tol {
            Ok(())
        } else {
            Err(Error::Contract(format!(
                "field `{}`: derivative mismatch {worst:.3e} > {tol:.1e}",
                self.name
            )))
        }
    }
}

/// Names accepted by [`field_catalog`].
pub const FIELD_NAMES: &[&str] = &[
    "one",
    "linear",
    "quadratic",
    "bilinear",
    "sin-shift",
    "identity-g",
    "square-g",
];

/// Built-in fields:
///
/// | name | value |
/// |---|---|
/// | `one` | 1 |
/// | `linear`, `identity-g` | x |
/// | `quadratic` | x² |
/// | `bilinear` | xv |
/// | `sin-shift` | sin(x) + v |
/// | `square-g` | x² + v |
pub fn field_catalog(name: &str) -> Result<ScalarField2> {
    let f = match name {
        "one" => ScalarField2::new(name, |_, _| 1.0, |_, _| 0.0)
            .with_d_dv(|_, _| 0.0)
            .with_d2_dxx(|_, _| 0.0),
        "linear" | "identity-g" => ScalarField2::new(name, |x, _| x, |_, _| 1.0)
            .with_d_dv(|_, _| 0.0)
            .with_d2_dxx(|_, _| 0.0),
        "quadratic" => ScalarField2::new(name, |x, _| x * x, |x, _| 2.0 * x)
            .with_d_dv(|_, _| 0.0)
            .with_d2_dxx(|_, _| 2.0),
        "bilinear" => ScalarField2::new(name, |x, v| x * v, |_, v| v)
            .with_d_dv(|x, _| x)
            .with_d2_dxx(|_, _| 0.0),
        "sin-shift" => ScalarField2::new(name, |x: f64, v| x.sin() + v, |x: f64, _| x.cos())
            .with_d_dv(|_, _| 1.0)
            .with_d2_dxx(|x: f64, _| -x.sin()),
        "square-g" => ScalarField2::new(name, |x, v| x * x + v, |x, _| 2.0 * x)
            .with_d_dv(|_, _| 1.0)
            .with_d2_dxx(|_, _| 2.0),
        other => {
            return Err(Error::domain(format!(
                "unknown field `{other}` (known: {})",
                FIELD_NAMES.join(", ")
            )))
        }
    };
    Ok(f)
}
