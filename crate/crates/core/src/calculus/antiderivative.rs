use super::{composite_simpson, ScalarField2};
use crate::error::{Error, Result};

/// Default Simpson step for `F` and `F₂′`.
pub const DEFAULT_STEP: f64 = 1e-3;

/// `F(x, v) = ∫₀ˣ f(y, v) dy` by composite Simpson quadrature.
#[derive(Debug, Clone)]
pub struct Antiderivative {
    field: ScalarField2,
    step: f64,
}

impl Antiderivative {
    pub fn new(field: ScalarField2, step: f64) -> Result<Self> {
        if !(step > 0.0 && step.is_finite()) {
            return Err(Error::domain(format!("step {step} must be positive")));
        }
        Ok(Self { field, step })
    }

    pub fn field(&self) -> &ScalarField2 {
        &self.field
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    /// `F(x, v)`; exactly zero at `x = 0`.
    pub fn value(&self, x: f64, v: f64) -> Result<f64> {
        composite_simpson(|y| self.field.value(y, v), 0.0, x, self.step)
    }

    /// `F₂′(x, v) = ∫₀ˣ ∂f/∂v(y, v) dy`.
    pub fn d_dv(&self, x: f64, v: f64) -> Result<f64> {
        let d_dv = self.field.d_dv_fn()?;
        composite_simpson(|y| d_dv(y, v), 0.0, x, self.step)
    }
}

/// `∫₀ˣ f(y, v) dy` with Simpson step `step`.
pub fn antiderivative_eval(f: &ScalarField2, x: f64, v: f64, step: f64) -> Result<f64> {
    Antiderivative::new(f.clone(), step)?.value(x, v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calculus::field_catalog;

    #[test]
    fn examples() {
        let one = field_catalog("one").unwrap();
        assert!((antiderivative_eval(&one, 1.7, 0.0, DEFAULT_STEP).unwrap() - 1.7).abs() < 1e-12);
        let xv = field_catalog("bilinear").unwrap();
        assert!((antiderivative_eval(&xv, 2.0, 3.0, DEFAULT_STEP).unwrap() - 6.0).abs() < 1e-10);
        let c = ScalarField2::new("cos", |x: f64, v| (x + v).cos(), |x: f64, v| -(x + v).sin());
        let expect = 1.5f64.sin() - 0.5f64.sin();
        assert!((antiderivative_eval(&c, 1.0, 0.5, DEFAULT_STEP).unwrap() - expect).abs() < 1e-10);
    }

    #[test]
    fn zero_at_origin_and_negative_x() {
        let q = field_catalog("quadratic").unwrap();
        let f = Antiderivative::new(q, DEFAULT_STEP).unwrap();
        assert_eq!(f.value(0.0, 4.0).unwrap(), 0.0);
        assert!((f.value(-1.5, 0.0).unwrap() + 1.125).abs() < 1e-12);
    }

    #[test]
    fn nonfinite_integrand() {
        let bad = ScalarField2::new("inv", |x, _| 1.0 / (x - 0.5), |x, _| -1.0 / (x - 0.5).powi(2));
        assert!(matches!(
            antiderivative_eval(&bad, 1.0, 0.0, 0.25),
            Err(Error::Numeric(_))
        ));
    }

    #[test]
    fn missing_d_dv() {
        let f = ScalarField2::new("f", |x, _| x, |_, _| 1.0);
        let a = Antiderivative::new(f, DEFAULT_STEP).unwrap();
        assert!(matches!(a.d_dv(1.0, 0.0), Err(Error::Contract(_))));
    }
}
