use crate::error::{Error, Result};
use crate::summation::NeumaierSum;

/// Composite Simpson rule on `[a, b]` with at most `step` between nodes.
///
/// The subinterval count is `⌈|b − a|/step⌉` rounded up to an even number.
/// `a == b` gives exactly zero; `b < a` gives the negated integral.
pub fn composite_simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, step: f64) -> Result<f64> {
    if !(step > 0.0 && step.is_finite()) {
        return Err(Error::domain(format!("quadrature step {step} must be positive")));
    }
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::Numeric(format!("non-finite limits [{a}, {b}]")));
    }
    if a == b {
        return Ok(0.0);
    }
    let mut n = ((b - a).abs() / step).ceil() as usize;
    n = n.max(2);
    n += n % 2;
    let h = (b - a) / n as f64;
    let mut acc = NeumaierSum::new();
    for k in 0..=n {
        let x = if k == n { b } else { a + k as f64 * h };
        let fx = f(x);
        if !fx.is_finite() {
            return Err(Error::Numeric(format!("integrand is {fx} at {x}")));
        }
        let w = if k == 0 || k == n {
            1.0
        } else if k % 2 == 1 {
            4.0
        } else {
            2.0
        };
        acc.push(w * fx);
    }
    Ok(acc.value() * h / 3.0)
}
