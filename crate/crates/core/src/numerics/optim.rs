//! One-dimensional minimization of convex (unimodal) objectives.

use crate::error::{Error, Result};

const INV_GOLDEN: f64 = 0.618_033_988_749_894_9;

/// Golden-section search on [lo, hi]. Requires a unimodal objective; returns
/// the abscissa of the minimum to within `x_tol`.
pub fn minimize_scalar_convex<F: Fn(f64) -> f64>(
    f: F,
    lo: f64,
    hi: f64,
    x_tol: f64,
    max_iter: usize,
) -> Result<f64> {
    if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
        return Err(Error::Domain(format!("invalid interval [{lo}, {hi}]")));
    }
    if !(x_tol > 0.0) {
        return Err(Error::Domain("x_tol must be > 0".into()));
    }
    let mut a = lo;
    let mut b = hi;
    let mut x1 = b - INV_GOLDEN * (b - a);
    let mut x2 = a + INV_GOLDEN * (b - a);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    for _ in 0..max_iter {
        if b - a <= x_tol {
            return Ok(0.5 * (a + b));
        }
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - INV_GOLDEN * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + INV_GOLDEN * (b - a);
            f2 = f(x2);
        }
    }
    Err(Error::NonConvergence(format!(
        "interval width {:.3e} above {x_tol:.3e} after {max_iter} iterations",
        b - a
    )))
}
