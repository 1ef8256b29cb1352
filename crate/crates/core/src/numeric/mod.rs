//! Small numerical kernels: golden-section search, adaptive Gauss-Kronrod
//! quadrature, a dense simplex solver and a few linear-algebra helpers.

mod linalg;
mod lp;
mod quad;

pub use linalg::{orthonormal_basis, orthonormal_complement, rank, sorted_svd, SortedSvd};
pub use lp::{maximize, LpOutcome};
pub use quad::integrate;

const INV_PHI: f64 = 0.618_033_988_749_894_8;

/// Minimizes a unimodal `f` on `[a, b]`; stops when the bracket is shorter
/// than `tol`. Returns the best abscissa and value seen.
pub fn golden_min<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> (f64, f64) {
    let (mut a, mut b) = (a, b);
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    let tol = tol.max(f64::EPSILON * (a.abs() + b.abs()));
    while (b - a).abs() > tol {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }
    let m = 0.5 * (a + b);
    let fm = f(m);
    [(c, fc), (d, fd), (m, fm)]
        .into_iter()
        .fold((m, fm), |best, cand| if cand.1 < best.1 { cand } else { best })
}

/// Maximizes a unimodal `f` on `[a, b]`.
pub fn golden_max<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> (f64, f64) {
    let (x, v) = golden_min(|t| -f(t), a, b, tol);
    (x, -v)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn golden_quadratic() {
        let (x, v) = golden_min(|t| (t - 0.3).powi(2), -2.0, 2.0, 1e-10);
        assert!((x - 0.3).abs() < 1e-9);
        assert!(v < 1e-18);
    }

    #[test]
    fn golden_kink() {
        let (x, v) = golden_max(|t| 1.0 - (t + 0.25).abs(), -1.0, 1.0, 1e-12);
        assert!((x + 0.25).abs() < 1e-11);
        assert!((v - 1.0).abs() < 1e-11);
    }

    #[test]
    fn golden_endpoint_minimum() {
        let (x, _) = golden_min(|t| t, 0.0, 1.0, 1e-10);
        assert!(x < 1e-9);
    }
}
