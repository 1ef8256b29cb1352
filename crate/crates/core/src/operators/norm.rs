use serde::{Deserialize, Serialize};

use super::OperatorMatrix;
use crate::error::{Error, Result};
use crate::numeric::{golden_max, orthonormal_basis, sorted_svd};
use crate::spaces::{sign_vectors, Point, SpaceSpec};
use crate::tol::DEFAULT_RESOLUTION;

/// Operator norm together with a unit vector attaining it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormWitness {
    pub value: f64,
    pub witness: Point,
}

const MAX_SIGN_DIM: usize = 20;

/// The unit vector of `space` in direction `cos t · b1 + sin t · b2`.
pub(crate) fn circle_point(space: SpaceSpec, b1: &[f64], b2: &[f64], t: f64) -> Vec<f64> {
    let (c, s) = (t.cos(), t.sin());
    let v: Vec<f64> = b1.iter().zip(b2).map(|(a, b)| c * a + s * b).collect();
    let r = space.norm(&v);
    v.into_iter().map(|x| x / r).collect()
}

/// A refined local maximum of `f` along the unit circle of a plane.
#[derive(Clone, Debug)]
pub(crate) struct CircleMax {
    pub x: Vec<f64>,
    pub value: f64,
}

/// Grid values of `f` on `resolution` equally spaced angles, plus every grid
/// local maximum refined by golden section.
pub(crate) fn scan_circle<F: Fn(&[f64]) -> f64>(
    space: SpaceSpec,
    b1: &[f64],
    b2: &[f64],
    f: F,
    resolution: usize,
) -> (Vec<f64>, Vec<CircleMax>) {
    let n = resolution.max(16);
    let h = std::f64::consts::TAU / n as f64;
    let g = |t: f64| f(&circle_point(space, b1, b2, t));
    let vals: Vec<f64> = (0..n).map(|i| g(i as f64 * h)).collect();
    let top = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut maxima = Vec::new();
    for i in 0..n {
        let prev = vals[(i + n - 1) % n];
        let next = vals[(i + 1) % n];
        let is_peak = vals[i] >= prev && vals[i] > next;
        if !(is_peak || vals[i] == top) {
            continue;
        }
        let t0 = i as f64 * h;
        let (t, v) = golden_max(g, t0 - h, t0 + h, 1e-13);
        let (t, v) = if v >= vals[i] { (t, v) } else { (t0, vals[i]) };
        maxima.push(CircleMax {
            x: circle_point(space, b1, b2, t),
            value: v,
        });
    }
    (vals, maxima)
}

fn duality_point(space: SpaceSpec, f: &[f64]) -> Vec<f64> {
    // x_i = sgn(f_i)|f_i|^{q-1} normalized, q the conjugate exponent
    let q = space.p.conjugate().value();
    let v: Vec<f64> = f.iter().map(|a| a.signum() * a.abs().powf(q - 1.0)).collect();
    let r = space.norm(&v);
    v.into_iter().map(|x| x / r).collect()
}

fn unit(n: usize, j: usize, sign: f64) -> Vec<f64> {
    let mut e = vec![0.0; n];
    e[j] = sign;
    e
}

/// `‖T‖` with a maximizing unit vector.
pub fn op_norm(t: &OperatorMatrix) -> Result<NormWitness> {
    let dom = t.domain;
    let n = t.n();
    let wrap = |value: f64, coords: Vec<f64>| NormWitness {
        value,
        witness: Point { coords, space: dom },
    };
    if t.is_zero() {
        return Ok(wrap(0.0, dom.normalize(&unit(n, 0, 1.0))?));
    }
    if n == 1 {
        return Ok(wrap(t.image_norm(&[1.0]), vec![1.0]));
    }
    if t.m() == 1 && dom.is_strictly_convex() {
        let f = &t.rows[0];
        return Ok(wrap(dom.dual().norm(f), duality_point(dom, f)));
    }
    if dom.is_l1() {
        let (j, v) = (0..n)
            .map(|j| (j, t.codomain.norm(&t.column(j))))
            .fold((0, f64::NEG_INFINITY), |b, c| if c.1 > b.1 { c } else { b });
        return Ok(wrap(v, unit(n, j, 1.0)));
    }
    if dom.is_linf() {
        if n > MAX_SIGN_DIM {
            return Err(Error::Unsupported(format!("sign enumeration on {dom}")));
        }
        let (x, v) = sign_vectors(n)
            .into_iter()
            .map(|s| {
                let v = t.image_norm(&s);
                (s, v)
            })
            .fold((Vec::new(), f64::NEG_INFINITY), |b, c| if c.1 > b.1 { c } else { b });
        return Ok(wrap(v, x));
    }
    if dom.is_hilbert() && t.codomain.is_hilbert() {
        let svd = sorted_svd(&t.to_dmatrix());
        return Ok(wrap(svd.singular_values[0], svd.right[0].clone()));
    }
    if n == 2 {
        let (_, maxima) = scan_circle(dom, &[1.0, 0.0], &[0.0, 1.0], |x| t.image_norm(x), DEFAULT_RESOLUTION);
        let best = maxima
            .into_iter()
            .fold(None::<CircleMax>, |b, c| match b {
                Some(b) if b.value >= c.value => Some(b),
                _ => Some(c),
            })
            .expect("a grid always has a maximum");
        return Ok(wrap(best.value, best.x));
    }
    Err(Error::Unsupported(format!(
        "operator norm from {dom} to {} (dimension above 2)",
        t.codomain
    )))
}

/// `sup ‖Tz‖` over unit vectors of the span of `basis`.
pub fn restricted_norm(t: &OperatorMatrix, basis: &[Vec<f64>]) -> Result<f64> {
    if basis.is_empty() {
        return Ok(0.0);
    }
    for b in basis {
        t.domain.check_len("subspace basis vector", b)?;
    }
    let q = orthonormal_basis(basis)?;
    let dom = t.domain;
    if dom.is_hilbert() && t.codomain.is_hilbert() {
        let cols: Vec<Vec<f64>> = q.iter().map(|v| t.apply(v)).collect();
        let m = nalgebra::DMatrix::from_fn(t.m(), cols.len(), |i, j| cols[j][i]);
        return Ok(sorted_svd(&m).singular_values[0]);
    }
    match basis.len() {
        1 => Ok(t.image_norm(&basis[0]) / dom.norm(&basis[0])),
        k if k == dom.n => Ok(op_norm(t)?.value),
        2 => {
            let (_, maxima) = scan_circle(dom, &basis[0], &basis[1], |x| t.image_norm(x), DEFAULT_RESOLUTION);
            Ok(maxima.iter().map(|m| m.value).fold(0.0, f64::max))
        }
        k => Err(Error::Unsupported(format!(
            "restricted norm on a {k}-dimensional subspace of {dom}"
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spaces::Exponent;
    use crate::tol::TAU_EQ;

    fn op(s: SpaceSpec, rows: &[&[f64]]) -> OperatorMatrix {
        OperatorMatrix::on(s, rows.iter().map(|r| r.to_vec()).collect()).unwrap()
    }

    #[test]
    fn clarkson_norm_l4() {
        let t = op(SpaceSpec::lp(4, 2), &[&[1.0, 1.0], &[1.0, -1.0]]);
        let w = op_norm(&t).unwrap();
        assert!((w.value - 2f64.powf(0.75)).abs() < 1e-10);
        let c = 2f64.powf(-0.25);
        assert!((w.witness.coords[0].abs() - c).abs() < 1e-6);
        assert!((w.witness.coords[1].abs() - c).abs() < 1e-6);
    }

    #[test]
    fn exact_cases() {
        assert_eq!(op_norm(&OperatorMatrix::identity(SpaceSpec::linf(3))).unwrap().value, 1.0);
        let t = op(SpaceSpec::l1(2), &[&[3.0, 0.0], &[0.0, 4.0]]);
        let w = op_norm(&t).unwrap();
        assert_eq!(w.value, 4.0);
        assert_eq!(w.witness.coords, vec![0.0, 1.0]);
    }

    #[test]
    fn functional_dual_norm() {
        let s = SpaceSpec::lp(3, 3);
        let t = OperatorMatrix::new(vec![vec![1.0, -2.0, 0.5]], s, SpaceSpec::lp(3, 1)).unwrap();
        let w = op_norm(&t).unwrap();
        assert!((s.norm(&w.witness.coords) - 1.0).abs() < 1e-12);
        assert!((t.image_norm(&w.witness.coords) - w.value).abs() < 1e-12);
        let q = s.dual();
        assert!((w.value - q.norm(&t.rows[0])).abs() < 1e-15);
    }

    #[test]
    fn restricted_examples() {
        let t = op(SpaceSpec::l2(2), &[&[1.0, 0.0], &[0.0, 0.5]]);
        assert!((restricted_norm(&t, &[vec![0.0, 1.0]]).unwrap() - 0.5).abs() < 1e-15);
        assert!((restricted_norm(&t, &[vec![1.0, 0.0], vec![0.0, 3.0]]).unwrap() - 1.0).abs() < 1e-14);
        assert_eq!(
            restricted_norm(&t, &[vec![1.0, 1.0], vec![2.0, 2.0]]),
            Err(Error::DegenerateBasis)
        );
        let s = SpaceSpec::lp(4, 2);
        let t = op(s, &[&[1.0, 1.0], &[1.0, -1.0]]).scale(2f64.powf(-0.75));
        let z = [1.0, -1.0];
        let direct = t.image_norm(&z) / s.norm(&z);
        assert!((restricted_norm(&t, &[z.to_vec()]).unwrap() - direct).abs() < 1e-15);
        let s3 = SpaceSpec::lp(3, 3);
        let t3 = OperatorMatrix::identity(s3);
        assert!(matches!(
            restricted_norm(&t3, &[vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 1.0]]),
            Err(Error::Unsupported(_))
        ));
    }

    #[test]
    fn unsupported_high_dim() {
        let s = SpaceSpec::new(Exponent::integer(3).unwrap(), 3).unwrap();
        assert!(matches!(op_norm(&OperatorMatrix::identity(s)), Err(Error::Unsupported(_))));
    }

    proptest::proptest! {
        #[test]
        fn witness_and_scaling(
            entries in proptest::collection::vec(-2.0f64..2.0, 4),
            c in -3.0f64..3.0,
            pidx in 0usize..5,
        ) {
            let s = [SpaceSpec::l1(2), SpaceSpec::linf(2), SpaceSpec::l2(2), SpaceSpec::lp(3, 2), SpaceSpec::lp(4, 2)][pidx];
            proptest::prop_assume!(c.abs() > 1e-3 && entries.iter().any(|v| v.abs() > 1e-2));
            let t = OperatorMatrix::on(s, vec![entries[..2].to_vec(), entries[2..].to_vec()]).unwrap();
            let w = op_norm(&t).unwrap();
            proptest::prop_assert!((s.norm(&w.witness.coords) - 1.0).abs() < 1e-12);
            proptest::prop_assert!((t.image_norm(&w.witness.coords) - w.value).abs() <= TAU_EQ * w.value);
            let ws = op_norm(&t.scale(c)).unwrap();
            proptest::prop_assert!((ws.value - c.abs() * w.value).abs() <= 1e-9 * ws.value.max(1.0));
            // sampling never beats the reported norm
            for k in 0..64 {
                let th = k as f64 * 0.0981747704;
                let x = s.normalize(&[th.cos(), th.sin()]).unwrap();
                proptest::prop_assert!(t.image_norm(&x) <= w.value * (1.0 + 1e-12));
            }
        }
    }
}
