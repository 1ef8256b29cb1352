use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Thin SVD with singular values in decreasing order.
#[derive(Clone, Debug)]
pub struct SortedSvd {
    pub singular_values: Vec<f64>,
    /// Right singular vectors, one per singular value.
    pub right: Vec<Vec<f64>>,
    /// Left singular vectors, one per singular value.
    pub left: Vec<Vec<f64>>,
}

/// One-sided Jacobi SVD. nalgebra's SVD with vectors requested returns wrong
/// singular values on some 3 × 3 inputs, so the rotation sweep is done here.
pub fn sorted_svd(m: &DMatrix<f64>) -> SortedSvd {
    let (rows, cols) = m.shape();
    let mut u: Vec<Vec<f64>> = (0..cols).map(|j| m.column(j).iter().copied().collect()).collect();
    let mut v: Vec<Vec<f64>> = (0..cols)
        .map(|j| (0..cols).map(|i| if i == j { 1.0 } else { 0.0 }).collect())
        .collect();
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
    for _ in 0..100 {
        let mut rotated = false;
        for p in 0..cols {
            for q in p + 1..cols {
                let alpha = dot(&u[p], &u[p]);
                let beta = dot(&u[q], &u[q]);
                let gamma = dot(&u[p], &u[q]);
                if gamma.abs() <= 1e-15 * (alpha * beta).sqrt() || gamma == 0.0 {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for w in [&mut u, &mut v] {
                    let (a, b) = (w[p].clone(), w[q].clone());
                    for k in 0..a.len() {
                        w[p][k] = c * a[k] - s * b[k];
                        w[q][k] = s * a[k] + c * b[k];
                    }
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let norms: Vec<f64> = u.iter().map(|c| dot(c, c).sqrt()).collect();
    let mut idx: Vec<usize> = (0..cols).collect();
    idx.sort_by(|a, b| norms[*b].total_cmp(&norms[*a]));
    idx.truncate(rows.min(cols));
    let top = idx.first().map_or(0.0, |i| norms[*i]);
    let mut left: Vec<Vec<f64>> = Vec::with_capacity(idx.len());
    for i in &idx {
        if norms[*i] > 1e-14 * top.max(f64::MIN_POSITIVE) {
            left.push(u[*i].iter().map(|x| x / norms[*i]).collect());
        } else {
            let fill = orthonormal_complement(&left, rows);
            left.push(fill.into_iter().next().unwrap_or_else(|| vec![0.0; rows]));
        }
    }
    SortedSvd {
        singular_values: idx.iter().map(|i| norms[*i]).collect(),
        right: idx.iter().map(|i| v[*i].clone()).collect(),
        left,
    }
}

/// Numerical rank: singular values above `tol · σ_max` (or above `tol` when
/// the matrix is tiny).
pub fn rank(m: &DMatrix<f64>, tol: f64) -> usize {
    if m.is_empty() {
        return 0;
    }
    let s = sorted_svd(m).singular_values;
    let top = s.first().copied().unwrap_or(0.0);
    s.iter().filter(|v| **v > tol * top.max(1.0)).count()
}

/// Orthonormalizes the given vectors by modified Gram-Schmidt. Fails when they
/// are linearly dependent.
pub fn orthonormal_basis(vectors: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
    let mut out: Vec<Vec<f64>> = Vec::with_capacity(vectors.len());
    for v in vectors {
        let scale = v.iter().map(|t| t * t).sum::<f64>().sqrt();
        if scale == 0.0 {
            return Err(Error::DegenerateBasis);
        }
        let mut w = v.clone();
        for _ in 0..2 {
            for q in &out {
                let c: f64 = q.iter().zip(&w).map(|(a, b)| a * b).sum();
                for (wi, qi) in w.iter_mut().zip(q) {
                    *wi -= c * qi;
                }
            }
        }
        let r = w.iter().map(|t| t * t).sum::<f64>().sqrt();
        if r <= 1e-10 * scale {
            return Err(Error::DegenerateBasis);
        }
        out.push(w.into_iter().map(|t| t / r).collect());
    }
    Ok(out)
}

/// An orthonormal basis of the orthogonal complement of `basis` in ℝⁿ.
pub fn orthonormal_complement(basis: &[Vec<f64>], n: usize) -> Vec<Vec<f64>> {
    let mut all: Vec<Vec<f64>> = basis.to_vec();
    let mut out = Vec::new();
    // candidates: standard basis vectors, most orthogonal first
    let mut cands: Vec<(f64, usize)> = (0..n)
        .map(|i| {
            let overlap: f64 = basis.iter().map(|b| b[i] * b[i]).sum();
            (overlap, i)
        })
        .collect();
    cands.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    for (_, i) in cands {
        if all.len() == n {
            break;
        }
        let mut e = vec![0.0; n];
        e[i] = 1.0;
        let mut trial = all.clone();
        trial.push(e);
        if let Ok(q) = orthonormal_basis(&trial) {
            let v = q.last().expect("nonempty").clone();
            all.push(v.clone());
            out.push(v);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn svd_sorted() {
        let m = DMatrix::from_row_slice(2, 2, &[0.5, 0.0, 0.0, 2.0]);
        let s = sorted_svd(&m);
        assert!((s.singular_values[0] - 2.0).abs() < 1e-14);
        assert!((s.right[0][1].abs() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn svd_near_repeated_top() {
        let m = DMatrix::from_row_slice(
            3,
            3,
            &[
                0.10129842944172489, 0.490084060409109, 0.7042138698402267,
                0.524058168445889, -0.7426039534835323, 0.16866600709983048,
                0.23014765002183543, -0.09968326461605463, 0.5868490816215582,
            ],
        );
        let p = [0.8170742461728787, 0.44728222647446314, -0.36376955084375745];
        let pm = DMatrix::from_fn(3, 3, |i, j| p[i] * p[j]);
        let a = &m - &m * pm / 41.0;
        let s = sorted_svd(&a);
        let eig = (a.transpose() * &a).symmetric_eigenvalues();
        let top = eig.iter().copied().fold(0.0, f64::max).sqrt();
        assert!((s.singular_values[0] - top).abs() < 1e-12);
        assert!((s.singular_values[0] - 1.0).abs() < 1e-12);
    }

    proptest::proptest! {
        #[test]
        fn svd_reconstructs(vals in proptest::collection::vec(-3.0f64..3.0, 6), wide in proptest::bool::ANY) {
            let m = if wide {
                DMatrix::from_row_slice(2, 3, &vals)
            } else {
                DMatrix::from_row_slice(3, 2, &vals)
            };
            let s = sorted_svd(&m);
            let mut r = DMatrix::zeros(m.nrows(), m.ncols());
            for k in 0..s.singular_values.len() {
                let l = DMatrix::from_column_slice(m.nrows(), 1, &s.left[k]);
                let v = DMatrix::from_row_slice(1, m.ncols(), &s.right[k]);
                r += l * v * s.singular_values[k];
            }
            proptest::prop_assert!((r - &m).abs().max() < 1e-10);
            let eig = (m.transpose() * &m).symmetric_eigenvalues();
            let top = eig.iter().copied().fold(0.0, f64::max).sqrt();
            proptest::prop_assert!((s.singular_values[0] - top).abs() < 1e-9);
            for w in s.singular_values.windows(2) {
                proptest::prop_assert!(w[0] >= w[1]);
            }
        }
    }

    #[test]
    fn gram_schmidt() {
        let q = orthonormal_basis(&[vec![1.0, 1.0, 0.0], vec![1.0, 0.0, 0.0]]).unwrap();
        let dot: f64 = q[0].iter().zip(&q[1]).map(|(a, b)| a * b).sum();
        assert!(dot.abs() < 1e-15);
        assert_eq!(
            orthonormal_basis(&[vec![1.0, 2.0], vec![2.0, 4.0]]),
            Err(Error::DegenerateBasis)
        );
    }

    #[test]
    fn complement_dims() {
        let b = orthonormal_basis(&[vec![1.0, 1.0, 1.0]]).unwrap();
        let c = orthonormal_complement(&b, 3);
        assert_eq!(c.len(), 2);
        for v in &c {
            let dot: f64 = v.iter().zip(&b[0]).map(|(x, y)| x * y).sum();
            assert!(dot.abs() < 1e-14);
        }
        assert_eq!(orthonormal_complement(&[], 2).len(), 2);
    }

    #[test]
    fn ranks() {
        let m = DMatrix::from_row_slice(2, 3, &[1.0, 2.0, 3.0, 2.0, 4.0, 6.0]);
        assert_eq!(rank(&m, 1e-10), 1);
    }
}
