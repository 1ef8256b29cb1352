/// Result of a linear program.
#[derive(Clone, Debug, PartialEq)]
pub enum LpOutcome {
    Optimal { x: Vec<f64>, value: f64 },
    Unbounded,
}

const PIVOT_EPS: f64 = 1e-12;

/// Maximizes `c·x` subject to `A x ≤ b` with `x` free and `b ≥ 0`, so the
/// origin is feasible. Dense tableau simplex with Bland's rule; meant for a
/// handful of variables and at most a few hundred rows.
pub fn maximize(c: &[f64], a: &[Vec<f64>], b: &[f64]) -> LpOutcome {
    let nv = c.len();
    let m = a.len();
    assert_eq!(b.len(), m);
    assert!(b.iter().all(|v| *v >= 0.0), "origin must be feasible");
    // columns: x⁺ (nv), x⁻ (nv), slacks (m), rhs
    let width = 2 * nv + m + 1;
    let mut tab: Vec<Vec<f64>> = a
        .iter()
        .zip(b)
        .enumerate()
        .map(|(i, (row, bi))| {
            let mut r = vec![0.0; width];
            for j in 0..nv {
                r[j] = row[j];
                r[nv + j] = -row[j];
            }
            r[2 * nv + i] = 1.0;
            r[width - 1] = *bi;
            r
        })
        .collect();
    // reduced costs; the objective value sits in the last slot (negated)
    let mut obj = vec![0.0; width];
    for j in 0..nv {
        obj[j] = c[j];
        obj[nv + j] = -c[j];
    }
    let mut basis: Vec<usize> = (0..m).map(|i| 2 * nv + i).collect();

    for _ in 0..50_000 {
        let Some(enter) = (0..width - 1).find(|j| obj[*j] > PIVOT_EPS) else {
            break;
        };
        let mut leave: Option<usize> = None;
        let mut best = f64::INFINITY;
        for i in 0..m {
            let aij = tab[i][enter];
            if aij > PIVOT_EPS {
                let ratio = tab[i][width - 1] / aij;
                let better = match leave {
                    None => true,
                    Some(l) => ratio < best - 1e-14 || (ratio <= best + 1e-14 && basis[i] < basis[l]),
                };
                if better {
                    best = ratio;
                    leave = Some(i);
                }
            }
        }
        let Some(r) = leave else {
            return LpOutcome::Unbounded;
        };
        let piv = tab[r][enter];
        for v in tab[r].iter_mut() {
            *v /= piv;
        }
        let prow = tab[r].clone();
        for (i, row) in tab.iter_mut().enumerate() {
            if i != r {
                let f = row[enter];
                if f != 0.0 {
                    for (v, p) in row.iter_mut().zip(&prow) {
                        *v -= f * p;
                    }
                }
            }
        }
        let f = obj[enter];
        for (v, p) in obj.iter_mut().zip(&prow) {
            *v -= f * p;
        }
        basis[r] = enter;
    }

    let mut z = vec![0.0; 2 * nv + m];
    for (i, bi) in basis.iter().enumerate() {
        z[*bi] = tab[i][width - 1];
    }
    let x: Vec<f64> = (0..nv).map(|j| z[j] - z[nv + j]).collect();
    let value = c.iter().zip(&x).map(|(ci, xi)| ci * xi).sum();
    LpOutcome::Optimal { x, value }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn box_constraints() {
        // max x + 2y, |x| ≤ 1, |y| ≤ 3
        let a = vec![
            vec![1.0, 0.0],
            vec![-1.0, 0.0],
            vec![0.0, 1.0],
            vec![0.0, -1.0],
        ];
        let b = vec![1.0, 1.0, 3.0, 3.0];
        match maximize(&[1.0, 2.0], &a, &b) {
            LpOutcome::Optimal { x, value } => {
                assert!((value - 7.0).abs() < 1e-12);
                assert!((x[0] - 1.0).abs() < 1e-12 && (x[1] - 3.0).abs() < 1e-12);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn negative_direction() {
        // max -x - y subject to x + y ≥ -2 written as -x - y ≤ 2
        let out = maximize(&[-1.0, -1.0], &[vec![-1.0, -1.0]], &[2.0]);
        match out {
            LpOutcome::Optimal { value, .. } => assert!((value - 2.0).abs() < 1e-12),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn unbounded() {
        assert_eq!(maximize(&[1.0, 0.0], &[vec![0.0, 1.0]], &[1.0]), LpOutcome::Unbounded);
    }

    #[test]
    fn degenerate_vertex() {
        // many constraints through the optimum (0, 0) when b = 0
        let a = vec![vec![1.0, 1.0], vec![1.0, -1.0], vec![1.0, 0.0], vec![2.0, 1.0]];
        let out = maximize(&[1.0, 0.0], &a, &[0.0, 0.0, 0.0, 0.0]);
        match out {
            LpOutcome::Optimal { value, .. } => assert!(value.abs() < 1e-12),
            other => panic!("{other:?}"),
        }
    }
}
