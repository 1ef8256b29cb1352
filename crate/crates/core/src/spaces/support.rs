use serde::{Deserialize, Serialize};

use super::{Face, Point};
use crate::error::{Error, Result};
use crate::numeric::golden_min;
use crate::tol::{TAU_EQ, TAU_OPT, TAU_PROBE};

/// The set `J(x)` of norm-one functionals attaining `‖x‖` at `x`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SupportSet {
    pub point: Point,
    pub kind: SupportKind,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum SupportKind {
    /// `x` is smooth; the functional is unique.
    Unique { functional: Vec<f64> },
    /// `J(x)` is a face of the dual unit ball.
    Face { face: Face },
}

impl SupportSet {
    /// Extreme points of `J(x)`.
    pub fn generators(&self) -> Vec<Vec<f64>> {
        match &self.kind {
            SupportKind::Unique { functional } => vec![functional.clone()],
            SupportKind::Face { face } => face.vertices(),
        }
    }

    pub fn is_singleton(&self) -> bool {
        matches!(self.kind, SupportKind::Unique { .. })
    }
}

fn sign(v: f64) -> f64 {
    if v > 0.0 {
        1.0
    } else if v < 0.0 {
        -1.0
    } else {
        0.0
    }
}

pub fn support_functionals(x: &Point) -> Result<SupportSet> {
    if x.is_zero() {
        return Err(Error::ZeroVector);
    }
    let s = x.space;
    let nx = x.norm();
    let kind = if s.is_linf() {
        let pattern: Vec<i8> = x
            .coords
            .iter()
            .map(|v| {
                if v.abs() >= nx * (1.0 - TAU_EQ) {
                    sign(*v) as i8
                } else {
                    0
                }
            })
            .collect();
        collapse(Face::new(s.dual(), pattern)?)
    } else if s.is_l1() {
        let pattern: Vec<i8> = x
            .coords
            .iter()
            .map(|v| {
                if v.abs() > nx * TAU_EQ {
                    sign(*v) as i8
                } else {
                    0
                }
            })
            .collect();
        collapse(Face::new(s.dual(), pattern)?)
    } else {
        let p = s.p.value();
        let functional = x
            .coords
            .iter()
            .map(|v| sign(*v) * (v.abs() / nx).powf(p - 1.0))
            .collect();
        SupportKind::Unique { functional }
    };
    Ok(SupportSet {
        point: x.clone(),
        kind,
    })
}

fn collapse(face: Face) -> SupportKind {
    if face.is_vertex() {
        SupportKind::Unique {
            functional: face.relative_interior_point().coords,
        }
    } else {
        SupportKind::Face { face }
    }
}

pub fn is_smooth_point(x: &Point) -> Result<bool> {
    Ok(support_functionals(x)?.is_singleton())
}

/// Birkhoff-James orthogonality `x ⊥_B y`: `‖x + λy‖ ≥ ‖x‖` for every λ.
/// The strong form additionally asks for strict inequality when `λ ≠ 0`.
pub fn birkhoff_orthogonal(x: &Point, y: &Point, strong: bool) -> Result<bool> {
    x.same_space(y)?;
    if x.is_zero() {
        return Err(Error::ZeroVector);
    }
    if y.is_zero() {
        // every λ is a minimizer
        return Ok(!strong);
    }
    let s = x.space;
    let nx = x.norm();
    let ny = y.norm();
    let g = |lam: f64| {
        let v: Vec<f64> = x.coords.iter().zip(&y.coords).map(|(a, b)| a + lam * b).collect();
        s.norm(&v)
    };
    let r = 2.0 * nx / ny;
    let (_, gmin) = golden_min(g, -r, r, TAU_OPT * r);
    let plain = gmin.min(g(0.0)) >= nx * (1.0 - TAU_EQ);
    if !strong || !plain {
        return Ok(plain);
    }
    if s.is_strictly_convex() {
        return Ok(true);
    }
    let lam0 = TAU_PROBE * nx / ny;
    let bar = nx * (1.0 + TAU_EQ);
    Ok(g(lam0) > bar && g(-lam0) > bar)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spaces::{sign_vectors, SpaceSpec};
    use proptest::prelude::*;

    fn pt(s: SpaceSpec, c: &[f64]) -> Point {
        Point::new(s, c.to_vec()).unwrap()
    }

    #[test]
    fn unique_functional_l2() {
        let j = support_functionals(&pt(SpaceSpec::l2(2), &[1.0, 0.0])).unwrap();
        assert_eq!(j.generators(), vec![vec![1.0, 0.0]]);
    }

    /// Brute force: maximize f(x) over a fine sample of the ℓ₁² sphere and
    /// collect the maximizers.
    #[test]
    fn linf_corner_generators_match_sampling() {
        let x = [1.0, 1.0];
        let j = support_functionals(&pt(SpaceSpec::linf(2), &x)).unwrap();
        let mut gens = j.generators();
        gens.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert_eq!(gens, vec![vec![0.0, 1.0], vec![1.0, 0.0]]);

        let n = 4000;
        let mut maximizers = Vec::new();
        for k in 0..n {
            let t = 4.0 * k as f64 / n as f64;
            // walk the ℓ₁ sphere boundary
            let (a, b) = match t as u32 {
                0 => (1.0 - t, t),
                1 => (1.0 - t, 2.0 - t),
                2 => (t - 3.0, 2.0 - t),
                _ => (t - 3.0, t - 4.0),
            };
            let val = a * x[0] + b * x[1];
            if (val - 1.0).abs() < 1e-12 {
                maximizers.push((a, b));
            }
        }
        // the maximizers form the segment from e₂ to e₁
        assert!(maximizers.iter().all(|(a, b)| *a >= -1e-12 && *b >= -1e-12));
        assert!(maximizers.iter().any(|(a, _)| (*a - 1.0).abs() < 1e-12));
        assert!(maximizers.iter().any(|(_, b)| (*b - 1.0).abs() < 1e-12));
    }

    #[test]
    fn l4_functional() {
        let c = 2f64.powf(-0.25);
        let x = pt(SpaceSpec::lp(4, 2), &[c, c]);
        let j = support_functionals(&x).unwrap();
        let f = &j.generators()[0];
        // f_i = |x_i|^3 for a unit vector; dual norm in ℓ_{4/3} equals 1
        assert!((f[0] - c.powi(3)).abs() < 1e-15);
        assert!((SpaceSpec::lp(4, 2).dual().norm(f) - 1.0).abs() < 1e-12);
        let fx: f64 = f.iter().zip(&x.coords).map(|(a, b)| a * b).sum();
        assert!((fx - 1.0).abs() < 1e-12);
    }

    #[test]
    fn smoothness() {
        let s = SpaceSpec::linf(2);
        assert!(is_smooth_point(&pt(s, &[1.0, 0.5])).unwrap());
        assert!(!is_smooth_point(&pt(s, &[1.0, 1.0])).unwrap());
        assert!(!is_smooth_point(&pt(SpaceSpec::l1(2), &[1.0, 0.0])).unwrap());
        assert!(is_smooth_point(&pt(SpaceSpec::lp(3, 2), &[1.0, 0.0])).unwrap());
        assert_eq!(is_smooth_point(&pt(s, &[0.0, 0.0])), Err(Error::ZeroVector));
    }

    #[test]
    fn bj_examples() {
        let s = SpaceSpec::l2(2);
        assert!(birkhoff_orthogonal(&pt(s, &[1.0, 0.0]), &pt(s, &[0.0, 1.0]), false).unwrap());
        assert!(birkhoff_orthogonal(&pt(s, &[1.0, 0.0]), &pt(s, &[0.0, 1.0]), true).unwrap());
        assert!(!birkhoff_orthogonal(&pt(s, &[1.0, 0.0]), &pt(s, &[1.0, 0.0]), false).unwrap());
        let s = SpaceSpec::linf(2);
        let x = pt(s, &[1.0, 1.0]);
        let y = pt(s, &[1.0, -1.0]);
        assert!(birkhoff_orthogonal(&x, &y, false).unwrap());
        assert!(birkhoff_orthogonal(&x, &y, true).unwrap());
        // (1,0) ⊥ (0,1) in ℓ∞ but not strongly: small λ leaves the norm at 1
        let x = pt(s, &[1.0, 0.0]);
        let y = pt(s, &[0.0, 1.0]);
        assert!(birkhoff_orthogonal(&x, &y, false).unwrap());
        assert!(!birkhoff_orthogonal(&x, &y, true).unwrap());
    }

    #[test]
    fn bj_grid_oracle_linf() {
        // grid minimization of ‖x + λy‖_∞ over λ ∈ [-4, 4]
        let s = SpaceSpec::linf(2);
        let x = [1.0, 1.0];
        let y = [1.0, -1.0];
        let min = (0..=80_000)
            .map(|k| -4.0 + k as f64 * 1e-4)
            .map(|l| s.norm(&[x[0] + l * y[0], x[1] + l * y[1]]))
            .fold(f64::INFINITY, f64::min);
        assert!((min - 1.0).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn holder_consistency(
            x in proptest::collection::vec(-2.0f64..2.0, 3),
            pidx in 0usize..4,
        ) {
            let s = [SpaceSpec::l1(3), SpaceSpec::l2(3), SpaceSpec::linf(3), SpaceSpec::lp(3, 3)][pidx];
            prop_assume!(s.norm(&x) > 1e-3);
            let p = pt(s, &x);
            let j = support_functionals(&p).unwrap();
            for f in j.generators() {
                prop_assert!((s.dual().norm(&f) - 1.0).abs() < 1e-9);
                let fx: f64 = f.iter().zip(&x).map(|(a, b)| a * b).sum();
                prop_assert!((fx - p.norm()).abs() <= 1e-9 * p.norm().max(1.0));
            }
            // no norm-one functional beats ‖x‖: test the dual extreme points
            if s.is_linf() || s.is_l1() {
                let dual_ext: Vec<Vec<f64>> = if s.is_linf() {
                    (0..3).flat_map(|i| [1.0, -1.0].map(|g| { let mut e = vec![0.0; 3]; e[i] = g; e })).collect()
                } else {
                    sign_vectors(3)
                };
                for f in dual_ext {
                    let fx: f64 = f.iter().zip(&x).map(|(a, b)| a * b).sum();
                    prop_assert!(fx <= p.norm() + 1e-9);
                }
            }
        }

        #[test]
        fn bj_homogeneous(
            x in proptest::collection::vec(-2.0f64..2.0, 2),
            y in proptest::collection::vec(-2.0f64..2.0, 2),
            a in 0.1f64..10.0,
            b in 0.1f64..10.0,
            pidx in 0usize..3,
        ) {
            let s = [SpaceSpec::l1(2), SpaceSpec::linf(2), SpaceSpec::lp(3, 2)][pidx];
            prop_assume!(s.norm(&x) > 1e-2 && s.norm(&y) > 1e-2);
            let scaled = |v: &[f64], c: f64| pt(s, &v.iter().map(|t| t * c).collect::<Vec<_>>());
            let base = birkhoff_orthogonal(&pt(s, &x), &pt(s, &y), false).unwrap();
            let sc = birkhoff_orthogonal(&scaled(&x, a), &scaled(&y, b), false).unwrap();
            prop_assert_eq!(base, sc);
        }
    }
}
