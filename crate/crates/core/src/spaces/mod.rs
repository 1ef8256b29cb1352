//! Finite-dimensional ℓp spaces: exponents, norms, duality, polyhedral faces,
//! supporting functionals, Birkhoff-James orthogonality and the arc-length
//! geometry of the ℓp unit circle.

mod arc;
mod distance;
mod exponent;
mod face;
mod support;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use arc::{arc_length_constant, arc_length_constant_with_samples, arc_length_total, ArcTable};
pub use distance::{distance_point_to_set, distance_to_subspace, distance_to_subspace_sphere, PointSet};
pub use exponent::Exponent;
pub use face::{enumerate_faces, relative_interior_point, Face};
pub use support::{birkhoff_orthogonal, is_smooth_point, support_functionals, SupportKind, SupportSet};

/// A finite-dimensional real ℓp space.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawSpace")]
pub struct SpaceSpec {
    pub p: Exponent,
    pub n: usize,
}

#[derive(Deserialize)]
struct RawSpace {
    p: Exponent,
    n: usize,
}

impl TryFrom<RawSpace> for SpaceSpec {
    type Error = Error;

    fn try_from(raw: RawSpace) -> Result<Self> {
        SpaceSpec::new(raw.p, raw.n)
    }
}

impl SpaceSpec {
    pub fn new(p: Exponent, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::ZeroDimension);
        }
        Ok(SpaceSpec { p, n })
    }

    pub fn linf(n: usize) -> Self {
        SpaceSpec::new(Exponent::Infinity, n).expect("n >= 1")
    }

    pub fn l1(n: usize) -> Self {
        SpaceSpec::new(Exponent::ONE, n).expect("n >= 1")
    }

    pub fn l2(n: usize) -> Self {
        SpaceSpec::new(Exponent::TWO, n).expect("n >= 1")
    }

    /// ℓp with integer exponent `p >= 1`.
    pub fn lp(p: u32, n: usize) -> Self {
        SpaceSpec::new(Exponent::integer(p).expect("p >= 1"), n).expect("n >= 1")
    }

    pub fn is_polyhedral(&self) -> bool {
        self.p.is_one() || self.p.is_infinite()
    }

    pub fn is_strictly_convex(&self) -> bool {
        !self.is_polyhedral()
    }

    pub fn is_hilbert(&self) -> bool {
        self.p.is_two()
    }

    pub fn is_linf(&self) -> bool {
        self.p.is_infinite()
    }

    pub fn is_l1(&self) -> bool {
        self.p.is_one()
    }

    /// The dual space ℓq with `1/p + 1/q = 1`.
    pub fn dual(&self) -> SpaceSpec {
        SpaceSpec {
            p: self.p.conjugate(),
            n: self.n,
        }
    }

    pub fn norm(&self, x: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.n);
        lp_norm(self.p, x)
    }

    /// Norm of `x - y`.
    pub fn dist(&self, x: &[f64], y: &[f64]) -> f64 {
        let diff: Vec<f64> = x.iter().zip(y).map(|(a, b)| a - b).collect();
        self.norm(&diff)
    }

    /// `x / ‖x‖`.
    pub fn normalize(&self, x: &[f64]) -> Result<Vec<f64>> {
        let r = self.norm(x);
        if r == 0.0 || !r.is_finite() {
            return Err(Error::ZeroVector);
        }
        Ok(x.iter().map(|v| v / r).collect())
    }

    pub fn check_len(&self, what: &'static str, x: &[f64]) -> Result<()> {
        if x.len() != self.n {
            return Err(Error::ShapeMismatch {
                what,
                expected: self.n,
                got: x.len(),
            });
        }
        Ok(())
    }
}

impl fmt::Display for SpaceSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "l{}^{}", self.p, self.n)
    }
}

/// The ℓp norm of a coordinate slice.
pub fn lp_norm(p: Exponent, x: &[f64]) -> f64 {
    match p {
        Exponent::Infinity => x.iter().fold(0.0, |m, v| m.max(v.abs())),
        _ if p.is_one() => x.iter().map(|v| v.abs()).sum(),
        _ => {
            // scale by the largest entry so the powers neither overflow nor underflow
            let m = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            if m == 0.0 {
                return 0.0;
            }
            if p.is_two() {
                return m * x.iter().map(|v| (v / m) * (v / m)).sum::<f64>().sqrt();
            }
            let pf = p.value();
            let s: f64 = x.iter().map(|v| (v.abs() / m).powf(pf)).sum();
            m * s.powf(1.0 / pf)
        }
    }
}

/// A vector in a concrete ℓp space.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub coords: Vec<f64>,
    pub space: SpaceSpec,
}

impl Point {
    pub fn new(space: SpaceSpec, coords: Vec<f64>) -> Result<Self> {
        space.check_len("point", &coords)?;
        Ok(Point { coords, space })
    }

    pub fn norm(&self) -> f64 {
        self.space.norm(&self.coords)
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(|v| *v == 0.0)
    }

    pub fn neg(&self) -> Point {
        Point {
            coords: self.coords.iter().map(|v| -v).collect(),
            space: self.space,
        }
    }

    pub fn dist(&self, other: &Point) -> Result<f64> {
        self.same_space(other)?;
        Ok(self.space.dist(&self.coords, &other.coords))
    }

    pub(crate) fn same_space(&self, other: &Point) -> Result<()> {
        if self.space != other.space {
            return Err(Error::MixedSpaces(self.space, other.space));
        }
        Ok(())
    }
}

/// Standard ℓp norm of a point.
pub fn norm(x: &Point) -> f64 {
    x.norm()
}

/// Conjugate space ℓq.
pub fn dual_space(s: SpaceSpec) -> SpaceSpec {
    s.dual()
}

/// Extreme points of the unit ball of a polyhedral space.
pub fn extreme_points(s: SpaceSpec) -> Result<Vec<Point>> {
    let coords: Vec<Vec<f64>> = if s.is_linf() {
        sign_vectors(s.n)
    } else if s.is_l1() {
        (0..s.n)
            .flat_map(|i| {
                [1.0, -1.0].into_iter().map(move |sgn| {
                    let mut e = vec![0.0; s.n];
                    e[i] = sgn;
                    e
                })
            })
            .collect()
    } else {
        return Err(Error::Unsupported(format!(
            "{s} is strictly convex; every unit vector is extreme"
        )));
    };
    Ok(coords
        .into_iter()
        .map(|c| Point { coords: c, space: s })
        .collect())
}

/// All `2^n` vectors in `{-1, 1}^n`, in binary counting order.
pub fn sign_vectors(n: usize) -> Vec<Vec<f64>> {
    (0..1usize << n)
        .map(|mask| {
            (0..n)
                .map(|i| if mask >> i & 1 == 1 { -1.0 } else { 1.0 })
                .collect()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn norm_examples() {
        let l3 = SpaceSpec::lp(3, 2);
        assert_eq!(l3.norm(&[1.0, 0.0]), 1.0);
        assert_eq!(SpaceSpec::linf(2).norm(&[1.0, 1.0]), 1.0);
        // direct evaluation: (1 + 1)^{1/4}
        let expected = 2f64.powf(0.25);
        assert_relative_eq!(SpaceSpec::lp(4, 2).norm(&[1.0, 1.0]), expected, max_relative = 1e-15);
    }

    #[test]
    fn norm_is_zero_only_at_origin() {
        for s in [SpaceSpec::l1(3), SpaceSpec::l2(3), SpaceSpec::linf(3), SpaceSpec::lp(5, 3)] {
            assert_eq!(s.norm(&[0.0, 0.0, 0.0]), 0.0);
            assert!(s.norm(&[0.0, 1e-300, 0.0]) > 0.0);
        }
    }

    #[test]
    fn dual_examples() {
        assert_eq!(SpaceSpec::linf(3).dual(), SpaceSpec::l1(3));
        assert_eq!(SpaceSpec::l2(5).dual(), SpaceSpec::l2(5));
        let q = SpaceSpec::lp(4, 2).dual();
        assert_eq!(q.p, Exponent::new(4, 3).unwrap());
    }

    #[test]
    fn extreme_point_counts() {
        assert_eq!(extreme_points(SpaceSpec::linf(2)).unwrap().len(), 4);
        assert_eq!(extreme_points(SpaceSpec::l1(2)).unwrap().len(), 4);
        assert_eq!(extreme_points(SpaceSpec::linf(3)).unwrap().len(), 8);
        assert!(matches!(
            extreme_points(SpaceSpec::lp(3, 2)),
            Err(Error::Unsupported(_))
        ));
        let pts = extreme_points(SpaceSpec::l1(3)).unwrap();
        for (i, a) in pts.iter().enumerate() {
            for b in &pts[i + 1..] {
                assert_ne!(a.coords, b.coords);
            }
        }
    }

    #[test]
    fn classification_flags() {
        let s = SpaceSpec::l2(3);
        assert!(s.is_hilbert() && s.is_strictly_convex() && !s.is_polyhedral());
        let s = SpaceSpec::linf(3);
        assert!(s.is_polyhedral() && !s.is_strictly_convex() && !s.is_hilbert());
        let s = SpaceSpec::new(Exponent::new(3, 2).unwrap(), 2).unwrap();
        assert!(s.is_strictly_convex() && !s.is_hilbert());
    }

    #[test]
    fn zero_dimension_rejected() {
        assert_eq!(SpaceSpec::new(Exponent::TWO, 0), Err(Error::ZeroDimension));
    }

    #[test]
    fn space_json_shape() {
        let s = SpaceSpec::new(Exponent::new(4, 3).unwrap(), 2).unwrap();
        let js = serde_json::to_string(&s).unwrap();
        assert_eq!(js, r#"{"p":"4/3","n":2}"#);
        let back: SpaceSpec = serde_json::from_str(&js).unwrap();
        assert_eq!(back, s);
        assert!(serde_json::from_str::<SpaceSpec>(r#"{"p":"inf","n":0}"#).is_err());
    }
}
