use std::fmt;

use itertools::Itertools;
use serde::{Deserialize, Serialize};

use super::{Point, SpaceSpec};
use crate::error::{Error, Result};

/// A proper face of the unit ball of ℓ∞ⁿ or ℓ₁ⁿ, encoded by a sign pattern.
///
/// In ℓ∞ⁿ the nonzero entries fix coordinates and the zeros are free in
/// `[-1, 1]`. In ℓ₁ⁿ the face is the convex hull of `pattern_i e_i` over the
/// nonzero entries.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Face {
    pub space: SpaceSpec,
    #[serde(with = "pattern_str")]
    pub pattern: Vec<i8>,
}

impl Face {
    pub fn new(space: SpaceSpec, pattern: Vec<i8>) -> Result<Self> {
        if !space.is_polyhedral() {
            return Err(Error::Unsupported(format!("{space} has no polyhedral faces")));
        }
        if pattern.len() != space.n {
            return Err(Error::ShapeMismatch {
                what: "face pattern",
                expected: space.n,
                got: pattern.len(),
            });
        }
        if pattern.iter().any(|s| !(-1..=1).contains(s)) || pattern.iter().all(|s| *s == 0) {
            return Err(Error::Unsupported(format!(
                "invalid sign pattern {}",
                pattern_to_string(&pattern)
            )));
        }
        Ok(Face { space, pattern })
    }

    /// Parses a pattern written as `+0-`.
    pub fn parse(space: SpaceSpec, s: &str) -> Result<Self> {
        Face::new(space, pattern_from_str(s)?)
    }

    fn nonzeros(&self) -> usize {
        self.pattern.iter().filter(|s| **s != 0).count()
    }

    pub fn dim(&self) -> usize {
        if self.space.is_linf() {
            self.space.n - self.nonzeros()
        } else {
            self.nonzeros() - 1
        }
    }

    pub fn is_vertex(&self) -> bool {
        self.dim() == 0
    }

    pub fn is_facet(&self) -> bool {
        self.dim() + 1 == self.space.n
    }

    /// Extreme points of the face.
    pub fn vertices(&self) -> Vec<Vec<f64>> {
        if self.space.is_linf() {
            let free: Vec<usize> = (0..self.space.n).filter(|i| self.pattern[*i] == 0).collect();
            (0..1usize << free.len())
                .map(|mask| {
                    let mut v: Vec<f64> = self.pattern.iter().map(|s| *s as f64).collect();
                    for (k, i) in free.iter().enumerate() {
                        v[*i] = if mask >> k & 1 == 1 { -1.0 } else { 1.0 };
                    }
                    v
                })
                .collect()
        } else {
            self.pattern
                .iter()
                .enumerate()
                .filter(|(_, s)| **s != 0)
                .map(|(i, s)| {
                    let mut v = vec![0.0; self.space.n];
                    v[i] = *s as f64;
                    v
                })
                .collect()
        }
    }

    /// A point in the relative interior: free coordinates at zero (ℓ∞), or the
    /// barycenter of the vertices (ℓ₁).
    pub fn relative_interior_point(&self) -> Point {
        let coords = if self.space.is_linf() {
            self.pattern.iter().map(|s| *s as f64).collect()
        } else {
            let k = self.nonzeros() as f64;
            self.pattern.iter().map(|s| *s as f64 / k).collect()
        };
        Point {
            coords,
            space: self.space,
        }
    }

    /// Whether `other` is a subset of `self`.
    pub fn contains_face(&self, other: &Face) -> bool {
        if self.space != other.space {
            return false;
        }
        let pairs = self.pattern.iter().zip(&other.pattern);
        if self.space.is_linf() {
            pairs.filter(|(g, _)| **g != 0).all(|(g, f)| f == g)
        } else {
            pairs.filter(|(_, f)| **f != 0).all(|(g, f)| f == g)
        }
    }

    /// Distance from `x` to the face in the space's own norm.
    pub fn distance(&self, x: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.space.n);
        if self.space.is_linf() {
            self.pattern.iter().zip(x).fold(0.0, |m, (s, v)| {
                let d = if *s == 0 {
                    (v.abs() - 1.0).max(0.0)
                } else {
                    (v - *s as f64).abs()
                };
                m.max(d)
            })
        } else {
            // min over t in the simplex of Σ|a_i - t_i| with a_i = s_i x_i, plus
            // the mass off the support. Negative a_i must be paid in full; the
            // nonnegative part can be moved to total mass one at cost |Σa⁺ - 1|.
            let mut off = 0.0;
            let mut neg = 0.0;
            let mut pos = 0.0;
            for (s, v) in self.pattern.iter().zip(x) {
                if *s == 0 {
                    off += v.abs();
                } else {
                    let a = *s as f64 * v;
                    if a < 0.0 {
                        neg -= a;
                    } else {
                        pos += a;
                    }
                }
            }
            off + neg + (pos - 1.0).abs()
        }
    }

    pub fn contains_point(&self, x: &[f64], tol: f64) -> bool {
        self.distance(x) <= tol
    }

    pub fn pattern_string(&self) -> String {
        pattern_to_string(&self.pattern)
    }
}

impl fmt::Display for Face {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.pattern_string())
    }
}

/// All proper faces of a polyhedral unit ball, ordered by dimension and then
/// lexicographically by pattern.
pub fn enumerate_faces(s: SpaceSpec) -> Result<Vec<Face>> {
    if !s.is_polyhedral() {
        return Err(Error::Unsupported(format!("{s} has no polyhedral faces")));
    }
    let mut faces: Vec<Face> = std::iter::repeat_n([-1i8, 0, 1], s.n)
        .multi_cartesian_product()
        .filter(|p| p.iter().any(|v| *v != 0))
        .map(|pattern| Face { space: s, pattern })
        .collect();
    faces.sort_by_key(|f| f.dim());
    Ok(faces)
}

pub fn relative_interior_point(f: &Face) -> Point {
    f.relative_interior_point()
}

pub(crate) fn pattern_to_string(p: &[i8]) -> String {
    p.iter()
        .map(|s| match s {
            1 => '+',
            -1 => '-',
            _ => '0',
        })
        .collect()
}

pub(crate) fn pattern_from_str(s: &str) -> Result<Vec<i8>> {
    s.chars()
        .map(|c| match c {
            '+' => Ok(1),
            '-' => Ok(-1),
            '0' => Ok(0),
            _ => Err(Error::Unsupported(format!("bad pattern character {c:?} in {s:?}"))),
        })
        .collect()
}

mod pattern_str {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(p: &[i8], s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&super::pattern_to_string(p))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<i8>, D::Error> {
        let s = String::deserialize(d)?;
        super::pattern_from_str(&s).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn binom(n: usize, k: usize) -> usize {
        (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
    }

    #[test]
    fn face_counts() {
        assert_eq!(enumerate_faces(SpaceSpec::linf(2)).unwrap().len(), 8);
        assert_eq!(enumerate_faces(SpaceSpec::l1(2)).unwrap().len(), 8);
        let cube = enumerate_faces(SpaceSpec::linf(3)).unwrap();
        assert_eq!(cube.len(), 26);
        let by_dim = |d| cube.iter().filter(|f| f.dim() == d).count();
        assert_eq!((by_dim(0), by_dim(1), by_dim(2)), (8, 12, 6));
        assert!(enumerate_faces(SpaceSpec::l2(2)).is_err());
    }

    #[test]
    fn lattice_closed_forms() {
        for n in 1..=5 {
            // cube: C(n,k) 2^{n-k} faces of dimension k < n
            let cube: usize = (0..n).map(|k| binom(n, k) << (n - k)).sum();
            assert_eq!(enumerate_faces(SpaceSpec::linf(n)).unwrap().len(), cube);
            // cross-polytope: C(n,k) 2^k faces with k vertices
            let cross: usize = (1..=n).map(|k| binom(n, k) << k).sum();
            assert_eq!(enumerate_faces(SpaceSpec::l1(n)).unwrap().len(), cross);
        }
    }

    #[test]
    fn interior_points() {
        let f = Face::parse(SpaceSpec::linf(2), "+0").unwrap();
        assert_eq!(f.relative_interior_point().coords, vec![1.0, 0.0]);
        let f = Face::parse(SpaceSpec::l1(2), "++").unwrap();
        assert_eq!(f.relative_interior_point().coords, vec![0.5, 0.5]);
        let f = Face::parse(SpaceSpec::linf(3), "00-").unwrap();
        assert_eq!(f.relative_interior_point().coords, vec![0.0, 0.0, -1.0]);
        assert!(f.is_facet());
    }

    #[test]
    fn distance_examples() {
        let f = Face::parse(SpaceSpec::linf(2), "0+").unwrap();
        assert_eq!(f.distance(&[0.5, 1.0]), 0.0);
        assert_eq!(f.distance(&[0.5, 0.0]), 1.0);
        let g = Face::parse(SpaceSpec::l1(2), "+0").unwrap();
        assert_eq!(g.distance(&[0.0, 1.0]), 2.0);
    }

    #[test]
    fn containment() {
        let s = SpaceSpec::linf(3);
        let facet = Face::parse(s, "+00").unwrap();
        let edge = Face::parse(s, "+-0").unwrap();
        assert!(facet.contains_face(&edge));
        assert!(!edge.contains_face(&facet));
        let s = SpaceSpec::l1(3);
        let facet = Face::parse(s, "+-+").unwrap();
        let vertex = Face::parse(s, "0-0").unwrap();
        assert!(facet.contains_face(&vertex));
        assert!(!vertex.contains_face(&facet));
    }

    #[test]
    fn pattern_json() {
        let f = Face::parse(SpaceSpec::linf(3), "+0-").unwrap();
        let js = serde_json::to_value(&f).unwrap();
        assert_eq!(js["pattern"], "+0-");
        let back: Face = serde_json::from_value(js).unwrap();
        assert_eq!(back, f);
    }

    /// Brute-force distance to an ℓ₁ face by scanning the simplex on a grid.
    fn l1_face_distance_oracle(f: &Face, x: &[f64], steps: usize) -> f64 {
        let verts = f.vertices();
        let k = verts.len();
        let mut best = f64::INFINITY;
        let mut weights = vec![0usize; k];
        loop {
            let total: usize = weights.iter().sum();
            if total == steps {
                let mut p = vec![0.0; x.len()];
                for (w, v) in weights.iter().zip(&verts) {
                    for (pi, vi) in p.iter_mut().zip(v) {
                        *pi += *w as f64 / steps as f64 * vi;
                    }
                }
                best = best.min(f.space.dist(x, &p));
            }
            // odometer over weights with sum ≤ steps
            let mut i = 0;
            loop {
                if i == k {
                    return best;
                }
                weights[i] += 1;
                if weights.iter().sum::<usize>() <= steps {
                    break;
                }
                weights[i] = 0;
                i += 1;
            }
        }
    }

    proptest! {
        #[test]
        fn l1_distance_matches_grid_oracle(
            x in proptest::collection::vec(-1.5f64..1.5, 3),
            idx in 0usize..26,
        ) {
            let faces = enumerate_faces(SpaceSpec::l1(3)).unwrap();
            let f = &faces[idx];
            let exact = f.distance(&x);
            let oracle = l1_face_distance_oracle(f, &x, 60);
            // the grid can only overestimate, by at most one grid step in ℓ₁
            prop_assert!(exact <= oracle + 1e-12);
            prop_assert!(oracle - exact <= 3.0 / 60.0 + 1e-12);
        }

        #[test]
        fn interior_points_are_unit_and_on_face(idx in 0usize..80, linf in proptest::bool::ANY) {
            let s = if linf { SpaceSpec::linf(4) } else { SpaceSpec::l1(4) };
            let faces = enumerate_faces(s).unwrap();
            let f = &faces[idx % faces.len()];
            let p = f.relative_interior_point();
            prop_assert!((p.norm() - 1.0).abs() < 1e-12);
            prop_assert!(f.distance(&p.coords) < 1e-12);
            for v in f.vertices() {
                prop_assert!((s.norm(&v) - 1.0).abs() < 1e-12);
                prop_assert!(f.distance(&v) < 1e-12);
            }
        }
    }
}
