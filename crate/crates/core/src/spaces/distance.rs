use super::{Face, Point};
use crate::error::{Error, Result};

/// Anything a point can be measured against.
pub trait PointSet {
    /// `inf_{s ∈ S} ‖x − s‖` in the space of `x`.
    fn distance_from(&self, x: &Point) -> Result<f64>;
}

impl PointSet for Face {
    fn distance_from(&self, x: &Point) -> Result<f64> {
        if x.space != self.space {
            return Err(Error::MixedSpaces(x.space, self.space));
        }
        Ok(self.distance(&x.coords))
    }
}

impl PointSet for [Point] {
    fn distance_from(&self, x: &Point) -> Result<f64> {
        let mut best = f64::INFINITY;
        for s in self {
            best = best.min(x.dist(s)?);
        }
        Ok(best)
    }
}

impl PointSet for Vec<Point> {
    fn distance_from(&self, x: &Point) -> Result<f64> {
        self.as_slice().distance_from(x)
    }
}

impl PointSet for [Face] {
    fn distance_from(&self, x: &Point) -> Result<f64> {
        let mut best = f64::INFINITY;
        for f in self {
            best = best.min(f.distance_from(x)?);
        }
        Ok(best)
    }
}

pub fn distance_point_to_set<S: PointSet + ?Sized>(x: &Point, set: &S) -> Result<f64> {
    set.distance_from(x)
}

fn project(x: &[f64], basis: &[Vec<f64>]) -> Vec<f64> {
    let mut p = vec![0.0; x.len()];
    for b in basis {
        let c: f64 = b.iter().zip(x).map(|(u, v)| u * v).sum();
        for (pi, bi) in p.iter_mut().zip(b) {
            *pi += c * bi;
        }
    }
    p
}

/// Euclidean distance from `x` to the span of an orthonormal `basis`.
pub fn distance_to_subspace(x: &[f64], basis: &[Vec<f64>]) -> f64 {
    let p = project(x, basis);
    x.iter().zip(&p).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt()
}

/// Euclidean distance from `x` to the unit sphere of the span of an
/// orthonormal `basis`: the nearest sphere point is `Px/|Px|`.
pub fn distance_to_subspace_sphere(x: &[f64], basis: &[Vec<f64>]) -> f64 {
    if basis.is_empty() {
        return f64::INFINITY;
    }
    let p = project(x, basis);
    let px = p.iter().map(|v| v * v).sum::<f64>().sqrt();
    let xx: f64 = x.iter().map(|v| v * v).sum();
    (xx - 2.0 * px + 1.0).max(0.0).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spaces::SpaceSpec;

    #[test]
    fn examples() {
        let s = SpaceSpec::l2(2);
        let x = Point::new(s, vec![0.0, 1.0]).unwrap();
        let pts = vec![Point::new(s, vec![1.0, 0.0]).unwrap()];
        assert!((distance_point_to_set(&x, &pts).unwrap() - 2f64.sqrt()).abs() < 1e-15);

        let f = Face::parse(SpaceSpec::linf(2), "0+").unwrap();
        let y = Point::new(SpaceSpec::linf(2), vec![0.5, 1.0]).unwrap();
        assert_eq!(distance_point_to_set(&y, &f).unwrap(), 0.0);

        assert_eq!(distance_to_subspace(&[1.0, 0.0], &[vec![0.0, 1.0]]), 1.0);
    }

    #[test]
    fn mixed_spaces_rejected() {
        let x = Point::new(SpaceSpec::l2(2), vec![0.0, 1.0]).unwrap();
        let f = Face::parse(SpaceSpec::linf(2), "0+").unwrap();
        assert!(matches!(distance_point_to_set(&x, &f), Err(Error::MixedSpaces(..))));
        let pts = vec![Point::new(SpaceSpec::l2(3), vec![1.0, 0.0, 0.0]).unwrap()];
        assert!(matches!(distance_point_to_set(&x, &pts), Err(Error::MixedSpaces(..))));
    }

    #[test]
    fn sphere_distance() {
        let b = [vec![1.0, 0.0, 0.0]];
        assert!((distance_to_subspace_sphere(&[0.0, 1.0, 0.0], &b) - 2f64.sqrt()).abs() < 1e-15);
        assert!(distance_to_subspace_sphere(&[-1.0, 0.0, 0.0], &b) < 1e-15);
    }
}
