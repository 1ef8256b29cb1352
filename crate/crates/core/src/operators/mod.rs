//! Matrix operators between ℓp spaces: operator norms, norm-attainment sets,
//! approximate attainment, restricted norms and smoothness.

mod attain;
mod norm;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spaces::{Point, SpaceSpec};

pub use attain::{
    approx_attainment, attainment_set, attainment_set_at, delta_for_epsilon, hilbert_split, is_smooth_operator, AttainmentKind,
    AttainmentSet, DeltaOutcome, HilbertSplit,
};
pub(crate) use attain::inclusion_delta;
pub use norm::{op_norm, restricted_norm, NormWitness};

/// An `m × n` real matrix acting from `domain` (dimension n) to `codomain`
/// (dimension m).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawOperator")]
pub struct OperatorMatrix {
    pub rows: Vec<Vec<f64>>,
    pub domain: SpaceSpec,
    pub codomain: SpaceSpec,
}

#[derive(Deserialize)]
struct RawOperator {
    rows: Vec<Vec<f64>>,
    domain: SpaceSpec,
    codomain: SpaceSpec,
}

impl TryFrom<RawOperator> for OperatorMatrix {
    type Error = Error;

    fn try_from(r: RawOperator) -> Result<Self> {
        OperatorMatrix::new(r.rows, r.domain, r.codomain)
    }
}

impl OperatorMatrix {
    pub fn new(rows: Vec<Vec<f64>>, domain: SpaceSpec, codomain: SpaceSpec) -> Result<Self> {
        if rows.len() != codomain.n {
            return Err(Error::ShapeMismatch {
                what: "row count",
                expected: codomain.n,
                got: rows.len(),
            });
        }
        for r in &rows {
            if r.len() != domain.n {
                return Err(Error::ShapeMismatch {
                    what: "row length",
                    expected: domain.n,
                    got: r.len(),
                });
            }
            if r.iter().any(|v| !v.is_finite()) {
                return Err(Error::Unsupported("non-finite matrix entry".into()));
            }
        }
        Ok(OperatorMatrix {
            rows,
            domain,
            codomain,
        })
    }

    /// Square operator on a single space.
    pub fn on(space: SpaceSpec, rows: Vec<Vec<f64>>) -> Result<Self> {
        OperatorMatrix::new(rows, space, space)
    }

    pub fn identity(space: SpaceSpec) -> Self {
        let rows = (0..space.n)
            .map(|i| (0..space.n).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
            .collect();
        OperatorMatrix {
            rows,
            domain: space,
            codomain: space,
        }
    }

    pub fn m(&self) -> usize {
        self.codomain.n
    }

    pub fn n(&self) -> usize {
        self.domain.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.rows[i][j]
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        self.rows
            .iter()
            .map(|r| r.iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// `‖Tx‖` in the codomain norm.
    pub fn image_norm(&self, x: &[f64]) -> f64 {
        self.codomain.norm(&self.apply(x))
    }

    pub fn apply_point(&self, x: &Point) -> Result<Point> {
        if x.space != self.domain {
            return Err(Error::MixedSpaces(x.space, self.domain));
        }
        Ok(Point {
            coords: self.apply(&x.coords),
            space: self.codomain,
        })
    }

    pub fn to_dmatrix(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.m(), self.n(), |i, j| self.rows[i][j])
    }

    pub fn from_dmatrix(m: &DMatrix<f64>, domain: SpaceSpec, codomain: SpaceSpec) -> Result<Self> {
        let rows = (0..m.nrows())
            .map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect())
            .collect();
        OperatorMatrix::new(rows, domain, codomain)
    }

    /// Same entries between other spaces.
    pub fn with_spaces(&self, domain: SpaceSpec, codomain: SpaceSpec) -> Result<Self> {
        OperatorMatrix::new(self.rows.clone(), domain, codomain)
    }

    pub fn scale(&self, c: f64) -> Self {
        self.map(|v| c * v)
    }

    pub fn map<F: Fn(f64) -> f64>(&self, f: F) -> Self {
        OperatorMatrix {
            rows: self.rows.iter().map(|r| r.iter().map(|v| f(*v)).collect()).collect(),
            domain: self.domain,
            codomain: self.codomain,
        }
    }

    fn check_same(&self, other: &OperatorMatrix) -> Result<()> {
        if self.domain != other.domain {
            return Err(Error::MixedSpaces(self.domain, other.domain));
        }
        if self.codomain != other.codomain {
            return Err(Error::MixedSpaces(self.codomain, other.codomain));
        }
        Ok(())
    }

    fn zip_with<F: Fn(f64, f64) -> f64>(&self, other: &OperatorMatrix, f: F) -> Result<Self> {
        self.check_same(other)?;
        Ok(OperatorMatrix {
            rows: self
                .rows
                .iter()
                .zip(&other.rows)
                .map(|(a, b)| a.iter().zip(b).map(|(x, y)| f(*x, *y)).collect())
                .collect(),
            domain: self.domain,
            codomain: self.codomain,
        })
    }

    pub fn add(&self, other: &OperatorMatrix) -> Result<Self> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &OperatorMatrix) -> Result<Self> {
        self.zip_with(other, |a, b| a - b)
    }

    /// `‖self − other‖` in the operator norm.
    pub fn distance(&self, other: &OperatorMatrix) -> Result<f64> {
        let d = self.sub(other)?;
        if d.is_zero() {
            return Ok(0.0);
        }
        Ok(op_norm(&d)?.value)
    }

    /// `self ∘ inner`; the spaces must chain.
    pub fn compose(&self, inner: &OperatorMatrix) -> Result<Self> {
        if inner.codomain != self.domain {
            return Err(Error::MixedSpaces(inner.codomain, self.domain));
        }
        let rows = self
            .rows
            .iter()
            .map(|r| {
                (0..inner.n())
                    .map(|j| r.iter().enumerate().map(|(k, v)| v * inner.rows[k][j]).sum())
                    .collect()
            })
            .collect();
        OperatorMatrix::new(rows, inner.domain, self.codomain)
    }

    pub fn is_zero(&self) -> bool {
        self.rows.iter().flatten().all(|v| *v == 0.0)
    }

    /// Entrywise comparison within `tol`.
    pub fn approx_eq(&self, other: &OperatorMatrix, tol: f64) -> bool {
        self.domain == other.domain
            && self.codomain == other.codomain
            && self
                .rows
                .iter()
                .flatten()
                .zip(other.rows.iter().flatten())
                .all(|(a, b)| (a - b).abs() <= tol)
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        self.rows.iter().map(|r| r[j]).collect()
    }

    pub fn rank(&self, tol: f64) -> usize {
        crate::numeric::rank(&self.to_dmatrix(), tol)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shape_checks() {
        let s = SpaceSpec::l2(2);
        assert!(OperatorMatrix::on(s, vec![vec![1.0, 0.0]]).is_err());
        assert!(OperatorMatrix::on(s, vec![vec![1.0], vec![0.0]]).is_err());
        assert!(OperatorMatrix::on(s, vec![vec![1.0, f64::NAN], vec![0.0, 1.0]]).is_err());
    }

    #[test]
    fn json_shape() {
        let t = OperatorMatrix::new(vec![vec![1.0, 0.5, 0.0]], SpaceSpec::linf(3), SpaceSpec::l1(1)).unwrap();
        let js = serde_json::to_value(&t).unwrap();
        assert_eq!(js["domain"]["p"], "inf");
        assert_eq!(js["codomain"]["p"], "1");
        let back: OperatorMatrix = serde_json::from_value(js).unwrap();
        assert_eq!(back, t);
        let bad = r#"{"rows":[[1,2]],"domain":{"p":"2","n":3},"codomain":{"p":"2","n":1}}"#;
        assert!(serde_json::from_str::<OperatorMatrix>(bad).is_err());
    }

    #[test]
    fn compose_and_distance() {
        let s = SpaceSpec::linf(2);
        let a = OperatorMatrix::on(s, vec![vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        let id = a.compose(&a).unwrap();
        assert!(id.approx_eq(&OperatorMatrix::identity(s), 0.0));
        assert_eq!(a.distance(&a).unwrap(), 0.0);
        assert_eq!(a.distance(&OperatorMatrix::identity(s)).unwrap(), 2.0);
    }
}
