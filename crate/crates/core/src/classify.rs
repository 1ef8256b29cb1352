//! Structural classification: extreme-contraction tests, isometries and
//! signed-permutation equivalence orbits.

use std::collections::HashSet;

use itertools::Itertools;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{maximize, LpOutcome};
use crate::operators::{op_norm, OperatorMatrix};
use crate::sampling::sphere_samples;
use crate::spaces::{sign_vectors, SpaceSpec};
use crate::tol::TAU_EQ;

/// `(Px)_i = signs[i] · x_{perm[i]}`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SignedPermutation {
    pub perm: Vec<usize>,
    pub signs: Vec<i8>,
}

impl SignedPermutation {
    pub fn identity(n: usize) -> Self {
        SignedPermutation {
            perm: (0..n).collect(),
            signs: vec![1; n],
        }
    }

    pub fn n(&self) -> usize {
        self.perm.len()
    }

    /// All `2ⁿ n!` signed permutations of size `n`.
    pub fn all(n: usize) -> Vec<SignedPermutation> {
        let mut out = Vec::new();
        for perm in (0..n).permutations(n) {
            for mask in 0..1usize << n {
                let signs = (0..n).map(|i| if mask >> i & 1 == 1 { -1 } else { 1 }).collect();
                out.push(SignedPermutation {
                    perm: perm.clone(),
                    signs,
                });
            }
        }
        out
    }

    pub fn matrix(&self) -> Vec<Vec<f64>> {
        let n = self.n();
        (0..n)
            .map(|i| {
                let mut r = vec![0.0; n];
                r[self.perm[i]] = self.signs[i] as f64;
                r
            })
            .collect()
    }

    pub fn operator(&self, space: SpaceSpec) -> Result<OperatorMatrix> {
        OperatorMatrix::on(space, self.matrix())
    }

    pub fn inverse(&self) -> Self {
        let n = self.n();
        let mut perm = vec![0; n];
        let mut signs = vec![1; n];
        for i in 0..n {
            perm[self.perm[i]] = i;
            signs[self.perm[i]] = self.signs[i];
        }
        SignedPermutation { perm, signs }
    }

    /// `P · A` on the rows of a matrix.
    pub fn left_apply(&self, a: &[Vec<f64>]) -> Vec<Vec<f64>> {
        (0..self.n())
            .map(|i| a[self.perm[i]].iter().map(|v| self.signs[i] as f64 * v).collect())
            .collect()
    }

    /// `A · P` on the columns of a matrix.
    pub fn right_apply(&self, a: &[Vec<f64>]) -> Vec<Vec<f64>> {
        // (AP)_{ij} = Σ_k a_{ik} P_{kj}; P_{kj} = signs[k] when perm[k] = j
        a.iter()
            .map(|row| {
                let mut out = vec![0.0; self.n()];
                for k in 0..self.n() {
                    out[self.perm[k]] += row[k] * self.signs[k] as f64;
                }
                out
            })
            .collect()
    }
}

/// How `B = L · A · R` was reached from a canonical `A`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OrbitWitness {
    pub left: SignedPermutation,
    pub right: SignedPermutation,
}

impl OrbitWitness {
    pub fn apply(&self, a: &OperatorMatrix) -> OperatorMatrix {
        OperatorMatrix {
            rows: self.right.right_apply(&self.left.left_apply(&a.rows)),
            domain: a.domain,
            codomain: a.codomain,
        }
    }

    /// Maps an orbit element back to the canonical representative.
    pub fn unapply(&self, b: &OperatorMatrix) -> OperatorMatrix {
        OperatorMatrix {
            rows: self
                .right
                .inverse()
                .right_apply(&self.left.inverse().left_apply(&b.rows)),
            domain: b.domain,
            codomain: b.codomain,
        }
    }
}

fn is_signed_permutation(rows: &[Vec<f64>]) -> bool {
    let n = rows.len();
    if rows.iter().any(|r| r.len() != n) {
        return false;
    }
    let unit = |v: f64| (v.abs() - 1.0).abs() <= TAU_EQ;
    let zero = |v: f64| v.abs() <= TAU_EQ;
    let mut col_hits = vec![0; n];
    for r in rows {
        let mut hits = 0;
        for (j, v) in r.iter().enumerate() {
            if unit(*v) {
                hits += 1;
                col_hits[j] += 1;
            } else if !zero(*v) {
                return false;
            }
        }
        if hits != 1 {
            return false;
        }
    }
    col_hits.iter().all(|c| *c == 1)
}

/// Every row has exactly one nonzero entry and it is ±1 (ℓ∞ⁿ → ℓ∞ⁿ).
pub fn linf_row_condition(t: &OperatorMatrix) -> Result<bool> {
    if !(t.domain.is_linf() && t.codomain.is_linf()) {
        return Err(Error::WrongSpaces(format!(
            "row condition needs linf -> linf, got {} -> {}",
            t.domain, t.codomain
        )));
    }
    Ok(t.rows.iter().all(|r| one_unit_entry(r)))
}

/// Every column has exactly one nonzero entry and it is ±1 (ℓ₁ⁿ → ℓ₁ⁿ).
pub fn l1_column_condition(t: &OperatorMatrix) -> Result<bool> {
    if !(t.domain.is_l1() && t.codomain.is_l1()) {
        return Err(Error::WrongSpaces(format!(
            "column condition needs l1 -> l1, got {} -> {}",
            t.domain, t.codomain
        )));
    }
    Ok((0..t.n()).all(|j| one_unit_entry(&t.column(j))))
}

fn one_unit_entry(v: &[f64]) -> bool {
    let nonzero: Vec<f64> = v.iter().copied().filter(|x| x.abs() > TAU_EQ).collect();
    nonzero.len() == 1 && (nonzero[0].abs() - 1.0).abs() <= TAU_EQ
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum ExtremeStatus {
    Extreme,
    /// `‖T ± D‖ ≤ 1` with `D ≠ 0`.
    NotExtreme { direction: Vec<Vec<f64>> },
    /// The randomized search found no perturbation; not a proof.
    NecessaryConditionOnly { passed: bool },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExtremalityVerdict {
    #[serde(flatten)]
    pub status: ExtremeStatus,
    pub method: String,
}

impl ExtremalityVerdict {
    pub fn is_extreme(&self) -> bool {
        matches!(self.status, ExtremeStatus::Extreme)
    }
}

const LP_MAX_DIM: usize = 3;
const SEARCH_DIRECTIONS: usize = 400;
const SEARCH_SEED: u64 = 0xe7_7e3e;

/// Domain vertices up to sign.
fn half_vertices(s: SpaceSpec) -> Vec<Vec<f64>> {
    if s.is_linf() {
        sign_vectors(s.n).into_iter().filter(|v| v[0] > 0.0).collect()
    } else {
        (0..s.n)
            .map(|j| {
                let mut e = vec![0.0; s.n];
                e[j] = 1.0;
                e
            })
            .collect()
    }
}

/// Extreme points of the dual unit ball of the codomain.
fn dual_vertices(s: SpaceSpec) -> Vec<Vec<f64>> {
    if s.is_l1() {
        sign_vectors(s.n)
    } else {
        (0..s.n)
            .flat_map(|i| {
                [1.0, -1.0].map(|g| {
                    let mut e = vec![0.0; s.n];
                    e[i] = g;
                    e
                })
            })
            .collect()
    }
}

fn check_unit_norm(t: &OperatorMatrix) -> Result<f64> {
    let norm = op_norm(t)?.value;
    if (norm - 1.0).abs() > TAU_EQ {
        return Err(Error::NormNotOne(norm));
    }
    Ok(norm)
}

/// Decides whether a norm-one `T` is an extreme point of the unit ball of
/// `L(X, Y)`.
///
/// Polyhedral pairs: the set `{D : ‖T ± D‖ ≤ 1}` is a polytope cut out by
/// `±g(Dσ) ≤ 1 − g(Tσ)` over domain vertices σ and dual vertices g of the
/// codomain; T is extreme iff every coordinate of D has maximum 0 on it.
/// Strictly convex codomains fall back to a seeded perturbation search.
pub fn is_extreme_contraction(t: &OperatorMatrix) -> Result<ExtremalityVerdict> {
    check_unit_norm(t)?;
    let (dom, cod) = (t.domain, t.codomain);
    if dom.is_polyhedral() && cod.is_polyhedral() {
        if dom.n > LP_MAX_DIM || cod.n > LP_MAX_DIM {
            return Err(Error::Unsupported(format!(
                "LP extremality test is sized for dimensions up to {LP_MAX_DIM}"
            )));
        }
        return lp_extremality(t);
    }
    perturbation_search(t)
}

fn lp_extremality(t: &OperatorMatrix) -> Result<ExtremalityVerdict> {
    let (m, n) = (t.m(), t.n());
    let sigmas = half_vertices(t.domain);
    let gs = dual_vertices(t.codomain);
    let mut a = Vec::new();
    let mut b = Vec::new();
    for s in &sigmas {
        let ts = t.apply(s);
        for g in &gs {
            let row: Vec<f64> = (0..m).flat_map(|i| (0..n).map(move |j| g[i] * s[j])).collect();
            let rhs = (1.0 - g.iter().zip(&ts).map(|(x, y)| x * y).sum::<f64>()).max(0.0);
            a.push(row.clone());
            b.push(rhs);
            a.push(row.iter().map(|v| -v).collect());
            b.push(rhs);
        }
    }
    for k in 0..m * n {
        let mut c = vec![0.0; m * n];
        c[k] = 1.0;
        match maximize(&c, &a, &b) {
            LpOutcome::Optimal { x, value } if value > TAU_EQ => {
                let d: Vec<Vec<f64>> = x.chunks(n).map(|r| r.to_vec()).collect();
                let dm = OperatorMatrix::new(d.clone(), t.domain, t.codomain)?;
                let plus = op_norm(&t.add(&dm)?)?.value;
                let minus = op_norm(&t.sub(&dm)?)?.value;
                if plus > 1.0 + 1e-7 || minus > 1.0 + 1e-7 {
                    return Err(Error::InvariantViolated(format!(
                        "LP direction gives norms {plus}, {minus}"
                    )));
                }
                return Ok(ExtremalityVerdict {
                    status: ExtremeStatus::NotExtreme { direction: d },
                    method: "lp".into(),
                });
            }
            LpOutcome::Optimal { .. } => {}
            LpOutcome::Unbounded => {
                return Err(Error::InvariantViolated("extremality LP is unbounded".into()));
            }
        }
    }
    Ok(ExtremalityVerdict {
        status: ExtremeStatus::Extreme,
        method: "lp".into(),
    })
}

/// Tries elementary and seeded Gaussian directions D, scanning magnitudes
/// `2^{-k}` down to 10⁻³, for `‖T ± tD‖ ≤ 1`.
fn perturbation_search(t: &OperatorMatrix) -> Result<ExtremalityVerdict> {
    let (m, n) = (t.m(), t.n());
    let mut dirs: Vec<Vec<Vec<f64>>> = Vec::new();
    for i in 0..m {
        for j in 0..n {
            let mut d = vec![vec![0.0; n]; m];
            d[i][j] = 1.0;
            dirs.push(d);
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(SEARCH_SEED);
    for _ in 0..SEARCH_DIRECTIONS {
        dirs.push(
            (0..m)
                .map(|_| (0..n).map(|_| StandardNormal.sample(&mut rng)).collect())
                .collect(),
        );
    }
    for d in dirs {
        let dm = OperatorMatrix::new(d, t.domain, t.codomain)?;
        let mut mag = 0.5;
        while mag >= 1e-3 {
            let step = dm.scale(mag);
            let plus = op_norm(&t.add(&step)?)?.value;
            let minus = op_norm(&t.sub(&step)?)?.value;
            if plus <= 1.0 + TAU_EQ && minus <= 1.0 + TAU_EQ {
                return Ok(ExtremalityVerdict {
                    status: ExtremeStatus::NotExtreme { direction: step.rows },
                    method: "perturbation-search".into(),
                });
            }
            mag /= 2.0;
        }
    }
    Ok(ExtremalityVerdict {
        status: ExtremeStatus::NecessaryConditionOnly { passed: true },
        method: "perturbation-search".into(),
    })
}

/// Whether `T` is an isometry of `ℓpⁿ` onto itself.
pub fn is_isometry(t: &OperatorMatrix) -> Result<bool> {
    if t.domain != t.codomain {
        return Err(Error::WrongSpaces(format!(
            "isometry test needs equal spaces, got {} -> {}",
            t.domain, t.codomain
        )));
    }
    let s = t.domain;
    if s.is_hilbert() {
        let m = t.to_dmatrix();
        let g = m.transpose() * &m;
        let n = s.n;
        return Ok((0..n).all(|i| (0..n).all(|j| {
            let target = if i == j { 1.0 } else { 0.0 };
            (g[(i, j)] - target).abs() <= 1e-9
        })));
    }
    if !is_signed_permutation(&t.rows) {
        return Ok(false);
    }
    if s.is_polyhedral() {
        return Ok(true);
    }
    // signed permutations are isometries of every ℓp; confirm on a sample
    let samples = sphere_samples(s, 512)?;
    Ok(samples.iter().all(|x| (t.image_norm(x) - 1.0).abs() <= 1e-9))
}

/// The isometry group of `ℓpⁿ`, p ≠ 2: all signed permutation matrices.
pub fn enumerate_isometries(s: SpaceSpec) -> Result<Vec<OperatorMatrix>> {
    if s.is_hilbert() && s.n > 1 {
        return Err(Error::InfiniteGroup);
    }
    SignedPermutation::all(s.n)
        .iter()
        .map(|p| p.operator(s))
        .collect()
}

fn round_key(a: &OperatorMatrix) -> Vec<i64> {
    a.rows.iter().flatten().map(|v| (v * 1e12).round() as i64).collect()
}

/// `{L A R}` over signed permutations `L`, `R`, each with a witness.
pub fn equivalence_orbit_with_witness(a: &OperatorMatrix) -> Result<Vec<(OperatorMatrix, OrbitWitness)>> {
    let n = a.n();
    if a.m() != n {
        return Err(Error::Unsupported("equivalence orbits need square matrices".into()));
    }
    if n > 3 {
        return Err(Error::Unsupported(format!("orbit enumeration sized for n <= 3, got {n}")));
    }
    let group = SignedPermutation::all(n);
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for left in &group {
        for right in &group {
            let w = OrbitWitness {
                left: left.clone(),
                right: right.clone(),
            };
            let b = w.apply(a);
            if seen.insert(round_key(&b)) {
                out.push((b, w));
            }
        }
    }
    Ok(out)
}

pub fn equivalence_orbit(a: &OperatorMatrix) -> Result<Vec<OperatorMatrix>> {
    Ok(equivalence_orbit_with_witness(a)?
        .into_iter()
        .map(|(b, _)| b)
        .collect())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CensusOrbit {
    RankOne,
    Block,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CensusMember {
    pub matrix: OperatorMatrix,
    pub orbit: CensusOrbit,
    pub witness: OrbitWitness,
}

/// Canonical rank-one extreme contraction `E₁₁` of `L(ℓ∞³, ℓ₁³)`.
pub fn canonical_rank_one() -> OperatorMatrix {
    OperatorMatrix::new(
        vec![vec![1.0, 0.0, 0.0], vec![0.0; 3], vec![0.0; 3]],
        SpaceSpec::linf(3),
        SpaceSpec::l1(3),
    )
    .expect("3x3")
}

/// Canonical block extreme contraction `[[½,½],[½,−½]] ⊕ 0`.
pub fn canonical_block() -> OperatorMatrix {
    OperatorMatrix::new(
        vec![vec![0.5, 0.5, 0.0], vec![0.5, -0.5, 0.0], vec![0.0; 3]],
        SpaceSpec::linf(3),
        SpaceSpec::l1(3),
    )
    .expect("3x3")
}

/// The extreme contractions of `L(ℓ∞³, ℓ₁³)` as the union of the two
/// canonical orbits, rank-one orbit first.
pub fn enumerate_extreme_linf3_l13() -> Vec<CensusMember> {
    let mut out = Vec::new();
    for (canon, orbit) in [(canonical_rank_one(), CensusOrbit::RankOne), (canonical_block(), CensusOrbit::Block)] {
        for (matrix, witness) in equivalence_orbit_with_witness(&canon).expect("3x3 orbit") {
            out.push(CensusMember {
                matrix,
                orbit,
                witness,
            });
        }
    }
    out
}

/// Finds `T` among the census members (entrywise within 10⁻⁹).
pub fn census_lookup(t: &OperatorMatrix) -> Option<CensusMember> {
    if t.domain != SpaceSpec::linf(3) || t.codomain != SpaceSpec::l1(3) {
        return None;
    }
    enumerate_extreme_linf3_l13()
        .into_iter()
        .find(|c| c.matrix.approx_eq(t, 1e-9))
}
