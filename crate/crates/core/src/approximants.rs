//! Explicit uniform ε-BPB approximants. Each constructor returns the
//! approximant with its measured distance and both attainment sets, after
//! checking the report contract.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::classify::{census_lookup, is_extreme_contraction, is_isometry, ExtremeStatus, l1_column_condition, linf_row_condition, CensusOrbit};
use crate::error::{Error, Result};
use crate::numeric::{orthonormal_basis, orthonormal_complement, rank};
use crate::operators::{attainment_set, hilbert_split, op_norm, restricted_norm, AttainmentSet, OperatorMatrix};
use crate::spaces::{birkhoff_orthogonal, distance_to_subspace, Point, SpaceSpec};
use crate::tol::TAU_EQ;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ApproximantReport {
    pub original: OperatorMatrix,
    pub approximant: OperatorMatrix,
    pub eps: f64,
    /// `‖T − A‖`.
    pub distance: f64,
    pub attainment_original: AttainmentSet,
    pub attainment_approximant: AttainmentSet,
    pub attainment_preserved: bool,
    pub construction: String,
}

fn check_eps(eps: f64) -> Result<()> {
    if eps > 0.0 && eps.is_finite() {
        Ok(())
    } else {
        Err(Error::BadEpsilon(eps))
    }
}

fn check_unit(t: &OperatorMatrix) -> Result<()> {
    let v = op_norm(t)?.value;
    if (v - 1.0).abs() > TAU_EQ {
        return Err(Error::NormNotOne(v));
    }
    Ok(())
}

/// Measures the pair and enforces the report contract.
fn finish(
    original: &OperatorMatrix,
    approximant: OperatorMatrix,
    eps: f64,
    construction: &str,
    must_preserve: bool,
) -> Result<ApproximantReport> {
    let distance = original.distance(&approximant)?;
    let norm = op_norm(&approximant)?.value;
    if (norm - 1.0).abs() > TAU_EQ {
        return Err(Error::InvariantViolated(format!("{construction}: ‖A‖ = {norm}")));
    }
    if distance >= eps {
        return Err(Error::InvariantViolated(format!(
            "{construction}: ‖T − A‖ = {distance} is not below {eps}"
        )));
    }
    if distance == 0.0 {
        return Err(Error::InvariantViolated(format!("{construction}: A equals T")));
    }
    let attainment_original = attainment_set(original)?;
    let attainment_approximant = attainment_set(&approximant)?;
    let attainment_preserved = attainment_original.same_set(&attainment_approximant);
    if must_preserve && !attainment_preserved {
        return Err(Error::InvariantViolated(format!(
            "{construction}: attainment set changed"
        )));
    }
    Ok(ApproximantReport {
        original: original.clone(),
        approximant,
        eps,
        distance,
        attainment_original,
        attainment_approximant,
        attainment_preserved,
        construction: construction.into(),
    })
}

/// `T = w ⊗ f` with `‖w‖ = 1` in the codomain and `‖f‖ = ‖T‖` in the dual.
fn rank_one_factor(t: &OperatorMatrix) -> (Vec<f64>, Vec<f64>) {
    let (j, _) = (0..t.n())
        .map(|j| (j, t.codomain.norm(&t.column(j))))
        .fold((0, f64::NEG_INFINITY), |b, c| if c.1 > b.1 { c } else { b });
    let a = t.column(j);
    let (i, _) = a
        .iter()
        .enumerate()
        .fold((0, 0.0f64), |b, (k, v)| if v.abs() > b.1 { (k, v.abs()) } else { b });
    let na = t.codomain.norm(&a);
    let f: Vec<f64> = t.rows[i].iter().map(|v| v / a[i] * na).collect();
    let w: Vec<f64> = a.iter().map(|v| v / na).collect();
    (w, f)
}

/// A unit vector `u` with `‖u − w‖ = gap`, found by turning `w` toward the
/// lowest-index basis vector not parallel to it.
fn nudge(space: SpaceSpec, w: &[f64], gap: f64) -> Vec<f64> {
    let n = w.len();
    let nonzero: Vec<usize> = (0..n).filter(|i| w[*i] != 0.0).collect();
    let k = if nonzero.len() >= 2 || nonzero.first() != Some(&0) { 0 } else { 1 };
    let turn = |th: f64| {
        let v: Vec<f64> = (0..n)
            .map(|i| th.cos() * w[i] + if i == k { th.sin() } else { 0.0 })
            .collect();
        let r = space.norm(&v);
        v.into_iter().map(|x| x / r).collect::<Vec<f64>>()
    };
    let g = |th: f64| space.dist(&turn(th), w);
    // g(0) = 0 and g(π) = 2, so bisection finds gap by continuity
    let (mut lo, mut hi) = (0.0, std::f64::consts::PI);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if g(mid) < gap {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    turn(0.5 * (lo + hi))
}

/// Rank-one operators: replace the image direction `w` by a nearby unit `u`
/// with `‖u − w‖ = min(eps/4, 1/2)`; the functional and hence `M_T` stay.
pub fn rank_one_approx(t: &OperatorMatrix, eps: f64) -> Result<ApproximantReport> {
    check_eps(eps)?;
    if t.m() == 1 {
        return Err(Error::CodomainDimOne);
    }
    if t.is_zero() || t.rank(1e-9) != 1 {
        return Err(Error::NotRankOne);
    }
    check_unit(t)?;
    let (w, f) = rank_one_factor(t);
    let u = nudge(t.codomain, &w, (eps / 4.0).min(0.5));
    let rows = u.iter().map(|ui| f.iter().map(|fj| ui * fj).collect()).collect();
    let a = OperatorMatrix::new(rows, t.domain, t.codomain)?;
    finish(t, a, eps, "rank-one", true)
}

/// Non-extreme contractions: `A_n = (1 − 1/n) T + (1/n) T₁` for the least
/// `n > 1` with `‖T − T₁‖ / n < eps`, where `T = (T₁ + T₂)/2`.
pub fn convex_witness_approx(
    t: &OperatorMatrix,
    t1: &OperatorMatrix,
    t2: &OperatorMatrix,
    eps: f64,
) -> Result<ApproximantReport> {
    check_eps(eps)?;
    check_unit(t1)?;
    check_unit(t2)?;
    let mid = t1.add(t2)?.scale(0.5);
    if !mid.approx_eq(t, TAU_EQ) {
        return Err(Error::NotAMidpoint);
    }
    let d = t.distance(t1)?;
    if d <= TAU_EQ {
        return Err(Error::DegenerateWitness);
    }
    let n = ((d / eps).floor() as u64 + 1).max(2) as f64;
    let a = t.scale(1.0 - 1.0 / n).add(&t1.scale(1.0 / n))?;
    finish(t, a, eps, &format!("convex-witness n={n}"), true)
}

/// Projection onto `span(B2)` along `span(B1)`, as a matrix.
fn projection_along(b1: &[Vec<f64>], b2: &[Vec<f64>], n: usize) -> Result<DMatrix<f64>> {
    let cols: Vec<&Vec<f64>> = b1.iter().chain(b2).collect();
    let m = DMatrix::from_fn(n, n, |i, j| cols[j][i]);
    let inv = m.try_inverse().ok_or(Error::NotComplementary)?;
    let k1 = b1.len();
    let b2m = DMatrix::from_fn(n, b2.len(), |i, j| b2[j][i]);
    let coeffs = inv.rows(k1, b2.len()).into_owned();
    Ok(b2m * coeffs)
}

fn bj_probes(basis: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let mut out: Vec<Vec<f64>> = basis.to_vec();
    for (i, a) in basis.iter().enumerate() {
        for b in &basis[i + 1..] {
            out.push(a.iter().zip(b).map(|(x, y)| x + y).collect());
            out.push(a.iter().zip(b).map(|(x, y)| x - y).collect());
        }
    }
    out
}

/// Direct sums `X = X₁ ⊕ X₂` with `span M_T ⊆ X₁` and `X₁ ⊥_B X₂`:
/// `A_n(x₁ + x₂) = Tx₁ + (1 − 1/n) Tx₂`, with `n` from the bound
/// `‖T − A_n‖ ≤ 2/n < eps`.
pub fn direct_sum_shrink_approx(
    t: &OperatorMatrix,
    x1: &[Vec<f64>],
    x2: &[Vec<f64>],
    eps: f64,
) -> Result<ApproximantReport> {
    check_eps(eps)?;
    let dim = t.n();
    for v in x1.iter().chain(x2) {
        t.domain.check_len("subspace basis vector", v)?;
    }
    let all: Vec<Vec<f64>> = x1.iter().chain(x2).cloned().collect();
    if x1.len() + x2.len() != dim || x1.is_empty() || x2.is_empty() {
        return Err(Error::NotComplementary);
    }
    let stacked = DMatrix::from_fn(dim, dim, |i, j| all[j][i]);
    if rank(&stacked, 1e-10) != dim {
        return Err(Error::NotComplementary);
    }
    check_unit(t)?;
    if x2.iter().all(|v| t.codomain.norm(&t.apply(v)) <= TAU_EQ * t.domain.norm(v)) {
        return Err(Error::ZeroOnX2);
    }
    let q1 = orthonormal_basis(x1)?;
    let m_t = attainment_set(t)?;
    for p in m_t.sample_points(64)? {
        if distance_to_subspace(&p, &q1) > 1e-7 {
            return Err(Error::AttainmentOutsideX1);
        }
    }
    for a in bj_probes(x1) {
        for b in bj_probes(x2) {
            let pa = Point::new(t.domain, a.clone())?;
            let pb = Point::new(t.domain, b)?;
            if !birkhoff_orthogonal(&pa, &pb, false)? {
                return Err(Error::OrthogonalityFails);
            }
        }
    }
    let n = ((2.0 / eps).floor() as u64 + 1).max(2) as f64;
    let p2 = projection_along(x1, x2, dim)?;
    let tp2 = t.to_dmatrix() * p2;
    let a = OperatorMatrix::from_dmatrix(&(t.to_dmatrix() - tp2 / n), t.domain, t.codomain)?;
    let report = finish(t, a, eps, &format!("direct-sum-shrink n={n}"), true)?;
    if report.distance > 2.0 / n + TAU_EQ {
        return Err(Error::InvariantViolated(format!(
            "shrink distance {} exceeds 2/n",
            report.distance
        )));
    }
    Ok(report)
}

fn require_square_on(t: &OperatorMatrix, pred: fn(&SpaceSpec) -> bool, what: &str) -> Result<()> {
    if t.domain != t.codomain || !pred(&t.domain) {
        return Err(Error::WrongSpaces(format!(
            "{what} needs {what} spaces on both sides, got {} -> {}",
            t.domain, t.codomain
        )));
    }
    Ok(())
}

/// Extreme contractions of `ℓ∞ⁿ`: pull the first entry (row-major) that
/// shares its column with another nonzero entry toward 0 by `eps/2`.
pub fn linf_extreme_approx(t: &OperatorMatrix, eps: f64) -> Result<ApproximantReport> {
    check_eps(eps)?;
    require_square_on(t, SpaceSpec::is_linf, "linf")?;
    check_unit(t)?;
    if !linf_row_condition(t)? {
        return Err(Error::ConditionFails);
    }
    if is_isometry(t)? {
        return Err(Error::IsIsometry);
    }
    let step = eps.min(1.0) / 2.0;
    let col_count = |j: usize| t.rows.iter().filter(|r| r[j].abs() > TAU_EQ).count();
    let (i, j) = (0..t.m())
        .flat_map(|i| (0..t.n()).map(move |j| (i, j)))
        .find(|(i, j)| t.rows[*i][*j].abs() > TAU_EQ && col_count(*j) >= 2)
        .ok_or(Error::ConditionFails)?;
    let mut a = t.clone();
    a.rows[i][j] -= t.rows[i][j].signum() * step;
    finish(t, a, eps, "linf-extreme", true)
}

/// Extreme contractions of `ℓ₁ⁿ`: move `eps/4` of the first entry of the
/// first row with two nonzeros into the first zero row, keeping the column
/// sum.
pub fn l1_extreme_approx(t: &OperatorMatrix, eps: f64) -> Result<ApproximantReport> {
    check_eps(eps)?;
    require_square_on(t, SpaceSpec::is_l1, "l1")?;
    check_unit(t)?;
    if !l1_column_condition(t)? {
        return Err(Error::ConditionFails);
    }
    if is_isometry(t)? {
        return Err(Error::IsIsometry);
    }
    let step = eps.min(2.0) / 4.0;
    let nonzeros = |r: &Vec<f64>| r.iter().filter(|v| v.abs() > TAU_EQ).count();
    let r = t.rows.iter().position(|row| nonzeros(row) >= 2).ok_or(Error::ConditionFails)?;
    let z = t.rows.iter().position(|row| nonzeros(row) == 0).ok_or(Error::NoZeroRow)?;
    let c = t.rows[r].iter().position(|v| v.abs() > TAU_EQ).expect("row has nonzeros");
    let s = t.rows[r][c].signum();
    let mut a = t.clone();
    a.rows[r][c] -= s * step;
    a.rows[z][c] += s * step;
    finish(t, a, eps, "l1-extreme", true)
}

/// The 90 extreme contractions of `L(ℓ∞³, ℓ₁³)`: rank-one members go through
/// `rank_one_approx`; block members are conjugated to the canonical form,
/// perturbed there and conjugated back.
pub fn linf3_l13_extreme_approx(t: &OperatorMatrix, eps: f64) -> Result<ApproximantReport> {
    check_eps(eps)?;
    let member = census_lookup(t).ok_or(Error::NotInEnumeration)?;
    if member.orbit == CensusOrbit::RankOne {
        return rank_one_approx(t, eps);
    }
    let e = eps.min(2.0) / 8.0;
    let canon = OperatorMatrix::new(
        vec![vec![0.5 - e, 0.5 - e, 0.0], vec![0.5, -0.5, 0.0], vec![e, e, 0.0]],
        t.domain,
        t.codomain,
    )?;
    let a = member.witness.apply(&canon);
    finish(t, a, eps, "linf3-l13-block", true)
}

fn require_hilbert(t: &OperatorMatrix) -> Result<()> {
    if !(t.domain.is_hilbert() && t.codomain.is_hilbert()) {
        return Err(Error::WrongSpaces(format!(
            "Hilbert construction needs l2 spaces, got {} -> {}",
            t.domain, t.codomain
        )));
    }
    Ok(())
}

/// Hilbert operators with `M_T = S_{H₀}`: shrink on `H₀⊥` when `T` does not
/// vanish there; otherwise the rank-one construction when `dim H₀ = 1`, or a
/// rotation of the images of two `H₀` directions by `φ` with
/// `2 sin(φ/2) = eps/4`.
pub fn hilbert_rotate_approx(t: &OperatorMatrix, eps: f64) -> Result<ApproximantReport> {
    check_eps(eps)?;
    require_hilbert(t)?;
    check_unit(t)?;
    let split = hilbert_split(t)?;
    hilbert_with_split(t, &split.h0, &split.h0_perp, eps)
}

/// As `hilbert_rotate_approx` with a caller-declared `H₀`.
pub fn hilbert_rotate_approx_declared(
    t: &OperatorMatrix,
    h0: &[Vec<f64>],
    eps: f64,
) -> Result<ApproximantReport> {
    check_eps(eps)?;
    require_hilbert(t)?;
    check_unit(t)?;
    let q = orthonormal_basis(h0)?;
    if q.is_empty() {
        return Err(Error::NotAttainmentSubspace);
    }
    // H₀ must lie in M_T: T is isometric on it
    let cols: Vec<Vec<f64>> = q.iter().map(|v| t.apply(v)).collect();
    let m = DMatrix::from_fn(t.m(), q.len(), |i, j| cols[j][i]);
    let svd = crate::numeric::sorted_svd(&m);
    let smallest = if q.len() > t.m() { 0.0 } else { *svd.singular_values.last().expect("nonempty") };
    if smallest < 1.0 - 1e-9 {
        return Err(Error::NotAttainmentSubspace);
    }
    let perp = orthonormal_complement(&q, t.n());
    hilbert_with_split(t, &q, &perp, eps)
}

fn hilbert_with_split(
    t: &OperatorMatrix,
    h0: &[Vec<f64>],
    perp: &[Vec<f64>],
    eps: f64,
) -> Result<ApproximantReport> {
    let r = restricted_norm(t, perp)?;
    if r >= 1.0 - TAU_EQ {
        return Err(Error::ObstructionFullNormOnComplement(r));
    }
    if r > TAU_EQ {
        let mut rep = direct_sum_shrink_approx(t, h0, perp, eps)?;
        rep.construction = format!("hilbert-shrink ({})", rep.construction);
        return Ok(rep);
    }
    if h0.len() == 1 {
        let mut rep = rank_one_approx(t, eps)?;
        rep.construction = "hilbert-rank-one".into();
        return Ok(rep);
    }
    let phi = 2.0 * (eps.min(2.0) / 8.0).asin();
    let (e1, e2) = (&h0[0], &h0[1]);
    let (y1, y2) = (t.apply(e1), t.apply(e2));
    let (c, s) = (phi.cos(), phi.sin());
    let u1: Vec<f64> = y1.iter().zip(&y2).map(|(a, b)| c * a + s * b).collect();
    let u2: Vec<f64> = y1.iter().zip(&y2).map(|(a, b)| -s * a + c * b).collect();
    // A = T + (u₁ − y₁) e₁ᵀ + (u₂ − y₂) e₂ᵀ
    let rows = (0..t.m())
        .map(|i| {
            (0..t.n())
                .map(|j| t.rows[i][j] + (u1[i] - y1[i]) * e1[j] + (u2[i] - y2[i]) * e2[j])
                .collect()
        })
        .collect();
    let a = OperatorMatrix::new(rows, t.domain, t.codomain)?;
    finish(t, a, eps, "hilbert-rotate", true)
}

/// `T = diag(1, 0)` on ℓ₂² against the rank-one projection onto
/// `(sin θ, cos θ)` with `sin θ = 1 − eps²/16`: a uniform approximant whose
/// attainment set differs from that of `T`.
pub fn tilted_projection_demo(eps: f64) -> Result<(ApproximantReport, f64)> {
    check_eps(eps)?;
    let s = SpaceSpec::l2(2);
    let sin = 1.0 - eps.min(2.0).powi(2) / 16.0;
    let cos = (1.0 - sin * sin).sqrt();
    let t = OperatorMatrix::on(s, vec![vec![1.0, 0.0], vec![0.0, 0.0]])?;
    let a = OperatorMatrix::on(s, vec![vec![sin * sin, sin * cos], vec![sin * cos, cos * cos]])?;
    let theta = sin.asin();
    Ok((finish(&t, a, eps, "tilted-projection", false)?, theta))
}

/// Norm-one functionals on ℓp², 1 < p < ∞: move the attaining point along
/// the sphere until its supporting functional is within `eps` of `f`.
pub fn functional_approx_lp2(f: &[f64], p: crate::spaces::Exponent, eps: f64) -> Result<ApproximantReport> {
    check_eps(eps)?;
    let s = SpaceSpec::new(p, 2)?;
    if s.is_polyhedral() {
        return Err(Error::WrongSpaces(format!("{s} is not strictly convex")));
    }
    s.check_len("functional", f)?;
    let t = OperatorMatrix::new(vec![f.to_vec()], s, SpaceSpec::new(p, 1)?)?;
    check_unit(&t)?;
    let x = op_norm(&t)?.witness.coords;
    let t0 = x[1].atan2(x[0]);
    let q = s.dual();
    let pf = p.value();
    let mut h = eps.min(1.0);
    for _ in 0..80 {
        let xk = s.normalize(&[(t0 + h).cos(), (t0 + h).sin()])?;
        let fk: Vec<f64> = xk.iter().map(|v| v.signum() * v.abs().powf(pf - 1.0)).collect();
        let fk: Vec<f64> = fk.iter().map(|v| v / q.norm(&fk)).collect();
        let df: Vec<f64> = fk.iter().zip(f).map(|(a, b)| a - b).collect();
        if q.norm(&df) < eps && s.dist(&xk, &x) < eps / 2.0 && q.norm(&df) > 0.0 {
            let a = OperatorMatrix::new(vec![fk], t.domain, t.codomain)?;
            return finish(&t, a, eps, "functional-lp2", false);
        }
        h /= 2.0;
    }
    Err(Error::InvariantViolated("no nearby supporting functional found".into()))
}

/// `A_n = P + (1 − 1/n)(I − P)` with `P` the orthogonal projection onto
/// `span{x₀}` in ℓ₂ᵈ.
pub fn sbpbp_counterexample_family(x0: &Point, n: u64) -> Result<OperatorMatrix> {
    let s = x0.space;
    if !s.is_hilbert() {
        return Err(Error::WrongSpaces(format!("{s} is not a Hilbert space")));
    }
    if n <= 1 {
        return Err(Error::BadIndex(n));
    }
    let r = x0.norm();
    if (r - 1.0).abs() > TAU_EQ {
        return Err(Error::NormNotOne(r));
    }
    let c = 1.0 - 1.0 / n as f64;
    let x = &x0.coords;
    let rows = (0..s.n)
        .map(|i| {
            (0..s.n)
                .map(|j| {
                    let p = x[i] * x[j];
                    let id = if i == j { 1.0 } else { 0.0 };
                    p + c * (id - p)
                })
                .collect()
        })
        .collect();
    OperatorMatrix::on(s, rows)
}

/// One member of the family together with a unit `h₀ ⊥ x₀`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SbpbpWitness {
    pub n: u64,
    pub operator: OperatorMatrix,
    pub h0: Vec<f64>,
    /// `‖A_n h₀‖`.
    pub image_norm: f64,
    /// Distance from `h₀` to `M_{A_n} = {±x₀}`.
    pub distance: f64,
    pub attainment: AttainmentSet,
}

pub fn sbpbp_witness(x0: &Point, n: u64) -> Result<SbpbpWitness> {
    let operator = sbpbp_counterexample_family(x0, n)?;
    let h0 = orthonormal_complement(std::slice::from_ref(&x0.coords), x0.space.n)
        .into_iter()
        .next()
        .ok_or(Error::Unsupported("dimension 1 has no orthogonal direction".into()))?;
    let attainment = attainment_set(&operator)?;
    let distance = attainment.distance_coords(&h0);
    Ok(SbpbpWitness {
        n,
        image_norm: operator.image_norm(&h0),
        operator,
        h0,
        distance,
        attainment,
    })
}

/// Routes `T` to the constructor that applies to it: Hilbert pairs, rank-one
/// operators, the `ℓ∞³ → ℓ₁³` census, non-extreme contractions (through an
/// extremality witness) and the ℓ∞/ℓ₁ extreme contractions.
pub fn auto_approx(t: &OperatorMatrix, eps: f64) -> Result<ApproximantReport> {
    check_eps(eps)?;
    if t.domain.is_hilbert() && t.codomain.is_hilbert() {
        return hilbert_rotate_approx(t, eps);
    }
    if t.m() > 1 && !t.is_zero() && t.rank(1e-9) == 1 {
        return rank_one_approx(t, eps);
    }
    if census_lookup(t).is_some() {
        return linf3_l13_extreme_approx(t, eps);
    }
    match is_extreme_contraction(t)?.status {
        ExtremeStatus::NotExtreme { direction } => {
            let d = OperatorMatrix::new(direction, t.domain, t.codomain)?;
            convex_witness_approx(t, &t.add(&d)?, &t.sub(&d)?, eps)
        }
        ExtremeStatus::Extreme if t.domain.is_linf() && t.codomain.is_linf() => linf_extreme_approx(t, eps),
        ExtremeStatus::Extreme if t.domain.is_l1() && t.codomain.is_l1() => l1_extreme_approx(t, eps),
        _ => Err(Error::Unsupported(format!(
            "no approximant construction for this operator on {} -> {}",
            t.domain, t.codomain
        ))),
    }
}
