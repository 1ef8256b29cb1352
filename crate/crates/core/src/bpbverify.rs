//! Sampling certificates for uniform ε-BPB approximation, Property (P)
//! witnesses, rigidity constants and pair sweeps.

use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

use itertools::Itertools;
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::approximants::auto_approx;
use crate::classify::{enumerate_extreme_linf3_l13, enumerate_isometries, is_isometry};
use crate::error::{Error, Result};
use crate::numeric::{orthonormal_complement, rank, sorted_svd};
use crate::operators::{
    attainment_set, attainment_set_at, hilbert_split, inclusion_delta, op_norm, restricted_norm,
    AttainmentKind, DeltaOutcome, OperatorMatrix,
};
use crate::spaces::{
    arc_length_constant, arc_length_constant_with_samples, enumerate_faces, ArcTable, Exponent, Point,
    SpaceSpec,
};
use crate::tol::{DEFAULT_RESOLUTION, TAU_EQ};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CertificateStatus {
    Certified,
    Falsified,
    Inconclusive,
}

/// The outcome of checking one `(T, A, eps)` triple on a finite sample.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BpbCertificate {
    pub status: CertificateStatus,
    pub eps: f64,
    /// `‖T − A‖`.
    pub distance: f64,
    pub delta_found: Option<f64>,
    pub resolution: usize,
    /// Largest `dist(z, M_A)` over sampled `z ∈ M_T(δ)`.
    pub worst_distance: Option<f64>,
    pub counterexample: Option<Point>,
}

impl BpbCertificate {
    pub fn is_certified(&self) -> bool {
        self.status == CertificateStatus::Certified
    }
}

fn unit_norm(t: &OperatorMatrix) -> Result<f64> {
    let v = op_norm(t)?.value;
    if (v - 1.0).abs() > TAU_EQ {
        return Err(Error::NormNotOne(v));
    }
    Ok(v)
}

fn check_eps(eps: f64) -> Result<()> {
    if eps > 0.0 && eps.is_finite() {
        Ok(())
    } else {
        Err(Error::BadEpsilon(eps))
    }
}

/// Checks `‖T − A‖ < eps` and, for the largest δ on the halving grid, that
/// every sampled `z` with `‖Tz‖ > 1 − δ` lies within `eps` of `M_A`.
pub fn verify_uniform_bpb(
    t: &OperatorMatrix,
    a: &OperatorMatrix,
    eps: f64,
    resolution: usize,
) -> Result<BpbCertificate> {
    check_eps(eps)?;
    if t.domain != a.domain || t.codomain != a.codomain {
        return Err(Error::MixedSpaces(t.domain, a.domain));
    }
    let norm = unit_norm(t)?;
    unit_norm(a)?;
    let distance = t.distance(a)?;
    let mut cert = BpbCertificate {
        status: CertificateStatus::Falsified,
        eps,
        distance,
        delta_found: None,
        resolution,
        worst_distance: None,
        counterexample: None,
    };
    if distance >= eps {
        return Ok(cert);
    }
    let m_a = attainment_set_at(a, resolution.max(DEFAULT_RESOLUTION))?;
    match inclusion_delta(t, norm, &m_a, eps, resolution)? {
        DeltaOutcome::Found {
            delta,
            worst_distance,
        } => {
            cert.status = CertificateStatus::Certified;
            cert.delta_found = Some(delta);
            cert.worst_distance = Some(worst_distance);
        }
        DeltaOutcome::Failure {
            counterexample,
            distance,
            ..
        } => {
            cert.worst_distance = Some(distance);
            cert.counterexample = Some(counterexample);
        }
    }
    Ok(cert)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum OnlyApproximation {
    /// Sampling evidence only: no perturbation was certified.
    NoCounterexampleFound { trials: usize },
    Counterexample {
        approximant: OperatorMatrix,
        certificate: BpbCertificate,
    },
}

fn gaussian_rows<R: Rng>(m: usize, n: usize, rng: &mut R) -> Vec<Vec<f64>> {
    (0..m)
        .map(|_| (0..n).map(|_| StandardNormal.sample(&mut *rng)).collect())
        .collect()
}

/// Seeded search for a norm-one `A ≠ T` with `‖T − A‖ < eps` that certifies
/// as a uniform eps-BPB approximation of `T`.
pub fn is_only_approximation(
    t: &OperatorMatrix,
    eps: f64,
    trials: usize,
    seed: u64,
    resolution: usize,
) -> Result<OnlyApproximation> {
    check_eps(eps)?;
    unit_norm(t)?;
    let trials = trials.max(1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut candidates = Vec::with_capacity(trials);
    for _ in 0..trials {
        let d = OperatorMatrix::new(gaussian_rows(t.m(), t.n(), &mut rng), t.domain, t.codomain)?;
        let dn = op_norm(&d)?.value;
        // ‖T − A‖ ≤ 2s < eps after renormalizing
        let s = eps * rng.random_range(0.05..1.0) / 3.0;
        let b = t.add(&d.scale(s / dn))?;
        let a = b.scale(1.0 / op_norm(&b)?.value);
        candidates.push(a);
    }
    let hit = candidates
        .par_iter()
        .map(|a| -> Result<Option<BpbCertificate>> {
            if a.approx_eq(t, 0.0) {
                return Ok(None);
            }
            let c = verify_uniform_bpb(t, a, eps, resolution)?;
            Ok(c.is_certified().then_some(c))
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .enumerate()
        .find_map(|(i, c)| c.map(|c| (i, c)));
    Ok(match hit {
        Some((i, certificate)) => OnlyApproximation::Counterexample {
            approximant: candidates[i].clone(),
            certificate,
        },
        None => OnlyApproximation::NoCounterexampleFound { trials },
    })
}

/// Whether every sampled point of `M_A` lies within `delta_ball` of `M_T`.
pub fn check_ball_inclusion(
    t: &OperatorMatrix,
    a: &OperatorMatrix,
    delta_ball: f64,
    resolution: usize,
) -> Result<bool> {
    unit_norm(t)?;
    unit_norm(a)?;
    let m_t = attainment_set(t)?;
    let m_a = attainment_set(a)?;
    Ok(m_a
        .sample_points(resolution)?
        .iter()
        .all(|z| m_t.distance_coords(z) < delta_ball))
}

/// Rigidity constants of a polyhedral `ℓpⁿ`: the separation between distinct
/// isometries and `r₀`, half the least distance from a facet center to a
/// face not containing it.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PolyhedralEpsilon0 {
    pub space: SpaceSpec,
    pub separation: f64,
    pub r0: f64,
    pub eps0: f64,
}

fn facet_radius(s: SpaceSpec) -> Result<Vec<(Vec<f64>, f64)>> {
    let faces = enumerate_faces(s)?;
    Ok(faces
        .iter()
        .filter(|f| f.is_facet())
        .map(|facet| {
            let x = facet.relative_interior_point().coords;
            let r = faces
                .iter()
                .filter(|g| !g.contains_point(&x, 1e-12))
                .map(|g| g.distance(&x))
                .fold(f64::INFINITY, f64::min);
            (x, r / 2.0)
        })
        .collect())
}

pub fn polyhedral_epsilon0(s: SpaceSpec) -> Result<PolyhedralEpsilon0> {
    if !s.is_polyhedral() {
        return Err(Error::Unsupported(format!("{s} is not polyhedral")));
    }
    if s.n > 4 {
        return Err(Error::Unsupported("isometry separation is sized for n ≤ 4".into()));
    }
    let id = OperatorMatrix::identity(s);
    // ‖U − V‖ = ‖I − U⁻¹V‖ for isometries, so distances from I suffice
    let separation = enumerate_isometries(s)?
        .iter()
        .filter(|v| !v.approx_eq(&id, 0.0))
        .map(|v| id.distance(v))
        .collect::<Result<Vec<f64>>>()?
        .into_iter()
        .fold(f64::INFINITY, f64::min);
    let r0 = facet_radius(s)?
        .into_iter()
        .map(|(_, r)| r)
        .fold(f64::INFINITY, f64::min);
    Ok(PolyhedralEpsilon0 {
        space: s,
        separation,
        r0,
        eps0: separation.min(r0),
    })
}

/// `ε₀ = min{2^{(p−1)/p}, δ₁}` for the isometries of `ℓp²`, with `δ₁` the
/// arc-length constant at `L / (2(16p − 9))`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Epsilon0 {
    pub p: u32,
    pub separation: f64,
    pub arc_length: f64,
    pub arc: f64,
    pub delta1: f64,
    pub eps0: f64,
}

fn lp2_exponent(p: u32) -> Result<Exponent> {
    if p <= 2 {
        return Err(Error::BadExponent(format!("p = {p} must be an integer above 2")));
    }
    Exponent::integer(p)
}

fn epsilon0_from(p: u32, delta1: impl Fn(Exponent, f64) -> Result<f64>) -> Result<Epsilon0> {
    let e = lp2_exponent(p)?;
    let arc_length = crate::spaces::arc_length_total(e)?;
    let arc = arc_length / (2.0 * (16 * p - 9) as f64);
    let delta1 = delta1(e, arc)?;
    let separation = 2f64.powf((p as f64 - 1.0) / p as f64);
    Ok(Epsilon0 {
        p,
        separation,
        arc_length,
        arc,
        delta1,
        eps0: separation.min(delta1),
    })
}

pub fn epsilon0_lp2(p: u32) -> Result<Epsilon0> {
    static CACHE: OnceLock<Mutex<HashMap<u32, Epsilon0>>> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    if let Some(v) = cache.lock().expect("cache lock").get(&p) {
        return Ok(*v);
    }
    let v = epsilon0_from(p, arc_length_constant)?;
    cache.lock().expect("cache lock").insert(p, v);
    Ok(v)
}

/// `epsilon0_lp2` with a fixed arc-table size.
pub fn epsilon0_lp2_with_samples(p: u32, samples: usize) -> Result<Epsilon0> {
    epsilon0_from(p, |e, arc| arc_length_constant_with_samples(e, arc, samples))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WitnessStrategy {
    Facet,
    Arc,
    Orthocomplement,
}

/// A unit `x_A` whose open `r₀`-ball misses `M_A`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PropertyPWitness {
    pub operator: OperatorMatrix,
    pub x_a: Point,
    pub r0: f64,
    pub strategy: WitnessStrategy,
    /// `|M_A|` when it is finite.
    pub attainment_points: Option<usize>,
}

pub fn property_p_witness(a: &OperatorMatrix) -> Result<PropertyPWitness> {
    if a.domain != a.codomain {
        return Err(Error::WrongSpaces(format!(
            "Property (P) concerns operators on one space, got {} -> {}",
            a.domain, a.codomain
        )));
    }
    unit_norm(a)?;
    let s = a.domain;
    let supported = s.is_polyhedral() || s.is_hilbert() || (s.n == 2 && s.p.as_integer().is_some_and(|p| p > 2));
    if !supported {
        return Err(Error::Unsupported(format!("no Property (P) strategy for {s}")));
    }
    if is_isometry(a)? {
        return Err(Error::IsIsometry);
    }
    let m_a = attainment_set(a)?;
    let (x, r0, strategy) = if s.is_polyhedral() {
        let (x, r0) = facet_radius(s)?
            .into_iter()
            .find(|(x, _)| m_a.distance_coords(x) > TAU_EQ)
            .ok_or_else(|| Error::InvariantViolated("every facet attains the norm".into()))?;
        (x, r0, WitnessStrategy::Facet)
    } else if s.is_hilbert() {
        let basis = match &m_a.kind {
            AttainmentKind::Subspace { basis, .. } => basis.clone(),
            _ => return Err(Error::InvariantViolated("Hilbert attainment set is not a subspace".into())),
        };
        let x = orthonormal_complement(&basis, s.n)
            .into_iter()
            .next()
            .ok_or(Error::IsIsometry)?;
        (x, 1.0, WitnessStrategy::Orthocomplement)
    } else {
        let p = s.p.as_integer().expect("checked above");
        let table = ArcTable::shared(s.p, 1 << 16)?;
        let pieces = (16 * p - 9) as usize;
        let step = table.total() / pieces as f64;
        let pts = m_a.points().ok_or_else(|| Error::InvariantViolated("expected isolated attainment points".into()))?;
        let mut used = vec![false; pieces];
        for q in &pts {
            let k = (table.arc_position([q.coords[0], q.coords[1]]) / step).floor() as usize;
            used[k.min(pieces - 1)] = true;
        }
        let k = used.iter().position(|u| !u).ok_or_else(|| {
            Error::InvariantViolated(format!("{} attainment points fill every arc", pts.len()))
        })?;
        let z = table.point_at((k as f64 + 0.5) * step);
        let r0 = arc_length_constant(s.p, step / 2.0)?;
        (z.to_vec(), r0, WitnessStrategy::Arc)
    };
    let gap = m_a.distance_coords(&x);
    if gap < r0 - 1e-9 {
        return Err(Error::InvariantViolated(format!(
            "witness at distance {gap} from M_A, below r0 = {r0}"
        )));
    }
    Ok(PropertyPWitness {
        operator: a.clone(),
        x_a: Point::new(s, x)?,
        r0,
        strategy,
        attainment_points: m_a.points().map(|p| p.len()),
    })
}

/// 16 points on the quarter circle `ε₁² + ε₂² = 2.25 eps²`, both positive.
pub fn boundary_grid(eps: f64) -> Vec<(f64, f64)> {
    (0..16)
        .map(|k| {
            let a = (k as f64 + 0.5) * std::f64::consts::FRAC_PI_2 / 16.0;
            (1.5 * eps * a.cos(), 1.5 * eps * a.sin())
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HilbertChecks {
    pub dim_h0: usize,
    pub dim_h: usize,
    /// `H₀⊥ ∩ H = {0}` and `H⊥ ∩ H₀ = {0}`.
    pub intersections_trivial: bool,
    pub dims_equal: bool,
    /// For each grid point, `‖(T − A)|H₀‖ < ε₁` or `‖(T − A)|H₀⊥‖ < ε₂`.
    pub disjunction_holds: bool,
    pub inclusion: BpbCertificate,
}

impl HilbertChecks {
    pub fn all_pass(&self) -> bool {
        self.intersections_trivial && self.dims_equal && self.disjunction_holds && self.inclusion.is_certified()
    }
}

fn trivially_intersecting(a: &[Vec<f64>], b: &[Vec<f64>], n: usize) -> bool {
    if a.is_empty() || b.is_empty() {
        return true;
    }
    let cols: Vec<&Vec<f64>> = a.iter().chain(b).collect();
    let m = DMatrix::from_fn(n, cols.len(), |i, j| cols[j][i]);
    rank(&m, 1e-9) == cols.len()
}

pub fn hilbert_necessary_checks(
    t: &OperatorMatrix,
    a: &OperatorMatrix,
    eps: f64,
    resolution: usize,
) -> Result<HilbertChecks> {
    hilbert_necessary_checks_on(t, a, eps, &boundary_grid(eps), resolution)
}

/// As `hilbert_necessary_checks` with a caller-supplied `(ε₁, ε₂)` grid.
pub fn hilbert_necessary_checks_on(
    t: &OperatorMatrix,
    a: &OperatorMatrix,
    eps: f64,
    grid: &[(f64, f64)],
    resolution: usize,
) -> Result<HilbertChecks> {
    for op in [t, a] {
        if !(op.domain.is_hilbert() && op.codomain.is_hilbert()) {
            return Err(Error::WrongSpaces(format!(
                "Hilbert checks need l2 spaces, got {} -> {}",
                op.domain, op.codomain
            )));
        }
    }
    let n = t.n();
    let st = hilbert_split(t)?;
    let sa = hilbert_split(a)?;
    let intersections_trivial =
        trivially_intersecting(&st.h0_perp, &sa.h0, n) && trivially_intersecting(&sa.h0_perp, &st.h0, n);
    let diff = t.sub(a)?;
    let on_h0 = restricted_norm(&diff, &st.h0)?;
    let on_perp = restricted_norm(&diff, &st.h0_perp)?;
    let disjunction_holds = grid.iter().all(|(e1, e2)| on_h0 < *e1 || on_perp < *e2);
    Ok(HilbertChecks {
        dim_h0: st.h0.len(),
        dim_h: sa.h0.len(),
        intersections_trivial,
        dims_equal: st.h0.len() == sa.h0.len(),
        disjunction_holds,
        inclusion: verify_uniform_bpb(t, a, eps, resolution)?,
    })
}

/// `|M_A| ≥ |M_T|` for a discrete `M_T`; an infinite `M_A` counts as larger.
pub fn attainment_cardinality_check(t: &OperatorMatrix, a: &OperatorMatrix) -> Result<bool> {
    let count = |op: &OperatorMatrix| -> Result<Option<usize>> {
        let m = attainment_set(op)?;
        Ok(match &m.kind {
            AttainmentKind::PointPairs(ps) => Some(ps.len()),
            AttainmentKind::FaceUnion(fs) if fs.iter().all(|f| f.is_vertex()) => Some(fs.len()),
            AttainmentKind::Subspace { basis, .. } if basis.len() == 1 => Some(2),
            _ => None,
        })
    };
    let mt = count(t)?.ok_or(Error::NotDiscrete)?;
    Ok(count(a)?.is_none_or(|ma| ma >= mt))
}

/// Distance from `T` to the isometries of its space, when that is known.
fn isometry_distance(t: &OperatorMatrix) -> Result<f64> {
    if t.domain != t.codomain {
        return Ok(f64::INFINITY);
    }
    if t.domain.is_hilbert() {
        let svd = sorted_svd(&t.to_dmatrix());
        return Ok(svd.singular_values.iter().map(|s| (s - 1.0).abs()).fold(0.0, f64::max));
    }
    enumerate_isometries(t.domain)?
        .iter()
        .map(|v| t.distance(v))
        .collect::<Result<Vec<f64>>>()
        .map(|d| d.into_iter().fold(f64::INFINITY, f64::min))
}

/// A Gaussian matrix scaled to norm one, redrawn while within 10⁻³ of an
/// isometry.
pub fn random_non_isometry<R: Rng>(x: SpaceSpec, y: SpaceSpec, rng: &mut R) -> Result<OperatorMatrix> {
    loop {
        let g = OperatorMatrix::new(gaussian_rows(y.n, x.n, rng), x, y)?;
        let t = g.scale(1.0 / op_norm(&g)?.value);
        if isometry_distance(&t)? > 1e-3 {
            return Ok(t);
        }
    }
}

/// A non-isometry with one `±1` per row (ℓ∞ⁿ) or per column (ℓ₁ⁿ).
pub fn random_extreme_condition<R: Rng>(s: SpaceSpec, rng: &mut R) -> Result<OperatorMatrix> {
    if !s.is_polyhedral() {
        return Err(Error::WrongSpaces(format!("{s} is not polyhedral")));
    }
    loop {
        let mut rows = vec![vec![0.0; s.n]; s.n];
        for k in 0..s.n {
            let other = rng.random_range(0..s.n);
            let sign = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
            if s.is_linf() {
                rows[k][other] = sign;
            } else {
                rows[other][k] = sign;
            }
        }
        let t = OperatorMatrix::on(s, rows)?;
        if !is_isometry(&t)? {
            return Ok(t);
        }
    }
}

/// Every non-isometric extreme contraction of `ℓ∞ⁿ` or `ℓ₁ⁿ`.
pub fn enumerate_extreme_non_isometries(s: SpaceSpec) -> Result<Vec<OperatorMatrix>> {
    if !s.is_polyhedral() || s.n > 3 {
        return Err(Error::Unsupported(format!("no extreme enumeration for {s}")));
    }
    let n = s.n;
    let choices: Vec<(usize, f64)> = (0..n).flat_map(|j| [(j, 1.0), (j, -1.0)]).collect();
    let mut out = Vec::new();
    for pick in std::iter::repeat_n(choices.iter(), n).multi_cartesian_product() {
        let mut rows = vec![vec![0.0; n]; n];
        for (k, (j, sign)) in pick.into_iter().enumerate() {
            if s.is_linf() {
                rows[k][*j] = *sign;
            } else {
                rows[*j][k] = *sign;
            }
        }
        let t = OperatorMatrix::on(s, rows)?;
        if !is_isometry(&t)? {
            out.push(t);
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepFailure {
    pub operator: OperatorMatrix,
    pub eps: f64,
    pub reason: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub domain: SpaceSpec,
    pub codomain: SpaceSpec,
    pub eps_list: Vec<f64>,
    pub resolution: usize,
    pub operators: usize,
    pub skipped_isometries: usize,
    pub certified: usize,
    pub failures: Vec<SweepFailure>,
}

fn sweep_pair_supported(x: SpaceSpec, y: SpaceSpec) -> bool {
    let same = x == y && x.n <= 3 && (x.is_linf() || x.is_l1() || x.is_hilbert());
    let census = x == SpaceSpec::linf(3) && y == SpaceSpec::l1(3);
    same || census
}

/// Routes seeded non-isometries (plus the extreme enumerations where they
/// exist) to their constructors and certifies every output for each eps.
pub fn pair_property_sweep(
    x: SpaceSpec,
    y: SpaceSpec,
    eps_list: &[f64],
    trials: usize,
    seed: u64,
    resolution: usize,
) -> Result<SweepReport> {
    if !sweep_pair_supported(x, y) {
        return Err(Error::UnsupportedPair(format!("{x} -> {y}")));
    }
    for e in eps_list {
        check_eps(*e)?;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut ops: Vec<OperatorMatrix> = Vec::new();
    let mut skipped = 0;
    if x != y {
        ops.extend(enumerate_extreme_linf3_l13().into_iter().map(|m| m.matrix));
    } else if x.is_polyhedral() {
        ops.extend(enumerate_extreme_non_isometries(x)?);
    }
    for _ in 0..trials {
        let g = OperatorMatrix::new(gaussian_rows(y.n, x.n, &mut rng), x, y)?;
        let t = g.scale(1.0 / op_norm(&g)?.value);
        if x == y && isometry_distance(&t)? <= 1e-3 {
            skipped += 1;
            continue;
        }
        ops.push(t);
    }
    let jobs: Vec<(usize, f64)> = (0..ops.len()).cartesian_product(eps_list.iter().copied()).collect();
    let results: Vec<Option<SweepFailure>> = jobs
        .par_iter()
        .map(|(i, eps)| {
            let t = &ops[*i];
            let fail = |reason: String| {
                Some(SweepFailure {
                    operator: t.clone(),
                    eps: *eps,
                    reason,
                })
            };
            let report = match auto_approx(t, *eps) {
                Ok(r) => r,
                Err(e) => return fail(e.to_string()),
            };
            if !report.attainment_preserved {
                return fail("attainment set not preserved".into());
            }
            match verify_uniform_bpb(t, &report.approximant, *eps, resolution) {
                Ok(c) if c.is_certified() => None,
                Ok(c) => fail(format!("certificate status {:?}", c.status)),
                Err(e) => fail(e.to_string()),
            }
        })
        .collect();
    let failures: Vec<SweepFailure> = results.into_iter().flatten().collect();
    Ok(SweepReport {
        domain: x,
        codomain: y,
        eps_list: eps_list.to_vec(),
        resolution,
        operators: ops.len(),
        skipped_isometries: skipped,
        certified: jobs.len() - failures.len(),
        failures,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::approximants::{convex_witness_approx, linf_extreme_approx, tilted_projection_demo};

    fn op(s: SpaceSpec, rows: &[&[f64]]) -> OperatorMatrix {
        OperatorMatrix::on(s, rows.iter().map(|r| r.to_vec()).collect()).unwrap()
    }

    #[test]
    fn linf_pipeline_certifies() {
        let t = op(SpaceSpec::linf(2), &[&[1.0, 0.0], &[1.0, 0.0]]);
        let r = linf_extreme_approx(&t, 0.2).unwrap();
        let c = verify_uniform_bpb(&t, &r.approximant, 0.2, 4096).unwrap();
        assert!(c.is_certified());
        assert!(c.delta_found.unwrap() > 0.0);
        assert!(c.worst_distance.unwrap() < 0.2);
    }

    #[test]
    fn self_approximation() {
        let t = op(SpaceSpec::linf(2), &[&[1.0, 0.0], &[0.0, 0.0]]);
        assert!(verify_uniform_bpb(&t, &t, 0.1, 1024).unwrap().is_certified());
    }

    #[test]
    fn extreme_functional_is_rigid() {
        // f = e₁ on ℓ∞², seen as an operator into ℓ∞¹
        let x = SpaceSpec::linf(2);
        let y = SpaceSpec::linf(1);
        let f = OperatorMatrix::new(vec![vec![1.0, 0.0]], x, y).unwrap();
        let g = OperatorMatrix::new(vec![vec![0.95, 0.05]], x, y).unwrap();
        let c = verify_uniform_bpb(&f, &g, 0.2, 1024).unwrap();
        assert_eq!(c.status, CertificateStatus::Falsified);
        assert!(c.counterexample.is_some());
    }

    #[test]
    fn far_operator_is_falsified_without_sampling() {
        let s = SpaceSpec::l2(2);
        let t = OperatorMatrix::identity(s);
        let c = verify_uniform_bpb(&t, &t.scale(-1.0), 0.5, 64).unwrap();
        assert_eq!(c.status, CertificateStatus::Falsified);
        assert_eq!(c.counterexample, None);
        assert_eq!(verify_uniform_bpb(&t, &t.scale(0.5), 0.5, 64), Err(Error::NormNotOne(0.5)));
    }

    #[test]
    fn monotone_in_eps() {
        let t = op(SpaceSpec::linf(2), &[&[1.0, 0.0], &[0.5, 0.5]]);
        let a = op(SpaceSpec::linf(2), &[&[1.0, 0.0], &[0.45, 0.45]]);
        let mut last = 0.0;
        for eps in [0.1, 0.2, 0.4, 0.8] {
            let c = verify_uniform_bpb(&t, &a, eps, 1024).unwrap();
            assert!(c.is_certified());
            assert!(c.delta_found.unwrap() >= last);
            last = c.delta_found.unwrap();
        }
    }

    #[test]
    fn rigidity_on_linf2_identity() {
        let s = SpaceSpec::linf(2);
        let e0 = polyhedral_epsilon0(s).unwrap();
        assert_eq!(e0.separation, 2.0);
        assert_eq!(e0.r0, 0.5);
        let out = is_only_approximation(&OperatorMatrix::identity(s), 0.9 * e0.eps0, 40, 7, 1024).unwrap();
        assert_eq!(out, OnlyApproximation::NoCounterexampleFound { trials: 40 });
    }

    #[test]
    fn non_extreme_has_approximant() {
        let s = SpaceSpec::linf(2);
        let t = op(s, &[&[1.0, 0.0], &[0.0, 0.0]]);
        let t1 = op(s, &[&[1.0, 0.0], &[0.0, 0.5]]);
        let t2 = op(s, &[&[1.0, 0.0], &[0.0, -0.5]]);
        let r = convex_witness_approx(&t, &t1, &t2, 0.3).unwrap();
        assert!(verify_uniform_bpb(&t, &r.approximant, 0.3, 4096).unwrap().is_certified());
    }

    #[test]
    fn l1_epsilon0() {
        let e = polyhedral_epsilon0(SpaceSpec::l1(3)).unwrap();
        assert!((e.r0 - 1.0 / 3.0).abs() < 1e-12);
        let e = polyhedral_epsilon0(SpaceSpec::l1(2)).unwrap();
        assert!((e.r0 - 0.5).abs() < 1e-12);
    }

    #[test]
    fn ball_inclusion_tilted() {
        let (r, theta) = tilted_projection_demo(0.2).unwrap();
        let d = ((1.0 - theta.sin()).powi(2) + theta.cos().powi(2)).sqrt();
        assert!(check_ball_inclusion(&r.original, &r.approximant, 2.0 * d, 256).unwrap());
        assert!(!check_ball_inclusion(&r.original, &r.approximant, 1e-3, 256).unwrap());
    }

    #[test]
    fn witnesses() {
        let w = property_p_witness(&op(SpaceSpec::l2(2), &[&[1.0, 0.0], &[0.0, 0.5]])).unwrap();
        assert_eq!(w.r0, 1.0);
        assert!(w.x_a.coords[0].abs() < 1e-12 && (w.x_a.coords[1].abs() - 1.0).abs() < 1e-12);
        let w = property_p_witness(&op(SpaceSpec::linf(2), &[&[1.0, 0.0], &[1.0, 0.0]])).unwrap();
        assert_eq!(w.strategy, WitnessStrategy::Facet);
        assert_eq!(w.x_a.coords[0], 0.0);
        assert_eq!(w.r0, 0.5);
        assert_eq!(property_p_witness(&OperatorMatrix::identity(SpaceSpec::l1(2))), Err(Error::IsIsometry));
        let s = SpaceSpec::lp(3, 2);
        let w = property_p_witness(&op(s, &[&[1.0, 0.0], &[0.0, 0.5]])).unwrap();
        assert_eq!(w.strategy, WitnessStrategy::Arc);
        assert!(w.attainment_points.unwrap() <= 38);
    }

    #[test]
    fn hilbert_checks_detect_orthogonal_sets() {
        let s = SpaceSpec::l2(2);
        let t = op(s, &[&[1.0, 0.0], &[0.0, 0.5]]);
        let a = op(s, &[&[0.5, 0.0], &[0.0, 1.0]]);
        let c = hilbert_necessary_checks(&t, &a, 0.6, 256).unwrap();
        assert!(!c.intersections_trivial);
        assert!(!c.all_pass());
    }

    #[test]
    fn cardinality() {
        let c = 2f64.powf(-0.75);
        let t = op(SpaceSpec::lp(4, 2), &[&[c, c], &[c, -c]]);
        assert!(attainment_cardinality_check(&t, &t).unwrap());
        let h = OperatorMatrix::identity(SpaceSpec::l2(2));
        assert_eq!(attainment_cardinality_check(&h, &h), Err(Error::NotDiscrete));
    }

    #[test]
    fn epsilon0_l3() {
        let e = epsilon0_lp2(3).unwrap();
        assert!((e.separation - 2f64.powf(2.0 / 3.0)).abs() < 1e-15);
        assert!(e.delta1 > 0.0 && e.eps0 <= e.separation);
        assert!(matches!(epsilon0_lp2(2), Err(Error::BadExponent(_))));
    }

    #[test]
    fn small_sweep() {
        let r = pair_property_sweep(SpaceSpec::linf(2), SpaceSpec::linf(2), &[0.2], 6, 3, 1024).unwrap();
        assert!(r.failures.is_empty(), "{:?}", r.failures);
        assert!(matches!(
            pair_property_sweep(SpaceSpec::lp(3, 2), SpaceSpec::lp(3, 2), &[0.2], 1, 0, 64),
            Err(Error::UnsupportedPair(..))
        ));
    }
}
