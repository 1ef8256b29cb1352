use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::norm::scan_circle;
use super::{op_norm, OperatorMatrix};
use crate::error::{Error, Result};
use crate::numeric::{orthonormal_complement, sorted_svd};
use crate::sampling::sphere_samples;
use crate::spaces::{distance_to_subspace, distance_to_subspace_sphere, enumerate_faces, is_smooth_point, Face, Point, PointSet, SpaceSpec};
use crate::tol::{DEFAULT_RESOLUTION, TAU_DEDUP, TAU_EQ, TAU_GAP};

/// The norm attainment set `M_T = {x ∈ S_X : ‖Tx‖ = ‖T‖}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(into = "RawSet", try_from = "RawSet")]
pub struct AttainmentSet {
    pub space: SpaceSpec,
    pub norm: f64,
    pub kind: AttainmentKind,
}

#[derive(Clone, Debug, PartialEq)]
pub enum AttainmentKind {
    /// Union of the listed faces; only maximal faces are kept.
    FaceUnion(Vec<Face>),
    /// Finitely many points, closed under negation.
    PointPairs(Vec<Vec<f64>>),
    /// Unit sphere of a subspace of a Hilbert domain, with an orthonormal
    /// basis and the full list of singular values that decided it.
    Subspace {
        basis: Vec<Vec<f64>>,
        singular_values: Vec<f64>,
        gap_threshold: f64,
    },
    /// Every unit vector attains the norm (a multiple of an isometry).
    WholeSphere,
}

#[derive(Serialize, Deserialize)]
struct RawSet {
    space: SpaceSpec,
    norm: f64,
    #[serde(flatten)]
    kind: RawKind,
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "snake_case")]
enum RawKind {
    FaceUnion {
        faces: Vec<String>,
    },
    PointPairs {
        points: Vec<Vec<f64>>,
    },
    Subspace {
        basis: Vec<Vec<f64>>,
        singular_values: Vec<f64>,
        gap_threshold: f64,
    },
    WholeSphere,
}

impl From<AttainmentSet> for RawSet {
    fn from(a: AttainmentSet) -> Self {
        let kind = match a.kind {
            AttainmentKind::FaceUnion(fs) => RawKind::FaceUnion {
                faces: fs.iter().map(|f| f.pattern_string()).collect(),
            },
            AttainmentKind::PointPairs(points) => RawKind::PointPairs { points },
            AttainmentKind::Subspace {
                basis,
                singular_values,
                gap_threshold,
            } => RawKind::Subspace {
                basis,
                singular_values,
                gap_threshold,
            },
            AttainmentKind::WholeSphere => RawKind::WholeSphere,
        };
        RawSet {
            space: a.space,
            norm: a.norm,
            kind,
        }
    }
}

impl TryFrom<RawSet> for AttainmentSet {
    type Error = Error;

    fn try_from(r: RawSet) -> Result<Self> {
        let kind = match r.kind {
            RawKind::FaceUnion { faces } => AttainmentKind::FaceUnion(
                faces
                    .iter()
                    .map(|s| Face::parse(r.space, s))
                    .collect::<Result<Vec<_>>>()?,
            ),
            RawKind::PointPairs { points } => {
                for p in &points {
                    r.space.check_len("attainment point", p)?;
                }
                AttainmentKind::PointPairs(points)
            }
            RawKind::Subspace {
                basis,
                singular_values,
                gap_threshold,
            } => AttainmentKind::Subspace {
                basis,
                singular_values,
                gap_threshold,
            },
            RawKind::WholeSphere => AttainmentKind::WholeSphere,
        };
        Ok(AttainmentSet {
            space: r.space,
            norm: r.norm,
            kind,
        })
    }
}

impl AttainmentSet {
    pub fn variant_name(&self) -> &'static str {
        match self.kind {
            AttainmentKind::FaceUnion(_) => "face_union",
            AttainmentKind::PointPairs(_) => "point_pairs",
            AttainmentKind::Subspace { .. } => "subspace",
            AttainmentKind::WholeSphere => "whole_sphere",
        }
    }

    pub fn faces(&self) -> Option<&[Face]> {
        match &self.kind {
            AttainmentKind::FaceUnion(f) => Some(f),
            _ => None,
        }
    }

    pub fn points(&self) -> Option<Vec<Point>> {
        match &self.kind {
            AttainmentKind::PointPairs(ps) => Some(
                ps.iter()
                    .map(|c| Point {
                        coords: c.clone(),
                        space: self.space,
                    })
                    .collect(),
            ),
            _ => None,
        }
    }

    /// Number of `±x` pairs when the set is finite.
    pub fn pair_count(&self) -> Option<usize> {
        match &self.kind {
            AttainmentKind::PointPairs(ps) => Some(ps.len() / 2),
            AttainmentKind::FaceUnion(fs) if fs.iter().all(|f| f.is_vertex()) => Some(fs.len() / 2),
            _ => None,
        }
    }

    /// Dimension of the attaining subspace, treating the whole sphere of ℓ₂ⁿ
    /// as dimension n.
    pub fn subspace_dim(&self) -> Option<usize> {
        match &self.kind {
            AttainmentKind::Subspace { basis, .. } => Some(basis.len()),
            AttainmentKind::WholeSphere if self.space.is_hilbert() => Some(self.space.n),
            _ => None,
        }
    }

    pub fn is_whole_sphere(&self) -> bool {
        match &self.kind {
            AttainmentKind::WholeSphere => true,
            AttainmentKind::Subspace { basis, .. } => basis.len() == self.space.n,
            _ => false,
        }
    }

    /// Distance from raw coordinates, in the set's space.
    pub fn distance_coords(&self, x: &[f64]) -> f64 {
        match &self.kind {
            AttainmentKind::FaceUnion(fs) => fs.iter().map(|f| f.distance(x)).fold(f64::INFINITY, f64::min),
            AttainmentKind::PointPairs(ps) => ps
                .iter()
                .map(|p| self.space.dist(x, p))
                .fold(f64::INFINITY, f64::min),
            AttainmentKind::Subspace { basis, .. } => distance_to_subspace_sphere(x, basis),
            AttainmentKind::WholeSphere => {
                let r = self.space.norm(x);
                if r == 0.0 {
                    1.0
                } else {
                    (r - 1.0).abs()
                }
            }
        }
    }

    /// Unit vectors in the set: face grids, the listed points, or a sample of
    /// the subspace sphere.
    pub fn sample_points(&self, resolution: usize) -> Result<Vec<Vec<f64>>> {
        Ok(match &self.kind {
            AttainmentKind::FaceUnion(fs) => {
                let per_face = (resolution / fs.len().max(1)).max(9);
                let mut out = Vec::new();
                for f in fs {
                    out.extend(face_grid(f, per_face));
                }
                out
            }
            AttainmentKind::PointPairs(ps) => ps.clone(),
            AttainmentKind::Subspace { basis, .. } => {
                let k = basis.len();
                let local = sphere_samples(SpaceSpec::l2(k), resolution)?;
                local
                    .iter()
                    .map(|c| {
                        let mut v = vec![0.0; self.space.n];
                        for (ci, b) in c.iter().zip(basis) {
                            for (vi, bi) in v.iter_mut().zip(b) {
                                *vi += ci * bi;
                            }
                        }
                        v
                    })
                    .collect()
            }
            AttainmentKind::WholeSphere => sphere_samples(self.space, resolution)?,
        })
    }

    /// Whether two attainment sets describe the same subset of the sphere.
    pub fn same_set(&self, other: &AttainmentSet) -> bool {
        if self.space != other.space {
            return false;
        }
        if self.is_whole_sphere() || other.is_whole_sphere() {
            return self.is_whole_sphere() && other.is_whole_sphere();
        }
        match (&self.kind, &other.kind) {
            (AttainmentKind::FaceUnion(a), AttainmentKind::FaceUnion(b)) => {
                let mut pa: Vec<String> = a.iter().map(|f| f.pattern_string()).collect();
                let mut pb: Vec<String> = b.iter().map(|f| f.pattern_string()).collect();
                pa.sort();
                pb.sort();
                pa == pb
            }
            (AttainmentKind::PointPairs(a), AttainmentKind::PointPairs(b)) => {
                let covered = |xs: &[Vec<f64>], ys: &[Vec<f64>]| {
                    xs.iter()
                        .all(|x| ys.iter().any(|y| self.space.dist(x, y) < 1e-6))
                };
                a.len() == b.len() && covered(a, b) && covered(b, a)
            }
            (AttainmentKind::Subspace { basis: a, .. }, AttainmentKind::Subspace { basis: b, .. }) => {
                a.len() == b.len() && a.iter().all(|v| distance_to_subspace(v, b) < 1e-6)
            }
            _ => false,
        }
    }
}

impl PointSet for AttainmentSet {
    fn distance_from(&self, x: &Point) -> Result<f64> {
        if x.space != self.space {
            return Err(Error::MixedSpaces(x.space, self.space));
        }
        Ok(self.distance_coords(&x.coords))
    }
}

/// Points of a face on a grid of roughly `count` points, vertices included.
fn face_grid(f: &Face, count: usize) -> Vec<Vec<f64>> {
    let d = f.dim();
    if d == 0 {
        return f.vertices();
    }
    let n = f.space.n;
    if f.space.is_linf() {
        let free: Vec<usize> = (0..n).filter(|i| f.pattern[*i] == 0).collect();
        let mut k = (count as f64).powf(1.0 / d as f64).floor().max(3.0) as usize;
        if k % 2 == 0 {
            k += 1;
        }
        let total = k.pow(d as u32);
        (0..total)
            .map(|mut idx| {
                let mut v: Vec<f64> = f.pattern.iter().map(|s| *s as f64).collect();
                for i in &free {
                    v[*i] = -1.0 + 2.0 * (idx % k) as f64 / (k - 1) as f64;
                    idx /= k;
                }
                v
            })
            .collect()
    } else {
        let verts = f.vertices();
        let m = verts.len();
        let mut steps = 2;
        while binom(steps + 1 + m - 1, m - 1) <= count {
            steps += 1;
        }
        let mut out = Vec::new();
        let mut w = vec![0usize; m];
        simplex_points(m, steps, 0, &mut w, &mut |w| {
            let mut v = vec![0.0; n];
            for (wi, vert) in w.iter().zip(&verts) {
                for (a, b) in v.iter_mut().zip(vert) {
                    *a += *wi as f64 / steps as f64 * b;
                }
            }
            out.push(v);
        });
        out
    }
}

fn binom(n: usize, k: usize) -> usize {
    (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

fn simplex_points(m: usize, left: usize, at: usize, w: &mut Vec<usize>, emit: &mut dyn FnMut(&[usize])) {
    if at == m - 1 {
        w[at] = left;
        emit(w);
        return;
    }
    for v in 0..=left {
        w[at] = v;
        simplex_points(m, left - v, at + 1, w, emit);
    }
}

fn attains(value: f64, norm: f64) -> bool {
    value >= norm * (1.0 - TAU_EQ)
}

fn face_union(t: &OperatorMatrix, norm: f64) -> Result<Vec<Face>> {
    let faces = enumerate_faces(t.domain)?;
    let hits: Vec<Face> = faces
        .into_iter()
        .filter(|f| {
            f.vertices().iter().all(|v| attains(t.image_norm(v), norm))
                && attains(t.image_norm(&f.relative_interior_point().coords), norm)
        })
        .collect();
    let maximal = hits
        .iter()
        .filter(|f| !hits.iter().any(|g| g != *f && g.contains_face(f)))
        .cloned()
        .collect();
    Ok(maximal)
}

fn dedup_pairs(space: SpaceSpec, pts: Vec<Vec<f64>>) -> Vec<Vec<f64>> {
    let mut out: Vec<Vec<f64>> = Vec::new();
    for p in pts {
        for cand in [p.clone(), p.iter().map(|v| -v).collect()] {
            if !out.iter().any(|q| space.dist(q, &cand) < TAU_DEDUP) {
                out.push(cand);
            }
        }
    }
    out
}

/// Right singular data of a Hilbert-space operator.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HilbertSplit {
    pub norm: f64,
    /// Orthonormal basis of `H₀`, the span of `M_T`.
    pub h0: Vec<Vec<f64>>,
    /// Orthonormal basis of `H₀⊥`.
    pub h0_perp: Vec<Vec<f64>>,
    pub singular_values: Vec<f64>,
}

/// `H₀` and its orthocomplement from the SVD: right singular vectors with
/// `σ ≥ σ_max (1 − τ_gap)`.
pub fn hilbert_split(t: &OperatorMatrix) -> Result<HilbertSplit> {
    if !(t.domain.is_hilbert() && t.codomain.is_hilbert()) {
        return Err(Error::WrongSpaces(format!(
            "Hilbert split needs l2 spaces, got {} -> {}",
            t.domain, t.codomain
        )));
    }
    if t.is_zero() {
        return Err(Error::ZeroOperator);
    }
    let svd = sorted_svd(&t.to_dmatrix());
    let top = svd.singular_values[0];
    let h0: Vec<Vec<f64>> = svd
        .singular_values
        .iter()
        .zip(&svd.right)
        .filter(|(s, _)| **s >= top * (1.0 - TAU_GAP))
        .map(|(_, v)| v.clone())
        .collect();
    let h0_perp = orthonormal_complement(&h0, t.n());
    let mut singular_values = svd.singular_values;
    singular_values.resize(t.n(), 0.0);
    Ok(HilbertSplit {
        norm: top,
        h0,
        h0_perp,
        singular_values,
    })
}

/// Computes `M_T` in its exact representation for the domain.
pub fn attainment_set(t: &OperatorMatrix) -> Result<AttainmentSet> {
    attainment_set_at(t, DEFAULT_RESOLUTION)
}

/// `attainment_set` with an explicit grid size for two-dimensional domains.
pub fn attainment_set_at(t: &OperatorMatrix, resolution: usize) -> Result<AttainmentSet> {
    if t.is_zero() {
        return Err(Error::ZeroOperator);
    }
    let dom = t.domain;
    let wrap = |norm: f64, kind| AttainmentSet {
        space: dom,
        norm,
        kind,
    };
    if dom.is_polyhedral() {
        let norm = op_norm(t)?.value;
        return Ok(wrap(norm, AttainmentKind::FaceUnion(face_union(t, norm)?)));
    }
    if dom.is_hilbert() && t.codomain.is_hilbert() {
        let split = hilbert_split(t)?;
        return Ok(wrap(
            split.norm,
            AttainmentKind::Subspace {
                basis: split.h0,
                singular_values: split.singular_values,
                gap_threshold: TAU_GAP,
            },
        ));
    }
    if dom.n == 1 {
        return Ok(wrap(t.image_norm(&[1.0]), AttainmentKind::WholeSphere));
    }
    if t.m() == 1 {
        let w = op_norm(t)?;
        let pts = dedup_pairs(dom, vec![w.witness.coords]);
        return Ok(wrap(w.value, AttainmentKind::PointPairs(pts)));
    }
    if dom.n == 2 {
        let (vals, maxima) = scan_circle(dom, &[1.0, 0.0], &[0.0, 1.0], |x| t.image_norm(x), resolution);
        let norm = maxima.iter().map(|m| m.value).fold(f64::NEG_INFINITY, f64::max);
        let floor = vals.iter().cloned().fold(f64::INFINITY, f64::min);
        if attains(floor, norm) {
            return Ok(wrap(norm, AttainmentKind::WholeSphere));
        }
        let pts = maxima
            .into_iter()
            .filter(|m| attains(m.value, norm))
            .map(|m| m.x)
            .collect();
        return Ok(wrap(norm, AttainmentKind::PointPairs(dedup_pairs(dom, pts))));
    }
    Err(Error::Unsupported(format!(
        "attainment set from {dom} to {}",
        t.codomain
    )))
}

/// Sampled unit vectors `z` with `‖Tz‖ > ‖T‖ − δ`.
pub fn approx_attainment(t: &OperatorMatrix, delta: f64, resolution: usize) -> Result<Vec<Point>> {
    let norm = op_norm(t)?.value;
    let samples = sphere_samples(t.domain, resolution)?;
    Ok(samples
        .into_par_iter()
        .filter(|z| t.image_norm(z) > norm - delta)
        .map(|coords| Point {
            coords,
            space: t.domain,
        })
        .collect())
}

/// Outcome of the search for `δ(ε)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum DeltaOutcome {
    Found {
        delta: f64,
        /// Largest distance to the target set over sampled `z ∈ M_T(δ)`.
        worst_distance: f64,
    },
    Failure {
        counterexample: Point,
        value: f64,
        distance: f64,
    },
}

pub(crate) const DELTA_MIN_FACTOR: f64 = 1e-6;

/// Largest `δ = ‖T‖ 2^{-k}` (k ≥ 1, δ ≥ 10⁻⁶‖T‖) with every sampled
/// `z ∈ M_T(δ)` within `eps` of `target`.
pub(crate) fn inclusion_delta(
    t: &OperatorMatrix,
    norm: f64,
    target: &AttainmentSet,
    eps: f64,
    resolution: usize,
) -> Result<DeltaOutcome> {
    let samples = sphere_samples(t.domain, resolution)?;
    let scored: Vec<(f64, f64)> = samples
        .par_iter()
        .map(|z| (t.image_norm(z), target.distance_coords(z)))
        .collect();
    let mut worst_bad: Option<usize> = None;
    for (i, (v, d)) in scored.iter().enumerate() {
        if *d >= eps && worst_bad.is_none_or(|w| *v > scored[w].0) {
            worst_bad = Some(i);
        }
    }
    let gap = worst_bad.map_or(f64::INFINITY, |w| norm - scored[w].0);
    let delta_min = DELTA_MIN_FACTOR * norm;
    let mut delta = norm / 2.0;
    while delta >= delta_min {
        if delta <= gap {
            let worst_distance = scored
                .iter()
                .filter(|(v, _)| *v > norm - delta)
                .map(|(_, d)| *d)
                .fold(0.0, f64::max);
            return Ok(DeltaOutcome::Found {
                delta,
                worst_distance,
            });
        }
        delta /= 2.0;
    }
    let w = worst_bad.expect("a failing delta implies a bad sample");
    Ok(DeltaOutcome::Failure {
        counterexample: Point {
            coords: samples[w].clone(),
            space: t.domain,
        },
        value: scored[w].0,
        distance: scored[w].1,
    })
}

/// Certifies `M_T(δ) ⊆ ⋃_{x ∈ M_T} B(x, eps)` on a sample, for the largest
/// grid value of δ.
pub fn delta_for_epsilon(t: &OperatorMatrix, eps: f64, resolution: usize) -> Result<DeltaOutcome> {
    if eps <= 0.0 || !eps.is_finite() {
        return Err(Error::BadEpsilon(eps));
    }
    let m = attainment_set_at(t, resolution.max(DEFAULT_RESOLUTION))?;
    inclusion_delta(t, m.norm, &m, eps, resolution)
}

/// Whether `M_T = {±x₀}` with `Tx₀` a smooth point of the codomain.
pub fn is_smooth_operator(t: &OperatorMatrix) -> Result<bool> {
    let m = attainment_set(t)?;
    let x0 = match &m.kind {
        AttainmentKind::PointPairs(ps) if ps.len() == 2 => ps[0].clone(),
        AttainmentKind::Subspace { basis, .. } if basis.len() == 1 && t.n() > 1 => basis[0].clone(),
        AttainmentKind::FaceUnion(fs) if fs.len() == 2 && fs.iter().all(|f| f.is_vertex()) => {
            fs[0].relative_interior_point().coords
        }
        _ => return Ok(false),
    };
    let image = Point {
        coords: t.apply(&x0),
        space: t.codomain,
    };
    is_smooth_point(&image)
}
