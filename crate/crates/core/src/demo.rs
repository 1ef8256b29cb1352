//! The acceptance suite: ten end-to-end checks of the library against known
//! closed-form values, each reported as pass/fail with a short detail line.

use std::time::Instant;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::approximants::{
    hilbert_rotate_approx, hilbert_rotate_approx_declared, l1_extreme_approx, linf3_l13_extreme_approx,
    linf_extreme_approx, sbpbp_witness, tilted_projection_demo, ApproximantReport,
};
use crate::bpbverify::{
    epsilon0_lp2, epsilon0_lp2_with_samples, hilbert_necessary_checks, is_only_approximation,
    polyhedral_epsilon0, property_p_witness, random_extreme_condition, random_non_isometry, verify_uniform_bpb,
    OnlyApproximation, WitnessStrategy,
};
use crate::classify::{enumerate_extreme_linf3_l13, enumerate_isometries, is_extreme_contraction, CensusOrbit};
use crate::error::Result;
use crate::operators::{attainment_set, hilbert_split, op_norm, restricted_norm, AttainmentSet, OperatorMatrix};
use crate::spaces::{sign_vectors, Point, SpaceSpec};
use crate::tol::DEFAULT_RESOLUTION;

/// Norm-one tolerance for constructed approximants.
pub const TOL_NORM: f64 = 1e-9;
/// Tolerance on closed-form operator norms and distances.
pub const TOL_CLOSED_FORM: f64 = 1e-8;
/// Per-coordinate tolerance on attainment points.
pub const TOL_POINT: f64 = 1e-6;
/// Agreement required of `ε₀` under a doubled arc table.
pub const TOL_EPS0_REFINE: f64 = 1e-4;
/// Tolerance on the tilted-projection distance `cos θ`.
pub const TOL_TILT: f64 = 1e-10;
/// The splitting threshold for `‖T‖_{H₀⊥}`.
pub const TOL_HILBERT_SPLIT: f64 = 1e-9;
/// Tolerance on the distance `√2` in the counterexample family.
pub const TOL_SQRT2: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CriterionReport {
    pub id: u8,
    pub name: String,
    pub passed: bool,
    pub detail: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub elapsed_ms: Option<u64>,
}

pub const CRITERIA: [(u8, &str); 10] = [
    (1, "extreme contraction census of L(linf3, l13)"),
    (2, "Clarkson attainment on l4^2 and l2^2"),
    (3, "isometry separation and epsilon0 on lp^2"),
    (4, "constructor contracts"),
    (5, "certificate engine end to end"),
    (6, "Hilbert preservation iff and the tilted projection"),
    (7, "rigidity of polyhedral isometries"),
    (8, "Property (P) witnesses"),
    (9, "strong BPB counterexample family"),
    (10, "Hilbert necessary conditions"),
];

type Check = std::result::Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> std::result::Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn lift<T>(r: Result<T>) -> std::result::Result<T, String> {
    r.map_err(|e| e.to_string())
}

pub fn run_criterion(id: u8, seed: u64) -> CriterionReport {
    let start = Instant::now();
    let outcome = match id {
        1 => census(),
        2 => clarkson(),
        3 => isometry_separation(),
        4 => constructor_contracts(seed).map(|(d, _)| d),
        5 => certificates(seed),
        6 => hilbert_iff(seed).map(|(d, _)| d),
        7 => rigidity(seed),
        8 => property_p(seed),
        9 => sbpbp(),
        10 => hilbert_necessary(seed),
        _ => Err(format!("no criterion {id}")),
    };
    let name = CRITERIA
        .iter()
        .find(|(k, _)| *k == id)
        .map_or("unknown", |(_, n)| n)
        .to_string();
    let (passed, detail) = match outcome {
        Ok(d) => (true, d),
        Err(d) => (false, d),
    };
    CriterionReport {
        id,
        name,
        passed,
        detail,
        elapsed_ms: Some(start.elapsed().as_millis() as u64),
    }
}

pub fn run_all(seed: u64) -> Vec<CriterionReport> {
    CRITERIA.iter().map(|(id, _)| run_criterion(*id, seed)).collect()
}

fn census() -> Check {
    let members = enumerate_extreme_linf3_l13();
    let rank_one = members.iter().filter(|m| m.orbit == CensusOrbit::RankOne).count();
    let block = members.len() - rank_one;
    ensure(members.len() == 90 && rank_one == 18 && block == 72, || {
        format!("sizes {} = {rank_one} + {block}", members.len())
    })?;
    let mut keys: Vec<Vec<i64>> = members
        .iter()
        .map(|m| m.matrix.rows.iter().flatten().map(|v| (v * 2.0).round() as i64).collect())
        .collect();
    keys.sort();
    keys.dedup();
    ensure(keys.len() == 90, || format!("only {} distinct members", keys.len()))?;
    for m in &members {
        let exact = sign_vectors(3)
            .iter()
            .map(|s| m.matrix.apply(s).iter().map(|v| v.abs()).sum::<f64>())
            .fold(0.0, f64::max);
        ensure(exact == 1.0, || format!("member norm {exact}"))?;
        ensure(lift(is_extreme_contraction(&m.matrix))?.is_extreme(), || {
            format!("LP rejects {:?}", m.matrix.rows)
        })?;
    }
    Ok("90 members, orbits 18 and 72, all norm 1 and LP-extreme".into())
}

fn clarkson() -> Check {
    let t = lift(OperatorMatrix::on(SpaceSpec::lp(4, 2), vec![vec![1.0, 1.0], vec![1.0, -1.0]]))?;
    let norm = lift(op_norm(&t))?.value;
    let expected = 2f64.powf(0.75);
    ensure((norm - expected).abs() <= TOL_CLOSED_FORM, || format!("‖T‖ = {norm}"))?;
    let m = lift(attainment_set(&t))?;
    let pts = m.points().unwrap_or_default();
    let c = 2f64.powf(-0.25);
    let targets = [[c, c], [-c, -c], [c, -c], [-c, c]];
    ensure(pts.len() == 4, || format!("{} attainment points", pts.len()))?;
    for tg in targets {
        ensure(
            pts.iter().any(|p| (p.coords[0] - tg[0]).abs() <= TOL_POINT && (p.coords[1] - tg[1]).abs() <= TOL_POINT),
            || format!("missing {tg:?}"),
        )?;
    }
    let h = lift(OperatorMatrix::on(SpaceSpec::l2(2), vec![vec![1.0, 1.0], vec![1.0, -1.0]]))?;
    let split = lift(hilbert_split(&h))?;
    let gap = split.singular_values[0] - split.singular_values[1];
    let mh = lift(attainment_set(&h))?;
    ensure(mh.is_whole_sphere() && gap.abs() < 1e-12, || {
        format!("l2 attainment {} with gap {gap}", mh.variant_name())
    })?;
    Ok(format!("‖T‖ = {norm:.12}, four points at ±2^(-1/4)(1,±1), l2 sphere"))
}

fn isometry_separation() -> Check {
    for p in [3u32, 4] {
        let isos = lift(enumerate_isometries(SpaceSpec::lp(p, 2)))?;
        ensure(isos.len() == 8, || format!("{} isometries for p = {p}", isos.len()))?;
        let sep = 2f64.powf((p as f64 - 1.0) / p as f64);
        for (i, a) in isos.iter().enumerate() {
            for b in &isos[i + 1..] {
                let d = lift(a.distance(b))?;
                ensure(
                    (d - sep).abs() <= TOL_CLOSED_FORM || (d - 2.0).abs() <= TOL_CLOSED_FORM,
                    || format!("p = {p}: isometry distance {d}"),
                )?;
            }
        }
    }
    let e = lift(epsilon0_lp2(3))?;
    let coarse = lift(epsilon0_lp2_with_samples(3, 1 << 15))?;
    let fine = lift(epsilon0_lp2_with_samples(3, 1 << 16))?;
    ensure(e.eps0 > 0.0, || "eps0 is not positive".into())?;
    ensure((coarse.eps0 - fine.eps0).abs() <= TOL_EPS0_REFINE, || {
        format!("eps0 moved from {} to {}", coarse.eps0, fine.eps0)
    })?;
    Ok(format!("8 isometries, distances in {{2^((p-1)/p), 2}}, eps0(3) = {:.6}", e.eps0))
}

fn face_patterns(m: &AttainmentSet) -> Vec<String> {
    let mut v: Vec<String> = m.faces().unwrap_or(&[]).iter().map(|f| f.pattern_string()).collect();
    v.sort();
    v
}

fn check_polyhedral_report(r: &ApproximantReport, exact_half: bool) -> std::result::Result<(), String> {
    let na = lift(op_norm(&r.approximant))?.value;
    ensure((na - 1.0).abs() <= TOL_NORM, || format!("‖A‖ = {na}"))?;
    if exact_half {
        ensure((r.distance - r.eps / 2.0).abs() <= TOL_NORM, || {
            format!("‖T − A‖ = {} for eps {}", r.distance, r.eps)
        })?;
    } else {
        ensure(r.distance < r.eps, || format!("‖T − A‖ = {}", r.distance))?;
    }
    let pt = face_patterns(&r.attainment_original);
    let pa = face_patterns(&r.attainment_approximant);
    ensure(!pt.is_empty() && pt == pa, || format!("faces {pt:?} vs {pa:?}"))
}

/// Reports from the census and from seeded extreme-condition matrices.
pub fn constructor_outputs(seed: u64) -> Result<Vec<ApproximantReport>> {
    let eps_cycle = [0.05, 0.1, 0.2, 0.4];
    let mut out = Vec::new();
    for (k, m) in enumerate_extreme_linf3_l13().iter().enumerate() {
        out.push(linf3_l13_extreme_approx(&m.matrix, eps_cycle[k % 4])?);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let spaces = [SpaceSpec::linf(2), SpaceSpec::linf(3), SpaceSpec::l1(2), SpaceSpec::l1(3)];
    for s in spaces {
        for k in 0..50 {
            let t = random_extreme_condition(s, &mut rng)?;
            let eps = eps_cycle[k % 4];
            out.push(if s.is_linf() { linf_extreme_approx(&t, eps)? } else { l1_extreme_approx(&t, eps)? });
        }
    }
    Ok(out)
}

fn constructor_contracts(seed: u64) -> std::result::Result<(String, Vec<ApproximantReport>), String> {
    let reports = lift(constructor_outputs(seed))?;
    for r in &reports {
        let linf_path = r.original.domain.is_linf() && r.original.codomain.is_linf();
        check_polyhedral_report(r, linf_path)?;
    }
    Ok((format!("{} constructor outputs meet their contracts", reports.len()), reports))
}

/// `U diag(σ) Vᵀ` with seeded orthogonal `U`, `V`.
pub fn hilbert_operator<R: Rng>(sigma: &[f64], rng: &mut R) -> Result<OperatorMatrix> {
    let n = sigma.len();
    let mut orth = || {
        let g = DMatrix::<f64>::from_fn(n, n, |_, _| StandardNormal.sample(&mut *rng));
        g.qr().q()
    };
    let u = orth();
    let v = orth();
    let m = &u * DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(sigma)) * v.transpose();
    OperatorMatrix::from_dmatrix(&m, SpaceSpec::l2(n), SpaceSpec::l2(n))
}

/// Fifty well-separated Hilbert cases on ℓ₂³ covering the shrink, rotation,
/// rank-one and isometry branches.
pub fn hilbert_cases(seed: u64) -> Result<Vec<(OperatorMatrix, f64)>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x4811);
    let eps_cycle = [0.05, 0.1, 0.2, 0.3];
    (0..50)
        .map(|k| {
            let sigma = match k % 5 {
                0 => vec![1.0, rng.random_range(0.0..0.8), rng.random_range(0.0..0.5)],
                1 => vec![1.0, 1.0, rng.random_range(0.05..0.8)],
                2 => vec![1.0, 1.0, 0.0],
                3 => vec![1.0, 0.0, 0.0],
                _ => vec![1.0, 1.0, 1.0],
            };
            Ok((hilbert_operator(&sigma, &mut rng)?, eps_cycle[k % 4]))
        })
        .collect()
}

fn certificates(seed: u64) -> Check {
    let (_, reports) = constructor_contracts(seed)?;
    let mut pairs: Vec<(OperatorMatrix, OperatorMatrix, f64)> = reports
        .into_iter()
        .map(|r| (r.original, r.approximant, r.eps))
        .collect();
    for (t, eps) in lift(hilbert_cases(seed))? {
        let r = lift(hilbert_rotate_approx(&t, eps))?;
        pairs.push((t, r.approximant, eps));
    }
    use rayon::prelude::*;
    let results: Vec<std::result::Result<f64, String>> = pairs
        .par_iter()
        .map(|(t, a, eps)| {
            let c = lift(verify_uniform_bpb(t, a, *eps, DEFAULT_RESOLUTION))?;
            let fine = lift(verify_uniform_bpb(t, a, *eps, 4 * DEFAULT_RESOLUTION))?;
            match (c.delta_found, fine.is_certified()) {
                (Some(d), true) if c.is_certified() && d > 0.0 => Ok(d),
                _ => Err(format!("not certified: {:?} with eps {eps}", t.rows)),
            }
        })
        .collect();
    let mut min_delta = f64::INFINITY;
    for r in results {
        min_delta = min_delta.min(r?);
    }
    Ok(format!("{} pairs certified at 4096 and 16384, least δ {min_delta:.3e}", pairs.len()))
}

/// Seeded ℓ₂³ operators for the iff check, including top singular values
/// that nearly coincide.
pub fn hilbert_iff_cases(seed: u64) -> Result<Vec<(OperatorMatrix, f64)>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x1ff);
    let exps = [1, 2, 3, 4, 6, 10, 12];
    let eps_cycle = [0.05, 0.1, 0.2];
    let mut out = Vec::new();
    for k in 0..100 {
        let t = match k % 5 {
            0 => random_non_isometry(SpaceSpec::l2(3), SpaceSpec::l2(3), &mut rng)?,
            1 => {
                let s2 = rng.random_range(0.0..0.9);
                hilbert_operator(&[1.0, s2, s2 * rng.random_range(0.0..1.0)], &mut rng)?
            }
            2 => {
                let s2 = 1.0 - 10f64.powi(-exps[(k / 5) % exps.len()]);
                hilbert_operator(&[1.0, s2, rng.random_range(0.0..0.5)], &mut rng)?
            }
            3 => hilbert_operator(&[1.0, 1.0, rng.random_range(0.0..0.9)], &mut rng)?,
            _ => hilbert_operator(&[1.0, 0.0, 0.0], &mut rng)?,
        };
        out.push((t, eps_cycle[k % 3]));
    }
    Ok(out)
}

type HilbertPair = (OperatorMatrix, OperatorMatrix, f64);

fn hilbert_iff(seed: u64) -> std::result::Result<(String, Vec<HilbertPair>), String> {
    let mut pairs = Vec::new();
    let mut declared_failures = 0;
    for (t, eps) in lift(hilbert_iff_cases(seed))? {
        let split = lift(hilbert_split(&t))?;
        let r = lift(restricted_norm(&t, &split.h0_perp))?;
        let auto = hilbert_rotate_approx(&t, eps);
        ensure(auto.is_ok() == (r < 1.0 - TOL_HILBERT_SPLIT), || {
            format!("split H0: restricted norm {r} but outcome {:?}", auto.as_ref().err())
        })?;
        // the declared variant with H0 = top singular direction only
        let v1 = split.h0[0].clone();
        let perp = crate::numeric::orthonormal_complement(std::slice::from_ref(&v1), 3);
        let r1 = lift(restricted_norm(&t, &perp))?;
        let declared = hilbert_rotate_approx_declared(&t, &[v1], eps);
        ensure(declared.is_ok() == (r1 < 1.0 - TOL_HILBERT_SPLIT), || {
            format!("declared H0: restricted norm {r1} but outcome {:?}", declared.as_ref().err())
        })?;
        if declared.is_err() {
            declared_failures += 1;
        }
        if let Ok(rep) = auto {
            pairs.push((t, rep.approximant, eps));
        }
    }
    for eps in [0.05, 0.2, 0.5] {
        let (rep, theta) = lift(tilted_projection_demo(eps))?;
        ensure((rep.distance - theta.cos()).abs() <= TOL_TILT, || {
            format!("‖T − A‖ = {} vs cos θ = {}", rep.distance, theta.cos())
        })?;
        let v = [theta.sin(), theta.cos()];
        let basis = match &rep.attainment_approximant.kind {
            crate::operators::AttainmentKind::Subspace { basis, .. } => basis.clone(),
            _ => return Err("tilted projection attainment is not a line".into()),
        };
        ensure(
            basis.len() == 1 && (basis[0][0] * v[0] + basis[0][1] * v[1]).abs() > 1.0 - 1e-12,
            || format!("M_A spanned by {basis:?}"),
        )?;
        pairs.push((rep.original, rep.approximant, eps));
    }
    Ok((
        format!(
            "iff holds on 100 operators ({declared_failures} obstructed declared splits), tilted projection exact"
        ),
        pairs,
    ))
}

fn rigidity(seed: u64) -> Check {
    let mut total = 0;
    for s in [SpaceSpec::linf(2), SpaceSpec::l1(2), SpaceSpec::linf(3)] {
        let e0 = lift(polyhedral_epsilon0(s))?;
        let eps = 0.9 * e0.eps0;
        for (k, t) in lift(enumerate_isometries(s))?.iter().enumerate() {
            let out = lift(is_only_approximation(t, eps, 200, seed.wrapping_add(k as u64), DEFAULT_RESOLUTION))?;
            ensure(matches!(out, OnlyApproximation::NoCounterexampleFound { .. }), || {
                format!("counterexample for isometry {:?} on {s}", t.rows)
            })?;
            total += 1;
        }
    }
    Ok(format!("{total} isometries, 200 trials each, no counterexample"))
}

fn property_p(seed: u64) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9);
    let mut max_points = 0;
    for s in [SpaceSpec::linf(3), SpaceSpec::l1(3), SpaceSpec::lp(3, 2), SpaceSpec::l2(3)] {
        for _ in 0..50 {
            let a = lift(random_non_isometry(s, s, &mut rng))?;
            let w = lift(property_p_witness(&a))?;
            if s.is_hilbert() {
                ensure(w.r0 == 1.0 && w.strategy == WitnessStrategy::Orthocomplement, || {
                    format!("Hilbert witness r0 = {}", w.r0)
                })?;
            }
            if s == SpaceSpec::lp(3, 2) {
                let count = w.attainment_points.unwrap_or(usize::MAX);
                ensure(count <= 38, || format!("{count} attainment points on l3^2"))?;
                max_points = max_points.max(count);
            }
        }
    }
    Ok(format!("200 witnesses, at most {max_points} attainment points on l3^2"))
}

fn sbpbp() -> Check {
    let x0 = lift(Point::new(SpaceSpec::l2(2), vec![1.0, 0.0]))?;
    for n in [10u64, 1_000, 1_000_000] {
        let w = lift(sbpbp_witness(&x0, n))?;
        ensure(w.image_norm >= 1.0 - 1.0 / n as f64 - 1e-15, || {
            format!("n = {n}: ‖A_n h0‖ = {}", w.image_norm)
        })?;
        ensure((w.distance - 2f64.sqrt()).abs() <= TOL_SQRT2, || {
            format!("n = {n}: dist = {}", w.distance)
        })?;
    }
    Ok("‖A_n h0‖ = 1 - 1/n and dist(h0, M_A) = √2 for n = 10, 10^3, 10^6".into())
}

fn hilbert_necessary(seed: u64) -> Check {
    let (_, pairs) = hilbert_iff(seed)?;
    use rayon::prelude::*;
    let results: Vec<std::result::Result<bool, String>> = pairs
        .par_iter()
        .map(|(t, a, eps)| {
            let c = lift(hilbert_necessary_checks(t, a, *eps, DEFAULT_RESOLUTION))?;
            if !c.inclusion.is_certified() {
                return Ok(false);
            }
            ensure(c.dims_equal && c.intersections_trivial && c.disjunction_holds, || {
                format!("checks fail for {:?}: {c:?}", t.rows)
            })?;
            Ok(true)
        })
        .collect();
    let mut certified = 0;
    for r in results {
        if r? {
            certified += 1;
        }
    }
    ensure(certified >= pairs.len() / 2, || format!("only {certified} of {} certified", pairs.len()))?;
    Ok(format!("{certified} of {} Hilbert pairs certified, all necessary checks hold", pairs.len()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::sorted_svd;

    #[test]
    fn hilbert_operator_has_requested_spectrum() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let t = hilbert_operator(&[1.0, 0.5, 0.25], &mut rng).unwrap();
        let s = sorted_svd(&t.to_dmatrix()).singular_values;
        for (a, b) in s.iter().zip([1.0, 0.5, 0.25]) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn unknown_criterion_fails() {
        assert!(!run_criterion(11, 0).passed);
    }
}
