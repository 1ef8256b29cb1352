//! Arc-length geometry of the ℓp unit circle `|x|^p + |y|^p = 1`.
//!
//! The first octant is the graph `x = (1 - y^p)^{1/p}`, `0 ≤ y ≤ 2^{-1/p}`,
//! which has a bounded slope; the rest of the curve follows by the diagonal
//! reflection and quarter turns, all of which preserve Euclidean arc length.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use super::Exponent;
use crate::error::{Error, Result};
use crate::numeric::{golden_min, integrate};

const REFINE_START: usize = 1 << 16;
const REFINE_CAP: usize = 1 << 20;
const REFINE_AGREE: f64 = 1e-6;

fn finite_p(p: Exponent) -> Result<f64> {
    if p.is_one() || p.is_infinite() {
        return Err(Error::BadExponent(format!(
            "arc-length machinery needs 1 < p < inf, got {p}"
        )));
    }
    Ok(p.value())
}

fn speed(p: f64, y: f64) -> f64 {
    if y <= 0.0 {
        return 1.0;
    }
    let yp = y.powf(p);
    let slope = y.powf(p - 1.0) * (1.0 - yp).max(0.0).powf(1.0 / p - 1.0);
    (1.0 + slope * slope).sqrt()
}

fn graph_x(p: f64, y: f64) -> f64 {
    (1.0 - y.powf(p)).max(0.0).powf(1.0 / p)
}

/// Euclidean length of the whole ℓp unit circle. Polygonal cases are exact.
pub fn arc_length_total(p: Exponent) -> Result<f64> {
    if p.is_one() {
        return Ok(4.0 * std::f64::consts::SQRT_2);
    }
    if p.is_infinite() {
        return Ok(8.0);
    }
    let pf = p.value();
    let corner = 2f64.powf(-1.0 / pf);
    Ok(8.0 * integrate(|y| speed(pf, y), 0.0, corner, 0.0, 1e-13))
}

/// Cumulative arc length on a grid of the octant graph, with exact local
/// corrections between nodes.
#[derive(Debug)]
pub struct ArcTable {
    p: f64,
    step: f64,
    corner: f64,
    cumulative: Vec<f64>,
    samples: usize,
}

type Cache = Mutex<HashMap<(u64, usize), Arc<ArcTable>>>;

fn cache() -> &'static Cache {
    static CACHE: OnceLock<Cache> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

impl ArcTable {
    /// A table with `samples` nodes around the full circle (a multiple of 8).
    pub fn new(p: Exponent, samples: usize) -> Result<Self> {
        let pf = finite_p(p)?;
        let per_octant = (samples / 8).max(1);
        let corner = 2f64.powf(-1.0 / pf);
        let step = corner / per_octant as f64;
        let mut cumulative = Vec::with_capacity(per_octant + 1);
        cumulative.push(0.0);
        let mut acc = 0.0;
        for k in 0..per_octant {
            let a = k as f64 * step;
            let b = if k + 1 == per_octant { corner } else { a + step };
            acc += integrate(|y| speed(pf, y), a, b, 1e-16, 1e-14);
            cumulative.push(acc);
        }
        Ok(ArcTable {
            p: pf,
            step,
            corner,
            cumulative,
            samples: per_octant * 8,
        })
    }

    /// Shared table for `(p, samples)`; built once per process.
    pub fn shared(p: Exponent, samples: usize) -> Result<Arc<ArcTable>> {
        let key = (p.value().to_bits(), samples);
        if let Some(t) = cache().lock().expect("arc cache").get(&key) {
            return Ok(t.clone());
        }
        let t = Arc::new(ArcTable::new(p, samples)?);
        cache().lock().expect("arc cache").insert(key, t.clone());
        Ok(t)
    }

    pub fn samples(&self) -> usize {
        self.samples
    }

    fn octant(&self) -> f64 {
        *self.cumulative.last().expect("nonempty table")
    }

    pub fn total(&self) -> f64 {
        8.0 * self.octant()
    }

    fn node(&self, k: usize) -> f64 {
        if k + 1 == self.cumulative.len() {
            self.corner
        } else {
            k as f64 * self.step
        }
    }

    /// Arc length from `(1, 0)` to the graph point at height `y`.
    fn arc_of_y(&self, y: f64) -> f64 {
        let y = y.clamp(0.0, self.corner);
        let k = ((y / self.step) as usize).min(self.cumulative.len() - 2);
        let a = self.node(k);
        let part = integrate(|t| speed(self.p, t), a, y, 1e-16, 1e-14);
        self.cumulative[k] + part
    }

    /// Inverse of `arc_of_y` on `[0, octant]`.
    fn y_of_arc(&self, r: f64) -> f64 {
        let r = r.clamp(0.0, self.octant());
        let k = self.cumulative.partition_point(|c| *c <= r).clamp(1, self.cumulative.len() - 1) - 1;
        let (a, b) = (self.node(k), self.node(k + 1));
        let (ca, cb) = (self.cumulative[k], self.cumulative[k + 1]);
        let mut y = a + (b - a) * (r - ca) / (cb - ca);
        for _ in 0..3 {
            let f = self.arc_of_y(y) - r;
            y = (y - f / speed(self.p, y)).clamp(a, b);
        }
        y
    }

    /// The curve point at arc length `s` counterclockwise from `(1, 0)`.
    pub fn point_at(&self, s: f64) -> [f64; 2] {
        let o = self.octant();
        let q = 2.0 * o;
        let s = s.rem_euclid(4.0 * q);
        let k = ((s / q) as usize).min(3);
        let r = s - k as f64 * q;
        let (mut a, mut b) = if r <= o {
            let y = self.y_of_arc(r);
            (graph_x(self.p, y), y)
        } else {
            let y = self.y_of_arc(q - r);
            (y, graph_x(self.p, y))
        };
        for _ in 0..k {
            (a, b) = (-b, a);
        }
        [a, b]
    }

    /// Arc-length coordinate of a point on the curve, in `[0, L)`.
    pub fn arc_position(&self, pt: [f64; 2]) -> f64 {
        let q = 2.0 * self.octant();
        let ang = pt[1].atan2(pt[0]).rem_euclid(std::f64::consts::TAU);
        let k = ((ang / std::f64::consts::FRAC_PI_2) as usize).min(3);
        let (mut a, mut b) = (pt[0], pt[1]);
        for _ in 0..k {
            (a, b) = (b, -a);
        }
        let (a, b) = (a.max(0.0), b.max(0.0));
        let r = if b <= a { self.arc_of_y(b) } else { q - self.arc_of_y(a) };
        (k as f64 * q + r).rem_euclid(4.0 * q)
    }

    /// Shorter arc between two curve points.
    pub fn arc_distance(&self, x: [f64; 2], y: [f64; 2]) -> f64 {
        let l = self.total();
        let d = (self.arc_position(x) - self.arc_position(y)).abs();
        d.min(l - d)
    }

    /// `min ‖P(s + eps) − P(s)‖_p` over `s`, scanned on the table grid and
    /// refined by golden section. Quarter turns are ℓp isometries, so one
    /// quadrant of starting points suffices.
    fn min_chord(&self, eps: f64) -> f64 {
        let chord = |s: f64| {
            let a = self.point_at(s);
            let b = self.point_at(s + eps);
            chord_norm(self.p, [b[0] - a[0], b[1] - a[1]])
        };
        let n = self.samples / 4;
        let h = self.total() / self.samples as f64;
        let mut best = (0usize, f64::INFINITY);
        for i in 0..n {
            let v = chord(i as f64 * h);
            if v < best.1 {
                best = (i, v);
            }
        }
        let c = best.0 as f64 * h;
        let (_, refined) = golden_min(chord, c - h, c + h, 1e-12);
        refined.min(best.1)
    }
}

fn chord_norm(p: f64, v: [f64; 2]) -> f64 {
    if p == 2.0 {
        return v[0].hypot(v[1]);
    }
    let m = v[0].abs().max(v[1].abs());
    if m == 0.0 {
        return 0.0;
    }
    m * ((v[0].abs() / m).powf(p) + (v[1].abs() / m).powf(p)).powf(1.0 / p)
}

/// The arc-length constant at a fixed table resolution.
pub fn arc_length_constant_with_samples(p: Exponent, eps: f64, samples: usize) -> Result<f64> {
    finite_p(p)?;
    let table = ArcTable::shared(p, samples)?;
    let half = table.total() / 2.0;
    if !(eps > 0.0 && eps < half) {
        return Err(Error::OutOfRange {
            eps,
            half_length: half,
        });
    }
    Ok(table.min_chord(eps))
}

/// `δ(eps)`: the least ℓp distance between points of the ℓp circle whose
/// Euclidean arc separation is at least `eps`. The table is refined by
/// doubling until two successive values agree.
pub fn arc_length_constant(p: Exponent, eps: f64) -> Result<f64> {
    static MEMO: OnceLock<Mutex<HashMap<(u64, u64), f64>>> = OnceLock::new();
    let key = (p.value().to_bits(), eps.to_bits());
    let memo = MEMO.get_or_init(Default::default);
    if let Some(v) = memo.lock().expect("memo lock").get(&key) {
        return Ok(*v);
    }
    let v = refine_constant(p, eps)?;
    memo.lock().expect("memo lock").insert(key, v);
    Ok(v)
}

fn refine_constant(p: Exponent, eps: f64) -> Result<f64> {
    let mut n = REFINE_START;
    let mut prev = arc_length_constant_with_samples(p, eps, n)?;
    loop {
        n *= 2;
        let next = arc_length_constant_with_samples(p, eps, n)?;
        if (next - prev).abs() < REFINE_AGREE || n >= REFINE_CAP {
            return Ok(next);
        }
        prev = next;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn e(p: u32) -> Exponent {
        Exponent::integer(p).unwrap()
    }

    /// Polyline length of the curve under the angular parametrization
    /// `x = sgn(cos t)|cos t|^{2/p}`, `y = sgn(sin t)|sin t|^{2/p}`.
    fn polyline(p: f64, segments: usize) -> Vec<[f64; 2]> {
        (0..=segments)
            .map(|k| {
                let t = 2.0 * PI * k as f64 / segments as f64;
                let (c, s) = (t.cos(), t.sin());
                [c.signum() * c.abs().powf(2.0 / p), s.signum() * s.abs().powf(2.0 / p)]
            })
            .collect()
    }

    fn polyline_length(pts: &[[f64; 2]]) -> f64 {
        pts.windows(2).map(|w| (w[1][0] - w[0][0]).hypot(w[1][1] - w[0][1])).sum()
    }

    #[test]
    fn totals() {
        assert!((arc_length_total(Exponent::TWO).unwrap() - 2.0 * PI).abs() < 1e-12);
        assert_eq!(arc_length_total(Exponent::ONE).unwrap(), 4.0 * 2f64.sqrt());
        assert_eq!(arc_length_total(Exponent::Infinity).unwrap(), 8.0);
        for p in [3u32, 4] {
            let l = arc_length_total(e(p)).unwrap();
            let oracle = polyline_length(&polyline(p as f64, 1_000_000));
            assert!((l - oracle).abs() < 1e-8 * l, "p={p}: {l} vs {oracle}");
        }
        let l = arc_length_total(Exponent::new(3, 2).unwrap()).unwrap();
        let oracle = polyline_length(&polyline(1.5, 1_000_000));
        assert!((l - oracle).abs() < 1e-8 * l);
    }

    #[test]
    fn table_matches_total() {
        for p in [Exponent::new(3, 2).unwrap(), e(2), e(3), e(7)] {
            let t = ArcTable::new(p, 1 << 12).unwrap();
            let l = arc_length_total(p).unwrap();
            assert!((t.total() - l).abs() < 1e-11 * l);
        }
    }

    #[test]
    fn point_and_position_are_inverse() {
        let t = ArcTable::new(e(3), 1 << 12).unwrap();
        let l = t.total();
        for k in 0..200 {
            let s = l * (k as f64 + 0.37) / 200.0;
            let pt = t.point_at(s);
            let norm = (pt[0].abs().powi(3) + pt[1].abs().powi(3)).cbrt();
            assert!((norm - 1.0).abs() < 1e-12);
            assert!((t.arc_position(pt) - s).abs() < 1e-10);
        }
        let p0 = t.point_at(0.0);
        assert!((p0[0] - 1.0).abs() < 1e-15 && p0[1].abs() < 1e-15);
        let q = t.point_at(l / 4.0);
        assert!(q[0].abs() < 1e-10 && (q[1] - 1.0).abs() < 1e-10);
    }

    #[test]
    fn circle_chords() {
        for eps in [0.01, 0.1, 1.0, 3.0] {
            let d = arc_length_constant_with_samples(e(2), eps, 1 << 12).unwrap();
            assert!((d - 2.0 * (eps / 2.0).sin()).abs() < 1e-10, "eps={eps}");
        }
    }

    #[test]
    fn out_of_range() {
        let l = arc_length_total(e(3)).unwrap();
        assert!(matches!(arc_length_constant(e(3), l / 2.0), Err(Error::OutOfRange { .. })));
        assert!(matches!(arc_length_constant(e(3), 0.0), Err(Error::OutOfRange { .. })));
        assert!(matches!(arc_length_constant(Exponent::ONE, 0.1), Err(Error::BadExponent(_))));
    }

    /// Brute-force pair scan over 10⁴ points spaced equally in arc length,
    /// built from an independent polyline in the angular parametrization.
    #[test]
    fn l4_constant_matches_pair_scan() {
        let p = 4.0;
        let eps = 0.1;
        let fine = polyline(p, 1_000_000);
        let mut cum = vec![0.0];
        for w in fine.windows(2) {
            let last = *cum.last().unwrap();
            cum.push(last + (w[1][0] - w[0][0]).hypot(w[1][1] - w[0][1]));
        }
        let l = *cum.last().unwrap();
        let m = 10_000;
        let mut pts = Vec::with_capacity(m);
        let mut j = 0;
        for i in 0..m {
            let s = l * i as f64 / m as f64;
            while cum[j + 1] < s {
                j += 1;
            }
            let f = (s - cum[j]) / (cum[j + 1] - cum[j]);
            pts.push([
                fine[j][0] + f * (fine[j + 1][0] - fine[j][0]),
                fine[j][1] + f * (fine[j + 1][1] - fine[j][1]),
            ]);
        }
        let h = l / m as f64;
        let mut oracle = f64::INFINITY;
        for i in 0..m {
            for k in i + 1..m {
                let sep = (k - i) as f64 * h;
                if sep.min(l - sep) < eps {
                    continue;
                }
                let dx = (pts[k][0] - pts[i][0]).abs();
                let dy = (pts[k][1] - pts[i][1]).abs();
                let d = (dx.powi(4) + dy.powi(4)).sqrt().sqrt();
                oracle = oracle.min(d);
            }
        }
        let d = arc_length_constant(e(4), eps).unwrap();
        assert!(d > 0.0);
        assert!(oracle >= d - 1e-6, "oracle {oracle} below {d}");
        assert!(oracle - d < 1e-3, "oracle {oracle} vs {d}");
    }

    #[test]
    fn small_eps_ratio_for_l3() {
        // δ(eps)/eps tends to the least ℓ3/ℓ2 ratio of a tangent direction,
        // reached at the diagonal: 2^{1/3} / √2.
        let limit = 2f64.powf(1.0 / 3.0) / 2f64.sqrt();
        let r = arc_length_constant_with_samples(e(3), 1e-3, 1 << 16).unwrap() / 1e-3;
        assert!(r <= 1.0 && (r - limit).abs() < 1e-3, "ratio {r}");
    }

    proptest::proptest! {
        #![proptest_config(proptest::test_runner::Config::with_cases(12))]
        #[test]
        fn monotone_and_below_eps(a in 0.01f64..2.0, b in 0.01f64..2.0, p in 2u32..6) {
            let (lo, hi) = if a < b { (a, b) } else { (b, a) };
            let dlo = arc_length_constant_with_samples(e(p), lo, 1 << 13).unwrap();
            let dhi = arc_length_constant_with_samples(e(p), hi, 1 << 13).unwrap();
            proptest::prop_assert!(dlo <= dhi + 1e-9);
            // for p ≥ 2 the ℓp chord is at most the Euclidean chord
            proptest::prop_assert!(dlo <= lo + 1e-12);
            proptest::prop_assert!(dhi <= hi + 1e-12);
        }
    }
}
