//! Deterministic samples of unit spheres.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::spaces::SpaceSpec;

const GAUSSIAN_SEED: u64 = 0x5eed_b0b0;

/// Roughly `resolution` unit vectors of `space`, in a fixed order.
///
/// ℓ∞ⁿ: a square grid on every facet, with an odd number of points per axis
/// so facet centers are included. ℓ₁ⁿ: a barycentric grid on every facet.
/// Two-dimensional spaces: an angular grid pushed to the sphere. Three
/// dimensions: a Fibonacci lattice. Higher dimensions: seeded Gaussian draws.
pub fn sphere_samples(space: SpaceSpec, resolution: usize) -> Result<Vec<Vec<f64>>> {
    let n = space.n;
    let resolution = resolution.max(8);
    if n == 1 {
        return Ok(vec![vec![1.0], vec![-1.0]]);
    }
    let raw: Vec<Vec<f64>> = if space.is_linf() {
        linf_grid(n, resolution)
    } else if space.is_l1() {
        l1_grid(n, resolution)
    } else if n == 2 {
        (0..resolution)
            .map(|i| {
                let t = std::f64::consts::TAU * i as f64 / resolution as f64;
                vec![t.cos(), t.sin()]
            })
            .collect()
    } else if n == 3 {
        fibonacci(resolution)
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(GAUSSIAN_SEED);
        (0..resolution)
            .map(|_| (0..n).map(|_| StandardNormal.sample(&mut rng)).collect())
            .collect()
    };
    raw.into_iter()
        .map(|v| space.normalize(&v))
        .collect::<Result<Vec<_>>>()
        .map_err(|_| Error::InvariantViolated("zero sample on the sphere".into()))
}

fn linf_grid(n: usize, resolution: usize) -> Vec<Vec<f64>> {
    let per_facet = resolution as f64 / (2 * n) as f64;
    let mut k = per_facet.powf(1.0 / (n - 1) as f64).round().max(3.0) as usize;
    if k % 2 == 0 {
        k += 1;
    }
    let axis: Vec<f64> = (0..k).map(|i| -1.0 + 2.0 * i as f64 / (k - 1) as f64).collect();
    let mut out = Vec::new();
    for fixed in 0..n {
        for sign in [1.0, -1.0] {
            let total = k.pow((n - 1) as u32);
            for mut idx in 0..total {
                let mut v = vec![0.0; n];
                for (j, vj) in v.iter_mut().enumerate() {
                    if j == fixed {
                        *vj = sign;
                    } else {
                        *vj = axis[idx % k];
                        idx /= k;
                    }
                }
                out.push(v);
            }
        }
    }
    out
}

fn binom(n: usize, k: usize) -> usize {
    (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

fn l1_grid(n: usize, resolution: usize) -> Vec<Vec<f64>> {
    let orthants = 1usize << n;
    let mut k = 1;
    while orthants * binom(k + 1 + n - 1, n - 1) <= resolution {
        k += 1;
    }
    let mut out = Vec::new();
    let mut weights = vec![0usize; n];
    for mask in 0..orthants {
        compositions(n, k, 0, &mut weights, &mut |w| {
            out.push(
                w.iter()
                    .enumerate()
                    .map(|(i, wi)| {
                        let s = if mask >> i & 1 == 1 { -1.0 } else { 1.0 };
                        s * *wi as f64 / k as f64
                    })
                    .collect(),
            );
        });
    }
    out
}

fn compositions(n: usize, left: usize, at: usize, w: &mut Vec<usize>, emit: &mut dyn FnMut(&[usize])) {
    if at == n - 1 {
        w[at] = left;
        emit(w);
        return;
    }
    for v in 0..=left {
        w[at] = v;
        compositions(n, left - v, at + 1, w, emit);
    }
}

fn fibonacci(count: usize) -> Vec<Vec<f64>> {
    let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
    (0..count)
        .map(|i| {
            let z = 1.0 - 2.0 * (i as f64 + 0.5) / count as f64;
            let r = (1.0 - z * z).sqrt();
            let phi = golden * i as f64;
            vec![r * phi.cos(), r * phi.sin(), z]
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_samples_are_unit() {
        for s in [
            SpaceSpec::linf(2),
            SpaceSpec::linf(3),
            SpaceSpec::l1(3),
            SpaceSpec::l2(2),
            SpaceSpec::l2(3),
            SpaceSpec::l2(4),
            SpaceSpec::lp(3, 2),
            SpaceSpec::lp(3, 3),
        ] {
            let pts = sphere_samples(s, 1000).unwrap();
            assert!(pts.len() >= 200, "{s}: {}", pts.len());
            for p in &pts {
                assert!((s.norm(p) - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn facet_centers_present() {
        let pts = sphere_samples(SpaceSpec::linf(3), 4096).unwrap();
        assert!(pts.iter().any(|p| p == &vec![0.0, 0.0, -1.0]));
        let pts = sphere_samples(SpaceSpec::l1(2), 100).unwrap();
        assert!(pts.iter().any(|p| p == &vec![1.0, 0.0]));
    }

    #[test]
    fn deterministic() {
        let a = sphere_samples(SpaceSpec::l2(5), 64).unwrap();
        let b = sphere_samples(SpaceSpec::l2(5), 64).unwrap();
        assert_eq!(a, b);
    }
}
