//! Deterministic direction coverings and seeded randomness.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `count` quasi-uniform unit vectors in `R^dim`.
///
/// Circle and 2-sphere use equal angles and a Fibonacci spiral; higher
/// dimensions use Gaussian samples built from a Halton sequence.
pub fn sphere_points(dim: usize, count: usize) -> Vec<Vec<f64>> {
    match dim {
        0 => Vec::new(),
        1 => [1.0, -1.0].iter().take(count.min(2)).map(|&s| vec![s]).collect(),
        2 => (0..count)
            .map(|k| {
                let a = 2.0 * std::f64::consts::PI * (k as f64 + 0.5) / count as f64;
                vec![a.cos(), a.sin()]
            })
            .collect(),
        3 => {
            let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
            (0..count)
                .map(|k| {
                    let z = 1.0 - 2.0 * (k as f64 + 0.5) / count as f64;
                    let r = (1.0 - z * z).max(0.0).sqrt();
                    let a = golden * k as f64;
                    vec![r * a.cos(), r * a.sin(), z]
                })
                .collect()
        }
        _ => (0..count)
            .map(|k| {
                // Box-Muller on pairs of Halton coordinates
                let v: Vec<f64> = (0..dim)
                    .map(|d| {
                        let u1 = halton(k + 1, PRIMES[(2 * d) % PRIMES.len()]).max(1e-12);
                        let u2 = halton(k + 1, PRIMES[(2 * d + 1) % PRIMES.len()]);
                        (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
                    })
                    .collect();
                crate::linalg::normalized(&v)
            })
            .collect(),
    }
}

const PRIMES: [usize; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];

fn halton(mut i: usize, base: usize) -> f64 {
    let mut f = 1.0;
    let mut r = 0.0;
    while i > 0 {
        f /= base as f64;
        r += f * (i % base) as f64;
        i /= base;
    }
    r
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn coverings_are_unit() {
        for dim in 1..6 {
            for p in sphere_points(dim, 17) {
                assert!((crate::linalg::norm(&p) - 1.0).abs() < 1e-12);
            }
        }
        assert_eq!(sphere_points(1, 10).len(), 2);
        assert_eq!(sphere_points(3, 10).len(), 10);
    }
}
