//! Deterministic sample points inside a coordinate box.
//!
//! Points come from a Halton sequence with a seeded Cranley–Patterson
//! rotation, so the same seed always gives the same points in the same order.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const PRIMES: [u32; 8] = [2, 3, 5, 7, 11, 13, 17, 19];

/// Closed interval `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Interval {
        Interval { lo, hi }
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn mid(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    pub fn at(&self, t: f64) -> f64 {
        self.lo + t * self.width()
    }
}

/// Euclidean diameter of a box.
pub fn diameter(domain: &[Interval]) -> f64 {
    domain.iter().map(|i| i.width() * i.width()).sum::<f64>().sqrt()
}

fn radical_inverse(mut index: u64, base: u32) -> f64 {
    let b = base as f64;
    let mut inv = 1.0 / b;
    let mut out = 0.0;
    while index > 0 {
        out += (index % base as u64) as f64 * inv;
        index /= base as u64;
        inv /= b;
    }
    out
}

/// Infinite stream of low-discrepancy points in a box.
pub struct Halton {
    domain: Vec<Interval>,
    shift: Vec<f64>,
    index: u64,
}

impl Halton {
    pub fn new(domain: &[Interval], seed: u64) -> Halton {
        assert!(domain.len() <= PRIMES.len());
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let shift = domain.iter().map(|_| rng.random::<f64>()).collect();
        Halton { domain: domain.to_vec(), shift, index: 1 }
    }
}

impl Iterator for Halton {
    type Item = Vec<f64>;

    fn next(&mut self) -> Option<Vec<f64>> {
        let i = self.index;
        self.index += 1;
        Some(
            self.domain
                .iter()
                .enumerate()
                .map(|(d, iv)| {
                    let t = (radical_inverse(i, PRIMES[d]) + self.shift[d]).fract();
                    iv.at(t)
                })
                .collect(),
        )
    }
}

/// Cell-centred tensor grid with `per_axis` points along every axis.
pub fn grid(domain: &[Interval], per_axis: usize) -> Vec<Vec<f64>> {
    let n = domain.len();
    let total = per_axis.pow(n as u32);
    (0..total)
        .map(|mut k| {
            let mut p = vec![0.0; n];
            for d in (0..n).rev() {
                let j = k % per_axis;
                k /= per_axis;
                p[d] = domain[d].at((j as f64 + 0.5) / per_axis as f64);
            }
            p
        })
        .collect()
}

/// Uniform `per_axis` abscissae along one interval, cell centred.
pub fn abscissae(iv: Interval, count: usize) -> Vec<f64> {
    (0..count).map(|j| iv.at((j as f64 + 0.5) / count as f64)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn halton_is_reproducible_and_inside() {
        let dom = [Interval::new(0.5, 2.0), Interval::new(-1.0, 1.0)];
        let a: Vec<_> = Halton::new(&dom, 42).take(50).collect();
        let b: Vec<_> = Halton::new(&dom, 42).take(50).collect();
        let c: Vec<_> = Halton::new(&dom, 7).take(50).collect();
        assert_eq!(a, b);
        assert_ne!(a, c);
        for p in &a {
            assert!(p[0] >= 0.5 && p[0] <= 2.0 && p[1] >= -1.0 && p[1] <= 1.0);
        }
    }

    #[test]
    fn radical_inverse_base_two() {
        assert_eq!(radical_inverse(1, 2), 0.5);
        assert_eq!(radical_inverse(2, 2), 0.25);
        assert_eq!(radical_inverse(3, 2), 0.75);
    }

    #[test]
    fn grid_counts() {
        let dom = [Interval::new(0.0, 1.0); 3];
        let g = grid(&dom, 4);
        assert_eq!(g.len(), 64);
        assert_eq!(g[0], vec![0.125, 0.125, 0.125]);
        assert_eq!(g[63], vec![0.875, 0.875, 0.875]);
    }
}
