//! Seeded random draws. Every stream is keyed by the suite seed, a label
//! and an index, so results do not depend on evaluation order or threads.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::connection::Tensor;
use crate::jet::Jet;
use crate::scalar::Scalar;

fn fnv1a(s: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in s.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    h
}

pub fn rng_for(seed: u64, label: &str, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ fnv1a(label));
    rng.set_stream(stream);
    rng
}

/// Uniform point in the closed unit ball of `Rⁿ`: a Gaussian direction
/// scaled by `U^(1/n)`, so the cost does not grow with dimension.
pub fn unit_ball(rng: &mut impl Rng, n: usize) -> Vec<f64> {
    let dir = unit_sphere(rng, n);
    let r = rng.gen::<f64>().powf(1.0 / n as f64);
    dir.into_iter().map(|x| r * x).collect()
}

/// Uniform point on the unit sphere of `Rⁿ`.
pub fn unit_sphere(rng: &mut impl Rng, n: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
        let r = v.iter().map(|x: &f64| x * x).sum::<f64>().sqrt();
        if r > 1e-6 {
            return v.iter().map(|x| x / r).collect();
        }
    }
}

/// Random orthogonal matrix (row-major) from Gram–Schmidt on a random matrix.
pub fn orthogonal(rng: &mut impl Rng, n: usize) -> Vec<f64> {
    let mut cols: Vec<Vec<f64>> = Vec::with_capacity(n);
    while cols.len() < n {
        let mut v = unit_ball(rng, n);
        for _ in 0..2 {
            for e in &cols {
                let c: f64 = v.iter().zip(e).map(|(a, b)| a * b).sum();
                v.iter_mut().zip(e).for_each(|(a, b)| *a -= c * b);
            }
        }
        let r = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if r > 1e-3 {
            cols.push(v.iter().map(|x| x / r).collect());
        }
    }
    let mut q = vec![0.0; n * n];
    for (j, c) in cols.iter().enumerate() {
        for i in 0..n {
            q[i * n + j] = c[i];
        }
    }
    q
}

/// A random quadratic polynomial in the chart coordinates around `p`, as
/// a second-order jet: `c + Σ b_a dx_a + Σ_{a≤b} h_ab dx_a dx_b`.
pub fn random_jet(rng: &mut impl Rng, p: &[f64]) -> Jet {
    let n = p.len();
    let dx: Vec<Jet> = p
        .iter()
        .enumerate()
        .map(|(a, &x)| Jet::variable(x, a, 2).sub(&Jet::constant(x)))
        .collect();
    let mut out = Jet::constant(rng.gen_range(-1.0..=1.0));
    for a in 0..n {
        out = out.add(&dx[a].scale(rng.gen_range(-1.0..=1.0)));
        for b in a..n {
            out = out.add(&dx[a].mul(&dx[b]).scale(rng.gen_range(-1.0..=1.0)));
        }
    }
    out
}

/// A random tensor whose components are independent [`random_jet`]s.
pub fn random_form(rng: &mut impl Rng, p: &[f64], upper: bool, lower: usize) -> Tensor<Jet> {
    let n = p.len();
    let len = if upper { n } else { 1 } * n.pow(lower as u32);
    Tensor::from_data(
        n,
        upper,
        lower,
        (0..len).map(|_| random_jet(rng, p)).collect(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let a: f64 = rng_for(7, "x", 3).gen();
        let b: f64 = rng_for(7, "x", 3).gen();
        let c: f64 = rng_for(7, "x", 4).gen();
        let d: f64 = rng_for(7, "y", 3).gen();
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert_ne!(a, d);
    }

    #[test]
    fn orthogonal_matrix_is_orthogonal() {
        let mut rng = rng_for(1, "q", 0);
        let n = 5;
        let q = orthogonal(&mut rng, n);
        for i in 0..n {
            for j in 0..n {
                let s: f64 = (0..n).map(|k| q[k * n + i] * q[k * n + j]).sum();
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((s - want).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn random_jet_is_centered_at_point() {
        let mut rng = rng_for(2, "jet", 0);
        let j = random_jet(&mut rng, &[0.3, -1.0]);
        assert_eq!(j.order(), 2);
        assert!(j.value().abs() <= 1.0);
    }
}
