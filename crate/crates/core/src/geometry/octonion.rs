//! Cross products on R³ and R⁷ from the Cayley–Dickson doubling construction.
//!
//! The algebra of dimension 2ⁿ is built recursively with the product
//! `(a, b)(c, d) = (ac − d̄b, da + bc̄)`, so the quaternion table has
//! `e1 e2 = e3` and the octonions extend it with `e4 = (0, 1)`. For purely
//! imaginary `u`, `v` the cross product is the imaginary part of `uv`.

use std::sync::LazyLock;

/// Conjugate: negate every imaginary coordinate.
pub fn conj(a: &[f64]) -> Vec<f64> {
    let mut out = a.to_vec();
    for x in out.iter_mut().skip(1) {
        *x = -*x;
    }
    out
}

/// Product in the Cayley–Dickson algebra of dimension `a.len()` (a power of two).
pub fn cd_mul(a: &[f64], b: &[f64]) -> Vec<f64> {
    let n = a.len();
    assert_eq!(n, b.len(), "operand dimensions differ");
    assert!(n.is_power_of_two(), "dimension must be a power of two");
    if n == 1 {
        return vec![a[0] * b[0]];
    }
    let h = n / 2;
    let (p, q) = a.split_at(h);
    let (r, s) = b.split_at(h);
    let pr = cd_mul(p, r);
    let sq = cd_mul(&conj(s), q);
    let sp = cd_mul(s, p);
    let qr = cd_mul(q, &conj(r));
    let mut out = Vec::with_capacity(n);
    out.extend(pr.iter().zip(&sq).map(|(x, y)| x - y));
    out.extend(sp.iter().zip(&qr).map(|(x, y)| x + y));
    out
}

fn basis(n: usize, i: usize) -> Vec<f64> {
    let mut e = vec![0.0; n];
    e[i] = 1.0;
    e
}

/// Structure constants `c[i][j][k]` with `e_i × e_j = Σ_k c[i][j][k] e_k`
/// for the imaginary units of the algebra of dimension `m + 1`.
fn structure_constants(m: usize) -> Vec<f64> {
    let n = m + 1;
    let mut c = vec![0.0; m * m * m];
    for i in 0..m {
        for j in 0..m {
            let p = cd_mul(&basis(n, i + 1), &basis(n, j + 1));
            for k in 0..m {
                c[(i * m + j) * m + k] = p[k + 1];
            }
        }
    }
    c
}

static CROSS3: LazyLock<Vec<f64>> = LazyLock::new(|| structure_constants(3));
static CROSS7: LazyLock<Vec<f64>> = LazyLock::new(|| structure_constants(7));

/// Structure constants of the cross product on R³ or R⁷.
pub fn cross_table(m: usize) -> &'static [f64] {
    match m {
        3 => &CROSS3,
        7 => &CROSS7,
        _ => panic!("cross products exist only in dimensions 3 and 7, not {m}"),
    }
}

/// `u × v` in R³ or R⁷.
pub fn cross(u: &[f64], v: &[f64]) -> Vec<f64> {
    let m = u.len();
    assert_eq!(m, v.len(), "operand dimensions differ");
    let c = cross_table(m);
    let mut out = vec![0.0; m];
    for i in 0..m {
        if u[i] == 0.0 {
            continue;
        }
        for j in 0..m {
            let uv = u[i] * v[j];
            if uv == 0.0 {
                continue;
            }
            for k in 0..m {
                out[k] += c[(i * m + j) * m + k] * uv;
            }
        }
    }
    out
}

/// `u × v` for 7-vectors; the imaginary-octonion cross product.
pub fn octonion_cross(u: &[f64; 7], v: &[f64; 7]) -> [f64; 7] {
    let w = cross(u, v);
    let mut out = [0.0; 7];
    out.copy_from_slice(&w);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn dot(a: &[f64], b: &[f64]) -> f64 {
        a.iter().zip(b).map(|(x, y)| x * y).sum()
    }

    #[test]
    fn quaternion_units() {
        let e = |i| basis(4, i);
        assert_eq!(cd_mul(&e(1), &e(2)), e(3));
        assert_eq!(cd_mul(&e(2), &e(3)), e(1));
        assert_eq!(cd_mul(&e(1), &e(1)), vec![-1.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn e1_cross_e2_is_e3() {
        let mut u = [0.0; 7];
        let mut v = [0.0; 7];
        u[0] = 1.0;
        v[1] = 1.0;
        let w = octonion_cross(&u, &v);
        assert_eq!(w, [0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn octonion_units_square_to_minus_one_and_anticommute() {
        for i in 1..8 {
            let sq = cd_mul(&basis(8, i), &basis(8, i));
            assert_eq!(sq[0], -1.0);
            for j in 1..8 {
                if i != j {
                    let a = cd_mul(&basis(8, i), &basis(8, j));
                    let b = cd_mul(&basis(8, j), &basis(8, i));
                    assert!(a.iter().zip(&b).all(|(x, y)| *x == -*y));
                }
            }
        }
    }

    #[test]
    fn lagrange_identity_on_random_pairs() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..100 {
            let u: [f64; 7] = std::array::from_fn(|_| rng.gen_range(-1.0..1.0));
            let v: [f64; 7] = std::array::from_fn(|_| rng.gen_range(-1.0..1.0));
            let w = octonion_cross(&u, &v);
            let lhs = dot(&w, &w);
            let rhs = dot(&u, &u) * dot(&v, &v) - dot(&u, &v).powi(2);
            assert!((lhs - rhs).abs() < 1e-10);
            assert!(octonion_cross(&u, &u).iter().all(|x| x.abs() < 1e-15));
            // u × v is orthogonal to both factors
            assert!(dot(&w, &u).abs() < 1e-12 && dot(&w, &v).abs() < 1e-12);
        }
    }

    #[test]
    fn octonions_are_alternative_but_not_associative() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let a: Vec<f64> = (0..8).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let b: Vec<f64> = (0..8).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let c: Vec<f64> = (0..8).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let l = cd_mul(&cd_mul(&a, &a), &b);
        let r = cd_mul(&a, &cd_mul(&a, &b));
        assert!(l.iter().zip(&r).all(|(x, y)| (x - y).abs() < 1e-12));
        let l = cd_mul(&cd_mul(&a, &b), &c);
        let r = cd_mul(&a, &cd_mul(&b, &c));
        assert!(l.iter().zip(&r).any(|(x, y)| (x - y).abs() > 1e-3));
    }
}
