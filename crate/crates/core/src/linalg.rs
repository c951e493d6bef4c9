//! Dense LU factorization with partial pivoting.
//!
//! The block-format reverse conversions need to invert square operators whose
//! side grows with the block area (a 64×64 block means a 4096×4096 system),
//! so the factorization is kept and reused for many right-hand sides instead
//! of forming explicit inverses.

use crate::{Error, Result};

/// A factored square matrix: `P·A = L·U` stored compactly.
#[derive(Debug, Clone)]
pub struct LuFactors {
    n: usize,
    lu: Vec<f64>,
    piv: Vec<usize>,
}

/// Factors the row-major `n`×`n` matrix `a`. Fails on (numerically) singular
/// input.
pub fn lu_factor(mut a: Vec<f64>, n: usize) -> Result<LuFactors> {
    assert_eq!(a.len(), n * n, "matrix data does not match dimension");
    let mut piv = vec![0usize; n];
    for k in 0..n {
        // Partial pivoting: largest magnitude in column k at or below row k.
        let mut p = k;
        let mut best = a[k * n + k].abs();
        for i in k + 1..n {
            let v = a[i * n + k].abs();
            if v > best {
                best = v;
                p = i;
            }
        }
        if best < 1e-12 {
            return Err(Error::Config(format!(
                "singular matrix (pivot {best:.3e} at column {k})"
            )));
        }
        piv[k] = p;
        if p != k {
            for j in 0..n {
                a.swap(k * n + j, p * n + j);
            }
        }
        let pivot = a[k * n + k];
        for i in k + 1..n {
            let factor = a[i * n + k] / pivot;
            a[i * n + k] = factor;
            if factor != 0.0 {
                let (upper, lower) = a.split_at_mut(i * n);
                let row_k = &upper[k * n + k + 1..k * n + n];
                let row_i = &mut lower[k + 1..n];
                for (ri, rk) in row_i.iter_mut().zip(row_k) {
                    *ri -= factor * rk;
                }
            }
        }
    }
    Ok(LuFactors { n, lu: a, piv })
}

impl LuFactors {
    pub fn dim(&self) -> usize {
        self.n
    }

    /// Solves `A·x = b` in place.
    pub fn solve_in_place(&self, b: &mut [f64]) {
        let n = self.n;
        assert_eq!(b.len(), n);
        for k in 0..n {
            b.swap(k, self.piv[k]);
        }
        // Forward substitution with unit lower triangle.
        for i in 1..n {
            let mut s = b[i];
            let row = &self.lu[i * n..i * n + i];
            for (j, l) in row.iter().enumerate() {
                s -= l * b[j];
            }
            b[i] = s;
        }
        // Back substitution.
        for i in (0..n).rev() {
            let mut s = b[i];
            let row = &self.lu[i * n + i + 1..(i + 1) * n];
            for (j, u) in row.iter().enumerate() {
                s -= u * b[i + 1 + j];
            }
            b[i] = s / self.lu[i * n + i];
        }
    }

    /// Explicit inverse; intended for small systems (tests, 3×3 and 4×4
    /// conversion matrices).
    pub fn inverse(&self) -> Vec<f64> {
        let n = self.n;
        let mut inv = vec![0.0; n * n];
        let mut col = vec![0.0; n];
        for j in 0..n {
            col.iter_mut().for_each(|v| *v = 0.0);
            col[j] = 1.0;
            self.solve_in_place(&mut col);
            for i in 0..n {
                inv[i * n + j] = col[i];
            }
        }
        inv
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    #[test]
    fn solves_known_system() {
        // [2 1; 1 3] x = [5; 10] -> x = [1; 3]
        let f = lu_factor(vec![2.0, 1.0, 1.0, 3.0], 2).unwrap();
        let mut b = vec![5.0, 10.0];
        f.solve_in_place(&mut b);
        assert!((b[0] - 1.0).abs() < 1e-12);
        assert!((b[1] - 3.0).abs() < 1e-12);
    }

    #[test]
    fn inverse_times_matrix_is_identity() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let n = 24;
        let a: Vec<f64> = (0..n * n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let inv = lu_factor(a.clone(), n).unwrap().inverse();
        for i in 0..n {
            for j in 0..n {
                let mut s = 0.0;
                for k in 0..n {
                    s += inv[i * n + k] * a[k * n + j];
                }
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((s - expect).abs() < 1e-9, "({i},{j}) = {s}");
            }
        }
    }

    #[test]
    fn pivoting_handles_zero_leading_entry() {
        let f = lu_factor(vec![0.0, 1.0, 1.0, 0.0], 2).unwrap();
        let mut b = vec![3.0, 7.0];
        f.solve_in_place(&mut b);
        assert!((b[0] - 7.0).abs() < 1e-12);
        assert!((b[1] - 3.0).abs() < 1e-12);
    }

    #[test]
    fn singular_matrix_is_reported() {
        assert!(lu_factor(vec![1.0, 2.0, 2.0, 4.0], 2).is_err());
    }
}
