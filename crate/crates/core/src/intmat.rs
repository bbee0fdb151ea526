//! Exact integer matrices.
//!
//! Determinants, commutators and products of generator powers must be checked
//! in exact arithmetic; floating point is reserved for eigenvalue work.
//! Entries are arbitrary-precision integers so that long products of
//! hyperbolic generators (entries growing like e^{a s}) never overflow.

use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Square integer matrix, row-major, arbitrary-precision entries.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntMatrix {
    n: usize,
    data: Vec<BigInt>,
}

impl IntMatrix {
    pub fn from_rows(rows: &[Vec<i64>]) -> Option<Self> {
        let n = rows.len();
        if n == 0 || rows.iter().any(|r| r.len() != n) {
            return None;
        }
        let data = rows
            .iter()
            .flat_map(|r| r.iter().map(|&v| BigInt::from(v)))
            .collect();
        Some(Self { n, data })
    }

    pub fn identity(n: usize) -> Self {
        let mut data = vec![BigInt::zero(); n * n];
        for i in 0..n {
            data[i * n + i] = BigInt::one();
        }
        Self { n, data }
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn entry(&self, i: usize, j: usize) -> &BigInt {
        &self.data[i * self.n + j]
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.n, other.n, "size mismatch in integer matrix product");
        let n = self.n;
        let mut data = vec![BigInt::zero(); n * n];
        for i in 0..n {
            for l in 0..n {
                let a = &self.data[i * n + l];
                if a.is_zero() {
                    continue;
                }
                for j in 0..n {
                    data[i * n + j] += a * &other.data[l * n + j];
                }
            }
        }
        Self { n, data }
    }

    /// Nonnegative integer power by binary exponentiation.
    pub fn pow(&self, e: u64) -> Self {
        let mut result = Self::identity(self.n);
        let mut base = self.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                result = result.mul(&base);
            }
            base = base.mul(&base);
            e >>= 1;
        }
        result
    }

    /// Determinant by fraction-free (Bareiss) elimination.
    pub fn det(&self) -> BigInt {
        let n = self.n;
        let mut m = self.data.clone();
        let mut sign = 1i32;
        let mut prev = BigInt::one();
        for k in 0..n {
            if m[k * n + k].is_zero() {
                let pivot = (k + 1..n).find(|&r| !m[r * n + k].is_zero());
                match pivot {
                    Some(r) => {
                        for j in 0..n {
                            m.swap(k * n + j, r * n + j);
                        }
                        sign = -sign;
                    }
                    None => return BigInt::zero(),
                }
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    let num = &m[i * n + j] * &m[k * n + k] - &m[i * n + k] * &m[k * n + j];
                    m[i * n + j] = num / &prev;
                }
                m[i * n + k] = BigInt::zero();
            }
            prev = m[k * n + k].clone();
        }
        let d = m[n * n - 1].clone();
        if sign < 0 {
            -d
        } else {
            d
        }
    }

    /// Exact inverse. Returns `None` when the inverse is not an integer
    /// matrix, i.e. when `det` is not a unit.
    pub fn inverse(&self) -> Option<Self> {
        let n = self.n;
        // Gauss-Jordan over exact rationals on [A | I].
        let mut a: Vec<BigRational> = self
            .data
            .iter()
            .map(|v| BigRational::from_integer(v.clone()))
            .collect();
        let mut inv: Vec<BigRational> = (0..n * n)
            .map(|idx| {
                if idx / n == idx % n {
                    BigRational::one()
                } else {
                    BigRational::zero()
                }
            })
            .collect();
        for k in 0..n {
            let pivot = (k..n).find(|&r| !a[r * n + k].is_zero())?;
            if pivot != k {
                for j in 0..n {
                    a.swap(k * n + j, pivot * n + j);
                    inv.swap(k * n + j, pivot * n + j);
                }
            }
            let p = a[k * n + k].clone();
            for j in 0..n {
                a[k * n + j] /= &p;
                inv[k * n + j] /= &p;
            }
            for i in 0..n {
                if i == k || a[i * n + k].is_zero() {
                    continue;
                }
                let f = a[i * n + k].clone();
                for j in 0..n {
                    let av = &a[k * n + j] * &f;
                    a[i * n + j] -= av;
                    let iv = &inv[k * n + j] * &f;
                    inv[i * n + j] -= iv;
                }
            }
        }
        let mut data = Vec::with_capacity(n * n);
        for v in inv {
            if !v.is_integer() {
                return None;
            }
            data.push(v.to_integer());
        }
        Some(Self { n, data })
    }

    pub fn commutes_with(&self, other: &Self) -> bool {
        self.mul(other) == other.mul(self)
    }

    /// Entrywise conversion; huge entries saturate to ±inf, which downstream
    /// guards treat as out of the representable regime.
    pub fn to_f64(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.n, self.n, |i, j| {
            let v = self.entry(i, j);
            v.to_f64().unwrap_or(if v.is_negative() {
                f64::NEG_INFINITY
            } else {
                f64::INFINITY
            })
        })
    }

    /// Operator norm for the sup norm on vectors: max absolute row sum.
    pub fn sup_operator_norm(&self) -> f64 {
        let n = self.n;
        (0..n)
            .map(|i| {
                let s: BigInt = (0..n).map(|j| self.entry(i, j).abs()).sum();
                s.to_f64().unwrap_or(f64::INFINITY)
            })
            .fold(0.0, f64::max)
    }

    pub fn max_abs_entry(&self) -> f64 {
        self.data
            .iter()
            .map(|v| v.abs().to_f64().unwrap_or(f64::INFINITY))
            .fold(0.0, f64::max)
    }

    /// Row-major i64 entries, `None` if any entry is out of range.
    pub fn rows_i64(&self) -> Option<Vec<Vec<i64>>> {
        (0..self.n)
            .map(|i| (0..self.n).map(|j| self.entry(i, j).to_i64()).collect())
            .collect()
    }
}
