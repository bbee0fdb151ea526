//! ℤᵏ actions by commuting unimodular integer matrices on the torus and
//! their joint Lyapunov spectrum.
//!
//! The spectrum of a commuting family is read off a common triangularization:
//! a generic linear combination of the generators has a real Schur form whose
//! invariant flag is shared by every generator, so the joint eigenvalue
//! tuples appear along the (block) diagonal of the transformed generators.
//! The functional attached to a joint tuple (λ⁽¹⁾, …, λ⁽ᵏ⁾) is
//! t ↦ Σ_j t_j log|λ⁽ʲ⁾|; complex pairs contribute one real functional of
//! multiplicity two.

use nalgebra::{DMatrix, Schur};
use num_bigint::BigInt;
use num_complex::Complex64;
use num_traits::Signed;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::intmat::IntMatrix;

/// Residual bound for accepting a common triangularization, relative to the
/// Frobenius norm of the transformed generator.
const TRIANGULAR_RESIDUAL: f64 = 1e-10;
/// Attempts at a separating random combination before giving up.
const MAX_COMBINATION_ATTEMPTS: usize = 8;
/// Default merge tolerance for equal functionals (sup distance of coeffs).
pub const DEFAULT_GROUPING_TOL: f64 = 1e-8;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ActionError {
    #[error("EmptyGeneratorList")]
    EmptyGeneratorList,
    #[error("DimensionMismatch: generator {index} is {got}x{got}, expected {expected}x{expected}")]
    DimensionMismatch {
        index: usize,
        expected: usize,
        got: usize,
    },
    #[error("NonSquare: generator {index} is not square")]
    NonSquare { index: usize },
    #[error("NonUnimodular: generator {index} has determinant {det}")]
    NonUnimodular { index: usize, det: BigInt },
    #[error("NonCommuting ({i},{j})")]
    NonCommuting { i: usize, j: usize },
    #[error("TorusTooSmall: dimension must be at least 2, got {0}")]
    TorusTooSmall(usize),
    #[error("EigenFailure: {0}")]
    EigenFailure(String),
    #[error(
        "ToleranceAmbiguity: groupings at tol and 2*tol disagree ({} vs {} functionals)",
        tight.len(),
        loose.len()
    )]
    ToleranceAmbiguity {
        tight: Vec<LyapunovFunctional>,
        loose: Vec<LyapunovFunctional>,
    },
    #[error("VectorDimensionMismatch: expected length {expected}, got {got}")]
    VectorDimensionMismatch { expected: usize, got: usize },
    #[error("AlreadySuspended")]
    AlreadySuspended,
}

/// A ℤᵏ action on 𝕋ᵈ given by k commuting integer matrices of determinant ±1.
#[derive(Debug, Clone, PartialEq)]
pub struct IntegerMatrixAction {
    dim: usize,
    rank: usize,
    generators: Vec<IntMatrix>,
    inverses: Vec<IntMatrix>,
}

impl IntegerMatrixAction {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn generators(&self) -> &[IntMatrix] {
        &self.generators
    }

    pub fn generator_inverses(&self) -> &[IntMatrix] {
        &self.inverses
    }

    /// The action generated by the inverse matrices.
    pub fn inverse(&self) -> Self {
        Self {
            dim: self.dim,
            rank: self.rank,
            generators: self.inverses.clone(),
            inverses: self.generators.clone(),
        }
    }

    /// `M(t) = Π_j A_j^{t_j}` as an exact integer matrix.
    pub fn element(&self, t: &[i64]) -> Result<IntMatrix, ActionError> {
        if t.len() != self.rank {
            return Err(ActionError::VectorDimensionMismatch {
                expected: self.rank,
                got: t.len(),
            });
        }
        let mut m = IntMatrix::identity(self.dim);
        for (j, &tj) in t.iter().enumerate() {
            let base = if tj >= 0 {
                &self.generators[j]
            } else {
                &self.inverses[j]
            };
            m = m.mul(&base.pow(tj.unsigned_abs()));
        }
        Ok(m)
    }
}

/// Validates generator data: square matrices of a common size, determinant
/// exactly ±1 and exact pairwise commutation, all in integer arithmetic.
///
/// Faithfulness of the rank is NOT checked (a generator may be a power of
/// another); downstream computations report whatever spectrum the given
/// generators produce.
pub fn verify_action(matrices: &[Vec<Vec<i64>>]) -> Result<IntegerMatrixAction, ActionError> {
    if matrices.is_empty() {
        return Err(ActionError::EmptyGeneratorList);
    }
    let dim = matrices[0].len();
    if dim < 2 {
        return Err(ActionError::TorusTooSmall(dim));
    }
    let mut generators = Vec::with_capacity(matrices.len());
    for (index, rows) in matrices.iter().enumerate() {
        if rows.len() != dim {
            return Err(ActionError::DimensionMismatch {
                index,
                expected: dim,
                got: rows.len(),
            });
        }
        let m = IntMatrix::from_rows(rows).ok_or(ActionError::NonSquare { index })?;
        generators.push(m);
    }
    let mut inverses = Vec::with_capacity(generators.len());
    for (index, g) in generators.iter().enumerate() {
        let det = g.det();
        if det.abs() != BigInt::from(1) {
            return Err(ActionError::NonUnimodular { index, det });
        }
        inverses.push(g.inverse().expect("unimodular matrices invert exactly"));
    }
    for i in 0..generators.len() {
        for j in i + 1..generators.len() {
            if !generators[i].commutes_with(&generators[j]) {
                return Err(ActionError::NonCommuting { i, j });
            }
        }
    }
    Ok(IntegerMatrixAction {
        dim,
        rank: generators.len(),
        generators,
        inverses,
    })
}

/// One distinct joint Lyapunov exponent, as a linear functional on ℝᵏ.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LyapunovFunctional {
    /// χ(t) = coeffs · t, in nats per unit time.
    pub coeffs: Vec<f64>,
    /// Real dimension of the associated Lyapunov subspace.
    pub multiplicity: usize,
    /// True only for the zero functionals added by suspension.
    pub orbit_direction: bool,
}

impl LyapunovFunctional {
    pub fn evaluate(&self, t: &[f64]) -> f64 {
        self.coeffs.iter().zip(t).map(|(c, x)| c * x).sum()
    }

    pub fn is_zero(&self, tol: f64) -> bool {
        self.coeffs.iter().all(|c| c.abs() <= tol)
    }
}

/// The joint Lyapunov spectrum of an action: distinct functionals with
/// multiplicities, sorted lexicographically descending by coefficients
/// (orbit-direction functionals last).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LyapunovSpectrum {
    pub functionals: Vec<LyapunovFunctional>,
    pub dim: usize,
    pub rank: usize,
    pub grouping_tolerance: f64,
}

impl LyapunovSpectrum {
    /// Functionals transverse to the orbit direction, with their indices.
    pub fn non_orbit(&self) -> impl Iterator<Item = (usize, &LyapunovFunctional)> {
        self.functionals
            .iter()
            .enumerate()
            .filter(|(_, f)| !f.orbit_direction)
    }

    pub fn non_orbit_count(&self) -> usize {
        self.non_orbit().count()
    }

    pub fn multiplicity_sum(&self) -> usize {
        self.functionals.iter().map(|f| f.multiplicity).sum()
    }

    pub fn has_nonzero_functional(&self, tol: f64) -> bool {
        self.non_orbit().any(|(_, f)| !f.is_zero(tol))
    }
}

/// χᵢ(t) for every functional, in spectrum order.
pub fn evaluate_exponent(spec: &LyapunovSpectrum, t: &[f64]) -> Result<Vec<f64>, ActionError> {
    if t.len() != spec.rank {
        return Err(ActionError::VectorDimensionMismatch {
            expected: spec.rank,
            got: t.len(),
        });
    }
    Ok(spec.functionals.iter().map(|f| f.evaluate(t)).collect())
}

/// Appends the k trivial zero exponents carried by the orbit directions of
/// the suspension; everything else is unchanged.
pub fn suspend(spec: &LyapunovSpectrum) -> Result<LyapunovSpectrum, ActionError> {
    if spec.functionals.iter().any(|f| f.orbit_direction) {
        return Err(ActionError::AlreadySuspended);
    }
    let mut out = spec.clone();
    out.functionals.push(LyapunovFunctional {
        coeffs: vec![0.0; spec.rank],
        multiplicity: spec.rank,
        orbit_direction: true,
    });
    Ok(out)
}

/// Eigenvalue data of one diagonal block of the combination's Schur form.
#[derive(Debug, Clone)]
enum BlockEig {
    Real(f64),
    /// Complex pair stored through the real 2x2 block invariants.
    Pair { trace: f64, det: f64 },
}

/// Joint eigenvalues of one diagonal block of the shared triangular form.
#[derive(Debug, Clone)]
struct BlockData {
    size: usize,
    coeffs: Vec<f64>,
    eig: BlockEig,
}

struct Triangularization {
    combination: DMatrix<f64>,
    blocks: Vec<BlockData>,
}

/// Diagonal radix-2 balancing (Parlett-Reinsch). Returns the scale vector d
/// with only power-of-two entries, so D⁻¹MD is exact in f64; this is what
/// keeps eigenvalues of badly non-normal conjugates accurate enough for the
/// 1e-9 determinant-sum invariant.
fn balance_scales(m: &DMatrix<f64>) -> Vec<f64> {
    let n = m.nrows();
    let mut d = vec![1.0f64; n];
    for _ in 0..100 {
        let mut converged = true;
        for i in 0..n {
            let mut r = 0.0;
            let mut c = 0.0;
            for j in 0..n {
                if j != i {
                    r += (m[(i, j)] * d[j] / d[i]).abs();
                    c += (m[(j, i)] * d[i] / d[j]).abs();
                }
            }
            if r == 0.0 || c == 0.0 {
                continue;
            }
            let s = c + r;
            let mut f = 1.0;
            let mut c2 = c;
            let mut r2 = r;
            while c2 < r2 / 2.0 {
                c2 *= 2.0;
                r2 /= 2.0;
                f *= 2.0;
            }
            while c2 >= r2 * 2.0 {
                c2 /= 2.0;
                r2 *= 2.0;
                f /= 2.0;
            }
            if f != 1.0 && c2 + r2 < 0.95 * s {
                d[i] *= f;
                converged = false;
            }
        }
        if converged {
            break;
        }
    }
    d
}

fn apply_balance(m: &DMatrix<f64>, d: &[f64]) -> DMatrix<f64> {
    DMatrix::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)] * d[j] / d[i])
}

/// Exact characteristic polynomial by Faddeev-LeVerrier over the integers
/// (the trace divisions are exact). Monic, highest degree first.
fn char_poly_bigint(m: &IntMatrix) -> Vec<BigInt> {
    use num_traits::Zero;
    let n = m.size();
    let a = {
        let mut rows = Vec::with_capacity(n);
        for i in 0..n {
            rows.push((0..n).map(|j| m.entry(i, j).clone()).collect::<Vec<BigInt>>());
        }
        rows
    };
    let mut mk: Vec<Vec<BigInt>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| if i == j { BigInt::from(1) } else { BigInt::zero() })
                .collect()
        })
        .collect();
    let mut coeffs: Vec<BigInt> = vec![BigInt::from(1)];
    let mut ck = BigInt::zero();
    for k in 1..=n {
        // M_k = A · (M_{k-1} + c_{k-1} I)
        let mut shifted = mk.clone();
        for (i, row) in shifted.iter_mut().enumerate() {
            row[i] += &ck;
        }
        let mut next = vec![vec![BigInt::zero(); n]; n];
        for i in 0..n {
            for l in 0..n {
                if a[i][l].is_zero() {
                    continue;
                }
                for j in 0..n {
                    next[i][j] += &a[i][l] * &shifted[l][j];
                }
            }
        }
        mk = next;
        let tr: BigInt = (0..n).map(|i| mk[i][i].clone()).sum();
        ck = -tr / BigInt::from(k as i64);
        coeffs.push(ck.clone());
    }
    coeffs
}

/// Square-free part p / gcd(p, p') of a monic integer polynomial, computed
/// exactly over the rationals. Against the square-free part every
/// eigenvalue is a simple root, so Newton refinement is quadratic even for
/// multiple eigenvalues (repeated or defective blocks).
fn square_free_f64(p: &[BigInt]) -> Option<Vec<f64>> {
    use num_rational::BigRational;
    use num_traits::{One, ToPrimitive, Zero};

    type Poly = Vec<BigRational>;
    fn trim(mut p: Poly) -> Poly {
        while p.len() > 1 && p[0].is_zero() {
            p.remove(0);
        }
        p
    }
    fn monic(p: Poly) -> Poly {
        let lead = p[0].clone();
        if lead.is_zero() || lead.is_one() {
            return p;
        }
        p.into_iter().map(|c| c / &lead).collect()
    }
    fn rem(a: &Poly, b: &Poly) -> Poly {
        let mut r = a.clone();
        while r.len() >= b.len() && !(r.len() == 1 && r[0].is_zero()) {
            let f = r[0].clone() / &b[0];
            for (i, bi) in b.iter().enumerate() {
                let v = bi * &f;
                r[i] -= v;
            }
            r = trim(r);
        }
        r
    }
    fn div_exact(a: &Poly, b: &Poly) -> Poly {
        let mut r = a.clone();
        let mut q = vec![BigRational::zero(); a.len() - b.len() + 1];
        for qi in 0..q.len() {
            let f = r[qi].clone() / &b[0];
            q[qi] = f.clone();
            for (i, bi) in b.iter().enumerate() {
                let v = bi * &f;
                r[qi + i] -= v;
            }
        }
        q
    }

    let p_q: Poly = p
        .iter()
        .map(|c| BigRational::from_integer(c.clone()))
        .collect();
    let d = p_q.len() - 1;
    let dp: Poly = (0..d)
        .map(|i| &p_q[i] * BigRational::from_integer(BigInt::from((d - i) as i64)))
        .collect();

    let mut a = p_q.clone();
    let mut b = trim(dp);
    while !(b.len() == 1 && b[0].is_zero()) {
        let r = monic(trim(rem(&a, &b)));
        a = b;
        b = r;
    }
    let gcd = monic(a);
    let sqfree = if gcd.len() == 1 {
        p_q
    } else {
        div_exact(&p_q, &gcd)
    };
    sqfree
        .iter()
        .map(|c| {
            let v = c.to_f64()?;
            (v.is_finite() && v.abs() < 9.0e15).then_some(v)
        })
        .collect()
}

fn horner(poly: &[f64], x: f64) -> (f64, f64) {
    let mut p = 0.0;
    let mut dp = 0.0;
    for &c in poly {
        dp = dp * x + p;
        p = p * x + c;
    }
    (p, dp)
}

fn horner_complex(poly: &[f64], z: Complex64) -> (Complex64, Complex64) {
    let mut p = Complex64::new(0.0, 0.0);
    let mut dp = Complex64::new(0.0, 0.0);
    for &c in poly {
        dp = dp * z + p;
        p = p * z + c;
    }
    (p, dp)
}

/// Polishes a floating eigenvalue against the exact characteristic
/// polynomial. Keeps the iterate with the smallest residual, so Newton noise
/// near multiple roots can never make the estimate worse, and iterates that
/// wander toward a different root are ignored.
fn refine_real_root(poly: &[f64], x0: f64) -> f64 {
    let mut best = x0;
    let mut best_abs = f64::INFINITY;
    let mut x = x0;
    for _ in 0..50 {
        if !x.is_finite() {
            break;
        }
        let (p, dp) = horner(poly, x);
        if (x - x0).abs() <= 0.1 * (1.0 + x0.abs()) && p.abs() < best_abs {
            best = x;
            best_abs = p.abs();
        }
        if dp.abs() < 1e-300 || p == 0.0 {
            break;
        }
        x -= p / dp;
    }
    best
}

fn refine_complex_root(poly: &[f64], z0: Complex64) -> Complex64 {
    let mut best = z0;
    let mut best_abs = f64::INFINITY;
    let mut z = z0;
    for _ in 0..50 {
        if !z.re.is_finite() || !z.im.is_finite() {
            break;
        }
        let (p, dp) = horner_complex(poly, z);
        if (z - z0).norm() <= 0.1 * (1.0 + z0.norm()) && p.norm() < best_abs {
            best = z;
            best_abs = p.norm();
        }
        if dp.norm() < 1e-300 || p.norm() == 0.0 {
            break;
        }
        z -= p / dp;
    }
    best
}

/// Runs the retry loop: random combination, real Schur, conjugate every
/// generator, accept when all of them are block-triangular in the shared
/// frame.
fn common_triangularization(
    action: &IntegerMatrixAction,
) -> Result<Triangularization, ActionError> {
    let d = action.dim();
    let k = action.rank();
    let gens: Vec<DMatrix<f64>> = action.generators().iter().map(|g| g.to_f64()).collect();
    let polys: Vec<Option<Vec<f64>>> = action
        .generators()
        .iter()
        .map(|g| square_free_f64(&char_poly_bigint(g)))
        .collect();
    let mut last_residual = f64::NAN;

    for attempt in 0..MAX_COMBINATION_ATTEMPTS {
        let mu = combination_coefficients(attempt, k);
        let mut comb = DMatrix::<f64>::zeros(d, d);
        for (g, &m) in gens.iter().zip(&mu) {
            comb += g * m;
        }
        let scales = balance_scales(&comb);
        let balanced = apply_balance(&comb, &scales);
        let Some(schur) = Schur::try_new(balanced, 1e-14, 20_000) else {
            continue;
        };
        let (q, t) = schur.unpack();
        let scale_t = t.iter().fold(0.0f64, |a, v| a.max(v.abs())).max(1.0);
        // Block partition of the quasi-triangular factor.
        let mut starts: Vec<(usize, usize)> = Vec::new();
        let mut i = 0;
        while i < d {
            if i + 1 < d && t[(i + 1, i)].abs() > 1e-10 * scale_t {
                starts.push((i, 2));
                i += 2;
            } else {
                starts.push((i, 1));
                i += 1;
            }
        }
        let block_of = |row: usize| starts.iter().position(|&(s, z)| row >= s && row < s + z);

        let mut transformed = Vec::with_capacity(k);
        let mut ok = true;
        for g in &gens {
            let gb = apply_balance(g, &scales);
            let tg = q.transpose() * &gb * &q;
            let scale = gb.norm().max(1.0);
            let mut residual = 0.0f64;
            for r in 0..d {
                for c in 0..d {
                    if block_of(r) > block_of(c) {
                        residual = residual.max(tg[(r, c)].abs());
                    }
                }
            }
            if residual > TRIANGULAR_RESIDUAL * scale {
                last_residual = residual / scale;
                ok = false;
                break;
            }
            transformed.push(tg);
        }
        if !ok {
            continue;
        }

        let mut blocks = Vec::with_capacity(starts.len());
        for &(start, size) in &starts {
            let mut coeffs = Vec::with_capacity(k);
            for (j, tg) in transformed.iter().enumerate() {
                // Raw Schur values of non-normal conjugates can be several
                // orders worse than 1e-9; polish against the exact
                // characteristic polynomial.
                let log_mod = if size == 1 {
                    let raw = tg[(start, start)];
                    let lam = match &polys[j] {
                        Some(p) => refine_real_root(p, raw),
                        None => raw,
                    };
                    lam.abs().ln()
                } else {
                    let tr = tg[(start, start)] + tg[(start + 1, start + 1)];
                    let det = tg[(start, start)] * tg[(start + 1, start + 1)]
                        - tg[(start, start + 1)] * tg[(start + 1, start)];
                    let disc = 4.0 * det - tr * tr;
                    match &polys[j] {
                        Some(p) if disc > 0.0 => {
                            let z = refine_complex_root(
                                p,
                                Complex64::new(tr / 2.0, disc.sqrt() / 2.0),
                            );
                            z.norm().ln()
                        }
                        Some(p) if disc.abs() <= 1e-6 * (tr * tr + det.abs()) => {
                            refine_real_root(p, tr / 2.0).abs().ln()
                        }
                        _ => 0.5 * det.abs().ln(),
                    }
                };
                coeffs.push(log_mod);
            }
            let eig = if size == 1 {
                BlockEig::Real(t[(start, start)])
            } else {
                BlockEig::Pair {
                    trace: t[(start, start)] + t[(start + 1, start + 1)],
                    det: t[(start, start)] * t[(start + 1, start + 1)]
                        - t[(start, start + 1)] * t[(start + 1, start)],
                }
            };
            blocks.push(BlockData { size, coeffs, eig });
        }

        // det ±1 forces the multiplicity-weighted exponent sum to vanish;
        // a violation means the extraction went numerically wrong.
        let balanced = (0..k).all(|j| {
            blocks
                .iter()
                .map(|b| b.size as f64 * b.coeffs[j])
                .sum::<f64>()
                .abs()
                < 1e-9
        });
        if !balanced {
            continue;
        }

        return Ok(Triangularization {
            combination: comb,
            blocks,
        });
    }
    Err(ActionError::EigenFailure(format!(
        "no separating combination after {MAX_COMBINATION_ATTEMPTS} attempts \
         (last residual {last_residual:.3e})"
    )))
}

fn combination_coefficients(attempt: usize, k: usize) -> Vec<f64> {
    if attempt == 0 {
        // Square roots of primes: rationally independent, separates the
        // joint spectrum except in contrived cases handled by the retries.
        let primes = [2.0f64, 3.0, 5.0, 7.0, 11.0, 13.0, 17.0, 19.0];
        return (0..k).map(|j| primes[j % primes.len()].sqrt()).collect();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(attempt as u64);
    (0..k)
        .map(|_| {
            let mag: f64 = rng.gen_range(0.3..1.7);
            let sign = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
            mag * sign
        })
        .collect()
}

fn sup_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

/// Transitive clustering of functional coefficient vectors at `tol`.
fn cluster(blocks: &[BlockData], tol: f64) -> Vec<LyapunovFunctional> {
    let n = blocks.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut Vec<usize>, i: usize) -> usize {
        if parent[i] != i {
            let root = find(parent, parent[i]);
            parent[i] = root;
        }
        parent[i]
    }
    for i in 0..n {
        for j in i + 1..n {
            if sup_distance(&blocks[i].coeffs, &blocks[j].coeffs) <= tol {
                let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                if ri != rj {
                    parent[ri] = rj;
                }
            }
        }
    }
    let mut groups: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
    for i in 0..n {
        let r = find(&mut parent, i);
        groups.entry(r).or_default().push(i);
    }
    let k = blocks.first().map(|b| b.coeffs.len()).unwrap_or(0);
    let mut out: Vec<LyapunovFunctional> = groups
        .values()
        .map(|members| {
            let mult: usize = members.iter().map(|&i| blocks[i].size).sum();
            let mut coeffs = vec![0.0; k];
            for &i in members {
                for j in 0..k {
                    coeffs[j] += blocks[i].coeffs[j] * blocks[i].size as f64;
                }
            }
            for c in coeffs.iter_mut() {
                *c /= mult as f64;
            }
            LyapunovFunctional {
                coeffs,
                multiplicity: mult,
                orbit_direction: false,
            }
        })
        .collect();
    sort_functionals(&mut out);
    out
}

fn sort_functionals(fs: &mut [LyapunovFunctional]) {
    fs.sort_by(|a, b| {
        a.orbit_direction
            .cmp(&b.orbit_direction)
            .then_with(|| b.coeffs.partial_cmp(&a.coeffs).unwrap_or(std::cmp::Ordering::Equal))
    });
}

/// Computes the distinct joint Lyapunov functionals with multiplicities.
///
/// Functionals within `tol` (sup distance of coefficient vectors) are merged
/// with summed multiplicities. When the grouping at `tol` and at `2·tol`
/// disagree the merge is ill-determined and both candidates are reported in
/// the `ToleranceAmbiguity` error.
pub fn compute_spectrum(
    action: &IntegerMatrixAction,
    tol: f64,
) -> Result<LyapunovSpectrum, ActionError> {
    assert!(tol > 0.0, "grouping tolerance must be positive");
    let tri = common_triangularization(action)?;
    let tight = cluster(&tri.blocks, tol);
    let loose = cluster(&tri.blocks, 2.0 * tol);
    if tight.len() != loose.len() {
        return Err(ActionError::ToleranceAmbiguity { tight, loose });
    }
    Ok(LyapunovSpectrum {
        functionals: tight,
        dim: action.dim(),
        rank: action.rank(),
        grouping_tolerance: tol,
    })
}

/// An action together with its spectrum and a basis of ℝᵈ adapted to the
/// Lyapunov splitting (columns grouped per functional, unit length).
#[derive(Debug, Clone)]
pub struct JointFrame {
    pub action: IntegerMatrixAction,
    pub spectrum: LyapunovSpectrum,
    /// Columns span the Lyapunov subspaces, in spectrum order.
    pub basis: DMatrix<f64>,
    pub basis_inv: DMatrix<f64>,
    /// Functional index of each basis column.
    pub column_functional: Vec<usize>,
}

/// Builds the adapted basis through spectral projectors of a separating
/// combination: for each functional class, annihilate every other class with
/// (powers of) its characteristic factors and read the class subspace off
/// the image.
pub fn joint_frame(action: &IntegerMatrixAction, tol: f64) -> Result<JointFrame, ActionError> {
    let spectrum = compute_spectrum(action, tol)?;
    let tri = common_triangularization(action)?;
    let d = action.dim();

    // Eigenvalues of the combination per block (needed for the factors).
    let comb = &tri.combination;
    let mut block_class: Vec<usize> = Vec::with_capacity(tri.blocks.len());
    for b in &tri.blocks {
        let class = spectrum
            .functionals
            .iter()
            .position(|f| sup_distance(&f.coeffs, &b.coeffs) <= 2.0 * tol)
            .ok_or_else(|| {
                ActionError::EigenFailure("block does not match any merged functional".into())
            })?;
        block_class.push(class);
    }

    let mut basis = DMatrix::<f64>::zeros(d, d);
    let mut column_functional = Vec::with_capacity(d);
    let mut col = 0usize;
    for (fi, f) in spectrum.functionals.iter().enumerate() {
        let mut proj = DMatrix::<f64>::identity(d, d);
        for (bi, b) in tri.blocks.iter().enumerate() {
            if block_class[bi] == fi {
                continue;
            }
            let factor = match b.eig {
                BlockEig::Real(lambda) => {
                    let scale = lambda.abs().max(1.0);
                    (comb - DMatrix::identity(d, d) * lambda) / scale
                }
                BlockEig::Pair { trace, det } => {
                    let scale = det.abs().max(1.0);
                    (comb * comb - comb * trace + DMatrix::identity(d, d) * det) / scale
                }
            };
            for _ in 0..b.size.max(1) {
                proj = &proj * &factor;
            }
            // Extra applications flush any Jordan coupling.
            proj = &proj * &factor;
            let m = proj.iter().fold(0.0f64, |a, v| a.max(v.abs()));
            if m > 0.0 {
                proj /= m;
            }
        }
        let svd = proj.svd(true, false);
        let u = svd
            .u
            .as_ref()
            .ok_or_else(|| ActionError::EigenFailure("SVD failed on spectral projector".into()))?;
        let sv = &svd.singular_values;
        let mult = f.multiplicity;
        if mult < d {
            let leading = sv[0].max(1e-300);
            if sv[mult - 1] < 1e-8 * leading || sv[mult] > 1e-6 * leading {
                return Err(ActionError::EigenFailure(format!(
                    "projector rank does not match multiplicity {mult} \
                     (σ_{} = {:.3e}, σ_{} = {:.3e})",
                    mult - 1,
                    sv[mult - 1],
                    mult,
                    sv[mult]
                )));
            }
        }
        for j in 0..mult {
            basis.set_column(col, &u.column(j));
            column_functional.push(fi);
            col += 1;
        }
    }
    debug_assert_eq!(col, d);

    let basis_inv = basis.clone().try_inverse().ok_or_else(|| {
        ActionError::EigenFailure("adapted basis is numerically singular".into())
    })?;
    Ok(JointFrame {
        action: action.clone(),
        spectrum,
        basis,
        basis_inv,
        column_functional,
    })
}
