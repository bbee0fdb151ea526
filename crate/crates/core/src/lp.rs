//! Dense two-phase simplex for the tiny linear programs the crate needs:
//! sign-vector feasibility with margin (chamber enumeration) and the
//! Minkowski gauge / support function of a vertex-presented polytope.
//!
//! Problems here have at most a few dozen variables, so a tableau simplex
//! with Bland's rule (no cycling) is entirely adequate.

const PIVOT_TOL: f64 = 1e-11;
const COST_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub enum LpOutcome {
    /// Optimal solution and objective value of `min c·x, Ax = b, x ≥ 0`.
    Optimal { x: Vec<f64>, value: f64 },
    Infeasible,
    Unbounded,
}

/// Minimize `c·x` subject to `a x = b`, `x ≥ 0`.
pub fn simplex_min(a: &[Vec<f64>], b: &[f64], c: &[f64]) -> LpOutcome {
    let m = a.len();
    let n = c.len();
    assert!(a.iter().all(|row| row.len() == n));
    assert_eq!(b.len(), m);

    // Tableau with artificial columns appended; rhs forced nonnegative.
    let mut t: Vec<Vec<f64>> = Vec::with_capacity(m);
    for i in 0..m {
        let mut row: Vec<f64> = if b[i] < 0.0 {
            a[i].iter().map(|v| -v).collect()
        } else {
            a[i].clone()
        };
        row.extend((0..m).map(|j| if j == i { 1.0 } else { 0.0 }));
        row.push(b[i].abs());
        t.push(row);
    }
    let total = n + m;
    let mut basis: Vec<usize> = (n..n + m).collect();

    // Phase 1: minimize the sum of artificials.
    let phase1_cost: Vec<f64> = (0..total)
        .map(|j| if j >= n { 1.0 } else { 0.0 })
        .collect();
    if !run_phase(&mut t, &mut basis, &phase1_cost, total) {
        return LpOutcome::Unbounded; // cannot happen: phase 1 is bounded below by 0
    }
    let residual: f64 = basis
        .iter()
        .enumerate()
        .filter(|(_, &bj)| bj >= n)
        .map(|(i, _)| t[i][total])
        .sum();
    if residual > 1e-7 {
        return LpOutcome::Infeasible;
    }
    // Pivot leftover artificials out of the basis when possible.
    for i in 0..m {
        if basis[i] >= n {
            if let Some(j) = (0..n).find(|&j| t[i][j].abs() > PIVOT_TOL) {
                pivot(&mut t, &mut basis, i, j, total);
            }
        }
    }

    // Phase 2 on the original objective; artificial columns are frozen out.
    if !run_phase(&mut t, &mut basis, c, n) {
        return LpOutcome::Unbounded;
    }

    let mut x = vec![0.0; n];
    for (i, &bj) in basis.iter().enumerate() {
        if bj < n {
            x[bj] = t[i][total];
        }
    }
    let value = c.iter().zip(&x).map(|(ci, xi)| ci * xi).sum();
    LpOutcome::Optimal { x, value }
}

/// Bland's rule iterations over the first `active` columns.
/// Returns false when the problem is unbounded.
fn run_phase(t: &mut [Vec<f64>], basis: &mut [usize], cost: &[f64], active: usize) -> bool {
    let m = t.len();
    let rhs = t[0].len() - 1;
    loop {
        // Reduced costs z_j - c_j for nonbasic columns.
        let mut entering = None;
        for j in 0..active {
            if basis.contains(&j) {
                continue;
            }
            let zj: f64 = (0..m).map(|i| cost_of(cost, basis[i]) * t[i][j]).sum();
            if zj - cost_of(cost, j) > COST_TOL {
                entering = Some(j);
                break; // Bland: first improving index
            }
        }
        let Some(e) = entering else {
            return true;
        };
        let mut leave: Option<usize> = None;
        let mut best = f64::INFINITY;
        for i in 0..m {
            if t[i][e] > PIVOT_TOL {
                let ratio = t[i][rhs] / t[i][e];
                if ratio < best - PIVOT_TOL
                    || (ratio < best + PIVOT_TOL
                        && leave.map(|l| basis[i] < basis[l]).unwrap_or(true))
                {
                    best = ratio;
                    leave = Some(i);
                }
            }
        }
        let Some(l) = leave else {
            return false;
        };
        pivot(t, basis, l, e, rhs);
    }
}

fn cost_of(cost: &[f64], j: usize) -> f64 {
    cost.get(j).copied().unwrap_or(0.0)
}

fn pivot(t: &mut [Vec<f64>], basis: &mut [usize], row: usize, col: usize, rhs: usize) {
    let p = t[row][col];
    for v in t[row].iter_mut() {
        *v /= p;
    }
    for i in 0..t.len() {
        if i != row && t[i][col].abs() > 0.0 {
            let f = t[i][col];
            for j in 0..=rhs {
                t[i][j] -= f * t[row][j];
            }
        }
    }
    basis[row] = col;
}

/// Largest margin δ such that some `t` with `‖t‖∞ ≤ 1` satisfies
/// `signs[j] · (normals[j] · t) ≥ δ` for every j. Returns the witness and δ.
///
/// δ ≤ 0 means the open sign region is empty (up to solver tolerance).
pub fn max_margin_point(normals: &[Vec<f64>], signs: &[i8]) -> Option<(Vec<f64>, f64)> {
    let k = normals.first()?.len();
    let m = normals.len();
    // Variables: u(k), v(k) with t = u - v, delta, w(m), p(k), q(k), r.
    let n = 2 * k + 1 + m + 2 * k + 1;
    let iu = 0;
    let iv = k;
    let idelta = 2 * k;
    let iw = 2 * k + 1;
    let ip = iw + m;
    let iq = ip + k;
    let ir = iq + k;

    let mut a = Vec::new();
    let mut b = Vec::new();
    for (j, nrm) in normals.iter().enumerate() {
        let mut row = vec![0.0; n];
        let s = signs[j] as f64;
        for i in 0..k {
            row[iu + i] = s * nrm[i];
            row[iv + i] = -s * nrm[i];
        }
        row[idelta] = -1.0;
        row[iw + j] = -1.0;
        a.push(row);
        b.push(0.0);
    }
    for i in 0..k {
        let mut row = vec![0.0; n];
        row[iu + i] = 1.0;
        row[ip + i] = 1.0;
        a.push(row);
        b.push(1.0);
        let mut row = vec![0.0; n];
        row[iv + i] = 1.0;
        row[iq + i] = 1.0;
        a.push(row);
        b.push(1.0);
    }
    {
        // delta is bounded so the LP stays bounded.
        let mut row = vec![0.0; n];
        row[idelta] = 1.0;
        row[ir] = 1.0;
        a.push(row);
        b.push(2.0 * (k as f64).sqrt());
    }
    let mut c = vec![0.0; n];
    c[idelta] = -1.0;

    match simplex_min(&a, &b, &c) {
        LpOutcome::Optimal { x, value } => {
            let t: Vec<f64> = (0..k).map(|i| x[iu + i] - x[iv + i]).collect();
            Some((t, -value))
        }
        _ => None,
    }
}

/// Minkowski gauge of the convex hull of `vertices` at `point`:
/// `min { Σ μ_i : Σ μ_i v_i = point, μ ≥ 0 }`.
pub fn hull_gauge(vertices: &[Vec<f64>], point: &[f64]) -> Option<f64> {
    let k = point.len();
    let m = vertices.len();
    let a: Vec<Vec<f64>> = (0..k)
        .map(|row| vertices.iter().map(|v| v[row]).collect())
        .collect();
    let c = vec![1.0; m];
    match simplex_min(&a, point, &c) {
        LpOutcome::Optimal { value, .. } => Some(value.max(0.0)),
        _ => None,
    }
}

/// `max { c · x : x ∈ conv(vertices) }` solved as an LP over barycentric
/// weights. Used as the cross-check route against vertex enumeration.
pub fn hull_support_lp(vertices: &[Vec<f64>], c: &[f64]) -> Option<f64> {
    let m = vertices.len();
    let a = vec![vec![1.0; m]];
    let b = vec![1.0];
    let cost: Vec<f64> = vertices
        .iter()
        .map(|v| -v.iter().zip(c).map(|(vi, ci)| vi * ci).sum::<f64>())
        .collect();
    match simplex_min(&a, &b, &cost) {
        LpOutcome::Optimal { value, .. } => Some(-value),
        _ => None,
    }
}
