//! The Lyapunov hyperplane arrangement in ℝᵏ: the kernels ker χᵢ of the
//! nonzero functionals, the Weyl chambers they cut out, regular/singular
//! classification, and selection of generic elements.
//!
//! Chamber enumeration is exact for k ≤ 2 (angle sorting) and
//! feasibility-certified (margin LP) for k ∈ {3, 4}; larger ranks are
//! rejected rather than silently sampled.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::action::LyapunovSpectrum;
use crate::lp;
use crate::norms::{NormError, NormSpec};
use crate::sampling::halton_directions;

/// Functionals with all coefficients below this are treated as zero.
const ZERO_FUNCTIONAL_TOL: f64 = 1e-10;
/// Two unit normals are the same hyperplane when they differ by less than
/// this after sign normalization.
const PARALLEL_TOL: f64 = 1e-9;
/// Representatives must clear every hyperplane by this relative margin.
const REPRESENTATIVE_MARGIN: f64 = 1e-6;
/// Below this margin a sign vector counts as not realized at all.
const FEASIBLE_MARGIN: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ChamberError {
    #[error("AllZeroSpectrum: no nonzero functional, no hyperbolicity anywhere")]
    AllZeroSpectrum,
    #[error("RankTooLarge: exact enumeration is guaranteed only for k <= 4, got {0}")]
    RankTooLarge(usize),
    #[error(
        "DegenerateArrangement: sign vector {sign_vector:?} separable only at margin {margin:.3e}"
    )]
    DegenerateArrangement { sign_vector: Vec<i8>, margin: f64 },
    #[error("ZeroVector")]
    ZeroVector,
    #[error("NoSeparatingElement: best separation score {0:.3e}")]
    NoSeparatingElement(f64),
    #[error(transparent)]
    Norm(#[from] NormError),
}

/// The Lyapunov hyperplanes, one unit normal per projective class of
/// nonzero functional coefficients.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HyperplaneArrangement {
    pub rank: usize,
    /// Unit normals, sign-normalized (first nonzero coordinate positive).
    pub normals: Vec<Vec<f64>>,
    /// Spectrum indices of the functionals whose kernel each normal is.
    pub source_indices: Vec<Vec<usize>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Chamber {
    /// Entry j is the sign of `normals[j] · t` throughout the chamber.
    pub sign_vector: Vec<i8>,
    /// A unit vector strictly inside the chamber.
    pub representative: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Classification {
    Regular { signs: Vec<i8> },
    Singular { hyperplanes: Vec<usize> },
}

/// Builds the arrangement: zero and orbit-direction functionals contribute
/// nothing; proportional functionals share one normal.
pub fn lyapunov_hyperplanes(
    spec: &LyapunovSpectrum,
) -> Result<HyperplaneArrangement, ChamberError> {
    let mut normals: Vec<Vec<f64>> = Vec::new();
    let mut source_indices: Vec<Vec<usize>> = Vec::new();
    for (idx, f) in spec.non_orbit() {
        if f.is_zero(ZERO_FUNCTIONAL_TOL) {
            continue;
        }
        let norm: f64 = f.coeffs.iter().map(|c| c * c).sum::<f64>().sqrt();
        let mut unit: Vec<f64> = f.coeffs.iter().map(|c| c / norm).collect();
        if let Some(first) = unit.iter().find(|c| c.abs() > 1e-9) {
            if *first < 0.0 {
                for c in unit.iter_mut() {
                    *c = -*c;
                }
            }
        }
        match normals.iter().position(|n| sup_dist(n, &unit) <= PARALLEL_TOL) {
            Some(j) => source_indices[j].push(idx),
            None => {
                normals.push(unit);
                source_indices.push(vec![idx]);
            }
        }
    }
    if normals.is_empty() {
        return Err(ChamberError::AllZeroSpectrum);
    }
    Ok(HyperplaneArrangement {
        rank: spec.rank,
        normals,
        source_indices,
    })
}

/// Complete list of Weyl chambers. k = 1 gives the two half-lines; k = 2 is
/// done by circular sorting of the hyperplane directions (exactly 2n
/// chambers); k ∈ {3, 4} runs a margin-certified feasibility check over the
/// sign assignments reachable by inserting one hyperplane at a time.
pub fn enumerate_chambers(arr: &HyperplaneArrangement) -> Result<Vec<Chamber>, ChamberError> {
    match arr.rank {
        0 => Err(ChamberError::AllZeroSpectrum),
        1 => Ok(vec![
            Chamber {
                sign_vector: vec![1; arr.normals.len()],
                representative: vec![1.0],
            },
            Chamber {
                sign_vector: vec![-1; arr.normals.len()],
                representative: vec![-1.0],
            },
        ]),
        2 => enumerate_2d(arr),
        3 | 4 => enumerate_by_insertion(arr),
        k => Err(ChamberError::RankTooLarge(k)),
    }
}

fn enumerate_2d(arr: &HyperplaneArrangement) -> Result<Vec<Chamber>, ChamberError> {
    // Each hyperplane is the line through 0 perpendicular to its normal; its
    // two boundary directions split the circle into 2n sectors.
    let mut boundary: Vec<f64> = Vec::with_capacity(2 * arr.normals.len());
    for n in &arr.normals {
        let phi = (-n[0]).atan2(n[1]); // direction along the line
        boundary.push(angle_mod_tau(phi));
        boundary.push(angle_mod_tau(phi + std::f64::consts::PI));
    }
    boundary.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let count = boundary.len();
    let mut chambers = Vec::with_capacity(count);
    for i in 0..count {
        let lo = boundary[i];
        let hi = if i + 1 < count {
            boundary[i + 1]
        } else {
            boundary[0] + std::f64::consts::TAU
        };
        let mid = (lo + hi) / 2.0;
        let rep = vec![mid.cos(), mid.sin()];
        let mut signs = Vec::with_capacity(arr.normals.len());
        let mut margin = f64::INFINITY;
        for n in &arr.normals {
            let d = n[0] * rep[0] + n[1] * rep[1];
            margin = margin.min(d.abs());
            signs.push(if d >= 0.0 { 1 } else { -1 });
        }
        if margin < REPRESENTATIVE_MARGIN {
            return Err(ChamberError::DegenerateArrangement {
                sign_vector: signs,
                margin,
            });
        }
        chambers.push(Chamber {
            sign_vector: signs,
            representative: rep,
        });
    }
    Ok(chambers)
}

fn angle_mod_tau(a: f64) -> f64 {
    let mut a = a % std::f64::consts::TAU;
    if a < 0.0 {
        a += std::f64::consts::TAU;
    }
    a
}

fn enumerate_by_insertion(arr: &HyperplaneArrangement) -> Result<Vec<Chamber>, ChamberError> {
    let mut chambers: Vec<Chamber> = vec![
        Chamber {
            sign_vector: vec![1],
            representative: arr.normals[0].clone(),
        },
        Chamber {
            sign_vector: vec![-1],
            representative: arr.normals[0].iter().map(|x| -x).collect(),
        },
    ];
    for h in 1..arr.normals.len() {
        let active = &arr.normals[..=h];
        let mut next = Vec::with_capacity(chambers.len() * 2);
        for chamber in &chambers {
            for cand in [1i8, -1i8] {
                let mut signs = chamber.sign_vector.clone();
                signs.push(cand);
                // Fast path: the old representative may already sit strictly
                // on the candidate side.
                let d = dot(&arr.normals[h], &chamber.representative);
                if (d.signum() as i8 == cand) && d.abs() >= REPRESENTATIVE_MARGIN {
                    next.push(Chamber {
                        sign_vector: signs,
                        representative: chamber.representative.clone(),
                    });
                    continue;
                }
                let Some((t, margin)) = lp::max_margin_point(active, &signs) else {
                    continue;
                };
                let norm: f64 = t.iter().map(|x| x * x).sum::<f64>().sqrt();
                if margin <= FEASIBLE_MARGIN || norm == 0.0 {
                    continue;
                }
                let rep: Vec<f64> = t.iter().map(|x| x / norm).collect();
                let rel_margin = margin / norm;
                if rel_margin < REPRESENTATIVE_MARGIN {
                    return Err(ChamberError::DegenerateArrangement {
                        sign_vector: signs,
                        margin: rel_margin,
                    });
                }
                next.push(Chamber {
                    sign_vector: signs,
                    representative: rep,
                });
            }
        }
        chambers = next;
    }
    // Re-derive the final sign vectors from the representatives so the fast
    // path cannot leave a stale prefix.
    for c in chambers.iter_mut() {
        for (j, n) in arr.normals.iter().enumerate() {
            c.sign_vector[j] = if dot(n, &c.representative) >= 0.0 { 1 } else { -1 };
        }
    }
    Ok(chambers)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn sup_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

/// Regular (with the chamber sign vector) when every nonzero functional
/// clears `tol·‖t‖`; otherwise singular with the list of hyperplanes met.
pub fn classify_element(
    spec: &LyapunovSpectrum,
    t: &[f64],
    tol: f64,
) -> Result<Classification, ChamberError> {
    let norm: f64 = t.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm == 0.0 {
        return Err(ChamberError::ZeroVector);
    }
    let arr = lyapunov_hyperplanes(spec)?;
    let mut singular = Vec::new();
    for (j, sources) in arr.source_indices.iter().enumerate() {
        let min_chi = sources
            .iter()
            .map(|&i| spec.functionals[i].evaluate(t).abs())
            .fold(f64::INFINITY, f64::min);
        if min_chi <= tol * norm {
            singular.push(j);
        }
    }
    if singular.is_empty() {
        let signs = arr
            .normals
            .iter()
            .map(|n| if dot(n, t) >= 0.0 { 1 } else { -1 })
            .collect();
        Ok(Classification::Regular { signs })
    } else {
        Ok(Classification::Singular {
            hyperplanes: singular,
        })
    }
}

/// Separation score: min( minᵢ |χᵢ(t)| , min_{i≠j} |χᵢ(t) − χⱼ(t)| ) over
/// the nonzero functionals — the numerical surrogate for "no extra zero
/// exponent" and "no two exponents coincide".
pub fn separation_score(spec: &LyapunovSpectrum, t: &[f64]) -> f64 {
    let values: Vec<f64> = spec
        .non_orbit()
        .filter(|(_, f)| !f.is_zero(ZERO_FUNCTIONAL_TOL))
        .map(|(_, f)| f.evaluate(t))
        .collect();
    if values.is_empty() {
        return 0.0;
    }
    let mut score = values.iter().map(|v| v.abs()).fold(f64::INFINITY, f64::min);
    for i in 0..values.len() {
        for j in i + 1..values.len() {
            score = score.min((values[i] - values[j]).abs());
        }
    }
    score
}

/// Picks an element of the unit ball maximizing the separation score over a
/// deterministic low-discrepancy boundary sample followed by coordinate-wise
/// refinement. Ergodicity of the returned element is NOT certified: regular
/// with separated exponents is a necessary condition only.
pub fn pick_generic_element(
    spec: &LyapunovSpectrum,
    norm: &NormSpec,
    samples: usize,
) -> Result<Vec<f64>, ChamberError> {
    assert!(samples >= 1, "need at least one sample");
    let k = spec.rank;
    let mut best_t: Option<Vec<f64>> = None;
    let mut best_score = f64::NEG_INFINITY;
    for dir in halton_directions(samples, k) {
        let p = norm.value(&dir)?;
        if p <= 0.0 {
            continue;
        }
        let t: Vec<f64> = dir.iter().map(|x| x / p).collect();
        let score = separation_score(spec, &t);
        if score > best_score {
            best_score = score;
            best_t = Some(t);
        }
    }
    let mut t = best_t.ok_or(ChamberError::NoSeparatingElement(0.0))?;

    let mut step = 0.25f64;
    while step > 1e-9 {
        let mut improved = false;
        for i in 0..k {
            for dir in [1.0, -1.0] {
                let mut cand = t.clone();
                cand[i] += dir * step;
                let p = norm.value(&cand)?;
                if p > 1.0 {
                    for c in cand.iter_mut() {
                        *c /= p;
                    }
                }
                let score = separation_score(spec, &cand);
                if score > best_score + 1e-15 {
                    best_score = score;
                    t = cand;
                    improved = true;
                }
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    if best_score < 1e-9 {
        return Err(ChamberError::NoSeparatingElement(best_score));
    }
    Ok(t)
}
