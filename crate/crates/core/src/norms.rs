//! Norms on the acting group ℝᵏ: evaluation, support functions (dual norms)
//! with witnessing maximizers, and unit-ball volumes.
//!
//! The closed family is deliberately small — every member has a computable
//! gauge, support function and exact unit-ball volume, which is what the
//! entropy formula and the window enumeration need.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry;
use crate::lp;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NormError {
    #[error("DimensionMismatch: norm expects dimension {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("NonPositiveWeight: weighted box weights must be strictly positive")]
    NonPositiveWeight,
    #[error("PolytopeAsymmetric: vertex {0} has no mirror vertex within 1e-12")]
    PolytopeAsymmetric(usize),
    #[error("PolytopeDegenerate: vertices do not span the space")]
    PolytopeDegenerate,
    #[error("EllipsoidAsymmetric: matrix is not symmetric within 1e-12")]
    EllipsoidAsymmetric,
    #[error("EllipsoidNotPositiveDefinite")]
    EllipsoidNotPositiveDefinite,
    #[error("GaugeFailure: linear program for the polytope gauge did not solve")]
    GaugeFailure,
}

/// A norm `p` on ℝᵏ with computable unit-ball volume and support function.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NormSpec {
    L1,
    L2,
    Linf,
    WeightedBox { weights: Vec<f64> },
    Polytope { vertices: Vec<Vec<f64>> },
    Ellipsoid { matrix: Vec<Vec<f64>> },
}

impl NormSpec {
    /// Intrinsic dimension for the parametrized kinds, `None` for the ℓq
    /// norms which make sense in any dimension.
    pub fn dimension(&self) -> Option<usize> {
        match self {
            NormSpec::L1 | NormSpec::L2 | NormSpec::Linf => None,
            NormSpec::WeightedBox { weights } => Some(weights.len()),
            NormSpec::Polytope { vertices } => vertices.first().map(|v| v.len()),
            NormSpec::Ellipsoid { matrix } => Some(matrix.len()),
        }
    }

    pub fn validate(&self, k: usize) -> Result<(), NormError> {
        if let Some(d) = self.dimension() {
            if d != k {
                return Err(NormError::DimensionMismatch {
                    expected: d,
                    got: k,
                });
            }
        }
        match self {
            NormSpec::L1 | NormSpec::L2 | NormSpec::Linf => Ok(()),
            NormSpec::WeightedBox { weights } => {
                if weights.iter().any(|&w| !(w > 0.0)) {
                    return Err(NormError::NonPositiveWeight);
                }
                Ok(())
            }
            NormSpec::Polytope { vertices } => {
                for (i, v) in vertices.iter().enumerate() {
                    if v.len() != k {
                        return Err(NormError::DimensionMismatch {
                            expected: k,
                            got: v.len(),
                        });
                    }
                    let mirrored = vertices.iter().any(|w| {
                        v.iter().zip(w).all(|(a, b)| (a + b).abs() <= 1e-12)
                    });
                    if !mirrored {
                        return Err(NormError::PolytopeAsymmetric(i));
                    }
                }
                let m = DMatrix::from_fn(k, vertices.len(), |r, c| vertices[c][r]);
                if m.rank(1e-10) < k {
                    return Err(NormError::PolytopeDegenerate);
                }
                Ok(())
            }
            NormSpec::Ellipsoid { matrix } => {
                let q = ellipsoid_matrix(matrix, k)?;
                for i in 0..k {
                    for j in 0..k {
                        if (q[(i, j)] - q[(j, i)]).abs() > 1e-12 {
                            return Err(NormError::EllipsoidAsymmetric);
                        }
                    }
                }
                if q.clone().cholesky().is_none() {
                    return Err(NormError::EllipsoidNotPositiveDefinite);
                }
                Ok(())
            }
        }
    }

    /// Evaluates `p(t)`: nonnegative, zero only at the origin, homogeneous of
    /// degree one. The polytope case is the Minkowski gauge of its hull.
    pub fn value(&self, t: &[f64]) -> Result<f64, NormError> {
        self.check_dim(t.len())?;
        match self {
            NormSpec::L1 => Ok(t.iter().map(|x| x.abs()).sum()),
            NormSpec::L2 => Ok(t.iter().map(|x| x * x).sum::<f64>().sqrt()),
            NormSpec::Linf => Ok(t.iter().map(|x| x.abs()).fold(0.0, f64::max)),
            NormSpec::WeightedBox { weights } => Ok(t
                .iter()
                .zip(weights)
                .map(|(x, w)| x.abs() / w)
                .fold(0.0, f64::max)),
            NormSpec::Polytope { vertices } => {
                if t.iter().all(|&x| x == 0.0) {
                    return Ok(0.0);
                }
                lp::hull_gauge(vertices, t).ok_or(NormError::GaugeFailure)
            }
            NormSpec::Ellipsoid { matrix } => {
                let q = ellipsoid_matrix(matrix, t.len())?;
                let v = DVector::from_column_slice(t);
                Ok((v.transpose() * q * &v)[(0, 0)].max(0.0).sqrt())
            }
        }
    }

    /// Support function of the unit ball at `c`:
    /// `max { c·t : p(t) ≤ 1 }` with a witnessing maximizer on the boundary.
    ///
    /// Tie-breaking among maximizers: minimal Euclidean norm, then
    /// lexicographically smallest (the polytope case picks among vertices).
    pub fn dual_max(&self, c: &[f64]) -> Result<(f64, Vec<f64>), NormError> {
        self.check_dim(c.len())?;
        let k = c.len();
        match self {
            NormSpec::L1 => {
                let value = c.iter().map(|x| x.abs()).fold(0.0, f64::max);
                if value == 0.0 {
                    return Ok((0.0, vec![0.0; k]));
                }
                let hits: Vec<usize> = (0..k).filter(|&j| c[j].abs() == value).collect();
                let share = 1.0 / hits.len() as f64;
                let mut arg = vec![0.0; k];
                for j in hits {
                    arg[j] = share * c[j].signum();
                }
                Ok((value, arg))
            }
            NormSpec::L2 => {
                let value = c.iter().map(|x| x * x).sum::<f64>().sqrt();
                if value == 0.0 {
                    return Ok((0.0, vec![0.0; k]));
                }
                Ok((value, c.iter().map(|x| x / value).collect()))
            }
            NormSpec::Linf => {
                let value = c.iter().map(|x| x.abs()).sum();
                let arg = c
                    .iter()
                    .map(|&x| if x == 0.0 { 0.0 } else { x.signum() })
                    .collect();
                Ok((value, arg))
            }
            NormSpec::WeightedBox { weights } => {
                let value = c.iter().zip(weights).map(|(x, w)| w * x.abs()).sum();
                let arg = c
                    .iter()
                    .zip(weights)
                    .map(|(&x, &w)| if x == 0.0 { 0.0 } else { w * x.signum() })
                    .collect();
                Ok((value, arg))
            }
            NormSpec::Polytope { vertices } => {
                let mut best = f64::NEG_INFINITY;
                for v in vertices {
                    let dot: f64 = v.iter().zip(c).map(|(a, b)| a * b).sum();
                    best = best.max(dot);
                }
                let mut witness: Option<&Vec<f64>> = None;
                for v in vertices {
                    let dot: f64 = v.iter().zip(c).map(|(a, b)| a * b).sum();
                    if dot >= best - 1e-12 {
                        witness = Some(match witness {
                            None => v,
                            Some(w) => tie_break(w, v),
                        });
                    }
                }
                Ok((best, witness.expect("nonempty vertex list").clone()))
            }
            NormSpec::Ellipsoid { matrix } => {
                let q = ellipsoid_matrix(matrix, k)?;
                let rhs = DVector::from_column_slice(c);
                let sol = q
                    .lu()
                    .solve(&rhs)
                    .ok_or(NormError::EllipsoidNotPositiveDefinite)?;
                let value = sol
                    .iter()
                    .zip(c)
                    .map(|(a, b)| a * b)
                    .sum::<f64>()
                    .max(0.0)
                    .sqrt();
                if value == 0.0 {
                    return Ok((0.0, vec![0.0; k]));
                }
                Ok((value, sol.iter().map(|x| x / value).collect()))
            }
        }
    }

    /// Lebesgue volume of the unit ball `{ t : p(t) ≤ 1 }` in ℝᵏ.
    pub fn unit_ball_volume(&self, k: usize) -> Result<f64, NormError> {
        self.validate(k)?;
        match self {
            NormSpec::L1 => Ok(2f64.powi(k as i32) / factorial(k)),
            NormSpec::L2 => Ok(euclidean_ball_volume(k)),
            NormSpec::Linf => Ok(2f64.powi(k as i32)),
            NormSpec::WeightedBox { weights } => {
                Ok(2f64.powi(k as i32) * weights.iter().product::<f64>())
            }
            NormSpec::Polytope { vertices } => {
                geometry::convex_hull_volume(vertices).ok_or(NormError::PolytopeDegenerate)
            }
            NormSpec::Ellipsoid { matrix } => {
                let q = ellipsoid_matrix(matrix, k)?;
                let det = q.determinant();
                if det <= 0.0 {
                    return Err(NormError::EllipsoidNotPositiveDefinite);
                }
                Ok(euclidean_ball_volume(k) / det.sqrt())
            }
        }
    }

    fn check_dim(&self, got: usize) -> Result<(), NormError> {
        match self.dimension() {
            Some(d) if d != got => Err(NormError::DimensionMismatch { expected: d, got }),
            _ => Ok(()),
        }
    }
}

fn tie_break<'a>(a: &'a Vec<f64>, b: &'a Vec<f64>) -> &'a Vec<f64> {
    let na: f64 = a.iter().map(|x| x * x).sum();
    let nb: f64 = b.iter().map(|x| x * x).sum();
    if (na - nb).abs() > 1e-12 {
        return if na < nb { a } else { b };
    }
    match b.partial_cmp(a) {
        Some(std::cmp::Ordering::Less) => b,
        _ => a,
    }
}

fn ellipsoid_matrix(matrix: &[Vec<f64>], k: usize) -> Result<DMatrix<f64>, NormError> {
    if matrix.len() != k || matrix.iter().any(|r| r.len() != k) {
        return Err(NormError::DimensionMismatch {
            expected: k,
            got: matrix.len(),
        });
    }
    Ok(DMatrix::from_fn(k, k, |i, j| matrix[i][j]))
}

fn factorial(k: usize) -> f64 {
    (1..=k).product::<usize>() as f64
}

/// ω_k = π^{k/2} / Γ(k/2 + 1).
pub fn euclidean_ball_volume(k: usize) -> f64 {
    std::f64::consts::PI.powf(k as f64 / 2.0) / gamma_half(k + 2)
}

/// Γ(n/2) for positive integer n.
fn gamma_half(n: usize) -> f64 {
    if n % 2 == 0 {
        factorial(n / 2 - 1)
    } else {
        // Γ(m + 1/2) = (2m)! / (4^m m!) √π with m = (n-1)/2.
        let m = (n - 1) / 2;
        factorial(2 * m) / (4f64.powi(m as i32) * factorial(m)) * std::f64::consts::PI.sqrt()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn diamond() -> NormSpec {
        NormSpec::Polytope {
            vertices: vec![
                vec![1.0, 0.0],
                vec![-1.0, 0.0],
                vec![0.0, 2.0],
                vec![0.0, -2.0],
            ],
        }
    }

    #[test]
    fn linf_value() {
        assert_eq!(NormSpec::Linf.value(&[3.0, -4.0]).unwrap(), 4.0);
    }

    #[test]
    fn weighted_box_boundary() {
        let n = NormSpec::WeightedBox {
            weights: vec![0.5849, 0.4274],
        };
        let v = n.value(&[0.5849, 0.0]).unwrap();
        assert!((v - 1.0).abs() < 1e-12);
    }

    #[test]
    fn polytope_gauge_of_diamond() {
        let v = diamond().value(&[0.0, 1.0]).unwrap();
        assert!((v - 0.5).abs() < 1e-9, "gauge should be 0.5, got {v}");
    }

    #[test]
    fn dual_max_closed_forms() {
        let (v, arg) = NormSpec::Linf.dual_max(&[1.0, 0.0]).unwrap();
        assert_eq!(v, 1.0);
        assert_eq!(arg, vec![1.0, 0.0]);

        let (v, _) = NormSpec::L2.dual_max(&[0.9624237, 0.0]).unwrap();
        assert!((v - 0.9624237).abs() < 1e-12);

        let (v, arg) = diamond().dual_max(&[1.0, 1.0]).unwrap();
        assert!((v - 2.0).abs() < 1e-12);
        assert_eq!(arg, vec![0.0, 2.0]);
    }

    #[test]
    fn dual_max_l1_tie_is_min_norm() {
        let (v, arg) = NormSpec::L1.dual_max(&[1.0, 1.0]).unwrap();
        assert_eq!(v, 1.0);
        assert_eq!(arg, vec![0.5, 0.5]);
        let l1: f64 = arg.iter().map(|x| x.abs()).sum();
        assert!((l1 - 1.0).abs() < 1e-12, "witness on the boundary");
    }

    #[test]
    fn unit_ball_volumes() {
        assert_eq!(NormSpec::Linf.unit_ball_volume(2).unwrap(), 4.0);
        assert_eq!(NormSpec::L1.unit_ball_volume(2).unwrap(), 2.0);
        let w = NormSpec::WeightedBox {
            weights: vec![0.5849, 0.4274],
        };
        let v = w.unit_ball_volume(2).unwrap();
        assert!((v - 1.0).abs() < 1e-3, "near-unit box volume: {v}");
        let disc = NormSpec::L2.unit_ball_volume(2).unwrap();
        assert!((disc - std::f64::consts::PI).abs() < 1e-12);
        let ball3 = NormSpec::L2.unit_ball_volume(3).unwrap();
        assert!((ball3 - 4.0 / 3.0 * std::f64::consts::PI).abs() < 1e-12);
    }

    #[test]
    fn ellipsoid_volume_and_dual() {
        let e = NormSpec::Ellipsoid {
            matrix: vec![vec![4.0, 0.0], vec![0.0, 1.0]],
        };
        // Ball is an ellipse with semi-axes 1/2 and 1.
        let v = e.unit_ball_volume(2).unwrap();
        assert!((v - std::f64::consts::PI / 2.0).abs() < 1e-12);
        let (d, arg) = e.dual_max(&[1.0, 0.0]).unwrap();
        assert!((d - 0.5).abs() < 1e-12);
        assert!((arg[0] - 0.5).abs() < 1e-12 && arg[1].abs() < 1e-12);
    }

    #[test]
    fn validation_rejects_bad_inputs() {
        let n = NormSpec::WeightedBox {
            weights: vec![1.0, 0.0],
        };
        assert_eq!(n.validate(2), Err(NormError::NonPositiveWeight));

        let p = NormSpec::Polytope {
            vertices: vec![vec![1.0, 0.0], vec![0.0, 1.0]],
        };
        assert!(matches!(p.validate(2), Err(NormError::PolytopeAsymmetric(_))));

        let e = NormSpec::Ellipsoid {
            matrix: vec![vec![1.0, 2.0], vec![0.0, 1.0]],
        };
        assert_eq!(e.validate(2), Err(NormError::EllipsoidAsymmetric));

        let nd = NormSpec::Ellipsoid {
            matrix: vec![vec![1.0, 0.0], vec![0.0, -1.0]],
        };
        assert_eq!(nd.validate(2), Err(NormError::EllipsoidNotPositiveDefinite));
    }

    #[test]
    fn dimension_mismatch_reported() {
        let n = NormSpec::WeightedBox {
            weights: vec![1.0, 1.0],
        };
        assert!(matches!(
            n.value(&[1.0]),
            Err(NormError::DimensionMismatch { expected: 2, got: 1 })
        ));
    }
}
