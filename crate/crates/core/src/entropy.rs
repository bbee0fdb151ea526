//! The slow-entropy formula Δ = Σᵢ γᵢ · max_{p(t)≤1} χᵢ(t), the Pesin-type
//! entropy of single elements, the transversal-dimension identities used as
//! validation tripwires, and minimization of Δ over unit-volume norm
//! families.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::action::LyapunovSpectrum;
use crate::norms::{NormError, NormSpec};
use crate::sampling::halton_directions;

/// Residual bound for the Σγχ = 0 and Σγ|χ| = 2h identities.
pub const GAMMA_IDENTITY_TOL: f64 = 1e-9;
/// Pattern-search step tolerance: below this the search counts as converged.
pub const SEARCH_STEP_TOL: f64 = 1e-8;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EntropyError {
    #[error("GammaMismatch: spectrum has {expected} non-orbit functionals, got {got} gammas")]
    GammaMismatch { expected: usize, got: usize },
    #[error("NegativeGamma: gamma {index} is negative")]
    NegativeGamma { index: usize },
    #[error("GammaExceedsMultiplicity: gamma {index} exceeds the subspace dimension")]
    GammaExceedsMultiplicity { index: usize },
    #[error("ZeroVector")]
    ZeroVector,
    #[error("DimensionMismatch: expected length {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error(transparent)]
    Norm(#[from] NormError),
    #[error("BudgetExhausted: step never reached {SEARCH_STEP_TOL}; best so far {}", result.best_value)]
    BudgetExhausted { result: Box<NormSearchResult> },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GammaSource {
    /// Absolutely continuous (Haar) case: γᵢ equals the multiplicity.
    HaarMultiplicity,
    /// Hyperbolic measures: γᵢ supplied by the caller.
    UserSupplied,
}

/// Transversal dimensions, one per non-orbit functional of a spectrum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GammaAssignment {
    pub gammas: Vec<f64>,
    pub source: GammaSource,
}

impl GammaAssignment {
    pub fn haar(spec: &LyapunovSpectrum) -> Self {
        Self {
            gammas: spec.non_orbit().map(|(_, f)| f.multiplicity as f64).collect(),
            source: GammaSource::HaarMultiplicity,
        }
    }

    pub fn user(spec: &LyapunovSpectrum, gammas: Vec<f64>) -> Result<Self, EntropyError> {
        let expected = spec.non_orbit_count();
        if gammas.len() != expected {
            return Err(EntropyError::GammaMismatch {
                expected,
                got: gammas.len(),
            });
        }
        for (i, ((_, f), &g)) in spec.non_orbit().zip(&gammas).enumerate() {
            if g < 0.0 {
                return Err(EntropyError::NegativeGamma { index: i });
            }
            if g > f.multiplicity as f64 + 1e-12 {
                return Err(EntropyError::GammaExceedsMultiplicity { index: i });
            }
        }
        Ok(Self {
            gammas,
            source: GammaSource::UserSupplied,
        })
    }

    fn check(&self, spec: &LyapunovSpectrum) -> Result<(), EntropyError> {
        let expected = spec.non_orbit_count();
        if self.gammas.len() != expected {
            return Err(EntropyError::GammaMismatch {
                expected,
                got: self.gammas.len(),
            });
        }
        Ok(())
    }
}

/// One row of the slow-entropy formula.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerFunctionalEntropy {
    /// Index of the functional in the spectrum.
    pub index: usize,
    pub coeffs: Vec<f64>,
    pub multiplicity: usize,
    pub gamma: f64,
    /// aᵢ = max_{p(t)≤1} χᵢ(t), the dual norm of the coefficient vector.
    pub max_exponent: f64,
    /// A maximizer on the unit-ball boundary.
    pub argmax: Vec<f64>,
    /// γᵢ · aᵢ.
    pub product: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlowEntropyReport {
    pub per_functional: Vec<PerFunctionalEntropy>,
    /// Δ = Σᵢ γᵢ aᵢ.
    pub total: f64,
    /// Δ/2. With a symmetric window both t and −t enter the ball, so at
    /// k = 1 with the standard norm the literal formula gives twice the
    /// metric entropy; both normalizations are surfaced.
    pub half_total: f64,
    pub norm: NormSpec,
    pub note: String,
}

/// Evaluates the slow-entropy formula for the given norm. Orbit-direction
/// functionals contribute nothing; every aᵢ is nonnegative because the unit
/// ball is symmetric and contains the origin.
pub fn slow_entropy(
    spec: &LyapunovSpectrum,
    gammas: &GammaAssignment,
    norm: &NormSpec,
) -> Result<SlowEntropyReport, EntropyError> {
    gammas.check(spec)?;
    norm.validate(spec.rank)?;
    let mut per_functional = Vec::with_capacity(gammas.gammas.len());
    let mut total = 0.0;
    for ((index, f), &gamma) in spec.non_orbit().zip(&gammas.gammas) {
        let (max_exponent, argmax) = norm.dual_max(&f.coeffs)?;
        let product = gamma * max_exponent;
        total += product;
        per_functional.push(PerFunctionalEntropy {
            index,
            coeffs: f.coeffs.clone(),
            multiplicity: f.multiplicity,
            gamma,
            max_exponent,
            argmax,
            product,
        });
    }
    Ok(SlowEntropyReport {
        per_functional,
        total,
        half_total: total / 2.0,
        norm: norm.clone(),
        note: "a_i >= 0 always: the unit ball is symmetric and contains 0".to_string(),
    })
}

/// Metric entropy of the single element α(t) under the Ledrappier-Young
/// telescoping: h(t) = Σ_{χᵢ(t)>0} γᵢ χᵢ(t).
pub fn pesin_entropy(
    spec: &LyapunovSpectrum,
    gammas: &GammaAssignment,
    t: &[f64],
) -> Result<f64, EntropyError> {
    gammas.check(spec)?;
    if t.len() != spec.rank {
        return Err(EntropyError::DimensionMismatch {
            expected: spec.rank,
            got: t.len(),
        });
    }
    if t.iter().all(|&x| x == 0.0) {
        return Err(EntropyError::ZeroVector);
    }
    let mut h = 0.0;
    for ((_, f), &gamma) in spec.non_orbit().zip(&gammas.gammas) {
        let chi = f.evaluate(t);
        if chi > 0.0 {
            h += gamma * chi;
        }
    }
    Ok(h)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GammaValidation {
    pub trials: usize,
    /// Σᵢ γᵢ χᵢ(t) = 0 within tolerance on every sample.
    pub sum_identity_pass: bool,
    pub worst_sum_residual: f64,
    pub worst_sum_at: Vec<f64>,
    /// Σᵢ γᵢ |χᵢ(t)| = 2 h(t) within tolerance on every sample. This is an
    /// algebraic consequence of the first identity; it stays as a tripwire.
    pub pesin_identity_pass: bool,
    pub worst_pesin_residual: f64,
    pub worst_pesin_at: Vec<f64>,
}

/// Checks the two transversal-dimension identities on deterministic
/// (Halton) unit directions.
pub fn validate_gammas(
    spec: &LyapunovSpectrum,
    gammas: &GammaAssignment,
    trial_count: usize,
) -> Result<GammaValidation, EntropyError> {
    gammas.check(spec)?;
    assert!(trial_count >= 1, "trial_count must be at least 1");
    let dirs = halton_directions(trial_count, spec.rank);
    let mut worst_sum = (0.0f64, vec![0.0; spec.rank]);
    let mut worst_pesin = (0.0f64, vec![0.0; spec.rank]);
    for t in dirs {
        let mut sum = 0.0;
        let mut abs_sum = 0.0;
        for ((_, f), &gamma) in spec.non_orbit().zip(&gammas.gammas) {
            let chi = f.evaluate(&t);
            sum += gamma * chi;
            abs_sum += gamma * chi.abs();
        }
        let h = pesin_entropy(spec, gammas, &t)?;
        let sum_res = sum.abs();
        let pesin_res = (abs_sum - 2.0 * h).abs();
        if sum_res > worst_sum.0 {
            worst_sum = (sum_res, t.clone());
        }
        if pesin_res > worst_pesin.0 {
            worst_pesin = (pesin_res, t.clone());
        }
    }
    Ok(GammaValidation {
        trials: trial_count,
        sum_identity_pass: worst_sum.0 <= GAMMA_IDENTITY_TOL,
        worst_sum_residual: worst_sum.0,
        worst_sum_at: worst_sum.1,
        pesin_identity_pass: worst_pesin.0 <= GAMMA_IDENTITY_TOL,
        worst_pesin_residual: worst_pesin.0,
        worst_pesin_at: worst_pesin.1,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NormFamily {
    WeightedBox,
    Ellipsoid,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceEntry {
    pub iteration: usize,
    /// Normalized family parameters (weights, or the flattened ellipsoid
    /// matrix) after the volume-one rescaling.
    pub params: Vec<f64>,
    pub value: f64,
    pub volume: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormSearchResult {
    pub best_norm: NormSpec,
    pub best_value: f64,
    pub trace: Vec<TraceEntry>,
    pub family: NormFamily,
    pub converged: bool,
}

/// Rescales family parameters onto the unit-volume slice and evaluates Δ.
struct FamilyObjective<'a> {
    spec: &'a LyapunovSpectrum,
    gammas: &'a GammaAssignment,
    family: NormFamily,
    k: usize,
}

impl FamilyObjective<'_> {
    fn param_count(&self) -> usize {
        match self.family {
            NormFamily::WeightedBox => self.k,
            NormFamily::Ellipsoid => self.k * (self.k + 1) / 2,
        }
    }

    /// `theta` are free log-scale parameters; returns the normalized norm,
    /// its reported parameters, Δ and the (unit) volume.
    fn evaluate(&self, theta: &[f64]) -> Result<(NormSpec, Vec<f64>, f64, f64), EntropyError> {
        let k = self.k;
        let norm = match self.family {
            NormFamily::WeightedBox => {
                let w: Vec<f64> = theta.iter().map(|&x| x.exp()).collect();
                let vol = 2f64.powi(k as i32) * w.iter().product::<f64>();
                let scale = vol.powf(-1.0 / k as f64);
                NormSpec::WeightedBox {
                    weights: w.iter().map(|&x| x * scale).collect(),
                }
            }
            NormFamily::Ellipsoid => {
                // theta packs a Cholesky factor: log-diagonal then strict
                // lower triangle, row by row.
                let mut l = vec![vec![0.0; k]; k];
                for i in 0..k {
                    l[i][i] = theta[i].exp();
                }
                let mut idx = k;
                for i in 1..k {
                    for j in 0..i {
                        l[i][j] = theta[idx];
                        idx += 1;
                    }
                }
                let mut q = vec![vec![0.0; k]; k];
                for i in 0..k {
                    for j in 0..k {
                        q[i][j] = (0..k).map(|r| l[i][r] * l[j][r]).sum();
                    }
                }
                let raw = NormSpec::Ellipsoid { matrix: q.clone() };
                let vol = raw.unit_ball_volume(k)?;
                // vol(cQ) = vol(Q)/c^{k/2}; c = vol^{2/k} normalizes to 1.
                let c = vol.powf(2.0 / k as f64);
                for row in q.iter_mut() {
                    for v in row.iter_mut() {
                        *v *= c;
                    }
                }
                NormSpec::Ellipsoid { matrix: q }
            }
        };
        let volume = norm.unit_ball_volume(k)?;
        let value = slow_entropy(self.spec, self.gammas, &norm)?.total;
        let params = match &norm {
            NormSpec::WeightedBox { weights } => weights.clone(),
            NormSpec::Ellipsoid { matrix } => matrix.iter().flatten().copied().collect(),
            _ => unreachable!("family norms are parametrized"),
        };
        Ok((norm, params, value, volume))
    }
}

/// Derivative-free minimization of Δ over a unit-volume norm family:
/// pattern search over log-parameters with shrinking steps, restarted from
/// seed-determined initial points. `budget` counts objective evaluations
/// beyond the initial points. For the weighted-box family the objective is
/// convex in the weights, so the search recovers the closed-form optimum.
pub fn minimize_over_norm_family(
    spec: &LyapunovSpectrum,
    gammas: &GammaAssignment,
    family: NormFamily,
    budget: usize,
    seed: u64,
) -> Result<NormSearchResult, EntropyError> {
    gammas.check(spec)?;
    let objective = FamilyObjective {
        spec,
        gammas,
        family,
        k: spec.rank,
    };
    let p = objective.param_count();

    const RESTARTS: usize = 3;
    let mut initials: Vec<Vec<f64>> = vec![vec![0.0; p]];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 1..RESTARTS {
        initials.push((0..p).map(|_| rng.gen_range(-1.0..1.0)).collect());
    }

    let mut trace = Vec::new();
    let mut iteration = 0usize;
    let mut remaining = budget;
    let mut best: Option<(NormSpec, f64)> = None;
    let mut all_converged = true;

    for theta0 in initials {
        let (norm0, params0, value0, vol0) = objective.evaluate(&theta0)?;
        trace.push(TraceEntry {
            iteration,
            params: params0,
            value: value0,
            volume: vol0,
        });
        iteration += 1;
        if best.as_ref().map(|(_, v)| value0 < *v).unwrap_or(true) {
            best = Some((norm0, value0));
        }

        let mut theta = theta0;
        let mut current = value0;
        let mut step = 0.5f64;
        'search: while step >= SEARCH_STEP_TOL {
            let mut improved = false;
            for i in 0..p {
                for dir in [1.0, -1.0] {
                    if remaining == 0 {
                        all_converged = false;
                        break 'search;
                    }
                    remaining -= 1;
                    let mut cand = theta.clone();
                    cand[i] += dir * step;
                    let (norm_c, params_c, value_c, vol_c) = objective.evaluate(&cand)?;
                    trace.push(TraceEntry {
                        iteration,
                        params: params_c,
                        value: value_c,
                        volume: vol_c,
                    });
                    iteration += 1;
                    if value_c < current - 1e-15 {
                        theta = cand;
                        current = value_c;
                        improved = true;
                        if best.as_ref().map(|(_, v)| value_c < *v).unwrap_or(true) {
                            best = Some((norm_c, value_c));
                        }
                        break;
                    }
                }
                if improved {
                    break;
                }
            }
            if !improved {
                step *= 0.5;
            }
        }
    }

    let (best_norm, _) = best.expect("at least the initial point was evaluated");
    // Recompute so the reported value is exactly slow_entropy(best_norm).
    let best_value = slow_entropy(spec, gammas, &best_norm)?.total;
    let result = NormSearchResult {
        best_norm,
        best_value,
        trace,
        family,
        converged: all_converged,
    };
    if !all_converged {
        return Err(EntropyError::BudgetExhausted {
            result: Box::new(result),
        });
    }
    Ok(result)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::action::{compute_spectrum, verify_action, LyapunovSpectrum, DEFAULT_GROUPING_TOL};

    const FIB_EXP: f64 = 0.962_423_650_119_206_9;
    const B_EXP: f64 = 1.316_957_896_924_816_6;

    fn fib_spectrum() -> LyapunovSpectrum {
        let a = verify_action(&[vec![vec![2, 1], vec![1, 1]]]).unwrap();
        compute_spectrum(&a, DEFAULT_GROUPING_TOL).unwrap()
    }

    fn t4_spectrum() -> LyapunovSpectrum {
        let a = verify_action(&[
            vec![
                vec![2, 1, 0, 0],
                vec![1, 1, 0, 0],
                vec![0, 0, 1, 0],
                vec![0, 0, 0, 1],
            ],
            vec![
                vec![1, 0, 0, 0],
                vec![0, 1, 0, 0],
                vec![0, 0, 3, 1],
                vec![0, 0, 2, 1],
            ],
        ])
        .unwrap();
        compute_spectrum(&a, DEFAULT_GROUPING_TOL).unwrap()
    }

    #[test]
    fn fibonacci_formula_value() {
        let spec = fib_spectrum();
        let gammas = GammaAssignment::haar(&spec);
        let report = slow_entropy(&spec, &gammas, &NormSpec::L2).unwrap();
        assert!((report.total - 2.0 * FIB_EXP).abs() < 1e-9);
        assert!((report.half_total - FIB_EXP).abs() < 1e-9);
        for row in &report.per_functional {
            assert!(row.max_exponent >= 0.0);
            let chi_at_argmax: f64 = row
                .coeffs
                .iter()
                .zip(&row.argmax)
                .map(|(c, t)| c * t)
                .sum();
            assert!((chi_at_argmax - row.max_exponent).abs() < 1e-9);
        }
    }

    #[test]
    fn t4_formula_value_under_linf() {
        let spec = t4_spectrum();
        let gammas = GammaAssignment::haar(&spec);
        let report = slow_entropy(&spec, &gammas, &NormSpec::Linf).unwrap();
        assert!((report.total - 2.0 * (FIB_EXP + B_EXP)).abs() < 1e-9);
    }

    #[test]
    fn zero_gammas_give_zero_entropy() {
        let spec = fib_spectrum();
        let gammas = GammaAssignment::user(&spec, vec![0.0, 0.0]).unwrap();
        let report = slow_entropy(&spec, &gammas, &NormSpec::L2).unwrap();
        assert_eq!(report.total, 0.0);
    }

    #[test]
    fn gamma_mismatch_detected() {
        let spec = fib_spectrum();
        let err = GammaAssignment::user(&spec, vec![1.0]).unwrap_err();
        assert!(matches!(err, EntropyError::GammaMismatch { expected: 2, got: 1 }));
    }

    #[test]
    fn pesin_values() {
        let spec = fib_spectrum();
        let gammas = GammaAssignment::haar(&spec);
        let h = pesin_entropy(&spec, &gammas, &[1.0]).unwrap();
        assert!((h - FIB_EXP).abs() < 1e-9);

        let spec4 = t4_spectrum();
        let gammas4 = GammaAssignment::haar(&spec4);
        let h11 = pesin_entropy(&spec4, &gammas4, &[1.0, 1.0]).unwrap();
        assert!((h11 - (FIB_EXP + B_EXP)).abs() < 1e-9);
        // Flipping the second coordinate swaps which block-exponent is
        // positive, the sum is unchanged.
        let h1m1 = pesin_entropy(&spec4, &gammas4, &[1.0, -1.0]).unwrap();
        assert!((h1m1 - h11).abs() < 1e-12);

        assert_eq!(
            pesin_entropy(&spec, &gammas, &[0.0]).unwrap_err(),
            EntropyError::ZeroVector
        );
    }

    #[test]
    fn suspension_does_not_change_the_formula() {
        // Orbit-direction zeros contribute nothing: the suspension carries
        // the same Δ with the same gamma list.
        let spec = t4_spectrum();
        let suspended = crate::action::suspend(&spec).unwrap();
        let gammas = GammaAssignment::haar(&spec);
        let gammas_s = GammaAssignment::haar(&suspended);
        assert_eq!(gammas.gammas, gammas_s.gammas);
        let d0 = slow_entropy(&spec, &gammas, &NormSpec::Linf).unwrap().total;
        let d1 = slow_entropy(&suspended, &gammas_s, &NormSpec::Linf)
            .unwrap()
            .total;
        assert_eq!(d0, d1);
        let h0 = pesin_entropy(&spec, &gammas, &[1.0, 1.0]).unwrap();
        let h1 = pesin_entropy(&suspended, &gammas_s, &[1.0, 1.0]).unwrap();
        assert_eq!(h0, h1);
    }

    #[test]
    fn haar_gammas_pass_identities() {
        let spec = t4_spectrum();
        let gammas = GammaAssignment::haar(&spec);
        let v = validate_gammas(&spec, &gammas, 100).unwrap();
        assert!(v.sum_identity_pass, "worst {}", v.worst_sum_residual);
        assert!(v.pesin_identity_pass, "worst {}", v.worst_pesin_residual);
    }

    #[test]
    fn skewed_gammas_fail_sum_identity() {
        let spec = fib_spectrum();
        let gammas = GammaAssignment::user(&spec, vec![1.0, 0.5]).unwrap();
        let v = validate_gammas(&spec, &gammas, 16).unwrap();
        assert!(!v.sum_identity_pass);
        // At t = ±1 the residual is |1·χ − 0.5·χ| = χ/2.
        assert!((v.worst_sum_residual - FIB_EXP / 2.0).abs() < 1e-9);
    }

    #[test]
    fn box_family_recovers_am_gm_optimum() {
        let spec = t4_spectrum();
        let gammas = GammaAssignment::haar(&spec);
        let result =
            minimize_over_norm_family(&spec, &gammas, NormFamily::WeightedBox, 4000, 42).unwrap();
        assert!(result.converged);
        let expected = 2.0 * (FIB_EXP * B_EXP).sqrt();
        assert!(
            (result.best_value - expected).abs() < 1e-6,
            "AM-GM optimum {expected}, got {}",
            result.best_value
        );
        let NormSpec::WeightedBox { weights } = &result.best_norm else {
            panic!("family is weighted boxes");
        };
        let w1 = 0.5 * (B_EXP / FIB_EXP).sqrt();
        let w2 = 0.5 * (FIB_EXP / B_EXP).sqrt();
        assert!((weights[0] - w1).abs() < 1e-4, "w1 = {}", weights[0]);
        assert!((weights[1] - w2).abs() < 1e-4, "w2 = {}", weights[1]);
        let vol = result.best_norm.unit_ball_volume(2).unwrap();
        assert!((vol - 1.0).abs() < 1e-6);
    }

    #[test]
    fn k1_box_family_has_no_freedom() {
        let spec = fib_spectrum();
        let gammas = GammaAssignment::haar(&spec);
        let result =
            minimize_over_norm_family(&spec, &gammas, NormFamily::WeightedBox, 500, 7).unwrap();
        let NormSpec::WeightedBox { weights } = &result.best_norm else {
            panic!();
        };
        assert!((weights[0] - 0.5).abs() < 1e-12);
        assert!((result.best_value - FIB_EXP).abs() < 1e-9);
    }

    #[test]
    fn zero_budget_reports_exhaustion_with_seed_value() {
        let spec = fib_spectrum();
        let gammas = GammaAssignment::haar(&spec);
        let err = minimize_over_norm_family(&spec, &gammas, NormFamily::WeightedBox, 0, 42)
            .unwrap_err();
        let EntropyError::BudgetExhausted { result } = err else {
            panic!("expected BudgetExhausted");
        };
        assert!(!result.converged);
        assert!((result.best_value - FIB_EXP).abs() < 1e-9);
    }

    #[test]
    fn ellipsoid_family_beats_round_ball_on_t4() {
        let spec = t4_spectrum();
        let gammas = GammaAssignment::haar(&spec);
        let result =
            minimize_over_norm_family(&spec, &gammas, NormFamily::Ellipsoid, 6000, 42).unwrap();
        let vol = result.best_norm.unit_ball_volume(2).unwrap();
        assert!((vol - 1.0).abs() < 1e-6, "volume normalized: {vol}");
        // The unit-volume disc is in the family; the optimum is at least as
        // good, and monotone improvement is part of the search contract.
        let disc = NormSpec::Ellipsoid {
            matrix: vec![
                vec![std::f64::consts::PI, 0.0],
                vec![0.0, std::f64::consts::PI],
            ],
        };
        let disc_value = slow_entropy(&spec, &gammas, &disc).unwrap().total;
        assert!(result.best_value <= disc_value + 1e-9);
    }
}
