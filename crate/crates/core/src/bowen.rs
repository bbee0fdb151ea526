//! Bowen-ball bodies of linear toral actions, their volumes (exact planar
//! clipping or importance-sampled Monte Carlo inside the analytic rectangle
//! bracket), the decay-rate fit whose limit the local-entropy theorem
//! identifies with Δ, and greedy covering numbers on the torus.
//!
//! Linear actions are their own Lyapunov charts (identity charts, K = l = 1),
//! and with Haar measure the base point is irrelevant by translation
//! invariance, so everything is anchored at x = 0.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::action::{ActionError, IntegerMatrixAction, JointFrame};
use crate::entropy::{slow_entropy, EntropyError, GammaAssignment};
use crate::geometry::{clip_halfplane, polygon_area};
use crate::norms::{NormError, NormSpec};

/// Constraint coefficients above `eps · 2^45` leave fewer than 7 bits of the
/// ε scale in an f64 membership test; beyond that the chart has left the
/// numerically linear regime.
const WRAPAROUND_BITS: i32 = 45;
const MC_BATCH: u64 = 65_536;
/// Hard cap on covering grids (memory scales with the number of cells).
const MAX_GRID_CELLS: usize = 20_000_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BowenError {
    #[error("EpsOutOfRange: eps must lie in (0, 1/4), got {0}")]
    EpsOutOfRange(f64),
    #[error(
        "WraparoundRisk: |M({lattice_point:?})| = {sup_norm:.3e} exceeds {limit:.3e}; \
         the eps-scale membership test is no longer meaningful"
    )]
    WraparoundRisk {
        lattice_point: Vec<i64>,
        sup_norm: f64,
        limit: f64,
    },
    #[error("SlackTooLarge: eps_slack {eps_slack} exceeds the lemma bound {max_allowed:.6e}")]
    SlackTooLarge { eps_slack: f64, max_allowed: f64 },
    #[error("NotPlanarFactorizable")]
    NotPlanarFactorizable,
    #[error("TooFewSamples: got {got}, need at least {min}")]
    TooFewSamples { got: u64, min: u64 },
    #[error("ZeroAcceptance: no accepted sample; volume <= {upper_bound:.3e} at 95% confidence")]
    ZeroAcceptance { upper_bound: f64 },
    #[error("SlopeGridInvalid: {0}")]
    SlopeGridInvalid(String),
    #[error("DegenerateVolume: nonpositive volume at s = {s}")]
    DegenerateVolume { s: f64 },
    #[error("GridTooCoarse: resolution {resolution} exceeds eps/4 = {max}")]
    GridTooCoarse { resolution: f64, max: f64 },
    #[error("GridTooFine: {cells} cells exceed the {max} cap")]
    GridTooFine { cells: usize, max: usize },
    #[error("CoveringRequiresDim2: torus dimension is {0}")]
    CoveringRequiresDim2(usize),
    #[error(transparent)]
    Norm(#[from] NormError),
    #[error(transparent)]
    Action(#[from] ActionError),
    #[error(transparent)]
    Entropy(#[from] EntropyError),
}

/// One Bowen condition: `|M(t) v|_∞ ≤ ε` for the window element `t`.
#[derive(Debug, Clone)]
pub struct BowenConstraint {
    pub lattice_point: Vec<i64>,
    pub matrix: DMatrix<f64>,
    pub sup_norm: f64,
}

/// The convex body `{ v : |M(t) v|_∞ ≤ ε, ∀ t with p(t) ≤ s }` in chart
/// coordinates at 0. Always contains 0, is centrally symmetric, and lies in
/// `[-ε, ε]^d` (the t = 0 constraint is always present).
#[derive(Debug, Clone)]
pub struct BowenBody {
    pub dim: usize,
    pub rank: usize,
    pub s: f64,
    pub eps: f64,
    pub norm_used: NormSpec,
    pub constraints: Vec<BowenConstraint>,
}

impl BowenBody {
    pub fn contains(&self, v: &[f64]) -> bool {
        let d = self.dim;
        self.constraints.iter().all(|c| {
            (0..d).all(|i| {
                let mut acc = 0.0;
                for j in 0..d {
                    acc += c.matrix[(i, j)] * v[j];
                }
                acc.abs() <= self.eps
            })
        })
    }
}

/// Enumerates every lattice point with `p(t) ≤ s` and the exact integer
/// window matrices. Errors with `WraparoundRisk` when some matrix grows past
/// the numerically linear regime for this ε.
fn window_constraints(
    action: &IntegerMatrixAction,
    norm: &NormSpec,
    s: f64,
    eps: f64,
) -> Result<Vec<BowenConstraint>, BowenError> {
    assert!(s >= 0.0, "window radius must be nonnegative");
    let k = action.rank();
    norm.validate(k)?;
    let limit = eps * 2f64.powi(WRAPAROUND_BITS);

    // Bounding box of the p-ball of radius s in lattice coordinates.
    let mut bounds = Vec::with_capacity(k);
    for j in 0..k {
        let mut e = vec![0.0; k];
        e[j] = 1.0;
        let (b, _) = norm.dual_max(&e)?;
        bounds.push((s * b + 1e-9).floor() as i64);
    }

    let mut constraints = Vec::new();
    let mut t = vec![0i64; k];
    for j in 0..k {
        t[j] = -bounds[j];
    }
    loop {
        let tf: Vec<f64> = t.iter().map(|&x| x as f64).collect();
        if norm.value(&tf)? <= s * (1.0 + 1e-12) + 1e-12 {
            let m = action.element(&t)?;
            let sup_norm = m.sup_operator_norm();
            if sup_norm > limit {
                return Err(BowenError::WraparoundRisk {
                    lattice_point: t.clone(),
                    sup_norm,
                    limit,
                });
            }
            constraints.push(BowenConstraint {
                lattice_point: t.clone(),
                matrix: m.to_f64(),
                sup_norm,
            });
        }
        // Odometer over the bounding box.
        let mut j = 0;
        loop {
            if j == k {
                break;
            }
            t[j] += 1;
            if t[j] <= bounds[j] {
                break;
            }
            t[j] = -bounds[j];
            j += 1;
        }
        if j == k {
            break;
        }
    }
    constraints.sort_by(|a, b| a.lattice_point.cmp(&b.lattice_point));
    debug_assert!(!constraints.is_empty(), "t = 0 always qualifies");
    Ok(constraints)
}

/// The Bowen body of the window `p(t) ≤ s` at chart radius ε. The chart
/// linearization needs ε < 1/4 so that `|M(t)v|_∞ ≤ ε` and the torus
/// distance condition coincide on the body.
pub fn bowen_constraints(
    action: &IntegerMatrixAction,
    norm: &NormSpec,
    s: f64,
    eps: f64,
) -> Result<BowenBody, BowenError> {
    if !(eps > 0.0 && eps < 0.25) {
        return Err(BowenError::EpsOutOfRange(eps));
    }
    Ok(BowenBody {
        dim: action.dim(),
        rank: action.rank(),
        s,
        eps,
        norm_used: norm.clone(),
        constraints: window_constraints(action, norm, s, eps)?,
    })
}

/// Largest chart slack ε′ admitted by the local-entropy lemma for this
/// action and norm (identity charts: K = l = 1, m = d):
/// ε′ ≤ min(1, a₁, …, a_D) / (100 m), the minimum over positive aᵢ.
pub fn lemma_slack_bound(frame: &JointFrame, norm: &NormSpec) -> Result<f64, BowenError> {
    let m = frame.action.dim() as f64;
    let mut min_pos = f64::INFINITY;
    for (_, f) in frame.spectrum.non_orbit() {
        let (a, _) = norm.dual_max(&f.coeffs)?;
        if a > 1e-12 {
            min_pos = min_pos.min(a);
        }
    }
    Ok(min_pos.min(1.0) / (100.0 * m))
}

/// The two-sided rectangle bracket of the local-entropy lemma, expressed in
/// the joint eigenbasis. Per direction with max exponent aᵢ:
/// inner half-width ε′ e^{-(aᵢ+2ε′)s}/(m+1), outer (m+1) ε′ e^{-(aᵢ-2ε′)s};
/// neutral directions (aᵢ = 0) get e^{-2ε′s} inner and a constant outer.
#[derive(Debug, Clone)]
pub struct SandwichRectangles {
    pub inner: Vec<f64>,
    pub outer: Vec<f64>,
    pub basis: DMatrix<f64>,
    pub basis_inv: DMatrix<f64>,
    pub column_functional: Vec<usize>,
    /// aᵢ per spectrum functional.
    pub max_exponents: Vec<f64>,
    pub slack: f64,
    pub s: f64,
}

pub fn sandwich_rectangles(
    frame: &JointFrame,
    norm: &NormSpec,
    s: f64,
    eps_slack: f64,
) -> Result<SandwichRectangles, BowenError> {
    let max_allowed = lemma_slack_bound(frame, norm)?;
    if !(eps_slack > 0.0) || eps_slack > max_allowed {
        return Err(BowenError::SlackTooLarge {
            eps_slack,
            max_allowed,
        });
    }
    let m = frame.action.dim() as f64;
    let mut max_exponents = Vec::with_capacity(frame.spectrum.functionals.len());
    for f in &frame.spectrum.functionals {
        let (a, _) = norm.dual_max(&f.coeffs)?;
        max_exponents.push(a);
    }
    let mut inner = Vec::with_capacity(frame.column_functional.len());
    let mut outer = Vec::with_capacity(frame.column_functional.len());
    for &fi in &frame.column_functional {
        let a = max_exponents[fi];
        if a > 1e-12 {
            inner.push(eps_slack * (-(a + 2.0 * eps_slack) * s).exp() / (m + 1.0));
            outer.push((m + 1.0) * eps_slack * (-(a - 2.0 * eps_slack) * s).exp());
        } else {
            inner.push(eps_slack * (-2.0 * eps_slack * s).exp() / (m + 1.0));
            outer.push((m + 1.0) * eps_slack);
        }
    }
    Ok(SandwichRectangles {
        inner,
        outer,
        basis: frame.basis.clone(),
        basis_inv: frame.basis_inv.clone(),
        column_functional: frame.column_functional.clone(),
        max_exponents,
        slack: eps_slack,
        s,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VolumeMethod {
    ExactPolygon2D,
    MonteCarlo,
}

impl std::fmt::Display for VolumeMethod {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            VolumeMethod::ExactPolygon2D => write!(f, "exact_polygon_2d"),
            VolumeMethod::MonteCarlo => write!(f, "monte_carlo"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VolumeEstimate {
    pub value: f64,
    pub method: VolumeMethod,
    pub samples: Option<u64>,
    pub stderr: Option<f64>,
    pub seed: Option<u64>,
    /// Per-coordinate half-widths of the sampling box (Monte Carlo only).
    pub bounding_box: Option<Vec<f64>>,
    /// Lebesgue volume of the sampling box, so the acceptance ratio and the
    /// standard error are recomputable: r = value/box_volume,
    /// stderr = value·√((1−r)/(r·samples)).
    pub box_volume: Option<f64>,
}

/// Exact volume for d = 2, or for block-diagonal actions whose body
/// factorizes into planar pieces (detected from the sparsity of the window
/// matrices). Each factor is an intersection of parallelogram slabs, clipped
/// as half-planes from the ε-square.
pub fn exact_volume_2d(body: &BowenBody) -> Result<VolumeEstimate, BowenError> {
    let d = body.dim;
    if d % 2 != 0 {
        return Err(BowenError::NotPlanarFactorizable);
    }
    if d > 2 {
        // Entries come from integers below 2^45, so f64 comparison is exact.
        let block_diagonal = body.constraints.iter().all(|c| {
            (0..d).all(|i| (0..d).all(|j| i / 2 == j / 2 || c.matrix[(i, j)] == 0.0))
        });
        if !block_diagonal {
            return Err(BowenError::NotPlanarFactorizable);
        }
    }
    let eps = body.eps;
    let mut volume = 1.0;
    for block in 0..d / 2 {
        let o = 2 * block;
        let mut poly = vec![
            [-eps, -eps],
            [eps, -eps],
            [eps, eps],
            [-eps, eps],
        ];
        'constraints: for c in &body.constraints {
            for row in 0..2 {
                let n = [c.matrix[(o + row, o)], c.matrix[(o + row, o + 1)]];
                poly = clip_halfplane(&poly, n, eps);
                poly = clip_halfplane(&poly, [-n[0], -n[1]], eps);
                if poly.len() < 3 {
                    break 'constraints;
                }
            }
        }
        volume *= polygon_area(&poly);
    }
    Ok(VolumeEstimate {
        value: volume,
        method: VolumeMethod::ExactPolygon2D,
        samples: None,
        stderr: None,
        seed: None,
        bounding_box: None,
        box_volume: None,
    })
}

/// Monte Carlo volume: uniform samples in the outer-rectangle importance box
/// (in the joint eigenbasis), accepted when all Bowen constraints hold.
///
/// The box is the lemma's outer rectangle rescaled to the body's ε (exact by
/// homogeneity: body(ε) = (ε/ε′)·body(ε′)), tightened per direction by the
/// certified bound |u_c| ≤ ε · min_t ‖row_c(B⁻¹) M(t)‖₁, which guarantees
/// containment even where the asymptotic constants have not kicked in yet.
/// Deterministic given (seed, fixed batch partition), independent of
/// threading.
pub fn mc_volume(
    body: &BowenBody,
    rects: &SandwichRectangles,
    samples: u64,
    seed: u64,
) -> Result<VolumeEstimate, BowenError> {
    const MIN_SAMPLES: u64 = 10_000;
    if samples < MIN_SAMPLES {
        return Err(BowenError::TooFewSamples {
            got: samples,
            min: MIN_SAMPLES,
        });
    }
    let d = body.dim;
    let scale = body.eps / rects.slack;
    let mut half: Vec<f64> = rects.outer.iter().map(|o| o * scale).collect();
    for c in 0..d {
        let row = rects.basis_inv.row(c);
        let mut certified = f64::INFINITY;
        for constraint in &body.constraints {
            let mut l1 = 0.0;
            for j in 0..d {
                let mut acc = 0.0;
                for r in 0..d {
                    acc += row[r] * constraint.matrix[(r, j)];
                }
                l1 += acc.abs();
            }
            certified = certified.min(l1);
        }
        half[c] = half[c].min(body.eps * certified);
    }
    let det_b = rects.basis.determinant().abs();
    let box_volume = det_b * half.iter().map(|h| 2.0 * h).product::<f64>();

    // Fixed batch partition with one RNG stream per batch: the count is a
    // pure function of (seed, partition), whatever the thread schedule.
    let batches = samples.div_ceil(MC_BATCH);
    let accepted: u64 = (0..batches)
        .into_par_iter()
        .map(|batch| {
            let n = MC_BATCH.min(samples - batch * MC_BATCH);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(batch + 1);
            let mut v = vec![0.0; d];
            let mut hits = 0u64;
            for _ in 0..n {
                for x in v.iter_mut() {
                    *x = 0.0;
                }
                for (c, &h) in half.iter().enumerate() {
                    let u = rng.gen_range(-h..=h);
                    for r in 0..d {
                        v[r] += rects.basis[(r, c)] * u;
                    }
                }
                if body.contains(&v) {
                    hits += 1;
                }
            }
            hits
        })
        .sum();

    if accepted == 0 {
        return Err(BowenError::ZeroAcceptance {
            upper_bound: box_volume * 3.0 / samples as f64,
        });
    }
    let r = accepted as f64 / samples as f64;
    let value = box_volume * r;
    let stderr = value * ((1.0 - r) / (r * samples as f64)).sqrt();
    Ok(VolumeEstimate {
        value,
        method: VolumeMethod::MonteCarlo,
        samples: Some(samples),
        stderr: Some(stderr),
        seed: Some(seed),
        bounding_box: Some(half),
        box_volume: Some(box_volume),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlopeFit {
    /// Radii retained by the fit (transient prefix may be dropped).
    pub s_grid: Vec<f64>,
    /// −log(volume) per retained radius.
    pub logvols: Vec<f64>,
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    /// Slopes with one point left out each; their spread is the stability
    /// diagnostic.
    pub loo_slopes: Vec<f64>,
    /// Number of leading radii dropped by the transient guard.
    pub dropped_transient: usize,
}

impl SlopeFit {
    pub fn loo_range(&self) -> f64 {
        let lo = self.loo_slopes.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = self
            .loo_slopes
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max);
        if self.loo_slopes.is_empty() {
            0.0
        } else {
            hi - lo
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VolumeRow {
    pub s: f64,
    pub volume: f64,
    pub stderr: Option<f64>,
    pub method: VolumeMethod,
    pub neg_log_volume: f64,
    pub constraints_count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalEntropyEstimate {
    pub rows: Vec<VolumeRow>,
    pub fit: SlopeFit,
    /// Δ from the slow-entropy formula, for the gap diagnostic.
    pub formula_total: f64,
    /// |slope − Δ|/Δ, or the absolute gap when Δ vanishes.
    pub relative_gap: f64,
}

fn least_squares(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    let mut syy = 0.0;
    for (x, y) in xs.iter().zip(ys) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
        syy += (y - my) * (y - my);
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r2 = if syy > 0.0 { (sxy * sxy) / (sxx * syy) } else { 1.0 };
    (slope, intercept, r2)
}

fn fit_with_transient_guard(
    mut xs: Vec<f64>,
    mut ys: Vec<f64>,
) -> Result<SlopeFit, BowenError> {
    if xs.len() < 3 {
        return Err(BowenError::SlopeGridInvalid(format!(
            "need at least 3 radii, got {}",
            xs.len()
        )));
    }
    let mut dropped = 0usize;
    loop {
        let (slope, intercept, r_squared) = least_squares(&xs, &ys);
        let loo_slopes: Vec<f64> = (0..xs.len())
            .map(|skip| {
                let xr: Vec<f64> = xs
                    .iter()
                    .enumerate()
                    .filter(|&(i, _)| i != skip)
                    .map(|(_, &x)| x)
                    .collect();
                let yr: Vec<f64> = ys
                    .iter()
                    .enumerate()
                    .filter(|&(i, _)| i != skip)
                    .map(|(_, &y)| y)
                    .collect();
                least_squares(&xr, &yr).0
            })
            .collect();
        let fit = SlopeFit {
            s_grid: xs.clone(),
            logvols: ys.clone(),
            slope,
            intercept,
            r_squared,
            loo_slopes,
            dropped_transient: dropped,
        };
        // Small-s bias guard: the theorem is a limit statement, the smallest
        // window is the suspect one.
        if xs.len() > 3 && fit.loo_range() > 0.2 * slope.abs() {
            xs.remove(0);
            ys.remove(0);
            dropped += 1;
            continue;
        }
        return Ok(fit);
    }
}

/// Volumes over the s-grid (exact planar clipping when the body factorizes,
/// Monte Carlo in the rectangle bracket otherwise), the least-squares decay
/// slope, and the gap against the slow-entropy formula.
pub fn estimate_local_slow_entropy(
    frame: &JointFrame,
    norm: &NormSpec,
    gammas: &GammaAssignment,
    eps: f64,
    s_grid: &[f64],
    samples: u64,
    seed: u64,
) -> Result<LocalEntropyEstimate, BowenError> {
    if s_grid.len() < 3 {
        return Err(BowenError::SlopeGridInvalid(format!(
            "need at least 3 radii, got {}",
            s_grid.len()
        )));
    }
    if s_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(BowenError::SlopeGridInvalid(
            "radii must be strictly increasing".into(),
        ));
    }
    let formula_total = slow_entropy(&frame.spectrum, gammas, norm)?.total;

    // Radii are independent; results are collected in grid order.
    let rows: Vec<VolumeRow> = s_grid
        .par_iter()
        .enumerate()
        .map(|(i, &s)| {
            let body = bowen_constraints(&frame.action, norm, s, eps)?;
            let estimate = match exact_volume_2d(&body) {
                Ok(est) => est,
                Err(BowenError::NotPlanarFactorizable) => {
                    let slack = 0.9 * lemma_slack_bound(frame, norm)?;
                    let rects = sandwich_rectangles(frame, norm, s, slack)?;
                    mc_volume(
                        &body,
                        &rects,
                        samples,
                        seed.wrapping_add(i as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15),
                    )?
                }
                Err(e) => return Err(e),
            };
            if !(estimate.value > 0.0) {
                return Err(BowenError::DegenerateVolume { s });
            }
            Ok(VolumeRow {
                s,
                volume: estimate.value,
                stderr: estimate.stderr,
                method: estimate.method,
                neg_log_volume: -estimate.value.ln(),
                constraints_count: body.constraints.len(),
            })
        })
        .collect::<Result<Vec<_>, BowenError>>()?;
    let fit = fit_with_transient_guard(
        rows.iter().map(|r| r.s).collect(),
        rows.iter().map(|r| r.neg_log_volume).collect(),
    )?;
    let relative_gap = if formula_total.abs() > 1e-9 {
        (fit.slope - formula_total).abs() / formula_total.abs()
    } else {
        (fit.slope - formula_total).abs()
    };
    Ok(LocalEntropyEstimate {
        rows,
        fit,
        formula_total,
        relative_gap,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverEstimate {
    pub s: f64,
    pub eps: f64,
    pub delta: f64,
    /// Actual grid spacing used (1/g for the chosen g).
    pub grid_resolution: f64,
    /// Number of Bowen balls placed by the greedy cover.
    pub count: usize,
    pub uncovered_fraction: f64,
    /// Grid mass of a single d_F-ball (translation invariant).
    pub max_ball_fraction: f64,
    /// (1 − δ) / max_ball_fraction: the covering-count lower bracket. The
    /// greedy count can never fall below it (each ball covers at most
    /// max_ball_fraction of the grid).
    pub lower_bracket: f64,
    /// Discretization constant of the bracket; 1 because the bracket is
    /// evaluated against the same grid-empirical measure the greedy uses.
    pub bracket_constant: f64,
    /// True for the degenerate delta ≥ 1 request (nothing needs covering).
    pub vacuous: bool,
}

fn wrap(x: f64) -> f64 {
    x - x.round()
}

/// Greedy covering of the torus grid by d_F-balls. Centers and test points
/// share a uniform grid; the pseudo-metric d_F(x,y) = max_t |M(t)(x−y) mod 1|_∞
/// depends only on x − y, so ball shapes are translates of one offset set and
/// the greedy argmax can be maintained with exact counts.
pub fn covering_number(
    action: &IntegerMatrixAction,
    norm: &NormSpec,
    s: f64,
    eps: f64,
    delta: f64,
    grid_resolution: f64,
) -> Result<CoverEstimate, BowenError> {
    if action.dim() != 2 {
        return Err(BowenError::CoveringRequiresDim2(action.dim()));
    }
    // The covering metric wraps honestly on the torus, so ε is only bounded
    // by the injectivity radius, not by the chart-linearization 1/4.
    if !(eps > 0.0 && eps < 0.5) {
        return Err(BowenError::EpsOutOfRange(eps));
    }
    if grid_resolution > eps / 4.0 {
        return Err(BowenError::GridTooCoarse {
            resolution: grid_resolution,
            max: eps / 4.0,
        });
    }
    let g = (1.0 / grid_resolution).ceil() as usize;
    let cells = g * g;
    if cells > MAX_GRID_CELLS {
        return Err(BowenError::GridTooFine {
            cells,
            max: MAX_GRID_CELLS,
        });
    }
    let constraints = window_constraints(action, norm, s, eps)?;
    let resolution = 1.0 / g as f64;

    // Offset set D = {grid offsets within d_F-distance eps of 0}; cheap
    // prefilter with the t = 0 constraint first.
    let mut offsets: Vec<(usize, usize)> = Vec::new();
    for di in 0..g {
        let x = wrap(di as f64 / g as f64);
        if x.abs() > eps + 1e-12 {
            continue;
        }
        for dj in 0..g {
            let y = wrap(dj as f64 / g as f64);
            if y.abs() > eps + 1e-12 {
                continue;
            }
            let inside = constraints.iter().all(|c| {
                let u = wrap(c.matrix[(0, 0)] * x + c.matrix[(0, 1)] * y);
                let v = wrap(c.matrix[(1, 0)] * x + c.matrix[(1, 1)] * y);
                u.abs() <= eps + 1e-12 && v.abs() <= eps + 1e-12
            });
            if inside {
                offsets.push((di, dj));
            }
        }
    }
    let ball = offsets.len();
    let max_ball_fraction = ball as f64 / cells as f64;
    let lower_bracket = (1.0 - delta).max(0.0) / max_ball_fraction;

    if delta >= 1.0 {
        return Ok(CoverEstimate {
            s,
            eps,
            delta,
            grid_resolution: resolution,
            count: 1,
            uncovered_fraction: 1.0 - max_ball_fraction,
            max_ball_fraction,
            lower_bracket,
            bracket_constant: 1.0,
            vacuous: true,
        });
    }

    let needed = ((1.0 - delta) * cells as f64 - 1e-9).ceil() as usize;
    let mut uncovered = vec![true; cells];
    let mut counts: Vec<u32> = vec![ball as u32; cells];
    // Bucket queue keyed by count; counts only decrease, so the maximum
    // bucket pointer only moves down.
    let mut buckets: Vec<Vec<u32>> = vec![Vec::new(); ball + 1];
    for idx in (0..cells).rev() {
        buckets[ball].push(idx as u32);
    }
    let mut cur = ball;
    let mut covered = 0usize;
    let mut count = 0usize;

    while covered < needed {
        while cur > 0 && buckets[cur].is_empty() {
            cur -= 1;
        }
        let idx = match buckets[cur].pop() {
            Some(i) => i as usize,
            None => break, // nothing can cover more points
        };
        let actual = counts[idx] as usize;
        if actual != cur {
            buckets[actual].push(idx as u32);
            continue;
        }
        if actual == 0 {
            break;
        }
        // Place a ball at this center.
        count += 1;
        let (ci, cj) = (idx / g, idx % g);
        for &(di, dj) in &offsets {
            let xi = (ci + di) % g;
            let xj = (cj + dj) % g;
            let x = xi * g + xj;
            if uncovered[x] {
                uncovered[x] = false;
                covered += 1;
                for &(ei, ej) in &offsets {
                    let bi = (xi + g - ei % g) % g;
                    let bj = (xj + g - ej % g) % g;
                    counts[bi * g + bj] -= 1;
                }
            }
        }
    }

    Ok(CoverEstimate {
        s,
        eps,
        delta,
        grid_resolution: resolution,
        count,
        uncovered_fraction: (cells - covered) as f64 / cells as f64,
        max_ball_fraction,
        lower_bracket,
        bracket_constant: 1.0,
        vacuous: false,
    })
}
