//! Slow entropy of higher-rank abelian actions by commuting unimodular
//! integer matrices on tori.
//!
//! The crate computes the joint Lyapunov spectrum of a commuting family,
//! enumerates the Weyl-chamber structure of the Lyapunov hyperplane
//! arrangement, evaluates the slow-entropy formula
//! Δ = Σᵢ γᵢ · max_{p(t)≤1} χᵢ(t) for norms from a closed family, minimizes
//! Δ over unit-volume norm families, and verifies the predicted Bowen-ball
//! volume decay e^{-Δ s} empirically (exact planar volumes or importance-
//! sampled Monte Carlo inside the analytic rectangle bracket).
//!
//! All operations are pure functions of their inputs; values are immutable
//! after construction and safe to share across threads.

pub mod action;
pub mod bowen;
pub mod chambers;
pub mod entropy;
pub mod geometry;
pub mod intmat;
pub mod lp;
pub mod norms;
pub mod sampling;
pub mod svg;

pub use action::{
    compute_spectrum, evaluate_exponent, joint_frame, suspend, verify_action, ActionError,
    IntegerMatrixAction, JointFrame, LyapunovFunctional, LyapunovSpectrum, DEFAULT_GROUPING_TOL,
};
pub use bowen::{
    bowen_constraints, covering_number, estimate_local_slow_entropy, exact_volume_2d,
    lemma_slack_bound, mc_volume, sandwich_rectangles, BowenBody, BowenConstraint, BowenError,
    CoverEstimate, LocalEntropyEstimate, SandwichRectangles, SlopeFit, VolumeEstimate,
    VolumeMethod, VolumeRow,
};
pub use chambers::{
    classify_element, enumerate_chambers, lyapunov_hyperplanes, pick_generic_element,
    separation_score, Chamber, ChamberError, Classification, HyperplaneArrangement,
};
pub use entropy::{
    minimize_over_norm_family, pesin_entropy, slow_entropy, validate_gammas, EntropyError,
    GammaAssignment, GammaSource, GammaValidation, NormFamily, NormSearchResult,
    PerFunctionalEntropy, SlowEntropyReport, TraceEntry,
};
pub use norms::{NormError, NormSpec};
pub use svg::emit_svg_chambers;
