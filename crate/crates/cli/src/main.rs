//! `slowent`: slow entropy of commuting unimodular toral automorphisms.
//!
//! Subcommands run individual pipeline stages; `report` runs everything
//! applicable and writes a combined JSON plus CSV/SVG artifacts. Exit codes:
//! 0 success, 1 validation error, 2 numerical failure.

mod config;
mod report;

use slowent_core::svg;

use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use sha2::{Digest, Sha256};

use slowent_core::{
    bowen, compute_spectrum, covering_number, enumerate_chambers, estimate_local_slow_entropy,
    joint_frame, lyapunov_hyperplanes, minimize_over_norm_family, pesin_entropy,
    pick_generic_element, separation_score, slow_entropy, suspend, validate_gammas,
    verify_action, ActionError, CoverEstimate, EntropyError, GammaAssignment,
    IntegerMatrixAction, LyapunovSpectrum, NormFamily, NormSpec, DEFAULT_GROUPING_TOL,
};

use config::{parse_config, ConfigParse, RunConfig};
use report::{
    bowen_csv, cover_csv, entropy_csv, spectrum_csv, ChambersSection, EntropySection,
    NormSearchSection, PesinValue, Report, SpectrumSection,
};

#[derive(Parser)]
#[command(
    name = "slowent",
    version,
    about = "Slow entropy of higher-rank abelian actions on tori"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Validate the action: determinants and commutators, exactly.
    Verify(CommonArgs),
    /// Joint Lyapunov spectrum.
    Spectrum(CommonArgs),
    /// Lyapunov hyperplanes, Weyl chambers, generic element.
    Chambers(CommonArgs),
    /// Slow-entropy formula, Pesin values, gamma identities.
    Entropy(CommonArgs),
    /// Minimize the formula over a unit-volume norm family.
    Minimize(CommonArgs),
    /// Bowen-ball volume decay and slope fit.
    EstimateBowen(CommonArgs),
    /// Greedy covering numbers.
    EstimateCover(CommonArgs),
    /// Everything applicable, one combined report.
    Report(CommonArgs),
}

#[derive(Args)]
struct CommonArgs {
    /// Path to the JSON run configuration.
    #[arg(short, long)]
    config: PathBuf,
    /// Override estimator.seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Override estimator.samples.
    #[arg(long)]
    samples: Option<u64>,
    /// Override estimator.eps.
    #[arg(long)]
    eps: Option<f64>,
    /// Override output.directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Override output.formats (comma separated subset of json,csv,svg).
    #[arg(long, value_delimiter = ',')]
    format: Option<Vec<String>>,
}

/// Exit class per the interface contract.
enum Failure {
    Validation(String),
    Numerical(String),
}

impl Failure {
    fn code(&self) -> i32 {
        match self {
            Failure::Validation(_) => 1,
            Failure::Numerical(_) => 2,
        }
    }
    fn message(&self) -> &str {
        match self {
            Failure::Validation(m) | Failure::Numerical(m) => m,
        }
    }
}

impl From<ConfigParse> for Failure {
    fn from(e: ConfigParse) -> Self {
        Failure::Validation(e.to_string())
    }
}

impl From<ActionError> for Failure {
    fn from(e: ActionError) -> Self {
        match e {
            ActionError::EigenFailure(_) | ActionError::ToleranceAmbiguity { .. } => {
                Failure::Numerical(e.to_string())
            }
            _ => Failure::Validation(e.to_string()),
        }
    }
}

impl From<slowent_core::NormError> for Failure {
    fn from(e: slowent_core::NormError) -> Self {
        Failure::Validation(e.to_string())
    }
}

impl From<slowent_core::ChamberError> for Failure {
    fn from(e: slowent_core::ChamberError) -> Self {
        use slowent_core::ChamberError::*;
        match e {
            DegenerateArrangement { .. } | NoSeparatingElement(_) => {
                Failure::Numerical(e.to_string())
            }
            _ => Failure::Validation(e.to_string()),
        }
    }
}

impl From<EntropyError> for Failure {
    fn from(e: EntropyError) -> Self {
        match e {
            EntropyError::BudgetExhausted { .. } => Failure::Numerical(e.to_string()),
            _ => Failure::Validation(e.to_string()),
        }
    }
}

impl From<bowen::BowenError> for Failure {
    fn from(e: bowen::BowenError) -> Self {
        use bowen::BowenError::*;
        match e {
            WraparoundRisk { .. } | ZeroAcceptance { .. } | DegenerateVolume { .. } => {
                Failure::Numerical(e.to_string())
            }
            Action(inner) => inner.into(),
            Entropy(inner) => inner.into(),
            Norm(inner) => inner.into(),
            _ => Failure::Validation(e.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Validation(format!("Io: {e}"))
    }
}

impl From<svg::RankNotTwo> for Failure {
    fn from(e: svg::RankNotTwo) -> Self {
        Failure::Validation(e.to_string())
    }
}

fn main() {
    let cli = Cli::parse();
    let (args, runner): (&CommonArgs, fn(&mut Session) -> Result<(), Failure>) =
        match &cli.command {
            Command::Verify(a) => (a, run_verify),
            Command::Spectrum(a) => (a, run_spectrum),
            Command::Chambers(a) => (a, run_chambers),
            Command::Entropy(a) => (a, run_entropy),
            Command::Minimize(a) => (a, run_minimize),
            Command::EstimateBowen(a) => (a, run_estimate_bowen),
            Command::EstimateCover(a) => (a, run_estimate_cover),
            Command::Report(a) => (a, run_report),
        };
    let started = Instant::now();
    let outcome = Session::open(args).and_then(|mut session| {
        runner(&mut session)?;
        session.finish(started.elapsed().as_millis())?;
        Ok(())
    });
    if let Err(failure) = outcome {
        eprintln!("{}", failure.message());
        std::process::exit(failure.code());
    }
}

struct Session {
    cfg: RunConfig,
    report: Report,
    wrote_anything: bool,
}

impl Session {
    fn open(args: &CommonArgs) -> Result<Self, Failure> {
        let text = std::fs::read_to_string(&args.config)
            .map_err(|e| Failure::Validation(format!("ConfigParse: cannot read config: {e}")))?;
        let mut cfg = parse_config(&text)?;
        if let Some(seed) = args.seed {
            cfg.estimator.seed = seed;
        }
        if let Some(samples) = args.samples {
            cfg.estimator.samples = samples;
        }
        if let Some(eps) = args.eps {
            cfg.estimator.eps = eps;
        }
        if let Some(out) = &args.out {
            cfg.output.directory = out.display().to_string();
        }
        if let Some(formats) = &args.format {
            for f in formats {
                if !["json", "csv", "svg"].contains(&f.as_str()) {
                    return Err(Failure::Validation(format!(
                        "ConfigParse: unknown output format \"{f}\""
                    )));
                }
            }
            cfg.output.formats = formats.clone();
        }
        let hash = format!("{:x}", Sha256::digest(text.as_bytes()));
        Ok(Session {
            cfg,
            report: Report::new(hash),
            wrote_anything: false,
        })
    }

    fn action(&self) -> Result<IntegerMatrixAction, Failure> {
        let action = verify_action(&self.cfg.action.generators)?;
        if action.dim() != self.cfg.action.dim || action.rank() != self.cfg.action.rank {
            return Err(Failure::Validation(format!(
                "DimensionMismatch: config declares d = {}, k = {} but generators give d = {}, k = {}",
                self.cfg.action.dim,
                self.cfg.action.rank,
                action.dim(),
                action.rank()
            )));
        }
        Ok(action)
    }

    fn spectrum(&self, action: &IntegerMatrixAction) -> Result<LyapunovSpectrum, Failure> {
        Ok(compute_spectrum(action, DEFAULT_GROUPING_TOL)?)
    }

    fn gammas(&self, spec: &LyapunovSpectrum) -> Result<GammaAssignment, Failure> {
        match &self.cfg.gammas {
            None => Ok(GammaAssignment::haar(spec)),
            Some(g) => Ok(GammaAssignment::user(spec, g.clone())?),
        }
    }

    fn wants(&self, format: &str) -> bool {
        self.cfg.output.formats.iter().any(|f| f == format)
    }

    fn out_dir(&self) -> &Path {
        Path::new(&self.cfg.output.directory)
    }

    fn write(&mut self, name: &str, contents: &str) -> Result<(), Failure> {
        std::fs::create_dir_all(self.out_dir())?;
        std::fs::write(self.out_dir().join(name), contents)?;
        self.wrote_anything = true;
        Ok(())
    }

    fn finish(&mut self, wall_ms: u128) -> Result<(), Failure> {
        if !self.wants("json") || !self.wrote_anything {
            return Ok(());
        }
        self.report.provenance.wall_time_ms = wall_ms;
        let json = serde_json::to_string_pretty(&self.report)
            .map_err(|e| Failure::Validation(format!("Io: {e}")))?;
        self.write("report.json", &(json + "\n"))
    }
}

fn run_verify(session: &mut Session) -> Result<(), Failure> {
    let action = session.action()?;
    println!(
        "action valid: d = {}, k = {}, all determinants ±1, all pairs commute",
        action.dim(),
        action.rank()
    );
    Ok(())
}

fn fill_spectrum(session: &mut Session) -> Result<LyapunovSpectrum, Failure> {
    let action = session.action()?;
    let spec = session.spectrum(&action)?;
    let suspended = suspend(&spec)?;
    session.report.spectrum = Some(SpectrumSection {
        spectrum: spec.clone(),
        suspended,
    });
    Ok(spec)
}

fn run_spectrum(session: &mut Session) -> Result<(), Failure> {
    let spec = fill_spectrum(session)?;
    if session.wants("csv") {
        session.write("spectrum.csv", &spectrum_csv(&spec))?;
    }
    if session.wants("json") {
        session.wrote_anything = true;
    }
    for f in &spec.functionals {
        println!(
            "chi = {:?}  multiplicity {}{}",
            f.coeffs,
            f.multiplicity,
            if f.orbit_direction { "  (orbit)" } else { "" }
        );
    }
    Ok(())
}

fn fill_chambers(session: &mut Session, spec: &LyapunovSpectrum) -> Result<ChambersSection, Failure> {
    let arr = lyapunov_hyperplanes(spec)?;
    let chambers = enumerate_chambers(&arr)?;
    let (generic_element, score) = match pick_generic_element(spec, &session.cfg.norm, 512) {
        Ok(t) => {
            let s = separation_score(spec, &t);
            (Some(t), Some(s))
        }
        Err(_) => (None, None),
    };
    let section = ChambersSection {
        arrangement: arr,
        chambers,
        generic_element,
        generic_separation_score: score,
    };
    session.report.chambers = Some(section.clone());
    Ok(section)
}

fn run_chambers(session: &mut Session) -> Result<(), Failure> {
    let spec = fill_spectrum(session)?;
    let section = fill_chambers(session, &spec)?;
    println!(
        "{} hyperplanes, {} chambers",
        section.arrangement.normals.len(),
        section.chambers.len()
    );
    if session.wants("svg") {
        let rendered = svg::emit_svg_chambers(&section.arrangement, &section.chambers)?;
        session.write("chambers.svg", &rendered)?;
    }
    if session.wants("json") {
        session.wrote_anything = true;
    }
    Ok(())
}

fn fill_entropy(session: &mut Session, spec: &LyapunovSpectrum) -> Result<(), Failure> {
    let gammas = session.gammas(spec)?;
    let formula = slow_entropy(spec, &gammas, &session.cfg.norm)?;
    let gamma_validation = validate_gammas(spec, &gammas, 100)?;
    let mut pesin_at_representatives = Vec::new();
    if let Some(chambers) = &session.report.chambers {
        for c in &chambers.chambers {
            let value = pesin_entropy(spec, &gammas, &c.representative)?;
            pesin_at_representatives.push(PesinValue {
                representative: c.representative.clone(),
                sign_vector: c.sign_vector.clone(),
                value,
            });
        }
    }
    println!(
        "slow entropy Δ = {}  (Δ/2 = {})",
        formula.total, formula.half_total
    );
    session.report.entropy = Some(EntropySection {
        gamma_source: gammas.source,
        formula,
        gamma_validation,
        pesin_at_representatives,
    });
    Ok(())
}

fn run_entropy(session: &mut Session) -> Result<(), Failure> {
    let spec = fill_spectrum(session)?;
    // Chamber representatives give the per-element Pesin values; a spectrum
    // without hyperplanes (no hyperbolicity) simply skips them.
    match fill_chambers(session, &spec) {
        Ok(_) => {}
        Err(Failure::Validation(msg)) if msg.starts_with("AllZeroSpectrum") => {}
        Err(e) => return Err(e),
    }
    fill_entropy(session, &spec)?;
    if session.wants("csv") {
        let section = session.report.entropy.as_ref().expect("just filled");
        let csv = entropy_csv(&section.formula, spec.rank);
        session.write("entropy.csv", &csv)?;
    }
    if session.wants("json") {
        session.wrote_anything = true;
    }
    Ok(())
}

fn family_of(cfg: &RunConfig) -> (NormFamily, usize) {
    match &cfg.search {
        Some(s) => (
            if s.family == "ellipsoid" {
                NormFamily::Ellipsoid
            } else {
                NormFamily::WeightedBox
            },
            s.budget,
        ),
        None => (NormFamily::WeightedBox, 2000),
    }
}

fn run_minimize(session: &mut Session) -> Result<(), Failure> {
    let spec = fill_spectrum(session)?;
    let gammas = session.gammas(&spec)?;
    let (family, budget) = family_of(&session.cfg);
    let result = minimize_over_norm_family(&spec, &gammas, family, budget, session.cfg.estimator.seed)?;
    println!(
        "family minimum {} (converged: {})",
        result.best_value, result.converged
    );
    session.report.norm_search = Some(NormSearchSection {
        family: match family {
            NormFamily::WeightedBox => "weighted_box".to_string(),
            NormFamily::Ellipsoid => "ellipsoid".to_string(),
        },
        result,
    });
    if session.wants("json") {
        session.wrote_anything = true;
    }
    Ok(())
}

fn fill_estimation(session: &mut Session) -> Result<(), Failure> {
    let action = session.action()?;
    let frame = joint_frame(&action, DEFAULT_GROUPING_TOL)?;
    let gammas = session.gammas(&frame.spectrum)?;
    let est = estimate_local_slow_entropy(
        &frame,
        &session.cfg.norm,
        &gammas,
        session.cfg.estimator.eps,
        &session.cfg.estimator.s_grid,
        session.cfg.estimator.samples,
        session.cfg.estimator.seed,
    )?;
    println!(
        "fitted slope {}  formula {}  relative gap {:.4}",
        est.fit.slope, est.formula_total, est.relative_gap
    );
    session.report.estimation = Some(est);
    Ok(())
}

fn run_estimate_bowen(session: &mut Session) -> Result<(), Failure> {
    fill_estimation(session)?;
    if session.wants("csv") {
        let est = session.report.estimation.as_ref().expect("just filled");
        let csv = bowen_csv(est);
        session.write("bowen.csv", &csv)?;
    }
    if session.wants("json") {
        session.wrote_anything = true;
    }
    Ok(())
}

/// Ball-resolving grid resolution: fine enough to see the shrinking Bowen
/// balls, never coarser than eps/4, never past the cell cap.
fn auto_resolution(spec: &LyapunovSpectrum, norm: &NormSpec, s: f64, eps: f64) -> f64 {
    let a_max = spec
        .non_orbit()
        .filter_map(|(_, f)| norm.dual_max(&f.coeffs).ok().map(|(a, _)| a))
        .fold(0.0f64, f64::max);
    let ball_scale = eps * (-a_max * s).exp() / 2.0;
    ball_scale.min(eps / 4.0).max(1.0 / 4000.0)
}

fn fill_cover(session: &mut Session) -> Result<(), Failure> {
    let action = session.action()?;
    let spec = session.spectrum(&action)?;
    let est = &session.cfg.estimator;
    let grid = est.cover_s_grid.clone().unwrap_or_else(|| est.s_grid.clone());
    let eps = est.cover_eps.unwrap_or(est.eps);
    let mut rows: Vec<CoverEstimate> = Vec::new();
    for &s in &grid {
        let resolution = est
            .grid_resolution
            .unwrap_or_else(|| auto_resolution(&spec, &session.cfg.norm, s, eps));
        let row = covering_number(&action, &session.cfg.norm, s, eps, est.delta, resolution)?;
        println!(
            "s = {s}: {} balls (uncovered {:.4})",
            row.count, row.uncovered_fraction
        );
        rows.push(row);
    }
    session.report.cover = Some(rows);
    Ok(())
}

fn run_estimate_cover(session: &mut Session) -> Result<(), Failure> {
    fill_cover(session)?;
    if session.wants("csv") {
        let rows = session.report.cover.as_ref().expect("just filled");
        let csv = cover_csv(rows);
        session.write("cover.csv", &csv)?;
    }
    if session.wants("json") {
        session.wrote_anything = true;
    }
    Ok(())
}

fn run_report(session: &mut Session) -> Result<(), Failure> {
    let spec = fill_spectrum(session)?;
    if session.wants("csv") {
        session.write("spectrum.csv", &spectrum_csv(&spec))?;
    }

    // Chambers apply only when some functional is nonzero.
    match fill_chambers(session, &spec) {
        Ok(section) => {
            if session.wants("svg") && spec.rank == 2 {
                let rendered = svg::emit_svg_chambers(&section.arrangement, &section.chambers)?;
                session.write("chambers.svg", &rendered)?;
            }
        }
        Err(Failure::Validation(msg)) if msg.starts_with("AllZeroSpectrum") => {}
        Err(e) => return Err(e),
    }

    fill_entropy(session, &spec)?;
    if session.wants("csv") {
        let section = session.report.entropy.as_ref().expect("just filled");
        let csv = entropy_csv(&section.formula, spec.rank);
        session.write("entropy.csv", &csv)?;
    }

    fill_estimation(session)?;
    if session.wants("csv") {
        let est = session.report.estimation.as_ref().expect("just filled");
        let csv = bowen_csv(est);
        session.write("bowen.csv", &csv)?;
    }

    if session.cfg.action.dim == 2 {
        fill_cover(session)?;
        if session.wants("csv") {
            let rows = session.report.cover.as_ref().expect("just filled");
            let csv = cover_csv(rows);
            session.write("cover.csv", &csv)?;
        }
    }

    if session.cfg.search.is_some() {
        let gammas = session.gammas(&spec)?;
        let (family, budget) = family_of(&session.cfg);
        let result =
            minimize_over_norm_family(&spec, &gammas, family, budget, session.cfg.estimator.seed)?;
        session.report.norm_search = Some(NormSearchSection {
            family: match family {
                NormFamily::WeightedBox => "weighted_box".to_string(),
                NormFamily::Ellipsoid => "ellipsoid".to_string(),
            },
            result,
        });
    }
    if session.wants("json") {
        session.wrote_anything = true;
    }
    Ok(())
}

