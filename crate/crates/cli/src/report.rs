//! Report assembly and serialization: one combined JSON document plus CSV
//! tables, every value reproducible from the config and seed.

use serde::{Deserialize, Serialize};
use slowent_core::{
    CoverEstimate, GammaSource, GammaValidation, HyperplaneArrangement, LocalEntropyEstimate,
    LyapunovSpectrum, NormSearchResult, SlowEntropyReport,
};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Report {
    pub schema: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub spectrum: Option<SpectrumSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub chambers: Option<ChambersSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub entropy: Option<EntropySection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub estimation: Option<LocalEntropyEstimate>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cover: Option<Vec<CoverEstimate>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub norm_search: Option<NormSearchSection>,
    pub provenance: Provenance,
}

impl Report {
    pub fn new(config_hash: String) -> Self {
        Report {
            schema: "slowent-report/1".to_string(),
            spectrum: None,
            chambers: None,
            entropy: None,
            estimation: None,
            cover: None,
            norm_search: None,
            provenance: Provenance {
                config_hash,
                version: env!("CARGO_PKG_VERSION").to_string(),
                wall_time_ms: 0,
            },
        }
    }
}

/// Everything under `provenance` may differ between runs (timing); all other
/// fields are deterministic functions of the config.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Provenance {
    pub config_hash: String,
    pub version: String,
    pub wall_time_ms: u128,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpectrumSection {
    pub spectrum: LyapunovSpectrum,
    pub suspended: LyapunovSpectrum,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ChambersSection {
    pub arrangement: HyperplaneArrangement,
    pub chambers: Vec<slowent_core::Chamber>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub generic_element: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub generic_separation_score: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EntropySection {
    pub gamma_source: GammaSource,
    pub formula: SlowEntropyReport,
    pub gamma_validation: GammaValidation,
    /// Pesin-type entropy of α(t) at each chamber representative.
    pub pesin_at_representatives: Vec<PesinValue>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PesinValue {
    pub representative: Vec<f64>,
    pub sign_vector: Vec<i8>,
    pub value: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NormSearchSection {
    pub family: String,
    pub result: NormSearchResult,
}

/// Lossless decimal for CSV cells: 17 significant digits, '.' separator.
pub fn csv_real(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn spectrum_csv(spec: &LyapunovSpectrum) -> String {
    let k = spec.rank;
    let mut out = String::from("index");
    for j in 0..k {
        out.push_str(&format!(",coeff_{j}"));
    }
    out.push_str(",multiplicity,orbit_direction\n");
    for (i, f) in spec.functionals.iter().enumerate() {
        out.push_str(&i.to_string());
        for c in &f.coeffs {
            out.push(',');
            out.push_str(&csv_real(*c));
        }
        out.push_str(&format!(",{},{}\n", f.multiplicity, f.orbit_direction));
    }
    out
}

pub fn entropy_csv(report: &SlowEntropyReport, rank: usize) -> String {
    let mut out = String::from("index");
    for j in 0..rank {
        out.push_str(&format!(",coeff_{j}"));
    }
    out.push_str(",multiplicity,gamma,a_i,product\n");
    for row in &report.per_functional {
        out.push_str(&row.index.to_string());
        for c in &row.coeffs {
            out.push(',');
            out.push_str(&csv_real(*c));
        }
        out.push_str(&format!(
            ",{},{},{},{}\n",
            row.multiplicity,
            csv_real(row.gamma),
            csv_real(row.max_exponent),
            csv_real(row.product)
        ));
    }
    out
}

pub fn bowen_csv(est: &LocalEntropyEstimate) -> String {
    let mut out = String::from("s,volume,stderr,method,neg_log_volume,constraints_count\n");
    for row in &est.rows {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            csv_real(row.s),
            csv_real(row.volume),
            row.stderr.map(csv_real).unwrap_or_default(),
            row.method,
            csv_real(row.neg_log_volume),
            row.constraints_count
        ));
    }
    out
}

pub fn cover_csv(rows: &[CoverEstimate]) -> String {
    let mut out = String::from("s,eps,delta,count,uncovered_fraction\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            csv_real(r.s),
            csv_real(r.eps),
            csv_real(r.delta),
            r.count,
            csv_real(r.uncovered_fraction)
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_reals_roundtrip_exactly() {
        for x in [
            0.1,
            -1.9248473002384139,
            4.558763094088047,
            f64::MIN_POSITIVE,
            123456789.123456789,
        ] {
            let s = csv_real(x);
            let back: f64 = s.parse().unwrap();
            assert_eq!(back, x, "{s}");
            assert!(!s.contains(','));
        }
    }
}
