//! Text formats: command-line value lists, the JSON run record and the
//! `alpha,curve,probability` sweep CSV.
//!
//! Every parser here accepts arbitrary input and reports problems as
//! [`ParseError`]; none of them panic.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::comparison::{SweepRow, SweepTable};
use crate::error::Error;
use crate::protocols::{analytic_total_probability, RunReport, WCoefficients, WKind};

/// Significant digits used for every number written to CSV.
pub const CSV_SIG_DIGITS: usize = 10;

pub const SWEEP_CSV_HEADER: &str = "alpha,curve,probability";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("empty list")]
    Empty,
    #[error("item {index}: `{text}` is not a finite number")]
    BadNumber { index: usize, text: String },
    #[error("item {index}: `{text}` is not a cap pair like `3:3`")]
    BadCap { index: usize, text: String },
    #[error("line {line}: {reason}")]
    BadCsv { line: usize, reason: String },
    #[error("unknown protocol `{0}`")]
    BadProtocol(String),
    #[error("invalid JSON record: {0}")]
    BadJson(String),
}

/// Parses `0.5,0.3,0.2` into finite reals. Whitespace around items is
/// ignored.
pub fn parse_real_list(s: &str) -> Result<Vec<f64>, ParseError> {
    if s.trim().is_empty() {
        return Err(ParseError::Empty);
    }
    s.split(',')
        .enumerate()
        .map(|(index, item)| {
            let t = item.trim();
            t.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| ParseError::BadNumber {
                    index,
                    text: t.to_string(),
                })
        })
        .collect()
}

/// Parses `1:1,3:3,5:5` into iteration-cap pairs, each at least 1.
pub fn parse_caps(s: &str) -> Result<Vec<(u32, u32)>, ParseError> {
    if s.trim().is_empty() {
        return Err(ParseError::Empty);
    }
    s.split(',')
        .enumerate()
        .map(|(index, item)| {
            let bad = || ParseError::BadCap {
                index,
                text: item.trim().to_string(),
            };
            let (n, m) = item.trim().split_once(':').ok_or_else(bad)?;
            let n: u32 = n.trim().parse().map_err(|_| bad())?;
            let m: u32 = m.trim().parse().map_err(|_| bad())?;
            if n == 0 || m == 0 {
                return Err(bad());
            }
            Ok((n, m))
        })
        .collect()
}

pub fn parse_protocol(s: &str) -> Result<WKind, ParseError> {
    match s.trim() {
        "single-photon" => Ok(WKind::SinglePhoton),
        "polarization" => Ok(WKind::Polarization),
        other => Err(ParseError::BadProtocol(other.to_string())),
    }
}

/// Formats with `digits` significant digits in plain decimal notation,
/// keeping trailing zeros so column widths are stable.
pub fn format_sig(x: f64, digits: usize) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    if x == 0.0 {
        return format!("{:.*}", digits.saturating_sub(1), 0.0);
    }
    let digits = digits.max(1);
    // Scientific formatting rounds first, so the exponent already accounts
    // for carries such as 9.9999999999 -> 1.000000000e1.
    let sci = format!("{:.*e}", digits - 1, x);
    let exp: i32 = sci[sci.find('e').map_or(sci.len(), |i| i + 1)..]
        .parse()
        .unwrap_or(0);
    let decimals = (digits as i32 - 1 - exp).max(0) as usize;
    format!("{:.*}", decimals, x)
}

/// Renders the sweep; a trailing `#` comment counts skipped α values.
pub fn sweep_to_csv(table: &SweepTable, omitted: usize) -> String {
    let mut out = String::with_capacity(32 * (table.rows.len() + 2));
    out.push_str(SWEEP_CSV_HEADER);
    out.push('\n');
    for r in &table.rows {
        let _ = writeln!(
            out,
            "{},{},{}",
            format_sig(r.alpha, CSV_SIG_DIGITS),
            r.curve,
            format_sig(r.probability, CSV_SIG_DIGITS)
        );
    }
    if omitted > 0 {
        let _ = writeln!(out, "# omitted {omitted} alpha value(s) outside the domain");
    }
    out
}

/// Reads a sweep CSV back. Lines starting with `#` are skipped.
pub fn sweep_from_csv(text: &str) -> Result<SweepTable, ParseError> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h.trim_end_matches('\r') == SWEEP_CSV_HEADER => {}
        _ => {
            return Err(ParseError::BadCsv {
                line: 1,
                reason: format!("expected header `{SWEEP_CSV_HEADER}`"),
            })
        }
    }
    let mut rows = Vec::new();
    for (i, raw) in lines {
        let line = raw.trim_end_matches('\r');
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let bad = |reason: &str| ParseError::BadCsv {
            line: i + 1,
            reason: reason.to_string(),
        };
        let mut fields = line.split(',');
        let (Some(a), Some(c), Some(p), None) =
            (fields.next(), fields.next(), fields.next(), fields.next())
        else {
            return Err(bad("expected three fields"));
        };
        let alpha = a
            .parse::<f64>()
            .ok()
            .filter(|v| (0.0..=1.0).contains(v))
            .ok_or_else(|| bad("alpha must be in [0, 1]"))?;
        let mut chars = c.chars();
        let curve = match (chars.next(), chars.next()) {
            (Some(ch), None) if ch.is_ascii_uppercase() => ch,
            _ => return Err(bad("curve must be one uppercase letter")),
        };
        let probability = p
            .parse::<f64>()
            .ok()
            .filter(|v| (0.0..=1.0).contains(v))
            .ok_or_else(|| bad("probability must be in [0, 1]"))?;
        rows.push(SweepRow {
            alpha,
            curve,
            probability,
        });
    }
    Ok(SweepTable { rows })
}

/// Settings for one protocol run as given on the command line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub protocol: WKind,
    /// Squared moduli `|a_k|²`.
    pub coeffs2: Vec<f64>,
    /// Phases in radians, one per coefficient.
    pub phases: Option<Vec<f64>>,
}

impl RunConfig {
    pub fn coefficients(&self) -> Result<WCoefficients, Error> {
        WCoefficients::from_squared_moduli(&self.coeffs2, self.phases.as_deref())
    }
}

/// Serialized outcome of one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunRecord {
    pub protocol: WKind,
    pub coeffs2: Vec<f64>,
    pub phases: Vec<f64>,
    pub step_probs: Vec<f64>,
    pub total_prob: f64,
    pub analytic_prob: f64,
    pub fidelity: f64,
}

impl RunRecord {
    pub fn from_report(c: &WCoefficients, report: &RunReport) -> Self {
        RunRecord {
            protocol: report.kind,
            coeffs2: c.squared_moduli(),
            phases: c.phases(),
            step_probs: report.step_probs.clone(),
            total_prob: report.total_prob,
            analytic_prob: analytic_total_probability(c),
            fidelity: report.fidelity_to_target,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plain data serializes")
    }

    /// Parses and sanity-checks a record: equal-length coefficient and
    /// phase lists, probabilities in `[0, 1]`.
    pub fn from_json(text: &str) -> Result<Self, ParseError> {
        let rec: RunRecord =
            serde_json::from_str(text).map_err(|e| ParseError::BadJson(e.to_string()))?;
        if rec.coeffs2.len() != rec.phases.len() {
            return Err(ParseError::BadJson(
                "coeffs2 and phases differ in length".into(),
            ));
        }
        let unit = |v: f64| (0.0..=1.0).contains(&v);
        if !rec.step_probs.iter().copied().all(unit)
            || !unit(rec.total_prob)
            || !unit(rec.analytic_prob)
            || !unit(rec.fidelity)
        {
            return Err(ParseError::BadJson("probability outside [0, 1]".into()));
        }
        Ok(rec)
    }

    /// One-line CSV with header `protocol,n,total_prob,analytic_prob,fidelity`.
    pub fn to_csv(&self) -> String {
        format!(
            "protocol,n,total_prob,analytic_prob,fidelity\n{},{},{},{},{}\n",
            self.protocol.name(),
            self.coeffs2.len(),
            format_sig(self.total_prob, CSV_SIG_DIGITS),
            format_sig(self.analytic_prob, CSV_SIG_DIGITS),
            format_sig(self.fidelity, CSV_SIG_DIGITS),
        )
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "protocol:      {}", self.protocol.name());
        let _ = writeln!(out, "parties:       {}", self.coeffs2.len());
        for (i, p) in self.step_probs.iter().enumerate() {
            let _ = writeln!(
                out,
                "step {:<2}       {}",
                i + 1,
                format_sig(*p, CSV_SIG_DIGITS)
            );
        }
        let _ = writeln!(
            out,
            "total:         {}",
            format_sig(self.total_prob, CSV_SIG_DIGITS)
        );
        let _ = writeln!(
            out,
            "analytic:      {}",
            format_sig(self.analytic_prob, CSV_SIG_DIGITS)
        );
        let _ = writeln!(
            out,
            "fidelity:      {}",
            format_sig(self.fidelity, CSV_SIG_DIGITS)
        );
        out
    }
}
