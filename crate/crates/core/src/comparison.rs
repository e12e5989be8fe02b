//! Success probabilities of the earlier repeat-until-success concentration
//! scheme for three-photon W states, and the α sweep comparing it with the
//! optimal single-shot protocol.
//!
//! The prior scheme's round-`n` probabilities contain chain products
//! `(x^{2^n}+y^{2^n})(x^{2^{n-1}}+y^{2^{n-1}})⋯(x²+y²)` whose raw powers
//! underflow after about ten rounds. They are evaluated here in ratio form:
//! with `x ≥ y` and `q = (y/x)²`,
//!
//! ```text
//! (xy)^{2^n} / Π_{k=1..n} (x^{2^k} + y^{2^k}) = x² q^{2^{n-1}} / Π_{k=1..n} (1 + q^{2^{k-1}})
//! ```
//!
//! where `q^{2^k}` comes from repeated squaring and decays to zero without
//! ever producing NaN.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Iteration cap used when the caller does not pick one.
pub const DEFAULT_CAP: u32 = 25;

const NORM_TOL: f64 = 1e-9;
const ORDER_TOL: f64 = 1e-12;

/// Real coefficient moduli of `α|HVV⟩ + β|VHV⟩ + γ|VVH⟩` plus the number of
/// rounds each of the two prior concentration steps is repeated.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PriorEcpParams {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub step1_cap: u32,
    pub step2_cap: u32,
}

impl PriorEcpParams {
    pub fn new(alpha: f64, beta: f64, gamma: f64, step1_cap: u32, step2_cap: u32) -> Result<Self> {
        for (name, v) in [("alpha", alpha), ("beta", beta), ("gamma", gamma)] {
            if !(v > 0.0 && v < 1.0) {
                return Err(Error::Domain(format!("{name} = {v} is not in (0, 1)")));
            }
        }
        let norm = alpha * alpha + beta * beta + gamma * gamma;
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::Domain(format!("α²+β²+γ² = {norm}, not 1")));
        }
        if step1_cap == 0 || step2_cap == 0 {
            return Err(Error::Domain("iteration caps must be at least 1".into()));
        }
        Ok(PriorEcpParams {
            alpha,
            beta,
            gamma,
            step1_cap,
            step2_cap,
        })
    }

    /// Fixes β and derives γ from normalization.
    pub fn from_alpha_beta(alpha: f64, beta: f64, step1_cap: u32, step2_cap: u32) -> Result<Self> {
        let g2 = 1.0 - alpha * alpha - beta * beta;
        if g2.is_nan() || g2 <= 0.0 {
            return Err(Error::Domain(format!(
                "α = {alpha}, β = {beta} leave γ² = {g2}"
            )));
        }
        Self::new(alpha, beta, g2.sqrt(), step1_cap, step2_cap)
    }

    pub fn with_caps(self, step1_cap: u32, step2_cap: u32) -> Result<Self> {
        Self::new(self.alpha, self.beta, self.gamma, step1_cap, step2_cap)
    }
}

/// `(xy)^{2^n} / Π_{k=1..n}(x^{2^k} + y^{2^k})` for moduli `x, y > 0`.
fn chain_ratio(x: f64, y: f64, n: u32) -> f64 {
    let (hi, lo) = if x >= y { (x, y) } else { (y, x) };
    let q = (lo / hi) * (lo / hi);
    let mut power = q; // q^{2^{k-1}} at round k
    let mut denom = 1.0;
    let mut last = q;
    for _ in 0..n {
        denom *= 1.0 + power;
        last = power;
        power *= power;
    }
    hi * hi * last / denom
}

/// Probability that the first prior step succeeds in exactly round `n`.
///
/// # Panics
/// If `n == 0`.
pub fn prior_step1_prob(p: &PriorEcpParams, n: u32) -> f64 {
    assert!(n >= 1, "rounds are counted from 1");
    let b2 = p.beta * p.beta;
    let g2 = p.gamma * p.gamma;
    chain_ratio(p.alpha, p.beta, n) * (g2 / b2 + 2.0)
}

/// Probability that the second prior step succeeds in exactly round `m`.
///
/// # Panics
/// If `m == 0`.
pub fn prior_step2_prob(p: &PriorEcpParams, m: u32) -> f64 {
    assert!(m >= 1, "rounds are counted from 1");
    let b2 = p.beta * p.beta;
    let g2 = p.gamma * p.gamma;
    3.0 * chain_ratio(p.gamma, p.beta, m) / (g2 + 2.0 * b2)
}

/// `Σ_{n≤N} P¹_n · Σ_{m≤M} P²_m` with the caps stored in `p`.
pub fn prior_total_prob(p: &PriorEcpParams) -> f64 {
    let s1: f64 = (1..=p.step1_cap).map(|n| prior_step1_prob(p, n)).sum();
    let s2: f64 = (1..=p.step2_cap).map(|m| prior_step2_prob(p, m)).sum();
    s1 * s2
}

/// Optimal single-shot probability for three parties, `3 min(α², β², γ²)`.
pub fn optimal_total_prob(alpha: f64, beta: f64, gamma: f64) -> f64 {
    3.0 * (alpha * alpha).min(beta * beta).min(gamma * gamma)
}

/// β used throughout the α sweep.
pub fn sweep_beta() -> f64 {
    (1.0f64 / 3.0).sqrt()
}

/// `[1/√3, √(2/3))`: the α range over which `α ≥ β = 1/√3 ≥ γ > 0`.
pub fn sweep_alpha_range() -> (f64, f64) {
    ((1.0f64 / 3.0).sqrt(), (2.0f64 / 3.0).sqrt())
}

/// Offset of the last grid point from the `γ = 0` endpoint.
pub const UPPER_ENDPOINT_GAP: f64 = 1e-6;

/// Default number of α points.
pub const DEFAULT_GRID_POINTS: usize = 200;

/// Uniform α grid from `1/√3` up to `√(2/3) − 1e-6`.
///
/// The lower endpoint (all three moduli equal) is included because the
/// optimal protocol is defined there; the upper one leaves γ = 0 and is
/// only approached.
pub fn figure3_grid(points: usize) -> Vec<f64> {
    let (lo, hi) = sweep_alpha_range();
    let hi = hi - UPPER_ENDPOINT_GAP;
    match points {
        0 => Vec::new(),
        1 => vec![lo],
        n => (0..n)
            .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
            .collect(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CurveKind {
    /// Prior scheme with both steps repeated up to the given caps.
    Prior { step1_cap: u32, step2_cap: u32 },
    /// The single-shot optimal protocol.
    Optimal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CurveSpec {
    pub label: char,
    pub kind: CurveKind,
}

/// Labels prior curves `A`, `B`, ... in the order given and appends the
/// optimal curve under the next letter.
pub fn curves_for_caps(caps: &[(u32, u32)]) -> Vec<CurveSpec> {
    let mut out: Vec<CurveSpec> = caps
        .iter()
        .enumerate()
        .map(|(i, &(n, m))| CurveSpec {
            label: curve_letter(i),
            kind: CurveKind::Prior {
                step1_cap: n,
                step2_cap: m,
            },
        })
        .collect();
    out.push(CurveSpec {
        label: curve_letter(caps.len()),
        kind: CurveKind::Optimal,
    });
    out
}

fn curve_letter(i: usize) -> char {
    char::from(b'A' + (i % 26) as u8)
}

/// Caps (1,1), (3,3), (5,5) plus the optimal curve: A, B, C, D.
pub fn default_curves() -> Vec<CurveSpec> {
    curves_for_caps(&[(1, 1), (3, 3), (5, 5)])
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub alpha: f64,
    pub curve: char,
    pub probability: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SweepTable {
    pub rows: Vec<SweepRow>,
}

impl SweepTable {
    pub fn curve(&self, label: char) -> impl Iterator<Item = &SweepRow> {
        self.rows.iter().filter(move |r| r.curve == label)
    }

    pub fn get(&self, alpha: f64, label: char) -> Option<f64> {
        self.rows
            .iter()
            .find(|r| r.curve == label && r.alpha == alpha)
            .map(|r| r.probability)
    }
}

/// Rows for one α at `β = 1/√3`, one per curve.
///
/// Requires `α ≥ β ≥ γ > 0` (up to 1e-12 on the orderings).
pub fn figure3_point(alpha: f64, curves: &[CurveSpec]) -> Result<Vec<SweepRow>> {
    let beta = sweep_beta();
    if !alpha.is_finite() {
        return Err(Error::Domain(format!("α = {alpha}")));
    }
    let g2 = 1.0 - alpha * alpha - beta * beta;
    if g2.is_nan() || g2 <= 0.0 {
        return Err(Error::Domain(format!("α = {alpha} leaves γ² = {g2}")));
    }
    let gamma = g2.sqrt();
    if alpha < beta - ORDER_TOL || beta < gamma - ORDER_TOL {
        return Err(Error::Domain(format!(
            "α = {alpha} breaks the ordering α ≥ β ≥ γ"
        )));
    }
    let base = PriorEcpParams::new(alpha, beta, gamma, 1, 1)?;
    curves
        .iter()
        .map(|c| {
            let probability = match c.kind {
                CurveKind::Prior {
                    step1_cap,
                    step2_cap,
                } => prior_total_prob(&base.with_caps(step1_cap, step2_cap)?),
                CurveKind::Optimal => optimal_total_prob(alpha, beta, gamma),
            };
            Ok(SweepRow {
                alpha,
                curve: c.label,
                probability,
            })
        })
        .collect()
}

/// Evaluates every curve at every α; fails on the first α outside the
/// domain.
pub fn figure3_sweep(alpha_grid: &[f64], curves: &[CurveSpec]) -> Result<SweepTable> {
    let mut rows = Vec::with_capacity(alpha_grid.len() * curves.len());
    for &a in alpha_grid {
        rows.extend(figure3_point(a, curves)?);
    }
    Ok(SweepTable { rows })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn equal(caps: (u32, u32)) -> PriorEcpParams {
        let s = (1.0f64 / 3.0).sqrt();
        PriorEcpParams::new(s, s, s, caps.0, caps.1).unwrap()
    }

    /// Literal transcription with raw powers, valid for small rounds.
    fn naive_step1(a: f64, b: f64, g: f64, n: u32) -> f64 {
        let e = 2f64.powi(n as i32);
        let num = a.powf(e) * (b.powf(e - 2.0) * g * g + 2.0 * b.powf(e));
        let den: f64 = (1..=n)
            .map(|k| {
                let e = 2f64.powi(k as i32);
                a.powf(e) + b.powf(e)
            })
            .product();
        num / den
    }

    fn naive_step2(b: f64, g: f64, m: u32) -> f64 {
        let e = 2f64.powi(m as i32);
        let num = 3.0 * b.powf(e) * g.powf(e);
        let den: f64 = (1..=m)
            .map(|k| {
                let e = 2f64.powi(k as i32);
                g.powf(e) + b.powf(e)
            })
            .product();
        num / den / (g * g + 2.0 * b * b)
    }

    #[test]
    fn equal_moduli_rounds() {
        let p = equal((1, 1));
        assert!((prior_step1_prob(&p, 1) - 0.5).abs() < 1e-15);
        assert!((prior_step1_prob(&p, 2) - 0.25).abs() < 1e-15);
        assert!((prior_step2_prob(&p, 1) - 0.5).abs() < 1e-15);
        assert!((prior_step2_prob(&p, 2) - 0.25).abs() < 1e-15);
        assert!((prior_total_prob(&p) - 0.25).abs() < 1e-15);
    }

    #[test]
    fn five_rounds_each_at_equal_moduli() {
        let v = prior_total_prob(&equal((5, 5)));
        assert!((v - (31.0f64 / 32.0).powi(2)).abs() < 1e-14);
        assert!((v - 0.93).abs() < 0.01);
        let v = prior_total_prob(&equal((25, 25)));
        assert!((v - 1.0).abs() < 1e-3);
    }

    #[test]
    fn ratio_form_matches_raw_powers() {
        let (a, b) = (0.7, 0.55);
        let g = (1.0f64 - a * a - b * b).sqrt();
        let p = PriorEcpParams::new(a, b, g, 1, 1).unwrap();
        for n in 1..=6 {
            let fast = prior_step1_prob(&p, n);
            let slow = naive_step1(a, b, g, n);
            assert!((fast - slow).abs() <= 1e-13 * slow.max(1e-300), "n={n}");
            let fast = prior_step2_prob(&p, n);
            let slow = naive_step2(b, g, n);
            assert!((fast - slow).abs() <= 1e-13 * slow.max(1e-300), "m={n}");
        }
    }

    #[test]
    fn large_rounds_stay_finite() {
        let p = PriorEcpParams::new(0.8, 0.5, (1.0f64 - 0.64 - 0.25).sqrt(), 60, 60).unwrap();
        for n in [10, 20, 40, 60] {
            let v = prior_step1_prob(&p, n);
            assert!(v.is_finite() && v >= 0.0);
        }
        let t = prior_total_prob(&p);
        assert!(
            t.is_finite() && t > 0.0 && t <= optimal_total_prob(p.alpha, p.beta, p.gamma) + 1e-9
        );
    }

    #[test]
    fn chain_is_symmetric() {
        for (x, y) in [(0.3, 0.6), (0.5, 0.5), (0.1, 0.9)] {
            for n in 1..8 {
                assert_eq!(chain_ratio(x, y, n), chain_ratio(y, x, n));
            }
        }
    }

    #[test]
    fn parameter_validation() {
        assert!(PriorEcpParams::new(0.5, 0.5, 0.5, 1, 1).is_err());
        assert!(PriorEcpParams::new(1.0, 0.0, 0.0, 1, 1).is_err());
        let s = (1.0f64 / 3.0).sqrt();
        assert!(PriorEcpParams::new(s, s, s, 0, 1).is_err());
        assert!(PriorEcpParams::from_alpha_beta(0.9, 0.6, 1, 1).is_err());
    }

    #[test]
    fn grid_shape() {
        let g = figure3_grid(DEFAULT_GRID_POINTS);
        let (lo, hi) = sweep_alpha_range();
        assert_eq!(g.len(), 200);
        assert_eq!(g[0], lo);
        assert!((hi - g[199] - UPPER_ENDPOINT_GAP).abs() < 1e-15);
        assert!(g.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn default_curve_labels() {
        let labels: Vec<char> = default_curves().iter().map(|c| c.label).collect();
        assert_eq!(labels, ['A', 'B', 'C', 'D']);
        assert_eq!(default_curves()[3].kind, CurveKind::Optimal);
    }

    #[test]
    fn sweep_endpoint_values() {
        let (lo, _) = sweep_alpha_range();
        let rows = figure3_point(lo, &default_curves()).unwrap();
        let d = rows.iter().find(|r| r.curve == 'D').unwrap().probability;
        let c = rows.iter().find(|r| r.curve == 'C').unwrap().probability;
        assert!((d - 1.0).abs() < 1e-9);
        assert!((c - 0.9384765625).abs() < 1e-9);
    }

    #[test]
    fn sweep_rejects_out_of_domain() {
        let curves = default_curves();
        assert!(matches!(figure3_point(0.9, &curves), Err(Error::Domain(_))));
        assert!(matches!(figure3_point(0.5, &curves), Err(Error::Domain(_))));
        assert!(matches!(
            figure3_point(f64::NAN, &curves),
            Err(Error::Domain(_))
        ));
        assert!(figure3_sweep(&[0.6, 0.9], &curves).is_err());
    }
}
