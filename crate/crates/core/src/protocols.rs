//! Partially entangled W states, the transmittance planner, and the two
//! concentration drivers.
//!
//! Every party whose coefficient is larger in modulus than the smallest one
//! attenuates its own branch with a variable beam splitter tuned to
//! `t_i = |a_min|² / |a_i|²` and keeps the run only if the detector on the
//! reflected port stays dark. After all such steps every coefficient has
//! modulus `|a_min|`, and the heralded weight is `N |a_min|²`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::optics::{apply_pbs, apply_vbs, detect_vacuum, PbsWiring, VbsSetting};
use crate::state::{Ket, ModeLabel, ModeRegistry, Polarization, PureState, DEFAULT_PRUNE_EPS};

/// Tolerance on `Σ|a_i|² = 1`.
pub const NORMALIZATION_TOL: f64 = 1e-9;

/// A planned transmittance this close to 1 is treated as a no-op.
pub const UNIT_TRANSMITTANCE_TOL: f64 = 1e-12;

/// Ordered W-state coefficients `a_1..a_N`, one per party.
#[derive(Debug, Clone, PartialEq)]
pub struct WCoefficients {
    amps: Vec<Complex64>,
}

impl WCoefficients {
    pub fn new(amps: Vec<Complex64>) -> Result<Self> {
        if amps.len() < 2 {
            return Err(Error::BadCoefficients(format!(
                "need at least 2 parties, got {}",
                amps.len()
            )));
        }
        if let Some(i) = amps
            .iter()
            .position(|a| !(a.re.is_finite() && a.im.is_finite()))
        {
            return Err(Error::BadCoefficients(format!(
                "coefficient {} is not finite",
                i + 1
            )));
        }
        // Anything smaller would be pruned from the simulated state.
        if let Some(i) = amps.iter().position(|a| a.norm_sqr() < DEFAULT_PRUNE_EPS) {
            return Err(Error::BadCoefficients(format!(
                "coefficient {} is zero or below the {DEFAULT_PRUNE_EPS:e} weight floor",
                i + 1
            )));
        }
        let total: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
        if (total - 1.0).abs() > NORMALIZATION_TOL {
            return Err(Error::BadCoefficients(format!(
                "squared moduli sum to {total}, not 1"
            )));
        }
        Ok(WCoefficients { amps })
    }

    pub fn from_real(amps: &[f64]) -> Result<Self> {
        Self::new(amps.iter().map(|&a| Complex64::new(a, 0.0)).collect())
    }

    /// Builds `a_k = √p_k · e^{iθ_k}` from squared moduli and optional phases
    /// in radians.
    pub fn from_squared_moduli(probs: &[f64], phases: Option<&[f64]>) -> Result<Self> {
        if let Some(i) = probs.iter().position(|p| p.is_nan() || *p <= 0.0) {
            return Err(Error::BadCoefficients(format!(
                "squared modulus {} must be positive, got {}",
                i + 1,
                probs[i]
            )));
        }
        let amps = match phases {
            None => probs
                .iter()
                .map(|p| Complex64::new(p.sqrt(), 0.0))
                .collect(),
            Some(ph) => {
                if ph.len() != probs.len() {
                    return Err(Error::BadCoefficients(format!(
                        "{} phases for {} coefficients",
                        ph.len(),
                        probs.len()
                    )));
                }
                if ph.iter().any(|x| !x.is_finite()) {
                    return Err(Error::BadCoefficients("phases must be finite".into()));
                }
                probs
                    .iter()
                    .zip(ph)
                    .map(|(p, th)| Complex64::from_polar(p.sqrt(), *th))
                    .collect()
            }
        };
        Self::new(amps)
    }

    /// Draws `n` coefficients: squared moduli are normalized uniform weights
    /// from `[0.02, 1)`, phases (if requested) uniform on `[-π, π)`.
    pub fn random<R: Rng + ?Sized>(rng: &mut R, n: usize, with_phases: bool) -> Result<Self> {
        let weights: Vec<f64> = (0..n).map(|_| rng.gen_range(0.02..1.0)).collect();
        let total: f64 = weights.iter().sum();
        let probs: Vec<f64> = weights.iter().map(|w| w / total).collect();
        let phases: Option<Vec<f64>> =
            with_phases.then(|| (0..n).map(|_| rng.gen_range(-PI..PI)).collect());
        Self::from_squared_moduli(&probs, phases.as_deref())
    }

    pub fn len(&self) -> usize {
        self.amps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amps.is_empty()
    }

    pub fn amps(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn squared_moduli(&self) -> Vec<f64> {
        self.amps.iter().map(|a| a.norm_sqr()).collect()
    }

    pub fn phases(&self) -> Vec<f64> {
        self.amps.iter().map(|a| a.arg()).collect()
    }

    /// Index of the smallest-modulus coefficient (first one on ties).
    pub fn min_index(&self) -> usize {
        let mut best = 0;
        for (i, a) in self.amps.iter().enumerate() {
            if a.norm_sqr() < self.amps[best].norm_sqr() {
                best = i;
            }
        }
        best
    }

    pub fn min_squared_modulus(&self) -> f64 {
        self.amps[self.min_index()].norm_sqr()
    }

    /// Reorders parties: party `k` of the result is party `perm[k]` of self.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        let mut seen = vec![false; self.len()];
        if perm.len() != self.len()
            || perm
                .iter()
                .any(|&p| p >= seen.len() || std::mem::replace(&mut seen[p], true))
        {
            return Err(Error::BadCoefficients("not a permutation".into()));
        }
        Ok(WCoefficients {
            amps: perm.iter().map(|&p| self.amps[p]).collect(),
        })
    }
}

/// Which physical encoding a W state uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WKind {
    /// One photon spread over N spatial modes.
    SinglePhoton,
    /// N photons, exactly one of them horizontally polarized.
    Polarization,
}

impl WKind {
    pub fn name(self) -> &'static str {
        match self {
            WKind::SinglePhoton => "single-photon",
            WKind::Polarization => "polarization",
        }
    }
}

/// `a1, b1, c1, ...`; parties past `z` get `p27_1`-style labels.
pub fn default_labels(n: usize) -> Vec<ModeLabel> {
    (0..n)
        .map(|i| {
            if i < 26 {
                ModeLabel::new(format!("{}1", (b'a' + i as u8) as char))
            } else {
                ModeLabel::new(format!("p{}_1", i + 1))
            }
        })
        .collect()
}

fn check_labels(n: usize, labels: &[ModeLabel]) -> Result<()> {
    if labels.len() != n {
        return Err(Error::BadLabels(format!(
            "{} labels for {n} parties",
            labels.len()
        )));
    }
    let reg: ModeRegistry = labels.iter().cloned().collect();
    if reg.len() != n {
        return Err(Error::BadLabels("labels must be distinct".into()));
    }
    Ok(())
}

/// The `k`-th basis ket of an N-party W state on the given modes.
fn w_ket(kind: WKind, labels: &[ModeLabel], k: usize) -> Ket {
    match kind {
        WKind::SinglePhoton => Ket::single(labels[k].clone()),
        WKind::Polarization => Ket::new(labels.iter().enumerate().map(|(i, l)| {
            let p = if i == k {
                Polarization::H
            } else {
                Polarization::V
            };
            (l.clone(), p)
        }))
        .expect("distinct labels"),
    }
}

fn w_state(kind: WKind, amps: &[Complex64], labels: &[ModeLabel]) -> Result<PureState> {
    check_labels(amps.len(), labels)?;
    PureState::new(
        amps.iter()
            .enumerate()
            .map(|(k, a)| (w_ket(kind, labels, k), *a)),
    )
}

/// `Σ a_k |0..1_k..0⟩` with an untagged photon in `labels[k]`.
pub fn w_state_single_photon(c: &WCoefficients, labels: &[ModeLabel]) -> Result<PureState> {
    w_state(WKind::SinglePhoton, &c.amps, labels)
}

/// `Σ a_k |V..H_k..V⟩` with one photon per party mode.
pub fn w_state_polarization(c: &WCoefficients, labels: &[ModeLabel]) -> Result<PureState> {
    w_state(WKind::Polarization, &c.amps, labels)
}

/// The equal-modulus W state carrying the input phases,
/// `N^{-1/2} Σ e^{i arg a_k} |k⟩`. The circuits never touch phases, so this
/// is what a successful run must produce.
pub fn target_w_state(c: &WCoefficients, labels: &[ModeLabel], kind: WKind) -> Result<PureState> {
    let s = 1.0 / (c.len() as f64).sqrt();
    let amps: Vec<Complex64> = c
        .amps
        .iter()
        .map(|a| Complex64::from_polar(s, a.arg()))
        .collect();
    w_state(kind, &amps, labels)
}

/// `N · min_i |a_i|²`.
pub fn analytic_total_probability(c: &WCoefficients) -> f64 {
    c.len() as f64 * c.min_squared_modulus()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlanStep {
    pub party: usize,
    pub transmittance: f64,
}

/// Ordered per-party attenuation steps.
#[derive(Debug, Clone, PartialEq)]
pub struct ProtocolPlan {
    steps: Vec<PlanStep>,
    min_index: usize,
}

/// One single-photon step: split the party's mode, herald vacuum on the
/// reflected port.
#[derive(Debug, Clone, PartialEq)]
pub struct SinglePhotonStep {
    pub party: usize,
    pub vbs: VbsSetting,
    pub detector: ModeLabel,
}

/// One polarization step: separate H from V, attenuate the H arm, herald
/// vacuum, then recombine both arms into one mode.
#[derive(Debug, Clone, PartialEq)]
pub struct PolarizationStep {
    pub party: usize,
    pub split: PbsWiring,
    pub vbs: VbsSetting,
    pub detector: ModeLabel,
    pub merge: PbsWiring,
}

/// Optimal plan: every party above the minimum modulus gets
/// `t_i = |a_min|²/|a_i|²`, largest modulus first. Ties with the minimum
/// produce no step.
pub fn plan_transmittances(c: &WCoefficients) -> ProtocolPlan {
    let min_index = c.min_index();
    let floor = c.min_squared_modulus();
    let mut order: Vec<usize> = (0..c.len()).collect();
    // Stable sort keeps party order among equal moduli.
    order.sort_by(|&i, &j| c.amps[j].norm_sqr().total_cmp(&c.amps[i].norm_sqr()));
    let steps = order
        .into_iter()
        .filter(|&i| i != min_index)
        .map(|i| PlanStep {
            party: i,
            transmittance: (floor / c.amps[i].norm_sqr()).min(1.0),
        })
        .filter(|s| 1.0 - s.transmittance > UNIT_TRANSMITTANCE_TOL)
        .collect();
    ProtocolPlan { steps, min_index }
}

impl ProtocolPlan {
    /// An arbitrary plan, used to explore non-optimal settings. Each party
    /// may appear at most once.
    pub fn custom(c: &WCoefficients, steps: Vec<PlanStep>) -> Result<Self> {
        let mut seen = vec![false; c.len()];
        for s in &steps {
            if s.party >= c.len() {
                return Err(Error::BadPlan(format!("party {} out of range", s.party)));
            }
            if std::mem::replace(&mut seen[s.party], true) {
                return Err(Error::BadPlan(format!("party {} appears twice", s.party)));
            }
            if !(0.0..=1.0).contains(&s.transmittance) {
                return Err(Error::BadTransmittance(s.transmittance));
            }
        }
        Ok(ProtocolPlan {
            steps,
            min_index: c.min_index(),
        })
    }

    pub fn steps(&self) -> &[PlanStep] {
        &self.steps
    }

    pub fn min_index(&self) -> usize {
        self.min_index
    }

    /// Concrete single-photon wiring on `labels`; new modes take the next
    /// free suffix of each party's label (`a1` -> `a2`, `a3`).
    pub fn wire_single_photon(&self, labels: &[ModeLabel]) -> Vec<SinglePhotonStep> {
        let mut reg: ModeRegistry = labels.iter().cloned().collect();
        let mut current = labels.to_vec();
        self.steps
            .iter()
            .map(|s| {
                let input = current[s.party].clone();
                let out_transmit = reg.fresh(&input);
                let out_reflect = reg.fresh(&input);
                current[s.party] = out_transmit.clone();
                SinglePhotonStep {
                    party: s.party,
                    detector: out_reflect.clone(),
                    vbs: VbsSetting {
                        input,
                        out_transmit,
                        out_reflect,
                        transmittance: s.transmittance,
                    },
                }
            })
            .collect()
    }

    /// Concrete polarization wiring on `labels`. For party `a1` this uses
    /// `a2`/`a3` for the H/V arms, `a4`/`a5` for the attenuator outputs and
    /// `a6` for the recombined mode.
    pub fn wire_polarization(&self, labels: &[ModeLabel]) -> Vec<PolarizationStep> {
        let mut reg: ModeRegistry = labels.iter().cloned().collect();
        let mut current = labels.to_vec();
        self.steps
            .iter()
            .map(|s| {
                let input = current[s.party].clone();
                let h_arm = reg.fresh(&input);
                let v_arm = reg.fresh(&input);
                let kept = reg.fresh(&input);
                let lost = reg.fresh(&input);
                let merged = reg.fresh(&input);
                let spare = reg.fresh(&input);
                current[s.party] = merged.clone();
                PolarizationStep {
                    party: s.party,
                    split: PbsWiring {
                        in_a: input,
                        in_b: None,
                        out_c: h_arm.clone(),
                        out_d: v_arm.clone(),
                    },
                    vbs: VbsSetting {
                        input: h_arm,
                        out_transmit: kept.clone(),
                        out_reflect: lost.clone(),
                        transmittance: s.transmittance,
                    },
                    detector: lost,
                    merge: PbsWiring {
                        in_a: kept,
                        in_b: Some(v_arm),
                        out_c: merged,
                        out_d: spare,
                    },
                }
            })
            .collect()
    }
}

/// One optical element applied during a run, with the weights it saw.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "element", rename_all = "kebab-case")]
pub enum CircuitEvent {
    Vbs { norm_in: f64, norm_out: f64 },
    Pbs { norm_in: f64, norm_out: f64 },
    Detect { kept: f64, discarded: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunReport {
    pub kind: WKind,
    pub step_probs: Vec<f64>,
    pub total_prob: f64,
    /// Unnormalized heralded state; its squared norm is `total_prob`.
    pub final_state: PureState,
    /// Mode holding each party's photon at the end of the run.
    pub final_labels: Vec<ModeLabel>,
    pub target: PureState,
    pub fidelity_to_target: f64,
    pub events: Vec<CircuitEvent>,
}

struct Tracer {
    state: PureState,
    events: Vec<CircuitEvent>,
}

impl Tracer {
    fn vbs(&mut self, s: &VbsSetting) -> Result<()> {
        let next = apply_vbs(&self.state, s)?;
        self.events.push(CircuitEvent::Vbs {
            norm_in: self.state.norm_squared(),
            norm_out: next.norm_squared(),
        });
        self.state = next;
        Ok(())
    }

    fn pbs(&mut self, w: &PbsWiring) -> Result<()> {
        let next = apply_pbs(&self.state, w)?;
        self.events.push(CircuitEvent::Pbs {
            norm_in: self.state.norm_squared(),
            norm_out: next.norm_squared(),
        });
        self.state = next;
        Ok(())
    }

    fn detect(&mut self, mode: &ModeLabel) -> Result<f64> {
        let out = detect_vacuum(&self.state, mode)?;
        self.events.push(CircuitEvent::Detect {
            kept: out.probability,
            discarded: out.discarded_probability,
        });
        self.state = out.kept_state;
        Ok(out.probability)
    }
}

/// Runs `plan` on the `kind` encoding of `c`, starting from the default
/// party labels.
pub fn execute_plan(c: &WCoefficients, plan: &ProtocolPlan, kind: WKind) -> Result<RunReport> {
    let labels = default_labels(c.len());
    let initial = match kind {
        WKind::SinglePhoton => w_state_single_photon(c, &labels)?,
        WKind::Polarization => w_state_polarization(c, &labels)?,
    };
    let mut tr = Tracer {
        state: initial,
        events: Vec::new(),
    };
    let mut final_labels = labels.clone();
    let mut step_probs = Vec::with_capacity(plan.steps.len());
    match kind {
        WKind::SinglePhoton => {
            for step in plan.wire_single_photon(&labels) {
                tr.vbs(&step.vbs)?;
                step_probs.push(tr.detect(&step.detector)?);
                final_labels[step.party] = step.vbs.out_transmit;
            }
        }
        WKind::Polarization => {
            for step in plan.wire_polarization(&labels) {
                tr.pbs(&step.split)?;
                tr.vbs(&step.vbs)?;
                step_probs.push(tr.detect(&step.detector)?);
                tr.pbs(&step.merge)?;
                final_labels[step.party] = step.merge.out_c;
            }
        }
    }
    let total_prob = step_probs.iter().product();
    let target = target_w_state(c, &final_labels, kind)?;
    let fidelity_to_target = tr.state.fidelity(&target)?;
    Ok(RunReport {
        kind,
        step_probs,
        total_prob,
        final_state: tr.state,
        final_labels,
        target,
        fidelity_to_target,
        events: tr.events,
    })
}

pub fn run_ecp(c: &WCoefficients, kind: WKind) -> Result<RunReport> {
    execute_plan(c, &plan_transmittances(c), kind)
}

pub fn run_single_photon_ecp(c: &WCoefficients) -> Result<RunReport> {
    run_ecp(c, WKind::SinglePhoton)
}

pub fn run_polarization_ecp(c: &WCoefficients) -> Result<RunReport> {
    run_ecp(c, WKind::Polarization)
}
