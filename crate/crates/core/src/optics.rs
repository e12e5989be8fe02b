//! Variable beam splitter, polarizing beam splitter and vacuum-heralding
//! detector, each acting on a [`PureState`].

use std::collections::BTreeMap;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::state::{Convention, Ket, ModeLabel, Polarization, PureState};

/// A variable beam splitter fed on a single port.
///
/// Both output amplitudes are real and nonnegative (`√t`, `√(1−t)`). The
/// second input port is always vacuum in these circuits, so this column
/// convention is unitary on the occupied subspace.
#[derive(Debug, Clone, PartialEq)]
pub struct VbsSetting {
    pub input: ModeLabel,
    pub out_transmit: ModeLabel,
    pub out_reflect: ModeLabel,
    pub transmittance: f64,
}

/// A polarizing beam splitter with two input and two output ports.
///
/// H from `in_a` and V from `in_b` leave through `out_c`; V from `in_a` and
/// H from `in_b` leave through `out_d`. A missing `in_b` is a vacuum port.
#[derive(Debug, Clone, PartialEq)]
pub struct PbsWiring {
    pub in_a: ModeLabel,
    pub in_b: Option<ModeLabel>,
    pub out_c: ModeLabel,
    pub out_d: ModeLabel,
}

impl PbsWiring {
    /// The same splitter traversed backwards. Needs both inputs wired.
    pub fn mirrored(&self) -> Option<PbsWiring> {
        Some(PbsWiring {
            in_a: self.out_c.clone(),
            in_b: Some(self.out_d.clone()),
            out_c: self.in_a.clone(),
            out_d: self.in_b.clone()?,
        })
    }

    fn route(&self, mode: &ModeLabel, pol: Polarization) -> Option<&ModeLabel> {
        let from_a = *mode == self.in_a;
        let from_b = self.in_b.as_ref() == Some(mode);
        match (from_a, from_b, pol) {
            (true, _, Polarization::H) | (_, true, Polarization::V) => Some(&self.out_c),
            (true, _, Polarization::V) | (_, true, Polarization::H) => Some(&self.out_d),
            _ => None,
        }
    }
}

/// Result of heralding on "no click" at a detector.
#[derive(Debug, Clone, PartialEq)]
pub struct BranchOutcome {
    /// Unnormalized state conditioned on the detector staying dark.
    pub kept_state: PureState,
    /// Kept weight relative to the input weight.
    pub probability: f64,
    /// Weight of the terms that would have fired the detector, relative to
    /// the input weight. Computed from those terms, not as `1 - probability`.
    pub discarded_probability: f64,
}

fn accumulate(map: &mut BTreeMap<Ket, Complex64>, ket: Ket, amp: Complex64) {
    *map.entry(ket).or_default() += amp;
}

pub fn apply_vbs(state: &PureState, s: &VbsSetting) -> Result<PureState> {
    let t = s.transmittance;
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::BadTransmittance(t));
    }
    if !state.modes().contains(&s.input) {
        return Err(Error::UnknownMode(s.input.clone()));
    }
    if s.out_transmit == s.out_reflect {
        return Err(Error::ModeCollision(s.out_transmit.clone()));
    }
    let (st, sr) = (t.sqrt(), (1.0 - t).sqrt());
    let mut out = BTreeMap::new();
    for (ket, &amp) in state.terms() {
        let mut rest = ket.clone();
        let pol = rest.take(&s.input);
        for target in [&s.out_transmit, &s.out_reflect] {
            if rest.is_occupied(target) {
                return Err(Error::ModeCollision(target.clone()));
            }
        }
        match pol {
            None => accumulate(&mut out, rest, amp),
            Some(p) => {
                for (target, scale) in [(&s.out_transmit, st), (&s.out_reflect, sr)] {
                    let mut k = rest.clone();
                    k.put(target.clone(), p)?;
                    accumulate(&mut out, k, amp * scale);
                }
            }
        }
    }
    let mut modes = state.modes().clone();
    modes.insert(s.out_transmit.clone());
    modes.insert(s.out_reflect.clone());
    Ok(PureState::from_parts(
        out,
        modes,
        state.convention(),
        state.prune_eps(),
    ))
}

pub fn apply_pbs(state: &PureState, w: &PbsWiring) -> Result<PureState> {
    if state.convention() != Convention::Polarization {
        return Err(Error::WrongConvention);
    }
    if !state.modes().contains(&w.in_a) {
        return Err(Error::UnknownMode(w.in_a.clone()));
    }
    if w.out_c == w.out_d {
        return Err(Error::ModeCollision(w.out_c.clone()));
    }
    if w.in_b.as_ref() == Some(&w.in_a) {
        return Err(Error::ModeCollision(w.in_a.clone()));
    }
    let mut out = BTreeMap::new();
    for (ket, &amp) in state.terms() {
        let mut rest = ket.clone();
        let mut moved = Vec::with_capacity(2);
        for input in std::iter::once(&w.in_a).chain(w.in_b.as_ref()) {
            if let Some(p) = rest.take(input) {
                let dest = w.route(input, p).expect("input port");
                moved.push((dest.clone(), p));
            }
        }
        for (dest, p) in moved {
            rest.put(dest, p)?;
        }
        accumulate(&mut out, rest, amp);
    }
    let mut modes = state.modes().clone();
    for l in [w.in_b.clone(), Some(w.out_c.clone()), Some(w.out_d.clone())]
        .into_iter()
        .flatten()
    {
        modes.insert(l);
    }
    Ok(PureState::from_parts(
        out,
        modes,
        state.convention(),
        state.prune_eps(),
    ))
}

pub fn detect_vacuum(state: &PureState, mode: &ModeLabel) -> Result<BranchOutcome> {
    if !state.modes().contains(mode) {
        return Err(Error::UnknownMode(mode.clone()));
    }
    let total = state.norm_squared();
    if total == 0.0 {
        return Err(Error::ZeroState);
    }
    let mut kept = BTreeMap::new();
    let mut fired = 0.0;
    for (ket, &amp) in state.terms() {
        if ket.is_occupied(mode) {
            fired += amp.norm_sqr();
        } else {
            kept.insert(ket.clone(), amp);
        }
    }
    let kept_state = PureState::from_parts(
        kept,
        state.modes().clone(),
        state.convention(),
        state.prune_eps(),
    );
    let probability = kept_state.norm_squared() / total;
    Ok(BranchOutcome {
        kept_state,
        probability,
        discarded_probability: fired / total,
    })
}
