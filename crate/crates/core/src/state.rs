//! Sparse pure states over labelled optical modes.
//!
//! A [`PureState`] maps occupation patterns ([`Ket`]) to complex amplitudes.
//! States are allowed to be sub-normalized: after a post-selection the squared
//! norm is the probability of the branch the state describes, and nothing in
//! this module renormalizes behind the caller's back.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Terms with `|amp|²` below this are dropped.
pub const DEFAULT_PRUNE_EPS: f64 = 1e-15;

/// Slack allowed above unit squared norm when building a state.
pub const NORM_SLACK: f64 = 1e-9;

/// Name of a spatial mode such as `a1` or `b3`.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ModeLabel(String);

impl ModeLabel {
    pub fn new(name: impl Into<String>) -> Self {
        ModeLabel(name.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    /// The label with any trailing decimal suffix removed (`a12` -> `a`).
    pub fn stem(&self) -> &str {
        self.0.trim_end_matches(|c: char| c.is_ascii_digit())
    }
}

impl fmt::Debug for ModeLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Display for ModeLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for ModeLabel {
    fn from(s: &str) -> Self {
        ModeLabel::new(s)
    }
}

/// Every mode label ever created in one simulation.
///
/// Labels are never removed, so a detector can still be pointed at a mode
/// whose photon was routed elsewhere earlier.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ModeRegistry {
    labels: BTreeSet<ModeLabel>,
}

impl ModeRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn contains(&self, label: &ModeLabel) -> bool {
        self.labels.contains(label)
    }

    /// Returns false if the label was already present.
    pub fn insert(&mut self, label: ModeLabel) -> bool {
        self.labels.insert(label)
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &ModeLabel> {
        self.labels.iter()
    }

    /// Registers and returns a new label sharing `base`'s stem, using the
    /// smallest numeric suffix not yet taken. Starting from `a1` this yields
    /// `a2`, `a3`, ... in order.
    pub fn fresh(&mut self, base: &ModeLabel) -> ModeLabel {
        let stem = base.stem();
        let label = (1u64..)
            .map(|k| ModeLabel::new(format!("{stem}{k}")))
            .find(|l| !self.labels.contains(l))
            .expect("suffix space exhausted");
        self.labels.insert(label.clone());
        label
    }
}

impl FromIterator<ModeLabel> for ModeRegistry {
    fn from_iter<I: IntoIterator<Item = ModeLabel>>(iter: I) -> Self {
        ModeRegistry {
            labels: iter.into_iter().collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Polarization {
    H,
    V,
    /// Occupation-only photon, used by the single-photon multi-mode states.
    Untagged,
}

impl Polarization {
    pub fn convention(self) -> Convention {
        match self {
            Polarization::H | Polarization::V => Convention::Polarization,
            Polarization::Untagged => Convention::Occupation,
        }
    }
}

/// Whether the photons of a state carry H/V tags or only occupy modes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Convention {
    Occupation,
    Polarization,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Photon {
    pub mode: ModeLabel,
    pub polarization: Polarization,
}

/// An occupation pattern with at most one photon per mode, kept sorted by
/// mode label so that equal patterns compare equal regardless of how they
/// were assembled.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Ket {
    photons: Vec<Photon>,
}

impl Ket {
    pub fn vacuum() -> Self {
        Ket {
            photons: Vec::new(),
        }
    }

    pub fn new<I>(photons: I) -> Result<Self>
    where
        I: IntoIterator<Item = (ModeLabel, Polarization)>,
    {
        let mut photons: Vec<Photon> = photons
            .into_iter()
            .map(|(mode, polarization)| Photon { mode, polarization })
            .collect();
        photons.sort();
        if let Some(w) = photons.windows(2).find(|w| w[0].mode == w[1].mode) {
            return Err(Error::ModeCollision(w[0].mode.clone()));
        }
        let ket = Ket { photons };
        ket.convention()?;
        Ok(ket)
    }

    /// Single untagged photon in `mode`.
    pub fn single(mode: impl Into<ModeLabel>) -> Self {
        Ket {
            photons: vec![Photon {
                mode: mode.into(),
                polarization: Polarization::Untagged,
            }],
        }
    }

    pub fn photons(&self) -> &[Photon] {
        &self.photons
    }

    pub fn photon_count(&self) -> usize {
        self.photons.len()
    }

    fn position(&self, mode: &ModeLabel) -> std::result::Result<usize, usize> {
        self.photons.binary_search_by(|p| p.mode.cmp(mode))
    }

    /// Polarization of the photon in `mode`, if the mode is occupied.
    pub fn occupant(&self, mode: &ModeLabel) -> Option<Polarization> {
        self.position(mode)
            .ok()
            .map(|i| self.photons[i].polarization)
    }

    pub fn is_occupied(&self, mode: &ModeLabel) -> bool {
        self.position(mode).is_ok()
    }

    /// `None` for the vacuum ket.
    pub fn convention(&self) -> Result<Option<Convention>> {
        let mut conv = None;
        for p in &self.photons {
            let c = p.polarization.convention();
            match conv {
                None => conv = Some(c),
                Some(prev) if prev != c => return Err(Error::MixedConvention),
                _ => {}
            }
        }
        Ok(conv)
    }

    /// Removes the photon in `mode`, returning what was there.
    pub(crate) fn take(&mut self, mode: &ModeLabel) -> Option<Polarization> {
        self.position(mode)
            .ok()
            .map(|i| self.photons.remove(i).polarization)
    }

    /// Places a photon; fails if the mode is already occupied.
    pub(crate) fn put(&mut self, mode: ModeLabel, polarization: Polarization) -> Result<()> {
        match self.position(&mode) {
            Ok(_) => Err(Error::ModeCollision(mode)),
            Err(i) => {
                self.photons.insert(i, Photon { mode, polarization });
                Ok(())
            }
        }
    }
}

impl fmt::Display for Ket {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("|")?;
        for (i, p) in self.photons.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            match p.polarization {
                Polarization::H => write!(f, "H@{}", p.mode)?,
                Polarization::V => write!(f, "V@{}", p.mode)?,
                Polarization::Untagged => write!(f, "1@{}", p.mode)?,
            }
        }
        f.write_str("⟩")
    }
}

/// Sparse superposition of kets, possibly sub-normalized.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    terms: BTreeMap<Ket, Complex64>,
    modes: ModeRegistry,
    convention: Convention,
    prune_eps: f64,
}

impl PureState {
    /// Builds a state from explicit terms. Repeated kets are summed.
    ///
    /// All kets must carry the same photon number and polarization
    /// convention, and the squared norm must lie in `(0, 1 + 1e-9]`.
    pub fn new<I>(terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Ket, Complex64)>,
    {
        Self::with_prune_eps(terms, DEFAULT_PRUNE_EPS)
    }

    pub fn with_prune_eps<I>(terms: I, prune_eps: f64) -> Result<Self>
    where
        I: IntoIterator<Item = (Ket, Complex64)>,
    {
        let mut map: BTreeMap<Ket, Complex64> = BTreeMap::new();
        let mut convention = None;
        let mut count = None;
        for (ket, amp) in terms {
            if let Some(c) = ket.convention()? {
                match convention {
                    None => convention = Some(c),
                    Some(prev) if prev != c => return Err(Error::MixedConvention),
                    _ => {}
                }
            }
            match count {
                None => count = Some(ket.photon_count()),
                Some(n) if n != ket.photon_count() => {
                    return Err(Error::MixedPhotonNumber(n, ket.photon_count()))
                }
                _ => {}
            }
            *map.entry(ket).or_default() += amp;
        }
        if map.is_empty() {
            return Err(Error::EmptyState);
        }
        let modes = map
            .keys()
            .flat_map(|k| k.photons.iter().map(|p| p.mode.clone()))
            .collect();
        let state = PureState::from_parts(
            map,
            modes,
            convention.unwrap_or(Convention::Occupation),
            prune_eps,
        );
        let norm = state.norm_squared();
        if !norm.is_finite() || norm > 1.0 + NORM_SLACK {
            return Err(Error::NormTooLarge(norm));
        }
        if state.is_empty() {
            return Err(Error::ZeroState);
        }
        Ok(state)
    }

    /// Assembles a state without validation, pruning negligible terms.
    /// May yield an empty (zero-weight) state.
    pub(crate) fn from_parts(
        terms: BTreeMap<Ket, Complex64>,
        modes: ModeRegistry,
        convention: Convention,
        prune_eps: f64,
    ) -> Self {
        let terms = terms
            .into_iter()
            .filter(|(_, a)| a.norm_sqr() >= prune_eps)
            .collect();
        PureState {
            terms,
            modes,
            convention,
            prune_eps,
        }
    }

    /// Registers additional (vacuum) modes.
    pub fn with_modes<I: IntoIterator<Item = ModeLabel>>(mut self, modes: I) -> Self {
        for m in modes {
            self.modes.insert(m);
        }
        self
    }

    pub fn convention(&self) -> Convention {
        self.convention
    }

    pub fn prune_eps(&self) -> f64 {
        self.prune_eps
    }

    pub fn modes(&self) -> &ModeRegistry {
        &self.modes
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    /// True for the zero-weight state left by a post-selection that can
    /// never succeed.
    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Ket, &Complex64)> {
        self.terms.iter()
    }

    pub fn amplitude(&self, ket: &Ket) -> Complex64 {
        self.terms.get(ket).copied().unwrap_or_default()
    }

    pub fn norm_squared(&self) -> f64 {
        self.terms.values().map(|a| a.norm_sqr()).sum()
    }

    /// Rescales to unit norm; amplitude ratios are untouched.
    pub fn normalized(&self) -> Result<PureState> {
        let n = self.norm_squared();
        if n.is_nan() || n < self.prune_eps {
            return Err(Error::ZeroState);
        }
        let scale = 1.0 / n.sqrt();
        let mut out = self.clone();
        for a in out.terms.values_mut() {
            *a *= scale;
        }
        Ok(out)
    }

    /// `⟨self|other⟩` without normalization, summed in canonical ket order.
    pub fn inner(&self, other: &PureState) -> Complex64 {
        self.terms
            .iter()
            .filter_map(|(k, a)| other.terms.get(k).map(|b| a.conj() * b))
            .sum()
    }

    /// `|⟨â|b̂⟩|²` for the normalized versions of both states.
    ///
    /// Disjoint supports give 0; mixing tagged and untagged conventions is an
    /// error. A zero-weight argument also gives 0.
    pub fn fidelity(&self, other: &PureState) -> Result<f64> {
        if self.convention != other.convention {
            return Err(Error::IncompatibleStates);
        }
        let na = self.norm_squared();
        let nb = other.norm_squared();
        if na == 0.0 || nb == 0.0 {
            return Ok(0.0);
        }
        let f = self.inner(other).norm_sqr() / (na * nb);
        Ok(f.clamp(0.0, 1.0))
    }
}

impl fmt::Display for PureState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (i, (k, a)) in self.terms.iter().enumerate() {
            if i > 0 {
                f.write_str(" + ")?;
            }
            if a.im == 0.0 {
                write!(f, "{:.6}{}", a.re, k)?;
            } else {
                write!(f, "({:.6}{:+.6}i){}", a.re, a.im, k)?;
            }
        }
        Ok(())
    }
}
