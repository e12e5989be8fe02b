//! Simulation and closed-form analysis of optimal linear-optics
//! concentration of partially entangled W states.
//!
//! * [`state`]: sparse pure states over labelled optical modes.
//! * [`optics`]: variable beam splitter, polarizing beam splitter and a
//!   vacuum-heralding detector.
//! * [`protocols`]: W-state builders, the transmittance planner and the
//!   single-photon and polarization concentration drivers.
//! * [`comparison`]: success probabilities of the earlier iterative scheme
//!   and the α sweep against the optimal protocol.
//! * [`io`]: command-line value parsers, JSON run records and sweep CSV.

pub mod comparison;
pub mod error;
pub mod io;
pub mod optics;
pub mod protocols;
pub mod state;

pub use error::{Error, Result};
pub use optics::{apply_pbs, apply_vbs, detect_vacuum, BranchOutcome, PbsWiring, VbsSetting};
pub use protocols::{
    analytic_total_probability, plan_transmittances, run_polarization_ecp, run_single_photon_ecp,
    ProtocolPlan, RunReport, WCoefficients, WKind,
};
pub use state::{Ket, ModeLabel, Polarization, PureState};
