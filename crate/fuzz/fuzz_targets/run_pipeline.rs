#![no_main]
//! Text coefficients in, full simulation out: whatever the parser and the
//! coefficient validator accept must simulate without error and hit the
//! closed form.
use ecp_core::io::parse_real_list;
use ecp_core::protocols::{analytic_total_probability, run_ecp, WCoefficients, WKind};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else {
        return;
    };
    let Ok(probs) = parse_real_list(s) else {
        return;
    };
    if probs.len() > 12 {
        return;
    }
    let Ok(c) = WCoefficients::from_squared_moduli(&probs, None) else {
        return;
    };
    let analytic = analytic_total_probability(&c);
    for kind in [WKind::SinglePhoton, WKind::Polarization] {
        let r = run_ecp(&c, kind).expect("validated coefficients simulate");
        assert!((r.total_prob - analytic).abs() < 1e-9, "{probs:?}");
    }
});
