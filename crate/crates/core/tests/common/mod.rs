#![allow(dead_code)]

use echo2d::model::{build_exciton_dimer, ExcitonSystem, MixingAngleReport, SiteDimerParams};
use echo2d::units::UnitContext;
use echo2d::C64;

/// Site parameters of the reference heterodimer (365 / 397 THz, 66 meV).
pub fn reference_params() -> SiteDimerParams {
    let u = UnitContext::default();
    SiteDimerParams {
        omega_a: u.thz_to_rad_per_fs(365.0),
        omega_b: u.thz_to_rad_per_fs(397.0),
        coupling: 66.0,
        mu_a: -1.1,
        mu_b: 1.5,
        biexciton_shift: 0.0,
    }
}

pub fn reference_dimer() -> (ExcitonSystem, MixingAngleReport) {
    build_exciton_dimer(&reference_params()).unwrap()
}

pub fn dimer_with(coupling: f64, shift: f64) -> (ExcitonSystem, MixingAngleReport) {
    build_exciton_dimer(&SiteDimerParams {
        coupling,
        biexciton_shift: shift,
        ..reference_params()
    })
    .unwrap()
}

/// Γ_ab = gamma off the diagonal, zero on it.
pub fn with_coherence_rate(sys: &ExcitonSystem, gamma: f64) -> ExcitonSystem {
    let n = sys.n_levels();
    let rates = (0..n)
        .map(|a| (0..n).map(|b| if a == b { 0.0 } else { gamma }).collect())
        .collect();
    sys.with_rate_matrix(rates).unwrap()
}

pub fn close(a: C64, b: C64, tol: f64) -> bool {
    (a - b).norm() <= tol * a.norm().max(b.norm()).max(f64::MIN_POSITIVE)
}
