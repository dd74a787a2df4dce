//! Closed-form heterodimer spectra, written term by term.
//!
//! These expressions are kept exactly as derived by hand for the four-level
//! dimer {g, α, β, f}, including their grouping of terms, so they serve as a
//! check on the general pathway machinery rather than a reuse of it.
//!
//! The lineshape is `G(x) = √(2π)·i/(πx)`: the δ part is dropped because it
//! only matters at zero linewidth, which the stick forms cover. Relative to
//! the pathway route (kernel `i/x` per interval) every grid value therefore
//! carries the constant [`G_SQUARED`].
//!
//! The nonrephasing expression groups the excited-state absorption terms
//! with the ground-state bleach at Ω_βg (and Ω_αg), which is only exact for
//! zero biexciton shift and Γ_fα = Γ_βg. The rephasing expression is exact
//! for any symmetric rate matrix.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::dimer::{ALPHA, BETA, F, G};
use crate::model::ExcitonSystem;
use crate::C64;

/// (√(2π)/π)²: ratio of the oracle's G·G to the product of two `i/x` kernels.
pub const G_SQUARED: f64 = 2.0 / PI;

/// `G(x)` without its δ part.
pub fn lineshape(x: C64) -> C64 {
    (2.0 * PI).sqrt() * C64::i() / (PI * x)
}

/// One term `prefactor · e^{−i·tau2_phase·τ₂} · G(ω₁ − ω1_pole) · G(ω₃ − ω3_pole)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AnalyticSpectrumTerm {
    pub prefactor: C64,
    pub tau2_phase: C64,
    pub omega1_pole: C64,
    pub omega3_pole: C64,
}

impl AnalyticSpectrumTerm {
    pub fn evaluate(&self, omega1: f64, tau2: f64, omega3: f64) -> C64 {
        self.prefactor
            * (C64::new(0.0, -tau2) * self.tau2_phase).exp()
            * lineshape(omega1 - self.omega1_pole)
            * lineshape(omega3 - self.omega3_pole)
    }
}

/// Exciton dipoles and complex frequencies of a dimer system.
struct Dimer {
    ag: f64,
    bg: f64,
    fa: f64,
    fb: f64,
    om: [[C64; 4]; 4],
}

impl Dimer {
    fn new(sys: &ExcitonSystem) -> Result<Self> {
        if sys.n_levels() != 4 || sys.bands() != [0, 1, 1, 2] || sys.ground_index() != G {
            return Err(Error::invalid(
                "the analytic oracle needs a four-level dimer ordered g, α, β, f",
            ));
        }
        let mu = sys.mu_plus();
        let om = std::array::from_fn(|i| std::array::from_fn(|j| sys.interval_frequency(i, j)));
        Ok(Dimer {
            ag: mu[ALPHA][G],
            bg: mu[BETA][G],
            fa: mu[F][ALPHA],
            fb: mu[F][BETA],
            om,
        })
    }

    fn o(&self, i: usize, j: usize) -> C64 {
        self.om[i][j]
    }
}

fn term(prefactor: f64, tau2_phase: C64, omega1_pole: C64, omega3_pole: C64) -> AnalyticSpectrumTerm {
    AnalyticSpectrumTerm {
        prefactor: C64::new(prefactor, 0.0),
        tau2_phase,
        omega1_pole,
        omega3_pole,
    }
}

/// Dephasing-inclusive rephasing spectrum as a list of terms.
///
/// `G(ω₁ + Ω*)` is stored as a pole at `−Ω*`, and `e^{+iΩ*τ₂}` as a τ₂
/// phase of `−Ω*`.
pub fn rephasing_terms(sys: &ExcitonSystem) -> Result<Vec<AnalyticSpectrumTerm>> {
    let d = Dimer::new(sys)?;
    let (ag, bg, fa, fb) = (d.ag, d.bg, d.fa, d.fb);
    let gg = d.o(G, G);
    let aa = d.o(ALPHA, ALPHA);
    let bb = d.o(BETA, BETA);
    let ba = d.o(BETA, ALPHA);
    let w1a = -d.o(ALPHA, G).conj();
    let w1b = -d.o(BETA, G).conj();
    let (ag3, bg3) = (d.o(ALPHA, G), d.o(BETA, G));
    let (fa3, fb3) = (d.o(F, ALPHA), d.o(F, BETA));
    Ok(vec![
        // μ_αg⁴ (e^{−iΩ_gg τ₂} + e^{−iΩ_αα τ₂}) G(ω₁+Ω*_αg) G(ω₃−Ω_αg)
        term(ag.powi(4), gg, w1a, ag3),
        term(ag.powi(4), aa, w1a, ag3),
        // μ_βg⁴ (e^{−iΩ_gg τ₂} + e^{−iΩ_ββ τ₂}) G(ω₁+Ω*_βg) G(ω₃−Ω_βg)
        term(bg.powi(4), gg, w1b, bg3),
        term(bg.powi(4), bb, w1b, bg3),
        // −μ_αg μ_fα (μ_αg μ_fα e^{−iΩ_αα τ₂} + μ_βg μ_fβ e^{−iΩ_βα τ₂}) G(ω₁+Ω*_αg) G(ω₃−Ω_fα)
        term(-ag * fa * ag * fa, aa, w1a, fa3),
        term(-ag * fa * bg * fb, ba, w1a, fa3),
        // μ_αg² μ_βg² (e^{−iΩ_gg τ₂} + e^{−iΩ_βα τ₂}) G(ω₁+Ω*_αg) G(ω₃−Ω_βg)
        term(ag * ag * bg * bg, gg, w1a, bg3),
        term(ag * ag * bg * bg, ba, w1a, bg3),
        // −μ_βg μ_fβ (μ_βg μ_fβ e^{−iΩ_ββ τ₂} + μ_αg μ_fα e^{+iΩ*_βα τ₂}) G(ω₁+Ω*_βg) G(ω₃−Ω_fβ)
        term(-bg * fb * bg * fb, bb, w1b, fb3),
        term(-bg * fb * ag * fa, -ba.conj(), w1b, fb3),
        // μ_αg² μ_βg² (e^{−iΩ_gg τ₂} + e^{+iΩ*_βα τ₂}) G(ω₁+Ω*_βg) G(ω₃−Ω_αg)
        term(ag * ag * bg * bg, gg, w1b, ag3),
        term(ag * ag * bg * bg, -ba.conj(), w1b, ag3),
    ])
}

/// Dephasing-inclusive nonrephasing spectrum as a list of terms.
pub fn nonrephasing_terms(sys: &ExcitonSystem) -> Result<Vec<AnalyticSpectrumTerm>> {
    let d = Dimer::new(sys)?;
    let (ag, bg, fa, fb) = (d.ag, d.bg, d.fa, d.fb);
    let gg = d.o(G, G);
    let aa = d.o(ALPHA, ALPHA);
    let bb = d.o(BETA, BETA);
    let ba = d.o(BETA, ALPHA);
    let (oag, obg) = (d.o(ALPHA, G), d.o(BETA, G));
    let (ofa, ofb) = (d.o(F, ALPHA), d.o(F, BETA));
    let cross = ag * bg * fa * fb;
    Ok(vec![
        // μ_αg² (μ_βg² e^{−iΩ_gg τ₂} − μ_fα² e^{−iΩ_αα τ₂}) G(ω₁−Ω_αg) G(ω₃−Ω_βg)
        term(ag * ag * bg * bg, gg, oag, obg),
        term(-ag * ag * fa * fa, aa, oag, obg),
        // μ_βg² (μ_αg² e^{−iΩ_gg τ₂} − μ_fβ² e^{−iΩ_ββ τ₂}) G(ω₁−Ω_βg) G(ω₃−Ω_αg)
        term(bg * bg * ag * ag, gg, obg, oag),
        term(-bg * bg * fb * fb, bb, obg, oag),
        // (μ_αg⁴ (e^{−iΩ_gg τ₂} + e^{−iΩ_αα τ₂}) + μ_αg² μ_βg² e^{+iΩ*_βα τ₂}) G(ω₁−Ω_αg) G(ω₃−Ω_αg)
        term(ag.powi(4), gg, oag, oag),
        term(ag.powi(4), aa, oag, oag),
        term(ag * ag * bg * bg, -ba.conj(), oag, oag),
        // −μ_αg μ_βg μ_fα μ_fβ e^{+iΩ*_βα τ₂} G(ω₁−Ω_αg) G(ω₃−Ω_fβ)
        term(-cross, -ba.conj(), oag, ofb),
        // (μ_βg⁴ (e^{−iΩ_gg τ₂} + e^{−iΩ_ββ τ₂}) + μ_αg² μ_βg² e^{−iΩ_βα τ₂}) G(ω₁−Ω_βg) G(ω₃−Ω_βg)
        term(bg.powi(4), gg, obg, obg),
        term(bg.powi(4), bb, obg, obg),
        term(ag * ag * bg * bg, ba, obg, obg),
        // −μ_αg μ_βg μ_fα μ_fβ e^{−iΩ_βα τ₂} G(ω₁−Ω_βg) G(ω₃−Ω_fα)
        term(-cross, ba, obg, ofa),
    ])
}

fn sum_terms(terms: &[AnalyticSpectrumTerm], omega1: f64, tau2: f64, omega3: f64) -> C64 {
    if tau2 < 0.0 {
        return C64::new(0.0, 0.0);
    }
    terms.iter().map(|t| t.evaluate(omega1, tau2, omega3)).sum()
}

/// Rephasing spectrum E_R(ω₁, τ₂, ω₃) with unit pulse constants.
pub fn analytic_rephasing(sys: &ExcitonSystem, omega1: f64, tau2: f64, omega3: f64) -> Result<C64> {
    Ok(sum_terms(&rephasing_terms(sys)?, omega1, tau2, omega3))
}

/// Nonrephasing spectrum E_nR(ω₁, τ₂, ω₃) with unit pulse constants.
pub fn analytic_nonrephasing(sys: &ExcitonSystem, omega1: f64, tau2: f64, omega3: f64) -> Result<C64> {
    Ok(sum_terms(&nonrephasing_terms(sys)?, omega1, tau2, omega3))
}

/// Weight of one δ-peak in an undamped spectrum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AnalyticStick {
    pub omega_x: f64,
    pub omega_y: f64,
    pub amplitude: C64,
}

struct Undamped {
    ag: f64,
    bg: f64,
    fa: f64,
    fb: f64,
    wa: f64,
    wb: f64,
    wf: f64,
}

impl Undamped {
    fn new(sys: &ExcitonSystem) -> Result<Self> {
        let d = Dimer::new(sys)?;
        let e = sys.energies();
        Ok(Undamped {
            ag: d.ag,
            bg: d.bg,
            fa: d.fa,
            fb: d.fb,
            wa: e[ALPHA],
            wb: e[BETA],
            wf: e[F],
        })
    }

    fn beat(&self, sign: f64, tau2: f64) -> C64 {
        C64::from_polar(1.0, sign * (self.wb - self.wa) * tau2)
    }
}

/// Zero-linewidth rephasing peaks at τ₂ (ω₁ at −ω_e).
pub fn rephasing_sticks(sys: &ExcitonSystem, tau2: f64) -> Result<Vec<AnalyticStick>> {
    let u = Undamped::new(sys)?;
    let (ag, bg, fa, fb) = (u.ag, u.bg, u.fa, u.fb);
    let coupling = ag * bg * (ag * bg - fa * fb);
    Ok(vec![
        AnalyticStick {
            omega_x: -u.wa,
            omega_y: u.wa,
            amplitude: C64::new(2.0 * ag.powi(4), 0.0),
        },
        AnalyticStick {
            omega_x: -u.wb,
            omega_y: u.wb,
            amplitude: C64::new(2.0 * bg.powi(4), 0.0),
        },
        AnalyticStick {
            omega_x: -u.wa,
            omega_y: u.wb,
            amplitude: ag * ag * (bg * bg - fa * fa) + coupling * u.beat(-1.0, tau2),
        },
        AnalyticStick {
            omega_x: -u.wb,
            omega_y: u.wa,
            amplitude: bg * bg * (ag * ag - fb * fb) + coupling * u.beat(1.0, tau2),
        },
    ])
}

/// Zero-linewidth nonrephasing peaks at τ₂.
pub fn nonrephasing_sticks(sys: &ExcitonSystem, tau2: f64) -> Result<Vec<AnalyticStick>> {
    let u = Undamped::new(sys)?;
    let (ag, bg, fa, fb) = (u.ag, u.bg, u.fa, u.fb);
    let coupling = ag * bg * (ag * bg - fa * fb);
    Ok(vec![
        AnalyticStick {
            omega_x: u.wa,
            omega_y: u.wb,
            amplitude: C64::new(ag * ag * (bg * bg - fa * fa), 0.0),
        },
        AnalyticStick {
            omega_x: u.wb,
            omega_y: u.wa,
            amplitude: C64::new(bg * bg * (ag * ag - fb * fb), 0.0),
        },
        AnalyticStick {
            omega_x: u.wa,
            omega_y: u.wa,
            amplitude: 2.0 * ag.powi(4) + coupling * u.beat(1.0, tau2),
        },
        AnalyticStick {
            omega_x: u.wb,
            omega_y: u.wb,
            amplitude: 2.0 * bg.powi(4) + coupling * u.beat(-1.0, tau2),
        },
    ])
}

/// Zero-linewidth two-quantum peaks at τ₁ = 0, both at ω₂ = ω_f.
pub fn analytic_two_quantum(sys: &ExcitonSystem) -> Result<Vec<AnalyticStick>> {
    let u = Undamped::new(sys)?;
    let (ag, bg, fa, fb) = (u.ag, u.bg, u.fa, u.fb);
    Ok(vec![
        AnalyticStick {
            omega_x: u.wf,
            omega_y: u.wa,
            amplitude: C64::new((ag * fa + bg * fb) * (ag * fa - bg * fb), 0.0),
        },
        AnalyticStick {
            omega_x: u.wf,
            omega_y: u.wb,
            amplitude: C64::new((bg * fb + ag * fa) * (bg * fb - ag * fa), 0.0),
        },
    ])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{build_exciton_dimer, PopulationRelaxation, SiteDimerParams};

    fn dimer(coupling: f64, mu_a: f64, mu_b: f64) -> ExcitonSystem {
        build_exciton_dimer(&SiteDimerParams {
            omega_a: 2.2934,
            omega_b: 2.4944,
            coupling,
            mu_a,
            mu_b,
            biexciton_shift: 0.0,
        })
        .unwrap()
        .0
    }

    #[test]
    fn uncoupled_cross_peaks_and_two_quantum_vanish() {
        let sys = dimer(0.0, -1.1, 1.5);
        for s in rephasing_sticks(&sys, 17.0).unwrap().iter().skip(2) {
            assert!(s.amplitude.norm() < 1e-14);
        }
        for s in nonrephasing_sticks(&sys, 17.0).unwrap().iter().take(2) {
            assert!(s.amplitude.norm() < 1e-14);
        }
        for s in analytic_two_quantum(&sys).unwrap() {
            assert!(s.amplitude.norm() < 1e-14);
        }
    }

    #[test]
    fn rephasing_cross_peak_prefactor_at_zero_delay() {
        let sys = dimer(66.0, -1.1, 1.5);
        let mu = sys.mu_plus();
        let (ag, bg, fa, fb) = (mu[ALPHA][G], mu[BETA][G], mu[F][ALPHA], mu[F][BETA]);
        let s = rephasing_sticks(&sys, 0.0).unwrap();
        let expected = bg * bg * (ag * ag - fb * fb) + ag * bg * (ag * bg - fa * fb);
        assert!((s[3].amplitude.re - expected).abs() < 1e-13);
    }

    #[test]
    fn homodimer_two_quantum_prefactors() {
        // θ = π/4 leaves μ_βg = μ_fβ = 0, so the prefactors are ±(μ_αg μ_fα)² = ±4μ⁴
        let sys = dimer_homo(0.8);
        let s = analytic_two_quantum(&sys).unwrap();
        let m4 = 4.0 * 0.8f64.powi(4);
        assert!((s[0].amplitude.re - m4).abs() < 1e-12);
        assert!((s[1].amplitude.re + m4).abs() < 1e-12);
    }

    fn dimer_homo(mu: f64) -> ExcitonSystem {
        build_exciton_dimer(&SiteDimerParams {
            omega_a: 2.3,
            omega_b: 2.3,
            coupling: 30.0,
            mu_a: mu,
            mu_b: mu,
            biexciton_shift: 0.0,
        })
        .unwrap()
        .0
    }

    #[test]
    fn dephasing_forms_reduce_to_sticks_near_the_poles() {
        // With a tiny Γ the G·G product near a pole is dominated by that pole;
        // the value there is prefactor · (√(2π)/π)² · (i/(iΓ))².
        let gamma = 1e-7;
        let sys = dimer(66.0, -1.1, 1.5)
            .set_rates(&[gamma / 2.0; 4], PopulationRelaxation::Disabled)
            .unwrap();
        let undamped = dimer(66.0, -1.1, 1.5);
        let tau2 = 13.0;
        let sticks = rephasing_sticks(&undamped, tau2).unwrap();
        for s in sticks {
            let v = analytic_rephasing(&sys, s.omega_x, tau2, s.omega_y).unwrap();
            let residue = v * (gamma * gamma) / G_SQUARED;
            assert!((residue - s.amplitude).norm() < 1e-5 * (1.0 + s.amplitude.norm()), "{residue} vs {}", s.amplitude);
        }
        let sticks = nonrephasing_sticks(&undamped, tau2).unwrap();
        for s in sticks {
            let v = analytic_nonrephasing(&sys, s.omega_x, tau2, s.omega_y).unwrap();
            let residue = v * (gamma * gamma) / G_SQUARED;
            assert!((residue - s.amplitude).norm() < 1e-5 * (1.0 + s.amplitude.norm()), "{residue} vs {}", s.amplitude);
        }
    }

    #[test]
    fn rejects_non_dimers() {
        let sys = ExcitonSystem::new(
            vec!["g".into(), "e".into()],
            vec![0.0, 2.0],
            vec![0, 1],
            vec![vec![0.0, 0.0], vec![1.0, 0.0]],
        )
        .unwrap();
        assert!(analytic_rephasing(&sys, 0.0, 0.0, 0.0).is_err());
    }
}
