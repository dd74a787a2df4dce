//! Factored pathway amplitudes and the third-order signal they sum to.
//!
//! Every pathway reduces to `amp · Π_k e^{−iΩ_k τ_k}`. The same factors give
//! the half-sided Fourier transform of any interval as `i / (ω − Ω_k)`, so
//! time, frequency and mixed representations share one evaluator.

use serde::{Deserialize, Serialize};

use crate::model::ExcitonSystem;
use crate::pathway::{enumerate_pathways, ExperimentKind, Pathway, Sign};
use crate::C64;

/// Complex constant 𝓔⁺ of each pulse in time order. 𝓔⁻ is its conjugate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FieldSet {
    pub plus: [C64; 3],
}

impl Default for FieldSet {
    fn default() -> Self {
        FieldSet {
            plus: [C64::new(1.0, 0.0); 3],
        }
    }
}

impl FieldSet {
    /// Pulses of amplitude `e_j` and carrier phase `phi_j`, 𝓔⁺ = e·exp(iφ).
    pub fn from_polar(amplitude: [f64; 3], phase: [f64; 3]) -> Self {
        FieldSet {
            plus: std::array::from_fn(|k| C64::from_polar(amplitude[k], phase[k])),
        }
    }

    pub fn factor(&self, slot: usize, sign: Sign) -> C64 {
        match sign {
            Sign::Plus => self.plus[slot],
            Sign::Minus => self.plus[slot].conj(),
        }
    }
}

/// One fully factored response term.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PathwayAmplitude {
    pub amp: C64,
    /// Complex interval frequencies Ω₁, Ω₂, Ω₃ (rad/fs, imaginary part ≤ 0).
    pub omega: [C64; 3],
    pub conjugate_branch: bool,
}

/// Argument of one interval: a delay or a half-sided transform frequency.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum IntervalArg {
    /// Delay in fs.
    Time(f64),
    /// Angular frequency in rad/fs.
    Freq(f64),
}

impl IntervalArg {
    /// exp(−iΩτ)θ(τ), or the half-sided transform i/(ω − Ω).
    #[inline]
    pub fn factor(self, omega: C64) -> C64 {
        match self {
            IntervalArg::Time(t) if t < 0.0 => C64::new(0.0, 0.0),
            IntervalArg::Time(t) => (C64::new(0.0, -t) * omega).exp(),
            IntervalArg::Freq(w) => C64::i() / (w - omega),
        }
    }
}

impl PathwayAmplitude {
    pub fn evaluate(&self, args: [IntervalArg; 3]) -> C64 {
        self.amp
            * args[0].factor(self.omega[0])
            * args[1].factor(self.omega[1])
            * args[2].factor(self.omega[2])
    }

    pub fn time_domain(&self, tau: [f64; 3]) -> C64 {
        self.evaluate(tau.map(IntervalArg::Time))
    }
}

/// Collapse a pathway into its amplitude and interval frequencies.
///
/// On the conjugate branch the stored elements already carry the reflected
/// frequencies; the remaining minus sign comes from taking the conjugate
/// term out of the commutator expansion.
pub fn factor_pathway(sys: &ExcitonSystem, p: &Pathway, fields: &FieldSet) -> PathwayAmplitude {
    let mut amp = C64::new(p.dipole_product, 0.0);
    for (slot, &sign) in p.signs.iter().enumerate() {
        amp *= fields.factor(slot, sign);
    }
    if p.conjugate_branch {
        amp = -amp;
    }
    let omega = std::array::from_fn(|k| {
        let e = p.elements[k];
        sys.interval_frequency(e.ket, e.bra)
    });
    PathwayAmplitude {
        amp,
        omega,
        conjugate_branch: p.conjugate_branch,
    }
}

/// Enumerate and factor every pathway of `kind` in one step.
pub fn pathway_amplitudes(
    sys: &ExcitonSystem,
    kind: ExperimentKind,
    fields: &FieldSet,
) -> Vec<PathwayAmplitude> {
    enumerate_pathways(sys, kind)
        .iter()
        .map(|p| factor_pathway(sys, p, fields))
        .collect()
}

/// Σ amp·e^{−iΩ₁τ₁}e^{−iΩ₂τ₂}e^{−iΩ₃τ₃}; zero when any delay is negative.
pub fn signal_time_domain(amps: &[PathwayAmplitude], tau: [f64; 3]) -> C64 {
    if tau.iter().any(|&t| t < 0.0) {
        return C64::new(0.0, 0.0);
    }
    amps.iter().map(|a| a.time_domain(tau)).sum()
}

/// Sum over pathways with any mix of delays and transform frequencies.
pub fn signal_mixed(amps: &[PathwayAmplitude], args: [IntervalArg; 3]) -> C64 {
    amps.iter().map(|a| a.evaluate(args)).sum()
}
