//! System description: level energies, band structure, the raising part of
//! the dipole operator and the phenomenological rate matrix.

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_4};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::units::UnitContext;
use crate::C64;

/// Level indices of the exciton dimer built by [`build_exciton_dimer`].
pub mod dimer {
    pub const G: usize = 0;
    pub const ALPHA: usize = 1;
    pub const BETA: usize = 2;
    pub const F: usize = 3;
}

/// Site-basis description of a coupled heterodimer.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SiteDimerParams {
    /// Site transition frequency of chromophore a (rad/fs).
    pub omega_a: f64,
    /// Site transition frequency of chromophore b (rad/fs), `omega_b >= omega_a`.
    pub omega_b: f64,
    /// Coupling energy J (meV).
    pub coupling: f64,
    pub mu_a: f64,
    pub mu_b: f64,
    /// Biexciton binding energy (meV), subtracted from the doubly excited level.
    #[serde(default)]
    pub biexciton_shift: f64,
}

impl SiteDimerParams {
    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("omega_a", self.omega_a),
            ("omega_b", self.omega_b),
            ("coupling", self.coupling),
            ("mu_a", self.mu_a),
            ("mu_b", self.mu_b),
            ("biexciton_shift", self.biexciton_shift),
        ];
        for (name, v) in fields {
            if !v.is_finite() {
                return Err(Error::NonFinite(name));
            }
        }
        if self.omega_b < self.omega_a {
            return Err(Error::invalid(format!(
                "site frequencies must satisfy omega_b >= omega_a (got {} < {})",
                self.omega_b, self.omega_a
            )));
        }
        Ok(())
    }
}

/// Intermediate quantities of the site-to-exciton rotation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MixingAngleReport {
    /// Mean site frequency (rad/fs).
    pub omega_bar: f64,
    /// Half-difference (ω_a − ω_b)/2 (rad/fs).
    pub delta: f64,
    /// Mixing angle θ = arctan(J/ħΔ)/2 (rad).
    pub theta: f64,
    pub omega_alpha: f64,
    pub omega_beta: f64,
    pub omega_f: f64,
    pub mu_alpha_g: f64,
    pub mu_beta_g: f64,
    pub mu_f_alpha: f64,
    pub mu_f_beta: f64,
}

impl MixingAngleReport {
    /// ω_βα, the single-exciton splitting.
    pub fn splitting(&self) -> f64 {
        self.omega_beta - self.omega_alpha
    }
}

/// Whether `set_rates` keeps population decay on the diagonal of Γ.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PopulationRelaxation {
    #[default]
    Enabled,
    Disabled,
}

/// An N-level system with band structure 0 (ground), 1 (single) and
/// 2 (double excitation).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExcitonSystem {
    labels: Vec<String>,
    /// Level energies as angular frequencies (rad/fs).
    energies: Vec<f64>,
    band: Vec<u8>,
    ground: usize,
    /// Raising part of the dipole operator, `mu_plus[a][b] = <a|μ⁺|b>`.
    mu_plus: Vec<Vec<f64>>,
    /// Per-level ad-hoc widths γ_a (fs⁻¹).
    gamma: Vec<f64>,
    /// Pairwise rates Γ_ab (fs⁻¹).
    rates: Vec<Vec<f64>>,
}

impl ExcitonSystem {
    /// Build a system with all rates zero. `mu_plus[a][b]` may be nonzero
    /// only when `band[a] == band[b] + 1`.
    pub fn new(
        labels: Vec<String>,
        energies: Vec<f64>,
        band: Vec<u8>,
        mu_plus: Vec<Vec<f64>>,
    ) -> Result<Self> {
        let n = energies.len();
        if n < 2 {
            return Err(Error::invalid("a system needs at least two levels"));
        }
        if labels.len() != n || band.len() != n {
            return Err(Error::invalid("labels, energies and band must have equal length"));
        }
        if mu_plus.len() != n || mu_plus.iter().any(|row| row.len() != n) {
            return Err(Error::invalid(format!("mu_plus must be {n}x{n}")));
        }
        if energies.iter().any(|e| !e.is_finite()) {
            return Err(Error::NonFinite("energies"));
        }
        if mu_plus.iter().flatten().any(|m| !m.is_finite()) {
            return Err(Error::NonFinite("mu_plus"));
        }
        if band.iter().any(|&b| b > 2) {
            return Err(Error::invalid("band index must be 0, 1 or 2"));
        }
        let grounds: Vec<usize> = (0..n).filter(|&i| band[i] == 0).collect();
        let ground = match grounds.as_slice() {
            [g] => *g,
            _ => return Err(Error::invalid("exactly one level must have band 0")),
        };
        if energies[ground] != 0.0 {
            return Err(Error::invalid("the ground level must have zero energy"));
        }
        for a in 0..n {
            for b in 0..n {
                if mu_plus[a][b] != 0.0 && band[a] != band[b] + 1 {
                    return Err(Error::invalid(format!(
                        "mu_plus[{a}][{b}] couples band {} to band {}; only single band steps up are allowed",
                        band[b], band[a]
                    )));
                }
            }
        }
        Ok(ExcitonSystem {
            labels,
            energies,
            band,
            ground,
            mu_plus,
            gamma: vec![0.0; n],
            rates: vec![vec![0.0; n]; n],
        })
    }

    pub fn n_levels(&self) -> usize {
        self.energies.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, level: usize) -> &str {
        &self.labels[level]
    }

    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    pub fn band(&self, level: usize) -> u8 {
        self.band[level]
    }

    pub fn bands(&self) -> &[u8] {
        &self.band
    }

    pub fn ground_index(&self) -> usize {
        self.ground
    }

    pub fn mu_plus(&self) -> &[Vec<f64>] {
        &self.mu_plus
    }

    /// `<a|μ|b>` for the full (Hermitian, real) dipole operator.
    pub fn mu(&self, a: usize, b: usize) -> f64 {
        self.mu_plus[a][b] + self.mu_plus[b][a]
    }

    pub fn gamma(&self) -> &[f64] {
        &self.gamma
    }

    pub fn rates(&self) -> &[Vec<f64>] {
        &self.rates
    }

    pub fn rate(&self, a: usize, b: usize) -> f64 {
        self.rates[a][b]
    }

    /// True when Γ_ab = γ_a + γ_b holds for every pair, diagonal included,
    /// so the rates can be carried by a per-level complex energy.
    pub fn is_level_separable(&self) -> bool {
        let n = self.n_levels();
        (0..n).all(|a| {
            (0..n).all(|b| {
                let expected = self.gamma[a] + self.gamma[b];
                (self.rates[a][b] - expected).abs() <= 1e-15 * (1.0 + expected.abs())
            })
        })
    }

    /// Substitute Γ_ab = γ_a + γ_b. With population relaxation disabled the
    /// diagonal Γ_aa is zero.
    pub fn set_rates(&self, gamma: &[f64], populations: PopulationRelaxation) -> Result<Self> {
        let n = self.n_levels();
        if gamma.len() != n {
            return Err(Error::invalid(format!(
                "expected {n} per-level rates, got {}",
                gamma.len()
            )));
        }
        if gamma.iter().any(|g| !g.is_finite()) {
            return Err(Error::NonFinite("gamma"));
        }
        if let Some(g) = gamma.iter().find(|&&g| g < 0.0) {
            return Err(Error::invalid(format!("rates must be non-negative (got {g})")));
        }
        let mut rates = vec![vec![0.0; n]; n];
        for a in 0..n {
            for b in 0..n {
                rates[a][b] = if a == b && populations == PopulationRelaxation::Disabled {
                    0.0
                } else {
                    gamma[a] + gamma[b]
                };
            }
        }
        Ok(ExcitonSystem {
            gamma: gamma.to_vec(),
            rates,
            ..self.clone()
        })
    }

    /// Replace the rate matrix directly. The per-level widths are reset to
    /// half the diagonal.
    pub fn with_rate_matrix(&self, rates: Vec<Vec<f64>>) -> Result<Self> {
        let n = self.n_levels();
        if rates.len() != n || rates.iter().any(|row| row.len() != n) {
            return Err(Error::invalid(format!("rate matrix must be {n}x{n}")));
        }
        for a in 0..n {
            for b in 0..n {
                let r = rates[a][b];
                if !r.is_finite() {
                    return Err(Error::NonFinite("rate matrix"));
                }
                if r < 0.0 {
                    return Err(Error::invalid(format!("Gamma[{a}][{b}] = {r} is negative")));
                }
                if r != rates[b][a] {
                    return Err(Error::invalid(format!("rate matrix is not symmetric at ({a}, {b})")));
                }
            }
        }
        let gamma = (0..n).map(|a| rates[a][a] / 2.0).collect();
        Ok(ExcitonSystem {
            gamma,
            rates,
            ..self.clone()
        })
    }

    /// Ω = (ω_ket − ω_bra) − iΓ_ket,bra; the element |ket⟩⟨bra| evolves as e^{−iΩτ}.
    pub fn interval_frequency(&self, ket: usize, bra: usize) -> C64 {
        C64::new(
            self.energies[ket] - self.energies[bra],
            -self.rates[ket][bra],
        )
    }
}

/// Diagonalise the heterodimer and return the four-level exciton system
/// {g, α, β, f} with all rates zero.
pub fn build_exciton_dimer(params: &SiteDimerParams) -> Result<(ExcitonSystem, MixingAngleReport)> {
    params.validate()?;
    let units = UnitContext::default();
    let coupling = units.mev_to_rad_per_fs(params.coupling);
    let omega_bar = 0.5 * (params.omega_a + params.omega_b);
    let delta = 0.5 * (params.omega_a - params.omega_b);

    let (theta, cos, sin, omega_alpha, omega_beta) = if delta == 0.0 {
        // Homodimer: limit of arctan(∞)/2, symmetric combination is α.
        let (c, s) = (FRAC_1_SQRT_2, FRAC_1_SQRT_2);
        (FRAC_PI_4, c, s, omega_bar + coupling, omega_bar - coupling)
    } else {
        let ratio = coupling / delta;
        let theta = 0.5 * ratio.atan();
        // sec(2θ) − 1 written so that it is exactly zero for J = 0.
        let sec_minus_one = ratio * ratio / ((1.0 + ratio * ratio).sqrt() + 1.0);
        let shift = delta * sec_minus_one;
        (
            theta,
            theta.cos(),
            theta.sin(),
            params.omega_a + shift,
            params.omega_b - shift,
        )
    };

    let mu_alpha_g = cos * params.mu_a + sin * params.mu_b;
    let mu_beta_g = -sin * params.mu_a + cos * params.mu_b;
    let mu_f_alpha = sin * params.mu_a + cos * params.mu_b;
    let mu_f_beta = cos * params.mu_a - sin * params.mu_b;
    let omega_f = params.omega_a + params.omega_b - units.mev_to_rad_per_fs(params.biexciton_shift);

    use dimer::*;
    let mut mu_plus = vec![vec![0.0; 4]; 4];
    mu_plus[ALPHA][G] = mu_alpha_g;
    mu_plus[BETA][G] = mu_beta_g;
    mu_plus[F][ALPHA] = mu_f_alpha;
    mu_plus[F][BETA] = mu_f_beta;

    let sys = ExcitonSystem::new(
        ["g", "α", "β", "f"].iter().map(|s| s.to_string()).collect(),
        vec![0.0, omega_alpha, omega_beta, omega_f],
        vec![0, 1, 1, 2],
        mu_plus,
    )?;
    let report = MixingAngleReport {
        omega_bar,
        delta,
        theta,
        omega_alpha,
        omega_beta,
        omega_f,
        mu_alpha_g,
        mu_beta_g,
        mu_f_alpha,
        mu_f_beta,
    };
    Ok((sys, report))
}
