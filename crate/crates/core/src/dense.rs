//! Brute-force route to the third-order signal.
//!
//! The full density matrix is pushed through the nested commutator
//! `Tr[μ G₃[μ^{p₃}, G₂[μ^{p₂}, G₁[μ^{p₁}, ρ₀]]]]` with explicit N×N complex
//! matrix products, using the field signs of the chosen pulse ordering. No
//! pathway is ever enumerated here, which makes it an independent check on
//! the pathway sum.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::model::ExcitonSystem;
use crate::pathway::{ExperimentKind, Sign};
use crate::response::{FieldSet, IntervalArg};
use crate::C64;

type CMat = DMatrix<C64>;

struct Operators {
    raise: CMat,
    lower: CMat,
    dipole: CMat,
    /// Ω_ab = ω_a − ω_b − iΓ_ab.
    omega: CMat,
    rho0: CMat,
}

impl Operators {
    fn new(sys: &ExcitonSystem) -> Self {
        let n = sys.n_levels();
        let mu = sys.mu_plus();
        let raise = CMat::from_fn(n, n, |a, b| C64::new(mu[a][b], 0.0));
        let lower = raise.transpose();
        let dipole = &raise + &lower;
        let e = sys.energies();
        let rates = sys.rates();
        let omega = CMat::from_fn(n, n, |a, b| C64::new(e[a] - e[b], -rates[a][b]));
        let g = sys.ground_index();
        let rho0 = CMat::from_fn(n, n, |a, b| {
            if a == g && b == g {
                C64::new(1.0, 0.0)
            } else {
                C64::new(0.0, 0.0)
            }
        });
        Operators {
            raise,
            lower,
            dipole,
            omega,
            rho0,
        }
    }

    fn part(&self, sign: Sign) -> &CMat {
        match sign {
            Sign::Plus => &self.raise,
            Sign::Minus => &self.lower,
        }
    }
}

fn commutator(op: &CMat, rho: &CMat) -> CMat {
    op * rho - rho * op
}

fn field_product(kind: ExperimentKind, fields: &FieldSet) -> C64 {
    kind.signs()
        .iter()
        .enumerate()
        .map(|(k, &s)| fields.factor(k, s))
        .product()
}

/// Signal with each interval given either as a delay or as a half-sided
/// transform frequency, propagating element-wise (Hadamard form). This
/// handles any symmetric rate matrix, including Γ_aa = 0 with Γ_ab ≠ 0.
pub fn dense_response(
    sys: &ExcitonSystem,
    kind: ExperimentKind,
    fields: &FieldSet,
    args: [IntervalArg; 3],
) -> C64 {
    let ops = Operators::new(sys);
    let mut rho = ops.rho0.clone();
    for (k, &sign) in kind.signs().iter().enumerate() {
        rho = commutator(ops.part(sign), &rho);
        rho = rho.zip_map(&ops.omega, |x, w| x * args[k].factor(w));
    }
    (&ops.dipole * rho).trace() * field_product(kind, fields)
}

/// Time-domain signal at delays (τ₁, τ₂, τ₃) in fs.
pub fn dense_oracle(sys: &ExcitonSystem, kind: ExperimentKind, tau: [f64; 3], fields: &FieldSet) -> C64 {
    dense_response(sys, kind, fields, tau.map(IntervalArg::Time))
}

/// Same signal with Hilbert-space propagators Λ = exp(−i·diag(ω_a − iγ_a)·τ)
/// applied as ρ → ΛρΛ†. Only valid when every Γ_ab equals γ_a + γ_b.
pub fn dense_oracle_hilbert(
    sys: &ExcitonSystem,
    kind: ExperimentKind,
    tau: [f64; 3],
    fields: &FieldSet,
) -> Result<C64> {
    if !sys.is_level_separable() {
        return Err(Error::invalid(
            "rate matrix is not of the form γ_a + γ_b; use the element-wise propagator",
        ));
    }
    if tau.iter().any(|&t| t < 0.0) {
        return Ok(C64::new(0.0, 0.0));
    }
    let ops = Operators::new(sys);
    let e = sys.energies();
    let gamma = sys.gamma();
    let mut rho = ops.rho0.clone();
    for (k, &sign) in kind.signs().iter().enumerate() {
        let lambda = CMat::from_diagonal(&nalgebra::DVector::from_fn(sys.n_levels(), |a, _| {
            (C64::new(0.0, -tau[k]) * C64::new(e[a], -gamma[a])).exp()
        }));
        rho = commutator(ops.part(sign), &rho);
        rho = &lambda * rho * lambda.adjoint();
    }
    Ok((&ops.dipole * rho).trace() * field_product(kind, fields))
}
