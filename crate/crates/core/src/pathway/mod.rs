//! Liouville pathways that survive the rotating-wave and phase-matching
//! selection rules for a detected direction k_sig = −k_A + k_B + k_C.
//!
//! A pathway is one term of the expanded nested commutator: a sequence of
//! three dipole interactions, each acting on the ket (left) or bra (right)
//! of the density matrix, followed by the emission trace.
//!
//! For the conjugate branch (rephasing), the analytic signal is the complex
//! conjugate of a nonconjugate term. Pathways on that branch are stored in
//! conjugated form: sides are mirrored and each operator carries the sign of
//! the field that drives it, so the first interaction raises the bra. The
//! stored density-matrix elements then already carry the reflected interval
//! frequencies and no further bookkeeping is needed downstream.

mod diagram;

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::model::ExcitonSystem;

pub use diagram::{render_diagram, DiagramText};

/// Field sign of one interaction: 𝓔⁺ (+k) or 𝓔⁻ (−k).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Sign {
    #[serde(rename = "+")]
    Plus,
    #[serde(rename = "-")]
    Minus,
}

impl Sign {
    pub fn flip(self) -> Sign {
        match self {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
        }
    }

    pub fn symbol(self) -> char {
        match self {
            Sign::Plus => '+',
            Sign::Minus => '-',
        }
    }
}

/// Where an interaction acts relative to ρ₀.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Left,
    Right,
}

impl Side {
    fn mirror(self) -> Side {
        match self {
            Side::Left => Side::Right,
            Side::Right => Side::Left,
        }
    }
}

/// Pulse ordering relative to the conjugated beam A.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    /// A arrives first: (−, +, +), photon echo, conjugate branch.
    Rephasing,
    /// A arrives second: (+, −, +), free polarization decay.
    #[serde(rename = "nonrephasing")]
    NonRephasing,
    /// A arrives third: (+, +, −).
    TwoQuantum,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 3] = [
        ExperimentKind::Rephasing,
        ExperimentKind::NonRephasing,
        ExperimentKind::TwoQuantum,
    ];

    /// Field signs of the three time-ordered interactions.
    pub fn signs(self) -> [Sign; 3] {
        use Sign::*;
        match self {
            ExperimentKind::Rephasing => [Minus, Plus, Plus],
            ExperimentKind::NonRephasing => [Plus, Minus, Plus],
            ExperimentKind::TwoQuantum => [Plus, Plus, Minus],
        }
    }

    /// Time slot (0-based) occupied by the conjugated beam A.
    pub fn conjugated_slot(self) -> usize {
        match self {
            ExperimentKind::Rephasing => 0,
            ExperimentKind::NonRephasing => 1,
            ExperimentKind::TwoQuantum => 2,
        }
    }

    /// The commutator terms F_r that survive phase matching for this ordering.
    pub fn families(self) -> &'static [u8] {
        match self {
            ExperimentKind::Rephasing => &[1, 2, 3, 4],
            ExperimentKind::NonRephasing => &[1, 2, 4],
            ExperimentKind::TwoQuantum => &[1, 3],
        }
    }

    /// Rephasing signals are the complex conjugate of a commutator term.
    pub fn conjugate_branch(self) -> bool {
        matches!(self, ExperimentKind::Rephasing)
    }

    /// Which interval is held fixed in a 2D spectrum (0-based).
    pub fn fixed_interval(self) -> usize {
        match self {
            ExperimentKind::TwoQuantum => 0,
            _ => 1,
        }
    }

    /// The two intervals Fourier transformed in a 2D spectrum (0-based).
    pub fn transformed_intervals(self) -> [usize; 2] {
        match self {
            ExperimentKind::TwoQuantum => [1, 2],
            _ => [0, 2],
        }
    }

    pub fn short_name(self) -> &'static str {
        match self {
            ExperimentKind::Rephasing => "R",
            ExperimentKind::NonRephasing => "nR",
            ExperimentKind::TwoQuantum => "2Q",
        }
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ExperimentKind::Rephasing => "rephasing",
            ExperimentKind::NonRephasing => "nonrephasing",
            ExperimentKind::TwoQuantum => "two_quantum",
        })
    }
}

impl FromStr for ExperimentKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "rephasing" | "r" => Ok(ExperimentKind::Rephasing),
            "nonrephasing" | "non_rephasing" | "nr" => Ok(ExperimentKind::NonRephasing),
            "two_quantum" | "twoquantum" | "2q" => Ok(ExperimentKind::TwoQuantum),
            other => Err(Error::invalid(format!("unknown experiment kind {other:?}"))),
        }
    }
}

/// Sign of the commutator term F_r.
pub fn family_sign(r: u8) -> f64 {
    match r {
        2 | 3 => -1.0,
        _ => 1.0,
    }
}

/// Placement of interactions 1–3 in the nonconjugate form of F_r.
pub fn family_sides(r: u8) -> [Side; 3] {
    use Side::*;
    match r {
        1 => [Left, Left, Left],
        2 => [Left, Right, Left],
        3 => [Left, Left, Right],
        4 => [Left, Right, Right],
        _ => panic!("commutator term index must be 1..=4, got {r}"),
    }
}

/// A density-matrix element |ket⟩⟨bra|.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Element {
    pub ket: usize,
    pub bra: usize,
}

impl Element {
    pub fn new(ket: usize, bra: usize) -> Self {
        Element { ket, bra }
    }

    pub fn is_population(self) -> bool {
        self.ket == self.bra
    }
}

/// One interaction: which operator acted, where, and the matrix element used.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interaction {
    pub side: Side,
    /// Sign of the dipole operator part (and of the driving field).
    pub sign: Sign,
    /// Level before and after on the side that changed.
    pub from: usize,
    pub to: usize,
    pub dipole: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PathwayClass {
    #[serde(rename = "GSB")]
    GroundStateBleach,
    #[serde(rename = "SE")]
    StimulatedEmission,
    #[serde(rename = "ESA")]
    ExcitedStateAbsorption,
    #[serde(rename = "2Q")]
    TwoQuantum,
}

impl PathwayClass {
    pub fn abbreviation(self) -> &'static str {
        match self {
            PathwayClass::GroundStateBleach => "GSB",
            PathwayClass::StimulatedEmission => "SE",
            PathwayClass::ExcitedStateAbsorption => "ESA",
            PathwayClass::TwoQuantum => "2Q",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Pathway {
    pub kind: ExperimentKind,
    /// Which commutator term F_r (1..=4) the pathway belongs to.
    pub r_index: u8,
    /// Field signs (p1, p2, p3) of the detected term.
    pub signs: [Sign; 3],
    pub sides: [Side; 3],
    /// Elements during intervals 1, 2, 3 and the population left by the
    /// emission trace. The initial element is always the ground population.
    pub elements: [Element; 4],
    /// Interactions 1–3 followed by the emission.
    pub interactions: [Interaction; 4],
    /// Product of the four dipole entries times the sign of F_r.
    pub dipole_product: f64,
    pub conjugate_branch: bool,
}

impl Pathway {
    pub fn interval(&self, k: usize) -> Element {
        self.elements[k]
    }
}

/// Enumerate every nonzero pathway of `kind` on `sys`.
///
/// Ordered by commutator index, then lexicographically by the level indices
/// of the interval elements.
pub fn enumerate_pathways(sys: &ExcitonSystem, kind: ExperimentKind) -> Vec<Pathway> {
    let signs = kind.signs();
    let conj = kind.conjugate_branch();
    let g = sys.ground_index();
    let mut out = Vec::new();

    for &r in kind.families() {
        let mut sides = family_sides(r);
        if conj {
            sides = sides.map(Side::mirror);
        }
        let mut stack: Vec<(Element, Vec<(Element, Interaction)>)> =
            vec![(Element::new(g, g), Vec::with_capacity(3))];
        let mut partial = Vec::new();
        // depth-first over the three interactions
        while let Some((current, trail)) = stack.pop() {
            let depth = trail.len();
            if depth == 3 {
                partial.push((current, trail));
                continue;
            }
            for (next, inter) in apply(sys, current, sides[depth], signs[depth]) {
                let mut t = trail.clone();
                t.push((next, inter));
                stack.push((next, t));
            }
        }
        for (last, trail) in partial {
            // Emission: Tr[μ |ket⟩⟨bra|] = ⟨bra|μ|ket⟩, leaving |bra⟩⟨bra|.
            let emit = sys.mu(last.bra, last.ket);
            if emit == 0.0 {
                continue;
            }
            let emission = Interaction {
                side: Side::Left,
                sign: if sys.band(last.bra) < sys.band(last.ket) {
                    Sign::Minus
                } else {
                    Sign::Plus
                },
                from: last.ket,
                to: last.bra,
                dipole: emit,
            };
            let product = trail.iter().map(|(_, i)| i.dipole).product::<f64>() * emit;
            let dipole_product = family_sign(r) * product;
            if dipole_product == 0.0 {
                continue;
            }
            out.push(Pathway {
                kind,
                r_index: r,
                signs,
                sides,
                elements: [trail[0].0, trail[1].0, trail[2].0, Element::new(last.bra, last.bra)],
                interactions: [trail[0].1, trail[1].1, trail[2].1, emission],
                dipole_product,
                conjugate_branch: conj,
            });
        }
    }

    out.sort_by(|a, b| {
        a.r_index
            .cmp(&b.r_index)
            .then_with(|| a.elements.cmp(&b.elements))
    });
    out
}

/// All elements reachable from `rho` by the given operator part on `side`.
///
/// Left μ⁺ raises the ket, left μ⁻ lowers it; right μ⁻ raises the bra and
/// right μ⁺ lowers it (μ⁻ is the transpose of μ⁺ for real dipoles).
fn apply(sys: &ExcitonSystem, rho: Element, side: Side, sign: Sign) -> Vec<(Element, Interaction)> {
    let mu = sys.mu_plus();
    let n = sys.n_levels();
    let mut out = Vec::new();
    for level in 0..n {
        let (next, from, dipole) = match (side, sign) {
            (Side::Left, Sign::Plus) => (Element::new(level, rho.bra), rho.ket, mu[level][rho.ket]),
            (Side::Left, Sign::Minus) => (Element::new(level, rho.bra), rho.ket, mu[rho.ket][level]),
            (Side::Right, Sign::Minus) => (Element::new(rho.ket, level), rho.bra, mu[level][rho.bra]),
            (Side::Right, Sign::Plus) => (Element::new(rho.ket, level), rho.bra, mu[rho.bra][level]),
        };
        if dipole != 0.0 {
            out.push((
                next,
                Interaction {
                    side,
                    sign,
                    from,
                    to: level,
                    dipole,
                },
            ));
        }
    }
    out
}

/// Ground-state bleach, stimulated emission, excited-state absorption or
/// two-quantum coherence, decided from the interval-2 element and the band
/// reached during interval 3.
pub fn classify_pathway(sys: &ExcitonSystem, p: &Pathway) -> PathwayClass {
    let g = sys.ground_index();
    let waiting = p.elements[1];
    let third = p.elements[2];
    if sys.band(waiting.ket) == 2 || sys.band(waiting.bra) == 2 {
        PathwayClass::TwoQuantum
    } else if waiting.ket == g && waiting.bra == g {
        PathwayClass::GroundStateBleach
    } else if sys.band(third.ket) == 2 || sys.band(third.bra) == 2 {
        PathwayClass::ExcitedStateAbsorption
    } else {
        PathwayClass::StimulatedEmission
    }
}

/// Commutator indices that actually appear in a pathway list.
pub fn families_present(pathways: &[Pathway]) -> BTreeSet<u8> {
    pathways.iter().map(|p| p.r_index).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::dimer::*;
    use crate::model::{build_exciton_dimer, SiteDimerParams};

    fn dimer(coupling: f64) -> ExcitonSystem {
        let p = SiteDimerParams {
            omega_a: 2.2934,
            omega_b: 2.4944,
            coupling,
            mu_a: -1.1,
            mu_b: 1.5,
            biexciton_shift: 0.0,
        };
        build_exciton_dimer(&p).unwrap().0
    }

    #[test]
    fn two_quantum_pathways_run_through_the_double_excitation() {
        let sys = dimer(66.0);
        let paths = enumerate_pathways(&sys, ExperimentKind::TwoQuantum);
        assert!(!paths.is_empty());
        for p in &paths {
            assert_eq!(p.elements[1], Element::new(F, G));
            assert_eq!(classify_pathway(&sys, p), PathwayClass::TwoQuantum);
        }
        assert_eq!(families_present(&paths), [1, 3].into());
    }

    #[test]
    fn nonrephasing_has_no_third_family() {
        for j in [0.0, 20.0, 66.0] {
            let paths = enumerate_pathways(&dimer(j), ExperimentKind::NonRephasing);
            assert!(paths.iter().all(|p| p.r_index != 3));
        }
    }

    #[test]
    fn first_interaction_raises_and_final_element_is_population() {
        let sys = dimer(66.0);
        for kind in ExperimentKind::ALL {
            for p in enumerate_pathways(&sys, kind) {
                let first = p.elements[0];
                assert_eq!(sys.band(first.ket) + sys.band(first.bra), 1);
                assert!(p.elements[3].is_population());
                assert_ne!(p.signs, [Sign::Plus; 3]);
                assert_ne!(p.signs, [Sign::Minus; 3]);
                for w in p.elements.windows(2).take(2) {
                    let (a, b) = (w[0], w[1]);
                    let ket_step = (sys.band(a.ket) as i32 - sys.band(b.ket) as i32).abs();
                    let bra_step = (sys.band(a.bra) as i32 - sys.band(b.bra) as i32).abs();
                    assert_eq!(ket_step + bra_step, 1);
                    assert!(a.ket == b.ket || a.bra == b.bra);
                }
            }
        }
    }

    #[test]
    fn rephasing_starts_on_the_bra() {
        let sys = dimer(66.0);
        for p in enumerate_pathways(&sys, ExperimentKind::Rephasing) {
            assert!(p.conjugate_branch);
            assert_eq!(p.elements[0].ket, G);
            assert_ne!(p.elements[0].bra, G);
        }
    }

    #[test]
    fn classification_labels() {
        let sys = dimer(66.0);
        let paths = enumerate_pathways(&sys, ExperimentKind::Rephasing);
        let find = |e: [Element; 3]| {
            paths
                .iter()
                .find(|p| p.elements[..3] == e)
                .unwrap_or_else(|| panic!("missing pathway {e:?}"))
        };
        let gsb = find([Element::new(G, ALPHA), Element::new(G, G), Element::new(BETA, G)]);
        assert_eq!(classify_pathway(&sys, gsb), PathwayClass::GroundStateBleach);
        let se = find([Element::new(G, BETA), Element::new(ALPHA, BETA), Element::new(ALPHA, G)]);
        assert_eq!(classify_pathway(&sys, se), PathwayClass::StimulatedEmission);
        let esa = find([Element::new(G, BETA), Element::new(ALPHA, BETA), Element::new(F, BETA)]);
        assert_eq!(classify_pathway(&sys, esa), PathwayClass::ExcitedStateAbsorption);
        assert_eq!(se.r_index, 2);
        assert_eq!(gsb.r_index, 3);
        assert_eq!(esa.r_index, 4);
    }

    #[test]
    fn enumeration_is_deterministic_and_ordered() {
        let sys = dimer(40.0);
        let a = enumerate_pathways(&sys, ExperimentKind::Rephasing);
        let b = enumerate_pathways(&sys, ExperimentKind::Rephasing);
        assert_eq!(a, b);
        for w in a.windows(2) {
            assert!((w[0].r_index, w[0].elements) < (w[1].r_index, w[1].elements));
        }
    }

    #[test]
    fn zero_dipole_row_prunes_everything() {
        let labels = vec!["g".into(), "e".into()];
        let sys = ExcitonSystem::new(labels, vec![0.0, 2.0], vec![0, 1], vec![vec![0.0; 2]; 2]).unwrap();
        for kind in ExperimentKind::ALL {
            assert!(enumerate_pathways(&sys, kind).is_empty());
        }
    }

    #[test]
    fn kind_parsing() {
        for kind in ExperimentKind::ALL {
            assert_eq!(kind.to_string().parse::<ExperimentKind>().unwrap(), kind);
        }
        assert!("echo".parse::<ExperimentKind>().is_err());
    }
}
