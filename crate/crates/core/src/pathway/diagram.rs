use std::fmt;

use serde::Serialize;

use super::{Pathway, Side, Sign};
use crate::model::ExcitonSystem;

const ARROW_WIDTH: usize = 8;

/// Plain-text double-sided Feynman diagram. Time runs upward: `lines[0]` is
/// the emission, `lines[7]` the initial ground population.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DiagramText {
    pub title: String,
    pub lines: Vec<String>,
    /// Arrow text of interactions 1–3.
    pub arrows: Vec<String>,
    pub emission: String,
}

impl fmt::Display for DiagramText {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{}", self.title)?;
        for line in &self.lines {
            writeln!(f, "{line}")?;
        }
        Ok(())
    }
}

fn pad(label: &str, width: usize) -> String {
    let n = label.chars().count();
    let mut s = label.to_string();
    s.extend(std::iter::repeat_n(' ', width.saturating_sub(n)));
    s
}

fn pad_left(text: &str, width: usize) -> String {
    let n = text.chars().count();
    let mut s: String = std::iter::repeat_n(' ', width.saturating_sub(n)).collect();
    s.push_str(text);
    s
}

fn arrow(sign: Sign, slot: usize) -> String {
    match sign {
        Sign::Plus => format!("E+{slot} -->"),
        Sign::Minus => format!("<-- E-{slot}"),
    }
}

/// `μ_ab` with the higher-band level first.
fn dipole_label(sys: &ExcitonSystem, x: usize, y: usize) -> String {
    let (hi, lo) = if sys.band(x) >= sys.band(y) { (x, y) } else { (y, x) };
    format!("μ_{}{}", sys.label(hi), sys.label(lo))
}

pub fn render_diagram(sys: &ExcitonSystem, p: &Pathway) -> DiagramText {
    let width = sys
        .labels()
        .iter()
        .map(|l| l.chars().count())
        .max()
        .unwrap_or(1);
    let rails = |ket: usize, bra: usize| {
        format!("|{} {}|", pad(sys.label(ket), width), pad(sys.label(bra), width))
    };
    let blank = format!("|{}|", " ".repeat(2 * width + 1));
    let row = |left: &str, middle: &str, right: &str| {
        format!("  {} {} {}", pad_left(left, ARROW_WIDTH), middle, right)
            .trim_end()
            .to_string()
    };

    let arrows: Vec<String> = (0..3).map(|k| arrow(p.interactions[k].sign, k + 1)).collect();
    let final_pop = p.elements[3];
    let emission = "~~~~>".to_string();

    let mut lines = Vec::with_capacity(8);
    let emit = p.interactions[3];
    lines.push(row(
        &emission,
        &rails(final_pop.ket, final_pop.bra),
        &dipole_label(sys, emit.from, emit.to),
    ));
    for k in (0..3).rev() {
        let e = p.elements[k];
        let omega = format!(
            "t{}  Ω_{}{}",
            k + 1,
            sys.label(e.ket),
            sys.label(e.bra)
        );
        lines.push(row("", &rails(e.ket, e.bra), &omega));
        let inter = p.interactions[k];
        let mu = dipole_label(sys, inter.from, inter.to);
        match inter.side {
            Side::Left => lines.push(row(&arrows[k], &blank, &mu)),
            Side::Right => lines.push(row("", &blank, &format!("{}  {mu}", arrows[k]))),
        }
    }
    let g = sys.ground_index();
    lines.push(row("", &rails(g, g), ""));

    let title = format!(
        "{} F{} [{}{}{}]",
        p.kind.short_name(),
        p.r_index,
        p.signs[0].symbol(),
        p.signs[1].symbol(),
        p.signs[2].symbol()
    );

    DiagramText {
        title,
        lines,
        arrows,
        emission,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{build_exciton_dimer, SiteDimerParams};
    use crate::pathway::{enumerate_pathways, ExperimentKind};

    #[test]
    fn eight_rows_with_ground_at_the_bottom() {
        let (sys, _) = build_exciton_dimer(&SiteDimerParams {
            omega_a: 2.29,
            omega_b: 2.49,
            coupling: 50.0,
            mu_a: 1.0,
            mu_b: 0.7,
            biexciton_shift: 0.0,
        })
        .unwrap();
        for kind in ExperimentKind::ALL {
            for p in enumerate_pathways(&sys, kind) {
                let d = render_diagram(&sys, &p);
                assert_eq!(d.lines.len(), 8);
                assert!(d.lines[7].contains("|g g|"));
                assert!(d.lines[0].trim_start().starts_with("~~~~>"));
                assert_eq!(d.arrows.len(), 3);
                for (k, sign) in p.signs.iter().enumerate() {
                    let tag = format!("E{}{}", sign.symbol(), k + 1);
                    assert!(d.arrows[k].contains(&tag));
                }
            }
        }
    }

    #[test]
    fn arrows_sit_on_the_acting_side() {
        let (sys, _) = build_exciton_dimer(&SiteDimerParams {
            omega_a: 2.29,
            omega_b: 2.49,
            coupling: 50.0,
            mu_a: 1.0,
            mu_b: 0.7,
            biexciton_shift: 0.0,
        })
        .unwrap();
        let p = &enumerate_pathways(&sys, ExperimentKind::Rephasing)[0];
        let d = render_diagram(&sys, p);
        // first interaction of the conjugate branch acts on the bra
        assert!(d.lines[6].trim_start().starts_with('|'));
        assert!(d.lines[6].contains("|   | <-- E-1"));
    }
}
