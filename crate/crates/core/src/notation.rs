//! Text notation for slides: plain pairs "(11, 01)" and colored slides
//! "(R11, G01)", where R marks the red member.

use crate::dye::DyeAssignment;
use crate::error::{DesignError, Result};
use crate::exact::ExactDesign;
use crate::factorial::{FactorialSpec, PairSpace, Treatment};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ColoredSlide {
    pub red: Treatment,
    pub green: Treatment,
}

fn groups(text: &str) -> Result<Vec<&str>> {
    let mut out = Vec::new();
    let mut rest = text;
    while let Some(open) = rest.find('(') {
        let close = rest[open..]
            .find(')')
            .ok_or_else(|| DesignError::InvalidDesign("unbalanced parenthesis in slide list".into()))?;
        out.push(&rest[open + 1..open + close]);
        rest = &rest[open + close + 1..];
    }
    Ok(out)
}

fn split_two(group: &str) -> Result<(&str, &str)> {
    let mut parts = group.split(',').map(str::trim);
    match (parts.next(), parts.next(), parts.next()) {
        (Some(a), Some(b), None) => Ok((a, b)),
        _ => Err(DesignError::InvalidDesign(format!("({group}) is not a pair"))),
    }
}

/// "(01, 00), (02, 00)" → pairs in written order.
pub fn parse_pair_list(spec: &FactorialSpec, text: &str) -> Result<Vec<(Treatment, Treatment)>> {
    groups(text)?
        .into_iter()
        .map(|g| {
            let (a, b) = split_two(g)?;
            Ok((spec.parse_treatment(a)?, spec.parse_treatment(b)?))
        })
        .collect()
}

/// Parses one colored member, e.g. "R01" → (true, 01).
fn colored_member(spec: &FactorialSpec, token: &str) -> Result<(bool, Treatment)> {
    let mut chars = token.chars();
    let red = match chars.next() {
        Some('R') | Some('r') => true,
        Some('G') | Some('g') => false,
        _ => return Err(DesignError::InvalidDesign(format!("{token:?} must start with R or G"))),
    };
    Ok((red, spec.parse_treatment(chars.as_str())?))
}

pub fn parse_colored_slide(spec: &FactorialSpec, group: &str) -> Result<ColoredSlide> {
    let (a, b) = split_two(group.trim().trim_start_matches('(').trim_end_matches(')'))?;
    let (ra, ta) = colored_member(spec, a)?;
    let (rb, tb) = colored_member(spec, b)?;
    match (ra, rb) {
        (true, false) => Ok(ColoredSlide { red: ta, green: tb }),
        (false, true) => Ok(ColoredSlide { red: tb, green: ta }),
        _ => Err(DesignError::InvalidDesign(format!(
            "({group}) needs exactly one red and one green member"
        ))),
    }
}

/// "(R01, G00), (G02, R00)" → colored slides in written order.
pub fn parse_colored_list(spec: &FactorialSpec, text: &str) -> Result<Vec<ColoredSlide>> {
    groups(text)?
        .into_iter()
        .map(|g| parse_colored_slide(spec, g))
        .collect()
}

/// Collects colored slides into a design and a dye assignment aligned to
/// its canonical slide order.
pub fn colored_design(space: &PairSpace, slides: &[ColoredSlide]) -> Result<(ExactDesign, DyeAssignment)> {
    let mut keyed = Vec::with_capacity(slides.len());
    for s in slides {
        let k = space.position_of(&s.red, &s.green)?;
        let sign: i8 = if space.pairs()[k].index.first == s.red { 1 } else { -1 };
        keyed.push((k, sign));
    }
    keyed.sort_by_key(|&(k, _)| k);
    let positions: Vec<usize> = keyed.iter().map(|&(k, _)| k).collect();
    let design = ExactDesign::from_positions(space.n_pairs(), &positions)?;
    let dye = DyeAssignment::new(keyed.into_iter().map(|(_, s)| s).collect())?;
    Ok((design, dye))
}

/// Red and green members of a slide on pair `k` with sign `sign`.
pub fn colors(space: &PairSpace, k: usize, sign: i8) -> ColoredSlide {
    let p = &space.pairs()[k].index;
    if sign > 0 {
        ColoredSlide {
            red: p.first.clone(),
            green: p.second.clone(),
        }
    } else {
        ColoredSlide {
            red: p.second.clone(),
            green: p.first.clone(),
        }
    }
}

/// "(R11, G01)" with the pair's first member written first.
pub fn format_colored(space: &PairSpace, k: usize, sign: i8) -> String {
    let spec = space.spec();
    let p = &space.pairs()[k].index;
    let (c1, c2) = if sign > 0 { ('R', 'G') } else { ('G', 'R') };
    format!("({c1}{}, {c2}{})", spec.label(&p.first), spec.label(&p.second))
}

pub fn format_design(space: &PairSpace, design: &ExactDesign) -> String {
    design
        .slides()
        .iter()
        .map(|&k| space.pair_label(k))
        .collect::<Vec<_>>()
        .join(", ")
}

pub fn format_colored_design(space: &PairSpace, design: &ExactDesign, q: &DyeAssignment) -> String {
    design
        .slides()
        .iter()
        .zip(q.signs())
        .map(|(&k, &s)| format_colored(space, k, s))
        .collect::<Vec<_>>()
        .join(", ")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::factorial::Parametrization;

    fn space() -> PairSpace {
        PairSpace::new(&FactorialSpec::uniform(vec![3, 3], Parametrization::Baseline).unwrap())
    }

    #[test]
    fn colored_slides_round_trip() {
        let s = space();
        let text = "(G02, R00), (R01, G00), (R11, G01), (G11, R10)";
        let slides = parse_colored_list(s.spec(), text).unwrap();
        assert_eq!(slides[0].red.to_string(), "00");
        let (d, q) = colored_design(&s, &slides).unwrap();
        assert_eq!(d.n_slides(), 4);
        let rendered = format_colored_design(&s, &d, &q);
        assert_eq!(rendered, "(R01, G00), (G02, R00), (R11, G01), (G11, R10)");
    }

    #[test]
    fn pair_lists() {
        let s = space();
        let pairs = parse_pair_list(s.spec(), "(01, 00), (10, 00),\n (10, 00)").unwrap();
        let d = ExactDesign::from_pairs(&s, &pairs).unwrap();
        assert_eq!(format_design(&s, &d), "(01, 00), (10, 00), (10, 00)");
    }

    #[test]
    fn malformed_input() {
        let spec = space().spec().clone();
        assert!(parse_colored_list(&spec, "(R01, R00)").is_err());
        assert!(parse_colored_list(&spec, "(X01, G00)").is_err());
        assert!(parse_pair_list(&spec, "(01, 00").is_err());
        assert!(parse_pair_list(&spec, "(01, 00, 02)").is_err());
        assert!(parse_pair_list(&spec, "(01, 30)").is_err());
    }
}
