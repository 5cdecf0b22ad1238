//! `--family` grammar for the planimeter subcommand.
//!
//! ```text
//! line:y=<linear expr in x>    e.g. line:y=x, line:y=0.5x+0.25, line:y=1-x
//! const:<y>
//! acc-band                     needs --gamma and --eps-p
//! ppv-region                   needs --p and --eps-p; optional --eps-max, --steps
//! ```

use anyhow::{anyhow, bail, Context, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum FamilySpec {
    Line { slope: f64, intercept: f64 },
    Constant(f64),
    AccBand,
    PpvRegion,
}

pub fn parse(text: &str) -> Result<FamilySpec> {
    let text = text.trim();
    match text {
        "acc-band" => return Ok(FamilySpec::AccBand),
        "ppv-region" => return Ok(FamilySpec::PpvRegion),
        _ => {}
    }
    if let Some(rest) = text.strip_prefix("const:") {
        let y = rest.trim().parse().with_context(|| format!("bad constant {rest:?}"))?;
        return Ok(FamilySpec::Constant(y));
    }
    if let Some(rest) = text.strip_prefix("line:") {
        let compact: String = rest.chars().filter(|c| !c.is_whitespace()).collect();
        let expr = compact.strip_prefix("y=").ok_or_else(|| anyhow!("line family must start with y="))?;
        let (slope, intercept) = linear(expr)?;
        return Ok(FamilySpec::Line { slope, intercept });
    }
    bail!("unknown family {text:?}; expected line:y=..., const:<y>, acc-band or ppv-region")
}

/// Coefficients `(a, b)` of `a·x + b` from whitespace-free terms like `2x`,
/// `-0.5*x`, `0.1`.
fn linear(compact: &str) -> Result<(f64, f64)> {
    if compact.is_empty() {
        bail!("empty expression");
    }
    let mut terms = Vec::new();
    let mut start = 0;
    for (i, c) in compact.char_indices() {
        if i > 0 && (c == '+' || c == '-') && !compact[..i].ends_with(['e', 'E']) {
            terms.push(&compact[start..i]);
            start = i;
        }
    }
    terms.push(&compact[start..]);

    let (mut a, mut b) = (0.0, 0.0);
    for term in terms {
        let (sign, body) = match term.as_bytes().first() {
            Some(b'-') => (-1.0, &term[1..]),
            Some(b'+') => (1.0, &term[1..]),
            _ => (1.0, term),
        };
        if let Some(coef) = body.strip_suffix('x') {
            let coef = coef.strip_suffix('*').unwrap_or(coef);
            let c: f64 = if coef.is_empty() {
                1.0
            } else {
                coef.parse().with_context(|| format!("bad coefficient {coef:?}"))?
            };
            a += sign * c;
        } else {
            let c: f64 = body.parse().with_context(|| format!("bad term {term:?}"))?;
            b += sign * c;
        }
    }
    Ok((a, b))
}
