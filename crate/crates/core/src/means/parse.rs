//! Compact textual expressions for catalog generators and deviations.
//!
//! Generator grammar (whitespace ignored): a sum of signed terms, each an
//! optional decimal coefficient times an atom, or a bare number. Atoms:
//! `x`, `x^N`, `power:N`, `log`, `exp`, `xlogx`. Examples: `log`,
//! `2*x^2-3*log`, `x^-1`, `0.5*exp+1`.
//!
//! Deviation grammar: `linear`, `difference:<generator>`, or
//! `bajraktarevic:<generator>,<generator>`.

use crate::error::{Error, Result};
use crate::means::{DeviationFunction, GeneratorFunction};

/// Parses a generator expression. Single atoms keep their catalog identity
/// (and monotonicity claims); combinations re-probe monotonicity on the
/// sample grid and claim it only when the probe supports it.
pub fn parse_generator(src: &str) -> Result<GeneratorFunction> {
    let cleaned: String = src.chars().filter(|c| !c.is_whitespace()).collect();
    if cleaned.is_empty() {
        return Err(Error::Parse("empty generator expression".into()));
    }
    let raw_terms = split_terms(&cleaned);
    let mut terms = Vec::with_capacity(raw_terms.len());
    for term in &raw_terms {
        terms.push(parse_term(term)?);
    }
    if terms.len() == 1 {
        let (coef, gen) = terms.pop().expect("one term");
        if coef == 1.0 {
            return Ok(gen);
        }
        return GeneratorFunction::combine(cleaned, vec![(coef, gen)]);
    }
    GeneratorFunction::combine(cleaned, terms)
}

/// Parses a deviation expression.
pub fn parse_deviation(src: &str) -> Result<DeviationFunction> {
    let cleaned: String = src.chars().filter(|c| !c.is_whitespace()).collect();
    if cleaned == "linear" {
        return Ok(DeviationFunction::linear());
    }
    if let Some(rest) = cleaned.strip_prefix("difference:") {
        return DeviationFunction::difference(&parse_generator(rest)?);
    }
    if let Some(rest) = cleaned.strip_prefix("bajraktarevic:") {
        let parts: Vec<&str> = rest.split(',').collect();
        if parts.len() != 2 || parts.iter().any(|p| p.is_empty()) {
            return Err(Error::Parse(format!(
                "bajraktarevic deviation needs exactly two generators, got {src:?}"
            )));
        }
        let f = parse_generator(parts[0])?;
        let g = parse_generator(parts[1])?;
        return DeviationFunction::bajraktarevic(&f, &g);
    }
    Err(Error::Parse(format!(
        "unknown deviation expression {src:?}; expected 'linear', 'difference:<gen>', or 'bajraktarevic:<gen>,<gen>'"
    )))
}

/// Splits a cleaned expression at top-level `+`/`-`, keeping the sign with
/// the term. A sign is part of a number (not a separator) right after an
/// exponent marker (`e`/`E` preceded by a digit), a caret, a colon, or `*`.
fn split_terms(s: &str) -> Vec<String> {
    let chars: Vec<char> = s.chars().collect();
    let mut terms = Vec::new();
    let mut start = 0usize;
    for i in 1..chars.len() {
        let c = chars[i];
        if c != '+' && c != '-' {
            continue;
        }
        let prev = chars[i - 1];
        let in_number_exponent =
            (prev == 'e' || prev == 'E') && i >= 2 && (chars[i - 2].is_ascii_digit() || chars[i - 2] == '.');
        if in_number_exponent || prev == '^' || prev == ':' || prev == '*' {
            continue;
        }
        terms.push(chars[start..i].iter().collect());
        start = i;
    }
    terms.push(chars[start..].iter().collect());
    terms
}

/// Parses one signed term into (coefficient, atom generator).
fn parse_term(term: &str) -> Result<(f64, GeneratorFunction)> {
    let (sign, body) = match term.strip_prefix('-') {
        Some(rest) => (-1.0, rest),
        None => (1.0, term.strip_prefix('+').unwrap_or(term)),
    };
    if body.is_empty() {
        return Err(Error::Parse(format!("dangling sign in term {term:?}")));
    }
    if let Some((coef_str, atom_str)) = body.split_once('*') {
        let coef: f64 = coef_str
            .parse()
            .map_err(|_| Error::Parse(format!("invalid coefficient {coef_str:?} in {term:?}")))?;
        return Ok((sign * coef, parse_atom(atom_str)?));
    }
    if let Ok(value) = body.parse::<f64>() {
        return Ok((sign * value, GeneratorFunction::constant(1.0)));
    }
    Ok((sign, parse_atom(body)?))
}

fn parse_atom(atom: &str) -> Result<GeneratorFunction> {
    match atom {
        "x" => return Ok(GeneratorFunction::identity()),
        "log" => return Ok(GeneratorFunction::log()),
        "exp" => return Ok(GeneratorFunction::exp()),
        "xlogx" => return Ok(GeneratorFunction::xlogx()),
        _ => {}
    }
    let exponent = atom
        .strip_prefix("x^")
        .or_else(|| atom.strip_prefix("power:"));
    if let Some(num) = exponent {
        let alpha: f64 = num
            .parse()
            .map_err(|_| Error::Parse(format!("invalid exponent {num:?} in atom {atom:?}")))?;
        if alpha == 0.0 {
            return Ok(GeneratorFunction::constant(1.0)); // x^0 = 1
        }
        return GeneratorFunction::power(alpha);
    }
    Err(Error::Parse(format!(
        "unknown generator atom {atom:?}; expected x, x^N, power:N, log, exp, or xlogx"
    )))
}
