//! Parsers for the command-line value formats.

use tribell_core::states::StateSpec;
use tribell_core::strengths::{validate_angles, Angles, StrengthSextuple};
use tribell_core::Criterion;

use crate::error::CliError;

fn floats(field: &str, text: &str) -> Result<Vec<f64>, CliError> {
    text.split(',')
        .map(|p| {
            p.trim()
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| CliError::config(field, format!("`{p}` is not a finite number")))
        })
        .collect()
}

fn fixed<const N: usize>(field: &str, text: &str) -> Result<[f64; N], CliError> {
    let v = floats(field, text)?;
    v.try_into()
        .map_err(|v: Vec<f64>| CliError::config(field, format!("expected {N} comma-separated values, got {}", v.len())))
}

/// State mini-grammar: `ghz`, `gghz:<theta>`, `w`, `mix:<spec>:<v>`,
/// `tstate:<9 or 27 floats>`, `random:<seed>`.
pub fn parse_state(text: &str) -> Result<StateSpec, CliError> {
    let field = "--state";
    let text = text.trim();
    match text {
        "ghz" => return Ok(StateSpec::Ghz),
        "w" => return Ok(StateSpec::W),
        _ => {}
    }
    let (head, rest) = text
        .split_once(':')
        .ok_or_else(|| CliError::config(field, format!("unknown state `{text}`")))?;
    match head {
        "gghz" => {
            let [theta] = fixed::<1>(field, rest)?;
            Ok(StateSpec::GeneralizedGhz(theta))
        }
        "mix" => {
            let (base, v) = rest
                .rsplit_once(':')
                .ok_or_else(|| CliError::config(field, "mix needs `mix:<spec>:<visibility>`"))?;
            let [v] = fixed::<1>(field, v)?;
            Ok(StateSpec::Mix(Box::new(parse_state(base)?), v))
        }
        "random" => rest
            .trim()
            .parse::<u64>()
            .map(StateSpec::Random)
            .map_err(|_| CliError::config(field, format!("`{rest}` is not a seed"))),
        "tstate" => {
            let v = floats(field, rest)?;
            let mut t = [[0.0; 9]; 3];
            match v.len() {
                27 => {
                    for (n, x) in v.into_iter().enumerate() {
                        t[n / 9][n % 9] = x;
                    }
                }
                9 => {
                    // T_ijk for i, j, k in {x, y}, then T_zzz.
                    for (n, x) in v[..8].iter().enumerate() {
                        let (i, j, k) = (n >> 2, (n >> 1) & 1, n & 1);
                        t[i][3 * j + k] = *x;
                    }
                    t[2][8] = v[8];
                }
                n => return Err(CliError::config(field, format!("tstate needs 9 or 27 values, got {n}"))),
            }
            Ok(StateSpec::TState(t))
        }
        _ => Err(CliError::config(field, format!("unknown state kind `{head}`"))),
    }
}

pub fn parse_strengths(text: &str) -> Result<StrengthSextuple, CliError> {
    let a = fixed::<6>("--strengths", text)?;
    StrengthSextuple::from_array(a).map_err(|e| CliError::config("--strengths", e.to_string()))
}

pub fn parse_biases(text: &str, strengths: &StrengthSextuple) -> Result<[f64; 6], CliError> {
    check_biases(&fixed::<6>("--biases", text)?, strengths)
}

/// Each strength plus the magnitude of its bias must not exceed 1.
pub fn check_biases(b: &[f64; 6], strengths: &StrengthSextuple) -> Result<[f64; 6], CliError> {
    for ((r, x), name) in strengths.as_array().iter().zip(b).zip(tribell_core::strengths::STRENGTH_NAMES) {
        if r + x.abs() > 1.0 + tribell_core::observables::OBSERVABLE_TOL {
            return Err(CliError::config(
                "--biases",
                format!("{name}: strength {r} plus |bias| {} exceeds 1", x.abs()),
            ));
        }
    }
    Ok(*b)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AngleMode {
    Fixed(Angles),
    Optimal,
}

pub fn parse_angles(text: &str) -> Result<AngleMode, CliError> {
    if text.trim() == "optimal" {
        return Ok(AngleMode::Optimal);
    }
    let a = fixed::<3>("--angles", text)?;
    validate_angles(&a).map_err(|e| CliError::config("--angles", e.to_string()))?;
    Ok(AngleMode::Fixed(a))
}

/// `None` stands for "all-applicable".
pub fn parse_criteria(text: &str) -> Result<Option<Vec<Criterion>>, CliError> {
    if text.trim() == "all-applicable" {
        return Ok(None);
    }
    text.split(',')
        .map(|n| {
            Criterion::from_name(n.trim())
                .ok_or_else(|| CliError::config("--criteria", format!("unknown criterion `{}`", n.trim())))
        })
        .collect::<Result<Vec<_>, _>>()
        .map(Some)
}

/// `lo,hi,steps` with `steps >= 1`.
pub fn parse_range(text: &str) -> Result<(f64, f64, usize), CliError> {
    let [lo, hi, steps] = fixed::<3>("--range", text)?;
    if steps < 1.0 || steps.fract() != 0.0 {
        return Err(CliError::config("--range", "steps must be a positive integer"));
    }
    Ok((lo, hi, steps as usize))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn state_grammar() {
        assert_eq!(parse_state("ghz").unwrap(), StateSpec::Ghz);
        assert_eq!(parse_state("gghz:0.3").unwrap(), StateSpec::GeneralizedGhz(0.3));
        assert_eq!(parse_state("mix:gghz:0.3:0.5").unwrap(), StateSpec::Mix(Box::new(StateSpec::GeneralizedGhz(0.3)), 0.5));
        assert_eq!(parse_state("random:42").unwrap(), StateSpec::Random(42));
        match parse_state("tstate:0,0,0,0,0,0,0,-0.25,0.5").unwrap() {
            StateSpec::TState(t) => {
                assert_eq!(t[1][4], -0.25);
                assert_eq!(t[2][8], 0.5);
            }
            other => panic!("{other:?}"),
        }
        assert!(parse_state("tstate:1,2").is_err());
        assert!(parse_state("bell").is_err());
        assert!(parse_state("mix:ghz").is_err());
    }

    #[test]
    fn numeric_fields() {
        assert!(parse_strengths("1,1,1,1,1").is_err());
        assert!(parse_strengths("1,1,1,1,1,1.5").is_err());
        let s = parse_strengths("0.5,0.5,1,1,1,1").unwrap();
        assert!(parse_biases("0.5,0,0,0,0,0", &s).is_ok());
        assert!(parse_biases("0,0,0.1,0,0,0", &s).is_err());
        assert_eq!(parse_angles("optimal").unwrap(), AngleMode::Optimal);
        assert!(parse_angles("0,0,4").is_err());
        assert_eq!(parse_criteria("all-applicable").unwrap(), None);
        assert_eq!(parse_criteria("mermin.unbiased").unwrap(), Some(vec![Criterion::MerminUnbiased]));
        assert!(parse_range("0,1,0").is_err());
        assert_eq!(parse_range("0,1,3").unwrap(), (0.0, 1.0, 3));
    }
}
