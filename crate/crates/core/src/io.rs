//! JSON file formats and command-line state literals.
//!
//! Matrices use `{"rows", "cols", "data": [[re, im], ...]}` (row-major),
//! states `{"dim", "density"}`, instruments
//! `{"dim", "outcomes": [{"label", "choi"}]}`.

use std::fs;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instrument::{Instrument, Outcome};
use crate::matrix::{vec_norm, ComplexMatrix, C64};
use crate::state::State;

/// Tolerance for densities read from files or literals.
pub const INPUT_STATE_TOL: f64 = 1e-10;

#[derive(Serialize, Deserialize)]
struct StateJson {
    dim: usize,
    density: ComplexMatrix,
}

#[derive(Serialize, Deserialize)]
struct OutcomeJson {
    label: String,
    choi: ComplexMatrix,
}

#[derive(Serialize, Deserialize)]
struct InstrumentJson {
    dim: usize,
    outcomes: Vec<OutcomeJson>,
}

pub fn state_to_json(s: &State) -> String {
    let j = StateJson {
        dim: s.dim(),
        density: s.density().clone(),
    };
    serde_json::to_string_pretty(&j).expect("state serialises")
}

pub fn state_from_json(text: &str) -> Result<State> {
    let j: StateJson = serde_json::from_str(text)?;
    if j.density.rows() != j.dim {
        return Err(Error::DimensionMismatch(format!("dim {} with a {}-row density", j.dim, j.density.rows())));
    }
    State::with_tolerance(j.density, INPUT_STATE_TOL)
}

pub fn instrument_to_json(e: &Instrument) -> String {
    let j = InstrumentJson {
        dim: e.dim(),
        outcomes: e
            .outcomes()
            .iter()
            .map(|o| OutcomeJson {
                label: o.label.clone(),
                choi: o.choi.clone(),
            })
            .collect(),
    };
    serde_json::to_string_pretty(&j).expect("instrument serialises")
}

pub fn instrument_from_json(text: &str) -> Result<Instrument> {
    let j: InstrumentJson = serde_json::from_str(text)?;
    let outcomes = j
        .outcomes
        .into_iter()
        .map(|o| Outcome {
            label: o.label,
            choi: o.choi,
        })
        .collect();
    Instrument::new(j.dim, outcomes)
}

pub fn to_json_pretty<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("value serialises")
}

pub fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::InvalidArgument(format!("{}: {e}", path.display())))
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    Ok(serde_json::from_str(&read_text(path)?)?)
}

/// Parse `a`, `bi`, `a+bi`, `a-bi`, `i`, `-i`.
pub fn parse_complex(token: &str) -> Result<C64> {
    let t: String = token.chars().filter(|c| !c.is_whitespace()).collect();
    let bad = || Error::Parse(format!("bad complex number '{token}'"));
    if t.is_empty() {
        return Err(bad());
    }
    let Some(body) = t.strip_suffix('i') else {
        return t.parse::<f64>().map(|re| C64::new(re, 0.0)).map_err(|_| bad());
    };
    // Split at the last sign that is not the leading one or part of an exponent.
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&p| (bytes[p] == b'+' || bytes[p] == b'-') && !matches!(bytes[p - 1], b'e' | b'E'));
    let (re, im) = match split {
        Some(p) => (&body[..p], &body[p..]),
        None => ("0", body),
    };
    let im = match im {
        "" | "+" => 1.0,
        "-" => -1.0,
        s => s.parse::<f64>().map_err(|_| bad())?,
    };
    let re = re.parse::<f64>().map_err(|_| bad())?;
    Ok(C64::new(re, im))
}

/// `diag:p1,p2,...` (probabilities) or `vec:z1,z2,...` (unit vector).
pub fn parse_state_literal(text: &str) -> Result<State> {
    let (kind, body) = text
        .split_once(':')
        .ok_or_else(|| Error::Parse(format!("state literal '{text}' lacks a 'diag:' or 'vec:' prefix")))?;
    let items: Vec<&str> = body.split(',').collect();
    match kind.trim() {
        "diag" => {
            let p = items
                .iter()
                .map(|s| s.trim().parse::<f64>().map_err(|_| Error::Parse(format!("bad probability '{s}'"))))
                .collect::<Result<Vec<_>>>()?;
            State::with_tolerance(ComplexMatrix::from_real_diagonal(&p), INPUT_STATE_TOL)
        }
        "vec" => {
            let v = items.iter().map(|s| parse_complex(s)).collect::<Result<Vec<_>>>()?;
            let norm = vec_norm(&v);
            if (norm - 1.0).abs() > INPUT_STATE_TOL {
                return Err(Error::NotUnit(norm));
            }
            State::with_tolerance(ComplexMatrix::outer(&v, &v), INPUT_STATE_TOL)
        }
        other => Err(Error::Parse(format!("unknown state literal kind '{other}'"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::random_instrument;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn matrix_round_trip() {
        let m = ComplexMatrix::from_fn(2, 3, |r, c| C64::new(r as f64 + 0.1, c as f64 - 1.0 / 3.0));
        let text = serde_json::to_string(&m).unwrap();
        assert!(text.starts_with("{\"rows\":2,\"cols\":3,\"data\":[["));
        let back: ComplexMatrix = serde_json::from_str(&text).unwrap();
        assert_eq!(back, m);
        assert!(serde_json::from_str::<ComplexMatrix>(r#"{"rows":2,"cols":2,"data":[[1,0]]}"#).is_err());
    }

    #[test]
    fn instrument_and_state_round_trip() {
        let e = random_instrument(2, 2, 1, &mut ChaCha8Rng::seed_from_u64(1));
        assert_eq!(instrument_from_json(&instrument_to_json(&e)).unwrap(), e);
        let s = State::diagonal(&[0.25, 0.75]).unwrap();
        assert_eq!(state_from_json(&state_to_json(&s)).unwrap(), s);
        assert!(instrument_from_json("{\"dim\": 2, \"outcomes\": [").is_err());
    }

    #[test]
    fn complex_tokens() {
        assert_eq!(parse_complex("1.5").unwrap(), C64::new(1.5, 0.0));
        assert_eq!(parse_complex("-2i").unwrap(), C64::new(0.0, -2.0));
        assert_eq!(parse_complex("i").unwrap(), C64::new(0.0, 1.0));
        assert_eq!(parse_complex("-i").unwrap(), C64::new(0.0, -1.0));
        assert_eq!(parse_complex("0.5-0.5i").unwrap(), C64::new(0.5, -0.5));
        assert_eq!(parse_complex("1e-3+2E+1i").unwrap(), C64::new(1e-3, 20.0));
        assert!(parse_complex("abc").is_err());
    }

    #[test]
    fn state_literals() {
        let s = parse_state_literal("diag:0.3,0.7").unwrap();
        assert_eq!(s.density()[(1, 1)], C64::new(0.7, 0.0));
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let v = parse_state_literal(&format!("vec:{h},{h}i")).unwrap();
        assert!((v.density()[(0, 1)] - C64::new(0.0, -0.5)).norm() < 1e-12);
        assert!(parse_state_literal("diag:0.5,0.6").is_err());
        assert!(parse_state_literal("vec:1,1").is_err());
        assert!(parse_state_literal("0.3,0.7").is_err());
    }
}
