//! Value parsers for command-line arguments.

use ipd_core::zd::{extortionate, set_opponent_score, ExtortionParams};
use ipd_core::{FirstMovePolicy, GameParams, PlayerSpec, StrategyVector};

use crate::error::CliError;

/// A decimal or an exact fraction such as `7/26`.
pub fn number(s: &str) -> Result<f64, String> {
    let s = s.trim();
    let value = match s.split_once('/') {
        Some((n, d)) => {
            let (n, d) = (n.trim(), d.trim());
            let (n, d) = match (n.parse::<i64>(), d.parse::<i64>()) {
                (Ok(n), Ok(d)) => (n as f64, d as f64),
                _ => (decimal(n)?, decimal(d)?),
            };
            if d == 0.0 {
                return Err(format!("zero denominator in {s:?}"));
            }
            n / d
        }
        None => decimal(s)?,
    };
    if !value.is_finite() {
        return Err(format!("{s:?} is not a finite number"));
    }
    Ok(value)
}

fn decimal(s: &str) -> Result<f64, String> {
    s.parse::<f64>().map_err(|_| format!("{s:?} is not a number"))
}

fn list<const N: usize>(s: &str) -> Result<[f64; N], String> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != N {
        return Err(format!("expected {N} comma-separated numbers, got {:?}", s));
    }
    let mut out = [0.0; N];
    for (slot, part) in out.iter_mut().zip(parts) {
        *slot = number(part)?;
    }
    Ok(out)
}

/// `T,R,P,S`.
pub fn game(s: &str) -> Result<[f64; 4], String> {
    list::<4>(s)
}

/// `b,c`.
pub fn donation(s: &str) -> Result<[f64; 2], String> {
    list::<2>(s)
}

/// `x1,x2,x3`.
pub fn shares(s: &str) -> Result<[f64; 3], String> {
    list::<3>(s)
}

pub fn four(values: &[f64], flag: &str) -> Result<[f64; 4], CliError> {
    <[f64; 4]>::try_from(values)
        .map_err(|_| CliError::Usage(format!("{flag} takes 4 probabilities (CC, CD, DC, DD), got {}", values.len())))
}

/// Resolves a player given on the command line. Accepted forms:
///
/// * a JSON object such as `{"kind":"random","coop_rate":0.3}`;
/// * `cooperator`, `defector`, `tft`, `grudger`, `random[:rate]`,
///   `adaptive[:epsilon,k]`;
/// * `extort:chi,phi` or `set-score:p1,p4`, built for the active game;
/// * four probabilities `p1,p2,p3,p4` for a memory-one strategy.
pub fn player(s: &str, params: &GameParams) -> Result<PlayerSpec, CliError> {
    let s = s.trim();
    let bad = |why: String| CliError::Usage(format!("player {s:?}: {why}"));
    let spec = if s.starts_with('{') {
        serde_json::from_str::<PlayerSpec>(s).map_err(|e| bad(e.to_string()))?
    } else {
        let (head, args) = match s.split_once(':') {
            Some((h, a)) => (h, Some(a)),
            None => (s, None),
        };
        let nums = |want: usize| -> Result<Vec<f64>, CliError> {
            let raw = args.ok_or_else(|| bad(format!("needs {want} parameters")))?;
            let v: Vec<f64> = raw.split(',').map(number).collect::<Result<_, _>>().map_err(bad)?;
            if v.len() != want {
                return Err(bad(format!("needs {want} parameters")));
            }
            Ok(v)
        };
        match head.to_ascii_lowercase().as_str() {
            "cooperator" | "allc" => PlayerSpec::Cooperator,
            "defector" | "alld" => PlayerSpec::Defector,
            "tft" | "titfortat" | "tit_for_tat" => PlayerSpec::TitForTat,
            "grudger" => PlayerSpec::Grudger,
            "random" => PlayerSpec::Random { coop_rate: if args.is_some() { nums(1)?[0] } else { 0.5 } },
            "adaptive" => {
                let (epsilon, k) = if args.is_some() {
                    let v = nums(2)?;
                    if v[1] < 0.0 || v[1].fract() != 0.0 {
                        return Err(bad("K must be a non-negative integer".into()));
                    }
                    (v[0], v[1] as u64)
                } else {
                    (0.1, 20)
                };
                PlayerSpec::Adaptive { epsilon, k }
            }
            "extort" => {
                let v = nums(2)?;
                PlayerSpec::memory_one(extortionate(&ExtortionParams { chi: v[0], phi: v[1] }, params)?)
            }
            "set-score" | "setscore" => {
                let v = nums(2)?;
                PlayerSpec::memory_one(set_opponent_score(v[0], v[1], params)?.p)
            }
            _ if s.contains(',') => {
                let p: [f64; 4] = list::<4>(s).map_err(bad)?;
                PlayerSpec::MemoryOne {
                    p: StrategyVector::new(p).map_err(|e| CliError::Config(e.to_string()))?,
                    first_move: None::<FirstMovePolicy>,
                }
            }
            _ => return Err(bad("unknown player".into())),
        }
    };
    spec.validate().map_err(|e| CliError::Config(format!("player {s:?}: {e}")))?;
    Ok(spec)
}
