//! Argument parsing helpers: sets as comma lists or `@file` JSON arrays,
//! colorings, oracle specs, and exact rational thresholds.

use std::fs;

use num::{BigInt, BigRational};

use finsum_core::ideals::OracleConfig;
use finsum_core::katetov::MapFamily;
use finsum_core::{GroundSet, KatetovMap};

pub type ParseResult<T> = Result<T, String>;

/// A set given inline (`1,2,4`) or as a JSON array file (`@sets.json`).
pub fn parse_set(raw: &str) -> ParseResult<Vec<u64>> {
    let mut values: Vec<u64> = if let Some(path) = raw.strip_prefix('@') {
        let data = fs::read_to_string(path).map_err(|e| format!("reading {path}: {e}"))?;
        serde_json::from_str(&data).map_err(|e| format!("parsing {path}: {e}"))?
    } else if raw.trim().is_empty() {
        Vec::new()
    } else {
        raw.split(',')
            .map(|tok| {
                tok.trim()
                    .parse::<u64>()
                    .map_err(|e| format!("bad integer {tok:?}: {e}"))
            })
            .collect::<ParseResult<_>>()?
    };
    values.sort_unstable();
    values.dedup();
    Ok(values)
}

pub fn parse_ground(raw: &str) -> ParseResult<GroundSet> {
    GroundSet::from_values(parse_set(raw)?).map_err(|e| e.to_string())
}

/// Semicolon-separated sets, or a `@file` holding a JSON array of arrays.
pub fn parse_set_list(raw: &str) -> ParseResult<Vec<Vec<u64>>> {
    if let Some(path) = raw.strip_prefix('@') {
        let data = fs::read_to_string(path).map_err(|e| format!("reading {path}: {e}"))?;
        let mut lists: Vec<Vec<u64>> =
            serde_json::from_str(&data).map_err(|e| format!("parsing {path}: {e}"))?;
        for l in &mut lists {
            l.sort_unstable();
            l.dedup();
        }
        return Ok(lists);
    }
    raw.split(';').map(parse_set).collect()
}

pub fn parse_ground_list(raw: &str) -> ParseResult<Vec<GroundSet>> {
    parse_set_list(raw)?
        .into_iter()
        .map(|v| GroundSet::from_values(v).map_err(|e| e.to_string()))
        .collect()
}

/// `10`, `7/4`, or `0.5` (decimal converted exactly).
pub fn parse_rational(raw: &str) -> ParseResult<BigRational> {
    let raw = raw.trim();
    if let Some((num, den)) = raw.split_once('/') {
        let num: BigInt = num
            .trim()
            .parse()
            .map_err(|e| format!("bad numerator: {e}"))?;
        let den: BigInt = den
            .trim()
            .parse()
            .map_err(|e| format!("bad denominator: {e}"))?;
        if den == BigInt::from(0) {
            return Err("zero denominator".into());
        }
        return Ok(BigRational::new(num, den));
    }
    if let Some((whole, frac)) = raw.split_once('.') {
        let digits = frac.len() as u32;
        let scale = BigInt::from(10u32).pow(digits);
        let whole: BigInt = whole.parse().map_err(|e| format!("bad decimal: {e}"))?;
        let frac: BigInt = frac.parse().map_err(|e| format!("bad decimal: {e}"))?;
        return Ok(BigRational::new(whole * &scale + frac, scale));
    }
    let n: BigInt = raw
        .parse()
        .map_err(|e| format!("bad rational {raw:?}: {e}"))?;
    Ok(BigRational::from_integer(n))
}

/// `log2`, `identity`, `mod:5`, `block:16`, `constant:3`, or `@table.json`
/// (JSON array of values; codomain is max+1 unless given).
pub fn parse_coloring(raw: &str, domain: u64, codomain: Option<u64>) -> ParseResult<KatetovMap> {
    if let Some(path) = raw.strip_prefix('@') {
        let data = fs::read_to_string(path).map_err(|e| format!("reading {path}: {e}"))?;
        let table: Vec<u64> =
            serde_json::from_str(&data).map_err(|e| format!("parsing {path}: {e}"))?;
        let m = codomain.unwrap_or_else(|| table.iter().copied().max().map_or(1, |v| v + 1));
        return KatetovMap::new(table, m).map_err(|e| e.to_string());
    }
    let (name, arg) = match raw.split_once(':') {
        Some((n, a)) => (n, Some(a)),
        None => (raw, None),
    };
    let num = |a: Option<&str>| -> ParseResult<u64> {
        a.ok_or_else(|| format!("coloring {name:?} needs a numeric argument"))?
            .parse()
            .map_err(|e| format!("bad coloring argument: {e}"))
    };
    match name {
        "log2" => Ok(KatetovMap::log2(domain)),
        "identity" | "id" => Ok(KatetovMap::identity(domain)),
        "mod" => KatetovMap::modulo(domain, num(arg)?).map_err(|e| e.to_string()),
        "block" => KatetovMap::block(domain, num(arg)?).map_err(|e| e.to_string()),
        "constant" => {
            let c = num(arg)?;
            KatetovMap::constant(domain, c, codomain.unwrap_or(c + 1)).map_err(|e| e.to_string())
        }
        other => Err(format!("unknown coloring {other:?}")),
    }
}

/// `summable:10`, `summable:7/4`, `vdw:5`, `hindman:4`, `folkman:3`; the
/// parameter defaults to the module default when omitted.
pub fn parse_oracle(raw: &str) -> ParseResult<OracleConfig> {
    let (name, arg) = match raw.split_once(':') {
        Some((n, a)) => (n, Some(a)),
        None => (raw, None),
    };
    let depth = |a: Option<&str>, default: usize| -> ParseResult<usize> {
        a.map_or(Ok(default), |s| {
            s.parse().map_err(|e| format!("bad depth: {e}"))
        })
    };
    match name {
        "summable" => Ok(OracleConfig::Summable {
            threshold: arg.map_or_else(
                || Ok(BigRational::from_integer(BigInt::from(10))),
                parse_rational,
            )?,
        }),
        "vdw" => Ok(OracleConfig::VanDerWaerden {
            ap_length: depth(arg, 5)?,
        }),
        "hindman" => Ok(OracleConfig::Hindman {
            fs_depth: depth(arg, 4)?,
        }),
        "folkman" => Ok(OracleConfig::Folkman {
            fs_depth: depth(arg, 4)?,
        }),
        other => Err(format!("unknown ideal {other:?}")),
    }
}

/// `full`, `monotone`, or `block:W`.
pub fn parse_family(raw: &str) -> ParseResult<MapFamily> {
    match raw.split_once(':') {
        None => match raw {
            "full" | "exhaustive" => Ok(MapFamily::Exhaustive),
            "monotone" => Ok(MapFamily::Monotone),
            other => Err(format!("unknown map family {other:?}")),
        },
        Some(("block", w)) => Ok(MapFamily::Blockwise {
            width: w.parse().map_err(|e| format!("bad block width: {e}"))?,
        }),
        Some((other, _)) => Err(format!("unknown map family {other:?}")),
    }
}

/// Comma list of usizes (`8,4,2`).
pub fn parse_depths(raw: &str) -> ParseResult<Vec<usize>> {
    raw.split(',')
        .map(|tok| {
            tok.trim()
                .parse()
                .map_err(|e| format!("bad depth {tok:?}: {e}"))
        })
        .collect()
}
