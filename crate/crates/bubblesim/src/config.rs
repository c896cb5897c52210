//! Plain-text scenario files.
//!
//! One `key = value` pair per line; `#` starts a comment; blank lines are
//! ignored. Unknown or duplicated keys are errors (the repeatable `shock`
//! key excepted). Keys irrelevant to the selected model are rejected.
//!
//! | key                      | value                              | default          |
//! |--------------------------|------------------------------------|------------------|
//! | `agents`                 | integer >= 2                       | 10               |
//! | `rounds`                 | integer >= 0                       | 1000             |
//! | `seed`                   | 64-bit unsigned integer            | 1                |
//! | `model`                  | `endogenous` \| `exogenous-linear` \| `exogenous-arctan` | `endogenous` |
//! | `sigmoid_scale`          | positive real (endogenous only)    | 1                |
//! | `slope_window`           | integer >= 1 (endogenous only)     | 3                |
//! | `arctan_steepness`       | positive real (arctan only)        | 10               |
//! | `risk_threshold`         | real in (0,1] or `uniform(lo, hi)` | 0.5              |
//! | `fool_factor`            | real >= 1 or `uniform(lo, hi)`     | 1.1              |
//! | `value_weight`           | real or `uniform(lo, hi)`          | 1                |
//! | `slope_weight`           | real or `uniform(lo, hi)`          | -3               |
//! | `fundamental`            | positive real or `uniform(lo, hi)` | 100              |
//! | `initial_cash`           | non-negative real                  | 1000             |
//! | `initial_shares`         | integer or `uniform(lo, hi)`       | `uniform(0, 10)` |
//! | `initial_price`          | positive real                      | 100              |
//! | `shock`                  | `ROUND NEW_FUNDAMENTAL` (repeatable, ascending rounds) | none |
//! | `exuberant_band`         | `LO HI` relative fractions         | unset (-0.01 0.01) |
//! | `comfort_band`           | `LO HI`                            | unset (-0.01 0.01) |
//! | `panic_band`             | `LO HI`                            | unset (-0.05 0)  |
//! | `clear_books_each_round` | `true` \| `false`                  | false            |
//!
//! [`to_config_string`] emits a canonical form that parses back to an
//! identical configuration.

use std::collections::HashMap;
use std::fmt::Write as _;

use crate::agents::{Band, RiskCurve, RiskModel};
use crate::sim::{ConfigError, ParamSpec, ScenarioConfig, ShareSpec, Shock};

const KNOWN_KEYS: &[&str] = &[
    "agents",
    "rounds",
    "seed",
    "model",
    "sigmoid_scale",
    "slope_window",
    "arctan_steepness",
    "risk_threshold",
    "fool_factor",
    "value_weight",
    "slope_weight",
    "fundamental",
    "initial_cash",
    "initial_shares",
    "initial_price",
    "shock",
    "exuberant_band",
    "comfort_band",
    "panic_band",
    "clear_books_each_round",
];

fn parse_err(line: usize, message: impl Into<String>) -> ConfigError {
    ConfigError::Parse {
        line,
        message: message.into(),
    }
}

fn parse_f64(line: usize, key: &str, raw: &str) -> Result<f64, ConfigError> {
    let value: f64 = raw
        .parse()
        .map_err(|_| parse_err(line, format!("{key}: not a number: {raw:?}")))?;
    if !value.is_finite() {
        return Err(parse_err(line, format!("{key}: must be finite, got {raw:?}")));
    }
    Ok(value)
}

fn parse_u64(line: usize, key: &str, raw: &str) -> Result<u64, ConfigError> {
    raw.parse()
        .map_err(|_| parse_err(line, format!("{key}: not a non-negative integer: {raw:?}")))
}

fn parse_bool(line: usize, key: &str, raw: &str) -> Result<bool, ConfigError> {
    match raw {
        "true" => Ok(true),
        "false" => Ok(false),
        _ => Err(parse_err(line, format!("{key}: expected true or false, got {raw:?}"))),
    }
}

/// `uniform(lo, hi)` -> Some((lo, hi)) as raw strings; anything else -> None.
fn uniform_args(raw: &str) -> Option<(&str, &str)> {
    let inner = raw.strip_prefix("uniform(")?.strip_suffix(')')?;
    let (lo, hi) = inner.split_once(',')?;
    Some((lo.trim(), hi.trim()))
}

fn parse_param_spec(line: usize, key: &str, raw: &str) -> Result<ParamSpec, ConfigError> {
    if let Some((lo, hi)) = uniform_args(raw) {
        Ok(ParamSpec::Uniform(
            parse_f64(line, key, lo)?,
            parse_f64(line, key, hi)?,
        ))
    } else {
        Ok(ParamSpec::Fixed(parse_f64(line, key, raw)?))
    }
}

fn parse_share_spec(line: usize, key: &str, raw: &str) -> Result<ShareSpec, ConfigError> {
    let as_u32 = |s: &str| -> Result<u32, ConfigError> {
        let v = parse_u64(line, key, s)?;
        u32::try_from(v).map_err(|_| parse_err(line, format!("{key}: {v} is too large")))
    };
    if let Some((lo, hi)) = uniform_args(raw) {
        Ok(ShareSpec::Uniform(as_u32(lo)?, as_u32(hi)?))
    } else {
        Ok(ShareSpec::Fixed(as_u32(raw)?))
    }
}

fn split_pair<'a>(line: usize, key: &str, raw: &'a str) -> Result<(&'a str, &'a str), ConfigError> {
    let normalized = raw.replace(',', " ");
    let mut parts = normalized.split_whitespace();
    let (Some(_), Some(_), None) = (parts.next(), parts.next(), parts.next()) else {
        return Err(parse_err(
            line,
            format!("{key}: expected two values, got {raw:?}"),
        ));
    };
    // Re-split the original to return borrowed slices when possible; falling
    // back to the normalized copy costs an allocation only on comma input.
    let mut parts = raw.split(|c: char| c.is_whitespace() || c == ',').filter(|s| !s.is_empty());
    Ok((parts.next().unwrap(), parts.next().unwrap()))
}

fn parse_band(line: usize, key: &str, raw: &str) -> Result<Band, ConfigError> {
    let (lo, hi) = split_pair(line, key, raw)?;
    Ok(Band::new(parse_f64(line, key, lo)?, parse_f64(line, key, hi)?))
}

fn parse_shock(line: usize, raw: &str) -> Result<Shock, ConfigError> {
    let (round, value) = split_pair(line, "shock", raw)?;
    let round = parse_u64(line, "shock", round)?;
    let round = u32::try_from(round)
        .map_err(|_| parse_err(line, format!("shock: round {round} is too large")))?;
    Ok(Shock {
        round,
        new_fundamental: parse_f64(line, "shock", value)?,
    })
}

/// Parse a scenario file. The result is validated before being returned.
pub fn parse_str(text: &str) -> Result<ScenarioConfig, ConfigError> {
    let mut seen: HashMap<&str, usize> = HashMap::new();
    let mut scalars: Vec<(usize, &str, &str)> = Vec::new();
    let mut shocks: Vec<Shock> = Vec::new();

    for (index, raw_line) in text.lines().enumerate() {
        let line_no = index + 1;
        let content = raw_line.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let Some((key, value)) = content.split_once('=') else {
            return Err(parse_err(line_no, format!("expected `key = value`, got {content:?}")));
        };
        let key = key.trim();
        let value = value.trim();
        let Some(&known) = KNOWN_KEYS.iter().find(|&&k| k == key) else {
            return Err(parse_err(line_no, format!("unknown key {key:?}")));
        };
        if value.is_empty() {
            return Err(parse_err(line_no, format!("{key}: missing value")));
        }
        if known == "shock" {
            shocks.push(parse_shock(line_no, value)?);
            continue;
        }
        if let Some(first) = seen.insert(known, line_no) {
            return Err(parse_err(
                line_no,
                format!("{key}: duplicate key (first set on line {first})"),
            ));
        }
        scalars.push((line_no, known, value));
    }

    let mut config = ScenarioConfig::default();
    config.shocks = shocks;

    // The model must be known before model-specific keys are interpreted.
    let mut model_kind: &str = "endogenous";
    let mut sigmoid_scale: Option<f64> = None;
    let mut slope_window: Option<usize> = None;
    let mut steepness: Option<f64> = None;

    for &(line, key, value) in &scalars {
        match key {
            "agents" => {
                let v = parse_u64(line, key, value)?;
                config.n_agents = usize::try_from(v)
                    .map_err(|_| parse_err(line, format!("agents: {v} is too large")))?;
            }
            "rounds" => {
                let v = parse_u64(line, key, value)?;
                config.rounds = u32::try_from(v)
                    .map_err(|_| parse_err(line, format!("rounds: {v} is too large")))?;
            }
            "seed" => config.seed = parse_u64(line, key, value)?,
            "model" => {
                model_kind = match value {
                    "endogenous" | "exogenous-linear" | "exogenous-arctan" => value,
                    _ => {
                        return Err(parse_err(
                            line,
                            format!(
                                "model: expected endogenous, exogenous-linear or \
                                 exogenous-arctan, got {value:?}"
                            ),
                        ))
                    }
                };
            }
            "sigmoid_scale" => sigmoid_scale = Some(parse_f64(line, key, value)?),
            "slope_window" => {
                let v = parse_u64(line, key, value)?;
                slope_window = Some(
                    usize::try_from(v)
                        .map_err(|_| parse_err(line, format!("slope_window: {v} is too large")))?,
                );
            }
            "arctan_steepness" => steepness = Some(parse_f64(line, key, value)?),
            "risk_threshold" => config.params.risk_threshold = parse_param_spec(line, key, value)?,
            "fool_factor" => config.params.fool_factor = parse_param_spec(line, key, value)?,
            "value_weight" => config.params.value_weight = parse_param_spec(line, key, value)?,
            "slope_weight" => config.params.slope_weight = parse_param_spec(line, key, value)?,
            "fundamental" => config.params.fundamental = parse_param_spec(line, key, value)?,
            "initial_cash" => config.initial_cash = parse_f64(line, key, value)?,
            "initial_shares" => config.initial_shares = parse_share_spec(line, key, value)?,
            "initial_price" => config.initial_price = parse_f64(line, key, value)?,
            "exuberant_band" => config.exuberant_band = Some(parse_band(line, key, value)?),
            "comfort_band" => config.comfort_band = Some(parse_band(line, key, value)?),
            "panic_band" => config.panic_band = Some(parse_band(line, key, value)?),
            "clear_books_each_round" => {
                config.clear_books_each_round = parse_bool(line, key, value)?
            }
            _ => unreachable!("key filtered against KNOWN_KEYS"),
        }
    }

    let line_of = |wanted: &str| seen.get(wanted).copied().unwrap_or(0);
    config.model = match model_kind {
        "endogenous" => {
            if let Some(line) = seen.get("arctan_steepness") {
                return Err(parse_err(
                    *line,
                    "arctan_steepness requires model = exogenous-arctan",
                ));
            }
            RiskModel::Endogenous {
                sigmoid_scale: sigmoid_scale.unwrap_or(1.0),
                slope_window: slope_window.unwrap_or(3),
            }
        }
        exogenous => {
            if sigmoid_scale.is_some() {
                return Err(parse_err(
                    line_of("sigmoid_scale"),
                    "sigmoid_scale requires model = endogenous",
                ));
            }
            if slope_window.is_some() {
                return Err(parse_err(
                    line_of("slope_window"),
                    "slope_window requires model = endogenous",
                ));
            }
            let curve = if exogenous == "exogenous-linear" {
                if steepness.is_some() {
                    return Err(parse_err(
                        line_of("arctan_steepness"),
                        "arctan_steepness requires model = exogenous-arctan",
                    ));
                }
                RiskCurve::Linear
            } else {
                RiskCurve::Arctan {
                    steepness: steepness.unwrap_or(10.0),
                }
            };
            RiskModel::Exogenous { curve }
        }
    };

    config.validate()?;
    Ok(config)
}

fn fmt_param_spec(spec: &ParamSpec) -> String {
    match spec {
        ParamSpec::Fixed(v) => format!("{v}"),
        ParamSpec::Uniform(lo, hi) => format!("uniform({lo}, {hi})"),
    }
}

fn fmt_share_spec(spec: &ShareSpec) -> String {
    match spec {
        ShareSpec::Fixed(v) => format!("{v}"),
        ShareSpec::Uniform(lo, hi) => format!("uniform({lo}, {hi})"),
    }
}

/// Canonical textual form of a configuration. Parsing the output yields a
/// configuration equal to the input.
pub fn to_config_string(config: &ScenarioConfig) -> String {
    let mut out = String::new();
    out.push_str("# bubblesim scenario\n");
    let _ = writeln!(out, "agents = {}", config.n_agents);
    let _ = writeln!(out, "rounds = {}", config.rounds);
    let _ = writeln!(out, "seed = {}", config.seed);
    match config.model {
        RiskModel::Endogenous {
            sigmoid_scale,
            slope_window,
        } => {
            out.push_str("model = endogenous\n");
            let _ = writeln!(out, "sigmoid_scale = {sigmoid_scale}");
            let _ = writeln!(out, "slope_window = {slope_window}");
        }
        RiskModel::Exogenous {
            curve: RiskCurve::Linear,
        } => out.push_str("model = exogenous-linear\n"),
        RiskModel::Exogenous {
            curve: RiskCurve::Arctan { steepness },
        } => {
            out.push_str("model = exogenous-arctan\n");
            let _ = writeln!(out, "arctan_steepness = {steepness}");
        }
    }
    let _ = writeln!(out, "risk_threshold = {}", fmt_param_spec(&config.params.risk_threshold));
    let _ = writeln!(out, "fool_factor = {}", fmt_param_spec(&config.params.fool_factor));
    let _ = writeln!(out, "value_weight = {}", fmt_param_spec(&config.params.value_weight));
    let _ = writeln!(out, "slope_weight = {}", fmt_param_spec(&config.params.slope_weight));
    let _ = writeln!(out, "fundamental = {}", fmt_param_spec(&config.params.fundamental));
    let _ = writeln!(out, "initial_cash = {}", config.initial_cash);
    let _ = writeln!(out, "initial_shares = {}", fmt_share_spec(&config.initial_shares));
    let _ = writeln!(out, "initial_price = {}", config.initial_price);
    for shock in &config.shocks {
        let _ = writeln!(out, "shock = {} {}", shock.round, shock.new_fundamental);
    }
    if let Some(band) = config.exuberant_band {
        let _ = writeln!(out, "exuberant_band = {} {}", band.lo, band.hi);
    }
    if let Some(band) = config.comfort_band {
        let _ = writeln!(out, "comfort_band = {} {}", band.lo, band.hi);
    }
    if let Some(band) = config.panic_band {
        let _ = writeln!(out, "panic_band = {} {}", band.lo, band.hi);
    }
    let _ = writeln!(out, "clear_books_each_round = {}", config.clear_books_each_round);
    out
}
