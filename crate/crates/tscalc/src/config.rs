//! JSON run configuration
//!
//! One flat document describes the equation and optional run parameters;
//! coefficient and delay functions are embedded as expression strings:
//!
//! ```json
//! {
//!     "n": 2,
//!     "scale": {"type": "geometric", "q": 2, "t0": 1},
//!     "B": "1/t^2", "beta": "t/2",
//!     "A": "0", "alpha": "t",
//!     "gamma": 0.25, "window": 40, "horizon": 200
//! }
//! ```
//!
//! Unknown keys are rejected. Config scales are anchored at t0 (index 0
//! lands on t0); uniform and geometric scales extend below t0, which is
//! where delayed history lives.

use crate::expr::{Expr, ParseError};
use crate::oscillation::{NeutralEquationSpec, OscError, RangeTag};
use crate::scale::{GridWindow, ScaleError, TimeScale};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("config is not valid JSON: {0}")]
    Json(String),
    #[error("field {field:?}: {err}")]
    Expr { field: &'static str, err: ParseError },
    #[error("invalid config: {0}")]
    Validation(String),
    #[error(transparent)]
    Scale(#[from] ScaleError),
}

/// Scale description inside a config document.
#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, tag = "type", rename_all = "lowercase")]
pub enum ScaleConfig {
    Uniform { h: f64, t0: f64 },
    Geometric { q: f64, t0: f64 },
}

impl ScaleConfig {
    pub fn build(&self) -> Result<(TimeScale, f64), ConfigError> {
        match *self {
            ScaleConfig::Uniform { h, t0 } => Ok((TimeScale::uniform(h, t0)?, t0)),
            ScaleConfig::Geometric { q, t0 } => Ok((TimeScale::geometric(q, t0)?, t0)),
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct LambdaGridConfig {
    pub min: f64,
    pub max: f64,
    pub count: usize,
}

/// The raw document. Equation fields are required except `A`/`alpha`
/// (default nonneutral) and `range`; run parameters are all optional.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ConfigDoc {
    pub n: usize,
    pub scale: ScaleConfig,
    #[serde(rename = "B")]
    pub b: String,
    pub beta: String,
    #[serde(rename = "A", default, skip_serializing_if = "Option::is_none")]
    pub a: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<String>,
    /// "R1", "R2" or "none"; defaults to "none" when A is the constant 0
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub range: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    /// criterion window depth: indices past t0
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub window: Option<i64>,
    /// simulation length: grid points past t0
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub horizon: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<LambdaGridConfig>,
    /// initial function for simulation, default "1"
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phi: Option<String>,
    /// left end of the initial function's validity, default: the delay
    /// values at t0
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_start: Option<f64>,
}

/// Run parameters resolved against their defaults.
#[derive(Debug, Clone)]
pub struct RunSettings {
    pub gamma: f64,
    pub window: i64,
    pub horizon: usize,
    pub lambda_grid: Vec<f64>,
    pub phi: Expr,
    pub t_start: f64,
}

fn parse_expr(field: &'static str, src: &str) -> Result<Expr, ConfigError> {
    Expr::parse(src).map_err(|err| ConfigError::Expr { field, err })
}

fn range_tag(doc: &ConfigDoc, a: &Expr) -> Result<RangeTag, ConfigError> {
    match doc.range.as_deref() {
        Some("R1") | Some("r1") => Ok(RangeTag::R1),
        Some("R2") | Some("r2") => Ok(RangeTag::R2),
        Some("none") | None => {
            if a.is_const(0.0) {
                Ok(RangeTag::None)
            } else if doc.range.is_none() {
                Err(ConfigError::Validation(
                    "A is not identically 0: give \"range\": \"R1\" or \"R2\"".into(),
                ))
            } else {
                Err(ConfigError::Validation(
                    "\"range\": \"none\" requires A to be the constant 0".into(),
                ))
            }
        }
        Some(other) => Err(ConfigError::Validation(format!(
            "unknown range {other:?}; expected \"R1\", \"R2\" or \"none\""
        ))),
    }
}

fn lambda_grid(cfg: &Option<LambdaGridConfig>) -> Result<Vec<f64>, ConfigError> {
    let Some(LambdaGridConfig { min, max, count }) = *cfg else {
        return Ok(crate::oscillation::default_lambda_grid());
    };
    if !(min > 0.0) || !(max > min) || count < 2 {
        return Err(ConfigError::Validation(format!(
            "lambda grid needs 0 < min < max and count >= 2; got min={min}, max={max}, count={count}"
        )));
    }
    let step = (max / min).ln() / (count - 1) as f64;
    Ok((0..count).map(|i| min * (step * i as f64).exp()).collect())
}

/// Parse and validate one config document. The equation invariants are
/// checked by sampling a short window past t0 so obvious mistakes (negative
/// B, forward delays, range mismatches) surface at parse time.
pub fn parse_config(text: &str) -> Result<(NeutralEquationSpec, RunSettings), ConfigError> {
    let doc: ConfigDoc =
        serde_json::from_str(text).map_err(|e| ConfigError::Json(e.to_string()))?;
    build(&doc)
}

/// Same as [`parse_config`] but starting from an already-typed document.
pub fn build(doc: &ConfigDoc) -> Result<(NeutralEquationSpec, RunSettings), ConfigError> {
    let (scale, t0) = doc.scale.build()?;
    let coef_a = parse_expr("A", doc.a.as_deref().unwrap_or("0"))?;
    let coef_b = parse_expr("B", &doc.b)?;
    let alpha = parse_expr("alpha", doc.alpha.as_deref().unwrap_or("t"))?;
    let beta = parse_expr("beta", &doc.beta)?;
    let range_tag = range_tag(doc, &coef_a)?;
    let spec = NeutralEquationSpec {
        n: doc.n,
        scale: scale.clone(),
        t0,
        coef_a,
        coef_b,
        alpha,
        beta,
        range_tag,
    };
    let probe = GridWindow::new(scale, 0, 32)?;
    spec.validate_on(&probe).map_err(|e| match e {
        OscError::ValidationError(msg) => ConfigError::Validation(msg),
        other => ConfigError::Validation(other.to_string()),
    })?;
    let default_window = match doc.scale {
        ScaleConfig::Uniform { .. } => 2000,
        ScaleConfig::Geometric { .. } => 40,
    };
    let phi = parse_expr("phi", doc.phi.as_deref().unwrap_or("1"))?;
    let t_start = doc
        .t_start
        .unwrap_or_else(|| spec.beta.eval(t0).min(spec.alpha.eval(t0)).min(t0));
    let settings = RunSettings {
        gamma: doc.gamma.unwrap_or(0.25),
        window: doc.window.unwrap_or(default_window),
        horizon: doc.horizon.unwrap_or(200),
        lambda_grid: lambda_grid(&doc.lambda)?,
        phi,
        t_start,
    };
    if !(settings.gamma > 0.0 && settings.gamma < 1.0) {
        return Err(ConfigError::Validation(format!(
            "gamma must lie in (0, 1), got {}",
            settings.gamma
        )));
    }
    if settings.window < 4 {
        return Err(ConfigError::Validation(format!(
            "criterion window must reach at least 4 points past t0, got {}",
            settings.window
        )));
    }
    Ok((spec, settings))
}

/// Render a spec back into a config document (inverse of [`build`] up to
/// expression normalization). The scale must be uniform or geometric and
/// anchored at t0, which is how [`build`] constructs them.
pub fn render(spec: &NeutralEquationSpec) -> Result<ConfigDoc, ConfigError> {
    let scale = match spec.scale {
        TimeScale::Uniform { step, anchor } if anchor == spec.t0 => {
            ScaleConfig::Uniform { h: step, t0: anchor }
        }
        TimeScale::Geometric { ratio, anchor } if anchor == spec.t0 => {
            ScaleConfig::Geometric { q: ratio, t0: anchor }
        }
        _ => {
            return Err(ConfigError::Validation(
                "only uniform/geometric scales anchored at t0 can be rendered".into(),
            ))
        }
    };
    let range = match spec.range_tag {
        RangeTag::R1 => Some("R1".to_string()),
        RangeTag::R2 => Some("R2".to_string()),
        RangeTag::None => None,
    };
    Ok(ConfigDoc {
        n: spec.n,
        scale,
        b: spec.coef_b.to_string(),
        beta: spec.beta.to_string(),
        a: Some(spec.coef_a.to_string()),
        alpha: Some(spec.alpha.to_string()),
        range,
        gamma: None,
        window: None,
        horizon: None,
        lambda: None,
        phi: None,
        t_start: None,
    })
}

pub fn render_json(spec: &NeutralEquationSpec) -> Result<String, ConfigError> {
    let doc = render(spec)?;
    serde_json::to_string_pretty(&doc).map_err(|e| ConfigError::Json(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    const Q_EXAMPLE: &str = r#"{
        "n": 2,
        "scale": {"type": "geometric", "q": 2, "t0": 1},
        "B": "1/t^2", "beta": "t/2", "A": "0", "alpha": "t"
    }"#;

    #[test]
    fn q_example_round_values() {
        let (spec, settings) = parse_config(Q_EXAMPLE).unwrap();
        assert_eq!(spec.n, 2);
        assert_eq!(spec.t0, 1.0);
        assert_eq!(spec.range_tag, RangeTag::None);
        assert_eq!(spec.coef_b.eval(4.0), 1.0 / 16.0);
        assert_eq!(spec.beta.eval(4.0), 2.0);
        assert_eq!(settings.gamma, 0.25);
        assert_eq!(settings.window, 40);
        assert_eq!(settings.t_start, 0.5);
    }

    #[test]
    fn negative_b_rejected() {
        let text = r#"{"n": 1, "scale": {"type": "uniform", "h": 1, "t0": 0},
                       "B": "-1", "beta": "t"}"#;
        let err = parse_config(text).unwrap_err();
        assert!(matches!(err, ConfigError::Validation(msg) if msg.contains("nonnegative")));
    }

    #[test]
    fn malformed_json_rejected_with_position() {
        let err = parse_config("{\"n\": 2,").unwrap_err();
        let ConfigError::Json(msg) = err else {
            panic!("expected Json error")
        };
        assert!(msg.contains("line") || msg.contains("column"), "{msg}");
    }

    #[test]
    fn unknown_keys_rejected() {
        let text = r#"{"n": 1, "scale": {"type": "uniform", "h": 1, "t0": 0},
                       "B": "1", "beta": "t", "frobnicate": 3}"#;
        assert!(matches!(parse_config(text), Err(ConfigError::Json(_))));
    }

    #[test]
    fn bad_expression_reports_field_and_position() {
        let text = r#"{"n": 1, "scale": {"type": "uniform", "h": 1, "t0": 0},
                       "B": "1 + ", "beta": "t"}"#;
        let err = parse_config(text).unwrap_err();
        assert!(matches!(err, ConfigError::Expr { field: "B", .. }));
    }

    #[test]
    fn nonzero_a_needs_range() {
        let text = r#"{"n": 2, "scale": {"type": "uniform", "h": 1, "t0": 1},
                       "B": "1/t", "beta": "t - 1", "A": "0.5", "alpha": "t - 1"}"#;
        let err = parse_config(text).unwrap_err();
        assert!(matches!(err, ConfigError::Validation(msg) if msg.contains("range")));
        let with_range = r#"{"n": 2, "scale": {"type": "uniform", "h": 1, "t0": 1},
                             "B": "1/t", "beta": "t - 1", "A": "0.5", "alpha": "t - 1",
                             "range": "R1"}"#;
        let (spec, _) = parse_config(with_range).unwrap();
        assert_eq!(spec.range_tag, RangeTag::R1);
    }

    #[test]
    fn forward_delay_rejected_at_parse() {
        let text = r#"{"n": 1, "scale": {"type": "uniform", "h": 1, "t0": 0},
                       "B": "1", "beta": "t + 1"}"#;
        // beta = t + 1 parses but violates beta <= t on the probe window
        let err = parse_config(text).unwrap_err();
        assert!(matches!(err, ConfigError::Validation(_)));
    }

    #[test]
    fn lambda_grid_resolution() {
        let text = r#"{"n": 1, "scale": {"type": "uniform", "h": 1, "t0": 0},
                       "B": "1", "beta": "t",
                       "lambda": {"min": 0.1, "max": 10, "count": 3}}"#;
        let (_, settings) = parse_config(text).unwrap();
        let g = &settings.lambda_grid;
        assert_eq!(g.len(), 3);
        assert!((g[0] - 0.1).abs() < 1e-12 && (g[1] - 1.0).abs() < 1e-12);
        assert!((g[2] - 10.0).abs() < 1e-9);
    }

    #[test]
    fn render_round_trips() {
        let (spec, _) = parse_config(Q_EXAMPLE).unwrap();
        let json = render_json(&spec).unwrap();
        let (again, _) = parse_config(&json).unwrap();
        assert_eq!(spec.n, again.n);
        assert_eq!(spec.t0, again.t0);
        assert_eq!(spec.range_tag, again.range_tag);
        assert_eq!(spec.coef_a, again.coef_a);
        assert_eq!(spec.coef_b, again.coef_b);
        assert_eq!(spec.alpha, again.alpha);
        assert_eq!(spec.beta, again.beta);
    }
}
