//! Explicit forward stepping for neutral delay dynamic equations
//!
//! The equation `[x + A (x o alpha)]^{Delta^n}(t) = -B(t) x(beta(t))` is
//! advanced by solving the n-th delta stencil over `{t, sigma(t), ...,
//! sigma^n(t)}` for its furthest forward point. Writing `z = x + A (x o
//! alpha)`, each step produces `z(sigma^n(t))` and then recovers
//! `x(sigma^n(t))` from the neutral relation; history below the seed range
//! comes from the initial function `phi`.

use crate::calculus::{CalcError, GridFn};
use crate::expr::Expr;
use crate::oscillation::{
    conclude, criterion_windows, divergence_check, threshold_closed_form, ConclusionReport,
    CriterionReport, DivergenceReport, DivergenceVerdict, ExampleId, ExampleParams,
    NeutralEquationSpec, OscError, RangeTag, ThresholdReport, Verdict,
};
use crate::scale::{GridWindow, ScaleError, TimeScale, POINT_MATCH_TOL};
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum SimError {
    #[error("delay reaches t = {needed} but the initial function starts at {have_from}")]
    HistoryGap { needed: f64, have_from: f64 },
    #[error("cannot recover x at t = {0}: the neutral relation has 1 + A(t) = 0")]
    NeutralNotInvertible(f64),
    #[error("window holds {len} points but the operation needs {need}")]
    WindowTooShort { len: usize, need: usize },
    #[error("horizon {0} is too short for an order-{1} equation")]
    BadHorizon(usize, usize),
    #[error(transparent)]
    Spec(#[from] OscError),
    #[error(transparent)]
    Scale(#[from] ScaleError),
    #[error(transparent)]
    Calc(#[from] CalcError),
}

/// Initial function: `x(t) = phi(t)` for every grid point with
/// `t_start <= t <= sigma^{n-1}(t0)`. The stepper needs phi through the
/// first n grid points so the order-n recurrence starts explicit.
#[derive(Debug, Clone)]
pub struct InitialData {
    pub phi: Expr,
    pub t_start: f64,
}

impl InitialData {
    pub fn constant_one(t_start: f64) -> Self {
        InitialData {
            phi: Expr::Num(1.0),
            t_start,
        }
    }
}

/// Long-run tag for a nonoscillatory trace; oscillation itself is counted
/// by [`sign_changes`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Trend {
    TendsToZero,
    Unbounded,
    BoundedAway,
    Undetermined,
}

/// Output of one stepping run: both traces over `[t0, sigma^H(t0)]` plus
/// oscillation counters.
#[derive(Debug, Clone)]
pub struct SolutionTrace {
    pub x: GridFn,
    pub z: GridFn,
    pub sign_changes: usize,
    pub last_change_index: Option<i64>,
    pub trend: Trend,
    /// delay values that were not grid points and were snapped down
    pub snap_events: usize,
}

/// Coefficients of the n-th delta derivative at index `i` as a linear
/// combination of values at `i..=i+n`. Built by composing first-order
/// deltas over the local graininess (binomial weights only hold on
/// uniform grids).
fn nth_delta_stencil(scale: &TimeScale, i: i64, n: usize) -> Result<Vec<f64>, SimError> {
    let mut rows: Vec<Vec<f64>> = (0..=n)
        .map(|m| {
            let mut v = vec![0.0; n + 1];
            v[m] = 1.0;
            v
        })
        .collect();
    for k in 1..=n {
        // rows[m] becomes the coefficients of Delta^k z(t_{i+m});
        // ascending m keeps rows[m+1] at level k-1 when it is read
        for m in 0..=(n - k) {
            let mu = scale.mu_at(i + m as i64)?;
            for j in 0..=n {
                rows[m][j] = (rows[m + 1][j] - rows[m][j]) / mu;
            }
        }
    }
    Ok(rows.swap_remove(0))
}

/// Advance the equation `horizon` points past t0. The produced window is
/// `[index(t0), index(t0) + horizon]`; the first n points are seeds from
/// `phi` and the rest satisfy the stencil recurrence.
pub fn step_ivp(
    spec: &NeutralEquationSpec,
    init: &InitialData,
    horizon: usize,
) -> Result<SolutionTrace, SimError> {
    let n = spec.n;
    if horizon < n.max(1) {
        return Err(SimError::BadHorizon(horizon, n));
    }
    let scale = &spec.scale;
    let i0 = scale.index_of(spec.t0)?;
    let window = GridWindow::new(scale.clone(), i0, i0 + horizon as i64)?;
    spec.validate_on(&window)?;
    let tol = |t: f64| POINT_MATCH_TOL * t.abs().max(1.0);

    let mut snap_events = 0usize;
    let mut snap = |v: f64| -> Result<i64, SimError> {
        let k = scale.snap_down_index(v)?;
        if (scale.point(k)? - v).abs() > tol(v) {
            snap_events += 1;
        }
        Ok(k)
    };

    let phi_at = |idx: i64| -> Result<f64, SimError> {
        let t = scale.point(idx)?;
        if t < init.t_start - tol(t) {
            return Err(SimError::HistoryGap {
                needed: t,
                have_from: init.t_start,
            });
        }
        Ok(init.phi.eval(t))
    };

    let mut x = vec![0.0f64; horizon + 1];
    let mut z = vec![0.0f64; horizon + 1];
    let x_at = |x: &[f64], idx: i64| -> Result<f64, SimError> {
        if idx >= i0 {
            Ok(x[(idx - i0) as usize])
        } else {
            phi_at(idx)
        }
    };

    // seed x and z on the first n points
    for o in 0..n {
        let idx = i0 + o as i64;
        let t = scale.point(idx)?;
        x[o] = phi_at(idx)?;
        let a = spec.coef_a.eval(t);
        z[o] = if a == 0.0 {
            x[o]
        } else {
            x[o] + a * x_at(&x, snap(spec.alpha.eval(t))?)?
        };
    }

    for o in 0..=(horizon - n) {
        let i = i0 + o as i64;
        let t = scale.point(i)?;
        let coeffs = nth_delta_stencil(scale, i, n)?;
        let x_delay = x_at(&x, snap(spec.beta.eval(t))?)?;
        let mut acc = -spec.coef_b.eval(t) * x_delay;
        for (j, c) in coeffs.iter().enumerate().take(n) {
            acc -= c * z[o + j];
        }
        let z_next = acc / coeffs[n];
        let next = i + n as i64;
        let t_next = scale.point(next)?;
        let a_next = spec.coef_a.eval(t_next);
        let x_next = if a_next == 0.0 {
            z_next
        } else {
            let a_idx = snap(spec.alpha.eval(t_next))?;
            if a_idx == next {
                let denom = 1.0 + a_next;
                if denom.abs() < 1e-12 {
                    return Err(SimError::NeutralNotInvertible(t_next));
                }
                z_next / denom
            } else {
                z_next - a_next * x_at(&x, a_idx)?
            }
        };
        z[o + n] = z_next;
        x[o + n] = x_next;
    }

    let x = GridFn::new(window.clone(), x)?;
    let z = GridFn::new(window, z)?;
    let (changes, last_change_index) = sign_changes(&x, i0);
    let trend = asymptotic_trend(&x).unwrap_or(Trend::Undetermined);
    Ok(SolutionTrace {
        x,
        z,
        sign_changes: changes,
        last_change_index,
        trend,
        snap_events,
    })
}

/// Count strict sign alternations from `from_index` on. A sample counts as
/// zero when `|x| <= 1e-12` times the running max; a change needs strictly
/// opposite signs across nonzero samples. Returns the count and the index
/// of the later sample of the last alternating pair.
pub fn sign_changes(x: &GridFn, from_index: i64) -> (usize, Option<i64>) {
    let w = x.window();
    let mut running_max = 0.0f64;
    let mut last_sign = 0i8;
    let mut count = 0usize;
    let mut last_at = None;
    for idx in from_index.max(w.lo())..=w.hi() {
        let v = x.at(idx).expect("index range is the function's own window");
        running_max = running_max.max(v.abs());
        let s = if v.abs() <= 1e-12 * running_max {
            0
        } else if v > 0.0 {
            1
        } else {
            -1
        };
        if s != 0 {
            if last_sign != 0 && s != last_sign {
                count += 1;
                last_at = Some(idx);
            }
            last_sign = s;
        }
    }
    (count, last_at)
}

/// Tag the long-run behavior of a trace from its quarter-by-quarter
/// magnitude profile:
///
/// * tends-to-zero: tail max of |x| below 1e-3 of the global max with the
///   quarter maxima decreasing,
/// * unbounded: quarter maxima growing, a sign-constant tail, and the tail
///   max at least 10 times the typical level (the global median, or the
///   first-quarter minimum for traces that ramp from near zero),
/// * bounded-away: tail min of |x| at least 1e-3 of the global max with no
///   sign change in the tail,
/// * undetermined otherwise.
pub fn asymptotic_trend(x: &GridFn) -> Result<Trend, SimError> {
    let vals = x.values();
    let len = vals.len();
    if len < 100 {
        return Err(SimError::WindowTooShort { len, need: 100 });
    }
    let abs: Vec<f64> = vals.iter().map(|v| v.abs()).collect();
    let global_max = abs.iter().cloned().fold(0.0, f64::max);
    let mut sorted = abs.clone();
    sorted.sort_by(|a, b| a.total_cmp(b));
    let median = sorted[len / 2];
    let q = len / 4;
    let quarter_max: Vec<f64> = (0..4)
        .map(|k| {
            let hi = if k == 3 { len } else { (k + 1) * q };
            abs[k * q..hi].iter().cloned().fold(0.0, f64::max)
        })
        .collect();
    let tail = &vals[len - q..];
    let tail_abs = &abs[len - q..];
    let tail_max = tail_abs.iter().cloned().fold(0.0, f64::max);
    let tail_min = tail_abs.iter().cloned().fold(f64::INFINITY, f64::min);
    let decreasing = quarter_max.windows(2).all(|p| p[1] <= p[0]);
    let growing = quarter_max.windows(2).all(|p| p[1] >= p[0]) && quarter_max[3] > quarter_max[0];
    let tail_sign_constant =
        tail.iter().all(|&v| v > 0.0) || tail.iter().all(|&v| v < 0.0);
    let first_quarter_min = abs[..q].iter().cloned().fold(f64::INFINITY, f64::min);

    if tail_max < 1e-3 * global_max && decreasing {
        Ok(Trend::TendsToZero)
    } else if growing && tail_sign_constant && tail_max >= 10.0 * median.min(first_quarter_min) {
        Ok(Trend::Unbounded)
    } else if tail_min >= 1e-3 * global_max && tail_sign_constant {
        Ok(Trend::BoundedAway)
    } else {
        Ok(Trend::Undetermined)
    }
}

/// Serializable digest of a stepping run (trace bodies go to CSV).
#[derive(Debug, Clone, Serialize)]
pub struct SimulationSummary {
    pub points: usize,
    pub sign_changes: usize,
    pub last_change_t: Option<f64>,
    pub trend: Trend,
    pub snap_events: usize,
    pub final_x: f64,
}

impl SimulationSummary {
    pub fn from_trace(trace: &SolutionTrace) -> Self {
        SimulationSummary {
            points: trace.x.values().len(),
            sign_changes: trace.sign_changes,
            last_change_t: trace.last_change_index.map(|i| trace.x.window().point(i)),
            trend: trace.trend,
            snap_events: trace.snap_events,
            final_x: *trace.x.values().last().expect("trace is never empty"),
        }
    }
}

/// Everything `reproduce` computes for one worked example.
#[derive(Debug, Clone, Serialize)]
pub struct ReproduceReport {
    pub example: ExampleId,
    pub params: ExampleParams,
    pub threshold: ThresholdReport,
    pub liminf: Option<CriterionReport>,
    pub limsup: Option<CriterionReport>,
    pub divergence: Option<DivergenceReport>,
    pub conclusion: ConclusionReport,
    pub simulation: Option<SimulationSummary>,
}

/// Build the equation spec and initial data for one worked example. The
/// continuous example is discretized on a uniform grid with step `h`.
pub fn example_spec(
    example: ExampleId,
    params: &ExampleParams,
    h: f64,
) -> Result<(NeutralEquationSpec, InitialData), SimError> {
    let parse = |s: &str| {
        Expr::parse(s).map_err(|e| {
            SimError::Spec(OscError::ValidationError(format!(
                "internal expression {s:?} failed to parse: {e}"
            )))
        })
    };
    match example {
        ExampleId::QDifference => {
            let ExampleParams { n, q, b0, beta0, .. } = *params;
            let spec = NeutralEquationSpec {
                n,
                scale: TimeScale::geometric(q, 1.0)?,
                t0: 1.0,
                coef_a: parse("0")?,
                coef_b: parse(&format!("{b0}/t^{n}"))?,
                alpha: parse("t")?,
                beta: parse(&format!("t/{}", q.powf(beta0)))?,
                range_tag: RangeTag::None,
            };
            let t_start = q.powf(-beta0);
            Ok((spec, InitialData::constant_one(t_start)))
        }
        ExampleId::Difference => {
            let ExampleParams { n, a0, alpha0, b0, beta0, p, .. } = *params;
            let spec = NeutralEquationSpec {
                n,
                scale: TimeScale::uniform(1.0, 0.0)?,
                t0: 1.0,
                coef_a: parse(&format!("{a0}"))?,
                coef_b: parse(&format!("{b0}/t^{p}"))?,
                alpha: parse(&format!("t - {alpha0}"))?,
                beta: parse(&format!("t - {beta0}"))?,
                range_tag: if a0 == 0.0 { RangeTag::None } else { RangeTag::R1 },
            };
            let t_start = 1.0 - alpha0.max(beta0);
            Ok((spec, InitialData::constant_one(t_start)))
        }
        ExampleId::Continuous => {
            let ExampleParams { n, alpha0, b0, beta0, .. } = *params;
            if !(h > 0.0) {
                return Err(SimError::Spec(OscError::ValidationError(
                    "grid step h must be positive".into(),
                )));
            }
            let spec = NeutralEquationSpec {
                n,
                scale: TimeScale::uniform(h, 0.0)?,
                t0: 1.0,
                coef_a: parse("-(1 - sin(t))/3")?,
                coef_b: parse(&format!("{b0}/t^{n}"))?,
                alpha: parse(&format!("t/{alpha0}"))?,
                beta: parse(&format!("t/{beta0}"))?,
                range_tag: RangeTag::R2,
            };
            let t_start = 1.0 / alpha0.max(beta0);
            Ok((spec, InitialData::constant_one(t_start)))
        }
    }
}

/// Criterion window depth per example: indices past t0 used for the
/// liminf/limsup evaluation (geometric windows reach astronomically large
/// t fast, so the q case stays shallow).
fn criterion_depth(example: ExampleId, horizon: usize) -> i64 {
    match example {
        ExampleId::QDifference => 40,
        ExampleId::Difference => horizon.max(512) as i64,
        ExampleId::Continuous => horizon.max(512) as i64,
    }
}

/// Run the full pipeline for one worked example: closed-form threshold,
/// window criteria, divergence probe, theorem verdict, and (for the
/// discrete examples, or on request for the continuous one) forward
/// simulation. `gamma` feeds the window criteria.
pub fn reproduce_example(
    example: ExampleId,
    params: &ExampleParams,
    horizon: usize,
    gamma: f64,
    simulate_continuous: bool,
) -> Result<ReproduceReport, SimError> {
    let threshold = threshold_closed_form(example, params)?;
    let run_grid = example != ExampleId::Continuous || simulate_continuous;
    if !run_grid {
        let mut conclusion = conclude(
            params.n,
            RangeTag::R2,
            threshold.satisfied,
            DivergenceVerdict::Inconclusive,
        );
        conclusion.notes.push(
            "threshold-only mode: grid criteria and simulation were not run; \
             the verdict reflects the closed form alone"
                .into(),
        );
        return Ok(ReproduceReport {
            example,
            params: *params,
            threshold,
            liminf: None,
            limsup: None,
            divergence: None,
            conclusion,
            simulation: None,
        });
    }
    let h = 0.01;
    let (spec, init) = example_spec(example, params, h)?;
    let i0 = spec.scale.index_of(spec.t0)?;
    let depth = criterion_depth(example, horizon);
    let crit_window = GridWindow::new(spec.scale.clone(), i0, i0 + depth)?;
    let (liminf, limsup) = criterion_windows(&spec, gamma, &crit_window)?;
    let divergence = divergence_check(&spec, &crit_window)?;
    let satisfied =
        liminf.verdict == Verdict::Satisfied && limsup.verdict == Verdict::Satisfied;
    let conclusion = conclude(params.n, spec.range_tag, satisfied, divergence.verdict);
    let trace = step_ivp(&spec, &init, horizon)?;
    Ok(ReproduceReport {
        example,
        params: *params,
        threshold,
        liminf: Some(liminf),
        limsup: Some(limsup),
        divergence: Some(divergence),
        conclusion,
        simulation: Some(SimulationSummary::from_trace(&trace)),
    })
}
