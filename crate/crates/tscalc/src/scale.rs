//! Discrete time scales and index windows on them.
//!
//! Points are addressed by an integer index rather than by their float value:
//! `Uniform` maps index `k` to `anchor + k*step`, `Geometric` to
//! `anchor * ratio^k`, and `Explicit` to its `k`-th listed point. Working in
//! index space keeps jump operators and grid walks exact; float values are
//! only materialized on demand.

use thiserror::Error;

/// Relative tolerance for matching a real number to a grid point.
pub const POINT_MATCH_TOL: f64 = 1e-9;

#[derive(Debug, Error, PartialEq)]
pub enum ScaleError {
    #[error("t = {0} is the right endpoint; sigma is unavailable")]
    AtRightEndpoint(f64),
    #[error("t = {0} is the left endpoint; rho is unavailable")]
    AtLeftEndpoint(f64),
    #[error("no scale point lies in [{0}, {1}]")]
    EmptyIntersection(f64, f64),
    #[error("v = {0} lies below every scale point")]
    BelowWindow(f64),
    #[error("t = {0} is not a point of this scale")]
    NotAPoint(f64),
    #[error("index {0} is outside the scale's index range")]
    IndexOutOfRange(i64),
    #[error("bad scale parameters: {0}")]
    BadParameters(String),
    #[error("window [{0}, {1}] is empty or out of range")]
    BadWindow(i64, i64),
}

/// Forward jump, backward jump, and graininess at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JumpData {
    pub sigma: f64,
    pub rho: f64,
    pub mu: f64,
}

/// A discrete time scale.
#[derive(Debug, Clone, PartialEq)]
pub enum TimeScale {
    /// `{ anchor + k*step : k integer }`, step > 0. Unbounded both ways.
    Uniform { step: f64, anchor: f64 },
    /// `{ anchor * ratio^k : k integer }`, anchor > 0, ratio > 1.
    /// Unbounded above, accumulates at 0 from above.
    Geometric { ratio: f64, anchor: f64 },
    /// A strictly increasing finite list; index k is the k-th point.
    Explicit { points: Vec<f64> },
}

impl TimeScale {
    pub fn uniform(step: f64, anchor: f64) -> Result<Self, ScaleError> {
        if !(step > 0.0) || !step.is_finite() || !anchor.is_finite() {
            return Err(ScaleError::BadParameters(format!(
                "uniform scale needs finite anchor and step > 0, got step={step}, anchor={anchor}"
            )));
        }
        Ok(TimeScale::Uniform { step, anchor })
    }

    pub fn geometric(ratio: f64, anchor: f64) -> Result<Self, ScaleError> {
        if !(ratio > 1.0) || !ratio.is_finite() || !(anchor > 0.0) || !anchor.is_finite() {
            return Err(ScaleError::BadParameters(format!(
                "geometric scale needs ratio > 1 and anchor > 0, got ratio={ratio}, anchor={anchor}"
            )));
        }
        Ok(TimeScale::Geometric { ratio, anchor })
    }

    pub fn explicit(points: Vec<f64>) -> Result<Self, ScaleError> {
        if points.is_empty() {
            return Err(ScaleError::BadParameters("empty point list".into()));
        }
        if points.iter().any(|p| !p.is_finite()) {
            return Err(ScaleError::BadParameters("non-finite point".into()));
        }
        if points.windows(2).any(|w| w[0] >= w[1]) {
            return Err(ScaleError::BadParameters(
                "points must be strictly increasing".into(),
            ));
        }
        Ok(TimeScale::Explicit { points })
    }

    /// The point at integer index `k`.
    pub fn point(&self, k: i64) -> Result<f64, ScaleError> {
        match self {
            TimeScale::Uniform { step, anchor } => Ok(anchor + k as f64 * step),
            TimeScale::Geometric { ratio, anchor } => Ok(anchor * ratio.powi(k as i32)),
            TimeScale::Explicit { points } => {
                if k < 0 || k as usize >= points.len() {
                    Err(ScaleError::IndexOutOfRange(k))
                } else {
                    Ok(points[k as usize])
                }
            }
        }
    }

    /// Lowest and highest valid index, where bounded.
    pub fn index_bounds(&self) -> (Option<i64>, Option<i64>) {
        match self {
            TimeScale::Uniform { .. } | TimeScale::Geometric { .. } => (None, None),
            TimeScale::Explicit { points } => (Some(0), Some(points.len() as i64 - 1)),
        }
    }

    /// Index of the scale point equal to `t` (within [`POINT_MATCH_TOL`]).
    pub fn index_of(&self, t: f64) -> Result<i64, ScaleError> {
        let tol = POINT_MATCH_TOL * t.abs().max(1.0);
        match self {
            TimeScale::Uniform { step, anchor } => {
                let k = ((t - anchor) / step).round() as i64;
                let p = anchor + k as f64 * step;
                if (p - t).abs() <= tol {
                    Ok(k)
                } else {
                    Err(ScaleError::NotAPoint(t))
                }
            }
            TimeScale::Geometric { ratio, anchor } => {
                if t <= 0.0 {
                    return Err(ScaleError::NotAPoint(t));
                }
                let k = ((t / anchor).ln() / ratio.ln()).round() as i64;
                let p = anchor * ratio.powi(k as i32);
                if (p - t).abs() <= tol {
                    Ok(k)
                } else {
                    Err(ScaleError::NotAPoint(t))
                }
            }
            TimeScale::Explicit { points } => {
                let j = points.partition_point(|&p| p < t - tol);
                if j < points.len() && (points[j] - t).abs() <= tol {
                    Ok(j as i64)
                } else {
                    Err(ScaleError::NotAPoint(t))
                }
            }
        }
    }

    /// sigma, rho, mu at a scale point `t`.
    pub fn jump_data(&self, t: f64) -> Result<JumpData, ScaleError> {
        let k = self.index_of(t)?;
        let (lo, hi) = self.index_bounds();
        if hi.is_some_and(|h| k >= h) {
            return Err(ScaleError::AtRightEndpoint(t));
        }
        if lo.is_some_and(|l| k <= l) {
            return Err(ScaleError::AtLeftEndpoint(t));
        }
        let sigma = self.point(k + 1)?;
        let rho = self.point(k - 1)?;
        Ok(JumpData {
            sigma,
            rho,
            mu: sigma - t,
        })
    }

    /// Graininess at index `k`: `point(k+1) - point(k)`.
    pub fn mu_at(&self, k: i64) -> Result<f64, ScaleError> {
        Ok(self.point(k + 1)? - self.point(k)?)
    }

    /// Largest index whose point is <= `v`.
    pub fn snap_down_index(&self, v: f64) -> Result<i64, ScaleError> {
        let tol = POINT_MATCH_TOL * v.abs().max(1.0);
        match self {
            TimeScale::Uniform { step, anchor } => {
                let mut k = ((v - anchor) / step).floor() as i64;
                // boundary fuzz: accept the next point if v sits within tol of it
                if anchor + (k + 1) as f64 * step <= v + tol {
                    k += 1;
                }
                Ok(k)
            }
            TimeScale::Geometric { ratio, anchor } => {
                // points accumulate at 0 from above; only v <= 0 is below all of them
                if v <= 0.0 {
                    return Err(ScaleError::BelowWindow(v));
                }
                let mut k = ((v / anchor).ln() / ratio.ln()).floor() as i64;
                if anchor * ratio.powi((k + 1) as i32) <= v + tol {
                    k += 1;
                }
                // the float log can land one step high
                while anchor * ratio.powi(k as i32) > v + tol {
                    k -= 1;
                }
                Ok(k)
            }
            TimeScale::Explicit { points } => {
                let j = points.partition_point(|&p| p <= v + tol);
                if j == 0 {
                    Err(ScaleError::BelowWindow(v))
                } else {
                    Ok(j as i64 - 1)
                }
            }
        }
    }

    /// Largest scale point <= `v`.
    pub fn snap_down(&self, v: f64) -> Result<f64, ScaleError> {
        self.point(self.snap_down_index(v)?)
    }

    /// Smallest index whose point is >= `v`.
    pub fn snap_up_index(&self, v: f64) -> Result<i64, ScaleError> {
        match self {
            TimeScale::Explicit { points } => {
                let tol = POINT_MATCH_TOL * v.abs().max(1.0);
                let j = points.partition_point(|&p| p < v - tol);
                if j == points.len() {
                    Err(ScaleError::EmptyIntersection(v, f64::INFINITY))
                } else {
                    Ok(j as i64)
                }
            }
            _ => match self.snap_down_index(v) {
                Ok(k) => {
                    let tol = POINT_MATCH_TOL * v.abs().max(1.0);
                    if (self.point(k)? - v).abs() <= tol {
                        Ok(k)
                    } else {
                        Ok(k + 1)
                    }
                }
                // geometric points accumulate at 0+, so for v <= 0 there is
                // no smallest point >= v
                Err(ScaleError::BelowWindow(_)) => Err(ScaleError::BadParameters(format!(
                    "v = {v} is below a geometric scale; no smallest point exists"
                ))),
                Err(e) => Err(e),
            },
        }
    }

    /// All scale points in `[a, b]`, in increasing order.
    pub fn grid(&self, a: f64, b: f64) -> Result<Vec<f64>, ScaleError> {
        if a > b {
            return Err(ScaleError::EmptyIntersection(a, b));
        }
        if matches!(self, TimeScale::Geometric { .. }) && a <= 0.0 && b > 0.0 {
            return Err(ScaleError::BadParameters(format!(
                "[{a}, {b}] contains the accumulation point of a geometric scale"
            )));
        }
        let lo = match self.snap_up_index(a) {
            Ok(k) => k,
            Err(_) => return Err(ScaleError::EmptyIntersection(a, b)),
        };
        let hi = match self.snap_down_index(b) {
            Ok(k) => k,
            Err(_) => return Err(ScaleError::EmptyIntersection(a, b)),
        };
        if hi < lo {
            return Err(ScaleError::EmptyIntersection(a, b));
        }
        (lo..=hi).map(|k| self.point(k)).collect()
    }
}

/// A contiguous inclusive index range `[lo, hi]` on a scale.
///
/// Grid functions, monomial tables, and traces all live on a window. The
/// window carries its scale so graininess and point values are available
/// without further lookups.
#[derive(Debug, Clone)]
pub struct GridWindow {
    scale: TimeScale,
    lo: i64,
    hi: i64,
}

impl GridWindow {
    pub fn new(scale: TimeScale, lo: i64, hi: i64) -> Result<Self, ScaleError> {
        if lo > hi {
            return Err(ScaleError::BadWindow(lo, hi));
        }
        let (smin, smax) = scale.index_bounds();
        if smin.is_some_and(|m| lo < m) || smax.is_some_and(|m| hi > m) {
            return Err(ScaleError::BadWindow(lo, hi));
        }
        Ok(GridWindow { scale, lo, hi })
    }

    /// Window spanning all points of `scale` in `[a, b]`.
    pub fn covering(scale: TimeScale, a: f64, b: f64) -> Result<Self, ScaleError> {
        if a > b {
            return Err(ScaleError::EmptyIntersection(a, b));
        }
        let lo = scale
            .snap_up_index(a)
            .map_err(|_| ScaleError::EmptyIntersection(a, b))?;
        let hi = scale
            .snap_down_index(b)
            .map_err(|_| ScaleError::EmptyIntersection(a, b))?;
        if hi < lo {
            return Err(ScaleError::EmptyIntersection(a, b));
        }
        GridWindow::new(scale, lo, hi)
    }

    pub fn scale(&self) -> &TimeScale {
        &self.scale
    }

    pub fn lo(&self) -> i64 {
        self.lo
    }

    pub fn hi(&self) -> i64 {
        self.hi
    }

    /// Number of grid points in the window.
    pub fn len(&self) -> usize {
        (self.hi - self.lo + 1) as usize
    }

    pub fn is_empty(&self) -> bool {
        false // lo <= hi is a construction invariant
    }

    pub fn contains(&self, idx: i64) -> bool {
        idx >= self.lo && idx <= self.hi
    }

    /// Point value at window-global index `idx`.
    pub fn point(&self, idx: i64) -> f64 {
        self.scale
            .point(idx)
            .expect("window indices are validated at construction")
    }

    /// Graininess at index `idx` (needs `idx + 1` representable on the scale).
    pub fn mu(&self, idx: i64) -> f64 {
        self.scale
            .mu_at(idx)
            .expect("graininess queried past the scale's right endpoint")
    }

    /// Offset of `idx` into the window's storage order.
    pub fn offset(&self, idx: i64) -> usize {
        debug_assert!(self.contains(idx));
        (idx - self.lo) as usize
    }

    pub fn idx_at(&self, offset: usize) -> i64 {
        self.lo + offset as i64
    }

    pub fn indices(&self) -> impl Iterator<Item = i64> {
        self.lo..=self.hi
    }

    pub fn points(&self) -> impl Iterator<Item = f64> + '_ {
        self.indices().map(|k| self.point(k))
    }

    /// Index of the window point equal to `t`.
    pub fn index_of_point(&self, t: f64) -> Result<i64, ScaleError> {
        let k = self.scale.index_of(t)?;
        if self.contains(k) {
            Ok(k)
        } else {
            Err(ScaleError::IndexOutOfRange(k))
        }
    }

    /// Shrink the window by `k` points on the right (derivative windows).
    pub fn shrink_right(&self, k: usize) -> Result<Self, ScaleError> {
        let hi = self.hi - k as i64;
        if hi < self.lo {
            return Err(ScaleError::BadWindow(self.lo, hi));
        }
        Ok(GridWindow {
            scale: self.scale.clone(),
            lo: self.lo,
            hi,
        })
    }
}
