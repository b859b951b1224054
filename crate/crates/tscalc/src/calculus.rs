//! Delta calculus on grid functions.
//!
//! A [`GridFn`] is a sampled function on a [`GridWindow`]. The delta
//! derivative at a right-scattered point is the forward difference quotient
//! `(f(sigma(t)) - f(t)) / mu(t)`, and the delta integral over `[s, t)` is
//! the graininess-weighted left sum. Both are exact (not approximations) on
//! the discrete scales this crate supports.

use crate::scale::{GridWindow, ScaleError};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum CalcError {
    #[error("index {0} is outside the function's window")]
    OutOfWindow(i64),
    #[error("window has {len} points but the operation needs at least {need}")]
    WindowTooShort { len: usize, need: usize },
    #[error("integration endpoints are reversed and this operation requires s <= t")]
    BackwardInterval,
    #[error("1 + mu(t) p(t) = {0} <= 0: p is not positively regressive at t = {1}")]
    NotRegressive(f64, f64),
    #[error(transparent)]
    Scale(#[from] ScaleError),
}

/// A real-valued function sampled on every point of a grid window.
#[derive(Debug, Clone)]
pub struct GridFn {
    window: GridWindow,
    values: Vec<f64>,
}

impl GridFn {
    pub fn new(window: GridWindow, values: Vec<f64>) -> Result<Self, CalcError> {
        if values.len() != window.len() {
            return Err(CalcError::WindowTooShort {
                len: values.len(),
                need: window.len(),
            });
        }
        Ok(GridFn { window, values })
    }

    /// Sample a closure at every window point.
    pub fn sample(window: GridWindow, mut f: impl FnMut(f64) -> f64) -> Self {
        let values = window.points().map(&mut f).collect();
        GridFn { window, values }
    }

    pub fn window(&self) -> &GridWindow {
        &self.window
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Value at window-global index `idx`.
    pub fn at(&self, idx: i64) -> Result<f64, CalcError> {
        if !self.window.contains(idx) {
            return Err(CalcError::OutOfWindow(idx));
        }
        Ok(self.values[self.window.offset(idx)])
    }

    /// Delta derivative as a grid function on `[lo, hi-1]`.
    pub fn delta(&self) -> Result<GridFn, CalcError> {
        if self.window.len() < 2 {
            return Err(CalcError::WindowTooShort {
                len: self.window.len(),
                need: 2,
            });
        }
        let w = self.window.shrink_right(1)?;
        let values = (0..w.len())
            .map(|o| {
                let idx = w.idx_at(o);
                (self.values[o + 1] - self.values[o]) / self.window.mu(idx)
            })
            .collect();
        Ok(GridFn { window: w, values })
    }

    /// k-th iterated delta derivative on `[lo, hi-k]`.
    pub fn delta_n(&self, k: usize) -> Result<GridFn, CalcError> {
        if self.window.len() < k + 1 {
            return Err(CalcError::WindowTooShort {
                len: self.window.len(),
                need: k + 1,
            });
        }
        let mut g = self.clone();
        for _ in 0..k {
            g = g.delta()?;
        }
        Ok(g)
    }

    /// Delta integral over `[s_idx, t_idx)`, signed: reversed endpoints
    /// negate the sum.
    pub fn integral(&self, s_idx: i64, t_idx: i64) -> Result<f64, CalcError> {
        let (a, b, sign) = if s_idx <= t_idx {
            (s_idx, t_idx, 1.0)
        } else {
            (t_idx, s_idx, -1.0)
        };
        if !self.window.contains(a) || !self.window.contains(b) {
            return Err(CalcError::OutOfWindow(if self.window.contains(a) {
                b
            } else {
                a
            }));
        }
        let mut sum = 0.0;
        for idx in a..b {
            sum += self.window.mu(idx) * self.values[self.window.offset(idx)];
        }
        Ok(sign * sum)
    }

    /// Pointwise map, same window.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> GridFn {
        GridFn {
            window: self.window.clone(),
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// Generalized exponential `e_p(t, s) = prod_{eta in [s, t)} (1 + mu(eta) p(eta))`
/// for a positively regressive `p` sampled on the window. Requires `s <= t`.
pub fn exp_fn(p: &GridFn, t_idx: i64, s_idx: i64) -> Result<f64, CalcError> {
    if t_idx < s_idx {
        return Err(CalcError::BackwardInterval);
    }
    let w = p.window();
    if !w.contains(s_idx) || !w.contains(t_idx) {
        return Err(CalcError::OutOfWindow(if w.contains(s_idx) {
            t_idx
        } else {
            s_idx
        }));
    }
    let mut prod = 1.0;
    for idx in s_idx..t_idx {
        let factor = 1.0 + w.mu(idx) * p.at(idx)?;
        if factor <= 0.0 {
            return Err(CalcError::NotRegressive(factor, w.point(idx)));
        }
        prod *= factor;
    }
    Ok(prod)
}

/// Same product in log space, for long windows where the plain product
/// would overflow: returns `ln e_p(t, s)`.
pub fn ln_exp_fn(p: &GridFn, t_idx: i64, s_idx: i64) -> Result<f64, CalcError> {
    if t_idx < s_idx {
        return Err(CalcError::BackwardInterval);
    }
    let w = p.window();
    if !w.contains(s_idx) || !w.contains(t_idx) {
        return Err(CalcError::OutOfWindow(if w.contains(s_idx) {
            t_idx
        } else {
            s_idx
        }));
    }
    let mut sum = 0.0;
    for idx in s_idx..t_idx {
        let x = w.mu(idx) * p.at(idx)?;
        if x <= -1.0 {
            return Err(CalcError::NotRegressive(1.0 + x, w.point(idx)));
        }
        sum += x.ln_1p();
    }
    Ok(sum)
}
