//! Generalized monomials `h_k` and `g_k` on time scales.
//!
//! `h_0(t, s) = 1` and `h_{k+1}(t, s) = integral_s^t h_k(eta, s) delta-eta`;
//! `g_k` is the sigma-shifted companion, `g_{k+1}(t, s) =
//! integral_s^t g_k(sigma(eta), s) delta-eta`. On the reals these are
//! `(t-s)^k / k!`; on Z they are binomials; on geometric grids they have the
//! q-factorial closed form implemented by [`h_closed_geometric`].
//!
//! Tables are built over a window by the defining first-argument recursion,
//! or anchored in the second argument via the equivalent backward recursion
//! `h_k(t, s) = integral_s^t h_{k-1}(t, sigma(eta)) delta-eta`, which gives
//! all of `h_k(t, .)` in one O(k N) sweep. Both orderings of the arguments
//! are supported; the signed-integral recursion defines `h_k` for `t < s`
//! as well.

use crate::calculus::{CalcError, GridFn};
use crate::scale::{GridWindow, ScaleError, TimeScale};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum MonomialError {
    #[error("index {0} is outside the table's window")]
    OutOfWindow(i64),
    #[error("order {got} exceeds the table's maximum order {max}")]
    OrderTooHigh { got: usize, max: usize },
    #[error("bad order: {0}")]
    BadOrder(String),
    #[error(transparent)]
    Calc(#[from] CalcError),
    #[error(transparent)]
    Scale(#[from] ScaleError),
}

/// Which monomial family a table holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MonomialKind {
    /// Plain monomials `h_k`.
    H,
    /// Sigma-shifted monomials `g_k`.
    G,
}

/// Which argument of `m_k(t, s)` the table anchor fixes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AnchorArg {
    /// `value(k, i)` is `m_k(point(i), anchor)`.
    First,
    /// `value(k, i)` is `h_k(anchor, point(i))`.
    Second,
}

/// Rows of monomial values over a window, one row per order `0..=max_k`.
#[derive(Debug, Clone)]
pub struct MonomialTable {
    window: GridWindow,
    anchor: i64,
    kind: MonomialKind,
    arg: AnchorArg,
    rows: Vec<Vec<f64>>,
}

impl MonomialTable {
    /// Table of `m_k(t, s0)` for all window points `t`, anchored at the
    /// window index `s0 = s_idx`.
    pub fn first_arg(
        window: &GridWindow,
        s_idx: i64,
        max_k: usize,
        kind: MonomialKind,
    ) -> Result<Self, MonomialError> {
        if !window.contains(s_idx) {
            return Err(MonomialError::OutOfWindow(s_idx));
        }
        let n = window.len();
        let s_off = window.offset(s_idx);
        let mut rows = vec![vec![1.0; n]];
        for k in 1..=max_k {
            let prev = &rows[k - 1];
            let mut row = vec![0.0; n];
            // upward from the anchor: m_k(sigma(i)) = m_k(i) + mu(i) * prev
            for o in s_off..n - 1 {
                let mu = window.mu(window.idx_at(o));
                let drive = match kind {
                    MonomialKind::H => prev[o],
                    MonomialKind::G => prev[o + 1],
                };
                row[o + 1] = row[o] + mu * drive;
            }
            // downward: m_k(i) = m_k(sigma(i)) - mu(i) * prev
            for o in (0..s_off).rev() {
                let mu = window.mu(window.idx_at(o));
                let drive = match kind {
                    MonomialKind::H => prev[o],
                    MonomialKind::G => prev[o + 1],
                };
                row[o] = row[o + 1] - mu * drive;
            }
            rows.push(row);
        }
        Ok(MonomialTable {
            window: window.clone(),
            anchor: s_idx,
            kind,
            arg: AnchorArg::First,
            rows,
        })
    }

    /// Table of `h_k(t0, s)` for all window points `s`, anchored at the
    /// window index `t0 = t_idx`. Uses the backward recursion
    /// `h_k(t0, s) = h_k(t0, sigma(s)) + mu(s) h_{k-1}(t0, sigma(s))`.
    pub fn second_arg(
        window: &GridWindow,
        t_idx: i64,
        max_k: usize,
    ) -> Result<Self, MonomialError> {
        if !window.contains(t_idx) {
            return Err(MonomialError::OutOfWindow(t_idx));
        }
        let n = window.len();
        let t_off = window.offset(t_idx);
        let mut rows = vec![vec![1.0; n]];
        for k in 1..=max_k {
            let prev = &rows[k - 1];
            let mut row = vec![0.0; n];
            for o in (0..t_off).rev() {
                let mu = window.mu(window.idx_at(o));
                row[o] = row[o + 1] + mu * prev[o + 1];
            }
            for o in t_off..n - 1 {
                let mu = window.mu(window.idx_at(o));
                row[o + 1] = row[o] - mu * prev[o + 1];
            }
            rows.push(row);
        }
        Ok(MonomialTable {
            window: window.clone(),
            anchor: t_idx,
            kind: MonomialKind::H,
            arg: AnchorArg::Second,
            rows,
        })
    }

    pub fn window(&self) -> &GridWindow {
        &self.window
    }

    pub fn anchor(&self) -> i64 {
        self.anchor
    }

    pub fn kind(&self) -> MonomialKind {
        self.kind
    }

    pub fn anchored_arg(&self) -> AnchorArg {
        self.arg
    }

    pub fn max_order(&self) -> usize {
        self.rows.len() - 1
    }

    /// Value at order `k` and window index `idx`. For a first-argument table
    /// this is `m_k(point(idx), anchor)`; for a second-argument table,
    /// `h_k(anchor, point(idx))`.
    pub fn value(&self, k: usize, idx: i64) -> Result<f64, MonomialError> {
        if k > self.max_order() {
            return Err(MonomialError::OrderTooHigh {
                got: k,
                max: self.max_order(),
            });
        }
        if !self.window.contains(idx) {
            return Err(MonomialError::OutOfWindow(idx));
        }
        Ok(self.rows[k][self.window.offset(idx)])
    }

    /// Whole row at order `k`, in window storage order.
    pub fn row(&self, k: usize) -> Result<&[f64], MonomialError> {
        if k > self.max_order() {
            return Err(MonomialError::OrderTooHigh {
                got: k,
                max: self.max_order(),
            });
        }
        Ok(&self.rows[k])
    }
}

/// Single value `h_k(t, s)` for scale points `t`, `s` (either ordering).
pub fn h_poly(ts: &TimeScale, k: usize, t: f64, s: f64) -> Result<f64, MonomialError> {
    let ti = ts.index_of(t)?;
    let si = ts.index_of(s)?;
    let w = GridWindow::new(ts.clone(), ti.min(si), ti.max(si))?;
    let table = MonomialTable::first_arg(&w, si, k, MonomialKind::H)?;
    table.value(k, ti)
}

/// Single value `g_k(t, s)`.
pub fn g_poly(ts: &TimeScale, k: usize, t: f64, s: f64) -> Result<f64, MonomialError> {
    let ti = ts.index_of(t)?;
    let si = ts.index_of(s)?;
    let w = GridWindow::new(ts.clone(), ti.min(si), ti.max(si))?;
    let table = MonomialTable::first_arg(&w, si, k, MonomialKind::G)?;
    table.value(k, ti)
}

/// q-gamma value `Gamma_q(n) = prod_{i=1}^{n-1} (q^i - 1)/(q - 1)` for
/// integer `n >= 1` and `q > 1`.
pub fn q_gamma(q: f64, n: u32) -> Result<f64, MonomialError> {
    if n == 0 {
        return Err(MonomialError::BadOrder("q_gamma needs n >= 1".into()));
    }
    if !(q > 1.0) {
        return Err(MonomialError::BadOrder(format!("q_gamma needs q > 1, got {q}")));
    }
    let mut prod = 1.0;
    for i in 1..n {
        prod *= (q.powi(i as i32) - 1.0) / (q - 1.0);
    }
    Ok(prod)
}

/// Closed form on a geometric scale:
/// `h_n(t, s) = prod_{nu=0}^{n-1} (t - q^nu s) / Gamma_q(n+1)`.
pub fn h_closed_geometric(q: f64, n: usize, t: f64, s: f64) -> Result<f64, MonomialError> {
    let mut num = 1.0;
    for nu in 0..n {
        num *= t - q.powi(nu as i32) * s;
    }
    Ok(num / q_gamma(q, n as u32 + 1)?)
}

/// Closed form on a uniform scale with step `h`:
/// `h_n(t, s) = prod_{i=0}^{n-1} (t - s - i h) / n!`.
pub fn h_closed_uniform(h: f64, n: usize, t: f64, s: f64) -> f64 {
    let mut prod = 1.0;
    for i in 0..n {
        prod *= t - s - i as f64 * h;
    }
    let mut fact = 1.0;
    for i in 2..=n {
        fact *= i as f64;
    }
    prod / fact
}

/// Which asymptotic ratio [`limit_ratio_check`] estimates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LimitDirection {
    /// `h_n(t, s)/t^n` as `t -> infinity` with `s` at the anchor.
    TLarge,
    /// `h_n(t, s)/s^n` as `s -> infinity` with `t` at the anchor.
    SLarge,
}

#[derive(Debug, Clone, Copy)]
pub struct LimitRatio {
    pub ratio: f64,
    pub expected: f64,
    pub rel_err: f64,
}

/// Estimate the large-argument ratio of `h_n` on the geometric scale
/// `{q^k}`, walking `depth` grid steps away from the anchor `1`, and compare
/// with the closed limit (`1/Gamma_q-hat(n+1)` for large `t`, and
/// `(-1)^n q^{n(n-1)/2} / Gamma_q-hat(n+1)` for large `s`).
pub fn limit_ratio_check(
    q: f64,
    n: usize,
    direction: LimitDirection,
    depth: i64,
) -> Result<LimitRatio, MonomialError> {
    if depth < 1 {
        return Err(MonomialError::BadOrder("depth must be >= 1".into()));
    }
    let ts = TimeScale::geometric(q, 1.0)?;
    let w = GridWindow::new(ts, 0, depth)?;
    let gamma = q_gamma(q, n as u32 + 1)?;
    let (ratio, expected) = match direction {
        LimitDirection::TLarge => {
            let table = MonomialTable::first_arg(&w, 0, n, MonomialKind::H)?;
            let t = w.point(depth);
            (table.value(n, depth)? / t.powi(n as i32), 1.0 / gamma)
        }
        LimitDirection::SLarge => {
            let table = MonomialTable::second_arg(&w, 0, n)?;
            let s = w.point(depth);
            let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
            (
                table.value(n, depth)? / s.powi(n as i32),
                sign * q.powi((n * (n.saturating_sub(1)) / 2) as i32) / gamma,
            )
        }
    };
    let rel_err = (ratio - expected).abs() / expected.abs().max(f64::MIN_POSITIVE);
    Ok(LimitRatio {
        ratio,
        expected,
        rel_err,
    })
}

/// The two parts of Taylor's formula at order `n`.
#[derive(Debug, Clone, Copy)]
pub struct TaylorParts {
    /// `sum_{k=0}^{n-1} h_k(t, s) f^{Delta^k}(s)`
    pub sum_part: f64,
    /// `integral_s^t h_{n-1}(t, sigma(eta)) f^{Delta^n}(eta) delta-eta`
    pub remainder_part: f64,
    /// `sum_part + remainder_part`; equals `f(t)` identically.
    pub value: f64,
}

/// Evaluate both sides of Taylor's formula for a sampled `f` at window
/// indices `s_idx`, `t_idx`. The identity is exact on discrete scales, so
/// the residual against `f(t)` is pure rounding noise.
pub fn taylor_eval(
    f: &GridFn,
    n: usize,
    s_idx: i64,
    t_idx: i64,
) -> Result<TaylorParts, MonomialError> {
    if n == 0 {
        return Err(MonomialError::BadOrder("taylor_eval needs n >= 1".into()));
    }
    let w = f.window();
    if !w.contains(s_idx) {
        return Err(MonomialError::OutOfWindow(s_idx));
    }
    if !w.contains(t_idx) {
        return Err(MonomialError::OutOfWindow(t_idx));
    }
    // iterated derivatives shrink the window on the right; every evaluation
    // point must stay inside the shrunken windows
    let d: Vec<GridFn> = (0..=n).map(|k| f.delta_n(k)).collect::<Result<_, _>>()?;
    let h_at_s = MonomialTable::first_arg(w, s_idx, n - 1, MonomialKind::H)?;
    let psi = MonomialTable::second_arg(w, t_idx, n - 1)?;

    let mut sum_part = 0.0;
    for k in 0..n {
        sum_part += h_at_s.value(k, t_idx)? * d[k].at(s_idx)?;
    }

    let (a, b, sign) = if s_idx <= t_idx {
        (s_idx, t_idx, 1.0)
    } else {
        (t_idx, s_idx, -1.0)
    };
    let mut remainder_part = 0.0;
    for eta in a..b {
        remainder_part += w.mu(eta) * psi.value(n - 1, eta + 1)? * d[n].at(eta)?;
    }
    remainder_part *= sign;

    Ok(TaylorParts {
        sum_part,
        remainder_part,
        value: sum_part + remainder_part,
    })
}

/// Residual `|h_{k+l}(t, s) - integral_s^t h_{k-1}(t, sigma(eta)) h_l(eta, s) delta-eta|`
/// of the monomial convolution identity; zero up to rounding.
pub fn convolution_residual(
    window: &GridWindow,
    k: usize,
    l: usize,
    s_idx: i64,
    t_idx: i64,
) -> Result<f64, MonomialError> {
    if k == 0 {
        return Err(MonomialError::BadOrder(
            "convolution identity needs k >= 1".into(),
        ));
    }
    if !window.contains(s_idx) {
        return Err(MonomialError::OutOfWindow(s_idx));
    }
    if !window.contains(t_idx) {
        return Err(MonomialError::OutOfWindow(t_idx));
    }
    let h_at_s = MonomialTable::first_arg(window, s_idx, k + l, MonomialKind::H)?;
    let psi = MonomialTable::second_arg(window, t_idx, k - 1)?;
    let lhs = h_at_s.value(k + l, t_idx)?;
    let (a, b, sign) = if s_idx <= t_idx {
        (s_idx, t_idx, 1.0)
    } else {
        (t_idx, s_idx, -1.0)
    };
    let mut rhs = 0.0;
    for eta in a..b {
        rhs += window.mu(eta) * psi.value(k - 1, eta + 1)? * h_at_s.value(l, eta)?;
    }
    rhs *= sign;
    Ok((lhs - rhs).abs())
}

/// Worst observed slack of one inequality family.
#[derive(Debug, Clone)]
pub struct LemmaSlack {
    pub lemma: &'static str,
    /// min over instances of LHS - RHS
    pub slack: f64,
    /// min over instances of (LHS - RHS) / max(1, |RHS|)
    pub normalized: f64,
    /// (k, l, t_idx) where the normalized minimum was attained
    pub at: (usize, usize, i64),
    pub instances: usize,
}

#[derive(Debug, Clone)]
pub struct LemmaSuiteReport {
    pub per_lemma: Vec<LemmaSlack>,
}

impl LemmaSuiteReport {
    /// Worst normalized slack across all four families.
    pub fn min_normalized(&self) -> f64 {
        self.per_lemma
            .iter()
            .map(|l| l.normalized)
            .fold(f64::INFINITY, f64::min)
    }
}

/// Check the four monomial inequalities over every window point `t >= s`:
///
/// 1. argument swap: `(-1)^k h_k(s, t) >= h_k(t, s)`,
/// 2. products dominate: `h_k(t, s) h_l(t, s) >= h_{k+l}(t, s)`,
/// 3. convolution bound:
///    `(-1)^l integral_s^t h_{k-1}(t, sigma(eta)) h_l(eta, t) delta-eta >= h_{k+l}(t, s)` (k >= 1),
/// 4. sigma-shift domination: `g_k(t, s) >= h_k(t, s)`.
pub fn check_lemma_inequalities(
    window: &GridWindow,
    kmax: usize,
    lmax: usize,
    s_idx: i64,
) -> Result<LemmaSuiteReport, MonomialError> {
    if !window.contains(s_idx) {
        return Err(MonomialError::OutOfWindow(s_idx));
    }
    let kmax = kmax.max(1);
    let h_at_s = MonomialTable::first_arg(window, s_idx, kmax + lmax, MonomialKind::H)?;
    let g_at_s = MonomialTable::first_arg(window, s_idx, kmax, MonomialKind::G)?;
    // h_k(s, t) as t varies = second-argument table anchored at s
    let swap = MonomialTable::second_arg(window, s_idx, kmax)?;

    let mut slacks = [
        LemmaSlack {
            lemma: "argument-swap",
            slack: f64::INFINITY,
            normalized: f64::INFINITY,
            at: (0, 0, s_idx),
            instances: 0,
        },
        LemmaSlack {
            lemma: "product-dominates",
            slack: f64::INFINITY,
            normalized: f64::INFINITY,
            at: (0, 0, s_idx),
            instances: 0,
        },
        LemmaSlack {
            lemma: "convolution-bound",
            slack: f64::INFINITY,
            normalized: f64::INFINITY,
            at: (0, 0, s_idx),
            instances: 0,
        },
        LemmaSlack {
            lemma: "shift-dominates",
            slack: f64::INFINITY,
            normalized: f64::INFINITY,
            at: (0, 0, s_idx),
            instances: 0,
        },
    ];
    let mut record = |which: usize, k: usize, l: usize, t: i64, lhs: f64, rhs: f64| {
        let slack = lhs - rhs;
        let normalized = slack / rhs.abs().max(1.0);
        let s = &mut slacks[which];
        s.instances += 1;
        if normalized < s.normalized {
            s.normalized = normalized;
            s.at = (k, l, t);
        }
        if slack < s.slack {
            s.slack = slack;
        }
    };

    for t_idx in s_idx..=window.hi() {
        // per-t anchored tables for the convolution bound
        let psi_t = MonomialTable::second_arg(window, t_idx, kmax.saturating_sub(1))?;
        let h_at_t = MonomialTable::first_arg(window, t_idx, lmax, MonomialKind::H)?;
        for k in 0..=kmax {
            let h_ts = h_at_s.value(k, t_idx)?;
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            record(0, k, 0, t_idx, sign * swap.value(k, t_idx)?, h_ts);
            record(3, k, 0, t_idx, g_at_s.value(k, t_idx)?, h_ts);
            for l in 0..=lmax {
                record(
                    1,
                    k,
                    l,
                    t_idx,
                    h_at_s.value(k, t_idx)? * h_at_s.value(l, t_idx)?,
                    h_at_s.value(k + l, t_idx)?,
                );
                if k >= 1 {
                    let mut integral = 0.0;
                    for eta in s_idx..t_idx {
                        integral += window.mu(eta)
                            * psi_t.value(k - 1, eta + 1)?
                            * h_at_t.value(l, eta)?;
                    }
                    let lsign = if l % 2 == 0 { 1.0 } else { -1.0 };
                    record(2, k, l, t_idx, lsign * integral, h_at_s.value(k + l, t_idx)?);
                }
            }
        }
    }
    Ok(LemmaSuiteReport {
        per_lemma: slacks.to_vec(),
    })
}

/// Exact-arithmetic monomial evaluation on uniform and geometric grids.
/// Used as the oracle for the floating-point recursion and closed forms.
pub mod exact {
    use num_bigint::BigInt;
    use num_rational::BigRational;
    use num_traits::{One, Zero};

    pub fn rational(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    /// `h_k(t, s)` on a uniform grid with rational step, by the defining
    /// signed recursion over grid indices; `d_idx` is the (possibly
    /// negative) index difference `t - s` in steps. Translation invariant,
    /// so the anchor never enters.
    pub fn h_uniform_recursive(step: &BigRational, k: usize, d_idx: i64) -> BigRational {
        let lo = d_idx.min(0);
        let hi = d_idx.max(0);
        let n = (hi - lo) as usize + 1;
        let s_off = (-lo) as usize;
        let t_off = (d_idx - lo) as usize;
        let mut prev = vec![BigRational::one(); n];
        let mut row = vec![BigRational::zero(); n];
        for _ in 1..=k {
            row[s_off] = BigRational::zero();
            for o in s_off..n - 1 {
                row[o + 1] = &row[o] + step * &prev[o];
            }
            for o in (0..s_off).rev() {
                row[o] = &row[o + 1] - step * &prev[o];
            }
            std::mem::swap(&mut prev, &mut row);
        }
        prev[t_off].clone()
    }

    /// Closed form `prod_{i=0}^{k-1} (t - s - i step) / k!` with
    /// `t - s = d_idx * step`.
    pub fn h_uniform_closed(step: &BigRational, k: usize, d_idx: i64) -> BigRational {
        let diff = BigRational::from_integer(BigInt::from(d_idx)) * step;
        let mut prod = BigRational::one();
        for i in 0..k {
            prod *= &diff - BigRational::from_integer(BigInt::from(i as i64)) * step;
        }
        let mut fact = BigInt::one();
        for i in 2..=k {
            fact *= BigInt::from(i as i64);
        }
        prod / BigRational::from_integer(fact)
    }

    /// `h_k(q^t_idx, q^s_idx)` on the geometric grid `{q^j}` (rational q),
    /// by the defining recursion with exact graininess `q^j (q - 1)`.
    pub fn h_geometric_recursive(
        q: &BigRational,
        k: usize,
        t_idx: i64,
        s_idx: i64,
    ) -> BigRational {
        let lo = t_idx.min(s_idx);
        let hi = t_idx.max(s_idx);
        let n = (hi - lo) as usize + 1;
        let point = |o: usize| -> BigRational {
            let j = lo + o as i64;
            if j >= 0 {
                num_traits::pow::pow(q.clone(), j as usize)
            } else {
                num_traits::pow::pow(q.clone(), (-j) as usize).recip()
            }
        };
        let mus: Vec<BigRational> = (0..n - 1).map(|o| point(o + 1) - point(o)).collect();
        let s_off = (s_idx - lo) as usize;
        let t_off = (t_idx - lo) as usize;
        let mut prev = vec![BigRational::one(); n];
        let mut row = vec![BigRational::zero(); n];
        for _ in 1..=k {
            row[s_off] = BigRational::zero();
            for o in s_off..n - 1 {
                row[o + 1] = &row[o] + &mus[o] * &prev[o];
            }
            for o in (0..s_off).rev() {
                row[o] = &row[o + 1] - &mus[o] * &prev[o];
            }
            std::mem::swap(&mut prev, &mut row);
        }
        prev[t_off].clone()
    }

    /// Closed form `prod_{nu=0}^{k-1} (t - q^nu s) / prod_{i=0}^{k-1} (sum_{j<=i} q^j)`
    /// with `t = q^t_idx`, `s = q^s_idx`.
    pub fn h_geometric_closed(
        q: &BigRational,
        k: usize,
        t_idx: i64,
        s_idx: i64,
    ) -> BigRational {
        let powq = |j: i64| -> BigRational {
            if j >= 0 {
                num_traits::pow::pow(q.clone(), j as usize)
            } else {
                num_traits::pow::pow(q.clone(), (-j) as usize).recip()
            }
        };
        let t = powq(t_idx);
        let s = powq(s_idx);
        let mut num = BigRational::one();
        for nu in 0..k {
            num *= &t - powq(nu as i64) * &s;
        }
        let mut den = BigRational::one();
        for i in 0..k {
            let mut geo = BigRational::zero();
            for j in 0..=i {
                geo += powq(j as i64);
            }
            den *= geo;
        }
        num / den
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scale::TimeScale;
    use num_bigint::BigInt;
    use num_rational::BigRational;
    use proptest::prelude::*;

    fn z_window(lo: i64, hi: i64) -> GridWindow {
        GridWindow::new(TimeScale::uniform(1.0, 0.0).unwrap(), lo, hi).unwrap()
    }

    #[test]
    fn h2_on_z_is_binomial() {
        let ts = TimeScale::uniform(1.0, 0.0).unwrap();
        assert_eq!(h_poly(&ts, 2, 5.0, 2.0).unwrap(), 3.0);
        assert_eq!(h_poly(&ts, 3, 6.0, 2.0).unwrap(), 4.0);
    }

    #[test]
    fn h2_geometric_example() {
        let ts = TimeScale::geometric(2.0, 1.0).unwrap();
        assert_eq!(h_poly(&ts, 2, 4.0, 1.0).unwrap(), 2.0);
    }

    #[test]
    fn g_on_z() {
        let ts = TimeScale::uniform(1.0, 0.0).unwrap();
        // g_1 = t - s, g_2 = (t-s)(t-s+1)/2 on Z
        assert_eq!(g_poly(&ts, 1, 5.0, 2.0).unwrap(), 3.0);
        assert_eq!(g_poly(&ts, 2, 5.0, 2.0).unwrap(), 6.0);
    }

    #[test]
    fn reversed_arguments_geometric() {
        // h_2(1, 4) on {2^k}: signed recursion gives 7
        let ts = TimeScale::geometric(2.0, 1.0).unwrap();
        assert_eq!(h_poly(&ts, 2, 1.0, 4.0).unwrap(), 7.0);
    }

    #[test]
    fn second_arg_table_matches_first_arg() {
        let ts = TimeScale::explicit(vec![0.0, 0.5, 1.7, 2.0, 3.1, 4.0, 5.5]).unwrap();
        let w = GridWindow::new(ts.clone(), 0, 6).unwrap();
        let t_idx = 4;
        let psi = MonomialTable::second_arg(&w, t_idx, 3).unwrap();
        for s_idx in 0..=6 {
            for k in 0..=3 {
                let direct = h_poly(&ts, k, w.point(t_idx), w.point(s_idx)).unwrap();
                let tabled = psi.value(k, s_idx).unwrap();
                assert!(
                    (direct - tabled).abs() <= 1e-12 * direct.abs().max(1.0),
                    "k={k} s={s_idx}: {direct} vs {tabled}"
                );
            }
        }
    }

    #[test]
    fn q_gamma_values() {
        assert_eq!(q_gamma(2.0, 1).unwrap(), 1.0);
        assert_eq!(q_gamma(2.0, 2).unwrap(), 1.0);
        assert_eq!(q_gamma(2.0, 3).unwrap(), 3.0);
        assert_eq!(q_gamma(2.0, 4).unwrap(), 21.0);
        assert!(q_gamma(2.0, 0).is_err());
    }

    #[test]
    fn closed_geometric_matches_recursion() {
        let q = 2.0;
        let ts = TimeScale::geometric(q, 1.0).unwrap();
        for k in 0..=5 {
            for (ti, si) in [(4, 0), (5, 2), (3, 3), (0, 4)] {
                let t = 2f64.powi(ti);
                let s = 2f64.powi(si);
                let rec = h_poly(&ts, k, t, s).unwrap();
                let closed = h_closed_geometric(q, k, t, s).unwrap();
                assert!(
                    (rec - closed).abs() <= 1e-9 * rec.abs().max(1.0),
                    "k={k} t={t} s={s}: {rec} vs {closed}"
                );
            }
        }
    }

    #[test]
    fn closed_uniform_matches_recursion() {
        let h = 0.5;
        let ts = TimeScale::uniform(h, 1.0).unwrap();
        for k in 0..=6 {
            for (ti, si) in [(9, 0), (7, 3), (2, 2), (0, 6)] {
                let t = 1.0 + h * ti as f64;
                let s = 1.0 + h * si as f64;
                let rec = h_poly(&ts, k, t, s).unwrap();
                let closed = h_closed_uniform(h, k, t, s);
                assert!(
                    (rec - closed).abs() <= 1e-9 * rec.abs().max(1.0),
                    "k={k} t={t} s={s}: {rec} vs {closed}"
                );
            }
        }
    }

    #[test]
    fn taylor_cubic_exact_on_z() {
        let f = GridFn::sample(z_window(0, 8), |t| t * t);
        let parts = taylor_eval(&f, 3, 0, 4).unwrap();
        assert_eq!(parts.sum_part, 16.0);
        assert_eq!(parts.remainder_part, 0.0);
    }

    #[test]
    fn taylor_needs_room_for_derivatives() {
        let f = GridFn::sample(z_window(0, 3), |t| t);
        assert!(taylor_eval(&f, 4, 0, 1).is_err());
    }

    #[test]
    fn convolution_identity_on_explicit_scale() {
        let ts = TimeScale::explicit(vec![0.0, 0.3, 1.0, 1.4, 2.9, 3.3, 4.0]).unwrap();
        let w = GridWindow::new(ts, 0, 6).unwrap();
        for k in 1..=3usize {
            for l in 0..=2usize {
                for (s, t) in [(0, 6), (1, 4), (5, 2), (3, 3)] {
                    let r = convolution_residual(&w, k, l, s, t).unwrap();
                    assert!(r <= 1e-10, "k={k} l={l} s={s} t={t}: residual {r}");
                }
            }
        }
    }

    #[test]
    fn lemma_suite_on_geometric_example() {
        let ts = TimeScale::geometric(2.0, 1.0).unwrap();
        let w = GridWindow::new(ts, 0, 5).unwrap();
        let report = check_lemma_inequalities(&w, 3, 3, 0).unwrap();
        assert!(report.min_normalized() >= -1e-12, "{report:?}");
        // frozen instance: (-1)^2 h_2(1,4) = 7 vs h_2(4,1) = 2, slack 5
        let ts2 = TimeScale::geometric(2.0, 1.0).unwrap();
        assert_eq!(h_poly(&ts2, 2, 1.0, 4.0).unwrap() - h_poly(&ts2, 2, 4.0, 1.0).unwrap(), 5.0);
    }

    #[test]
    fn limit_ratios_q2() {
        let r = limit_ratio_check(2.0, 1, LimitDirection::TLarge, 20).unwrap();
        assert!((r.ratio - 1.0).abs() <= 2e-2);
        let r = limit_ratio_check(2.0, 2, LimitDirection::TLarge, 20).unwrap();
        assert!((r.ratio - 1.0 / 3.0).abs() <= 2e-2 / 3.0, "{r:?}");
        let r = limit_ratio_check(2.0, 0, LimitDirection::TLarge, 5).unwrap();
        assert_eq!(r.ratio, 1.0);
        let r = limit_ratio_check(2.0, 1, LimitDirection::SLarge, 20).unwrap();
        assert!((r.ratio - -1.0).abs() <= 2e-2, "{r:?}");
    }

    #[test]
    fn exact_uniform_recursion_equals_closed() {
        let step = exact::rational(1, 3);
        for k in 0..=6 {
            for d in -12..=12 {
                assert_eq!(
                    exact::h_uniform_recursive(&step, k, d),
                    exact::h_uniform_closed(&step, k, d),
                    "k={k} d={d}"
                );
            }
        }
    }

    #[test]
    fn exact_geometric_recursion_equals_closed() {
        for (num, den) in [(2, 1), (3, 2), (5, 3)] {
            let q = BigRational::new(BigInt::from(num), BigInt::from(den));
            for k in 0..=4 {
                for (t, s) in [(5, 0), (4, 1), (0, 3), (2, 2), (-1, 2)] {
                    assert_eq!(
                        exact::h_geometric_recursive(&q, k, t, s),
                        exact::h_geometric_closed(&q, k, t, s),
                        "q={num}/{den} k={k} t={t} s={s}"
                    );
                }
            }
        }
    }

    proptest! {
        // delta derivative in t of h_k(., s) is h_{k-1}(., s); same for g
        // with the sigma shift
        #[test]
        fn derivative_relation(hstep in 0.1f64..2.0, n in 6usize..30, s_off in 0usize..5) {
            let ts = TimeScale::uniform(hstep, -2.0).unwrap();
            let w = GridWindow::new(ts, 0, n as i64).unwrap();
            let s_idx = s_off.min(n - 1) as i64;
            let table = MonomialTable::first_arg(&w, s_idx, 4, MonomialKind::H).unwrap();
            for k in 1..=4usize {
                let row: Vec<f64> = table.row(k).unwrap().to_vec();
                let f = GridFn::new(w.clone(), row).unwrap();
                let d = f.delta().unwrap();
                for idx in 0..n as i64 - 1 {
                    let expect = table.value(k - 1, idx).unwrap();
                    let got = d.at(idx).unwrap();
                    prop_assert!((got - expect).abs() <= 1e-9 * expect.abs().max(1.0));
                }
            }
        }

        // Property 1: h_k(., s) >= 0 and nondecreasing right of s;
        // (-1)^k h_k(., s) >= 0 left of s
        #[test]
        fn sign_and_monotonicity(q in 1.1f64..2.0, n in 6usize..24, s_off in 0usize..23) {
            let ts = TimeScale::geometric(q, 1.0).unwrap();
            let w = GridWindow::new(ts, 0, n as i64).unwrap();
            let s_idx = (s_off % n) as i64;
            let table = MonomialTable::first_arg(&w, s_idx, 4, MonomialKind::H).unwrap();
            for k in 0..=4usize {
                let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
                let mut last = None;
                for idx in 0..=n as i64 {
                    let v = table.value(k, idx).unwrap();
                    if idx >= s_idx {
                        prop_assert!(v >= -1e-12);
                        if let Some(prev) = last {
                            prop_assert!(v >= prev - 1e-12 * v.abs().max(1.0));
                        }
                        last = Some(v);
                    } else {
                        prop_assert!(sign * v >= -1e-12 * v.abs().max(1.0));
                    }
                }
            }
        }

        // Taylor identity on random explicit scales and random samples
        #[test]
        fn taylor_identity(gaps in proptest::collection::vec(0.3f64..1.7, 8..24),
                           vals in proptest::collection::vec(-4.0f64..4.0, 24),
                           n in 1usize..5, s_off in 0usize..8) {
            let mut pts = vec![0.0];
            for g in &gaps { pts.push(pts.last().unwrap() + g); }
            let count = pts.len();
            let ts = TimeScale::explicit(pts).unwrap();
            let w = GridWindow::new(ts, 0, count as i64 - 1).unwrap();
            let f = GridFn::new(w, vals[..count].to_vec()).unwrap();
            let s_idx = (s_off % (count - n)) as i64;
            for t_idx in 0..=(count - 1 - n) as i64 {
                let parts = taylor_eval(&f, n, s_idx, t_idx).unwrap();
                let ft = f.at(t_idx).unwrap();
                let denom = ft.abs().max(parts.sum_part.abs())
                    .max(parts.remainder_part.abs()).max(1.0);
                prop_assert!((parts.value - ft).abs() <= 1e-10 * denom,
                    "t={t_idx} s={s_idx} n={n}: {} vs {ft}", parts.value);
            }
        }

        // float recursion agrees with the exact rational path on uniform grids
        #[test]
        fn float_matches_exact_uniform(num in 1i64..8, den in 1i64..8,
                                       k in 0usize..6, d in -15i64..15) {
            let step = exact::rational(num, den);
            let hf = num as f64 / den as f64;
            let exact_v = exact::h_uniform_recursive(&step, k, d);
            let approx = num_traits::ToPrimitive::to_f64(&exact_v).unwrap();
            let ts = TimeScale::uniform(hf, 0.0).unwrap();
            let t = hf * d as f64;
            let float_v = h_poly(&ts, k, t, 0.0).unwrap();
            prop_assert!((float_v - approx).abs() <= 1e-9 * approx.abs().max(1.0));
        }
    }
}
