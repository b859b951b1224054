//! Constructors for ground-truth classification instances.
//!
//! Both constructors prescribe the derivative data and integrate upward, so
//! the true `m` is known independently of the scanner:
//!
//! * [`kiguradze_instance`] draws random strictly negative samples for
//!   `f^{Delta^n}` and picks each integration constant with a sign margin,
//!   forcing the target pattern to hold on the whole window.
//! * [`geometric_tail_instance`] uses closed-form geometric tails
//!   `+-(1-r)^k r^tau` for the orders above `m`, so the intermediate
//!   derivatives decay at a known rate (used by the decay checks) and `f`
//!   itself settles to a positive constant when `m = 0`.

use crate::calculus::GridFn;
use crate::scale::GridWindow;
use rand::Rng;

/// A constructed function with its ground-truth classification.
#[derive(Debug, Clone)]
pub struct Constructed {
    pub f: GridFn,
    pub n: usize,
    pub m: usize,
}

/// Integrate `d` upward over the window starting at value 0:
/// `I[i+1] = I[i] + mu(lo+i) * d[i]`.
fn cumulative(window: &GridWindow, d: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(d.len() + 1);
    out.push(0.0);
    for (i, &v) in d.iter().enumerate() {
        out.push(out[i] + window.mu(window.idx_at(i)) * v);
    }
    out
}

/// Build `f` on `window` whose Kiguradze classification at order `n` is
/// exactly `m` (requires `m < n`, `n - m` odd, window length > n). The sign
/// pattern holds on the *whole* window by construction.
pub fn kiguradze_instance(
    window: &GridWindow,
    n: usize,
    m: usize,
    rng: &mut impl Rng,
) -> Constructed {
    assert!(m < n && (n - m) % 2 == 1, "need m < n with n - m odd");
    assert!(window.len() > n, "window too short for order {n}");
    let mut d: Vec<f64> = (0..window.len() - n)
        .map(|_| -rng.gen_range(0.01..1.0))
        .collect();
    for k in (0..n).rev() {
        let integral = cumulative(window, &d);
        let lo = integral.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = integral.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let span = (hi - lo).max(1e-2);
        let delta = rng.gen_range(0.05..0.5) * span;
        let c = if k < m {
            // orders below m are positive increasing; integral starts at 0
            delta
        } else if (m + k) % 2 == 0 {
            -lo + delta
        } else {
            -hi - delta
        };
        d = integral.into_iter().map(|v| c + v).collect();
    }
    Constructed {
        f: GridFn::new(window.clone(), d).expect("constructed length matches window"),
        n,
        m,
    }
}

/// Build `f` on a *unit-step* window with closed-form geometric tails: for
/// orders `k` in `(m, n]`, `f^{Delta^k}(tau) = (-1)^{n-1-k} (1-r)^k r^tau`
/// (tau = offset into the window), while `f^{Delta^m}` settles to the
/// positive constant `c_m`. Requires `0 < r < 1`; the unit step makes the
/// delta of `r^tau` exactly `-(1-r) r^tau`.
pub fn geometric_tail_instance(
    window: &GridWindow,
    n: usize,
    m: usize,
    r: f64,
    c_m: f64,
    rng: &mut impl Rng,
) -> Constructed {
    assert!(m < n && (n - m) % 2 == 1, "need m < n with n - m odd");
    assert!(r > 0.0 && r < 1.0, "decay rate must lie in (0, 1)");
    assert!(c_m > 0.0);
    let len = window.len();
    debug_assert!(
        (window.mu(window.lo()) - 1.0).abs() < 1e-12,
        "geometric tails need a unit-step grid"
    );
    // f^{Delta^m}(tau) = c_m + (1-r)^m r^tau  (sign (-1)^(n-1-m) = +1)
    let mut d: Vec<f64> = (0..len - m)
        .map(|tau| c_m + (1.0 - r).powi(m as i32) * r.powi(tau as i32))
        .collect();
    for _ in (0..m).rev() {
        let integral = cumulative(window, &d);
        let delta = rng.gen_range(0.1..1.0);
        d = integral.into_iter().map(|v| delta + v).collect();
    }
    Constructed {
        f: GridFn::new(window.clone(), d).expect("constructed length matches window"),
        n,
        m,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classify::{kiguradze_profile, verify_philos, DEFAULT_STRICT_TOL};
    use crate::scale::{GridWindow, TimeScale};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn margin_instances_classify_to_target() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for n in 1..=5usize {
            for m in (0..n).filter(|m| (n - m) % 2 == 1) {
                let ts = TimeScale::uniform(0.5, 1.0).unwrap();
                let w = GridWindow::new(ts, 0, 39).unwrap();
                let c = kiguradze_instance(&w, n, m, &mut rng);
                let p = kiguradze_profile(&c.f, n, DEFAULT_STRICT_TOL).unwrap();
                assert_eq!(p.m, m, "n={n} m={m}");
                assert_eq!(p.s_index, 0, "pattern holds from the start");
            }
        }
    }

    #[test]
    fn margin_instance_on_geometric_scale() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let ts = TimeScale::geometric(1.3, 1.0).unwrap();
        let w = GridWindow::new(ts, 0, 47).unwrap();
        let c = kiguradze_instance(&w, 3, 2, &mut rng);
        let p = kiguradze_profile(&c.f, 3, DEFAULT_STRICT_TOL).unwrap();
        assert_eq!(p.m, 2);
        let r = verify_philos(&c.f, 3, &p).unwrap();
        assert!(r.worst_normalized >= -1e-10, "{r:?}");
    }

    #[test]
    fn geometric_tail_shapes() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let ts = TimeScale::uniform(1.0, 0.0).unwrap();
        let w = GridWindow::new(ts, 0, 63).unwrap();
        let c = geometric_tail_instance(&w, 3, 0, 0.9, 2.0, &mut rng);
        let p = kiguradze_profile(&c.f, 3, DEFAULT_STRICT_TOL).unwrap();
        assert_eq!(p.m, 0);
        // f decreases to c_m
        let vals = c.f.values();
        assert!(vals[63] > 2.0 && vals[63] < 2.1);
        assert!(vals.windows(2).all(|v| v[1] < v[0]));
    }

    #[test]
    fn philos_fails_for_m0_profiles() {
        // the bound f >= h_{n-1}(t,s) f^{Delta^{n-1}}(t) genuinely needs
        // m >= 1: an m = 0 instance violates it mid-window
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let ts = TimeScale::uniform(1.0, 0.0).unwrap();
        let w = GridWindow::new(ts, 0, 63).unwrap();
        // small limit constant: h_2(t,0) * f'' peaks near 0.23 around t = 20
        // while f has already decayed toward 0.01
        let c = geometric_tail_instance(&w, 3, 0, 0.9, 0.01, &mut rng);
        let p = kiguradze_profile(&c.f, 3, DEFAULT_STRICT_TOL).unwrap();
        let r = verify_philos(&c.f, 3, &p).unwrap();
        assert!(r.worst_slack < 0.0, "{r:?}");
    }
}
