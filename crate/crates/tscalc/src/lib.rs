//! Numerical calculus on time scales.
//!
//! A time scale is a closed set of reals; here, the discrete kinds that show
//! up in difference and q-difference equations: uniform grids, geometric
//! grids, and explicit point lists. On top of the basic delta calculus this
//! crate builds the generalized monomials `h_k` and `g_k`, Kiguradze sign
//! classification for functions with semidefinite n-th delta derivative, a
//! Philos-type lower bound verifier, and oscillation criteria for
//! higher-order neutral delay dynamic equations
//!
//! ```text
//!     [x(t) + A(t) x(alpha(t))]^{Delta^n} + B(t) x(beta(t)) = 0,
//! ```
//!
//! together with an explicit stepper that integrates such equations forward
//! from seeded history.
//!
//! Everything is deterministic: randomized helpers take explicit seeds, and
//! all tolerances are documented constants.

pub mod calculus;
pub mod classify;
pub mod config;
pub mod expr;
pub mod harness;
pub mod monomials;
pub mod oscillation;
pub mod scale;
pub mod simulate;
pub mod trace_io;

pub use calculus::{CalcError, GridFn};
pub use classify::{KiguradzeProfile, PhilosReport};
pub use monomials::{MonomialKind, MonomialTable};
pub use oscillation::{
    Conclusion, ConclusionReport, CriterionReport, DivergenceReport, NeutralEquationSpec,
    RangeTag, ThresholdReport,
};
pub use scale::{GridWindow, ScaleError, TimeScale};
pub use simulate::{InitialData, SolutionTrace, Trend};
