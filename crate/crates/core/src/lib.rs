//! Balanced random quantum walks on `Z^d` and on the tree `T_{2d}`.
//!
//! The crate computes the disorder-averaged exponential moment
//! `E‖e^{α|X|/2} U_ω^n e⊗τ_0‖²` of a balanced random quantum walk in three
//! independent ways:
//!
//! * [`dynamics`]: exact sparse evolution of `U_ω(C)` and Monte-Carlo
//!   averaging over the random phases;
//! * [`paths`]: exhaustive path enumeration grouped by phase content, which
//!   gives the average exactly as a finite sum `S_n(α)`;
//! * [`polymer`] and [`correlation`]: lower bounds on `S_n(α)` from
//!   self-avoiding walks and single-path classes, their free energies,
//!   susceptibilities and correlation lengths.
//!
//! The guide in `book/` walks through each of these with runnable snippets.

pub mod coin;
pub mod correlation;
pub mod dynamics;
pub mod error;
pub mod graph;
pub mod paths;
pub mod polymer;

pub use coin::{make_fourier_coin, make_hadamard_coin, CoinSpec, SkeletonMatrix};
pub use error::{Error, Result};
pub use graph::{Graph, GraphKind, Letter, NormKind, Vertex};

/// Default cap on the number of paths an exhaustive enumeration may visit.
pub const DEFAULT_ENUMERATION_BUDGET: u128 = 100_000_000;

/// Fails with [`Error::BudgetExceeded`] when `required > budget`.
pub(crate) fn check_budget(what: &'static str, required: u128, budget: u128) -> Result<()> {
    if required > budget {
        Err(Error::BudgetExceeded { what, required, budget })
    } else {
        Ok(())
    }
}

/// `base^exp`, saturating.
pub(crate) fn pow_u128(base: usize, exp: usize) -> u128 {
    (base as u128).saturating_pow(exp.min(u32::MAX as usize) as u32)
}

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../README.md")]
    mod readme {}
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/graphs-and-coins.md")]
    mod graphs_and_coins {}
    #[doc = include_str!("../../../book/src/dynamics.md")]
    mod dynamics {}
    #[doc = include_str!("../../../book/src/phase-content.md")]
    mod phase_content {}
    #[doc = include_str!("../../../book/src/polymers.md")]
    mod polymers {}
    #[doc = include_str!("../../../book/src/correlation.md")]
    mod correlation {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
