//! Effective capacity of a cognitive-radio secondary link that listens to the
//! primary user's ARQ feedback, and the primary user's packet success rate,
//! under the double (DPL) and triple (TPL) power-level access schemes.
//!
//! The analytical route builds a 10-state Markov chain over sensing outcome,
//! secondary ON/OFF channel state and NACK access, then reads the effective
//! capacity off the spectral radius of `Φ(−θ)R`. The [`sim`] module provides
//! independent Monte Carlo estimates of every analytical quantity.
//!
//! ```
//! use cr_feedback_ec::{ec, params::{SchemeKind, SystemParams}, specfun};
//!
//! let params = SystemParams::table1().validate().unwrap();
//! let sensing = specfun::sensing_probs(&params).unwrap();
//! let tpl = ec::effective_capacity(&params, SchemeKind::Tpl, &sensing).unwrap();
//! let dpl = ec::effective_capacity(&params, SchemeKind::Dpl, &sensing).unwrap();
//! assert!(tpl.ec_bits_per_sec <= dpl.ec_bits_per_sec);
//! ```

pub mod chain;
pub mod ec;
pub mod error;
pub mod experiment;
pub mod outage;
pub mod params;
#[cfg(feature = "plot")]
mod plot;
pub mod sim;
pub mod specfun;

pub use error::{Error, Result};
