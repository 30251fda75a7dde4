//! Gallager's `E0` for binary-input channels under uniform inputs, its
//! evolution under the two one-step polarization transforms, and the extremal
//! role of the erasure and symmetric channels.
//!
//! The workhorse is the Z-representation ([`ZRep`]): the distribution of
//! `Z = |Δ(Y)|` determines `E0(ρ, W)` for every `ρ` at once, and transforms
//! of channel pairs become simple operations on pairs of distributions.
//!
//! ```
//! use polar_extrema::{make_bec, z_rep, Rho, transform};
//!
//! let rho = Rho::new(1.0).unwrap();
//! let w = make_bec(0.5).unwrap();
//! let rep = z_rep(&w);
//! let minus = transform::e0_minus_formula(rho, &rep, &rep);
//! assert!((minus - 0.192_645_077_942_395_9).abs() < 1e-12);
//! ```

pub mod channel;
pub mod error;
pub mod extremal;
pub mod lemma_lab;
pub mod numeric;
pub mod par;
pub mod polar_sim;
pub mod random;
pub mod transform;

pub use channel::{
    bhattacharyya, capacity, e0_direct, e0_from_zrep, g, make_bec, make_bsc, q_delta, z_rep,
    z_rho, Atom, Bdmc, ChannelStats, Likelihoods, QDelta, Rho, ZRep, RHO_MAX,
};
pub use error::{Error, Result};
pub use par::Exec;
