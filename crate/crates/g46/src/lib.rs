//! Exact arithmetic for level-one Eisenstein series.
//!
//! The crate expands the zeta-normalized series G_k as polynomials in G_4 and
//! G_6 using lacunary recurrences, analyzes the 2-adic valuations of the
//! resulting rational coefficients, and builds Faber polynomials in the
//! modular j-function together with Newton-polygon (Dumas) irreducibility
//! certificates. Everything is computed over exact big rationals; there is no
//! floating point anywhere.
//!
//! Layout:
//! - [`arith`]: big-rational substrate, binomials, Bernoulli numbers, v_2.
//! - [`dyadic`]: binary digit sums, carries, and per-weight valuation targets.
//! - [`expansion`]: the recurrence engine and the weight-indexed cache.
//! - [`qseries`]: exact q-expansions (E_k, Delta, j) used as an independent
//!   verification channel for every expansion.
//! - [`checks`]: scanners for the minimum-valuation formula, the power-of-two
//!   uniqueness property, and the witness-level property.
//! - [`faber`]: Faber polynomial construction (closed form and q-elimination)
//!   plus dyadic combinations.
//! - [`newton`]: 2-adic Newton polygons and the Dumas certificate.
//! - [`formats`]: the text exchange formats (expansion cache, polynomial
//!   files, combination spec files).
//! - [`par`]: the switch between rayon data parallelism and plain loops.
//! - [`report`]: serializable report envelope shared with the CLI.

pub mod arith;
pub mod checks;
pub mod dyadic;
pub mod error;
pub mod expansion;
pub mod faber;
pub mod formats;
pub mod newton;
pub mod par;
pub mod qseries;
pub mod report;

pub use arith::{Int, Rat, V2};
pub use error::{Error, Result};
