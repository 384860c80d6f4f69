//! Certificates of infinitude for pro-p towers of number fields.
//!
//! The crate evaluates Golod–Shafarevich series in exact rational
//! arithmetic, locates negativity witnesses, computes Zassenhaus depths of
//! free-group words through the Magnus embedding, applies
//! class-field-theoretic rank bookkeeping, and produces certified
//! root-discriminant bounds with directed rational interval arithmetic.
//! The [`casebook`] module replays a fixture set of worked examples end to
//! end and reports pass/fail per expectation.

pub mod casebook;
pub mod cft;
pub mod magnus;
pub mod rat;
pub mod rdbound;
pub mod series;
