//! One-dimensional space-charge-region electrostatics.
//!
//! The voltage across a charged slab follows from the first moment of its
//! charge density,
//!
//! ```text
//! ∫ x ρ(x)/ε dx = V + x₂E(x₂) − x₁E(x₁),     V = u(x₂) − u(x₁)
//! ```
//!
//! which needs one integration where Poisson's equation needs two. The
//! [`charge_moment`] module implements the identity alongside an
//! independent double-integration route, and [`junction`] applies it to
//! depletion layers of semiconductor junctions.

// Negated comparisons are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod charge_moment;
pub mod constants;
pub mod junction;
pub mod numerics;
pub mod verify;
