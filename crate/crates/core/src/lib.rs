//! Constructive duality between compact regular partially convex sets and
//! finite-rank free order unit modules, evaluated on a finite parameter grid.
//!
//! A set `K ⊆ R^{n+m}` is partially convex when every slice
//! `K_y = {x : (x, y) ∈ K}` is convex. This crate models such sets by rows
//! affine in `x` with polynomial coefficients in `y` (see [`geometry`]) and
//! provides:
//!
//! * separation of exterior points by partially affine polynomials and by
//!   continuous partially affine functions ([`separation`]),
//! * recovery of coefficient functions and Bernstein approximation of
//!   continuous partially affine functions ([`paff`]),
//! * grid-level checks of interior nonemptiness and hemicontinuity
//!   ([`regularity`]),
//! * the fiberwise order unit module of a set, its state space and the
//!   round trip between them ([`duality`]),
//! * matrix-level compression identities for a single `y` variable
//!   ([`gamma`]).
//!
//! All numerics run on a small dense simplex solver ([`lp`]).

pub mod cli;
pub mod duality;
pub mod error;
pub mod gamma;
pub mod geometry;
pub mod grid;
pub mod io;
pub mod lp;
pub mod paff;
pub mod poly;
pub mod regularity;
pub mod separation;

pub use error::{Error, Result};
