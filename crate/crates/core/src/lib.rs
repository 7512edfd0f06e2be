//! Exact collision evaluation between convex objects through a minimum scale.
//!
//! The body is dilated about a seed point until it just touches the obstacle; the
//! dilation factor `β` is the optimum of a linear program in `n + 1` variables, solved
//! in expected linear time by [`sdlp`]. `β > 1` means separated, `β < 1` colliding.
//! The tight constraints of that program give closed-form derivatives of `β` with respect
//! to the body's rigid motion ([`gradient`]), which [`trajopt`] uses to plan whole-body
//! trajectories.

pub mod error;
pub mod geometry;
pub mod gradient;
pub mod oracle;
pub mod scale;
pub mod sdlp;
pub mod trajopt;

pub use error::{Error, Result};
