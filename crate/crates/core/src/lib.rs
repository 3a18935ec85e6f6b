//! Active-defense engagement simulator: linearized three-player pursuit–evasion
//! dynamics, zero-effort-miss guidance laws, a TD3 trainer for the cooperative
//! target/defender pair and a Monte-Carlo evaluation harness.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod dynamics;
pub mod env;
pub mod error;
pub mod eval;
pub mod guidance;
pub mod nn;
pub mod par;
pub mod seeding;
pub mod td3;
pub mod zem;
