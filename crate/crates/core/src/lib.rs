//! Exact solver and verifier for cautious reasoning in finite sequential games.

pub mod beliefs;
pub mod best_reply;
pub mod dominance;
pub mod game_core;
pub mod game_dsl;
pub mod hyperreal;
pub mod layers;
pub mod procedures;
pub mod random;
pub mod report;
pub mod shrink;
