pub mod cli;
pub mod connection;
pub mod error;
pub mod expr;
pub mod geometry;
pub mod jcalc;
pub mod jet;
pub mod scalar;
pub mod verify;
