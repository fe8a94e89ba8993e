//! Bounded finite-time feedback for a chain of integrators: exact synthesis of
//! the quadratic form and gains, the implicit time function `Theta`, closed-loop
//! simulation, and a closed-form reference for three dimensions.

pub mod cli;
pub mod controller;
pub mod dd;
pub mod error;
pub mod exact;
pub mod oracle3;
pub mod simulate;
pub mod synthesis;
pub mod theta;
