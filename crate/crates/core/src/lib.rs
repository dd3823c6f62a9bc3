pub mod algebraic_type;
pub mod cli;
pub mod constructions;
pub mod dsl;
pub mod expr;
pub mod forms;
pub mod invariants;
pub mod jet;
pub mod numerics;

#[cfg(test)]
mod testutil;
