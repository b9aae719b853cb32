//! Expression parsing and command dispatch behind the `mlfrac` binary.

pub mod expr;
pub mod run;
