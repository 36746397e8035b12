//! One module per subcommand.

pub mod catalog;
pub mod check;
pub mod conformal;
pub mod solve;
pub mod trace;
