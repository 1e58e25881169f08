pub mod error;
pub mod exactla;

pub use error::{Error, Result};
pub mod groups;
pub mod gring;
pub mod gmodule;
pub mod builders;
pub mod formulas;
pub mod synth;
pub mod cli;
