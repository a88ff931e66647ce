//! File formats, verification checks and run orchestration for the
//! contact-goal toolkit. The algorithmic stack lives in the core crate; this
//! one owns everything that touches the filesystem.

pub mod check;
pub mod formats;
pub mod run;
