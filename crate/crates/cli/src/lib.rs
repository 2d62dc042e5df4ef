//! Library surface of the apl command-line front end: the command tree,
//! report formatting, and the golden-value store.

pub mod app;
pub mod fmt;
pub mod golden;

pub use app::run;
