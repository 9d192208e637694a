pub mod apportion;
pub mod error;
pub mod harness;
pub mod plot;
pub mod scenarios;
pub mod swing;
pub mod validate;
