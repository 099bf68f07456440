//! Command-line front end for the `lp2dt` engine.

pub mod output;
pub mod selftest;
