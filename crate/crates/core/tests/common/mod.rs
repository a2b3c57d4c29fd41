//! Helpers shared between integration-test targets. Each target
//! compiles its own copy, so not every item is used everywhere.
#![allow(dead_code)]

pub mod gen;
pub mod grad;
pub mod identities;
pub mod oracle;
