//! Experiment harness: configuration, grid runs, result tables and
//! verification against expected population tables.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod experiment;
pub mod reference;
pub mod table;
pub mod verify;
