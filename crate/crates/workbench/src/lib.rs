//! Command-line and HTTP front ends for the QKD variability workbench.

pub mod api;
pub mod cli;
pub mod files;
pub mod table;
