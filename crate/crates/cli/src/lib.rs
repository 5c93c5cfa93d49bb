//! Command implementations behind the `aoi` binary: closed-form solving,
//! simulation and the figure/table presets, with CSV output.

pub mod commands;
pub mod presets;
pub mod report;

pub use report::{format_number, Cell, CsvReport};
