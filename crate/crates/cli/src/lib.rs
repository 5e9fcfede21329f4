//! File formats used by the `d4` binary: record tables, specification
//! files and the class group cache.

pub mod cache;
pub mod table;
