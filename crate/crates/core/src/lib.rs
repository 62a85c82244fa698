//! Cache-conscious FM-index variants for count queries.

pub mod aligned;
pub mod cli;
pub mod dense_code;
pub mod dummy3;
pub mod fm;
pub mod hash_boost;
pub mod hwt;
pub mod index;
pub mod index_io;
pub mod rank;
pub mod suffix;
pub mod text;
