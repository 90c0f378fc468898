//! Placeholder.
pub mod iso;
pub mod cbn;
pub mod cbv;
