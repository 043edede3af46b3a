pub mod diagnostics;
pub mod harness;
pub mod linalg;
pub mod models;
pub mod resonance;
pub mod rotation;
