//! Computational tools for transverse-free plane curves over finite fields.

pub mod curve;
pub mod density;
pub mod exec;
pub mod forms;
pub mod gf;
pub mod levi;
pub mod pg2;
pub mod poly;
pub mod precise;
pub mod synth;
