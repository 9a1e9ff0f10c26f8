pub mod reconstruct;
pub mod simulate;
pub mod sweep;
