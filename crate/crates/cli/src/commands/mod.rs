pub mod chain;
pub mod norm;
pub mod rearrange;
pub mod stability;
