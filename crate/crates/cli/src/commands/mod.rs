pub mod dataset;
pub mod pipeline;
pub mod splits;
