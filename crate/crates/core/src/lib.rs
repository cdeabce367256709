//! Mass-action reaction networks: parsing, conservation laws, steady states and robustness certification.

pub mod conservation;
pub mod classifier;
pub mod fixtures;
pub mod linalg;
pub mod model;
pub mod numeric;
pub mod parser;
pub mod random;
pub mod rational;
pub mod report;
pub mod symbolic;
