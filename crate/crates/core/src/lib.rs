pub mod hash;
pub mod smiles;
pub mod descriptors;
pub mod dataset;
pub mod learners;
pub mod evalsuite;
pub mod ensemble;
pub mod synth;
pub mod cli;
