pub mod dataset;
pub mod engine;
pub mod error;
pub mod eval;
pub mod forest;
pub mod rng;
pub mod sensitivity;
pub mod datagen;
pub mod io;
pub mod cli;
