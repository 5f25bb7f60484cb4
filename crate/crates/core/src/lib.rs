pub mod config;
pub mod dispersion;
pub mod error;
pub mod io;
pub mod kernel;
pub mod normalform;
pub mod quad;
pub mod reduction;
pub mod spectral;
pub mod symbols;
pub mod trigcalc;
pub mod verify;
pub mod waves;
