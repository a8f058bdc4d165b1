//! Rovibrational structure and spectroscopy toolkit for diatomic molecules.
//!
//! Computes bound levels of user-supplied potential curves (Numerov/Cooley),
//! Franck–Condon factors and Einstein A decay tables with rotational branch
//! rules, thermal photoassociation lineshapes with temperature fits,
//! depletion/REMPI spectrum synthesis and fitting, and molecule-production
//! rate bookkeeping.

pub mod error;
pub mod lineshape;
pub mod math;
pub mod potential;
pub mod fit;
pub mod radial;
pub mod rates;
pub mod report;
pub mod spectra;
pub mod spectrum;
pub mod transition;
pub mod units;

pub use error::{Error, Result};
