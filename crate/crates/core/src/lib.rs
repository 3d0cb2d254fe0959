//! Two-center Coulomb plus harmonic-oscillator eigenproblem in prolate
//! spheroidal coordinates.
//!
//! The crate solves the separated quasi-radial and quasi-angular equations
//! numerically by shooting ([`eigen`]), evaluates the large-separation
//! asymptotic expansions ([`asymptotics`]) and provides an independent 2D
//! finite-difference oracle ([`oracle`]). [`run`] and [`report`] back the
//! command-line front end.

// `!(x > 0.0)` is used on purpose so NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod asymptotics;
pub mod eigen;
pub mod error;
pub mod fixtures;
pub mod ode;
pub mod oracle;
pub mod params;
pub mod report;
pub mod run;
pub mod specfun;

pub use error::{Error, Result};
pub use params::{PhysicalConfig, QuantumNumbers, ScaledParams, SpheroidalPoint};

use serde::{Deserialize, Serialize};

/// Selects between the literal asymptotic formulas and corrected readings
/// consistent with the separated equations. The readings differ in the
/// `ln 2` factor of the radial coordinate series, the `[y]^{-1/2}`
/// prefactor and the radial etalon scaling.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FormulaReading {
    #[default]
    Literal,
    Corrected,
}

impl FormulaReading {
    pub fn as_str(&self) -> &'static str {
        match self {
            FormulaReading::Literal => "literal",
            FormulaReading::Corrected => "corrected",
        }
    }
}
