pub mod cavity;
pub mod constants;
pub mod coupling;
pub mod eigen;
pub mod error;
pub mod feasibility;
pub mod loss;
pub mod lsq;
pub mod output;
pub mod perturbation;
pub mod quadrature;
pub mod transfer;

pub use error::{Error, Result};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/cavity-modes.md")]
    mod cavity_modes {}
    #[doc = include_str!("../../../book/src/membrane-perturbation.md")]
    mod membrane_perturbation {}
    #[doc = include_str!("../../../book/src/avoided-crossings.md")]
    mod avoided_crossings {}
    #[doc = include_str!("../../../book/src/losses.md")]
    mod losses {}
    #[doc = include_str!("../../../book/src/planar-oracle.md")]
    mod planar_oracle {}
    #[doc = include_str!("../../../book/src/feasibility.md")]
    mod feasibility {}
    #[doc = include_str!("../../../book/src/command-line.md")]
    mod command_line {}
}
