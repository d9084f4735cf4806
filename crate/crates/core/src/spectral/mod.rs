//! Characteristic functions, spectra, the Weyl-type function and the checks
//! built on them.

mod checks;
mod eigen;
pub mod io;
mod product;
mod weyl;

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::operator::OperatorConfig;
use crate::solver::Discretization;

pub use checks::{
    green_identity_residual, green_identity_residual_with, sector_asymptotics_check,
    sector_asymptotics_check_with, verify_adjoint, verify_adjoint_with, AdjointReport,
    SectorReport, SectorRow, SectorTarget, SECTOR_RATE_BAND,
};
pub use eigen::{eigenvalues, eigenvalues_with, fit_omega, EigenOptions, OmegaFit, Spectrum};
pub use product::{delta_from_spectrum, ProductValue, TailModel};
pub use weyl::{weyl_eval, GridPolicy, WeylBackend, WeylFunction};

/// Boundary-condition family: `y^{(k−1)}(0) = y(π) = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Family {
    /// `k = 1`, zeros of `Δ₁ = S(π, λ)`.
    Dirichlet,
    /// `k = 2`, zeros of `Δ₂ = C(π, λ)`.
    Neumann,
}

impl Family {
    pub fn from_index(k: u8) -> Result<Self> {
        match k {
            1 => Ok(Family::Dirichlet),
            2 => Ok(Family::Neumann),
            _ => Err(Error::InvalidArgument(format!(
                "boundary family must be 1 or 2, got {k}"
            ))),
        }
    }

    pub fn index(self) -> u8 {
        match self {
            Family::Dirichlet => 1,
            Family::Neumann => 2,
        }
    }

    /// Zero-potential value of `√λₙ`: `n` or `n − 1/2`.
    pub fn center(self, n: usize) -> f64 {
        match self {
            Family::Dirichlet => n as f64,
            Family::Neumann => n as f64 - 0.5,
        }
    }
}

/// `Δ₁(λ) = S(π, λ)` or `Δ₂(λ) = C(π, λ)` on an `n`-interval grid.
pub fn char_delta(config: &OperatorConfig, family: Family, lambda: C64, n: usize) -> Result<C64> {
    CharFunction::plain(config, family, n)?.eval(lambda)
}

/// A characteristic function with its discretisation prepared once, optionally
/// Richardson-extrapolated from grids `n` and `2n` (`(16Δ_{2n} − Δ_n)/15`).
#[derive(Debug, Clone)]
pub struct CharFunction {
    family: Family,
    coarse: Discretization,
    fine: Option<Discretization>,
}

impl CharFunction {
    pub fn plain(config: &OperatorConfig, family: Family, n: usize) -> Result<Self> {
        Ok(Self {
            family,
            coarse: Discretization::new(config, n)?,
            fine: None,
        })
    }

    pub fn extrapolated(config: &OperatorConfig, family: Family, n: usize) -> Result<Self> {
        Ok(Self {
            family,
            coarse: Discretization::new(config, n)?,
            fine: Some(Discretization::new(config, 2 * n)?),
        })
    }

    pub fn family(&self) -> Family {
        self.family
    }

    fn on(&self, d: &Discretization, lambda: C64) -> Result<C64> {
        let one = C64::new(1.0, 0.0);
        let zero = C64::new(0.0, 0.0);
        let (y0, yp0) = match self.family {
            Family::Dirichlet => (zero, one),
            Family::Neumann => (one, zero),
        };
        Ok(d.forward_end(lambda, y0, yp0)?.0)
    }

    pub fn eval(&self, lambda: C64) -> Result<C64> {
        let coarse = self.on(&self.coarse, lambda)?;
        match &self.fine {
            None => Ok(coarse),
            Some(fine) => Ok((self.on(fine, lambda)? * 16.0 - coarse) / 15.0),
        }
    }

    pub fn eval_real(&self, lambda: f64) -> Result<f64> {
        Ok(self.eval(C64::new(lambda, 0.0))?.re)
    }
}
