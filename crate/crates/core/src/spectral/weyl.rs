use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::RwLock;

use num_complex::Complex64 as C64;

use super::{delta_from_spectrum, Family, Spectrum, TailModel};
use crate::error::{Error, Result};
use crate::operator::OperatorConfig;
use crate::solver::{pole_check, Discretization, SpectralPoint, DEFAULT_GRID};

/// Grid selection for forward solves at a given `λ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridPolicy {
    pub base: usize,
    /// Upper bound on `|ρ|·h`; `None` keeps `base` for every `λ`.
    pub max_phase_step: Option<f64>,
}

impl Default for GridPolicy {
    fn default() -> Self {
        Self {
            base: DEFAULT_GRID,
            max_phase_step: Some(0.05),
        }
    }
}

impl GridPolicy {
    pub fn fixed(n: usize) -> Self {
        Self {
            base: n,
            max_phase_step: None,
        }
    }

    /// Even grid size for `λ`.
    pub fn intervals(&self, lambda: C64) -> usize {
        let mut n = self.base;
        if let Some(step) = self.max_phase_step {
            let rho = lambda.norm().sqrt();
            n = n.max((rho * PI / step).ceil() as usize);
        }
        n + n % 2
    }
}

#[derive(Debug, Clone)]
pub enum WeylBackend {
    /// `N = −C(π,λ)/S(π,λ)` from the initial-value solver.
    Forward {
        config: OperatorConfig,
        grid: GridPolicy,
    },
    /// `N = −Δ₂/Δ₁` with both characteristic functions rebuilt from spectra.
    Product {
        dirichlet: Spectrum,
        neumann: Spectrum,
        n_prod: usize,
        tail: TailModel,
    },
    /// Tabulated `(λ, N)` pairs; lookups off the table are errors.
    Table { samples: Vec<(C64, C64)> },
}

/// The Weyl-type function `N(λ) = Φ′(0, λ)` behind a memo keyed by `λ`.
///
/// The memo is a plain read-write lock: a concurrent reader either misses and
/// computes, or sees a value that was fully written.
#[derive(Debug)]
pub struct WeylFunction {
    backend: WeylBackend,
    cache: RwLock<HashMap<(u64, u64), C64>>,
}

impl Clone for WeylFunction {
    fn clone(&self) -> Self {
        Self::new(self.backend.clone())
    }
}

const TABLE_MATCH: f64 = 1e-9;

impl WeylFunction {
    pub fn new(backend: WeylBackend) -> Self {
        Self {
            backend,
            cache: RwLock::new(HashMap::new()),
        }
    }

    pub fn forward(config: OperatorConfig) -> Self {
        Self::new(WeylBackend::Forward {
            config,
            grid: GridPolicy::default(),
        })
    }

    pub fn forward_with(config: OperatorConfig, grid: GridPolicy) -> Self {
        Self::new(WeylBackend::Forward { config, grid })
    }

    pub fn from_spectra(dirichlet: Spectrum, neumann: Spectrum, n_prod: usize, tail: TailModel) -> Result<Self> {
        if dirichlet.family != Family::Dirichlet || neumann.family != Family::Neumann {
            return Err(Error::InvalidArgument(
                "product backend needs one k = 1 and one k = 2 spectrum".into(),
            ));
        }
        Ok(Self::new(WeylBackend::Product {
            dirichlet,
            neumann,
            n_prod,
            tail,
        }))
    }

    pub fn from_table(samples: Vec<(C64, C64)>) -> Self {
        Self::new(WeylBackend::Table { samples })
    }

    pub fn backend(&self) -> &WeylBackend {
        &self.backend
    }

    /// Relative error level of returned values, used to decide how far up
    /// the sector ray a gap `N − Ñ` is still resolvable.
    ///
    /// Past the stored eigenvalues both products use `cₙ² + ω/π`; a mismatch
    /// `δω` between the two families' estimates leaves a relative error of
    /// about `δω/(π·n_max)` in `N`.
    pub fn relative_noise(&self) -> f64 {
        match &self.backend {
            WeylBackend::Forward { .. } => 64.0 * f64::EPSILON,
            WeylBackend::Product {
                dirichlet, neumann, ..
            } => {
                let omega_gap = match (dirichlet.omega_hint, neumann.omega_hint) {
                    (Some(a), Some(b)) => (a - b).abs(),
                    _ => 0.0,
                };
                let n_max = dirichlet.len().min(neumann.len()).max(1) as f64;
                256.0 * f64::EPSILON + omega_gap / (PI * n_max)
            }
            // Tables are written with 12 significant digits.
            WeylBackend::Table { .. } => 1e-12,
        }
    }

    pub fn eval(&self, lambda: C64) -> Result<C64> {
        let key = (lambda.re.to_bits(), lambda.im.to_bits());
        if let Some(v) = self.cache.read().expect("weyl cache poisoned").get(&key) {
            return Ok(*v);
        }
        let v = self.compute(lambda)?;
        self.cache
            .write()
            .expect("weyl cache poisoned")
            .insert(key, v);
        Ok(v)
    }

    fn compute(&self, lambda: C64) -> Result<C64> {
        match &self.backend {
            WeylBackend::Forward { config, grid } => {
                forward_weyl(config, lambda, grid.intervals(lambda))
            }
            WeylBackend::Product {
                dirichlet,
                neumann,
                n_prod,
                tail,
            } => {
                let d1 = delta_from_spectrum(dirichlet, lambda, *n_prod, *tail)?.value;
                pole_check(lambda, d1)?;
                let d2 = delta_from_spectrum(neumann, lambda, *n_prod, *tail)?.value;
                Ok(-d2 / d1)
            }
            WeylBackend::Table { samples } => samples
                .iter()
                .find(|(l, _)| (l - lambda).norm() <= TABLE_MATCH * lambda.norm().max(1.0))
                .map(|(_, n)| *n)
                .ok_or(Error::NotOnLadder { lambda }),
        }
    }
}

pub(crate) fn forward_weyl(config: &OperatorConfig, lambda: C64, n: usize) -> Result<C64> {
    let d = Discretization::new(config, n)?;
    let one = C64::new(1.0, 0.0);
    let zero = C64::new(0.0, 0.0);
    let (delta2, _) = d.forward_end(lambda, one, zero)?;
    let (delta1, _) = d.forward_end(lambda, zero, one)?;
    pole_check(lambda, delta1)?;
    Ok(-delta2 / delta1)
}

/// Backend-dispatched `N(λ)`.
pub fn weyl_eval(w: &WeylFunction, lambda: C64) -> Result<C64> {
    w.eval(lambda)
}

#[allow(dead_code)]
fn _assert_sync() {
    fn is<T: Send + Sync>() {}
    is::<WeylFunction>();
    is::<SpectralPoint>();
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::{Kernel, Potential};

    fn re(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    #[test]
    fn forward_zero_potential() {
        let w = WeylFunction::forward(OperatorConfig::zero());
        let n = w.eval(re(-1.0)).unwrap();
        assert!((n - re(-1.0 / PI.tanh())).norm() < 1e-9);
        assert!(matches!(w.eval(re(1.0)), Err(Error::WeylPole { .. })));
        // Cached value is returned bit-for-bit.
        assert_eq!(w.eval(re(-1.0)).unwrap(), n);
    }

    #[test]
    fn leading_asymptotics_on_negative_axis() {
        let w = WeylFunction::forward(OperatorConfig::zero());
        for s in [10.0, 40.0, 90.0] {
            let rho = C64::new(0.0, s);
            let ratio = w.eval(re(-s * s)).unwrap() / (rho * C64::new(0.0, 1.0));
            assert!((ratio - re(1.0)).norm() < 1e-6, "s = {s}: {ratio}");
        }
    }

    #[test]
    fn product_backend_matches_closed_form() {
        // Truncation-error oracle: doubling n_prod must not move the value.
        let make = |n| {
            WeylFunction::from_spectra(
                Spectrum::constant_potential(Family::Dirichlet, n, 0.0),
                Spectrum::constant_potential(Family::Neumann, n, 0.0),
                n,
                TailModel::ZeroPotential,
            )
            .unwrap()
        };
        let want = -1.0 / PI.tanh();
        let a = make(2000).eval(re(-1.0)).unwrap();
        let b = make(4000).eval(re(-1.0)).unwrap();
        assert!(((a.re - want) / want).abs() < 1e-3);
        assert!((a - b).norm() < 1e-10);
        assert!(matches!(make(100).eval(re(4.0)), Err(Error::WeylPole { .. })));
    }

    #[test]
    fn table_backend_refuses_off_table_points() {
        let w = WeylFunction::from_table(vec![(re(-4.0), re(-2.0))]);
        assert_eq!(w.eval(re(-4.0 + 1e-12)).unwrap(), re(-2.0));
        assert!(matches!(w.eval(re(-4.1)), Err(Error::NotOnLadder { .. })));
    }

    #[test]
    fn grid_policy_resolves_large_rho() {
        let g = GridPolicy::default();
        assert_eq!(g.intervals(re(-1.0)), 2000);
        assert!(g.intervals(re(-90.0 * 90.0)) as f64 * 0.05 >= 90.0 * PI);
        assert_eq!(GridPolicy::fixed(333).intervals(re(-1e4)), 334);
        let _ = Potential::zero();
        let _ = Kernel::Zero;
    }
}
