//! Recovery of the Taylor coefficients `q_k = q⁽ᵏ⁾(0)` of an analytic
//! potential from the Weyl-type function, for a kernel `M` known in advance.
//!
//! For a model `q̃` sharing `q_0 … q_{k−1}` with the unknown potential,
//!
//! ```text
//! q̂_k = −lim (−2iρ)^{k+1} (N − Ñ)(ρ²),   ρ → ∞ inside arg ρ ∈ [δ, π−δ].
//! ```
//!
//! The limit is taken numerically on a geometric ladder of moduli along one
//! ray: `g_j = −(−2iρ_j)^{k+1} N̂(ρ_j²)` is fitted by a short series in `1/s`
//! and the constant is accepted as `q̂_k`. Every factor `|2ρ|` multiplies the
//! noise of `N`, so each `k` only uses the part of the ladder where that noise
//! stays below a fixed budget. Errors already present in the accepted
//! `q_0 … q_{k−1}` reach `g` as terms growing like `(2s)^{k−i}`; their shapes
//! are known from `∂Ñ/∂q_i` and they are fitted jointly with the series.

mod lemma2;
mod report;

use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fit::least_squares_hermitian;
use crate::operator::{Kernel, OperatorConfig, Polynomial, Potential};
use crate::quadrature::simpson;
use crate::solver::{pole_check, Integrator, RungeKutta, SpectralPoint};
use crate::spectral::{GridPolicy, WeylBackend, WeylFunction};

pub use lemma2::{lemma2_probe, BoundedFn, Lemma2Probe, ProbeRow, ProbeTable};
pub use report::{coefficient_errors, report_json};

/// Largest `s·π` on a ladder; `e^{sπ}` must stay well inside double range.
pub const MAX_S_PI: f64 = 300.0;

/// `ρ_j = s_j e^{iθ}`.
#[derive(Debug, Clone, PartialEq)]
pub struct SectorRay {
    pub theta: f64,
    /// Margin with `θ ∈ [δ, π−δ]`.
    pub delta: f64,
    /// `|Im ρ| ≥ ε₀|ρ|` on the ray.
    pub eps0: f64,
    pub s_values: Vec<f64>,
}

impl Default for SectorRay {
    fn default() -> Self {
        Self::geometric(PI / 2.0, 8.0, 1.25, 15).expect("default ray is valid")
    }
}

impl SectorRay {
    pub fn new(theta: f64, s_values: Vec<f64>) -> Result<Self> {
        if !(theta > 0.0 && theta < PI) {
            return Err(Error::InvalidArgument(format!(
                "ray angle {theta} is outside (0, π)"
            )));
        }
        if s_values.is_empty()
            || !(s_values[0] > 0.0)
            || s_values.windows(2).any(|w| !(w[0] < w[1]))
        {
            return Err(Error::InvalidArgument(
                "ray moduli must be positive and strictly increasing".into(),
            ));
        }
        let delta = theta.min(PI - theta);
        Ok(Self {
            theta,
            delta,
            eps0: delta.sin(),
            s_values,
        })
    }

    /// `s_j = s0·ratio^j`, `j < count`, dropping moduli with `s·π > MAX_S_PI`.
    pub fn geometric(theta: f64, s0: f64, ratio: f64, count: usize) -> Result<Self> {
        if !(s0 > 0.0 && ratio > 1.0 && s0.is_finite() && ratio.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "ladder needs s0 > 0 and ratio > 1, got s0 = {s0}, ratio = {ratio}"
            )));
        }
        let s: Vec<f64> = (0..count)
            .map(|j| s0 * ratio.powi(j as i32))
            .take_while(|s| s * PI <= MAX_S_PI)
            .collect();
        Self::new(theta, s)
    }

    /// On `θ = π/2` the real part is exactly zero, so that `λ = −s²` stays real.
    pub fn rho(&self, j: usize) -> C64 {
        let s = self.s_values[j];
        if (self.theta - PI / 2.0).abs() <= f64::EPSILON {
            C64::new(0.0, s)
        } else {
            C64::from_polar(s, self.theta)
        }
    }

    pub fn lambdas(&self) -> Vec<C64> {
        (0..self.s_values.len())
            .map(|j| {
                let r = self.rho(j);
                r * r
            })
            .collect()
    }
}

/// `q(x) = Σ q_k x^k/k!` with the root-test radius of the available terms.
#[derive(Debug, Clone, PartialEq)]
pub struct TaylorPotential {
    pub coeffs: Vec<C64>,
    /// Error estimate per coefficient (zero when the value is exact).
    pub uncertainty: Vec<f64>,
    /// `None` stands for an infinite radius.
    pub radius_estimate: Option<f64>,
}

/// Coefficients below this modulus do not enter the radius estimate.
const NEGLIGIBLE_COEFF: f64 = 1e-12;

impl TaylorPotential {
    pub fn new(coeffs: Vec<C64>) -> Self {
        let uncertainty = vec![0.0; coeffs.len()];
        Self::with_uncertainty(coeffs, uncertainty)
    }

    pub fn with_uncertainty(coeffs: Vec<C64>, uncertainty: Vec<f64>) -> Self {
        assert_eq!(coeffs.len(), uncertainty.len());
        let radius_estimate = radius_estimate(&coeffs);
        Self {
            coeffs,
            uncertainty,
            radius_estimate,
        }
    }

    pub fn zero() -> Self {
        Self::new(Vec::new())
    }

    pub fn eval(&self, x: f64) -> C64 {
        self.polynomial().eval(x)
    }

    pub fn polynomial(&self) -> Polynomial {
        Polynomial::from_derivatives_at_zero(&self.coeffs)
    }

    pub fn to_potential(&self) -> Potential {
        Potential::Poly(self.polynomial())
    }
}

/// `R = 1 / max_{k ∈ upper half, k ≥ 1} (|q_k|/k!)^{1/k}`, a finite-`K`
/// surrogate for the `limsup`.
fn radius_estimate(coeffs: &[C64]) -> Option<f64> {
    let top = coeffs.len().checked_sub(1)?;
    let start = top.div_ceil(2).max(1);
    let mut factorial = 1.0;
    let mut worst: f64 = 0.0;
    for (k, q) in coeffs.iter().enumerate().skip(1) {
        factorial *= k as f64;
        if k >= start && q.norm() > NEGLIGIBLE_COEFF {
            worst = worst.max((q.norm() / factorial).powf(1.0 / k as f64));
        }
    }
    (worst > 0.0).then(|| 1.0 / worst)
}

/// Tuning of the ladder limit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExtractOptions {
    /// Largest tolerated contamination of `g_j`, from rounding in `N` and
    /// from the uncertainty of the coefficients already accepted.
    pub noise_budget: f64,
    /// Fewer usable ladder points than this ends the reconstruction.
    pub min_points: usize,
    /// Differences `|g_j − g_{j−1}|` above this (relative to `max(1, |g|)`)
    /// that do not shrink along the ladder signal divergence.
    pub divergence_floor: f64,
    /// Highest number of terms `c + a₁/s + … ` tried in the extrapolation.
    pub max_terms: usize,
    /// Fit the top half of the usable ladder only, with exactly three terms.
    pub fixed_three_term: bool,
}

impl Default for ExtractOptions {
    fn default() -> Self {
        Self {
            noise_budget: 1e-3,
            min_points: 4,
            divergence_floor: 1e-3,
            max_terms: 5,
            fixed_three_term: false,
        }
    }
}

/// One accepted coefficient with its provenance on the ladder.
#[derive(Debug, Clone, PartialEq)]
pub struct Extraction {
    pub k: usize,
    /// The estimate of `q̂_k`.
    pub value: C64,
    /// Max misfit of the extrapolation model over the fitted points.
    pub fit_residual: f64,
    /// Number of terms in the accepted extrapolation model.
    pub terms: usize,
    /// Error estimate: distance to the next lower-order extrapolation plus
    /// the fit residual.
    pub uncertainty: f64,
    /// Fitted error of each accepted lower coefficient (zero where it was
    /// not fitted).
    pub lower_corrections: Vec<C64>,
    /// Moduli that passed the noise screen.
    pub s_used: Vec<f64>,
    pub g: Vec<C64>,
}

fn model_config(model: &TaylorPotential, kernel: &Kernel) -> Result<OperatorConfig> {
    OperatorConfig::new(model.to_potential(), kernel.clone())
}

/// Grid used for model solves: the target's own policy when it is a forward
/// solver, so that discretisation errors cancel in `N − Ñ`.
fn model_grid(target: &WeylFunction) -> GridPolicy {
    match target.backend() {
        WeylBackend::Forward { grid, .. } => *grid,
        _ => GridPolicy::default(),
    }
}

/// `N̂(λ) = N(λ) − Ñ(λ)` with `Ñ` from the forward solver for the model and the
/// same kernel.
pub fn weyl_gap(
    target: &WeylFunction,
    model: &TaylorPotential,
    kernel: &Kernel,
    lambda: C64,
) -> Result<C64> {
    let cfg = model_config(model, kernel)?;
    let model_w = WeylFunction::forward_with(cfg, model_grid(target));
    Ok(target.eval(lambda)? - model_w.eval(lambda)?)
}

/// `|N̂(λ) + ∫₀^π q̂ Φ Φ̃* dx|` relative to `max(1, |N̂|)`, for two operators
/// that share their kernel.
pub fn gap_identity_residual(
    target: &OperatorConfig,
    model: &OperatorConfig,
    lambda: C64,
    n: usize,
) -> Result<f64> {
    gap_identity_residual_with(&RungeKutta, target, model, lambda, n)
}

pub fn gap_identity_residual_with(
    solver: &impl Integrator,
    target: &OperatorConfig,
    model: &OperatorConfig,
    lambda: C64,
    n: usize,
) -> Result<f64> {
    if target.kernel != model.kernel {
        return Err(Error::InvalidArgument(
            "the gap identity needs the same kernel for target and model".into(),
        ));
    }
    let lam = SpectralPoint::from_lambda(lambda);
    let one = C64::new(1.0, 0.0);
    let zero = C64::new(0.0, 0.0);
    let weyl = |cfg: &OperatorConfig| -> Result<(C64, crate::SolutionTrace, crate::SolutionTrace)> {
        let c = solver.forward(cfg, lam, one, zero, n)?;
        let s = solver.forward(cfg, lam, zero, one, n)?;
        let d1 = s.last().0;
        pole_check(lambda, d1)?;
        Ok((-c.last().0 / d1, c, s))
    };
    let (n_t, c, s) = weyl(target)?;
    let (n_m, _, _) = weyl(model)?;
    let phi = c.combine(one, &s, n_t);
    let s_star = solver.adjoint(model, lam, zero, -one, n)?;
    let z0 = s_star.first().0;
    pole_check(lambda, z0)?;
    let phi_star = s_star.scale(z0.inv());
    let integrand: Vec<C64> = (0..=n)
        .map(|i| {
            let x = phi.x(i);
            (target.potential.eval(x) - model.potential.eval(x)) * phi.values[i] * phi_star.values[i]
        })
        .collect();
    let integral = simpson(&integrand, phi.step());
    let gap = n_t - n_m;
    Ok((gap + integral).norm() / gap.norm().max(1.0))
}

/// Estimates `q̂_k` for a model that already carries the first `k` coefficients.
pub fn extract_coefficient(
    target: &WeylFunction,
    model: &TaylorPotential,
    kernel: &Kernel,
    k: usize,
    ray: &SectorRay,
    opts: &ExtractOptions,
) -> Result<Extraction> {
    let cfg = model_config(model, kernel)?;
    let model_w = WeylFunction::forward_with(cfg, model_grid(target));
    let lambdas = ray.lambdas();
    let n_target: Vec<C64> = lambdas
        .par_iter()
        .map(|&l| target.eval(l))
        .collect::<Result<_>>()?;
    let noise_level = target.relative_noise() + model_w.relative_noise();
    let kept: Vec<usize> = (0..lambdas.len())
        .filter(|&j| {
            let two_s = 2.0 * ray.s_values[j];
            noise_level * n_target[j].norm().max(1.0) * two_s.powi(k as i32 + 1) <= opts.noise_budget
        })
        .collect();
    if kept.len() < opts.min_points {
        return Err(Error::IllConditioned(format!(
            "only {} ladder points resolve coefficient {k} within the noise budget",
            kept.len()
        )));
    }
    let factor = |j: usize| -(C64::new(0.0, -2.0) * ray.rho(j)).powi(k as i32 + 1);
    let g: Vec<C64> = kept
        .par_iter()
        .map(|&j| Ok(factor(j) * (n_target[j] - model_w.eval(lambdas[j])?)))
        .collect::<Result<_>>()?;
    let s_used: Vec<f64> = kept.iter().map(|&j| ray.s_values[j]).collect();

    // An error d in an accepted q_i enters g as d·(−2iρ)^{k+1}·∂Ñ/∂q_i, which
    // grows like (2s)^{k−i}; such terms are fitted out rather than trusted.
    let s_top = 2.0 * s_used[s_used.len() - 1];
    let inherited: Vec<usize> = (0..k)
        .filter(|&i| model.uncertainty[i] * s_top.powi((k - i) as i32) > opts.noise_budget * 1e-2)
        .collect();
    let sensitivity: Vec<Vec<C64>> = inherited
        .iter()
        .map(|&i| -> Result<Vec<C64>> {
            let shifted = |h: f64| -> Result<WeylFunction> {
                let mut c = model.coeffs.clone();
                c[i] += h;
                let cfg = model_config(&TaylorPotential::new(c), kernel)?;
                Ok(WeylFunction::forward_with(cfg, model_grid(target)))
            };
            let (up, down) = (shifted(SENSITIVITY_STEP)?, shifted(-SENSITIVITY_STEP)?);
            kept.par_iter()
                .map(|&j| {
                    let d = (up.eval(lambdas[j])? - down.eval(lambdas[j])?) / (2.0 * SENSITIVITY_STEP);
                    Ok(factor(j) * d)
                })
                .collect()
        })
        .collect::<Result<_>>()?;
    let fit = extrapolate(&s_used, &g, &sensitivity, opts)?;
    let corrected: Vec<C64> = (0..g.len())
        .map(|j| g[j] - (0..sensitivity.len()).map(|i| fit.corrections[i] * sensitivity[i][j]).sum::<C64>())
        .collect();
    check_divergence(k, &s_used, &corrected, opts)?;
    let mut lower_corrections = vec![C64::new(0.0, 0.0); k];
    for (slot, &i) in inherited.iter().enumerate() {
        lower_corrections[i] = fit.corrections[slot];
    }
    Ok(Extraction {
        k,
        value: fit.value,
        fit_residual: fit.residual,
        terms: fit.terms,
        uncertainty: fit.uncertainty,
        lower_corrections,
        s_used,
        g,
    })
}

/// Step in `q_i` for the central difference `∂Ñ/∂q_i`.
const SENSITIVITY_STEP: f64 = 1e-2;

struct Extrapolation {
    value: C64,
    residual: f64,
    terms: usize,
    uncertainty: f64,
    corrections: Vec<C64>,
}

fn fit_terms(s: &[f64], g: &[C64], extra: &[Vec<C64>], terms: usize) -> (Vec<C64>, f64) {
    let mut cols: Vec<Vec<C64>> = (0..terms)
        .map(|t| s.iter().map(|v| C64::new(v.powi(-(t as i32)), 0.0)).collect())
        .collect();
    cols.extend(extra.iter().cloned());
    least_squares_hermitian(&cols, g)
}

/// Limit of `g` as `s → ∞` from a fit in powers of `1/s` plus the inherited
/// columns `extra`.
///
/// Orders from two terms up to `max_terms` (keeping two spare points) are
/// tried; the accepted order is the one whose constant moved least from the
/// next lower order, and that movement is the error estimate.
fn extrapolate(s: &[f64], g: &[C64], extra: &[Vec<C64>], opts: &ExtractOptions) -> Result<Extrapolation> {
    let m = s.len();
    let spare = m.saturating_sub(extra.len() + 2);
    if spare < 2 {
        return Err(Error::IllConditioned(format!(
            "{m} ladder points cannot carry {} inherited terms",
            extra.len()
        )));
    }
    let split = |c: Vec<C64>, terms: usize| (c[0], c[terms..].to_vec());
    if opts.fixed_three_term {
        let start = (m / 2).min(m - (extra.len() + 4).min(m));
        let cut: Vec<Vec<C64>> = extra.iter().map(|c| c[start..].to_vec()).collect();
        let (c3, residual) = fit_terms(&s[start..], &g[start..], &cut, 3);
        let (c2, _) = fit_terms(&s[start..], &g[start..], &cut, 2);
        let (value, corrections) = split(c3, 3);
        return Ok(Extrapolation {
            value,
            residual,
            terms: 3,
            uncertainty: (value - c2[0]).norm() + residual,
            corrections,
        });
    }
    let top = opts.max_terms.min(spare).max(2);
    let fits: Vec<(Vec<C64>, f64)> = (1..=top).map(|t| fit_terms(s, g, extra, t)).collect();
    let mut best: Option<Extrapolation> = None;
    for t in 2..=top {
        let (c, residual) = fits[t - 1].clone();
        let moved = (c[0] - fits[t - 2].0[0]).norm();
        let uncertainty = moved + residual;
        if best.as_ref().is_none_or(|b| uncertainty < b.uncertainty) {
            let (value, corrections) = split(c, t);
            best = Some(Extrapolation {
                value,
                residual,
                terms: t,
                uncertainty,
                corrections,
            });
        }
    }
    Ok(best.expect("at least two orders"))
}

/// Non-decaying successive differences at the top of the ladder.
fn check_divergence(k: usize, s: &[f64], g: &[C64], opts: &ExtractOptions) -> Result<()> {
    let d: Vec<f64> = g.windows(2).map(|w| (w[1] - w[0]).norm()).collect();
    let tail = (d.len() / 2).max(3).min(d.len());
    let d_tail = &d[d.len() - tail..];
    let s_tail = &s[s.len() - tail..];
    let last = *d.last().expect("at least two ladder points");
    let scale = g.last().map_or(1.0, |v| v.norm()).max(1.0);
    if last <= opts.divergence_floor * scale || tail < 2 {
        return Ok(());
    }
    let ln_s: Vec<f64> = s_tail.iter().map(|v| v.ln()).collect();
    let ln_d: Vec<f64> = d_tail.iter().map(|v| v.max(1e-300).ln()).collect();
    let (c, _) = crate::fit::least_squares(&[vec![1.0; tail], ln_s], &ln_d);
    if c[1] >= 0.0 {
        return Err(Error::Divergence {
            k,
            detail: format!(
                "|g_j − g_(j−1)| grows like s^{:.2} up the ladder (last difference {last:.3e})",
                c[1]
            ),
        });
    }
    Ok(())
}

/// Output of [`reconstruct`].
#[derive(Debug, Clone, PartialEq)]
pub struct Reconstruction {
    pub potential: TaylorPotential,
    pub steps: Vec<Extraction>,
    pub ray: SectorRay,
    pub warnings: Vec<String>,
}

/// Coefficient-by-coefficient recovery of `q_0 … q_{K_max}`.
///
/// The model for step `k` carries the accepted `q_0 … q_{k−1}` and zeros beyond.
/// A coefficient the ladder can no longer resolve stops the loop with a
/// warning; divergence is an error carrying the failing `k`.
pub fn reconstruct(
    target: &WeylFunction,
    kernel: &Kernel,
    k_max: usize,
    ray: &SectorRay,
    tol: f64,
    opts: &ExtractOptions,
) -> Result<Reconstruction> {
    let mut coeffs: Vec<C64> = Vec::new();
    let mut uncertainty: Vec<f64> = Vec::new();
    let mut steps = Vec::new();
    let mut warnings = Vec::new();
    for k in 0..=k_max {
        let model = TaylorPotential::with_uncertainty(coeffs.clone(), uncertainty.clone());
        let step = match extract_coefficient(target, &model, kernel, k, ray, opts) {
            Ok(step) => step,
            Err(Error::IllConditioned(msg)) => {
                warnings.push(format!("stopped before k = {k}: {msg}"));
                break;
            }
            Err(e) => return Err(e),
        };
        if step.fit_residual > tol {
            warnings.push(format!(
                "k = {k}: extrapolation residual {:.3e} exceeds tol {tol:.3e}",
                step.fit_residual
            ));
        }
        coeffs.push(step.value);
        uncertainty.push(step.uncertainty);
        steps.push(step);
    }
    let potential = TaylorPotential::with_uncertainty(coeffs, uncertainty);
    if let Some(r) = potential.radius_estimate {
        if r < PI {
            warnings.push(format!(
                "radius estimate {r:.4} < π: values on ({r:.4}, π) need analytic continuation and are not produced"
            ));
        }
    }
    Ok(Reconstruction {
        potential,
        steps,
        ray: ray.clone(),
        warnings,
    })
}
