//! Initial-value integration of `ℓy = λy` (marched from `x = 0`) and of the
//! adjoint `ℓ*z = λz` (marched from `x = π` down to `0`).
//!
//! The scheme is classical fixed-step RK4 on the first-order system
//! `(y, y′)`. The memory term is carried causally: for a kernel written as
//! `M(x,t) = Σ fᵢ(x) gᵢ(t)`, the partial integrals `Gᵢ(x) = ∫₀ˣ gᵢ(t) y(t) dt`
//! are appended to the state with `Gᵢ′ = gᵢ y`, so every RK stage sees the
//! memory integral at its own abscissa with full fourth-order accuracy. The
//! adjoint uses `Fᵢ(x) = ∫ₓ^π fᵢ(t) z(t) dt` with `Fᵢ′ = −fᵢ z`; that is the
//! orientation swap of the same factors.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::operator::OperatorConfig;
use crate::quadrature::simpson;

/// Marching aborts once any state component exceeds this magnitude.
pub const STATE_GUARD: f64 = 1e150;

/// Smallest admissible grid.
pub const MIN_GRID: usize = 16;

/// Default number of grid intervals on `[0, π]`.
pub const DEFAULT_GRID: usize = 2000;

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
const ONE: C64 = C64 { re: 1.0, im: 0.0 };

/// A spectral parameter `λ = ρ²` with the branch `Im ρ ≥ 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralPoint {
    lambda: C64,
    rho: C64,
}

impl SpectralPoint {
    pub fn from_lambda(lambda: C64) -> Self {
        let mut rho = lambda.sqrt();
        if rho.im < 0.0 || (rho.im == 0.0 && rho.re < 0.0) {
            rho = -rho;
        }
        Self { lambda, rho }
    }

    pub fn real(lambda: f64) -> Self {
        Self::from_lambda(C64::new(lambda, 0.0))
    }

    /// `ρ` must lie in the closed upper half-plane.
    pub fn from_rho(rho: C64) -> Result<Self> {
        if rho.im < 0.0 {
            return Err(Error::InvalidArgument(format!(
                "ρ = {rho} has negative imaginary part"
            )));
        }
        Ok(Self {
            lambda: rho * rho,
            rho,
        })
    }

    pub fn lambda(&self) -> C64 {
        self.lambda
    }

    pub fn rho(&self) -> C64 {
        self.rho
    }
}

/// Which equation a trace solves.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Orientation {
    /// `ℓy = λy`, initial data at `x = 0`.
    Forward,
    /// `ℓ*z = λz`, initial data at `x = π`.
    Adjoint,
}

/// Solution values and derivatives on the uniform grid `xᵢ = iπ/n`.
#[derive(Debug, Clone)]
pub struct SolutionTrace {
    pub values: Vec<C64>,
    pub derivatives: Vec<C64>,
    pub point: SpectralPoint,
    pub orientation: Orientation,
}

impl SolutionTrace {
    pub fn intervals(&self) -> usize {
        self.values.len() - 1
    }

    pub fn step(&self) -> f64 {
        PI / self.intervals() as f64
    }

    pub fn x(&self, i: usize) -> f64 {
        i as f64 * self.step()
    }

    pub fn first(&self) -> (C64, C64) {
        (self.values[0], self.derivatives[0])
    }

    pub fn last(&self) -> (C64, C64) {
        let n = self.intervals();
        (self.values[n], self.derivatives[n])
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Linear combination `a·self + b·other` on a shared grid.
    pub fn combine(&self, a: C64, other: &SolutionTrace, b: C64) -> SolutionTrace {
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(u, v)| a * u + b * v)
            .collect();
        let derivatives = self
            .derivatives
            .iter()
            .zip(&other.derivatives)
            .map(|(u, v)| a * u + b * v)
            .collect();
        SolutionTrace {
            values,
            derivatives,
            point: self.point,
            orientation: self.orientation,
        }
    }

    pub fn scale(&self, a: C64) -> SolutionTrace {
        SolutionTrace {
            values: self.values.iter().map(|v| v * a).collect(),
            derivatives: self.derivatives.iter().map(|v| v * a).collect(),
            point: self.point,
            orientation: self.orientation,
        }
    }
}

/// Operator data tabulated at the half-step nodes `x = jπ/(2n)` of one grid,
/// reusable for any number of spectral parameters.
#[derive(Debug, Clone)]
pub struct Discretization {
    n: usize,
    h: f64,
    q: Vec<C64>,
    f: Vec<Vec<C64>>,
    g: Vec<Vec<C64>>,
}

struct Sweep {
    values: Vec<C64>,
    derivatives: Vec<C64>,
}

impl Discretization {
    pub fn new(config: &OperatorConfig, n: usize) -> Result<Self> {
        if n < MIN_GRID {
            return Err(Error::InvalidArgument(format!(
                "grid size {n} is below the minimum {MIN_GRID}"
            )));
        }
        let h = PI / n as f64;
        let half = |j: usize| j as f64 * h * 0.5;
        let q: Vec<C64> = (0..=2 * n).map(|j| config.potential.eval(half(j))).collect();
        if q.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(Error::InvalidArgument(
                "potential is not finite on the grid".into(),
            ));
        }
        let terms = config.kernel.terms();
        let f = terms
            .iter()
            .map(|t| (0..=2 * n).map(|j| t.f.eval(half(j))).collect())
            .collect();
        let g = terms
            .iter()
            .map(|t| (0..=2 * n).map(|j| t.g.eval(half(j))).collect())
            .collect();
        Ok(Self { n, h, q, f, g })
    }

    pub fn intervals(&self) -> usize {
        self.n
    }

    pub fn rank(&self) -> usize {
        self.f.len()
    }

    /// Full trace of `ℓy = λy` with `y(0) = y0`, `y′(0) = yp0`.
    pub fn forward(&self, lam: SpectralPoint, y0: C64, yp0: C64) -> Result<SolutionTrace> {
        let sweep = self.sweep(Orientation::Forward, lam.lambda(), y0, yp0, true)?;
        Ok(SolutionTrace {
            values: sweep.values,
            derivatives: sweep.derivatives,
            point: lam,
            orientation: Orientation::Forward,
        })
    }

    /// Full trace of `ℓ*z = λz` with `z(π) = z_pi`, `z′(π) = zp_pi`.
    pub fn adjoint(&self, lam: SpectralPoint, z_pi: C64, zp_pi: C64) -> Result<SolutionTrace> {
        let mut sweep = self.sweep(Orientation::Adjoint, lam.lambda(), z_pi, zp_pi, true)?;
        sweep.values.reverse();
        sweep.derivatives.reverse();
        Ok(SolutionTrace {
            values: sweep.values,
            derivatives: sweep.derivatives,
            point: lam,
            orientation: Orientation::Adjoint,
        })
    }

    /// `(y(π), y′(π))` without storing the trace.
    pub fn forward_end(&self, lambda: C64, y0: C64, yp0: C64) -> Result<(C64, C64)> {
        let s = self.sweep(Orientation::Forward, lambda, y0, yp0, false)?;
        Ok((s.values[0], s.derivatives[0]))
    }

    /// `(z(0), z′(0))` without storing the trace.
    pub fn adjoint_end(&self, lambda: C64, z_pi: C64, zp_pi: C64) -> Result<(C64, C64)> {
        let s = self.sweep(Orientation::Adjoint, lambda, z_pi, zp_pi, false)?;
        Ok((s.values[0], s.derivatives[0]))
    }

    fn sweep(
        &self,
        orientation: Orientation,
        lambda: C64,
        v0: C64,
        d0: C64,
        store: bool,
    ) -> Result<Sweep> {
        if !(v0.re.is_finite() && v0.im.is_finite() && d0.re.is_finite() && d0.im.is_finite()) {
            return Err(Error::InvalidArgument("initial data must be finite".into()));
        }
        let n = self.n;
        let r = self.rank();
        // Forward: p′ = (q−λ)y + Σ fᵢGᵢ, Gᵢ′ = gᵢy.  Adjoint: p′ = (q−λ)z + Σ gᵢFᵢ, Fᵢ′ = −fᵢz.
        let (a, b, sigma, dx) = match orientation {
            Orientation::Forward => (&self.f, &self.g, 1.0, self.h),
            Orientation::Adjoint => (&self.g, &self.f, -1.0, -self.h),
        };
        let dim = 2 + r;
        let mut u = vec![ZERO; dim];
        u[0] = v0;
        u[1] = d0;
        let mut k = [vec![ZERO; dim], vec![ZERO; dim], vec![ZERO; dim], vec![ZERO; dim]];
        let mut tmp = vec![ZERO; dim];

        let rhs = |m: usize, s: &[C64], out: &mut [C64]| {
            let mut acc = (self.q[m] - lambda) * s[0];
            for i in 0..r {
                acc += a[i][m] * s[2 + i];
                out[2 + i] = b[i][m] * s[0] * sigma;
            }
            out[0] = s[1];
            out[1] = acc;
        };

        let mut values = Vec::with_capacity(if store { n + 1 } else { 1 });
        let mut derivatives = Vec::with_capacity(if store { n + 1 } else { 1 });
        if store {
            values.push(u[0]);
            derivatives.push(u[1]);
        }
        for step in 0..n {
            let (m0, m1, m2) = match orientation {
                Orientation::Forward => (2 * step, 2 * step + 1, 2 * step + 2),
                Orientation::Adjoint => (2 * (n - step), 2 * (n - step) - 1, 2 * (n - step) - 2),
            };
            rhs(m0, &u, &mut k[0]);
            for j in 0..dim {
                tmp[j] = u[j] + k[0][j] * (0.5 * dx);
            }
            rhs(m1, &tmp, &mut k[1]);
            for j in 0..dim {
                tmp[j] = u[j] + k[1][j] * (0.5 * dx);
            }
            rhs(m1, &tmp, &mut k[2]);
            for j in 0..dim {
                tmp[j] = u[j] + k[2][j] * dx;
            }
            rhs(m2, &tmp, &mut k[3]);
            let mut worst = 0.0f64;
            for j in 0..dim {
                u[j] += (k[0][j] + (k[1][j] + k[2][j]) * 2.0 + k[3][j]) * (dx / 6.0);
                worst = worst.max(u[j].re.abs()).max(u[j].im.abs());
            }
            if !(worst <= STATE_GUARD) {
                let index = match orientation {
                    Orientation::Forward => step + 1,
                    Orientation::Adjoint => n - step - 1,
                };
                return Err(Error::Overflow {
                    index,
                    x: index as f64 * self.h,
                });
            }
            if store {
                values.push(u[0]);
                derivatives.push(u[1]);
            }
        }
        if !store {
            values.push(u[0]);
            derivatives.push(u[1]);
        }
        Ok(Sweep {
            values,
            derivatives,
        })
    }
}

/// Solves `ℓy = λy`, `y(0) = y0`, `y′(0) = yp0` on `n` intervals.
pub fn integrate_forward(
    config: &OperatorConfig,
    lam: SpectralPoint,
    y0: C64,
    yp0: C64,
    n: usize,
) -> Result<SolutionTrace> {
    Discretization::new(config, n)?.forward(lam, y0, yp0)
}

/// Solves `ℓ*z = λz`, `z(π) = z_pi`, `z′(π) = zp_pi` on `n` intervals.
pub fn integrate_adjoint(
    config: &OperatorConfig,
    lam: SpectralPoint,
    z_pi: C64,
    zp_pi: C64,
    n: usize,
) -> Result<SolutionTrace> {
    Discretization::new(config, n)?.adjoint(lam, z_pi, zp_pi)
}

/// Source of solution traces for the identity checks. The production
/// implementation is [`RungeKutta`]; tests substitute deliberately broken ones.
pub trait Integrator: Sync {
    fn forward(
        &self,
        config: &OperatorConfig,
        lam: SpectralPoint,
        y0: C64,
        yp0: C64,
        n: usize,
    ) -> Result<SolutionTrace>;

    fn adjoint(
        &self,
        config: &OperatorConfig,
        lam: SpectralPoint,
        z_pi: C64,
        zp_pi: C64,
        n: usize,
    ) -> Result<SolutionTrace>;
}

#[derive(Debug, Clone, Copy, Default)]
pub struct RungeKutta;

impl Integrator for RungeKutta {
    fn forward(
        &self,
        config: &OperatorConfig,
        lam: SpectralPoint,
        y0: C64,
        yp0: C64,
        n: usize,
    ) -> Result<SolutionTrace> {
        integrate_forward(config, lam, y0, yp0, n)
    }

    fn adjoint(
        &self,
        config: &OperatorConfig,
        lam: SpectralPoint,
        z_pi: C64,
        zp_pi: C64,
        n: usize,
    ) -> Result<SolutionTrace> {
        integrate_adjoint(config, lam, z_pi, zp_pi, n)
    }
}

/// `C`, `S` (data at 0) and `C*`, `S*` (data at π).
#[derive(Debug, Clone)]
pub struct Basis {
    pub c: SolutionTrace,
    pub s: SolutionTrace,
    pub c_star: SolutionTrace,
    pub s_star: SolutionTrace,
}

pub fn solve_basis(config: &OperatorConfig, lam: SpectralPoint, n: usize) -> Result<Basis> {
    let d = Discretization::new(config, n)?;
    Ok(Basis {
        c: d.forward(lam, ONE, ZERO)?,
        s: d.forward(lam, ZERO, ONE)?,
        c_star: d.adjoint(lam, ONE, ZERO)?,
        s_star: d.adjoint(lam, ZERO, -ONE)?,
    })
}

/// `|Δ₁(λ)|` below `POLE_GUARD·(1 + |λ|)` is treated as a pole of `N`.
pub const POLE_GUARD: f64 = 1e-12;

/// Default boundary tolerance for `Φ(π) = 0`, relative to `max |Φ|`.
pub const PHI_BC_TOL: f64 = 1e-8;

pub(crate) fn pole_check(lambda: C64, delta1: C64) -> Result<()> {
    if delta1.norm() < POLE_GUARD * (1.0 + lambda.norm()) {
        Err(Error::WeylPole {
            lambda,
            delta1: delta1.norm(),
        })
    } else {
        Ok(())
    }
}

/// A Weyl solution together with `N = Φ′(0)`.
#[derive(Debug, Clone)]
pub struct WeylSolution {
    pub phi: SolutionTrace,
    pub weyl: C64,
}

/// `Φ = C + N·S` with `N = −Δ₂/Δ₁`.
pub fn solve_phi(config: &OperatorConfig, lam: SpectralPoint, n: usize) -> Result<WeylSolution> {
    let d = Discretization::new(config, n)?;
    let c = d.forward(lam, ONE, ZERO)?;
    let s = d.forward(lam, ZERO, ONE)?;
    let delta1 = s.last().0;
    let delta2 = c.last().0;
    pole_check(lam.lambda(), delta1)?;
    let weyl = -delta2 / delta1;
    let phi = c.combine(ONE, &s, weyl);
    let end = phi.last().0.norm();
    if end > PHI_BC_TOL * phi.max_abs().max(1.0) {
        return Err(Error::IllConditioned(format!(
            "|Φ(π)| = {end:.3e} exceeds the boundary tolerance"
        )));
    }
    Ok(WeylSolution { phi, weyl })
}

/// `Φ* = S*/S*(0)` and `N* = S*′(0)/S*(0)`.
///
/// `S*` is a single solution marched from π, so this is the numerically stable
/// way to obtain the decaying solution deep inside the sector.
pub fn solve_phi_star(
    config: &OperatorConfig,
    lam: SpectralPoint,
    n: usize,
) -> Result<WeylSolution> {
    let d = Discretization::new(config, n)?;
    let s_star = d.adjoint(lam, ZERO, -ONE)?;
    let (z0, zp0) = s_star.first();
    pole_check(lam.lambda(), z0)?;
    let phi = s_star.scale(z0.inv());
    Ok(WeylSolution {
        phi,
        weyl: zp0 / z0,
    })
}

/// Memory integral of a trace at node `i` with the solver's composite rule:
/// `∫₀^{xᵢ} M(xᵢ,t) y dt` (forward) or `∫_{xᵢ}^π M(t,xᵢ) z dt` (adjoint).
pub fn memory_integral(config: &OperatorConfig, trace: &SolutionTrace, i: usize) -> C64 {
    if config.kernel.is_zero() {
        return ZERO;
    }
    let h = trace.step();
    let n = trace.intervals();
    let xi = trace.x(i);
    match trace.orientation {
        Orientation::Forward => {
            let w: Vec<C64> = (0..=i)
                .map(|j| config.kernel.eval(xi, trace.x(j)) * trace.values[j])
                .collect();
            simpson(&w, h)
        }
        Orientation::Adjoint => {
            let w: Vec<C64> = (i..=n)
                .map(|j| config.kernel.eval(trace.x(j), xi) * trace.values[j])
                .collect();
            simpson(&w, h)
        }
    }
}

/// Max over interior nodes of `|−y″ + qy + memory − λy|`, with `y″` from the
/// fourth-order five-point stencil on the stored values.
pub fn residual_norm(config: &OperatorConfig, trace: &SolutionTrace) -> f64 {
    let n = trace.intervals();
    if n < 4 {
        return 0.0;
    }
    let h = trace.step();
    let lambda = trace.point.lambda();
    let y = &trace.values;
    (2..=n - 2)
        .map(|i| {
            let ypp = (-y[i + 2] + y[i + 1] * 16.0 - y[i] * 30.0 + y[i - 1] * 16.0 - y[i - 2])
                / (12.0 * h * h);
            let q = config.potential.eval(trace.x(i));
            (-ypp + (q - lambda) * y[i] + memory_integral(config, trace, i)).norm()
        })
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::{Kernel, Potential};

    fn real(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    #[test]
    fn spectral_point_branch() {
        let p = SpectralPoint::real(-4.0);
        assert!((p.rho() - C64::new(0.0, 2.0)).norm() < 1e-15);
        let p = SpectralPoint::from_lambda(C64::new(-4.0, -0.0));
        assert!(p.rho().im >= 0.0);
        let p = SpectralPoint::from_lambda(C64::new(3.0, -2.0));
        assert!(p.rho().im >= 0.0);
        assert!((p.rho() * p.rho() - p.lambda()).norm() < 1e-14);
        assert!(SpectralPoint::real(2.25).rho().re == 1.5);
        assert!(SpectralPoint::from_rho(C64::new(1.0, -0.1)).is_err());
    }

    #[test]
    fn zero_potential_sine() {
        let cfg = OperatorConfig::zero();
        let t = integrate_forward(&cfg, SpectralPoint::real(4.0), ZERO, ONE, 2000).unwrap();
        let err = (0..=2000)
            .map(|i| (t.values[i] - real((2.0 * t.x(i)).sin() / 2.0)).norm())
            .fold(0.0, f64::max);
        assert!(err < 1e-8, "err {err}");
        assert_eq!(t.first(), (ZERO, ONE));
    }

    #[test]
    fn constant_solution_at_zero_lambda() {
        let cfg = OperatorConfig::zero();
        let t = integrate_forward(&cfg, SpectralPoint::real(0.0), ONE, ZERO, 100).unwrap();
        assert!(t.values.iter().all(|v| (v - ONE).norm() < 1e-15));
    }

    #[test]
    fn constant_potential_cosh() {
        let cfg = OperatorConfig::new(Potential::constant(1.0), Kernel::Zero).unwrap();
        let t = integrate_forward(&cfg, SpectralPoint::real(-1.0), ONE, ZERO, 2000).unwrap();
        let s2 = 2f64.sqrt();
        for i in (0..=2000).step_by(50) {
            let want = (s2 * t.x(i)).cosh();
            assert!((t.values[i].re - want).abs() < 1e-9 * want, "i = {i}");
        }
    }

    #[test]
    fn adjoint_reflection() {
        let cfg = OperatorConfig::zero();
        let t = integrate_adjoint(&cfg, SpectralPoint::real(4.0), ZERO, -ONE, 2000).unwrap();
        let err = (0..=2000)
            .map(|i| (t.values[i] - real((2.0 * (PI - t.x(i))).sin() / 2.0)).norm())
            .fold(0.0, f64::max);
        assert!(err < 1e-8, "err {err}");
        assert_eq!(t.last(), (ZERO, -ONE));
        let t = integrate_adjoint(&cfg, SpectralPoint::real(0.0), ONE, ZERO, 64).unwrap();
        assert!(t.values.iter().all(|v| (v - ONE).norm() < 1e-15));
    }

    #[test]
    fn basis_endpoints_zero_potential() {
        let cfg = OperatorConfig::zero();
        let b = solve_basis(&cfg, SpectralPoint::real(1.0), 2000).unwrap();
        assert!(b.s.last().0.norm() < 1e-9);
        let b = solve_basis(&cfg, SpectralPoint::real(0.25), 2000).unwrap();
        assert!(b.c.last().0.norm() < 1e-9);
        assert_eq!(b.c.first(), (ONE, ZERO));
        assert_eq!(b.s.first(), (ZERO, ONE));
        assert_eq!(b.c_star.last(), (ONE, ZERO));
        assert_eq!(b.s_star.last(), (ZERO, -ONE));
    }

    #[test]
    fn weyl_of_zero_potential() {
        let cfg = OperatorConfig::zero();
        let w = solve_phi(&cfg, SpectralPoint::real(-1.0), 2000).unwrap();
        let want = -1.0 / PI.tanh();
        assert!((w.weyl - real(want)).norm() < 1e-9);
        assert_eq!(w.phi.first().0, ONE);
        assert!(matches!(
            solve_phi(&cfg, SpectralPoint::real(1.0), 2000),
            Err(Error::WeylPole { .. })
        ));
    }

    #[test]
    fn weyl_of_constant_potential() {
        let cfg = OperatorConfig::new(Potential::constant(1.0), Kernel::Zero).unwrap();
        let w = solve_phi(&cfg, SpectralPoint::real(-4.0), 2000).unwrap();
        let r = 5f64.sqrt();
        assert!((w.weyl - real(-r / (r * PI).tanh())).norm() < 1e-9);
    }

    #[test]
    fn rejects_small_grid_and_bad_data() {
        let cfg = OperatorConfig::zero();
        assert!(matches!(
            integrate_forward(&cfg, SpectralPoint::real(1.0), ONE, ZERO, 8),
            Err(Error::InvalidArgument(_))
        ));
        assert!(integrate_forward(&cfg, SpectralPoint::real(1.0), real(f64::NAN), ZERO, 32).is_err());
    }

    #[test]
    fn overflow_is_reported_with_index() {
        let cfg = OperatorConfig::zero();
        let err = integrate_forward(&cfg, SpectralPoint::real(-1.5e4), ONE, ZERO, 4000).unwrap_err();
        match err {
            Error::Overflow { index, .. } => assert!(index > 0 && index <= 4000),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn residual_is_small_and_detects_corruption() {
        let cfg = OperatorConfig::new(Potential::poly(&[0.5, -0.2]), Kernel::x_minus_t()).unwrap();
        let t = integrate_forward(&cfg, SpectralPoint::real(3.0), ONE, real(0.3), 2000).unwrap();
        let r = residual_norm(&cfg, &t);
        assert!(r < 1e-6, "residual {r}");
        let mut bad = t.clone();
        bad.values[700] += 1e-6;
        assert!(residual_norm(&cfg, &bad) > 1e-2);
        let zero = integrate_forward(&cfg, SpectralPoint::real(3.0), ZERO, ZERO, 200).unwrap();
        assert_eq!(residual_norm(&cfg, &zero), 0.0);
    }

    #[test]
    fn zero_kernel_short_circuit_matches_explicit_zero_terms() {
        let q = Potential::poly(&[0.3, 1.0, -0.2]);
        let plain = OperatorConfig::new(q.clone(), Kernel::Zero).unwrap();
        let tiny = OperatorConfig::new(q, Kernel::constant(1e-300)).unwrap();
        let lam = SpectralPoint::from_lambda(C64::new(5.0, 1.0));
        let a = integrate_forward(&plain, lam, ONE, ZERO, 1000).unwrap();
        let b = integrate_forward(&tiny, lam, ONE, ZERO, 1000).unwrap();
        for (u, v) in a.values.iter().zip(&b.values) {
            assert!((u - v).norm() <= 1e-12 * u.norm().max(1.0));
        }
    }
}
