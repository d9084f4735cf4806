use std::f64::consts::PI;

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::fit::least_squares;
use crate::operator::OperatorConfig;
use crate::quadrature::simpson;
use crate::solver::{pole_check, Integrator, RungeKutta, SpectralPoint};

use super::GridPolicy;

/// Residuals of `S(π) = S*(0)`, `C(π) = −S*′(0)` and `N = N*`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdjointReport {
    pub transfer_s: f64,
    pub transfer_c: f64,
    pub weyl: f64,
}

impl AdjointReport {
    pub fn max(&self) -> f64 {
        self.transfer_s.max(self.transfer_c).max(self.weyl)
    }
}

/// Compares the forward and adjoint characteristic data at `λ`.
///
/// Residuals are absolute, divided by `max(1, |value|)` so that they stay
/// meaningful where the characteristic functions are large.
pub fn verify_adjoint(config: &OperatorConfig, lambda: C64, n: usize) -> Result<AdjointReport> {
    verify_adjoint_with(&RungeKutta, config, lambda, n)
}

pub fn verify_adjoint_with(
    solver: &impl Integrator,
    config: &OperatorConfig,
    lambda: C64,
    n: usize,
) -> Result<AdjointReport> {
    let lam = SpectralPoint::from_lambda(lambda);
    let one = C64::new(1.0, 0.0);
    let zero = C64::new(0.0, 0.0);
    let delta2 = solver.forward(config, lam, one, zero, n)?.last().0;
    let delta1 = solver.forward(config, lam, zero, one, n)?.last().0;
    let (s0, sp0) = solver.adjoint(config, lam, zero, -one, n)?.first();
    pole_check(lambda, delta1)?;
    pole_check(lambda, s0)?;
    let rel = |a: C64, b: C64| (a - b).norm() / a.norm().max(b.norm()).max(1.0);
    let n_fwd = -delta2 / delta1;
    let n_adj = sp0 / s0;
    Ok(AdjointReport {
        transfer_s: rel(delta1, s0),
        transfer_c: rel(delta2, -sp0),
        weyl: rel(n_fwd, n_adj),
    })
}

/// Residual of `(λ−µ)∫₀^π y z dx = [y z′ − y′ z]₀^π` for `ℓy = λy` with data
/// `y0` at 0 and `ℓ*z = µz` with data `z_pi` at π, relative to the size of the
/// larger side (floored at 1).
pub fn green_identity_residual(
    config: &OperatorConfig,
    lambda: C64,
    mu: C64,
    y0: (C64, C64),
    z_pi: (C64, C64),
    n: usize,
) -> Result<f64> {
    green_identity_residual_with(&RungeKutta, config, lambda, mu, y0, z_pi, n)
}

pub fn green_identity_residual_with(
    solver: &impl Integrator,
    config: &OperatorConfig,
    lambda: C64,
    mu: C64,
    y0: (C64, C64),
    z_pi: (C64, C64),
    n: usize,
) -> Result<f64> {
    let y = solver.forward(config, SpectralPoint::from_lambda(lambda), y0.0, y0.1, n)?;
    let z = solver.adjoint(config, SpectralPoint::from_lambda(mu), z_pi.0, z_pi.1, n)?;
    let prod: Vec<C64> = y.values.iter().zip(&z.values).map(|(a, b)| a * b).collect();
    let lhs = (lambda - mu) * simpson(&prod, y.step());
    let wronskian = |i: usize| y.values[i] * z.derivatives[i] - y.derivatives[i] * z.values[i];
    let rhs = wronskian(n) - wronskian(0);
    Ok((lhs - rhs).norm() / lhs.norm().max(rhs.norm()).max(1.0))
}

/// Which decaying solution the sector check measures.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SectorTarget {
    /// `Φ = C + N S`. Its numerical value loses about `e^{2 Im ρ x}` digits to
    /// cancellation, so large `s` is refused.
    Phi,
    /// `Φ* = S*/S*(0)`, marched from π in one sweep.
    PhiStar,
}

/// Rates inside this band count as the nominal `O(1/s)` decay.
pub const SECTOR_RATE_BAND: (f64, f64) = (0.7, 1.3);

const CANCELLATION_LIMIT: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SectorRow {
    pub s: f64,
    /// `max_{x ≤ π−ε} |Φ(x) e^{−iρx} − 1|`.
    pub deviation: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SectorReport {
    pub theta: f64,
    pub eps: f64,
    pub target: SectorTarget,
    pub rows: Vec<SectorRow>,
    /// Minus the log-log slope of deviation against `s`.
    pub rate: f64,
    /// Decay at least as fast as `1/s` up to the band's lower edge.
    pub passes: bool,
    pub in_band: bool,
}

/// Measures `|Φ e^{−iρx} − 1|` along `ρ = s e^{iθ}` and fits the decay rate.
pub fn sector_asymptotics_check(
    config: &OperatorConfig,
    theta: f64,
    s_list: &[f64],
    eps: f64,
    target: SectorTarget,
) -> Result<SectorReport> {
    sector_asymptotics_check_with(&RungeKutta, config, theta, s_list, eps, target)
}

pub fn sector_asymptotics_check_with(
    solver: &impl Integrator,
    config: &OperatorConfig,
    theta: f64,
    s_list: &[f64],
    eps: f64,
    target: SectorTarget,
) -> Result<SectorReport> {
    if !(theta > 0.0 && theta < PI) {
        return Err(Error::InvalidArgument(format!(
            "ray angle {theta} is outside (0, π)"
        )));
    }
    if !(eps > 0.0 && eps < PI) {
        return Err(Error::InvalidArgument(format!(
            "x-range [0, π − {eps}] must stay strictly inside [0, π)"
        )));
    }
    if s_list.len() < 2 || s_list.windows(2).any(|w| !(w[0] < w[1])) || !(s_list[0] > 0.0) {
        return Err(Error::InvalidArgument(
            "need at least two increasing positive moduli".into(),
        ));
    }
    let policy = GridPolicy::default();
    let x_max = PI - eps;
    let mut rows = Vec::with_capacity(s_list.len());
    for &s in s_list {
        let rho = C64::from_polar(s, theta);
        let lam = SpectralPoint::from_rho(rho)?;
        let n = policy.intervals(lam.lambda());
        let one = C64::new(1.0, 0.0);
        let zero = C64::new(0.0, 0.0);
        let phi = match target {
            SectorTarget::Phi => {
                let loss = f64::EPSILON * (2.0 * rho.im * x_max).exp();
                if loss > CANCELLATION_LIMIT {
                    return Err(Error::IllConditioned(format!(
                        "Φ = C + NS at s = {s} loses {loss:.1e} to cancellation; use Φ*"
                    )));
                }
                let c = solver.forward(config, lam, one, zero, n)?;
                let sv = solver.forward(config, lam, zero, one, n)?;
                let delta1 = sv.last().0;
                pole_check(lam.lambda(), delta1)?;
                c.combine(one, &sv, -c.last().0 / delta1)
            }
            SectorTarget::PhiStar => {
                let s_star = solver.adjoint(config, lam, zero, -one, n)?;
                let z0 = s_star.first().0;
                pole_check(lam.lambda(), z0)?;
                s_star.scale(z0.inv())
            }
        };
        let deviation = (0..=n)
            .take_while(|&i| phi.x(i) <= x_max + 1e-12)
            .map(|i| {
                let x = phi.x(i);
                (phi.values[i] * (-C64::i() * rho * x).exp() - 1.0).norm()
            })
            .fold(0.0, f64::max);
        rows.push(SectorRow { s, deviation });
    }
    let ln_s: Vec<f64> = rows.iter().map(|r| r.s.ln()).collect();
    let ln_d: Vec<f64> = rows.iter().map(|r| r.deviation.max(1e-300).ln()).collect();
    let (c, _) = least_squares(&[vec![1.0; rows.len()], ln_s], &ln_d);
    let rate = -c[1];
    Ok(SectorReport {
        theta,
        eps,
        target,
        rows,
        rate,
        passes: rate >= SECTOR_RATE_BAND.0,
        in_band: (SECTOR_RATE_BAND.0..=SECTOR_RATE_BAND.1).contains(&rate),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::{Kernel, Potential};

    fn re(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    #[test]
    fn adjoint_identities_zero_potential() {
        let r = verify_adjoint(&OperatorConfig::zero(), re(-1.0), 2000).unwrap();
        assert!(r.max() < 1e-10, "{r:?}");
        assert!(matches!(
            verify_adjoint(&OperatorConfig::zero(), re(1.0), 2000),
            Err(Error::WeylPole { .. })
        ));
    }

    #[test]
    fn adjoint_identities_with_kernel() {
        let cfg = OperatorConfig::new(Potential::poly(&[0.0, 1.0]), Kernel::x_minus_t()).unwrap();
        let r = verify_adjoint(&cfg, re(-2.0), 2000).unwrap();
        assert!(r.max() < 1e-7, "{r:?}");
    }

    #[test]
    fn green_identity_with_kernel() {
        let cfg = OperatorConfig::new(
            Potential::poly(&[0.3, -0.5, 0.1]),
            Kernel::poly2(&[&[0.2, 0.1], &[0.4]]),
        )
        .unwrap();
        let r = green_identity_residual(
            &cfg,
            C64::new(3.0, 0.5),
            C64::new(-1.0, 1.0),
            (re(1.0), re(0.2)),
            (re(0.0), re(-1.0)),
            2000,
        )
        .unwrap();
        assert!(r < 1e-6, "{r}");
    }

    #[test]
    fn sector_rate_for_constant_potential() {
        let cfg = OperatorConfig::new(Potential::constant(1.0), Kernel::Zero).unwrap();
        let rep = sector_asymptotics_check(
            &cfg,
            PI / 2.0,
            &[5.0, 10.0, 20.0, 40.0],
            0.3,
            SectorTarget::PhiStar,
        )
        .unwrap();
        assert!(rep.in_band && rep.passes, "{rep:?}");
        // Closed form: Φe^{sx} − 1 ≈ −x/(2s) at the right end of the range.
        let r = rep.rows[3];
        assert!((r.deviation - (PI - 0.3) / 80.0).abs() < 2e-3, "{r:?}");
    }

    #[test]
    fn sector_zero_potential_decays_exponentially() {
        let rep = sector_asymptotics_check(
            &OperatorConfig::zero(),
            PI / 2.0,
            &[5.0, 10.0, 20.0],
            0.3,
            SectorTarget::PhiStar,
        )
        .unwrap();
        assert!(rep.passes && !rep.in_band, "{rep:?}");
    }

    #[test]
    fn sector_rejects_bad_ranges() {
        let cfg = OperatorConfig::zero();
        let s = [5.0, 10.0];
        assert!(sector_asymptotics_check(&cfg, PI / 2.0, &s, 0.0, SectorTarget::Phi).is_err());
        assert!(sector_asymptotics_check(&cfg, PI, &s, 0.3, SectorTarget::Phi).is_err());
        assert!(sector_asymptotics_check(&cfg, 1.0, &[5.0], 0.3, SectorTarget::Phi).is_err());
        assert!(matches!(
            sector_asymptotics_check(&cfg, PI / 2.0, &[10.0, 40.0], 0.3, SectorTarget::Phi),
            Err(Error::IllConditioned(_))
        ));
    }
}
