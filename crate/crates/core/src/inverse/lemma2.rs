use num_complex::Complex64 as C64;
use std::f64::consts::PI;

use super::SectorRay;
use crate::error::{Error, Result};
use crate::fit::least_squares;
use crate::operator::Polynomial;
use crate::quadrature::simpson;

/// Closed-form bounded functions of `(x, ρ)` for the probe.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BoundedFn {
    Zero,
    Constant(C64),
    Sin,
    Cos,
}

impl BoundedFn {
    fn eval(self, x: f64, _rho: C64) -> C64 {
        match self {
            BoundedFn::Zero => C64::new(0.0, 0.0),
            BoundedFn::Constant(c) => c,
            BoundedFn::Sin => C64::new(x.sin(), 0.0),
            BoundedFn::Cos => C64::new(x.cos(), 0.0),
        }
    }
}

/// `r(x) = x^k/k!·(γ + p(x))` against
/// `H(x,ρ) = e^{2iρx}(1 + ξ/ρ) + e^{iρx} η/ρ`.
#[derive(Debug, Clone, PartialEq)]
pub struct Lemma2Probe {
    pub k: usize,
    pub gamma: C64,
    /// Must vanish at 0.
    pub p: Polynomial,
    pub xi: BoundedFn,
    pub eta: BoundedFn,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProbeRow {
    pub s: f64,
    /// `(−2iρ)^{k+1} ∫₀^π r H dx`.
    pub value: C64,
    pub deviation: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProbeTable {
    pub rows: Vec<ProbeRow>,
    /// Minus the log-log slope of the deviation.
    pub rate: f64,
    /// The deviation trends down along the ladder (or is at rounding level).
    pub decays: bool,
}

/// Deviations below this are treated as exact.
const ROUNDING_LEVEL: f64 = 1e-10;

pub fn lemma2_probe(probe: &Lemma2Probe, ray: &SectorRay) -> Result<ProbeTable> {
    if probe.p.eval(0.0).norm() > 1e-14 {
        return Err(Error::InvalidArgument("probe polynomial must vanish at 0".into()));
    }
    let k = probe.k;
    let k_fact: f64 = (1..=k).map(|v| v as f64).product();
    let mut rows = Vec::with_capacity(ray.s_values.len());
    for (j, &s) in ray.s_values.iter().enumerate() {
        let rho = ray.rho(j);
        let mut n = (2.0 * s * PI / 0.005).ceil().max(2000.0) as usize;
        n += n % 2;
        let h = PI / n as f64;
        let i = C64::i();
        let f: Vec<C64> = (0..=n)
            .map(|m| {
                let x = m as f64 * h;
                let r = (probe.gamma + probe.p.eval(x)) * (x.powi(k as i32) / k_fact);
                let e1 = (i * rho * x).exp();
                let hx = e1 * e1 * (1.0 + probe.xi.eval(x, rho) / rho)
                    + e1 * probe.eta.eval(x, rho) / rho;
                r * hx
            })
            .collect();
        let value = (-2.0 * i * rho).powi(k as i32 + 1) * simpson(&f, h);
        rows.push(ProbeRow {
            s,
            value,
            deviation: (value - probe.gamma).norm(),
        });
    }
    let rate = if rows.len() >= 2 {
        let ln_s: Vec<f64> = rows.iter().map(|r| r.s.ln()).collect();
        let ln_d: Vec<f64> = rows.iter().map(|r| r.deviation.max(1e-300).ln()).collect();
        -least_squares(&[vec![1.0; rows.len()], ln_s], &ln_d).0[1]
    } else {
        0.0
    };
    let first = rows.first().map_or(0.0, |r| r.deviation);
    let last = rows.last().map_or(0.0, |r| r.deviation);
    let decays = last <= ROUNDING_LEVEL || (last < first && rate > 0.0);
    Ok(ProbeTable { rows, rate, decays })
}
