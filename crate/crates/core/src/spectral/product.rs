use std::f64::consts::PI;

use num_complex::Complex64 as C64;

use super::{Family, Spectrum};
use crate::error::{Error, Result};
use crate::solver::SpectralPoint;

/// How factors past the truncation index are modelled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TailModel {
    /// `(cₙ² − λ)/cₙ²`, the zero-potential factor.
    #[default]
    ZeroPotential,
    /// `(cₙ² + ω/π − λ)/cₙ²`, the first-order asymptotic factor; needs
    /// `omega_hint`.
    Shifted,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProductValue {
    pub value: C64,
    /// Size of the neglected tail, extrapolated from the last retained ratio.
    pub error_estimate: f64,
}

/// `Δ₁ = π ∏ (λₙ₁ − λ)/n²` or `Δ₂ = ∏ (λₙ₂ − λ)/(n − ½)²`.
///
/// The first `n_prod` factors use the spectrum (entries past `spec.len()` come
/// from the asymptotic model `cₙ² + ω/π`). The rest are replaced by the tail
/// model, whose infinite product is the closed form `sin(πz)/z` or `cos(πz)` at
/// `z² = λ − shift`; dividing out its first `n_prod` factors gives
///
/// ```text
/// Δ = F(z) · ∏_{n ≤ n_prod} (λₙ − λ)/(cₙ² − z²).
/// ```
pub fn delta_from_spectrum(
    spec: &Spectrum,
    lambda: C64,
    n_prod: usize,
    tail: TailModel,
) -> Result<ProductValue> {
    if n_prod == 0 {
        return Err(Error::InvalidArgument("n_prod must be positive".into()));
    }
    if spec.len() < n_prod && spec.omega_hint.is_none() {
        return Err(Error::InvalidArgument(format!(
            "spectrum has {} entries, fewer than n_prod = {n_prod}, and no ω for the asymptotic model",
            spec.len()
        )));
    }
    let shift = match tail {
        TailModel::ZeroPotential => 0.0,
        TailModel::Shifted => {
            spec.omega_hint.ok_or_else(|| {
                Error::InvalidArgument("shifted tail needs the spectrum's ω estimate".into())
            })? / PI
        }
    };
    let family = spec.family;
    let mu = lambda - shift;
    let z = SpectralPoint::from_lambda(mu).rho();

    // The one index whose model factor may vanish is folded into the closed form.
    let nearest = match family {
        Family::Dirichlet => z.re.round(),
        Family::Neumann => (z.re + 0.5).round(),
    } as usize;
    let singular = (1..=n_prod)
        .contains(&nearest)
        .then_some(nearest)
        .filter(|&m| (z - family.center(m)).norm() < 0.5);

    let mut value = match singular {
        Some(m) => closed_form_over_factor(family, z, m),
        None => closed_form(family, z),
    };
    let mut last_ratio = C64::new(1.0, 0.0);
    for n in 1..=n_prod {
        let ln = spec
            .value_or_model(n)
            .expect("model availability checked above");
        let num = C64::new(ln, 0.0) - lambda;
        if num == C64::new(0.0, 0.0) {
            return Ok(ProductValue {
                value: num,
                error_estimate: 0.0,
            });
        }
        let c2 = family.center(n).powi(2);
        if Some(n) == singular {
            value *= num;
        } else {
            let ratio = num / (c2 - mu);
            value *= ratio;
            if n == n_prod {
                last_ratio = ratio;
            }
        }
    }
    let error_estimate = value.norm() * n_prod as f64 * (last_ratio - 1.0).norm();
    Ok(ProductValue {
        value,
        error_estimate,
    })
}

fn sinc(u: C64) -> C64 {
    if u.norm() < 1e-4 {
        C64::new(1.0, 0.0) - u * u / 6.0
    } else {
        u.sin() / u
    }
}

/// `sin(πz)/z` or `cos(πz)`.
fn closed_form(family: Family, z: C64) -> C64 {
    match family {
        Family::Dirichlet => sinc(z * PI) * PI,
        Family::Neumann => (z * PI).cos(),
    }
}

/// `F(z)/(c_m² − z²)`, written through `sinc` so it stays finite at `z = c_m`.
fn closed_form_over_factor(family: Family, z: C64, m: usize) -> C64 {
    let c = family.center(m);
    let sign = if m.is_multiple_of(2) { 1.0 } else { -1.0 };
    let s = sinc((z - c) * PI) * PI * (-sign);
    match family {
        Family::Dirichlet => s / (z * (z + c)),
        Family::Neumann => s / (z + c),
    }
}
