//! Operator data: the potential `q` and the Volterra kernel `M`.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

/// Polynomial `Σ aⱼ xʲ` with complex coefficients in the monomial basis.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Polynomial {
    coeffs: Vec<C64>,
}

impl Polynomial {
    pub fn new(coeffs: Vec<C64>) -> Self {
        Self { coeffs }
    }

    pub fn from_real(coeffs: &[f64]) -> Self {
        Self::new(coeffs.iter().map(|&c| C64::new(c, 0.0)).collect())
    }

    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: f64) -> Self {
        Self::from_real(&[c])
    }

    pub fn coeffs(&self) -> &[C64] {
        &self.coeffs
    }

    pub fn degree(&self) -> Option<usize> {
        self.coeffs.iter().rposition(|c| *c != C64::new(0.0, 0.0))
    }

    pub fn is_zero(&self) -> bool {
        self.degree().is_none()
    }

    pub fn eval(&self, x: f64) -> C64 {
        self.coeffs
            .iter()
            .rev()
            .fold(C64::new(0.0, 0.0), |acc, c| acc * x + c)
    }

    /// Exact `∫₀ˣ p(t) dt`.
    pub fn integral(&self, x: f64) -> C64 {
        let mut acc = C64::new(0.0, 0.0);
        for (j, c) in self.coeffs.iter().enumerate().rev() {
            acc = acc * x + c / (j as f64 + 1.0);
        }
        acc * x
    }

    pub fn is_real(&self) -> bool {
        self.coeffs.iter().all(|c| c.im == 0.0)
    }

    /// Taylor coefficients `p⁽ᵏ⁾(0) = k!·aₖ`, padded with zeros to `len`.
    pub fn derivatives_at_zero(&self, len: usize) -> Vec<C64> {
        let mut fact = 1.0;
        (0..len)
            .map(|k| {
                if k > 0 {
                    fact *= k as f64;
                }
                self.coeffs.get(k).copied().unwrap_or_default() * fact
            })
            .collect()
    }

    /// Inverse of [`Polynomial::derivatives_at_zero`]: `aₖ = qₖ / k!`.
    pub fn from_derivatives_at_zero(derivs: &[C64]) -> Self {
        let mut fact = 1.0;
        let coeffs = derivs
            .iter()
            .enumerate()
            .map(|(k, d)| {
                if k > 0 {
                    fact *= k as f64;
                }
                d / fact
            })
            .collect();
        Self::new(coeffs)
    }
}

/// The potential `q(x)` on `[0, π]`.
#[derive(Debug, Clone, PartialEq)]
pub enum Potential {
    Poly(Polynomial),
    /// Values on the uniform grid `xᵢ = iπ/m`, `i = 0..=m`; evaluated between
    /// nodes by local cubic interpolation.
    Samples(Vec<C64>),
}

impl Default for Potential {
    fn default() -> Self {
        Potential::Poly(Polynomial::zero())
    }
}

impl Potential {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: f64) -> Self {
        Potential::Poly(Polynomial::constant(c))
    }

    pub fn poly(coeffs: &[f64]) -> Self {
        Potential::Poly(Polynomial::from_real(coeffs))
    }

    /// Samples `f` on `m + 1` uniform nodes.
    pub fn sampled(m: usize, f: impl Fn(f64) -> C64) -> Self {
        let h = PI / m as f64;
        Potential::Samples((0..=m).map(|i| f(i as f64 * h)).collect())
    }

    pub fn eval(&self, x: f64) -> C64 {
        match self {
            Potential::Poly(p) => p.eval(x),
            Potential::Samples(v) => cubic_uniform(v, x),
        }
    }

    pub fn is_real(&self) -> bool {
        match self {
            Potential::Poly(p) => p.is_real(),
            Potential::Samples(v) => v.iter().all(|c| c.im == 0.0),
        }
    }

    /// `ω = ∫₀^π q(t) dt`.
    pub fn omega(&self) -> C64 {
        match self {
            Potential::Poly(p) => p.integral(PI),
            Potential::Samples(v) => {
                let h = PI / (v.len() - 1) as f64;
                crate::quadrature::simpson(v, h)
            }
        }
    }

    /// Taylor coefficients `q⁽ᵏ⁾(0)` when the potential is a polynomial.
    pub fn taylor_coefficients(&self, len: usize) -> Option<Vec<C64>> {
        match self {
            Potential::Poly(p) => Some(p.derivatives_at_zero(len)),
            Potential::Samples(_) => None,
        }
    }

    fn validate(&self) -> Result<()> {
        match self {
            Potential::Poly(p) => {
                if p.coeffs().iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
                    return Err(Error::InvalidArgument(
                        "potential coefficients must be finite".into(),
                    ));
                }
            }
            Potential::Samples(v) => {
                if v.len() < 4 {
                    return Err(Error::InvalidArgument(
                        "sampled potential needs at least 4 nodes".into(),
                    ));
                }
                if v.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
                    return Err(Error::InvalidArgument(
                        "potential samples must be finite".into(),
                    ));
                }
            }
        }
        Ok(())
    }
}

/// Four-point Lagrange interpolation on a uniform grid over `[0, π]`.
fn cubic_uniform(v: &[C64], x: f64) -> C64 {
    let m = v.len() - 1;
    let h = PI / m as f64;
    let u = (x / h).clamp(0.0, m as f64);
    let nearest = u.round();
    if (u - nearest).abs() < 1e-12 {
        return v[nearest as usize];
    }
    let base = (u.floor() as isize - 1).clamp(0, m as isize - 3) as usize;
    let t = u - base as f64;
    let l0 = -(t - 1.0) * (t - 2.0) * (t - 3.0) / 6.0;
    let l1 = t * (t - 2.0) * (t - 3.0) / 2.0;
    let l2 = -t * (t - 1.0) * (t - 3.0) / 2.0;
    let l3 = t * (t - 1.0) * (t - 2.0) / 6.0;
    v[base] * l0 + v[base + 1] * l1 + v[base + 2] * l2 + v[base + 3] * l3
}

/// One rank-one piece `f(x)·g(t)` of a separable kernel.
#[derive(Debug, Clone, PartialEq)]
pub struct SeparableTerm {
    pub f: Polynomial,
    pub g: Polynomial,
}

/// The Volterra kernel `M(x, t)` on the triangle `0 ≤ t ≤ x ≤ π`.
#[derive(Debug, Clone, PartialEq, Default)]
pub enum Kernel {
    #[default]
    Zero,
    /// `Σ c[a][b] xᵃ tᵇ`.
    Poly2(Vec<Vec<C64>>),
    /// `Σ fᵢ(x) gᵢ(t)`.
    Separable(Vec<SeparableTerm>),
}

impl Kernel {
    pub fn poly2(c: &[&[f64]]) -> Self {
        Kernel::Poly2(
            c.iter()
                .map(|row| row.iter().map(|&v| C64::new(v, 0.0)).collect())
                .collect(),
        )
    }

    /// `M(x, t) = x − t`.
    pub fn x_minus_t() -> Self {
        Kernel::poly2(&[&[0.0, -1.0], &[1.0]])
    }

    pub fn constant(c: f64) -> Self {
        Kernel::poly2(&[&[c]])
    }

    /// Rank decomposition used by the integrator. Empty for a zero kernel.
    pub fn terms(&self) -> Vec<SeparableTerm> {
        let mut out = match self {
            Kernel::Zero => Vec::new(),
            Kernel::Poly2(c) => c
                .iter()
                .enumerate()
                .map(|(a, row)| {
                    let mut f = vec![C64::new(0.0, 0.0); a + 1];
                    f[a] = C64::new(1.0, 0.0);
                    SeparableTerm {
                        f: Polynomial::new(f),
                        g: Polynomial::new(row.clone()),
                    }
                })
                .collect(),
            Kernel::Separable(terms) => terms.clone(),
        };
        out.retain(|t| !t.f.is_zero() && !t.g.is_zero());
        out
    }

    pub fn is_zero(&self) -> bool {
        self.terms().is_empty()
    }

    /// `M(x, t)`; callers only request `t ≤ x`.
    pub fn eval(&self, x: f64, t: f64) -> C64 {
        debug_assert!(t <= x + 1e-12, "kernel evaluated above the diagonal");
        match self {
            Kernel::Zero => C64::new(0.0, 0.0),
            Kernel::Poly2(c) => c
                .iter()
                .rev()
                .fold(C64::new(0.0, 0.0), |acc, row| {
                    acc * x + Polynomial::new(row.clone()).eval(t)
                }),
            Kernel::Separable(terms) => terms.iter().map(|s| s.f.eval(x) * s.g.eval(t)).sum(),
        }
    }

    pub fn is_real(&self) -> bool {
        self.terms().iter().all(|t| t.f.is_real() && t.g.is_real())
    }

    /// Crude bound on `max |M|` over the triangle, from the grid sample.
    pub fn max_abs(&self) -> f64 {
        if self.is_zero() {
            return 0.0;
        }
        let m = 32;
        let h = PI / m as f64;
        let mut best = 0.0f64;
        for i in 0..=m {
            for j in 0..=i {
                best = best.max(self.eval(i as f64 * h, j as f64 * h).norm());
            }
        }
        best
    }

    fn validate(&self) -> Result<()> {
        let ok = self.terms().iter().all(|t| {
            t.f.coeffs()
                .iter()
                .chain(t.g.coeffs())
                .all(|c| c.re.is_finite() && c.im.is_finite())
        });
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidArgument("kernel coefficients must be finite".into()))
        }
    }
}

/// The pair `(q, M)` defining `ℓ` on `[0, π]`; the adjoint `ℓ*` is obtained by
/// marching with [`crate::Orientation::Adjoint`], never by transposing data.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct OperatorConfig {
    pub potential: Potential,
    pub kernel: Kernel,
}

impl OperatorConfig {
    pub fn new(potential: Potential, kernel: Kernel) -> Result<Self> {
        potential.validate()?;
        kernel.validate()?;
        Ok(Self { potential, kernel })
    }

    pub fn zero() -> Self {
        Self::default()
    }

    /// Same kernel, different potential.
    pub fn with_potential(&self, potential: Potential) -> Self {
        Self {
            potential,
            kernel: self.kernel.clone(),
        }
    }

    pub fn is_real(&self) -> bool {
        self.potential.is_real() && self.kernel.is_real()
    }

    pub fn omega(&self) -> C64 {
        self.potential.omega()
    }

    /// Lower bound for real eigenvalues: `min q − π·max|M| − 1`.
    pub(crate) fn eigenvalue_floor(&self) -> f64 {
        let m = 256;
        let h = PI / m as f64;
        let qmin = (0..=m)
            .map(|i| self.potential.eval(i as f64 * h).re)
            .fold(f64::INFINITY, f64::min);
        qmin - PI * self.kernel.max_abs() - 1.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_horner_and_integral() {
        let p = Polynomial::from_real(&[1.0, -2.0, 3.0]);
        assert!((p.eval(2.0).re - 9.0).abs() < 1e-14);
        // ∫₀² 1 − 2t + 3t² = 2 − 4 + 8
        assert!((p.integral(2.0).re - 6.0).abs() < 1e-14);
        assert_eq!(p.degree(), Some(2));
        assert!(Polynomial::from_real(&[0.0, 0.0]).is_zero());
    }

    #[test]
    fn taylor_round_trip() {
        let p = Polynomial::from_real(&[1.0, 1.0, 0.5, 1.0 / 6.0]);
        let d = p.derivatives_at_zero(5);
        let re: Vec<f64> = d.iter().map(|c| c.re).collect();
        for (got, want) in re.iter().zip([1.0, 1.0, 1.0, 1.0, 0.0]) {
            assert!((got - want).abs() < 1e-14);
        }
        assert_eq!(Polynomial::from_derivatives_at_zero(&d).coeffs()[..4], p.coeffs()[..]);
    }

    #[test]
    fn sampled_potential_interpolates_cubics_exactly() {
        let q = Potential::sampled(40, |x| C64::new(x * x * x - x, 0.0));
        for x in [0.0, 0.013, 1.1, 2.9, PI] {
            assert!((q.eval(x).re - (x * x * x - x)).abs() < 1e-11, "x = {x}");
        }
        let omega = q.omega().re;
        let exact = PI.powi(4) / 4.0 - PI * PI / 2.0;
        assert!((omega - exact).abs() < 1e-10);
    }

    #[test]
    fn kernel_representations_agree() {
        let poly = Kernel::x_minus_t();
        let sep = Kernel::Separable(vec![
            SeparableTerm {
                f: Polynomial::from_real(&[0.0, 1.0]),
                g: Polynomial::constant(1.0),
            },
            SeparableTerm {
                f: Polynomial::constant(1.0),
                g: Polynomial::from_real(&[0.0, -1.0]),
            },
        ]);
        for (x, t) in [(1.0, 0.5), (3.0, 0.1), (2.0, 2.0)] {
            assert!((poly.eval(x, t) - C64::new(x - t, 0.0)).norm() < 1e-14);
            assert!((sep.eval(x, t) - poly.eval(x, t)).norm() < 1e-14);
        }
        assert_eq!(poly.terms().len(), 2);
        assert!(Kernel::poly2(&[&[0.0]]).is_zero());
    }

    #[test]
    fn rejects_non_finite_data() {
        let bad = Potential::poly(&[f64::NAN]);
        assert!(OperatorConfig::new(bad, Kernel::Zero).is_err());
        let k = Kernel::poly2(&[&[f64::INFINITY]]);
        assert!(OperatorConfig::new(Potential::zero(), k).is_err());
    }
}
