//! Run configuration for the command-line front end: one JSON document.
//!
//! ```json
//! {
//!   "operator": {
//!     "q": {"type": "poly", "data": [1.0, 1.0]},
//!     "M": {"type": "poly2", "data": [[0.0, -1.0], [1.0]]}
//!   },
//!   "grid": {"n": 2000},
//!   "spectral": {"n_max": 100, "N_prod": 2000},
//!   "ray": {"theta": 1.5707963267948966, "s0": 8.0, "ratio": 1.25, "count": 15},
//!   "inverse": {"K_max": 8, "tol": 0.001},
//!   "output": {"format": "csv", "path": null}
//! }
//! ```
//!
//! Only `operator` is required. Numbers may be real or `[re, im]` pairs.
//! `q` types: `poly` (coefficients of `x^k`) and `samples` (values on a uniform
//! grid over `[0, π]`, at least 4). `M` types: `zero`; `poly2` (`data[a][b]`
//! multiplies `x^a t^b`); `separable` (`data` is a list of `{"f": [...], "g":
//! [...]}` polynomial pairs for `Σ f(x) g(t)`).

use std::f64::consts::PI;
use std::path::Path;

use num_complex::Complex64 as C64;
use serde::Deserialize;

use crate::error::{Error, Result};
use crate::inverse::SectorRay;
use crate::operator::{Kernel, OperatorConfig, Polynomial, Potential, SeparableTerm};
use crate::solver::{DEFAULT_GRID, MIN_GRID};

#[derive(Debug, Clone, Copy, Deserialize, PartialEq)]
#[serde(untagged)]
pub enum Number {
    Real(f64),
    Complex([f64; 2]),
}

impl Number {
    pub fn value(self) -> C64 {
        match self {
            Number::Real(x) => C64::new(x, 0.0),
            Number::Complex([re, im]) => C64::new(re, im),
        }
    }

    fn finite(self) -> bool {
        let v = self.value();
        v.re.is_finite() && v.im.is_finite()
    }
}

fn values(v: &[Number]) -> Vec<C64> {
    v.iter().map(|n| n.value()).collect()
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(tag = "type", content = "data", rename_all = "lowercase")]
pub enum PotentialSpec {
    Poly(Vec<Number>),
    Samples(Vec<Number>),
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct TermSpec {
    pub f: Vec<Number>,
    pub g: Vec<Number>,
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(tag = "type", content = "data", rename_all = "lowercase")]
pub enum KernelSpec {
    Zero,
    Poly2(Vec<Vec<Number>>),
    Separable(Vec<TermSpec>),
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct OperatorSpec {
    pub q: PotentialSpec,
    #[serde(rename = "M", default = "zero_kernel")]
    pub m: KernelSpec,
}

fn zero_kernel() -> KernelSpec {
    KernelSpec::Zero
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct GridSpec {
    pub n: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self { n: DEFAULT_GRID }
    }
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct SpectralSpec {
    pub n_max: usize,
    #[serde(rename = "N_prod")]
    pub n_prod: usize,
}

impl Default for SpectralSpec {
    fn default() -> Self {
        Self {
            n_max: 100,
            n_prod: 2000,
        }
    }
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct RaySpec {
    pub theta: f64,
    pub s0: f64,
    pub ratio: f64,
    pub count: usize,
}

impl Default for RaySpec {
    fn default() -> Self {
        Self {
            theta: PI / 2.0,
            s0: 8.0,
            ratio: 1.25,
            count: 15,
        }
    }
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct InverseSpec {
    #[serde(rename = "K_max")]
    pub k_max: usize,
    /// Extrapolation residual above which a coefficient is flagged.
    pub tol: f64,
}

impl Default for InverseSpec {
    fn default() -> Self {
        Self { k_max: 8, tol: 1e-3 }
    }
}

#[derive(Debug, Clone, Copy, Deserialize, PartialEq, Eq, Default)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, Deserialize, PartialEq, Default)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSpec {
    pub format: OutputFormat,
    pub path: Option<String>,
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub operator: OperatorSpec,
    #[serde(default)]
    pub grid: GridSpec,
    #[serde(default)]
    pub spectral: SpectralSpec,
    #[serde(default)]
    pub ray: RaySpec,
    #[serde(default)]
    pub inverse: InverseSpec,
    #[serde(default)]
    pub output: OutputSpec,
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: RunConfig =
            serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::Config(format!("{what} must be finite")));
        let all_finite = |v: &[Number]| v.iter().all(|n| n.finite());
        match &self.operator.q {
            PotentialSpec::Poly(c) if !all_finite(c) => return bad("q coefficients"),
            PotentialSpec::Samples(c) if !all_finite(c) => return bad("q samples"),
            PotentialSpec::Samples(c) if c.len() < 4 => {
                return Err(Error::Config("q samples need at least 4 values".into()))
            }
            _ => {}
        }
        match &self.operator.m {
            KernelSpec::Poly2(rows) if !rows.iter().all(|r| all_finite(r)) => {
                return bad("M coefficients")
            }
            KernelSpec::Separable(t) if !t.iter().all(|t| all_finite(&t.f) && all_finite(&t.g)) => {
                return bad("M factors")
            }
            _ => {}
        }
        if self.grid.n < MIN_GRID {
            return Err(Error::Config(format!(
                "grid.n = {} is below the minimum {MIN_GRID}",
                self.grid.n
            )));
        }
        let r = &self.ray;
        if !(r.theta > 0.0 && r.theta < PI) {
            return Err(Error::Config(format!("ray.theta = {} is outside (0, π)", r.theta)));
        }
        if !(r.s0.is_finite() && r.s0 > 0.0 && r.ratio.is_finite() && r.ratio > 1.0 && r.count >= 1) {
            return Err(Error::Config(
                "ray needs finite s0 > 0, ratio > 1 and count ≥ 1".into(),
            ));
        }
        if self.spectral.n_max == 0 || self.spectral.n_prod == 0 {
            return Err(Error::Config("spectral.n_max and N_prod must be positive".into()));
        }
        if !(self.inverse.tol.is_finite() && self.inverse.tol > 0.0) {
            return Err(Error::Config("inverse.tol must be finite and positive".into()));
        }
        Ok(())
    }

    pub fn potential(&self) -> Potential {
        match &self.operator.q {
            PotentialSpec::Poly(c) => Potential::Poly(Polynomial::new(values(c))),
            PotentialSpec::Samples(v) => Potential::Samples(values(v)),
        }
    }

    pub fn kernel(&self) -> Kernel {
        match &self.operator.m {
            KernelSpec::Zero => Kernel::Zero,
            KernelSpec::Poly2(rows) => Kernel::Poly2(rows.iter().map(|r| values(r)).collect()),
            KernelSpec::Separable(terms) => Kernel::Separable(
                terms
                    .iter()
                    .map(|t| SeparableTerm {
                        f: Polynomial::new(values(&t.f)),
                        g: Polynomial::new(values(&t.g)),
                    })
                    .collect(),
            ),
        }
    }

    pub fn operator(&self) -> Result<OperatorConfig> {
        OperatorConfig::new(self.potential(), self.kernel())
            .map_err(|e| Error::Config(e.to_string()))
    }

    pub fn sector_ray(&self) -> Result<SectorRay> {
        SectorRay::geometric(self.ray.theta, self.ray.s0, self.ray.ratio, self.ray.count)
            .map_err(|e| Error::Config(e.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_gets_defaults() {
        let c = RunConfig::from_json(r#"{"operator": {"q": {"type": "poly", "data": [1.0, [0.0, 2.0]]}}}"#).unwrap();
        assert_eq!(c.grid.n, 2000);
        assert_eq!(c.inverse.k_max, 8);
        assert_eq!(c.kernel(), Kernel::Zero);
        assert_eq!(c.potential().eval(1.0), C64::new(1.0, 2.0));
        assert_eq!(c.sector_ray().unwrap(), SectorRay::default());
    }

    #[test]
    fn kernels_parse() {
        let c = RunConfig::from_json(
            r#"{"operator": {"q": {"type": "samples", "data": [0, 1, 2, 3]},
                "M": {"type": "separable", "data": [{"f": [0, 1], "g": [1]}]}}}"#,
        )
        .unwrap();
        assert!((c.kernel().eval(2.0, 1.0).re - 2.0).abs() < 1e-15);
        let c = RunConfig::from_json(
            r#"{"operator": {"q": {"type": "poly", "data": []}, "M": {"type": "poly2", "data": [[0, -1], [1]]}}}"#,
        )
        .unwrap();
        assert!((c.kernel().eval(2.0, 0.5).re - 1.5).abs() < 1e-15);
    }

    #[test]
    fn invalid_configs() {
        for text in [
            r#"{}"#,
            r#"{"operator": {"q": {"type": "cubic", "data": []}}}"#,
            r#"{"operator": {"q": {"type": "poly", "data": []}}, "grid": {"n": 8}}"#,
            r#"{"operator": {"q": {"type": "poly", "data": []}}, "ray": {"theta": 3.5}}"#,
            r#"{"operator": {"q": {"type": "samples", "data": [1, 2]}}}"#,
            r#"{"operator": {"q": {"type": "poly", "data": []}}, "extra": 1}"#,
        ] {
            assert!(matches!(RunConfig::from_json(text), Err(Error::Config(_))), "{text}");
        }
    }
}
