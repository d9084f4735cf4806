//! The identity checks behind the `verify` subcommand.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Map, Value};

use crate::error::Error;
use crate::format::round_sig;
use crate::inverse::gap_identity_residual_with;
use crate::operator::{OperatorConfig, Polynomial, Potential};
use crate::solver::{Integrator, RungeKutta};
use crate::spectral::{
    green_identity_residual_with, sector_asymptotics_check_with, verify_adjoint_with,
    SectorTarget, SECTOR_RATE_BAND,
};

pub const GREEN_TOL: f64 = 1e-6;
pub const TRANSFER_TOL: f64 = 1e-7;
pub const WEYL_ADJOINT_TOL: f64 = 1e-7;
pub const GAP_IDENTITY_TOL: f64 = 1e-6;

pub const SECTOR_S: [f64; 4] = [5.0, 10.0, 20.0, 40.0];
pub const SECTOR_EPS: f64 = 0.3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VerifyOptions {
    pub n: usize,
    pub seed: u64,
    /// Random `(λ, µ)` pairs for the Green identity; the adjoint checks use
    /// the first `λ` of half as many.
    pub cases: usize,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self {
            n: crate::solver::DEFAULT_GRID,
            seed: 0,
            cases: 20,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Bound {
    AtMost,
    AtLeast,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub value: f64,
    pub tolerance: f64,
    pub bound: Bound,
    /// Set when the check could not be evaluated; such a check fails.
    pub error: Option<String>,
    pub detail: Value,
}

impl Check {
    pub fn passes(&self) -> bool {
        self.error.is_none()
            && match self.bound {
                Bound::AtMost => self.value <= self.tolerance,
                Bound::AtLeast => self.value >= self.tolerance,
            }
    }

    fn failed(name: &'static str, tolerance: f64, bound: Bound, e: Error) -> Self {
        Self {
            name,
            value: f64::NAN,
            tolerance,
            bound,
            error: Some(e.to_string()),
            detail: Value::Null,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyReport {
    pub options: VerifyOptions,
    pub checks: Vec<Check>,
}

impl VerifyReport {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(Check::passes)
    }

    pub fn to_json(&self) -> Value {
        let num = |x: f64| if x.is_finite() { json!(round_sig(x)) } else { Value::Null };
        let mut checks = Map::new();
        for c in &self.checks {
            let mut m = Map::new();
            m.insert("value".into(), num(c.value));
            m.insert("tolerance".into(), num(c.tolerance));
            m.insert(
                "bound".into(),
                json!(match c.bound {
                    Bound::AtMost => "at_most",
                    Bound::AtLeast => "at_least",
                }),
            );
            m.insert("status".into(), json!(if c.passes() { "PASS" } else { "FAIL" }));
            if let Some(e) = &c.error {
                m.insert("error".into(), json!(e));
            }
            if !c.detail.is_null() {
                m.insert("detail".into(), c.detail.clone());
            }
            checks.insert(c.name.into(), Value::Object(m));
        }
        json!({
            "all_pass": self.all_pass(),
            "checks": checks,
            "grid": self.options.n,
            "seed": self.options.seed,
        })
    }
}

fn random_lambda(rng: &mut ChaCha8Rng) -> C64 {
    C64::new(rng.gen_range(-4.0..20.0), rng.gen_range(-2.0..2.0))
}

fn random_unit(rng: &mut ChaCha8Rng) -> C64 {
    C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
}

/// `q + 0.3 + 0.2x` in the same representation as `q`.
pub fn perturbed_model(config: &OperatorConfig) -> OperatorConfig {
    let bump = |x: f64| C64::new(0.3 + 0.2 * x, 0.0);
    let potential = match &config.potential {
        Potential::Poly(p) => {
            let mut c = p.coeffs().to_vec();
            c.resize(c.len().max(2), C64::new(0.0, 0.0));
            c[0] += 0.3;
            c[1] += 0.2;
            Potential::Poly(Polynomial::new(c))
        }
        Potential::Samples(v) => {
            let h = PI / (v.len() - 1) as f64;
            Potential::Samples(v.iter().enumerate().map(|(i, y)| y + bump(i as f64 * h)).collect())
        }
    };
    config.with_potential(potential)
}

pub fn verify(config: &OperatorConfig, opts: &VerifyOptions) -> VerifyReport {
    verify_with(&RungeKutta, config, opts)
}

/// Runs every check with `solver`; evaluation failures turn into failed checks.
pub fn verify_with(solver: &impl Integrator, config: &OperatorConfig, opts: &VerifyOptions) -> VerifyReport {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let n = opts.n;
    let mut checks = Vec::new();

    let green = (0..opts.cases.max(1))
        .map(|_| {
            let (l, m) = (random_lambda(&mut rng), random_lambda(&mut rng));
            let (y0, z0) = ((random_unit(&mut rng), random_unit(&mut rng)), (random_unit(&mut rng), random_unit(&mut rng)));
            green_identity_residual_with(solver, config, l, m, y0, z0, n)
        })
        .try_fold(0.0f64, |acc, r| r.map(|v| acc.max(v)));
    checks.push(match green {
        Ok(v) => Check {
            name: "green_identity",
            value: v,
            tolerance: GREEN_TOL,
            bound: Bound::AtMost,
            error: None,
            detail: json!({"cases": opts.cases.max(1)}),
        },
        Err(e) => Check::failed("green_identity", GREEN_TOL, Bound::AtMost, e),
    });

    let adjoint_cases = (opts.cases / 2).max(1);
    let mut transfer = Ok((0.0f64, 0.0f64));
    for _ in 0..adjoint_cases {
        let lam = random_lambda(&mut rng);
        transfer = transfer.and_then(|(t, w)| {
            verify_adjoint_with(solver, config, lam, n)
                .map(|r| (t.max(r.transfer_s).max(r.transfer_c), w.max(r.weyl)))
        });
    }
    match transfer {
        Ok((t, w)) => {
            checks.push(Check {
                name: "transfer_identities",
                value: t,
                tolerance: TRANSFER_TOL,
                bound: Bound::AtMost,
                error: None,
                detail: json!({"cases": adjoint_cases}),
            });
            checks.push(Check {
                name: "weyl_adjoint",
                value: w,
                tolerance: WEYL_ADJOINT_TOL,
                bound: Bound::AtMost,
                error: None,
                detail: json!({"cases": adjoint_cases}),
            });
        }
        Err(e) => {
            let msg = e.to_string();
            checks.push(Check::failed("transfer_identities", TRANSFER_TOL, Bound::AtMost, Error::IllConditioned(msg.clone())));
            checks.push(Check::failed("weyl_adjoint", WEYL_ADJOINT_TOL, Bound::AtMost, Error::IllConditioned(msg)));
        }
    }

    checks.push(
        match sector_asymptotics_check_with(solver, config, PI / 2.0, &SECTOR_S, SECTOR_EPS, SectorTarget::PhiStar) {
            Ok(rep) => Check {
                name: "sector_asymptotics",
                value: rep.rate,
                tolerance: SECTOR_RATE_BAND.0,
                bound: Bound::AtLeast,
                error: None,
                detail: json!({
                    "deviations": rep.rows.iter().map(|r| round_sig(r.deviation)).collect::<Vec<_>>(),
                    "eps": SECTOR_EPS,
                    "in_band": rep.in_band,
                    "s_values": SECTOR_S,
                }),
            },
            Err(e) => Check::failed("sector_asymptotics", SECTOR_RATE_BAND.0, Bound::AtLeast, e),
        },
    );

    let model = perturbed_model(config);
    let gap = [C64::new(-4.0, 0.0), C64::new(-1.0, 0.5), C64::new(3.0, 1.0)]
        .iter()
        .map(|&l| gap_identity_residual_with(solver, config, &model, l, n))
        .try_fold(0.0f64, |acc, r| r.map(|v| acc.max(v)));
    checks.push(match gap {
        Ok(v) => Check {
            name: "gap_identity",
            value: v,
            tolerance: GAP_IDENTITY_TOL,
            bound: Bound::AtMost,
            error: None,
            detail: json!({"model": "q + 0.3 + 0.2x"}),
        },
        Err(e) => Check::failed("gap_identity", GAP_IDENTITY_TOL, Bound::AtMost, e),
    });

    VerifyReport {
        options: *opts,
        checks,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Result;
    use crate::operator::Kernel;
    use crate::solver::{integrate_adjoint, integrate_forward, SolutionTrace, SpectralPoint};

    /// Forward traces are fine; adjoint traces get a smooth relative error.
    struct SkewedAdjoint;

    impl Integrator for SkewedAdjoint {
        fn forward(&self, c: &OperatorConfig, l: SpectralPoint, y0: C64, yp0: C64, n: usize) -> Result<SolutionTrace> {
            integrate_forward(c, l, y0, yp0, n)
        }

        fn adjoint(&self, c: &OperatorConfig, l: SpectralPoint, z: C64, zp: C64, n: usize) -> Result<SolutionTrace> {
            let mut t = integrate_adjoint(c, l, z, zp, n)?;
            for (i, v) in t.values.iter_mut().enumerate() {
                *v *= 1.0 + 1e-4 * (i as f64 / n as f64);
            }
            Ok(t)
        }
    }

    #[test]
    fn zero_potential_passes_tightly() {
        let r = verify(&OperatorConfig::zero(), &VerifyOptions::default());
        assert!(r.all_pass(), "{:?}", r.to_json());
        for c in &r.checks {
            if c.bound == Bound::AtMost {
                assert!(c.value <= 1e-9, "{}: {}", c.name, c.value);
            }
        }
    }

    #[test]
    fn polynomial_with_kernel_passes() {
        let cfg = OperatorConfig::new(Potential::poly(&[0.5, -0.3, 0.1]), Kernel::x_minus_t()).unwrap();
        let r = verify(&cfg, &VerifyOptions { seed: 7, ..VerifyOptions::default() });
        assert!(r.all_pass(), "{}", r.to_json());
    }

    #[test]
    fn corrupted_solver_fails() {
        let r = verify_with(&SkewedAdjoint, &OperatorConfig::zero(), &VerifyOptions::default());
        assert!(!r.all_pass());
        let green = r.checks.iter().find(|c| c.name == "green_identity").unwrap();
        assert!(!green.passes());
        assert_eq!(r.to_json()["checks"]["green_identity"]["status"], "FAIL");
    }

    #[test]
    fn coarse_grid_fails() {
        let r = verify(&OperatorConfig::zero(), &VerifyOptions { n: 16, ..VerifyOptions::default() });
        assert!(!r.all_pass());
    }

    #[test]
    fn perturbed_model_of_samples() {
        let cfg = OperatorConfig::new(Potential::sampled(8, |x| C64::new(x * x, 0.0)), Kernel::Zero).unwrap();
        let m = perturbed_model(&cfg);
        assert!((m.potential.eval(PI / 2.0) - cfg.potential.eval(PI / 2.0) - (0.3 + 0.1 * PI)).norm() < 1e-12);
    }
}
