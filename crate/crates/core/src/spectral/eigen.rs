use std::f64::consts::PI;

use rayon::prelude::*;

use super::{CharFunction, Family};
use crate::error::{Error, Result};
use crate::fit::least_squares;
use crate::operator::OperatorConfig;
use crate::solver::DEFAULT_GRID;

/// An ordered eigenvalue sequence `λ₁ₖ < λ₂ₖ < …` for one boundary family.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    pub family: Family,
    pub values: Vec<f64>,
    /// Estimate of `ω = ∫₀^π q`; drives bracketing and the product tail.
    pub omega_hint: Option<f64>,
}

impl Spectrum {
    pub fn new(family: Family, values: Vec<f64>) -> Self {
        Self {
            family,
            values,
            omega_hint: None,
        }
    }

    pub fn with_omega(mut self, omega: f64) -> Self {
        self.omega_hint = Some(omega);
        self
    }

    /// `{cₙ² + c}`, the exact spectrum of the constant potential `q ≡ c`.
    pub fn constant_potential(family: Family, len: usize, c: f64) -> Self {
        let values = (1..=len).map(|n| family.center(n).powi(2) + c).collect();
        Self::new(family, values).with_omega(c * PI)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// `λₙ` for `n ≥ 1`, falling back to the asymptotic model `cₙ² + ω/π`
    /// past the stored entries when `ω` is known.
    pub fn value_or_model(&self, n: usize) -> Option<f64> {
        self.values
            .get(n - 1)
            .copied()
            .or_else(|| self.omega_hint.map(|w| self.family.center(n).powi(2) + w / PI))
    }

    /// `√λₙ − cₙ`, with `√λ` taken as `sign(λ)·√|λ|`.
    pub fn center_gap(&self, n: usize) -> f64 {
        let l = self.values[n - 1];
        l.signum() * l.abs().sqrt() - self.family.center(n)
    }
}

#[derive(Debug, Clone)]
pub struct EigenOptions {
    pub grid: usize,
    /// Richardson-extrapolate the characteristic function from grids `n`, `2n`.
    pub extrapolate: bool,
    pub rel_tol: f64,
    pub samples_per_cell: usize,
    pub omega_hint: Option<f64>,
}

impl Default for EigenOptions {
    fn default() -> Self {
        Self {
            grid: DEFAULT_GRID,
            extrapolate: true,
            rel_tol: 1e-10,
            samples_per_cell: 8,
            omega_hint: None,
        }
    }
}

/// The first `n_max` real zeros of `Δₖ` with default options.
pub fn eigenvalues(config: &OperatorConfig, family: Family, n_max: usize) -> Result<Spectrum> {
    eigenvalues_with(config, family, n_max, &EigenOptions::default())
}

pub fn eigenvalues_with(
    config: &OperatorConfig,
    family: Family,
    n_max: usize,
    opts: &EigenOptions,
) -> Result<Spectrum> {
    if !config.is_real() {
        return Err(Error::InvalidArgument(
            "eigenvalue enumeration requires real-valued q and M".into(),
        ));
    }
    if n_max == 0 {
        return Err(Error::InvalidArgument("n_max must be positive".into()));
    }
    let ch = if opts.extrapolate {
        CharFunction::extrapolated(config, family, opts.grid)?
    } else {
        CharFunction::plain(config, family, opts.grid)?
    };
    let floor = config.eigenvalue_floor();
    let shift = opts.omega_hint.map_or(0.0, |w| w / PI);

    let roots = match enumerate(&ch, n_max, floor, shift, opts) {
        Ok(roots) => roots,
        Err(partial) => {
            // Second pass with the shift re-estimated from what the first pass found.
            let refit = partial.shift_estimate(family).ok_or_else(|| partial.error(family, n_max))?;
            enumerate(&ch, n_max, floor, refit, opts).map_err(|p| p.error(family, n_max))?
        }
    };
    let mut spectrum = Spectrum::new(family, roots);
    spectrum.omega_hint = if n_max >= 20 {
        Some(fit_omega(&spectrum)?.omega)
    } else {
        let partial = Partial {
            roots: spectrum.values.clone(),
            suspect: 0,
        };
        partial.shift_estimate(family).map(|s| s * PI)
    };
    Ok(spectrum)
}

struct Partial {
    roots: Vec<f64>,
    suspect: usize,
}

impl Partial {
    fn shift_estimate(&self, family: Family) -> Option<f64> {
        if self.roots.is_empty() {
            return None;
        }
        let mut d: Vec<f64> = self
            .roots
            .iter()
            .enumerate()
            .skip(self.roots.len() / 2)
            .map(|(i, l)| l - family.center(i + 1).powi(2))
            .collect();
        d.sort_by(f64::total_cmp);
        Some(d[d.len() / 2])
    }

    fn error(&self, family: Family, n_max: usize) -> Error {
        Error::EnumerationIncomplete {
            k: family.index(),
            index: self.suspect,
            expected: n_max,
            found: self.roots.len(),
        }
    }
}

/// Cell `n` spans `[eₙ₋₁, eₙ]` with `e₀` the global floor and
/// `eₙ = (cₙ₊₁ − ½)² + shift`; the sign changes sampled over all cells both
/// bracket the roots and certify the count.
fn enumerate(
    ch: &CharFunction,
    n_max: usize,
    floor: f64,
    shift: f64,
    opts: &EigenOptions,
) -> std::result::Result<Vec<f64>, Partial> {
    let family = ch.family();
    let mut edges = vec![floor];
    for n in 1..=n_max {
        let e = (family.center(n + 1) - 0.5).powi(2) + shift;
        let prev = *edges.last().unwrap();
        edges.push(e.max(prev));
    }

    let mut points: Vec<(f64, usize)> = Vec::new();
    for cell in 1..=n_max {
        let (a, b) = (edges[cell - 1], edges[cell]);
        if b <= a {
            continue;
        }
        let spacing = 2.0 * family.center(cell).max(1.0);
        let count = ((opts.samples_per_cell as f64) * (b - a) / spacing)
            .ceil()
            .clamp(opts.samples_per_cell as f64, 400.0) as usize;
        for j in 0..count {
            points.push((a + (b - a) * j as f64 / count as f64, cell));
        }
    }
    points.push((edges[n_max], n_max));

    let values: Vec<std::result::Result<f64, ()>> = points
        .par_iter()
        .map(|(l, _)| ch.eval_real(*l).map_err(|_| ()))
        .collect();

    let mut brackets: Vec<(f64, f64, f64, f64, usize)> = Vec::new();
    let mut per_cell = vec![0usize; n_max + 1];
    for j in 0..points.len() - 1 {
        let (Ok(fa), Ok(fb)) = (values[j], values[j + 1]) else {
            continue;
        };
        let (a, cell) = points[j];
        let b = points[j + 1].0;
        if fa == 0.0 || fa.signum() != fb.signum() && fb != 0.0 {
            brackets.push((a, b, fa, fb, cell));
            per_cell[cell] += 1;
        }
    }
    if let Ok(fl) = values[points.len() - 1] {
        if fl == 0.0 {
            let (l, cell) = points[points.len() - 1];
            brackets.push((l, l, 0.0, 0.0, cell));
            per_cell[cell] += 1;
        }
    }

    let roots: Vec<f64> = brackets
        .par_iter()
        .map(|&(a, b, fa, fb, _)| refine(ch, a, b, fa, fb, opts.rel_tol))
        .collect();

    if roots.len() == n_max {
        Ok(roots)
    } else {
        let suspect = (1..=n_max).find(|&c| per_cell[c] != 1).unwrap_or(n_max);
        Err(Partial { roots, suspect })
    }
}

/// Bisection down to a narrow bracket, then secant–Newton polish kept inside
/// the bracket.
fn refine(ch: &CharFunction, mut a: f64, mut b: f64, mut fa: f64, mut fb: f64, rel_tol: f64) -> f64 {
    if fa == 0.0 {
        return a;
    }
    if fb == 0.0 {
        return b;
    }
    let scale = a.abs().max(b.abs()).max(1.0);
    let eval = |x: f64| ch.eval_real(x).unwrap_or(f64::NAN);
    while b - a > 1e-6 * scale {
        let m = 0.5 * (a + b);
        let fm = eval(m);
        if fm == 0.0 {
            return m;
        }
        if fm.signum() == fa.signum() {
            a = m;
            fa = fm;
        } else {
            b = m;
            fb = fm;
        }
    }
    // Illinois steps; `fa`, `fb` are damped copies, so the best true residual
    // is tracked separately.
    let mut best = if fa.abs() <= fb.abs() { (a, fa.abs()) } else { (b, fb.abs()) };
    let mut x = 0.5 * (a + b);
    for _ in 0..40 {
        let next = b - fb * (b - a) / (fb - fa);
        let next = if next.is_finite() && next >= a && next <= b {
            next
        } else {
            0.5 * (a + b)
        };
        let fx = eval(next);
        if fx == 0.0 {
            return next;
        }
        if fx.abs() < best.1 {
            best = (next, fx.abs());
        }
        if fx.signum() == fa.signum() {
            a = next;
            fa = fx;
            fb *= 0.5;
        } else {
            b = next;
            fb = fx;
            fa *= 0.5;
        }
        let step = (next - x).abs();
        x = next;
        if step <= rel_tol * scale || b - a <= rel_tol * scale {
            break;
        }
    }
    best.0
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OmegaFit {
    pub omega: f64,
    /// Max abs misfit of the two-term model over the fitted indices.
    pub residual: f64,
}

/// Fits `2π·cₙ·(√λₙ − cₙ) = ω + b/cₙ²` over the top half of the index range.
pub fn fit_omega(spec: &Spectrum) -> Result<OmegaFit> {
    let start = if spec.len() >= 20 { spec.len() / 2 } else { 0 };
    let (mut cols_c, mut y) = (Vec::new(), Vec::new());
    for (i, &l) in spec.values.iter().enumerate().skip(start) {
        let c = spec.family.center(i + 1);
        if l <= 0.0 || c <= 0.0 {
            continue;
        }
        y.push(2.0 * PI * c * (l.sqrt() - c));
        cols_c.push(1.0 / (c * c));
    }
    match y.len() {
        0 => Err(Error::InvalidArgument(
            "spectrum has no positive eigenvalues to fit".into(),
        )),
        1 | 2 => {
            let mean = y.iter().sum::<f64>() / y.len() as f64;
            let residual = y.iter().map(|v| (v - mean).abs()).fold(0.0, f64::max);
            Ok(OmegaFit {
                omega: mean,
                residual,
            })
        }
        m => {
            let (c, residual) = least_squares(&[vec![1.0; m], cols_c], &y);
            Ok(OmegaFit {
                omega: c[0],
                residual,
            })
        }
    }
}
