use std::f64::consts::PI;

use integro_spectral::format::{fmt_num, round_sig};
use integro_spectral::inverse::{
    coefficient_errors, gap_identity_residual, reconstruct, weyl_gap, ExtractOptions, SectorRay,
    TaylorPotential,
};
use integro_spectral::spectral::io::{read_spectrum, read_weyl_table, write_spectrum, write_weyl_table, WeylRow};
use integro_spectral::spectral::{
    eigenvalues, green_identity_residual, verify_adjoint, Family, Spectrum, WeylFunction,
};
use integro_spectral::{Kernel, OperatorConfig, Polynomial, Potential, C64};
use proptest::prelude::*;

fn coeffs(len: usize, r: f64) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-r..r, len)
}

fn kernel() -> impl Strategy<Value = Kernel> {
    (coeffs(3, 1.0), coeffs(2, 1.0), coeffs(1, 1.0))
        .prop_map(|(a, b, c)| Kernel::poly2(&[&a, &b, &c]))
}

/// Off the real axis, where `Δ₁` has no zeros.
fn lambda() -> impl Strategy<Value = C64> {
    (-4.0..20.0f64, 0.2..2.0f64, any::<bool>())
        .prop_map(|(re, im, up)| C64::new(re, if up { im } else { -im }))
}

fn unit() -> impl Strategy<Value = C64> {
    (-1.0..1.0f64, -1.0..1.0f64).prop_map(|(a, b)| C64::new(a, b))
}

fn operator() -> impl Strategy<Value = OperatorConfig> {
    (coeffs(4, 2.0), kernel())
        .prop_map(|(q, m)| OperatorConfig::new(Potential::poly(&q), m).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn green_identity_holds(cfg in operator(), l in lambda(), m in lambda(), y in (unit(), unit()), z in (unit(), unit())) {
        let r = green_identity_residual(&cfg, l, m, y, z, 2000).unwrap();
        prop_assert!(r <= 1e-6, "residual {r}");
    }

    #[test]
    fn adjoint_identities_hold(cfg in operator(), l in lambda()) {
        let r = verify_adjoint(&cfg, l, 2000).unwrap();
        prop_assert!(r.transfer_s.max(r.transfer_c) <= 1e-7 && r.weyl <= 1e-7, "{r:?}");
    }

    #[test]
    fn gap_identity_holds(q in coeffs(3, 1.5), qm in coeffs(2, 1.5), m in kernel(), l in lambda()) {
        let target = OperatorConfig::new(Potential::poly(&q), m.clone()).unwrap();
        let model = OperatorConfig::new(Potential::poly(&qm), m).unwrap();
        let r = gap_identity_residual(&target, &model, l, 2000).unwrap();
        prop_assert!(r <= 1e-6, "residual {r}");
    }

    #[test]
    fn taylor_round_trip(c in coeffs(6, 10.0)) {
        let derivs: Vec<C64> = c.iter().map(|v| C64::new(*v, 0.0)).collect();
        let back = Polynomial::from_derivatives_at_zero(&derivs).derivatives_at_zero(6);
        for (a, b) in back.iter().zip(&derivs) {
            prop_assert!((a - b).norm() <= 1e-12 * b.norm().max(1.0));
        }
    }

    #[test]
    fn printed_numbers_parse_to_rounded_value(x in prop::num::f64::NORMAL) {
        let text = fmt_num(x);
        prop_assert_eq!(text.parse::<f64>().unwrap(), round_sig(x));
        prop_assert_eq!(round_sig(round_sig(x)), round_sig(x));
    }

    #[test]
    fn spectrum_csv_round_trip(gaps in prop::collection::vec(0.01..50.0f64, 1..40), start in -5.0..5.0f64) {
        let values: Vec<f64> = gaps.iter().scan(start, |acc, g| { *acc += g; Some(*acc) }).collect();
        let spec = Spectrum::new(Family::Neumann, values.clone());
        let mut buf = Vec::new();
        write_spectrum(&mut buf, &spec).unwrap();
        let back = read_spectrum(buf.as_slice()).unwrap();
        prop_assert_eq!(back.family, Family::Neumann);
        let want: Vec<f64> = values.iter().map(|v| round_sig(*v)).collect();
        prop_assert_eq!(back.values, want);
    }

    #[test]
    fn weyl_table_round_trip(rows in prop::collection::vec((unit(), prop::option::of(unit())), 1..20)) {
        let rows: Vec<WeylRow> = rows.into_iter().map(|(lambda, value)| WeylRow { lambda: lambda * 30.0, value }).collect();
        let mut buf = Vec::new();
        write_weyl_table(&mut buf, &rows).unwrap();
        let back = read_weyl_table(buf.as_slice()).unwrap();
        let kept: Vec<&WeylRow> = rows.iter().filter(|r| r.value.is_some()).collect();
        prop_assert_eq!(back.len(), kept.len());
        let r = |c: C64| C64::new(round_sig(c.re), round_sig(c.im));
        for ((l, v), row) in back.iter().zip(kept) {
            prop_assert_eq!(*l, r(row.lambda));
            prop_assert_eq!(*v, r(row.value.unwrap()));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn constant_shift_moves_spectrum(q in coeffs(2, 1.0), c in -2.0..2.0f64) {
        let base = OperatorConfig::new(Potential::poly(&q), Kernel::Zero).unwrap();
        let mut shifted_q = q.clone();
        shifted_q[0] += c;
        let shifted = OperatorConfig::new(Potential::poly(&shifted_q), Kernel::Zero).unwrap();
        let a = eigenvalues(&base, Family::Dirichlet, 6).unwrap();
        let b = eigenvalues(&shifted, Family::Dirichlet, 6).unwrap();
        for (x, y) in a.values.iter().zip(&b.values) {
            prop_assert!((y - x - c).abs() <= 1e-8 * y.abs().max(1.0), "{x} + {c} vs {y}");
        }
    }

    /// `q̂ = c·x^k/k!` gives `|N̂(−s²)|·(2s)^{k+1} → |c|`.
    #[test]
    fn gap_grows_with_the_first_nonzero_order(k in 0usize..3, c in 0.5..2.0f64, sign in any::<bool>()) {
        let c = if sign { c } else { -c };
        let mut derivs = vec![C64::new(0.0, 0.0); k + 1];
        derivs[k] = C64::new(c, 0.0);
        let target = TaylorPotential::new(derivs);
        let w = WeylFunction::forward(OperatorConfig::new(target.to_potential(), Kernel::Zero).unwrap());
        for s in [20.0f64, 40.0] {
            let gap = weyl_gap(&w, &TaylorPotential::zero(), &Kernel::Zero, C64::new(-s * s, 0.0)).unwrap();
            let scaled = gap.norm() * (2.0 * s).powi(k as i32 + 1);
            prop_assert!(scaled > 0.5 * c.abs() && scaled < 2.0 * c.abs(), "k = {k}, s = {s}: {scaled}");
        }
    }

    #[test]
    fn linear_potentials_round_trip(q in coeffs(2, 1.0), m in kernel()) {
        let w = WeylFunction::forward(OperatorConfig::new(Potential::poly(&q), m.clone()).unwrap());
        let rec = reconstruct(&w, &m, 2, &SectorRay::default(), 1e-3, &ExtractOptions::default()).unwrap();
        let truth: Vec<C64> = q.iter().map(|v| C64::new(*v, 0.0)).collect();
        let err = coefficient_errors(&rec.potential.coeffs, &truth);
        prop_assert!(err.len() == 3, "{:?}", rec.warnings);
        prop_assert!(err[0] <= 0.05 && err[1] <= 0.05 && err[2] <= 0.05, "{err:?}");
    }

    #[test]
    fn ray_angle_does_not_change_coefficients(q in coeffs(2, 1.0)) {
        let w = WeylFunction::forward(OperatorConfig::new(Potential::poly(&q), Kernel::Zero).unwrap());
        let opts = ExtractOptions::default();
        let a = reconstruct(&w, &Kernel::Zero, 1, &SectorRay::default(), 1e-3, &opts).unwrap();
        let b = reconstruct(&w, &Kernel::Zero, 1, &SectorRay::geometric(PI / 3.0, 8.0, 1.25, 15).unwrap(), 1e-3, &opts).unwrap();
        for k in 0..2 {
            let gap = (a.potential.coeffs[k] - b.potential.coeffs[k]).norm();
            let allowed = a.potential.uncertainty[k] + b.potential.uncertainty[k];
            prop_assert!(gap <= allowed.max(1e-9), "k = {k}: {gap} > {allowed}");
        }
    }
}
