use num_complex::Complex64 as C64;
use serde_json::{json, Map, Value};

use super::Reconstruction;
use crate::format::round_sig;

fn num(x: f64) -> Value {
    if x.is_finite() {
        json!(round_sig(x))
    } else {
        Value::Null
    }
}

/// Real numbers when every imaginary part vanishes, `[re, im]` pairs otherwise.
fn complex_list(v: &[C64]) -> Value {
    if v.iter().all(|c| c.im == 0.0) {
        Value::Array(v.iter().map(|c| num(c.re)).collect())
    } else {
        Value::Array(v.iter().map(|c| json!([num(c.re), num(c.im)])).collect())
    }
}

/// `|q_k − t_k| / max(1, |t_k|)`: absolute for small coefficients, relative
/// for large ones. Missing truth entries count as zero.
pub fn coefficient_errors(coeffs: &[C64], truth: &[C64]) -> Vec<f64> {
    coeffs
        .iter()
        .enumerate()
        .map(|(k, q)| {
            let t = truth.get(k).copied().unwrap_or_default();
            (q - t).norm() / t.norm().max(1.0)
        })
        .collect()
}

/// The reconstruction report; object keys come out sorted.
pub fn report_json(rec: &Reconstruction, truth: Option<&[C64]>) -> Value {
    let mut m = Map::new();
    m.insert("coeffs".into(), complex_list(&rec.potential.coeffs));
    m.insert(
        "fit_residuals".into(),
        Value::Array(rec.steps.iter().map(|s| num(s.fit_residual)).collect()),
    );
    m.insert(
        "points_used".into(),
        Value::Array(rec.steps.iter().map(|s| json!(s.s_used.len())).collect()),
    );
    m.insert(
        "radius_estimate".into(),
        rec.potential.radius_estimate.map_or(Value::Null, num),
    );
    m.insert(
        "ray".into(),
        json!({
            "theta": num(rec.ray.theta),
            "s_values": rec.ray.s_values.iter().map(|s| num(*s)).collect::<Vec<_>>(),
        }),
    );
    m.insert(
        "uncertainties".into(),
        Value::Array(rec.potential.uncertainty.iter().map(|u| num(*u)).collect()),
    );
    m.insert("warnings".into(), json!(rec.warnings));
    if let Some(truth) = truth {
        let len = rec.potential.coeffs.len();
        let t: Vec<C64> = (0..len).map(|k| truth.get(k).copied().unwrap_or_default()).collect();
        m.insert("truth".into(), complex_list(&t));
        m.insert(
            "coeff_errors".into(),
            Value::Array(
                coefficient_errors(&rec.potential.coeffs, &t)
                    .into_iter()
                    .map(num)
                    .collect(),
            ),
        );
    }
    Value::Object(m)
}
