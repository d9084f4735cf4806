//! CSV exchange for spectra and Weyl tables.
//!
//! Spectra: header `n,k,lambda[,sqrt_lambda,center_gap]`; extra columns are
//! ignored on read. Weyl tables: `re_lambda,im_lambda,re_N,im_N,status` with
//! `status` either `ok` or `pole` (pole rows carry empty `N` fields).

use std::io::{Read, Write};

use num_complex::Complex64 as C64;

use super::{Family, Spectrum};
use crate::error::{Error, Result};
use crate::format::fmt_num;

fn writer<W: Write>(w: W) -> csv::Writer<W> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(w)
}

fn signed_sqrt(x: f64) -> f64 {
    x.signum() * x.abs().sqrt()
}

pub fn write_spectrum<W: Write>(w: W, spec: &Spectrum) -> Result<()> {
    let mut out = writer(w);
    out.write_record(["n", "k", "lambda", "sqrt_lambda", "center_gap"])?;
    let k = spec.family.index().to_string();
    for (i, &lam) in spec.values.iter().enumerate() {
        let n = i + 1;
        out.write_record([
            n.to_string(),
            k.clone(),
            fmt_num(lam),
            fmt_num(signed_sqrt(lam)),
            fmt_num(spec.center_gap(n)),
        ])?;
    }
    out.flush()?;
    Ok(())
}

fn column(headers: &csv::StringRecord, name: &str) -> Result<usize> {
    headers
        .iter()
        .position(|h| h.trim() == name)
        .ok_or_else(|| Error::Config(format!("CSV is missing the `{name}` column")))
}

fn parse_f64(field: &str, what: &str, line: usize) -> Result<f64> {
    field
        .trim()
        .parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| Error::Config(format!("line {line}: bad {what} `{field}`")))
}

/// Reads one spectrum; rows must share one `k` and list `n = 1, 2, …` in order.
pub fn read_spectrum<R: Read>(r: R) -> Result<Spectrum> {
    let mut rdr = csv::Reader::from_reader(r);
    let headers = rdr.headers()?.clone();
    let (cn, ck, cl) = (
        column(&headers, "n")?,
        column(&headers, "k")?,
        column(&headers, "lambda")?,
    );
    let mut family = None;
    let mut values = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let line = i + 2;
        let n: usize = rec[cn]
            .trim()
            .parse()
            .map_err(|_| Error::Config(format!("line {line}: bad index `{}`", &rec[cn])))?;
        let k: u8 = rec[ck]
            .trim()
            .parse()
            .map_err(|_| Error::Config(format!("line {line}: bad family `{}`", &rec[ck])))?;
        let f = Family::from_index(k).map_err(|e| Error::Config(format!("line {line}: {e}")))?;
        if *family.get_or_insert(f) != f {
            return Err(Error::Config(format!(
                "line {line}: spectrum mixes families k = 1 and k = 2"
            )));
        }
        if n != values.len() + 1 {
            return Err(Error::Config(format!(
                "line {line}: expected n = {}, found {n}",
                values.len() + 1
            )));
        }
        values.push(parse_f64(&rec[cl], "lambda", line)?);
    }
    let family = family.ok_or_else(|| Error::Config("spectrum file has no rows".into()))?;
    Ok(Spectrum::new(family, values))
}

/// One tabulated value of `N`; `value = None` marks a pole.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeylRow {
    pub lambda: C64,
    pub value: Option<C64>,
}

pub fn write_weyl_table<W: Write>(w: W, rows: &[WeylRow]) -> Result<()> {
    let mut out = writer(w);
    out.write_record(["re_lambda", "im_lambda", "re_N", "im_N", "status"])?;
    for r in rows {
        let (re, im, status) = match r.value {
            Some(v) => (fmt_num(v.re), fmt_num(v.im), "ok"),
            None => (String::new(), String::new(), "pole"),
        };
        out.write_record([fmt_num(r.lambda.re), fmt_num(r.lambda.im), re, im, status.into()])?;
    }
    out.flush()?;
    Ok(())
}

/// Reads `(λ, N)` samples, dropping pole rows. The `status` column is optional.
pub fn read_weyl_table<R: Read>(r: R) -> Result<Vec<(C64, C64)>> {
    let mut rdr = csv::Reader::from_reader(r);
    let headers = rdr.headers()?.clone();
    let cols = [
        column(&headers, "re_lambda")?,
        column(&headers, "im_lambda")?,
        column(&headers, "re_N")?,
        column(&headers, "im_N")?,
    ];
    let status = headers.iter().position(|h| h.trim() == "status");
    let mut out = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let line = i + 2;
        if let Some(c) = status {
            match rec[c].trim() {
                "ok" => {}
                "pole" => continue,
                other => {
                    return Err(Error::Config(format!("line {line}: unknown status `{other}`")))
                }
            }
        }
        let v: Vec<f64> = cols
            .iter()
            .map(|&c| parse_f64(&rec[c], "number", line))
            .collect::<Result<_>>()?;
        out.push((C64::new(v[0], v[1]), C64::new(v[2], v[3])));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spectrum_csv_layout() {
        let spec = Spectrum::new(Family::Neumann, vec![0.25, 2.25, 6.5]);
        let mut buf = Vec::new();
        write_spectrum(&mut buf, &spec).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(
            text,
            "n,k,lambda,sqrt_lambda,center_gap\n1,2,0.25,0.5,0\n2,2,2.25,1.5,0\n3,2,6.5,2.5495097568,0.0495097567964\n"
        );
        let back = read_spectrum(text.as_bytes()).unwrap();
        assert_eq!(back.family, Family::Neumann);
        assert_eq!(back.values, spec.values);
    }

    #[test]
    fn spectrum_csv_rejects_gaps_and_mixing() {
        assert!(read_spectrum("n,k,lambda\n1,1,1\n3,1,9\n".as_bytes()).is_err());
        assert!(read_spectrum("n,k,lambda\n1,1,1\n2,2,2.25\n".as_bytes()).is_err());
        assert!(read_spectrum("n,lambda\n1,1\n".as_bytes()).is_err());
        assert!(read_spectrum("n,k,lambda\n".as_bytes()).is_err());
        let s = read_spectrum("lambda,k,n,note\n1,1,1,x\n4,1,2,y\n".as_bytes()).unwrap();
        assert_eq!(s.values, vec![1.0, 4.0]);
    }

    #[test]
    fn weyl_table_round_trip() {
        let rows = [
            WeylRow {
                lambda: C64::new(-1.0, 0.0),
                value: Some(C64::new(-1.00374187319732, 0.0)),
            },
            WeylRow {
                lambda: C64::new(1.0, 0.0),
                value: None,
            },
        ];
        let mut buf = Vec::new();
        write_weyl_table(&mut buf, &rows).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(
            text,
            "re_lambda,im_lambda,re_N,im_N,status\n-1,0,-1.0037418732,0,ok\n1,0,,,pole\n"
        );
        let back = read_weyl_table(text.as_bytes()).unwrap();
        assert_eq!(back, vec![(C64::new(-1.0, 0.0), C64::new(-1.0037418732, 0.0))]);
    }
}
