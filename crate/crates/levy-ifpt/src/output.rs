//! JSON and CSV emission. Floats are written with 17 significant digits so
//! every value re-parses to the same `f64`.

use std::io::{self, Write};

use levy_ifpt_core::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

/// `{:.16e}`, or `null` in JSON for non-finite values.
pub fn fmt_f64(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else if v.is_nan() {
        "nan".into()
    } else if v > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

struct SciFormatter;

impl serde_json::ser::Formatter for SciFormatter {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        writer.write_all(fmt_f64(value).as_bytes())
    }

    fn write_f32<W: ?Sized + Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(writer, value as f64)
    }
}

pub fn to_json<T: Serialize>(value: &T) -> Result<String, CliError> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, SciFormatter);
    value.serialize(&mut ser).map_err(|e| CliError::Io(format!("serialising output: {e}")))?;
    buf.push(b'\n');
    String::from_utf8(buf).map_err(|e| CliError::Io(e.to_string()))
}

/// A complex number that serialises as a plain number when it is real.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cplx(pub Complex64);

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum CplxRepr {
    Real(f64),
    Complex { re: f64, im: f64 },
}

impl Serialize for Cplx {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        if self.0.im == 0.0 {
            CplxRepr::Real(self.0.re).serialize(s)
        } else {
            CplxRepr::Complex { re: self.0.re, im: self.0.im }.serialize(s)
        }
    }
}

impl<'de> Deserialize<'de> for Cplx {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        Ok(match CplxRepr::deserialize(d)? {
            CplxRepr::Real(re) => Cplx(Complex64::new(re, 0.0)),
            CplxRepr::Complex { re, im } => Cplx(Complex64::new(re, im)),
        })
    }
}

pub fn cplx_vec(v: &[Complex64]) -> Vec<Cplx> {
    v.iter().copied().map(Cplx).collect()
}

/// CSV text with the given header; every cell is a float.
pub fn to_csv(header: &[&str], rows: impl IntoIterator<Item = Vec<f64>>) -> Result<String, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let err = |e: csv::Error| CliError::Io(format!("writing CSV: {e}"));
    w.write_record(header).map_err(err)?;
    for row in rows {
        w.write_record(row.iter().map(|&v| fmt_f64(v))).map_err(err)?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Io(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| CliError::Io(e.to_string()))
}
