//! Deterministic serialization: fixed field order and 17 significant digits.

use qgraph::linalg::CMatrix;
use qgraph::{Complex64, ExtendedReal};
use serde::ser::{Serialize, SerializeSeq, Serializer};
use std::io::{self, Write};

/// Writes every float as `d.dddddddddddddddde±x`.
struct FixedDigits;

impl serde_json::ser::Formatter for FixedDigits {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        write!(writer, "{}", float(value))
    }

    fn write_f32<W: ?Sized + Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(writer, value as f64)
    }
}

/// Shared textual form of a float in json and csv output.
pub fn float(v: f64) -> String {
    if v == 0.0 {
        // drop the sign of negative zero
        "0.0000000000000000e0".into()
    } else if v.is_finite() {
        format!("{v:.16e}")
    } else {
        "null".into()
    }
}

pub fn json<T: Serialize>(value: &T) -> String {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, FixedDigits);
    value.serialize(&mut ser).expect("in-memory serialization");
    String::from_utf8(buf).expect("json is utf-8")
}

#[derive(Clone, Copy)]
pub struct Cx(pub Complex64);

impl Serialize for Cx {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        #[derive(serde::Serialize)]
        struct Parts {
            re: f64,
            im: f64,
        }
        Parts {
            re: self.0.re,
            im: self.0.im,
        }
        .serialize(s)
    }
}

/// Row-major complex matrix.
pub struct Matrix<'a>(pub &'a CMatrix<f64>);

impl Serialize for Matrix<'_> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let m = self.0;
        let mut seq = s.serialize_seq(Some(m.nrows()))?;
        for i in 0..m.nrows() {
            let row: Vec<Cx> = (0..m.ncols()).map(|j| Cx(m[(i, j)])).collect();
            seq.serialize_element(&row)?;
        }
        seq.end()
    }
}

/// A finite number, or the string `"inf"`.
#[derive(Clone, Copy)]
pub struct Ext(pub ExtendedReal<f64>);

impl Serialize for Ext {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self.0 {
            ExtendedReal::Finite(v) => s.serialize_f64(v),
            ExtendedReal::Infinite => s.serialize_str("inf"),
        }
    }
}

pub fn plain_complex(z: Complex64) -> String {
    format!(
        "{}{}{}i",
        float(z.re),
        if z.im < 0.0 { "-" } else { "+" },
        float(z.im.abs())
    )
}

pub fn plain_matrix(m: &CMatrix<f64>) -> String {
    (0..m.nrows())
        .map(|i| {
            (0..m.ncols())
                .map(|j| plain_complex(m[(i, j)]))
                .collect::<Vec<_>>()
                .join("  ")
        })
        .collect::<Vec<_>>()
        .join("\n")
}
