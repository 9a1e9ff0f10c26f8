//! Number and matrix encodings shared by the output files.

use rhor_core::CMatrix;
use serde::{Serialize, Serializer};
use serde_json::value::RawValue;

/// 17 significant digits: enough for a lossless `f64` round trip.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// Sweep tables use the shortest exact form so that `inf` and `1e-5` stay readable.
pub fn fmt_short(x: f64) -> String {
    if x.is_infinite() {
        if x > 0.0 { "inf" } else { "-inf" }.to_string()
    } else {
        format!("{x:e}")
    }
}

/// JSON number written with [`fmt_f64`]; non-finite values become `null`.
#[derive(Debug, Clone, Copy)]
pub struct Num(pub f64);

impl Serialize for Num {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        if self.0.is_finite() {
            let raw = RawValue::from_string(fmt_f64(self.0)).map_err(serde::ser::Error::custom)?;
            raw.serialize(s)
        } else {
            s.serialize_none()
        }
    }
}

pub fn nums(xs: &[f64]) -> Vec<Num> {
    xs.iter().copied().map(Num).collect()
}

/// Matrix as separate real and imaginary row arrays.
#[derive(Debug, Serialize)]
pub struct MatrixJson {
    pub re: Vec<Vec<Num>>,
    pub im: Vec<Vec<Num>>,
}

impl From<&CMatrix> for MatrixJson {
    fn from(m: &CMatrix) -> Self {
        let part = |f: fn(&rhor_core::Complex64) -> f64| {
            (0..m.rows())
                .map(|i| (0..m.cols()).map(|j| Num(f(&m[(i, j)]))).collect())
                .collect()
        };
        MatrixJson {
            re: part(|c| c.re),
            im: part(|c| c.im),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_digits_round_trip() {
        for x in [0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, f64::MIN_POSITIVE] {
            let s = fmt_f64(x);
            assert_eq!(s.parse::<f64>().unwrap(), x, "{s}");
            let json = serde_json::to_string(&Num(x)).unwrap();
            assert_eq!(serde_json::from_str::<f64>(&json).unwrap(), x);
        }
    }

    #[test]
    fn non_finite_is_null() {
        assert_eq!(serde_json::to_string(&Num(f64::INFINITY)).unwrap(), "null");
        assert_eq!(fmt_short(f64::INFINITY), "inf");
        assert_eq!(fmt_short(1e-5), "1e-5");
    }
}
