//! Matrix and channel documents.
//!
//! ```json
//! {"n": 1, "rows": [[1, 0], [0, 1]], "l": [0, 0], "alpha": [[1, 0], [0, 1]]}
//! ```
//!
//! `l` and `alpha` are present only in channel documents. Numbers are written
//! with 17 significant digits.

use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::Deserialize;
use serde_json::{Map, Value};
use symplectic_polar::{Channel64, Matrix64, Vector64};

#[derive(Debug, Deserialize)]
struct RawDoc {
    n: usize,
    rows: Vec<Vec<f64>>,
    l: Option<Vec<f64>>,
    alpha: Option<Vec<Vec<f64>>>,
    seed: Option<u64>,
}

/// A parsed input document.
#[derive(Debug, Clone)]
pub struct MatrixDoc {
    pub matrix: Matrix64,
    pub l: Option<Vector64>,
    pub alpha: Option<Matrix64>,
    pub seed: Option<u64>,
}

impl MatrixDoc {
    pub fn channel(&self) -> Result<Channel64> {
        match (&self.l, &self.alpha) {
            (Some(l), Some(alpha)) => Ok(Channel64::new(self.matrix.clone(), l.clone(), alpha.clone())?),
            _ => bail!("channel documents need rows, l and alpha"),
        }
    }
}

fn matrix(n: usize, rows: &[Vec<f64>], what: &str) -> Result<Matrix64> {
    if n == 0 {
        bail!("n must be at least 1");
    }
    if rows.len() != 2 * n {
        bail!("{what}: expected {} rows for n = {n}, found {}", 2 * n, rows.len());
    }
    if let Some((i, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != 2 * n) {
        bail!("{what}: row {i} has {} entries, expected {}", r.len(), 2 * n);
    }
    Ok(Matrix64::from_rows(rows)?)
}

pub fn parse(text: &str) -> Result<MatrixDoc> {
    let raw: RawDoc = serde_json::from_str(text).context("malformed document")?;
    let m = matrix(raw.n, &raw.rows, "rows")?;
    let l = match raw.l {
        Some(v) if v.len() != 2 * raw.n => bail!("l: expected {} entries, found {}", 2 * raw.n, v.len()),
        Some(v) => Some(Vector64::from_slice(&v)?),
        None => None,
    };
    let alpha = raw.alpha.map(|a| matrix(raw.n, &a, "alpha")).transpose()?;
    if l.is_some() != alpha.is_some() {
        bail!("channel documents need both l and alpha");
    }
    Ok(MatrixDoc { matrix: m, l, alpha, seed: raw.seed })
}

pub fn read(path: &Path) -> Result<MatrixDoc> {
    let text = fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    parse(&text).with_context(|| format!("in {}", path.display()))
}

/// A JSON number with 17 significant digits.
pub fn num(x: f64) -> Value {
    if !x.is_finite() {
        return Value::Null;
    }
    serde_json::from_str(&format!("{x:.16e}")).expect("formatted float is valid JSON")
}

pub fn nums(xs: &[f64]) -> Value {
    Value::Array(xs.iter().map(|&x| num(x)).collect())
}

pub fn rows(m: &Matrix64) -> Value {
    Value::Array(m.rows().iter().map(|r| nums(r)).collect())
}

pub fn matrix_doc(m: &Matrix64) -> Map<String, Value> {
    let mut doc = Map::new();
    doc.insert("n".into(), Value::from(m.n()));
    doc.insert("rows".into(), rows(m));
    doc
}

pub fn channel_doc(c: &Channel64) -> Map<String, Value> {
    let mut doc = matrix_doc(&c.k);
    doc.insert("l".into(), nums(&c.l.to_vec()));
    doc.insert("alpha".into(), rows(&c.alpha));
    doc
}

pub fn to_text(doc: &Map<String, Value>) -> String {
    let mut s = serde_json::to_string_pretty(doc).expect("documents serialize");
    s.push('\n');
    s
}

pub fn write(path: &Path, doc: &Map<String, Value>) -> Result<()> {
    fs::write(path, to_text(doc)).with_context(|| format!("cannot write {}", path.display()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_round_trip() {
        for x in [0.1, 1.0 / 3.0, -2.5e-300, 1e300, std::f64::consts::PI] {
            let v = num(x);
            assert_eq!(v.as_f64().unwrap(), x);
            assert_eq!(v.to_string().split('e').next().unwrap().replace(['-', '.'], "").len(), 17);
        }
    }

    #[test]
    fn rejects_bad_shapes() {
        assert!(parse(r#"{"n": 1, "rows": [[1, 0]]}"#).is_err());
        assert!(parse(r#"{"n": 1, "rows": [[1, 0], [0]]}"#).is_err());
        assert!(parse(r#"{"n": 0, "rows": []}"#).is_err());
        assert!(parse(r#"{"n": 1, "rows": [[1, 0], [0, 1]], "l": [0, 0]}"#).is_err());
        assert!(parse(r#"{"n": 1, "rows": [[1, 0], [0, 1]], "l": [0], "alpha": [[1, 0], [0, 1]]}"#).is_err());
        assert!(parse("not json").is_err());
    }

    #[test]
    fn channel_round_trip() {
        let c = Channel64::new(
            Matrix64::from_row_slice(1, &[0.1, 0.2, 0.3, 0.4]).unwrap(),
            Vector64::from_slice(&[1.0 / 3.0, -2.0]).unwrap(),
            Matrix64::identity(1).unwrap().scale(1.0 / 7.0),
        )
        .unwrap();
        let back = parse(&to_text(&channel_doc(&c))).unwrap().channel().unwrap();
        assert_eq!(back, c);
    }
}
