//! File formats: dataset CSV, 17-significant-digit JSON, and the fitted
//! estimator manifest that references its dataset by content hash.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::ser::{Formatter, PrettyFormatter};
use sha2::{Digest, Sha256};

use crate::design::Dataset;
use crate::error::{Error, Result};
use crate::estimator::CdfEstimator;

pub const SCHEMA_VERSION: u32 = 1;
pub const LIBRARY_VERSION: &str = env!("CARGO_PKG_VERSION");

/// `v` with 17 significant digits in scientific notation.
pub fn fmt17(v: f64) -> String {
    format!("{v:.16e}")
}

struct Sig17Formatter<'a> {
    inner: PrettyFormatter<'a>,
}

impl Formatter for Sig17Formatter<'_> {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        writer.write_all(fmt17(value).as_bytes())
    }
    fn write_f32<W: ?Sized + Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        writer.write_all(fmt17(value as f64).as_bytes())
    }
    fn begin_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.begin_array(w)
    }
    fn end_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.end_array(w)
    }
    fn begin_array_value<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.inner.begin_array_value(w, first)
    }
    fn end_array_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.end_array_value(w)
    }
    fn begin_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.begin_object(w)
    }
    fn end_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.end_object(w)
    }
    fn begin_object_key<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.inner.begin_object_key(w, first)
    }
    fn end_object_key<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.end_object_key(w)
    }
    fn begin_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.begin_object_value(w)
    }
    fn end_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.end_object_value(w)
    }
}

/// Pretty JSON with every float written to 17 significant digits.
pub fn to_json_string<T: Serialize + ?Sized>(value: &T) -> Result<String> {
    let mut buf = Vec::new();
    let fmt = Sig17Formatter {
        inner: PrettyFormatter::new(),
    };
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, fmt);
    value.serialize(&mut ser)?;
    buf.push(b'\n');
    Ok(String::from_utf8(buf).expect("serde_json emits UTF-8"))
}

pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    fs::write(path, to_json_string(value)?)?;
    Ok(())
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    Ok(serde_json::from_str(&fs::read_to_string(path)?)?)
}

/// Header `x1,...,xd,y`, LF line endings.
pub fn dataset_to_csv(data: &Dataset<f64>) -> String {
    let d = data.dim();
    let mut out = String::new();
    for j in 1..=d {
        out.push_str(&format!("x{j},"));
    }
    out.push_str("y\n");
    for i in 0..data.n() {
        for &v in data.x(i) {
            out.push_str(&fmt17(v));
            out.push(',');
        }
        out.push_str(&fmt17(data.y(i)));
        out.push('\n');
    }
    out
}

pub fn write_dataset_csv(path: &Path, data: &Dataset<f64>) -> Result<()> {
    fs::write(path, dataset_to_csv(data))?;
    Ok(())
}

pub fn read_dataset_csv(path: &Path) -> Result<Dataset<f64>> {
    let file = fs::File::open(path)?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(file);
    let headers = reader.headers()?.clone();
    let cols = headers.len();
    if cols < 2 || &headers[cols - 1] != "y" {
        return Err(Error::InvalidParameter(
            "dataset CSV needs columns x1..xd,y".into(),
        ));
    }
    let d = cols - 1;
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for record in reader.records() {
        let record = record?;
        let parse = |s: &str| {
            s.trim()
                .parse::<f64>()
                .map_err(|e| Error::InvalidParameter(format!("bad number {s:?}: {e}")))
        };
        for j in 0..d {
            xs.push(parse(&record[j])?);
        }
        ys.push(parse(&record[d])?);
    }
    Dataset::new(d, xs, ys)
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes)
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

pub fn sha256_file(path: &Path) -> Result<String> {
    Ok(sha256_hex(&fs::read(path)?))
}

/// Dataset reference by path and content hash.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DataRef {
    pub path: String,
    pub sha256: String,
    pub n: usize,
    pub d: usize,
}

/// Versioned JSON document describing a fitted estimator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimatorManifest {
    pub schema: u32,
    pub kind: String,
    pub library_version: String,
    pub data: DataRef,
    pub ell: usize,
    pub h: f64,
    pub threshold: f64,
    pub beta: Option<f64>,
    pub p_lower: Option<f64>,
}

impl EstimatorManifest {
    pub const KIND: &'static str = "lpcdf-estimator";

    pub fn new(data: DataRef, est: &CdfEstimator<f64>, p_lower: Option<f64>) -> Self {
        Self {
            schema: SCHEMA_VERSION,
            kind: Self::KIND.to_string(),
            library_version: LIBRARY_VERSION.to_string(),
            data,
            ell: est.degree(),
            h: est.bandwidth(),
            threshold: est.threshold(),
            beta: est.beta(),
            p_lower,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema != SCHEMA_VERSION {
            return Err(Error::InvalidConfig(format!(
                "unsupported manifest schema {}",
                self.schema
            )));
        }
        if self.kind != Self::KIND {
            return Err(Error::InvalidConfig(format!(
                "not an estimator manifest: {}",
                self.kind
            )));
        }
        Ok(())
    }

    /// Resolves the dataset path relative to the working directory, then
    /// relative to the manifest's directory.
    fn resolve_data(&self, manifest_path: &Path) -> PathBuf {
        let direct = PathBuf::from(&self.data.path);
        if direct.exists() || direct.is_absolute() {
            return direct;
        }
        manifest_path
            .parent()
            .map(|dir| dir.join(&self.data.path))
            .unwrap_or(direct)
    }

    /// Loads the referenced dataset, checks its hash, and refits.
    pub fn load_estimator(&self, manifest_path: &Path) -> Result<CdfEstimator<f64>> {
        self.validate()?;
        let path = self.resolve_data(manifest_path);
        let actual = sha256_file(&path)?;
        if actual != self.data.sha256 {
            return Err(Error::HashMismatch {
                expected: self.data.sha256.clone(),
                actual,
            });
        }
        let data = read_dataset_csv(&path)?;
        let mut est = CdfEstimator::fit(data, self.ell, self.h, self.threshold)?;
        if let Some(beta) = self.beta {
            est = est.with_beta(beta);
        }
        Ok(est)
    }
}
