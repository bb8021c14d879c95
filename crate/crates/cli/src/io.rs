//! File formats: parameter checkpoints, dense-state exports and CSV tables.
//!
//! Binary files start with a plain-text header: a magic line, `key value`
//! lines and a closing `end` line. The payload that follows is the flat
//! complex array as interleaved re/im little-endian `f64`.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use quench_core::ansatz::{Ansatz, Network, Shape};
use quench_core::c64;
use quench_core::oracle::DenseState;

use crate::error::{CliError, CliResult};

pub const CHECKPOINT_MAGIC: &str = "quench-checkpoint v1";
pub const DENSE_MAGIC: &str = "quench-dense v1";

/// Writes to a temporary sibling, syncs, then renames over `path`.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> CliResult<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    let name = path.file_name().ok_or_else(|| CliError::Format(format!("{} has no file name", path.display())))?;
    let tmp = dir.join(format!(".{}.tmp{}", name.to_string_lossy(), std::process::id()));
    let result = (|| {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
        fs::rename(&tmp, path)
    })();
    if let Err(e) = result {
        let _ = fs::remove_file(&tmp);
        return Err(CliError::io(path, e));
    }
    Ok(())
}

/// Header fields of a binary complex-array file.
pub type Header = BTreeMap<String, String>;

pub fn encode_complex(magic: &str, header: &[(&str, String)], values: &[c64]) -> Vec<u8> {
    let mut out = String::new();
    out.push_str(magic);
    out.push('\n');
    for (k, v) in header {
        out.push_str(k);
        out.push(' ');
        out.push_str(v);
        out.push('\n');
    }
    out.push_str("end\n");
    let mut bytes = out.into_bytes();
    bytes.reserve(values.len() * 16);
    for z in values {
        bytes.extend_from_slice(&z.re.to_le_bytes());
        bytes.extend_from_slice(&z.im.to_le_bytes());
    }
    bytes
}

pub fn decode_complex(magic: &str, bytes: &[u8]) -> CliResult<(Header, Vec<c64>)> {
    let bad = |m: &str| CliError::Format(m.to_string());
    let mut header = Header::new();
    let mut at = 0;
    let mut first = true;
    loop {
        let nl = bytes[at..].iter().position(|&b| b == b'\n').ok_or_else(|| bad("truncated header"))?;
        let line = std::str::from_utf8(&bytes[at..at + nl]).map_err(|_| bad("header is not UTF-8"))?;
        at += nl + 1;
        if first {
            if line != magic {
                return Err(bad(&format!("expected `{magic}`, found `{line}`")));
            }
            first = false;
            continue;
        }
        if line == "end" {
            break;
        }
        let (k, v) = line.split_once(' ').ok_or_else(|| bad(&format!("malformed header line `{line}`")))?;
        header.insert(k.to_string(), v.to_string());
    }
    let payload = &bytes[at..];
    if payload.len() % 16 != 0 {
        return Err(bad("payload is not a whole number of complex values"));
    }
    let values = payload
        .chunks_exact(16)
        .map(|c| {
            let re = f64::from_le_bytes(c[..8].try_into().expect("8 bytes"));
            let im = f64::from_le_bytes(c[8..].try_into().expect("8 bytes"));
            c64::new(re, im)
        })
        .collect();
    Ok((header, values))
}

fn field<'a>(h: &'a Header, key: &str) -> CliResult<&'a str> {
    h.get(key).map(String::as_str).ok_or_else(|| CliError::Format(format!("header lacks `{key}`")))
}

fn field_parse<T: std::str::FromStr>(h: &Header, key: &str) -> CliResult<T> {
    field(h, key)?.parse().map_err(|_| CliError::Format(format!("header field `{key}` is malformed")))
}

pub fn shape_to_text(shape: &Shape) -> String {
    match shape {
        Shape::Rbm { sites, hidden } => format!("rbm {sites} {hidden}"),
        Shape::Fnn { layers } => {
            let l: Vec<String> = layers.iter().map(usize::to_string).collect();
            format!("fnn {}", l.join(" "))
        }
    }
}

pub fn shape_from_text(text: &str) -> CliResult<Shape> {
    let mut parts = text.split_whitespace();
    let kind = parts.next().unwrap_or("");
    let nums: Vec<usize> = parts
        .map(|p| p.parse().map_err(|_| CliError::Format(format!("bad shape `{text}`"))))
        .collect::<CliResult<_>>()?;
    let shape = match (kind, nums.as_slice()) {
        ("rbm", &[sites, hidden]) => Shape::Rbm { sites, hidden },
        ("fnn", l) if l.len() >= 2 => Shape::Fnn { layers: l.to_vec() },
        _ => return Err(CliError::Format(format!("bad shape `{text}`"))),
    };
    shape.validate()?;
    Ok(shape)
}

/// Network parameters plus the position in the run. Sampling seeds are
/// derived from `(seed, step)`, so the pair is the full RNG state.
#[derive(Clone, Debug, PartialEq)]
pub struct Checkpoint {
    pub network: Network,
    pub step: usize,
    pub time: f64,
    pub seed: u64,
}

impl Checkpoint {
    pub fn encode(&self) -> Vec<u8> {
        let header = [
            ("shape", shape_to_text(&self.network.shape())),
            ("params", self.network.n_params().to_string()),
            ("step", self.step.to_string()),
            ("time", format!("{:?}", self.time)),
            ("seed", self.seed.to_string()),
        ];
        encode_complex(CHECKPOINT_MAGIC, &header, self.network.params())
    }

    pub fn decode(bytes: &[u8]) -> CliResult<Self> {
        let (h, values) = decode_complex(CHECKPOINT_MAGIC, bytes)?;
        let shape = shape_from_text(field(&h, "shape")?)?;
        let n: usize = field_parse(&h, "params")?;
        if n != values.len() || n != shape.n_params() {
            return Err(CliError::Format(format!(
                "checkpoint holds {} values, header says {n}, shape needs {}",
                values.len(),
                shape.n_params()
            )));
        }
        Ok(Self {
            network: Network::from_flat(&shape, values)?,
            step: field_parse(&h, "step")?,
            time: field_parse(&h, "time")?,
            seed: field_parse(&h, "seed")?,
        })
    }

    pub fn save(&self, path: &Path) -> CliResult<()> {
        write_atomic(path, &self.encode())
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let bytes = fs::read(path).map_err(|e| CliError::io(path, e))?;
        Self::decode(&bytes).map_err(|e| CliError::Format(format!("{}: {e}", path.display())))
    }
}

pub fn encode_dense(state: &DenseState) -> Vec<u8> {
    let header = [("sites", state.sites().to_string()), ("length", state.amplitudes().len().to_string())];
    encode_complex(DENSE_MAGIC, &header, state.amplitudes())
}

pub fn decode_dense(bytes: &[u8]) -> CliResult<DenseState> {
    let (h, values) = decode_complex(DENSE_MAGIC, bytes)?;
    let sites: usize = field_parse(&h, "sites")?;
    let len: usize = field_parse(&h, "length")?;
    if len != values.len() {
        return Err(CliError::Format(format!("dense file holds {} values, header says {len}", values.len())));
    }
    Ok(DenseState::new(sites, values)?)
}

/// One CSV cell. `Raw` carries text read back from an existing table.
#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    Int(u64),
    Float(f64),
    Bool(bool),
    Raw(String),
}

/// Decimal float with 17 significant digits; non-finite values as
/// `nan`, `inf` and `-inf`.
pub fn format_float(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{x:.16e}")
    }
}

pub fn parse_float(s: &str) -> Option<f64> {
    match s.trim() {
        "" => Some(f64::NAN),
        "true" => Some(1.0),
        "false" => Some(0.0),
        t => t.parse().ok(),
    }
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Cell::Int(v) => write!(f, "{v}"),
            Cell::Float(v) => f.write_str(&format_float(*v)),
            Cell::Bool(v) => write!(f, "{v}"),
            Cell::Raw(v) => f.write_str(v),
        }
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as u64)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Bool(v)
    }
}

/// A header row plus rows of cells.
#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new<S: Into<String>>(columns: impl IntoIterator<Item = S>) -> Self {
        Self { columns: columns.into_iter().map(Into::into).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.columns.len(), "row width must match the header");
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> CliResult<Vec<u8>> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.columns)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::to_string))?;
        }
        w.into_inner().map_err(|e| CliError::Format(e.to_string()))
    }

    pub fn save(&self, path: &Path) -> CliResult<()> {
        write_atomic(path, &self.to_csv()?)
    }
}

/// A CSV read back as numbers.
#[derive(Clone, Debug, PartialEq)]
pub struct NumericTable {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl NumericTable {
    pub fn load(path: &Path) -> CliResult<Self> {
        let mut r = csv::Reader::from_path(path).map_err(|e| CliError::Format(format!("{}: {e}", path.display())))?;
        let columns: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
        let mut rows = Vec::new();
        for rec in r.records() {
            let rec = rec?;
            let row = rec
                .iter()
                .map(|s| {
                    parse_float(s).ok_or_else(|| CliError::Format(format!("{}: `{s}` is not a number", path.display())))
                })
                .collect::<CliResult<Vec<f64>>>()?;
            rows.push(row);
        }
        Ok(Self { columns, rows })
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }
}

/// `dir/name`.
pub fn child(dir: &Path, name: &str) -> PathBuf {
    dir.join(name)
}
