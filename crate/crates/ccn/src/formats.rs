//! On-disk formats: network, coloring and state JSON, trajectory CSV and the
//! binary trajectory cache.

use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use ccn_core::network::{ArrowSpec, CellSpec, CellTypeSpec, NetworkError};
use ccn_core::sim::{DerivativeSource, SimError};
use ccn_core::{fixtures, CellId, Coloring, NetworkSpec, StateLayout, Trajectory, TypedNetwork};
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

pub const NETWORK_VERSION: u32 = 1;
pub const CACHE_MAGIC: &[u8; 4] = b"CCNT";
pub const CACHE_VERSION: u32 = 1;
/// Cache flag: derivatives are field evaluations rather than finite
/// differences.
pub const CACHE_FIELD_DERIVATIVES: u32 = 1;
/// Prefix selecting a built-in network instead of a file.
pub const FIXTURE_PREFIX: &str = "fixture:";

#[derive(Debug, thiserror::Error)]
pub enum FormatError {
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("unsupported {kind} version {found}")]
    Version { kind: &'static str, found: u32 },
    #[error(transparent)]
    Network(#[from] NetworkError),
    #[error("unknown fixture {0:?}")]
    UnknownFixture(String),
    #[error("coloring: {0}")]
    Coloring(String),
    #[error("state: {0}")]
    State(String),
    #[error("trajectory: {0}")]
    Trajectory(String),
}

impl FormatError {
    /// Stable machine-readable code.
    pub fn code(&self) -> &'static str {
        match self {
            FormatError::Io { .. } => "io",
            FormatError::Json(_) => "malformed-json",
            FormatError::Version { .. } => "unsupported-version",
            FormatError::Network(_) => "invalid-network",
            FormatError::UnknownFixture(_) => "unknown-fixture",
            FormatError::Coloring(_) => "bad-coloring",
            FormatError::State(_) => "bad-state",
            FormatError::Trajectory(_) => "bad-trajectory",
        }
    }
}

impl From<SimError> for FormatError {
    fn from(e: SimError) -> Self {
        FormatError::Trajectory(e.to_string())
    }
}

pub fn read_text(path: &Path) -> Result<String, FormatError> {
    fs::read_to_string(path).map_err(|source| FormatError::Io { path: path.display().to_string(), source })
}

pub fn write_bytes(path: &Path, bytes: &[u8]) -> Result<(), FormatError> {
    fs::write(path, bytes).map_err(|source| FormatError::Io { path: path.display().to_string(), source })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CellTypeEntry {
    pub id: String,
    pub dim: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CellEntry {
    pub id: String,
    #[serde(rename = "type")]
    pub cell_type: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArrowEntry {
    pub id: String,
    #[serde(rename = "type")]
    pub arrow_type: String,
    pub tail: String,
    pub head: String,
}

/// Versioned network document.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkFile {
    pub version: u32,
    pub cell_types: Vec<CellTypeEntry>,
    pub arrow_types: Vec<String>,
    pub cells: Vec<CellEntry>,
    pub arrows: Vec<ArrowEntry>,
}

impl NetworkFile {
    pub fn from_spec(spec: &NetworkSpec) -> Self {
        Self {
            version: NETWORK_VERSION,
            cell_types: spec.cell_types.iter().map(|t| CellTypeEntry { id: t.id.clone(), dim: t.dim }).collect(),
            arrow_types: spec.arrow_types.clone(),
            cells: spec.cells.iter().map(|c| CellEntry { id: c.id.clone(), cell_type: c.cell_type.clone() }).collect(),
            arrows: spec
                .arrows
                .iter()
                .map(|a| ArrowEntry {
                    id: a.id.clone(),
                    arrow_type: a.arrow_type.clone(),
                    tail: a.tail.clone(),
                    head: a.head.clone(),
                })
                .collect(),
        }
    }

    pub fn to_spec(&self) -> NetworkSpec {
        NetworkSpec {
            cell_types: self.cell_types.iter().map(|t| CellTypeSpec { id: t.id.clone(), dim: t.dim }).collect(),
            arrow_types: self.arrow_types.clone(),
            cells: self.cells.iter().map(|c| CellSpec { id: c.id.clone(), cell_type: c.cell_type.clone() }).collect(),
            arrows: self
                .arrows
                .iter()
                .map(|a| ArrowSpec {
                    id: a.id.clone(),
                    arrow_type: a.arrow_type.clone(),
                    tail: a.tail.clone(),
                    head: a.head.clone(),
                })
                .collect(),
        }
    }
}

pub fn parse_network_spec(text: &str) -> Result<NetworkSpec, FormatError> {
    let file: NetworkFile = serde_json::from_str(text)?;
    if file.version != NETWORK_VERSION {
        return Err(FormatError::Version { kind: "network", found: file.version });
    }
    Ok(file.to_spec())
}

pub fn network_to_json(spec: &NetworkSpec) -> String {
    to_pretty(&NetworkFile::from_spec(spec))
}

/// Reads a network document, or a built-in network named `fixture:NAME`,
/// without validating it.
pub fn load_network_spec(path: &str) -> Result<NetworkSpec, FormatError> {
    if let Some(name) = path.strip_prefix(FIXTURE_PREFIX) {
        return fixtures::by_name(name).map(|n| n.to_spec()).ok_or_else(|| FormatError::UnknownFixture(name.into()));
    }
    parse_network_spec(&read_text(Path::new(path))?)
}

pub fn load_network(path: &str) -> Result<TypedNetwork, FormatError> {
    Ok(load_network_spec(path)?.build()?)
}

pub fn to_pretty<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable");
    s.push('\n');
    s
}

/// `{"colors": {"cellId": color}}`. Colors are read as arbitrary integer or
/// string labels and written as canonical indices in cell order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ColoringFile {
    pub colors: Map<String, Value>,
}

impl ColoringFile {
    pub fn new(net: &TypedNetwork, col: &Coloring) -> Self {
        let colors = net.cells().map(|c| (net.cell_name(c).to_string(), Value::from(col.color(c)))).collect();
        Self { colors }
    }

    /// Checks totality against `net` and returns the canonical coloring.
    pub fn to_coloring(&self, net: &TypedNetwork) -> Result<Coloring, FormatError> {
        let mut labels = vec![None; net.num_cells()];
        for (name, v) in &self.colors {
            let c = net.cell_id(name).ok_or_else(|| FormatError::Coloring(format!("unknown cell {name:?}")))?;
            if !(v.is_u64() || v.is_string()) {
                return Err(FormatError::Coloring(format!("color of {name:?} is not an index or a string")));
            }
            labels[c.index()] = Some(v);
        }
        let labels = labels
            .into_iter()
            .enumerate()
            .map(|(i, l)| l.ok_or_else(|| FormatError::Coloring(format!("cell {:?} has no color", net.cell_name(CellId::new(i))))))
            .collect::<Result<Vec<_>, _>>()?;
        let mut first: Vec<&Value> = Vec::new();
        let canonical: Vec<usize> = labels
            .iter()
            .map(|l| match first.iter().position(|f| f == l) {
                Some(k) => k,
                None => {
                    first.push(*l);
                    first.len() - 1
                }
            })
            .collect();
        Ok(Coloring::from_labels(&canonical))
    }
}

pub fn parse_coloring(text: &str, net: &TypedNetwork) -> Result<Coloring, FormatError> {
    serde_json::from_str::<ColoringFile>(text)?.to_coloring(net)
}

pub fn coloring_to_json(net: &TypedNetwork, col: &Coloring) -> String {
    to_pretty(&ColoringFile::new(net, col))
}

/// Coloring given as lists of same-colored cell names; unlisted cells get
/// their own colors.
pub fn coloring_from_classes(net: &TypedNetwork, classes: &[Vec<String>]) -> Result<Coloring, FormatError> {
    let refs: Vec<Vec<&str>> = classes.iter().map(|c| c.iter().map(String::as_str).collect()).collect();
    let slices: Vec<&[&str]> = refs.iter().map(Vec::as_slice).collect();
    Coloring::from_named_classes(net, &slices).map_err(|e| FormatError::Coloring(e.to_string()))
}

/// Cell state as a number (one-dimensional cells) or a list.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CellValue {
    Scalar(f64),
    Vector(Vec<f64>),
}

/// `{"state": {"cellId": value}}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateFile {
    pub state: StateMap,
}

pub type StateMap = std::collections::BTreeMap<String, CellValue>;

pub fn state_map(net: &TypedNetwork, x: &[f64]) -> StateMap {
    let layout = net.layout();
    net.cells()
        .map(|c| {
            let v = layout.cell(x, c);
            let value = if v.len() == 1 { CellValue::Scalar(v[0]) } else { CellValue::Vector(v.to_vec()) };
            (net.cell_name(c).to_string(), value)
        })
        .collect()
}

/// Flattens a state map into the network's layout; every cell must appear
/// with its exact dimension.
pub fn state_from_map(net: &TypedNetwork, map: &StateMap) -> Result<Vec<f64>, FormatError> {
    let layout = net.layout();
    let mut x = vec![0.0; layout.total_dim()];
    for name in map.keys() {
        if net.cell_id(name).is_none() {
            return Err(FormatError::State(format!("unknown cell {name:?}")));
        }
    }
    for c in net.cells() {
        let name = net.cell_name(c);
        let v: Vec<f64> = match map.get(name) {
            Some(CellValue::Scalar(v)) => vec![*v],
            Some(CellValue::Vector(v)) => v.clone(),
            None => return Err(FormatError::State(format!("cell {name:?} has no value"))),
        };
        if v.len() != layout.dim(c) {
            return Err(FormatError::State(format!("cell {name:?} needs {} components, got {}", layout.dim(c), v.len())));
        }
        layout.cell_mut(&mut x, c).copy_from_slice(&v);
    }
    Ok(x)
}

pub fn parse_state(text: &str, net: &TypedNetwork) -> Result<Vec<f64>, FormatError> {
    state_from_map(net, &serde_json::from_str::<StateFile>(text)?.state)
}

pub fn state_to_json(net: &TypedNetwork, x: &[f64]) -> String {
    to_pretty(&StateFile { state: state_map(net, x) })
}

/// Column names `<cellId>[k]` in layout order.
pub fn state_columns(net: &TypedNetwork) -> Vec<String> {
    net.cells().flat_map(|c| (0..net.dim(c)).map(move |k| format!("{}[{k}]", net.cell_name(c)))).collect()
}

/// CSV with header `t,<cellId>[k],...`, one row per stored time.
pub fn write_trajectory_csv<W: Write>(net: &TypedNetwork, traj: &Trajectory, out: W) -> Result<(), FormatError> {
    let mut w = csv::Writer::from_writer(out);
    let csv_err = |e: csv::Error| FormatError::Trajectory(e.to_string());
    let mut header = vec!["t".to_string()];
    header.extend(state_columns(net));
    w.write_record(&header).map_err(csv_err)?;
    for i in 0..traj.len() {
        let mut row = vec![traj.times()[i].to_string()];
        row.extend(traj.state(i).iter().map(f64::to_string));
        w.write_record(&row).map_err(csv_err)?;
    }
    w.flush().map_err(|e| FormatError::Trajectory(e.to_string()))
}

/// Reads a trajectory CSV. Columns may come in any order but each state
/// component must appear exactly once; rates are finite differences.
pub fn read_trajectory_csv<R: Read>(net: &TypedNetwork, input: R) -> Result<Trajectory, FormatError> {
    let mut r = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
    let csv_err = |e: csv::Error| FormatError::Trajectory(e.to_string());
    let header = r.headers().map_err(csv_err)?.clone();
    let columns = state_columns(net);
    let mut time_col = None;
    let mut target = vec![None; header.len()];
    let mut seen = vec![false; columns.len()];
    for (j, name) in header.iter().enumerate() {
        if name == "t" {
            if time_col.replace(j).is_some() {
                return Err(FormatError::Trajectory("column \"t\" appears twice".into()));
            }
            continue;
        }
        let k = columns
            .iter()
            .position(|c| c == name)
            .ok_or_else(|| FormatError::Trajectory(format!("unknown column {name:?}")))?;
        if std::mem::replace(&mut seen[k], true) {
            return Err(FormatError::Trajectory(format!("column {name:?} appears twice")));
        }
        target[j] = Some(k);
    }
    let time_col = time_col.ok_or_else(|| FormatError::Trajectory("missing column \"t\"".into()))?;
    if let Some(k) = seen.iter().position(|s| !s) {
        return Err(FormatError::Trajectory(format!("missing column {:?}", columns[k])));
    }
    let d = columns.len();
    let (mut times, mut states) = (Vec::new(), Vec::new());
    for (row, record) in r.records().enumerate() {
        let record = record.map_err(csv_err)?;
        let mut x = vec![0.0; d];
        for (j, field) in record.iter().enumerate() {
            let v: f64 = field
                .parse()
                .map_err(|_| FormatError::Trajectory(format!("row {}: {field:?} is not a number", row + 1)))?;
            match target[j] {
                Some(k) => x[k] = v,
                None if j == time_col => times.push(v),
                None => {}
            }
        }
        states.extend(x);
    }
    Ok(Trajectory::from_samples(net.layout().clone(), times, states, None)?)
}

/// Binary cache: `"CCNT"`, then little-endian `u32` version, `u32` flags,
/// `u64` sample count `n`, `u64` state dimension `d`, `n` times, `n·d`
/// states and `n·d` rates as `f64`.
pub fn encode_cache(traj: &Trajectory) -> Vec<u8> {
    let (n, d) = (traj.len(), traj.dim());
    let mut out = Vec::with_capacity(28 + 8 * n * (1 + 2 * d));
    out.extend_from_slice(CACHE_MAGIC);
    out.extend_from_slice(&CACHE_VERSION.to_le_bytes());
    let flags = if traj.meta.derivatives == DerivativeSource::Field { CACHE_FIELD_DERIVATIVES } else { 0 };
    out.extend_from_slice(&flags.to_le_bytes());
    out.extend_from_slice(&(n as u64).to_le_bytes());
    out.extend_from_slice(&(d as u64).to_le_bytes());
    for v in traj.times().iter().chain(traj.states()).chain(traj.derivatives()) {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

pub fn is_cache(bytes: &[u8]) -> bool {
    bytes.starts_with(CACHE_MAGIC)
}

pub fn decode_cache(layout: &StateLayout, bytes: &[u8]) -> Result<Trajectory, FormatError> {
    let bad = |m: &str| FormatError::Trajectory(format!("cache: {m}"));
    if !is_cache(bytes) {
        return Err(bad("missing magic"));
    }
    if bytes.len() < 28 {
        return Err(bad("truncated header"));
    }
    let u32_at = |i: usize| u32::from_le_bytes(bytes[i..i + 4].try_into().expect("4 bytes"));
    let u64_at = |i: usize| u64::from_le_bytes(bytes[i..i + 8].try_into().expect("8 bytes"));
    let version = u32_at(4);
    if version != CACHE_VERSION {
        return Err(FormatError::Version { kind: "trajectory cache", found: version });
    }
    let flags = u32_at(8);
    let (n, d) = (u64_at(12) as usize, u64_at(20) as usize);
    if d != layout.total_dim() {
        return Err(bad(&format!("state dimension {d} does not match the network ({})", layout.total_dim())));
    }
    let count = n.checked_mul(1 + 2 * d).ok_or_else(|| bad("size overflow"))?;
    if bytes.len() != 28 + 8 * count {
        return Err(bad("payload length does not match the header"));
    }
    let values: Vec<f64> =
        bytes[28..].chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes"))).collect();
    let times = values[..n].to_vec();
    let states = values[n..n + n * d].to_vec();
    let derivs = values[n + n * d..].to_vec();
    let mut traj = Trajectory::from_samples(layout.clone(), times, states, Some(derivs))?;
    if flags & CACHE_FIELD_DERIVATIVES == 0 {
        traj.meta.derivatives = DerivativeSource::FiniteDifference;
    }
    Ok(traj)
}

/// Reads a trajectory, recognizing the binary cache by its magic bytes and
/// treating anything else as CSV.
pub fn load_trajectory(net: &TypedNetwork, path: &Path) -> Result<Trajectory, FormatError> {
    let bytes = fs::read(path).map_err(|source| FormatError::Io { path: path.display().to_string(), source })?;
    if is_cache(&bytes) {
        decode_cache(net.layout(), &bytes)
    } else {
        read_trajectory_csv(net, bytes.as_slice())
    }
}

/// Gnuplot-ready data: a `#` comment header, then whitespace-separated
/// columns.
pub fn write_plot_data<W: Write>(mut out: W, header: &[String], rows: &[Vec<f64>]) -> std::io::Result<()> {
    writeln!(out, "# {}", header.join(" "))?;
    for row in rows {
        let cells: Vec<String> = row.iter().map(f64::to_string).collect();
        writeln!(out, "{}", cells.join(" "))?;
    }
    Ok(())
}
