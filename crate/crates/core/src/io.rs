//! File formats.
//!
//! - Complexes and embeddings: JSON with faces listed per dimension.
//! - Knots: plain text, one `x y z` point per line, the curve closed
//!   implicitly; blank lines and `#` comments are ignored.
//! - Tables: CSV with a header row, or structured text (TOML with one
//!   `[[row]]` table per row).
//! - Block trees: nested JSON records.
//!
//! Floats are written in Rust's shortest round-trip form, so a value read
//! back compares equal to the one written.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::complex::SimplicialComplex;
use crate::error::{Error, Result};
use crate::geometry::EmbeddedComplex;
use crate::knot::{BlockTree, PlKnot};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComplexFile {
    pub vertex_count: usize,
    /// `faces[d]` lists the `d`-dimensional faces as vertex lists.
    pub faces: Vec<Vec<Vec<usize>>>,
}

impl From<&SimplicialComplex> for ComplexFile {
    fn from(c: &SimplicialComplex) -> Self {
        ComplexFile { vertex_count: c.vertex_count(), faces: c.faces_by_dim().to_vec() }
    }
}

impl ComplexFile {
    pub fn build(self) -> Result<SimplicialComplex> {
        SimplicialComplex::from_faces_by_dim(self.vertex_count, self.faces)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingFile {
    pub complex: ComplexFile,
    pub coords: Vec<Vec<f64>>,
}

impl From<&EmbeddedComplex> for EmbeddingFile {
    fn from(e: &EmbeddedComplex) -> Self {
        EmbeddingFile { complex: e.complex().into(), coords: e.coords().to_vec() }
    }
}

impl EmbeddingFile {
    pub fn build(self) -> Result<EmbeddedComplex> {
        EmbeddedComplex::new(self.complex.build()?, self.coords)
    }
}

fn data(e: impl std::fmt::Display) -> Error {
    Error::Data(e.to_string())
}

pub fn complex_to_json(c: &SimplicialComplex) -> String {
    serde_json::to_string_pretty(&ComplexFile::from(c)).expect("plain data serializes")
}

pub fn complex_from_json(s: &str) -> Result<SimplicialComplex> {
    serde_json::from_str::<ComplexFile>(s).map_err(data)?.build()
}

pub fn embedding_to_json(e: &EmbeddedComplex) -> String {
    serde_json::to_string_pretty(&EmbeddingFile::from(e)).expect("plain data serializes")
}

pub fn embedding_from_json(s: &str) -> Result<EmbeddedComplex> {
    serde_json::from_str::<EmbeddingFile>(s).map_err(data)?.build()
}

/// Accepts either an embedding file or a bare complex file (returning
/// `None` for the coordinates in the latter case).
pub fn complex_or_embedding_from_json(s: &str) -> Result<(SimplicialComplex, Option<EmbeddedComplex>)> {
    if let Ok(f) = serde_json::from_str::<EmbeddingFile>(s) {
        let e = f.build()?;
        return Ok((e.complex().clone(), Some(e)));
    }
    Ok((complex_from_json(s)?, None))
}

pub fn knot_from_text(s: &str) -> Result<PlKnot> {
    let mut pts = Vec::new();
    for (no, line) in s.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let v: Vec<f64> = line
            .split(|c: char| c.is_whitespace() || c == ',')
            .filter(|t| !t.is_empty())
            .map(|t| t.parse::<f64>().map_err(|e| data(format!("line {}: {e}", no + 1))))
            .collect::<Result<_>>()?;
        if v.len() != 3 {
            return Err(data(format!("line {}: expected 3 coordinates, found {}", no + 1, v.len())));
        }
        pts.push([v[0], v[1], v[2]]);
    }
    PlKnot::new(pts)
}

pub fn knot_to_text(k: &PlKnot) -> String {
    let mut s = String::new();
    for p in k.points() {
        let _ = writeln!(s, "{} {} {}", p[0], p[1], p[2]);
    }
    s
}

/// Nested JSON record for a block tree; each node holds its children.
pub fn block_tree_to_json(t: &BlockTree) -> String {
    fn node(t: &BlockTree, i: usize) -> serde_json::Value {
        let n = &t.nodes[i];
        json!({
            "b": n.b,
            "q": n.q,
            "depth": n.depth,
            "terminal": n.terminal,
            "b_crossings": n.b_crossings,
            "q_crossings": n.q_crossings,
            "bounded_crossings": n.bounded_crossings,
            "clean_shell": n.clean_shell,
            "simple_leaf": n.simple_leaf,
            "bounded_split": n.bounded_split,
            "children": n.children.iter().map(|&c| node(t, c)).collect::<Vec<_>>(),
        })
    }
    let v = json!({
        "root_cube": t.root_cube,
        "convol_bound": t.convol_bound,
        "epsilon": t.epsilon,
        "max_depth": t.max_depth,
        "partition_error": t.partition_error,
        "max_degree": t.max_degree,
        "node_count": t.nodes.len(),
        "root": node(t, 0),
    });
    serde_json::to_string_pretty(&v).expect("plain data serializes")
}

#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    Int(i64),
    Float(f64),
    Bool(bool),
    Text(String),
}

impl Cell {
    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Cell::Int(i) => Some(*i as f64),
            Cell::Float(x) => Some(*x),
            _ => None,
        }
    }

    fn render(&self) -> String {
        match self {
            Cell::Int(i) => i.to_string(),
            Cell::Float(x) => x.to_string(),
            Cell::Bool(b) => b.to_string(),
            Cell::Text(s) => s.clone(),
        }
    }

    /// Reads a CSV field back into the narrowest cell type.
    fn parse(s: &str) -> Cell {
        if let Ok(i) = s.parse::<i64>() {
            Cell::Int(i)
        } else if let Ok(x) = s.parse::<f64>() {
            Cell::Float(x)
        } else if let Ok(b) = s.parse::<bool>() {
            Cell::Bool(b)
        } else {
            Cell::Text(s.to_string())
        }
    }

    fn toml(&self) -> toml::Value {
        match self {
            Cell::Int(i) => toml::Value::Integer(*i),
            Cell::Float(x) => toml::Value::Float(*x),
            Cell::Bool(b) => toml::Value::Boolean(*b),
            Cell::Text(s) => toml::Value::String(s.clone()),
        }
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}
impl From<u64> for Cell {
    fn from(v: u64) -> Self {
        Cell::Int(v as i64)
    }
}
impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}
impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Bool(v)
    }
}
impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}
impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    Csv,
    StructuredText,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new<S: Into<String>>(columns: impl IntoIterator<Item = S>) -> Self {
        Table { columns: columns.into_iter().map(Into::into).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    pub fn render(&self, f: Format) -> String {
        match f {
            Format::Csv => self.to_csv(),
            Format::StructuredText => self.to_structured_text(),
        }
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.columns).expect("in-memory write");
        for r in &self.rows {
            w.write_record(r.iter().map(Cell::render)).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 fields")
    }

    pub fn to_structured_text(&self) -> String {
        let rows: Vec<toml::Value> = self
            .rows
            .iter()
            .map(|r| {
                let t: toml::map::Map<String, toml::Value> =
                    self.columns.iter().cloned().zip(r.iter().map(Cell::toml)).collect();
                toml::Value::Table(t)
            })
            .collect();
        let mut doc = toml::map::Map::new();
        doc.insert("columns".into(), toml::Value::Array(self.columns.iter().cloned().map(toml::Value::String).collect()));
        doc.insert("row".into(), toml::Value::Array(rows));
        toml::to_string(&toml::Value::Table(doc)).expect("toml values serialize")
    }

    pub fn from_csv(s: &str) -> Result<Table> {
        let mut r = csv::Reader::from_reader(s.as_bytes());
        let columns: Vec<String> = r.headers().map_err(data)?.iter().map(str::to_string).collect();
        let mut t = Table { columns, rows: Vec::new() };
        for rec in r.records() {
            let rec = rec.map_err(data)?;
            t.rows.push(rec.iter().map(Cell::parse).collect());
        }
        Ok(t)
    }
}

pub fn read_file(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::Data(format!("{}: {e}", path.display())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex::{cycle_graph, simplex_skeleton};
    use crate::knot::torus_knot;

    #[test]
    fn complex_round_trip() {
        let c = simplex_skeleton(2, 4).unwrap();
        assert_eq!(complex_from_json(&complex_to_json(&c)).unwrap(), c);
    }

    #[test]
    fn embedding_round_trip_is_exact() {
        let c = cycle_graph(5).unwrap();
        let coords = (0..5).map(|i| vec![0.1 * i as f64, 1.0 / 3.0, std::f64::consts::PI * i as f64]).collect();
        let e = EmbeddedComplex::new(c, coords).unwrap();
        let back = embedding_from_json(&embedding_to_json(&e)).unwrap();
        assert_eq!(back, e);
        let (c2, e2) = complex_or_embedding_from_json(&complex_to_json(e.complex())).unwrap();
        assert_eq!(&c2, e.complex());
        assert!(e2.is_none());
    }

    #[test]
    fn missing_face_is_rejected() {
        let s = r#"{"vertex_count": 2, "faces": [[[0]], [[0, 1]]]}"#;
        assert!(matches!(complex_from_json(s), Err(Error::Data(_))));
    }

    #[test]
    fn knot_text_round_trip() {
        let k = torus_knot(2, 3, 10.0, 2.0, 60).unwrap();
        let back = knot_from_text(&knot_to_text(&k)).unwrap();
        assert_eq!(back.points(), k.points());
        assert!(knot_from_text("# c\n0 0 0\n1 0 0\n\n0 1 0.5 # tail\n").is_ok());
        assert!(matches!(knot_from_text("0 0\n"), Err(Error::Data(_))));
    }

    #[test]
    fn table_formats() {
        let mut t = Table::new(["n", "measure", "value"]);
        t.push(vec![8usize.into(), "thickness".into(), 0.125.into()]);
        t.push(vec![16usize.into(), "a,b".into(), f64::INFINITY.into()]);
        let csv = t.to_csv();
        assert!(csv.starts_with("n,measure,value\n"));
        assert_eq!(Table::from_csv(&csv).unwrap(), t);
        let st = t.to_structured_text();
        let v: toml::Value = st.parse().unwrap();
        assert_eq!(v["row"][0]["value"].as_float(), Some(0.125));
    }
}
