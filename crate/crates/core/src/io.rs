//! Text import/export: graph documents, spectra, observable series,
//! probability fields and matrices.
//!
//! CSV writers take a list of header lines that are emitted as `# ` comments
//! before the column row; readers skip comment lines.

use std::io::{BufRead, Write};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::analytic::BaselineRow;
use crate::dynamics::{Propagator, TimeGrid, WalkKind};
use crate::graph::{Graph, GraphFamily};
use crate::observables::ObservableSeries;
use crate::spectral::DegeneracyClasses;
use crate::{Error, Result};

/// Round-trip float formatting: plain decimal for moderate magnitudes,
/// scientific otherwise.
pub fn format_float(x: f64) -> String {
    let a = x.abs();
    if x != 0.0 && a.is_finite() && !(1e-4..1e16).contains(&a) {
        format!("{x:e}")
    } else {
        format!("{x}")
    }
}

fn write_header(w: &mut impl Write, header: &[String]) -> Result<()> {
    for line in header {
        writeln!(w, "# {line}")?;
    }
    Ok(())
}

fn content_lines(r: impl BufRead) -> impl Iterator<Item = Result<(usize, String)>> {
    r.lines().enumerate().filter_map(|(i, line)| match line {
        Ok(l) if l.trim().is_empty() || l.starts_with('#') => None,
        Ok(l) => Some(Ok((i + 1, l))),
        Err(e) => Some(Err(Error::from(e))),
    })
}

fn parse<T: std::str::FromStr>(field: &str, line: usize) -> Result<T> {
    field.trim().parse().map_err(|_| Error::Parse(format!("line {line}: cannot parse {field:?}")))
}

#[derive(Serialize, Deserialize)]
struct GraphDocument {
    #[serde(flatten)]
    family: GraphFamily,
    #[serde(rename = "N")]
    node_count: usize,
    edges: Vec<[usize; 2]>,
    labels: Vec<String>,
}

/// `{family, parameters, N, edges, labels}`.
pub fn write_graph_json(w: &mut impl Write, graph: &Graph) -> Result<()> {
    let doc = GraphDocument {
        family: graph.family(),
        node_count: graph.node_count(),
        edges: graph.edges().into_iter().map(|(a, b)| [a, b]).collect(),
        labels: graph.labels().to_vec(),
    };
    serde_json::to_writer_pretty(&mut *w, &doc)?;
    writeln!(w)?;
    Ok(())
}

pub fn read_graph_json(r: impl std::io::Read) -> Result<Graph> {
    let doc: GraphDocument = serde_json::from_reader(r)?;
    let edges: Vec<(usize, usize)> = doc.edges.iter().map(|e| (e[0], e[1])).collect();
    Graph::from_edges(doc.family, doc.node_count, &edges, doc.labels)
}

const FAMILY_KEY: &str = "family ";
const LABELS_KEY: &str = "labels ";

/// One `i j` line per edge, preceded by comment lines carrying the family
/// and labels so that the file can be re-imported.
pub fn write_edge_list(w: &mut impl Write, header: &[String], graph: &Graph) -> Result<()> {
    write_header(w, header)?;
    writeln!(w, "# {FAMILY_KEY}{}", serde_json::to_string(&graph.family())?)?;
    writeln!(w, "# N {}", graph.node_count())?;
    writeln!(w, "# {LABELS_KEY}{}", serde_json::to_string(graph.labels())?)?;
    for (a, b) in graph.edges() {
        writeln!(w, "{a} {b}")?;
    }
    Ok(())
}

pub fn read_edge_list(r: impl BufRead) -> Result<Graph> {
    let mut family = None;
    let mut labels = None;
    let mut edges = Vec::new();
    for (i, line) in r.lines().enumerate() {
        let line = line?;
        if let Some(comment) = line.strip_prefix("# ") {
            if let Some(json) = comment.strip_prefix(FAMILY_KEY) {
                family = Some(serde_json::from_str::<GraphFamily>(json)?);
            } else if let Some(json) = comment.strip_prefix(LABELS_KEY) {
                labels = Some(serde_json::from_str::<Vec<String>>(json)?);
            }
            continue;
        }
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let mut fields = line.split_whitespace();
        let (Some(a), Some(b), None) = (fields.next(), fields.next(), fields.next()) else {
            return Err(Error::Parse(format!("line {}: expected two node indices", i + 1)));
        };
        edges.push((parse(a, i + 1)?, parse(b, i + 1)?));
    }
    let family = family.ok_or_else(|| Error::Parse("edge list lacks a family header".into()))?;
    let n = family.expected_size()?;
    let labels = labels.unwrap_or_else(|| (0..n).map(|i| i.to_string()).collect());
    Graph::from_edges(family, n, &edges, labels)
}

/// Columns `index,eigenvalue,multiplicity_class`, where the class is the
/// position of the eigenvalue's degeneracy class.
pub fn write_spectrum_csv(
    w: &mut impl Write,
    header: &[String],
    eigenvalues: &[f64],
    classes: &DegeneracyClasses,
) -> Result<()> {
    classes.check_matches(eigenvalues)?;
    write_header(w, header)?;
    writeln!(w, "index,eigenvalue,multiplicity_class")?;
    for (class, range) in classes.ranges().into_iter().enumerate() {
        for i in range {
            writeln!(w, "{i},{},{class}", format_float(eigenvalues[i]))?;
        }
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectrumEntry {
    pub value: f64,
    pub multiplicity: usize,
}

/// `[{value, multiplicity}, ...]`.
pub fn write_spectrum_json(w: &mut impl Write, classes: &DegeneracyClasses) -> Result<()> {
    let entries: Vec<SpectrumEntry> =
        classes.iter().map(|(value, multiplicity)| SpectrumEntry { value, multiplicity }).collect();
    serde_json::to_writer_pretty(&mut *w, &entries)?;
    writeln!(w)?;
    Ok(())
}

pub fn read_spectrum_json(r: impl std::io::Read) -> Result<DegeneracyClasses> {
    let entries: Vec<SpectrumEntry> = serde_json::from_reader(r)?;
    DegeneracyClasses::new(
        entries.iter().map(|e| e.value).collect(),
        entries.iter().map(|e| e.multiplicity).collect(),
        0.0,
    )
}

/// Column `t` followed by one column per series, named by its tag.
pub fn write_series_csv(w: &mut impl Write, header: &[String], series: &[&ObservableSeries]) -> Result<()> {
    let Some(first) = series.first() else {
        return Err(Error::InvalidParameter("no series to write".into()));
    };
    if series.iter().any(|s| s.grid() != first.grid()) {
        return Err(Error::DimensionMismatch("series live on different grids".into()));
    }
    write_header(w, header)?;
    let tags: Vec<String> = series.iter().map(|s| s.tag().to_string()).collect();
    writeln!(w, "# observable: {}", tags.join(" "))?;
    writeln!(w, "t,{}", tags.join(","))?;
    for (i, t) in first.times().iter().enumerate() {
        let row: Vec<String> = series.iter().map(|s| format_float(s.values()[i])).collect();
        writeln!(w, "{},{}", format_float(*t), row.join(","))?;
    }
    Ok(())
}

/// Generic table: named columns of equal length.
pub fn write_columns_csv(w: &mut impl Write, header: &[String], names: &[&str], columns: &[Vec<f64>]) -> Result<()> {
    if names.len() != columns.len() {
        return Err(Error::DimensionMismatch(format!("{} names for {} columns", names.len(), columns.len())));
    }
    let rows = columns.first().map_or(0, Vec::len);
    if columns.iter().any(|c| c.len() != rows) {
        return Err(Error::DimensionMismatch("columns differ in length".into()));
    }
    write_header(w, header)?;
    writeln!(w, "{}", names.join(","))?;
    for i in 0..rows {
        let row: Vec<String> = columns.iter().map(|c| format_float(c[i])).collect();
        writeln!(w, "{}", row.join(","))?;
    }
    Ok(())
}

/// Reads a CSV written by [`write_series_csv`] or [`write_columns_csv`]
/// into its column names and rows.
pub fn read_table_csv(r: impl BufRead) -> Result<(Vec<String>, Vec<Vec<f64>>)> {
    let mut lines = content_lines(r);
    let columns: Vec<String> = match lines.next() {
        Some(line) => line?.1.split(',').map(str::to_string).collect(),
        None => return Err(Error::Parse("empty table".into())),
    };
    let mut rows = Vec::new();
    for line in lines {
        let (n, text) = line?;
        let row: Vec<f64> = text.split(',').map(|f| parse(f, n)).collect::<Result<_>>()?;
        if row.len() != columns.len() {
            return Err(Error::Parse(format!("line {n}: expected {} fields", columns.len())));
        }
        rows.push(row);
    }
    Ok((columns, rows))
}

/// Long-format field export. Classical rows are `t,j,k,p`; quantum rows
/// are `t,j,k,re_alpha,im_alpha,pi`. `sources` selects the start nodes `j`.
pub fn write_field_csv(
    w: &mut impl Write,
    header: &[String],
    propagator: &Propagator<'_>,
    grid: &TimeGrid,
    kind: WalkKind,
    sources: &[usize],
) -> Result<()> {
    let n = propagator.node_count();
    if let Some(&bad) = sources.iter().find(|&&j| j >= n) {
        return Err(Error::InvalidParameter(format!("start node {bad} out of range for N = {n}")));
    }
    write_header(w, header)?;
    match kind {
        WalkKind::Classical => writeln!(w, "t,j,k,p")?,
        WalkKind::Quantum => writeln!(w, "t,j,k,re_alpha,im_alpha,pi")?,
    }
    for &t in grid.times() {
        let ts = format_float(t);
        for &j in sources {
            match kind {
                WalkKind::Classical => {
                    let p = propagator.classical_column(t, j);
                    for (k, v) in p.iter().enumerate() {
                        writeln!(w, "{ts},{j},{k},{}", format_float(*v))?;
                    }
                }
                WalkKind::Quantum => {
                    let (re, im) = propagator.quantum_column(t, j);
                    for k in 0..n {
                        let pi = re[k] * re[k] + im[k] * im[k];
                        writeln!(w, "{ts},{j},{k},{},{},{}", format_float(re[k]), format_float(im[k]), format_float(pi))?;
                    }
                }
            }
        }
    }
    Ok(())
}

/// Plain matrix CSV: row `k`, column `j`.
pub fn write_matrix_csv(w: &mut impl Write, header: &[String], m: &DMatrix<f64>) -> Result<()> {
    write_header(w, header)?;
    for row in m.row_iter() {
        let fields: Vec<String> = row.iter().map(|v| format_float(*v)).collect();
        writeln!(w, "{}", fields.join(","))?;
    }
    Ok(())
}

pub fn read_matrix_csv(r: impl BufRead) -> Result<DMatrix<f64>> {
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for line in content_lines(r) {
        let (n, text) = line?;
        rows.push(text.split(',').map(|f| parse(f, n)).collect::<Result<_>>()?);
    }
    let ncols = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != ncols) {
        return Err(Error::Parse("ragged matrix rows".into()));
    }
    Ok(DMatrix::from_fn(rows.len(), ncols, |i, j| rows[i][j]))
}

/// Summary of the long-time averages of one graph.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LtaSummary {
    pub chi_bar: f64,
    pub chi_bar_lb: f64,
    pub eta: f64,
    pub r_q: f64,
    pub r_c: f64,
}

impl From<&crate::observables::LongTimeAverages> for LtaSummary {
    fn from(l: &crate::observables::LongTimeAverages) -> Self {
        LtaSummary { chi_bar: l.chi_bar, chi_bar_lb: l.chi_bar_lb, eta: l.eta, r_q: l.r_q, r_c: l.r_c }
    }
}

pub fn write_json<T: Serialize>(w: &mut impl Write, value: &T) -> Result<()> {
    serde_json::to_writer_pretty(&mut *w, value)?;
    writeln!(w)?;
    Ok(())
}

/// Columns `t,chain_exact,asymptote_4t_over_pi,d_dim_value`.
pub fn write_baseline_csv(w: &mut impl Write, header: &[String], rows: &[BaselineRow]) -> Result<()> {
    write_header(w, header)?;
    writeln!(w, "t,chain_exact,asymptote_4t_over_pi,d_dim_value")?;
    for r in rows {
        writeln!(
            w,
            "{},{},{},{}",
            format_float(r.t),
            format_float(r.chain_exact),
            format_float(r.asymptote_4t_over_pi),
            format_float(r.d_dim_value)
        )?;
    }
    Ok(())
}
