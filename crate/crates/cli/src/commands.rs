//! The `generate`, `spectrum`, `dynamics` and `observables` subcommands.

use std::collections::BTreeMap;

use anyhow::{bail, Context};
use serde::Serialize;

use ctqw_core::dynamics::{Propagator, SpectralField, TimeGrid, WalkKind, DEFAULT_ENTRY_CAP};
use ctqw_core::graph::{chemical_distances, lattice_euclidean_distances, mean_pairwise_distance, Graph, GraphFamily};
use ctqw_core::io;
use ctqw_core::observables::{
    avg_displacement_from_site, crossing_time, dsg_lta_lb_closed_form, envelope_exponent, ratio_series,
    return_prob_classical, return_prob_lower_bound, return_prob_quantum, site_averaged_displacement,
    site_averaged_metric, stationary_quantum_displacement, LongTimeAverages, ObservableSeries, ObservableTag,
    DEFAULT_RQ_WINDOW,
};
use ctqw_core::spectral::{decompose, dsg_spectrum_iterative, SpectralDecomposition};

use crate::config::{stem, ExperimentConfig, Format, ObservableName};
use crate::output::{Output, UNITS_NOTE};
use crate::Status;

/// Largest `|λ_num - λ_exact|` accepted by `spectrum --exact`.
pub const EXACT_SPECTRUM_TOL: f64 = 1e-8;

pub fn header(command: &str, config: &ExperimentConfig) -> Vec<String> {
    vec![
        format!("ctqw {command}"),
        format!("config_hash: {}", config.hash()),
        format!("graph: {}", config.graph),
        format!("gamma: {}", config.grid.gamma),
        UNITS_NOTE.to_string(),
    ]
}

fn open(command: &str, config: &ExperimentConfig) -> anyhow::Result<Output> {
    Output::create(&config.output.directory, header(command, config))
}

pub fn build(family: &GraphFamily) -> anyhow::Result<(Graph, SpectralDecomposition)> {
    let graph = family.build()?;
    let spec = decompose(&graph.laplacian()).context("diagonalizing the Laplacian")?;
    Ok((graph, spec))
}

pub fn generate(config: &ExperimentConfig) -> anyhow::Result<Status> {
    let graph = config.graph.build()?;
    let dist = chemical_distances(&graph)?;
    let mut out = open("generate", config)?;
    let name = stem(&config.graph);
    out.write(&format!("{name}.json"), |w, _| io::write_graph_json(&mut &mut *w, &graph))?;
    out.write(&format!("{name}.edges"), |w, h| io::write_edge_list(&mut &mut *w, h, &graph))?;
    println!("graph: {}", config.graph);
    println!("N = {}", graph.node_count());
    println!("edges = {}", graph.edge_count());
    let hist: Vec<String> = graph.degree_histogram().iter().map(|(d, c)| format!("{d}:{c}")).collect();
    println!("degree histogram (degree:count) = {}", hist.join(" "));
    println!("r_c = {}", io::format_float(mean_pairwise_distance(&dist)));
    Ok(Status::Ok)
}

pub fn spectrum(config: &ExperimentConfig) -> anyhow::Result<Status> {
    let exact = if config.exact {
        let GraphFamily::DualSierpinski { g } = config.graph else {
            bail!("--exact is only available for the dsg family");
        };
        Some(dsg_spectrum_iterative(g)?)
    } else {
        None
    };
    let (_, spec) = build(&config.graph)?;
    let classes = spec.degeneracy_classes();
    let mut out = open("spectrum", config)?;
    let name = stem(&config.graph);
    match config.output.format {
        Format::Csv => out.write(&format!("{name}_spectrum.csv"), |w, h| {
            io::write_spectrum_csv(&mut &mut *w, h, spec.eigenvalues(), &classes)
        })?,
        Format::Json => out.write(&format!("{name}_spectrum.json"), |w, _| io::write_spectrum_json(&mut &mut *w, &classes))?,
    };
    let eigs = spec.eigenvalues();
    println!("graph: {}", config.graph);
    println!("eigenvalues = {}", eigs.len());
    println!("range = [{}, {}]", io::format_float(eigs[0]), io::format_float(eigs[eigs.len() - 1]));
    println!("distinct values = {}", classes.len());
    let Some(exact) = exact else {
        return Ok(Status::Ok);
    };
    out.write(&format!("{name}_spectrum_exact.json"), |w, _| io::write_spectrum_json(&mut &mut *w, &exact))?;
    let expanded = exact.expanded();
    let err = eigs.iter().zip(&expanded).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    let ok = err <= EXACT_SPECTRUM_TOL && expanded.len() == eigs.len();
    println!("exact distinct values = {}", exact.len());
    println!(
        "max |lambda_num - lambda_exact| = {err:e} (tolerance {EXACT_SPECTRUM_TOL:e}): {}",
        if ok { "pass" } else { "FAIL" }
    );
    Ok(if ok { Status::Ok } else { Status::ChecksFailed(1) })
}

pub fn write_snapshots(
    out: &mut Output,
    name: &str,
    prop: &Propagator<'_>,
    times: &[f64],
) -> anyhow::Result<()> {
    for &t in times {
        let p = prop.classical(t);
        let pi = prop.quantum(t).probabilities();
        let mut header = out.header().to_vec();
        header.push(format!("snapshot t = {t}; entry (k, j) is the probability to be at k starting from j"));
        for (kind, m) in [("classical", p), ("quantum", pi)] {
            let mut lines = header.clone();
            lines.push(format!("walk: {kind}"));
            out.write(&format!("{name}_snapshot_{kind}_t{t}.csv"), |w, _| io::write_matrix_csv(&mut &mut *w, &lines, &m))?;
        }
    }
    Ok(())
}

/// Per-sink time series `P_{k,j}(t)` and `π_{k,j}(t)` for one start `j`.
pub fn write_sink_series(
    out: &mut Output,
    name: &str,
    prop: &Propagator<'_>,
    grid: &TimeGrid,
    start: usize,
    sinks: &[usize],
) -> anyhow::Result<()> {
    let mut names = vec!["t".to_string()];
    let mut columns = vec![grid.times().to_vec()];
    let mut classical = vec![Vec::new(); sinks.len()];
    let mut quantum = vec![Vec::new(); sinks.len()];
    for &t in grid.times() {
        let p = prop.classical_column(t, start);
        let (re, im) = prop.quantum_column(t, start);
        for (i, &k) in sinks.iter().enumerate() {
            classical[i].push(p[k]);
            quantum[i].push(re[k] * re[k] + im[k] * im[k]);
        }
    }
    for (i, &k) in sinks.iter().enumerate() {
        names.push(format!("p_k{k}"));
        columns.push(std::mem::take(&mut classical[i]));
    }
    for (i, &k) in sinks.iter().enumerate() {
        names.push(format!("pi_k{k}"));
        columns.push(std::mem::take(&mut quantum[i]));
    }
    let refs: Vec<&str> = names.iter().map(String::as_str).collect();
    let mut header = out.header().to_vec();
    header.push(format!("start node j = {start} (0-based)"));
    out.write(&format!("{name}_sinks_j{start}.csv"), |w, _| io::write_columns_csv(&mut &mut *w, &header, &refs, &columns))?;
    Ok(())
}

pub fn dynamics(config: &ExperimentConfig) -> anyhow::Result<Status> {
    let (graph, spec) = build(&config.graph)?;
    let grid = config.grid.time_grid()?;
    let n = graph.node_count();
    let sources: Vec<usize> = match config.start {
        Some(j) => vec![j],
        None => (0..n).collect(),
    };
    let rows = grid.len() * n * sources.len();
    if rows > DEFAULT_ENTRY_CAP {
        bail!(
            "field export would hold {rows} rows (cap {DEFAULT_ENTRY_CAP}); use a coarser --step, a smaller --t-max or a single --start"
        );
    }
    let prop = Propagator::new(&spec, grid.gamma());
    let mut out = open("dynamics", config)?;
    let name = stem(&config.graph);
    for kind in [WalkKind::Classical, WalkKind::Quantum] {
        let label = match kind {
            WalkKind::Classical => "classical",
            WalkKind::Quantum => "quantum",
        };
        out.write(&format!("{name}_field_{label}.csv"), |w, h| {
            io::write_field_csv(&mut &mut *w, h, &prop, &grid, kind, &sources)
        })?;
    }
    write_snapshots(&mut out, &name, &prop, &config.snapshots)?;
    if !config.sinks.is_empty() {
        let start = config.start.context("--sinks needs --start")?;
        write_sink_series(&mut out, &name, &prop, &grid, start, &config.sinks)?;
    }
    println!("graph: {} (N = {n})", config.graph);
    println!("times = {}, sources = {}", grid.len(), sources.len());
    for f in out.written() {
        println!("wrote {}", out.dir().join(f).display());
    }
    Ok(Status::Ok)
}

#[derive(Debug, Default, Serialize)]
pub struct Summary {
    pub config_hash: String,
    pub graph: String,
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r_c: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r_q: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub chi_bar: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub chi_bar_lb: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub chi_bar_lb_closed_form: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub crossing_time: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub envelope_exponent: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub envelope_window: Option<(f64, f64)>,
    pub warnings: Vec<String>,
}

/// Envelope fit window: tori use `(0, 6]`, everything else `(0, 5]`.
pub fn envelope_window(family: &GraphFamily) -> (f64, f64) {
    match family {
        GraphFamily::HypercubicTorus { .. } => (0.0, 6.0),
        _ => (0.0, 5.0),
    }
}

fn write_series(out: &mut Output, name: &str, format: Format, series: &ObservableSeries) -> anyhow::Result<()> {
    #[derive(Serialize)]
    struct SeriesJson<'a> {
        tag: String,
        t: &'a [f64],
        values: &'a [f64],
    }
    let tag = series.tag().to_string();
    match format {
        Format::Csv => out.write(&format!("{name}_{tag}.csv"), |w, h| io::write_series_csv(&mut &mut *w, h, &[series]))?,
        Format::Json => out.write_json(
            &format!("{name}_{tag}.json"),
            &SeriesJson { tag: tag.clone(), t: series.times(), values: series.values() },
        )?,
    };
    Ok(())
}

pub fn observables(config: &ExperimentConfig) -> anyhow::Result<Status> {
    let (graph, spec) = build(&config.graph)?;
    let grid = config.grid.time_grid()?;
    let dist = chemical_distances(&graph)?;
    let classes = spec.degeneracy_classes();
    let mut out = open("observables", config)?;
    let name = stem(&config.graph);
    let format = config.output.format;
    let wants = |o: ObservableName| config.observables.contains(&o);
    let mut summary = Summary {
        config_hash: config.hash(),
        graph: config.graph.to_string(),
        n: graph.node_count(),
        r_c: Some(mean_pairwise_distance(&dist)),
        ..Default::default()
    };
    let warn = |summary: &mut Summary, msg: String| {
        eprintln!("warning: {msg}");
        summary.warnings.push(msg);
    };

    let classical = SpectralField::new(&spec, grid.clone(), WalkKind::Classical);
    let quantum = SpectralField::new(&spec, grid.clone(), WalkKind::Quantum);
    let mut displacements: BTreeMap<&str, ObservableSeries> = BTreeMap::new();
    let need_mean = wants(ObservableName::AvgDisplacementMean)
        || wants(ObservableName::RatioClassicalOverQuantum)
        || wants(ObservableName::CrossingTime);
    if need_mean {
        displacements.insert("classical", site_averaged_displacement(&classical, &dist)?);
        displacements.insert("quantum", site_averaged_displacement(&quantum, &dist)?);
    }
    if wants(ObservableName::AvgDisplacementMean) {
        for (kind, s) in &displacements {
            write_series(&mut out, &format!("{name}_{kind}"), format, s)?;
        }
    }
    if wants(ObservableName::AvgDisplacementSite) {
        let j = config.start.unwrap_or(0);
        write_series(&mut out, &format!("{name}_classical"), format, &avg_displacement_from_site(&classical, &dist, j)?)?;
        write_series(&mut out, &format!("{name}_quantum"), format, &avg_displacement_from_site(&quantum, &dist, j)?)?;
    }
    if wants(ObservableName::AvgEuclideanDisplacementMean) {
        match lattice_euclidean_distances(&graph) {
            Ok(metric) => {
                for (kind, field) in [("classical", &classical), ("quantum", &quantum)] {
                    let s = site_averaged_metric(field, &metric, ObservableTag::AvgEuclideanDisplacementMean)?;
                    write_series(&mut out, &format!("{name}_{kind}"), format, &s)?;
                }
            }
            Err(_) => warn(&mut summary, format!("Euclidean displacement needs a lattice embedding; skipped for {}", config.graph)),
        }
    }
    if wants(ObservableName::RatioClassicalOverQuantum) {
        let ratio = ratio_series(&displacements["classical"], &displacements["quantum"])?;
        write_series(&mut out, &name, format, &ratio)?;
    }
    if wants(ObservableName::CrossingTime) {
        match crossing_time(&displacements["classical"], &displacements["quantum"]) {
            Ok(t) => summary.crossing_time = Some(t),
            Err(e) => warn(&mut summary, format!("crossing time: {e}")),
        }
    }
    if wants(ObservableName::ReturnProbClassical) {
        write_series(&mut out, &name, format, &return_prob_classical(&classes, &grid))?;
    }
    let pi_bar = return_prob_quantum(&spec, &grid);
    if wants(ObservableName::ReturnProbQuantum) {
        write_series(&mut out, &name, format, &pi_bar)?;
    }
    if wants(ObservableName::ReturnProbLowerBound) {
        write_series(&mut out, &name, format, &return_prob_lower_bound(&classes, &grid))?;
    }
    if wants(ObservableName::EnvelopeExponent) {
        let window = envelope_window(&config.graph);
        summary.envelope_window = Some(window);
        match envelope_exponent(&pi_bar, window) {
            Ok(mu) => summary.envelope_exponent = Some(mu),
            Err(e) => warn(&mut summary, format!("envelope exponent on ({}, {}]: {e}", window.0, window.1)),
        }
    }
    if wants(ObservableName::LongTimeAverages) {
        let rq_grid = TimeGrid::span(DEFAULT_RQ_WINDOW.0, DEFAULT_RQ_WINDOW.1, config.grid.step, config.grid.gamma)?;
        let rq_field = SpectralField::new(&spec, rq_grid, WalkKind::Quantum);
        let r_q = stationary_quantum_displacement(&rq_field, &dist, DEFAULT_RQ_WINDOW)?;
        let lta = LongTimeAverages::compute(&spec, &classes, &dist, r_q)?;
        out.write(&format!("{name}_chi.csv"), |w, h| io::write_matrix_csv(&mut &mut *w, h, &lta.chi))?;
        out.write_json(&format!("{name}_chi_summary.json"), &io::LtaSummary::from(&lta))?;
        summary.r_q = Some(r_q);
        summary.chi_bar = Some(lta.chi_bar);
        summary.chi_bar_lb = Some(lta.chi_bar_lb);
        summary.eta = Some(lta.eta);
    }
    if wants(ObservableName::ChiBarLbClosedForm) {
        match config.graph {
            GraphFamily::DualSierpinski { g } => summary.chi_bar_lb_closed_form = Some(dsg_lta_lb_closed_form(g)?),
            other => warn(&mut summary, format!("closed-form chi_bar_lb applies only to the DSG; skipped for {other}")),
        }
    }
    out.write_json(&format!("{name}_summary.json"), &summary)?;
    println!("{}", serde_json::to_string_pretty(&summary)?);
    Ok(Status::Ok)
}
