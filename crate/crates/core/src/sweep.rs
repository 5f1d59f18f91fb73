//! Size sweeps: build a complex for every size and seed, embed it, measure
//! it, and fit log-log scaling exponents to the medians.
//!
//! A sweep is described by a TOML document:
//!
//! ```toml
//! generator = "cycle"          # cycle | path | random-bipartite | simplex-skeleton | grid
//! construction = "random"      # random | two-scale | two-scale-strong | kb | folded-grid
//! measures = ["thickness"]     # see `Measure`
//! sizes = [8, 16, 32, 64, 128]
//! seeds = 200
//! seed = 0                     # base seed, optional
//!
//! [params]                     # all optional
//! ambient = 3
//! radius = 10.0
//! degree = 6
//! dim = 1
//! directions = 64
//! route_attempts = 400
//! ```

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::complex::{
    cycle_graph, expansion_constant, path_graph, random_bipartite_graph, simplex_skeleton, ExpansionMode,
    SimplicialComplex,
};
use crate::construct::{
    folded_grid_embedding, grid_graph, kb_sphere_embedding, random_facewise_linear, two_scale_embedding,
    TwoScaleOptions,
};
use crate::error::{Error, Result};
use crate::geometry::{
    bisecting_sweep, combinatorial_thickness, random_directions, strong_combinatorial_thickness, EmbeddedComplex,
    PlImage, RefinedEmbedding,
};
use crate::io::{Cell, Table};
use crate::rng;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Generator {
    /// Cycle on `N` vertices.
    Cycle,
    /// Path on `N` vertices.
    Path,
    /// Union of `degree` random matchings on `N + N` vertices.
    RandomBipartite,
    /// `dim`-skeleton of the simplex on `N` vertices.
    SimplexSkeleton,
    /// `N x N` grid graph.
    Grid,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Construction {
    Random,
    TwoScale,
    TwoScaleStrong,
    Kb,
    FoldedGrid,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Measure {
    /// Combinatorial thickness; for two-scale runs, the thickness reached before rescaling.
    Thickness,
    StrongThickness,
    /// Radius of the image about the origin.
    Radius,
    /// Independent crossings of the best bisecting hyperplane.
    IndependentCrossings,
    /// All top faces met by that hyperplane.
    TotalCrossings,
    /// Edge expansion of the complex (exact up to 24 vertices).
    Expansion,
    /// Number of simplices of the complex.
    Simplices,
}

impl Measure {
    pub fn name(self) -> &'static str {
        match self {
            Measure::Thickness => "thickness",
            Measure::StrongThickness => "strong-thickness",
            Measure::Radius => "radius",
            Measure::IndependentCrossings => "independent-crossings",
            Measure::TotalCrossings => "total-crossings",
            Measure::Expansion => "expansion",
            Measure::Simplices => "simplices",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Params {
    pub ambient: usize,
    pub radius: f64,
    pub degree: usize,
    pub dim: usize,
    pub directions: usize,
    pub route_attempts: usize,
}

impl Default for Params {
    fn default() -> Self {
        Params { ambient: 3, radius: 10.0, degree: 6, dim: 1, directions: 64, route_attempts: 400 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub generator: Generator,
    #[serde(default = "default_construction")]
    pub construction: Construction,
    pub measures: Vec<Measure>,
    pub sizes: Vec<usize>,
    pub seeds: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub params: Params,
}

fn default_construction() -> Construction {
    Construction::Random
}

impl SweepConfig {
    pub fn from_toml(s: &str) -> Result<Self> {
        let c: SweepConfig = toml::from_str(s).map_err(|e| Error::Config(e.message().to_string()))?;
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        if self.sizes.is_empty() {
            return Err(Error::Config("sizes must not be empty".into()));
        }
        if self.seeds == 0 {
            return Err(Error::Config("seeds must be positive".into()));
        }
        if self.measures.is_empty() {
            return Err(Error::Config("measures must not be empty".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub n: usize,
    pub seed: usize,
    pub measure: String,
    pub value: f64,
}

/// Least-squares line through `(ln x, ln y)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Fit {
    pub slope: f64,
    /// Standard error of the slope; zero with only two points.
    pub stderr: f64,
    pub intercept: f64,
    pub points: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeasureSummary {
    pub measure: String,
    /// `(N, median)` in increasing `N`.
    pub medians: Vec<(usize, f64)>,
    /// `None` when the medians cannot be fitted (too few or non-positive).
    pub fit: Option<Fit>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    /// Sorted by `(n, seed, measure)`.
    pub rows: Vec<Row>,
    pub summaries: Vec<MeasureSummary>,
}

pub fn median(v: &mut [f64]) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n == 0 {
        f64::NAN
    } else if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

pub fn fit_loglog(points: &[(f64, f64)]) -> Result<Fit> {
    if points.len() < 2 {
        return Err(Error::Data("a fit needs at least two points".into()));
    }
    if points.iter().any(|&(x, y)| !(x > 0.0 && y > 0.0 && x.is_finite() && y.is_finite())) {
        return Err(Error::Data("log-log fit needs finite positive values".into()));
    }
    let n = points.len() as f64;
    let lx: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ly: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::Data("log-log fit needs two distinct x values".into()));
    }
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let stderr = if points.len() > 2 {
        let ssr: f64 = lx.iter().zip(&ly).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum();
        (ssr / (n - 2.0) / sxx).sqrt()
    } else {
        0.0
    };
    Ok(Fit { slope, stderr, intercept, points: points.len() })
}

pub fn build_complex(g: Generator, size: usize, p: &Params, seed: u64) -> Result<SimplicialComplex> {
    match g {
        Generator::Cycle => cycle_graph(size),
        Generator::Path => path_graph(size),
        Generator::RandomBipartite => random_bipartite_graph(size, p.degree, seed),
        Generator::SimplexSkeleton => simplex_skeleton(p.dim, size),
        Generator::Grid => grid_graph(size),
    }
}

/// Output of a construction, with the thickness the construction itself reports.
pub enum Built {
    Plain(EmbeddedComplex, f64),
    Refined(RefinedEmbedding, f64),
}

impl Built {
    pub fn reported_thickness(&self) -> f64 {
        match self {
            Built::Plain(_, t) | Built::Refined(_, t) => *t,
        }
    }

    pub fn radius(&self) -> f64 {
        match self {
            Built::Plain(e, _) => e.radius(),
            Built::Refined(e, _) => e.fine.radius(),
        }
    }

    /// Linear embedding of the finest complex.
    pub fn fine(&self) -> &EmbeddedComplex {
        match self {
            Built::Plain(e, _) => e,
            Built::Refined(e, _) => &e.fine,
        }
    }
}

pub fn construct(x: &SimplicialComplex, c: Construction, size: usize, p: &Params, seed: u64) -> Result<Built> {
    match c {
        Construction::Random => {
            let (e, t) = random_facewise_linear(x, p.ambient, p.radius, seed)?;
            Ok(Built::Plain(e, t))
        }
        Construction::TwoScale | Construction::TwoScaleStrong => {
            let opts = TwoScaleOptions { strong: c == Construction::TwoScaleStrong, ..TwoScaleOptions::default() };
            let t = two_scale_embedding(x, p.ambient, seed, opts)?;
            Ok(Built::Refined(t.embedding, t.achieved_eps))
        }
        Construction::Kb => {
            let k = kb_sphere_embedding(x, seed, p.route_attempts)?;
            Ok(Built::Refined(k.embedding, k.thickness))
        }
        Construction::FoldedGrid => {
            let f = folded_grid_embedding(size, p.ambient)?;
            if f.embedding.complex() != x {
                return Err(Error::Config("folded-grid needs the grid generator".into()));
            }
            Ok(Built::Plain(f.embedding, f.thickness))
        }
    }
}

fn crossings<E: PlImage>(e: &E, p: &Params, seed: u64) -> Result<(usize, usize)> {
    let s = bisecting_sweep(e, &random_directions(e.ambient_dim(), p.directions, seed))?;
    Ok((s.independent, s.total))
}

pub fn measure(x: &SimplicialComplex, b: &Built, m: Measure, p: &Params, seed: u64) -> Result<f64> {
    let cross = || match b {
        Built::Plain(e, _) => crossings(e, p, seed),
        Built::Refined(e, _) => crossings(e, p, seed),
    };
    Ok(match m {
        Measure::Thickness => match b {
            Built::Plain(e, _) => combinatorial_thickness(e).value,
            Built::Refined(..) => b.reported_thickness(),
        },
        Measure::StrongThickness => strong_combinatorial_thickness(b.fine()).value,
        Measure::Radius => b.radius(),
        Measure::IndependentCrossings => cross()?.0 as f64,
        Measure::TotalCrossings => cross()?.1 as f64,
        Measure::Expansion => expansion_constant(x, ExpansionMode::Auto)?.value,
        Measure::Simplices => x.total_count() as f64,
    })
}

fn run_cell(cfg: &SweepConfig, size: usize, s: usize) -> Result<Vec<Row>> {
    let cell_seed = rng::derive(rng::derive(cfg.seed, size as u64), s as u64);
    let x = build_complex(cfg.generator, size, &cfg.params, rng::derive(cell_seed, 0))?;
    let b = construct(&x, cfg.construction, size, &cfg.params, rng::derive(cell_seed, 1))?;
    cfg.measures
        .iter()
        .map(|&m| {
            let value = measure(&x, &b, m, &cfg.params, rng::derive(cell_seed, 2))?;
            Ok(Row { n: size, seed: s, measure: m.name().to_string(), value })
        })
        .collect()
}

/// Runs every `(size, seed)` cell in parallel. Rows and summaries come out
/// in canonical order regardless of scheduling; the first failing cell in
/// that order determines the error.
pub fn run_sweep(cfg: &SweepConfig) -> Result<SweepResult> {
    cfg.validate()?;
    let mut sizes = cfg.sizes.clone();
    sizes.sort_unstable();
    sizes.dedup();
    let cells: Vec<(usize, usize)> = sizes.iter().flat_map(|&n| (0..cfg.seeds).map(move |s| (n, s))).collect();
    let out: Vec<Result<Vec<Row>>> = cells.par_iter().map(|&(n, s)| run_cell(cfg, n, s)).collect();
    let mut rows = Vec::new();
    for r in out {
        rows.extend(r?);
    }
    rows.sort_by(|a, b| (a.n, a.seed, &a.measure).cmp(&(b.n, b.seed, &b.measure)));

    let mut measures: Vec<Measure> = cfg.measures.clone();
    measures.sort();
    measures.dedup();
    let summaries = measures
        .into_iter()
        .map(|m| {
            let medians: Vec<(usize, f64)> = sizes
                .iter()
                .map(|&n| {
                    let mut v: Vec<f64> =
                        rows.iter().filter(|r| r.n == n && r.measure == m.name()).map(|r| r.value).collect();
                    (n, median(&mut v))
                })
                .collect();
            let pts: Vec<(f64, f64)> = medians.iter().map(|&(n, v)| (n as f64, v)).collect();
            MeasureSummary { measure: m.name().to_string(), medians, fit: fit_loglog(&pts).ok() }
        })
        .collect();
    Ok(SweepResult { rows, summaries })
}

impl SweepResult {
    pub fn rows_table(&self) -> Table {
        let mut t = Table::new(["n", "seed", "measure", "value"]);
        for r in &self.rows {
            t.push(vec![r.n.into(), r.seed.into(), r.measure.as_str().into(), r.value.into()]);
        }
        t
    }

    pub fn summary_table(&self) -> Table {
        let mut t = Table::new(["measure", "n", "median"]);
        for s in &self.summaries {
            for &(n, v) in &s.medians {
                t.push(vec![s.measure.as_str().into(), n.into(), v.into()]);
            }
        }
        t
    }

    pub fn fit_table(&self) -> Table {
        let mut t = Table::new(["measure", "slope", "stderr", "intercept", "points"]);
        for s in &self.summaries {
            if let Some(f) = &s.fit {
                t.push(vec![s.measure.as_str().into(), f.slope.into(), f.stderr.into(), f.intercept.into(), f.points.into()]);
            }
        }
        t
    }
}

/// `(N, median)` points for one measure of a row table with columns
/// `n`, `measure`, `value`; a table with columns `x`, `y` is taken as is.
/// `measure` defaults to the first one in the table.
pub fn scaling_points(t: &Table, measure: Option<&str>) -> Result<Vec<(f64, f64)>> {
    let num = |c: &Cell| c.as_f64().ok_or_else(|| Error::Data(format!("non-numeric value {c:?}")));
    if let (Some(x), Some(y)) = (t.column("x"), t.column("y")) {
        return t.rows.iter().map(|r| Ok((num(&r[x])?, num(&r[y])?))).collect();
    }
    let (Some(nc), Some(vc)) = (t.column("n"), t.column("value").or(t.column("median"))) else {
        return Err(Error::Data("table needs columns x,y or n,value".into()));
    };
    let mc = t.column("measure");
    let want: Option<String> = match (measure, mc) {
        (Some(m), _) => Some(m.to_string()),
        (None, Some(c)) => t.rows.first().map(|r| match &r[c] {
            Cell::Text(s) => s.clone(),
            other => format!("{other:?}"),
        }),
        (None, None) => None,
    };
    let mut groups: std::collections::BTreeMap<u64, (f64, Vec<f64>)> = Default::default();
    for r in &t.rows {
        if let (Some(c), Some(w)) = (mc, &want) {
            if !matches!(&r[c], Cell::Text(s) if s == w) {
                continue;
            }
        }
        let n = num(&r[nc])?;
        groups.entry(n.to_bits()).or_insert((n, Vec::new())).1.push(num(&r[vc])?);
    }
    let mut pts: Vec<(f64, f64)> = groups.into_values().map(|(n, mut v)| (n, median(&mut v))).collect();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    Ok(pts)
}

const W: f64 = 640.0;
const H: f64 = 480.0;
const MARGIN: f64 = 64.0;

/// Standalone SVG: one marker per point on log-log axes, the least-squares
/// line and its slope.
pub fn render_scaling_plot(points: &[(f64, f64)], title: &str) -> Result<String> {
    if points.is_empty() {
        return Err(Error::Data("nothing to plot".into()));
    }
    if points.iter().any(|&(x, y)| !(x > 0.0 && y > 0.0 && x.is_finite() && y.is_finite())) {
        return Err(Error::Data("log-log plot needs finite positive values".into()));
    }
    let fit = fit_loglog(points).ok();
    let lx: Vec<f64> = points.iter().map(|p| p.0.log10()).collect();
    let ly: Vec<f64> = points.iter().map(|p| p.1.log10()).collect();
    let span = |v: &[f64]| {
        let lo = v.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        if hi - lo < 1e-9 {
            (lo - 0.5, hi + 0.5)
        } else {
            let pad = 0.05 * (hi - lo);
            (lo - pad, hi + pad)
        }
    };
    let (x0, x1) = span(&lx);
    let (y0, y1) = span(&ly);
    let px = |x: f64| MARGIN + (x - x0) / (x1 - x0) * (W - 2.0 * MARGIN);
    let py = |y: f64| H - MARGIN - (y - y0) / (y1 - y0) * (H - 2.0 * MARGIN);

    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">"#);
    let _ = writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{}" y="24" font-size="16" text-anchor="middle">{}</text>"#, W / 2.0, escape(title));
    let _ = writeln!(
        s,
        r#"<path d="M{m} {b} H{r} M{m} {b} V{m}" stroke="black" fill="none"/>"#,
        m = MARGIN,
        b = H - MARGIN,
        r = W - MARGIN
    );
    let _ = writeln!(s, r#"<text x="{}" y="{}" font-size="12" text-anchor="middle">log10 N</text>"#, W / 2.0, H - 16.0);
    let _ = writeln!(
        s,
        r#"<text x="16" y="{}" font-size="12" transform="rotate(-90 16 {})" text-anchor="middle">log10 value</text>"#,
        H / 2.0,
        H / 2.0
    );
    for (i, v) in [(x0, y0), (x1, y1)].iter().enumerate() {
        let _ = writeln!(s, r#"<text x="{:.1}" y="{:.1}" font-size="10">{:.3}</text>"#, px(v.0), H - MARGIN + 14.0, v.0);
        let _ = writeln!(s, r#"<text x="4" y="{:.1}" font-size="10">{:.3}</text>"#, py(if i == 0 { y0 } else { y1 }), v.1);
    }
    for (x, y) in lx.iter().zip(&ly) {
        let _ = writeln!(s, r#"<circle cx="{:.2}" cy="{:.2}" r="4" fill="steelblue"/>"#, px(*x), py(*y));
    }
    if let Some(f) = &fit {
        // ln y = a + b ln x  =>  log10 y = a / ln 10 + b log10 x
        let a = f.intercept / std::f64::consts::LN_10;
        let (xa, xb) = (x0, x1);
        let _ = writeln!(
            s,
            r#"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="crimson" stroke-width="1.5"/>"#,
            px(xa),
            py(a + f.slope * xa),
            px(xb),
            py(a + f.slope * xb)
        );
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" font-size="13">slope = {:.3} ± {:.3}</text>"#,
            MARGIN + 12.0,
            MARGIN,
            f.slope,
            f.stderr
        );
    }
    s.push_str("</svg>\n");
    Ok(s)
}

fn escape(t: &str) -> String {
    t.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(text: &str) -> Result<SweepConfig> {
        SweepConfig::from_toml(text)
    }

    #[test]
    fn fit_recovers_exact_power() {
        let pts: Vec<(f64, f64)> = [2.0, 4.0, 8.0, 16.0].iter().map(|&x: &f64| (x, 3.0 * x.powf(-2.0))).collect();
        let f = fit_loglog(&pts).unwrap();
        assert!((f.slope + 2.0).abs() < 1e-12 && f.stderr < 1e-12);
        assert!((f.intercept - 3f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn median_of_even_and_odd() {
        assert_eq!(median(&mut [3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&mut [4.0, 1.0, 2.0, 3.0]), 2.5);
    }

    #[test]
    fn config_errors() {
        let e = cfg("generator = \"torus\"\nmeasures=[\"thickness\"]\nsizes=[8]\nseeds=1").unwrap_err();
        match e {
            Error::Config(m) => assert!(m.contains("cycle") && m.contains("random-bipartite"), "{m}"),
            other => panic!("{other:?}"),
        }
        assert!(matches!(cfg("generator = \"cycle\"\nmeasures=[\"thickness\"]\nsizes=[]\nseeds=1"), Err(Error::Config(_))));
        assert!(matches!(cfg("generator = \"cycle\"\nmeasures=[\"girth\"]\nsizes=[8]\nseeds=1"), Err(Error::Config(_))));
    }

    #[test]
    fn small_sweep_is_deterministic_and_sorted() {
        let c = cfg("generator = \"cycle\"\nmeasures = [\"thickness\", \"radius\"]\nsizes = [16, 8]\nseeds = 5\nseed = 3").unwrap();
        let a = run_sweep(&c).unwrap();
        let b = run_sweep(&c).unwrap();
        assert_eq!(a.rows_table().to_csv(), b.rows_table().to_csv());
        assert_eq!(a.rows.len(), 20);
        assert_eq!((a.rows[0].n, a.rows[0].seed, a.rows[0].measure.as_str()), (8, 0, "radius"));
        assert!(a.summaries.iter().all(|s| s.fit.is_some()));
    }

    #[test]
    fn plot_has_one_marker_per_point_and_one_line() {
        let pts = [(1.0, 1.0), (2.0, 0.25), (4.0, 0.0625)];
        let svg = render_scaling_plot(&pts, "t").unwrap();
        assert_eq!(svg.matches("<circle").count(), 3);
        assert_eq!(svg.matches("<line").count(), 1);
        assert!(svg.contains(&format!("slope = {:.3}", fit_loglog(&pts).unwrap().slope)));
        assert!(matches!(render_scaling_plot(&[], "t"), Err(Error::Data(_))));
    }

    #[test]
    fn plot_points_from_rows() {
        let mut t = Table::new(["n", "seed", "measure", "value"]);
        for (n, s, m, v) in [(8, 0, "a", 1.0), (8, 1, "a", 3.0), (8, 0, "b", 9.0), (16, 0, "a", 0.5)] {
            t.push(vec![Cell::from(n as usize), Cell::from(s as usize), m.into(), v.into()]);
        }
        assert_eq!(scaling_points(&t, None).unwrap(), vec![(8.0, 2.0), (16.0, 0.5)]);
        assert_eq!(scaling_points(&t, Some("b")).unwrap(), vec![(8.0, 9.0)]);
        t.rows[0][3] = "x".into();
        assert!(matches!(scaling_points(&t, None), Err(Error::Data(_))));
    }
}
