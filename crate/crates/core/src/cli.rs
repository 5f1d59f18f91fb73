//! Command line front end for the `thick` binary.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::complex::{grid_skeleton, CubicalComplex};
use crate::error::{param, Error, Result};
use crate::geometry::{combinatorial_thickness, neighborhood_volume};
use crate::io::{self, Cell, Format, Table};
use crate::knot::{
    check_convol_bound_with, nested_block_tree_with, regular_polygon, torus_knot, PlKnot, TreeOptions,
};
use crate::nerve::homotopy_invariant_report;
use crate::sweep::{self, Built, Construction, Generator, Measure, Params, SweepConfig};
use crate::width::{coordinate_map, fill_constant_estimate, filling_width_lower_bound, pl_map_width_upper_cubical};

#[derive(Debug, Parser)]
#[command(name = "thick", version, about = "Thick embeddings, width bounds, nerves and knot decompositions")]
pub struct Cli {
    /// Base seed for every random choice.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Output file; standard output when absent.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Format of tabular output.
    #[arg(long, global = true, value_enum, default_value = "csv")]
    pub format: Format,
    /// Worker threads (defaults to the number of cores).
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a complex and write it as JSON.
    Gen(GenArgs),
    /// Embed a complex and write the (finest) embedding as JSON.
    Embed(EmbedArgs),
    /// Measure an embedding.
    Measure(MeasureArgs),
    /// Filling constants and width bounds on grid skeleta.
    Width(WidthArgs),
    /// Ball-cover nerve of an embedding at scale T.
    Nerve(NerveArgs),
    /// Distortion, conformal length and block trees of a knot.
    Knot(KnotArgs),
    /// Run a size sweep described by a TOML file.
    Sweep(SweepArgs),
    /// Log-log plot of a sweep table as SVG.
    Plot(PlotArgs),
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[arg(long, value_enum)]
    pub generator: Generator,
    /// Size parameter N of the generator.
    #[arg(long)]
    pub size: usize,
    #[arg(long, default_value_t = 6)]
    pub degree: usize,
    #[arg(long, default_value_t = 1)]
    pub dim: usize,
}

#[derive(Debug, Args)]
pub struct EmbedArgs {
    /// Complex JSON written by `gen`.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, value_enum, default_value = "random")]
    pub construction: Construction,
    #[arg(long, default_value_t = 3)]
    pub ambient: usize,
    #[arg(long, default_value_t = 10.0)]
    pub radius: f64,
    #[arg(long, default_value_t = 400)]
    pub route_attempts: usize,
}

#[derive(Debug, Args)]
pub struct MeasureArgs {
    /// Embedding JSON written by `embed`.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, value_enum, value_delimiter = ',', default_value = "thickness,strong-thickness,radius,independent-crossings,total-crossings")]
    pub measures: Vec<Measure>,
    #[arg(long, default_value_t = 64)]
    pub directions: usize,
    /// Also estimate the volume of the T-neighbourhood.
    #[arg(long)]
    pub volume_t: Option<f64>,
    #[arg(long, default_value_t = 100_000)]
    pub volume_samples: usize,
}

#[derive(Debug, Args)]
pub struct WidthArgs {
    /// Grid sides S; each row treats the k-skeleton of [0,S]^D.
    #[arg(long, value_delimiter = ',', default_value = "4,8,16")]
    pub sides: Vec<usize>,
    #[arg(long, default_value_t = 2)]
    pub ambient: usize,
    #[arg(long, default_value_t = 1)]
    pub dim: usize,
    /// Random cycles per filling estimate.
    #[arg(long, default_value_t = 120)]
    pub samples: usize,
    /// Grid resolution per axis for fibre sampling.
    #[arg(long, default_value_t = 64)]
    pub resolution: usize,
}

#[derive(Debug, Args)]
pub struct NerveArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub t: f64,
    #[arg(long, default_value_t = 100_000)]
    pub volume_samples: usize,
}

#[derive(Debug, Args)]
pub struct KnotArgs {
    /// Knot text file (one `x y z` point per line).
    #[arg(long, conflicts_with_all = ["torus", "polygon"])]
    pub input: Option<PathBuf>,
    /// Torus knot `p,q`.
    #[arg(long, value_delimiter = ',')]
    pub torus: Option<Vec<usize>>,
    /// Regular polygon with this many sides.
    #[arg(long)]
    pub polygon: Option<usize>,
    #[arg(long, default_value_t = 10.0)]
    pub big_r: f64,
    #[arg(long, default_value_t = 2.0)]
    pub small_r: f64,
    #[arg(long, default_value_t = 120)]
    pub points: usize,
    #[arg(long, default_value_t = 1e-3)]
    pub tol: f64,
    /// Ball evaluations for the conformal length.
    #[arg(long, default_value_t = 4000)]
    pub budget: u64,
    /// Cap on distortion branch-and-bound boxes.
    #[arg(long, default_value_t = crate::knot::DISTORTION_BUDGET)]
    pub distortion_budget: u64,
    /// Build the nested block tree and write it here as JSON.
    #[arg(long)]
    pub tree_out: Option<PathBuf>,
    /// Write the knot's points here.
    #[arg(long)]
    pub knot_out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// TOML sweep description.
    #[arg(long)]
    pub config: PathBuf,
    /// Write medians and fitted slopes here.
    #[arg(long)]
    pub summary: Option<PathBuf>,
    /// Write an SVG plot of the first measure here.
    #[arg(long)]
    pub plot: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PlotArgs {
    /// CSV table with columns n,measure,value (or x,y).
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub measure: Option<String>,
    #[arg(long, default_value = "scaling")]
    pub title: String,
}

fn emit(out: &Option<PathBuf>, text: &str) -> Result<()> {
    match out {
        Some(p) => write(p, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn write(p: &Path, text: &str) -> Result<()> {
    std::fs::write(p, text).map_err(|e| Error::Data(format!("{}: {e}", p.display())))
}

fn params_from(a: &EmbedArgs) -> Params {
    Params { ambient: a.ambient, radius: a.radius, route_attempts: a.route_attempts, ..Params::default() }
}

pub fn run(cli: Cli) -> Result<()> {
    if let Some(j) = cli.jobs {
        if j == 0 {
            return Err(Error::Config("--jobs must be positive".into()));
        }
        // Fails only if a pool already exists, which is harmless.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(j).build_global();
    }
    let seed = cli.seed;
    match &cli.command {
        Command::Gen(a) => {
            let p = Params { degree: a.degree, dim: a.dim, ..Params::default() };
            let x = sweep::build_complex(a.generator, a.size, &p, seed)?;
            emit(&cli.out, &io::complex_to_json(&x))
        }
        Command::Embed(a) => {
            let x = io::complex_from_json(&io::read_file(&a.input)?)?;
            let size = match a.construction {
                Construction::FoldedGrid => (x.vertex_count() as f64).sqrt().round() as usize,
                _ => x.vertex_count(),
            };
            let b = sweep::construct(&x, a.construction, size, &params_from(a), seed)?;
            emit(&cli.out, &io::embedding_to_json(b.fine()))
        }
        Command::Measure(a) => {
            let e = io::embedding_from_json(&io::read_file(&a.input)?)?;
            let t = combinatorial_thickness(&e).value;
            let x = e.complex().clone();
            let b = Built::Plain(e, t);
            let p = Params { directions: a.directions, ..Params::default() };
            let mut table = Table::new(["measure", "value"]);
            for &m in &a.measures {
                table.push(vec![m.name().into(), sweep::measure(&x, &b, m, &p, seed)?.into()]);
            }
            if let Some(t) = a.volume_t {
                let v = neighborhood_volume(b.fine(), t, a.volume_samples, seed)?;
                table.push(vec!["neighborhood-volume".into(), v.value.into()]);
                table.push(vec!["neighborhood-volume-ci95".into(), v.ci95.into()]);
            }
            emit(&cli.out, &table.render(cli.format))
        }
        Command::Width(a) => emit(&cli.out, &width_table(a, seed)?.render(cli.format)),
        Command::Nerve(a) => {
            let e = io::embedding_from_json(&io::read_file(&a.input)?)?;
            let r = homotopy_invariant_report(&e, a.t, seed, a.volume_samples)?;
            let betti = r.betti.iter().map(|b| b.to_string()).collect::<Vec<_>>().join(" ");
            let mut table = Table::new(["t", "balls", "nerve_simplices", "nerve_dim", "betti", "rank", "volume", "ratio"]);
            table.push(vec![
                r.t.into(),
                r.ball_count.into(),
                r.nerve_simplex_count.into(),
                r.nerve_dim.into(),
                betti.into(),
                r.rank.into(),
                r.volume.value.into(),
                r.ratio.into(),
            ]);
            emit(&cli.out, &table.render(cli.format))
        }
        Command::Knot(a) => knot(a, &cli),
        Command::Sweep(a) => {
            let cfg = SweepConfig::from_toml(&io::read_file(&a.config).map_err(|e| Error::Config(e.to_string()))?)?;
            let r = sweep::run_sweep(&cfg)?;
            if let Some(p) = &a.summary {
                let mut text = r.summary_table().render(cli.format);
                text.push('\n');
                text.push_str(&r.fit_table().render(cli.format));
                write(p, &text)?;
            }
            if let Some(p) = &a.plot {
                let s = &r.summaries[0];
                let pts: Vec<(f64, f64)> = s.medians.iter().map(|&(n, v)| (n as f64, v)).collect();
                write(p, &sweep::render_scaling_plot(&pts, &s.measure)?)?;
            }
            emit(&cli.out, &r.rows_table().render(cli.format))
        }
        Command::Plot(a) => {
            let t = Table::from_csv(&io::read_file(&a.input)?)?;
            let pts = sweep::scaling_points(&t, a.measure.as_deref())?;
            emit(&cli.out, &sweep::render_scaling_plot(&pts, &a.title)?)
        }
    }
}

fn width_table(a: &WidthArgs, seed: u64) -> Result<Table> {
    let mut t = Table::new(["side", "fill", "lower_bound", "upper_count", "vertices"]);
    for &s in &a.sides {
        let x: CubicalComplex = grid_skeleton(a.dim, a.ambient, s)?;
        let fill: Vec<f64> = (1..=a.dim)
            .map(|j| fill_constant_estimate(a.ambient, a.dim, s, j, a.samples, seed).map(|f| f.value.max(1.0)))
            .collect::<Result<_>>()?;
        let lower = filling_width_lower_bound(&x, &fill)?;
        let axes: Vec<usize> = (0..a.dim).collect();
        let upper = pl_map_width_upper_cubical(&x, &coordinate_map(&x, &axes), a.resolution)?;
        let fills = fill.iter().map(|f| f.to_string()).collect::<Vec<_>>().join(" ");
        t.push(vec![s.into(), fills.into(), lower.value.into(), upper.count.into(), lower.vertices.into()]);
    }
    Ok(t)
}

fn load_knot(a: &KnotArgs) -> Result<(String, PlKnot)> {
    if let Some(p) = &a.input {
        return Ok((p.display().to_string(), io::knot_from_text(&io::read_file(p)?)?));
    }
    if let Some(pq) = &a.torus {
        if pq.len() != 2 {
            return Err(param("--torus takes two values p,q"));
        }
        return Ok((format!("T({},{})", pq[0], pq[1]), torus_knot(pq[0], pq[1], a.big_r, a.small_r, a.points)?));
    }
    if let Some(m) = a.polygon {
        return Ok((format!("{m}-gon"), regular_polygon(m, a.big_r)?));
    }
    Err(param("give one of --input, --torus, --polygon"))
}

fn knot(a: &KnotArgs, cli: &Cli) -> Result<()> {
    let (name, k) = load_knot(a)?;
    if let Some(p) = &a.knot_out {
        write(p, &io::knot_to_text(&k))?;
    }
    let check = check_convol_bound_with(&k, a.budget, a.tol, cli.seed, a.distortion_budget)?;
    let mut cols = vec!["knot", "points", "length", "distortion_lo", "distortion_hi", "convol_lower", "bound_holds"];
    let mut row: Vec<Cell> = vec![
        name.into(),
        k.len().into(),
        k.total_length().into(),
        check.distortion.lo.into(),
        check.distortion.hi.into(),
        check.convol.lower.into(),
        check.holds.into(),
    ];
    if let Some(p) = &a.tree_out {
        let t = nested_block_tree_with(&k, cli.seed, &TreeOptions { convol_budget: a.budget, ..TreeOptions::default() })?;
        write(p, &io::block_tree_to_json(&t))?;
        cols.extend(["tree_nodes", "tree_depth", "tree_verified"]);
        row.extend([t.nodes.len().into(), t.depth().into(), t.all_verified().into()]);
    }
    let mut table = Table::new(cols);
    table.push(row);
    emit(&cli.out, &table.render(cli.format))?;
    if !check.holds {
        return Err(Error::Construction(format!(
            "conformal length {} exceeds 4 x distortion {}: numerical bug",
            check.convol.lower, check.distortion.hi
        )));
    }
    Ok(())
}
