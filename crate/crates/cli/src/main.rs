use std::fs;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};

use rumorsim::backend::BackendKind;
use rumorsim::engine::read_trace;
use rumorsim::graph::{self, ExportFormat, Graph, NetworkProperties};
use rumorsim::metrics::{self, aggregate_matrix, build_series, percent, rumor_label};
use rumorsim::sweep::{run_sweep, CellStatus, ExperimentSpec};
use rumorsim::SimulationTrace;

#[derive(Parser)]
#[command(name = "rumorsim", version, about = "Rumor spreading simulations on social networks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a random network and print its properties.
    GenNetwork(GenArgs),
    /// Print structural properties of a network file.
    Props {
        path: PathBuf,
        /// Print JSON instead of a table.
        #[arg(long)]
        json: bool,
    },
    /// Run an experiment spec (a single config or a sweep).
    Run(RunArgs),
    /// Summarize the traces in a directory.
    Report {
        dir: PathBuf,
        /// Belief threshold; defaults to the one recorded in the traces.
        #[arg(long)]
        threshold: Option<f64>,
        /// Where to write the reports; defaults to the trace directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum NetworkType {
    ErdosRenyi,
    ScaleFree,
    SmallWorld,
}

#[derive(Clone, Copy, ValueEnum)]
enum FileFormat {
    Edgelist,
    Graphml,
    Dot,
}

#[derive(clap::Args)]
struct GenArgs {
    #[arg(long = "type", value_enum)]
    kind: NetworkType,
    #[arg(long)]
    n: usize,
    /// Edge probability (erdos-renyi).
    #[arg(long)]
    p: Option<f64>,
    /// Edges per new node (scale-free).
    #[arg(long)]
    m: Option<usize>,
    /// Lattice degree (small-world).
    #[arg(long)]
    k: Option<usize>,
    /// Rewiring probability (small-world).
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "edgelist")]
    format: FileFormat,
}

#[derive(Clone, Copy, ValueEnum)]
enum BackendArg {
    Rule,
    Remote,
    Replay,
}

#[derive(clap::Args)]
struct RunArgs {
    spec: PathBuf,
    #[arg(long)]
    iterations: Option<u64>,
    /// Run only this master seed instead of the spec's seed axis.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_enum)]
    backend: Option<BackendArg>,
    /// Transcript to replay (with --backend replay).
    #[arg(long)]
    transcript: Option<PathBuf>,
    /// Record backend exchanges next to each trace.
    #[arg(long)]
    record: bool,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    workers: Option<usize>,
    /// Print the cells and exit.
    #[arg(long)]
    dry_run: bool,
}

fn need<T>(value: Option<T>, flag: &str, kind: &str) -> Result<T> {
    value.with_context(|| format!("--{flag} is required for --type {kind}"))
}

fn gen_network(args: GenArgs) -> Result<()> {
    let g = match args.kind {
        NetworkType::ErdosRenyi => graph::gen_erdos_renyi(args.n, need(args.p, "p", "erdos-renyi")?, args.seed)?,
        NetworkType::ScaleFree => graph::gen_scale_free(args.n, need(args.m, "m", "scale-free")?, args.seed)?,
        NetworkType::SmallWorld => graph::gen_small_world(
            args.n,
            need(args.k, "k", "small-world")?,
            need(args.beta, "beta", "small-world")?,
            args.seed,
        )?,
    };
    let body = match args.format {
        FileFormat::Edgelist => {
            let mut buf = Vec::new();
            graph::write_edge_list(&g, &mut buf)?;
            buf
        }
        FileFormat::Graphml => graph::export_graph(&g, ExportFormat::GraphMl).into_bytes(),
        FileFormat::Dot => graph::export_graph(&g, ExportFormat::Dot).into_bytes(),
    };
    let props = graph::network_properties(&g);
    match args.out {
        Some(path) => {
            fs::write(&path, body).with_context(|| format!("cannot write {}", path.display()))?;
            print_props(&props);
        }
        None => {
            // keep stdout clean for the network itself
            std::io::stdout().write_all(&body)?;
            eprint!("{}", props_table(&props));
        }
    }
    Ok(())
}

fn load_network(path: &Path) -> Result<Graph> {
    let ext = path.extension().and_then(|e| e.to_str()).unwrap_or("");
    let g = match ext {
        "graphml" | "dot" | "gv" => {
            let text = fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
            let fmt = if ext == "graphml" { ExportFormat::GraphMl } else { ExportFormat::Dot };
            graph::import_graph(&text, fmt)?
        }
        _ => {
            let f = fs::File::open(path).with_context(|| format!("cannot read {}", path.display()))?;
            let load = graph::load_edge_list(BufReader::new(f))?;
            if load.self_loops_dropped > 0 || load.duplicate_edges > 0 {
                eprintln!(
                    "note: dropped {} self-loops and {} duplicate edges",
                    load.self_loops_dropped, load.duplicate_edges
                );
            }
            load.graph
        }
    };
    Ok(g)
}

fn props_table(p: &NetworkProperties) -> String {
    format!(
        "nodes               {}\nedges               {}\navg degree          {:.2}\navg path length     {:.2}\ndiameter            {}\navg clustering      {:.2}\ncomponents          {}\nlargest component   {}\n",
        p.node_count,
        p.edge_count,
        p.avg_degree,
        p.avg_path_length,
        p.diameter,
        p.avg_clustering_coefficient,
        p.component_count,
        p.largest_component_size
    )
}

fn print_props(p: &NetworkProperties) {
    print!("{}", props_table(p));
}

fn run_spec(args: RunArgs) -> Result<bool> {
    let mut spec = ExperimentSpec::load(&args.spec)?;
    if let Some(t) = args.iterations {
        spec.base.iterations = t;
    }
    if let Some(s) = args.seed {
        spec.master_seeds = vec![s];
    }
    if let Some(b) = args.backend {
        spec.base.backend.kind = match b {
            BackendArg::Rule => BackendKind::Rule,
            BackendArg::Remote => BackendKind::Remote,
            BackendArg::Replay => BackendKind::Replay,
        };
    }
    if let Some(t) = args.transcript {
        spec.base.backend.replay.transcript = Some(t);
    }
    if args.record {
        spec.base.backend.record_transcript = Some(PathBuf::from("transcript.jsonl"));
    }
    if let Some(o) = args.out {
        spec.output_dir = o;
    }
    if let Some(w) = args.workers {
        spec.workers = w;
    }
    spec.validate()?;

    let cells = spec.cells();
    println!("{} cells -> {}", cells.len(), spec.output_dir.display());
    if args.dry_run {
        for c in &cells {
            println!("  {}", c.label);
        }
        return Ok(true);
    }
    let outcomes = run_sweep(&spec)?;
    let mut ok = true;
    for o in &outcomes {
        match &o.status {
            CellStatus::Completed => println!("done     {}", o.label),
            CellStatus::Skipped => println!("skipped  {} (complete trace present)", o.label),
            CellStatus::Failed(e) => {
                ok = false;
                eprintln!("failed   {}: {e}", o.label);
            }
        }
    }
    Ok(ok)
}

fn is_trace_file(path: &Path) -> bool {
    let name = path.file_name().and_then(|n| n.to_str()).unwrap_or("");
    name.ends_with(".jsonl") && !name.ends_with(".transcript.jsonl")
}

fn report(dir: &Path, threshold: Option<f64>, out: Option<PathBuf>) -> Result<()> {
    let mut paths: Vec<PathBuf> = fs::read_dir(dir)
        .with_context(|| format!("cannot read {}", dir.display()))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| is_trace_file(p))
        .collect();
    paths.sort();
    if paths.is_empty() {
        bail!("no traces in {}", dir.display());
    }
    let mut traces: Vec<(String, SimulationTrace)> = Vec::new();
    for p in &paths {
        let f = fs::File::open(p)?;
        let t = read_trace(BufReader::new(f)).with_context(|| format!("{}", p.display()))?;
        let label = p.file_stem().and_then(|s| s.to_str()).unwrap_or("trace").to_owned();
        traces.push((label, t));
    }
    let threshold = threshold.unwrap_or(traces[0].1.header.belief_threshold);
    if !(threshold > 0.0 && threshold <= 1.0) {
        bail!("threshold {threshold} outside (0, 1]");
    }
    let refs: Vec<(String, &SimulationTrace)> = traces.iter().map(|(l, t)| (l.clone(), t)).collect();
    let matrix = aggregate_matrix(&refs, threshold)?;
    let series: Vec<_> = traces.iter().map(|(l, t)| (l.as_str(), build_series(t, threshold))).collect();

    let out = out.unwrap_or_else(|| dir.to_path_buf());
    fs::create_dir_all(&out)?;
    fs::write(out.join("matrix.csv"), matrix.to_csv())?;
    fs::write(out.join("series.csv"), metrics::series_csv(series.iter().map(|(l, s)| (*l, s))))?;
    let summary = serde_json::to_string_pretty(&matrix.summary_json())?;
    fs::write(out.join("summary.json"), summary + "\n")?;

    let grouped = matrix.mean_rows(|l| l.rsplit_once("_seed").map_or(l, |(head, _)| head).to_owned());
    if grouped.len() < matrix.rows.len() {
        let mut csv = String::from("config");
        for j in 0..matrix.rumors.len() {
            csv.push(',');
            csv.push_str(&rumor_label(j));
        }
        csv.push('\n');
        for (label, row) in &grouped {
            csv.push_str(label);
            for v in row {
                csv.push(',');
                csv.push_str(&percent(*v));
            }
            csv.push('\n');
        }
        fs::write(out.join("matrix_mean.csv"), csv)?;
    }

    let mut stdout = BufWriter::new(std::io::stdout());
    writeln!(stdout, "max affected (%), threshold {threshold}")?;
    for (label, row) in &grouped {
        let cells: Vec<String> = row.iter().map(|v| format!("{:>6}", percent(*v))).collect();
        writeln!(stdout, "{label:<48} {}", cells.join(" "))?;
    }
    writeln!(stdout, "wrote matrix.csv, series.csv, summary.json to {}", out.display())?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::GenNetwork(args) => gen_network(args).map(|_| true),
        Command::Props { path, json } => load_network(&path).and_then(|g| {
            let p = graph::network_properties(&g);
            if json {
                println!("{}", serde_json::to_string_pretty(&p)?);
            } else {
                print_props(&p);
            }
            Ok(true)
        }),
        Command::Run(args) => run_spec(args),
        Command::Report { dir, threshold, out } => report(&dir, threshold, out).map(|_| true),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
