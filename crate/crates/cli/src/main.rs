use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use snbp::graph::{load_edge_list, preprocess, stats, write_edge_list, Graph};
use snbp::harness::dataset::{default_cache_dir, fetch_dataset, load_graph_file, DatasetManifest, FetchOptions};
use snbp::harness::export::{
    read_sweep_json, report_to_csv, report_to_json, sweep_to_csv, sweep_to_json, write_text, Format,
    ReportDocument,
};
use snbp::harness::{batch_benchmark, sweep, Method, Model, RunConfig, SourceChoice};
use snbp::ising::beta_from_p;
use snbp::montecarlo::{mc_ising_run, mc_percolation};
use snbp::netgen;
use snbp::{Error, ErrorClass, Result, Seed};

#[derive(Parser)]
#[command(name = "snbp", version, about = "Source-node belief propagation for percolation and Ising models")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a synthetic network as an edge list.
    Generate(GenerateArgs),
    /// Print parse counts and statistics of an edge list.
    Stats {
        graph: PathBuf,
    },
    /// Evaluate methods over a parameter grid on one network.
    Sweep {
        graph: PathBuf,
        #[command(flatten)]
        run: RunArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Monte Carlo estimates at a single parameter value.
    Mc {
        graph: PathBuf,
        /// Bond probability; Ising runs use beta = -ln(1 - p) / 2.
        #[arg(long)]
        p: f64,
        #[command(flatten)]
        run: RunArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Delta errors of BP, SNBP and MFA against MC for every manifest entry.
    Benchmark {
        #[command(flatten)]
        run: RunArgs,
        #[command(flatten)]
        data: DataArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Download (or copy) manifest datasets into the cache.
    Fetch {
        /// Entries to fetch; all when omitted.
        names: Vec<String>,
        #[command(flatten)]
        data: DataArgs,
    },
    /// Convert a saved JSON sweep or benchmark document.
    Export {
        input: PathBuf,
        #[command(flatten)]
        output: OutputArgs,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Cayley,
    Er,
    Ba,
    Lattice,
    Rgg,
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(value_enum)]
    kind: Kind,
    /// Node count (er, ba, rgg).
    #[arg(long, default_value_t = 100)]
    n: usize,
    /// Edge count (er) or edges per new node (ba).
    #[arg(long, default_value_t = 2)]
    m: usize,
    #[arg(long, default_value_t = 3)]
    coordination: usize,
    #[arg(long, default_value_t = 5)]
    depth: usize,
    /// Random edges added on top of a Cayley tree.
    #[arg(long, default_value_t = 0)]
    extra_edges: usize,
    #[arg(long, default_value_t = 8)]
    width: usize,
    #[arg(long, default_value_t = 8)]
    height: usize,
    #[arg(long)]
    radius: Option<f64>,
    /// Calibrate the geometric radius to this mean degree.
    #[arg(long)]
    mean_degree: Option<f64>,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct RunArgs {
    /// TOML run configuration; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_parser = ["perc", "percolation", "ising"])]
    model: Option<String>,
    /// Comma-separated list of bp, snbp, mfa, snmfa, mc, snmc, exact.
    #[arg(long)]
    methods: Option<String>,
    #[arg(long)]
    grid_points: Option<usize>,
    #[arg(long)]
    p_min: Option<f64>,
    #[arg(long)]
    p_max: Option<f64>,
    /// auto, none or a node id.
    #[arg(long)]
    source: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    realizations: Option<usize>,
    #[arg(long)]
    paper_scale: bool,
}

#[derive(Args)]
struct DataArgs {
    #[arg(long)]
    manifest: Option<PathBuf>,
    #[arg(long)]
    offline: bool,
    /// Defaults to $SNBP_CACHE_DIR, then the user cache directory.
    #[arg(long)]
    cache_dir: Option<PathBuf>,
}

#[derive(Args)]
struct OutputArgs {
    #[arg(long, value_parser = ["csv", "json"], default_value = "csv")]
    format: String,
    /// Write here instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
}

impl RunArgs {
    fn resolve(&self) -> Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::default(),
        };
        if let Some(m) = &self.model {
            cfg.model = m.parse()?;
        }
        if let Some(m) = &self.methods {
            cfg.methods = Method::parse_list(m)?;
        }
        if let Some(k) = self.grid_points {
            cfg.grid.points = k;
        }
        if let Some(v) = self.p_min {
            cfg.grid.p_min = v;
        }
        if let Some(v) = self.p_max {
            cfg.grid.p_max = v;
        }
        if let Some(s) = &self.source {
            cfg.source = s.parse::<SourceChoice>()?;
        }
        if let Some(s) = self.seed {
            cfg.seed = Seed(s);
        }
        if let Some(r) = self.realizations {
            cfg.montecarlo.realizations = r;
        }
        cfg.paper_scale |= self.paper_scale;
        let cfg = cfg.resolved();
        cfg.validate()?;
        Ok(cfg)
    }
}

impl DataArgs {
    fn fetch_options(&self) -> FetchOptions {
        FetchOptions {
            cache_dir: self.cache_dir.clone().unwrap_or_else(default_cache_dir),
            offline: self.offline,
            ..Default::default()
        }
    }

    fn manifest(&self, cfg: Option<&RunConfig>) -> Result<DatasetManifest> {
        let path = self
            .manifest
            .clone()
            .or_else(|| cfg.and_then(|c| c.manifest.clone()))
            .ok_or_else(|| Error::Config("no dataset manifest given (use --manifest)".into()))?;
        DatasetManifest::load(&path)
    }
}

fn emit(text: &str, out: Option<&Path>) -> Result<()> {
    match out {
        Some(path) => write_text(path, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn network_name(path: &Path) -> String {
    path.file_stem().map_or_else(|| "network".into(), |s| s.to_string_lossy().into_owned())
}

fn generate(a: &GenerateArgs) -> Result<()> {
    let seed = Seed(a.seed);
    let g: Graph = match a.kind {
        Kind::Cayley => {
            let t = netgen::cayley_tree(a.coordination, a.depth)?;
            netgen::add_random_edges(&t, a.extra_edges, seed)?
        }
        Kind::Er => netgen::erdos_renyi_gnm(a.n, a.m, seed)?,
        Kind::Ba => netgen::barabasi_albert(a.n, a.m, seed)?,
        Kind::Lattice => netgen::square_lattice(a.width, a.height)?,
        Kind::Rgg => {
            let radius = match (a.radius, a.mean_degree) {
                (Some(r), _) => r,
                (None, Some(k)) => netgen::calibrate_rgg_radius(a.n, k, 20, seed)?,
                (None, None) => {
                    return Err(Error::Config("rgg needs --radius or --mean-degree".into()));
                }
            };
            netgen::random_geometric(a.n, radius, seed)?
        }
    };
    emit(&write_edge_list(&g), a.out.as_deref())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Generate(a) => generate(&a),
        Command::Stats { graph } => {
            let text = std::fs::read_to_string(&graph).map_err(|e| Error::io(&graph, e))?;
            let (raw, summary) = load_edge_list(&text)?;
            let g = preprocess(&raw);
            let st = stats(&g)?;
            println!("{summary}");
            println!("lcc_nodes = {}", st.n);
            println!("lcc_edges = {}", st.m);
            println!("cyclomatic = {}", st.cyclomatic);
            println!("mean_degree = {:.4}", st.mean_degree);
            Ok(())
        }
        Command::Sweep { graph, run, output } => {
            let cfg = run.resolve()?;
            let g = load_graph_file(&graph)?;
            let grid = cfg.grid.build()?;
            let res = sweep(&network_name(&graph), &g, cfg.model, &cfg.methods, &grid, &cfg)?;
            let text = match output.format.parse()? {
                Format::Csv => sweep_to_csv(&res, Some(&cfg))?,
                Format::Json => sweep_to_json(&res, Some(&cfg))?,
            };
            emit(&text, output.out.as_deref())
        }
        Command::Mc { graph, p, run, out } => {
            let cfg = run.resolve()?;
            let g = load_graph_file(&graph)?;
            let source = cfg.source.resolve(&g)?;
            let text = match cfg.model {
                Model::Percolation => {
                    let st = mc_percolation(&g, p, cfg.montecarlo.realizations, cfg.seed, source)?;
                    serde_json::to_string_pretty(&st)?
                }
                Model::Ising => {
                    let opts = cfg.montecarlo.ising.with_seed(cfg.seed);
                    let r = mc_ising_run(&g, beta_from_p(p)?, &opts, source)?;
                    serde_json::to_string_pretty(&r)?
                }
            };
            emit(&(text + "\n"), out.as_deref())
        }
        Command::Benchmark { run, data, output } => {
            let cfg = run.resolve()?;
            let manifest = data.manifest(Some(&cfg))?;
            let report = batch_benchmark(&manifest, cfg.model, &cfg, &data.fetch_options())?;
            for f in &report.failures {
                eprintln!("skipped {}: {}", f.network, f.message);
            }
            let text = match output.format.parse()? {
                Format::Csv => report_to_csv(&report, Some(&cfg))?,
                Format::Json => report_to_json(&report, Some(&cfg))?,
            };
            emit(&text, output.out.as_deref())
        }
        Command::Fetch { names, data } => {
            let manifest = data.manifest(None)?;
            let opts = data.fetch_options();
            for name in &names {
                if manifest.get(name).is_none() {
                    return Err(Error::Config(format!("'{name}' is not in the manifest")));
                }
            }
            let mut failed = None;
            for entry in manifest.entries.iter().filter(|e| names.is_empty() || names.contains(&e.name)) {
                match fetch_dataset(entry, manifest.base_dir.as_deref(), &opts) {
                    Ok(path) => println!("{}\t{}", entry.name, path.display()),
                    Err(e) => {
                        eprintln!("{}: {e}", entry.name);
                        failed.get_or_insert(e);
                    }
                }
            }
            failed.map_or(Ok(()), Err)
        }
        Command::Export { input, output } => {
            let text = std::fs::read_to_string(&input).map_err(|e| Error::io(&input, e))?;
            let format: Format = output.format.parse()?;
            let rendered = if let Ok(doc) = read_sweep_json(&text) {
                match format {
                    Format::Csv => sweep_to_csv(&doc.result, doc.config.as_ref())?,
                    Format::Json => sweep_to_json(&doc.result, doc.config.as_ref())?,
                }
            } else {
                let doc: ReportDocument = serde_json::from_str(&text)?;
                match format {
                    Format::Csv => report_to_csv(&doc.report, doc.config.as_ref())?,
                    Format::Json => report_to_json(&doc.report, doc.config.as_ref())?,
                }
            };
            emit(&rendered, output.out.as_deref())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e.class() {
                ErrorClass::Usage => 1,
                ErrorClass::Numerical => 2,
                ErrorClass::Io => 3,
            })
        }
    }
}
