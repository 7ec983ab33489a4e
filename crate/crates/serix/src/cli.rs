//! Command-line front end: corpus generation, index build/save/load,
//! query execution against the index or by linear scan, and the TLB grid.
//!
//! All outputs are CSV with stable headers; binary artifacts use the
//! snapshot format from [`crate::io`].

use std::fmt::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use crate::error::{Error, Result};
use crate::eval;
use crate::gen::{self, Profile};
use crate::index::{build_index_timed, tree_from_bytes, IndexConfig, IndexTree};
use crate::io::{load_dataset, sha256_file, write_raw, Snapshot};
use crate::query::{parallel_scan_knn, Engine, Neighbor, QueryStats};
use crate::sax::SaxModel;
use crate::series::Dataset;
use crate::sfa::{learn_mcb, Binning, McbParams, QuantizationModel};

pub const QUERY_CSV_HEADER: &str = "query_idx,rank,series_id,distance,time_ms";
pub const BUILD_CSV_HEADER: &str = "phase,seconds";

/// Default worker count: the `SERIX_WORKERS` environment variable, or 1.
pub fn default_workers() -> usize {
    std::env::var("SERIX_WORKERS")
        .ok()
        .and_then(|v| v.parse().ok())
        .filter(|&w| w >= 1)
        .unwrap_or(1)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SummarizerKind {
    Sfa,
    Sax,
}

impl std::str::FromStr for SummarizerKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sfa" => Ok(SummarizerKind::Sfa),
            "sax" => Ok(SummarizerKind::Sax),
            other => Err(Error::Unknown {
                what: "summarizer",
                got: other.to_string(),
            }),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TlbMethod {
    SfaEw,
    SfaEd,
    Isax,
}

impl TlbMethod {
    pub fn name(self) -> &'static str {
        match self {
            TlbMethod::SfaEw => "sfa-ew",
            TlbMethod::SfaEd => "sfa-ed",
            TlbMethod::Isax => "isax",
        }
    }
}

impl std::str::FromStr for TlbMethod {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sfa-ew" => Ok(TlbMethod::SfaEw),
            "sfa-ed" => Ok(TlbMethod::SfaEd),
            "isax" => Ok(TlbMethod::Isax),
            other => Err(Error::Unknown {
                what: "tlb method",
                got: other.to_string(),
            }),
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "serix",
    version,
    about = "Exact k-NN search over fixed-length series with learned symbolic summaries"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic raw-f32 corpus.
    Gen(GenArgs),
    /// Learn a model and build an index snapshot from a raw data file.
    Build(BuildArgs),
    /// Answer k-NN queries with a built index.
    Query(QueryArgs),
    /// Answer k-NN queries by parallel linear scan (the exact baseline).
    Scan(ScanArgs),
    /// Tightness-of-lower-bound grid over methods and alphabet sizes.
    Tlb(TlbArgs),
}

#[derive(Debug, Args)]
pub struct GenArgs {
    /// smooth | noisy | square-wave | random-walk
    #[arg(long)]
    pub profile: Profile,
    #[arg(long)]
    pub count: usize,
    /// Series length.
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct BuildArgs {
    /// Headerless raw f32 (little-endian, series-major) data file.
    #[arg(long)]
    pub data: PathBuf,
    /// Series length.
    #[arg(long)]
    pub n: usize,
    /// Series count; 0 infers it from the file size.
    #[arg(long, default_value_t = 0)]
    pub count: usize,
    /// sfa | sax
    #[arg(long, default_value = "sfa")]
    pub summarizer: SummarizerKind,
    /// Word length (number of summary dimensions).
    #[arg(long, default_value_t = 16)]
    pub l: usize,
    #[arg(long, default_value_t = 256)]
    pub alphabet: usize,
    /// Sampling ratio for quantization learning.
    #[arg(long, default_value_t = 0.01)]
    pub sample: f64,
    /// ew | ed (equi-width / equi-depth, learned summarizer only)
    #[arg(long, default_value = "ew")]
    pub binning: Binning,
    #[arg(long, default_value_t = crate::index::DEFAULT_LEAF_CAPACITY)]
    pub leaf_size: usize,
    #[arg(long, default_value_t = default_workers())]
    pub workers: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Index snapshot output path.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct QueryArgs {
    #[arg(long)]
    pub index: PathBuf,
    /// The data file the index was built from (hash-checked).
    #[arg(long)]
    pub data: PathBuf,
    /// Query file in the data file format, same series length.
    #[arg(long)]
    pub queries: PathBuf,
    #[arg(long, default_value_t = 10)]
    pub k: usize,
    #[arg(long, default_value_t = default_workers())]
    pub workers: usize,
    /// CSV output path (stdout when omitted).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Run structural and lower-bound audits; failures exit nonzero.
    #[arg(long)]
    pub audit: bool,
}

#[derive(Debug, Args)]
pub struct ScanArgs {
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 0)]
    pub count: usize,
    #[arg(long)]
    pub queries: PathBuf,
    #[arg(long, default_value_t = 10)]
    pub k: usize,
    #[arg(long, default_value_t = default_workers())]
    pub workers: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TlbArgs {
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 0)]
    pub count: usize,
    #[arg(long)]
    pub queries: PathBuf,
    /// Comma-separated subset of sfa-ew, sfa-ed, isax.
    #[arg(long, default_value = "sfa-ew,sfa-ed,isax", value_delimiter = ',')]
    pub methods: Vec<TlbMethod>,
    /// Comma-separated alphabet sizes (powers of two).
    #[arg(long, default_value = "4,8,16,32,64,128,256", value_delimiter = ',')]
    pub alphabets: Vec<usize>,
    #[arg(long, default_value_t = 16)]
    pub l: usize,
    /// Sampling ratio for quantization learning.
    #[arg(long, default_value_t = 0.01)]
    pub sample: f64,
    /// Dataset series sampled per query.
    #[arg(long, default_value_t = 1000)]
    pub pairs: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Engine over either summarizer, dispatched from a model blob's type tag.
pub enum AnyEngine {
    Sfa(Engine<QuantizationModel>),
    Sax(Engine<SaxModel>),
}

impl AnyEngine {
    pub fn from_snapshot(snapshot: &Snapshot, dataset: Dataset) -> Result<Self> {
        let tree = tree_from_bytes(&snapshot.tree_bytes)?;
        match snapshot.model_bytes.get(4) {
            Some(0) => {
                let model = QuantizationModel::from_bytes(&snapshot.model_bytes)?;
                Ok(AnyEngine::Sfa(Engine::from_parts(dataset, model, tree)?))
            }
            Some(1) => {
                let model = SaxModel::from_bytes(&snapshot.model_bytes)?;
                Ok(AnyEngine::Sax(Engine::from_parts(dataset, model, tree)?))
            }
            other => Err(Error::Corrupt {
                what: "model blob",
                detail: format!("unknown type tag {other:?}"),
            }),
        }
    }

    pub fn exact_knn(
        &self,
        query: &[f32],
        k: usize,
        workers: usize,
    ) -> Result<(Vec<Neighbor>, QueryStats)> {
        match self {
            AnyEngine::Sfa(e) => e.exact_knn(query, k, workers),
            AnyEngine::Sax(e) => e.exact_knn(query, k, workers),
        }
    }

    pub fn tree(&self) -> &IndexTree {
        match self {
            AnyEngine::Sfa(e) => e.tree(),
            AnyEngine::Sax(e) => e.tree(),
        }
    }

    pub fn dataset(&self) -> &Dataset {
        match self {
            AnyEngine::Sfa(e) => e.dataset(),
            AnyEngine::Sax(e) => e.dataset(),
        }
    }
}

fn emit(out: &Option<PathBuf>, content: &str) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, content).map_err(|e| Error::Io {
            path: path.clone(),
            source: e,
        }),
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

pub fn cmd_gen(args: &GenArgs) -> Result<()> {
    if args.count == 0 || args.n < 2 {
        return Err(Error::Empty("generation request"));
    }
    let values = gen::generate(args.profile, args.count, args.n, args.seed);
    write_raw(&args.out, &values)?;
    eprintln!(
        "wrote {} {} series of length {} to {}",
        args.count,
        args.profile,
        args.n,
        args.out.display()
    );
    Ok(())
}

pub fn cmd_build(args: &BuildArgs) -> Result<()> {
    let dataset = load_dataset(&args.data, args.n, args.count)?;
    let config = IndexConfig {
        leaf_capacity: args.leaf_size,
        initial_cardinality: 1,
        worker_count: args.workers,
    };

    let t_learn = Instant::now();
    let (model_bytes, tree, phases) = match args.summarizer {
        SummarizerKind::Sfa => {
            let model = learn_mcb(
                &dataset,
                &McbParams {
                    word_length: args.l,
                    alphabet_size: args.alphabet,
                    sampling_ratio: args.sample,
                    binning: args.binning,
                    seed: args.seed,
                    ..Default::default()
                },
            )?;
            let (tree, phases) = build_index_timed(&dataset, &model, config)?;
            (model.to_bytes(), tree, phases)
        }
        SummarizerKind::Sax => {
            let model = SaxModel::new(args.n, args.l, args.alphabet)?;
            let (tree, phases) = build_index_timed(&dataset, &model, config)?;
            (model.to_bytes(), tree, phases)
        }
    };
    let learn = t_learn.elapsed() - phases.transform - phases.tree;

    tree.audit(None)?;

    let snapshot = Snapshot {
        model_bytes,
        tree_bytes: tree.to_bytes(),
        data_hash: sha256_file(&args.data)?,
        series_count: dataset.len() as u64,
        series_length: args.n as u64,
    };
    snapshot.write(&args.out)?;

    let total = learn + phases.transform + phases.tree;
    let mut report = String::new();
    let _ = writeln!(report, "{BUILD_CSV_HEADER}");
    let _ = writeln!(report, "learn,{:.6}", learn.as_secs_f64());
    let _ = writeln!(report, "transform,{:.6}", phases.transform.as_secs_f64());
    let _ = writeln!(report, "tree,{:.6}", phases.tree.as_secs_f64());
    let _ = writeln!(report, "total,{:.6}", total.as_secs_f64());
    print!("{report}");

    let stats = eval::index_stats(&tree);
    eprintln!(
        "indexed {} series: {} root children, {} leaves ({} overflow), depth {}, mean fill {:.2}",
        dataset.len(),
        stats.root_fanout,
        stats.leaf_count,
        stats.overflow_leaf_count,
        stats.max_depth,
        stats.mean_leaf_fill
    );
    Ok(())
}

fn results_csv(rows: &[(usize, Vec<Neighbor>, f64)]) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{QUERY_CSV_HEADER}");
    for (qi, neighbors, ms) in rows {
        for (rank, n) in neighbors.iter().enumerate() {
            let _ = writeln!(out, "{},{},{},{},{:.3}", qi, rank + 1, n.id, n.distance, ms);
        }
    }
    out
}

pub fn cmd_query(args: &QueryArgs) -> Result<()> {
    let snapshot = Snapshot::read(&args.index)?;
    snapshot.verify_data(&args.data)?;
    let dataset = load_dataset(
        &args.data,
        snapshot.series_length as usize,
        snapshot.series_count as usize,
    )?;
    let queries = load_dataset(&args.queries, snapshot.series_length as usize, 0)?;
    let engine = AnyEngine::from_snapshot(&snapshot, dataset)?;
    if args.audit {
        let ids: Vec<u64> = (0..engine.dataset().len() as u64).collect();
        engine.tree().audit(Some(&ids))?;
    }
    let mut rows = Vec::with_capacity(queries.len());
    for qi in 0..queries.len() {
        let (neighbors, stats) = engine.exact_knn(queries.series(qi), args.k, args.workers)?;
        if args.audit {
            audit_pruning(&neighbors, &stats, engine.dataset().len(), args.k)?;
        }
        rows.push((qi, neighbors, stats.wall.as_secs_f64() * 1e3));
    }
    emit(&args.out, &results_csv(&rows))
}

/// Every pruned lower bound must dominate the final best-so-far.
fn audit_pruning(neighbors: &[Neighbor], stats: &QueryStats, n: usize, k: usize) -> Result<()> {
    if neighbors.len() < k.min(n) {
        return Err(Error::AuditFailed(format!(
            "expected {} results, got {}",
            k.min(n),
            neighbors.len()
        )));
    }
    let final_bsf = neighbors.last().map_or(f64::INFINITY, |n| n.distance * n.distance);
    for &lbd in &stats.pruned_lbds {
        if lbd < final_bsf - 1e-9 {
            return Err(Error::AuditFailed(format!(
                "pruned lower bound {lbd} below final best-so-far {final_bsf}"
            )));
        }
    }
    Ok(())
}

pub fn cmd_scan(args: &ScanArgs) -> Result<()> {
    let dataset = load_dataset(&args.data, args.n, args.count)?;
    let queries = load_dataset(&args.queries, args.n, 0)?;
    let mut rows = Vec::with_capacity(queries.len());
    for qi in 0..queries.len() {
        let (neighbors, stats) = parallel_scan_knn(&dataset, queries.series(qi), args.k, args.workers)?;
        rows.push((qi, neighbors, stats.wall.as_secs_f64() * 1e3));
    }
    emit(&args.out, &results_csv(&rows))
}

pub fn cmd_tlb(args: &TlbArgs) -> Result<()> {
    let dataset = load_dataset(&args.data, args.n, args.count)?;
    let queries = load_dataset(&args.queries, args.n, 0)?;
    let mut out = String::new();
    let _ = writeln!(out, "{}", eval::TLB_CSV_HEADER);
    for &method in &args.methods {
        for &a in &args.alphabets {
            let report = match method {
                TlbMethod::SfaEw | TlbMethod::SfaEd => {
                    let model = learn_mcb(
                        &dataset,
                        &McbParams {
                            word_length: args.l,
                            alphabet_size: a,
                            sampling_ratio: args.sample,
                            binning: if method == TlbMethod::SfaEw {
                                Binning::EquiWidth
                            } else {
                                Binning::EquiDepth
                            },
                            seed: args.seed,
                            ..Default::default()
                        },
                    )?;
                    eval::tlb(&model, method.name(), &dataset, &queries, args.pairs, args.seed)?
                }
                TlbMethod::Isax => {
                    let model = SaxModel::new(args.n, args.l, a)?;
                    eval::tlb(&model, method.name(), &dataset, &queries, args.pairs, args.seed)?
                }
            };
            if report.mean_tlb > 1.0 + 1e-6 {
                return Err(Error::AuditFailed(format!(
                    "tlb {} exceeds 1 for {} a={}",
                    report.mean_tlb,
                    method.name(),
                    a
                )));
            }
            let _ = writeln!(out, "{}", report.csv_row());
        }
    }
    emit(&args.out, &out)
}

pub fn run(cli: Cli) -> Result<()> {
    match &cli.command {
        Command::Gen(a) => cmd_gen(a),
        Command::Build(a) => cmd_build(a),
        Command::Query(a) => cmd_query(a),
        Command::Scan(a) => cmd_scan(a),
        Command::Tlb(a) => cmd_tlb(a),
    }
}

pub fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::Parser;
    use std::path::Path;

    fn parse(args: &[&str]) -> Cli {
        Cli::try_parse_from(args).unwrap()
    }

    fn gen_file(dir: &Path, profile: &str, count: usize, n: usize, seed: u64, name: &str) -> PathBuf {
        let path = dir.join(name);
        run(parse(&[
            "serix", "gen",
            "--profile", profile,
            "--count", &count.to_string(),
            "--n", &n.to_string(),
            "--seed", &seed.to_string(),
            "--out", path.to_str().unwrap(),
        ]))
        .unwrap();
        path
    }

    #[test]
    fn build_defaults_match_documented_configuration() {
        let cli = parse(&[
            "serix", "build", "--data", "d.f32", "--n", "256", "--out", "i.sx",
        ]);
        let Command::Build(b) = cli.command else { panic!() };
        assert_eq!(b.l, 16);
        assert_eq!(b.alphabet, 256);
        assert_eq!(b.sample, 0.01);
        assert_eq!(b.leaf_size, 20_000);
        assert_eq!(b.binning, Binning::EquiWidth);
        assert_eq!(b.summarizer, SummarizerKind::Sfa);
    }

    #[test]
    fn tlb_defaults_form_the_full_grid() {
        let cli = parse(&[
            "serix", "tlb", "--data", "d", "--n", "64", "--queries", "q",
        ]);
        let Command::Tlb(t) = cli.command else { panic!() };
        assert_eq!(t.methods.len(), 3);
        assert_eq!(t.alphabets, vec![4, 8, 16, 32, 64, 128, 256]);
        assert_eq!(t.pairs, 1000);
    }

    #[test]
    fn unknown_names_are_rejected() {
        assert!(Cli::try_parse_from([
            "serix", "build", "--data", "d", "--n", "8", "--out", "o",
            "--summarizer", "paa",
        ])
        .is_err());
        assert!(Cli::try_parse_from([
            "serix", "gen", "--profile", "sawtooth", "--count", "1", "--n", "8",
            "--out", "o",
        ])
        .is_err());
    }

    #[test]
    fn end_to_end_build_query_scan_agree() {
        let dir = tempfile::tempdir().unwrap();
        let data = gen_file(dir.path(), "noisy", 500, 64, 1, "data.f32");
        let queries = gen_file(dir.path(), "noisy", 5, 64, 2, "queries.f32");
        let index = dir.path().join("index.sx");
        for (kind, leaf) in [("sfa", "50"), ("sax", "50")] {
            run(parse(&[
                "serix", "build",
                "--data", data.to_str().unwrap(),
                "--n", "64",
                "--summarizer", kind,
                "--sample", "0.5",
                "--leaf-size", leaf,
                "--out", index.to_str().unwrap(),
            ]))
            .unwrap();
            let qcsv = dir.path().join(format!("q_{kind}.csv"));
            run(parse(&[
                "serix", "query",
                "--index", index.to_str().unwrap(),
                "--data", data.to_str().unwrap(),
                "--queries", queries.to_str().unwrap(),
                "--k", "5",
                "--workers", "2",
                "--audit",
                "--out", qcsv.to_str().unwrap(),
            ]))
            .unwrap();
            let scsv = dir.path().join(format!("s_{kind}.csv"));
            run(parse(&[
                "serix", "scan",
                "--data", data.to_str().unwrap(),
                "--n", "64",
                "--queries", queries.to_str().unwrap(),
                "--k", "5",
                "--out", scsv.to_str().unwrap(),
            ]))
            .unwrap();
            let strip = |s: String| -> Vec<(String, String)> {
                s.lines()
                    .skip(1)
                    .map(|l| {
                        let f: Vec<&str> = l.split(',').collect();
                        // distances must match; ids may swap on exact ties
                        (format!("{},{}", f[0], f[1]), f[3].to_string())
                    })
                    .collect()
            };
            let q = strip(std::fs::read_to_string(&qcsv).unwrap());
            let s = strip(std::fs::read_to_string(&scsv).unwrap());
            assert_eq!(q, s, "summarizer {kind}");
        }
    }

    #[test]
    fn query_detects_changed_data_file() {
        let dir = tempfile::tempdir().unwrap();
        let data = gen_file(dir.path(), "smooth", 100, 32, 3, "data.f32");
        let queries = gen_file(dir.path(), "smooth", 2, 32, 4, "queries.f32");
        let index = dir.path().join("index.sx");
        run(parse(&[
            "serix", "build",
            "--data", data.to_str().unwrap(),
            "--n", "32",
            "--sample", "1.0",
            "--out", index.to_str().unwrap(),
        ]))
        .unwrap();
        // regenerate the data file with a different seed
        gen_file(dir.path(), "smooth", 100, 32, 5, "data.f32");
        let err = run(parse(&[
            "serix", "query",
            "--index", index.to_str().unwrap(),
            "--data", data.to_str().unwrap(),
            "--queries", queries.to_str().unwrap(),
        ]))
        .unwrap_err();
        assert!(matches!(err, Error::HashMismatch { what: "data" }));
    }

    #[test]
    fn tlb_grid_emits_one_row_per_cell() {
        let dir = tempfile::tempdir().unwrap();
        let data = gen_file(dir.path(), "noisy", 200, 64, 6, "data.f32");
        let queries = gen_file(dir.path(), "noisy", 3, 64, 7, "queries.f32");
        let out = dir.path().join("tlb.csv");
        run(parse(&[
            "serix", "tlb",
            "--data", data.to_str().unwrap(),
            "--n", "64",
            "--queries", queries.to_str().unwrap(),
            "--alphabets", "4,16,64",
            "--sample", "1.0",
            "--pairs", "50",
            "--out", out.to_str().unwrap(),
        ]))
        .unwrap();
        let text = std::fs::read_to_string(&out).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], eval::TLB_CSV_HEADER);
        assert_eq!(lines.len(), 1 + 3 * 3);
        for line in &lines[1..] {
            let tlb: f64 = line.split(',').nth(3).unwrap().parse().unwrap();
            assert!((0.0..=1.0 + 1e-6).contains(&tlb), "{line}");
        }
    }

    #[test]
    fn workers_env_is_the_default() {
        // read-only check of the resolution logic, not the env itself
        std::env::set_var("SERIX_WORKERS", "3");
        assert_eq!(default_workers(), 3);
        std::env::set_var("SERIX_WORKERS", "bogus");
        assert_eq!(default_workers(), 1);
        std::env::remove_var("SERIX_WORKERS");
        assert_eq!(default_workers(), 1);
    }
}
