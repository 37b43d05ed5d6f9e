use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use insdel::channel::{apply, corrupt, ChannelConfig, ChannelError, Pattern};
use insdel::codec::{decode, inner_stage, recovery_rate, DecodeReport};
use insdel::codespec::{CodeSpec, CodecError};
use insdel::field::FieldSpec;
use insdel::formats::{CodeDescriptor, FormatError, SymbolFile, TraceFile};
use insdel::inner_family::{
    check_property, sample_family, search_family, BitSource, CheckOptions, FamilyError, Gamma, InnerParams,
    SearchOptions, Variant,
};
use insdel::reed_solomon::RsCode;
use insdel::smallbias::{BiasSpec, Seed};
use insdel::subspace_lcs::{three_dim_subspaces, verify_theorem, SubspaceError, TheoremOptions, TheoremReport};

#[derive(Debug, Error)]
enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: {source}")]
    Format { path: PathBuf, source: FormatError },
    #[error(transparent)]
    Channel(#[from] ChannelError),
    #[error(transparent)]
    Subspace(#[from] SubspaceError),
    #[error("{0}")]
    Decode(CodecError),
    #[error("{0}")]
    Verify(String),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            Self::Decode(_) => 3,
            Self::Verify(_) => 4,
            _ => 2,
        }
    }
}

impl From<FamilyError> for CliError {
    fn from(e: FamilyError) -> Self {
        match e {
            FamilyError::Exhausted { .. } => Self::Verify(e.to_string()),
            other => Self::Usage(other.to_string()),
        }
    }
}

type Result<T, E = CliError> = std::result::Result<T, E>;

/// Insertion-deletion codes: generate, encode, corrupt, decode and measure.
#[derive(Parser)]
#[command(name = "insdel", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a code descriptor, searching seeds for a verified inner family.
    Gen(GenArgs),
    /// Re-run the inner property checker on a descriptor.
    Verify(VerifyArgs),
    /// Write a message symbol file.
    Msg(MsgArgs),
    Encode(EncodeArgs),
    /// Apply insertions and deletions to a symbol file.
    Corrupt(CorruptArgs),
    Decode(DecodeArgs),
    /// Decoding success rate and inner recovery across edit rates, as CSV.
    Bench(BenchArgs),
    /// Three-dimensional subspace LCS experiments, as CSV.
    Subspace(SubspaceArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum SeedSearch {
    Exhaustive,
    Random,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long, value_parser = parse_variant)]
    variant: Variant,
    /// Outer length.
    #[arg(long)]
    n: usize,
    /// Outer dimension.
    #[arg(long)]
    k: usize,
    /// Outer field degree; binary variants use it as the inner dimension k′.
    #[arg(long)]
    field_degree: Option<u32>,
    #[arg(long)]
    n_prime: usize,
    #[arg(long)]
    d_prime: Option<usize>,
    #[arg(long, default_value = "1/4")]
    gamma: Gamma,
    #[arg(long)]
    q_in_bits: Option<u32>,
    #[arg(long)]
    t: Option<usize>,
    #[arg(long)]
    s: Option<usize>,
    #[arg(long, default_value_t = 24)]
    seed_bits: u32,
    #[arg(long, value_enum, default_value_t = SeedSearch::Exhaustive)]
    seed_search: SeedSearch,
    /// Seeds to try.
    #[arg(long, default_value_t = 1 << 24)]
    budget: u64,
    #[arg(long, default_value_t = 0)]
    rng_seed: u64,
    /// Trials for sampled property checks.
    #[arg(long, default_value_t = 20_000)]
    check_trials: u64,
    /// Check this seed (hex) instead of searching.
    #[arg(long, conflicts_with = "uniform")]
    seed: Option<String>,
    /// Skip the search and draw an unverified family from a uniform source.
    #[arg(long)]
    uniform: bool,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long)]
    code: PathBuf,
    #[arg(long, default_value_t = 20_000)]
    trials: u64,
    #[arg(long, default_value_t = 0)]
    rng_seed: u64,
    #[arg(long)]
    sampled: bool,
}

#[derive(Args)]
struct MsgArgs {
    #[arg(long)]
    code: PathBuf,
    /// Comma-separated symbols; random when absent.
    #[arg(long, value_delimiter = ',')]
    symbols: Option<Vec<u16>>,
    #[arg(long, default_value_t = 0)]
    rng_seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct EncodeArgs {
    #[arg(long)]
    code: PathBuf,
    #[arg(long)]
    msg: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Clone)]
struct ChannelArgs {
    #[arg(long, value_enum, default_value_t = PatternArg::Uniform)]
    pattern: PatternArg,
    #[arg(long)]
    block_len: Option<usize>,
    #[arg(long)]
    per_block_cap: Option<usize>,
    #[arg(long)]
    max_blocks: Option<usize>,
    #[arg(long)]
    burst_position: Option<usize>,
}

#[derive(Clone, Copy, ValueEnum)]
enum PatternArg {
    Uniform,
    Burst,
    PerBlockCapped,
}

impl From<PatternArg> for Pattern {
    fn from(p: PatternArg) -> Self {
        match p {
            PatternArg::Uniform => Pattern::Uniform,
            PatternArg::Burst => Pattern::Burst,
            PatternArg::PerBlockCapped => Pattern::PerBlockCapped,
        }
    }
}

impl ChannelArgs {
    fn config(&self, budget: usize, insert_fraction: f64, alphabet_bits: u32, rng_seed: u64) -> ChannelConfig {
        ChannelConfig {
            pattern: self.pattern.into(),
            burst_position: self.burst_position,
            block_len: self.block_len,
            per_block_cap: self.per_block_cap,
            blocks_affected_cap: self.max_blocks,
            ..ChannelConfig::uniform(budget, insert_fraction, alphabet_bits, rng_seed)
        }
    }
}

#[derive(Args)]
struct CorruptArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 0)]
    dels: usize,
    #[arg(long, default_value_t = 0)]
    inss: usize,
    #[arg(long, default_value_t = 0)]
    rng_seed: u64,
    #[command(flatten)]
    channel: ChannelArgs,
    /// Where to write the edit trace.
    #[arg(long)]
    trace_out: Option<PathBuf>,
    /// Replay a recorded trace instead of drawing edits.
    #[arg(long, conflicts_with_all = ["dels", "inss", "trace_out"])]
    replay: Option<PathBuf>,
}

#[derive(Args)]
struct DecodeArgs {
    #[arg(long)]
    code: PathBuf,
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Transmitted message, for recovery statistics.
    #[arg(long)]
    truth: Option<PathBuf>,
    /// Write the JSON report here instead of stdout.
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long)]
    code: PathBuf,
    /// Edit budgets as fractions of the codeword length.
    #[arg(long, value_delimiter = ',', default_value = "0,0.05,0.1,0.2")]
    alphas: Vec<f64>,
    #[arg(long, default_value_t = 20)]
    trials: usize,
    #[arg(long, default_value_t = 0.5)]
    insert_fraction: f64,
    #[arg(long, default_value_t = 0)]
    rng_seed: u64,
    #[command(flatten)]
    channel: ChannelArgs,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SubspaceArgs {
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 100, conflicts_with = "exhaustive")]
    trials: usize,
    /// Every subspace instead of random ones.
    #[arg(long)]
    exhaustive: bool,
    #[arg(long, default_value_t = 0)]
    rng_seed: u64,
    #[arg(long, default_value_t = 0.0)]
    tol: f64,
    #[arg(long, default_value_t = 32)]
    floor: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_variant(s: &str) -> Result<Variant, String> {
    s.parse::<Variant>().map_err(|e| e.to_string())
}

fn read(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).map_err(|source| CliError::Io { path: path.into(), source })
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|source| CliError::Io { path: path.into(), source })
}

fn write(path: &Path, data: impl AsRef<[u8]>) -> Result<()> {
    fs::write(path, data).map_err(|source| CliError::Io { path: path.into(), source })
}

fn format_err(path: &Path) -> impl FnOnce(FormatError) -> CliError + '_ {
    move |source| CliError::Format { path: path.into(), source }
}

fn load_code(path: &Path) -> Result<CodeSpec> {
    let desc = CodeDescriptor::from_json(&read_text(path)?).map_err(format_err(path))?;
    desc.to_code().map_err(format_err(path))
}

fn load_symbols(path: &Path) -> Result<SymbolFile> {
    SymbolFile::from_bytes(&read(path)?).map_err(format_err(path))
}

fn save_symbols(path: &Path, bits: u32, symbols: Vec<u16>) -> Result<()> {
    let file = SymbolFile::new(bits as u8, symbols).map_err(format_err(path))?;
    write(path, file.to_bytes())
}

fn outer_bits(code: &CodeSpec) -> u32 {
    code.rs.field().spec().degree()
}

fn inner_bits(code: &CodeSpec) -> u32 {
    code.family.params.q_in_bits
}

fn gen(args: GenArgs) -> Result<()> {
    let degree = args.field_degree.unwrap_or_else(|| usize::BITS - (args.n.max(2) - 1).leading_zeros());
    let field = FieldSpec::standard(degree).map_err(|e| CliError::Usage(e.to_string()))?;
    let need = |name: &str, v: Option<usize>| v.ok_or_else(|| CliError::Usage(format!("--{name} is required")));
    let (params, padding) = match args.variant {
        Variant::Hn => {
            let bits = args.q_in_bits.unwrap_or_else(|| InnerParams::default_hn_alphabet_bits(&args.gamma));
            (InnerParams::hn(args.n, field.order(), bits, args.n_prime, args.gamma)?, 0)
        }
        Variant::R13 => (InnerParams::r13(args.n, degree as usize, args.n_prime, need("d-prime", args.d_prime)?)?, 0),
        Variant::R12 => {
            let t = need("t", args.t)?;
            let pad = CodeSpec::padding_for(args.n, t);
            let d = need("d-prime", args.d_prime)?;
            (InnerParams::r12(args.n + pad, degree as usize, args.n_prime, d, t, args.s.unwrap_or(1))?, pad)
        }
    };
    let family = if args.uniform {
        sample_family(&params, &BitSource::Uniform(args.rng_seed))?
    } else {
        let spec = BiasSpec::with_seed_length(params.random_bits(), args.seed_bits)
            .map_err(|e| CliError::Usage(e.to_string()))?;
        let check = CheckOptions { trials: args.check_trials, rng_seed: args.rng_seed, ..CheckOptions::default() };
        match &args.seed {
            Some(hex) => {
                let seed = Seed::from_hex(hex, args.seed_bits).map_err(|e| CliError::Usage(e.to_string()))?;
                let mut family = sample_family(&params, &BitSource::SmallBias(spec, seed))?;
                let report = check_property(&family, &check)?;
                if !report.passed {
                    return Err(CliError::Verify(format!("seed {hex} has {} violations", report.violations.len())));
                }
                family.verification = Some(report.verification());
                family
            }
            None => {
                let opts = SearchOptions {
                    budget: args.budget,
                    check,
                    sample_seed: args.rng_seed,
                    sample: matches!(args.seed_search, SeedSearch::Random),
                    ..SearchOptions::default()
                };
                let outcome = search_family(&params, spec, &opts)?;
                eprintln!("verified after {} seeds", outcome.seeds_tried);
                outcome.family
            }
        }
    };
    let rs = RsCode::new(field, args.n, args.k).map_err(|e| CliError::Usage(e.to_string()))?;
    let code = CodeSpec::new(rs, family, padding).map_err(|e| CliError::Usage(e.to_string()))?;
    write(&args.out, CodeDescriptor::from_code(&code).to_json())
}

fn verify(args: VerifyArgs) -> Result<()> {
    let code = load_code(&args.code)?;
    let opts = CheckOptions {
        trials: args.trials,
        rng_seed: args.rng_seed,
        force_sampled: args.sampled,
        ..CheckOptions::default()
    };
    let report = check_property(&code.family, &opts)?;
    println!("{}", serde_json::to_string_pretty(&report).expect("report serializes"));
    if report.passed {
        Ok(())
    } else {
        Err(CliError::Verify(format!("{} violations", report.violations.len())))
    }
}

fn msg(args: MsgArgs) -> Result<()> {
    let code = load_code(&args.code)?;
    let k = code.message_len();
    let symbols = match args.symbols {
        Some(s) if s.len() != k => return Err(CliError::Usage(format!("{} symbols given, the code takes {k}", s.len()))),
        Some(s) => s,
        None => {
            let mut rng = ChaCha8Rng::seed_from_u64(args.rng_seed);
            let q = code.rs.field().order() as u16;
            (0..k).map(|_| rng.gen_range(0..q)).collect()
        }
    };
    save_symbols(&args.out, outer_bits(&code), symbols)
}

fn encode(args: EncodeArgs) -> Result<()> {
    let code = load_code(&args.code)?;
    let message = load_symbols(&args.msg)?;
    let word = code.encode(&message.symbols).map_err(|e| CliError::Usage(e.to_string()))?;
    save_symbols(&args.out, inner_bits(&code), word)
}

fn corrupt_cmd(args: CorruptArgs) -> Result<()> {
    let input = load_symbols(&args.input)?;
    let bits = u32::from(input.bits);
    let (output, trace) = match &args.replay {
        Some(path) => {
            let file = TraceFile::from_json(&read_text(path)?).map_err(format_err(path))?;
            if file.source_len != input.symbols.len() {
                return Err(CliError::Usage(format!(
                    "trace was recorded on {} symbols, input has {}",
                    file.source_len,
                    input.symbols.len()
                )));
            }
            (apply(&input.symbols, &file.trace())?, None)
        }
        None => {
            let budget = args.dels + args.inss;
            let fraction = if budget == 0 { 0.0 } else { args.inss as f64 / budget as f64 };
            let config = args.channel.config(budget, fraction, bits, args.rng_seed);
            let (out, trace) = corrupt(&input.symbols, &config)?;
            (out, Some(TraceFile::new(config.pattern, args.rng_seed, input.symbols.len(), &trace)))
        }
    };
    save_symbols(&args.out, bits, output)?;
    if let (Some(path), Some(trace)) = (&args.trace_out, trace) {
        write(path, trace.to_json())?;
    }
    Ok(())
}

#[derive(Serialize)]
struct DecodeOutput {
    #[serde(flatten)]
    report: DecodeReport,
    inner_delta: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    beta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    correct: Option<bool>,
}

fn decode_cmd(args: DecodeArgs) -> Result<()> {
    let code = load_code(&args.code)?;
    let y = load_symbols(&args.input)?;
    if u32::from(y.bits) != inner_bits(&code) {
        return Err(CliError::Usage(format!("input has {}-bit symbols, the code uses {}", y.bits, inner_bits(&code))));
    }
    let truth = args.truth.as_deref().map(load_symbols).transpose()?;
    let stage = inner_stage(&code, &y.symbols);
    let beta = match &truth {
        Some(t) => Some(recovery_rate(&code, &stage, &t.symbols).map_err(|e| CliError::Usage(e.to_string()))?),
        None => None,
    };
    let report = decode(&code, &y.symbols).map_err(CliError::Decode)?;
    save_symbols(&args.out, outer_bits(&code), report.message().to_vec())?;
    let correct = truth.map(|t| t.symbols == report.message());
    let out = DecodeOutput { report, inner_delta: stage.delta, beta, correct };
    let json = serde_json::to_string_pretty(&out).expect("report serializes") + "\n";
    match &args.report {
        Some(path) => write(path, json),
        None => {
            print!("{json}");
            Ok(())
        }
    }
}

#[derive(Serialize)]
struct BenchRow {
    alpha: f64,
    budget: usize,
    trials: usize,
    successes: usize,
    mean_beta: f64,
    mean_delta: f64,
}

struct Trial {
    success: bool,
    beta: f64,
    delta: usize,
}

fn trial_seed(base: u64, row: usize, trial: usize) -> u64 {
    base ^ ((row as u64) << 40) ^ (trial as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

fn bench(args: BenchArgs) -> Result<()> {
    let code = load_code(&args.code)?;
    let q = code.rs.field().order() as u16;
    let mut writer = csv_writer(args.out.as_deref(), &["alpha", "budget", "trials", "successes", "mean_beta", "mean_delta"])?;
    for (row, &alpha) in args.alphas.iter().enumerate() {
        if !(0.0..=1.0).contains(&alpha) {
            return Err(CliError::Usage(format!("alpha {alpha} outside [0, 1]")));
        }
        let budget = (alpha * code.word_len() as f64).floor() as usize;
        let trials: Vec<Trial> = (0..args.trials)
            .into_par_iter()
            .map(|trial| -> Result<Trial> {
                let seed = trial_seed(args.rng_seed, row, trial);
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let message: Vec<u16> = (0..code.message_len()).map(|_| rng.gen_range(0..q)).collect();
                let word = code.encode(&message).map_err(|e| CliError::Usage(e.to_string()))?;
                let config = args.channel.config(budget, args.insert_fraction, inner_bits(&code), seed);
                let (y, _) = corrupt(&word, &config)?;
                let stage = inner_stage(&code, &y);
                let beta = recovery_rate(&code, &stage, &message).map_err(|e| CliError::Usage(e.to_string()))?;
                let success = decode(&code, &y).is_ok_and(|r| r.message() == message);
                Ok(Trial { success, beta, delta: stage.delta })
            })
            .collect::<Result<_>>()?;
        if trials.is_empty() {
            continue;
        }
        let count = trials.len() as f64;
        writer.serialize(BenchRow {
            alpha,
            budget,
            trials: trials.len(),
            successes: trials.iter().filter(|t| t.success).count(),
            mean_beta: trials.iter().map(|t| t.beta).sum::<f64>() / count,
            mean_delta: trials.iter().map(|t| t.delta as f64).sum::<f64>() / count,
        })?;
    }
    finish_csv(writer)
}

#[derive(Serialize)]
struct SubspaceRow {
    n: usize,
    trial: usize,
    balanced: bool,
    witness_pair: String,
    max_lcs: usize,
    threshold: f64,
    certified_av: String,
}

impl SubspaceRow {
    fn new(trial: usize, r: &TheoremReport) -> Self {
        Self {
            n: r.n,
            trial,
            balanced: r.balanced,
            witness_pair: r.witness_pair.map_or(String::new(), |(p, q)| format!("{p}|{q}")),
            max_lcs: r.max_lcs,
            threshold: r.threshold,
            certified_av: r.certified_av.map_or(String::new(), |v| v.to_string()),
        }
    }
}

fn random_triple(rng: &mut ChaCha8Rng, n: usize) -> [Vec<u8>; 3] {
    loop {
        let triple: [Vec<u8>; 3] = std::array::from_fn(|_| (0..n).map(|_| rng.gen_range(0..2u8)).collect());
        if insdel::subspace_lcs::subspace_strings(&triple[0], &triple[1], &triple[2]).is_ok() {
            return triple;
        }
    }
}

fn subspace(args: SubspaceArgs) -> Result<()> {
    if args.n < 3 {
        return Err(CliError::Usage("subspaces need n ≥ 3".into()));
    }
    let opts = TheoremOptions { tol: args.tol, floor: args.floor };
    let triples = if args.exhaustive {
        three_dim_subspaces(args.n)?
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(args.rng_seed);
        (0..args.trials).map(|_| random_triple(&mut rng, args.n)).collect()
    };
    let reports: Vec<TheoremReport> =
        triples.par_iter().map(|[a, b, c]| verify_theorem(a, b, c, &opts)).collect::<Result<_, _>>()?;
    let header = ["n", "trial", "balanced", "witness_pair", "max_lcs", "threshold", "certified_av"];
    let mut writer = csv_writer(args.out.as_deref(), &header)?;
    for (trial, r) in reports.iter().enumerate() {
        writer.serialize(SubspaceRow::new(trial, r))?;
    }
    finish_csv(writer)?;
    let violations = reports.iter().filter(|r| r.violated()).count();
    if violations > 0 {
        return Err(CliError::Verify(format!("{violations} balanced triples fall below the threshold")));
    }
    Ok(())
}

type CsvWriter = csv::Writer<Box<dyn std::io::Write>>;

fn csv_writer(path: Option<&Path>, header: &[&str]) -> Result<CsvWriter> {
    let sink: Box<dyn std::io::Write> = match path {
        Some(p) => Box::new(fs::File::create(p).map_err(|source| CliError::Io { path: p.into(), source })?),
        None => Box::new(std::io::stdout()),
    };
    let mut writer = csv::WriterBuilder::new().has_headers(false).from_writer(sink);
    writer.write_record(header)?;
    Ok(writer)
}

fn finish_csv(mut writer: CsvWriter) -> Result<()> {
    writer.flush().map_err(|e| CliError::Csv(e.into()))
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Gen(a) => gen(a),
        Command::Verify(a) => verify(a),
        Command::Msg(a) => msg(a),
        Command::Encode(a) => encode(a),
        Command::Corrupt(a) => corrupt_cmd(a),
        Command::Decode(a) => decode_cmd(a),
        Command::Bench(a) => bench(a),
        Command::Subspace(a) => subspace(a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
