use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::Serialize;
use stopsmith::sampling::{exponential_reduction_sample, sukhatme_gap_sample};
use stopsmith::{
    enumerate_support, exact_success_by_enumeration, monte_carlo_success, optimize_threshold, run_suite, solve_regime,
    stream_rng, sukhatme_optimal_fraction, AsymptoticRegime, Error, ExactFamily, ModelSpec, Permutation,
    RankDirection, Sign, SukhatmeKind, WeightVector,
};

const DEFAULT_SEED: u64 = 1729;
const SAMPLE_CHUNK: u64 = 4096;

#[derive(Parser)]
#[command(name = "stopsmith", version, about = "Secretary-problem success probabilities under Mallows and Luce orders")]
struct Cli {
    /// Output encoding (verify defaults to a text table).
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,

    /// Write to this file instead of standard output.
    #[arg(long, short, global = true)]
    output: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Subcommand)]
enum Command {
    /// Draw random permutations, one per line.
    Sample {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, default_value_t = 1)]
        count: u64,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
    },
    /// Probability of one permutation.
    Pmf {
        #[command(flatten)]
        model: ModelArgs,
        /// Permutation in one-line notation, e.g. "2 3 1" or "2,3,1".
        #[arg(long)]
        perm: String,
    },
    /// Closed-form success probability of the threshold rule.
    Exact {
        #[command(flatten)]
        family: FamilyArgs,
        #[arg(long)]
        m: usize,
    },
    /// Success probability by summing over all of S_n (n <= 9).
    Enumerate {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long)]
        m: usize,
        #[arg(long, default_value = "max")]
        direction: RankDirection,
        /// Also list every permutation with its probability.
        #[arg(long)]
        support: bool,
    },
    /// Monte Carlo estimate of the success probability.
    Simulate {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long)]
        m: usize,
        #[arg(long, default_value = "max")]
        direction: RankDirection,
        #[arg(long, default_value_t = 1_000_000)]
        trials: u64,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
    },
    /// Best threshold at a finite n.
    Optimize {
        #[command(flatten)]
        family: FamilyArgs,
    },
    /// Asymptotically optimal threshold and limiting success probability.
    Asymptotic {
        #[arg(long, value_enum)]
        regime: RegimeArg,
        #[arg(long, default_value = "max")]
        direction: RankDirection,
        #[arg(long)]
        sign: Option<Sign>,
        #[arg(long)]
        c: Option<f64>,
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long)]
        q: Option<f64>,
        /// Relative truncation tolerance of the tail series.
        #[arg(long, default_value_t = 1e-14)]
        tol: f64,
    },
    /// Exact probabilities over a range of M and a grid of n and q.
    Sweep {
        #[arg(long, value_enum)]
        family: ExactKind,
        /// Comma-separated sizes.
        #[arg(long, value_delimiter = ',', required = true)]
        n: Vec<usize>,
        /// Comma-separated q values (Mallows families).
        #[arg(long, value_delimiter = ',')]
        q: Vec<f64>,
        /// Weights for luce-inv-down: inline list or shorthand.
        #[arg(long)]
        weights: Option<String>,
        /// Inclusive range `lo:hi` of thresholds; defaults to every M.
        #[arg(long)]
        m_range: Option<String>,
    },
    /// Run the self-check suite; exits nonzero on any failure.
    Verify {
        #[arg(long, value_enum, default_value = "quick")]
        level: LevelArg,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
    },
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum ModelKind {
    Mallows,
    Luce,
    LuceInv,
    PShifted,
    Uniform,
    /// Luce-inv drawn by reducing independent exponentials.
    ExpReduce,
    /// Luce-inv with Sukhatme weights drawn from exponential spacings.
    SukhatmeGaps,
}

#[derive(Args)]
struct ModelArgs {
    #[arg(long, value_enum)]
    model: ModelKind,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    q: Option<f64>,
    /// Inline list "1,2,3" or unit, geom:<q>, sukhatme, rev-sukhatme.
    #[arg(long, conflicts_with = "weights_file")]
    weights: Option<String>,
    /// One weight per line.
    #[arg(long)]
    weights_file: Option<PathBuf>,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum ExactKind {
    MallowsUp,
    MallowsDown,
    LuceInvDown,
    Classical,
}

impl ExactKind {
    fn direction(self) -> RankDirection {
        match self {
            ExactKind::MallowsUp | ExactKind::Classical => RankDirection::Max,
            ExactKind::MallowsDown | ExactKind::LuceInvDown => RankDirection::Min,
        }
    }
}

#[derive(Args)]
struct FamilyArgs {
    #[arg(long, value_enum)]
    family: ExactKind,
    #[arg(long)]
    n: usize,
    #[arg(long)]
    q: Option<f64>,
    #[arg(long, conflicts_with = "weights_file")]
    weights: Option<String>,
    #[arg(long)]
    weights_file: Option<PathBuf>,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum RegimeArg {
    FixedQ,
    Critical,
    Intermediate,
    Uniform,
    Sukhatme,
    RevSukhatme,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum LevelArg {
    Quick,
    Full,
}

#[derive(Debug)]
enum CliError {
    Lib(Error),
    Usage(String),
    Io(io::Error),
    Encode(String),
    ChecksFailed(usize),
}

impl CliError {
    fn code(&self) -> &'static str {
        match self {
            CliError::Lib(e) => e.code(),
            CliError::Usage(_) => "usage_error",
            CliError::Io(_) => "io_error",
            CliError::Encode(_) => "encode_error",
            CliError::ChecksFailed(_) => "verification_failed",
        }
    }

    fn message(&self) -> String {
        match self {
            CliError::Lib(e) => e.to_string(),
            CliError::Usage(m) | CliError::Encode(m) => m.clone(),
            CliError::Io(e) => e.to_string(),
            CliError::ChecksFailed(k) => format!("{k} check(s) failed"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Lib(e)
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Io(e)
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Encode(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Encode(e.to_string())
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

/// `v` rounded to 15 significant digits, printed without trailing zeros.
fn sig15(v: f64) -> String {
    if v == 0.0 || !v.is_finite() {
        return format!("{v}");
    }
    let s = format!("{v:.14e}");
    let rounded: f64 = s.parse().expect("valid float text");
    format!("{rounded}")
}

fn round15(v: f64) -> f64 {
    sig15(v).parse().expect("valid float text")
}

fn load_weights(inline: Option<&str>, file: Option<&PathBuf>, n: Option<usize>) -> CliResult<Option<WeightVector>> {
    let w = match (inline, file) {
        (Some(spec), _) => WeightVector::parse(spec, n)?,
        (None, Some(path)) => WeightVector::from_file(path)?,
        (None, None) => return Ok(None),
    };
    if let Some(n) = n {
        if w.len() != n {
            return Err(Error::InvalidWeights(format!("expected {n} weights, got {}", w.len())).into());
        }
    }
    Ok(Some(w))
}

impl ModelArgs {
    fn weights(&self) -> CliResult<WeightVector> {
        load_weights(self.weights.as_deref(), self.weights_file.as_ref(), self.n)?
            .ok_or_else(|| usage("this model needs --weights or --weights-file"))
    }

    fn n(&self) -> CliResult<usize> {
        self.n.ok_or_else(|| usage("--n is required for this model"))
    }

    /// The law being sampled or evaluated.
    fn spec(&self) -> CliResult<ModelSpec> {
        Ok(match self.model {
            ModelKind::Mallows => {
                let q = self.q.ok_or_else(|| usage("mallows needs --q"))?;
                ModelSpec::mallows(self.n()?, q)?
            }
            ModelKind::Uniform => ModelSpec::uniform(self.n()?)?,
            ModelKind::Luce => ModelSpec::luce(self.weights()?),
            ModelKind::LuceInv | ModelKind::ExpReduce => ModelSpec::luce_inv(self.weights()?),
            ModelKind::PShifted => ModelSpec::p_shifted(self.weights()?),
            ModelKind::SukhatmeGaps => ModelSpec::luce_inv(WeightVector::sukhatme(self.n()?)),
        })
    }
}

impl FamilyArgs {
    fn family(&self) -> CliResult<ExactFamily> {
        let q = || self.q.ok_or_else(|| usage("this family needs --q"));
        Ok(match self.family {
            ExactKind::MallowsUp => ExactFamily::MallowsUp { q: q()? },
            ExactKind::MallowsDown => ExactFamily::MallowsDown { q: q()? },
            ExactKind::Classical => ExactFamily::Classical,
            ExactKind::LuceInvDown => ExactFamily::LuceInvDown(
                load_weights(self.weights.as_deref(), self.weights_file.as_ref(), Some(self.n))?
                    .ok_or_else(|| usage("luce-inv-down needs --weights or --weights-file"))?,
            ),
        })
    }
}

struct Out {
    w: Box<dyn Write>,
    format: Format,
}

impl Out {
    fn json<T: Serialize>(&mut self, value: &T) -> CliResult<()> {
        serde_json::to_writer(&mut self.w, value)?;
        writeln!(self.w)?;
        Ok(())
    }

    fn csv<T: Serialize>(&mut self, rows: &[T]) -> CliResult<()> {
        let mut wtr = csv::Writer::from_writer(&mut self.w);
        for row in rows {
            wtr.serialize(row)?;
        }
        wtr.flush()?;
        Ok(())
    }

    /// One record in the selected encoding.
    fn record<T: Serialize>(&mut self, value: &T) -> CliResult<()> {
        match self.format {
            Format::Json => self.json(value),
            Format::Csv => self.csv(std::slice::from_ref(value)),
        }
    }
}

#[derive(Serialize)]
struct PmfRecord {
    model: String,
    n: usize,
    params: String,
    perm: String,
    pmf: f64,
    ln_pmf: f64,
}

#[derive(Serialize)]
struct ProbabilityRow {
    family: String,
    n: usize,
    m: usize,
    q_or_weights: String,
    direction: RankDirection,
    probability: f64,
}

#[derive(Serialize)]
struct SupportRow {
    perm: String,
    probability: f64,
}

#[derive(Serialize)]
struct OptimumRecord {
    family: String,
    n: usize,
    params: String,
    direction: RankDirection,
    m: usize,
    value: f64,
}

fn model_name(spec: &ModelSpec) -> String {
    spec.family().name().to_string()
}

fn cmd_sample(out: &mut Out, model: &ModelArgs, count: u64, seed: u64) -> CliResult<()> {
    let spec = model.spec()?;
    let n = spec.n();
    let kind = model.model;
    let weights = match kind {
        ModelKind::ExpReduce => Some(model.weights()?),
        _ => None,
    };
    // Fixed-size chunks on separate streams, matching the Monte Carlo layout.
    for c in 0..count.div_ceil(SAMPLE_CHUNK) {
        let mut rng = stream_rng(seed, c);
        for _ in 0..SAMPLE_CHUNK.min(count - c * SAMPLE_CHUNK) {
            let p = match kind {
                ModelKind::ExpReduce => exponential_reduction_sample(weights.as_ref().expect("loaded above"), &mut rng),
                ModelKind::SukhatmeGaps => sukhatme_gap_sample(n, &mut rng),
                _ => spec.sample(&mut rng),
            };
            match out.format {
                Format::Json => out.json(&p.as_slice())?,
                Format::Csv => {
                    let line = p.as_slice().iter().map(usize::to_string).collect::<Vec<_>>().join(",");
                    writeln!(out.w, "{line}")?;
                }
            }
        }
    }
    Ok(())
}

fn parse_perm(text: &str) -> CliResult<Permutation> {
    Ok(text.replace(',', " ").parse()?)
}

fn cmd_pmf(out: &mut Out, model: &ModelArgs, perm: &str) -> CliResult<()> {
    let spec = model.spec()?;
    let p = parse_perm(perm)?;
    let ln_pmf = spec.ln_pmf(&p)?;
    out.record(&PmfRecord {
        model: model_name(&spec),
        n: spec.n(),
        params: spec.params_label(),
        perm: p.to_string(),
        pmf: round15(ln_pmf.exp()),
        ln_pmf,
    })
}

fn cmd_exact(out: &mut Out, args: &FamilyArgs, m: usize) -> CliResult<()> {
    let fam = args.family()?;
    let value = fam.evaluate(args.n, m)?;
    match out.format {
        Format::Json => writeln!(out.w, "{}", sig15(value))?,
        Format::Csv => out.csv(&[ProbabilityRow {
            family: fam.name().to_string(),
            n: args.n,
            m,
            q_or_weights: fam.params_label(),
            direction: args.family.direction(),
            probability: round15(value),
        }])?,
    }
    Ok(())
}

fn cmd_enumerate(out: &mut Out, model: &ModelArgs, m: usize, dir: RankDirection, support: bool) -> CliResult<()> {
    let spec = model.spec()?;
    if support {
        let rows: Vec<SupportRow> = enumerate_support(&spec)?
            .map(|(p, pr)| SupportRow { perm: p.to_string(), probability: round15(pr) })
            .collect();
        match out.format {
            Format::Json => rows.iter().try_for_each(|r| out.json(r))?,
            Format::Csv => out.csv(&rows)?,
        }
    }
    let value = exact_success_by_enumeration(&spec, m, dir)?;
    out.record(&ProbabilityRow {
        family: model_name(&spec),
        n: spec.n(),
        m,
        q_or_weights: spec.params_label(),
        direction: dir,
        probability: round15(value),
    })
}

fn cmd_simulate(out: &mut Out, model: &ModelArgs, m: usize, dir: RankDirection, trials: u64, seed: u64) -> CliResult<()> {
    if matches!(model.model, ModelKind::ExpReduce | ModelKind::SukhatmeGaps) {
        return Err(usage("simulate draws from the model law; use luce-inv for these samplers"));
    }
    let spec = model.spec()?;
    let est = monte_carlo_success(&spec, m, dir, trials, seed)?;
    out.record(&est.record(&spec, m, dir))
}

fn cmd_optimize(out: &mut Out, args: &FamilyArgs) -> CliResult<()> {
    let fam = args.family()?;
    let best = optimize_threshold(&fam, args.n)?;
    out.record(&OptimumRecord {
        family: fam.name().to_string(),
        n: args.n,
        params: fam.params_label(),
        direction: args.family.direction(),
        m: best.m,
        value: round15(best.value),
    })
}

#[allow(clippy::too_many_arguments)]
fn cmd_asymptotic(
    out: &mut Out,
    regime: RegimeArg,
    dir: RankDirection,
    sign: Option<Sign>,
    c: Option<f64>,
    alpha: Option<f64>,
    q: Option<f64>,
    tol: f64,
) -> CliResult<()> {
    let need_c = || c.ok_or_else(|| usage("this regime needs --c"));
    let need_sign = || sign.ok_or_else(|| usage("this regime needs --sign plus|minus"));
    let mut record = match regime {
        RegimeArg::FixedQ => {
            let q = q.ok_or_else(|| usage("fixed-q needs --q"))?;
            stopsmith::asymptotics::fixed_q_optimum_with_tol(q, dir, tol)?.record()
        }
        RegimeArg::Critical => {
            solve_regime(AsymptoticRegime::CriticalWindow { c: need_c()?, sign: need_sign()? }, dir)?.record()
        }
        RegimeArg::Intermediate => {
            let alpha = alpha.ok_or_else(|| usage("intermediate needs --alpha"))?;
            solve_regime(AsymptoticRegime::Intermediate { c: need_c()?, alpha, sign: need_sign()? }, dir)?.record()
        }
        RegimeArg::Uniform => solve_regime(AsymptoticRegime::Uniform, dir)?.record(),
        RegimeArg::Sukhatme | RegimeArg::RevSukhatme => {
            let (kind, name) = match regime {
                RegimeArg::Sukhatme => (SukhatmeKind::Standard, "sukhatme"),
                _ => (SukhatmeKind::Reverse, "rev-sukhatme"),
            };
            if dir != RankDirection::Min {
                return Err(usage("the Sukhatme limits are for --direction min"));
            }
            let mut rec = sukhatme_optimal_fraction(kind).record();
            rec.regime = name.to_string();
            rec
        }
    };
    record.threshold_value = round15(record.threshold_value);
    record.limit_prob = round15(record.limit_prob);
    out.record(&record)
}

fn parse_m_range(text: &str) -> CliResult<(usize, usize)> {
    let (lo, hi) = text.split_once(':').ok_or_else(|| usage("--m-range must look like lo:hi"))?;
    let lo = lo.trim().parse().map_err(|_| usage("bad lower end of --m-range"))?;
    let hi = hi.trim().parse().map_err(|_| usage("bad upper end of --m-range"))?;
    if lo > hi {
        return Err(usage("--m-range needs lo <= hi"));
    }
    Ok((lo, hi))
}

fn cmd_sweep(
    out: &mut Out,
    kind: ExactKind,
    sizes: &[usize],
    qs: &[f64],
    weights: Option<&str>,
    m_range: Option<&str>,
) -> CliResult<()> {
    let range = m_range.map(parse_m_range).transpose()?;
    let mut points: Vec<(usize, ExactFamily)> = Vec::new();
    for &n in sizes {
        match kind {
            ExactKind::MallowsUp | ExactKind::MallowsDown => {
                if qs.is_empty() {
                    return Err(usage("Mallows sweeps need --q"));
                }
                for &q in qs {
                    let fam = match kind {
                        ExactKind::MallowsUp => ExactFamily::MallowsUp { q },
                        _ => ExactFamily::MallowsDown { q },
                    };
                    points.push((n, fam));
                }
            }
            ExactKind::Classical => points.push((n, ExactFamily::Classical)),
            ExactKind::LuceInvDown => {
                let spec = weights.ok_or_else(|| usage("luce-inv-down sweeps need --weights"))?;
                points.push((n, ExactFamily::LuceInvDown(WeightVector::parse(spec, Some(n))?)));
            }
        }
    }
    let blocks = points
        .par_iter()
        .map(|(n, fam)| {
            let profile = fam.profile(*n)?;
            let (lo, hi) = range.unwrap_or((0, n - 1));
            if hi >= *n {
                return Err(Error::BadThreshold { m: hi, n: *n });
            }
            Ok((lo..=hi)
                .map(|m| ProbabilityRow {
                    family: fam.name().to_string(),
                    n: *n,
                    m,
                    q_or_weights: fam.params_label(),
                    direction: kind.direction(),
                    probability: round15(profile[m]),
                })
                .collect::<Vec<_>>())
        })
        .collect::<Result<Vec<_>, Error>>()?;
    let rows: Vec<ProbabilityRow> = blocks.into_iter().flatten().collect();
    match out.format {
        Format::Csv => out.csv(&rows),
        Format::Json => rows.iter().try_for_each(|r| out.json(r)),
    }
}

fn cmd_verify(out: &mut Out, explicit: Option<Format>, level: LevelArg, seed: u64) -> CliResult<()> {
    let level = match level {
        LevelArg::Quick => stopsmith::VerifyLevel::Quick,
        LevelArg::Full => stopsmith::VerifyLevel::Full,
    };
    let rows = run_suite(level, seed);
    match explicit {
        Some(Format::Json) => out.json(&rows)?,
        Some(Format::Csv) => out.csv(&rows)?,
        None => {
            let width = rows.iter().map(|r| r.name.len()).max().unwrap_or(0);
            for r in &rows {
                let tag = if r.passed { "PASS" } else { "FAIL" };
                writeln!(out.w, "{tag}  {:<width$}  {}", r.name, r.detail)?;
            }
        }
    }
    let failed = rows.iter().filter(|r| !r.passed).count();
    if failed > 0 {
        out.w.flush()?;
        return Err(CliError::ChecksFailed(failed));
    }
    Ok(())
}

fn configure_threads() -> CliResult<()> {
    let Ok(raw) = std::env::var("STOPSMITH_THREADS") else { return Ok(()) };
    let threads: usize = raw
        .trim()
        .parse()
        .map_err(|_| usage(format!("STOPSMITH_THREADS must be a non-negative integer, got {raw:?}")))?;
    if threads > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| usage(e.to_string()))?;
    }
    Ok(())
}

fn run(cli: Cli) -> CliResult<()> {
    configure_threads()?;
    let w: Box<dyn Write> = match &cli.output {
        Some(path) => Box::new(BufWriter::new(File::create(path)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    };
    let mut out = Out { w, format: cli.format.unwrap_or(Format::Json) };
    match &cli.command {
        Command::Sample { model, count, seed } => cmd_sample(&mut out, model, *count, *seed)?,
        Command::Pmf { model, perm } => cmd_pmf(&mut out, model, perm)?,
        Command::Exact { family, m } => cmd_exact(&mut out, family, *m)?,
        Command::Enumerate { model, m, direction, support } => {
            cmd_enumerate(&mut out, model, *m, *direction, *support)?
        }
        Command::Simulate { model, m, direction, trials, seed } => {
            cmd_simulate(&mut out, model, *m, *direction, *trials, *seed)?
        }
        Command::Optimize { family } => cmd_optimize(&mut out, family)?,
        Command::Asymptotic { regime, direction, sign, c, alpha, q, tol } => {
            cmd_asymptotic(&mut out, *regime, *direction, *sign, *c, *alpha, *q, *tol)?
        }
        Command::Sweep { family, n, q, weights, m_range } => {
            cmd_sweep(&mut out, *family, n, q, weights.as_deref(), m_range.as_deref())?
        }
        Command::Verify { level, seed } => cmd_verify(&mut out, cli.format, *level, *seed)?,
    }
    out.w.flush()?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let json = cli.format != Some(Format::Csv);
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            if json {
                let body = serde_json::json!({ "error": e.code(), "message": e.message() });
                eprintln!("{body}");
            } else {
                eprintln!("error: {}: {}", e.code(), e.message());
            }
            ExitCode::FAILURE
        }
    }
}
