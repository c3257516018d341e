//! `privdel`: run the delegation experiments and analytics from the shell.
//!
//! Exit codes: 0 on success, 2 on flag or parameter errors, 1 on degenerate
//! results (no accepted trials to condition on, failed criteria, I/O).

use std::fmt::Write as _;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use privdel::auth::{self, AuthKey, AuthRecord, FieldSize};
use privdel::bounds::{self, BoundsRow};
use privdel::encoding::{self, bits_to_string, Instance};
use privdel::experiments::{self, ExperimentConfig, ExperimentReport};
use privdel::parties::{self, Certificate, RunTranscript};
use privdel::{checks, generate_key, key_length_bits, rng, AdversaryStrategy, Error, Message, Task};

#[derive(Parser)]
#[command(name = "privdel", version, about = "Trap-encoded quantum storage and erasure: games, bounds and demos")]
struct Cli {
    /// Run every reproduction criterion and report pass/fail per criterion.
    #[arg(long)]
    check: bool,

    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Subcommand)]
enum Command {
    /// Estimate P[CERT] for one attack.
    Cert(CertArgs),
    /// Estimate P[DISCR | CERT]; optionally fit the security product over an n-grid.
    Discr(DiscrArgs),
    /// Walk through complete sessions step by step.
    ErasureDemo(DemoArgs),
    /// Exact acceptance law and its Hoeffding bound, or the first-slot attack closed forms.
    Bounds(BoundsArgs),
    /// Secret-key length and its n log2 m approximation.
    Keylen(KeylenArgs),
    /// CERT estimates over a grid of attack sizes.
    Sweep(SweepArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Jsonl,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum AdversaryKind {
    Noop,
    Sample,
    Firstbit,
}

#[derive(Clone, Copy, ValueEnum)]
enum TaskArg {
    Storage,
    Erasure,
}

impl From<TaskArg> for Task {
    fn from(t: TaskArg) -> Self {
        match t {
            TaskArg::Storage => Task::Storage,
            TaskArg::Erasure => Task::Erasure,
        }
    }
}

#[derive(Args)]
struct Output {
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Output file (written atomically); stdout when neither this nor an output directory is set.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Directory for `<command>.<format>` when `--out` is absent.
    #[arg(long, env = "PRIVDEL_OUT_DIR")]
    out_dir: Option<PathBuf>,
}

impl Output {
    fn extension(&self) -> &'static str {
        match self.format {
            Format::Csv => "csv",
            Format::Jsonl => "jsonl",
        }
    }
}

#[derive(Args)]
struct GameArgs {
    /// Message length.
    #[arg(long)]
    m: usize,
    /// Number of trap qubits.
    #[arg(long)]
    n: usize,
    #[arg(long, value_enum)]
    adversary: Option<AdversaryKind>,
    /// Slots measured by the `sample` adversary.
    #[arg(long)]
    r: Option<usize>,
    #[arg(long, value_enum)]
    task: Option<TaskArg>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

impl GameArgs {
    fn strategy(&self, default: AdversaryKind) -> Result<AdversaryStrategy> {
        let kind = self.adversary.unwrap_or(default);
        match (kind, self.r) {
            (AdversaryKind::Sample, Some(r)) => Ok(AdversaryStrategy::sample(r)),
            (AdversaryKind::Sample, None) => Err(usage("--adversary sample needs --r")),
            (_, Some(_)) => Err(usage("--r only applies to --adversary sample")),
            (AdversaryKind::Noop, None) => Ok(AdversaryStrategy::NoOp),
            (AdversaryKind::Firstbit, None) => Ok(AdversaryStrategy::FirstBit),
        }
    }

    fn config(&self, adversary: AdversaryKind, task: TaskArg, trials: u64) -> Result<ExperimentConfig> {
        let task = self.task.unwrap_or(task).into();
        let config = ExperimentConfig::new(self.m, self.n, task, self.strategy(adversary)?, trials, self.seed);
        config.validate()?;
        Ok(config)
    }
}

#[derive(Args)]
struct CertArgs {
    #[command(flatten)]
    game: GameArgs,
    #[arg(long, default_value_t = 100_000)]
    trials: u64,
    /// Verifier readout error probability.
    #[arg(long, default_value_t = 0.0)]
    readout_flip: f64,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct DiscrArgs {
    /// Adversary defaults to `firstbit`.
    #[command(flatten)]
    game: GameArgs,
    #[arg(long, default_value_t = 100_000)]
    trials: u64,
    /// Legitimate message as a bitstring of length m (default all zeros).
    #[arg(long)]
    legit: Option<Message>,
    /// Trap counts to sweep at the fixed ratio m/n; enables the decay fit.
    #[arg(long, value_delimiter = ',')]
    n_grid: Vec<usize>,
    /// Report whether the security product decays faster than n^-c.
    #[arg(long, default_value_t = 1.0)]
    decay_c: f64,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct DemoArgs {
    /// Adversary defaults to `noop`, task to `erasure`.
    #[command(flatten)]
    game: GameArgs,
    /// Independent sessions; repetition i uses seed + i.
    #[arg(long, default_value_t = 1)]
    repetitions: u64,
    /// Field size in bits of the one-time MAC over the message: 4, 32 or 64.
    #[arg(long, default_value_t = 64)]
    auth_bits: u32,
    /// JSON-lines transcript file (written atomically).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Directory for `erasure-demo.jsonl` when `--out` is absent.
    #[arg(long, env = "PRIVDEL_OUT_DIR")]
    out_dir: Option<PathBuf>,
    /// Save the first session's key and message as JSON.
    #[arg(long)]
    instance_out: Option<PathBuf>,
}

#[derive(Args)]
struct BoundsArgs {
    #[arg(long)]
    m: usize,
    #[arg(long)]
    n: usize,
    /// Attack sizes (default: eleven evenly spaced values in 0..=m+n).
    #[arg(long, value_delimiter = ',')]
    r: Vec<usize>,
    /// Hoeffding slack values.
    #[arg(long, value_delimiter = ',')]
    epsilon: Vec<f64>,
    /// Print the first-slot attack closed forms instead of the table.
    #[arg(long)]
    firstbit: bool,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct KeylenArgs {
    #[arg(long)]
    m: usize,
    #[arg(long)]
    n: usize,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct SweepArgs {
    /// Message length (with --n); without both, the 20-point reference grid is swept.
    #[arg(long, requires = "n")]
    m: Option<usize>,
    #[arg(long, requires = "m")]
    n: Option<usize>,
    /// Attack sizes (default: eleven evenly spaced values in 0..=m+n).
    #[arg(long, value_delimiter = ',', requires = "m")]
    r: Vec<usize>,
    #[arg(long, value_enum, default_value_t = TaskArg::Storage)]
    task: TaskArg,
    #[arg(long, default_value_t = 100_000)]
    trials: u64,
    /// Master seed; each grid point gets its own derived seed.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    output: Output,
}

/// A flag combination clap cannot express; exits with code 2.
#[derive(Debug)]
struct UsageError(String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

/// A run that completed but produced a degenerate or failing result.
#[derive(Debug)]
struct Degenerate(String);

impl std::fmt::Display for Degenerate {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Degenerate {}

fn exit_code(err: &anyhow::Error) -> u8 {
    if err.downcast_ref::<UsageError>().is_some() {
        return 2;
    }
    match err.downcast_ref::<Error>() {
        Some(Error::NoAcceptedTrials) => 1,
        Some(_) => 2,
        None => 1,
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
    let result = match (cli.check, cli.command) {
        (true, None) => run_checks(),
        (false, Some(command)) => run(command),
        (true, Some(_)) => Err(usage("--check runs on its own; drop the subcommand")),
        (false, None) => Err(usage("missing subcommand (see --help)")),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::Cert(args) => cert(args),
        Command::Discr(args) => discr(args),
        Command::ErasureDemo(args) => demo(args),
        Command::Bounds(args) => bounds_cmd(args),
        Command::Keylen(args) => keylen(args),
        Command::Sweep(args) => sweep(args),
    }
}

fn run_checks() -> Result<()> {
    let mut passed = 0;
    for (id, check) in checks::ALL {
        match check() {
            Ok(outcome) => {
                println!("{outcome}");
                passed += usize::from(outcome.passed);
            }
            Err(e) => println!("[FAIL] {id}: did not run: {e}\n"),
        }
    }
    println!("{passed}/{} criteria passed", checks::ALL.len());
    if passed == checks::ALL.len() {
        Ok(())
    } else {
        Err(Degenerate(format!("{} criteria failed", checks::ALL.len() - passed)).into())
    }
}

fn cert(args: CertArgs) -> Result<()> {
    let mut config = args.game.config(AdversaryKind::Sample, TaskArg::Storage, args.trials)?;
    config.readout_flip = args.readout_flip;
    config.validate()?;
    let report = experiments::run_cert(&config)?;
    emit(&args.output, "cert", &render_reports(&[report], args.output.format))
}

fn discr(args: DiscrArgs) -> Result<()> {
    let base = args.game.config(AdversaryKind::Firstbit, TaskArg::Storage, args.trials)?;
    if args.n_grid.is_empty() {
        let legit = match args.legit {
            Some(msg) => msg,
            None => Message::zeros(base.m)?,
        };
        let report = experiments::run_discr(&base, &legit)?;
        return emit(&args.output, "discr", &render_reports(&[report], args.output.format));
    }
    if args.legit.is_some() {
        return Err(usage("--legit cannot be combined with --n-grid (message length varies)"));
    }
    let ratio = base.m as f64 / base.n as f64;
    let mut reports = Vec::with_capacity(args.n_grid.len());
    for (i, &n) in args.n_grid.iter().enumerate() {
        let m = (ratio * n as f64).round() as usize;
        let config = ExperimentConfig { m, n, seed: rng::derive_seed(base.seed, i as u64), ..base.clone() };
        config.validate()?;
        reports.push(experiments::run_discr(&config, &Message::zeros(m)?)?);
    }
    emit(&args.output, "discr", &render_reports(&reports, args.output.format))?;
    let points: Vec<(usize, f64)> = reports.iter().map(|r| (r.n, r.product.unwrap_or(0.0))).collect();
    let fit = experiments::fit_decay(&points, args.decay_c)?;
    eprintln!(
        "decay fit over n = {:?}: slope {:.4}; decays faster than n^-{}: {}",
        args.n_grid,
        fit.slope,
        args.decay_c,
        if fit.decays_faster { "yes" } else { "no" }
    );
    Ok(())
}

fn sweep(args: SweepArgs) -> Result<()> {
    let task = args.task.into();
    let configs: Vec<ExperimentConfig> = match (args.m, args.n) {
        (Some(m), Some(n)) => {
            let rs = if args.r.is_empty() { default_rs(m, n) } else { args.r.clone() };
            experiments::sample_grid(m, n, task, &rs, args.trials)
        }
        _ => checks::reference_grid()
            .into_iter()
            .map(|(m, n, r)| ExperimentConfig::new(m, n, task, AdversaryStrategy::sample(r), args.trials, 0))
            .collect(),
    };
    for config in &configs {
        config.validate()?;
    }
    let reports = experiments::sweep(args.seed, &configs).into_iter().collect::<privdel::Result<Vec<_>>>()?;
    emit(&args.output, "sweep", &render_reports(&reports, args.output.format))
}

fn bounds_cmd(args: BoundsArgs) -> Result<()> {
    if args.m == 0 || args.n == 0 {
        return Err(Error::DegenerateParameters { m: args.m, n: args.n }.into());
    }
    let text = if args.firstbit {
        if !args.r.is_empty() || !args.epsilon.is_empty() {
            return Err(usage("--firstbit takes no --r or --epsilon"));
        }
        let cert: f64 = bounds::firstbit_cert(args.m, args.n)?;
        let advantage: f64 = bounds::firstbit_advantage(args.m, args.n)?;
        let success: f64 = bounds::firstbit_conditional_success(args.m, args.n)?;
        let product = cert * (success - 0.5);
        match args.output.format {
            Format::Csv => format!(
                "m,n,cert,advantage,conditional_success,product\n{},{},{cert},{advantage},{success},{product}\n",
                args.m, args.n
            ),
            Format::Jsonl => format!(
                "{}\n",
                serde_json::json!({
                    "m": args.m, "n": args.n, "cert": cert, "advantage": advantage,
                    "conditional_success": success, "product": product,
                })
            ),
        }
    } else {
        let rs = if args.r.is_empty() { default_rs(args.m, args.n) } else { args.r };
        let eps = if args.epsilon.is_empty() { checks::EPSILONS.to_vec() } else { args.epsilon };
        let rows = bounds::bounds_table(args.m, args.n, &rs, &eps)?;
        match args.output.format {
            Format::Csv => csv(BoundsRow::CSV_HEADER, rows.iter().map(BoundsRow::to_csv)),
            Format::Jsonl => bounds_jsonl(&rows)?,
        }
    };
    emit(&args.output, "bounds", &text)
}

fn keylen(args: KeylenArgs) -> Result<()> {
    if args.m == 0 || args.n == 0 {
        return Err(Error::DegenerateParameters { m: args.m, n: args.n }.into());
    }
    let k = key_length_bits::<f64>(args.m, args.n);
    let approx = k.approx.unwrap_or(f64::NAN);
    let rel = k.relative_error().unwrap_or(f64::NAN);
    let text = match args.output.format {
        Format::Csv => format!(
            "m,n,exact_bits,approx_bits,relative_error\n{},{},{:.6},{:.6},{:.6}\n",
            args.m, args.n, k.exact, approx, rel
        ),
        Format::Jsonl => format!(
            "{}\n",
            serde_json::json!({
                "m": args.m, "n": args.n, "exact_bits": k.exact,
                "approx_bits": approx, "relative_error": rel,
            })
        ),
    };
    emit(&args.output, "keylen", &text)
}

fn demo(args: DemoArgs) -> Result<()> {
    if args.repetitions == 0 {
        return Err(usage("--repetitions must be at least 1"));
    }
    let config = args.game.config(AdversaryKind::Noop, TaskArg::Erasure, args.repetitions)?;
    let field = FieldSize::from_bits(args.auth_bits)?;
    if field == FieldSize::S4 && config.m > 15 {
        return Err(Error::MessageTooLong { bits: config.m, field_bits: 4 }.into());
    }

    let mut narrative = String::new();
    let mut transcripts = String::new();
    let mut accepted = 0u64;
    for i in 0..args.repetitions {
        let seed = config.seed.wrapping_add(i);
        let session = Session::run(&config, field, seed)?;
        accepted += u64::from(session.accepted);
        if i == 0 {
            session.narrate(&config, &mut narrative);
            if let Some(path) = &args.instance_out {
                let instance = Instance { key: session.key.clone(), message: session.message.clone() };
                write_atomically(path, &format!("{}\n", serde_json::to_string(&instance)?))?;
            }
        }
        let line = RunTranscript {
            task: config.task,
            seed,
            m: config.m,
            n: config.n,
            adversary: config.adversary.label().to_string(),
            accepted: session.accepted,
            record: session.record,
            auth: Some(session.auth),
        };
        transcripts.push_str(&line.to_json_line());
        transcripts.push('\n');
    }

    let total = args.repetitions;
    let rejected = total - accepted;
    let _ = writeln!(
        narrative,
        "summary: {accepted}/{total} accepted, rejected fraction {:.4}",
        rejected as f64 / total as f64
    );
    if let Some(p) = config.analytic_cert() {
        let _ = writeln!(narrative, "         expected rejected fraction {:.4}", 1.0 - p);
    }
    io::stdout().lock().write_all(narrative.as_bytes())?;

    let target = match (&args.out, &args.out_dir) {
        (Some(path), _) => Some(path.clone()),
        (None, Some(dir)) => Some(dir.join("erasure-demo.jsonl")),
        (None, None) => None,
    };
    if let Some(path) = target {
        write_atomically(&path, &transcripts)?;
        eprintln!("wrote {total} transcripts to {}", path.display());
    }
    Ok(())
}

/// One complete session, kept for narration.
struct Session {
    message: Message,
    key: encoding::SecretKey,
    auth_key: AuthKey,
    auth: AuthRecord,
    record: parties::EavesdropRecord,
    announced: Option<String>,
    traps_matched: Option<usize>,
    accepted: bool,
    recovered: Option<(bool, bool)>,
}

impl Session {
    fn run(config: &ExperimentConfig, field: FieldSize, seed: u64) -> Result<Self> {
        let mut rng = rng::seeded(seed);
        let message = Message::random(config.m, &mut rng)?;
        let key = generate_key(config.m, config.n, &mut rng)?;
        let auth_key = AuthKey::random(field, &mut rng);
        let tag = auth::tag(&message, &auth_key)?;
        let state = encoding::encode::<f64>(&message, &key)?;
        let (state, record) = parties::adversary_intervene(state, &config.adversary, &mut rng)?;
        let certificate = parties::prover_respond(state, &config.task.honest_prover(), config.task, &mut rng)?;
        let (announced, traps_matched) = match &certificate {
            Certificate::Erasure { announced } => {
                (Some(bits_to_string(announced)), Some(key.traps().filter(|&(p, v)| announced[p] == v).count()))
            }
            Certificate::Storage { .. } => (None, None),
        };
        let verdict = parties::verify(&certificate, &key, &mut rng)?;
        let recovered = verdict.recovered.as_ref().map(|m| (*m == message, auth::verify_tag(m, &tag, &auth_key)));
        Ok(Self {
            auth: AuthRecord::new(&tag, &auth_key),
            message,
            key,
            auth_key,
            record,
            announced,
            traps_matched,
            accepted: verdict.accepted,
            recovered,
        })
    }

    fn narrate(&self, config: &ExperimentConfig, out: &mut String) {
        let (m, n) = (config.m, config.n);
        let _ = writeln!(
            out,
            "session: task={} m={m} n={n} adversary={} seed={}",
            config.task, config.adversary, config.seed
        );
        let _ = writeln!(out, "step 1  user picks message M           {}", clip(&self.message.to_string()));
        let positions: Vec<String> = self.key.trap_positions().iter().map(usize::to_string).collect();
        let _ = writeln!(out, "step 2  user picks key k: traps at     {}", clip(&positions.join(",")));
        let _ =
            writeln!(out, "        trap values                    {}", clip(&bits_to_string(self.key.trap_values())));
        let mac = format!("one-time MAC over M (s={})", self.auth_key.field().bits());
        let _ = writeln!(out, "        {mac:<31}tag {} (key {} bits)", self.auth.tag, self.auth_key.field().key_bits());
        let _ = writeln!(out, "step 3  user uploads rho(M,k)          {} qubits", m + n);
        if self.record.is_empty() {
            let _ = writeln!(out, "step 4  eavesdropper                   no measurements");
        } else {
            let slots: Vec<String> = self.record.measured_positions.iter().map(usize::to_string).collect();
            let outcomes: String = self.record.outcomes.iter().map(|&b| if b { '1' } else { '0' }).collect();
            let _ = writeln!(out, "step 4  eavesdropper measured slots    {}", clip(&slots.join(",")));
            let _ = writeln!(out, "        rectilinear outcomes           {}", clip(&outcomes));
        }
        match config.task {
            Task::Erasure => {
                let _ = writeln!(out, "step 5  server measures all slots diagonally and announces");
                let _ = writeln!(
                    out,
                    "        announced                      {}",
                    clip(self.announced.as_deref().unwrap_or(""))
                );
                let _ = writeln!(
                    out,
                    "        expected at traps              {}",
                    clip(&parties::expected_announcements(&self.key))
                );
                let _ = writeln!(
                    out,
                    "        trap check                     {}/{n} matched",
                    self.traps_matched.unwrap_or(0)
                );
            }
            Task::Storage => {
                let _ = writeln!(out, "step 5  server returns the state; user measures the traps diagonally");
            }
        }
        let _ = writeln!(
            out,
            "step 6  verdict                        {}",
            if self.accepted { "ACCEPTED" } else { "REJECTED" }
        );
        if let Some((matches, tag_ok)) = self.recovered {
            let _ = writeln!(out, "step 7  recovered M matches            {}", yes_no(matches));
            let _ = writeln!(out, "        MAC tag verifies               {}", yes_no(tag_ok));
        }
    }
}

fn yes_no(b: bool) -> &'static str {
    if b {
        "yes"
    } else {
        "no"
    }
}

fn clip(s: &str) -> String {
    const WIDTH: usize = 72;
    if s.len() <= WIDTH {
        s.to_string()
    } else {
        format!("{}... ({} chars)", &s[..WIDTH], s.len())
    }
}

/// Eleven evenly spaced attack sizes covering `0..=m+n`.
fn default_rs(m: usize, n: usize) -> Vec<usize> {
    let total = m + n;
    let mut rs: Vec<usize> = (0..=10).map(|i| (total * i + 5) / 10).collect();
    rs.dedup();
    rs
}

fn render_reports(reports: &[ExperimentReport], format: Format) -> String {
    match format {
        Format::Csv => csv(ExperimentReport::CSV_HEADER, reports.iter().map(ExperimentReport::to_csv)),
        Format::Jsonl => reports.iter().map(|r| r.to_json_line() + "\n").collect(),
    }
}

fn csv(header: &str, rows: impl Iterator<Item = String>) -> String {
    let mut out = format!("{header}\n");
    for row in rows {
        out.push_str(&row);
        out.push('\n');
    }
    out
}

fn bounds_jsonl(rows: &[BoundsRow]) -> Result<String> {
    let mut out = String::new();
    for row in rows {
        out.push_str(&serde_json::to_string(row)?);
        out.push('\n');
    }
    Ok(out)
}

fn emit(output: &Output, command: &str, text: &str) -> Result<()> {
    let target = match (&output.out, &output.out_dir) {
        (Some(path), _) => path.clone(),
        (None, Some(dir)) => dir.join(format!("{command}.{}", output.extension())),
        (None, None) => {
            io::stdout().lock().write_all(text.as_bytes())?;
            return Ok(());
        }
    };
    write_atomically(&target, text)?;
    eprintln!("wrote {}", target.display());
    Ok(())
}

/// Writes through a temporary file in the destination directory and renames
/// it into place, so readers never observe a partial file.
fn write_atomically(path: &Path, text: &str) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir).with_context(|| format!("writing into {}", dir.display()))?;
    tmp.write_all(text.as_bytes())?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).with_context(|| format!("replacing {}", path.display()))?;
    Ok(())
}
