//! Seeded Monte-Carlo estimates of the certification (CERT) and
//! discrimination (DISCR) games.
//!
//! Trial `i` of an experiment with seed `s` always draws from
//! `trial_stream(s, i)`, and counts are reduced by integer addition, so a
//! report depends only on its configuration, never on the thread pool.

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::bounds;
use crate::parties::{run_protocol, AdversaryStrategy, PositionChoice, Task};
use crate::rng::{derive_seed, trial_stream};
use crate::{Error, Message, Result};

/// z-score for a two-sided 95% interval.
pub const Z95: f64 = 1.959_963_984_540_054;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MessageSource {
    Fixed(Message),
    Uniform,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub m: usize,
    pub n: usize,
    pub task: Task,
    pub adversary: AdversaryStrategy,
    pub trials: u64,
    pub seed: u64,
    pub message: MessageSource,
    /// Classical readout error of the verifier's detector (0 = ideal).
    pub readout_flip: f64,
}

impl ExperimentConfig {
    pub fn new(m: usize, n: usize, task: Task, adversary: AdversaryStrategy, trials: u64, seed: u64) -> Self {
        Self { m, n, task, adversary, trials, seed, message: MessageSource::Uniform, readout_flip: 0.0 }
    }

    pub fn validate(&self) -> Result<()> {
        if self.m == 0 || self.n == 0 {
            return Err(Error::DegenerateParameters { m: self.m, n: self.n });
        }
        if self.trials == 0 {
            return Err(Error::InvalidConfig("trials must be at least 1".into()));
        }
        if let MessageSource::Fixed(msg) = &self.message {
            if msg.len() != self.m {
                return Err(Error::LengthMismatch { expected: self.m, actual: msg.len() });
            }
        }
        if !(0.0..=1.0).contains(&self.readout_flip) {
            return Err(Error::InvalidConfig(format!("readout flip {} outside [0, 1]", self.readout_flip)));
        }
        self.adversary.validate(self.m + self.n)
    }

    fn draw_message<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<Message> {
        match &self.message {
            MessageSource::Fixed(msg) => Ok(msg.clone()),
            MessageSource::Uniform => Message::random(self.m, rng),
        }
    }

    /// Closed-form acceptance probability, where one is known.
    pub fn analytic_cert(&self) -> Option<f64> {
        if self.readout_flip != 0.0 {
            return None;
        }
        match &self.adversary {
            AdversaryStrategy::NoOp => Some(1.0),
            AdversaryStrategy::RectilinearSample { r, choice: PositionChoice::UniformWithoutReplacement } => {
                bounds::cert_exact(self.m, self.n, *r).ok()
            }
            AdversaryStrategy::FirstBit => bounds::firstbit_cert(self.m, self.n).ok(),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ExperimentKind {
    Cert,
    Discr,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentReport {
    pub kind: ExperimentKind,
    pub m: usize,
    pub n: usize,
    pub task: Task,
    pub adversary: String,
    pub r: usize,
    pub seed: u64,
    pub trials: u64,
    /// Successes behind `estimate` (accepted runs for CERT, correct
    /// accepted guesses for DISCR).
    pub successes: u64,
    pub estimate: f64,
    pub ci95_halfwidth: f64,
    pub analytic_reference: Option<f64>,
    pub conditioned_on: Option<String>,
    /// DISCR only: `P[correct guess]` without post-selection.
    pub unconditioned: Option<f64>,
    /// DISCR only: empirical `P[CERT]`.
    pub cert_rate: Option<f64>,
    /// DISCR only: `P[CERT] · (P[DISCR | CERT] − 1/2)`.
    pub product: Option<f64>,
}

impl ExperimentReport {
    pub const CSV_HEADER: &'static str = "m,n,task,adversary,r,trials,estimate,ci95,analytic,product";

    fn base(kind: ExperimentKind, config: &ExperimentConfig) -> Self {
        Self {
            kind,
            m: config.m,
            n: config.n,
            task: config.task,
            adversary: config.adversary.label().to_owned(),
            r: config.adversary.attacked(),
            seed: config.seed,
            trials: config.trials,
            successes: 0,
            estimate: 0.0,
            ci95_halfwidth: 0.0,
            analytic_reference: None,
            conditioned_on: None,
            unconditioned: None,
            cert_rate: None,
            product: None,
        }
    }

    /// Discrimination advantage `estimate − 1/2` (DISCR reports).
    pub fn advantage(&self) -> f64 {
        self.estimate - 0.5
    }

    /// Binomial standard error of the estimate.
    pub fn sigma(&self) -> f64 {
        let n = match self.kind {
            ExperimentKind::Cert => self.trials as f64,
            ExperimentKind::Discr => (self.cert_rate.unwrap_or(1.0) * self.trials as f64).max(1.0),
        };
        (self.estimate * (1.0 - self.estimate) / n).sqrt()
    }

    pub fn to_csv(&self) -> String {
        let opt = |v: Option<f64>| v.map(|x| format!("{x:.10}")).unwrap_or_default();
        format!(
            "{},{},{},{},{},{},{:.10},{:.10},{},{}",
            self.m,
            self.n,
            self.task,
            self.adversary,
            self.r,
            self.trials,
            self.estimate,
            self.ci95_halfwidth,
            opt(self.analytic_reference),
            opt(self.product)
        )
    }

    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("report serializes")
    }
}

/// Half-width of the 95% Wilson score interval for `successes / trials`.
pub fn wilson_halfwidth(successes: u64, trials: u64) -> f64 {
    if trials == 0 {
        return f64::NAN;
    }
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = Z95 * Z95;
    Z95 / (1.0 + z2 / n) * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt()
}

/// Estimates `P[CERT]`.
pub fn run_cert(config: &ExperimentConfig) -> Result<ExperimentReport> {
    config.validate()?;
    let accepted = (0..config.trials)
        .into_par_iter()
        .map(|i| -> Result<u64> {
            let mut rng = trial_stream(config.seed, i);
            let msg = config.draw_message(&mut rng)?;
            let run =
                run_protocol::<f64, _>(&msg, config.n, config.task, &config.adversary, config.readout_flip, &mut rng)?;
            Ok(run.verdict.accepted as u64)
        })
        .try_reduce(|| 0, |a, b| Ok(a + b))?;

    let mut report = ExperimentReport::base(ExperimentKind::Cert, config);
    report.successes = accepted;
    report.estimate = accepted as f64 / config.trials as f64;
    report.ci95_halfwidth = wilson_halfwidth(accepted, config.trials);
    report.analytic_reference = config.analytic_cert();
    Ok(report)
}

#[derive(Debug, Clone, Copy, Default)]
struct DiscrCounts {
    accepted: u64,
    correct: u64,
    correct_and_accepted: u64,
}

impl DiscrCounts {
    fn merge(self, o: Self) -> Self {
        Self {
            accepted: self.accepted + o.accepted,
            correct: self.correct + o.correct,
            correct_and_accepted: self.correct_and_accepted + o.correct_and_accepted,
        }
    }
}

/// Plays the discrimination game: each trial runs the protocol on `legit`
/// or on a fresh uniform dummy (fair coin), and the adversary's guess rule
/// maps its record to a guess. `estimate` is `P[correct | CERT]`.
pub fn run_discr(config: &ExperimentConfig, legit: &Message) -> Result<ExperimentReport> {
    config.validate()?;
    if legit.len() != config.m {
        return Err(Error::LengthMismatch { expected: config.m, actual: legit.len() });
    }
    let rule = config.adversary.guess_rule();
    let counts = (0..config.trials)
        .into_par_iter()
        .map(|i| -> Result<DiscrCounts> {
            let mut rng = trial_stream(config.seed, i);
            let use_legit: bool = rng.gen();
            let msg = if use_legit { legit.clone() } else { Message::random(config.m, &mut rng)? };
            let run =
                run_protocol::<f64, _>(&msg, config.n, config.task, &config.adversary, config.readout_flip, &mut rng)?;
            let correct = rule.guess(&run.record, legit, &mut rng) == use_legit;
            let accepted = run.verdict.accepted;
            Ok(DiscrCounts {
                accepted: accepted as u64,
                correct: correct as u64,
                correct_and_accepted: (accepted && correct) as u64,
            })
        })
        .try_reduce(DiscrCounts::default, |a, b| Ok(a.merge(b)))?;

    if counts.accepted == 0 {
        return Err(Error::NoAcceptedTrials);
    }
    let trials = config.trials as f64;
    let conditional = counts.correct_and_accepted as f64 / counts.accepted as f64;
    let cert_rate = counts.accepted as f64 / trials;

    let mut report = ExperimentReport::base(ExperimentKind::Discr, config);
    report.successes = counts.correct_and_accepted;
    report.estimate = conditional;
    report.ci95_halfwidth = wilson_halfwidth(counts.correct_and_accepted, counts.accepted);
    report.conditioned_on = Some("CERT".into());
    report.unconditioned = Some(counts.correct as f64 / trials);
    report.cert_rate = Some(cert_rate);
    report.product = Some(cert_rate * (conditional - 0.5));
    report.analytic_reference = match &config.adversary {
        _ if config.readout_flip != 0.0 => None,
        AdversaryStrategy::NoOp => Some(0.5),
        AdversaryStrategy::FirstBit => bounds::firstbit_conditional_success(config.m, config.n).ok(),
        _ => None,
    };
    Ok(report)
}

/// Runs every configuration with a seed derived from `master_seed` and the
/// configuration's index. Failures are reported in place.
pub fn sweep(master_seed: u64, configs: &[ExperimentConfig]) -> Vec<Result<ExperimentReport>> {
    configs
        .iter()
        .enumerate()
        .map(|(i, c)| {
            let config = ExperimentConfig { seed: derive_seed(master_seed, i as u64), ..c.clone() };
            run_cert(&config)
        })
        .collect()
}

/// Configurations for a uniform-sampling grid over `rs` at fixed `(m, n)`.
pub fn sample_grid(m: usize, n: usize, task: Task, rs: &[usize], trials: u64) -> Vec<ExperimentConfig> {
    rs.iter().map(|&r| ExperimentConfig::new(m, n, task, AdversaryStrategy::sample(r), trials, 0)).collect()
}

/// Log-log fit of a security product against `n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DecayFit {
    /// Slope of `ln(product)` against `ln(n)`.
    pub slope: f64,
    pub exponent: f64,
    /// Whether the product falls off faster than `n^{-exponent}`.
    pub decays_faster: bool,
}

/// Least-squares slope of `ln product` vs `ln n`; non-positive products
/// count as fully decayed.
pub fn fit_decay(points: &[(usize, f64)], exponent: f64) -> Result<DecayFit> {
    if points.len() < 2 {
        return Err(Error::InvalidConfig("need at least two points to fit a decay".into()));
    }
    if points.iter().any(|&(_, p)| p <= 0.0) {
        return Ok(DecayFit { slope: f64::NEG_INFINITY, exponent, decays_faster: true });
    }
    let xs: Vec<f64> = points.iter().map(|&(n, _)| (n as f64).ln()).collect();
    let ys: Vec<f64> = points.iter().map(|&(_, p)| p.ln()).collect();
    let k = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / k;
    let my = ys.iter().sum::<f64>() / k;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidConfig("decay fit needs distinct n values".into()));
    }
    let slope = sxy / sxx;
    Ok(DecayFit { slope, exponent, decays_faster: slope < -exponent })
}
