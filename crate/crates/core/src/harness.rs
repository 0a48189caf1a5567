//! Named code families, noise channels and seeded experiment sweeps.
//!
//! An [`ExperimentSpec`] fixes everything about a run. Trial `t` draws all of
//! its randomness from `derive_seed(seed, t)`, so the output does not depend
//! on how trials are scheduled across threads.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::code::LinearCode;
use crate::decoding::{decode_c2, error_budget, DecoderConfig};
use crate::error::{shape, Error, Result};
use crate::search::codebook_size;
use crate::tensor::{line_starts, PartialTensor, PlaneIndex, TensorCode, TensorWord};
use crate::testing::{
    composed_bound, theorem_bound, AxesMode, ComposedTester, PlaneTester, RejectionMode,
    RejectionProbability,
};
use crate::{derive_seed, Rational};

/// Environment variable capping the worker threads used for trials.
pub const THREADS_ENV: &str = "TENSORLTC_THREADS";

/// Sizes the global rayon pool from `TENSORLTC_THREADS` when it is set.
pub fn configure_threads() -> Result<()> {
    let Ok(raw) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let threads: usize = raw.trim().parse().ok().filter(|&t| t > 0).ok_or_else(|| {
        Error::Parse(format!(
            "{THREADS_ENV} must be a positive integer, got `{raw}`"
        ))
    })?;
    // A second call finds the pool already built; that is fine.
    let _ = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global();
    Ok(())
}

/// A built-in base code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    Parity(usize),
    Repetition(usize),
    Hamming74,
    Random {
        n: usize,
        k: usize,
        p: u32,
        seed: u64,
    },
}

impl Family {
    pub fn build(self) -> Result<LinearCode> {
        match self {
            Family::Parity(n) => LinearCode::parity(n),
            Family::Repetition(n) => LinearCode::repetition(n),
            Family::Hamming74 => Ok(LinearCode::hamming74()),
            Family::Random { n, k, p, seed } => LinearCode::random(n, k, p, seed),
        }
    }
}

impl FromStr for Family {
    type Err = Error;

    /// `parity:N`, `repetition:N`, `hamming74` or `random:N,K,P,SEED`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Parse(format!("unknown code family `{s}`"));
        let (name, args) = s.split_once(':').unwrap_or((s, ""));
        let nums: Vec<u64> = if args.is_empty() {
            Vec::new()
        } else {
            args.split(',')
                .map(|a| a.trim().parse::<u64>().map_err(|_| bad()))
                .collect::<Result<_>>()?
        };
        match (name, nums.as_slice()) {
            ("parity", [n]) => Ok(Family::Parity(*n as usize)),
            ("repetition", [n]) => Ok(Family::Repetition(*n as usize)),
            ("hamming74", []) => Ok(Family::Hamming74),
            ("random", [n, k, p, seed]) => Ok(Family::Random {
                n: *n as usize,
                k: *k as usize,
                p: u32::try_from(*p).map_err(|_| bad())?,
                seed: *seed,
            }),
            _ => Err(bad()),
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Family::Parity(n) => write!(f, "parity:{n}"),
            Family::Repetition(n) => write!(f, "repetition:{n}"),
            Family::Hamming74 => write!(f, "hamming74"),
            Family::Random { n, k, p, seed } => write!(f, "random:{n},{k},{p},{seed}"),
        }
    }
}

/// Where the base code of an experiment comes from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CodeSource {
    Family(String),
    /// Path to a code file, relative to the spec file's directory.
    File(String),
}

impl CodeSource {
    /// The code and any warning raised while reading it.
    pub fn load(&self, base_dir: &Path) -> Result<(LinearCode, Option<String>)> {
        match self {
            CodeSource::Family(name) => Ok((name.parse::<Family>()?.build()?, None)),
            CodeSource::File(path) => {
                let text = std::fs::read_to_string(base_dir.join(path))
                    .map_err(|e| Error::Parse(format!("cannot read {path}: {e}")))?;
                let parsed = LinearCode::parse(&text)?;
                Ok((parsed.code, parsed.warning))
            }
        }
    }
}

/// Noise applied to a tensor word.
#[derive(Debug, Clone, PartialEq)]
pub enum Channel {
    /// Each entry independently replaced with probability `rate`.
    Bernoulli {
        rate: f64,
        seed: u64,
    },
    /// Exactly `t` distinct entries replaced.
    ExactErrors {
        t: usize,
        seed: u64,
    },
    ErasePlanes(Vec<PlaneIndex>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ChannelOutput {
    Word(TensorWord),
    Partial(PartialTensor),
}

pub fn apply_channel(word: &TensorWord, channel: &Channel) -> Result<ChannelOutput> {
    match channel {
        Channel::Bernoulli { rate, seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            bernoulli(word, *rate, &mut rng).map(ChannelOutput::Word)
        }
        Channel::ExactErrors { t, seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            exact_errors(word, *t, &mut rng).map(ChannelOutput::Word)
        }
        Channel::ErasePlanes(planes) => {
            let mut partial = PartialTensor::from_word(word);
            partial.erase_planes(planes)?;
            Ok(ChannelOutput::Partial(partial))
        }
    }
}

// A uniformly random value different from `v`.
fn other_value<R: Rng + ?Sized>(v: u32, p: u32, rng: &mut R) -> u32 {
    (v + rng.gen_range(1..p)) % p
}

pub fn bernoulli<R: Rng + ?Sized>(word: &TensorWord, rate: f64, rng: &mut R) -> Result<TensorWord> {
    if !(0.0..=1.0).contains(&rate) {
        return Err(shape(format!("error rate {rate} is outside [0, 1]")));
    }
    let p = word.field().modulus();
    let mut out = word.clone();
    for v in out.data_mut() {
        if rng.gen_bool(rate) {
            *v = other_value(*v, p, rng);
        }
    }
    Ok(out)
}

pub fn exact_errors<R: Rng + ?Sized>(
    word: &TensorWord,
    t: usize,
    rng: &mut R,
) -> Result<TensorWord> {
    if t > word.len() {
        return Err(shape(format!(
            "cannot place {t} errors in {} entries",
            word.len()
        )));
    }
    let p = word.field().modulus();
    let mut out = word.clone();
    let data = out.data_mut();
    for pos in sample(rng, data.len(), t) {
        data[pos] = other_value(data[pos], p, rng);
    }
    Ok(out)
}

fn random_codeword<R: Rng + ?Sized>(code: &TensorCode, rng: &mut R) -> Result<TensorWord> {
    let p = code.field().modulus();
    let msg: Vec<u32> = (0..code.message_length())
        .map(|_| rng.gen_range(0..p))
        .collect();
    code.encode(&msg)
}

fn random_word<R: Rng + ?Sized>(code: &TensorCode, rng: &mut R) -> Result<TensorWord> {
    let p = code.field().modulus();
    let data = (0..code.blocklength())
        .map(|_| rng.gen_range(0..p))
        .collect();
    TensorWord::new(code.field(), code.axes(), code.side(), data)
}

/// A codeword with `planes` distinct random planes copied from a second
/// codeword: two consistent regions that disagree along the planted planes.
pub fn planted<R: Rng + ?Sized>(
    code: &TensorCode,
    planes: usize,
    rng: &mut R,
) -> Result<TensorWord> {
    let (m, n) = (code.axes(), code.side());
    if planes > m * n {
        return Err(shape(format!("cannot plant {planes} of {} planes", m * n)));
    }
    let mut word = random_codeword(code, rng)?;
    let donor = random_codeword(code, rng)?;
    for pick in sample(rng, m * n, planes) {
        for pos in PlaneIndex::new(pick / n, pick % n).positions(m, n) {
            word.data_mut()[pos] = donor.data()[pos];
        }
    }
    Ok(word)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "mode")]
pub enum WordMode {
    /// Uniformly random tensors.
    Random,
    /// A random codeword with exactly `t` entries changed.
    Errors { t: usize },
    /// A random codeword passed through a Bernoulli channel.
    Bernoulli { rate: f64 },
    /// See [`planted`].
    Planted { planes: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Measure {
    /// Exact plane-tester robustness against `delta^m / (2 m^2)`.
    Robustness,
    /// Composed-tester rejection probability against the composed bound.
    /// `trials = 0` enumerates every tester path.
    Rejection {
        #[serde(default)]
        trials: u64,
    },
    /// `C (x) C` decoding (requires `m = 2`).
    Decode,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub code: CodeSource,
    pub m: usize,
    pub words: WordMode,
    pub measure: Measure,
    pub trials: u64,
    pub seed: u64,
    #[serde(default)]
    pub axes: AxesMode,
    #[serde(default)]
    pub format: OutputFormat,
    /// Output path, relative to the spec file's directory. Standard output when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<String>,
}

impl ExperimentSpec {
    pub fn parse(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(format!("experiment spec: {e}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DistanceMode {
    /// Brute-force distance to the code.
    Exact,
    /// Largest number of non-codeword lines along one axis, over `n^m`.
    LowerBound,
}

impl fmt::Display for DistanceMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DistanceMode::Exact => "exact",
            DistanceMode::LowerBound => "lower_bound",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResultRow {
    pub trial: u64,
    pub distance_mode: DistanceMode,
    /// Relative distance to `C^m`.
    pub distance: String,
    pub statistic: String,
    /// Standard error of a sampled statistic.
    pub std_error: Option<String>,
    pub bound: String,
    pub bound_satisfied: bool,
}

pub const CSV_HEADER: &str =
    "trial,distance_mode,distance,statistic,std_error,bound,bound_satisfied";

#[derive(Debug, Clone)]
pub struct ExperimentOutput {
    pub spec: ExperimentSpec,
    pub rows: Vec<ResultRow>,
    pub warnings: Vec<String>,
}

impl ExperimentOutput {
    pub fn violations(&self) -> usize {
        self.rows.iter().filter(|r| !r.bound_satisfied).count()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("schema=1\n");
        out.push_str(CSV_HEADER);
        out.push('\n');
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                r.trial,
                r.distance_mode,
                r.distance,
                r.statistic,
                r.std_error.as_deref().unwrap_or(""),
                r.bound,
                r.bound_satisfied
            ));
        }
        out
    }

    pub fn to_json(&self) -> String {
        let doc = json!({ "schema": 1, "spec": self.spec, "rows": self.rows });
        let mut s = serde_json::to_string_pretty(&doc).expect("rows serialize");
        s.push('\n');
        s
    }

    pub fn render(&self) -> String {
        match self.spec.format {
            OutputFormat::Csv => self.to_csv(),
            OutputFormat::Json => self.to_json(),
        }
    }
}

/// Relative distance of `word` to `code`: exact when the codebook can be
/// enumerated, otherwise the line-counting lower bound.
pub fn distance_estimate(word: &TensorWord, code: &TensorCode) -> Result<(DistanceMode, Rational)> {
    let p = code.field().modulus();
    if codebook_size(p, code.message_length()).is_some() {
        let flat = code.flat_code()?;
        return Ok((
            DistanceMode::Exact,
            flat.relative_distance_to_code(word.data())?,
        ));
    }
    let (m, n) = (code.axes(), code.side());
    let mut best = 0;
    for axis in 0..m {
        let mut bad = 0;
        for (start, step) in line_starts(m, n, axis) {
            let line: Vec<u32> = (0..n).map(|i| word.data()[start + i * step]).collect();
            if !code.base().is_codeword(&line)? {
                bad += 1;
            }
        }
        best = best.max(bad);
    }
    Ok((
        DistanceMode::LowerBound,
        Rational::new(best as i128, word.len() as i128),
    ))
}

struct Prepared {
    spec: ExperimentSpec,
    code: TensorCode,
    bound: Rational,
    decoder: Option<DecoderConfig>,
}

fn prepare(spec: &ExperimentSpec, base_dir: &Path) -> Result<(Prepared, Vec<String>)> {
    let (base, warning) = spec.code.load(base_dir)?;
    let code = TensorCode::new(base.clone(), spec.m)?;
    let mut warnings: Vec<String> = warning.into_iter().collect();
    match spec.words {
        WordMode::Errors { t } if t > code.blocklength() => {
            return Err(shape(format!(
                "cannot place {t} errors in {} entries",
                code.blocklength()
            )))
        }
        WordMode::Bernoulli { rate } if !(0.0..=1.0).contains(&rate) => {
            return Err(shape(format!("error rate {rate} is outside [0, 1]")))
        }
        WordMode::Planted { planes } if planes > spec.m * code.side() => {
            return Err(shape(format!("cannot plant {planes} planes")))
        }
        _ => {}
    }
    let mut decoder = None;
    let bound = match spec.measure {
        Measure::Robustness => {
            PlaneTester::new(code.clone())?;
            // Fail on the enumeration cap now rather than inside a trial.
            code.lower()?.flat_code()?.minimum_distance()?;
            theorem_bound(&code)?
        }
        Measure::Rejection { trials } => {
            let tester = ComposedTester::new(code.clone())?.with_axes(spec.axes);
            if trials == 0
                && tester
                    .path_count()
                    .is_none_or(|p| p > crate::testing::MAX_EXACT_PATHS)
            {
                return Err(Error::Capacity(
                    "too many tester paths for exact rejection".into(),
                ));
            }
            composed_bound(&code)?
        }
        Measure::Decode => {
            if spec.m != 2 {
                return Err(shape("the decode measure needs m = 2"));
            }
            let cfg = DecoderConfig::new(base)?;
            let budget = error_budget(&cfg);
            decoder = Some(cfg);
            Rational::from_integer(budget as i128)
        }
    };
    if codebook_size(code.field().modulus(), code.message_length()).is_none() {
        warnings.push(format!(
            "C^{} is too large to enumerate; distances are reported as lower bounds",
            spec.m
        ));
    }
    Ok((
        Prepared {
            spec: spec.clone(),
            code,
            bound,
            decoder,
        },
        warnings,
    ))
}

fn run_trial(prep: &Prepared, trial: u64) -> Result<ResultRow> {
    let spec = &prep.spec;
    let code = &prep.code;
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(spec.seed, trial));
    let (word, origin, injected) = match spec.words {
        WordMode::Random => (random_word(code, &mut rng)?, None, None),
        WordMode::Errors { t } => {
            let c = random_codeword(code, &mut rng)?;
            (exact_errors(&c, t, &mut rng)?, Some(c), Some(t))
        }
        WordMode::Bernoulli { rate } => {
            let c = random_codeword(code, &mut rng)?;
            let w = bernoulli(&c, rate, &mut rng)?;
            let flips = crate::code::hamming_distance(w.data(), c.data());
            (w, Some(c), Some(flips))
        }
        WordMode::Planted { planes } => (planted(code, planes, &mut rng)?, None, None),
    };
    let (distance_mode, distance) = distance_estimate(&word, code)?;
    let mut row = ResultRow {
        trial,
        distance_mode,
        distance: distance.to_string(),
        statistic: String::new(),
        std_error: None,
        bound: prep.bound.to_string(),
        bound_satisfied: true,
    };
    match spec.measure {
        Measure::Robustness => {
            let tester = PlaneTester::new(code.clone())?.with_axes(spec.axes);
            let rho = tester.robustness_exact(&word)?;
            row.statistic = rho.to_string();
            // Against a lower bound on the distance a failure is still a violation.
            row.bound_satisfied = rho >= prep.bound * distance;
        }
        Measure::Rejection { trials } => {
            let tester = ComposedTester::new(code.clone())?.with_axes(spec.axes);
            let mode = if trials == 0 {
                RejectionMode::Exact
            } else {
                RejectionMode::Sampled {
                    trials,
                    seed: rng.gen(),
                }
            };
            let target = prep.bound * distance;
            let target = *target.numer() as f64 / *target.denom() as f64;
            match tester.rejection_probability(&word, mode)? {
                RejectionProbability::Exact(r) => {
                    row.statistic = r.to_string();
                    row.bound_satisfied = r >= prep.bound * distance;
                }
                RejectionProbability::Sampled(s) => {
                    row.statistic = format!("{:.6}", s.estimate);
                    row.std_error = Some(format!("{:.6}", s.std_error));
                    row.bound_satisfied = s.estimate + 3.0 * s.std_error >= target;
                }
            }
        }
        Measure::Decode => {
            let cfg = prep.decoder.as_ref().expect("decoder prepared");
            let report = decode_c2(&word, cfg)?;
            let success = match (&report.result, &origin) {
                (Ok(c), Some(o)) => c == o,
                (Ok(_), None) => true,
                (Err(_), _) => false,
            };
            row.statistic = u8::from(success).to_string();
            let guaranteed = injected.is_some_and(|t| t as u64 <= error_budget(cfg));
            row.bound_satisfied = success || !guaranteed;
        }
    }
    Ok(row)
}

/// Runs every trial of `spec`. Relative paths resolve against `base_dir`.
pub fn run_experiment(spec: &ExperimentSpec, base_dir: &Path) -> Result<ExperimentOutput> {
    if spec.trials == 0 {
        return Err(shape("an experiment needs at least one trial"));
    }
    let (prep, warnings) = prepare(spec, base_dir)?;
    let rows = (0..spec.trials)
        .into_par_iter()
        .map(|t| run_trial(&prep, t))
        .collect::<Result<Vec<_>>>()?;
    Ok(ExperimentOutput {
        spec: spec.clone(),
        rows,
        warnings,
    })
}
