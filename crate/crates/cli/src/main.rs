use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};

use tensorltc::analysis::analyze;
use tensorltc::decoding::{decode_c2, error_budget, DecoderConfig};
use tensorltc::harness::{
    configure_threads, distance_estimate, run_experiment, ExperimentSpec, Family,
};
use tensorltc::testing::{
    composed_bound, theorem_bound, AxesMode, ComposedTester, PlaneTester, RejectionMode,
    RejectionProbability,
};
use tensorltc::{Error, LinearCode, PrimeField, Rational, TensorCode, TensorWord};

const EXIT_USAGE: u8 = 1;
const EXIT_CAPACITY: u8 = 2;
const EXIT_DECODE: u8 = 3;
const EXIT_BOUND: u8 = 4;

#[derive(Parser)]
#[command(
    name = "tensorltc",
    version,
    about = "Tensor-product codes: testing, robustness and decoding"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print n^m, k^m, d^m, rate and relative distance of C^m.
    Params {
        #[command(flatten)]
        code: CodeArgs,
        #[arg(long)]
        m: usize,
    },
    /// Encode a message file (`p m k` then k^m entries) into a tensor file.
    Encode {
        #[command(flatten)]
        code: CodeArgs,
        #[arg(long)]
        message: PathBuf,
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// Print whether a tensor file is a codeword of C^m.
    Membership {
        #[command(flatten)]
        code: CodeArgs,
        #[arg(long)]
        word: PathBuf,
    },
    /// Run the composed tester on a tensor file.
    Test {
        #[command(flatten)]
        code: CodeArgs,
        #[arg(long)]
        word: PathBuf,
        #[arg(long, default_value_t = 10_000)]
        trials: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = Axes::M)]
        axes: Axes,
        /// Enumerate every tester path instead of sampling.
        #[arg(long)]
        exact: bool,
    },
    /// Print the exact plane-tester robustness of a tensor file.
    Robustness {
        #[command(flatten)]
        code: CodeArgs,
        #[arg(long)]
        word: PathBuf,
        #[arg(long, value_enum, default_value_t = Axes::M)]
        axes: Axes,
    },
    /// Emit the inconsistency report of a tensor file as JSON.
    Analyze {
        #[command(flatten)]
        code: CodeArgs,
        #[arg(long)]
        word: PathBuf,
    },
    /// Decode an n x n tensor file with the C (x) C decoder.
    Decode {
        #[command(flatten)]
        code: CodeArgs,
        #[arg(long)]
        word: PathBuf,
        #[arg(long, short)]
        output: Option<PathBuf>,
        /// Write the decoder trace as JSON.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Run an experiment spec and write CSV or JSON.
    Experiment {
        #[arg(long)]
        spec: PathBuf,
        /// Overrides the spec's output path.
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct CodeArgs {
    /// parity:N, repetition:N, hamming74 or random:N,K,P,SEED
    #[arg(long)]
    family: Option<String>,
    /// Code file: `p n k` then k generator rows.
    #[arg(long)]
    code: Option<PathBuf>,
}

impl CodeArgs {
    fn load(&self) -> anyhow::Result<LinearCode> {
        if let Some(f) = &self.family {
            return Ok(f.parse::<Family>()?.build()?);
        }
        let path = self.code.as_ref().expect("clap enforces one source");
        let parsed = LinearCode::parse(&read(path)?)?;
        if let Some(w) = parsed.warning {
            eprintln!("warning: {}: {w}", path.display());
        }
        Ok(parsed.code)
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Axes {
    #[value(name = "m")]
    M,
    #[value(name = "3")]
    Three,
}

impl From<Axes> for AxesMode {
    fn from(a: Axes) -> Self {
        match a {
            Axes::M => AxesMode::All,
            Axes::Three => AxesMode::First3,
        }
    }
}

fn read(path: &Path) -> anyhow::Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn write_or_print(path: Option<&Path>, text: &str) -> anyhow::Result<()> {
    match path {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn load_word(path: &Path, base: &LinearCode) -> anyhow::Result<(TensorWord, TensorCode)> {
    let word =
        TensorWord::parse(&read(path)?).with_context(|| format!("parsing {}", path.display()))?;
    if word.field() != base.field() || word.side() != base.n() {
        bail!(
            "{} is a tensor over GF({}) with side {}, the code is over GF({}) with length {}",
            path.display(),
            word.field().modulus(),
            word.side(),
            base.field().modulus(),
            base.n()
        );
    }
    let code = TensorCode::new(base.clone(), word.axes())?;
    Ok((word, code))
}

// `p m k` followed by k^m entries.
fn parse_message(text: &str) -> anyhow::Result<(PrimeField, usize, usize, Vec<u32>)> {
    let nums: Vec<u64> = text
        .lines()
        .map(|l| l.split('#').next().unwrap_or(""))
        .flat_map(str::split_whitespace)
        .map(|t| {
            t.parse::<u64>()
                .map_err(|_| anyhow!("not a nonnegative integer: `{t}`"))
        })
        .collect::<anyhow::Result<_>>()?;
    let [p, m, k, ref entries @ ..] = nums[..] else {
        bail!("message file must start with `p m k`");
    };
    let field = PrimeField::new(u32::try_from(p)?)?;
    let (m, k) = (m as usize, k as usize);
    let expected = k
        .checked_pow(m as u32)
        .ok_or_else(|| anyhow!("k^m overflows"))?;
    if entries.len() != expected {
        bail!(
            "message has {} entries, expected k^m = {expected}",
            entries.len()
        );
    }
    if let Some(v) = entries.iter().find(|&&v| v >= p) {
        bail!("message entry {v} is not a residue modulo {p}");
    }
    let msg = entries.iter().map(|&v| v as u32).collect();
    Ok((field, m, k, msg))
}

fn ratio_text(r: Rational) -> String {
    format!("{r} (~{:.6})", *r.numer() as f64 / *r.denom() as f64)
}

fn run(cli: Cli) -> anyhow::Result<u8> {
    match cli.command {
        Command::Params { code, m } => {
            let t = TensorCode::new(code.load()?, m)?;
            println!("{}", t.params()?);
        }
        Command::Encode {
            code,
            message,
            output,
        } => {
            let base = code.load()?;
            let (field, m, k, msg) = parse_message(&read(&message)?)?;
            if field != base.field() || k != base.k() {
                bail!(
                    "message is for k = {k} over GF({}), the code has k = {} over GF({})",
                    field.modulus(),
                    base.k(),
                    base.field().modulus()
                );
            }
            let word = TensorCode::new(base, m)?.encode(&msg)?;
            write_or_print(output.as_deref(), &word.to_text())?;
        }
        Command::Membership { code, word } => {
            let (w, t) = load_word(&word, &code.load()?)?;
            println!("{}", t.contains(&w)?);
        }
        Command::Test {
            code,
            word,
            trials,
            seed,
            axes,
            exact,
        } => {
            let (w, t) = load_word(&word, &code.load()?)?;
            let tester = ComposedTester::new(t.clone())?.with_axes(axes.into());
            let mode = if exact {
                RejectionMode::Exact
            } else {
                RejectionMode::Sampled { trials, seed }
            };
            let bound = composed_bound(&t)?;
            match tester.rejection_probability(&w, mode)? {
                RejectionProbability::Exact(r) => println!("rejection={}", ratio_text(r)),
                RejectionProbability::Sampled(s) => println!(
                    "rejection={:.6} std_error={:.6} rejections={} trials={} seed={}",
                    s.estimate, s.std_error, s.rejections, s.trials, s.seed
                ),
            }
            println!("composed_bound={}", ratio_text(bound));
        }
        Command::Robustness { code, word, axes } => {
            let (w, t) = load_word(&word, &code.load()?)?;
            let rho = PlaneTester::new(t.clone())?
                .with_axes(axes.into())
                .robustness_exact(&w)?;
            let bound = theorem_bound(&t)?;
            let (mode, dist) = distance_estimate(&w, &t)?;
            println!("rho={}", ratio_text(rho));
            println!("distance={} ({mode})", ratio_text(dist));
            println!("theorem_bound={}", ratio_text(bound));
            if dist == Rational::from_integer(0) {
                println!("ratio=undefined");
            } else {
                println!("ratio={}", ratio_text(rho / dist));
            }
            if rho < bound * dist {
                eprintln!("error: robustness is below theorem_bound * distance");
                return Ok(EXIT_BOUND);
            }
        }
        Command::Analyze { code, word } => {
            let (w, t) = load_word(&word, &code.load()?)?;
            let report = analyze(&w, &t)?;
            println!("{}", serde_json::to_string_pretty(&report.to_json())?);
        }
        Command::Decode {
            code,
            word,
            output,
            trace,
        } => {
            let base = code.load()?;
            let (w, _) = load_word(&word, &base)?;
            let cfg = DecoderConfig::new(base)?;
            eprintln!("error budget: {}", error_budget(&cfg));
            let report = decode_c2(&w, &cfg)?;
            if let Some(path) = trace {
                let text = serde_json::to_string_pretty(&report.to_json())? + "\n";
                fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
            }
            match &report.result {
                Ok(c) => write_or_print(output.as_deref(), &c.to_text())?,
                Err(e) => {
                    eprintln!("decode failure: {e}");
                    return Ok(EXIT_DECODE);
                }
            }
        }
        Command::Experiment { spec, output } => {
            let parsed = ExperimentSpec::parse(&read(&spec)?)?;
            let dir = spec.parent().unwrap_or(Path::new("."));
            let out = run_experiment(&parsed, dir)?;
            for w in &out.warnings {
                eprintln!("warning: {w}");
            }
            let target = output.or_else(|| parsed.output.as_ref().map(|o| dir.join(o)));
            write_or_print(target.as_deref(), &out.render())?;
            let violations = out.violations();
            if violations > 0 {
                eprintln!("error: {violations} rows violate their bound");
                return Ok(EXIT_BOUND);
            }
        }
    }
    Ok(0)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if let Err(e) = configure_threads() {
        eprintln!("error: {e}");
        return ExitCode::from(EXIT_USAGE);
    }
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            let capacity = e
                .chain()
                .any(|c| matches!(c.downcast_ref::<Error>(), Some(Error::Capacity(_))));
            ExitCode::from(if capacity { EXIT_CAPACITY } else { EXIT_USAGE })
        }
    }
}
