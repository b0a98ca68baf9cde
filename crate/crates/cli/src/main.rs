use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use curvestat::clt::{self, CltThresholds, MonteCarloConfig};
use curvestat::intersection::self_intersection_of_word;
use curvestat::markov::{self, SampleMode, SamplerConfig, RNG_ALGORITHM};
use curvestat::moments::limit_constants;
use curvestat::report::{ExactValue, RunManifest};
use curvestat::scalar::{decimal17, Scalar};
use curvestat::surface::{Notation, Surface, PRESETS};
use curvestat::words::{self, check_feasible};
use curvestat::{Error, ExactMarkov, Rational};

/// Environment variable naming a directory searched for surface files.
const SURFACE_DIR_ENV: &str = "CURVESTAT_SURFACE_DIR";

#[derive(Parser, Debug)]
#[command(name = "curvestat", version, about = "Self-intersection statistics of curves on surfaces with boundary")]
struct Cli {
    /// Inverse notation for words and surface files.
    #[arg(long, global = true, value_enum, default_value_t = NotationArg::Upper)]
    notation: NotationArg,
    /// Worker threads (default: available parallelism). Results do not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum NotationArg {
    Upper,
    Prime,
}

impl From<NotationArg> for Notation {
    fn from(n: NotationArg) -> Notation {
        match n {
            NotationArg::Upper => Notation::Upper,
            NotationArg::Prime => Notation::Prime,
        }
    }
}

#[derive(Args, Debug, Clone)]
struct SurfaceArg {
    /// Preset name or path to a two-line surface description.
    #[arg(long)]
    surface: String,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Surface inspection.
    Surface {
        #[command(subcommand)]
        action: SurfaceAction,
    },
    /// CSV of |S_n|, |J_n| and necklace counts for lengths 1..=n.
    Count {
        #[command(flatten)]
        surface: SurfaceArg,
        #[arg(long)]
        n: usize,
        /// Enumerate even above the exhaustive size limit.
        #[arg(long)]
        force: bool,
    },
    /// List all words of one length, one per line.
    Enumerate {
        #[command(flatten)]
        surface: SurfaceArg,
        #[arg(long)]
        n: usize,
        #[arg(long, value_enum, default_value_t = Kind::Necklaces)]
        kind: Kind,
        #[arg(long)]
        limit: Option<usize>,
        #[arg(long)]
        force: bool,
    },
    /// Self-intersection number of a cyclic word.
    Selfint {
        #[command(flatten)]
        surface: SurfaceArg,
        #[arg(long)]
        word: String,
        /// Also print the witness table (CSV i,j,k,kind).
        #[arg(long)]
        witnesses: bool,
        /// Evaluate the formula on a proper power anyway.
        #[arg(long)]
        force_nonprimitive: bool,
    },
    /// Random words from the uniform samplers, one per line.
    Sample {
        #[command(flatten)]
        surface: SurfaceArg,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 1)]
        count: usize,
        #[arg(long, default_value = "joinable")]
        mode: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// CSV of m, max |p_m - 1/g|, theta^m.
    Mixing {
        #[command(flatten)]
        surface: SurfaceArg,
        #[arg(long, default_value_t = 20)]
        m_max: u32,
    },
    /// Exact prefix total-variation distance against its bound (JSON).
    Tvbound {
        #[command(flatten)]
        surface: SurfaceArg,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        m: usize,
        #[arg(long)]
        force: bool,
    },
    /// Exact limit constants and moment tables (JSON).
    Moments {
        #[command(flatten)]
        surface: SurfaceArg,
        #[arg(long = "K", default_value_t = 50)]
        big_k: usize,
    },
    /// Exhaustive or Monte Carlo distribution of N with Gaussian-limit report.
    Clt {
        #[command(flatten)]
        surface: SurfaceArg,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        exhaustive: bool,
        #[arg(long)]
        force: bool,
        /// Report JSON path (default: stdout).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Histogram CSV path.
        #[arg(long)]
        histogram: Option<PathBuf>,
        #[arg(long)]
        k_max: Option<usize>,
        #[arg(long, default_value_t = 3.0)]
        mean_se: f64,
        #[arg(long, default_value_t = 0.10)]
        var_rel: f64,
        #[arg(long, default_value_t = 0.05)]
        ks: f64,
    },
    /// Monte Carlo convergence table over increasing n (CSV).
    Trend {
        #[command(flatten)]
        surface: SurfaceArg,
        #[arg(long, value_delimiter = ',', default_value = "25,50,100,200")]
        n_list: Vec<usize>,
        #[arg(long, default_value_t = 5_000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Subcommand, Debug)]
enum SurfaceAction {
    /// Trace the glued polygon: Euler characteristic, boundary, orientability.
    Analyze {
        #[command(flatten)]
        surface: SurfaceArg,
    },
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum Kind {
    Strings,
    Joinable,
    Necklaces,
}

enum Failure {
    Usage(String),
    Infeasible(String),
    Compute(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Infeasible(_) => Failure::Infeasible(e.to_string()),
            Error::NonPrimitive { period, len } => Failure::Compute(format!(
                "word is a proper power (period {period}, length {len}); rerun with --force-nonprimitive to evaluate anyway"
            )),
            Error::UnknownLetter(_)
            | Error::MalformedSurface(_)
            | Error::DuplicateLetter(_)
            | Error::ReferenceLength { .. }
            | Error::BadPairing(_)
            | Error::InvalidAlphabetSize(_)
            | Error::NotReduced(..)
            | Error::NotJoinable
            | Error::TooShort { .. }
            | Error::InvalidArgument(_) => Failure::Usage(e.to_string()),
            _ => Failure::Compute(e.to_string()),
        }
    }
}

type CliResult = Result<(), Failure>;

fn load_surface(name: &str, notation: Notation) -> Result<Surface, Failure> {
    if PRESETS.contains(&name) {
        return Ok(Surface::preset(name)?);
    }
    let mut candidates = vec![PathBuf::from(name)];
    if let Ok(dir) = std::env::var(SURFACE_DIR_ENV) {
        candidates.push(Path::new(&dir).join(name));
    }
    for path in candidates {
        if path.is_file() {
            let text = fs::read_to_string(&path)
                .map_err(|e| Failure::Usage(format!("cannot read {}: {e}", path.display())))?;
            let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
            return Ok(Surface::parse_description(&text, notation)?.with_name(stem));
        }
    }
    Err(Failure::Usage(format!(
        "surface `{name}` is neither a preset ({}) nor a readable file",
        PRESETS.join(", ")
    )))
}

fn print_json<T: Serialize>(value: &T) -> CliResult {
    let text = serde_json::to_string_pretty(value).map_err(|e| Failure::Compute(e.to_string()))?;
    println!("{text}");
    Ok(())
}

fn write_out(path: &Path, text: &str) -> CliResult {
    fs::write(path, text).map_err(|e| Failure::Usage(format!("cannot write {}: {e}", path.display())))
}

fn run(cli: Cli) -> CliResult {
    let notation: Notation = cli.notation.into();
    match cli.command {
        Command::Surface { action: SurfaceAction::Analyze { surface } } => {
            let s = load_surface(&surface.surface, notation)?;
            let info = s.analyze_gluing();
            print_json(&json!({
                "manifest": RunManifest::new("surface analyze", Some(&s)),
                "g": s.g(),
                "reference": s.format_word(s.reference(), notation),
                "chi_formula": s.euler_characteristic(),
                "gluing": info,
            }))
        }
        Command::Count { surface, n, force } => {
            let s = load_surface(&surface.surface, notation)?;
            if n == 0 {
                return Err(Failure::Usage("--n must be at least 1".into()));
            }
            println!("n,strings,joinable,necklaces,primitive_necklaces");
            for len in 1..=n {
                let strings = words::count_strings(&s, len)?;
                let joinable = words::count_joinable(&s, len)?;
                let (nk, prim) = if check_feasible(&s, len, force).is_ok() {
                    let c = words::necklace_census(&s, len);
                    if rayon_count_strings(&s, len) != strings.to_string() {
                        return Err(Failure::Compute(format!("string count mismatch at n = {len}")));
                    }
                    if c.fiber_sum.to_string() != joinable.to_string() {
                        return Err(Failure::Compute(format!("joinable count mismatch at n = {len}")));
                    }
                    (c.total.to_string(), c.primitive.to_string())
                } else {
                    (String::new(), String::new())
                };
                println!("{len},{strings},{joinable},{nk},{prim}");
            }
            Ok(())
        }
        Command::Enumerate { surface, n, kind, limit, force } => {
            let s = load_surface(&surface.surface, notation)?;
            if n == 0 {
                return Err(Failure::Usage("--n must be at least 1".into()));
            }
            check_feasible(&s, n, force)?;
            let limit = limit.unwrap_or(usize::MAX);
            let lines: Box<dyn Iterator<Item = String>> = match kind {
                Kind::Strings => Box::new(words::enumerate_strings(&s, n).map(|w| s.format_word(w.letters(), notation))),
                Kind::Joinable => Box::new(words::enumerate_joinable(&s, n).map(|w| s.format_word(w.letters(), notation))),
                Kind::Necklaces => Box::new(words::enumerate_necklaces(&s, n).map(|nk| nk.display(&s, notation))),
            };
            for line in lines.take(limit) {
                println!("{line}");
            }
            Ok(())
        }
        Command::Selfint { surface, word, witnesses, force_nonprimitive } => {
            let s = load_surface(&surface.surface, notation)?;
            let letters = s.parse_letters(&word, notation)?;
            let r = self_intersection_of_word(&s, &letters, force_nonprimitive)?;
            if r.forced_nonprimitive {
                eprintln!("warning: word is a proper power; the count is outside the formula's domain");
            }
            println!("{}", r.total);
            if witnesses {
                println!("i,j,k,kind");
                for w in &r.witnesses {
                    println!("{},{},{},{}", w.i, w.j, w.k, w.kind.as_str());
                }
            }
            Ok(())
        }
        Command::Sample { surface, n, count, mode, seed } => {
            let s = load_surface(&surface.surface, notation)?;
            let mode: SampleMode = mode.parse()?;
            let batch = markov::sample_batch(&s, n, count, SamplerConfig { seed, mode })?;
            for item in batch {
                println!("{}", s.format_word(item.letters(), notation));
            }
            Ok(())
        }
        Command::Mixing { surface, m_max } => {
            let s = load_surface(&surface.surface, notation)?;
            let model = ExactMarkov::new(&s);
            println!("m,max_dev,theta_m,max_dev_decimal,theta_m_decimal,bound_holds");
            for (m, dev, tm) in model.mixing_table(m_max) {
                println!(
                    "{m},{},{},{},{},{}",
                    dev.to_fraction_string(),
                    tm.to_fraction_string(),
                    decimal17(dev.to_f64_lossy()),
                    decimal17(tm.to_f64_lossy()),
                    dev <= tm
                );
            }
            Ok(())
        }
        Command::Tvbound { surface, n, m, force } => {
            let s = load_surface(&surface.surface, notation)?;
            check_feasible(&s, n, force)?;
            let r = markov::tv_prefix_bound(&s, n, m)?;
            print_json(&json!({
                "manifest": RunManifest::new("tvbound", Some(&s)).flag("n", n).flag("m", m),
                "n": n,
                "m": m,
                "exact_tv": ExactValue::new(&r.exact_tv),
                "bound": r.bound.as_ref().map(ExactValue::new),
                "vacuous": r.bound.is_none(),
                "holds": r.holds(),
            }))
        }
        Command::Moments { surface, big_k } => {
            let s = load_surface(&surface.surface, notation)?;
            let r = limit_constants::<Rational>(&s, big_k);
            if !r.consistent() {
                return Err(Failure::Compute("closed forms disagree".into()));
            }
            let table = |rows: &[(usize, Rational)]| -> Vec<serde_json::Value> {
                rows.iter()
                    .map(|(k, v)| json!({"k": k, "value": ExactValue::new(v)}))
                    .collect()
            };
            print_json(&json!({
                "manifest": RunManifest::new("moments", Some(&s)).flag("K", big_k),
                "g": r.g,
                "chi": r.chi,
                "kappa": ExactValue::new(&r.kappa),
                "kappa_from_mean": ExactValue::new(&r.kappa_from_mean),
                "sigma2": ExactValue::new(&r.sigma2),
                "sigma2_g_form": ExactValue::new(&r.sigma2_g_form),
                "sigma2_chi_form": ExactValue::new(&r.sigma2_chi_form),
                "sigma2_from_terms": ExactValue::new(&r.sigma2_from_terms),
                "sigma2_partial": {"K": r.partial_k, "value": ExactValue::new(&r.sigma2_partial)},
                "S_K_means": table(&r.s_k_means),
                "variance_terms": table(&r.var_terms),
                "gap_moments": {
                    "EJ": ExactValue::new(&r.gap_moments.ej),
                    "EJ2": ExactValue::new(&r.gap_moments.ej2),
                    "EJ3": ExactValue::new(&r.gap_moments.ej3),
                    "EJ4": ExactValue::new(&r.gap_moments.ej4),
                    "EJJ": ExactValue::new(&r.gap_moments.ejj),
                },
            }))
        }
        Command::Clt {
            surface,
            n,
            samples,
            seed,
            exhaustive,
            force,
            out,
            histogram,
            k_max,
            mean_se,
            var_rel,
            ks,
        } => {
            let s = load_surface(&surface.surface, notation)?;
            let manifest = RunManifest::new("clt", Some(&s)).flag("n", n).flag("exhaustive", exhaustive);
            let (text, hist) = if exhaustive {
                let h = clt::exhaustive_distribution(&s, n, force)?;
                let consts = limit_constants::<Rational>(&s, 2);
                let text = serde_json::to_string_pretty(&json!({
                    "manifest": manifest,
                    "n": n,
                    "total": h.total,
                    "excluded_nonprimitive": h.excluded_nonprimitive,
                    "mean": ExactValue::new(&h.exact_mean()),
                    "variance": ExactValue::new(&h.exact_variance()),
                    "kappa": ExactValue::new(&consts.kappa),
                    "sigma2": ExactValue::new(&consts.sigma2),
                    "histogram": h.bins,
                }))
                .map_err(|e| Failure::Compute(e.to_string()))?;
                (text, h)
            } else {
                let cfg = MonteCarloConfig {
                    seed,
                    k_max,
                    thresholds: CltThresholds { mean_se, var_rel, ks },
                    z_bin_width: 0.25,
                };
                let (h, report) = clt::montecarlo_distribution(&s, n, samples, &cfg)?;
                let manifest = manifest
                    .flag("samples", samples)
                    .flag("k_max", k_max.map_or("none".to_string(), |k| k.to_string()))
                    .seed(seed, RNG_ALGORITHM);
                let text = serde_json::to_string_pretty(&json!({
                    "manifest": manifest,
                    "report": report,
                    "passed": report.passed(),
                }))
                .map_err(|e| Failure::Compute(e.to_string()))?;
                (text, h)
            };
            match out {
                Some(p) => write_out(&p, &(text + "\n"))?,
                None => println!("{text}"),
            }
            if let Some(p) = histogram {
                write_out(&p, &hist.to_csv())?;
            }
            Ok(())
        }
        Command::Trend { surface, n_list, samples, seed } => {
            let s = load_surface(&surface.surface, notation)?;
            let rows = clt::trend_report(&s, &n_list, samples, seed)?;
            print!("{}", clt::trend_csv(&rows));
            Ok(())
        }
    }
}

fn rayon_count_strings(s: &Surface, n: usize) -> String {
    use rayon::prelude::*;
    let letters: Vec<_> = s.letters().collect();
    letters
        .into_par_iter()
        .map(|x| words::strings_with_first(s, n, x).count() as u64)
        .sum::<u64>()
        .to_string()
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if let Some(t) = cli.threads {
        if rayon::ThreadPoolBuilder::new().num_threads(t.max(1)).build_global().is_err() {
            eprintln!("error: could not configure {t} worker threads");
            return ExitCode::from(1);
        }
    }
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
        Err(Failure::Infeasible(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Compute(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(3)
        }
    }
}
