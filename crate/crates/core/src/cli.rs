//! The `fmm` command line.
//!
//! Exit codes: 0 success, 1 a checked property failed, 2 usage or input error.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::accuracy::{complexity_constant, complexity_constant_alt, growth_report, render_growth_table, Norm, NORM_PAIRS};
use crate::bench::{run_bench, write_csv, write_json, write_plot_script, BenchConfig, ReferenceMode};
use crate::catalog::{load_lrp_files, resolve, SchemeBundle};
use crate::error::{FmmError, Result};
use crate::matrix::{classical_multiply, Matrix};
use crate::recursion::{multiply, multiply_alt, RecursionPlan};
use crate::slp::{parse_slp, verify_slp, OpCount, SlpProgram};
use crate::sms::{load_sms, render_sms};

#[derive(Parser, Debug)]
#[command(name = "fmm", version, about = "Bilinear matrix-multiplication schemes")]
pub struct Cli {
    /// Extra directories searched for `<id>_{L,R,P}.sms` scheme files.
    #[arg(long, global = true, env = "FMM_SCHEME_DIR", value_delimiter = ':')]
    pub scheme_dir: Vec<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct SchemeArg {
    /// Built-in id, id in a scheme directory, or file prefix.
    #[arg(long, conflicts_with = "lrp")]
    pub scheme: Option<String>,
    /// Explicit `L`, `R` and `P` SMS files.
    #[arg(long, num_args = 3, value_names = ["L", "R", "P"])]
    pub lrp: Option<Vec<PathBuf>>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Exhaustive correctness check of a scheme and its programs.
    Validate(SchemeArg),
    /// Growth factors, error exponents and gamma2.
    Gamma {
        /// Schemes to tabulate (default: strassen, winograd, acc-4x4x4).
        #[arg(long)]
        scheme: Vec<String>,
        /// `all` or a single pair such as `inf,2`.
        #[arg(long, default_value = "all")]
        norms: String,
        #[arg(long)]
        json: bool,
    },
    /// Operation counts of programs, and the leading complexity constant.
    Count {
        #[arg(long)]
        scheme: Option<String>,
        #[arg(long)]
        slp: Vec<PathBuf>,
    },
    /// Multiplies two matrix files.
    Multiply {
        #[command(flatten)]
        scheme: SchemeArg,
        #[arg(long)]
        a: PathBuf,
        #[arg(long)]
        b: PathBuf,
        #[arg(long)]
        levels: Option<usize>,
        #[arg(long)]
        threshold: Option<usize>,
        /// Exact dyadic arithmetic; inputs and output are SMS files.
        #[arg(long)]
        exact: bool,
        /// Recurse in the alternative basis.
        #[arg(long)]
        alt: bool,
        /// Plain triple loop, ignoring the scheme.
        #[arg(long)]
        classical: bool,
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// Accuracy benchmark against an exact product.
    Bench {
        /// JSON configuration; the flags below override it.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, value_delimiter = ',')]
        sizes: Option<Vec<usize>>,
        #[arg(long, value_delimiter = ',')]
        schemes: Option<Vec<String>>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        trials: Option<usize>,
        #[arg(long, value_enum)]
        reference: Option<RefArg>,
        #[arg(long)]
        extra_levels: Option<usize>,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
        #[arg(long, short)]
        output: Option<PathBuf>,
        /// Also write a gnuplot script of the medians.
        #[arg(long)]
        plot: Option<PathBuf>,
    },
    /// Checks that a program computes the linear map of an SMS matrix.
    SlpVerify {
        #[arg(long)]
        slp: PathBuf,
        #[arg(long)]
        matrix: PathBuf,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum RefArg {
    Exact,
    DoubleDouble,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

enum Outcome {
    Ok,
    Failed,
}

/// Parses `args` (program name first) and runs the command.
pub fn run<I, S>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            if e.use_stderr() {
                let _ = write!(err, "{}", e.render());
                return 2;
            }
            let _ = write!(out, "{}", e.render());
            return 0;
        }
    };
    match execute(&cli, out) {
        Ok(Outcome::Ok) => 0,
        Ok(Outcome::Failed) => 1,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            2
        }
    }
}

fn bundle_of(arg: &SchemeArg, dirs: &[PathBuf]) -> Result<SchemeBundle> {
    match (&arg.scheme, &arg.lrp) {
        (Some(id), _) => resolve(id, dirs),
        (None, Some(files)) => load_lrp_files("external", &files[0], &files[1], &files[2]),
        (None, None) => Err(FmmError::Invalid("give --scheme or --lrp".into())),
    }
}

fn execute(cli: &Cli, out: &mut dyn Write) -> Result<Outcome> {
    let dirs = &cli.scheme_dir;
    match &cli.command {
        Command::Validate(arg) => validate(&bundle_of(arg, dirs)?, out),
        Command::Gamma { scheme, norms, json } => gamma(scheme, norms, *json, dirs, out),
        Command::Count { scheme, slp } => count(scheme.as_deref(), slp, dirs, out),
        Command::Multiply {
            scheme,
            a,
            b,
            levels,
            threshold,
            exact,
            alt,
            classical,
            output,
        } => {
            let bundle = if *classical { None } else { Some(bundle_of(scheme, dirs)?) };
            let job = MultiplyJob {
                bundle: bundle.as_ref(),
                levels: *levels,
                threshold: *threshold,
                alt: *alt,
            };
            let text = if *exact {
                render_sms(&job.run(&load_sms(a)?, &load_sms(b)?)?)
            } else {
                render_dense(&job.run(&load_dense(a)?, &load_dense(b)?)?)
            };
            emit(output.as_deref(), &text, out)?;
            Ok(Outcome::Ok)
        }
        Command::Bench {
            config,
            sizes,
            schemes,
            seed,
            trials,
            reference,
            extra_levels,
            format,
            output,
            plot,
        } => {
            let mut cfg = match config {
                Some(p) => serde_json::from_str::<BenchConfig>(&std::fs::read_to_string(p)?)
                    .map_err(|e| FmmError::Parse(format!("{}: {e}", p.display())))?,
                None => BenchConfig::default(),
            };
            if let Some(v) = sizes {
                cfg.sizes = v.clone();
            }
            if let Some(v) = schemes {
                cfg.schemes = v.clone();
            }
            if let Some(v) = seed {
                cfg.seed = *v;
            }
            if let Some(v) = trials {
                cfg.trials = *v;
            }
            if let Some(v) = extra_levels {
                cfg.extra_levels = *v;
            }
            if let Some(r) = reference {
                cfg.reference = match r {
                    RefArg::Exact => ReferenceMode::Exact,
                    RefArg::DoubleDouble => ReferenceMode::DoubleDouble,
                };
            }
            let records = run_bench(&cfg, dirs)?;
            let mut buf = Vec::new();
            match format {
                Format::Csv => write_csv(&records, &mut buf)?,
                Format::Json => write_json(&records, &mut buf)?,
            }
            emit(output.as_deref(), &String::from_utf8_lossy(&buf), out)?;
            if let Some(p) = plot {
                write_plot_script(&records, p)?;
            }
            Ok(Outcome::Ok)
        }
        Command::SlpVerify { slp, matrix } => {
            let prog = parse_slp(&std::fs::read_to_string(slp)?)?;
            let m = load_sms(matrix)?;
            if verify_slp(&prog, &m) {
                writeln!(out, "ok: {} computes {}", slp.display(), matrix.display())?;
                Ok(Outcome::Ok)
            } else {
                writeln!(out, "MISMATCH: {} does not compute {}", slp.display(), matrix.display())?;
                Ok(Outcome::Failed)
            }
        }
    }
}

fn emit(path: Option<&Path>, text: &str, out: &mut dyn Write) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, text)?,
        None => out.write_all(text.as_bytes())?,
    }
    Ok(())
}

fn validate(bundle: &SchemeBundle, out: &mut dyn Write) -> Result<Outcome> {
    let (m, k, n) = bundle.scheme.dims();
    let report = bundle.check();
    writeln!(
        out,
        "scheme {} <{m},{k},{n}:{}>: {} elementary pairs checked, {} failures",
        bundle.id(),
        bundle.scheme.rank(),
        report.validation.checked,
        report.validation.failures.len()
    )?;
    for f in report.validation.failures.iter().take(20) {
        writeln!(
            out,
            "  wrong product for E({},{}) * E({},{})",
            f.a_row + 1,
            f.a_col + 1,
            f.b_row + 1,
            f.b_col + 1
        )?;
    }
    for (name, ok) in &report.programs {
        writeln!(out, "program {name}: {}", if *ok { "ok" } else { "MISMATCH" })?;
    }
    if let Some(f) = report.factorization {
        let word = |b: bool| if b { "ok" } else { "FAILS" };
        writeln!(
            out,
            "L = L_alt*L_cob: {}; R = R_alt*R_cob: {}; P = P_cob*P_alt: {}",
            word(f.l),
            word(f.r),
            word(f.p)
        )?;
    }
    writeln!(out, "{}", if report.is_ok() { "VALID" } else { "INVALID" })?;
    Ok(if report.is_ok() { Outcome::Ok } else { Outcome::Failed })
}

fn gamma(ids: &[String], norms: &str, json: bool, dirs: &[PathBuf], out: &mut dyn Write) -> Result<Outcome> {
    let pairs: Vec<(Norm, Norm)> = if norms == "all" {
        NORM_PAIRS.to_vec()
    } else {
        let (p, q) = norms
            .split_once(',')
            .ok_or_else(|| FmmError::Parse(format!("norm pair '{norms}' is not 'p,q'")))?;
        vec![(p.parse()?, q.parse()?)]
    };
    let default = ["strassen", "winograd", "acc-4x4x4"].map(String::from);
    let ids = if ids.is_empty() { &default[..] } else { ids };
    let reports = ids
        .iter()
        .map(|id| Ok(growth_report(&resolve(id, dirs)?.scheme, &pairs)))
        .collect::<Result<Vec<_>>>()?;
    if json {
        writeln!(out, "{}", serde_json::to_string_pretty(&reports).map_err(|e| FmmError::Io(e.into()))?)?;
    } else {
        write!(out, "{}", render_growth_table(&reports))?;
    }
    Ok(Outcome::Ok)
}

fn count_line(out: &mut dyn Write, name: &str, c: OpCount) -> Result<()> {
    writeln!(out, "{name:<10} {c} ({} linear operations)", c.linear_ops())?;
    Ok(())
}

fn count(scheme: Option<&str>, slps: &[PathBuf], dirs: &[PathBuf], out: &mut dyn Write) -> Result<Outcome> {
    for p in slps {
        let prog = parse_slp(&std::fs::read_to_string(p)?)?;
        count_line(out, &p.display().to_string(), prog.count_ops())?;
    }
    let Some(id) = scheme else {
        if slps.is_empty() {
            return Err(FmmError::Invalid("give --scheme or --slp".into()));
        }
        return Ok(Outcome::Ok);
    };
    let bundle = resolve(id, dirs)?;
    let s = &bundle.scheme;
    let (m, _, n) = s.dims();
    let progs: Vec<(&str, &SlpProgram)> = [("L", &bundle.slp_l), ("R", &bundle.slp_r), ("P", &bundle.slp_p)]
        .into_iter()
        .filter_map(|(name, p)| p.as_ref().map(|p| (name, p)))
        .collect();
    if progs.len() == 3 {
        let mut total = OpCount::default();
        for (name, p) in &progs {
            count_line(out, name, p.count_ops())?;
            total = total + p.count_ops();
        }
        count_line(out, "total", total)?;
        let (c, e) = complexity_constant(total.linear_ops() as u64, s.rank() as u64, m as u64, n as u64)?;
        writeln!(out, "constant   {c} = {:.5}, exponent {e:.9}", *c.numer() as f64 / *c.denom() as f64)?;
    }
    if let Some(alt) = &bundle.alt {
        let mut core = OpCount::default();
        for (name, p) in [("L_alt", &alt.core_l), ("R_alt", &alt.core_r), ("P_alt", &alt.core_p)] {
            count_line(out, name, p.count_ops())?;
            core = core + p.count_ops();
        }
        count_line(out, "core", core)?;
        let (c, e) = complexity_constant_alt(core.linear_ops() as u64, s.rank() as u64, alt.inner as u64, m as u64)?;
        writeln!(out, "alt constant {c}, exponent {e:.9}")?;
        let mut cob = OpCount::default();
        for (name, p) in [("L_cob", &alt.cob_l), ("R_cob", &alt.cob_r), ("P_cob", &alt.cob_p)] {
            count_line(out, name, p.count_ops())?;
            cob = cob + p.count_ops();
        }
        count_line(out, "cob total", cob)?;
    }
    if progs.len() < 3 && bundle.alt.is_none() {
        writeln!(out, "scheme '{id}' has no programs")?;
    }
    Ok(Outcome::Ok)
}

struct MultiplyJob<'a> {
    bundle: Option<&'a SchemeBundle>,
    levels: Option<usize>,
    threshold: Option<usize>,
    alt: bool,
}

impl MultiplyJob<'_> {
    fn run<T: crate::element::Element>(&self, a: &Matrix<T>, b: &Matrix<T>) -> Result<Matrix<T>> {
        let Some(bundle) = self.bundle else {
            return classical_multiply(a, b);
        };
        let mut plan = match self.threshold {
            Some(t) => RecursionPlan::auto(t),
            None => RecursionPlan::default_for(bundle.scheme.dims()),
        };
        plan.levels = self.levels;
        if self.alt {
            multiply_alt(bundle, a, b, &plan)
        } else {
            multiply(bundle, a, b, &plan)
        }
    }
}

/// Whitespace-separated rows; blank lines and `#` comments are skipped.
pub fn parse_dense(text: &str) -> Result<Matrix<f64>> {
    let mut data = Vec::new();
    let mut cols = None;
    let mut rows = 0;
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let row = line
            .split_whitespace()
            .map(|t| {
                t.parse::<f64>().map_err(|_| FmmError::ParseLine {
                    line: i + 1,
                    msg: format!("bad number '{t}'"),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        if *cols.get_or_insert(row.len()) != row.len() {
            return Err(FmmError::ParseLine {
                line: i + 1,
                msg: "row length differs from the first row".into(),
            });
        }
        data.extend(row);
        rows += 1;
    }
    Matrix::from_vec(rows, cols.unwrap_or(0), data)
}

pub fn load_dense(path: &Path) -> Result<Matrix<f64>> {
    parse_dense(&std::fs::read_to_string(path)?)
}

pub fn render_dense(m: &Matrix<f64>) -> String {
    let mut s = String::new();
    for i in 0..m.rows() {
        let row: Vec<String> = m.row(i).iter().map(|x| format!("{x:e}")).collect();
        s.push_str(&row.join(" "));
        s.push('\n');
    }
    s
}
