use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use sic_tower::io::{read_fiducial, write_fiducial, FiducialFile};
use sic_tower::pipeline::{self, Input, RunReport, Tolerances, SIC_TOLERANCE_ENV, TOLERANCE_ENV};
use sic_tower::sic::{self, SearchOptions, SubspaceChoice, SIC_TOL};
use sic_tower::{frames, mub, numtheory, symmetry, Error};

#[derive(Parser)]
#[command(name = "sictower", version, about = "Weyl-Heisenberg SICs and aligned SICs across dimension towers")]
struct Cli {
    /// Tolerance for alignment and theorem checks.
    #[arg(long, global = true, env = TOLERANCE_ENV, default_value_t = 1e-8)]
    tol: f64,
    /// Tolerance on the SIC equiangularity residual.
    #[arg(long, global = true, env = SIC_TOLERANCE_ENV, default_value_t = SIC_TOL)]
    sic_tol: f64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Copy, Clone, ValueEnum)]
enum Zauner {
    Largest,
    Smallest,
}

#[derive(Subcommand)]
enum Command {
    /// Search for a SIC fiducial.
    Find {
        #[arg(long)]
        dim: usize,
        /// Number of random starts.
        #[arg(long, default_value_t = 64)]
        seeds: usize,
        /// Base seed of the random starts.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 3000)]
        max_iters: usize,
        /// Restrict the search to an eigenspace of U_{F_z}.
        #[arg(long, value_enum, num_args = 0..=1, default_missing_value = "largest")]
        restrict_zauner: Option<Zauner>,
        /// Also require U_b-invariance (dimension d(d-2), odd d).
        #[arg(long, requires = "restrict_zauner")]
        fb_invariant: bool,
        /// Search over real vectors only.
        #[arg(long)]
        real: bool,
        #[arg(long)]
        label: Option<String>,
        /// Output file; stdout when absent.
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
    /// Check that a file holds a SIC fiducial.
    Verify { file: PathBuf },
    /// Run the full pipeline on a pair of fiducials in dimensions d and d(d-2).
    Align {
        #[arg(long)]
        small: PathBuf,
        #[arg(long)]
        big: PathBuf,
        /// JSON report path; stdout when absent.
        #[arg(long, short)]
        out: Option<PathBuf>,
        /// Write the big fiducial in the aligned frame.
        #[arg(long)]
        write_aligned: Option<PathBuf>,
    },
    /// List a dimension tower with its discriminants.
    Tower {
        #[arg(long)]
        start: u64,
        #[arg(long, default_value_t = 3)]
        rungs: usize,
        #[arg(long)]
        json: bool,
    },
    /// Mutually unbiased bases, from phase-point operators or from an aligned fiducial.
    Mub {
        /// Odd prime for the phase-point construction.
        #[arg(long, conflicts_with = "big")]
        p: Option<usize>,
        /// Aligned fiducial in dimension d(d-2), in its aligned frame.
        #[arg(long, requires = "d")]
        big: Option<PathBuf>,
        #[arg(long)]
        d: Option<usize>,
    },
    /// Clifford stabilizer of a fiducial; with --fb-d also the U_b check.
    Symmetry {
        file: PathBuf,
        /// Enumerate the whole group up to this dimension, sample above it.
        #[arg(long, default_value_t = symmetry::FULL_ENUMERATION_MAX_DIM)]
        max_full_dim: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Small dimension d of an aligned fiducial in dimension d(d-2).
        #[arg(long)]
        fb_d: Option<usize>,
    },
    /// Certify the equiangular tight frames inside a fiducial in dimension d(d-2).
    Etf {
        file: PathBuf,
        #[arg(long)]
        d: usize,
    },
}

fn exit_for(e: &Error) -> u8 {
    match e {
        Error::Parse { .. }
        | Error::Io { .. }
        | Error::Invalid(_)
        | Error::Dimension { .. }
        | Error::ModulusMismatch(..)
        | Error::ZeroNorm
        | Error::NotOddPrime(_)
        | Error::Stride { .. } => 2,
        _ => 3,
    }
}

fn emit(text: &str, out: Option<&Path>) -> Result<(), Error> {
    match out {
        Some(p) => fs::write(p, text).map_err(|e| Error::Io { path: p.display().to_string(), msg: e.to_string() }),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

fn print_json(x: &impl Serialize) {
    println!("{}", serde_json::to_string_pretty(x).expect("reports serialize to JSON"));
}

fn input(role: &'static str, path: &Path) -> Result<(FiducialFile, Input), Error> {
    let (file, sha256) = read_fiducial(path)?;
    let meta = Input {
        role,
        path: path.display().to_string(),
        sha256,
        dim: file.fiducial.dim,
        label: file.fiducial.label.clone(),
    };
    Ok((file, meta))
}

fn code(pass: bool) -> u8 {
    if pass {
        0
    } else {
        1
    }
}

fn run(cli: Cli) -> Result<u8, Error> {
    let tol = Tolerances { sic: cli.sic_tol, align: cli.tol, theorem: cli.tol };
    match cli.command {
        Command::Find { dim, seeds, seed, max_iters, restrict_zauner, fb_invariant, real, label, out } => {
            if dim < 2 {
                return Err(Error::Invalid(format!("dimension {dim} < 2")));
            }
            let choice = restrict_zauner.map(|z| match z {
                Zauner::Largest => SubspaceChoice::Largest,
                Zauner::Smallest => SubspaceChoice::Smallest,
            });
            let space = pipeline::search_space(dim, choice, fb_invariant)?;
            let description = space.description();
            let tolerance = if dim >= 15 { tol.sic } else { tol.sic.min(1e-12) };
            let opts = SearchOptions { seed, restarts: seeds, max_iters, tolerance, space, real };
            let outcome = sic::find_fiducial(dim, &opts)?;
            let mut f = outcome.fiducial().clone();
            f.label = label.unwrap_or_else(|| format!("{dim}-search"));
            let file = FiducialFile::new(f)
                .with_meta("residual", format!("{:.3e}", outcome.residual()))
                .with_meta("seed", seed.to_string())
                .with_meta("space", if real { format!("{description}, real") } else { description });
            match out {
                Some(p) => write_fiducial(&p, &file)?,
                None => print!("{}", sic_tower::io::format_fiducial(&file)),
            }
            eprintln!("residual {:.3e} (tolerance {tolerance:.1e})", outcome.residual());
            Ok(code(outcome.converged().is_some()))
        }
        Command::Verify { file } => {
            let (f, meta) = input("fiducial", &file)?;
            let r = sic::sic_verify_with(&f.fiducial, tol.sic)?;
            print_json(&json!({ "input": meta, "report": r }));
            Ok(code(r.pass))
        }
        Command::Align { small, big, out, write_aligned } => {
            let (s, ms) = input("small", &small)?;
            let (b, mb) = input("big", &big)?;
            let mut report = RunReport::new("align", tol, vec![ms, mb]);
            let aligned = pipeline::run_align(&s.fiducial, &b.fiducial, &tol, &mut report)?;
            if let (Some(path), Some(a)) = (write_aligned, aligned.as_ref()) {
                if a.report.verdict == sic_tower::alignment::Verdict::Aligned {
                    let file = FiducialFile::new(a.big.clone()).with_meta("aligned_to", s.fiducial.label.clone());
                    write_fiducial(&path, &file)?;
                }
            }
            emit(&report.to_json(), out.as_deref())?;
            Ok(report.outcome.exit_code() as u8)
        }
        Command::Tower { start, rungs, json } => {
            if start < 4 {
                return Err(Error::Invalid(format!("tower start {start} < 4")));
            }
            let steps = numtheory::tower(start, rungs)?;
            if json {
                print_json(&steps);
            } else {
                let dims: Vec<String> = steps.iter().map(|s| s.d.to_string()).collect();
                let discriminant = steps.first().map(|s| s.discriminant).unwrap_or(0);
                println!("{} (D = {discriminant})", dims.join(" -> "));
            }
            Ok(0)
        }
        Command::Mub { p, big, d } => {
            if let Some(p) = p {
                let projectors = mub::wootters_projectors(p)?;
                let set = mub::mub_from_projectors(p, &projectors);
                let r = mub::mub_verify(&set);
                print_json(&r);
                return Ok(code(r.pass));
            }
            let (Some(path), Some(d)) = (big, d) else {
                return Err(Error::Invalid("give --p, or --big with --d".into()));
            };
            let (f, _) = input("big", &path)?;
            let r = mub::mub_from_aligned_sic(&f.fiducial, d)?;
            print_json(&r);
            Ok(code(r.report.pass))
        }
        Command::Symmetry { file, max_full_dim, seed, fb_d } => {
            let (f, meta) = input("fiducial", &file)?;
            let r = symmetry::stabilizer_order_with(&f.fiducial, max_full_dim, seed)?;
            let t5 = fb_d.map(|d| symmetry::check_theorem5_with(&f.fiducial, d, tol.theorem)).transpose()?;
            let pass = t5.as_ref().is_none_or(|t| t.pass);
            let t5 = t5.map(|t| {
                json!({
                    "fb": t.fb,
                    "invariance_defect": t.invariance_defect,
                    "permutation_defect": t.permutation_defect,
                    "permutation_order": t.permutation_order,
                    "tolerance": t.tolerance,
                    "pass": t.pass,
                })
            });
            print_json(&json!({ "input": meta, "report": r, "theorem5": t5 }));
            Ok(code(pass))
        }
        Command::Etf { file, d } => {
            let (f, meta) = input("fiducial", &file)?;
            if d < 3 || f.fiducial.dim != d * (d - 2) {
                return Err(Error::Invalid(format!("dimension {} is not d(d-2) for d = {d}", f.fiducial.dim)));
            }
            let (a, b) = frames::certify_embedded_with(&f.fiducial, d, tol.theorem)?;
            let pass = a.pass && b.pass;
            print_json(&json!({ "input": meta, "stride_d_minus_2": a, "stride_d": b }));
            Ok(code(pass))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(c) => ExitCode::from(c),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_for(&e))
        }
    }
}
