//! Front end for lmoments-core: one subcommand per computation or verifier.
//!
//! Exit status is 0 when every check passes, 1 when a check or a computation fails,
//! and 2 for usage errors and invalid parameters.

pub mod commands;
pub mod config;
pub mod emit;
pub mod manifest;

use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, CommandFactory, FromArgMatches, Parser, Subcommand};
use num_complex::Complex64;

pub use lmoments_core;
pub use lmoments_core::moments::{AfeCheck, MomentReport, MomentRow, SieveResult};

use commands::{Outcome, QuadOverrides, RamGrid, Suite, SuiteParams};
use config::RunConfig;
use emit::{to_json, write_out, Format};
use manifest::RunManifest;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Parser, Debug)]
#[command(name = "lmoments", version, about = "Moments of Dirichlet L-functions: computations and identity checks")]
pub struct Cli {
    /// key=value config file; defaults to $LMOMENTS_CONFIG
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Worker threads (0: one per core)
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
    /// json or csv; each subcommand has its own default
    #[arg(long, global = true)]
    format: Option<Format>,
    /// Report destination (default stdout)
    #[arg(long, global = true, value_name = "PATH")]
    output: Option<PathBuf>,
    /// Manifest destination (default <output>.manifest.json, or stderr)
    #[arg(long, global = true, value_name = "PATH")]
    manifest: Option<PathBuf>,
    /// Seed for the randomized suites
    #[arg(long, global = true, default_value_t = 2024)]
    seed: u64,
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Args, Debug, Clone, Copy)]
struct QuadArgs {
    #[arg(long)]
    abs_tol: Option<f64>,
    #[arg(long)]
    rel_tol: Option<f64>,
    /// Initial trapezoid step
    #[arg(long)]
    step: Option<f64>,
    /// Truncation radius of the line integral
    #[arg(long)]
    radius: Option<f64>,
    #[arg(long)]
    max_refinements: Option<u32>,
}

impl From<QuadArgs> for QuadOverrides {
    fn from(a: QuadArgs) -> Self {
        QuadOverrides {
            abs_tol: a.abs_tol,
            rel_tol: a.rel_tol,
            step: a.step,
            radius: a.radius,
            max_refinements: a.max_refinements,
        }
    }
}

fn parse_complex(s: &str) -> Result<Complex64, String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    let num = |x: &str| x.parse::<f64>().map_err(|e| format!("`{x}`: {e}"));
    match parts.as_slice() {
        [re] => Ok(Complex64::new(num(re)?, 0.0)),
        [re, im] => Ok(Complex64::new(num(re)?, num(im)?)),
        _ => Err("expected re or re,im".into()),
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
struct Probe(f64, f64, f64);

fn parse_probe(s: &str) -> Result<Probe, String> {
    let v = s
        .split(',')
        .map(|x| x.trim().parse::<f64>().map_err(|e| format!("`{x}`: {e}")))
        .collect::<Result<Vec<_>, _>>()?;
    match v.as_slice() {
        [x, y, mu] => Ok(Probe(*x, *y, *mu)),
        _ => Err("expected x,y,mu".into()),
    }
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// tau_4(n) for n <= limit
    Tau {
        #[arg(long, default_value_t = 100)]
        limit: usize,
    },
    /// Character table mod q
    Chars {
        #[arg(long)]
        q: u64,
        #[arg(long)]
        primitive_even: bool,
    },
    /// L(s, chi), and Lambda(s, chi) for primitive even chi
    Lfun {
        #[arg(long)]
        q: u64,
        /// Index in the group enumeration (0 is principal)
        #[arg(long = "char")]
        index: usize,
        #[arg(long, allow_hyphen_values = true, value_parser = parse_complex, value_name = "RE,IM")]
        s: Complex64,
    },
    /// int |Gamma(1/4 + it/2)|^8 dt
    Gamma8 {
        #[arg(long, default_value_t = 40.0)]
        radius: f64,
        #[arg(long, default_value_t = 1e-12)]
        tol: f64,
        #[arg(long)]
        step: Option<f64>,
        #[arg(long)]
        max_refinements: Option<u32>,
    },
    /// V and W at one point, or the V decay scan
    Weights {
        #[arg(long, value_parser = parse_probe, value_name = "X,Y,MU",
              required_unless_present = "check_decay", conflicts_with = "check_decay")]
        probe: Option<Probe>,
        #[arg(long)]
        check_decay: bool,
        #[command(flatten)]
        quad: QuadArgs,
    },
    /// Ramachandra's identity on a grid
    RamCheck {
        #[arg(long, value_delimiter = ',', action = clap::ArgAction::Set, default_values_t = [5u64, 8])]
        q: Vec<u64>,
        #[arg(long, value_delimiter = ',', action = clap::ArgAction::Set, default_values_t = [0.0, 0.01])]
        c: Vec<f64>,
        #[arg(long, value_delimiter = ',', action = clap::ArgAction::Set, default_values_t = [0.0, 0.7, 2.0])]
        t: Vec<f64>,
        #[arg(long, value_delimiter = ',', action = clap::ArgAction::Set, default_values_t = [50.0, 200.0])]
        x: Vec<f64>,
        #[arg(long, default_value_t = 1e-5)]
        tol: f64,
    },
    /// Eighth-moment approximate functional equation for every primitive even chi mod q
    AfeCheck {
        #[arg(long)]
        q: u64,
        #[arg(long, default_value_t = 1500)]
        limit: u64,
        #[arg(long, default_value_t = 8.0)]
        log_x_cut: f64,
        #[arg(long, default_value_t = 1e-2)]
        rel_target: f64,
        /// Fail when the decay-bound tail exceeds the target
        #[arg(long)]
        strict: bool,
        #[command(flatten)]
        quad: QuadArgs,
    },
    /// Weighted eighth moment over q in (Q, 2Q) against the main term
    Moment {
        #[arg(long = "Q", value_name = "Q")]
        big_q: f64,
        #[command(flatten)]
        quad: QuadArgs,
    },
    /// Large-sieve ratio on seeded random instances
    SieveCheck {
        #[arg(long, default_value_t = 50)]
        trials: usize,
    },
    /// Euler-product constants a4, a3, calA, diag
    EulerConst {
        #[arg(long)]
        kind: String,
        #[arg(long, default_value_t = 100_000)]
        cutoff: u64,
        /// Sum the tail beyond the cutoff through prime zeta values
        #[arg(long)]
        accelerated: bool,
    },
    /// Identity suites; every case appears in the manifest
    Identities {
        #[arg(long, value_enum)]
        suite: Suite,
        #[arg(long, default_value_t = 48)]
        q_max: u64,
        #[arg(long, default_value_t = 100)]
        mn_max: u64,
        /// Seeded points for h-dual and v-scale
        #[arg(long)]
        points: Option<usize>,
    },
}

fn run_command(cmd: &Cmd, seed: u64) -> Result<Outcome, lmoments_core::Error> {
    match cmd {
        Cmd::Tau { limit } => commands::tau(*limit),
        Cmd::Chars { q, primitive_even } => commands::chars(*q, *primitive_even),
        Cmd::Lfun { q, index, s } => commands::lfun(*q, *index, *s),
        Cmd::Gamma8 {
            radius,
            tol,
            step,
            max_refinements,
        } => commands::gamma8(
            *radius,
            *tol,
            &QuadOverrides {
                step: *step,
                max_refinements: *max_refinements,
                ..Default::default()
            },
        ),
        Cmd::Weights { probe, quad, .. } => match probe {
            Some(Probe(x, y, mu)) => commands::weights_probe(*x, *y, *mu, &(*quad).into()),
            None => commands::weights_decay(&(*quad).into()),
        },
        Cmd::RamCheck { q, c, t, x, tol } => commands::ram_check(&RamGrid {
            moduli: q.clone(),
            cs: c.clone(),
            ts: t.clone(),
            xs: x.clone(),
            tol: *tol,
        }),
        Cmd::AfeCheck {
            q,
            limit,
            log_x_cut,
            rel_target,
            strict,
            quad,
        } => commands::afe_check(
            *q,
            &lmoments_core::moments::AfeSpec {
                limit: *limit,
                rel_target: *rel_target,
                log_x_cut: *log_x_cut,
                strict: *strict,
            },
            &(*quad).into(),
        ),
        Cmd::Moment { big_q, quad } => commands::moment(*big_q, &(*quad).into()),
        Cmd::SieveCheck { trials } => commands::sieve_check(*trials, seed),
        Cmd::EulerConst {
            kind,
            cutoff,
            accelerated,
        } => commands::euler_const(kind, *cutoff, *accelerated),
        Cmd::Identities {
            suite,
            q_max,
            mn_max,
            points,
        } => {
            let default_points = match suite {
                Suite::VScale => 100,
                _ => 1000,
            };
            commands::identities(
                *suite,
                &SuiteParams {
                    q_max: *q_max,
                    mn_max: *mn_max,
                    points: points.unwrap_or(default_points),
                    seed,
                },
            )
        }
    }
}

/// Exit code for a failed computation.
pub fn error_exit_code(e: &lmoments_core::Error) -> i32 {
    use lmoments_core::Error::*;
    match e {
        InvalidParameter(_) | Pole(_) | NotPrimitive { .. } | OddCharacter => EXIT_USAGE,
        NoConvergence(_) | InsufficientLimit { .. } => EXIT_CHECK_FAILED,
    }
}

fn root_command() -> clap::Command {
    Cli::command().args_override_self(true)
}

/// Parses argv (with the config file merged in) into the typed CLI and its config echo.
pub fn parse(argv: &[String]) -> Result<(Cli, RunConfig), clap::Error> {
    let root = root_command();
    let cfg_path = config::config_path(argv);
    let entries = match &cfg_path {
        Some(p) => config::load_config(p).map_err(|m| root.clone().error(clap::error::ErrorKind::Io, m))?,
        None => Vec::new(),
    };
    let merged = config::merge_argv(argv, &entries, &root)
        .map_err(|m| root.clone().error(clap::error::ErrorKind::InvalidValue, m))?;
    let matches = root.clone().try_get_matches_from(&merged)?;
    let cli = Cli::from_arg_matches(&matches)?;
    let (name, sub) = matches.subcommand().expect("subcommand is required");
    let globals = ["config", "threads", "format", "output", "manifest", "seed"];
    // echo keyed by flag name, the same keys a config file uses
    let sub_cmd = root.find_subcommand(name).expect("parsed subcommand exists");
    let params = sub_cmd
        .get_arguments()
        .filter(|a| !globals.contains(&a.get_id().as_str()))
        .filter_map(|a| {
            let raw = sub.try_get_raw(a.get_id().as_str()).ok().flatten()?;
            let vals: Vec<String> = raw.map(|v| v.to_string_lossy().into_owned()).collect();
            Some((a.get_long()?.to_string(), vals.join(",")))
        })
        .collect();
    let config = RunConfig {
        subcommand: name.to_string(),
        params,
        format: cli.format.unwrap_or(Format::Json),
        output: cli
            .output
            .as_ref()
            .map(|p| p.display().to_string())
            .unwrap_or_else(|| "-".into()),
        seed: cli.seed,
        threads: cli.threads,
        config_file: cfg_path.map(|p| p.display().to_string()).unwrap_or_default(),
    };
    Ok((cli, config))
}

/// Runs the CLI on `argv` (program name first) and returns the exit status.
pub fn dispatch(argv: &[String]) -> i32 {
    let (cli, mut config) = match parse(argv) {
        Ok(x) => x,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_USAGE,
            };
        }
    };
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(cli.threads).build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: cannot start {} worker threads: {e}", cli.threads);
            return EXIT_USAGE;
        }
    };
    let start = Instant::now();
    let outcome = match pool.install(|| run_command(&cli.command, cli.seed)) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return error_exit_code(&e);
        }
    };
    let format = cli.format.unwrap_or(outcome.default_format);
    config.format = format;
    let text = match outcome.render(format) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_CHECK_FAILED;
        }
    };
    if let Err(e) = write_out(&text, cli.output.as_deref()) {
        eprintln!("error: {e}");
        return EXIT_CHECK_FAILED;
    }
    let manifest = RunManifest::new(config, start.elapsed().as_secs_f64(), outcome.checks);
    let passed = manifest.passed;
    let manifest_path = cli.manifest.clone().or_else(|| {
        cli.output.as_ref().map(|p| {
            let mut s = p.clone().into_os_string();
            s.push(".manifest.json");
            PathBuf::from(s)
        })
    });
    let written = to_json(&manifest).and_then(|m| match &manifest_path {
        Some(p) => write_out(&m, Some(p)),
        None => {
            eprint!("{m}");
            Ok(())
        }
    });
    if let Err(e) = written {
        eprintln!("error: manifest: {e}");
        return EXIT_CHECK_FAILED;
    }
    if passed {
        EXIT_OK
    } else {
        EXIT_CHECK_FAILED
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn argv(s: &str) -> Vec<String> {
        s.split_whitespace().map(String::from).collect()
    }

    #[test]
    fn cli_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn parse_echoes_params() {
        let (_, cfg) = parse(&argv("lmoments lfun --q 5 --char 2 --s -0.5,3")).unwrap();
        assert_eq!(cfg.subcommand, "lfun");
        assert_eq!(cfg.params["s"], "-0.5,3");
        assert_eq!(cfg.params["q"], "5");
        let (_, cfg) = parse(&argv("lmoments ram-check --q 5")).unwrap();
        assert_eq!(cfg.params["q"], "5");
        assert_eq!(cfg.params["t"], "0,0.7,2");
    }

    #[test]
    fn repeated_list_flag_replaces() {
        let (cli, _) = parse(&argv("lmoments ram-check --q 5,8 --q 13")).unwrap();
        match cli.command {
            Cmd::RamCheck { q, .. } => assert_eq!(q, vec![13]),
            _ => unreachable!(),
        }
    }

    #[test]
    fn parse_helpers() {
        assert_eq!(parse_complex("0.5").unwrap(), Complex64::new(0.5, 0.0));
        assert_eq!(parse_complex("-1,2").unwrap(), Complex64::new(-1.0, 2.0));
        assert!(parse_complex("1,2,3").is_err());
        assert!(parse_probe("1,2").is_err());
    }
}
