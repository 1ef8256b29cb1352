use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{SystemTime, UNIX_EPOCH};

use bpblab_core::approximants::{
    auto_approx, convex_witness_approx, direct_sum_shrink_approx, functional_approx_lp2, hilbert_rotate_approx,
    hilbert_rotate_approx_declared, l1_extreme_approx, linf3_l13_extreme_approx, linf_extreme_approx,
    rank_one_approx, sbpbp_witness, tilted_projection_demo,
};
use bpblab_core::bpbverify::{
    epsilon0_lp2, is_only_approximation, pair_property_sweep, polyhedral_epsilon0, property_p_witness,
    verify_uniform_bpb, CertificateStatus,
};
use bpblab_core::classify::{
    census_lookup, enumerate_extreme_linf3_l13, enumerate_isometries, equivalence_orbit, is_extreme_contraction,
    is_isometry, l1_column_condition, linf_row_condition, CensusMember, CensusOrbit, ExtremalityVerdict,
};
use bpblab_core::demo::{run_all, run_criterion};
use bpblab_core::operators::{attainment_set_at, op_norm};
use bpblab_core::tol::DEFAULT_RESOLUTION;
use bpblab_core::{Exponent, OperatorMatrix, Point, SpaceSpec};
use clap::{Parser, Subcommand, ValueEnum};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;

#[derive(Parser, Debug)]
#[command(name = "bpblab", version, about = "Norm attainment and uniform BPB approximants on lp spaces")]
struct Cli {
    /// Leave the generation time out of the report
    #[arg(long, global = true)]
    no_timestamp: bool,
    /// Worker threads for parallel sweeps
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Sphere sampling density
    #[arg(long, global = true, env = "BPBLAB_DEFAULT_RESOLUTION", default_value_t = DEFAULT_RESOLUTION)]
    resolution: usize,
    /// Write the report here instead of standard output
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Operator norm with a norming vector
    Norm {
        /// Operator JSON, inline or a file path
        #[arg(long = "op")]
        op: String,
    },
    /// Norm attainment set
    Attain {
        #[arg(long = "op")]
        op: String,
    },
    /// Extremality, isometry and census membership
    Classify {
        #[arg(long = "op")]
        op: String,
    },
    /// Isometry group of a space such as `inf:3`
    Isometries {
        #[arg(long)]
        space: String,
    },
    /// Signed-permutation equivalence orbit
    Orbit {
        #[arg(long = "op")]
        op: String,
    },
    /// Extreme contractions of a supported pair
    EnumerateExt {
        #[arg(long)]
        pair: String,
    },
    /// Build a uniform eps-BPB approximant
    Approx {
        #[arg(long = "op")]
        op: Option<String>,
        #[arg(long)]
        eps: f64,
        #[arg(long, value_enum, default_value_t = Construction::Auto)]
        construction: Construction,
        /// Convex witnesses with T = (T1 + T2)/2
        #[arg(long)]
        t1: Option<String>,
        #[arg(long)]
        t2: Option<String>,
        /// Basis vectors as a JSON array of arrays
        #[arg(long)]
        x1: Option<String>,
        #[arg(long)]
        x2: Option<String>,
        #[arg(long)]
        h0: Option<String>,
        /// Functional coefficients, comma separated
        #[arg(long)]
        f: Option<String>,
        #[arg(long)]
        p: Option<String>,
        /// Unit vector for the counterexample family, comma separated
        #[arg(long)]
        x0: Option<String>,
        #[arg(long)]
        n: Option<u64>,
    },
    /// Certify A against T, or search for certified perturbations of T
    Verify {
        #[arg(long = "T")]
        t: String,
        #[arg(long = "A")]
        a: Option<String>,
        #[arg(long)]
        eps: f64,
        /// Random perturbations to try when A is absent
        #[arg(long, default_value_t = 200)]
        trials: usize,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Property (P) witness
    WitnessP {
        #[arg(long = "op")]
        op: String,
    },
    /// Rigidity constant for lp^2 isometries, or for a polyhedral space with --n
    Epsilon0 {
        #[arg(long)]
        p: String,
        #[arg(long)]
        n: Option<usize>,
    },
    /// Approximant sweep over seeded operators
    Sweep {
        #[arg(long)]
        domain: String,
        #[arg(long)]
        codomain: String,
        /// Comma separated
        #[arg(long)]
        eps: String,
        #[arg(long, default_value_t = 20)]
        trials: usize,
        #[arg(long)]
        seed: u64,
    },
    /// The acceptance suite
    Demo {
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        criterion: Option<u8>,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Construction {
    Auto,
    RankOne,
    Convex,
    DirectSum,
    Linf,
    L1,
    Census,
    Hilbert,
    HilbertDeclared,
    Tilted,
    Functional,
    Sbpbp,
}

struct Exit {
    code: u8,
    msg: String,
}

fn bad(field: &str, e: impl std::fmt::Display) -> Exit {
    Exit {
        code: 2,
        msg: format!("invalid {field}: {e}"),
    }
}

fn lib<T>(field: &str, r: bpblab_core::Result<T>) -> Result<T, Exit> {
    r.map_err(|e| bad(field, e))
}

fn read_json<T: DeserializeOwned>(field: &str, src: &str) -> Result<T, Exit> {
    let text = if src.trim_start().starts_with(['{', '[']) {
        src.to_string()
    } else {
        fs::read_to_string(src).map_err(|e| bad(field, format!("{src}: {e}")))?
    };
    serde_json::from_str(&text).map_err(|e| bad(field, e))
}

fn read_op(field: &str, src: Option<&String>) -> Result<OperatorMatrix, Exit> {
    let src = src.ok_or_else(|| bad(field, "required for this construction"))?;
    read_json(field, src)
}

fn parse_space(field: &str, s: &str) -> Result<SpaceSpec, Exit> {
    let (p, n) = s.split_once(':').ok_or_else(|| bad(field, "expected <p>:<n>, e.g. inf:3"))?;
    let p: Exponent = p.parse().map_err(|e| bad(field, e))?;
    let n: usize = n.parse().map_err(|e| bad(field, e))?;
    lib(field, SpaceSpec::new(p, n))
}

fn parse_list(field: &str, s: &str) -> Result<Vec<f64>, Exit> {
    s.split(',')
        .map(|v| v.trim().parse::<f64>().map_err(|e| bad(field, format!("{v:?}: {e}"))))
        .collect()
}

#[derive(Debug, Serialize, Deserialize)]
pub struct Envelope {
    command: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    generated_at: Option<u64>,
    report: Value,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct ClassifyReport {
    norm: f64,
    is_isometry: bool,
    extremality: Option<ExtremalityVerdict>,
    extremality_error: Option<String>,
    linf_row_condition: Option<bool>,
    l1_column_condition: Option<bool>,
    census_orbit: Option<CensusOrbit>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct GroupReport {
    count: usize,
    members: Vec<OperatorMatrix>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct CensusReport {
    count: usize,
    orbits: Vec<usize>,
    members: Vec<CensusMember>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct TiltedReport {
    theta: f64,
    report: bpblab_core::approximants::ApproximantReport,
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("reports serialize")
}

/// Runs one command; the flag is set when the report records a failure.
fn run(cli: &Cli) -> Result<(Value, bool), Exit> {
    let res = cli.resolution;
    Ok(match &cli.command {
        Command::Norm { op } => {
            let t: OperatorMatrix = read_json("--op", op)?;
            (to_value(&lib("--op", op_norm(&t))?), false)
        }
        Command::Attain { op } => {
            let t: OperatorMatrix = read_json("--op", op)?;
            (to_value(&lib("--op", attainment_set_at(&t, res))?), false)
        }
        Command::Classify { op } => {
            let t: OperatorMatrix = read_json("--op", op)?;
            let norm = lib("--op", op_norm(&t))?.value;
            let (extremality, extremality_error) = match is_extreme_contraction(&t) {
                Ok(v) => (Some(v), None),
                Err(e) => (None, Some(e.to_string())),
            };
            let report = ClassifyReport {
                norm,
                is_isometry: t.domain == t.codomain && lib("--op", is_isometry(&t))?,
                extremality,
                extremality_error,
                linf_row_condition: linf_row_condition(&t).ok(),
                l1_column_condition: l1_column_condition(&t).ok(),
                census_orbit: census_lookup(&t).map(|m| m.orbit),
            };
            (to_value(&report), false)
        }
        Command::Isometries { space } => {
            let s = parse_space("--space", space)?;
            let members = lib("--space", enumerate_isometries(s))?;
            (to_value(&GroupReport { count: members.len(), members }), false)
        }
        Command::Orbit { op } => {
            let t: OperatorMatrix = read_json("--op", op)?;
            let members = lib("--op", equivalence_orbit(&t))?;
            (to_value(&GroupReport { count: members.len(), members }), false)
        }
        Command::EnumerateExt { pair } => {
            if pair != "linf3-l13" {
                return Err(bad("--pair", format!("{pair:?} is not enumerated; use linf3-l13")));
            }
            let members = enumerate_extreme_linf3_l13();
            let rank_one = members.iter().filter(|m| m.orbit == CensusOrbit::RankOne).count();
            let report = CensusReport {
                count: members.len(),
                orbits: vec![rank_one, members.len() - rank_one],
                members,
            };
            (to_value(&report), false)
        }
        Command::Approx {
            op,
            eps,
            construction,
            t1,
            t2,
            x1,
            x2,
            h0,
            f,
            p,
            x0,
            n,
        } => {
            let eps = *eps;
            let value = match construction {
                Construction::Tilted => {
                    let (report, theta) = lib("--eps", tilted_projection_demo(eps))?;
                    to_value(&TiltedReport { theta, report })
                }
                Construction::Functional => {
                    let f = parse_list("--f", f.as_deref().ok_or_else(|| bad("--f", "required"))?)?;
                    let p: Exponent = p
                        .as_deref()
                        .ok_or_else(|| bad("--p", "required"))?
                        .parse()
                        .map_err(|e| bad("--p", e))?;
                    to_value(&lib("--f", functional_approx_lp2(&f, p, eps))?)
                }
                Construction::Sbpbp => {
                    let x = parse_list("--x0", x0.as_deref().ok_or_else(|| bad("--x0", "required"))?)?;
                    let pt = lib("--x0", Point::new(SpaceSpec::l2(x.len()), x))?;
                    let n = n.ok_or_else(|| bad("--n", "required"))?;
                    to_value(&lib("--n", sbpbp_witness(&pt, n))?)
                }
                c => {
                    let t = read_op("--op", op.as_ref())?;
                    let r = match c {
                        Construction::Auto => auto_approx(&t, eps),
                        Construction::RankOne => rank_one_approx(&t, eps),
                        Construction::Convex => {
                            let a = read_op("--t1", t1.as_ref())?;
                            let b = read_op("--t2", t2.as_ref())?;
                            convex_witness_approx(&t, &a, &b, eps)
                        }
                        Construction::DirectSum => {
                            let a: Vec<Vec<f64>> =
                                read_json("--x1", x1.as_deref().ok_or_else(|| bad("--x1", "required"))?)?;
                            let b: Vec<Vec<f64>> =
                                read_json("--x2", x2.as_deref().ok_or_else(|| bad("--x2", "required"))?)?;
                            direct_sum_shrink_approx(&t, &a, &b, eps)
                        }
                        Construction::Linf => linf_extreme_approx(&t, eps),
                        Construction::L1 => l1_extreme_approx(&t, eps),
                        Construction::Census => linf3_l13_extreme_approx(&t, eps),
                        Construction::Hilbert => hilbert_rotate_approx(&t, eps),
                        Construction::HilbertDeclared => {
                            let b: Vec<Vec<f64>> =
                                read_json("--h0", h0.as_deref().ok_or_else(|| bad("--h0", "required"))?)?;
                            hilbert_rotate_approx_declared(&t, &b, eps)
                        }
                        _ => unreachable!("handled above"),
                    };
                    to_value(&lib("--op", r)?)
                }
            };
            (value, false)
        }
        Command::Verify { t, a, eps, trials, seed } => {
            let top: OperatorMatrix = read_json("--T", t)?;
            match a {
                Some(a) => {
                    let aop: OperatorMatrix = read_json("--A", a)?;
                    let c = lib("--A", verify_uniform_bpb(&top, &aop, *eps, res))?;
                    let failed = c.status == CertificateStatus::Falsified;
                    (to_value(&c), failed)
                }
                None => {
                    let seed = seed.ok_or_else(|| bad("--seed", "required when --A is absent"))?;
                    let out = lib("--T", is_only_approximation(&top, *eps, *trials, seed, res))?;
                    (to_value(&out), false)
                }
            }
        }
        Command::WitnessP { op } => {
            let t: OperatorMatrix = read_json("--op", op)?;
            (to_value(&lib("--op", property_p_witness(&t))?), false)
        }
        Command::Epsilon0 { p, n } => match n {
            Some(n) => {
                let e: Exponent = p.parse().map_err(|e| bad("--p", e))?;
                let s = lib("--n", SpaceSpec::new(e, *n))?;
                (to_value(&lib("--p", polyhedral_epsilon0(s))?), false)
            }
            None => {
                let p: u32 = p.parse().map_err(|e| bad("--p", e))?;
                (to_value(&lib("--p", epsilon0_lp2(p))?), false)
            }
        },
        Command::Sweep {
            domain,
            codomain,
            eps,
            trials,
            seed,
        } => {
            let x = parse_space("--domain", domain)?;
            let y = parse_space("--codomain", codomain)?;
            let eps = parse_list("--eps", eps)?;
            let r = lib("--domain", pair_property_sweep(x, y, &eps, *trials, *seed, res))?;
            let failed = !r.failures.is_empty();
            (to_value(&r), failed)
        }
        Command::Demo { seed, criterion } => {
            let mut reports = match criterion {
                Some(k) => vec![run_criterion(*k, *seed)],
                None => run_all(*seed),
            };
            if cli.no_timestamp {
                for r in &mut reports {
                    r.elapsed_ms = None;
                }
            }
            let failed = reports.iter().any(|r| !r.passed);
            (to_value(&reports), failed)
        }
    })
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Norm { .. } => "norm",
        Command::Attain { .. } => "attain",
        Command::Classify { .. } => "classify",
        Command::Isometries { .. } => "isometries",
        Command::Orbit { .. } => "orbit",
        Command::EnumerateExt { .. } => "enumerate-ext",
        Command::Approx { .. } => "approx",
        Command::Verify { .. } => "verify",
        Command::WitnessP { .. } => "witness-p",
        Command::Epsilon0 { .. } => "epsilon0",
        Command::Sweep { .. } => "sweep",
        Command::Demo { .. } => "demo",
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: invalid --threads: {e}");
            return ExitCode::from(2);
        }
    }
    let (report, failed) = match run(&cli) {
        Ok(v) => v,
        Err(e) => {
            eprintln!("error: {}", e.msg);
            return ExitCode::from(e.code);
        }
    };
    let generated_at = (!cli.no_timestamp).then(|| {
        SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0)
    });
    let envelope = Envelope {
        command: command_name(&cli.command).into(),
        generated_at,
        report,
    };
    let json = serde_json::to_string_pretty(&envelope).expect("envelope serializes");
    match &cli.output {
        Some(path) => {
            if let Err(e) = fs::write(path, json + "\n") {
                eprintln!("error: invalid --output: {}: {e}", path.display());
                return ExitCode::from(2);
            }
        }
        None => {
            // a closed pipe (e.g. `| head`) is not an error worth reporting
            if let Err(e) = writeln!(io::stdout().lock(), "{json}") {
                if e.kind() != io::ErrorKind::BrokenPipe {
                    eprintln!("error: writing report: {e}");
                    return ExitCode::from(2);
                }
            }
        }
    }
    if failed {
        ExitCode::from(1)
    } else {
        ExitCode::SUCCESS
    }
}
