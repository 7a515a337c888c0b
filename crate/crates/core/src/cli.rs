//! Command line front end. Exit codes: 0 success, 2 parse, 3 precondition,
//! 4 certificate or budget failure.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::chain::{PolyhedralChain, ZeroChain};
use crate::error::{Error, Result};
use crate::experiments;
use crate::flat::{self, patch::current_flat_distance_upper};
use crate::functionals::phi_h;
use crate::hfunc::HSpec;
use crate::rectifiable::{poly_approximate, RectifiableCurrent};
use crate::slicing::{self, MPlane};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutFormat {
    Csv,
    Json,
}

#[derive(Debug, Parser)]
#[command(name = "hmass", version, about = "H-mass, flat norms and polyhedral approximation of currents")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args, Clone, Default)]
pub struct GlobalArgs {
    /// Seed for every random stream.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Tolerance for numerical verdicts.
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    /// Output format.
    #[arg(long, global = true, value_enum)]
    pub out: Option<OutFormat>,
    /// JSON file with defaults for seed, tol and out; flags take precedence.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    seed: Option<u64>,
    tol: Option<f64>,
    out: Option<OutFormat>,
}

#[derive(Debug, Clone, Copy)]
pub struct Settings {
    pub seed: u64,
    pub tol: f64,
    pub out: OutFormat,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print mass and Phi_H of a chain.
    Eval {
        chain: PathBuf,
        /// H as a JSON file or inline: abs, power:A, affine:B, indicator.
        #[arg(long)]
        h: String,
    },
    /// Table of the counterexample sequence P_i.
    Counterexample {
        #[arg(long)]
        h: String,
        #[arg(long, default_value_t = 14)]
        i_max: u32,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Polyhedral approximation with certificate and the liminf harness.
    Relax {
        patch: PathBuf,
        #[arg(long)]
        h: String,
        #[arg(long)]
        eps: f64,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Polyhedral approximation only; writes the chain as JSON.
    Approx {
        patch: PathBuf,
        #[arg(long)]
        h: String,
        #[arg(long)]
        eps: f64,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Monte-Carlo integral-geometric estimate of M_H.
    Intgeo {
        chain: PathBuf,
        #[arg(long)]
        h: String,
        #[arg(long, default_value_t = 100_000)]
        samples: usize,
        /// Calibrate c(n,m) on the unit cube first and report c * estimate.
        #[arg(long)]
        calibrate: bool,
        /// Write the per-sample values as CSV.
        #[arg(long)]
        dump: Option<PathBuf>,
    },
    /// 0-dimensional slice of a chain.
    Slice {
        chain: PathBuf,
        /// `random:<seed>` or `axes` (first m coordinate axes).
        #[arg(long, default_value = "axes")]
        plane: String,
        /// Base point coordinates in the plane, comma separated.
        #[arg(long, allow_hyphen_values = true)]
        y: String,
    },
    /// Flat norm computations.
    Flat {
        #[command(subcommand)]
        which: FlatCommand,
    },
    /// Lower semicontinuity check on 0-chain sequences.
    LscCheck {
        #[arg(long, default_value = "power:0.5")]
        h: String,
        /// Number of randomized colliding-atom instances.
        #[arg(long, default_value_t = 50)]
        random: u64,
    },
}

#[derive(Debug, Subcommand)]
pub enum FlatCommand {
    /// Exact flat norm of a 0-chain.
    Zero { chain: PathBuf },
    /// Grid upper bound on the flat norm of an m-chain.
    Upper {
        chain: PathBuf,
        #[arg(long, default_value_t = 2)]
        level: u32,
    },
    /// Upper bound on the flat distance between two chains, or a patch and a chain.
    Dist {
        a: PathBuf,
        b: PathBuf,
        #[arg(long, default_value_t = 2)]
        level: u32,
    },
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

fn write_or_print(path: Option<&Path>, text: &str, out: &mut dyn Write) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| Error::Io(format!("{}: {e}", p.display()))),
        None => out.write_all(text.as_bytes()).map_err(|e| Error::Io(e.to_string())),
    }
}

/// H from a JSON file or an inline form.
pub fn parse_h(arg: &str) -> Result<HSpec> {
    let p = Path::new(arg);
    if p.is_file() {
        return HSpec::from_json(&read(p)?);
    }
    let bad = || Error::Parse(format!("{arg:?} is neither an H file nor abs|power:A|affine:B|indicator"));
    let num = |s: &str| s.parse::<f64>().map_err(|_| bad());
    match arg.split_once(':') {
        None if arg == "abs" => Ok(HSpec::abs()),
        None if arg == "indicator" => Ok(HSpec::indicator()),
        Some(("power", a)) => HSpec::power(num(a)?),
        Some(("affine", b)) | Some(("affine_indicator", b)) => HSpec::affine_indicator(num(b)?),
        _ => Err(bad()),
    }
}

/// Twelve significant digits, printed in the shortest form that round-trips.
pub fn sig12(x: f64) -> String {
    let rounded: f64 = format!("{x:.11e}").parse().unwrap_or(x);
    format!("{rounded:?}")
}

fn settings(g: &GlobalArgs) -> Result<Settings> {
    let cfg: ConfigFile = match &g.config {
        Some(p) => serde_json::from_str(&read(p)?)?,
        None => ConfigFile::default(),
    };
    Ok(Settings {
        seed: g.seed.or(cfg.seed).unwrap_or(0),
        tol: g.tol.or(cfg.tol).unwrap_or(1e-9),
        out: g.out.or(cfg.out).unwrap_or(OutFormat::Csv),
    })
}

fn load_chain(p: &Path) -> Result<PolyhedralChain> {
    PolyhedralChain::from_json(&read(p)?)
}

/// Either a chain file or a patch file (recognised by its `graph` field).
enum Operand {
    Chain(PolyhedralChain),
    Patch(RectifiableCurrent),
}

fn load_operand(p: &Path) -> Result<Operand> {
    let text = read(p)?;
    let v: serde_json::Value = serde_json::from_str(&text)?;
    if v.get("graph").is_some() || v.get("patches").is_some() {
        Ok(Operand::Patch(RectifiableCurrent::from_json(&text, p.parent())?))
    } else {
        Ok(Operand::Chain(PolyhedralChain::from_json_value(serde_json::from_value(v)?)?))
    }
}

fn to_json<T: Serialize>(v: &T) -> String {
    serde_json::to_string_pretty(v).expect("report serializes") + "\n"
}

pub fn run(cli: Cli, out: &mut dyn Write) -> Result<()> {
    let s = settings(&cli.global)?;
    match cli.command {
        Command::Eval { chain, h } => {
            let h = parse_h(&h)?;
            let p = load_chain(&chain)?;
            let mass = p.mass()?;
            let phi = phi_h(&p, &h)?;
            let text = match s.out {
                OutFormat::Json => to_json(&json!({ "mass": mass, "phi_h": phi })),
                OutFormat::Csv => format!("mass={} phi_h={}\n", sig12(mass), sig12(phi)),
            };
            write_or_print(None, &text, out)
        }
        Command::Counterexample { h, i_max, output } => {
            let rows = experiments::counterexample(&parse_h(&h)?, i_max)?;
            let text = match s.out {
                OutFormat::Json => to_json(&rows),
                OutFormat::Csv => experiments::counterexample_csv(&rows),
            };
            write_or_print(output.as_deref(), &text, out)
        }
        Command::Relax { patch, h, eps, output } => {
            let r = RectifiableCurrent::from_file(&patch)?;
            let (_, o) = experiments::relax(&r, &parse_h(&h)?, eps)?;
            let text = match s.out {
                OutFormat::Json => to_json(&o),
                OutFormat::Csv => {
                    let mut t = String::from("quantity,value\n");
                    for (k, v) in [
                        ("h_mass_target", o.h_mass_target),
                        ("phi_h", o.phi_h),
                        ("mass_target", o.mass_target),
                        ("mass_p", o.mass_p),
                        ("flat_upper", o.flat_upper),
                        ("gap", o.phi_h - o.h_mass_target),
                        ("tail_gap", o.liminf.tail_gap.unwrap_or(f64::NAN)),
                    ] {
                        t.push_str(&format!("{k},{v:e}\n"));
                    }
                    t.push_str(&format!("verdict,{}\n", if o.verdict { "pass" } else { "fail" }));
                    t.push_str(&format!("lsc,{}\n", if o.liminf.lsc_holds() { "pass" } else { "fail" }));
                    t
                }
            };
            write_or_print(output.as_deref(), &text, out)?;
            if o.verdict {
                Ok(())
            } else {
                Err(Error::Certificate(format!("|Phi_H(P) - M_H(R)| = {:e} exceeds {eps:e}", (o.phi_h - o.h_mass_target).abs())))
            }
        }
        Command::Approx { patch, h, eps, output } => {
            let r = RectifiableCurrent::from_file(&patch)?;
            let (p, cert) = poly_approximate(&r, eps, &parse_h(&h)?)?;
            match output {
                Some(path) => {
                    write_or_print(Some(&path), &p.to_json(), out)?;
                    write_or_print(None, &to_json(&cert), out)
                }
                None => write_or_print(None, &to_json(&json!({ "chain": p.to_json_value(), "certificate": cert })), out),
            }
        }
        Command::Intgeo { chain, h, samples, calibrate, dump } => {
            let p = load_chain(&chain)?;
            let h = parse_h(&h)?;
            let cal = if calibrate {
                Some(slicing::calibrate_constant(p.ambient_dim(), p.dim(), samples, s.seed.wrapping_add(1))?)
            } else {
                None
            };
            let est = slicing::intgeo_estimate(&p, &h, samples, s.seed, cal.as_ref().map(|c| (c.c, c.std_error)))?;
            if let Some(d) = dump {
                let mut t = String::from("sample,value\n");
                for (i, v) in est.values.iter().enumerate() {
                    t.push_str(&format!("{i},{v:e}\n"));
                }
                write_or_print(Some(&d), &t, out)?;
            }
            let text = match s.out {
                OutFormat::Json => to_json(&json!({ "estimate": est, "calibration": cal.map(|c| json!({"c": c.c, "std_error": c.std_error, "ci": c.ci})) })),
                OutFormat::Csv => {
                    let mut t = format!("raw,std_error,samples,rejections\n{:e},{:e},{},{}\n", est.raw, est.std_error, est.samples, est.rejections);
                    if let (Some(c), Some((v, se))) = (cal, est.calibrated) {
                        t.push_str(&format!("c,c_std_error,calibrated,calibrated_std_error\n{:e},{:e},{v:e},{se:e}\n", c.c, c.std_error));
                    }
                    t
                }
            };
            write_or_print(None, &text, out)
        }
        Command::Slice { chain, plane, y } => {
            let p = load_chain(&chain)?;
            let v = match plane.split_once(':') {
                Some(("random", seed)) => slicing::haar_sample_seeded(
                    p.ambient_dim(),
                    p.dim(),
                    seed.parse().map_err(|_| Error::Parse(format!("bad plane seed {seed:?}")))?,
                )?,
                None if plane == "axes" => MPlane::coordinate(p.ambient_dim(), p.dim()),
                _ => return Err(Error::Parse(format!("plane must be axes or random:<seed>, got {plane:?}"))),
            };
            let y: Vec<f64> = y
                .split(',')
                .map(|t| t.trim().parse::<f64>().map_err(|_| Error::Parse(format!("bad coordinate {t:?}"))))
                .collect::<Result<_>>()?;
            let r = slicing::slice_chain(&p, &v, &y)?;
            let atoms: Vec<_> = r.zero_chain.atoms().iter().map(|(x, w)| json!({ "point": x.to_vec(), "multiplicity": w })).collect();
            let text = match s.out {
                OutFormat::Json => to_json(&json!({ "plane": v.basis(), "y": r.y, "atoms": atoms })),
                OutFormat::Csv => {
                    let mut t = String::from("point,multiplicity\n");
                    for (x, w) in r.zero_chain.atoms() {
                        let coords: Vec<String> = x.iter().map(|c| format!("{c:e}")).collect();
                        t.push_str(&format!("{},{w:e}\n", coords.join(" ")));
                    }
                    t
                }
            };
            write_or_print(None, &text, out)
        }
        Command::Flat { which } => {
            let report = match which {
                FlatCommand::Zero { chain } => {
                    let z: ZeroChain = load_chain(&chain)?.to_zero_chain()?;
                    let v = flat::flat_zero(&z)?;
                    json!({ "value": v, "certificate": { "snap_cost": 0.0, "lp_status": "optimal", "exact": true } })
                }
                FlatCommand::Upper { chain, level } => {
                    let c = flat::simplicial_flat_upper(&load_chain(&chain)?, level)?;
                    json!({ "value": c.value, "certificate": c })
                }
                FlatCommand::Dist { a, b, level } => {
                    let c = match (load_operand(&a)?, load_operand(&b)?) {
                        (Operand::Chain(x), Operand::Chain(y)) => flat::flat_distance_upper(&x, &y, level)?,
                        (Operand::Patch(r), Operand::Chain(p)) | (Operand::Chain(p), Operand::Patch(r)) => {
                            current_flat_distance_upper(&r, &p, level)?
                        }
                        (Operand::Patch(_), Operand::Patch(_)) => {
                            return Err(Error::Unsupported("flat distance between two patches".into()))
                        }
                    };
                    json!({ "value": c.value, "certificate": c })
                }
            };
            let text = match s.out {
                OutFormat::Json => to_json(&report),
                OutFormat::Csv => format!(
                    "value,snap_cost,lp_status\n{:e},{:e},{}\n",
                    report["value"].as_f64().unwrap_or(f64::NAN),
                    report["certificate"]["snap_cost"].as_f64().unwrap_or(0.0),
                    report["certificate"]["lp_status"].as_str().unwrap_or("")
                ),
            };
            write_or_print(None, &text, out)
        }
        Command::LscCheck { h, random } => {
            let h = parse_h(&h)?;
            let mut seqs = experiments::shipped_lsc_sequences()?;
            for k in 0..random {
                seqs.push(experiments::random_colliding_sequence(s.seed, k)?);
            }
            let mut rows = Vec::new();
            let mut all = true;
            for z in &seqs {
                let r = slicing::lsc_slice_check(&z.sequence, &z.target, &h, s.tol)?;
                all &= r.passed;
                rows.push((z.name.clone(), r));
            }
            let text = match s.out {
                OutFormat::Json => to_json(&rows.iter().map(|(n, r)| json!({ "name": n, "report": r })).collect::<Vec<_>>()),
                OutFormat::Csv => {
                    let mut t = String::from("name,target_h_mass,tail_min_h_mass,flat_last,flat_converging,passed\n");
                    for (n, r) in &rows {
                        t.push_str(&format!(
                            "{n},{:e},{:e},{:e},{},{}\n",
                            r.target_h_mass,
                            r.tail_min_h_mass,
                            r.flat_distances.last().copied().unwrap_or(0.0),
                            r.flat_converging,
                            r.passed
                        ));
                    }
                    t
                }
            };
            write_or_print(None, &text, out)?;
            if all {
                Ok(())
            } else {
                Err(Error::Certificate("lower semicontinuity check failed".into()))
            }
        }
    }
}

/// Parse the process arguments, run, and exit with the documented code.
pub fn main() {
    let cli = Cli::parse();
    let stdout = std::io::stdout();
    let mut lock = stdout.lock();
    let code = match run(cli, &mut lock) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    };
    let _ = lock.flush();
    std::process::exit(code);
}
