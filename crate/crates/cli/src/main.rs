//! `fqq`: command-line front end for fq-quotient.
//!
//! Exit codes: 0 success or pass, 1 falsifier or not-found, 2 usage or
//! validation error (one line on stderr).

use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use fq_quotient::counting::{
    count_n_zero, count_vr_bruteforce, distance_histogram, energy_identity_check, eta_tally,
    quotient_set, vr_table, VrMethod,
};
use fq_quotient::field::{prime_power, Elem, Field, QuadraticExtension};
use fq_quotient::harness::{
    all_pairs, find_similar_configuration, finder_run_json, parse_pairs, verify_bhowmik,
    verify_main_theorem, verify_quotient_coverage, verify_quotient_trials, verify_sharpness,
    FinderOutcome,
};
use fq_quotient::io::{
    count_rows, elem_from_json, elem_to_json, load_pointset, point_to_json, CountRow, MatrixJson,
    PointSetJson,
};
use fq_quotient::linalg::{
    build_similarity_even, build_similarity_odd, enumerate_o2, sphere_points, sum_of_two_squares,
};
use fq_quotient::pointset::{gen_random_pointset, PointSet};
use fq_quotient::report::VerificationReport;

/// Seed used when `--seed` is not given.
pub const DEFAULT_SEED: u64 = 20_240_917;

#[derive(Parser, Debug)]
#[command(
    name = "fqq",
    version,
    about = "Exact distance, quotient and similarity counts over F_q^d"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    run: RunConfig,
}

#[derive(clap::Args, Debug, Clone)]
struct RunConfig {
    /// Field characteristic (use with --n).
    #[arg(long, global = true)]
    p: Option<u64>,
    /// Extension degree (default 1).
    #[arg(long, global = true)]
    n: Option<u32>,
    /// Field order shorthand, a prime power.
    #[arg(long, global = true)]
    q: Option<u64>,
    /// Dimension of the ambient space.
    #[arg(long, global = true)]
    d: Option<usize>,
    /// Size of a random point set.
    #[arg(long, global = true)]
    size: Option<u64>,
    #[arg(long, global = true, default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Ratio or level: an integer, a JSON coefficient list, or "all".
    /// Repeatable.
    #[arg(long = "r", global = true)]
    r: Vec<String>,
    #[arg(long, global = true)]
    trials: Option<u64>,
    #[arg(long, global = true)]
    k: Option<usize>,
    /// Pair set such as "1-2,2-3" (default: all pairs).
    #[arg(long, global = true)]
    pairs: Option<String>,
    /// Point set JSON file.
    #[arg(long = "in", global = true)]
    input: Option<PathBuf>,
    /// Write output here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Use the quartic brute-force V(r) instead of the histogram method.
    #[arg(long, global = true)]
    brute: bool,
    /// Write the sampled point set to this path (point-set commands only).
    #[arg(long, global = true)]
    save_set: Option<PathBuf>,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum Format {
    Json,
    Csv,
}

#[derive(Subcommand, Debug, Clone, Copy, PartialEq, Eq)]
enum Command {
    /// Modulus, generator and square statistics of F_q.
    FieldInfo,
    /// a, b with a^2 + b^2 = r.
    Sum2sq,
    /// Enumerate O(2, q).
    O2Enum,
    /// Points of F_q^d with ||v||^2 = r.
    Sphere,
    /// Distance histogram of a point set.
    Distances,
    /// Distance quotient set of a point set.
    Quotient,
    /// V(r) for given r, or the full table.
    Vr,
    /// Per-θ tallies with total and Cauchy–Schwarz checks.
    EtaCheck,
    /// Exact Σ η² = 2(q+1)|E|² + 2V(r).
    EnergyIdentity,
    /// Similarity matrix B with B^T B = rI.
    Similarity,
    /// N0, the isotropic quadruple count.
    NZero,
    /// Random trials of the V(r) >= |E|^4/(4q) bound.
    VerifyMain,
    /// Quotient-set coverage of F_q.
    VerifyQuotient,
    /// The subfield set E = F_p^2 inside F_{p^2}^2.
    Sharpness,
    /// Find k+1 points forming a configuration similar with ratio r.
    FindConfig,
    /// Random trials of the similar-configuration finder at hypothesis size.
    VerifyBhowmik,
}

/// Result of a command: JSON payload plus exit code.
struct Output {
    value: Value,
    csv: Option<Vec<CountRow>>,
    code: u8,
}

impl Output {
    fn ok(value: Value) -> Output {
        Output {
            value,
            csv: None,
            code: 0,
        }
    }

    fn report(r: &VerificationReport) -> Output {
        Output {
            value: serde_json::to_value(r).expect("reports serialize"),
            csv: None,
            code: if r.pass { 0 } else { 1 },
        }
    }
}

impl RunConfig {
    fn field(&self) -> Result<Field> {
        Ok(match (self.p, self.q) {
            (Some(_), Some(_)) => bail!("give either --p/--n or --q, not both"),
            (Some(p), None) => Field::new(p, self.n.unwrap_or(1))?,
            (None, Some(q)) => {
                if self.n.is_some() {
                    bail!("--n cannot be combined with --q");
                }
                let (p, n) = prime_power(q)?;
                Field::new(p, n)?
            }
            (None, None) => bail!("a field is required: --p [--n] or --q"),
        })
    }

    fn dim(&self) -> usize {
        self.d.unwrap_or(2)
    }

    fn parse_elem(&self, f: &Field, s: &str) -> Result<Elem> {
        let v: Value =
            serde_json::from_str(s).map_err(|_| anyhow!("cannot parse {s:?} as an element"))?;
        if f.n() > 1 {
            if let Some(i) = v.as_u64() {
                return Ok(f.elem(i)?);
            }
        }
        elem_from_json(f, &v).map_err(|e| anyhow!(e))
    }

    /// `--r` values; `all` expands to every element (or every nonzero one).
    fn ratios(&self, f: &Field, nonzero: bool) -> Result<Vec<Elem>> {
        if self.r.is_empty() {
            bail!("--r is required");
        }
        let mut out = Vec::new();
        for s in &self.r {
            if s == "all" {
                out.extend(f.elements().filter(|x| !nonzero || !x.is_zero()));
            } else {
                let x = self.parse_elem(f, s)?;
                if nonzero && x.is_zero() {
                    bail!("r must be nonzero");
                }
                out.push(x);
            }
        }
        Ok(out)
    }

    fn single_ratio(&self, f: &Field, nonzero: bool) -> Result<Elem> {
        match self.ratios(f, nonzero)?.as_slice() {
            [r] => Ok(*r),
            _ => bail!("exactly one --r value is expected here"),
        }
    }

    /// Point set from `--in`, or a seeded random sample.
    fn pointset(&self) -> Result<PointSet> {
        let e = if let Some(path) = &self.input {
            if self.p.is_some() || self.q.is_some() {
                bail!("--in carries its own field; drop --p/--q");
            }
            load_pointset(path)?
        } else {
            let f = self.field()?;
            let size = self
                .size
                .ok_or_else(|| anyhow!("--size or --in is required"))?;
            gen_random_pointset(&f, self.dim(), size as usize, self.seed)?
        };
        if let Some(path) = &self.save_set {
            fs::write(
                path,
                serde_json::to_string_pretty(&PointSetJson::from_set(&e))?,
            )
            .with_context(|| format!("writing {}", path.display()))?;
        }
        Ok(e)
    }
}

fn dispatch(cmd: Command, cfg: &RunConfig) -> Result<Output> {
    if cfg.format == Format::Csv && !matches!(cmd, Command::Distances | Command::Vr) {
        bail!("--format csv is only available for distances and vr");
    }
    match cmd {
        Command::FieldInfo => {
            let f = cfg.field()?;
            let squares = f.nonzero_elements().filter(|&x| f.is_square(x)).count();
            let mut v = json!({
                "field": f.descriptor(),
                "q": f.q(),
                "q_mod_4": f.q() % 4,
                "generator": elem_to_json(&f, f.generator()),
                "nonzero_squares": squares,
                "minus_one_is_square": f.is_square(f.neg(Elem::ONE)),
            });
            if !cfg.r.is_empty() {
                let mut rows = Vec::new();
                for x in cfg.ratios(&f, false)? {
                    rows.push(json!({
                        "x": elem_to_json(&f, x),
                        "is_square": f.is_square(x),
                        "sqrt": f.sqrt(x).ok().map(|s| elem_to_json(&f, s)),
                        "inverse": f.inv(x).ok().map(|s| elem_to_json(&f, s)),
                    }));
                }
                v["elements"] = Value::Array(rows);
            }
            Ok(Output::ok(v))
        }
        Command::Sum2sq => {
            let f = cfg.field()?;
            let mut rows = Vec::new();
            for r in cfg.ratios(&f, false)? {
                let (a, b) = sum_of_two_squares(&f, r)?;
                rows.push(json!({
                    "r": elem_to_json(&f, r),
                    "a": elem_to_json(&f, a),
                    "b": elem_to_json(&f, b),
                }));
            }
            let value = if rows.len() == 1 {
                rows.pop().unwrap()
            } else {
                Value::Array(rows)
            };
            Ok(Output::ok(value))
        }
        Command::O2Enum => {
            let f = cfg.field()?;
            let g = enumerate_o2(&f)?;
            let elements: Vec<Value> = g
                .elements
                .iter()
                .map(|m| {
                    let mj = MatrixJson::from_matrix(&f, m);
                    json!(mj.entries)
                })
                .collect();
            Ok(Output::ok(json!({
                "field": f.descriptor(),
                "order": g.len(),
                "rotations": g.rotations,
                "elements": elements,
            })))
        }
        Command::Sphere => {
            let f = cfg.field()?;
            let t = cfg.single_ratio(&f, false)?;
            let pts = sphere_points(&f, cfg.dim(), t)?;
            Ok(Output::ok(json!({
                "field": f.descriptor(),
                "d": cfg.dim(),
                "t": elem_to_json(&f, t),
                "size": pts.len(),
                "points": pts.iter().map(|p| point_to_json(&f, p)).collect::<Vec<_>>(),
            })))
        }
        Command::Distances => {
            let e = cfg.pointset()?;
            let h = distance_histogram(&e);
            let rows = count_rows(e.field(), h.entries());
            Ok(Output {
                value: json!({
                    "field": e.field().descriptor(),
                    "size": e.len(),
                    "distance_set_size": rows.len(),
                    "histogram": rows,
                }),
                csv: Some(rows),
                code: 0,
            })
        }
        Command::Quotient => {
            let e = cfg.pointset()?;
            let f = e.field();
            let delta = distance_histogram(&e).support();
            let q = quotient_set(f, &delta);
            let mut v = json!({
                "field": f.descriptor(),
                "size": e.len(),
                "distance_set": delta.iter().map(|&x| elem_to_json(f, x)).collect::<Vec<_>>(),
                "quotient_set": q.iter().flatten().map(|&x| elem_to_json(f, x)).collect::<Vec<_>>(),
                "covers_field": q.as_ref().is_some_and(|s| s.len() == f.q() as usize),
            });
            if q.is_none() {
                eprintln!("warning: distance set is {{0}}; quotient set is empty");
                v["warning"] = json!("distance set is {0}; quotient set is empty");
            }
            Ok(Output::ok(v))
        }
        Command::Vr => {
            let e = cfg.pointset()?;
            let f = e.field();
            let method = if cfg.brute {
                VrMethod::Brute
            } else {
                VrMethod::Fast
            };
            let rs = if cfg.r.is_empty() {
                f.elements().collect()
            } else {
                cfg.ratios(f, false)?
            };
            let table = vr_table(&e, method)?;
            let rows = count_rows(f, rs.iter().map(|&r| (r, table.get(r))));
            Ok(Output {
                value: json!({
                    "field": f.descriptor(),
                    "size": e.len(),
                    "method": method,
                    "table": rows,
                }),
                csv: Some(rows),
                code: 0,
            })
        }
        Command::EtaCheck => {
            let e = cfg.pointset()?;
            let f = e.field();
            let n = e.len() as u128;
            let mut ok = true;
            let mut rows = Vec::new();
            for r in cfg.ratios(f, true)? {
                let t = eta_tally(&e, r)?;
                let g = t.group_order as u128;
                let total_ok = t.total == n * n * g;
                let cs_ok = t.total * t.total <= t.energy * (f.q() as u128).pow(2) * g;
                ok &= total_ok && cs_ok;
                rows.push(json!({
                    "r": elem_to_json(f, r),
                    "group_order": t.group_order,
                    "total": t.total.to_string(),
                    "energy": t.energy.to_string(),
                    "support": t.support,
                    "cauchy_schwarz_lower": format!("{}/{}", n.pow(4) * g, (f.q() as u128).pow(2)),
                    "total_ok": total_ok,
                    "cauchy_schwarz_ok": cs_ok,
                }));
            }
            Ok(Output {
                value: json!({ "field": f.descriptor(), "size": e.len(), "pass": ok, "rows": rows }),
                csv: None,
                code: if ok { 0 } else { 1 },
            })
        }
        Command::EnergyIdentity => {
            let e = cfg.pointset()?;
            let f = e.field();
            let method = if cfg.brute {
                VrMethod::Brute
            } else {
                VrMethod::Fast
            };
            let reports = cfg
                .ratios(f, true)?
                .into_iter()
                .map(|r| energy_identity_check(&e, r, method))
                .collect::<Result<Vec<_>, _>>()?;
            if let [one] = reports.as_slice() {
                return Ok(Output::report(one));
            }
            let pass = reports.iter().all(|r| r.pass);
            Ok(Output {
                value: json!({ "pass": pass, "reports": reports }),
                csv: None,
                code: if pass { 0 } else { 1 },
            })
        }
        Command::Similarity => {
            let f = cfg.field()?;
            let r = cfg.single_ratio(&f, true)?;
            let d = cfg.dim();
            if d.is_multiple_of(2) {
                let b = build_similarity_even(&f, d, r)?;
                Ok(Output::ok(json!({
                    "r": elem_to_json(&f, r),
                    "witness": [elem_to_json(&f, b.witness.0), elem_to_json(&f, b.witness.1)],
                    "matrix": MatrixJson::from_matrix(&f, &b.matrix),
                })))
            } else {
                let qe = QuadraticExtension::new(&f)?;
                let b = build_similarity_odd(&qe, d, r)?;
                Ok(Output::ok(json!({
                    "r": elem_to_json(&f, r),
                    "witness": [elem_to_json(&f, b.witness.0), elem_to_json(&f, b.witness.1)],
                    "base_valued": b.base_valued,
                    "matrix": MatrixJson::from_matrix(qe.ext(), &b.matrix),
                })))
            }
        }
        Command::NZero => {
            let e = cfg.pointset()?;
            let f = e.field();
            let mut rows = Vec::new();
            for r in cfg.ratios(f, false)? {
                let mut row = json!({ "r": elem_to_json(f, r), "n_zero": count_n_zero(&e, r) });
                if cfg.brute {
                    row["v_r_brute"] = json!(count_vr_bruteforce(&e, r)?);
                }
                rows.push(row);
            }
            Ok(Output::ok(
                json!({ "field": f.descriptor(), "size": e.len(), "rows": rows }),
            ))
        }
        Command::VerifyMain => {
            let q = cfg.q.ok_or_else(|| anyhow!("--q is required"))?;
            if cfg.dim() != 2 {
                bail!("the bound is proven for d = 2 only");
            }
            let rep = verify_main_theorem(q, cfg.trials.unwrap_or(100), cfg.seed, cfg.size)?;
            Ok(Output::report(&rep))
        }
        Command::VerifyQuotient => {
            if cfg.input.is_some() {
                let e = cfg.pointset()?;
                return Ok(Output::report(&verify_quotient_coverage(&e)));
            }
            let f = cfg.field()?;
            let d = cfg.dim();
            let size = match cfg.size {
                Some(s) => s,
                None if d.is_multiple_of(2) => 9 * (f.q() as u64).pow(d as u32 / 2),
                None => 6 * (f.q() as u64).pow((d as u32).div_ceil(2)),
            };
            let rep =
                verify_quotient_trials(f.q() as u64, d, size, cfg.trials.unwrap_or(20), cfg.seed)?;
            Ok(Output::report(&rep))
        }
        Command::Sharpness => {
            let p = cfg.p.ok_or_else(|| anyhow!("--p is required"))?;
            Ok(Output::report(&verify_sharpness(p)?))
        }
        Command::FindConfig => {
            let e = cfg.pointset()?;
            let f = e.field();
            let r = cfg.single_ratio(f, true)?;
            let k = cfg.k.unwrap_or(1);
            let pairs = match &cfg.pairs {
                Some(s) => parse_pairs(s, k)?,
                None => all_pairs(k),
            };
            let run = find_similar_configuration(&e, r, k, Some(pairs))?;
            let found = matches!(run.outcome, FinderOutcome::Found(_));
            let mut v = finder_run_json(f, &run);
            v["field"] = json!(f.descriptor());
            v["size"] = json!(e.len());
            Ok(Output {
                value: v,
                csv: None,
                code: if found && run.averaging_ok { 0 } else { 1 },
            })
        }
        Command::VerifyBhowmik => {
            let q = cfg.q.ok_or_else(|| anyhow!("--q is required"))?;
            let f = Field::with_order(q)?;
            let rs = cfg.ratios(&f, true)?;
            let rep = verify_bhowmik(
                q,
                cfg.dim(),
                cfg.k.unwrap_or(1),
                &rs,
                cfg.trials.unwrap_or(20),
                cfg.seed,
            )?;
            Ok(Output::report(&rep))
        }
    }
}

fn render(out: &Output, format: Format) -> Result<Vec<u8>> {
    match (format, &out.csv) {
        (Format::Csv, Some(rows)) => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(["key", "count"])?;
            for row in rows {
                let key = match &row.r_or_t {
                    Value::Number(n) => n.to_string(),
                    other => other.to_string(),
                };
                w.write_record([key, row.count.to_string()])?;
            }
            Ok(w.into_inner()?)
        }
        _ => {
            let mut s = serde_json::to_string_pretty(&out.value)?;
            s.push('\n');
            Ok(s.into_bytes())
        }
    }
}

fn run(cli: &Cli) -> Result<u8> {
    let out = dispatch(cli.command, &cli.run)?;
    let bytes = render(&out, cli.run.format)?;
    match &cli.run.out {
        Some(path) => {
            fs::write(path, bytes).with_context(|| format!("writing {}", path.display()))?
        }
        None => std::io::stdout().write_all(&bytes)?,
    }
    Ok(out.code)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
