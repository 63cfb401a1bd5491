//! Theorem-level verifiers and the similar-configuration finder.

use std::collections::{BTreeMap, HashMap};
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};
use thiserror::Error;

use crate::counting::{
    count_vr_bruteforce, distance_histogram, distance_set, quotient_set, vr_from_histogram,
    CountingError, BRUTE_FORCE_GUARD,
};
use crate::field::{prime_power, Elem, Field, FieldError, QuadraticExtension};
use crate::io::{elem_to_json, point_to_json, MatrixJson, PointSetJson};
use crate::linalg::{
    build_similarity_even, build_similarity_odd, dist_sq, LinalgError, Point, SimilarityMatrix,
};
use crate::pointset::{random_pointset, trial_rng, PointSet, PointSetError};
use crate::report::{Ratio, VerificationReport};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum HarnessError {
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Counting(#[from] CountingError),
    #[error(transparent)]
    PointSet(#[from] PointSetError),
    #[error("q = {0} must be a prime power congruent to 3 mod 4")]
    NotThreeModFour(u64),
    #[error("set size {size} exceeds q^d = {space}")]
    SizeExceedsSpace { size: u64, space: u64 },
    #[error("hypothesis size {size} exceeds q^d = {space}; no such set exists")]
    Unsatisfiable { size: u64, space: u64 },
    #[error("p = {0}: p^4 exceeds the enumeration bound")]
    SubfieldTooLarge(u64),
    #[error("dimension {0} is not supported here")]
    Dimension(usize),
    #[error("k must be at least 1")]
    ZeroK,
    #[error("invalid pair set: {0}")]
    BadPairs(String),
    #[error("ratio r must be nonzero")]
    ZeroRatio,
    #[error("internal check failed: {0}")]
    Internal(String),
}

/// Smallest `s` with `s^2 >= 2 q^2`, i.e. `ceil(sqrt(2) q)`.
pub fn min_main_size(q: u64) -> u64 {
    let target = 2 * (q as u128).pow(2);
    let mut s = (std::f64::consts::SQRT_2 * q as f64).floor() as u128;
    while s * s < target {
        s += 1;
    }
    while s > 0 && (s - 1) * (s - 1) >= target {
        s -= 1;
    }
    s as u64
}

/// `E = (F_p)^2` embedded in `F_{p^2}^2`, of size `p^2 = q`.
pub fn gen_subfield_example(p: u64) -> Result<(PointSet, QuadraticExtension), HarnessError> {
    if p.checked_pow(4)
        .is_none_or(|v| v > crate::field::MAX_FIELD_SIZE)
    {
        return Err(HarnessError::SubfieldTooLarge(p));
    }
    let base = Field::new(p, 1)?;
    let qe = QuadraticExtension::new(&base)?;
    let points: Vec<Point> = base
        .elements()
        .flat_map(|a| base.elements().map(move |b| (a, b)))
        .map(|(a, b)| vec![qe.embed(a), qe.embed(b)])
        .collect();
    let e = PointSet::new(qe.ext(), 2, points)?;
    Ok((e, qe))
}

/// `|E| = q` and `|Δ(E)| = p` for the subfield set, with `Δ(E)` inside the
/// embedded prime field.
pub fn verify_sharpness(p: u64) -> Result<VerificationReport, HarnessError> {
    let start = Instant::now();
    let (e, qe) = gen_subfield_example(p)?;
    let ext = qe.ext();
    let delta = distance_set(&e);
    let in_subfield = delta.iter().all(|&t| qe.project(t).is_some());
    let mut report = VerificationReport::new("sharpness")
        .param("p", p)
        .param("q", ext.q());
    report.observe(delta.len() as u64);
    report.detail("set_size", e.len());
    report.detail("distance_set_size", delta.len());
    report.detail(
        "distance_set",
        Value::Array(delta.iter().map(|&t| elem_to_json(ext, t)).collect()),
    );
    report
        .flags
        .insert("distances_in_subfield".into(), in_subfield);
    report.bound = Some(Ratio::new(p as u128, 1).to_string());
    if e.len() as u64 != ext.q() as u64 || delta.len() as u64 != p || !in_subfield {
        report.fail(PointSetJson::from_set(&e));
    }
    report.elapsed_ms = start.elapsed().as_millis() as u64;
    Ok(report)
}

fn field_three_mod_four(q: u64) -> Result<Field, HarnessError> {
    let (p, n) = prime_power(q).map_err(|_| HarnessError::NotThreeModFour(q))?;
    if q % 4 != 3 {
        return Err(HarnessError::NotThreeModFour(q));
    }
    Ok(Field::new(p, n)?)
}

struct MainTrial {
    min_v: u64,
    max_v: u64,
    theorem_ok: bool,
    abstract_ok: bool,
    proof_ok: bool,
    failing_r: Option<Elem>,
    cross_checked: bool,
    set: PointSet,
}

/// Samples `E ⊂ F_q^2` at the hypothesis size and checks
/// `4q V(r) >= |E|^4` for every nonzero `r`, with exact integers.
///
/// The abstract's `|E|^4 / 2q` and the `(q+1)|E|^4 / 4q^2` figure are
/// tallied as flags only.
pub fn verify_main_theorem(
    q: u64,
    trials: u64,
    seed: u64,
    size: Option<u64>,
) -> Result<VerificationReport, HarnessError> {
    let start = Instant::now();
    let f = field_three_mod_four(q)?;
    let size = size.unwrap_or_else(|| min_main_size(q));
    let space = q * q;
    if size > space {
        return Err(HarnessError::SizeExceedsSpace { size, space });
    }
    let n4 = (size as u128).pow(4);
    let q128 = q as u128;

    let results: Vec<MainTrial> = (0..trials)
        .into_par_iter()
        .map(|t| -> Result<MainTrial, HarnessError> {
            let e = random_pointset(&f, 2, size as usize, &mut trial_rng(seed, t))?;
            let h = distance_histogram(&e);
            let cross = t % 10 == 0 && n4 <= BRUTE_FORCE_GUARD;
            let mut tr = MainTrial {
                min_v: u64::MAX,
                max_v: 0,
                theorem_ok: true,
                abstract_ok: true,
                proof_ok: true,
                failing_r: None,
                cross_checked: cross,
                set: e,
            };
            for r in f.nonzero_elements() {
                let v = vr_from_histogram(&f, &h, r);
                if cross && count_vr_bruteforce(&tr.set, r)? != v {
                    return Err(HarnessError::Internal(format!(
                        "fast and brute-force V({r}) disagree in trial {t}"
                    )));
                }
                let v128 = v as u128;
                tr.min_v = tr.min_v.min(v);
                tr.max_v = tr.max_v.max(v);
                if 4 * q128 * v128 < n4 {
                    tr.theorem_ok = false;
                    tr.failing_r.get_or_insert(r);
                }
                tr.abstract_ok &= 2 * q128 * v128 >= n4;
                tr.proof_ok &= 4 * q128 * q128 * v128 >= (q128 + 1) * n4;
            }
            Ok(tr)
        })
        .collect::<Result<_, _>>()?;

    let hypothesis = (size as u128).pow(2) >= 2 * q128 * q128;
    let mut report = VerificationReport::new("main_result")
        .param("q", q)
        .param("d", 2)
        .param("size", size)
        .param("trials", trials)
        .param("seed", seed)
        .param("r_range", "all nonzero");
    report.bound = Some(Ratio::new(n4, 4 * q128).to_string());
    report.flags.insert("hypothesis_met".into(), hypothesis);
    let mut abstract_trials = 0u64;
    let mut proof_trials = 0u64;
    let mut cross_checked = 0u64;
    let mut failures = Vec::new();
    for (t, tr) in results.iter().enumerate() {
        if tr.min_v <= tr.max_v {
            report.observe(tr.min_v);
            report.observe(tr.max_v);
        }
        abstract_trials += tr.abstract_ok as u64;
        proof_trials += tr.proof_ok as u64;
        cross_checked += tr.cross_checked as u64;
        if !tr.theorem_ok {
            failures.push(t);
            if report.witness.is_none() {
                report.detail(
                    "witness_r",
                    elem_to_json(&f, tr.failing_r.expect("set on failure")),
                );
                report.detail("witness_trial", t);
            }
            report.fail(PointSetJson::from_set(&tr.set));
        }
    }
    report
        .flags
        .insert("abstract_2q".into(), abstract_trials == trials);
    report
        .flags
        .insert("proof_qplus1".into(), proof_trials == trials);
    report.detail("abstract_2q_bound", Ratio::new(n4, 2 * q128).to_string());
    report.detail("abstract_2q_trials_held", abstract_trials);
    report.detail(
        "proof_qplus1_bound",
        Ratio::new((q128 + 1) * n4, 4 * q128 * q128).to_string(),
    );
    report.detail("proof_qplus1_trials_held", proof_trials);
    report.detail("brute_force_cross_checked_trials", cross_checked);
    report.detail("failing_trials", failures);
    report.elapsed_ms = start.elapsed().as_millis() as u64;
    Ok(report)
}

/// Whether `Δ(E)/Δ(E)` covers `F_q` (even `d`) or contains every square of
/// `F_q` (odd `d`, read as the squares of the field; an interpretation).
pub fn verify_quotient_coverage(e: &PointSet) -> VerificationReport {
    let start = Instant::now();
    let f = e.field();
    let d = e.dim();
    let q = f.q() as u128;
    let delta = distance_set(e);
    let quotient = quotient_set(f, &delta);
    let (target, hyp_size): (Vec<Elem>, u128) = if d.is_multiple_of(2) {
        (f.elements().collect(), 9 * q.pow(d as u32 / 2))
    } else {
        (
            f.elements().filter(|&x| f.is_square(x)).collect(),
            6 * q.pow((d as u32).div_ceil(2)),
        )
    };
    let missing: Vec<Elem> = match &quotient {
        Some(qs) => target.into_iter().filter(|x| !qs.contains(x)).collect(),
        None => target,
    };
    let mut report = VerificationReport::new("quotient_coverage")
        .param("q", f.q())
        .param("d", d)
        .param("size", e.len())
        .param(
            "target",
            if d.is_multiple_of(2) {
                "F_q"
            } else {
                "squares of F_q (interpretation)"
            },
        );
    report.bound = Some(Ratio::new(hyp_size, 1).to_string());
    report
        .flags
        .insert("hypothesis_met".into(), e.len() as u128 >= hyp_size);
    report
        .flags
        .insert("quotient_defined".into(), quotient.is_some());
    let qsize = quotient.as_ref().map_or(0, |s| s.len());
    report.observe(qsize as u64);
    report.detail("distance_set_size", delta.len());
    report.detail("quotient_size", qsize);
    report.detail(
        "missing",
        Value::Array(missing.iter().map(|&x| elem_to_json(f, x)).collect()),
    );
    if quotient.is_none() {
        report.detail("warning", "distance set is {0}; quotient set is empty");
    }
    if !missing.is_empty() {
        report.fail(PointSetJson::from_set(e));
    }
    report.elapsed_ms = start.elapsed().as_millis() as u64;
    report
}

/// Runs [`verify_quotient_coverage`] on `trials` seeded random sets.
pub fn verify_quotient_trials(
    q: u64,
    d: usize,
    size: u64,
    trials: u64,
    seed: u64,
) -> Result<VerificationReport, HarnessError> {
    let start = Instant::now();
    let f = Field::with_order(q)?;
    let per: Vec<VerificationReport> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let e = random_pointset(&f, d, size as usize, &mut trial_rng(seed, t))?;
            Ok(verify_quotient_coverage(&e))
        })
        .collect::<Result<_, HarnessError>>()?;
    let mut report = VerificationReport::new("quotient_coverage")
        .param("q", q)
        .param("d", d)
        .param("size", size)
        .param("trials", trials)
        .param("seed", seed);
    report.bound = per.first().and_then(|r| r.bound.clone());
    report.flags.insert(
        "hypothesis_met".into(),
        per.iter().all(|r| r.flags["hypothesis_met"]),
    );
    let mut covered = 0u64;
    for (t, r) in per.into_iter().enumerate() {
        if let Some(v) = r.min_observed {
            report.observe(v);
        }
        if r.pass {
            covered += 1;
        } else {
            if report.witness.is_none() {
                report.detail("witness_trial", t);
                report.detail("missing", r.details["missing"].clone());
            }
            report.fail(r.witness.expect("failing reports carry a witness"));
        }
    }
    report.detail("covered_trials", covered);
    report.elapsed_ms = start.elapsed().as_millis() as u64;
    Ok(report)
}

/// Pairs `(i, j)` with `1 <= i < j <= k + 1`.
pub type PairSet = Vec<(usize, usize)>;

pub fn all_pairs(k: usize) -> PairSet {
    (1..=k + 1)
        .flat_map(|i| (i + 1..=k + 1).map(move |j| (i, j)))
        .collect()
}

/// Parses `"1-2,2-3"`.
pub fn parse_pairs(s: &str, k: usize) -> Result<PairSet, HarnessError> {
    let mut out = Vec::new();
    for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let (a, b) = part
            .split_once('-')
            .ok_or_else(|| HarnessError::BadPairs(format!("{part:?} is not of the form i-j")))?;
        let i: usize = a
            .trim()
            .parse()
            .map_err(|_| HarnessError::BadPairs(part.into()))?;
        let j: usize = b
            .trim()
            .parse()
            .map_err(|_| HarnessError::BadPairs(part.into()))?;
        out.push((i, j));
    }
    validate_pairs(&out, k)?;
    Ok(out)
}

fn validate_pairs(pairs: &[(usize, usize)], k: usize) -> Result<(), HarnessError> {
    if pairs.is_empty() {
        return Err(HarnessError::BadPairs("pair set must be non-empty".into()));
    }
    if let Some(&(i, j)) = pairs
        .iter()
        .find(|&&(i, j)| !(1 <= i && i < j && j <= k + 1))
    {
        return Err(HarnessError::BadPairs(format!(
            "({i}, {j}) violates 1 <= i < j <= {}",
            k + 1
        )));
    }
    Ok(())
}

/// `k + 1` points `xs` and `ys` of `E` with
/// `||ys_i - ys_j||^2 = r ||xs_i - xs_j||^2` for every pair.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SimilarConfiguration {
    pub k: usize,
    pub pairs: PairSet,
    pub ratio: Elem,
    pub xs: Vec<Point>,
    pub ys: Vec<Point>,
    /// Translation `a` with `B xs_i = ys_i + a`, over the working field
    /// (the base field for even `d`, `F_{q^2}` for odd `d`).
    pub translation: Point,
    pub similarity: SimilarityMatrix,
    /// `|BE ∩ (E + a)|` for the chosen `a`.
    pub multiplicity: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FinderOutcome {
    Found(SimilarConfiguration),
    NotFound { best_multiplicity: u64 },
}

/// Result of a finder run together with the averaging-bound check.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FinderRun {
    pub outcome: FinderOutcome,
    pub max_multiplicity: u64,
    /// `|E|^2 / q^d` (even `d`) or `|E|^2 / q^{d+1}` (odd `d`).
    pub averaging_bound: Ratio,
    pub averaging_ok: bool,
    /// Whether translations live in `F_q^{d-1} x F_{q^2}` (odd `d`).
    pub uses_extension: bool,
    /// Field of `B` and the translation.
    pub work_field: Field,
}

/// Checks a configuration against `E` with norms only; `B` is never used.
pub fn check_configuration(
    e: &PointSet,
    r: Elem,
    cfg: &SimilarConfiguration,
) -> Result<(), String> {
    let f = e.field();
    let m = cfg.k + 1;
    if cfg.xs.len() != m || cfg.ys.len() != m {
        return Err(format!("expected {m} points on each side"));
    }
    for p in cfg.xs.iter().chain(&cfg.ys) {
        if !e.contains(p) {
            return Err(format!("{p:?} is not in E"));
        }
    }
    for i in 0..m {
        for j in i + 1..m {
            if cfg.xs[i] == cfg.xs[j] || cfg.ys[i] == cfg.ys[j] {
                return Err(format!("points {} and {} coincide", i + 1, j + 1));
            }
            let lhs = dist_sq(f, &cfg.ys[i], &cfg.ys[j]);
            let rhs = f.mul(r, dist_sq(f, &cfg.xs[i], &cfg.xs[j]));
            if lhs != rhs {
                return Err(format!(
                    "pair ({}, {}): ||y_i - y_j||^2 = {lhs} but r ||x_i - x_j||^2 = {rhs}",
                    i + 1,
                    j + 1
                ));
            }
        }
    }
    Ok(())
}

/// Constructive search for a similar configuration: over the translations
/// `a = Bz - y` (`z, y in E`) pick the one of maximal multiplicity, then
/// read off `k + 1` points of `BE ∩ (E + a)`.
pub fn find_similar_configuration(
    e: &PointSet,
    r: Elem,
    k: usize,
    pairs: Option<PairSet>,
) -> Result<FinderRun, HarnessError> {
    if k == 0 {
        return Err(HarnessError::ZeroK);
    }
    if r.is_zero() {
        return Err(HarnessError::ZeroRatio);
    }
    let pairs = match pairs {
        Some(p) => {
            validate_pairs(&p, k)?;
            p
        }
        None => all_pairs(k),
    };
    let base = e.field();
    let d = e.dim();
    let q = base.q() as u128;

    let (work, embedded, sim, qe) = if d.is_multiple_of(2) {
        let sim = build_similarity_even(base, d, r)?;
        (base.clone(), e.points().to_vec(), sim, None)
    } else {
        if d < 3 {
            return Err(HarnessError::Dimension(d));
        }
        let qe = QuadraticExtension::new(base)?;
        let sim = build_similarity_odd(&qe, d, r)?;
        let pts: Vec<Point> = e
            .points()
            .iter()
            .map(|p| p.iter().map(|&c| qe.embed(c)).collect())
            .collect();
        (qe.ext().clone(), pts, sim, Some(qe))
    };
    let b = &sim.matrix;
    let images: Vec<Point> = embedded.iter().map(|z| b.apply(&work, z)).collect();

    let mut counts: HashMap<Point, u64> = HashMap::new();
    for x in &images {
        for y in &embedded {
            let a: Point = x.iter().zip(y).map(|(&u, &v)| work.sub(u, v)).collect();
            *counts.entry(a).or_insert(0) += 1;
        }
    }
    let (best_a, best) = counts
        .into_iter()
        .max_by(|(a1, c1), (a2, c2)| c1.cmp(c2).then_with(|| a2.cmp(a1)))
        .expect("E is non-empty");

    let exponent = if qe.is_some() { d as u32 + 1 } else { d as u32 };
    let n = e.len() as u128;
    let averaging_bound = Ratio::new(n * n, q.pow(exponent));
    let averaging_ok = averaging_bound.le_int(best as u128);

    let outcome = if (best as usize) < k + 1 {
        FinderOutcome::NotFound {
            best_multiplicity: best,
        }
    } else {
        let index: HashMap<&Point, usize> =
            embedded.iter().enumerate().map(|(i, p)| (p, i)).collect();
        let mut xs = Vec::with_capacity(k + 1);
        let mut ys = Vec::with_capacity(k + 1);
        for (zi, x) in images.iter().enumerate() {
            let y: Point = x
                .iter()
                .zip(&best_a)
                .map(|(&u, &v)| work.sub(u, v))
                .collect();
            if let Some(&yi) = index.get(&y) {
                xs.push(e.points()[zi].clone());
                ys.push(e.points()[yi].clone());
                if xs.len() == k + 1 {
                    break;
                }
            }
        }
        let cfg = SimilarConfiguration {
            k,
            pairs,
            ratio: r,
            xs,
            ys,
            translation: best_a,
            similarity: sim,
            multiplicity: best,
        };
        check_configuration(e, r, &cfg).map_err(HarnessError::Internal)?;
        FinderOutcome::Found(cfg)
    };
    Ok(FinderRun {
        outcome,
        max_multiplicity: best,
        averaging_bound,
        averaging_ok,
        uses_extension: qe.is_some(),
        work_field: work,
    })
}

/// JSON view of a finder run. `base` is the field of `E`; `work` is the
/// field `B` and the translation live in.
pub fn finder_run_json(base: &Field, run: &FinderRun) -> Value {
    let work = &run.work_field;
    let mut out = json!({
        "max_multiplicity": run.max_multiplicity,
        "averaging_bound": run.averaging_bound.to_string(),
        "averaging_ok": run.averaging_ok,
        "translation_space": if run.uses_extension { "F_q^(d-1) x F_q^2" } else { "F_q^d" },
    });
    match &run.outcome {
        FinderOutcome::NotFound { best_multiplicity } => {
            out["found"] = json!(false);
            out["best_multiplicity"] = json!(best_multiplicity);
        }
        FinderOutcome::Found(cfg) => {
            out["found"] = json!(true);
            out["k"] = json!(cfg.k);
            out["pairs"] = json!(cfg.pairs);
            out["r"] = elem_to_json(base, cfg.ratio);
            out["xs"] = Value::Array(cfg.xs.iter().map(|p| point_to_json(base, p)).collect());
            out["ys"] = Value::Array(cfg.ys.iter().map(|p| point_to_json(base, p)).collect());
            out["translation"] = point_to_json(work, &cfg.translation);
            out["matrix"] =
                serde_json::to_value(MatrixJson::from_matrix(work, &cfg.similarity.matrix))
                    .expect("matrices serialize");
            out["multiplicity"] = json!(cfg.multiplicity);
        }
    }
    out
}

/// Hypothesis size `2k q^{d/2}` (even `d`) or `2k q^{(d+1)/2}` (odd `d`).
pub fn bhowmik_size(q: u64, d: usize, k: usize) -> u128 {
    let e = if d.is_multiple_of(2) {
        d / 2
    } else {
        d.div_ceil(2)
    };
    2 * k as u128 * (q as u128).pow(e as u32)
}

#[derive(Serialize)]
struct BhowmikTrialSummary {
    trial: u64,
    r: Value,
    found: bool,
    max_multiplicity: u64,
    averaging_ok: bool,
}

/// Samples `E` at exactly the hypothesis size and requires the finder to
/// succeed for every `r` in `rs` on every trial.
pub fn verify_bhowmik(
    q: u64,
    d: usize,
    k: usize,
    rs: &[Elem],
    trials: u64,
    seed: u64,
) -> Result<VerificationReport, HarnessError> {
    let start = Instant::now();
    if k == 0 {
        return Err(HarnessError::ZeroK);
    }
    if d == 0 || d == 1 {
        return Err(HarnessError::Dimension(d));
    }
    let f = Field::with_order(q)?;
    let size = bhowmik_size(q, d, k);
    let space = (q as u128).pow(d as u32);
    if size > space {
        return Err(HarnessError::Unsatisfiable {
            size: size as u64,
            space: space as u64,
        });
    }
    if rs.iter().any(|r| r.is_zero()) {
        return Err(HarnessError::ZeroRatio);
    }

    type TrialOut = (PointSet, Vec<(Elem, FinderRun)>);
    let runs: Vec<TrialOut> = (0..trials)
        .into_par_iter()
        .map(|t| -> Result<TrialOut, HarnessError> {
            let e = random_pointset(&f, d, size as usize, &mut trial_rng(seed, t))?;
            let per_r = rs
                .iter()
                .map(|&r| Ok((r, find_similar_configuration(&e, r, k, None)?)))
                .collect::<Result<Vec<_>, HarnessError>>()?;
            Ok((e, per_r))
        })
        .collect::<Result<_, _>>()?;

    let mut report = VerificationReport::new("similar_configuration")
        .param("q", q)
        .param("d", d)
        .param("k", k)
        .param("size", size as u64)
        .param("trials", trials)
        .param("seed", seed)
        .param(
            "r",
            Value::Array(rs.iter().map(|&r| elem_to_json(&f, r)).collect()),
        );
    let exponent = if d.is_multiple_of(2) {
        d as u32
    } else {
        d as u32 + 1
    };
    report.bound = Some(Ratio::new(size * size, (q as u128).pow(exponent)).to_string());
    let mut all_found = true;
    let mut all_avg = true;
    let mut failures = Vec::new();
    for (t, (e, per_r)) in runs.iter().enumerate() {
        for (r, run) in per_r {
            report.observe(run.max_multiplicity);
            let found = matches!(run.outcome, FinderOutcome::Found(_));
            all_found &= found;
            all_avg &= run.averaging_ok;
            if !found || !run.averaging_ok {
                failures.push(BhowmikTrialSummary {
                    trial: t as u64,
                    r: elem_to_json(&f, *r),
                    found,
                    max_multiplicity: run.max_multiplicity,
                    averaging_ok: run.averaging_ok,
                });
                report.fail(PointSetJson::from_set(e));
            }
        }
    }
    report.flags.insert("all_found".into(), all_found);
    report.flags.insert("averaging_bound_held".into(), all_avg);
    report.detail("needed_points", k + 1);
    report.detail(
        "failures",
        serde_json::to_value(failures).expect("summaries serialize"),
    );
    report.elapsed_ms = start.elapsed().as_millis() as u64;
    Ok(report)
}

/// Per-`r` summary used by the CLI when sweeping a set of ratios.
pub fn vr_sweep(f: &Field, e: &PointSet, rs: &[Elem]) -> BTreeMap<Elem, u64> {
    let h = distance_histogram(e);
    rs.iter()
        .map(|&r| (r, vr_from_histogram(f, &h, r)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::counting::count_vr_fast;
    use crate::pointset::{full_space, gen_random_pointset};

    #[test]
    fn min_sizes() {
        assert_eq!(min_main_size(3), 5);
        assert_eq!(min_main_size(7), 10);
        assert_eq!(min_main_size(11), 16);
        assert_eq!(min_main_size(19), 27);
    }

    #[test]
    fn subfield_example_sizes() {
        let r3 = verify_sharpness(3).unwrap();
        assert!(r3.pass);
        assert_eq!(r3.details["set_size"], 9);
        assert_eq!(r3.details["distance_set_size"], 3);
        let r5 = verify_sharpness(5).unwrap();
        assert!(r5.pass);
        assert_eq!(r5.details["set_size"], 25);
        assert_eq!(r5.details["distance_set_size"], 5);
        assert_eq!(
            verify_sharpness(37).unwrap_err(),
            HarnessError::SubfieldTooLarge(37)
        );
    }

    #[test]
    fn main_theorem_small_runs() {
        let rep = verify_main_theorem(7, 5, 1, None).unwrap();
        assert!(rep.pass);
        assert_eq!(rep.params["size"], 10);
        assert_eq!(rep.bound.as_deref(), Some("2500/7"));
        let rep3 = verify_main_theorem(3, 3, 1, None).unwrap();
        assert_eq!(rep3.params["size"], 5);
        assert_eq!(rep3.bound.as_deref(), Some("625/12"));
        assert_eq!(
            verify_main_theorem(6, 1, 1, None).unwrap_err(),
            HarnessError::NotThreeModFour(6)
        );
        assert_eq!(
            verify_main_theorem(13, 1, 1, None).unwrap_err(),
            HarnessError::NotThreeModFour(13)
        );
        assert!(matches!(
            verify_main_theorem(7, 1, 1, Some(50)),
            Err(HarnessError::SizeExceedsSpace { .. })
        ));
    }

    #[test]
    fn main_theorem_undersized_can_fail_with_witness() {
        // Two points cannot meet the bound: witness attached, hypothesis flagged.
        let rep = verify_main_theorem(7, 2, 3, Some(2)).unwrap();
        assert!(!rep.pass);
        assert!(rep.witness.is_some());
        assert!(!rep.flags["hypothesis_met"]);
    }

    #[test]
    fn coverage_examples() {
        let f = Field::new(7, 1).unwrap();
        let single = PointSet::new(&f, 2, vec![vec![Elem(1), Elem(1)]]).unwrap();
        let rep = verify_quotient_coverage(&single);
        assert!(!rep.pass);
        assert!(!rep.flags["hypothesis_met"]);
        assert!(rep.witness.is_some());

        let (sub, qe) = gen_subfield_example(3).unwrap();
        let rep = verify_quotient_coverage(&sub);
        assert!(!rep.pass);
        let q = quotient_set(qe.ext(), &distance_set(&sub)).unwrap();
        assert!(q.iter().all(|&x| qe.project(x).is_some()));
    }

    #[test]
    fn pairs_parse_and_validate() {
        assert_eq!(parse_pairs("1-2, 2-3", 2).unwrap(), vec![(1, 2), (2, 3)]);
        assert!(parse_pairs("2-1", 2).is_err());
        assert!(parse_pairs("1-4", 2).is_err());
        assert!(parse_pairs("", 2).is_err());
        assert!(parse_pairs("1:2", 2).is_err());
        assert_eq!(all_pairs(2), vec![(1, 2), (1, 3), (2, 3)]);
    }

    #[test]
    fn finder_on_full_plane() {
        let f = Field::new(7, 1).unwrap();
        let e = full_space(&f, 2).unwrap();
        let run = find_similar_configuration(&e, Elem(3), 1, None).unwrap();
        assert_eq!(run.max_multiplicity, 49);
        assert!(run.averaging_ok);
        let FinderOutcome::Found(cfg) = run.outcome else {
            panic!("expected a configuration")
        };
        check_configuration(&e, Elem(3), &cfg).unwrap();
    }

    #[test]
    fn finder_odd_dimension_nonsquare_ratio() {
        let f = Field::new(3, 1).unwrap();
        let e = gen_random_pointset(&f, 3, 18, 11).unwrap();
        let run = find_similar_configuration(&e, Elem(2), 1, None).unwrap();
        assert!(run.uses_extension);
        assert!(run.averaging_ok);
        let FinderOutcome::Found(cfg) = &run.outcome else {
            panic!("expected a configuration")
        };
        assert_eq!(cfg.xs.len(), 2);
        let v = finder_run_json(&f, &run);
        assert_eq!(v["found"], true);
    }

    #[test]
    fn finder_reports_not_found() {
        let f = Field::new(7, 1).unwrap();
        let e = PointSet::new(&f, 2, vec![vec![Elem(0), Elem(0)], vec![Elem(1), Elem(0)]]).unwrap();
        let run = find_similar_configuration(&e, Elem(3), 5, None).unwrap();
        assert!(matches!(run.outcome, FinderOutcome::NotFound { .. }));
        assert!(find_similar_configuration(&e, Elem(0), 1, None).is_err());
        assert!(find_similar_configuration(&e, Elem(1), 0, None).is_err());
    }

    #[test]
    fn bhowmik_hypothesis_arithmetic() {
        assert_eq!(bhowmik_size(7, 2, 1), 14);
        assert_eq!(bhowmik_size(7, 2, 2), 28);
        assert_eq!(bhowmik_size(3, 3, 1), 18);
        assert_eq!(
            verify_bhowmik(3, 2, 2, &[Elem(1)], 1, 0).unwrap_err(),
            HarnessError::Unsatisfiable { size: 12, space: 9 }
        );
        let rep = verify_bhowmik(7, 2, 2, &[Elem(3)], 3, 9).unwrap();
        assert!(rep.pass, "{rep:?}");
    }

    #[test]
    fn vr_sweep_matches_fast() {
        let f = Field::new(11, 1).unwrap();
        let e = gen_random_pointset(&f, 2, 12, 4).unwrap();
        let rs: Vec<Elem> = f.elements().collect();
        for (r, v) in vr_sweep(&f, &e, &rs) {
            assert_eq!(v, count_vr_fast(&e, r));
        }
    }
}
