//! Distance histograms, quotient sets, the quadruple count `V(r)` and the
//! `eta_theta(z)` tallies over `O(2)`.
//!
//! `V(r) = #{(a, b, c, d) in E^4 : ||a-b||^2 = r ||c-d||^2, ||c-d||^2 != 0}`
//! for every `r` including 0. All pair counts are over ordered pairs.

use std::collections::BTreeSet;
use std::time::Instant;

use rayon::prelude::*;
use thiserror::Error;

use crate::field::{Elem, Field};
use crate::io::{elem_to_json, PointSetJson};
use crate::linalg::{build_similarity_even, dist_sq, enumerate_o2, LinalgError, SquareMatrix};
use crate::pointset::PointSet;
use crate::report::VerificationReport;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CountingError {
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error("brute force over {size}^4 quadruples exceeds the guard 10^8")]
    BruteForceGuard { size: usize },
    #[error("operation needs dimension {expected}, point set has {got}")]
    Dimension { expected: usize, got: usize },
    #[error("ratio r must be nonzero")]
    ZeroRatio,
    #[error("identity requires q = 3 mod 4, got q = {0}")]
    NotThreeModFour(u32),
}

/// Largest `|E|^4` the quartic oracle will run.
pub const BRUTE_FORCE_GUARD: u128 = 100_000_000;

/// `mult(t) = #{(x, y) in E^2 : ||x-y||^2 = t}`, dense over `F_q`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DistanceHistogram {
    counts: Vec<u64>,
    set_size: usize,
}

impl DistanceHistogram {
    pub fn mult(&self, t: Elem) -> u64 {
        self.counts[t.index()]
    }

    /// `(t, mult(t))` for every achieved `t`, in enumeration order.
    pub fn entries(&self) -> impl Iterator<Item = (Elem, u64)> + '_ {
        self.counts
            .iter()
            .enumerate()
            .filter(|(_, &c)| c > 0)
            .map(|(t, &c)| (Elem(t as u32), c))
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// Ordered pairs with nonzero distance.
    pub fn nonzero_pairs(&self) -> u64 {
        self.total() - self.counts[0]
    }

    pub fn set_size(&self) -> usize {
        self.set_size
    }

    pub fn support(&self) -> BTreeSet<Elem> {
        self.entries().map(|(t, _)| t).collect()
    }
}

pub fn distance_histogram(e: &PointSet) -> DistanceHistogram {
    let f = e.field();
    let mut counts = vec![0u64; f.q() as usize];
    let pts = e.points();
    if e.dim() == 2 {
        for u in pts {
            for v in pts {
                let dx = f.sub(u[0], v[0]);
                let dy = f.sub(u[1], v[1]);
                counts[f.add(f.square(dx), f.square(dy)).index()] += 1;
            }
        }
    } else {
        for u in pts {
            for v in pts {
                counts[dist_sq(f, u, v).index()] += 1;
            }
        }
    }
    DistanceHistogram {
        counts,
        set_size: e.len(),
    }
}

/// `Δ(E)`.
pub fn distance_set(e: &PointSet) -> BTreeSet<Elem> {
    distance_histogram(e).support()
}

/// `Δ(E)/Δ(E)`; `None` when `Δ(E) = {0}` and the quotient is undefined.
pub fn quotient_set(f: &Field, delta: &BTreeSet<Elem>) -> Option<BTreeSet<Elem>> {
    let inverses: Vec<Elem> = delta
        .iter()
        .filter(|b| !b.is_zero())
        .map(|&b| f.inv(b).expect("nonzero"))
        .collect();
    if inverses.is_empty() {
        return None;
    }
    let mut out = BTreeSet::new();
    for &a in delta {
        for &binv in &inverses {
            out.insert(f.mul(a, binv));
        }
    }
    Some(out)
}

/// Quartic-loop oracle for `V(r)`. Pairwise norms are computed once; the
/// count itself walks all `|E|^4` quadruples.
pub fn count_vr_bruteforce(e: &PointSet, r: Elem) -> Result<u64, CountingError> {
    let n = e.len();
    if (n as u128).pow(4) > BRUTE_FORCE_GUARD {
        return Err(CountingError::BruteForceGuard { size: n });
    }
    let f = e.field();
    let pts = e.points();
    let norms: Vec<Elem> = pts
        .iter()
        .flat_map(|u| pts.iter().map(move |v| dist_sq(f, u, v)))
        .collect();
    let mut count = 0u64;
    for &ab in &norms {
        for &cd in &norms {
            if !cd.is_zero() && ab == f.mul(r, cd) {
                count += 1;
            }
        }
    }
    Ok(count)
}

/// `V(r) = sum_{t != 0} mult(r t) mult(t)`.
pub fn vr_from_histogram(f: &Field, h: &DistanceHistogram, r: Elem) -> u64 {
    h.entries()
        .filter(|(t, _)| !t.is_zero())
        .map(|(t, c)| h.mult(f.mul(r, t)) * c)
        .sum()
}

pub fn count_vr_fast(e: &PointSet, r: Elem) -> u64 {
    vr_from_histogram(e.field(), &distance_histogram(e), r)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VrMethod {
    Brute,
    Fast,
}

/// `r -> V(r)` over all of `F_q`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VrTable {
    pub values: Vec<u64>,
    pub method: VrMethod,
}

impl VrTable {
    pub fn get(&self, r: Elem) -> u64 {
        self.values[r.index()]
    }

    pub fn total(&self) -> u64 {
        self.values.iter().sum()
    }
}

pub fn vr_table(e: &PointSet, method: VrMethod) -> Result<VrTable, CountingError> {
    let f = e.field();
    let values = match method {
        VrMethod::Fast => {
            let h = distance_histogram(e);
            f.elements().map(|r| vr_from_histogram(f, &h, r)).collect()
        }
        VrMethod::Brute => f
            .elements()
            .collect::<Vec<_>>()
            .into_par_iter()
            .map(|r| count_vr_bruteforce(e, r))
            .collect::<Result<Vec<_>, _>>()?,
    };
    Ok(VrTable { values, method })
}

/// `N_0 = #{(u,v,w,x) : ||u-v||^2 = r ||w-x||^2 = 0, u != v, w != x}`.
pub fn count_n_zero(e: &PointSet, r: Elem) -> u64 {
    let h = distance_histogram(e);
    let n = e.len() as u64;
    let isotropic = h.mult(Elem::ZERO) - n;
    if r.is_zero() {
        isotropic * (n * n - n)
    } else {
        isotropic * isotropic
    }
}

/// Per-`θ` sparse tallies of `z = u - θBv` over `(u, v) in E^2`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EtaTally {
    /// One entry per group element, in `O(2)` enumeration order; each is
    /// `(z, η_θ(z))` over achieved `z`, sorted by `z`.
    pub per_theta: Vec<Vec<([Elem; 2], u64)>>,
    pub group_order: usize,
    /// `Σ η`.
    pub total: u128,
    /// `Σ η²`.
    pub energy: u128,
    /// Number of `(θ, z)` cells with `η ≥ 1`.
    pub support: u64,
}

fn tally_one(
    f: &Field,
    e: &PointSet,
    m: &SquareMatrix,
    scratch: &mut [u32],
) -> Vec<([Elem; 2], u64)> {
    let q = f.q() as usize;
    let images: Vec<[Elem; 2]> = e
        .points()
        .iter()
        .map(|v| {
            let w = m.apply(f, v);
            [w[0], w[1]]
        })
        .collect();
    let mut touched = Vec::new();
    for u in e.points() {
        for w in &images {
            let z0 = f.sub(u[0], w[0]);
            let z1 = f.sub(u[1], w[1]);
            let key = z0.index() * q + z1.index();
            if scratch[key] == 0 {
                touched.push(key);
            }
            scratch[key] += 1;
        }
    }
    touched.sort_unstable();
    touched
        .into_iter()
        .map(|key| {
            let c = std::mem::take(&mut scratch[key]) as u64;
            ([Elem((key / q) as u32), Elem((key % q) as u32)], c)
        })
        .collect()
}

/// Tallies `η_θ(z) = #{(u, v) in E^2 : u - θBv = z}` for every `θ in O(2)`,
/// with `B` the similarity matrix of ratio `r`. Parallel over `θ`; the result
/// does not depend on the worker count.
pub fn eta_tally(e: &PointSet, r: Elem) -> Result<EtaTally, CountingError> {
    if e.dim() != 2 {
        return Err(CountingError::Dimension {
            expected: 2,
            got: e.dim(),
        });
    }
    if r.is_zero() {
        return Err(CountingError::ZeroRatio);
    }
    let f = e.field();
    let b = build_similarity_even(f, 2, r)?;
    let group = enumerate_o2(f)?;
    let shifted: Vec<SquareMatrix> = group.elements.iter().map(|t| t.mul(f, &b.matrix)).collect();
    let q = f.q() as usize;
    let per_theta: Vec<_> = shifted
        .par_iter()
        .map_init(
            || vec![0u32; q * q],
            |scratch, m| tally_one(f, e, m, scratch),
        )
        .collect();
    let mut total = 0u128;
    let mut energy = 0u128;
    let mut support = 0u64;
    for cells in &per_theta {
        for &(_, c) in cells {
            total += c as u128;
            energy += (c as u128) * (c as u128);
            support += 1;
        }
    }
    Ok(EtaTally {
        per_theta,
        group_order: group.len(),
        total,
        energy,
        support,
    })
}

/// Checks `Σ η² = 2(q+1)|E|² + 2V(r)` exactly (d = 2, q = 3 mod 4, r != 0).
/// `V(r)` comes from `method`; the tally side never looks at distances.
pub fn energy_identity_check(
    e: &PointSet,
    r: Elem,
    method: VrMethod,
) -> Result<VerificationReport, CountingError> {
    let start = Instant::now();
    let f = e.field();
    if f.q() % 4 != 3 {
        return Err(CountingError::NotThreeModFour(f.q()));
    }
    let tally = eta_tally(e, r)?;
    let vr = match method {
        VrMethod::Brute => count_vr_bruteforce(e, r)?,
        VrMethod::Fast => count_vr_fast(e, r),
    };
    let n = e.len() as u128;
    let rhs = 2 * (f.q() as u128 + 1) * n * n + 2 * vr as u128;
    let lhs = tally.energy;
    let residual = lhs as i128 - rhs as i128;

    let mut report = VerificationReport::new("energy_identity")
        .param("q", f.q())
        .param("d", 2)
        .param("size", e.len())
        .param("r", elem_to_json(f, r))
        .param("vr_method", serde_json::to_value(method).expect("enum"));
    report.bound = Some(rhs.to_string());
    report.observe(lhs as u64);
    report.detail("energy", lhs.to_string());
    report.detail("rhs", rhs.to_string());
    report.detail("v_r", vr);
    report.detail("residual", residual.to_string());
    report.detail("group_order", tally.group_order);
    report.detail("tally_total", tally.total.to_string());
    report.detail("tally_support", tally.support);
    // Cauchy-Schwarz as written: (Σ η)² <= Σ η² · q² · |O(2)|.
    let q2 = (f.q() as u128).pow(2);
    let cs = tally.total * tally.total <= lhs * q2 * tally.group_order as u128;
    report.flags.insert("cauchy_schwarz".into(), cs);
    report.flags.insert(
        "total_is_e2_times_group".into(),
        tally.total == n * n * tally.group_order as u128,
    );
    if residual != 0 {
        report.fail(PointSetJson::from_set(e));
    }
    report.elapsed_ms = start.elapsed().as_millis() as u64;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pointset::gen_random_pointset;

    fn set(q: u64, pts: &[[u32; 2]]) -> PointSet {
        let f = Field::with_order(q).unwrap();
        PointSet::new(
            &f,
            2,
            pts.iter().map(|p| vec![Elem(p[0]), Elem(p[1])]).collect(),
        )
        .unwrap()
    }

    #[test]
    fn histogram_examples() {
        let e = set(3, &[[0, 0], [1, 0]]);
        let h = distance_histogram(&e);
        assert_eq!(
            h.entries().collect::<Vec<_>>(),
            vec![(Elem(0), 2), (Elem(1), 2)]
        );
        let e5 = set(5, &[[0, 0], [1, 2]]);
        assert_eq!(
            distance_histogram(&e5).entries().collect::<Vec<_>>(),
            vec![(Elem(0), 4)]
        );
    }

    #[test]
    fn histogram_invariants_on_random_sets() {
        for q in [7u64, 9, 11] {
            let f = Field::with_order(q).unwrap();
            let e = gen_random_pointset(&f, 2, 15, q).unwrap();
            let h = distance_histogram(&e);
            assert_eq!(h.total(), 15 * 15);
            assert!(h.mult(Elem::ZERO) >= 15);
            if q % 4 == 3 {
                assert_eq!(h.mult(Elem::ZERO), 15);
            }
        }
    }

    #[test]
    fn quotient_examples() {
        let f = Field::new(7, 1).unwrap();
        let d: BTreeSet<Elem> = [Elem(0), Elem(5)].into();
        assert_eq!(quotient_set(&f, &d).unwrap(), [Elem(0), Elem(1)].into());
        let d: BTreeSet<Elem> = [Elem(0), Elem(1), Elem(3)].into();
        assert_eq!(
            quotient_set(&f, &d).unwrap(),
            [Elem(0), Elem(1), Elem(3), Elem(5)].into()
        );
        let single = set(7, &[[2, 3]]);
        assert_eq!(quotient_set(&f, &distance_set(&single)), None);
    }

    #[test]
    fn vr_examples() {
        let e = set(3, &[[0, 0], [1, 0]]);
        assert_eq!(count_vr_bruteforce(&e, Elem(1)).unwrap(), 4);
        assert_eq!(count_vr_fast(&e, Elem(1)), 4);
        assert_eq!(count_vr_bruteforce(&e, Elem(2)).unwrap(), 0);
        assert_eq!(count_vr_fast(&e, Elem(2)), 0);
        // r = 0 counts ||a-b||^2 = 0 against the 2 nonzero (c, d): 2 * 2.
        assert_eq!(count_vr_bruteforce(&e, Elem(0)).unwrap(), 4);
        assert_eq!(count_vr_fast(&e, Elem(0)), 4);
    }

    #[test]
    fn brute_force_guard() {
        let f = Field::new(11, 1).unwrap();
        let e = gen_random_pointset(&f, 2, 101, 1).unwrap();
        assert_eq!(
            count_vr_bruteforce(&e, Elem(1)),
            Err(CountingError::BruteForceGuard { size: 101 })
        );
    }

    #[test]
    fn vr_table_row_sum() {
        let f = Field::new(7, 1).unwrap();
        let e = gen_random_pointset(&f, 2, 9, 3).unwrap();
        let h = distance_histogram(&e);
        let fast = vr_table(&e, VrMethod::Fast).unwrap();
        let brute = vr_table(&e, VrMethod::Brute).unwrap();
        assert_eq!(fast.values, brute.values);
        assert_eq!(fast.total(), 81 * h.nonzero_pairs());
    }

    #[test]
    fn eta_examples() {
        let e = set(3, &[[0, 0], [1, 0]]);
        let t = eta_tally(&e, Elem(1)).unwrap();
        assert_eq!(t.group_order, 8);
        assert_eq!(t.total, 32);
        assert_eq!(t.energy, 40);
        assert!(t.per_theta.iter().flatten().all(|&(_, c)| c >= 1));

        let single = set(7, &[[4, 4]]);
        let t = eta_tally(&single, Elem(3)).unwrap();
        assert_eq!(t.energy, 16);
        assert!(eta_tally(&single, Elem(0)).is_err());
    }

    #[test]
    fn energy_identity_examples() {
        let e = set(3, &[[0, 0], [1, 0]]);
        let rep = energy_identity_check(&e, Elem(1), VrMethod::Brute).unwrap();
        assert!(rep.pass);
        assert_eq!(rep.details["energy"], "40");
        assert_eq!(rep.details["residual"], "0");
        assert!(rep.flags["cauchy_schwarz"]);
        let single = set(11, &[[3, 9]]);
        for r in 1..11 {
            let rep = energy_identity_check(&single, Elem(r), VrMethod::Fast).unwrap();
            assert!(rep.pass);
            assert_eq!(rep.details["v_r"], 0);
        }
        assert_eq!(
            energy_identity_check(&set(5, &[[0, 0]]), Elem(1), VrMethod::Fast).unwrap_err(),
            CountingError::NotThreeModFour(5)
        );
    }

    #[test]
    fn n_zero_examples() {
        let e5 = set(5, &[[0, 0], [1, 2]]);
        assert_eq!(count_n_zero(&e5, Elem(1)), 4);
        assert_eq!(count_n_zero(&set(7, &[[1, 1]]), Elem(2)), 0);
        let f = Field::new(7, 1).unwrap();
        let e = gen_random_pointset(&f, 2, 12, 8).unwrap();
        for r in f.elements() {
            assert_eq!(count_n_zero(&e, r), 0);
        }
    }
}
