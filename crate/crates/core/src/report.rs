use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::io::PointSetJson;

/// Exact nonnegative fraction, printed as `num/den` in lowest terms.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Ratio {
    num: u128,
    den: u128,
}

fn gcd(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

impl Ratio {
    pub fn new(num: u128, den: u128) -> Ratio {
        assert!(den != 0, "zero denominator");
        let g = gcd(num, den).max(1);
        Ratio {
            num: num / g,
            den: den / g,
        }
    }

    pub fn num(&self) -> u128 {
        self.num
    }

    pub fn den(&self) -> u128 {
        self.den
    }

    /// `value >= self`, compared exactly.
    pub fn le_int(&self, value: u128) -> bool {
        value
            .checked_mul(self.den)
            .is_none_or(|lhs| lhs >= self.num)
    }
}

impl fmt::Display for Ratio {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.num, self.den)
    }
}

/// Outcome of a theorem- or identity-level check.
///
/// `witness` is present exactly when `pass` is false. `elapsed_ms` is the
/// only field that varies between identical runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub theorem: String,
    pub params: BTreeMap<String, Value>,
    pub pass: bool,
    pub bound: Option<String>,
    pub min_observed: Option<u64>,
    pub max_observed: Option<u64>,
    pub flags: BTreeMap<String, bool>,
    pub details: BTreeMap<String, Value>,
    pub witness: Option<PointSetJson>,
    pub elapsed_ms: u64,
}

impl VerificationReport {
    pub fn new(theorem: &str) -> VerificationReport {
        VerificationReport {
            theorem: theorem.to_string(),
            params: BTreeMap::new(),
            pass: true,
            bound: None,
            min_observed: None,
            max_observed: None,
            flags: BTreeMap::new(),
            details: BTreeMap::new(),
            witness: None,
            elapsed_ms: 0,
        }
    }

    pub fn param(mut self, key: &str, value: impl Into<Value>) -> Self {
        self.params.insert(key.to_string(), value.into());
        self
    }

    pub fn detail(&mut self, key: &str, value: impl Into<Value>) {
        self.details.insert(key.to_string(), value.into());
    }

    pub fn observe(&mut self, value: u64) {
        self.min_observed = Some(self.min_observed.map_or(value, |m| m.min(value)));
        self.max_observed = Some(self.max_observed.map_or(value, |m| m.max(value)));
    }

    /// Records a failure; the first witness wins.
    pub fn fail(&mut self, witness: PointSetJson) {
        self.pass = false;
        if self.witness.is_none() {
            self.witness = Some(witness);
        }
    }

    /// JSON with `elapsed_ms` zeroed, for byte-level comparisons.
    pub fn to_canonical_json(&self) -> String {
        let mut copy = self.clone();
        copy.elapsed_ms = 0;
        serde_json::to_string(&copy).expect("reports serialize")
    }
}
