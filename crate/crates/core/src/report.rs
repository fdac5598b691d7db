//! Per-check records shared by every verifier.

use std::collections::BTreeMap;

use serde::{Serialize, Serializer};

/// Largest exponent `k` such that `p^k` divides a checked quantity.
///
/// `Infinite` means the quantity is exactly zero.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum ModulusExponent {
    Finite(u32),
    Infinite,
}

impl ModulusExponent {
    pub fn from_valuation(v: Option<u32>) -> Self {
        match v {
            Some(k) => ModulusExponent::Finite(k),
            None => ModulusExponent::Infinite,
        }
    }

    pub fn at_least(&self, k: u32) -> bool {
        match self {
            ModulusExponent::Finite(x) => *x >= k,
            ModulusExponent::Infinite => true,
        }
    }

    /// Lower the exponent by `k`, e.g. after dividing by `p^k`.
    pub fn minus(&self, k: u32) -> Self {
        match self {
            ModulusExponent::Finite(x) => ModulusExponent::Finite(x.saturating_sub(k)),
            ModulusExponent::Infinite => ModulusExponent::Infinite,
        }
    }

    pub fn min_with(&self, k: u32) -> u32 {
        match self {
            ModulusExponent::Finite(x) => (*x).min(k),
            ModulusExponent::Infinite => k,
        }
    }
}

impl std::fmt::Display for ModulusExponent {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ModulusExponent::Finite(k) => write!(f, "{k}"),
            ModulusExponent::Infinite => write!(f, "inf"),
        }
    }
}

impl Serialize for ModulusExponent {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            ModulusExponent::Finite(k) => s.serialize_u32(*k),
            ModulusExponent::Infinite => s.serialize_str("inf"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckRecord {
    pub check: String,
    pub params: BTreeMap<String, i64>,
    /// Exponent the check is required to reach; absent for non-congruence checks.
    pub guaranteed: Option<u32>,
    pub observed: Option<ModulusExponent>,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub runtime_ms: Option<u64>,
}

impl CheckRecord {
    /// A congruence that passes iff `observed >= guaranteed`.
    pub fn congruence(
        check: impl Into<String>,
        params: &[(&str, i64)],
        guaranteed: u32,
        observed: ModulusExponent,
    ) -> Self {
        CheckRecord {
            check: check.into(),
            params: to_params(params),
            guaranteed: Some(guaranteed),
            observed: Some(observed),
            pass: observed.at_least(guaranteed),
            detail: None,
            runtime_ms: None,
        }
    }

    pub fn predicate(check: impl Into<String>, params: &[(&str, i64)], pass: bool) -> Self {
        CheckRecord {
            check: check.into(),
            params: to_params(params),
            guaranteed: None,
            observed: None,
            pass,
            detail: None,
            runtime_ms: None,
        }
    }

    pub fn with_detail(mut self, detail: impl Into<String>) -> Self {
        self.detail = Some(detail.into());
        self
    }

    pub fn param(&self, key: &str) -> Option<i64> {
        self.params.get(key).copied()
    }

    /// Sort key giving a deterministic, order-independent record sequence.
    pub fn sort_key(&self) -> (String, Vec<(String, i64)>) {
        (
            self.check.clone(),
            self.params.iter().map(|(k, v)| (k.clone(), *v)).collect(),
        )
    }
}

fn to_params(params: &[(&str, i64)]) -> BTreeMap<String, i64> {
    params.iter().map(|(k, v)| (k.to_string(), *v)).collect()
}

pub fn all_pass(records: &[CheckRecord]) -> bool {
    records.iter().all(|r| r.pass)
}

pub fn sort_records(records: &mut [CheckRecord]) {
    records.sort_by_cached_key(|r| r.sort_key());
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn congruence_pass_rule() {
        let r = CheckRecord::congruence("x", &[("p", 3)], 2, ModulusExponent::Finite(2));
        assert!(r.pass);
        let r = CheckRecord::congruence("x", &[("p", 3)], 2, ModulusExponent::Finite(1));
        assert!(!r.pass);
        let r = CheckRecord::congruence("x", &[("p", 3)], 9, ModulusExponent::Infinite);
        assert!(r.pass);
        assert_eq!(
            ModulusExponent::Finite(4).minus(1),
            ModulusExponent::Finite(3)
        );
    }
}
