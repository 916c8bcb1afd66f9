//! Matched-control sampling: each labeled case draws one unused control,
//! uniformly at random, from the pool records that agree on every match key.

use std::collections::{HashMap, HashSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::EvalError;
use crate::corpus::PaperRecord;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MatchKey {
    Year,
    Venue,
    Field,
}

impl MatchKey {
    pub const ALL: [MatchKey; 3] = [MatchKey::Year, MatchKey::Venue, MatchKey::Field];

    pub fn as_str(self) -> &'static str {
        match self {
            MatchKey::Year => "year",
            MatchKey::Venue => "venue",
            MatchKey::Field => "field",
        }
    }
}

impl std::fmt::Display for MatchKey {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for MatchKey {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        MatchKey::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| format!("unknown match key {s:?}; expected year, venue, or field"))
    }
}

/// The value a record exposes for one key; None when the field is absent.
pub fn key_value(record: &PaperRecord, key: MatchKey) -> Option<String> {
    match key {
        MatchKey::Year => Some(record.year.to_string()),
        MatchKey::Venue => record.venue.clone(),
        MatchKey::Field => record.field.clone(),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MatchedPair {
    pub case_id: String,
    pub control_id: String,
}

#[derive(Debug, Clone)]
pub struct MatchedDataset {
    pub pairs: Vec<MatchedPair>,
    pub keys: Vec<MatchKey>,
    pub seed: u64,
    /// Case ids that found no control: exhausted stratum or missing key value.
    pub dropped: Vec<String>,
}

/// Cases must carry label 1 and pool records label 0; the two id sets must be
/// disjoint. Cases are processed in input order, each consuming its control,
/// so reruns with one seed reproduce the dataset exactly.
pub fn match_controls(
    cases: &[PaperRecord],
    pool: &[PaperRecord],
    keys: &[MatchKey],
    seed: u64,
) -> Result<MatchedDataset, EvalError> {
    if keys.is_empty() {
        return Err(EvalError::EmptyKeys);
    }
    for case in cases {
        if case.label != Some(true) {
            return Err(EvalError::BadLabel {
                id: case.id.clone(),
                expected: 1,
            });
        }
    }
    let mut case_ids = HashSet::with_capacity(cases.len());
    for case in cases {
        case_ids.insert(case.id.as_str());
    }
    for rec in pool {
        if rec.label != Some(false) {
            return Err(EvalError::BadLabel {
                id: rec.id.clone(),
                expected: 0,
            });
        }
        if case_ids.contains(rec.id.as_str()) {
            return Err(EvalError::NonDisjoint(rec.id.clone()));
        }
    }

    // Stratum -> indices of still-unused pool records, in input order.
    let mut strata: HashMap<Vec<String>, Vec<usize>> = HashMap::new();
    for (i, rec) in pool.iter().enumerate() {
        if let Some(stratum) = full_key(rec, keys) {
            strata.entry(stratum).or_default().push(i);
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pairs = Vec::new();
    let mut dropped = Vec::new();
    for case in cases {
        let Some(stratum) = full_key(case, keys) else {
            dropped.push(case.id.clone());
            continue;
        };
        match strata.get_mut(&stratum) {
            Some(candidates) if !candidates.is_empty() => {
                let pick = rng.gen_range(0..candidates.len());
                let chosen = candidates.swap_remove(pick);
                pairs.push(MatchedPair {
                    case_id: case.id.clone(),
                    control_id: pool[chosen].id.clone(),
                });
            }
            _ => dropped.push(case.id.clone()),
        }
    }
    Ok(MatchedDataset {
        pairs,
        keys: keys.to_vec(),
        seed,
        dropped,
    })
}

fn full_key(record: &PaperRecord, keys: &[MatchKey]) -> Option<Vec<String>> {
    keys.iter().map(|&k| key_value(record, k)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(id: &str, year: i32, venue: Option<&str>, field: Option<&str>, label: bool) -> PaperRecord {
        PaperRecord {
            id: id.into(),
            year,
            terms: vec!["t0".into(), "t1".into()],
            venue: venue.map(Into::into),
            field: field.map(Into::into),
            label: Some(label),
            citations: None,
        }
    }

    fn pool_of(n: usize, year: i32, venue: &str) -> Vec<PaperRecord> {
        (0..n)
            .map(|i| rec(&format!("p{year}_{venue}_{i}"), year, Some(venue), Some("f"), false))
            .collect()
    }

    #[test]
    fn controls_agree_on_every_key_and_are_never_reused() {
        let mut pool = pool_of(8, 2001, "v0");
        pool.extend(pool_of(8, 2001, "v1"));
        pool.extend(pool_of(8, 2002, "v0"));
        let cases: Vec<PaperRecord> = (0..6)
            .map(|i| {
                let (year, venue) = if i % 2 == 0 { (2001, "v0") } else { (2002, "v0") };
                rec(&format!("c{i}"), year, Some(venue), Some("f"), true)
            })
            .collect();
        let keys = [MatchKey::Year, MatchKey::Venue];
        let ds = match_controls(&cases, &pool, &keys, 42).unwrap();
        assert_eq!(ds.pairs.len(), 6);
        assert!(ds.dropped.is_empty());
        let by_id: HashMap<&str, &PaperRecord> = pool.iter().map(|r| (r.id.as_str(), r)).collect();
        let mut seen = HashSet::new();
        for pair in &ds.pairs {
            assert!(seen.insert(pair.control_id.clone()), "control reused");
            let case = cases.iter().find(|c| c.id == pair.case_id).unwrap();
            let control = by_id[pair.control_id.as_str()];
            for key in keys {
                assert_eq!(key_value(case, key), key_value(control, key));
            }
        }
    }

    #[test]
    fn exhausted_strata_drop_the_remaining_cases() {
        let pool = pool_of(2, 2001, "v0");
        let cases: Vec<PaperRecord> = (0..5)
            .map(|i| rec(&format!("c{i}"), 2001, Some("v0"), Some("f"), true))
            .collect();
        let ds = match_controls(&cases, &pool, &[MatchKey::Year], 1).unwrap();
        assert_eq!(ds.pairs.len(), 2);
        assert_eq!(ds.dropped.len(), 3);
        // Earlier cases consume the pool first.
        assert_eq!(ds.pairs[0].case_id, "c0");
        assert_eq!(ds.pairs[1].case_id, "c1");
    }

    #[test]
    fn missing_key_values_drop_cases_and_exclude_pool_records() {
        let mut pool = pool_of(3, 2001, "v0");
        pool.push(rec("bare_pool", 2001, None, Some("f"), false));
        let cases = vec![
            rec("c0", 2001, Some("v0"), Some("f"), true),
            rec("bare_case", 2001, None, Some("f"), true),
        ];
        let ds = match_controls(&cases, &pool, &[MatchKey::Year, MatchKey::Venue], 9).unwrap();
        assert_eq!(ds.pairs.len(), 1);
        assert_eq!(ds.dropped, vec!["bare_case".to_string()]);
        assert_ne!(ds.pairs[0].control_id, "bare_pool");
    }

    #[test]
    fn rerun_with_the_same_seed_is_identical() {
        let pool = pool_of(50, 2001, "v0");
        let cases: Vec<PaperRecord> = (0..20)
            .map(|i| rec(&format!("c{i}"), 2001, Some("v0"), Some("f"), true))
            .collect();
        let a = match_controls(&cases, &pool, &[MatchKey::Year], 7).unwrap();
        let b = match_controls(&cases, &pool, &[MatchKey::Year], 7).unwrap();
        assert_eq!(a.pairs, b.pairs);
        let c = match_controls(&cases, &pool, &[MatchKey::Year], 8).unwrap();
        assert_ne!(a.pairs, c.pairs);
    }

    #[test]
    fn sampling_is_roughly_uniform_over_candidates() {
        let pool = pool_of(4, 2001, "v0");
        let case = [rec("c0", 2001, Some("v0"), Some("f"), true)];
        let mut counts: HashMap<String, usize> = HashMap::new();
        for seed in 0..4000 {
            let ds = match_controls(&case, &pool, &[MatchKey::Year], seed).unwrap();
            *counts.entry(ds.pairs[0].control_id.clone()).or_default() += 1;
        }
        assert_eq!(counts.len(), 4);
        for (_, n) in counts {
            let frac = n as f64 / 4000.0;
            assert!((frac - 0.25).abs() < 0.03, "frac = {frac}");
        }
    }

    #[test]
    fn label_and_disjointness_violations_are_errors() {
        let pool = pool_of(2, 2001, "v0");
        let unlabeled = rec("c0", 2001, Some("v0"), Some("f"), false);
        assert!(matches!(
            match_controls(&[unlabeled], &pool, &[MatchKey::Year], 1),
            Err(EvalError::BadLabel { expected: 1, .. })
        ));

        let case = rec("c0", 2001, Some("v0"), Some("f"), true);
        let mut tainted = pool.clone();
        tainted[1].label = Some(true);
        assert!(matches!(
            match_controls(&[case.clone()], &tainted, &[MatchKey::Year], 1),
            Err(EvalError::BadLabel { expected: 0, .. })
        ));

        let mut overlap = pool.clone();
        overlap[0].id = "c0".into();
        assert!(matches!(
            match_controls(&[case.clone()], &overlap, &[MatchKey::Year], 1),
            Err(EvalError::NonDisjoint(id)) if id == "c0"
        ));

        assert!(matches!(
            match_controls(&[case], &pool, &[], 1),
            Err(EvalError::EmptyKeys)
        ));
    }

    #[test]
    fn key_names_round_trip() {
        for key in MatchKey::ALL {
            assert_eq!(key.as_str().parse::<MatchKey>().unwrap(), key);
        }
        assert!("journal".parse::<MatchKey>().is_err());
    }
}
