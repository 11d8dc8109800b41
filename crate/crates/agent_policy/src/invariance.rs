use serde::Serialize;

use crate::{Policy, PolicyError};

/// How to rebuild a state of model A from a state of model B: each A slot is the sum of
/// some B slots.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SlotMap {
    pub sources: Vec<Vec<usize>>,
}

impl SlotMap {
    /// Names each A slot's sources through `rename(infoset, action)`, which lists B slots
    /// as (infoset, action) names.
    pub fn by_name(
        a: &Policy,
        b: &Policy,
        rename: impl Fn(&str, &str) -> Vec<(String, String)>,
    ) -> Result<Self, PolicyError> {
        let sources = a
            .model
            .slots
            .iter()
            .map(|sa| {
                rename(&sa.infoset, &sa.action)
                    .into_iter()
                    .map(|(h, x)| {
                        b.model
                            .slots
                            .iter()
                            .position(|sb| sb.infoset == h && sb.action == x)
                            .ok_or_else(|| PolicyError::Unmapped(format!("{h}:{x} is not tracked in the second model")))
                    })
                    .collect()
            })
            .collect::<Result<_, _>>()?;
        Ok(SlotMap { sources })
    }

    /// Same infoset and action names on both sides.
    pub fn identity(a: &Policy, b: &Policy) -> Result<Self, PolicyError> {
        Self::by_name(a, b, |h, x| vec![(h.to_string(), x.to_string())])
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InvarianceReport {
    pub states_checked: usize,
    pub mismatches: usize,
    /// First few disagreeing B states, as slot counts.
    pub examples: Vec<Vec<u32>>,
    pub max_value_gap: f64,
    pub equal: bool,
}

/// Compares two policies state by state through `map`; `strategy_map` sends A strategy
/// indices to B strategy indices.
pub fn policy_invariance_check(
    a: &Policy,
    b: &Policy,
    map: &SlotMap,
    strategy_map: impl Fn(usize) -> usize,
) -> Result<InvarianceReport, PolicyError> {
    if map.sources.len() != a.model.slots.len() {
        return Err(PolicyError::Unmapped("slot map does not cover the first model".into()));
    }
    let mut mismatches = 0;
    let mut examples = Vec::new();
    let mut max_value_gap: f64 = 0.0;
    for (y, &key) in b.model.states.iter().enumerate() {
        let counts = b.model.counts(key);
        let a_counts: Vec<u32> = map.sources.iter().map(|src| src.iter().map(|&k| counts[k]).sum()).collect();
        let x = a
            .model
            .state_index(a.model.key_from_counts(&a_counts))
            .ok_or_else(|| PolicyError::Unmapped(format!("state {counts:?} has no counterpart")))?;
        max_value_gap = max_value_gap.max((a.value[x] - b.value[y]).abs());
        if strategy_map(a.choice[x] as usize) != b.choice[y] as usize {
            mismatches += 1;
            if examples.len() < 5 {
                examples.push(counts);
            }
        }
    }
    Ok(InvarianceReport {
        states_checked: b.model.state_count(),
        mismatches,
        examples,
        max_value_gap,
        equal: mismatches == 0 && a.model.state_count() == b.model.state_count(),
    })
}
