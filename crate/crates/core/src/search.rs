use std::collections::BTreeMap;

use crate::error::Result;

/// Outcome of a binary search over level indices.
#[derive(Debug, Clone)]
pub(crate) struct LevelSearch<T> {
    pub index: usize,
    pub value: f64,
    /// Distinct probes in the order they were first solved.
    pub probes: Vec<(usize, f64)>,
    pub payload: T,
}

/// Binary search over `j ∈ 1..=J` for the index at which the probe values
/// `υ_j` stop clearing the next data value.
///
/// `values` are the sorted sample values. The loop moves `j2 := j+1` when
/// `υ_j ≤ v̂_{j+1}` and `j1 := j` otherwise; the final index is probed (once,
/// results are memoized) and the result clamped to `min(υ_j, v̂_j)`. With
/// `clamp_probes` the comparison uses `min(υ_j, v̂_j)` instead of `υ_j` and
/// is strict: with tied values `v̂_j = v̂_{j+1}` the clamped probe always
/// equals `v̂_{j+1}`, and `≤` would walk past the optimum.
pub(crate) fn search_levels<T: Clone>(
    values: &[f64],
    clamp_probes: bool,
    mut probe: impl FnMut(usize) -> Result<(f64, T)>,
) -> Result<LevelSearch<T>> {
    let big_j = values.len();
    let mut memo: BTreeMap<usize, (f64, T)> = BTreeMap::new();
    let mut probes = Vec::new();
    let mut eval = |j: usize, memo: &mut BTreeMap<usize, (f64, T)>| -> Result<(f64, T)> {
        if let Some(hit) = memo.get(&j) {
            return Ok(hit.clone());
        }
        let out = probe(j)?;
        probes.push((j, out.0));
        memo.insert(j, out.clone());
        Ok(out)
    };

    let (mut j1, mut j2) = (big_j, 1);
    while j2 < j1 {
        let j = (j1 + j2) / 2;
        let (u, _) = eval(j, &mut memo)?;
        let up = if clamp_probes {
            u.min(values[j - 1]) < values[j]
        } else {
            u <= values[j]
        };
        if up {
            j2 = j + 1;
        } else {
            j1 = j;
        }
    }
    let (u, payload) = eval(j1, &mut memo)?;
    Ok(LevelSearch {
        index: j1,
        value: u.min(values[j1 - 1]),
        probes,
        payload,
    })
}

/// `⌈log₂ J⌉ + 1`, the probe budget of the search.
pub fn probe_budget(j: usize) -> usize {
    let mut bits = 0;
    while (1usize << bits) < j {
        bits += 1;
    }
    bits + 1
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn budget() {
        assert_eq!(probe_budget(1), 1);
        assert_eq!(probe_budget(2), 2);
        assert_eq!(probe_budget(16), 5);
        assert_eq!(probe_budget(17), 6);
        assert_eq!(probe_budget(4096), 13);
    }

    #[test]
    fn finds_first_clearing_index() {
        // h_j non-decreasing; answer is min(v_ζ, h_ζ) at the first j with h_j > v_{j+1}.
        let values = [10.0, 8.0, 6.0, 4.0, 2.0, 0.0];
        let h = [1.0, 3.0, 5.0, 7.0, 9.0, 11.0];
        let res = search_levels(&values, false, |j| Ok((h[j - 1], ()))).unwrap();
        assert_eq!(res.index, 3);
        assert_eq!(res.value, 5.0);
        assert!(res.probes.len() <= probe_budget(values.len()));
    }

    #[test]
    fn clamped_search_survives_ties() {
        // optimum min(4, 2) = 2 at j = 1; clamped probes at j = 2 read 0 = v̂_3
        let values = [4.0, 0.0, 0.0];
        let res = search_levels(&values, true, |_| Ok((2.0, ()))).unwrap();
        assert_eq!((res.index, res.value), (1, 2.0));
        let res = search_levels(&values, false, |_| Ok((2.0, ()))).unwrap();
        assert_eq!((res.index, res.value), (1, 2.0));
    }
}
