//! Partitioning of observable terms into qubit-wise commuting groups.
//!
//! Two words conflict when some qubit carries two different non-identity
//! letters. Grouping is a coloring of that conflict graph. A group is tracked
//! by its signature, the per-qubit non-identity letter shared by its members,
//! so testing a word against a whole group costs one mask comparison.

use serde::{Deserialize, Serialize};

use crate::observable::Observable;
use crate::pauli::PauliString;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct QwcGrouping {
    /// Term indices per group, each ascending; groups ordered by first index.
    pub groups: Vec<Vec<usize>>,
    pub group_count: usize,
}

impl QwcGrouping {
    fn from_colors(colors: &[usize]) -> Self {
        let k = colors.iter().map(|&c| c + 1).max().unwrap_or(0);
        let mut groups = vec![Vec::new(); k];
        for (i, &c) in colors.iter().enumerate() {
            groups[c].push(i);
        }
        groups.sort_by_key(|g| g[0]);
        QwcGrouping {
            group_count: groups.len(),
            groups,
        }
    }
}

#[derive(Clone)]
struct Signature {
    x: Vec<u64>,
    z: Vec<u64>,
    support: Vec<u64>,
}

impl Signature {
    fn empty(words: usize) -> Self {
        Self {
            x: vec![0; words],
            z: vec![0; words],
            support: vec![0; words],
        }
    }

    fn conflicts(&self, p: &PauliString) -> bool {
        let (px, pz) = (p.x_words(), p.z_words());
        (0..self.x.len()).any(|i| {
            let both = self.support[i] & (px[i] | pz[i]);
            both & ((self.x[i] ^ px[i]) | (self.z[i] ^ pz[i])) != 0
        })
    }

    fn absorb(&mut self, p: &PauliString) {
        let (px, pz) = (p.x_words(), p.z_words());
        for i in 0..self.x.len() {
            self.x[i] |= px[i];
            self.z[i] |= pz[i];
            self.support[i] |= px[i] | pz[i];
        }
    }
}

fn word_count(words: &[&PauliString]) -> usize {
    words.first().map(|w| w.x_words().len()).unwrap_or(0)
}

/// Greedy first-fit coloring in the given order.
pub fn greedy_first_fit(obs: &Observable) -> QwcGrouping {
    let words: Vec<&PauliString> = obs.terms().iter().map(|t| &t.word).collect();
    QwcGrouping::from_colors(&first_fit_colors(&words))
}

fn first_fit_colors(words: &[&PauliString]) -> Vec<usize> {
    let nw = word_count(words);
    let mut sigs: Vec<Signature> = Vec::new();
    let mut colors = Vec::with_capacity(words.len());
    for w in words {
        let c = match sigs.iter().position(|s| !s.conflicts(w)) {
            Some(c) => c,
            None => {
                sigs.push(Signature::empty(nw));
                sigs.len() - 1
            }
        };
        sigs[c].absorb(w);
        colors.push(c);
    }
    colors
}

/// DSATUR: repeatedly color the uncolored term with the most distinct
/// conflicting groups, breaking ties by conflict degree and then by term index.
fn dsatur_colors(words: &[&PauliString]) -> Vec<usize> {
    let m = words.len();
    let nw = word_count(words);
    let mut degree = vec![0usize; m];
    for i in 0..m {
        for j in (i + 1)..m {
            if !words[i].qwc_unchecked(words[j]) {
                degree[i] += 1;
                degree[j] += 1;
            }
        }
    }
    let mut colors: Vec<Option<usize>> = vec![None; m];
    let mut saturation = vec![0usize; m];
    // blocked[c][v]: group c already conflicts with term v
    let mut blocked: Vec<Vec<bool>> = Vec::new();
    let mut sigs: Vec<Signature> = Vec::new();

    for _ in 0..m {
        let v = (0..m)
            .filter(|&v| colors[v].is_none())
            .max_by(|&a, &b| {
                (saturation[a], degree[a])
                    .cmp(&(saturation[b], degree[b]))
                    .then(b.cmp(&a))
            })
            .expect("an uncolored term remains");
        let c = match (0..sigs.len()).find(|&c| !blocked[c][v]) {
            Some(c) => c,
            None => {
                sigs.push(Signature::empty(nw));
                blocked.push(vec![false; m]);
                sigs.len() - 1
            }
        };
        colors[v] = Some(c);
        sigs[c].absorb(words[v]);
        for u in 0..m {
            if colors[u].is_none() && !blocked[c][u] && sigs[c].conflicts(words[u]) {
                blocked[c][u] = true;
                saturation[u] += 1;
            }
        }
    }
    colors.into_iter().map(|c| c.unwrap()).collect()
}

/// Group the terms of `obs` into qubit-wise commuting sets.
///
/// Runs DSATUR and greedy first-fit on the canonical term order and keeps
/// the coloring with fewer groups (DSATUR on ties). Deterministic.
pub fn group_qwc(obs: &Observable) -> QwcGrouping {
    let words: Vec<&PauliString> = obs.terms().iter().map(|t| &t.word).collect();
    if words.is_empty() {
        return QwcGrouping {
            groups: Vec::new(),
            group_count: 0,
        };
    }
    let dsatur = QwcGrouping::from_colors(&dsatur_colors(&words));
    let greedy = QwcGrouping::from_colors(&first_fit_colors(&words));
    if greedy.group_count < dsatur.group_count {
        greedy
    } else {
        dsatur
    }
}

/// Number of QWC groups; an empty observable needs no groups.
pub fn qwc_group_count(obs: &Observable) -> usize {
    group_qwc(obs).group_count
}

/// Distinct non-identity words, grouped. Identity-only inputs count as one
/// group because the circuit still has to run once.
pub fn group_count_of_words(words: &[PauliString]) -> usize {
    let mut distinct: Vec<&PauliString> = words.iter().filter(|w| !w.is_identity()).collect();
    distinct.sort();
    distinct.dedup();
    if distinct.is_empty() {
        return 1;
    }
    let d = QwcGrouping::from_colors(&dsatur_colors(&distinct)).group_count;
    let g = QwcGrouping::from_colors(&first_fit_colors(&distinct)).group_count;
    d.min(g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::observable::PauliTerm;

    fn obs(words: &[&str]) -> Observable {
        let n = words[0].len();
        let terms = words
            .iter()
            .map(|w| PauliTerm::new(1.0, w.parse().unwrap()))
            .collect();
        Observable::new(n, terms).unwrap()
    }

    fn assert_valid(o: &Observable, g: &QwcGrouping) {
        let mut seen = vec![false; o.len()];
        for grp in &g.groups {
            for &i in grp {
                assert!(!seen[i], "term {i} in two groups");
                seen[i] = true;
                for &j in grp {
                    assert!(o.terms()[i]
                        .word
                        .qubitwise_commutes(&o.terms()[j].word)
                        .unwrap());
                }
            }
        }
        assert!(seen.iter().all(|&s| s));
        assert_eq!(g.group_count, g.groups.len());
    }

    #[test]
    fn evolved_three_qubit_example_needs_two_groups() {
        let o = obs(&["IZI", "IIZ", "ZII", "IXZ", "IZX"]);
        let g = group_qwc(&o);
        assert_eq!(g.group_count, 2);
        assert_valid(&o, &g);
    }

    #[test]
    fn printed_order_first_fit_needs_three() {
        // First-fit in the order the terms are usually written down.
        let words: Vec<PauliString> = ["IZI", "IIZ", "ZII", "IXZ", "IZX"]
            .iter()
            .map(|w| w.parse().unwrap())
            .collect();
        let refs: Vec<&PauliString> = words.iter().collect();
        let colors = first_fit_colors(&refs);
        assert_eq!(colors.iter().max().unwrap() + 1, 3);
    }

    #[test]
    fn all_z_is_one_group() {
        let o = obs(&["ZII", "IZI", "IIZ"]);
        assert_eq!(group_qwc(&o).group_count, 1);
    }

    #[test]
    fn single_qubit_paulis_pairwise_conflict() {
        let o = obs(&["X", "Y", "Z"]);
        let g = group_qwc(&o);
        assert_eq!(g.group_count, 3);
        assert_valid(&o, &g);
    }

    #[test]
    fn empty_observable_has_no_groups() {
        assert_eq!(group_qwc(&Observable::zero(3)).group_count, 0);
    }

    #[test]
    fn word_groups_ignore_identity_and_duplicates() {
        let ws: Vec<PauliString> = ["ZI", "ZI", "II", "XI"]
            .iter()
            .map(|w| w.parse().unwrap())
            .collect();
        assert_eq!(group_count_of_words(&ws), 2);
        let ids: Vec<PauliString> = vec!["II".parse().unwrap()];
        assert_eq!(group_count_of_words(&ids), 1);
    }
}
