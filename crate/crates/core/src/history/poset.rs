use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Finite poset of time labels with a distinguished chain `0..=T`.
///
/// The order is stored both as its transitive reduction (`cover`) and as the
/// full reflexive closure. For every label `p`, `t_p` is the largest chain
/// time `t` with `chain[t] <= p`, when one exists.
#[derive(Debug, Clone, PartialEq)]
pub struct TimePoset {
    labels: Vec<String>,
    cover: Vec<(usize, usize)>,
    leq: Vec<Vec<bool>>,
    chain: Vec<usize>,
    chain_time: Vec<Option<usize>>,
    t_p: Vec<Option<usize>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PosetJson {
    pub labels: Vec<String>,
    /// Pairs `(a, b)` meaning `a < b`.
    pub relations: Vec<(usize, usize)>,
    pub chain: Vec<usize>,
}

impl TimePoset {
    /// `relations` lists pairs `(a, b)` with `a < b`; they need not be
    /// transitively closed or reduced.
    pub fn new(
        labels: Vec<String>,
        relations: &[(usize, usize)],
        chain: Vec<usize>,
    ) -> Result<Self> {
        let q = labels.len();
        if q == 0 {
            return Err(Error::Validation("empty poset".into()));
        }
        let mut leq = vec![vec![false; q]; q];
        for (i, row) in leq.iter_mut().enumerate() {
            row[i] = true;
        }
        for &(a, b) in relations {
            if a >= q || b >= q {
                return Err(Error::Validation(format!(
                    "relation ({a}, {b}) outside poset of size {q}"
                )));
            }
            leq[a][b] = true;
        }
        for k in 0..q {
            for i in 0..q {
                if leq[i][k] {
                    for j in 0..q {
                        if leq[k][j] {
                            leq[i][j] = true;
                        }
                    }
                }
            }
        }
        for i in 0..q {
            for j in (i + 1)..q {
                if leq[i][j] && leq[j][i] {
                    return Err(Error::Validation(format!(
                        "relation is not antisymmetric: labels {i} and {j} precede each other"
                    )));
                }
            }
        }
        if chain.is_empty() {
            return Err(Error::Validation(
                "chain must contain at least time 0".into(),
            ));
        }
        let mut chain_time = vec![None; q];
        for (t, &p) in chain.iter().enumerate() {
            if p >= q {
                return Err(Error::Validation(format!(
                    "chain element {p} outside poset"
                )));
            }
            if chain_time[p].is_some() {
                return Err(Error::Validation(format!("chain repeats label {p}")));
            }
            chain_time[p] = Some(t);
        }
        for w in chain.windows(2) {
            if !leq[w[0]][w[1]] {
                return Err(Error::Validation(format!(
                    "chain is not totally ordered: {} does not precede {}",
                    w[0], w[1]
                )));
            }
        }
        let t_p = (0..q)
            .map(|p| (0..chain.len()).rev().find(|&t| leq[chain[t]][p]))
            .collect();
        let mut cover = Vec::new();
        for a in 0..q {
            for b in 0..q {
                if a != b && leq[a][b] {
                    let between = (0..q).any(|c| c != a && c != b && leq[a][c] && leq[c][b]);
                    if !between {
                        cover.push((a, b));
                    }
                }
            }
        }
        Ok(Self {
            labels,
            cover,
            leq,
            chain,
            chain_time,
            t_p,
        })
    }

    /// `P = T = {0, ..., T}` with the natural order.
    pub fn chain_only(t_len: usize) -> Self {
        let q = t_len + 1;
        Self {
            labels: (0..q).map(|t| t.to_string()).collect(),
            cover: (0..t_len).map(|t| (t, t + 1)).collect(),
            leq: (0..q).map(|a| (0..q).map(|b| a <= b).collect()).collect(),
            chain: (0..q).collect(),
            chain_time: (0..q).map(Some).collect(),
            t_p: (0..q).map(Some).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// Chain length minus one.
    pub fn t_len(&self) -> usize {
        self.chain.len() - 1
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn chain(&self) -> &[usize] {
        &self.chain
    }

    pub fn cover_relations(&self) -> &[(usize, usize)] {
        &self.cover
    }

    pub fn leq(&self, a: usize, b: usize) -> bool {
        self.leq[a][b]
    }

    /// Chain time of `p` if `p` lies on the chain.
    pub fn chain_time(&self, p: usize) -> Option<usize> {
        self.chain_time[p]
    }

    pub fn t_p(&self, p: usize) -> Option<usize> {
        self.t_p[p]
    }

    pub fn is_chain_only(&self) -> bool {
        self.chain.len() == self.labels.len()
    }

    /// Position of each label in a deterministic linear extension
    /// (Kahn's algorithm, smallest index first).
    pub fn linear_extension_rank(&self) -> Vec<usize> {
        let q = self.len();
        let mut indegree = vec![0usize; q];
        for &(_, b) in &self.cover {
            indegree[b] += 1;
        }
        let mut ready: std::collections::BTreeSet<usize> =
            (0..q).filter(|&p| indegree[p] == 0).collect();
        let mut rank = vec![0usize; q];
        let mut next = 0;
        while let Some(p) = ready.pop_first() {
            rank[p] = next;
            next += 1;
            for &(a, b) in &self.cover {
                if a == p {
                    indegree[b] -= 1;
                    if indegree[b] == 0 {
                        ready.insert(b);
                    }
                }
            }
        }
        rank
    }

    pub fn to_json(&self) -> PosetJson {
        PosetJson {
            labels: self.labels.clone(),
            relations: self.cover.clone(),
            chain: self.chain.clone(),
        }
    }

    pub fn from_json(doc: &PosetJson) -> Result<Self> {
        Self::new(doc.labels.clone(), &doc.relations, doc.chain.clone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chain_t_p_is_identity() {
        let p = TimePoset::chain_only(4);
        for t in 0..=4 {
            assert_eq!(p.t_p(t), Some(t));
        }
        assert_eq!(p.cover_relations().len(), 4);
    }

    #[test]
    fn junk_labels_get_t_p() {
        // chain 0 < 1 < 2, junk 3 above 1, junk 4 unrelated
        let labels = (0..5).map(|i| i.to_string()).collect();
        let p = TimePoset::new(labels, &[(0, 1), (1, 2), (1, 3), (0, 2)], vec![0, 1, 2]).unwrap();
        assert_eq!(p.t_p(3), Some(1));
        assert_eq!(p.t_p(4), None);
        assert!(p.leq(0, 3));
        assert!(!p.cover_relations().contains(&(0, 2)));
        let rank = p.linear_extension_rank();
        assert!(rank[0] < rank[1] && rank[1] < rank[2] && rank[1] < rank[3]);
    }

    #[test]
    fn cycles_rejected() {
        let labels = (0..2).map(|i| i.to_string()).collect();
        assert!(TimePoset::new(labels, &[(0, 1), (1, 0)], vec![0]).is_err());
    }

    #[test]
    fn unordered_chain_rejected() {
        let labels = (0..2).map(|i| i.to_string()).collect();
        assert!(TimePoset::new(labels, &[], vec![0, 1]).is_err());
    }
}
