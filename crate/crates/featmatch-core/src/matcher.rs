//! Brute-force Hamming matching with cross-check, k-nearest-neighbor
//! retrieval, distance sorting, and match filtering.
//!
//! Tie-breaking is fixed everywhere: the lowest candidate index wins. That
//! keeps every result reproducible and lets the oracle tests check exact
//! equality.

use crate::descriptor::{hamming_distance, BinaryDescriptor, DESCRIPTOR_BITS};
use crate::error::{Error, Result};

/// A correspondence between a query descriptor and a train descriptor.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Match {
    pub query_idx: usize,
    pub train_idx: usize,
    /// Hamming distance in bits, in [0, 256].
    pub distance_bits: u32,
}

impl Match {
    /// Distance normalized by bit length, exactly `distance_bits / 256`.
    #[inline]
    pub fn distance_norm(&self) -> f64 {
        self.distance_bits as f64 / DESCRIPTOR_BITS as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MatchFilterMode {
    /// Keep matches whose normalized distance is strictly below the threshold.
    AbsoluteThreshold,
    /// Keep a query's best match iff best < threshold × second-best.
    LoweRatio,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MatchFilterConfig {
    pub mode: MatchFilterMode,
    pub threshold: f64,
}

impl Default for MatchFilterConfig {
    fn default() -> Self {
        Self {
            mode: MatchFilterMode::AbsoluteThreshold,
            threshold: 0.7,
        }
    }
}

impl MatchFilterConfig {
    pub fn validate(&self) -> Result<()> {
        let ok = match self.mode {
            MatchFilterMode::AbsoluteThreshold => self.threshold > 0.0 && self.threshold <= 1.0,
            MatchFilterMode::LoweRatio => self.threshold > 0.0 && self.threshold < 1.0,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidConfig(format!(
                "filter threshold {} out of range for {:?}",
                self.threshold, self.mode
            )))
        }
    }
}

/// Nearest-neighbor matching. Without cross-check, every query yields one
/// match to its nearest train descriptor (ties to the lowest train index).
/// With cross-check, a pair `(i, j)` is kept iff `j` is `i`'s nearest and `i`
/// is `j`'s nearest under the same tie rule. Empty inputs yield no matches.
pub fn match_brute_force(
    query: &[BinaryDescriptor],
    train: &[BinaryDescriptor],
    cross_check: bool,
) -> Vec<Match> {
    if query.is_empty() || train.is_empty() {
        return Vec::new();
    }
    // best train index per query; strictly-smaller updates keep the first
    // (lowest) index on ties
    let mut best_for_query: Vec<(u32, usize)> = vec![(u32::MAX, 0); query.len()];
    let mut best_for_train: Vec<(u32, usize)> = vec![(u32::MAX, 0); train.len()];
    for (i, q) in query.iter().enumerate() {
        for (j, t) in train.iter().enumerate() {
            let d = hamming_distance(q, t);
            if d < best_for_query[i].0 {
                best_for_query[i] = (d, j);
            }
            if d < best_for_train[j].0 {
                best_for_train[j] = (d, i);
            }
        }
    }
    let mut out = Vec::new();
    for (i, &(d, j)) in best_for_query.iter().enumerate() {
        if cross_check && best_for_train[j].1 != i {
            continue;
        }
        out.push(Match {
            query_idx: i,
            train_idx: j,
            distance_bits: d,
        });
    }
    out
}

/// Per query, the `k` nearest train descriptors in ascending distance order,
/// ties by lowest train index.
pub fn knn_match(
    query: &[BinaryDescriptor],
    train: &[BinaryDescriptor],
    k: usize,
) -> Result<Vec<Vec<Match>>> {
    if k < 1 {
        return Err(Error::InvalidConfig("knn requires k >= 1".into()));
    }
    if k > train.len() {
        return Err(Error::KnnTooLarge {
            k,
            train_len: train.len(),
        });
    }
    let mut out = Vec::with_capacity(query.len());
    for (i, q) in query.iter().enumerate() {
        let mut dists: Vec<(u32, usize)> = train
            .iter()
            .enumerate()
            .map(|(j, t)| (hamming_distance(q, t), j))
            .collect();
        dists.sort_unstable(); // (distance, train_idx) gives the tie rule for free
        out.push(
            dists[..k]
                .iter()
                .map(|&(d, j)| Match {
                    query_idx: i,
                    train_idx: j,
                    distance_bits: d,
                })
                .collect(),
        );
    }
    Ok(out)
}

/// Filter matches. `AbsoluteThreshold` keeps matches with normalized distance
/// strictly below the threshold. `LoweRatio` needs `knn_pairs` with k = 2
/// (indexed by query) and keeps a match iff its distance is strictly below
/// threshold × second-best. Relative order is preserved in both modes.
pub fn filter_matches(
    matches: &[Match],
    cfg: &MatchFilterConfig,
    knn_pairs: Option<&[Vec<Match>]>,
) -> Result<Vec<Match>> {
    cfg.validate()?;
    if matches.is_empty() {
        return Ok(Vec::new());
    }
    match cfg.mode {
        MatchFilterMode::AbsoluteThreshold => Ok(matches
            .iter()
            .filter(|m| m.distance_norm() < cfg.threshold)
            .copied()
            .collect()),
        MatchFilterMode::LoweRatio => {
            let knn = knn_pairs.ok_or(Error::MissingKnnPairs)?;
            let mut out = Vec::new();
            for m in matches {
                let neighbors = knn.get(m.query_idx).ok_or(Error::MissingKnnPairs)?;
                if neighbors.len() < 2 {
                    return Err(Error::MissingKnnPairs);
                }
                let second = neighbors[1].distance_bits as f64;
                if (m.distance_bits as f64) < cfg.threshold * second {
                    out.push(*m);
                }
            }
            Ok(out)
        }
    }
}

/// Stable ascending sort by Hamming distance.
pub fn sort_matches(mut matches: Vec<Match>) -> Vec<Match> {
    matches.sort_by_key(|m| m.distance_bits);
    matches
}
