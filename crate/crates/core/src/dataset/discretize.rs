use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{AttributeKind, Dataset};

/// A cut between two adjacent distinct training values.
///
/// `edge` is the midpoint; `below`/`above` are the nearest training values on
/// either side. Rules render and evaluate the cut as `value <= below`, which
/// agrees with the midpoint on every training value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Cut {
    pub edge: f64,
    pub below: f64,
    pub above: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum AttributeBins {
    /// Continuous or ordinal attribute; cuts sorted by edge.
    Ordered {
        cuts: Vec<Cut>,
    },
    Categorical {
        levels: usize,
    },
}

impl AttributeBins {
    pub fn arity(&self) -> usize {
        match self {
            AttributeBins::Ordered { cuts } => cuts.len() + 1,
            AttributeBins::Categorical { levels } => *levels,
        }
    }

    pub fn is_ordered(&self) -> bool {
        matches!(self, AttributeBins::Ordered { .. })
    }

    /// Bin whose edges bracket `raw`; a value equal to an edge falls in the lower bin.
    pub fn code(&self, raw: f64) -> usize {
        match self {
            AttributeBins::Ordered { cuts } => cuts.iter().filter(|c| raw > c.edge).count(),
            AttributeBins::Categorical { levels } => (raw as usize).min(levels.saturating_sub(1)),
        }
    }

    /// Bin under the rendered `<= below` thresholds.
    pub fn code_by_threshold(&self, raw: f64) -> usize {
        match self {
            AttributeBins::Ordered { cuts } => cuts.iter().filter(|c| raw > c.below).count(),
            AttributeBins::Categorical { .. } => self.code(raw),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscretizedView {
    pub attributes: Vec<AttributeBins>,
    /// One code vector per training pattern, in pattern order.
    pub codes: Vec<Vec<usize>>,
}

impl DiscretizedView {
    pub fn bin_edges(&self) -> Vec<Vec<f64>> {
        self.attributes
            .iter()
            .map(|a| match a {
                AttributeBins::Ordered { cuts } => cuts.iter().map(|c| c.edge).collect(),
                AttributeBins::Categorical { .. } => Vec::new(),
            })
            .collect()
    }

    pub fn arity(&self, attribute: usize) -> usize {
        self.attributes[attribute].arity()
    }

    pub fn encode(&self, raw: &[f64]) -> Vec<usize> {
        self.attributes
            .iter()
            .zip(raw)
            .map(|(a, &v)| a.code(v))
            .collect()
    }

    pub fn encode_by_threshold(&self, raw: &[f64]) -> Vec<usize> {
        self.attributes
            .iter()
            .zip(raw)
            .map(|(a, &v)| a.code_by_threshold(v))
            .collect()
    }
}

/// Discretizes every attribute of the training split.
///
/// Ordered attributes get cuts at class-boundary midpoints: between adjacent
/// distinct values unless both values carry one and the same class. At most
/// `bins_per_attribute - 1` cuts are kept, chosen greedily by the largest drop
/// in weighted class entropy; a cut that does not lower the entropy is never
/// added. Categorical attributes keep one code per category.
pub fn discretize_inputs(train: &Dataset, bins_per_attribute: usize) -> DiscretizedView {
    let max_cuts = bins_per_attribute.max(2) - 1;
    let classes = train.class_count();
    let attributes: Vec<AttributeBins> = train
        .schema
        .attributes
        .iter()
        .enumerate()
        .map(|(a, spec)| match spec.kind {
            AttributeKind::Categorical => AttributeBins::Categorical {
                levels: spec.categories.len(),
            },
            _ => {
                let column: Vec<(f64, usize)> = train
                    .patterns
                    .iter()
                    .map(|p| (p.raw[a], p.class_index))
                    .collect();
                AttributeBins::Ordered {
                    cuts: select_cuts(&column, classes, max_cuts),
                }
            }
        })
        .collect();
    let codes = train
        .patterns
        .iter()
        .map(|p| {
            attributes
                .iter()
                .zip(&p.raw)
                .map(|(b, &v)| b.code(v))
                .collect()
        })
        .collect();
    DiscretizedView { attributes, codes }
}

/// Class histogram per distinct value, ascending by value.
fn value_histogram(column: &[(f64, usize)], classes: usize) -> Vec<(f64, Vec<usize>)> {
    let mut sorted: Vec<(f64, usize)> = column.to_vec();
    sorted.sort_by(|x, y| x.0.total_cmp(&y.0));
    let mut out: Vec<(f64, Vec<usize>)> = Vec::new();
    for (v, c) in sorted {
        match out.last_mut() {
            Some((last, hist)) if *last == v => hist[c] += 1,
            _ => {
                let mut hist = vec![0; classes];
                hist[c] += 1;
                out.push((v, hist));
            }
        }
    }
    out
}

fn single_class(hist: &[usize]) -> Option<usize> {
    let mut nonzero = hist.iter().enumerate().filter(|(_, &n)| n > 0);
    let first = nonzero.next()?.0;
    nonzero.next().is_none().then_some(first)
}

fn entropy_weighted(hist: &[usize]) -> f64 {
    let n: usize = hist.iter().sum();
    if n == 0 {
        return 0.0;
    }
    let n = n as f64;
    -hist
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / n;
            c as f64 * p.ln()
        })
        .sum::<f64>()
}

/// Total weighted entropy of the partition induced by cutting after the given
/// histogram positions.
fn partition_entropy(prefix: &[Vec<usize>], boundaries: &[usize]) -> f64 {
    let mut total = 0.0;
    let mut start = 0;
    let last = prefix.len() - 1;
    for &b in boundaries.iter().chain(std::iter::once(&last)) {
        let seg: Vec<usize> = prefix[b]
            .iter()
            .zip(&prefix[start])
            .map(|(hi, lo)| hi - lo)
            .collect();
        total += entropy_weighted(&seg);
        start = b;
    }
    total
}

pub(crate) fn select_cuts(column: &[(f64, usize)], classes: usize, max_cuts: usize) -> Vec<Cut> {
    let hist = value_histogram(column, classes);
    if hist.len() < 2 {
        return Vec::new();
    }
    // candidate i sits between hist[i] and hist[i + 1]
    let candidates: Vec<usize> = (0..hist.len() - 1)
        .filter(
            |&i| match (single_class(&hist[i].1), single_class(&hist[i + 1].1)) {
                (Some(a), Some(b)) => a != b,
                _ => true,
            },
        )
        .collect();

    // prefix[k] = class counts of the first k distinct values
    let mut prefix = vec![vec![0usize; classes]];
    for (_, h) in &hist {
        let next: Vec<usize> = prefix
            .last()
            .unwrap()
            .iter()
            .zip(h)
            .map(|(a, b)| a + b)
            .collect();
        prefix.push(next);
    }

    let mut chosen: Vec<usize> = Vec::new(); // prefix positions (i + 1)
    let mut current = partition_entropy(&prefix, &chosen);
    while chosen.len() < max_cuts {
        let mut best: Option<(f64, usize)> = None;
        for &i in &candidates {
            let pos = i + 1;
            if chosen.contains(&pos) {
                continue;
            }
            let mut trial = chosen.clone();
            trial.push(pos);
            trial.sort_unstable();
            let e = partition_entropy(&prefix, &trial);
            if best.is_none_or(|(be, _)| e < be - 1e-12) {
                best = Some((e, pos));
            }
        }
        match best {
            Some((e, pos)) if e < current - 1e-12 => {
                chosen.push(pos);
                chosen.sort_unstable();
                current = e;
            }
            _ => break,
        }
    }

    chosen
        .into_iter()
        .map(|pos| {
            let below = hist[pos - 1].0;
            let above = hist[pos].0;
            Cut {
                edge: (below + above) / 2.0,
                below,
                above,
            }
        })
        .collect()
}

/// Fraction of patterns that disagree with the majority class of their code
/// vector: `sum(group size - majority count) / n`.
pub fn inconsistency_rate(codes: &[Vec<usize>], classes: &[usize]) -> f64 {
    if codes.is_empty() {
        return 0.0;
    }
    let mut groups: BTreeMap<&[usize], BTreeMap<usize, usize>> = BTreeMap::new();
    for (code, &class) in codes.iter().zip(classes) {
        *groups
            .entry(code.as_slice())
            .or_default()
            .entry(class)
            .or_default() += 1;
    }
    let minority: usize = groups
        .values()
        .map(|hist| {
            let size: usize = hist.values().sum();
            size - hist.values().copied().max().unwrap_or(0)
        })
        .sum();
    minority as f64 / codes.len() as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_boundary_cut() {
        let col = [(1.0, 0), (1.0, 0), (2.0, 1), (2.0, 1)];
        let cuts = select_cuts(&col, 2, 4);
        assert_eq!(cuts.len(), 1);
        assert_eq!(cuts[0].edge, 1.5);
        assert_eq!((cuts[0].below, cuts[0].above), (1.0, 2.0));
    }

    #[test]
    fn brute_force_best_single_cut() {
        // oracle: every midpoint, pick the minimum weighted entropy
        let col = [
            (0.1, 0),
            (0.2, 0),
            (0.3, 1),
            (0.4, 0),
            (0.5, 1),
            (0.6, 1),
            (0.7, 1),
        ];
        let mids: Vec<f64> = (0..6).map(|i| (col[i].0 + col[i + 1].0) / 2.0).collect();
        let score = |m: f64| {
            let mut lo = vec![0usize; 2];
            let mut hi = vec![0usize; 2];
            for &(v, c) in &col {
                if v <= m {
                    lo[c] += 1
                } else {
                    hi[c] += 1
                }
            }
            entropy_weighted(&lo) + entropy_weighted(&hi)
        };
        let best = mids
            .iter()
            .copied()
            .min_by(|a, b| score(*a).total_cmp(&score(*b)))
            .unwrap();
        let cuts = select_cuts(&col, 2, 1);
        assert!((cuts[0].edge - best).abs() < 1e-12);
    }

    #[test]
    fn constant_column_has_no_cuts() {
        assert!(select_cuts(&[(3.0, 0), (3.0, 1)], 2, 3).is_empty());
    }

    #[test]
    fn pure_runs_are_not_cut() {
        let col = [(1.0, 0), (2.0, 0), (3.0, 0), (4.0, 1)];
        let cuts = select_cuts(&col, 2, 5);
        assert_eq!(cuts.len(), 1);
        assert_eq!(cuts[0].edge, 3.5);
    }

    #[test]
    fn codes_bracket_values() {
        let bins = AttributeBins::Ordered {
            cuts: vec![
                Cut {
                    edge: 1.5,
                    below: 1.0,
                    above: 2.0,
                },
                Cut {
                    edge: 3.5,
                    below: 3.0,
                    above: 4.0,
                },
            ],
        };
        assert_eq!(bins.code(1.0), 0);
        assert_eq!(bins.code(1.5), 0);
        assert_eq!(bins.code(2.0), 1);
        assert_eq!(bins.code(9.0), 2);
        assert_eq!(bins.code_by_threshold(1.2), 1);
        assert_eq!(bins.code(1.2), 0);
    }

    #[test]
    fn inconsistency_examples() {
        let distinct = vec![vec![0], vec![1], vec![2]];
        assert_eq!(inconsistency_rate(&distinct, &[0, 1, 0]), 0.0);
        let codes = vec![vec![0, 0], vec![0, 0], vec![1, 0], vec![1, 1]];
        assert_eq!(inconsistency_rate(&codes, &[0, 1, 0, 1]), 0.25);
        let same = vec![vec![5], vec![5], vec![5]];
        assert!((inconsistency_rate(&same, &[0, 0, 1]) - 1.0 / 3.0).abs() < 1e-15);
    }
}
