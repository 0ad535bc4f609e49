//! Statistics over many random-restart trials: best errors, a log-spaced
//! error histogram with its modes, and clustering of minima by parameter
//! distance.

use serde::{Deserialize, Serialize};

use super::FitResult;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleOptions {
    pub n_top: usize,
    pub bins: usize,
    /// Two minima join when `‖u - v‖ ≤ threshold · max(‖u‖, ‖v‖, 1)`.
    pub cluster_threshold: f64,
    /// A histogram peak counts as a mode only with at least this fraction of
    /// the finite trials (and never fewer than two).
    pub mode_fraction: f64,
    /// Minimum prominence of a mode relative to its height.
    pub mode_prominence: f64,
}

impl Default for EnsembleOptions {
    fn default() -> Self {
        Self { n_top: 5, bins: 20, cluster_threshold: 1e-3, mode_fraction: 0.02, mode_prominence: 0.5 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    /// `bins + 1` increasing edges, log-spaced.
    pub edges: Vec<f64>,
    pub counts: Vec<usize>,
}

impl Histogram {
    /// Equal-width bins in `log10` between the smallest and largest value.
    pub fn log_spaced(values: &[f64], bins: usize) -> Histogram {
        let vals: Vec<f64> = values.iter().copied().filter(|v| v.is_finite() && *v > 0.0).collect();
        let bins = bins.max(1);
        if vals.is_empty() {
            return Histogram { edges: vec![], counts: vec![] };
        }
        let mut lo = vals.iter().copied().fold(f64::INFINITY, f64::min).log10();
        let mut hi = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max).log10();
        if hi - lo < 1e-12 {
            lo -= 0.5;
            hi += 0.5;
        }
        let width = (hi - lo) / bins as f64;
        let edges: Vec<f64> = (0..=bins).map(|i| 10f64.powf(lo + width * i as f64)).collect();
        let mut counts = vec![0; bins];
        for v in vals {
            let k = (((v.log10() - lo) / width).floor() as usize).min(bins - 1);
            counts[k] += 1;
        }
        Histogram { edges, counts }
    }

    /// Indices of peak bins. A peak is a maximal run of equal counts higher
    /// than both neighbouring runs, reported by its first bin, and it counts
    /// when its height is at least `min_count` and its topographic prominence
    /// is at least `rel_prominence` times its height. Counts beyond the edges
    /// are taken as zero.
    pub fn modes(&self, min_count: usize, rel_prominence: f64) -> Vec<usize> {
        let c = &self.counts;
        let mut peaks = Vec::new();
        let mut i = 0;
        while i < c.len() {
            let mut j = i;
            while j + 1 < c.len() && c[j + 1] == c[i] {
                j += 1;
            }
            let h = c[i];
            let left_lower = i == 0 || c[i - 1] < h;
            let right_lower = j + 1 == c.len() || c[j + 1] < h;
            if left_lower && right_lower && h >= min_count {
                let base = |range: &mut dyn Iterator<Item = usize>| {
                    let mut lowest = h;
                    for k in range {
                        if c[k] > h {
                            return lowest;
                        }
                        lowest = lowest.min(c[k]);
                    }
                    0
                };
                let left = base(&mut (0..i).rev());
                let right = base(&mut (j + 1..c.len()));
                let prominence = h - left.max(right);
                if prominence as f64 >= rel_prominence * h as f64 {
                    peaks.push(i);
                }
            }
            i = j + 1;
        }
        peaks
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopEntry {
    pub trial: u64,
    pub error: f64,
    pub cluster: usize,
    pub params: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleSummary {
    pub n_trials: usize,
    pub n_diverged: usize,
    /// Best `n_top` trials by ascending error.
    pub top: Vec<TopEntry>,
    pub histogram: Histogram,
    /// Peak bins of the histogram.
    pub modes: Vec<usize>,
    /// Number of clusters among all finite trials.
    pub n_clusters: usize,
    /// Number of distinct clusters among the top entries.
    pub top_clusters: usize,
}

struct DisjointSet(Vec<usize>);

impl DisjointSet {
    fn find(&mut self, mut i: usize) -> usize {
        while self.0[i] != i {
            self.0[i] = self.0[self.0[i]];
            i = self.0[i];
        }
        i
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.0[ra.max(rb)] = ra.min(rb);
        }
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Single-linkage clustering; labels are dense and ordered by first member.
pub fn cluster_points(points: &[&[f64]], threshold: f64) -> Vec<usize> {
    let n = points.len();
    let norms: Vec<f64> = points.iter().map(|p| norm(p)).collect();
    let mut set = DisjointSet((0..n).collect());
    for i in 0..n {
        for j in i + 1..n {
            let d = points[i].iter().zip(points[j]).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
            if d <= threshold * norms[i].max(norms[j]).max(1.0) {
                set.union(i, j);
            }
        }
    }
    let mut label_of_root = std::collections::HashMap::new();
    (0..n)
        .map(|i| {
            let r = set.find(i);
            let next = label_of_root.len();
            *label_of_root.entry(r).or_insert(next)
        })
        .collect()
}

/// Groups finite errors into levels: sorted ascending, a new level starts
/// wherever consecutive values differ by at least the factor `ratio`.
pub fn error_levels(errors: &[f64], ratio: f64) -> Vec<Vec<f64>> {
    let mut sorted: Vec<f64> = errors.iter().copied().filter(|e| e.is_finite()).collect();
    sorted.sort_by(f64::total_cmp);
    let mut levels: Vec<Vec<f64>> = Vec::new();
    for e in sorted {
        match levels.last_mut() {
            Some(level) if e < ratio * level.last().copied().unwrap_or(e) => level.push(e),
            _ => levels.push(vec![e]),
        }
    }
    levels
}

pub fn ensemble_stats(result: &FitResult, opts: &EnsembleOptions) -> EnsembleSummary {
    let mut finite: Vec<usize> = (0..result.trials.len()).filter(|&i| result.trials[i].error.is_finite()).collect();
    finite.sort_by(|&a, &b| result.trials[a].error.total_cmp(&result.trials[b].error).then(a.cmp(&b)));

    let points: Vec<&[f64]> = finite.iter().map(|&i| result.trials[i].params.0.as_slice()).collect();
    let labels = cluster_points(&points, opts.cluster_threshold);
    let n_clusters = labels.iter().copied().max().map_or(0, |m| m + 1);

    let top: Vec<TopEntry> = finite
        .iter()
        .zip(&labels)
        .take(opts.n_top)
        .map(|(&i, &cluster)| {
            let t = &result.trials[i];
            TopEntry { trial: t.trial, error: t.error, cluster, params: t.params.0.clone() }
        })
        .collect();
    let mut top_labels: Vec<usize> = top.iter().map(|t| t.cluster).collect();
    top_labels.sort_unstable();
    top_labels.dedup();

    let errors: Vec<f64> = finite.iter().map(|&i| result.trials[i].error).collect();
    let histogram = Histogram::log_spaced(&errors, opts.bins);
    let min_count = ((opts.mode_fraction * errors.len() as f64).ceil() as usize).max(2);
    let modes = histogram.modes(min_count, opts.mode_prominence);

    EnsembleSummary {
        n_trials: result.trials.len(),
        n_diverged: result.trials.len() - finite.len(),
        top,
        histogram,
        modes,
        n_clusters,
        top_clusters: top_labels.len(),
    }
}
