use crate::dataio::{Segment, SourceStream};
use crate::error::{Error, Result};

/// Step-level segmentation produced by [`kts_segment`].
#[derive(Clone, Debug, PartialEq)]
pub struct StepSegmentation {
    /// `[start, end)` step ranges, contiguous from 0 to `n_steps`.
    pub segments: Vec<Segment>,
    /// Sum over segments of squared deviation from the segment mean.
    pub cost: f64,
}

/// Default number of shots: one per 20 steps (about ten seconds).
pub fn default_shot_count(n_steps: usize) -> usize {
    ((n_steps as f64 / 20.0).round() as usize).max(1)
}

/// Within-segment scatter via prefix sums.
pub(crate) struct ScatterCost {
    dim: usize,
    /// `(n+1) × dim` prefix sums of rows.
    sums: Vec<f64>,
    /// `n+1` prefix sums of squared row norms.
    sq: Vec<f64>,
}

impl ScatterCost {
    pub fn new(values: &[f64], n: usize, dim: usize) -> Self {
        let mut sums = vec![0.0; (n + 1) * dim];
        let mut sq = vec![0.0; n + 1];
        for t in 0..n {
            let row = &values[t * dim..(t + 1) * dim];
            sq[t + 1] = sq[t] + row.iter().map(|v| v * v).sum::<f64>();
            for j in 0..dim {
                sums[(t + 1) * dim + j] = sums[t * dim + j] + row[j];
            }
        }
        ScatterCost { dim, sums, sq }
    }

    /// `Σ_{t∈[i,j)} ‖x_t − μ‖²`
    pub fn cost(&self, i: usize, j: usize) -> f64 {
        let len = (j - i) as f64;
        let mut norm = 0.0;
        for k in 0..self.dim {
            let s = self.sums[j * self.dim + k] - self.sums[i * self.dim + k];
            norm += s * s;
        }
        (self.sq[j] - self.sq[i] - norm / len).max(0.0)
    }
}

/// Optimal partition of the steps into `target` (default
/// [`default_shot_count`]) contiguous segments minimizing total
/// within-segment scatter.
pub fn kts_segment(features: &SourceStream, target: Option<usize>) -> Result<StepSegmentation> {
    let n = features.n_steps;
    let k_max = target.unwrap_or_else(|| default_shot_count(n));
    if k_max == 0 || k_max > n {
        return Err(Error::range(
            "target segments",
            format!("{k_max} must lie in 1..={n}"),
        ));
    }
    let sc = ScatterCost::new(&features.values, n, features.dim);

    // best[k][j]: min cost of splitting [0, j) into k+1 segments.
    let mut best = vec![vec![f64::INFINITY; n + 1]; k_max];
    let mut from = vec![vec![0usize; n + 1]; k_max];
    for j in 1..=n {
        best[0][j] = sc.cost(0, j);
    }
    for k in 1..k_max {
        for j in (k + 1)..=n {
            for i in k..j {
                let c = best[k - 1][i] + sc.cost(i, j);
                if c < best[k][j] {
                    best[k][j] = c;
                    from[k][j] = i;
                }
            }
        }
    }

    let mut segments = Vec::with_capacity(k_max);
    let mut end = n;
    for k in (0..k_max).rev() {
        let start = if k == 0 { 0 } else { from[k][end] };
        segments.push((start, end));
        end = start;
    }
    segments.reverse();
    Ok(StepSegmentation {
        segments,
        cost: best[k_max - 1][n],
    })
}

/// Maps step segments to original frames: a segment starting at step `a`
/// starts at `picks[a]` (0 for the first), the last ends at `n_frames`.
pub fn steps_to_frames(segments: &[Segment], picks: &[usize], n_frames: usize) -> Vec<Segment> {
    let at = |step: usize| {
        if step == 0 {
            0
        } else if step >= picks.len() {
            n_frames
        } else {
            picks[step]
        }
    };
    segments.iter().map(|&(a, b)| (at(a), at(b))).collect()
}
