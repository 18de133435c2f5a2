/// Outcome of a 0/1 knapsack solve.
#[derive(Clone, Debug, PartialEq)]
pub struct KnapsackResult {
    /// Chosen item indices, ascending.
    pub chosen: Vec<usize>,
    pub value: f64,
    pub weight: usize,
}

/// Exact 0/1 knapsack by dynamic programming over capacity.
///
/// An item only enters the table when it strictly improves the value, so
/// among equal-value optima the higher-indexed item is left out.
pub fn knapsack_select(values: &[f64], weights: &[usize], capacity: usize) -> KnapsackResult {
    assert_eq!(values.len(), weights.len(), "one weight per value");
    let n = values.len();
    let width = capacity + 1;
    let mut best = vec![0.0f64; width];
    let mut keep = vec![false; n * width];

    for i in 0..n {
        let w = weights[i];
        if w > capacity {
            continue;
        }
        // Descending capacity so each item is used at most once.
        for c in (w..=capacity).rev() {
            let with = best[c - w] + values[i];
            if with > best[c] {
                best[c] = with;
                keep[i * width + c] = true;
            }
        }
    }

    let mut chosen = Vec::new();
    let mut c = capacity;
    for i in (0..n).rev() {
        if keep[i * width + c] {
            chosen.push(i);
            c -= weights[i];
        }
    }
    chosen.reverse();
    let value = chosen.iter().map(|&i| values[i]).sum();
    let weight = chosen.iter().map(|&i| weights[i]).sum();
    KnapsackResult { chosen, value, weight }
}
