//! Dynamic time warping over feature frame sequences.

/// Path-length-normalized DTW distance between two frame matrices, with unit
/// step weights over the per-frame Euclidean distance. Both sequences must be
/// non-empty and share the feature dimension.
pub fn dtw_distance(a: &[Vec<f64>], b: &[Vec<f64>]) -> f64 {
    assert!(!a.is_empty() && !b.is_empty(), "empty sequence");
    let (la, lb) = (a.len(), b.len());
    let big = f64::INFINITY;

    // cost[j], steps[j] hold row i of the DP table.
    let mut cost = vec![big; lb + 1];
    let mut steps = vec![0usize; lb + 1];
    let mut prev_cost = vec![big; lb + 1];
    let mut prev_steps = vec![0usize; lb + 1];
    prev_cost[0] = 0.0;

    for i in 1..=la {
        cost[0] = big;
        for j in 1..=lb {
            let d = frame_distance(&a[i - 1], &b[j - 1]);
            // candidates: diagonal, above (advance a), left (advance b)
            let (c, s) = {
                let mut best = (prev_cost[j - 1], prev_steps[j - 1]);
                if prev_cost[j] < best.0 {
                    best = (prev_cost[j], prev_steps[j]);
                }
                if cost[j - 1] < best.0 {
                    best = (cost[j - 1], steps[j - 1]);
                }
                best
            };
            cost[j] = c + d;
            steps[j] = s + 1;
        }
        std::mem::swap(&mut cost, &mut prev_cost);
        std::mem::swap(&mut steps, &mut prev_steps);
    }
    prev_cost[lb] / prev_steps[lb] as f64
}

fn frame_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rows(vals: &[f64]) -> Vec<Vec<f64>> {
        vals.iter().map(|&v| vec![v]).collect()
    }

    #[test]
    fn identical_sequences_have_zero_distance() {
        let a = rows(&[0.0, 1.0, 2.0, 1.0]);
        assert_eq!(dtw_distance(&a, &a), 0.0);
    }

    #[test]
    fn time_stretched_copies_are_close() {
        let a = rows(&[0.0, 1.0, 2.0, 3.0]);
        let b = rows(&[0.0, 0.0, 1.0, 1.0, 2.0, 2.0, 3.0, 3.0]);
        let c = rows(&[3.0, 2.0, 1.0, 0.0]);
        assert!(dtw_distance(&a, &b) < 0.2);
        assert!(dtw_distance(&a, &b) < dtw_distance(&a, &c));
    }

    #[test]
    fn symmetric() {
        let a = rows(&[0.0, 1.0, 0.5, 2.0]);
        let b = rows(&[1.0, 1.5, 0.0]);
        assert!((dtw_distance(&a, &b) - dtw_distance(&b, &a)).abs() < 1e-12);
    }

    #[test]
    fn constant_offset_sequences_score_the_offset() {
        // Every matched pair differs by exactly 0.5, whatever the path.
        let a = rows(&[1.0, 1.0, 1.0]);
        let b = rows(&[1.5, 1.5, 1.5, 1.5]);
        assert!((dtw_distance(&a, &b) - 0.5).abs() < 1e-12);
    }
}
