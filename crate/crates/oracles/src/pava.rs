/// Weighted antitonic (nonincreasing) least-squares fit by
/// pool-adjacent-violators.
pub fn antitonic(values: &[f64], weights: &[f64]) -> Vec<f64> {
    assert_eq!(values.len(), weights.len());
    // blocks of (mean, weight, length)
    let mut blocks: Vec<(f64, f64, usize)> = Vec::new();
    for (&v, &w) in values.iter().zip(weights) {
        blocks.push((v, w, 1));
        while blocks.len() >= 2 {
            let m = blocks.len();
            if blocks[m - 2].0 >= blocks[m - 1].0 {
                break;
            }
            let (v2, w2, l2) = blocks.pop().unwrap();
            let (v1, w1, l1) = blocks.pop().unwrap();
            let w = w1 + w2;
            blocks.push(((v1 * w1 + v2 * w2) / w, w, l1 + l2));
        }
    }
    blocks.into_iter().flat_map(|(v, _, l)| std::iter::repeat_n(v, l)).collect()
}
