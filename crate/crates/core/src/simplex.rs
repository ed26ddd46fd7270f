//! Euclidean projection onto the probability simplex.

/// Nearest point of the probability simplex to `v`, by Michelot's
/// active-set iteration.
pub fn project(v: &[f64]) -> Vec<f64> {
    let n = v.len();
    assert!(n > 0, "cannot project onto an empty simplex");
    let mut active = vec![true; n];
    let mut count = n;
    let mut tau;
    loop {
        let sum: f64 = v.iter().zip(&active).filter(|(_, a)| **a).map(|(x, _)| x).sum();
        tau = (sum - 1.0) / count as f64;
        let mut removed = false;
        for (i, a) in active.iter_mut().enumerate() {
            if *a && v[i] - tau <= 0.0 {
                *a = false;
                count -= 1;
                removed = true;
            }
        }
        if !removed || count == 0 {
            break;
        }
    }
    if count == 0 {
        // every coordinate dropped out at once: put all mass on the largest
        let mut out = vec![0.0; n];
        let k = (0..n).max_by(|&a, &b| v[a].total_cmp(&v[b]).then(b.cmp(&a))).unwrap();
        out[k] = 1.0;
        return out;
    }
    let mut out: Vec<f64> = v
        .iter()
        .zip(&active)
        .map(|(x, a)| if *a { (x - tau).max(0.0) } else { 0.0 })
        .collect();
    // absorb rounding so the result sums to one
    let s: f64 = out.iter().sum();
    if s > 0.0 {
        for o in &mut out {
            *o /= s;
        }
    }
    out
}
