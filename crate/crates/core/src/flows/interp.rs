//! Local Lagrange interpolation in time on (possibly nonuniform) samples.

/// Start index, value weights and derivative weights of the (up to) four
/// samples nearest `t`. `times` must be strictly increasing.
pub(crate) fn stencil(times: &[f64], t: f64) -> (usize, Vec<f64>, Vec<f64>) {
    let len = times.len();
    let width = len.min(4);
    // interval containing t
    let i = match times.partition_point(|&s| s <= t) {
        0 => 0,
        p => (p - 1).min(len.saturating_sub(2)),
    };
    let start = i.saturating_sub((width - 1) / 2).min(len - width);
    let nodes = &times[start..start + width];
    let mut w = vec![0.0; width];
    let mut dw = vec![0.0; width];
    for j in 0..width {
        let mut denom = 1.0;
        for (k, &xk) in nodes.iter().enumerate() {
            if k != j {
                denom *= nodes[j] - xk;
            }
        }
        let mut prod = 1.0;
        for (k, &xk) in nodes.iter().enumerate() {
            if k != j {
                prod *= t - xk;
            }
        }
        w[j] = prod / denom;
        let mut d = 0.0;
        for l in 0..width {
            if l == j {
                continue;
            }
            let mut p = 1.0;
            for (k, &xk) in nodes.iter().enumerate() {
                if k != j && k != l {
                    p *= t - xk;
                }
            }
            d += p;
        }
        dw[j] = d / denom;
    }
    (start, w, dw)
}

/// Weighted sum of equally long value arrays.
pub(crate) fn combine(arrays: &[&[f64]], weights: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; arrays[0].len()];
    for (a, &w) in arrays.iter().zip(weights) {
        for (o, v) in out.iter_mut().zip(a.iter()) {
            *o += w * v;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cubic_reproduced_exactly_on_nonuniform_nodes() {
        let times = [0.0, 0.1, 0.25, 0.3, 0.5, 0.55, 0.9];
        let p = |t: f64| 1.0 - 2.0 * t + 0.5 * t * t - 3.0 * t * t * t;
        let dp = |t: f64| -2.0 + t - 9.0 * t * t;
        let vals: Vec<f64> = times.iter().map(|&t| p(t)).collect();
        for &t in &[0.0, 0.05, 0.27, 0.42, 0.9, 0.7] {
            let (s, w, dw) = stencil(&times, t);
            let v: f64 = w.iter().enumerate().map(|(j, w)| w * vals[s + j]).sum();
            let d: f64 = dw.iter().enumerate().map(|(j, w)| w * vals[s + j]).sum();
            assert!((v - p(t)).abs() < 1e-13);
            assert!((d - dp(t)).abs() < 1e-11);
        }
    }

    #[test]
    fn short_tables_fall_back_to_lower_order() {
        let (s, w, dw) = stencil(&[0.0, 1.0], 0.25);
        assert_eq!(s, 0);
        assert!((w[0] - 0.75).abs() < 1e-15 && (w[1] - 0.25).abs() < 1e-15);
        assert!((dw[0] + 1.0).abs() < 1e-15 && (dw[1] - 1.0).abs() < 1e-15);
    }
}
