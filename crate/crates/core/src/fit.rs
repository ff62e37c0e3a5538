//! Least-squares helpers shared by the scaling and envelope experiments.

/// Ordinary least squares `y = slope * x + intercept`; returns (slope,
/// intercept, r2). `r2` is 1 when the total variance is zero.
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    assert_eq!(xs.len(), ys.len());
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    let mut syy = 0.0;
    for (&x, &y) in xs.iter().zip(ys) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
        syy += (y - my) * (y - my);
    }
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let intercept = my - slope * mx;
    let r2 = if syy > 0.0 {
        let ss_res: f64 = xs
            .iter()
            .zip(ys)
            .map(|(&x, &y)| {
                let e = y - (slope * x + intercept);
                e * e
            })
            .sum();
        1.0 - ss_res / syy
    } else {
        1.0
    };
    (slope, intercept, r2)
}

/// Relative spread `(max - min) / |mean|` of a nonempty slice.
pub fn relative_spread(vals: &[f64]) -> f64 {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    let mut sum = 0.0;
    for &v in vals {
        lo = lo.min(v);
        hi = hi.max(v);
        sum += v;
    }
    let mean = sum / vals.len() as f64;
    if mean == 0.0 {
        if hi == lo {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        (hi - lo) / mean.abs()
    }
}
