//! Least-squares line fits used for log-log slopes.

/// Ordinary least-squares slope and intercept of `ys` against `xs`.
///
/// Returns `None` when fewer than two points are given or all `xs` coincide.
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> Option<(f64, f64)> {
    let n = xs.len().min(ys.len());
    if n < 2 {
        return None;
    }
    let nf = n as f64;
    let mx = xs[..n].iter().sum::<f64>() / nf;
    let my = ys[..n].iter().sum::<f64>() / nf;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for (x, y) in xs[..n].iter().zip(&ys[..n]) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
    }
    if sxx <= 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    Some((slope, my - slope * mx))
}

/// Slope of `log|y|` against `log x`. Non-positive abscissae and zero ordinates are skipped.
pub fn loglog_slope(xs: &[f64], ys: &[f64]) -> Option<f64> {
    let (lx, ly): (Vec<f64>, Vec<f64>) = xs
        .iter()
        .zip(ys)
        .filter(|(x, y)| **x > 0.0 && y.abs() > 0.0 && y.is_finite())
        .map(|(x, y)| (x.ln(), y.abs().ln()))
        .unzip();
    linear_fit(&lx, &ly).map(|(slope, _)| slope)
}
