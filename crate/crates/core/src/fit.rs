//! Least-squares line fits.

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    pub points: usize,
}

/// Ordinary least squares `y = slope * x + intercept`; `None` with fewer
/// than two distinct abscissae.
pub fn fit_line<I: IntoIterator<Item = (f64, f64)>>(points: I) -> Option<LineFit> {
    let (mut n, mut sx, mut sy, mut sxx, mut sxy) = (0usize, 0.0, 0.0, 0.0, 0.0);
    for (x, y) in points {
        if !(x.is_finite() && y.is_finite()) {
            continue;
        }
        n += 1;
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    let nf = n as f64;
    let denom = nf * sxx - sx * sx;
    if n < 2 || denom.abs() <= 1e-12 * (nf * sxx).abs() {
        return None;
    }
    let slope = (nf * sxy - sx * sy) / denom;
    Some(LineFit {
        slope,
        intercept: (sy - slope * sx) / nf,
        points: n,
    })
}

/// Fit of `ln y` against `ln x`, skipping non-positive values.
pub fn fit_log_log<I: IntoIterator<Item = (f64, f64)>>(points: I) -> Option<LineFit> {
    fit_line(
        points
            .into_iter()
            .filter(|&(x, y)| x > 0.0 && y > 0.0)
            .map(|(x, y)| (libm::log(x), libm::log(y))),
    )
}

/// Median of a non-empty slice (mean of the middle pair for even length).
pub fn median(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    Some(if v.len() % 2 == 1 {
        v[m]
    } else {
        0.5 * (v[m - 1] + v[m])
    })
}
