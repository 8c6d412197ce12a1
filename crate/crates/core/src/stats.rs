//! Small shared statistics helpers: sample moments, ordinary least squares,
//! normal-approximation intervals. Reporting conventions only; nothing here
//! touches the exact algebra.

/// Sample mean.
pub fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Unbiased sample variance.
pub fn variance(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let m = mean(xs);
    xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (xs.len() as f64 - 1.0)
}

/// Standard error of the sample mean.
pub fn std_error(xs: &[f64]) -> f64 {
    (variance(xs) / xs.len() as f64).sqrt()
}

#[derive(Clone, Copy, Debug, Default)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    /// Standard error of the slope from the residuals.
    pub slope_se: f64,
    pub points: usize,
}

/// Ordinary least squares y = a + b x. A flat series (zero total variance)
/// fits perfectly: slope 0, r^2 = 1.
pub fn fit_line(points: &[(f64, f64)]) -> LineFit {
    let n = points.len();
    if n < 2 {
        return LineFit {
            slope: 0.0,
            intercept: points.first().map(|p| p.1).unwrap_or(f64::NAN),
            r_squared: 1.0,
            slope_se: 0.0,
            points: n,
        };
    }
    let nf = n as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / nf;
    let my = points.iter().map(|p| p.1).sum::<f64>() / nf;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = points.iter().map(|p| (p.1 - my) * (p.1 - my)).sum();
    if sxx == 0.0 {
        return LineFit {
            slope: 0.0,
            intercept: my,
            r_squared: 1.0,
            slope_se: 0.0,
            points: n,
        };
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = points
        .iter()
        .map(|p| {
            let r = p.1 - (intercept + slope * p.0);
            r * r
        })
        .sum();
    let r_squared = if syy == 0.0 { 1.0 } else { 1.0 - ss_res / syy };
    let slope_se = if n > 2 {
        (ss_res / (nf - 2.0) / sxx).sqrt()
    } else {
        0.0
    };
    LineFit {
        slope,
        intercept,
        r_squared,
        slope_se,
        points: n,
    }
}

/// Two-sample z statistic for one histogram bin under equal-proportion null.
pub fn two_proportion_z(count1: u64, total1: u64, count2: u64, total2: u64) -> f64 {
    if total1 == 0 || total2 == 0 {
        return 0.0;
    }
    let p1 = count1 as f64 / total1 as f64;
    let p2 = count2 as f64 / total2 as f64;
    let pooled = (count1 + count2) as f64 / (total1 + total2) as f64;
    let se = (pooled * (1.0 - pooled) * (1.0 / total1 as f64 + 1.0 / total2 as f64)).sqrt();
    if se == 0.0 {
        0.0
    } else {
        (p1 - p2) / se
    }
}
