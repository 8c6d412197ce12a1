//! Estimators for the boundary point xi(w), the stationary measure, the
//! contraction and convergence curves, xi-visit fractions, the conditional
//! increment frequency proxy, and the interval contraction search.
//!
//! Every certificate-bearing quantity (contraction of an interval, arc
//! membership of a pullback) is computed in exact rational arithmetic; floats
//! appear only in fitted rates and confidence intervals.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::exact::{CirclePoint, Rational};
use crate::map::{CircleArc, PiecewiseAffineCircleMap, Support};
use crate::measure::StepDistribution;
use crate::stats::{self, LineFit};
use crate::walk::{derive_seed, Trajectory};

/// Knobs for the boundary-point estimator: grid size, required mass fraction
/// 1 - delta, and the concentration verdict radius.
#[derive(Clone, Debug)]
pub struct XiParams {
    pub grid: usize,
    pub delta: Rational,
    pub radius_bound: Rational,
}

impl Default for XiParams {
    fn default() -> Self {
        XiParams {
            grid: 64,
            delta: Rational::new(1, 10).expect("10 != 0"),
            radius_bound: Rational::new(1, 8).expect("8 != 0"),
        }
    }
}

/// Estimated boundary point: midpoint of the shortest arc catching at least
/// ceil((1-delta) m) of the pushed grid points.
#[derive(Clone, Debug)]
pub struct BoundaryEstimate {
    pub xi_hat: CirclePoint,
    pub concentration_radius: Rational,
    pub horizon: usize,
    pub grid: usize,
    /// Number of grid images the covering arc was required to contain.
    pub required_mass: usize,
    pub concentrated: bool,
}

/// Pushes the m-point uniform grid through w_N and returns the midpoint of
/// the shortest arc containing at least ceil((1-delta) m) of the images
/// (ties: leftmost arc by left endpoint).
pub fn estimate_xi(
    trajectory: &Trajectory,
    horizon: usize,
    params: &XiParams,
) -> Result<BoundaryEstimate> {
    if params.grid < 8 {
        return Err(Error::InvalidParameter("grid must be at least 8".into()));
    }
    if horizon > trajectory.horizon() {
        return Err(Error::InvalidParameter(format!(
            "horizon {} beyond trajectory horizon {}",
            horizon,
            trajectory.horizon()
        )));
    }
    let m = params.grid;
    let mut images: Vec<CirclePoint> = Vec::with_capacity(m);
    for i in 0..m {
        let p = CirclePoint::new(Rational::new(i as i64, m as i64)?);
        images.push(trajectory.evaluate_position(horizon, &p));
    }
    images.sort();

    let keep = Rational::one() - params.delta.clone();
    let needed_q = &keep * &Rational::integer(m as i64);
    // ceil
    let mut required = needed_q.floor();
    if !(&needed_q - &Rational::integer(required.clone())).is_zero() {
        required += 1;
    }
    let required: usize = usize::try_from(i64::try_from(required).unwrap_or(m as i64))
        .unwrap_or(m)
        .clamp(1, m);

    let mut best: Option<(Rational, CirclePoint)> = None;
    for start in 0..m {
        let end = (start + required - 1) % m;
        let len = images[end].offset_from(&images[start]);
        let better = match &best {
            None => true,
            Some((blen, bleft)) => len < *blen || (len == *blen && images[start] < *bleft),
        };
        if better {
            best = Some((len, images[start].clone()));
        }
    }
    let (len, left) = best.expect("grid is nonempty");
    let half = Rational::new(1, 2).expect("2 != 0");
    let radius = &len * &half;
    let xi_hat = CirclePoint::new(left.value() + &radius);
    Ok(BoundaryEstimate {
        concentrated: radius < params.radius_bound,
        xi_hat,
        concentration_radius: radius,
        horizon,
        grid: m,
        required_mass: required,
    })
}

/// Exact per-n mean distances with a fitted exponential decay rate.
#[derive(Clone, Debug)]
pub struct ContractionReport {
    /// (n, exact mean distance); means lie in [0, 1/2].
    pub means: Vec<(usize, Rational)>,
    /// Standard error of each mean over the trials (0 where degenerate),
    /// aligned with `means`.
    pub std_errors: Vec<f64>,
    /// -slope of the least-squares line on (n, log mean) over the fit window.
    pub lambda_hat: f64,
    pub r_squared: f64,
    /// 95% confidence interval for the raw slope.
    pub slope_ci: (f64, f64),
    pub fit_window: (usize, usize),
    /// Exact zero means excluded from the log fit.
    pub zero_mean_count: usize,
}

fn fit_decay(means: &[(usize, Rational)], window: (usize, usize)) -> (LineFit, usize) {
    let mut pts = Vec::new();
    let mut zeros = 0usize;
    for (n, mean) in means {
        if *n < window.0 || *n > window.1 {
            continue;
        }
        if mean.is_zero() {
            zeros += 1;
            continue;
        }
        pts.push((*n as f64, mean.to_f64().ln()));
    }
    (stats::fit_line(&pts), zeros)
}

fn report_from_means(
    means: Vec<(usize, Rational)>,
    std_errors: Vec<f64>,
    window: (usize, usize),
) -> ContractionReport {
    let (fit, zeros) = fit_decay(&means, window);
    let half_width = 1.96 * fit.slope_se;
    ContractionReport {
        means,
        std_errors,
        lambda_hat: -fit.slope,
        r_squared: fit.r_squared,
        slope_ci: (fit.slope - half_width, fit.slope + half_width),
        fit_window: window,
        zero_mean_count: zeros,
    }
}

fn per_n_std_errors(rows: &[Vec<f64>], n_max: usize) -> Vec<f64> {
    (0..n_max)
        .map(|i| {
            let col: Vec<f64> = rows.iter().map(|r| r[i]).collect();
            stats::std_error(&col)
        })
        .collect()
}

/// Monte Carlo mean of d(w_n^{-1}(x), w_n^{-1}(y)) for each n <= n_max, with
/// a log-linear fit over `fit_window`.
pub fn contraction_curve(
    mu: &StepDistribution,
    x: &CirclePoint,
    y: &CirclePoint,
    n_max: usize,
    trials: u64,
    seed: u64,
    fit_window: (usize, usize),
) -> Result<ContractionReport> {
    if x == y {
        return Err(Error::InvalidParameter(
            "contraction curve needs x != y".into(),
        ));
    }
    let per_trial: Vec<Vec<Rational>> = crate::walk::try_batch(mu, n_max, trials, seed, |_, t| {
        let mut xs = t.pullback_orbit(x);
        let mut ys = t.pullback_orbit(y);
        let mut out = Vec::with_capacity(n_max);
        for _ in 0..n_max {
            let px = xs.advance().expect("within horizon").clone();
            let py = ys.advance().expect("within horizon");
            out.push(px.dist(py));
        }
        Ok(out)
    })?;
    let mut means = Vec::with_capacity(n_max + 1);
    means.push((0usize, x.dist(y)));
    let denom = Rational::integer(trials.max(1) as i64);
    for n in 1..=n_max {
        let mut sum = Rational::zero();
        for row in &per_trial {
            sum += row[n - 1].clone();
        }
        means.push((n, sum.checked_div(&denom)?));
    }
    let float_rows: Vec<Vec<f64>> = per_trial
        .iter()
        .map(|row| row.iter().map(Rational::to_f64).collect())
        .collect();
    let mut std_errors = vec![0.0];
    std_errors.extend(per_n_std_errors(&float_rows, n_max));
    Ok(report_from_means(means, std_errors, fit_window))
}

/// Convergence of w_n(x) to the boundary point of the same trajectory,
/// estimated at `xi_horizon`. Non-concentrated trials are excluded from the
/// means and counted.
#[derive(Clone, Debug)]
pub struct BoundaryConvergence {
    pub report: ContractionReport,
    /// Per requested checkpoint, the per-trial distances (f64, trial order).
    pub checkpoint_values: Vec<(usize, Vec<f64>)>,
    pub non_concentrated: u64,
    pub used_trials: u64,
}

#[allow(clippy::too_many_arguments)]
pub fn boundary_convergence_curve(
    mu: &StepDistribution,
    x: &CirclePoint,
    checkpoints: &[usize],
    trials: u64,
    seed: u64,
    xi_horizon: usize,
    params: &XiParams,
    fit_window: (usize, usize),
) -> Result<BoundaryConvergence> {
    let n_max = checkpoints.iter().copied().max().unwrap_or(0);
    if n_max == 0 {
        return Err(Error::InvalidParameter("no checkpoints".into()));
    }
    if xi_horizon <= n_max {
        return Err(Error::InvalidParameter(
            "xi_horizon must exceed the largest checkpoint".into(),
        ));
    }
    struct TrialOut {
        dists: Option<Vec<Rational>>,
    }
    let rows: Vec<TrialOut> = crate::walk::try_batch(mu, xi_horizon, trials, seed, |_, t| {
        let xi = estimate_xi(t, xi_horizon, params)?;
        if !xi.concentrated {
            return Ok(TrialOut { dists: None });
        }
        let mut dists = Vec::with_capacity(n_max);
        for n in 1..=n_max {
            let wx = t.evaluate_position(n, x);
            dists.push(wx.dist(&xi.xi_hat));
        }
        Ok(TrialOut { dists: Some(dists) })
    })?;

    let mut non_concentrated = 0u64;
    let mut used = 0u64;
    let mut sums = vec![Rational::zero(); n_max];
    let mut checkpoint_values: Vec<(usize, Vec<f64>)> =
        checkpoints.iter().map(|&c| (c, Vec::new())).collect();
    for row in &rows {
        match &row.dists {
            None => non_concentrated += 1,
            Some(d) => {
                used += 1;
                for (i, v) in d.iter().enumerate() {
                    sums[i] += v.clone();
                }
                for (c, vals) in checkpoint_values.iter_mut() {
                    vals.push(d[*c - 1].to_f64());
                }
            }
        }
    }
    if used == 0 {
        return Err(Error::InvalidParameter(
            "every trial was non-concentrated; nothing to fit".into(),
        ));
    }
    let denom = Rational::integer(used as i64);
    let mut means = Vec::with_capacity(n_max);
    for (i, s) in sums.into_iter().enumerate() {
        means.push((i + 1, s.checked_div(&denom)?));
    }
    let float_rows: Vec<Vec<f64>> = rows
        .iter()
        .filter_map(|r| {
            r.dists
                .as_ref()
                .map(|d| d.iter().map(Rational::to_f64).collect())
        })
        .collect();
    let std_errors = per_n_std_errors(&float_rows, n_max);
    Ok(BoundaryConvergence {
        report: report_from_means(means, std_errors, fit_window),
        checkpoint_values,
        non_concentrated,
        used_trials: used,
    })
}

/// Histogram over equal arcs [i/m, (i+1)/m).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EmpiricalMeasure {
    pub bins: usize,
    pub counts: Vec<u64>,
    pub total: u64,
}

impl EmpiricalMeasure {
    pub fn new(bins: usize) -> Result<Self> {
        if bins < 2 {
            return Err(Error::InvalidParameter("need at least 2 bins".into()));
        }
        Ok(EmpiricalMeasure {
            bins,
            counts: vec![0; bins],
            total: 0,
        })
    }

    pub fn bin_of(&self, p: &CirclePoint) -> usize {
        let scaled = p.value() * &Rational::integer(self.bins as i64);
        let idx = scaled.floor();
        usize::try_from(i64::try_from(idx).unwrap_or(0)).unwrap_or(0) % self.bins
    }

    pub fn push(&mut self, p: &CirclePoint) {
        let b = self.bin_of(p);
        self.counts[b] += 1;
        self.total += 1;
    }

    pub fn from_points<'a>(
        bins: usize,
        points: impl IntoIterator<Item = &'a CirclePoint>,
    ) -> Result<Self> {
        let mut h = Self::new(bins)?;
        for p in points {
            h.push(p);
        }
        Ok(h)
    }

    pub fn fraction(&self, bin: usize) -> f64 {
        if self.total == 0 {
            0.0
        } else {
            self.counts[bin] as f64 / self.total as f64
        }
    }

    pub fn min_count(&self) -> u64 {
        self.counts.iter().copied().min().unwrap_or(0)
    }
}

/// Per-trial boundary estimates at `xi_horizon` (the raw samples behind the
/// stationary histogram).
pub fn stationary_samples(
    mu: &StepDistribution,
    xi_horizon: usize,
    trials: u64,
    seed: u64,
    params: &XiParams,
) -> Result<Vec<BoundaryEstimate>> {
    crate::walk::try_batch(mu, xi_horizon, trials, seed, |_, t| {
        estimate_xi(t, xi_horizon, params)
    })
}

/// Histogram of the estimated boundary point over independent trials.
pub fn stationary_histogram(
    mu: &StepDistribution,
    xi_horizon: usize,
    trials: u64,
    bins: usize,
    seed: u64,
    params: &XiParams,
) -> Result<EmpiricalMeasure> {
    let samples = stationary_samples(mu, xi_horizon, trials, seed, params)?;
    EmpiricalMeasure::from_points(bins, samples.iter().map(|s| &s.xi_hat))
}

/// Fraction of samples landing in a closed arc.
pub fn fraction_in_arc(samples: &[BoundaryEstimate], arc: &CircleArc) -> f64 {
    if samples.is_empty() {
        return 0.0;
    }
    let hits = samples.iter().filter(|s| arc.contains(&s.xi_hat)).count();
    hits as f64 / samples.len() as f64
}

#[derive(Clone, Debug)]
pub struct VisitFractionReport {
    /// Monte Carlo estimate of E[#{k <= n : xi in w_k(J)}] / n.
    pub fraction: f64,
    pub fraction_se: f64,
    /// Estimate of the reflected stationary mass of J.
    pub nu_bar: f64,
    pub nu_bar_se: f64,
    pub trials: u64,
    pub non_concentrated: u64,
}

/// Visit-fraction estimator: xi is estimated on the same trajectory at
/// `xi_horizon`, membership xi in w_k(J) is tested exactly as
/// w_k^{-1}(xi) in J, and nu_bar(J) comes from an independent reflected-walk
/// stationary run (sub-streamed off the same base seed).
pub fn xi_visit_fraction(
    mu: &StepDistribution,
    j: &CircleArc,
    n: usize,
    trials: u64,
    seed: u64,
    xi_horizon: usize,
    params: &XiParams,
) -> Result<VisitFractionReport> {
    if xi_horizon <= n {
        return Err(Error::InvalidParameter("xi_horizon must exceed n".into()));
    }
    struct Row {
        fraction: f64,
        concentrated: bool,
    }
    let rows: Vec<Row> = crate::walk::try_batch(mu, xi_horizon, trials, seed, |_, t| {
        let xi = estimate_xi(t, xi_horizon, params)?;
        let mut orbit = t.pullback_orbit(&xi.xi_hat);
        let mut hits = 0usize;
        for _k in 1..=n {
            let p = orbit.advance().expect("n < xi_horizon");
            if j.contains(p) {
                hits += 1;
            }
        }
        Ok(Row {
            fraction: hits as f64 / n as f64,
            concentrated: xi.concentrated,
        })
    })?;
    let fractions: Vec<f64> = rows.iter().map(|r| r.fraction).collect();
    let non_concentrated = rows.iter().filter(|r| !r.concentrated).count() as u64;

    let reflected = mu.reflect();
    let nu_samples = stationary_samples(
        &reflected,
        xi_horizon,
        trials,
        derive_seed(seed ^ 0x5EED_0001, 0),
        params,
    )?;
    let indicators: Vec<f64> = nu_samples
        .iter()
        .map(|s| if j.contains(&s.xi_hat) { 1.0 } else { 0.0 })
        .collect();

    Ok(VisitFractionReport {
        fraction: stats::mean(&fractions),
        fraction_se: stats::std_error(&fractions),
        nu_bar: stats::mean(&indicators),
        nu_bar_se: stats::std_error(&indicators),
        trials,
        non_concentrated,
    })
}

#[derive(Clone, Debug)]
pub struct RnProxyReport {
    /// Empirical frequency of the increment a among eligible steps.
    pub frequency: f64,
    /// Exact weight mu(a) the frequency is compared against.
    pub mu_a: f64,
    /// Binomial standard error at p = mu(a) over the eligible steps.
    pub sigma: f64,
    pub eligible_steps: u64,
    pub hits: u64,
    pub trials: u64,
}

/// Conditional-increment frequency proxy: among steps k < n whose pulled-back
/// boundary estimate w_k^{-1}(xi) avoids J, the next increment should be a
/// with probability exactly mu(a).
#[allow(clippy::too_many_arguments)]
pub fn conditional_increment_frequency(
    mu: &StepDistribution,
    a: &PiecewiseAffineCircleMap,
    j: &CircleArc,
    n: usize,
    trials: u64,
    seed: u64,
    xi_horizon: usize,
    params: &XiParams,
) -> Result<RnProxyReport> {
    if !mu.contains(a) {
        return Err(Error::InvalidParameter(
            "a is not in the support of mu".into(),
        ));
    }
    match a.support() {
        Support::Empty => {}
        Support::Full => {
            return Err(Error::InvalidParameter(
                "a must fix the complement of J; its support is the full circle".into(),
            ))
        }
        Support::Arcs(arcs) => {
            for arc in &arcs {
                if !j.contains_arc(arc) {
                    return Err(Error::InvalidParameter(format!(
                        "support arc {arc} of a is not inside J = {j}"
                    )));
                }
            }
        }
    }
    if xi_horizon <= n {
        return Err(Error::InvalidParameter("xi_horizon must exceed n".into()));
    }
    let per_trial: Vec<(u64, u64)> =
        crate::walk::try_batch(mu, xi_horizon, trials, seed, |_, t| {
            let xi = estimate_xi(t, xi_horizon, params)?;
            let mut orbit = t.pullback_orbit(&xi.xi_hat);
            let mut eligible = 0u64;
            let mut hits = 0u64;
            // step k: pullback after k steps; increment g_{k+1}
            for k in 0..n {
                let p = orbit.current().clone();
                if !j.contains(&p) {
                    eligible += 1;
                    if t.increment(k + 1) == a {
                        hits += 1;
                    }
                }
                orbit.advance();
            }
            Ok((eligible, hits))
        })?;
    let eligible: u64 = per_trial.iter().map(|r| r.0).sum();
    let hits: u64 = per_trial.iter().map(|r| r.1).sum();
    let p = mu.weight_of(a).to_f64();
    let sigma = if eligible > 0 {
        (p * (1.0 - p) / eligible as f64).sqrt()
    } else {
        f64::INFINITY
    };
    Ok(RnProxyReport {
        frequency: if eligible > 0 {
            hits as f64 / eligible as f64
        } else {
            f64::NAN
        },
        mu_a: p,
        sigma,
        eligible_steps: eligible,
        hits,
        trials,
    })
}

/// A found contraction g with g(I) inside J, certified by exact endpoint
/// evaluation.
#[derive(Clone, Debug)]
pub struct ContractionCertificate {
    pub map: PiecewiseAffineCircleMap,
    pub steps_used: usize,
    pub trial: u64,
}

/// Searches sampled walks for some w_n^{-1} carrying I into J. `max_steps`
/// is the total step budget across all trials; not-found is a value, not an
/// error. Every certificate is re-verified by exact evaluation of both
/// endpoints before it is returned.
pub fn contract_interval_into(
    mu: &StepDistribution,
    i: &CircleArc,
    j: &CircleArc,
    max_steps: usize,
    trials: u64,
    seed: u64,
) -> Result<Option<ContractionCertificate>> {
    if i.is_degenerate() || j.is_degenerate() {
        return Err(Error::InvalidParameter(
            "contraction search needs arcs with nonempty interior".into(),
        ));
    }
    if j.contains_arc(i) {
        return Ok(Some(ContractionCertificate {
            map: PiecewiseAffineCircleMap::identity(),
            steps_used: 0,
            trial: 0,
        }));
    }
    let per_trial_budget = (max_steps / trials.max(1) as usize).max(1);
    for trial in 0..trials.max(1) {
        let t = Trajectory::sample(mu, per_trial_budget, derive_seed(seed, trial));
        let mut left_orbit = t.pullback_orbit(i.left());
        let mut right_orbit = t.pullback_orbit(i.right());
        for k in 1..=per_trial_budget {
            let l = left_orbit.advance().expect("within budget").clone();
            let r = right_orbit.advance().expect("within budget");
            let image = CircleArc::new(l, r.clone());
            if j.contains_arc(&image) {
                let candidate = t.position(k).invert();
                // exact certificate check, independent of the orbit tracking
                let cl = candidate.evaluate(i.left());
                let cr = candidate.evaluate(i.right());
                if j.contains_arc(&CircleArc::new(cl, cr)) {
                    return Ok(Some(ContractionCertificate {
                        map: candidate,
                        steps_used: k,
                        trial,
                    }));
                }
            }
        }
    }
    Ok(None)
}

/// Pushes the full grid through w_N for every trial and histograms all the
/// images (used by the pushforward-consistency diagnostics).
pub fn pushforward_histogram(
    mu: &StepDistribution,
    horizon: usize,
    trials: u64,
    grid: usize,
    bins: usize,
    seed: u64,
) -> Result<EmpiricalMeasure> {
    let per_trial: Vec<Vec<CirclePoint>> =
        crate::walk::try_batch(mu, horizon, trials, seed, |_, t| {
            let mut out = Vec::with_capacity(grid);
            for gi in 0..grid {
                let p = CirclePoint::new(Rational::new(gi as i64, grid as i64)?);
                out.push(t.evaluate_position(horizon, &p));
            }
            Ok(out)
        })?;
    EmpiricalMeasure::from_points(bins, per_trial.iter().flatten())
}

/// Convenience parallel map preserving input order (used by callers that
/// post-process per-trial outputs).
pub fn parallel_map_trials<T: Send, F: Fn(u64) -> T + Sync + Send>(trials: u64, f: F) -> Vec<T> {
    (0..trials).into_par_iter().map(f).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::thompson::GeneratorSet;
    use crate::walk::try_batch;

    fn gens() -> GeneratorSet {
        GeneratorSet::bundled().unwrap()
    }

    fn lazy_mu() -> StepDistribution {
        StepDistribution::uniform_on(&gens()).unwrap().lazify()
    }

    fn pt(n: i64, d: i64) -> CirclePoint {
        CirclePoint::from_ratio(n, d).unwrap()
    }

    #[test]
    fn xi_identity_walk_is_degenerate() {
        let mu = StepDistribution::dirac(PiecewiseAffineCircleMap::identity());
        let t = Trajectory::sample(&mu, 20, 4);
        let est = estimate_xi(&t, 20, &XiParams::default()).unwrap();
        assert!(!est.concentrated);
        // covering 58 of 64 uniform points: radius 57/128, near 1/2
        assert_eq!(est.concentration_radius, Rational::new(57, 128).unwrap());
    }

    #[test]
    fn xi_of_contracting_map_finds_fixed_point() {
        // A moves every point toward 0; (A^n)_* Leb concentrates at 0.
        let a = gens().get("A").unwrap().clone();
        let mu = StepDistribution::dirac(a);
        let t = Trajectory::sample(&mu, 200, 1);
        let est = estimate_xi(&t, 200, &XiParams::default()).unwrap();
        assert!(est.concentrated);
        assert!(est.concentration_radius < Rational::pow2(-40));
        assert!(est.xi_hat.dist(&CirclePoint::zero()) < Rational::pow2(-40));
    }

    #[test]
    fn xi_radius_shrinks_with_horizon() {
        let mu = lazy_mu();
        let params = XiParams::default();
        let outs: Vec<(Rational, Rational)> = try_batch(&mu, 120, 30, 42, |_, t| {
            let early = estimate_xi(t, 40, &params)?;
            let late = estimate_xi(t, 120, &params)?;
            Ok((early.concentration_radius, late.concentration_radius))
        })
        .unwrap();
        let worse = outs.iter().filter(|(e, l)| l > e).count();
        assert!(
            worse * 5 <= outs.len(),
            "radius grew with horizon in {worse}/{} trials",
            outs.len()
        );
    }

    #[test]
    fn contraction_curve_identity_measure_is_flat() {
        let mu = StepDistribution::dirac(PiecewiseAffineCircleMap::identity());
        let rep = contraction_curve(&mu, &pt(0, 1), &pt(1, 2), 12, 4, 3, (2, 12)).unwrap();
        for (_, m) in &rep.means {
            assert_eq!(*m, Rational::new(1, 2).unwrap());
        }
        assert_eq!(rep.lambda_hat, 0.0);
        assert_eq!(rep.r_squared, 1.0);
    }

    #[test]
    fn contraction_rate_of_single_map_matches_slope() {
        // mu = delta_A: w_n^{-1} = A^{-n} drives every pullback toward 1^-;
        // near 1 the inverse has slope 1/2, so distances halve per step and
        // the fitted rate is ln 2.
        let a = gens().get("A").unwrap().clone();
        let mu = StepDistribution::dirac(a);
        let rep = contraction_curve(&mu, &pt(0, 1), &pt(1, 2), 40, 1, 5, (20, 40)).unwrap();
        assert!(
            (rep.lambda_hat - std::f64::consts::LN_2).abs() < 1e-6,
            "lambda {} vs ln2",
            rep.lambda_hat
        );
        assert!(rep.r_squared > 0.999999);
    }

    #[test]
    fn contraction_curve_rejects_equal_points() {
        let mu = lazy_mu();
        assert!(contraction_curve(&mu, &pt(1, 3), &pt(1, 3), 5, 2, 1, (1, 5)).is_err());
    }

    #[test]
    fn lazy_t_walk_contracts() {
        let rep =
            contraction_curve(&lazy_mu(), &pt(0, 1), &pt(1, 2), 30, 120, 11, (5, 30)).unwrap();
        assert!(rep.lambda_hat > 0.0, "lambda {}", rep.lambda_hat);
        assert!(rep.slope_ci.1 < 0.0, "slope CI {:?}", rep.slope_ci);
    }

    #[test]
    fn boundary_convergence_identity_errors() {
        let mu = StepDistribution::dirac(PiecewiseAffineCircleMap::identity());
        let err = boundary_convergence_curve(
            &mu,
            &pt(0, 1),
            &[4, 8],
            6,
            2,
            40,
            &XiParams::default(),
            (1, 8),
        );
        assert!(err.is_err());
    }

    #[test]
    fn boundary_convergence_single_contracting_map() {
        let a = gens().get("A").unwrap().clone();
        let mu = StepDistribution::dirac(a);
        let out = boundary_convergence_curve(
            &mu,
            &pt(1, 3),
            &[5, 10, 20],
            2,
            7,
            120,
            &XiParams::default(),
            (5, 20),
        )
        .unwrap();
        assert_eq!(out.non_concentrated, 0);
        // distances to the attracting fixed point shrink
        let m5 = &out.report.means[4].1;
        let m20 = &out.report.means[19].1;
        assert!(m20 < m5);
        assert!(out.report.lambda_hat > 0.0);
    }

    #[test]
    fn stationary_histogram_of_contraction_is_a_point_mass() {
        let a = gens().get("A").unwrap().clone();
        let mu = StepDistribution::dirac(a);
        let h = stationary_histogram(&mu, 150, 10, 16, 3, &XiParams::default()).unwrap();
        assert_eq!(h.total, 10);
        // everything lands in the bin of the attractor 0
        assert_eq!(h.counts[0], 10);
    }

    #[test]
    fn empirical_measure_counts_sum() {
        let pts = [pt(1, 8), pt(3, 8), pt(3, 8), pt(7, 8)];
        let h = EmpiricalMeasure::from_points(4, pts.iter()).unwrap();
        assert_eq!(h.total, 4);
        assert_eq!(h.counts.iter().sum::<u64>(), 4);
        assert_eq!(h.counts, vec![1, 2, 0, 1]);
        assert!(EmpiricalMeasure::new(1).is_err());
    }

    #[test]
    fn visit_fraction_point_arc_is_zero() {
        let j = CircleArc::point(pt(1, 3));
        let rep = xi_visit_fraction(&lazy_mu(), &j, 10, 20, 9, 60, &XiParams::default()).unwrap();
        assert_eq!(rep.fraction, 0.0);
    }

    #[test]
    fn visit_fraction_identity_measure_is_indicator() {
        // w_k(J) = J for every k, so the per-trial fraction is the indicator
        // of xi_hat in J, and every trial is flagged non-concentrated.
        let mu = StepDistribution::dirac(PiecewiseAffineCircleMap::identity());
        let params = XiParams::default();
        let trials = 6u64;
        let j = CircleArc::new(pt(1, 4), pt(3, 4));
        let rep = xi_visit_fraction(&mu, &j, 8, trials, 2, 40, &params).unwrap();
        assert_eq!(rep.non_concentrated, trials);
        // identity walk: xi_hat is the same deterministic degenerate estimate
        // every trial; the fraction is 0 or 1 accordingly
        let t = Trajectory::sample(&mu, 40, crate::walk::derive_seed(2, 0));
        let xi = estimate_xi(&t, 40, &params).unwrap();
        let expect = if j.contains(&xi.xi_hat) { 1.0 } else { 0.0 };
        assert_eq!(rep.fraction, expect);
    }

    #[test]
    fn contract_interval_search_succeeds_reliably() {
        // random small arcs: the search finds a contraction within the
        // 10^4-step budget in at least 95 of 100 attempts
        let mu = lazy_mu();
        let mut rng = crate::walk::rng_for(31);
        let mut found = 0;
        for attempt in 0..100u64 {
            use rand::Rng;
            let li = rng.gen_range(0..64u32);
            let lj = rng.gen_range(0..64u32);
            let i = CircleArc::new(pt(li as i64, 64), pt((li as i64 + 3) % 64, 64));
            let j = CircleArc::new(pt(lj as i64, 64), pt((lj as i64 + 5) % 64, 64));
            if contract_interval_into(&mu, &i, &j, 10_000, 8, 1000 + attempt)
                .unwrap()
                .is_some()
            {
                found += 1;
            }
        }
        assert!(found >= 95, "found only {found}/100 contractions");
    }

    #[test]
    fn rn_proxy_dirac_is_exact() {
        // mu = delta_a with small support: every step is an a-step and the
        // pullback of xi never enters J... unless xi lands in J; either way
        // the frequency over eligible steps is exactly 1 = mu(a).
        let a = crate::thompson::remark_element(&pt(1, 2), 2).unwrap();
        let j = a.smallest_interval_containing_support().unwrap();
        let mu = StepDistribution::dirac(a.clone());
        let rep = conditional_increment_frequency(&mu, &a, &j, 10, 5, 13, 50, &XiParams::default())
            .unwrap();
        assert!(rep.eligible_steps > 0);
        assert_eq!(rep.frequency, 1.0);
        assert_eq!(rep.mu_a, 1.0);
    }

    #[test]
    fn rn_proxy_rejects_missing_atom() {
        let a = crate::thompson::remark_element(&pt(1, 2), 2).unwrap();
        let j = a.smallest_interval_containing_support().unwrap();
        let err = conditional_increment_frequency(
            &lazy_mu(),
            &a,
            &j,
            10,
            5,
            13,
            50,
            &XiParams::default(),
        );
        assert!(err.is_err());
    }

    #[test]
    fn contract_interval_trivial_and_search() {
        let mu = lazy_mu();
        // I already inside J: identity immediately
        let i = CircleArc::new(pt(1, 16), pt(1, 8));
        let j = CircleArc::new(pt(0, 1), pt(1, 4));
        let cert = contract_interval_into(&mu, &i, &j, 100, 2, 1)
            .unwrap()
            .unwrap();
        assert!(cert.map.is_identity());

        // deterministic single-map search: A^{-n}(I) accumulates at 1^- in J
        let a = gens().get("A").unwrap().clone();
        let da = StepDistribution::dirac(a);
        let i2 = CircleArc::new(pt(1, 4), pt(1, 2));
        let j2 = CircleArc::new(pt(7, 8), pt(1, 8));
        let cert2 = contract_interval_into(&da, &i2, &j2, 500, 1, 2)
            .unwrap()
            .unwrap();
        // exact certificate
        let l = cert2.map.evaluate(i2.left());
        let r = cert2.map.evaluate(i2.right());
        assert!(j2.contains_arc(&CircleArc::new(l, r)));

        // fails inside budget when the budget is absurdly small
        let none = contract_interval_into(&da, &i2, &j2, 1, 1, 2).unwrap();
        assert!(none.is_none());
    }

    #[test]
    fn degenerate_contraction_input_rejected() {
        let mu = lazy_mu();
        let p0 = CircleArc::point(pt(0, 1));
        let j = CircleArc::new(pt(0, 1), pt(1, 4));
        assert!(contract_interval_into(&mu, &p0, &j, 10, 1, 1).is_err());
    }
}
