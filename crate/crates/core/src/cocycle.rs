//! Breakpoint-cocycle pipeline: the derivative-jump configuration C_g, the
//! two actions on configurations, pointwise stabilization along walks, orbit
//! transience diagnostics, Monte Carlo harmonic functions and the witness
//! report comparing them against the circle's stationary mass.
//!
//! Configurations store base-2 logarithms of derivative jumps. For dyadic
//! slope groups every entry is an exact integer-valued rational; other
//! piecewise-affine groups fall back to floating base-2 logs and the
//! configuration is flagged as not exact.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::ops::Add;

use crate::boundary::{fraction_in_arc, stationary_samples, XiParams};
use crate::error::{Error, Result};
use crate::exact::{CirclePoint, Rational};
use crate::map::PiecewiseAffineCircleMap;
use crate::measure::StepDistribution;
use crate::stats;
use crate::thompson::remark_element;
use crate::walk::{derive_seed, try_batch, Trajectory};

/// A base-2 logarithm of a derivative jump: exact when the jump is a power
/// of two, floating otherwise.
#[derive(Clone, Debug, PartialEq)]
pub enum JumpLog {
    Exact(Rational),
    Approx(f64),
}

impl JumpLog {
    pub fn exact_integer(k: i64) -> Self {
        JumpLog::Exact(Rational::integer(k))
    }

    pub fn from_ratio(ratio: &Rational) -> Self {
        match ratio.log2_exact() {
            Some(k) => JumpLog::Exact(Rational::integer(k)),
            None => JumpLog::Approx(ratio.to_f64().log2()),
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            JumpLog::Exact(r) => r.is_zero(),
            JumpLog::Approx(x) => *x == 0.0,
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, JumpLog::Exact(_))
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            JumpLog::Exact(r) => r.to_f64(),
            JumpLog::Approx(x) => *x,
        }
    }
}

impl Add for JumpLog {
    type Output = JumpLog;
    fn add(self, rhs: JumpLog) -> JumpLog {
        match (self, rhs) {
            (JumpLog::Exact(a), JumpLog::Exact(b)) => JumpLog::Exact(a + b),
            (a, b) => JumpLog::Approx(a.to_f64() + b.to_f64()),
        }
    }
}

impl fmt::Display for JumpLog {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            JumpLog::Exact(r) => write!(f, "{r}"),
            JumpLog::Approx(x) => write!(f, "~{x}"),
        }
    }
}

/// Sparse configuration Br -> R: finitely many nonzero entries, zeros never
/// stored.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct BreakpointConfiguration {
    entries: BTreeMap<CirclePoint, JumpLog>,
}

impl BreakpointConfiguration {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn from_entries(entries: impl IntoIterator<Item = (CirclePoint, JumpLog)>) -> Self {
        let mut cfg = Self::empty();
        for (x, v) in entries {
            cfg.add_at(x, v);
        }
        cfg
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn get(&self, x: &CirclePoint) -> JumpLog {
        self.entries
            .get(x)
            .cloned()
            .unwrap_or(JumpLog::Exact(Rational::zero()))
    }

    pub fn support(&self) -> impl Iterator<Item = &CirclePoint> {
        self.entries.keys()
    }

    pub fn entries(&self) -> impl Iterator<Item = (&CirclePoint, &JumpLog)> {
        self.entries.iter()
    }

    pub fn is_exact(&self) -> bool {
        self.entries.values().all(JumpLog::is_exact)
    }

    pub fn add_at(&mut self, x: CirclePoint, v: JumpLog) {
        if v.is_zero() {
            return;
        }
        let merged = match self.entries.remove(&x) {
            Some(old) => old + v,
            None => v,
        };
        if !merged.is_zero() {
            self.entries.insert(x, merged);
        }
    }

    /// Pointwise sum, dropping cancelled entries.
    pub fn add(&self, other: &BreakpointConfiguration) -> BreakpointConfiguration {
        let mut out = self.clone();
        for (x, v) in &other.entries {
            out.add_at(x.clone(), v.clone());
        }
        out
    }
}

/// C_g: the configuration of base-2 derivative jumps of g^{-1}, supported on
/// the breakpoints of g^{-1}.
pub fn cocycle(g: &PiecewiseAffineCircleMap) -> BreakpointConfiguration {
    let ginv = g.invert();
    let mut cfg = BreakpointConfiguration::empty();
    for x in ginv.breakpoints() {
        let ratio = ginv.derivative_jump_ratio(x);
        cfg.add_at(x.clone(), JumpLog::from_ratio(&ratio));
    }
    cfg
}

/// The shift action (S_g C)(x) = C(g^{-1}(x)): entries move to their images.
pub fn shift_config(
    g: &PiecewiseAffineCircleMap,
    c: &BreakpointConfiguration,
) -> BreakpointConfiguration {
    BreakpointConfiguration::from_entries(c.entries.iter().map(|(x, v)| (g.evaluate(x), v.clone())))
}

/// The affine action g . C = C_g + S_g C; satisfies (gh) . C = g . (h . C)
/// and C_{gh} = g . C_h.
pub fn act(g: &PiecewiseAffineCircleMap, c: &BreakpointConfiguration) -> BreakpointConfiguration {
    cocycle(g).add(&shift_config(g, c))
}

/// Exact check of the cocycle identity C_{gh} = C_g + S_g C_h.
pub fn verify_chain_rule(g: &PiecewiseAffineCircleMap, h: &PiecewiseAffineCircleMap) -> bool {
    let lhs = cocycle(&g.compose(h));
    let rhs = cocycle(g).add(&shift_config(g, &cocycle(h)));
    lhs == rhs
}

/// Stabilization record for one watched point.
#[derive(Clone, Debug)]
pub struct PointTrack {
    pub point: CirclePoint,
    pub final_value: JumpLog,
    /// Last step at which the value changed (0 when it never moved).
    pub last_change: usize,
    pub changes: usize,
}

/// Cocycle values of each distinct increment, computed once.
fn increment_cocycles(
    t: &Trajectory,
) -> HashMap<PiecewiseAffineCircleMap, BreakpointConfiguration> {
    let mut out = HashMap::new();
    for g in t.increments() {
        out.entry(g.as_ref().clone()).or_insert_with(|| cocycle(g));
    }
    out
}

/// Tracks C_{w_n}(x) for each watched x along one trajectory via the
/// incremental update C_{w_{n+1}} = C_{w_n} + S_{w_n} C_{g_{n+1}}, which
/// changes the value at x exactly when w_n^{-1}(x) is a breakpoint of the
/// next increment's cocycle.
pub fn track_configuration(
    trajectory: &Trajectory,
    watched: &[CirclePoint],
    horizon: usize,
) -> Result<Vec<PointTrack>> {
    if horizon > trajectory.horizon() {
        return Err(Error::InvalidParameter(format!(
            "horizon {horizon} beyond trajectory horizon {}",
            trajectory.horizon()
        )));
    }
    let cocycles = increment_cocycles(trajectory);
    let mut tracks = Vec::with_capacity(watched.len());
    for x in watched {
        let mut value = JumpLog::Exact(Rational::zero());
        let mut last_change = 0usize;
        let mut changes = 0usize;
        let mut orbit = trajectory.pullback_orbit(x);
        for step in 0..horizon {
            let pre = orbit.current().clone();
            let g_next = trajectory.increment(step + 1);
            let delta = cocycles
                .get(g_next)
                .expect("all increments precomputed")
                .get(&pre);
            if !delta.is_zero() {
                value = value + delta;
                last_change = step + 1;
                changes += 1;
            }
            orbit.advance();
        }
        tracks.push(PointTrack {
            point: x.clone(),
            final_value: value,
            last_change,
            changes,
        });
    }
    Ok(tracks)
}

/// Per-trial return statistics of the pullback chain x_n = w_n^{-1}(x).
#[derive(Clone, Debug)]
pub struct ReturnStats {
    /// (number of returns, last return time) per trial.
    pub rows: Vec<(u64, usize)>,
    pub horizon: usize,
    pub mean_returns: f64,
    /// Trials returning at every single step (degenerate recurrent walks).
    pub always_returning: u64,
}

pub fn orbit_return_stats(
    mu: &StepDistribution,
    x: &CirclePoint,
    horizon: usize,
    trials: u64,
    seed: u64,
) -> Result<ReturnStats> {
    let rows: Vec<(u64, usize)> = try_batch(mu, horizon, trials, seed, |_, t| {
        let mut returns = 0u64;
        let mut last = 0usize;
        let mut orbit = t.pullback_orbit(x);
        for step in 1..=horizon {
            let p = orbit.advance().expect("within horizon");
            if p == x {
                returns += 1;
                last = step;
            }
        }
        Ok((returns, last))
    })?;
    let means: Vec<f64> = rows.iter().map(|r| r.0 as f64).collect();
    let always = rows.iter().filter(|r| r.0 as usize == horizon).count() as u64;
    Ok(ReturnStats {
        mean_returns: stats::mean(&means),
        always_returning: always,
        rows,
        horizon,
    })
}

/// One harmonic-function evaluation f(g) = P_g[C_inf(y) = k].
#[derive(Clone, Debug)]
pub struct HarmonicEstimate {
    pub probability: f64,
    pub std_error: f64,
    pub trials: u64,
    /// Trials whose tracked value changed after the stability cutoff; they
    /// bound the estimator bias and are never dropped from the estimate.
    pub unstabilized: u64,
    pub stability_cutoff: usize,
}

/// Raw per-trial outcome behind a harmonic estimate.
#[derive(Clone, Debug)]
pub struct HarmonicTrialValue {
    pub value: JumpLog,
    pub last_change: usize,
}

/// Per-atom inverses and cocycles of a step distribution, computed once and
/// shared across trials.
pub struct HarmonicContext {
    atom_inverses: Vec<PiecewiseAffineCircleMap>,
    atom_cocycles: Vec<BreakpointConfiguration>,
}

impl HarmonicContext {
    pub fn new(mu: &StepDistribution) -> Self {
        HarmonicContext {
            atom_inverses: mu.atoms().iter().map(|a| a.map.invert()).collect(),
            atom_cocycles: mu.atoms().iter().map(|a| cocycle(&a.map)).collect(),
        }
    }

    /// Value of C_{g w} at y after consuming the increments of `t` with
    /// indices in (skip_first, horizon], starting the action from C_g. The
    /// value of C_{g w_n} at y is C_g(y) + C_{w_n}(g^{-1}(y)), so only the
    /// pullback orbit of g^{-1}(y) is tracked. `skip_first = 1` evaluates on
    /// the shifted walk. Only valid for trajectories sampled from the same
    /// distribution this context was built from (atom indices must agree).
    pub fn value_along(
        &self,
        t: &Trajectory,
        g: &PiecewiseAffineCircleMap,
        y: &CirclePoint,
        skip_first: usize,
        horizon: usize,
    ) -> HarmonicTrialValue {
        let mut value = cocycle(g).get(y);
        let mut point = g.invert().evaluate(y);
        let mut last_change = 0usize;
        for (counted, k) in (skip_first + 1..=horizon).enumerate() {
            let atom = t.increment_atom_index(k);
            let delta = self.atom_cocycles[atom].get(&point);
            if !delta.is_zero() {
                value = value + delta;
                last_change = counted + 1;
            }
            if !self.atom_inverses[atom].is_identity() {
                point = self.atom_inverses[atom].evaluate(&point);
            }
        }
        HarmonicTrialValue { value, last_change }
    }
}

/// Evolves the configuration of the walk prefixed by g (started from C_g,
/// per the P_g semantics) and records the value at y per trial.
pub fn harmonic_trial_values(
    mu: &StepDistribution,
    g: &PiecewiseAffineCircleMap,
    y: &CirclePoint,
    horizon: usize,
    trials: u64,
    seed: u64,
) -> Result<Vec<HarmonicTrialValue>> {
    let ctx = HarmonicContext::new(mu);
    try_batch(mu, horizon, trials, seed, move |_, t| {
        Ok(ctx.value_along(t, g, y, 0, horizon))
    })
}

/// Monte Carlo estimate of f(g) = P_g[C_inf(w)(y) = k] with base-2 integer
/// target k. Trials still changing after `stability_cutoff` (default two
/// thirds of the horizon) are counted as unstabilized.
#[allow(clippy::too_many_arguments)]
pub fn estimate_harmonic(
    mu: &StepDistribution,
    g: &PiecewiseAffineCircleMap,
    y: &CirclePoint,
    k: i64,
    horizon: usize,
    trials: u64,
    seed: u64,
    stability_cutoff: Option<usize>,
) -> Result<HarmonicEstimate> {
    let cutoff = stability_cutoff.unwrap_or(horizon * 2 / 3);
    let values = harmonic_trial_values(mu, g, y, horizon, trials, seed)?;
    let target = JumpLog::exact_integer(k);
    let hits: Vec<f64> = values
        .iter()
        .map(|v| if v.value == target { 1.0 } else { 0.0 })
        .collect();
    let unstabilized = values.iter().filter(|v| v.last_change > cutoff).count() as u64;
    Ok(HarmonicEstimate {
        probability: stats::mean(&hits),
        std_error: stats::std_error(&hits),
        trials,
        unstabilized,
        stability_cutoff: cutoff,
    })
}

/// One row of the witness report.
#[derive(Clone, Debug)]
pub struct WitnessRow {
    pub n: u32,
    pub f_e: f64,
    pub f_an: f64,
    /// Estimated stationary mass of the support interval I_n.
    pub nu_in: f64,
    /// |f(a_n) - f(e)| - 2 nu(I_n).
    pub margin: f64,
    pub sigma: f64,
    pub verdict: bool,
    pub unstabilized_e: u64,
    pub unstabilized_an: u64,
}

#[derive(Clone, Debug)]
pub struct WitnessReport {
    pub rows: Vec<WitnessRow>,
    pub f_e: f64,
    pub calibration_ok: bool,
    /// True when some n achieves margin > 3 sigma.
    pub verdict: bool,
}

/// Desk-scale witness that the breakpoint boundary is not a quotient of the
/// circle: for the harmonic functions f(g) = P_g[C_inf(y) = k], the spread
/// |f(a_n) - f(e)| must exceed 2 nu(I_n) (which bounds the spread of any
/// harmonic function transported from the circle) beyond combined noise.
#[allow(clippy::too_many_arguments)]
pub fn theorem_b_witness(
    mu: &StepDistribution,
    y: &CirclePoint,
    k: i64,
    n_list: &[u32],
    trials: u64,
    horizon: usize,
    xi_horizon: usize,
    seed: u64,
    params: &XiParams,
) -> Result<WitnessReport> {
    let f_e = estimate_harmonic(
        mu,
        &PiecewiseAffineCircleMap::identity(),
        y,
        k,
        horizon,
        trials,
        seed,
        None,
    )?;
    let calibration_ok = f_e.probability > 0.05;

    // one stationary run reused for every I_n
    let samples = stationary_samples(
        mu,
        xi_horizon,
        trials,
        derive_seed(seed ^ 0x57A710, 0),
        params,
    )?;

    let mut rows = Vec::with_capacity(n_list.len());
    for &n in n_list {
        let a_n = remark_element(y, n)?;
        let i_n = a_n.smallest_interval_containing_support()?;
        let f_an = estimate_harmonic(mu, &a_n, y, k, horizon, trials, seed, None)?;
        let nu_in = fraction_in_arc(&samples, &i_n);
        let nu_se = (nu_in * (1.0 - nu_in) / samples.len() as f64).sqrt();
        let margin = (f_an.probability - f_e.probability).abs() - 2.0 * nu_in;
        let sigma = (f_e.std_error.powi(2) + f_an.std_error.powi(2) + 4.0 * nu_se.powi(2)).sqrt();
        rows.push(WitnessRow {
            n,
            f_e: f_e.probability,
            f_an: f_an.probability,
            nu_in,
            margin,
            sigma,
            verdict: margin > 3.0 * sigma,
            unstabilized_e: f_e.unstabilized,
            unstabilized_an: f_an.unstabilized,
        });
    }
    Ok(WitnessReport {
        verdict: rows.iter().any(|r| r.verdict),
        f_e: f_e.probability,
        calibration_ok,
        rows,
    })
}
