//! Exact Shannon entropy of convolution powers, entropy increments, Bernoulli
//! entropy, and the binned conditional-entropy proxy.
//!
//! Convolution powers are accumulated with exact rational weights over
//! canonical forms, so the only floating-point step is the final -w log w per
//! atom, summed in a deterministic (sorted) order. Entropies are in nats; the
//! breakpoint-cocycle module uses base-2 logarithms and the two conventions
//! never mix.

use std::collections::HashMap;

use rand::Rng;

use crate::boundary::{estimate_xi, XiParams};
use crate::error::{Error, Result};
use crate::exact::Rational;
use crate::map::PiecewiseAffineCircleMap;
use crate::measure::StepDistribution;
use crate::walk::{derive_seed, rng_for, try_batch};

/// Default canonical-form budget for exact convolution powers.
pub const DEFAULT_SUPPORT_CAP: usize = 2_000_000;

/// Natural-log Shannon entropy from exact weights; the conversion to f64 is
/// the single approximate step, done in sorted weight order so the result is
/// reproducible.
pub fn shannon_entropy(dist: &StepDistribution) -> f64 {
    let mut weights: Vec<Rational> = dist.atoms().iter().map(|a| a.weight.clone()).collect();
    weights.sort();
    weights
        .iter()
        .map(|w| {
            let p = w.to_f64();
            if p > 0.0 {
                -p * p.ln()
            } else {
                0.0
            }
        })
        .sum()
}

#[derive(Clone, Debug)]
pub struct EntropyPoint {
    pub n: u32,
    pub entropy_nats: f64,
    pub support_size: usize,
}

/// H(mu^{*n}) for n = 1.. until n_max or the support cap.
#[derive(Clone, Debug)]
pub struct EntropyCurve {
    pub points: Vec<EntropyPoint>,
    /// True when the cap stopped the curve before n_max.
    pub truncated: bool,
    pub support_cap: usize,
}

impl EntropyCurve {
    /// Increment estimates H(mu^{*(n+1)}) - H(mu^{*n}).
    pub fn increments(&self) -> Vec<(u32, f64)> {
        self.points
            .windows(2)
            .map(|w| (w[1].n, w[1].entropy_nats - w[0].entropy_nats))
            .collect()
    }
}

/// Exact entropy of each convolution power up to n_max, stopping (with the
/// truncation flag) as soon as a power's support would exceed the cap.
pub fn entropy_curve(
    mu: &StepDistribution,
    n_max: u32,
    support_cap: usize,
) -> Result<EntropyCurve> {
    if n_max == 0 {
        return Err(Error::InvalidParameter(
            "entropy curve needs n_max >= 1".into(),
        ));
    }
    let mut points = Vec::new();
    let mut truncated = false;
    let mut current = mu.clone();
    for n in 1..=n_max {
        if current.support_size() > support_cap {
            truncated = true;
            break;
        }
        points.push(EntropyPoint {
            n,
            entropy_nats: shannon_entropy(&current),
            support_size: current.support_size(),
        });
        if n < n_max {
            current = current.convolve(mu);
        }
    }
    Ok(EntropyCurve {
        points,
        truncated,
        support_cap,
    })
}

/// Entropy of the two-point distribution with weights proportional to
/// (p_a, p_e); symmetric in its arguments.
pub fn bernoulli_entropy(p_a: &Rational, p_e: &Rational) -> Result<f64> {
    if !p_a.is_positive() || !p_e.is_positive() {
        return Err(Error::InvalidParameter(
            "bernoulli entropy needs positive weights".into(),
        ));
    }
    let total = p_a + p_e;
    let p = p_a.checked_div(&total)?.to_f64();
    let q = 1.0 - p;
    Ok(-p * p.ln() - q * q.ln())
}

#[derive(Clone, Debug)]
pub struct ConditionalEntropyReport {
    /// Plug-in estimate of H(w_n | arc bin of xi), Miller-Madow corrected.
    pub proxy_nats: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub bins: usize,
    /// Bins observed with fewer than `min_bin_count` samples.
    pub undersampled_bins: usize,
    pub min_bin_count: u64,
    pub trials: u64,
    pub bootstrap_resamples: u32,
}

fn miller_madow(counts: &HashMap<u64, u64>, total: u64) -> f64 {
    if total == 0 {
        return 0.0;
    }
    let n = total as f64;
    let mut h = 0.0;
    for &c in counts.values() {
        let p = c as f64 / n;
        if p > 0.0 {
            h -= p * p.ln();
        }
    }
    h + (counts.len() as f64 - 1.0) / (2.0 * n)
}

fn conditional_proxy_from(rows: &[(usize, u64)], bins: usize) -> f64 {
    // rows: (bin, group key of w_n)
    let mut per_bin: Vec<HashMap<u64, u64>> = vec![HashMap::new(); bins];
    let mut bin_totals = vec![0u64; bins];
    for (b, key) in rows {
        *per_bin[*b].entry(*key).or_insert(0) += 1;
        bin_totals[*b] += 1;
    }
    let total: u64 = bin_totals.iter().sum();
    if total == 0 {
        return 0.0;
    }
    let mut h = 0.0;
    for b in 0..bins {
        if bin_totals[b] == 0 {
            continue;
        }
        h += bin_totals[b] as f64 / total as f64 * miller_madow(&per_bin[b], bin_totals[b]);
    }
    h
}

/// Plug-in estimate of the conditional entropy of the time-n position given
/// the arc bin of the estimated boundary point, with bootstrap CI. An
/// approximation by construction (binned conditioning, plug-in bias); small n
/// only (the empirical support of w_n must be resolvable by `trials`).
#[allow(clippy::too_many_arguments)]
pub fn conditional_entropy_proxy(
    mu: &StepDistribution,
    n: usize,
    trials: u64,
    arc_bins: usize,
    xi_horizon: usize,
    seed: u64,
    params: &XiParams,
    bootstrap_resamples: u32,
) -> Result<ConditionalEntropyReport> {
    if arc_bins < 2 {
        return Err(Error::InvalidParameter("need at least 2 arc bins".into()));
    }
    if xi_horizon <= n {
        return Err(Error::InvalidParameter("xi_horizon must exceed n".into()));
    }
    // (bin of xi, canonical position at time n)
    let raw: Vec<(usize, PiecewiseAffineCircleMap)> =
        try_batch(mu, xi_horizon, trials, seed, |_, t| {
            let xi = estimate_xi(t, xi_horizon, params)?;
            let scaled = xi.xi_hat.value() * &Rational::integer(arc_bins as i64);
            let b =
                usize::try_from(i64::try_from(scaled.floor()).unwrap_or(0)).unwrap_or(0) % arc_bins;
            Ok((b, t.position(n).as_ref().clone()))
        })?;

    // group positions into stable integer keys
    let mut key_of: HashMap<PiecewiseAffineCircleMap, u64> = HashMap::new();
    let mut rows: Vec<(usize, u64)> = Vec::with_capacity(raw.len());
    for (b, w) in raw {
        let next = key_of.len() as u64;
        let key = *key_of.entry(w).or_insert(next);
        rows.push((b, key));
    }

    let proxy = conditional_proxy_from(&rows, arc_bins);

    let mut boot = Vec::with_capacity(bootstrap_resamples as usize);
    let mut rng = rng_for(derive_seed(seed ^ 0xB007_57A9, 0));
    for _ in 0..bootstrap_resamples {
        let resample: Vec<(usize, u64)> = (0..rows.len())
            .map(|_| rows[rng.gen_range(0..rows.len())])
            .collect();
        boot.push(conditional_proxy_from(&resample, arc_bins));
    }
    let sd = crate::stats::variance(&boot).sqrt();

    let min_bin_count = 25u64;
    let mut bin_totals = vec![0u64; arc_bins];
    for (b, _) in &rows {
        bin_totals[*b] += 1;
    }
    let undersampled = bin_totals.iter().filter(|&&c| c < min_bin_count).count();

    Ok(ConditionalEntropyReport {
        proxy_nats: proxy,
        ci_low: proxy - 1.96 * sd,
        ci_high: proxy + 1.96 * sd,
        bins: arc_bins,
        undersampled_bins: undersampled,
        min_bin_count,
        trials,
        bootstrap_resamples,
    })
}
