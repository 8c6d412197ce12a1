//! Seeded, reproducible sampling of random-walk trajectories and batch Monte
//! Carlo execution.
//!
//! Reproducibility contract: the seed of trial `i` is a pure function of
//! (base_seed, i), so results are bitwise identical for any worker count.

use std::io::Write;
use std::sync::Arc as StdArc;
use std::sync::Mutex;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::Result;
use crate::exact::CirclePoint;
use crate::map::PiecewiseAffineCircleMap;
use crate::measure::StepDistribution;
use crate::thompson::GeneratorSet;

/// Counter-based per-trial seed derivation (splitmix64 of a golden-ratio
/// stride), injective in the trial index for a fixed base seed.
pub fn derive_seed(base_seed: u64, trial_index: u64) -> u64 {
    let mut z = base_seed
        .wrapping_add(trial_index.wrapping_mul(0x9E37_79B9_7F4A_7C15))
        .wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn rng_for(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Default interval at which full canonical positions are cached when they
/// are materialized on demand.
pub const DEFAULT_CHECKPOINT_EVERY: usize = 16;

/// One sample path of the walk: seed, i.i.d. increments g_1..g_N, and
/// positions w_0 = e, w_k = w_{k-1} g_k materialized on demand (full
/// canonical forms at large horizons are the memory bottleneck, so only
/// every `checkpoint_every`-th position is kept).
pub struct Trajectory {
    seed: u64,
    increments: Vec<StdArc<PiecewiseAffineCircleMap>>,
    /// Index of each increment in the sampled distribution's atom list.
    increment_atoms: Vec<usize>,
    checkpoint_every: usize,
    checkpoints: Mutex<Vec<(usize, StdArc<PiecewiseAffineCircleMap>)>>,
}

impl Trajectory {
    /// Samples `horizon` i.i.d. increments from `mu`, deterministically in
    /// the seed.
    pub fn sample(mu: &StepDistribution, horizon: usize, seed: u64) -> Self {
        let mut rng = rng_for(seed);
        let mut increments = Vec::with_capacity(horizon);
        let mut increment_atoms = Vec::with_capacity(horizon);
        for _ in 0..horizon {
            let i = mu.sample_index(&mut rng);
            increment_atoms.push(i);
            increments.push(StdArc::clone(&mu.atoms()[i].map));
        }
        Trajectory {
            seed,
            increments,
            increment_atoms,
            checkpoint_every: DEFAULT_CHECKPOINT_EVERY,
            checkpoints: Mutex::new(Vec::new()),
        }
    }

    /// Builds a trajectory from explicit increments (tests, shifted walks).
    pub fn from_increments(increments: Vec<PiecewiseAffineCircleMap>, seed: u64) -> Self {
        Trajectory {
            seed,
            increment_atoms: vec![0; increments.len()],
            increments: increments.into_iter().map(StdArc::new).collect(),
            checkpoint_every: DEFAULT_CHECKPOINT_EVERY,
            checkpoints: Mutex::new(Vec::new()),
        }
    }

    pub fn with_checkpoint_every(mut self, k: usize) -> Self {
        self.checkpoint_every = k.max(1);
        self
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn horizon(&self) -> usize {
        self.increments.len()
    }

    pub fn increments(&self) -> &[StdArc<PiecewiseAffineCircleMap>] {
        &self.increments
    }

    /// g_k with the 1-based indexing w_k = w_{k-1} g_k.
    pub fn increment(&self, k: usize) -> &PiecewiseAffineCircleMap {
        &self.increments[k - 1]
    }

    pub fn increment_atom_index(&self, k: usize) -> usize {
        self.increment_atoms[k - 1]
    }

    /// Canonical position w_k = g_1 ... g_k, recomputed from the nearest
    /// cached checkpoint and cached at checkpoint multiples along the way.
    pub fn position(&self, k: usize) -> StdArc<PiecewiseAffineCircleMap> {
        assert!(k <= self.horizon(), "position index beyond horizon");
        if k == 0 {
            return StdArc::new(PiecewiseAffineCircleMap::identity());
        }
        let mut best: (usize, StdArc<PiecewiseAffineCircleMap>) =
            (0, StdArc::new(PiecewiseAffineCircleMap::identity()));
        {
            let cps = self.checkpoints.lock().expect("checkpoint lock");
            if let Some((i, m)) = cps.iter().filter(|(i, _)| *i <= k).max_by_key(|(i, _)| *i) {
                best = (*i, StdArc::clone(m));
            }
        }
        let (mut at, mut acc) = (best.0, best.1.as_ref().clone());
        while at < k {
            at += 1;
            acc = acc.compose(&self.increments[at - 1]);
            if at % self.checkpoint_every == 0 {
                let mut cps = self.checkpoints.lock().expect("checkpoint lock");
                if !cps.iter().any(|(i, _)| *i == at) {
                    cps.push((at, StdArc::new(acc.clone())));
                }
            }
        }
        if at == k {
            StdArc::new(acc)
        } else {
            unreachable!("walked past requested position")
        }
    }

    /// w_k(x) evaluated from the increments right to left; no canonical
    /// position is materialized.
    pub fn evaluate_position(&self, k: usize, x: &CirclePoint) -> CirclePoint {
        assert!(k <= self.horizon(), "position index beyond horizon");
        let mut v = x.clone();
        for g in self.increments[..k].iter().rev() {
            if g.is_identity() {
                continue;
            }
            v = g.evaluate(&v);
        }
        v
    }

    /// Iterator over the pullback orbit x, w_1^{-1}(x), w_2^{-1}(x), ...
    /// computed incrementally via w_k^{-1} = g_k^{-1} w_{k-1}^{-1}.
    pub fn pullback_orbit(&self, x: &CirclePoint) -> PullbackOrbit<'_> {
        PullbackOrbit {
            trajectory: self,
            next_step: 0,
            current: x.clone(),
            inverted: self.increments.iter().map(|_| None).collect(),
        }
    }

    /// CSV export: one row per step with the increment's label (from the
    /// generator set when recognizable) or a content hash.
    pub fn write_csv<W: Write>(
        &self,
        mut out: W,
        trial: u64,
        gens: Option<&GeneratorSet>,
    ) -> Result<()> {
        writeln!(out, "trial,step,increment")?;
        for (i, g) in self.increments.iter().enumerate() {
            let label = gens
                .and_then(|gs| gs.name_of(g))
                .map(str::to_string)
                .unwrap_or_else(|| {
                    if g.is_identity() {
                        "e".to_string()
                    } else {
                        format!("h{:016x}", fxhash_map(g))
                    }
                });
            writeln!(out, "{},{},{}", trial, i + 1, label)?;
        }
        Ok(())
    }
}

fn fxhash_map(g: &PiecewiseAffineCircleMap) -> u64 {
    use std::collections::hash_map::DefaultHasher;
    use std::hash::{Hash, Hasher};
    let mut h = DefaultHasher::new();
    g.hash(&mut h);
    h.finish()
}

/// See [`Trajectory::pullback_orbit`]. Inverses of increments are computed
/// once on first use and cached per step.
pub struct PullbackOrbit<'a> {
    trajectory: &'a Trajectory,
    next_step: usize,
    current: CirclePoint,
    inverted: Vec<Option<PiecewiseAffineCircleMap>>,
}

impl PullbackOrbit<'_> {
    /// The point w_k^{-1}(x) for the current step k (starts at k = 0).
    pub fn current(&self) -> &CirclePoint {
        &self.current
    }

    pub fn step_index(&self) -> usize {
        self.next_step
    }

    /// Advances one step; returns the new pullback point, or None past the
    /// horizon.
    pub fn advance(&mut self) -> Option<&CirclePoint> {
        if self.next_step >= self.trajectory.horizon() {
            return None;
        }
        let k = self.next_step;
        if !self.trajectory.increments[k].is_identity() {
            let inv =
                self.inverted[k].get_or_insert_with(|| self.trajectory.increments[k].invert());
            self.current = inv.evaluate(&self.current);
        }
        self.next_step += 1;
        Some(&self.current)
    }
}

/// Runs `trials` independent trajectories and applies a pure statistic to
/// each. Results are index-ordered and bitwise identical for any worker
/// count; failures are reported per trial without aborting the batch.
pub fn batch<T, F>(
    mu: &StepDistribution,
    horizon: usize,
    trials: u64,
    base_seed: u64,
    statistic: F,
) -> Vec<Result<T>>
where
    T: Send,
    F: Fn(u64, &Trajectory) -> Result<T> + Sync,
{
    (0..trials)
        .into_par_iter()
        .map(|trial| {
            let seed = derive_seed(base_seed, trial);
            let trajectory = Trajectory::sample(mu, horizon, seed);
            statistic(trial, &trajectory)
        })
        .collect()
}

/// Like [`batch`] but flattens errors: the first failure wins.
pub fn try_batch<T, F>(
    mu: &StepDistribution,
    horizon: usize,
    trials: u64,
    base_seed: u64,
    statistic: F,
) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(u64, &Trajectory) -> Result<T> + Sync,
{
    let mut out = Vec::with_capacity(trials as usize);
    for r in batch(mu, horizon, trials, base_seed, statistic) {
        out.push(r?);
    }
    Ok(out)
}
