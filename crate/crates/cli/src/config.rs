//! Run configuration: a single JSON object, overridden field-by-field by CLI
//! flags (flags win over the file, the file wins over built-in defaults).

use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

use circlewalk_core::boundary::XiParams;
use circlewalk_core::exact::{CirclePoint, Rational};
use circlewalk_core::map::CircleArc;
use circlewalk_core::measure::StepDistribution;
use circlewalk_core::thompson::{remark_element, GeneratorSet};

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub generators: Option<PathBuf>,
    pub relations: Option<PathBuf>,
    pub measure: Option<PathBuf>,
    pub seed: Option<u64>,
    pub trials: Option<u64>,
    pub horizon: Option<usize>,
    pub workers: Option<usize>,
    pub out: Option<PathBuf>,
    pub lazy: Option<bool>,
    pub mix_weight: Option<String>,
    pub remark_n: Option<u32>,
    pub remark_y: Option<String>,
    pub grid: Option<usize>,
    pub delta: Option<String>,
    pub radius_bound: Option<String>,
    pub xi_horizon: Option<usize>,
    pub bins: Option<usize>,
    pub sparsity: Option<usize>,
    pub n: Option<usize>,
    pub n_list: Option<Vec<u32>>,
    pub x: Option<String>,
    pub y: Option<String>,
    pub arc_left: Option<String>,
    pub arc_right: Option<String>,
    pub arc_i_left: Option<String>,
    pub arc_i_right: Option<String>,
    pub fit_lo: Option<usize>,
    pub fit_hi: Option<usize>,
    pub k_target: Option<i64>,
    pub max_steps: Option<usize>,
    pub checkpoints: Option<Vec<usize>>,
    pub bootstrap: Option<u32>,
    pub pairs: Option<u64>,
    pub word: Option<Vec<String>>,
    pub word_len: Option<usize>,
}

impl FileConfig {
    pub fn load(path: &PathBuf) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("parsing config {}", path.display()))
    }

    /// other's fields win where present.
    pub fn overlaid(mut self, other: FileConfig) -> FileConfig {
        macro_rules! take {
            ($($f:ident),*) => { $( if other.$f.is_some() { self.$f = other.$f; } )* };
        }
        take!(
            generators,
            relations,
            measure,
            seed,
            trials,
            horizon,
            workers,
            out,
            lazy,
            mix_weight,
            remark_n,
            remark_y,
            grid,
            delta,
            radius_bound,
            xi_horizon,
            bins,
            sparsity,
            n,
            n_list,
            x,
            y,
            arc_left,
            arc_right,
            arc_i_left,
            arc_i_right,
            fit_lo,
            fit_hi,
            k_target,
            max_steps,
            checkpoints,
            bootstrap,
            pairs,
            word,
            word_len
        );
        self
    }
}

/// Fully resolved run parameters with defaults applied.
#[derive(Clone, Debug)]
pub struct Resolved {
    pub config: FileConfig,
    pub seed: u64,
    pub trials: u64,
    pub horizon: usize,
    pub workers: usize,
    pub out: PathBuf,
}

impl Resolved {
    pub fn new(config: FileConfig) -> Resolved {
        Resolved {
            seed: config.seed.unwrap_or(12345),
            trials: config.trials.unwrap_or(1000),
            horizon: config.horizon.unwrap_or(100),
            workers: config.workers.unwrap_or(0),
            out: config.out.clone().unwrap_or_else(|| PathBuf::from("out")),
            config,
        }
    }

    pub fn generators(&self) -> Result<GeneratorSet> {
        let set = match &self.config.generators {
            Some(path) => GeneratorSet::load(path, self.config.relations.as_deref())?,
            None => GeneratorSet::bundled()?,
        };
        Ok(set)
    }

    /// Measure pipeline: load (or bundled uniform), then optional lazification,
    /// then optional mixture with the remark element at `mix_weight`.
    pub fn measure(&self, gens: &GeneratorSet) -> Result<StepDistribution> {
        let mut mu = match &self.config.measure {
            Some(path) => StepDistribution::load(path, gens)?,
            None => StepDistribution::bundled(gens)?,
        };
        if self.config.lazy.unwrap_or(false) {
            mu = mu.lazify();
        }
        if let Some(w) = &self.config.mix_weight {
            let weight: Rational = w.parse()?;
            if weight.is_positive() {
                let a = self.remark_a()?;
                mu = mu.mix(&StepDistribution::dirac(a), &weight)?;
            }
        }
        Ok(mu)
    }

    /// The distinguished small-support element used by the conditional and
    /// domination statistics.
    pub fn remark_a(&self) -> Result<circlewalk_core::map::PiecewiseAffineCircleMap> {
        let y = self.remark_y()?;
        let n = self.config.remark_n.unwrap_or(4);
        Ok(remark_element(&y, n)?)
    }

    pub fn remark_y(&self) -> Result<CirclePoint> {
        parse_point(self.config.remark_y.as_deref().unwrap_or("1/2"))
    }

    pub fn xi_params(&self) -> Result<XiParams> {
        let mut p = XiParams::default();
        if let Some(g) = self.config.grid {
            p.grid = g;
        }
        if let Some(d) = &self.config.delta {
            p.delta = d.parse()?;
        }
        if let Some(r) = &self.config.radius_bound {
            p.radius_bound = r.parse()?;
        }
        Ok(p)
    }

    pub fn point_x(&self) -> Result<CirclePoint> {
        parse_point(self.config.x.as_deref().unwrap_or("0/1"))
    }

    pub fn point_y(&self) -> Result<CirclePoint> {
        parse_point(self.config.y.as_deref().unwrap_or("1/2"))
    }

    /// Arc J; defaults to the support interval of the remark element.
    pub fn arc_j(&self) -> Result<CircleArc> {
        match (&self.config.arc_left, &self.config.arc_right) {
            (Some(l), Some(r)) => Ok(CircleArc::new(parse_point(l)?, parse_point(r)?)),
            (None, None) => Ok(self.remark_a()?.smallest_interval_containing_support()?),
            _ => bail!("arc_left and arc_right must be given together"),
        }
    }

    pub fn arc_i(&self) -> Result<CircleArc> {
        match (&self.config.arc_i_left, &self.config.arc_i_right) {
            (Some(l), Some(r)) => Ok(CircleArc::new(parse_point(l)?, parse_point(r)?)),
            _ => bail!("this subcommand needs arc_i_left and arc_i_right"),
        }
    }

    pub fn n(&self) -> usize {
        self.config.n.unwrap_or(60)
    }

    pub fn xi_horizon_for(&self, n: usize) -> usize {
        // documented slack: the boundary point is estimated at 4n by default
        self.config.xi_horizon.unwrap_or(4 * n.max(1))
    }

    pub fn fit_window(&self, n_max: usize) -> (usize, usize) {
        (
            self.config.fit_lo.unwrap_or(10.min(n_max)),
            self.config.fit_hi.unwrap_or(n_max),
        )
    }
}

pub fn parse_point(s: &str) -> Result<CirclePoint> {
    Ok(s.parse::<CirclePoint>()?)
}
