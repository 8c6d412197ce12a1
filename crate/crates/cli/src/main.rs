//! Experiment runner: deterministic statistics over random walks of exact
//! piecewise-affine circle maps. Every subcommand writes CSV artifacts plus a
//! JSON run manifest into the output directory; identical configurations
//! produce bit-identical CSVs at any worker count.

mod config;
mod output;

use std::path::PathBuf;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};

use circlewalk_core::boundary;
use circlewalk_core::cocycle;
use circlewalk_core::domination;
use circlewalk_core::entropy;
use circlewalk_core::map::PiecewiseAffineCircleMap;
use circlewalk_core::walk;

use config::{FileConfig, Resolved};
use output::{fmt_f64, OutputSink};

#[derive(Parser)]
#[command(
    name = "circlewalk",
    version,
    about = "Random-walk boundary statistics for exact piecewise-affine circle maps"
)]
struct Cli {
    /// JSON config file; CLI flags override its fields.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Generator file (JSON array of {name, map, inverse_name}).
    #[arg(long, global = true)]
    generators: Option<PathBuf>,

    /// Relation file (JSON array of word lists) for --generators.
    #[arg(long, global = true)]
    relations: Option<PathBuf>,

    /// Measure file (JSON array of {word, weight}).
    #[arg(long, global = true)]
    measure: Option<PathBuf>,

    #[arg(long, global = true)]
    seed: Option<u64>,

    #[arg(long, global = true)]
    trials: Option<u64>,

    #[arg(long, global = true)]
    horizon: Option<usize>,

    /// Worker threads (0 = all cores). Outputs never depend on this.
    #[arg(long, global = true)]
    workers: Option<usize>,

    /// Output directory for CSV artifacts and the run manifest.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Replace the loaded measure by its lazy version (half mass on the identity).
    #[arg(long, global = true)]
    lazy: bool,

    /// Mix the remark element into the measure with this weight (e.g. "1/8").
    #[arg(long, global = true)]
    mix_weight: Option<String>,

    /// Remark element sharpness n.
    #[arg(long, global = true)]
    remark_n: Option<u32>,

    /// Remark element fixed point y (dyadic, e.g. "1/2").
    #[arg(long, global = true)]
    remark_y: Option<String>,

    #[arg(long, global = true)]
    xi_horizon: Option<usize>,

    #[arg(long, global = true)]
    bins: Option<usize>,

    #[arg(long, global = true)]
    sparsity: Option<usize>,

    /// Window length n for counters and curves.
    #[arg(long, global = true)]
    n: Option<usize>,

    #[arg(long, global = true, value_delimiter = ',')]
    n_list: Option<Vec<u32>>,

    #[arg(long, global = true)]
    x: Option<String>,

    #[arg(long, global = true)]
    y: Option<String>,

    #[arg(long, global = true)]
    arc_left: Option<String>,

    #[arg(long, global = true)]
    arc_right: Option<String>,

    #[arg(long, global = true)]
    arc_i_left: Option<String>,

    #[arg(long, global = true)]
    arc_i_right: Option<String>,

    #[arg(long, global = true)]
    fit_lo: Option<usize>,

    #[arg(long, global = true)]
    fit_hi: Option<usize>,

    /// Target configuration value k for harmonic estimates.
    #[arg(long, global = true)]
    k_target: Option<i64>,

    #[arg(long, global = true)]
    max_steps: Option<usize>,

    #[arg(long, global = true, value_delimiter = ',')]
    checkpoints: Option<Vec<usize>>,

    #[arg(long, global = true)]
    bootstrap: Option<u32>,

    /// Number of random pairs for check-style subcommands.
    #[arg(long, global = true)]
    pairs: Option<u64>,

    /// Generator word, comma separated (e.g. "A,B_inv").
    #[arg(long, global = true, value_delimiter = ',')]
    word: Option<Vec<String>>,

    #[arg(long, global = true)]
    word_len: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Mean pullback distance curve with fitted contraction rate.
    ContractCurve,
    /// Mean distance of w_n(x) to the trajectory's boundary point.
    BoundaryCurve,
    /// Histogram of the estimated boundary point (stationary measure).
    Stationary,
    /// Fraction of times the boundary point visits w_k(J).
    VisitFraction,
    /// Conditional increment frequency against mu(a).
    RnCheck,
    /// Search for a group element carrying arc I into arc J.
    ContractInterval,
    /// Dominating-interval counter Z along sampled walks.
    DominationZ,
    /// W counter (domination + boundary + marked increments).
    DominationW,
    /// Extract xi-good collections and check they are satisfactory.
    GoodCollections,
    /// Exact entropy of convolution powers.
    EntropyCurve,
    /// Binned conditional entropy proxy.
    CondEntropy,
    /// Verify the cocycle chain rule on random pairs.
    CocycleCheck,
    /// Configuration stabilization records along walks.
    Stabilization,
    /// Return statistics of the pullback chain (transience diagnostic).
    Transience,
    /// Monte Carlo harmonic function value at one group element.
    Harmonic,
    /// Witness report comparing harmonic spread against stationary mass.
    TheoremB,
    /// Verify every relation in the active relation file.
    VerifyRelations,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::ContractCurve => "contract-curve",
            Command::BoundaryCurve => "boundary-curve",
            Command::Stationary => "stationary",
            Command::VisitFraction => "visit-fraction",
            Command::RnCheck => "rn-check",
            Command::ContractInterval => "contract-interval",
            Command::DominationZ => "domination-z",
            Command::DominationW => "domination-w",
            Command::GoodCollections => "good-collections",
            Command::EntropyCurve => "entropy-curve",
            Command::CondEntropy => "cond-entropy",
            Command::CocycleCheck => "cocycle-check",
            Command::Stabilization => "stabilization",
            Command::Transience => "transience",
            Command::Harmonic => "harmonic",
            Command::TheoremB => "theorem-b",
            Command::VerifyRelations => "verify-relations",
        }
    }
}

fn main() {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => {}
        Err(e) => {
            // single-line machine-parsable reason
            eprintln!("error: {}", format!("{e:#}").replace('\n', " | "));
            std::process::exit(2);
        }
    }
}

fn cli_overrides(cli: &Cli) -> FileConfig {
    FileConfig {
        generators: cli.generators.clone(),
        relations: cli.relations.clone(),
        measure: cli.measure.clone(),
        seed: cli.seed,
        trials: cli.trials,
        horizon: cli.horizon,
        workers: cli.workers,
        out: cli.out.clone(),
        lazy: if cli.lazy { Some(true) } else { None },
        mix_weight: cli.mix_weight.clone(),
        remark_n: cli.remark_n,
        remark_y: cli.remark_y.clone(),
        grid: None,
        delta: None,
        radius_bound: None,
        xi_horizon: cli.xi_horizon,
        bins: cli.bins,
        sparsity: cli.sparsity,
        n: cli.n,
        n_list: cli.n_list.clone(),
        x: cli.x.clone(),
        y: cli.y.clone(),
        arc_left: cli.arc_left.clone(),
        arc_right: cli.arc_right.clone(),
        arc_i_left: cli.arc_i_left.clone(),
        arc_i_right: cli.arc_i_right.clone(),
        fit_lo: cli.fit_lo,
        fit_hi: cli.fit_hi,
        k_target: cli.k_target,
        max_steps: cli.max_steps,
        checkpoints: cli.checkpoints.clone(),
        bootstrap: cli.bootstrap,
        pairs: cli.pairs,
        word: cli.word.clone(),
        word_len: cli.word_len,
    }
}

fn run(cli: Cli) -> Result<()> {
    let started = Instant::now();
    let file_cfg = match &cli.config {
        Some(path) => FileConfig::load(path)?,
        None => FileConfig::default(),
    };
    let merged = file_cfg.overlaid(cli_overrides(&cli));
    let resolved = Resolved::new(merged);
    if resolved.workers > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(resolved.workers)
            .build_global()
            .context("building worker pool")?;
    }
    let command = cli.command;
    let mut sink = OutputSink::new(&resolved.out)?;
    dispatch(command, &resolved, &mut sink)?;
    sink.write_manifest(command.name(), &resolved, started.elapsed())?;
    Ok(())
}

fn dispatch(command: Command, rc: &Resolved, sink: &mut OutputSink) -> Result<()> {
    match command {
        Command::ContractCurve => contract_curve(rc, sink),
        Command::BoundaryCurve => boundary_curve(rc, sink),
        Command::Stationary => stationary(rc, sink),
        Command::VisitFraction => visit_fraction(rc, sink),
        Command::RnCheck => rn_check(rc, sink),
        Command::ContractInterval => contract_interval(rc, sink),
        Command::DominationZ => domination_z(rc, sink),
        Command::DominationW => domination_w(rc, sink),
        Command::GoodCollections => good_collections(rc, sink),
        Command::EntropyCurve => entropy_curve(rc, sink),
        Command::CondEntropy => cond_entropy(rc, sink),
        Command::CocycleCheck => cocycle_check(rc, sink),
        Command::Stabilization => stabilization(rc, sink),
        Command::Transience => transience(rc, sink),
        Command::Harmonic => harmonic(rc, sink),
        Command::TheoremB => theorem_b(rc, sink),
        Command::VerifyRelations => verify_relations(rc, sink),
    }
}

fn write_curve_csv(
    sink: &mut OutputSink,
    file: &str,
    report: &boundary::ContractionReport,
) -> Result<()> {
    let mut rows = vec!["n,mean_distance,ci_low,ci_high".to_string()];
    for (i, (n, mean)) in report.means.iter().enumerate() {
        let m = mean.to_f64();
        let se = report.std_errors.get(i).copied().unwrap_or(0.0);
        rows.push(format!(
            "{},{},{},{}",
            n,
            fmt_f64(m),
            fmt_f64(m - 1.96 * se),
            fmt_f64(m + 1.96 * se)
        ));
    }
    sink.write_csv(file, &rows)
}

fn contract_curve(rc: &Resolved, sink: &mut OutputSink) -> Result<()> {
    let gens = rc.generators()?;
    let mu = rc.measure(&gens)?;
    let n = rc.n();
    let report = boundary::contraction_curve(
        &mu,
        &rc.point_x()?,
        &rc.point_y()?,
        n,
        rc.trials,
        rc.seed,
        rc.fit_window(n),
    )?;
    write_curve_csv(sink, "contract_curve.csv", &report)?;
    sink.note("lambda_hat", fmt_f64(report.lambda_hat));
    sink.note("r_squared", fmt_f64(report.r_squared));
    sink.note(
        "slope_ci",
        format!(
            "[{}, {}]",
            fmt_f64(report.slope_ci.0),
            fmt_f64(report.slope_ci.1)
        ),
    );
    Ok(())
}

fn boundary_curve(rc: &Resolved, sink: &mut OutputSink) -> Result<()> {
    let gens = rc.generators()?;
    let mu = rc.measure(&gens)?;
    let checkpoints = rc
        .config
        .checkpoints
        .clone()
        .unwrap_or_else(|| vec![10, 20, 40]);
    let n_max = checkpoints.iter().copied().max().unwrap_or(40);
    let out = boundary::boundary_convergence_curve(
        &mu,
        &rc.point_x()?,
        &checkpoints,
        rc.trials,
        rc.seed,
        rc.xi_horizon_for(n_max),
        &rc.xi_params()?,
        rc.fit_window(n_max),
    )?;
    write_curve_csv(sink, "boundary_curve.csv", &out.report)?;
    sink.note("non_concentrated", out.non_concentrated.to_string());
    sink.note("used_trials", out.used_trials.to_string());
    sink.note("lambda_hat", fmt_f64(out.report.lambda_hat));
    Ok(())
}

fn stationary(rc: &Resolved, sink: &mut OutputSink) -> Result<()> {
    let gens = rc.generators()?;
    let mu = rc.measure(&gens)?;
    let bins = rc.config.bins.unwrap_or(32);
    let h = boundary::stationary_histogram(
        &mu,
        rc.xi_horizon_for(60),
        rc.trials,
        bins,
        rc.seed,
        &rc.xi_params()?,
    )?;
    let mut rows = vec!["bin_left,bin_right,count".to_string()];
    for (i, c) in h.counts.iter().enumerate() {
        rows.push(format!("{i}/{bins},{}/{bins},{c}", i + 1));
    }
    sink.write_csv("stationary.csv", &rows)?;
    sink.note("min_count", h.min_count().to_string());
    Ok(())
}

fn visit_fraction(rc: &Resolved, sink: &mut OutputSink) -> Result<()> {
    let gens = rc.generators()?;
    let mu = rc.measure(&gens)?;
    let n = rc.n();
    let rep = boundary::xi_visit_fraction(
        &mu,
        &rc.arc_j()?,
        n,
        rc.trials,
        rc.seed,
        rc.xi_horizon_for(n),
        &rc.xi_params()?,
    )?;
    sink.write_csv(
        "visit_fraction.csv",
        &[
            "n,fraction,fraction_se,nu_bar,nu_bar_se,non_concentrated".to_string(),
            format!(
                "{},{},{},{},{},{}",
                n,
                fmt_f64(rep.fraction),
                fmt_f64(rep.fraction_se),
                fmt_f64(rep.nu_bar),
                fmt_f64(rep.nu_bar_se),
                rep.non_concentrated
            ),
        ],
    )
}

fn rn_check(rc: &Resolved, sink: &mut OutputSink) -> Result<()> {
    let gens = rc.generators()?;
    let mu = rc.measure(&gens)?;
    let a = rc.remark_a()?;
    if !mu.contains(&a) {
        bail!(
            "the remark element is not in the measure support; pass --mix-weight (e.g. 1/8) \
             or a measure file containing it"
        );
    }
    let n = rc.n();
    let j = rc.arc_j()?;
    let rep = boundary::conditional_increment_frequency(
        &mu,
        &a,
        &j,
        n,
        rc.trials,
        rc.seed,
        rc.xi_horizon_for(n),
        &rc.xi_params()?,
    )?;
    let z = if rep.sigma > 0.0 {
        (rep.frequency - rep.mu_a) / rep.sigma
    } else {
        0.0
    };
    sink.write_csv(
        "rn_check.csv",
        &[
            "mu_a,frequency,sigma,z,eligible_steps,hits".to_string(),
            format!(
                "{},{},{},{},{},{}",
                fmt_f64(rep.mu_a),
                fmt_f64(rep.frequency),
                fmt_f64(rep.sigma),
                fmt_f64(z),
                rep.eligible_steps,
                rep.hits
            ),
        ],
    )
}

fn contract_interval(rc: &Resolved, sink: &mut OutputSink) -> Result<()> {
    let gens = rc.generators()?;
    let mu = rc.measure(&gens)?;
    let i = rc.arc_i()?;
    let j = rc.arc_j()?;
    let max_steps = rc.config.max_steps.unwrap_or(10_000);
    let found = boundary::contract_interval_into(&mu, &i, &j, max_steps, rc.trials, rc.seed)?;
    let mut rows = vec!["found,steps_used,trial".to_string()];
    match &found {
        Some(cert) => {
            rows.push(format!("true,{},{}", cert.steps_used, cert.trial));
            sink.write_json("contract_certificate.json", &cert.map)?;
        }
        None => rows.push("false,,".to_string()),
    }
    sink.write_csv("contract_interval.csv", &rows)
}

fn domination_csv_header() -> String {
    "trial,n,Z,W,k_extracted,satisfactory".to_string()
}

fn domination_z(rc: &Resolved, sink: &mut OutputSink) -> Result<()> {
    let gens = rc.generators()?;
    let mu = rc.measure(&gens)?;
    let j = rc.arc_j()?;
    let n = rc.n();
    let s = rc.config.sparsity.unwrap_or(1);
    let horizon = n.div_ceil(s) * s;
    let zs: Vec<u64> = walk::try_batch(&mu, horizon, rc.trials, rc.seed, |_, t| {
        domination::count_z(t, &j, s, n)
    })?;
    let mut rows = vec![domination_csv_header()];
    for (trial, z) in zs.iter().enumerate() {
        rows.push(format!("{trial},{n},{z},,,"));
    }
    sink.write_csv("domination.csv", &rows)?;
    let mean = zs.iter().sum::<u64>() as f64 / zs.len().max(1) as f64;
    sink.note("mean_z", fmt_f64(mean));
    Ok(())
}

fn domination_w(rc: &Resolved, sink: &mut OutputSink) -> Result<()> {
    let gens = rc.generators()?;
    let mu = rc.measure(&gens)?;
    let a = rc.remark_a()?;
    let j = rc.arc_j()?;
    let n = rc.n();
    let xi_horizon = rc.xi_horizon_for(n);
    let params = rc.xi_params()?;
    let ws: Vec<u64> = walk::try_batch(&mu, xi_horizon, rc.trials, rc.seed, |_, t| {
        let xi = boundary::estimate_xi(t, xi_horizon, &params)?;
        domination::count_w(t, &xi.xi_hat, &a, &j, n)
    })?;
    let mut rows = vec![domination_csv_header()];
    for (trial, w) in ws.iter().enumerate() {
        rows.push(format!("{trial},{n},,{w},,"));
    }
    sink.write_csv("domination.csv", &rows)?;
    let mean = ws.iter().sum::<u64>() as f64 / ws.len().max(1) as f64;
    sink.note("mean_w", fmt_f64(mean));
    Ok(())
}

fn good_collections(rc: &Resolved, sink: &mut OutputSink) -> Result<()> {
    let gens = rc.generators()?;
    let mu = rc.measure(&gens)?;
    let a = rc.remark_a()?;
    let j = rc.arc_j()?;
    let n = rc.n();
    let xi_horizon = rc.xi_horizon_for(n);
    let params = rc.xi_params()?;
    let cap = 10usize;
    struct Row {
        w: u64,
        k: usize,
        satisfactory: bool,
    }
    let rows_data: Vec<Row> = walk::try_batch(&mu, xi_horizon, rc.trials, rc.seed, |_, t| {
        let xi = boundary::estimate_xi(t, xi_horizon, &params)?;
        let w = domination::count_w(t, &xi.xi_hat, &a, &j, n)?;
        let q = domination::extract_good_collection(t, &xi.xi_hat, &a, &j, n)?;
        let k = q.distinguished_count();
        let satisfactory = domination::is_satisfactory_capped(&q.truncated(cap, t), &a, cap)?;
        Ok(Row { w, k, satisfactory })
    })?;
    let mut rows = vec![domination_csv_header()];
    for (trial, r) in rows_data.iter().enumerate() {
        rows.push(format!("{trial},{n},,{},{},{}", r.w, r.k, r.satisfactory));
    }
    sink.write_csv("domination.csv", &rows)?;
    let all_ok = rows_data.iter().all(|r| r.satisfactory);
    sink.note("all_satisfactory", all_ok.to_string());
    Ok(())
}

fn entropy_curve(rc: &Resolved, sink: &mut OutputSink) -> Result<()> {
    let gens = rc.generators()?;
    let mu = rc.measure(&gens)?;
    let n_max = rc.config.n.unwrap_or(6) as u32;
    let curve = entropy::entropy_curve(&mu, n_max, entropy::DEFAULT_SUPPORT_CAP)?;
    let mut rows = vec!["n,H,support_size,truncated_flag".to_string()];
    for p in &curve.points {
        rows.push(format!(
            "{},{},{},{}",
            p.n,
            fmt_f64(p.entropy_nats),
            p.support_size,
            curve.truncated
        ));
    }
    sink.write_csv("entropy_curve.csv", &rows)
}

fn cond_entropy(rc: &Resolved, sink: &mut OutputSink) -> Result<()> {
    let gens = rc.generators()?;
    let mu = rc.measure(&gens)?;
    let n = rc.config.n.unwrap_or(6);
    let bins = rc.config.bins.unwrap_or(16);
    let rep = entropy::conditional_entropy_proxy(
        &mu,
        n,
        rc.trials,
        bins,
        rc.xi_horizon_for(n),
        rc.seed,
        &rc.xi_params()?,
        rc.config.bootstrap.unwrap_or(200),
    )?;
    sink.write_csv(
        "cond_entropy.csv",
        &[
            "n,cond_proxy,ci_low,ci_high,bins".to_string(),
            format!(
                "{},{},{},{},{}",
                n,
                fmt_f64(rep.proxy_nats),
                fmt_f64(rep.ci_low),
                fmt_f64(rep.ci_high),
                rep.bins
            ),
        ],
    )?;
    sink.note("undersampled_bins", rep.undersampled_bins.to_string());
    Ok(())
}

fn cocycle_check(rc: &Resolved, sink: &mut OutputSink) -> Result<()> {
    let gens = rc.generators()?;
    let pairs = rc.config.pairs.unwrap_or(1000);
    let len = rc.config.word_len.unwrap_or(8);
    let mut rng = walk::rng_for(rc.seed);
    let mut rows = vec!["pair,ok".to_string()];
    let mut all_ok = true;
    for i in 0..pairs {
        let g = gens.random_element(&mut rng, len);
        let h = gens.random_element(&mut rng, len);
        let ok = cocycle::verify_chain_rule(&g, &h);
        all_ok &= ok;
        rows.push(format!("{i},{ok}"));
    }
    sink.write_csv("cocycle_check.csv", &rows)?;
    sink.note("all_ok", all_ok.to_string());
    Ok(())
}

fn stabilization(rc: &Resolved, sink: &mut OutputSink) -> Result<()> {
    let gens = rc.generators()?;
    let mu = rc.measure(&gens)?;
    let horizon = rc.horizon;
    // watched points: breakpoints of the generator set
    let mut watched: Vec<circlewalk_core::exact::CirclePoint> = Vec::new();
    for m in gens.maps() {
        for b in m.breakpoints() {
            if !watched.contains(b) {
                watched.push(b.clone());
            }
        }
    }
    watched.sort();
    let tracks: Vec<Vec<cocycle::PointTrack>> =
        walk::try_batch(&mu, horizon, rc.trials, rc.seed, |_, t| {
            cocycle::track_configuration(t, &watched, horizon)
        })?;
    let mut rows = vec!["trial,point,last_change,changes,final_value".to_string()];
    for (trial, per_point) in tracks.iter().enumerate() {
        for tr in per_point {
            rows.push(format!(
                "{trial},{},{},{},{}",
                tr.point, tr.last_change, tr.changes, tr.final_value
            ));
        }
    }
    sink.write_csv("stabilization.csv", &rows)
}

fn transience(rc: &Resolved, sink: &mut OutputSink) -> Result<()> {
    let gens = rc.generators()?;
    let mu = rc.measure(&gens)?;
    let x = rc.point_x()?;
    let horizon = rc.horizon;
    let stats = cocycle::orbit_return_stats(&mu, &x, horizon, rc.trials, rc.seed)?;
    let mut rows = vec!["x,returns,last_return".to_string()];
    for (returns, last) in &stats.rows {
        rows.push(format!("{x},{returns},{last}"));
    }
    sink.write_csv("transience.csv", &rows)?;
    sink.note("mean_returns", fmt_f64(stats.mean_returns));
    sink.note("always_returning", stats.always_returning.to_string());
    Ok(())
}

fn harmonic(rc: &Resolved, sink: &mut OutputSink) -> Result<()> {
    let gens = rc.generators()?;
    let mu = rc.measure(&gens)?;
    let word = rc.config.word.clone().unwrap_or_default();
    let g = if word.is_empty() {
        PiecewiseAffineCircleMap::identity()
    } else {
        gens.compose_word(&word)?
    };
    let y = rc.point_y()?;
    let k = rc.config.k_target.unwrap_or(0);
    let est = cocycle::estimate_harmonic(&mu, &g, &y, k, rc.horizon, rc.trials, rc.seed, None)?;
    sink.write_csv(
        "harmonic.csv",
        &[
            "word,k,probability,std_error,trials,unstabilized".to_string(),
            format!(
                "{},{},{},{},{},{}",
                if word.is_empty() {
                    "e".to_string()
                } else {
                    word.join(".")
                },
                k,
                fmt_f64(est.probability),
                fmt_f64(est.std_error),
                est.trials,
                est.unstabilized
            ),
        ],
    )
}

fn theorem_b(rc: &Resolved, sink: &mut OutputSink) -> Result<()> {
    let gens = rc.generators()?;
    let mu = rc.measure(&gens)?;
    let y = rc.point_y()?;
    let k = rc.config.k_target.unwrap_or(0);
    let n_list = rc.config.n_list.clone().unwrap_or_else(|| vec![4, 6, 8]);
    let report = cocycle::theorem_b_witness(
        &mu,
        &y,
        k,
        &n_list,
        rc.trials,
        rc.horizon,
        rc.xi_horizon_for(rc.horizon / 4),
        rc.seed,
        &rc.xi_params()?,
    )?;
    if !report.calibration_ok {
        sink.note(
            "calibration_warning",
            format!("f_e = {}", fmt_f64(report.f_e)),
        );
    }
    let mut rows = vec!["n,f_e,f_an,nu_In,margin,verdict".to_string()];
    for r in &report.rows {
        rows.push(format!(
            "{},{},{},{},{},{}",
            r.n,
            fmt_f64(r.f_e),
            fmt_f64(r.f_an),
            fmt_f64(r.nu_in),
            fmt_f64(r.margin),
            r.verdict
        ));
    }
    sink.write_csv("theorem_b.csv", &rows)?;
    sink.note("verdict", report.verdict.to_string());
    Ok(())
}

fn verify_relations(rc: &Resolved, sink: &mut OutputSink) -> Result<()> {
    let gens = rc.generators()?;
    let mut rows = vec!["relation,word,ok".to_string()];
    let mut all_ok = true;
    for (i, rel) in gens.relations().iter().enumerate() {
        let ok = gens.verify_relation(rel)?;
        all_ok &= ok;
        rows.push(format!("{i},{},{ok}", rel.join(".")));
    }
    sink.write_csv("relations.csv", &rows)?;
    sink.note("all_ok", all_ok.to_string());
    if !all_ok {
        bail!("some relations failed to verify");
    }
    Ok(())
}
