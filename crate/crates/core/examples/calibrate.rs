//! One-time calibration run behind the committed acceptance floors.
//!
//! Prints, for the bundled generator set and the standard acceptance
//! measures, the observed values of every statistic that the acceptance
//! suite compares against a committed constant: Z/n and W/n floors, the
//! sparsity search, the distribution of stabilized configuration values at
//! y = 1/2 (for choosing the harmonic target k), the contraction fit, the
//! stabilization fraction and the witness report. Floors committed in the
//! acceptance suite are half of the observed means from this run.
//!
//! Usage: cargo run --release -p circlewalk-core --example calibrate [quick]

use circlewalk_core::boundary::{
    boundary_convergence_curve, contraction_curve, estimate_xi, stationary_samples, XiParams,
};
use circlewalk_core::cocycle::{
    harmonic_trial_values, orbit_return_stats, theorem_b_witness, track_configuration,
};
use circlewalk_core::domination::{count_w, count_z, dominates_base_for_all};
use circlewalk_core::entropy::{conditional_entropy_proxy, entropy_curve, DEFAULT_SUPPORT_CAP};
use circlewalk_core::exact::{CirclePoint, Rational};
use circlewalk_core::measure::StepDistribution;
use circlewalk_core::thompson::{remark_element, GeneratorSet};
use circlewalk_core::walk::{try_batch, Trajectory};

fn main() {
    let quick = std::env::args().any(|a| a == "quick");
    let scale = if quick { 10 } else { 1 };

    let gens = GeneratorSet::bundled().unwrap();
    let uniform = StepDistribution::uniform_on(&gens).unwrap();
    let lazy = uniform.lazify();
    let y = CirclePoint::from_ratio(1, 2).unwrap();
    let a4 = remark_element(&y, 4).unwrap();
    let j4 = a4.smallest_interval_containing_support().unwrap();
    let walk_mu = lazy
        .mix(
            &StepDistribution::dirac(a4.clone()),
            &Rational::new(1, 8).unwrap(),
        )
        .unwrap();
    let params = XiParams::default();

    println!("== measures ==");
    println!("lazy support {}", lazy.support_size());
    println!(
        "walk–mu support {}, mu(a4) = {}",
        walk_mu.support_size(),
        walk_mu.weight_of(&a4)
    );
    println!("J4 = {} (length {})", j4, j4.length());

    // criterion 4: contraction fit
    let rep = contraction_curve(
        &lazy,
        &CirclePoint::zero(),
        &y,
        60,
        2000 / scale,
        0xC004,
        (10, 60),
    )
    .unwrap();
    println!("\n== contraction (criterion 4) ==");
    println!(
        "lambda_hat {:.4}  r2 {:.4}  slope_ci ({:.5}, {:.5})  zero_means {}",
        rep.lambda_hat, rep.r_squared, rep.slope_ci.0, rep.slope_ci.1, rep.zero_mean_count
    );

    // criterion 5: boundary convergence
    let bc = boundary_convergence_curve(
        &lazy,
        &CirclePoint::zero(),
        &[10, 20, 40],
        2000 / scale,
        0xC005,
        240,
        &params,
        (10, 40),
    )
    .unwrap();
    println!("\n== boundary convergence (criterion 5) ==");
    println!(
        "non_concentrated {}/{} used {}",
        bc.non_concentrated,
        2000 / scale,
        bc.used_trials
    );
    for (n, vals) in &bc.checkpoint_values {
        let m: f64 = vals.iter().sum::<f64>() / vals.len() as f64;
        println!("  n={n}: mean {m:.6}");
    }

    // criterion 6: stationary histogram
    let samples = stationary_samples(&lazy, 240, 4000 / scale, 0xC006, &params).unwrap();
    let hist = circlewalk_core::boundary::EmpiricalMeasure::from_points(
        32,
        samples.iter().map(|s| &s.xi_hat),
    )
    .unwrap();
    println!("\n== stationary (criterion 6) ==");
    println!("min bin count {} of {}", hist.min_count(), hist.total);

    // criterion 9: Z floors and sparsity search
    println!("\n== domination Z (criterion 9) ==");
    for n in [30usize, 60] {
        let zs: Vec<u64> = try_batch(&walk_mu, n, 2000 / scale, 0xC009, |_, t| {
            count_z(t, &j4, 1, n)
        })
        .unwrap();
        let mean = zs.iter().sum::<u64>() as f64 / zs.len() as f64;
        println!("  E[Z]/n at n={n}: {:.4}", mean / n as f64);
    }
    for s in 1..=8usize {
        let hits: Vec<bool> = try_batch(&walk_mu, s * 20, 1200 / scale, 0xC095, |_, t| {
            dominates_base_for_all(t, &j4, s, 20)
        })
        .unwrap();
        let p = hits.iter().filter(|h| **h).count() as f64 / hits.len() as f64;
        println!(
            "  P[dominates J for all j<=20] s={s}: {:.4} (1/24 = {:.4})",
            p,
            1.0 / 24.0
        );
    }

    // criterion 10: W floor
    println!("\n== W counter (criterion 10) ==");
    let n = 60usize;
    let ws: Vec<u64> = try_batch(&walk_mu, 4 * n, 2000 / scale, 0xC010, |_, t| {
        let xi = estimate_xi(t, 4 * n, &params)?;
        count_w(t, &xi.xi_hat, &a4, &j4, n)
    })
    .unwrap();
    let mean_w = ws.iter().sum::<u64>() as f64 / ws.len() as f64;
    println!("  E[W]/n at n=60: {:.4}", mean_w / n as f64);

    // criterion 12: entropy growth
    println!("\n== entropy (criterion 12) ==");
    for (label, mu) in [("uniform", &uniform), ("lazy", &lazy)] {
        let curve = entropy_curve(mu, 6, DEFAULT_SUPPORT_CAP).unwrap();
        let incs = curve.increments();
        print!("  {label}: H =");
        for p in &curve.points {
            print!(" {:.4}({})", p.entropy_nats, p.support_size);
        }
        print!("  increments:");
        for (nn, d) in &incs {
            print!(" d{nn}={d:.4}");
        }
        println!();
    }
    for nn in [3usize, 6] {
        let rep = conditional_entropy_proxy(&lazy, nn, 4000 / scale, 16, 96, 0xC012, &params, 200)
            .unwrap();
        println!(
            "  cond proxy n={nn}: {:.4} ci ({:.4}, {:.4}) undersampled {}",
            rep.proxy_nats, rep.ci_low, rep.ci_high, rep.undersampled_bins
        );
    }

    // criterion 13: stabilization
    println!("\n== stabilization (criterion 13) ==");
    let mut watched: Vec<CirclePoint> = Vec::new();
    for m in gens.maps() {
        for b in m.breakpoints() {
            if !watched.contains(b) {
                watched.push(b.clone());
            }
        }
    }
    watched.sort();
    let oks: Vec<bool> = try_batch(&uniform, 300, 1000 / scale, 0xC013, |_, t| {
        let tracks = track_configuration(t, &watched, 300)?;
        Ok(tracks.iter().all(|tr| tr.last_change <= 200))
    })
    .unwrap();
    let frac = oks.iter().filter(|o| **o).count() as f64 / oks.len() as f64;
    println!("  stabilized-by-200 fraction (uniform): {frac:.4}");
    let oks: Vec<bool> = try_batch(&lazy, 300, 1000 / scale, 0xC013, |_, t| {
        let tracks = track_configuration(t, &watched, 300)?;
        Ok(tracks.iter().all(|tr| tr.last_change <= 200))
    })
    .unwrap();
    let frac = oks.iter().filter(|o| **o).count() as f64 / oks.len() as f64;
    println!("  stabilized-by-200 fraction (lazy): {frac:.4}");

    // criterion 14: transience
    println!("\n== transience (criterion 14) ==");
    for (label, mu) in [("uniform", &uniform), ("lazy", &lazy)] {
        let stats = orbit_return_stats(mu, &y, 400, 1000 / scale, 0xC014).unwrap();
        let below: usize = stats.rows.iter().filter(|(_, last)| *last < 200).count();
        println!(
            "  {label}: mean returns {:.2}, last-return below 200: {:.4}",
            stats.mean_returns,
            below as f64 / stats.rows.len() as f64
        );
    }

    // criteria 15/16: harmonic target calibration and witness
    println!("\n== harmonic target (criteria 15/16) ==");
    let vals = harmonic_trial_values(
        &lazy,
        &circlewalk_core::map::PiecewiseAffineCircleMap::identity(),
        &y,
        300,
        2000 / scale,
        0xC016,
    )
    .unwrap();
    let mut counts: std::collections::BTreeMap<String, usize> = Default::default();
    let mut unstab = 0usize;
    for v in &vals {
        *counts.entry(v.value.to_string()).or_default() += 1;
        if v.last_change > 200 {
            unstab += 1;
        }
    }
    println!("  unstabilized-after-200: {unstab}/{}", vals.len());
    let mut top: Vec<(usize, String)> = counts.into_iter().map(|(k, c)| (c, k)).collect();
    top.sort_by(|x, y| y.cmp(x));
    for (c, k) in top.iter().take(8) {
        println!("  value {k}: {:.4}", *c as f64 / vals.len() as f64);
    }

    let witness = theorem_b_witness(
        &lazy,
        &y,
        0,
        &[4, 6, 8],
        2000 / scale,
        300,
        240,
        0xC016,
        &params,
    )
    .unwrap();
    println!(
        "  witness f_e {:.4} calibration_ok {}",
        witness.f_e, witness.calibration_ok
    );
    for r in &witness.rows {
        println!(
            "  n={} f_an {:.4} nu_In {:.4} margin {:.4} sigma {:.4} verdict {}",
            r.n, r.f_an, r.nu_in, r.margin, r.sigma, r.verdict
        );
    }

    // smoke: a trajectory CSV export works
    let t = Trajectory::sample(&lazy, 3, 1);
    let mut buf = Vec::new();
    t.write_csv(&mut buf, 0, Some(&gens)).unwrap();
    println!("\ncalibration complete");
}
