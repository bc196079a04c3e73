//! Experiment dispatch.

use std::path::{Path, PathBuf};

use serde_json::{json, Value};
use specshift_core::estimators::{
    averaged_ssf, birman_solomyak_residual, dos_estimate, idos_curve, kirsch_series, least_squares,
    reverse_wegner_ratio, ssf_scaling_exponent, wegner_ratio, Ensemble, SsfReport, WegnerReport,
};
use specshift_core::grid::{covering_bounds, BoundarySpec, Condition, Domain};
use specshift_core::localization::{
    combes_thomas_profile, fractional_moment_probe, lattice_green_decay_rate, DecayFit,
};
use specshift_core::spectra::{dense_eigenvalues, ssf, DEFAULT_DENSE_THRESHOLD};
use std::sync::Arc;

use crate::config::{ExperimentConfig, ExperimentKind};
use crate::error::RunError;
use crate::output::{write_outputs, Cell, Check, Outcome, Table};

/// Relative spread allowed between per-volume maxima of the Wegner ratio.
pub const WEGNER_VOLUME_SPREAD: f64 = 0.25;
/// Allowed distance of the fitted surface exponent from `d - 1`.
pub const SCALING_EXPONENT_SLACK: f64 = 0.4;
/// Number of standard errors used by the Monte Carlo checks.
pub const SIGMAS: f64 = 3.0;

fn domain(cfg: &ExperimentConfig, side: f64) -> Result<Arc<Domain>, RunError> {
    let center = cfg.puncture_center();
    let punct = cfg.model.puncture.as_ref().map(|p| (p.side, &center[..]));
    Ok(cfg.model_config().domain(side, punct)?)
}

fn fit_json(fit: &DecayFit) -> Value {
    serde_json::to_value(fit).expect("fit serializes")
}

fn wegner_table(reports: &[WegnerReport]) -> Table {
    let mut t = Table::new(&["E1", "E2", "L", "ratio", "stderr", "n_samples"]);
    for r in reports {
        t.push(vec![
            r.e1.into(),
            r.e2.into(),
            r.side.into(),
            r.ratio.into(),
            r.estimate.stderr.into(),
            r.estimate.n_samples.into(),
        ]);
    }
    t
}

fn ssf_table(points: &[SsfReport]) -> Table {
    let mut t = Table::new(&["L", "l", "E", "mean_xi", "stderr", "rank_bound", "n_samples"]);
    for p in points {
        t.push(vec![
            p.side.into(),
            p.l.into(),
            p.energy.into(),
            p.estimate.mean.into(),
            p.estimate.stderr.into(),
            p.rank_bound.into(),
            p.estimate.n_samples.into(),
        ]);
    }
    t
}

/// Relative spread `(max - min) / min` of positive numbers.
pub fn relative_spread(values: &[f64]) -> f64 {
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if lo > 0.0 {
        (hi - lo) / lo
    } else if hi == lo {
        0.0
    } else {
        f64::INFINITY
    }
}

/// Pairwise agreement of estimates within `SIGMAS` combined standard errors.
pub fn all_within_sigmas(estimates: &[(f64, f64)]) -> bool {
    estimates.iter().enumerate().all(|(i, a)| {
        estimates[i + 1..]
            .iter()
            .all(|b| (a.0 - b.0).abs() <= SIGMAS * (a.1 * a.1 + b.1 * b.1).sqrt())
    })
}

/// Classifies a series as constant, nondecreasing, nonincreasing or mixed.
pub fn trend(values: &[i64]) -> &'static str {
    let up = values.windows(2).all(|w| w[1] >= w[0]);
    let down = values.windows(2).all(|w| w[1] <= w[0]);
    match (up, down) {
        (true, true) => "constant",
        (true, false) => "nondecreasing",
        (false, true) => "nonincreasing",
        _ => "mixed",
    }
}

fn assemble_check(cfg: &ExperimentConfig) -> Result<Outcome, RunError> {
    let d = domain(cfg, cfg.model.side)?;
    let punctured = d.puncture().is_some();
    let (bd, bn) = if punctured {
        (BoundarySpec::punctured(Condition::Dirichlet), BoundarySpec::punctured(Condition::Neumann))
    } else {
        (BoundarySpec::DIRICHLET, BoundarySpec::NEUMANN)
    };
    let ens = Ensemble::new(&cfg.model_config(), d.clone(), &[bd, bn])?;
    let hs = ens.hamiltonians(0)?;
    let (hd, hn) = (&hs[0], &hs[1]);
    let mut table = Table::new(&["check", "passed", "value"]);
    let mut checks = Vec::new();
    let mut record = |name: &str, passed: bool, value: f64, checks: &mut Vec<Check>| {
        table.push(vec![name.into(), Cell::Int(passed as i64), value.into()]);
        checks.push(Check::new(name, passed, format!("{value}")));
    };

    let asym = hd.matrix().max_asymmetry().max(hn.matrix().max_asymmetry());
    record("symmetric", asym == 0.0, asym, &mut checks);

    let energies: Vec<f64> = (0..=8)
        .map(|k| hn.floor() + k as f64 / 8.0 * (hd.ceiling() - hn.floor()))
        .collect();
    let mut min_gap = i64::MAX;
    let rank = d.inner_boundary_sites().len() as i64;
    let mut max_xi = 0i64;
    for &e in &energies {
        let r = ssf(e, hn, hd)?;
        min_gap = min_gap.min(r.xi);
        max_xi = max_xi.max(r.xi);
    }
    record("neumann_count_dominates", min_gap >= 0, min_gap as f64, &mut checks);
    if punctured {
        record("ssf_rank_bound", max_xi <= rank, max_xi as f64, &mut checks);
    }

    let (c_minus, c_plus) = covering_bounds(&cfg.model.profile, &d)?;
    record("covering", c_minus > 0.0, c_minus, &mut checks);

    if d.len() <= DEFAULT_DENSE_THRESHOLD {
        let mut worst = 0.0f64;
        for h in [hd, hn] {
            for l in dense_eigenvalues(h)? {
                worst = worst.max(h.floor() - l).max(l - h.ceiling());
            }
        }
        record("gershgorin_encloses_spectrum", worst <= 1e-9 * hd.scale(), worst, &mut checks);
    }

    let summary = json!({
        "sites": d.len(),
        "nnz": hd.matrix().nnz(),
        "half_bandwidth": hd.matrix().half_bandwidth(),
        "floor": hd.floor(),
        "ceiling": hd.ceiling(),
        "covering_min": c_minus,
        "covering_max": c_plus,
        "inner_boundary_sites": rank,
        "boundary_distance": d.boundary_distance(),
    });
    Ok(Outcome {
        table,
        summary,
        checks,
        warnings: Vec::new(),
    })
}

fn idos(cfg: &ExperimentConfig) -> Result<Outcome, RunError> {
    let e = &cfg.experiment;
    let side = cfg.model.side;
    let curve = idos_curve(&cfg.model_config(), &e.energies, side, e.samples)?;
    let mut table = Table::new(&["E", "mean", "stderr", "n_samples"]);
    for (en, est) in e.energies.iter().zip(&curve) {
        table.push(vec![(*en).into(), est.mean.into(), est.stderr.into(), est.n_samples.into()]);
    }
    let mut order: Vec<usize> = (0..curve.len()).collect();
    order.sort_by(|&a, &b| e.energies[a].total_cmp(&e.energies[b]));
    let monotone = order.windows(2).all(|w| curve[w[1]].mean >= curve[w[0]].mean);
    let max_mean = curve.iter().map(|c| c.mean).fold(f64::NEG_INFINITY, f64::max);
    Ok(Outcome {
        table,
        summary: json!({ "L": side, "volume": side.powi(cfg.model.dim as i32), "max_mean": max_mean }),
        checks: vec![Check::new("nondecreasing_in_energy", monotone, "mean IDOS ordered by energy")],
        warnings: Vec::new(),
    })
}

fn dos(cfg: &ExperimentConfig) -> Result<Outcome, RunError> {
    let e = &cfg.experiment;
    let side = cfg.model.side;
    let mut table = Table::new(&["E", "mean", "stderr", "n_samples"]);
    let mut max_mean = f64::NEG_INFINITY;
    for &en in &e.energies {
        let est = dos_estimate(&cfg.model_config(), en, e.eps, side, e.samples)?;
        max_mean = max_mean.max(est.mean);
        table.push(vec![en.into(), est.mean.into(), est.stderr.into(), est.n_samples.into()]);
    }
    Ok(Outcome {
        table,
        summary: json!({ "L": side, "eps": e.eps, "max_mean": max_mean }),
        checks: Vec::new(),
        warnings: Vec::new(),
    })
}

fn per_side_max(reports: &[WegnerReport], sides: &[f64]) -> Vec<f64> {
    sides
        .iter()
        .map(|&s| {
            reports
                .iter()
                .filter(|r| r.side == s)
                .map(|r| r.ratio)
                .fold(f64::NEG_INFINITY, f64::max)
        })
        .collect()
}

fn wegner(cfg: &ExperimentConfig) -> Result<Outcome, RunError> {
    let e = &cfg.experiment;
    let sides = cfg.sides();
    let reports = wegner_ratio(&cfg.model_config(), &e.intervals, &sides, e.samples)?;
    let maxima = per_side_max(&reports, &sides);
    let max_ratio = maxima.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let spread = relative_spread(&maxima);
    let mut checks = vec![Check::new(
        "nonnegative",
        reports.iter().all(|r| r.ratio >= 0.0),
        "every ratio is nonnegative",
    )];
    if sides.len() > 1 {
        checks.push(Check::new(
            "volume_stability",
            spread <= WEGNER_VOLUME_SPREAD,
            format!("relative spread of per-volume maxima {spread} (limit {WEGNER_VOLUME_SPREAD})"),
        ));
    }
    Ok(Outcome {
        table: wegner_table(&reports),
        summary: json!({
            "max_ratio": max_ratio,
            "per_side_max": sides.iter().zip(&maxima).map(|(s, m)| json!({"L": s, "max_ratio": m})).collect::<Vec<_>>(),
            "relative_spread": if spread.is_finite() { json!(spread) } else { Value::Null },
            "volume_convention": "L^d; multiply by h^d for a per-site normalization",
            "empirical_localization": cfg.model.dim == 2,
        }),
        checks,
        warnings: Vec::new(),
    })
}

fn reverse_wegner(cfg: &ExperimentConfig) -> Result<Outcome, RunError> {
    let e = &cfg.experiment;
    let sides = cfg.sides();
    let reports = reverse_wegner_ratio(&cfg.model_config(), &e.intervals, &sides, e.samples)?;
    let min = reports
        .iter()
        .min_by(|a, b| a.ratio.total_cmp(&b.ratio))
        .expect("at least one interval");
    let margin = reports
        .iter()
        .map(|r| r.ratio - SIGMAS * r.estimate.stderr)
        .fold(f64::INFINITY, f64::min);
    let mut warnings = Vec::new();
    if cfg.model.dim == 2 {
        warnings.push("two-dimensional localization is an empirical working assumption".to_string());
    }
    Ok(Outcome {
        table: wegner_table(&reports),
        summary: json!({
            "min_ratio": min.ratio,
            "min_ratio_stderr": min.estimate.stderr,
            "min_margin": margin,
            "volume_convention": "L^d; multiply by h^d for a per-site normalization",
            "empirical_localization": cfg.model.dim == 2,
        }),
        checks: vec![Check::new(
            "significantly_positive",
            margin > 0.0,
            format!("min over intervals of ratio - {SIGMAS} stderr = {margin}"),
        )],
        warnings,
    })
}

fn averaged(cfg: &ExperimentConfig) -> Result<Outcome, RunError> {
    let e = &cfg.experiment;
    let p = cfg.model.puncture.as_ref().expect("validated");
    let center = cfg.puncture_center();
    let sides = cfg.sides();
    let mut points = Vec::new();
    for &side in &sides {
        for &en in &e.energies {
            points.push(averaged_ssf(&cfg.model_config(), side, p.side, &center, en, e.samples)?);
        }
    }
    let mut warnings: Vec<String> = Vec::new();
    for pt in &points {
        for w in &pt.warnings {
            if !warnings.contains(w) {
                warnings.push(w.clone());
            }
        }
    }
    let bounded = points
        .iter()
        .all(|p| p.estimate.mean >= 0.0 && p.estimate.mean <= p.rank_bound as f64);
    let mut checks = vec![Check::new("rank_bound", bounded, "0 <= mean xi <= inner-boundary sites")];
    if sides.len() > 1 {
        let stable = e.energies.iter().all(|&en| {
            let est: Vec<(f64, f64)> = points
                .iter()
                .filter(|p| p.energy == en)
                .map(|p| (p.estimate.mean, p.estimate.stderr))
                .collect();
            all_within_sigmas(&est)
        });
        checks.push(Check::new(
            "volume_stability",
            stable,
            format!("means agree across L within {SIGMAS} combined stderr"),
        ));
    }
    let max_mean = points.iter().map(|p| p.estimate.mean).fold(f64::NEG_INFINITY, f64::max);
    Ok(Outcome {
        table: ssf_table(&points),
        summary: json!({ "l": p.side, "max_mean_xi": max_mean, "points": points.len() }),
        checks,
        warnings,
    })
}

fn scaling(cfg: &ExperimentConfig) -> Result<Outcome, RunError> {
    let e = &cfg.experiment;
    let energy = e.energy.expect("validated");
    let rule = e.side_rule;
    let report = ssf_scaling_exponent(&cfg.model_config(), &e.l_values, |l| rule.apply(l), energy, e.samples)?;
    let target = report.target;
    let ok = (report.alpha - target).abs() <= SCALING_EXPONENT_SLACK;
    let warnings = report.points.iter().flat_map(|p| p.warnings.clone()).collect();
    Ok(Outcome {
        table: ssf_table(&report.points),
        summary: json!({
            "alpha": report.alpha,
            "alpha_stderr": report.alpha_stderr,
            "prefactor": report.prefactor,
            "r_squared": report.r_squared,
            "target": target,
            "fitted_l": report.fitted_l,
            "side_rule": rule,
        }),
        checks: vec![Check::new(
            "exponent_near_target",
            ok,
            format!("alpha = {} vs target {target} (slack {SCALING_EXPONENT_SLACK})", report.alpha),
        )],
        warnings,
    })
}

fn kirsch(cfg: &ExperimentConfig) -> Result<Outcome, RunError> {
    let l = cfg.model.puncture.as_ref().expect("validated").side;
    let energy = cfg.experiment.energy.expect("validated");
    let sides = cfg.sides();
    let series = kirsch_series(l, energy, &sides, cfg.model.spacing, cfg.model.dim)?;
    let mut table = Table::new(&["L", "xi"]);
    for &(side, xi) in &series {
        table.push(vec![side.into(), xi.into()]);
    }
    let values: Vec<i64> = series.iter().map(|s| s.1).collect();
    let max = *values.iter().max().expect("nonempty");
    let argmax = series.iter().find(|s| s.1 == max).map(|s| s.0).expect("nonempty");
    let smallest = series.iter().map(|s| s.0).fold(f64::INFINITY, f64::min);
    let first = series.iter().find(|s| s.0 == smallest).map(|s| s.1).expect("nonempty");
    let mut rank_ok = true;
    for &(side, xi) in &series {
        let d = Domain::new(2, side, cfg.model.spacing, Some((l, &[0.0, 0.0])))?;
        rank_ok &= xi >= 0 && xi as usize <= d.inner_boundary_sites().len();
    }
    Ok(Outcome {
        table,
        summary: json!({
            "l": l,
            "energy": energy,
            "spacing": cfg.model.spacing,
            "trend": trend(&values),
            "max_xi": max,
            "argmax_L": argmax,
            "xi_at_smallest_L": first,
            "max_beyond_smallest_L": argmax > smallest,
            "max_at_least_double": max >= 2 * first && first > 0,
        }),
        checks: vec![Check::new("rank_bound", rank_ok, "0 <= xi <= inner-boundary sites")],
        warnings: Vec::new(),
    })
}

fn localization(cfg: &ExperimentConfig) -> Result<Outcome, RunError> {
    let e = &cfg.experiment;
    let side = cfg.model.side;
    let x0 = cfg.probe_origin(side);
    let energy = e.energy.expect("validated");
    let probe = fractional_moment_probe(&cfg.model_config(), side, energy, e.eta, e.s, &x0, &e.distances, e.samples)?;
    let mut table = Table::new(&["distance", "mean", "stderr"]);
    for (d, est) in probe.distances.iter().zip(&probe.estimates) {
        table.push(vec![(*d).into(), est.mean.into(), est.stderr.into()]);
    }
    let fit = probe.fit();
    let decays = matches!(&fit, Ok(f) if f.rate > 0.0);
    Ok(Outcome {
        table,
        summary: json!({
            "energy": energy,
            "eta": e.eta,
            "s": e.s,
            "x0": x0,
            "fit": fit.as_ref().map(fit_json).unwrap_or(Value::Null),
            "fit_error": fit.as_ref().err().map(|err| err.to_string()),
            "bound_violations": probe.bound_violations,
            "max_raw_norm": probe.max_raw_norm,
            "heuristic": probe.heuristic,
        }),
        checks: vec![
            Check::new(
                "trivial_bound",
                probe.bound_violations == 0,
                format!("{} block norms above 1/|eta|", probe.bound_violations),
            ),
            Check::new("decay", decays, "fitted rate is positive"),
        ],
        warnings: Vec::new(),
    })
}

fn combes_thomas(cfg: &ExperimentConfig) -> Result<Outcome, RunError> {
    let e = &cfg.experiment;
    let d = domain(cfg, cfg.model.side)?;
    let bc = if d.puncture().is_some() {
        BoundarySpec::punctured(Condition::Dirichlet)
    } else {
        BoundarySpec::DIRICHLET
    };
    let h = Ensemble::new(&cfg.model_config(), d.clone(), &[bc])?.hamiltonian(0)?;
    let energy = e.energy.unwrap_or(h.floor() - e.depth);
    let x0 = cfg.probe_origin(cfg.model.side);
    let profile = combes_thomas_profile(&h, energy, &x0, &e.distances)?;
    let mut table = Table::new(&["distance", "mean", "stderr"]);
    for &(dist, v) in &profile.points {
        table.push(vec![dist.into(), v.into(), 0.0.into()]);
    }
    let free_1d = cfg.model.dim == 1 && (cfg.model.lambda == 0.0) && cfg.model.background.is_zero();
    let closed = free_1d.then(|| lattice_green_decay_rate(cfg.model.spacing, h.floor() - energy));
    let fit = profile.fit;
    Ok(Outcome {
        table,
        summary: json!({
            "energy": energy,
            "floor": h.floor(),
            "x0": x0,
            "fit": fit_json(&fit),
            "closed_form_rate": closed,
        }),
        checks: vec![Check::new(
            "exponential_decay",
            fit.rate > 0.0 && fit.r_squared >= 0.95,
            format!("rate {} with R^2 {}", fit.rate, fit.r_squared),
        )],
        warnings: Vec::new(),
    })
}

fn birman_solomyak(cfg: &ExperimentConfig) -> Result<Outcome, RunError> {
    let e = &cfg.experiment;
    let d = domain(cfg, cfg.model.side)?;
    let ens = Ensemble::new(&cfg.model_config(), d, &[BoundarySpec::DIRICHLET])?;
    let h = ens.hamiltonian(0)?;
    let u = ens.random_potential(1);
    let energy = e.energy.expect("validated");
    let mut table = Table::new(&["quad_order", "lhs", "rhs", "residual"]);
    let mut residuals = Vec::new();
    for &q in &e.quad_orders {
        let r = birman_solomyak_residual(&h, &u, energy, e.eps, e.delta, q)?;
        residuals.push(r.residual);
        table.push(vec![q.into(), r.lhs.into(), r.rhs.into(), r.residual.into()]);
    }
    let first = residuals[0];
    let last = *residuals.last().expect("nonempty");
    let mut checks = vec![Check::new(
        "refinement_does_not_increase",
        last <= first,
        format!("residual {first} at the first order, {last} at the last"),
    )];
    if let Some(tol) = e.tolerance {
        checks.push(Check::new("tolerance", last <= tol, format!("residual {last} vs tolerance {tol}")));
    }
    Ok(Outcome {
        table,
        summary: json!({
            "energy": energy,
            "eps": e.eps,
            "delta": e.delta,
            "dimension": h.dim(),
            "min_residual": residuals.iter().copied().fold(f64::INFINITY, f64::min),
            "switch": "cubic smoothstep",
        }),
        checks,
        warnings: Vec::new(),
    })
}

/// Runs the computation for a validated config on the current thread pool.
pub fn execute(cfg: &ExperimentConfig) -> Result<Outcome, RunError> {
    use ExperimentKind as K;
    match cfg.kind {
        K::AssembleCheck => assemble_check(cfg),
        K::Idos => idos(cfg),
        K::Dos => dos(cfg),
        K::Wegner => wegner(cfg),
        K::ReverseWegner => reverse_wegner(cfg),
        K::AveragedSsf => averaged(cfg),
        K::SsfScaling => scaling(cfg),
        K::Kirsch => kirsch(cfg),
        K::Localization => localization(cfg),
        K::CombesThomas => combes_thomas(cfg),
        K::BirmanSolomyak => birman_solomyak(cfg),
    }
}

/// Output directory when neither the CLI nor the config names one.
pub fn default_output(kind: ExperimentKind) -> PathBuf {
    PathBuf::from("specshift-out").join(kind.name())
}

/// Runs on a dedicated pool of `cfg.threads` workers (all cores if unset)
/// and writes results.csv, summary.json and config.resolved.json into `dir`.
pub fn run_experiment(cfg: &ExperimentConfig, warnings: Vec<String>, dir: &Path) -> Result<Outcome, RunError> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(t) = cfg.threads {
        builder = builder.num_threads(t);
    }
    let pool = builder
        .build()
        .map_err(|e| RunError::Io(std::io::Error::other(e.to_string())))?;
    let mut outcome = pool.install(|| execute(cfg))?;
    let mut all = warnings;
    for w in outcome.warnings.drain(..) {
        if !all.contains(&w) {
            all.push(w);
        }
    }
    outcome.warnings = all;
    write_outputs(dir, cfg, &outcome, pool.current_num_threads())?;
    Ok(outcome)
}

/// Least-squares exponent of `log mean` against `log l`, recomputed from
/// averaged-SSF rows `(l, mean)`.
pub fn exponent_from_rows(rows: &[(f64, f64)]) -> Option<f64> {
    let pos: Vec<&(f64, f64)> = rows.iter().filter(|r| r.1 > 0.0).collect();
    let x: Vec<f64> = pos.iter().map(|r| r.0.ln()).collect();
    let y: Vec<f64> = pos.iter().map(|r| r.1.ln()).collect();
    least_squares(&x, &y).ok().map(|f| f.slope)
}
