use std::f64::consts::PI;
use std::fs::File;
use std::io::BufWriter;
use std::path::PathBuf;

use diracwalk::dynamics::{
    default_start_state, default_time_grid, localized_state_snapshot, optimal_start_states, refine_peak,
    run_communication_from, run_search_tracked, sheet_start_states, single_bond_start, tracked_sites, Parity,
    SearchResult, StateVector,
};
use diracwalk::lattice::{Lattice, Sublattice};
use diracwalk::operators::Perturbation;
use diracwalk::reduced::{reduced_communication, reduced_extra_site, reduced_three_bond, ReducedModel};
use diracwalk::spectral::{eigendecompose, gamma_sweep, gap_scaling_fit_with, linspace};
use diracwalk::svg::{plot, Series};
use diracwalk::theory::{
    e_plus_estimate, i2_log_bounds, i_sum, overlap_start_perturbed, solve_perturbed_energy, UnperturbedSpectrum,
};
use diracwalk::operators::search_hamiltonian;
use diracwalk::dynamics::optimal_start_state;
use serde_json::{json, Value};

use crate::config::{ExperimentConfig, StartConfig};
use crate::{CliError, Ctx};

fn path(ctx: &Ctx, name: &str) -> PathBuf {
    ctx.out.join(name)
}

fn create(ctx: &Ctx, name: &str) -> Result<BufWriter<File>, CliError> {
    Ok(BufWriter::new(File::create(path(ctx, name))?))
}

fn write_json(ctx: &Ctx, name: &str, v: &Value) -> Result<(), CliError> {
    let mut s = serde_json::to_string_pretty(v).expect("json values serialize");
    s.push('\n');
    std::fs::write(path(ctx, name), s)?;
    println!("wrote {}", path(ctx, name).display());
    Ok(())
}

fn write_svg(ctx: &Ctx, name: &str, svg: String) -> Result<(), CliError> {
    std::fs::write(path(ctx, name), svg)?;
    println!("wrote {}", path(ctx, name).display());
    Ok(())
}

fn echo(cfg: &ExperimentConfig) -> Value {
    serde_json::to_value(cfg).expect("config serializes")
}

pub fn lattice(cfg: &ExperimentConfig, ctx: &Ctx) -> Result<(), CliError> {
    let lat = cfg.lattice()?;
    write_json(ctx, &format!("{}.json", cfg.prefix("lattice")), &lat.to_json())
}

pub fn sweep(cfg: &ExperimentConfig, ctx: &Ctx) -> Result<(), CliError> {
    let lat = cfg.lattice()?;
    let pert = cfg.perturbation(&lat)?;
    let grid = match &cfg.gamma_grid {
        Some(g) => g.values(ctx.grid),
        None => linspace(0.0, 1.5, ctx.grid.unwrap_or(301)),
    };
    if grid.is_empty() {
        return Err(CliError::Config("gamma_grid is empty".into()));
    }
    let sw = gamma_sweep(&lat, &pert, &grid)?;
    let prefix = cfg.prefix("sweep");
    sw.write_csv(create(ctx, &format!("{prefix}.csv"))?)?;
    println!("wrote {}", path(ctx, &format!("{prefix}.csv")).display());
    let window = cfg.window.unwrap_or(1.0);
    let pts = sw.window_points(window).into_iter().map(|(g, _, e)| (g, e)).collect();
    let svg = plot(&format!("spectrum, {} sites", lat.n_sites), "gamma", "E", &[Series::dots("eigenvalues", pts)]);
    write_svg(ctx, &format!("{prefix}.svg"), svg)
}

fn time_grid(cfg: &ExperimentConfig, ctx: &Ctx, default: (f64, usize)) -> (f64, usize) {
    let (t, n) = cfg.time.map(|t| (t.t_max, t.n_steps)).unwrap_or(default);
    (t, ctx.grid.unwrap_or(n))
}

fn start_states(cfg: &ExperimentConfig, lat: &Lattice, pert: &Perturbation) -> Result<Vec<StateVector>, CliError> {
    let dim = pert.dim(lat.n_sites);
    let single = |p| match pert {
        Perturbation::SingleBond { cell } => Ok(vec![single_bond_start(lat, *cell, p)?]),
        _ => Err(CliError::Config("even/odd start needs a single_bond perturbation".into())),
    };
    Ok(match cfg.start {
        StartConfig::Default => vec![default_start_state(lat, pert)?],
        StartConfig::AllOptimal => {
            let mut v = optimal_start_states(lat, Sublattice::A)?;
            v.extend(optimal_start_states(lat, Sublattice::B)?);
            v.into_iter().map(|s| s.embedded(dim)).collect()
        }
        StartConfig::EdgeState => vec![sheet_start_states(lat)?.1.embedded(dim)],
        StartConfig::Even => single(Parity::Even)?,
        StartConfig::Odd => single(Parity::Odd)?,
    })
}

fn search_json(r: &SearchResult) -> Value {
    let peaks: Vec<Value> = r
        .trajectory
        .tracked
        .iter()
        .map(|s| {
            let (t, p) = refine_peak(&r.trajectory.times, &s.probability);
            json!({"label": s.label, "peak_probability": p, "peak_time": t})
        })
        .collect();
    json!({
        "peak_probability": r.peak_probability,
        "peak_time": r.peak_time,
        "start": r.start,
        "series_peaks": peaks,
    })
}

fn trajectory_svg(title: &str, traj: &diracwalk::dynamics::Trajectory) -> String {
    let mut series: Vec<Series> = traj
        .tracked
        .iter()
        .map(|s| Series::line(s.label.clone(), traj.times.iter().copied().zip(s.probability.iter().copied()).collect()))
        .collect();
    series.push(Series::line("total", traj.times.iter().copied().zip(traj.total.iter().copied()).collect()));
    plot(title, "t", "probability", &series)
}

pub fn search(cfg: &ExperimentConfig, ctx: &Ctx) -> Result<(), CliError> {
    let lat = cfg.lattice()?;
    let pert = cfg.perturbation(&lat)?;
    let gamma = cfg.gamma.unwrap_or_else(|| pert.critical_gamma());
    let (t_max, n_steps) = time_grid(cfg, ctx, default_time_grid(&lat, &pert)?);
    let groups = match &cfg.tracked_sites {
        Some(sites) => sites
            .iter()
            .map(|s| {
                let id = s.resolve(&lat)?;
                Ok((id.label(), vec![id.linear]))
            })
            .collect::<Result<Vec<_>, CliError>>()?,
        None => tracked_sites(&lat, &pert)?,
    };
    let starts = start_states(cfg, &lat, &pert)?;
    let prefix = cfg.prefix("search");
    let mut runs = Vec::new();
    for (i, start) in starts.iter().enumerate() {
        let r = run_search_tracked(&lat, &pert, gamma, t_max, n_steps, start, &groups)?;
        let stem = if starts.len() == 1 { prefix.clone() } else { format!("{prefix}_{i}") };
        r.trajectory.write_csv(create(ctx, &format!("{stem}.csv"))?)?;
        println!("wrote {}", path(ctx, &format!("{stem}.csv")).display());
        write_svg(ctx, &format!("{stem}.svg"), trajectory_svg(&format!("search, {} sites", lat.n_sites), &r.trajectory))?;
        runs.push(search_json(&r));
    }
    let body = if runs.len() == 1 {
        let mut v = runs.pop().expect("one run");
        v["config"] = echo(cfg);
        v["gamma"] = json!(gamma);
        v
    } else {
        json!({"runs": runs, "gamma": gamma, "config": echo(cfg)})
    };
    write_json(ctx, &format!("{prefix}.json"), &body)
}

pub fn comm(cfg: &ExperimentConfig, ctx: &Ctx) -> Result<(), CliError> {
    let lat = cfg.lattice()?;
    let src = cfg.perturbation(&lat)?;
    let tgt = cfg.target(&lat)?;
    let n = lat.n_sites as f64;
    let t_ref = match src {
        Perturbation::ExtraSite { .. } => PI / 2.0 * (n / 2.0).sqrt(),
        _ => PI / 2.0 * (n / 6.0).sqrt(),
    };
    let (t_max, n_steps) = time_grid(cfg, ctx, (2.5 * t_ref, 600));
    let start = default_start_state(&lat, &src)?;
    let (snap, t_snap) = localized_state_snapshot(&lat, &src, src.critical_gamma(), &start)?;
    let r = run_communication_from(&lat, &src, &tgt, t_max, n_steps, &snap, t_snap)?;
    let prefix = cfg.prefix("comm");
    r.trajectory.write_csv(create(ctx, &format!("{prefix}.csv"))?)?;
    println!("wrote {}", path(ctx, &format!("{prefix}.csv")).display());
    write_svg(ctx, &format!("{prefix}.svg"), trajectory_svg(&format!("transfer, {} sites", lat.n_sites), &r.trajectory))?;
    write_json(
        ctx,
        &format!("{prefix}.json"),
        &json!({
            "pair_class": r.pair_class,
            "snapshot_time": r.snapshot_time,
            "initial_source_probability": r.initial_source_probability,
            "target_peak_probability": r.target_peak_probability,
            "target_peak_time": r.target_peak_time,
            "config": echo(cfg),
        }),
    )
}

fn default_sizes() -> Vec<i64> {
    (2..=10).map(|k| 3 * k).collect()
}

pub fn scaling(cfg: &ExperimentConfig, ctx: &Ctx) -> Result<(), CliError> {
    let sizes: Vec<(i64, i64)> = cfg.sizes.clone().unwrap_or_else(default_sizes).into_iter().map(|m| (m, m)).collect();
    let r = gap_scaling_fit_with(&sizes, cfg.family)?;
    let prefix = cfg.prefix("scaling");
    r.write_csv(create(ctx, &format!("{prefix}.csv"))?)?;
    println!("wrote {}", path(ctx, &format!("{prefix}.csv")).display());
    let pts = |f: &dyn Fn(usize) -> f64| r.sizes.iter().map(|&n| (n as f64, f(n))).collect::<Vec<_>>();
    let svg = plot(
        "crossing gap",
        "N",
        "gap",
        &[
            Series::dots("gap", pts(&|n| r.gaps[r.sizes.iter().position(|&x| x == n).expect("own size")])),
            Series::line("c1/sqrt(N)", pts(&|n| r.fit1(n))),
            Series::line("c2/sqrt(N ln N)", pts(&|n| r.fit2(n))),
        ],
    );
    write_svg(ctx, &format!("{prefix}.svg"), svg)?;
    let mut v = serde_json::to_value(&r).expect("result serializes");
    v["prefers_log_correction"] = json!(r.prefers_log_correction());
    v["family"] = json!(cfg.family);
    write_json(ctx, &format!("{prefix}.json"), &v)
}

fn model_json(m: &ReducedModel) -> Result<Value, CliError> {
    let mut v = serde_json::to_value(m).expect("model serializes");
    v["eigenvalues"] = json!(m.eigenvalues()?);
    v["closed_form_eigenvalues"] = json!(m.closed_form_eigenvalues());
    v["predicted_peak_time"] = json!(m.peak_time());
    Ok(v)
}

pub fn reduced(cfg: &ExperimentConfig, ctx: &Ctx) -> Result<(), CliError> {
    let lat = cfg.lattice()?;
    let n = lat.n_sites;
    let site = match cfg.perturbation.as_ref().and_then(|p| p.site()) {
        Some(s) => s.resolve(&lat)?,
        None => lat.site(0, 0, Sublattice::A)?,
    };
    let mut models = vec![
        model_json(&reduced_three_bond(n, site.cell_alpha, site.cell_beta)?)?,
        model_json(&reduced_extra_site(n, site.cell_alpha, site.cell_beta)?)?,
    ];
    if let Some(t) = cfg.target.as_ref().and_then(|t| t.site()) {
        models.push(model_json(&reduced_communication(n, &site, &t.resolve(&lat)?)?)?);
    }
    write_json(ctx, &format!("{}.json", cfg.prefix("reduced")), &json!({"N": n, "models": models}))
}

pub fn theory(cfg: &ExperimentConfig, ctx: &Ctx) -> Result<(), CliError> {
    let lat = cfg.lattice()?;
    let (m, nn) = lat.torus_dims().ok_or_else(|| CliError::Config("theory needs a torus boundary".into()))?;
    let n = lat.n_sites;
    let marked = match cfg.perturbation.as_ref().and_then(|p| p.site()) {
        Some(s) => s.resolve(&lat)?,
        None => lat.site(0, 0, Sublattice::A)?,
    };
    let spec = UnperturbedSpectrum::torus(m, nn)?;
    let e_root = solve_perturbed_energy(&spec, n)?;
    let i2 = i_sum(2, &spec, n)?;
    let (e_est, fp_est) = e_plus_estimate(n, i2)?;
    let h = search_hamiltonian(&lat, &Perturbation::ThreeBond { marked }, 1.0)?;
    let d = eigendecompose(&h)?;
    let start = optimal_start_state(&lat, &marked)?;
    let ov = overlap_start_perturbed(&d, &start, marked.linear, &spec)?;
    let mut v = json!({
        "N": n,
        "E_plus_root": e_root,
        "E_plus_est": e_est,
        "I2": i2,
        "overlap_direct": ov.direct,
        "overlap_formula": ov.formula,
        "E_plus_eigen": ov.e_plus,
        "F_prime_est": fp_est,
    });
    if let Some(sizes) = &cfg.sizes {
        v["log_bounds"] = serde_json::to_value(i2_log_bounds(sizes)?).expect("serializes");
    }
    write_json(ctx, &format!("{}.json", cfg.prefix("theory")), &v)
}
