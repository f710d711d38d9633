use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use qbm_core::detection::{
    detection_error_exponent, optimize_gaussian_preparation, Alternative, PreparationSearch, Preparation,
};
use qbm_core::gaussian::{
    decoherence_time, propagate_cat_full, propagate_gaussian_full, CatState, DecoherenceTime, GaussianState, WignerFunction,
};
use qbm_core::grid::{
    evolve_grid, fmt_f64, fringe_visibility, momentum_marginal, position_marginal, rasterize, Marginal, Window, WignerGrid,
};
use qbm_core::perturbation::{deficit_sweep, BipartiteSystem, DEFAULT_EPS, DEFAULT_SEED};
use qbm_core::sql::{
    d_min, diffusion_sql, force_sql, gamma_of, hbar_scaling, optimal_widths, sql_ratios, ExperimentConfig,
};
use qbm_core::Error;

use crate::settings::{CliError, Settings};

pub type CliResult<T> = Result<T, CliError>;

/// Ordered `key = value` lines.
#[derive(Debug, Default, Clone, PartialEq)]
pub struct Report {
    lines: Vec<(String, String)>,
}

impl Report {
    pub fn push(&mut self, key: impl Into<String>, value: impl Into<String>) {
        self.lines.push((key.into(), value.into()));
    }

    pub fn num(&mut self, key: impl Into<String>, value: f64) {
        self.push(key, fmt_f64(value));
    }

    pub fn render(&self) -> String {
        self.lines.iter().fold(String::new(), |mut out, (k, v)| {
            let _ = writeln!(out, "{k} = {v}");
            out
        })
    }
}

pub fn core_error(e: Error) -> CliError {
    let code = match &e {
        Error::InvalidParameter { name, .. } => return CliError::invalid(name, e.to_string()),
        Error::NotSymmetric { .. } => "not_symmetric",
        Error::Heisenberg { .. } => "heisenberg",
        Error::BranchOverlap { .. } => "branch_overlap",
        Error::BranchMismatch { .. } => "branch_mismatch",
        Error::WindowTooSmall { .. } => "window_too_small",
        Error::GridShape(_) => "grid_shape",
        Error::Unstable(_) => "unstable",
        Error::FringeUnresolved { .. } => "fringe_unresolved",
        Error::NotDensityMatrix(_) => "not_density_matrix",
        Error::SupportMismatch => "support_mismatch",
        Error::Dimension(_) => "dimension",
        Error::Parse(_) => "parse",
    };
    CliError::new(code, None, e.to_string())
}

trait OrCli<T> {
    fn cli(self) -> CliResult<T>;
}

impl<T> OrCli<T> for qbm_core::Result<T> {
    fn cli(self) -> CliResult<T> {
        self.map_err(core_error)
    }
}

fn write_file(dir: &Path, name: &str, contents: &str) -> CliResult<PathBuf> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::new("io", Some("out"), format!("cannot create {}: {e}", dir.display())))?;
    let path = dir.join(name);
    std::fs::write(&path, contents).map_err(|e| CliError::new("io", Some("out"), format!("cannot write {}: {e}", path.display())))?;
    Ok(path)
}

fn experiment(s: &Settings) -> CliResult<ExperimentConfig> {
    let (mass, duration, hbar) = s.units()?;
    ExperimentConfig { mass, duration, hbar, separation: s.f64("L")?, force: s.f64_or("F", 0.0)?, diffusion: s.f64_or("D", 0.0)? }
        .validated()
        .cli()
}

pub fn sql(s: &Settings) -> CliResult<Report> {
    let c = experiment(s)?;
    let (m, t, h) = (c.mass, c.duration, c.hbar);
    let w = optimal_widths(m, t, h).cli()?;
    let ratios = sql_ratios(&c).cli()?;
    let mut r = Report::default();
    r.num("m", m);
    r.num("T", t);
    r.num("hbar", h);
    r.num("F_SQL", force_sql(m, t, h).cli()?);
    r.num("D_SQL", diffusion_sql(m, t, h).cli()?);
    r.num("sigma_x_prep", w.sigma_x_prep);
    r.num("sigma_p_prep", w.sigma_p_prep);
    r.num("sigma_x_disp", w.sigma_x_disp);
    r.num("sigma_x_meas", w.sigma_x_meas);
    r.num("F", c.force);
    r.num("D", c.diffusion);
    r.num("F/F_SQL", ratios.force);
    r.num("D/D_SQL", ratios.diffusion);
    if let Some(l) = c.separation {
        r.num("L", l);
        r.num("D_min", d_min(t, l, h).cli()?);
        match decoherence_time(c.diffusion, l, h).cli()? {
            DecoherenceTime::After(tau) => r.num("tau_D", tau),
            DecoherenceTime::Never => r.push("tau_D", "inf"),
        }
        r.num("D/D_min", ratios.diffusion_min.unwrap_or(0.0));
        let g = gamma_of(&c).cli()?;
        r.num("gamma_re", g.re);
        r.num("gamma_im", g.im);
        r.num("s", -g.norm().ln());
        r.num("theta", c.force * l * t / h);
    }
    Ok(r)
}

enum Initial {
    Gaussian(GaussianState),
    Cat(CatState),
}

fn explicit_window(s: &Settings) -> CliResult<Option<Window>> {
    let keys = ["xmin", "xmax", "pmin", "pmax"];
    if keys.iter().all(|k| !s.has(k)) {
        return Ok(None);
    }
    let mut v = [0.0; 4];
    for (slot, k) in v.iter_mut().zip(keys) {
        *slot = s.f64(k)?.ok_or_else(|| CliError::missing(k))?;
    }
    Window::new(v[0], v[1], v[2], v[3]).map(Some).cli()
}

/// Branch span plus a 6σ margin in `x`; `6σ_p + 3√(2DT)` in `p`, widened
/// where needed so every stage keeps its own 6σ support.
fn auto_window(stages: &[&dyn WignerFunction], sigma_p: f64, p_center: (f64, f64), d: f64, t: f64) -> Window {
    let mut w = stages.iter().map(|s| s.support(6.0)).reduce(|a, b| a.union(&b)).expect("stages");
    let half = 6.0 * sigma_p + 3.0 * (2.0 * d * t).sqrt();
    w.pmin = w.pmin.min(p_center.0.min(p_center.1) - half);
    w.pmax = w.pmax.max(p_center.0.max(p_center.1) + half);
    w
}

fn stage_files(dir: &Path, name: &str, grid: &WignerGrid, report: &mut Report) -> CliResult<(Marginal, Marginal)> {
    let px = position_marginal(grid);
    let pp = momentum_marginal(grid);
    let g = write_file(dir, &format!("{name}.wgrid"), &grid.to_v1_string())?;
    write_file(dir, &format!("{name}_px.csv"), &px.to_csv())?;
    write_file(dir, &format!("{name}_pp.csv"), &pp.to_csv())?;
    let mo = grid.moments();
    report.push(name, g.display().to_string());
    report.num(format!("{name}.mass"), mo.mass);
    report.num(format!("{name}.var_x"), mo.var_x);
    report.num(format!("{name}.cov_xp"), mo.cov_xp);
    report.num(format!("{name}.var_p"), mo.var_p);
    Ok((px, pp))
}

pub fn simulate(s: &Settings, out: &Path) -> CliResult<Report> {
    let c = experiment(s)?;
    let (m, t, h) = (c.mass, c.duration, c.hbar);
    let mode = s.choice("mode", &["analytic", "grid"])?;
    let state = s.choice("state", &["gaussian", "cat"])?;
    let nx = s.usize_or("nx", 512)?;
    let np = s.usize_or("np", 512)?;
    let steps = s.usize_or("steps", 50)?;
    let sigma_x = s.f64_or("sigma_x", (h * t / m).sqrt())?;
    let r_corr = s.f64_or("r", 0.0)?;
    let p0 = s.f64_or("p0", 0.0)?;
    if mode == "grid" && c.force != 0.0 {
        return Err(CliError::invalid("F", "grid mode evolves without force; use mode = analytic"));
    }

    let initial = match state {
        "gaussian" => Initial::Gaussian(GaussianState::correlated(s.f64_or("x0", 0.0)?, p0, sigma_x, r_corr, h).cli()?),
        _ => {
            let l = c.separation.unwrap_or(12.0 * sigma_x);
            let g1 = GaussianState::correlated(0.5 * l, p0, sigma_x, r_corr, h).cli()?;
            let g2 = GaussianState::correlated(-0.5 * l, p0, sigma_x, r_corr, h).cli()?;
            Initial::Cat(CatState::new(g1, g2, 1.0.into()).cli()?)
        }
    };

    let mut report = Report::default();
    report.push("mode", mode);
    report.push("state", state);
    let (p_free, p_diff) = (p0, p0 + c.force * t);
    let sigma_p = match &initial {
        Initial::Gaussian(g) => g.var_p().sqrt(),
        Initial::Cat(cat) => cat.packet1().var_p().sqrt(),
    };

    let (grids, cat_gamma) = match &initial {
        Initial::Gaussian(g) => {
            let free = propagate_gaussian_full(g, 0.0, 0.0, m, t).cli()?;
            let diffused = propagate_gaussian_full(g, c.force, c.diffusion, m, t).cli()?;
            let window = match explicit_window(s)? {
                Some(w) => w,
                None => auto_window(&[g, &free, &diffused], sigma_p, (p_free, p_diff), c.diffusion, t),
            };
            (stages(mode, g, &free, &diffused, window, nx, np, c.diffusion, m, t, steps)?, None)
        }
        Initial::Cat(cat) => {
            let free = propagate_cat_full(cat, 0.0, 0.0, m, t).cli()?;
            let diffused = propagate_cat_full(cat, c.force, c.diffusion, m, t).cli()?;
            let window = match explicit_window(s)? {
                Some(w) => w,
                None => auto_window(&[cat, &free, &diffused], sigma_p, (p_free, p_diff), c.diffusion, t),
            };
            (stages(mode, cat, &free, &diffused, window, nx, np, c.diffusion, m, t, steps)?, Some((cat.separation(), diffused.gamma)))
        }
    };

    let w = grids[0].window();
    report.push("window", format!("{},{},{},{}", fmt_f64(w.xmin), fmt_f64(w.xmax), fmt_f64(w.pmin), fmt_f64(w.pmax)));
    report.num("nx", nx as f64);
    report.num("np", np as f64);
    let mut marginals = Vec::new();
    for (name, grid) in ["initial", "free", "diffused"].iter().zip(&grids) {
        marginals.push(stage_files(out, name, grid, &mut report)?);
    }
    if let Some((l, gamma)) = cat_gamma {
        report.num("L", l);
        report.num("gamma_abs", gamma.norm());
        report.num("gamma_arg", gamma.arg());
        let v_free = fringe_visibility(&marginals[1].1, l, h).cli()?;
        let v_diff = fringe_visibility(&marginals[2].1, l, h).cli()?;
        report.num("visibility_free", v_free);
        report.num("visibility_diffused", v_diff);
        report.num("visibility_ratio", v_diff / v_free);
    }
    Ok(report)
}

#[allow(clippy::too_many_arguments)]
fn stages<S: WignerFunction + Sync, A: WignerFunction + Sync, B: WignerFunction + Sync>(
    mode: &str,
    initial: &S,
    free: &A,
    diffused: &B,
    window: Window,
    nx: usize,
    np: usize,
    d: f64,
    m: f64,
    t: f64,
    steps: usize,
) -> CliResult<[WignerGrid; 3]> {
    let g0 = rasterize(initial, window, nx, np).cli()?;
    if mode == "analytic" {
        let g1 = rasterize(free, window, nx, np).cli()?;
        let g2 = rasterize(diffused, window, nx, np).cli()?;
        Ok([g0, g1, g2])
    } else {
        let g1 = evolve_grid(&g0, 0.0, m, t, steps).cli()?;
        let g2 = evolve_grid(&g0, d, m, t, steps).cli()?;
        Ok([g0, g1, g2])
    }
}

fn push_errors(r: &mut Report, exponent: f64) {
    for n in [1u32, 10, 100] {
        r.num(format!("error_n{n}"), (-(n as f64) * exponent).exp());
    }
}

fn push_search(r: &mut Report, search: &PreparationSearch) {
    r.num("exponent", search.best_point.exponent);
    r.num("sigma_x", search.best_point.sigma_x);
    r.num("r", search.best_point.r);
    r.num("r_index", search.best_r_index() as f64);
}

pub fn detect(s: &Settings, out: &Path) -> CliResult<Report> {
    let c = experiment(s)?;
    let (m, t, h) = (c.mass, c.duration, c.hbar);
    let family = s.choice("family", &["noncontractive", "contractive", "cat"])?;
    if !s.has("D_alt") && !s.has("F_alt") {
        return Err(CliError::missing("D_alt"));
    }
    let alt = Alternative { force: s.f64_or("F_alt", c.force)?, diffusion: s.f64_or("D_alt", c.diffusion)? };
    let mut r = Report::default();
    r.push("family", family);
    r.num("F", c.force);
    r.num("D", c.diffusion);
    r.num("F_alt", alt.force);
    r.num("D_alt", alt.diffusion);
    r.num("F_alt/F_SQL", alt.force / force_sql(m, t, h).cli()?);
    r.num("D_alt/D_SQL", alt.diffusion / diffusion_sql(m, t, h).cli()?);
    match family {
        "cat" => {
            let w = optimal_widths(m, t, h).cli()?;
            let sigma_x = s.f64_or("sigma_x", w.sigma_x_prep)?;
            let l = c.separation.unwrap_or(20.0 * w.sigma_x_meas);
            let cat = CatState::symmetric(sigma_x, l, h).cli()?;
            let exponent = detection_error_exponent(&Preparation::Cat(cat), &c, &alt).cli()?;
            let gaussian = optimize_gaussian_preparation(&c, &alt, false).cli()?;
            r.num("L", l);
            r.num("sigma_x", sigma_x);
            r.num("exponent", exponent);
            r.num("best_gaussian_exponent", gaussian.best_point.exponent);
            if gaussian.best_point.exponent > 0.0 {
                r.num("ratio_to_best_gaussian", exponent / gaussian.best_point.exponent);
            }
            push_errors(&mut r, exponent);
        }
        _ => {
            let search = optimize_gaussian_preparation(&c, &alt, family == "contractive").cli()?;
            push_search(&mut r, &search);
            push_errors(&mut r, search.best_point.exponent);
            let path = write_file(out, "surface.csv", &search.surface_csv())?;
            r.push("surface", path.display().to_string());
        }
    }
    Ok(r)
}

pub fn first_order(s: &Settings, out: &Path) -> CliResult<Report> {
    let dp = s.usize_or("dP", 2)?;
    let de = s.usize_or("dE", 3)?;
    let seed = s.u64_or("seed", DEFAULT_SEED)?;
    let eps = s.list_or("eps", &DEFAULT_EPS)?;
    let t = s.f64_or("t", 1.0)?;
    let coupling = s.choice("coupling", &["random", "commuting"])?;
    let sys = match coupling {
        "random" => BipartiteSystem::random(dp, de, seed),
        _ => BipartiteSystem::commuting(dp, de, seed),
    }
    .cli()?;
    let sweep = deficit_sweep(&sys, &eps, t).cli()?;
    let mut r = Report::default();
    r.num("dP", dp as f64);
    r.num("dE", de as f64);
    r.num("seed", seed as f64);
    r.num("t", t);
    r.push("coupling", coupling);
    match sweep.slope {
        Some(slope) => r.num("slope", slope),
        None => r.push("slope", "undefined"),
    }
    for (e, d) in &sweep.points {
        r.num(format!("deficit[{}]", fmt_f64(*e)), *d);
    }
    let path = write_file(out, "deficit.csv", &sweep.to_csv())?;
    r.push("table", path.display().to_string());
    Ok(r)
}

pub fn scale_hbar(s: &Settings, out: &Path) -> CliResult<Report> {
    let c = experiment(s)?;
    c.require_separation().cli()?;
    let kappas = s.list_or("kappa", &[1.0, 0.1, 0.01])?;
    let mut r = Report::default();
    let mut csv = String::from("kappa,hbar,gamma_re,gamma_im,s,theta,F_over_F_SQL,D_over_D_SQL\n");
    let mut drift = 0.0f64;
    for kappa in kappas {
        let scaled = hbar_scaling(&c, kappa).cli()?;
        let sc = scaled.scaled;
        let g = scaled.gamma_after;
        let ratios = sql_ratios(&sc).cli()?;
        let d = (g - scaled.gamma_before).norm() / scaled.gamma_before.norm();
        drift = drift.max(d);
        let (s_val, theta) = (-g.norm().ln(), sc.force * sc.separation.unwrap_or(0.0) * sc.duration / sc.hbar);
        r.num("kappa", kappa);
        r.num("hbar", sc.hbar);
        r.num("gamma_re", g.re);
        r.num("gamma_im", g.im);
        r.num("s", s_val);
        r.num("theta", theta);
        r.num("F/F_SQL", ratios.force);
        r.num("D/D_SQL", ratios.diffusion);
        r.num("gamma_drift", d);
        let _ = writeln!(
            csv,
            "{},{},{},{},{},{},{},{}",
            fmt_f64(kappa),
            fmt_f64(sc.hbar),
            fmt_f64(g.re),
            fmt_f64(g.im),
            fmt_f64(s_val),
            fmt_f64(theta),
            fmt_f64(ratios.force),
            fmt_f64(ratios.diffusion)
        );
    }
    r.num("max_gamma_drift", drift);
    r.push("gamma_invariant", if drift <= 1e-12 { "true" } else { "false" });
    let path = write_file(out, "scale_hbar.csv", &csv)?;
    r.push("table", path.display().to_string());
    Ok(r)
}
