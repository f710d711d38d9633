//! Rasterized Wigner functions on a rectangular phase-space window.
//!
//! Samples are cell-centred: cell `(i, j)` covers
//! `[xmin + iΔx, xmin + (i+1)Δx] × [pmin + jΔp, pmin + (j+1)Δp]` and stores
//! the value at its centre. Storage is row-major with one row per momentum
//! cell, matching the `wigner-grid v1` text format.

use std::f64::consts::PI;
use std::fmt::Write as _;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{ensure_nonnegative, ensure_positive, Error, Result};
use crate::gaussian::WignerFunction;

/// Diffusion substeps satisfy `D Δt ≤ DIFFUSION_CFL · Δp²`.
pub const DIFFUSION_CFL: f64 = 0.4;
/// Minimum number of standard deviations a window must cover.
pub const MIN_WINDOW_SIGMAS: f64 = 5.0;
/// Allowed drift of the total mass over one `evolve_grid` call.
pub const MASS_TOLERANCE: f64 = 1e-6;
/// Marginal values above `-CLIP_TOLERANCE` are treated as rounding noise.
pub const CLIP_TOLERANCE: f64 = 1e-9;

const HEADER: &str = "# wigner-grid v1";

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Window {
    pub xmin: f64,
    pub xmax: f64,
    pub pmin: f64,
    pub pmax: f64,
}

impl Window {
    pub fn new(xmin: f64, xmax: f64, pmin: f64, pmax: f64) -> Result<Self> {
        let w = Self { xmin, xmax, pmin, pmax };
        if [xmin, xmax, pmin, pmax].iter().any(|v| !v.is_finite()) || xmin >= xmax || pmin >= pmax {
            return Err(Error::InvalidParameter { name: "window", reason: format!("bounds must be finite and ordered, got {w:?}") });
        }
        Ok(w)
    }

    pub fn union(&self, other: &Self) -> Self {
        Self {
            xmin: self.xmin.min(other.xmin),
            xmax: self.xmax.max(other.xmax),
            pmin: self.pmin.min(other.pmin),
            pmax: self.pmax.max(other.pmax),
        }
    }

    pub fn contains(&self, other: &Self) -> bool {
        self.xmin <= other.xmin && self.xmax >= other.xmax && self.pmin <= other.pmin && self.pmax >= other.pmax
    }

    pub fn width(&self) -> f64 {
        self.xmax - self.xmin
    }

    pub fn height(&self) -> f64 {
        self.pmax - self.pmin
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WignerGrid {
    nx: usize,
    np: usize,
    window: Window,
    values: Vec<f64>,
}

/// First and second moments of a grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Moments {
    pub mass: f64,
    pub mean_x: f64,
    pub mean_p: f64,
    pub var_x: f64,
    pub cov_xp: f64,
    pub var_p: f64,
}

impl WignerGrid {
    pub fn new(nx: usize, np: usize, window: Window, values: Vec<f64>) -> Result<Self> {
        if nx == 0 || np == 0 {
            return Err(Error::GridShape("resolution must be positive".into()));
        }
        let window = Window::new(window.xmin, window.xmax, window.pmin, window.pmax)?;
        if values.len() != nx * np {
            return Err(Error::GridShape(format!("expected {} values, got {}", nx * np, values.len())));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::GridShape("non-finite value".into()));
        }
        Ok(Self { nx, np, window, values })
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn np(&self) -> usize {
        self.np
    }

    pub fn window(&self) -> &Window {
        &self.window
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn dx(&self) -> f64 {
        self.window.width() / self.nx as f64
    }

    pub fn dp(&self) -> f64 {
        self.window.height() / self.np as f64
    }

    pub fn x(&self, i: usize) -> f64 {
        self.window.xmin + (i as f64 + 0.5) * self.dx()
    }

    pub fn p(&self, j: usize) -> f64 {
        self.window.pmin + (j as f64 + 0.5) * self.dp()
    }

    /// Value at x-cell `i`, p-cell `j`.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[j * self.nx + i]
    }

    fn row(&self, j: usize) -> &[f64] {
        &self.values[j * self.nx..(j + 1) * self.nx]
    }

    /// Midpoint-rule integral of the grid.
    pub fn mass(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.dx() * self.dp()
    }

    pub fn moments(&self) -> Moments {
        let cell = self.dx() * self.dp();
        let (mut m0, mut mx, mut mp, mut mxx, mut mxp, mut mpp) = (0.0, 0.0, 0.0, 0.0, 0.0, 0.0);
        for j in 0..self.np {
            let p = self.p(j);
            for (i, &w) in self.row(j).iter().enumerate() {
                let x = self.x(i);
                m0 += w;
                mx += w * x;
                mp += w * p;
                mxx += w * x * x;
                mxp += w * x * p;
                mpp += w * p * p;
            }
        }
        let mean_x = mx / m0;
        let mean_p = mp / m0;
        Moments {
            mass: m0 * cell,
            mean_x,
            mean_p,
            var_x: mxx / m0 - mean_x * mean_x,
            cov_xp: mxp / m0 - mean_x * mean_p,
            var_p: mpp / m0 - mean_p * mean_p,
        }
    }

    /// Serializes to the `wigner-grid v1` text format.
    pub fn to_v1_string(&self) -> String {
        let mut out = String::with_capacity(self.values.len() * 24);
        let w = &self.window;
        let _ = writeln!(out, "{HEADER}");
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            self.nx,
            self.np,
            fmt_f64(w.xmin),
            fmt_f64(w.xmax),
            fmt_f64(w.pmin),
            fmt_f64(w.pmax)
        );
        for j in 0..self.np {
            let line: Vec<String> = self.row(j).iter().map(|&v| fmt_f64(v)).collect();
            out.push_str(&line.join(","));
            out.push('\n');
        }
        out
    }

    pub fn from_v1_str(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        if lines.next().map(str::trim_end) != Some(HEADER) {
            return Err(Error::Parse(format!("missing `{HEADER}` header")));
        }
        let shape = lines.next().ok_or_else(|| Error::Parse("missing shape line".into()))?;
        let fields: Vec<&str> = shape.trim().split(',').collect();
        if fields.len() != 6 {
            return Err(Error::Parse(format!("shape line needs 6 fields, got {}", fields.len())));
        }
        let nx: usize = parse_field(fields[0])?;
        let np: usize = parse_field(fields[1])?;
        let bounds: Vec<f64> = fields[2..].iter().map(|f| parse_field(f)).collect::<Result<_>>()?;
        let mut values = Vec::with_capacity(nx * np);
        let mut rows = 0;
        for line in lines.filter(|l| !l.trim().is_empty()) {
            let before = values.len();
            for v in line.trim().split(',') {
                values.push(parse_field::<f64>(v)?);
            }
            if values.len() - before != nx {
                return Err(Error::Parse(format!("row {rows} has {} values, expected {nx}", values.len() - before)));
            }
            rows += 1;
        }
        if rows != np {
            return Err(Error::Parse(format!("expected {np} rows, got {rows}")));
        }
        Self::new(nx, np, Window::new(bounds[0], bounds[1], bounds[2], bounds[3])?, values)
    }
}

fn parse_field<T: std::str::FromStr>(s: &str) -> Result<T> {
    s.trim().parse().map_err(|_| Error::Parse(format!("cannot parse `{s}`")))
}

/// Shortest decimal string that parses back to the same `f64`.
pub fn fmt_f64(v: f64) -> String {
    let a = v.abs();
    if v == 0.0 || (1e-5..1e16).contains(&a) {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

/// Samples `state` at cell centres.
///
/// The window must cover [`MIN_WINDOW_SIGMAS`] standard deviations of every
/// component of the state; otherwise the error carries a suggested window.
pub fn rasterize<S: WignerFunction + Sync>(state: &S, window: Window, nx: usize, np: usize) -> Result<WignerGrid> {
    let window = Window::new(window.xmin, window.xmax, window.pmin, window.pmax)?;
    let needed = state.support(MIN_WINDOW_SIGMAS);
    if !window.contains(&needed) {
        return Err(Error::WindowTooSmall { have: window, suggested: state.support(MIN_WINDOW_SIGMAS + 1.0).union(&window) });
    }
    let mut grid = WignerGrid::new(nx, np, window, vec![0.0; nx * np])?;
    let (xs, ps): (Vec<f64>, Vec<f64>) = ((0..nx).map(|i| grid.x(i)).collect(), (0..np).map(|j| grid.p(j)).collect());
    grid.values.par_chunks_mut(nx).zip(ps.par_iter()).for_each(|(row, &p)| {
        for (v, &x) in row.iter_mut().zip(&xs) {
            *v = state.wigner(x, p);
        }
    });
    Ok(grid)
}

/// Density matrix `ρ(x_a, x_b)` sampled on `x_a = x0 + a·dx`, normalized so
/// that `Σ_a ρ_aa dx = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct PositionDensityMatrix {
    x0: f64,
    dx: f64,
    hbar: f64,
    rho: DMatrix<Complex64>,
}

impl PositionDensityMatrix {
    pub fn new(x0: f64, dx: f64, rho: DMatrix<Complex64>, hbar: f64) -> Result<Self> {
        ensure_positive("dx", dx)?;
        ensure_positive("hbar", hbar)?;
        let n = rho.nrows();
        if n == 0 || rho.ncols() != n {
            return Err(Error::NotDensityMatrix("must be square and non-empty".into()));
        }
        let scale = rho.iter().map(|c| c.norm()).fold(0.0, f64::max);
        let herm = (&rho - rho.adjoint()).iter().map(|c| c.norm()).fold(0.0, f64::max);
        if herm > 1e-12 * scale {
            return Err(Error::NotDensityMatrix(format!("not Hermitian (deviation {herm:e})")));
        }
        let trace = rho.diagonal().iter().map(|c| c.re).sum::<f64>() * dx;
        if (trace - 1.0).abs() > 1e-6 {
            return Err(Error::NotDensityMatrix(format!("trace {trace} differs from 1")));
        }
        let rho = (&rho + rho.adjoint()) * Complex64::new(0.5, 0.0);
        let min_eig = rho.clone().symmetric_eigenvalues().min();
        if min_eig * dx < -1e-8 {
            return Err(Error::NotDensityMatrix(format!("negative eigenvalue {min_eig:e}")));
        }
        Ok(Self { x0, dx, hbar, rho })
    }

    /// `|ψ⟩⟨ψ|` from wavefunction samples, normalized on the grid.
    pub fn pure(x0: f64, dx: f64, psi: &[Complex64], hbar: f64) -> Result<Self> {
        Self::mixture(x0, dx, &[(1.0, psi.to_vec())], hbar)
    }

    /// `Σ wᵢ |ψᵢ⟩⟨ψᵢ|` with each `ψᵢ` normalized and the weights rescaled to
    /// sum to one.
    pub fn mixture(x0: f64, dx: f64, components: &[(f64, Vec<Complex64>)], hbar: f64) -> Result<Self> {
        let n = components.first().map(|c| c.1.len()).unwrap_or(0);
        let total: f64 = components.iter().map(|c| c.0).sum();
        let mut rho = DMatrix::<Complex64>::zeros(n, n);
        for (w, psi) in components {
            if psi.len() != n || *w < 0.0 {
                return Err(Error::NotDensityMatrix("components need equal length and non-negative weight".into()));
            }
            let norm: f64 = psi.iter().map(|c| c.norm_sqr()).sum::<f64>() * dx;
            let v = nalgebra::DVector::from_column_slice(psi);
            rho += &v * v.adjoint() * Complex64::new(w / (total * norm), 0.0);
        }
        Self::new(x0, dx, rho, hbar)
    }

    pub fn n(&self) -> usize {
        self.rho.nrows()
    }

    pub fn x(&self, a: usize) -> f64 {
        self.x0 + a as f64 * self.dx
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    pub fn rho(&self) -> &DMatrix<Complex64> {
        &self.rho
    }

    /// Position density `ρ(x_a, x_a)`.
    pub fn diagonal(&self) -> Vec<f64> {
        self.rho.diagonal().iter().map(|c| c.re).collect()
    }
}

/// Discrete Wigner transform `W(x,p) = (1/2πħ) ∫ dy e^{-ipy/ħ} ρ(x+y/2, x-y/2)`.
///
/// Every pair `(a, b)` maps to the centre `(x_a + x_b)/2` and offset
/// `y = x_a - x_b`, so the output has `2n-1` position cells of width `dx/2`
/// and `n` momentum cells of width `πħ/(n dx)` centred on `l·Δp`,
/// `l ∈ [-n/2, n/2)`. The map is invertible ([`density_from_wigner`]).
/// `n` must be even.
pub fn wigner_from_density(dm: &PositionDensityMatrix) -> Result<WignerGrid> {
    let n = dm.n();
    if n < 2 || n % 2 != 0 {
        return Err(Error::GridShape(format!("density matrix dimension must be even, got {n}")));
    }
    let (dx, hbar) = (dm.dx, dm.hbar);
    let dp = PI * hbar / (n as f64 * dx);
    let nx = 2 * n - 1;
    let window = Window::new(
        dm.x0 - 0.25 * dx,
        dm.x(n - 1) + 0.25 * dx,
        (-(n as f64) / 2.0 - 0.5) * dp,
        (n as f64 / 2.0 - 0.5) * dp,
    )?;
    let pref = dx / (PI * hbar);
    let half = (n / 2) as i64;
    let columns: Vec<Vec<f64>> = (0..nx)
        .into_par_iter()
        .map(|c| {
            let offsets = pair_offsets(c, n);
            (-half..half)
                .map(|l| {
                    let p = l as f64 * dp;
                    let sum: Complex64 = offsets
                        .iter()
                        .map(|&(a, b, d)| dm.rho[(a, b)] * Complex64::from_polar(1.0, -p * d as f64 * dx / hbar))
                        .sum();
                    pref * sum.re
                })
                .collect()
        })
        .collect();
    let mut values = vec![0.0; nx * n];
    for (c, col) in columns.iter().enumerate() {
        for (j, v) in col.iter().enumerate() {
            values[j * nx + c] = *v;
        }
    }
    WignerGrid::new(nx, n, window, values)
}

/// `(a, b, a-b)` for all index pairs with `a + b = c`.
fn pair_offsets(c: usize, n: usize) -> Vec<(usize, usize, i64)> {
    let lo = c.saturating_sub(n - 1);
    let hi = c.min(n - 1);
    (lo..=hi).map(|a| (a, c - a, a as i64 - (c - a) as i64)).collect()
}

/// Inverse of [`wigner_from_density`]; the grid must have that transform's
/// layout for the given `hbar`.
pub fn density_from_wigner(grid: &WignerGrid, hbar: f64) -> Result<PositionDensityMatrix> {
    ensure_positive("hbar", hbar)?;
    let nx = grid.nx;
    if nx % 2 == 0 || (nx + 1) / 2 != grid.np || grid.np % 2 != 0 {
        return Err(Error::GridShape(format!("need nx = 2n-1 and np = n with n even, got {}x{}", nx, grid.np)));
    }
    let n = grid.np;
    let dx = 2.0 * grid.dx();
    let dp = PI * hbar / (n as f64 * dx);
    let rel = |a: f64, b: f64| (a - b).abs() <= 1e-9 * a.abs().max(b.abs());
    if !rel(grid.dp(), dp) || !rel(grid.window.pmin, (-(n as f64) / 2.0 - 0.5) * dp) {
        return Err(Error::GridShape("momentum cells are not dual to the position spacing".into()));
    }
    let x0 = grid.window.xmin + 0.25 * dx;
    let half = (n / 2) as i64;
    let mut rho = DMatrix::<Complex64>::zeros(n, n);
    let entries: Vec<Vec<(usize, usize, Complex64)>> = (0..nx)
        .into_par_iter()
        .map(|c| {
            pair_offsets(c, n)
                .into_iter()
                .map(|(a, b, d)| {
                    let sum: Complex64 = (-half..half)
                        .map(|l| {
                            let j = (l + half) as usize;
                            let p = l as f64 * dp;
                            Complex64::from_polar(grid.get(c, j), p * d as f64 * dx / hbar)
                        })
                        .sum();
                    (a, b, sum * dp)
                })
                .collect()
        })
        .collect();
    for (a, b, v) in entries.into_iter().flatten() {
        rho[(a, b)] = v;
    }
    PositionDensityMatrix::new(x0, dx, rho, hbar)
}

/// Integrates `∂W/∂t = -(p/m) ∂W/∂x + D ∂²W/∂p²` with Strang splitting: half
/// a diffusion step, an exact shear remap, half a diffusion step.
///
/// The shear translates every momentum row by `pΔt/m` using a conservative
/// piecewise-linear (centred-slope) reconstruction, which moves the mean
/// exactly and leaves the row variance unchanged. Diffusion uses explicit
/// centred differences with `D Δt_sub ≤ 0.4 Δp²`. Values beyond the window
/// are zero.
pub fn evolve_grid(grid: &WignerGrid, diffusion: f64, mass: f64, t: f64, steps: usize) -> Result<WignerGrid> {
    ensure_nonnegative("D", diffusion)?;
    ensure_positive("m", mass)?;
    ensure_nonnegative("t", t)?;
    if steps == 0 {
        return Err(Error::InvalidParameter { name: "steps", reason: "must be positive".into() });
    }
    let mut out = grid.clone();
    if t == 0.0 {
        return Ok(out);
    }
    let dt = t / steps as f64;
    let dp = grid.dp();
    let half = 0.5 * dt;
    let substeps = ((diffusion * half) / (DIFFUSION_CFL * dp * dp)).ceil().max(1.0) as usize;
    let kappa = diffusion * half / substeps as f64 / (dp * dp);

    let mass0 = grid.mass();
    let peak0 = grid.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let mut scratch = vec![0.0; grid.values.len()];
    for step in 0..steps {
        if diffusion > 0.0 {
            for _ in 0..substeps {
                diffuse_momentum(&mut out, &mut scratch, kappa);
            }
        }
        shear_rows(&mut out, dt / mass);
        if diffusion > 0.0 {
            for _ in 0..substeps {
                diffuse_momentum(&mut out, &mut scratch, kappa);
            }
        }
        let peak = out.values.iter().fold(0.0f64, |m, v| if v.is_finite() { m.max(v.abs()) } else { f64::INFINITY });
        if !peak.is_finite() || peak > 1e3 * peak0.max(f64::MIN_POSITIVE) {
            return Err(Error::Unstable(format!("blow-up at step {}/{steps}: max |W| = {peak:e}", step + 1)));
        }
    }
    let drift = out.mass() - mass0;
    if drift.abs() > MASS_TOLERANCE * mass0.abs().max(1.0) {
        return Err(Error::Unstable(format!(
            "mass drifted by {drift:e} (from {mass0}); enlarge the window or check the step count"
        )));
    }
    Ok(out)
}

/// One explicit step `W_j += κ (W_{j+1} - 2W_j + W_{j-1})` along momentum.
fn diffuse_momentum(grid: &mut WignerGrid, scratch: &mut [f64], kappa: f64) {
    let (nx, np) = (grid.nx, grid.np);
    let src = &grid.values;
    scratch.par_chunks_mut(nx).enumerate().for_each(|(j, row)| {
        let cur = &src[j * nx..(j + 1) * nx];
        let below = (j > 0).then(|| &src[(j - 1) * nx..j * nx]);
        let above = (j + 1 < np).then(|| &src[(j + 1) * nx..(j + 2) * nx]);
        for i in 0..nx {
            let lo = below.map_or(0.0, |r| r[i]);
            let hi = above.map_or(0.0, |r| r[i]);
            row[i] = cur[i] + kappa * (hi - 2.0 * cur[i] + lo);
        }
    });
    grid.values.copy_from_slice(scratch);
}

/// Translates each momentum row by `p·tau` (`tau = Δt/m`).
fn shear_rows(grid: &mut WignerGrid, tau: f64) {
    let nx = grid.nx;
    let dx = grid.dx();
    let ps: Vec<f64> = (0..grid.np).map(|j| grid.p(j)).collect();
    grid.values.par_chunks_mut(nx).zip(ps.par_iter()).for_each(|(row, &p)| {
        translate_row(row, p * tau / dx);
    });
}

/// Conservative remap of cell averages under translation by `shift` cells,
/// using centred slopes (Fromm). Inflow from outside is zero.
fn translate_row(row: &mut [f64], shift: f64) {
    let n = row.len() as i64;
    let whole = shift.floor();
    let f = shift - whole;
    let q = whole as i64;
    let at = |src: &[f64], i: i64| if (0..n).contains(&i) { src[i as usize] } else { 0.0 };
    let src = row.to_vec();
    // integer part: exact
    let shifted: Vec<f64> = (0..n).map(|i| at(&src, i - q)).collect();
    if f == 0.0 {
        row.copy_from_slice(&shifted);
        return;
    }
    // flux through the right face of cell i, for i in -1..n
    let flux = |i: i64| {
        let u = at(&shifted, i);
        let slope = 0.5 * (at(&shifted, i + 1) - at(&shifted, i - 1));
        f * (u + 0.5 * (1.0 - f) * slope)
    };
    let mut left = flux(-1);
    for i in 0..n {
        let right = flux(i);
        row[i as usize] = shifted[i as usize] - right + left;
        left = right;
    }
}

/// Sampled one-dimensional density from a grid marginal.
#[derive(Debug, Clone, PartialEq)]
pub struct Marginal {
    pub coords: Vec<f64>,
    pub density: Vec<f64>,
    pub spacing: f64,
    /// Most negative raw value before clipping (0 if none).
    pub clipped_min: f64,
    /// Number of samples clipped to zero.
    pub clipped: usize,
}

impl Marginal {
    fn from_raw(coords: Vec<f64>, raw: Vec<f64>, spacing: f64) -> Self {
        let clipped_min = raw.iter().cloned().fold(0.0, f64::min);
        let clipped = raw.iter().filter(|v| **v < 0.0).count();
        let density = raw.into_iter().map(|v| v.max(0.0)).collect();
        Self { coords, density, spacing, clipped_min, clipped }
    }

    pub fn mass(&self) -> f64 {
        self.density.iter().sum::<f64>() * self.spacing
    }

    /// Whether clipping only removed rounding noise.
    pub fn clipping_within_tolerance(&self) -> bool {
        self.clipped_min >= -CLIP_TOLERANCE
    }

    pub fn mean_var(&self) -> (f64, f64) {
        let m0: f64 = self.density.iter().sum();
        let m1: f64 = self.density.iter().zip(&self.coords).map(|(d, c)| d * c).sum();
        let m2: f64 = self.density.iter().zip(&self.coords).map(|(d, c)| d * c * c).sum();
        let mean = m1 / m0;
        (mean, m2 / m0 - mean * mean)
    }

    /// `# coordinate,probability_density` CSV.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("# coordinate,probability_density\n");
        for (c, d) in self.coords.iter().zip(&self.density) {
            let _ = writeln!(out, "{},{}", fmt_f64(*c), fmt_f64(*d));
        }
        out
    }
}

/// `P(x) = ∫ dp W(x, p)`.
pub fn position_marginal(grid: &WignerGrid) -> Marginal {
    let dp = grid.dp();
    let raw = (0..grid.nx).map(|i| (0..grid.np).map(|j| grid.get(i, j)).sum::<f64>() * dp).collect();
    Marginal::from_raw((0..grid.nx).map(|i| grid.x(i)).collect(), raw, grid.dx())
}

/// `P(p) = ∫ dx W(x, p)`.
pub fn momentum_marginal(grid: &WignerGrid) -> Marginal {
    let dx = grid.dx();
    let raw = (0..grid.np).map(|j| grid.row(j).iter().sum::<f64>() * dx).collect();
    Marginal::from_raw((0..grid.np).map(|j| grid.p(j)).collect(), raw, grid.dp())
}

/// Fringe visibility of a momentum marginal for branches separated by `L`.
///
/// Demodulates at the fringe wavenumber `L/ħ`:
/// `V = 2 |∫ P(p) e^{ipL/ħ} dp| / ∫ P(p) dp`. This is 1 for a balanced
/// coherent superposition, 0 for the incoherent mixture, and is multiplied
/// by exactly `exp(-D L² t/ħ²)` under momentum diffusion, because the
/// momentum marginal evolves by convolution with a Gaussian of variance
/// `2Dt`.
pub fn fringe_visibility(marginal: &Marginal, separation: f64, hbar: f64) -> Result<f64> {
    ensure_positive("L", separation)?;
    ensure_positive("hbar", hbar)?;
    let period = 2.0 * PI * hbar / separation;
    let samples = period / marginal.spacing;
    if samples < 8.0 {
        return Err(Error::FringeUnresolved { samples });
    }
    let k = separation / hbar;
    let total: f64 = marginal.density.iter().sum();
    let mode: Complex64 = marginal.density.iter().zip(&marginal.coords).map(|(d, p)| Complex64::from_polar(*d, k * p)).sum();
    Ok((2.0 * mode.norm() / total).clamp(0.0, 1.0))
}
