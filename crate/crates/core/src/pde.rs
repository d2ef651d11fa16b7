//! Direct simulation of the cooperative system
//!
//! ```text
//! u_t = u_xx + f(u, v)
//! v_t = d v_xx + r g(u, v)
//! ```
//!
//! on `[-L, L]` with the ends clamped to the equilibria `(0, 0)` and `(1, 1)`,
//! and measurement of the front speed from the motion of the `u = 1/2` level.
//!
//! Diffusion is implicit (one tridiagonal solve per species and step), the
//! reaction explicit. With [`Scheme::ImexEuler`] every step is a composition
//! of monotone maps, so ordered data stay ordered and `[0, 1]^2` is invariant.

use std::io::Write;

use crate::error::{Error, Result};
use crate::model::CompetitionParams;

/// Uniform grid on `[-L, L]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid1D {
    half_length: f64,
    n_points: usize,
}

impl Grid1D {
    pub fn new(half_length: f64, n_points: usize) -> Result<Self> {
        if !(half_length.is_finite() && half_length > 0.0) {
            return Err(Error::Config(format!(
                "half length must be positive, got {half_length}"
            )));
        }
        if n_points < 3 {
            return Err(Error::Config(format!(
                "need at least 3 grid points, got {n_points}"
            )));
        }
        Ok(Self {
            half_length,
            n_points,
        })
    }

    /// Grid with spacing as close to `dx` as `2L / (n - 1)` allows.
    pub fn with_spacing(half_length: f64, dx: f64) -> Result<Self> {
        if !(dx.is_finite() && dx > 0.0) {
            return Err(Error::Config(format!("dx must be positive, got {dx}")));
        }
        let cells = (2.0 * half_length / dx).round();
        if !(cells.is_finite() && cells < 1e9) {
            return Err(Error::Config(format!(
                "grid of {cells} cells is not representable"
            )));
        }
        Self::new(half_length, cells as usize + 1)
    }

    pub fn half_length(&self) -> f64 {
        self.half_length
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    pub fn dx(&self) -> f64 {
        2.0 * self.half_length / (self.n_points - 1) as f64
    }

    pub fn x(&self, i: usize) -> f64 {
        -self.half_length + i as f64 * self.dx()
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.n_points).map(|i| self.x(i)).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Scheme {
    /// Backward Euler diffusion, forward Euler reaction. First order in time;
    /// order preserving. The reaction is sub-stepped when `dt` exceeds its
    /// monotonicity limit.
    #[default]
    ImexEuler,
    /// Second-order semi-implicit BDF. Not order preserving; used for
    /// time-accuracy cross-checks.
    Sbdf2,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimConfig {
    pub grid: Grid1D,
    pub dt: f64,
    pub t_end: f64,
    pub scheme: Scheme,
    /// Level of `u` whose crossing defines the front position.
    pub front_level: f64,
    /// Trailing fraction of `[0, t_end]` used for the speed regression.
    pub fit_window: f64,
}

pub const DEFAULT_HALF_LENGTH: f64 = 200.0;
pub const DEFAULT_DX: f64 = 0.1;
pub const DEFAULT_DT: f64 = 0.02;
pub const DEFAULT_T_END: f64 = 400.0;

/// Interval between recorded front positions.
const SAMPLE_INTERVAL: f64 = 0.1;

/// Fields are rejected once they leave `[-0.01, 1.01]`.
const BLOWUP_MARGIN: f64 = 0.01;

impl SimConfig {
    pub fn new(half_length: f64, dx: f64, dt: f64, t_end: f64) -> Result<Self> {
        let cfg = Self {
            grid: Grid1D::with_spacing(half_length, dx)?,
            dt,
            t_end,
            scheme: Scheme::default(),
            front_level: 0.5,
            fit_window: 0.5,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(Error::Config(format!(
                "dt must be positive, got {}",
                self.dt
            )));
        }
        if !(self.t_end.is_finite() && self.t_end >= self.dt) {
            return Err(Error::Config(format!(
                "t_end must be at least dt, got {}",
                self.t_end
            )));
        }
        if !(self.front_level > 0.0 && self.front_level < 1.0) {
            return Err(Error::Config(format!(
                "front level must lie in (0, 1), got {}",
                self.front_level
            )));
        }
        if !(self.fit_window > 0.0 && self.fit_window <= 1.0) {
            return Err(Error::Config(format!(
                "fit window must lie in (0, 1], got {}",
                self.fit_window
            )));
        }
        Ok(())
    }

    /// Spacing and time step halved, everything else kept.
    pub fn refined(&self) -> Result<Self> {
        let grid = Grid1D::new(self.grid.half_length, 2 * self.grid.n_points - 1)?;
        Ok(Self {
            grid,
            dt: 0.5 * self.dt,
            ..*self
        })
    }

    fn n_steps(&self) -> usize {
        (self.t_end / self.dt).round().max(1.0) as usize
    }
}

impl Default for SimConfig {
    fn default() -> Self {
        Self::new(DEFAULT_HALF_LENGTH, DEFAULT_DX, DEFAULT_DT, DEFAULT_T_END)
            .expect("default configuration is valid")
    }
}

/// `(I - lambda D2)` with Dirichlet ends, factored once for repeated solves.
#[derive(Debug, Clone)]
struct Tridiagonal {
    lambda: f64,
    /// Modified super-diagonal of the forward sweep.
    upper: Vec<f64>,
    inv_pivot: Vec<f64>,
}

impl Tridiagonal {
    fn new(lambda: f64, n_interior: usize) -> Self {
        let (diag, off) = (1.0 + 2.0 * lambda, -lambda);
        let mut upper = vec![0.0; n_interior];
        let mut inv_pivot = vec![0.0; n_interior];
        let mut prev = 0.0;
        for i in 0..n_interior {
            let pivot = diag - off * prev;
            inv_pivot[i] = 1.0 / pivot;
            upper[i] = off / pivot;
            prev = upper[i];
        }
        Self {
            lambda,
            upper,
            inv_pivot,
        }
    }

    /// Solves for the interior of `field` in place. On entry the interior
    /// holds the right-hand side and the ends hold the boundary values.
    #[allow(clippy::needless_range_loop)]
    fn solve(&self, field: &mut [f64]) {
        let n = field.len();
        let off = -self.lambda;
        field[1] += self.lambda * field[0];
        field[n - 2] += self.lambda * field[n - 1];
        let mut prev = 0.0;
        for i in 1..n - 1 {
            let k = i - 1;
            let y = (field[i] - off * prev) * self.inv_pivot[k];
            field[i] = y;
            prev = y;
        }
        for i in (1..n - 2).rev() {
            field[i] -= self.upper[i - 1] * field[i + 1];
        }
    }
}

/// SBDF2 history: previous fields and reaction terms.
type Sbdf2History = (Vec<f64>, Vec<f64>, Vec<f64>, Vec<f64>);

/// Time stepper over owned field buffers.
struct Stepper {
    params: CompetitionParams,
    scheme: Scheme,
    dt: f64,
    reaction_substeps: usize,
    solve_u: Tridiagonal,
    solve_v: Tridiagonal,
    u: Vec<f64>,
    v: Vec<f64>,
    history: Option<Sbdf2History>,
    steps: usize,
}

/// Reaction Lipschitz bound that keeps the explicit update monotone on `[0, 1]^2`.
fn reaction_rate(params: &CompetitionParams) -> f64 {
    f64::max(1.0 + params.k1(), params.r() * (1.0 + params.k2()))
}

impl Stepper {
    fn new(params: &CompetitionParams, cfg: &SimConfig, u: Vec<f64>, v: Vec<f64>) -> Result<Self> {
        cfg.validate()?;
        let n = cfg.grid.n_points;
        if u.len() != n || v.len() != n {
            return Err(Error::Config(format!(
                "initial fields have {} and {} points, grid has {n}",
                u.len(),
                v.len()
            )));
        }
        let rate = reaction_rate(params) * cfg.dt;
        let reaction_substeps = match cfg.scheme {
            Scheme::ImexEuler => (rate / 0.5).ceil().max(1.0) as usize,
            Scheme::Sbdf2 => {
                if rate > 0.5 {
                    return Err(Error::Config(format!(
                        "dt = {} too large for SBDF2 at reaction rate {}",
                        cfg.dt,
                        reaction_rate(params)
                    )));
                }
                1
            }
        };
        let mu = cfg.dt / (cfg.grid.dx() * cfg.grid.dx());
        let (lu, lv) = match cfg.scheme {
            Scheme::ImexEuler => (mu, params.d() * mu),
            Scheme::Sbdf2 => (2.0 / 3.0 * mu, 2.0 / 3.0 * params.d() * mu),
        };
        let mut stepper = Self {
            params: *params,
            scheme: cfg.scheme,
            dt: cfg.dt,
            reaction_substeps,
            solve_u: Tridiagonal::new(lu, n - 2),
            solve_v: Tridiagonal::new(lv, n - 2),
            u,
            v,
            history: None,
            steps: 0,
        };
        stepper.clamp_ends();
        Ok(stepper)
    }

    fn clamp_ends(&mut self) {
        let n = self.u.len();
        self.u[0] = 0.0;
        self.v[0] = 0.0;
        self.u[n - 1] = 1.0;
        self.v[n - 1] = 1.0;
    }

    fn reaction(&self, u: &[f64], v: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let r = self.params.r();
        u.iter()
            .zip(v)
            .map(|(&a, &b)| {
                (
                    self.params.reaction_f(a, b),
                    r * self.params.reaction_g(a, b),
                )
            })
            .unzip()
    }

    fn step(&mut self) {
        match (self.scheme, self.history.is_some()) {
            (Scheme::ImexEuler, _) | (Scheme::Sbdf2, false) => self.euler_step(),
            (Scheme::Sbdf2, true) => self.sbdf2_step(),
        }
        self.steps += 1;
    }

    fn euler_step(&mut self) {
        if self.scheme == Scheme::Sbdf2 {
            // first SBDF2 step: Euler with diffusion weight dt, then history
            let (fu, fv) = self.reaction(&self.u, &self.v);
            let (u0, v0) = (self.u.clone(), self.v.clone());
            let n = self.u.len();
            for i in 1..n - 1 {
                self.u[i] += self.dt * fu[i];
                self.v[i] += self.dt * fv[i];
            }
            let mu = 1.5 * self.solve_u.lambda;
            let nu = 1.5 * self.solve_v.lambda;
            Tridiagonal::new(mu, n - 2).solve(&mut self.u);
            Tridiagonal::new(nu, n - 2).solve(&mut self.v);
            self.history = Some((u0, v0, fu, fv));
            return;
        }
        let h = self.dt / self.reaction_substeps as f64;
        let (k1, k2, r) = (self.params.k1(), self.params.k2(), self.params.r());
        let n = self.u.len();
        for _ in 0..self.reaction_substeps {
            for i in 1..n - 1 {
                let (a, b) = (self.u[i], self.v[i]);
                self.u[i] = a + h * a * (1.0 - a - k1 * (1.0 - b));
                self.v[i] = b + h * r * (1.0 - b) * (k2 * a - b);
            }
        }
        self.solve_u.solve(&mut self.u);
        self.solve_v.solve(&mut self.v);
    }

    fn sbdf2_step(&mut self) {
        let (fu, fv) = self.reaction(&self.u, &self.v);
        let (u_prev, v_prev, fu_prev, fv_prev) = self.history.take().expect("history present");
        let (u_now, v_now) = (self.u.clone(), self.v.clone());
        let n = self.u.len();
        let w = 2.0 * self.dt / 3.0;
        for i in 1..n - 1 {
            self.u[i] = (4.0 * u_now[i] - u_prev[i]) / 3.0 + w * (2.0 * fu[i] - fu_prev[i]);
            self.v[i] = (4.0 * v_now[i] - v_prev[i]) / 3.0 + w * (2.0 * fv[i] - fv_prev[i]);
        }
        self.solve_u.solve(&mut self.u);
        self.solve_v.solve(&mut self.v);
        self.history = Some((u_now, v_now, fu, fv));
    }

    fn time(&self) -> f64 {
        self.steps as f64 * self.dt
    }

    fn check(&self) -> Result<()> {
        let lo = -BLOWUP_MARGIN;
        let hi = 1.0 + BLOWUP_MARGIN;
        for (name, field) in [("u", &self.u), ("v", &self.v)] {
            if let Some(bad) = field.iter().find(|w| !(lo..=hi).contains(*w)) {
                return Err(Error::Unstable {
                    t: self.time(),
                    reason: format!("{name} = {bad} outside [{lo}, {hi}]"),
                });
            }
        }
        Ok(())
    }

    /// Moves the profile `shift` cells to the left (negative: to the right),
    /// filling vacated cells with the adjacent boundary equilibrium.
    fn shift(&mut self, shift: isize) {
        let n = self.u.len();
        let s = shift.unsigned_abs().min(n);
        let shift_field = |field: &mut Vec<f64>, fill_left: f64, fill_right: f64| {
            if shift > 0 {
                field.drain(..s);
                field.extend(std::iter::repeat_n(fill_right, s));
            } else {
                field.truncate(n - s);
                field.splice(0..0, std::iter::repeat_n(fill_left, s));
            }
        };
        shift_field(&mut self.u, 0.0, 1.0);
        shift_field(&mut self.v, 0.0, 1.0);
        if let Some((u0, v0, fu, fv)) = &mut self.history {
            shift_field(u0, 0.0, 1.0);
            shift_field(v0, 0.0, 1.0);
            shift_field(fu, 0.0, 0.0);
            shift_field(fv, 0.0, 0.0);
        }
    }
}

/// Position of the first upward crossing of `level` by `u`, linearly
/// interpolated, in grid coordinates.
pub fn level_crossing(grid: &Grid1D, u: &[f64], level: f64) -> Option<f64> {
    let i = u.windows(2).position(|w| w[0] < level && w[1] >= level)?;
    let frac = (level - u[i]) / (u[i + 1] - u[i]);
    Some(grid.x(i) + frac * grid.dx())
}

/// Smoothed step from `(0, 0)` to `(1, 1)` at `x = 0` with width of five cells.
/// Satisfies `S(x) + S(-x) = 1`.
pub fn smoothed_step(grid: &Grid1D) -> Vec<f64> {
    let width = 2.5 * grid.dx();
    grid.points()
        .into_iter()
        .map(|x| 0.5 * (1.0 + (x / width).tanh()))
        .collect()
}

/// Fields at one output time.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub t: f64,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
}

/// Evolves `(u0, v0)` in a fixed frame and returns the fields at each of
/// `output_times` (rounded to whole steps, clipped to `t_end`).
pub fn simulate(
    params: &CompetitionParams,
    config: &SimConfig,
    u0: Vec<f64>,
    v0: Vec<f64>,
    output_times: &[f64],
) -> Result<Vec<Snapshot>> {
    let in_region = |w: &f64| (0.0..=1.0).contains(w);
    if !(u0.iter().all(in_region) && v0.iter().all(in_region)) {
        return Err(Error::Config(
            "initial fields must lie between the equilibria (0, 0) and (1, 1)".into(),
        ));
    }
    let mut stepper = Stepper::new(params, config, u0, v0)?;
    let total = config.n_steps();
    let mut targets: Vec<usize> = output_times
        .iter()
        .map(|t| ((t / config.dt).round().max(0.0) as usize).min(total))
        .collect();
    targets.sort_unstable();

    let mut out = Vec::with_capacity(targets.len());
    for target in targets {
        while stepper.steps < target {
            stepper.step();
            stepper.check()?;
        }
        out.push(Snapshot {
            t: stepper.time(),
            u: stepper.u.clone(),
            v: stepper.v.clone(),
        });
    }
    Ok(out)
}

/// Writes snapshots as delimited rows `t,x,u,v`.
pub fn write_trajectory<W: Write>(grid: &Grid1D, snapshots: &[Snapshot], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["t", "x", "u", "v"])?;
    for snap in snapshots {
        for (i, (u, v)) in snap.u.iter().zip(&snap.v).enumerate() {
            w.write_record([
                crate::fmt::g12(snap.t),
                crate::fmt::g12(grid.x(i)),
                crate::fmt::g12(*u),
                crate::fmt::g12(*v),
            ])?;
        }
    }
    w.flush().map_err(|source| Error::Io {
        path: "<trajectory>".into(),
        source,
    })?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpeedEstimate {
    /// Speed in the traveling-wave convention `Phi(x + c t)`: minus the front velocity.
    pub c_hat: f64,
    pub stderr: f64,
    /// `(t, X(t))` with `X` in the fixed lab frame.
    pub front_trace: Vec<(f64, f64)>,
    pub converged: bool,
}

/// Least-squares slope and its standard error.
fn fit_slope(points: &[(f64, f64)]) -> (f64, f64) {
    let n = points.len() as f64;
    let (mt, mx) = points
        .iter()
        .fold((0.0, 0.0), |(a, b), (t, x)| (a + t / n, b + x / n));
    let (mut stt, mut stx) = (0.0, 0.0);
    for (t, x) in points {
        stt += (t - mt) * (t - mt);
        stx += (t - mt) * (x - mx);
    }
    let slope = stx / stt;
    let ssr: f64 = points
        .iter()
        .map(|(t, x)| {
            let e = x - mx - slope * (t - mt);
            e * e
        })
        .sum();
    let stderr = if points.len() > 2 {
        (ssr / (n - 2.0) / stt).sqrt()
    } else {
        f64::INFINITY
    };
    (slope, stderr)
}

/// Runs from the smoothed step, keeps the front near the middle of the
/// window by whole-cell shifts, and regresses the front position over the
/// trailing `fit_window` of the run.
pub fn estimate_speed(params: &CompetitionParams, config: &SimConfig) -> Result<SpeedEstimate> {
    let grid = config.grid;
    let step0 = smoothed_step(&grid);
    let mut stepper = Stepper::new(params, config, step0.clone(), step0)?;
    let total = config.n_steps();
    let sample_every = ((SAMPLE_INTERVAL / config.dt).round() as usize).max(1);
    let fit_start = config.t_end * (1.0 - config.fit_window);
    let l = grid.half_length();
    let dx = grid.dx();

    let mut offset = 0.0;
    let mut trace = Vec::with_capacity(total / sample_every + 2);
    let mut min_clearance = f64::INFINITY;
    let locate = |s: &Stepper| level_crossing(&grid, &s.u, config.front_level);

    trace.push((0.0, locate(&stepper).ok_or(Error::FrontLost { t: 0.0 })?));
    while stepper.steps < total {
        stepper.step();
        let local = locate(&stepper).ok_or(Error::FrontLost { t: stepper.time() })?;
        if stepper.steps % sample_every == 0 || stepper.steps == total {
            stepper.check()?;
            let t = stepper.time();
            if t >= fit_start {
                min_clearance = min_clearance.min(l - local.abs());
            }
            trace.push((t, local + offset));
        }
        if local.abs() > 0.25 * l {
            let cells = (local / dx).round() as isize;
            stepper.shift(cells);
            offset += cells as f64 * dx;
        }
    }

    let window: Vec<(f64, f64)> = trace
        .iter()
        .copied()
        .filter(|(t, _)| *t >= fit_start)
        .collect();
    if window.len() < 3 {
        return Err(Error::Config(format!(
            "fit window holds {} samples; need at least 3",
            window.len()
        )));
    }
    let (velocity, stderr) = fit_slope(&window);
    let c_hat = -velocity;
    let converged =
        c_hat.is_finite() && stderr < 0.1 * c_hat.abs().max(0.01) && min_clearance >= 0.1 * l;
    Ok(SpeedEstimate {
        c_hat,
        stderr,
        front_trace: trace,
        converged,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct RefineCheck {
    pub coarse: SpeedEstimate,
    pub fine: SpeedEstimate,
    /// `|c1 - c2| < max(0.01, 0.1 |c1|)`.
    pub agree: bool,
}

pub fn refine_check(params: &CompetitionParams, config: &SimConfig) -> Result<RefineCheck> {
    let coarse = estimate_speed(params, config)?;
    let fine = estimate_speed(params, &config.refined()?)?;
    let agree = (coarse.c_hat - fine.c_hat).abs() < f64::max(0.01, 0.1 * coarse.c_hat.abs());
    Ok(RefineCheck {
        coarse,
        fine,
        agree,
    })
}
