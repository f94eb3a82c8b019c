//! Time integration of the incompressible MHD system
//!
//!   u_t + u·∇u = νΔu - ∇p + b·∇b,   b_t + u·∇b = ηΔb + b·∇u,
//!   ∇·u = ∇·b = 0,
//!
//! in primitive variables or in the symmetric Elsasser form
//! ∂_t w± + w∓·∇w± = Δw± - ∇p with w± = u ± b. Pressure is eliminated by
//! the Leray projection; the diffusion is integrated exactly per mode by
//! integrating factors and the projected nonlinear term by classical RK4.

use crate::error::{MhdError, Result};
use crate::grid::{self, Axis, Grid, VectorField};
use crate::buffers::{CBuf, FBuf};
use crate::spectral::{
    dealias_raw, deriv_coeffs, divergence_max_raw, forward_raw, forward_vector, inverse_raw,
    inverse_vector, project_raw, C64, WaveGrid,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::path::PathBuf;
use std::sync::Arc;

/// Velocity/magnetic pair at one instant. Both fields are divergence-free
/// along any trajectory produced by [`step`] or [`simulate`].
#[derive(Clone, Debug)]
pub struct State {
    pub u: VectorField,
    pub b: VectorField,
    pub t: f64,
}

impl State {
    pub fn new(u: VectorField, b: VectorField, t: f64) -> Result<State> {
        if u.grid() != b.grid() {
            return Err(MhdError::GridMismatch(
                "u and b live on different grids".into(),
            ));
        }
        Ok(State { u, b, t })
    }

    pub fn grid(&self) -> Grid {
        self.u.grid()
    }

    /// 0.5·‖u‖₂² and 0.5·‖b‖₂².
    pub fn energies(&self) -> (f64, f64) {
        let eu = 0.5 * grid::vector_inner_product(&self.u, &self.u).unwrap_or(f64::NAN);
        let eb = 0.5 * grid::vector_inner_product(&self.b, &self.b).unwrap_or(f64::NAN);
        (eu, eb)
    }
}

/// The same state in Elsasser variables w± = u ± b.
#[derive(Clone, Debug)]
pub struct ElsasserState {
    pub w_plus: VectorField,
    pub w_minus: VectorField,
    pub t: f64,
}

pub fn to_elsasser(s: &State) -> ElsasserState {
    ElsasserState {
        w_plus: s.u.added(&s.b),
        w_minus: s.u.subbed(&s.b),
        t: s.t,
    }
}

pub fn from_elsasser(e: &ElsasserState) -> State {
    State {
        u: e.w_plus.added(&e.w_minus).scaled(0.5),
        b: e.w_plus.subbed(&e.w_minus).scaled(0.5),
        t: e.t,
    }
}

/// Which form of the equations the integrator advances.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Form {
    Primitive,
    Elsasser,
}

#[derive(Clone, Copy, Debug)]
pub struct SolverConfig {
    pub dt: f64,
    pub t_end: f64,
    /// Viscosity (default 1).
    pub nu: f64,
    /// Magnetic diffusivity (default 1).
    pub eta: f64,
    /// Dealias quadratic products by the two-thirds rule (default on).
    pub dealias: bool,
    pub form: Form,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            dt: 1e-2,
            t_end: 1.0,
            nu: 1.0,
            eta: 1.0,
            dealias: true,
            form: Form::Primitive,
        }
    }
}

impl SolverConfig {
    fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0) {
            return Err(MhdError::Config(format!("dt must be positive, got {}", self.dt)));
        }
        if self.nu < 0.0 || self.eta < 0.0 {
            return Err(MhdError::Config("nu and eta must be nonnegative".into()));
        }
        Ok(())
    }
}

/// Spectral workspace for one grid: wavenumber tables only; FFT plans are
/// cached globally.
struct Workspace {
    grid: Grid,
    wave: WaveGrid,
}

impl Workspace {
    fn new(grid: Grid) -> Workspace {
        Workspace {
            grid,
            wave: WaveGrid::new(grid),
        }
    }
}

type SpecVec = [CBuf; 3];

/// Physical gradient tensor d[i][j] = ∂_j v_i from a spectral vector; the
/// nine transforms are independent and run in parallel.
fn gradient_physical(ws: &Workspace, spec: &SpecVec) -> [[FBuf; 3]; 3] {
    use rayon::prelude::*;
    let mut parts: Vec<Option<FBuf>> = (0..9)
        .into_par_iter()
        .map(|ij| {
            let (i, j) = (ij / 3, ij % 3);
            let d = deriv_coeffs(&ws.wave, &spec[i], Axis::ALL[j]);
            Some(inverse_raw(ws.grid, &d))
        })
        .collect();
    std::array::from_fn(|i| std::array::from_fn(|j| parts[i * 3 + j].take().unwrap()))
}

/// Projected, optionally dealiased advective nonlinearity: returns the
/// spectra of P[-(a·∇)c + extra], with the mean mode zeroed (the nonlinear
/// term carries no mean momentum).
///
/// `pairs` lists (advecting field, advected field, sign) triples whose
/// contributions are summed per output component.
fn advective_term(
    ws: &Workspace,
    fields: &[(&[FBuf; 3], &[[FBuf; 3]; 3], f64)],
    dealias: bool,
) -> SpecVec {
    let n = ws.grid.npts();
    let mut out: SpecVec = crate::spectral::par3(|i| {
        let mut work = FBuf::zeros(n);
        for (adv, grad, sign) in fields {
            for j in 0..3 {
                let a = &adv[j];
                let g = &grad[i][j];
                for (w, (av, gv)) in work.iter_mut().zip(a.iter().zip(g.iter())) {
                    *w += sign * av * gv;
                }
            }
        }
        let mut spec = forward_raw(ws.grid, &work);
        if dealias {
            dealias_raw(ws.grid, &mut spec);
        }
        spec[0] = C64::new(0.0, 0.0);
        spec
    });
    project_raw(&ws.wave, &mut out);
    out
}

/// Nonlinear tendencies of the primitive form in spectral space:
/// N_u = P[-u·∇u + b·∇b], N_b = P[-u·∇b + b·∇u].
fn nonlinear_primitive(ws: &Workspace, uhat: &SpecVec, bhat: &SpecVec, dealias: bool) -> (SpecVec, SpecVec) {
    let u = phys3(ws, uhat);
    let b = phys3(ws, bhat);
    let grad_u = gradient_physical(ws, uhat);
    let grad_b = gradient_physical(ws, bhat);
    let nu_hat = advective_term(ws, &[(&u, &grad_u, -1.0), (&b, &grad_b, 1.0)], dealias);
    let nb_hat = advective_term(ws, &[(&u, &grad_b, -1.0), (&b, &grad_u, 1.0)], dealias);
    (nu_hat, nb_hat)
}

/// Nonlinear tendencies of the Elsasser form: N_w± = P[-w∓·∇w±], plus the
/// off-diagonal diffusion ((ν-η)/2)Δw∓ that appears when ν ≠ η (the
/// diagonal part (ν+η)/2 is handled by the integrating factor).
fn nonlinear_elsasser(
    ws: &Workspace,
    wp_hat: &SpecVec,
    wm_hat: &SpecVec,
    dealias: bool,
    nu_minus: f64,
) -> (SpecVec, SpecVec) {
    let wp = phys3(ws, wp_hat);
    let wm = phys3(ws, wm_hat);
    let grad_p = gradient_physical(ws, wp_hat);
    let grad_m = gradient_physical(ws, wm_hat);
    let mut np = advective_term(ws, &[(&wm, &grad_p, -1.0)], dealias);
    let mut nm = advective_term(ws, &[(&wp, &grad_m, -1.0)], dealias);
    if nu_minus != 0.0 {
        add_laplacian(ws, &mut np, wm_hat, nu_minus);
        add_laplacian(ws, &mut nm, wp_hat, nu_minus);
    }
    (np, nm)
}

fn phys3(ws: &Workspace, spec: &SpecVec) -> [FBuf; 3] {
    crate::spectral::par3(|i| inverse_raw(ws.grid, &spec[i]))
}

/// target += c · Δ(source), spectrally.
fn add_laplacian(ws: &Workspace, target: &mut SpecVec, source: &SpecVec, c: f64) {
    ws.wave.for_each(|idx, kx, ky, kz| {
        let f = -c * (kx * kx + ky * ky + kz * kz);
        for comp in 0..3 {
            let s = source[comp][idx];
            target[comp][idx] += f * s;
        }
    });
}

/// Instantaneous right-hand sides du/dt and db/dt, evaluated in the
/// configured form (both agree to roundoff for ν = η).
pub fn tendency(s: &State, cfg: &SolverConfig) -> Result<(VectorField, VectorField)> {
    cfg.validate()?;
    let ws = Workspace::new(s.grid());
    let uhat = forward_vector(&s.u);
    let bhat = forward_vector(&s.b);
    check_state_solenoidal(&ws, s, &uhat, &bhat)?;
    match cfg.form {
        Form::Primitive => {
            let (mut nu_hat, mut nb_hat) = nonlinear_primitive(&ws, &uhat, &bhat, cfg.dealias);
            add_laplacian(&ws, &mut nu_hat, &uhat, cfg.nu);
            add_laplacian(&ws, &mut nb_hat, &bhat, cfg.eta);
            Ok((inverse_vector(ws.grid, &nu_hat), inverse_vector(ws.grid, &nb_hat)))
        }
        Form::Elsasser => {
            let nu_plus = 0.5 * (cfg.nu + cfg.eta);
            let nu_minus = 0.5 * (cfg.nu - cfg.eta);
            let n = ws.grid.npts();
            let wp_hat: SpecVec = std::array::from_fn(|i| {
                CBuf::from_iter_exact(n, uhat[i].iter().zip(&*bhat[i]).map(|(a, b)| a + b))
            });
            let wm_hat: SpecVec = std::array::from_fn(|i| {
                CBuf::from_iter_exact(n, uhat[i].iter().zip(&*bhat[i]).map(|(a, b)| a - b))
            });
            let (mut np, mut nm) = nonlinear_elsasser(&ws, &wp_hat, &wm_hat, cfg.dealias, nu_minus);
            add_laplacian(&ws, &mut np, &wp_hat, nu_plus);
            add_laplacian(&ws, &mut nm, &wm_hat, nu_plus);
            let du: SpecVec = std::array::from_fn(|i| {
                CBuf::from_iter_exact(n, np[i].iter().zip(&*nm[i]).map(|(p, m)| 0.5 * (p + m)))
            });
            let db: SpecVec = std::array::from_fn(|i| {
                CBuf::from_iter_exact(n, np[i].iter().zip(&*nm[i]).map(|(p, m)| 0.5 * (p - m)))
            });
            Ok((inverse_vector(ws.grid, &du), inverse_vector(ws.grid, &db)))
        }
    }
}

fn check_state_solenoidal(ws: &Workspace, s: &State, uhat: &SpecVec, bhat: &SpecVec) -> Result<()> {
    let (eu, eb) = s.energies();
    let scale = (2.0 * eu).sqrt() + (2.0 * eb).sqrt() + 1e-14;
    let du = divergence_max_raw(&ws.wave, uhat);
    let db = divergence_max_raw(&ws.wave, bhat);
    if du > 1e-8 * scale || db > 1e-8 * scale {
        return Err(MhdError::NotSolenoidal(format!(
            "state at t = {}: max spectral divergence |div u| = {du:.3e}, |div b| = {db:.3e}",
            s.t
        )));
    }
    Ok(())
}

/// exp(-lambda·|k|²·delta) per mode, cached per (grid, lambda, delta) since
/// a run reuses the same factors every step.
fn diffusion_factors(ws: &Workspace, lambda: f64, delta: f64) -> Arc<Vec<f64>> {
    use std::collections::HashMap;
    use std::sync::{Mutex, OnceLock};
    type Key = ([usize; 3], u64, u64, u64);
    static CACHE: OnceLock<Mutex<HashMap<Key, Arc<Vec<f64>>>>> = OnceLock::new();
    let key = (
        ws.grid.n(),
        ws.grid.length().to_bits(),
        lambda.to_bits(),
        delta.to_bits(),
    );
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(hit) = cache.lock().unwrap().get(&key) {
        return hit.clone();
    }
    let mut f = vec![0.0; ws.grid.npts()];
    ws.wave.for_each(|idx, kx, ky, kz| {
        f[idx] = (-(lambda) * (kx * kx + ky * ky + kz * kz) * delta).exp();
    });
    let arc = Arc::new(f);
    let mut lock = cache.lock().unwrap();
    if lock.len() >= 64 {
        lock.clear();
    }
    lock.insert(key, arc.clone());
    arc
}

struct Pair {
    a: SpecVec,
    b: SpecVec,
}

impl Pair {
    /// out[i] = e[i]·(x[i] + c·k[i]) componentwise over both fields.
    fn stage_scaled_sum(&self, k: &Pair, c: f64, ea: &[f64], eb: &[f64]) -> Pair {
        let fuse = |x: &SpecVec, k: &SpecVec, e: &[f64]| -> SpecVec {
            std::array::from_fn(|i| {
                let n = x[i].len();
                CBuf::from_iter_exact(
                    n,
                    (0..n).map(|idx| e[idx] * (x[i][idx] + c * k[i][idx])),
                )
            })
        };
        Pair {
            a: fuse(&self.a, &k.a, ea),
            b: fuse(&self.b, &k.b, eb),
        }
    }

    /// out[i] = e[i]·x[i] + c·k[i].
    fn stage_sum_scaled(&self, k: &Pair, c: f64, ea: &[f64], eb: &[f64]) -> Pair {
        let fuse = |x: &SpecVec, k: &SpecVec, e: &[f64]| -> SpecVec {
            std::array::from_fn(|i| {
                let n = x[i].len();
                CBuf::from_iter_exact(
                    n,
                    (0..n).map(|idx| e[idx] * x[i][idx] + c * k[i][idx]),
                )
            })
        };
        Pair {
            a: fuse(&self.a, &k.a, ea),
            b: fuse(&self.b, &k.b, eb),
        }
    }
}

/// One integrating-factor RK4 step. The per-mode diffusion factor
/// exp(-λ|k|²·δ) is exact, so when the nonlinear term vanishes identically
/// the step reproduces the heat decay to roundoff; the projected nonlinear
/// term is advanced at fourth order.
pub fn step(s: &State, cfg: &SolverConfig) -> Result<State> {
    cfg.validate()?;
    let ws = Workspace::new(s.grid());
    let (lam_a, lam_b, x0) = match cfg.form {
        Form::Primitive => (
            cfg.nu,
            cfg.eta,
            Pair {
                a: forward_vector(&s.u),
                b: forward_vector(&s.b),
            },
        ),
        Form::Elsasser => {
            let e = to_elsasser(s);
            let lam = 0.5 * (cfg.nu + cfg.eta);
            (
                lam,
                lam,
                Pair {
                    a: forward_vector(&e.w_plus),
                    b: forward_vector(&e.w_minus),
                },
            )
        }
    };
    let h = cfg.dt;
    let eh_a = diffusion_factors(&ws, lam_a, 0.5 * h);
    let ef_a = diffusion_factors(&ws, lam_a, h);
    let eh_b = diffusion_factors(&ws, lam_b, 0.5 * h);
    let ef_b = diffusion_factors(&ws, lam_b, h);
    let nu_minus = 0.5 * (cfg.nu - cfg.eta);

    let nl = |p: &Pair| -> Pair {
        let (na, nb) = match cfg.form {
            Form::Primitive => nonlinear_primitive(&ws, &p.a, &p.b, cfg.dealias),
            Form::Elsasser => nonlinear_elsasser(&ws, &p.a, &p.b, cfg.dealias, nu_minus),
        };
        Pair { a: na, b: nb }
    };

    let k1 = nl(&x0);
    // x_a = E_half (x0 + h/2 k1)
    let x_a = x0.stage_scaled_sum(&k1, 0.5 * h, &eh_a, &eh_b);
    let k2 = nl(&x_a);
    // x_b = E_half x0 + h/2 k2
    let x_b = x0.stage_sum_scaled(&k2, 0.5 * h, &eh_a, &eh_b);
    let k3 = nl(&x_b);
    // x_c = E x0 + h E_half k3
    let x_c = {
        let fuse = |x: &SpecVec, k: &SpecVec, ef: &[f64], eh: &[f64]| -> SpecVec {
            std::array::from_fn(|i| {
                let n = x[i].len();
                CBuf::from_iter_exact(
                    n,
                    (0..n).map(|idx| ef[idx] * x[i][idx] + h * eh[idx] * k[i][idx]),
                )
            })
        };
        Pair {
            a: fuse(&x0.a, &k3.a, &ef_a, &eh_a),
            b: fuse(&x0.b, &k3.b, &ef_b, &eh_b),
        }
    };
    let k4 = nl(&x_c);

    // x_new = E x0 + h/6 (E k1 + 2 E_half (k2 + k3) + k4), fused per mode
    let combine = |x: &SpecVec, k1: &SpecVec, k2: &SpecVec, k3: &SpecVec, k4: &SpecVec, ef: &[f64], eh: &[f64]| -> SpecVec {
        std::array::from_fn(|i| {
            let n = x[i].len();
            CBuf::from_iter_exact(
                n,
                (0..n).map(|idx| {
                    ef[idx] * x[i][idx]
                        + h / 6.0
                            * (ef[idx] * k1[i][idx]
                                + 2.0 * eh[idx] * (k2[i][idx] + k3[i][idx])
                                + k4[i][idx])
                }),
            )
        })
    };
    let mut xa = combine(&x0.a, &k1.a, &k2.a, &k3.a, &k4.a, &ef_a, &eh_a);
    let mut xb = combine(&x0.b, &k1.b, &k2.b, &k3.b, &k4.b, &ef_b, &eh_b);

    // Re-project to remove roundoff divergence drift.
    project_raw(&ws.wave, &mut xa);
    project_raw(&ws.wave, &mut xb);

    let t_next = s.t + h;
    let state = match cfg.form {
        Form::Primitive => State {
            u: inverse_vector(ws.grid, &xa),
            b: inverse_vector(ws.grid, &xb),
            t: t_next,
        },
        Form::Elsasser => from_elsasser(&ElsasserState {
            w_plus: inverse_vector(ws.grid, &xa),
            w_minus: inverse_vector(ws.grid, &xb),
            t: t_next,
        }),
    };
    if !state.u.is_finite() || !state.b.is_finite() {
        let (eu, eb) = s.energies();
        return Err(MhdError::BlowupDetected {
            t: t_next,
            e_u: eu,
            e_b: eb,
        });
    }
    Ok(state)
}

/// Advisory CFL number dt·max(|u|+|b|)/min spacing; the driver warns above 0.5.
pub fn cfl_number(s: &State, dt: f64) -> f64 {
    let g = s.grid();
    let h = Axis::ALL
        .iter()
        .map(|&a| g.spacing(a))
        .fold(f64::INFINITY, f64::min);
    let n = g.npts();
    let mut vmax = 0.0_f64;
    for i in 0..n {
        let mag = |v: &VectorField| -> f64 {
            let (a, b, c) = (v[0].values()[i], v[1].values()[i], v[2].values()[i]);
            (a * a + b * b + c * c).sqrt()
        };
        vmax = vmax.max(mag(&s.u) + mag(&s.b));
    }
    dt * vmax / h
}

/// Callbacks invoked by [`simulate`]. Sampling happens at step 0, every
/// `sample_every`-th step, and at the final step; checkpoints likewise on
/// their own cadence.
pub trait SimulationHooks {
    fn on_sample(&mut self, state: &State) -> Result<()> {
        let _ = state;
        Ok(())
    }
    fn on_checkpoint(&mut self, state: &State, step_index: usize) -> Result<()> {
        let _ = (state, step_index);
        Ok(())
    }
}

/// No-op hooks.
pub struct NoHooks;
impl SimulationHooks for NoHooks {}

#[derive(Clone, Copy, Debug)]
pub struct SimulateOptions {
    /// Sample cadence in steps (0 disables intermediate samples).
    pub sample_every: usize,
    /// Checkpoint cadence in steps (0 disables checkpoints).
    pub checkpoint_every: usize,
}

impl Default for SimulateOptions {
    fn default() -> Self {
        SimulateOptions {
            sample_every: 1,
            checkpoint_every: 0,
        }
    }
}

/// Step from init.t to t_end, firing hooks on their cadences. Deterministic
/// for a fixed configuration; sample times are t0 + i·dt computed by
/// multiplication, not accumulation.
pub fn simulate<H: SimulationHooks>(
    init: State,
    cfg: &SolverConfig,
    opts: &SimulateOptions,
    hooks: &mut H,
) -> Result<State> {
    cfg.validate()?;
    let t0 = init.t;
    let span = cfg.t_end - t0;
    if span < -1e-12 {
        return Err(MhdError::Config(format!(
            "t_end = {} precedes initial time {}",
            cfg.t_end, t0
        )));
    }
    let n_steps = (span / cfg.dt).round().max(0.0) as usize;
    let cfl = cfl_number(&init, cfg.dt);
    if cfl > 0.5 {
        eprintln!("warning: CFL number {cfl:.3} exceeds 0.5; consider a smaller dt");
    }
    let due = |i: usize, every: usize| -> bool {
        i == 0 || i == n_steps || (every > 0 && i % every == 0)
    };
    let mut state = init;
    if due(0, opts.sample_every) || n_steps == 0 {
        hooks.on_sample(&state)?;
    }
    if opts.checkpoint_every > 0 {
        hooks.on_checkpoint(&state, 0)?;
    }
    for i in 1..=n_steps {
        state = step(&state, cfg)?;
        state.t = t0 + i as f64 * cfg.dt;
        if opts.sample_every > 0 && due(i, opts.sample_every) {
            hooks.on_sample(&state)?;
        }
        if opts.checkpoint_every > 0 && due(i, opts.checkpoint_every) {
            hooks.on_checkpoint(&state, i)?;
        }
    }
    Ok(state)
}

/// Collect the sampled states of a run.
pub fn trajectory(init: State, cfg: &SolverConfig, sample_every: usize) -> Result<Vec<State>> {
    struct Collect(Vec<State>);
    impl SimulationHooks for Collect {
        fn on_sample(&mut self, state: &State) -> Result<()> {
            self.0.push(state.clone());
            Ok(())
        }
    }
    let mut hooks = Collect(Vec::new());
    simulate(
        init,
        cfg,
        &SimulateOptions {
            sample_every,
            checkpoint_every: 0,
        },
        &mut hooks,
    )?;
    Ok(hooks.0)
}

/// Built-in initial data.
#[derive(Clone, Debug, PartialEq)]
pub enum InitialData {
    /// u = A·(cos x sin y, -sin x cos y, 0), b = 0. Stays z-independent.
    TaylorGreen { amplitude: f64 },
    /// Orszag–Tang-style MHD vortex with divergence-free ε-perturbations
    /// that carry z-dependence:
    /// u = (-sin y + ε sin z, sin x, ε sin x),
    /// b = (-sin y, sin 2x + ε sin z, ε sin y).
    OrszagTang { epsilon: f64 },
    /// u = A(sin z, 0, 0), b = A(0, sin z, 0): every nonlinear term vanishes
    /// identically and the exact solution decays like e^{-t} for ν = η = 1.
    ShearDecay { amplitude: f64 },
    /// Hermitian random coefficients supported on 0 < |k| ≤ k_max,
    /// Leray-projected and rescaled so 0.5·‖u‖₂² = energy_u and
    /// 0.5·‖b‖₂² = energy_b (a zero target leaves the field zero).
    RandomBandlimited {
        k_max: usize,
        energy_u: f64,
        energy_b: f64,
    },
    /// Resume from a checkpoint file.
    Checkpoint { path: PathBuf },
}

/// Build divergence-free initial data at t = 0 (checkpoints keep their
/// stored time). `seed` only affects the random kind.
pub fn initial_data(kind: &InitialData, grid: Grid, seed: u64) -> Result<State> {
    // The trigonometric profiles are 2π-periodic in the default box and are
    // rescaled to the box length in general.
    let s = std::f64::consts::TAU / grid.length();
    match kind {
        InitialData::TaylorGreen { amplitude } => {
            let a = *amplitude;
            let u = VectorField::from_fn(grid, |x, y, _| {
                [
                    a * (s * x).cos() * (s * y).sin(),
                    -a * (s * x).sin() * (s * y).cos(),
                    0.0,
                ]
            });
            State::new(u, VectorField::zeros(grid), 0.0)
        }
        InitialData::OrszagTang { epsilon } => {
            let e = *epsilon;
            let u = VectorField::from_fn(grid, |x, y, z| {
                [
                    -(s * y).sin() + e * (s * z).sin(),
                    (s * x).sin(),
                    e * (s * x).sin(),
                ]
            });
            let b = VectorField::from_fn(grid, |x, y, z| {
                [
                    -(s * y).sin(),
                    (2.0 * s * x).sin() + e * (s * z).sin(),
                    e * (s * y).sin(),
                ]
            });
            State::new(u, b, 0.0)
        }
        InitialData::ShearDecay { amplitude } => {
            let a = *amplitude;
            let u = VectorField::from_fn(grid, |_, _, z| [a * (s * z).sin(), 0.0, 0.0]);
            let b = VectorField::from_fn(grid, |_, _, z| [0.0, a * (s * z).sin(), 0.0]);
            State::new(u, b, 0.0)
        }
        InitialData::RandomBandlimited {
            k_max,
            energy_u,
            energy_b,
        } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let u = random_solenoidal(grid, *k_max, *energy_u, &mut rng)?;
            let b = random_solenoidal(grid, *k_max, *energy_b, &mut rng)?;
            State::new(u, b, 0.0)
        }
        InitialData::Checkpoint { path } => {
            let data = crate::io::checkpoint::read_checkpoint(path)?;
            if data.state.grid() != grid {
                return Err(MhdError::GridMismatch(format!(
                    "checkpoint grid {:?} does not match requested grid {:?}",
                    data.state.grid().n(),
                    grid.n()
                )));
            }
            Ok(data.state)
        }
    }
}

fn standard_normal(rng: &mut ChaCha8Rng) -> f64 {
    // Box-Muller on uniform draws; deterministic for a fixed stream.
    let u1: f64 = rng.gen();
    let u2: f64 = rng.gen();
    (-2.0 * (1.0 - u1).ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

fn random_solenoidal(grid: Grid, k_max: usize, energy: f64, rng: &mut ChaCha8Rng) -> Result<VectorField> {
    let [nx, ny, nz] = grid.n();
    if 2 * k_max >= nx.min(ny).min(nz) {
        return Err(MhdError::Config(format!(
            "k_max = {k_max} does not fit below the Nyquist mode of a {nx}x{ny}x{nz} grid"
        )));
    }
    let wave = WaveGrid::new(grid);
    let mut spec: SpecVec = std::array::from_fn(|_| CBuf::zeros(grid.npts()));
    let km = k_max as i64;
    let k2max = (k_max * k_max) as i64;
    let wrap = |k: i64, n: usize| -> usize { k.rem_euclid(n as i64) as usize };
    for kx in -km..=km {
        for ky in -km..=km {
            for kz in -km..=km {
                let k2 = kx * kx + ky * ky + kz * kz;
                if k2 == 0 || k2 > k2max {
                    continue;
                }
                // one canonical representative per conjugate pair
                let canonical = kx > 0 || (kx == 0 && (ky > 0 || (ky == 0 && kz > 0)));
                if !canonical {
                    continue;
                }
                let idx = grid.index(wrap(kx, nx), wrap(ky, ny), wrap(kz, nz));
                let cidx = grid.index(wrap(-kx, nx), wrap(-ky, ny), wrap(-kz, nz));
                for comp in spec.iter_mut() {
                    let c = C64::new(standard_normal(rng), standard_normal(rng));
                    comp[idx] = c;
                    comp[cidx] = c.conj();
                }
            }
        }
    }
    project_raw(&wave, &mut spec);
    let mut sum = 0.0;
    for comp in &spec {
        sum += comp.iter().map(|c| c.norm_sqr()).sum::<f64>();
    }
    let current = 0.5 * grid.volume() * sum;
    if energy > 0.0 {
        if current <= 0.0 {
            return Err(MhdError::DegenerateInput(
                "random field projected to zero; cannot normalize".into(),
            ));
        }
        let scale = (energy / current).sqrt();
        for comp in spec.iter_mut() {
            for c in comp.iter_mut() {
                *c *= scale;
            }
        }
    } else {
        for comp in spec.iter_mut() {
            for c in comp.iter_mut() {
                *c = C64::new(0.0, 0.0);
            }
        }
    }
    Ok(inverse_vector(grid, &spec))
}
