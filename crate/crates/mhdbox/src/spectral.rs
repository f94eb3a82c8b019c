//! Discrete Fourier analysis on the box: transforms, spectral derivatives,
//! the two-thirds dealiasing rule, the divergence-free (Leray) projection
//! and the pressure Poisson solve.
//!
//! The forward transform carries the 1/npts factor, so coefficients are mode
//! amplitudes: f(x) = Σ_k c_k e^{i k·x} with k_i ∈ {-n_i/2, …, n_i/2 - 1}
//! scaled by 2π/L. For f = sin x the only nonzero coefficients are
//! c(±1,0,0) = ∓i/2, and Parseval reads ‖f‖₂² = vol·Σ|c_k|².
//!
//! Derivatives zero the Nyquist plane k_i = -n_i/2 (the odd-ball mode has no
//! well-defined derivative sign, and zeroing preserves realness).

use crate::buffers::{CBuf, FBuf};
use crate::error::{MhdError, Result};
use crate::grid::{Axis, Grid, ScalarField, VectorField};
use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};
use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

pub(crate) type C64 = Complex<f64>;

/// Complex Fourier coefficients of a real field, stored in FFT index order
/// (index m along an axis of n points means the signed mode m for m < n/2
/// and m - n otherwise), z-fastest like the physical layout.
#[derive(Clone, Debug)]
pub struct SpectrumField {
    grid: Grid,
    coeffs: Vec<C64>,
}

impl SpectrumField {
    pub fn zeros(grid: Grid) -> SpectrumField {
        SpectrumField {
            grid,
            coeffs: vec![C64::new(0.0, 0.0); grid.npts()],
        }
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn coeffs(&self) -> &[C64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [C64] {
        &mut self.coeffs
    }

    /// Coefficient of the signed mode (kx, ky, kz).
    pub fn coeff_at(&self, k: [i64; 3]) -> C64 {
        let [nx, ny, nz] = self.grid.n();
        let wrap = |ki: i64, n: usize| -> usize {
            let n = n as i64;
            (ki.rem_euclid(n)) as usize
        };
        let (ix, iy, iz) = (wrap(k[0], nx), wrap(k[1], ny), wrap(k[2], nz));
        self.coeffs[self.grid.index(ix, iy, iz)]
    }
}

/// Precomputed wavenumbers per axis index: `k` holds the true signed
/// wavenumber (2π/L scaled, Nyquist = -n/2), `k_deriv` the derivative
/// multiplier with the Nyquist entry zeroed.
#[derive(Clone, Debug)]
pub struct WaveGrid {
    grid: Grid,
    k: [Vec<f64>; 3],
    k_deriv: [Vec<f64>; 3],
}

impl WaveGrid {
    pub fn new(grid: Grid) -> WaveGrid {
        let scale = std::f64::consts::TAU / grid.length();
        let table = |n: usize| -> (Vec<f64>, Vec<f64>) {
            let mut k = Vec::with_capacity(n);
            let mut kd = Vec::with_capacity(n);
            for m in 0..n {
                let signed = if m < n / 2 {
                    m as i64
                } else {
                    m as i64 - n as i64
                };
                let val = scale * signed as f64;
                k.push(val);
                kd.push(if m == n / 2 { 0.0 } else { val });
            }
            (k, kd)
        };
        let [nx, ny, nz] = grid.n();
        let (kx, kdx) = table(nx);
        let (ky, kdy) = table(ny);
        let (kz, kdz) = table(nz);
        WaveGrid {
            grid,
            k: [kx, ky, kz],
            k_deriv: [kdx, kdy, kdz],
        }
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn k(&self, axis: Axis) -> &[f64] {
        &self.k[axis.index()]
    }

    pub fn k_deriv(&self, axis: Axis) -> &[f64] {
        &self.k_deriv[axis.index()]
    }

    /// Visit every coefficient index with its true wavenumber triple.
    pub(crate) fn for_each(&self, mut f: impl FnMut(usize, f64, f64, f64)) {
        let [nx, ny, nz] = self.grid.n();
        let mut idx = 0;
        for ix in 0..nx {
            let kx = self.k[0][ix];
            for iy in 0..ny {
                let ky = self.k[1][iy];
                for iz in 0..nz {
                    f(idx, kx, ky, self.k[2][iz]);
                    idx += 1;
                }
            }
        }
    }

    /// Same, with the Nyquist-zeroed derivative wavenumbers.
    pub(crate) fn for_each_deriv(&self, mut f: impl FnMut(usize, f64, f64, f64)) {
        let [nx, ny, nz] = self.grid.n();
        let mut idx = 0;
        for ix in 0..nx {
            let kx = self.k_deriv[0][ix];
            for iy in 0..ny {
                let ky = self.k_deriv[1][iy];
                for iz in 0..nz {
                    f(idx, kx, ky, self.k_deriv[2][iz]);
                    idx += 1;
                }
            }
        }
    }
}

fn plan_cache() -> &'static Mutex<HashMap<(usize, bool), Arc<dyn Fft<f64>>>> {
    static PLANS: OnceLock<Mutex<HashMap<(usize, bool), Arc<dyn Fft<f64>>>>> = OnceLock::new();
    PLANS.get_or_init(|| Mutex::new(HashMap::new()))
}

fn plan(len: usize, inverse: bool) -> Arc<dyn Fft<f64>> {
    let mut cache = plan_cache().lock().unwrap();
    cache
        .entry((len, inverse))
        .or_insert_with(|| {
            let mut planner = FftPlanner::new();
            if inverse {
                planner.plan_fft_inverse(len)
            } else {
                planner.plan_fft_forward(len)
            }
        })
        .clone()
}

/// In-place 3D transform: three rounds of batched line FFTs along the
/// fastest axis, each followed by the cyclic permutation
/// [a][b][c] -> [c][a][b], which restores the original layout after the
/// third round.
fn fft3(buf: &mut Vec<C64>, grid: Grid, inverse: bool) {
    let mut dims = grid.n();
    let n = grid.npts();
    let mut tmp = CBuf::zeros(n);
    let mut scratch = CBuf::zeros(0);
    for _ in 0..3 {
        let [na, nb, nc] = dims;
        let fft = plan(nc, inverse);
        scratch.resize(fft.get_inplace_scratch_len(), C64::new(0.0, 0.0));
        fft.process_with_scratch(buf, &mut scratch);
        // permute [a][b][c] -> [c][a][b] with sequential writes; the
        // strided reads prefetch well
        let mut dst = 0;
        for c in 0..nc {
            for a in 0..na {
                let row = a * nb * nc + c;
                for b in 0..nb {
                    tmp[dst] = buf[row + b * nc];
                    dst += 1;
                }
            }
        }
        std::mem::swap(buf, &mut tmp);
        dims = [nc, na, nb];
    }
    if !inverse {
        let norm = 1.0 / n as f64;
        for v in buf.iter_mut() {
            *v *= norm;
        }
    }
}

pub(crate) fn forward_raw(grid: Grid, values: &[f64]) -> CBuf {
    let mut buf = CBuf::from_iter_exact(values.len(), values.iter().map(|&v| C64::new(v, 0.0)));
    fft3(&mut buf, grid, false);
    buf
}

pub(crate) fn inverse_raw(grid: Grid, coeffs: &[C64]) -> FBuf {
    let mut buf = CBuf::from_iter_exact(coeffs.len(), coeffs.iter().copied());
    fft3(&mut buf, grid, true);
    FBuf::from_iter_exact(buf.len(), buf.iter().map(|c| c.re))
}

/// Forward transform; any grid accepted by [`Grid::new`] is supported.
pub fn dft_forward(f: &ScalarField) -> SpectrumField {
    SpectrumField {
        grid: f.grid(),
        coeffs: forward_raw(f.grid(), f.values()).into_vec(),
    }
}

/// Inverse transform back to a real field (real part of the complex
/// inverse; for Hermitian spectra the imaginary part is roundoff).
pub fn dft_inverse(spec: &SpectrumField) -> ScalarField {
    ScalarField::from_values(spec.grid, inverse_raw(spec.grid, &spec.coeffs).into_vec()).unwrap()
}

/// Evaluate three independent buffer-producing jobs in parallel. Each job
/// writes its own output and shares nothing, so results are bit-identical
/// to the sequential order regardless of scheduling.
pub(crate) fn par3<T: Send>(f: impl Fn(usize) -> T + Sync) -> [T; 3] {
    let ((a, b), c) = rayon::join(|| rayon::join(|| f(0), || f(1)), || f(2));
    [a, b, c]
}

pub(crate) fn forward_vector(u: &VectorField) -> [CBuf; 3] {
    let g = u.grid();
    par3(|i| forward_raw(g, u[i].values()))
}

pub(crate) fn inverse_vector(grid: Grid, spec: &[CBuf; 3]) -> VectorField {
    let fields =
        par3(|i| ScalarField::from_values(grid, inverse_raw(grid, &spec[i]).into_vec()).unwrap());
    VectorField::new(fields).unwrap()
}

/// Multiply by i·k_axis with the Nyquist plane zeroed.
pub(crate) fn deriv_coeffs(wave: &WaveGrid, coeffs: &[C64], axis: Axis) -> CBuf {
    let [nx, ny, nz] = wave.grid.n();
    let kd = &wave.k_deriv[axis.index()];
    let mut out = CBuf::zeros(0);
    out.reserve(coeffs.len());
    let mut idx = 0;
    for ix in 0..nx {
        for iy in 0..ny {
            for iz in 0..nz {
                let k = match axis {
                    Axis::X => kd[ix],
                    Axis::Y => kd[iy],
                    Axis::Z => kd[iz],
                };
                let c = coeffs[idx];
                out.push(C64::new(-k * c.im, k * c.re));
                idx += 1;
            }
        }
    }
    out
}

/// Spectral derivative along one axis; exact for band-limited fields.
pub fn derivative(f: &ScalarField, axis: Axis) -> ScalarField {
    let wave = WaveGrid::new(f.grid());
    let spec = forward_raw(f.grid(), f.values());
    let d = deriv_coeffs(&wave, &spec, axis);
    ScalarField::from_values(f.grid(), inverse_raw(f.grid(), &d).into_vec()).unwrap()
}

/// Zero every coefficient with |k_i·L/2π| > n_i/3 on any axis (two-thirds
/// rule for quadratic products). Idempotent.
pub fn dealias_23(spec: &SpectrumField) -> SpectrumField {
    let mut out = spec.clone();
    dealias_raw(spec.grid, out.coeffs_mut());
    out
}

pub(crate) fn dealias_raw(grid: Grid, coeffs: &mut [C64]) {
    let [nx, ny, nz] = grid.n();
    let keep = |m: usize, n: usize| -> bool {
        let signed = if m < n / 2 {
            m as i64
        } else {
            m as i64 - n as i64
        };
        // |k| > n/3 cut, in exact integer arithmetic: 3|k| > n
        3 * signed.unsigned_abs() as usize <= n
    };
    let mut idx = 0;
    for ix in 0..nx {
        let kx_ok = keep(ix, nx);
        for iy in 0..ny {
            let ky_ok = kx_ok && keep(iy, ny);
            for iz in 0..nz {
                if !(ky_ok && keep(iz, nz)) {
                    coeffs[idx] = C64::new(0.0, 0.0);
                }
                idx += 1;
            }
        }
    }
}

/// Zero the Nyquist planes k_i = -n_i/2.
pub(crate) fn zero_nyquist(grid: Grid, coeffs: &mut [C64]) {
    let [nx, ny, nz] = grid.n();
    let mut idx = 0;
    for ix in 0..nx {
        for iy in 0..ny {
            for iz in 0..nz {
                if ix == nx / 2 || iy == ny / 2 || iz == nz / 2 {
                    coeffs[idx] = C64::new(0.0, 0.0);
                }
                idx += 1;
            }
        }
    }
}

/// û ← û - k(k·û)/|k|² for k ≠ 0; the mean mode is untouched. Uses the
/// Nyquist-zeroed wavenumbers so the projection annihilates exactly the
/// divergence the derivative operator measures.
pub(crate) fn project_raw(wave: &WaveGrid, spec: &mut [CBuf; 3]) {
    let [nx, ny, nz] = wave.grid.n();
    let mut idx = 0;
    for ix in 0..nx {
        let kx = wave.k_deriv[0][ix];
        for iy in 0..ny {
            let ky = wave.k_deriv[1][iy];
            for iz in 0..nz {
                let kz = wave.k_deriv[2][iz];
                let k2 = kx * kx + ky * ky + kz * kz;
                if k2 > 0.0 {
                    let dot = kx * spec[0][idx] + ky * spec[1][idx] + kz * spec[2][idx];
                    let f = dot / k2;
                    spec[0][idx] -= kx * f;
                    spec[1][idx] -= ky * f;
                    spec[2][idx] -= kz * f;
                }
                idx += 1;
            }
        }
    }
}

/// Leray projection onto divergence-free fields.
pub fn leray_project(u: &VectorField) -> VectorField {
    let wave = WaveGrid::new(u.grid());
    let mut spec = forward_vector(u);
    project_raw(&wave, &mut spec);
    inverse_vector(u.grid(), &spec)
}

/// Max magnitude over modes of the spectral divergence i·k_d·û.
pub(crate) fn divergence_max_raw(wave: &WaveGrid, spec: &[CBuf; 3]) -> f64 {
    let mut m = 0.0_f64;
    wave.for_each_deriv(|idx, kx, ky, kz| {
        let d: C64 = kx * spec[0][idx] + ky * spec[1][idx] + kz * spec[2][idx];
        m = m.max(d.norm_sqr());
    });
    m.sqrt()
}

/// Max spectral divergence magnitude of a vector field.
pub fn divergence_max(u: &VectorField) -> f64 {
    let wave = WaveGrid::new(u.grid());
    let spec = forward_vector(u);
    divergence_max_raw(&wave, &spec)
}

fn require_solenoidal(name: &str, wave: &WaveGrid, spec: &[CBuf; 3], norm2: f64) -> Result<()> {
    let div = divergence_max_raw(wave, spec);
    let tol = 1e-8 * norm2 + 1e-14;
    if div > tol {
        return Err(MhdError::NotSolenoidal(format!(
            "{name}: max spectral divergence {div:.3e} exceeds tolerance {tol:.3e}"
        )));
    }
    Ok(())
}

fn l2_norm_spec(grid: Grid, spec: &[CBuf; 3]) -> f64 {
    let mut s = 0.0;
    for comp in spec {
        s += crate::grid::block_pairwise_sum(comp.len(), |i| comp[i].norm_sqr());
    }
    (s * grid.volume()).sqrt()
}

/// Solve Δp = -∇·(w⁻·∇w⁺) for the pressure: p̂ = -(k_i k_j/|k|²)·F[w⁻_j w⁺_i]
/// for k ≠ 0, gauge p̂(0) = 0. Inputs must be divergence-free; the quadratic
/// products are dealiased before the solve when `dealias` is set, and their
/// Nyquist planes are always dropped (the double derivative has no
/// well-defined sign there).
pub fn pressure_solve(w_minus: &VectorField, w_plus: &VectorField, dealias: bool) -> Result<ScalarField> {
    let grid = w_minus.grid();
    if w_plus.grid() != grid {
        return Err(MhdError::GridMismatch(
            "pressure_solve arguments on different grids".into(),
        ));
    }
    let wave = WaveGrid::new(grid);
    let spec_m = forward_vector(w_minus);
    let spec_p = forward_vector(w_plus);
    require_solenoidal("w_minus", &wave, &spec_m, l2_norm_spec(grid, &spec_m))?;
    require_solenoidal("w_plus", &wave, &spec_p, l2_norm_spec(grid, &spec_p))?;
    pressure_solve_unchecked(w_minus, w_plus, dealias)
}

/// Pressure solve without the solenoidality precondition check, for callers
/// that have already verified the state (the monitor loop re-solves the
/// pressure at every sample).
pub(crate) fn pressure_solve_unchecked(
    w_minus: &VectorField,
    w_plus: &VectorField,
    dealias: bool,
) -> Result<ScalarField> {
    let grid = w_minus.grid();
    let wave = WaveGrid::new(grid);
    let n = grid.npts();
    // Transform the nine products w-_j w+_i (independent, parallel), then
    // accumulate k_i k_j T_ij in a fixed ij order so rounding is stable.
    use rayon::prelude::*;
    let pairs: Vec<(usize, usize)> = (0..3).flat_map(|i| (0..3).map(move |j| (i, j))).collect();
    let transforms: Vec<CBuf> = pairs
        .par_iter()
        .map(|&(i, j)| {
            let wi = w_plus[i].values();
            let wj = w_minus[j].values();
            let prod = FBuf::from_iter_exact(n, (0..n).map(|idx| wj[idx] * wi[idx]));
            let mut t = forward_raw(grid, &prod);
            if dealias {
                dealias_raw(grid, &mut t);
            }
            zero_nyquist(grid, &mut t);
            t
        })
        .collect();
    let mut acc = CBuf::zeros(n);
    for (&(i, j), t) in pairs.iter().zip(&transforms) {
        let (ai, aj) = (Axis::ALL[i], Axis::ALL[j]);
        let (ki_tab, kj_tab) = (wave.k(ai), wave.k(aj));
        let [nx, ny, nz] = grid.n();
        let mut idx = 0;
        for ix in 0..nx {
            for iy in 0..ny {
                for iz in 0..nz {
                    let m = [ix, iy, iz];
                    let ki = ki_tab[m[i]];
                    let kj = kj_tab[m[j]];
                    acc[idx] += ki * kj * t[idx];
                    idx += 1;
                }
            }
        }
    }
    let mut phat = CBuf::zeros(n);
    wave.for_each(|idx, kx, ky, kz| {
        let k2 = kx * kx + ky * ky + kz * kz;
        if k2 > 0.0 {
            phat[idx] = -acc[idx] / k2;
        }
    });
    Ok(ScalarField::from_values(grid, inverse_raw(grid, &phat).into_vec()).unwrap())
}

#[doc(hidden)]
pub fn _bench_fft_pair(grid: Grid, values: &[f64], iters: usize) -> f64 {
    let t0 = std::time::Instant::now();
    let mut sink = 0.0;
    for _ in 0..iters {
        let spec = forward_raw(grid, values);
        let back = inverse_raw(grid, &spec);
        sink += back[1];
    }
    let dt = t0.elapsed().as_secs_f64() / iters as f64;
    if sink.is_nan() { eprintln!("nan"); }
    dt
}

/// Hermitian-symmetry defect max |c(k) - conj(c(-k))| of a spectrum.
pub fn hermitian_defect(spec: &SpectrumField) -> f64 {
    let [nx, ny, nz] = spec.grid.n();
    let mut worst = 0.0_f64;
    for ix in 0..nx {
        let cx = (nx - ix) % nx;
        for iy in 0..ny {
            let cy = (ny - iy) % ny;
            for iz in 0..nz {
                let cz = (nz - iz) % nz;
                let a = spec.coeffs[spec.grid.index(ix, iy, iz)];
                let b = spec.coeffs[spec.grid.index(cx, cy, cz)];
                worst = worst.max((a - b.conj()).norm());
            }
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{inner_product, lp_norm};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn grid16() -> Grid {
        Grid::cube(16).unwrap()
    }

    fn random_field(grid: Grid, seed: u64) -> ScalarField {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut f = ScalarField::zeros(grid);
        for v in f.values_mut() {
            *v = rng.gen::<f64>() * 2.0 - 1.0;
        }
        f
    }

    fn random_vector(grid: Grid, seed: u64) -> VectorField {
        VectorField::new([
            random_field(grid, seed),
            random_field(grid, seed + 1),
            random_field(grid, seed + 2),
        ])
        .unwrap()
    }

    #[test]
    fn round_trip_random_field() {
        let grid = grid16();
        let f = random_field(grid, 1);
        let back = dft_inverse(&dft_forward(&f));
        let err = f.subbed(&back).max_abs();
        assert!(err <= 1e-12, "round trip error {err}");
    }

    #[test]
    fn sine_coefficients_and_parseval() {
        let grid = grid16();
        let f = ScalarField::from_fn(grid, |x, _, _| x.sin());
        let spec = dft_forward(&f);
        let plus = spec.coeff_at([1, 0, 0]);
        let minus = spec.coeff_at([-1, 0, 0]);
        assert!((plus - C64::new(0.0, -0.5)).norm() <= 1e-14, "{plus}");
        assert!((minus - C64::new(0.0, 0.5)).norm() <= 1e-14, "{minus}");
        // everything else is roundoff
        let mut residual = 0.0_f64;
        for (idx, c) in spec.coeffs().iter().enumerate() {
            if idx != grid.index(1, 0, 0) && idx != grid.index(15, 0, 0) {
                residual = residual.max(c.norm());
            }
        }
        assert!(residual <= 1e-15);
        // Parseval: ||sin x||_2^2 = vol * sum |c|^2 = 4 pi^3
        let sum_sq: f64 = spec.coeffs().iter().map(|c| c.norm_sqr()).sum();
        let lhs = lp_norm(&f, 2.0).unwrap().powi(2);
        let rhs = grid.volume() * sum_sq;
        assert!((lhs - rhs).abs() <= 1e-12 * rhs);
        assert!((lhs - 4.0 * PI.powi(3)).abs() <= 1e-12 * lhs);
    }

    #[test]
    fn parseval_random_field() {
        let grid = grid16();
        let f = random_field(grid, 5);
        let spec = dft_forward(&f);
        let sum_sq: f64 = spec.coeffs().iter().map(|c| c.norm_sqr()).sum();
        let lhs = lp_norm(&f, 2.0).unwrap().powi(2);
        let rhs = grid.volume() * sum_sq;
        assert!((lhs - rhs).abs() <= 1e-12 * rhs.abs());
    }

    #[test]
    fn derivative_analytic_cases() {
        let grid = grid16();
        let f = ScalarField::from_fn(grid, |x, _, _| x.sin());
        let d = derivative(&f, Axis::X);
        let expect = ScalarField::from_fn(grid, |x, _, _| x.cos());
        assert!(d.subbed(&expect).max_abs() <= 1e-12);

        let g = ScalarField::from_fn(grid, |x, _, _| (3.0 * x).cos());
        let dg = derivative(&g, Axis::X);
        let expect = ScalarField::from_fn(grid, |x, _, _| -3.0 * (3.0 * x).sin());
        assert!(dg.subbed(&expect).max_abs() <= 1e-12);
    }

    #[test]
    fn z_derivative_of_z_independent_field_is_exactly_zero() {
        let grid = grid16();
        let f = ScalarField::from_fn(grid, |x, y, _| (2.0 * x).sin() + y.cos());
        let d = derivative(&f, Axis::Z);
        assert_eq!(d.max_abs(), 0.0);
    }

    #[test]
    fn hermitian_symmetry_preserved_by_operations() {
        let grid = grid16();
        let f = random_field(grid, 11);
        let spec = dft_forward(&f);
        assert!(hermitian_defect(&spec) <= 1e-13);
        let d = dft_forward(&derivative(&f, Axis::Y));
        assert!(hermitian_defect(&d) <= 1e-13);
        let da = dealias_23(&spec);
        assert!(hermitian_defect(&da) <= 1e-13);
    }

    #[test]
    fn leray_kills_gradients_and_keeps_solenoidal_fields() {
        let grid = grid16();
        let gradient = VectorField::from_fn(grid, |x, y, z| {
            [
                x.cos() * y.sin() * z.sin(),
                x.sin() * y.cos() * z.sin(),
                x.sin() * y.sin() * z.cos(),
            ]
        });
        let projected = leray_project(&gradient);
        assert!(projected.max_abs() <= 1e-12);

        let tg = VectorField::from_fn(grid, |x, y, _| [x.cos() * y.sin(), -x.sin() * y.cos(), 0.0]);
        let kept = leray_project(&tg);
        assert!(kept.subbed(&tg).max_abs() <= 1e-12);
    }

    #[test]
    fn leray_is_idempotent_and_solenoidal() {
        let grid = grid16();
        let u = random_vector(grid, 21);
        let p1 = leray_project(&u);
        let p2 = leray_project(&p1);
        assert!(p2.subbed(&p1).max_abs() <= 1e-12);
        let n2 = crate::grid::vector_lp_norm(&u, 2.0).unwrap();
        assert!(divergence_max(&p1) <= 1e-11 * n2);
    }

    #[test]
    fn derivative_commutes_with_projection_on_solenoidal_fields() {
        let grid = grid16();
        let u = leray_project(&random_vector(grid, 33));
        for axis in Axis::ALL {
            let a = leray_project(&VectorField::new([
                derivative(&u[0], axis),
                derivative(&u[1], axis),
                derivative(&u[2], axis),
            ])
            .unwrap());
            let b = VectorField::new([
                derivative(&u[0], axis),
                derivative(&u[1], axis),
                derivative(&u[2], axis),
            ])
            .unwrap();
            assert!(a.subbed(&b).max_abs() <= 1e-11);
        }
    }

    #[test]
    fn dealias_thresholds() {
        let grid = grid16();
        // a mode at n/4 survives
        let low = ScalarField::from_fn(grid, |x, _, _| (4.0 * x).cos());
        let kept = dealias_23(&dft_forward(&low));
        assert!((kept.coeff_at([4, 0, 0]).re - 0.5).abs() <= 1e-13);
        // k = n/2 - 1 = 7 > 16/3 is zeroed
        let high = ScalarField::from_fn(grid, |x, _, _| (7.0 * x).cos());
        let cut = dealias_23(&dft_forward(&high));
        assert_eq!(cut.coeff_at([7, 0, 0]), C64::new(0.0, 0.0));
        // idempotent, bit-exact
        let f = random_field(grid, 44);
        let once = dealias_23(&dft_forward(&f));
        let twice = dealias_23(&once);
        assert_eq!(once.coeffs(), twice.coeffs());
    }

    #[test]
    fn pressure_taylor_green_oracle() {
        let grid = Grid::cube(32).unwrap();
        let u = VectorField::from_fn(grid, |x, y, _| [x.cos() * y.sin(), -x.sin() * y.cos(), 0.0]);
        // b = 0, so w+ = w- = u
        let p = pressure_solve(&u, &u, true).unwrap();
        let expect =
            ScalarField::from_fn(grid, |x, y, _| -0.25 * ((2.0 * x).cos() + (2.0 * y).cos()));
        let diff = lp_norm(&p.subbed(&expect), 2.0).unwrap();
        assert!(diff <= 1e-10, "pressure error {diff}");

        // Poisson residual: || lap p + div(u . grad u) ||_2
        let wave = WaveGrid::new(grid);
        let phat = forward_raw(grid, p.values());
        let mut lap = vec![C64::new(0.0, 0.0); grid.npts()];
        wave.for_each_deriv(|idx, kx, ky, kz| {
            lap[idx] = -(kx * kx + ky * ky + kz * kz) * phat[idx];
        });
        let lap_p = ScalarField::from_values(grid, inverse_raw(grid, &lap)).unwrap();
        // div(u . grad u) assembled spectrally from the dealiased products
        let mut rhs = vec![C64::new(0.0, 0.0); grid.npts()];
        for i in 0..3 {
            for j in 0..3 {
                let prod: Vec<f64> = u[j]
                    .values()
                    .iter()
                    .zip(u[i].values())
                    .map(|(a, b)| a * b)
                    .collect();
                let mut t = forward_raw(grid, &prod);
                dealias_raw(grid, &mut t);
                let (ai, aj) = (Axis::ALL[i], Axis::ALL[j]);
                let d1 = deriv_coeffs(&wave, &t, aj);
                let d2 = deriv_coeffs(&wave, &d1, ai);
                for (r, d) in rhs.iter_mut().zip(d2) {
                    *r += d;
                }
            }
        }
        let div_flux = ScalarField::from_values(grid, inverse_raw(grid, &rhs)).unwrap();
        let residual = lp_norm(&lap_p.added(&div_flux), 2.0).unwrap();
        assert!(residual <= 1e-10, "poisson residual {residual}");
    }

    #[test]
    fn pressure_trivial_cases() {
        let grid = grid16();
        let zero = VectorField::zeros(grid);
        let p = pressure_solve(&zero, &zero, true).unwrap();
        assert_eq!(p.max_abs(), 0.0);

        let c = VectorField::from_fn(grid, |_, _, _| [1.0, -2.0, 0.5]);
        let p = pressure_solve(&c, &c, true).unwrap();
        assert!(p.max_abs() <= 1e-13);
    }

    #[test]
    fn pressure_has_zero_mean_gauge() {
        let grid = grid16();
        let u = leray_project(&random_vector(grid, 55));
        let p = pressure_solve(&u, &u, true).unwrap();
        let mean = inner_product(&p, &ScalarField::constant(grid, 1.0)).unwrap() / grid.volume();
        assert!(mean.abs() <= 1e-13 * (1.0 + p.max_abs()));
    }

    #[test]
    fn pressure_rejects_non_solenoidal_input() {
        let grid = grid16();
        let u = VectorField::from_fn(grid, |x, _, _| [x.sin(), 0.0, 0.0]);
        assert!(matches!(
            pressure_solve(&u, &u, true),
            Err(MhdError::NotSolenoidal(_))
        ));
    }
}
