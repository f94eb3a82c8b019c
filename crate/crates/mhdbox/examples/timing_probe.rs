use mhdbox::grid::{Grid, ScalarField};
fn main() {
    let g = Grid::cube(32).unwrap();
    let f = ScalarField::from_fn(g, |x, y, z| (x + 0.3 * y).sin() * (2.0 * z).cos());
    let _ = mhdbox::spectral::_bench_fft_pair(g, f.values(), 10); // warm
    let dt = mhdbox::spectral::_bench_fft_pair(g, f.values(), 300);
    println!("in-situ fwd+inv pair: {:.1} us -> per-FFT ~{:.1} us", dt * 1e6, dt * 1e6 / 2.0);
}
