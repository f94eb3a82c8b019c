//! Periodic-box geometry, real field storage, pointwise algebra and
//! Lᵖ-norm quadrature.
//!
//! Storage is z-fastest: `index = (ix*ny + iy)*nz + iz`. All integrals use
//! the uniform Riemann sum with weight `vol/npts`, i.e. the periodic
//! trapezoid rule, which integrates trigonometric polynomials below Nyquist
//! exactly. Reductions are block-pairwise sums so results are bit-identical
//! across runs.

use crate::error::{MhdError, Result};

/// Coordinate axis of the box.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub const ALL: [Axis; 3] = [Axis::X, Axis::Y, Axis::Z];

    pub fn index(self) -> usize {
        match self {
            Axis::X => 0,
            Axis::Y => 1,
            Axis::Z => 2,
        }
    }
}

/// Periodic cube [0, L)³ sampled on nx × ny × nz points.
///
/// Each nᵢ must be even and ≥ 4 (the transforms accept any such size; powers
/// of two and other smooth sizes are fastest). The spacing L/nᵢ is always
/// derived from (L, nᵢ), never stored, so spacingᵢ·nᵢ = L by construction.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Grid {
    n: [usize; 3],
    length: f64,
}

impl Grid {
    pub fn new(n: [usize; 3], length: f64) -> Result<Grid> {
        for (axis, &ni) in n.iter().enumerate() {
            if ni < 4 || ni % 2 != 0 {
                return Err(MhdError::UnsupportedGrid(format!(
                    "n[{axis}] = {ni}; each axis needs an even point count >= 4"
                )));
            }
        }
        if !(length > 0.0) || !length.is_finite() {
            return Err(MhdError::UnsupportedGrid(format!(
                "box length must be positive and finite, got {length}"
            )));
        }
        n[0].checked_mul(n[1])
            .and_then(|p| p.checked_mul(n[2]))
            .and_then(|p| p.checked_mul(16))
            .ok_or_else(|| {
                MhdError::UnsupportedGrid(format!("{}x{}x{} points do not fit in memory", n[0], n[1], n[2]))
            })?;
        Ok(Grid { n, length })
    }

    /// Cube with the default box side 2π.
    pub fn cube(n: usize) -> Result<Grid> {
        Grid::new([n, n, n], std::f64::consts::TAU)
    }

    pub fn n(&self) -> [usize; 3] {
        self.n
    }

    pub fn nx(&self) -> usize {
        self.n[0]
    }

    pub fn ny(&self) -> usize {
        self.n[1]
    }

    pub fn nz(&self) -> usize {
        self.n[2]
    }

    /// Total number of grid points.
    pub fn npts(&self) -> usize {
        self.n[0] * self.n[1] * self.n[2]
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn volume(&self) -> f64 {
        self.length * self.length * self.length
    }

    /// Quadrature weight of one point, vol/npts.
    pub fn cell_volume(&self) -> f64 {
        self.volume() / self.npts() as f64
    }

    pub fn spacing(&self, axis: Axis) -> f64 {
        self.length / self.n[axis.index()] as f64
    }

    /// Coordinate of the i-th point along an axis.
    pub fn coord(&self, axis: Axis, i: usize) -> f64 {
        i as f64 * self.spacing(axis)
    }

    pub fn index(&self, ix: usize, iy: usize, iz: usize) -> usize {
        (ix * self.n[1] + iy) * self.n[2] + iz
    }
}

/// Real scalar samples on a grid, z-fastest.
#[derive(Clone, Debug, PartialEq)]
pub struct ScalarField {
    grid: Grid,
    values: Vec<f64>,
}

impl ScalarField {
    pub fn zeros(grid: Grid) -> ScalarField {
        ScalarField {
            grid,
            values: vec![0.0; grid.npts()],
        }
    }

    pub fn constant(grid: Grid, c: f64) -> ScalarField {
        ScalarField {
            grid,
            values: vec![c; grid.npts()],
        }
    }

    /// Sample a function of the physical coordinates.
    pub fn from_fn(grid: Grid, f: impl Fn(f64, f64, f64) -> f64) -> ScalarField {
        let [nx, ny, nz] = grid.n();
        let mut values = Vec::with_capacity(grid.npts());
        for ix in 0..nx {
            let x = grid.coord(Axis::X, ix);
            for iy in 0..ny {
                let y = grid.coord(Axis::Y, iy);
                for iz in 0..nz {
                    values.push(f(x, y, grid.coord(Axis::Z, iz)));
                }
            }
        }
        ScalarField { grid, values }
    }

    pub fn from_values(grid: Grid, values: Vec<f64>) -> Result<ScalarField> {
        if values.len() != grid.npts() {
            return Err(MhdError::GridMismatch(format!(
                "value buffer has {} entries, grid has {} points",
                values.len(),
                grid.npts()
            )));
        }
        Ok(ScalarField { grid, values })
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn scaled(&self, c: f64) -> ScalarField {
        ScalarField {
            grid: self.grid,
            values: self.values.iter().map(|v| c * v).collect(),
        }
    }

    pub fn added(&self, other: &ScalarField) -> ScalarField {
        assert_eq!(self.grid, other.grid, "field algebra on mismatched grids");
        ScalarField {
            grid: self.grid,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    pub fn subbed(&self, other: &ScalarField) -> ScalarField {
        assert_eq!(self.grid, other.grid, "field algebra on mismatched grids");
        ScalarField {
            grid: self.grid,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }
}

/// Three scalar components sharing one grid.
#[derive(Clone, Debug, PartialEq)]
pub struct VectorField {
    components: [ScalarField; 3],
}

impl VectorField {
    pub fn new(components: [ScalarField; 3]) -> Result<VectorField> {
        let g = components[0].grid();
        if components[1].grid() != g || components[2].grid() != g {
            return Err(MhdError::GridMismatch(
                "vector components live on different grids".into(),
            ));
        }
        Ok(VectorField { components })
    }

    pub fn zeros(grid: Grid) -> VectorField {
        VectorField {
            components: [
                ScalarField::zeros(grid),
                ScalarField::zeros(grid),
                ScalarField::zeros(grid),
            ],
        }
    }

    pub fn from_fn(grid: Grid, f: impl Fn(f64, f64, f64) -> [f64; 3]) -> VectorField {
        let fx = ScalarField::from_fn(grid, |x, y, z| f(x, y, z)[0]);
        let fy = ScalarField::from_fn(grid, |x, y, z| f(x, y, z)[1]);
        let fz = ScalarField::from_fn(grid, |x, y, z| f(x, y, z)[2]);
        VectorField {
            components: [fx, fy, fz],
        }
    }

    pub fn grid(&self) -> Grid {
        self.components[0].grid()
    }

    pub fn component(&self, axis: Axis) -> &ScalarField {
        &self.components[axis.index()]
    }

    pub fn components(&self) -> &[ScalarField; 3] {
        &self.components
    }

    pub fn components_mut(&mut self) -> &mut [ScalarField; 3] {
        &mut self.components
    }

    pub fn scaled(&self, c: f64) -> VectorField {
        VectorField {
            components: [
                self.components[0].scaled(c),
                self.components[1].scaled(c),
                self.components[2].scaled(c),
            ],
        }
    }

    pub fn added(&self, other: &VectorField) -> VectorField {
        VectorField {
            components: [
                self.components[0].added(&other.components[0]),
                self.components[1].added(&other.components[1]),
                self.components[2].added(&other.components[2]),
            ],
        }
    }

    pub fn subbed(&self, other: &VectorField) -> VectorField {
        VectorField {
            components: [
                self.components[0].subbed(&other.components[0]),
                self.components[1].subbed(&other.components[1]),
                self.components[2].subbed(&other.components[2]),
            ],
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.components
            .iter()
            .fold(0.0_f64, |m, c| m.max(c.max_abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.components.iter().all(|c| c.is_finite())
    }
}

impl std::ops::Index<usize> for VectorField {
    type Output = ScalarField;
    fn index(&self, i: usize) -> &ScalarField {
        &self.components[i]
    }
}

/// Deterministic sum: sequential 256-element blocks, then a pairwise
/// reduction of the block sums. Bit-identical across runs and accurate to
/// O(log n) rounding.
pub(crate) fn block_pairwise_sum(n: usize, mut term: impl FnMut(usize) -> f64) -> f64 {
    const BLOCK: usize = 256;
    if n == 0 {
        return 0.0;
    }
    let nblocks = n.div_ceil(BLOCK);
    let mut partial = Vec::with_capacity(nblocks);
    for b in 0..nblocks {
        let start = b * BLOCK;
        let end = (start + BLOCK).min(n);
        let mut acc = 0.0;
        for i in start..end {
            acc += term(i);
        }
        partial.push(acc);
    }
    pairwise(&partial)
}

fn pairwise(xs: &[f64]) -> f64 {
    if xs.len() <= 8 {
        let mut acc = 0.0;
        for x in xs {
            acc += x;
        }
        acc
    } else {
        let mid = xs.len() / 2;
        pairwise(&xs[..mid]) + pairwise(&xs[mid..])
    }
}

fn check_exponent(p: f64) -> Result<()> {
    if !(p >= 1.0) {
        return Err(MhdError::InvalidExponent(format!(
            "L^p norm needs p >= 1 (or p = inf), got {p}"
        )));
    }
    Ok(())
}

/// |v|^p with fast paths for the common exponents.
#[inline]
fn abs_pow(v: f64, p: f64) -> f64 {
    if p == 2.0 {
        v * v
    } else if p == 1.0 {
        v.abs()
    } else if p == 4.0 {
        let s = v * v;
        s * s
    } else {
        v.abs().powf(p)
    }
}

fn finish_norm(sum: f64, cell: f64, p: f64) -> f64 {
    let s = sum * cell;
    if p == 2.0 {
        s.sqrt()
    } else if p == 1.0 {
        s
    } else {
        s.powf(p.recip())
    }
}

/// Lᵖ norm of a scalar field by the uniform Riemann sum; p = inf gives the
/// grid maximum of |f|.
pub fn lp_norm(f: &ScalarField, p: f64) -> Result<f64> {
    check_exponent(p)?;
    let vals = f.values();
    if p.is_infinite() {
        let mut m = 0.0_f64;
        for &v in vals {
            if !v.is_finite() {
                return Err(MhdError::DegenerateInput("non-finite sample in field".into()));
            }
            m = m.max(v.abs());
        }
        return Ok(m);
    }
    let mut bad = false;
    let sum = block_pairwise_sum(vals.len(), |i| {
        let v = vals[i];
        if !v.is_finite() {
            bad = true;
        }
        abs_pow(v, p)
    });
    if bad {
        return Err(MhdError::DegenerateInput("non-finite sample in field".into()));
    }
    Ok(finish_norm(sum, f.grid().cell_volume(), p))
}

/// Lᵖ norm of the pointwise Euclidean magnitude of a component list. With
/// three components this is the vector magnitude; with nine it is the
/// Frobenius magnitude of a tensor field.
pub fn magnitude_lp_norm(grid: Grid, parts: &[&[f64]], p: f64) -> Result<f64> {
    check_exponent(p)?;
    let n = grid.npts();
    for part in parts {
        assert_eq!(part.len(), n, "component length mismatch");
    }
    let mag_sq = |i: usize| -> f64 {
        let mut q = 0.0;
        for part in parts {
            let v = part[i];
            q += v * v;
        }
        q
    };
    if p.is_infinite() {
        let mut m = 0.0_f64;
        for i in 0..n {
            let q = mag_sq(i);
            if !q.is_finite() {
                return Err(MhdError::DegenerateInput("non-finite sample in field".into()));
            }
            m = m.max(q);
        }
        return Ok(m.sqrt());
    }
    let mut bad = false;
    let sum = block_pairwise_sum(n, |i| {
        let q = mag_sq(i);
        if !q.is_finite() {
            bad = true;
        }
        if p == 2.0 {
            q
        } else if p == 4.0 {
            q * q
        } else {
            q.sqrt().powf(p)
        }
    });
    if bad {
        return Err(MhdError::DegenerateInput("non-finite sample in field".into()));
    }
    Ok(finish_norm(sum, grid.cell_volume(), p))
}

/// Lᵖ norm of the pointwise Euclidean magnitude |u(x)|.
pub fn vector_lp_norm(u: &VectorField, p: f64) -> Result<f64> {
    magnitude_lp_norm(
        u.grid(),
        &[u[0].values(), u[1].values(), u[2].values()],
        p,
    )
}

/// ⟨f, g⟩ = Σ f·g · vol/npts.
pub fn inner_product(f: &ScalarField, g: &ScalarField) -> Result<f64> {
    if f.grid() != g.grid() {
        return Err(MhdError::GridMismatch(
            "inner product of fields on different grids".into(),
        ));
    }
    let (a, b) = (f.values(), g.values());
    let sum = block_pairwise_sum(a.len(), |i| a[i] * b[i]);
    Ok(sum * f.grid().cell_volume())
}

/// Componentwise inner product of vector fields.
pub fn vector_inner_product(u: &VectorField, v: &VectorField) -> Result<f64> {
    let mut acc = 0.0;
    for i in 0..3 {
        acc += inner_product(&u[i], &v[i])?;
    }
    Ok(acc)
}

/// Plain quadrature of a per-point integrand, Σ f(i) · vol/npts.
pub(crate) fn quadrature(grid: Grid, term: impl FnMut(usize) -> f64) -> f64 {
    block_pairwise_sum(grid.npts(), term) * grid.cell_volume()
}

#[cfg(test)]
mod tests {
    use super::*;
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

    #[test]
    fn grid_rejects_odd_small_and_bad_length() {
        assert!(Grid::new([15, 16, 16], 1.0).is_err());
        assert!(Grid::new([2, 16, 16], 1.0).is_err());
        assert!(Grid::new([16, 16, 16], 0.0).is_err());
        assert!(Grid::new([16, 16, 16], f64::NAN).is_err());
        assert!(Grid::new([16, 8, 4], 1.0).is_ok());
    }

    #[test]
    fn constant_field_l4_norm() {
        // ||2||_4 over [0,2pi)^3 is 2 * (2pi)^(3/4)
        let f = ScalarField::constant(grid16(), 2.0);
        let got = lp_norm(&f, 4.0).unwrap();
        let expect = 2.0 * (2.0 * PI).powf(0.75);
        assert!((got - expect).abs() <= 1e-13 * expect, "{got} vs {expect}");
    }

    #[test]
    fn sine_l2_norm_closed_form() {
        // int sin^2 x over the box = 4 pi^3, so ||sin x||_2 = 2 pi sqrt(pi)
        let f = ScalarField::from_fn(grid16(), |x, _, _| x.sin());
        let got = lp_norm(&f, 2.0).unwrap();
        let expect = 2.0 * PI * PI.sqrt();
        assert!((got - expect).abs() <= 1e-13 * expect, "{got} vs {expect}");
    }

    #[test]
    fn sine_sup_norm_hits_maximizer() {
        // nx divisible by 4 puts a grid point exactly at x = pi/2
        let f = ScalarField::from_fn(grid16(), |x, _, _| x.sin());
        assert_eq!(lp_norm(&f, f64::INFINITY).unwrap(), 1.0);
    }

    #[test]
    fn vector_norm_constant_and_zero() {
        let grid = grid16();
        let u = VectorField::from_fn(grid, |_, _, _| [3.0, 4.0, 0.0]);
        let got = vector_lp_norm(&u, 2.0).unwrap();
        let expect = 5.0 * (2.0 * PI).powf(1.5);
        assert!((got - expect).abs() <= 1e-13 * expect);
        for p in [1.0, 2.0, 4.0, f64::INFINITY] {
            assert_eq!(vector_lp_norm(&VectorField::zeros(grid), p).unwrap(), 0.0);
        }
    }

    #[test]
    fn vector_norm_reduces_to_scalar() {
        let grid = grid16();
        let u = VectorField::from_fn(grid, |x, _, _| [x.sin(), 0.0, 0.0]);
        let expect = 2.0 * PI * PI.sqrt();
        let got = vector_lp_norm(&u, 2.0).unwrap();
        assert!((got - expect).abs() <= 1e-13 * expect);
    }

    #[test]
    fn inner_product_orthogonality_and_self() {
        let grid = grid16();
        let s = ScalarField::from_fn(grid, |x, _, _| x.sin());
        let c = ScalarField::from_fn(grid, |x, _, _| x.cos());
        assert!(inner_product(&s, &c).unwrap().abs() <= 1e-13);
        let n2 = lp_norm(&s, 2.0).unwrap();
        let self_ip = inner_product(&s, &s).unwrap();
        assert!((self_ip - n2 * n2).abs() <= 1e-12 * self_ip);
    }

    #[test]
    fn inner_product_mixed_closed_form() {
        // <sin x, sin x + cos y> = ||sin x||_2^2 = vol/2 = 4 pi^3
        let grid = grid16();
        let s = ScalarField::from_fn(grid, |x, _, _| x.sin());
        let g = ScalarField::from_fn(grid, |x, y, _| x.sin() + y.cos());
        let got = inner_product(&s, &g).unwrap();
        let expect = 4.0 * PI.powi(3);
        assert!((got - expect).abs() <= 1e-12 * expect, "{got} vs {expect}");
    }

    #[test]
    fn inner_product_grid_mismatch() {
        let a = ScalarField::zeros(grid16());
        let b = ScalarField::zeros(Grid::cube(8).unwrap());
        assert!(matches!(
            inner_product(&a, &b),
            Err(MhdError::GridMismatch(_))
        ));
    }

    #[test]
    fn invalid_exponent_and_degenerate_input() {
        let f = ScalarField::zeros(grid16());
        assert!(matches!(
            lp_norm(&f, 0.5),
            Err(MhdError::InvalidExponent(_))
        ));
        assert!(matches!(
            lp_norm(&f, f64::NAN),
            Err(MhdError::InvalidExponent(_))
        ));
        let mut g = ScalarField::zeros(grid16());
        g.values_mut()[7] = f64::NAN;
        assert!(matches!(
            lp_norm(&g, 2.0),
            Err(MhdError::DegenerateInput(_))
        ));
        assert!(matches!(
            lp_norm(&g, f64::INFINITY),
            Err(MhdError::DegenerateInput(_))
        ));
    }

    #[test]
    fn discrete_hoelder_holds_exactly() {
        let grid = Grid::cube(8).unwrap();
        for seed in 0..6 {
            let f = random_field(grid, seed);
            let g = random_field(grid, 100 + seed);
            for (p, q) in [(2.0, 2.0), (3.0, 1.5), (4.0, 4.0 / 3.0), (f64::INFINITY, 1.0)] {
                let lhs = inner_product(&f, &g).unwrap().abs();
                let rhs = lp_norm(&f, p).unwrap() * lp_norm(&g, q).unwrap();
                assert!(lhs <= rhs * (1.0 + 1e-12), "p={p} q={q}: {lhs} > {rhs}");
            }
        }
    }

    #[test]
    fn norm_homogeneity() {
        let grid = Grid::cube(8).unwrap();
        let f = random_field(grid, 3);
        for p in [1.0, 2.0, 3.7, 4.0, f64::INFINITY] {
            let base = lp_norm(&f, p).unwrap();
            for c in [-2.5_f64, 0.125, 1e3] {
                let scaled = lp_norm(&f.scaled(c), p).unwrap();
                assert!(
                    (scaled - c.abs() * base).abs() <= 1e-13 * c.abs() * base,
                    "p={p} c={c}"
                );
            }
        }
    }

    #[test]
    fn sup_norm_dominates_scaled_lp() {
        // ||f||_inf >= ||f||_p / vol^(1/p) holds exactly for the Riemann sum
        let grid = Grid::cube(8).unwrap();
        let f = random_field(grid, 9);
        let sup = lp_norm(&f, f64::INFINITY).unwrap();
        for p in [1.0, 2.0, 3.0, 6.0] {
            let lp = lp_norm(&f, p).unwrap();
            assert!(sup >= lp / grid.volume().powf(p.recip()) - 1e-15);
        }
    }

    #[test]
    fn summation_is_deterministic() {
        let grid = grid16();
        let f = random_field(grid, 42);
        let g = f.clone();
        assert_eq!(lp_norm(&f, 2.0).unwrap(), lp_norm(&g, 2.0).unwrap());
        assert_eq!(
            lp_norm(&f, 3.3).unwrap().to_bits(),
            lp_norm(&g, 3.3).unwrap().to_bits()
        );
        let h = random_field(grid, 43);
        assert_eq!(
            inner_product(&f, &h).unwrap().to_bits(),
            inner_product(&g, &h).unwrap().to_bits()
        );
    }

    #[test]
    fn vector_field_requires_shared_grid() {
        let a = ScalarField::zeros(grid16());
        let b = ScalarField::zeros(grid16());
        let c = ScalarField::zeros(Grid::cube(8).unwrap());
        assert!(VectorField::new([a.clone(), b.clone(), a.clone()]).is_ok());
        assert!(matches!(
            VectorField::new([a, b, c]),
            Err(MhdError::GridMismatch(_))
        ));
    }
}
