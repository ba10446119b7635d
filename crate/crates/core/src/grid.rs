//! Torus discretization, Fourier transforms, multipliers, Littlewood-Paley
//! projections and norms.
//!
//! Layout conventions used everywhere in the crate:
//!
//! * values are stored row-major, the last axis varying fastest;
//! * axis index `j ∈ [0, n)` carries the signed wavenumber `k = j` for
//!   `j < n/2` and `k = j − n` otherwise, and the physical coordinate
//!   `x = k·L/n` (so the origin sits at index 0 and `x ∈ [−L/2, L/2)`);
//! * the discrete Fourier transform is unitary, `ĉ_k = n^{−N/2} Σ_j u_j e^{−2πi j·k/n}`,
//!   so `Σ|ĉ|² = Σ|u|²` and every L² quantity picks up the same cell weight
//!   `(L/n)^N` in both representations.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::step::SmoothStep;
use crate::{fft, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    dim: usize,
    points: usize,
    length: f64,
}

impl Grid {
    pub fn new(dim: usize, points: usize, length: f64) -> Result<Grid> {
        if dim == 0 {
            return Err(Error::InvalidGrid("dimension must be at least 1".into()));
        }
        if points < 4 || !points.is_power_of_two() {
            return Err(Error::InvalidGrid(format!(
                "points per axis must be a power of two >= 4, got {points}"
            )));
        }
        if !(length.is_finite() && length > 0.0) {
            return Err(Error::InvalidGrid(format!(
                "box length must be positive and finite, got {length}"
            )));
        }
        let total = u32::try_from(dim)
            .ok()
            .and_then(|d| points.checked_pow(d))
            .filter(|&t| t <= 1 << 31);
        if total.is_none() {
            return Err(Error::InvalidGrid(format!(
                "{points}^{dim} points is too large"
            )));
        }
        Ok(Grid {
            dim,
            points,
            length,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn points_per_axis(&self) -> usize {
        self.points
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    /// Total number of lattice points `n^N`.
    pub fn len(&self) -> usize {
        self.points.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn spacing(&self) -> f64 {
        self.length / self.points as f64
    }

    /// Quadrature weight `(L/n)^N`.
    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(self.dim as i32)
    }

    /// Frequency lattice spacing `2π/L`.
    pub fn frequency_step(&self) -> f64 {
        2.0 * PI / self.length
    }

    /// Largest per-axis frequency magnitude, `πn/L`.
    pub fn nyquist(&self) -> f64 {
        PI * self.points as f64 / self.length
    }

    #[inline]
    pub fn wavenumber(&self, j: usize) -> i64 {
        let n = self.points;
        if j < n / 2 {
            j as i64
        } else {
            j as i64 - n as i64
        }
    }

    /// Axis index holding wavenumber `k`, if it lies on the lattice.
    pub fn index_of_wavenumber(&self, k: i64) -> Option<usize> {
        let half = (self.points / 2) as i64;
        if k < -half || k >= half {
            None
        } else if k >= 0 {
            Some(k as usize)
        } else {
            Some((k + self.points as i64) as usize)
        }
    }

    #[inline]
    pub fn frequency(&self, j: usize) -> f64 {
        self.wavenumber(j) as f64 * self.frequency_step()
    }

    #[inline]
    pub fn coordinate(&self, j: usize) -> f64 {
        self.wavenumber(j) as f64 * self.spacing()
    }

    /// Per-axis frequency table in storage order.
    pub fn axis_frequencies(&self) -> Vec<f64> {
        (0..self.points).map(|j| self.frequency(j)).collect()
    }

    pub fn axis_coordinates(&self) -> Vec<f64> {
        (0..self.points).map(|j| self.coordinate(j)).collect()
    }

    /// Decompose a flat index into per-axis indices.
    pub fn multi_index(&self, mut flat: usize, out: &mut [usize]) {
        for a in (0..self.dim).rev() {
            out[a] = flat % self.points;
            flat /= self.points;
        }
    }

    pub fn flat_index(&self, idx: &[usize]) -> usize {
        idx.iter().fold(0, |acc, &i| acc * self.points + i)
    }

    /// Visit every lattice point in storage order with its per-axis indices.
    pub fn for_each_index(&self, mut f: impl FnMut(usize, &[usize])) {
        let mut idx = vec![0usize; self.dim];
        for flat in 0..self.len() {
            f(flat, &idx);
            for a in (0..self.dim).rev() {
                idx[a] += 1;
                if idx[a] < self.points {
                    break;
                }
                idx[a] = 0;
            }
        }
    }

    /// Visit every frequency `ξ` in storage order.
    pub fn for_each_frequency(&self, mut f: impl FnMut(usize, &[f64])) {
        let table = self.axis_frequencies();
        let mut xi = vec![0.0; self.dim];
        self.for_each_index(|flat, idx| {
            for (x, &i) in xi.iter_mut().zip(idx) {
                *x = table[i];
            }
            f(flat, &xi);
        });
    }

    /// Visit every physical point `x` in storage order.
    pub fn for_each_point(&self, mut f: impl FnMut(usize, &[f64])) {
        let table = self.axis_coordinates();
        let mut x = vec![0.0; self.dim];
        self.for_each_index(|flat, idx| {
            for (c, &i) in x.iter_mut().zip(idx) {
                *c = table[i];
            }
            f(flat, &x);
        });
    }

    /// `|ξ|²` at every lattice frequency, storage order.
    pub fn frequency_norms_sq(&self) -> Vec<f64> {
        let table: Vec<f64> = self.axis_frequencies().iter().map(|x| x * x).collect();
        let mut out = vec![0.0; self.len()];
        self.for_each_index(|flat, idx| {
            out[flat] = idx.iter().map(|&i| table[i]).sum();
        });
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Representation {
    Physical,
    Spectral,
}

/// Complex field on a [`Grid`] in one of two representations.
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    grid: Grid,
    values: Vec<Complex64>,
    repr: Representation,
}

impl Field {
    pub fn new(grid: Grid, values: Vec<Complex64>, repr: Representation) -> Result<Field> {
        if values.len() != grid.len() {
            return Err(Error::InvalidArgument(format!(
                "expected {} values, got {}",
                grid.len(),
                values.len()
            )));
        }
        Ok(Field { grid, values, repr })
    }

    pub fn zeros(grid: Grid, repr: Representation) -> Field {
        Field {
            grid,
            values: vec![Complex64::new(0.0, 0.0); grid.len()],
            repr,
        }
    }

    pub fn from_physical_fn(grid: Grid, f: impl Fn(&[f64]) -> Complex64) -> Field {
        let mut values = vec![Complex64::new(0.0, 0.0); grid.len()];
        grid.for_each_point(|flat, x| values[flat] = f(x));
        Field {
            grid,
            values,
            repr: Representation::Physical,
        }
    }

    /// Field whose spectral coefficient at `ξ` is `f(ξ)`.
    pub fn from_spectral_fn(grid: Grid, f: impl Fn(&[f64]) -> Complex64) -> Field {
        let mut values = vec![Complex64::new(0.0, 0.0); grid.len()];
        grid.for_each_frequency(|flat, xi| values[flat] = f(xi));
        Field {
            grid,
            values,
            repr: Representation::Spectral,
        }
    }

    /// `amplitude · e^{iξ₀·x}` with `ξ₀ = 2πk/L`.
    pub fn plane_wave(grid: Grid, k: &[i64], amplitude: Complex64) -> Result<Field> {
        if k.len() != grid.dim() {
            return Err(Error::InvalidArgument(
                "wavenumber has wrong dimension".into(),
            ));
        }
        let step = grid.frequency_step();
        Ok(Field::from_physical_fn(grid, |x| {
            let phase: f64 = k
                .iter()
                .zip(x)
                .map(|(&kj, &xj)| kj as f64 * step * xj)
                .sum();
            amplitude * Complex64::from_polar(1.0, phase)
        }))
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    pub fn representation(&self) -> Representation {
        self.repr
    }

    pub fn transform(&self, target: Representation) -> Field {
        let mut out = self.clone();
        out.transform_in_place(target);
        out
    }

    pub fn transform_in_place(&mut self, target: Representation) {
        if self.repr == target {
            return;
        }
        let forward = target == Representation::Spectral;
        fft::transform(
            &mut self.values,
            self.grid.points_per_axis(),
            self.grid.dim(),
            forward,
        );
        self.repr = target;
    }

    pub fn to_spectral(&self) -> Field {
        self.transform(Representation::Spectral)
    }

    pub fn to_physical(&self) -> Field {
        self.transform(Representation::Physical)
    }

    /// Multiply the spectral coefficients pointwise by `m(ξ)`; the output keeps
    /// the input's representation.
    pub fn apply_multiplier(&self, m: impl Fn(&[f64]) -> Complex64) -> Result<Field> {
        let mut out = self.to_spectral();
        let mut bad = None;
        self.grid.for_each_frequency(|flat, xi| {
            let s = m(xi);
            if !(s.re.is_finite() && s.im.is_finite()) {
                bad.get_or_insert(flat);
            }
            out.values[flat] *= s;
        });
        if let Some(index) = bad {
            return Err(Error::NonFiniteSymbol { index });
        }
        out.transform_in_place(self.repr);
        Ok(out)
    }

    /// Multiply by a radial real symbol given as a function of `|ξ|²`.
    pub(crate) fn apply_radial(&self, m: impl Fn(f64) -> f64) -> Field {
        let mut out = self.to_spectral();
        for (v, k2) in out.values.iter_mut().zip(self.grid.frequency_norms_sq()) {
            *v *= m(k2);
        }
        out.transform_in_place(self.repr);
        out
    }

    /// Littlewood-Paley projection `P_M` or `P_{≤M}`.
    pub fn lp_project(&self, dyadic: f64, mode: LpMode) -> Result<Field> {
        check_dyadic(dyadic)?;
        let cutoff = LpCutoff::default();
        Ok(self.apply_radial(|k2| cutoff.symbol(dyadic, mode, k2.sqrt())))
    }

    pub fn norm(&self, kind: NormKind) -> Result<f64> {
        match kind {
            NormKind::Lebesgue(p) => self.lebesgue_norm(p),
            NormKind::Sobolev(gamma) => Ok(self.sobolev_norm(gamma, false)),
            NormKind::HomogeneousSobolev(gamma) => Ok(self.sobolev_norm(gamma, true)),
        }
    }

    pub fn l2_norm(&self) -> f64 {
        let sum: f64 = self.values.iter().map(|v| v.norm_sqr()).sum();
        (sum * self.grid.cell_volume()).sqrt()
    }

    pub fn lebesgue_norm(&self, p: f64) -> Result<f64> {
        if p.is_nan() || p < 1.0 {
            return Err(Error::InvalidArgument(format!("L^p needs p >= 1, got {p}")));
        }
        let phys = self.to_physical();
        if p.is_infinite() {
            return Ok(phys.values.iter().map(|v| v.norm()).fold(0.0, f64::max));
        }
        if p == 2.0 {
            return Ok(phys.l2_norm());
        }
        let sum: f64 = if p.fract() == 0.0 && p % 2.0 == 0.0 && p <= 16.0 {
            let half = (p / 2.0) as i32;
            phys.values.iter().map(|v| v.norm_sqr().powi(half)).sum()
        } else {
            phys.values.iter().map(|v| v.norm().powf(p)).sum()
        };
        Ok((sum * self.grid.cell_volume()).powf(1.0 / p))
    }

    fn sobolev_norm(&self, gamma: f64, homogeneous: bool) -> f64 {
        let spec = self.to_spectral();
        let k2 = self.grid.frequency_norms_sq();
        let mut sum = 0.0;
        for (v, &q) in spec.values.iter().zip(&k2) {
            let w = if homogeneous {
                if q == 0.0 {
                    if gamma > 0.0 {
                        0.0
                    } else {
                        continue;
                    }
                } else {
                    q.powf(gamma)
                }
            } else {
                (1.0 + q).powf(gamma)
            };
            sum += w * v.norm_sqr();
        }
        (sum * self.grid.cell_volume()).sqrt()
    }

    /// `self + c·other` in the representation of `self`.
    pub fn add_scaled(&mut self, c: Complex64, other: &Field) -> Result<()> {
        self.check_same_grid(other)?;
        let other = other.transform(self.repr);
        for (a, b) in self.values.iter_mut().zip(&other.values) {
            *a += c * b;
        }
        Ok(())
    }

    pub fn scaled(&self, c: Complex64) -> Field {
        let mut out = self.clone();
        for v in &mut out.values {
            *v *= c;
        }
        out
    }

    pub fn difference(&self, other: &Field) -> Result<Field> {
        let mut out = self.clone();
        out.add_scaled(Complex64::new(-1.0, 0.0), other)?;
        Ok(out)
    }

    pub(crate) fn check_same_grid(&self, other: &Field) -> Result<()> {
        if self.grid != other.grid {
            return Err(Error::Mismatch(format!(
                "{:?} vs {:?}",
                self.grid, other.grid
            )));
        }
        Ok(())
    }

    /// Fraction of squared L² mass at lattice points where `outside` holds
    /// (evaluated on per-axis indices of the spectral representation).
    pub fn spectral_mass_fraction(&self, outside: impl Fn(&[usize]) -> bool) -> f64 {
        let spec = self.to_spectral();
        let mut total = 0.0;
        let mut out = 0.0;
        self.grid.for_each_index(|flat, idx| {
            let m = spec.values[flat].norm_sqr();
            total += m;
            if outside(idx) {
                out += m;
            }
        });
        if total == 0.0 {
            0.0
        } else {
            out / total
        }
    }

    /// Fraction of squared L² mass in the physical strip where some coordinate
    /// satisfies `|x_j| > edge·L`.
    pub fn boundary_mass_fraction(&self, edge: f64) -> f64 {
        let phys = self.to_physical();
        let limit = edge * self.grid.length();
        let mut total = 0.0;
        let mut out = 0.0;
        self.grid.for_each_point(|flat, x| {
            let m = phys.values[flat].norm_sqr();
            total += m;
            if x.iter().any(|c| c.abs() > limit) {
                out += m;
            }
        });
        if total == 0.0 {
            0.0
        } else {
            out / total
        }
    }

    pub fn is_finite(&self) -> bool {
        self.values
            .iter()
            .all(|v| v.re.is_finite() && v.im.is_finite())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum NormKind {
    /// `L^p`, `p ∈ [1, ∞]`, by physical quadrature with weight `(L/n)^N`.
    Lebesgue(f64),
    /// `H^γ` with weight `⟨ξ⟩^γ`.
    Sobolev(f64),
    /// `Ḣ^γ` with weight `|ξ|^γ`; the zero mode is dropped when `γ ≤ 0`.
    HomogeneousSobolev(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LpMode {
    /// `P_M`: symbol `φ(ξ/M) − φ(2ξ/M)` for `M ≥ 2`, and `φ(ξ)` for `M = 1`.
    Block,
    /// `P_{≤M} = Σ_{1 ≤ K ≤ M} P_K`: symbol `φ(ξ/M)`.
    LowPass,
}

/// Radial cutoff `φ(ξ) = s(2 − |ξ|)`: equal to 1 on `|ξ| ≤ 1`, 0 on `|ξ| ≥ 2`.
#[derive(Debug, Clone, Copy, Default)]
pub struct LpCutoff {
    step: SmoothStep,
}

impl LpCutoff {
    pub fn phi(&self, r: f64) -> f64 {
        self.step.eval(2.0 - r)
    }

    pub fn symbol(&self, dyadic: f64, mode: LpMode, r: f64) -> f64 {
        match mode {
            LpMode::LowPass => self.phi(r / dyadic),
            LpMode::Block if dyadic == 1.0 => self.phi(r),
            LpMode::Block => self.phi(r / dyadic) - self.phi(2.0 * r / dyadic),
        }
    }
}

pub(crate) fn check_dyadic(m: f64) -> Result<()> {
    if m.is_finite() && m >= 1.0 && m.log2().fract() == 0.0 {
        Ok(())
    } else {
        Err(Error::NotDyadic(m))
    }
}

/// Dyadic numbers `1, 2, 4, …` up to the first one covering every lattice
/// frequency, so that the blocks sum to the identity on the grid.
pub fn dyadic_cover(grid: &Grid) -> Vec<f64> {
    let rmax = grid.nyquist() * (grid.dim() as f64).sqrt();
    let mut out = vec![1.0];
    while *out.last().unwrap() < rmax {
        out.push(out.last().unwrap() * 2.0);
    }
    out
}

/// Time-sampled flow on a common grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    times: Vec<f64>,
    states: Vec<Field>,
}

impl Trajectory {
    pub fn new(times: Vec<f64>, states: Vec<Field>) -> Result<Trajectory> {
        if times.len() != states.len() {
            return Err(Error::InvalidArgument(format!(
                "{} times for {} states",
                times.len(),
                states.len()
            )));
        }
        if times.is_empty() {
            return Err(Error::InsufficientData("trajectory has no samples".into()));
        }
        if times.iter().any(|t| !t.is_finite()) || times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidArgument(
                "trajectory times must be finite and strictly increasing".into(),
            ));
        }
        let grid = *states[0].grid();
        if states.iter().any(|s| *s.grid() != grid) {
            return Err(Error::Mismatch(
                "trajectory states on different grids".into(),
            ));
        }
        Ok(Trajectory { times, states })
    }

    /// Same state at every listed time.
    pub fn constant(times: Vec<f64>, state: Field) -> Result<Trajectory> {
        let states = vec![state; times.len()];
        Trajectory::new(times, states)
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn states(&self) -> &[Field] {
        &self.states
    }

    pub fn grid(&self) -> &Grid {
        self.states[0].grid()
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn into_parts(self) -> (Vec<f64>, Vec<Field>) {
        (self.times, self.states)
    }

    /// `‖u‖_{L^q_t L^r_x}`: trapezoidal in time, sup over samples for `q = ∞`.
    pub fn spacetime_norm(&self, q: f64, r: f64) -> Result<f64> {
        if q.is_nan() || q < 1.0 {
            return Err(Error::InvalidArgument(format!("time exponent q = {q} < 1")));
        }
        let norms = self
            .states
            .iter()
            .map(|s| s.lebesgue_norm(r))
            .collect::<Result<Vec<_>>>()?;
        mixed_norm_from_samples(&self.times, &norms, q)
    }
}

/// Trapezoidal `L^q` norm of sampled nonnegative values.
pub fn mixed_norm_from_samples(times: &[f64], values: &[f64], q: f64) -> Result<f64> {
    if q.is_infinite() {
        return Ok(values.iter().copied().fold(0.0, f64::max));
    }
    if times.len() < 2 {
        return Err(Error::InsufficientData(
            "finite time exponent needs at least two samples".into(),
        ));
    }
    let mut acc = 0.0;
    for i in 1..times.len() {
        let dt = times[i] - times[i - 1];
        acc += 0.5 * dt * (values[i - 1].powf(q) + values[i].powf(q));
    }
    Ok(acc.powf(1.0 / q))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn gaussian(grid: Grid, sigma: f64) -> Field {
        Field::from_physical_fn(grid, |x| {
            let r2: f64 = x.iter().map(|c| c * c).sum();
            Complex64::new((-r2 / (2.0 * sigma * sigma)).exp(), 0.0)
        })
    }

    #[test]
    fn make_grid_examples() {
        let g = Grid::new(1, 8, 2.0 * PI).unwrap();
        let ks: Vec<f64> = g.axis_frequencies();
        let mut sorted = ks.clone();
        sorted.sort_by(f64::total_cmp);
        let expected: Vec<f64> = (-4..4).map(|k| k as f64).collect();
        for (a, b) in sorted.iter().zip(&expected) {
            assert!((a - b).abs() < 1e-15);
        }
        assert_eq!(Grid::new(5, 16, 2.0 * PI).unwrap().len(), 1_048_576);
        assert!(matches!(Grid::new(2, 7, 1.0), Err(Error::InvalidGrid(_))));
        assert!(Grid::new(0, 8, 1.0).is_err());
        assert!(Grid::new(1, 8, 0.0).is_err());
        assert!(Grid::new(1, 2, 1.0).is_err());
    }

    #[test]
    fn delta_has_constant_spectrum() {
        let g = Grid::new(2, 8, 3.0).unwrap();
        let mut f = Field::zeros(g, Representation::Physical);
        f.values_mut()[0] = Complex64::new(1.0, 0.0);
        let s = f.to_spectral();
        for v in s.values() {
            assert!((v - Complex64::new(1.0 / 8.0, 0.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn plane_wave_is_a_single_mode() {
        let g = Grid::new(2, 16, 5.0).unwrap();
        let f = Field::plane_wave(g, &[3, -2], Complex64::new(1.0, 0.0)).unwrap();
        let s = f.to_spectral();
        let hit = g.flat_index(&[3, g.index_of_wavenumber(-2).unwrap()]);
        for (i, v) in s.values().iter().enumerate() {
            if i == hit {
                assert!((v.norm() - 16.0).abs() < 1e-12);
            } else {
                assert!(v.norm() < 1e-12);
            }
        }
    }

    #[test]
    fn round_trip_and_parseval() {
        let g = Grid::new(3, 8, 2.0).unwrap();
        let f = Field::from_physical_fn(g, |x| {
            Complex64::new((3.0 * x[0]).sin() + x[1], x[2] * x[0])
        });
        let back = f.to_spectral().to_physical();
        let err: f64 = f
            .values()
            .iter()
            .zip(back.values())
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt();
        assert!(err <= 1e-12 * f.l2_norm() / g.cell_volume().sqrt());
        assert_relative_eq!(f.l2_norm(), f.to_spectral().l2_norm(), max_relative = 1e-13);
    }

    #[test]
    fn multiplier_examples() {
        let g = Grid::new(2, 16, 2.0 * PI).unwrap();
        let f = gaussian(g, 0.7);
        let id = f.apply_multiplier(|_| Complex64::new(1.0, 0.0)).unwrap();
        assert!(f.difference(&id).unwrap().l2_norm() < 1e-13);

        let pw = Field::plane_wave(g, &[2, 1], Complex64::new(1.0, 0.0)).unwrap();
        let lap = pw
            .apply_multiplier(|xi| Complex64::new(xi.iter().map(|x| x * x).sum(), 0.0))
            .unwrap();
        let expect = pw.scaled(Complex64::new(5.0, 0.0));
        assert!(lap.difference(&expect).unwrap().l2_norm() < 1e-11);

        let half = |xi: &[f64]| Complex64::new(if xi[0] > 0.0 { 1.0 } else { 0.0 }, 0.0);
        let once = f.apply_multiplier(half).unwrap();
        let twice = once.apply_multiplier(half).unwrap();
        assert!(once.difference(&twice).unwrap().l2_norm() < 1e-14);
    }

    #[test]
    fn non_finite_multiplier_rejected() {
        let g = Grid::new(1, 8, 1.0).unwrap();
        let f = gaussian(g, 0.1);
        let r = f.apply_multiplier(|xi| Complex64::new(1.0 / xi[0], 0.0));
        assert!(matches!(r, Err(Error::NonFiniteSymbol { index: 0 })));
    }

    #[test]
    fn lp_examples() {
        let g = Grid::new(2, 32, 2.0 * PI).unwrap();
        let f = gaussian(g, 0.5);
        let mut sum = Field::zeros(g, Representation::Physical);
        for m in dyadic_cover(&g) {
            sum.add_scaled(
                Complex64::new(1.0, 0.0),
                &f.lp_project(m, LpMode::Block).unwrap(),
            )
            .unwrap();
        }
        assert!(sum.difference(&f).unwrap().l2_norm() <= 1e-12 * f.l2_norm());

        // |ξ₀| = M = 4 passes; |ξ₀| = 16 = 4M is removed.
        let pw = Field::plane_wave(g, &[4, 0], Complex64::new(1.0, 0.0)).unwrap();
        let p = pw.lp_project(4.0, LpMode::Block).unwrap();
        assert!(p.difference(&pw).unwrap().l2_norm() < 1e-12);
        let far = Field::plane_wave(g, &[0, 16 - 32], Complex64::new(1.0, 0.0)).unwrap();
        assert!(far.lp_project(4.0, LpMode::Block).unwrap().l2_norm() < 1e-14);

        assert!(matches!(
            f.lp_project(3.0, LpMode::Block),
            Err(Error::NotDyadic(_))
        ));
        assert!(f.lp_project(0.5, LpMode::Block).is_err());
    }

    #[test]
    fn low_pass_is_partial_sum_of_blocks() {
        let g = Grid::new(1, 64, 2.0 * PI).unwrap();
        let f = gaussian(g, 0.2);
        let low = f.lp_project(8.0, LpMode::LowPass).unwrap();
        let mut sum = Field::zeros(g, Representation::Physical);
        for m in [1.0, 2.0, 4.0, 8.0] {
            sum.add_scaled(
                Complex64::new(1.0, 0.0),
                &f.lp_project(m, LpMode::Block).unwrap(),
            )
            .unwrap();
        }
        assert!(sum.difference(&low).unwrap().l2_norm() < 1e-13);
        assert!(low.l2_norm() <= f.l2_norm());
    }

    #[test]
    fn norm_examples() {
        let g = Grid::new(2, 16, 7.0).unwrap();
        let f = gaussian(g, 0.8);
        assert_relative_eq!(
            f.norm(NormKind::Sobolev(0.0)).unwrap(),
            f.norm(NormKind::Lebesgue(2.0)).unwrap(),
            max_relative = 1e-12
        );
        assert!(f.norm(NormKind::Lebesgue(0.5)).is_err());

        // ∫ e^{−x²} dx = √π on a box wide enough that the tails vanish.
        let g1 = Grid::new(1, 256, 40.0).unwrap();
        let f1 = gaussian(g1, 1.0);
        assert!((f1.l2_norm().powi(2) - PI.sqrt()).abs() < 1e-6);
        // L¹ and L^∞ of the same profile
        assert!((f1.lebesgue_norm(1.0).unwrap() - (2.0 * PI).sqrt()).abs() < 1e-6);
        assert!((f1.lebesgue_norm(f64::INFINITY).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn homogeneous_norm_drops_zero_mode_for_nonpositive_gamma() {
        let g = Grid::new(1, 8, 2.0 * PI).unwrap();
        let c = Field::from_physical_fn(g, |_| Complex64::new(1.0, 0.0));
        assert_eq!(c.norm(NormKind::HomogeneousSobolev(-0.5)).unwrap(), 0.0);
        assert_eq!(c.norm(NormKind::HomogeneousSobolev(0.0)).unwrap(), 0.0);
        assert_eq!(c.norm(NormKind::HomogeneousSobolev(1.0)).unwrap(), 0.0);
    }

    #[test]
    fn spacetime_norm_examples() {
        let g = Grid::new(1, 16, 4.0).unwrap();
        let f = gaussian(g, 0.3);
        let single = Trajectory::new(vec![0.3], vec![f.clone()]).unwrap();
        assert_relative_eq!(
            single.spacetime_norm(f64::INFINITY, 4.0).unwrap(),
            f.lebesgue_norm(4.0).unwrap()
        );
        assert!(matches!(
            single.spacetime_norm(2.0, 2.0),
            Err(Error::InsufficientData(_))
        ));
        let times: Vec<f64> = (0..=10).map(|i| i as f64 * 0.25).collect();
        let tr = Trajectory::constant(times, f.clone()).unwrap();
        assert_relative_eq!(
            tr.spacetime_norm(2.0, 3.0).unwrap(),
            2.5f64.sqrt() * f.lebesgue_norm(3.0).unwrap(),
            max_relative = 1e-13
        );
    }

    #[test]
    fn trajectory_validation() {
        let g = Grid::new(1, 8, 1.0).unwrap();
        let f = Field::zeros(g, Representation::Physical);
        assert!(Trajectory::new(vec![0.0, 0.0], vec![f.clone(), f.clone()]).is_err());
        assert!(Trajectory::new(vec![0.0], vec![]).is_err());
        let other = Field::zeros(Grid::new(1, 16, 1.0).unwrap(), Representation::Physical);
        assert!(matches!(
            Trajectory::new(vec![0.0, 1.0], vec![f, other]),
            Err(Error::Mismatch(_))
        ));
    }
}
