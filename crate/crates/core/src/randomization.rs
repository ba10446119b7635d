//! Wiener randomization on unit and dilated frequency cubes.
//!
//! The cube windows come from a telescoped smooth step: with `h(x) = s(x+1) − s(x)`
//! the shifted copies `h(x − k)` sum to one exactly, and the tensor product
//! `ψ(ξ) = ∏ h(ξ_j)` is a partition of unity subordinate to `[−1, 1]^N`.
//!
//! Coefficients are derived from `(seed, n)` alone through a keyed ChaCha
//! stream, so any subset of cubes can be sampled in any order (or in parallel)
//! with identical results.

use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::grid::{Field, Grid, Representation};
use crate::step::SmoothStep;
use crate::{Error, Result};

/// Relative squared mass that [`rescale_field`] may drop before refusing.
pub const RESCALE_MASS_TOLERANCE: f64 = 1e-10;

/// Tensorized partition-of-unity window `ψ`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct BumpFunction {
    step: SmoothStep,
}

impl BumpFunction {
    pub fn new(steepness: f64) -> Result<Self> {
        Ok(BumpFunction {
            step: SmoothStep::new(steepness)?,
        })
    }

    pub fn steepness(&self) -> f64 {
        self.step.steepness()
    }

    /// One-dimensional window `h(x) = s(x + 1) − s(x)`, supported in `(−1, 1)`.
    #[inline]
    pub fn window(&self, x: f64) -> f64 {
        self.step.eval(x + 1.0) - self.step.eval(x)
    }

    /// `ψ(ξ) = ∏_j h(ξ_j)`.
    pub fn eval(&self, xi: &[f64]) -> f64 {
        xi.iter().map(|&x| self.window(x)).product()
    }

    /// `Σ_{n ∈ Z^N} ψ(ξ − n)`, summing only the cubes whose support contains `ξ`.
    pub fn partition_sum(&self, xi: &[f64]) -> f64 {
        xi.iter()
            .map(|&x| {
                let lo = x.floor();
                self.window(x - lo) + self.window(x - lo - 1.0)
            })
            .product()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CoefficientDistribution {
    /// Independent real and imaginary parts, each `N(0, 1/2)`.
    Gaussian,
    /// Each part `±1/√2` with equal probability.
    Bernoulli,
    /// Uniform on the disk `|g| ≤ √2`.
    UniformDisk,
    /// `g ≡ 1`: a deterministic control that reassembles the input.
    Unit,
}

impl CoefficientDistribution {
    pub fn draw<R: Rng>(&self, rng: &mut R) -> Complex64 {
        match self {
            CoefficientDistribution::Gaussian => {
                let re: f64 = rng.sample(StandardNormal);
                let im: f64 = rng.sample(StandardNormal);
                Complex64::new(re * FRAC_1_SQRT_2, im * FRAC_1_SQRT_2)
            }
            CoefficientDistribution::Bernoulli => {
                let bits: u8 = rng.gen();
                let re = if bits & 1 == 0 {
                    FRAC_1_SQRT_2
                } else {
                    -FRAC_1_SQRT_2
                };
                let im = if bits & 2 == 0 {
                    FRAC_1_SQRT_2
                } else {
                    -FRAC_1_SQRT_2
                };
                Complex64::new(re, im)
            }
            CoefficientDistribution::UniformDisk => {
                let u: f64 = rng.gen();
                let v: f64 = rng.gen();
                Complex64::from_polar(
                    std::f64::consts::SQRT_2 * u.sqrt(),
                    std::f64::consts::TAU * v,
                )
            }
            CoefficientDistribution::Unit => Complex64::new(1.0, 0.0),
        }
    }

    /// Constant `c` with `E e^{δX} ≤ e^{cδ²}` for each real part `X`.
    ///
    /// Gaussian parts have variance 1/2, so the moment generating function is
    /// exactly `e^{δ²/4}`. Bounded parts with `|X| ≤ b` get Hoeffding's `b²/2`.
    pub fn subgaussian_constant(&self) -> Option<f64> {
        match self {
            CoefficientDistribution::Gaussian => Some(0.25),
            CoefficientDistribution::Bernoulli => Some(0.5 * 0.5),
            CoefficientDistribution::UniformDisk => Some(0.5 * 2.0),
            CoefficientDistribution::Unit => None,
        }
    }

    /// Largest absolute value of a real part, for bounded kinds.
    pub fn part_bound(&self) -> Option<f64> {
        match self {
            CoefficientDistribution::Gaussian => None,
            CoefficientDistribution::Bernoulli => Some(FRAC_1_SQRT_2),
            CoefficientDistribution::UniformDisk => Some(std::f64::consts::SQRT_2),
            CoefficientDistribution::Unit => Some(1.0),
        }
    }

    pub fn is_mean_zero(&self) -> bool {
        !matches!(self, CoefficientDistribution::Unit)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RandomizationSpec {
    pub distribution: CoefficientDistribution,
    pub seed: u64,
    /// Dilation `λ`; cubes have side `1/λ`.
    pub scale: f64,
}

impl RandomizationSpec {
    pub fn new(distribution: CoefficientDistribution, seed: u64, scale: f64) -> Result<Self> {
        if !(scale.is_finite() && scale > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "dilation scale must be positive, got {scale}"
            )));
        }
        Ok(RandomizationSpec {
            distribution,
            seed,
            scale,
        })
    }

    pub fn unit_cubes(distribution: CoefficientDistribution, seed: u64) -> Self {
        RandomizationSpec {
            distribution,
            seed,
            scale: 1.0,
        }
    }

    pub fn with_seed(&self, seed: u64) -> Self {
        RandomizationSpec { seed, ..*self }
    }

    /// `g_n` for cube index `n`.
    pub fn coefficient(&self, n: &[i64]) -> Complex64 {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(cube_stream(n));
        self.distribution.draw(&mut rng)
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn cube_stream(n: &[i64]) -> u64 {
    n.iter().fold(splitmix64(n.len() as u64), |h, &c| {
        splitmix64(h ^ splitmix64(c as u64))
    })
}

/// Seed of the `sample`-th Monte Carlo draw under a base seed.
pub fn sample_seed(base: u64, sample: u64) -> u64 {
    splitmix64(base ^ splitmix64(sample.wrapping_add(0x5851_F42D_4C95_7F2D)))
}

/// Coefficients for the requested cube indices.
pub fn sample_coefficients(
    spec: &RandomizationSpec,
    indices: &[Vec<i64>],
) -> std::collections::BTreeMap<Vec<i64>, Complex64> {
    indices
        .iter()
        .map(|n| (n.clone(), spec.coefficient(n)))
        .collect()
}

fn check_resolved(grid: &Grid, scale: f64) -> Result<()> {
    let spacing = grid.frequency_step();
    let side = 1.0 / scale;
    if spacing > 0.5 * side {
        return Err(Error::UnresolvedCubes { spacing, side });
    }
    Ok(())
}

/// Per-axis window table: at axis index `j` the (at most two) cubes whose
/// support covers `λξ_j`, with their 1-D weights.
struct AxisWindows {
    lo: Vec<i64>,
    weights: Vec<[f64; 2]>,
    min_cube: i64,
    range: usize,
}

impl AxisWindows {
    fn new(grid: &Grid, scale: f64, bump: &BumpFunction) -> Self {
        let mut lo = Vec::with_capacity(grid.points_per_axis());
        let mut weights = Vec::with_capacity(grid.points_per_axis());
        for j in 0..grid.points_per_axis() {
            let y = scale * grid.frequency(j);
            let l = y.floor();
            lo.push(l as i64);
            weights.push([bump.window(y - l), bump.window(y - l - 1.0)]);
        }
        let min_cube = *lo.iter().min().unwrap();
        let max_cube = *lo.iter().max().unwrap() + 1;
        AxisWindows {
            lo,
            weights,
            min_cube,
            range: (max_cube - min_cube + 1) as usize,
        }
    }
}

/// Cube indices `n` whose window meets the grid's frequency lattice.
pub fn cube_indices(grid: &Grid, scale: f64, bump: &BumpFunction) -> Result<Vec<Vec<i64>>> {
    check_resolved(grid, scale)?;
    let axis = AxisWindows::new(grid, scale, bump);
    let mut present = vec![false; axis.range];
    for (l, w) in axis.lo.iter().zip(&axis.weights) {
        for (c, &wc) in w.iter().enumerate() {
            if wc != 0.0 {
                present[(l + c as i64 - axis.min_cube) as usize] = true;
            }
        }
    }
    let per_axis: Vec<i64> = present
        .iter()
        .enumerate()
        .filter(|(_, &p)| p)
        .map(|(i, _)| i as i64 + axis.min_cube)
        .collect();
    let mut out = vec![Vec::new()];
    for _ in 0..grid.dim() {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                per_axis.iter().map(move |&c| {
                    let mut v = prefix.clone();
                    v.push(c);
                    v
                })
            })
            .collect();
    }
    Ok(out)
}

/// The random symbol `Σ_n g_n ψ(λξ − n)` at every lattice frequency.
pub fn random_symbol(
    grid: &Grid,
    spec: &RandomizationSpec,
    bump: &BumpFunction,
) -> Result<Vec<Complex64>> {
    check_resolved(grid, spec.scale)?;
    let axis = AxisWindows::new(grid, spec.scale, bump);
    let dim = grid.dim();

    // Coefficient table over the box of candidate cubes, mixed radix `range`.
    let range = axis.range;
    let table_len = range
        .checked_pow(dim as u32)
        .ok_or_else(|| Error::InvalidArgument("too many cubes".into()))?;
    let mut table = Vec::with_capacity(table_len);
    let mut n = vec![0i64; dim];
    for flat in 0..table_len {
        let mut rest = flat;
        for a in (0..dim).rev() {
            n[a] = (rest % range) as i64 + axis.min_cube;
            rest /= range;
        }
        table.push(spec.coefficient(&n));
    }

    let corners = 1usize << dim;
    let mut out = vec![Complex64::new(0.0, 0.0); grid.len()];
    grid.for_each_index(|flat, idx| {
        let mut acc = Complex64::new(0.0, 0.0);
        'corner: for corner in 0..corners {
            let mut w = 1.0;
            let mut t = 0usize;
            for (a, &j) in idx.iter().enumerate() {
                let c = (corner >> (dim - 1 - a)) & 1;
                let wa = axis.weights[j][c];
                if wa == 0.0 {
                    continue 'corner;
                }
                w *= wa;
                t = t * range + (axis.lo[j] + c as i64 - axis.min_cube) as usize;
            }
            acc += table[t] * w;
        }
        out[flat] = acc;
    });
    Ok(out)
}

/// `f^ω = Σ_n g_n ψ(D − n) f` (unit cubes).
pub fn wiener_randomize(f: &Field, spec: &RandomizationSpec, bump: &BumpFunction) -> Result<Field> {
    if spec.scale != 1.0 {
        return Err(Error::InvalidArgument(format!(
            "unit-cube randomization needs scale 1, got {}",
            spec.scale
        )));
    }
    dilated_randomize(f, spec, bump)
}

/// `f^{ω,λ} = Σ_n g_n ψ_λ(D − λ⁻¹n) f` with `ψ_λ(ξ) = ψ(λξ)`.
pub fn dilated_randomize(
    f: &Field,
    spec: &RandomizationSpec,
    bump: &BumpFunction,
) -> Result<Field> {
    let symbol = random_symbol(f.grid(), spec, bump)?;
    Ok(apply_symbol(f, &symbol))
}

pub(crate) fn apply_symbol(f: &Field, symbol: &[Complex64]) -> Field {
    let mut out = f.to_spectral();
    for (v, s) in out.values_mut().iter_mut().zip(symbol) {
        *v *= s;
    }
    out.transform_in_place(f.representation());
    out
}

/// Single cube piece `ψ_λ(D − λ⁻¹n) f`.
pub fn cube_piece(f: &Field, scale: f64, n: &[i64], bump: &BumpFunction) -> Result<Field> {
    check_resolved(f.grid(), scale)?;
    f.apply_multiplier(|xi| {
        let w: f64 = xi
            .iter()
            .zip(n)
            .map(|(&x, &c)| bump.window(scale * x - c as f64))
            .product();
        Complex64::new(w, 0.0)
    })
}

/// `f_λ(x) = λ² f(λx)` for `λ = 2^j`, realized by exact index remapping of the
/// spectral coefficients.
///
/// On the torus the map `k ↦ λk` also replicates the profile `λ^N` times per
/// box, so coefficients carry the amplitude `λ^{2−N/2}`; with it
/// `‖f_λ‖_{Ḣ^γ} = λ^{γ−(N−4)/2} ‖f‖_{Ḣ^γ}` holds exactly on the lattice.
pub fn rescale_field(f: &Field, lambda: f64) -> Result<Field> {
    let log = lambda.log2();
    if !(lambda.is_finite() && lambda > 0.0) || log.fract() != 0.0 {
        return Err(Error::InvalidArgument(format!(
            "dilation must be a power of two, got {lambda}"
        )));
    }
    let grid = *f.grid();
    let dim = grid.dim();
    let amp = lambda.powf(2.0 - dim as f64 / 2.0);
    let spec = f.to_spectral();
    let mut out = Field::zeros(grid, Representation::Spectral);

    let expand = log >= 0.0;
    let factor = 2i64.pow(log.abs() as u32);
    let mut total = 0.0;
    let mut lost = 0.0;
    let mut target = vec![0usize; dim];
    grid.for_each_index(|flat, idx| {
        let v = spec.values()[flat];
        let m = v.norm_sqr();
        total += m;
        let mut ok = true;
        for (a, &j) in idx.iter().enumerate() {
            let k = grid.wavenumber(j);
            let mapped = if expand {
                Some(k * factor)
            } else if k % factor == 0 {
                Some(k / factor)
            } else {
                None
            };
            match mapped.and_then(|k| grid.index_of_wavenumber(k)) {
                Some(i) => target[a] = i,
                None => {
                    ok = false;
                    break;
                }
            }
        }
        if ok {
            out.values_mut()[grid.flat_index(&target)] = v * amp;
        } else {
            lost += m;
        }
    });
    let lost_fraction = if total > 0.0 { lost / total } else { 0.0 };
    if lost_fraction > RESCALE_MASS_TOLERANCE {
        return Err(Error::BandOverflow { lost_fraction });
    }
    out.transform_in_place(f.representation());
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::NormKind;
    use rand::SeedableRng;

    fn gaussian(grid: Grid, sigma: f64) -> Field {
        Field::from_physical_fn(grid, |x| {
            let r2: f64 = x.iter().map(|c| c * c).sum();
            Complex64::new((-r2 / (2.0 * sigma * sigma)).exp(), 0.0)
        })
    }

    #[test]
    fn bump_examples() {
        let b = BumpFunction::default();
        assert_eq!(b.eval(&[0.0, 0.0, 0.0]), 1.0);
        assert_eq!(b.window(0.5), 0.5);
        assert_eq!(b.window(-0.5), 0.5);
        assert_eq!(b.window(1.0), 0.0);
        assert_eq!(b.window(-1.0), 0.0);
        assert_eq!(b.eval(&[0.2, 1.3]), 0.0);
    }

    #[test]
    fn telescoping_partition() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for steep in [0.25, 1.0, 3.0] {
            let b = BumpFunction::new(steep).unwrap();
            for _ in 0..10_000 {
                let x: f64 = rng.gen_range(-2.0..2.0);
                let s: f64 = (-3..=3).map(|k| b.window(x - k as f64)).sum();
                assert!((s - 1.0).abs() <= 1e-12);
                let w = b.window(x);
                assert!((0.0..=1.0).contains(&w));
            }
        }
    }

    #[test]
    fn coefficients_are_deterministic_and_order_free() {
        let spec = RandomizationSpec::unit_cubes(CoefficientDistribution::Gaussian, 99);
        let idx: Vec<Vec<i64>> = (-3..3)
            .flat_map(|a| (-2..2).map(move |b| vec![a, b]))
            .collect();
        let forward = sample_coefficients(&spec, &idx);
        let mut rev = idx.clone();
        rev.reverse();
        let backward = sample_coefficients(&spec, &rev[..5]);
        for (k, v) in &backward {
            assert_eq!(forward[k], *v);
        }
        assert_eq!(spec.coefficient(&[1, 2]), spec.coefficient(&[1, 2]));
        assert_ne!(spec.coefficient(&[1, 2]), spec.coefficient(&[2, 1]));
        assert_ne!(spec.coefficient(&[1]), spec.coefficient(&[1, 0]));
    }

    #[test]
    fn gaussian_moments() {
        let spec = RandomizationSpec::unit_cubes(CoefficientDistribution::Gaussian, 3);
        let count = 100_000;
        let mut mean = Complex64::new(0.0, 0.0);
        let mut second = 0.0;
        for i in 0..count {
            let g = spec.coefficient(&[i, -i]);
            mean += g;
            second += g.norm_sqr();
        }
        mean /= count as f64;
        second /= count as f64;
        assert!(mean.norm() <= 4.0 / (count as f64).sqrt());
        assert!((0.98..=1.02).contains(&second));
    }

    #[test]
    fn bounded_kinds_stay_in_support() {
        let b = RandomizationSpec::unit_cubes(CoefficientDistribution::Bernoulli, 5);
        let d = RandomizationSpec::unit_cubes(CoefficientDistribution::UniformDisk, 5);
        let mut second = 0.0;
        for i in 0..20_000 {
            let g = b.coefficient(&[i]);
            assert!(g.re == FRAC_1_SQRT_2 || g.re == -FRAC_1_SQRT_2);
            assert!(g.im == FRAC_1_SQRT_2 || g.im == -FRAC_1_SQRT_2);
            let h = d.coefficient(&[i]);
            assert!(h.norm() <= std::f64::consts::SQRT_2);
            second += h.norm_sqr();
        }
        assert!((second / 20_000.0 - 1.0).abs() < 0.03);
    }

    #[test]
    fn mgf_certificates_hold() {
        // Gaussian part with variance 1/2: E e^{δX} = e^{δ²/4}.
        // Bernoulli part ±1/√2: cosh(δ/√2).
        // Uniform disk of radius R = √2: the real part has density
        // (2/(πR²))√(R² − x²); integrate the MGF by the midpoint rule.
        let r = std::f64::consts::SQRT_2;
        let disk_mgf = |delta: f64| {
            let m = 20_000;
            let h = 2.0 * r / m as f64;
            (0..m)
                .map(|i| {
                    let x = -r + (i as f64 + 0.5) * h;
                    2.0 / (std::f64::consts::PI * r * r)
                        * (r * r - x * x).sqrt()
                        * (delta * x).exp()
                })
                .sum::<f64>()
                * h
        };
        for i in -40..=40 {
            let d = i as f64 * 0.25;
            let c = CoefficientDistribution::Gaussian
                .subgaussian_constant()
                .unwrap();
            assert!((d * d / 4.0).exp() <= (c * d * d).exp() * (1.0 + 1e-15));
            let c = CoefficientDistribution::Bernoulli
                .subgaussian_constant()
                .unwrap();
            assert!((d / 2f64.sqrt()).cosh() <= (c * d * d).exp() * (1.0 + 1e-15));
            let c = CoefficientDistribution::UniformDisk
                .subgaussian_constant()
                .unwrap();
            assert!(disk_mgf(d) <= (c * d * d).exp() * (1.0 + 1e-6));
        }
        assert!(CoefficientDistribution::Unit
            .subgaussian_constant()
            .is_none());
    }

    #[test]
    fn unit_coefficients_reassemble() {
        let g = Grid::new(2, 64, 32.0).unwrap();
        let f = gaussian(g, 0.6);
        let b = BumpFunction::default();
        for scale in [1.0, 2.0] {
            let spec = RandomizationSpec::new(CoefficientDistribution::Unit, 0, scale).unwrap();
            let r = dilated_randomize(&f, &spec, &b).unwrap();
            assert!(r.difference(&f).unwrap().l2_norm() <= 1e-12 * f.l2_norm());
        }
    }

    #[test]
    fn unit_scale_matches_wiener_bitwise() {
        let g = Grid::new(2, 32, 16.0).unwrap();
        let f = gaussian(g, 0.6);
        let b = BumpFunction::default();
        let spec = RandomizationSpec::unit_cubes(CoefficientDistribution::Gaussian, 11);
        let a = wiener_randomize(&f, &spec, &b).unwrap();
        let c = dilated_randomize(&f, &spec, &b).unwrap();
        assert_eq!(a.values(), c.values());
        let bad = RandomizationSpec::new(CoefficientDistribution::Gaussian, 11, 2.0).unwrap();
        assert!(wiener_randomize(&f, &bad, &b).is_err());
    }

    #[test]
    fn symbol_matches_direct_cube_sum() {
        let g = Grid::new(2, 16, 20.0).unwrap();
        let b = BumpFunction::new(0.7).unwrap();
        let spec = RandomizationSpec::new(CoefficientDistribution::Gaussian, 4, 1.5).unwrap();
        let sym = random_symbol(&g, &spec, &b).unwrap();
        let cubes = cube_indices(&g, 1.5, &b).unwrap();
        g.for_each_frequency(|flat, xi| {
            let mut direct = Complex64::new(0.0, 0.0);
            for n in &cubes {
                let w: f64 = xi
                    .iter()
                    .zip(n)
                    .map(|(&x, &c)| b.window(1.5 * x - c as f64))
                    .product();
                direct += spec.coefficient(n) * w;
            }
            assert!((direct - sym[flat]).norm() < 1e-13);
        });
    }

    #[test]
    fn coarse_grid_rejected() {
        let g = Grid::new(1, 16, 6.0).unwrap();
        let f = gaussian(g, 0.5);
        let spec = RandomizationSpec::unit_cubes(CoefficientDistribution::Gaussian, 1);
        assert!(matches!(
            wiener_randomize(&f, &spec, &BumpFunction::default()),
            Err(Error::UnresolvedCubes { .. })
        ));
        let g = Grid::new(1, 16, 13.0).unwrap();
        let f = gaussian(g, 0.5);
        let spec = RandomizationSpec::new(CoefficientDistribution::Gaussian, 1, 2.0).unwrap();
        assert!(dilated_randomize(&f, &spec, &BumpFunction::default()).is_err());
    }

    #[test]
    fn randomization_is_linear() {
        let g = Grid::new(1, 64, 20.0).unwrap();
        let f = gaussian(g, 0.5);
        let h = Field::from_physical_fn(g, |x| Complex64::new(0.0, (-x[0] * x[0]).exp() * x[0]));
        let b = BumpFunction::default();
        let spec = RandomizationSpec::unit_cubes(CoefficientDistribution::Bernoulli, 8);
        let alpha = Complex64::new(0.3, -1.2);
        let beta = Complex64::new(2.0, 0.5);
        let mut combo = f.scaled(alpha);
        combo.add_scaled(beta, &h).unwrap();
        let lhs = wiener_randomize(&combo, &spec, &b).unwrap();
        let mut rhs = wiener_randomize(&f, &spec, &b).unwrap().scaled(alpha);
        rhs.add_scaled(beta, &wiener_randomize(&h, &spec, &b).unwrap())
            .unwrap();
        assert!(lhs.difference(&rhs).unwrap().l2_norm() <= 1e-12 * lhs.l2_norm());
    }

    #[test]
    fn dilated_norm_matches_resummed_pieces() {
        // One fixed draw: the norm of the randomized field equals the norm of
        // the explicit sum of independently built cube pieces.
        let g = Grid::new(2, 32, 30.0).unwrap();
        let f = gaussian(g, 0.9);
        let b = BumpFunction::default();
        for scale in [1.0, 2.0] {
            let spec =
                RandomizationSpec::new(CoefficientDistribution::Gaussian, 21, scale).unwrap();
            let direct = dilated_randomize(&f, &spec, &b).unwrap();
            let mut resum = Field::zeros(g, Representation::Physical);
            for n in cube_indices(&g, scale, &b).unwrap() {
                let piece = cube_piece(&f, scale, &n, &b).unwrap();
                resum.add_scaled(spec.coefficient(&n), &piece).unwrap();
            }
            assert!(
                (direct.l2_norm() - resum.l2_norm()).abs() <= 1e-12 * direct.l2_norm(),
                "scale {scale}"
            );
        }
    }

    #[test]
    fn rescale_examples() {
        let g = Grid::new(2, 16, 2.0 * std::f64::consts::PI).unwrap();
        let f = Field::from_spectral_fn(g, |xi| {
            let r2: f64 = xi.iter().map(|x| x * x).sum();
            if xi.iter().all(|x| x.abs() <= 3.0) {
                Complex64::new((-0.3 * r2).exp() * (1.0 + xi[0]), xi[1])
            } else {
                Complex64::new(0.0, 0.0)
            }
        });
        let same = rescale_field(&f, 1.0).unwrap();
        assert_eq!(same.to_spectral().values(), f.to_spectral().values());
        let up = rescale_field(&f, 2.0).unwrap();
        for gamma in [0.0, 0.25, 1.0] {
            let a = up.norm(NormKind::HomogeneousSobolev(gamma)).unwrap();
            let b = f.norm(NormKind::HomogeneousSobolev(gamma)).unwrap();
            assert!(
                (a - 2f64.powf(gamma + 1.0) * b).abs() <= 1e-12 * a,
                "gamma {gamma}"
            );
        }
        // L² (γ = 0, zero mode kept) picks up λ^{−(N−4)/2} = 2 for N = 2.
        assert!((up.l2_norm() - 2.0 * f.l2_norm()).abs() <= 1e-12 * up.l2_norm());
        let down = rescale_field(&up, 0.5).unwrap();
        assert!(down.difference(&f).unwrap().l2_norm() <= 1e-13 * f.l2_norm());

        assert!(rescale_field(&f, 3.0).is_err());
        assert!(matches!(
            rescale_field(&f, 4.0),
            Err(Error::BandOverflow { .. })
        ));
        assert!(matches!(
            rescale_field(&f, 0.5),
            Err(Error::BandOverflow { .. })
        ));
    }
}
