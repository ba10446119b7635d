//! Exponent formulas, the scaling identity, Monte Carlo tail experiments and
//! the bilinear ratio sweep.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::fit::fit_line;
use crate::grid::{mixed_norm_from_samples, Field, Grid, LpMode, NormKind, Representation};
use crate::propagator::{
    admissible_check, transit_horizon, FreeFlow, PropagatorParams, WRAP_EDGE, WRAP_TOLERANCE,
};
use crate::randomization::rescale_field;
use crate::randomization::{
    apply_symbol, cube_indices, cube_piece, random_symbol, sample_seed, BumpFunction,
    RandomizationSpec,
};
use crate::{Error, Result};

/// Smallest Monte Carlo sample count accepted by the tail experiments.
pub const MIN_SAMPLES: usize = 1000;
/// Automatic thresholds stop where fewer than this many samples exceed them.
pub const MIN_TAIL_COUNT: u64 = 10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CriticalExponents {
    pub dim: usize,
    pub m: usize,
    pub gamma_c: f64,
    pub gamma_n: f64,
    pub beta_c: f64,
    /// Undefined for `N = 1` and for `N = 2, m = 3`.
    pub beta_n: Option<f64>,
    /// True when `N ≥ 5`, the range where `γ_N` is meant to be used.
    pub gamma_n_in_range: bool,
}

pub fn critical_exponents(dim: usize, m: usize) -> Result<CriticalExponents> {
    if dim == 0 || m < 3 {
        return Err(Error::InvalidArgument(format!(
            "need N >= 1 and m >= 3, got N = {dim}, m = {m}"
        )));
    }
    let n = dim as f64;
    let mf = m as f64;
    let gamma_c = (n - 4.0) / 2.0;
    let gamma_n = f64::max((n - 1.0) * (n - 4.0) / (2.0 * (n + 5.0)), (n - 4.0) / 4.0);
    let beta_c = n / 2.0 - 2.0 / (mf - 1.0);
    let beta_n = match (dim, m) {
        (2, m) if m >= 4 => Some(beta_c - 0.5 + (mf - 2.0) / (3.0 * mf - 7.0)),
        (d, m) if d >= 3 && m < 5 => {
            Some(beta_c - 0.5 + (5.0 - mf) / (2.0 * (n - 1.0) * (mf - 1.0)))
        }
        (d, _) if d >= 3 => Some(beta_c - 0.5),
        _ => None,
    };
    Ok(CriticalExponents {
        dim,
        m,
        gamma_c,
        gamma_n,
        beta_c,
        beta_n,
        gamma_n_in_range: dim >= 5,
    })
}

/// `|‖f_λ‖_{Ḣ^γ} − λ^{γ−(N−4)/2}‖f‖_{Ḣ^γ}| / ‖f_λ‖_{Ḣ^γ}`.
pub fn scaling_identity_check(f: &Field, gamma: f64, lambda: f64) -> Result<f64> {
    let scaled = rescale_field(f, lambda)?;
    let n = f.grid().dim() as f64;
    let lhs = scaled.norm(NormKind::HomogeneousSobolev(gamma))?;
    let rhs = lambda.powf(gamma - (n - 4.0) / 2.0) * f.norm(NormKind::HomogeneousSobolev(gamma))?;
    if lhs == 0.0 {
        return Ok(if rhs == 0.0 { 0.0 } else { f64::INFINITY });
    }
    Ok((lhs - rhs).abs() / lhs)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Lambda0 {
    pub value: f64,
    /// `ε = 1` makes `log(1/ε)` vanish.
    pub degenerate: bool,
    /// The suppressed proportionality constant, fixed to 1.
    pub constant: f64,
    pub exponent: f64,
}

/// `λ₀ = (log(1/ε) ‖f‖² / δ²)^{1/(N−4−2γ)}` with constant 1.
pub fn dilation_scale_lambda0(
    epsilon: f64,
    f_norm: f64,
    gamma: f64,
    dim: usize,
    delta: f64,
) -> Result<Lambda0> {
    let gamma_c = (dim as f64 - 4.0) / 2.0;
    if !(gamma < gamma_c) {
        return Err(Error::InvalidArgument(format!(
            "lambda0 needs gamma < (N-4)/2 = {gamma_c}, got {gamma}"
        )));
    }
    if !(epsilon > 0.0 && epsilon <= 1.0) {
        return Err(Error::InvalidArgument(format!(
            "epsilon must lie in (0, 1], got {epsilon}"
        )));
    }
    if !(delta > 0.0 && delta.is_finite()) || !(f_norm >= 0.0 && f_norm.is_finite()) {
        return Err(Error::InvalidArgument(
            "delta must be positive and the norm finite".into(),
        ));
    }
    let exponent = 1.0 / (dim as f64 - 4.0 - 2.0 * gamma);
    let base = (1.0 / epsilon).ln() * f_norm * f_norm / (delta * delta);
    Ok(Lambda0 {
        value: base.powf(exponent),
        degenerate: epsilon == 1.0,
        constant: 1.0,
        exponent,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ThresholdRule {
    Explicit(Vec<f64>),
    /// `count` thresholds evenly spaced in `λ²` from the sample median up to
    /// the largest value still exceeded by [`MIN_TAIL_COUNT`] samples.
    Auto {
        count: usize,
    },
}

impl Default for ThresholdRule {
    fn default() -> Self {
        ThresholdRule::Auto { count: 16 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailReport {
    pub norm_descriptor: String,
    pub samples: usize,
    pub thresholds: Vec<f64>,
    pub counts: Vec<u64>,
    pub empirical_probs: Vec<f64>,
    /// Least squares of `log p` against `λ²` over thresholds with nonzero count.
    pub fit: Option<TailFit>,
    /// Fraction of samples whose norm is finite.
    pub finite_fraction: f64,
    pub mean: f64,
    /// Norm of the deterministic input used to normalize the fitted rate.
    pub reference_norm: f64,
    /// `−slope · reference_norm²`, the empirical `c` in `exp(−cλ²/‖f‖²)`.
    pub fitted_c: Option<f64>,
}

impl TailReport {
    pub const CSV_HEADER: &'static str = "lambda,lambda_sq,count,prob,log_prob";

    pub fn from_values(
        values: &[f64],
        rule: &ThresholdRule,
        descriptor: impl Into<String>,
        reference_norm: f64,
    ) -> Result<TailReport> {
        let samples = values.len();
        if samples == 0 {
            return Err(Error::InsufficientData("no samples".into()));
        }
        let finite: Vec<f64> = values.iter().copied().filter(|v| v.is_finite()).collect();
        let finite_fraction = finite.len() as f64 / samples as f64;
        let mut sorted = finite.clone();
        sorted.sort_by(f64::total_cmp);
        let thresholds = match rule {
            ThresholdRule::Explicit(t) => {
                if t.is_empty() || t.iter().any(|x| !(x.is_finite() && *x > 0.0)) {
                    return Err(Error::InvalidArgument("thresholds must be positive".into()));
                }
                if t.windows(2).any(|w| w[1] <= w[0]) {
                    return Err(Error::InvalidArgument("thresholds must increase".into()));
                }
                t.clone()
            }
            ThresholdRule::Auto { count } => auto_thresholds(&sorted, *count)?,
        };
        let counts: Vec<u64> = thresholds
            .iter()
            .map(|&l| values.iter().filter(|&&v| v > l).count() as u64)
            .collect();
        if counts.iter().all(|&c| c == 0) {
            return Err(Error::InsufficientData(
                "no sample exceeds any threshold (thresholds too high)".into(),
            ));
        }
        let empirical_probs: Vec<f64> = counts.iter().map(|&c| c as f64 / samples as f64).collect();
        let (xs, ys): (Vec<f64>, Vec<f64>) = thresholds
            .iter()
            .zip(&empirical_probs)
            .filter(|(_, &p)| p > 0.0)
            .map(|(l, p)| (l * l, p.ln()))
            .unzip();
        let fit = if xs.len() >= 3 {
            fit_line(&xs, &ys).ok().map(|l| TailFit {
                slope: l.slope,
                intercept: l.intercept,
                r_squared: l.r_squared.clamp(0.0, 1.0),
            })
        } else {
            None
        };
        let mean = if finite.is_empty() {
            f64::NAN
        } else {
            finite.iter().sum::<f64>() / finite.len() as f64
        };
        Ok(TailReport {
            norm_descriptor: descriptor.into(),
            samples,
            thresholds,
            counts,
            empirical_probs,
            fitted_c: fit.map(|f| -f.slope * reference_norm * reference_norm),
            fit,
            finite_fraction,
            mean,
            reference_norm,
        })
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(Self::CSV_HEADER);
        out.push('\n');
        for ((l, c), p) in self
            .thresholds
            .iter()
            .zip(&self.counts)
            .zip(&self.empirical_probs)
        {
            out.push_str(&format!("{l:e},{:e},{c},{p:e},{:e}\n", l * l, p.ln()));
        }
        out
    }
}

fn auto_thresholds(sorted: &[f64], count: usize) -> Result<Vec<f64>> {
    if count < 3 {
        return Err(Error::InvalidArgument(
            "automatic thresholds need count >= 3".into(),
        ));
    }
    if sorted.is_empty() {
        return Err(Error::InsufficientData("no finite samples".into()));
    }
    let median = sorted[sorted.len() / 2];
    let upper_index = sorted.len().saturating_sub(MIN_TAIL_COUNT as usize + 1);
    let upper = sorted[upper_index].max(median);
    if !(upper > median) {
        // No spread: bracket the common value so the step is visible.
        let v = median.abs().max(f64::MIN_POSITIVE);
        return Ok(vec![0.5 * v, v, 1.5 * v]);
    }
    let (a, b) = (median * median, upper * upper);
    Ok((0..count)
        .map(|i| (a + (b - a) * i as f64 / (count - 1) as f64).sqrt())
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TailMode {
    HGamma,
    Lp,
}

fn check_samples(samples: usize) -> Result<()> {
    if samples < MIN_SAMPLES {
        return Err(Error::InvalidArgument(format!(
            "tail experiments need at least {MIN_SAMPLES} samples, got {samples}"
        )));
    }
    Ok(())
}

fn draw_spec(spec: &RandomizationSpec, sample: usize) -> RandomizationSpec {
    spec.with_seed(sample_seed(spec.seed, sample as u64))
}

/// Tail of `‖f^ω‖_{H^γ}` or `‖f^ω‖_{L^p}` over independent draws.
#[allow(clippy::too_many_arguments)]
pub fn randomization_tail_experiment(
    f: &Field,
    gamma: f64,
    p: f64,
    mode: TailMode,
    spec: &RandomizationSpec,
    bump: &BumpFunction,
    samples: usize,
    rule: &ThresholdRule,
) -> Result<TailReport> {
    check_samples(samples)?;
    let grid = *f.grid();
    let fhat = f.to_spectral();
    let weights: Vec<f64> = grid
        .frequency_norms_sq()
        .into_iter()
        .map(|k2| (1.0 + k2).powf(gamma) * grid.cell_volume())
        .collect();
    let values = (0..samples)
        .into_par_iter()
        .map(|s| -> Result<f64> {
            let symbol = random_symbol(&grid, &draw_spec(spec, s), bump)?;
            match mode {
                TailMode::HGamma => Ok(fhat
                    .values()
                    .iter()
                    .zip(&symbol)
                    .zip(&weights)
                    .map(|((c, g), w)| w * (c * g).norm_sqr())
                    .sum::<f64>()
                    .sqrt()),
                TailMode::Lp => apply_symbol(&fhat, &symbol).lebesgue_norm(p),
            }
        })
        .collect::<Result<Vec<f64>>>()?;
    let (descriptor, reference) = match mode {
        TailMode::HGamma => (format!("H^{gamma}"), f.norm(NormKind::Sobolev(gamma))?),
        TailMode::Lp => (format!("L^{p}"), f.l2_norm()),
    };
    TailReport::from_values(&values, rule, descriptor, reference)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Horizon {
    /// Local-in-time norm on `[0, T₀]`, refit on `[0, T₀/2]` and `[0, T₀/4]`.
    Local(f64),
    /// Global-in-time surrogate: `[0, T]` with `T ≤ max` the largest grid time
    /// passing the wrap-around guard.
    Global { max: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StrichartzConfig {
    pub q: f64,
    pub r: f64,
    pub horizon: Horizon,
    /// Uniform time intervals on the longest horizon; a multiple of 4.
    pub time_steps: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HorizonTail {
    pub horizon: f64,
    pub report: TailReport,
    /// `−slope`: decay rate of `log p` in `λ²`.
    pub rate: Option<f64>,
    /// `rate · ‖f‖²_{L²} · T^{2/q}`, constant in `T` if the `T^{−2/q}` law is exact.
    pub normalized_c: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrichartzReport {
    pub q: f64,
    pub r: f64,
    /// True for the finite-box stand-in of the global-in-time norm.
    pub surrogate: bool,
    pub tails: Vec<HorizonTail>,
    /// Log-log slope of the fitted rate against `T` (the law predicts `−2/q`).
    pub rate_exponent: Option<f64>,
}

/// Largest time on `times` for which the expected boundary mass fraction of
/// `U(t) f^ω`, `Σ_n ‖1_edge U(t)ψ(D−n)f‖² / Σ_n ‖ψ(D−n)f‖²`, stays within the
/// guard at every earlier grid time.
fn guarded_horizon(
    f: &Field,
    flow: &FreeFlow,
    bump: &BumpFunction,
    scale: f64,
    times: &[f64],
) -> Result<usize> {
    let grid = *f.grid();
    let total_mass: f64 = f.l2_norm().powi(2);
    let mut pieces = Vec::new();
    for n in cube_indices(&grid, scale, bump)? {
        let piece = cube_piece(f, scale, &n, bump)?.to_spectral();
        if piece.l2_norm().powi(2) > 1e-16 * total_mass {
            pieces.push(piece);
        }
    }
    let piece_mass: f64 = pieces.iter().map(|p| p.l2_norm().powi(2)).sum();
    let mut last_good = 0;
    for (i, &t) in times.iter().enumerate().skip(1) {
        let boundary: f64 = pieces
            .par_iter()
            .map(|p| {
                let u = flow.evolve(p, t).expect("same grid");
                u.boundary_mass_fraction(WRAP_EDGE) * u.l2_norm().powi(2)
            })
            .collect::<Vec<f64>>()
            .iter()
            .sum();
        let fraction = boundary / piece_mass;
        if fraction > WRAP_TOLERANCE {
            if last_good == 0 {
                return Err(Error::WrapAround {
                    time: t,
                    mass_fraction: fraction,
                });
            }
            break;
        }
        last_good = i;
    }
    Ok(last_good)
}

/// Tail of `‖U_μ(t) f^ω‖_{L^q_t L^r_x}` over independent draws.
pub fn strichartz_tail_experiment(
    f: &Field,
    cfg: &StrichartzConfig,
    params: PropagatorParams,
    spec: &RandomizationSpec,
    bump: &BumpFunction,
    samples: usize,
    rule: &ThresholdRule,
) -> Result<StrichartzReport> {
    check_samples(samples)?;
    let (q, r) = (cfg.q, cfg.r);
    if cfg.time_steps < 4 || !cfg.time_steps.is_multiple_of(4) {
        return Err(Error::InvalidArgument(format!(
            "time_steps must be a positive multiple of 4, got {}",
            cfg.time_steps
        )));
    }
    let grid = *f.grid();
    let flow = FreeFlow::new(grid, params);
    let (t_max, surrogate) = match cfg.horizon {
        Horizon::Local(t) => {
            if !(q >= 2.0 && q.is_finite() && r >= 2.0 && r.is_finite()) {
                return Err(Error::InvalidArgument(format!(
                    "local mode needs 2 <= q, r < inf, got ({q}, {r})"
                )));
            }
            (t, false)
        }
        Horizon::Global { max } => {
            if !(q.is_finite() && r.is_finite() && admissible_check(q, r, grid.dim())) {
                return Err(Error::InvalidArgument(format!(
                    "({q}, {r}) is not a finite biharmonic admissible pair in N = {}",
                    grid.dim()
                )));
            }
            (max, true)
        }
    };
    if !(t_max.is_finite() && t_max > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "horizon must be positive, got {t_max}"
        )));
    }
    let steps = cfg.time_steps;
    let mut times: Vec<f64> = (0..=steps)
        .map(|i| t_max * i as f64 / steps as f64)
        .collect();
    let prefixes: Vec<usize> = if surrogate {
        let last = guarded_horizon(f, &flow, bump, spec.scale, &times)?;
        times.truncate(last + 1);
        vec![last + 1]
    } else {
        vec![steps + 1, steps / 2 + 1, steps / 4 + 1]
    };

    let fhat = f.to_spectral();
    let per_sample = (0..samples)
        .into_par_iter()
        .map(|s| -> Result<Vec<f64>> {
            let symbol = random_symbol(&grid, &draw_spec(spec, s), bump)?;
            let base = apply_symbol(&fhat, &symbol);
            let mut spatial = Vec::with_capacity(times.len());
            for &t in &times {
                let mut u = base.clone();
                flow.apply_spectral(u.values_mut(), t);
                u.transform_in_place(Representation::Physical);
                spatial.push(u.lebesgue_norm(r)?);
            }
            prefixes
                .iter()
                .map(|&k| mixed_norm_from_samples(&times[..k], &spatial[..k], q))
                .collect()
        })
        .collect::<Result<Vec<Vec<f64>>>>()?;

    let norm_sq = f.l2_norm().powi(2);
    let mut tails = Vec::with_capacity(prefixes.len());
    for (j, &k) in prefixes.iter().enumerate() {
        let horizon = times[k - 1];
        let values: Vec<f64> = per_sample.iter().map(|v| v[j]).collect();
        let label = if surrogate {
            format!("L^{q}_t L^{r}_x on [0,{horizon}] (global surrogate)")
        } else {
            format!("L^{q}_t L^{r}_x on [0,{horizon}]")
        };
        let report = TailReport::from_values(&values, rule, label, f.l2_norm())?;
        let rate = report.fit.map(|f| -f.slope);
        tails.push(HorizonTail {
            horizon,
            rate,
            normalized_c: rate.map(|c| c * norm_sq * horizon.powf(2.0 / q)),
            report,
        });
    }
    let rate_exponent =
        if tails.len() >= 2 && tails.iter().all(|t| matches!(t.rate, Some(c) if c > 0.0)) {
            let x: Vec<f64> = tails.iter().map(|t| t.horizon.ln()).collect();
            let y: Vec<f64> = tails.iter().map(|t| t.rate.unwrap().ln()).collect();
            fit_line(&x, &y).ok().map(|l| l.slope)
        } else {
            None
        };
    Ok(StrichartzReport {
        q,
        r,
        surrogate,
        tails,
        rate_exponent,
    })
}

/// Field with spectral coefficients `(a + ib) e^{−|ξ|²/(2w²)}`, `a, b` standard normal.
pub fn random_gaussian_spectrum(grid: Grid, seed: u64, width: f64) -> Field {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut values = Vec::with_capacity(grid.len());
    grid.for_each_frequency(|_, xi| {
        let r2: f64 = xi.iter().map(|x| x * x).sum();
        let re: f64 = StandardNormal.sample(&mut rng);
        let im: f64 = StandardNormal.sample(&mut rng);
        values.push(Complex64::new(re, im) * (-r2 / (2.0 * width * width)).exp());
    });
    Field::new(grid, values, Representation::Spectral).expect("length matches grid")
}

/// Outer radius of the frequency support of `P_M`.
fn block_radius(m: f64) -> f64 {
    2.0 * m
}

/// Largest dyadic `M₂` admitted by the sweep: blocks must sit inside the band.
pub fn bilinear_cap(grid: &Grid) -> f64 {
    let mut m = 1.0;
    while 2.0 * m <= 0.5 * grid.nyquist() {
        m *= 2.0;
    }
    m
}

/// Time samples on `[0, T]` fine enough that the fastest phase in a block of
/// radius `2M₂` turns by at most 1/4 radian per step.
fn bilinear_time_steps(params: PropagatorParams, m2: f64, horizon: f64) -> usize {
    let r = block_radius(m2);
    let omega = params.omega(r * r);
    ((horizon * omega / 0.25).ceil() as usize).max(32)
}

/// `‖U(t)P_{M₁}f · U(t)P_{M₂}g‖_{L²([0,T]×box)} / (M₁^{(N−4)/2}(M₁/M₂)^{3/2}‖P_{M₁}f‖‖P_{M₂}g‖)`.
///
/// `T` must not exceed the transit horizon of the fastest waves in `P_{M₂}`.
pub fn bilinear_ratio_check(
    f: &Field,
    g: &Field,
    m1: f64,
    m2: f64,
    params: PropagatorParams,
    horizon: f64,
) -> Result<f64> {
    f.check_same_grid(g)?;
    let grid = *f.grid();
    if grid.dim() < 5 {
        return Err(Error::InvalidArgument(format!(
            "the bilinear estimate needs N >= 5, got {}",
            grid.dim()
        )));
    }
    crate::grid::check_dyadic(m1)?;
    crate::grid::check_dyadic(m2)?;
    if m1 > m2 {
        return Err(Error::InvalidArgument(format!(
            "need M1 <= M2, got {m1} > {m2}"
        )));
    }
    if block_radius(m2) > grid.nyquist() {
        return Err(Error::InvalidArgument(format!(
            "P_{m2} is not resolved below the Nyquist frequency {}",
            grid.nyquist()
        )));
    }
    let limit = transit_horizon(&grid, params, block_radius(m2));
    if !(horizon > 0.0) || horizon > limit {
        return Err(Error::TransitExceeded { horizon, limit });
    }
    let pf = f.lp_project(m1, LpMode::Block)?.to_spectral();
    let pg = g.lp_project(m2, LpMode::Block)?.to_spectral();
    let (nf, ng) = (pf.l2_norm(), pg.l2_norm());
    if nf == 0.0 {
        return Err(Error::EmptyProjection(m1 as u64));
    }
    if ng == 0.0 {
        return Err(Error::EmptyProjection(m2 as u64));
    }
    let flow = FreeFlow::new(grid, params);
    let steps = bilinear_time_steps(params, m2, horizon);
    let cell = grid.cell_volume();
    let mut integrand = Vec::with_capacity(steps + 1);
    let mut times = Vec::with_capacity(steps + 1);
    for i in 0..=steps {
        let t = horizon * i as f64 / steps as f64;
        let mut a = pf.clone();
        flow.apply_spectral(a.values_mut(), t);
        a.transform_in_place(Representation::Physical);
        let mut b = pg.clone();
        flow.apply_spectral(b.values_mut(), t);
        b.transform_in_place(Representation::Physical);
        let sq: f64 = a
            .values()
            .iter()
            .zip(b.values())
            .map(|(x, y)| (x * y).norm_sqr())
            .sum();
        integrand.push((sq * cell).sqrt());
        times.push(t);
    }
    let num = mixed_norm_from_samples(&times, &integrand, 2.0)?;
    let n = grid.dim() as f64;
    let den = m1.powf((n - 4.0) / 2.0) * (m1 / m2).powf(1.5) * nf * ng;
    Ok(num / den)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BilinearPoint {
    pub m1: f64,
    pub m2: f64,
    pub horizon: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BilinearReport {
    pub pairs: Vec<BilinearPoint>,
    /// Slope of `log ratio` against `log(M₂/M₁)`.
    pub trend_slope: f64,
}

impl BilinearReport {
    pub const CSV_HEADER: &'static str = "M1,M2,ratio";

    pub fn to_csv(&self) -> String {
        let mut out = String::from(Self::CSV_HEADER);
        out.push('\n');
        for p in &self.pairs {
            out.push_str(&format!("{},{},{:e}\n", p.m1, p.m2, p.ratio));
        }
        out
    }
}

/// Ratios for `M₂ = M₁·k`, `k` in `multipliers`, each on its own transit
/// horizon `T(M₂)`; pairs with `M₂` above [`bilinear_cap`] are skipped.
pub fn bilinear_sweep(
    f: &Field,
    g: &Field,
    m1: f64,
    multipliers: &[f64],
    params: PropagatorParams,
) -> Result<BilinearReport> {
    let grid = *f.grid();
    let cap = bilinear_cap(&grid);
    let mut pairs = Vec::new();
    for &k in multipliers {
        let m2 = m1 * k;
        if m2 > cap {
            continue;
        }
        let horizon = transit_horizon(&grid, params, block_radius(m2));
        let ratio = bilinear_ratio_check(f, g, m1, m2, params, horizon)?;
        pairs.push(BilinearPoint {
            m1,
            m2,
            horizon,
            ratio,
        });
    }
    if pairs.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "only {} dyadic pair(s) fit under the cap M2 <= {cap}",
            pairs.len()
        )));
    }
    let x: Vec<f64> = pairs.iter().map(|p| (p.m2 / p.m1).ln()).collect();
    let y: Vec<f64> = pairs.iter().map(|p| p.ratio.ln()).collect();
    Ok(BilinearReport {
        trend_slope: fit_line(&x, &y)?.slope,
        pairs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::randomization::CoefficientDistribution;

    #[test]
    fn exponent_examples() {
        let e = critical_exponents(5, 3).unwrap();
        assert_eq!(e.gamma_c, 0.5);
        assert_eq!(e.gamma_n, 0.25);
        assert_eq!(e.beta_c, 1.5);
        assert!((e.beta_n.unwrap() - 1.125).abs() < 1e-15);
        assert!(e.beta_n.unwrap() > e.gamma_c);
        let e7 = critical_exponents(7, 3).unwrap();
        assert!((e7.gamma_n - 0.75).abs() < 1e-15);
        assert!(!critical_exponents(3, 3).unwrap().gamma_n_in_range);
        assert!(critical_exponents(1, 3).unwrap().beta_n.is_none());
        assert!(critical_exponents(2, 3).unwrap().beta_n.is_none());
        assert!(critical_exponents(2, 4).unwrap().beta_n.is_some());
        assert!(critical_exponents(5, 2).is_err());
    }

    #[test]
    fn lambda0_examples() {
        let l = dilation_scale_lambda0((-1.0f64).exp(), 1.0, 0.3, 5, 1.0).unwrap();
        assert!((l.value - 1.0).abs() < 1e-14);
        assert!((l.exponent - 2.5).abs() < 1e-14);
        let one = dilation_scale_lambda0(1.0, 1.0, 0.3, 5, 1.0).unwrap();
        assert_eq!(one.value, 0.0);
        assert!(one.degenerate);
        assert!(dilation_scale_lambda0(0.5, 1.0, 0.5, 5, 1.0).is_err());
        assert!(dilation_scale_lambda0(0.0, 1.0, 0.1, 5, 1.0).is_err());
    }

    #[test]
    fn step_tail_for_unit_coefficients() {
        let g = Grid::new(2, 16, 16.0).unwrap();
        let f = Field::from_physical_fn(g, |x| {
            Complex64::new((-(x[0] * x[0] + x[1] * x[1]) / 4.0).exp(), 0.0)
        });
        let spec = RandomizationSpec::unit_cubes(CoefficientDistribution::Unit, 0);
        let b = BumpFunction::default();
        let norm = f.norm(NormKind::Sobolev(0.5)).unwrap();
        let rule =
            ThresholdRule::Explicit(vec![0.5 * norm, 0.999 * norm, 1.001 * norm, 2.0 * norm]);
        let rep =
            randomization_tail_experiment(&f, 0.5, 2.0, TailMode::HGamma, &spec, &b, 1000, &rule)
                .unwrap();
        assert_eq!(rep.empirical_probs, vec![1.0, 1.0, 0.0, 0.0]);
        assert!(rep.fit.is_none());
        let auto = randomization_tail_experiment(
            &f,
            0.5,
            2.0,
            TailMode::HGamma,
            &spec,
            &b,
            1000,
            &ThresholdRule::default(),
        )
        .unwrap();
        assert_eq!(auto.counts[0], 1000);
        assert_eq!(auto.counts[2], 0);
    }

    #[test]
    fn thresholds_too_high_is_an_error() {
        let vals = vec![1.0; 10];
        let rule = ThresholdRule::Explicit(vec![2.0, 3.0]);
        assert!(TailReport::from_values(&vals, &rule, "x", 1.0).is_err());
    }

    #[test]
    fn csv_schema() {
        let vals: Vec<f64> = (0..100).map(|i| i as f64 / 10.0).collect();
        let rep = TailReport::from_values(
            &vals,
            &ThresholdRule::Explicit(vec![1.0, 2.0, 3.0]),
            "x",
            1.0,
        )
        .unwrap();
        let csv = rep.to_csv();
        assert!(csv.starts_with("lambda,lambda_sq,count,prob,log_prob\n"));
        assert_eq!(csv.lines().count(), 4);
        assert!(rep.fit.is_some());
    }

    #[test]
    fn bilinear_needs_five_dimensions_and_data() {
        let g = Grid::new(2, 16, 6.0).unwrap();
        let f = random_gaussian_spectrum(g, 1, 2.0);
        let p = PropagatorParams::new(0.0).unwrap();
        assert!(bilinear_ratio_check(&f, &f, 1.0, 1.0, p, 1e-3).is_err());
    }
}
