//! The free flow `U_μ(t) = exp(−it(Δ² − μΔ))` and related utilities.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::fit::{fit_line, LineFit};
use crate::grid::{Field, Grid, Representation};
use crate::{Error, Result};

/// Half-width (in units of `L`) beyond which mass counts as touching the
/// periodic boundary.
pub const WRAP_EDGE: f64 = 0.45;
/// Largest boundary mass fraction tolerated by the wrap-around guard.
pub const WRAP_TOLERANCE: f64 = 1e-6;
/// Fraction of the box a wave packet may cross before it counts as wrapping.
pub const TRANSIT_FRACTION: f64 = 0.25;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PropagatorParams {
    mu: f64,
}

impl PropagatorParams {
    pub fn new(mu: f64) -> Result<Self> {
        if !(mu.is_finite() && mu >= 0.0) {
            return Err(Error::InvalidArgument(format!(
                "dispersion coefficient mu must be finite and >= 0, got {mu}"
            )));
        }
        Ok(PropagatorParams { mu })
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    /// Dispersion relation `ω(ξ) = |ξ|⁴ + μ|ξ|²` as a function of `|ξ|²`.
    #[inline]
    pub fn omega(&self, k2: f64) -> f64 {
        k2 * k2 + self.mu * k2
    }

    /// Group speed `|∇ω| = 4|ξ|³ + 2μ|ξ|` at radius `r`.
    pub fn group_speed(&self, r: f64) -> f64 {
        4.0 * r * r * r + 2.0 * self.mu * r
    }
}

/// `ω(ξ)` tabulated on a grid, for repeated application of `U_μ(t)`.
#[derive(Debug, Clone)]
pub struct FreeFlow {
    grid: Grid,
    omega: Vec<f64>,
}

impl FreeFlow {
    pub fn new(grid: Grid, params: PropagatorParams) -> Self {
        let omega = grid
            .frequency_norms_sq()
            .into_iter()
            .map(|k2| params.omega(k2))
            .collect();
        FreeFlow { grid, omega }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn omega(&self) -> &[f64] {
        &self.omega
    }

    /// Multiply spectral coefficients by `e^{−itω}` in place.
    pub fn apply_spectral(&self, values: &mut [Complex64], t: f64) {
        if t == 0.0 {
            return;
        }
        for (v, &w) in values.iter_mut().zip(&self.omega) {
            *v *= Complex64::from_polar(1.0, -t * w);
        }
    }

    pub fn evolve(&self, f: &Field, t: f64) -> Result<Field> {
        if *f.grid() != self.grid {
            return Err(Error::Mismatch("field and flow on different grids".into()));
        }
        let mut out = f.to_spectral();
        self.apply_spectral(out.values_mut(), t);
        out.transform_in_place(f.representation());
        Ok(out)
    }
}

/// `U_μ(t) f`; the output keeps the input's representation.
pub fn free_evolve(f: &Field, t: f64, params: PropagatorParams) -> Field {
    if t == 0.0 {
        return f.clone();
    }
    let mut out = f.to_spectral();
    for (v, q) in out
        .values_mut()
        .iter_mut()
        .zip(f.grid().frequency_norms_sq())
    {
        *v *= Complex64::from_polar(1.0, -t * params.omega(q));
    }
    out.transform_in_place(f.representation());
    out
}

/// Fails with [`Error::WrapAround`] if `u` has too much mass near the box edge.
pub fn wrap_guard(u: &Field, time: f64) -> Result<()> {
    let mass_fraction = u.boundary_mass_fraction(WRAP_EDGE);
    if mass_fraction > WRAP_TOLERANCE {
        return Err(Error::WrapAround {
            time,
            mass_fraction,
        });
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    /// Fitted exponent of `‖U(t)f‖_∞ ≈ C t^{slope}`.
    pub slope: f64,
    /// `log C`.
    pub intercept: f64,
    pub constant: f64,
    pub residual: f64,
    pub r_squared: f64,
    pub times: Vec<f64>,
    pub sup_norms: Vec<f64>,
}

/// Longest time for which a packet with frequencies up to `radius` crosses
/// at most [`TRANSIT_FRACTION`] of the box.
pub fn transit_horizon(grid: &Grid, params: PropagatorParams, radius: f64) -> f64 {
    TRANSIT_FRACTION * grid.length() / params.group_speed(radius)
}

/// Log-log fit of sampled sup norms against time.
pub fn decay_fit_from_samples(times: &[f64], sup_norms: &[f64]) -> Result<DecayFit> {
    if times.iter().any(|&t| !(t > 0.0)) || sup_norms.iter().any(|&s| !(s > 0.0)) {
        return Err(Error::InvalidArgument(
            "decay fit needs positive times and norms".into(),
        ));
    }
    let lx: Vec<f64> = times.iter().map(|t| t.ln()).collect();
    let ly: Vec<f64> = sup_norms.iter().map(|s| s.ln()).collect();
    let LineFit {
        slope,
        intercept,
        residual,
        r_squared,
        ..
    } = fit_line(&lx, &ly)?;
    Ok(DecayFit {
        slope,
        intercept,
        constant: intercept.exp(),
        residual,
        r_squared,
        times: times.to_vec(),
        sup_norms: sup_norms.to_vec(),
    })
}

/// Measure the decay rate of `‖U_μ(t) f‖_{L^∞}`.
///
/// Every evolved state must pass the wrap-around guard; the first failing
/// time is reported.
pub fn dispersive_decay_fit(
    f: &Field,
    times: &[f64],
    params: PropagatorParams,
) -> Result<DecayFit> {
    if times.len() < 2 {
        return Err(Error::InsufficientData("decay fit needs two times".into()));
    }
    if times.iter().any(|&t| !(t > 0.0 && t.is_finite())) || times.windows(2).any(|w| w[1] <= w[0])
    {
        return Err(Error::InvalidArgument(
            "decay times must be positive and increasing".into(),
        ));
    }
    let flow = FreeFlow::new(*f.grid(), params);
    let spec = f.to_spectral();
    let mut norms = Vec::with_capacity(times.len());
    for &t in times {
        let mut u = spec.clone();
        flow.apply_spectral(u.values_mut(), t);
        u.transform_in_place(Representation::Physical);
        wrap_guard(&u, t)?;
        norms.push(u.lebesgue_norm(f64::INFINITY)?);
    }
    decay_fit_from_samples(times, &norms)
}

/// Biharmonic admissibility: `4/q + N/r = N/2` and the dimensional range of `r`.
pub fn admissible_check(q: f64, r: f64, dim: usize) -> bool {
    if q.is_nan() || r.is_nan() || q < 2.0 || r < 2.0 || dim == 0 {
        return false;
    }
    let n = dim as f64;
    let lhs = 4.0 / q + n / r;
    if (lhs - n / 2.0).abs() > 1e-12 {
        return false;
    }
    match dim {
        1..=3 => true,
        4 => r.is_finite(),
        _ => r <= 2.0 * n / (n - 4.0) + 1e-12,
    }
}
