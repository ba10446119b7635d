//! Nonlinear dynamics: Strang split-step integration, conserved quantities,
//! the Duhamel map, Picard iteration and the scattering diagnostic.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::grid::{Field, Grid, NormKind, Representation, Trajectory};
use crate::propagator::{FreeFlow, PropagatorParams};
use crate::{Error, Result};

/// Relative squared mass outside the dealias band tolerated in initial data.
pub const BAND_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sign {
    /// `+|u|²u`
    Defocusing,
    /// `−|u|²u`
    Focusing,
}

impl Sign {
    pub fn value(&self) -> f64 {
        match self {
            Sign::Defocusing => 1.0,
            Sign::Focusing => -1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvolutionConfig {
    pub params: PropagatorParams,
    pub sign: Sign,
    pub dt: f64,
    pub horizon: f64,
    /// Retained fraction of the per-axis band: modes with `|k_j| ≤ dealias·n/2` survive.
    pub dealias: f64,
    pub snapshot_stride: usize,
    /// Test hook: when false the nonlinear sub-step is skipped.
    pub nonlinear: bool,
}

impl EvolutionConfig {
    pub fn new(params: PropagatorParams, sign: Sign, dt: f64, horizon: f64) -> Result<Self> {
        let cfg = EvolutionConfig {
            params,
            sign,
            dt,
            horizon,
            dealias: 0.5,
            snapshot_stride: 1,
            nonlinear: true,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_dealias(mut self, dealias: f64) -> Result<Self> {
        self.dealias = dealias;
        self.validate()?;
        Ok(self)
    }

    pub fn with_stride(mut self, stride: usize) -> Result<Self> {
        self.snapshot_stride = stride;
        self.validate()?;
        Ok(self)
    }

    pub fn linear_only(mut self) -> Self {
        self.nonlinear = false;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "dt must be positive, got {}",
                self.dt
            )));
        }
        if !(self.horizon.is_finite() && self.horizon > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "horizon must be positive, got {}",
                self.horizon
            )));
        }
        if self.dt > self.horizon {
            return Err(Error::InvalidArgument("dt exceeds the horizon".into()));
        }
        if !(self.dealias > 0.0 && self.dealias <= 1.0) {
            return Err(Error::InvalidArgument(format!(
                "dealias fraction must lie in (0, 1], got {}",
                self.dealias
            )));
        }
        if self.snapshot_stride == 0 {
            return Err(Error::InvalidArgument(
                "snapshot stride must be >= 1".into(),
            ));
        }
        Ok(())
    }

    /// Number of steps; the step is shrunk slightly so they tile the horizon.
    pub fn steps(&self) -> usize {
        ((self.horizon / self.dt).round() as usize).max(1)
    }

    pub fn effective_dt(&self) -> f64 {
        self.horizon / self.steps() as f64
    }

    /// Snapshot times: every `stride` steps, always including the horizon.
    pub fn snapshot_times(&self) -> Vec<f64> {
        let steps = self.steps();
        let h = self.effective_dt();
        let mut out: Vec<f64> = (0..=steps)
            .step_by(self.snapshot_stride)
            .map(|s| s as f64 * h)
            .collect();
        if !steps.is_multiple_of(self.snapshot_stride) {
            out.push(self.horizon);
        }
        if let Some(last) = out.last_mut() {
            *last = self.horizon;
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PicardConfig {
    pub max_iters: usize,
    pub tol: f64,
    pub divergence_threshold: f64,
}

impl PicardConfig {
    pub fn new(max_iters: usize, tol: f64, divergence_threshold: f64) -> Result<Self> {
        if max_iters == 0 {
            return Err(Error::InvalidArgument("max_iters must be >= 1".into()));
        }
        if !(tol >= 0.0 && tol < divergence_threshold) {
            return Err(Error::InvalidArgument(format!(
                "need 0 <= tol < divergence_threshold, got {tol} and {divergence_threshold}"
            )));
        }
        Ok(PicardConfig {
            max_iters,
            tol,
            divergence_threshold,
        })
    }
}

impl Default for PicardConfig {
    fn default() -> Self {
        PicardConfig {
            max_iters: 50,
            tol: 1e-10,
            divergence_threshold: 1e6,
        }
    }
}

/// Per-axis dealias mask: true where `|k_j| ≤ fraction·n/2` on every axis.
pub fn dealias_mask(grid: &Grid, fraction: f64) -> Vec<bool> {
    let cut = fraction * grid.points_per_axis() as f64 / 2.0;
    let mut out = vec![false; grid.len()];
    grid.for_each_index(|flat, idx| {
        out[flat] = idx
            .iter()
            .all(|&i| grid.wavenumber(i).unsigned_abs() as f64 <= cut + 1e-9);
    });
    out
}

fn apply_mask(values: &mut [Complex64], mask: &[bool]) {
    for (v, &keep) in values.iter_mut().zip(mask) {
        if !keep {
            *v = Complex64::new(0.0, 0.0);
        }
    }
}

/// Spectral copy of `u0` restricted to the dealias band, refusing data with
/// more than [`BAND_TOLERANCE`] relative mass outside it.
fn project_to_band(u0: &Field, mask: &[bool]) -> Result<Field> {
    let mut s = u0.to_spectral();
    let total: f64 = s.values().iter().map(|v| v.norm_sqr()).sum();
    let lost: f64 = s
        .values()
        .iter()
        .zip(mask)
        .filter(|(_, &k)| !k)
        .map(|(v, _)| v.norm_sqr())
        .sum();
    if total > 0.0 && lost / total > BAND_TOLERANCE {
        return Err(Error::BandOverflow {
            lost_fraction: lost / total,
        });
    }
    apply_mask(s.values_mut(), mask);
    Ok(s)
}

/// Strang split-step solution sampled at [`EvolutionConfig::snapshot_times`].
pub fn nonlinear_evolve(u0: &Field, cfg: &EvolutionConfig) -> Result<Trajectory> {
    cfg.validate()?;
    let grid = *u0.grid();
    let mask = dealias_mask(&grid, cfg.dealias);
    let flow = FreeFlow::new(grid, cfg.params);
    let h = cfg.effective_dt();
    let steps = cfg.steps();
    let half: Vec<Complex64> = flow
        .omega()
        .iter()
        .map(|&w| Complex64::from_polar(1.0, -0.5 * h * w))
        .collect();
    let rot = -cfg.sign.value() * h;

    let mut u = project_to_band(u0, &mask)?;
    let mut times = vec![0.0];
    let mut states = vec![u.to_physical()];
    for step in 1..=steps {
        for (v, p) in u.values_mut().iter_mut().zip(&half) {
            *v *= p;
        }
        if cfg.nonlinear {
            u.transform_in_place(Representation::Physical);
            for v in u.values_mut() {
                *v *= Complex64::from_polar(1.0, rot * v.norm_sqr());
            }
            u.transform_in_place(Representation::Spectral);
            apply_mask(u.values_mut(), &mask);
        }
        for (v, p) in u.values_mut().iter_mut().zip(&half) {
            *v *= p;
        }
        if !u.is_finite() {
            return Err(Error::NonFinite {
                last_good_time: (step - 1) as f64 * h,
            });
        }
        if step % cfg.snapshot_stride == 0 || step == steps {
            times.push(if step == steps {
                cfg.horizon
            } else {
                step as f64 * h
            });
            states.push(u.to_physical());
        }
    }
    Trajectory::new(times, states)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Conserved {
    pub mass: f64,
    pub energy: f64,
}

/// Mass `‖u‖²` and energy `½‖Δu‖² + (μ/2)‖∇u‖² ± ¼‖u‖⁴_{L⁴}`.
pub fn conserved_quantities(u: &Field, cfg: &EvolutionConfig) -> Conserved {
    let grid = u.grid();
    let spec = u.to_spectral();
    let phys = u.to_physical();
    let cell = grid.cell_volume();
    let mu = cfg.params.mu();
    let mut mass = 0.0;
    let mut kinetic = 0.0;
    for (v, k2) in spec.values().iter().zip(grid.frequency_norms_sq()) {
        let m = v.norm_sqr();
        mass += m;
        kinetic += (0.5 * k2 * k2 + 0.5 * mu * k2) * m;
    }
    let quartic: f64 = phys.values().iter().map(|v| v.norm_sqr().powi(2)).sum();
    Conserved {
        mass: mass * cell,
        energy: (kinetic + 0.25 * cfg.sign.value() * quartic) * cell,
    }
}

fn check_pair(v: &Trajectory, z: &Trajectory) -> Result<()> {
    if v.grid() != z.grid() {
        return Err(Error::Mismatch("v and z live on different grids".into()));
    }
    if v.times() != z.times() {
        return Err(Error::Mismatch(
            "v and z have different time samples".into(),
        ));
    }
    if v.times()[0] != 0.0 {
        return Err(Error::InvalidArgument(
            "Duhamel times must start at 0".into(),
        ));
    }
    Ok(())
}

/// Shared machinery for the Duhamel map on spectral snapshot vectors.
struct Duhamel {
    flow: FreeFlow,
    mask: Vec<bool>,
    sign: f64,
}

impl Duhamel {
    fn new(grid: Grid, cfg: &EvolutionConfig) -> Self {
        Duhamel {
            flow: FreeFlow::new(grid, cfg.params),
            mask: dealias_mask(&grid, cfg.dealias),
            sign: cfg.sign.value(),
        }
    }

    /// `G(s) = U(−s) P N(v + z)(s)` in spectral form.
    fn integrand(&self, v: &[Complex64], z: &[Complex64], s: f64) -> Result<Vec<Complex64>> {
        let grid = *self.flow.grid();
        let sum: Vec<Complex64> = v.iter().zip(z).map(|(a, b)| a + b).collect();
        let mut w = Field::new(grid, sum, Representation::Spectral)?;
        w.transform_in_place(Representation::Physical);
        for x in w.values_mut() {
            *x *= x.norm_sqr();
        }
        w.transform_in_place(Representation::Spectral);
        let mut g = w.into_values();
        apply_mask(&mut g, &self.mask);
        self.flow.apply_spectral(&mut g, -s);
        Ok(g)
    }

    /// `∓i U(t) S`.
    fn output(&self, acc: &[Complex64], t: f64) -> Vec<Complex64> {
        let mut out: Vec<Complex64> = acc
            .iter()
            .map(|a| a * Complex64::new(0.0, -self.sign))
            .collect();
        self.flow.apply_spectral(&mut out, t);
        out
    }
}

fn spectral_values(traj: &Trajectory) -> Vec<Vec<Complex64>> {
    traj.states()
        .iter()
        .map(|s| s.to_spectral().into_values())
        .collect()
}

/// `Φ(v)(t) = ∓i ∫₀ᵗ U_μ(t − s) N(v + z)(s) ds`, trapezoidal in `s` on the
/// snapshot times.
pub fn duhamel_map(v: &Trajectory, z: &Trajectory, cfg: &EvolutionConfig) -> Result<Trajectory> {
    check_pair(v, z)?;
    let grid = *v.grid();
    let d = Duhamel::new(grid, cfg);
    let vs = spectral_values(v);
    let zs = spectral_values(z);
    let times = v.times();
    let mut acc = vec![Complex64::new(0.0, 0.0); grid.len()];
    let mut prev = d.integrand(&vs[0], &zs[0], times[0])?;
    let mut states = Vec::with_capacity(times.len());
    states.push(Field::zeros(grid, Representation::Physical));
    for i in 1..times.len() {
        let g = d.integrand(&vs[i], &zs[i], times[i])?;
        let w = 0.5 * (times[i] - times[i - 1]);
        for ((a, p), c) in acc.iter_mut().zip(&prev).zip(&g) {
            *a += w * (p + c);
        }
        prev = g;
        let f = Field::new(grid, d.output(&acc, times[i]), Representation::Spectral)?;
        states.push(f.to_physical());
    }
    Trajectory::new(times.to_vec(), states)
}

/// Critical regularity `γ_c = (N − 4)/2`.
pub fn critical_gamma(dim: usize) -> f64 {
    (dim as f64 - 4.0) / 2.0
}

#[derive(Debug, Clone, PartialEq)]
pub struct PicardOutcome {
    pub solution: Trajectory,
    /// `sup_t ‖v_{k+1} − v_k‖_{H^{γ_c}}` for each iterate.
    pub residuals: Vec<f64>,
}

/// Iterate `v_{k+1} = Φ(v_k)` from `v₀ = 0` until the sup-in-time `H^{γ_c}`
/// increment drops below `tol`.
///
/// Each sweep runs forward in time and overwrites `v_k(t_i)` with
/// `v_{k+1}(t_i)` as soon as it is known; the trapezoid for `t_i` only reads
/// `v_k` at `t_j ≤ t_i`, so one copy of the trajectory suffices.
pub fn picard_solve(
    z: &Trajectory,
    cfg: &EvolutionConfig,
    pc: &PicardConfig,
) -> Result<PicardOutcome> {
    if z.times()[0] != 0.0 {
        return Err(Error::InvalidArgument(
            "Duhamel times must start at 0".into(),
        ));
    }
    let grid = *z.grid();
    let d = Duhamel::new(grid, cfg);
    let zs = spectral_values(z);
    let times = z.times();
    let gamma = critical_gamma(grid.dim());
    let weights: Vec<f64> = grid
        .frequency_norms_sq()
        .into_iter()
        .map(|k2| (1.0 + k2).powf(gamma) * grid.cell_volume())
        .collect();

    let mut vs = vec![vec![Complex64::new(0.0, 0.0); grid.len()]; times.len()];
    let mut residuals = Vec::new();
    for iteration in 1..=pc.max_iters {
        let mut acc = vec![Complex64::new(0.0, 0.0); grid.len()];
        let mut prev = d.integrand(&vs[0], &zs[0], times[0])?;
        let mut sup: f64 = 0.0;
        for i in 1..times.len() {
            let g = d.integrand(&vs[i], &zs[i], times[i])?;
            let w = 0.5 * (times[i] - times[i - 1]);
            for ((a, p), c) in acc.iter_mut().zip(&prev).zip(&g) {
                *a += w * (p + c);
            }
            prev = g;
            let next = d.output(&acc, times[i]);
            let diff: f64 = next
                .iter()
                .zip(&vs[i])
                .zip(&weights)
                .map(|((a, b), w)| w * (a - b).norm_sqr())
                .sum();
            sup = sup.max(diff.sqrt());
            vs[i] = next;
        }
        residuals.push(sup);
        if !sup.is_finite() || sup > pc.divergence_threshold {
            return Err(Error::Divergence {
                iteration,
                residual: sup,
            });
        }
        if sup <= pc.tol {
            let states = vs
                .into_iter()
                .map(|v| {
                    let mut f = Field::new(grid, v, Representation::Spectral)?;
                    f.transform_in_place(Representation::Physical);
                    Ok(f)
                })
                .collect::<Result<Vec<_>>>()?;
            return Ok(PicardOutcome {
                solution: Trajectory::new(times.to_vec(), states)?,
                residuals,
            });
        }
    }
    Err(Error::NotConverged {
        iterations: pc.max_iters,
        residual: *residuals.last().unwrap(),
    })
}

/// Free trajectory `U_μ(t) f` at the given times.
pub fn free_trajectory(f: &Field, times: &[f64], params: PropagatorParams) -> Result<Trajectory> {
    let flow = FreeFlow::new(*f.grid(), params);
    let spec = f.to_spectral();
    let states = times
        .iter()
        .map(|&t| {
            let mut u = spec.clone();
            flow.apply_spectral(u.values_mut(), t);
            u.transform_in_place(Representation::Physical);
            u
        })
        .collect();
    Trajectory::new(times.to_vec(), states)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Increment {
    pub t_start: f64,
    pub t_end: f64,
    pub norm: f64,
}

/// `‖w(t_j) − w(t_i)‖_{H^γ}` for the pullback `w(t) = U_μ(−t) v(t)`.
pub fn pullback_increment(
    v: &Trajectory,
    params: PropagatorParams,
    gamma: f64,
    i: usize,
    j: usize,
) -> Result<Increment> {
    let n = v.len();
    if i >= n || j >= n {
        return Err(Error::InvalidArgument(format!(
            "sample indices {i}, {j} out of range for {n} samples"
        )));
    }
    let flow = FreeFlow::new(*v.grid(), params);
    let wi = flow.evolve(&v.states()[i], -v.times()[i])?;
    let wj = flow.evolve(&v.states()[j], -v.times()[j])?;
    Ok(Increment {
        t_start: v.times()[i],
        t_end: v.times()[j],
        norm: wj.difference(&wi)?.norm(NormKind::Sobolev(gamma))?,
    })
}

/// Increments of the pullback over consecutive samples, followed by the
/// (first, last) pair.
pub fn scattering_diagnostic(
    v: &Trajectory,
    params: PropagatorParams,
    gamma: f64,
) -> Result<Vec<Increment>> {
    let flow = FreeFlow::new(*v.grid(), params);
    let pulled = v
        .states()
        .iter()
        .zip(v.times())
        .map(|(s, &t)| flow.evolve(s, -t).map(|f| f.to_spectral()))
        .collect::<Result<Vec<_>>>()?;
    let times = v.times();
    let inc = |i: usize, j: usize| -> Result<Increment> {
        Ok(Increment {
            t_start: times[i],
            t_end: times[j],
            norm: pulled[j]
                .difference(&pulled[i])?
                .norm(NormKind::Sobolev(gamma))?,
        })
    };
    let mut out = Vec::with_capacity(times.len());
    for i in 1..times.len() {
        out.push(inc(i - 1, i)?);
    }
    out.push(inc(0, times.len() - 1)?);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_data(grid: Grid, amp: f64) -> Field {
        Field::from_physical_fn(grid, |x| {
            let r2: f64 = x.iter().map(|c| c * c).sum();
            Complex64::new(amp * (-r2).exp(), 0.5 * amp * x[0] * (-r2).exp())
        })
    }

    fn cfg(dt: f64, horizon: f64) -> EvolutionConfig {
        EvolutionConfig::new(
            PropagatorParams::new(1.0).unwrap(),
            Sign::Defocusing,
            dt,
            horizon,
        )
        .unwrap()
    }

    #[test]
    fn config_validation() {
        let p = PropagatorParams::new(0.0).unwrap();
        assert!(EvolutionConfig::new(p, Sign::Focusing, 0.0, 1.0).is_err());
        assert!(EvolutionConfig::new(p, Sign::Focusing, 2.0, 1.0).is_err());
        assert!(cfg(0.1, 1.0).with_dealias(0.0).is_err());
        assert!(cfg(0.1, 1.0).with_dealias(1.5).is_err());
        assert!(cfg(0.1, 1.0).with_stride(0).is_err());
        assert!(PicardConfig::new(0, 1e-8, 1.0).is_err());
        assert!(PicardConfig::new(3, 2.0, 1.0).is_err());
        let t = cfg(0.1, 1.0).with_stride(3).unwrap().snapshot_times();
        assert_eq!(t.len(), 5);
        assert_eq!(*t.last().unwrap(), 1.0);
    }

    #[test]
    fn zero_data_stays_zero() {
        let g = Grid::new(1, 32, 10.0).unwrap();
        let u0 = Field::zeros(g, Representation::Physical);
        let tr = nonlinear_evolve(&u0, &cfg(0.01, 0.1)).unwrap();
        assert!(tr.states().iter().all(|s| s.l2_norm() == 0.0));
        let c = conserved_quantities(&u0, &cfg(0.01, 0.1));
        assert_eq!((c.mass, c.energy), (0.0, 0.0));
    }

    #[test]
    fn plane_wave_conserved_quantities() {
        let l = 2.0 * std::f64::consts::PI;
        let g = Grid::new(2, 16, l).unwrap();
        let a = 0.7;
        let u = Field::plane_wave(g, &[2, 1], Complex64::new(a, 0.0)).unwrap();
        let vol = l * l;
        for (sign, s) in [(Sign::Defocusing, 1.0), (Sign::Focusing, -1.0)] {
            let c =
                EvolutionConfig::new(PropagatorParams::new(0.3).unwrap(), sign, 0.1, 1.0).unwrap();
            let q = conserved_quantities(&u, &c);
            let k2 = 5.0;
            let energy =
                0.5 * a * a * k2 * k2 * vol + 0.15 * a * a * k2 * vol + s * 0.25 * a.powi(4) * vol;
            assert!((q.mass - a * a * vol).abs() < 1e-12 * q.mass);
            assert!((q.energy - energy).abs() < 1e-11 * energy.abs());
        }
    }

    #[test]
    fn band_overflow_rejected() {
        let g = Grid::new(1, 32, 2.0 * std::f64::consts::PI).unwrap();
        let u0 = Field::plane_wave(g, &[12], Complex64::new(1.0, 0.0)).unwrap();
        assert!(matches!(
            nonlinear_evolve(&u0, &cfg(0.01, 0.1)),
            Err(Error::BandOverflow { .. })
        ));
    }

    #[test]
    fn linear_hook_matches_propagator() {
        let g = Grid::new(2, 128, 12.0).unwrap();
        let u0 = small_data(g, 0.3);
        let c = cfg(0.01, 0.2).with_stride(5).unwrap().linear_only();
        let tr = nonlinear_evolve(&u0, &c).unwrap();
        for (t, s) in tr.times().iter().zip(tr.states()) {
            let e = crate::propagator::free_evolve(&u0, *t, c.params);
            let d = s.difference(&e).unwrap().l2_norm();
            assert!(d <= 1e-10 * u0.l2_norm(), "t {t} diff {d}");
        }
    }

    #[test]
    fn duhamel_of_zero_is_zero() {
        let g = Grid::new(1, 16, 10.0).unwrap();
        let times: Vec<f64> = (0..5).map(|i| i as f64 * 0.1).collect();
        let zero = Trajectory::constant(times, Field::zeros(g, Representation::Physical)).unwrap();
        let phi = duhamel_map(&zero, &zero, &cfg(0.1, 0.4)).unwrap();
        assert!(phi.states().iter().all(|s| s.l2_norm() == 0.0));
        let out = picard_solve(&zero, &cfg(0.1, 0.4), &PicardConfig::default()).unwrap();
        assert_eq!(out.residuals, vec![0.0]);
    }

    #[test]
    fn duhamel_rejects_mismatched_inputs() {
        let g = Grid::new(1, 16, 10.0).unwrap();
        let z = Field::zeros(g, Representation::Physical);
        let a = Trajectory::constant(vec![0.0, 0.1], z.clone()).unwrap();
        let b = Trajectory::constant(vec![0.0, 0.2], z.clone()).unwrap();
        assert!(duhamel_map(&a, &b, &cfg(0.1, 0.2)).is_err());
        let c = Trajectory::constant(vec![0.1, 0.2], z).unwrap();
        assert!(duhamel_map(&c, &c, &cfg(0.1, 0.2)).is_err());
    }

    #[test]
    fn pullback_of_free_flow_is_constant() {
        let g = Grid::new(1, 64, 20.0).unwrap();
        let p = PropagatorParams::new(0.5).unwrap();
        let f = small_data(g, 1.0);
        let times: Vec<f64> = (0..6).map(|i| i as f64 * 0.2).collect();
        let tr = free_trajectory(&f, &times, p).unwrap();
        for inc in scattering_diagnostic(&tr, p, -1.5).unwrap() {
            assert!(inc.norm <= 1e-12 * f.l2_norm());
        }
        let inc = pullback_increment(&tr, p, 0.0, 0, 5).unwrap();
        assert!(inc.norm <= 1e-12);
        assert!(pullback_increment(&tr, p, 0.0, 0, 6).is_err());
    }

    #[test]
    fn blow_up_proxy_reports_last_good_time() {
        let g = Grid::new(1, 32, 10.0).unwrap();
        let mut u0 = small_data(g, 1.0)
            .lp_project(1.0, crate::LpMode::LowPass)
            .unwrap();
        u0.values_mut()[3] = Complex64::new(f64::NAN, 0.0);
        let c = EvolutionConfig::new(
            PropagatorParams::new(0.0).unwrap(),
            Sign::Focusing,
            0.01,
            0.05,
        )
        .unwrap();
        match nonlinear_evolve(&u0, &c) {
            Err(Error::NonFinite { last_good_time }) => assert_eq!(last_good_time, 0.0),
            Err(Error::BandOverflow { .. }) => {}
            other => panic!("unexpected {other:?}"),
        }
    }
}
