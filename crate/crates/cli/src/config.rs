//! Run configuration: a flat TOML table with units spelled out in key names.
//!
//! Times (`T_seconds`, `dt_seconds`, ...) are dimensionless PDE time; the
//! suffix only marks which keys are times. Lengths are in box units.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use q4nls_core::estimates::ThresholdRule;
use q4nls_core::propagator::admissible_check;
use q4nls_core::randomization::rescale_field;
use q4nls_core::{
    BumpFunction, CoefficientDistribution, EvolutionConfig, Field, Grid, PicardConfig,
    PropagatorParams, RandomizationSpec, Sign,
};

use crate::ValidationError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    Randomize,
    Evolve,
    Picard,
    Scatter,
    TailHgamma,
    TailLp,
    TailStrichartzLocal,
    TailStrichartzGlobal,
    Bilinear,
    DispersiveFit,
    ScalingCheck,
    Exponents,
    Lambda0,
}

impl Experiment {
    pub const ALL: [Experiment; 13] = [
        Experiment::Randomize,
        Experiment::Evolve,
        Experiment::Picard,
        Experiment::Scatter,
        Experiment::TailHgamma,
        Experiment::TailLp,
        Experiment::TailStrichartzLocal,
        Experiment::TailStrichartzGlobal,
        Experiment::Bilinear,
        Experiment::DispersiveFit,
        Experiment::ScalingCheck,
        Experiment::Exponents,
        Experiment::Lambda0,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Experiment::Randomize => "randomize",
            Experiment::Evolve => "evolve",
            Experiment::Picard => "picard",
            Experiment::Scatter => "scatter",
            Experiment::TailHgamma => "tail-hgamma",
            Experiment::TailLp => "tail-lp",
            Experiment::TailStrichartzLocal => "tail-strichartz-local",
            Experiment::TailStrichartzGlobal => "tail-strichartz-global",
            Experiment::Bilinear => "bilinear",
            Experiment::DispersiveFit => "dispersive-fit",
            Experiment::ScalingCheck => "scaling-check",
            Experiment::Exponents => "exponents",
            Experiment::Lambda0 => "lambda0",
        }
    }

    pub fn parse(name: &str) -> Result<Experiment, ValidationError> {
        Experiment::ALL
            .iter()
            .copied()
            .find(|e| e.name() == name)
            .ok_or_else(|| {
                ValidationError::new("experiment", format!("unknown experiment {name:?}"))
            })
    }

    fn needs_grid(&self) -> bool {
        !matches!(self, Experiment::Exponents | Experiment::Lambda0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DataProfile {
    /// `A e^{−|x|²/(2σ²)}` with `σ = data_width`.
    Gaussian,
    /// Spectrum `(a + ib) e^{−|ξ|²/(2w²)}` with `w = data_width`, seeded by `data_seed`.
    RandomSpectrum,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Normalization {
    /// Peak value `data_amplitude`.
    Amplitude,
    /// `‖f‖_{L¹} = data_amplitude`.
    L1,
    /// `‖f‖_{L²} = data_amplitude`.
    L2,
}

/// Every key the runner understands. Keys an experiment does not use are
/// ignored by it; unknown keys are rejected at parse time.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub experiment: Option<String>,
    pub seed: Option<u64>,
    pub output_dir: Option<PathBuf>,

    pub dimension: Option<usize>,
    pub points_per_axis: Option<usize>,
    pub box_length: Option<f64>,

    pub data_profile: Option<DataProfile>,
    pub data_width: Option<f64>,
    pub data_amplitude: Option<f64>,
    pub data_normalization: Option<Normalization>,
    pub data_seed: Option<u64>,
    /// Randomize the initial data before evolving (evolve, picard, scatter).
    pub randomize_data: Option<bool>,

    pub distribution: Option<CoefficientDistribution>,
    pub cube_scale: Option<f64>,
    pub bump_steepness: Option<f64>,

    pub mu: Option<f64>,
    pub sign: Option<Sign>,
    pub dt_seconds: Option<f64>,
    #[serde(rename = "T_seconds")]
    pub t_seconds: Option<f64>,
    pub snapshot_stride: Option<usize>,
    pub dealias_fraction: Option<f64>,
    pub write_snapshots: Option<bool>,

    pub epsilon: Option<f64>,
    pub picard_max_iters: Option<usize>,
    pub picard_tol: Option<f64>,
    pub picard_divergence_threshold: Option<f64>,

    pub samples: Option<usize>,
    pub thresholds: Option<Vec<f64>>,
    pub threshold_count: Option<usize>,
    pub gamma: Option<f64>,
    pub gammas: Option<Vec<f64>>,
    pub p: Option<f64>,
    pub q: Option<f64>,
    pub r: Option<f64>,
    pub time_steps: Option<usize>,

    pub m1: Option<f64>,
    pub m2_multipliers: Option<Vec<f64>>,

    pub decay_times_seconds: Option<Vec<f64>>,
    pub lambda: Option<f64>,
    pub m: Option<usize>,
    pub epsilons: Option<Vec<f64>>,
    pub f_norm: Option<f64>,
    pub delta: Option<f64>,
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<RunConfig, ValidationError> {
        toml::from_str(text).map_err(|e| ValidationError::new("config", e.message().to_string()))
    }
}

fn need<T: Copy>(v: Option<T>, key: &'static str) -> Result<T, ValidationError> {
    v.ok_or_else(|| ValidationError::new(key, "required for this experiment"))
}

fn positive(v: f64, key: &'static str) -> Result<f64, ValidationError> {
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(ValidationError::new(
            key,
            format!("must be positive and finite, got {v}"),
        ))
    }
}

fn core<T>(r: q4nls_core::Result<T>, key: &'static str) -> Result<T, ValidationError> {
    r.map_err(|e| ValidationError::new(key, e.to_string()))
}

/// A config with every value the selected experiment needs checked and
/// converted to library types.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub experiment: Experiment,
    pub seed: u64,
    pub output_dir: PathBuf,
    pub raw: RunConfig,
    pub grid: Option<Grid>,
}

impl Resolved {
    pub fn new(raw: RunConfig) -> Result<Resolved, ValidationError> {
        let experiment = Experiment::parse(
            raw.experiment
                .as_deref()
                .ok_or_else(|| ValidationError::new("experiment", "missing"))?,
        )?;
        let seed = raw.seed.unwrap_or(0);
        let output_dir = raw
            .output_dir
            .clone()
            .ok_or_else(|| ValidationError::new("output_dir", "missing (set it or pass --out)"))?;
        let grid = if experiment.needs_grid() {
            let dim = need(raw.dimension, "dimension")?;
            let points = need(raw.points_per_axis, "points_per_axis")?;
            let length = need(raw.box_length, "box_length")?;
            Some(core(
                Grid::new(dim, points, length),
                "dimension/points_per_axis/box_length",
            )?)
        } else {
            None
        };
        let resolved = Resolved {
            experiment,
            seed,
            output_dir,
            raw,
            grid,
        };
        resolved.validate()?;
        Ok(resolved)
    }

    /// Build every derived object the experiment uses, surfacing the first
    /// invalid key before any computation starts.
    fn validate(&self) -> Result<(), ValidationError> {
        use Experiment::*;
        let e = self.experiment;
        if e.needs_grid() && e != Bilinear {
            self.data()?;
        }
        match e {
            Randomize => {
                self.randomization()?;
            }
            Evolve => {
                self.evolution()?;
                if self.raw.randomize_data.unwrap_or(false) {
                    self.randomization()?;
                }
            }
            Picard | Scatter => {
                self.evolution()?;
                self.picard()?;
                self.randomization()?;
                self.epsilon()?;
            }
            TailHgamma => {
                self.randomization()?;
                self.samples()?;
                self.thresholds()?;
                need(self.raw.gamma, "gamma")?;
            }
            TailLp => {
                self.randomization()?;
                self.samples()?;
                self.thresholds()?;
                let p = need(self.raw.p, "p")?;
                if !(p >= 1.0) {
                    return Err(ValidationError::new("p", "must be >= 1"));
                }
            }
            TailStrichartzLocal | TailStrichartzGlobal => {
                self.randomization()?;
                self.samples()?;
                self.thresholds()?;
                self.params()?;
                let q = need(self.raw.q, "q")?;
                let r = need(self.raw.r, "r")?;
                if !(q >= 2.0 && q.is_finite() && r >= 2.0 && r.is_finite()) {
                    return Err(ValidationError::new("q/r", "need 2 <= q, r < inf"));
                }
                let dim = self.grid().dim();
                if e == TailStrichartzGlobal && !admissible_check(q, r, dim) {
                    return Err(ValidationError::new(
                        "q/r",
                        format!("({q}, {r}) is not biharmonic admissible in N = {dim}"),
                    ));
                }
                positive(need(self.raw.t_seconds, "T_seconds")?, "T_seconds")?;
                let steps = need(self.raw.time_steps, "time_steps")?;
                if steps == 0 || steps % 4 != 0 {
                    return Err(ValidationError::new(
                        "time_steps",
                        "must be a positive multiple of 4",
                    ));
                }
            }
            Bilinear => {
                self.params()?;
                positive(need(self.raw.data_width, "data_width")?, "data_width")?;
                let m1 = need(self.raw.m1, "m1")?;
                if !(m1 >= 1.0 && m1.log2().fract() == 0.0) {
                    return Err(ValidationError::new("m1", "must be a dyadic number >= 1"));
                }
                let mult = self.raw.m2_multipliers.as_ref().ok_or_else(|| {
                    ValidationError::new("m2_multipliers", "required for this experiment")
                })?;
                if mult.is_empty() || mult.iter().any(|k| !(*k >= 1.0 && k.log2().fract() == 0.0)) {
                    return Err(ValidationError::new(
                        "m2_multipliers",
                        "must be dyadic numbers >= 1",
                    ));
                }
            }
            DispersiveFit => {
                self.params()?;
                let t = self.raw.decay_times_seconds.as_ref().ok_or_else(|| {
                    ValidationError::new("decay_times_seconds", "required for this experiment")
                })?;
                if t.len() < 2
                    || t.iter().any(|x| !(*x > 0.0))
                    || t.windows(2).any(|w| w[1] <= w[0])
                {
                    return Err(ValidationError::new(
                        "decay_times_seconds",
                        "need at least two positive increasing times",
                    ));
                }
            }
            ScalingCheck => {
                let l = need(self.raw.lambda, "lambda")?;
                if !(l > 0.0 && l.log2().fract() == 0.0) {
                    return Err(ValidationError::new("lambda", "must be a power of two"));
                }
                if self.raw.gammas.as_ref().is_none_or(|g| g.is_empty()) {
                    return Err(ValidationError::new(
                        "gammas",
                        "required for this experiment",
                    ));
                }
                core(rescale_field(&self.data()?, l), "lambda")?;
            }
            Exponents => {
                need(self.raw.dimension, "dimension")?;
                let m = self.raw.m.unwrap_or(3);
                if m < 3 {
                    return Err(ValidationError::new("m", "must be >= 3"));
                }
            }
            Lambda0 => {
                let n = need(self.raw.dimension, "dimension")?;
                let gamma = need(self.raw.gamma, "gamma")?;
                if !(gamma < (n as f64 - 4.0) / 2.0) {
                    return Err(ValidationError::new("gamma", "must be below (N-4)/2"));
                }
                positive(need(self.raw.delta, "delta")?, "delta")?;
                let f = need(self.raw.f_norm, "f_norm")?;
                if !(f >= 0.0 && f.is_finite()) {
                    return Err(ValidationError::new("f_norm", "must be finite and >= 0"));
                }
                let eps = self.raw.epsilons.as_ref().ok_or_else(|| {
                    ValidationError::new("epsilons", "required for this experiment")
                })?;
                if eps.is_empty() || eps.iter().any(|e| !(*e > 0.0 && *e <= 1.0)) {
                    return Err(ValidationError::new(
                        "epsilons",
                        "values must lie in (0, 1]",
                    ));
                }
            }
        }
        Ok(())
    }

    pub fn grid(&self) -> Grid {
        self.grid.expect("grid validated")
    }

    pub fn data(&self) -> Result<Field, ValidationError> {
        let grid = self.grid();
        let width = positive(need(self.raw.data_width, "data_width")?, "data_width")?;
        let amplitude = self.raw.data_amplitude.unwrap_or(1.0);
        if !amplitude.is_finite() {
            return Err(ValidationError::new("data_amplitude", "must be finite"));
        }
        let field = match self.raw.data_profile.unwrap_or(DataProfile::Gaussian) {
            DataProfile::Gaussian => Field::from_physical_fn(grid, |x| {
                let r2: f64 = x.iter().map(|c| c * c).sum();
                q4nls_core::Complex64::new((-r2 / (2.0 * width * width)).exp(), 0.0)
            }),
            DataProfile::RandomSpectrum => q4nls_core::estimates::random_gaussian_spectrum(
                grid,
                self.raw.data_seed.unwrap_or(self.seed),
                width,
            )
            .to_physical(),
        };
        let scale = match self
            .raw
            .data_normalization
            .unwrap_or(Normalization::Amplitude)
        {
            Normalization::Amplitude => {
                let peak = core(field.lebesgue_norm(f64::INFINITY), "data_profile")?;
                amplitude / peak
            }
            Normalization::L1 => amplitude / core(field.lebesgue_norm(1.0), "data_profile")?,
            Normalization::L2 => amplitude / field.l2_norm(),
        };
        if !scale.is_finite() {
            return Err(ValidationError::new(
                "data_profile",
                "profile vanishes on the grid",
            ));
        }
        Ok(field.scaled(q4nls_core::Complex64::new(scale, 0.0)))
    }

    pub fn bump(&self) -> Result<BumpFunction, ValidationError> {
        core(
            BumpFunction::new(self.raw.bump_steepness.unwrap_or(1.0)),
            "bump_steepness",
        )
    }

    pub fn randomization(&self) -> Result<(RandomizationSpec, BumpFunction), ValidationError> {
        let spec = core(
            RandomizationSpec::new(
                self.raw
                    .distribution
                    .unwrap_or(CoefficientDistribution::Gaussian),
                self.seed,
                self.raw.cube_scale.unwrap_or(1.0),
            ),
            "cube_scale",
        )?;
        let bump = self.bump()?;
        if let Some(grid) = self.grid {
            core(
                q4nls_core::randomization::cube_indices(&grid, spec.scale, &bump),
                "box_length",
            )?;
        }
        Ok((spec, bump))
    }

    pub fn params(&self) -> Result<PropagatorParams, ValidationError> {
        core(PropagatorParams::new(self.raw.mu.unwrap_or(0.0)), "mu")
    }

    pub fn evolution(&self) -> Result<EvolutionConfig, ValidationError> {
        let params = self.params()?;
        let dt = positive(need(self.raw.dt_seconds, "dt_seconds")?, "dt_seconds")?;
        let horizon = positive(need(self.raw.t_seconds, "T_seconds")?, "T_seconds")?;
        let cfg = core(
            EvolutionConfig::new(
                params,
                self.raw.sign.unwrap_or(Sign::Defocusing),
                dt,
                horizon,
            ),
            "dt_seconds",
        )?;
        let cfg = core(
            cfg.with_dealias(self.raw.dealias_fraction.unwrap_or(0.5)),
            "dealias_fraction",
        )?;
        core(
            cfg.with_stride(self.raw.snapshot_stride.unwrap_or(1)),
            "snapshot_stride",
        )
    }

    pub fn picard(&self) -> Result<PicardConfig, ValidationError> {
        let d = PicardConfig::default();
        core(
            PicardConfig::new(
                self.raw.picard_max_iters.unwrap_or(d.max_iters),
                self.raw.picard_tol.unwrap_or(d.tol),
                self.raw
                    .picard_divergence_threshold
                    .unwrap_or(d.divergence_threshold),
            ),
            "picard_tol",
        )
    }

    pub fn epsilon(&self) -> Result<f64, ValidationError> {
        positive(need(self.raw.epsilon, "epsilon")?, "epsilon")
    }

    pub fn samples(&self) -> Result<usize, ValidationError> {
        let s = need(self.raw.samples, "samples")?;
        if s < q4nls_core::estimates::MIN_SAMPLES {
            return Err(ValidationError::new(
                "samples",
                format!("must be at least {}", q4nls_core::estimates::MIN_SAMPLES),
            ));
        }
        Ok(s)
    }

    pub fn thresholds(&self) -> Result<ThresholdRule, ValidationError> {
        match (&self.raw.thresholds, self.raw.threshold_count) {
            (Some(_), Some(_)) => Err(ValidationError::new(
                "thresholds",
                "give either thresholds or threshold_count, not both",
            )),
            (Some(t), None) => {
                if t.is_empty()
                    || t.iter().any(|x| !(*x > 0.0 && x.is_finite()))
                    || t.windows(2).any(|w| w[1] <= w[0])
                {
                    return Err(ValidationError::new(
                        "thresholds",
                        "must be positive and increasing",
                    ));
                }
                Ok(ThresholdRule::Explicit(t.clone()))
            }
            (None, Some(c)) if c < 3 => {
                Err(ValidationError::new("threshold_count", "must be >= 3"))
            }
            (None, Some(c)) => Ok(ThresholdRule::Auto { count: c }),
            (None, None) => Ok(ThresholdRule::default()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_keys_are_rejected() {
        let err = RunConfig::parse("experiment = \"exponents\"\nbogus = 1\n").unwrap_err();
        assert!(err.to_string().contains("bogus"));
    }

    #[test]
    fn missing_keys_are_named() {
        let mut raw = RunConfig::parse("experiment = \"evolve\"\noutput_dir = \"o\"\n").unwrap();
        let err = Resolved::new(raw.clone()).unwrap_err();
        assert_eq!(err.key, "dimension");
        raw.dimension = Some(1);
        raw.points_per_axis = Some(64);
        raw.box_length = Some(20.0);
        raw.data_width = Some(1.0);
        let err = Resolved::new(raw).unwrap_err();
        assert_eq!(err.key, "dt_seconds");
    }

    #[test]
    fn units_in_key_names() {
        let raw = RunConfig::parse(
            "experiment = \"evolve\"\noutput_dir = \"o\"\ndimension = 1\npoints_per_axis = 64\n\
             box_length = 20.0\ndata_width = 1.0\ndt_seconds = 0.01\nT_seconds = 0.1\n",
        )
        .unwrap();
        let r = Resolved::new(raw).unwrap();
        assert_eq!(r.evolution().unwrap().horizon, 0.1);
    }

    #[test]
    fn compute_time_checks_run_during_validation() {
        let base = "output_dir = \"o\"\ndimension = 2\npoints_per_axis = 16\nbox_length = 16.0\n\
                    data_width = 1.0\n";
        let global = format!(
            "experiment = \"tail-strichartz-global\"\n{base}samples = 1000\nq = 4.0\nr = 4.0\n\
             T_seconds = 1.0\ntime_steps = 8\n"
        );
        let err = Resolved::new(RunConfig::parse(&global).unwrap()).unwrap_err();
        assert_eq!(err.key, "q/r");
        let scaling =
            format!("experiment = \"scaling-check\"\n{base}lambda = 2.0\ngammas = [0.0]\n");
        let err = Resolved::new(RunConfig::parse(&scaling).unwrap()).unwrap_err();
        assert_eq!(err.key, "lambda");
    }

    #[test]
    fn every_experiment_name_round_trips() {
        for e in Experiment::ALL {
            assert_eq!(Experiment::parse(e.name()).unwrap(), e);
        }
        assert!(Experiment::parse("nope").is_err());
    }
}
