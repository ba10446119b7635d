//! The experiment registry. Each entry composes library calls and returns
//! its artifacts in memory; nothing here touches the file system.

use std::fmt::Write as _;

use serde::Serialize;

use q4nls_core::estimates::{
    bilinear_sweep, critical_exponents, dilation_scale_lambda0, random_gaussian_spectrum,
    randomization_tail_experiment, scaling_identity_check, strichartz_tail_experiment, Horizon,
    StrichartzConfig, StrichartzReport, TailMode, TailReport,
};
use q4nls_core::propagator::dispersive_decay_fit;
use q4nls_core::randomization::{cube_indices, dilated_randomize, sample_coefficients};
use q4nls_core::snapshot::{encode_field, encode_trajectory};
use q4nls_core::solver::{
    conserved_quantities, critical_gamma, free_trajectory, nonlinear_evolve, picard_solve,
    pullback_increment, scattering_diagnostic, PicardOutcome,
};
use q4nls_core::{Complex64, EvolutionConfig, Field, Grid, NormKind, Trajectory};

use crate::config::{Experiment, Resolved};
use crate::{Artifact, Outcome, RunError};

const SUMMARY: &str = "summary.json";

#[derive(Serialize)]
struct GridInfo {
    dim: usize,
    points_per_axis: usize,
    box_length: f64,
}

impl From<Grid> for GridInfo {
    fn from(g: Grid) -> Self {
        GridInfo {
            dim: g.dim(),
            points_per_axis: g.points_per_axis(),
            box_length: g.length(),
        }
    }
}

/// Provenance block shared by every summary.
#[derive(Serialize)]
struct Provenance {
    experiment: &'static str,
    seed: u64,
    grid: Option<GridInfo>,
}

#[derive(Serialize)]
struct Summary<T: Serialize> {
    provenance: Provenance,
    #[serde(flatten)]
    body: T,
}

fn outcome<T: Serialize>(
    cfg: &Resolved,
    mut artifacts: Vec<Artifact>,
    primary_table: Option<&str>,
    body: T,
) -> Outcome {
    let summary = Summary {
        provenance: Provenance {
            experiment: cfg.experiment.name(),
            seed: cfg.seed,
            grid: cfg.grid.map(GridInfo::from),
        },
        body,
    };
    artifacts.push(Artifact::json(SUMMARY, &summary));
    Outcome {
        artifacts,
        primary_table: primary_table.map(str::to_string),
        summary: SUMMARY.to_string(),
    }
}

/// Floats in tables use the shortest round-trip scientific form.
fn num(x: f64) -> String {
    format!("{x:e}")
}

fn csv(header: &str, rows: impl IntoIterator<Item = Vec<String>>) -> Vec<u8> {
    let mut out = String::from(header);
    out.push('\n');
    for row in rows {
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out.into_bytes()
}

pub(crate) fn run(cfg: &Resolved) -> Result<Outcome, RunError> {
    match cfg.experiment {
        Experiment::Randomize => randomize(cfg),
        Experiment::Evolve => evolve(cfg),
        Experiment::Picard => picard(cfg),
        Experiment::Scatter => scatter(cfg),
        Experiment::TailHgamma => tail(cfg, TailMode::HGamma),
        Experiment::TailLp => tail(cfg, TailMode::Lp),
        Experiment::TailStrichartzLocal => strichartz(cfg, false),
        Experiment::TailStrichartzGlobal => strichartz(cfg, true),
        Experiment::Bilinear => bilinear(cfg),
        Experiment::DispersiveFit => dispersive(cfg),
        Experiment::ScalingCheck => scaling(cfg),
        Experiment::Exponents => exponents(cfg),
        Experiment::Lambda0 => lambda0(cfg),
    }
}

fn randomize(cfg: &Resolved) -> Result<Outcome, RunError> {
    let grid = cfg.grid();
    let f = cfg.data()?;
    let (spec, bump) = cfg.randomization()?;
    let fw = dilated_randomize(&f, &spec, &bump)?;
    let indices = cube_indices(&grid, spec.scale, &bump)?;
    let coefficients = sample_coefficients(&spec, &indices);
    let header = (1..=grid.dim())
        .map(|j| format!("n{j}"))
        .chain(["re".to_string(), "im".to_string()])
        .collect::<Vec<_>>()
        .join(",");
    let table = csv(
        &header,
        coefficients.iter().map(|(n, g)| {
            n.iter()
                .map(|k| k.to_string())
                .chain([num(g.re), num(g.im)])
                .collect()
        }),
    );

    #[derive(Serialize)]
    struct Body {
        distribution: q4nls_core::CoefficientDistribution,
        cube_scale: f64,
        cubes: usize,
        input_l2: f64,
        randomized_l2: f64,
        relative_l2_difference: f64,
    }
    let input_l2 = f.l2_norm();
    let body = Body {
        distribution: spec.distribution,
        cube_scale: spec.scale,
        cubes: indices.len(),
        input_l2,
        randomized_l2: fw.l2_norm(),
        relative_l2_difference: fw.difference(&f)?.l2_norm() / input_l2,
    };
    let artifacts = vec![
        Artifact::new("input.q4nl", encode_field(&f)),
        Artifact::new("randomized.q4nl", encode_field(&fw)),
        Artifact::new("coefficients.csv", table),
    ];
    Ok(outcome(cfg, artifacts, Some("coefficients.csv"), body))
}

fn initial_data(cfg: &Resolved) -> Result<Field, RunError> {
    let f = cfg.data()?;
    if cfg.raw.randomize_data.unwrap_or(false) {
        let (spec, bump) = cfg.randomization()?;
        Ok(dilated_randomize(&f, &spec, &bump)?)
    } else {
        Ok(f)
    }
}

fn snapshots(cfg: &Resolved, stem: &str, traj: &Trajectory) -> Result<Vec<Artifact>, RunError> {
    if !cfg.raw.write_snapshots.unwrap_or(true) {
        return Ok(Vec::new());
    }
    Ok(encode_trajectory(stem, traj)?
        .into_iter()
        .map(|(name, bytes)| Artifact::new(name, bytes))
        .collect())
}

fn evolve(cfg: &Resolved) -> Result<Outcome, RunError> {
    let evo = cfg.evolution()?;
    let u0 = initial_data(cfg)?;
    let traj = nonlinear_evolve(&u0, &evo)?;
    let conserved: Vec<_> = traj
        .states()
        .iter()
        .map(|u| conserved_quantities(u, &evo))
        .collect();
    let table = csv(
        "t,mass,energy",
        traj.times()
            .iter()
            .zip(&conserved)
            .map(|(t, c)| vec![num(*t), num(c.mass), num(c.energy)]),
    );
    let (c0, c1) = (conserved[0], *conserved.last().unwrap());
    let rel = |a: f64, b: f64| {
        if a == 0.0 {
            (b - a).abs()
        } else {
            ((b - a) / a).abs()
        }
    };

    #[derive(Serialize)]
    struct Body {
        evolution: EvolutionConfig,
        snapshots: usize,
        mass_drift: f64,
        energy_drift: f64,
    }
    let body = Body {
        evolution: evo,
        snapshots: traj.len(),
        mass_drift: rel(c0.mass, c1.mass),
        energy_drift: rel(c0.energy, c1.energy),
    };
    let mut artifacts = vec![Artifact::new("conserved.csv", table)];
    artifacts.extend(snapshots(cfg, "trajectory", &traj)?);
    Ok(outcome(cfg, artifacts, Some("conserved.csv"), body))
}

struct Small {
    evo: EvolutionConfig,
    z: Trajectory,
    out: PicardOutcome,
}

/// `z = ε U_μ(t) f^ω` and the Picard fixed point `v` on the snapshot times.
fn small_data_solution(cfg: &Resolved) -> Result<Small, RunError> {
    let evo = cfg.evolution()?;
    let pc = cfg.picard()?;
    let eps = cfg.epsilon()?;
    let (spec, bump) = cfg.randomization()?;
    let f = dilated_randomize(&cfg.data()?, &spec, &bump)?;
    let data = f.scaled(Complex64::new(eps, 0.0));
    let z = free_trajectory(&data, &evo.snapshot_times(), evo.params)?;
    let out = picard_solve(&z, &evo, &pc)?;
    Ok(Small { evo, z, out })
}

fn residual_table(residuals: &[f64]) -> Vec<u8> {
    csv(
        "iteration,residual",
        residuals
            .iter()
            .enumerate()
            .map(|(k, r)| vec![(k + 1).to_string(), num(*r)]),
    )
}

fn picard(cfg: &Resolved) -> Result<Outcome, RunError> {
    let Small { evo, z, out } = small_data_solution(cfg)?;
    let gamma = critical_gamma(cfg.grid().dim());

    // Compare z + v with the split-step solution from the same data.
    let split = nonlinear_evolve(&z.states()[0], &evo)?;
    let mut gap: f64 = 0.0;
    for ((s, v), zz) in split
        .states()
        .iter()
        .zip(out.solution.states())
        .zip(z.states())
    {
        let mut u = v.clone();
        u.add_scaled(Complex64::new(1.0, 0.0), zz)?;
        gap = gap.max(s.difference(&u)?.norm(NormKind::Sobolev(gamma))?);
    }
    let ratios: Vec<f64> = out.residuals.windows(2).map(|w| w[1] / w[0]).collect();

    #[derive(Serialize)]
    struct Body {
        epsilon: f64,
        gamma_c: f64,
        iterations: usize,
        final_residual: f64,
        worst_residual_ratio: Option<f64>,
        split_step_gap: f64,
    }
    let body = Body {
        epsilon: cfg.epsilon()?,
        gamma_c: gamma,
        iterations: out.residuals.len(),
        final_residual: *out.residuals.last().unwrap(),
        worst_residual_ratio: ratios.iter().copied().reduce(f64::max),
        split_step_gap: gap,
    };
    let mut artifacts = vec![Artifact::new(
        "residuals.csv",
        residual_table(&out.residuals),
    )];
    artifacts.extend(snapshots(cfg, "duhamel", &out.solution)?);
    Ok(outcome(cfg, artifacts, Some("residuals.csv"), body))
}

fn scatter(cfg: &Resolved) -> Result<Outcome, RunError> {
    let Small { evo, out, .. } = small_data_solution(cfg)?;
    let gamma = critical_gamma(cfg.grid().dim());
    let v = &out.solution;
    let increments = scattering_diagnostic(v, evo.params, gamma)?;
    let table = csv(
        "t_i,t_j,increment",
        increments
            .iter()
            .map(|i| vec![num(i.t_start), num(i.t_end), num(i.norm)]),
    );
    let last = v.len() - 1;
    let mid = last.div_ceil(2);
    let first = pullback_increment(v, evo.params, gamma, 0, mid)?;
    let second = pullback_increment(v, evo.params, gamma, mid, last)?;

    #[derive(Serialize)]
    struct Body {
        epsilon: f64,
        gamma: f64,
        picard_iterations: usize,
        first_half: q4nls_core::solver::Increment,
        second_half: q4nls_core::solver::Increment,
        half_ratio: f64,
    }
    let body = Body {
        epsilon: cfg.epsilon()?,
        gamma,
        picard_iterations: out.residuals.len(),
        half_ratio: second.norm / first.norm,
        first_half: first,
        second_half: second,
    };
    let artifacts = vec![
        Artifact::new("increments.csv", table),
        Artifact::new("residuals.csv", residual_table(&out.residuals)),
    ];
    Ok(outcome(cfg, artifacts, Some("increments.csv"), body))
}

fn tail(cfg: &Resolved, mode: TailMode) -> Result<Outcome, RunError> {
    let f = cfg.data()?;
    let (spec, bump) = cfg.randomization()?;
    let gamma = cfg.raw.gamma.unwrap_or(0.0);
    let p = cfg.raw.p.unwrap_or(2.0);
    let report = randomization_tail_experiment(
        &f,
        gamma,
        p,
        mode,
        &spec,
        &bump,
        cfg.samples()?,
        &cfg.thresholds()?,
    )?;

    #[derive(Serialize)]
    struct Body {
        mode: TailMode,
        report: TailReport,
    }
    let artifacts = vec![Artifact::new("tail.csv", report.to_csv().into_bytes())];
    Ok(outcome(
        cfg,
        artifacts,
        Some("tail.csv"),
        Body { mode, report },
    ))
}

fn strichartz(cfg: &Resolved, global: bool) -> Result<Outcome, RunError> {
    let f = cfg.data()?;
    let (spec, bump) = cfg.randomization()?;
    let t = cfg.raw.t_seconds.expect("validated");
    let sc = StrichartzConfig {
        q: cfg.raw.q.expect("validated"),
        r: cfg.raw.r.expect("validated"),
        horizon: if global {
            Horizon::Global { max: t }
        } else {
            Horizon::Local(t)
        },
        time_steps: cfg.raw.time_steps.expect("validated"),
    };
    let report = strichartz_tail_experiment(
        &f,
        &sc,
        cfg.params()?,
        &spec,
        &bump,
        cfg.samples()?,
        &cfg.thresholds()?,
    )?;
    let mut artifacts = Vec::new();
    for (k, tail) in report.tails.iter().enumerate() {
        artifacts.push(Artifact::new(
            format!("tail_{k}.csv"),
            tail.report.to_csv().into_bytes(),
        ));
    }
    let opt = |v: Option<f64>| v.map_or(String::new(), num);
    let rates = csv(
        "horizon,rate,normalized_c",
        report
            .tails
            .iter()
            .map(|t| vec![num(t.horizon), opt(t.rate), opt(t.normalized_c)]),
    );
    artifacts.push(Artifact::new("rates.csv", rates));

    #[derive(Serialize)]
    struct Body {
        report: StrichartzReport,
    }
    Ok(outcome(cfg, artifacts, Some("tail_0.csv"), Body { report }))
}

fn bilinear(cfg: &Resolved) -> Result<Outcome, RunError> {
    let grid = cfg.grid();
    let width = cfg.raw.data_width.expect("validated");
    let data_seed = cfg.raw.data_seed.unwrap_or(cfg.seed);
    let f = random_gaussian_spectrum(grid, data_seed, width);
    let g = random_gaussian_spectrum(grid, data_seed.wrapping_add(1), width);
    let multipliers = cfg.raw.m2_multipliers.clone().expect("validated");
    let report = bilinear_sweep(
        &f,
        &g,
        cfg.raw.m1.expect("validated"),
        &multipliers,
        cfg.params()?,
    )?;
    let artifacts = vec![Artifact::new("bilinear.csv", report.to_csv().into_bytes())];
    Ok(outcome(cfg, artifacts, Some("bilinear.csv"), report))
}

fn dispersive(cfg: &Resolved) -> Result<Outcome, RunError> {
    let f = cfg.data()?;
    let times = cfg.raw.decay_times_seconds.clone().expect("validated");
    let fit = dispersive_decay_fit(&f, &times, cfg.params()?)?;
    let table = csv(
        "t,sup_norm",
        fit.times
            .iter()
            .zip(&fit.sup_norms)
            .map(|(t, s)| vec![num(*t), num(*s)]),
    );

    #[derive(Serialize)]
    struct Body {
        expected_slope: f64,
        fit: q4nls_core::propagator::DecayFit,
    }
    let body = Body {
        expected_slope: -(cfg.grid().dim() as f64) / 4.0,
        fit,
    };
    Ok(outcome(
        cfg,
        vec![Artifact::new("decay.csv", table)],
        Some("decay.csv"),
        body,
    ))
}

fn scaling(cfg: &Resolved) -> Result<Outcome, RunError> {
    let f = cfg.data()?;
    let lambda = cfg.raw.lambda.expect("validated");
    let gammas = cfg.raw.gammas.clone().expect("validated");
    let mut rows = Vec::with_capacity(gammas.len());
    for &g in &gammas {
        rows.push((g, scaling_identity_check(&f, g, lambda)?));
    }
    let table = csv(
        "gamma,relative_error",
        rows.iter().map(|(g, e)| vec![num(*g), num(*e)]),
    );

    #[derive(Serialize)]
    struct Body {
        lambda: f64,
        max_relative_error: f64,
    }
    let body = Body {
        lambda,
        max_relative_error: rows.iter().map(|r| r.1).fold(0.0, f64::max),
    };
    Ok(outcome(
        cfg,
        vec![Artifact::new("scaling.csv", table)],
        Some("scaling.csv"),
        body,
    ))
}

fn exponents(cfg: &Resolved) -> Result<Outcome, RunError> {
    let e = critical_exponents(
        cfg.raw.dimension.expect("validated"),
        cfg.raw.m.unwrap_or(3),
    )?;
    Ok(outcome(cfg, Vec::new(), None, e))
}

fn lambda0(cfg: &Resolved) -> Result<Outcome, RunError> {
    let dim = cfg.raw.dimension.expect("validated");
    let gamma = cfg.raw.gamma.expect("validated");
    let f_norm = cfg.raw.f_norm.expect("validated");
    let delta = cfg.raw.delta.expect("validated");
    let mut table = String::from("epsilon,lambda0,degenerate\n");
    let mut values = Vec::new();
    for &eps in cfg.raw.epsilons.as_ref().expect("validated") {
        let l = dilation_scale_lambda0(eps, f_norm, gamma, dim, delta)?;
        writeln!(table, "{eps:e},{:e},{}", l.value, l.degenerate).unwrap();
        values.push(l);
    }

    #[derive(Serialize)]
    struct Body {
        dim: usize,
        gamma: f64,
        f_norm: f64,
        delta: f64,
        constant: f64,
        exponent: f64,
    }
    let body = Body {
        dim,
        gamma,
        f_norm,
        delta,
        constant: values[0].constant,
        exponent: values[0].exponent,
    };
    let artifacts = vec![Artifact::new("lambda0.csv", table.into_bytes())];
    Ok(outcome(cfg, artifacts, Some("lambda0.csv"), body))
}
