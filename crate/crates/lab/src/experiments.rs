//! Experiment runners. Each turns a resolved configuration into CSV tables
//! plus a JSON summary; nothing here touches the filesystem.

use meanfield_core::chaos::{
    chaos_concentration, chebyshev_envelope, check_control_size, check_reference_size, dobrushin_pair, dobrushin_seeds,
    empirical_tensor_vs_marginal, hk_control, hk_exponent, hk_sample, meanfield_reference, meanfield_sample,
    reference_seed, remainder_mass_bound_holds, replicate_seed, sample_iid, DensitySpec, Ensemble, Observable,
    RateReport, Reference,
};
use meanfield_core::dynamics::{simulate_nbody, IntegratorSettings};
use meanfield_core::hierarchy::{growth_profile, riccati_reference, solve_truncated, Closure};
use meanfield_core::kernels::{conserved_quantities, Interaction, KernelSpec};
use meanfield_core::measure::Configuration;
use meanfield_core::quantum::{hartree_limit_experiment, Grid1D, PotentialSpec, WaveFunction};
use meanfield_core::rng::derive_seed;
use meanfield_core::transport::{mk_distance, Exponent};
use num_complex::Complex64;
use rayon::prelude::*;
use serde_json::{json, Map, Value};

use crate::config::{Experiment, ExperimentConfig};
use crate::error::{LabError, LabResult};
use crate::output::{Cell, Table};

/// Everything an experiment produces before it is persisted.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub tables: Vec<Table>,
    pub results: Map<String, Value>,
    pub derived_seeds: Map<String, Value>,
}

impl Outcome {
    fn new(table: Table) -> Self {
        Outcome { tables: vec![table], results: Map::new(), derived_seeds: Map::new() }
    }

    fn result(&mut self, key: &str, value: impl Into<Value>) {
        self.results.insert(key.into(), value.into());
    }

    fn seed(&mut self, key: &str, value: impl Into<Value>) {
        self.derived_seeds.insert(key.into(), value.into());
    }

    pub fn table(&self, file_name: &str) -> Option<&Table> {
        self.tables.iter().find(|t| t.file_name == file_name)
    }
}

/// Runs independent tasks on a pool of `threads` workers; results come back
/// in task order, so downstream reductions do not depend on the schedule.
pub struct Runner {
    pool: rayon::ThreadPool,
}

impl Runner {
    pub fn new(threads: usize) -> LabResult<Self> {
        if threads == 0 {
            return Err(LabError::config("--threads must be at least 1"));
        }
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| LabError::config(format!("cannot start worker pool: {e}")))?;
        Ok(Runner { pool })
    }

    fn map<T, F>(&self, tasks: usize, f: F) -> LabResult<Vec<T>>
    where
        T: Send,
        F: Fn(usize) -> LabResult<T> + Sync + Send,
    {
        self.pool.install(|| (0..tasks).into_par_iter().map(f).collect())
    }

    pub fn run(&self, config: &ExperimentConfig) -> LabResult<Outcome> {
        match config.experiment {
            Experiment::Simulate => simulate(config),
            Experiment::Wasserstein => self.wasserstein(config),
            Experiment::Dobrushin => self.dobrushin(config),
            Experiment::Rate => self.rate(config),
            Experiment::Hk => self.hk(config),
            Experiment::Chaos => chaos(config),
            Experiment::Vortex => vortex(config),
            Experiment::Hierarchy => hierarchy(config),
            Experiment::Quantum => quantum(config),
        }
    }

    fn wasserstein(&self, c: &ExperimentConfig) -> LabResult<Outcome> {
        let dim = c.usize("dim")?;
        let first = density(c, dim, 0.0)?;
        let second = density(c, dim, c.f64("shift")?)?;
        let (n, m, reps) = (c.usize("N")?, c.usize("M")?, c.usize("reps")?);
        let r = c.usize("r")?;
        let exponent = Exponent::from_int(r as u32)?;
        let seeds: Vec<(u64, u64)> = (0..reps).map(|p| dobrushin_seeds(c.master_seed, p)).collect();
        let rows = self.map(reps, |p| {
            let mu = sample_iid(&first, n, seeds[p].0)?;
            let nu = sample_iid(&second, m, seeds[p].1)?;
            let t = mk_distance(&mu, &nu, exponent)?;
            Ok((t.distance, t.plan.marginal_defect(mu.weights(), nu.weights())))
        })?;
        let mut table = Table::new("wasserstein.csv", &["rep", "N", "M", "r", "distance", "marginal_defect"]);
        for (p, (d, defect)) in rows.iter().enumerate() {
            table.push(vec![p.into(), n.into(), m.into(), r.into(), (*d).into(), (*defect).into()]);
        }
        let mut out = Outcome::new(table);
        let mean = rows.iter().map(|r| r.0).sum::<f64>() / reps.max(1) as f64;
        out.result("mean_distance", mean);
        out.seed("pairs", seeds.iter().map(|(a, b)| json!([a, b])).collect::<Vec<_>>());
        Ok(out)
    }

    fn dobrushin(&self, c: &ExperimentConfig) -> LabResult<Outcome> {
        let kernel = kernel(c)?;
        let lipschitz = kernel.lipschitz_bound().ok_or_else(|| {
            LabError::config(format!("kernel `{}` has no Lipschitz bound", c.str("kernel").unwrap_or("?")))
        })?;
        let dim = kernel.dim();
        let first = density(c, dim, 0.0)?;
        let second = density(c, dim, c.f64("shift")?)?;
        let (n, pairs, t) = (c.usize("N")?, c.usize("pairs")?, c.f64("t_final")?);
        let settings = IntegratorSettings::rk4(c.f64("dt")?);
        let slack = c.f64("absolute_slack")?;
        let seeds: Vec<(u64, u64)> = (0..pairs).map(|p| dobrushin_seeds(c.master_seed, p)).collect();
        let rows =
            self.map(pairs, |p| Ok(dobrushin_pair(&kernel, &first, &second, n, t, &settings, seeds[p], slack)?))?;
        let mut table = Table::new("dobrushin.csv", &["pair", "w1_initial", "w1_final", "bound", "ratio", "pass"]);
        let mut max_ratio = 0.0f64;
        for (p, row) in rows.iter().enumerate() {
            let ratio = if row.bound > 0.0 { row.w1_final / row.bound } else { 0.0 };
            max_ratio = max_ratio.max(ratio);
            table.push(vec![
                p.into(),
                row.w1_initial.into(),
                row.w1_final.into(),
                row.bound.into(),
                ratio.into(),
                row.pass.into(),
            ]);
        }
        let passed = rows.iter().filter(|r| r.pass).count();
        let mut out = Outcome::new(table);
        out.result("lipschitz", lipschitz);
        out.result("growth_factor", (2.0 * lipschitz * t.abs()).exp());
        out.result("pairs", pairs);
        out.result("passed", passed);
        out.result("pass_rate", if pairs == 0 { 1.0 } else { passed as f64 / pairs as f64 });
        out.result("max_ratio", max_ratio);
        out.seed("pairs", seeds.iter().map(|(a, b)| json!([a, b])).collect::<Vec<_>>());
        Ok(out)
    }

    fn rate(&self, c: &ExperimentConfig) -> LabResult<Outcome> {
        let kernel = kernel(c)?;
        let density = density(c, kernel.dim(), 0.0)?;
        let sizes = c.int_list("sizes")?;
        let (reps, reference_n, t) = (c.usize("reps")?, c.usize("reference_n")?, c.f64("t_final")?);
        let settings = IntegratorSettings::rk4(c.f64("dt")?);
        check_reference_size(&sizes, reference_n)?;
        let reference = meanfield_reference(&kernel, &density, reference_n, t, &settings, c.master_seed)?;
        let flat = self.map(sizes.len() * reps, |task| {
            let (s, r) = (task / reps, task % reps);
            let seed = replicate_seed(c.master_seed, s, r);
            Ok(meanfield_sample(&kernel, &density, sizes[s], t, &settings, seed, &reference)?)
        })?;
        let samples: Vec<Vec<f64>> = flat.chunks(reps.max(1)).map(<[f64]>::to_vec).collect();
        let report = RateReport::from_samples(&sizes, &samples)?;
        let mut out = Outcome::new(summary_table("rate.csv", "mean_w1", &sizes, &report, reps));
        rate_results(&mut out, &report);
        out.result("reference_n", reference_n);
        out.seed("reference", reference_seed(c.master_seed));
        out.seed("replicates", replicate_seeds(c.master_seed, sizes.len(), reps));
        Ok(out)
    }

    fn hk(&self, c: &ExperimentConfig) -> LabResult<Outcome> {
        let dim = c.usize("dim")?;
        let density = density(c, dim, 0.0)?;
        let sizes = c.int_list("sizes")?;
        let (reps, control_n) = (c.usize("reps")?, c.usize("control_n")?);
        check_control_size(&sizes, control_n)?;
        let control = hk_control(&density, control_n, c.master_seed)?;
        let flat = self.map(sizes.len() * reps, |task| {
            let (s, r) = (task / reps, task % reps);
            Ok(hk_sample(&density, sizes[s], replicate_seed(c.master_seed, s, r), &control)?)
        })?;
        let samples: Vec<Vec<f64>> = flat.chunks(reps.max(1)).map(<[f64]>::to_vec).collect();
        let report = RateReport::from_samples(&sizes, &samples)?;
        let mut out = Outcome::new(summary_table("hk.csv", "mean_w2_squared", &sizes, &report, reps));
        rate_results(&mut out, &report);
        let exponent = hk_exponent(dim);
        out.result("bound_exponent", exponent);
        out.result("within_bound", report.fit.slope <= exponent + 0.1);
        out.result("control_n", control_n);
        out.seed("control", reference_seed(c.master_seed));
        out.seed("replicates", replicate_seeds(c.master_seed, sizes.len(), reps));
        Ok(out)
    }
}

fn summary_table(file: &str, column: &str, sizes: &[usize], report: &RateReport, reps: usize) -> Table {
    let mut table = Table::new(file, &["N", column, "stderr", "reps"]);
    for ((n, mean), se) in sizes.iter().zip(&report.means).zip(&report.stderrs) {
        table.push(vec![(*n).into(), (*mean).into(), (*se).into(), reps.into()]);
    }
    table
}

fn rate_results(out: &mut Outcome, report: &RateReport) {
    out.result("slope", report.fit.slope);
    out.result("intercept", report.fit.intercept);
    out.result("slope_half_width", report.fit.slope_half_width);
    out.result("strictly_decreasing", report.strictly_decreasing());
}

fn replicate_seeds(master: u64, sizes: usize, reps: usize) -> Value {
    (0..sizes).map(|s| (0..reps).map(|r| replicate_seed(master, s, r)).collect::<Vec<_>>()).collect()
}

fn kernel(c: &ExperimentConfig) -> LabResult<KernelSpec> {
    let dim = c.usize("dim")?;
    let eps = c.f64("eps")?;
    let kernel = match c.str("kernel")? {
        "gaussian_odd" => KernelSpec::gaussian_odd(dim)?,
        "linear_rotation" => KernelSpec::linear_rotation(),
        "vortex_point" => KernelSpec::vortex_point(),
        "vortex_blob" => KernelSpec::vortex_blob(eps)?,
        "vlasov_mollified" => KernelSpec::vlasov_mollified(dim, eps, c.f64("coupling")?)?,
        other => return Err(LabError::config(format!("unknown kernel `{other}`"))),
    };
    Ok(match c.opt_f64("lipschitz")? {
        Some(l) => kernel.with_lipschitz_bound(l),
        None => kernel,
    })
}

/// The configured density in `dim` dimensions, translated by `shift` along
/// the first coordinate.
fn density(c: &ExperimentConfig, dim: usize, shift: f64) -> LabResult<DensitySpec> {
    let offset = |k: usize| if k == 0 { shift } else { 0.0 };
    let density = match c.str("density")? {
        "gaussian" => {
            let mean = c.f64("mean")?;
            DensitySpec::gaussian((0..dim).map(|k| mean + offset(k)).collect(), vec![c.f64("variance")?; dim])?
        }
        "uniform" => {
            let (lo, hi) = (c.f64("lo")?, c.f64("hi")?);
            DensitySpec::uniform_box(
                (0..dim).map(|k| lo + offset(k)).collect(),
                (0..dim).map(|k| hi + offset(k)).collect(),
            )?
        }
        "mixture" => {
            let (mean, half) = (c.f64("mean")?, 0.5 * c.f64("separation")?);
            let variance = vec![c.f64("variance")?; dim];
            let centre =
                |sign: f64| (0..dim).map(|k| mean + offset(k) + if k == 0 { sign * half } else { 0.0 }).collect();
            DensitySpec::gaussian_mixture(
                vec![0.5, 0.5],
                vec![(centre(-1.0), variance.clone()), (centre(1.0), variance)],
            )?
        }
        other => return Err(LabError::config(format!("unknown density `{other}`"))),
    };
    Ok(density)
}

/// Explicit points (with optional intensities) or an i.i.d. sample.
fn initial_configuration(
    c: &ExperimentConfig,
    dim: usize,
    sample: impl FnOnce(usize, u64) -> LabResult<Configuration>,
    out: &mut Outcome,
) -> LabResult<Configuration> {
    let intensities = c.float_list("intensities")?;
    match c.float_list("points")? {
        Some(points) => Ok(match intensities {
            Some(w) => Configuration::with_intensities(dim, points, w)?,
            None => Configuration::uniform(dim, points)?,
        }),
        None => {
            let seed = derive_seed(c.master_seed, 0);
            out.seed("initial", seed);
            let cloud = sample(c.usize("N")?, seed)?;
            Ok(match intensities {
                Some(w) => Configuration::with_intensities(dim, cloud.points().to_vec(), w)?,
                None => cloud,
            })
        }
    }
}

fn settings(c: &ExperimentConfig) -> LabResult<IntegratorSettings> {
    let mut settings = IntegratorSettings::rk4(c.f64("dt")?).recording_every(c.usize("record_every")?.max(1));
    if let Some(tol) = c.opt_f64("substep_tolerance")? {
        settings = settings.validated(tol);
    }
    Ok(settings)
}

fn simulate(c: &ExperimentConfig) -> LabResult<Outcome> {
    let kernel = kernel(c)?;
    let dim = kernel.dim();
    let mut header = vec!["t".to_string(), "particle".to_string()];
    header.extend((0..dim).map(|k| format!("x{k}")));
    let mut out = Outcome::new(Table { file_name: "trajectory.csv".into(), header, rows: Vec::new() });
    let density = density(c, dim, 0.0)?;
    let initial = initial_configuration(c, dim, |n, seed| Ok(sample_iid(&density, n, seed)?), &mut out)?;
    let trajectory = simulate_nbody(&kernel, &initial, c.f64("t_final")?, &settings(c)?)?;
    let table = &mut out.tables[0];
    for (s, t) in trajectory.times().iter().enumerate() {
        for (i, z) in trajectory.points(s).chunks_exact(dim).enumerate() {
            let mut row: Vec<Cell> = vec![(*t).into(), i.into()];
            row.extend(z.iter().map(|x| Cell::from(*x)));
            table.push(row);
        }
    }
    let named = |config: &Configuration| -> LabResult<Value> {
        let q = conserved_quantities(&kernel, config)?;
        Ok(Value::Object(q.named().into_iter().map(|(k, v)| (k, json!(v))).collect()))
    };
    out.result("recorded_states", trajectory.len());
    out.result("initial_invariants", named(&initial)?);
    out.result("final_invariants", named(&trajectory.final_state())?);
    if let Some(e) = trajectory.estimated_error {
        out.result("estimated_error", e);
    }
    Ok(out)
}

fn chaos(c: &ExperimentConfig) -> LabResult<Outcome> {
    let dim = c.usize("dim")?;
    let density = density(c, dim, 0.0)?;
    let (n, runs, threshold) = (c.usize("N")?, c.usize("runs")?, c.f64("threshold")?);
    let ensemble = Ensemble::sample(&density, n, runs, c.master_seed)?;
    let mut observables = vec![("cosine".to_string(), Observable::Cosine { coord: 0, freq: c.f64("frequency")? })];
    observables.extend((1..=4).map(|p| (format!("monomial_{p}"), Observable::Monomial { coord: 0, power: p })));
    let mut table = Table::new(
        "chaos.csv",
        &["observable", "expectation", "variance", "fraction", "envelope", "pass", "second_moment_defect"],
    );
    let mut all_pass = true;
    let mut worst_identity = 0.0f64;
    for (name, obs) in &observables {
        let phi = |z: &[f64]| obs.eval(z);
        let expectation = obs.expectation(&density);
        let variance = obs.variance(&density);
        let fraction = chaos_concentration(&ensemble, &Reference::Exact(expectation), &phi, threshold)?;
        let envelope = chebyshev_envelope(variance, n, threshold, runs);
        let identity =
            if n >= 2 { meanfield_core::chaos::second_moment_identity(&ensemble, &phi)?.max_run_defect } else { 0.0 };
        let pass = fraction <= envelope;
        all_pass &= pass;
        worst_identity = worst_identity.max(identity);
        table.push(vec![
            name.as_str().into(),
            expectation.into(),
            variance.into(),
            fraction.into(),
            envelope.into(),
            pass.into(),
            identity.into(),
        ]);
    }
    let mut out = Outcome::new(table);
    out.result("chebyshev_all_pass", all_pass);
    out.result("max_second_moment_defect", worst_identity);
    let j = c.usize("tensor_order")?;
    if (1..=4).contains(&j) && j <= n && n <= 12 {
        let (_, obs) = observables[0];
        let report = empirical_tensor_vs_marginal(&ensemble, &|z: &[f64]| obs.eval(z), j)?;
        out.result(
            "tensor",
            json!({
                "order": j,
                "coefficient": report.coefficient,
                "tensor_moment": report.tensor_moment,
                "marginal_moment": report.marginal_moment,
                "remainder_bound": report.remainder_bound,
                "max_remainder": report.max_remainder,
                "holds": report.holds(),
            }),
        );
    }
    let arithmetic = (1..=10_000usize).all(|n| (1..=4usize.min(n)).all(|j| remainder_mass_bound_holds(n, j)));
    out.result("remainder_arithmetic_holds", arithmetic);
    out.seed("runs", ensemble.seeds.clone());
    Ok(out)
}

fn vortex(c: &ExperimentConfig) -> LabResult<Outcome> {
    let kernel = match c.str("kernel")? {
        "vortex_point" => KernelSpec::vortex_point(),
        _ => KernelSpec::vortex_blob(c.f64("eps")?)?,
    };
    let mut out =
        Outcome::new(Table::new("vortex.csv", &["t", "hamiltonian", "center_x", "center_y", "moment", "min_distance"]));
    let (lo, hi) = (c.f64("lo")?, c.f64("hi")?);
    let initial = initial_configuration(
        c,
        2,
        |n, seed| Ok(sample_iid(&DensitySpec::uniform_box(vec![lo, lo], vec![hi, hi])?, n, seed)?),
        &mut out,
    )?;
    let trajectory = simulate_nbody(&kernel, &initial, c.f64("t_final")?, &settings(c)?)?;
    let invariants = |config: &Configuration| -> LabResult<_> {
        conserved_quantities(&kernel, config)?
            .vortex
            .ok_or_else(|| LabError::config("vortex invariants need a two-dimensional vortex kernel"))
    };
    let q0 = invariants(&initial)?;
    let mut drift = [0.0f64; 3];
    let mut min_distance = f64::INFINITY;
    for (s, t) in trajectory.times().iter().enumerate() {
        let q = invariants(&trajectory.state(s))?;
        let d = min_pair_distance(trajectory.points(s));
        min_distance = min_distance.min(d);
        drift[0] = drift[0].max(relative(q.hamiltonian, q0.hamiltonian));
        drift[1] = drift[1].max((q.center[0] - q0.center[0]).abs().max((q.center[1] - q0.center[1]).abs()));
        drift[2] = drift[2].max(relative(q.moment, q0.moment));
        out.tables[0].push(vec![
            (*t).into(),
            q.hamiltonian.into(),
            q.center[0].into(),
            q.center[1].into(),
            q.moment.into(),
            d.into(),
        ]);
    }
    out.result("hamiltonian_relative_drift", drift[0]);
    out.result("center_drift", drift[1]);
    out.result("moment_relative_drift", drift[2]);
    out.result("min_distance", min_distance);
    Ok(out)
}

fn relative(value: f64, reference: f64) -> f64 {
    (value - reference).abs() / reference.abs().max(f64::MIN_POSITIVE)
}

fn min_pair_distance(points: &[f64]) -> f64 {
    let z: Vec<&[f64]> = points.chunks_exact(2).collect();
    let mut best = f64::INFINITY;
    for i in 0..z.len() {
        for j in i + 1..z.len() {
            best = best.min((z[i][0] - z[j][0]).hypot(z[i][1] - z[j][1]));
        }
    }
    best
}

fn hierarchy(c: &ExperimentConfig) -> LabResult<Outcome> {
    let (x_in, levels, t) = (c.f64("x_in")?, c.usize("levels")?, c.f64("t_final")?);
    let closure = match c.str("closure")? {
        "zero" => Closure::Zero,
        _ => Closure::Factorized,
    };
    let trajectory = solve_truncated(x_in, levels, closure, t, c.f64("dt")?)?;
    let stride = c.usize("record_every")?.max(1);
    let mut table = Table::new("hierarchy.csv", &["t", "k", "y_k"]);
    let last = trajectory.times.len() - 1;
    for (s, (time, y)) in trajectory.times.iter().zip(&trajectory.states).enumerate() {
        if s % stride == 0 || s == last {
            for (k, v) in y.iter().enumerate() {
                table.push(vec![(*time).into(), (k + 1).into(), (*v).into()]);
            }
        }
    }
    let mut out = Outcome::new(table);
    let y1 = trajectory.final_state()[0];
    out.result("y1_final", y1);
    out.result("factorization_defect", trajectory.factorization_defect());
    out.result("growth_radius", growth_profile(&trajectory).radius);
    if let Ok(exact) = riccati_reference(x_in, t, 1) {
        out.result("y1_closed_form", exact[0]);
        out.result("y1_error", (y1 - exact[0]).abs());
    }
    Ok(out)
}

/// The fixed one-body profile `1 + cos(x)/2 + 0.3 i sin(2x)` on the grid's
/// fundamental period, normalised.
pub fn quantum_initial_state(grid: Grid1D) -> LabResult<WaveFunction> {
    let k = 2.0 * std::f64::consts::PI / grid.length();
    Ok(WaveFunction::from_fn(grid, |x| Complex64::new(1.0 + 0.5 * (k * x).cos(), 0.3 * (2.0 * k * x).sin()))?)
}

pub fn potential(c: &ExperimentConfig) -> LabResult<PotentialSpec> {
    Ok(match c.str("potential")? {
        "cosine" => PotentialSpec::Cosine { amplitude: c.f64("amplitude")? },
        "gaussian_well" => PotentialSpec::GaussianWell { depth: c.f64("depth")?, width: c.f64("width")? },
        "soft_coulomb" => PotentialSpec::SoftCoulomb { strength: c.f64("strength")?, eps: c.f64("eps")? },
        other => return Err(LabError::config(format!("unknown potential `{other}`"))),
    })
}

fn quantum(c: &ExperimentConfig) -> LabResult<Outcome> {
    let grid = Grid1D::new(c.usize("M")?, c.f64("length")?)?;
    let psi = quantum_initial_state(grid)?;
    let potential = potential(c)?;
    let particles = c.int_list("particles")?;
    let r = c.f64("holder_r")?;
    let report = hartree_limit_experiment(
        &psi,
        &potential,
        &particles,
        c.f64("t_final")?,
        c.f64("dt")?,
        c.usize("record_every")?.max(1),
        r,
    )?;
    let mut table = Table::new("quantum.csv", &["t", "N", "E_N", "bound", "trace_distance"]);
    let mut per_n = Vec::new();
    for s in &report.series {
        for (((t, e), b), d) in s.times.iter().zip(&s.pickl).zip(&s.bound).zip(&s.trace_distance) {
            table.push(vec![(*t).into(), s.particles.into(), (*e).into(), (*b).into(), (*d).into()]);
        }
        per_n.push(json!({
            "N": s.particles,
            "E_N_final": s.final_pickl(),
            "N_times_E_N": s.particles as f64 * s.final_pickl(),
            "within_bound": s.within_bound(),
            "trace_distance_violations": s.trace_distance_violations,
            "max_norm_defect": s.max_norm_defect,
            "max_hermitian_defect": s.max_hermitian_defect,
            "max_trace_defect": s.max_trace_defect,
            "min_eigenvalue": s.min_eigenvalue,
        }));
    }
    let mut out = Outcome::new(table);
    out.result("series", per_n);
    out.result("scaling_ratio", report.scaling_ratio);
    out.result("decreasing", report.decreasing);
    out.result("grid_spacing", grid.spacing());
    Ok(out)
}
