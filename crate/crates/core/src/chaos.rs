//! Sampling, propagation-of-chaos statistics and the ensemble experiments
//! (Dobrushin stability, mean-field rate, empirical-measure sampling rate).
//!
//! Every experiment is split into per-unit functions (one pair, one
//! replicate) plus a serial driver. Units depend only on their own seeds so a
//! caller may run them on any number of workers and reduce in index order.

use alloc::vec;
use alloc::vec::Vec;

use crate::dynamics::{simulate_nbody, IntegratorSettings};
use crate::error::{Error, Result};
use crate::kernels::Interaction;
use crate::measure::{Configuration, EmpiricalMeasure};
use crate::rng::{derive_seed, Stream};
use crate::stats::{compensated_sum, mean_and_stderr, RateFit};
use crate::transport::{mk_distance, Exponent};

/// Probability density to draw initial data from.
#[derive(Debug, Clone, PartialEq)]
pub enum DensitySpec {
    /// Independent coordinates, `N(mean_k, variance_k)`.
    Gaussian { mean: Vec<f64>, variance: Vec<f64> },
    /// Uniform on the box `prod_k [lo_k, hi_k]`.
    UniformBox { lo: Vec<f64>, hi: Vec<f64> },
    /// Finite mixture of diagonal Gaussians.
    GaussianMixture { weights: Vec<f64>, components: Vec<(Vec<f64>, Vec<f64>)> },
}

impl DensitySpec {
    pub fn gaussian(mean: Vec<f64>, variance: Vec<f64>) -> Result<Self> {
        check_gaussian(&mean, &variance)?;
        Ok(DensitySpec::Gaussian { mean, variance })
    }

    pub fn standard_gaussian(dim: usize) -> Self {
        DensitySpec::Gaussian { mean: vec![0.0; dim], variance: vec![1.0; dim] }
    }

    pub fn uniform_box(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        if lo.is_empty() || lo.len() != hi.len() {
            return Err(Error::InvalidInput("box corners must have the same positive dimension".into()));
        }
        if lo.iter().zip(&hi).any(|(a, b)| !(a < b)) {
            return Err(Error::InvalidInput("box needs lo < hi in every coordinate".into()));
        }
        Ok(DensitySpec::UniformBox { lo, hi })
    }

    pub fn gaussian_mixture(weights: Vec<f64>, components: Vec<(Vec<f64>, Vec<f64>)>) -> Result<Self> {
        if weights.is_empty() || weights.len() != components.len() {
            return Err(Error::InvalidInput("mixture needs one weight per component".into()));
        }
        if weights.iter().any(|w| !(*w >= 0.0)) || (weights.iter().sum::<f64>() - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidInput("mixture weights must be nonnegative and sum to 1".into()));
        }
        let dim = components[0].0.len();
        for (m, v) in &components {
            check_gaussian(m, v)?;
            if m.len() != dim {
                return Err(Error::DimensionMismatch { expected: dim, found: m.len() });
            }
        }
        Ok(DensitySpec::GaussianMixture { weights, components })
    }

    pub fn dim(&self) -> usize {
        match self {
            DensitySpec::Gaussian { mean, .. } => mean.len(),
            DensitySpec::UniformBox { lo, .. } => lo.len(),
            DensitySpec::GaussianMixture { components, .. } => components[0].0.len(),
        }
    }

    fn draw(&self, rng: &mut Stream, out: &mut [f64]) {
        match self {
            DensitySpec::Gaussian { mean, variance } => {
                for ((x, m), v) in out.iter_mut().zip(mean).zip(variance) {
                    *x = m + v.sqrt() * rng.normal();
                }
            }
            DensitySpec::UniformBox { lo, hi } => {
                for ((x, a), b) in out.iter_mut().zip(lo).zip(hi) {
                    *x = rng.uniform_in(*a, *b);
                }
            }
            DensitySpec::GaussianMixture { weights, components } => {
                let (mean, variance) = &components[rng.categorical(weights)];
                for ((x, m), v) in out.iter_mut().zip(mean).zip(variance) {
                    *x = m + v.sqrt() * rng.normal();
                }
            }
        }
    }
}

fn check_gaussian(mean: &[f64], variance: &[f64]) -> Result<()> {
    if mean.is_empty() || mean.len() != variance.len() {
        return Err(Error::InvalidInput("mean and variance must have the same positive dimension".into()));
    }
    if variance.iter().any(|v| !(*v > 0.0)) {
        return Err(Error::InvalidInput("variances must be positive".into()));
    }
    Ok(())
}

/// `n` i.i.d. draws with uniform weights; a pure function of `seed`.
pub fn sample_iid(density: &DensitySpec, n: usize, seed: u64) -> Result<Configuration> {
    if n == 0 {
        return Err(Error::InvalidInput("sample size must be positive".into()));
    }
    let d = density.dim();
    let mut rng = Stream::new(seed);
    let mut points = vec![0.0; n * d];
    for z in points.chunks_exact_mut(d) {
        density.draw(&mut rng, z);
    }
    Configuration::uniform(d, points)
}

/// Built-in test functions of a single coordinate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Observable {
    Constant(f64),
    /// `z_coord^power`
    Monomial {
        coord: usize,
        power: u32,
    },
    /// `cos(freq z_coord)`
    Cosine {
        coord: usize,
        freq: f64,
    },
}

impl Observable {
    pub fn eval(&self, z: &[f64]) -> f64 {
        match *self {
            Observable::Constant(c) => c,
            Observable::Monomial { coord, power } => z[coord].powi(power as i32),
            Observable::Cosine { coord, freq } => (freq * z[coord]).cos(),
        }
    }

    /// `sup |phi|` when finite.
    pub fn sup_norm(&self) -> Option<f64> {
        match *self {
            Observable::Constant(c) => Some(c.abs()),
            Observable::Monomial { power: 0, .. } => Some(1.0),
            Observable::Monomial { .. } => None,
            Observable::Cosine { .. } => Some(1.0),
        }
    }

    /// Analytic `<p, phi>`.
    pub fn expectation(&self, density: &DensitySpec) -> f64 {
        match *self {
            Observable::Constant(c) => c,
            Observable::Monomial { coord, power } => raw_moment(density, coord, power),
            Observable::Cosine { coord, freq } => cos_moment(density, coord, freq),
        }
    }

    /// Analytic `<p, phi^2>`.
    pub fn second_moment(&self, density: &DensitySpec) -> f64 {
        match *self {
            Observable::Constant(c) => c * c,
            Observable::Monomial { coord, power } => raw_moment(density, coord, 2 * power),
            Observable::Cosine { coord, freq } => 0.5 * (1.0 + cos_moment(density, coord, 2.0 * freq)),
        }
    }

    pub fn variance(&self, density: &DensitySpec) -> f64 {
        let m = self.expectation(density);
        (self.second_moment(density) - m * m).max(0.0)
    }
}

fn binomial(n: u32, k: u32) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

fn gaussian_raw_moment(mean: f64, variance: f64, power: u32) -> f64 {
    // E (m + s Z)^p with E Z^{2q} = (2q - 1)!!
    let s = variance.sqrt();
    let mut total = 0.0;
    let mut k = 0;
    while k <= power {
        let double_factorial = (1..k).step_by(2).fold(1.0, |acc, x| acc * x as f64);
        total += binomial(power, k) * mean.powi((power - k) as i32) * s.powi(k as i32) * double_factorial;
        k += 2;
    }
    total
}

fn raw_moment(density: &DensitySpec, coord: usize, power: u32) -> f64 {
    match density {
        DensitySpec::Gaussian { mean, variance } => gaussian_raw_moment(mean[coord], variance[coord], power),
        DensitySpec::UniformBox { lo, hi } => {
            let (a, b) = (lo[coord], hi[coord]);
            (b.powi(power as i32 + 1) - a.powi(power as i32 + 1)) / ((power + 1) as f64 * (b - a))
        }
        DensitySpec::GaussianMixture { weights, components } => {
            weights.iter().zip(components).map(|(w, (m, v))| w * gaussian_raw_moment(m[coord], v[coord], power)).sum()
        }
    }
}

fn cos_moment(density: &DensitySpec, coord: usize, freq: f64) -> f64 {
    let gauss = |m: f64, v: f64| (freq * m).cos() * (-0.5 * v * freq * freq).exp();
    match density {
        DensitySpec::Gaussian { mean, variance } => gauss(mean[coord], variance[coord]),
        DensitySpec::UniformBox { lo, hi } => {
            let (a, b) = (lo[coord], hi[coord]);
            if freq == 0.0 {
                1.0
            } else {
                ((freq * b).sin() - (freq * a).sin()) / (freq * (b - a))
            }
        }
        DensitySpec::GaussianMixture { weights, components } => {
            weights.iter().zip(components).map(|(w, (m, v))| w * gauss(m[coord], v[coord])).sum()
        }
    }
}

/// Runs sharing `N` and `d`, each with its own recorded seed.
#[derive(Debug, Clone)]
pub struct Ensemble {
    pub runs: Vec<Configuration>,
    pub master_seed: u64,
    pub seeds: Vec<u64>,
}

impl Ensemble {
    /// `n_runs` i.i.d. samples of size `n`; run `r` uses `derive_seed(master, r)`.
    pub fn sample(density: &DensitySpec, n: usize, n_runs: usize, master_seed: u64) -> Result<Self> {
        let seeds: Vec<u64> = (0..n_runs as u64).map(|r| derive_seed(master_seed, r)).collect();
        let runs = seeds.iter().map(|s| sample_iid(density, n, *s)).collect::<Result<Vec<_>>>()?;
        Ok(Ensemble { runs, master_seed, seeds })
    }

    pub fn from_runs(runs: Vec<Configuration>, master_seed: u64, seeds: Vec<u64>) -> Result<Self> {
        let first = runs.first().ok_or_else(|| Error::InvalidInput("empty ensemble".into()))?;
        let (n, d) = (first.len(), first.dim());
        if runs.iter().any(|r| r.len() != n || r.dim() != d) {
            return Err(Error::InvalidInput("ensemble runs must share N and d".into()));
        }
        if seeds.len() != runs.len() {
            return Err(Error::DimensionMismatch { expected: runs.len(), found: seeds.len() });
        }
        Ok(Ensemble { runs, master_seed, seeds })
    }

    pub fn particles(&self) -> usize {
        self.runs[0].len()
    }
}

/// Where `<p, phi>` comes from.
#[derive(Debug, Clone)]
pub enum Reference {
    Exact(f64),
    /// Large control sample, at least [`MIN_CONTROL_SAMPLE`] points.
    Control(EmpiricalMeasure),
}

pub const MIN_CONTROL_SAMPLE: usize = 100_000;

impl Reference {
    pub fn value(&self, phi: &dyn Fn(&[f64]) -> f64) -> Result<f64> {
        match self {
            Reference::Exact(v) => Ok(*v),
            Reference::Control(sample) => {
                if sample.len() < MIN_CONTROL_SAMPLE {
                    return Err(Error::InvalidInput(alloc::format!(
                        "control sample of {} points is below {MIN_CONTROL_SAMPLE}",
                        sample.len()
                    )));
                }
                Ok(sample.integrate(phi))
            }
        }
    }
}

/// Fraction of runs with `|<mu_Z - p, phi>| >= eps`.
pub fn chaos_concentration(
    ensemble: &Ensemble,
    reference: &Reference,
    phi: &dyn Fn(&[f64]) -> f64,
    eps: f64,
) -> Result<f64> {
    if !(eps > 0.0) {
        return Err(Error::InvalidInput("threshold must be positive".into()));
    }
    let target = reference.value(phi)?;
    let hits = ensemble.runs.iter().filter(|run| (run.integrate(phi) - target).abs() >= eps).count();
    Ok(hits as f64 / ensemble.runs.len() as f64)
}

/// Bienayme-Chebyshev bound `Var(phi) / (N eps^2)` plus three binomial
/// standard errors over `runs` replicates.
pub fn chebyshev_envelope(variance: f64, n: usize, eps: f64, runs: usize) -> f64 {
    let bound = variance / (n as f64 * eps * eps);
    let p = bound.min(1.0);
    bound + 3.0 * (p * (1.0 - p) / runs as f64).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SecondMomentReport {
    /// `E <mu_Z, phi>^2`
    pub lhs: f64,
    /// `(1/N) <P_{N:1}, phi^2> + ((N-1)/N) <P_{N:2}, phi (x) phi>`
    pub rhs: f64,
    /// Largest per-run `|lhs_r - rhs_r|`.
    pub max_run_defect: f64,
}

/// Both sides of the second-moment identity, with the marginals estimated by
/// the per-run single-index and distinct-pair averages.
pub fn second_moment_identity(ensemble: &Ensemble, phi: &dyn Fn(&[f64]) -> f64) -> Result<SecondMomentReport> {
    let n = ensemble.particles();
    if n < 2 {
        return Err(Error::InvalidInput("the pair marginal needs N >= 2".into()));
    }
    let nf = n as f64;
    let (mut lhs, mut rhs, mut worst) = (0.0, 0.0, 0.0f64);
    let mut values = vec![0.0; n];
    for run in &ensemble.runs {
        for (v, (z, _)) in values.iter_mut().zip(run.iter()) {
            *v = phi(z);
        }
        let mean = compensated_sum(values.iter().copied()) / nf;
        let l = mean * mean;
        let single = compensated_sum(values.iter().map(|v| v * v)) / nf;
        let values = &values;
        let pairs =
            compensated_sum((0..n).flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| values[i] * values[j])));
        let pair = pairs / (nf * (nf - 1.0));
        let r = single / nf + (nf - 1.0) / nf * pair;
        worst = worst.max((l - r).abs());
        lhs += l;
        rhs += r;
    }
    let runs = ensemble.runs.len() as f64;
    Ok(SecondMomentReport { lhs: lhs / runs, rhs: rhs / runs, max_run_defect: worst })
}

/// `N! / ((N - j)! N^j)`, the fraction of index maps `{1..j} -> {1..N}` that
/// are injective.
pub fn injective_fraction(n: usize, j: usize) -> f64 {
    (0..j).map(|k| (n - k) as f64 / n as f64).product()
}

/// `1 - N!/((N-j)! N^j) <= j(j-1)/(2N)` (with a 1e-12 relative margin).
pub fn remainder_mass_bound_holds(n: usize, j: usize) -> bool {
    let lhs = 1.0 - injective_fraction(n, j);
    let rhs = (j * j.saturating_sub(1)) as f64 / (2.0 * n as f64);
    lhs <= rhs * (1.0 + 1e-12) + f64::EPSILON
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TensorMarginalReport {
    /// `E <mu_Z^{(x) j}, phi^{(x) j}>`
    pub tensor_moment: f64,
    /// `N! / ((N - j)! N^j)`
    pub coefficient: f64,
    /// `<P_{N:j}, phi^{(x) j}>` from distinct-index averages.
    pub marginal_moment: f64,
    /// `2 (1 - coefficient) sup|phi|^j`
    pub remainder_bound: f64,
    /// Largest per-run `|tensor - coefficient * marginal|`.
    pub max_remainder: f64,
    /// Largest per-run non-injective mass `|sum over non-injective maps| / N^j`
    /// divided by `sup|phi|^j`; never exceeds `1 - coefficient`.
    pub max_normalized_non_injective: f64,
}

impl TensorMarginalReport {
    pub fn holds(&self) -> bool {
        self.max_remainder <= self.remainder_bound * (1.0 + 1e-12) + 1e-15
    }
}

/// Exact decomposition of `<mu_Z^{(x) j}, phi^{(x) j}>` into injective and
/// non-injective index maps, per run, by enumerating all `N^j` maps.
pub fn empirical_tensor_vs_marginal(
    ensemble: &Ensemble,
    phi: &dyn Fn(&[f64]) -> f64,
    j: usize,
) -> Result<TensorMarginalReport> {
    let n = ensemble.particles();
    if j == 0 || j > n {
        return Err(Error::InvalidInput(alloc::format!("tensor order {j} must lie in 1..={n}")));
    }
    if n > 12 || j > 4 {
        return Err(Error::InvalidInput("exact enumeration is limited to N <= 12, j <= 4".into()));
    }
    let total_maps = n.pow(j as u32);
    let injective_maps: usize = (0..j).map(|k| n - k).product();
    let coefficient = injective_fraction(n, j);
    let mut values = vec![0.0; n];
    let (mut tensor, mut marginal) = (0.0, 0.0);
    let mut max_remainder = 0.0f64;
    let mut max_non_injective = 0.0f64;
    let mut sup = 0.0f64;
    let mut index = vec![0usize; j];
    for run in &ensemble.runs {
        for (v, (z, _)) in values.iter_mut().zip(run.iter()) {
            *v = phi(z);
        }
        let run_sup = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        sup = sup.max(run_sup);
        index.fill(0);
        let (mut all, mut inj) = (0.0, 0.0);
        for _ in 0..total_maps {
            let product: f64 = index.iter().map(|&i| values[i]).product();
            all += product;
            let distinct = (0..j).all(|a| (a + 1..j).all(|b| index[a] != index[b]));
            if distinct {
                inj += product;
            }
            // odometer
            for slot in index.iter_mut().rev() {
                *slot += 1;
                if *slot < n {
                    break;
                }
                *slot = 0;
            }
        }
        let t = all / total_maps as f64;
        let m = inj / injective_maps as f64;
        tensor += t;
        marginal += m;
        max_remainder = max_remainder.max((t - coefficient * m).abs());
        if run_sup > 0.0 {
            let non_inj = ((all - inj) / total_maps as f64).abs() / run_sup.powi(j as i32);
            max_non_injective = max_non_injective.max(non_inj);
        }
    }
    let runs = ensemble.runs.len() as f64;
    Ok(TensorMarginalReport {
        tensor_moment: tensor / runs,
        coefficient,
        marginal_moment: marginal / runs,
        remainder_bound: 2.0 * (1.0 - coefficient) * sup.powi(j as i32),
        max_remainder,
        max_normalized_non_injective: max_non_injective,
    })
}

/// One Dobrushin comparison.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DobrushinRow {
    pub w1_initial: f64,
    pub w1_final: f64,
    /// `e^{2 L |t|} W1(0)`
    pub bound: f64,
    pub pass: bool,
}

/// Relative slack on the Dobrushin bound.
pub const DOBRUSHIN_RELATIVE_SLACK: f64 = 1e-4;

/// Evolves two i.i.d. clouds of size `n` (from `first` and `second`) by the
/// N-body flow and compares `W1` before and after against `e^{2Lt}`.
#[allow(clippy::too_many_arguments)]
pub fn dobrushin_pair<K: Interaction + ?Sized>(
    kernel: &K,
    first: &DensitySpec,
    second: &DensitySpec,
    n: usize,
    t_final: f64,
    settings: &IntegratorSettings,
    seeds: (u64, u64),
    absolute_slack: f64,
) -> Result<DobrushinRow> {
    let lipschitz =
        kernel.lipschitz_bound().ok_or(Error::UnsupportedKernel("Dobrushin's estimate needs a Lipschitz kernel"))?;
    let a = sample_iid(first, n, seeds.0)?;
    let b = sample_iid(second, n, seeds.1)?;
    let w1_initial = mk_distance(&a, &b, Exponent::One)?.distance;
    let at = simulate_nbody(kernel, &a, t_final, settings)?.final_state();
    let bt = simulate_nbody(kernel, &b, t_final, settings)?.final_state();
    let w1_final = mk_distance(&at, &bt, Exponent::One)?.distance;
    let bound = (2.0 * lipschitz * t_final.abs()).exp() * w1_initial;
    let pass = w1_final <= bound * (1.0 + DOBRUSHIN_RELATIVE_SLACK) + absolute_slack;
    Ok(DobrushinRow { w1_initial, w1_final, bound, pass })
}

/// Seeds of Dobrushin pair `p`.
pub fn dobrushin_seeds(master_seed: u64, pair: usize) -> (u64, u64) {
    (derive_seed(master_seed, 2 * pair as u64), derive_seed(master_seed, 2 * pair as u64 + 1))
}

#[allow(clippy::too_many_arguments)]
pub fn dobrushin_experiment<K: Interaction + ?Sized>(
    kernel: &K,
    first: &DensitySpec,
    second: &DensitySpec,
    n: usize,
    t_final: f64,
    n_pairs: usize,
    master_seed: u64,
    settings: &IntegratorSettings,
    absolute_slack: f64,
) -> Result<Vec<DobrushinRow>> {
    (0..n_pairs)
        .map(|p| {
            let seeds = dobrushin_seeds(master_seed, p);
            dobrushin_pair(kernel, first, second, n, t_final, settings, seeds, absolute_slack)
        })
        .collect()
}

/// Seed of replicate `rep` at sample-size index `size_index`.
pub fn replicate_seed(master_seed: u64, size_index: usize, rep: usize) -> u64 {
    derive_seed(derive_seed(master_seed, size_index as u64), rep as u64)
}

/// Seed of the reference (or control) cloud.
pub fn reference_seed(master_seed: u64) -> u64 {
    derive_seed(master_seed, u64::MAX)
}

/// Ensemble means (and standard errors) of a statistic with its rate fit.
#[derive(Debug, Clone, PartialEq)]
pub struct RateReport {
    pub means: Vec<f64>,
    pub stderrs: Vec<f64>,
    pub fit: RateFit,
}

impl RateReport {
    pub fn from_samples(sizes: &[usize], samples: &[Vec<f64>]) -> Result<Self> {
        let (means, stderrs): (Vec<f64>, Vec<f64>) = samples.iter().map(|s| mean_and_stderr(s)).unzip();
        let fit = RateFit::fit(sizes, &means)?;
        Ok(RateReport { means, stderrs, fit })
    }

    pub fn strictly_decreasing(&self) -> bool {
        self.means.windows(2).all(|w| w[1] < w[0])
    }
}

fn check_sizes(sizes: &[usize]) -> Result<usize> {
    if sizes.len() < 3 {
        return Err(Error::InvalidInput("rate experiments need at least three sample sizes".into()));
    }
    sizes.iter().copied().max().ok_or_else(|| Error::InvalidInput("no sample sizes".into()))
}

/// High-resolution particle reference `mu_ref(t)` for the mean-field rate.
pub fn meanfield_reference<K: Interaction + ?Sized>(
    kernel: &K,
    density: &DensitySpec,
    reference_n: usize,
    t_final: f64,
    settings: &IntegratorSettings,
    master_seed: u64,
) -> Result<EmpiricalMeasure> {
    let cloud = sample_iid(density, reference_n, reference_seed(master_seed))?;
    Ok(simulate_nbody(kernel, &cloud, t_final, settings)?.final_state())
}

/// `W1(mu_{T_t Z_N}, mu_ref(t))` for one replicate.
pub fn meanfield_sample<K: Interaction + ?Sized>(
    kernel: &K,
    density: &DensitySpec,
    n: usize,
    t_final: f64,
    settings: &IntegratorSettings,
    seed: u64,
    reference: &EmpiricalMeasure,
) -> Result<f64> {
    let cloud = sample_iid(density, n, seed)?;
    let evolved = simulate_nbody(kernel, &cloud, t_final, settings)?.final_state();
    Ok(mk_distance(&evolved, reference, Exponent::One)?.distance)
}

pub fn check_reference_size(sizes: &[usize], reference_n: usize) -> Result<()> {
    let largest = check_sizes(sizes)?;
    if reference_n <= largest {
        return Err(Error::InvalidInput(alloc::format!(
            "reference size {reference_n} must exceed the largest sample size {largest}"
        )));
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
pub fn meanfield_rate_experiment<K: Interaction + ?Sized>(
    kernel: &K,
    density: &DensitySpec,
    sizes: &[usize],
    t_final: f64,
    n_reps: usize,
    reference_n: usize,
    settings: &IntegratorSettings,
    master_seed: u64,
) -> Result<RateReport> {
    check_reference_size(sizes, reference_n)?;
    let reference = meanfield_reference(kernel, density, reference_n, t_final, settings, master_seed)?;
    let samples = sizes
        .iter()
        .enumerate()
        .map(|(s, &n)| {
            (0..n_reps)
                .map(|r| {
                    let seed = replicate_seed(master_seed, s, r);
                    meanfield_sample(kernel, density, n, t_final, settings, seed, &reference)
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    RateReport::from_samples(sizes, &samples)
}

/// Control cloud standing in for `p` in the sampling-rate experiment.
pub fn hk_control(density: &DensitySpec, control_n: usize, master_seed: u64) -> Result<EmpiricalMeasure> {
    sample_iid(density, control_n, reference_seed(master_seed))
}

pub fn check_control_size(sizes: &[usize], control_n: usize) -> Result<()> {
    let largest = check_sizes(sizes)?;
    if control_n < 16 * largest {
        return Err(Error::InvalidInput(alloc::format!("control size {control_n} is below 16 x {largest}")));
    }
    Ok(())
}

/// `dist_{MK,2}(mu_{Z_N}, control)^2` for one replicate.
pub fn hk_sample(density: &DensitySpec, n: usize, seed: u64, control: &EmpiricalMeasure) -> Result<f64> {
    let cloud = sample_iid(density, n, seed)?;
    Ok(mk_distance(&cloud, control, Exponent::Two)?.plan.cost)
}

pub fn hk_rate_experiment(
    density: &DensitySpec,
    sizes: &[usize],
    n_reps: usize,
    control_n: usize,
    master_seed: u64,
) -> Result<RateReport> {
    check_control_size(sizes, control_n)?;
    let control = hk_control(density, control_n, master_seed)?;
    let samples = sizes
        .iter()
        .enumerate()
        .map(|(s, &n)| {
            (0..n_reps)
                .map(|r| hk_sample(density, n, replicate_seed(master_seed, s, r), &control))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    RateReport::from_samples(sizes, &samples)
}

/// Exponent `-2/(d+4)` of the sampling-rate bound for `E dist_{MK,2}^2`.
pub fn hk_exponent(dim: usize) -> f64 {
    -2.0 / (dim as f64 + 4.0)
}

/// Standard normal CDF via the complementary error function.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / core::f64::consts::SQRT_2)
}
