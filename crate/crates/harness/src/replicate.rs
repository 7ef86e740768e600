//! One Monte Carlo replicate: data generation, ADC, selection and every
//! requested inference method.

use std::time::Instant;

use postadc_core::adc::run_adc;
use postadc_core::candidates::make_grid;
use postadc_core::pipeline::{randomized_pipeline, ObservedEvent};
use postadc_core::selective::Method;
use postadc_core::{CandidateSet, CollectedData, IntervalSet, Problem, SelectiveResult};
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::config::ExperimentConfig;
use crate::data::{load_real_csv, RealData};
use crate::objective::{synth_objective, ObjectiveSpec};
use crate::HarnessError;

/// SplitMix64 finalizer.
fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of replicate `replicate_id`; independent of execution order.
pub fn replicate_seed(master_seed: u64, replicate_id: u64) -> u64 {
    mix64(master_seed.wrapping_add(mix64(replicate_id)))
}

/// A validated configuration with its candidate set and response model.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub config: ExperimentConfig,
    pub candidates: CandidateSet,
    /// True means for synthetic runs.
    pub mu: Option<Vec<f64>>,
    /// Stored responses per candidate for bootstrap runs.
    pub rows: Option<Vec<Vec<f64>>>,
    pub methods: Vec<Method>,
}

impl Prepared {
    pub fn new(config: ExperimentConfig) -> Result<Self, HarnessError> {
        config.validate()?;
        let methods = config.method_list()?;
        let (candidates, mu, rows) = match &config.data_path {
            Some(path) => {
                let RealData { candidates, responses } = load_real_csv(
                    path,
                    &config.feature_columns,
                    config.response_column.as_deref().unwrap_or_default(),
                    config.max_candidates,
                    config.master_seed,
                )?;
                let total: usize = responses.iter().map(Vec::len).sum();
                if total < config.n_init + config.n_steps {
                    return Err(HarnessError::Data(format!(
                        "data set has {total} rows, fewer than the budget {}",
                        config.n_init + config.n_steps
                    )));
                }
                (candidates, None, Some(responses))
            }
            None => {
                let candidates = make_grid(config.d, config.points_per_axis())?;
                let mu = synth_objective(
                    &ObjectiveSpec {
                        family: config.family,
                        amplitude: config.a,
                    },
                    &candidates,
                )?;
                (candidates, Some(mu), None)
            }
        };
        if config.n_init + config.n_steps > candidates.len() {
            return Err(HarnessError::Config(format!(
                "budget n_init + n_steps = {} exceeds the {} candidates",
                config.n_init + config.n_steps,
                candidates.len()
            )));
        }
        let prepared = Self {
            config,
            candidates,
            mu,
            rows,
            methods,
        };
        prepared.problem().algorithm.validate(&prepared.candidates)?;
        Ok(prepared)
    }

    pub fn problem(&self) -> Problem<'_> {
        let dim = self.candidates.dim();
        Problem {
            candidates: &self.candidates,
            algorithm: self.config.algorithm_for_dim(dim),
            rule: self.config.rule_for_dim(dim),
            sigma2: self.config.sigma2,
        }
    }

    pub fn budget(&self) -> usize {
        self.config.n_init + self.config.n_steps
    }

    pub fn delta_true(&self, eta: &[f64], indices: &[usize]) -> f64 {
        match &self.mu {
            Some(mu) => eta.iter().zip(indices).map(|(e, &i)| e * mu[i]).sum(),
            None => f64::NAN,
        }
    }
}

/// Result of one method on one replicate.
#[derive(Debug, Clone, PartialEq)]
pub struct MethodRow {
    pub method: Method,
    pub p_value: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    pub reject: bool,
    /// `None` when the true effect is unknown or the method was skipped.
    pub cover: Option<bool>,
    pub delta_true: f64,
    pub z_lo: f64,
    pub z_hi: f64,
    pub skip_reason: Option<String>,
}

impl MethodRow {
    fn skipped(method: Method, reason: String) -> Self {
        Self {
            method,
            p_value: f64::NAN,
            ci_lo: f64::NAN,
            ci_hi: f64::NAN,
            reject: false,
            cover: None,
            delta_true: f64::NAN,
            z_lo: f64::NAN,
            z_hi: f64::NAN,
            skip_reason: Some(reason),
        }
    }

    fn from_result(result: &SelectiveResult, alpha: f64, delta_true: f64) -> Self {
        let (z_lo, z_hi) = match &result.z {
            Some(z) => (z.lower().unwrap_or(f64::NAN), z.upper().unwrap_or(f64::NAN)),
            None => (f64::NAN, f64::NAN),
        };
        Self {
            method: result.method,
            p_value: result.p_one_sided,
            ci_lo: result.ci.lo,
            ci_hi: result.ci.hi,
            reject: result.p_one_sided <= alpha,
            cover: (!delta_true.is_nan()).then(|| result.ci.contains(delta_true)),
            delta_true,
            z_lo,
            z_hi,
            skip_reason: None,
        }
    }

    pub fn is_skipped(&self) -> bool {
        self.skip_reason.is_some()
    }

    pub fn ci_length(&self) -> f64 {
        self.ci_hi - self.ci_lo
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReplicateRecord {
    pub config_id: usize,
    pub replicate_id: u64,
    pub rows: Vec<MethodRow>,
    /// Whether the full truncation set lies inside both ablation sets, when
    /// all three were computed.
    pub ablation_nested: Option<bool>,
    pub wall_ms: f64,
}

fn skip_reason(err: &HarnessError) -> String {
    match err {
        HarnessError::Core(postadc_core::Error::DegenerateSelection(m)) => format!("degenerate selection: {m}"),
        HarnessError::Core(postadc_core::Error::NotPositiveDefinite { step, pivot }) => {
            format!("numerical: kernel matrix not positive definite at step {step} (pivot {pivot})")
        }
        HarnessError::Core(postadc_core::Error::Numerical(m)) => format!("numerical: {m}"),
        other => other.to_string(),
    }
}

/// Responses for one ADC run: synthetic noise by step, or bootstrap rows.
struct Responder<'a> {
    prepared: &'a Prepared,
    noise: &'a [f64],
    rng: ChaCha8Rng,
    used: Vec<Vec<bool>>,
}

impl<'a> Responder<'a> {
    fn new(prepared: &'a Prepared, noise: &'a [f64], seed: u64) -> Self {
        let used = prepared
            .rows
            .as_ref()
            .map(|rows| rows.iter().map(|r| vec![false; r.len()]).collect())
            .unwrap_or_default();
        Self {
            prepared,
            noise,
            rng: ChaCha8Rng::seed_from_u64(seed),
            used,
        }
    }

    fn respond(&mut self, step: usize, candidate: usize) -> postadc_core::Result<f64> {
        if let Some(mu) = &self.prepared.mu {
            return Ok(mu[candidate] + self.noise[step]);
        }
        let rows = &self.prepared.rows.as_ref().expect("bootstrap rows")[candidate];
        let used = &mut self.used[candidate];
        let free: Vec<usize> = (0..rows.len()).filter(|&i| !used[i]).collect();
        let pick = if free.is_empty() {
            self.rng.random_range(0..rows.len())
        } else {
            free[self.rng.random_range(0..free.len())]
        };
        used[pick] = true;
        Ok(rows[pick])
    }
}

/// Random inputs of one replicate, all derived from its seed: the initial
/// design seed, the response stream seed, the noise and the randomization.
#[derive(Debug, Clone, PartialEq)]
pub struct ReplicateDraw {
    pub init_seed: u64,
    pub response_seed: u64,
    pub noise: Vec<f64>,
    pub omega: Vec<f64>,
}

impl ReplicateDraw {
    pub fn new(prepared: &Prepared, replicate_id: u64) -> Self {
        let cfg = &prepared.config;
        let n = prepared.budget();
        let mut rng = ChaCha8Rng::seed_from_u64(replicate_seed(cfg.master_seed, replicate_id));
        let init_seed = rng.next_u64();
        let response_seed = rng.next_u64();
        let sigma = cfg.sigma2.sqrt();
        let noise = (0..n).map(|_| sigma * rng.sample::<f64, _>(StandardNormal)).collect();
        let tau = cfg.tau2.sqrt();
        let omega = (0..n).map(|_| tau * rng.sample::<f64, _>(StandardNormal)).collect();
        Self {
            init_seed,
            response_seed,
            noise,
            omega,
        }
    }
}

/// Runs the ADC for one replicate. With `randomized`, the algorithm sees
/// `y + ω` while the returned responses hold `y`.
pub fn collect_data(
    prepared: &Prepared,
    draw: &ReplicateDraw,
    randomized: bool,
) -> Result<CollectedData, HarnessError> {
    let problem = prepared.problem();
    let (n_init, n_steps) = (prepared.config.n_init, prepared.config.n_steps);
    let mut responder = Responder::new(prepared, &draw.noise, draw.response_seed);
    if !randomized {
        let mut source = |step: usize, cand: usize| responder.respond(step, cand);
        return Ok(run_adc(
            &problem.algorithm,
            &prepared.candidates,
            &mut source,
            n_init,
            n_steps,
            draw.init_seed,
        )?);
    }
    let omega = &draw.omega;
    let mut clean = Vec::with_capacity(omega.len());
    let mut source = |step: usize, cand: usize| {
        let y = responder.respond(step, cand)?;
        clean.push(y);
        Ok(y + omega[step])
    };
    let noisy = run_adc(
        &problem.algorithm,
        &prepared.candidates,
        &mut source,
        n_init,
        n_steps,
        draw.init_seed,
    )?;
    Ok(CollectedData {
        n_init: noisy.n_init,
        indices: noisy.indices,
        responses: clean,
    })
}

fn infer_standard(
    prepared: &Prepared,
    event: &ObservedEvent<f64>,
    method: Method,
) -> Result<SelectiveResult, HarnessError> {
    Ok(prepared.problem().infer(event, method, prepared.config.ci_alpha)?)
}

/// Runs replicate `replicate_id`. Failures never abort the sweep: a failed
/// selection skips every method, a failed method skips its own row.
pub fn run_replicate(prepared: &Prepared, config_id: usize, replicate_id: u64) -> ReplicateRecord {
    let start = prepared.config.timing.then(Instant::now);
    let cfg = &prepared.config;
    let draw = ReplicateDraw::new(prepared, replicate_id);

    let mut rows = Vec::with_capacity(prepared.methods.len());
    let mut sets: Vec<(Method, IntervalSet)> = Vec::new();
    let standard: Vec<Method> = prepared
        .methods
        .iter()
        .copied()
        .filter(|&m| m != Method::Randomized)
        .collect();
    if !standard.is_empty() {
        let observed = collect_data(prepared, &draw, false).and_then(|data| Ok(prepared.problem().observe(data)?));
        match observed {
            Ok(event) => {
                let delta = prepared.delta_true(&event.target.eta, &event.data.indices);
                for &method in &standard {
                    match infer_standard(prepared, &event, method) {
                        Ok(result) => {
                            if let Some(z) = &result.z {
                                sets.push((method, z.clone()));
                            }
                            rows.push(MethodRow::from_result(&result, cfg.alpha, delta));
                        }
                        Err(e) => rows.push(MethodRow::skipped(method, skip_reason(&e))),
                    }
                }
            }
            Err(e) => {
                let reason = skip_reason(&e);
                rows.extend(standard.iter().map(|&m| MethodRow::skipped(m, reason.clone())));
            }
        }
    }
    if prepared.methods.contains(&Method::Randomized) {
        let outcome = collect_data(prepared, &draw, true).and_then(|data| {
            let out = randomized_pipeline(&prepared.problem(), &data, &draw.omega, cfg.tau2, cfg.ci_alpha)?;
            Ok((data, out))
        });
        rows.push(match outcome {
            Ok((data, out)) => {
                let delta = prepared.delta_true(&out.target.eta, &data.indices);
                MethodRow::from_result(&out.result, cfg.alpha, delta)
            }
            Err(e) => MethodRow::skipped(Method::Randomized, skip_reason(&e)),
        });
        let position = prepared
            .methods
            .iter()
            .position(|&m| m == Method::Randomized)
            .unwrap_or(0);
        let row = rows.pop().expect("randomized row");
        rows.insert(position.min(rows.len()), row);
    }

    let find = |m: Method| sets.iter().find(|(k, _)| *k == m).map(|(_, z)| z);
    let ablation_nested = match (
        find(Method::PostAdc),
        find(Method::WithoutEta),
        find(Method::WithoutTrajectory),
    ) {
        (Some(full), Some(wo_eta), Some(wo_t)) => Some(full.is_subset_of(wo_eta) && full.is_subset_of(wo_t)),
        _ => None,
    };
    ReplicateRecord {
        config_id,
        replicate_id,
        rows,
        ablation_nested,
        wall_ms: start.map_or(0.0, |s| s.elapsed().as_secs_f64() * 1e3),
    }
}

/// Bootstrap replicate on real data; identical to [`run_replicate`] with
/// responses read from stored rows and no true effect.
pub fn bootstrap_replicate(
    prepared: &Prepared,
    config_id: usize,
    replicate_id: u64,
) -> Result<ReplicateRecord, HarnessError> {
    if prepared.rows.is_none() {
        return Err(HarnessError::Config("bootstrap replicates need a data_path".into()));
    }
    Ok(run_replicate(prepared, config_id, replicate_id))
}
