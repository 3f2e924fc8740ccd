//! Two-phase genetic tuning of the four RISE gains.
//!
//! A fast genetic algorithm (FGA) runs a small steady-state population for
//! `generations` rounds — binary tournament selection, arithmetic blend
//! crossover, per-gene Gaussian mutation, replace-worst-if-better — and
//! collects each generation's best into the real initial population (RIP).
//! The complete genetic algorithm (CGA) then refines the RIP with the same
//! operators but a stricter replacement test: a child enters only when it
//! beats both parents and the current worst.
//!
//! Fitness is the closed-loop tracking RMSE of a rollout against the plant or
//! an identified model, plus penalties for saturated output and for violating
//! the sufficient gain condition. Runs are deterministic: every random draw
//! comes from a stream derived from `(seed, phase, step)`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::controller::{check_gain_condition, ControllerSettings, GainConditionBounds, RiseGains};
use crate::reference::TrajectorySpec;
use crate::session::{run_closed_loop, SimSystem};
use crate::{Error, Result};

/// Cost assigned to rollouts that diverge or cannot be evaluated.
pub const INFEASIBLE_COST: f64 = 1e6;

/// Per-gain search intervals.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GainBounds {
    pub alpha1: (f64, f64),
    pub alpha2: (f64, f64),
    pub ks: (f64, f64),
    pub beta: (f64, f64),
}

impl Default for GainBounds {
    /// Envelope of the gain ranges that worked in practice, with margin.
    fn default() -> Self {
        Self {
            alpha1: (0.5, 8.0),
            alpha2: (0.5, 8.0),
            ks: (10.0, 80.0),
            beta: (1.0, 6.0),
        }
    }
}

impl GainBounds {
    pub fn validate(&self) -> Result<()> {
        for (name, (low, high)) in self.as_array() {
            if !(low.is_finite() && high.is_finite() && 0.0 < low && low < high) {
                return Err(Error::InvalidParameter(format!(
                    "gain bounds for {name} must satisfy 0 < low < high, got [{low}, {high}]"
                )));
            }
        }
        Ok(())
    }

    fn as_array(&self) -> [(&'static str, (f64, f64)); 4] {
        [
            ("alpha1", self.alpha1),
            ("alpha2", self.alpha2),
            ("ks", self.ks),
            ("beta", self.beta),
        ]
    }

    fn low_high(&self, gene: usize) -> (f64, f64) {
        match gene {
            0 => self.alpha1,
            1 => self.alpha2,
            2 => self.ks,
            _ => self.beta,
        }
    }

    pub fn clamp(&self, gains: &RiseGains) -> RiseGains {
        let mut g = gains.as_array();
        for (i, v) in g.iter_mut().enumerate() {
            let (low, high) = self.low_high(i);
            *v = v.clamp(low, high);
        }
        RiseGains::from_array(g)
    }

    pub fn contains(&self, gains: &RiseGains) -> bool {
        gains
            .as_array()
            .iter()
            .enumerate()
            .all(|(i, v)| {
                let (low, high) = self.low_high(i);
                (low..=high).contains(v)
            })
    }

    pub fn sample(&self, rng: &mut ChaCha8Rng) -> RiseGains {
        let mut g = [0.0; 4];
        for (i, v) in g.iter_mut().enumerate() {
            let (low, high) = self.low_high(i);
            *v = rng.gen_range(low..=high);
        }
        RiseGains::from_array(g)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IgaConfig {
    /// Working population size N_p.
    pub population_size: usize,
    /// Per-gene mutation probability M_r.
    pub mutation_rate: f64,
    /// Generations per phase N_g; also the RIP size.
    pub generations: usize,
    /// CGA iterations k (each runs `generations` more rounds).
    pub iterations: usize,
    pub bounds: GainBounds,
    pub seed: u64,
    /// Rollout length used by the fitness (s).
    pub fitness_horizon_s: f64,
    /// Weight on the fraction of saturated control steps (deg-equivalent).
    pub saturation_penalty: f64,
    /// Weight on gain-condition violation.
    pub condition_penalty: f64,
}

impl Default for IgaConfig {
    /// First-session preset: small population, heavy mutation, six rounds.
    fn default() -> Self {
        Self {
            population_size: 8,
            mutation_rate: 0.5,
            generations: 6,
            iterations: 1,
            bounds: GainBounds::default(),
            seed: 3,
            fitness_horizon_s: 20.0,
            saturation_penalty: 5.0,
            condition_penalty: 10.0,
        }
    }
}

impl IgaConfig {
    pub fn preset_first(seed: u64) -> Self {
        Self {
            seed,
            ..Self::default()
        }
    }

    /// Offline preset for later sessions: larger population, gentler
    /// mutation, thirty rounds.
    pub fn preset_later(seed: u64) -> Self {
        Self {
            population_size: 10,
            mutation_rate: 0.3,
            generations: 30,
            seed,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.population_size < 2 {
            return Err(Error::InvalidParameter(format!(
                "population size must be >= 2, got {}",
                self.population_size
            )));
        }
        if self.generations < 1 || self.iterations < 1 {
            return Err(Error::InvalidParameter(
                "generations and iterations must be >= 1".into(),
            ));
        }
        if !(0.0..=1.0).contains(&self.mutation_rate) {
            return Err(Error::InvalidParameter(format!(
                "mutation rate must be in [0, 1], got {}",
                self.mutation_rate
            )));
        }
        if !self.fitness_horizon_s.is_finite() || self.fitness_horizon_s <= 0.0 {
            return Err(Error::InvalidParameter(
                "fitness horizon must be > 0".into(),
            ));
        }
        if self.saturation_penalty < 0.0 || self.condition_penalty < 0.0 {
            return Err(Error::InvalidParameter("penalties must be >= 0".into()));
        }
        self.bounds.validate()
    }
}

/// A candidate gain set with its evaluated cost and condition margin.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Individual {
    pub gains: RiseGains,
    /// Lower is better; `INFEASIBLE_COST` marks a diverged rollout.
    pub cost: f64,
    pub condition_margin: f64,
}

impl Individual {
    pub fn is_feasible(&self) -> bool {
        self.condition_margin >= 0.0 && self.cost < INFEASIBLE_COST
    }

    /// Ranking key: cost first, then the gains lexicographically so ties
    /// break reproducibly.
    fn rank_key(&self) -> [f64; 5] {
        let g = self.gains.as_array();
        [self.cost, g[0], g[1], g[2], g[3]]
    }
}

fn compare(a: &Individual, b: &Individual) -> std::cmp::Ordering {
    let (ka, kb) = (a.rank_key(), b.rank_key());
    for (x, y) in ka.iter().zip(&kb) {
        match x.total_cmp(y) {
            std::cmp::Ordering::Equal => continue,
            other => return other,
        }
    }
    std::cmp::Ordering::Equal
}

/// Cost and condition margin of one evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalOutcome {
    pub cost: f64,
    pub margin: f64,
}

/// One line per fitness evaluation; the complete evaluation history of a run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    Init,
    Fga,
    Cga,
}

impl Phase {
    fn name(&self) -> &'static str {
        match self {
            Phase::Init => "init",
            Phase::Fga => "fga",
            Phase::Cga => "cga",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AuditRecord {
    pub phase: Phase,
    pub generation: usize,
    pub index: usize,
    pub gains: RiseGains,
    pub cost: f64,
    pub margin: f64,
}

#[derive(Debug, Clone, Default)]
pub struct AuditLog {
    pub records: Vec<AuditRecord>,
}

impl AuditLog {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn count_phase(&self, phase: Phase) -> usize {
        self.records.iter().filter(|r| r.phase == phase).count()
    }

    /// Line-oriented rendering, one record per line.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for r in &self.records {
            let g = r.gains.as_array();
            out.push_str(&format!(
                "phase={} generation={} index={} alpha1={} alpha2={} ks={} beta={} cost={} margin={}\n",
                r.phase.name(),
                r.generation,
                r.index,
                g[0],
                g[1],
                g[2],
                g[3],
                r.cost,
                r.margin
            ));
        }
        out
    }
}

/// Fitness callback: full evaluation outcome for a gain set.
pub type FitnessFn<'a> = dyn FnMut(&RiseGains) -> EvalOutcome + 'a;

/// Closed-loop tracking cost of a gain set on a system.
///
/// `RMSE(e1)` in degrees over `fitness_horizon_s`, plus
/// `saturation_penalty * fraction of saturated steps`, plus
/// `condition_penalty * max(0, -margin)`. A diverged or failed rollout costs
/// `INFEASIBLE_COST`.
pub fn fitness(
    gains: &RiseGains,
    system: &mut dyn SimSystem,
    spec: &TrajectorySpec,
    cfg: &IgaConfig,
    settings: &ControllerSettings,
) -> EvalOutcome {
    let margin = check_gain_condition(gains, &settings.condition_bounds).margin;
    let horizon = cfg.fitness_horizon_s.min(spec.duration_s);
    let cost = match run_closed_loop(system, gains, spec, settings, horizon) {
        Ok(run) if run.diverged_at.is_none() => {
            let sat_fraction = run.saturated_steps as f64 / run.total_steps.max(1) as f64;
            run.rmse_deg
                + cfg.saturation_penalty * sat_fraction
                + cfg.condition_penalty * (-margin).max(0.0)
        }
        _ => INFEASIBLE_COST,
    };
    EvalOutcome { cost, margin }
}

/// Splitmix-style scrambling of `(seed, phase, step)` into an RNG stream, so
/// draws do not depend on evaluation scheduling.
fn derive_rng(seed: u64, phase: u64, step: u64) -> ChaCha8Rng {
    let mut x = seed
        ^ phase.wrapping_mul(0x9E37_79B9_7F4A_7C15)
        ^ step.wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x ^= x >> 30;
    x = x.wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x ^= x >> 27;
    x = x.wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^= x >> 31;
    ChaCha8Rng::seed_from_u64(x)
}

/// Uniform random population within bounds. Each member is resampled up to
/// 100 times until the gain condition holds; after that the last draw is kept
/// and its negative margin is paid as a fitness penalty.
pub fn init_population(cfg: &IgaConfig, condition_bounds: &GainConditionBounds) -> Vec<Individual> {
    (0..cfg.population_size)
        .map(|i| {
            let mut rng = derive_rng(cfg.seed, 0, i as u64);
            let mut gains = cfg.bounds.sample(&mut rng);
            let mut condition = check_gain_condition(&gains, condition_bounds);
            for _ in 0..99 {
                if condition.satisfied {
                    break;
                }
                gains = cfg.bounds.sample(&mut rng);
                condition = check_gain_condition(&gains, condition_bounds);
            }
            Individual {
                gains,
                cost: f64::NAN, // not yet evaluated
                condition_margin: condition.margin,
            }
        })
        .collect()
}

/// Binary tournament: two uniform picks (with replacement), lower cost wins.
fn tournament(population: &[Individual], rng: &mut ChaCha8Rng) -> usize {
    let a = rng.gen_range(0..population.len());
    let b = rng.gen_range(0..population.len());
    if compare(&population[a], &population[b]) == std::cmp::Ordering::Greater {
        b
    } else {
        a
    }
}

/// Arithmetic blend of two parents followed by per-gene Gaussian mutation
/// (sigma = 10% of the bound width), clipped back into bounds.
fn breed(
    p1: &RiseGains,
    p2: &RiseGains,
    cfg: &IgaConfig,
    condition_bounds: &GainConditionBounds,
    rng: &mut ChaCha8Rng,
) -> Individual {
    let lambda: f64 = rng.gen_range(0.0..=1.0);
    let (a, b) = (p1.as_array(), p2.as_array());
    let mut genes = [0.0; 4];
    for i in 0..4 {
        genes[i] = lambda * a[i] + (1.0 - lambda) * b[i];
    }
    for (i, gene) in genes.iter_mut().enumerate() {
        if rng.gen_range(0.0..1.0) < cfg.mutation_rate {
            let (low, high) = cfg.bounds.low_high(i);
            let sigma = 0.1 * (high - low);
            let normal = Normal::new(0.0, sigma).expect("sigma > 0");
            *gene += normal.sample(rng);
        }
    }
    let gains = cfg.bounds.clamp(&RiseGains::from_array(genes));
    Individual {
        gains,
        cost: f64::NAN,
        condition_margin: check_gain_condition(&gains, condition_bounds).margin,
    }
}

fn worst_index(population: &[Individual]) -> usize {
    let mut worst = 0;
    for i in 1..population.len() {
        if compare(&population[i], &population[worst]) == std::cmp::Ordering::Greater {
            worst = i;
        }
    }
    worst
}

fn best_index(population: &[Individual]) -> usize {
    let mut best = 0;
    for i in 1..population.len() {
        if compare(&population[i], &population[best]) == std::cmp::Ordering::Less {
            best = i;
        }
    }
    best
}

/// Construction phase: evolves a fresh random population for `generations`
/// rounds and returns the real initial population — the best individual after
/// each round, `generations` entries in all.
pub fn fga_run(
    cfg: &IgaConfig,
    condition_bounds: &GainConditionBounds,
    eval: &mut FitnessFn,
    audit: &mut AuditLog,
) -> Vec<Individual> {
    let mut population = init_population(cfg, condition_bounds);
    for (i, ind) in population.iter_mut().enumerate() {
        let outcome = eval(&ind.gains);
        ind.cost = outcome.cost;
        ind.condition_margin = outcome.margin;
        audit.records.push(AuditRecord {
            phase: Phase::Init,
            generation: 0,
            index: i,
            gains: ind.gains,
            cost: ind.cost,
            margin: ind.condition_margin,
        });
    }

    let mut rip = Vec::with_capacity(cfg.generations);
    for generation in 0..cfg.generations {
        let mut rng = derive_rng(cfg.seed, 1, generation as u64);
        let p1 = tournament(&population, &mut rng);
        let p2 = tournament(&population, &mut rng);
        let mut child = breed(
            &population[p1].gains,
            &population[p2].gains,
            cfg,
            condition_bounds,
            &mut rng,
        );
        let outcome = eval(&child.gains);
        child.cost = outcome.cost;
        child.condition_margin = outcome.margin;
        audit.records.push(AuditRecord {
            phase: Phase::Fga,
            generation,
            index: 0,
            gains: child.gains,
            cost: child.cost,
            margin: child.condition_margin,
        });

        let worst = worst_index(&population);
        if compare(&child, &population[worst]) == std::cmp::Ordering::Less {
            population[worst] = child;
        }
        rip.push(population[best_index(&population)]);
    }
    rip
}

/// Refinement phase over the RIP: same operators, but a child replaces the
/// worst individual only when strictly better than both parents and the
/// worst. Returns the final population sorted best-first.
pub fn cga_run(
    rip: &[Individual],
    cfg: &IgaConfig,
    condition_bounds: &GainConditionBounds,
    eval: &mut FitnessFn,
    audit: &mut AuditLog,
) -> Vec<Individual> {
    let mut population: Vec<Individual> = rip.to_vec();
    if population.is_empty() {
        return population;
    }
    for iteration in 0..cfg.iterations {
        for g in 0..cfg.generations {
            let generation = iteration * cfg.generations + g;
            let mut rng = derive_rng(cfg.seed, 2, generation as u64);
            let p1 = tournament(&population, &mut rng);
            let p2 = tournament(&population, &mut rng);
            let mut child = breed(
                &population[p1].gains,
                &population[p2].gains,
                cfg,
                condition_bounds,
                &mut rng,
            );
            let outcome = eval(&child.gains);
            child.cost = outcome.cost;
            child.condition_margin = outcome.margin;
            audit.records.push(AuditRecord {
                phase: Phase::Cga,
                generation,
                index: 0,
                gains: child.gains,
                cost: child.cost,
                margin: child.condition_margin,
            });

            let worst = worst_index(&population);
            let beats_parents = compare(&child, &population[p1]) == std::cmp::Ordering::Less
                && compare(&child, &population[p2]) == std::cmp::Ordering::Less;
            if beats_parents && compare(&child, &population[worst]) == std::cmp::Ordering::Less {
                population[worst] = child;
            }
        }
    }
    population.sort_by(compare);
    population
}

/// Full tuning outcome: the selected gains, the whole ranked solution set for
/// manual inspection, and the per-evaluation audit trail.
#[derive(Debug, Clone)]
pub struct TuneResult {
    pub best: Individual,
    pub ranked: Vec<Individual>,
    pub audit: AuditLog,
    /// No individual satisfied the gain condition with a finite cost; `best`
    /// is then merely the cheapest.
    pub all_infeasible: bool,
}

/// End-to-end tuning: init -> FGA -> CGA. Prefers individuals satisfying the
/// gain condition; ties break toward lower cost, then lexicographic gains.
pub fn tune(
    system: &mut dyn SimSystem,
    spec: &TrajectorySpec,
    cfg: &IgaConfig,
    settings: &ControllerSettings,
) -> Result<TuneResult> {
    cfg.validate()?;
    spec.validate()?;
    settings.validate()?;

    let mut audit = AuditLog::default();
    let mut eval = |gains: &RiseGains| fitness(gains, system, spec, cfg, settings);
    let rip = fga_run(cfg, &settings.condition_bounds, &mut eval, &mut audit);
    let ranked = cga_run(&rip, cfg, &settings.condition_bounds, &mut eval, &mut audit);

    let best_feasible = ranked.iter().find(|ind| ind.is_feasible()).copied();
    let all_infeasible = best_feasible.is_none();
    let best = best_feasible.unwrap_or(ranked[0]);
    Ok(TuneResult {
        best,
        ranked,
        audit,
        all_infeasible,
    })
}
