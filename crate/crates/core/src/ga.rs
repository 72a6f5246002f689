//! Generational genetic algorithm over binary feature masks: likelihood-based
//! initialization, two-point crossover, bit-flip mutation, binary tournament
//! selection and a hall of fame.

use std::fmt;
use std::io::Write;

use rand::Rng as _;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::fitness::FitnessReport;
use crate::seed::{self, Rng};

/// Feature mask; bit `i` set means feature `i` is selected.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Genotype {
    bits: Vec<bool>,
}

impl Genotype {
    pub fn new(bits: Vec<bool>) -> Self {
        Genotype { bits }
    }

    pub fn zeros(n: usize) -> Self {
        Genotype { bits: vec![false; n] }
    }

    pub fn ones(n: usize) -> Self {
        Genotype { bits: vec![true; n] }
    }

    pub fn from_indices(n: usize, selected: &[usize]) -> Self {
        let mut g = Genotype::zeros(n);
        for &i in selected {
            g.bits[i] = true;
        }
        g
    }

    /// Parse a `0`/`1` string such as `"110010"`.
    pub fn parse(s: &str) -> Result<Self> {
        s.chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(invalid(format!("bad gene {other:?}"))),
            })
            .collect::<Result<Vec<_>>>()
            .map(Genotype::new)
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn get(&self, i: usize) -> bool {
        self.bits[i]
    }

    pub fn count_ones(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    /// Indices of selected features, ascending.
    pub fn selected(&self) -> Vec<usize> {
        self.bits
            .iter()
            .enumerate()
            .filter(|&(_, &b)| b)
            .map(|(i, _)| i)
            .collect()
    }

    /// XOR with `mask` (one mutation draw made explicit).
    pub fn apply_mask(&self, mask: &[bool]) -> Result<Genotype> {
        if mask.len() != self.len() {
            return Err(invalid("mask length differs from genotype"));
        }
        Ok(Genotype::new(
            self.bits.iter().zip(mask).map(|(b, m)| b ^ m).collect(),
        ))
    }

    /// Set one uniformly drawn bit if no bit is set.
    pub fn repair(&mut self, rng: &mut Rng) {
        if !self.bits.is_empty() && self.count_ones() == 0 {
            let i = rng.gen_range(0..self.bits.len());
            self.bits[i] = true;
        }
    }
}

impl fmt::Display for Genotype {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.bits {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GaConfig {
    pub p_crossover: f64,
    /// Probability that an offspring undergoes mutation at all.
    pub p_mutation: f64,
    /// Per-gene flip probability once mutation is applied.
    pub per_gene_flip: f64,
    pub init_prob: f64,
    pub population: usize,
    pub generations: usize,
    pub elitism: usize,
    pub seed: u64,
}

impl Default for GaConfig {
    fn default() -> Self {
        GaConfig {
            p_crossover: 0.75,
            p_mutation: 0.15,
            per_gene_flip: 0.05,
            init_prob: 0.01,
            population: 50,
            generations: 300,
            elitism: 0,
            seed: 0,
        }
    }
}

impl GaConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, p) in [
            ("p_crossover", self.p_crossover),
            ("p_mutation", self.p_mutation),
            ("per_gene_flip", self.per_gene_flip),
            ("init_prob", self.init_prob),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return Err(invalid(format!("{name} = {p} outside [0, 1]")));
            }
        }
        if self.population == 0 {
            return Err(invalid("population must be >= 1"));
        }
        if self.elitism >= self.population {
            return Err(invalid(format!(
                "elitism ({}) must be smaller than population ({})",
                self.elitism, self.population
            )));
        }
        Ok(())
    }
}

/// Random initial population: every gene is set with probability
/// `init_prob`, and empty genotypes get one random gene.
pub fn init_population(cfg: &GaConfig, n_features: usize, rng: &mut Rng) -> Vec<Genotype> {
    (0..cfg.population)
        .map(|_| {
            let mut g = Genotype::new((0..n_features).map(|_| rng.gen_bool(cfg.init_prob)).collect());
            g.repair(rng);
            g
        })
        .collect()
}

/// Exchange the half-open segment `[lo, hi)` between two parents.
pub fn crossover_segment(a: &Genotype, b: &Genotype, lo: usize, hi: usize) -> Result<(Genotype, Genotype)> {
    if a.len() != b.len() {
        return Err(invalid(format!(
            "crossover of genotypes with lengths {} and {}",
            a.len(),
            b.len()
        )));
    }
    if lo > hi || hi > a.len() {
        return Err(invalid(format!("bad crossover segment [{lo}, {hi})")));
    }
    let mut c1 = a.clone();
    let mut c2 = b.clone();
    c1.bits[lo..hi].copy_from_slice(&b.bits[lo..hi]);
    c2.bits[lo..hi].copy_from_slice(&a.bits[lo..hi]);
    Ok((c1, c2))
}

/// Two-point crossover: two cut positions drawn uniformly from `0..=n`,
/// ordered; equal cuts leave both parents unchanged.
pub fn crossover_two_point(a: &Genotype, b: &Genotype, rng: &mut Rng) -> Result<(Genotype, Genotype)> {
    if a.len() != b.len() {
        return Err(invalid(format!(
            "crossover of genotypes with lengths {} and {}",
            a.len(),
            b.len()
        )));
    }
    if a.len() < 2 {
        return Err(invalid("crossover needs genotypes of length >= 2"));
    }
    let n = a.len();
    let p = rng.gen_range(0..=n);
    let q = rng.gen_range(0..=n);
    crossover_segment(a, b, p.min(q), p.max(q))
}

/// Flip each gene independently with probability `per_gene_flip`, then
/// repair an empty result.
pub fn mutate_bit_flip(g: &Genotype, per_gene_flip: f64, rng: &mut Rng) -> Genotype {
    let mut out = Genotype::new(
        g.bits
            .iter()
            .map(|&b| if rng.gen_bool(per_gene_flip) { !b } else { b })
            .collect(),
    );
    out.repair(rng);
    out
}

/// Indices of `count` binary-tournament winners. Draws are with
/// replacement; equal fitness is settled by a fair coin.
pub fn tournament_indices(fitness: &[f64], count: usize, rng: &mut Rng) -> Result<Vec<usize>> {
    if fitness.is_empty() {
        return Err(invalid("tournament over an empty population"));
    }
    let n = fitness.len();
    Ok((0..count)
        .map(|_| {
            let i = rng.gen_range(0..n);
            let j = rng.gen_range(0..n);
            if fitness[i] > fitness[j] {
                i
            } else if fitness[j] > fitness[i] {
                j
            } else if rng.gen_bool(0.5) {
                i
            } else {
                j
            }
        })
        .collect())
}

pub fn tournament_select(
    population: &[Genotype],
    fitness: &[f64],
    count: usize,
    rng: &mut Rng,
) -> Result<Vec<Genotype>> {
    if population.len() != fitness.len() {
        return Err(invalid("fitness not aligned with population"));
    }
    Ok(tournament_indices(fitness, count, rng)?
        .into_iter()
        .map(|i| population[i].clone())
        .collect())
}

/// Fitness function over genotypes. Must be a pure function: the engine
/// evaluates individuals of one generation concurrently.
pub trait Evaluator: Sync {
    fn evaluate(&self, genotype: &Genotype) -> Result<FitnessReport>;
}

impl<F> Evaluator for F
where
    F: Fn(&Genotype) -> Result<FitnessReport> + Sync,
{
    fn evaluate(&self, genotype: &Genotype) -> Result<FitnessReport> {
        self(genotype)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerationStats {
    pub generation: usize,
    /// Hall-of-fame fitness after this generation.
    pub best_fitness: f64,
    /// Mean fitness of the current population.
    pub mean_fitness: f64,
    pub best_accuracy: f64,
    pub best_num_features: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct EvolutionLog {
    pub rows: Vec<GenerationStats>,
}

impl EvolutionLog {
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let to_err = |e: csv::Error| Error::Data(format!("evolution log export: {e}"));
        let mut w = csv::Writer::from_writer(out);
        w.write_record([
            "generation",
            "best_fitness",
            "mean_fitness",
            "best_accuracy",
            "best_num_features",
        ])
        .map_err(to_err)?;
        for r in &self.rows {
            w.write_record([
                r.generation.to_string(),
                r.best_fitness.to_string(),
                r.mean_fitness.to_string(),
                r.best_accuracy.to_string(),
                r.best_num_features.to_string(),
            ])
            .map_err(to_err)?;
        }
        w.flush()
            .map_err(|e| Error::Data(format!("evolution log export: {e}")))
    }
}

#[derive(Debug, Clone)]
pub struct Evolution {
    pub best: Genotype,
    pub best_report: FitnessReport,
    pub log: EvolutionLog,
}

pub fn evolve(cfg: &GaConfig, n_features: usize, evaluator: &dyn Evaluator) -> Result<Evolution> {
    evolve_with_progress(cfg, n_features, evaluator, &mut |_| {})
}

/// Run the generational loop, calling `progress` once per logged generation.
///
/// Each cycle evaluates the population, updates the hall of fame, selects
/// parents by binary tournament, pairs consecutive parents for crossover and
/// mutates each child. All random decisions come from one stream seeded by
/// `cfg.seed`; only evaluation runs in parallel.
pub fn evolve_with_progress(
    cfg: &GaConfig,
    n_features: usize,
    evaluator: &dyn Evaluator,
    progress: &mut dyn FnMut(&GenerationStats),
) -> Result<Evolution> {
    cfg.validate()?;
    if n_features == 0 {
        return Err(invalid("genotypes need at least one gene"));
    }
    let mut rng = seed::rng(cfg.seed);
    let mut population = init_population(cfg, n_features, &mut rng);
    let mut hof: Option<(Genotype, FitnessReport)> = None;
    let mut log = EvolutionLog::default();
    let mut reports = evaluate_all(&population, evaluator, 0)?;

    for generation in 0..=cfg.generations {
        if generation > 0 {
            let fitness: Vec<f64> = reports.iter().map(|r| r.fitness).collect();
            population = next_generation(cfg, &population, &fitness, &mut rng)?;
            reports = evaluate_all(&population, evaluator, generation)?;
        }

        for (g, r) in population.iter().zip(&reports) {
            if hof.as_ref().is_none_or(|(_, best)| r.fitness > best.fitness) {
                hof = Some((g.clone(), r.clone()));
            }
        }
        let (best, best_report) = hof.as_ref().expect("population is non-empty");
        let stats = GenerationStats {
            generation,
            best_fitness: best_report.fitness,
            mean_fitness: reports.iter().map(|r| r.fitness).sum::<f64>() / reports.len() as f64,
            best_accuracy: best_report.effectiveness,
            best_num_features: best.count_ones(),
        };
        progress(&stats);
        log.rows.push(stats);
    }

    let (best, best_report) = hof.expect("population is non-empty");
    Ok(Evolution {
        best,
        best_report,
        log,
    })
}

fn evaluate_all(
    population: &[Genotype],
    evaluator: &dyn Evaluator,
    generation: usize,
) -> Result<Vec<FitnessReport>> {
    population
        .par_iter()
        .enumerate()
        .map(|(individual, g)| {
            evaluator.evaluate(g).map_err(|e| Error::Evaluation {
                generation,
                individual,
                source: Box::new(e),
            })
        })
        .collect()
}

/// Elites (best first, ties by lower index) followed by offspring.
fn next_generation(
    cfg: &GaConfig,
    population: &[Genotype],
    fitness: &[f64],
    rng: &mut Rng,
) -> Result<Vec<Genotype>> {
    let mut order: Vec<usize> = (0..population.len()).collect();
    order.sort_by(|&a, &b| fitness[b].total_cmp(&fitness[a]).then(a.cmp(&b)));
    let mut next: Vec<Genotype> = order[..cfg.elitism]
        .iter()
        .map(|&i| population[i].clone())
        .collect();

    let mut offspring = tournament_select(population, fitness, cfg.population - cfg.elitism, rng)?;
    for pair in offspring.chunks_exact_mut(2) {
        if rng.gen_bool(cfg.p_crossover) {
            if let [a, b] = pair {
                if a.len() >= 2 {
                    let (c1, c2) = crossover_two_point(a, b, rng)?;
                    *a = c1;
                    *b = c2;
                }
            }
        }
    }
    for child in offspring.iter_mut() {
        if rng.gen_bool(cfg.p_mutation) {
            *child = mutate_bit_flip(child, cfg.per_gene_flip, rng);
        }
        // Crossover can empty a sparse child.
        child.repair(rng);
    }
    next.extend(offspring);
    Ok(next)
}
