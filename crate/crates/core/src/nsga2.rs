//! Bi-objective NSGA-II: dominance, fast non-dominated sorting, crowding distance,
//! crowded binary tournaments and elitist (μ + λ) replacement.
//!
//! Both objectives are maximized. The control loop and RNG are sequential; only
//! fitness evaluation fans out, so results do not depend on the thread count.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::hash::Hash;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::Nsga2Error;
use crate::execution::Execution;
use crate::genome::{self, Genome};

/// `[sharpe, signed max drawdown]`, both maximized.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ObjectiveVector(pub [f64; 2]);

impl ObjectiveVector {
    /// Non-finite components are replaced by `f64::MIN` so ordering stays total.
    pub fn new(sharpe: f64, mdd: f64) -> Self {
        let clean = |v: f64| if v.is_finite() { v } else { f64::MIN };
        Self([clean(sharpe), clean(mdd)])
    }

    pub fn sharpe(&self) -> f64 {
        self.0[0]
    }

    pub fn mdd(&self) -> f64 {
        self.0[1]
    }
}

/// `a` is at least as good everywhere and strictly better somewhere.
pub fn dominates(a: &ObjectiveVector, b: &ObjectiveVector) -> bool {
    let mut strict = false;
    for (x, y) in a.0.iter().zip(&b.0) {
        if x < y {
            return false;
        }
        strict |= x > y;
    }
    strict
}

/// Variation interface the engine needs from a genome type.
pub trait Chromosome: Clone + Send + Sync {
    /// Identity for memoization and front de-duplication.
    type Key: Clone + Eq + Hash + Ord + Send + Sync;

    fn random<R: Rng + ?Sized>(rng: &mut R) -> Self;
    fn crossover<R: Rng + ?Sized>(&self, other: &Self, rng: &mut R) -> (Self, Self);
    fn mutate<R: Rng + ?Sized>(&self, rng: &mut R, rate: f64) -> Self;
    fn key(&self) -> Self::Key;
}

impl Chromosome for Genome {
    type Key = Genome;

    fn random<R: Rng + ?Sized>(rng: &mut R) -> Self {
        genome::random_genome(rng)
    }

    fn crossover<R: Rng + ?Sized>(&self, other: &Self, rng: &mut R) -> (Self, Self) {
        genome::crossover(self, other, rng)
    }

    fn mutate<R: Rng + ?Sized>(&self, rng: &mut R, rate: f64) -> Self {
        genome::mutate(self, rng, rate)
    }

    fn key(&self) -> Genome {
        self.canonical()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Individual<G> {
    pub genome: G,
    pub objectives: ObjectiveVector,
    /// Front index; valid after [`rank_population`].
    pub rank: usize,
    /// Crowding distance within the member's front; valid after [`rank_population`].
    pub crowding: f64,
}

impl<G> Individual<G> {
    pub fn new(genome: G, objectives: ObjectiveVector) -> Self {
        Self {
            genome,
            objectives,
            rank: usize::MAX,
            crowding: 0.0,
        }
    }
}

/// Deb's fast non-dominated sort. Fronts are returned best first; indices in each
/// front are ascending.
pub fn fast_nondominated_sort(objs: &[ObjectiveVector]) -> Vec<Vec<usize>> {
    let n = objs.len();
    let mut dominated_by_me: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut domination_count = vec![0usize; n];
    for p in 0..n {
        for q in p + 1..n {
            if dominates(&objs[p], &objs[q]) {
                dominated_by_me[p].push(q);
                domination_count[q] += 1;
            } else if dominates(&objs[q], &objs[p]) {
                dominated_by_me[q].push(p);
                domination_count[p] += 1;
            }
        }
    }
    let mut fronts = Vec::new();
    let mut current: Vec<usize> = (0..n).filter(|&i| domination_count[i] == 0).collect();
    while !current.is_empty() {
        let mut next = Vec::new();
        for &p in &current {
            for &q in &dominated_by_me[p] {
                domination_count[q] -= 1;
                if domination_count[q] == 0 {
                    next.push(q);
                }
            }
        }
        next.sort_unstable();
        fronts.push(current);
        current = next;
    }
    fronts
}

/// Crowding distance for each member of `front` (same order as `front`).
///
/// Per objective, the two extremes get `+inf` and interior members add the
/// normalized gap between their neighbours. A zero-range objective adds nothing.
pub fn crowding_distance(front: &[usize], objs: &[ObjectiveVector]) -> Vec<f64> {
    let len = front.len();
    let mut dist = vec![0.0f64; len];
    if len <= 2 {
        return vec![f64::INFINITY; len];
    }
    for m in 0..2 {
        let mut order: Vec<usize> = (0..len).collect();
        order.sort_by(|&a, &b| {
            objs[front[a]].0[m]
                .total_cmp(&objs[front[b]].0[m])
                .then(front[a].cmp(&front[b]))
        });
        let lo = objs[front[order[0]]].0[m];
        let hi = objs[front[order[len - 1]]].0[m];
        dist[order[0]] = f64::INFINITY;
        dist[order[len - 1]] = f64::INFINITY;
        let range = hi - lo;
        if range <= 0.0 {
            continue;
        }
        for i in 1..len - 1 {
            let gap = objs[front[order[i + 1]]].0[m] - objs[front[order[i - 1]]].0[m];
            dist[order[i]] += gap / range;
        }
    }
    dist
}

/// Assigns rank and crowding to every member; returns the fronts.
pub fn rank_population<G>(pop: &mut [Individual<G>]) -> Vec<Vec<usize>> {
    let objs: Vec<ObjectiveVector> = pop.iter().map(|i| i.objectives).collect();
    let fronts = fast_nondominated_sort(&objs);
    for (rank, front) in fronts.iter().enumerate() {
        let dist = crowding_distance(front, &objs);
        for (&i, d) in front.iter().zip(dist) {
            pop[i].rank = rank;
            pop[i].crowding = d;
        }
    }
    fronts
}

/// `Less` when `a` is preferred: lower rank, then larger crowding distance.
pub fn crowded_compare<G>(a: &Individual<G>, b: &Individual<G>) -> Ordering {
    a.rank
        .cmp(&b.rank)
        .then_with(|| b.crowding.total_cmp(&a.crowding))
}

/// Binary tournament; ties go to the lower index.
pub fn tournament<G, R: Rng + ?Sized>(pop: &[Individual<G>], rng: &mut R) -> usize {
    let i = rng.gen_range(0..pop.len());
    let j = rng.gen_range(0..pop.len());
    match crowded_compare(&pop[i], &pop[j]) {
        Ordering::Less => i,
        Ordering::Greater => j,
        Ordering::Equal => i.min(j),
    }
}

/// `pop.len()` children from tournament-selected parent pairs.
pub fn make_offspring<G: Chromosome, R: Rng + ?Sized>(
    pop: &[Individual<G>],
    rng: &mut R,
    crossover_rate: f64,
    mutation_rate: f64,
) -> Vec<G> {
    let n = pop.len();
    let mut children = Vec::with_capacity(n + 1);
    while children.len() < n {
        let a = &pop[tournament(pop, rng)].genome;
        let b = &pop[tournament(pop, rng)].genome;
        let (c1, c2) = if rng.gen_bool(crossover_rate) {
            a.crossover(b, rng)
        } else {
            (a.clone(), b.clone())
        };
        children.push(c1.mutate(rng, mutation_rate));
        children.push(c2.mutate(rng, mutation_rate));
    }
    children.truncate(n);
    children
}

/// Elitist replacement: rank `parents ∪ offspring`, fill whole fronts, then split the
/// overflowing front by descending crowding distance. The result is re-ranked.
pub fn next_generation<G: Clone>(
    parents: &[Individual<G>],
    offspring: &[Individual<G>],
    capacity: usize,
) -> Vec<Individual<G>> {
    let mut pool: Vec<Individual<G>> = parents.iter().chain(offspring).cloned().collect();
    let fronts = rank_population(&mut pool);
    let mut chosen: Vec<usize> = Vec::with_capacity(capacity);
    for front in fronts {
        if chosen.len() + front.len() <= capacity {
            chosen.extend(front);
            continue;
        }
        let mut by_crowding = front;
        by_crowding.sort_by(|&a, &b| pool[b].crowding.total_cmp(&pool[a].crowding).then(a.cmp(&b)));
        by_crowding.truncate(capacity - chosen.len());
        chosen.extend(by_crowding);
        break;
    }
    let mut next: Vec<Individual<G>> = chosen.into_iter().map(|i| pool[i].clone()).collect();
    rank_population(&mut next);
    next
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Nsga2Params {
    pub population_size: usize,
    pub generations: usize,
    pub crossover_rate: f64,
    pub mutation_rate: f64,
    pub seed: u64,
}

impl Default for Nsga2Params {
    fn default() -> Self {
        Self {
            population_size: 30,
            generations: 5,
            crossover_rate: 0.9,
            mutation_rate: 0.1,
            seed: 42,
        }
    }
}

impl Nsga2Params {
    pub fn validate(&self) -> Result<(), Nsga2Error> {
        let rate_ok = |r: f64| (0.0..=1.0).contains(&r);
        if self.population_size < 2 {
            return Err(Nsga2Error::InvalidParams("population size must be at least 2".into()));
        }
        if self.generations < 1 {
            return Err(Nsga2Error::InvalidParams("need at least one generation".into()));
        }
        if !rate_ok(self.crossover_rate) || !rate_ok(self.mutation_rate) {
            return Err(Nsga2Error::InvalidParams("rates must lie in [0, 1]".into()));
        }
        Ok(())
    }
}

/// Best value of each objective in one generation's population.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GenerationStats {
    pub generation: usize,
    pub best_sharpe: f64,
    pub best_mdd: f64,
    pub front_size: usize,
    pub evaluations: usize,
}

/// Stepwise NSGA-II run with fitness memoization.
pub struct Nsga2<G: Chromosome, F> {
    params: Nsga2Params,
    fitness: F,
    execution: Execution,
    rng: ChaCha8Rng,
    cache: HashMap<G::Key, ObjectiveVector>,
    population: Vec<Individual<G>>,
    generation: usize,
    history: Vec<GenerationStats>,
}

impl<G, F> Nsga2<G, F>
where
    G: Chromosome,
    F: Fn(&G) -> ObjectiveVector + Sync,
{
    /// Seeds the RNG and evaluates a random initial population.
    pub fn new(params: Nsga2Params, fitness: F, execution: Execution) -> Result<Self, Nsga2Error> {
        params.validate()?;
        let mut engine = Self {
            params,
            fitness,
            execution,
            rng: ChaCha8Rng::seed_from_u64(params.seed),
            cache: HashMap::new(),
            population: Vec::new(),
            generation: 0,
            history: Vec::new(),
        };
        let initial: Vec<G> = (0..params.population_size)
            .map(|_| G::random(&mut engine.rng))
            .collect();
        let mut pop = engine.evaluate(initial);
        rank_population(&mut pop);
        engine.population = pop;
        engine.record();
        Ok(engine)
    }

    fn evaluate(&mut self, genomes: Vec<G>) -> Vec<Individual<G>> {
        let mut pending: Vec<(G::Key, G)> = Vec::new();
        for g in &genomes {
            let key = g.key();
            if !self.cache.contains_key(&key) && !pending.iter().any(|(k, _)| *k == key) {
                pending.push((key, g.clone()));
            }
        }
        let fitness = &self.fitness;
        let scores = self.execution.map(&pending, |(_, g)| {
            let o = fitness(g);
            ObjectiveVector::new(o.sharpe(), o.mdd())
        });
        for ((key, _), score) in pending.into_iter().zip(scores) {
            self.cache.insert(key, score);
        }
        genomes
            .into_iter()
            .map(|g| {
                let o = self.cache[&g.key()];
                Individual::new(g, o)
            })
            .collect()
    }

    fn record(&mut self) {
        let best = |m: usize| {
            self.population
                .iter()
                .map(|i| i.objectives.0[m])
                .fold(f64::NEG_INFINITY, f64::max)
        };
        let stats = GenerationStats {
            generation: self.generation,
            best_sharpe: best(0),
            best_mdd: best(1),
            front_size: self.population.iter().filter(|i| i.rank == 0).count(),
            evaluations: self.cache.len(),
        };
        self.history.push(stats);
    }

    /// One generation: offspring, evaluation, elitist replacement.
    pub fn step(&mut self) {
        let offspring = make_offspring(
            &self.population,
            &mut self.rng,
            self.params.crossover_rate,
            self.params.mutation_rate,
        );
        let offspring = self.evaluate(offspring);
        self.population = next_generation(&self.population, &offspring, self.params.population_size);
        self.generation += 1;
        self.record();
    }

    pub fn population(&self) -> &[Individual<G>] {
        &self.population
    }

    pub fn history(&self) -> &[GenerationStats] {
        &self.history
    }

    pub fn generation(&self) -> usize {
        self.generation
    }

    /// Rank-0 members, one per key, ordered by ascending Sharpe.
    pub fn pareto_front(&self) -> Vec<Individual<G>> {
        let mut seen = std::collections::HashSet::new();
        let mut front: Vec<Individual<G>> = self
            .population
            .iter()
            .filter(|i| i.rank == 0)
            .filter(|i| seen.insert(i.genome.key()))
            .cloned()
            .collect();
        front.sort_by(|a, b| {
            a.objectives.0[0]
                .total_cmp(&b.objectives.0[0])
                .then(b.objectives.0[1].total_cmp(&a.objectives.0[1]))
                .then_with(|| a.genome.key().cmp(&b.genome.key()))
        });
        front
    }
}

/// Result of [`evolve`].
#[derive(Debug, Clone)]
pub struct EvolveOutcome<G> {
    pub front: Vec<Individual<G>>,
    pub population: Vec<Individual<G>>,
    pub history: Vec<GenerationStats>,
}

/// Runs exactly `params.generations` generations and returns the final front.
pub fn evolve<G, F>(
    fitness: F,
    params: Nsga2Params,
    execution: Execution,
) -> Result<EvolveOutcome<G>, Nsga2Error>
where
    G: Chromosome,
    F: Fn(&G) -> ObjectiveVector + Sync,
{
    let mut engine = Nsga2::new(params, fitness, execution)?;
    for _ in 0..params.generations {
        engine.step();
    }
    Ok(EvolveOutcome {
        front: engine.pareto_front(),
        population: engine.population.clone(),
        history: engine.history.clone(),
    })
}
