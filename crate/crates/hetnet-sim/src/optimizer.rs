//! UABS placement and ICIC parameter optimization: a genetic algorithm
//! over joint position-and-parameter chromosomes, and an exhaustive grid
//! search over the coordination parameters for fixed placements.

use std::time::Instant;

use rand::Rng;
use rayon::prelude::*;

use crate::association::{
    ClassTotals, EvalOutcome, IcicConfig, IcicMode, NetworkEvaluator, RHO_DB_RANGE,
    RHO_PRIME_DB_RANGE, TAU_DB_RANGE,
};
use crate::deployment::{NetworkLayout, Region, UabsPosition};
use crate::radio::{BaseScene, PowerModel};
use crate::seed::stream;
use crate::{Error, Result};

/// Stream tags for the optimizer's derived RNG streams.
const STREAM_INIT: u64 = 0;
const STREAM_BREED: u64 = 1;

/// Candidate solution: UABS coordinates followed by the four
/// coordination parameters, `[x1, y1, .., xn, yn, tau_db, alpha,
/// rho_db, rho_prime_db]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Chromosome {
    pub genes: Vec<f64>,
    pub fitness: Option<f64>,
}

impl Chromosome {
    pub fn new(genes: Vec<f64>) -> Result<Self> {
        if genes.len() < 6 || !genes.len().is_multiple_of(2) {
            return Err(Error::InvalidParameter(format!(
                "chromosome needs 2n + 4 genes for n >= 1 UABSs, got {}",
                genes.len()
            )));
        }
        Ok(Chromosome {
            genes,
            fitness: None,
        })
    }

    pub fn n_uabs(&self) -> usize {
        (self.genes.len() - 4) / 2
    }

    fn known_fitness(&self) -> f64 {
        self.fitness.expect("population member must be evaluated")
    }
}

/// Per-gene inclusive bounds. Coordinate genes span the region; the
/// `alpha` gene collapses to a point under modes that fix it.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneBounds {
    lo: Vec<f64>,
    hi: Vec<f64>,
}

impl GeneBounds {
    pub fn new(n_uabs: usize, region: Region, mode: IcicMode) -> Result<Self> {
        if n_uabs == 0 {
            return Err(Error::InvalidParameter(
                "optimization needs at least one UABS".into(),
            ));
        }
        let mut lo = Vec::with_capacity(2 * n_uabs + 4);
        let mut hi = Vec::with_capacity(2 * n_uabs + 4);
        for _ in 0..n_uabs {
            lo.push(0.0);
            hi.push(region.width);
            lo.push(0.0);
            hi.push(region.height);
        }
        let alpha_range = match mode {
            IcicMode::NoIcic => (1.0, 1.0),
            IcicMode::Eicic => (0.0, 0.0),
            IcicMode::Feicic => (0.0, 1.0),
        };
        for (a, b) in [TAU_DB_RANGE, alpha_range, RHO_DB_RANGE, RHO_PRIME_DB_RANGE] {
            lo.push(a);
            hi.push(b);
        }
        Ok(GeneBounds { lo, hi })
    }

    pub fn len(&self) -> usize {
        self.lo.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lo.is_empty()
    }

    /// Clamps every gene into its bounds.
    pub fn clamp(&self, c: &Chromosome) -> Chromosome {
        assert_eq!(c.genes.len(), self.len(), "chromosome length mismatch");
        let genes = c
            .genes
            .iter()
            .zip(self.lo.iter().zip(&self.hi))
            .map(|(&g, (&lo, &hi))| g.clamp(lo, hi))
            .collect();
        Chromosome {
            genes,
            fitness: None,
        }
    }

    /// Draws a uniform random chromosome.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Chromosome {
        let genes = self
            .lo
            .iter()
            .zip(&self.hi)
            .map(|(&lo, &hi)| rng.random_range(lo..=hi))
            .collect();
        Chromosome {
            genes,
            fitness: None,
        }
    }
}

/// Genetic algorithm settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaSettings {
    pub population_size: usize,
    pub generations: usize,
    pub crossover_prob: f64,
    pub mutation_prob: f64,
    /// Top individuals copied unchanged into the next generation.
    pub elitism: usize,
}

impl Default for GaSettings {
    fn default() -> Self {
        GaSettings {
            population_size: 60,
            generations: 100,
            crossover_prob: 0.7,
            mutation_prob: 0.1,
            elitism: 1,
        }
    }
}

impl GaSettings {
    pub fn validate(&self) -> Result<()> {
        if self.population_size < 2 {
            return Err(Error::InvalidParameter(format!(
                "population size must be at least 2, got {}",
                self.population_size
            )));
        }
        if self.elitism >= self.population_size {
            return Err(Error::InvalidParameter(format!(
                "elitism {} must be smaller than the population {}",
                self.elitism, self.population_size
            )));
        }
        for (name, p) in [
            ("crossover probability", self.crossover_prob),
            ("mutation probability", self.mutation_prob),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::InvalidParameter(format!(
                    "{name} must lie in [0, 1], got {p}"
                )));
            }
        }
        Ok(())
    }
}

/// Fitness-proportional selection. Requires evaluated, non-negative
/// fitness; a population whose fitness sums to zero is sampled
/// uniformly.
pub fn roulette_select<'a, R: Rng + ?Sized>(
    population: &'a [Chromosome],
    rng: &mut R,
) -> &'a Chromosome {
    assert!(!population.is_empty(), "empty population");
    let total: f64 = population
        .iter()
        .map(|c| {
            let f = c.known_fitness();
            assert!(f >= 0.0, "roulette selection needs non-negative fitness");
            f
        })
        .sum();
    if total == 0.0 {
        return &population[rng.random_range(0..population.len())];
    }
    let target = rng.random::<f64>() * total;
    let mut acc = 0.0;
    for c in population {
        acc += c.known_fitness();
        if target < acc {
            return c;
        }
    }
    // Float accumulation can land a hair past the last bucket.
    population.last().unwrap()
}

/// Single-point crossover: with probability `prob` the child takes a
/// prefix of one parent and the suffix of the other, otherwise it is a
/// copy of the first parent. The child is always unevaluated.
pub fn crossover<R: Rng + ?Sized>(
    p1: &Chromosome,
    p2: &Chromosome,
    prob: f64,
    rng: &mut R,
) -> Chromosome {
    assert_eq!(p1.genes.len(), p2.genes.len(), "parent length mismatch");
    let genes = if rng.random::<f64>() < prob {
        let cut = rng.random_range(1..p1.genes.len());
        let mut genes = p1.genes[..cut].to_vec();
        genes.extend_from_slice(&p2.genes[cut..]);
        genes
    } else {
        p1.genes.clone()
    };
    Chromosome {
        genes,
        fitness: None,
    }
}

/// Resamples each gene uniformly within its bounds with probability
/// `prob`, independently per gene.
pub fn mutate<R: Rng + ?Sized>(
    c: &mut Chromosome,
    bounds: &GeneBounds,
    prob: f64,
    rng: &mut R,
) {
    assert_eq!(c.genes.len(), bounds.len(), "chromosome length mismatch");
    for (g, (&lo, &hi)) in c.genes.iter_mut().zip(bounds.lo.iter().zip(&bounds.hi)) {
        if rng.random::<f64>() < prob {
            *g = rng.random_range(lo..=hi);
        }
    }
    c.fitness = None;
}

/// Fixed problem context for fitness evaluation: macro layer, UE drop,
/// altitude, and coordination flavor.
#[derive(Debug, Clone)]
pub struct FitnessEnv {
    scene: BaseScene,
    bounds: GeneBounds,
    mode: IcicMode,
    beta: f64,
    altitude: f64,
    n_uabs: usize,
}

impl FitnessEnv {
    /// The base layout's own UABS list is ignored; candidate placements
    /// come from chromosomes.
    pub fn new(
        base_layout: &NetworkLayout,
        n_uabs: usize,
        altitude: f64,
        pm: &PowerModel,
        mode: IcicMode,
        beta: f64,
    ) -> Result<Self> {
        if !(altitude > 0.0 && altitude.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "UABS altitude must be positive and finite, got {altitude}"
            )));
        }
        let bounds = GeneBounds::new(n_uabs, base_layout.region, mode)?;
        Ok(FitnessEnv {
            scene: BaseScene::new(base_layout, pm)?,
            bounds,
            mode,
            beta,
            altitude,
            n_uabs,
        })
    }

    pub fn bounds(&self) -> &GeneBounds {
        &self.bounds
    }

    pub fn n_uabs(&self) -> usize {
        self.n_uabs
    }

    /// UABS positions encoded by a chromosome's coordinate genes.
    pub fn uabs_of(&self, c: &Chromosome) -> Vec<UabsPosition> {
        (0..self.n_uabs)
            .map(|i| UabsPosition {
                x: c.genes[2 * i],
                y: c.genes[2 * i + 1],
                altitude: self.altitude,
            })
            .collect()
    }

    /// Coordination configuration encoded by a chromosome's tail genes.
    pub fn icic_of(&self, c: &Chromosome) -> Result<IcicConfig> {
        let t = &c.genes[2 * self.n_uabs..];
        IcicConfig::new(self.mode, t[1], self.beta, t[0], t[2], t[3])
    }

    /// Clamps the chromosome into bounds and scores it.
    pub fn evaluate(&self, c: &Chromosome) -> Result<EvalOutcome> {
        let clamped = self.bounds.clamp(c);
        let uabs = self.uabs_of(&clamped);
        let icic = self.icic_of(&clamped)?;
        NetworkEvaluator::from_scene(&self.scene, &uabs)?.evaluate(&icic)
    }

    /// Fitness is the 5th-percentile spectral efficiency.
    pub fn fitness(&self, c: &Chromosome) -> Result<f64> {
        Ok(self.evaluate(c)?.se_5pct)
    }
}

/// Result of one genetic-algorithm run.
#[derive(Debug, Clone, PartialEq)]
pub struct GaOutcome {
    /// Best chromosome ever evaluated, clamped and with fitness set.
    pub best: Chromosome,
    pub best_fitness: f64,
    /// Best population fitness after the initial evaluation and after
    /// each generation (`generations + 1` entries).
    pub trace: Vec<f64>,
}

/// Index of the best evaluated individual; ties keep the lowest index.
fn best_index(population: &[Chromosome]) -> usize {
    let mut best = 0;
    for (i, c) in population.iter().enumerate().skip(1) {
        if c.known_fitness() > population[best].known_fitness() {
            best = i;
        }
    }
    best
}

/// Indices of the top `n` individuals by fitness, ties by lower index.
fn elite_indices(population: &[Chromosome], n: usize) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..population.len()).collect();
    idx.sort_by(|&a, &b| {
        population[b]
            .known_fitness()
            .total_cmp(&population[a].known_fitness())
            .then(a.cmp(&b))
    });
    idx.truncate(n);
    idx
}

/// Runs a generational genetic algorithm with elitism.
///
/// The initial population starts with `seed_individuals` (clamped into
/// bounds) and is filled up with uniform random chromosomes. Every
/// random decision is drawn from a stream derived from `seed` and the
/// (generation, individual) indices, so the result is independent of
/// thread count.
pub fn ga_optimize(
    env: &FitnessEnv,
    settings: &GaSettings,
    seed_individuals: &[Chromosome],
    seed: u64,
) -> Result<GaOutcome> {
    settings.validate()?;
    if seed_individuals.len() > settings.population_size {
        return Err(Error::InvalidParameter(format!(
            "{} seed individuals exceed the population size {}",
            seed_individuals.len(),
            settings.population_size
        )));
    }

    let evaluate_all = |pop: Vec<Chromosome>| -> Result<Vec<Chromosome>> {
        pop.into_par_iter()
            .map(|mut c| {
                if c.fitness.is_none() {
                    c.fitness = Some(env.fitness(&c)?);
                }
                Ok(c)
            })
            .collect()
    };

    let initial: Vec<Chromosome> = (0..settings.population_size)
        .map(|i| match seed_individuals.get(i) {
            Some(c) => env.bounds().clamp(c),
            None => env.bounds().sample(&mut stream(seed, &[STREAM_INIT, i as u64])),
        })
        .collect();
    let mut population = evaluate_all(initial)?;

    let mut best = population[best_index(&population)].clone();
    let mut trace = Vec::with_capacity(settings.generations + 1);
    trace.push(best.known_fitness());

    for g in 1..=settings.generations {
        let elites: Vec<Chromosome> = elite_indices(&population, settings.elitism)
            .into_iter()
            .map(|i| population[i].clone())
            .collect();
        let n_children = settings.population_size - settings.elitism;
        let children: Vec<Chromosome> = (0..n_children)
            .into_par_iter()
            .map(|i| {
                let mut rng = stream(seed, &[STREAM_BREED, g as u64, i as u64]);
                let p1 = roulette_select(&population, &mut rng);
                let p2 = roulette_select(&population, &mut rng);
                let mut child = crossover(p1, p2, settings.crossover_prob, &mut rng);
                mutate(&mut child, env.bounds(), settings.mutation_prob, &mut rng);
                child.fitness = Some(env.fitness(&child)?);
                Ok(child)
            })
            .collect::<Result<Vec<_>>>()?;

        population = elites;
        population.extend(children);

        let gen_best = &population[best_index(&population)];
        if gen_best.known_fitness() > best.known_fitness() {
            best = gen_best.clone();
        }
        trace.push(gen_best.known_fitness());
    }

    let best_fitness = best.known_fitness();
    let best = Chromosome {
        genes: env.bounds().clamp(&best).genes,
        fitness: Some(best_fitness),
    };
    Ok(GaOutcome {
        best,
        best_fitness,
        trace,
    })
}

/// Parameter grid for the exhaustive ICIC search.
#[derive(Debug, Clone, PartialEq)]
pub struct IcicGrid {
    pub tau_db: Vec<f64>,
    pub alpha: Vec<f64>,
    pub rho_db: Vec<f64>,
    pub rho_prime_db: Vec<f64>,
}

impl IcicGrid {
    /// Default grid: the alpha axis collapses under modes that fix it.
    pub fn for_mode(mode: IcicMode) -> Self {
        let alpha = match mode {
            IcicMode::NoIcic => vec![1.0],
            IcicMode::Eicic => vec![0.0],
            IcicMode::Feicic => vec![0.0, 0.25, 0.5, 0.75, 1.0],
        };
        IcicGrid {
            tau_db: vec![0.0, 3.0, 6.0, 9.0, 12.0, 15.0],
            alpha,
            rho_db: vec![20.0, 25.0, 30.0, 35.0, 40.0],
            rho_prime_db: vec![-20.0, -15.0, -10.0],
        }
    }

    pub fn with_values(
        mode: IcicMode,
        tau_db: Vec<f64>,
        alpha: Vec<f64>,
        rho_db: Vec<f64>,
        rho_prime_db: Vec<f64>,
    ) -> Result<Self> {
        let check_axis = |name: &str, axis: &[f64], (lo, hi): (f64, f64)| {
            if axis.is_empty() {
                return Err(Error::InvalidParameter(format!("empty {name} grid axis")));
            }
            match axis.iter().find(|v| !(lo..=hi).contains(*v)) {
                Some(v) => Err(Error::InvalidParameter(format!(
                    "{name} grid value {v} outside [{lo}, {hi}]"
                ))),
                None => Ok(()),
            }
        };
        check_axis("tau_db", &tau_db, TAU_DB_RANGE)?;
        check_axis("alpha", &alpha, (0.0, 1.0))?;
        check_axis("rho_db", &rho_db, RHO_DB_RANGE)?;
        check_axis("rho_prime_db", &rho_prime_db, RHO_PRIME_DB_RANGE)?;
        let alpha_ok = match mode {
            IcicMode::NoIcic => alpha == [1.0],
            IcicMode::Eicic => alpha == [0.0],
            IcicMode::Feicic => true,
        };
        if !alpha_ok {
            return Err(Error::InvalidParameter(format!(
                "alpha grid {alpha:?} conflicts with mode {mode}"
            )));
        }
        Ok(IcicGrid {
            tau_db,
            alpha,
            rho_db,
            rho_prime_db,
        })
    }

    pub fn len(&self) -> usize {
        self.tau_db.len() * self.alpha.len() * self.rho_db.len() * self.rho_prime_db.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Enumerates `(tau_db, alpha, rho_db, rho_prime_db)` with tau
    /// outermost and rho_prime innermost.
    pub fn points(&self) -> Vec<(f64, f64, f64, f64)> {
        let mut out = Vec::with_capacity(self.len());
        for &t in &self.tau_db {
            for &a in &self.alpha {
                for &r in &self.rho_db {
                    for &p in &self.rho_prime_db {
                        out.push((t, a, r, p));
                    }
                }
            }
        }
        out
    }
}

/// One evaluated grid point.
#[derive(Debug, Clone, PartialEq)]
pub struct GridPoint {
    pub tau_db: f64,
    pub alpha: f64,
    pub rho_db: f64,
    pub rho_prime_db: f64,
    pub se_5pct: f64,
    pub totals: ClassTotals,
    pub wall_ms: f64,
}

/// Exhaustive search result: the full table plus the argmax index.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSearchOutcome {
    pub points: Vec<GridPoint>,
    pub best_index: usize,
}

impl GridSearchOutcome {
    pub fn best(&self) -> &GridPoint {
        &self.points[self.best_index]
    }
}

/// Index of the maximum; ties keep the earliest entry.
fn argmax_first(values: impl Iterator<Item = f64>) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (i, v) in values.enumerate() {
        if best.is_none_or(|(_, bv)| v > bv) {
            best = Some((i, v));
        }
    }
    best.map(|(i, _)| i)
}

/// Scores every grid point against one evaluator and returns the table
/// with the best point marked. Ties resolve to the earliest point in
/// enumeration order.
pub fn grid_search_icic(
    evaluator: &NetworkEvaluator,
    grid: &IcicGrid,
    mode: IcicMode,
    beta: f64,
) -> Result<GridSearchOutcome> {
    let points: Vec<GridPoint> = grid
        .points()
        .into_par_iter()
        .map(|(tau_db, alpha, rho_db, rho_prime_db)| {
            let started = Instant::now();
            let icic = IcicConfig::new(mode, alpha, beta, tau_db, rho_db, rho_prime_db)?;
            let out = evaluator.evaluate(&icic)?;
            Ok(GridPoint {
                tau_db,
                alpha,
                rho_db,
                rho_prime_db,
                se_5pct: out.se_5pct,
                totals: out.counts.totals(),
                wall_ms: started.elapsed().as_secs_f64() * 1e3,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let best_index = argmax_first(points.iter().map(|p| p.se_5pct))
        .ok_or(Error::EmptyInput("parameter grid"))?;
    Ok(GridSearchOutcome { points, best_index })
}
