//! Constrained NSGA-II for two objectives.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::sort::{crowding_distance, sort_fronts};
use super::{Evaluation, OptimizerError};

/// A box-bounded two-objective minimization problem.
pub trait Problem: Sync {
    fn bounds(&self) -> &[(f64, f64)];
    fn evaluate(&self, genes: &[f64]) -> Evaluation;
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Nsga2Config {
    pub pop_size: usize,
    pub generations: usize,
    pub seed: u64,
    pub crossover_prob: f64,
    pub sbx_eta: f64,
    pub mut_eta: f64,
    /// Per-gene mutation probability; `None` means `1 / n_genes`.
    pub p_mut: Option<f64>,
}

impl Default for Nsga2Config {
    fn default() -> Self {
        Self {
            pop_size: 100,
            generations: 200,
            seed: 0,
            crossover_prob: 0.9,
            sbx_eta: 15.0,
            mut_eta: 20.0,
            p_mut: None,
        }
    }
}

impl Nsga2Config {
    pub fn validate(&self) -> Result<(), OptimizerError> {
        if self.pop_size < 4 || self.pop_size % 2 != 0 {
            return Err(OptimizerError::InvalidConfig(format!(
                "population size must be even and at least 4, got {}",
                self.pop_size
            )));
        }
        if !(0.0..=1.0).contains(&self.crossover_prob) {
            return Err(OptimizerError::InvalidConfig("crossover probability outside [0, 1]".into()));
        }
        if !(self.sbx_eta >= 0.0 && self.mut_eta >= 0.0) {
            return Err(OptimizerError::InvalidConfig("distribution indices must be non-negative".into()));
        }
        if let Some(p) = self.p_mut {
            if !(0.0..=1.0).contains(&p) {
                return Err(OptimizerError::InvalidConfig("mutation probability outside [0, 1]".into()));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Individual {
    pub genes: Vec<f64>,
    pub evaluation: Evaluation,
}

/// Progress record emitted after each generation (generation 0 is the
/// initial population). Best objectives are over feasible members only.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GenerationStats {
    pub generation: usize,
    pub best_f1: Option<f64>,
    pub best_f2: Option<f64>,
    pub feasible: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParetoFront {
    pub members: Vec<Individual>,
    pub seed: u64,
    pub generations: usize,
    pub pop_size: usize,
}

/// Feasible beats infeasible; among infeasible the lower violation wins;
/// among feasible, Pareto dominance on `(f1, f2)`.
pub fn constrained_dominates(a: &Evaluation, b: &Evaluation) -> bool {
    match (a.feasible, b.feasible) {
        (true, false) => true,
        (false, true) => false,
        (false, false) => a.violation < b.violation,
        (true, true) => {
            (a.f1 <= b.f1 && a.f2 <= b.f2) && (a.f1 < b.f1 || a.f2 < b.f2)
        }
    }
}

/// Independent random stream per `(generation, slot)`.
fn stream(seed: u64, generation: usize, slot: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((generation as u64) << 32) | slot as u64);
    rng
}

/// Bounded simulated binary crossover, applied gene-wise with probability 1/2.
fn sbx(rng: &mut ChaCha8Rng, p1: &[f64], p2: &[f64], bounds: &[(f64, f64)], eta: f64) -> (Vec<f64>, Vec<f64>) {
    let mut c1 = p1.to_vec();
    let mut c2 = p2.to_vec();
    let exponent = 1.0 / (eta + 1.0);
    for (j, &(lo, hi)) in bounds.iter().enumerate() {
        if rng.gen::<f64>() > 0.5 || (p1[j] - p2[j]).abs() <= 1e-14 || hi <= lo {
            continue;
        }
        let (y1, y2) = if p1[j] < p2[j] { (p1[j], p2[j]) } else { (p2[j], p1[j]) };
        let u: f64 = rng.gen();
        let spread = |beta: f64| {
            let alpha = 2.0 - beta.powf(-(eta + 1.0));
            if u <= 1.0 / alpha {
                (u * alpha).powf(exponent)
            } else {
                (1.0 / (2.0 - u * alpha)).powf(exponent)
            }
        };
        let beta_lo = 1.0 + 2.0 * (y1 - lo) / (y2 - y1);
        let beta_hi = 1.0 + 2.0 * (hi - y2) / (y2 - y1);
        let a = (0.5 * ((y1 + y2) - spread(beta_lo) * (y2 - y1))).clamp(lo, hi);
        let b = (0.5 * ((y1 + y2) + spread(beta_hi) * (y2 - y1))).clamp(lo, hi);
        if rng.gen::<f64>() <= 0.5 {
            c1[j] = b;
            c2[j] = a;
        } else {
            c1[j] = a;
            c2[j] = b;
        }
    }
    (c1, c2)
}

/// Bounded polynomial mutation.
fn mutate(rng: &mut ChaCha8Rng, genes: &mut [f64], bounds: &[(f64, f64)], eta: f64, p: f64) {
    let exponent = 1.0 / (eta + 1.0);
    for (y, &(lo, hi)) in genes.iter_mut().zip(bounds) {
        if rng.gen::<f64>() >= p || hi <= lo {
            continue;
        }
        let width = hi - lo;
        let (d1, d2) = ((*y - lo) / width, (hi - *y) / width);
        let u: f64 = rng.gen();
        let dq = if u < 0.5 {
            let v = 2.0 * u + (1.0 - 2.0 * u) * (1.0 - d1).powf(eta + 1.0);
            v.powf(exponent) - 1.0
        } else {
            let v = 2.0 * (1.0 - u) + 2.0 * (u - 0.5) * (1.0 - d2).powf(eta + 1.0);
            1.0 - v.powf(exponent)
        };
        *y = (*y + dq * width).clamp(lo, hi);
    }
}

struct Ranked {
    rank: Vec<usize>,
    crowding: Vec<f64>,
}

fn rank_population(pop: &[Individual]) -> (Vec<Vec<usize>>, Ranked) {
    let fronts = sort_fronts(pop.len(), |p, q| constrained_dominates(&pop[p].evaluation, &pop[q].evaluation));
    let mut rank = vec![0; pop.len()];
    let mut crowding = vec![0.0; pop.len()];
    for (r, front) in fronts.iter().enumerate() {
        let objectives: Vec<Vec<f64>> = front
            .iter()
            .map(|&i| {
                let e = &pop[i].evaluation;
                if e.feasible { vec![e.f1, e.f2] } else { vec![e.violation, e.violation] }
            })
            .collect();
        for (&i, d) in front.iter().zip(crowding_distance(&objectives)) {
            rank[i] = r;
            crowding[i] = d;
        }
    }
    (fronts, Ranked { rank, crowding })
}

fn stats(generation: usize, pop: &[Individual]) -> GenerationStats {
    let feasible: Vec<&Evaluation> = pop.iter().map(|i| &i.evaluation).filter(|e| e.feasible).collect();
    let best = |f: fn(&Evaluation) -> f64| feasible.iter().map(|e| f(e)).reduce(f64::min);
    GenerationStats { generation, best_f1: best(|e| e.f1), best_f2: best(|e| e.f2), feasible: feasible.len() }
}

fn evaluate_all<P: Problem>(problem: &P, genes: Vec<Vec<f64>>) -> Vec<Individual> {
    genes
        .into_par_iter()
        .map(|g| {
            let evaluation = problem.evaluate(&g);
            Individual { genes: g, evaluation }
        })
        .collect()
}

/// Runs NSGA-II and returns the feasible nondominated members of the final
/// population, sorted by `f1`.
pub fn nsga2<P: Problem>(
    problem: &P,
    config: &Nsga2Config,
    mut observer: impl FnMut(&GenerationStats),
) -> Result<ParetoFront, OptimizerError> {
    config.validate()?;
    let bounds = problem.bounds();
    if bounds.is_empty() || bounds.iter().any(|&(lo, hi)| !(lo <= hi && lo.is_finite() && hi.is_finite())) {
        return Err(OptimizerError::InvalidConfig("gene bounds must be finite with lo <= hi".into()));
    }
    let n = config.pop_size;
    let p_mut = config.p_mut.unwrap_or(1.0 / bounds.len() as f64);

    let initial: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            let mut rng = stream(config.seed, 0, i);
            bounds.iter().map(|&(lo, hi)| lo + rng.gen::<f64>() * (hi - lo)).collect()
        })
        .collect();
    let mut pop = evaluate_all(problem, initial);
    observer(&stats(0, &pop));
    let (_, mut ranked) = rank_population(&pop);

    for generation in 1..=config.generations {
        let children: Vec<Vec<f64>> = (0..n / 2)
            .into_par_iter()
            .flat_map_iter(|pair| {
                let mut rng = stream(config.seed, generation, pair);
                let tournament = |rng: &mut ChaCha8Rng| {
                    let (a, b) = (rng.gen_range(0..n), rng.gen_range(0..n));
                    let better = ranked.rank[a] < ranked.rank[b]
                        || (ranked.rank[a] == ranked.rank[b] && ranked.crowding[a] >= ranked.crowding[b]);
                    if better { a } else { b }
                };
                let (p1, p2) = (tournament(&mut rng), tournament(&mut rng));
                let (mut c1, mut c2) = if rng.gen::<f64>() < config.crossover_prob {
                    sbx(&mut rng, &pop[p1].genes, &pop[p2].genes, bounds, config.sbx_eta)
                } else {
                    (pop[p1].genes.clone(), pop[p2].genes.clone())
                };
                mutate(&mut rng, &mut c1, bounds, config.mut_eta, p_mut);
                mutate(&mut rng, &mut c2, bounds, config.mut_eta, p_mut);
                [c1, c2]
            })
            .collect();
        let offspring = evaluate_all(problem, children);

        let mut combined = std::mem::take(&mut pop);
        combined.extend(offspring);
        let (fronts, combined_rank) = rank_population(&combined);
        let mut selected = Vec::with_capacity(n);
        for front in fronts {
            if selected.len() + front.len() <= n {
                selected.extend(front);
            } else {
                let mut rest = front;
                rest.sort_by(|&i, &j| {
                    combined_rank.crowding[j].total_cmp(&combined_rank.crowding[i]).then(i.cmp(&j))
                });
                selected.extend(rest.into_iter().take(n - selected.len()));
            }
            if selected.len() == n {
                break;
            }
        }
        let mut slots: Vec<Option<Individual>> = combined.into_iter().map(Some).collect();
        pop = selected.into_iter().map(|i| slots[i].take().expect("selected once")).collect();
        ranked = rank_population(&pop).1;
        observer(&stats(generation, &pop));
    }

    let mut members: Vec<Individual> = pop
        .iter()
        .enumerate()
        .filter(|(i, ind)| ranked.rank[*i] == 0 && ind.evaluation.feasible)
        .map(|(_, ind)| ind.clone())
        .collect();
    if members.is_empty() {
        let mut best = pop;
        best.sort_by(|a, b| a.evaluation.violation.total_cmp(&b.evaluation.violation));
        best.truncate(5);
        return Err(OptimizerError::NoFeasibleFound { best });
    }
    members.sort_by(|a, b| a.evaluation.f1.total_cmp(&b.evaluation.f1).then(a.evaluation.f2.total_cmp(&b.evaluation.f2)));
    Ok(ParetoFront { members, seed: config.seed, generations: config.generations, pop_size: n })
}
