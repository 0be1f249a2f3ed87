//! The constraint algorithm for autonomous linearly singular systems.
//!
//! Level 0 collects the primary constraints `⟨s^α, b⟩`. Every later level
//! asks whether the accumulated constraints can be kept tangent: with `X₀`
//! a particular solution of `A·X = b` and `Γ_μ` a basis of `Ker A`, the
//! multipliers must solve `(Γ_μ·φ_j) f^μ = −X₀·φ_j`. Combinations of rows
//! that cannot be solved are candidate constraints. Candidates that vanish
//! on every sample are dropped; if none survive the system is solved.

mod constraint;
mod project;

use std::sync::Arc;

use rand::rngs::StdRng;
use rand::SeedableRng;
use rand_distr::{Distribution, Normal};
use thiserror::Error;

pub use constraint::{
    directional, frame, frame_of, tangency_candidates, ConstraintEvaluator, EvalError, Frame,
    Provenance, Thresholds,
};
pub use project::{project_to_level, project_to_level_fixing, ProjectionError};

use crate::ad::Jet;
use crate::linalg::{dot, rank_nullspaces, Elimination, Matrix};
use crate::system::AutonomousSystem;

#[derive(Clone, Debug, PartialEq)]
pub struct EngineOptions {
    /// Constraint values at or below this count as zero.
    pub tol: f64,
    /// Relative pivot threshold for ranks and kernels.
    pub rank_tol: f64,
    /// Defaults to the state dimension plus one.
    pub max_levels: Option<usize>,
    /// Points per seed in the sample cloud (the seed itself plus perturbations).
    pub samples_per_seed: usize,
    /// Standard deviation of the Gaussian perturbations.
    pub radius: f64,
    pub rng_seed: u64,
}

impl Default for EngineOptions {
    fn default() -> Self {
        EngineOptions {
            tol: 1e-9,
            rank_tol: 1e-10,
            max_levels: None,
            samples_per_seed: 8,
            radius: 1e-2,
            rng_seed: 42,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Status {
    Solved,
    /// The zero set of the given level (0-based) has no sample points.
    Inconsistent { level: usize },
    MaxIterations,
    RankDrift,
}

#[derive(Debug, Error)]
pub enum EngineError {
    #[error("at least one seed is required")]
    NoSeeds,
    #[error("seed {index} has {found} coordinates, system has {expected}")]
    SeedDimension {
        index: usize,
        expected: usize,
        found: usize,
    },
    #[error("no sample point is inside the system's domain: {0}")]
    NoValidSamples(EvalError),
    #[error("analysis did not end in a solved state")]
    NotSolved,
    #[error("point is off the final constraint manifold (max |φ| = {residual:e})")]
    OffManifold { residual: f64 },
    #[error(transparent)]
    Eval(#[from] EvalError),
}

#[derive(Clone, Debug)]
pub struct ConstraintLevel {
    pub constraints: Vec<ConstraintEvaluator>,
    /// Sample points on the zero set of this and all earlier levels.
    pub samples: Vec<Vec<f64>>,
    /// Jacobian rank of all constraints up to this level at the first sample.
    pub effective_rank: usize,
}

/// `X = X₀ + Σ f^μ Γ_μ` at a point.
#[derive(Clone, Debug, PartialEq)]
pub struct Decomposition {
    pub x0: Vec<f64>,
    pub gammas: Vec<Vec<f64>>,
    /// Minimal-norm solution of the multiplier equations; components along
    /// undetermined directions are zero.
    pub multipliers: Vec<f64>,
    /// Number of multipliers the tangency conditions fix.
    pub determined: usize,
    pub velocity: Vec<f64>,
}

/// Velocity field on the final constraint manifold.
#[derive(Clone, Debug)]
pub struct SolutionField {
    system: Arc<dyn AutonomousSystem>,
    constraints: Vec<ConstraintEvaluator>,
    thresholds: Thresholds,
    tol: f64,
}

impl SolutionField {
    pub fn system(&self) -> &Arc<dyn AutonomousSystem> {
        &self.system
    }

    pub fn constraints(&self) -> &[ConstraintEvaluator] {
        &self.constraints
    }

    pub fn decompose(&self, x: &[f64]) -> Result<Decomposition, EvalError> {
        let xj: Vec<Jet> = x.iter().map(|&v| Jet::constant(v)).collect();
        let fr = frame(self.system.as_ref(), &xj, self.thresholds.matrix)?;
        let (t, r) = constraint::tangency_system(&self.constraints, &fr, &xj, 0)?;
        let t = t.re();
        let rhs: Vec<f64> = r.iter().map(|v| -v.value()).collect();
        let elim = Elimination::new(&t, Some(&rhs), self.thresholds.tangency)?;
        let null = elim.right_basis();
        let multipliers = elim.min_norm_solution(&null)?;
        let x0: Vec<f64> = fr.x0.iter().map(Jet::value).collect();
        let gammas: Vec<Vec<f64>> = fr
            .gammas
            .iter()
            .map(|g| g.iter().map(Jet::value).collect())
            .collect();
        let mut velocity = x0.clone();
        for (g, f) in gammas.iter().zip(&multipliers) {
            for (v, gi) in velocity.iter_mut().zip(g) {
                *v += f * gi;
            }
        }
        Ok(Decomposition {
            x0,
            determined: elim.rank(),
            gammas,
            multipliers,
            velocity,
        })
    }

    /// Velocity at `x` without checking that `x` lies on the manifold.
    pub fn velocity(&self, x: &[f64]) -> Result<Vec<f64>, EvalError> {
        Ok(self.decompose(x)?.velocity)
    }

    /// Largest `|φ(x)|` over the final constraints.
    pub fn drift(&self, x: &[f64]) -> Result<f64, EvalError> {
        self.constraints
            .iter()
            .try_fold(0.0_f64, |m, c| Ok(m.max(c.value(x)?.abs())))
    }

    /// Velocity at `x`, refusing points with constraint values above `10·tol`.
    pub fn evaluate(&self, x: &[f64]) -> Result<Vec<f64>, EngineError> {
        let residual = self.drift(x)?;
        if residual > 10.0 * self.tol {
            return Err(EngineError::OffManifold { residual });
        }
        Ok(self.velocity(x)?)
    }

    pub fn project(&self, x: &[f64]) -> Result<Vec<f64>, ProjectionError> {
        project_to_level_fixing(x, &self.constraints, self.tol, self.system.clock())
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }
}

#[derive(Clone, Debug)]
pub struct AnalysisResult {
    pub levels: Vec<ConstraintLevel>,
    pub status: Status,
    /// Samples on the last zero set reached.
    pub final_samples: Vec<Vec<f64>>,
    pub solution_field: Option<SolutionField>,
    pub gauge_dimension: usize,
    pub multiplier_count: usize,
    pub warnings: Vec<String>,
    pub state_names: Vec<String>,
    pub options: EngineOptions,
}

impl AnalysisResult {
    /// Every accepted constraint, in order of acceptance.
    pub fn constraints(&self) -> Vec<ConstraintEvaluator> {
        self.levels
            .iter()
            .flat_map(|l| l.constraints.iter().cloned())
            .collect()
    }
}

/// `⟨s^α(x), b(x)⟩` for every left-kernel vector of `A(x)`.
pub fn primary_constraint_values(
    sys: &dyn AutonomousSystem,
    point: &[f64],
    rank_tol: f64,
) -> Result<Vec<f64>, EvalError> {
    let (a, b) = sys.evaluate_real(point)?;
    let ns = rank_nullspaces(&a, rank_tol)?;
    Ok(ns.left_basis.iter().map(|s| dot(s, &b)).collect())
}

/// `X₀(x) + Σ f^μ Γ_μ(x)` for a solved analysis.
pub fn evaluate_solution_field(
    result: &AnalysisResult,
    point: &[f64],
) -> Result<Vec<f64>, EngineError> {
    result
        .solution_field
        .as_ref()
        .ok_or(EngineError::NotSolved)?
        .evaluate(point)
}

/// Seeds plus Gaussian perturbations around each.
pub fn sample_cloud(seeds: &[Vec<f64>], opts: &EngineOptions) -> Vec<Vec<f64>> {
    let mut rng = StdRng::seed_from_u64(opts.rng_seed);
    let normal = Normal::new(0.0, opts.radius).expect("radius is finite and non-negative");
    let mut out = Vec::with_capacity(seeds.len() * opts.samples_per_seed.max(1));
    for seed in seeds {
        out.push(seed.clone());
        for _ in 1..opts.samples_per_seed {
            out.push(seed.iter().map(|v| v + normal.sample(&mut rng)).collect());
        }
    }
    out
}

fn to_jets(x: &[f64]) -> Vec<Jet> {
    x.iter().map(|&v| Jet::constant(v)).collect()
}

fn jacobian_rank(constraints: &[ConstraintEvaluator], x: &[f64]) -> Result<usize, EvalError> {
    if constraints.is_empty() {
        return Ok(0);
    }
    let mut jac = Matrix::zeros(constraints.len(), x.len());
    for (i, c) in constraints.iter().enumerate() {
        for (j, g) in c.value_gradient(x)?.1.into_iter().enumerate() {
            jac.set(i, j, g);
        }
    }
    Ok(rank_nullspaces(&jac, 1e-10)?.rank)
}

struct Run {
    sys: Arc<dyn AutonomousSystem>,
    opts: EngineOptions,
    thresholds: Thresholds,
    warnings: Vec<String>,
}

enum Step {
    Candidates(Vec<ConstraintEvaluator>),
    Drift,
}

impl Run {
    /// Candidate constraints for the next level, built at the first sample.
    fn candidates(
        &mut self,
        level: usize,
        accumulated: &[ConstraintEvaluator],
        samples: &[Vec<f64>],
    ) -> Result<Step, EvalError> {
        let reference = to_jets(&samples[0]);
        let (dim, patterns) = if level == 0 {
            let (a, _) = self.sys.evaluate(&reference)?;
            let elim = Elimination::new(&a, None, self.thresholds.matrix)?;
            (elim.left_basis().len(), vec![elim.pivot_pattern().to_vec()])
        } else {
            let (values, _) = tangency_candidates(
                self.sys.as_ref(),
                accumulated,
                &reference,
                0,
                self.thresholds,
            )?;
            (values.len(), Vec::new())
        };
        // kernel dimension must agree at every sample
        for (i, s) in samples.iter().enumerate().skip(1) {
            let x = to_jets(s);
            let found = if level == 0 {
                let (a, _) = self.sys.evaluate(&x)?;
                let elim = Elimination::new(&a, None, self.thresholds.matrix)?;
                if elim.pivot_pattern() != patterns[0].as_slice() {
                    self.warnings.push(format!(
                        "level {level}: pivot pattern of A changes at sample {i} with unchanged rank"
                    ));
                }
                elim.left_basis().len()
            } else {
                tangency_candidates(self.sys.as_ref(), accumulated, &x, 0, self.thresholds)?
                    .0
                    .len()
            };
            if found != dim {
                self.warnings.push(format!(
                    "level {level}: kernel dimension {found} at sample {i}, {dim} at the reference sample"
                ));
                return Ok(Step::Drift);
            }
        }
        Ok(Step::Candidates(
            (0..dim)
                .map(|c| {
                    if level == 0 {
                        ConstraintEvaluator::primary(self.sys.clone(), self.thresholds, dim, c)
                    } else {
                        ConstraintEvaluator::tangency(
                            self.sys.clone(),
                            self.thresholds,
                            dim,
                            level,
                            accumulated.to_vec(),
                            c,
                        )
                    }
                })
                .collect(),
        ))
    }
}

/// Runs the constraint algorithm from the given seed points.
pub fn run_constraint_algorithm(
    sys: Arc<dyn AutonomousSystem>,
    seeds: &[Vec<f64>],
    opts: &EngineOptions,
) -> Result<AnalysisResult, EngineError> {
    if seeds.is_empty() {
        return Err(EngineError::NoSeeds);
    }
    let dim = sys.dim();
    if let Some((index, s)) = seeds.iter().enumerate().find(|(_, s)| s.len() != dim) {
        return Err(EngineError::SeedDimension {
            index,
            expected: dim,
            found: s.len(),
        });
    }
    let max_levels = opts.max_levels.unwrap_or(dim + 1);
    let mut run = Run {
        thresholds: Thresholds::new(opts.rank_tol),
        sys: sys.clone(),
        opts: opts.clone(),
        warnings: Vec::new(),
    };

    // keep the samples where the system can be evaluated at all
    let mut samples = Vec::new();
    let mut first_error = None;
    for s in sample_cloud(seeds, opts) {
        match sys.evaluate_real(&s) {
            Ok(_) => samples.push(s),
            Err(e) => {
                first_error.get_or_insert(EvalError::from(e));
            }
        }
    }
    if samples.is_empty() {
        return Err(EngineError::NoValidSamples(first_error.expect("cloud is non-empty")));
    }

    let mut levels: Vec<ConstraintLevel> = Vec::new();
    let mut accumulated: Vec<ConstraintEvaluator> = Vec::new();
    let finish = |run: Run, levels: Vec<ConstraintLevel>, samples: Vec<Vec<f64>>, status: Status| {
        AnalysisResult {
            levels,
            status,
            final_samples: samples,
            solution_field: None,
            gauge_dimension: 0,
            multiplier_count: 0,
            warnings: run.warnings,
            state_names: run.sys.state_names().to_vec(),
            options: run.opts,
        }
    };

    let mut level = 0;
    loop {
        let candidates = match run.candidates(level, &accumulated, &samples) {
            Ok(Step::Candidates(c)) => c,
            Ok(Step::Drift) | Err(EvalError::RankDrift { .. }) => {
                return Ok(finish(run, levels, samples, Status::RankDrift))
            }
            Err(e) => return Err(e.into()),
        };

        // classify: nonvanishing and independent, nonvanishing but dependent, or vanishing
        let mut accepted: Vec<ConstraintEvaluator> = Vec::new();
        let mut dependent: Vec<ConstraintEvaluator> = Vec::new();
        let mut rank = jacobian_rank(&accumulated, &samples[0])?;
        for cand in candidates {
            let mut nonzero = false;
            for s in &samples {
                match cand.value(s) {
                    Ok(v) if v.abs() > opts.tol => {
                        nonzero = true;
                        break;
                    }
                    Ok(_) => {}
                    Err(EvalError::RankDrift { .. }) => {
                        return Ok(finish(run, levels, samples, Status::RankDrift))
                    }
                    Err(e) => return Err(e.into()),
                }
            }
            if !nonzero {
                continue;
            }
            let mut trial = accumulated.clone();
            trial.extend(accepted.iter().cloned());
            trial.push(cand.clone());
            let new_rank = jacobian_rank(&trial, &samples[0])?;
            if new_rank > rank {
                rank = new_rank;
                accepted.push(cand);
            } else {
                dependent.push(cand);
            }
        }

        if accepted.is_empty() && dependent.is_empty() {
            let mut result = finish(run, levels, samples, Status::Solved);
            let field = SolutionField {
                system: sys.clone(),
                constraints: accumulated,
                thresholds: Thresholds::new(opts.rank_tol),
                tol: opts.tol,
            };
            let d = field.decompose(&result.final_samples[0])?;
            result.multiplier_count = d.gammas.len();
            result.gauge_dimension = d.gammas.len() - d.determined;
            result.solution_field = Some(field);
            return Ok(result);
        }
        if level >= max_levels {
            return Ok(finish(run, levels, samples, Status::MaxIterations));
        }

        // Independence was judged off the zero set; recheck on it and demote
        // candidates whose gradients become dependent there.
        let mut projected;
        loop {
            let mut trial = accumulated.clone();
            trial.extend(accepted.iter().cloned());
            projected = Vec::new();
            for s in &samples {
                let Ok(p) = project_to_level(s, &trial, opts.tol) else {
                    continue;
                };
                let violates = dependent
                    .iter()
                    .any(|c| c.value(&p).map_or(true, |v| v.abs() > opts.tol));
                if !violates {
                    projected.push(p);
                }
            }
            if projected.is_empty() {
                return Ok(finish(run, levels, Vec::new(), Status::Inconsistent { level }));
            }
            if jacobian_rank(&trial, &projected[0])? == trial.len() {
                break;
            }
            let at = &projected[0];
            let mut scored = Vec::with_capacity(accepted.len());
            for c in accepted.drain(..) {
                let norm = c.value_gradient(at)?.1.iter().map(|g| g * g).sum::<f64>();
                scored.push((norm, c));
            }
            scored.sort_by(|a, b| b.0.total_cmp(&a.0));
            let mut kept = accumulated.clone();
            let mut rank = jacobian_rank(&kept, at)?;
            for (_, c) in scored {
                kept.push(c.clone());
                let r = jacobian_rank(&kept, at)?;
                if r > rank {
                    rank = r;
                    accepted.push(c);
                } else {
                    kept.pop();
                    dependent.push(c);
                }
            }
            samples = projected;
        }
        accumulated.extend(accepted.iter().cloned());
        samples = projected;
        let effective_rank = jacobian_rank(&accumulated, &samples[0])?;
        levels.push(ConstraintLevel {
            constraints: accepted,
            samples: samples.clone(),
            effective_rank,
        });
        level += 1;
    }
}

#[cfg(test)]
mod tests;
