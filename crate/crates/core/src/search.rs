//! Search over constrained Hamiltonians for the fastest orthogonalization.
//!
//! Hamiltonians are parametrized by coordinates in a traceless Hermitian
//! basis (the identity direction only shifts a global phase). Each candidate
//! is rescaled onto `F(-iH) = kappa` before the oracle measures `t_perp`, and
//! a Nelder-Mead simplex with restarts minimizes the result.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::config::tolerances;
use crate::error::{QslError, Result};
use crate::functional::{rescale_to_constraint, ConstraintLevel, FunctionalKind, PHFunctional};
use crate::matrix::{ComplexMatrix, StateVector};
use crate::oracle::{first_orthogonality_time_in, SurvivalProfile, DEFAULT_HORIZON_MULTIPLIER};
use crate::random::rng_for;

pub const SIMPLEX_SCALE: f64 = 0.5;
pub const REFLECTION: f64 = 1.0;
pub const EXPANSION: f64 = 2.0;
pub const CONTRACTION: f64 = 0.5;
pub const SHRINK: f64 = 0.5;
/// Not-found candidates score `PENALTY_FACTOR * horizon * (1 + min |a|)`.
pub const PENALTY_FACTOR: f64 = 10.0;

/// Generalized Gell-Mann basis of traceless Hermitian N x N matrices,
/// normalized to `Tr(B_i B_j) = 2 delta_ij`.
#[derive(Debug, Clone)]
pub struct TracelessHermitianBasis {
    dim: usize,
    elements: Vec<ComplexMatrix>,
}

impl TracelessHermitianBasis {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn elements(&self) -> &[ComplexMatrix] {
        &self.elements
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    /// `sum_k x_k B_k`.
    pub fn combine(&self, coefficients: &[f64]) -> ComplexMatrix {
        assert_eq!(coefficients.len(), self.elements.len(), "coefficient count mismatch");
        let mut out = DMatrix::<Complex64>::zeros(self.dim, self.dim);
        for (x, b) in coefficients.iter().zip(&self.elements) {
            out += b.as_inner() * Complex64::new(*x, 0.0);
        }
        ComplexMatrix::new(out).expect("finite combination")
    }

    /// Coordinates of a Hermitian matrix's traceless part, `x_k = Tr(B_k H)/2`.
    pub fn coordinates(&self, h: &ComplexMatrix) -> Vec<f64> {
        self.elements.iter().map(|b| (b * h).trace().re / 2.0).collect()
    }

    pub fn random_coefficients<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        (0..self.elements.len()).map(|_| rng.sample(StandardNormal)).collect()
    }

    /// Gaussian-coefficient traceless Hamiltonian.
    pub fn random_combination<R: Rng + ?Sized>(&self, rng: &mut R) -> ComplexMatrix {
        self.combine(&self.random_coefficients(rng))
    }
}

/// Symmetric, antisymmetric and diagonal generalized Gell-Mann matrices.
/// For N = 2 these are the Pauli matrices x, y, z.
pub fn traceless_basis(n: usize) -> Result<TracelessHermitianBasis> {
    if n < 2 {
        return Err(QslError::InvalidInput(format!("traceless basis needs N >= 2, got {n}")));
    }
    let one = Complex64::new(1.0, 0.0);
    let i = Complex64::new(0.0, 1.0);
    let mut elements = Vec::with_capacity(n * n - 1);
    for j in 0..n {
        for k in j + 1..n {
            let mut sym = DMatrix::zeros(n, n);
            sym[(j, k)] = one;
            sym[(k, j)] = one;
            elements.push(ComplexMatrix::new(sym)?);
            let mut anti = DMatrix::zeros(n, n);
            anti[(j, k)] = -i;
            anti[(k, j)] = i;
            elements.push(ComplexMatrix::new(anti)?);
        }
    }
    for l in 1..n {
        let norm = (2.0 / (l * (l + 1)) as f64).sqrt();
        let mut diag = vec![0.0; n];
        diag[..l].iter_mut().for_each(|d| *d = norm);
        diag[l] = -(l as f64) * norm;
        elements.push(ComplexMatrix::from_real_diagonal(&diag)?);
    }
    Ok(TracelessHermitianBasis { dim: n, elements })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Candidate {
    pub coefficients: Vec<f64>,
    /// The constraint-rescaled Hamiltonian; `None` if rescaling was undefined.
    pub hamiltonian: Option<ComplexMatrix>,
    /// `t_perp` when found, otherwise the penalty.
    pub objective: f64,
    pub t_perp: Option<f64>,
    pub constraint_residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceRow {
    pub evaluation: usize,
    pub restart: usize,
    pub objective: f64,
    pub constraint_residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SearchReport {
    pub best: Candidate,
    pub bound: Option<f64>,
    pub relative_gap: Option<f64>,
    pub horizon: f64,
    pub evaluations: usize,
    pub restarts: usize,
    pub zero_functional_candidates: usize,
    pub seed: u64,
    #[serde(skip)]
    pub trace: Vec<TraceRow>,
}

impl SearchReport {
    pub fn trace_csv(&self) -> String {
        let mut out = String::from("evaluation,restart,objective,constraint_residual\n");
        for row in &self.trace {
            out.push_str(&format!(
                "{},{},{:.16e},{:.16e}\n",
                row.evaluation, row.restart, row.objective, row.constraint_residual
            ));
        }
        out
    }
}

#[derive(Debug, Clone)]
pub struct SearchOptions {
    pub restarts: usize,
    pub budget_per_restart: usize,
    pub seed: u64,
    /// Search horizon; defaults to `10 x` the functional's closed-form bound.
    pub horizon: Option<f64>,
    pub record_trace: bool,
}

impl SearchOptions {
    pub fn new(restarts: usize, budget_per_restart: usize, seed: u64) -> Self {
        Self { restarts, budget_per_restart, seed, horizon: None, record_trace: false }
    }
}

/// The closed-form swap-family time for built-in functionals.
pub fn reference_bound(functional: &PHFunctional, kappa: ConstraintLevel) -> Option<f64> {
    match functional.kind() {
        FunctionalKind::CentralMoment { p, .. } => Some(PI / (kappa.value() * 2f64.powf(1.0 / p))),
        FunctionalKind::OperatorNorm => Some(PI / kappa.value()),
        FunctionalKind::Custom(_) => None,
    }
}

/// `(best t_perp - bound) / bound`, using the penalty when nothing was found.
pub fn saturation_gap(report: &SearchReport, bound: f64) -> f64 {
    (report.best.objective - bound) / bound
}

pub fn minimize_orthogonality_time(
    psi: &StateVector,
    functional: &PHFunctional,
    kappa: ConstraintLevel,
    restarts: usize,
    budget_per_restart: usize,
    seed: u64,
) -> Result<SearchReport> {
    minimize_with_options(psi, functional, kappa, &SearchOptions::new(restarts, budget_per_restart, seed))
}

pub fn minimize_with_options(
    psi: &StateVector,
    functional: &PHFunctional,
    kappa: ConstraintLevel,
    options: &SearchOptions,
) -> Result<SearchReport> {
    if options.restarts < 1 {
        return Err(QslError::InvalidInput("at least one restart is required".into()));
    }
    if options.budget_per_restart < 50 {
        return Err(QslError::InvalidInput(format!(
            "budget per restart must be at least 50, got {}",
            options.budget_per_restart
        )));
    }
    let n = psi.dim();
    let basis = traceless_basis(n)?;
    let bound = reference_bound(functional, kappa);
    let horizon = match (options.horizon, bound) {
        (Some(h), _) if h.is_finite() && h > 0.0 => h,
        (Some(h), _) => return Err(QslError::InvalidInput(format!("horizon must be positive, got {h}"))),
        (None, Some(b)) => DEFAULT_HORIZON_MULTIPLIER * b,
        (None, None) => return Err(QslError::InvalidInput("custom functionals need an explicit horizon".into())),
    };
    let objective = Objective { basis: &basis, psi, functional, kappa, horizon };

    let mut trace = Vec::new();
    let mut best: Option<(Candidate, usize)> = None;
    let mut evaluations = 0;
    let mut zero_functional_candidates = 0;
    for restart in 0..options.restarts {
        let mut rng = rng_for(options.seed, restart as u64);
        let start = basis.random_coefficients(&mut rng);
        let mut record = |c: &Candidate| {
            evaluations += 1;
            if c.hamiltonian.is_none() {
                zero_functional_candidates += 1;
            }
            if options.record_trace {
                trace.push(TraceRow {
                    evaluation: evaluations,
                    restart,
                    objective: c.objective,
                    constraint_residual: c.constraint_residual,
                });
            }
        };
        let candidate = nelder_mead(&objective, start, options.budget_per_restart, &mut record)?;
        let better = best.as_ref().is_none_or(|(b, _)| candidate.objective < b.objective);
        if better {
            best = Some((candidate, restart));
        }
    }
    let (best, _) = best.expect("restarts >= 1");
    let relative_gap = match (bound, best.t_perp) {
        (Some(b), Some(t)) => Some((t - b) / b),
        _ => None,
    };
    Ok(SearchReport {
        best,
        bound,
        relative_gap,
        horizon,
        evaluations,
        restarts: options.restarts,
        zero_functional_candidates,
        seed: options.seed,
        trace,
    })
}

struct Objective<'a> {
    basis: &'a TracelessHermitianBasis,
    psi: &'a StateVector,
    functional: &'a PHFunctional,
    kappa: ConstraintLevel,
    horizon: f64,
}

impl Objective<'_> {
    fn penalty(&self, min_modulus: f64) -> f64 {
        PENALTY_FACTOR * self.horizon * (1.0 + min_modulus)
    }

    fn evaluate(&self, coefficients: &[f64]) -> Result<Candidate> {
        let raw = self.basis.combine(coefficients);
        let rescaled = match rescale_to_constraint(&raw, self.functional, self.kappa) {
            Ok(h) => h,
            Err(QslError::ZeroFunctional { .. }) => {
                return Ok(Candidate {
                    coefficients: coefficients.to_vec(),
                    hamiltonian: None,
                    objective: self.penalty(1.0),
                    t_perp: None,
                    constraint_residual: f64::NAN,
                });
            }
            Err(e) => return Err(e),
        };
        let achieved = self.functional.evaluate_hamiltonian(&rescaled)?;
        let constraint_residual = (achieved - self.kappa.value()).abs() / self.kappa.value();
        let profile = SurvivalProfile::new(&rescaled, self.psi)?;
        let step = profile
            .default_grid_step()
            .map_or(self.horizon / 16.0, |s| s.min(self.horizon / 16.0));
        let result = first_orthogonality_time_in(&profile, self.horizon, step, tolerances().orthogonality)?;
        let objective = result.t_perp.unwrap_or_else(|| self.penalty(result.residual));
        Ok(Candidate {
            coefficients: coefficients.to_vec(),
            hamiltonian: Some(rescaled),
            objective,
            t_perp: result.t_perp,
            constraint_residual,
        })
    }
}

fn nelder_mead(
    objective: &Objective<'_>,
    start: Vec<f64>,
    budget: usize,
    record: &mut impl FnMut(&Candidate),
) -> Result<Candidate> {
    let dim = start.len();
    let mut used = 0;
    let mut eval = |x: Vec<f64>, used: &mut usize| -> Result<Candidate> {
        *used += 1;
        let c = objective.evaluate(&x)?;
        record(&c);
        Ok(c)
    };

    let mut simplex = Vec::with_capacity(dim + 1);
    simplex.push(eval(start.clone(), &mut used)?);
    for k in 0..dim {
        let mut x = start.clone();
        x[k] += SIMPLEX_SCALE;
        simplex.push(eval(x, &mut used)?);
    }

    while used < budget {
        simplex.sort_by(|a, b| a.objective.total_cmp(&b.objective));
        let best = simplex[0].objective;
        let worst = simplex[dim].objective;
        let size = simplex[1..]
            .iter()
            .map(|c| distance(&c.coefficients, &simplex[0].coefficients))
            .fold(0.0, f64::max);
        if size < 1e-13 * (1.0 + norm(&simplex[0].coefficients)) || (worst - best).abs() == 0.0 && size < 1e-9 {
            break;
        }

        let centroid: Vec<f64> = (0..dim)
            .map(|k| simplex[..dim].iter().map(|c| c.coefficients[k]).sum::<f64>() / dim as f64)
            .collect();
        let toward = |coef: f64| -> Vec<f64> {
            centroid
                .iter()
                .zip(&simplex[dim].coefficients)
                .map(|(c, w)| c + coef * (c - w))
                .collect()
        };

        let reflected = eval(toward(REFLECTION), &mut used)?;
        if reflected.objective < simplex[0].objective {
            let expanded = if used < budget { Some(eval(toward(EXPANSION), &mut used)?) } else { None };
            simplex[dim] = match expanded {
                Some(e) if e.objective < reflected.objective => e,
                _ => reflected,
            };
            continue;
        }
        if reflected.objective < simplex[dim - 1].objective {
            simplex[dim] = reflected;
            continue;
        }
        if used >= budget {
            break;
        }
        let outside = reflected.objective < simplex[dim].objective;
        let contracted = if outside {
            eval(toward(REFLECTION * CONTRACTION), &mut used)?
        } else {
            eval(toward(-CONTRACTION), &mut used)?
        };
        let threshold = if outside { reflected.objective } else { simplex[dim].objective };
        if contracted.objective < threshold {
            simplex[dim] = contracted;
            continue;
        }
        let anchor = simplex[0].coefficients.clone();
        for vertex in simplex.iter_mut().skip(1) {
            if used >= budget {
                break;
            }
            let x: Vec<f64> = anchor
                .iter()
                .zip(&vertex.coefficients)
                .map(|(a, v)| a + SHRINK * (v - a))
                .collect();
            *vertex = eval(x, &mut used)?;
        }
    }
    simplex.sort_by(|a, b| a.objective.total_cmp(&b.objective));
    Ok(simplex.swap_remove(0))
}

fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
}

fn norm(a: &[f64]) -> f64 {
    a.iter().map(|x| x * x).sum::<f64>().sqrt()
}
