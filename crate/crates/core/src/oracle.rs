//! Brute-force verification by direct time evolution.
//!
//! The survival amplitude `a(t) = <psi| exp(-itH) |psi>` is a trigonometric
//! polynomial in `t`; its first zero is the orthogonality time `t_perp`.
//! Zeros are located by scanning `|a|` on a uniform grid and refining every
//! sufficiently deep local minimum with golden-section search.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Serialize, Serializer};

use crate::config::tolerances;
use crate::engine::energy_moments;
use crate::error::{QslError, Result};
use crate::functional::{rescale_to_constraint, ConstraintLevel, PHFunctional};
use crate::gates::ensure_special_unitary;
use crate::linalg::{eig_hermitian, exp_antihermitian};
use crate::matrix::{ComplexMatrix, StateVector};
use crate::random::{random_state, rng_for};
use crate::search::traceless_basis;

/// Grid minima deeper than this are refined.
pub const REFINE_THRESHOLD: f64 = 0.1;
/// Grid points per `pi / (E_max - E_0)`.
pub const GRID_POINTS_PER_HALF_PERIOD: f64 = 16.0;
/// Horizon used when none is given: this many times the tightest bound.
pub const DEFAULT_HORIZON_MULTIPLIER: f64 = 10.0;

const GOLDEN: f64 = 0.618_033_988_749_894_9;

/// `<psi| exp(-itH) |psi>` by forming the propagator.
pub fn survival_amplitude(h: &ComplexMatrix, psi: &StateVector, t: f64) -> Result<Complex64> {
    psi.ensure_dim(h.dim())?;
    let u = exp_antihermitian(h, t)?;
    Ok(u.expectation(psi))
}

/// Spectral form of the survival amplitude, `a(t) = sum_k w_k e^{-i E_k t}`.
#[derive(Debug, Clone)]
pub struct SurvivalProfile {
    energies: Vec<f64>,
    weights: Vec<f64>,
}

impl SurvivalProfile {
    pub fn new(h: &ComplexMatrix, psi: &StateVector) -> Result<Self> {
        psi.ensure_dim(h.dim())?;
        let spectrum = eig_hermitian(h)?;
        let amplitudes = spectrum.eigenvectors.as_inner().adjoint() * psi.amplitudes();
        let weights = amplitudes.iter().map(|z| z.norm_sqr()).collect();
        Ok(Self { energies: spectrum.eigenvalues, weights })
    }

    pub fn amplitude(&self, t: f64) -> Complex64 {
        self.energies
            .iter()
            .zip(&self.weights)
            .map(|(&e, &w)| Complex64::from_polar(w, -e * t))
            .sum()
    }

    pub fn modulus(&self, t: f64) -> f64 {
        self.amplitude(t).norm()
    }

    /// `E_max - E_0`.
    pub fn spread(&self) -> f64 {
        self.energies.last().copied().unwrap_or(0.0) - self.energies.first().copied().unwrap_or(0.0)
    }

    /// Default scan step, `pi / (16 (E_max - E_0))`.
    pub fn default_grid_step(&self) -> Option<f64> {
        let spread = self.spread();
        (spread > 0.0).then(|| PI / (GRID_POINTS_PER_HALF_PERIOD * spread))
    }
}

/// Survival amplitudes sampled on an ascending time grid.
#[derive(Debug, Clone, Serialize)]
pub struct OverlapTrace {
    pub times: Vec<f64>,
    #[serde(serialize_with = "serialize_complex_list")]
    pub overlaps: Vec<Complex64>,
}

fn serialize_complex_list<S: Serializer>(values: &[Complex64], serializer: S) -> std::result::Result<S::Ok, S::Error> {
    let pairs: Vec<[f64; 2]> = values.iter().map(|z| [z.re, z.im]).collect();
    pairs.serialize(serializer)
}

pub fn overlap_trace(h: &ComplexMatrix, psi: &StateVector, times: &[f64]) -> Result<OverlapTrace> {
    if times.windows(2).any(|w| w[1] < w[0]) {
        return Err(QslError::InvalidInput("times must be ascending".into()));
    }
    let profile = SurvivalProfile::new(h, psi)?;
    Ok(OverlapTrace { times: times.to_vec(), overlaps: times.iter().map(|&t| profile.amplitude(t)).collect() })
}

/// Outcome of an orthogonality search. When `found` is false, `t_perp` is
/// `None` and `residual` is the smallest `|a(t)|` seen within the horizon.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OrthogonalityResult {
    pub found: bool,
    pub t_perp: Option<f64>,
    pub residual: f64,
    pub horizon: f64,
}

/// Earliest `t` in `(0, horizon]` with `|a(t)| < tol`.
pub fn first_orthogonality_time(
    h: &ComplexMatrix,
    psi: &StateVector,
    horizon: f64,
    grid_step: f64,
    tol: f64,
) -> Result<OrthogonalityResult> {
    let profile = SurvivalProfile::new(h, psi)?;
    first_orthogonality_time_in(&profile, horizon, grid_step, tol)
}

pub fn first_orthogonality_time_in(
    profile: &SurvivalProfile,
    horizon: f64,
    grid_step: f64,
    tol: f64,
) -> Result<OrthogonalityResult> {
    if !(horizon.is_finite() && horizon > 0.0) {
        return Err(QslError::InvalidInput(format!("horizon must be positive and finite, got {horizon}")));
    }
    if !(grid_step > 0.0 && grid_step <= horizon / 16.0) {
        return Err(QslError::InvalidInput(format!(
            "grid step {grid_step} must be positive and at most horizon/16 = {}",
            horizon / 16.0
        )));
    }
    let steps = (horizon / grid_step).ceil() as usize;
    let time_at = |j: usize| if j == steps { horizon } else { j as f64 * grid_step };
    let moduli: Vec<f64> = (0..=steps).map(|j| profile.modulus(time_at(j))).collect();

    let mut smallest = f64::INFINITY;
    for j in 1..=steps {
        let m = moduli[j];
        smallest = smallest.min(m);
        let left_ok = m <= moduli[j - 1];
        let right_ok = j == steps || m <= moduli[j + 1];
        if !(left_ok && right_ok) || m >= REFINE_THRESHOLD {
            continue;
        }
        let lo = time_at(j - 1);
        let hi = time_at((j + 1).min(steps));
        let (t, residual) = golden_section(|t| profile.modulus(t), lo, hi, 1e-12 * horizon);
        smallest = smallest.min(residual);
        if residual < tol && t > 0.0 {
            return Ok(OrthogonalityResult { found: true, t_perp: Some(t), residual, horizon });
        }
    }
    Ok(OrthogonalityResult { found: false, t_perp: None, residual: smallest, horizon })
}

/// Minimizes a unimodal `f` on `[lo, hi]` down to bracket `width`.
fn golden_section(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, width: f64) -> (f64, f64) {
    let mut x1 = hi - GOLDEN * (hi - lo);
    let mut x2 = lo + GOLDEN * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    while hi - lo > width {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - GOLDEN * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + GOLDEN * (hi - lo);
            f2 = f(x2);
        }
    }
    if f1 <= f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ReachCheck {
    pub reached: bool,
    /// `max |exp(-iTH) - gate|` over entries.
    pub residual: f64,
    /// `min_phi max |e^{i phi} exp(-iTH) - gate|`.
    pub phase_insensitive_residual: f64,
}

/// Does `exp(-iTH)` equal `gate` to within `tol` (max entry)?
pub fn gate_reach_check(h: &ComplexMatrix, gate: &ComplexMatrix, t: f64, tol: f64) -> Result<ReachCheck> {
    ensure_special_unitary(gate)?;
    h.ensure_dim(gate.dim())?;
    let u = exp_antihermitian(h, t)?;
    let residual = u.max_abs_diff(gate);
    let phase_residual = |phi: f64| u.scale(Complex64::from_polar(1.0, phi)).max_abs_diff(gate);
    let scan = 720;
    let (best_k, _) = (0..scan)
        .map(|k| (k, phase_residual(2.0 * PI * k as f64 / scan as f64)))
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .expect("non-empty scan");
    let centre = 2.0 * PI * best_k as f64 / scan as f64;
    let delta = 2.0 * PI / scan as f64;
    let (_, refined) = golden_section(phase_residual, centre - delta, centre + delta, 1e-13);
    Ok(ReachCheck { reached: residual < tol, residual, phase_insensitive_residual: refined.min(residual) })
}

/// Which inequality an ensemble checks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BoundFamily {
    /// `pi / (2 (E_mean - E_0))`, constraint `G_1 = kappa`.
    Ml,
    /// `pi / (2 Delta E)`, constraint `Delta E = kappa`.
    Te,
    /// `pi / (E_max - E_0)`, constraint `G_op = kappa`.
    Opnorm,
    /// `pi / (kappa 2^{1/p})`, constraint `G_p = kappa`.
    Gp(f64),
}

impl fmt::Display for BoundFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BoundFamily::Ml => f.write_str("ml"),
            BoundFamily::Te => f.write_str("te"),
            BoundFamily::Opnorm => f.write_str("opnorm"),
            BoundFamily::Gp(p) => write!(f, "gp:{p}"),
        }
    }
}

impl FromStr for BoundFamily {
    type Err = QslError;

    /// `ml`, `te`, `opnorm` or `gp:<p>`.
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ml" => Ok(Self::Ml),
            "te" => Ok(Self::Te),
            "opnorm" => Ok(Self::Opnorm),
            other => {
                let p = other
                    .strip_prefix("gp:")
                    .and_then(|p| p.parse::<f64>().ok())
                    .ok_or_else(|| QslError::InvalidInput(format!("unknown bound kind `{other}`")))?;
                if !(p.is_finite() && p > 0.0) {
                    return Err(QslError::InvalidInput(format!("p must be positive, got {p}")));
                }
                Ok(Self::Gp(p))
            }
        }
    }
}

impl Serialize for BoundFamily {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EnsembleConfig {
    pub bound: BoundFamily,
    pub kappa: f64,
    pub dim: usize,
    pub samples: usize,
    pub seed: u64,
    pub horizon_multiplier: f64,
}

impl EnsembleConfig {
    pub fn digest(&self) -> String {
        use sha2::{Digest, Sha256};
        let text = serde_json::to_string(self).expect("config serializes");
        let bytes = Sha256::digest(text.as_bytes());
        bytes.iter().take(8).map(|b| format!("{b:02x}")).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnsembleSample {
    pub index: usize,
    pub bound: Option<f64>,
    pub t_perp: Option<f64>,
    pub ratio: Option<f64>,
    pub found: bool,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnsembleReport {
    pub config: EnsembleConfig,
    pub config_digest: String,
    pub samples: usize,
    pub found: usize,
    pub violations: usize,
    pub errors: usize,
    /// Minimum of `t_perp / bound` over samples that orthogonalized.
    pub min_ratio: Option<f64>,
    pub seed: u64,
    #[serde(skip)]
    pub rows: Vec<EnsembleSample>,
}

impl EnsembleReport {
    /// One row per sample: `index,bound,t_perp,ratio,found` (NaN when absent).
    pub fn to_csv(&self) -> String {
        let num = |v: Option<f64>| v.map_or_else(|| "NaN".to_string(), |x| format!("{x:.16e}"));
        let mut out = String::from("index,bound,t_perp,ratio,found\n");
        for row in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                row.index,
                num(row.bound),
                num(row.t_perp),
                num(row.ratio),
                row.found
            ));
        }
        out
    }
}

/// Draws random `(H, psi)` pairs, rescales `H` onto the bound's constraint
/// surface, and compares the oracle's `t_perp` with the bound.
///
/// `H` is a Gaussian combination of the traceless Hermitian basis and `psi`
/// is Haar-random; sample `k` uses the stream `(seed, k)`. Samples that do
/// not orthogonalize within `horizon_multiplier x bound` are counted as not
/// found, never as violations.
pub fn ensemble_verify(
    bound: BoundFamily,
    kappa: ConstraintLevel,
    n: usize,
    samples: usize,
    seed: u64,
    horizon_multiplier: f64,
) -> Result<EnsembleReport> {
    if n < 2 {
        return Err(QslError::InvalidInput(format!("ensembles need N >= 2, got {n}")));
    }
    if !(horizon_multiplier.is_finite() && horizon_multiplier > 0.0) {
        return Err(QslError::InvalidInput(format!("horizon multiplier must be positive, got {horizon_multiplier}")));
    }
    let config = EnsembleConfig { bound, kappa: kappa.value(), dim: n, samples, seed, horizon_multiplier };
    let basis = traceless_basis(n)?;
    let slack = tolerances().violation_slack;
    let tol = tolerances().orthogonality;

    let rows: Vec<EnsembleSample> = (0..samples)
        .map(|index| {
            let mut rng = rng_for(seed, index as u64);
            let h = basis.random_combination(&mut rng);
            let psi = random_state(&mut rng, n);
            match ensemble_sample(bound, kappa, &h, &psi, horizon_multiplier, tol) {
                Ok((b, result)) => {
                    let ratio = result.t_perp.map(|t| t / b);
                    EnsembleSample { index, bound: Some(b), t_perp: result.t_perp, ratio, found: result.found, error: None }
                }
                Err(e) => EnsembleSample { index, bound: None, t_perp: None, ratio: None, found: false, error: Some(e.to_string()) },
            }
        })
        .collect();

    let violations = rows.iter().filter(|r| matches!(r.ratio, Some(q) if q < 1.0 - slack)).count();
    let min_ratio = rows.iter().filter_map(|r| r.ratio).min_by(f64::total_cmp);
    Ok(EnsembleReport {
        config_digest: config.digest(),
        config,
        samples,
        found: rows.iter().filter(|r| r.found).count(),
        violations,
        errors: rows.iter().filter(|r| r.error.is_some()).count(),
        min_ratio,
        seed,
        rows,
    })
}

/// Rescales `h` to the constraint, then returns `(bound, oracle result)`.
pub fn ensemble_sample(
    bound: BoundFamily,
    kappa: ConstraintLevel,
    h: &ComplexMatrix,
    psi: &StateVector,
    horizon_multiplier: f64,
    tol: f64,
) -> Result<(f64, OrthogonalityResult)> {
    let (scaled, value) = match bound {
        BoundFamily::Ml => {
            let f = PHFunctional::central_moment(1.0, psi.clone())?;
            (rescale_to_constraint(h, &f, kappa)?, PI / (2.0 * kappa.value()))
        }
        BoundFamily::Gp(p) => {
            let f = PHFunctional::central_moment(p, psi.clone())?;
            (rescale_to_constraint(h, &f, kappa)?, crate::engine::swap_time_closed_form(p, kappa)?)
        }
        BoundFamily::Opnorm => {
            (rescale_to_constraint(h, &PHFunctional::operator_norm(), kappa)?, PI / kappa.value())
        }
        BoundFamily::Te => {
            let (_, _, spread) = energy_moments(h, psi)?;
            if spread <= tolerances().zero_functional {
                return Err(QslError::ZeroVariance { spread });
            }
            (h.scale_real(kappa.value() / spread), PI / (2.0 * kappa.value()))
        }
    };
    let profile = SurvivalProfile::new(&scaled, psi)?;
    let horizon = horizon_multiplier * value;
    let step = profile.default_grid_step().map_or(horizon / 16.0, |s| s.min(horizon / 16.0));
    Ok((value, first_orthogonality_time_in(&profile, horizon, step, tol)?))
}
