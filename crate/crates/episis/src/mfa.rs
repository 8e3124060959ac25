//! Mean-field maps on `[0,1]^n`, fixed-point iteration, and the spectral
//! threshold separating fast eradication from persistence.
//!
//! Replacing the random state by the vector of per-node infection
//! probabilities turns each chain into a deterministic map: the benchmark
//! map `psi` and the distancing map `phi`,
//!
//! ```text
//! psi_i(x) = x_i (1 - delta) + (1 - (1 - delta) x_i) * p01_i(x)
//! phi_i(x) = x_i (1 - delta) + (1 - (1 - delta) x_i) * p01d_i(x)
//! ```
//!
//! where `p01_i` and `p01d_i` are the infection probabilities of
//! [`crate::dynamics`] with real-valued `x_j` substituted for the state
//! bits. Both maps fix the origin and share the Jacobian
//! `beta * A + (1 - delta) I` there, so the threshold
//! `beta * lambda_max(A) + 1 - delta` vs `1` governs both.

use thiserror::Error;

use crate::dynamics::EpidemicParams;
use crate::graph::{
    spectral_radius, Graph, GraphError, DEFAULT_SPECTRAL_MAX_ITER, DEFAULT_SPECTRAL_TOL,
};

/// Default sup-norm step tolerance for fixed-point iteration.
pub const FIXED_POINT_TOL: f64 = 1e-10;
/// Default iteration cap for fixed-point iteration.
pub const FIXED_POINT_MAX_ITER: usize = 100_000;
/// A converged point whose sup-norm exceeds this floor counts as a
/// nontrivial (endemic) fixed point; anything below is numerical zero.
pub const NONTRIVIALITY_FLOOR: f64 = 1e-6;
/// Half-width of the band around 1 classified as critical.
pub const CRITICAL_BAND: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum MfaError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("component {index} is {value}, outside [0, 1]")]
    OutOfDomain { index: usize, value: f64 },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("spectral radius failed: {0}")]
    Spectral(#[from] GraphError),
}

/// A vector of per-node infection probabilities, componentwise in `[0,1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct MfaVector(Vec<f64>);

impl MfaVector {
    pub fn new(components: Vec<f64>) -> Result<Self, MfaError> {
        if components.is_empty() {
            return Err(MfaError::InvalidParameter("empty vector".into()));
        }
        for (index, &value) in components.iter().enumerate() {
            if !(0.0..=1.0).contains(&value) {
                return Err(MfaError::OutOfDomain { index, value });
            }
        }
        Ok(Self(components))
    }

    /// All components equal to `value`.
    pub fn uniform(n: usize, value: f64) -> Result<Self, MfaError> {
        Self::new(vec![value; n])
    }

    pub fn zeros(n: usize) -> Self {
        Self(vec![0.0; n])
    }

    pub fn ones(n: usize) -> Self {
        Self(vec![1.0; n])
    }

    fn from_raw(components: Vec<f64>) -> Self {
        debug_assert!(components.iter().all(|v| (0.0..=1.0).contains(v)));
        Self(components)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn get(&self, i: usize) -> f64 {
        self.0[i]
    }

    pub fn sup_norm(&self) -> f64 {
        self.0.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// `(sum_i x_i) / n`, the normalized endemic level.
    pub fn norm1_over_n(&self) -> f64 {
        self.0.iter().sum::<f64>() / self.0.len() as f64
    }

    pub fn min_component(&self) -> f64 {
        self.0.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_component(&self) -> f64 {
        self.0.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn sup_distance(&self, other: &Self) -> f64 {
        assert_eq!(self.len(), other.len());
        self.0
            .iter()
            .zip(&other.0)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }
}

/// One of the two mean-field maps, bound to its networks and parameters.
#[derive(Debug, Clone, Copy)]
pub enum MfaMap<'a> {
    /// Benchmark map `psi` on the contact network.
    Psi {
        contact: &'a Graph,
        params: EpidemicParams,
    },
    /// Distancing map `phi` on the contact and social networks.
    Phi {
        contact: &'a Graph,
        social: &'a Graph,
        params: EpidemicParams,
    },
}

impl MfaMap<'_> {
    pub fn name(&self) -> &'static str {
        match self {
            MfaMap::Psi { .. } => "psi",
            MfaMap::Phi { .. } => "phi",
        }
    }

    fn n(&self) -> usize {
        match self {
            MfaMap::Psi { contact, .. } => contact.n(),
            MfaMap::Phi { contact, .. } => contact.n(),
        }
    }

    /// Applies the map componentwise. The image stays in `[0,1]^n`; a
    /// final clamp absorbs last-ulp rounding.
    pub fn apply(&self, x: &MfaVector) -> MfaVector {
        assert_eq!(x.len(), self.n(), "vector/graph size mismatch");
        match self {
            MfaMap::Psi { contact, params } => {
                let out = (0..x.len())
                    .map(|i| {
                        let mut stay = 1.0;
                        for &j in contact.neighbors(i) {
                            stay *= 1.0 - params.beta() * x.get(j);
                        }
                        component_update(x.get(i), params.delta(), 1.0 - stay)
                    })
                    .collect();
                MfaVector::from_raw(out)
            }
            MfaMap::Phi {
                contact,
                social,
                params,
            } => {
                let global = x.as_slice().iter().sum::<f64>() / x.len() as f64;
                let out = (0..x.len())
                    .map(|i| {
                        let nbrs = social.neighbors(i);
                        let local = if nbrs.is_empty() {
                            0.0
                        } else {
                            let s: f64 = nbrs.iter().map(|&j| x.get(j)).sum();
                            params.alpha() * s / nbrs.len() as f64
                        };
                        let action = 1.0 - (local + (1.0 - params.alpha()) * global);
                        let mut stay = 1.0;
                        for &j in contact.neighbors(i) {
                            stay *= 1.0 - params.beta() * action * x.get(j);
                        }
                        component_update(x.get(i), params.delta(), 1.0 - stay)
                    })
                    .collect();
                MfaVector::from_raw(out)
            }
        }
    }
}

fn component_update(x_i: f64, delta: f64, p_infect: f64) -> f64 {
    let carried = x_i * (1.0 - delta);
    (carried + (1.0 - carried) * p_infect).clamp(0.0, 1.0)
}

/// Outcome of a converged-or-capped fixed-point iteration.
#[derive(Debug, Clone)]
pub struct FixedPointReport {
    pub point: MfaVector,
    pub iterations: usize,
    /// Sup-norm of `point - map(point)`.
    pub residual: f64,
    pub converged: bool,
    pub classification: Classification,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Classification {
    Trivial,
    Nontrivial,
}

/// Iterates `map` from `x0` until the sup-norm step difference drops
/// below `tol` or `max_iter` applications.
pub fn iterate_fixed_point(
    map: &MfaMap,
    x0: &MfaVector,
    tol: f64,
    max_iter: usize,
) -> Result<FixedPointReport, MfaError> {
    if tol <= 0.0 {
        return Err(MfaError::InvalidParameter(format!(
            "tolerance must be positive, got {tol}"
        )));
    }
    if max_iter == 0 {
        return Err(MfaError::InvalidParameter(
            "need at least one iteration".into(),
        ));
    }
    let mut x = x0.clone();
    let mut iterations = 0;
    loop {
        let next = map.apply(&x);
        let diff = next.sup_distance(&x);
        x = next;
        iterations += 1;
        if diff < tol || iterations >= max_iter {
            break;
        }
    }
    let residual = map.apply(&x).sup_distance(&x);
    let classification = if x.sup_norm() > NONTRIVIALITY_FLOOR {
        Classification::Nontrivial
    } else {
        Classification::Trivial
    };
    Ok(FixedPointReport {
        converged: residual < tol,
        point: x,
        iterations,
        residual,
        classification,
    })
}

/// Position of the parameters relative to the epidemic threshold.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ThresholdClass {
    Subcritical,
    Supercritical,
    Critical,
}

impl ThresholdClass {
    pub fn as_str(&self) -> &'static str {
        match self {
            ThresholdClass::Subcritical => "subcritical",
            ThresholdClass::Supercritical => "supercritical",
            ThresholdClass::Critical => "critical",
        }
    }
}

/// Compares `beta * lambda_max(A) + 1 - delta` against 1 (equivalently
/// `delta / beta` against `lambda_max`), with a `CRITICAL_BAND` margin.
/// The contact graph should be connected; reduce it first if not.
pub fn threshold_classify(
    contact: &Graph,
    params: &EpidemicParams,
) -> Result<ThresholdClass, MfaError> {
    let lambda = spectral_radius(contact, DEFAULT_SPECTRAL_TOL, DEFAULT_SPECTRAL_MAX_ITER)?;
    let value = params.beta() * lambda + 1.0 - params.delta();
    Ok(if (value - 1.0).abs() <= CRITICAL_BAND {
        ThresholdClass::Critical
    } else if value > 1.0 {
        ThresholdClass::Supercritical
    } else {
        ThresholdClass::Subcritical
    })
}

/// Result of a componentwise strict-dominance check `p* < q*`.
#[derive(Debug, Clone, Copy)]
pub struct DominanceReport {
    pub dominated: bool,
    /// Smallest componentwise margin `q*_i - p*_i`.
    pub worst_margin: f64,
}

/// Checks `p_star < q_star` strictly in every component.
pub fn dominance_check(
    p_star: &MfaVector,
    q_star: &MfaVector,
) -> Result<DominanceReport, MfaError> {
    if p_star.len() != q_star.len() {
        return Err(MfaError::DimensionMismatch(format!(
            "{} vs {}",
            p_star.len(),
            q_star.len()
        )));
    }
    let worst_margin = p_star
        .as_slice()
        .iter()
        .zip(q_star.as_slice())
        .map(|(p, q)| q - p)
        .fold(f64::INFINITY, f64::min);
    Ok(DominanceReport {
        dominated: worst_margin > 0.0,
        worst_margin,
    })
}
