//! Node-level transition probabilities and synchronous simulation of the
//! benchmark SIS chain and the awareness-driven distancing chain, plus the
//! exact transition matrix and absorption times for small node counts.
//!
//! A state is a bit per node (1 = infected). In one synchronous step every
//! node draws its next bit independently given the current state:
//!
//! * susceptible node: infected next with probability
//!   `p01(s) = 1 - prod_{j in contact nbrs} (1 - beta * s_j)`;
//! * infected node: susceptible next with probability `delta * (1 - p01(s))`
//!   (it must heal and not be re-infected in the same step).
//!
//! The distancing chain scales each node's per-contact transmission by its
//! action `a_i(s) = 1 - mu_i(s)`, where the awareness `mu_i` mixes the
//! infected fraction among social neighbors (weight `alpha`) with the
//! global infected fraction (weight `1 - alpha`).

use rand::Rng;
use thiserror::Error;

use crate::graph::Graph;
use crate::rng::SimRng;

/// Node-count cap for exact `2^n x 2^n` transition matrices.
pub const MAX_EXACT_NODES: usize = 14;

#[derive(Debug, Error)]
pub enum DynamicsError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("exact chain supports at most {MAX_EXACT_NODES} nodes, got {0}")]
    TooManyNodes(usize),
    #[error("numerical failure: {0}")]
    Numerical(String),
}

/// Epidemic parameters: transmission `beta`, healing `delta` (both strictly
/// inside `(0,1)`) and the social trust weight `alpha` in `[0,1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpidemicParams {
    beta: f64,
    delta: f64,
    alpha: f64,
}

impl EpidemicParams {
    pub fn new(beta: f64, delta: f64, alpha: f64) -> Result<Self, DynamicsError> {
        if !(beta > 0.0 && beta < 1.0) {
            return Err(DynamicsError::InvalidParameter(format!(
                "beta must lie in (0, 1), got {beta}"
            )));
        }
        if !(delta > 0.0 && delta < 1.0) {
            return Err(DynamicsError::InvalidParameter(format!(
                "delta must lie in (0, 1), got {delta}"
            )));
        }
        if !(0.0..=1.0).contains(&alpha) {
            return Err(DynamicsError::InvalidParameter(format!(
                "alpha must lie in [0, 1], got {alpha}"
            )));
        }
        Ok(Self { beta, delta, alpha })
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }
}

/// Which chain drives an update.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChainKind {
    Benchmark,
    Distancing,
}

impl ChainKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            ChainKind::Benchmark => "benchmark",
            ChainKind::Distancing => "distancing",
        }
    }
}

/// The contact network together with the social (information) network.
/// Both graphs share the node set.
#[derive(Debug, Clone)]
pub struct Networks {
    contact: Graph,
    social: Graph,
}

impl Networks {
    pub fn new(contact: Graph, social: Graph) -> Result<Self, DynamicsError> {
        if contact.n() != social.n() {
            return Err(DynamicsError::InvalidParameter(format!(
                "contact and social node counts differ: {} vs {}",
                contact.n(),
                social.n()
            )));
        }
        Ok(Self { contact, social })
    }

    /// Uses the same graph for contact and social links (no rewiring).
    pub fn shared(contact: Graph) -> Self {
        let social = contact.clone();
        Self { contact, social }
    }

    pub fn contact(&self) -> &Graph {
        &self.contact
    }

    pub fn social(&self) -> &Graph {
        &self.social
    }

    pub fn n(&self) -> usize {
        self.contact.n()
    }
}

/// Infection state: bit `i` is 1 when node `i` is infected.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct EpidemicState {
    bits: Vec<bool>,
}

impl EpidemicState {
    pub fn from_bits(bits: Vec<bool>) -> Self {
        assert!(!bits.is_empty(), "state must cover at least one node");
        Self { bits }
    }

    pub fn all_susceptible(n: usize) -> Self {
        Self::from_bits(vec![false; n])
    }

    pub fn all_infected(n: usize) -> Self {
        Self::from_bits(vec![true; n])
    }

    pub fn single_infected(n: usize, node: usize) -> Self {
        let mut bits = vec![false; n];
        bits[node] = true;
        Self::from_bits(bits)
    }

    pub fn n(&self) -> usize {
        self.bits.len()
    }

    pub fn bit(&self, i: usize) -> bool {
        self.bits[i]
    }

    pub fn infected_count(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    /// True at the absorbing all-susceptible state.
    pub fn is_absorbed(&self) -> bool {
        self.bits.iter().all(|&b| !b)
    }

    /// Componentwise partial order: `self <= other`.
    pub fn leq(&self, other: &Self) -> bool {
        self.n() == other.n()
            && self
                .bits
                .iter()
                .zip(&other.bits)
                .all(|(&a, &b)| !a || b)
    }

    /// Encodes the state as an integer index with node `i` at bit `i`.
    pub fn to_index(&self) -> usize {
        assert!(self.n() <= usize::BITS as usize - 1);
        self.bits
            .iter()
            .enumerate()
            .fold(0usize, |acc, (i, &b)| acc | ((b as usize) << i))
    }

    pub fn from_index(n: usize, index: usize) -> Self {
        assert!(n <= usize::BITS as usize - 1 && index < (1 << n));
        Self::from_bits((0..n).map(|i| (index >> i) & 1 == 1).collect())
    }

    /// Hex encoding of the bit vector: byte `k` holds nodes `8k..8k+8`
    /// with node `8k + b` at bit `b`; bytes are emitted in increasing `k`.
    pub fn to_hex(&self) -> String {
        let mut bytes = vec![0u8; self.n().div_ceil(8)];
        for (i, &b) in self.bits.iter().enumerate() {
            if b {
                bytes[i / 8] |= 1 << (i % 8);
            }
        }
        bytes.iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn from_hex(n: usize, hex: &str) -> Result<Self, DynamicsError> {
        let expected = n.div_ceil(8) * 2;
        if hex.len() != expected {
            return Err(DynamicsError::InvalidParameter(format!(
                "hex state for n = {n} must have {expected} digits, got {}",
                hex.len()
            )));
        }
        let mut bytes = Vec::with_capacity(expected / 2);
        for k in 0..expected / 2 {
            let byte = u8::from_str_radix(&hex[2 * k..2 * k + 2], 16).map_err(|e| {
                DynamicsError::InvalidParameter(format!("bad hex state: {e}"))
            })?;
            bytes.push(byte);
        }
        let bits: Vec<bool> = (0..n).map(|i| (bytes[i / 8] >> (i % 8)) & 1 == 1).collect();
        for i in n..bytes.len() * 8 {
            if (bytes[i / 8] >> (i % 8)) & 1 == 1 {
                return Err(DynamicsError::InvalidParameter(
                    "hex state has bits beyond the node count".into(),
                ));
            }
        }
        Ok(Self::from_bits(bits))
    }
}

/// Awareness `mu_i(s)`: `alpha` times the infected fraction among social
/// neighbors plus `1 - alpha` times the global infected fraction. The
/// local term is 0 for nodes without social neighbors.
pub fn awareness(state: &EpidemicState, social: &Graph, params: &EpidemicParams, i: usize) -> f64 {
    awareness_given_total(state, social, params, i, state.infected_count())
}

pub(crate) fn awareness_given_total(
    state: &EpidemicState,
    social: &Graph,
    params: &EpidemicParams,
    i: usize,
    total_infected: usize,
) -> f64 {
    debug_assert_eq!(state.n(), social.n());
    let nbrs = social.neighbors(i);
    let local = if nbrs.is_empty() {
        0.0
    } else {
        let infected = nbrs.iter().filter(|&&j| state.bit(j)).count();
        params.alpha * infected as f64 / nbrs.len() as f64
    };
    local + (1.0 - params.alpha) * total_infected as f64 / state.n() as f64
}

/// Social distancing action `a_i(s) = 1 - mu_i(s)`.
pub fn distancing_action(
    state: &EpidemicState,
    social: &Graph,
    params: &EpidemicParams,
    i: usize,
) -> f64 {
    1.0 - awareness(state, social, params, i)
}

/// Probability a susceptible node `i` becomes infected under the benchmark
/// chain: `1 - prod_{j in contact nbrs}(1 - beta * s_j)`.
pub fn p01(state: &EpidemicState, contact: &Graph, params: &EpidemicParams, i: usize) -> f64 {
    debug_assert_eq!(state.n(), contact.n());
    let mut stay = 1.0;
    let factor = 1.0 - params.beta;
    for &j in contact.neighbors(i) {
        if state.bit(j) {
            stay *= factor;
        }
    }
    1.0 - stay
}

/// Distancing analogue of [`p01`] with the per-contact transmission scaled
/// by node `i`'s action: `1 - prod(1 - beta * a_i(s) * s_j)`.
pub fn p01_distancing(
    state: &EpidemicState,
    contact: &Graph,
    social: &Graph,
    params: &EpidemicParams,
    i: usize,
) -> f64 {
    p01_distancing_given_total(state, contact, social, params, i, state.infected_count())
}

pub(crate) fn p01_distancing_given_total(
    state: &EpidemicState,
    contact: &Graph,
    social: &Graph,
    params: &EpidemicParams,
    i: usize,
    total_infected: usize,
) -> f64 {
    debug_assert_eq!(state.n(), contact.n());
    let action = 1.0 - awareness_given_total(state, social, params, i, total_infected);
    let factor = 1.0 - params.beta * action;
    let mut stay = 1.0;
    for &j in contact.neighbors(i) {
        if state.bit(j) {
            stay *= factor;
        }
    }
    1.0 - stay
}

/// Distribution of one node's next bit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NodeTransition {
    pub to_susceptible: f64,
    pub to_infected: f64,
}

impl NodeTransition {
    fn from_infection_prob(currently_infected: bool, p_infect: f64, delta: f64) -> Self {
        let p_stay_clear = 1.0 - p_infect;
        if currently_infected {
            NodeTransition {
                to_susceptible: delta * p_stay_clear,
                to_infected: 1.0 - delta * p_stay_clear,
            }
        } else {
            NodeTransition {
                to_susceptible: p_stay_clear,
                to_infected: p_infect,
            }
        }
    }
}

/// Node `i`'s transition distribution under the benchmark chain.
pub fn node_transition_benchmark(
    state: &EpidemicState,
    contact: &Graph,
    params: &EpidemicParams,
    i: usize,
) -> NodeTransition {
    NodeTransition::from_infection_prob(state.bit(i), p01(state, contact, params, i), params.delta)
}

/// Node `i`'s transition distribution under the distancing chain.
pub fn node_transition_distancing(
    state: &EpidemicState,
    contact: &Graph,
    social: &Graph,
    params: &EpidemicParams,
    i: usize,
) -> NodeTransition {
    NodeTransition::from_infection_prob(
        state.bit(i),
        p01_distancing(state, contact, social, params, i),
        params.delta,
    )
}

pub(crate) fn prob_next_infected_given_total(
    kind: ChainKind,
    state: &EpidemicState,
    networks: &Networks,
    params: &EpidemicParams,
    i: usize,
    total_infected: usize,
) -> f64 {
    let p_infect = match kind {
        ChainKind::Benchmark => p01(state, networks.contact(), params, i),
        ChainKind::Distancing => p01_distancing_given_total(
            state,
            networks.contact(),
            networks.social(),
            params,
            i,
            total_infected,
        ),
    };
    if state.bit(i) {
        1.0 - params.delta * (1.0 - p_infect)
    } else {
        p_infect
    }
}

/// One synchronous update: every node draws its next bit independently
/// given the current state.
///
/// Draw order: nodes in index order, one uniform `f64` each; the node is
/// infected next iff the draw falls below its next-infected probability.
pub fn step(
    state: &EpidemicState,
    networks: &Networks,
    params: &EpidemicParams,
    kind: ChainKind,
    rng: &mut SimRng,
) -> EpidemicState {
    assert_eq!(state.n(), networks.n(), "state/network size mismatch");
    let total = state.infected_count();
    let bits = (0..state.n())
        .map(|i| {
            let p = prob_next_infected_given_total(kind, state, networks, params, i, total);
            rng.gen::<f64>() < p
        })
        .collect();
    EpidemicState::from_bits(bits)
}

/// A recorded trajectory. States run from `t = 0` up to absorption or the
/// horizon, whichever comes first; once the all-susceptible state is hit
/// the path stays there, so later states are implicit.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SamplePath {
    states: Vec<EpidemicState>,
    horizon: usize,
    absorbed_at: Option<usize>,
}

impl SamplePath {
    /// Wraps a recorded state sequence. The first all-susceptible state
    /// (if any) must only be followed by all-susceptible states.
    pub fn from_recorded(
        states: Vec<EpidemicState>,
        horizon: usize,
    ) -> Result<Self, DynamicsError> {
        if states.is_empty() {
            return Err(DynamicsError::InvalidParameter(
                "path needs at least the initial state".into(),
            ));
        }
        if states.len() > horizon + 1 {
            return Err(DynamicsError::InvalidParameter(format!(
                "{} states exceed horizon {horizon}",
                states.len()
            )));
        }
        let n = states[0].n();
        if states.iter().any(|s| s.n() != n) {
            return Err(DynamicsError::InvalidParameter(
                "states have inconsistent node counts".into(),
            ));
        }
        let absorbed_at = states.iter().position(EpidemicState::is_absorbed);
        if let Some(t) = absorbed_at {
            if states[t..].iter().any(|s| !s.is_absorbed()) {
                return Err(DynamicsError::InvalidParameter(
                    "infection reappears after the absorbing state".into(),
                ));
            }
        }
        Ok(Self {
            states,
            horizon,
            absorbed_at,
        })
    }

    /// Number of recorded states (`last time index + 1`).
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn n(&self) -> usize {
        self.states[0].n()
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn absorbed_at(&self) -> Option<usize> {
        self.absorbed_at
    }

    pub fn states(&self) -> &[EpidemicState] {
        &self.states
    }

    /// Recorded state at time `t`, if any.
    pub fn state(&self, t: usize) -> Option<&EpidemicState> {
        self.states.get(t)
    }

    /// Infected count at time `t <= horizon`, extending an absorbed path
    /// with zeros. `None` beyond the horizon.
    pub fn infected_at(&self, t: usize) -> Option<usize> {
        if t > self.horizon {
            return None;
        }
        match self.states.get(t) {
            Some(s) => Some(s.infected_count()),
            None => self.absorbed_at.map(|_| 0),
        }
    }

    /// Whether node `i` is infected at time `t <= horizon`, with the same
    /// absorbed-path extension as [`SamplePath::infected_at`].
    pub fn node_infected_at(&self, t: usize, i: usize) -> Option<bool> {
        if t > self.horizon {
            return None;
        }
        match self.states.get(t) {
            Some(s) => Some(s.bit(i)),
            None => self.absorbed_at.map(|_| false),
        }
    }
}

/// Runs the chain from `init` until absorption or `horizon` steps.
pub fn simulate(
    init: &EpidemicState,
    networks: &Networks,
    params: &EpidemicParams,
    kind: ChainKind,
    horizon: usize,
    rng: &mut SimRng,
) -> SamplePath {
    assert_eq!(init.n(), networks.n(), "state/network size mismatch");
    let mut states = Vec::with_capacity(horizon.min(1 << 12) + 1);
    states.push(init.clone());
    let mut absorbed_at = init.is_absorbed().then_some(0);
    let mut current = init.clone();
    let mut t = 0;
    while absorbed_at.is_none() && t < horizon {
        current = step(&current, networks, params, kind, rng);
        t += 1;
        states.push(current.clone());
        if current.is_absorbed() {
            absorbed_at = Some(t);
        }
    }
    SamplePath {
        states,
        horizon,
        absorbed_at,
    }
}

/// Dense `2^n x 2^n` transition matrix of either chain, for `n` at most
/// [`MAX_EXACT_NODES`]. State `s` maps to the row index with node `i` at
/// bit `i`; the all-susceptible row is the unit vector at itself.
#[derive(Debug, Clone)]
pub struct ExactChain {
    n: usize,
    kind: ChainKind,
    rows: Vec<Vec<f64>>,
}

impl ExactChain {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn kind(&self) -> ChainKind {
        self.kind
    }

    /// Number of states, `2^n`.
    pub fn size(&self) -> usize {
        1 << self.n
    }

    pub fn prob(&self, from: usize, to: usize) -> f64 {
        self.rows[from][to]
    }

    pub fn row(&self, from: usize) -> &[f64] {
        &self.rows[from]
    }
}

/// Builds the exact transition matrix `K(s, s') = prod_i P_i(s, s'_i)`.
pub fn exact_transition_matrix(
    networks: &Networks,
    params: &EpidemicParams,
    kind: ChainKind,
) -> Result<ExactChain, DynamicsError> {
    let n = networks.n();
    if n > MAX_EXACT_NODES {
        return Err(DynamicsError::TooManyNodes(n));
    }
    let size = 1usize << n;
    let mut rows = Vec::with_capacity(size);
    for from in 0..size {
        let state = EpidemicState::from_index(n, from);
        let total = state.infected_count();
        let p_inf: Vec<f64> = (0..n)
            .map(|i| prob_next_infected_given_total(kind, &state, networks, params, i, total))
            .collect();
        let mut row = Vec::with_capacity(size);
        for to in 0..size {
            let mut prob = 1.0;
            for (i, p) in p_inf.iter().enumerate() {
                prob *= if (to >> i) & 1 == 1 { *p } else { 1.0 - *p };
            }
            row.push(prob);
        }
        rows.push(row);
    }
    Ok(ExactChain { n, kind, rows })
}

/// Expected number of steps until absorption starting from `init`, from
/// the fundamental-matrix linear system `(I - Q) t = 1` over the
/// non-absorbing states.
pub fn expected_absorption_time_exact(
    chain: &ExactChain,
    init: &EpidemicState,
) -> Result<f64, DynamicsError> {
    if init.n() != chain.n() {
        return Err(DynamicsError::InvalidParameter(format!(
            "state has {} nodes, chain has {}",
            init.n(),
            chain.n()
        )));
    }
    let start = init.to_index();
    if start == 0 {
        return Ok(0.0);
    }
    let m = chain.size() - 1;
    let a = nalgebra::DMatrix::from_fn(m, m, |r, c| {
        let q = chain.prob(r + 1, c + 1);
        if r == c {
            1.0 - q
        } else {
            -q
        }
    });
    let b = nalgebra::DVector::from_element(m, 1.0);
    let t = a
        .lu()
        .solve(&b)
        .ok_or_else(|| DynamicsError::Numerical("(I - Q) is singular".into()))?;
    Ok(t[start - 1])
}
