//! A monotone coupling of the distancing and benchmark chains.
//!
//! Given ordered current states `x <= y` (componentwise), each node draws
//! its pair of next bits — distancing first, benchmark second — from a
//! four-entry joint table whose row marginal is the node's distancing
//! transition at `x` and whose column marginal is its benchmark transition
//! at `y`, and which never produces (infected, susceptible). Stepping all
//! nodes independently therefore yields path pairs `(h, g)` with
//! `h^t <= g^t` at every time while `h` alone is distributed as the
//! distancing chain and `g` alone as the benchmark chain.
//!
//! [`verify_coupling_marginals_exact`] checks both marginal identities by
//! exhaustive enumeration against the dense transition matrices at small
//! node counts; [`expectation_gap`] and [`dominance_upper_set_probe`] turn
//! the coupling into estimators for how much distancing lowers increasing
//! epidemic cost metrics.

use rand::Rng;
use thiserror::Error;

use crate::dynamics::{
    exact_transition_matrix, p01, p01_distancing_given_total, ChainKind, DynamicsError,
    EpidemicParams, EpidemicState, Networks, SamplePath,
};
use crate::metrics::{MetricError, MetricValue, PathMetric};
use crate::rng::SimRng;

/// Node-count cap for exhaustive marginal verification.
pub const MAX_VERIFY_NODES: usize = 5;

#[derive(Debug, Error)]
pub enum CouplingError {
    #[error("order violation: distancing state is not componentwise below benchmark state")]
    OrderViolation,
    #[error("coupling table case ({x_bit}, {y_bit}) is unreachable for ordered states")]
    UnreachableCase { x_bit: bool, y_bit: bool },
    #[error("coupling table entry {entry} is negative: {value}")]
    NegativeEntry { entry: &'static str, value: f64 },
    #[error("exhaustive verification supports at most {MAX_VERIFY_NODES} nodes, got {0}")]
    TooManyNodes(usize),
    #[error("metric {0} is not registered as increasing")]
    UnregisteredMetric(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("coupling invariant violated: {0}")]
    InvariantViolation(String),
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
    #[error(transparent)]
    Metric(#[from] MetricError),
}

/// Joint distribution of one node's next bits under the coupling:
/// `q_ab` is the probability of distancing bit `a` and benchmark bit `b`.
/// `q10` is identically zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NodeCouplingTable {
    pub q00: f64,
    pub q01: f64,
    pub q10: f64,
    pub q11: f64,
}

impl NodeCouplingTable {
    /// Builds the table for current bits `(x_bit, y_bit)` from the healing
    /// probability and the two infection probabilities
    /// `p01_bench = p01(y)` and `p01d_dist = p01d(x)`, which must satisfy
    /// `p01d_dist <= p01_bench` (automatic for ordered states).
    pub fn from_probs(
        x_bit: bool,
        y_bit: bool,
        delta: f64,
        p01_bench: f64,
        p01d_dist: f64,
    ) -> Result<Self, CouplingError> {
        let table = match (x_bit, y_bit) {
            (true, true) => NodeCouplingTable {
                q00: delta * (1.0 - p01_bench),
                q01: delta * (p01_bench - p01d_dist),
                q10: 0.0,
                q11: 1.0 - delta * (1.0 - p01d_dist),
            },
            (false, false) => NodeCouplingTable {
                q00: 1.0 - p01_bench,
                q01: p01_bench - p01d_dist,
                q10: 0.0,
                q11: p01d_dist,
            },
            (false, true) => NodeCouplingTable {
                q00: delta * (1.0 - p01_bench),
                q01: 1.0 - p01d_dist - delta * (1.0 - p01_bench),
                q10: 0.0,
                q11: p01d_dist,
            },
            (true, false) => {
                return Err(CouplingError::UnreachableCase {
                    x_bit: true,
                    y_bit: false,
                })
            }
        };
        for (entry, value) in [
            ("q00", table.q00),
            ("q01", table.q01),
            ("q11", table.q11),
        ] {
            if value < 0.0 {
                return Err(CouplingError::NegativeEntry { entry, value });
            }
        }
        Ok(table)
    }

    pub fn sum(&self) -> f64 {
        self.q00 + self.q01 + self.q10 + self.q11
    }

    /// Joint probability of next bits `(distancing, benchmark)`.
    pub fn prob(&self, dist_bit: bool, bench_bit: bool) -> f64 {
        match (dist_bit, bench_bit) {
            (false, false) => self.q00,
            (false, true) => self.q01,
            (true, false) => self.q10,
            (true, true) => self.q11,
        }
    }

    /// Marginal probability the distancing node is infected next.
    pub fn distancing_infected(&self) -> f64 {
        self.q10 + self.q11
    }

    /// Marginal probability the benchmark node is infected next.
    pub fn benchmark_infected(&self) -> f64 {
        self.q01 + self.q11
    }

    /// Samples next bits from one uniform draw, scanning the cumulative
    /// thresholds in the fixed order `q00, q01, q11`.
    fn sample(&self, u: f64) -> (bool, bool) {
        if u < self.q00 {
            (false, false)
        } else if u < self.q00 + self.q01 {
            (false, true)
        } else {
            (true, true)
        }
    }
}

/// Coupled transition table of node `i` for ordered states `x <= y`.
pub fn node_coupling_table(
    x: &EpidemicState,
    y: &EpidemicState,
    networks: &Networks,
    params: &EpidemicParams,
    i: usize,
) -> Result<NodeCouplingTable, CouplingError> {
    if !x.leq(y) {
        return Err(CouplingError::OrderViolation);
    }
    node_table_given_totals(x, y, networks, params, i, x.infected_count())
}

fn node_table_given_totals(
    x: &EpidemicState,
    y: &EpidemicState,
    networks: &Networks,
    params: &EpidemicParams,
    i: usize,
    x_total: usize,
) -> Result<NodeCouplingTable, CouplingError> {
    let p_bench = p01(y, networks.contact(), params, i);
    let p_dist = p01_distancing_given_total(
        x,
        networks.contact(),
        networks.social(),
        params,
        i,
        x_total,
    );
    NodeCouplingTable::from_probs(x.bit(i), y.bit(i), params.delta(), p_bench, p_dist)
}

/// One coupled synchronous step from ordered states `(x, y)`.
///
/// Draw order: nodes in index order, one uniform `f64` per node fed to
/// [`NodeCouplingTable::sample`]. The output preserves the order and has
/// the distancing law at `x` and the benchmark law at `y` as marginals.
pub fn coupled_step(
    x: &EpidemicState,
    y: &EpidemicState,
    networks: &Networks,
    params: &EpidemicParams,
    rng: &mut SimRng,
) -> Result<(EpidemicState, EpidemicState), CouplingError> {
    if !x.leq(y) {
        return Err(CouplingError::OrderViolation);
    }
    assert_eq!(x.n(), networks.n(), "state/network size mismatch");
    let x_total = x.infected_count();
    let n = x.n();
    let mut next_x = Vec::with_capacity(n);
    let mut next_y = Vec::with_capacity(n);
    for i in 0..n {
        let table = node_table_given_totals(x, y, networks, params, i, x_total)?;
        let (a, b) = table.sample(rng.gen::<f64>());
        next_x.push(a);
        next_y.push(b);
    }
    Ok((
        EpidemicState::from_bits(next_x),
        EpidemicState::from_bits(next_y),
    ))
}

/// A coupled pair of recorded trajectories with a common initial state.
/// The distancing path `h` stays componentwise below the benchmark path
/// `g` at every recorded time.
#[derive(Debug, Clone)]
pub struct CoupledPath {
    pairs: Vec<(EpidemicState, EpidemicState)>,
    horizon: usize,
    absorbed_at_h: Option<usize>,
    absorbed_at_g: Option<usize>,
}

impl CoupledPath {
    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn pairs(&self) -> &[(EpidemicState, EpidemicState)] {
        &self.pairs
    }

    pub fn absorbed_at_h(&self) -> Option<usize> {
        self.absorbed_at_h
    }

    pub fn absorbed_at_g(&self) -> Option<usize> {
        self.absorbed_at_g
    }

    /// True when every recorded pair is ordered.
    pub fn order_ok(&self) -> bool {
        self.pairs.iter().all(|(h, g)| h.leq(g))
    }

    /// The distancing trajectory as a standalone path.
    pub fn h_path(&self) -> SamplePath {
        let cut = self.absorbed_at_h.map_or(self.pairs.len(), |t| t + 1);
        let states = self.pairs[..cut].iter().map(|(h, _)| h.clone()).collect();
        SamplePath::from_recorded(states, self.horizon).expect("recorded h path is valid")
    }

    /// The benchmark trajectory as a standalone path.
    pub fn g_path(&self) -> SamplePath {
        let states = self.pairs.iter().map(|(_, g)| g.clone()).collect();
        SamplePath::from_recorded(states, self.horizon).expect("recorded g path is valid")
    }
}

/// Runs the coupling from a shared initial state until the benchmark path
/// absorbs or the horizon is reached. Once the distancing path absorbs it
/// stays at the all-susceptible state while the benchmark path continues
/// under its own law, which the coupling table produces automatically.
pub fn simulate_coupled(
    init: &EpidemicState,
    networks: &Networks,
    params: &EpidemicParams,
    horizon: usize,
    rng: &mut SimRng,
) -> Result<CoupledPath, CouplingError> {
    assert_eq!(init.n(), networks.n(), "state/network size mismatch");
    let mut pairs = vec![(init.clone(), init.clone())];
    let absorbed = init.is_absorbed();
    let mut absorbed_at_h = absorbed.then_some(0);
    let mut absorbed_at_g = absorbed.then_some(0);
    let (mut x, mut y) = (init.clone(), init.clone());
    let mut t = 0;
    while absorbed_at_g.is_none() && t < horizon {
        let (nx, ny) = coupled_step(&x, &y, networks, params, rng)?;
        x = nx;
        y = ny;
        t += 1;
        if absorbed_at_h.is_none() && x.is_absorbed() {
            absorbed_at_h = Some(t);
        }
        if y.is_absorbed() {
            absorbed_at_g = Some(t);
        }
        pairs.push((x.clone(), y.clone()));
    }
    Ok(CoupledPath {
        pairs,
        horizon,
        absorbed_at_h,
        absorbed_at_g,
    })
}

/// Result of exhaustive marginal verification.
#[derive(Debug, Clone, Copy)]
pub struct MarginalReport {
    pub n: usize,
    /// Ordered state pairs `x <= y` enumerated.
    pub ordered_pairs: usize,
    pub max_abs_deviation: f64,
}

/// Enumerates, for every ordered state pair `x <= y` and every state `w`,
/// the joint-table sums over successors of `w` (respectively predecessors)
/// and compares them against the exact distancing row at `x` and benchmark
/// row at `y`. Feasible for up to [`MAX_VERIFY_NODES`] nodes.
pub fn verify_coupling_marginals_exact(
    networks: &Networks,
    params: &EpidemicParams,
) -> Result<MarginalReport, CouplingError> {
    let n = networks.n();
    if n > MAX_VERIFY_NODES {
        return Err(CouplingError::TooManyNodes(n));
    }
    let size = 1usize << n;
    let kd = exact_transition_matrix(networks, params, ChainKind::Distancing)?;
    let k = exact_transition_matrix(networks, params, ChainKind::Benchmark)?;

    let mut max_dev = 0.0f64;
    let mut ordered_pairs = 0;
    for x_idx in 0..size {
        for y_idx in 0..size {
            // x <= y iff x has no bit outside y
            if x_idx & !y_idx != 0 {
                continue;
            }
            ordered_pairs += 1;
            let x = EpidemicState::from_index(n, x_idx);
            let y = EpidemicState::from_index(n, y_idx);
            let tables: Vec<NodeCouplingTable> = (0..n)
                .map(|i| node_coupling_table(&x, &y, networks, params, i))
                .collect::<Result<_, _>>()?;

            let joint = |dist_next: usize, bench_next: usize| -> f64 {
                let mut p = 1.0;
                for (i, table) in tables.iter().enumerate() {
                    p *= table.prob((dist_next >> i) & 1 == 1, (bench_next >> i) & 1 == 1);
                }
                p
            };

            for w in 0..size {
                let mut dist_marginal = 0.0;
                let mut bench_marginal = 0.0;
                for other in 0..size {
                    if w & !other == 0 {
                        // other >= w: sum over benchmark successors
                        dist_marginal += joint(w, other);
                    }
                    if other & !w == 0 {
                        // other <= w: sum over distancing predecessors
                        bench_marginal += joint(other, w);
                    }
                }
                max_dev = max_dev.max((dist_marginal - kd.prob(x_idx, w)).abs());
                max_dev = max_dev.max((bench_marginal - k.prob(y_idx, w)).abs());
            }
        }
    }
    Ok(MarginalReport {
        n,
        ordered_pairs,
        max_abs_deviation: max_dev,
    })
}

/// How coupled replicas draw their shared initial state.
#[derive(Debug, Clone)]
pub enum InitSpec {
    Fixed(EpidemicState),
    /// One node, uniform over `0..n`, initially infected (one uniform
    /// draw before the first step).
    OneRandomInfected,
}

impl InitSpec {
    pub fn draw(&self, n: usize, rng: &mut SimRng) -> EpidemicState {
        match self {
            InitSpec::Fixed(state) => {
                assert_eq!(state.n(), n, "init state size mismatch");
                state.clone()
            }
            InitSpec::OneRandomInfected => {
                EpidemicState::single_infected(n, rng.gen_range(0..n))
            }
        }
    }
}

/// Monte Carlo estimate of `E[Z(g)] - E[Z(h)]` over coupled pairs.
#[derive(Debug, Clone)]
pub struct GapEstimate {
    pub metric: String,
    pub gap: f64,
    pub stderr: f64,
    /// Replicas entering the estimate (censored pairs are excluded).
    pub replicas_used: usize,
    pub censored_excluded: usize,
    /// Whether the per-replica threshold-count identity matched the direct
    /// difference on every replica (it must; a mismatch is an error).
    pub tau_sum_agreement: bool,
}

/// Estimates the expectation gap of a registered increasing metric from
/// `replicas` coupled pairs.
///
/// Per replica the direct difference `Z(g) - Z(h)` is checked for
/// nonnegativity and against the telescoping threshold count
/// `#{tau : Z(g) > tau >= Z(h)}`, exactly in integer arithmetic. Replicas
/// where either side is censored are excluded and counted.
pub fn expectation_gap(
    metric: &PathMetric,
    init: &InitSpec,
    networks: &Networks,
    params: &EpidemicParams,
    horizon: usize,
    replicas: usize,
    rng: &mut SimRng,
) -> Result<GapEstimate, CouplingError> {
    if !metric.is_registered_increasing() {
        return Err(CouplingError::UnregisteredMetric(metric.name().to_string()));
    }
    if replicas < 2 {
        return Err(CouplingError::InvalidParameter(
            "need at least 2 replicas".into(),
        ));
    }
    let mut gaps: Vec<f64> = Vec::with_capacity(replicas);
    let mut censored_excluded = 0;
    for r in 0..replicas {
        let start = init.draw(networks.n(), rng);
        let coupled = simulate_coupled(&start, networks, params, horizon, rng)?;
        let g_value = metric.evaluate(&coupled.g_path())?;
        let h_value = metric.evaluate(&coupled.h_path())?;
        let (MetricValue::Value(g), MetricValue::Value(h)) = (g_value, h_value) else {
            censored_excluded += 1;
            continue;
        };
        if h > g {
            return Err(CouplingError::InvariantViolation(format!(
                "replica {r}: {} on the distancing path ({h}) exceeds the benchmark path ({g})",
                metric.name()
            )));
        }
        let tau_sum = (0..g).filter(|&tau| g > tau && h <= tau).count() as u64;
        if tau_sum != g - h {
            return Err(CouplingError::InvariantViolation(format!(
                "replica {r}: threshold count {tau_sum} differs from direct gap {}",
                g - h
            )));
        }
        gaps.push((g - h) as f64);
    }
    if gaps.len() < 2 {
        return Err(CouplingError::InvalidParameter(format!(
            "only {} uncensored replicas; need at least 2",
            gaps.len()
        )));
    }
    let used = gaps.len();
    let mean = gaps.iter().sum::<f64>() / used as f64;
    let var = gaps.iter().map(|g| (g - mean) * (g - mean)).sum::<f64>() / (used - 1) as f64;
    Ok(GapEstimate {
        metric: metric.name().to_string(),
        gap: mean,
        stderr: (var / used as f64).sqrt(),
        replicas_used: used,
        censored_excluded,
        tau_sum_agreement: true,
    })
}

/// An increasing `{0,1}` functional on paths: the complement-free sets it
/// indicates are upper sets of the path order.
#[derive(Debug, Clone)]
pub struct UpperSetIndicator {
    name: String,
    kind: IndicatorKind,
}

#[derive(Debug, Clone)]
enum IndicatorKind {
    AllPaths,
    MetricExceeds { metric: PathMetric, tau: u64 },
}

impl UpperSetIndicator {
    /// The trivial indicator containing every path.
    pub fn all_paths() -> Self {
        Self {
            name: "all_paths".into(),
            kind: IndicatorKind::AllPaths,
        }
    }

    /// The upper set `{ Z > tau }` of a registered increasing metric.
    pub fn metric_exceeds(metric: PathMetric, tau: u64) -> Result<Self, CouplingError> {
        if !metric.is_registered_increasing() {
            return Err(CouplingError::UnregisteredMetric(metric.name().to_string()));
        }
        Ok(Self {
            name: format!("{}>{tau}", metric.name()),
            kind: IndicatorKind::MetricExceeds { metric, tau },
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// Evaluates membership. A censored absorption time means the path
    /// survived past the horizon, which decides `Z > tau` for any
    /// `tau <= horizon`.
    fn contains(&self, path: &SamplePath) -> Result<bool, CouplingError> {
        match &self.kind {
            IndicatorKind::AllPaths => Ok(true),
            IndicatorKind::MetricExceeds { metric, tau } => {
                match metric.evaluate(path)? {
                    MetricValue::Value(v) => Ok(v > *tau),
                    MetricValue::Censored => {
                        if *tau <= path.horizon() as u64 {
                            Ok(true)
                        } else {
                            Err(CouplingError::InvalidParameter(format!(
                                "threshold {tau} exceeds the horizon {}",
                                path.horizon()
                            )))
                        }
                    }
                }
            }
        }
    }
}

/// Empirical upper-set probabilities under both marginals of the coupling.
#[derive(Debug, Clone)]
pub struct UpperSetProbe {
    pub indicator: String,
    /// Benchmark-marginal probability of the upper set.
    pub mu_prob: f64,
    /// Distancing-marginal probability of the upper set.
    pub nu_prob: f64,
    /// `mu_prob - nu_prob`; equals the empirical frequency of pairs with
    /// `h` outside and `g` inside the set, hence nonnegative.
    pub difference: f64,
    pub replicas: usize,
}

/// Estimates the two marginal probabilities of an upper set from coupled
/// replicas and their difference.
pub fn dominance_upper_set_probe(
    indicator: &UpperSetIndicator,
    init: &InitSpec,
    networks: &Networks,
    params: &EpidemicParams,
    horizon: usize,
    replicas: usize,
    rng: &mut SimRng,
) -> Result<UpperSetProbe, CouplingError> {
    if replicas == 0 {
        return Err(CouplingError::InvalidParameter(
            "need at least 1 replica".into(),
        ));
    }
    let mut g_in = 0u64;
    let mut h_in = 0u64;
    let mut flips = 0u64;
    for r in 0..replicas {
        let start = init.draw(networks.n(), rng);
        let coupled = simulate_coupled(&start, networks, params, horizon, rng)?;
        let g_member = indicator.contains(&coupled.g_path())?;
        let h_member = indicator.contains(&coupled.h_path())?;
        if h_member && !g_member {
            return Err(CouplingError::InvariantViolation(format!(
                "replica {r}: distancing path is in upper set {} but benchmark path is not",
                indicator.name()
            )));
        }
        g_in += g_member as u64;
        h_in += h_member as u64;
        flips += (g_member && !h_member) as u64;
    }
    debug_assert_eq!(g_in - h_in, flips);
    let r = replicas as f64;
    Ok(UpperSetProbe {
        indicator: indicator.name().to_string(),
        mu_prob: g_in as f64 / r,
        nu_prob: h_in as f64 / r,
        difference: flips as f64 / r,
        replicas,
    })
}
