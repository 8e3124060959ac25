//! Epidemic cost metrics over sample paths.
//!
//! Every built-in metric is increasing with respect to the componentwise
//! path order (fewer infections never cost more), which is what makes it
//! usable in coupled expectation-gap estimates. [`certify_monotone`] spot
//! checks that property on randomized ordered path pairs.

use std::sync::Arc;

use rand::Rng;
use thiserror::Error;

use crate::dynamics::{EpidemicState, SamplePath};
use crate::rng::SimRng;

#[derive(Debug, Error)]
pub enum MetricError {
    #[error("window {window} exceeds the path horizon {horizon}")]
    WindowExceedsHorizon { window: usize, horizon: usize },
    #[error("path too short: {0}")]
    PathTooShort(String),
    #[error("metric {metric} is not monotone: ordered pair {pair} evaluated to {h_value} > {g_value}")]
    MonotoneViolation {
        metric: String,
        pair: usize,
        h_value: u64,
        g_value: u64,
    },
}

/// Value of an integer path metric; `Censored` marks quantities undefined
/// on a horizon-capped path (an unabsorbed absorption time).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MetricValue {
    Value(u64),
    Censored,
}

impl MetricValue {
    pub fn value(&self) -> Option<u64> {
        match self {
            MetricValue::Value(v) => Some(*v),
            MetricValue::Censored => None,
        }
    }

    pub fn is_censored(&self) -> bool {
        matches!(self, MetricValue::Censored)
    }
}

/// First time the path hits the all-susceptible state, or `Censored` when
/// it survives past the horizon.
pub fn absorption_time(path: &SamplePath) -> MetricValue {
    match path.absorbed_at() {
        Some(t) => MetricValue::Value(t as u64),
        None => MetricValue::Censored,
    }
}

/// Total infections summed over `t = 0..=m`.
pub fn social_cost(path: &SamplePath, m: usize) -> Result<u64, MetricError> {
    if m > path.horizon() {
        return Err(MetricError::WindowExceedsHorizon {
            window: m,
            horizon: path.horizon(),
        });
    }
    Ok((0..=m)
        .map(|t| path.infected_at(t).expect("t <= horizon") as u64)
        .sum())
}

/// Number of distinct nodes infected at any time in `t = 0..=m`,
/// including the initially infected.
pub fn epidemic_spread(path: &SamplePath, m: usize) -> Result<u64, MetricError> {
    if m > path.horizon() {
        return Err(MetricError::WindowExceedsHorizon {
            window: m,
            horizon: path.horizon(),
        });
    }
    let last = m.min(path.len() - 1);
    let mut ever = vec![false; path.n()];
    for t in 0..=last {
        let state = path.state(t).expect("recorded");
        for (i, flag) in ever.iter_mut().enumerate() {
            *flag |= state.bit(i);
        }
    }
    Ok(ever.iter().filter(|&&b| b).count() as u64)
}

/// Mean infected fraction over the latter half of the recorded path:
/// indices `ceil(L/2) ..= L-1` of a length-`L` recording.
pub fn endemic_fraction(path: &SamplePath) -> Result<f64, MetricError> {
    let len = path.len();
    if len < 2 {
        return Err(MetricError::PathTooShort(format!(
            "need at least 2 recorded states, got {len}"
        )));
    }
    let start = len.div_ceil(2);
    let n = path.n() as f64;
    let sum: f64 = (start..len)
        .map(|t| path.state(t).expect("recorded").infected_count() as f64 / n)
        .sum();
    Ok(sum / (len - start) as f64)
}

type CustomEval = Arc<dyn Fn(&SamplePath) -> MetricValue + Send + Sync>;

#[derive(Clone)]
enum MetricKind {
    AbsorptionTime,
    SocialCost { window: usize },
    EpidemicSpread { window: usize },
    Custom(CustomEval),
}

/// A named integer path metric.
///
/// The three built-in constructors are registered as increasing and are
/// accepted by the coupled estimators; [`PathMetric::custom`] metrics are
/// not, since nothing vouches for their monotonicity.
#[derive(Clone)]
pub struct PathMetric {
    name: String,
    kind: MetricKind,
}

impl std::fmt::Debug for PathMetric {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("PathMetric")
            .field("name", &self.name)
            .finish()
    }
}

impl PathMetric {
    pub fn absorption_time() -> Self {
        Self {
            name: "absorption_time".into(),
            kind: MetricKind::AbsorptionTime,
        }
    }

    pub fn social_cost(window: usize) -> Self {
        Self {
            name: format!("social_cost_m{window}"),
            kind: MetricKind::SocialCost { window },
        }
    }

    pub fn epidemic_spread(window: usize) -> Self {
        Self {
            name: format!("epidemic_spread_m{window}"),
            kind: MetricKind::EpidemicSpread { window },
        }
    }

    /// An unregistered metric; rejected by estimators that require a
    /// certified increasing functional.
    pub fn custom(
        name: impl Into<String>,
        evaluate: impl Fn(&SamplePath) -> MetricValue + Send + Sync + 'static,
    ) -> Self {
        Self {
            name: name.into(),
            kind: MetricKind::Custom(Arc::new(evaluate)),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// Whether this metric belongs to the registry of increasing
    /// functionals.
    pub fn is_registered_increasing(&self) -> bool {
        !matches!(self.kind, MetricKind::Custom(_))
    }

    pub fn evaluate(&self, path: &SamplePath) -> Result<MetricValue, MetricError> {
        match &self.kind {
            MetricKind::AbsorptionTime => Ok(absorption_time(path)),
            MetricKind::SocialCost { window } => {
                social_cost(path, *window).map(MetricValue::Value)
            }
            MetricKind::EpidemicSpread { window } => {
                epidemic_spread(path, *window).map(MetricValue::Value)
            }
            MetricKind::Custom(f) => Ok(f(path)),
        }
    }
}

/// Record of a passed randomized monotonicity check.
#[derive(Debug, Clone)]
pub struct MonotoneCertificate {
    pub metric: String,
    /// Ordered pairs generated.
    pub pairs_checked: usize,
    /// Pairs where both evaluations were uncensored and comparable.
    pub pairs_compared: usize,
}

/// Builds a dominated path from `path` by flipping each infected bit to
/// susceptible independently with probability `flip_prob`; the result is
/// truncated at its first all-susceptible state so it remains a valid
/// absorbed recording.
pub fn degrade_path(path: &SamplePath, flip_prob: f64, rng: &mut SimRng) -> SamplePath {
    let mut states: Vec<EpidemicState> = Vec::with_capacity(path.len());
    for s in path.states() {
        let bits = (0..s.n())
            .map(|i| s.bit(i) && rng.gen::<f64>() >= flip_prob)
            .collect();
        let degraded = EpidemicState::from_bits(bits);
        let absorbed = degraded.is_absorbed();
        states.push(degraded);
        if absorbed {
            break;
        }
    }
    SamplePath::from_recorded(states, path.horizon()).expect("degraded recording is valid")
}

/// Checks `metric(h) <= metric(g)` over `pairs` randomized ordered pairs
/// `(h, g)`, where each `h` degrades a base path with a uniformly drawn
/// flip probability. Pairs with a censored side are counted but not
/// compared (censoring only ever hides values beyond the horizon).
pub fn certify_monotone(
    metric: &PathMetric,
    base_paths: &[SamplePath],
    pairs: usize,
    rng: &mut SimRng,
) -> Result<MonotoneCertificate, MetricError> {
    assert!(!base_paths.is_empty(), "need at least one base path");
    let mut compared = 0;
    for k in 0..pairs {
        let g = &base_paths[k % base_paths.len()];
        let flip_prob = rng.gen::<f64>();
        let h = degrade_path(g, flip_prob, rng);
        debug_assert!(ordered(&h, g));
        let gv = metric.evaluate(g)?;
        let hv = metric.evaluate(&h)?;
        if let (Some(hv), Some(gv)) = (hv.value(), gv.value()) {
            if hv > gv {
                return Err(MetricError::MonotoneViolation {
                    metric: metric.name().to_string(),
                    pair: k,
                    h_value: hv,
                    g_value: gv,
                });
            }
            compared += 1;
        }
    }
    Ok(MonotoneCertificate {
        metric: metric.name().to_string(),
        pairs_checked: pairs,
        pairs_compared: compared,
    })
}

fn ordered(h: &SamplePath, g: &SamplePath) -> bool {
    h.states()
        .iter()
        .zip(g.states())
        .all(|(a, b)| a.leq(b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{simulate, ChainKind, EpidemicParams, Networks};
    use crate::graph::Graph;
    use crate::rng::rng_from_seed;

    fn constant_path(state: EpidemicState, len: usize, horizon: usize) -> SamplePath {
        SamplePath::from_recorded(vec![state; len], horizon).unwrap()
    }

    #[test]
    fn absorption_time_examples() {
        let clear = SamplePath::from_recorded(vec![EpidemicState::all_susceptible(3)], 10).unwrap();
        assert_eq!(absorption_time(&clear), MetricValue::Value(0));

        let alive = constant_path(EpidemicState::all_infected(3), 11, 10);
        assert_eq!(absorption_time(&alive), MetricValue::Censored);
    }

    #[test]
    fn absorption_time_single_node_geometric_mean() {
        let nets = Networks::shared(Graph::empty(1).unwrap());
        let p = EpidemicParams::new(0.5, 0.5, 0.5).unwrap();
        let mut rng = rng_from_seed(21);
        let reps = 1_000_000u64;
        let mut sum = 0u64;
        let mut sq = 0.0f64;
        for _ in 0..reps {
            let path = simulate(
                &EpidemicState::all_infected(1),
                &nets,
                &p,
                ChainKind::Benchmark,
                10_000,
                &mut rng,
            );
            let t = absorption_time(&path).value().expect("absorbs");
            sum += t;
            sq += (t * t) as f64;
        }
        let mean = sum as f64 / reps as f64;
        let var = sq / reps as f64 - mean * mean;
        let se = (var / reps as f64).sqrt();
        assert!(
            (mean - 2.0).abs() <= 3.0 * se,
            "mean {mean} is {} SEs from 2",
            (mean - 2.0).abs() / se
        );
    }

    #[test]
    fn social_cost_examples() {
        let clear = constant_path(EpidemicState::all_susceptible(5), 11, 20);
        assert_eq!(social_cost(&clear, 10).unwrap(), 0);

        let full = constant_path(EpidemicState::all_infected(5), 11, 10);
        assert_eq!(social_cost(&full, 10).unwrap(), 55);
        assert!(social_cost(&full, 11).is_err());
        assert!(social_cost(&full, 10).unwrap() <= 5 * 11);
    }

    #[test]
    fn social_cost_extends_absorbed_paths_with_zeros() {
        let states = vec![
            EpidemicState::from_bits(vec![true, true]),
            EpidemicState::from_bits(vec![true, false]),
            EpidemicState::all_susceptible(2),
        ];
        let path = SamplePath::from_recorded(states, 100).unwrap();
        assert_eq!(social_cost(&path, 100).unwrap(), 3);
    }

    #[test]
    fn epidemic_spread_examples() {
        let clear = constant_path(EpidemicState::all_susceptible(4), 5, 10);
        assert_eq!(epidemic_spread(&clear, 4).unwrap(), 0);

        // seed heals immediately, no transmission
        let states = vec![
            EpidemicState::single_infected(4, 2),
            EpidemicState::all_susceptible(4),
        ];
        let path = SamplePath::from_recorded(states, 10).unwrap();
        assert_eq!(epidemic_spread(&path, 10).unwrap(), 1);
    }

    #[test]
    fn epidemic_spread_near_deterministic_limit() {
        // beta ~ 1, delta ~ 0 on a path graph: middle seed reaches everyone by t = 2
        let nets = Networks::shared(Graph::path(3).unwrap());
        let p = EpidemicParams::new(1.0 - 1e-12, 1e-12, 0.0).unwrap();
        let mut rng = rng_from_seed(5);
        let run = simulate(
            &EpidemicState::single_infected(3, 1),
            &nets,
            &p,
            ChainKind::Benchmark,
            2,
            &mut rng,
        );
        assert_eq!(epidemic_spread(&run, 2).unwrap(), 3);
    }

    #[test]
    fn endemic_fraction_examples() {
        let full = constant_path(EpidemicState::all_infected(4), 8, 7);
        assert_eq!(endemic_fraction(&full).unwrap(), 1.0);

        // absorbed early: latter half of the recording is all susceptible
        let states = vec![
            EpidemicState::single_infected(4, 0),
            EpidemicState::all_susceptible(4),
            EpidemicState::all_susceptible(4),
            EpidemicState::all_susceptible(4),
        ];
        let path = SamplePath::from_recorded(states, 10).unwrap();
        assert_eq!(endemic_fraction(&path).unwrap(), 0.0);

        let single = SamplePath::from_recorded(vec![EpidemicState::all_infected(2)], 5).unwrap();
        assert!(endemic_fraction(&single).is_err());
    }

    #[test]
    fn endemic_fraction_window_rule() {
        // length 5 recording: window is indices 3..=4
        let states = vec![
            EpidemicState::all_infected(2),
            EpidemicState::all_infected(2),
            EpidemicState::all_infected(2),
            EpidemicState::from_bits(vec![true, false]),
            EpidemicState::from_bits(vec![true, false]),
        ];
        let path = SamplePath::from_recorded(states, 4).unwrap();
        assert_eq!(endemic_fraction(&path).unwrap(), 0.5);
    }

    fn simulated_bases() -> Vec<SamplePath> {
        let contact = crate::graph::gen_erdos_renyi(12, 0.3, 40).unwrap();
        let nets = Networks::shared(crate::graph::largest_connected_component(&contact));
        let p = EpidemicParams::new(0.4, 0.3, 0.5).unwrap();
        let mut rng = rng_from_seed(77);
        (0..50)
            .map(|_| {
                simulate(
                    &EpidemicState::all_infected(nets.n()),
                    &nets,
                    &p,
                    ChainKind::Distancing,
                    30,
                    &mut rng,
                )
            })
            .collect()
    }

    #[test]
    fn built_in_metrics_certify_monotone() {
        let bases = simulated_bases();
        let mut rng = rng_from_seed(78);
        for metric in [
            PathMetric::absorption_time(),
            PathMetric::social_cost(30),
            PathMetric::epidemic_spread(30),
        ] {
            let cert = certify_monotone(&metric, &bases, 10_000, &mut rng).unwrap();
            assert_eq!(cert.pairs_checked, 10_000);
            assert!(cert.pairs_compared > 0);
        }
    }

    #[test]
    fn non_monotone_custom_metric_fails_certification() {
        // time of peak infection is not increasing in the path order
        let peak_time = PathMetric::custom("peak_time", |path: &SamplePath| {
            let best = (0..path.len())
                .max_by_key(|&t| path.state(t).unwrap().infected_count())
                .unwrap_or(0);
            MetricValue::Value(best as u64)
        });
        assert!(!peak_time.is_registered_increasing());
        let bases = simulated_bases();
        let mut rng = rng_from_seed(79);
        match certify_monotone(&peak_time, &bases, 10_000, &mut rng) {
            Err(MetricError::MonotoneViolation { metric, .. }) => {
                assert_eq!(metric, "peak_time");
            }
            other => panic!("expected a monotonicity violation, got {other:?}"),
        }
    }

    #[test]
    fn registry_flags() {
        assert!(PathMetric::absorption_time().is_registered_increasing());
        assert!(PathMetric::social_cost(5).is_registered_increasing());
        assert!(PathMetric::epidemic_spread(5).is_registered_increasing());
        let c = PathMetric::custom("x", |_| MetricValue::Value(0));
        assert!(!c.is_registered_increasing());
    }
}
