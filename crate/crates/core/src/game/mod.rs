//! Positions, firing, full plays, fixed schedules and exhaustive game trees.

mod tree;

use std::fmt;
use std::ops::Index;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::arith::{parse_expr_list, AlgebraicReal, ArithError};
use crate::classify::{classify, Verdict};
use crate::graph::EGcmGraph;

pub use tree::{enumerate_plays, game_tree, GameTree, TreeOptions, Truncation, DEFAULT_MEMO_BUDGET};

pub const DEFAULT_STEP_BUDGET: usize = 10_000;

/// Node and step numbers are 0-based in the fields and 1-based in messages.
#[derive(Clone, Debug, PartialEq, Eq, Error, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum GameError {
    #[error("node {} is not positive and cannot fire", node + 1)]
    IllegalFiring { node: usize },
    #[error("step {}: node {} is not positive and cannot fire", step + 1, node + 1)]
    IllegalFiringAt { step: usize, node: usize },
    #[error("position has {got} entries but the graph has {expected} nodes")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("node {} out of range 1..={n}", node + 1)]
    NodeOutOfRange { node: usize, n: usize },
    #[error("scale factor must be positive")]
    NonPositiveScale,
    #[error("cannot parse position: {0}")]
    Parse(String),
    #[error(transparent)]
    Arith(#[from] ArithError),
}

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Position(Vec<AlgebraicReal>);

impl Position {
    pub fn new(values: Vec<AlgebraicReal>) -> Position {
        Position(values)
    }

    pub fn zeros(n: usize) -> Position {
        Position(vec![AlgebraicReal::zero(); n])
    }

    pub fn ones(n: usize) -> Position {
        Position(vec![AlgebraicReal::one(); n])
    }

    /// The fundamental position omega_i.
    pub fn fundamental(n: usize, i: usize) -> Position {
        let mut p = Position::zeros(n);
        p.0[i] = AlgebraicReal::one();
        p
    }

    /// Population 1 off `j_set` and 0 on it: a point of the cone C_J.
    pub fn cone(n: usize, j_set: &[usize]) -> Position {
        Position(
            (0..n)
                .map(|k| if j_set.contains(&k) { AlgebraicReal::zero() } else { AlgebraicReal::one() })
                .collect(),
        )
    }

    pub fn from_i64s(values: &[i64]) -> Position {
        Position(values.iter().map(|&v| AlgebraicReal::from_i64(v)).collect())
    }

    /// Comma-separated expressions, e.g. `1, 1/2, c(5)`.
    pub fn parse(text: &str) -> Result<Position, GameError> {
        parse_expr_list(text)
            .map(Position)
            .map_err(|e| GameError::Parse(format!("column {}: {}", e.column, e.message)))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn values(&self) -> &[AlgebraicReal] {
        &self.0
    }

    pub fn into_values(self) -> Vec<AlgebraicReal> {
        self.0
    }

    pub fn is_dominant(&self) -> bool {
        self.0.iter().all(|v| v.sign() >= 0)
    }

    pub fn is_strongly_dominant(&self) -> bool {
        self.0.iter().all(AlgebraicReal::is_positive)
    }

    pub fn is_nonzero(&self) -> bool {
        self.0.iter().any(|v| !v.is_zero())
    }

    pub fn positive_nodes(&self) -> Vec<usize> {
        (0..self.0.len()).filter(|&i| self.0[i].is_positive()).collect()
    }

    pub fn first_positive(&self) -> Option<usize> {
        self.0.iter().position(AlgebraicReal::is_positive)
    }

    pub fn is_terminal(&self) -> bool {
        self.first_positive().is_none()
    }

    pub fn try_scale(&self, r: &AlgebraicReal) -> Result<Position, GameError> {
        if !r.is_positive() {
            return Err(GameError::NonPositiveScale);
        }
        Ok(Position(
            self.0.iter().map(|v| v.try_mul(r)).collect::<Result<_, _>>()?,
        ))
    }

    pub fn try_add(&self, other: &Position) -> Result<Position, GameError> {
        if self.len() != other.len() {
            return Err(GameError::DimensionMismatch { expected: self.len(), got: other.len() });
        }
        Ok(Position(
            self.0.iter().zip(&other.0).map(|(a, b)| a.try_add(b)).collect::<Result<_, _>>()?,
        ))
    }

    pub fn negated(&self) -> Position {
        Position(self.0.iter().map(|v| -v).collect())
    }

    /// The entries with the order of nodes reversed.
    pub fn reversed(&self) -> Position {
        Position(self.0.iter().rev().cloned().collect())
    }

    pub fn decimal(&self) -> Vec<f64> {
        self.0.iter().map(AlgebraicReal::approx).collect()
    }
}

impl Index<usize> for Position {
    type Output = AlgebraicReal;

    fn index(&self, i: usize) -> &AlgebraicReal {
        &self.0[i]
    }
}

impl fmt::Display for Position {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for (k, v) in self.0.iter().enumerate() {
            if k > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{v}")?;
        }
        f.write_str(")")
    }
}

impl fmt::Debug for Position {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

#[derive(Serialize)]
struct WirePosition {
    exact: Vec<String>,
    decimal: Vec<f64>,
}

impl Serialize for Position {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        WirePosition {
            exact: self.0.iter().map(ToString::to_string).collect(),
            decimal: self.decimal(),
        }
        .serialize(s)
    }
}

pub fn fundamental_position(g: &EGcmGraph, i: usize) -> Position {
    Position::fundamental(g.n(), i)
}

pub fn scale(pos: &Position, r: &AlgebraicReal) -> Result<Position, GameError> {
    pos.try_scale(r)
}

fn check_dims(g: &EGcmGraph, pos: &Position) -> Result<(), GameError> {
    if pos.len() != g.n() {
        return Err(GameError::DimensionMismatch { expected: g.n(), got: pos.len() });
    }
    Ok(())
}

/// lambda_j -> lambda_j - M_ij lambda_i for every j, regardless of the sign at i.
pub fn fire_unchecked(g: &EGcmGraph, pos: &Position, i: usize) -> Result<Position, ArithError> {
    let li = pos.0[i].clone();
    let mut out = pos.0.clone();
    out[i] = -&li;
    for &j in g.neighbors(i) {
        out[j] = out[j].try_sub(&g.amplitude(i, j).try_mul(&li)?)?;
    }
    Ok(Position(out))
}

pub fn fire(g: &EGcmGraph, pos: &Position, i: usize) -> Result<Position, GameError> {
    check_dims(g, pos)?;
    if i >= g.n() {
        return Err(GameError::NodeOutOfRange { node: i, n: g.n() });
    }
    if !pos.0[i].is_positive() {
        return Err(GameError::IllegalFiring { node: i });
    }
    Ok(fire_unchecked(g, pos, i)?)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Strategy {
    MinIndex,
    Random(u64),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StepBudget {
    Auto,
    Limit(usize),
}

#[derive(Clone, Debug)]
pub struct PlayOptions {
    pub strategy: Strategy,
    pub budget: StepBudget,
    /// Used by `Auto` when the classifier neither bounds nor certifies the game.
    pub default_budget: usize,
    pub store_positions: bool,
}

impl Default for PlayOptions {
    fn default() -> Self {
        PlayOptions {
            strategy: Strategy::MinIndex,
            budget: StepBudget::Auto,
            default_budget: DEFAULT_STEP_BUDGET,
            store_positions: false,
        }
    }
}

impl PlayOptions {
    pub fn strategy(mut self, s: Strategy) -> Self {
        self.strategy = s;
        self
    }

    pub fn limit(mut self, steps: usize) -> Self {
        self.budget = StepBudget::Limit(steps);
        self
    }

    pub fn store_positions(mut self, on: bool) -> Self {
        self.store_positions = on;
        self
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Outcome {
    Converged { terminal: Position, length: usize },
    StepLimitReached { last: Position, steps: usize },
    CertifiedDivergent { certificate: Verdict },
}

#[derive(Clone, Debug)]
pub struct GameTrace {
    pub graph_digest: String,
    pub initial: Position,
    pub firings: Vec<usize>,
    /// Position after each firing, when stored.
    pub positions: Option<Vec<Position>>,
    pub outcome: Outcome,
}

impl GameTrace {
    pub fn is_converged(&self) -> bool {
        matches!(self.outcome, Outcome::Converged { .. })
    }

    pub fn terminal(&self) -> Option<&Position> {
        match &self.outcome {
            Outcome::Converged { terminal, .. } => Some(terminal),
            _ => None,
        }
    }

    pub fn length(&self) -> usize {
        self.firings.len()
    }

    pub fn last_position(&self) -> &Position {
        match &self.outcome {
            Outcome::Converged { terminal, .. } => terminal,
            Outcome::StepLimitReached { last, .. } => last,
            Outcome::CertifiedDivergent { .. } => &self.initial,
        }
    }

    pub fn outcome_tag(&self) -> &'static str {
        match self.outcome {
            Outcome::Converged { .. } => "converged",
            Outcome::StepLimitReached { .. } => "step-limit-reached",
            Outcome::CertifiedDivergent { .. } => "certified-divergent",
        }
    }
}

#[derive(Serialize)]
struct WireStep<'a> {
    step: usize,
    node: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    position: Option<&'a Position>,
}

#[derive(Serialize)]
struct WireTrace<'a> {
    graph_digest: &'a str,
    initial: &'a Position,
    steps: Vec<WireStep<'a>>,
    outcome: &'static str,
    terminal: Option<&'a Position>,
    length: usize,
    last: &'a Position,
    #[serde(skip_serializing_if = "Option::is_none")]
    certificate: Option<&'a Verdict>,
}

/// Steps and nodes are 1-based in JSON.
impl Serialize for GameTrace {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let steps = self
            .firings
            .iter()
            .enumerate()
            .map(|(k, &node)| WireStep {
                step: k + 1,
                node: node + 1,
                position: self.positions.as_ref().map(|p| &p[k]),
            })
            .collect();
        WireTrace {
            graph_digest: &self.graph_digest,
            initial: &self.initial,
            steps,
            outcome: self.outcome_tag(),
            terminal: self.terminal(),
            length: self.length(),
            last: self.last_position(),
            certificate: match &self.outcome {
                Outcome::CertifiedDivergent { certificate } => Some(certificate),
                _ => None,
            },
        }
        .serialize(s)
    }
}

enum Budget {
    Steps(usize),
    Divergent(Verdict),
}

fn resolve_budget(g: &EGcmGraph, pos: &Position, opts: &PlayOptions) -> Budget {
    match opts.budget {
        StepBudget::Limit(k) => Budget::Steps(k),
        StepBudget::Auto => {
            let verdict = classify(g);
            if let Some(l) = verdict.l_w0() {
                Budget::Steps(l as usize + 1)
            } else if g.is_connected() && pos.is_dominant() && pos.is_nonzero() {
                Budget::Divergent(verdict)
            } else {
                Budget::Steps(opts.default_budget)
            }
        }
    }
}

/// Fires positive nodes chosen by the strategy until none is positive or
/// the budget runs out.
pub fn play(g: &EGcmGraph, pos: &Position, opts: &PlayOptions) -> Result<GameTrace, GameError> {
    check_dims(g, pos)?;
    let mut trace = GameTrace {
        graph_digest: g.digest(),
        initial: pos.clone(),
        firings: Vec::new(),
        positions: opts.store_positions.then(Vec::new),
        outcome: Outcome::StepLimitReached { last: pos.clone(), steps: 0 },
    };
    let budget = match resolve_budget(g, pos, opts) {
        Budget::Steps(k) => k,
        Budget::Divergent(certificate) => {
            trace.outcome = Outcome::CertifiedDivergent { certificate };
            return Ok(trace);
        }
    };
    let mut rng = match opts.strategy {
        Strategy::Random(seed) => Some(ChaCha8Rng::seed_from_u64(seed)),
        Strategy::MinIndex => None,
    };
    let mut cur = pos.clone();
    loop {
        let choice = match &mut rng {
            None => cur.first_positive(),
            Some(rng) => {
                let positives = cur.positive_nodes();
                (!positives.is_empty()).then(|| positives[rng.random_range(0..positives.len())])
            }
        };
        let Some(i) = choice else {
            trace.outcome = Outcome::Converged { length: trace.firings.len(), terminal: cur };
            return Ok(trace);
        };
        if trace.firings.len() >= budget {
            trace.outcome = Outcome::StepLimitReached { steps: trace.firings.len(), last: cur };
            return Ok(trace);
        }
        cur = fire_unchecked(g, &cur, i)?;
        trace.firings.push(i);
        if let Some(ps) = &mut trace.positions {
            ps.push(cur.clone());
        }
    }
}

/// Fires exactly the given nodes in order, storing every intermediate position.
/// Ends in `Converged` when the final position is terminal and in
/// `StepLimitReached` otherwise.
pub fn run_schedule(g: &EGcmGraph, pos: &Position, seq: &[usize]) -> Result<GameTrace, GameError> {
    check_dims(g, pos)?;
    let mut cur = pos.clone();
    let mut positions = Vec::with_capacity(seq.len());
    for (step, &node) in seq.iter().enumerate() {
        if node >= g.n() {
            return Err(GameError::NodeOutOfRange { node, n: g.n() });
        }
        if !cur[node].is_positive() {
            return Err(GameError::IllegalFiringAt { step, node });
        }
        cur = fire_unchecked(g, &cur, node)?;
        positions.push(cur.clone());
    }
    let outcome = if cur.is_terminal() {
        Outcome::Converged { terminal: cur, length: seq.len() }
    } else {
        Outcome::StepLimitReached { last: cur, steps: seq.len() }
    };
    Ok(GameTrace {
        graph_digest: g.digest(),
        initial: pos.clone(),
        firings: seq.to_vec(),
        positions: Some(positions),
        outcome,
    })
}

/// The position after a schedule, or the failing step.
pub fn apply_schedule(g: &EGcmGraph, pos: &Position, seq: &[usize]) -> Result<Position, GameError> {
    let mut cur = pos.clone();
    for (step, &node) in seq.iter().enumerate() {
        if !cur[node].is_positive() {
            return Err(GameError::IllegalFiringAt { step, node });
        }
        cur = fire_unchecked(g, &cur, node)?;
    }
    Ok(cur)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use proptest::prelude::*;
    use super::Strategy;
    use proptest::strategy::Strategy as _;

    fn p(v: &[i64]) -> Position {
        Position::from_i64s(v)
    }

    #[test]
    fn b2_firings() {
        let g = fixtures::b_n(2);
        assert_eq!(fire(&g, &p(&[1, 1]), 0).unwrap(), p(&[-1, 2]));
        assert_eq!(fire(&g, &p(&[1, 1]), 1).unwrap(), p(&[3, -1]));
        assert_eq!(fire(&g, &p(&[-1, 2]), 0).unwrap_err(), GameError::IllegalFiring { node: 0 });
        assert_eq!(fire(&g, &p(&[0, 2]), 0).unwrap_err(), GameError::IllegalFiring { node: 0 });
        assert!(matches!(fire(&g, &p(&[1]), 0), Err(GameError::DimensionMismatch { .. })));
    }

    #[test]
    fn fundamental_firing_spreads_amplitudes() {
        let g = fixtures::d_n(5);
        for i in 0..g.n() {
            let after = fire(&g, &fundamental_position(&g, i), i).unwrap();
            for j in 0..g.n() {
                let expected = if i == j { AlgebraicReal::from_i64(-1) } else { -g.amplitude(i, j) };
                assert_eq!(after[j], expected);
            }
        }
    }

    #[test]
    fn b2_play_and_schedules() {
        let g = fixtures::b_n(2);
        let t = play(&g, &p(&[1, 1]), &PlayOptions::default()).unwrap();
        assert_eq!(t.outcome, Outcome::Converged { terminal: p(&[-1, -1]), length: 4 });
        let e = run_schedule(&g, &p(&[1, 1]), &[0, 0]).unwrap_err();
        assert_eq!(e, GameError::IllegalFiringAt { step: 1, node: 0 });
        assert_eq!(e.to_string(), "step 2: node 1 is not positive and cannot fire");
        let t = run_schedule(&g, &p(&[1, 1]), &[0]).unwrap();
        assert!(matches!(t.outcome, Outcome::StepLimitReached { steps: 1, .. }));
    }

    #[test]
    fn g2_six_steps() {
        let g = fixtures::g2();
        for v in [[1, 1], [2, 5], [7, 3]] {
            let t = play(&g, &p(&v), &PlayOptions::default()).unwrap();
            assert_eq!(t.length(), 6);
            assert!(t.is_converged());
        }
    }

    #[test]
    fn a2_schedule() {
        let g = fixtures::a_n(2);
        let t = run_schedule(&g, &p(&[1, 2]), &[0, 1, 0]).unwrap();
        assert_eq!(t.terminal(), Some(&p(&[-2, -1])));
    }

    #[test]
    fn unit_loop_certified_and_one_pass() {
        let g = fixtures::cycle(3);
        let w = fundamental_position(&g, 0);
        let t = play(&g, &w, &PlayOptions::default()).unwrap();
        assert!(matches!(t.outcome, Outcome::CertifiedDivergent { .. }));
        let t = run_schedule(&g, &w, &[0, 1, 2, 1]).unwrap();
        assert_eq!(t.last_position(), &p(&[3, -1, -1]));
    }

    #[test]
    fn auto_budget_falls_back_on_non_dominant_start() {
        let g = fixtures::cycle(3);
        let t = play(&g, &p(&[1, -5, 0]), &PlayOptions { default_budget: 50, ..Default::default() }).unwrap();
        assert!(!matches!(t.outcome, Outcome::CertifiedDivergent { .. }));
    }

    #[test]
    fn random_strategy_is_reproducible() {
        let g = fixtures::e_n(6);
        let opts = PlayOptions::default().strategy(Strategy::Random(7));
        let a = play(&g, &Position::ones(6), &opts).unwrap();
        let b = play(&g, &Position::ones(6), &opts).unwrap();
        assert_eq!(a.firings, b.firings);
        assert_eq!(a.length(), 36);
    }

    #[test]
    fn constructors() {
        let g = fixtures::b_n(2);
        assert_eq!(fundamental_position(&g, 0), p(&[1, 0]));
        assert_eq!(scale(&p(&[1, 1]), &AlgebraicReal::from_i64(3)).unwrap(), p(&[3, 3]));
        assert_eq!(scale(&p(&[1]), &AlgebraicReal::zero()).unwrap_err(), GameError::NonPositiveScale);
        assert_eq!(Position::cone(3, &[1]), p(&[1, 0, 1]));
        assert_eq!(Position::parse("1, -2, 1/2").unwrap().len(), 3);
        assert!(Position::parse("1,,2").is_err());
    }

    #[test]
    fn trace_json_shape() {
        let g = fixtures::b_n(2);
        let t = play(&g, &p(&[1, 1]), &PlayOptions::default().store_positions(true)).unwrap();
        let s = serde_json::to_string(&t).unwrap();
        let keys = ["\"graph_digest\"", "\"initial\"", "\"steps\"", "\"outcome\"", "\"terminal\"", "\"length\""];
        let idx: Vec<usize> = keys.iter().map(|k| s.find(k).unwrap()).collect();
        assert!(idx.windows(2).all(|w| w[0] < w[1]));
        let v: serde_json::Value = serde_json::from_str(&s).unwrap();
        assert_eq!(v["steps"][0]["node"], 1);
        assert_eq!(v["steps"][0]["position"]["exact"], serde_json::json!(["-1", "2"]));
        assert_eq!(v["terminal"]["decimal"], serde_json::json!([-1.0, -1.0]));
        assert_eq!(v["outcome"], "converged");
    }

    fn dominant_rational(n: usize) -> impl proptest::strategy::Strategy<Value = Position> {
        proptest::collection::vec((0i64..=6, 1i64..=4), n)
            .prop_map(|v| Position::new(v.into_iter().map(|(a, b)| AlgebraicReal::from_ratio(a, b)).collect()))
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn firing_twice_is_illegal(pos in dominant_rational(4), i in 0usize..4) {
            let g = fixtures::b_n(4);
            if pos[i].is_positive() {
                let once = fire(&g, &pos, i).unwrap();
                prop_assert_eq!(&once[i], &-&pos[i]);
                prop_assert!(fire(&g, &once, i).is_err());
            }
        }

        #[test]
        fn scaling_preserves_schedules(pos in dominant_rational(4), r in 1i64..=9, d in 1i64..=5, seed in any::<u64>()) {
            let g = fixtures::f4();
            let t = play(&g, &pos, &PlayOptions::default().strategy(Strategy::Random(seed))).unwrap();
            let r = AlgebraicReal::from_ratio(r, d);
            let scaled = run_schedule(&g, &pos.try_scale(&r).unwrap(), &t.firings).unwrap();
            prop_assert_eq!(scaled.last_position(), &t.last_position().try_scale(&r).unwrap());
        }

        #[test]
        fn every_node_fires_on_connected_graphs(pos in dominant_rational(5), seed in any::<u64>()) {
            let g = fixtures::d_n(5);
            prop_assume!(pos.is_nonzero());
            let t = play(&g, &pos, &PlayOptions::default().strategy(Strategy::Random(seed))).unwrap();
            prop_assert!(t.is_converged());
            for v in 0..5 {
                prop_assert!(t.firings.contains(&v));
            }
        }

        #[test]
        fn finite_type_converges_from_any_position(v in proptest::collection::vec(-5i64..=5, 3)) {
            let g = fixtures::h3();
            let t = play(&g, &p(&v), &PlayOptions::default()).unwrap();
            prop_assert!(t.is_converged());
            prop_assert!(t.length() <= 15);
        }

        #[test]
        fn comparison_below_convergent(pos in dominant_rational(4), cut in proptest::collection::vec(0i64..=3, 4)) {
            let g = fixtures::b_n(4);
            let lower = Position::new(
                pos.values().iter().zip(&cut).map(|(a, &c)| a - &AlgebraicReal::from_i64(c)).collect(),
            );
            prop_assert!(play(&g, &pos, &PlayOptions::default()).unwrap().is_converged());
            prop_assert!(play(&g, &lower, &PlayOptions::default()).unwrap().is_converged());
        }
    }
}
