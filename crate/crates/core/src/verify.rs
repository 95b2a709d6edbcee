//! Runnable checks on concrete instances. Each check returns a
//! [`CheckReport`]; a failing report carries a counterexample that can be
//! replayed with [`run_schedule`] or [`n_set`](crate::coxeter::n_set).

use std::collections::HashSet;
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Serialize, Serializer};

use crate::arith::AlgebraicReal;
use crate::classify::{classify, Family};
use crate::coxeter::{
    adjacency_reachable, coset_representatives, fired_root_functionals, is_adjacency_free, longest_element_length,
    multiple_counts, positive_roots, reduced_words, CoxeterError, Root, RootMode, DEFAULT_GROUP_BUDGET,
};
use crate::fixtures;
use crate::game::{
    game_tree, play, run_schedule, GameTrace, PlayOptions, Position, Strategy, TreeOptions, Truncation,
    DEFAULT_MEMO_BUDGET,
};
use crate::graph::{BondOrder, EGcmGraph};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Pass,
    Fail,
    Inconclusive,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::Inconclusive => "INCONCLUSIVE",
        })
    }
}

/// Replayable evidence. Nodes and letters are 0-based here and 1-based in JSON.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Counterexample {
    /// Replay with `run_schedule(g, position, firings)`.
    Trace { position: Position, firings: Vec<usize> },
    /// Replay with `n_set(g, word)`.
    Word { word: Vec<usize> },
}

impl Counterexample {
    fn trace(t: &GameTrace) -> Counterexample {
        Counterexample::Trace { position: t.initial.clone(), firings: t.firings.clone() }
    }
}

#[derive(Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
enum WireCounterexample<'a> {
    Trace { position: &'a Position, firings: Vec<usize> },
    Word { word: Vec<usize> },
}

impl Serialize for Counterexample {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let one_based = |v: &[usize]| v.iter().map(|i| i + 1).collect();
        match self {
            Counterexample::Trace { position, firings } => {
                WireCounterexample::Trace { position, firings: one_based(firings) }
            }
            Counterexample::Word { word } => WireCounterexample::Word { word: one_based(word) },
        }
        .serialize(s)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CheckReport {
    pub check: String,
    pub instance: String,
    pub status: Status,
    pub detail: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub counterexample: Option<Counterexample>,
}

impl CheckReport {
    fn new(check: &str, instance: String, status: Status, detail: String) -> CheckReport {
        CheckReport { check: check.into(), instance, status, detail, counterexample: None }
    }

    fn with(mut self, cx: Counterexample) -> CheckReport {
        self.counterexample = Some(cx);
        self
    }

    pub fn passed(&self) -> bool {
        self.status == Status::Pass
    }

    /// Prefixes the instance description, typically with a fixture name.
    pub fn on(mut self, name: &str) -> CheckReport {
        self.instance = format!("{name}: {}", self.instance);
        self
    }
}

impl fmt::Display for CheckReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} [{}] {}", self.status, self.check, self.instance, self.detail)
    }
}

fn describe(g: &EGcmGraph) -> String {
    match classify(g).family() {
        Some(f) => f.to_string(),
        None => format!("graph {}", &g.digest()[..12]),
    }
}

fn one_based(v: &[usize]) -> String {
    let s: Vec<String> = v.iter().map(|i| (i + 1).to_string()).collect();
    format!("[{}]", s.join(","))
}

/// A random position with entries p/q, 1 <= p <= 9, 1 <= q <= 4.
pub fn random_strongly_dominant(n: usize, rng: &mut impl Rng) -> Position {
    Position::new(
        (0..n)
            .map(|_| AlgebraicReal::from_ratio(rng.random_range(1..=9), rng.random_range(1..=4)))
            .collect(),
    )
}

/// As [`random_strongly_dominant`] but each entry is zero with probability 1/3.
pub fn random_dominant(n: usize, rng: &mut impl Rng) -> Position {
    Position::new(
        (0..n)
            .map(|_| {
                if rng.random_range(0..3) == 0 {
                    AlgebraicReal::zero()
                } else {
                    AlgebraicReal::from_ratio(rng.random_range(1..=9), rng.random_range(1..=4))
                }
            })
            .collect(),
    )
}

/// Every play from `pos` reaches the same terminal position in the same number of steps.
pub fn check_strong_convergence(g: &EGcmGraph, pos: &Position, opts: &TreeOptions) -> CheckReport {
    const NAME: &str = "strong-convergence";
    let instance = format!("{} from {pos}", describe(g));
    let t = match game_tree(g, pos, opts) {
        Ok(t) => t,
        Err(e) => return CheckReport::new(NAME, instance, Status::Inconclusive, e.to_string()),
    };
    match t.truncation {
        Some(Truncation::MemoBudget) => {
            let d = format!("memo budget of {} positions exhausted", opts.memo_budget);
            return CheckReport::new(NAME, instance, Status::Inconclusive, d);
        }
        Some(Truncation::StepLimit) => {
            let d = format!("some play is longer than {} steps", opts.max_steps);
            return CheckReport::new(NAME, instance, Status::Inconclusive, d);
        }
        None => {}
    }
    if t.has_cycle {
        if t.terminals.is_empty() {
            let d = format!("no play converges ({} reachable positions)", t.reachable_positions);
            return CheckReport::new(NAME, instance, Status::Pass, d);
        }
        let d = "some plays converge while others revisit a position".to_string();
        let r = CheckReport::new(NAME, instance, Status::Fail, d);
        return match t.traces.first() {
            Some(w) => r.with(Counterexample::Trace { position: pos.clone(), firings: w.clone() }),
            None => r,
        };
    }
    if t.unique_terminal() && t.unique_length() {
        let d = format!(
            "{} plays, length {}, terminal {}, {} reachable positions",
            t.plays, t.lengths[0], t.terminals[0], t.reachable_positions
        );
        return CheckReport::new(NAME, instance, Status::Pass, d);
    }
    let d = format!("lengths {:?}, {} distinct terminals", t.lengths, t.terminals.len());
    let mut r = CheckReport::new(NAME, instance, Status::Fail, d);
    let mut first: Option<(usize, Option<Position>)> = None;
    for w in &t.traces {
        let Ok(tr) = run_schedule(g, pos, w) else { continue };
        let key = (w.len(), tr.terminal().cloned());
        match &first {
            None => first = Some(key),
            Some(k) if *k != key => {
                r = r.with(Counterexample::Trace { position: pos.clone(), firings: w.clone() });
                break;
            }
            Some(_) => {}
        }
    }
    r
}

/// If a play from `lambda` converges then so does some play from `lambda_p <= lambda`.
pub fn check_comparison(g: &EGcmGraph, lambda: &Position, lambda_p: &Position, budget: usize) -> CheckReport {
    const NAME: &str = "comparison";
    let instance = format!("{}, {lambda_p} <= {lambda}", describe(g));
    let below = lambda.len() == lambda_p.len()
        && lambda
            .values()
            .iter()
            .zip(lambda_p.values())
            .all(|(a, b)| matches!(a.try_cmp(b), Ok(std::cmp::Ordering::Greater | std::cmp::Ordering::Equal)));
    if !below {
        let d = "second position is not componentwise below the first".to_string();
        return CheckReport::new(NAME, instance, Status::Inconclusive, d);
    }
    let opts = PlayOptions::default().limit(budget);
    match play(g, lambda, &opts) {
        Ok(t) if t.is_converged() => {}
        Ok(_) => {
            let d = format!("no convergent play from the upper position within {budget} steps");
            return CheckReport::new(NAME, instance, Status::Inconclusive, d);
        }
        Err(e) => return CheckReport::new(NAME, instance, Status::Inconclusive, e.to_string()),
    }
    match play(g, lambda_p, &opts) {
        Ok(t) if t.is_converged() => {
            let d = format!("lower position converges in {} steps", t.length());
            CheckReport::new(NAME, instance, Status::Pass, d)
        }
        Ok(t) => {
            let d = format!("lower position did not converge within {budget} steps");
            CheckReport::new(NAME, instance, Status::Fail, d).with(Counterexample::trace(&t))
        }
        Err(e) => CheckReport::new(NAME, instance, Status::Fail, e.to_string()),
    }
}

/// Closed-form length and terminal position of the game on A_n, B_n, C_n, D_n.
pub fn family_closed_form(family: Family, a: &Position) -> Option<(usize, Position)> {
    let n = a.len();
    let neg = a.negated();
    match family {
        Family::A(k) if k == n && n >= 1 => Some((n * (n + 1) / 2, neg.reversed())),
        Family::B(k) | Family::C(k) if k == n && n >= 2 => Some((n * n, neg)),
        Family::D(k) if k == n && n >= 4 => {
            let mut v = neg.into_values();
            if n % 2 == 1 {
                v.swap(n - 2, n - 1);
            }
            Some((n * (n - 1), Position::new(v)))
        }
        _ => None,
    }
}

fn family_graph(family: Family) -> Option<EGcmGraph> {
    match family {
        Family::A(n) if n >= 1 => Some(fixtures::a_n(n)),
        Family::B(n) if n >= 2 => Some(fixtures::b_n(n)),
        Family::C(n) if n >= 2 => Some(fixtures::c_n(n)),
        Family::D(n) if n >= 4 => Some(fixtures::d_n(n)),
        _ => None,
    }
}

/// The min-index game on a classical family matches the closed form.
pub fn check_family_schedule(family: Family, a: &Position) -> CheckReport {
    const NAME: &str = "family-schedule";
    let instance = format!("{family} from {a}");
    let (Some(g), Some((len, terminal))) = (family_graph(family), family_closed_form(family, a)) else {
        let d = "no closed form for this family and rank".to_string();
        return CheckReport::new(NAME, instance, Status::Inconclusive, d);
    };
    if !a.is_strongly_dominant() {
        let d = "position is not strongly dominant".to_string();
        return CheckReport::new(NAME, instance, Status::Inconclusive, d);
    }
    let t = match play(&g, a, &PlayOptions::default()) {
        Ok(t) => t,
        Err(e) => return CheckReport::new(NAME, instance, Status::Fail, e.to_string()),
    };
    if t.length() == len && t.terminal() == Some(&terminal) {
        let d = format!("length {len}, terminal {terminal}");
        CheckReport::new(NAME, instance, Status::Pass, d)
    } else {
        let d = format!(
            "expected length {len} and terminal {terminal}, got {} steps ending at {}",
            t.length(),
            t.last_position()
        );
        CheckReport::new(NAME, instance, Status::Fail, d).with(Counterexample::trace(&t))
    }
}

/// Divergent schedules on non-admissible graphs, each with a closed-form
/// family of positions P(0), P(1), ... that the schedule moves along.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AffinePattern {
    /// Five-node affine D from the center: corners -k, center 2k+1.
    FiveNodeCenter,
    /// Five-node affine D from a corner: that corner k+1, other corners k, center -2k.
    FiveNodeCorner,
    /// Seven-node affine D from the middle of the isthmus: b = 2k+1, a = c = -k.
    SevenNodeMiddle,
    /// Seven-node affine D from a branch node: a = k+1, L1 = L2 = -k.
    SevenNodeBranch,
    /// Seven-node affine D from a leaf: L1 = k+1, L2 = -k.
    SevenNodeLeaf,
    /// n-cycle with unit amplitude products and OA-cycle product `pi`, from the first node.
    Loop { n: usize, pi: i64 },
}

impl AffinePattern {
    pub fn all_figures() -> [AffinePattern; 5] {
        [
            AffinePattern::FiveNodeCenter,
            AffinePattern::FiveNodeCorner,
            AffinePattern::SevenNodeMiddle,
            AffinePattern::SevenNodeBranch,
            AffinePattern::SevenNodeLeaf,
        ]
    }

    pub fn graph(&self) -> EGcmGraph {
        match *self {
            AffinePattern::FiveNodeCenter | AffinePattern::FiveNodeCorner => fixtures::d4_affine(),
            AffinePattern::Loop { n, pi: 1 } => fixtures::cycle(n),
            AffinePattern::Loop { n, pi } => fixtures::non_unital_cycle(n, pi),
            _ => fixtures::d6_affine(),
        }
    }

    /// How far the index of P advances in one round.
    pub fn stride(&self) -> usize {
        match self {
            AffinePattern::SevenNodeBranch | AffinePattern::SevenNodeLeaf => 2,
            _ => 1,
        }
    }

    /// The closed-form position P(k).
    pub fn state(&self, g: &EGcmGraph, k: usize) -> Position {
        use fixtures::d6::*;
        let k = k as i64;
        let vals: Vec<AlgebraicReal> = match *self {
            AffinePattern::FiveNodeCenter => [-k, -k, -k, -k, 2 * k + 1].map(AlgebraicReal::from_i64).to_vec(),
            AffinePattern::FiveNodeCorner => [k + 1, k, k, k, -2 * k].map(AlgebraicReal::from_i64).to_vec(),
            AffinePattern::SevenNodeMiddle => seven(&[(A, -k), (B, 2 * k + 1), (C, -k)]),
            AffinePattern::SevenNodeBranch => seven(&[(L1, -k), (L2, -k), (A, k + 1)]),
            AffinePattern::SevenNodeLeaf => seven(&[(L1, k + 1), (L2, -k)]),
            AffinePattern::Loop { n, .. } => {
                let pi = g.pi_product(&(0..n).chain([0]).collect::<Vec<_>>()).unwrap();
                let inv = pi.try_inverse().unwrap();
                let mut up = AlgebraicReal::zero();
                let mut down = AlgebraicReal::zero();
                let (mut p, mut q) = (AlgebraicReal::one(), AlgebraicReal::one());
                for _ in 0..k {
                    p = &p * &pi;
                    q = &q * &inv;
                    up = &up + &p;
                    down = &down + &q;
                }
                let mut v = vec![AlgebraicReal::zero(); n];
                v[0] = &(&AlgebraicReal::one() + &up) + &down;
                v[1] = g.amplitude(0, 1) * &up;
                v[n - 1] = g.amplitude(0, n - 1) * &down;
                v
            }
        };
        Position::new(vals)
    }

    /// The schedule that takes P(k) to P(k + stride).
    pub fn round(&self, k: usize) -> Vec<usize> {
        use fixtures::d6::*;
        match *self {
            AffinePattern::FiveNodeCenter => vec![4, 0, 1, 2, 3],
            AffinePattern::FiveNodeCorner if k == 0 => vec![0, 4, 1, 2, 3, 4],
            AffinePattern::FiveNodeCorner => vec![0, 1, 2, 3, 4, 0, 1, 2, 3, 4],
            AffinePattern::SevenNodeMiddle => vec![B, C, R1, R2, C, A, L1, L2, A],
            AffinePattern::SevenNodeBranch => vec![A, B, C, R1, R2, C, B, A, L1, L2],
            AffinePattern::SevenNodeLeaf => {
                let sweep = [A, B, C, R1, R2, C, B, A];
                let mut v = vec![L1];
                v.extend(sweep);
                v.extend([L1, L2]);
                v.extend(sweep);
                v.push(L2);
                v
            }
            AffinePattern::Loop { n, .. } => (0..n).chain((1..n - 1).rev()).collect(),
        }
    }
}

impl fmt::Display for AffinePattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AffinePattern::FiveNodeCenter => f.write_str("five-node affine D, center start"),
            AffinePattern::FiveNodeCorner => f.write_str("five-node affine D, corner start"),
            AffinePattern::SevenNodeMiddle => f.write_str("seven-node affine D, isthmus middle start"),
            AffinePattern::SevenNodeBranch => f.write_str("seven-node affine D, branch node start"),
            AffinePattern::SevenNodeLeaf => f.write_str("seven-node affine D, leaf start"),
            AffinePattern::Loop { n, pi } => write!(f, "{n}-loop with cycle product {pi}"),
        }
    }
}

fn seven(entries: &[(usize, i64)]) -> Vec<AlgebraicReal> {
    let mut v = vec![AlgebraicReal::zero(); 7];
    for &(i, x) in entries {
        v[i] = AlgebraicReal::from_i64(x);
    }
    v
}

/// For every k < `rounds`, the round schedule is legal from P(k) and ends at P(k + stride).
pub fn check_affine_divergence(pattern: AffinePattern, rounds: usize) -> CheckReport {
    const NAME: &str = "affine-divergence";
    let g = pattern.graph();
    let instance = format!("{pattern}, {rounds} rounds");
    let start = pattern.state(&g, 0);
    if start.positive_nodes().len() != 1 || !start.is_dominant() {
        let d = format!("P(0) = {start} is not a fundamental position");
        return CheckReport::new(NAME, instance, Status::Fail, d);
    }
    let stride = pattern.stride();
    for k in 0..rounds {
        let from = pattern.state(&g, k);
        let want = pattern.state(&g, k + stride);
        let sched = pattern.round(k);
        match run_schedule(&g, &from, &sched) {
            Err(e) => {
                let d = format!("round from P({k}): {e}");
                let cx = Counterexample::Trace { position: from, firings: sched };
                return CheckReport::new(NAME, instance, Status::Fail, d).with(cx);
            }
            Ok(t) if t.last_position() != &want => {
                let d = format!("round from P({k}) ends at {}, expected {want}", t.last_position());
                return CheckReport::new(NAME, instance, Status::Fail, d).with(Counterexample::trace(&t));
            }
            Ok(_) => {}
        }
    }
    let d = format!(
        "P(k) -> P(k+{stride}) legal for k < {rounds}; P({}) = {}",
        rounds,
        pattern.state(&g, rounds)
    );
    CheckReport::new(NAME, instance, Status::Pass, d)
}

fn sub_longest(g: &EGcmGraph, j_set: &[usize]) -> Result<usize, CoxeterError> {
    if j_set.is_empty() {
        Ok(0)
    } else {
        longest_element_length(&g.induced_subgraph(j_set))
    }
}

/// Games from the cone point of J have length l(w0) - l(w0 restricted to J)
/// under the min-index strategy and `seeds` random strategies.
pub fn check_coset_game_length(g: &EGcmGraph, j_set: &[usize], seeds: u64) -> CheckReport {
    const NAME: &str = "coset-game-length";
    let instance = format!("{}, J = {}", describe(g), one_based(j_set));
    let lengths = longest_element_length(g).and_then(|l| Ok((l, sub_longest(g, j_set)?)));
    let (l, lj) = match lengths {
        Ok(v) => v,
        Err(e) => return CheckReport::new(NAME, instance, Status::Inconclusive, e.to_string()),
    };
    let pos = Position::cone(g.n(), j_set);
    let strategies = std::iter::once(Strategy::MinIndex).chain((0..seeds).map(Strategy::Random));
    for s in strategies {
        let t = match play(g, &pos, &PlayOptions::default().strategy(s).limit(l + 1)) {
            Ok(t) => t,
            Err(e) => return CheckReport::new(NAME, instance, Status::Fail, e.to_string()),
        };
        if !t.is_converged() || t.length() != l - lj {
            let d = format!("{s:?} play has {} steps, expected {l} - {lj}", t.length());
            return CheckReport::new(NAME, instance, Status::Fail, d).with(Counterexample::trace(&t));
        }
    }
    let d = format!("{} strategies, length {} = {l} - {lj}", seeds + 1, l - lj);
    CheckReport::new(NAME, instance, Status::Pass, d)
}

/// Every reduced word of every minimal coset representative for J is a
/// legal schedule from the cone point of J.
pub fn check_coset_schedules(g: &EGcmGraph, j_set: &[usize]) -> CheckReport {
    const NAME: &str = "coset-schedules";
    let instance = format!("{}, J = {}", describe(g), one_based(j_set));
    let reps = match coset_representatives(g, j_set, DEFAULT_GROUP_BUDGET) {
        Ok(r) => r,
        Err(e) => return CheckReport::new(NAME, instance, Status::Inconclusive, e.to_string()),
    };
    let pos = Position::cone(g.n(), j_set);
    let mut words = 0usize;
    for w in &reps {
        let all = match reduced_words(g, w) {
            Ok(v) => v,
            Err(e) => return CheckReport::new(NAME, instance, Status::Inconclusive, e.to_string()),
        };
        for word in all {
            words += 1;
            if let Err(e) = run_schedule(g, &pos, &word) {
                let d = format!("reduced word {} is not legal: {e}", one_based(&word));
                let cx = Counterexample::Trace { position: pos, firings: word };
                return CheckReport::new(NAME, instance, Status::Fail, d).with(cx);
            }
        }
    }
    let d = format!("{} coset representatives, {words} reduced words, all legal", reps.len());
    CheckReport::new(NAME, instance, Status::Pass, d)
}

/// The four conditions agree: equal amplitudes on odd bonds, one positive
/// multiple per simple root, game functionals exhausting the positive roots,
/// and game length equal to the number of positive roots.
pub fn check_root_functional_equivalence(g: &EGcmGraph) -> CheckReport {
    const NAME: &str = "root-functional-equivalence";
    let instance = describe(g);
    let run = || -> Result<(bool, bool, bool, bool, String), CoxeterError> {
        let l = longest_element_length(g)?;
        let symmetric_odd = !g.has_odd_asymmetry();
        let counts = multiple_counts(g)?;
        let single = counts.iter().all(|(_, c)| *c == 1);
        let t = play(g, &Position::ones(g.n()), &PlayOptions::default().limit(l + 1))?;
        let fired: HashSet<Root> = fired_root_functionals(g, &t)?.into_iter().collect();
        let roots: HashSet<Root> = positive_roots(g, RootMode::Orbit)?.into_iter().collect();
        let exhaust = fired == roots;
        let length_eq = t.length() == roots.len();
        let fs: Vec<String> = counts.iter().map(|(_, c)| c.to_string()).collect();
        let d = format!(
            "odd bonds symmetric: {symmetric_odd}; f = [{}]; functionals exhaust positive roots: {exhaust}; \
             game length {} vs {} positive roots",
            fs.join(","),
            t.length(),
            roots.len()
        );
        Ok((symmetric_odd, single, exhaust, length_eq, d))
    };
    match run() {
        Ok((a, b, c, d, detail)) => {
            let status = if a == b && b == c && c == d { Status::Pass } else { Status::Fail };
            CheckReport::new(NAME, instance, status, detail)
        }
        Err(e) => CheckReport::new(NAME, instance, Status::Inconclusive, e.to_string()),
    }
}

/// The root functionals fired along one convergent play are pairwise distinct.
pub fn check_distinct_functionals(g: &EGcmGraph, pos: &Position, strategy: Strategy) -> CheckReport {
    const NAME: &str = "distinct-root-functionals";
    let instance = format!("{} from {pos}, {strategy:?}", describe(g));
    let t = match play(g, pos, &PlayOptions::default().strategy(strategy)) {
        Ok(t) if t.is_converged() => t,
        Ok(t) => {
            let d = format!("play did not converge ({})", t.outcome_tag());
            return CheckReport::new(NAME, instance, Status::Inconclusive, d);
        }
        Err(e) => return CheckReport::new(NAME, instance, Status::Inconclusive, e.to_string()),
    };
    let roots = match fired_root_functionals(g, &t) {
        Ok(r) => r,
        Err(e) => return CheckReport::new(NAME, instance, Status::Inconclusive, e.to_string()),
    };
    let mut seen = HashSet::new();
    for (k, r) in roots.iter().enumerate() {
        if !seen.insert(r) {
            let d = format!("root {r} fired twice, again at step {}", k + 1);
            return CheckReport::new(NAME, instance, Status::Fail, d).with(Counterexample::trace(&t));
        }
    }
    let d = format!("{} distinct functionals", roots.len());
    CheckReport::new(NAME, instance, Status::Pass, d)
}

/// How adjacency-freeness is read.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AdjacencyReading {
    /// Some play never shows two adjacent positive nodes.
    SomePlay,
    /// No play ever shows two adjacent positive nodes.
    EveryPlay,
}

fn leaves(g: &EGcmGraph) -> Vec<usize> {
    (0..g.n()).filter(|&i| g.neighbors(i).len() == 1).collect()
}

fn distances_from(g: &EGcmGraph, root: usize) -> Vec<usize> {
    let mut d = vec![usize::MAX; g.n()];
    d[root] = 0;
    let mut queue = std::collections::VecDeque::from([root]);
    while let Some(u) = queue.pop_front() {
        for &v in g.neighbors(u) {
            if d[v] == usize::MAX {
                d[v] = d[u] + 1;
                queue.push_back(v);
            }
        }
    }
    d
}

/// Nodes whose fundamental positions are adjacency-free, by family. The E6,
/// E7 and H3 entries are search results frozen as golden data.
pub fn expected_adjacency_free(g: &EGcmGraph) -> Option<Vec<usize>> {
    let family = classify(g).family()?;
    Some(match family {
        Family::A(_) => (0..g.n()).collect(),
        Family::B(_) | Family::C(_) | Family::D(_) | Family::G2 | Family::I2(_) => leaves(g),
        Family::E(8) | Family::F4 | Family::H(4) => Vec::new(),
        Family::E(k) => {
            let branch = (0..g.n()).find(|&i| g.neighbors(i).len() == 3)?;
            let d = distances_from(g, branch);
            let far = if k == 6 { 2 } else { 3 };
            leaves(g).into_iter().filter(|&v| d[v] == far).collect()
        }
        Family::H(_) => leaves(g)
            .into_iter()
            .filter(|&v| g.neighbors(v).iter().all(|&u| g.bond_order(u, v) == BondOrder::Finite(3)))
            .collect(),
    })
}

fn free_under(g: &EGcmGraph, pos: &Position, reading: AdjacencyReading) -> Result<(bool, Option<Vec<usize>>), CoxeterError> {
    match reading {
        AdjacencyReading::SomePlay => match is_adjacency_free(g, pos, DEFAULT_MEMO_BUDGET)? {
            Some(w) => Ok((true, Some(w))),
            None => Ok((false, adjacency_reachable(g, pos, DEFAULT_MEMO_BUDGET)?)),
        },
        AdjacencyReading::EveryPlay => match adjacency_reachable(g, pos, DEFAULT_MEMO_BUDGET)? {
            Some(w) => Ok((false, Some(w))),
            None => Ok((true, None)),
        },
    }
}

pub fn free_fundamentals(g: &EGcmGraph, reading: AdjacencyReading) -> Result<Vec<usize>, CoxeterError> {
    let mut out = Vec::new();
    for i in 0..g.n() {
        if free_under(g, &Position::fundamental(g.n(), i), reading)?.0 {
            out.push(i);
        }
    }
    Ok(out)
}

/// Compares adjacency-free fundamental positions with the family pattern;
/// with `pairs`, also requires every ω_i + ω_j to be not adjacency-free.
pub fn check_adjacency_free_classification(g: &EGcmGraph, reading: AdjacencyReading, pairs: bool) -> CheckReport {
    let name = match reading {
        AdjacencyReading::SomePlay => "adjacency-free-classification",
        AdjacencyReading::EveryPlay => "adjacency-free-every-play",
    };
    let instance = describe(g);
    let Some(expected) = expected_adjacency_free(g) else {
        let d = "graph is not in a recognized family".to_string();
        return CheckReport::new(name, instance, Status::Inconclusive, d);
    };
    let n = g.n();
    let mut found = Vec::new();
    let mut cx = None;
    for i in 0..n {
        let pos = Position::fundamental(n, i);
        let (free, w) = match free_under(g, &pos, reading) {
            Ok(v) => v,
            Err(e) => return CheckReport::new(name, instance, Status::Inconclusive, e.to_string()),
        };
        if free {
            found.push(i);
        }
        if free != expected.contains(&i) && cx.is_none() {
            cx = Some(Counterexample::Trace { position: pos, firings: w.unwrap_or_default() });
        }
    }
    let mut detail = format!("free fundamental nodes {}, expected {}", one_based(&found), one_based(&expected));
    let mut pair_hits = Vec::new();
    if pairs {
        for i in 0..n {
            for j in i + 1..n {
                let pos = Position::fundamental(n, i).try_add(&Position::fundamental(n, j)).unwrap();
                match free_under(g, &pos, reading) {
                    Ok((true, w)) => {
                        pair_hits.push(format!("{}+{}", i + 1, j + 1));
                        if cx.is_none() {
                            cx = Some(Counterexample::Trace { position: pos, firings: w.unwrap_or_default() });
                        }
                    }
                    Ok(_) => {}
                    Err(e) => return CheckReport::new(name, instance, Status::Inconclusive, e.to_string()),
                }
            }
        }
        if pair_hits.is_empty() {
            detail.push_str("; no two-node sum is adjacency-free");
        } else {
            detail.push_str(&format!("; adjacency-free two-node sums {}", pair_hits.join(",")));
        }
    }
    match cx {
        None => CheckReport::new(name, instance, Status::Pass, detail),
        Some(cx) => {
            if reading == AdjacencyReading::SomePlay {
                if let Ok(every) = free_fundamentals(g, AdjacencyReading::EveryPlay) {
                    detail.push_str(&format!("; every-play reading gives {}", one_based(&every)));
                }
            }
            CheckReport::new(name, instance, Status::Fail, detail).with(cx)
        }
    }
}

pub const SUITES: &[&str] = &[
    "strong-convergence",
    "comparison",
    "family-schedules",
    "affine-divergence",
    "coset-lengths",
    "coset-schedules",
    "root-functionals",
    "distinct-functionals",
    "adjacency-free",
];

#[derive(Clone, Debug)]
pub struct VerifyOptions {
    pub seed: u64,
    pub tree: TreeOptions,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions { seed: 0, tree: TreeOptions::default() }
    }
}

fn all_subsets(n: usize) -> Vec<Vec<usize>> {
    (0..1usize << n).map(|m| (0..n).filter(|i| m >> i & 1 == 1).collect()).collect()
}

fn builtin(name: &str) -> EGcmGraph {
    fixtures::builtin(name).unwrap_or_else(|| panic!("missing fixture {name}"))
}

/// Runs a named suite on the bundled fixtures; `all` runs every suite.
pub fn builtin_suite(name: &str, opts: &VerifyOptions) -> Option<Vec<CheckReport>> {
    if name == "all" {
        return Some(SUITES.iter().flat_map(|s| builtin_suite(s, opts).unwrap()).collect());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut out = Vec::new();
    match name {
        "strong-convergence" => {
            out.push(check_strong_convergence(&fixtures::b_n(2), &Position::from_i64s(&[1, 1]), &opts.tree).on("b2"));
            out.push(check_strong_convergence(&fixtures::a_n(3), &Position::fundamental(3, 1), &opts.tree).on("a3"));
            out.push(check_strong_convergence(&fixtures::a_n(1), &Position::ones(1), &opts.tree).on("a1"));
            for f in ["a3", "b2", "b3", "g2", "i2-5", "i2-7", "h3"] {
                let g = builtin(f);
                for _ in 0..5 {
                    let pos = random_dominant(g.n(), &mut rng);
                    out.push(check_strong_convergence(&g, &pos, &opts.tree).on(f));
                }
            }
        }
        "comparison" => {
            let b2 = fixtures::b_n(2);
            let g2 = fixtures::g2();
            let l = Position::from_i64s(&[1, 1]);
            out.push(check_comparison(&b2, &l, &Position::from_i64s(&[1, 0]), 100).on("b2"));
            out.push(check_comparison(&b2, &l, &l, 100).on("b2"));
            out.push(check_comparison(&g2, &l, &Position::zeros(2), 100).on("g2"));
            for f in ["a4", "d5", "f4", "h4", "e6"] {
                let g = builtin(f);
                let upper = random_strongly_dominant(g.n(), &mut rng);
                let lower = Position::new(
                    upper
                        .values()
                        .iter()
                        .map(|v| if rng.random_range(0..2) == 0 { AlgebraicReal::zero() } else { v.clone() })
                        .collect(),
                );
                out.push(check_comparison(&g, &upper, &lower, 1000).on(f));
            }
        }
        "family-schedules" => {
            out.push(check_family_schedule(Family::A(2), &Position::from_i64s(&[1, 2])));
            for n in 1..=8 {
                out.push(check_family_schedule(Family::A(n), &random_strongly_dominant(n, &mut rng)));
            }
            for n in 2..=7 {
                out.push(check_family_schedule(Family::B(n), &random_strongly_dominant(n, &mut rng)));
                out.push(check_family_schedule(Family::C(n), &random_strongly_dominant(n, &mut rng)));
            }
            for n in 4..=8 {
                out.push(check_family_schedule(Family::D(n), &random_strongly_dominant(n, &mut rng)));
            }
        }
        "affine-divergence" => {
            for p in AffinePattern::all_figures() {
                out.push(check_affine_divergence(p, 25));
            }
            for n in 3..=6 {
                for pi in [1, 5] {
                    out.push(check_affine_divergence(AffinePattern::Loop { n, pi }, 25));
                }
            }
        }
        "coset-lengths" | "coset-schedules" => {
            for f in ["b2", "a3", "h3"] {
                let g = builtin(f);
                for j in all_subsets(g.n()) {
                    let r = if name == "coset-lengths" {
                        check_coset_game_length(&g, &j, 3)
                    } else {
                        check_coset_schedules(&g, &j)
                    };
                    out.push(r.on(f));
                }
            }
        }
        "root-functionals" => {
            for f in ["a3", "d4", "f4", "h3", "asymmetric-a2"] {
                out.push(check_root_functional_equivalence(&builtin(f)).on(f));
            }
        }
        "distinct-functionals" => {
            let pool = ["a4", "b3", "c4", "d5", "e6", "f4", "g2", "h3", "h4", "i2-7", "coxeter-b4", "asymmetric-a2"];
            for _ in 0..100 {
                let f = pool[rng.random_range(0..pool.len())];
                let g = builtin(f);
                let pos = random_strongly_dominant(g.n(), &mut rng);
                let seed = rng.random();
                out.push(check_distinct_functionals(&g, &pos, Strategy::Random(seed)).on(f));
            }
        }
        "adjacency-free" => {
            let graphs = [
                "a1", "a2", "a3", "a4", "a5", "coxeter-b3", "coxeter-b4", "d4", "d5", "i2-5", "i2-6", "i2-7", "f4",
                "h3", "e6",
            ];
            for reading in [AdjacencyReading::SomePlay, AdjacencyReading::EveryPlay] {
                for f in graphs {
                    out.push(check_adjacency_free_classification(&builtin(f), reading, f == "a3").on(f));
                }
            }
        }
        _ => return None,
    }
    Some(out)
}

/// Runs the checks of a named suite that apply to an arbitrary graph.
pub fn graph_suite(g: &EGcmGraph, name: &str, opts: &VerifyOptions) -> Option<Vec<CheckReport>> {
    if name == "all" {
        return Some(SUITES.iter().flat_map(|s| graph_suite(g, s, opts).unwrap()).collect());
    }
    let n = g.n();
    let finite = classify(g).l_w0().is_some();
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut out = Vec::new();
    match name {
        "strong-convergence" => {
            out.push(check_strong_convergence(g, &Position::ones(n), &opts.tree));
            for i in 0..n {
                out.push(check_strong_convergence(g, &Position::fundamental(n, i), &opts.tree));
            }
        }
        "comparison" => {
            let budget = opts.tree.max_steps;
            for i in 0..n {
                out.push(check_comparison(g, &Position::ones(n), &Position::fundamental(n, i), budget));
            }
        }
        "family-schedules" => {
            if let Some(f) = classify(g).family() {
                if family_graph(f).is_some_and(|h| h.digest() == g.digest()) {
                    out.push(check_family_schedule(f, &random_strongly_dominant(n, &mut rng)));
                }
            }
        }
        "affine-divergence" => {}
        "coset-lengths" | "coset-schedules" if finite => {
            let subsets = if n <= 4 {
                all_subsets(n)
            } else {
                (0..n).map(|i| vec![i]).chain((0..n).map(|i| (0..n).filter(|&k| k != i).collect())).collect()
            };
            for j in subsets {
                out.push(if name == "coset-lengths" {
                    check_coset_game_length(g, &j, 3)
                } else {
                    check_coset_schedules(g, &j)
                });
            }
        }
        "coset-lengths" | "coset-schedules" => {}
        "root-functionals" if finite => out.push(check_root_functional_equivalence(g)),
        "root-functionals" => {}
        "distinct-functionals" if finite => {
            for _ in 0..10 {
                let seed = rng.random();
                out.push(check_distinct_functionals(g, &Position::ones(n), Strategy::Random(seed)));
            }
        }
        "distinct-functionals" => {}
        "adjacency-free" => {
            if expected_adjacency_free(g).is_some() {
                out.push(check_adjacency_free_classification(g, AdjacencyReading::SomePlay, n <= 4));
                out.push(check_adjacency_free_classification(g, AdjacencyReading::EveryPlay, n <= 4));
            }
        }
        _ => return None,
    }
    Some(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> AlgebraicReal {
        AlgebraicReal::from_ratio(n, d)
    }

    #[test]
    fn strong_convergence_examples() {
        let o = TreeOptions::default();
        let r = check_strong_convergence(&fixtures::b_n(2), &Position::from_i64s(&[1, 1]), &o);
        assert!(r.passed(), "{r}");
        assert!(r.detail.contains("length 4"));
        assert!(check_strong_convergence(&fixtures::a_n(3), &Position::fundamental(3, 1), &o).passed());
        assert!(check_strong_convergence(&fixtures::a_n(1), &Position::ones(1), &o).passed());
        let r = check_strong_convergence(&fixtures::cycle(3), &Position::fundamental(3, 0), &TreeOptions {
            max_steps: 40,
            ..o
        });
        assert_eq!(r.status, Status::Inconclusive);
    }

    #[test]
    fn comparison_examples() {
        let b2 = fixtures::b_n(2);
        let l = Position::from_i64s(&[1, 1]);
        assert!(check_comparison(&b2, &l, &Position::from_i64s(&[1, 0]), 100).passed());
        assert!(check_comparison(&b2, &l, &l, 100).passed());
        assert!(check_comparison(&fixtures::g2(), &l, &Position::zeros(2), 100).passed());
        let r = check_comparison(&b2, &Position::from_i64s(&[1, 0]), &l, 100);
        assert_eq!(r.status, Status::Inconclusive);
    }

    #[test]
    fn family_schedule_examples() {
        let r = check_family_schedule(Family::A(2), &Position::from_i64s(&[1, 2]));
        assert!(r.passed(), "{r}");
        assert!(r.detail.contains("length 3") && r.detail.contains("(-2, -1)"));
        let r = check_family_schedule(Family::B(3), &Position::new(vec![q(1, 2), q(3, 1), q(2, 3)]));
        assert!(r.passed() && r.detail.contains("length 9"), "{r}");
        let a = Position::from_i64s(&[1, 2, 3, 4]);
        let r = check_family_schedule(Family::D(4), &a);
        assert!(r.passed() && r.detail.contains("length 12") && r.detail.contains("(-1, -2, -3, -4)"), "{r}");
        let r = check_family_schedule(Family::D(5), &Position::from_i64s(&[1, 2, 3, 4, 5]));
        assert!(r.passed() && r.detail.contains("(-1, -2, -3, -5, -4)"), "{r}");
        assert_eq!(check_family_schedule(Family::F4, &Position::ones(4)).status, Status::Inconclusive);
    }

    #[test]
    fn family_closed_form_is_checked_against_the_game() {
        // Wrong closed form must fail: A_3 terminal is the reversed negation.
        let g = fixtures::a_n(3);
        let a = Position::from_i64s(&[1, 2, 3]);
        let t = play(&g, &a, &PlayOptions::default()).unwrap();
        assert_ne!(t.terminal(), Some(&a.negated()));
        assert_eq!(t.terminal(), Some(&a.negated().reversed()));
    }

    #[test]
    fn affine_examples() {
        let p = AffinePattern::FiveNodeCenter;
        let g = p.graph();
        assert_eq!(p.state(&g, 3), Position::from_i64s(&[-3, -3, -3, -3, 7]));
        for p in AffinePattern::all_figures() {
            let r = check_affine_divergence(p, 25);
            assert!(r.passed(), "{r}");
        }
        let unit = AffinePattern::Loop { n: 3, pi: 1 };
        let g = unit.graph();
        assert_eq!(p_after(&g, unit, 2), Position::from_i64s(&[5, -2, -2]));
        let heavy = AffinePattern::Loop { n: 3, pi: 5 };
        let g = heavy.graph();
        assert_eq!(p_after(&g, heavy, 1)[0], q(6, 1) + q(1, 5));
        for n in 3..=6 {
            for pi in [1, 5] {
                let r = check_affine_divergence(AffinePattern::Loop { n, pi }, 25);
                assert!(r.passed(), "{r}");
            }
        }
    }

    fn p_after(g: &EGcmGraph, p: AffinePattern, rounds: usize) -> Position {
        let mut pos = p.state(g, 0);
        for k in 0..rounds {
            pos = run_schedule(g, &pos, &p.round(k)).unwrap().last_position().clone();
        }
        pos
    }

    #[test]
    fn affine_one_step_branch_pattern_is_unreachable_in_one_round() {
        // The branch-node round advances the closed form by two; P(1) itself
        // is never produced from P(0).
        let p = AffinePattern::SevenNodeBranch;
        let g = p.graph();
        let after = run_schedule(&g, &p.state(&g, 0), &p.round(0)).unwrap();
        assert_eq!(after.last_position(), &p.state(&g, 2));
        assert!(!after.positions.unwrap().contains(&p.state(&g, 1)));
    }

    #[test]
    fn coset_length_examples() {
        let b2 = fixtures::b_n(2);
        let r = check_coset_game_length(&b2, &[1], 3);
        assert!(r.passed() && r.detail.contains("length 3"), "{r}");
        let a3 = fixtures::a_n(3);
        let r = check_coset_game_length(&a3, &[0, 2], 3);
        assert!(r.passed() && r.detail.contains("length 4"), "{r}");
        let r = check_coset_game_length(&a3, &[], 3);
        assert!(r.passed() && r.detail.contains("length 6"), "{r}");
        assert!(check_coset_schedules(&a3, &[0, 2]).passed());
        assert_eq!(check_coset_game_length(&fixtures::cycle(3), &[], 1).status, Status::Inconclusive);
    }

    #[test]
    fn root_functional_examples() {
        for g in [fixtures::a_n(3), fixtures::d_n(4), fixtures::h3()] {
            let r = check_root_functional_equivalence(&g);
            assert!(r.passed(), "{r}");
            assert!(r.detail.contains("exhaust positive roots: true"));
        }
        let r = check_root_functional_equivalence(&fixtures::asymmetric_a2());
        assert!(r.passed(), "{r}");
        assert!(r.detail.contains("f = [2]") && r.detail.contains("game length 3"), "{r}");
    }

    #[test]
    fn distinct_functionals_example() {
        let r = check_distinct_functionals(&fixtures::e_n(6), &Position::ones(6), Strategy::Random(7));
        assert!(r.passed(), "{r}");
        assert!(r.detail.starts_with("36 "));
    }

    #[test]
    fn expected_adjacency_patterns() {
        assert_eq!(expected_adjacency_free(&fixtures::e_n(6)), Some(vec![0, 5]));
        assert_eq!(expected_adjacency_free(&fixtures::e_n(7)), Some(vec![6]));
        assert_eq!(expected_adjacency_free(&fixtures::h3()), Some(vec![2]));
        assert_eq!(expected_adjacency_free(&fixtures::d_n(5)), Some(vec![0, 3, 4]));
        assert_eq!(expected_adjacency_free(&fixtures::f4()), Some(vec![]));
        assert_eq!(expected_adjacency_free(&fixtures::cycle(4)), None);
    }

    #[test]
    fn adjacency_readings_on_b3() {
        let g = fixtures::coxeter_b(3);
        let some = check_adjacency_free_classification(&g, AdjacencyReading::SomePlay, true);
        assert_eq!(some.status, Status::Fail);
        assert!(some.detail.contains("every-play reading gives [1,3]"), "{some}");
        let Some(Counterexample::Trace { position, firings }) = &some.counterexample else { panic!() };
        // The witness is a complete play along which no two adjacent nodes are positive.
        let t = run_schedule(&g, position, firings).unwrap();
        assert!(t.is_converged());
        assert_eq!(position, &Position::fundamental(3, 1));
        let every = check_adjacency_free_classification(&g, AdjacencyReading::EveryPlay, true);
        assert!(every.passed(), "{every}");
    }

    #[test]
    fn simply_laced_readings_agree() {
        for g in [fixtures::a_n(3), fixtures::d_n(4), fixtures::e_n(6)] {
            let r = check_adjacency_free_classification(&g, AdjacencyReading::SomePlay, g.n() <= 4);
            assert!(r.passed(), "{r}");
        }
    }

    #[test]
    fn report_json() {
        let r = check_affine_divergence(AffinePattern::FiveNodeCenter, 2);
        let v = serde_json::to_value(&r).unwrap();
        assert_eq!(v["status"], "pass");
        assert_eq!(v["check"], "affine-divergence");
        assert!(v.get("counterexample").is_none());
        let cx = Counterexample::Trace { position: Position::ones(2), firings: vec![0, 1] };
        let v = serde_json::to_value(&cx).unwrap();
        assert_eq!(v["kind"], "trace");
        assert_eq!(v["firings"], serde_json::json!([1, 2]));
    }

    #[test]
    fn suites_exist() {
        let o = VerifyOptions::default();
        for s in SUITES {
            assert!(graph_suite(&fixtures::a_n(2), s, &o).is_some());
        }
        assert!(builtin_suite("nope", &o).is_none());
        let r = builtin_suite("root-functionals", &o).unwrap();
        assert!(r.iter().all(CheckReport::passed));
        let r = graph_suite(&fixtures::b_n(3), "all", &o).unwrap();
        assert!(r.iter().any(|c| c.check == "family-schedule" && c.passed()));
    }
}
