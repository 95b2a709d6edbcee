//! The geometric representation on roots, its contragredient action on
//! positions, and the reduced-word oracle given by the numbers game.
//!
//! A word `(i_1, ..., i_r)` stands for `s_{i_r} ... s_{i_1}`, so a word is
//! read exactly like a firing schedule.

mod adjacency;
mod group;

use std::collections::{HashMap, HashSet};
use std::fmt;

use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::arith::{AlgebraicReal, ArithError};
use crate::classify::classify;
use crate::game::{apply_schedule, fire_unchecked, play, GameError, GameTrace, PlayOptions, Position, StepBudget};
use crate::graph::{EGcmGraph, Multiples};

pub use adjacency::{adjacency_reachable, is_adjacency_free};
pub use group::{coset_representatives, enumerate_group, reduced_words, DEFAULT_GROUP_BUDGET};

pub type Word = Vec<usize>;

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum CoxeterError {
    #[error("the Coxeter group of this graph is infinite")]
    InfiniteGroup,
    #[error("game mode needs equal amplitudes on every odd bond")]
    GameModeRequiresNoOddAsymmetries,
    #[error("some OA-cycle has product different from 1")]
    NotUnitalOaCyclic,
    #[error("word is not reduced")]
    NotReduced,
    #[error("position is not dominant")]
    NotDominant,
    #[error("{what} budget of {budget} exceeded")]
    BudgetExceeded { what: &'static str, budget: usize },
    #[error("letter {} out of range 1..={n}", letter + 1)]
    LetterOutOfRange { letter: usize, n: usize },
    #[error(transparent)]
    Game(#[from] GameError),
    #[error(transparent)]
    Arith(#[from] ArithError),
}

/// Coefficients over the simple roots.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Root(Vec<AlgebraicReal>);

impl Root {
    pub fn new(coeffs: Vec<AlgebraicReal>) -> Root {
        Root(coeffs)
    }

    pub fn simple(n: usize, i: usize) -> Root {
        let mut v = vec![AlgebraicReal::zero(); n];
        v[i] = AlgebraicReal::one();
        Root(v)
    }

    pub fn coeffs(&self) -> &[AlgebraicReal] {
        &self.0
    }

    pub fn is_positive(&self) -> bool {
        self.0.iter().all(|c| c.sign() >= 0) && self.0.iter().any(AlgebraicReal::is_positive)
    }

    pub fn is_negative(&self) -> bool {
        self.0.iter().all(|c| c.sign() <= 0) && self.0.iter().any(AlgebraicReal::is_negative)
    }

    pub fn try_scale(&self, k: &AlgebraicReal) -> Result<Root, ArithError> {
        Ok(Root(self.0.iter().map(|c| c.try_mul(k)).collect::<Result<_, _>>()?))
    }

    /// If this is K alpha_i for a single i, returns (i, K).
    pub fn as_simple_multiple(&self) -> Option<(usize, &AlgebraicReal)> {
        let mut nz = self.0.iter().enumerate().filter(|(_, c)| !c.is_zero());
        let first = nz.next()?;
        nz.next().is_none().then_some(first)
    }

    /// The root functional sum c_i x_i evaluated at a position.
    pub fn pair(&self, pos: &Position) -> Result<AlgebraicReal, ArithError> {
        pairing(pos, self)
    }
}

impl fmt::Display for Root {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("[")?;
        for (k, v) in self.0.iter().enumerate() {
            if k > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{v}")?;
        }
        f.write_str("]")
    }
}

impl fmt::Debug for Root {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl Serialize for Root {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(self.0.iter().map(ToString::to_string))
    }
}

/// Parses comma-separated 1-based letters into a 0-based word.
pub fn parse_word(text: &str, n: usize) -> Result<Word, String> {
    let text = text.trim();
    if text.is_empty() {
        return Ok(Vec::new());
    }
    text.split(',')
        .map(|t| {
            let t = t.trim();
            match t.parse::<usize>() {
                Ok(k) if (1..=n).contains(&k) => Ok(k - 1),
                Ok(k) => Err(format!("letter {k} out of range 1..={n}")),
                Err(_) => Err(format!("invalid letter '{t}'")),
            }
        })
        .collect()
}

pub fn format_word(w: &[usize]) -> String {
    w.iter().map(|i| (i + 1).to_string()).collect::<Vec<_>>().join(",")
}

fn check_word(g: &EGcmGraph, w: &[usize]) -> Result<(), CoxeterError> {
    match w.iter().find(|&&i| i >= g.n()) {
        Some(&letter) => Err(CoxeterError::LetterOutOfRange { letter, n: g.n() }),
        None => Ok(()),
    }
}

/// B(u, v) = sum u_i v_j M_ij / 2.
pub fn bilinear(g: &EGcmGraph, u: &Root, v: &Root) -> Result<AlgebraicReal, ArithError> {
    let mut acc = AlgebraicReal::zero();
    for i in 0..g.n() {
        if u.0[i].is_zero() {
            continue;
        }
        for j in 0..g.n() {
            if v.0[j].is_zero() || g.amplitude(i, j).is_zero() {
                continue;
            }
            acc = acc.try_add(&u.0[i].try_mul(&v.0[j])?.try_mul(g.amplitude(i, j))?)?;
        }
    }
    acc.try_div(&AlgebraicReal::from_i64(2))
}

/// S_i(v) = v - 2B(alpha_i, v) alpha_i.
pub fn reflect(g: &EGcmGraph, i: usize, v: &Root) -> Result<Root, ArithError> {
    let mut two_b = AlgebraicReal::zero();
    for j in 0..g.n() {
        if !v.0[j].is_zero() && !g.amplitude(i, j).is_zero() {
            two_b = two_b.try_add(&g.amplitude(i, j).try_mul(&v.0[j])?)?;
        }
    }
    let mut out = v.0.clone();
    out[i] = out[i].try_sub(&two_b)?;
    Ok(Root(out))
}

/// Applies the element of `w` to a root: s_{i_1} first.
pub fn act_word(g: &EGcmGraph, w: &[usize], v: &Root) -> Result<Root, ArithError> {
    w.iter().try_fold(v.clone(), |acc, &i| reflect(g, i, &acc))
}

/// The contragredient action, which is firing without the legality check.
pub fn act_on_position(g: &EGcmGraph, w: &[usize], pos: &Position) -> Result<Position, ArithError> {
    w.iter().try_fold(pos.clone(), |acc, &i| fire_unchecked(g, &acc, i))
}

/// <lambda, alpha> = sum lambda_j c_j.
pub fn pairing(pos: &Position, root: &Root) -> Result<AlgebraicReal, ArithError> {
    let mut acc = AlgebraicReal::zero();
    for (l, c) in pos.values().iter().zip(&root.0) {
        if !l.is_zero() && !c.is_zero() {
            acc = acc.try_add(&l.try_mul(c)?)?;
        }
    }
    Ok(acc)
}

pub fn inverse(w: &[usize]) -> Word {
    w.iter().rev().copied().collect()
}

/// Reduced iff the word is a legal schedule from the all-ones position.
pub fn is_reduced(g: &EGcmGraph, w: &[usize]) -> Result<bool, CoxeterError> {
    check_word(g, w)?;
    match apply_schedule(g, &Position::ones(g.n()), w) {
        Ok(_) => Ok(true),
        Err(GameError::IllegalFiringAt { .. }) => Ok(false),
        Err(e) => Err(e.into()),
    }
}

/// A reduced word for the same element, obtained by deleting letters.
pub fn reduce(g: &EGcmGraph, w: &[usize]) -> Result<Word, CoxeterError> {
    check_word(g, w)?;
    let ones = Position::ones(g.n());
    let mut u: Word = Vec::new();
    let mut at = ones.clone();
    for &i in w {
        let next = fire_unchecked(g, &at, i)?;
        if at[i].is_positive() {
            u.push(i);
        } else {
            // Exchange: s_i u equals u with one letter removed.
            let k = (0..u.len())
                .rev()
                .find(|&k| {
                    let mut cand = u.clone();
                    cand.remove(k);
                    matches!(apply_schedule(g, &ones, &cand), Ok(p) if p == next)
                })
                .expect("exchange condition");
            u.remove(k);
        }
        at = next;
    }
    Ok(u)
}

pub fn length(g: &EGcmGraph, w: &[usize]) -> Result<usize, CoxeterError> {
    Ok(reduce(g, w)?.len())
}

fn require_finite(g: &EGcmGraph) -> Result<u64, CoxeterError> {
    classify(g).l_w0().ok_or(CoxeterError::InfiniteGroup)
}

/// Length of the convergent game from the all-ones position.
pub fn longest_element_length(g: &EGcmGraph) -> Result<usize, CoxeterError> {
    let bound = require_finite(g)? as usize;
    let t = play(g, &Position::ones(g.n()), &PlayOptions::default().limit(bound + 1))?;
    match t.terminal() {
        Some(_) => Ok(t.length()),
        None => Err(CoxeterError::BudgetExceeded { what: "step", budget: bound + 1 }),
    }
}

/// beta_j = s_{i_1} ... s_{i_{j-1}} alpha_{i_j} for the fired nodes of a trace.
pub fn fired_root_functionals(g: &EGcmGraph, trace: &GameTrace) -> Result<Vec<Root>, ArithError> {
    let n = g.n();
    let f = &trace.firings;
    (0..f.len())
        .map(|j| {
            let prefix: Word = f[..j].iter().rev().copied().collect();
            act_word(g, &prefix, &Root::simple(n, f[j]))
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RootMode {
    Game,
    Orbit,
}

/// The positive roots of a finite-type graph.
pub fn positive_roots(g: &EGcmGraph, mode: RootMode) -> Result<Vec<Root>, CoxeterError> {
    let bound = require_finite(g)? as usize;
    match mode {
        RootMode::Game => {
            if g.has_odd_asymmetry() {
                return Err(CoxeterError::GameModeRequiresNoOddAsymmetries);
            }
            let opts = PlayOptions {
                budget: StepBudget::Limit(bound + 1),
                ..PlayOptions::default()
            };
            let t = play(g, &Position::ones(g.n()), &opts)?;
            Ok(fired_root_functionals(g, &t)?)
        }
        RootMode::Orbit => Ok(root_orbit(g, 1_000_000)?.into_iter().filter(Root::is_positive).collect()),
    }
}

/// All roots w.alpha_i, by breadth-first search under the simple reflections.
pub fn root_orbit(g: &EGcmGraph, budget: usize) -> Result<Vec<Root>, CoxeterError> {
    let n = g.n();
    let mut seen: HashSet<Root> = HashSet::new();
    let mut order = Vec::new();
    for i in 0..n {
        let r = Root::simple(n, i);
        if seen.insert(r.clone()) {
            order.push(r);
        }
    }
    let mut k = 0;
    while k < order.len() {
        let r = order[k].clone();
        k += 1;
        for i in 0..n {
            let s = reflect(g, i, &r)?;
            if !seen.contains(&s) {
                if seen.len() >= budget {
                    return Err(CoxeterError::BudgetExceeded { what: "root orbit", budget });
                }
                seen.insert(s.clone());
                order.push(s);
            }
        }
    }
    Ok(order)
}

/// Number of positive multiples of a simple root in each OA-component.
pub fn multiple_counts(g: &EGcmGraph) -> Result<Vec<(Vec<usize>, usize)>, CoxeterError> {
    let mut out = Vec::new();
    for comp in g.oa_components() {
        match g.root_multiples(comp[0])? {
            Multiples::Finite(v) => out.push((comp, v.len())),
            Multiples::Infinite => return Err(CoxeterError::NotUnitalOaCyclic),
        }
    }
    Ok(out)
}

/// N(w): the positive roots sent negative by w, built from
/// N(w s_i) = s_i N(w) together with the positive multiples of alpha_i.
pub fn n_set(g: &EGcmGraph, w: &[usize]) -> Result<Vec<Root>, CoxeterError> {
    check_word(g, w)?;
    if !g.try_is_unital_oa_cyclic()? {
        return Err(CoxeterError::NotUnitalOaCyclic);
    }
    if !is_reduced(g, w)? {
        return Err(CoxeterError::NotReduced);
    }
    let n = g.n();
    let mut multiples: HashMap<usize, Vec<AlgebraicReal>> = HashMap::new();
    let mut set: Vec<Root> = Vec::new();
    for &i in w.iter().rev() {
        let mut next = Vec::with_capacity(set.len() + 2);
        for r in &set {
            next.push(reflect(g, i, r)?);
        }
        if !multiples.contains_key(&i) {
            let Multiples::Finite(v) = g.root_multiples(i)? else {
                return Err(CoxeterError::NotUnitalOaCyclic);
            };
            multiples.insert(i, v);
        }
        for k in &multiples[&i] {
            next.push(Root::simple(n, i).try_scale(k)?);
        }
        set = next;
    }
    Ok(set)
}

pub const DEFAULT_CLASS_BUDGET: usize = 1_000_000;

/// True iff no word in the commutation class of `w` has an alternating
/// factor x,y,x,... of length m_xy with 3 <= m_xy < inf.
pub fn is_fully_commutative(g: &EGcmGraph, w: &[usize], budget: usize) -> Result<bool, CoxeterError> {
    let w = if is_reduced(g, w)? { w.to_vec() } else { reduce(g, w)? };
    let commute = |a: usize, b: usize| a != b && !g.is_adjacent(a, b);
    let mut seen: HashSet<Word> = HashSet::from([w.clone()]);
    let mut queue = vec![w];
    let mut k = 0;
    while k < queue.len() {
        let u = queue[k].clone();
        k += 1;
        if has_braid_factor(g, &u) {
            return Ok(false);
        }
        for p in 0..u.len().saturating_sub(1) {
            if commute(u[p], u[p + 1]) {
                let mut v = u.clone();
                v.swap(p, p + 1);
                if !seen.contains(&v) {
                    if seen.len() >= budget {
                        return Err(CoxeterError::BudgetExceeded { what: "commutation class", budget });
                    }
                    seen.insert(v.clone());
                    queue.push(v);
                }
            }
        }
    }
    Ok(true)
}

fn has_braid_factor(g: &EGcmGraph, u: &[usize]) -> bool {
    for start in 0..u.len() {
        let (x, y) = (u[start], match u.get(start + 1) {
            Some(&y) => y,
            None => break,
        });
        let Some(m) = g.bond_order(x, y).finite().filter(|&m| m >= 3) else {
            continue;
        };
        let m = m as usize;
        if start + m <= u.len() && (0..m).all(|t| u[start + t] == if t % 2 == 0 { x } else { y }) {
            return true;
        }
    }
    false
}
