use std::collections::{HashMap, HashSet};

use super::{act_on_position, check_word, is_reduced, CoxeterError, Word};
use crate::game::{fire_unchecked, Position};
use crate::graph::EGcmGraph;

pub const DEFAULT_GROUP_BUDGET: usize = 1_000_000;

/// One reduced word per group element, in order of length. Elements are
/// told apart by their action on the all-ones position.
pub fn enumerate_group(g: &EGcmGraph, budget: usize) -> Result<Vec<Word>, CoxeterError> {
    let ones = Position::ones(g.n());
    let mut seen: HashSet<Position> = HashSet::from([ones]);
    let mut out: Vec<Word> = vec![Vec::new()];
    let mut k = 0;
    while k < out.len() {
        let w = out[k].clone();
        k += 1;
        for j in 0..g.n() {
            // Prepending j multiplies the element by s_j on the right.
            let mut v = Vec::with_capacity(w.len() + 1);
            v.push(j);
            v.extend_from_slice(&w);
            if !is_reduced(g, &v)? {
                continue;
            }
            let p = act_on_position(g, &v, &Position::ones(g.n()))?;
            if seen.contains(&p) {
                continue;
            }
            if seen.len() >= budget {
                return Err(CoxeterError::BudgetExceeded { what: "group size", budget });
            }
            seen.insert(p);
            out.push(v);
        }
    }
    Ok(out)
}

/// Minimal representatives of the cosets w W_J: the w with l(w s_j) > l(w)
/// for every j in J.
pub fn coset_representatives(g: &EGcmGraph, j_set: &[usize], budget: usize) -> Result<Vec<Word>, CoxeterError> {
    check_word(g, j_set)?;
    let mut out = Vec::new();
    for w in enumerate_group(g, budget)? {
        let mut keep = true;
        for &j in j_set {
            let mut v = vec![j];
            v.extend_from_slice(&w);
            if !is_reduced(g, &v)? {
                keep = false;
                break;
            }
        }
        if keep {
            out.push(w);
        }
    }
    Ok(out)
}

/// Every reduced word for the element of `w`.
pub fn reduced_words(g: &EGcmGraph, w: &[usize]) -> Result<Vec<Word>, CoxeterError> {
    check_word(g, w)?;
    let ones = Position::ones(g.n());
    let target = act_on_position(g, w, &ones)?;
    let mut memo: HashMap<Position, Vec<Word>> = HashMap::new();
    memo.insert(ones, vec![Vec::new()]);
    words_for(g, &target, &mut memo)?;
    Ok(memo.remove(&target).unwrap())
}

fn words_for(g: &EGcmGraph, p: &Position, memo: &mut HashMap<Position, Vec<Word>>) -> Result<(), CoxeterError> {
    if memo.contains_key(p) {
        return Ok(());
    }
    let mut out = Vec::new();
    // A negative node i is a last letter: firing it undoes s_i.
    for i in 0..g.n() {
        if !p[i].is_negative() {
            continue;
        }
        let prev = fire_unchecked(g, p, i)?;
        words_for(g, &prev, memo)?;
        for u in &memo[&prev] {
            let mut v = u.clone();
            v.push(i);
            out.push(v);
        }
    }
    memo.insert(p.clone(), out);
    Ok(())
}
