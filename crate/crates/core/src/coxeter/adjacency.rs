use std::collections::{HashMap, HashSet, VecDeque};

use super::{require_finite, CoxeterError, Word};
use crate::game::{fire_unchecked, Position};
use crate::graph::EGcmGraph;

fn has_adjacent_positive_pair(g: &EGcmGraph, p: &Position) -> bool {
    let pos = p.positive_nodes();
    pos.iter().any(|&i| g.neighbors(i).iter().any(|j| pos.contains(j)))
}

struct Search<'a> {
    g: &'a EGcmGraph,
    failed: HashSet<Position>,
    budget: usize,
    path: Word,
}

impl Search<'_> {
    fn run(&mut self, p: &Position) -> Result<bool, CoxeterError> {
        if has_adjacent_positive_pair(self.g, p) {
            return Ok(false);
        }
        let moves = p.positive_nodes();
        if moves.is_empty() {
            return Ok(true);
        }
        if self.failed.contains(p) {
            return Ok(false);
        }
        for i in moves {
            self.path.push(i);
            if self.run(&fire_unchecked(self.g, p, i)?)? {
                return Ok(true);
            }
            self.path.pop();
        }
        if self.failed.len() >= self.budget {
            return Err(CoxeterError::BudgetExceeded { what: "memo", budget: self.budget });
        }
        self.failed.insert(p.clone());
        Ok(false)
    }
}

/// A convergent play from `pos` in which no position has two adjacent
/// positive nodes, if one exists.
pub fn is_adjacency_free(g: &EGcmGraph, pos: &Position, memo_budget: usize) -> Result<Option<Word>, CoxeterError> {
    require_finite(g)?;
    if !pos.is_dominant() {
        return Err(CoxeterError::NotDominant);
    }
    let mut s = Search {
        g,
        failed: HashSet::new(),
        budget: memo_budget,
        path: Vec::new(),
    };
    Ok(s.run(pos)?.then_some(s.path))
}

/// A legal schedule from `pos` reaching a position with two adjacent
/// positive nodes, if any play does.
pub fn adjacency_reachable(g: &EGcmGraph, pos: &Position, memo_budget: usize) -> Result<Option<Word>, CoxeterError> {
    require_finite(g)?;
    if !pos.is_dominant() {
        return Err(CoxeterError::NotDominant);
    }
    let mut parent: HashMap<Position, Option<(Position, usize)>> = HashMap::new();
    parent.insert(pos.clone(), None);
    let mut queue = VecDeque::from([pos.clone()]);
    while let Some(p) = queue.pop_front() {
        if has_adjacent_positive_pair(g, &p) {
            let mut path = Vec::new();
            let mut cur = p;
            while let Some(Some((prev, i))) = parent.get(&cur) {
                path.push(*i);
                cur = prev.clone();
            }
            path.reverse();
            return Ok(Some(path));
        }
        for i in p.positive_nodes() {
            let q = fire_unchecked(g, &p, i)?;
            if !parent.contains_key(&q) {
                if parent.len() >= memo_budget {
                    return Err(CoxeterError::BudgetExceeded { what: "memo", budget: memo_budget });
                }
                parent.insert(q.clone(), Some((p.clone(), i)));
                queue.push_back(q);
            }
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::game::run_schedule;

    const BUDGET: usize = 1_000_000;

    fn free_nodes(g: &EGcmGraph) -> Vec<usize> {
        (0..g.n())
            .filter(|&i| is_adjacency_free(g, &Position::fundamental(g.n(), i), BUDGET).unwrap().is_some())
            .collect()
    }

    #[test]
    fn type_a_is_free_everywhere() {
        for n in 1..=4 {
            assert_eq!(free_nodes(&fixtures::a_n(n)), (0..n).collect::<Vec<_>>());
        }
    }

    #[test]
    fn witnesses_are_valid_plays() {
        let g = fixtures::a_n(4);
        let w = Position::fundamental(4, 1);
        let play = is_adjacency_free(&g, &w, BUDGET).unwrap().unwrap();
        let t = run_schedule(&g, &w, &play).unwrap();
        assert!(t.is_converged());
        for p in t.positions.unwrap() {
            assert!(!has_adjacent_positive_pair(&g, &p));
        }
    }

    fn every_play_free_nodes(g: &EGcmGraph) -> Vec<usize> {
        (0..g.n())
            .filter(|&i| adjacency_reachable(g, &Position::fundamental(g.n(), i), BUDGET).unwrap().is_none())
            .collect()
    }

    #[test]
    fn simply_laced_and_dihedral() {
        assert_eq!(free_nodes(&fixtures::d_n(4)), vec![0, 2, 3]);
        assert_eq!(free_nodes(&fixtures::i2(5)), vec![0, 1]);
        assert_eq!(free_nodes(&fixtures::e_n(6)), vec![0, 5]);
        for g in [fixtures::d_n(5), fixtures::e_n(6), fixtures::i2(7), fixtures::a_n(4)] {
            assert_eq!(free_nodes(&g), every_play_free_nodes(&g));
        }
    }

    #[test]
    fn multiple_bonds_separate_some_play_from_every_play() {
        let g = fixtures::coxeter_b(3);
        let w = Position::fundamental(3, 1);
        let play = is_adjacency_free(&g, &w, BUDGET).unwrap().unwrap();
        assert_eq!(play, vec![1, 0, 2, 1, 0, 2, 1]);
        let bad = adjacency_reachable(&g, &w, BUDGET).unwrap().unwrap();
        let t = run_schedule(&g, &w, &bad).unwrap();
        assert!(has_adjacent_positive_pair(&g, t.last_position()));
        assert_eq!(every_play_free_nodes(&g), vec![0, 2]);
        assert_eq!(free_nodes(&fixtures::f4()), vec![0, 1, 2, 3]);
        assert!(every_play_free_nodes(&fixtures::f4()).is_empty());
        assert_eq!(every_play_free_nodes(&fixtures::h3()), vec![2]);
    }

    #[test]
    fn preconditions() {
        let g = fixtures::cycle(3);
        assert_eq!(
            is_adjacency_free(&g, &Position::fundamental(3, 0), BUDGET).unwrap_err(),
            CoxeterError::InfiniteGroup
        );
        let g = fixtures::a_n(2);
        assert_eq!(
            is_adjacency_free(&g, &Position::from_i64s(&[1, -1]), BUDGET).unwrap_err(),
            CoxeterError::NotDominant
        );
    }
}
