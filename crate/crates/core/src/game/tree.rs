use std::collections::{BTreeSet, HashMap};

use super::{check_dims, fire_unchecked, GameError, Position};
use crate::graph::EGcmGraph;

pub const DEFAULT_MEMO_BUDGET: usize = 1_000_000;

#[derive(Clone, Debug)]
pub struct TreeOptions {
    /// Plays longer than this are cut off.
    pub max_steps: usize,
    /// Maximum number of distinct positions to memoize.
    pub memo_budget: usize,
    /// Maximum number of plays listed in [`GameTree::traces`].
    pub trace_cap: usize,
}

impl Default for TreeOptions {
    fn default() -> Self {
        TreeOptions {
            max_steps: super::DEFAULT_STEP_BUDGET,
            memo_budget: DEFAULT_MEMO_BUDGET,
            trace_cap: 10_000,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Truncation {
    MemoBudget,
    StepLimit,
}

#[derive(Clone, Debug)]
pub struct GameTree {
    pub reachable_positions: usize,
    /// Number of maximal convergent plays, saturating.
    pub plays: u64,
    /// Firing sequences of maximal plays, at most `trace_cap` of them.
    pub traces: Vec<Vec<usize>>,
    pub traces_complete: bool,
    pub terminals: Vec<Position>,
    /// Sorted.
    pub lengths: Vec<usize>,
    /// Some position repeats along a play.
    pub has_cycle: bool,
    pub truncation: Option<Truncation>,
}

impl GameTree {
    pub fn all_converge(&self) -> bool {
        self.truncation.is_none() && !self.has_cycle
    }

    pub fn unique_terminal(&self) -> bool {
        self.all_converge() && self.terminals.len() == 1
    }

    pub fn unique_length(&self) -> bool {
        self.all_converge() && self.lengths.len() == 1
    }
}

#[derive(Clone, Default)]
struct Summary {
    lengths: BTreeSet<usize>,
    terminals: BTreeSet<usize>,
    plays: u64,
    complete: bool,
    cycle: bool,
}

impl Summary {
    fn absorb(&mut self, child: &Summary) {
        self.lengths.extend(child.lengths.iter().map(|l| l + 1));
        self.terminals.extend(&child.terminals);
        self.plays = self.plays.saturating_add(child.plays);
        self.complete &= child.complete;
        self.cycle |= child.cycle;
    }
}

struct Frame {
    id: usize,
    pos: Position,
    moves: Vec<usize>,
    next: usize,
    acc: Summary,
}

enum Visit {
    Done(usize),
    Cycle,
    Open(Frame),
}

struct Explorer<'a> {
    g: &'a EGcmGraph,
    opts: &'a TreeOptions,
    ids: HashMap<Position, usize>,
    done: Vec<Option<Summary>>,
    terminals: Vec<Position>,
    terminal_ids: HashMap<usize, usize>,
}

impl Explorer<'_> {
    fn visit(&mut self, pos: Position, depth: usize) -> Result<Option<Visit>, GameError> {
        let id = match self.ids.get(&pos) {
            Some(&id) => {
                if self.done[id].is_none() {
                    // Memoized without a summary: the position is on the current path.
                    return Ok(Some(Visit::Cycle));
                }
                id
            }
            None => {
                if self.ids.len() >= self.opts.memo_budget {
                    return Ok(None);
                }
                let id = self.done.len();
                self.ids.insert(pos.clone(), id);
                self.done.push(None);
                id
            }
        };
        if self.done[id].is_some() {
            return Ok(Some(Visit::Done(id)));
        }
        let moves = pos.positive_nodes();
        if moves.is_empty() {
            let t = self.terminals.len();
            let t = *self.terminal_ids.entry(id).or_insert(t);
            if t == self.terminals.len() {
                self.terminals.push(pos);
            }
            self.done[id] = Some(Summary {
                lengths: BTreeSet::from([0]),
                terminals: BTreeSet::from([t]),
                plays: 1,
                complete: true,
                cycle: false,
            });
            return Ok(Some(Visit::Done(id)));
        }
        if depth >= self.opts.max_steps {
            self.done[id] = Some(Summary { complete: false, ..Default::default() });
            return Ok(Some(Visit::Done(id)));
        }
        Ok(Some(Visit::Open(Frame {
            id,
            pos,
            moves,
            next: 0,
            acc: Summary { complete: true, ..Default::default() },
        })))
    }
}

/// Explores every legal firing from `pos`, memoizing positions.
pub fn game_tree(g: &EGcmGraph, pos: &Position, opts: &TreeOptions) -> Result<GameTree, GameError> {
    check_dims(g, pos)?;
    let mut ex = Explorer {
        g,
        opts,
        ids: HashMap::new(),
        done: Vec::new(),
        terminals: Vec::new(),
        terminal_ids: HashMap::new(),
    };
    let mut stack: Vec<Frame> = Vec::new();
    let mut root_summary = None;
    let mut memo_exhausted = false;
    match ex.visit(pos.clone(), 0)? {
        None => memo_exhausted = true,
        Some(Visit::Done(id)) => root_summary = ex.done[id].clone(),
        Some(Visit::Cycle) => unreachable!(),
        Some(Visit::Open(f)) => stack.push(f),
    }
    'outer: while let Some(top) = stack.last_mut() {
        if top.next < top.moves.len() {
            let i = top.moves[top.next];
            top.next += 1;
            let child = fire_unchecked(ex.g, &top.pos, i)?;
            let depth = stack.len();
            match ex.visit(child, depth)? {
                None => {
                    memo_exhausted = true;
                    break 'outer;
                }
                Some(Visit::Done(id)) => {
                    let s = ex.done[id].clone().unwrap();
                    stack.last_mut().unwrap().acc.absorb(&s);
                }
                Some(Visit::Cycle) => stack.last_mut().unwrap().acc.cycle = true,
                Some(Visit::Open(f)) => stack.push(f),
            }
        } else {
            let f = stack.pop().unwrap();
            ex.done[f.id] = Some(f.acc.clone());
            match stack.last_mut() {
                Some(parent) => parent.acc.absorb(&f.acc),
                None => root_summary = Some(f.acc),
            }
        }
    }
    let reachable_positions = ex.ids.len();
    let (traces, traces_complete) = if memo_exhausted {
        (Vec::new(), false)
    } else {
        enumerate_plays(g, pos, opts.trace_cap, opts.max_steps)?
    };
    let truncation = if memo_exhausted {
        Some(Truncation::MemoBudget)
    } else if !root_summary.as_ref().unwrap().complete {
        Some(Truncation::StepLimit)
    } else {
        None
    };
    let s = root_summary.unwrap_or_default();
    Ok(GameTree {
        reachable_positions,
        plays: s.plays,
        traces,
        traces_complete,
        terminals: s.terminals.iter().map(|&t| ex.terminals[t].clone()).collect(),
        lengths: s.lengths.into_iter().collect(),
        has_cycle: s.cycle,
        truncation,
    })
}

/// Lists maximal convergent plays by depth-first search, stopping after
/// `cap` plays. The flag says whether the list is exhaustive.
pub fn enumerate_plays(
    g: &EGcmGraph,
    pos: &Position,
    cap: usize,
    max_steps: usize,
) -> Result<(Vec<Vec<usize>>, bool), GameError> {
    check_dims(g, pos)?;
    let mut out = Vec::new();
    let mut path: Vec<usize> = Vec::new();
    let mut stack: Vec<(Position, Vec<usize>, usize)> = vec![(pos.clone(), pos.positive_nodes(), 0)];
    let mut complete = true;
    while let Some((cur, moves, next)) = stack.last_mut() {
        if moves.is_empty() {
            if out.len() >= cap {
                return Ok((out, false));
            }
            out.push(path.clone());
            stack.pop();
            path.pop();
            continue;
        }
        if *next == moves.len() {
            stack.pop();
            path.pop();
            continue;
        }
        if path.len() >= max_steps {
            complete = false;
            stack.pop();
            path.pop();
            continue;
        }
        let i = moves[*next];
        *next += 1;
        let child = fire_unchecked(g, cur, i)?;
        let child_moves = child.positive_nodes();
        path.push(i);
        stack.push((child, child_moves, 0));
    }
    Ok((out, complete))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn b2_two_branches() {
        let g = fixtures::b_n(2);
        let t = game_tree(&g, &Position::from_i64s(&[1, 1]), &TreeOptions::default()).unwrap();
        assert!(t.unique_terminal() && t.unique_length());
        assert_eq!(t.lengths, vec![4]);
        assert_eq!(t.terminals, vec![Position::from_i64s(&[-1, -1])]);
        assert_eq!(t.plays, 2);
        let mut traces = t.traces.clone();
        traces.sort();
        assert_eq!(traces, vec![vec![0, 1, 0, 1], vec![1, 0, 1, 0]]);
        assert_eq!(t.reachable_positions, 8);
    }

    #[test]
    fn single_node() {
        let g = fixtures::a_n(1);
        let t = game_tree(&g, &Position::ones(1), &TreeOptions::default()).unwrap();
        assert_eq!(t.plays, 1);
        assert_eq!(t.lengths, vec![1]);
        assert_eq!(t.terminals, vec![Position::from_i64s(&[-1])]);
    }

    #[test]
    fn a3_middle_fundamental_agrees_with_enumeration() {
        let g = fixtures::a_n(3);
        let w = Position::fundamental(3, 1);
        let t = game_tree(&g, &w, &TreeOptions::default()).unwrap();
        assert!(t.unique_terminal() && t.unique_length());
        // Oracle: run every enumerated play as a schedule.
        let (plays, complete) = enumerate_plays(&g, &w, 1000, 100).unwrap();
        assert!(complete);
        assert_eq!(plays.len() as u64, t.plays);
        for play in &plays {
            let tr = super::super::run_schedule(&g, &w, play).unwrap();
            assert_eq!(tr.terminal(), Some(&t.terminals[0]));
            assert_eq!(play.len(), t.lengths[0]);
        }
    }

    #[test]
    fn divergent_graph_hits_limits() {
        let g = fixtures::cycle(3);
        let w = Position::fundamental(3, 0);
        let t = game_tree(&g, &w, &TreeOptions { max_steps: 30, ..Default::default() }).unwrap();
        assert_eq!(t.truncation, Some(Truncation::StepLimit));
        assert!(!t.all_converge());
        let t = game_tree(&g, &w, &TreeOptions { memo_budget: 50, ..Default::default() }).unwrap();
        assert_eq!(t.truncation, Some(Truncation::MemoBudget));
    }

    #[test]
    fn zero_position_is_terminal() {
        let g = fixtures::cycle(4);
        let t = game_tree(&g, &Position::zeros(4), &TreeOptions::default()).unwrap();
        assert!(t.unique_terminal());
        assert_eq!(t.lengths, vec![0]);
    }
}
