//! Paths through odd bonds: K-coefficients, path products, components,
//! unital cycles, and the multiples of simple roots they produce.

use serde::Serialize;

use super::{EGcmGraph, GraphError};
use crate::arith::{AlgebraicReal, ArithError};

/// Positive multiples K of a simple root for which K times the root is a root.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", content = "values", rename_all = "kebab-case")]
pub enum Multiples {
    /// Sorted increasingly, always containing 1.
    Finite(Vec<AlgebraicReal>),
    Infinite,
}

impl Multiples {
    pub fn count(&self) -> Option<usize> {
        match self {
            Multiples::Finite(v) => Some(v.len()),
            Multiples::Infinite => None,
        }
    }
}

impl EGcmGraph {
    pub fn is_odd_adjacent(&self, i: usize, j: usize) -> bool {
        i != j && self.bonds[i][j].is_odd() && self.is_adjacent(i, j)
    }

    pub fn odd_neighbors(&self, i: usize) -> impl Iterator<Item = usize> + '_ {
        self.neighbors[i]
            .iter()
            .copied()
            .filter(move |&j| self.is_odd_adjacent(i, j))
    }

    /// K_ji = -M_ji / 2cos(pi/m_ij), so that v_ji.alpha_i = K_ji alpha_j.
    pub fn k_coefficient(&self, j: usize, i: usize) -> Result<AlgebraicReal, GraphError> {
        if !self.is_odd_adjacent(i, j) {
            return Err(GraphError::NotOddAdjacent { i: i + 1, j: j + 1 });
        }
        let m = self.bonds[i][j].finite().unwrap();
        let t = AlgebraicReal::try_two_cos(m)?;
        Ok((-&self.amps[j][i]).try_div(&t)?)
    }

    /// K_{i_p i_{p-1}} ... K_{i_1 i_0} for the path [i_0, ..., i_p].
    pub fn pi_product(&self, path: &[usize]) -> Result<AlgebraicReal, GraphError> {
        if let Some(&bad) = path.iter().find(|&&v| v >= self.n) {
            return Err(GraphError::NodeOutOfRange { node: bad + 1, n: self.n });
        }
        let mut acc = AlgebraicReal::one();
        for w in path.windows(2) {
            acc = acc.try_mul(&self.k_coefficient(w[1], w[0])?)?;
        }
        Ok(acc)
    }

    /// Classes of the odd-adjacency relation, each sorted, in order of least member.
    pub fn oa_components(&self) -> Vec<Vec<usize>> {
        let mut comp = vec![usize::MAX; self.n];
        let mut out = Vec::new();
        for s in 0..self.n {
            if comp[s] != usize::MAX {
                continue;
            }
            let id = out.len();
            comp[s] = id;
            let mut nodes = vec![s];
            let mut k = 0;
            while k < nodes.len() {
                let u = nodes[k];
                k += 1;
                for v in self.odd_neighbors(u) {
                    if comp[v] == usize::MAX {
                        comp[v] = id;
                        nodes.push(v);
                    }
                }
            }
            nodes.sort_unstable();
            out.push(nodes);
        }
        out
    }

    /// Every simple OA-path ending at `end`, as node sequences, including [end].
    pub fn simple_oa_paths(&self, end: usize) -> Vec<Vec<usize>> {
        let mut out = Vec::new();
        let mut rev = vec![end];
        let mut on = vec![false; self.n];
        on[end] = true;
        self.extend_paths(&mut rev, &mut on, &mut out);
        out
    }

    fn extend_paths(&self, rev: &mut Vec<usize>, on: &mut [bool], out: &mut Vec<Vec<usize>>) {
        out.push(rev.iter().rev().copied().collect());
        let u = *rev.last().unwrap();
        let nexts: Vec<usize> = self.odd_neighbors(u).filter(|&v| !on[v]).collect();
        for v in nexts {
            on[v] = true;
            rev.push(v);
            self.extend_paths(rev, on, out);
            rev.pop();
            on[v] = false;
        }
    }

    /// phi(v) = product along a spanning-tree path from the component's least
    /// node, or None if some odd bond disagrees with the tree.
    fn oa_potential(&self, comp: &[usize]) -> Result<Option<Vec<(usize, AlgebraicReal)>>, ArithError> {
        let mut phi: Vec<Option<AlgebraicReal>> = vec![None; self.n];
        phi[comp[0]] = Some(AlgebraicReal::one());
        let mut queue = vec![comp[0]];
        let mut k = 0;
        while k < queue.len() {
            let u = queue[k];
            k += 1;
            let pu = phi[u].clone().unwrap();
            for v in self.odd_neighbors(u) {
                let kvu = self.k_coefficient(v, u).map_err(graph_to_arith)?;
                let expected = kvu.try_mul(&pu)?;
                match &phi[v] {
                    None => {
                        phi[v] = Some(expected);
                        queue.push(v);
                    }
                    Some(pv) => {
                        if *pv != expected {
                            return Ok(None);
                        }
                    }
                }
            }
        }
        Ok(Some(comp.iter().map(|&v| (v, phi[v].clone().unwrap())).collect()))
    }

    /// True iff the product around every OA-cycle is 1.
    pub fn is_unital_oa_cyclic(&self) -> bool {
        self.try_is_unital_oa_cyclic().unwrap_or(false)
    }

    pub fn try_is_unital_oa_cyclic(&self) -> Result<bool, ArithError> {
        for comp in self.oa_components() {
            if self.oa_potential(&comp)?.is_none() {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// {Pi_P : P a simple OA-path ending at x} when x's component is unital.
    pub fn root_multiples(&self, x: usize) -> Result<Multiples, ArithError> {
        let comp = self
            .oa_components()
            .into_iter()
            .find(|c| c.contains(&x))
            .expect("node in some component");
        let Some(phi) = self.oa_potential(&comp)? else {
            return Ok(Multiples::Infinite);
        };
        let px = &phi.iter().find(|(v, _)| *v == x).unwrap().1;
        let mut vals: Vec<AlgebraicReal> = Vec::with_capacity(phi.len());
        for (_, py) in &phi {
            vals.push(px.try_div(py)?);
        }
        vals.sort();
        vals.dedup();
        Ok(Multiples::Finite(vals))
    }

    /// An odd bond with M_ij != M_ji.
    pub fn has_odd_asymmetry(&self) -> bool {
        self.edges()
            .into_iter()
            .any(|(i, j)| self.is_odd_adjacent(i, j) && self.amps[i][j] != self.amps[j][i])
    }
}

fn graph_to_arith(e: GraphError) -> ArithError {
    match e {
        GraphError::Arith(a) => a,
        other => ArithError::Invalid(other.to_string()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    fn q(n: i64, d: i64) -> AlgebraicReal {
        AlgebraicReal::from_ratio(n, d)
    }

    /// Oracle: enumerate simple OA-cycles through DFS and multiply K's.
    fn cycle_products(g: &EGcmGraph) -> Vec<AlgebraicReal> {
        let mut out = Vec::new();
        for s in 0..g.n() {
            let mut stack = vec![(vec![s], 0usize)];
            while let Some((path, _)) = stack.pop() {
                let u = *path.last().unwrap();
                for v in g.odd_neighbors(u) {
                    if v == s && path.len() >= 3 {
                        let mut c = path.clone();
                        c.push(s);
                        out.push(g.pi_product(&c).unwrap());
                    } else if v > s && !path.contains(&v) {
                        let mut p = path.clone();
                        p.push(v);
                        stack.push((p, 0));
                    }
                }
            }
        }
        out
    }

    #[test]
    fn k_coefficients_on_reconstruction() {
        let (g, n) = fixtures::oa_multiples();
        assert_eq!(g.k_coefficient(n.y, n.z).unwrap(), q(1, 2));
        assert_eq!(g.k_coefficient(n.z, n.y).unwrap(), q(2, 1));
        assert_eq!(g.k_coefficient(n.i, n.j).unwrap(), q(1, 5));
        assert_eq!(g.k_coefficient(n.j, n.i).unwrap(), q(5, 1));
        assert!(g.k_coefficient(n.j, n.x).is_err());
        assert_eq!(g.pi_product(&[n.z, n.y, n.x]).unwrap(), q(1, 7));
        assert_eq!(g.pi_product(&[n.x]).unwrap(), q(1, 1));
        assert_eq!(g.pi_product(&[n.y, n.z, n.y]).unwrap(), q(1, 1));
    }

    #[test]
    fn multiples_on_reconstruction() {
        let (g, n) = fixtures::oa_multiples();
        assert_eq!(g.root_multiples(n.i).unwrap(), Multiples::Finite(vec![q(1, 5), q(1, 1)]));
        assert_eq!(
            g.root_multiples(n.x).unwrap(),
            Multiples::Finite(vec![q(1, 7), q(2, 7), q(1, 1)])
        );
        assert_eq!(g.root_multiples(n.j).unwrap().count(), Some(2));
        assert_eq!(g.root_multiples(n.z).unwrap().count(), Some(3));
        assert_eq!(g.oa_components().len(), 2);
    }

    #[test]
    fn multiples_agree_with_path_enumeration() {
        let (g, _) = fixtures::oa_multiples();
        for x in 0..g.n() {
            let mut vals: Vec<AlgebraicReal> = g
                .simple_oa_paths(x)
                .iter()
                .map(|p| g.pi_product(p).unwrap())
                .collect();
            vals.sort();
            vals.dedup();
            assert_eq!(g.root_multiples(x).unwrap(), Multiples::Finite(vals));
        }
    }

    #[test]
    fn cycles() {
        let unit = fixtures::cycle(3);
        assert!(unit.is_unital_oa_cyclic());
        assert!(cycle_products(&unit).iter().all(|p| *p == q(1, 1)));
        let heavy = fixtures::non_unital_cycle(3, 5);
        assert!(!heavy.is_unital_oa_cyclic());
        assert!(cycle_products(&heavy).contains(&q(5, 1)));
        assert_eq!(heavy.root_multiples(0).unwrap(), Multiples::Infinite);
        let tree = fixtures::d_n(5);
        assert!(tree.is_unital_oa_cyclic());
    }

    #[test]
    fn symmetric_graphs_have_trivial_multiples() {
        for g in [fixtures::h3(), fixtures::e_n(6), fixtures::cycle(4)] {
            assert!(!g.has_odd_asymmetry());
            for x in 0..g.n() {
                assert_eq!(g.root_multiples(x).unwrap(), Multiples::Finite(vec![q(1, 1)]));
            }
        }
    }

    #[test]
    fn unital_iff_all_cycle_products_one() {
        for pi in [1, 2, 3] {
            for n in 3..=5 {
                let g = fixtures::non_unital_cycle(n, pi);
                let oracle = cycle_products(&g).iter().all(|p| *p == q(1, 1));
                assert_eq!(g.is_unital_oa_cyclic(), oracle);
            }
        }
    }
}
