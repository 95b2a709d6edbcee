//! GCM and E-GCM graphs: amplitude matrix, bond orders, the text format,
//! and odd-adjacency path machinery.

mod dsl;
mod oa;

use std::fmt;

use num_integer::Integer;
use serde::{Serialize, Serializer};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::arith::{degree_cap, field_degree, AlgebraicReal, ArithError};

pub use dsl::parse_graph_with;
pub use oa::Multiples;

/// Default upper limit for bond-order inference.
pub const DEFAULT_M_MAX: u32 = 60;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BondOrder {
    Finite(u32),
    Infinite,
}

impl BondOrder {
    pub fn finite(self) -> Option<u32> {
        match self {
            BondOrder::Finite(m) => Some(m),
            BondOrder::Infinite => None,
        }
    }

    pub fn is_odd(self) -> bool {
        matches!(self, BondOrder::Finite(m) if m % 2 == 1)
    }

    /// True for an actual edge of the graph.
    pub fn is_edge(self) -> bool {
        self != BondOrder::Finite(2)
    }
}

impl fmt::Display for BondOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BondOrder::Finite(m) => write!(f, "{m}"),
            BondOrder::Infinite => f.write_str("inf"),
        }
    }
}

impl Serialize for BondOrder {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            BondOrder::Finite(m) => s.serialize_u32(*m),
            BondOrder::Infinite => s.serialize_str("inf"),
        }
    }
}

/// Node numbers in messages are 1-based.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("line {line}: {source}")]
    AtLine {
        line: usize,
        #[source]
        source: Box<GraphError>,
    },
    #[error("graph must have at least one node")]
    Empty,
    #[error("node {node} out of range 1..={n}")]
    NodeOutOfRange { node: usize, n: usize },
    #[error("edge from node {node} to itself")]
    SelfLoop { node: usize },
    #[error("second edge between nodes {a} and {b}")]
    DuplicateEdge { a: usize, b: usize },
    #[error("diagonal entry at node {node} must be 2")]
    DiagonalNotTwo { node: usize },
    #[error("amplitude M[{i},{j}] must be negative")]
    NonNegativeAmplitude { i: usize, j: usize },
    #[error("M[{i},{j}] is zero but M[{j},{i}] is not")]
    OneSidedZero { i: usize, j: usize },
    #[error("amplitude product {product} on edge {i}-{j} is below 4 and matches no 4cos^2(pi/m) with m <= {m_max}")]
    NoMatchingBondOrder {
        i: usize,
        j: usize,
        product: String,
        m_max: u32,
    },
    #[error("edge {i}-{j} declares m={declared} but the amplitude product is {product}")]
    InconsistentBondOrder {
        i: usize,
        j: usize,
        declared: BondOrder,
        product: String,
    },
    #[error("nodes {i} and {j} are not joined by an odd bond")]
    NotOddAdjacent { i: usize, j: usize },
    #[error("{0}")]
    Arith(#[from] ArithError),
}

impl GraphError {
    fn at_line(self, line: usize) -> GraphError {
        match self {
            e @ (GraphError::Syntax { .. } | GraphError::AtLine { .. }) => e,
            e => GraphError::AtLine {
                line,
                source: Box::new(e),
            },
        }
    }
}

/// A validated graph. Immutable after construction.
#[derive(Clone, PartialEq, Eq)]
pub struct EGcmGraph {
    n: usize,
    names: Vec<Option<String>>,
    amps: Vec<Vec<AlgebraicReal>>,
    bonds: Vec<Vec<BondOrder>>,
    neighbors: Vec<Vec<usize>>,
    level: u32,
    integer: bool,
}

#[derive(Clone, Debug)]
struct EdgeSpec {
    a: usize,
    b: usize,
    p: AlgebraicReal,
    q: AlgebraicReal,
    m: Option<BondOrder>,
    line: Option<usize>,
}

/// Incremental construction with 0-based node indices.
#[derive(Clone, Debug)]
pub struct GraphBuilder {
    n: usize,
    names: Vec<Option<String>>,
    edges: Vec<EdgeSpec>,
    m_max: u32,
}

impl GraphBuilder {
    pub fn new(n: usize) -> GraphBuilder {
        GraphBuilder {
            n,
            names: vec![None; n],
            edges: Vec::new(),
            m_max: DEFAULT_M_MAX,
        }
    }

    pub fn m_max(mut self, m_max: u32) -> Self {
        self.m_max = m_max;
        self
    }

    pub fn name(mut self, node: usize, name: impl Into<String>) -> Self {
        if node < self.n {
            self.names[node] = Some(name.into());
        }
        self
    }

    /// Sets M_ab = -p and M_ba = -q.
    pub fn edge(self, a: usize, b: usize, p: AlgebraicReal, q: AlgebraicReal) -> Self {
        self.push(a, b, p, q, None, None)
    }

    pub fn edge_with_order(
        self,
        a: usize,
        b: usize,
        p: AlgebraicReal,
        q: AlgebraicReal,
        m: BondOrder,
    ) -> Self {
        self.push(a, b, p, q, Some(m), None)
    }

    /// Edge with equal amplitudes on both sides.
    pub fn symmetric_edge(self, a: usize, b: usize, p: AlgebraicReal) -> Self {
        self.edge(a, b, p.clone(), p)
    }

    fn push(
        mut self,
        a: usize,
        b: usize,
        p: AlgebraicReal,
        q: AlgebraicReal,
        m: Option<BondOrder>,
        line: Option<usize>,
    ) -> Self {
        self.edges.push(EdgeSpec { a, b, p, q, m, line });
        self
    }

    pub fn build(self) -> Result<EGcmGraph, GraphError> {
        let n = self.n;
        if n == 0 {
            return Err(GraphError::Empty);
        }
        let mut amps = vec![vec![AlgebraicReal::zero(); n]; n];
        for (i, row) in amps.iter_mut().enumerate() {
            row[i] = AlgebraicReal::from_i64(2);
        }
        let mut bonds = vec![vec![BondOrder::Finite(2); n]; n];
        let mut seen = vec![vec![false; n]; n];
        for e in &self.edges {
            let tag = |err: GraphError| match e.line {
                Some(l) => err.at_line(l),
                None => err,
            };
            for &x in &[e.a, e.b] {
                if x >= n {
                    return Err(tag(GraphError::NodeOutOfRange { node: x + 1, n }));
                }
            }
            if e.a == e.b {
                return Err(tag(GraphError::SelfLoop { node: e.a + 1 }));
            }
            if seen[e.a][e.b] {
                return Err(tag(GraphError::DuplicateEdge {
                    a: e.a.min(e.b) + 1,
                    b: e.a.max(e.b) + 1,
                }));
            }
            seen[e.a][e.b] = true;
            seen[e.b][e.a] = true;
            if !e.p.is_positive() {
                return Err(tag(GraphError::NonNegativeAmplitude { i: e.a + 1, j: e.b + 1 }));
            }
            if !e.q.is_positive() {
                return Err(tag(GraphError::NonNegativeAmplitude { i: e.b + 1, j: e.a + 1 }));
            }
            let m = bond_for(&e.p, &e.q, e.m, self.m_max, e.a, e.b).map_err(tag)?;
            amps[e.a][e.b] = -&e.p;
            amps[e.b][e.a] = -&e.q;
            bonds[e.a][e.b] = m;
            bonds[e.b][e.a] = m;
        }
        EGcmGraph::assemble(self.names, amps, bonds)
    }
}

fn bond_for(
    p: &AlgebraicReal,
    q: &AlgebraicReal,
    declared: Option<BondOrder>,
    m_max: u32,
    a: usize,
    b: usize,
) -> Result<BondOrder, GraphError> {
    let product = p.try_mul(q)?;
    let four = AlgebraicReal::from_i64(4);
    let at_least_four = product.try_sub(&four)?.sign() >= 0;
    match declared {
        Some(BondOrder::Infinite) => {
            if at_least_four {
                Ok(BondOrder::Infinite)
            } else {
                Err(GraphError::InconsistentBondOrder {
                    i: a + 1,
                    j: b + 1,
                    declared: BondOrder::Infinite,
                    product: product.to_string(),
                })
            }
        }
        Some(BondOrder::Finite(m)) => {
            if m >= 3 && !at_least_four && cos_square_matches(&product, m) {
                Ok(BondOrder::Finite(m))
            } else {
                Err(GraphError::InconsistentBondOrder {
                    i: a + 1,
                    j: b + 1,
                    declared: BondOrder::Finite(m),
                    product: product.to_string(),
                })
            }
        }
        None => {
            if at_least_four {
                return Ok(BondOrder::Infinite);
            }
            let pf = product.to_f64();
            for m in 3..=m_max {
                let c = (std::f64::consts::PI / m as f64).cos();
                if (4.0 * c * c - pf).abs() < 1e-9 && cos_square_matches(&product, m) {
                    return Ok(BondOrder::Finite(m));
                }
            }
            Err(GraphError::NoMatchingBondOrder {
                i: a + 1,
                j: b + 1,
                product: product.to_string(),
                m_max,
            })
        }
    }
}

/// Exact test of product == 4cos^2(pi/m) = 2 + 2cos(2pi/m).
fn cos_square_matches(product: &AlgebraicReal, m: u32) -> bool {
    let target = if m % 2 == 0 {
        AlgebraicReal::try_two_cos(m / 2).map(|t| t + AlgebraicReal::from_i64(2))
    } else {
        AlgebraicReal::try_two_cos(m).and_then(|t| t.try_mul(&t))
    };
    // Values are canonical, so equality is structural and needs no lifting.
    matches!(target, Ok(t) if &t == product)
}

impl EGcmGraph {
    pub fn builder(n: usize) -> GraphBuilder {
        GraphBuilder::new(n)
    }

    /// Builds from a full amplitude matrix, inferring every bond order.
    pub fn from_matrix(rows: Vec<Vec<AlgebraicReal>>, m_max: u32) -> Result<EGcmGraph, GraphError> {
        let n = rows.len();
        if n == 0 {
            return Err(GraphError::Empty);
        }
        let two = AlgebraicReal::from_i64(2);
        let mut b = GraphBuilder::new(n).m_max(m_max);
        for i in 0..n {
            if rows[i].len() != n {
                return Err(GraphError::Syntax {
                    line: i + 1,
                    column: 1,
                    message: format!("row has {} entries, expected {n}", rows[i].len()),
                });
            }
            if rows[i][i] != two {
                return Err(GraphError::DiagonalNotTwo { node: i + 1 });
            }
        }
        for i in 0..n {
            for j in i + 1..n {
                let (x, y) = (&rows[i][j], &rows[j][i]);
                match (x.is_zero(), y.is_zero()) {
                    (true, true) => continue,
                    (true, false) => return Err(GraphError::OneSidedZero { i: i + 1, j: j + 1 }),
                    (false, true) => return Err(GraphError::OneSidedZero { i: j + 1, j: i + 1 }),
                    _ => {}
                }
                if !x.is_negative() {
                    return Err(GraphError::NonNegativeAmplitude { i: i + 1, j: j + 1 });
                }
                if !y.is_negative() {
                    return Err(GraphError::NonNegativeAmplitude { i: j + 1, j: i + 1 });
                }
                b = b.edge(i, j, -x, -y);
            }
        }
        b.build()
    }

    fn assemble(
        names: Vec<Option<String>>,
        amps: Vec<Vec<AlgebraicReal>>,
        bonds: Vec<Vec<BondOrder>>,
    ) -> Result<EGcmGraph, GraphError> {
        let n = amps.len();
        let mut level: u64 = 1;
        let mut integer = true;
        let mut neighbors = vec![Vec::new(); n];
        for i in 0..n {
            for j in 0..n {
                if i == j {
                    continue;
                }
                let a = &amps[i][j];
                if !a.is_zero() {
                    neighbors[i].push(j);
                }
                integer &= a.is_integer();
                level = level.lcm(&(a.level() as u64));
                if let BondOrder::Finite(m) = bonds[i][j] {
                    if m % 2 == 1 && m > 3 {
                        level = level.lcm(&(m as u64));
                    }
                }
            }
        }
        let cap = degree_cap();
        let level32 = u32::try_from(level).ok().filter(|l| field_degree(*l) <= cap);
        let Some(level) = level32 else {
            return Err(GraphError::Arith(ArithError::DegreeCapExceeded {
                lcm: level,
                degree: u32::try_from(level).map(field_degree).unwrap_or(usize::MAX),
                cap,
            }));
        };
        Ok(EGcmGraph {
            n,
            names,
            amps,
            bonds,
            neighbors,
            level,
            integer,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn name(&self, i: usize) -> Option<&str> {
        self.names[i].as_deref()
    }

    /// The node's name, or its 1-based index.
    pub fn label(&self, i: usize) -> String {
        self.names[i].clone().unwrap_or_else(|| (i + 1).to_string())
    }

    /// Resolves a name or a 1-based index to a 0-based node.
    pub fn resolve(&self, token: &str) -> Option<usize> {
        if let Ok(k) = token.parse::<usize>() {
            return (1..=self.n).contains(&k).then(|| k - 1);
        }
        self.names.iter().position(|s| s.as_deref() == Some(token))
    }

    /// The entry M_ij.
    pub fn amplitude(&self, i: usize, j: usize) -> &AlgebraicReal {
        &self.amps[i][j]
    }

    pub fn amplitudes(&self) -> &[Vec<AlgebraicReal>] {
        &self.amps
    }

    pub fn bond_order(&self, i: usize, j: usize) -> BondOrder {
        if i == j {
            BondOrder::Finite(1)
        } else {
            self.bonds[i][j]
        }
    }

    pub fn is_adjacent(&self, i: usize, j: usize) -> bool {
        i != j && !self.amps[i][j].is_zero()
    }

    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.neighbors[i]
    }

    /// Pairs (i, j) with i < j joined by an edge.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        (0..self.n)
            .flat_map(|i| self.neighbors[i].iter().filter(move |&&j| j > i).map(move |&j| (i, j)))
            .collect()
    }

    /// lcm of all amplitude levels and odd bond orders.
    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn has_integer_amplitudes(&self) -> bool {
        self.integer
    }

    pub fn is_symmetric(&self) -> bool {
        (0..self.n).all(|i| (0..i).all(|j| self.amps[i][j] == self.amps[j][i]))
    }

    /// Connected components of the underlying graph, each sorted.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let mut comp = vec![usize::MAX; self.n];
        let mut out = Vec::new();
        for s in 0..self.n {
            if comp[s] != usize::MAX {
                continue;
            }
            let id = out.len();
            let mut nodes = vec![s];
            comp[s] = id;
            let mut k = 0;
            while k < nodes.len() {
                let u = nodes[k];
                k += 1;
                for &v in &self.neighbors[u] {
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

    pub fn is_connected(&self) -> bool {
        self.components().len() == 1
    }

    /// The subgraph on the given nodes, renumbered in the given order.
    pub fn induced_subgraph(&self, nodes: &[usize]) -> EGcmGraph {
        let names = nodes.iter().map(|&i| self.names[i].clone()).collect();
        let amps = nodes
            .iter()
            .map(|&i| nodes.iter().map(|&j| self.amps[i][j].clone()).collect())
            .collect();
        let bonds = nodes
            .iter()
            .map(|&i| nodes.iter().map(|&j| self.bonds[i][j]).collect())
            .collect();
        EGcmGraph::assemble(names, amps, bonds).expect("subgraph of a valid graph")
    }

    /// Canonical text form: nodes in index order, edges lexicographic.
    pub fn to_dsl(&self) -> String {
        let mut out = format!("nodes {}\n", self.n);
        for (i, name) in self.names.iter().enumerate() {
            if let Some(name) = name {
                out.push_str(&format!("name {} {}\n", i + 1, name));
            }
        }
        for (i, j) in self.edges() {
            out.push_str(&format!(
                "edge {} {} p={} q={} m={}\n",
                i + 1,
                j + 1,
                -&self.amps[i][j],
                -&self.amps[j][i],
                self.bonds[i][j]
            ));
        }
        out
    }

    /// SHA-256 of the canonical text form, hex encoded.
    pub fn digest(&self) -> String {
        hex::encode(Sha256::digest(self.to_dsl().as_bytes()))
    }
}

impl fmt::Debug for EGcmGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_dsl())
    }
}

/// Parses the text format with the default inference limit.
pub fn parse_graph(text: &str) -> Result<EGcmGraph, GraphError> {
    parse_graph_with(text, DEFAULT_M_MAX)
}

#[derive(Serialize)]
struct WireEdge {
    a: usize,
    b: usize,
    p: AlgebraicReal,
    q: AlgebraicReal,
    m: BondOrder,
}

#[derive(Serialize)]
struct WireGraph {
    nodes: usize,
    names: Vec<Option<String>>,
    edges: Vec<WireEdge>,
    level: u32,
    integer_amplitudes: bool,
    digest: String,
}

impl Serialize for EGcmGraph {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        WireGraph {
            nodes: self.n,
            names: self.names.clone(),
            edges: self
                .edges()
                .into_iter()
                .map(|(i, j)| WireEdge {
                    a: i + 1,
                    b: j + 1,
                    p: -&self.amps[i][j],
                    q: -&self.amps[j][i],
                    m: self.bonds[i][j],
                })
                .collect(),
            level: self.level,
            integer_amplitudes: self.integer,
            digest: self.digest(),
        }
        .serialize(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64) -> AlgebraicReal {
        AlgebraicReal::from_i64(n)
    }

    #[test]
    fn bond_orders_from_products() {
        let g = |p, q| {
            EGcmGraph::builder(2).edge(0, 1, r(p), r(q)).build().unwrap().bond_order(0, 1)
        };
        assert_eq!(g(1, 1), BondOrder::Finite(3));
        assert_eq!(g(1, 2), BondOrder::Finite(4));
        assert_eq!(g(1, 3), BondOrder::Finite(6));
        assert_eq!(g(2, 2), BondOrder::Infinite);
        assert_eq!(g(1, 5), BondOrder::Infinite);
    }

    #[test]
    fn non_adjacent_pairs_have_order_two() {
        let g = EGcmGraph::builder(3).edge(0, 1, r(1), r(1)).build().unwrap();
        assert_eq!(g.bond_order(0, 2), BondOrder::Finite(2));
        assert!(!g.is_adjacent(0, 2));
        assert_eq!(g.components(), vec![vec![0, 1], vec![2]]);
    }

    #[test]
    fn irrational_products() {
        let c7 = AlgebraicReal::two_cos(7);
        let g = EGcmGraph::builder(2).edge(0, 1, c7.clone(), c7).build().unwrap();
        assert_eq!(g.bond_order(0, 1), BondOrder::Finite(7));
        assert_eq!(g.level(), 7);
        assert!(!g.has_integer_amplitudes());
        // product 2 + c(5) = 4cos^2(pi/10), split unevenly
        let p = AlgebraicReal::from_ratio(1, 2);
        let q = (AlgebraicReal::from_i64(2) + AlgebraicReal::two_cos(5)) * r(2);
        let g = EGcmGraph::builder(2).edge(0, 1, p, q).build().unwrap();
        assert_eq!(g.bond_order(0, 1), BondOrder::Finite(10));
    }

    #[test]
    fn constraint_violations() {
        let e = EGcmGraph::builder(2)
            .edge(0, 1, AlgebraicReal::from_ratio(1, 2), r(1))
            .build()
            .unwrap_err();
        assert!(matches!(e, GraphError::NoMatchingBondOrder { .. }), "{e}");
        let e = EGcmGraph::builder(2)
            .edge_with_order(0, 1, r(1), r(1), BondOrder::Finite(4))
            .build()
            .unwrap_err();
        assert!(matches!(e, GraphError::InconsistentBondOrder { .. }));
        let e = EGcmGraph::builder(2).edge(0, 1, r(-1), r(1)).build().unwrap_err();
        assert!(matches!(e, GraphError::NonNegativeAmplitude { i: 1, j: 2 }));
        let e = EGcmGraph::builder(2)
            .edge(0, 1, r(1), r(1))
            .edge(1, 0, r(1), r(1))
            .build()
            .unwrap_err();
        assert_eq!(e, GraphError::DuplicateEdge { a: 1, b: 2 });
    }

    #[test]
    fn from_matrix_checks_zero_pattern() {
        let m = vec![vec![r(2), r(-1)], vec![r(0), r(2)]];
        assert_eq!(
            EGcmGraph::from_matrix(m, DEFAULT_M_MAX).unwrap_err(),
            GraphError::OneSidedZero { i: 2, j: 1 }
        );
        let m = vec![vec![r(2), r(-1)], vec![r(-2), r(2)]];
        let g = EGcmGraph::from_matrix(m, DEFAULT_M_MAX).unwrap();
        assert_eq!(g.bond_order(0, 1), BondOrder::Finite(4));
    }

    #[test]
    fn declared_order_above_inference_limit() {
        let c = AlgebraicReal::two_cos(61);
        let e = EGcmGraph::builder(2).edge(0, 1, c.clone(), c.clone()).build();
        assert!(matches!(e, Err(GraphError::NoMatchingBondOrder { m_max: 60, .. })));
        let g = EGcmGraph::builder(2)
            .edge_with_order(0, 1, c.clone(), c, BondOrder::Finite(61))
            .build()
            .unwrap();
        assert_eq!(g.bond_order(0, 1), BondOrder::Finite(61));
    }

    #[test]
    fn subgraph_renumbers() {
        let g = EGcmGraph::builder(3)
            .edge(0, 1, r(1), r(2))
            .edge(1, 2, r(1), r(1))
            .build()
            .unwrap();
        let s = g.induced_subgraph(&[2, 1]);
        assert_eq!(s.n(), 2);
        assert_eq!(s.amplitude(1, 0), &r(-1));
        assert_eq!(s.bond_order(0, 1), BondOrder::Finite(3));
    }
}
