//! Recognition of Dynkin diagrams and E-Coxeter graphs, and symmetrizability.

use std::fmt;

use serde::{Serialize, Serializer};

use crate::arith::AlgebraicReal;
use crate::graph::{BondOrder, EGcmGraph};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Family {
    A(usize),
    B(usize),
    C(usize),
    D(usize),
    E(usize),
    F4,
    G2,
    H(usize),
    I2(u32),
}

impl Family {
    pub fn rank(self) -> usize {
        match self {
            Family::A(n) | Family::B(n) | Family::C(n) | Family::D(n) | Family::E(n) | Family::H(n) => n,
            Family::F4 => 4,
            Family::G2 | Family::I2(_) => 2,
        }
    }

    /// Length of the longest element of the Coxeter group.
    pub fn longest_length(self) -> u64 {
        match self {
            Family::A(n) => (n * (n + 1) / 2) as u64,
            Family::B(n) | Family::C(n) => (n * n) as u64,
            Family::D(n) => (n * (n - 1)) as u64,
            Family::E(6) => 36,
            Family::E(7) => 63,
            Family::E(8) => 120,
            Family::E(_) => unreachable!(),
            Family::F4 => 24,
            Family::G2 => 6,
            Family::H(3) => 15,
            Family::H(4) => 60,
            Family::H(_) => unreachable!(),
            Family::I2(m) => m as u64,
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Family::A(n) => write!(f, "A{n}"),
            Family::B(n) => write!(f, "B{n}"),
            Family::C(n) => write!(f, "C{n}"),
            Family::D(n) => write!(f, "D{n}"),
            Family::E(n) => write!(f, "E{n}"),
            Family::F4 => f.write_str("F4"),
            Family::G2 => f.write_str("G2"),
            Family::H(n) => write!(f, "H{n}"),
            Family::I2(m) => write!(f, "I2({m})"),
        }
    }
}

impl Serialize for Family {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// Dynkin for integer amplitudes, E-Coxeter otherwise.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Kind {
    Dynkin,
    ECoxeter,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Reason {
    InfiniteBond { a: usize, b: usize },
    CyclePresent,
    BranchShape,
    BondPlacement,
    NonUnitalOaCycle,
}

impl fmt::Display for Reason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Reason::InfiniteBond { a, b } => write!(f, "infinite bond between nodes {a} and {b}"),
            Reason::CyclePresent => f.write_str("cycle present"),
            Reason::BranchShape => f.write_str("branch shape matches no family"),
            Reason::BondPlacement => f.write_str("bond orders in positions no family permits"),
            Reason::NonUnitalOaCycle => f.write_str("non-unital OA-cycle"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ComponentVerdict {
    /// 0-based, sorted.
    pub nodes: Vec<usize>,
    pub kind: Kind,
    pub family: Option<Family>,
    pub reasons: Vec<Reason>,
    /// For an all-m=3 cycle: one pass of a schedule that repeats forever
    /// from the fundamental position of its first node.
    pub witness: Option<Vec<usize>>,
}

impl ComponentVerdict {
    pub fn l_w0(&self) -> Option<u64> {
        self.family.map(Family::longest_length)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Verdict {
    pub components: Vec<ComponentVerdict>,
    pub admissible: bool,
    pub finite: bool,
}

impl Verdict {
    /// Sum of the component lengths when every component is finite.
    pub fn l_w0(&self) -> Option<u64> {
        self.components.iter().map(ComponentVerdict::l_w0).sum()
    }

    /// The single family of a connected graph.
    pub fn family(&self) -> Option<Family> {
        match self.components.as_slice() {
            [c] => c.family,
            _ => None,
        }
    }

    pub fn reasons(&self) -> Vec<String> {
        self.components
            .iter()
            .flat_map(|c| {
                let nodes: Vec<String> = c.nodes.iter().map(|v| (v + 1).to_string()).collect();
                let nodes = nodes.join(",");
                c.reasons
                    .iter()
                    .map(move |r| format!("component {{{nodes}}}: {r}"))
            })
            .collect()
    }
}

#[derive(Serialize)]
struct WireComponent<'a> {
    nodes: Vec<usize>,
    kind: Kind,
    family: Option<Family>,
    rank: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    m: Option<u32>,
    l_w0: Option<u64>,
    #[serde(skip_serializing_if = "<[Reason]>::is_empty")]
    reasons: &'a [Reason],
    #[serde(skip_serializing_if = "Option::is_none")]
    witness: Option<Vec<usize>>,
}

#[derive(Serialize)]
struct WireVerdict<'a> {
    components: Vec<WireComponent<'a>>,
    admissible: bool,
    finite: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    l_w0: Option<u64>,
    reasons: Vec<String>,
}

/// JSON uses 1-based node numbers.
impl Serialize for Verdict {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        WireVerdict {
            components: self
                .components
                .iter()
                .map(|c| WireComponent {
                    nodes: c.nodes.iter().map(|v| v + 1).collect(),
                    kind: c.kind,
                    family: c.family,
                    rank: c.nodes.len(),
                    m: match c.family {
                        Some(Family::I2(m)) => Some(m),
                        _ => None,
                    },
                    l_w0: c.l_w0(),
                    reasons: &c.reasons,
                    witness: c.witness.as_ref().map(|w| w.iter().map(|v| v + 1).collect()),
                })
                .collect(),
            admissible: self.admissible,
            finite: self.finite,
            l_w0: self.l_w0(),
            reasons: self.reasons(),
        }
        .serialize(s)
    }
}

struct Shape<'a> {
    g: &'a EGcmGraph,
    nodes: &'a [usize],
    integer: bool,
}

fn order(g: &EGcmGraph, a: usize, b: usize) -> u32 {
    g.bond_order(a, b).finite().expect("finite bond")
}

impl Shape<'_> {
    fn degree(&self, v: usize) -> usize {
        self.g.neighbors(v).len()
    }

    /// Nodes of a path in order, starting at a leaf.
    fn path_order(&self) -> Vec<usize> {
        let start = self
            .nodes
            .iter()
            .copied()
            .find(|&v| self.degree(v) <= 1)
            .unwrap();
        let mut out = vec![start];
        let mut prev = usize::MAX;
        let mut cur = start;
        while let Some(&next) = self.g.neighbors(cur).iter().find(|&&w| w != prev) {
            out.push(next);
            prev = cur;
            cur = next;
        }
        out
    }

    fn arm_length(&self, center: usize, first: usize) -> usize {
        let mut len = 1;
        let (mut prev, mut cur) = (center, first);
        while let Some(&next) = self.g.neighbors(cur).iter().find(|&&w| w != prev) {
            len += 1;
            prev = cur;
            cur = next;
        }
        len
    }

    fn match_family(&self) -> Result<Family, Reason> {
        let n = self.nodes.len();
        if n == 1 {
            return Ok(Family::A(1));
        }
        let edges: Vec<(usize, usize)> = self
            .nodes
            .iter()
            .flat_map(|&i| self.g.neighbors(i).iter().filter(move |&&j| j > i).map(move |&j| (i, j)))
            .collect();
        if let Some(&(a, b)) = edges
            .iter()
            .find(|&&(a, b)| self.g.bond_order(a, b) == BondOrder::Infinite)
        {
            return Err(Reason::InfiniteBond { a: a + 1, b: b + 1 });
        }
        if edges.len() != n - 1 {
            return Err(Reason::CyclePresent);
        }
        let branch: Vec<usize> = self.nodes.iter().copied().filter(|&v| self.degree(v) >= 3).collect();
        if !branch.is_empty() {
            if branch.len() > 1 || self.degree(branch[0]) > 3 {
                return Err(Reason::BranchShape);
            }
            if edges.iter().any(|&(a, b)| order(self.g, a, b) != 3) {
                return Err(Reason::BondPlacement);
            }
            let c = branch[0];
            let mut arms: Vec<usize> = self.g.neighbors(c).iter().map(|&f| self.arm_length(c, f)).collect();
            arms.sort_unstable();
            return match arms.as_slice() {
                [1, 1, _] => Ok(Family::D(n)),
                [1, 2, 2] => Ok(Family::E(6)),
                [1, 2, 3] => Ok(Family::E(7)),
                [1, 2, 4] => Ok(Family::E(8)),
                _ => Err(Reason::BranchShape),
            };
        }
        let path = self.path_order();
        let orders: Vec<u32> = path.windows(2).map(|w| order(self.g, w[0], w[1])).collect();
        let heavy: Vec<usize> = (0..orders.len()).filter(|&k| orders[k] > 3).collect();
        match heavy.as_slice() {
            [] => Ok(Family::A(n)),
            [k] => {
                let m = orders[*k];
                let at_end = *k == 0 || *k == orders.len() - 1;
                match (n, m) {
                    (2, 4) if self.integer => Ok(Family::B(2)),
                    (2, 6) if self.integer => Ok(Family::G2),
                    (2, _) if !self.integer => Ok(Family::I2(m)),
                    (_, 4) if at_end => {
                        if !self.integer {
                            return Ok(Family::B(n));
                        }
                        let (inner, end) = if *k == 0 { (path[1], path[0]) } else { (path[k - 1 + 1], path[k + 1]) };
                        if *self.g.amplitude(inner, end) == AlgebraicReal::from_i64(-2) {
                            Ok(Family::B(n))
                        } else {
                            Ok(Family::C(n))
                        }
                    }
                    (4, 4) if *k == 1 => Ok(Family::F4),
                    (3 | 4, 5) if at_end && !self.integer => Ok(Family::H(n)),
                    _ => Err(Reason::BondPlacement),
                }
            }
            _ => Err(Reason::BondPlacement),
        }
    }
}

fn cycle_witness(g: &EGcmGraph, nodes: &[usize]) -> Option<Vec<usize>> {
    let n = nodes.len();
    if n < 3 || nodes.iter().any(|&v| g.neighbors(v).len() != 2) {
        return None;
    }
    if nodes
        .iter()
        .any(|&v| g.neighbors(v).iter().any(|&w| g.bond_order(v, w) != BondOrder::Finite(3)))
    {
        return None;
    }
    let mut order = vec![nodes[0]];
    let mut prev = usize::MAX;
    let mut cur = nodes[0];
    while order.len() < n {
        let next = *g.neighbors(cur).iter().find(|&&w| w != prev && w != cur).unwrap();
        order.push(next);
        prev = cur;
        cur = next;
    }
    let mut pass = order.clone();
    pass.extend(order[1..n - 1].iter().rev());
    Some(pass)
}

/// Classifies each connected component.
pub fn classify(g: &EGcmGraph) -> Verdict {
    let mut components = Vec::new();
    for nodes in g.components() {
        let integer = nodes
            .iter()
            .all(|&i| nodes.iter().all(|&j| g.amplitude(i, j).is_integer()));
        let shape = Shape { g, nodes: &nodes, integer };
        let kind = if integer { Kind::Dynkin } else { Kind::ECoxeter };
        let (family, mut reasons) = match shape.match_family() {
            Ok(f) => (Some(f), vec![]),
            Err(r) => (None, vec![r]),
        };
        let mut witness = None;
        if family.is_none() {
            let sub = g.induced_subgraph(&nodes);
            if !sub.is_unital_oa_cyclic() {
                reasons.push(Reason::NonUnitalOaCycle);
            }
            witness = cycle_witness(g, &nodes);
        }
        components.push(ComponentVerdict {
            nodes,
            kind,
            family,
            reasons,
            witness,
        });
    }
    let admissible = components.iter().all(|c| c.family.is_some());
    Verdict {
        components,
        admissible,
        finite: admissible,
    }
}

/// Whether D^{-1} M is symmetric for some positive diagonal D.
pub fn is_symmetrizable(g: &EGcmGraph) -> bool {
    for comp in g.components() {
        let mut d: Vec<Option<AlgebraicReal>> = vec![None; g.n()];
        d[comp[0]] = Some(AlgebraicReal::one());
        let mut queue = vec![comp[0]];
        let mut k = 0;
        while k < queue.len() {
            let u = queue[k];
            k += 1;
            let du = d[u].clone().unwrap();
            for &v in g.neighbors(u) {
                // M_uv / d_u = M_vu / d_v.
                let Ok(dv) = du
                    .try_mul(g.amplitude(v, u))
                    .and_then(|x| x.try_div(g.amplitude(u, v)))
                else {
                    return false;
                };
                match &d[v] {
                    None => {
                        d[v] = Some(dv);
                        queue.push(v);
                    }
                    Some(existing) => {
                        if *existing != dv {
                            return false;
                        }
                    }
                }
            }
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::graph::GraphBuilder;

    fn fam(g: &EGcmGraph) -> Option<Family> {
        classify(g).family()
    }

    #[test]
    fn dynkin_families() {
        assert_eq!(fam(&fixtures::a_n(5)), Some(Family::A(5)));
        assert_eq!(fam(&fixtures::a_n(1)), Some(Family::A(1)));
        assert_eq!(fam(&fixtures::b_n(2)), Some(Family::B(2)));
        assert_eq!(fam(&fixtures::b_n(4)), Some(Family::B(4)));
        assert_eq!(fam(&fixtures::c_n(4)), Some(Family::C(4)));
        assert_eq!(fam(&fixtures::c_n(2)), Some(Family::B(2)));
        assert_eq!(fam(&fixtures::d_n(4)), Some(Family::D(4)));
        assert_eq!(fam(&fixtures::d_n(7)), Some(Family::D(7)));
        for n in 6..=8 {
            assert_eq!(fam(&fixtures::e_n(n)), Some(Family::E(n)));
        }
        assert_eq!(fam(&fixtures::f4()), Some(Family::F4));
        assert_eq!(fam(&fixtures::g2()), Some(Family::G2));
        let v = classify(&fixtures::b_n(2));
        assert_eq!(v.l_w0(), Some(4));
        assert!(v.admissible && v.finite);
    }

    #[test]
    fn e_coxeter_families() {
        assert_eq!(fam(&fixtures::h3()), Some(Family::H(3)));
        assert_eq!(fam(&fixtures::h4()), Some(Family::H(4)));
        assert_eq!(fam(&fixtures::i2(5)), Some(Family::I2(5)));
        assert_eq!(fam(&fixtures::i2(4)), Some(Family::I2(4)));
        assert_eq!(fam(&fixtures::coxeter_b(3)), Some(Family::B(3)));
        assert_eq!(fam(&fixtures::coxeter_f4()), Some(Family::F4));
        assert_eq!(fam(&fixtures::asymmetric_a2()), Some(Family::A(2)));
        assert_eq!(classify(&fixtures::h3()).components[0].kind, Kind::ECoxeter);
        // reversed H3 path: the m=5 bond is at the other end
        let h = GraphBuilder::new(3)
            .symmetric_edge(0, 1, AlgebraicReal::one())
            .symmetric_edge(1, 2, AlgebraicReal::two_cos(5))
            .build()
            .unwrap();
        assert_eq!(fam(&h), Some(Family::H(3)));
    }

    #[test]
    fn non_admissible_shapes() {
        let v = classify(&fixtures::cycle(4));
        assert!(!v.admissible && !v.finite);
        assert_eq!(v.components[0].reasons, vec![Reason::CyclePresent]);
        assert_eq!(v.components[0].witness.as_ref().unwrap().len(), 6);
        let v = classify(&fixtures::non_unital_cycle(3, 5));
        assert!(v.components[0].reasons.contains(&Reason::NonUnitalOaCycle));
        let inf = GraphBuilder::new(2).edge(0, 1, 2.into(), 2.into()).build().unwrap();
        assert_eq!(classify(&inf).components[0].reasons, vec![Reason::InfiniteBond { a: 1, b: 2 }]);
        assert!(fam(&fixtures::d4_affine()).is_none());
        assert!(fam(&fixtures::d6_affine()).is_none());
        // H5 and B-with-interior-4 are not families
        assert_eq!(classify(&fixtures::coxeter_path(&[5, 3, 3, 3])).components[0].reasons, vec![Reason::BondPlacement]);
        assert!(fam(&fixtures::coxeter_path(&[3, 4, 3, 3])).is_none());
        assert!(fam(&fixtures::coxeter_path(&[4, 4])).is_none());
        // E9 shape
        let nodes: Vec<usize> = (0..9).collect();
        let mut b = GraphBuilder::new(9);
        for w in [0usize, 2, 3, 4, 5, 6, 7, 8].windows(2) {
            b = b.edge(w[0], w[1], 1.into(), 1.into());
        }
        let e9 = b.edge(1, 3, 1.into(), 1.into()).build().unwrap();
        assert_eq!(nodes.len(), e9.n());
        assert_eq!(classify(&e9).components[0].reasons, vec![Reason::BranchShape]);
    }

    #[test]
    fn integer_six_bond_only_on_two_nodes() {
        let g = GraphBuilder::new(3)
            .edge(0, 1, 1.into(), 3.into())
            .edge(1, 2, 1.into(), 1.into())
            .build()
            .unwrap();
        assert!(!classify(&g).admissible);
    }

    #[test]
    fn disconnected_verdicts() {
        let g = GraphBuilder::new(3).edge(0, 1, 1.into(), 1.into()).build().unwrap();
        let v = classify(&g);
        assert_eq!(v.components.len(), 2);
        assert_eq!(v.l_w0(), Some(4));
        let json = serde_json::to_value(&v).unwrap();
        assert_eq!(json["components"][0]["nodes"], serde_json::json!([1, 2]));
        assert_eq!(json["components"][0]["family"], "A2");
    }

    /// Oracle: compare clockwise and counterclockwise products on every cycle.
    fn symmetrizable_by_cycles(g: &EGcmGraph) -> bool {
        let n = g.n();
        let mut ok = true;
        let mut path = vec![];
        fn dfs(g: &EGcmGraph, path: &mut Vec<usize>, ok: &mut bool) {
            let s = path[0];
            let u = *path.last().unwrap();
            for &v in g.neighbors(u) {
                if v == s && path.len() >= 3 {
                    let mut cw = AlgebraicReal::one();
                    let mut ccw = AlgebraicReal::one();
                    for k in 0..path.len() {
                        let (a, b) = (path[k], path[(k + 1) % path.len()]);
                        cw = cw * g.amplitude(a, b);
                        ccw = ccw * g.amplitude(b, a);
                    }
                    *ok &= cw == ccw;
                } else if v > s && !path.contains(&v) {
                    path.push(v);
                    dfs(g, path, ok);
                    path.pop();
                }
            }
        }
        for s in 0..n {
            path.clear();
            path.push(s);
            dfs(g, &mut path, &mut ok);
        }
        ok
    }

    #[test]
    fn symmetrizability() {
        let (oa, _) = fixtures::oa_multiples();
        assert!(is_symmetrizable(&oa));
        assert!(is_symmetrizable(&fixtures::b_n(5)));
        assert!(is_symmetrizable(&fixtures::cycle(5)));
        let tri = fixtures::asymmetric_triangle();
        assert!(!is_symmetrizable(&tri));
        assert!(tri.is_unital_oa_cyclic());
        for g in [oa, tri, fixtures::cycle(4), fixtures::non_unital_cycle(4, 5), fixtures::d6_affine()] {
            assert_eq!(is_symmetrizable(&g), symmetrizable_by_cycles(&g));
            if is_symmetrizable(&g) {
                assert!(g.is_unital_oa_cyclic());
            }
        }
    }
}
