//! Named graphs: Dynkin and E-Coxeter families, affine and cyclic
//! non-admissible graphs, and small hand-built examples. Nodes are 0-based.

use crate::arith::AlgebraicReal;
use crate::graph::{BondOrder, EGcmGraph, GraphBuilder};

fn int(n: i64) -> AlgebraicReal {
    AlgebraicReal::from_i64(n)
}

fn unit_path(b: GraphBuilder, nodes: &[usize]) -> GraphBuilder {
    nodes
        .windows(2)
        .fold(b, |b, w| b.edge(w[0], w[1], int(1), int(1)))
}

/// A_n: path with unit amplitudes.
pub fn a_n(n: usize) -> EGcmGraph {
    let nodes: Vec<usize> = (0..n).collect();
    unit_path(GraphBuilder::new(n), &nodes).build().unwrap()
}

/// B_n: the double bond joins the last two nodes, with M_{n-1,n} = -2
/// (1-based). For n = 2 this is the graph with p = 1, q = 2.
pub fn b_n(n: usize) -> EGcmGraph {
    assert!(n >= 2);
    if n == 2 {
        return GraphBuilder::new(2).edge(0, 1, int(1), int(2)).build().unwrap();
    }
    let nodes: Vec<usize> = (0..n - 1).collect();
    unit_path(GraphBuilder::new(n), &nodes)
        .edge(n - 2, n - 1, int(2), int(1))
        .build()
        .unwrap()
}

/// C_n: as B_n with the double bond reversed.
pub fn c_n(n: usize) -> EGcmGraph {
    assert!(n >= 2);
    let nodes: Vec<usize> = (0..n - 1).collect();
    unit_path(GraphBuilder::new(n), &nodes)
        .edge(n - 2, n - 1, int(1), int(2))
        .build()
        .unwrap()
}

/// D_n: path 1..n-1 with node n attached to node n-2 (1-based).
pub fn d_n(n: usize) -> EGcmGraph {
    assert!(n >= 4);
    let nodes: Vec<usize> = (0..n - 1).collect();
    unit_path(GraphBuilder::new(n), &nodes)
        .edge(n - 3, n - 1, int(1), int(1))
        .build()
        .unwrap()
}

/// E_6, E_7, E_8: chain 1-3-4-5-... with node 2 on node 4 (1-based).
pub fn e_n(n: usize) -> EGcmGraph {
    assert!((6..=8).contains(&n));
    let mut chain = vec![0, 2];
    chain.extend(3..n);
    unit_path(GraphBuilder::new(n), &chain)
        .edge(1, 3, int(1), int(1))
        .build()
        .unwrap()
}

pub fn f4() -> EGcmGraph {
    GraphBuilder::new(4)
        .edge(0, 1, int(1), int(1))
        .edge(1, 2, int(2), int(1))
        .edge(2, 3, int(1), int(1))
        .build()
        .unwrap()
}

pub fn g2() -> EGcmGraph {
    GraphBuilder::new(2).edge(0, 1, int(1), int(3)).build().unwrap()
}

/// A path whose k-th edge has bond order orders[k] and symmetric amplitudes 2cos(pi/m).
pub fn coxeter_path(orders: &[u32]) -> EGcmGraph {
    let n = orders.len() + 1;
    orders
        .iter()
        .enumerate()
        .fold(GraphBuilder::new(n), |b, (k, &m)| {
            b.symmetric_edge(k, k + 1, AlgebraicReal::two_cos(m))
        })
        .build()
        .unwrap()
}

pub fn h3() -> EGcmGraph {
    coxeter_path(&[5, 3])
}

pub fn h4() -> EGcmGraph {
    coxeter_path(&[5, 3, 3])
}

pub fn i2(m: u32) -> EGcmGraph {
    coxeter_path(&[m])
}

/// E-Coxeter B_n with symmetric amplitudes sqrt(2) on the end bond.
pub fn coxeter_b(n: usize) -> EGcmGraph {
    let mut orders = vec![3; n - 1];
    orders[n - 2] = 4;
    coxeter_path(&orders)
}

pub fn coxeter_f4() -> EGcmGraph {
    coxeter_path(&[3, 4, 3])
}

/// n-cycle with unit amplitudes.
pub fn cycle(n: usize) -> EGcmGraph {
    assert!(n >= 3);
    let nodes: Vec<usize> = (0..n).chain([0]).collect();
    unit_path(GraphBuilder::new(n), &nodes).build().unwrap()
}

/// n-cycle with unit bonds except M_{1,n} = -pi and M_{n,1} = -1/pi (1-based),
/// so the OA-cycle product is pi.
pub fn non_unital_cycle(n: usize, pi: i64) -> EGcmGraph {
    assert!(n >= 3);
    let nodes: Vec<usize> = (0..n).collect();
    unit_path(GraphBuilder::new(n), &nodes)
        .edge(0, n - 1, int(pi), AlgebraicReal::from_ratio(1, pi))
        .build()
        .unwrap()
}

/// Five-node affine D: corners 1..4 around center 5 (1-based).
pub fn d4_affine() -> EGcmGraph {
    (0..4)
        .fold(GraphBuilder::new(5), |b, k| b.edge(k, 4, int(1), int(1)))
        .name(0, "c1")
        .name(1, "c2")
        .name(2, "c3")
        .name(3, "c4")
        .name(4, "center")
        .build()
        .unwrap()
}

/// Node indices of [`d6_affine`].
pub mod d6 {
    pub const L1: usize = 0;
    pub const L2: usize = 1;
    pub const A: usize = 2;
    pub const B: usize = 3;
    pub const C: usize = 4;
    pub const R1: usize = 5;
    pub const R2: usize = 6;
}

/// Seven-node affine D: leaves L1, L2 on a, path a-b-c, leaves R1, R2 on c.
pub fn d6_affine() -> EGcmGraph {
    use d6::*;
    let edges = [(L1, A), (L2, A), (A, B), (B, C), (C, R1), (C, R2)];
    let names = ["L1", "L2", "a", "b", "c", "R1", "R2"];
    let b = edges
        .iter()
        .fold(GraphBuilder::new(7), |b, &(x, y)| b.edge(x, y, int(1), int(1)));
    names
        .iter()
        .enumerate()
        .fold(b, |b, (i, s)| b.name(i, *s))
        .build()
        .unwrap()
}

/// Node indices of [`oa_multiples`].
#[derive(Clone, Copy, Debug)]
pub struct OaNodes {
    pub i: usize,
    pub j: usize,
    pub x: usize,
    pub y: usize,
    pub z: usize,
}

/// Two odd-adjacency components {i, j} and {x, y, z} joined by an even bond.
/// The multiples of alpha_i are {1, 1/5} and those of alpha_x are {1, 2/7, 1/7}.
pub fn oa_multiples() -> (EGcmGraph, OaNodes) {
    let n = OaNodes { i: 0, j: 1, x: 2, y: 3, z: 4 };
    let c5 = AlgebraicReal::two_cos(5);
    let g = GraphBuilder::new(5)
        .name(n.i, "i")
        .name(n.j, "j")
        .name(n.x, "x")
        .name(n.y, "y")
        .name(n.z, "z")
        .edge(n.i, n.j, AlgebraicReal::from_ratio(1, 5), int(5))
        .edge(n.x, n.y, AlgebraicReal::from_ratio(2, 7), AlgebraicReal::from_ratio(7, 2))
        .edge(n.y, n.z, &c5 / int(2), &c5 * int(2))
        .edge_with_order(
            n.j,
            n.x,
            AlgebraicReal::two_cos(4),
            AlgebraicReal::two_cos(4),
            BondOrder::Finite(4),
        )
        .build()
        .unwrap();
    (g, n)
}

/// A_2 with p = 1/5, q = 5.
pub fn asymmetric_a2() -> EGcmGraph {
    GraphBuilder::new(2)
        .edge(0, 1, AlgebraicReal::from_ratio(1, 5), int(5))
        .build()
        .unwrap()
}

/// Triangle x-y-z with unit odd bonds x-y, y-z and an even bond z-x with
/// M_zx = -1, M_xz = -2: unital OA-cyclic but not symmetrizable.
pub fn asymmetric_triangle() -> EGcmGraph {
    GraphBuilder::new(3)
        .edge(0, 1, int(1), int(1))
        .edge(1, 2, int(1), int(1))
        .edge(2, 0, int(1), int(2))
        .build()
        .unwrap()
}

/// Names accepted by [`builtin`], in display order.
pub fn builtin_names() -> Vec<String> {
    let mut v: Vec<String> = Vec::new();
    v.extend((1..=8).map(|n| format!("a{n}")));
    v.extend((2..=7).map(|n| format!("b{n}")));
    v.extend((3..=7).map(|n| format!("c{n}")));
    v.extend((4..=8).map(|n| format!("d{n}")));
    v.extend(["e6", "e7", "e8", "f4", "g2", "h3", "h4"].map(String::from));
    v.extend((3..=7).map(|m| format!("i2-{m}")));
    v.extend((3..=5).map(|n| format!("coxeter-b{n}")));
    v.push("coxeter-f4".into());
    v.extend((3..=6).map(|n| format!("cycle-{n}")));
    v.extend((3..=6).map(|n| format!("heavy-cycle-{n}")));
    v.extend(
        ["d4-affine", "d6-affine", "oa-multiples", "asymmetric-a2", "asymmetric-triangle"]
            .map(String::from),
    );
    v
}

/// Looks up a fixture by name, e.g. `a5`, `b3`, `i2-7`, `heavy-cycle-4`.
pub fn builtin(name: &str) -> Option<EGcmGraph> {
    let num = |prefix: &str| name.strip_prefix(prefix).and_then(|s| s.parse::<usize>().ok());
    let g = match name {
        "e6" => e_n(6),
        "e7" => e_n(7),
        "e8" => e_n(8),
        "f4" => f4(),
        "g2" => g2(),
        "h3" => h3(),
        "h4" => h4(),
        "coxeter-f4" => coxeter_f4(),
        "d4-affine" => d4_affine(),
        "d6-affine" => d6_affine(),
        "oa-multiples" => oa_multiples().0,
        "asymmetric-a2" => asymmetric_a2(),
        "asymmetric-triangle" => asymmetric_triangle(),
        _ => {
            if let Some(n) = num("heavy-cycle-").filter(|&n| (3..=12).contains(&n)) {
                non_unital_cycle(n, 5)
            } else if let Some(n) = num("cycle-").filter(|&n| (3..=12).contains(&n)) {
                cycle(n)
            } else if let Some(n) = num("coxeter-b").filter(|&n| (3..=12).contains(&n)) {
                coxeter_b(n)
            } else if let Some(m) = num("i2-").filter(|&m| (3..=60).contains(&m)) {
                i2(m as u32)
            } else if let Some(n) = num("a").filter(|&n| (1..=24).contains(&n)) {
                a_n(n)
            } else if let Some(n) = num("b").filter(|&n| (2..=24).contains(&n)) {
                b_n(n)
            } else if let Some(n) = num("c").filter(|&n| (2..=24).contains(&n)) {
                c_n(n)
            } else if let Some(n) = num("d").filter(|&n| (4..=24).contains(&n)) {
                d_n(n)
            } else {
                return None;
            }
        }
    };
    Some(g)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_listed_name_resolves() {
        for name in builtin_names() {
            assert!(builtin(&name).is_some(), "{name}");
        }
        assert!(builtin("x9").is_none());
        assert!(builtin("a0").is_none());
    }

    #[test]
    fn shapes() {
        assert_eq!(e_n(8).edges().len(), 7);
        assert_eq!(d_n(5).neighbors(2).len(), 3);
        assert_eq!(h4().bond_order(0, 1), BondOrder::Finite(5));
        assert_eq!(coxeter_b(4).bond_order(2, 3), BondOrder::Finite(4));
        assert_eq!(b_n(4).amplitude(2, 3), &int(-2));
        assert_eq!(c_n(4).amplitude(3, 2), &int(-2));
        assert_eq!(non_unital_cycle(4, 5).amplitude(3, 0), &AlgebraicReal::from_ratio(-1, 5));
    }
}
