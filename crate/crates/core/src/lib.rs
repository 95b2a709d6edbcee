//! Exact numbers game on E-GCM graphs: arithmetic in real cyclotomic
//! fields, graph parsing, the game engine, classification, the Coxeter
//! geometry behind game lengths, and runnable checks.

pub mod arith;
pub mod classify;
pub mod coxeter;
pub mod fixtures;
pub mod game;
pub mod graph;
pub mod verify;

pub use arith::{AlgebraicReal, ArithError};
pub use classify::{classify, Family, Kind, Verdict};
pub use coxeter::{CoxeterError, Root, Word};
pub use game::{play, run_schedule, GameError, GameTrace, Outcome, PlayOptions, Position, Strategy};
pub use graph::{parse_graph, BondOrder, EGcmGraph, GraphError};
pub use verify::{CheckReport, Status};
