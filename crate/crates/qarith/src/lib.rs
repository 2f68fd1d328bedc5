//! Synthesis and bit-exact verification of reversible arithmetic circuits
//! over the {CCX, CX, X} gate set.
//!
//! The crate builds comparison, increment and classical-quantum addition
//! circuits with linear gate count and logarithmic depth while using a
//! minimal number of ancilla qubits, and verifies every construction by
//! classical reversible simulation against arithmetic oracles.
//!
//! Layout:
//! * [`circuit`] - gate-level IR, registers, resource metrics, QASM subset
//! * [`ancilla`] - clean/dirty ancilla ledger
//! * [`sim`] - exhaustive and sampled permutation simulation
//! * [`primitives`] - multi-controlled X, fan-outs, ladders, V operators
//! * [`promise`] - promise-gate identities and the ancilla/control trade
//! * [`arith`] - comparators, incrementers, adders, modular adder
//! * [`report`] - scaling sweeps and factoring-pipeline estimates
//! * [`catalog`] - named constructions shared by CLI, sweeps and tests

pub mod ancilla;
pub mod arith;
pub mod catalog;
pub mod circuit;
pub mod primitives;
pub mod promise;
pub mod report;
pub mod sim;

pub use circuit::{Circuit, CircuitError, Gate, GateKind, Qubit, RegisterMap, ResourceReport, Role};
