//! Named constructions shared by the CLI, the sweep runner and the
//! verification commands: stable kebab-case names, deterministic wire
//! layouts, and the oracle checks that go with each builder.

use crate::ancilla::AncillaLedger;
use crate::arith::{
    build_controlled_cq_adder, build_controlled_cq_comparator, build_controlled_incrementer,
    build_controlled_qq_comparator, build_cq_adder, build_cq_comparator, build_incrementer,
    build_modular_adder, build_qq_comparator, Direction, ModularAdderSpec,
};
use crate::circuit::{q, wire_range, Circuit, Qubit, ResourceReport};
use crate::primitives::{
    build_fanout1, build_fanout2, build_ladder1, build_ladder2_ancilla, build_ladderk, build_mcx,
    build_v2_naive, ladder2_scratch_need, ladderk_scratch_need, precondition, SynthError,
};
use crate::sim::{
    check_dirty_restoration, check_equivalence, check_equivalence_filtered, PermutationOracle,
    Status, Verdict, VerifyOptions,
};
use serde::Serialize;

pub const CONSTRUCTIONS: &[&str] = &[
    "mcx",
    "fanout1",
    "fanout2",
    "ladder1",
    "ladder2",
    "ladderk",
    "v2",
    "comparator",
    "cq-comparator",
    "incrementer",
    "cq-adder",
    "modular-adder",
];

/// Parameters addressed by name from the CLI and the sweep runner.
#[derive(Copy, Clone, Debug, Default)]
pub struct Params {
    pub n: u32,
    pub k: u32,
    pub constant: Option<u64>,
    pub modulus: Option<u64>,
    /// Ladder order for `ladderk`.
    pub order: Option<u32>,
    pub decrement: bool,
}

/// A synthesized instance plus its ledger bookkeeping.
pub struct Synthesis {
    pub name: String,
    pub circuit: Circuit,
    pub report: ResourceReport,
    pub high_water_clean: usize,
    pub high_water_dirty: usize,
}

fn default_cq_constant(n: u32) -> u64 {
    // A mid-weight alternating pattern below 2^(n-1), well defined for any
    // register width the simulator or the estimators can touch.
    if n == 1 {
        1
    } else {
        let bits = (n - 1).min(62);
        1 + (0x5555_5555_5555_5555u64 & ((1u64 << bits) - 1))
    }
}

fn require(cond: bool, msg: &str) -> Result<(), SynthError> {
    if cond {
        Ok(())
    } else {
        Err(precondition(msg))
    }
}

/// Builds the named construction on its documented wire layout.
pub fn synth(name: &str, params: &Params) -> Result<Synthesis, SynthError> {
    let n = params.n;
    let k = params.k;
    let dir = if params.decrement {
        Direction::Decrement
    } else {
        Direction::Increment
    };
    let (circuit, hw_clean, hw_dirty) = match name {
        "mcx" => {
            let controls = wire_range(0, k);
            let mut ledger = AncillaLedger::with_pools(vec![], vec![q(k + 1)]);
            let c = build_mcx(&controls, q(k), &mut ledger)?;
            (c, ledger.high_water_clean(), ledger.high_water_dirty())
        }
        "fanout1" => {
            require(n >= 1, "fanout1 needs n >= 1")?;
            (build_fanout1(q(0), &wire_range(1, n + 1))?, 0, 0)
        }
        "fanout2" => {
            require(n >= 1, "fanout2 needs n >= 1 triples")?;
            let triples: Vec<(Qubit, Qubit, Qubit)> = (0..n)
                .map(|j| (q(3 * j + 1), q(3 * j + 2), q(3 * j + 3)))
                .collect();
            let mut ledger = AncillaLedger::with_pools(vec![], vec![q(3 * n + 1)]);
            let c = build_fanout2(q(0), &triples, &mut ledger)?;
            (c, ledger.high_water_clean(), ledger.high_water_dirty())
        }
        "ladder1" => {
            require(n >= 1, "ladder1 needs n >= 1")?;
            (build_ladder1(&wire_range(0, n + 1), params.decrement)?, 0, 0)
        }
        "ladder2" => {
            require(n >= 1, "ladder2 needs n >= 1")?;
            let wires = wire_range(0, 2 * n + 1);
            let need = ladder2_scratch_need(n as usize) as u32;
            let mut ledger =
                AncillaLedger::with_pools(wire_range(2 * n + 1, 2 * n + 1 + need), vec![]);
            let c = build_ladder2_ancilla(&wires, &mut ledger, params.decrement)?;
            (c, ledger.high_water_clean(), ledger.high_water_dirty())
        }
        "ladderk" => {
            let order = params.order.unwrap_or(3) as usize;
            require(n >= 1 && order >= 1, "ladderk needs n >= 1 and order >= 1")?;
            let wires = wire_range(0, order as u32 * n + 1);
            let need = ladderk_scratch_need(order, wires.len()) as u32;
            let base = order as u32 * n + 1;
            let mut ledger = AncillaLedger::with_pools(wire_range(base, base + need), vec![]);
            let c = build_ladderk(order, &wires, &mut ledger, params.decrement)?;
            (c, ledger.high_water_clean(), ledger.high_water_dirty())
        }
        "v2" => {
            require(n >= 1, "v2 needs n >= 1")?;
            (build_v2_naive(&wire_range(0, 2 * n + 1))?, 0, 0)
        }
        "comparator" => {
            require(n >= 1, "comparator needs n >= 1")?;
            let a = wire_range(k, k + n);
            let b = wire_range(k + n, k + 2 * n);
            let z = q(k + 2 * n);
            let c = if k == 0 {
                build_qq_comparator(&a, &b, z)?
            } else {
                build_controlled_qq_comparator(&wire_range(0, k), &a, &b, z)?
            };
            (c, 0, 0)
        }
        "cq-comparator" => {
            require(n >= 1, "cq-comparator needs n >= 1")?;
            let a = wire_range(k, k + n);
            let z = q(k + n);
            let mut ledger = AncillaLedger::with_pools(vec![], vec![q(k + n + 1)]);
            let g = ledger.borrow_dirty(1, &[])?[0];
            let cst = params.constant.unwrap_or_else(|| default_cq_constant(n));
            let c = build_controlled_cq_comparator(&wire_range(0, k), &a, z, g, cst)?;
            ledger.release(&[g])?;
            (c, ledger.high_water_clean(), ledger.high_water_dirty())
        }
        "incrementer" => {
            require(n >= 1, "incrementer needs n >= 1")?;
            let y = wire_range(k, k + n);
            let mut ledger = AncillaLedger::with_pools(vec![], vec![q(k + n)]);
            let g = ledger.borrow_dirty(1, &[])?[0];
            let c = if k == 0 {
                build_incrementer(&y, g, dir)?
            } else {
                build_controlled_incrementer(&wire_range(0, k), &y, g, dir)?
            };
            ledger.release(&[g])?;
            (c, ledger.high_water_clean(), ledger.high_water_dirty())
        }
        "cq-adder" => {
            require(n >= 1, "cq-adder needs n >= 1")?;
            let y = wire_range(k, k + n);
            let mut ledger = AncillaLedger::with_pools(vec![], vec![q(k + n)]);
            let g = ledger.borrow_dirty(1, &[])?[0];
            let cst = params.constant.unwrap_or_else(|| default_cq_constant(n));
            let c = if k == 0 {
                build_cq_adder(&y, g, cst)?
            } else {
                build_controlled_cq_adder(&wire_range(0, k), &y, g, cst)?
            };
            ledger.release(&[g])?;
            (c, ledger.high_water_clean(), ledger.high_water_dirty())
        }
        "modular-adder" => {
            let modulus = params
                .modulus
                .ok_or_else(|| precondition("modular-adder needs a modulus"))?;
            let a_const = params.constant.unwrap_or(1);
            let b = wire_range(k, k + n);
            let mut ledger =
                AncillaLedger::with_pools(vec![q(k + n)], vec![q(k + n + 1)]);
            let g = ledger.borrow_dirty(1, &[])?[0];
            let flag_w = ledger.borrow_clean(1)?[0];
            let spec = ModularAdderSpec {
                n,
                a: a_const,
                modulus,
                controls: k,
            };
            let c = build_modular_adder(&wire_range(0, k), &b, flag_w, g, &spec)?;
            ledger.release(&[g, flag_w])?;
            (c, ledger.high_water_clean(), ledger.high_water_dirty())
        }
        _ => {
            return Err(precondition(format!(
                "unknown construction '{name}' (expected one of {CONSTRUCTIONS:?})"
            )))
        }
    };
    let report = circuit.resource_report();
    Ok(Synthesis {
        name: name.to_string(),
        circuit,
        report,
        high_water_clean: hw_clean,
        high_water_dirty: hw_dirty,
    })
}

#[derive(Serialize)]
pub struct NamedVerdict {
    pub check: String,
    pub status: Status,
    pub checked: u64,
    pub mismatches: Vec<crate::sim::Mismatch>,
}

fn named(check: &str, v: Verdict) -> NamedVerdict {
    NamedVerdict {
        check: check.to_string(),
        status: v.status,
        checked: v.checked,
        mismatches: v.mismatches,
    }
}

fn kmask(k: u32) -> u64 {
    (1u64 << k) - 1
}

/// Runs the oracle-equivalence and ancilla checks matching `name`.
/// `mutate` drops the last gate first (the mutation-detection hook).
pub fn verify(
    name: &str,
    params: &Params,
    opts: &VerifyOptions,
    mutate: bool,
) -> Result<Vec<NamedVerdict>, SynthError> {
    let syn = synth(name, params)?;
    let mut circuit = syn.circuit;
    if mutate {
        let mut gates = circuit.gates().to_vec();
        gates.pop();
        circuit =
            Circuit::with_registers(circuit.num_qubits(), gates, circuit.registers().clone())?;
    }
    let n = params.n;
    let k = params.k;
    let mut out = Vec::new();
    match name {
        "mcx" => {
            let all = kmask(k);
            let oracle = PermutationOracle::from_fn(k + 1, move |x| {
                if x & all == all {
                    x ^ (1 << k)
                } else {
                    x
                }
            });
            if k >= 3 {
                let v = check_dirty_restoration(&circuit, &[q(k + 1)], &oracle, opts)
                    .expect("arity");
                out.push(named("mcx-and-dirty-restored", v));
            } else {
                let v = check_equivalence(&circuit, &oracle, &[], opts).expect("arity");
                out.push(named("mcx", v));
            }
        }
        "fanout1" => {
            let oracle = PermutationOracle::from_fn(n + 1, move |x| {
                if x & 1 == 1 {
                    x ^ (((1u64 << n) - 1) << 1)
                } else {
                    x
                }
            });
            let v = check_equivalence(&circuit, &oracle, &[], opts).expect("arity");
            out.push(named("fanout1", v));
        }
        "fanout2" => {
            let oracle = PermutationOracle::from_fn(3 * n + 1, move |x| {
                if x & 1 == 0 {
                    return x;
                }
                let mut outv = x;
                for j in 0..n {
                    let a = 3 * j + 1;
                    if (x >> a) & 1 == 1 && (x >> (a + 1)) & 1 == 1 {
                        outv ^= 1 << (a + 2);
                    }
                }
                outv
            });
            if circuit.num_qubits() > 3 * n + 1 {
                let v = check_dirty_restoration(&circuit, &[q(3 * n + 1)], &oracle, opts)
                    .expect("arity");
                out.push(named("fanout2-and-dirty-restored", v));
            } else {
                let v = check_equivalence(&circuit, &oracle, &[], opts).expect("arity");
                out.push(named("fanout2", v));
            }
        }
        "ladder1" => {
            let adjoint = params.decrement;
            let oracle = PermutationOracle::from_fn(n + 1, move |x| {
                let mut y = 0u64;
                if !adjoint {
                    y |= x & 1;
                    for i in 1..=n as u64 {
                        y |= (((x >> i) ^ (x >> (i - 1))) & 1) << i;
                    }
                } else {
                    let mut acc = 0u64;
                    for i in 0..=n as u64 {
                        acc ^= (x >> i) & 1;
                        y |= acc << i;
                    }
                }
                y
            });
            let v = check_equivalence(&circuit, &oracle, &[], opts).expect("arity");
            out.push(named("ladder1", v));
        }
        "ladder2" | "ladderk" => {
            let order = if name == "ladder2" {
                2u64
            } else {
                params.order.unwrap_or(3) as u64
            };
            let adjoint = params.decrement;
            let width = order * n as u64 + 1;
            let data_oracle = PermutationOracle::from_fn(width as u32, move |x| {
                let mut y = x;
                let mut gate = |y: &mut u64, i: u64| {
                    let lo = order * i;
                    let all = ((1u64 << order) - 1) << lo;
                    if *y & all == all {
                        *y ^= 1 << (order * (i + 1));
                    }
                };
                if !adjoint {
                    for i in (0..n as u64).rev() {
                        gate(&mut y, i);
                    }
                } else {
                    for i in 0..n as u64 {
                        gate(&mut y, i);
                    }
                }
                y
            });
            let anc: Vec<(Qubit, bool)> = (width as u32..circuit.num_qubits())
                .map(|i| (q(i), false))
                .collect();
            let mask = (1u64 << width) - 1;
            let full = PermutationOracle::from_fn(circuit.num_qubits(), move |x| {
                (x & !mask) | data_oracle.apply(x & mask)
            });
            let v = check_equivalence(&circuit, &full, &anc, opts).expect("arity");
            out.push(named(name, v));
        }
        "v2" => {
            let oracle = PermutationOracle::from_fn(2 * n + 1, move |x| {
                let mut carry = 0u64;
                for i in 0..n as u64 {
                    let u = (x >> (2 * i)) & 1;
                    let v = (x >> (2 * i + 1)) & 1;
                    carry = v & (u ^ carry);
                }
                x ^ (carry << (2 * n))
            });
            let v = check_equivalence(&circuit, &oracle, &[], opts).expect("arity");
            out.push(named("v2", v));
        }
        "comparator" => {
            let oracle = PermutationOracle::from_fn(k + 2 * n + 1, move |x| {
                if x & kmask(k) != kmask(k) {
                    return x;
                }
                let a = (x >> k) & ((1 << n) - 1);
                let b = (x >> (k + n)) & ((1 << n) - 1);
                if a < b {
                    x ^ (1 << (k + 2 * n))
                } else {
                    x
                }
            });
            let v = check_equivalence(&circuit, &oracle, &[], opts).expect("arity");
            out.push(named("comparator", v));
        }
        "cq-comparator" => {
            let cst = params.constant.unwrap_or_else(|| default_cq_constant(n));
            let oracle = PermutationOracle::from_fn(k + n + 1, move |x| {
                let a = (x >> k) & ((1 << n) - 1);
                if x & kmask(k) == kmask(k) && cst < a {
                    x ^ (1 << (k + n))
                } else {
                    x
                }
            });
            let v = check_dirty_restoration(&circuit, &[q(k + n + 1)], &oracle, opts)
                .expect("arity");
            out.push(named("cq-comparator-and-dirty-restored", v));
        }
        "incrementer" => {
            let delta: i64 = if params.decrement { -1 } else { 1 };
            let oracle = PermutationOracle::from_fn(k + n, move |x| {
                if x & kmask(k) != kmask(k) {
                    return x;
                }
                let v = (x >> k) & ((1 << n) - 1);
                let nv = (v as i64 + delta).rem_euclid(1 << n) as u64;
                (x & kmask(k)) | (nv << k)
            });
            let v = check_dirty_restoration(&circuit, &[q(k + n)], &oracle, opts).expect("arity");
            out.push(named("incrementer-and-dirty-restored", v));
        }
        "cq-adder" => {
            let cst = params.constant.unwrap_or_else(|| default_cq_constant(n));
            let oracle = PermutationOracle::from_fn(k + n, move |x| {
                if x & kmask(k) != kmask(k) {
                    return x;
                }
                let v = (x >> k) & ((1 << n) - 1);
                (x & kmask(k)) | (((v + cst) & ((1 << n) - 1)) << k)
            });
            let v = check_dirty_restoration(&circuit, &[q(k + n)], &oracle, opts).expect("arity");
            out.push(named("cq-adder-and-dirty-restored", v));
        }
        "modular-adder" => {
            let modulus = params
                .modulus
                .ok_or_else(|| precondition("modular-adder needs a modulus"))?;
            let a_const = params.constant.unwrap_or(1);
            let oracle = PermutationOracle::from_fn(circuit.num_qubits(), move |x| {
                if x & kmask(k) != kmask(k) {
                    return x;
                }
                let b = (x >> k) & ((1 << n) - 1);
                (x & !(((1u64 << n) - 1) << k)) | (((a_const + b) % modulus) << k)
            });
            let v = check_equivalence_filtered(
                &circuit,
                &oracle,
                move |x| ((x >> k) & ((1 << n) - 1)) < modulus && (x >> (k + n)) & 1 == 0,
                opts,
            )
            .expect("arity");
            out.push(named("modular-adder-on-valid-inputs", v));
        }
        _ => {
            return Err(precondition(format!("unknown construction '{name}'")));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn synth_reports_qubit_contracts() {
        // The comparator uses no ancillas at all; the classical-quantum
        // builders report exactly one dirty ancilla and no clean ones.
        let p = Params {
            n: 4,
            ..Params::default()
        };
        let s = synth("comparator", &p).unwrap();
        assert_eq!((s.report.qubits_clean, s.report.qubits_dirty), (0, 0));
        for name in ["cq-comparator", "incrementer", "cq-adder"] {
            let s = synth(name, &p).unwrap();
            assert_eq!(s.report.qubits_dirty, 1, "{name}");
            assert_eq!(s.high_water_dirty, 1, "{name}");
            assert_eq!(s.high_water_clean, 0, "{name}");
        }
    }

    #[test]
    fn verify_passes_and_mutation_fails() {
        let p = Params {
            n: 4,
            constant: Some(11),
            ..Params::default()
        };
        let ok = verify("cq-adder", &p, &VerifyOptions::default(), false).unwrap();
        assert!(ok.iter().all(|v| v.status == Status::Pass));
        let bad = verify("cq-adder", &p, &VerifyOptions::default(), true).unwrap();
        assert!(bad.iter().any(|v| v.status == Status::Fail));
        assert!(bad.iter().any(|v| !v.mismatches.is_empty()));
    }

    #[test]
    fn unknown_construction_is_a_precondition_error() {
        assert!(synth("frobnicator", &Params::default()).is_err());
    }

    #[test]
    fn every_catalog_name_synthesizes_and_verifies_small() {
        for name in CONSTRUCTIONS {
            let p = Params {
                n: 3,
                k: if *name == "mcx" { 4 } else { 0 },
                constant: Some(if *name == "modular-adder" { 2 } else { 3 }),
                modulus: Some(5),
                order: Some(3),
                ..Params::default()
            };
            let verdicts = verify(name, &p, &VerifyOptions::default(), false)
                .unwrap_or_else(|e| panic!("{name}: {e}"));
            for v in verdicts {
                assert_eq!(v.status, Status::Pass, "{name}/{}", v.check);
            }
        }
    }
}
