//! Acceptance suite: one test per criterion, each ending in a single
//! PASS/FAIL line. Tolerances are pinned here, in code.
//!
//! Criteria that cannot be met are still asserted faithfully and allowed
//! to fail; the per-point lines above the verdict give the evidence.

use qarith::ancilla::AncillaLedger;
use qarith::arith::{
    build_controlled_cq_adder, build_controlled_cq_comparator, build_controlled_incrementer,
    build_controlled_qq_comparator, build_cq_comparator, build_ctrl_promise_v2,
    build_incrementer, build_promise_incrementer_linear, build_promise_incrementer_sqrt,
    cpv_promise_need, lemma_sqrt_promise_need, Direction,
};
use qarith::catalog::{self, Params};
use qarith::circuit::{q, wire_range, Circuit, Gate, Qubit};
use qarith::primitives::{build_mcx, build_promise_ladderk, ladderk_scratch_need};
use qarith::promise::{trade_ancillas_for_controls, GateTemplate, TemplateCtx};
use qarith::report::{estimate_shor, run_sweep};
use qarith::sim::{
    check_dirty_restoration, check_equivalence, check_equivalence_filtered, check_promise,
    truth_table, PermutationOracle, PromiseContract, Strength, VerifyOptions,
};

fn opts() -> VerifyOptions {
    VerifyOptions::default()
}

fn line(id: &str, pass: bool, detail: &str) -> bool {
    println!("{} {}: {}", id, if pass { "PASS" } else { "FAIL" }, detail);
    pass
}

// ---------------------------------------------------------------------------
// 1. Exhaustive semantic correctness
// ---------------------------------------------------------------------------

#[test]
fn ac1_exhaustive_semantics() {
    let mut ok = true;

    // Quantum-quantum comparator, n in 1..=7, all 2^(2n+1) inputs.
    let mut all = true;
    for n in 1..=7u32 {
        let a = wire_range(0, n);
        let b = wire_range(n, 2 * n);
        let c = build_qq_cmp(&a, &b, q(2 * n));
        let oracle = PermutationOracle::from_fn(2 * n + 1, move |x| {
            let av = x & ((1 << n) - 1);
            let bv = (x >> n) & ((1 << n) - 1);
            if av < bv {
                x ^ (1 << (2 * n))
            } else {
                x
            }
        });
        all &= check_equivalence(&c, &oracle, &[], &opts()).unwrap().passed();
    }
    ok &= line("AC1.comparator", all, "n in 1..=7 exhaustive vs z ^ (a<b)");

    // Classical-quantum comparator, n in 1..=8, 8 constants each, both
    // dirty values (the full-width sweep covers them).
    let mut all = true;
    for n in 1..=8u32 {
        for cst in constants_for(n) {
            let a = wire_range(0, n);
            let c = build_cq_comparator(&a, q(n), q(n + 1), cst).unwrap();
            let oracle = PermutationOracle::from_fn(n + 1, move |x| {
                let av = x & ((1 << n) - 1);
                if cst < av {
                    x ^ (1 << n)
                } else {
                    x
                }
            });
            all &= check_dirty_restoration(&c, &[q(n + 1)], &oracle, &opts())
                .unwrap()
                .passed();
        }
    }
    ok &= line("AC1.cq-comparator", all, "n in 1..=8 x 8 constants x dirty values");

    // Incrementer, n in 1..=12.
    let mut all = true;
    for n in 1..=12u32 {
        let y = wire_range(0, n);
        let c = build_incrementer(&y, q(n), Direction::Increment).unwrap();
        let oracle = PermutationOracle::from_fn(n, move |x| (x + 1) & ((1u64 << n) - 1));
        all &= check_dirty_restoration(&c, &[q(n)], &oracle, &opts())
            .unwrap()
            .passed();
    }
    ok &= line("AC1.incrementer", all, "n in 1..=12, all inputs x dirty values");

    // Classical-quantum adder, n in 1..=10, 8 constants each.
    let mut all = true;
    for n in 1..=10u32 {
        for cst in constants_for(n) {
            let y = wire_range(0, n);
            let c = qarith::arith::build_cq_adder(&y, q(n), cst).unwrap();
            let oracle =
                PermutationOracle::from_fn(n, move |x| (x + cst) & ((1u64 << n) - 1));
            all &= check_dirty_restoration(&c, &[q(n)], &oracle, &opts())
                .unwrap()
                .passed();
        }
    }
    ok &= line("AC1.cq-adder", all, "n in 1..=10 x 8 constants x dirty values");

    // Modular adder, n in 3..=6, 5 (N, a) pairs per n, b < N only.
    let mut all = true;
    for n in 3..=6u32 {
        for (nn, aa) in modulus_pairs(n) {
            let b = wire_range(0, n);
            let spec = qarith::arith::ModularAdderSpec {
                n,
                a: aa,
                modulus: nn,
                controls: 0,
            };
            let c = qarith::arith::build_modular_adder(&[], &b, q(n), q(n + 1), &spec).unwrap();
            let oracle = PermutationOracle::from_fn(n + 2, move |x| {
                let bv = x & ((1 << n) - 1);
                (x & !((1u64 << n) - 1)) | ((aa + bv) % nn)
            });
            all &= check_equivalence_filtered(
                &c,
                &oracle,
                |x| (x & ((1 << n) - 1)) < nn && (x >> n) & 1 == 0,
                &opts(),
            )
            .unwrap()
            .passed();
        }
    }
    ok &= line("AC1.modular-adder", all, "n in 3..=6 x 5 (N,a) pairs, flag restored");

    // Controlled variants, k in 1..=3: identity when any control is clear,
    // target action when all are set (the sweeps cover every pattern).
    let mut all = true;
    for k in 1..=3u32 {
        let controls = wire_range(0, k);
        let kmask = (1u64 << k) - 1;
        // comparator n=2..3
        for n in 2..=3u32 {
            let a = wire_range(k, k + n);
            let b = wire_range(k + n, k + 2 * n);
            let c = build_controlled_qq_comparator(&controls, &a, &b, q(k + 2 * n)).unwrap();
            let oracle = PermutationOracle::from_fn(k + 2 * n + 1, move |x| {
                if x & kmask != kmask {
                    return x;
                }
                let av = (x >> k) & ((1 << n) - 1);
                let bv = (x >> (k + n)) & ((1 << n) - 1);
                if av < bv {
                    x ^ (1 << (k + 2 * n))
                } else {
                    x
                }
            });
            all &= check_equivalence(&c, &oracle, &[], &opts()).unwrap().passed();
        }
        // cq comparator, incrementer, adder at n=3
        let n = 3u32;
        let a = wire_range(k, k + n);
        let c = build_controlled_cq_comparator(&controls, &a, q(k + n), q(k + n + 1), 3).unwrap();
        let oracle = PermutationOracle::from_fn(k + n + 1, move |x| {
            let av = (x >> k) & 0b111;
            if x & kmask == kmask && 3 < av {
                x ^ (1 << (k + n))
            } else {
                x
            }
        });
        all &= check_dirty_restoration(&c, &[q(k + n + 1)], &oracle, &opts())
            .unwrap()
            .passed();

        let y = wire_range(k, k + n);
        let c = build_controlled_incrementer(&controls, &y, q(k + n), Direction::Increment)
            .unwrap();
        let oracle = PermutationOracle::from_fn(k + n, move |x| {
            if x & kmask != kmask {
                return x;
            }
            let v = (x >> k) & 0b111;
            (x & kmask) | (((v + 1) & 0b111) << k)
        });
        all &= check_dirty_restoration(&c, &[q(k + n)], &oracle, &opts())
            .unwrap()
            .passed();

        let c = build_controlled_cq_adder(&controls, &y, q(k + n), 5).unwrap();
        let oracle = PermutationOracle::from_fn(k + n, move |x| {
            if x & kmask != kmask {
                return x;
            }
            let v = (x >> k) & 0b111;
            (x & kmask) | (((v + 5) & 0b111) << k)
        });
        all &= check_dirty_restoration(&c, &[q(k + n)], &oracle, &opts())
            .unwrap()
            .passed();
    }
    ok &= line("AC1.controlled", all, "k in 1..=3 variants of all four maps");

    assert!(ok, "AC1 failed");
}

fn build_qq_cmp(a: &[Qubit], b: &[Qubit], z: Qubit) -> Circuit {
    qarith::arith::build_qq_comparator(a, b, z).unwrap()
}

fn constants_for(n: u32) -> Vec<u64> {
    // 0, 1, max, and five deterministic mid-range values.
    let top = (1u64 << n) - 1;
    let mut cs = vec![0, 1, top];
    let mut x = 0x9E37_79B9u64;
    while cs.len() < 8 {
        x = x.wrapping_mul(0x2545_F491_4F6C_DD1D).wrapping_add(n as u64);
        cs.push(x % (top + 1));
    }
    cs.sort();
    cs.dedup();
    cs
}

fn modulus_pairs(n: u32) -> Vec<(u64, u64)> {
    let top = 1u64 << n;
    let mut out = vec![(top - 1, 1), (top / 2 + 1, top / 4)];
    let mut x = 12345u64;
    while out.len() < 5 {
        x = x.wrapping_mul(6364136223846793005).wrapping_add(n as u64);
        let nn = 3 + x % (top - 3);
        let aa = (x >> 17) % nn;
        out.push((nn, aa));
    }
    out.truncate(5);
    out
}

// ---------------------------------------------------------------------------
// 2. Qubit-contract exactness
// ---------------------------------------------------------------------------

#[test]
fn ac2_qubit_contracts() {
    let mut ok = true;
    for n in [2u32, 4, 8, 16, 32] {
        let s = catalog::synth("comparator", &Params { n, ..Params::default() }).unwrap();
        let pass = s.report.qubits_clean == 0
            && s.report.qubits_dirty == 0
            && s.high_water_clean == 0
            && s.high_water_dirty == 0;
        ok &= line(
            "AC2.comparator",
            pass,
            &format!("n={n}: zero external ancillas"),
        );
        for name in ["cq-comparator", "incrementer", "cq-adder"] {
            let s = catalog::synth(name, &Params { n, ..Params::default() }).unwrap();
            let pass = s.report.qubits_dirty == 1
                && s.report.qubits_clean == 0
                && s.high_water_dirty == 1
                && s.high_water_clean == 0;
            ok &= line(
                &format!("AC2.{name}"),
                pass,
                &format!("n={n}: exactly one external dirty ancilla"),
            );
        }
    }
    assert!(ok, "AC2 failed");
}

// ---------------------------------------------------------------------------
// 3. Closed-form bounds of the ancilla-assisted ladder (zero tolerance)
// ---------------------------------------------------------------------------

#[test]
fn ac3_ladder_closed_forms() {
    let sizes: Vec<u32> = (4..=64).collect();
    let r = run_sweep("ladder2", &sizes, 1, &Params::default()).unwrap();
    let mut count_ok = true;
    let mut depth_ok = true;
    let mut anc_ok = true;
    for v in &r.verdicts {
        match v.metric.as_str() {
            "count_ccx" => count_ok &= v.pass,
            "depth" => depth_ok &= v.pass,
            "ancillas" => anc_ok &= v.pass,
            _ => {}
        }
        if !v.pass {
            println!(
                "  ladder2 n={} {}: measured {} > bound {}",
                v.n, v.metric, v.measured, v.bound
            );
        }
    }
    let mut ok = true;
    ok &= line(
        "AC3.ccx-count",
        count_ok,
        "CCX <= 3n - 3 - 3 floor(log2 n) - 3 floor(log2 2n/3), n in 4..=64",
    );
    ok &= line(
        "AC3.depth",
        depth_ok,
        "depth <= 2 floor(log2 n) + 2 floor(log2 2n/3)",
    );
    ok &= line(
        "AC3.ancillas",
        anc_ok,
        "ancillas <= n - 1 - floor(log2 n) - floor(log2 2n/3)",
    );
    assert!(ok, "AC3 failed (the printed closed forms are unattainable at small n; see the per-point lines)");
}

// ---------------------------------------------------------------------------
// 4. Asymptotic scaling surrogates
// ---------------------------------------------------------------------------

#[test]
fn ac4_scaling_sweeps() {
    let sizes = [16u32, 32, 64, 128, 256];
    let mut ok = true;
    for name in ["comparator", "incrementer", "cq-adder"] {
        let r = run_sweep(name, &sizes, 2, &Params::default()).unwrap();
        for p in &r.points {
            println!(
                "  {name} n={}: gates={} depth={}",
                p.n, p.report.total_gates, p.report.depth
            );
        }
        let mut pass = true;
        for v in &r.verdicts {
            if !v.pass {
                println!(
                    "  {name} n={} {}: measured {:.0} > bound {:.0}",
                    v.n, v.metric, v.measured, v.bound
                );
            }
            pass &= v.pass;
        }
        ok &= line(
            &format!("AC4.{name}"),
            pass,
            "fit at {16,32}, later points within fitted bound x 1.10",
        );

        // Supplementary evidence for the asymptotic shape: the same fit
        // anchored past the pre-asymptotic knee.
        let r2 = run_sweep(name, &[64, 128, 256], 2, &Params::default()).unwrap();
        let supp = r2.all_pass();
        println!(
            "  (info) {name} fit anchored at {{64,128}} checked at 256: {}",
            if supp { "holds" } else { "does not hold" }
        );
    }
    assert!(ok, "AC4 failed (pre-asymptotic curvature; see per-point lines and the ledger)");
}

// ---------------------------------------------------------------------------
// 5. Promise-gate contracts
// ---------------------------------------------------------------------------

#[test]
fn ac5_promise_contracts() {
    let mut ok = true;

    // Strong promise ladder (scratch relabeled as promise register).
    {
        let wires = wire_range(0, 9);
        let need = ladderk_scratch_need(2, 9) as u32;
        let promise = wire_range(9, 9 + need);
        let c = build_promise_ladderk(2, &wires, &promise, false).unwrap();
        let oracle = PermutationOracle::from_fn(9, |x| {
            let mut y = x;
            for i in (0..4u64).rev() {
                let all = 0b11 << (2 * i);
                if y & all == all {
                    y ^= 1 << (2 * i + 2);
                }
            }
            y
        });
        let contract = PromiseContract {
            promise_qubits: promise,
            target_qubits: wires,
            target_oracle: oracle,
            strength: Strength::Strong,
        };
        let pass = check_promise(&c, &contract, &opts()).unwrap().passed();
        ok &= line("AC5.ladder", pass, "strong promise ladder, n=4 k=2, exhaustive");
    }

    // Controlled strong promise V operator, small and blocked paths.
    {
        let mut all = true;
        for n in [2u32, 5, 6] {
            let data = wire_range(0, 2 * n + 1);
            let need = cpv_promise_need(n as usize) as u32;
            let promise = wire_range(2 * n + 1, 2 * n + 1 + need);
            let ctrl = q(2 * n + 1 + need);
            let c = build_ctrl_promise_v2(ctrl, &promise, &data).unwrap();
            let mut targets = data.clone();
            targets.push(ctrl);
            let inner = PermutationOracle::from_fn(2 * n + 2, move |x| {
                if (x >> (2 * n + 1)) & 1 == 0 {
                    return x;
                }
                let mut carry = 0u64;
                for i in 0..n as u64 {
                    let u = (x >> (2 * i)) & 1;
                    let v = (x >> (2 * i + 1)) & 1;
                    carry = v & (u ^ carry);
                }
                x ^ (carry << (2 * n))
            });
            let contract = PromiseContract {
                promise_qubits: promise,
                target_qubits: targets,
                target_oracle: inner,
                strength: Strength::Strong,
            };
            all &= check_promise(&c, &contract, &opts()).unwrap().passed();
        }
        ok &= line("AC5.v-operator", all, "controlled strong promise V, n in {2,5,6}");
    }

    // Promise incrementers, linear and sqrt registers.
    {
        let mut all = true;
        for (n, k) in [(4u32, 0u32), (5, 1), (6, 0)] {
            let controls = wire_range(0, k);
            let y = wire_range(k, k + n);
            let promise = wire_range(k + n, k + n + n - 1);
            let c =
                build_promise_incrementer_linear(&controls, &y, &promise, Direction::Increment)
                    .unwrap();
            let mut targets = controls.clone();
            targets.extend_from_slice(&y);
            let kmask = (1u64 << k) - 1;
            let oracle = PermutationOracle::from_fn(k + n, move |x| {
                if x & kmask != kmask {
                    return x;
                }
                let v = (x >> k) & ((1 << n) - 1);
                (x & kmask) | (((v + 1) & ((1 << n) - 1)) << k)
            });
            let contract = PromiseContract {
                promise_qubits: promise,
                target_qubits: targets,
                target_oracle: oracle,
                strength: Strength::Strong,
            };
            all &= check_promise(&c, &contract, &opts()).unwrap().passed();
        }
        for n in [4u32, 7, 9] {
            let y = wire_range(1, 1 + n);
            let need = lemma_sqrt_promise_need(n as usize) as u32;
            let promise = wire_range(1 + n, 1 + n + need);
            let c = build_promise_incrementer_sqrt(q(0), &y, &promise, Direction::Increment)
                .unwrap();
            let mut targets = vec![q(0)];
            targets.extend_from_slice(&y);
            let oracle = PermutationOracle::from_fn(1 + n, move |x| {
                if x & 1 == 0 {
                    return x;
                }
                let v = (x >> 1) & ((1 << n) - 1);
                (x & 1) | (((v + 1) & ((1 << n) - 1)) << 1)
            });
            let contract = PromiseContract {
                promise_qubits: promise,
                target_qubits: targets,
                target_oracle: oracle,
                strength: Strength::Strong,
            };
            all &= check_promise(&c, &contract, &opts()).unwrap().passed();
        }
        ok &= line(
            "AC5.incrementers",
            all,
            "strong promise incrementers, linear and sqrt registers",
        );
    }
    assert!(ok, "AC5 failed");
}

// ---------------------------------------------------------------------------
// 6. Cross-construction oracles
// ---------------------------------------------------------------------------

#[test]
fn ac6_mcx_cross_checks() {
    let mut ok = true;
    for k in 2..=5u32 {
        // Reference multi-controlled X.
        let mut ledger = AncillaLedger::with_pools(vec![], vec![q(k + 1)]);
        let mcx = build_mcx(&wire_range(0, k), q(k), &mut ledger).unwrap();
        let mcx_tt = truth_table(&Circuit::from_gates(k + 2, mcx.gates().to_vec()).unwrap())
            .unwrap();

        // A controlled one-bit increment is the increment-pair form: a
        // (k+1)-bit increment followed by a decrement on the controls.
        let inc = build_controlled_incrementer(
            &wire_range(0, k),
            &[q(k)],
            q(k + 1),
            Direction::Increment,
        )
        .unwrap();
        let inc_tt =
            truth_table(&Circuit::from_gates(k + 2, inc.gates().to_vec()).unwrap()).unwrap();
        let mut eq = true;
        for x in 0..(1u64 << (k + 2)) {
            eq &= mcx_tt.apply(x) == inc_tt.apply(x);
        }
        ok &= line(
            "AC6.increment-pair",
            eq,
            &format!("k={k}: controlled +1/-1 equals the multi-controlled X"),
        );

        // Comparator with the threshold constant.
        let cmp = build_cq_comparator(&wire_range(0, k), q(k), q(k + 1), (1 << k) - 2).unwrap();
        let cmp_tt =
            truth_table(&Circuit::from_gates(k + 2, cmp.gates().to_vec()).unwrap()).unwrap();
        let mut eq = true;
        for x in 0..(1u64 << (k + 2)) {
            eq &= mcx_tt.apply(x) == cmp_tt.apply(x);
        }
        ok &= line(
            "AC6.comparator-threshold",
            eq,
            &format!("k={k}: comparator at the all-ones threshold equals C^kX"),
        );
    }
    assert!(ok, "AC6 failed");
}

// ---------------------------------------------------------------------------
// 7. Resource ceiling of the ancilla/control trade
// ---------------------------------------------------------------------------

#[test]
fn ac7_trade_ceiling() {
    let mut ok = true;
    let mut ceiling = true;
    for m in 0..=6usize {
        for k in 0..=6usize {
            let controls = wire_range(0, k as u32);
            let targets = [q(7), q(8), q(9)];
            let mut ledger = AncillaLedger::with_pools(wire_range(10, 18), vec![]);
            let v = GateTemplate::new(3, m, false, move |ctx, sink| {
                use qarith::circuit::Sink as _;
                for j in 0..m {
                    sink.ccx(ctx.targets[0], ctx.targets[1], ctx.clean[j]);
                    sink.cx(ctx.clean[j], ctx.targets[2]);
                }
                Ok(())
            });
            let u = GateTemplate::new(3, 0, true, |ctx, sink| {
                use qarith::circuit::Sink as _;
                sink.x(ctx.targets[2]);
                Ok(())
            });
            let result = trade_ancillas_for_controls(
                &controls, &v, &u, m, &targets, &[], &mut ledger, false,
            )
            .unwrap();
            ceiling &= result.clean_used <= 1.max(m.saturating_sub(k) + 1);
        }
    }
    ok &= line(
        "AC7.ceiling",
        ceiling,
        "clean usage <= max(1, m-k+1) across (m,k) in [0,6]^2",
    );

    // Controlled ripple-carry adder instantiation at n=4, k in {1,2}.
    let mut sem = true;
    for k in [1u32, 2] {
        let controls = wire_range(0, k);
        let a = wire_range(k, k + 4);
        let b = wire_range(k + 4, k + 8);
        let z = q(k + 8);
        let clean = wire_range(k + 9, k + 9 + 6);
        let mut ledger = AncillaLedger::with_pools(clean.clone(), vec![]);
        let (c, _) =
            qarith::promise::build_controlled_qq_adder(&controls, &a, &b, z, &mut ledger)
                .unwrap();
        let kmask = (1u64 << k) - 1;
        let low_mask = (1u64 << (k + 9)) - 1;
        let inner = PermutationOracle::from_fn(c.num_qubits(), move |x| {
            if x & kmask != kmask {
                return x;
            }
            let av = (x >> k) & 0xF;
            let bv = (x >> (k + 4)) & 0xF;
            let s = av + bv;
            let mut out = (x & !low_mask) | (x & kmask) | (av << k);
            out |= (s & 0xF) << (k + 4);
            if (x >> (k + 8)) & 1 == 1 {
                out |= 1 << (k + 8);
            }
            if s >> 4 == 1 {
                out ^= 1 << (k + 8);
            }
            out
        });
        let fixed: Vec<(Qubit, bool)> = clean
            .iter()
            .filter(|w| w.0 < c.num_qubits())
            .map(|w| (*w, false))
            .collect();
        sem &= check_equivalence(&c, &inner, &fixed, &opts()).unwrap().passed();
    }
    ok &= line("AC7.controlled-adder", sem, "n=4, k in {1,2} exhaustive");
    assert!(ok, "AC7 failed");
}

// ---------------------------------------------------------------------------
// 8. Factoring-pipeline composition
// ---------------------------------------------------------------------------

#[test]
fn ac8_shor_composition() {
    let mut ok = true;
    let mut qubits_ok = true;
    for n in 2..=64u32 {
        let e = estimate_shor(n).unwrap();
        qubits_ok &= e.total_qubits == 2 * n as u64 + 2;
    }
    ok &= line("AC8.qubits", qubits_ok, "total qubits = 2n+2 for n in 2..=64");

    let e8 = estimate_shor(8).unwrap();
    let e16 = estimate_shor(16).unwrap();
    let e32 = estimate_shor(32).unwrap();
    let model_g = |n: f64| n.powi(3) * n.log2();
    let model_d = |n: f64| n.powi(2) * n.log2() * n.log2();
    let mut growth_ok = true;
    for (lo, hi, lo_n, hi_n) in [(&e8, &e16, 8.0, 16.0), (&e16, &e32, 16.0, 32.0)] {
        let g_meas = hi.gate_total as f64 / lo.gate_total as f64;
        let g_pred = model_g(hi_n) / model_g(lo_n);
        let d_meas = hi.depth_total as f64 / lo.depth_total as f64;
        let d_pred = model_d(hi_n) / model_d(lo_n);
        let g_pass = (g_meas / g_pred - 1.0).abs() <= 0.30;
        let d_pass = (d_meas / d_pred - 1.0).abs() <= 0.30;
        println!(
            "  n={lo_n}->{hi_n}: gate ratio {:.2} (model {:.2}), depth ratio {:.2} (model {:.2})",
            g_meas, g_pred, d_meas, d_pred
        );
        growth_ok &= g_pass && d_pass;
    }
    ok &= line(
        "AC8.growth",
        growth_ok,
        "composed totals track n^3 log n and n^2 log^2 n within 30 percent",
    );
    assert!(ok, "AC8 failed (composition arithmetic holds; see ratio lines)");
}

// ---------------------------------------------------------------------------
// 9. Mutation sensitivity
// ---------------------------------------------------------------------------

#[test]
fn ac9_mutation_sensitivity() {
    let mut ok = true;
    let flagships: Vec<(&str, Params)> = vec![
        ("comparator", Params { n: 4, ..Params::default() }),
        ("cq-comparator", Params { n: 4, constant: Some(5), ..Params::default() }),
        ("incrementer", Params { n: 4, ..Params::default() }),
        ("cq-adder", Params { n: 4, constant: Some(13), ..Params::default() }),
    ];
    for (name, params) in flagships {
        let syn = catalog::synth(name, &params).unwrap();
        let gates = syn.circuit.gates().to_vec();
        let nq = syn.circuit.num_qubits();
        let reference = truth_table(&syn.circuit).unwrap();
        let mut undetected = 0usize;
        for i in 0..gates.len() {
            // Drop gate i.
            let mut dropped = gates.clone();
            dropped.remove(i);
            let c = Circuit::from_gates(nq, dropped).unwrap();
            if check_equivalence(&c, &reference, &[], &opts()).unwrap().passed() {
                undetected += 1;
            }
            // Perturb gate i into a structurally different gate.
            let mut perturbed = gates.clone();
            perturbed[i] = perturb(&gates[i], nq);
            let c = Circuit::from_gates(nq, perturbed).unwrap();
            if check_equivalence(&c, &reference, &[], &opts()).unwrap().passed() {
                undetected += 1;
            }
        }
        let pass = undetected == 0;
        ok &= line(
            &format!("AC9.{name}"),
            pass,
            &format!(
                "{} single-gate mutations, {} undetected",
                2 * gates.len(),
                undetected
            ),
        );
    }
    assert!(ok, "AC9 failed");
}

fn perturb(g: &Gate, nq: u32) -> Gate {
    let other = |w: Qubit| q((w.0 + 1) % nq);
    match *g {
        Gate::X { target } => Gate::cx(other(target), target),
        Gate::Cx { control, target } => {
            let mut c2 = other(control);
            if c2 == target {
                c2 = other(c2);
            }
            Gate::cx(c2, target)
        }
        Gate::Ccx { controls, target } => Gate::cx(controls[0], target),
    }
}
