//! The headline constructions: quantum-quantum and classical-quantum
//! comparators, incrementers, the classical-quantum adder and the modular
//! adder, together with the promise-gate builders they are made of.
//!
//! All registers are little endian: wire i of a register carries bit i.
//! Every builder is deterministic, and every adjoint is an exact reversal
//! of the forward gate list.

use crate::circuit::{Circuit, Gate, Qubit, RegisterMap, Role, Sink};
use crate::primitives::{
    chain_scratch_need, emit_c3x, emit_chain_ladder, emit_chain_ladder_mode, emit_controlled_flip,
    emit_ctrl_fanout, emit_fanout1, emit_ladder1, emit_mcx, emit_v2_naive, precondition, ChainStep,
    ScratchStack, SynthError, LADDER_BASE,
};
use crate::promise::{emit_controlled_layer, LayerElement};

/// Pair list and final target of a V-operator instance. Pair i holds the
/// chain wire `u` and the propagate wire `v`; the operator flips `target`
/// by the carry of the chain.
#[derive(Clone, Debug)]
pub(crate) struct V2Wires {
    pub pairs: Vec<(Qubit, Qubit)>,
    pub target: Qubit,
}

impl V2Wires {
    fn u(&self, i: usize) -> Qubit {
        self.pairs[i].0
    }
    fn v(&self, i: usize) -> Qubit {
        self.pairs[i].1
    }
}

// ---------------------------------------------------------------------------
// Specs (the shapes the CLI and sweeps address constructions by)
// ---------------------------------------------------------------------------

#[derive(Copy, Clone, PartialEq, Eq, Debug)]
pub enum ComparatorMode {
    QuantumQuantum,
    ClassicalQuantum,
}

#[derive(Copy, Clone, Debug)]
pub struct ComparatorSpec {
    pub n: u32,
    pub mode: ComparatorMode,
    /// Present iff mode is classical-quantum.
    pub constant: Option<u64>,
    pub controls: u32,
}

#[derive(Copy, Clone, PartialEq, Eq, Debug)]
pub enum Direction {
    Increment,
    Decrement,
}

#[derive(Copy, Clone, Debug)]
pub struct IncrementerSpec {
    pub n: u32,
    pub controls: u32,
    pub direction: Direction,
}

#[derive(Copy, Clone, Debug)]
pub struct AdderSpec {
    pub n: u32,
    pub constant: u64,
    pub controls: u32,
}

#[derive(Copy, Clone, Debug)]
pub struct ModularAdderSpec {
    pub n: u32,
    pub a: u64,
    pub modulus: u64,
    pub controls: u32,
}

// ---------------------------------------------------------------------------
// Controlled strong promise gate for the V operator
// ---------------------------------------------------------------------------

const CPV_BASE: usize = 3;
const V2_BASE: usize = 4;

fn block_widths(n: usize, w: usize) -> Vec<usize> {
    // The first block takes the ragged remainder so every borrowing block
    // finds a full-width neighbour above it.
    let q = n.div_ceil(w);
    let first = n - (q - 1) * w;
    let mut out = vec![first];
    out.extend(std::iter::repeat(w).take(q - 1));
    out
}

/// Promise wires consumed by [`build_ctrl_promise_v2`] on an n-pair target.
pub fn cpv_promise_need(n: usize) -> usize {
    if n <= CPV_BASE {
        return 1;
    }
    let w = (n as f64).sqrt().ceil() as usize;
    let q = n.div_ceil(w);
    if q < 2 {
        return 1;
    }
    // Flags between blocks and one fan-in wire per block.
    2 * q - 1
}

/// Controlled strong promise gate whose target unitary is the V operator.
///
/// The pair list splits into sqrt-sized blocks. Per-block propagate
/// products land in the fan-in wires, a CCX chain folds them into suffix
/// flags, and the products uncompute. Each block's carry term then lands
/// in its fan-in wire under its flag through a short ladder conjugation;
/// a fan-in tree XORs the terms and one CCX carries the control onto the
/// target. Everything around that CCX is conjugation, so a clear control
/// fixes every wire and the promise register is restored on every input.
pub(crate) fn emit_ctrl_promise_v2(
    sink: &mut Vec<Gate>,
    ctrl: Qubit,
    promise: &[Qubit],
    v: &V2Wires,
) -> Result<(), SynthError> {
    let n = v.pairs.len();
    if promise.len() < cpv_promise_need(n) {
        return Err(precondition(format!(
            "promise register too small: need {}, have {}",
            cpv_promise_need(n),
            promise.len()
        )));
    }
    let w = (n as f64).sqrt().ceil() as usize;
    let q = n.div_ceil(w.max(1));
    if n <= CPV_BASE || q < 2 {
        // Ladder-conjugated form with the control on the middle gate only.
        let mut ladder = Vec::new();
        for i in 0..n - 1 {
            ladder.ccx(v.u(i), v.v(i), v.u(i + 1));
        }
        sink.extend_from_slice(&ladder);
        let dirty = if n >= 2 { v.u(0) } else { promise[0] };
        emit_c3x(sink, [ctrl, v.u(n - 1), v.v(n - 1)], v.target, dirty);
        ladder.reverse();
        sink.extend_from_slice(&ladder);
        return Ok(());
    }

    let widths = block_widths(n, w);
    let mut starts = Vec::new();
    let mut acc = 0usize;
    for wd in &widths {
        starts.push(acc);
        acc += wd;
    }
    let flags = &promise[0..q - 1];
    let fanin = &promise[q - 1..2 * q - 1];
    let v_of_block =
        |j: usize| -> Vec<Qubit> { (starts[j]..starts[j] + widths[j]).map(|i| v.v(i)).collect() };

    // Staircase: flags[j] accumulates the propagate product of the blocks
    // above j. Block products land in the (currently free) fan-in wires in
    // one parallel layer, a CCX chain folds them into the flags, and the
    // products uncompute; the whole staircase mirrors at the end, so junk
    // cancels.
    let mut stair = Vec::new();
    {
        let mut products = Vec::new();
        for j in 1..q {
            let vb = v_of_block(j);
            let dirty: Vec<Qubit> = (starts[j]..starts[j] + widths[j]).map(|i| v.u(i)).collect();
            crate::primitives::emit_mcx_aux(
                &mut products,
                &vb,
                fanin[j],
                crate::primitives::McxAux {
                    clean: &[],
                    dirty: &dirty,
                },
            )?;
        }
        stair.extend_from_slice(&products);
        // Suffix chain, highest block first.
        for j in (0..q - 1).rev() {
            if j == q - 2 {
                stair.cx(fanin[j + 1], flags[j]);
            } else {
                stair.ccx(fanin[j + 1], flags[j + 1], flags[j]);
            }
        }
        products.reverse();
        stair.extend_from_slice(&products);
    }

    // Per-block carry terms: a short ascending ladder exposes the block
    // carry on its last chain wire; the flagged C3X moves it to the fan-in
    // wire. Blocks are disjoint, so they all run in one round.
    let mut blocks = Vec::new();
    for j in 0..q {
        let s0 = starts[j];
        let wd = widths[j];
        let mut lad = Vec::new();
        for i in s0..s0 + wd - 1 {
            lad.ccx(v.u(i), v.v(i), v.u(i + 1));
        }
        blocks.extend_from_slice(&lad);
        let last = s0 + wd - 1;
        let spare = if wd >= 2 {
            v.u(s0)
        } else {
            v.u(starts[(j + 1) % q])
        };
        if j + 1 < q {
            emit_c3x(&mut blocks, [flags[j], v.u(last), v.v(last)], fanin[j], spare);
        } else {
            blocks.ccx(v.u(last), v.v(last), fanin[j]);
        }
        lad.reverse();
        blocks.extend_from_slice(&lad);
    }

    // Fan-in tree over the per-block terms.
    let mut combine = Vec::new();
    let mut stride = 1usize;
    while stride < q {
        let mut i = 0;
        while i + stride < q {
            combine.cx(fanin[i + stride], fanin[i]);
            i += 2 * stride;
        }
        stride *= 2;
    }

    sink.extend_from_slice(&stair);
    sink.extend_from_slice(&blocks);
    sink.extend_from_slice(&combine);
    sink.ccx(ctrl, fanin[0], v.target);
    let mut uncombine = combine;
    uncombine.reverse();
    sink.extend_from_slice(&uncombine);
    let mut unblocks = blocks;
    unblocks.reverse();
    sink.extend_from_slice(&unblocks);
    let mut unstair = stair;
    unstair.reverse();
    sink.extend_from_slice(&unstair);
    Ok(())
}

/// Controlled strong promise gate for the V operator over `2n+1` data
/// wires; `promise` must supply at least [`cpv_promise_need`] wires.
pub fn build_ctrl_promise_v2(
    control: Qubit,
    promise: &[Qubit],
    data: &[Qubit],
) -> Result<Circuit, SynthError> {
    if data.len() < 3 || data.len() % 2 == 0 {
        return Err(precondition("the V operator needs an odd wire count >= 3"));
    }
    let pairs: Vec<(Qubit, Qubit)> = data[..data.len() - 1]
        .chunks_exact(2)
        .map(|c| (c[0], c[1]))
        .collect();
    let v = V2Wires {
        pairs,
        target: *data.last().unwrap(),
    };
    let mut gates = Vec::new();
    emit_ctrl_promise_v2(&mut gates, control, promise, &v)?;
    let mut registers = RegisterMap::new();
    registers.push("c", Role::Control, vec![control]);
    registers.push("x", Role::Data, data.to_vec());
    registers.push("p", Role::Promise, promise.to_vec());
    let nq = data
        .iter()
        .chain(promise.iter())
        .chain([&control])
        .map(|w| w.0 + 1)
        .max()
        .unwrap();
    Ok(Circuit::with_registers(nq, gates, registers)?)
}

// ---------------------------------------------------------------------------
// The V operator, ancilla-free, plain and multi-controlled
// ---------------------------------------------------------------------------

fn v2_split(m: usize) -> usize {
    // Smallest high-block pair count whose propagate wires can host the
    // promise register of the peeled low part.
    (2..m).find(|&b| b >= cpv_promise_need(m - b)).unwrap_or(m)
}

/// Emits the V operator over `v` with no ancilla qubits, optionally under
/// `controls`.
///
/// Uncontrolled: the high pairs' propagate wires are toggle-detected onto
/// one of their own chain wires, X-conjugated into a promise register for
/// the controlled promise gate over the low part, and the high part
/// recurses. Controlled: the last two pairs are peeled so the conjunction
/// of controls and propagate wires lands in multi-controlled X gates
/// around plain V instances on remapped pair lists.
pub(crate) fn emit_v2(
    sink: &mut Vec<Gate>,
    v: &V2Wires,
    controls: &[Qubit],
) -> Result<(), SynthError> {
    let m = v.pairs.len();
    if !controls.is_empty() {
        if m < 2 {
            return Err(precondition("a controlled comparator core needs n > 1"));
        }
        // t ^= K v_{m-1} u_{m-1}  xor  K v_{m-1} v_{m-2} (inner carry).
        let mut ctl1 = controls.to_vec();
        ctl1.push(v.v(m - 1));
        ctl1.push(v.u(m - 1));
        emit_controlled_flip(sink, &ctl1, v.target, &[], &[v.u(0), v.v(0)], 0)?;
        let mut ctl2 = controls.to_vec();
        ctl2.push(v.v(m - 1));
        ctl2.push(v.v(m - 2));
        let toggle_dirty = [v.u(0), v.target];
        let mut inner_pairs = v.pairs[..m - 2].to_vec();
        inner_pairs.push((v.u(m - 2), v.u(m - 1)));
        let inner = V2Wires {
            pairs: inner_pairs,
            target: v.target,
        };
        for _ in 0..2 {
            emit_controlled_flip(sink, &ctl2, v.u(m - 1), &[], &toggle_dirty, 0)?;
            emit_v2(sink, &inner, &[])?;
        }
        return Ok(());
    }

    if m <= V2_BASE {
        emit_v2_naive(sink, &v.pairs, v.target);
        return Ok(());
    }
    let b = v2_split(m);
    if b >= m {
        emit_v2_naive(sink, &v.pairs, v.target);
        return Ok(());
    }
    let split = m - b;
    let alt: Vec<Qubit> = (split..m).map(|i| v.v(i)).collect();
    let psi = v.u(split);
    let mcx_dirty = v.u(split + 1);
    let low = V2Wires {
        pairs: v.pairs[..split].to_vec(),
        target: v.target,
    };
    let mut cpv = Vec::new();
    emit_ctrl_promise_v2(&mut cpv, psi, &alt, &low)?;

    let mut toggle_helpers: Vec<Qubit> = vec![mcx_dirty];
    toggle_helpers.extend((split + 2..m).map(|i| v.u(i)));
    toggle_helpers.push(v.target);
    let toggle = |sink: &mut Vec<Gate>| -> Result<(), SynthError> {
        crate::primitives::emit_mcx_aux(
            sink,
            &alt,
            psi,
            crate::primitives::McxAux {
                clean: &[],
                dirty: &toggle_helpers,
            },
        )
    };
    toggle(sink)?;
    for wq in &alt {
        sink.x(*wq);
    }
    sink.extend_from_slice(&cpv);
    for wq in &alt {
        sink.x(*wq);
    }
    toggle(sink)?;
    for wq in &alt {
        sink.x(*wq);
    }
    cpv.reverse();
    sink.extend_from_slice(&cpv);
    for wq in &alt {
        sink.x(*wq);
    }

    let high = V2Wires {
        pairs: v.pairs[split..].to_vec(),
        target: v.target,
    };
    emit_v2(sink, &high, &[])
}

// ---------------------------------------------------------------------------
// Quantum-quantum comparator
// ---------------------------------------------------------------------------

/// |a>|b>|z> -> |a>|b>|z ^ (a < b)> with both registers restored and no
/// ancilla qubits.
pub fn build_qq_comparator(a: &[Qubit], b: &[Qubit], z: Qubit) -> Result<Circuit, SynthError> {
    comparator_inner(&[], a, b, z)
}

/// Controlled variant; identity when any control is clear. Needs n > 1,
/// which guarantees an idle wire for the toggle decomposition.
pub fn build_controlled_qq_comparator(
    controls: &[Qubit],
    a: &[Qubit],
    b: &[Qubit],
    z: Qubit,
) -> Result<Circuit, SynthError> {
    if controls.is_empty() {
        return build_qq_comparator(a, b, z);
    }
    if a.len() < 2 {
        return Err(precondition("the controlled comparator needs n > 1"));
    }
    comparator_inner(controls, a, b, z)
}

fn comparator_inner(
    controls: &[Qubit],
    a_in: &[Qubit],
    b_in: &[Qubit],
    z: Qubit,
) -> Result<Circuit, SynthError> {
    if a_in.len() != b_in.len() || a_in.is_empty() {
        return Err(precondition("comparison needs equal non-empty registers"));
    }
    // The slice layout computes `z ^= (second register < first)`, so the
    // roles swap here to deliver z ^= (a < b).
    let (a, b) = (b_in, a_in);
    let n = a.len();
    let mut gates = Vec::new();
    if n == 1 && controls.is_empty() {
        // z ^= not(a) AND b on the original roles; a and b are swapped
        // locally, so complement the wire playing the public `a`.
        gates.x(b[0]);
        gates.ccx(a[0], b[0], z);
        gates.x(b[0]);
    } else {
        // Conjugation slices: complement b and fold a into it; the carry
        // column reads the top data wire before the difference ladder
        // rewrites it. Only the carry column takes the controls.
        let mut mask = Vec::new();
        for w in b {
            mask.x(*w);
        }
        for i in 1..n {
            mask.cx(a[i], b[i]);
        }
        gates.extend_from_slice(&mask);
        let mut zc = controls.to_vec();
        zc.push(a[n - 1]);
        emit_controlled_flip(&mut gates, &zc, z, &[], &[b[0]], 0)?;
        let mut ladder = Vec::new();
        emit_ladder1(&mut ladder, &a[1..], false);
        gates.extend_from_slice(&ladder);
        let pairs: Vec<(Qubit, Qubit)> = (0..n).map(|i| (a[i], b[i])).collect();
        emit_v2(&mut gates, &V2Wires { pairs, target: z }, controls)?;
        ladder.reverse();
        gates.extend_from_slice(&ladder);
        mask.reverse();
        gates.extend_from_slice(&mask);
    }
    let mut registers = RegisterMap::new();
    registers.push("c", Role::Control, controls.to_vec());
    registers.push("a", Role::Data, a_in.to_vec());
    registers.push("b", Role::Data, b_in.to_vec());
    registers.push("z", Role::Target, vec![z]);
    let nq = controls
        .iter()
        .chain(a.iter())
        .chain(b.iter())
        .chain([&z])
        .map(|w| w.0 + 1)
        .max()
        .unwrap();
    Ok(Circuit::with_registers(nq, gates, registers)?)
}

// ---------------------------------------------------------------------------
// Classical-quantum comparator
// ---------------------------------------------------------------------------

fn bit(c: u64, i: usize) -> bool {
    i < 64 && (c >> i) & 1 == 1
}

/// All-ones mask over the low `b` bits, saturating at the word width.
pub(crate) fn mask_bits(b: usize) -> u64 {
    if b >= 64 {
        u64::MAX
    } else {
        (1u64 << b) - 1
    }
}

/// Mask bits of the suffix-product form of `z ^= (c < a)`: the flip for
/// suffix i materializes iff the mask bit is set.
fn cq_masks(c: u64, n: usize) -> Vec<bool> {
    (0..n)
        .map(|i| {
            if i == 0 {
                !bit(c, 0)
            } else {
                bit(c, i - 1) ^ bit(c, i)
            }
        })
        .collect()
}

/// Emits `z ^= AND(controls) * sum_i m_i * (e_i ... e_{n-1})` over the
/// equality wires using `g` as the one dirty ancilla.
///
/// The low half's masked carry difference is collected into `g` by two
/// V passes whose chain wires are ghosted onto the high half's data; a
/// suffix conjunction then moves it onto z twice, cancelling the initial
/// dirt. The high half targets z directly the same way, ghosting onto the
/// low half (plus `g` when the width is odd).
fn emit_cq_core(
    sink: &mut Vec<Gate>,
    controls: &[Qubit],
    e: &[Qubit],
    z: Qubit,
    g: Qubit,
    masks: &[bool],
) -> Result<(), SynthError> {
    let n = e.len();
    if masks.iter().all(|m| !m) {
        return Ok(());
    }
    if n <= 4 {
        for i in 0..n {
            if masks[i] {
                let mut ctl = controls.to_vec();
                ctl.extend_from_slice(&e[i..]);
                emit_controlled_flip(sink, &ctl, z, &[], &[g], 0)?;
            }
        }
        return Ok(());
    }
    let h = n / 2;
    let (low_masks, high_masks) = masks.split_at(h);

    if low_masks.iter().any(|m| *m) {
        let pass = |sink: &mut Vec<Gate>| -> Result<(), SynthError> {
            let pairs: Vec<(Qubit, Qubit)> = (0..h).map(|i| (e[h + i], e[i])).collect();
            let vw = V2Wires { pairs, target: g };
            for _ in 0..2 {
                emit_v2(sink, &vw, &[])?;
                for i in 0..h {
                    if low_masks[i] {
                        sink.x(e[h + i]);
                    }
                }
            }
            Ok(())
        };
        let suffix_flip = |sink: &mut Vec<Gate>| -> Result<(), SynthError> {
            let mut ctl = controls.to_vec();
            ctl.extend_from_slice(&e[h..]);
            ctl.push(g);
            emit_controlled_flip(sink, &ctl, z, &[], &e[..h], 0)
        };
        pass(sink)?;
        suffix_flip(sink)?;
        pass(sink)?;
        suffix_flip(sink)?;
    }

    if high_masks.iter().any(|m| *m) {
        let mut ghosts: Vec<Qubit> = e[..h].to_vec();
        ghosts.push(g);
        let hi = n - h;
        let pairs: Vec<(Qubit, Qubit)> = (0..hi).map(|i| (ghosts[i], e[h + i])).collect();
        let vw = V2Wires { pairs, target: z };
        for _ in 0..2 {
            emit_v2(sink, &vw, controls)?;
            for (i, ghost) in ghosts.iter().enumerate().take(hi) {
                if high_masks[i] {
                    sink.x(*ghost);
                }
            }
        }
    }
    Ok(())
}

fn emit_cq_comparator(
    sink: &mut Vec<Gate>,
    controls: &[Qubit],
    a: &[Qubit],
    z: Qubit,
    g: Qubit,
    constant: u64,
) -> Result<(), SynthError> {
    let n = a.len();
    let masks = cq_masks(constant, n);
    for (i, w) in a.iter().enumerate() {
        if !bit(constant, i) {
            sink.x(*w);
        }
    }
    if !bit(constant, n - 1) {
        emit_controlled_flip(sink, controls, z, &[], &[a[0], g], 0)?;
    }
    emit_cq_core(sink, controls, a, z, g, &masks)?;
    for (i, w) in a.iter().enumerate() {
        if !bit(constant, i) {
            sink.x(*w);
        }
    }
    Ok(())
}

/// |a>|z> -> |a>|z ^ (c < a)> with one dirty ancilla g. The classical
/// constant compiles to gate presence: complements where its bits are
/// clear, suffix terms where its mask bits are set.
pub fn build_cq_comparator(
    a: &[Qubit],
    z: Qubit,
    g: Qubit,
    constant: u64,
) -> Result<Circuit, SynthError> {
    build_controlled_cq_comparator(&[], a, z, g, constant)
}

pub fn build_controlled_cq_comparator(
    controls: &[Qubit],
    a: &[Qubit],
    z: Qubit,
    g: Qubit,
    constant: u64,
) -> Result<Circuit, SynthError> {
    let n = a.len();
    if n == 0 {
        return Err(precondition("comparison needs a non-empty register"));
    }
    if n < 64 && constant >> n != 0 {
        return Err(precondition("constant out of range"));
    }
    let mut gates = Vec::new();
    emit_cq_comparator(&mut gates, controls, a, z, g, constant)?;
    let mut registers = RegisterMap::new();
    registers.push("c", Role::Control, controls.to_vec());
    registers.push("a", Role::Data, a.to_vec());
    registers.push("z", Role::Target, vec![z]);
    registers.push("g", Role::DirtyAncilla, vec![g]);
    let nq = controls
        .iter()
        .chain(a.iter())
        .chain([&z, &g])
        .map(|w| w.0 + 1)
        .max()
        .unwrap();
    Ok(Circuit::with_registers(nq, gates, registers)?)
}

// ---------------------------------------------------------------------------
// Promise incrementers
// ---------------------------------------------------------------------------

fn gidney_scratch_need(w: usize) -> usize {
    if w <= 2 {
        return 0;
    }
    (w - 2) + chain_scratch_need(w - 2, LADDER_BASE)
}

/// Promise wires used by the linear-register promise incrementer on n bits
/// (at most n-1).
pub fn lemma_linear_promise_need(n: usize) -> usize {
    if n <= 4 {
        return 1;
    }
    1 + gidney_scratch_need(n.div_ceil(2))
}

/// The interleaved carry incrementer with its carry ladders flattened to
/// logarithmic depth; `chi` adds one control to the non-conjugation
/// slices. Scratch comes from `pp` (promise wires).
fn emit_gidney_increment(
    sink: &mut Vec<Gate>,
    chi: Option<Qubit>,
    y: &[Qubit],
    pp: &mut ScratchStack,
    dirty_pool: &[Qubit],
) -> Result<(), SynthError> {
    let w = y.len();
    match (w, chi) {
        (0, _) => return Ok(()),
        (1, None) => {
            sink.x(y[0]);
            return Ok(());
        }
        (1, Some(c)) => {
            sink.cx(c, y[0]);
            return Ok(());
        }
        (2, None) => {
            sink.cx(y[0], y[1]);
            sink.x(y[0]);
            return Ok(());
        }
        (2, Some(c)) => {
            let mut pool = dirty_pool.to_vec();
            pool.extend(pp.available().iter().copied());
            emit_controlled_flip(sink, &[c, y[0]], y[1], &[], &pool, 0)?;
            sink.cx(c, y[0]);
            return Ok(());
        }
        _ => {}
    }
    let carries = pp.alloc(w - 2)?;
    let mut lad = Vec::new();
    {
        let steps: Vec<ChainStep> = (0..w - 2)
            .map(|i| ChainStep {
                extra: vec![y[i + 1]],
                target: carries[i],
            })
            .collect();
        emit_chain_ladder(&mut lad, Some(y[0]), &steps, pp, dirty_pool, LADDER_BASE)?;
    }
    sink.extend_from_slice(&lad);
    // Sum layer and midsection complement, controlled when chi is present.
    let mut sum_layer: Vec<LayerElement> = vec![LayerElement::gate(Gate::cx(y[0], y[1]))];
    for i in 0..w - 2 {
        sum_layer.push(LayerElement::gate(Gate::cx(carries[i], y[i + 2])));
    }
    let flip_mid: Vec<LayerElement> = (1..w - 1)
        .map(|i| LayerElement::gate(Gate::x(y[i])))
        .collect();
    let mut pool: Vec<Qubit> = dirty_pool.to_vec();
    pool.extend(pp.available().iter().copied());
    match chi {
        Some(c) => {
            emit_controlled_layer(sink, &[c], &sum_layer, &pool)?;
            emit_controlled_layer(sink, &[c], &flip_mid, &pool)?;
        }
        None => {
            for e in sum_layer.iter().chain(flip_mid.iter()) {
                sink.extend_from_slice(&e.gates);
            }
        }
    }
    let mut unlad = lad;
    unlad.reverse();
    sink.extend_from_slice(&unlad);
    match chi {
        Some(c) => emit_fanout1(sink, c, &y[..w - 1]),
        None => {
            for wq in &y[..w - 1] {
                sink.x(*wq);
            }
        }
    }
    pp.free(w - 2);
    Ok(())
}

fn emit_promise_inc_linear(
    sink: &mut Vec<Gate>,
    controls: &[Qubit],
    y: &[Qubit],
    promise: &[Qubit],
) -> Result<(), SynthError> {
    let n = y.len();
    if n <= 4 {
        // Conjunction staircase with promise wires as dirty helpers.
        for j in (0..n).rev() {
            let mut ctl = controls.to_vec();
            ctl.extend_from_slice(&y[..j]);
            emit_controlled_flip(sink, &ctl, y[j], &[], promise, j)?;
        }
        return Ok(());
    }
    let anc = promise[0];
    let pp_wires = &promise[1..];
    let low_len = n.div_ceil(2);
    let (low, high) = y.split_at(low_len);

    // Carry into the high half: controls and the whole low half, toggled
    // onto the first promise wire.
    let mut carry_ctl = controls.to_vec();
    carry_ctl.extend_from_slice(low);
    emit_controlled_flip(sink, &carry_ctl, anc, &[], high, 0)?;
    let mut pp = ScratchStack::new(pp_wires.to_vec());
    emit_gidney_increment(sink, Some(anc), high, &mut pp, low)?;
    emit_controlled_flip(sink, &carry_ctl, anc, &[], high, 0)?;

    if controls.is_empty() {
        let mut pp = ScratchStack::new(pp_wires.to_vec());
        emit_gidney_increment(sink, None, low, &mut pp, high)?;
    } else {
        emit_controlled_flip(sink, controls, anc, &[], high, 0)?;
        let mut pp = ScratchStack::new(pp_wires.to_vec());
        emit_gidney_increment(sink, Some(anc), low, &mut pp, high)?;
        emit_controlled_flip(sink, controls, anc, &[], high, 0)?;
    }
    Ok(())
}

/// k-controlled strong promise gate whose target unitary is the n-bit
/// incrementer, with a promise register of n-1 wires.
pub fn build_promise_incrementer_linear(
    controls: &[Qubit],
    y: &[Qubit],
    promise: &[Qubit],
    direction: Direction,
) -> Result<Circuit, SynthError> {
    let n = y.len();
    if n == 0 {
        return Err(precondition("increment needs a non-empty register"));
    }
    if promise.len() + 1 < n || promise.is_empty() {
        return Err(precondition(format!(
            "promise register must have n-1 = {} wires, got {}",
            n.saturating_sub(1),
            promise.len()
        )));
    }
    let mut gates = Vec::new();
    emit_promise_inc_linear(&mut gates, controls, y, promise)?;
    if direction == Direction::Decrement {
        gates.reverse();
    }
    let mut registers = RegisterMap::new();
    registers.push("c", Role::Control, controls.to_vec());
    registers.push("x", Role::Target, y.to_vec());
    registers.push("p", Role::Promise, promise.to_vec());
    let nq = controls
        .iter()
        .chain(y.iter())
        .chain(promise.iter())
        .map(|w| w.0 + 1)
        .max()
        .unwrap();
    Ok(Circuit::with_registers(nq, gates, registers)?)
}

/// Promise wires used by the sqrt-register promise incrementer on n bits.
pub fn lemma_sqrt_promise_need(n: usize) -> usize {
    if n <= 6 {
        return n.saturating_sub(1).max(1);
    }
    let w = (n as f64).sqrt().ceil() as usize;
    let q = n.div_ceil(w);
    (q - 1) + (w - 1).max(lemma_linear_promise_need(w))
}

pub(crate) fn emit_promise_inc_sqrt(
    sink: &mut Vec<Gate>,
    control: Qubit,
    y: &[Qubit],
    promise: &[Qubit],
) -> Result<(), SynthError> {
    let n = y.len();
    if n <= 6 {
        return emit_promise_inc_linear(sink, &[control], y, promise);
    }
    let w = (n as f64).sqrt().ceil() as usize;
    let q = n.div_ceil(w);
    let blocks: Vec<&[Qubit]> = (0..q).map(|j| &y[j * w..((j + 1) * w).min(n)]).collect();
    let flags = &promise[0..q - 1];
    let hsec = &promise[q - 1..];

    // Opening staircase: flags[j] = control AND blocks 0..=j all ones.
    // The chain wire threads the control conjunction forward, so only the
    // first step carries the control itself; with a clear control and a
    // zero promise register no flag ever fires, while junk flags off the
    // promise cancel against the enclosing adjoint pairing.
    let stair_steps: Vec<ChainStep> = (0..q - 1)
        .map(|j| {
            let mut extra = if j == 0 { vec![control] } else { Vec::new() };
            extra.extend_from_slice(blocks[j]);
            ChainStep {
                extra,
                target: flags[j],
            }
        })
        .collect();
    {
        let mut scratch = ScratchStack::new(hsec.to_vec());
        emit_chain_ladder_mode(sink, None, &stair_steps, &mut scratch, y, LADDER_BASE, true)?;
    }

    // Block increments in two rounds: odd blocks first, borrowing their
    // even predecessor X-conjugated; then the even blocks, whose odd
    // predecessors have already wrapped from all ones to all zeros
    // whenever the flag fired, so no conjugation is needed. Block zero
    // uses the real promise wires.
    // Flags already carry the control conjunction, so every block needs
    // just one control wire; distinct controls keep the blocks parallel.
    let mut emit_block = |sink: &mut Vec<Gate>, j: usize, conj: bool| -> Result<(), SynthError> {
        let ctl: Vec<Qubit> = if j == 0 {
            vec![control]
        } else {
            vec![flags[j - 1]]
        };
        let need = lemma_linear_promise_need(blocks[j].len()).max(blocks[j].len().saturating_sub(1)).max(1);
        let prom: Vec<Qubit> = if j == 0 {
            hsec[..need].to_vec()
        } else {
            blocks[j - 1][..need].to_vec()
        };
        if conj {
            for wq in &prom {
                sink.x(*wq);
            }
        }
        emit_promise_inc_linear(sink, &ctl, blocks[j], &prom)?;
        if conj {
            for wq in &prom {
                sink.x(*wq);
            }
        }
        Ok(())
    };
    for j in (1..q).step_by(2) {
        emit_block(sink, j, true)?;
    }
    emit_block(sink, 0, false)?;
    for j in (2..q).step_by(2) {
        emit_block(sink, j, false)?;
    }

    // Closing staircase on the incremented register: a fired block wrapped
    // to all zeros, so the same chain applies under X conjugation of the
    // block controls, in reverse order.
    let conj_wires: Vec<Qubit> = (0..q - 1).flat_map(|j| blocks[j].iter().copied()).collect();
    for wq in &conj_wires {
        sink.x(*wq);
    }
    {
        let mut tmp = Vec::new();
        let mut scratch = ScratchStack::new(hsec.to_vec());
        emit_chain_ladder_mode(&mut tmp, None, &stair_steps, &mut scratch, y, LADDER_BASE, true)?;
        tmp.reverse();
        sink.extend_from_slice(&tmp);
    }
    for wq in &conj_wires {
        sink.x(*wq);
    }
    Ok(())
}

/// Controlled strong promise gate whose target unitary is the n-bit
/// incrementer, with a promise register of order sqrt(n).
pub fn build_promise_incrementer_sqrt(
    control: Qubit,
    y: &[Qubit],
    promise: &[Qubit],
    direction: Direction,
) -> Result<Circuit, SynthError> {
    let n = y.len();
    if n == 0 {
        return Err(precondition("increment needs a non-empty register"));
    }
    if promise.len() < lemma_sqrt_promise_need(n) {
        return Err(precondition(format!(
            "promise register too small: need {}, have {}",
            lemma_sqrt_promise_need(n),
            promise.len()
        )));
    }
    let mut gates = Vec::new();
    emit_promise_inc_sqrt(&mut gates, control, y, promise)?;
    if direction == Direction::Decrement {
        gates.reverse();
    }
    let mut registers = RegisterMap::new();
    registers.push("c", Role::Control, vec![control]);
    registers.push("x", Role::Target, y.to_vec());
    registers.push("p", Role::Promise, promise.to_vec());
    let nq = y
        .iter()
        .chain(promise.iter())
        .chain([&control])
        .map(|w| w.0 + 1)
        .max()
        .unwrap();
    Ok(Circuit::with_registers(nq, gates, registers)?)
}

// ---------------------------------------------------------------------------
// Incrementer
// ---------------------------------------------------------------------------

pub(crate) fn emit_increment(sink: &mut Vec<Gate>, y: &[Qubit], g: Qubit) -> Result<(), SynthError> {
    let n = y.len();
    let naive = |sink: &mut Vec<Gate>| -> Result<(), SynthError> {
        for j in (0..n).rev() {
            emit_controlled_flip(sink, &y[..j], y[j], &[], &[g], j)?;
        }
        Ok(())
    };
    if n <= 6 {
        return naive(sink);
    }
    // Low split wide enough to host the promise register of the top part.
    let mut a = 2 * (n as f64).sqrt().ceil() as usize;
    while a + 2 <= n && a < lemma_sqrt_promise_need(n - a) {
        a += 1;
    }
    if a + 2 > n {
        return naive(sink);
    }
    let (low, high) = y.split_at(a);

    let mut cpi = Vec::new();
    emit_promise_inc_sqrt(&mut cpi, g, high, low)?;
    let conj = |sink: &mut Vec<Gate>| {
        for wq in low {
            sink.x(*wq);
        }
    };
    let fan = |sink: &mut Vec<Gate>| -> Result<(), SynthError> {
        let mut targets: Vec<Qubit> = high.to_vec();
        targets.push(g);
        emit_ctrl_fanout(sink, low, &targets, &[])
    };
    conj(sink);
    sink.extend_from_slice(&cpi);
    conj(sink);
    fan(sink)?;
    conj(sink);
    cpi.reverse();
    sink.extend_from_slice(&cpi);
    conj(sink);
    fan(sink)?;
    emit_increment(sink, low, high[0])
}

/// |x> -> |(x+1) mod 2^n> (or the decrement) using one dirty ancilla.
pub fn build_incrementer(
    y: &[Qubit],
    g: Qubit,
    direction: Direction,
) -> Result<Circuit, SynthError> {
    if y.is_empty() {
        return Err(precondition("increment needs a non-empty register"));
    }
    let mut gates = Vec::new();
    emit_increment(&mut gates, y, g)?;
    if direction == Direction::Decrement {
        gates.reverse();
    }
    let mut registers = RegisterMap::new();
    registers.push("x", Role::Data, y.to_vec());
    registers.push("g", Role::DirtyAncilla, vec![g]);
    let nq = y.iter().chain([&g]).map(|w| w.0 + 1).max().unwrap();
    Ok(Circuit::with_registers(nq, gates, registers)?)
}

pub(crate) fn emit_controlled_increment(
    sink: &mut Vec<Gate>,
    controls: &[Qubit],
    y: &[Qubit],
    g: Qubit,
) -> Result<(), SynthError> {
    if controls.is_empty() {
        return emit_increment(sink, y, g);
    }
    // The controls ride as the low block of a wider increment, undone by a
    // decrement on the controls alone (X-conjugated increment).
    let mut wide: Vec<Qubit> = controls.to_vec();
    wide.extend_from_slice(y);
    emit_increment(sink, &wide, g)?;
    for cq in controls {
        sink.x(*cq);
    }
    emit_increment(sink, controls, y[0])?;
    for cq in controls {
        sink.x(*cq);
    }
    Ok(())
}

/// k-controlled incrementer with one dirty ancilla.
pub fn build_controlled_incrementer(
    controls: &[Qubit],
    y: &[Qubit],
    g: Qubit,
    direction: Direction,
) -> Result<Circuit, SynthError> {
    if controls.is_empty() {
        return build_incrementer(y, g, direction);
    }
    if y.is_empty() {
        return Err(precondition("increment needs a non-empty register"));
    }
    let mut gates = Vec::new();
    emit_controlled_increment(&mut gates, controls, y, g)?;
    if direction == Direction::Decrement {
        gates.reverse();
    }
    let mut registers = RegisterMap::new();
    registers.push("c", Role::Control, controls.to_vec());
    registers.push("x", Role::Data, y.to_vec());
    registers.push("g", Role::DirtyAncilla, vec![g]);
    let nq = controls
        .iter()
        .chain(y.iter())
        .chain([&g])
        .map(|w| w.0 + 1)
        .max()
        .unwrap();
    Ok(Circuit::with_registers(nq, gates, registers)?)
}

// ---------------------------------------------------------------------------
// Classical-quantum adder
// ---------------------------------------------------------------------------

pub(crate) fn emit_cq_adder(
    sink: &mut Vec<Gate>,
    y: &[Qubit],
    g: Qubit,
    constant: u64,
) -> Result<(), SynthError> {
    let n = y.len();
    let c = constant & mask_bits(n);
    if c == 0 {
        return Ok(());
    }
    if n <= 4 {
        // One shifted increment per set bit; the additions commute.
        for j in (0..n).rev() {
            if bit(c, j) {
                for t in (j..n).rev() {
                    emit_controlled_flip(sink, &y[j..t], y[t], &[], &[g], t)?;
                }
            }
        }
        return Ok(());
    }
    let h = n.div_ceil(2);
    let (low, high) = y.split_at(h);
    let cl = c & mask_bits(h);
    let ch = if h >= 64 { 0 } else { c >> h };
    if cl > 0 {
        // The carry of low + c_l is the comparison low >= 2^h - c_l; it is
        // folded into the high half through the borrowed-complement dance,
        // which works for every initial value of g.
        let mut cinc = Vec::new();
        emit_controlled_increment(&mut cinc, &[g], high, low[0])?;
        let mut cmp = Vec::new();
        emit_cq_comparator(&mut cmp, &[], low, g, high[0], mask_bits(h) - cl)?;
        sink.extend_from_slice(&cinc);
        emit_fanout1(sink, g, high);
        sink.extend_from_slice(&cmp);
        sink.extend_from_slice(&cinc);
        sink.extend_from_slice(&cmp);
        emit_fanout1(sink, g, high);
    }
    emit_cq_adder(sink, low, high[0], cl)?;
    emit_cq_adder(sink, high, low[0], ch)?;
    Ok(())
}

/// |x> -> |(x + c) mod 2^n> with one dirty ancilla.
pub fn build_cq_adder(y: &[Qubit], g: Qubit, constant: u64) -> Result<Circuit, SynthError> {
    let n = y.len();
    if n == 0 {
        return Err(precondition("addition needs a non-empty register"));
    }
    if n < 64 && constant >> n != 0 {
        return Err(precondition("constant out of range"));
    }
    let mut gates = Vec::new();
    emit_cq_adder(&mut gates, y, g, constant)?;
    let mut registers = RegisterMap::new();
    registers.push("x", Role::Data, y.to_vec());
    registers.push("g", Role::DirtyAncilla, vec![g]);
    let nq = y.iter().chain([&g]).map(|w| w.0 + 1).max().unwrap();
    Ok(Circuit::with_registers(nq, gates, registers)?)
}

pub(crate) fn emit_controlled_cq_adder(
    sink: &mut Vec<Gate>,
    controls: &[Qubit],
    y: &[Qubit],
    g: Qubit,
    constant: u64,
) -> Result<(), SynthError> {
    let n = y.len();
    let c = constant & mask_bits(n);
    if c == 0 {
        return Ok(());
    }
    if controls.is_empty() {
        return emit_cq_adder(sink, y, g, c);
    }
    // Halve the constant: +c' and -c' around controlled complements give
    // the controlled +2c'; an odd constant finishes with one controlled
    // increment.
    let half = c >> 1;
    let r = c & 1;
    if half > 0 {
        let mut plus = Vec::new();
        emit_cq_adder(&mut plus, y, g, half)?;
        sink.extend_from_slice(&plus);
        emit_ctrl_fanout(sink, controls, y, &[g])?;
        for wq in y {
            sink.x(*wq);
        }
        sink.extend_from_slice(&plus);
        for wq in y {
            sink.x(*wq);
        }
        emit_ctrl_fanout(sink, controls, y, &[g])?;
    }
    if r == 1 {
        emit_controlled_increment(sink, controls, y, g)?;
    }
    Ok(())
}

/// k-controlled classical-quantum adder with one dirty ancilla.
pub fn build_controlled_cq_adder(
    controls: &[Qubit],
    y: &[Qubit],
    g: Qubit,
    constant: u64,
) -> Result<Circuit, SynthError> {
    let n = y.len();
    if n == 0 {
        return Err(precondition("addition needs a non-empty register"));
    }
    if n < 64 && constant >> n != 0 {
        return Err(precondition("constant out of range"));
    }
    let mut gates = Vec::new();
    emit_controlled_cq_adder(&mut gates, controls, y, g, constant)?;
    let mut registers = RegisterMap::new();
    registers.push("c", Role::Control, controls.to_vec());
    registers.push("x", Role::Data, y.to_vec());
    registers.push("g", Role::DirtyAncilla, vec![g]);
    let nq = controls
        .iter()
        .chain(y.iter())
        .chain([&g])
        .map(|w| w.0 + 1)
        .max()
        .unwrap();
    Ok(Circuit::with_registers(nq, gates, registers)?)
}

// ---------------------------------------------------------------------------
// Modular adder
// ---------------------------------------------------------------------------

/// |b> -> |(a + b) mod N> for b < N, with a clean comparison flag returned
/// to zero and one dirty ancilla. Behavior on b >= N is unspecified and
/// excluded from verification.
pub fn build_modular_adder(
    controls: &[Qubit],
    b: &[Qubit],
    flag: Qubit,
    g: Qubit,
    spec: &ModularAdderSpec,
) -> Result<Circuit, SynthError> {
    let n = b.len();
    if n == 0 || spec.modulus == 0 || spec.modulus >= (1u64 << n) || spec.a >= spec.modulus {
        return Err(precondition("modular adder needs a < N < 2^n"));
    }
    let mask = (1u64 << n) - 1;
    let mut gates = Vec::new();
    if spec.a != 0 {
        // flag = AND(controls) AND (b < N - a): no overflow.
        emit_controlled_flip(&mut gates, controls, flag, &[], b, 0)?;
        emit_cq_comparator(&mut gates, controls, b, flag, g, spec.modulus - spec.a - 1)?;
        // Add a under the flag; add a - N under its complement.
        let mut with_flag = controls.to_vec();
        with_flag.push(flag);
        emit_controlled_cq_adder(&mut gates, &with_flag, b, g, spec.a)?;
        emit_controlled_flip(&mut gates, controls, flag, &[], b, 0)?;
        emit_controlled_cq_adder(
            &mut gates,
            &with_flag,
            b,
            g,
            (spec.a + (1u64 << n) - spec.modulus) & mask,
        )?;
        emit_controlled_flip(&mut gates, controls, flag, &[], b, 0)?;
        // Uncompute the flag: (a + b) mod N >= a  iff  a - 1 < b'.
        emit_cq_comparator(&mut gates, controls, b, flag, g, spec.a - 1)?;
    }
    let mut registers = RegisterMap::new();
    registers.push("c", Role::Control, controls.to_vec());
    registers.push("b", Role::Data, b.to_vec());
    registers.push("flag", Role::CleanAncilla, vec![flag]);
    registers.push("g", Role::DirtyAncilla, vec![g]);
    let nq = controls
        .iter()
        .chain(b.iter())
        .chain([&flag, &g])
        .map(|w| w.0 + 1)
        .max()
        .unwrap();
    Ok(Circuit::with_registers(nq, gates, registers)?)
}
