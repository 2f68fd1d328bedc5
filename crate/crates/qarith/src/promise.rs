//! Promise-gate machinery: toggle-detection identities, conditionally
//! clean control registers, parallel control addition, the trade of clean
//! ancillas for control qubits, and its application to the controlled
//! ripple-carry adder.
//!
//! Conventions: a gate block and its adjoint are emitted as exact circuit
//! reversals of one another, so off-promise behavior cancels identically
//! wherever an identity pairs a block with its adjoint.

use crate::ancilla::AncillaLedger;
use crate::circuit::{Circuit, Gate, Qubit, RegisterMap, ResourceReport, Role, Sink};
use crate::primitives::{
    emit_c3x, emit_controlled_flip, emit_ctrl_fanout, emit_fanout1, emit_ladder1, emit_ladder2,
    emit_mcx, ladder2_scratch_need, pick_dirty, precondition, ScratchStack, SynthError,
};
use std::sync::Arc;

// ---------------------------------------------------------------------------
// Gate templates
// ---------------------------------------------------------------------------

/// Wires a template instantiation acts on.
pub struct TemplateCtx<'a> {
    /// Target register of the template.
    pub targets: &'a [Qubit],
    /// Clean (or promise) ancillas; `clean_needed` of them.
    pub clean: &'a [Qubit],
    /// Wires usable as dirty helpers during the build.
    pub dirty_pool: &'a [Qubit],
}

type TemplateFn = Arc<dyn Fn(&TemplateCtx, &mut Vec<Gate>) -> Result<(), SynthError> + Send + Sync>;

/// A buildable sub-unitary carrying its own adjoint builder, so pairings
/// like increment/decrement stay exact at the gate-list level.
#[derive(Clone)]
pub struct GateTemplate {
    pub target_count: usize,
    pub clean_needed: usize,
    pub involutory: bool,
    build: TemplateFn,
    adjoint: Option<TemplateFn>,
}

impl GateTemplate {
    pub fn new(
        target_count: usize,
        clean_needed: usize,
        involutory: bool,
        build: impl Fn(&TemplateCtx, &mut Vec<Gate>) -> Result<(), SynthError> + Send + Sync + 'static,
    ) -> Self {
        GateTemplate {
            target_count,
            clean_needed,
            involutory,
            build: Arc::new(build),
            adjoint: None,
        }
    }

    pub fn with_adjoint(
        mut self,
        adjoint: impl Fn(&TemplateCtx, &mut Vec<Gate>) -> Result<(), SynthError> + Send + Sync + 'static,
    ) -> Self {
        self.adjoint = Some(Arc::new(adjoint));
        self
    }

    pub fn has_adjoint(&self) -> bool {
        self.adjoint.is_some()
    }

    pub fn build(&self, ctx: &TemplateCtx, sink: &mut Vec<Gate>) -> Result<(), SynthError> {
        (self.build)(ctx, sink)
    }

    /// Default adjoint: exact reversal of the forward emission.
    pub fn build_adjoint(&self, ctx: &TemplateCtx, sink: &mut Vec<Gate>) -> Result<(), SynthError> {
        match &self.adjoint {
            Some(f) => f(ctx, sink),
            None => {
                let mut tmp = Vec::new();
                (self.build)(ctx, &mut tmp)?;
                tmp.reverse();
                sink.extend_from_slice(&tmp);
                Ok(())
            }
        }
    }

    /// X on the single target.
    pub fn x() -> Self {
        GateTemplate::new(1, 0, true, |ctx, sink| {
            sink.x(ctx.targets[0]);
            Ok(())
        })
    }

    /// Sequential increment over the targets, paired with the matching
    /// decrement as its adjoint.
    pub fn increment(n: usize) -> Self {
        GateTemplate::new(n, 0, n == 1, move |ctx, sink| {
            emit_naive_increment(sink, ctx.targets, ctx.dirty_pool)
        })
        .with_adjoint(move |ctx, sink| {
            let mut tmp = Vec::new();
            emit_naive_increment(&mut tmp, ctx.targets, ctx.dirty_pool)?;
            tmp.reverse();
            sink.extend_from_slice(&tmp);
            Ok(())
        })
    }
}

/// Naive increment: flip bit j iff all lower bits are set, top down so
/// every conjunction reads original values.
pub(crate) fn emit_naive_increment(
    sink: &mut Vec<Gate>,
    targets: &[Qubit],
    dirty_pool: &[Qubit],
) -> Result<(), SynthError> {
    for j in (0..targets.len()).rev() {
        emit_controlled_flip(sink, &targets[..j], targets[j], &[], dirty_pool, j)?;
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Controlled layers (parallel control addition)
// ---------------------------------------------------------------------------

/// A self-inverse sub-circuit within a layer of pairwise disjoint elements.
#[derive(Clone, Debug)]
pub struct LayerElement {
    pub gates: Vec<Gate>,
}

impl LayerElement {
    pub fn gate(g: Gate) -> Self {
        LayerElement { gates: vec![g] }
    }

    pub fn support(&self) -> Vec<Qubit> {
        let mut s: Vec<Qubit> = self.gates.iter().flat_map(|g| g.qubits()).collect();
        s.sort();
        s.dedup();
        s
    }
}

/// Adds a single control to every gate of an element; C3X instances pick
/// their decomposition helper from `pool`.
pub(crate) fn emit_controlled_element(
    sink: &mut Vec<Gate>,
    ctl: Qubit,
    gates: &[Gate],
    pool: &[Qubit],
    salt: usize,
) -> Result<(), SynthError> {
    for (i, g) in gates.iter().enumerate() {
        match *g {
            Gate::X { target } => sink.cx(ctl, target),
            Gate::Cx { control, target } => sink.ccx(ctl, control, target),
            Gate::Ccx { controls, target } => {
                let avoid = [ctl, controls[0], controls[1], target];
                let dirty = pick_dirty(pool, &avoid, salt + i)
                    .ok_or(SynthError::NeedDirty { k: 3 })?;
                emit_c3x(sink, [ctl, controls[0], controls[1]], target, dirty);
            }
        }
    }
    Ok(())
}

fn wires_of(elements: &[LayerElement]) -> Vec<Qubit> {
    let mut out: Vec<Qubit> = elements.iter().flat_map(|e| e.support()).collect();
    out.sort();
    out.dedup();
    out
}

/// C^k of a tensor product of disjoint self-inverse elements, without
/// ancilla qubits.
///
/// The layer splits into halves balanced by qubit count; the wires acted
/// on by one half serve as dirty control copies for the other. A layer of
/// one element falls back to toggle detection through a `fallback_pool`
/// wire.
pub fn add_controls_parallel(
    controls: &[Qubit],
    layer: &[LayerElement],
    fallback_pool: &[Qubit],
) -> Result<Circuit, SynthError> {
    let mut seen: Vec<Qubit> = Vec::new();
    for e in layer {
        for w in e.support() {
            if seen.contains(&w) {
                return Err(precondition(format!("layer elements overlap at {}", w)));
            }
            seen.push(w);
        }
    }
    let mut gates = Vec::new();
    emit_controlled_layer(&mut gates, controls, layer, fallback_pool)?;
    let mut registers = RegisterMap::new();
    registers.push("c", Role::Control, controls.to_vec());
    registers.push("x", Role::Data, seen.clone());
    let mut covered: Vec<Qubit> = controls.to_vec();
    covered.extend(seen);
    let n = gates
        .iter()
        .flat_map(|g| g.qubits())
        .chain(covered.iter().copied())
        .map(|w| w.0 + 1)
        .max()
        .unwrap_or(0);
    let extra: Vec<Qubit> = (0..n).map(Qubit).filter(|w| !covered.contains(w)).collect();
    registers.push("g", Role::DirtyAncilla, extra);
    Ok(Circuit::with_registers(n, gates, registers)?)
}

pub(crate) fn emit_controlled_layer(
    sink: &mut Vec<Gate>,
    controls: &[Qubit],
    layer: &[LayerElement],
    fallback_pool: &[Qubit],
) -> Result<(), SynthError> {
    if layer.is_empty() {
        return Ok(());
    }
    if controls.is_empty() {
        for e in layer {
            sink.extend_from_slice(&e.gates);
        }
        return Ok(());
    }
    if layer.len() == 1 {
        return emit_single_element(sink, controls, &layer[0], fallback_pool);
    }

    // Balance halves by qubit count so each side can lend enough wires.
    let mut order: Vec<usize> = (0..layer.len()).collect();
    order.sort_by_key(|&i| std::cmp::Reverse(layer[i].support().len()));
    let (mut left, mut right): (Vec<usize>, Vec<usize>) = (Vec::new(), Vec::new());
    let (mut lq, mut rq) = (0usize, 0usize);
    for i in order {
        let w = layer[i].support().len();
        if lq <= rq {
            left.push(i);
            lq += w;
        } else {
            right.push(i);
            rq += w;
        }
    }
    let pick = |ids: &[usize]| -> Vec<LayerElement> { ids.iter().map(|&i| layer[i].clone()).collect() };
    for (mine, other) in [(pick(&left), pick(&right)), (pick(&right), pick(&left))] {
        let pool = wires_of(&other);
        if controls.len() == 1 {
            emit_half_single_control(sink, controls[0], &mine, &pool, controls)?;
        } else {
            // Two C^kX toggles onto a wire from the other half, each
            // followed by the singly controlled half; one spare control
            // copy may come from the control register itself.
            let psi = pool
                .first()
                .copied()
                .ok_or_else(|| precondition("parallel control addition needs a second half"))?;
            let mut inner_pool: Vec<Qubit> = pool[1..].to_vec();
            inner_pool.extend_from_slice(controls);
            for _ in 0..2 {
                let mcx_dirty = wires_of(&mine);
                emit_controlled_flip(sink, controls, psi, &[], &mcx_dirty, 0)?;
                emit_half_single_control(sink, psi, &mine, &inner_pool, controls)?;
            }
        }
    }
    Ok(())
}

/// One half under a single control: fan the control onto dirty copies from
/// `pool`, apply each element under its copy, restore the copies, and
/// repeat the copied elements so the borrowed dirt cancels.
fn emit_half_single_control(
    sink: &mut Vec<Gate>,
    ctl: Qubit,
    mine: &[LayerElement],
    pool: &[Qubit],
    avoid: &[Qubit],
) -> Result<(), SynthError> {
    if mine.len() == 1 {
        let mut full: Vec<Qubit> = pool.to_vec();
        full.extend_from_slice(avoid);
        return emit_single_element(sink, &[ctl], &mine[0], &full);
    }
    let copies: Vec<Qubit> = pool
        .iter()
        .copied()
        .filter(|w| *w != ctl && !avoid.contains(w))
        .take(mine.len() - 1)
        .collect();
    if copies.len() < mine.len() - 1 {
        return Err(precondition("not enough borrowable wires for control copies"));
    }
    let helper_pool: Vec<Qubit> = pool.iter().copied().filter(|w| !copies.contains(w)).collect();
    emit_fanout1(sink, ctl, &copies);
    emit_controlled_element(sink, ctl, &mine[0].gates, &helper_pool, 0)?;
    for (j, e) in mine[1..].iter().enumerate() {
        emit_controlled_element(sink, copies[j], &e.gates, &helper_pool, j)?;
    }
    emit_fanout1(sink, ctl, &copies);
    for (j, e) in mine[1..].iter().enumerate() {
        emit_controlled_element(sink, copies[j], &e.gates, &helper_pool, j)?;
    }
    Ok(())
}

/// Toggle-detected control of one self-inverse element through a borrowed
/// dirty wire: it fires the element once when all controls are set and
/// zero or two (cancelling) times otherwise.
fn emit_single_element(
    sink: &mut Vec<Gate>,
    controls: &[Qubit],
    element: &LayerElement,
    pool: &[Qubit],
) -> Result<(), SynthError> {
    let support = element.support();
    let mut avoid = support.clone();
    avoid.extend_from_slice(controls);
    let psi = pick_dirty(pool, &avoid, 0)
        .ok_or_else(|| precondition("toggle detection needs one borrowable dirty wire"))?;
    let elem_pool: Vec<Qubit> = pool.iter().copied().filter(|w| *w != psi).collect();
    for _ in 0..2 {
        emit_controlled_flip(sink, controls, psi, &[], &support, 0)?;
        emit_controlled_element(sink, psi, &element.gates, &elem_pool, 0)?;
    }
    Ok(())
}

/// Adds one control to an arbitrary gate list by slicing it into disjoint
/// layers (greedy ASAP) and controlling each layer in parallel.
pub(crate) fn emit_controlled_circuit(
    sink: &mut Vec<Gate>,
    ctl: Qubit,
    gates: &[Gate],
    pool: &[Qubit],
) -> Result<(), SynthError> {
    let num = gates
        .iter()
        .flat_map(|g| g.qubits())
        .map(|w| w.0 + 1)
        .max()
        .unwrap_or(0)
        .max(ctl.0 + 1);
    let mut frontier = vec![0u64; num as usize];
    let mut layers: Vec<Vec<Gate>> = Vec::new();
    for g in gates {
        let layer = 1 + g.qubits().map(|w| frontier[w.index()]).max().unwrap_or(0);
        for w in g.qubits() {
            frontier[w.index()] = layer;
        }
        let idx = layer as usize - 1;
        if layers.len() <= idx {
            layers.resize(idx + 1, Vec::new());
        }
        layers[idx].push(*g);
    }
    for layer in layers {
        let elements: Vec<LayerElement> = layer.into_iter().map(LayerElement::gate).collect();
        emit_controlled_layer(sink, &[ctl], &elements, pool)?;
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Toggle detection and conditionally clean controls
// ---------------------------------------------------------------------------

fn assemble(
    gates: Vec<Gate>,
    controls: &[Qubit],
    targets: &[Qubit],
    anc: &[Qubit],
    anc_role: Role,
) -> Result<Circuit, SynthError> {
    let mut registers = RegisterMap::new();
    registers.push("c", Role::Control, controls.to_vec());
    registers.push("t", Role::Target, targets.to_vec());
    registers.push("anc", anc_role, anc.to_vec());
    let mut covered: Vec<Qubit> = controls.to_vec();
    covered.extend_from_slice(targets);
    covered.extend_from_slice(anc);
    let n = gates
        .iter()
        .flat_map(|g| g.qubits())
        .chain(covered.iter().copied())
        .map(|w| w.0 + 1)
        .max()
        .unwrap_or(0);
    let rest: Vec<Qubit> = (0..n).map(Qubit).filter(|w| !covered.contains(w)).collect();
    registers.push("g", Role::DirtyAncilla, rest);
    Ok(Circuit::with_registers(n, gates, registers)?)
}

/// C^k(U) through a clean toggle ancilla: two multi-controlled X around a
/// singly controlled inner gate; the ancilla returns to zero on every
/// input.
pub fn build_toggle_detect_clean(
    controls: &[Qubit],
    inner: &GateTemplate,
    ctx: &TemplateCtx,
    ledger: &mut AncillaLedger,
) -> Result<Circuit, SynthError> {
    let anc = ledger.borrow_clean(1)?;
    let a = anc[0];
    let mut gates = Vec::new();
    let mut inner_gates = Vec::new();
    inner.build(ctx, &mut inner_gates)?;
    emit_controlled_flip(&mut gates, controls, a, &[], ctx.targets, 0)?;
    let mut pool: Vec<Qubit> = controls.to_vec();
    pool.extend_from_slice(ctx.dirty_pool);
    emit_controlled_circuit(&mut gates, a, &inner_gates, &pool)?;
    emit_controlled_flip(&mut gates, controls, a, &[], ctx.targets, 0)?;
    let c = assemble(gates, controls, ctx.targets, &anc, Role::CleanAncilla)?;
    ledger.release(&anc)?;
    Ok(c)
}

/// C^k(U) through a dirty toggle ancilla. The inner gate must either be
/// self-inverse (two firings cancel) or form an X-conjugation pair with
/// its adjoint, the increment/decrement pattern.
pub fn build_toggle_detect_dirty(
    controls: &[Qubit],
    inner: &GateTemplate,
    ctx: &TemplateCtx,
    ledger: &mut AncillaLedger,
) -> Result<Circuit, SynthError> {
    if !inner.involutory && !inner.has_adjoint() {
        return Err(precondition(
            "inner gate is neither involutory nor adjoint-paired",
        ));
    }
    let mut exclude: Vec<Qubit> = controls.to_vec();
    exclude.extend_from_slice(ctx.targets);
    exclude.extend_from_slice(ctx.clean);
    exclude.extend_from_slice(ctx.dirty_pool);
    let anc = ledger.borrow_dirty(1, &exclude)?;
    let psi = anc[0];
    let mut gates = Vec::new();
    let mut pool: Vec<Qubit> = controls.to_vec();
    pool.extend_from_slice(ctx.dirty_pool);

    if inner.involutory {
        let mut inner_gates = Vec::new();
        inner.build(ctx, &mut inner_gates)?;
        for _ in 0..2 {
            emit_controlled_flip(&mut gates, controls, psi, &[], ctx.targets, 0)?;
            emit_controlled_circuit(&mut gates, psi, &inner_gates, &pool)?;
        }
    } else {
        // Increment-style pairing: X-conjugating the adjoint across the
        // target register gives back the forward gate, so a controlled
        // fan-out over targets and the toggle wire makes the pair compose
        // to exactly one forward application for every ancilla value.
        let mut fwd = Vec::new();
        inner.build(ctx, &mut fwd)?;
        let mut adj = Vec::new();
        inner.build_adjoint(ctx, &mut adj)?;
        let mut fan_targets: Vec<Qubit> = ctx.targets.to_vec();
        fan_targets.push(psi);
        emit_controlled_circuit(&mut gates, psi, &fwd, &pool)?;
        emit_ctrl_fanout(&mut gates, controls, &fan_targets, &pool)?;
        emit_controlled_circuit(&mut gates, psi, &adj, &pool)?;
        emit_ctrl_fanout(&mut gates, controls, &fan_targets, &pool)?;
    }
    let c = assemble(gates, controls, ctx.targets, &anc, Role::DirtyAncilla)?;
    ledger.release(&anc)?;
    Ok(c)
}

/// C^k(U) with the X-conjugated control register serving as the inner
/// gate's promise register (its conditionally clean ancillas).
///
/// With a clean toggle ancilla the inner block runs once; with a dirty one
/// the block and its exact reversal sandwich the second toggle, which
/// requires a self-inverse inner gate and strong-promise builds.
pub fn build_conditionally_clean(
    controls: &[Qubit],
    inner: &GateTemplate,
    targets: &[Qubit],
    dirty_pool: &[Qubit],
    ledger: &mut AncillaLedger,
    dirty: bool,
) -> Result<Circuit, SynthError> {
    if inner.clean_needed > controls.len() {
        return Err(precondition(format!(
            "inner promise size {} exceeds control count {}",
            inner.clean_needed,
            controls.len()
        )));
    }
    if dirty && !inner.involutory {
        return Err(precondition("the dirty variant needs a self-inverse inner gate"));
    }
    let ctx = TemplateCtx {
        targets,
        clean: &controls[..inner.clean_needed],
        dirty_pool,
    };
    let mut inner_gates = Vec::new();
    inner.build(&ctx, &mut inner_gates)?;
    let mut pool: Vec<Qubit> = dirty_pool.to_vec();
    pool.extend_from_slice(controls);

    let mut gates = Vec::new();
    let anc;
    let role;
    if !dirty {
        anc = ledger.borrow_clean(1)?;
        role = Role::CleanAncilla;
        let a = anc[0];
        emit_controlled_flip(&mut gates, controls, a, &[], targets, 0)?;
        for cq in controls {
            gates.x(*cq);
        }
        emit_controlled_circuit(&mut gates, a, &inner_gates, &pool)?;
        for cq in controls {
            gates.x(*cq);
        }
        emit_controlled_flip(&mut gates, controls, a, &[], targets, 0)?;
    } else {
        let mut exclude = controls.to_vec();
        exclude.extend_from_slice(targets);
        exclude.extend_from_slice(dirty_pool);
        anc = ledger.borrow_dirty(1, &exclude)?;
        role = Role::DirtyAncilla;
        let a = anc[0];
        let mut block = Vec::new();
        for cq in controls {
            block.x(*cq);
        }
        emit_controlled_circuit(&mut block, a, &inner_gates, &pool)?;
        for cq in controls {
            block.x(*cq);
        }
        let mut block_rev = block.clone();
        block_rev.reverse();
        for half in [block, block_rev] {
            emit_controlled_flip(&mut gates, controls, a, &[], targets, 0)?;
            gates.extend_from_slice(&half);
        }
    }
    let c = assemble(gates, controls, targets, &anc, role)?;
    ledger.release(&anc)?;
    Ok(c)
}

// ---------------------------------------------------------------------------
// Trading ancillas for controls
// ---------------------------------------------------------------------------

/// Outcome of [`trade_ancillas_for_controls`].
pub struct TradeResult {
    pub circuit: Circuit,
    pub report: ResourceReport,
    pub k: usize,
    pub clean_used: usize,
    pub dirty_used: usize,
}

/// Implements C^k(V-adjoint U V) by toggle-detecting the controls onto one
/// ancilla, replacing k of the m clean ancillas with the X-conjugated
/// control register, and adding the single toggle control to U layer by
/// layer. Clean usage stays within max(1, m - k + 1).
#[allow(clippy::too_many_arguments)]
pub fn trade_ancillas_for_controls(
    controls: &[Qubit],
    v: &GateTemplate,
    u: &GateTemplate,
    m: usize,
    targets: &[Qubit],
    dirty_pool: &[Qubit],
    ledger: &mut AncillaLedger,
    dirty: bool,
) -> Result<TradeResult, SynthError> {
    if v.clean_needed > m || u.clean_needed > m {
        return Err(precondition("templates need more clean ancillas than m"));
    }
    if dirty && !u.involutory {
        return Err(precondition("the dirty trade needs a self-inverse U"));
    }
    let k = controls.len();
    let substituted = m.min(k);
    let from_ledger = m - substituted;
    let ledger_clean = ledger.borrow_clean(from_ledger)?;
    let mut clean_wires: Vec<Qubit> = controls[..substituted].to_vec();
    clean_wires.extend(ledger_clean.iter().copied());

    let ctx = TemplateCtx {
        targets,
        clean: &clean_wires[..],
        dirty_pool,
    };
    let mut gates = Vec::new();
    let mut clean_used = from_ledger;
    let mut dirty_used = 0;

    if k == 0 {
        let mark = gates.len();
        v.build(&ctx, &mut gates)?;
        let v_gates: Vec<Gate> = gates[mark..].to_vec();
        u.build(&ctx, &mut gates)?;
        let mut v_rev = v_gates;
        v_rev.reverse();
        gates.extend_from_slice(&v_rev);
    } else {
        let mut u_gates = Vec::new();
        u.build(&ctx, &mut u_gates)?;
        let mut pool: Vec<Qubit> = dirty_pool.to_vec();
        pool.extend_from_slice(controls);

        let mut emit_block = |gates: &mut Vec<Gate>, a: Qubit| -> Result<Vec<Gate>, SynthError> {
            let mark = gates.len();
            for cq in controls {
                gates.x(*cq);
            }
            let vmark = gates.len();
            v.build(&ctx, gates)?;
            let v_gates: Vec<Gate> = gates[vmark..].to_vec();
            emit_controlled_circuit(gates, a, &u_gates, &pool)?;
            let mut v_rev = v_gates;
            v_rev.reverse();
            gates.extend_from_slice(&v_rev);
            for cq in controls {
                gates.x(*cq);
            }
            Ok(gates[mark..].to_vec())
        };

        if !dirty {
            let anc = ledger.borrow_clean(1)?;
            clean_used += 1;
            let a = anc[0];
            emit_controlled_flip(&mut gates, controls, a, &[], targets, 0)?;
            emit_block(&mut gates, a)?;
            emit_controlled_flip(&mut gates, controls, a, &[], targets, 0)?;
            ledger.release(&anc)?;
        } else {
            let mut exclude = controls.to_vec();
            exclude.extend_from_slice(targets);
            exclude.extend_from_slice(&clean_wires);
            exclude.extend_from_slice(dirty_pool);
            let anc = ledger.borrow_dirty(1, &exclude)?;
            dirty_used += 1;
            let a = anc[0];
            emit_controlled_flip(&mut gates, controls, a, &[], targets, 0)?;
            let block = emit_block(&mut gates, a)?;
            emit_controlled_flip(&mut gates, controls, a, &[], targets, 0)?;
            let mut rev = block;
            rev.reverse();
            gates.extend_from_slice(&rev);
            ledger.release(&anc)?;
        }
    }
    ledger.release(&ledger_clean)?;

    let mut registers = RegisterMap::new();
    registers.push("c", Role::Control, controls.to_vec());
    registers.push("t", Role::Target, targets.to_vec());
    registers.push("a", Role::CleanAncilla, ledger_clean.clone());
    let mut covered: Vec<Qubit> = controls.to_vec();
    covered.extend_from_slice(targets);
    covered.extend(ledger_clean.iter().copied());
    let n = gates
        .iter()
        .flat_map(|g| g.qubits())
        .chain(covered.iter().copied())
        .map(|w| w.0 + 1)
        .max()
        .unwrap_or(0);
    let rest: Vec<Qubit> = (0..n).map(Qubit).filter(|w| !covered.contains(w)).collect();
    registers.push("g", Role::DirtyAncilla, rest);
    let circuit = Circuit::with_registers(n, gates, registers)?;
    let report = circuit.resource_report();

    Ok(TradeResult {
        circuit,
        report,
        k,
        clean_used,
        dirty_used,
    })
}

// ---------------------------------------------------------------------------
// Ripple-carry adder (plain and controlled)
// ---------------------------------------------------------------------------

/// Gate lists of the ripple-carry adder slices over n-bit registers (n >= 2).
struct AdderSlices {
    u1a: Vec<Gate>,
    u2: Vec<Gate>,
    u3_wires: Vec<Qubit>,
    u4_fan: Vec<Gate>,
    u4_cx: Vec<Gate>,
    u4_x: Vec<Gate>,
    u6: Vec<Gate>,
    u8: Vec<Gate>,
}

fn adder_slices(a: &[Qubit], b: &[Qubit], z: Qubit) -> AdderSlices {
    let n = a.len();
    let mut u1a = Vec::new();
    for i in 1..n {
        u1a.cx(a[i], b[i]);
    }
    let mut u2 = Vec::new();
    emit_ladder1(&mut u2, &a[1..], false);
    let mut u3_wires = Vec::new();
    for i in 0..n - 1 {
        u3_wires.push(a[i]);
        u3_wires.push(b[i]);
    }
    u3_wires.push(a[n - 1]);
    let u4_fan = vec![Gate::ccx(a[n - 1], b[n - 1], z)];
    let mut u4_cx = Vec::new();
    for i in 1..n {
        u4_cx.cx(a[i], b[i]);
    }
    let mut u4_x = Vec::new();
    for i in 1..n - 1 {
        u4_x.x(b[i]);
    }
    let u6 = u4_x.clone();
    let mut u8 = Vec::new();
    for i in 0..n {
        u8.cx(a[i], b[i]);
    }
    AdderSlices {
        u1a,
        u2,
        u3_wires,
        u4_fan,
        u4_cx,
        u4_x,
        u6,
        u8,
    }
}

/// In-place quantum-quantum addition:
/// |a>|b>|z> -> |a>|a+b mod 2^n>|z ^ carry>, ancilla-free with the carry
/// ladder at its natural sequential depth.
pub fn build_qq_adder(a: &[Qubit], b: &[Qubit], z: Qubit) -> Result<Circuit, SynthError> {
    if a.len() != b.len() || a.is_empty() {
        return Err(precondition("addition needs equal non-empty registers"));
    }
    let n = a.len();
    let mut gates = Vec::new();
    if n == 1 {
        gates.ccx(a[0], b[0], z);
        gates.cx(a[0], b[0]);
    } else {
        let s = adder_slices(a, b, z);
        gates.extend_from_slice(&s.u1a);
        gates.cx(a[n - 1], z);
        gates.extend_from_slice(&s.u2);
        let mut u3 = Vec::new();
        for i in 0..n - 1 {
            u3.ccx(s.u3_wires[2 * i], s.u3_wires[2 * i + 1], s.u3_wires[2 * i + 2]);
        }
        gates.extend_from_slice(&u3);
        gates.extend_from_slice(&s.u4_fan);
        gates.extend_from_slice(&s.u4_cx);
        gates.extend_from_slice(&s.u4_x);
        let mut u5 = u3;
        u5.reverse();
        gates.extend_from_slice(&u5);
        gates.extend_from_slice(&s.u6);
        let mut u7 = s.u2.clone();
        u7.reverse();
        gates.extend_from_slice(&u7);
        gates.extend_from_slice(&s.u8);
    }
    let mut registers = RegisterMap::new();
    registers.push("a", Role::Data, a.to_vec());
    registers.push("b", Role::Data, b.to_vec());
    registers.push("z", Role::Target, vec![z]);
    let n_q = a
        .iter()
        .chain(b.iter())
        .chain([&z])
        .map(|w| w.0 + 1)
        .max()
        .unwrap();
    Ok(Circuit::with_registers(n_q, gates, registers)?)
}

/// k-controlled quantum-quantum adder.
///
/// Only the outermost slices take the controls directly; the carry core is
/// wrapped in the ancilla/control trade with k of the ladder scratch wires
/// replaced by the X-conjugated control register. Returns the circuit and
/// the number of clean ancillas consumed, which stays within
/// max(1, n - k + 1).
pub fn build_controlled_qq_adder(
    controls: &[Qubit],
    a: &[Qubit],
    b: &[Qubit],
    z: Qubit,
    ledger: &mut AncillaLedger,
) -> Result<(Circuit, usize), SynthError> {
    if a.len() != b.len() || a.is_empty() {
        return Err(precondition("addition needs equal non-empty registers"));
    }
    if controls.is_empty() {
        return Ok((build_qq_adder(a, b, z)?, 0));
    }
    let n = a.len();
    let k = controls.len();
    let mut gates = Vec::new();
    let mut clean_used = 0usize;

    if n == 1 {
        // C^k[CCX(a,b,z); CX(a,b)] as two multi-controlled flips; the sum
        // wire b is idle during the carry flip and vice versa.
        let mut ctl = controls.to_vec();
        ctl.push(a[0]);
        ctl.push(b[0]);
        let anc = ledger.borrow_clean(1)?;
        clean_used = 1;
        emit_mcx(&mut gates, &ctl, z, Some(anc[0]))?;
        let mut ctl2 = controls.to_vec();
        ctl2.push(a[0]);
        emit_controlled_flip(&mut gates, &ctl2, b[0], &[], &[z, anc[0]], 0)?;
        ledger.release(&anc)?;
    } else {
        let s = adder_slices(a, b, z);
        let layer =
            |gs: &Vec<Gate>| -> Vec<LayerElement> { gs.iter().map(|g| LayerElement::gate(*g)).collect() };
        emit_controlled_layer(&mut gates, controls, &layer(&s.u1a), &[b[0], a[0]])?;
        let mut zc = controls.to_vec();
        zc.push(a[n - 1]);
        emit_controlled_flip(&mut gates, &zc, z, &[], &[b[0], a[0]], 0)?;
        gates.extend_from_slice(&s.u2);

        // Trade block around the carry ladder.
        let need = ladder2_scratch_need(n - 1);
        let from_ledger = need.saturating_sub(k);
        let ledger_clean = ledger.borrow_clean(from_ledger)?;
        let mut scratch_wires: Vec<Qubit> = controls[..need.min(k)].to_vec();
        scratch_wires.extend(ledger_clean.iter().copied());
        let anc = ledger.borrow_clean(1)?;
        clean_used = from_ledger + 1;
        let anc_q = anc[0];

        emit_controlled_flip(&mut gates, controls, anc_q, &[], &[b[0], a[0]], 0)?;
        for cq in controls {
            gates.x(*cq);
        }
        let mut scratch = ScratchStack::new(scratch_wires);
        let u3mark = gates.len();
        emit_ladder2(&mut gates, &s.u3_wires, &mut scratch, true)?;
        let u3_gates: Vec<Gate> = gates[u3mark..].to_vec();
        let mut pool: Vec<Qubit> = controls.to_vec();
        pool.push(b[0]);
        pool.push(a[0]);
        emit_controlled_layer(&mut gates, &[anc_q], &layer(&s.u4_fan), &pool)?;
        emit_controlled_layer(&mut gates, &[anc_q], &layer(&s.u4_cx), &pool)?;
        emit_controlled_layer(&mut gates, &[anc_q], &layer(&s.u4_x), &pool)?;
        let mut u3_rev = u3_gates;
        u3_rev.reverse();
        gates.extend_from_slice(&u3_rev);
        for cq in controls {
            gates.x(*cq);
        }
        emit_controlled_flip(&mut gates, controls, anc_q, &[], &[b[0], a[0]], 0)?;
        ledger.release(&anc)?;
        ledger.release(&ledger_clean)?;

        emit_controlled_layer(&mut gates, controls, &layer(&s.u6), &[b[0], a[0], z])?;
        let mut u7 = s.u2.clone();
        u7.reverse();
        gates.extend_from_slice(&u7);
        emit_controlled_layer(&mut gates, controls, &layer(&s.u8), &[z])?;
    }

    let mut registers = RegisterMap::new();
    registers.push("c", Role::Control, controls.to_vec());
    registers.push("a", Role::Data, a.to_vec());
    registers.push("b", Role::Data, b.to_vec());
    registers.push("z", Role::Target, vec![z]);
    let mut covered: Vec<Qubit> = controls.to_vec();
    covered.extend_from_slice(a);
    covered.extend_from_slice(b);
    covered.push(z);
    let nq = gates
        .iter()
        .flat_map(|g| g.qubits())
        .chain(covered.iter().copied())
        .map(|w| w.0 + 1)
        .max()
        .unwrap_or(0);
    let rest: Vec<Qubit> = (0..nq).map(Qubit).filter(|w| !covered.contains(w)).collect();
    registers.push("a_clean", Role::CleanAncilla, rest);
    let circuit = Circuit::with_registers(nq, gates, registers)?;
    Ok((circuit, clean_used))
}
