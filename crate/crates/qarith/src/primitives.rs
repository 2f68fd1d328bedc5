//! Structural primitives: multi-controlled X, fan-out operators, CX and
//! CCX ladders (plain, ancilla-assisted and promise variants) and the naive
//! V operator.
//!
//! Everything here emits into flat gate sinks; public wrappers assemble
//! circuits with register maps. Adjoints are exact circuit reversals, which
//! is what the promise-gate pairing conventions rely on.

use crate::ancilla::{AncillaLedger, LedgerError};
use crate::circuit::{reverse_tail, Circuit, CircuitError, Gate, Qubit, RegisterMap, Role, Sink};

#[derive(Debug, thiserror::Error)]
pub enum SynthError {
    #[error("a multi-controlled X with {k} controls needs one dirty ancilla")]
    NeedDirty { k: usize },
    #[error("ladder scratch exhausted: need {need} wires, have {have}")]
    ScratchExhausted { need: usize, have: usize },
    #[error("{0}")]
    Ledger(#[from] LedgerError),
    #[error("{0}")]
    Circuit(#[from] CircuitError),
    #[error("precondition violated: {0}")]
    Precondition(String),
}

pub(crate) fn precondition(msg: impl Into<String>) -> SynthError {
    SynthError::Precondition(msg.into())
}

/// Picks a wire from `pool` avoiding `avoid`, rotating through the pool so
/// that parallel gates in one layer get distinct ancillas.
pub(crate) fn pick_dirty(pool: &[Qubit], avoid: &[Qubit], salt: usize) -> Option<Qubit> {
    if pool.is_empty() {
        return None;
    }
    (0..pool.len())
        .map(|i| pool[(i + salt) % pool.len()])
        .find(|w| !avoid.contains(w))
}

/// Stack allocator over a fixed list of scratch wires (clean or promise).
/// Allocation is LIFO so recursive builders nest naturally.
#[derive(Debug)]
pub(crate) struct ScratchStack {
    wires: Vec<Qubit>,
    used: usize,
    high: usize,
}

impl ScratchStack {
    pub fn new(wires: Vec<Qubit>) -> Self {
        ScratchStack {
            wires,
            used: 0,
            high: 0,
        }
    }

    pub fn alloc(&mut self, count: usize) -> Result<Vec<Qubit>, SynthError> {
        if self.used + count > self.wires.len() {
            return Err(SynthError::ScratchExhausted {
                need: self.used + count,
                have: self.wires.len(),
            });
        }
        let out = self.wires[self.used..self.used + count].to_vec();
        self.used += count;
        self.high = self.high.max(self.used);
        Ok(out)
    }

    pub fn free(&mut self, count: usize) {
        debug_assert!(count <= self.used);
        self.used -= count;
    }

    /// Unallocated tail, usable as uncommitted ancillas by nested builders.
    pub fn available(&self) -> &[Qubit] {
        &self.wires[self.used..]
    }

    pub fn high_water(&self) -> usize {
        self.high
    }
}

// ---------------------------------------------------------------------------
// Multi-controlled X
// ---------------------------------------------------------------------------

/// The chain network for `target ^= AND(controls)` with `k-2` helper wires
/// in arbitrary states: 4k-8 CCX, linear depth, helpers and controls
/// restored on every input.
pub(crate) fn emit_mcx_chain(
    sink: &mut Vec<Gate>,
    controls: &[Qubit],
    target: Qubit,
    helpers: &[Qubit],
) -> Result<(), SynthError> {
    let m = controls.len();
    debug_assert!(m >= 3);
    if helpers.len() < m - 2 {
        return Err(SynthError::NeedDirty { k: m });
    }
    let a = &helpers[..m - 2];
    for _ in 0..2 {
        sink.ccx(controls[m - 1], a[m - 3], target);
        for i in (0..m - 3).rev() {
            sink.ccx(controls[i + 2], a[i], a[i + 1]);
        }
        sink.ccx(controls[0], controls[1], a[0]);
        for i in 0..m - 3 {
            sink.ccx(controls[i + 2], a[i], a[i + 1]);
        }
    }
    Ok(())
}

/// C3X as four CCX through one helper wire in an arbitrary state.
pub(crate) fn emit_c3x(sink: &mut Vec<Gate>, controls: [Qubit; 3], target: Qubit, dirty: Qubit) {
    emit_mcx_chain(sink, &controls, target, &[dirty]).expect("one helper suffices for C3X");
}

/// Conditionally-clean compression: pairs of live conjunction carriers are
/// folded onto wires freed by earlier consumption. A product placed on slot
/// `z` reads `NOT z XOR a AND b`, so its value is exact whenever the
/// product that consumed `z` (the slot's certificate) evaluates to 1; the
/// certificate is pinned live until the product dies, which keeps the veto
/// chains of the final conjunction intact.
struct Compressor {
    /// (wire, certificate node, pin count, alive) per product node.
    nodes: Vec<(Qubit, Option<usize>, usize, bool)>,
    /// (wire, certificate node) per free slot; base slots carry None and
    /// are vetoed by the toggled-factor of the enclosing ABAB structure.
    slots: Vec<(Qubit, Option<usize>)>,
    gates: Vec<Gate>,
}

impl Compressor {
    /// Runs compression over `rest` with base slots `c1, c2`; returns the
    /// live carrier wires whose conjunction (times c1 AND c2) equals the
    /// full conjunction.
    fn run(c1: Qubit, c2: Qubit, rest: &[Qubit]) -> (Vec<Gate>, Vec<Qubit>, Vec<Qubit>) {
        let mut comp = Compressor {
            nodes: Vec::new(),
            slots: vec![(c1, None), (c2, None)],
            gates: Vec::new(),
        };
        // Originals are carriers without certificates or pins.
        let mut live: Vec<usize> = rest
            .iter()
            .map(|w| {
                comp.nodes.push((*w, None, 0, true));
                comp.nodes.len() - 1
            })
            .collect();
        loop {
            // Pins change as pairs are consumed, so re-scan every step.
            let consumable: Vec<usize> = live
                .iter()
                .copied()
                .filter(|&n| comp.nodes[n].3 && comp.nodes[n].2 == 0)
                .collect();
            let Some((a, b, slot_idx)) = consumable
                .iter()
                .enumerate()
                .find_map(|(i, &a)| {
                    consumable[i + 1..]
                        .iter()
                        .find_map(|&b| comp.find_slot(a, b).map(|s| (a, b, s)))
                })
            else {
                if std::env::var("QARITH_DEBUG_COMPRESS").is_ok() {
                    let alive = live.iter().filter(|&&n| comp.nodes[n].3).count();
                    let pinned = live.iter().filter(|&&n| comp.nodes[n].3 && comp.nodes[n].2 > 0).count();
                    let valid_slots = comp.slots.iter().filter(|(_, c)| match c { None => true, Some(i) => comp.nodes[*i].3 }).count();
                    eprintln!("stuck: alive={alive} pinned={pinned} consumable={} slots_total={} valid_slots={valid_slots}", consumable.len(), comp.slots.len());
                }
                break;
            };
            let (slot_wire, cert) = comp.slots.remove(slot_idx);
            comp.gates.x(slot_wire);
            comp.gates.ccx(comp.nodes[a].0, comp.nodes[b].0, slot_wire);
            if let Some(c) = cert {
                comp.nodes[c].2 += 1;
            }
            comp.nodes.push((slot_wire, cert, 0, true));
            let product = comp.nodes.len() - 1;
            for &n in &[a, b] {
                comp.nodes[n].3 = false;
                if let Some(c) = comp.nodes[n].1 {
                    comp.nodes[c].2 -= 1;
                }
                comp.slots.push((comp.nodes[n].0, Some(product)));
            }
            live.retain(|&n| comp.nodes[n].3);
            live.push(product);
        }

        let carriers: Vec<Qubit> = live.iter().map(|&n| comp.nodes[n].0).collect();
        // Wires that no longer carry anything can serve as helpers.
        let free: Vec<Qubit> = comp
            .slots
            .iter()
            .map(|(w, _)| *w)
            .filter(|w| !carriers.contains(w) && *w != c1 && *w != c2)
            .collect();
        (comp.gates, carriers, free)
    }

    /// A slot is valid for pair (a, b) if its certificate is alive and not
    /// part of the pair. Slots are reused oldest-first: old wires have
    /// settled circuit frontiers, which keeps the compression layers
    /// parallel instead of chaining on freshly freed wires.
    fn find_slot(&self, a: usize, b: usize) -> Option<usize> {
        (0..self.slots.len()).find(|&i| match self.slots[i].1 {
            None => true,
            Some(c) => self.nodes[c].3 && c != a && c != b,
        })
    }
}

/// Ancilla resources available to a multi-controlled X emission.
#[derive(Clone, Copy, Default)]
pub(crate) struct McxAux<'a> {
    /// Wires known |0> in every case the surrounding construction must be
    /// exact on (clean or promise ancillas); restored by compute-uncompute.
    pub clean: &'a [Qubit],
    /// Wires in arbitrary states; restored on every basis input.
    pub dirty: &'a [Qubit],
}

impl<'a> McxAux<'a> {
    pub fn dirty_only(dirty: &'a [Qubit]) -> Self {
        McxAux { clean: &[], dirty }
    }
}

/// Emits `target ^= AND(controls)` over {CCX, CX, X}.
///
/// Available clean wires host an exact conjunction tree; the remainder is
/// handled by toggle-detecting the first control pair onto a dirty wire
/// and compressing the rest onto conditionally clean slots. Gate count is
/// linear in the control count and the depth logarithmic apart from the
/// small final cascade.
pub(crate) fn emit_mcx_aux(
    sink: &mut Vec<Gate>,
    controls: &[Qubit],
    target: Qubit,
    aux: McxAux,
) -> Result<(), SynthError> {
    match controls.len() {
        0 => {
            sink.x(target);
            return Ok(());
        }
        1 => {
            sink.cx(controls[0], target);
            return Ok(());
        }
        2 => {
            sink.ccx(controls[0], controls[1], target);
            return Ok(());
        }
        _ => {}
    }

    // Exact conjunction tree over clean slots while they last.
    let mut live: Vec<Qubit> = controls.to_vec();
    let mut tree: Vec<Gate> = Vec::new();
    let mut slot_iter = aux.clean.iter().copied();
    while live.len() > 3 {
        let mut next: Vec<Qubit> = Vec::new();
        let mut level_done = true;
        let mut i = 0;
        while i + 1 < live.len() {
            if let Some(slot) = slot_iter.next() {
                tree.ccx(live[i], live[i + 1], slot);
                next.push(slot);
                i += 2;
            } else {
                level_done = false;
                break;
            }
        }
        next.extend_from_slice(&live[i..]);
        live = next;
        if !level_done {
            break;
        }
    }

    sink.extend_from_slice(&tree);
    // Consumed tree controls double as restorable helpers for the core.
    let mut helpers: Vec<Qubit> = aux.dirty.to_vec();
    helpers.extend(controls.iter().copied().filter(|w| !live.contains(w)));
    let res = if live.len() > 3 && live.len() <= 32 && helpers.len() >= live.len() - 2 {
        emit_mcx_chain(sink, &live, target, &helpers)
    } else {
        emit_mcx_core(sink, &live, target, &helpers, controls)
    };
    let mut untree = tree;
    untree.reverse();
    sink.extend_from_slice(&untree);
    res
}

/// The dirty-ancilla core: assumes 3 or more controls remain.
fn emit_mcx_core(
    sink: &mut Vec<Gate>,
    controls: &[Qubit],
    target: Qubit,
    dirty: &[Qubit],
    all_controls: &[Qubit],
) -> Result<(), SynthError> {
    match controls.len() {
        0 => {
            sink.x(target);
            return Ok(());
        }
        1 => {
            sink.cx(controls[0], target);
            return Ok(());
        }
        2 => {
            sink.ccx(controls[0], controls[1], target);
            return Ok(());
        }
        3 => {
            let psi = dirty.first().ok_or(SynthError::NeedDirty { k: 3 })?;
            emit_c3x(sink, [controls[0], controls[1], controls[2]], target, *psi);
            return Ok(());
        }
        _ => {}
    }
    let psi = *dirty.first().ok_or(SynthError::NeedDirty {
        k: controls.len(),
    })?;
    let (c1, c2) = (controls[0], controls[1]);
    let (compress, carriers, mut helpers) = Compressor::run(c1, c2, &controls[2..]);
    helpers.extend(dirty.iter().skip(1).copied());
    // Controls consumed by the tree stage above are also restorable helpers.
    let extra: Vec<Qubit> = all_controls
        .iter()
        .copied()
        .filter(|w| !controls.contains(w) && !helpers.contains(w))
        .collect();
    helpers.extend(extra);

    // The live carriers still satisfy c1 c2 AND(carriers) = AND(controls);
    // their conjunction is evaluated by a recursive stage over fresh wires.
    let mut fire: Vec<Gate> = Vec::new();
    let mut fire_controls = vec![psi];
    fire_controls.extend(carriers.iter().copied());
    match fire_controls.len() {
        2 => fire.ccx(fire_controls[0], fire_controls[1], target),
        3 => {
            let h = helpers.first().ok_or(SynthError::NeedDirty { k: 3 })?;
            emit_c3x(
                &mut fire,
                [fire_controls[0], fire_controls[1], fire_controls[2]],
                target,
                *h,
            );
        }
        _ => {
            if helpers.is_empty() {
                return Err(SynthError::NeedDirty {
                    k: fire_controls.len(),
                });
            }
            emit_mcx_core(&mut fire, &fire_controls, target, &helpers, all_controls)?;
        }
    }

    let mut uncompress = compress.clone();
    uncompress.reverse();
    // t ^= (psi xor c1 c2) W  xor  psi W  =  c1 c2 AND(rest), any psi.
    for _ in 0..2 {
        sink.ccx(c1, c2, psi);
        sink.extend_from_slice(&compress);
        sink.extend_from_slice(&fire);
        sink.extend_from_slice(&uncompress);
    }
    Ok(())
}

/// One-dirty-ancilla entry point used throughout the builders.
pub(crate) fn emit_mcx(
    sink: &mut Vec<Gate>,
    controls: &[Qubit],
    target: Qubit,
    dirty: Option<Qubit>,
) -> Result<(), SynthError> {
    let d: Vec<Qubit> = dirty.into_iter().collect();
    emit_mcx_aux(sink, controls, target, McxAux::dirty_only(&d))
}

/// Flip `target` iff all `controls` are set, drawing ancillas from the
/// given pools when the control count demands them.
pub(crate) fn emit_controlled_flip(
    sink: &mut Vec<Gate>,
    controls: &[Qubit],
    target: Qubit,
    clean_pool: &[Qubit],
    dirty_pool: &[Qubit],
    salt: usize,
) -> Result<(), SynthError> {
    if controls.len() <= 2 {
        return emit_mcx(sink, controls, target, None);
    }
    let mut avoid = controls.to_vec();
    avoid.push(target);
    let clean: Vec<Qubit> = clean_pool
        .iter()
        .copied()
        .filter(|w| !avoid.contains(w))
        .collect();
    // Rotate the pool so parallel gates in one layer grab disjoint helper
    // runs instead of serializing on a shared prefix.
    let eligible: Vec<Qubit> = dirty_pool
        .iter()
        .copied()
        .filter(|w| !avoid.contains(w))
        .collect();
    let dirty: Vec<Qubit> = if eligible.is_empty() {
        Vec::new()
    } else {
        let k = controls.len();
        let off = (salt * k) % eligible.len();
        eligible[off..]
            .iter()
            .chain(eligible[..off].iter())
            .copied()
            .collect()
    };
    emit_mcx_aux(
        sink,
        controls,
        target,
        McxAux {
            clean: &clean,
            dirty: &dirty,
        },
    )
}

// ---------------------------------------------------------------------------
// Fan-out
// ---------------------------------------------------------------------------

/// `t_i ^= c` for every target, no ancillas.
///
/// Odd-indexed targets are conjugated onto their even partners so the
/// recursion only has to drive half the wires.
pub(crate) fn emit_fanout1(sink: &mut Vec<Gate>, control: Qubit, targets: &[Qubit]) {
    match targets {
        [] => {}
        [t] => sink.cx(control, *t),
        _ => {
            let pairs: Vec<(Qubit, Qubit)> =
                targets.chunks_exact(2).map(|p| (p[0], p[1])).collect();
            for (a, b) in &pairs {
                sink.cx(*a, *b);
            }
            let evens: Vec<Qubit> = targets.iter().copied().step_by(2).collect();
            emit_fanout1(sink, control, &evens);
            for (a, b) in &pairs {
                sink.cx(*a, *b);
            }
        }
    }
}

/// In-place parallel-prefix XOR (Brent-Kung): wire i ends as the XOR of
/// wires 0..=i. This is the ascending CX-ladder permutation.
pub(crate) fn emit_prefix_xor(sink: &mut Vec<Gate>, w: &[Qubit]) {
    let m = w.len();
    if m < 2 {
        return;
    }
    let mut d = 1usize;
    while d < m {
        let mut i = 2 * d - 1;
        while i < m {
            sink.cx(w[i - d], w[i]);
            i += 2 * d;
        }
        d *= 2;
    }
    d /= 2;
    while d >= 1 {
        let mut i = 3 * d - 1;
        while i < m {
            sink.cx(w[i - d], w[i]);
            i += 2 * d;
        }
        if d == 1 {
            break;
        }
        d /= 2;
    }
}

/// The CX-ladder permutation on `wires`.
///
/// `adjoint = false` realizes the ladder definition (each wire XORs its
/// lower neighbour's original value, the sequential descending ladder);
/// `adjoint = true` is the inverse, the prefix-XOR map.
pub(crate) fn emit_ladder1(sink: &mut Vec<Gate>, wires: &[Qubit], adjoint: bool) {
    let mark = sink.len();
    emit_prefix_xor(sink, wires);
    if !adjoint {
        reverse_tail(sink, mark);
    }
}

// ---------------------------------------------------------------------------
// Chain ladders (the recursion behind L2, Lk and the carry staircases)
// ---------------------------------------------------------------------------

/// One gate of a chain ladder: flip `target` iff all of `extra` and the
/// previous step's target (or the chain head for the first step) are set.
#[derive(Clone, Debug)]
pub(crate) struct ChainStep {
    pub extra: Vec<Qubit>,
    pub target: Qubit,
}

/// Scratch wires consumed by [`emit_chain_ladder`] on `m` steps.
pub(crate) fn chain_scratch_need(m: usize, cutoff: usize) -> usize {
    if m <= cutoff {
        0
    } else {
        let mid = m.div_ceil(2) - 1;
        mid + chain_scratch_need(mid, cutoff)
    }
}

pub(crate) const LADDER_BASE: usize = 3;

/// Emits the ascending chain ladder: step i fires on the updated value of
/// step i-1's target.
///
/// Above the base cutoff the ladder splits into an even layer, a recursed
/// middle ladder over corrective pair products held in scratch wires, and
/// an odd layer; the scratch is computed and uncomputed symmetrically, so
/// it is preserved on every basis input regardless of its initial state.
pub(crate) fn emit_chain_ladder(
    sink: &mut Vec<Gate>,
    chain_head: Option<Qubit>,
    steps: &[ChainStep],
    scratch: &mut ScratchStack,
    dirty_pool: &[Qubit],
    cutoff: usize,
) -> Result<(), SynthError> {
    emit_chain_ladder_mode(sink, chain_head, steps, scratch, dirty_pool, cutoff, false)
}

/// `exact` restricts every constituent multi-controlled X to dirty-only
/// helpers, making each toggle a pure conjunction of its control values.
/// Required when the same ladder structure must cancel against a later
/// re-emission over shifted data values (the incrementer staircases).
#[allow(clippy::too_many_arguments)]
pub(crate) fn emit_chain_ladder_mode(
    sink: &mut Vec<Gate>,
    chain_head: Option<Qubit>,
    steps: &[ChainStep],
    scratch: &mut ScratchStack,
    dirty_pool: &[Qubit],
    cutoff: usize,
    exact: bool,
) -> Result<(), SynthError> {
    let m = steps.len();
    if m == 0 {
        return Ok(());
    }
    let chain_in = |i: usize| -> Option<Qubit> {
        if i == 0 {
            chain_head
        } else {
            Some(steps[i - 1].target)
        }
    };
    let controls_of = |i: usize| -> Vec<Qubit> {
        let mut c: Vec<Qubit> = chain_in(i).into_iter().collect();
        c.extend(steps[i].extra.iter().copied());
        c
    };

    let chunk_of = |avail: &[Qubit], idx: usize, total: usize| -> Vec<Qubit> {
        if avail.is_empty() || total == 0 {
            return Vec::new();
        }
        avail
            .iter()
            .copied()
            .enumerate()
            .filter(|(j, _)| j % total == idx % total)
            .map(|(_, w)| w)
            .collect()
    };

    // Exact toggles draw their single dirty wire from the scratch tail
    // first: those wires sit outside every step's control set, so parallel
    // steps stay disjoint.
    let exact_flip = |sink: &mut Vec<Gate>,
                      avail: &[Qubit],
                      controls: &[Qubit],
                      target: Qubit,
                      salt: usize|
     -> Result<(), SynthError> {
        let mut avoid = controls.to_vec();
        avoid.push(target);
        let one = pick_dirty(avail, &avoid, salt)
            .or_else(|| pick_dirty(dirty_pool, &avoid, salt.wrapping_mul(7) + 3));
        emit_mcx(sink, controls, target, one)
    };

    if m <= cutoff.max(1) {
        // The base chain is sequential anyway; each gate may use the whole
        // spare pool.
        for i in 0..m {
            if exact {
                let avail = scratch.available().to_vec();
                exact_flip(sink, &avail, &controls_of(i), steps[i].target, i)?;
            } else {
                let spare = scratch.available().to_vec();
                emit_controlled_flip(sink, &controls_of(i), steps[i].target, &spare, dirty_pool, i)?;
            }
        }
        return Ok(());
    }

    // Even layer: steps 0, 2, 4, ... read their chain input early; the
    // middle ladder later adds the missing odd-step contribution.
    let mid_count = m.div_ceil(2) - 1;
    let products = scratch.alloc(mid_count)?;
    let even_total = m.div_ceil(2);
    for (salt, i) in (0..m).step_by(2).enumerate() {
        if exact {
            let avail = scratch.available().to_vec();
            exact_flip(sink, &avail, &controls_of(i), steps[i].target, salt)?;
        } else {
            let spare = chunk_of(scratch.available(), salt, even_total);
            emit_controlled_flip(sink, &controls_of(i), steps[i].target, &spare, dirty_pool, salt)?;
        }
    }

    // Pair products a_j = AND(extra of step 2j+1, extra of step 2j+2).
    let compute_mark = sink.len();
    for (j, a) in products.iter().enumerate() {
        let i = 2 * j + 2;
        let mut ctl = steps[i - 1].extra.clone();
        ctl.extend_from_slice(&steps[i].extra);
        if exact {
            let avail = scratch.available().to_vec();
            exact_flip(sink, &avail, &ctl, *a, j + 1)?;
        } else {
            let spare = chunk_of(scratch.available(), j, mid_count);
            emit_controlled_flip(sink, &ctl, *a, &spare, dirty_pool, j)?;
        }
    }
    let compute: Vec<Gate> = sink[compute_mark..].to_vec();

    let mid_steps: Vec<ChainStep> = (0..mid_count)
        .map(|j| ChainStep {
            extra: vec![products[j]],
            target: steps[2 * j + 2].target,
        })
        .collect();
    emit_chain_ladder_mode(
        sink,
        Some(steps[0].target),
        &mid_steps,
        scratch,
        dirty_pool,
        cutoff,
        exact,
    )?;

    let mut uncompute = compute;
    uncompute.reverse();
    sink.extend_from_slice(&uncompute);
    scratch.free(mid_count);

    // Odd layer: by now every chain input is fully updated.
    let odd_total = m / 2;
    for (salt, i) in (1..m).step_by(2).enumerate() {
        if exact {
            let avail = scratch.available().to_vec();
            exact_flip(sink, &avail, &controls_of(i), steps[i].target, salt)?;
        } else {
            let spare = chunk_of(scratch.available(), salt, odd_total);
            emit_controlled_flip(sink, &controls_of(i), steps[i].target, &spare, dirty_pool, salt)?;
        }
    }
    Ok(())
}

/// Steps of the CCX ladder over interleaved wires `x0..x_{2n}`:
/// gate i flips `x_{2i+2}` on controls `x_{2i}` (chain) and `x_{2i+1}`.
fn ladder2_steps(wires: &[Qubit]) -> (Qubit, Vec<ChainStep>) {
    debug_assert!(wires.len() >= 3 && wires.len() % 2 == 1);
    let steps = (0..wires.len() / 2)
        .map(|i| ChainStep {
            extra: vec![wires[2 * i + 1]],
            target: wires[2 * i + 2],
        })
        .collect();
    (wires[0], steps)
}

/// Scratch wires needed by the log-depth ladder on `n` CCX gates.
pub fn ladder2_scratch_need(n: usize) -> usize {
    chain_scratch_need(n, LADDER_BASE)
}

/// Emits the L2 ladder permutation over `wires` (length 2n+1).
/// `adjoint = false` follows the definition (original-value semantics).
pub(crate) fn emit_ladder2(
    sink: &mut Vec<Gate>,
    wires: &[Qubit],
    scratch: &mut ScratchStack,
    adjoint: bool,
) -> Result<(), SynthError> {
    let (head, steps) = ladder2_steps(wires);
    let mark = sink.len();
    emit_chain_ladder(sink, Some(head), &steps, scratch, &[], LADDER_BASE)?;
    if !adjoint {
        reverse_tail(sink, mark);
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Public builders
// ---------------------------------------------------------------------------

fn circuit_from(
    gates: Vec<Gate>,
    registers: RegisterMap,
    num_qubits: u32,
) -> Result<Circuit, SynthError> {
    Ok(Circuit::with_registers(num_qubits, gates, registers)?)
}

fn max_wire(ws: impl IntoIterator<Item = Qubit>) -> u32 {
    ws.into_iter().map(|w| w.0 + 1).max().unwrap_or(0)
}

/// C^kX over the gate set, flipping `target` iff all controls are set.
/// For k >= 3 one dirty ancilla is borrowed from `ledger` and restored.
pub fn build_mcx(
    controls: &[Qubit],
    target: Qubit,
    ledger: &mut AncillaLedger,
) -> Result<Circuit, SynthError> {
    let mut gates = Vec::new();
    let mut registers = RegisterMap::new();
    registers.push("c", Role::Control, controls.to_vec());
    registers.push("t", Role::Target, vec![target]);
    let mut n = max_wire(controls.iter().copied().chain([target]));
    if controls.len() >= 3 {
        let mut exclude = controls.to_vec();
        exclude.push(target);
        let dirty = ledger.borrow_dirty(1, &exclude)?;
        emit_mcx(&mut gates, controls, target, Some(dirty[0]))?;
        registers.push("g", Role::DirtyAncilla, dirty.clone());
        n = n.max(max_wire(dirty.iter().copied()));
        ledger.release(&dirty)?;
    } else {
        emit_mcx(&mut gates, controls, target, None)?;
    }
    circuit_from(gates, registers, n)
}

/// First-order fan-out: every target XORs the control.
pub fn build_fanout1(control: Qubit, targets: &[Qubit]) -> Result<Circuit, SynthError> {
    if targets.is_empty() {
        return Err(precondition("fanout needs at least one target"));
    }
    let mut gates = Vec::new();
    emit_fanout1(&mut gates, control, targets);
    let mut registers = RegisterMap::new();
    registers.push("c", Role::Control, vec![control]);
    registers.push("t", Role::Target, targets.to_vec());
    let n = max_wire(targets.iter().copied().chain([control]));
    circuit_from(gates, registers, n)
}

/// Second-order fan-out: `t_j ^= c AND x_{j,0} AND x_{j,1}` per triple.
///
/// Triples are split into halves; each half borrows the other half's wires
/// as dirty copies of the control and as C3X decomposition helpers. A
/// single triple has no opposite half, so one dirty qubit comes from the
/// ledger.
pub fn build_fanout2(
    control: Qubit,
    triples: &[(Qubit, Qubit, Qubit)],
    ledger: &mut AncillaLedger,
) -> Result<Circuit, SynthError> {
    if triples.is_empty() {
        return Err(precondition("fanout needs at least one triple"));
    }
    let mut seen: Vec<Qubit> = vec![control];
    for (a, b, t) in triples {
        for w in [a, b, t] {
            if seen.contains(w) {
                return Err(precondition(format!("overlapping triples at {}", w)));
            }
            seen.push(*w);
        }
    }

    let mut gates = Vec::new();
    let mut registers = RegisterMap::new();
    registers.push("c", Role::Control, vec![control]);
    let mut data: Vec<Qubit> = Vec::new();
    for (a, b, t) in triples {
        data.extend([*a, *b, *t]);
    }
    registers.push("x", Role::Data, data);
    let mut n = max_wire(seen.iter().copied());

    let mut borrowed = Vec::new();
    if triples.len() == 1 {
        let dirty = ledger.borrow_dirty(1, &seen)?;
        let (a, b, t) = triples[0];
        emit_c3x(&mut gates, [control, a, b], t, dirty[0]);
        registers.push("g", Role::DirtyAncilla, dirty.clone());
        n = n.max(max_wire(dirty.iter().copied()));
        borrowed = dirty;
    } else {
        emit_fanout2(&mut gates, control, triples)?;
    }
    if !borrowed.is_empty() {
        ledger.release(&borrowed)?;
    }
    circuit_from(gates, registers, n)
}

pub(crate) fn emit_fanout2(
    sink: &mut Vec<Gate>,
    control: Qubit,
    triples: &[(Qubit, Qubit, Qubit)],
) -> Result<(), SynthError> {
    debug_assert!(triples.len() >= 2);
    let half = triples.len() / 2;
    let (first, second) = triples.split_at(half);
    for (mine, other) in [(first, second), (second, first)] {
        let pool: Vec<Qubit> = other.iter().flat_map(|(a, b, t)| [*a, *b, *t]).collect();
        emit_fanout2_half(sink, control, mine, &pool)?;
    }
    Ok(())
}

/// One half of the fan-out; `pool` holds the opposite half's wires.
fn emit_fanout2_half(
    sink: &mut Vec<Gate>,
    control: Qubit,
    triples: &[(Qubit, Qubit, Qubit)],
    pool: &[Qubit],
) -> Result<(), SynthError> {
    let p = triples.len();
    if p == 1 {
        // Toggle-detected form through a dirty control copy.
        let (a, b, t) = triples[0];
        for _ in 0..2 {
            sink.cx(control, pool[0]);
            emit_c3x(sink, [pool[0], a, b], t, pool[1]);
        }
        return Ok(());
    }
    let copies: Vec<Qubit> = pool[..p - 1].to_vec();
    let mut spares = pool[p - 1..].iter().copied().cycle();
    // C3X helpers: prefer leftover pool wires, fall back to a sibling
    // triple's wire (idle while this element runs).
    let mut helper = |j: usize| -> Qubit {
        if pool.len() > p - 1 {
            spares.next().unwrap()
        } else {
            triples[(j + 1) % p].0
        }
    };

    emit_fanout1(sink, control, &copies);
    let (a0, b0, t0) = triples[0];
    emit_c3x(sink, [control, a0, b0], t0, helper(0));
    let mut second_pass: Vec<(Qubit, (Qubit, Qubit, Qubit), Qubit)> = Vec::new();
    for (j, trip) in triples[1..].iter().enumerate() {
        let d = copies[j];
        let h = helper(j + 1);
        emit_c3x(sink, [d, trip.0, trip.1], trip.2, h);
        second_pass.push((d, *trip, h));
    }
    emit_fanout1(sink, control, &copies);
    for (d, trip, h) in second_pass {
        emit_c3x(sink, [d, trip.0, trip.1], trip.2, h);
    }
    Ok(())
}

/// CX-ladder over `qubits` (the definition permutation or its adjoint).
pub fn build_ladder1(qubits: &[Qubit], adjoint: bool) -> Result<Circuit, SynthError> {
    if qubits.len() < 2 {
        return Err(precondition("ladder needs at least two qubits"));
    }
    let mut gates = Vec::new();
    emit_ladder1(&mut gates, qubits, adjoint);
    let registers = {
        let mut m = RegisterMap::new();
        m.push("x", Role::Data, qubits.to_vec());
        m
    };
    circuit_from(gates, registers, max_wire(qubits.iter().copied()))
}

/// CCX ladder over `2n+1` qubits with clean ancillas from the ledger; gate
/// count stays linear while the depth drops to logarithmic.
pub fn build_ladder2_ancilla(
    qubits: &[Qubit],
    ledger: &mut AncillaLedger,
    adjoint: bool,
) -> Result<Circuit, SynthError> {
    if qubits.len() < 3 || qubits.len() % 2 == 0 {
        return Err(precondition("ladder2 needs an odd qubit count >= 3"));
    }
    let n_gates = qubits.len() / 2;
    let need = ladder2_scratch_need(n_gates);
    let ancillas = ledger.borrow_clean(need)?;
    let mut scratch = ScratchStack::new(ancillas.clone());
    let mut gates = Vec::new();
    emit_ladder2(&mut gates, qubits, &mut scratch, adjoint)?;
    let mut registers = RegisterMap::new();
    registers.push("x", Role::Data, qubits.to_vec());
    registers.push("a", Role::CleanAncilla, ancillas.clone());
    let n = max_wire(qubits.iter().copied().chain(ancillas.iter().copied()));
    ledger.release(&ancillas)?;
    circuit_from(gates, registers, n)
}

fn ladderk_steps(k: usize, qubits: &[Qubit]) -> (Qubit, Vec<ChainStep>) {
    let n = (qubits.len() - 1) / k;
    let steps = (0..n)
        .map(|i| ChainStep {
            extra: qubits[k * i + 1..k * (i + 1)].to_vec(),
            target: qubits[k * (i + 1)],
        })
        .collect();
    (qubits[0], steps)
}

/// Scratch wires needed by [`build_ladderk`] on the `kn+1` wire list.
pub fn ladderk_scratch_need(k: usize, qubits: usize) -> usize {
    chain_scratch_need((qubits - 1) / k, LADDER_BASE)
}

/// C^kX ladder over `kn+1` qubits. Outer gates are multi-controlled X
/// built with borrowed dirty wires, the inner recursion is the CCX ladder.
pub fn build_ladderk(
    k: usize,
    qubits: &[Qubit],
    ledger: &mut AncillaLedger,
    adjoint: bool,
) -> Result<Circuit, SynthError> {
    if k < 1 {
        return Err(precondition("ladder order k must be >= 1"));
    }
    if qubits.len() < k + 1 || (qubits.len() - 1) % k != 0 {
        return Err(precondition("ladder-k needs kn+1 qubits"));
    }
    if k == 1 {
        return build_ladder1(qubits, adjoint);
    }
    let need = ladderk_scratch_need(k, qubits.len());
    let ancillas = ledger.borrow_clean(need)?;
    let mut scratch = ScratchStack::new(ancillas.clone());
    let (head, steps) = ladderk_steps(k, qubits);
    let mut gates = Vec::new();
    let mark = gates.len();
    emit_chain_ladder(&mut gates, Some(head), &steps, &mut scratch, qubits, LADDER_BASE)?;
    if !adjoint {
        reverse_tail(&mut gates, mark);
    }
    let mut registers = RegisterMap::new();
    registers.push("x", Role::Data, qubits.to_vec());
    registers.push("a", Role::CleanAncilla, ancillas.clone());
    let n = max_wire(qubits.iter().copied().chain(ancillas.iter().copied()));
    ledger.release(&ancillas)?;
    circuit_from(gates, registers, n)
}

/// Strong promise gate whose target unitary is the L_k ladder: identical
/// gate structure to [`build_ladderk`] with the scratch relabeled as the
/// promise register. The compute-uncompute pattern preserves the scratch
/// for every basis state, which is exactly the strong-promise obligation.
pub fn build_promise_ladderk(
    k: usize,
    qubits: &[Qubit],
    promise: &[Qubit],
    adjoint: bool,
) -> Result<Circuit, SynthError> {
    if k < 1 || qubits.len() < k + 1 || (qubits.len() - 1) % k != 0 {
        return Err(precondition("ladder-k needs kn+1 qubits"));
    }
    let need = if k == 1 {
        0
    } else {
        ladderk_scratch_need(k, qubits.len())
    };
    if promise.len() < need {
        return Err(precondition(format!(
            "promise register too small: need {need}, have {}",
            promise.len()
        )));
    }
    let mut gates = Vec::new();
    if k == 1 {
        emit_ladder1(&mut gates, qubits, adjoint);
    } else {
        let mut scratch = ScratchStack::new(promise.to_vec());
        let (head, steps) = ladderk_steps(k, qubits);
        let mark = gates.len();
        emit_chain_ladder(&mut gates, Some(head), &steps, &mut scratch, qubits, LADDER_BASE)?;
        if !adjoint {
            reverse_tail(&mut gates, mark);
        }
    }
    let mut registers = RegisterMap::new();
    registers.push("x", Role::Data, qubits.to_vec());
    registers.push("p", Role::Promise, promise.to_vec());
    let n = max_wire(qubits.iter().copied().chain(promise.iter().copied()));
    circuit_from(gates, registers, n)
}

/// Naive V operator: the adjoint ladder on the lower 2n-1 wires followed by
/// the full ladder, a V-shaped column of 2n-1 CCX gates.
pub(crate) fn emit_v2_naive(sink: &mut Vec<Gate>, pairs: &[(Qubit, Qubit)], target: Qubit) {
    let m = pairs.len();
    debug_assert!(m >= 1);
    let upper = |i: usize| -> Qubit {
        if i + 1 < m {
            pairs[i + 1].0
        } else {
            target
        }
    };
    for i in 0..m - 1 {
        sink.ccx(pairs[i].0, pairs[i].1, upper(i));
    }
    for i in (0..m).rev() {
        sink.ccx(pairs[i].0, pairs[i].1, upper(i));
    }
}

/// Reference form of the V operator over an odd wire list.
pub fn build_v2_naive(qubits: &[Qubit]) -> Result<Circuit, SynthError> {
    if qubits.len() < 3 || qubits.len() % 2 == 0 {
        return Err(precondition("the V operator needs an odd qubit count >= 3"));
    }
    let pairs: Vec<(Qubit, Qubit)> = qubits[..qubits.len() - 1]
        .chunks_exact(2)
        .map(|c| (c[0], c[1]))
        .collect();
    let target = *qubits.last().unwrap();
    let mut gates = Vec::new();
    emit_v2_naive(&mut gates, &pairs, target);
    let mut registers = RegisterMap::new();
    registers.push("x", Role::Data, qubits[..qubits.len() - 1].to_vec());
    registers.push("t", Role::Target, vec![target]);
    circuit_from(gates, registers, max_wire(qubits.iter().copied()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{q, wire_range};
    use crate::sim::{
        check_dirty_restoration, check_equivalence, simulate, truth_table, BasisState,
        PermutationOracle, VerifyOptions,
    };

    fn opts() -> VerifyOptions {
        VerifyOptions::default()
    }

    /// Sequential reference ladder built gate-by-gate from the definitional
    /// figures: descending order applies every product on original values.
    fn naive_ladder2(wires: &[Qubit], adjoint: bool) -> Vec<Gate> {
        let n = wires.len() / 2;
        let mut gates = Vec::new();
        for i in (0..n).rev() {
            gates.ccx(wires[2 * i], wires[2 * i + 1], wires[2 * i + 2]);
        }
        if adjoint {
            gates.reverse();
        }
        gates
    }

    #[test]
    fn mcx_small_cases() {
        let mut ledger = AncillaLedger::new();
        let c = build_mcx(&[], q(0), &mut ledger).unwrap();
        assert_eq!(c.gates(), &[Gate::x(q(0))]);
        let c = build_mcx(&[q(0), q(1)], q(2), &mut ledger).unwrap();
        assert_eq!(c.gates(), &[Gate::ccx(q(0), q(1), q(2))]);
    }

    #[test]
    fn mcx_requires_a_dirty_ancilla_from_k3() {
        let mut ledger = AncillaLedger::new();
        assert!(build_mcx(&wire_range(0, 3), q(3), &mut ledger).is_err());
    }

    #[test]
    fn mcx_exhaustive_with_dirty_restoration() {
        for k in 3..=11u32 {
            let controls = wire_range(0, k);
            let target = q(k);
            let dirty = q(k + 1);
            let mut ledger = AncillaLedger::with_pools(vec![], vec![dirty]);
            let c = build_mcx(&controls, target, &mut ledger).unwrap();
            assert!(ledger.busy_is_empty());
            assert_eq!(ledger.high_water_dirty(), 1);
            // Oracle over the non-dirty wires: t ^= AND(controls).
            let all = (1u64 << k) - 1;
            let oracle = PermutationOracle::from_fn(k + 1, move |x| {
                if x & all == all {
                    x ^ (1 << k)
                } else {
                    x
                }
            });
            let verdict = check_dirty_restoration(&c, &[dirty], &oracle, &opts()).unwrap();
            assert!(
                verdict.passed(),
                "k={k}: {:?}",
                &verdict.mismatches[..verdict.mismatches.len().min(4)]
            );
        }
    }

    #[test]
    fn mcx_with_clean_tree_slots_is_exhaustively_correct() {
        // k controls, a few clean slots, one dirty. With the slots pinned
        // to zero the map is exact for every dirty value; on arbitrary slot
        // contents the slots themselves still come back unchanged (the
        // promise-register obligation).
        use crate::sim::{check_promise, PromiseContract, Strength};
        for (k, slots) in [(6u32, 2u32), (8, 3), (9, 4)] {
            let controls = wire_range(0, k);
            let target = q(k);
            let dirty = q(k + 1);
            let clean = wire_range(k + 2, k + 2 + slots);
            let mut gates = Vec::new();
            emit_mcx_aux(
                &mut gates,
                &controls,
                target,
                McxAux {
                    clean: &clean,
                    dirty: &[dirty],
                },
            )
            .unwrap();
            let c = Circuit::from_gates(k + 2 + slots, gates).unwrap();
            let all = (1u64 << k) - 1;
            let fixed: Vec<(Qubit, bool)> = clean.iter().map(|w| (*w, false)).collect();
            let oracle = PermutationOracle::from_fn(k + 2, move |x| {
                if x & all == all {
                    x ^ (1 << k)
                } else {
                    x
                }
            });
            let verdict = check_equivalence(&c, &oracle, &fixed, &opts()).unwrap();
            assert!(verdict.passed(), "k={k} slots={slots}");

            let mut rest = controls.clone();
            rest.push(target);
            rest.push(dirty);
            let contract = PromiseContract {
                promise_qubits: clean.clone(),
                target_qubits: rest,
                target_oracle: oracle,
                strength: Strength::Strong,
            };
            let verdict = check_promise(&c, &contract, &opts()).unwrap();
            assert!(verdict.passed(), "strong k={k} slots={slots}");
        }
    }

    #[test]
    fn mcx_k3_is_the_four_toffoli_decomposition() {
        let mut ledger = AncillaLedger::with_pools(vec![], vec![q(4)]);
        let c = build_mcx(&wire_range(0, 3), q(3), &mut ledger).unwrap();
        assert_eq!(c.resource_report().count_ccx, 4);
    }

    #[test]
    fn mcx_linear_count_shallow_depth() {
        for k in [8u32, 16, 32, 64, 128, 256] {
            let controls = wire_range(0, k);
            let mut ledger = AncillaLedger::with_pools(vec![], vec![q(k + 1)]);
            let c = build_mcx(&controls, q(k), &mut ledger).unwrap();
            let r = c.resource_report();
            assert!(
                r.total_gates <= 16 * k as u64 + 8,
                "count k={k}: {}",
                r.total_gates
            );
            let logk = (k as f64).log2();
            assert!(
                (r.depth as f64) <= 36.0 * logk + 20.0,
                "depth k={k}: {}",
                r.depth
            );
        }
    }

    #[test]
    fn fanout1_semantics_and_depth() {
        let c = build_fanout1(q(0), &[q(1)]).unwrap();
        assert_eq!(c.gates(), &[Gate::cx(q(0), q(1))]);
        assert_eq!(c.compute_depth(), 1);

        // n=5: control set flips every target.
        let c = build_fanout1(q(0), &wire_range(1, 6)).unwrap();
        assert_eq!(simulate(&c, BasisState(0b000001)).0, 0b111111);

        for n in [5u32, 8, 13, 16] {
            let targets = wire_range(1, n + 1);
            let c = build_fanout1(q(0), &targets).unwrap();
            let bound = 2 * ((n as f64 + 1.0).log2().ceil() as u64) + 1;
            assert!(c.compute_depth() <= bound, "n={n}: {}", c.compute_depth());
            let oracle = PermutationOracle::from_fn(n + 1, move |x| {
                if x & 1 == 1 {
                    x ^ (((1u64 << n) - 1) << 1)
                } else {
                    x
                }
            });
            if n <= 13 {
                let verdict = check_equivalence(&c, &oracle, &[], &opts()).unwrap();
                assert!(verdict.passed(), "n={n}");
            }
        }
        // The spec-pinned point: n=8 fits in depth 2*ceil(log2 9) = 8.
        let c = build_fanout1(q(0), &wire_range(1, 9)).unwrap();
        assert!(c.compute_depth() <= 8);
    }

    #[test]
    fn fanout2_matches_its_oracle() {
        // Single triple behaves as CCX once the control is set.
        let mut ledger = AncillaLedger::with_pools(vec![], vec![q(4)]);
        let c = build_fanout2(q(0), &[(q(1), q(2), q(3))], &mut ledger).unwrap();
        let oracle = PermutationOracle::from_fn(4, |x| {
            if x & 0b0111 == 0b0111 {
                x ^ 0b1000
            } else {
                x
            }
        });
        let verdict = check_dirty_restoration(&c, &[q(4)], &oracle, &opts()).unwrap();
        assert!(verdict.passed(), "{:?}", verdict.mismatches);

        // n = 4 triples, exhaustive over 2^13 states; c = 0 is the identity.
        let triples: Vec<_> = (0..4)
            .map(|j| (q(3 * j + 1), q(3 * j + 2), q(3 * j + 3)))
            .collect();
        let mut ledger = AncillaLedger::new();
        let c = build_fanout2(q(0), &triples, &mut ledger).unwrap();
        let oracle = PermutationOracle::from_fn(13, |x| {
            if x & 1 == 0 {
                return x;
            }
            let mut out = x;
            for j in 0..4 {
                let a = 3 * j + 1;
                if (x >> a) & 1 == 1 && (x >> (a + 1)) & 1 == 1 {
                    out ^= 1 << (a + 2);
                }
            }
            out
        });
        let verdict = check_equivalence(&c, &oracle, &[], &opts()).unwrap();
        assert!(verdict.passed(), "{:?}", verdict.mismatches);

        // Odd triple counts exercise the single-element half.
        let triples: Vec<_> = (0..3)
            .map(|j| (q(3 * j + 1), q(3 * j + 2), q(3 * j + 3)))
            .collect();
        let c = build_fanout2(q(0), &triples, &mut AncillaLedger::new()).unwrap();
        let oracle = PermutationOracle::from_fn(10, |x| {
            if x & 1 == 0 {
                return x;
            }
            let mut out = x;
            for j in 0..3 {
                let a = 3 * j + 1;
                if (x >> a) & 1 == 1 && (x >> (a + 1)) & 1 == 1 {
                    out ^= 1 << (a + 2);
                }
            }
            out
        });
        assert!(check_equivalence(&c, &oracle, &[], &opts()).unwrap().passed());
    }

    #[test]
    fn ladder1_matches_sequential_reference() {
        for n in [2usize, 3, 5, 8, 11] {
            let wires = wire_range(0, n as u32);
            let c = build_ladder1(&wires, false).unwrap();
            // Reference: descending CX ladder from the figure.
            let mut reference = Vec::new();
            for i in (1..n).rev() {
                reference.cx(wires[i - 1], wires[i]);
            }
            let r = Circuit::from_gates(n as u32, reference).unwrap();
            let oracle = truth_table(&r).unwrap();
            assert!(check_equivalence(&c, &oracle, &[], &opts()).unwrap().passed());

            let fwd = build_ladder1(&wires, false).unwrap();
            let adj = build_ladder1(&wires, true).unwrap();
            let mut both = fwd.gates().to_vec();
            both.extend_from_slice(adj.gates());
            let compose = Circuit::from_gates(n as u32, both).unwrap();
            let id = PermutationOracle::identity(n as u32);
            assert!(check_equivalence(&compose, &id, &[], &opts()).unwrap().passed());
        }
        // 1000...0 pattern under the sequential ladder: only wire 1 flips.
        let c = build_ladder1(&wire_range(0, 6), false).unwrap();
        assert_eq!(simulate(&c, BasisState(0b000001)).0, 0b000011);
    }

    #[test]
    fn ladder2_single_gate_base_case() {
        let mut ledger = AncillaLedger::new();
        let c = build_ladder2_ancilla(&wire_range(0, 3), &mut ledger, false).unwrap();
        assert_eq!(c.gates(), &[Gate::ccx(q(0), q(1), q(2))]);
        assert_eq!(ledger.high_water_clean(), 0);
    }

    #[test]
    fn ladder2_matches_naive_reference_and_restores_ancillas() {
        use crate::sim::{check_promise, PromiseContract, Strength};
        for n in [4usize, 5, 8] {
            let wires = wire_range(0, 2 * n as u32 + 1);
            let need = ladder2_scratch_need(n);
            let anc = wire_range(2 * n as u32 + 1, 2 * n as u32 + 1 + need as u32);
            let mut ledger = AncillaLedger::with_pools(anc.clone(), vec![]);
            for adjoint in [false, true] {
                let c = build_ladder2_ancilla(&wires, &mut ledger, adjoint).unwrap();
                let reference =
                    Circuit::from_gates(wires.len() as u32, naive_ladder2(&wires, adjoint))
                        .unwrap();
                let oracle = truth_table(&reference).unwrap();
                // Clean entry: exact permutation, ancillas back to zero.
                let fixed: Vec<(Qubit, bool)> = anc.iter().map(|w| (*w, false)).collect();
                let full = PermutationOracle::from_fn(c.num_qubits(), {
                    let inner = oracle.clone();
                    let mask = (1u64 << wires.len()) - 1;
                    move |x| (x & !mask) | inner.apply(x & mask)
                });
                let verdict = check_equivalence(&c, &full, &fixed, &opts()).unwrap();
                assert!(
                    verdict.passed(),
                    "n={n} adjoint={adjoint}: {:?}",
                    &verdict.mismatches[..verdict.mismatches.len().min(4)]
                );
                // Arbitrary entry: the ancilla register is still preserved,
                // which is what the promise relabeling relies on.
                let contract = PromiseContract {
                    promise_qubits: anc.clone(),
                    target_qubits: wires.clone(),
                    target_oracle: oracle,
                    strength: Strength::Strong,
                };
                let verdict = check_promise(&c, &contract, &opts()).unwrap();
                assert!(verdict.passed(), "strong n={n} adjoint={adjoint}");
            }
        }
    }

    #[test]
    fn ladder2_adjoint_is_gate_for_gate_reversal() {
        let wires = wire_range(0, 17);
        let need = ladder2_scratch_need(8);
        let mut ledger = AncillaLedger::with_pools(wire_range(17, 17 + need as u32), vec![]);
        let fwd = build_ladder2_ancilla(&wires, &mut ledger, false).unwrap();
        let adj = build_ladder2_ancilla(&wires, &mut ledger, true).unwrap();
        let mut rev = fwd.gates().to_vec();
        rev.reverse();
        assert_eq!(rev, adj.gates());
    }

    #[test]
    fn ladderk_reduces_to_lower_orders() {
        let mut ledger = AncillaLedger::new();
        let k1 = build_ladderk(1, &wire_range(0, 5), &mut ledger, false).unwrap();
        let l1 = build_ladder1(&wire_range(0, 5), false).unwrap();
        assert_eq!(k1.gates(), l1.gates());

        let need = ladderk_scratch_need(2, 9);
        let mut ledger = AncillaLedger::with_pools(wire_range(9, 9 + need as u32), vec![]);
        let k2 = build_ladderk(2, &wire_range(0, 9), &mut ledger, false).unwrap();
        let l2 = build_ladder2_ancilla(&wire_range(0, 9), &mut ledger, false).unwrap();
        assert_eq!(k2.gates(), l2.gates());
    }

    #[test]
    fn ladderk_k3_matches_naive_sequential_reference() {
        let k = 3usize;
        let n = 3usize;
        let wires = wire_range(0, (k * n + 1) as u32);
        let need = ladderk_scratch_need(k, wires.len());
        let anc = wire_range(10, 10 + need as u32);
        let mut ledger = AncillaLedger::with_pools(anc.clone(), vec![]);
        let c = build_ladderk(k, &wires, &mut ledger, false).unwrap();
        // Naive descending C3X ladder as the oracle permutation.
        let oracle = PermutationOracle::from_fn(10, |x| {
            let mut out = x;
            for i in (0..3).rev() {
                let ctl = 0b111u64 << (3 * i);
                if out & ctl == ctl {
                    out ^= 1 << (3 * (i + 1));
                }
            }
            out
        });
        let fixed: Vec<(Qubit, bool)> = anc.iter().map(|w| (*w, false)).collect();
        let full = PermutationOracle::from_fn(c.num_qubits(), {
            let mask = (1u64 << 10) - 1;
            move |x| (x & !mask) | oracle.apply(x & mask)
        });
        let verdict = check_equivalence(&c, &full, &fixed, &opts()).unwrap();
        assert!(verdict.passed(), "{:?}", verdict.mismatches);
    }

    #[test]
    fn promise_ladderk_is_strong() {
        use crate::sim::{check_promise, PromiseContract, Strength};
        // k=2, n=4: data wires 0..9, promise the scratch wires.
        let wires = wire_range(0, 9);
        let need = ladderk_scratch_need(2, 9);
        let promise = wire_range(9, 9 + need as u32);
        let c = build_promise_ladderk(2, &wires, &promise, false).unwrap();
        let reference = Circuit::from_gates(9, naive_ladder2(&wires, false)).unwrap();
        let contract = PromiseContract {
            promise_qubits: promise.clone(),
            target_qubits: wires.clone(),
            target_oracle: truth_table(&reference).unwrap(),
            strength: Strength::Strong,
        };
        let verdict = check_promise(&c, &contract, &opts()).unwrap();
        assert!(verdict.passed(), "{:?}", verdict.mismatches);

        // Adjoint composes with the forward build to the identity.
        let adj = build_promise_ladderk(2, &wires, &promise, true).unwrap();
        let mut both = c.gates().to_vec();
        both.extend_from_slice(adj.gates());
        let compose = Circuit::from_gates(c.num_qubits(), both).unwrap();
        let id = PermutationOracle::identity(compose.num_qubits());
        assert!(check_equivalence(&compose, &id, &[], &opts()).unwrap().passed());
    }

    #[test]
    fn v2_naive_structure() {
        let c = build_v2_naive(&wire_range(0, 3)).unwrap();
        assert_eq!(c.gates(), &[Gate::ccx(q(0), q(1), q(2))]);
        // n=5 pairs: 2n-1 = 9 CCX.
        let c = build_v2_naive(&wire_range(0, 11)).unwrap();
        assert_eq!(c.resource_report().count_ccx, 9);

        // Permutation equals the composition of the two ladder truth tables
        // at n=4: L2 over the lower 7 wires (adjoint) then L2 over all 9.
        let wires = wire_range(0, 9);
        let mut gates = naive_ladder2(&wires[..7], true);
        gates.extend(naive_ladder2(&wires, false));
        let reference = Circuit::from_gates(9, gates).unwrap();
        let c = build_v2_naive(&wires).unwrap();
        let oracle = truth_table(&reference).unwrap();
        assert!(check_equivalence(&c, &oracle, &[], &opts()).unwrap().passed());
    }

    #[test]
    fn primitive_scaling_is_linear_gates_log_depth() {
        // gates(n)/n non-increasing within 10 percent slack; depth fit at
        // {16,32} holds with 10 percent slack at {64,128,256}.
        let mut per_n = Vec::new();
        let mut depths = Vec::new();
        for n in [16u32, 32, 64, 128, 256] {
            let c = build_fanout1(q(0), &wire_range(1, n + 1)).unwrap();
            let r = c.resource_report();
            per_n.push(r.total_gates as f64 / n as f64);
            depths.push((n, r.depth as f64));
        }
        for w in per_n.windows(2) {
            assert!(w[1] <= w[0] * 1.10, "gates per target grew: {:?}", per_n);
        }
        let (n0, d0) = depths[0];
        let (n1, d1) = depths[1];
        let alpha = (d1 - d0) / ((n1 as f64).log2() - (n0 as f64).log2());
        let beta = d0 - alpha * (n0 as f64).log2();
        for &(n, d) in &depths[2..] {
            let bound = (alpha * (n as f64).log2() + beta) * 1.10;
            assert!(d <= bound, "depth at n={n}: {d} > {bound}");
        }
    }
}


/// Flip every target iff all controls are set: the controlled fan-out,
/// realized as two plain fan-outs around one multi-controlled X on a pivot
/// target.
pub(crate) fn emit_ctrl_fanout(
    sink: &mut Vec<Gate>,
    controls: &[Qubit],
    targets: &[Qubit],
    extra_dirty: &[Qubit],
) -> Result<(), SynthError> {
    debug_assert!(!targets.is_empty());
    if controls.is_empty() {
        for t in targets {
            sink.x(*t);
        }
        return Ok(());
    }
    let pivot = targets[0];
    let rest = &targets[1..];
    let mut pool: Vec<Qubit> = rest.to_vec();
    pool.extend_from_slice(extra_dirty);
    emit_fanout1(sink, pivot, rest);
    emit_controlled_flip(sink, controls, pivot, &[], &pool, 0)?;
    emit_fanout1(sink, pivot, rest);
    Ok(())
}
