//! Classical reversible simulation of {CCX, CX, X} circuits as permutations
//! of basis states.
//!
//! For this gate set, agreement with an oracle on all basis states is full
//! unitary equivalence (every gate is a permutation matrix), so exhaustive
//! sweeps give certainty, not confidence. Above the exhaustive cap the
//! checks fall back to seeded uniform sampling.
//!
//! Sweeps are data-parallel over basis states when the `parallel` feature
//! is enabled; per-chunk verdicts merge associatively.

use crate::circuit::{Circuit, Qubit};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use serde::Serialize;
use std::sync::Arc;

/// Exhaustive sweeps run at or below this qubit count by default; the CLI
/// overrides it through `QARITH_EXHAUSTIVE_CAP`.
pub const DEFAULT_EXHAUSTIVE_CAP: u32 = 22;
/// Sample count used by sampled-mode checks.
pub const DEFAULT_SAMPLES: u64 = 100_000;
/// Documented default seed for sampled-mode checks.
pub const DEFAULT_SEED: u64 = 0x5EED_0A17;
/// Verdicts carry at most this many witnesses.
pub const MAX_WITNESSES: usize = 16;

/// Computational basis state as a bitmask; bit i is the value of qubit i.
#[derive(Copy, Clone, PartialEq, Eq, Debug)]
pub struct BasisState(pub u64);

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum SimError {
    #[error("{qubits} qubits exceed the exhaustive cap of {cap}")]
    CapExceeded { qubits: u32, cap: u32 },
    #[error("oracle arity {arity} matches neither the full width {full} nor the free width {free}")]
    ArityMismatch { arity: u32, full: u32, free: u32 },
}

/// A pure bijection on basis states defining intended semantics; the ground
/// truth every builder is verified against.
#[derive(Clone)]
pub struct PermutationOracle {
    arity: u32,
    f: Arc<dyn Fn(u64) -> u64 + Send + Sync>,
}

impl PermutationOracle {
    pub fn from_fn(arity: u32, f: impl Fn(u64) -> u64 + Send + Sync + 'static) -> Self {
        PermutationOracle { arity, f: Arc::new(f) }
    }

    pub fn from_table(table: Vec<u64>) -> Self {
        let arity = table.len().trailing_zeros();
        assert_eq!(1usize << arity, table.len(), "table length must be a power of two");
        PermutationOracle {
            arity,
            f: Arc::new(move |x| table[x as usize]),
        }
    }

    pub fn identity(arity: u32) -> Self {
        PermutationOracle::from_fn(arity, |x| x)
    }

    pub fn arity(&self) -> u32 {
        self.arity
    }

    pub fn apply(&self, x: u64) -> u64 {
        (self.f)(x)
    }

    /// Exhaustively checks bijectivity (small arities only).
    pub fn is_bijection(&self) -> bool {
        let n = 1u64 << self.arity;
        let mut seen = vec![false; n as usize];
        for x in 0..n {
            let y = self.apply(x);
            if y >= n || seen[y as usize] {
                return false;
            }
            seen[y as usize] = true;
        }
        true
    }

    /// Sign of the permutation: true for even. Small arities only.
    pub fn parity_is_even(&self) -> bool {
        let n = 1usize << self.arity;
        let mut seen = vec![false; n];
        let mut transpositions = 0usize;
        for start in 0..n {
            if seen[start] {
                continue;
            }
            let mut len = 0usize;
            let mut x = start;
            while !seen[x] {
                seen[x] = true;
                x = self.apply(x as u64) as usize;
                len += 1;
            }
            transpositions += len - 1;
        }
        transpositions % 2 == 0
    }
}

/// Gates pre-lowered to mask pairs: flip `flip` iff all of `ctrl` are set.
#[derive(Copy, Clone)]
struct MaskGate {
    ctrl: u64,
    flip: u64,
}

fn compile(circuit: &Circuit) -> Vec<MaskGate> {
    assert!(
        circuit.num_qubits() <= 63,
        "simulation is limited to 63 qubits"
    );
    circuit
        .gates()
        .iter()
        .map(|g| {
            let mut ctrl = 0u64;
            for c in g.controls() {
                ctrl |= 1 << c.0;
            }
            MaskGate {
                ctrl,
                flip: 1 << g.target().0,
            }
        })
        .collect()
}

fn run(masks: &[MaskGate], mut state: u64) -> u64 {
    for m in masks {
        if state & m.ctrl == m.ctrl {
            state ^= m.flip;
        }
    }
    state
}

/// Applies each gate in order: X flips its target; CX and CCX flip the
/// target iff every control bit is set.
pub fn simulate(circuit: &Circuit, input: BasisState) -> BasisState {
    BasisState(run(&compile(circuit), input.0))
}

/// Tabulates the full bijection over all basis states.
pub fn truth_table(circuit: &Circuit) -> Result<PermutationOracle, SimError> {
    truth_table_capped(circuit, DEFAULT_EXHAUSTIVE_CAP)
}

pub fn truth_table_capped(circuit: &Circuit, cap: u32) -> Result<PermutationOracle, SimError> {
    let n = circuit.num_qubits();
    if n > cap {
        return Err(SimError::CapExceeded { qubits: n, cap });
    }
    let masks = compile(circuit);
    let table: Vec<u64> = (0u64..1 << n).map(|x| run(&masks, x)).collect();
    Ok(PermutationOracle::from_table(table))
}

#[derive(Copy, Clone, PartialEq, Eq, Debug, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
}

#[derive(Copy, Clone, PartialEq, Eq, Debug, Serialize)]
pub struct Mismatch {
    pub input: u64,
    pub expected: u64,
    pub actual: u64,
}

/// Outcome of a check; a mismatch is data, not an error.
#[derive(Clone, Debug, Serialize)]
pub struct Verdict {
    pub status: Status,
    pub checked: u64,
    pub mismatches: Vec<Mismatch>,
}

impl Verdict {
    pub fn passed(&self) -> bool {
        self.status == Status::Pass
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("verdict serializes")
    }

    fn from_parts(checked: u64, mut mismatches: Vec<Mismatch>, total_bad: u64) -> Verdict {
        mismatches.truncate(MAX_WITNESSES);
        Verdict {
            status: if total_bad == 0 { Status::Pass } else { Status::Fail },
            checked,
            mismatches,
        }
    }
}

#[derive(Copy, Clone, Debug)]
pub struct VerifyOptions {
    pub exhaustive_cap: u32,
    pub samples: u64,
    pub seed: u64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            exhaustive_cap: DEFAULT_EXHAUSTIVE_CAP,
            samples: DEFAULT_SAMPLES,
            seed: DEFAULT_SEED,
        }
    }
}

/// Accumulates mismatches keeping the lowest-input witnesses; merging is
/// associative, which is what makes the parallel sweep deterministic.
#[derive(Default)]
struct Partial {
    bad: u64,
    witnesses: Vec<Mismatch>,
}

impl Partial {
    fn note(&mut self, m: Mismatch) {
        self.bad += 1;
        if self.witnesses.len() < MAX_WITNESSES {
            self.witnesses.push(m);
        }
    }

    fn merge(mut self, mut other: Partial) -> Partial {
        // Chunks are processed in input order, so concatenation keeps the
        // witness list sorted by input.
        self.bad += other.bad;
        self.witnesses.append(&mut other.witnesses);
        self.witnesses.truncate(MAX_WITNESSES);
        self
    }
}

fn sweep_serial(range: u64, check: impl Fn(u64) -> Option<Mismatch> + Sync) -> Partial {
    let mut part = Partial::default();
    for x in 0..range {
        if let Some(m) = check(x) {
            part.note(m);
        }
    }
    part
}

#[cfg(feature = "parallel")]
fn sweep(range: u64, check: impl Fn(u64) -> Option<Mismatch> + Sync) -> Partial {
    use rayon::prelude::*;
    const CHUNK: u64 = 1 << 14;
    let chunks = range.div_ceil(CHUNK);
    (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut part = Partial::default();
            let lo = c * CHUNK;
            let hi = (lo + CHUNK).min(range);
            for x in lo..hi {
                if let Some(m) = check(x) {
                    part.note(m);
                }
            }
            part
        })
        .reduce(Partial::default, |a, b| a.merge(b))
}

#[cfg(not(feature = "parallel"))]
fn sweep(range: u64, check: impl Fn(u64) -> Option<Mismatch> + Sync) -> Partial {
    sweep_serial(range, check)
}

/// Exhaustive full-width equivalence on the current thread, regardless of
/// the `parallel` feature; the benchmark suite compares the two paths.
pub fn check_equivalence_serial(circuit: &Circuit, oracle: &PermutationOracle) -> Verdict {
    let n = circuit.num_qubits();
    assert!(n <= DEFAULT_EXHAUSTIVE_CAP, "serial sweep is exhaustive-only");
    let masks = compile(circuit);
    let part = sweep_serial(1u64 << n, |x| {
        let out = run(&masks, x);
        let expected = oracle.apply(x);
        (out != expected).then_some(Mismatch {
            input: x,
            expected,
            actual: out,
        })
    });
    Verdict::from_parts(1u64 << n, part.witnesses, part.bad)
}

fn sampled_sweep(
    width: u32,
    opts: &VerifyOptions,
    check: impl Fn(u64) -> Option<Mismatch>,
) -> Partial {
    let mut rng = ChaCha12Rng::seed_from_u64(opts.seed);
    let mask = if width == 64 { u64::MAX } else { (1u64 << width) - 1 };
    let mut part = Partial::default();
    for _ in 0..opts.samples {
        let x: u64 = rng.random::<u64>() & mask;
        if let Some(m) = check(x) {
            part.note(m);
        }
    }
    part
}

/// Expands a free-subspace index into a full state given fixed bits.
fn scatter(free: &[Qubit], fixed_mask: u64, x: u64) -> u64 {
    let mut s = fixed_mask;
    for (i, w) in free.iter().enumerate() {
        if (x >> i) & 1 == 1 {
            s |= 1 << w.0;
        }
    }
    s
}

fn gather(free: &[Qubit], s: u64) -> u64 {
    let mut x = 0u64;
    for (i, w) in free.iter().enumerate() {
        if (s >> w.0) & 1 == 1 {
            x |= 1 << i;
        }
    }
    x
}

/// Checks `circuit` against `oracle`, optionally pinning some qubits.
///
/// With `oracle.arity == num_qubits` the oracle maps full states; with
/// `oracle.arity == free qubit count` it maps the free subspace and the
/// fixed qubits must come back unchanged.
pub fn check_equivalence(
    circuit: &Circuit,
    oracle: &PermutationOracle,
    fixed: &[(Qubit, bool)],
    opts: &VerifyOptions,
) -> Result<Verdict, SimError> {
    let n = circuit.num_qubits();
    let masks = compile(circuit);
    let free: Vec<Qubit> = (0..n)
        .map(Qubit)
        .filter(|w| fixed.iter().all(|(f, _)| f != w))
        .collect();
    let fixed_mask: u64 = fixed
        .iter()
        .filter(|(_, v)| *v)
        .fold(0, |m, (w, _)| m | (1 << w.0));
    let width = free.len() as u32;

    let full_mode = if oracle.arity() == n {
        true
    } else if oracle.arity() == width {
        false
    } else {
        return Err(SimError::ArityMismatch {
            arity: oracle.arity(),
            full: n,
            free: width,
        });
    };

    let check = |x: u64| -> Option<Mismatch> {
        let input = scatter(&free, fixed_mask, x);
        let out = run(&masks, input);
        let expected = if full_mode {
            oracle.apply(input)
        } else {
            scatter(&free, fixed_mask, oracle.apply(x))
        };
        if out != expected {
            Some(Mismatch {
                input,
                expected,
                actual: out,
            })
        } else {
            None
        }
    };

    let part = if width <= opts.exhaustive_cap {
        sweep(1u64 << width, check)
    } else {
        sampled_sweep(width, opts, check)
    };
    let checked = if width <= opts.exhaustive_cap {
        1u64 << width
    } else {
        opts.samples
    };
    Ok(Verdict::from_parts(checked, part.witnesses, part.bad))
}

/// Like [`check_equivalence`] over the full width, restricted to inputs
/// accepted by `filter` (used where valid inputs are not a bit rectangle,
/// e.g. modular-adder registers holding values below the modulus).
pub fn check_equivalence_filtered(
    circuit: &Circuit,
    oracle: &PermutationOracle,
    filter: impl Fn(u64) -> bool + Sync,
    opts: &VerifyOptions,
) -> Result<Verdict, SimError> {
    let n = circuit.num_qubits();
    if oracle.arity() != n {
        return Err(SimError::ArityMismatch {
            arity: oracle.arity(),
            full: n,
            free: n,
        });
    }
    let masks = compile(circuit);
    let check = |x: u64| -> Option<Mismatch> {
        if !filter(x) {
            return None;
        }
        let out = run(&masks, x);
        let expected = oracle.apply(x);
        (out != expected).then_some(Mismatch {
            input: x,
            expected,
            actual: out,
        })
    };
    let part = if n <= opts.exhaustive_cap {
        sweep(1u64 << n, check)
    } else {
        sampled_sweep(n, opts, check)
    };
    let checked = if n <= opts.exhaustive_cap { 1u64 << n } else { opts.samples };
    Ok(Verdict::from_parts(checked, part.witnesses, part.bad))
}

#[derive(Copy, Clone, PartialEq, Eq, Debug)]
pub enum Strength {
    Weak,
    Strong,
}

/// Required behavior of a promise gate: when the promise register is all
/// zero the target register is mapped by `target_oracle`; a strong gate
/// additionally preserves the promise register on every input.
pub struct PromiseContract {
    pub promise_qubits: Vec<Qubit>,
    pub target_qubits: Vec<Qubit>,
    pub target_oracle: PermutationOracle,
    pub strength: Strength,
}

/// Checks a promise contract.
///
/// Weak: for every basis input with all promise bits zero, the output has
/// promise bits zero and target bits mapped by the target oracle (any other
/// qubits must be untouched on those inputs). Strong: additionally, promise
/// bits are unchanged by the circuit on every basis input.
pub fn check_promise(
    circuit: &Circuit,
    contract: &PromiseContract,
    opts: &VerifyOptions,
) -> Result<Verdict, SimError> {
    let n = circuit.num_qubits();
    if contract.target_oracle.arity() != contract.target_qubits.len() as u32 {
        return Err(SimError::ArityMismatch {
            arity: contract.target_oracle.arity(),
            full: n,
            free: contract.target_qubits.len() as u32,
        });
    }
    let masks = compile(circuit);
    let promise_mask: u64 = contract
        .promise_qubits
        .iter()
        .fold(0, |m, w| m | (1 << w.0));
    let targets = contract.target_qubits.clone();
    let strong = contract.strength == Strength::Strong;
    let oracle = contract.target_oracle.clone();

    let check = |x: u64| -> Option<Mismatch> {
        let out = run(&masks, x);
        if x & promise_mask == 0 {
            let expected =
                (x & !gather_mask(&targets)) | scatter_bits(&targets, oracle.apply(gather(&targets, x)));
            if out != expected {
                return Some(Mismatch {
                    input: x,
                    expected,
                    actual: out,
                });
            }
        } else if strong && (out & promise_mask) != (x & promise_mask) {
            return Some(Mismatch {
                input: x,
                expected: x & promise_mask,
                actual: out & promise_mask,
            });
        }
        None
    };

    let part = if n <= opts.exhaustive_cap {
        sweep(1u64 << n, check)
    } else {
        sampled_sweep(n, opts, check)
    };
    let checked = if n <= opts.exhaustive_cap { 1u64 << n } else { opts.samples };
    Ok(Verdict::from_parts(checked, part.witnesses, part.bad))
}

fn gather_mask(ws: &[Qubit]) -> u64 {
    ws.iter().fold(0, |m, w| m | (1 << w.0))
}

fn scatter_bits(ws: &[Qubit], x: u64) -> u64 {
    let mut s = 0u64;
    for (i, w) in ws.iter().enumerate() {
        if (x >> i) & 1 == 1 {
            s |= 1 << w.0;
        }
    }
    s
}

/// For every basis input: dirty bits unchanged AND the remaining bits are
/// transformed by `oracle` (arity = non-dirty width) regardless of the
/// dirty-bit values.
pub fn check_dirty_restoration(
    circuit: &Circuit,
    dirty: &[Qubit],
    oracle: &PermutationOracle,
    opts: &VerifyOptions,
) -> Result<Verdict, SimError> {
    let n = circuit.num_qubits();
    let rest: Vec<Qubit> = (0..n)
        .map(Qubit)
        .filter(|w| !dirty.contains(w))
        .collect();
    if oracle.arity() != rest.len() as u32 {
        return Err(SimError::ArityMismatch {
            arity: oracle.arity(),
            full: n,
            free: rest.len() as u32,
        });
    }
    let masks = compile(circuit);
    let dirty_mask = gather_mask(dirty);

    let check = |x: u64| -> Option<Mismatch> {
        let out = run(&masks, x);
        let expected = (x & dirty_mask) | scatter_bits(&rest, oracle.apply(gather(&rest, x)));
        (out != expected).then_some(Mismatch {
            input: x,
            expected,
            actual: out,
        })
    };
    let part = if n <= opts.exhaustive_cap {
        sweep(1u64 << n, check)
    } else {
        sampled_sweep(n, opts, check)
    };
    let checked = if n <= opts.exhaustive_cap { 1u64 << n } else { opts.samples };
    Ok(Verdict::from_parts(checked, part.witnesses, part.bad))
}
