//! Gate-level intermediate representation: gates, circuits, register
//! bookkeeping, resource metrics and the QASM-subset text format.
//!
//! Register values are little-endian: qubit index 0 of a register holds the
//! least significant bit. Gate lists are flat; builders flatten recursions.

use serde::Serialize;
use std::fmt;

/// Position in a circuit's qubit space.
#[derive(Copy, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Qubit(pub u32);

impl Qubit {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for Qubit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "q[{}]", self.0)
    }
}

/// Shorthand constructor used heavily by builders and tests.
pub fn q(i: u32) -> Qubit {
    Qubit(i)
}

/// Consecutive qubits `[lo, hi)` as a wire list.
pub fn wire_range(lo: u32, hi: u32) -> Vec<Qubit> {
    (lo..hi).map(Qubit).collect()
}

#[derive(Copy, Clone, PartialEq, Eq, Hash, Debug)]
pub enum GateKind {
    X,
    Cx,
    Ccx,
}

/// A classical reversible gate. Every kind is self-adjoint, which is what
/// makes circuit reversal implement the adjoint.
#[derive(Copy, Clone, PartialEq, Eq, Hash, Debug)]
pub enum Gate {
    X { target: Qubit },
    Cx { control: Qubit, target: Qubit },
    Ccx { controls: [Qubit; 2], target: Qubit },
}

impl Gate {
    pub fn x(target: Qubit) -> Gate {
        Gate::X { target }
    }

    pub fn cx(control: Qubit, target: Qubit) -> Gate {
        debug_assert_ne!(control, target, "cx control equals target");
        Gate::Cx { control, target }
    }

    pub fn ccx(c0: Qubit, c1: Qubit, target: Qubit) -> Gate {
        debug_assert!(
            c0 != c1 && c0 != target && c1 != target,
            "ccx qubits must be pairwise distinct: {c0} {c1} {target}"
        );
        Gate::Ccx {
            controls: [c0, c1],
            target,
        }
    }

    pub fn kind(&self) -> GateKind {
        match self {
            Gate::X { .. } => GateKind::X,
            Gate::Cx { .. } => GateKind::Cx,
            Gate::Ccx { .. } => GateKind::Ccx,
        }
    }

    pub fn controls(&self) -> &[Qubit] {
        match self {
            Gate::X { .. } => &[],
            Gate::Cx { control, .. } => std::slice::from_ref(control),
            Gate::Ccx { controls, .. } => controls,
        }
    }

    pub fn target(&self) -> Qubit {
        match self {
            Gate::X { target } | Gate::Cx { target, .. } | Gate::Ccx { target, .. } => *target,
        }
    }

    pub fn qubits(&self) -> impl Iterator<Item = Qubit> + '_ {
        self.controls().iter().copied().chain(std::iter::once(self.target()))
    }

    fn validate(&self, num_qubits: u32) -> Result<(), CircuitError> {
        let mut seen: Vec<Qubit> = Vec::with_capacity(3);
        for w in self.qubits() {
            if w.0 >= num_qubits {
                return Err(CircuitError::QubitOutOfRange {
                    qubit: w.0,
                    num_qubits,
                });
            }
            if seen.contains(&w) {
                return Err(CircuitError::DuplicateQubit { qubit: w.0 });
            }
            seen.push(w);
        }
        Ok(())
    }
}

/// Role a register plays in a construction's qubit contract.
#[derive(Copy, Clone, PartialEq, Eq, Debug, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    Data,
    Control,
    Target,
    Promise,
    CleanAncilla,
    DirtyAncilla,
}

#[derive(Clone, Debug)]
pub struct RegisterEntry {
    pub name: String,
    pub role: Role,
    pub qubits: Vec<Qubit>,
}

/// Named roles over qubit indices. Entries are disjoint and cover the whole
/// qubit space of the circuit they belong to.
#[derive(Clone, Debug, Default)]
pub struct RegisterMap {
    entries: Vec<RegisterEntry>,
}

impl RegisterMap {
    pub fn new() -> Self {
        RegisterMap { entries: Vec::new() }
    }

    /// One anonymous data register over `[0, n)`.
    pub fn flat(n: u32) -> Self {
        let mut map = RegisterMap::new();
        map.push("q", Role::Data, wire_range(0, n));
        map
    }

    pub fn push(&mut self, name: &str, role: Role, qubits: Vec<Qubit>) {
        if qubits.is_empty() {
            return;
        }
        self.entries.push(RegisterEntry {
            name: name.to_string(),
            role,
            qubits,
        });
    }

    pub fn entries(&self) -> &[RegisterEntry] {
        &self.entries
    }

    pub fn qubits_with_role(&self, role: Role) -> Vec<Qubit> {
        let mut out: Vec<Qubit> = self
            .entries
            .iter()
            .filter(|e| e.role == role)
            .flat_map(|e| e.qubits.iter().copied())
            .collect();
        out.sort();
        out
    }

    fn validate(&self, num_qubits: u32) -> Result<(), CircuitError> {
        let mut seen = vec![false; num_qubits as usize];
        for e in &self.entries {
            for w in &e.qubits {
                if w.0 >= num_qubits {
                    return Err(CircuitError::BadRegisterMap(format!(
                        "register {} references {} outside [0, {})",
                        e.name, w, num_qubits
                    )));
                }
                if seen[w.index()] {
                    return Err(CircuitError::BadRegisterMap(format!(
                        "qubit {} appears in more than one register",
                        w
                    )));
                }
                seen[w.index()] = true;
            }
        }
        if let Some(i) = seen.iter().position(|covered| !covered) {
            return Err(CircuitError::BadRegisterMap(format!(
                "qubit q[{}] not covered by any register",
                i
            )));
        }
        Ok(())
    }
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum CircuitError {
    #[error("gate qubit q[{qubit}] out of range for a {num_qubits}-qubit circuit")]
    QubitOutOfRange { qubit: u32, num_qubits: u32 },
    #[error("gate uses qubit q[{qubit}] more than once")]
    DuplicateQubit { qubit: u32 },
    #[error("invalid register map: {0}")]
    BadRegisterMap(String),
    #[error("qasm parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

/// An ordered gate list over an indexed qubit space.
#[derive(Clone, Debug)]
pub struct Circuit {
    num_qubits: u32,
    gates: Vec<Gate>,
    registers: RegisterMap,
}

impl PartialEq for Circuit {
    /// Structural equality: qubit count and gate list. Register names are
    /// presentation metadata and do not survive QASM round trips.
    fn eq(&self, other: &Self) -> bool {
        self.num_qubits == other.num_qubits && self.gates == other.gates
    }
}

impl Circuit {
    pub fn new(num_qubits: u32) -> Self {
        Circuit {
            num_qubits,
            gates: Vec::new(),
            registers: RegisterMap::flat(num_qubits),
        }
    }

    pub fn from_gates(num_qubits: u32, gates: Vec<Gate>) -> Result<Self, CircuitError> {
        let mut c = Circuit::new(num_qubits);
        for g in gates {
            c.append_gate(g)?;
        }
        Ok(c)
    }

    pub fn with_registers(
        num_qubits: u32,
        gates: Vec<Gate>,
        registers: RegisterMap,
    ) -> Result<Self, CircuitError> {
        registers.validate(num_qubits)?;
        let mut c = Circuit::from_gates(num_qubits, gates)?;
        c.registers = registers;
        Ok(c)
    }

    pub fn num_qubits(&self) -> u32 {
        self.num_qubits
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn registers(&self) -> &RegisterMap {
        &self.registers
    }

    /// Appends `gate` at the end; gates are never reordered.
    pub fn append_gate(&mut self, gate: Gate) -> Result<(), CircuitError> {
        gate.validate(self.num_qubits)?;
        self.gates.push(gate);
        Ok(())
    }

    /// Gate order reversed. Implements the adjoint because every gate kind
    /// is self-adjoint.
    pub fn reverse(&self) -> Circuit {
        let mut gates = self.gates.clone();
        gates.reverse();
        Circuit {
            num_qubits: self.num_qubits,
            gates,
            registers: self.registers.clone(),
        }
    }

    /// Greedy as-soon-as-possible layer count: processing gates in order,
    /// each gate lands at 1 + max(layer of the last gate on any of its
    /// qubits); the depth is the maximum layer.
    pub fn compute_depth(&self) -> u64 {
        asap_depth(self.num_qubits, &self.gates)
    }

    /// ASAP layer assignment, one entry per gate (layers start at 1).
    pub fn asap_layers(&self) -> Vec<u64> {
        let mut frontier = vec![0u64; self.num_qubits as usize];
        let mut layers = Vec::with_capacity(self.gates.len());
        for g in &self.gates {
            let layer = 1 + g.qubits().map(|w| frontier[w.index()]).max().unwrap_or(0);
            for w in g.qubits() {
                frontier[w.index()] = layer;
            }
            layers.push(layer);
        }
        layers
    }

    pub fn resource_report(&self) -> ResourceReport {
        let mut count_x = 0u64;
        let mut count_cx = 0u64;
        let mut count_ccx = 0u64;
        for g in &self.gates {
            match g.kind() {
                GateKind::X => count_x += 1,
                GateKind::Cx => count_cx += 1,
                GateKind::Ccx => count_ccx += 1,
            }
        }
        let clean = self.registers.qubits_with_role(Role::CleanAncilla).len() as u64;
        let dirty = self.registers.qubits_with_role(Role::DirtyAncilla).len() as u64;
        ResourceReport {
            count_x,
            count_cx,
            count_ccx,
            total_gates: count_x + count_cx + count_ccx,
            depth: self.compute_depth(),
            qubits_data: self.num_qubits as u64 - clean - dirty,
            qubits_clean: clean,
            qubits_dirty: dirty,
        }
    }

    /// Deterministic textual form: header, one qubit-register declaration,
    /// then one line per gate in circuit order.
    pub fn export_qasm(&self) -> String {
        let mut out = String::with_capacity(32 + 16 * self.gates.len());
        out.push_str("OPENQASM 2.0;\n");
        out.push_str(&format!("qreg q[{}];\n", self.num_qubits));
        for g in &self.gates {
            match g {
                Gate::X { target } => out.push_str(&format!("x q[{}];\n", target.0)),
                Gate::Cx { control, target } => {
                    out.push_str(&format!("cx q[{}],q[{}];\n", control.0, target.0))
                }
                Gate::Ccx { controls, target } => out.push_str(&format!(
                    "ccx q[{}],q[{}],q[{}];\n",
                    controls[0].0, controls[1].0, target.0
                )),
            }
        }
        out
    }

    /// Parses the dialect written by [`Circuit::export_qasm`].
    pub fn import_qasm(text: &str) -> Result<Circuit, CircuitError> {
        let mut lines = text.lines().enumerate();
        let parse_err = |line: usize, msg: &str| CircuitError::Parse {
            line: line + 1,
            msg: msg.to_string(),
        };

        let (i, header) = lines
            .next()
            .ok_or_else(|| parse_err(0, "empty program"))?;
        if header.trim() != "OPENQASM 2.0;" {
            return Err(parse_err(i, "expected 'OPENQASM 2.0;' header"));
        }
        let (i, decl) = lines
            .next()
            .ok_or_else(|| parse_err(1, "missing qreg declaration"))?;
        let decl = decl.trim();
        let num_qubits: u32 = decl
            .strip_prefix("qreg q[")
            .and_then(|s| s.strip_suffix("];"))
            .ok_or_else(|| parse_err(i, "expected 'qreg q[N];'"))?
            .parse()
            .map_err(|_| parse_err(i, "qubit count does not fit in u32"))?;

        let mut circuit = Circuit::new(num_qubits);
        for (i, raw) in lines {
            let line = raw.trim();
            if line.is_empty() {
                continue;
            }
            let body = line
                .strip_suffix(';')
                .ok_or_else(|| parse_err(i, "missing ';'"))?;
            let (mnemonic, args) = body
                .split_once(' ')
                .ok_or_else(|| parse_err(i, "expected mnemonic and operands"))?;
            let mut ws = Vec::new();
            for a in args.split(',') {
                let idx: u32 = a
                    .trim()
                    .strip_prefix("q[")
                    .and_then(|s| s.strip_suffix(']'))
                    .ok_or_else(|| parse_err(i, "operands must look like q[i]"))?
                    .parse()
                    .map_err(|_| parse_err(i, "qubit index does not fit in u32"))?;
                ws.push(Qubit(idx));
            }
            let gate = match (mnemonic, ws.as_slice()) {
                ("x", [t]) => Gate::X { target: *t },
                ("cx", [c, t]) => Gate::Cx {
                    control: *c,
                    target: *t,
                },
                ("ccx", [a, b, t]) => Gate::Ccx {
                    controls: [*a, *b],
                    target: *t,
                },
                ("x", _) | ("cx", _) | ("ccx", _) => {
                    return Err(parse_err(i, "wrong operand count for mnemonic"))
                }
                _ => return Err(parse_err(i, "unknown mnemonic")),
            };
            circuit
                .append_gate(gate)
                .map_err(|e| parse_err(i, &e.to_string()))?;
        }
        Ok(circuit)
    }
}

/// ASAP depth over a raw gate list (used by builders before a [`Circuit`]
/// exists).
pub fn asap_depth(num_qubits: u32, gates: &[Gate]) -> u64 {
    let mut frontier = vec![0u64; num_qubits as usize];
    let mut depth = 0u64;
    for g in gates {
        let layer = 1 + g.qubits().map(|w| frontier[w.index()]).max().unwrap_or(0);
        for w in g.qubits() {
            frontier[w.index()] = layer;
        }
        depth = depth.max(layer);
    }
    depth
}

/// Gate counts by kind, ASAP depth and qubit totals by role.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ResourceReport {
    pub count_x: u64,
    pub count_cx: u64,
    pub count_ccx: u64,
    pub total_gates: u64,
    pub depth: u64,
    pub qubits_data: u64,
    pub qubits_clean: u64,
    pub qubits_dirty: u64,
}

impl ResourceReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Append helpers shared by all builders. Emission goes through plain
/// `Vec<Gate>` sinks; a `Circuit` is assembled once a construction is done.
pub(crate) trait Sink {
    fn x(&mut self, t: Qubit);
    fn cx(&mut self, c: Qubit, t: Qubit);
    fn ccx(&mut self, a: Qubit, b: Qubit, t: Qubit);
}

impl Sink for Vec<Gate> {
    fn x(&mut self, t: Qubit) {
        self.push(Gate::x(t));
    }
    fn cx(&mut self, c: Qubit, t: Qubit) {
        self.push(Gate::cx(c, t));
    }
    fn ccx(&mut self, a: Qubit, b: Qubit, t: Qubit) {
        self.push(Gate::ccx(a, b, t));
    }
}

/// Reverses the tail of `sink` starting at `from`; with self-adjoint gates
/// this turns the tail into its own adjoint.
pub(crate) fn reverse_tail(sink: &mut Vec<Gate>, from: usize) {
    sink[from..].reverse();
}
