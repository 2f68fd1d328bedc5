//! Allocation and tracking of clean, dirty and borrowed ancilla qubits.
//!
//! Each theorem's qubit contract ("one dirty ancilla", "no ancilla qubits")
//! is enforced through high-water marks recorded here and asserted by the
//! verification layer.

use crate::circuit::Qubit;
use std::collections::BTreeSet;

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum LedgerError {
    #[error("clean ancilla pool exhausted: requested {requested}, {available} available")]
    CleanExhausted { requested: usize, available: usize },
    #[error("insufficient idle dirty qubits: requested {requested}, {available} available")]
    DirtyExhausted { requested: usize, available: usize },
    #[error("released qubit {0} is not currently borrowed")]
    NotBusy(Qubit),
}

#[derive(Copy, Clone, PartialEq, Eq, Debug)]
enum Pool {
    Clean,
    Dirty,
}

/// Tracks clean and dirty ancilla pools during a recursive build.
///
/// Clean qubits are guaranteed |0> at borrow time and must be |0> again at
/// release; dirty qubits hold arbitrary states that must be restored. Both
/// facts are checked by simulation-backed tests, not repaired at runtime.
#[derive(Debug, Default, Clone)]
pub struct AncillaLedger {
    clean: BTreeSet<Qubit>,
    dirty: BTreeSet<Qubit>,
    busy: Vec<(Qubit, Pool)>,
    out_clean: usize,
    out_dirty: usize,
    high_water_clean: usize,
    high_water_dirty: usize,
}

impl AncillaLedger {
    pub fn new() -> Self {
        AncillaLedger::default()
    }

    pub fn with_pools(clean: Vec<Qubit>, dirty: Vec<Qubit>) -> Self {
        AncillaLedger {
            clean: clean.into_iter().collect(),
            dirty: dirty.into_iter().collect(),
            ..AncillaLedger::default()
        }
    }

    pub fn add_clean(&mut self, qubits: impl IntoIterator<Item = Qubit>) {
        self.clean.extend(qubits);
    }

    pub fn add_dirty(&mut self, qubits: impl IntoIterator<Item = Qubit>) {
        self.dirty.extend(qubits);
    }

    /// Borrows the `count` lowest-indexed clean qubits.
    pub fn borrow_clean(&mut self, count: usize) -> Result<Vec<Qubit>, LedgerError> {
        if self.clean.len() < count {
            return Err(LedgerError::CleanExhausted {
                requested: count,
                available: self.clean.len(),
            });
        }
        let taken: Vec<Qubit> = self.clean.iter().copied().take(count).collect();
        for w in &taken {
            self.clean.remove(w);
            self.busy.push((*w, Pool::Clean));
        }
        self.out_clean += count;
        self.high_water_clean = self.high_water_clean.max(self.out_clean);
        Ok(taken)
    }

    /// Borrows the `count` lowest-indexed idle dirty qubits not in `exclude`.
    pub fn borrow_dirty(
        &mut self,
        count: usize,
        exclude: &[Qubit],
    ) -> Result<Vec<Qubit>, LedgerError> {
        let taken: Vec<Qubit> = self
            .dirty
            .iter()
            .copied()
            .filter(|w| !exclude.contains(w))
            .take(count)
            .collect();
        if taken.len() < count {
            return Err(LedgerError::DirtyExhausted {
                requested: count,
                available: taken.len(),
            });
        }
        for w in &taken {
            self.dirty.remove(w);
            self.busy.push((*w, Pool::Dirty));
        }
        self.out_dirty += count;
        self.high_water_dirty = self.high_water_dirty.max(self.out_dirty);
        Ok(taken)
    }

    /// Returns qubits to their originating pools.
    pub fn release(&mut self, qubits: &[Qubit]) -> Result<(), LedgerError> {
        for w in qubits {
            let pos = self
                .busy
                .iter()
                .position(|(b, _)| b == w)
                .ok_or(LedgerError::NotBusy(*w))?;
            let (_, pool) = self.busy.swap_remove(pos);
            match pool {
                Pool::Clean => {
                    self.clean.insert(*w);
                    self.out_clean -= 1;
                }
                Pool::Dirty => {
                    self.dirty.insert(*w);
                    self.out_dirty -= 1;
                }
            }
        }
        Ok(())
    }

    pub fn busy_is_empty(&self) -> bool {
        self.busy.is_empty()
    }

    pub fn high_water_clean(&self) -> usize {
        self.high_water_clean
    }

    pub fn high_water_dirty(&self) -> usize {
        self.high_water_dirty
    }
}
