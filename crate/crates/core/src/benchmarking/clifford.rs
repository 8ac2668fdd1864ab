use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use crate::error::{Error, Result};
use crate::linalg::Mat2;
use crate::pulse::GateName;

/// Generator set the Clifford decompositions are drawn from, in tie-break order.
pub const GENERATORS: [GateName; 7] = [
    GateName::Identity,
    GateName::XPi,
    GateName::XHalf,
    GateName::XNegHalf,
    GateName::YPi,
    GateName::YHalf,
    GateName::YNegHalf,
];

pub const CLIFFORD_ORDER: usize = 24;
const SAME_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct CliffordElement {
    pub index: usize,
    pub unitary: Mat2,
    /// Generators in the order they are applied.
    pub decomposition: Vec<GateName>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CliffordTable {
    elements: Vec<CliffordElement>,
    /// `mul[i][j]` is the element equal to `U_i·U_j` (`j` applied first).
    mul: Vec<[usize; CLIFFORD_ORDER]>,
    inv: [usize; CLIFFORD_ORDER],
}

/// `U` and `V` agree up to a global phase.
fn same_up_to_phase(u: &Mat2, v: &Mat2) -> bool {
    ((u.adjoint() * v).trace().norm() - 2.0).abs() < SAME_TOL
}

fn decomposition_unitary(seq: &[GateName]) -> Mat2 {
    seq.iter()
        .fold(Mat2::identity(), |acc, g| g.target_unitary() * acc)
}

impl CliffordTable {
    /// Enumerate generator strings of length 1 to 3 in lexicographic order
    /// and keep the first string reaching each new element, which is the
    /// shortest one with ties broken by generator order.
    pub fn build() -> Result<Self> {
        let mut elements: Vec<CliffordElement> = Vec::new();
        let mut consider = |seq: Vec<GateName>| {
            let u = decomposition_unitary(&seq);
            if !elements.iter().any(|e| same_up_to_phase(&e.unitary, &u)) {
                elements.push(CliffordElement {
                    index: elements.len(),
                    unitary: u,
                    decomposition: seq,
                });
            }
        };
        for a in GENERATORS {
            consider(vec![a]);
        }
        for a in GENERATORS {
            for b in GENERATORS {
                consider(vec![a, b]);
            }
        }
        for a in GENERATORS {
            for b in GENERATORS {
                for c in GENERATORS {
                    consider(vec![a, b, c]);
                }
            }
        }
        if elements.len() != CLIFFORD_ORDER {
            return Err(Error::CliffordConstruction {
                found: elements.len(),
            });
        }
        let find = |u: &Mat2| elements.iter().position(|e| same_up_to_phase(&e.unitary, u));
        let mut mul = vec![[0usize; CLIFFORD_ORDER]; CLIFFORD_ORDER];
        for i in 0..CLIFFORD_ORDER {
            for j in 0..CLIFFORD_ORDER {
                let prod = elements[i].unitary * elements[j].unitary;
                mul[i][j] = find(&prod).ok_or(Error::CliffordConstruction { found: elements.len() })?;
            }
        }
        let mut inv = [0usize; CLIFFORD_ORDER];
        for (i, slot) in inv.iter_mut().enumerate() {
            *slot = (0..CLIFFORD_ORDER)
                .find(|&j| mul[j][i] == 0)
                .ok_or(Error::CliffordConstruction { found: elements.len() })?;
        }
        Ok(Self { elements, mul, inv })
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn elements(&self) -> &[CliffordElement] {
        &self.elements
    }

    pub fn element(&self, i: usize) -> &CliffordElement {
        &self.elements[i]
    }

    /// Index of the identity element (always 0).
    pub fn identity(&self) -> usize {
        0
    }

    /// Index of `U_i·U_j`.
    pub fn multiply(&self, i: usize, j: usize) -> usize {
        self.mul[i][j]
    }

    pub fn inverse(&self, i: usize) -> usize {
        self.inv[i]
    }

    /// Element matching `u` up to global phase.
    pub fn find(&self, u: &Mat2) -> Option<usize> {
        self.elements.iter().position(|e| same_up_to_phase(&e.unitary, u))
    }

    pub fn index_of_gate(&self, g: GateName) -> Result<usize> {
        self.find(&g.target_unitary()).ok_or(Error::UnsupportedGate(g))
    }

    /// Product of a sequence applied in order (first element first).
    pub fn compose(&self, seq: &[usize]) -> usize {
        seq.iter().fold(self.identity(), |acc, &c| self.mul[c][acc])
    }
}

pub fn build_clifford_table() -> Result<CliffordTable> {
    CliffordTable::build()
}

/// `m` uniformly drawn Clifford indices and the recovery element inverting
/// their product.
pub fn random_rb_sequence<R: Rng + ?Sized>(m: usize, table: &CliffordTable, rng: &mut R) -> (Vec<usize>, usize) {
    let seq: Vec<usize> = (0..m).map(|_| rng.random_range(0..table.len())).collect();
    let recovery = table.inverse(table.compose(&seq));
    (seq, recovery)
}
