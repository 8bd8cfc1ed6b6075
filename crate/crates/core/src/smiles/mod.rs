//! SMILES parsing into a validated heavy-atom molecular graph.
//!
//! The accepted grammar is the organic subset plus bracket atoms, bond
//! symbols, branches, ring closures (including `%nn`) and dots; see
//! `docs/smiles_grammar.md`. Stereo markers are read and discarded.

mod elements;
mod parser;
mod rings;

pub use elements::Element;
pub use parser::parse_smiles;
pub use rings::{sssr, Ring};

use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BondOrder {
    Single,
    Double,
    Triple,
    Aromatic,
}

impl BondOrder {
    /// Contribution to an atom's bond-order sum, in half-units (aromatic = 1.5).
    pub fn half_units(self) -> u32 {
        match self {
            BondOrder::Single => 2,
            BondOrder::Double => 4,
            BondOrder::Triple => 6,
            BondOrder::Aromatic => 3,
        }
    }

    /// Integer code used when hashing atom environments.
    pub fn code(self) -> i64 {
        match self {
            BondOrder::Single => 1,
            BondOrder::Double => 2,
            BondOrder::Triple => 3,
            BondOrder::Aromatic => 4,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Atom {
    pub element: Element,
    pub formal_charge: i32,
    pub isotope: Option<u16>,
    pub aromatic: bool,
    /// Hydrogen count written inside brackets; `None` for organic-subset atoms.
    pub explicit_h: Option<u8>,
    pub implicit_h: u8,
    pub degree: usize,
    pub in_ring: bool,
}

impl Atom {
    /// Total attached hydrogens. Bracket atoms carry theirs in `implicit_h` too.
    pub fn total_h(&self) -> u8 {
        self.implicit_h
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Bond {
    pub endpoints: (usize, usize),
    pub order: BondOrder,
    pub in_ring: bool,
}

impl Bond {
    pub fn other(&self, atom: usize) -> usize {
        if self.endpoints.0 == atom {
            self.endpoints.1
        } else {
            self.endpoints.0
        }
    }
}

/// Things the parser accepted but did not keep.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ParseReport {
    pub stereo_markers: usize,
    pub dropped_fragments: usize,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone)]
pub struct MolecularGraph {
    pub atoms: Vec<Atom>,
    pub bonds: Vec<Bond>,
    pub rings: Vec<Ring>,
    /// Character count of the original (trimmed) input, including dropped fragments.
    pub smiles_length: usize,
    pub source_smiles: String,
    pub report: ParseReport,
    adjacency: Vec<Vec<(usize, usize)>>,
}

impl MolecularGraph {
    pub(crate) fn new(
        atoms: Vec<Atom>,
        bonds: Vec<Bond>,
        rings: Vec<Ring>,
        source: &str,
        report: ParseReport,
    ) -> Self {
        let mut adjacency = vec![Vec::new(); atoms.len()];
        for (i, b) in bonds.iter().enumerate() {
            adjacency[b.endpoints.0].push((b.endpoints.1, i));
            adjacency[b.endpoints.1].push((b.endpoints.0, i));
        }
        MolecularGraph {
            atoms,
            bonds,
            rings,
            smiles_length: smiles_length(source),
            source_smiles: source.trim().to_string(),
            report,
            adjacency,
        }
    }

    pub fn atom_count(&self) -> usize {
        self.atoms.len()
    }

    pub fn bond_count(&self) -> usize {
        self.bonds.len()
    }

    pub fn ring_count(&self) -> usize {
        self.rings.len()
    }

    /// `(neighbor, bond index)` pairs of an atom.
    pub fn neighbors(&self, atom: usize) -> &[(usize, usize)] {
        &self.adjacency[atom]
    }

    /// All-pairs topological distances by BFS from every atom.
    /// Unreachable pairs are `usize::MAX`.
    pub fn distance_matrix(&self) -> Vec<Vec<usize>> {
        let n = self.atoms.len();
        let mut out = vec![vec![usize::MAX; n]; n];
        let mut queue = std::collections::VecDeque::new();
        for (src, row) in out.iter_mut().enumerate() {
            row[src] = 0;
            queue.push_back(src);
            while let Some(u) = queue.pop_front() {
                for &(w, _) in &self.adjacency[u] {
                    if row[w] == usize::MAX {
                        row[w] = row[u] + 1;
                        queue.push_back(w);
                    }
                }
            }
        }
        out
    }
}

/// Character count of the whitespace-trimmed string.
pub fn smiles_length(text: &str) -> usize {
    text.trim().chars().count()
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SmilesErrorKind {
    #[error("empty SMILES")]
    Empty,
    #[error("unexpected character '{0}'")]
    UnexpectedChar(char),
    #[error("unknown element '{0}'")]
    UnknownElement(String),
    #[error("unclosed branch")]
    UnclosedBranch,
    #[error("')' without matching '('")]
    UnmatchedBranchClose,
    #[error("unmatched ring closure {0}")]
    UnmatchedRingClosure(u32),
    #[error("conflicting bond symbols on ring closure {0}")]
    ConflictingRingBond(u32),
    #[error("duplicate bond between the same atoms")]
    DuplicateBond,
    #[error("ring closure bonds an atom to itself")]
    SelfBond,
    #[error("bond symbol not followed by an atom")]
    DanglingBond,
    #[error("bond or branch without a preceding atom")]
    MissingAtom,
    #[error("unterminated bracket atom")]
    UnclosedBracket,
    #[error("malformed bracket atom: {0}")]
    InvalidBracket(String),
    #[error("element {0} cannot be aromatic")]
    InvalidAromatic(String),
    #[error("aromatic bond between non-aromatic atoms")]
    InvalidAromaticBond,
    #[error("aromatic atom outside any ring")]
    AromaticOutsideRing,
    #[error("{element} exceeds its allowed valence (bond order sum {sum})")]
    ValenceExceeded { element: String, sum: u32 },
    #[error("no heavy atoms in the largest fragment")]
    EmptyFragment,
}

/// A parse failure and the character offset it refers to.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{kind} at offset {offset}")]
pub struct SmilesError {
    pub offset: usize,
    pub kind: SmilesErrorKind,
}

impl SmilesError {
    pub(crate) fn new(offset: usize, kind: SmilesErrorKind) -> Self {
        SmilesError { offset, kind }
    }
}
