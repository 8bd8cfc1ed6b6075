use std::collections::BTreeMap;

use super::elements::Element;
use super::rings::minimum_cycle_basis;
use super::{
    Atom, Bond, BondOrder, MolecularGraph, ParseReport, SmilesError, SmilesErrorKind as K,
};

#[derive(Debug, Clone)]
struct RawAtom {
    element: Element,
    charge: i32,
    isotope: Option<u16>,
    aromatic: bool,
    bracket_h: Option<u8>,
    offset: usize,
}

#[derive(Debug, Clone, Copy)]
struct RawBond {
    a: usize,
    b: usize,
    order: BondOrder,
    /// No bond symbol was written.
    implicit: bool,
}

#[derive(Debug, Clone, Copy)]
struct BondSymbol {
    order: BondOrder,
    offset: usize,
}

struct Parser<'a> {
    chars: Vec<char>,
    pos: usize,
    atoms: Vec<RawAtom>,
    bonds: Vec<RawBond>,
    branches: Vec<(usize, usize)>,
    rings: BTreeMap<u32, (usize, Option<BondSymbol>, usize)>,
    prev: Option<usize>,
    pending: Option<BondSymbol>,
    stereo: usize,
    source: &'a str,
}

/// Parse a SMILES string into a heavy-atom graph.
///
/// Multi-fragment input keeps the fragment with the most heavy atoms (first on
/// ties) and records the drop in the parse report.
pub fn parse_smiles(text: &str) -> Result<MolecularGraph, SmilesError> {
    let trimmed = text.trim();
    if trimmed.is_empty() {
        return Err(SmilesError::new(0, K::Empty));
    }
    let mut p = Parser {
        chars: trimmed.chars().collect(),
        pos: 0,
        atoms: Vec::new(),
        bonds: Vec::new(),
        branches: Vec::new(),
        rings: BTreeMap::new(),
        prev: None,
        pending: None,
        stereo: 0,
        source: text,
    };
    p.run()?;
    p.finish()
}

impl Parser<'_> {
    fn err<T>(&self, offset: usize, kind: K) -> Result<T, SmilesError> {
        Err(SmilesError::new(offset, kind))
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn run(&mut self) -> Result<(), SmilesError> {
        while let Some(c) = self.peek() {
            let at = self.pos;
            match c {
                '(' => {
                    let Some(prev) = self.prev else {
                        return self.err(at, K::MissingAtom);
                    };
                    if self.pending.is_some() {
                        return self.err(at, K::DanglingBond);
                    }
                    self.branches.push((prev, at));
                    self.pos += 1;
                }
                ')' => {
                    if self.pending.is_some() {
                        return self.err(at, K::DanglingBond);
                    }
                    let Some((atom, _)) = self.branches.pop() else {
                        return self.err(at, K::UnmatchedBranchClose);
                    };
                    self.prev = Some(atom);
                    self.pos += 1;
                }
                '.' => {
                    if self.pending.is_some() {
                        return self.err(at, K::DanglingBond);
                    }
                    if !self.branches.is_empty() {
                        return self.err(at, K::UnexpectedChar('.'));
                    }
                    self.prev = None;
                    self.pos += 1;
                }
                '-' | '=' | '#' | ':' | '/' | '\\' => {
                    if self.prev.is_none() {
                        return self.err(at, K::MissingAtom);
                    }
                    if self.pending.is_some() {
                        return self.err(at, K::UnexpectedChar(c));
                    }
                    let order = match c {
                        '=' => BondOrder::Double,
                        '#' => BondOrder::Triple,
                        ':' => BondOrder::Aromatic,
                        '/' | '\\' => {
                            self.stereo += 1;
                            BondOrder::Single
                        }
                        _ => BondOrder::Single,
                    };
                    self.pending = Some(BondSymbol { order, offset: at });
                    self.pos += 1;
                }
                '0'..='9' | '%' => self.ring_closure()?,
                '[' => {
                    let atom = self.bracket_atom()?;
                    self.add_atom(atom)?;
                }
                _ if c.is_ascii_alphabetic() => {
                    let atom = self.organic_atom()?;
                    self.add_atom(atom)?;
                }
                '*' => return self.err(at, K::UnknownElement("*".into())),
                _ => return self.err(at, K::UnexpectedChar(c)),
            }
        }
        let end = self.chars.len();
        if self.pending.is_some() {
            return self.err(end, K::DanglingBond);
        }
        if !self.branches.is_empty() {
            return self.err(end, K::UnclosedBranch);
        }
        if let Some((&num, &(_, _, offset))) = self.rings.iter().next() {
            return self.err(offset, K::UnmatchedRingClosure(num));
        }
        Ok(())
    }

    fn add_atom(&mut self, atom: RawAtom) -> Result<(), SmilesError> {
        let idx = self.atoms.len();
        let offset = atom.offset;
        self.atoms.push(atom);
        if let Some(prev) = self.prev {
            let sym = self.pending.take();
            self.add_bond(prev, idx, sym, offset)?;
        }
        self.prev = Some(idx);
        Ok(())
    }

    fn add_bond(
        &mut self,
        a: usize,
        b: usize,
        sym: Option<BondSymbol>,
        offset: usize,
    ) -> Result<(), SmilesError> {
        if a == b {
            return self.err(offset, K::SelfBond);
        }
        if self
            .bonds
            .iter()
            .any(|x| (x.a == a && x.b == b) || (x.a == b && x.b == a))
        {
            return self.err(offset, K::DuplicateBond);
        }
        let both_aromatic = self.atoms[a].aromatic && self.atoms[b].aromatic;
        let (order, implicit) = match sym {
            Some(s) => {
                if s.order == BondOrder::Aromatic && !both_aromatic {
                    return self.err(s.offset, K::InvalidAromaticBond);
                }
                (s.order, false)
            }
            None if both_aromatic => (BondOrder::Aromatic, true),
            None => (BondOrder::Single, true),
        };
        self.bonds.push(RawBond {
            a,
            b,
            order,
            implicit,
        });
        Ok(())
    }

    fn ring_closure(&mut self) -> Result<(), SmilesError> {
        let at = self.pos;
        let Some(prev) = self.prev else {
            return self.err(at, K::MissingAtom);
        };
        let num = if self.chars[at] == '%' {
            let digits: String = self.chars[at + 1..].iter().take(2).collect();
            if digits.len() != 2 || !digits.chars().all(|c| c.is_ascii_digit()) {
                return self.err(at, K::UnexpectedChar('%'));
            }
            self.pos += 3;
            digits.parse::<u32>().expect("two ascii digits")
        } else {
            self.pos += 1;
            self.chars[at].to_digit(10).expect("ascii digit")
        };
        let sym = self.pending.take();
        match self.rings.remove(&num) {
            None => {
                self.rings.insert(num, (prev, sym, at));
            }
            Some((open_atom, open_sym, _)) => {
                let merged = match (open_sym, sym) {
                    (Some(x), Some(y)) if x.order != y.order => {
                        return self.err(at, K::ConflictingRingBond(num));
                    }
                    (Some(x), _) => Some(x),
                    (None, y) => y,
                };
                self.add_bond(open_atom, prev, merged, at)?;
            }
        }
        Ok(())
    }

    fn organic_atom(&mut self) -> Result<RawAtom, SmilesError> {
        let at = self.pos;
        let c = self.chars[at];
        let next = self.chars.get(at + 1).copied();
        let (symbol, aromatic, width) = match (c, next) {
            ('C', Some('l')) => ("Cl", false, 2),
            ('B', Some('r')) => ("Br", false, 2),
            ('B', _) => ("B", false, 1),
            ('C', _) => ("C", false, 1),
            ('N', _) => ("N", false, 1),
            ('O', _) => ("O", false, 1),
            ('P', _) => ("P", false, 1),
            ('S', _) => ("S", false, 1),
            ('F', _) => ("F", false, 1),
            ('I', _) => ("I", false, 1),
            ('b', _) => ("B", true, 1),
            ('c', _) => ("C", true, 1),
            ('n', _) => ("N", true, 1),
            ('o', _) => ("O", true, 1),
            ('p', _) => ("P", true, 1),
            ('s', _) => ("S", true, 1),
            _ => return self.err(at, K::UnknownElement(c.to_string())),
        };
        self.pos += width;
        Ok(RawAtom {
            element: Element::from_symbol(symbol).expect("organic subset is in the table"),
            charge: 0,
            isotope: None,
            aromatic,
            bracket_h: None,
            offset: at,
        })
    }

    fn digits(&mut self) -> Option<u32> {
        let start = self.pos;
        while matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
            self.pos += 1;
        }
        if self.pos == start {
            return None;
        }
        self.chars[start..self.pos]
            .iter()
            .collect::<String>()
            .parse()
            .ok()
    }

    fn bracket_atom(&mut self) -> Result<RawAtom, SmilesError> {
        let open = self.pos;
        self.pos += 1;
        let close = match self.chars[open..].iter().position(|&c| c == ']') {
            Some(rel) => open + rel,
            None => return self.err(open, K::UnclosedBracket),
        };
        let bad = |p: &Self, what: &str| -> Result<RawAtom, SmilesError> {
            let body: String = p.chars[open..=close].iter().collect();
            p.err(open, K::InvalidBracket(format!("{what} in {body}")))
        };

        let isotope = match self.digits() {
            Some(v) => match u16::try_from(v) {
                Ok(v) => Some(v),
                Err(_) => return bad(self, "isotope out of range"),
            },
            None => None,
        };

        // Element symbol: aromatic lowercase, or uppercase with optional lowercase.
        let sym_at = self.pos;
        let (symbol, aromatic) = match self.peek() {
            Some(c) if c.is_ascii_lowercase() => {
                let two: String = self.chars[sym_at..close.min(sym_at + 2)].iter().collect();
                if two == "se" || two == "as" {
                    self.pos += 2;
                    return self.err(sym_at, K::InvalidAromatic(two));
                }
                self.pos += 1;
                (c.to_ascii_uppercase().to_string(), true)
            }
            Some(c) if c.is_ascii_uppercase() => {
                let two: String = self.chars[sym_at..close.min(sym_at + 2)].iter().collect();
                if two.len() == 2
                    && two.chars().nth(1).unwrap().is_ascii_lowercase()
                    && Element::from_symbol(&two).is_some()
                {
                    self.pos += 2;
                    (two, false)
                } else if two.len() == 2
                    && two.chars().nth(1).unwrap().is_ascii_lowercase()
                    && Element::from_symbol(&c.to_string()).is_none()
                {
                    return self.err(sym_at, K::UnknownElement(two));
                } else {
                    self.pos += 1;
                    (c.to_string(), false)
                }
            }
            Some('*') => return self.err(sym_at, K::UnknownElement("*".into())),
            _ => return bad(self, "missing element symbol"),
        };
        let Some(element) = Element::from_symbol(&symbol) else {
            return self.err(sym_at, K::UnknownElement(symbol));
        };
        if aromatic && !element.can_be_aromatic() {
            return self.err(sym_at, K::InvalidAromatic(symbol.to_lowercase()));
        }

        // Chirality: @, @@, @TH1, @AL2, @SP3, @TB10, @OH20 ...
        if self.peek() == Some('@') {
            self.stereo += 1;
            self.pos += 1;
            if self.peek() == Some('@') {
                self.pos += 1;
            } else {
                let tag: String = self.chars[self.pos..close.min(self.pos + 2)].iter().collect();
                if matches!(tag.as_str(), "TH" | "AL" | "SP" | "TB" | "OH") {
                    self.pos += 2;
                    if self.digits().is_none() {
                        return bad(self, "chirality class without number");
                    }
                }
            }
        }

        let mut hcount = 0u8;
        if self.peek() == Some('H') {
            self.pos += 1;
            hcount = match self.digits() {
                Some(v) => match u8::try_from(v) {
                    Ok(v) => v,
                    Err(_) => return bad(self, "hydrogen count out of range"),
                },
                None => 1,
            };
        }

        let mut charge = 0i32;
        if let Some(sign @ ('+' | '-')) = self.peek() {
            let unit = if sign == '+' { 1 } else { -1 };
            self.pos += 1;
            if let Some(v) = self.digits() {
                charge = unit * v as i32;
            } else {
                charge = unit;
                while self.peek() == Some(sign) {
                    charge += unit;
                    self.pos += 1;
                }
            }
        }

        if self.peek() == Some(':') {
            self.pos += 1;
            if self.digits().is_none() {
                return bad(self, "atom class without number");
            }
        }

        if self.pos != close {
            return bad(self, "unexpected characters");
        }
        self.pos = close + 1;
        Ok(RawAtom {
            element,
            charge,
            isotope,
            aromatic,
            bracket_h: Some(hcount),
            offset: open,
        })
    }

    fn finish(self) -> Result<MolecularGraph, SmilesError> {
        let Parser {
            atoms: raw_atoms,
            bonds: raw_bonds,
            stereo,
            source,
            ..
        } = self;
        let mut report = ParseReport {
            stereo_markers: stereo,
            ..ParseReport::default()
        };
        if stereo > 0 {
            report
                .warnings
                .push(format!("{stereo} stereo marker(s) discarded"));
        }

        // Fragment selection on the raw graph.
        let n = raw_atoms.len();
        let mut comp: Vec<usize> = (0..n).collect();
        fn find(c: &mut [usize], mut x: usize) -> usize {
            while c[x] != x {
                c[x] = c[c[x]];
                x = c[x];
            }
            x
        }
        for b in &raw_bonds {
            let (ra, rb) = (find(&mut comp, b.a), find(&mut comp, b.b));
            if ra != rb {
                comp[ra.max(rb)] = ra.min(rb);
            }
        }
        let roots: Vec<usize> = (0..n).map(|i| find(&mut comp, i)).collect();
        let mut order: Vec<usize> = Vec::new();
        let mut heavy: BTreeMap<usize, usize> = BTreeMap::new();
        for (i, &r) in roots.iter().enumerate() {
            if !heavy.contains_key(&r) {
                order.push(r);
            }
            *heavy.entry(r).or_default() += usize::from(raw_atoms[i].element != Element::H);
        }
        let keep_root = order
            .iter()
            .copied()
            .max_by(|a, b| heavy[a].cmp(&heavy[b]).then(b.cmp(a)))
            .expect("at least one atom");
        if heavy[&keep_root] == 0 {
            return Err(SmilesError::new(0, K::EmptyFragment));
        }
        if order.len() > 1 {
            report.dropped_fragments = order.len() - 1;
            report.warnings.push(format!(
                "kept largest of {} fragments ({} heavy atoms)",
                order.len(),
                heavy[&keep_root]
            ));
        }

        let mut remap = vec![usize::MAX; n];
        let mut atoms: Vec<RawAtom> = Vec::new();
        for i in 0..n {
            if roots[i] == keep_root {
                remap[i] = atoms.len();
                atoms.push(raw_atoms[i].clone());
            }
        }
        let mut bonds: Vec<RawBond> = raw_bonds
            .iter()
            .filter(|b| remap[b.a] != usize::MAX)
            .map(|b| RawBond {
                a: remap[b.a],
                b: remap[b.b],
                ..*b
            })
            .collect();

        // Implicit aromatic bonds outside rings (e.g. biaryl links) are single.
        let edges: Vec<(usize, usize)> = bonds.iter().map(|b| (b.a, b.b)).collect();
        let mut ring_bond = vec![false; bonds.len()];
        for ring in minimum_cycle_basis(atoms.len(), &edges) {
            for b in ring.bonds {
                ring_bond[b] = true;
            }
        }
        for (b, in_ring) in bonds.iter_mut().zip(&ring_bond) {
            if b.implicit && b.order == BondOrder::Aromatic && !in_ring {
                b.order = BondOrder::Single;
            }
        }

        // Hydrogen assignment on the graph that still contains explicit [H] atoms.
        let mut half_sum = vec![0u32; atoms.len()];
        for b in &bonds {
            half_sum[b.a] += b.order.half_units();
            half_sum[b.b] += b.order.half_units();
        }
        let mut hydrogens = Vec::with_capacity(atoms.len());
        for (i, a) in atoms.iter().enumerate() {
            hydrogens.push(implicit_hydrogens(a, half_sum[i])?);
        }

        // Fold plain [H] atoms into their heavy neighbour.
        let mut folded = vec![false; atoms.len()];
        let mut degree = vec![0usize; atoms.len()];
        for b in &bonds {
            degree[b.a] += 1;
            degree[b.b] += 1;
        }
        for b in &bonds {
            for (h, heavy_atom) in [(b.a, b.b), (b.b, b.a)] {
                let ha = &atoms[h];
                if ha.element == Element::H
                    && ha.isotope.is_none()
                    && ha.charge == 0
                    && ha.bracket_h == Some(0)
                    && degree[h] == 1
                    && atoms[heavy_atom].element != Element::H
                {
                    folded[h] = true;
                    hydrogens[heavy_atom] += 1;
                }
            }
        }

        let mut final_index = vec![usize::MAX; atoms.len()];
        let mut out_atoms: Vec<Atom> = Vec::new();
        for (i, a) in atoms.iter().enumerate() {
            if folded[i] {
                continue;
            }
            final_index[i] = out_atoms.len();
            out_atoms.push(Atom {
                element: a.element,
                formal_charge: a.charge,
                isotope: a.isotope,
                aromatic: a.aromatic,
                explicit_h: a.bracket_h.map(|_| hydrogens[i]),
                implicit_h: hydrogens[i],
                degree: 0,
                in_ring: false,
            });
        }
        let mut out_bonds: Vec<Bond> = Vec::new();
        for b in &bonds {
            if folded[b.a] || folded[b.b] {
                continue;
            }
            let (a, c) = (final_index[b.a], final_index[b.b]);
            out_atoms[a].degree += 1;
            out_atoms[c].degree += 1;
            out_bonds.push(Bond {
                endpoints: (a, c),
                order: b.order,
                in_ring: false,
            });
        }

        let edges: Vec<(usize, usize)> = out_bonds.iter().map(|b| b.endpoints).collect();
        let rings = minimum_cycle_basis(out_atoms.len(), &edges);
        for ring in &rings {
            for &a in &ring.atoms {
                out_atoms[a].in_ring = true;
            }
            for &b in &ring.bonds {
                out_bonds[b].in_ring = true;
            }
        }
        for (i, a) in out_atoms.iter().enumerate() {
            if a.aromatic && !a.in_ring {
                let offset = atoms
                    .iter()
                    .enumerate()
                    .find(|(j, _)| final_index[*j] == i)
                    .map(|(_, r)| r.offset)
                    .unwrap_or(0);
                return Err(SmilesError::new(offset, K::AromaticOutsideRing));
            }
        }

        Ok(MolecularGraph::new(
            out_atoms, out_bonds, rings, source, report,
        ))
    }
}

/// Valence model for implicit hydrogens.
///
/// Bracket atoms take their written H count. Aliphatic organic atoms take the
/// smallest normal valence at or above their bond-order sum. Aromatic `c`/`b`
/// count aromatic bonds as 1.5 (floored after summing); aromatic heteroatoms
/// without brackets get none.
fn implicit_hydrogens(atom: &RawAtom, half_sum: u32) -> Result<u8, SmilesError> {
    if let Some(h) = atom.bracket_h {
        return Ok(h);
    }
    let sum = half_sum / 2;
    let valences = atom.element.organic_valences();
    if atom.aromatic {
        return Ok(match atom.element {
            Element::C | Element::B => (u32::from(valences[0])).saturating_sub(sum) as u8,
            _ => 0,
        });
    }
    match valences.iter().find(|&&v| u32::from(v) >= sum) {
        Some(&v) => Ok(v - sum as u8),
        None => Err(SmilesError::new(
            atom.offset,
            K::ValenceExceeded {
                element: atom.element.symbol().to_string(),
                sum,
            },
        )),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn hs(s: &str) -> Vec<u8> {
        parse_smiles(s).unwrap().atoms.iter().map(|a| a.implicit_h).collect()
    }

    #[test]
    fn ethanol() {
        let g = parse_smiles("CCO").unwrap();
        assert_eq!(g.atom_count(), 3);
        assert_eq!(g.bond_count(), 2);
        assert_eq!(hs("CCO"), vec![3, 2, 1]);
        assert_eq!(g.smiles_length, 3);
        assert_eq!(g.bonds[0].endpoints, (0, 1));
        assert_eq!(g.bonds[1].endpoints, (1, 2));
    }

    #[test]
    fn cyclopropane() {
        let g = parse_smiles("C1CC1").unwrap();
        assert_eq!(g.ring_count(), 1);
        assert!(g.atoms.iter().all(|a| a.in_ring));
        assert!(g.bonds.iter().all(|b| b.in_ring));
    }

    #[test]
    fn unclosed_branch_offset() {
        let e = parse_smiles("C(C").unwrap_err();
        assert_eq!(e.kind, K::UnclosedBranch);
        assert_eq!(e.offset, 3);
    }

    #[test]
    fn benzene() {
        let g = parse_smiles("c1ccccc1").unwrap();
        assert_eq!(g.atom_count(), 6);
        assert!(g.atoms.iter().all(|a| a.aromatic && a.implicit_h == 1));
        assert_eq!(g.bond_count(), 6);
        assert!(g.bonds.iter().all(|b| b.order == BondOrder::Aromatic));
        assert_eq!(g.ring_count(), 1);
    }

    #[test]
    fn heteroaromatics() {
        assert_eq!(hs("c1ccncc1"), vec![1, 1, 1, 0, 1, 1]);
        assert_eq!(hs("c1cc[nH]c1"), vec![1, 1, 1, 1, 1]);
        assert_eq!(hs("c1ccsc1"), vec![1, 1, 1, 0, 1]);
        assert_eq!(hs("c1ccoc1"), vec![1, 1, 1, 0, 1]);
        // Naphthalene ring-fusion carbons carry no hydrogen.
        let g = parse_smiles("c1ccc2ccccc2c1").unwrap();
        assert_eq!(g.atoms.iter().filter(|a| a.implicit_h == 0).count(), 2);
        assert_eq!(g.ring_count(), 2);
    }

    #[test]
    fn biaryl_link_is_single() {
        let g = parse_smiles("c1ccccc1c1ccccc1").unwrap();
        let non_ring: Vec<_> = g.bonds.iter().filter(|b| !b.in_ring).collect();
        assert_eq!(non_ring.len(), 1);
        assert_eq!(non_ring[0].order, BondOrder::Single);
    }

    #[test]
    fn bracket_atoms() {
        let g = parse_smiles("[NH3+]CC(=O)[O-]").unwrap();
        assert_eq!(g.atoms[0].formal_charge, 1);
        assert_eq!(g.atoms[0].explicit_h, Some(3));
        assert_eq!(g.atoms[0].implicit_h, 3);
        assert_eq!(g.atoms[4].formal_charge, -1);
        assert_eq!(g.atoms[4].implicit_h, 0);
        let g = parse_smiles("[13CH4]").unwrap();
        assert_eq!(g.atoms[0].isotope, Some(13));
        assert_eq!(g.atoms[0].implicit_h, 4);
        let g = parse_smiles("[Fe+++]").unwrap();
        assert_eq!(g.atoms[0].formal_charge, 3);
        let g = parse_smiles("[Cu-2]").unwrap();
        assert_eq!(g.atoms[0].formal_charge, -2);
    }

    #[test]
    fn stereo_is_discarded() {
        let g = parse_smiles("N[C@@H](C)C(=O)O").unwrap();
        let plain = parse_smiles("NC(C)C(=O)O").unwrap();
        assert_eq!(g.report.stereo_markers, 1);
        let key = |g: &MolecularGraph| -> Vec<(Element, u8, usize)> {
            g.atoms.iter().map(|a| (a.element, a.implicit_h, a.degree)).collect()
        };
        assert_eq!(key(&g), key(&plain));
        let g = parse_smiles("F/C=C\\F").unwrap();
        assert_eq!(g.report.stereo_markers, 2);
        assert_eq!(g.atom_count(), 4);
    }

    #[test]
    fn explicit_hydrogen_atoms_fold() {
        let g = parse_smiles("[H]OC([H])([H])[H]").unwrap();
        assert_eq!(g.atom_count(), 2);
        assert_eq!(g.atoms[0].implicit_h, 1);
        assert_eq!(g.atoms[1].implicit_h, 3);
    }

    #[test]
    fn largest_fragment_kept() {
        let g = parse_smiles("CCCC(=O)[O-].[Na+]").unwrap();
        assert_eq!(g.atom_count(), 6);
        assert_eq!(g.report.dropped_fragments, 1);
        assert_eq!(g.smiles_length, 18);
        // Ring bonds may cross a dot.
        let g = parse_smiles("C1.C1").unwrap();
        assert_eq!(g.atom_count(), 2);
        assert_eq!(g.report.dropped_fragments, 0);
    }

    #[test]
    fn percent_ring_closure() {
        let a = parse_smiles("C%12CC%12").unwrap();
        assert_eq!(a.ring_count(), 1);
        let b = parse_smiles("C1CC1").unwrap();
        assert_eq!(a.atoms, b.atoms);
    }

    #[test]
    fn ring_bond_symbols() {
        let g = parse_smiles("C=1CCCCC1").unwrap();
        assert_eq!(g.bonds.iter().filter(|b| b.order == BondOrder::Double).count(), 1);
        assert_eq!(
            parse_smiles("C=1CC-1").unwrap_err().kind,
            K::ConflictingRingBond(1)
        );
    }

    #[test]
    fn errors_carry_offsets() {
        let cases: &[(&str, K, usize)] = &[
            ("", K::Empty, 0),
            ("C1CC", K::UnmatchedRingClosure(1), 1),
            ("CC)", K::UnmatchedBranchClose, 2),
            ("CXC", K::UnknownElement("X".into()), 1),
            ("C[Xx]", K::UnknownElement("Xx".into()), 2),
            ("CC=", K::DanglingBond, 3),
            ("=C", K::MissingAtom, 0),
            ("C1C1", K::DuplicateBond, 3),
            ("C11", K::SelfBond, 2),
            ("C[CH4", K::UnclosedBracket, 1),
            ("c1ccccc1C:C", K::InvalidAromaticBond, 9),
            ("cc", K::AromaticOutsideRing, 0),
            ("C(C)(C)(C)(C)C", K::ValenceExceeded { element: "C".into(), sum: 5 }, 0),
            ("O=O=O", K::ValenceExceeded { element: "O".into(), sum: 4 }, 2),
            ("[se]1cccc1", K::InvalidAromatic("se".into()), 1),
            ("[H][H]", K::EmptyFragment, 0),
            ("C C", K::UnexpectedChar(' '), 1),
        ];
        for (s, kind, offset) in cases {
            let e = parse_smiles(s).unwrap_err();
            assert_eq!((&e.kind, e.offset), (kind, *offset), "input {s:?}");
        }
    }

    #[test]
    fn sulfur_and_phosphorus_valences() {
        assert_eq!(hs("CS(=O)C"), vec![3, 0, 0, 3]);
        assert_eq!(hs("CS(=O)(=O)C"), vec![3, 0, 0, 0, 3]);
        assert_eq!(hs("OP(=O)(O)O"), vec![1, 0, 0, 1, 1]);
        assert_eq!(hs("CP"), vec![3, 2]);
    }
}
