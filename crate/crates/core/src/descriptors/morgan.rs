//! ECFP-style circular fingerprint with a fixed, platform-independent hash.

use std::collections::HashSet;

use crate::hash::Fnv1a;
use crate::smiles::MolecularGraph;

pub const DEFAULT_RADIUS: usize = 2;
pub const DEFAULT_BITS: usize = 1024;

/// Hash of the initial atom invariant
/// `(atomic number, degree, formal charge, total H, in ring, aromatic)`.
pub fn initial_invariant(graph: &MolecularGraph, atom: usize) -> u64 {
    let a = &graph.atoms[atom];
    Fnv1a::new()
        .write_i64(i64::from(a.element.atomic_number()))
        .write_i64(a.degree as i64)
        .write_i64(i64::from(a.formal_charge))
        .write_i64(i64::from(a.total_h()))
        .write_i64(i64::from(a.in_ring))
        .write_i64(i64::from(a.aromatic))
        .finish()
}

/// Environment codes that survive bond-set deduplication, in generation order.
///
/// Radius 0 contributes one code per atom. At radius `r ≥ 1` an atom's
/// environment is the set of bonds reachable within `r` hops; an environment
/// whose bond set was already produced (at a smaller radius, or by an atom
/// with a smaller code at the same radius) is dropped.
pub fn environment_codes(graph: &MolecularGraph, radius: usize) -> Vec<u64> {
    let n = graph.atom_count();
    let mut codes: Vec<u64> = (0..n).map(|i| initial_invariant(graph, i)).collect();
    let mut out = codes.clone();

    let words = graph.bond_count().div_ceil(64).max(1);
    let mut envs: Vec<Vec<u64>> = vec![vec![0u64; words]; n];
    let mut seen: HashSet<Vec<u64>> = HashSet::new();

    for iteration in 1..=radius {
        let mut next_codes = Vec::with_capacity(n);
        let mut next_envs = Vec::with_capacity(n);
        for atom in 0..n {
            let mut env = envs[atom].clone();
            let mut neigh: Vec<(i64, u64)> = Vec::with_capacity(graph.neighbors(atom).len());
            for &(w, b) in graph.neighbors(atom) {
                env[b / 64] |= 1 << (b % 64);
                for (x, y) in env.iter_mut().zip(&envs[w]) {
                    *x |= *y;
                }
                neigh.push((graph.bonds[b].order.code(), codes[w]));
            }
            neigh.sort_unstable();
            let mut h = Fnv1a::new();
            h.write_i64(iteration as i64).write_u64(codes[atom]);
            for (order, code) in &neigh {
                h.write_i64(*order).write_u64(*code);
            }
            next_codes.push(h.finish());
            next_envs.push(env);
        }

        let mut layer: Vec<(u64, usize)> = (0..n).map(|a| (next_codes[a], a)).collect();
        layer.sort_unstable();
        for (code, atom) in layer {
            let env = &next_envs[atom];
            if env.iter().all(|w| *w == 0) {
                continue;
            }
            if seen.insert(env.clone()) {
                out.push(code);
            }
        }
        codes = next_codes;
        envs = next_envs;
    }
    out
}

/// Folded fingerprint: each surviving environment code sets bit `code mod n_bits`.
pub fn morgan_fingerprint(graph: &MolecularGraph, radius: usize, n_bits: usize) -> Vec<u8> {
    assert!(n_bits >= 1, "fingerprint width must be positive");
    let mut bits = vec![0u8; n_bits];
    for code in environment_codes(graph, radius) {
        bits[(code % n_bits as u64) as usize] = 1;
    }
    bits
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::smiles::parse_smiles;

    fn popcount(s: &str, r: usize) -> usize {
        let g = parse_smiles(s).unwrap();
        morgan_fingerprint(&g, r, DEFAULT_BITS).iter().map(|&b| b as usize).sum()
    }

    #[test]
    fn methane_sets_one_bit() {
        for r in 0..4 {
            assert_eq!(popcount("C", r), 1);
        }
    }

    #[test]
    fn atom_order_does_not_matter() {
        let a = morgan_fingerprint(&parse_smiles("CCO").unwrap(), 2, 1024);
        let b = morgan_fingerprint(&parse_smiles("OCC").unwrap(), 2, 1024);
        assert_eq!(a, b);
        let a = morgan_fingerprint(&parse_smiles("c1ccccc1CC(=O)N").unwrap(), 3, 2048);
        let b = morgan_fingerprint(&parse_smiles("NC(=O)Cc1ccccc1").unwrap(), 3, 2048);
        assert_eq!(a, b);
    }

    #[test]
    fn benzene_environments() {
        // Six equivalent atoms: one code per radius (r0, r1, r2); r2 bond sets
        // are distinct per atom but share a code.
        assert_eq!(popcount("c1ccccc1", 2), 3);
    }
}
