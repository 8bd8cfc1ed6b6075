//! Smallest set of smallest rings via Horton candidate cycles and GF(2) elimination.

use std::collections::{HashSet, VecDeque};

use super::MolecularGraph;

/// A simple cycle: atoms in traversal order and the bonds joining them.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Ring {
    pub atoms: Vec<usize>,
    pub bonds: Vec<usize>,
}

impl Ring {
    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn atom_set(&self) -> Vec<usize> {
        let mut s = self.atoms.clone();
        s.sort_unstable();
        s
    }
}

/// SSSR of a parsed graph, recomputed from topology alone.
pub fn sssr(graph: &MolecularGraph) -> Vec<Ring> {
    let edges: Vec<(usize, usize)> = graph.bonds.iter().map(|b| b.endpoints).collect();
    minimum_cycle_basis(graph.atoms.len(), &edges)
}

pub(crate) fn component_count(n: usize, edges: &[(usize, usize)]) -> usize {
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    let mut components = n;
    for &(a, b) in edges {
        let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
        if ra != rb {
            parent[ra] = rb;
            components -= 1;
        }
    }
    components
}

struct Candidate {
    atoms: Vec<usize>,
    bonds: Vec<usize>,
    bits: Vec<u64>,
}

/// Minimum cycle basis of an undirected simple graph. Returns exactly
/// `edges - nodes + components` rings, shortest first.
pub(crate) fn minimum_cycle_basis(n: usize, edges: &[(usize, usize)]) -> Vec<Ring> {
    let m = edges.len();
    if n == 0 || m == 0 {
        return Vec::new();
    }
    let rank = (m + component_count(n, edges)).saturating_sub(n);
    if rank == 0 {
        return Vec::new();
    }

    let mut adj: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n];
    for (i, &(a, b)) in edges.iter().enumerate() {
        adj[a].push((b, i));
        adj[b].push((a, i));
    }
    for list in &mut adj {
        list.sort_unstable();
    }

    let words = m.div_ceil(64);
    let mut seen: HashSet<Vec<u64>> = HashSet::new();
    let mut candidates = Vec::new();

    let mut dist = vec![usize::MAX; n];
    let mut parent = vec![usize::MAX; n];
    let mut parent_edge = vec![usize::MAX; n];
    let mut mark = vec![false; n];

    for root in 0..n {
        dist.fill(usize::MAX);
        parent.fill(usize::MAX);
        parent_edge.fill(usize::MAX);
        dist[root] = 0;
        let mut queue = VecDeque::from([root]);
        while let Some(u) = queue.pop_front() {
            for &(w, e) in &adj[u] {
                if dist[w] == usize::MAX {
                    dist[w] = dist[u] + 1;
                    parent[w] = u;
                    parent_edge[w] = e;
                    queue.push_back(w);
                }
            }
        }

        for (e, &(x, y)) in edges.iter().enumerate() {
            if dist[x] == usize::MAX || parent_edge[x] == e || parent_edge[y] == e {
                continue;
            }
            let path_x = tree_path(x, root, &parent);
            let path_y = tree_path(y, root, &parent);
            for &a in &path_x[..path_x.len() - 1] {
                mark[a] = true;
            }
            let disjoint = path_y[..path_y.len() - 1].iter().all(|&a| !mark[a]);
            for &a in &path_x[..path_x.len() - 1] {
                mark[a] = false;
            }
            if !disjoint {
                continue;
            }

            // root .. x, then y .. (child of root)
            let mut atoms: Vec<usize> = path_x.iter().rev().copied().collect();
            atoms.extend(path_y[..path_y.len() - 1].iter().copied());
            let mut bonds = Vec::with_capacity(atoms.len());
            for &a in path_x[..path_x.len() - 1].iter().rev() {
                bonds.push(parent_edge[a]);
            }
            bonds.push(e);
            for &a in &path_y[..path_y.len() - 1] {
                bonds.push(parent_edge[a]);
            }
            let mut bits = vec![0u64; words];
            for &b in &bonds {
                bits[b / 64] |= 1 << (b % 64);
            }
            if seen.insert(bits.clone()) {
                candidates.push(Candidate { atoms, bonds, bits });
            }
        }
    }

    candidates.sort_by(|a, b| {
        a.bonds.len().cmp(&b.bonds.len()).then_with(|| {
            let mut ka = a.bonds.clone();
            let mut kb = b.bonds.clone();
            ka.sort_unstable();
            kb.sort_unstable();
            ka.cmp(&kb)
        })
    });

    // Reduced basis rows keyed by their lowest set bit.
    let mut basis: Vec<(usize, Vec<u64>)> = Vec::new();
    let mut rings = Vec::with_capacity(rank);
    for cand in candidates {
        let mut v = cand.bits.clone();
        loop {
            let Some(pivot) = lowest_bit(&v) else { break };
            match basis.iter().find(|(p, _)| *p == pivot) {
                Some((_, row)) => {
                    for (a, b) in v.iter_mut().zip(row) {
                        *a ^= *b;
                    }
                }
                None => {
                    basis.push((pivot, v));
                    rings.push(Ring {
                        atoms: cand.atoms,
                        bonds: cand.bonds,
                    });
                    break;
                }
            }
        }
        if rings.len() == rank {
            break;
        }
    }
    rings
}

fn tree_path(mut from: usize, root: usize, parent: &[usize]) -> Vec<usize> {
    let mut path = vec![from];
    while from != root {
        from = parent[from];
        path.push(from);
    }
    path
}

fn lowest_bit(v: &[u64]) -> Option<usize> {
    v.iter()
        .enumerate()
        .find(|(_, w)| **w != 0)
        .map(|(i, w)| i * 64 + w.trailing_zeros() as usize)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn acyclic_is_empty() {
        assert!(minimum_cycle_basis(4, &[(0, 1), (1, 2), (2, 3)]).is_empty());
    }

    #[test]
    fn triangle() {
        let rings = minimum_cycle_basis(3, &[(0, 1), (1, 2), (2, 0)]);
        assert_eq!(rings.len(), 1);
        assert_eq!(rings[0].atom_set(), vec![0, 1, 2]);
    }

    #[test]
    fn fused_squares_pick_two_four_rings() {
        // 0-1-2-3-0 and 1-4-5-2 share bond 1-2; the 6-cycle must not be chosen.
        let edges = [(0, 1), (1, 2), (2, 3), (3, 0), (1, 4), (4, 5), (5, 2)];
        let rings = minimum_cycle_basis(6, &edges);
        assert_eq!(rings.len(), 2);
        assert!(rings.iter().all(|r| r.len() == 4));
    }

    #[test]
    fn cubane_has_five_four_rings() {
        let edges = [
            (0, 1), (1, 2), (2, 3), (3, 0),
            (4, 5), (5, 6), (6, 7), (7, 4),
            (0, 4), (1, 5), (2, 6), (3, 7),
        ];
        let rings = minimum_cycle_basis(8, &edges);
        assert_eq!(rings.len(), 5);
        assert!(rings.iter().all(|r| r.len() == 4));
    }

    #[test]
    fn rings_are_simple_cycles() {
        let edges = [(0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (5, 0), (2, 6), (6, 7), (7, 8), (8, 3)];
        for ring in minimum_cycle_basis(9, &edges) {
            let n = ring.atoms.len();
            assert_eq!(ring.bonds.len(), n);
            assert_eq!(ring.atom_set().windows(2).filter(|w| w[0] == w[1]).count(), 0);
            for (i, &b) in ring.bonds.iter().enumerate() {
                let (a, c) = edges[b];
                let (u, v) = (ring.atoms[i], ring.atoms[(i + 1) % n]);
                assert!((a, c) == (u, v) || (a, c) == (v, u));
            }
        }
    }
}
