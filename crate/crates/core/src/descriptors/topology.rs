//! Graph-topological indices on the heavy-atom graph.

use super::DescriptorError;
use crate::smiles::MolecularGraph;

fn connected_distances(graph: &MolecularGraph) -> Result<Vec<Vec<usize>>, DescriptorError> {
    let d = graph.distance_matrix();
    if d.iter().flatten().any(|&x| x == usize::MAX) {
        return Err(DescriptorError::Disconnected);
    }
    Ok(d)
}

/// Sum of shortest-path bond counts over unordered atom pairs.
pub fn wiener_index(graph: &MolecularGraph) -> Result<u64, DescriptorError> {
    let d = connected_distances(graph)?;
    let mut total = 0u64;
    for (i, row) in d.iter().enumerate() {
        for &x in &row[i + 1..] {
            total += x as u64;
        }
    }
    Ok(total)
}

/// Zeroth-order connectivity index, Σ 1/√δ. A degree-0 atom contributes 1.
pub fn chi0(graph: &MolecularGraph) -> f64 {
    graph
        .atoms
        .iter()
        .map(|a| {
            if a.degree == 0 {
                1.0
            } else {
                1.0 / (a.degree as f64).sqrt()
            }
        })
        .sum()
}

/// First-order connectivity index, Σ over bonds of 1/√(δi·δj).
pub fn chi1(graph: &MolecularGraph) -> f64 {
    graph
        .bonds
        .iter()
        .map(|b| {
            let di = graph.atoms[b.endpoints.0].degree as f64;
            let dj = graph.atoms[b.endpoints.1].degree as f64;
            1.0 / (di * dj).sqrt()
        })
        .sum()
}

/// Number of paths with two bonds.
pub fn two_bond_paths(graph: &MolecularGraph) -> usize {
    graph
        .atoms
        .iter()
        .map(|a| a.degree * a.degree.saturating_sub(1) / 2)
        .sum()
}

/// Number of simple paths with three bonds (four distinct atoms).
pub fn three_bond_paths(graph: &MolecularGraph) -> usize {
    let mut count = 0;
    for (bi, b) in graph.bonds.iter().enumerate() {
        let (j, k) = b.endpoints;
        for &(i, bij) in graph.neighbors(j) {
            if bij == bi {
                continue;
            }
            for &(l, bkl) in graph.neighbors(k) {
                if bkl == bi || l == i {
                    continue;
                }
                count += 1;
            }
        }
    }
    count
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Kappa {
    pub kappa1: f64,
    pub kappa2: f64,
    pub kappa3: f64,
}

/// Kier shape indices without the atom-size correction. Any index whose path
/// count is zero (or, for κ3, with fewer than 3 atoms) is 0.
pub fn kappa_indices(graph: &MolecularGraph) -> Kappa {
    let a = graph.atom_count() as f64;
    let p1 = graph.bond_count() as f64;
    let p2 = two_bond_paths(graph) as f64;
    let p3 = three_bond_paths(graph) as f64;
    let ratio = |num: f64, p: f64| if p == 0.0 { 0.0 } else { num / (p * p) };
    let kappa1 = ratio(a * (a - 1.0).powi(2), p1);
    let kappa2 = ratio((a - 1.0) * (a - 2.0).powi(2), p2);
    let kappa3 = if graph.atom_count() < 3 {
        0.0
    } else if graph.atom_count() % 2 == 1 {
        ratio((a - 1.0) * (a - 3.0).powi(2), p3)
    } else {
        ratio((a - 3.0) * (a - 2.0).powi(2), p3)
    };
    Kappa {
        kappa1,
        kappa2,
        kappa3,
    }
}

/// Balaban's J: (m/(μ+1)) Σ_bonds 1/√(si·sj) with si the distance-matrix row sums.
pub fn balaban_j(graph: &MolecularGraph) -> Result<f64, DescriptorError> {
    let m = graph.bond_count();
    if m == 0 {
        return Ok(0.0);
    }
    let d = connected_distances(graph)?;
    let sums: Vec<f64> = d.iter().map(|row| row.iter().sum::<usize>() as f64).collect();
    let mu = (m + 1 - graph.atom_count()) as f64;
    let edge_sum: f64 = graph
        .bonds
        .iter()
        .map(|b| 1.0 / (sums[b.endpoints.0] * sums[b.endpoints.1]).sqrt())
        .sum();
    Ok(m as f64 / (mu + 1.0) * edge_sum)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::smiles::parse_smiles;

    fn g(s: &str) -> MolecularGraph {
        parse_smiles(s).unwrap()
    }

    #[test]
    fn wiener_examples() {
        assert_eq!(wiener_index(&g("CCC")).unwrap(), 4);
        assert_eq!(wiener_index(&g("C")).unwrap(), 0);
        assert_eq!(wiener_index(&g("C1CCC1")).unwrap(), 8);
    }

    #[test]
    fn chi_examples() {
        assert!((chi0(&g("CCC")) - (2.0 + 1.0 / 2f64.sqrt())).abs() < 1e-12);
        assert!((chi1(&g("CCC")) - 2.0 / 2f64.sqrt()).abs() < 1e-12);
        assert_eq!(chi0(&g("CC")), 2.0);
        assert_eq!(chi1(&g("CC")), 1.0);
        assert!((chi0(&g("c1ccccc1")) - 6.0 / 2f64.sqrt()).abs() < 1e-12);
        assert!((chi1(&g("c1ccccc1")) - 3.0).abs() < 1e-12);
        assert_eq!(chi0(&g("C")), 1.0);
        assert_eq!(chi1(&g("C")), 0.0);
    }

    #[test]
    fn kappa_examples() {
        let k = kappa_indices(&g("CCCC"));
        assert_eq!((k.kappa1, k.kappa2, k.kappa3), (4.0, 3.0, 4.0));
        assert_eq!(kappa_indices(&g("CC")).kappa2, 0.0);
        assert!((kappa_indices(&g("C1CCCCC1")).kappa1 - 150.0 / 36.0).abs() < 1e-12);
        let k = kappa_indices(&g("C"));
        assert_eq!((k.kappa1, k.kappa2, k.kappa3), (0.0, 0.0, 0.0));
    }

    #[test]
    fn three_paths_skip_triangles() {
        assert_eq!(three_bond_paths(&g("C1CC1")), 0);
        assert_eq!(three_bond_paths(&g("C1CCC1")), 4);
    }

    #[test]
    fn balaban_examples() {
        assert!((balaban_j(&g("CC")).unwrap() - 1.0).abs() < 1e-12);
        assert!((balaban_j(&g("CCC")).unwrap() - 4.0 / 6f64.sqrt()).abs() < 1e-12);
        assert_eq!(balaban_j(&g("C")).unwrap(), 0.0);
    }
}
