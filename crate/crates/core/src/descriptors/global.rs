//! Whole-molecule count and mass descriptors.

use crate::smiles::{BondOrder, Element, MolecularGraph};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GlobalDescriptors {
    pub mol_wt: f64,
    pub exact_mol_wt: f64,
    pub num_h_donors: usize,
    pub num_h_acceptors: usize,
    pub num_rotatable_bonds: usize,
    pub ring_count: usize,
    pub num_aromatic_rings: usize,
    pub fraction_csp3: f64,
}

/// Isotope-labelled atoms are weighed at their mass number.
pub fn global_descriptors(graph: &MolecularGraph) -> GlobalDescriptors {
    let h = Element::H;
    let mut mol_wt = 0.0;
    let mut exact = 0.0;
    for a in &graph.atoms {
        let hs = f64::from(a.total_h());
        match a.isotope {
            Some(iso) => {
                mol_wt += f64::from(iso);
                exact += f64::from(iso);
            }
            None => {
                mol_wt += a.element.weight();
                exact += a.element.monoisotopic_mass();
            }
        }
        mol_wt += hs * h.weight();
        exact += hs * h.monoisotopic_mass();
    }

    let is_n_or_o = |e: Element| e == Element::N || e == Element::O;
    let num_h_donors = graph
        .atoms
        .iter()
        .filter(|a| is_n_or_o(a.element) && a.total_h() > 0)
        .count();
    let num_h_acceptors = graph.atoms.iter().filter(|a| is_n_or_o(a.element)).count();

    let num_rotatable_bonds = graph
        .bonds
        .iter()
        .filter(|b| {
            b.order == BondOrder::Single
                && !b.in_ring
                && graph.atoms[b.endpoints.0].degree >= 2
                && graph.atoms[b.endpoints.1].degree >= 2
        })
        .count();

    let num_aromatic_rings = graph
        .rings
        .iter()
        .filter(|r| r.atoms.iter().all(|&a| graph.atoms[a].aromatic))
        .count();

    let mut carbons = 0usize;
    let mut sp3 = 0usize;
    for (i, a) in graph.atoms.iter().enumerate() {
        if a.element != Element::C {
            continue;
        }
        carbons += 1;
        let unsaturated = graph.neighbors(i).iter().any(|&(_, b)| {
            matches!(graph.bonds[b].order, BondOrder::Double | BondOrder::Triple)
        });
        if !a.aromatic && !unsaturated {
            sp3 += 1;
        }
    }
    let fraction_csp3 = if carbons == 0 {
        0.0
    } else {
        sp3 as f64 / carbons as f64
    };

    GlobalDescriptors {
        mol_wt,
        exact_mol_wt: exact,
        num_h_donors,
        num_h_acceptors,
        num_rotatable_bonds,
        ring_count: graph.ring_count(),
        num_aromatic_rings,
        fraction_csp3,
    }
}
