//! Element table: atomic numbers, standard atomic weights and monoisotopic masses.

use std::fmt;

/// A chemical element, identified by atomic number.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Element(u8);

struct ElementData {
    number: u8,
    symbol: &'static str,
    weight: f64,
    monoisotopic: f64,
}

macro_rules! elements {
    ($(($num:expr, $sym:expr, $w:expr, $m:expr)),* $(,)?) => {
        &[$(ElementData { number: $num, symbol: $sym, weight: $w, monoisotopic: $m }),*]
    };
}

static TABLE: &[ElementData] = elements![
    (1, "H", 1.008, 1.00782503223),
    (2, "He", 4.0026, 4.00260325413),
    (3, "Li", 6.94, 7.0160034366),
    (4, "Be", 9.0122, 9.012183065),
    (5, "B", 10.81, 11.00930536),
    (6, "C", 12.011, 12.0),
    (7, "N", 14.007, 14.00307400443),
    (8, "O", 15.999, 15.99491461957),
    (9, "F", 18.998, 18.99840316273),
    (10, "Ne", 20.180, 19.9924401762),
    (11, "Na", 22.990, 22.989769282),
    (12, "Mg", 24.305, 23.985041697),
    (13, "Al", 26.982, 26.98153853),
    (14, "Si", 28.085, 27.97692653465),
    (15, "P", 30.974, 30.97376199842),
    (16, "S", 32.06, 31.9720711744),
    (17, "Cl", 35.45, 34.968852682),
    (18, "Ar", 39.948, 39.9623831237),
    (19, "K", 39.098, 38.9637064864),
    (20, "Ca", 40.078, 39.962590863),
    (21, "Sc", 44.956, 44.95590828),
    (22, "Ti", 47.867, 47.94794198),
    (23, "V", 50.942, 50.94395704),
    (24, "Cr", 51.996, 51.94050623),
    (25, "Mn", 54.938, 54.93804391),
    (26, "Fe", 55.845, 55.93493633),
    (27, "Co", 58.933, 58.93319429),
    (28, "Ni", 58.693, 57.93534241),
    (29, "Cu", 63.546, 62.92959772),
    (30, "Zn", 65.38, 63.92914201),
    (31, "Ga", 69.723, 68.9255735),
    (32, "Ge", 72.630, 73.921177761),
    (33, "As", 74.922, 74.92159457),
    (34, "Se", 78.971, 79.9165218),
    (35, "Br", 79.904, 78.9183376),
    (36, "Kr", 83.798, 83.9114977282),
    (37, "Rb", 85.468, 84.9117897379),
    (38, "Sr", 87.62, 87.9056125),
    (47, "Ag", 107.87, 106.9050916),
    (48, "Cd", 112.41, 113.90336509),
    (50, "Sn", 118.71, 119.90220163),
    (51, "Sb", 121.76, 120.903812),
    (52, "Te", 127.60, 129.906222748),
    (53, "I", 126.90, 126.9044719),
    (54, "Xe", 131.29, 131.9041550856),
    (55, "Cs", 132.91, 132.905451961),
    (56, "Ba", 137.33, 137.905247),
    (78, "Pt", 195.08, 194.9647917),
    (79, "Au", 196.97, 196.96656879),
    (80, "Hg", 200.59, 201.9706434),
    (82, "Pb", 207.2, 207.9766525),
    (83, "Bi", 208.98, 208.9803991),
];

impl Element {
    pub const H: Element = Element(1);
    pub const B: Element = Element(5);
    pub const C: Element = Element(6);
    pub const N: Element = Element(7);
    pub const O: Element = Element(8);
    pub const P: Element = Element(15);
    pub const S: Element = Element(16);

    pub fn from_symbol(symbol: &str) -> Option<Element> {
        TABLE
            .iter()
            .find(|e| e.symbol == symbol)
            .map(|e| Element(e.number))
    }

    pub fn atomic_number(self) -> u8 {
        self.0
    }

    fn data(self) -> &'static ElementData {
        TABLE
            .iter()
            .find(|e| e.number == self.0)
            .expect("elements are only constructed from the table")
    }

    pub fn symbol(self) -> &'static str {
        self.data().symbol
    }

    /// Standard atomic weight (g/mol).
    pub fn weight(self) -> f64 {
        self.data().weight
    }

    /// Mass of the most abundant isotope.
    pub fn monoisotopic_mass(self) -> f64 {
        self.data().monoisotopic
    }

    /// Normal valences for organic-subset atoms, ascending. Empty for other elements.
    pub fn organic_valences(self) -> &'static [u8] {
        match self.0 {
            5 => &[3],
            6 => &[4],
            7 => &[3],
            8 => &[2],
            15 => &[3, 5],
            16 => &[2, 4, 6],
            9 | 17 | 35 | 53 => &[1],
            _ => &[],
        }
    }

    /// Elements that may carry the aromatic flag.
    pub fn can_be_aromatic(self) -> bool {
        matches!(self.0, 5 | 6 | 7 | 8 | 15 | 16)
    }
}

impl fmt::Display for Element {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lookup() {
        assert_eq!(Element::from_symbol("Cl").unwrap().atomic_number(), 17);
        assert_eq!(Element::from_symbol("C"), Some(Element::C));
        assert!(Element::from_symbol("Xx").is_none());
        assert_eq!(Element::S.organic_valences(), &[2, 4, 6]);
    }

    #[test]
    fn table_is_sorted_and_unique() {
        for pair in TABLE.windows(2) {
            assert!(pair[0].number < pair[1].number);
        }
    }
}
