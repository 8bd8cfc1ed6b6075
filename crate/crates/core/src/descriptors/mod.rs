//! Feature schema, native descriptor computation and feature-vector assembly.
//!
//! Natively computed: the Morgan fingerprint, graph indices (Wiener, Chi0,
//! Chi1) and global descriptors (masses, donor/acceptor counts, rotatable
//! bonds, ring counts, Fsp3, Kappa1-3, BalabanJ). MACCS keys and any other
//! descriptor set (MOE, TPSA, MolLogP, ...) arrive as external CSV columns.

mod global;
mod morgan;
mod topology;

pub use global::{global_descriptors, GlobalDescriptors};
pub use morgan::{environment_codes, initial_invariant, morgan_fingerprint, DEFAULT_BITS, DEFAULT_RADIUS};
pub use topology::{
    balaban_j, chi0, chi1, kappa_indices, three_bond_paths, two_bond_paths, wiener_index, Kappa,
};

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::smiles::MolecularGraph;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DescriptorError {
    #[error("graph is disconnected")]
    Disconnected,
    #[error("missing external column '{0}'")]
    MissingColumn(String),
    #[error("non-finite value {value} in column '{column}'")]
    NonFinite { column: String, value: f64 },
    #[error("duplicate feature name '{0}'")]
    DuplicateName(String),
    #[error("feature '{0}' is out of group order")]
    GroupOrder(String),
    #[error("malformed schema: {0}")]
    Malformed(String),
}

/// Source group of a feature. Declaration order is the concatenation order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureGroup {
    Morgan,
    Maccs,
    RdkitGlobal,
    External,
    Graph,
    SmilesLen,
}

impl FeatureGroup {
    pub const ALL: [FeatureGroup; 6] = [
        FeatureGroup::Morgan,
        FeatureGroup::Maccs,
        FeatureGroup::RdkitGlobal,
        FeatureGroup::External,
        FeatureGroup::Graph,
        FeatureGroup::SmilesLen,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            FeatureGroup::Morgan => "morgan",
            FeatureGroup::Maccs => "maccs",
            FeatureGroup::RdkitGlobal => "rdkit_global",
            FeatureGroup::External => "external",
            FeatureGroup::Graph => "graph",
            FeatureGroup::SmilesLen => "smiles_len",
        }
    }
}

impl fmt::Display for FeatureGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for FeatureGroup {
    type Err = DescriptorError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        FeatureGroup::ALL
            .into_iter()
            .find(|g| g.as_str() == s)
            .ok_or_else(|| DescriptorError::Malformed(format!("unknown group '{s}'")))
    }
}

pub const GLOBAL_NAMES: [&str; 12] = [
    "MolWt",
    "ExactMolWt",
    "NumHDonors",
    "NumHAcceptors",
    "NumRotatableBonds",
    "RingCount",
    "NumAromaticRings",
    "FractionCSP3",
    "Kappa1",
    "Kappa2",
    "Kappa3",
    "BalabanJ",
];
pub const GRAPH_NAMES: [&str; 3] = ["WienerIndex", "Chi0", "Chi1"];
pub const SMILES_LEN_NAME: &str = "SMILES_Length";

fn morgan_name(bit: usize) -> String {
    format!("Morgan_{bit}")
}

/// External columns whose header starts with "maccs" (any case) are MACCS keys.
pub fn classify_external(name: &str) -> FeatureGroup {
    if name.to_ascii_lowercase().starts_with("maccs") {
        FeatureGroup::Maccs
    } else {
        FeatureGroup::External
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureEntry {
    pub name: String,
    pub group: FeatureGroup,
}

/// Ordered, named, group-tagged feature layout.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureSchema {
    pub version: u32,
    pub morgan_radius: usize,
    entries: Vec<FeatureEntry>,
}

impl FeatureSchema {
    pub fn from_entries(
        morgan_radius: usize,
        entries: Vec<FeatureEntry>,
    ) -> Result<Self, DescriptorError> {
        let mut names = HashSet::new();
        let mut last = FeatureGroup::Morgan;
        for e in &entries {
            if !names.insert(e.name.as_str()) {
                return Err(DescriptorError::DuplicateName(e.name.clone()));
            }
            if e.group < last {
                return Err(DescriptorError::GroupOrder(e.name.clone()));
            }
            last = e.group;
        }
        Ok(FeatureSchema {
            version: SCHEMA_VERSION,
            morgan_radius,
            entries,
        })
    }

    /// Full layout: Morgan bits, MACCS columns, global descriptors, other
    /// external columns, graph indices, SMILES length.
    pub fn standard(
        morgan_radius: usize,
        morgan_bits: usize,
        external_names: &[String],
    ) -> Result<Self, DescriptorError> {
        let mut entries: Vec<FeatureEntry> = (0..morgan_bits)
            .map(|i| FeatureEntry {
                name: morgan_name(i),
                group: FeatureGroup::Morgan,
            })
            .collect();
        let entry = |name: &str, group| FeatureEntry {
            name: name.to_string(),
            group,
        };
        for name in external_names {
            if classify_external(name) == FeatureGroup::Maccs {
                entries.push(entry(name, FeatureGroup::Maccs));
            }
        }
        entries.extend(GLOBAL_NAMES.iter().map(|n| entry(n, FeatureGroup::RdkitGlobal)));
        for name in external_names {
            if classify_external(name) == FeatureGroup::External {
                entries.push(entry(name, FeatureGroup::External));
            }
        }
        entries.extend(GRAPH_NAMES.iter().map(|n| entry(n, FeatureGroup::Graph)));
        entries.push(entry(SMILES_LEN_NAME, FeatureGroup::SmilesLen));
        Self::from_entries(morgan_radius, entries)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[FeatureEntry] {
        &self.entries
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.entries.iter().position(|e| e.name == name)
    }

    pub fn count(&self, group: FeatureGroup) -> usize {
        self.entries.iter().filter(|e| e.group == group).count()
    }

    /// Names of columns that must be supplied externally.
    pub fn external_names(&self) -> impl Iterator<Item = &str> {
        self.entries
            .iter()
            .filter(|e| matches!(e.group, FeatureGroup::Maccs | FeatureGroup::External))
            .map(|e| e.name.as_str())
    }

    /// Schema without the excluded groups, plus the kept column indices.
    pub fn without_groups(&self, excluded: &[FeatureGroup]) -> (FeatureSchema, Vec<usize>) {
        let keep: Vec<usize> = (0..self.entries.len())
            .filter(|&i| !excluded.contains(&self.entries[i].group))
            .collect();
        let schema = FeatureSchema {
            version: self.version,
            morgan_radius: self.morgan_radius,
            entries: keep.iter().map(|&i| self.entries[i].clone()).collect(),
        };
        (schema, keep)
    }

    pub fn is_subset_of(&self, other: &FeatureSchema) -> bool {
        let names: HashSet<&str> = other.entries.iter().map(|e| e.name.as_str()).collect();
        self.entries.iter().all(|e| names.contains(e.name.as_str()))
    }

    /// Versioned sidecar text: header lines then `index,name,group` rows.
    pub fn to_sidecar(&self) -> String {
        let mut out = format!(
            "# lengthlogd feature schema\nversion={}\nmorgan_radius={}\nindex,name,group\n",
            self.version, self.morgan_radius
        );
        for (i, e) in self.entries.iter().enumerate() {
            out.push_str(&format!("{i},{},{}\n", e.name, e.group));
        }
        out
    }

    pub fn from_sidecar(text: &str) -> Result<Self, DescriptorError> {
        let bad = |m: &str| DescriptorError::Malformed(m.to_string());
        let mut lines = text.lines().filter(|l| !l.starts_with('#'));
        let version: u32 = lines
            .next()
            .and_then(|l| l.strip_prefix("version="))
            .and_then(|v| v.parse().ok())
            .ok_or_else(|| bad("missing version"))?;
        if version != SCHEMA_VERSION {
            return Err(bad(&format!("unsupported schema version {version}")));
        }
        let radius: usize = lines
            .next()
            .and_then(|l| l.strip_prefix("morgan_radius="))
            .and_then(|v| v.parse().ok())
            .ok_or_else(|| bad("missing morgan_radius"))?;
        if lines.next() != Some("index,name,group") {
            return Err(bad("missing column header"));
        }
        let mut entries = Vec::new();
        for (expected, line) in lines.enumerate() {
            let mut parts = line.splitn(3, ',');
            let (Some(i), Some(name), Some(group)) = (parts.next(), parts.next(), parts.next())
            else {
                return Err(bad(line));
            };
            if i.parse::<usize>().ok() != Some(expected) {
                return Err(bad(&format!("row index {i} out of order")));
            }
            entries.push(FeatureEntry {
                name: name.to_string(),
                group: group.parse()?,
            });
        }
        Self::from_entries(radius, entries)
    }
}

/// Values laid out in the order of a schema.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector<'s> {
    pub schema: &'s FeatureSchema,
    pub values: Vec<f64>,
}

/// Everything computed natively from one molecular graph.
#[derive(Debug, Clone, PartialEq)]
pub struct NativeDescriptors {
    pub morgan: Vec<u8>,
    pub global: GlobalDescriptors,
    pub kappa: Kappa,
    pub balaban_j: f64,
    pub wiener: u64,
    pub chi0: f64,
    pub chi1: f64,
    pub smiles_length: usize,
}

impl NativeDescriptors {
    pub fn compute(
        graph: &MolecularGraph,
        radius: usize,
        n_bits: usize,
    ) -> Result<Self, DescriptorError> {
        Ok(NativeDescriptors {
            morgan: morgan_fingerprint(graph, radius, n_bits),
            global: global_descriptors(graph),
            kappa: kappa_indices(graph),
            balaban_j: balaban_j(graph)?,
            wiener: wiener_index(graph)?,
            chi0: chi0(graph),
            chi1: chi1(graph),
            smiles_length: graph.smiles_length,
        })
    }

    /// Named scalar descriptors (everything except fingerprint bits).
    pub fn named(&self) -> HashMap<&'static str, f64> {
        let g = &self.global;
        let values = [
            g.mol_wt,
            g.exact_mol_wt,
            g.num_h_donors as f64,
            g.num_h_acceptors as f64,
            g.num_rotatable_bonds as f64,
            g.ring_count as f64,
            g.num_aromatic_rings as f64,
            g.fraction_csp3,
            self.kappa.kappa1,
            self.kappa.kappa2,
            self.kappa.kappa3,
            self.balaban_j,
        ];
        let mut map: HashMap<&'static str, f64> = GLOBAL_NAMES.into_iter().zip(values).collect();
        map.insert("WienerIndex", self.wiener as f64);
        map.insert("Chi0", self.chi0);
        map.insert("Chi1", self.chi1);
        map.insert(SMILES_LEN_NAME, self.smiles_length as f64);
        map
    }
}

/// Lay out native descriptors and external columns in schema order.
///
/// A missing external column is taken from `fill` when given, otherwise it is
/// an error naming the column.
pub fn assemble_from_natives<'s>(
    natives: &NativeDescriptors,
    external: &BTreeMap<String, f64>,
    schema: &'s FeatureSchema,
    fill: Option<&BTreeMap<String, f64>>,
) -> Result<FeatureVector<'s>, DescriptorError> {
    let named = natives.named();
    let mut values = Vec::with_capacity(schema.len());
    for e in schema.entries() {
        let v = match e.group {
            FeatureGroup::Morgan => {
                let bit: usize = e
                    .name
                    .strip_prefix("Morgan_")
                    .and_then(|b| b.parse().ok())
                    .ok_or_else(|| DescriptorError::Malformed(e.name.clone()))?;
                f64::from(*natives.morgan.get(bit).ok_or_else(|| {
                    DescriptorError::Malformed(format!("{} beyond fingerprint width", e.name))
                })?)
            }
            FeatureGroup::RdkitGlobal | FeatureGroup::Graph | FeatureGroup::SmilesLen => *named
                .get(e.name.as_str())
                .ok_or_else(|| DescriptorError::Malformed(format!("unknown native '{}'", e.name)))?,
            FeatureGroup::Maccs | FeatureGroup::External => {
                match external
                    .get(&e.name)
                    .or_else(|| fill.and_then(|f| f.get(&e.name)))
                {
                    Some(&v) => v,
                    None => return Err(DescriptorError::MissingColumn(e.name.clone())),
                }
            }
        };
        if !v.is_finite() {
            return Err(DescriptorError::NonFinite {
                column: e.name.clone(),
                value: v,
            });
        }
        values.push(v);
    }
    Ok(FeatureVector { schema, values })
}

pub fn assemble_features<'s>(
    graph: &MolecularGraph,
    external: &BTreeMap<String, f64>,
    schema: &'s FeatureSchema,
    fill: Option<&BTreeMap<String, f64>>,
) -> Result<FeatureVector<'s>, DescriptorError> {
    let width = schema.count(FeatureGroup::Morgan);
    let natives = NativeDescriptors::compute(graph, schema.morgan_radius, width.max(1))?;
    assemble_from_natives(&natives, external, schema, fill)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::smiles::parse_smiles;

    #[test]
    fn dimension_without_externals() {
        let schema = FeatureSchema::standard(2, 1024, &[]).unwrap();
        let g = parse_smiles("CCO").unwrap();
        let v = assemble_features(&g, &BTreeMap::new(), &schema, None).unwrap();
        assert_eq!(v.values.len(), 1024 + GRAPH_NAMES.len() + GLOBAL_NAMES.len() + 1);
        assert_eq!(*v.values.last().unwrap(), 3.0);
    }

    #[test]
    fn external_column_lands_in_place() {
        let names = vec!["MOE_PEOE_VSA_1".to_string(), "MACCS_12".to_string()];
        let schema = FeatureSchema::standard(2, 16, &names).unwrap();
        let mut ext = BTreeMap::new();
        ext.insert("MOE_PEOE_VSA_1".to_string(), 3.2);
        ext.insert("MACCS_12".to_string(), 1.0);
        let g = parse_smiles("CCO").unwrap();
        let v = assemble_features(&g, &ext, &schema, None).unwrap();
        let i = schema.index_of("MOE_PEOE_VSA_1").unwrap();
        assert_eq!(v.values[i], 3.2);
        assert_eq!(schema.entries()[i].group, FeatureGroup::External);
        assert_eq!(schema.index_of("MACCS_12"), Some(16));
        assert_eq!(i, 16 + 1 + GLOBAL_NAMES.len());
    }

    #[test]
    fn missing_column_is_named() {
        let names = vec!["MOE_x".to_string()];
        let schema = FeatureSchema::standard(2, 8, &names).unwrap();
        let g = parse_smiles("CCO").unwrap();
        let err = assemble_features(&g, &BTreeMap::new(), &schema, None).unwrap_err();
        assert_eq!(err, DescriptorError::MissingColumn("MOE_x".into()));
        let mut fill = BTreeMap::new();
        fill.insert("MOE_x".to_string(), 0.5);
        let v = assemble_features(&g, &BTreeMap::new(), &schema, Some(&fill)).unwrap();
        assert_eq!(v.values[schema.index_of("MOE_x").unwrap()], 0.5);
    }

    #[test]
    fn non_finite_external_rejected() {
        let names = vec!["MOE_x".to_string()];
        let schema = FeatureSchema::standard(2, 8, &names).unwrap();
        let mut ext = BTreeMap::new();
        ext.insert("MOE_x".to_string(), f64::NAN);
        let g = parse_smiles("C").unwrap();
        assert!(matches!(
            assemble_features(&g, &ext, &schema, None),
            Err(DescriptorError::NonFinite { .. })
        ));
    }

    #[test]
    fn schema_rules() {
        let conflict = vec!["MolWt".to_string()];
        assert_eq!(
            FeatureSchema::standard(2, 8, &conflict).unwrap_err(),
            DescriptorError::DuplicateName("MolWt".into())
        );
        let bad_order = vec![
            FeatureEntry { name: "a".into(), group: FeatureGroup::Graph },
            FeatureEntry { name: "b".into(), group: FeatureGroup::Morgan },
        ];
        assert!(FeatureSchema::from_entries(2, bad_order).is_err());
    }

    #[test]
    fn sidecar_round_trip() {
        let names = vec!["MACCS_1".to_string(), "vsurf_ID8".to_string()];
        let schema = FeatureSchema::standard(2, 32, &names).unwrap();
        let back = FeatureSchema::from_sidecar(&schema.to_sidecar()).unwrap();
        assert_eq!(schema, back);
    }

    #[test]
    fn masking_keeps_order() {
        let names = vec!["MOE_a".to_string()];
        let full = FeatureSchema::standard(2, 8, &names).unwrap();
        let (masked, keep) = full.without_groups(&[FeatureGroup::Graph, FeatureGroup::External]);
        assert!(masked.is_subset_of(&full));
        assert_eq!(masked.len(), full.len() - 4);
        assert!(keep.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(masked.count(FeatureGroup::Graph), 0);
        assert_eq!(masked.count(FeatureGroup::SmilesLen), 1);
    }
}
