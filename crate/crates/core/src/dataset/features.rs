//! Design matrices assembled from cleaned records.

use std::collections::BTreeMap;
use std::io::Write;

use ndarray::{Array1, Array2, Axis};
use rayon::prelude::*;

use super::{DatasetError, Record};
use crate::descriptors::{
    assemble_from_natives, DescriptorError, FeatureGroup, FeatureSchema, NativeDescriptors,
};
use crate::smiles::parse_smiles;

/// One feature row in schema order.
///
/// With `allow_missing`, absent external columns become NaN (imputed later by
/// the scaler); otherwise they are an error.
pub fn feature_row(
    natives: &NativeDescriptors,
    external: &BTreeMap<String, f64>,
    schema: &FeatureSchema,
    allow_missing: bool,
) -> Result<Vec<f64>, DescriptorError> {
    if !allow_missing {
        return Ok(assemble_from_natives(natives, external, schema, None)?.values);
    }
    let missing: Vec<usize> = schema
        .entries()
        .iter()
        .enumerate()
        .filter(|(_, e)| {
            matches!(e.group, FeatureGroup::Maccs | FeatureGroup::External)
                && !external.contains_key(&e.name)
        })
        .map(|(i, _)| i)
        .collect();
    let fill: BTreeMap<String, f64> = missing
        .iter()
        .map(|&i| (schema.entries()[i].name.clone(), 0.0))
        .collect();
    let mut values = assemble_from_natives(natives, external, schema, Some(&fill))?.values;
    for i in missing {
        values[i] = f64::NAN;
    }
    Ok(values)
}

pub fn natives_for(
    smiles: &str,
    schema: &FeatureSchema,
) -> Result<NativeDescriptors, Box<dyn std::error::Error + Send + Sync>> {
    let graph = parse_smiles(smiles)?;
    let bits = schema.count(FeatureGroup::Morgan).max(1);
    Ok(NativeDescriptors::compute(&graph, schema.morgan_radius, bits)?)
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureTable {
    pub schema: FeatureSchema,
    pub ids: Vec<String>,
    pub lengths: Vec<usize>,
    pub x: Array2<f64>,
    pub y: Array1<f64>,
}

impl FeatureTable {
    /// Featurizes every record; native descriptors are computed in parallel.
    pub fn build(
        records: &[Record],
        schema: FeatureSchema,
        allow_missing: bool,
    ) -> Result<FeatureTable, DatasetError> {
        let rows: Vec<Vec<f64>> = records
            .par_iter()
            .map(|r| -> Result<Vec<f64>, DatasetError> {
                let natives = natives_for(&r.smiles, &schema).map_err(|e| {
                    DescriptorError::Malformed(format!("record '{}': {e}", r.id))
                })?;
                Ok(feature_row(&natives, &r.external, &schema, allow_missing)?)
            })
            .collect::<Result<_, _>>()?;
        let p = schema.len();
        let mut x = Array2::zeros((rows.len(), p));
        for (i, row) in rows.into_iter().enumerate() {
            x.row_mut(i).assign(&Array1::from(row));
        }
        Ok(FeatureTable {
            schema,
            ids: records.iter().map(|r| r.id.clone()).collect(),
            lengths: records.iter().map(Record::smiles_length).collect(),
            x,
            y: records.iter().map(|r| r.logd).collect(),
        })
    }

    pub fn len(&self) -> usize {
        self.x.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.x.nrows() == 0
    }

    /// Drops whole feature groups.
    pub fn without_groups(&self, excluded: &[FeatureGroup]) -> FeatureTable {
        let (schema, keep) = self.schema.without_groups(excluded);
        FeatureTable {
            schema,
            ids: self.ids.clone(),
            lengths: self.lengths.clone(),
            x: self.x.select(Axis(1), &keep),
            y: self.y.clone(),
        }
    }

    pub fn rows(&self, idx: &[usize]) -> (Array2<f64>, Array1<f64>) {
        (self.x.select(Axis(0), idx), self.y.select(Axis(0), idx))
    }

    /// `id,logd,<feature names...>`; missing cells are left empty.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<(), DatasetError> {
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["id".to_string(), "logd".to_string()];
        header.extend(self.schema.entries().iter().map(|e| e.name.clone()));
        w.write_record(&header)?;
        for i in 0..self.len() {
            let mut rec = vec![self.ids[i].clone(), self.y[i].to_string()];
            rec.extend(self.x.row(i).iter().map(|v| {
                if v.is_nan() {
                    String::new()
                } else {
                    v.to_string()
                }
            }));
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::clean_csv;

    fn table(allow: bool) -> Result<FeatureTable, DatasetError> {
        let csv = "id,smiles,logd,MOE_a,MACCS_1\n1,CC,-1,0.5,1\n2,CCC,-2,,0\n3,CCCC,-2.5,0.1,1\n";
        let d = clean_csv(csv.as_bytes()).unwrap();
        let schema = FeatureSchema::standard(2, 64, &d.external_columns).unwrap();
        FeatureTable::build(&d.records, schema, allow)
    }

    #[test]
    fn shape_and_missing() {
        let t = table(true).unwrap();
        assert_eq!(t.x.dim(), (3, 64 + 1 + 12 + 1 + 3 + 1));
        let j = t.schema.index_of("MOE_a").unwrap();
        assert!(t.x[[1, j]].is_nan());
        assert_eq!(t.x[[0, j]], 0.5);
        assert!(matches!(table(false), Err(DatasetError::Descriptor(_))));
    }

    #[test]
    fn masking_and_csv() {
        let t = table(true).unwrap();
        let m = t.without_groups(&[FeatureGroup::Graph]);
        assert_eq!(m.x.ncols(), t.x.ncols() - 3);
        assert!(m.schema.is_subset_of(&t.schema));
        let mut a = Vec::new();
        let mut b = Vec::new();
        t.write_csv(&mut a).unwrap();
        table(true).unwrap().write_csv(&mut b).unwrap();
        assert_eq!(a, b);
        assert_eq!(String::from_utf8(a).unwrap().lines().count(), 4);
    }
}
