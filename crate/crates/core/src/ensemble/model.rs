//! Length-routed predictor and its JSON artifact.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::category::CategoryModel;
use super::pipeline::PipelineConfig;
use super::{EnsembleError, EnsembleMode};
use crate::dataset::{categorize, feature_row, Category, LengthThresholds, MissingPolicy};
use crate::descriptors::{FeatureGroup, FeatureSchema, NativeDescriptors};
use crate::smiles::parse_smiles;

pub const FORMAT_NAME: &str = "lengthlogd-model";
pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingMetadata {
    pub seed: u64,
    /// FNV-1a of the training CSV bytes, as 16 hex digits.
    pub dataset_fingerprint: String,
    pub n_train: usize,
    pub n_val: usize,
    pub config: PipelineConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LengthLogDModel {
    pub format: String,
    pub format_version: u32,
    pub schema: FeatureSchema,
    pub thresholds: LengthThresholds,
    pub missing_policy: MissingPolicy,
    /// Short, Medium, Long in that order.
    pub categories: Vec<CategoryModel>,
    pub metadata: TrainingMetadata,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub category: Category,
    pub smiles_length: usize,
    pub mode: EnsembleMode,
    pub logd: f64,
    /// `[ŷ_LR, ŷ_RF, ŷ_XGB]`.
    pub base: [f64; 3],
}

impl LengthLogDModel {
    pub fn category(&self, c: Category) -> &CategoryModel {
        self.categories
            .iter()
            .find(|m| m.category == c)
            .expect("validated: every category present")
    }

    pub fn route(&self, smiles_length: usize) -> Category {
        categorize(smiles_length, &self.thresholds)
    }

    /// Predicts from an unscaled feature row laid out in `self.schema`.
    pub fn predict_features(
        &self,
        raw: &[f64],
        smiles_length: usize,
        mode: Option<EnsembleMode>,
    ) -> Result<Prediction, EnsembleError> {
        let category = self.route(smiles_length);
        let m = self.category(category);
        let mode = mode.unwrap_or(m.mode);
        let (logd, base) = m.predict_raw(raw, mode)?;
        Ok(Prediction {
            category,
            smiles_length,
            mode,
            logd,
            base,
        })
    }

    /// Parses, featurizes, routes by SMILES length and predicts.
    pub fn predict_logd(
        &self,
        smiles: &str,
        external: &BTreeMap<String, f64>,
        mode: Option<EnsembleMode>,
    ) -> Result<Prediction, EnsembleError> {
        let graph = parse_smiles(smiles)?;
        let bits = self.schema.count(FeatureGroup::Morgan).max(1);
        let natives = NativeDescriptors::compute(&graph, self.schema.morgan_radius, bits)?;
        let allow_missing = self.missing_policy == MissingPolicy::MeanImpute;
        let raw = feature_row(&natives, external, &self.schema, allow_missing)?;
        self.predict_features(&raw, graph.smiles_length, mode)
    }

    fn validate(&self) -> Result<(), EnsembleError> {
        if self.format != FORMAT_NAME || self.format_version != FORMAT_VERSION {
            return Err(EnsembleError::UnsupportedVersion(self.format.clone(), self.format_version));
        }
        let cats: Vec<Category> = self.categories.iter().map(|c| c.category).collect();
        if cats != Category::ALL {
            return Err(EnsembleError::InvalidModel(format!(
                "categories must be short, medium, long exactly once; found {cats:?}"
            )));
        }
        for c in &self.categories {
            if c.scaler.dim() != self.schema.len() {
                return Err(EnsembleError::InvalidModel(format!(
                    "{} scaler has {} features, schema has {}",
                    c.category,
                    c.scaler.dim(),
                    self.schema.len()
                )));
            }
        }
        if !(self.thresholds.q33 <= self.thresholds.q66) {
            return Err(EnsembleError::InvalidModel("thresholds out of order".into()));
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String, EnsembleError> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    pub fn from_json(text: &str) -> Result<Self, EnsembleError> {
        #[derive(Deserialize)]
        struct Header {
            format: String,
            format_version: u32,
        }
        let h: Header = serde_json::from_str(text)?;
        if h.format != FORMAT_NAME || h.format_version != FORMAT_VERSION {
            return Err(EnsembleError::UnsupportedVersion(h.format, h.format_version));
        }
        let m: LengthLogDModel = serde_json::from_str(text)?;
        m.validate()?;
        Ok(m)
    }

    pub fn save(&self, path: &Path) -> Result<(), EnsembleError> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self, EnsembleError> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}
