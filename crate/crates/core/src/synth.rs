//! Synthetic pseudo-peptide dataset with a known, learnable logD.
//!
//! Peptides are built from amino-acid side chains on a linear or
//! head-to-tail cyclic backbone, with optional N-methylation. The target is a
//! smooth function of molecular weight, Wiener index, χ1 and two external
//! descriptor columns, plus Gaussian noise.

use std::collections::HashSet;
use std::io::Write;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::descriptors::{chi1, global_descriptors, wiener_index};
use crate::hash::derive_seed;
use crate::smiles::parse_smiles;

const SIDE_CHAINS: [&str; 18] = [
    "",
    "C",
    "C(C)C",
    "CC(C)C",
    "C(C)CC",
    "Cc1ccccc1",
    "Cc1ccc(O)cc1",
    "CO",
    "C(C)O",
    "CCSC",
    "Cc1c[nH]c2ccccc12",
    "CC(N)=O",
    "CCC(N)=O",
    "CC(=O)O",
    "CCC(=O)O",
    "CCCCN",
    "Cc1cnc[nH]1",
    "CS",
];

#[derive(Debug, Clone, PartialEq)]
pub struct SynthConfig {
    pub n_per_band: usize,
    /// Inclusive residue-count ranges for the short, medium and long bands.
    pub bands: [(usize, usize); 3],
    pub noise_sd: f64,
    pub cyclic_fraction: f64,
    pub n_methyl_fraction: f64,
    pub maccs_columns: usize,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            n_per_band: 200,
            bands: [(3, 5), (6, 9), (10, 14)],
            noise_sd: 0.1,
            cyclic_fraction: 0.25,
            n_methyl_fraction: 0.2,
            maccs_columns: 8,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthRecord {
    pub id: String,
    pub smiles: String,
    pub band: usize,
    pub logd: f64,
    /// Noise-free part of the target.
    pub signal: f64,
    /// Signal-carrying external columns.
    pub moe_a: f64,
    pub moe_b: f64,
    /// External column unrelated to the target.
    pub moe_noise: f64,
    pub maccs: Vec<u8>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthDataset {
    pub records: Vec<SynthRecord>,
    pub maccs_columns: usize,
}

/// Builds a peptide SMILES from side-chain indices.
pub fn peptide_smiles(residues: &[usize], cyclic: bool, n_methyl: &[bool]) -> String {
    let mut s = String::new();
    for (i, &r) in residues.iter().enumerate() {
        s.push('N');
        if i == 0 && cyclic {
            s.push('9');
        }
        if n_methyl[i] && (i > 0 || cyclic) {
            s.push_str("(C)");
        }
        let side = SIDE_CHAINS[r];
        if side.is_empty() {
            s.push('C');
        } else {
            s.push_str("C(");
            s.push_str(side);
            s.push(')');
        }
        if i + 1 == residues.len() {
            s.push_str(if cyclic { "C9=O" } else { "C(=O)O" });
        } else {
            s.push_str("C(=O)");
        }
    }
    s
}

fn zscore(values: &[f64]) -> Vec<f64> {
    let n = values.len() as f64;
    let m = values.iter().sum::<f64>() / n;
    let sd = (values.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / n).sqrt();
    values.iter().map(|v| if sd > 0.0 { (v - m) / sd } else { 0.0 }).collect()
}

pub fn generate(cfg: &SynthConfig) -> SynthDataset {
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(cfg.seed, "synth/structures"));
    let mut seen = HashSet::new();
    let mut drafts = Vec::new();
    for (band, &(lo, hi)) in cfg.bands.iter().enumerate() {
        let mut made = 0;
        while made < cfg.n_per_band {
            let k = rng.random_range(lo..=hi);
            let residues: Vec<usize> = (0..k).map(|_| rng.random_range(0..SIDE_CHAINS.len())).collect();
            let cyclic = rng.random_bool(cfg.cyclic_fraction);
            let methyl: Vec<bool> = (0..k).map(|_| rng.random_bool(cfg.n_methyl_fraction)).collect();
            let smiles = peptide_smiles(&residues, cyclic, &methyl);
            if seen.insert(smiles.clone()) {
                drafts.push((band, smiles));
                made += 1;
            }
        }
    }

    let mut mw = Vec::with_capacity(drafts.len());
    let mut log_w = Vec::with_capacity(drafts.len());
    let mut c1 = Vec::with_capacity(drafts.len());
    for (_, smi) in &drafts {
        let g = parse_smiles(smi).expect("generator emits valid SMILES");
        mw.push(global_descriptors(&g).mol_wt);
        log_w.push((wiener_index(&g).expect("connected") as f64).ln());
        c1.push(chi1(&g));
    }
    let (z_mw, z_w, z_c1) = (zscore(&mw), zscore(&log_w), zscore(&c1));

    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(cfg.seed, "synth/targets"));
    let noise = Normal::new(0.0, cfg.noise_sd).expect("finite sd");
    let records = drafts
        .into_iter()
        .enumerate()
        .map(|(i, (band, smiles))| {
            let moe_a: f64 = rng.random_range(-1.0..1.0);
            let moe_b: f64 = rng.random_range(-1.0..1.0);
            let moe_noise: f64 = rng.random_range(0.0..1.0);
            let maccs = (0..cfg.maccs_columns).map(|_| u8::from(rng.random_bool(0.5))).collect();
            let signal = -1.9 + 0.6 * moe_a - 0.5 * moe_b + 0.25 * z_mw[i].tanh() + 0.1 * z_c1[i]
                - 0.1 * z_w[i];
            let logd = signal + noise.sample(&mut rng);
            SynthRecord {
                id: format!("PEP{:04}", i + 1),
                smiles,
                band,
                logd,
                signal,
                moe_a,
                moe_b,
                moe_noise,
                maccs,
            }
        })
        .collect();
    SynthDataset {
        records,
        maccs_columns: cfg.maccs_columns,
    }
}

impl SynthDataset {
    pub fn write_csv<W: Write>(&self, out: W) -> Result<(), csv::Error> {
        let mut w = csv::Writer::from_writer(out);
        let mut header: Vec<String> = ["id", "smiles", "logd", "MOE_a", "MOE_b", "MOE_noise"]
            .iter()
            .map(|s| s.to_string())
            .collect();
        header.extend((1..=self.maccs_columns).map(|i| format!("MACCS_{i}")));
        w.write_record(&header)?;
        for r in &self.records {
            let mut row = vec![
                r.id.clone(),
                r.smiles.clone(),
                r.logd.to_string(),
                r.moe_a.to_string(),
                r.moe_b.to_string(),
                r.moe_noise.to_string(),
            ];
            row.extend(r.maccs.iter().map(|b| b.to_string()));
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_csv_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        self.write_csv(&mut out).expect("in-memory write");
        out
    }

    /// Same structures and externals with the targets permuted.
    pub fn with_shuffled_targets(&self, seed: u64) -> SynthDataset {
        use rand::seq::SliceRandom;
        let mut targets: Vec<f64> = self.records.iter().map(|r| r.logd).collect();
        targets.shuffle(&mut ChaCha8Rng::seed_from_u64(derive_seed(seed, "synth/shuffle")));
        let mut out = self.clone();
        for (r, t) in out.records.iter_mut().zip(targets) {
            r.logd = t;
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn smiles_builder() {
        assert_eq!(peptide_smiles(&[0, 1], false, &[false, false]), "NCC(=O)NC(C)C(=O)O");
        assert_eq!(peptide_smiles(&[0, 1], true, &[false, true]), "N9CC(=O)N(C)C(C)C9=O");
        for r in 0..SIDE_CHAINS.len() {
            let s = peptide_smiles(&[r, r, r], r % 2 == 0, &[true, false, true]);
            parse_smiles(&s).unwrap_or_else(|e| panic!("{s}: {e}"));
        }
    }

    #[test]
    fn fixture_shape() {
        let cfg = SynthConfig {
            n_per_band: 20,
            ..Default::default()
        };
        let d = generate(&cfg);
        assert_eq!(d.records.len(), 60);
        for b in 0..3 {
            assert_eq!(d.records.iter().filter(|r| r.band == b).count(), 20);
        }
        let unique: HashSet<&str> = d.records.iter().map(|r| r.smiles.as_str()).collect();
        assert_eq!(unique.len(), 60);
        assert_eq!(generate(&cfg), d);
        let csv = d.to_csv_bytes();
        let clean = crate::dataset::clean_csv(&csv).unwrap();
        assert_eq!(clean.records.len(), 60);
        assert_eq!(clean.external_columns.len(), 3 + 8);
    }
}
