//! Report tables as CSV (full precision) and aligned text (4 decimals), and
//! figure-ready data files.

use std::fmt::Write as _;
use std::io::Write;
use std::path::Path;

use super::ablation::{AblationReport, ComparisonReport};
use super::cv::CvReport;
use super::importance::ImportanceReport;
use crate::dataset::{Category, Split};
use crate::ensemble::{EnsembleMode, ModeMetrics, TrainOutput, TrainReport};

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Text(String),
    Int(usize),
    Num(f64),
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Text(s) => s.clone(),
            Cell::Int(v) => v.to_string(),
            Cell::Num(v) => v.to_string(),
        }
    }

    fn text(&self) -> String {
        match self {
            Cell::Text(s) => s.clone(),
            Cell::Int(v) => v.to_string(),
            Cell::Num(v) if v.abs() >= 1e6 => format!("{v:.3e}"),
            Cell::Num(v) => format!("{v:.4}"),
        }
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_string())
    }
}

impl From<String> for Cell {
    fn from(s: String) -> Self {
        Cell::Text(s)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v)
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub title: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(title: &str, header: &[&str]) -> Table {
        Table {
            title: title.to_string(),
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<(), csv::Error> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(&self.header)?;
        for r in &self.rows {
            w.write_record(r.iter().map(Cell::csv))?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_text(&self) -> String {
        let cells: Vec<Vec<String>> = self.rows.iter().map(|r| r.iter().map(Cell::text).collect()).collect();
        let mut widths: Vec<usize> = self.header.iter().map(|h| h.chars().count()).collect();
        for r in &cells {
            for (w, c) in widths.iter_mut().zip(r) {
                *w = (*w).max(c.chars().count());
            }
        }
        let mut s = String::new();
        if !self.title.is_empty() {
            let _ = writeln!(s, "{}", self.title);
        }
        let line = |s: &mut String, row: &[String]| {
            let parts: Vec<String> = row.iter().zip(&widths).map(|(c, w)| format!("{c:<w$}")).collect();
            let _ = writeln!(s, "{}", parts.join("  ").trim_end());
        };
        line(&mut s, &self.header);
        let rule: Vec<String> = widths.iter().map(|w| "-".repeat(*w)).collect();
        line(&mut s, &rule);
        for r in &cells {
            line(&mut s, r);
        }
        s
    }

    /// Writes `<stem>.csv` and `<stem>.txt` into `dir`.
    pub fn save(&self, dir: &Path, stem: &str) -> std::io::Result<()> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).map_err(std::io::Error::other)?;
        std::fs::write(dir.join(format!("{stem}.csv")), buf)?;
        std::fs::write(dir.join(format!("{stem}.txt")), self.to_text())
    }
}

/// One row per category with stacking and fixed-weight metric columns.
pub fn performance_table(rows: &[(Category, EnsembleMode, ModeMetrics)]) -> Table {
    let mut header = vec!["category", "n", "active"];
    let metric_names = ["r2", "mae", "mse", "rmse", "r"];
    let names: Vec<String> = EnsembleMode::ALL
        .iter()
        .flat_map(|m| metric_names.iter().map(move |k| format!("{}_{k}", m.as_str())))
        .collect();
    header.extend(names.iter().map(String::as_str));
    let mut t = Table::new("Test-split performance by length category", &header);
    for (category, active, metrics) in rows {
        let mut row: Vec<Cell> = vec![category.as_str().into(), metrics.n.into(), active.as_str().into()];
        for mode in EnsembleMode::ALL {
            match metrics.mode(mode) {
                Some(m) => row.extend([m.r2, m.mae, m.mse, m.rmse, m.r].map(Cell::Num)),
                None => row.extend([f64::NAN; 5].map(Cell::Num)),
            }
        }
        t.push(row);
    }
    t
}

pub fn train_performance_table(report: &TrainReport) -> Table {
    let rows: Vec<(Category, EnsembleMode, ModeMetrics)> = report
        .categories
        .iter()
        .map(|c| (c.category, c.active_mode, c.test.clone()))
        .collect();
    performance_table(&rows)
}

/// Fixed weights, meta-learner and selected hyperparameters per category.
pub fn weights_table(report: &TrainReport) -> Table {
    let mut t = Table::new(
        "Ensemble weights",
        &[
            "category", "w_lr", "w_rf", "w_xgb", "meta_lr", "meta_rf", "meta_xgb", "meta_intercept", "meta_lambda",
            "ridge_lambda", "pooled_fallback",
        ],
    );
    for c in &report.categories {
        let mw = |j: usize| Cell::Num(c.meta_weights.get(j).copied().unwrap_or(f64::NAN));
        t.push(vec![
            c.category.as_str().into(),
            c.weights.w_lr.into(),
            c.weights.w_rf.into(),
            c.weights.w_xgb.into(),
            mw(0),
            mw(1),
            mw(2),
            c.meta_intercept.into(),
            c.fit.meta_lambda.into(),
            c.fit.ridge_lambda.into(),
            (if c.fit.pooled_fallback { "yes" } else { "no" }).into(),
        ]);
    }
    t
}

pub fn ablation_table(report: &AblationReport) -> Table {
    let mut t = Table::new(
        "Ablation across feature sets (test split)",
        &["preset", "model", "n_features", "r2", "mae", "mse"],
    );
    for r in &report.rows {
        t.push(vec![
            r.preset.as_str().into(),
            r.model.clone().into(),
            r.n_features.into(),
            r.metrics.r2.into(),
            r.metrics.mae.into(),
            r.metrics.mse.into(),
        ]);
    }
    t
}

pub fn comparison_table(report: &ComparisonReport) -> Table {
    let mut t = Table::new(
        "Pooled baselines vs. length-stratified ensembles (test split)",
        &["model", "scope", "mode", "n", "r2", "mae", "rmse"],
    );
    for r in &report.rows {
        t.push(vec![
            r.model.clone().into(),
            r.category.map_or("all", |c| c.as_str()).into(),
            r.mode.map_or("-", |m| m.as_str()).into(),
            r.metrics.n.into(),
            r.metrics.r2.into(),
            r.metrics.mae.into(),
            r.metrics.rmse.into(),
        ]);
    }
    t
}

/// Top-k features with both importances, and the per-source shares.
pub fn importance_tables(report: &ImportanceReport) -> (Table, Table) {
    let mut top = Table::new(
        "Top features by impurity importance",
        &["rank", "feature", "group", "source", "impurity", "permutation"],
    );
    for (rank, f) in report.top_features().enumerate() {
        top.push(vec![
            (rank + 1).into(),
            f.name.clone().into(),
            f.group.as_str().into(),
            f.source.as_str().into(),
            f.impurity.into(),
            f.permutation.into(),
        ]);
    }
    let mut shares = Table::new("Cumulative importance by source", &["source", "count", "share"]);
    for s in &report.shares {
        shares.push(vec![s.source.as_str().into(), s.count.into(), s.share.into()]);
    }
    (top, shares)
}

/// Every feature with both importances, in schema order.
pub fn importance_all_table(report: &ImportanceReport) -> Table {
    let mut t = Table::new("", &["index", "feature", "group", "source", "impurity", "permutation"]);
    for f in &report.features {
        t.push(vec![
            f.index.into(),
            f.name.clone().into(),
            f.group.as_str().into(),
            f.source.as_str().into(),
            f.impurity.into(),
            f.permutation.into(),
        ]);
    }
    t
}

/// Per-fold rows and a mean/sd summary.
pub fn cv_tables(report: &CvReport) -> (Table, Table) {
    let mut folds = Table::new(
        "Cross-validation folds",
        &[
            "repeat", "fold", "n_train", "n_val", "n_test", "q33", "q66", "r2", "mae", "mse", "rmse", "r",
            "r2_stacking", "r2_fixed",
        ],
    );
    for f in &report.folds {
        let m = &f.metrics;
        folds.push(vec![
            f.repeat.into(),
            f.fold.into(),
            f.n_train.into(),
            f.n_val.into(),
            f.n_test.into(),
            f.thresholds.q33.into(),
            f.thresholds.q66.into(),
            m.r2.into(),
            m.mae.into(),
            m.mse.into(),
            m.rmse.into(),
            m.r.into(),
            f.stacking.r2.into(),
            f.fixed.r2.into(),
        ]);
    }
    let mut summary = Table::new(
        &format!("{}-fold cross-validation, {} repeat(s)", report.k, report.repeats),
        &["scope", "r2", "r2_sd", "mae", "mae_sd", "mse", "rmse", "r"],
    );
    summary.push(vec![
        "folds".into(),
        report.r2.mean.into(),
        report.r2.sd.into(),
        report.mae.mean.into(),
        report.mae.sd.into(),
        report.mse.mean.into(),
        report.rmse.mean.into(),
        report.r.mean.into(),
    ]);
    for r in &report.per_repeat {
        let m = &r.pooled;
        summary.push(vec![
            format!("repeat {}", r.repeat).into(),
            m.r2.into(),
            Cell::Num(f64::NAN),
            m.mae.into(),
            Cell::Num(f64::NAN),
            m.mse.into(),
            m.rmse.into(),
            m.r.into(),
        ]);
    }
    (folds, summary)
}

/// True vs. predicted logD for every test record, with both modes.
pub fn scatter_table(out: &TrainOutput) -> Table {
    let mut t = Table::new("", &["id", "category", "y_true", "y_pred", "y_stacking", "y_fixed", "active_mode"]);
    for i in out.strat.indices(None, Split::Test) {
        let (s, f) = &out.predictions[i];
        let active = out.model.category(s.category).mode;
        let pred = if active == EnsembleMode::Stacking { s.logd } else { f.logd };
        t.push(vec![
            out.table.ids[i].clone().into(),
            s.category.as_str().into(),
            out.table.y[i].into(),
            pred.into(),
            s.logd.into(),
            f.logd.into(),
            active.as_str().into(),
        ]);
    }
    t
}

/// Writes the figure-ready CSVs that exist for the given reports.
pub fn write_figure_data(
    dir: &Path,
    train: Option<&TrainOutput>,
    importance: Option<&ImportanceReport>,
) -> std::io::Result<Vec<String>> {
    let mut written = Vec::new();
    let mut save = |t: &Table, name: &str| -> std::io::Result<()> {
        let mut buf = Vec::new();
        t.write_csv(&mut buf).map_err(std::io::Error::other)?;
        std::fs::write(dir.join(name), buf)?;
        written.push(name.to_string());
        Ok(())
    };
    if let Some(out) = train {
        save(&scatter_table(out), "fig_scatter.csv")?;
    }
    if let Some(imp) = importance {
        let (top, shares) = importance_tables(imp);
        save(&top, "fig_importance_bars.csv")?;
        save(&shares, "fig_source_shares.csv")?;
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn text_alignment_and_csv() {
        let mut t = Table::new("T", &["a", "value"]);
        t.push(vec!["long-name".into(), 0.5.into()]);
        t.push(vec!["x".into(), 12.0.into()]);
        assert_eq!(t.to_text(), "T\na          value\n---------  -------\nlong-name  0.5000\nx          12.0000\n");
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "a,value\nlong-name,0.5\nx,12\n");
    }

    #[test]
    fn sentinel_is_compact() {
        assert_eq!(Cell::Num(-1e30).text(), "-1.000e30");
    }
}
