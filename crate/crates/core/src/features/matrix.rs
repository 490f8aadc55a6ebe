use std::path::Path;

use super::FeatureError;

/// Row-major feature matrix; row i belongs to `sim_ids[i]`.
///
/// Column names travel with the values so downstream consumers (model
/// binding, scalers, CSV round-trips) can verify alignment.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    pub sim_ids: Vec<String>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl FeatureMatrix {
    pub fn new(sim_ids: Vec<String>, columns: Vec<String>, rows: Vec<Vec<f64>>) -> Self {
        debug_assert_eq!(sim_ids.len(), rows.len());
        debug_assert!(rows.iter().all(|r| r.len() == columns.len()));
        FeatureMatrix {
            sim_ids,
            columns,
            rows,
        }
    }

    /// Convenience for tests and model code that has no real sim ids.
    pub fn unlabeled(columns: Vec<String>, rows: Vec<Vec<f64>>) -> Self {
        let sim_ids = (0..rows.len()).map(|i| format!("row{i}")).collect();
        Self::new(sim_ids, columns, rows)
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn n_cols(&self) -> usize {
        self.columns.len()
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    pub fn column(&self, idx: usize) -> Vec<f64> {
        self.rows.iter().map(|r| r[idx]).collect()
    }

    /// Keeps the given columns (indices into the current column order).
    pub fn select_columns(&self, keep: &[usize]) -> FeatureMatrix {
        FeatureMatrix {
            sim_ids: self.sim_ids.clone(),
            columns: keep.iter().map(|&i| self.columns[i].clone()).collect(),
            rows: self
                .rows
                .iter()
                .map(|r| keep.iter().map(|&i| r[i]).collect())
                .collect(),
        }
    }

    /// Keeps the given rows, in the given order.
    pub fn take_rows(&self, keep: &[usize]) -> FeatureMatrix {
        FeatureMatrix {
            sim_ids: keep.iter().map(|&i| self.sim_ids[i].clone()).collect(),
            columns: self.columns.clone(),
            rows: keep.iter().map(|&i| self.rows[i].clone()).collect(),
        }
    }

    pub fn to_csv_string(&self) -> String {
        let mut out = String::from("sim_id");
        for c in &self.columns {
            out.push(',');
            out.push_str(c);
        }
        out.push('\n');
        for (sim, row) in self.sim_ids.iter().zip(&self.rows) {
            out.push_str(sim);
            for v in row {
                out.push(',');
                // shortest round-trip formatting keeps the file exact
                out.push_str(&format!("{v}"));
            }
            out.push('\n');
        }
        out
    }

    pub fn write_csv(&self, path: &Path) -> Result<(), FeatureError> {
        std::fs::write(path, self.to_csv_string()).map_err(|source| FeatureError::Io {
            path: path.display().to_string(),
            source,
        })
    }

    pub fn read_csv(path: &Path) -> Result<FeatureMatrix, FeatureError> {
        let content = std::fs::read_to_string(path).map_err(|source| FeatureError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_csv_str(&content)
    }

    pub fn from_csv_str(content: &str) -> Result<FeatureMatrix, FeatureError> {
        let mut lines = content.lines();
        let header = lines
            .next()
            .ok_or_else(|| FeatureError::Csv("empty file".into()))?;
        let mut cols = header.split(',');
        if cols.next() != Some("sim_id") {
            return Err(FeatureError::Csv(
                "first column must be sim_id".into(),
            ));
        }
        let columns: Vec<String> = cols.map(str::to_string).collect();
        let mut sim_ids = Vec::new();
        let mut rows = Vec::new();
        for (i, line) in lines.enumerate() {
            if line.is_empty() {
                continue;
            }
            let mut fields = line.split(',');
            let sim = fields
                .next()
                .ok_or_else(|| FeatureError::Csv(format!("line {}: empty", i + 2)))?;
            let row: Result<Vec<f64>, _> = fields.map(str::parse::<f64>).collect();
            let row = row.map_err(|e| FeatureError::Csv(format!("line {}: {e}", i + 2)))?;
            if row.len() != columns.len() {
                return Err(FeatureError::Csv(format!(
                    "line {}: {} values, expected {}",
                    i + 2,
                    row.len(),
                    columns.len()
                )));
            }
            sim_ids.push(sim.to_string());
            rows.push(row);
        }
        Ok(FeatureMatrix {
            sim_ids,
            columns,
            rows,
        })
    }
}
