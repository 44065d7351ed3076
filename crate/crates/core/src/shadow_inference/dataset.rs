use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Test,
}

impl Split {
    pub fn name(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Test => "test",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetRow {
    pub label: usize,
    pub seed_index: usize,
    pub split: Split,
    pub features: Vec<f64>,
}

/// Labeled feature vectors of shadow policies.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ShadowDataset {
    pub n_candidates: usize,
    pub rows: Vec<DatasetRow>,
}

impl ShadowDataset {
    pub fn new(n_candidates: usize) -> Self {
        Self {
            n_candidates,
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: DatasetRow) -> Result<()> {
        if row.label >= self.n_candidates {
            return Err(Error::Domain(format!("label {} outside 0..{}", row.label, self.n_candidates)));
        }
        if row.features.len() != 2 * self.n_candidates {
            return Err(Error::Shape(format!(
                "feature vector of length {} for {} candidates",
                row.features.len(),
                self.n_candidates
            )));
        }
        self.rows.push(row);
        Ok(())
    }

    pub fn split(&self, split: Split) -> impl Iterator<Item = &DatasetRow> {
        self.rows.iter().filter(move |r| r.split == split)
    }

    /// Rows per label within one split.
    pub fn counts(&self, split: Split) -> Vec<usize> {
        let mut c = vec![0; self.n_candidates];
        for r in self.split(split) {
            c[r.label] += 1;
        }
        c
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("label,seed,split");
        for i in 1..=self.n_candidates {
            write!(out, ",m{i},v{i}").unwrap();
        }
        out.push('\n');
        for r in &self.rows {
            write!(out, "{},{},{}", r.label, r.seed_index, r.split.name()).unwrap();
            for v in &r.features {
                // `{:?}` prints the shortest string that parses back to the same f64.
                write!(out, ",{v:?}").unwrap();
            }
            out.push('\n');
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate();
        let (_, header) = lines
            .next()
            .ok_or_else(|| Error::Format("empty feature table".into()))?;
        let cols: Vec<&str> = header.split(',').collect();
        if cols.len() < 5 || cols[..3] != ["label", "seed", "split"] || (cols.len() - 3) % 2 != 0 {
            return Err(Error::Format(format!("bad feature table header: {header}")));
        }
        let n = (cols.len() - 3) / 2;
        let mut ds = ShadowDataset::new(n);
        for (lineno, line) in lines {
            if line.trim().is_empty() {
                continue;
            }
            let bad = |what: &str| Error::Parse {
                line: lineno + 1,
                column: 0,
                message: what.to_string(),
            };
            let f: Vec<&str> = line.split(',').collect();
            if f.len() != cols.len() {
                return Err(bad("wrong number of fields"));
            }
            let split = match f[2] {
                "train" => Split::Train,
                "test" => Split::Test,
                _ => return Err(bad("split must be train or test")),
            };
            let features = f[3..]
                .iter()
                .map(|s| s.parse::<f64>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|_| bad("non-numeric feature"))?;
            ds.push(DatasetRow {
                label: f[0].parse().map_err(|_| bad("bad label"))?,
                seed_index: f[1].parse().map_err(|_| bad("bad seed"))?,
                split,
                features,
            })?;
        }
        Ok(ds)
    }

    pub fn save_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        fs::write(path, self.to_csv())?;
        Ok(())
    }

    pub fn load_csv(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_csv(&fs::read_to_string(path)?)
    }
}
