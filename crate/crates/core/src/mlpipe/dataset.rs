use std::collections::hash_map::DefaultHasher;
use std::hash::{Hash, Hasher};
use std::path::Path;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::{MlError, MlResult};
use crate::numkit::RealMatrix;
use crate::rng;
use crate::sequences::SequenceKind;

/// Padding value for parameter vectors shorter than the longest template.
pub const SENTINEL: f64 = 1000.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Stage {
    Raw,
    Pretty,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetMeta {
    pub n: usize,
    pub sequence_kind: SequenceKind,
    pub epsilon: Option<f64>,
    pub seed: u64,
    pub stage: Stage,
}

/// Paired samples: row `i` of `x` (circuit angles) produces row `i` of `y`
/// (diagonal phases).
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    x: RealMatrix,
    y: RealMatrix,
    meta: DatasetMeta,
    /// Generating template of each row, when known.
    templates: Option<Vec<usize>>,
}

#[derive(Serialize, Deserialize)]
struct DatasetFile {
    meta: DatasetMeta,
    x: Vec<Vec<f64>>,
    y: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    templates: Option<Vec<usize>>,
}

impl Dataset {
    pub fn new(x: RealMatrix, y: RealMatrix, meta: DatasetMeta) -> MlResult<Self> {
        if x.rows() != y.rows() {
            return Err(MlError::RowMismatch {
                x: x.rows(),
                y: y.rows(),
            });
        }
        Ok(Self {
            x,
            y,
            meta,
            templates: None,
        })
    }

    pub fn with_templates(mut self, templates: Vec<usize>) -> MlResult<Self> {
        if templates.len() != self.len() {
            return Err(MlError::RowMismatch {
                x: self.len(),
                y: templates.len(),
            });
        }
        self.templates = Some(templates);
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.x.rows()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn x(&self) -> &RealMatrix {
        &self.x
    }

    pub fn y(&self) -> &RealMatrix {
        &self.y
    }

    pub fn meta(&self) -> &DatasetMeta {
        &self.meta
    }

    pub fn templates(&self) -> Option<&[usize]> {
        self.templates.as_deref()
    }

    pub fn inputs(&self) -> usize {
        self.x.cols()
    }

    pub fn outputs(&self) -> usize {
        self.y.cols()
    }

    /// Rows at `indices`, in that order.
    pub fn select(&self, indices: &[usize]) -> Self {
        let pick = |m: &RealMatrix| RealMatrix::from_fn(indices.len(), m.cols(), |i, j| m.get(indices[i], j));
        Self {
            x: pick(&self.x),
            y: pick(&self.y),
            meta: self.meta.clone(),
            templates: self
                .templates
                .as_ref()
                .map(|t| indices.iter().map(|&i| t[i]).collect()),
        }
    }

    /// Keeps only the listed input columns.
    pub fn keep_inputs(&self, columns: &[usize]) -> Self {
        Self {
            x: RealMatrix::from_fn(self.len(), columns.len(), |i, j| self.x.get(i, columns[j])),
            ..self.clone()
        }
    }

    /// Seeded shuffle split into `(train, test)` with `⌈test_fraction·N⌉` test rows.
    pub fn split(&self, test_fraction: f64, seed: u64) -> MlResult<(Self, Self)> {
        if !(0.0..1.0).contains(&test_fraction) {
            return Err(MlError::InvalidParameter(format!(
                "test fraction {test_fraction} outside [0, 1)"
            )));
        }
        let mut order: Vec<usize> = (0..self.len()).collect();
        order.shuffle(&mut rng::stream(seed, rng::purpose::SPLIT));
        let test = (test_fraction * self.len() as f64).ceil() as usize;
        let (test_idx, train_idx) = order.split_at(test);
        Ok((self.select(train_idx), self.select(test_idx)))
    }

    /// Hash of the `(x, y)` pair in row `i`, used to check that filtering
    /// never re-pairs samples.
    pub fn row_hash(&self, i: usize) -> u64 {
        let mut h = DefaultHasher::new();
        for v in self.x.row(i).iter().chain(self.y.row(i)) {
            v.to_bits().hash(&mut h);
        }
        h.finish()
    }

    pub fn to_json(&self) -> MlResult<String> {
        let file = DatasetFile {
            meta: self.meta.clone(),
            x: self.x.to_rows(),
            y: self.y.to_rows(),
            templates: self.templates.clone(),
        };
        Ok(serde_json::to_string_pretty(&file)?)
    }

    pub fn from_json(text: &str) -> MlResult<Self> {
        let file: DatasetFile = serde_json::from_str(text)?;
        let ds = Self::new(matrix(&file.x, "x")?, matrix(&file.y, "y")?, file.meta)?;
        match file.templates {
            Some(t) => ds.with_templates(t),
            None => Ok(ds),
        }
    }

    /// CSV with a `# meta: {json}` first line and columns `x0.., y0..[, template]`.
    pub fn to_csv(&self) -> MlResult<String> {
        let mut out = format!("# meta: {}\n", serde_json::to_string(&self.meta)?);
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut header: Vec<String> = (0..self.inputs()).map(|j| format!("x{j}")).collect();
        header.extend((0..self.outputs()).map(|j| format!("y{j}")));
        if self.templates.is_some() {
            header.push("template".into());
        }
        w.write_record(&header)?;
        for i in 0..self.len() {
            let mut record: Vec<String> = self
                .x
                .row(i)
                .iter()
                .chain(self.y.row(i))
                .map(f64::to_string)
                .collect();
            if let Some(t) = &self.templates {
                record.push(t[i].to_string());
            }
            w.write_record(&record)?;
        }
        let bytes = w.into_inner().map_err(|e| MlError::Format(e.to_string()))?;
        out.push_str(&String::from_utf8(bytes).map_err(|e| MlError::Format(e.to_string()))?);
        Ok(out)
    }

    /// Reads [`Self::to_csv`] output. Without a meta line the dataset is
    /// assumed pretty-stage with `n = log₂(#y columns)`.
    pub fn from_csv(text: &str) -> MlResult<Self> {
        let (meta, body) = match text.strip_prefix("# meta: ") {
            Some(rest) => {
                let (line, body) = rest.split_once('\n').unwrap_or((rest, ""));
                (Some(serde_json::from_str::<DatasetMeta>(line)?), body)
            }
            None => (None, text),
        };
        let mut r = csv::Reader::from_reader(body.as_bytes());
        let header = r.headers()?.clone();
        let kind_of = |name: &str| -> MlResult<u8> {
            if name == "template" {
                Ok(b't')
            } else if name.starts_with('x') {
                Ok(b'x')
            } else if name.starts_with('y') {
                Ok(b'y')
            } else {
                Err(MlError::Format(format!("unexpected column {name:?}")))
            }
        };
        let kinds: Vec<u8> = header.iter().map(kind_of).collect::<MlResult<_>>()?;
        let (mut xs, mut ys, mut ts) = (Vec::new(), Vec::new(), Vec::new());
        for (line, record) in r.records().enumerate() {
            let record = record?;
            let (mut x, mut y) = (Vec::new(), Vec::new());
            for (field, kind) in record.iter().zip(&kinds) {
                let bad = || MlError::Format(format!("row {}: cannot parse {field:?}", line + 1));
                match kind {
                    b't' => ts.push(field.trim().parse::<usize>().map_err(|_| bad())?),
                    b'x' => x.push(field.trim().parse::<f64>().map_err(|_| bad())?),
                    _ => y.push(field.trim().parse::<f64>().map_err(|_| bad())?),
                }
            }
            xs.push(x);
            ys.push(y);
        }
        let y = matrix(&ys, "y")?;
        let meta = match meta {
            Some(m) => m,
            None => DatasetMeta {
                n: y.cols().max(1).trailing_zeros() as usize,
                sequence_kind: SequenceKind::default(),
                epsilon: None,
                seed: 0,
                stage: Stage::Pretty,
            },
        };
        let ds = Self::new(matrix(&xs, "x")?, y, meta)?;
        if kinds.contains(&b't') {
            ds.with_templates(ts)
        } else {
            Ok(ds)
        }
    }

    /// Writes JSON or CSV depending on the file extension.
    pub fn save(&self, path: &Path) -> MlResult<()> {
        let text = if is_csv(path) { self.to_csv()? } else { self.to_json()? };
        std::fs::write(path, text)?;
        Ok(())
    }

    pub fn load(path: &Path) -> MlResult<Self> {
        let text = std::fs::read_to_string(path)?;
        if is_csv(path) {
            Self::from_csv(&text)
        } else {
            Self::from_json(&text)
        }
    }
}

fn is_csv(path: &Path) -> bool {
    path.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv"))
}

fn matrix(rows: &[Vec<f64>], name: &str) -> MlResult<RealMatrix> {
    if rows.is_empty() {
        return Ok(RealMatrix::zeros(0, 0));
    }
    RealMatrix::from_rows(rows).map_err(|e| MlError::Format(format!("{name}: {e}")))
}

/// Pads every row to the longest length with [`SENTINEL`].
pub fn pad_rows(rows: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let width = rows.iter().map(Vec::len).max().unwrap_or(0);
    rows.iter()
        .map(|r| {
            let mut p = r.clone();
            p.resize(width, SENTINEL);
            p
        })
        .collect()
}
