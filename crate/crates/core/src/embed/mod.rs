//! Learned concept vectors and the queries answered on a frozen space.

mod io;
pub mod objective;
mod train;

use std::collections::{HashMap, HashSet};

use thiserror::Error;

pub use io::{load_embeddings, read_binary, read_text, write_binary, write_text, BINARY_MAGIC};
pub use train::{train_sgns, train_sgns_with_summary, NegativeSampler, TrainConfig, TrainSummary};

#[derive(Debug, Error)]
pub enum EmbedError {
    #[error("corpus is empty")]
    EmptyCorpus,
    #[error("vocabulary is empty after pruning tokens below min_count {0}")]
    EmptyVocabulary(u64),
    #[error("non-finite loss in epoch {epoch} after {tokens} tokens (learning rate {learning_rate})")]
    NonFiniteLoss {
        epoch: usize,
        tokens: u64,
        learning_rate: f64,
    },
    #[error("invalid training config: {0}")]
    InvalidConfig(String),
    #[error("unknown concept `{0}`")]
    UnknownConcept(String),
    #[error("vector for `{0}` has a non-finite entry")]
    NonFinite(String),
    #[error("vector for `{0}` has zero norm")]
    ZeroVector(String),
    #[error("query vector has zero norm or wrong dimension")]
    BadQuery,
    #[error("duplicate concept `{0}` in embedding table")]
    Duplicate(String),
    #[error("row for `{id}` has {got} values, expected {expected}")]
    DimensionMismatch {
        id: String,
        got: usize,
        expected: usize,
    },
    #[error("embedding file line {line}: {message}")]
    Format { line: usize, message: String },
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

/// An `N x dim` table of concept vectors with a row-normalized copy.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingSpace {
    vocab: Vec<String>,
    index: HashMap<String, usize>,
    dim: usize,
    matrix: Vec<f64>,
    unit: Vec<f64>,
}

/// What a neighbor search is centered on.
#[derive(Debug, Clone, Copy)]
pub enum Query<'a> {
    Concept(&'a str),
    Vector(&'a [f64]),
}

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Neighbor {
    pub id: String,
    pub similarity: f64,
}

impl EmbeddingSpace {
    /// Builds a space from a flat row-major matrix.
    pub fn from_matrix(vocab: Vec<String>, dim: usize, matrix: Vec<f64>) -> Result<Self, EmbedError> {
        if dim == 0 || matrix.len() != vocab.len() * dim {
            return Err(EmbedError::DimensionMismatch {
                id: vocab.first().cloned().unwrap_or_default(),
                got: matrix.len(),
                expected: vocab.len() * dim,
            });
        }
        let mut index = HashMap::with_capacity(vocab.len());
        let mut unit = vec![0.0; matrix.len()];
        for (i, id) in vocab.iter().enumerate() {
            if index.insert(id.clone(), i).is_some() {
                return Err(EmbedError::Duplicate(id.clone()));
            }
            let row = &matrix[i * dim..(i + 1) * dim];
            if row.iter().any(|x| !x.is_finite()) {
                return Err(EmbedError::NonFinite(id.clone()));
            }
            let norm = dot(row, row).sqrt();
            if norm == 0.0 || !norm.is_finite() {
                return Err(EmbedError::ZeroVector(id.clone()));
            }
            for (u, &x) in unit[i * dim..(i + 1) * dim].iter_mut().zip(row) {
                *u = x / norm;
            }
        }
        Ok(EmbeddingSpace {
            vocab,
            index,
            dim,
            matrix,
            unit,
        })
    }

    pub fn from_rows(rows: Vec<(String, Vec<f64>)>) -> Result<Self, EmbedError> {
        let dim = rows.first().map(|(_, v)| v.len()).unwrap_or(0);
        let mut vocab = Vec::with_capacity(rows.len());
        let mut matrix = Vec::with_capacity(rows.len() * dim);
        for (id, v) in rows {
            if v.len() != dim {
                return Err(EmbedError::DimensionMismatch {
                    id,
                    got: v.len(),
                    expected: dim,
                });
            }
            vocab.push(id);
            matrix.extend(v);
        }
        Self::from_matrix(vocab, dim, matrix)
    }

    pub fn len(&self) -> usize {
        self.vocab.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vocab.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn vocab(&self) -> &[String] {
        &self.vocab
    }

    pub fn contains(&self, id: &str) -> bool {
        self.index.contains_key(id)
    }

    pub fn index_of(&self, id: &str) -> Result<usize, EmbedError> {
        self.index
            .get(id)
            .copied()
            .ok_or_else(|| EmbedError::UnknownConcept(id.to_string()))
    }

    pub fn id_at(&self, idx: usize) -> &str {
        &self.vocab[idx]
    }

    pub fn vector(&self, id: &str) -> Result<&[f64], EmbedError> {
        Ok(self.row(self.index_of(id)?))
    }

    pub fn row(&self, idx: usize) -> &[f64] {
        &self.matrix[idx * self.dim..(idx + 1) * self.dim]
    }

    pub fn unit_row(&self, idx: usize) -> &[f64] {
        &self.unit[idx * self.dim..(idx + 1) * self.dim]
    }

    pub fn matrix(&self) -> &[f64] {
        &self.matrix
    }

    /// Cosine similarity from the cached unit rows, clamped to [-1, 1].
    pub fn similarity(&self, i: &str, j: &str) -> Result<f64, EmbedError> {
        let a = self.index_of(i)?;
        let b = self.index_of(j)?;
        Ok(self.similarity_at(a, b))
    }

    pub fn similarity_at(&self, a: usize, b: usize) -> f64 {
        if a == b {
            return 1.0;
        }
        dot(self.unit_row(a), self.unit_row(b)).clamp(-1.0, 1.0)
    }

    /// Cosine similarity between a concept and an arbitrary nonzero vector.
    pub fn similarity_to_vector(&self, idx: usize, v: &[f64]) -> Result<f64, EmbedError> {
        let unit = normalized(v).ok_or(EmbedError::BadQuery)?;
        if unit.len() != self.dim {
            return Err(EmbedError::BadQuery);
        }
        Ok(dot(self.unit_row(idx), &unit).clamp(-1.0, 1.0))
    }

    /// Top-`k` concepts by cosine similarity to the query, descending, ties
    /// broken by ascending id. Ids in `exclude` never appear.
    pub fn nearest_neighbors(
        &self,
        query: Query<'_>,
        k: usize,
        exclude: &HashSet<String>,
    ) -> Result<Vec<Neighbor>, EmbedError> {
        let q_unit: Vec<f64> = match query {
            Query::Concept(id) => self.unit_row(self.index_of(id)?).to_vec(),
            Query::Vector(v) => {
                if v.len() != self.dim {
                    return Err(EmbedError::BadQuery);
                }
                normalized(v).ok_or(EmbedError::BadQuery)?
            }
        };
        if k == 0 {
            return Ok(Vec::new());
        }
        let self_idx = match query {
            Query::Concept(id) => self.index.get(id).copied(),
            Query::Vector(_) => None,
        };
        let mut scored: Vec<(f64, usize)> = (0..self.len())
            .filter(|&i| !exclude.contains(&self.vocab[i]))
            .map(|i| {
                let s = if Some(i) == self_idx {
                    1.0
                } else {
                    dot(self.unit_row(i), &q_unit).clamp(-1.0, 1.0)
                };
                (s, i)
            })
            .collect();
        let order = |a: &(f64, usize), b: &(f64, usize)| {
            b.0.total_cmp(&a.0)
                .then_with(|| self.vocab[a.1].cmp(&self.vocab[b.1]))
        };
        if k < scored.len() {
            scored.select_nth_unstable_by(k - 1, order);
            scored.truncate(k);
        }
        scored.sort_by(order);
        Ok(scored
            .into_iter()
            .map(|(s, i)| Neighbor {
                id: self.vocab[i].clone(),
                similarity: s,
            })
            .collect())
    }

    /// Every vector multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Result<Self, EmbedError> {
        Self::from_matrix(
            self.vocab.clone(),
            self.dim,
            self.matrix.iter().map(|x| x * factor).collect(),
        )
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn normalized(v: &[f64]) -> Option<Vec<f64>> {
    let n = norm(v);
    if n == 0.0 || !n.is_finite() {
        return None;
    }
    Some(v.iter().map(|x| x / n).collect())
}
