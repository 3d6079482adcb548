//! Research trajectories: every author's works sorted by year (work id breaks
//! ties), with each work's concept list concatenated in input order.
//!
//! The works file is streamed one author group at a time, so it must be
//! grouped by `author_id`. Ungrouped input is either rejected or, with
//! [`IngestOptions::presort`], loaded and sorted in memory first.

use std::collections::{BTreeMap, HashSet};
use std::fs::File;
use std::io::{BufRead, BufReader, Read, Write};
use std::ops::RangeInclusive;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::stats::quantile_sorted;
use crate::tsv::{self, TsvError};

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("parse error: {0}")]
    Parse(#[from] TsvError),
    #[error("works file is not grouped by author: `{author}` reappears on line {line} (use the presort option)")]
    NotGrouped { author: String, line: u64 },
    #[error("corpus is empty after filtering authors with at most {min_pubs} works")]
    EmptyAfterFilter { min_pubs: usize },
    #[error("corpus line {line}: {message}")]
    Format { line: usize, message: String },
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WorkRecord {
    pub work_id: String,
    pub author_id: String,
    pub year: i32,
    pub concept_ids: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Trajectory {
    pub author_id: String,
    pub sequence: Vec<String>,
    /// Length of each work's slice of `sequence`, in order. A trajectory read
    /// back from the persisted corpus format is a single slice.
    pub work_lengths: Vec<usize>,
}

impl Trajectory {
    /// Per-work slices of the sequence.
    pub fn works(&self) -> impl Iterator<Item = &[String]> {
        let mut start = 0;
        self.work_lengths.iter().map(move |&len| {
            let slice = &self.sequence[start..start + len];
            start += len;
            slice
        })
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TrajectoryCorpus {
    pub trajectories: Vec<Trajectory>,
    /// Exact token counts over all sequences.
    pub vocabulary: BTreeMap<String, u64>,
    pub min_pubs: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorpusStats {
    pub authors: usize,
    pub tokens: u64,
    pub vocab: usize,
    pub length_q05: f64,
    pub length_q50: f64,
    pub length_q95: f64,
}

#[derive(Debug, Clone)]
pub struct IngestOptions {
    pub min_pubs: usize,
    pub year_range: RangeInclusive<i32>,
    /// Load the whole file and group by author in memory instead of
    /// requiring grouped input.
    pub presort: bool,
}

impl Default for IngestOptions {
    fn default() -> Self {
        IngestOptions {
            min_pubs: 50,
            year_range: 1800..=2100,
            presort: false,
        }
    }
}

impl IngestOptions {
    pub fn with_min_pubs(min_pubs: usize) -> Self {
        IngestOptions {
            min_pubs,
            ..Default::default()
        }
    }
}

/// Builds trajectories from a works TSV, keeping authors with more than
/// `min_pubs` works.
pub fn build_trajectories(
    works_file: impl AsRef<Path>,
    options: &IngestOptions,
) -> Result<TrajectoryCorpus, CorpusError> {
    let file = BufReader::new(File::open(works_file)?);
    build_trajectories_from_reader(file, options)
}

pub fn build_trajectories_from_reader<R: Read>(
    input: R,
    options: &IngestOptions,
) -> Result<TrajectoryCorpus, CorpusError> {
    let mut rdr = tsv::reader(input);
    let cols = tsv::columns(&mut rdr, &["author_id", "work_id", "year", "concept_ids"])?;
    let mut records = rdr.records().map(|r| -> Result<(u64, WorkRecord), CorpusError> {
        let record = r.map_err(TsvError::from)?;
        let line = tsv::line_of(&record);
        Ok((line, parse_work(&record, &cols, line, &options.year_range)?))
    });

    let mut corpus = TrajectoryCorpus {
        min_pubs: options.min_pubs,
        ..Default::default()
    };

    if options.presort {
        let mut groups: BTreeMap<String, Vec<WorkRecord>> = BTreeMap::new();
        for item in records {
            let (_, work) = item?;
            groups.entry(work.author_id.clone()).or_default().push(work);
        }
        for (_, works) in groups {
            corpus.push_author(works);
        }
    } else {
        let mut finished: HashSet<String> = HashSet::new();
        let mut current: Vec<WorkRecord> = Vec::new();
        for item in records.by_ref() {
            let (line, work) = item?;
            if let Some(last) = current.last() {
                if last.author_id != work.author_id {
                    let done = std::mem::take(&mut current);
                    finished.insert(done[0].author_id.clone());
                    corpus.push_author(done);
                }
            }
            if finished.contains(&work.author_id) {
                return Err(CorpusError::NotGrouped {
                    author: work.author_id,
                    line,
                });
            }
            current.push(work);
        }
        if !current.is_empty() {
            corpus.push_author(current);
        }
    }

    if corpus.trajectories.is_empty() {
        return Err(CorpusError::EmptyAfterFilter {
            min_pubs: options.min_pubs,
        });
    }
    let stats = corpus_stats(&corpus);
    log::info!(
        "corpus: {} authors, {} tokens, vocabulary {}",
        stats.authors,
        stats.tokens,
        stats.vocab
    );
    Ok(corpus)
}

fn parse_work(
    record: &csv::StringRecord,
    cols: &[usize],
    line: u64,
    years: &RangeInclusive<i32>,
) -> Result<WorkRecord, CorpusError> {
    let author_id = tsv::field(record, cols[0]);
    let work_id = tsv::field(record, cols[1]);
    if author_id.is_empty() || work_id.is_empty() {
        return Err(TsvError::row(line, "empty author_id or work_id").into());
    }
    let year: i32 = tsv::field(record, cols[2])
        .parse()
        .map_err(|_| TsvError::row(line, "year is not an integer"))?;
    if !years.contains(&year) {
        return Err(TsvError::row(
            line,
            format!("year {year} outside {}..={}", years.start(), years.end()),
        )
        .into());
    }
    let concept_ids: Vec<String> = tsv::field(record, cols[3])
        .split('|')
        .map(str::trim)
        .filter(|c| !c.is_empty())
        .map(str::to_string)
        .collect();
    if concept_ids.is_empty() {
        return Err(TsvError::row(line, "work has no concepts").into());
    }
    if let Some(bad) = concept_ids.iter().find(|c| c.contains(char::is_whitespace)) {
        return Err(TsvError::row(line, format!("concept id `{bad}` contains whitespace")).into());
    }
    Ok(WorkRecord {
        work_id: work_id.to_string(),
        author_id: author_id.to_string(),
        year,
        concept_ids,
    })
}

impl TrajectoryCorpus {
    /// Adds one author's works if the author has more than `min_pubs` of them.
    pub fn push_author(&mut self, mut works: Vec<WorkRecord>) -> bool {
        if works.len() <= self.min_pubs || works.is_empty() {
            return false;
        }
        works.sort_by(|a, b| a.year.cmp(&b.year).then_with(|| a.work_id.cmp(&b.work_id)));
        let author_id = works[0].author_id.clone();
        let mut sequence = Vec::new();
        let mut work_lengths = Vec::with_capacity(works.len());
        for w in works {
            work_lengths.push(w.concept_ids.len());
            sequence.extend(w.concept_ids);
        }
        for c in &sequence {
            *self.vocabulary.entry(c.clone()).or_insert(0) += 1;
        }
        self.trajectories.push(Trajectory {
            author_id,
            sequence,
            work_lengths,
        });
        true
    }

    pub fn token_count(&self) -> u64 {
        self.trajectories.iter().map(|t| t.sequence.len() as u64).sum()
    }

    /// Writes one line per author: `author_id<TAB>space-separated concept ids`.
    pub fn write<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        for t in &self.trajectories {
            writeln!(out, "{}\t{}", t.author_id, t.sequence.join(" "))?;
        }
        out.flush()
    }

    pub fn read<R: BufRead>(input: R) -> Result<Self, CorpusError> {
        let mut corpus = TrajectoryCorpus::default();
        for (i, line) in input.lines().enumerate() {
            let line = line?;
            if line.is_empty() {
                continue;
            }
            let (author, seq) = line.split_once('\t').ok_or_else(|| CorpusError::Format {
                line: i + 1,
                message: "missing tab separator".into(),
            })?;
            let sequence: Vec<String> = seq.split(' ').filter(|s| !s.is_empty()).map(str::to_string).collect();
            if sequence.is_empty() {
                return Err(CorpusError::Format {
                    line: i + 1,
                    message: "empty trajectory".into(),
                });
            }
            for c in &sequence {
                *corpus.vocabulary.entry(c.clone()).or_insert(0) += 1;
            }
            corpus.trajectories.push(Trajectory {
                author_id: author.to_string(),
                work_lengths: vec![sequence.len()],
                sequence,
            });
        }
        Ok(corpus)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, CorpusError> {
        Self::read(BufReader::new(File::open(path)?))
    }
}

pub fn corpus_stats(corpus: &TrajectoryCorpus) -> CorpusStats {
    let mut lengths: Vec<f64> = corpus
        .trajectories
        .iter()
        .map(|t| t.sequence.len() as f64)
        .collect();
    if lengths.is_empty() {
        return CorpusStats {
            authors: 0,
            tokens: 0,
            vocab: 0,
            length_q05: 0.0,
            length_q50: 0.0,
            length_q95: 0.0,
        };
    }
    lengths.sort_by(f64::total_cmp);
    CorpusStats {
        authors: corpus.trajectories.len(),
        tokens: corpus.token_count(),
        vocab: corpus.vocabulary.len(),
        length_q05: quantile_sorted(&lengths, 0.05),
        length_q50: quantile_sorted(&lengths, 0.5),
        length_q95: quantile_sorted(&lengths, 0.95),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const HEADER: &str = "author_id\twork_id\tyear\tconcept_ids\n";

    fn ingest(body: &str, min_pubs: usize) -> Result<TrajectoryCorpus, CorpusError> {
        build_trajectories_from_reader(
            format!("{HEADER}{body}").as_bytes(),
            &IngestOptions::with_min_pubs(min_pubs),
        )
    }

    #[test]
    fn works_sorted_by_year() {
        let c = ingest("a1\tw1\t2001\tc1|c2\na1\tw2\t1999\tc3\n", 1).unwrap();
        assert_eq!(c.trajectories[0].sequence, vec!["c3", "c1", "c2"]);
        assert_eq!(c.trajectories[0].work_lengths, vec![1, 2]);
    }

    #[test]
    fn year_ties_break_on_work_id() {
        let c = ingest("a\twB\t2000\tx\na\twA\t2000\ty\n", 1).unwrap();
        assert_eq!(c.trajectories[0].sequence, vec!["y", "x"]);
    }

    #[test]
    fn exactly_min_pubs_is_excluded() {
        let mut body = String::new();
        for i in 0..50 {
            body.push_str(&format!("a\tw{i:02}\t2000\tc\n"));
        }
        body.push_str("b\tv\t2000\tc\n");
        assert!(matches!(
            ingest(&body, 50),
            Err(CorpusError::EmptyAfterFilter { min_pubs: 50 })
        ));
        let c = ingest(&body, 49).unwrap();
        assert_eq!(c.trajectories.len(), 1);
        assert_eq!(c.trajectories[0].author_id, "a");
    }

    #[test]
    fn ungrouped_input_requires_presort() {
        let body = "a\tw1\t2000\tx\nb\tw2\t2000\ty\na\tw3\t2001\tz\n";
        assert!(matches!(
            ingest(body, 0),
            Err(CorpusError::NotGrouped { ref author, line: 4 }) if author == "a"
        ));
        let opts = IngestOptions {
            min_pubs: 0,
            presort: true,
            ..Default::default()
        };
        let c = build_trajectories_from_reader(format!("{HEADER}{body}").as_bytes(), &opts).unwrap();
        assert_eq!(c.trajectories.len(), 2);
        assert_eq!(c.trajectories[0].sequence, vec!["x", "z"]);
    }

    #[test]
    fn malformed_rows_are_parse_errors() {
        assert!(matches!(ingest("a\tw\tsoon\tc\n", 0), Err(CorpusError::Parse(_))));
        assert!(matches!(ingest("a\tw\t1492\tc\n", 0), Err(CorpusError::Parse(_))));
        assert!(matches!(ingest("a\tw\t2000\t\n", 0), Err(CorpusError::Parse(_))));
        assert!(matches!(ingest("a\tw\t2000\n", 0), Err(CorpusError::Parse(_))));
    }

    #[test]
    fn repeated_concepts_are_kept() {
        let c = ingest("a\tw1\t2000\tx|x\na\tw2\t2001\tx\n", 1).unwrap();
        assert_eq!(c.trajectories[0].sequence, vec!["x", "x", "x"]);
        assert_eq!(c.vocabulary["x"], 3);
    }

    #[test]
    fn stats_single_work() {
        let c = ingest("a\tw\t2000\tc1|c2|c3\n", 0).unwrap();
        let s = corpus_stats(&c);
        assert_eq!((s.authors, s.tokens, s.vocab), (1, 3, 3));
        assert_eq!(s.length_q50, 3.0);
    }

    #[test]
    fn stats_empty_corpus_is_zero() {
        let s = corpus_stats(&TrajectoryCorpus::default());
        assert_eq!((s.authors, s.tokens, s.vocab), (0, 0, 0));
        assert_eq!((s.length_q05, s.length_q50, s.length_q95), (0.0, 0.0, 0.0));
    }

    #[test]
    fn persisted_format_round_trips() {
        let c = ingest("a\tw1\t2000\tx|y\na\tw2\t2001\tz\nb\tw3\t2000\ty\nb\tw4\t2000\ty\n", 1)
            .unwrap();
        let mut buf = Vec::new();
        c.write(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf.clone()).unwrap(), "a\tx y z\nb\ty y\n");
        let back = TrajectoryCorpus::read(buf.as_slice()).unwrap();
        assert_eq!(back.vocabulary, c.vocabulary);
        let seqs: Vec<_> = back.trajectories.iter().map(|t| &t.sequence).collect();
        assert_eq!(seqs, c.trajectories.iter().map(|t| &t.sequence).collect::<Vec<_>>());
    }
}
