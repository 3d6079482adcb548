use std::collections::BTreeMap;

use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sciconnav_core::corpus::{
    build_trajectories, build_trajectories_from_reader, corpus_stats, CorpusError, IngestOptions,
};
use sciconnav_core::synth::PlantedConfig;
use sciconnav_core::{TrajectoryCorpus, WorkRecord};

fn to_tsv(works: &[WorkRecord]) -> String {
    let mut s = String::from("author_id\twork_id\tyear\tconcept_ids\n");
    for w in works {
        s.push_str(&format!("{}\t{}\t{}\t{}\n", w.author_id, w.work_id, w.year, w.concept_ids.join("|")));
    }
    s
}

fn ingest(works: &[WorkRecord], min_pubs: usize, presort: bool) -> TrajectoryCorpus {
    let opts = IngestOptions {
        presort,
        ..IngestOptions::with_min_pubs(min_pubs)
    };
    match build_trajectories_from_reader(to_tsv(works).as_bytes(), &opts) {
        Ok(c) => c,
        Err(CorpusError::EmptyAfterFilter { .. }) => TrajectoryCorpus::default(),
        Err(e) => panic!("{e}"),
    }
}

#[test]
fn synthetic_corpus_matches_recount() {
    let data = PlantedConfig::default().generate();
    let corpus = ingest(&data.works, 50, false);

    let mut recount: BTreeMap<String, u64> = BTreeMap::new();
    let mut tokens = 0u64;
    for w in &data.works {
        for c in &w.concept_ids {
            *recount.entry(c.clone()).or_insert(0) += 1;
            tokens += 1;
        }
    }
    assert_eq!(corpus.vocabulary, recount);
    let stats = corpus_stats(&corpus);
    assert_eq!(stats.authors, 1000);
    assert_eq!(stats.tokens, tokens);
    assert_eq!(stats.vocab, recount.len());
    assert_eq!(stats.length_q50, 180.0);
}

#[test]
fn file_ingest_and_persisted_round_trip() {
    let data = PlantedConfig {
        authors: 20,
        works_per_author: 8,
        ..Default::default()
    }
    .generate();
    let dir = tempfile::tempdir().unwrap();
    let works = dir.path().join("works.tsv");
    std::fs::write(&works, to_tsv(&data.works)).unwrap();
    let corpus = build_trajectories(&works, &IngestOptions::with_min_pubs(5)).unwrap();
    assert_eq!(corpus.trajectories.len(), 20);

    let mut buf = Vec::new();
    corpus.write(&mut buf).unwrap();
    let back = TrajectoryCorpus::read(buf.as_slice()).unwrap();
    assert_eq!(back.vocabulary, corpus.vocabulary);
    for (a, b) in corpus.trajectories.iter().zip(&back.trajectories) {
        assert_eq!(a.author_id, b.author_id);
        assert_eq!(a.sequence, b.sequence);
    }
}

#[test]
fn year_sort_example() {
    let works = vec![
        WorkRecord {
            work_id: "w1".into(),
            author_id: "a".into(),
            year: 2001,
            concept_ids: vec!["c1".into(), "c2".into()],
        },
        WorkRecord {
            work_id: "w2".into(),
            author_id: "a".into(),
            year: 1999,
            concept_ids: vec!["c3".into()],
        },
    ];
    let c = ingest(&works, 1, false);
    assert_eq!(c.trajectories[0].sequence, vec!["c3", "c1", "c2"]);
}

#[test]
fn exactly_min_pubs_is_excluded() {
    let data = PlantedConfig {
        authors: 3,
        works_per_author: 50,
        ..Default::default()
    }
    .generate();
    let opts = IngestOptions::with_min_pubs(50);
    assert!(build_trajectories_from_reader(to_tsv(&data.works).as_bytes(), &opts).is_err());
    assert_eq!(ingest(&data.works, 49, false).trajectories.len(), 3);
}

fn works_strategy() -> impl Strategy<Value = Vec<WorkRecord>> {
    (1usize..8, any::<u64>()).prop_map(|(authors, seed)| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut works = Vec::new();
        for a in 0..authors {
            let n = rand::Rng::random_range(&mut rng, 1..7);
            for w in 0..n {
                let k = rand::Rng::random_range(&mut rng, 1..4);
                works.push(WorkRecord {
                    work_id: format!("w{w}"),
                    author_id: format!("a{a}"),
                    year: 2000 + rand::Rng::random_range(&mut rng, 0..3),
                    concept_ids: (0..k)
                        .map(|_| format!("c{}", rand::Rng::random_range(&mut rng, 0..5)))
                        .collect(),
                });
            }
        }
        works
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn work_slices_reproduce_sorted_works(works in works_strategy()) {
        let corpus = ingest(&works, 0, false);
        for t in &corpus.trajectories {
            let mut mine: Vec<&WorkRecord> = works.iter().filter(|w| w.author_id == t.author_id).collect();
            mine.sort_by(|a, b| a.year.cmp(&b.year).then_with(|| a.work_id.cmp(&b.work_id)));
            let slices: Vec<&[String]> = t.works().collect();
            prop_assert_eq!(slices.len(), mine.len());
            for (s, w) in slices.iter().zip(&mine) {
                prop_assert_eq!(*s, w.concept_ids.as_slice());
            }
        }
    }

    #[test]
    fn raising_min_pubs_never_adds_authors(works in works_strategy(), lo in 0usize..4, extra in 0usize..4) {
        let a = ingest(&works, lo, false);
        let b = ingest(&works, lo + extra, false);
        let ids_a: Vec<_> = a.trajectories.iter().map(|t| &t.author_id).collect();
        for t in &b.trajectories {
            prop_assert!(ids_a.contains(&&t.author_id));
        }
    }

    #[test]
    fn counts_are_permutation_invariant(works in works_strategy(), seed in any::<u64>()) {
        let mut shuffled = works.clone();
        shuffled.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        let a = ingest(&works, 0, true);
        let b = ingest(&shuffled, 0, true);
        prop_assert_eq!(&a.vocabulary, &b.vocabulary);
        let seqs = |c: &TrajectoryCorpus| {
            let mut v: Vec<_> = c.trajectories.iter().map(|t| (t.author_id.clone(), t.sequence.clone())).collect();
            v.sort();
            v
        };
        prop_assert_eq!(seqs(&a), seqs(&b));
    }
}
