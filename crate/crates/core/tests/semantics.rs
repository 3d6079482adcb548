use std::collections::HashSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sciconnav_core::embed::{dot, norm, train_sgns, EmbeddingSpace, Query, TrainConfig};
use sciconnav_core::semantics::{
    analogy_expand, analogy_infer, axis_projection_report, build_axis, propensity_report, resolve_groups,
    Direction, GroupDef, PropensityMode, SemanticsError,
};
use sciconnav_core::synth::{clustered_space, gaussian_space, PlantedConfig};
use sciconnav_core::taxonomy::{classify_all, partition_concepts, Concept, ConceptTaxonomy};

fn exhaustive_analogy(space: &EmbeddingSpace, a: usize, c: usize, d: usize, sign: f64, exclude: &HashSet<usize>) -> (usize, f64) {
    let target: Vec<f64> = (0..space.dim())
        .map(|k| space.row(a)[k] + sign * (space.row(d)[k] - space.row(c)[k]))
        .collect();
    let tn = norm(&target);
    let mut best: Option<(usize, f64)> = None;
    for j in 0..space.len() {
        if j == a || j == c || j == d || exclude.contains(&j) {
            continue;
        }
        let s = dot(space.row(j), &target) / (norm(space.row(j)) * tn);
        let better = match best {
            None => true,
            Some((b, bs)) => s > bs || (s == bs && space.id_at(j) < space.id_at(b)),
        };
        if better {
            best = Some((j, s));
        }
    }
    best.unwrap()
}

#[test]
fn analogy_matches_exhaustive_argmax_and_ignores_scale() {
    let space = gaussian_space(5000, 24, 21);
    let scaled = space.scaled(3.7).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(22);
    for q in 0..100 {
        let (a, c, d) = (
            rng.random_range(0..space.len()),
            rng.random_range(0..space.len()),
            rng.random_range(0..space.len()),
        );
        let dir = if q % 2 == 0 { Direction::Positive } else { Direction::Negative };
        let extra: HashSet<usize> = (0..q % 4).map(|_| rng.random_range(0..space.len())).collect();
        let exclude: HashSet<String> = extra.iter().map(|&j| space.id_at(j).to_string()).collect();
        let (ida, idc, idd) = (space.id_at(a), space.id_at(c), space.id_at(d));

        let got = analogy_infer(&space, ida, idc, idd, dir, &exclude).unwrap();
        let (want, want_s) = exhaustive_analogy(&space, a, c, d, dir.sign(), &extra);
        assert_eq!(got.id, space.id_at(want), "query {q}");
        assert!((got.similarity - want_s).abs() < 1e-9);

        let big = analogy_infer(&scaled, ida, idc, idd, dir, &exclude).unwrap();
        assert_eq!(big.id, got.id, "scaling changed query {q}");
    }
}

#[test]
fn direction_and_axis_swap_agree() {
    let space = gaussian_space(400, 24, 23);
    let mut rng = ChaCha8Rng::seed_from_u64(24);
    let none = HashSet::new();
    for _ in 0..50 {
        let ids: Vec<&str> = (0..3).map(|_| space.id_at(rng.random_range(0..400))).collect();
        let plus = analogy_infer(&space, ids[0], ids[1], ids[2], Direction::Positive, &none).unwrap();
        let minus = analogy_infer(&space, ids[0], ids[2], ids[1], Direction::Negative, &none).unwrap();
        assert_eq!(plus, minus);
    }
}

#[test]
fn zero_axis_gives_nearest_neighbor_of_seed() {
    let space = gaussian_space(300, 24, 25);
    let (a, c) = (space.id_at(3), space.id_at(7));
    let got = analogy_infer(&space, a, c, c, Direction::Positive, &HashSet::new()).unwrap();
    let exclude = HashSet::from([a.to_string(), c.to_string()]);
    let nn = space.nearest_neighbors(Query::Concept(a), 1, &exclude).unwrap();
    assert_eq!(got.id, nn[0].id);
}

#[test]
fn exhausted_vocabulary_is_an_error() {
    let space = EmbeddingSpace::from_rows(vec![
        ("a".into(), vec![1.0, 0.0]),
        ("b".into(), vec![0.0, 1.0]),
        ("c".into(), vec![1.0, 1.0]),
    ])
    .unwrap();
    let err = analogy_infer(&space, "a", "b", "c", Direction::Positive, &HashSet::new()).unwrap_err();
    assert!(matches!(err, SemanticsError::Exhausted));
}

#[test]
fn expansion_respects_depth_bounds() {
    let space = gaussian_space(200, 24, 26);
    let (seed, c, d) = (space.id_at(0), space.id_at(1), space.id_at(2));
    let g0 = analogy_expand(&space, seed, c, d, 0).unwrap();
    assert_eq!((g0.nodes.len(), g0.edges.len()), (1, 0));
    for depth in 1..=4 {
        let g = analogy_expand(&space, seed, c, d, depth).unwrap();
        assert_eq!(g.nodes.iter().filter(|n| n.depth == 0).count(), 1);
        assert_eq!(g.nodes[0].id, seed);
        for t in 1..=depth {
            assert!(g.nodes.iter().filter(|n| n.depth == t).count() <= 1 << t);
        }
        assert!(g.nodes.len() < 1 << (depth + 1));
        let expanded = g.nodes.iter().filter(|n| n.depth < depth).count();
        assert_eq!(g.edges.len(), 2 * expanded);
        let ids: HashSet<&str> = g.nodes.iter().map(|n| n.id.as_str()).collect();
        assert_eq!(ids.len(), g.nodes.len());
    }
}

fn planted_taxonomy() -> ConceptTaxonomy {
    PlantedConfig {
        authors: 4,
        works_per_author: 2,
        ..Default::default()
    }
    .generate()
    .taxonomy()
    .unwrap()
}

fn group(name: &str, root: &str) -> GroupDef {
    GroupDef {
        name: name.into(),
        disciplines: vec![root.into()],
    }
}

#[test]
fn planted_geometry_projects_to_opposite_ends() {
    let taxonomy = planted_taxonomy();
    let classification = classify_all(&taxonomy).unwrap();
    let space = clustered_space(2, 50, 24, 0.2, 27);
    let groups = resolve_groups(&[group("A", "a00"), group("B", "b00")], &taxonomy, &classification).unwrap();
    let axis = build_axis(&space, &groups[0], &groups[1]).unwrap();
    let report = axis_projection_report(&space, &classification, &axis).unwrap();
    let a = report.row("a00").unwrap();
    let b = report.row("b00").unwrap();
    assert_eq!(a.values.len(), 49);
    assert!(a.summary.mean < 0.0 && 0.0 < b.summary.mean);
    assert!(a.summary.q5 <= a.summary.q50 && a.summary.q50 <= a.summary.q95);

    let back = build_axis(&space, &groups[1], &groups[0]).unwrap();
    let flipped = axis_projection_report(&space, &classification, &back).unwrap();
    for (r, f) in report.rows.iter().zip(&flipped.rows) {
        assert_eq!(r.discipline, f.discipline);
        for (x, y) in r.values.iter().zip(&f.values) {
            assert_eq!(*x, -*y);
        }
    }
    for (x, y) in axis.vector.iter().zip(&back.vector) {
        assert_eq!(*x, -*y);
    }

    let same = build_axis(&space, &groups[0], &groups[0]).unwrap_err();
    assert!(matches!(same, SemanticsError::ZeroAxis { .. }));
}

#[test]
fn single_concept_discipline_has_its_own_projection() {
    let concept = |id: &str, level| Concept {
        id: id.into(),
        name: id.into(),
        level,
        works_count: 1,
    };
    let taxonomy = ConceptTaxonomy::from_parts(
        vec![concept("r1", 0), concept("r2", 0), concept("x", 1), concept("y1", 1), concept("y2", 1)],
        &[
            ("x".into(), "r1".into()),
            ("y1".into(), "r2".into()),
            ("y2".into(), "r2".into()),
        ],
    )
    .unwrap();
    let classification = classify_all(&taxonomy).unwrap();
    let space = EmbeddingSpace::from_rows(vec![
        ("r1".into(), vec![1.0, 0.0, 0.0]),
        ("r2".into(), vec![0.0, 1.0, 0.0]),
        ("x".into(), vec![0.9, 0.1, 0.3]),
        ("y1".into(), vec![0.1, 1.0, -0.2]),
        ("y2".into(), vec![-0.2, 0.8, 0.1]),
    ])
    .unwrap();
    let groups = resolve_groups(&[group("G1", "r1"), group("G2", "r2")], &taxonomy, &classification).unwrap();
    assert_eq!(groups[0].members, vec!["x"]);
    let axis = build_axis(&space, &groups[0], &groups[1]).unwrap();
    let report = axis_projection_report(&space, &classification, &axis).unwrap();
    let row = report.row("r1").unwrap();
    assert_eq!(row.values.len(), 1);
    let own = space.similarity_to_vector(space.index_of("x").unwrap(), &axis.vector).unwrap();
    assert_eq!(row.summary.mean, own);
    assert_eq!(report.row("r2").unwrap().values.len(), 2);
}

#[test]
fn trained_planted_space_prefers_own_discipline() {
    let data = PlantedConfig::default().generate();
    let space = train_sgns(&data.corpus(50), &TrainConfig::default()).unwrap();
    let classification = classify_all(&data.taxonomy().unwrap()).unwrap();
    let report = propensity_report(&space, &classification, PropensityMode::Classified).unwrap();
    assert!(report.skipped_roots.is_empty());
    assert_eq!(report.concepts, 98);
    assert_eq!(report.in_group.len() + report.out_group.len(), 2 * report.concepts);
    assert_eq!(report.in_group.len(), report.concepts);
    assert!(report.median_shift > 0.0);
    assert!(report.test.unwrap().p_value < 0.01);
}

#[test]
fn identical_vectors_show_no_shift() {
    let data = PlantedConfig {
        authors: 4,
        works_per_author: 2,
        ..Default::default()
    }
    .generate();
    let classification = classify_all(&data.taxonomy().unwrap()).unwrap();
    let rows = data.concepts.iter().map(|c| (c.id.clone(), vec![0.5, -1.0, 2.0])).collect();
    let space = EmbeddingSpace::from_rows(rows).unwrap();
    let report = propensity_report(&space, &classification, PropensityMode::Classified).unwrap();
    assert_eq!(report.median_shift, 0.0);
    assert_eq!(report.in_summary.unwrap().q50, report.out_summary.unwrap().q50);
    assert_eq!(report.test.unwrap().p_value, 1.0);
}

#[test]
fn indistinguishable_mode_pools_every_root() {
    let data = PlantedConfig {
        authors: 30,
        works_per_author: 20,
        clusters: 3,
        cluster_size: 10,
        bridges: 4,
        bridge_rate: 0.1,
        ..Default::default()
    }
    .generate();
    let classification = classify_all(&data.taxonomy().unwrap()).unwrap();
    let m_minus = partition_concepts(&classification).m_minus.len();
    assert_eq!(m_minus, 4);
    let rows = data
        .concepts
        .iter()
        .enumerate()
        .map(|(i, c)| (c.id.clone(), vec![1.0 + i as f64, (i as f64).sin(), 0.5]))
        .collect();
    let space = EmbeddingSpace::from_rows(rows).unwrap();
    let report = propensity_report(&space, &classification, PropensityMode::Indistinguishable).unwrap();
    assert_eq!(report.concepts, m_minus);
    assert_eq!(report.in_group.len() + report.out_group.len(), 3 * m_minus);
}
