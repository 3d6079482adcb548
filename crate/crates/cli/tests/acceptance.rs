//! Acceptance suite. Runs without the libtest harness so every criterion
//! prints one `[PASS]` or `[FAIL]` line; exits non-zero if any fails.

#[path = "../../core/tests/common/mod.rs"]
mod common;

use std::collections::HashSet;
use std::panic::{self, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sciconnav_core::embed::objective::{example_gradient, example_loss};
use sciconnav_core::embed::{dot, norm, read_text, train_sgns, write_text, EmbeddingSpace, TrainConfig};
use sciconnav_core::navgraph::{
    avg_sd, betweenness_centrality, closeness_centrality, dijkstra, hl_avgsd_report, pair_paths, sample_pairs,
    write_odds_tsv, BetweennessMode, DenseGraph, Measure, NavigationGraph, OddsRow, WeightedGraph,
};
use sciconnav_core::semantics::{analogy_infer, propensity_report, Direction, PropensityMode};
use sciconnav_core::synth::{clustered_space, gaussian_space, two_density_graph, PlantedConfig, PlantedDataset};
use sciconnav_core::taxonomy::{classify_all, count_root_paths, load_taxonomy, ConceptTaxonomy, Label};
use sciconnav_core::TrajectoryCorpus;

type Outcome = Result<String, String>;

fn refs(v: &[Vec<f64>]) -> Vec<&[f64]> {
    v.iter().map(Vec::as_slice).collect()
}

fn check(ok: bool, msg: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn label_fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core/tests/fixtures/labels").join(name)
}

/// Concept, root path counts and label.
type Expected = (&'static str, &'static [(&'static str, u64)], Label);

fn c1_label_fixture() -> Outcome {
    let t = load_taxonomy(label_fixture("concepts.tsv"), label_fixture("edges.tsv")).map_err(|e| e.to_string())?;
    let expect: [Expected; 4] = [
        ("simplicial_manifold", &[("mathematics", 16)], Label::Disciplinary("mathematics".into())),
        (
            "ppads",
            &[("biology", 54), ("chemistry", 32), ("medicine", 37)],
            Label::Disciplinary("biology".into()),
        ),
        (
            "glycine_cleavage_system",
            &[("biology", 29), ("chemistry", 22), ("physics", 8)],
            Label::Disciplinary("biology".into()),
        ),
        (
            "cutter_location",
            &[("computer_science", 12), ("engineering", 12), ("materials_science", 12), ("mathematics", 4)],
            Label::MultiInterdisciplinary,
        ),
    ];
    let classification = classify_all(&t).map_err(|e| e.to_string())?;
    for (id, counts, label) in expect {
        let mut got = count_root_paths(&t, id).map_err(|e| e.to_string())?.counts;
        got.sort();
        let want: Vec<(String, u64)> = counts.iter().map(|(d, c)| (d.to_string(), *c)).collect();
        check(got == want, format!("{id}: counts {got:?}"))?;
        let a = classification.get(id).ok_or(format!("{id} unclassified"))?;
        check(a.label == label, format!("{id}: label {:?}", a.label))?;
    }
    Ok("4/4 concepts".into())
}

fn c2_path_counts() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let (mut dags, mut checked) = (0, 0);
    for case in 0..240 {
        let n = 2 + case % 11;
        let roots = (1 + case % 3).min(n);
        let (concepts, e) = common::random_dag(&mut rng, n, roots, 0.35);
        let root_ids: HashSet<String> = concepts.iter().filter(|c| c.level == 0).map(|c| c.id.clone()).collect();
        let t = ConceptTaxonomy::from_parts(concepts.clone(), &e).map_err(|e| e.to_string())?;
        for c in &concepts {
            if common::reachable_roots(&e, &root_ids, &c.id).is_empty() {
                continue;
            }
            let got = count_root_paths(&t, &c.id).map_err(|e| e.to_string())?;
            for root in &root_ids {
                let dp = got.counts.iter().find(|(d, _)| d == root).map_or(0, |(_, k)| *k);
                let dfs = common::dfs_path_count(&e, root, &c.id);
                check(dp == dfs, format!("DAG {case}, {} from {root}: {dp} vs {dfs}", c.id))?;
                checked += 1;
            }
        }
        dags += 1;
    }
    Ok(format!("{dags} DAGs, {checked} (root, concept) counts agree"))
}

fn cluster_gap(space: &EmbeddingSpace) -> f64 {
    let (mut intra, mut ni, mut inter, mut nx) = (0.0, 0usize, 0.0, 0usize);
    for i in 0..space.len() {
        for j in (i + 1)..space.len() {
            let s = space.similarity_at(i, j);
            if PlantedDataset::cluster_of(space.id_at(i)) == PlantedDataset::cluster_of(space.id_at(j)) {
                intra += s;
                ni += 1;
            } else {
                inter += s;
                nx += 1;
            }
        }
    }
    intra / ni as f64 - inter / nx as f64
}

fn text_bytes(space: &EmbeddingSpace) -> Vec<u8> {
    let mut buf = Vec::new();
    write_text(space, &mut buf).expect("writing to memory");
    buf
}

fn c3_planted_training() -> Outcome {
    let data = PlantedConfig::default().generate();
    let corpus = data.corpus(50);
    check(corpus.trajectories.len() == 1000, "expected 1000 authors")?;
    let cfg = TrainConfig {
        seed: 42,
        workers: 1,
        ..Default::default()
    };
    check(cfg.dim == 24, "default dim is not 24")?;
    let space = train_sgns(&corpus, &cfg).map_err(|e| e.to_string())?;
    check(space.len() == 100, format!("vocabulary {}", space.len()))?;
    let gap = cluster_gap(&space);
    check(gap >= 0.2, format!("intra minus inter cosine {gap:.4}"))?;
    let again = train_sgns(&corpus, &cfg).map_err(|e| e.to_string())?;
    check(text_bytes(&space) == text_bytes(&again), "seeded rerun differs")?;
    Ok(format!("gap {gap:.3}, rerun byte-identical"))
}

fn c4_gradient() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(104);
    let mut draw = |n: usize| -> Vec<f64> { (0..n).map(|_| rng.random_range(-0.6..0.6)).collect() };
    let h = 1e-5;
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let (u, p) = (draw(24), draw(24));
        let negs: Vec<Vec<f64>> = (0..5).map(|_| draw(24)).collect();
        let g = example_gradient(&u, &p, &refs(&negs));
        let num = common::numeric_gradient(&u, h, |x| example_loss(x, &p, &refs(&negs)));
        worst = worst.max(common::vector_rel_error(&g.input, &num));
        let num = common::numeric_gradient(&p, h, |x| example_loss(&u, x, &refs(&negs)));
        worst = worst.max(common::vector_rel_error(&g.positive, &num));
        for k in 0..negs.len() {
            let num = common::numeric_gradient(&negs[k], h, |x| {
                let mut probe = negs.clone();
                probe[k] = x.to_vec();
                example_loss(&u, &p, &refs(&probe))
            });
            worst = worst.max(common::vector_rel_error(&g.negatives[k], &num));
        }
    }
    check(worst < 1e-5, format!("worst relative error {worst:.2e}"))?;
    Ok(format!("100 triples, worst relative error {worst:.2e}"))
}

fn c5_analogy() -> Outcome {
    let space = gaussian_space(5000, 24, 105);
    let scaled = space.scaled(3.7).map_err(|e| e.to_string())?;
    let mut rng = ChaCha8Rng::seed_from_u64(106);
    for q in 0..100 {
        let mut pick = || rng.random_range(0..space.len());
        let (a, c, d) = (pick(), pick(), pick());
        let dir = if q % 2 == 0 { Direction::Positive } else { Direction::Negative };
        let target: Vec<f64> = (0..space.dim())
            .map(|k| space.row(a)[k] + dir.sign() * (space.row(d)[k] - space.row(c)[k]))
            .collect();
        let tn = norm(&target);
        let mut best: Option<(usize, f64)> = None;
        for j in 0..space.len() {
            if j == a || j == c || j == d {
                continue;
            }
            let s = dot(space.row(j), &target) / (norm(space.row(j)) * tn);
            if best.is_none_or(|(b, bs)| s > bs || (s == bs && space.id_at(j) < space.id_at(b))) {
                best = Some((j, s));
            }
        }
        let (want, _) = best.ok_or("empty scan")?;
        let none = HashSet::new();
        let (ida, idc, idd) = (space.id_at(a), space.id_at(c), space.id_at(d));
        let got = analogy_infer(&space, ida, idc, idd, dir, &none).map_err(|e| e.to_string())?;
        check(got.id == space.id_at(want), format!("query {q}: {} vs {}", got.id, space.id_at(want)))?;
        let big = analogy_infer(&scaled, ida, idc, idd, dir, &none).map_err(|e| e.to_string())?;
        check(big.id == got.id, format!("query {q} changed under scaling"))?;
    }
    Ok("100/100 queries agree, scale-invariant".into())
}

fn c6_shortest_paths() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(107);
    let n = 50;
    for case in 0..20 {
        let w = common::random_complete_weights(&mut rng, n, 0.0, 2.0);
        let fw = common::floyd_warshall(&w, n);
        let g = DenseGraph::from_weights(n, w).map_err(|e| e.to_string())?;
        for s in 0..n {
            let sp = dijkstra(&g, s, None);
            for t in 0..n {
                let diff = (sp.dist[t] - fw[s * n + t]).abs();
                check(diff < 1e-9, format!("graph {case} {s}->{t} off by {diff:e}"))?;
            }
        }
    }
    let space = clustered_space(2, 1000, 24, 0.6, 108);
    let g = NavigationGraph::from_whole_space(&space).map_err(|e| e.to_string())?.with_weight_cache();
    check(g.len() == 2000, "graph is not 2000 nodes")?;
    let pairs = sample_pairs(g.len(), 1000, 109);
    for p in pair_paths(&g, &pairs) {
        check(
            p.distance <= g.weight(p.source, p.target) + 1e-12,
            format!("d({}, {}) exceeds its edge", p.source, p.target),
        )?;
    }
    Ok("20 graphs match Floyd-Warshall; 1000 pairs satisfy d <= w".into())
}

fn c7_centrality() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(110);
    let mut graphs = 0;
    for case in 0..26 {
        let n = 5 + case;
        let w = if case % 2 == 0 {
            common::random_sparse_integer_weights(&mut rng, n, 0.15)
        } else {
            common::random_complete_weights(&mut rng, n, 0.05, 2.0)
        };
        let d = common::floyd_warshall(&w, n);
        let g = DenseGraph::from_weights(n, w.clone()).map_err(|e| e.to_string())?;
        let closeness = closeness_centrality(&g).map_err(|e| e.to_string())?;
        for (v, (got, want)) in closeness.scores.iter().zip(common::brute_closeness(&d, n)).enumerate() {
            check((got - want).abs() < 1e-9, format!("closeness n={n} node {v}"))?;
        }
        let exact = betweenness_centrality(&g, BetweennessMode::Exact).map_err(|e| e.to_string())?;
        for (v, (got, want)) in exact.scores.iter().zip(common::brute_betweenness(&w, n, 1e-9)).enumerate() {
            check((got - want).abs() < 1e-9, format!("betweenness n={n} node {v}: {got} vs {want}"))?;
        }
        let pivots = betweenness_centrality(&g, BetweennessMode::Pivots { pivots: n, seed: 7 })
            .map_err(|e| e.to_string())?;
        for (a, b) in pivots.scores.iter().zip(&exact.scores) {
            check((a - b).abs() < 1e-9, format!("pivots = n differs from exact at n={n}"))?;
        }
        graphs += 1;
    }
    let n = 500;
    let g = DenseGraph::from_weights(n, common::random_complete_weights(&mut rng, n, 0.0, 2.0))
        .map_err(|e| e.to_string())?;
    let c = closeness_centrality(&g).map_err(|e| e.to_string())?;
    let everyone: Vec<usize> = (0..n).collect();
    let mut worst: f64 = 0.0;
    for i in 0..n {
        let a = avg_sd(&g, i, &everyone).map_err(|e| e.to_string())?;
        worst = worst.max((c.scores[i] * a - 1.0).abs());
    }
    check(worst <= 2.0 * f64::EPSILON, format!("closeness * AvgSD off by {worst:e}"))?;
    Ok(format!("{graphs} graphs (n 5..30) match brute force; closeness*AvgSD-1 <= {worst:.1e} on n=500"))
}

fn c8_odds_arithmetic() -> Outcome {
    let ks = [200, 500, 1000, 1500, 2000];
    let closeness = [(113, 87), (291, 209), (644, 356), (987, 513), (1333, 667)];
    let betweenness = [(113, 87), (315, 185), (667, 333), (1030, 470), (1398, 602)];
    let reference_closeness = [1.23, 1.39, 1.81, 1.92, 2.00];
    let reference_betweenness = [1.30, 1.70, 2.00, 2.19, 2.32];
    let mut notes = Vec::new();
    for (measure, pairs, reference) in [
        (Measure::Closeness, closeness, reference_closeness),
        (Measure::Betweenness, betweenness, reference_betweenness),
    ] {
        let rows: Vec<OddsRow> = ks
            .iter()
            .zip(pairs)
            .map(|(&k, (m, s))| OddsRow::from_counts(k, m, s))
            .collect();
        for (row, want) in rows.iter().zip(reference) {
            check(row.count_m + row.count_s == row.top_k, format!("{measure} top {} counts", row.top_k))?;
            let got = row.odds.ok_or("missing odds")?;
            if measure == Measure::Closeness && row.top_k == 200 {
                check((got - 1.30).abs() < 0.005, format!("113/87 = {got:.4}"))?;
                notes.push(format!("closeness top-200: 113/87 = {got:.2}, reference {want:.2} looks like a typo"));
                continue;
            }
            check((got - want).abs() < 0.005, format!("{measure} top {}: {got:.4} vs {want}", row.top_k))?;
        }
        let mut tsv = Vec::new();
        write_odds_tsv(measure, &rows, &mut tsv).map_err(|e| e.to_string())?;
        let tsv = String::from_utf8(tsv).map_err(|e| e.to_string())?;
        for (line, want) in tsv.lines().skip(1).zip(reference) {
            let cell = line.rsplit('\t').next().unwrap_or_default();
            if !(measure == Measure::Closeness && line.contains("\t200\t")) {
                check(cell == format!("{want:.2}"), format!("rendered `{line}`"))?;
            }
        }
    }
    Ok(notes.join("; "))
}

fn c9_propensity() -> Outcome {
    let data = PlantedConfig::default().generate();
    let space = train_sgns(&data.corpus(50), &TrainConfig::default()).map_err(|e| e.to_string())?;
    let classification = classify_all(&data.taxonomy().map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
    let report = propensity_report(&space, &classification, PropensityMode::Classified).map_err(|e| e.to_string())?;
    let (inn, out) = (report.in_summary.ok_or("no in-group")?, report.out_summary.ok_or("no out-group")?);
    let p = report.test.ok_or("no rank-sum test")?.p_value;
    check(inn.q50 > out.q50, format!("median in {:.3} <= out {:.3}", inn.q50, out.q50))?;
    check(p < 0.01, format!("p = {p:e}"))?;
    Ok(format!("median in {:.3} vs out {:.3}, p = {p:.1e}", inn.q50, out.q50))
}

fn c10_avgsd_order() -> Outcome {
    let g = two_density_graph(12, 12, 111);
    let n = g.node_count();
    let closeness = closeness_centrality(&g).map_err(|e| e.to_string())?;
    let hl = hl_avgsd_report(&g, &closeness, 12).map_err(|e| e.to_string())?;
    let (hh, hlm, ll) = (hl.summary_h_to_h.mean, hl.summary_h_to_l.mean, hl.summary_l_to_l.mean);
    check(hh < hlm && hlm < ll, format!("means {hh:.3} {hlm:.3} {ll:.3}"))?;
    let weights: Vec<f64> = (0..n * n).map(|k| g.weight(k / n, k % n)).collect();
    let d = common::floyd_warshall(&weights, n);
    let idx = |ids: &[String]| ids.iter().filter_map(|id| g.node_index(id).ok()).collect::<Vec<_>>();
    let (h, l) = (idx(&hl.h), idx(&hl.l));
    for (k, &i) in h.iter().enumerate() {
        check((hl.h_to_h[k] - common::brute_avg_sd(&d, n, i, &h)).abs() < 1e-9, "H->H mismatch")?;
        check((hl.h_to_l[k] - common::brute_avg_sd(&d, n, i, &l)).abs() < 1e-9, "H->L mismatch")?;
    }
    for (k, &i) in l.iter().enumerate() {
        check((hl.l_to_l[k] - common::brute_avg_sd(&d, n, i, &l)).abs() < 1e-9, "L->L mismatch")?;
    }
    Ok(format!("n={n}: H->H {hh:.3} < H->L {hlm:.3} < L->L {ll:.3}"))
}

fn sciconnav(args: &[&str]) -> Result<String, String> {
    let out = Command::new(env!("CARGO_BIN_EXE_sciconnav"))
        .env_remove("SCICONNAV_DATA_DIR")
        .args(args)
        .output()
        .map_err(|e| e.to_string())?;
    if !out.status.success() {
        return Err(format!("{args:?}: {}", String::from_utf8_lossy(&out.stderr).trim()));
    }
    Ok(String::from_utf8_lossy(&out.stdout).into_owned())
}

fn path_str(p: &Path) -> Result<&str, String> {
    p.to_str().ok_or_else(|| "non-UTF-8 temp path".to_string())
}

fn c11_round_trips() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(112);
    let rows = (0..200)
        .map(|i| {
            let v = (0..24).map(|_| rng.random_range(-1.0..1.0) * 10f64.powi(rng.random_range(-6..6))).collect();
            (format!("c{i:03}"), v)
        })
        .collect();
    let space = EmbeddingSpace::from_rows(rows).map_err(|e| e.to_string())?;
    let back = read_text(text_bytes(&space).as_slice()).map_err(|e| e.to_string())?;
    check(back.vocab() == space.vocab(), "embedding ids changed")?;
    for (a, b) in space.matrix().iter().zip(back.matrix()) {
        check((a - b).abs() <= 1e-9 * a.abs(), format!("{a} read back as {b}"))?;
    }

    let corpus = PlantedConfig {
        authors: 30,
        works_per_author: 8,
        ..Default::default()
    }
    .generate()
    .corpus(5);
    let mut buf = Vec::new();
    corpus.write(&mut buf).map_err(|e| e.to_string())?;
    let again = TrajectoryCorpus::read(buf.as_slice()).map_err(|e| e.to_string())?;
    check(again.vocabulary == corpus.vocabulary, "corpus vocabulary changed")?;
    for (a, b) in corpus.trajectories.iter().zip(&again.trajectories) {
        check(a.author_id == b.author_id && a.sequence == b.sequence, format!("author {} changed", a.author_id))?;
    }

    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let d = dir.path();
    let out = path_str(d)?;
    sciconnav(&["synth", "--authors", "80", "--works-per-author", "30", "--out", out])?;
    let works = d.join("works.tsv");
    sciconnav(&["train", "--works", path_str(&works)?, "--min-pubs", "20", "--seed", "9", "--out", out])?;
    let concepts = d.join("concepts.tsv");
    let edges = d.join("edges.tsv");
    sciconnav(&["classify", "--concepts", path_str(&concepts)?, "--edges", path_str(&edges)?, "--out", out])?;
    let mut replayed = 0;
    for cmd in ["synth", "train", "classify"] {
        let manifest = d.join(format!("{cmd}.manifest.json"));
        let target = d.join(format!("replay-{cmd}"));
        let report = sciconnav(&["replay", path_str(&manifest)?, "--out", path_str(&target)?])?;
        for line in report.lines().filter(|l| l.split('\t').count() == 3) {
            check(line.contains("\tidentical\t"), format!("{cmd} replay: {line}"))?;
            replayed += 1;
        }
    }
    Ok(format!("embeddings and corpus lossless; {replayed} artifacts replayed identically"))
}

struct Criterion {
    name: &'static str,
    budget: Duration,
    run: fn() -> Outcome,
}

fn main() {
    let secs = Duration::from_secs;
    let criteria = [
        Criterion { name: "C1 fixture taxonomy classification", budget: secs(1), run: c1_label_fixture },
        Criterion { name: "C2 path-count oracle", budget: secs(10), run: c2_path_counts },
        Criterion { name: "C3 planted-cluster training", budget: secs(120), run: c3_planted_training },
        Criterion { name: "C4 gradient check", budget: secs(5), run: c4_gradient },
        Criterion { name: "C5 analogy oracle", budget: secs(10), run: c5_analogy },
        Criterion { name: "C6 shortest-path oracle", budget: secs(30), run: c6_shortest_paths },
        Criterion { name: "C7 centrality oracles", budget: secs(60), run: c7_centrality },
        Criterion { name: "C8 odds table arithmetic", budget: secs(1), run: c8_odds_arithmetic },
        Criterion { name: "C9 propensity shift", budget: secs(10), run: c9_propensity },
        Criterion { name: "C10 AvgSD ordering", budget: secs(10), run: c10_avgsd_order },
        Criterion { name: "C11 round-trips and replay", budget: secs(10), run: c11_round_trips },
    ];
    panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for c in &criteria {
        let start = Instant::now();
        let outcome = panic::catch_unwind(AssertUnwindSafe(c.run)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()));
            Err(format!("panicked: {}", msg.unwrap_or_default()))
        });
        let elapsed = start.elapsed();
        let outcome = match outcome {
            Ok(_) if elapsed > c.budget => Err(format!("took {elapsed:.2?}, budget {:?}", c.budget)),
            other => other,
        };
        match outcome {
            Ok(detail) => println!("[PASS] {} ({elapsed:.2?} < {:?}): {detail}", c.name, c.budget),
            Err(why) => {
                failed += 1;
                println!("[FAIL] {} ({elapsed:.2?}): {why}", c.name);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
