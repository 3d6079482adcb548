//! Brute-force reference implementations shared by the integration tests.
#![allow(dead_code)]

use std::collections::{HashMap, HashSet, VecDeque};

use rand::Rng;
use sciconnav_core::taxonomy::Concept;

/// Random DAG on `n` nodes: the first `roots` are level 0; every later node
/// links to each earlier node with probability `p`. Some nodes may end up
/// unreachable from every root.
pub fn random_dag<R: Rng>(rng: &mut R, n: usize, roots: usize, p: f64) -> (Vec<Concept>, Vec<(String, String)>) {
    let id = |i: usize| format!("c{i:02}");
    let concepts = (0..n)
        .map(|i| Concept {
            id: id(i),
            name: id(i),
            level: if i < roots { 0 } else { 1 },
            works_count: 1,
        })
        .collect();
    let mut edges = Vec::new();
    for child in roots..n {
        for parent in 0..child {
            if rng.random::<f64>() < p {
                edges.push((id(child), id(parent)));
            }
        }
    }
    (concepts, edges)
}

/// Number of distinct directed paths from `root` down to `target`, by
/// explicit enumeration.
pub fn dfs_path_count(edges: &[(String, String)], root: &str, target: &str) -> u64 {
    let mut children: HashMap<&str, Vec<&str>> = HashMap::new();
    for (c, p) in edges {
        children.entry(p.as_str()).or_default().push(c.as_str());
    }
    fn walk(children: &HashMap<&str, Vec<&str>>, at: &str, target: &str) -> u64 {
        if at == target {
            return 1;
        }
        children
            .get(at)
            .map(|cs| cs.iter().map(|c| walk(children, c, target)).sum())
            .unwrap_or(0)
    }
    walk(&children, root, target)
}

/// Roots from which `target` is reachable, by breadth-first search upward.
pub fn reachable_roots(edges: &[(String, String)], roots: &HashSet<String>, target: &str) -> HashSet<String> {
    let mut parents: HashMap<&str, Vec<&str>> = HashMap::new();
    for (c, p) in edges {
        parents.entry(c.as_str()).or_default().push(p.as_str());
    }
    let mut seen = HashSet::from([target.to_string()]);
    let mut queue = VecDeque::from([target.to_string()]);
    while let Some(v) = queue.pop_front() {
        for &p in parents.get(v.as_str()).into_iter().flatten() {
            if seen.insert(p.to_string()) {
                queue.push_back(p.to_string());
            }
        }
    }
    seen.into_iter().filter(|v| roots.contains(v)).collect()
}

/// Symmetric complete graph with weights uniform in `[lo, hi)`.
pub fn random_complete_weights<R: Rng>(rng: &mut R, n: usize, lo: f64, hi: f64) -> Vec<f64> {
    let mut w = vec![0.0; n * n];
    for i in 0..n {
        for j in (i + 1)..n {
            let x = rng.random_range(lo..hi);
            w[i * n + j] = x;
            w[j * n + i] = x;
        }
    }
    w
}

/// Symmetric sparse graph with small integer weights; a spanning path keeps
/// it connected. Missing edges are infinite.
pub fn random_sparse_integer_weights<R: Rng>(rng: &mut R, n: usize, p: f64) -> Vec<f64> {
    let mut w = vec![f64::INFINITY; n * n];
    for i in 0..n {
        w[i * n + i] = 0.0;
    }
    let set = |w: &mut Vec<f64>, i: usize, j: usize, x: f64| {
        w[i * n + j] = x;
        w[j * n + i] = x;
    };
    for i in 1..n {
        let x = rng.random_range(1..=4) as f64;
        set(&mut w, i - 1, i, x);
    }
    for i in 0..n {
        for j in (i + 2)..n {
            if rng.random::<f64>() < p {
                let x = rng.random_range(1..=4) as f64;
                set(&mut w, i, j, x);
            }
        }
    }
    w
}

pub fn floyd_warshall(w: &[f64], n: usize) -> Vec<f64> {
    let mut d = w.to_vec();
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                let via = d[i * n + k] + d[k * n + j];
                if via < d[i * n + j] {
                    d[i * n + j] = via;
                }
            }
        }
    }
    d
}

/// Closeness from all-pairs distances: `(n - 1) / sum_j d_ij`.
pub fn brute_closeness(d: &[f64], n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| {
            let sum: f64 = (0..n).filter(|&j| j != i).map(|j| d[i * n + j]).sum();
            1.0 / (sum / (n - 1) as f64)
        })
        .collect()
}

/// Betweenness by listing every shortest path of every ordered pair. Edges
/// `u -> v` are on a shortest `s -> t` path when
/// `d(s,u) + w(u,v) + d(v,t) = d(s,t)` within `tol`.
pub fn brute_betweenness(w: &[f64], n: usize, tol: f64) -> Vec<f64> {
    let d = floyd_warshall(w, n);
    let mut score = vec![0.0; n];
    for s in 0..n {
        for t in 0..n {
            if s == t || !d[s * n + t].is_finite() {
                continue;
            }
            let mut paths: Vec<Vec<usize>> = Vec::new();
            let mut stack = vec![vec![s]];
            while let Some(path) = stack.pop() {
                let u = *path.last().unwrap();
                if u == t {
                    paths.push(path);
                    continue;
                }
                for v in 0..n {
                    if v == u || !w[u * n + v].is_finite() || path.contains(&v) {
                        continue;
                    }
                    let through = d[s * n + u] + w[u * n + v] + d[v * n + t];
                    if (through - d[s * n + t]).abs() <= tol {
                        let mut next = path.clone();
                        next.push(v);
                        stack.push(next);
                    }
                }
            }
            let total = paths.len() as f64;
            for path in &paths {
                for &v in &path[1..path.len() - 1] {
                    score[v] += 1.0 / total;
                }
            }
        }
    }
    let pairs = ((n - 1) * (n - 2)) as f64;
    score.into_iter().map(|x| x / pairs).collect()
}

/// Mean of `d(i, j)` over `j` in `set` minus `i`.
pub fn brute_avg_sd(d: &[f64], n: usize, i: usize, set: &[usize]) -> f64 {
    let others: Vec<usize> = set.iter().copied().filter(|&j| j != i).collect();
    others.iter().map(|&j| d[i * n + j]).sum::<f64>() / others.len() as f64
}

/// Relative error between two vectors: `|a - b| / max(|a|, |b|)`, or the
/// absolute error when both are tiny.
pub fn vector_rel_error(a: &[f64], b: &[f64]) -> f64 {
    let diff = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt();
    let scale = a.iter().map(|x| x * x).sum::<f64>().sqrt().max(b.iter().map(|x| x * x).sum::<f64>().sqrt());
    if scale < 1e-12 {
        diff
    } else {
        diff / scale
    }
}

/// Central finite-difference gradient of `f` at `x`.
pub fn numeric_gradient(x: &[f64], h: f64, mut f: impl FnMut(&[f64]) -> f64) -> Vec<f64> {
    let mut probe = x.to_vec();
    (0..x.len())
        .map(|k| {
            let orig = probe[k];
            probe[k] = orig + h;
            let up = f(&probe);
            probe[k] = orig - h;
            let down = f(&probe);
            probe[k] = orig;
            (up - down) / (2.0 * h)
        })
        .collect()
}
