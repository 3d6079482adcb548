//! Two-dimensional layout of the unit vectors by principal components.

use nalgebra::{DMatrix, SymmetricEigen};
use sciconnav_core::{Classification, EmbeddingSpace};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MapPoint {
    pub id: String,
    pub x: f64,
    pub y: f64,
    /// Discipline label, `Multi-interdisciplinary`, or null when the concept
    /// is not in the taxonomy.
    pub discipline: Option<String>,
}

/// Projects the centered unit vectors onto the two leading eigenvectors of
/// their covariance. Each component's sign is fixed so that its largest
/// entry is positive.
pub fn pca_map(space: &EmbeddingSpace, classification: &Classification) -> Vec<MapPoint> {
    let (n, dim) = (space.len(), space.dim());
    if n == 0 {
        return Vec::new();
    }
    let x = DMatrix::from_fn(n, dim, |i, j| space.unit_row(i)[j]);
    let mean = x.row_mean();
    let mut centered = x;
    for mut row in centered.row_iter_mut() {
        row -= &mean;
    }
    let cov = centered.transpose() * &centered / (n.max(2) - 1) as f64;
    let eig = SymmetricEigen::new(cov);
    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]).then(a.cmp(&b)));
    let component = |k: usize| -> Vec<f64> {
        let Some(&c) = order.get(k) else {
            return vec![0.0; dim];
        };
        let mut v: Vec<f64> = eig.eigenvectors.column(c).iter().copied().collect();
        let lead = v.iter().copied().fold(0.0f64, |m, x| if x.abs() > m.abs() { x } else { m });
        if lead < 0.0 {
            v.iter_mut().for_each(|x| *x = -*x);
        }
        v
    };
    let (px, py) = (component(0), component(1));
    (0..n)
        .map(|i| {
            let row = centered.row(i);
            let id = space.id_at(i);
            MapPoint {
                id: id.to_string(),
                x: row.iter().zip(&px).map(|(a, b)| a * b).sum(),
                y: row.iter().zip(&py).map(|(a, b)| a * b).sum(),
                discipline: classification.get(id).map(|a| a.label.as_str().to_string()),
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn leading_axis_follows_spread() {
        let rows = vec![
            ("a".to_string(), vec![1.0, 0.1, 0.0]),
            ("b".to_string(), vec![-1.0, 0.1, 0.0]),
            ("c".to_string(), vec![1.0, -0.1, 0.0]),
            ("d".to_string(), vec![-1.0, -0.1, 0.0]),
        ];
        let space = EmbeddingSpace::from_rows(rows).unwrap();
        let map = pca_map(&space, &Classification::default());
        assert_eq!(map.len(), 4);
        let xs: Vec<f64> = map.iter().map(|p| p.x.abs()).collect();
        let ys: Vec<f64> = map.iter().map(|p| p.y.abs()).collect();
        assert!(xs.iter().all(|&x| x > 0.9));
        assert!(ys.iter().all(|&y| y < 0.2));
        assert!(map.iter().all(|p| p.discipline.is_none()));
    }
}
