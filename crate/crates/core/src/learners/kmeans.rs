use rand::Rng as _;

use crate::error::{Error, Result};
use crate::neighbors::squared_distance;
use crate::rng;

#[derive(Debug, Clone, PartialEq)]
pub struct KMeansModel {
    /// Row-major `k × dim`.
    pub centroids: Vec<f64>,
    pub dim: usize,
    pub k: usize,
    pub assignments: Vec<usize>,
    pub inertia: f64,
    pub iterations: usize,
}

impl KMeansModel {
    pub fn centroid(&self, c: usize) -> &[f64] {
        &self.centroids[c * self.dim..(c + 1) * self.dim]
    }

    /// Members of each cluster, in point order.
    pub fn members(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.k];
        for (i, &c) in self.assignments.iter().enumerate() {
            out[c].push(i);
        }
        out
    }
}

fn point(points: &[f64], dim: usize, i: usize) -> &[f64] {
    &points[i * dim..(i + 1) * dim]
}

/// Nearest centroid, lowest index on ties.
fn nearest(p: &[f64], centroids: &[f64], dim: usize) -> (usize, f64) {
    centroids
        .chunks(dim)
        .enumerate()
        .map(|(c, m)| (c, squared_distance(p, m)))
        .fold((0, f64::INFINITY), |best, cur| if cur.1 < best.1 { cur } else { best })
}

/// k-means++ seeding: first centre uniform, later ones with probability
/// proportional to squared distance from the closest chosen centre.
fn seed_centroids(points: &[f64], dim: usize, n: usize, k: usize, rng: &mut rng::Rng) -> Vec<f64> {
    let mut chosen = vec![false; n];
    let first = rng.random_range(0..n);
    chosen[first] = true;
    let mut centroids = point(points, dim, first).to_vec();
    let mut d2: Vec<f64> = (0..n)
        .map(|i| squared_distance(point(points, dim, i), point(points, dim, first)))
        .collect();
    while centroids.len() < k * dim {
        let total: f64 = d2.iter().sum();
        let next = if total > 0.0 {
            let mut target = rng.random::<f64>() * total;
            let mut pick = None;
            for (i, &w) in d2.iter().enumerate() {
                if w > 0.0 {
                    pick = Some(i);
                    if target < w {
                        break;
                    }
                    target -= w;
                }
            }
            pick.expect("positive total weight")
        } else {
            // Remaining points all coincide with chosen centres.
            (0..n).find(|&i| !chosen[i]).unwrap_or(0)
        };
        chosen[next] = true;
        let c = point(points, dim, next).to_vec();
        for (i, w) in d2.iter_mut().enumerate() {
            *w = w.min(squared_distance(point(points, dim, i), &c));
        }
        centroids.extend(c);
    }
    centroids
}

fn lloyd(
    points: &[f64],
    dim: usize,
    n: usize,
    k: usize,
    mut centroids: Vec<f64>,
    max_iter: usize,
) -> KMeansModel {
    let mut assignments = vec![usize::MAX; n];
    let mut dist = vec![0.0; n];
    let mut iterations = 0;
    loop {
        let mut changed = false;
        for i in 0..n {
            let (c, d) = nearest(point(points, dim, i), &centroids, dim);
            if assignments[i] != c {
                assignments[i] = c;
                changed = true;
            }
            dist[i] = d;
        }
        if !changed || iterations >= max_iter {
            break;
        }
        iterations += 1;

        let mut sums = vec![0.0; k * dim];
        let mut counts = vec![0usize; k];
        for (i, &c) in assignments.iter().enumerate() {
            counts[c] += 1;
            for (s, v) in sums[c * dim..(c + 1) * dim].iter_mut().zip(point(points, dim, i)) {
                *s += v;
            }
        }
        let mut taken = vec![false; n];
        for c in 0..k {
            if counts[c] > 0 {
                for j in 0..dim {
                    centroids[c * dim + j] = sums[c * dim + j] / counts[c] as f64;
                }
            } else {
                // Re-seed an empty cluster at the point farthest from its centre.
                // When every point sits on a centre the cluster stays put.
                let (far, far_d) = (0..n)
                    .filter(|&i| !taken[i])
                    .fold((0, 0.0), |best, i| if dist[i] > best.1 { (i, dist[i]) } else { best });
                if far_d <= 0.0 {
                    continue;
                }
                taken[far] = true;
                dist[far] = 0.0;
                centroids[c * dim..(c + 1) * dim].copy_from_slice(point(points, dim, far));
            }
        }
    }
    KMeansModel {
        centroids,
        dim,
        k,
        assignments,
        inertia: dist.iter().sum(),
        iterations,
    }
}

/// Lloyd's algorithm with k-means++ seeding; keeps the restart with the lowest
/// inertia (first wins on ties).
pub fn kmeans_fit(
    points: &[f64],
    dim: usize,
    k: usize,
    seed: u64,
    max_iter: usize,
    n_restarts: usize,
) -> Result<KMeansModel> {
    if dim == 0 {
        return Err(Error::InvalidParameter("k-means needs at least one feature".into()));
    }
    let n = points.len() / dim;
    if k == 0 {
        return Err(Error::InvalidParameter("k-means needs k >= 1".into()));
    }
    if k > n {
        return Err(Error::TooFewCandidates { k, available: n });
    }
    let mut best: Option<KMeansModel> = None;
    for r in 0..n_restarts.max(1) {
        let mut rng = rng::seeded(rng::derive_index(seed, r as u64));
        let init = seed_centroids(points, dim, n, k, &mut rng);
        let model = lloyd(points, dim, n, k, init, max_iter);
        if best.as_ref().is_none_or(|b| model.inertia < b.inertia) {
            best = Some(model);
        }
    }
    Ok(best.expect("at least one restart"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn single_cluster_is_the_mean() {
        let pts = [0.0, 0.0, 2.0, 4.0, 4.0, 2.0];
        let m = kmeans_fit(&pts, 2, 1, 3, 50, 1).unwrap();
        assert_eq!(m.centroid(0), &[2.0, 2.0]);
    }

    #[test]
    fn separated_blobs() {
        let pts = [-0.1, 0.0, 0.1, 9.9, 10.0, 10.1];
        let m = kmeans_fit(&pts, 1, 2, 11, 50, 3).unwrap();
        let mut c = [m.centroid(0)[0], m.centroid(1)[0]];
        c.sort_by(f64::total_cmp);
        // The optimum puts each centre at its blob mean (0 and 10).
        assert!(c[0].abs() < 0.2 && (c[1] - 10.0).abs() < 0.2, "{c:?}");
    }

    #[test]
    fn one_centroid_per_point() {
        let pts = [1.0, 5.0, 5.0, 9.0, 2.0];
        let m = kmeans_fit(&pts, 1, 5, 0, 50, 1).unwrap();
        assert_eq!(m.inertia, 0.0);
        let mut c = m.centroids.clone();
        c.sort_by(f64::total_cmp);
        assert_eq!(c, vec![1.0, 2.0, 5.0, 5.0, 9.0]);
    }

    #[test]
    fn k_above_n_errors() {
        assert!(kmeans_fit(&[1.0, 2.0], 1, 3, 0, 10, 1).is_err());
    }

    proptest! {
        #[test]
        fn assignments_are_nearest_and_inertia_drops(
            seed: u64,
            pts in prop::collection::vec(-10.0f64..10.0, 2..120),
            k in 1usize..6,
        ) {
            let dim = 2;
            let n = pts.len() / dim;
            let pts = &pts[..n * dim];
            prop_assume!(k <= n);
            let m = kmeans_fit(pts, dim, k, seed, 100, 1).unwrap();
            let mut total = 0.0;
            for i in 0..n {
                let p = point(pts, dim, i);
                let d_assigned = squared_distance(p, m.centroid(m.assignments[i]));
                for c in 0..k {
                    prop_assert!(d_assigned <= squared_distance(p, m.centroid(c)));
                }
                total += d_assigned;
            }
            prop_assert!((total - m.inertia).abs() <= 1e-9 * (1.0 + total));
            // Compare against the seeding assignment of the same restart.
            let mut rng = rng::seeded(rng::derive_index(seed, 0));
            let init = seed_centroids(pts, dim, n, k, &mut rng);
            let initial = lloyd(pts, dim, n, k, init, 0).inertia;
            prop_assert!(m.inertia <= initial + 1e-9);
        }
    }
}
