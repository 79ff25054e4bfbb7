use crate::dataset::LabeledDataset;
use crate::error::{Error, Result};
use crate::neighbors::NeighborIndex;

/// Fraction of minority labels among the `k` nearest training rows of each
/// query row (`query` is row-major with the training dimension).
pub fn knn_score(train: &LabeledDataset, query: &[f64], k: usize) -> Result<Vec<f64>> {
    if k > train.n_samples() {
        return Err(Error::TooFewCandidates {
            k,
            available: train.n_samples(),
        });
    }
    let dim = train.n_features();
    let index = NeighborIndex::build(train.features().to_vec(), dim)?;
    let labels = train.labels();
    query
        .chunks(dim)
        .map(|q| {
            let nn = index.knn(q, k, None)?;
            let pos = nn.iter().filter(|n| labels[n.index].is_minority()).count();
            Ok(pos as f64 / k as f64)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::Class;
    use crate::neighbors::squared_distance;
    use proptest::prelude::*;
    use rand::Rng;

    #[test]
    fn exact_minority_match() {
        let d = LabeledDataset::from_classes(&[vec![0.0, 0.0]], &[vec![3.0, 1.0]]).unwrap();
        assert_eq!(knn_score(&d, &[3.0, 1.0], 1).unwrap(), vec![1.0]);
    }

    #[test]
    fn full_neighbourhood_is_prevalence() {
        let d = LabeledDataset::from_classes(&[vec![0.0], vec![1.0], vec![2.0]], &[vec![5.0]]).unwrap();
        let s = knn_score(&d, &[-4.0, 1.5, 9.0], 4).unwrap();
        assert_eq!(s, vec![0.25; 3]);
    }

    proptest! {
        #[test]
        fn matches_brute_force_recount(seed: u64, n in 2usize..80, k in 1usize..10) {
            let mut rng = crate::rng::seeded(seed);
            let k = k.min(n);
            let rows: Vec<Vec<f64>> = (0..n).map(|_| vec![rng.random(), rng.random()]).collect();
            let labels: Vec<Class> = (0..n).map(|_| Class::from_bool(rng.random_bool(0.3))).collect();
            let d = LabeledDataset::from_rows(&rows, labels.clone()).unwrap();
            let q = [rng.random::<f64>(), rng.random::<f64>()];
            let mut order: Vec<(f64, usize)> = rows.iter().enumerate().map(|(i, r)| (squared_distance(r, &q), i)).collect();
            order.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
            let expected = order[..k].iter().filter(|(_, i)| labels[*i].is_minority()).count() as f64 / k as f64;
            prop_assert_eq!(knn_score(&d, &q, k).unwrap()[0], expected);
        }
    }
}
