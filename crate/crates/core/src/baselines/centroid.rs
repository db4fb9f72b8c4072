use super::{squared_distance, SplitSpec};
use crate::error::{Error, Result};
use crate::features::{FeatureMatrix, Matrix};

/// Predicts the class whose training centroid is nearest in Euclidean
/// distance, ties going to the lowest class id.
pub fn nearest_centroid(
    features: &FeatureMatrix,
    split: &SplitSpec,
    labels: &[usize],
) -> Result<Vec<usize>> {
    if labels.len() != features.rows() {
        return Err(Error::LengthMismatch {
            left: labels.len(),
            right: features.rows(),
        });
    }
    let classes = labels.iter().max().map_or(0, |&m| m + 1);
    let mut centroids = Matrix::zeros(classes, features.cols());
    let mut counts = vec![0usize; classes];
    for &i in &split.train {
        counts[labels[i]] += 1;
        for (acc, &x) in centroids.row_mut(labels[i]).iter_mut().zip(features.row(i)) {
            *acc += x;
        }
    }
    if let Some(class) = counts.iter().position(|&c| c == 0) {
        return Err(Error::ClassTooSmall {
            class,
            size: 0,
            required: 1,
        });
    }
    for (c, &count) in counts.iter().enumerate() {
        let inv = 1.0 / count as f64;
        centroids.row_mut(c).iter_mut().for_each(|x| *x *= inv);
    }
    Ok(features
        .iter_rows()
        .map(|row| {
            let mut best = (0, f64::INFINITY);
            for (c, centroid) in centroids.iter_rows().enumerate() {
                let d = squared_distance(row, centroid);
                if d < best.1 {
                    best = (c, d);
                }
            }
            best.0
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_dimensional_hand_case() {
        let x = Matrix::from_rows(&[vec![-1.0], vec![1.0], vec![0.2]]).unwrap();
        let split = SplitSpec {
            n: 3,
            shots: 1,
            train: vec![0, 1],
            val: vec![],
            test: vec![2],
        };
        let pred = nearest_centroid(&x, &split, &[0, 1, 1]).unwrap();
        assert_eq!(pred[2], 1);
    }

    #[test]
    fn tie_goes_to_lowest_class() {
        let x = Matrix::from_rows(&[vec![-1.0], vec![1.0], vec![0.0]]).unwrap();
        let split = SplitSpec {
            n: 3,
            shots: 1,
            train: vec![0, 1],
            val: vec![],
            test: vec![2],
        };
        assert_eq!(nearest_centroid(&x, &split, &[0, 1, 1]).unwrap()[2], 0);
    }

    #[test]
    fn class_without_training_rows() {
        let x = Matrix::from_rows(&[vec![0.0], vec![1.0], vec![2.0]]).unwrap();
        let split = SplitSpec {
            n: 3,
            shots: 1,
            train: vec![0],
            val: vec![],
            test: vec![1, 2],
        };
        assert!(matches!(
            nearest_centroid(&x, &split, &[0, 1, 1]),
            Err(Error::ClassTooSmall { class: 1, .. })
        ));
    }
}
