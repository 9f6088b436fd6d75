//! Stratified k-fold cross-validation of the linear SVM.

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::corpus::Viewpoint;
use crate::error::{Error, Result};
use crate::exec::map_jobs;
use crate::features::FeatureMatrix;
use crate::rng::ChainSeed;
use crate::svm::{train, SvmConfig};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvReport {
    pub folds: usize,
    pub fold_accuracies: Vec<f64>,
    pub mean_accuracy: f64,
    pub seed: u64,
    /// Fold index of every example, aligned with the input rows.
    pub fold_assignment: Vec<usize>,
}

/// Assign each example a fold so every fold gets an even share of each label.
///
/// Each label's indices are shuffled with the seeded generator and dealt
/// round-robin; Palestinian examples are dealt first, then Israeli ones
/// continue from where they stopped.
pub fn stratified_folds(labels: &[Viewpoint], k: usize, seed: u64) -> Result<Vec<usize>> {
    if k < 2 {
        return Err(Error::Parameter(format!("need at least 2 folds, got {k}")));
    }
    let mut rng = ChainSeed::from(seed).rng();
    let mut folds = vec![0; labels.len()];
    let mut next = 0;
    for class in [Viewpoint::Palestinian, Viewpoint::Israeli] {
        let mut idx: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == class).collect();
        if idx.len() < k {
            return Err(Error::Parameter(format!(
                "label {class} has {} examples, fewer than {k} folds",
                idx.len()
            )));
        }
        idx.shuffle(&mut rng);
        for i in idx {
            folds[i] = next % k;
            next += 1;
        }
    }
    Ok(folds)
}

/// k-fold accuracy: each fold is predicted by a model trained on the others.
/// Folds are independent jobs and run on up to `jobs` threads.
pub fn cross_validate(
    features: &[Vec<f64>],
    labels: &[Viewpoint],
    k: usize,
    config: &SvmConfig,
    seed: u64,
    jobs: usize,
) -> Result<CvReport> {
    if features.len() != labels.len() {
        return Err(Error::Dimension { expected: features.len(), got: labels.len() });
    }
    let assignment = stratified_folds(labels, k, seed)?;
    let fold_ids: Vec<usize> = (0..k).collect();
    let results = map_jobs(&fold_ids, jobs, |&fold| -> Result<f64> {
        let (mut tx, mut ty) = (Vec::new(), Vec::new());
        let mut test = Vec::new();
        for (i, &f) in assignment.iter().enumerate() {
            if f == fold {
                test.push(i);
            } else {
                tx.push(features[i].clone());
                ty.push(labels[i]);
            }
        }
        let model = train(&tx, &ty, config)?;
        let mut correct = 0;
        for &i in &test {
            if model.predict(&features[i])? == labels[i] {
                correct += 1;
            }
        }
        Ok(correct as f64 / test.len() as f64)
    });
    let fold_accuracies = results.into_iter().collect::<Result<Vec<f64>>>()?;
    let mean_accuracy = fold_accuracies.iter().sum::<f64>() / k as f64;
    Ok(CvReport { folds: k, fold_accuracies, mean_accuracy, seed, fold_assignment: assignment })
}

pub fn cross_validate_matrix(
    matrix: &FeatureMatrix,
    k: usize,
    config: &SvmConfig,
    seed: u64,
    jobs: usize,
) -> Result<CvReport> {
    cross_validate(&matrix.rows, &matrix.labels, k, config, seed, jobs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use Viewpoint::{Israeli, Palestinian};

    #[test]
    fn folds_are_stratified() {
        let labels: Vec<_> = (0..23).map(|i| if i < 13 { Palestinian } else { Israeli }).collect();
        let folds = stratified_folds(&labels, 5, 3).unwrap();
        for f in 0..5 {
            let pal = (0..23).filter(|&i| folds[i] == f && labels[i] == Palestinian).count();
            let isr = (0..23).filter(|&i| folds[i] == f && labels[i] == Israeli).count();
            assert!((2..=3).contains(&pal), "fold {f}: {pal}");
            assert!((1..=3).contains(&isr), "fold {f}: {isr}");
        }
        assert_eq!(folds, stratified_folds(&labels, 5, 3).unwrap());
    }

    #[test]
    fn class_smaller_than_k_rejected() {
        let labels = vec![Palestinian, Palestinian, Israeli, Israeli, Israeli];
        assert!(stratified_folds(&labels, 3, 0).is_err());
        assert!(stratified_folds(&labels, 1, 0).is_err());
    }

    #[test]
    fn separable_data_is_perfect() {
        let x: Vec<Vec<f64>> = (0..40).map(|i| if i % 2 == 0 { vec![0.9, 0.1] } else { vec![0.1, 0.9] }).collect();
        let y: Vec<_> = (0..40).map(|i| if i % 2 == 0 { Israeli } else { Palestinian }).collect();
        let r = cross_validate(&x, &y, 5, &SvmConfig::default(), 1, 1).unwrap();
        assert_eq!(r.mean_accuracy, 1.0);
        let mean: f64 = r.fold_accuracies.iter().sum::<f64>() / 5.0;
        assert_eq!(mean, r.mean_accuracy);
    }

    #[test]
    fn parallel_matches_sequential() {
        let x: Vec<Vec<f64>> = (0..60).map(|i| vec![((i * 7) % 11) as f64 / 11.0, ((i * 5) % 13) as f64 / 13.0]).collect();
        let y: Vec<_> = (0..60).map(|i| if (i * 7) % 11 > 5 { Israeli } else { Palestinian }).collect();
        let a = cross_validate(&x, &y, 5, &SvmConfig::default(), 9, 1).unwrap();
        let b = cross_validate(&x, &y, 5, &SvmConfig::default(), 9, 4).unwrap();
        assert_eq!(a, b);
    }
}
