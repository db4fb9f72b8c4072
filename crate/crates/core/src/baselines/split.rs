use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Few-shot partition of the nodes into train / validation / test sets.
/// Each list is sorted ascending.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitSpec {
    pub n: usize,
    pub shots: usize,
    pub train: Vec<usize>,
    pub val: Vec<usize>,
    pub test: Vec<usize>,
}

impl SplitSpec {
    fn mask_of(&self, ids: &[usize]) -> Vec<bool> {
        let mut m = vec![false; self.n];
        ids.iter().for_each(|&i| m[i] = true);
        m
    }

    pub fn train_mask(&self) -> Vec<bool> {
        self.mask_of(&self.train)
    }

    pub fn val_mask(&self) -> Vec<bool> {
        self.mask_of(&self.val)
    }

    pub fn test_mask(&self) -> Vec<bool> {
        self.mask_of(&self.test)
    }
}

/// Samples `shots` training and `val_per_class` validation nodes per class
/// without replacement; every other node is a test node.
pub fn make_few_shot_split<R: Rng + ?Sized>(
    labels: &[usize],
    shots: usize,
    val_per_class: usize,
    rng: &mut R,
) -> Result<SplitSpec> {
    let classes = labels.iter().max().map_or(0, |&m| m + 1);
    let mut members = vec![Vec::new(); classes];
    for (i, &c) in labels.iter().enumerate() {
        members[c].push(i);
    }
    let required = shots + val_per_class;
    let mut train = Vec::with_capacity(shots * classes);
    let mut val = Vec::with_capacity(val_per_class * classes);
    let mut test = Vec::new();
    for (class, ids) in members.iter_mut().enumerate() {
        if ids.len() < required || ids.is_empty() {
            return Err(Error::ClassTooSmall {
                class,
                size: ids.len(),
                required: required.max(1),
            });
        }
        ids.shuffle(rng);
        train.extend_from_slice(&ids[..shots]);
        val.extend_from_slice(&ids[shots..required]);
        test.extend_from_slice(&ids[required..]);
    }
    if test.is_empty() {
        return Err(Error::EmptyTest);
    }
    train.sort_unstable();
    val.sort_unstable();
    test.sort_unstable();
    Ok(SplitSpec {
        n: labels.len(),
        shots,
        train,
        val,
        test,
    })
}
