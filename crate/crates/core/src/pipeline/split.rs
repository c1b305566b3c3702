use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;

use crate::error::{Error, Result};
use crate::pipeline::GraphLabel;
use crate::rng::{derive_seed, rng_from_seed};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Split {
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

fn by_class(labels: &[GraphLabel], seed: u64) -> [Vec<usize>; 2] {
    let mut classes = [Vec::new(), Vec::new()];
    for (i, l) in labels.iter().enumerate() {
        classes[l.class_index()].push(i);
    }
    for (c, members) in classes.iter_mut().enumerate() {
        members.shuffle(&mut rng_from_seed(derive_seed(seed, "class", c as u64)));
    }
    classes
}

/// Stratified train/test split of sample indices. The training side gets
/// `round(len * train_fraction)` samples, apportioned across classes by
/// largest remainder. Both index lists come back sorted.
pub fn split_dataset(labels: &[GraphLabel], train_fraction: f64, seed: u64) -> Result<Split> {
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(Error::params(alloc::format!(
            "train fraction {train_fraction} outside (0, 1)"
        )));
    }
    if labels.is_empty() {
        return Err(Error::input("cannot split an empty dataset"));
    }
    let classes = by_class(labels, seed);
    let total_train = libm::round(labels.len() as f64 * train_fraction) as usize;
    let exact: Vec<f64> = classes.iter().map(|c| c.len() as f64 * train_fraction).collect();
    let mut take: Vec<usize> = exact.iter().map(|&e| libm::floor(e) as usize).collect();
    let mut order = [0usize, 1];
    order.sort_by(|&a, &b| {
        let ra = exact[a] - libm::floor(exact[a]);
        let rb = exact[b] - libm::floor(exact[b]);
        rb.total_cmp(&ra).then(a.cmp(&b))
    });
    let mut missing = total_train.saturating_sub(take.iter().sum());
    for &c in order.iter().cycle().take(4) {
        if missing == 0 {
            break;
        }
        if take[c] < classes[c].len() {
            take[c] += 1;
            missing -= 1;
        }
    }
    let mut train = Vec::with_capacity(total_train);
    let mut test = Vec::with_capacity(labels.len() - total_train);
    for (c, members) in classes.iter().enumerate() {
        train.extend_from_slice(&members[..take[c]]);
        test.extend_from_slice(&members[take[c]..]);
    }
    train.sort_unstable();
    test.sort_unstable();
    Ok(Split { train, test })
}

/// `k` disjoint, exhaustive, stratified folds of `0..labels.len()`.
pub fn stratified_folds(labels: &[GraphLabel], k: usize, seed: u64) -> Result<Vec<Vec<usize>>> {
    if k < 2 {
        return Err(Error::params("need at least 2 folds"));
    }
    if labels.len() < k {
        return Err(Error::params(alloc::format!(
            "{} samples cannot fill {k} folds",
            labels.len()
        )));
    }
    let mut folds = vec![Vec::new(); k];
    let mut next = 0;
    for members in by_class(labels, seed) {
        for i in members {
            folds[next].push(i);
            next = (next + 1) % k;
        }
    }
    for f in &mut folds {
        f.sort_unstable();
    }
    Ok(folds)
}

#[cfg(test)]
mod tests {
    use super::*;
    use GraphLabel::*;

    fn balanced(n: usize) -> Vec<GraphLabel> {
        (0..n).map(|i| if i % 2 == 0 { NoAttack } else { AttackPresent }).collect()
    }

    fn count(labels: &[GraphLabel], idx: &[usize], l: GraphLabel) -> usize {
        idx.iter().filter(|&&i| labels[i] == l).count()
    }

    #[test]
    fn paper_sizes() {
        let labels = balanced(1000);
        let s = split_dataset(&labels, 0.7, 1).unwrap();
        assert_eq!((s.train.len(), s.test.len()), (700, 300));
        assert_eq!(count(&labels, &s.train, NoAttack), 350);
        assert_eq!(count(&labels, &s.train, AttackPresent), 350);

        let s = split_dataset(&balanced(10), 0.7, 1).unwrap();
        assert_eq!((s.train.len(), s.test.len()), (7, 3));
    }

    #[test]
    fn bad_fraction() {
        assert!(matches!(split_dataset(&balanced(10), 1.0, 0), Err(Error::InvalidParameters(_))));
        assert!(matches!(split_dataset(&balanced(10), 0.0, 0), Err(Error::InvalidParameters(_))));
    }

    #[test]
    fn five_folds_of_140() {
        let labels = balanced(700);
        let folds = stratified_folds(&labels, 5, 3).unwrap();
        for f in &folds {
            assert_eq!(f.len(), 140);
            assert_eq!(count(&labels, f, NoAttack), 70);
        }
        assert!(matches!(stratified_folds(&balanced(4), 5, 0), Err(Error::InvalidParameters(_))));
    }

    proptest::proptest! {
        #[test]
        fn partitions(n in 1usize..200, frac in 0.05f64..0.95, pos in 0.0f64..1.0, seed: u64, k in 2usize..8) {
            let labels: Vec<_> = (0..n).map(|i| if (i as f64) < pos * n as f64 { NoAttack } else { AttackPresent }).collect();
            let s = split_dataset(&labels, frac, seed).unwrap();
            let mut all: Vec<usize> = s.train.iter().chain(&s.test).copied().collect();
            all.sort_unstable();
            proptest::prop_assert_eq!(all, (0..n).collect::<Vec<_>>());
            proptest::prop_assert_eq!(s.train.len(), libm::round(n as f64 * frac) as usize);
            for l in [NoAttack, AttackPresent] {
                let in_train = count(&labels, &s.train, l) as f64;
                let expected = count(&labels, &(0..n).collect::<Vec<_>>(), l) as f64 * frac;
                proptest::prop_assert!((in_train - expected).abs() <= 1.0 + 1e-9);
            }
            if n >= k {
                let folds = stratified_folds(&labels, k, seed).unwrap();
                let mut all: Vec<usize> = folds.concat();
                all.sort_unstable();
                proptest::prop_assert_eq!(all, (0..n).collect::<Vec<_>>());
                let sizes: Vec<usize> = folds.iter().map(Vec::len).collect();
                proptest::prop_assert!(sizes.iter().max().unwrap() - sizes.iter().min().unwrap() <= 1);
            }
        }
    }
}
