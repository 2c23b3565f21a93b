use super::LabeledDataset;
use crate::error::{Error, Result};
use crate::rng::SplitMix64;

/// Stratified train/test row indices. Each class contributes
/// `round(test_fraction * count)` test rows, at least one and never all of
/// them. Both index lists are sorted ascending.
pub fn split_indices(
    ds: &LabeledDataset,
    test_fraction: f64,
    seed: u64,
) -> Result<(Vec<usize>, Vec<usize>)> {
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "test fraction must lie in (0, 1), got {test_fraction}"
        )));
    }
    let by_class = ds.class_rows();
    for (class, rows) in by_class.iter().enumerate() {
        // Classes with zero rows have nothing to split.
        if rows.len() == 1 {
            return Err(Error::ClassTooSmall(ds.class_names()[class].clone(), 2));
        }
    }
    let mut rng = SplitMix64::new(seed);
    let mut train = Vec::new();
    let mut test = Vec::new();
    for mut rows in by_class {
        if rows.is_empty() {
            continue;
        }
        rng.shuffle(&mut rows);
        let n_test = ((test_fraction * rows.len() as f64).round() as usize).clamp(1, rows.len() - 1);
        test.extend_from_slice(&rows[..n_test]);
        train.extend_from_slice(&rows[n_test..]);
    }
    train.sort_unstable();
    test.sort_unstable();
    Ok((train, test))
}

pub fn split(
    ds: &LabeledDataset,
    test_fraction: f64,
    seed: u64,
) -> Result<(LabeledDataset, LabeledDataset)> {
    let (train, test) = split_indices(ds, test_fraction, seed)?;
    Ok((ds.subset(&train)?, ds.subset(&test)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{SymptomVector, SymptomVocabulary};

    fn balanced(n_classes: usize, per_class: usize) -> LabeledDataset {
        let vocab = SymptomVocabulary::new(["a", "b"]).unwrap();
        let samples = (0..n_classes * per_class)
            .map(|i| (SymptomVector::from_bits(vec![(i % 2) as u8, 0]).unwrap(), i % n_classes))
            .collect();
        let names = (0..n_classes).map(|c| format!("d{c}")).collect();
        LabeledDataset::new(vocab, samples, names).unwrap()
    }

    #[test]
    fn stratified_counts() {
        let ds = balanced(10, 10);
        let (train, test) = split(&ds, 0.2, 7).unwrap();
        assert_eq!(train.len(), 80);
        assert_eq!(test.len(), 20);
        assert!(test.class_counts().iter().all(|&c| c == 2));
    }

    #[test]
    fn deterministic_and_disjoint() {
        let ds = balanced(10, 10);
        let a = split_indices(&ds, 0.2, 7).unwrap();
        let b = split_indices(&ds, 0.2, 7).unwrap();
        assert_eq!(a, b);
        let mut all: Vec<usize> = a.0.iter().chain(a.1.iter()).copied().collect();
        all.sort_unstable();
        assert_eq!(all, (0..100).collect::<Vec<_>>());
        assert_ne!(a, split_indices(&ds, 0.2, 8).unwrap());
    }

    #[test]
    fn singleton_class_is_named() {
        let vocab = SymptomVocabulary::new(["a"]).unwrap();
        let x = SymptomVector::zeros(1);
        let ds = LabeledDataset::new(
            vocab,
            vec![(x.clone(), 0), (x.clone(), 0), (x, 1)],
            vec!["Common".into(), "Rare".into()],
        )
        .unwrap();
        let err = split(&ds, 0.5, 1).unwrap_err();
        assert!(err.to_string().contains("Rare"), "{err}");
    }

    #[test]
    fn rejects_bad_fraction() {
        let ds = balanced(2, 4);
        assert!(split(&ds, 0.0, 1).is_err());
        assert!(split(&ds, 1.0, 1).is_err());
    }

    #[test]
    fn per_class_proportion_within_one_sample() {
        let vocab = SymptomVocabulary::new(["a"]).unwrap();
        let counts = [2usize, 3, 7, 11, 20];
        let mut samples = Vec::new();
        for (c, &n) in counts.iter().enumerate() {
            for _ in 0..n {
                samples.push((SymptomVector::zeros(1), c));
            }
        }
        let names = (0..counts.len()).map(|c| format!("c{c}")).collect();
        let ds = LabeledDataset::new(vocab, samples, names).unwrap();
        for fraction in [0.1, 0.25, 0.5, 0.9] {
            let (_, test) = split(&ds, fraction, 3).unwrap();
            for (c, &n) in counts.iter().enumerate() {
                let got = test.class_counts()[c] as f64;
                assert!((got - fraction * n as f64).abs() <= 1.0, "class {c} fraction {fraction}");
            }
        }
    }
}
