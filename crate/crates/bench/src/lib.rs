//! Shared fixtures for the benchmarks.

use healthrec_core::dataset::generate_synthetic;
use healthrec_core::{LabeledDataset, SymptomVector, SyntheticSpec};

/// The bundled 40-disease, 130-symptom configuration.
pub fn bundled() -> LabeledDataset {
    generate_synthetic(&SyntheticSpec::bundled()).expect("bundled spec is valid").0
}

/// A smaller set for the slower trainers.
pub fn small() -> LabeledDataset {
    let spec = SyntheticSpec {
        samples_per_disease: 25,
        ..SyntheticSpec::bundled()
    };
    generate_synthetic(&spec).expect("valid spec").0
}

/// Every tenth training vector, used as queries.
pub fn queries(ds: &LabeledDataset) -> Vec<SymptomVector> {
    ds.samples().iter().step_by(10).map(|(x, _)| x.clone()).collect()
}
