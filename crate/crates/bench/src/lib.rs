//! Shared fixtures for the criterion benches.

use circlewalk_core::measure::StepDistribution;
use circlewalk_core::thompson::GeneratorSet;

pub fn generators() -> GeneratorSet {
    GeneratorSet::bundled().expect("bundled generator set")
}

pub fn lazy_measure() -> StepDistribution {
    StepDistribution::uniform_on(&generators())
        .expect("uniform measure")
        .lazify()
}
