#![allow(dead_code)]

use amr_cli::commands::train_eval;
use amr_cli::{RunConfig, TrainedModelBundle};
use amr_core::data_model::{builtin_marginals, synthesize, Dataset, FeatureSchema, FoldMode, LabelRule};
use amr_core::forest::ForestParams;
use amr_core::model::{ModelConfig, ModelKind};
use amr_core::neuralnet::TrainConfig;

/// Hyper-parameters small enough for tests; the pipeline shape is unchanged.
pub fn quick_config() -> ModelConfig {
    ModelConfig {
        forest: ForestParams {
            n_trees: 15,
            ..Default::default()
        },
        network: TrainConfig {
            epochs: 4,
            ..Default::default()
        },
        threshold: 0.5,
    }
}

pub fn gpc_cohort(n: usize, seed: u64) -> Dataset {
    let schema = FeatureSchema::gpc();
    let marginals = builtin_marginals("gpc").unwrap();
    synthesize(&schema, &marginals, &LabelRule::IndependentBernoulli { p: 0.4 }, n, seed).unwrap()
}

pub fn quick_bundle(dataset: &Dataset, models: &[ModelKind]) -> TrainedModelBundle {
    let run = RunConfig {
        folds: FoldMode::KFold { k: 3 },
        models: models.to_vec(),
        config: quick_config(),
        seed: 5,
    };
    train_eval(dataset, &run).unwrap().1
}
