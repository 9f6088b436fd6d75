//! Viewpoint discovery with topic models.
//!
//! Documents are split into topical and opinion words, modeled with LDA or
//! CorrLDA2 via collapsed Gibbs sampling, and the resulting per-document
//! topic and aspect fractions are fed to a linear SVM. The SVM weights link
//! aspects and topic groups to the two viewpoint labels.

pub mod checkpoint;
pub mod corpus;
pub mod corrlda2;
pub mod cv;
pub mod error;
pub mod exec;
pub mod experiment;
pub mod features;
pub mod lda;
pub mod math;
pub mod params;
pub mod rng;
pub mod svm;
pub mod synthetic;
pub mod viewpoint;

pub use checkpoint::Checkpoint;
pub use corpus::{
    apply_partition, build_unimodal, corpus_stats, load_annotated_corpus, BimodalCorpus, PartitionScheme,
    RawDocument, UnimodalCorpus, Viewpoint,
};
pub use corrlda2::{CorrLda2State, TopicalUpdate};
pub use cv::{cross_validate, CvReport};
pub use error::{Error, Result};
pub use features::{build_feature_matrix, FeatureMatrix, FeatureMode};
pub use lda::LdaState;
pub use params::Hyperparams;
pub use rng::ChainSeed;
pub use svm::{SvmConfig, SvmModel};
pub use viewpoint::{classify_and_score, form_groups, GroupReport, SweepReport, TopicAspectGroups};
