//! Experiment machinery: datasets, synthetic data, distance tables, 1NN
//! and cross-validated parameter search.

pub mod dataset;
pub mod distance;
pub mod grid;
pub mod knn;
pub mod pca;
pub mod synth;

pub use dataset::{load_ucr_tsv, write_ucr_tsv, LabeledDataset};
pub use distance::{cross_matrix, pairwise_matrix, DistanceConfig, DistanceMatrix, Method};
pub use grid::{grid_search, GridSearchReport};
pub use knn::{accuracy, knn_1, leave_one_out};
pub use pca::{lifted_radius, principal_direction};
pub use synth::gen_separability_data;
