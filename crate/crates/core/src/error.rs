use thiserror::Error;

use crate::attribution::AttributionError;
use crate::dataset::DatasetError;
use crate::model::ModelError;
use crate::pruning::PruningError;
use crate::search::SearchError;
use crate::sensitivity::SensitivityError;

/// Any pipeline failure, tagged with the module it came from.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Dataset(#[from] DatasetError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Attribution(#[from] AttributionError),
    #[error(transparent)]
    Pruning(#[from] PruningError),
    #[error(transparent)]
    Sensitivity(#[from] SensitivityError),
    #[error(transparent)]
    Search(#[from] SearchError),
    #[error("invalid config: {0}")]
    Config(String),
    #[error("cannot access '{path}': {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub fn io(path: &std::path::Path, source: std::io::Error) -> Self {
        Error::Io {
            path: path.display().to_string(),
            source,
        }
    }

    /// Module-qualified error code, e.g. `dataset.unknown_category`.
    pub fn code(&self) -> &'static str {
        match self {
            Error::Dataset(e) => match e {
                DatasetError::Io { .. } => "dataset.io",
                DatasetError::Csv(_) => "dataset.csv",
                DatasetError::InvalidSchema(_) => "dataset.invalid_schema",
                DatasetError::MissingColumn { .. } => "dataset.missing_column",
                DatasetError::UnexpectedColumn { .. } => "dataset.unexpected_column",
                DatasetError::TypeMismatch { .. } => "dataset.type_mismatch",
                DatasetError::UnknownCategory { .. } => "dataset.unknown_category",
                DatasetError::OutOfRange { .. } => "dataset.out_of_range",
                DatasetError::EmptyDataset => "dataset.empty",
                DatasetError::InvalidSpec(_) => "dataset.invalid_spec",
                DatasetError::UnknownFeature(_) => "dataset.unknown_feature",
                DatasetError::ValueOutOfDomain { .. } => "dataset.value_out_of_domain",
            },
            Error::Model(e) => match e {
                ModelError::DimensionMismatch { .. } => "model.dimension_mismatch",
                ModelError::NonFiniteLoss { .. } => "model.non_finite_loss",
                ModelError::Invalid(_) => "model.invalid",
                ModelError::InvalidConfig(_) => "model.invalid_config",
                ModelError::Dataset(_) => "model.dataset",
                ModelError::Io { .. } => "model.io",
                ModelError::Format(_) => "model.format",
            },
            Error::Attribution(e) => match e {
                AttributionError::TooManyFeatures { .. } => "attribution.too_many_features",
                AttributionError::DimensionMismatch { .. } => "attribution.dimension_mismatch",
                AttributionError::EmptyReferenceSet => "attribution.empty_reference_set",
                AttributionError::NoPermutations => "attribution.no_permutations",
                AttributionError::RowOutOfRange { .. } => "attribution.row_out_of_range",
                AttributionError::Model(_) => "attribution.model",
            },
            Error::Pruning(e) => match e {
                PruningError::UnknownFeature(_) => "pruning.unknown_feature",
                PruningError::UnknownValue { .. } => "pruning.unknown_value",
                PruningError::InvalidThreshold(_) => "pruning.invalid_threshold",
            },
            Error::Sensitivity(e) => match e {
                SensitivityError::DegenerateVariance { .. } => "sensitivity.degenerate_variance",
                SensitivityError::TooFewSamples(_) => "sensitivity.too_few_samples",
                SensitivityError::Model(_) => "sensitivity.model",
                SensitivityError::Dataset(_) => "sensitivity.dataset",
            },
            Error::Search(e) => match e {
                SearchError::InvalidConfig(_) => "search.invalid_config",
                SearchError::EmptyDomain(_) => "search.empty_domain",
                SearchError::UnknownFeature(_) => "search.unknown_feature",
                SearchError::CapacityExceeded { .. } => "search.capacity_exceeded",
                SearchError::SpaceTooLarge { .. } => "search.space_too_large",
                SearchError::Sensitivity(_) => "search.sensitivity",
            },
            Error::Config(_) => "cli.config",
            Error::Io { .. } => "cli.io",
        }
    }

    /// Process exit status: 2 for configuration problems, 3 for IO, 4 for
    /// input data, 5 for computation failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::Search(SearchError::InvalidConfig(_)) | Error::Model(ModelError::InvalidConfig(_)) => 2,
            Error::Io { .. }
            | Error::Dataset(DatasetError::Io { .. })
            | Error::Model(ModelError::Io { .. }) => 3,
            Error::Dataset(_) | Error::Model(ModelError::Format(_)) => 4,
            _ => 5,
        }
    }
}
