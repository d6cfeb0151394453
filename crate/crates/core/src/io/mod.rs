//! On-disk formats: MBFA activation dumps, feature CSV and versioned JSON.

pub mod features;
pub mod json;
pub mod mbfa;

pub use features::{read_features, read_features_file, write_features, write_features_file};
pub use json::{load_json, save_json, SCHEMA_VERSION};
pub use mbfa::{decode_mbfa, encode_mbfa, read_mbfa_file, write_mbfa_file, MbfaError};
