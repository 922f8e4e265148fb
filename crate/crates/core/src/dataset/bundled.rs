//! The four benchmark datasets shipped with the crate.
//!
//! Breast cancer, iris and diabetes are the UCI files. Iris is stored with the
//! classes interleaved (setosa, versicolor, virginica, setosa, ...) so that the
//! positional 75/75 split sees every class. The season table is a small
//! reconstruction: its labels follow the tree/temperature rules with spring as
//! the remainder, it is not an original published file.

use super::{load_dataset, Dataset, DatasetSchema};
use crate::error::{Error, Result};

struct Bundle {
    name: &'static str,
    schema: &'static str,
    data: &'static str,
}

const BUNDLES: &[Bundle] = &[
    Bundle {
        name: "breast-cancer",
        schema: include_str!("../../data/breast-cancer.schema.toml"),
        data: include_str!("../../data/breast-cancer-wisconsin.data"),
    },
    Bundle {
        name: "iris",
        schema: include_str!("../../data/iris.schema.toml"),
        data: include_str!("../../data/iris.data"),
    },
    Bundle {
        name: "diabetes",
        schema: include_str!("../../data/diabetes.schema.toml"),
        data: include_str!("../../data/pima-indians-diabetes.data"),
    },
    Bundle {
        name: "season",
        schema: include_str!("../../data/season.schema.toml"),
        data: include_str!("../../data/season.data"),
    },
];

pub fn bundled_names() -> Vec<&'static str> {
    BUNDLES.iter().map(|b| b.name).collect()
}

fn find(name: &str) -> Result<&'static Bundle> {
    BUNDLES
        .iter()
        .find(|b| b.name == name)
        .ok_or_else(|| Error::Config(format!("unknown bundled dataset {name:?}")))
}

pub fn bundled_schema(name: &str) -> Result<DatasetSchema> {
    DatasetSchema::from_toml(find(name)?.schema)
}

/// Loads a bundled dataset by name, raw (not yet normalized).
pub fn bundled(name: &str) -> Result<Dataset> {
    let bundle = find(name)?;
    load_dataset(bundle.data, &bundled_schema(name)?)
}
