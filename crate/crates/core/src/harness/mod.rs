//! Named experiments: config parsing, dispatch to the numerical modules and
//! CSV emission.

mod config;
mod experiments;
mod output;

pub use crate::numerics::fit::{fit_exponent, FitResult};
pub use config::{
    load_config, parse_config, ExperimentConfig, ExperimentKind, ModelSpec, Parameters, PointSpec, ProfileSpec,
};
pub use experiments::run_experiment;
pub use output::{num, ExperimentOutput, Table};

use crate::error::{Error, Result};

/// Configs shipped with the crate, one per reference experiment.
pub const SHIPPED: &[(&str, &str)] = &[
    ("growth-sphere-zonal", include_str!("../../configs/growth-sphere-zonal.toml")),
    ("growth-sor-quasimode", include_str!("../../configs/growth-sor-quasimode.toml")),
    ("maslov-sphere", include_str!("../../configs/maslov-sphere.toml")),
    ("stationary-phase-sphere", include_str!("../../configs/stationary-phase-sphere.toml")),
    ("normalization-sphere", include_str!("../../configs/normalization-sphere.toml")),
    ("returnmap-ellipsoid-umbilic", include_str!("../../configs/returnmap-ellipsoid-umbilic.toml")),
    ("recurrence-ellipsoid-umbilic", include_str!("../../configs/recurrence-ellipsoid-umbilic.toml")),
    ("projector-torus", include_str!("../../configs/projector-torus.toml")),
    ("projector-sphere", include_str!("../../configs/projector-sphere.toml")),
    ("lemma2-torus", include_str!("../../configs/lemma2-torus.toml")),
    ("smoothed-sum-torus", include_str!("../../configs/smoothed-sum-torus.toml")),
    ("conservation-sphere", include_str!("../../configs/conservation-sphere.toml")),
    ("conservation-torus", include_str!("../../configs/conservation-torus.toml")),
    ("conservation-sor", include_str!("../../configs/conservation-sor.toml")),
    ("conservation-ellipsoid", include_str!("../../configs/conservation-ellipsoid.toml")),
    ("quasimode-sphere-residual", include_str!("../../configs/quasimode-sphere-residual.toml")),
    ("classify-sor-bump", include_str!("../../configs/classify-sor-bump.toml")),
    ("flow-ellipsoid", include_str!("../../configs/flow-ellipsoid.toml")),
];

/// Parsed shipped config by name.
pub fn shipped_config(name: &str) -> Result<ExperimentConfig> {
    let text = SHIPPED
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, t)| *t)
        .ok_or_else(|| Error::config("name", format!("no shipped experiment named `{name}`")))?;
    parse_config(text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shipped_configs_parse_and_match_their_names() {
        for (name, _) in SHIPPED {
            let cfg = shipped_config(name).unwrap_or_else(|e| panic!("{name}: {e}"));
            assert_eq!(&cfg.name, name);
            cfg.model.build().unwrap();
        }
    }
}
