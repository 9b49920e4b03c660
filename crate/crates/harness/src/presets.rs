//! Preset study configurations shipped with the binary; `simulate` accepts
//! `preset:<name>` in place of a config path.

pub struct Preset {
    pub name: &'static str,
    pub description: &'static str,
    pub toml: &'static str,
}

macro_rules! preset {
    ($name:literal, $desc:literal) => {
        Preset {
            name: $name,
            description: $desc,
            toml: include_str!(concat!("../../../presets/", $name, ".toml")),
        }
    };
}

pub const PRESETS: &[Preset] = &[
    preset!(
        "table_ick2_clayton",
        "interval comparison, Clayton truth (rank correlation 0.50)"
    ),
    preset!(
        "table_ick2_frank",
        "interval comparison, Frank truth (rank correlation 0.50)"
    ),
    preset!(
        "table_ick2_gumbel",
        "interval comparison, Gumbel truth (rank correlation 0.683)"
    ),
    preset!(
        "table_ick2_gaussian",
        "interval comparison, Gaussian truth (rank correlation 0.80, negative plug-in variance)"
    ),
    preset!(
        "table_np_param_clayton",
        "mis-specification grid, Clayton truth vs assumed parametric models"
    ),
    preset!(
        "table_np_param_frank",
        "mis-specification grid, Frank truth vs assumed parametric models"
    ),
    preset!(
        "table_np_param_gumbel",
        "mis-specification grid, Gumbel truth vs assumed parametric models"
    ),
    preset!(
        "taildep_clayton",
        "bivariate tail indices, Clayton truth (lower index 0.525)"
    ),
    preset!(
        "taildep_frank",
        "bivariate tail indices, Frank truth (both zero)"
    ),
    preset!(
        "taildep_gumbel",
        "bivariate tail indices, Gumbel truth (upper index 2 - 2^(1/theta))"
    ),
    preset!(
        "multirho_clayton_d2",
        "multivariate rank correlations at d = 2, Clayton truth"
    ),
    preset!(
        "multirho_clayton_d6",
        "multivariate rank correlations at d = 6, Clayton truth (0.514 / 0.346)"
    ),
    preset!(
        "multirho_clayton_d10",
        "multivariate rank correlations at d = 10, Clayton truth"
    ),
    preset!(
        "multi_taildep_clayton_d6",
        "multivariate tail indices at d = 6, Clayton truth (lower index 6^(-1/theta))"
    ),
    preset!(
        "multi_taildep_gumbel_d6",
        "multivariate tail indices at d = 6, Gumbel truth (upper index 0.395)"
    ),
    preset!(
        "analyze_returns",
        "real-data template: rank correlations and tail indices on a CSV"
    ),
];

pub fn find(name: &str) -> Option<&'static Preset> {
    PRESETS.iter().find(|p| p.name == name)
}
