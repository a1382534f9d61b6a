//! Configurations compiled into the binary, addressed as `preset:NAME`.

const PRESETS: &[(&str, &str)] = &[
    ("blowup-probe", include_str!("../presets/blowup-probe.toml")),
    ("burgers-kdv", include_str!("../presets/burgers-kdv.toml")),
    ("carleman", include_str!("../presets/carleman.toml")),
    ("decay-sweep", include_str!("../presets/decay-sweep.toml")),
    ("indefinite", include_str!("../presets/indefinite.toml")),
    ("linear-mode", include_str!("../presets/linear-mode.toml")),
    ("localized", include_str!("../presets/localized.toml")),
    ("picard", include_str!("../presets/picard.toml")),
    ("zero-ic", include_str!("../presets/zero-ic.toml")),
];

pub fn get(name: &str) -> Option<&'static str> {
    PRESETS.iter().find(|(n, _)| *n == name).map(|(_, text)| *text)
}

pub fn names() -> Vec<&'static str> {
    PRESETS.iter().map(|(n, _)| *n).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::Config;

    #[test]
    fn every_preset_parses() {
        for name in names() {
            let cfg = Config::load(&format!("preset:{name}")).unwrap();
            cfg.sim_config(None).unwrap_or_else(|e| panic!("{name}: {e}"));
        }
        assert!(Config::load("preset:nope").is_err());
    }
}
