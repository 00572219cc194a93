//! TOML run configuration. Every key is optional; command-line flags take
//! precedence over the file, the file over built-in defaults.

use std::path::{Path, PathBuf};

use anyhow::Context;
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub address: Option<String>,
    pub kappa: Option<[f64; 2]>,
    pub t_lo: Option<f64>,
    pub t_hi: Option<f64>,
    pub samples: Option<usize>,
    pub eps: Option<f64>,
    /// `[cx, cy, width, height, px_w, px_h]`.
    pub grid: Option<[f64; 6]>,
    pub budget: Option<usize>,
    pub kmax: Option<usize>,
    pub out: Option<PathBuf>,
    /// Overlay rays, `"ADDRESS;T_LO;T_HI;SAMPLES"`.
    pub rays: Option<Vec<String>>,
}

impl RunConfig {
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> anyhow::Result<Self> {
        Ok(toml::from_str(text)?)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let c = RunConfig {
            address: Some("p:1|0".into()),
            kappa: Some([0.25, -1.5]),
            grid: Some([0.0, 0.0, 4.0, 3.0, 40.0, 30.0]),
            rays: Some(vec!["p:|0;1;4;10".into()]),
            budget: Some(200),
            ..RunConfig::default()
        };
        assert_eq!(RunConfig::parse(&c.to_toml()).unwrap(), c);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(RunConfig::parse("adress = \"p:|0\"").is_err());
        assert!(RunConfig::parse("address = \"p:|0\"\nbudget = 10").is_ok());
    }
}
