//! `key = value` text documents: blender config files and bundle manifests.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::types::BlenderConfig;

/// Ordered `key = value` document. Blank lines and `#` comments are ignored
/// on input; keys are written back in sorted order.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct KeyValues {
    entries: BTreeMap<String, String>,
}

impl KeyValues {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (n, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((k, v)) = line.split_once('=') else {
                return Err(Error::invalid(format!(
                    "line {}: expected `key = value`, got '{line}'",
                    n + 1
                )));
            };
            entries.insert(k.trim().to_string(), v.trim().to_string());
        }
        Ok(Self { entries })
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text).map_err(|e| e.context(path.display().to_string()))
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_text()).map_err(|e| Error::io(path, e))
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for (k, v) in &self.entries {
            let _ = writeln!(s, "{k} = {v}");
        }
        s
    }

    pub fn set(&mut self, key: impl Into<String>, value: impl ToString) {
        self.entries.insert(key.into(), value.to_string());
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }

    pub fn require(&self, key: &str) -> Result<&str> {
        self.get(key)
            .ok_or_else(|| Error::invalid(format!("missing key '{key}'")))
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &str)> {
        self.entries.iter().map(|(k, v)| (k.as_str(), v.as_str()))
    }
}

fn parse_field<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::invalid(format!("bad value '{value}' for '{key}'")))
}

fn parse_radius(key: &str, value: &str) -> Result<Option<usize>> {
    if value == "auto" {
        Ok(None)
    } else {
        parse_field(key, value).map(Some)
    }
}

impl BlenderConfig {
    /// Overrides fields named in `kv`. Unknown keys are rejected.
    pub fn apply(&mut self, kv: &KeyValues) -> Result<()> {
        for (key, value) in kv.iter() {
            match key {
                "tau" => self.tau = parse_field(key, value)?,
                "epsilon" => self.epsilon = parse_field(key, value)?,
                "dilate_target" => self.dilate_target = parse_radius(key, value)?,
                "dilate_union" => self.dilate_union = parse_radius(key, value)?,
                "feather" => self.feather = parse_field(key, value)?,
                "fallback" => self.fallback = value.parse()?,
                "pyramid_levels" => self.pyramid_levels = parse_field(key, value)?,
                "patch_radius" => self.patch_radius = parse_field(key, value)?,
                other => return Err(Error::invalid(format!("unknown config key '{other}'"))),
            }
        }
        self.validate()
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let mut cfg = Self::default();
        cfg.apply(&KeyValues::read(path.as_ref())?)
            .map_err(|e| e.context(path.as_ref().display().to_string()))?;
        Ok(cfg)
    }

    /// All fields as a document [`BlenderConfig::apply`] accepts.
    pub fn to_key_values(&self) -> KeyValues {
        let radius = |r: Option<usize>| r.map_or("auto".to_string(), |r| r.to_string());
        let mut kv = KeyValues::new();
        kv.set("tau", self.tau);
        kv.set("epsilon", self.epsilon);
        kv.set("dilate_target", radius(self.dilate_target));
        kv.set("dilate_union", radius(self.dilate_union));
        kv.set("feather", self.feather);
        kv.set("fallback", self.fallback);
        kv.set("pyramid_levels", self.pyramid_levels);
        kv.set("patch_radius", self.patch_radius);
        kv
    }
}

/// Hex SHA-256 of a file's bytes.
pub fn file_digest(path: impl AsRef<Path>) -> Result<String> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    let digest = Sha256::digest(&bytes);
    Ok(digest.iter().map(|b| format!("{b:02x}")).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::FallbackPolicy;

    #[test]
    fn parse_and_apply() {
        let kv = KeyValues::parse("# comment\ntau = 0.5\n\nfallback = skip\ndilate_union=4\n").unwrap();
        let mut cfg = BlenderConfig::default();
        cfg.apply(&kv).unwrap();
        assert_eq!(cfg.tau, 0.5);
        assert_eq!(cfg.fallback, FallbackPolicy::Skip);
        assert_eq!(cfg.dilate_union, Some(4));
        assert_eq!(cfg.dilate_target, None);
    }

    #[test]
    fn config_round_trips_through_text() {
        let cfg = BlenderConfig {
            tau: 0.125,
            dilate_target: Some(3),
            ..BlenderConfig::default()
        };
        let text = cfg.to_key_values().to_text();
        let mut back = BlenderConfig::default();
        back.apply(&KeyValues::parse(&text).unwrap()).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn rejects_bad_documents() {
        assert!(KeyValues::parse("no equals sign").is_err());
        let mut cfg = BlenderConfig::default();
        assert!(cfg.apply(&KeyValues::parse("speed = 3").unwrap()).is_err());
        assert!(cfg.apply(&KeyValues::parse("tau = -1").unwrap()).is_err());
        assert!(cfg.apply(&KeyValues::parse("fallback = maybe").unwrap()).is_err());
    }
}
