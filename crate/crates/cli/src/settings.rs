//! Line-oriented `key = value` config files.
//!
//! Plain keys mirror a command's long flags (`seed = 3`). Dotted keys
//! (`dqn.total_steps = 20000`, `fitness.mdp.gamma = 0.9`) override fields of
//! the library config structs by name. A dedicated flag beats `--set`, which
//! beats the file, which beats the built-in default.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use anyhow::{anyhow, bail, Context, Result};
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::Value;

#[derive(Debug, Clone, Default)]
pub struct Settings {
    values: BTreeMap<String, String>,
}

pub fn parse_lines(text: &str) -> Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| anyhow!("line {}: expected key = value, got {raw:?}", i + 1))?;
        let key = k.trim().replace('-', "_");
        if key.is_empty() {
            bail!("line {}: empty key", i + 1);
        }
        out.insert(key, v.trim().to_owned());
    }
    Ok(out)
}

impl Settings {
    pub fn load(file: Option<&Path>, sets: &[String]) -> Result<Self> {
        let mut values = match file {
            Some(p) => {
                let text = fs::read_to_string(p).with_context(|| format!("reading config file {}", p.display()))?;
                parse_lines(&text).with_context(|| format!("in config file {}", p.display()))?
            }
            None => BTreeMap::new(),
        };
        values.extend(parse_lines(&sets.join("\n")).context("in --set")?);
        Ok(Self { values })
    }

    /// Rejects keys that are neither a known plain key nor under a known section.
    pub fn check_keys(&self, plain: &[&str], sections: &[&str]) -> Result<()> {
        for key in self.values.keys() {
            let ok = match key.split_once('.') {
                Some((section, _)) => sections.contains(&section),
                None => plain.contains(&key.as_str()),
            };
            if !ok {
                bail!(
                    "unknown config key {key:?} (keys: {}; sections: {})",
                    plain.join(", "),
                    sections.join(", ")
                );
            }
        }
        Ok(())
    }

    pub fn optional<T: FromStr>(&self, flag: Option<T>, key: &str) -> Result<Option<T>>
    where
        T::Err: std::fmt::Display,
    {
        if flag.is_some() {
            return Ok(flag);
        }
        match self.values.get(key) {
            Some(v) => v
                .parse()
                .map(Some)
                .map_err(|e| anyhow!("config key {key}: cannot parse {v:?}: {e}")),
            None => Ok(None),
        }
    }

    pub fn value<T: FromStr>(&self, flag: Option<T>, key: &str, default: T) -> Result<T>
    where
        T::Err: std::fmt::Display,
    {
        Ok(self.optional(flag, key)?.unwrap_or(default))
    }

    /// Applies every `section.field[.field…] = value` entry to `base`.
    pub fn apply<C: Serialize + DeserializeOwned>(&self, section: &str, base: C) -> Result<C> {
        let mut json = serde_json::to_value(base)?;
        let prefix = format!("{section}.");
        for (key, raw) in &self.values {
            let Some(path) = key.strip_prefix(&prefix) else { continue };
            let mut slot = &mut json;
            for part in path.split('.') {
                slot = slot
                    .as_object_mut()
                    .and_then(|o| o.get_mut(part))
                    .ok_or_else(|| anyhow!("config key {key}: no field {part:?}"))?;
            }
            *slot = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.clone()));
        }
        serde_json::from_value(json).with_context(|| format!("applying {section}.* overrides"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use dynsleuth_core::trainers::DqnConfig;

    #[test]
    fn comments_blank_lines_and_dashes() {
        let v = parse_lines("# top\n\nseed = 4  # trailing\ntrain-seeds=8\n").unwrap();
        assert_eq!(v["seed"], "4");
        assert_eq!(v["train_seeds"], "8");
        assert!(parse_lines("no equals sign").is_err());
    }

    #[test]
    fn flag_beats_set_beats_file_beats_default() {
        let dir = tempfile::tempdir().unwrap();
        let f = dir.path().join("c.cfg");
        fs::write(&f, "seed = 1\ncount = 5\n").unwrap();
        let s = Settings::load(Some(&f), &["count=6".into()]).unwrap();
        assert_eq!(s.value(Some(9u64), "seed", 0).unwrap(), 9);
        assert_eq!(s.value(None::<u64>, "seed", 0).unwrap(), 1);
        assert_eq!(s.value(None::<u64>, "count", 0).unwrap(), 6);
        assert_eq!(s.value(None::<u64>, "density", 7).unwrap(), 7);
    }

    #[test]
    fn dotted_keys_override_struct_fields() {
        let s = Settings::load(None, &["dqn.total_steps = 123".into(), "dqn.lr=0.5".into()]).unwrap();
        let cfg = s.apply("dqn", DqnConfig::default()).unwrap();
        assert_eq!(cfg.total_steps, 123);
        assert_eq!(cfg.lr, 0.5);
        let bad = Settings::load(None, &["dqn.nope = 1".into()]).unwrap();
        assert!(bad.apply("dqn", DqnConfig::default()).is_err());
        assert!(bad.check_keys(&["seed"], &["pg"]).is_err());
        assert!(bad.check_keys(&[], &["dqn"]).is_ok());
    }
}
