//! Flat-file golden-value store: one `key<TAB>value<TAB>tolerance<TAB>tag`
//! line per recorded quantity, human-diffable and checked into the repo.
//! Quantities the theory bounds only up to an implied constant are measured
//! once, frozen here, and regressions are detected against the frozen value.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Tag {
    Derived,
    Paper,
    Trivial,
}

impl Tag {
    fn parse(s: &str) -> Option<Self> {
        match s {
            "derived" => Some(Tag::Derived),
            "paper" => Some(Tag::Paper),
            "trivial" => Some(Tag::Trivial),
            _ => None,
        }
    }
}

impl fmt::Display for Tag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Tag::Derived => "derived",
            Tag::Paper => "paper",
            Tag::Trivial => "trivial",
        })
    }
}

#[derive(Debug, Clone)]
pub struct GoldenEntry {
    pub value: f64,
    pub tolerance: f64,
    pub tag: Tag,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Outcome {
    Pass,
    Fail { recorded: f64, got: f64, tolerance: f64 },
    Missing,
    Recorded,
}

#[derive(Debug, Default)]
pub struct GoldenStore {
    path: Option<PathBuf>,
    entries: BTreeMap<String, GoldenEntry>,
    dirty: bool,
}

impl GoldenStore {
    pub fn load(path: &Path) -> std::io::Result<Self> {
        let mut entries = BTreeMap::new();
        if path.exists() {
            for (ln, line) in std::fs::read_to_string(path)?.lines().enumerate() {
                let line = line.trim();
                if line.is_empty() || line.starts_with('#') {
                    continue;
                }
                let parts: Vec<&str> = line.split('\t').collect();
                if parts.len() != 4 {
                    return Err(std::io::Error::new(
                        std::io::ErrorKind::InvalidData,
                        format!("{}:{}: expected 4 tab-separated fields", path.display(), ln + 1),
                    ));
                }
                let value: f64 = parts[1].parse().map_err(bad_data)?;
                let tolerance: f64 = parts[2].parse().map_err(bad_data)?;
                let tag = Tag::parse(parts[3]).ok_or_else(|| {
                    std::io::Error::new(std::io::ErrorKind::InvalidData, "bad tag")
                })?;
                entries.insert(parts[0].to_string(), GoldenEntry { value, tolerance, tag });
            }
        }
        Ok(Self { path: Some(path.to_path_buf()), entries, dirty: false })
    }

    pub fn get(&self, key: &str) -> Option<&GoldenEntry> {
        self.entries.get(key)
    }

    /// Compare a measured value against the stored one. In record mode a
    /// missing key is inserted (never silently overwritten); a present key
    /// is still checked.
    pub fn check(&mut self, key: &str, value: f64, tolerance: f64, tag: Tag, record: bool) -> Outcome {
        match self.entries.get(key) {
            Some(entry) => {
                if (entry.value - value).abs() <= entry.tolerance {
                    Outcome::Pass
                } else {
                    Outcome::Fail { recorded: entry.value, got: value, tolerance: entry.tolerance }
                }
            }
            None if record => {
                self.entries.insert(key.to_string(), GoldenEntry { value, tolerance, tag });
                self.dirty = true;
                Outcome::Recorded
            }
            None => Outcome::Missing,
        }
    }

    pub fn save(&mut self) -> std::io::Result<()> {
        if !self.dirty {
            return Ok(());
        }
        let path = self
            .path
            .clone()
            .ok_or_else(|| std::io::Error::new(std::io::ErrorKind::NotFound, "no path"))?;
        let mut out = String::from("# golden values: key<TAB>value<TAB>tolerance<TAB>tag\n");
        for (k, e) in &self.entries {
            out.push_str(&format!("{k}\t{}\t{}\t{}\n", e.value, e.tolerance, e.tag));
        }
        std::fs::write(&path, out)?;
        self.dirty = false;
        Ok(())
    }
}

fn bad_data<E: std::fmt::Display>(e: E) -> std::io::Error {
    std::io::Error::new(std::io::ErrorKind::InvalidData, e.to_string())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip_and_semantics() {
        let dir = std::env::temp_dir().join(format!("golden_test_{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("golden.txt");
        let _ = std::fs::remove_file(&path);

        let mut store = GoldenStore::load(&path).unwrap();
        assert_eq!(store.check("a.b", 1.5, 1e-9, Tag::Derived, false), Outcome::Missing);
        assert_eq!(store.check("a.b", 1.5, 1e-9, Tag::Derived, true), Outcome::Recorded);
        store.save().unwrap();

        let mut store = GoldenStore::load(&path).unwrap();
        assert_eq!(store.check("a.b", 1.5 + 1e-10, 1e-9, Tag::Derived, false), Outcome::Pass);
        match store.check("a.b", 1.6, 1e-9, Tag::Derived, true) {
            Outcome::Fail { recorded, .. } => assert_eq!(recorded, 1.5),
            other => panic!("expected Fail, got {other:?}"),
        }
        // record never overwrites silently
        let reloaded = GoldenStore::load(&path).unwrap();
        assert_eq!(reloaded.get("a.b").unwrap().value, 1.5);
        std::fs::remove_file(&path).unwrap();
    }
}
