//! JSONL manifests. Every output line carries `schema_version`; input lines
//! may omit it but must not carry a different version.

use std::collections::HashSet;
use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

pub const SCHEMA_VERSION: u64 = 1;
pub const MANIFEST_FILE: &str = "manifest.jsonl";

/// Reads every non-blank line of a JSONL manifest. Any bad line fails the
/// whole read, naming its line number.
pub fn read_jsonl<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>> {
    let file = fs::File::open(path).with_context(|| format!("opening manifest {}", path.display()))?;
    let mut out = Vec::new();
    for (n, line) in BufReader::new(file).lines().enumerate() {
        let line = line.with_context(|| format!("reading {}", path.display()))?;
        if line.trim().is_empty() {
            continue;
        }
        let mut value: Value = serde_json::from_str(&line)
            .with_context(|| format!("{}:{}: invalid JSON", path.display(), n + 1))?;
        if let Some(obj) = value.as_object_mut() {
            if let Some(v) = obj.remove("schema_version") {
                if v.as_u64() != Some(SCHEMA_VERSION) {
                    bail!("{}:{}: unsupported schema_version {v}", path.display(), n + 1);
                }
            }
        }
        let record = serde_json::from_value(value)
            .with_context(|| format!("{}:{}: record does not match the expected schema", path.display(), n + 1))?;
        out.push(record);
    }
    Ok(out)
}

/// Serializes one record as a JSON object line with `schema_version` added.
pub fn to_line<T: Serialize>(record: &T) -> Result<String> {
    let mut value = serde_json::to_value(record)?;
    let obj = value.as_object_mut().context("manifest records must serialize to JSON objects")?;
    obj.insert("schema_version".into(), Value::from(SCHEMA_VERSION));
    Ok(serde_json::to_string(&value)?)
}

/// Writes the records and returns the SHA-256 of the bytes written.
pub fn write_jsonl<T: Serialize>(path: &Path, records: &[T]) -> Result<String> {
    let mut bytes = Vec::new();
    for r in records {
        bytes.extend_from_slice(to_line(r)?.as_bytes());
        bytes.push(b'\n');
    }
    let mut file = fs::File::create(path).with_context(|| format!("creating {}", path.display()))?;
    file.write_all(&bytes)?;
    file.sync_all()?;
    Ok(sha256_hex(&bytes))
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Ids end up in file names, so they are limited to `[A-Za-z0-9._-]` and
/// must be unique.
pub fn check_ids<'a>(ids: impl IntoIterator<Item = &'a str>) -> Result<()> {
    let mut seen = HashSet::new();
    for id in ids {
        if id.is_empty() || id.starts_with('.') || !id.bytes().all(|b| b.is_ascii_alphanumeric() || b"._-".contains(&b)) {
            bail!("invalid record id {id:?}: use letters, digits, '.', '_' or '-', not starting with '.'");
        }
        if !seen.insert(id) {
            bail!("duplicate record id {id:?}");
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde::Deserialize;

    #[derive(Debug, PartialEq, Serialize, Deserialize)]
    #[serde(deny_unknown_fields)]
    struct Row {
        id: String,
        n: u32,
    }

    #[test]
    fn round_trip_adds_and_strips_version() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.jsonl");
        let rows = vec![Row { id: "a".into(), n: 1 }, Row { id: "b".into(), n: 2 }];
        let digest = write_jsonl(&path, &rows).unwrap();
        let text = fs::read_to_string(&path).unwrap();
        assert!(text.lines().all(|l| l.contains("\"schema_version\":1")));
        assert_eq!(digest, sha256_hex(text.as_bytes()));
        assert_eq!(read_jsonl::<Row>(&path).unwrap(), rows);
    }

    #[test]
    fn bad_lines_name_their_position() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.jsonl");
        fs::write(&path, "{\"id\":\"a\",\"n\":1}\n\n{\"id\":\"b\"}\n").unwrap();
        let err = read_jsonl::<Row>(&path).unwrap_err();
        assert!(format!("{err:#}").contains(":3:"), "{err:#}");
        fs::write(&path, "{\"id\":\"a\",\"n\":1,\"schema_version\":2}\n").unwrap();
        assert!(read_jsonl::<Row>(&path).is_err());
    }

    #[test]
    fn id_rules() {
        check_ids(["a-1", "b_2.x"]).unwrap();
        assert!(check_ids(["a", "a"]).is_err());
        assert!(check_ids(["../x"]).is_err());
        assert!(check_ids([""]).is_err());
        assert!(check_ids([".hidden"]).is_err());
    }
}
