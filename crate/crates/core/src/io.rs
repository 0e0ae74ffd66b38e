//! JSON file formats and atomic output.
//!
//! Instance files look like
//! `{"format": 1, "k": 2, "m": 3, "entries": [[1, 1, 1], ["2", "3", "7/2"]], "points": [0, "1/2"]}`;
//! rationals may be JSON integers or `"p/q"` strings and are always written
//! as strings. `points` is optional for array-only inputs. Colorings are
//! `{"format": 1, "colors": {"<point>": color}}`.

use std::io::Write;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::model::{ModelError, PointSet, RestrictionArray};
use crate::rational::Rational;

pub const FORMAT_VERSION: u64 = 1;

#[derive(Debug, thiserror::Error)]
pub enum InputError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}: at `{field}`, line {line}, column {column}: {message}")]
    Schema {
        path: PathBuf,
        field: String,
        line: usize,
        column: usize,
        message: String,
    },
    #[error("{path}: unsupported format version {found}, expected {FORMAT_VERSION}")]
    Version { path: PathBuf, found: u64 },
}

/// An instance: a restriction array plus an optional point set.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawInstance", into = "RawInstance")]
pub struct InstanceFile {
    pub array: RestrictionArray,
    pub points: Option<PointSet>,
}

#[derive(Serialize, Deserialize)]
struct RawInstance {
    k: usize,
    m: usize,
    entries: Vec<Vec<Rational>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    points: Option<Vec<Rational>>,
}

impl TryFrom<RawInstance> for InstanceFile {
    type Error = ModelError;
    fn try_from(raw: RawInstance) -> Result<Self, ModelError> {
        if raw.entries.len() != raw.k {
            return Err(ModelError::RowCount {
                declared: raw.k,
                actual: raw.entries.len(),
            });
        }
        Ok(InstanceFile {
            array: RestrictionArray::with_columns(raw.m, raw.entries)?,
            points: raw.points.map(PointSet::new).transpose()?,
        })
    }
}

impl From<InstanceFile> for RawInstance {
    fn from(f: InstanceFile) -> Self {
        RawInstance {
            k: f.array.k(),
            m: f.array.m(),
            entries: f.array.rows().to_vec(),
            points: f.points.map(Vec::from),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PointsFile {
    pub points: PointSet,
}

#[derive(Deserialize)]
struct Header {
    format: Option<u64>,
}

/// Parses `text` as `T`, reporting the offending field and position.
pub fn parse_json<T: DeserializeOwned>(text: &str, path: &Path) -> Result<T, InputError> {
    let schema_err = |field: String, e: &serde_json::Error| InputError::Schema {
        path: path.to_path_buf(),
        field,
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    };
    if let Ok(Header {
        format: Some(found),
    }) = serde_json::from_str::<Header>(text)
    {
        if found != FORMAT_VERSION {
            return Err(InputError::Version {
                path: path.to_path_buf(),
                found,
            });
        }
    }
    let mut de = serde_json::Deserializer::from_str(text);
    let value: T = serde_path_to_error::deserialize(&mut de).map_err(|e| {
        let field = e.path().to_string();
        schema_err(field, e.inner())
    })?;
    de.end().map_err(|e| schema_err(".".into(), &e))?;
    Ok(value)
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, InputError> {
    let text = std::fs::read_to_string(path).map_err(|source| InputError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_json(&text, path)
}

pub fn read_instance(path: &Path) -> Result<InstanceFile, InputError> {
    read_json(path)
}

pub fn read_array(path: &Path) -> Result<RestrictionArray, InputError> {
    read_json::<InstanceFile>(path).map(|f| f.array)
}

/// A points file: either `{"points": [...]}` or any instance carrying points.
pub fn read_points(path: &Path) -> Result<PointSet, InputError> {
    read_json::<PointsFile>(path).map(|f| f.points)
}

/// Serializes `value` with a top-level `"format"` field. Object keys come out
/// sorted, so equal values give byte-identical text.
pub fn to_versioned_json<T: Serialize>(value: &T) -> serde_json::Value {
    let mut json = serde_json::to_value(value).expect("serializable");
    if let serde_json::Value::Object(map) = &mut json {
        map.insert("format".into(), FORMAT_VERSION.into());
    }
    json
}

pub fn to_versioned_string<T: Serialize>(value: &T) -> String {
    let mut text = serde_json::to_string_pretty(&to_versioned_json(value)).expect("serializable");
    text.push('\n');
    text
}

/// Writes via a temporary file in the same directory, then renames.
pub fn write_atomic(path: &Path, contents: &[u8]) -> std::io::Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(contents)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Coloring;
    use crate::rational::q;

    #[test]
    fn instance_roundtrip() {
        let text =
            r#"{"format": 1, "k": 1, "m": 2, "entries": [[1, "1/2"]], "points": [0, "3/2"]}"#;
        let inst: InstanceFile = parse_json(text, Path::new("x.json")).unwrap();
        assert_eq!(inst.array.entry(0, 1), &q(1, 2));
        assert_eq!(inst.points.as_ref().unwrap().len(), 2);
        let back: InstanceFile = parse_json(&to_versioned_string(&inst), Path::new("y")).unwrap();
        assert_eq!(back, inst);
    }

    #[test]
    fn schema_errors_name_the_field() {
        let text = "{\"k\": 1, \"m\": 2,\n \"entries\": [[1, \"x\"]]}";
        match parse_json::<InstanceFile>(text, Path::new("bad.json")) {
            Err(InputError::Schema { field, line, .. }) => {
                assert!(field.contains("entries"), "{field}");
                assert_eq!(line, 2);
            }
            other => panic!("unexpected {other:?}"),
        }
        let err = parse_json::<InstanceFile>(r#"{"k":1,"m":1,"entries":[[0]]}"#, Path::new("z"))
            .unwrap_err();
        assert!(err.to_string().contains("positive"), "{err}");
    }

    #[test]
    fn version_is_checked() {
        let err =
            parse_json::<PointsFile>(r#"{"format": 2, "points": []}"#, Path::new("v")).unwrap_err();
        assert!(matches!(err, InputError::Version { found: 2, .. }));
    }

    #[test]
    fn coloring_shape() {
        let s = PointSet::new(vec![q(1, 2), q(0, 1)]).unwrap();
        let t = Coloring::from_parts(&s, &[1, 2]);
        let json = serde_json::to_string(&to_versioned_json(&t)).unwrap();
        assert_eq!(json, r#"{"colors":{"0":1,"1/2":2},"format":1}"#);
        let back: Coloring = parse_json(&json, Path::new("c")).unwrap();
        assert_eq!(back, t);
    }

    #[test]
    fn atomic_write_replaces() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("out.json");
        write_atomic(&path, b"one").unwrap();
        write_atomic(&path, b"two").unwrap();
        assert_eq!(std::fs::read_to_string(&path).unwrap(), "two");
    }
}
