//! JSON decoding with errors located by JSON pointer.

use serde::de::DeserializeOwned;
use serde_path_to_error::{Path, Segment};

use crate::error::{Error, Result};

/// Renders a deserializer path as a JSON pointer, e.g. `/ops/0/translate`.
pub fn json_pointer(path: &Path) -> String {
    let mut out = String::new();
    for seg in path.iter() {
        match seg {
            Segment::Seq { index } => out.push_str(&format!("/{index}")),
            Segment::Map { key } => {
                out.push('/');
                out.push_str(&key.replace('~', "~0").replace('/', "~1"));
            }
            Segment::Enum { variant } => {
                out.push('/');
                out.push_str(variant);
            }
            Segment::Unknown => out.push_str("/?"),
        }
    }
    if out.is_empty() {
        out.push('/');
    }
    out
}

fn join_pointer(prefix: &str, rest: &str) -> String {
    match (prefix, rest) {
        ("" | "/", r) => r.to_string(),
        (p, "/") => p.to_string(),
        (p, r) => format!("{p}{r}"),
    }
}

/// Parses JSON text into `T`, locating schema errors by pointer.
pub fn from_json_str<T: DeserializeOwned>(src: &str) -> Result<T> {
    let de = &mut serde_json::Deserializer::from_str(src);
    serde_path_to_error::deserialize(de).map_err(|e| Error::Config {
        pointer: json_pointer(e.path()),
        message: e.inner().to_string(),
    })
}

/// Converts an already-parsed value, reporting pointers relative to `prefix`.
pub fn from_value<T: DeserializeOwned>(value: serde_json::Value, prefix: &str) -> Result<T> {
    serde_path_to_error::deserialize(value).map_err(|e| Error::Config {
        pointer: join_pointer(prefix, &json_pointer(e.path())),
        message: e.inner().to_string(),
    })
}
