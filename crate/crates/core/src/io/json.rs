//! Self-describing JSON documents: `{"schema_version", "kind", "body"}`.
//! A document with a newer major schema version than this build is
//! refused before its body is parsed.

use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{json, Value};

use crate::error::{Error, Result};

pub const SCHEMA_VERSION: &str = "1.0";

fn major(version: &str) -> Option<u64> {
    version.split('.').next()?.parse().ok()
}

pub fn save_json<T: Serialize>(kind: &str, body: &T) -> Result<String> {
    let body = serde_json::to_value(body).map_err(|e| Error::InvalidParameter(format!("serialize {kind}: {e}")))?;
    let doc = json!({ "schema_version": SCHEMA_VERSION, "kind": kind, "body": body });
    let mut s = serde_json::to_string_pretty(&doc).expect("values always serialize");
    s.push('\n');
    Ok(s)
}

pub fn load_json<T: DeserializeOwned>(kind: &str, text: &str) -> Result<T> {
    let doc: Value = serde_json::from_str(text).map_err(|e| Error::InvalidParameter(format!("{kind} file is not JSON: {e}")))?;
    let version = doc
        .get("schema_version")
        .and_then(Value::as_str)
        .ok_or_else(|| Error::InvalidParameter(format!("{kind} file lacks schema_version")))?;
    let found = major(version).ok_or_else(|| Error::InvalidParameter(format!("malformed schema_version `{version}`")))?;
    let supported = major(SCHEMA_VERSION).expect("constant parses");
    if found > supported {
        return Err(Error::InvalidParameter(format!(
            "{kind} file has schema version {version}; this build reads major version {supported} or older"
        )));
    }
    match doc.get("kind").and_then(Value::as_str) {
        Some(k) if k == kind => {}
        other => return Err(Error::InvalidParameter(format!("expected a {kind} file, found kind {other:?}"))),
    }
    let body = doc.get("body").cloned().ok_or_else(|| Error::InvalidParameter(format!("{kind} file lacks body")))?;
    serde_json::from_value(body).map_err(|e| Error::InvalidParameter(format!("malformed {kind} body: {e}")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn versions_are_checked() {
        let text = save_json("thing", &vec![1, 2, 3]).unwrap();
        assert_eq!(load_json::<Vec<i32>>("thing", &text).unwrap(), vec![1, 2, 3]);
        assert!(load_json::<Vec<i32>>("other", &text).is_err());
        let newer = text.replace("\"1.0\"", "\"2.0\"");
        let err = load_json::<Vec<i32>>("thing", &newer).unwrap_err();
        assert!(err.to_string().contains("schema version 2.0"));
        let minor = text.replace("\"1.0\"", "\"1.7\"");
        assert!(load_json::<Vec<i32>>("thing", &minor).is_ok());
        assert!(load_json::<Vec<i32>>("thing", "{}").is_err());
    }
}
