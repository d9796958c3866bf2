use std::fmt;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde_json::Value;
use tgdist::Error;

/// A failed run, classified by exit code.
#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Data(String),
    Numeric(String),
}

impl Failure {
    pub fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 2,
            Failure::Data(_) => 3,
            Failure::Numeric(_) => 4,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Usage(m) => write!(f, "usage: {m}"),
            Failure::Data(m) | Failure::Numeric(m) => f.write_str(m),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let msg = e.to_string();
        match e {
            Error::InvalidArgument(_) | Error::Dimension(_) | Error::MaterializeCap { .. } => Failure::Usage(msg),
            Error::Numeric(_) => Failure::Numeric(msg),
            _ => Failure::Data(msg),
        }
    }
}

/// Overlays the JSON object in `path` (if any) on `base` and deserializes the
/// result. Nested objects merge key by key.
pub fn merge_config_file<T: DeserializeOwned>(mut base: Value, path: Option<&Path>) -> Result<T, Failure> {
    if let Some(path) = path {
        let text = std::fs::read_to_string(path).map_err(|e| Failure::Data(format!("{}: {e}", path.display())))?;
        let over: Value =
            serde_json::from_str(&text).map_err(|e| Failure::Data(format!("{}: {e}", path.display())))?;
        if !over.is_object() {
            return Err(Failure::Usage(format!("{}: config must be a JSON object", path.display())));
        }
        merge(&mut base, over);
    }
    serde_json::from_value(base).map_err(|e| Failure::Usage(format!("invalid configuration: {e}")))
}

fn merge(base: &mut Value, over: Value) {
    match (base, over) {
        (Value::Object(b), Value::Object(o)) => {
            for (k, v) in o {
                match b.get_mut(&k) {
                    Some(slot) if slot.is_object() && v.is_object() => merge(slot, v),
                    _ => {
                        b.insert(k, v);
                    }
                }
            }
        }
        (b, o) => *b = o,
    }
}
