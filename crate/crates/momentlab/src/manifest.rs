//! Run manifests and result-file plumbing for the CLI.
//!
//! Every command appends one manifest line to `manifests.jsonl` in the
//! output directory and stamps its result files with the manifest id, so
//! any result can be traced back to the exact invocation, seeds, budgets,
//! and zero-data provenance that produced it. Manifest ids are content
//! hashes of the invocation record (wall time excluded), so re-running the
//! same command yields the same id and byte-identical result files.

use crate::{Error, Result};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ZeroProvenance {
    pub q: u64,
    pub conrey: u64,
    pub t_cert: f64,
    pub provenance: String,
    /// FNV-1a hash of the cache TSV bytes, if the list was cached
    pub content_hash: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub id: String,
    pub command: String,
    pub args: Vec<String>,
    pub seed: Option<u64>,
    pub tolerances: BTreeMap<String, f64>,
    pub budgets: BTreeMap<String, f64>,
    pub zero_data: Vec<ZeroProvenance>,
    pub version: String,
    pub wall_ms: u64,
}

/// FNV-1a, 64 bit, hex encoded. Used for manifest ids and cache
/// invalidation of zeros TSV files.
pub fn fnv1a(bytes: &[u8]) -> String {
    let mut h: u64 = 0xcbf29ce484222325;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x100000001b3);
    }
    format!("{h:016x}")
}

pub fn hash_file(path: &Path) -> Result<String> {
    let bytes = std::fs::read(path)?;
    Ok(fnv1a(&bytes))
}

impl RunManifest {
    pub fn new(command: &str, args: &[String]) -> Self {
        RunManifest {
            id: String::new(),
            command: command.to_string(),
            args: args.to_vec(),
            seed: None,
            tolerances: BTreeMap::new(),
            budgets: BTreeMap::new(),
            zero_data: Vec::new(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            wall_ms: 0,
        }
    }

    /// Content id over everything except wall time.
    pub fn finalize(&mut self) {
        let mut clone = self.clone();
        clone.id = String::new();
        clone.wall_ms = 0;
        self.id = fnv1a(serde_json::to_string(&clone).expect("manifest serializes").as_bytes());
    }

    /// Append to `manifests.jsonl` under `out_dir`; creates the directory.
    pub fn append(&self, out_dir: &Path) -> Result<PathBuf> {
        if self.id.is_empty() {
            return Err(Error::Validation("manifest must be finalized before append".into()));
        }
        std::fs::create_dir_all(out_dir)?;
        let path = out_dir.join("manifests.jsonl");
        let mut f = std::fs::OpenOptions::new().create(true).append(true).open(&path)?;
        writeln!(f, "{}", serde_json::to_string(self)?)?;
        Ok(path)
    }
}

/// Write a JSON result file carrying its manifest id, with a stable field
/// order (struct order plus the trailing manifest reference).
pub fn write_result_json<T: Serialize>(
    out_dir: &Path,
    name: &str,
    manifest_id: &str,
    payload: &T,
) -> Result<PathBuf> {
    std::fs::create_dir_all(out_dir)?;
    let mut value = serde_json::to_value(payload)?;
    match value.as_object_mut() {
        Some(map) => {
            map.insert("manifest".into(), serde_json::Value::String(manifest_id.into()));
        }
        None => {
            let mut map = serde_json::Map::new();
            map.insert("data".into(), value);
            map.insert("manifest".into(), serde_json::Value::String(manifest_id.into()));
            value = serde_json::Value::Object(map);
        }
    }
    let path = out_dir.join(name);
    std::fs::write(&path, format!("{}\n", serde_json::to_string_pretty(&value)?))?;
    Ok(path)
}

/// Structural validation against the shipped schema subset: `type`,
/// `required`, `properties`, `items`. Enough to pin the emitted shapes
/// without pulling in a full validator.
pub fn validate_schema(value: &serde_json::Value, schema: &serde_json::Value) -> Result<()> {
    fn fail(path: &str, msg: &str) -> Error {
        Error::Validation(format!("schema violation at {path}: {msg}"))
    }
    fn walk(value: &serde_json::Value, schema: &serde_json::Value, path: &str) -> Result<()> {
        use serde_json::Value::*;
        if let Some(ty) = schema.get("type").and_then(|t| t.as_str()) {
            let ok = match ty {
                "object" => value.is_object(),
                "array" => value.is_array(),
                "string" => value.is_string(),
                "number" => value.is_number(),
                "integer" => value.is_i64() || value.is_u64(),
                "boolean" => value.is_boolean(),
                "null" => value.is_null(),
                other => return Err(fail(path, &format!("unknown schema type {other}"))),
            };
            if !ok {
                return Err(fail(path, &format!("expected {ty}, got {value}")));
            }
        }
        if let (Object(map), Some(req)) = (value, schema.get("required").and_then(|r| r.as_array()))
        {
            for key in req {
                let key = key.as_str().ok_or_else(|| fail(path, "bad required entry"))?;
                if !map.contains_key(key) {
                    return Err(fail(path, &format!("missing required field {key}")));
                }
            }
        }
        if let (Object(map), Some(props)) =
            (value, schema.get("properties").and_then(|p| p.as_object()))
        {
            for (key, sub) in props {
                if let Some(v) = map.get(key) {
                    walk(v, sub, &format!("{path}/{key}"))?;
                }
            }
        }
        if let (Array(items), Some(sub)) = (value, schema.get("items")) {
            for (i, v) in items.iter().enumerate() {
                walk(v, sub, &format!("{path}[{i}]"))?;
            }
        }
        Ok(())
    }
    walk(value, schema, "$")
}

/// Shipped schemas, embedded so the binary can validate without the
/// repository checkout.
pub fn schema_for(command: &str) -> Option<&'static str> {
    match command {
        "chars" => Some(include_str!("../../../schemas/chars.schema.json")),
        "zeros" => Some(include_str!("../../../schemas/zeros.schema.json")),
        "psi" => Some(include_str!("../../../schemas/psi.schema.json")),
        "moments" => Some(include_str!("../../../schemas/moments.schema.json")),
        "vmoment" => Some(include_str!("../../../schemas/vmoment.schema.json")),
        "combin" => Some(include_str!("../../../schemas/combin.schema.json")),
        "model" => Some(include_str!("../../../schemas/model.schema.json")),
        "omega-search" => Some(include_str!("../../../schemas/omega.schema.json")),
        "histogram" => Some(include_str!("../../../schemas/histogram.schema.json")),
        "manifest" => Some(include_str!("../../../schemas/manifest.schema.json")),
        _ => None,
    }
}

/// TOML config for budgets and tolerances; any flag value overrides the
/// config entry of the same name.
#[derive(Debug, Clone, Default, Deserialize)]
pub struct Config {
    pub budget: Option<f64>,
    pub tol: Option<f64>,
    pub cache_dir: Option<String>,
    pub out_dir: Option<String>,
    pub zero_height: Option<f64>,
    pub grid: Option<f64>,
}

pub fn load_config(path: &Path) -> Result<Config> {
    let text = std::fs::read_to_string(path)?;
    toml::from_str(&text).map_err(|e| Error::Validation(format!("bad config: {e}")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn fnv_known_values() {
        // standard FNV-1a test vectors
        assert_eq!(fnv1a(b""), "cbf29ce484222325");
        assert_eq!(fnv1a(b"a"), "af63dc4c8601ec8c");
        assert_eq!(fnv1a(b"foobar"), "85944171f73967e8");
    }

    #[test]
    fn manifest_id_stable_under_wall_time() {
        let mut m1 = RunManifest::new("chars", &["--q".into(), "12".into()]);
        m1.wall_ms = 5;
        m1.finalize();
        let mut m2 = RunManifest::new("chars", &["--q".into(), "12".into()]);
        m2.wall_ms = 900;
        m2.finalize();
        assert_eq!(m1.id, m2.id);
        let mut m3 = RunManifest::new("chars", &["--q".into(), "13".into()]);
        m3.finalize();
        assert_ne!(m1.id, m3.id);
    }

    #[test]
    fn manifest_appends() {
        let dir = tempfile::tempdir().unwrap();
        let mut m = RunManifest::new("combin", &[]);
        m.finalize();
        m.append(dir.path()).unwrap();
        m.append(dir.path()).unwrap();
        let text = std::fs::read_to_string(dir.path().join("manifests.jsonl")).unwrap();
        assert_eq!(text.lines().count(), 2);
        let parsed: RunManifest = serde_json::from_str(text.lines().next().unwrap()).unwrap();
        assert_eq!(parsed.command, "combin");
    }

    #[test]
    fn schema_subset_validates() {
        let schema = json!({
            "type": "object",
            "required": ["q", "list"],
            "properties": {
                "q": {"type": "integer"},
                "list": {"type": "array", "items": {"type": "number"}}
            }
        });
        validate_schema(&json!({"q": 5, "list": [1.0, 2.5]}), &schema).unwrap();
        assert!(validate_schema(&json!({"q": 5}), &schema).is_err());
        assert!(validate_schema(&json!({"q": "5", "list": []}), &schema).is_err());
        assert!(validate_schema(&json!({"q": 5, "list": ["x"]}), &schema).is_err());
    }

    #[test]
    fn shipped_schemas_parse() {
        for cmd in [
            "chars", "zeros", "psi", "moments", "vmoment", "combin", "model",
            "omega-search", "histogram", "manifest",
        ] {
            let text = schema_for(cmd).expect("schema shipped");
            let v: serde_json::Value = serde_json::from_str(text).unwrap();
            assert!(v.get("type").is_some(), "{cmd} schema lacks type");
        }
    }

    #[test]
    fn result_json_carries_manifest() {
        let dir = tempfile::tempdir().unwrap();
        let path =
            write_result_json(dir.path(), "r.json", "deadbeef", &json!({"v": 1})).unwrap();
        let v: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
        assert_eq!(v["manifest"], "deadbeef");
        assert_eq!(v["v"], 1);
    }

    #[test]
    fn config_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.toml");
        std::fs::write(&path, "budget = 1e6\ntol = 1e-9\ncache_dir = \"zc\"\n").unwrap();
        let c = load_config(&path).unwrap();
        assert_eq!(c.budget, Some(1e6));
        assert_eq!(c.tol, Some(1e-9));
        assert_eq!(c.cache_dir.as_deref(), Some("zc"));
        assert!(c.grid.is_none());
    }
}
