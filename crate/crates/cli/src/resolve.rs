//! Curve lookup by label: local cache first, then (online only) one HTTP GET
//! against the curve database.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::{Duration, SystemTime, UNIX_EPOCH};

use galprod_core::curves::CurveJson;
use galprod_core::CurveModel;
use num_bigint::BigUint;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{io_err, CliError, CliResult};

pub const DEFAULT_BASE_URL: &str = "https://www.lmfdb.org";

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Online,
    Offline,
}

#[derive(Clone, Debug)]
pub enum CurveSpec {
    Inline(CurveModel),
    Label(String),
}

/// One cached label, stored as `<cache_dir>/<label>`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CacheEntry {
    pub label: String,
    pub payload: CurveModel,
    /// Seconds since the Unix epoch.
    pub fetched_at: u64,
}

/// Where uncached labels come from.
pub trait CurveSource {
    /// Raw response body for `label`; `Ok(None)` when the source has no
    /// such curve.
    fn fetch(&self, label: &str) -> CliResult<Option<String>>;
}

pub struct LmfdbClient {
    base_url: String,
    agent: ureq::Agent,
}

impl LmfdbClient {
    pub fn new(base_url: &str) -> Self {
        let agent = ureq::Agent::config_builder()
            .timeout_global(Some(Duration::from_secs(30)))
            .http_status_as_error(false)
            .build()
            .into();
        LmfdbClient {
            base_url: base_url.trim_end_matches('/').to_string(),
            agent,
        }
    }

    pub fn url_for(&self, label: &str) -> String {
        format!("{}/api/ec_curvedata/?lmfdb_label={label}&_format=json", self.base_url)
    }
}

impl CurveSource for LmfdbClient {
    fn fetch(&self, label: &str) -> CliResult<Option<String>> {
        let url = self.url_for(label);
        let mut resp = self
            .agent
            .get(&url)
            .call()
            .map_err(|e| CliError::Network(format!("{url}: {e}")))?;
        let status = resp.status().as_u16();
        if status == 404 {
            return Ok(None);
        }
        if !(200..300).contains(&status) {
            return Err(CliError::Network(format!("{url}: HTTP {status}")));
        }
        let body = resp
            .body_mut()
            .read_to_string()
            .map_err(|e| CliError::Network(format!("{url}: {e}")))?;
        Ok(Some(body))
    }
}

/// Labels become file names, so only a conservative alphabet is accepted.
pub fn check_label(label: &str) -> CliResult<()> {
    let ok = !label.is_empty()
        && !label.starts_with('.')
        && label.len() <= 64
        && label.chars().all(|c| c.is_ascii_alphanumeric() || matches!(c, '.' | '-' | '_'));
    if ok {
        Ok(())
    } else {
        Err(galprod_core::Error::InvalidInput(format!("bad curve label {label:?}")).into())
    }
}

/// Parse a database response of the form `{"data": [{"ainvs": [...],
/// "conductor": N, ...}]}`. An empty `data` list means the label is unknown.
pub fn parse_remote(label: &str, body: &str) -> CliResult<CurveModel> {
    let v: Value = serde_json::from_str(body).map_err(|e| CliError::Schema(format!("{label}: {e}")))?;
    let data = v
        .get("data")
        .and_then(Value::as_array)
        .ok_or_else(|| CliError::Schema(format!("{label}: no data array")))?;
    let Some(rec) = data.first() else {
        return Err(CliError::NotFound(label.to_string()));
    };
    let ainvs = rec
        .get("ainvs")
        .and_then(Value::as_array)
        .ok_or_else(|| CliError::Schema(format!("{label}: missing ainvs")))?;
    let conductor = rec
        .get("conductor")
        .filter(|c| !c.is_null())
        .ok_or_else(|| CliError::Schema(format!("{label}: missing conductor")))?;
    let doc = serde_json::json!({"label": label, "ainvs": ainvs, "conductor": conductor});
    let json: CurveJson =
        serde_json::from_value(doc).map_err(|e| CliError::Schema(format!("{label}: {e}")))?;
    Ok(CurveModel::try_from(json)?)
}

pub fn cache_path(cache_dir: &Path, label: &str) -> PathBuf {
    cache_dir.join(label)
}

pub fn read_cache(cache_dir: &Path, label: &str) -> CliResult<Option<CacheEntry>> {
    let path = cache_path(cache_dir, label);
    let text = match fs::read_to_string(&path) {
        Ok(t) => t,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(None),
        Err(e) => return Err(io_err(&path, e)),
    };
    let entry: CacheEntry = serde_json::from_str(&text).map_err(|e| CliError::Json {
        what: path.display().to_string(),
        message: e.to_string(),
    })?;
    if entry.label != label {
        return Err(CliError::Schema(format!("{} holds label {}", path.display(), entry.label)));
    }
    Ok(Some(entry))
}

fn write_cache(cache_dir: &Path, entry: &CacheEntry) -> CliResult<()> {
    fs::create_dir_all(cache_dir).map_err(|e| io_err(cache_dir, e))?;
    let path = cache_path(cache_dir, &entry.label);
    let tmp = cache_dir.join(format!(".{}.tmp", entry.label));
    let text = serde_json::to_string_pretty(entry).expect("serializable") + "\n";
    fs::write(&tmp, text).map_err(|e| io_err(&tmp, e))?;
    fs::rename(&tmp, &path).map_err(|e| io_err(&path, e))
}

/// Cache entry for `label`, fetching it when allowed. `refresh` skips the
/// cache lookup (online only).
pub fn resolve_label(
    label: &str,
    mode: Mode,
    cache_dir: &Path,
    source: &dyn CurveSource,
    refresh: bool,
) -> CliResult<CacheEntry> {
    check_label(label)?;
    if !(refresh && mode == Mode::Online) {
        if let Some(entry) = read_cache(cache_dir, label)? {
            return Ok(entry);
        }
    }
    if mode == Mode::Offline {
        return Err(CliError::CacheMiss(label.to_string()));
    }
    let body = source.fetch(label)?.ok_or_else(|| CliError::NotFound(label.to_string()))?;
    let payload = parse_remote(label, &body)?;
    let fetched_at = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    let entry = CacheEntry {
        label: label.to_string(),
        payload,
        fetched_at,
    };
    write_cache(cache_dir, &entry)?;
    Ok(entry)
}

pub fn resolve_curve(spec: CurveSpec, mode: Mode, cache_dir: &Path, source: &dyn CurveSource) -> CliResult<CurveModel> {
    match spec {
        CurveSpec::Inline(e) => Ok(e),
        CurveSpec::Label(label) => {
            let e = resolve_label(&label, mode, cache_dir, source, false)?.payload;
            if e.conductor().is_none() {
                return Err(CliError::Schema(format!("{label}: cached curve has no conductor")));
            }
            Ok(e)
        }
    }
}

/// A curve given on the command line: inline JSON when it starts with `{`,
/// otherwise a path to a JSON file.
pub fn parse_curve_arg(arg: &str) -> CliResult<CurveModel> {
    let (what, text) = if arg.trim_start().starts_with('{') {
        ("inline curve".to_string(), arg.to_string())
    } else {
        let path = Path::new(arg);
        (arg.to_string(), fs::read_to_string(path).map_err(|e| io_err(path, e))?)
    };
    let json: CurveJson = serde_json::from_str(&text).map_err(|e| CliError::Json {
        what,
        message: e.to_string(),
    })?;
    Ok(CurveModel::try_from(json)?)
}

/// Conductor parsing shared by the bound subcommands.
pub fn parse_biguint(s: &str) -> CliResult<BigUint> {
    s.trim()
        .parse()
        .map_err(|_| galprod_core::Error::InvalidInput(format!("not a nonnegative integer: {s:?}")).into())
}
