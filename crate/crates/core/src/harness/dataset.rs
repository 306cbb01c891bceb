//! Dataset manifests and a local cache of preprocessed edge lists.

use std::io::Read;
use std::path::{Path, PathBuf};
use std::sync::Mutex;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{load_edge_list, preprocess, write_edge_list, Graph};

/// Overrides the cache directory.
pub const CACHE_ENV: &str = "SNBP_CACHE_DIR";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetEntry {
    pub name: String,
    /// `http(s)://`, `file:` or a path relative to the manifest.
    pub url: String,
    pub expected_n: usize,
    pub expected_m: usize,
    #[serde(default)]
    pub domain: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetManifest {
    #[serde(rename = "dataset", default)]
    pub entries: Vec<DatasetEntry>,
    /// Directory relative URLs are resolved against.
    #[serde(skip)]
    pub base_dir: Option<PathBuf>,
}

impl DatasetManifest {
    pub fn from_toml(text: &str) -> Result<Self> {
        let m: DatasetManifest = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        let mut names = std::collections::HashSet::new();
        for e in &m.entries {
            if !names.insert(e.name.as_str()) {
                return Err(Error::Config(format!("duplicate dataset name '{}'", e.name)));
            }
        }
        Ok(m)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut m = Self::from_toml(&text)?;
        m.base_dir = path.parent().map(Path::to_path_buf);
        Ok(m)
    }

    pub fn get(&self, name: &str) -> Option<&DatasetEntry> {
        self.entries.iter().find(|e| e.name == name)
    }
}

#[derive(Debug, Clone)]
pub struct FetchOptions {
    pub cache_dir: PathBuf,
    /// Use cached files only; remote URLs are never contacted.
    pub offline: bool,
    pub attempts: usize,
    /// Delay before the second attempt; doubled after each failure.
    pub backoff: Duration,
    pub timeout: Duration,
}

impl Default for FetchOptions {
    fn default() -> Self {
        FetchOptions {
            cache_dir: default_cache_dir(),
            offline: false,
            attempts: 3,
            backoff: Duration::from_millis(500),
            timeout: Duration::from_secs(60),
        }
    }
}

/// `$SNBP_CACHE_DIR`, else `$XDG_CACHE_HOME/snbp`, else `~/.cache/snbp`.
pub fn default_cache_dir() -> PathBuf {
    if let Some(dir) = std::env::var_os(CACHE_ENV) {
        return PathBuf::from(dir);
    }
    if let Some(dir) = std::env::var_os("XDG_CACHE_HOME") {
        return PathBuf::from(dir).join("snbp");
    }
    match std::env::var_os("HOME") {
        Some(home) => PathBuf::from(home).join(".cache").join("snbp"),
        None => PathBuf::from(".snbp-cache"),
    }
}

/// Cache file name for a dataset; `/` and other separators become `__`.
pub fn cache_file_name(name: &str) -> String {
    let mut out = String::with_capacity(name.len() + 6);
    for c in name.chars() {
        match c {
            '/' => out.push_str("__"),
            c if c.is_ascii_alphanumeric() || c == '-' || c == '_' || c == '.' => out.push(c),
            _ => out.push('_'),
        }
    }
    out.push_str(".edges");
    out
}

const MAX_DOWNLOAD: u64 = 512 * 1024 * 1024;

/// Text of a downloaded payload: plain text, gzip, or a zip archive from
/// which the edge table (`edges.csv`, else the first `.csv`, `.txt` or
/// `.edges` member) is taken.
pub fn decode_payload(bytes: &[u8]) -> Result<String> {
    let raw = if bytes.starts_with(&[0x1f, 0x8b]) {
        let mut out = Vec::new();
        flate2::read::GzDecoder::new(bytes)
            .read_to_end(&mut out)
            .map_err(|e| Error::io("<gzip payload>", e))?;
        out
    } else if bytes.starts_with(b"PK\x03\x04") {
        zip_edge_member(bytes)?
    } else {
        bytes.to_vec()
    };
    String::from_utf8(raw).map_err(|_| Error::Parse {
        line: 0,
        message: "dataset is not valid UTF-8 text".into(),
    })
}

fn le16(b: &[u8], at: usize) -> Option<usize> {
    b.get(at..at + 2).map(|s| u16::from_le_bytes([s[0], s[1]]) as usize)
}

fn le32(b: &[u8], at: usize) -> Option<usize> {
    b.get(at..at + 4).map(|s| u32::from_le_bytes([s[0], s[1], s[2], s[3]]) as usize)
}

struct ZipMember {
    name: String,
    method: usize,
    compressed: usize,
    local_offset: usize,
}

/// Central-directory walk supporting stored and deflated members.
fn zip_edge_member(b: &[u8]) -> Result<Vec<u8>> {
    let bad = |what: &str| Error::Parse {
        line: 0,
        message: format!("malformed zip archive: {what}"),
    };
    let eocd = (0..b.len().saturating_sub(21))
        .rev()
        .find(|&i| b[i..].starts_with(b"PK\x05\x06"))
        .ok_or_else(|| bad("no end-of-directory record"))?;
    let count = le16(b, eocd + 10).ok_or_else(|| bad("truncated directory"))?;
    let mut at = le32(b, eocd + 16).ok_or_else(|| bad("truncated directory"))?;
    let mut members = Vec::with_capacity(count);
    for _ in 0..count {
        if !b.get(at..).is_some_and(|s| s.starts_with(b"PK\x01\x02")) {
            return Err(bad("directory entry signature"));
        }
        let field = |off| le16(b, at + off).ok_or_else(|| bad("truncated entry"));
        let (name_len, extra_len, comment_len) = (field(28)?, field(30)?, field(32)?);
        let name = b
            .get(at + 46..at + 46 + name_len)
            .ok_or_else(|| bad("truncated name"))?;
        members.push(ZipMember {
            name: String::from_utf8_lossy(name).into_owned(),
            method: field(10)?,
            compressed: le32(b, at + 20).ok_or_else(|| bad("truncated entry"))?,
            local_offset: le32(b, at + 42).ok_or_else(|| bad("truncated entry"))?,
        });
        at += 46 + name_len + extra_len + comment_len;
    }
    let base = |m: &ZipMember| m.name.rsplit('/').next().unwrap_or("").to_ascii_lowercase();
    let pick = members
        .iter()
        .find(|m| base(m) == "edges.csv")
        .or_else(|| {
            members.iter().find(|m| {
                let n = base(m);
                n.ends_with(".csv") || n.ends_with(".txt") || n.ends_with(".edges")
            })
        })
        .ok_or_else(|| bad("no edge table member"))?;
    let lh = pick.local_offset;
    if !b.get(lh..).is_some_and(|s| s.starts_with(b"PK\x03\x04")) {
        return Err(bad("local header signature"));
    }
    let start = lh + 30 + le16(b, lh + 26).ok_or_else(|| bad("truncated header"))? + le16(b, lh + 28).ok_or_else(|| bad("truncated header"))?;
    let data = b.get(start..start + pick.compressed).ok_or_else(|| bad("truncated member"))?;
    match pick.method {
        0 => Ok(data.to_vec()),
        8 => {
            let mut out = Vec::new();
            flate2::read::DeflateDecoder::new(data)
                .read_to_end(&mut out)
                .map_err(|e| Error::io(&pick.name, e))?;
            Ok(out)
        }
        m => Err(Error::Unsupported(format!("zip compression method {m} is not supported"))),
    }
}

static CACHE_WRITE: Mutex<()> = Mutex::new(());

enum Location {
    Remote(String),
    Local(PathBuf),
}

fn locate(entry: &DatasetEntry, base_dir: Option<&Path>) -> Location {
    let url = entry.url.trim();
    if url.starts_with("http://") || url.starts_with("https://") {
        Location::Remote(url.to_string())
    } else if let Some(rest) = url.strip_prefix("file://") {
        Location::Local(PathBuf::from(rest))
    } else if let Some(rest) = url.strip_prefix("file:") {
        Location::Local(PathBuf::from(rest))
    } else {
        let p = PathBuf::from(url);
        match base_dir {
            Some(base) if p.is_relative() => Location::Local(base.join(p)),
            _ => Location::Local(p),
        }
    }
}

fn download(url: &str, opts: &FetchOptions) -> Result<Vec<u8>> {
    let agent: ureq::Agent = ureq::Agent::config_builder()
        .timeout_global(Some(opts.timeout))
        .build()
        .into();
    let attempts = opts.attempts.max(1);
    let mut delay = opts.backoff;
    let mut last = String::new();
    for attempt in 1..=attempts {
        match agent.get(url).call() {
            Ok(mut resp) => match resp.body_mut().with_config().limit(MAX_DOWNLOAD).read_to_vec() {
                Ok(text) => return Ok(text),
                Err(e) => last = e.to_string(),
            },
            Err(e) => last = e.to_string(),
        }
        if attempt < attempts {
            std::thread::sleep(delay);
            delay *= 2;
        }
    }
    Err(Error::Fetch {
        url: url.to_string(),
        attempts,
        message: last,
    })
}

/// Rewrite comma- or tab-separated rows to whitespace-separated pairs, keeping
/// the first two columns. Header rows starting with `#` are dropped.
pub fn normalize_edge_text(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for line in text.lines() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') || line.starts_with('%') {
            continue;
        }
        let mut cols = if line.contains(',') {
            line.split(',').map(str::trim).collect::<Vec<_>>()
        } else {
            line.split_whitespace().collect()
        };
        cols.truncate(2);
        out.push_str(&cols.join(" "));
        out.push('\n');
    }
    out
}

fn check_integrity(entry: &DatasetEntry, g: &Graph) -> Result<()> {
    if g.n() != entry.expected_n || g.m() != entry.expected_m {
        return Err(Error::Integrity {
            name: entry.name.clone(),
            expected_n: entry.expected_n,
            expected_m: entry.expected_m,
            n: g.n(),
            m: g.m(),
        });
    }
    Ok(())
}

/// Load a cached or local edge list and reduce it to its largest component.
pub fn load_graph_file(path: &Path) -> Result<Graph> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let (g, _) = load_edge_list(&normalize_edge_text(&text))?;
    Ok(preprocess(&g))
}

/// Make `entry` available in the cache and return the cached file, which
/// holds the preprocessed graph. A cache hit never touches the network.
pub fn fetch_dataset(entry: &DatasetEntry, base_dir: Option<&Path>, opts: &FetchOptions) -> Result<PathBuf> {
    let target = opts.cache_dir.join(cache_file_name(&entry.name));
    if target.exists() {
        let g = load_graph_file(&target)?;
        check_integrity(entry, &g)?;
        return Ok(target);
    }
    let text = match locate(entry, base_dir) {
        Location::Remote(url) => {
            if opts.offline {
                return Err(Error::NotCached(entry.name.clone()));
            }
            decode_payload(&download(&url, opts)?)?
        }
        Location::Local(path) => decode_payload(&std::fs::read(&path).map_err(|e| Error::io(&path, e))?)?,
    };
    let (raw, _) = load_edge_list(&normalize_edge_text(&text))?;
    let g = preprocess(&raw);
    check_integrity(entry, &g)?;

    let _guard = CACHE_WRITE.lock().unwrap_or_else(|e| e.into_inner());
    std::fs::create_dir_all(&opts.cache_dir).map_err(|e| Error::io(&opts.cache_dir, e))?;
    let tmp = target.with_extension("edges.partial");
    std::fs::write(&tmp, write_edge_list(&g)).map_err(|e| Error::io(&tmp, e))?;
    std::fs::rename(&tmp, &target).map_err(|e| Error::io(&target, e))?;
    Ok(target)
}

/// Fetch (or hit the cache) and load the preprocessed graph.
pub fn load_dataset(entry: &DatasetEntry, base_dir: Option<&Path>, opts: &FetchOptions) -> Result<Graph> {
    load_graph_file(&fetch_dataset(entry, base_dir, opts)?)
}
