//! Deterministic byte-cost model used to compare structure footprints.

use std::str::FromStr;

use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MemoryModelError {
    #[error("line {line}: expected key=value")]
    Malformed { line: usize },
    #[error("line {line}: unknown key `{key}`")]
    UnknownKey { line: usize, key: String },
    #[error("line {line}: `{value}` is not a non-negative integer")]
    BadValue { line: usize, value: String },
}

/// Unit costs in bytes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MemoryModel {
    pub bytes_per_node_base: u64,
    pub bytes_per_link: u64,
    pub bytes_per_int: u64,
    pub set_base: u64,
    pub set_per_entry: u64,
    pub map_base: u64,
    pub map_per_entry: u64,
    pub bitmap64_bytes: u64,
}

impl Default for MemoryModel {
    fn default() -> Self {
        MemoryModel {
            bytes_per_node_base: 16,
            bytes_per_link: 8,
            bytes_per_int: 8,
            set_base: 64,
            set_per_entry: 8,
            map_base: 64,
            map_per_entry: 16,
            bitmap64_bytes: 8,
        }
    }
}

impl MemoryModel {
    /// A record with the given number of pointer, integer and bitmap fields.
    pub fn node(&self, links: u64, ints: u64, bitmaps: u64) -> u64 {
        self.bytes_per_node_base
            + links * self.bytes_per_link
            + ints * self.bytes_per_int
            + bitmaps * self.bitmap64_bytes
    }

    pub fn set(&self, entries: usize) -> u64 {
        self.set_base + entries as u64 * self.set_per_entry
    }

    pub fn map(&self, entries: usize) -> u64 {
        self.map_base + entries as u64 * self.map_per_entry
    }

    /// Parse `key=value` lines over the defaults. `#` starts a comment.
    pub fn parse_overrides(text: &str) -> Result<Self, MemoryModelError> {
        let mut m = MemoryModel::default();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let body = raw.split('#').next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            let (k, v) = body
                .split_once('=')
                .ok_or(MemoryModelError::Malformed { line })?;
            let (k, v) = (k.trim(), v.trim());
            let value = u64::from_str(v).map_err(|_| MemoryModelError::BadValue {
                line,
                value: v.to_string(),
            })?;
            let slot = match k {
                "bytes_per_node_base" => &mut m.bytes_per_node_base,
                "bytes_per_link" => &mut m.bytes_per_link,
                "bytes_per_int" => &mut m.bytes_per_int,
                "set_base" => &mut m.set_base,
                "set_per_entry" => &mut m.set_per_entry,
                "map_base" => &mut m.map_base,
                "map_per_entry" => &mut m.map_per_entry,
                "bitmap64_bytes" => &mut m.bitmap64_bytes,
                _ => {
                    return Err(MemoryModelError::UnknownKey {
                        line,
                        key: k.to_string(),
                    })
                }
            };
            *slot = value;
        }
        Ok(m)
    }
}
