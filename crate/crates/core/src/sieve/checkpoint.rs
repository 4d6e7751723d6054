//! Resumable sieve state on disk.
//!
//! Layout: a plain-text header (magic, version, segment span, precision),
//! then fixed-framing binary records. Each record stores a segment boundary
//! `base` with the exact prime count below it, plus an optional theta
//! enclosure as decimal endpoint strings so a resumed run loses no rigor.

use std::io::Read as _;
use std::path::Path;

use crate::error::{Error, Result};

const MAGIC: &str = "rpci-checkpoint";
const VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CheckpointRecord {
    /// next segment base; all primes < base are accounted for
    pub base: u64,
    /// π(base − 1)
    pub cum_pi: u64,
    /// θ(base − 1) enclosure endpoints, when the run tracked theta
    pub theta: Option<(String, String)>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Checkpoint {
    pub span: u64,
    pub prec: u32,
    pub records: Vec<CheckpointRecord>,
}

impl Checkpoint {
    pub fn new(span: u64, prec: u32) -> Self {
        Self {
            span,
            prec,
            records: Vec::new(),
        }
    }

    /// Latest record usable to resume a pass whose first sieved query is
    /// at or above `first_needed`.
    pub fn best_resume(&self, first_needed: u64) -> Option<(u64, u64)> {
        self.records
            .iter()
            .filter(|r| r.base <= first_needed.saturating_add(1))
            .max_by_key(|r| r.base)
            .map(|r| (r.base, r.cum_pi))
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let mut buf = Vec::new();
        buf.extend_from_slice(
            format!(
                "{MAGIC}\nversion {VERSION}\nspan {}\nprec {}\nrecords {}\n",
                self.span,
                self.prec,
                self.records.len()
            )
            .as_bytes(),
        );
        for r in &self.records {
            buf.extend_from_slice(&r.base.to_le_bytes());
            buf.extend_from_slice(&r.cum_pi.to_le_bytes());
            let (lo, hi) = r.theta.clone().unwrap_or_default();
            buf.extend_from_slice(&(lo.len() as u32).to_le_bytes());
            buf.extend_from_slice(lo.as_bytes());
            buf.extend_from_slice(&(hi.len() as u32).to_le_bytes());
            buf.extend_from_slice(hi.as_bytes());
        }
        let tmp = path.with_extension("tmp");
        std::fs::write(&tmp, &buf).map_err(|e| Error::Format(format!("checkpoint write: {e}")))?;
        std::fs::rename(&tmp, path).map_err(|e| Error::Format(format!("checkpoint write: {e}")))
    }

    pub fn read(path: &Path) -> Result<Self> {
        let data =
            std::fs::read(path).map_err(|e| Error::Format(format!("checkpoint read: {e}")))?;
        // header is the first five newline-terminated lines
        let mut offset = 0usize;
        let mut lines = Vec::with_capacity(5);
        for _ in 0..5 {
            let rest = &data[offset..];
            let nl = rest
                .iter()
                .position(|&b| b == b'\n')
                .ok_or_else(|| Error::Format("checkpoint: truncated header".into()))?;
            lines.push(
                std::str::from_utf8(&rest[..nl])
                    .map_err(|_| Error::Format("checkpoint: header is not utf-8".into()))?,
            );
            offset += nl + 1;
        }
        if lines[0] != MAGIC {
            return Err(Error::Format("checkpoint: bad magic".into()));
        }
        let field = |line: &str, key: &str| -> Result<u64> {
            line.strip_prefix(key)
                .and_then(|s| s.trim().parse().ok())
                .ok_or_else(|| Error::Format(format!("checkpoint: bad header line {line:?}")))
        };
        let version = field(lines[1], "version")?;
        if version != u64::from(VERSION) {
            return Err(Error::Format(format!(
                "checkpoint: unsupported version {version}"
            )));
        }
        let span = field(lines[2], "span")?;
        let prec = field(lines[3], "prec")? as u32;
        let count = field(lines[4], "records")? as usize;

        let mut cursor = std::io::Cursor::new(&data[offset..]);
        let mut records = Vec::with_capacity(count);
        let read_u64 = |c: &mut std::io::Cursor<&[u8]>| -> Result<u64> {
            let mut b = [0u8; 8];
            c.read_exact(&mut b)
                .map_err(|_| Error::Format("checkpoint: truncated record".into()))?;
            Ok(u64::from_le_bytes(b))
        };
        let read_str = |c: &mut std::io::Cursor<&[u8]>| -> Result<String> {
            let mut b = [0u8; 4];
            c.read_exact(&mut b)
                .map_err(|_| Error::Format("checkpoint: truncated record".into()))?;
            let mut s = vec![0u8; u32::from_le_bytes(b) as usize];
            c.read_exact(&mut s)
                .map_err(|_| Error::Format("checkpoint: truncated record".into()))?;
            String::from_utf8(s).map_err(|_| Error::Format("checkpoint: non-utf8 string".into()))
        };
        for _ in 0..count {
            let base = read_u64(&mut cursor)?;
            let cum_pi = read_u64(&mut cursor)?;
            let lo = read_str(&mut cursor)?;
            let hi = read_str(&mut cursor)?;
            let theta = if lo.is_empty() && hi.is_empty() {
                None
            } else {
                Some((lo, hi))
            };
            records.push(CheckpointRecord {
                base,
                cum_pi,
                theta,
            });
        }
        Ok(Self {
            span,
            prec,
            records,
        })
    }
}
