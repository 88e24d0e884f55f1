//! Checkpoint container.
//!
//! A UTF-8 header of `key = value` lines followed by the raw parameters:
//!
//! ```text
//! a2rl-checkpoint 1
//! action-table = 5c3e...      FNV-1a hash of the action table
//! scorer = target-iou         the run configuration, one key per line
//! ...
//! tensor encoder.weight 64 18 one line per tensor: name, rows, columns
//! ...
//! payload-bytes = 123456
//! payload-fnv1a = 9a0f...
//! end
//! <tensors in header order, row-major little-endian f64>
//! ```
//!
//! Encoding is a pure function of the configuration and parameters, so equal
//! runs produce byte-identical files.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use a2rl_core::env::action_table_hash;
use a2rl_core::net::PolicyParams;

use crate::config::RunConfig;
use crate::{fsio, CliError};

pub const MAGIC: &str = "a2rl-checkpoint";
pub const VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub config: RunConfig,
    pub params: PolicyParams,
}

fn fnv1a(bytes: &[u8]) -> u64 {
    let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        hash ^= b as u64;
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    hash
}

pub fn encode(config: &RunConfig, params: &PolicyParams) -> Vec<u8> {
    let payload: Vec<u8> = params.as_slice().iter().flat_map(|v| v.to_le_bytes()).collect();
    let mut header = format!("{MAGIC} {VERSION}\naction-table = {:016x}\n", action_table_hash());
    for (key, value) in config.pairs() {
        let _ = writeln!(header, "{key} = {value}");
    }
    for t in params.tensors() {
        let _ = writeln!(header, "tensor {} {} {}", t.name, t.shape[0], t.shape[1]);
    }
    let _ = writeln!(header, "payload-bytes = {}", payload.len());
    let _ = writeln!(header, "payload-fnv1a = {:016x}", fnv1a(&payload));
    header.push_str("end\n");
    let mut out = header.into_bytes();
    out.extend(payload);
    out
}

/// Decodes a checkpoint. Damaged or truncated files are input errors;
/// files from an incompatible build or configuration are mismatches.
pub fn decode(bytes: &[u8]) -> Result<Checkpoint, CliError> {
    let bad = |msg: String| CliError::Input(format!("unreadable checkpoint: {msg}"));
    let end = bytes
        .windows(5)
        .position(|w| w == b"\nend\n")
        .ok_or_else(|| bad("header terminator not found".into()))?;
    let header = std::str::from_utf8(&bytes[..end]).map_err(|_| bad("header is not UTF-8".into()))?;
    let payload = &bytes[end + 5..];
    let mut lines = header.lines();
    let first = lines.next().unwrap_or_default();
    let version = first
        .strip_prefix(MAGIC)
        .map(str::trim)
        .ok_or_else(|| bad("not an a2rl checkpoint".into()))?;
    if version != VERSION.to_string() {
        return Err(CliError::Mismatch(format!("format version {version}, this build reads {VERSION}")));
    }

    let mut config = RunConfig::default();
    let mut tensors = Vec::new();
    let (mut hash, mut payload_len, mut checksum) = (None, None, None);
    for line in lines {
        if let Some(rest) = line.strip_prefix("tensor ") {
            let parts: Vec<&str> = rest.split(' ').collect();
            match parts.as_slice() {
                [name, rows, cols] => {
                    let dim = |s: &str| s.parse::<usize>().map_err(|_| bad(format!("bad tensor line {line:?}")));
                    tensors.push((name.to_string(), [dim(rows)?, dim(cols)?]));
                }
                _ => return Err(bad(format!("bad tensor line {line:?}"))),
            }
            continue;
        }
        let (key, value) = line.split_once(" = ").ok_or_else(|| bad(format!("bad header line {line:?}")))?;
        match key {
            "action-table" => hash = Some(value.to_string()),
            "payload-bytes" => payload_len = Some(value.parse::<usize>().map_err(|_| bad("bad payload size".into()))?),
            "payload-fnv1a" => checksum = Some(value.to_string()),
            _ => config.set(key, value).map_err(CliError::Mismatch)?,
        }
    }

    let expected_hash = format!("{:016x}", action_table_hash());
    match hash {
        Some(h) if h == expected_hash => {}
        Some(h) => {
            return Err(CliError::Mismatch(format!("action table hash {h} differs from this build's {expected_hash}")))
        }
        None => return Err(bad("missing action-table hash".into())),
    }
    let payload_len = payload_len.ok_or_else(|| bad("missing payload size".into()))?;
    if payload.len() != payload_len {
        return Err(bad(format!("payload has {} bytes, header promises {payload_len}", payload.len())));
    }
    if checksum.as_deref() != Some(format!("{:016x}", fnv1a(payload)).as_str()) {
        return Err(bad("payload checksum mismatch".into()));
    }

    let params = PolicyParams::zeros(config.net).map_err(|e| CliError::Mismatch(e.to_string()))?;
    let layout: Vec<(String, [usize; 2])> = params.tensors().iter().map(|t| (t.name.to_string(), t.shape)).collect();
    if layout != tensors {
        return Err(CliError::Mismatch(format!(
            "tensor layout {} does not match the network configuration {}",
            describe(&tensors),
            describe(&layout)
        )));
    }
    if payload_len != params.len() * 8 {
        return Err(bad("payload size does not match the tensor shapes".into()));
    }
    let data = payload.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk"))).collect();
    let params = PolicyParams::from_vec(config.net, data).map_err(|e| bad(e.to_string()))?;
    Ok(Checkpoint { config, params })
}

fn describe(tensors: &[(String, [usize; 2])]) -> String {
    let parts: Vec<String> = tensors.iter().map(|(n, s)| format!("{n}[{}x{}]", s[0], s[1])).collect();
    parts.join(",")
}

pub fn save(path: &Path, config: &RunConfig, params: &PolicyParams) -> Result<(), CliError> {
    fsio::write_output(path, &encode(config, params))
}

pub fn load(path: &Path) -> Result<Checkpoint, CliError> {
    let bytes = fs::read(path).map_err(|e| CliError::Input(format!("cannot read checkpoint {}: {e}", path.display())))?;
    decode(&bytes)
}
