use std::fs::{self, File};
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use super::{shortest, ActuationBundle, IoMode, IoStrategy};
use crate::binio::{put_f64s, put_u16, put_u32, Reader};
use crate::env::StepRecord;
use crate::error::{Error, Result};

pub const BUNDLE_MAGIC: &[u8; 4] = b"AFCB";
pub const ACTION_MAGIC: &[u8; 4] = b"AFCA";
const STEP_VERSION: u16 = 1;

const PROBES_FILE: &str = "probes.txt";
const COEFFS_FILE: &str = "coeffs.csv";
const FIELD_FILE: &str = "field.dat";
const STEP_FILE: &str = "step.bin";
const ACTION_TXT: &str = "action.txt";
const ACTION_BIN: &str = "action.bin";
const COEFFS_HEADER: &str = "t,cd,cl";
const FIELD_HEADER: &str = "# afc field dump v1 jet_velocity=";

/// `<root>/<episode>/env_<id>/act_<k>`
pub fn bundle_dir(root: &Path, episode: usize, env: usize, actuation: usize) -> PathBuf {
    root.join(episode.to_string())
        .join(format!("env_{env}"))
        .join(format!("act_{actuation}"))
}

/// Episode and actuation indices recovered from a layout path.
pub(crate) fn indices_from_path(dir: &Path) -> Result<(usize, usize)> {
    fn name(p: Option<&Path>) -> Option<&str> {
        p.and_then(Path::file_name).and_then(|s| s.to_str())
    }
    let act = name(Some(dir))
        .and_then(|s| s.strip_prefix("act_"))
        .and_then(|s| s.parse().ok());
    let env_ok = name(dir.parent()).is_some_and(|s| s.starts_with("env_"));
    let episode = name(dir.parent().and_then(Path::parent)).and_then(|s| s.parse().ok());
    match (act, env_ok, episode) {
        (Some(a), true, Some(e)) => Ok((e, a)),
        _ => Err(Error::Contract(format!(
            "{} does not follow the <episode>/env_<id>/act_<k> layout",
            dir.display()
        ))),
    }
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<u64> {
    let mut f = File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(bytes).map_err(|e| Error::io(path, e))?;
    Ok(bytes.len() as u64)
}

fn write_zero_padded(path: &Path, head: &[u8], total: u64) -> Result<u64> {
    let mut f = File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(head).map_err(|e| Error::io(path, e))?;
    let zeros = [0u8; 64 * 1024];
    let mut left = total - head.len() as u64;
    while left > 0 {
        let n = left.min(zeros.len() as u64) as usize;
        f.write_all(&zeros[..n]).map_err(|e| Error::io(path, e))?;
        left -= n as u64;
    }
    Ok(total)
}

fn probes_text(probes: &[f64]) -> String {
    let mut s = String::with_capacity(probes.len() * 24);
    for p in probes {
        s.push_str(&shortest(*p));
        s.push('\n');
    }
    s
}

fn coeffs_text(rows: &[StepRecord]) -> String {
    let mut s = String::with_capacity(rows.len() * 64 + 8);
    s.push_str(COEFFS_HEADER);
    s.push('\n');
    for r in rows {
        s.push_str(&format!("{},{},{}\n", shortest(r.t), shortest(r.cd), shortest(r.cl)));
    }
    s
}

/// The unpadded `step.bin` content.
pub(crate) fn encode_step(bundle: &ActuationBundle) -> Vec<u8> {
    let mut out = Vec::with_capacity(24 + bundle.probes.len() * 8 + bundle.rows.len() * 24);
    out.extend_from_slice(BUNDLE_MAGIC);
    put_u16(&mut out, STEP_VERSION);
    put_u16(&mut out, 0);
    put_u32(&mut out, bundle.probes.len() as u32);
    put_f64s(&mut out, &bundle.probes);
    put_u32(&mut out, bundle.rows.len() as u32);
    for r in &bundle.rows {
        put_f64s(&mut out, &[r.t, r.cd, r.cl]);
    }
    put_f64s(&mut out, &[bundle.jet_velocity]);
    out
}

/// Writes one bundle under `strategy` and returns the exact number of bytes put on disk.
pub fn write_bundle(dir: &Path, bundle: &ActuationBundle, strategy: &IoStrategy) -> Result<u64> {
    match strategy.mode {
        IoMode::Disabled => Ok(0),
        IoMode::Optimized => {
            let content = encode_step(bundle);
            let total = strategy.optimized_payload_bytes;
            if (content.len() as u64) > total {
                return Err(Error::config(
                    "optimized_payload_bytes",
                    format!("{total} is smaller than the {}-byte step record", content.len()),
                ));
            }
            write_zero_padded(&dir.join(STEP_FILE), &content, total)
        }
        IoMode::Baseline => {
            let probes = probes_text(&bundle.probes);
            let coeffs = coeffs_text(&bundle.rows);
            let header = format!("{FIELD_HEADER}{}\n", shortest(bundle.jet_velocity));
            let content = (probes.len() + coeffs.len() + header.len()) as u64;
            let total = strategy.baseline_payload_bytes;
            if content > total {
                return Err(Error::config(
                    "baseline_payload_bytes",
                    format!("{total} is smaller than the {content}-byte text bundle"),
                ));
            }
            let mut written = write_file(&dir.join(PROBES_FILE), probes.as_bytes())?;
            written += write_file(&dir.join(COEFFS_FILE), coeffs.as_bytes())?;
            written += write_zero_padded(
                &dir.join(FIELD_FILE),
                header.as_bytes(),
                total - probes.len() as u64 - coeffs.len() as u64,
            )?;
            Ok(written)
        }
    }
}

fn read_all(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).map_err(|e| Error::io(path, e))
}

fn parse_f64(text: &str, path: &Path, offset: usize) -> Result<f64> {
    text.trim()
        .parse()
        .map_err(|_| Error::format(path, offset as u64, format!("`{text}` is not a number")))
}

fn read_text(path: &Path) -> Result<String> {
    let bytes = read_all(path)?;
    String::from_utf8(bytes).map_err(|e| Error::format(path, e.utf8_error().valid_up_to() as u64, "invalid UTF-8"))
}

/// Reads a bundle back; indices come from the `<episode>/env_<id>/act_<k>` layout of `dir`.
pub fn read_bundle(dir: &Path, strategy: &IoStrategy) -> Result<ActuationBundle> {
    let (episode, actuation) = indices_from_path(dir)?;
    match strategy.mode {
        IoMode::Disabled => Err(Error::Contract("nothing is written under the disabled strategy".into())),
        IoMode::Optimized => {
            let path = dir.join(STEP_FILE);
            let bytes = read_all(&path)?;
            let mut r = Reader::new(&bytes, &path);
            r.expect_magic(BUNDLE_MAGIC)?;
            let version = r.u16("version")?;
            if version != STEP_VERSION {
                return Err(Error::format(&path, 4, format!("unsupported step version {version}")));
            }
            r.u16("flags")?;
            let n_probes = r.u32("probe count")? as usize;
            let probes = r.f64s(n_probes, "probes")?;
            let n_rows = r.u32("row count")? as usize;
            let flat = r.f64s(
                n_rows.checked_mul(3).ok_or_else(|| r.error("row count overflow"))?,
                "rows",
            )?;
            let rows = flat
                .chunks_exact(3)
                .map(|c| StepRecord {
                    t: c[0],
                    cd: c[1],
                    cl: c[2],
                })
                .collect();
            let jet_velocity = r.f64("jet velocity")?;
            Ok(ActuationBundle {
                episode,
                actuation,
                probes,
                rows,
                jet_velocity,
            })
        }
        IoMode::Baseline => {
            let probes_path = dir.join(PROBES_FILE);
            let text = read_text(&probes_path)?;
            let mut probes = Vec::new();
            let mut offset = 0;
            for line in text.split_terminator('\n') {
                probes.push(parse_f64(line, &probes_path, offset)?);
                offset += line.len() + 1;
            }

            let coeffs_path = dir.join(COEFFS_FILE);
            let text = read_text(&coeffs_path)?;
            let mut lines = text.split_terminator('\n');
            if lines.next() != Some(COEFFS_HEADER) {
                return Err(Error::format(
                    &coeffs_path,
                    0,
                    format!("expected header `{COEFFS_HEADER}`"),
                ));
            }
            let mut offset = COEFFS_HEADER.len() + 1;
            let mut rows = Vec::new();
            for line in lines {
                let cols: Vec<&str> = line.split(',').collect();
                if cols.len() != 3 {
                    return Err(Error::format(&coeffs_path, offset as u64, "expected 3 columns"));
                }
                rows.push(StepRecord {
                    t: parse_f64(cols[0], &coeffs_path, offset)?,
                    cd: parse_f64(cols[1], &coeffs_path, offset)?,
                    cl: parse_f64(cols[2], &coeffs_path, offset)?,
                });
                offset += line.len() + 1;
            }

            let field_path = dir.join(FIELD_FILE);
            let mut head = Vec::with_capacity(128);
            File::open(&field_path)
                .map_err(|e| Error::io(&field_path, e))?
                .take(256)
                .read_to_end(&mut head)
                .map_err(|e| Error::io(&field_path, e))?;
            let end = head
                .iter()
                .position(|&b| b == b'\n')
                .ok_or_else(|| Error::format(&field_path, 0, "missing field header line"))?;
            let line =
                std::str::from_utf8(&head[..end]).map_err(|_| Error::format(&field_path, 0, "invalid field header"))?;
            let value = line
                .strip_prefix(FIELD_HEADER)
                .ok_or_else(|| Error::format(&field_path, 0, "unrecognized field header"))?;
            let jet_velocity = parse_f64(value, &field_path, FIELD_HEADER.len())?;
            Ok(ActuationBundle {
                episode,
                actuation,
                probes,
                rows,
                jet_velocity,
            })
        }
    }
}

pub fn write_action(dir: &Path, action: f64, strategy: &IoStrategy) -> Result<u64> {
    match strategy.mode {
        IoMode::Disabled => Ok(0),
        IoMode::Baseline => write_file(&dir.join(ACTION_TXT), format!("{}\n", shortest(action)).as_bytes()),
        IoMode::Optimized => {
            let mut out = Vec::with_capacity(12);
            out.extend_from_slice(ACTION_MAGIC);
            put_f64s(&mut out, &[action]);
            write_file(&dir.join(ACTION_BIN), &out)
        }
    }
}

pub fn read_action(dir: &Path, strategy: &IoStrategy) -> Result<f64> {
    match strategy.mode {
        IoMode::Disabled => Err(Error::Contract("nothing is written under the disabled strategy".into())),
        IoMode::Baseline => {
            let path = dir.join(ACTION_TXT);
            let text = read_text(&path)?;
            parse_f64(&text, &path, 0)
        }
        IoMode::Optimized => {
            let path = dir.join(ACTION_BIN);
            let bytes = read_all(&path)?;
            let mut r = Reader::new(&bytes, &path);
            r.expect_magic(ACTION_MAGIC)?;
            let v = r.f64("action")?;
            if !r.remaining().is_empty() {
                return Err(r.error("trailing bytes after action"));
            }
            Ok(v)
        }
    }
}
