//! Offline change detection over a stored bit stream.

use std::path::Path;

use crate::cpd::{ForecasterBank, GlrDetector};
use crate::error::{io_error, Error, Result};
use crate::policies::DetectorKind;

/// Read a one-column CSV of `0`/`1` values. A non-numeric first line is
/// taken as a header; blank lines are skipped.
pub fn read_bits(path: impl AsRef<Path>) -> Result<Vec<bool>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| io_error(path, e))?;
    parse_bits(&text, &path.display().to_string())
}

pub fn parse_bits(text: &str, origin: &str) -> Result<Vec<bool>> {
    let mut bits = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let field = line.trim();
        if field.is_empty() {
            continue;
        }
        match field {
            "0" => bits.push(false),
            "1" => bits.push(true),
            _ if i == 0 && field.parse::<f64>().is_err() => {}
            _ => {
                return Err(Error::Parse {
                    path: origin.to_string(),
                    line: i + 1,
                    message: format!("expected 0 or 1, found `{field}`"),
                })
            }
        }
    }
    Ok(bits)
}

/// Run a detector over `bits`, resetting it after each detection. Returns
/// the 1-based positions at which it fired.
pub fn detect_stream(bits: &[bool], delta: f64, detector: DetectorKind) -> Result<Vec<usize>> {
    let mut fired = Vec::new();
    match detector {
        DetectorKind::None => {}
        DetectorKind::Rbocpd => {
            let mut bank = ForecasterBank::new(delta)?;
            for (i, &b) in bits.iter().enumerate() {
                if bank.step(b).restart {
                    fired.push(i + 1);
                    bank.reset();
                }
            }
        }
        DetectorKind::Glr => {
            let mut glr = GlrDetector::new(delta)?;
            for (i, &b) in bits.iter().enumerate() {
                if glr.step(b).restart {
                    fired.push(i + 1);
                    glr.reset();
                }
            }
        }
    }
    Ok(fired)
}
