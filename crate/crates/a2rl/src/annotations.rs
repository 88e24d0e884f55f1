//! Annotation files: one image per line, tab-separated, the image path
//! followed by `4K` integers (`left top width height` in pixels for each of
//! `K` annotators). Blank lines and `#` comments are ignored.

use std::fs;
use std::path::{Path, PathBuf};

use a2rl_core::env::PixelRect;

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnnotationEntry {
    /// 1-based line in the file.
    pub line: usize,
    pub image: PathBuf,
    pub boxes: Vec<PixelRect>,
}

pub fn parse(text: &str, origin: &str) -> Result<Vec<AnnotationEntry>, CliError> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let err = |msg: String| CliError::Input(format!("{origin}: line {line}: {msg}"));
        if raw.trim().is_empty() || raw.trim_start().starts_with('#') {
            continue;
        }
        let mut fields = raw.split('\t');
        let image = fields.next().unwrap_or_default().trim();
        if image.is_empty() {
            return Err(err("missing image path".into()));
        }
        let values = fields
            .flat_map(str::split_whitespace)
            .map(|f| f.parse::<u32>().map_err(|_| err(format!("{f:?} is not a non-negative integer"))))
            .collect::<Result<Vec<_>, _>>()?;
        if values.is_empty() || values.len() % 4 != 0 {
            return Err(err(format!("expected a multiple of 4 integers after the path, found {}", values.len())));
        }
        let boxes: Vec<PixelRect> = values
            .chunks_exact(4)
            .map(|c| PixelRect { left: c[0], top: c[1], width: c[2], height: c[3] })
            .collect();
        if let Some(b) = boxes.iter().find(|b| b.width == 0 || b.height == 0) {
            return Err(err(format!("box `{b}` is empty")));
        }
        out.push(AnnotationEntry { line, image: PathBuf::from(image), boxes });
    }
    if out.is_empty() {
        return Err(CliError::Input(format!("{origin}: no annotations")));
    }
    Ok(out)
}

pub fn load(path: &Path) -> Result<Vec<AnnotationEntry>, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Input(format!("cannot read annotations {}: {e}", path.display())))?;
    parse(&text, &path.display().to_string())
}
