//! Loading graph collections laid out as `<dir>/<theory>/<name>.json`.

use crate::theory::{SpecifiedGraph, Theory, TheoryError};
use std::path::Path;

#[derive(Debug, Clone)]
pub struct Entry {
    pub name: String,
    pub theory: Theory,
    pub graph: SpecifiedGraph,
}

/// Reads every `*.json` under the theory-named subdirectories of `dir`,
/// sorted by theory then file name. A directory that is itself named after
/// a theory preset is read as that single theory.
pub fn load_dir(dir: &Path) -> Result<Vec<Entry>, TheoryError> {
    let io = |e: std::io::Error| TheoryError::Parse(format!("{}: {e}", dir.display()));
    let own = dir.canonicalize().ok().and_then(|p| p.file_name().map(|n| n.to_string_lossy().to_string()));
    let mut theories: Vec<_> = match own {
        Some(n) if Theory::preset(&n).is_ok() => vec![(n, dir.to_path_buf())],
        _ => std::fs::read_dir(dir)
            .map_err(io)?
            .filter_map(|e| e.ok())
            .filter(|e| e.path().is_dir())
            .map(|e| (e.file_name().to_string_lossy().to_string(), e.path()))
            .collect(),
    };
    theories.sort();
    let mut out = Vec::new();
    for (tname, tdir) in theories {
        let theory = Theory::preset(&tname)?;
        let mut files: Vec<_> = std::fs::read_dir(&tdir).map_err(io)?.filter_map(|e| e.ok()).collect();
        files.sort_by_key(|e| e.file_name());
        for f in files {
            let p = f.path();
            if p.extension().and_then(|s| s.to_str()) != Some("json") {
                continue;
            }
            let text = std::fs::read_to_string(&p).map_err(io)?;
            let graph = SpecifiedGraph::from_json_str(&theory, &text)
                .map_err(|e| TheoryError::Parse(format!("{}: {e}", p.display())))?;
            let stem = p.file_stem().unwrap().to_string_lossy().to_string();
            out.push(Entry { name: format!("{tname}/{stem}"), theory: theory.clone(), graph });
        }
    }
    Ok(out)
}

/// The corpus committed with the crate sources.
pub fn default_dir() -> std::path::PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../corpus")
}
