use std::io::Write;
use std::path::Path;

use serde::Deserialize;

use super::{ConstitutionMeta, Document, RawConstitution, Vocabulary};
use crate::error::{Error, Result};
use crate::fsutil;

#[derive(Debug, Deserialize)]
struct ManifestRow {
    id: String,
    country: String,
    year: i32,
    filename: String,
}

/// Loads a corpus directory. With a manifest CSV (`id,country,year,filename`) the listed
/// files are read; otherwise every `<country>_<year>.txt` file in `dir` is loaded with its
/// file stem as id.
pub fn load_corpus(dir: &Path, manifest: Option<&Path>) -> Result<Vec<RawConstitution>> {
    let mut out = Vec::new();
    match manifest {
        Some(manifest) => {
            for row in fsutil::read_csv::<ManifestRow>(manifest)? {
                let text = fsutil::read_string(&dir.join(&row.filename))?;
                out.push(RawConstitution::new(row.id, row.country, row.year, text)?);
            }
        }
        None => {
            let entries = std::fs::read_dir(dir).map_err(|e| Error::io(dir, e))?;
            let mut paths = entries
                .map(|e| e.map(|e| e.path()).map_err(|err| Error::io(dir, err)))
                .collect::<Result<Vec<_>>>()?;
            paths.retain(|p| p.extension().is_some_and(|e| e == "txt"));
            paths.sort();
            for path in paths {
                let stem = path
                    .file_stem()
                    .and_then(|s| s.to_str())
                    .unwrap_or_default()
                    .to_string();
                let (country, year) = stem.rsplit_once('_').ok_or_else(|| {
                    Error::InvalidInput(format!(
                        "{} does not follow <country>_<year>.txt",
                        path.display()
                    ))
                })?;
                let year: i32 = year.parse().map_err(|_| {
                    Error::InvalidInput(format!("{}: `{year}` is not a year", path.display()))
                })?;
                let text = fsutil::read_string(&path)?;
                out.push(RawConstitution::new(
                    stem.clone(),
                    country.replace('_', " "),
                    year,
                    text,
                )?);
            }
        }
    }
    if out.is_empty() {
        return Err(Error::InvalidInput(format!(
            "no texts found in {}",
            dir.display()
        )));
    }
    Ok(out)
}

pub fn write_vocabulary(path: &Path, vocab: &Vocabulary) -> Result<()> {
    let mut s = String::new();
    for t in vocab.tokens() {
        s.push_str(t);
        s.push('\n');
    }
    fsutil::write_string(path, &s)
}

pub fn read_vocabulary(path: &Path) -> Result<Vocabulary> {
    let tokens = fsutil::read_lines(path)?
        .into_iter()
        .filter(|l| !l.is_empty())
        .collect();
    Vocabulary::from_tokens(tokens)
}

pub fn write_documents(path: &Path, docs: &[Document]) -> Result<()> {
    let mut w = fsutil::create(path)?;
    for d in docs {
        serde_json::to_writer(&mut w, d)?;
        w.write_all(b"\n").map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_documents(path: &Path) -> Result<Vec<Document>> {
    fsutil::read_lines(path)?
        .iter()
        .filter(|l| !l.trim().is_empty())
        .map(|l| serde_json::from_str(l).map_err(Error::from))
        .collect()
}

pub fn write_constitutions(path: &Path, rows: &[ConstitutionMeta]) -> Result<()> {
    fsutil::write_csv(path, rows)
}

pub fn read_constitutions(path: &Path) -> Result<Vec<ConstitutionMeta>> {
    fsutil::read_csv(path)
}
