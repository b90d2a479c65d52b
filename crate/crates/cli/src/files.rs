use std::fs;
use std::path::{Path, PathBuf};

use maltsev_kernel::embeddings::{parse_embedding_file, Embedding, EmbeddingFile};
use maltsev_kernel::model::{parse_instance, parse_language, Instance, Language, ParseError};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum FileError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Parse { path: PathBuf, source: ParseError },
}

pub fn read(path: &Path) -> Result<String, FileError> {
    fs::read_to_string(path).map_err(|source| FileError::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn write(path: &Path, text: &str) -> Result<(), FileError> {
    fs::write(path, text).map_err(|source| FileError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn parsed<T>(path: &Path, r: Result<T, ParseError>) -> Result<T, FileError> {
    r.map_err(|source| FileError::Parse {
        path: path.to_path_buf(),
        source,
    })
}

pub fn language(path: &Path) -> Result<Language, FileError> {
    parsed(path, parse_language(&read(path)?))
}

pub fn instance(path: &Path, language: &Language) -> Result<Instance, FileError> {
    parsed(path, parse_instance(&read(path)?, language))
}

pub fn embedding_file(path: &Path) -> Result<EmbeddingFile, FileError> {
    parsed(path, parse_embedding_file(&read(path)?))
}

/// Loads an `.emb` file against `base`. The `lang` line is resolved relative
/// to the `.emb` file; without it the target is `base` itself, and an empty
/// map stands for the identity on `base`.
pub fn embedding(path: &Path, base: &Language) -> Result<Embedding, FileError> {
    let mut file = embedding_file(path)?;
    let target = match &file.lang {
        Some(rel) => language(&path.parent().unwrap_or(Path::new(".")).join(rel))?,
        None => base.clone(),
    };
    if file.map.is_empty() {
        file.map = base
            .names()
            .map(|n| (n.to_string(), n.to_string()))
            .collect();
    }
    Ok(file.into_embedding(base.clone(), target))
}
