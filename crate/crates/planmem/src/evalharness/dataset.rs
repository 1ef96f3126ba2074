//! JSONL datasets: one query instance per line.

use crate::domain::QueryInstance;
use serde::de::DeserializeOwned;
use serde::Serialize;
use std::collections::HashSet;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("line {line}: {source}")]
    Malformed {
        line: usize,
        #[source]
        source: serde_json::Error,
    },
    #[error("line {line}: duplicate instance id {id:?}")]
    DuplicateId { line: usize, id: String },
}

/// Reads any JSONL file, reporting the offending line number on parse
/// errors. Blank lines are skipped.
pub fn load_jsonl<T: DeserializeOwned>(path: impl AsRef<Path>) -> Result<Vec<T>, DatasetError> {
    let file = std::fs::File::open(path)?;
    let mut items = Vec::new();
    for (idx, line) in BufReader::new(file).lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let item = serde_json::from_str(&line)
            .map_err(|source| DatasetError::Malformed { line: idx + 1, source })?;
        items.push(item);
    }
    Ok(items)
}

/// Writes items as JSONL, one compact JSON document per line.
pub fn save_jsonl<T: Serialize>(
    path: impl AsRef<Path>,
    items: &[T],
) -> Result<(), DatasetError> {
    let mut file = std::io::BufWriter::new(std::fs::File::create(path)?);
    for item in items {
        let line = serde_json::to_string(item)
            .map_err(|source| DatasetError::Malformed { line: 0, source })?;
        writeln!(file, "{line}")?;
    }
    file.flush()?;
    Ok(())
}

/// Loads a benchmark dataset, rejecting duplicate instance ids.
pub fn load_dataset(path: impl AsRef<Path>) -> Result<Vec<QueryInstance>, DatasetError> {
    let instances: Vec<QueryInstance> = load_jsonl(path)?;
    let mut seen: HashSet<&str> = HashSet::new();
    for (idx, instance) in instances.iter().enumerate() {
        if !seen.insert(&instance.id) {
            return Err(DatasetError::DuplicateId { line: idx + 1, id: instance.id.clone() });
        }
    }
    Ok(instances)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn dataset_round_trips_through_jsonl() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("instances.jsonl");
        let instances = vec![
            fixtures::trip_instance(),
            fixtures::calendar_instance(),
            fixtures::meeting_instance(),
        ];
        save_jsonl(&path, &instances).unwrap();
        let loaded = load_dataset(&path).unwrap();
        assert_eq!(loaded, instances);
    }

    #[test]
    fn malformed_lines_report_their_number() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("broken.jsonl");
        let good = serde_json::to_string(&fixtures::trip_instance()).unwrap();
        std::fs::write(&path, format!("{good}\n\n{{\"id\": \"half\"")).unwrap();
        let err = load_dataset(&path).unwrap_err();
        assert!(matches!(err, DatasetError::Malformed { line: 3, .. }), "{err}");
    }

    #[test]
    fn unknown_task_kinds_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("kind.jsonl");
        std::fs::write(
            &path,
            "{\"id\":\"x\",\"task_kind\":\"sudoku\",\"query_text\":\"solve it\"}\n",
        )
        .unwrap();
        let err = load_dataset(&path).unwrap_err();
        assert!(matches!(err, DatasetError::Malformed { line: 1, .. }), "{err}");
    }

    #[test]
    fn duplicate_ids_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("dup.jsonl");
        let a = serde_json::to_string(&fixtures::trip_instance()).unwrap();
        std::fs::write(&path, format!("{a}\n{a}\n")).unwrap();
        let err = load_dataset(&path).unwrap_err();
        assert!(matches!(err, DatasetError::DuplicateId { line: 2, .. }), "{err}");
    }
}
