//! Line-delimited JSON record files.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;

use super::convert::{convert_nli_items, convert_qa_items, convert_rationale_items, ConversionReport};
use super::statement::StatementConverter;
use super::types::{validate_collection, EvInstance, NliItem, QaItem, RankPair, RationaleItem};
use super::DatasetError;

/// A record type that can be checked after parsing.
pub trait Record: Serialize + DeserializeOwned {
    fn validate(&self) -> Result<(), DatasetError> {
        Ok(())
    }
}

impl Record for EvInstance {
    fn validate(&self) -> Result<(), DatasetError> {
        EvInstance::validate(self)
    }
}
impl Record for NliItem {
    fn validate(&self) -> Result<(), DatasetError> {
        NliItem::validate(self)
    }
}
impl Record for QaItem {
    fn validate(&self) -> Result<(), DatasetError> {
        QaItem::validate(self)
    }
}
impl Record for RationaleItem {
    fn validate(&self) -> Result<(), DatasetError> {
        RationaleItem::validate(self)
    }
}
impl Record for RankPair {
    fn validate(&self) -> Result<(), DatasetError> {
        RankPair::validate(self)
    }
}

/// Reads one record per non-blank line. Errors carry the 1-based line number
/// and, where serde reports it, the offending field.
pub fn read_records<T: Record>(path: &Path) -> Result<Vec<T>, DatasetError> {
    let file = File::open(path).map_err(|e| DatasetError::io(path, e))?;
    parse_records(BufReader::new(file)).map_err(|e| e.in_file(path))
}

pub fn parse_records<T: Record, R: BufRead>(reader: R) -> Result<Vec<T>, DatasetError> {
    let mut out = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let lineno = idx + 1;
        let line = line.map_err(|e| DatasetError::Parse {
            line: lineno,
            field: None,
            message: e.to_string(),
        })?;
        if line.trim().is_empty() {
            continue;
        }
        let record: T = serde_json::from_str(&line).map_err(|e| DatasetError::from_json(lineno, &e))?;
        record.validate().map_err(|e| e.at_line(lineno))?;
        out.push(record);
    }
    Ok(out)
}

pub fn write_records<T: Serialize>(records: &[T], path: &Path) -> Result<(), DatasetError> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).map_err(|e| DatasetError::io(parent, e))?;
    }
    let file = File::create(path).map_err(|e| DatasetError::io(path, e))?;
    let mut w = BufWriter::new(file);
    for r in records {
        serde_json::to_writer(&mut w, r).map_err(|e| DatasetError::io(path, e.into()))?;
        w.write_all(b"\n").map_err(|e| DatasetError::io(path, e))?;
    }
    w.flush().map_err(|e| DatasetError::io(path, e))
}

/// Loads an instance file, enforcing id uniqueness.
pub fn load_instances(path: &Path) -> Result<Vec<EvInstance>, DatasetError> {
    let instances: Vec<EvInstance> = read_records(path)?;
    validate_collection(&instances).map_err(|e| e.in_file(path))?;
    Ok(instances)
}

pub fn write_instances(instances: &[EvInstance], path: &Path) -> Result<(), DatasetError> {
    write_records(instances, path)
}

/// Record layout of a source file.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SourceSchema {
    Nli,
    Qa,
    Rationale,
    Instance,
}

impl std::str::FromStr for SourceSchema {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "nli" => Ok(SourceSchema::Nli),
            "qa" => Ok(SourceSchema::Qa),
            "rationale" => Ok(SourceSchema::Rationale),
            "instance" => Ok(SourceSchema::Instance),
            other => Err(format!("unknown schema {other:?} (expected nli, qa, rationale or instance)")),
        }
    }
}

/// Reads a source file of the given schema and converts it to instances.
pub fn load_source(
    path: &Path,
    schema: SourceSchema,
    converter: &dyn StatementConverter,
) -> Result<ConversionReport, DatasetError> {
    let prefix = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "row".to_string());
    let report = match schema {
        SourceSchema::Nli => convert_nli_items(&read_records::<NliItem>(path)?, &prefix)?,
        SourceSchema::Qa => convert_qa_items(&read_records::<QaItem>(path)?, &prefix, converter)?,
        SourceSchema::Rationale => {
            convert_rationale_items(&read_records::<RationaleItem>(path)?, &prefix, converter)?
        }
        SourceSchema::Instance => ConversionReport {
            instances: load_instances(path)?,
            ..Default::default()
        },
    };
    validate_collection(&report.instances).map_err(|e| e.in_file(path))?;
    Ok(report)
}
