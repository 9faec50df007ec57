use std::collections::BTreeSet;

use super::{Cell, CellError, DataError, Dataset, FeatureSchema, Label, PatientRecord, RawValue};

enum Slot {
    Feature(usize),
    Target(usize),
}

/// Parses a cohort CSV against `schema`. Data rows are numbered from 1.
pub fn parse_csv(text: &str, schema: &FeatureSchema) -> Result<Dataset, DataError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(text.as_bytes());
    let header = reader.headers()?.clone();

    let mut seen = BTreeSet::new();
    let mut slots = Vec::with_capacity(header.len());
    for name in header.iter() {
        if !seen.insert(name.to_string()) {
            return Err(DataError::DuplicateColumn(name.to_string()));
        }
        let slot = if let Some(i) = schema.feature_index(name) {
            Slot::Feature(i)
        } else if let Some(j) = schema.target_index(name) {
            Slot::Target(j)
        } else {
            return Err(DataError::UnknownColumn(name.to_string()));
        };
        slots.push(slot);
    }
    for name in schema
        .features()
        .iter()
        .map(|f| &f.name)
        .chain(schema.targets())
    {
        if !seen.contains(name) {
            return Err(DataError::MissingColumn(name.clone()));
        }
    }

    let mut records = Vec::new();
    for (r, row) in reader.records().enumerate() {
        let row = row?;
        let row_no = r + 1;
        let mut record = PatientRecord {
            values: vec![Cell::Missing; schema.features().len()],
            labels: vec![None; schema.targets().len()],
        };
        for (slot, text) in slots.iter().zip(row.iter()) {
            match *slot {
                Slot::Feature(i) => {
                    record.values[i] = schema
                        .parse_cell(i, &RawValue::Text(text.to_string()))
                        .map_err(|e| {
                            let column = schema.features()[i].name.clone();
                            let value = text.to_string();
                            match e {
                                CellError::BadNumeric => DataError::BadNumeric {
                                    row: row_no,
                                    column,
                                    value,
                                },
                                CellError::UnknownLevel => DataError::UnknownLevel {
                                    row: row_no,
                                    column,
                                    value,
                                },
                            }
                        })?;
                }
                Slot::Target(j) => {
                    record.labels[j] = match text.trim() {
                        "" => None,
                        "R" => Some(Label::Resistant),
                        "S" => Some(Label::Susceptible),
                        other => {
                            return Err(DataError::BadLabel {
                                row: row_no,
                                column: schema.targets()[j].clone(),
                                value: other.to_string(),
                            })
                        }
                    };
                }
            }
        }
        records.push(record);
    }
    Dataset::new(schema.clone(), records)
}

/// Writes a cohort as CSV: schema features, then targets, in schema order.
pub fn emit_csv(dataset: &Dataset) -> String {
    let schema = dataset.schema();
    let mut writer = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    let header: Vec<&str> = schema
        .features()
        .iter()
        .map(|f| f.name.as_str())
        .chain(schema.targets().iter().map(String::as_str))
        .collect();
    writer.write_record(&header).expect("in-memory write");
    for record in dataset.records() {
        let mut row: Vec<String> = record
            .values
            .iter()
            .enumerate()
            .map(|(i, c)| schema.format_cell(i, c))
            .collect();
        row.extend(
            record
                .labels
                .iter()
                .map(|l| l.map(|l| l.code().to_string()).unwrap_or_default()),
        );
        writer.write_record(&row).expect("in-memory write");
    }
    String::from_utf8(writer.into_inner().expect("in-memory flush")).expect("utf-8 output")
}
