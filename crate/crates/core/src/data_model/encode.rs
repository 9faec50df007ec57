use serde::{Deserialize, Serialize};

use super::{Cell, DataError, Dataset, FeatureKind, FeatureSchema, PatientRecord};
use crate::Matrix;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ColumnRole {
    ScaledNumeric,
    Binary,
    OrdinalRank,
    OneHot(String),
}

/// Provenance of one encoded column.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Column {
    pub feature: String,
    pub feature_index: usize,
    pub role: ColumnRole,
}

impl Column {
    /// `feature` for single-column features, `feature=level` for one-hot columns.
    pub fn key(&self) -> String {
        match &self.role {
            ColumnRole::OneHot(level) => format!("{}={}", self.feature, level),
            _ => self.feature.clone(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NumericRange {
    pub min: f64,
    pub max: f64,
}

/// Encoding rules plus the numeric ranges captured at fit time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Encoder {
    columns: Vec<Column>,
    /// One entry per schema feature; `Some` exactly for numeric features.
    ranges: Vec<Option<NumericRange>>,
}

fn layout(schema: &FeatureSchema) -> Vec<Column> {
    let mut columns = Vec::with_capacity(schema.encoded_width());
    for (i, def) in schema.features().iter().enumerate() {
        let column = |role| Column {
            feature: def.name.clone(),
            feature_index: i,
            role,
        };
        match &def.kind {
            FeatureKind::Numeric => columns.push(column(ColumnRole::ScaledNumeric)),
            FeatureKind::Binary(_) => columns.push(column(ColumnRole::Binary)),
            FeatureKind::Ordinal(_) => columns.push(column(ColumnRole::OrdinalRank)),
            FeatureKind::Categorical(levels) => columns.extend(
                levels
                    .iter()
                    .map(|l| column(ColumnRole::OneHot(l.clone()))),
            ),
        }
    }
    columns
}

impl Encoder {
    /// Captures min/max of every numeric feature over the records in `fit_on`.
    pub fn fit(dataset: &Dataset, fit_on: &[usize]) -> Result<Self, DataError> {
        if fit_on.is_empty() {
            return Err(DataError::EmptyFitSet);
        }
        let schema = dataset.schema();
        let mut ranges = Vec::with_capacity(schema.features().len());
        for (i, def) in schema.features().iter().enumerate() {
            if !matches!(def.kind, FeatureKind::Numeric) {
                ranges.push(None);
                continue;
            }
            let mut range: Option<NumericRange> = None;
            for &r in fit_on {
                if let Cell::Number(v) = dataset.records()[r].values[i] {
                    range = Some(match range {
                        None => NumericRange { min: v, max: v },
                        Some(NumericRange { min, max }) => NumericRange {
                            min: min.min(v),
                            max: max.max(v),
                        },
                    });
                }
            }
            let range = range.ok_or_else(|| DataError::NoNumericValues(def.name.clone()))?;
            if range.min == range.max {
                log::warn!(
                    "numeric feature `{}` is constant in the fit set; encoding as 0.5",
                    def.name
                );
            }
            ranges.push(Some(range));
        }
        Ok(Self {
            columns: layout(schema),
            ranges,
        })
    }

    /// Encoder with fixed numeric ranges, one per numeric feature in schema order.
    pub fn with_ranges(schema: &FeatureSchema, numeric: &[NumericRange]) -> Result<Self, DataError> {
        let mut it = numeric.iter();
        let mut ranges = Vec::new();
        for def in schema.features() {
            if matches!(def.kind, FeatureKind::Numeric) {
                let r = it.next().ok_or_else(|| {
                    DataError::InvalidMarginals(format!("no range for `{}`", def.name))
                })?;
                ranges.push(Some(*r));
            } else {
                ranges.push(None);
            }
        }
        Ok(Self {
            columns: layout(schema),
            ranges,
        })
    }

    pub fn columns(&self) -> &[Column] {
        &self.columns
    }

    pub fn width(&self) -> usize {
        self.columns.len()
    }

    /// Fit-time range of each schema feature (`None` for non-numeric features).
    pub fn ranges(&self) -> &[Option<NumericRange>] {
        &self.ranges
    }

    /// Source feature name of each column.
    pub fn provenance(&self) -> Vec<String> {
        self.columns.iter().map(|c| c.feature.clone()).collect()
    }

    pub fn encode_record(&self, schema: &FeatureSchema, record: &PatientRecord) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.columns.len());
        for (i, def) in schema.features().iter().enumerate() {
            let cell = record.values[i];
            match &def.kind {
                FeatureKind::Numeric => out.push(match cell {
                    Cell::Number(v) => {
                        let r = self.ranges[i].expect("numeric feature has a range");
                        if r.max > r.min {
                            ((v - r.min) / (r.max - r.min)).clamp(0.0, 1.0)
                        } else {
                            0.5
                        }
                    }
                    _ => 0.0,
                }),
                FeatureKind::Binary(_) => out.push(match cell {
                    Cell::Level(l) => l as f64,
                    _ => 0.0,
                }),
                FeatureKind::Ordinal(levels) => out.push(match cell {
                    Cell::Level(l) if levels.len() > 1 => l as f64 / (levels.len() - 1) as f64,
                    _ => 0.0,
                }),
                FeatureKind::Categorical(levels) => {
                    for k in 0..levels.len() {
                        out.push(if cell == Cell::Level(k) { 1.0 } else { 0.0 });
                    }
                }
            }
        }
        out
    }

    /// Encodes the given records (repeats allowed) into a matrix.
    pub fn transform(&self, dataset: &Dataset, rows: &[usize]) -> Matrix {
        let mut data = Vec::with_capacity(rows.len() * self.width());
        for &r in rows {
            data.extend(self.encode_record(dataset.schema(), &dataset.records()[r]));
        }
        Matrix::from_vec(rows.len(), self.width(), data)
    }
}

/// Design matrix for every record of a dataset, with its encoder.
#[derive(Debug, Clone, PartialEq)]
pub struct EncodedMatrix {
    pub rows: Matrix,
    pub encoder: Encoder,
}

impl EncodedMatrix {
    pub fn columns(&self) -> &[Column] {
        self.encoder.columns()
    }
}

/// Fits an encoder on `fit_on` and encodes every record of `dataset`.
pub fn encode(dataset: &Dataset, fit_on: &[usize]) -> Result<EncodedMatrix, DataError> {
    let encoder = Encoder::fit(dataset, fit_on)?;
    let all: Vec<usize> = (0..dataset.len()).collect();
    Ok(EncodedMatrix {
        rows: encoder.transform(dataset, &all),
        encoder,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data_model::{FeatureDef, Label};

    fn schema() -> FeatureSchema {
        FeatureSchema::new(
            vec![
                FeatureDef::new("age", FeatureKind::Numeric),
                FeatureDef::new("sex", FeatureKind::Binary(vec!["M".into(), "F".into()])),
                FeatureDef::new(
                    "mrsa",
                    FeatureKind::Ordinal(vec!["Negative".into(), "NA".into(), "Positive".into()]),
                ),
                FeatureDef::new(
                    "org",
                    FeatureKind::Categorical(vec!["a".into(), "b".into(), "c".into(), "d".into()]),
                ),
            ],
            vec!["T".into()],
        )
        .unwrap()
    }

    fn rec(age: Option<f64>, sex: usize, mrsa: usize, org: Option<usize>) -> PatientRecord {
        PatientRecord {
            values: vec![
                age.map_or(Cell::Missing, Cell::Number),
                Cell::Level(sex),
                Cell::Level(mrsa),
                org.map_or(Cell::Missing, Cell::Level),
            ],
            labels: vec![Some(Label::Susceptible)],
        }
    }

    #[test]
    fn min_max_scaling_and_layout() {
        let ds = Dataset::new(
            schema(),
            vec![
                rec(Some(20.0), 0, 0, Some(0)),
                rec(Some(40.0), 1, 1, Some(3)),
                rec(Some(60.0), 0, 2, None),
            ],
        )
        .unwrap();
        let enc = encode(&ds, &[0, 1, 2]).unwrap();
        assert_eq!(enc.rows.cols(), 1 + 1 + 1 + 4);
        let ages: Vec<f64> = (0..3).map(|i| enc.rows.get(i, 0)).collect();
        assert_eq!(ages, vec![0.0, 0.5, 1.0]);
        assert_eq!(enc.rows.row(1), &[0.5, 1.0, 0.5, 0.0, 0.0, 0.0, 1.0]);
        // missing categorical encodes as all zeros
        assert_eq!(&enc.rows.row(2)[3..], &[0.0; 4]);
        let one_hot = enc
            .columns()
            .iter()
            .filter(|c| matches!(c.role, ColumnRole::OneHot(_)))
            .count();
        assert_eq!(one_hot, 4);
        assert_eq!(enc.columns()[4].key(), "org=b");
    }

    #[test]
    fn out_of_range_values_are_clamped() {
        let ds = Dataset::new(
            schema(),
            vec![
                rec(Some(20.0), 0, 0, Some(0)),
                rec(Some(60.0), 0, 0, Some(0)),
                rec(Some(90.0), 0, 0, Some(0)),
                rec(Some(5.0), 0, 0, Some(0)),
            ],
        )
        .unwrap();
        let enc = encode(&ds, &[0, 1]).unwrap();
        assert_eq!(enc.rows.get(2, 0), 1.0);
        assert_eq!(enc.rows.get(3, 0), 0.0);
    }

    #[test]
    fn constant_numeric_encodes_as_half_and_missing_as_zero() {
        let ds = Dataset::new(
            schema(),
            vec![rec(Some(30.0), 0, 0, Some(1)), rec(None, 0, 0, Some(1))],
        )
        .unwrap();
        let enc = encode(&ds, &[0, 1]).unwrap();
        assert_eq!(enc.rows.get(0, 0), 0.5);
        assert_eq!(enc.rows.get(1, 0), 0.0);
    }

    #[test]
    fn fit_errors() {
        let ds = Dataset::new(schema(), vec![rec(None, 0, 0, Some(1))]).unwrap();
        assert!(matches!(encode(&ds, &[]), Err(DataError::EmptyFitSet)));
        assert!(matches!(encode(&ds, &[0]), Err(DataError::NoNumericValues(f)) if f == "age"));
    }

    #[test]
    fn gpc_organism_has_four_one_hot_columns() {
        let schema = FeatureSchema::gpc();
        let cols = layout(&schema);
        let organism = cols.iter().filter(|c| c.feature == "organism").count();
        assert_eq!(organism, 4);
        assert_eq!(cols.len(), schema.encoded_width());
    }
}
