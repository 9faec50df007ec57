use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{
    permutation_p_value, select_method, signed_phi, statistic, AssociationMethod,
    ContingencyTable,
};
use crate::data_model::{Cell, Dataset, FeatureKind};
use crate::seed;

/// Association of one feature (or one level of a categorical feature) with
/// one antibiotic family. `coefficient` is `None` when the cell could not be
/// computed (fewer than 3 complete pairs, or a constant variable).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssociationCell {
    pub feature: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub level: Option<String>,
    pub family: String,
    pub method: AssociationMethod,
    pub coefficient: Option<f64>,
    pub p_value: Option<f64>,
    pub significant: bool,
    pub n_used: usize,
    /// Signed phi for 2×2 Cramér's V cells.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phi: Option<f64>,
}

impl AssociationCell {
    pub fn row_label(&self) -> String {
        match &self.level {
            Some(l) => format!("{}={}", self.feature, l),
            None => self.feature.clone(),
        }
    }

    pub fn is_available(&self) -> bool {
        self.coefficient.is_some()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssociationReport {
    pub families: Vec<String>,
    pub rows: Vec<AssociationCell>,
}

#[derive(Debug, Clone, Copy)]
pub struct ReportOptions {
    pub n_perm: usize,
    pub seed: u64,
    pub alpha: f64,
}

impl Default for ReportOptions {
    fn default() -> Self {
        Self {
            n_perm: 2000,
            seed: 0,
            alpha: 0.05,
        }
    }
}

struct RowSpec {
    feature: usize,
    level: Option<usize>,
}

/// Builds the feature × family association matrix. Categorical features
/// contribute one row per level (level indicator vs label); records missing
/// either value are excluded pairwise.
pub fn association_report(dataset: &Dataset, options: ReportOptions) -> AssociationReport {
    let schema = dataset.schema();
    let label_kind = FeatureKind::Binary(vec!["S".into(), "R".into()]);
    let mut specs = Vec::new();
    for (i, def) in schema.features().iter().enumerate() {
        match &def.kind {
            FeatureKind::Categorical(levels) => {
                specs.extend((0..levels.len()).map(|k| RowSpec {
                    feature: i,
                    level: Some(k),
                }));
            }
            _ => specs.push(RowSpec {
                feature: i,
                level: None,
            }),
        }
    }
    let n_targets = schema.targets().len();
    let tasks: Vec<(usize, usize)> = (0..specs.len())
        .flat_map(|r| (0..n_targets).map(move |t| (r, t)))
        .collect();

    let rows = tasks
        .par_iter()
        .map(|&(r, t)| {
            let spec = &specs[r];
            let def = &schema.features()[spec.feature];
            let method = match spec.level {
                Some(_) => AssociationMethod::CramersV,
                None => select_method(&def.kind, &label_kind),
            };
            let mut x = Vec::new();
            let mut y = Vec::new();
            for rec in dataset.records() {
                let Some(label) = rec.labels[t] else { continue };
                let v = match (rec.values[spec.feature], spec.level) {
                    (Cell::Missing, _) => continue,
                    (Cell::Number(v), _) => v,
                    (Cell::Level(l), Some(k)) => f64::from(u8::from(l == k)),
                    (Cell::Level(l), None) => l as f64,
                };
                x.push(v);
                y.push(f64::from(u8::from(label.is_resistant())));
            }
            let mut cell = AssociationCell {
                feature: def.name.clone(),
                level: spec.level.map(|k| def.kind.levels()[k].clone()),
                family: schema.targets()[t].clone(),
                method,
                coefficient: None,
                p_value: None,
                significant: false,
                n_used: x.len(),
                phi: None,
            };
            if x.len() < 3 {
                return cell;
            }
            let Ok(coefficient) = statistic(method, &x, &y) else {
                return cell;
            };
            let cell_seed = seed::derive(options.seed, &[r as u64, t as u64]);
            let p = permutation_p_value(method, &x, &y, options.n_perm, cell_seed)
                .expect("statistic already succeeded on these inputs");
            if method == AssociationMethod::CramersV {
                let cx: Vec<usize> = x.iter().map(|&v| v as usize).collect();
                let cy: Vec<usize> = y.iter().map(|&v| v as usize).collect();
                let width = cx.iter().max().map_or(0, |m| m + 1);
                cell.phi = ContingencyTable::from_codes(&cx, &cy, width, 2)
                    .ok()
                    .and_then(|tab| signed_phi(&tab));
            }
            cell.coefficient = Some(coefficient);
            cell.p_value = Some(p);
            cell.significant = p < options.alpha;
            cell
        })
        .collect();

    AssociationReport {
        families: schema.targets().to_vec(),
        rows,
    }
}

impl AssociationReport {
    pub fn cell(&self, row_label: &str, family: &str) -> Option<&AssociationCell> {
        self.rows
            .iter()
            .find(|c| c.family == family && c.row_label() == row_label)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(Vec::new());
        w.write_record([
            "feature",
            "level",
            "family",
            "method",
            "coefficient",
            "p_value",
            "significant",
            "n_used",
            "phi",
        ])
        .expect("in-memory write");
        let opt = |v: Option<f64>| v.map(|v| v.to_string()).unwrap_or_default();
        for c in &self.rows {
            w.write_record([
                c.feature.clone(),
                c.level.clone().unwrap_or_default(),
                c.family.clone(),
                format!("{:?}", c.method),
                opt(c.coefficient),
                opt(c.p_value),
                c.significant.to_string(),
                c.n_used.to_string(),
                opt(c.phi),
            ])
            .expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("flush")).expect("utf-8")
    }

    /// Aligned text matrix, one row per feature (level) and one column per
    /// family. Values are the signed phi where available, otherwise the
    /// coefficient; `*` marks significance and `-` an unavailable cell.
    pub fn render_text(&self) -> String {
        let mut labels: Vec<String> = Vec::new();
        for c in &self.rows {
            let l = c.row_label();
            if !labels.contains(&l) {
                labels.push(l);
            }
        }
        let label_width = labels.iter().map(String::len).max().unwrap_or(0).max(7);
        let col_width = |f: &String| f.len().max(7);
        let mut out = String::new();
        let _ = write!(out, "{:label_width$}", "feature");
        for f in &self.families {
            let _ = write!(out, "  {:>w$}", f, w = col_width(f));
        }
        out.push('\n');
        for l in &labels {
            let _ = write!(out, "{l:label_width$}");
            for f in &self.families {
                let text = match self.cell(l, f) {
                    Some(c) if c.is_available() => {
                        let v = c.phi.or(c.coefficient).expect("available");
                        format!("{v:.2}{}", if c.significant { "*" } else { " " })
                    }
                    _ => "- ".to_string(),
                };
                let _ = write!(out, "  {:>w$}", text, w = col_width(f));
            }
            out.push('\n');
        }
        out
    }
}
