use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::DataError;

/// How a feature is measured, which fixes its encoding and association method.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FeatureKind {
    Numeric,
    /// Exactly two levels; the first encodes as 0, the second as 1.
    Binary(Vec<String>),
    /// Levels ordered low to high.
    Ordinal(Vec<String>),
    Categorical(Vec<String>),
}

impl FeatureKind {
    pub fn levels(&self) -> &[String] {
        match self {
            FeatureKind::Numeric => &[],
            FeatureKind::Binary(l) | FeatureKind::Ordinal(l) | FeatureKind::Categorical(l) => l,
        }
    }

    pub fn tag(&self) -> &'static str {
        match self {
            FeatureKind::Numeric => "numeric",
            FeatureKind::Binary(_) => "binary",
            FeatureKind::Ordinal(_) => "ordinal",
            FeatureKind::Categorical(_) => "categorical",
        }
    }

    /// Number of encoded columns.
    pub fn width(&self) -> usize {
        match self {
            FeatureKind::Categorical(l) => l.len(),
            _ => 1,
        }
    }

    pub fn level_index(&self, level: &str) -> Option<usize> {
        self.levels().iter().position(|l| l == level)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "FeatureDefRepr", into = "FeatureDefRepr")]
pub struct FeatureDef {
    pub name: String,
    pub kind: FeatureKind,
}

impl FeatureDef {
    pub fn new(name: impl Into<String>, kind: FeatureKind) -> Self {
        Self {
            name: name.into(),
            kind,
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FeatureDefRepr {
    name: String,
    kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    levels: Option<Vec<String>>,
}

impl TryFrom<FeatureDefRepr> for FeatureDef {
    type Error = String;

    fn try_from(r: FeatureDefRepr) -> Result<Self, Self::Error> {
        let levels = || {
            r.levels
                .clone()
                .ok_or_else(|| format!("feature `{}` of kind {} needs levels", r.name, r.kind))
        };
        let kind = match r.kind.as_str() {
            "numeric" => {
                if r.levels.is_some() {
                    return Err(format!("numeric feature `{}` cannot have levels", r.name));
                }
                FeatureKind::Numeric
            }
            "binary" => FeatureKind::Binary(levels()?),
            "ordinal" => FeatureKind::Ordinal(levels()?),
            "categorical" => FeatureKind::Categorical(levels()?),
            other => return Err(format!("unknown feature kind `{other}`")),
        };
        Ok(FeatureDef { name: r.name, kind })
    }
}

impl From<FeatureDef> for FeatureDefRepr {
    fn from(d: FeatureDef) -> Self {
        let levels = match &d.kind {
            FeatureKind::Numeric => None,
            k => Some(k.levels().to_vec()),
        };
        FeatureDefRepr {
            name: d.name,
            kind: d.kind.tag().to_string(),
            levels,
        }
    }
}

/// Ordered feature list plus the antibiotic families used as targets.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "SchemaRepr", into = "SchemaRepr")]
pub struct FeatureSchema {
    features: Vec<FeatureDef>,
    targets: Vec<String>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SchemaRepr {
    features: Vec<FeatureDef>,
    targets: Vec<String>,
}

impl TryFrom<SchemaRepr> for FeatureSchema {
    type Error = DataError;

    fn try_from(r: SchemaRepr) -> Result<Self, Self::Error> {
        FeatureSchema::new(r.features, r.targets)
    }
}

impl From<FeatureSchema> for SchemaRepr {
    fn from(s: FeatureSchema) -> Self {
        SchemaRepr {
            features: s.features,
            targets: s.targets,
        }
    }
}

const GPC_SCHEMA: &str = include_str!("../../assets/gpc.schema.json");
const GNB_SCHEMA: &str = include_str!("../../assets/gnb.schema.json");

impl FeatureSchema {
    pub fn new(features: Vec<FeatureDef>, targets: Vec<String>) -> Result<Self, DataError> {
        if features.is_empty() {
            return Err(DataError::InvalidSchema("no features".into()));
        }
        if targets.is_empty() {
            return Err(DataError::InvalidSchema("no targets".into()));
        }
        let mut names = BTreeSet::new();
        for name in features.iter().map(|f| &f.name).chain(&targets) {
            if name.is_empty() {
                return Err(DataError::InvalidSchema("empty column name".into()));
            }
            if !names.insert(name.as_str()) {
                return Err(DataError::InvalidSchema(format!("duplicate name `{name}`")));
            }
        }
        for f in &features {
            let levels = f.kind.levels();
            if let FeatureKind::Binary(l) = &f.kind {
                if l.len() != 2 {
                    return Err(DataError::InvalidSchema(format!(
                        "binary feature `{}` needs exactly 2 levels",
                        f.name
                    )));
                }
            }
            if !matches!(f.kind, FeatureKind::Numeric) && levels.is_empty() {
                return Err(DataError::InvalidSchema(format!(
                    "feature `{}` has no levels",
                    f.name
                )));
            }
            let distinct: BTreeSet<&String> = levels.iter().collect();
            if distinct.len() != levels.len() {
                return Err(DataError::InvalidSchema(format!(
                    "feature `{}` has duplicate levels",
                    f.name
                )));
            }
            if levels.iter().any(|l| l.is_empty()) {
                return Err(DataError::InvalidSchema(format!(
                    "feature `{}` has an empty level name",
                    f.name
                )));
            }
        }
        Ok(Self { features, targets })
    }

    /// Gram-positive cocci schema (six antibiotic families).
    pub fn gpc() -> Self {
        Self::from_json(GPC_SCHEMA).expect("bundled GPC schema is valid")
    }

    /// Gram-negative bacilli schema (nine antibiotic families).
    pub fn gnb() -> Self {
        Self::from_json(GNB_SCHEMA).expect("bundled GNB schema is valid")
    }

    /// Bundled schema by name (`gpc` or `gnb`).
    pub fn builtin(name: &str) -> Option<Self> {
        match name {
            "gpc" => Some(Self::gpc()),
            "gnb" => Some(Self::gnb()),
            _ => None,
        }
    }

    pub fn from_json(text: &str) -> Result<Self, DataError> {
        serde_json::from_str(text).map_err(|e| DataError::InvalidSchema(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("schema serializes")
    }

    pub fn features(&self) -> &[FeatureDef] {
        &self.features
    }

    pub fn targets(&self) -> &[String] {
        &self.targets
    }

    pub fn feature_index(&self, name: &str) -> Option<usize> {
        self.features.iter().position(|f| f.name == name)
    }

    pub fn target_index(&self, name: &str) -> Option<usize> {
        self.targets.iter().position(|t| t == name)
    }

    /// Total encoded width.
    pub fn encoded_width(&self) -> usize {
        self.features.iter().map(|f| f.kind.width()).sum()
    }
}
