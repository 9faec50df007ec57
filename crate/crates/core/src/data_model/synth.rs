use std::collections::BTreeMap;

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::{
    Cell, DataError, Dataset, Encoder, FeatureKind, FeatureSchema, Label, NumericRange,
    PatientRecord,
};
use crate::seed;

/// Marginal distribution of one feature.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Marginal {
    /// Normal(mean, std) truncated to `[min, max]`, rounded to an integer.
    Numeric {
        mean: f64,
        std: f64,
        min: f64,
        max: f64,
    },
    /// Level name to probability; absent levels have probability 0.
    Levels(BTreeMap<String, f64>),
}

/// Per-feature marginals, as read from a marginals JSON file.
pub type Marginals = BTreeMap<String, Marginal>;

/// Bundled cohort marginals by name (`gpc` or `gnb`).
pub fn builtin_marginals(name: &str) -> Option<Marginals> {
    let text = match name {
        "gpc" => include_str!("../../assets/gpc.marginals.json"),
        "gnb" => include_str!("../../assets/gnb.marginals.json"),
        _ => return None,
    };
    Some(serde_json::from_str(text).expect("bundled marginals parse"))
}

/// How synthetic labels are produced.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum LabelRule {
    /// Every family: Resistant with probability `p`, independent of features.
    IndependentBernoulli { p: f64 },
    /// Every family: Resistant with probability `sigmoid(bias + Σ w·x)` over
    /// encoded columns (keyed as `feature` or `feature=level`), then each
    /// label flipped with probability `flip_rate`.
    PlantedLogistic {
        weights: BTreeMap<String, f64>,
        bias: f64,
        flip_rate: f64,
    },
    /// Records whose `feature` equals `level` get `forced` for `family`; all
    /// other labels are Resistant with probability `base_p`.
    IntrinsicRule {
        family: String,
        feature: String,
        level: String,
        forced: Label,
        base_p: f64,
    },
}

enum Sampler {
    Numeric(Normal<f64>, f64, f64),
    Levels(Vec<f64>),
}

fn samplers(schema: &FeatureSchema, marginals: &Marginals) -> Result<Vec<Sampler>, DataError> {
    if let Some(extra) = marginals.keys().find(|k| schema.feature_index(k).is_none()) {
        return Err(DataError::InvalidMarginals(format!("unknown feature `{extra}`")));
    }
    schema
        .features()
        .iter()
        .map(|def| {
            let m = marginals
                .get(&def.name)
                .ok_or_else(|| DataError::InvalidMarginals(format!("no marginal for `{}`", def.name)))?;
            match (&def.kind, m) {
                (FeatureKind::Numeric, Marginal::Numeric { mean, std, min, max }) => {
                    if !(std.is_finite() && *std >= 0.0 && min <= max && mean.is_finite()) {
                        return Err(DataError::InvalidMarginals(format!(
                            "bad numeric marginal for `{}`",
                            def.name
                        )));
                    }
                    let normal = Normal::new(*mean, *std)
                        .map_err(|e| DataError::InvalidMarginals(e.to_string()))?;
                    Ok(Sampler::Numeric(normal, *min, *max))
                }
                (FeatureKind::Numeric, _) | (_, Marginal::Numeric { .. }) => Err(
                    DataError::InvalidMarginals(format!("marginal kind mismatch for `{}`", def.name)),
                ),
                (kind, Marginal::Levels(probs)) => {
                    if let Some(bad) = probs.keys().find(|l| kind.level_index(l).is_none()) {
                        return Err(DataError::InvalidMarginals(format!(
                            "unknown level `{bad}` for `{}`",
                            def.name
                        )));
                    }
                    let p: Vec<f64> = kind
                        .levels()
                        .iter()
                        .map(|l| probs.get(l).copied().unwrap_or(0.0))
                        .collect();
                    let total: f64 = p.iter().sum();
                    if p.iter().any(|&v| !(v >= 0.0)) || (total - 1.0).abs() > 1e-9 {
                        return Err(DataError::BadProbabilities(def.name.clone()));
                    }
                    Ok(Sampler::Levels(p))
                }
            }
        })
        .collect()
}

fn draw_level(probs: &[f64], rng: &mut impl Rng) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for (k, &p) in probs.iter().enumerate() {
        acc += p;
        if u < acc {
            return k;
        }
    }
    // rounding left u above the running total: take the last possible level
    probs.iter().rposition(|&p| p > 0.0).unwrap_or(0)
}

fn check_probability(name: &str, p: f64) -> Result<(), DataError> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(DataError::InvalidRule(format!("{name} must lie in [0, 1], got {p}")))
    }
}

enum CompiledRule {
    Bernoulli(f64),
    Logistic {
        encoder: Encoder,
        weights: Vec<f64>,
        bias: f64,
        flip_rate: f64,
    },
    Intrinsic {
        family: usize,
        feature: usize,
        level: usize,
        forced: Label,
        base_p: f64,
    },
}

fn compile(
    rule: &LabelRule,
    schema: &FeatureSchema,
    marginals: &Marginals,
) -> Result<CompiledRule, DataError> {
    match rule {
        LabelRule::IndependentBernoulli { p } => {
            check_probability("p", *p)?;
            Ok(CompiledRule::Bernoulli(*p))
        }
        LabelRule::PlantedLogistic {
            weights,
            bias,
            flip_rate,
        } => {
            check_probability("flip_rate", *flip_rate)?;
            let ranges: Vec<NumericRange> = schema
                .features()
                .iter()
                .filter(|d| matches!(d.kind, FeatureKind::Numeric))
                .map(|d| match marginals.get(&d.name) {
                    Some(Marginal::Numeric { min, max, .. }) => Ok(NumericRange {
                        min: *min,
                        max: *max,
                    }),
                    _ => Err(DataError::InvalidMarginals(format!("no range for `{}`", d.name))),
                })
                .collect::<Result<_, _>>()?;
            let encoder = Encoder::with_ranges(schema, &ranges)?;
            let keys: Vec<String> = encoder.columns().iter().map(|c| c.key()).collect();
            if let Some(bad) = weights.keys().find(|k| !keys.contains(k)) {
                return Err(DataError::InvalidRule(format!("unknown column `{bad}`")));
            }
            let w = keys
                .iter()
                .map(|k| weights.get(k).copied().unwrap_or(0.0))
                .collect();
            Ok(CompiledRule::Logistic {
                encoder,
                weights: w,
                bias: *bias,
                flip_rate: *flip_rate,
            })
        }
        LabelRule::IntrinsicRule {
            family,
            feature,
            level,
            forced,
            base_p,
        } => {
            check_probability("base_p", *base_p)?;
            let family = schema
                .target_index(family)
                .ok_or_else(|| DataError::InvalidRule(format!("unknown family `{family}`")))?;
            let fi = schema
                .feature_index(feature)
                .ok_or_else(|| DataError::InvalidRule(format!("unknown feature `{feature}`")))?;
            let level = schema.features()[fi]
                .kind
                .level_index(level)
                .ok_or_else(|| DataError::InvalidRule(format!("unknown level `{level}`")))?;
            Ok(CompiledRule::Intrinsic {
                family,
                feature: fi,
                level,
                forced: *forced,
                base_p: *base_p,
            })
        }
    }
}

/// Samples `n` records with independent features drawn from `marginals` and
/// labels from `rule`. A single seeded stream is consumed record by record
/// (features in schema order, then one draw per family), so the output is a
/// pure function of the inputs.
pub fn synthesize(
    schema: &FeatureSchema,
    marginals: &Marginals,
    rule: &LabelRule,
    n: usize,
    seed: u64,
) -> Result<Dataset, DataError> {
    if n == 0 {
        return Err(DataError::TooFewRecords { have: 0, need: 1 });
    }
    let samplers = samplers(schema, marginals)?;
    let rule = compile(rule, schema, marginals)?;
    let mut rng = seed::rng(seed);
    let n_targets = schema.targets().len();

    let mut records = Vec::with_capacity(n);
    for _ in 0..n {
        let values: Vec<Cell> = samplers
            .iter()
            .map(|s| match s {
                Sampler::Numeric(normal, min, max) => {
                    let v = if min == max {
                        *min
                    } else {
                        loop {
                            let v = normal.sample(&mut rng);
                            if (*min..=*max).contains(&v) {
                                break v;
                            }
                        }
                    };
                    Cell::Number(v.round().clamp(min.ceil(), max.floor().max(min.ceil())))
                }
                Sampler::Levels(p) => Cell::Level(draw_level(p, &mut rng)),
            })
            .collect();
        let mut record = PatientRecord {
            values,
            labels: vec![None; n_targets],
        };
        for t in 0..n_targets {
            let resistant = match &rule {
                CompiledRule::Bernoulli(p) => rng.random_bool(*p),
                CompiledRule::Logistic {
                    encoder,
                    weights,
                    bias,
                    flip_rate,
                } => {
                    let x = encoder.encode_record(schema, &record);
                    let z = bias + x.iter().zip(weights).map(|(a, w)| a * w).sum::<f64>();
                    let p = 1.0 / (1.0 + (-z).exp());
                    let label = rng.random_bool(p);
                    label ^ rng.random_bool(*flip_rate)
                }
                CompiledRule::Intrinsic {
                    family,
                    feature,
                    level,
                    forced,
                    base_p,
                } => {
                    let draw = rng.random_bool(*base_p);
                    if t == *family && record.values[*feature] == Cell::Level(*level) {
                        forced.is_resistant()
                    } else {
                        draw
                    }
                }
            };
            record.labels[t] = Some(Label::from_bool(resistant));
        }
        records.push(record);
    }
    Dataset::new(schema.clone(), records)
}
