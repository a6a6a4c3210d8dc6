//! Request bodies, validated field by field so a 400 can say what is wrong
//! where.

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::annealer::{profile_from_name, LuminanceProfile, OptimizerConfig};
use crate::colormap::Colormap;
use crate::cvd::CvdModel;
use crate::io::ColormapDocument;
use crate::preference::{Edit, PreferenceShelf};
use crate::service::jobs::{JobKind, JobSpec};

pub const ALLOWED_COUNTS: [usize; 3] = [1, 3, 5];

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FieldError {
    pub field: String,
    pub message: String,
}

impl FieldError {
    fn new(field: &str, message: impl Into<String>) -> Self {
        FieldError {
            field: field.to_string(),
            message: message.into(),
        }
    }
}

pub type Checked<T> = Result<T, Vec<FieldError>>;

fn field<T: DeserializeOwned>(body: &Value, name: &str, errors: &mut Vec<FieldError>) -> Option<T> {
    let v = body.get(name)?;
    if v.is_null() {
        return None;
    }
    match serde_json::from_value(v.clone()) {
        Ok(t) => Some(t),
        Err(e) => {
            errors.push(FieldError::new(name, e.to_string()));
            None
        }
    }
}

fn object(body: &Value) -> Checked<()> {
    if body.is_object() {
        Ok(())
    } else {
        Err(vec![FieldError::new("", "request body must be a JSON object")])
    }
}

/// Accepts `"diverging-inv"` or `{"kind": "linear", "n": 25, ...}` with any
/// of `inverted`, `n`, `l_min`, `l_max` omitted.
fn profile(v: &Value) -> Result<LuminanceProfile, String> {
    #[derive(Deserialize)]
    #[serde(deny_unknown_fields)]
    struct Parts {
        kind: String,
        #[serde(default)]
        inverted: Option<bool>,
        n: Option<usize>,
        l_min: Option<f64>,
        l_max: Option<f64>,
    }
    match v {
        Value::String(name) => profile_from_name(name, None, None, None).map_err(|e| e.to_string()),
        Value::Object(_) => {
            let p: Parts = serde_json::from_value(v.clone()).map_err(|e| e.to_string())?;
            let mut profile = profile_from_name(&p.kind, p.n, p.l_min, p.l_max).map_err(|e| e.to_string())?;
            if let Some(inv) = p.inverted {
                profile = profile.with_inverted(inv || profile.inverted());
            }
            Ok(profile)
        }
        _ => Err("profile must be a name or an object".into()),
    }
}

/// Applies `config` overrides and the `cvd`, `colorfulness` and `quality`
/// shorthands onto `base`.
fn config(body: &Value, base: OptimizerConfig, errors: &mut Vec<FieldError>) -> OptimizerConfig {
    let mut cfg = base;
    if let Some(overrides) = body.get("config").filter(|v| !v.is_null()) {
        let mut merged = serde_json::to_value(&cfg).expect("configs serialize");
        match overrides {
            Value::Object(o) => {
                for (k, v) in o {
                    // The CVD model also takes the "deutan:0.8" text form.
                    let v = match (k.as_str(), v) {
                        ("cvd", Value::String(s)) => match s.parse::<CvdModel>() {
                            Ok(m) => serde_json::to_value(m).expect("models serialize"),
                            Err(e) => {
                                errors.push(FieldError::new("config.cvd", e.to_string()));
                                continue;
                            }
                        },
                        _ => v.clone(),
                    };
                    if k == "weights" {
                        if let (Some(dst), Value::Object(src)) = (merged["weights"].as_object_mut(), &v) {
                            for (wk, wv) in src {
                                dst.insert(wk.clone(), wv.clone());
                            }
                            continue;
                        }
                    }
                    merged[k] = v;
                }
                match serde_json::from_value::<OptimizerConfig>(merged) {
                    Ok(c) => cfg = c,
                    Err(e) => errors.push(FieldError::new("config", e.to_string())),
                }
            }
            _ => errors.push(FieldError::new("config", "config must be an object")),
        }
    }
    if let Some(s) = field::<String>(body, "cvd", errors) {
        match s.parse::<CvdModel>() {
            Ok(m) => cfg.cvd = m,
            Err(e) => errors.push(FieldError::new("cvd", e.to_string())),
        }
    }
    if let Some(c) = field::<f64>(body, "colorfulness", errors) {
        if (0.0..=1.0).contains(&c) {
            cfg.weights = cfg.weights.with_coarse_smoothness(c);
        } else {
            errors.push(FieldError::new("colorfulness", format!("must be in [0, 1], got {c}")));
        }
    }
    if let Some(q) = field::<f64>(body, "quality", errors) {
        if q > 0.0 && q.is_finite() {
            cfg.iter_count = ((cfg.iter_count as f64 * q).round() as usize).max(1);
        } else {
            errors.push(FieldError::new("quality", format!("must be > 0, got {q}")));
        }
    }
    if let Err(e) = cfg.validate() {
        errors.push(FieldError::new("config", e.to_string()));
    }
    cfg
}

fn fresh_seed() -> u64 {
    // Kept below 2^53 so browser clients can echo it back unchanged.
    u64::from(rand::random::<u32>())
}

fn seed_given(body: &Value) -> bool {
    body.get("config").and_then(|c| c.get("seed")).is_some_and(|s| !s.is_null())
}

/// `POST /api/generate`: one spec per requested run, seeds distinct.
pub fn generate(body: &Value) -> Checked<Vec<JobSpec>> {
    object(body)?;
    let mut errors = Vec::new();
    let profile = match body.get("profile") {
        None | Some(Value::Null) => {
            errors.push(FieldError::new("profile", "required"));
            None
        }
        Some(v) => profile(v).map_err(|m| errors.push(FieldError::new("profile", m))).ok(),
    };
    let shelf: PreferenceShelf = field(body, "shelf", &mut errors).unwrap_or_default();
    let count: usize = field(body, "count", &mut errors).unwrap_or(1);
    if !ALLOWED_COUNTS.contains(&count) {
        errors.push(FieldError::new("count", format!("must be one of 1, 3, 5; got {count}")));
    }
    let mut cfg = config(body, OptimizerConfig::default(), &mut errors);
    if !errors.is_empty() {
        return Err(errors);
    }
    if !seed_given(body) {
        cfg.seed = fresh_seed();
    }
    let profile = profile.expect("checked above");
    Ok((0..count as u64)
        .map(|k| JobSpec {
            kind: JobKind::Generate,
            profile,
            config: OptimizerConfig {
                seed: cfg.seed.wrapping_add(k),
                ..cfg.clone()
            },
            shelf: shelf.clone(),
            initial: None,
        })
        .collect())
}

/// `POST /api/refine`: the previous document, an optional replacement
/// shelf and edits to absorb, warm-started from the document's map.
pub fn refine(body: &Value) -> Checked<JobSpec> {
    object(body)?;
    let mut errors = Vec::new();
    let doc: Option<ColormapDocument> = field(body, "document", &mut errors);
    if body.get("document").is_none() {
        errors.push(FieldError::new("document", "required"));
    }
    let shelf: Option<PreferenceShelf> = field(body, "shelf", &mut errors);
    let edits: Vec<Edit> = field(body, "edits", &mut errors).unwrap_or_default();
    let restart = body.get("restart").and_then(Value::as_bool).unwrap_or(false);

    let Some(doc) = doc else {
        return Err(errors);
    };
    let Some(profile) = doc.colormap.profile().copied() else {
        errors.push(FieldError::new("document.profile", "refinement needs a profile-pinned colormap"));
        return Err(errors);
    };
    let mut shelf = shelf.unwrap_or_else(|| doc.shelf.clone());
    for (i, e) in edits.iter().enumerate() {
        match shelf.absorb_edit(e) {
            Ok(s) => shelf = s,
            Err(err) => errors.push(FieldError::new(&format!("edits[{i}]"), err.to_string())),
        }
    }
    let mut base = OptimizerConfig::default();
    if let Some(snap) = &doc.config {
        base.seed = snap.seed;
        base.weights = snap.weights;
        base.cvd = snap.cvd.clone();
    }
    let cfg = config(body, base, &mut errors);
    if !errors.is_empty() {
        return Err(errors);
    }
    Ok(JobSpec {
        kind: JobKind::Refine,
        profile,
        config: cfg,
        shelf,
        // "restart": true runs a full cycle from a random start instead.
        initial: (!restart).then_some(doc.colormap),
    })
}

/// `POST /api/evaluate`: a document (or bare colormap) and an optional CVD
/// spec, text or object.
pub fn evaluate(body: &Value) -> Checked<(Colormap, CvdModel)> {
    object(body)?;
    let mut errors = Vec::new();
    let doc: Option<ColormapDocument> = field(body, "document", &mut errors);
    if body.get("document").is_none() {
        errors.push(FieldError::new("document", "required"));
    }
    let model = match body.get("cvd") {
        None | Some(Value::Null) => doc
            .as_ref()
            .and_then(|d| d.config.as_ref())
            .map(|c| c.cvd.clone())
            .unwrap_or_default(),
        Some(Value::String(s)) => s.parse().unwrap_or_else(|e: crate::Error| {
            errors.push(FieldError::new("cvd", e.to_string()));
            CvdModel::default()
        }),
        Some(v) => serde_json::from_value(v.clone()).unwrap_or_else(|e| {
            errors.push(FieldError::new("cvd", e.to_string()));
            CvdModel::default()
        }),
    };
    match (doc, errors.is_empty()) {
        (Some(d), true) => Ok((d.colormap, model)),
        _ => Err(errors),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn generate_defaults_and_distinct_seeds() {
        let specs = generate(&json!({"profile": "linear", "count": 5})).unwrap();
        assert_eq!(specs.len(), 5);
        let mut seeds: Vec<u64> = specs.iter().map(|s| s.config.seed).collect();
        seeds.sort();
        seeds.dedup();
        assert_eq!(seeds.len(), 5);
        assert!(specs[0].shelf.is_empty());
        assert_eq!(specs[0].profile.len(), 25);
    }

    #[test]
    fn generate_reports_each_bad_field() {
        let errs = generate(&json!({"profile": "spiral", "count": 4, "shelf": 3})).unwrap_err();
        let fields: Vec<&str> = errs.iter().map(|e| e.field.as_str()).collect();
        assert!(fields.contains(&"profile"));
        assert!(fields.contains(&"count"));
        assert!(fields.contains(&"shelf"));
        assert_eq!(generate(&json!({})).unwrap_err()[0].field, "profile");
        assert_eq!(generate(&json!([1])).unwrap_err()[0].field, "");
    }

    #[test]
    fn config_overrides_merge() {
        let specs = generate(&json!({
            "profile": {"kind": "diverging", "n": 21, "l_min": 10},
            "config": {"seed": 9, "iter_count": 100, "cvd": "protan:0.5", "weights": {"k": 50}},
            "colorfulness": 0.9,
        }))
        .unwrap();
        let c = &specs[0].config;
        assert_eq!(c.seed, 9);
        assert_eq!(c.iter_count, 100);
        assert_eq!(c.weights.k, 50.0);
        assert_eq!(c.weights.smoothness_coarse, 0.9);
        assert_eq!(c.weights.uniformity, 0.85);
        assert_eq!(c.cvd.severity(), 0.5);
        assert_eq!(specs[0].profile.len(), 21);
        assert_eq!(specs[0].profile.l_min(), 10.0);

        let errs = generate(&json!({"profile": "linear", "config": {"alpha": 2.0}})).unwrap_err();
        assert_eq!(errs[0].field, "config");
    }

    #[test]
    fn evaluate_needs_a_document() {
        assert_eq!(evaluate(&json!({"cvd": "deutan"})).unwrap_err()[0].field, "document");
    }
}
