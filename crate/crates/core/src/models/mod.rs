//! Built-in models, their catalog and JSON model files.

pub mod ads;
pub mod asympt_ads;
pub mod cone_surface;
pub mod cone_triple;
pub mod minkowski;
pub mod quadrature;
pub mod random;
pub mod slit_plane;
pub mod stationary;
pub mod strip;

use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::geometry::SpacetimeModel;

pub const BUILTIN_NAMES: [&str; 9] = [
    "minkowski",
    "ads",
    "ads_conformal",
    "asympt_ads",
    "cone_triple",
    "stationary",
    "product_cone_surface",
    "product_slit_plane",
    "cylinder_strip",
];

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ExpectedValue {
    pub name: String,
    pub value: f64,
    /// How the value is obtained: "closed form" or "quadrature".
    pub origin: String,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CatalogEntry {
    pub name: String,
    pub description: String,
    pub params: Value,
    pub expected_values: Vec<ExpectedValue>,
}

/// JSON model file `{name, dim, params, builtin}`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ModelFile {
    #[serde(default)]
    pub name: Option<String>,
    #[serde(default)]
    pub dim: Option<usize>,
    #[serde(default)]
    pub params: Value,
    pub builtin: String,
}

fn expected(name: &str, value: f64, origin: &str) -> ExpectedValue {
    ExpectedValue { name: name.into(), value, origin: origin.into() }
}

pub fn catalog() -> Vec<CatalogEntry> {
    let zs = quadrature::z_star();
    let ii = |r: f64| (1.0 + r * r).sqrt() / r;
    vec![
        CatalogEntry {
            name: "minkowski".into(),
            description: "Minkowski space R × R^n, optionally restricted to a half-space, ball or Cassini oval".into(),
            params: json!({ "n": 2, "region": { "kind": "full" } }),
            expected_values: vec![expected("ii_ball_r2", 0.5, "closed form")],
        },
        CatalogEntry {
            name: "ads".into(),
            description: "Anti-de Sitter space in static coordinates (t, r, θ)".into(),
            params: json!({ "n": 2, "region": { "kind": "ball", "r0": 1.0 } }),
            expected_values: vec![
                expected("ii_r0.5", ii(0.5), "closed form"),
                expected("ii_r1", ii(1.0), "closed form"),
                expected("ii_r2", ii(2.0), "closed form"),
                expected("ii_r10", ii(10.0), "closed form"),
                expected("delta_t_r2_r10", 10f64.atan() - 2f64.atan(), "closed form"),
            ],
        },
        CatalogEntry {
            name: "ads_conformal".into(),
            description: "Conformal AdS f(z)dt² − dz² − g_S with f(z) = cosh²(z_* − z)".into(),
            params: json!({ "n": 2 }),
            expected_values: vec![
                expected("z_star", zs, "quadrature"),
                expected("f_at_boundary", 1.0, "closed form"),
                expected("f_second_derivative_at_boundary", 2.0, "closed form"),
            ],
        },
        CatalogEntry {
            name: "asympt_ads".into(),
            description: "Asymptotically AdS metric g_AdS + c e^{−r} dt² in the conformal frame".into(),
            params: json!({ "n": 2, "perturbation": asympt_ads::Perturbation::dt2(3, 1.0) }),
            expected_values: vec![expected("boundary_ii", 0.0, "closed form")],
        },
        CatalogEntry {
            name: "cone_triple".into(),
            description: "Cone triple Ω² − F(Πv)² with a Randers norm F".into(),
            params: serde_json::to_value(cone_triple::ConeTripleParams::default()).unwrap_or_default(),
            expected_values: vec![expected("euclidean_root", 1.0, "closed form")],
        },
        CatalogEntry {
            name: "stationary".into(),
            description: "Standard stationary spacetime dt² − 2ω dt − g_S over a disk or Cassini oval".into(),
            params: serde_json::to_value(stationary::StationaryParams::default()).unwrap_or_default(),
            expected_values: vec![expected("fermat_dx_c0.2", 0.2 + (1.0f64 + 0.04).sqrt(), "closed form")],
        },
        CatalogEntry {
            name: "product_cone_surface".into(),
            description: "L × S with S the flat cone without vertex glued by quarter turns".into(),
            params: json!({}),
            expected_values: vec![expected("separation", 0.2, "closed form")],
        },
        CatalogEntry {
            name: "product_slit_plane".into(),
            description: "L × S with S the half-plane x < 1 minus vertical slits, made complete by a conformal factor on thin tubes around the slits with lenses at the tips".into(),
            params: json!({ "K": 24, "kappa": slit_plane::DEFAULT_KAPPA }),
            expected_values: vec![expected("t_limit", 4.0, "closed form")],
        },
        CatalogEntry {
            name: "cylinder_strip".into(),
            description: "The strip I × [−1, 1] of the Lorentz–Minkowski plane".into(),
            params: json!({ "interval": [-10.0, 10.0] }),
            expected_values: vec![expected("classes_per_interior_point", 2.0, "closed form")],
        },
    ]
}

fn get<T: serde::de::DeserializeOwned>(params: &Value, key: &str, default: T) -> Result<T> {
    match params.get(key) {
        Some(v) => serde_json::from_value(v.clone()).map_err(|e| Error::Config(format!("parameter {key}: {e}"))),
        None => Ok(default),
    }
}

/// Construct a built-in model from its name and parameter record.
pub fn build(builtin: &str, params: &Value) -> Result<SpacetimeModel> {
    let params = if params.is_null() { &json!({}) } else { params };
    match builtin {
        "minkowski" => Ok(minkowski::make_minkowski(
            get(params, "n", 2)?,
            get(params, "region", minkowski::Region::Full)?,
        )),
        "ads" => Ok(ads::make_ads(get(params, "n", 2)?, get(params, "region", ads::AdsRegion::Full)?)),
        "ads_conformal" => Ok(ads::make_ads_conformal(get(params, "n", 2)?)),
        "asympt_ads" => {
            let n: usize = get(params, "n", 2)?;
            asympt_ads::make_asympt_ads(n, get(params, "perturbation", asympt_ads::Perturbation::dt2(n + 1, 1.0))?)
        }
        "cone_triple" => Ok(cone_triple::make_cone_triple(&serde_json::from_value(params.clone())?)),
        "stationary" => Ok(stationary::make_stationary(&serde_json::from_value(params.clone())?)),
        "product_cone_surface" => Ok(cone_surface::make_product_cone_surface()),
        "product_slit_plane" => {
            slit_plane::make_product_slit_plane_with(get(params, "K", 24)?, get(params, "kappa", slit_plane::DEFAULT_KAPPA)?)
        }
        "cylinder_strip" => {
            let i: [f64; 2] = get(params, "interval", [-10.0, 10.0])?;
            Ok(strip::make_cylinder_strip((i[0], i[1])))
        }
        other => Err(Error::Config(format!("unknown built-in model {other:?}"))),
    }
}

pub fn from_model_file(file: &ModelFile) -> Result<SpacetimeModel> {
    let mut m = build(&file.builtin, &file.params)?;
    if let Some(d) = file.dim {
        if d != m.dim {
            return Err(Error::Config(format!("model file declares dim {d}, built-in has {}", m.dim)));
        }
    }
    if let Some(name) = &file.name {
        m.name = name.clone();
    }
    Ok(m)
}

/// Load a model from a JSON file, or from a bare built-in name.
pub fn load_model(spec: &str) -> Result<SpacetimeModel> {
    if BUILTIN_NAMES.contains(&spec) {
        return build(spec, &Value::Null);
    }
    let text = std::fs::read_to_string(Path::new(spec))?;
    let file: ModelFile = serde_json::from_str(&text)?;
    from_model_file(&file)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_catalog_entry_builds() {
        for e in catalog() {
            let m = build(&e.name, &e.params).unwrap();
            assert!(m.dim >= 2, "{}", e.name);
        }
        assert_eq!(catalog().len(), BUILTIN_NAMES.len());
    }

    #[test]
    fn model_file_round_trip() {
        let f: ModelFile = serde_json::from_str(
            r#"{"name": "disk", "dim": 3, "builtin": "minkowski", "params": {"n": 2, "region": {"kind": "ball", "radius": 2.0}}}"#,
        )
        .unwrap();
        let m = from_model_file(&f).unwrap();
        assert_eq!(m.name, "disk");
        assert_eq!(m.b(&[0.0, 2.0, 0.0]), Some(0.0));
        assert!(build("nope", &Value::Null).is_err());
    }
}
