//! Catalog constants computed by quadrature and memoised on disk.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::sync::OnceLock;

use crate::oracle::adaptive_simpson;

/// Environment variable naming a JSON file of memoised constants.
pub const CACHE_ENV: &str = "FINSLER_CONE_CACHE";

/// `z(r) = ∫_2^r ds / (s √(1 + s²))`, computed with `u = 2/s` so the
/// integrand `1/√(u² + 4)` is smooth on the whole range.
pub fn z_of_r(r: f64) -> f64 {
    adaptive_simpson(&|u: f64| 1.0 / (u * u + 4.0).sqrt(), 2.0 / r, 1.0, 1e-15)
}

fn compute_z_star() -> f64 {
    adaptive_simpson(&|u: f64| 1.0 / (u * u + 4.0).sqrt(), 0.0, 1.0, 1e-15)
}

/// `z_* = ∫_2^∞ dr / (r √(1 + r²))`.
pub fn z_star() -> f64 {
    static Z: OnceLock<f64> = OnceLock::new();
    *Z.get_or_init(|| cached("z_star", compute_z_star))
}

fn cached(key: &str, compute: fn() -> f64) -> f64 {
    let Some(path) = std::env::var_os(CACHE_ENV).map(PathBuf::from) else {
        return compute();
    };
    let mut table: BTreeMap<String, f64> = std::fs::read_to_string(&path)
        .ok()
        .and_then(|s| serde_json::from_str(&s).ok())
        .unwrap_or_default();
    if let Some(v) = table.get(key) {
        if v.is_finite() {
            return *v;
        }
    }
    let v = compute();
    table.insert(key.to_string(), v);
    if let Ok(s) = serde_json::to_string_pretty(&table) {
        let _ = std::fs::write(&path, s);
    }
    v
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn z_star_matches_the_antiderivative() {
        // ∫ dr/(r√(1+r²)) = −asinh(1/r)
        assert!((compute_z_star() - 0.5f64.asinh()).abs() < 1e-13);
        assert!((z_of_r(10.0) - (0.5f64.asinh() - 0.1f64.asinh())).abs() < 1e-13);
        assert!(z_of_r(2.0).abs() < 1e-15);
    }
}
