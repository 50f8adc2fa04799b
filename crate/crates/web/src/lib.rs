//! Browser bindings. Every function returns a JSON string; failures are
//! reported as `{"error": "..."}`.

use nalgebra::Complex;
use serde_json::{json, Value};
use wasm_bindgen::prelude::wasm_bindgen;

use nullrank::bench::{build_control_case, build_zero_case};
use nullrank::kernels::{generalized_eigenvalues, singular_values};
use nullrank::nullrank::{check_nullrank, CheckOptions};
use nullrank::reductions::system_pencil;
use nullrank::Tolerance;

/// Largest order the page accepts; keeps every request interactive.
pub const MAX_ORDER: usize = 60;

fn tolerance(tol: f64) -> Result<Tolerance, String> {
    if tol >= 0.0 && tol.is_finite() {
        Ok(Tolerance::new(tol))
    } else {
        Err(format!("tolerance must be a nonnegative number, got {tol}"))
    }
}

fn order(n: usize) -> Result<usize, String> {
    if (1..=MAX_ORDER).contains(&n) {
        Ok(n)
    } else {
        Err(format!("order must be between 1 and {MAX_ORDER}, got {n}"))
    }
}

fn respond(v: Result<Value, String>) -> String {
    v.unwrap_or_else(|e| json!({ "error": e })).to_string()
}

/// All five methods on the zero case of order `n` and on a nonzero control.
pub fn check_table(n: usize, seed: u64, tol: f64) -> Result<Value, String> {
    let n = order(n)?;
    let opts = CheckOptions { tol: tolerance(tol)?, seed, ..CheckOptions::default() };
    let cases = [("zero", build_zero_case(n, seed)), ("control", build_control_case(n, seed))];
    let rows: Vec<Value> = cases
        .iter()
        .map(|(name, sys)| {
            let methods: Vec<Value> = check_nullrank(sys, &opts)
                .iter()
                .map(|r| json!({ "method": r.method.id(), "isnull": r.is_null, "evidence": r.evidence.to_string() }))
                .collect();
            json!({ "case": name, "order": sys.order(), "methods": methods })
        })
        .collect();
    Ok(json!({ "n": n, "seed": seed, "rows": rows }))
}

/// Singular values of `S(λ)` for the zero case, with the threshold they are
/// compared against. The normal rank of `S` exceeds the order by rank `G`.
pub fn pencil_spectrum(n: usize, seed: u64, re: f64, im: f64, tol: f64) -> Result<Value, String> {
    let n = order(n)?;
    let tol = tolerance(tol)?;
    if !(re.is_finite() && im.is_finite()) {
        return Err("λ must be finite".into());
    }
    let sys = build_zero_case(n, seed);
    let s = system_pencil(&sys).at(Complex::new(re, im));
    let sv = singular_values(&s);
    let (rows, cols) = s.shape();
    let threshold = tol.threshold(rows, cols, sv.first().copied().unwrap_or(0.0));
    let rank = sv.iter().filter(|&&x| x > threshold).count();
    Ok(json!({
        "order": sys.order(),
        "rows": rows,
        "cols": cols,
        "singular_values": sv,
        "threshold": threshold,
        "rank": rank,
        "rank_g": rank as i64 - sys.order() as i64,
    }))
}

/// Finite poles of the zero case realization and the number of infinite ones.
pub fn poles(n: usize, seed: u64) -> Result<Value, String> {
    let n = order(n)?;
    let sys = build_zero_case(n, seed);
    let ev = generalized_eigenvalues(sys.a(), sys.e()).map_err(|e| e.to_string())?;
    let finite: Vec<[f64; 2]> = ev.finite.iter().map(|z| [z.re, z.im]).collect();
    Ok(json!({ "order": sys.order(), "finite": finite, "infinite": ev.infinite }))
}

#[wasm_bindgen]
pub fn check_zero_case(n: usize, seed: u64, tol: f64) -> String {
    respond(check_table(n, seed, tol))
}

#[wasm_bindgen]
pub fn pencil_singular_values(n: usize, seed: u64, re: f64, im: f64, tol: f64) -> String {
    respond(pencil_spectrum(n, seed, re, im, tol))
}

#[wasm_bindgen]
pub fn pole_map(n: usize, seed: u64) -> String {
    respond(poles(n, seed))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_separates_zero_and_control() {
        let v = check_table(3, 1, 1e-7).unwrap();
        let rows = v["rows"].as_array().unwrap();
        assert_eq!(rows.len(), 2);
        for (row, expect) in rows.iter().zip([true, false]) {
            let methods = row["methods"].as_array().unwrap();
            assert_eq!(methods.len(), 5);
            assert!(methods.iter().all(|m| m["isnull"] == expect), "{row}");
        }
    }

    #[test]
    fn spectrum_shows_rank_deficiency_of_zero_case() {
        let v = pencil_spectrum(4, 0, 0.3, 0.2, 1e-7).unwrap();
        let order = v["order"].as_u64().unwrap() as usize;
        assert_eq!(v["rows"].as_u64().unwrap() as usize, order + 3);
        assert_eq!(v["cols"].as_u64().unwrap() as usize, order + 2);
        assert_eq!(v["singular_values"].as_array().unwrap().len(), order + 2);
        assert_eq!(v["rank"].as_u64().unwrap() as usize, order);
        assert_eq!(v["rank_g"], 0);
    }

    #[test]
    fn poles_cover_the_order() {
        let v = poles(5, 2).unwrap();
        let finite = v["finite"].as_array().unwrap().len();
        let infinite = v["infinite"].as_u64().unwrap() as usize;
        assert_eq!(finite + infinite, v["order"].as_u64().unwrap() as usize);
        // both realizations are conjugates of a stable R: poles lie outside the unit circle
        let moduli: Vec<f64> = v["finite"]
            .as_array()
            .unwrap()
            .iter()
            .map(|z| z[0].as_f64().unwrap().hypot(z[1].as_f64().unwrap()))
            .collect();
        assert!(!moduli.is_empty() && moduli.iter().all(|&r| r > 1.0), "{moduli:?}");
    }

    #[test]
    fn bad_input_is_reported() {
        let out: Value = serde_json::from_str(&check_zero_case(0, 0, 1e-7)).unwrap();
        assert!(out["error"].as_str().unwrap().contains("order"));
        let out: Value = serde_json::from_str(&pencil_singular_values(3, 0, 0.0, 0.0, -1.0)).unwrap();
        assert!(out["error"].is_string());
        let out: Value = serde_json::from_str(&pole_map(3, 0)).unwrap();
        assert!(out.get("error").is_none());
    }
}
