//! Helpers shared by the integration tests. Everything here is independent
//! of the code paths under test.

#![allow(dead_code)]

use attrition::dataset::Matrix;
use attrition::Metric;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const HR_HEADER: &str = "satisfaction_level,last_evaluation,number_project,average_montly_hours,\
time_spend_company,Work_accident,left,promotion_last_5years,department,salary";

const DEPARTMENTS: [&str; 10] = [
    "IT", "RandD", "accounting", "hr", "management", "marketing", "product_mng", "sales", "support",
    "technical",
];

/// HR-shaped CSV with a label that depends on a few features plus noise.
pub fn synthetic_hr_csv(n: usize, seed: u64) -> String {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = String::from(HR_HEADER);
    out.push('\n');
    for _ in 0..n {
        let satisfaction = (rng.gen_range(0.09..1.0f64) * 100.0).round() / 100.0;
        let evaluation = (rng.gen_range(0.36..1.0f64) * 100.0).round() / 100.0;
        let projects = rng.gen_range(2..=7);
        let hours = rng.gen_range(96..=310);
        let years = rng.gen_range(2..=10);
        let accident = u8::from(rng.gen_bool(0.14));
        let promotion = u8::from(rng.gen_bool(0.02));
        let department = DEPARTMENTS[rng.gen_range(0..DEPARTMENTS.len())];
        let salary = ["low", "medium", "high"][rng.gen_range(0..3)];
        let z = -1.0 - 5.0 * (satisfaction - 0.5) + 0.012 * (hours as f64 - 200.0)
            + 0.3 * (years as f64 - 4.0)
            - 1.5 * accident as f64
            - if salary == "high" { 1.0 } else { 0.0 };
        let left = u8::from(rng.gen::<f64>() < 1.0 / (1.0 + (-z).exp()));
        out.push_str(&format!(
            "{satisfaction},{evaluation},{projects},{hours},{years},{accident},{left},{promotion},{department},{salary}\n"
        ));
    }
    out
}

/// Every row against the query, sorted by (distance, row).
pub fn brute_force_knn(points: &Matrix, x: &[f64], k: usize, metric: &Metric) -> Vec<(usize, f64)> {
    let mut all: Vec<(usize, f64)> = (0..points.n_rows())
        .map(|i| (i, minkowski_reference(x, points.row(i), metric)))
        .collect();
    all.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
    all.truncate(k);
    all
}

/// Straight-line distance formula, written out separately from the library.
pub fn minkowski_reference(x: &[f64], y: &[f64], metric: &Metric) -> f64 {
    match *metric {
        Metric::Manhattan => {
            let mut s = 0.0;
            for i in 0..x.len() {
                s += (x[i] - y[i]).abs();
            }
            s
        }
        Metric::Euclidean => {
            let mut s = 0.0;
            for i in 0..x.len() {
                s += (x[i] - y[i]) * (x[i] - y[i]);
            }
            s.sqrt()
        }
        Metric::Minkowski { p } => {
            let mut s = 0.0;
            for i in 0..x.len() {
                s += (x[i] - y[i]).abs().powf(p);
            }
            s.powf(1.0 / p)
        }
    }
}

/// Central difference of `f` at `theta[i]` with step `1e-6 · (1 + |θ_i|)`.
pub fn central_difference(theta: &[f64], i: usize, f: impl Fn(&[f64]) -> f64) -> f64 {
    let h = 1e-6 * (1.0 + theta[i].abs());
    let mut plus = theta.to_vec();
    let mut minus = theta.to_vec();
    plus[i] += h;
    minus[i] -= h;
    (f(&plus) - f(&minus)) / (plus[i] - minus[i])
}

/// Relative error with an absolute floor on the denominator, so components
/// that are essentially zero do not amplify finite-difference round-off.
pub const RELATIVE_ERROR_FLOOR: f64 = 1e-3;

pub fn relative_error(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(RELATIVE_ERROR_FLOOR)
}
