#![allow(dead_code)]

use rabispec::fockoracle::{build_hamiltonian, eigenvalues, FockModel};

/// Oracle energies inside `[lo, hi]`, with levels closer than 1e-9 to either
/// edge dropped (the method scan may legitimately place them just outside).
pub fn oracle_window(model: FockModel, n: usize, lo: f64, hi: f64) -> Vec<f64> {
    let op = build_hamiltonian(model, n).unwrap();
    eigenvalues(&op, op.dim)
        .unwrap()
        .into_iter()
        .filter(|e| *e >= lo + 1e-9 && *e <= hi - 1e-9)
        .collect()
}

/// Largest distance between paired entries of two sorted lists of equal
/// length, or `None` if the lengths differ.
pub fn paired_max_diff(method: &[f64], oracle: &[f64]) -> Option<f64> {
    if method.len() != oracle.len() {
        return None;
    }
    Some(method.iter().zip(oracle).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
}

/// Method energies with multiplicity restricted to `[lo, hi]` (with the same
/// edge margin as the oracle window).
pub fn within(values: &[f64], lo: f64, hi: f64) -> Vec<f64> {
    values.iter().copied().filter(|e| *e >= lo + 1e-9 && *e <= hi - 1e-9).collect()
}
