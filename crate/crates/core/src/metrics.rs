//! Error measures for reconstructions against a known conductivity.

use crate::fem::FemSpace;

/// `‖a − b‖_{L²} / ‖b‖_{L²}` for P1 fields, with the consistent mass matrix.
pub fn relative_l2_error(space: &FemSpace, a: &[f64], b: &[f64]) -> f64 {
    let diff: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    let m = space.mass();
    (m.inner(&diff, &diff) / m.inner(b, b)).sqrt()
}

/// Node-volume weighted mean of `values` over the vertices where `mask` holds.
/// `None` for an empty mask.
pub fn masked_mean(space: &FemSpace, values: &[f64], mask: &[bool]) -> Option<f64> {
    let vol = space.node_volumes();
    let (mut acc, mut weight) = (0.0, 0.0);
    for ((&x, &w), &inside) in values.iter().zip(vol).zip(mask) {
        if inside {
            acc += w * x;
            weight += w;
        }
    }
    (weight > 0.0).then(|| acc / weight)
}
