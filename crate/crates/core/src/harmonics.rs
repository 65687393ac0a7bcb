//! Real orthonormal spherical harmonics on S² and their circle analogue.

use std::f64::consts::PI;

use crate::error::{EitError, Result};
use crate::mesh::Point;

/// Fully normalized associated Legendre values `N_n^m P_n^m(x)` (no
/// Condon–Shortley phase) for a fixed `m ≥ 0`, returned for degrees `m..=n`,
/// where `N_n^m = sqrt((2n+1)/(4π) (n−m)!/(n+m)!)`.
///
/// Uses the standard upward recurrence in `n`, which never forms factorials.
fn normalized_legendre(n: usize, m: usize, x: f64) -> f64 {
    let s = (1.0 - x * x).max(0.0).sqrt();
    let mut pmm = 1.0 / (4.0 * PI).sqrt();
    for k in 1..=m {
        let k = k as f64;
        pmm *= ((2.0 * k + 1.0) / (2.0 * k)).sqrt() * s;
    }
    if n == m {
        return pmm;
    }
    let mut p_prev = pmm;
    let mut p = (2.0 * m as f64 + 3.0).sqrt() * x * pmm;
    let mf = m as f64;
    for l in (m + 2)..=n {
        let lf = l as f64;
        let a = ((4.0 * lf * lf - 1.0) / (lf * lf - mf * mf)).sqrt();
        let b =
            (((lf - 1.0) * (lf - 1.0) - mf * mf) / (4.0 * (lf - 1.0) * (lf - 1.0) - 1.0)).sqrt();
        let next = a * (x * p - b * p_prev);
        p_prev = p;
        p = next;
    }
    p
}

/// Real spherical harmonic `Ỹ_n^m` at the direction of `p` (normalized
/// internally): `√2 N P_n^m cos(mφ)` for `m > 0`, `N P_n^0` for `m = 0` and
/// `√2 N P_n^|m| sin(|m|φ)` for `m < 0`. Orthonormal in `L²(S²)`.
pub fn real_spherical_harmonic(n: usize, m: i32, p: &Point) -> Result<f64> {
    if m.unsigned_abs() as usize > n {
        return Err(EitError::InvalidParameter(format!(
            "order {m} exceeds degree {n}"
        )));
    }
    let r = (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt();
    if r == 0.0 {
        return Err(EitError::InvalidParameter(
            "direction of the zero vector".into(),
        ));
    }
    let z = (p[2] / r).clamp(-1.0, 1.0);
    let phi = p[1].atan2(p[0]);
    let am = m.unsigned_abs() as usize;
    let leg = normalized_legendre(n, am, z);
    Ok(match m {
        0 => leg,
        m if m > 0 => 2f64.sqrt() * leg * (am as f64 * phi).cos(),
        _ => 2f64.sqrt() * leg * (am as f64 * phi).sin(),
    })
}

/// Orthonormal circle harmonics in `L²(S¹)`: `cos(nθ)/√π` for `m = n`,
/// `sin(nθ)/√π` for `m = −n`, `1/√(2π)` for `n = m = 0`.
pub fn circular_harmonic(n: usize, m: i32, p: &Point) -> Result<f64> {
    let theta = p[1].atan2(p[0]);
    let nf = n as f64;
    match (n, m) {
        (0, 0) => Ok(1.0 / (2.0 * PI).sqrt()),
        (n, m) if n > 0 && m == n as i32 => Ok((nf * theta).cos() / PI.sqrt()),
        (n, m) if n > 0 && m == -(n as i32) => Ok((nf * theta).sin() / PI.sqrt()),
        _ => Err(EitError::InvalidParameter(format!(
            "circle harmonic order must be ±degree, got n={n}, m={m}"
        ))),
    }
}

/// Orders used for degree `n` in dimension `dim`: all `−n..=n` on the sphere,
/// `{n, −n}` on the circle.
pub fn orders(dim: usize, n: usize) -> Vec<i32> {
    let n = n as i32;
    if dim == 2 {
        vec![n, -n]
    } else {
        (-n..=n).collect()
    }
}

/// Dimension-dispatching harmonic on the unit sphere/circle.
pub fn boundary_harmonic(dim: usize, n: usize, m: i32, p: &Point) -> Result<f64> {
    if dim == 2 {
        circular_harmonic(n, m, p)
    } else {
        real_spherical_harmonic(n, m, p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dirs() -> Vec<Point> {
        (0..40)
            .map(|i| {
                let t = i as f64;
                let th = (t * 0.731).rem_euclid(PI);
                let ph = t * 1.93;
                [th.sin() * ph.cos(), th.sin() * ph.sin(), th.cos()]
            })
            .collect()
    }

    #[test]
    fn matches_closed_forms() {
        let c1 = (3.0 / (4.0 * PI)).sqrt();
        for p in dirs() {
            let [x, y, z] = p;
            let y00 = real_spherical_harmonic(0, 0, &p).unwrap();
            assert!((y00 - 1.0 / (4.0 * PI).sqrt()).abs() < 1e-15);
            assert!((real_spherical_harmonic(1, 0, &p).unwrap() - c1 * z).abs() < 1e-14);
            assert!((real_spherical_harmonic(1, 1, &p).unwrap() - c1 * x).abs() < 1e-14);
            assert!((real_spherical_harmonic(1, -1, &p).unwrap() - c1 * y).abs() < 1e-14);
            let y20 = (5.0 / (16.0 * PI)).sqrt() * (3.0 * z * z - 1.0);
            assert!((real_spherical_harmonic(2, 0, &p).unwrap() - y20).abs() < 1e-14);
            let y22 = (15.0 / (16.0 * PI)).sqrt() * (x * x - y * y);
            assert!((real_spherical_harmonic(2, 2, &p).unwrap() - y22).abs() < 1e-14);
            let y2m2 = (15.0 / (4.0 * PI)).sqrt() * x * y;
            assert!((real_spherical_harmonic(2, -2, &p).unwrap() - y2m2).abs() < 1e-14);
            let y21 = (15.0 / (4.0 * PI)).sqrt() * x * z;
            assert!((real_spherical_harmonic(2, 1, &p).unwrap() - y21).abs() < 1e-14);
            let y30 = (7.0 / (16.0 * PI)).sqrt() * (5.0 * z * z * z - 3.0 * z);
            assert!((real_spherical_harmonic(3, 0, &p).unwrap() - y30).abs() < 1e-14);
            let y33 = (35.0 / (32.0 * PI)).sqrt() * (x * x * x - 3.0 * x * y * y);
            assert!((real_spherical_harmonic(3, 3, &p).unwrap() - y33).abs() < 1e-13);
        }
    }

    #[test]
    fn rejects_order_above_degree() {
        assert!(real_spherical_harmonic(2, 3, &[0.0, 0.0, 1.0]).is_err());
        assert!(real_spherical_harmonic(2, -3, &[0.0, 0.0, 1.0]).is_err());
        assert!(circular_harmonic(2, 1, &[1.0, 0.0, 0.0]).is_err());
    }

    #[test]
    fn orthonormal_by_lebedev_free_quadrature() {
        // product Gauss-Legendre in cos θ (via midpoint refinement) × uniform φ
        let nt = 400;
        let np = 200;
        let mut gram = vec![vec![0.0; 9]; 9];
        let idx: Vec<(usize, i32)> = (0..=2)
            .flat_map(|n| orders(3, n).into_iter().map(move |m| (n, m)))
            .collect();
        for it in 0..nt {
            let z = -1.0 + (it as f64 + 0.5) * 2.0 / nt as f64;
            let s = (1.0 - z * z).sqrt();
            for ip in 0..np {
                let ph = (ip as f64 + 0.5) * 2.0 * PI / np as f64;
                let p = [s * ph.cos(), s * ph.sin(), z];
                let w = (2.0 / nt as f64) * (2.0 * PI / np as f64);
                let vals: Vec<f64> = idx
                    .iter()
                    .map(|&(n, m)| real_spherical_harmonic(n, m, &p).unwrap())
                    .collect();
                for a in 0..9 {
                    for b in 0..9 {
                        gram[a][b] += w * vals[a] * vals[b];
                    }
                }
            }
        }
        for a in 0..9 {
            for b in 0..9 {
                let e = if a == b { 1.0 } else { 0.0 };
                assert!((gram[a][b] - e).abs() < 1e-4, "{a},{b}: {}", gram[a][b]);
            }
        }
    }
}
