//! Bessel functions of the first kind and Legendre recurrences.

use std::f64::consts::PI;

const ASYMPTOTIC_THRESHOLD: f64 = 25.0;

/// `J_0(x)`.
pub fn bessel_j0(x: f64) -> f64 {
    bessel_j01(x).0
}

/// `J_1(x)`.
pub fn bessel_j1(x: f64) -> f64 {
    bessel_j01(x).1
}

/// `(J_0(x), J_1(x))`.
///
/// Miller backward recurrence normalized by `J_0 + 2 sum J_2k = 1` for
/// moderate arguments; the Hankel asymptotic series beyond
/// `ASYMPTOTIC_THRESHOLD`, where its smallest term is far below `f64` epsilon.
pub fn bessel_j01(x: f64) -> (f64, f64) {
    let ax = x.abs();
    let sign1 = if x < 0.0 { -1.0 } else { 1.0 };
    if ax < 1e-8 {
        return (1.0 - 0.25 * ax * ax, sign1 * 0.5 * ax);
    }
    if ax >= ASYMPTOTIC_THRESHOLD {
        let (j0, j1) = (hankel_asymptotic(0.0, ax), hankel_asymptotic(1.0, ax));
        return (j0, sign1 * j1);
    }
    let start = 2 * ((ax + 30.0 + 6.0 * ax.cbrt()) as usize / 2 + 1);
    let mut jp1 = 0.0;
    let mut j = 1e-300_f64;
    let mut norm = 0.0;
    let mut j0 = 0.0;
    let mut j1 = 0.0;
    for k in (1..=start).rev() {
        let jm1 = 2.0 * k as f64 / ax * j - jp1;
        jp1 = j;
        j = jm1;
        // j now holds J_{k-1} (unnormalized)
        if j.abs() > 1e250 {
            j *= 1e-250;
            jp1 *= 1e-250;
            norm *= 1e-250;
            j1 *= 1e-250;
        }
        let order = k - 1;
        if order == 1 {
            j1 = j;
        }
        if order == 0 {
            j0 = j;
            norm += j;
        } else if order % 2 == 0 {
            norm += 2.0 * j;
        }
    }
    (j0 / norm, sign1 * j1 / norm)
}

fn hankel_asymptotic(nu: f64, x: f64) -> f64 {
    let mu = 4.0 * nu * nu;
    let mut p = 0.0;
    let mut q = 0.0;
    let mut term: f64 = 1.0;
    let mut k = 0usize;
    let mut last = f64::INFINITY;
    loop {
        // term = a_k(nu) / x^k
        let mag = term.abs();
        if mag > last || k > 60 {
            break;
        }
        match k % 4 {
            0 => p += term,
            1 => q += term,
            2 => p -= term,
            _ => q -= term,
        }
        if mag < 1e-17 {
            break;
        }
        last = mag;
        let kk = (2 * k + 1) as f64;
        term *= (mu - kk * kk) / ((k as f64 + 1.0) * 8.0 * x);
        k += 1;
    }
    let omega = x - (0.5 * nu + 0.25) * PI;
    (2.0 / (PI * x)).sqrt() * (p * omega.cos() - q * omega.sin())
}

/// Legendre polynomial `P_l(x)`.
pub fn legendre_p(l: usize, x: f64) -> f64 {
    if l == 0 {
        return 1.0;
    }
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=l {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    p1
}

/// All `P_0(x) .. P_lmax(x)`.
pub fn legendre_all(lmax: usize, x: f64, out: &mut Vec<f64>) {
    out.clear();
    out.push(1.0);
    if lmax == 0 {
        return;
    }
    out.push(x);
    for k in 2..=lmax {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * out[k - 1] - (kf - 1.0) * out[k - 2]) / kf;
        out.push(p2);
    }
}

/// Orthonormal associated Legendre values `Pbar_l^m(cos t)` for a fixed `m`
/// and `l = m ..= lmax`, normalized so that `Pbar_l^m(cos t) e^{i m phi}` is
/// an `L^2(S^2)`-normalized spherical harmonic.
pub fn normalized_assoc_legendre(m: usize, lmax: usize, cos_t: f64, sin_t: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(lmax + 1 - m.min(lmax + 1));
    if m > lmax {
        return out;
    }
    let mut pmm = 1.0 / (4.0 * PI).sqrt();
    for k in 1..=m {
        let kf = k as f64;
        pmm *= -((2.0 * kf + 1.0) / (2.0 * kf)).sqrt() * sin_t;
    }
    out.push(pmm);
    if lmax == m {
        return out;
    }
    let pm1 = (2.0 * m as f64 + 3.0).sqrt() * cos_t * pmm;
    out.push(pm1);
    let mf = m as f64;
    for l in (m + 2)..=lmax {
        let lf = l as f64;
        let a = ((4.0 * lf * lf - 1.0) / (lf * lf - mf * mf)).sqrt();
        let b = (((lf - 1.0) * (lf - 1.0) - mf * mf) / (4.0 * (lf - 1.0) * (lf - 1.0) - 1.0)).sqrt();
        let n = out.len();
        let v = a * (cos_t * out[n - 1] - b * out[n - 2]);
        out.push(v);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    /// J_n(x) = (1/pi) int_0^pi cos(n a - x sin a) da, trapezoid on a periodic
    /// integrand converges geometrically.
    fn bessel_integral(n: usize, x: f64) -> f64 {
        let m = 4000;
        let h = PI / m as f64;
        let mut s = 0.0;
        for i in 0..=m {
            let a = i as f64 * h;
            let w = if i == 0 || i == m { 0.5 } else { 1.0 };
            s += w * (n as f64 * a - x * a.sin()).cos();
        }
        s * h / PI
    }

    #[test]
    fn bessel_matches_integral_representation() {
        for &x in &[0.0, 1e-3, 0.5, 2.404825557695773, 7.3, 15.0, 24.9, 25.1, 40.0, 123.4, 700.0] {
            let (j0, j1) = bessel_j01(x);
            assert!((j0 - bessel_integral(0, x)).abs() < 1e-13, "J0({x})");
            assert!((j1 - bessel_integral(1, x)).abs() < 1e-13, "J1({x})");
        }
    }

    #[test]
    fn bessel_known_values() {
        assert!((bessel_j0(1.0) - 0.765_197_686_557_966_6).abs() < 1e-15);
        assert!((bessel_j1(1.0) - 0.440_050_585_744_933_5).abs() < 1e-15);
        assert!(bessel_j0(2.404_825_557_695_773).abs() < 1e-14);
    }

    #[test]
    fn legendre_endpoint() {
        for l in 0..300 {
            assert!((legendre_p(l, 1.0) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn assoc_legendre_m0_is_scaled_legendre() {
        let t: f64 = 0.7;
        let v = normalized_assoc_legendre(0, 50, t.cos(), t.sin());
        for (l, pv) in v.iter().enumerate() {
            let expect = ((2.0 * l as f64 + 1.0) / (4.0 * PI)).sqrt() * legendre_p(l, t.cos());
            assert!((pv - expect).abs() < 1e-12);
        }
    }
}
