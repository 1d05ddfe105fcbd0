//! Complete elliptic integrals and Jacobi elliptic functions.
//!
//! Real-argument `sn`, `cn`, `dn` use the arithmetic-geometric mean with
//! descending Landen back-substitution; complex arguments go through the
//! Jacobi imaginary transformation and the addition theorem.

use std::f64::consts::PI;

use num_complex::Complex64;

/// Default convergence tolerance for AGM iterations and theta series.
pub const DEFAULT_TOL: f64 = 1e-16;

pub fn agm(mut a: f64, mut b: f64, tol: f64) -> f64 {
    for _ in 0..64 {
        if (a - b).abs() <= tol * a.abs() {
            break;
        }
        let an = 0.5 * (a + b);
        b = (a * b).sqrt();
        a = an;
    }
    0.5 * (a + b)
}

/// `K` as a function of the complementary modulus `k' = √(1 − k²)`.
pub fn complete_k_from_complement(k_comp: f64, tol: f64) -> f64 {
    PI / (2.0 * agm(1.0, k_comp, tol))
}

/// Modulus pair `(k, k')` for the nome `q = exp(−π K'/K)`, via theta constants.
pub fn modulus_from_nome(q: f64, tol: f64) -> (f64, f64) {
    assert!((0.0..1.0).contains(&q), "nome must lie in [0, 1)");
    // θ₂ = 2 q^{1/4} Σ q^{n(n+1)},  θ₃ = 1 + 2 Σ q^{n²},  θ₄ = 1 + 2 Σ (−1)^n q^{n²}
    let mut t2 = 0.0;
    let mut n = 0u32;
    loop {
        let term = q.powi((n * (n + 1)) as i32);
        t2 += term;
        if term <= tol * t2 || n > 200 {
            break;
        }
        n += 1;
    }
    let t2 = 2.0 * q.powf(0.25) * t2;
    let (mut t3, mut t4) = (1.0, 1.0);
    let mut n = 1i32;
    loop {
        let term = q.powi(n * n);
        t3 += 2.0 * term;
        t4 += if n % 2 == 0 { 2.0 * term } else { -2.0 * term };
        if term <= tol || n > 200 {
            break;
        }
        n += 1;
    }
    let k = (t2 / t3).powi(2);
    let kc = (t4 / t3).powi(2);
    let norm = k.hypot(kc);
    (k / norm, kc / norm)
}

/// `(sn, cn, dn)` for real argument `u` and modulus `k` (with complement `kc`).
pub fn jacobi_real(u: f64, k: f64, kc: f64, tol: f64) -> (f64, f64, f64) {
    if k <= tol {
        let (s, c) = u.sin_cos();
        return (s, c, 1.0);
    }
    if kc <= tol {
        let t = u.tanh();
        let s = 1.0 / u.cosh();
        return (t, s, s);
    }
    let mut a = vec![1.0];
    let mut c = vec![k];
    let mut b = kc;
    while c.last().unwrap().abs() > tol && a.len() < 64 {
        let an = a.last().unwrap();
        let cn = 0.5 * (an - b);
        let bn = (an * b).sqrt();
        let an1 = 0.5 * (an + b);
        a.push(an1);
        c.push(cn);
        b = bn;
    }
    let n = a.len() - 1;
    let mut phi = (1u64 << n) as f64 * a[n] * u;
    for i in (1..=n).rev() {
        phi = 0.5 * (phi + (c[i] * phi.sin() / a[i]).clamp(-1.0, 1.0).asin());
    }
    let (s, co) = phi.sin_cos();
    // dn² = cn² + k_c² sn² keeps its digits when k ≈ 1; the Landen quotient
    // for dn is 0/0 at u = ±K
    let dn = co.hypot(kc * s);
    (s, co, dn)
}

/// Jacobi elliptic parameters for a fixed modulus.
#[derive(Clone, Copy, Debug)]
pub struct Jacobi {
    pub k: f64,
    pub kc: f64,
    pub tol: f64,
}

impl Jacobi {
    pub fn new(k: f64, kc: f64, tol: f64) -> Self {
        Self { k, kc, tol }
    }

    /// Quarter periods `(K, K')`.
    pub fn periods(&self) -> (f64, f64) {
        (
            complete_k_from_complement(self.kc, self.tol),
            complete_k_from_complement(self.k, self.tol),
        )
    }

    /// `(sn z, cn z, dn z)` for complex `z`.
    pub fn sn_cn_dn(&self, z: Complex64) -> (Complex64, Complex64, Complex64) {
        let (s, c, d) = jacobi_real(z.re, self.k, self.kc, self.tol);
        let (s1, c1, d1) = jacobi_real(z.im, self.kc, self.k, self.tol);
        let k2 = self.k * self.k;
        let den = c1 * c1 + k2 * s * s * s1 * s1;
        let sn = Complex64::new(s * d1, c * d * s1 * c1) / den;
        let cn = Complex64::new(c * c1, -s * d * s1 * d1) / den;
        let dn = Complex64::new(d * c1 * d1, -k2 * s * c * s1) / den;
        (sn, cn, dn)
    }

    pub fn sn(&self, z: Complex64) -> Complex64 {
        self.sn_cn_dn(z).0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complete_integral_reference_values() {
        // K(k = 1/√2) = Γ(1/4)² / (4 √π)
        let k = std::f64::consts::FRAC_1_SQRT_2;
        let kk = complete_k_from_complement(k, DEFAULT_TOL);
        assert!((kk - 1.854_074_677_301_372).abs() < 1e-14);
        assert!((complete_k_from_complement(1.0, DEFAULT_TOL) - PI / 2.0).abs() < 1e-15);
    }

    #[test]
    fn nome_inversion_is_consistent() {
        for &q in &[1e-6, 1e-3, 0.01, 0.043, 0.1] {
            let (k, kc) = modulus_from_nome(q, DEFAULT_TOL);
            assert!((k * k + kc * kc - 1.0).abs() < 1e-13, "q={q}");
            let j = Jacobi::new(k, kc, DEFAULT_TOL);
            let (kk, kkp) = j.periods();
            let q_back = (-PI * kkp / kk).exp();
            assert!((q_back - q).abs() < 1e-12 * q.max(1e-3), "q={q}: {q_back}");
        }
    }

    #[test]
    fn real_functions_satisfy_identities() {
        let (k, kc) = modulus_from_nome(0.02, DEFAULT_TOL);
        for i in 0..50 {
            let u = -3.0 + 0.13 * i as f64;
            let (s, c, d) = jacobi_real(u, k, kc, DEFAULT_TOL);
            assert!((s * s + c * c - 1.0).abs() < 1e-14, "u={u}");
            assert!((d * d + k * k * s * s - 1.0).abs() < 1e-14, "u={u}: {d}");
        }
        let j = Jacobi::new(k, kc, DEFAULT_TOL);
        let (kk, _) = j.periods();
        let (s, c, d) = jacobi_real(kk, k, kc, DEFAULT_TOL);
        assert!((s - 1.0).abs() < 1e-13 && c.abs() < 1e-7 && (d - kc).abs() < 1e-12);
    }

    #[test]
    fn complex_derivative_is_cn_dn() {
        let (k, kc) = modulus_from_nome(0.01, DEFAULT_TOL);
        let j = Jacobi::new(k, kc, DEFAULT_TOL);
        let h = 1e-6;
        for &(x, y) in &[(0.3, 0.2), (-1.1, 0.9), (0.7, 1.8), (1.4, 0.05)] {
            let z = Complex64::new(x, y);
            let (_, cn, dn) = j.sn_cn_dn(z);
            let fd = (j.sn(z + h) - j.sn(z - h)) / (2.0 * h);
            assert!((fd - cn * dn).norm() < 1e-8, "z={z}");
            let fd_i = (j.sn(z + Complex64::new(0.0, h)) - j.sn(z - Complex64::new(0.0, h)))
                / Complex64::new(0.0, 2.0 * h);
            assert!((fd_i - cn * dn).norm() < 1e-8);
        }
    }

    #[test]
    fn rectangle_corners_map_to_real_axis() {
        let (k, kc) = modulus_from_nome(0.005, DEFAULT_TOL);
        let j = Jacobi::new(k, kc, DEFAULT_TOL);
        let (kk, kkp) = j.periods();
        let top = j.sn(Complex64::new(kk, kkp));
        assert!((top - Complex64::new(1.0 / k, 0.0)).norm() < 1e-6 / k, "{top} vs {}", 1.0 / k);
        for i in 0..=20 {
            let t = i as f64 / 20.0;
            // bottom edge, vertical edges and top edge land on the real axis
            assert!(j.sn(Complex64::new(-kk + 2.0 * kk * t, 0.0)).im.abs() < 1e-13);
            assert!(j.sn(Complex64::new(kk, kkp * t)).im.abs() < 1e-9);
            // sn has a pole at iK', the midpoint of the top edge
            if t > 0.0 && t < 1.0 && i != 10 {
                let w = j.sn(Complex64::new(-kk + 2.0 * kk * t, kkp));
                assert!(w.im.abs() < 1e-9 * w.norm());
                assert!(j.sn(Complex64::new(-kk + 2.0 * kk * t, 0.5 * kkp)).im > 0.0);
            }
        }
    }
}
