//! Shared oracles for the integration suites. Everything here is built from
//! representations independent of the implementation paths under test: the
//! homogeneous Green's function from its plane-wave (spectral) decomposition,
//! and volume integrals from tensor-product Gauss-Legendre quadrature.

#![allow(dead_code)]

use casimir_born::quadrature::{gauss_legendre, integrate_semi_inf, QuadSpec};
use num_complex::Complex64;

type C = Complex64;

/// Spectral form of the propagating homogeneous Green's function at imaginary
/// frequency ω = iξ in a medium ε: (i/8π²) Σ_{M,N} ∫ d²k∥ (k_z k∥²)⁻¹
/// X(k∥, a k_z, r) ⊗ X(−k∥, −a k_z, r′), with k_z = iκ on the imaginary axis
/// and a = sgn(z − z′). The angular integral runs on a trapezoid rule
/// (spectrally accurate for the periodic integrand; the even node count
/// cancels the imaginary part pairwise, which is asserted), the radial
/// integral through the adaptive Gauss-Kronrod scheme with the angular
/// averages memoized across the nine component integrals.
pub fn h_prop_spectral(dr: [f64; 3], xi: f64, eps: f64) -> [[f64; 3]; 3] {
    use std::cell::RefCell;
    use std::collections::HashMap;
    const NPHI: usize = 160;
    let a = if dr[2] >= 0.0 { 1.0 } else { -1.0 };
    let k0sq = C::new(-eps * xi * xi, 0.0);
    let spec = QuadSpec::kernel().with_rel_tol(1e-11);

    let phi_average = |kp: f64| -> [[f64; 3]; 3] {
        let kap = (eps * xi * xi + kp * kp).sqrt();
        let kz = C::new(0.0, kap);
        let decay = (-kap * dr[2].abs()).exp();
        let mut acc = [[C::new(0.0, 0.0); 3]; 3];
        for n in 0..NPHI {
            let phi = 2.0 * std::f64::consts::PI * n as f64 / NPHI as f64;
            let (s, c) = phi.sin_cos();
            let kx = kp * c;
            let ky = kp * s;
            // e^{i k∥·ρ} e^{i a k_z Δz}, the z factor already a real decay
            let phase = C::new(0.0, kx * dr[0] + ky * dr[1]).exp() * decay;
            // M ⊗ M′ weight: (k×ẑ) ⊗ (k×ẑ) with k×ẑ = (k_y, −k_x, 0)
            let m = [C::new(ky, 0.0), C::new(-kx, 0.0), C::new(0.0, 0.0)];
            // N ⊗ N′ weight: k×(k×ẑ) = (a k_z k_x, a k_z k_y, −k∥²)
            let nv = [a * kz * kx, a * kz * ky, C::new(-kp * kp, 0.0)];
            for i in 0..3 {
                for j in 0..3 {
                    acc[i][j] += (m[i] * m[j] + nv[i] * nv[j] / k0sq) * phase;
                }
            }
        }
        let w = 2.0 * std::f64::consts::PI / NPHI as f64;
        // i/8π² prefactor and 1/(k_z k∥²) measure; radial k∥ factor applied
        // by the caller.
        let pref = C::new(0.0, 1.0 / (8.0 * std::f64::consts::PI * std::f64::consts::PI));
        let mut out = [[0.0; 3]; 3];
        let scale = 1.0 + dr.iter().map(|v| v.abs()).fold(0.0f64, f64::max);
        for i in 0..3 {
            for j in 0..3 {
                let v = acc[i][j] * w / (kz * kp * kp) * pref;
                assert!(
                    v.im.abs() <= 1e-12 * (v.re.abs() + scale),
                    "angular average developed an imaginary part: {v}"
                );
                out[i][j] = v.re;
            }
        }
        out
    };

    let cache: RefCell<HashMap<u64, [[f64; 3]; 3]>> = RefCell::new(HashMap::new());
    let cached = |kp: f64| -> [[f64; 3]; 3] {
        if let Some(hit) = cache.borrow().get(&kp.to_bits()) {
            return *hit;
        }
        let v = phi_average(kp);
        cache.borrow_mut().insert(kp.to_bits(), v);
        v
    };

    // The trace sets the matrix scale; identically-zero components then
    // converge on the absolute tolerance instead of chasing a relative one.
    let trace = integrate_semi_inf(
        |kp| {
            let m = cached(kp);
            (m[0][0] + m[1][1] + m[2][2]) * kp
        },
        &spec,
    )
    .value;
    let comp_spec = QuadSpec { abs_tol: 1e-12 * trace.abs().max(1e-30), ..spec };

    let mut out = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            out[i][j] = integrate_semi_inf(|kp| cached(kp)[i][j] * kp, &comp_spec).value;
        }
    }
    out
}

/// Tensor-product Gauss-Legendre quadrature of f over the box
/// [x0,x1]×[y0,y1]×[z0,z1].
pub fn box_quadrature<F: Fn([f64; 3]) -> f64>(bounds: [[f64; 2]; 3], n: usize, f: F) -> f64 {
    let (xs, ws) = gauss_legendre(n);
    let map = |t: f64, lo: f64, hi: f64| 0.5 * (hi + lo) + 0.5 * (hi - lo) * t;
    let mut total = 0.0;
    for (ix, &tx) in xs.iter().enumerate() {
        for (iy, &ty) in xs.iter().enumerate() {
            for (iz, &tz) in xs.iter().enumerate() {
                let p = [
                    map(tx, bounds[0][0], bounds[0][1]),
                    map(ty, bounds[1][0], bounds[1][1]),
                    map(tz, bounds[2][0], bounds[2][1]),
                ];
                total += ws[ix] * ws[iy] * ws[iz] * f(p);
            }
        }
    }
    total
        * (0.125
            * (bounds[0][1] - bounds[0][0])
            * (bounds[1][1] - bounds[1][0])
            * (bounds[2][1] - bounds[2][0]))
}

/// Spectral-route first-order Green's function of the infinite slab pair at a
/// point z in the gap: Γ^{X,(1)}_ij = −(1/32π ε² ξ²) ∫dk k m⁽¹⁾_X,ij/κ³ ·
/// [e^{−2zκ} + e^{2(z−L)κ}] (δε-free), the oracle for the Monte Carlo
/// estimator on the slab geometry.
pub fn slab_first_order_spectral(
    z: f64,
    gap: f64,
    xi: f64,
    eps_mid: f64,
) -> ([[f64; 3]; 3], [[f64; 3]; 3]) {
    use casimir_born::green::{m1, SpectralPoint};
    let spec = QuadSpec::kernel();
    let comp = |pick: &dyn Fn(&SpectralPoint) -> f64| {
        integrate_semi_inf(
            |k| {
                let p = SpectralPoint::new(k, xi, eps_mid).unwrap();
                let kap = p.kappa();
                let s = (-2.0 * z * kap).exp() + (2.0 * (z - gap) * kap).exp();
                k * pick(&p) / (kap * kap * kap) * s
            },
            &spec,
        )
        .value
            * (-1.0 / (32.0 * std::f64::consts::PI * eps_mid * eps_mid * xi * xi))
    };
    let exx = comp(&|p| m1(p).0.xx);
    let ezz = comp(&|p| m1(p).0.zz);
    let bxx = comp(&|p| m1(p).1.xx);
    let bzz = comp(&|p| m1(p).1.zz);
    (
        [[exx, 0.0, 0.0], [0.0, exx, 0.0], [0.0, 0.0, ezz]],
        [[bxx, 0.0, 0.0], [0.0, bxx, 0.0], [0.0, 0.0, bzz]],
    )
}
