//! Green's-function kernels on the imaginary frequency axis.
//!
//! Everything the planar and Monte Carlo pipelines consume lives here:
//!
//! * κ(k∥, ξ) = sqrt(ε_mid ξ² + k∥²), the decay wavenumber;
//! * the diagonal matrix-element families m⁽¹⁾, m⁽¹⁾_δ, m⁽²⁾_LL, m⁽²⁾_LR and
//!   g⁽¹⁾ of the first- and second-order Born terms of the scattering Green's
//!   function between and inside two parallel slabs;
//! * the second-order trace kernels (f, S) for the energy density in the
//!   three regions, including the cross-order electric term that feeds a
//!   first-order Green's function into the second-order energy;
//! * the homogeneous dyadic Green's function in closed real-space form,
//!   together with the single-scattering integrands used by the Monte Carlo
//!   volume integration.
//!
//! All kernels are pure closed-form functions of value inputs — no symbolic
//! algebra at runtime — and safe for unrestricted parallel invocation.
//!
//! The delta part −(ẑ⊗ẑ/k²)δ(r−r′) of the homogeneous Green's function is
//! never sampled numerically; its contribution to second-order observables is
//! carried analytically by the m⁽¹⁾_δ family.

use crate::error::{Error, Result};

/// A point of the (k∥, ξ) quadrant together with the background permittivity
/// evaluated at that ξ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralPoint {
    pub k_par: f64,
    pub xi: f64,
    pub eps_mid: f64,
}

impl SpectralPoint {
    pub fn new(k_par: f64, xi: f64, eps_mid: f64) -> Result<Self> {
        if !(k_par >= 0.0) || !(xi > 0.0) || !(eps_mid >= 1.0) {
            return Err(Error::domain(format!(
                "spectral point requires k_par >= 0, xi > 0, eps_mid >= 1; \
                 got ({k_par}, {xi}, {eps_mid})"
            )));
        }
        Ok(SpectralPoint { k_par, xi, eps_mid })
    }

    /// κ = sqrt(ε_mid ξ² + k∥²) > 0.
    pub fn kappa(&self) -> f64 {
        (self.eps_mid * self.xi * self.xi + self.k_par * self.k_par).sqrt()
    }
}

/// κ(k∥, ξ) as a free function.
pub fn kappa(p: &SpectralPoint) -> f64 {
    p.kappa()
}

/// Diagonal 3×3 kernel matrix. Every family in the slab problem is diagonal
/// with xx = yy (in-plane isotropy).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiagKernel3 {
    pub xx: f64,
    pub yy: f64,
    pub zz: f64,
}

impl DiagKernel3 {
    fn iso(xx: f64, zz: f64) -> Self {
        DiagKernel3 { xx, yy: xx, zz }
    }

    pub fn trace(&self) -> f64 {
        self.xx + self.yy + self.zz
    }

    /// xx + yy − zz, the combination entering the zz stress component.
    pub fn transverse_minus_zz(&self) -> f64 {
        self.xx + self.yy - self.zz
    }
}

/// −ξ²ε_mid (xx+yy−zz)_𝓔 + (xx+yy−zz)_𝓑 — the zz-stress combination. It
/// vanishes identically on the m⁽¹⁾ and m⁽¹⁾_δ families (no force from a
/// single scattering event).
pub fn stress_combination(p: &SpectralPoint, electric: &DiagKernel3, magnetic: &DiagKernel3) -> f64 {
    -p.xi * p.xi * p.eps_mid * electric.transverse_minus_zz() + magnetic.transverse_minus_zz()
}

/// −ξ²ε_mid tr 𝓔 + tr 𝓑 — the combination entering the energy density.
pub fn energy_trace_combination(
    p: &SpectralPoint,
    electric: &DiagKernel3,
    magnetic: &DiagKernel3,
) -> f64 {
    -p.xi * p.xi * p.eps_mid * electric.trace() + magnetic.trace()
}

/// First-order matrix elements m⁽¹⁾ for the region between the slabs.
/// Returns (electric, magnetic).
pub fn m1(p: &SpectralPoint) -> (DiagKernel3, DiagKernel3) {
    let k2 = p.k_par * p.k_par;
    let k4 = k2 * k2;
    let e = p.eps_mid;
    let x2 = p.xi * p.xi;
    let x4 = x2 * x2;
    let electric = DiagKernel3::iso(
        2.0 * k4 + 3.0 * e * k2 * x2 + 2.0 * e * e * x4,
        2.0 * k2 * (2.0 * k2 + e * x2),
    );
    let magnetic = DiagKernel3::iso(
        x4 * e * e * (3.0 * k2 + 2.0 * x2 * e),
        2.0 * x4 * k2 * e * e,
    );
    (electric, magnetic)
}

/// Matrix elements m⁽¹⁾_δ of the single-scattering (delta-function) part of
/// the second-order Green's function between the slabs.
pub fn m1_delta(p: &SpectralPoint) -> (DiagKernel3, DiagKernel3) {
    let k2 = p.k_par * p.k_par;
    let e = p.eps_mid;
    let x2 = p.xi * p.xi;
    let kap2 = e * x2 + k2;
    let electric = DiagKernel3::iso(1.0, 2.0 * k2 / kap2);
    let magnetic = DiagKernel3::iso(x2 * x2 * e * e / kap2, 0.0);
    (electric, magnetic)
}

/// Matrix elements m⁽²⁾_LR = m⁽²⁾_RL of the cross-slab double-scattering
/// terms — the only second-order terms that carry force.
pub fn m2_lr(p: &SpectralPoint) -> (DiagKernel3, DiagKernel3) {
    let k2 = p.k_par * p.k_par;
    let k4 = k2 * k2;
    let k6 = k4 * k2;
    let e = p.eps_mid;
    let x2 = p.xi * p.xi;
    let x4 = x2 * x2;
    let x6 = x4 * x2;
    let electric = DiagKernel3::iso(
        4.0 * k6 + 8.0 * k4 * e * x2 + 5.0 * k2 * e * e * x4 + 2.0 * e * e * e * x6,
        -2.0 * k2 * (2.0 * k2 + e * x2) * (2.0 * k2 + e * x2),
    );
    let magnetic = DiagKernel3::iso(
        -e * e * x4 * (4.0 * k4 + 5.0 * k2 * e * x2 + 2.0 * e * e * x4),
        2.0 * k2 * e * e * e * x6,
    );
    (electric, magnetic)
}

/// Matrix elements m⁽²⁾_LL = m⁽²⁾_RR of the same-slab double-scattering
/// terms; they coincide with the first-order elements.
pub fn m2_ll(p: &SpectralPoint) -> (DiagKernel3, DiagKernel3) {
    m1(p)
}

/// sgn(z−s_z)² for the generalized first-order elements: zero only on the
/// measure-zero coincidence set z = s_z, one everywhere else.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SgnSq {
    Zero,
    One,
}

impl SgnSq {
    fn value(self) -> f64 {
        match self {
            SgnSq::Zero => 0.0,
            SgnSq::One => 1.0,
        }
    }
}

/// Generalized first-order matrix elements g⁽¹⁾ valid for observation points
/// inside the slabs: the m⁽¹⁾ polynomials with sgn(z−s_z)² kept symbolic.
/// For sgn² = 1 (z ≠ s_z, almost everywhere) they coincide with m⁽¹⁾ — that
/// branch reuses the m⁽¹⁾ arithmetic so the equality is bit-exact.
pub fn g1(p: &SpectralPoint, sgn_sq: SgnSq) -> (DiagKernel3, DiagKernel3) {
    if sgn_sq == SgnSq::One {
        return m1(p);
    }
    let s2 = sgn_sq.value();
    let k2 = p.k_par * p.k_par;
    let k4 = k2 * k2;
    let k6 = k4 * k2;
    let e = p.eps_mid;
    let x2 = p.xi * p.xi;
    let x4 = x2 * x2;
    let kap2 = k2 + e * x2;
    let electric = DiagKernel3::iso(
        e * e * x4 + kap2 * s2 * (k2 + s2 * kap2),
        2.0 * k2 * (k2 + kap2 * s2),
    );
    let magnetic = DiagKernel3::iso(
        k6 - kap2 * kap2 * s2 * (k2 * s2 - kap2 * s2 + k2 - x2 * e),
        2.0 * x4 * k2 * e * e,
    );
    (electric, magnetic)
}

/// Region of the three-layer geometry.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Region {
    Left,
    Mid,
    Right,
}

impl Region {
    /// Classify z against the plate faces at 0 and L. Points exactly on a
    /// face have divergent densities and are rejected.
    pub fn classify(z: f64, gap: f64) -> Result<Region> {
        if !z.is_finite() {
            return Err(Error::domain(format!("non-finite z = {z}")));
        }
        if z == 0.0 || z == gap {
            return Err(Error::domain(format!(
                "z = {z} lies on a plate face; the energy density diverges there"
            )));
        }
        Ok(if z < 0.0 {
            Region::Left
        } else if z < gap {
            Region::Mid
        } else {
            Region::Right
        })
    }
}

/// Electric- or magnetic-type kernel.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FieldType {
    Electric,
    Magnetic,
}

/// One (f, S) factor pair of the second-order energy trace. The Born order
/// distinguishes the cross-order electric term that appears inside the slabs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceKernelPair {
    pub f: f64,
    pub s: f64,
    pub region: Region,
    pub field_type: FieldType,
    pub order: u8,
}

/// f^𝓔_mid(k∥, ξ).
fn f_e_mid(k2: f64, ex2: f64) -> f64 {
    let k4 = k2 * k2;
    2.0 * k4 * k2 + 5.0 * ex2 * k4 + 3.0 * k2 * ex2 * ex2 + ex2 * ex2 * ex2
}

/// f^𝓑_mid(k∥, ξ).
fn f_b_mid(k2: f64, ex2: f64) -> f64 {
    ex2 * ex2 * (k2 * k2 + 3.0 * ex2 * k2 + ex2 * ex2)
}

/// 2k∥⁴ + 2ξ²k∥²ε + ξ⁴ε², the bracket shared by the force integrand and the
/// mid-region cross terms.
fn cross_bracket(k2: f64, ex2: f64) -> f64 {
    2.0 * k2 * k2 + 2.0 * ex2 * k2 + ex2 * ex2
}

/// The (f, S) trace-kernel pairs of the second-order energy density.
///
/// Left region: S = e^{2zκ} − e^{−2(L−z)κ} for all three pairs (two
/// second-order pairs plus the cross-order electric pair). Mid region: the
/// S factors carry the z-independent e^{−2Lκ} cross term divided by the
/// matching f. Right region: z → L − z applied to the left kernels.
pub fn trace_kernels_second_order(
    p: &SpectralPoint,
    region: Region,
    z: f64,
    gap: f64,
) -> Result<Vec<TraceKernelPair>> {
    match (region, Region::classify(z, gap)?) {
        (a, b) if a == b => {}
        (a, b) => {
            return Err(Error::domain(format!(
                "z = {z} lies in {b:?}, not in the requested {a:?}"
            )))
        }
    }
    let kap = p.kappa();
    let k2 = p.k_par * p.k_par;
    let e = p.eps_mid;
    let x2 = p.xi * p.xi;
    let ex2 = e * x2;

    let pairs = match region {
        Region::Mid => {
            let zexp = (-2.0 * z * kap).exp() + (2.0 * (z - gap) * kap).exp();
            let lexp = (-2.0 * gap * kap).exp();
            let fe = f_e_mid(k2, ex2);
            let fb = f_b_mid(k2, ex2);
            let cross = cross_bracket(k2, ex2);
            let s_e = zexp + ex2 * cross * lexp / fe;
            let s_b = zexp - ex2 * ex2 * cross * lexp / fb;
            vec![
                TraceKernelPair { f: fe, s: s_e, region, field_type: FieldType::Electric, order: 2 },
                TraceKernelPair { f: fb, s: s_b, region, field_type: FieldType::Magnetic, order: 2 },
            ]
        }
        Region::Left | Region::Right => {
            // Right region kernels are the left ones at z -> L - z.
            let zl = if region == Region::Left { z } else { gap - z };
            let s = (2.0 * zl * kap).exp() - (-2.0 * (gap - zl) * kap).exp();
            let zk = zl * kap;
            let k4 = k2 * k2;
            let fe = -6.0 * k4 * k2
                + 2.0 * ex2 * ex2 * ex2 * (zk - 1.0)
                + ex2 * ex2 * k2 * (4.0 * zk - 7.0)
                + ex2 * k4 * (4.0 * zk - 13.0);
            let fb = ex2 * ex2 * (k4 + 2.0 * ex2 * ex2 * zk + ex2 * k2 * (4.0 * zk - 1.0));
            let fe1 = 2.0 * e * (k2 + ex2) * cross_bracket(k2, ex2);
            vec![
                TraceKernelPair { f: fe, s, region, field_type: FieldType::Electric, order: 2 },
                TraceKernelPair { f: fb, s, region, field_type: FieldType::Magnetic, order: 2 },
                TraceKernelPair { f: fe1, s, region, field_type: FieldType::Electric, order: 1 },
            ]
        }
    };
    Ok(pairs)
}

/// The assembled second-order energy-trace integrand factor
/// Φ(k∥, ξ, z) = −ξ²[ε_mid f^𝓔 + f^{𝓔,(1)}] S + f^𝓑 S (region-dependent),
/// to be multiplied by k∥/(32π²ξ²κ⁵ε_mid³)·δε² and integrated over the
/// quadrant. The cross-order electric pair enters with weight −ξ² (without
/// the ε_mid factor).
pub fn second_order_trace_combo(p: &SpectralPoint, region: Region, z: f64, gap: f64) -> Result<f64> {
    let x2 = p.xi * p.xi;
    let e = p.eps_mid;
    let mut total = 0.0;
    for pair in trace_kernels_second_order(p, region, z, gap)? {
        let fs = pair.f * pair.s;
        total += match (pair.field_type, pair.order) {
            (FieldType::Electric, 1) => -x2 * fs,
            (FieldType::Electric, _) => -x2 * e * fs,
            (FieldType::Magnetic, _) => fs,
        };
    }
    Ok(total)
}

// ---------------------------------------------------------------------------
// Real-space homogeneous Green's function
// ---------------------------------------------------------------------------

pub type Vec3 = [f64; 3];
pub type Mat3 = [[f64; 3]; 3];

pub(crate) fn sub(a: Vec3, b: Vec3) -> Vec3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

pub(crate) fn norm(v: Vec3) -> f64 {
    (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt()
}

/// Radial factors of the homogeneous dyadic Green's function at imaginary
/// frequency: H(R) = g(R)[a·I + b·û⊗û] with g = e^{−κ₀R}/4πR, κ₀ = √ε ξ,
/// plus the radial derivative g′ used by the curl products.
#[derive(Debug, Clone, Copy)]
pub struct RadialGreen {
    pub g: f64,
    pub a: f64,
    pub b: f64,
    pub dg: f64,
}

impl RadialGreen {
    pub fn eval(r_dist: f64, xi: f64, eps: f64) -> Result<Self> {
        if !(r_dist > 0.0) {
            return Err(Error::domain(format!(
                "homogeneous Green's function requested at separation {r_dist}"
            )));
        }
        if !(xi > 0.0) || !(eps >= 1.0) {
            return Err(Error::domain(format!(
                "RadialGreen needs xi > 0 and eps >= 1, got ({xi}, {eps})"
            )));
        }
        let kappa0 = eps.sqrt() * xi;
        let x = kappa0 * r_dist;
        let g = (-x).exp() / (4.0 * std::f64::consts::PI * r_dist);
        let inv = 1.0 / x;
        Ok(RadialGreen {
            g,
            a: 1.0 + inv + inv * inv,
            b: -(1.0 + 3.0 * inv + 3.0 * inv * inv),
            dg: -(x + 1.0) * (-x).exp() / (4.0 * std::f64::consts::PI * r_dist * r_dist),
        })
    }
}

/// Propagating part of the homogeneous dyadic Green's function in closed
/// real-space form, H(r, r′) at ω = iξ in a medium of permittivity ε.
/// Normalization and sign are pinned against the spectral plane-wave
/// decomposition by the equivalence tests.
pub fn h_prop_realspace(r: Vec3, r2: Vec3, xi: f64, eps: f64) -> Result<Mat3> {
    let d = sub(r, r2);
    let dist = norm(d);
    let rg = RadialGreen::eval(dist, xi, eps)?;
    let u = [d[0] / dist, d[1] / dist, d[2] / dist];
    let mut h = [[0.0; 3]; 3];
    for (i, row) in h.iter_mut().enumerate() {
        for (j, entry) in row.iter_mut().enumerate() {
            let id = if i == j { 1.0 } else { 0.0 };
            *entry = rg.g * (rg.a * id + rg.b * (u[i] * u[j]));
        }
    }
    Ok(h)
}

/// Single-scattering integrands at one source point s: the electric matrix
/// g²[a²·I + (2ab+b²)û⊗û] (from H(r,s)·H(s,r)) and the magnetic matrix
/// g′²(I − û⊗û) (from the two-sided curl). Multiplying their volume
/// integrals by ω²δε = −ξ²δε gives the first-order scattering Green's
/// function pair of a general geometry.
pub fn first_order_integrand(r: Vec3, s: Vec3, xi: f64, eps_mid: f64) -> Result<(Mat3, Mat3)> {
    let d = sub(r, s);
    let dist = norm(d);
    let rg = RadialGreen::eval(dist, xi, eps_mid)?;
    let u = [d[0] / dist, d[1] / dist, d[2] / dist];
    let gg = rg.g * rg.g;
    let diag_e = gg * rg.a * rg.a;
    let off_e = gg * (2.0 * rg.a * rg.b + rg.b * rg.b);
    let dgg = rg.dg * rg.dg;
    let mut e = [[0.0; 3]; 3];
    let mut b = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            let id = if i == j { 1.0 } else { 0.0 };
            e[i][j] = diag_e * id + off_e * (u[i] * u[j]);
            b[i][j] = dgg * (id - u[i] * u[j]);
        }
    }
    Ok((e, b))
}

/// Trace combination of the single-scattering integrand entering the
/// first-order energy density outside the bodies:
/// ξ⁴ε_mid tr[H H] − ξ² tr[(∇×H)(H×∇′)], pointwise in the source s.
/// Integrating over the body volume gives the per-ξ kernel K(r, ξ) with
/// ⟨ρ(r)⟩⁽¹⁾ = (1/2π) ∫ dξ δε(iξ) K(r, ξ).
pub fn first_order_energy_trace(r: Vec3, s: Vec3, xi: f64, eps_mid: f64) -> Result<f64> {
    let d = sub(r, s);
    let dist = norm(d);
    let rg = RadialGreen::eval(dist, xi, eps_mid)?;
    let tr_hh = rg.g * rg.g * (3.0 * rg.a * rg.a + 2.0 * rg.a * rg.b + rg.b * rg.b);
    let tr_curl = 2.0 * rg.dg * rg.dg;
    let x2 = xi * xi;
    Ok(x2 * x2 * eps_mid * tr_hh - x2 * tr_curl)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn p(k: f64, xi: f64, e: f64) -> SpectralPoint {
        SpectralPoint::new(k, xi, e).unwrap()
    }

    #[test]
    fn kappa_values() {
        assert_eq!(kappa(&p(0.0, 1.0, 1.0)), 1.0);
        assert_eq!(kappa(&p(3.0, 4.0, 1.0)), 5.0);
        assert_relative_eq!(kappa(&p(1.0, 1.0, 2.0)), 3.0_f64.sqrt());
    }

    #[test]
    fn m1_reference_points() {
        let (e, b) = m1(&p(1.0, 1.0, 1.0));
        assert_eq!((e.xx, e.yy, e.zz), (7.0, 7.0, 6.0));
        assert_eq!((b.xx, b.yy, b.zz), (5.0, 5.0, 2.0));
        let (e, b) = m1(&p(0.0, 1.0, 1.0));
        assert_eq!((e.xx, e.yy, e.zz), (2.0, 2.0, 0.0));
        assert_eq!((b.xx, b.yy, b.zz), (2.0, 2.0, 0.0));
    }

    #[test]
    fn m1_delta_reference_points() {
        let (e, b) = m1_delta(&p(1.0, 1.0, 1.0));
        assert_eq!((e.xx, e.yy, e.zz), (1.0, 1.0, 1.0));
        assert_eq!((b.xx, b.yy, b.zz), (0.5, 0.5, 0.0));
        let (e, b) = m1_delta(&p(0.0, 2.0, 3.0));
        assert_eq!(e.zz, 0.0);
        assert_eq!(b.zz, 0.0);
    }

    #[test]
    fn m2_lr_reference_points() {
        let (e, b) = m2_lr(&p(1.0, 1.0, 1.0));
        assert_eq!((e.xx, e.yy, e.zz), (19.0, 19.0, -18.0));
        assert_eq!((b.xx, b.yy, b.zz), (-11.0, -11.0, 2.0));
        let (e, b) = m2_lr(&p(0.0, 1.0, 1.0));
        assert_eq!((e.xx, e.yy, e.zz), (2.0, 2.0, 0.0));
        assert_eq!((b.xx, b.yy, b.zz), (-2.0, -2.0, 0.0));
    }

    #[test]
    fn m2_ll_is_m1() {
        for (k, xi, e) in [(1.0, 1.0, 1.0), (0.3, 2.7, 4.2), (11.0, 0.02, 1.5)] {
            let pt = p(k, xi, e);
            let (e1, b1) = m1(&pt);
            let (e2, b2) = m2_ll(&pt);
            assert_eq!(e1, e2);
            assert_eq!(b1, b2);
        }
    }

    #[test]
    fn stress_combination_vanishes_at_first_order() {
        for (k, xi, e) in [(1.0, 1.0, 1.0), (0.0, 5.0, 2.0), (7.3, 0.11, 9.9), (250.0, 800.0, 4.0)]
        {
            let pt = p(k, xi, e);
            let (me, mb) = m1(&pt);
            let scale = (pt.xi * pt.xi * pt.eps_mid * me.transverse_minus_zz())
                .abs()
                .max(mb.transverse_minus_zz().abs())
                .max(1.0);
            assert!(stress_combination(&pt, &me, &mb).abs() <= 1e-12 * scale);
            let (de, db) = m1_delta(&pt);
            assert!(stress_combination(&pt, &de, &db).abs() <= 1e-12);
        }
    }

    #[test]
    fn m2_lr_combination_reduces_to_force_bracket() {
        // -xi^2 e (tr⊥−zz)_E + (tr⊥−zz)_B = -8 e xi^2 kappa^2 (2k^4+2k^2 e xi^2+e^2 xi^4)
        for (k, xi, e) in [(1.0, 1.0, 1.0), (0.4, 2.0, 3.0), (6.0, 0.5, 1.2)] {
            let pt = p(k, xi, e);
            let (me, mb) = m2_lr(&pt);
            let got = stress_combination(&pt, &me, &mb);
            let k2 = k * k;
            let ex2 = e * xi * xi;
            let kap2 = k2 + ex2;
            let want = -8.0 * ex2 * kap2 * (2.0 * k2 * k2 + 2.0 * k2 * ex2 + ex2 * ex2);
            assert_relative_eq!(got, want, max_relative = 1e-12);
        }
    }

    #[test]
    fn g1_reduces_to_m1_away_from_source() {
        for (k, xi, e) in [(1.0, 1.0, 1.0), (0.9, 3.3, 2.5), (4.0, 0.25, 6.0)] {
            let pt = p(k, xi, e);
            let (ge, gb) = g1(&pt, SgnSq::One);
            let (me, mb) = m1(&pt);
            assert_eq!(ge, me);
            assert_eq!(gb, mb);
        }
    }

    #[test]
    fn g1_at_coincidence() {
        let (ge, _gb) = g1(&p(1.0, 1.0, 1.0), SgnSq::Zero);
        assert_eq!((ge.xx, ge.yy, ge.zz), (1.0, 1.0, 2.0));
        let (ge, _) = g1(&p(0.0, 2.0, 1.5), SgnSq::Zero);
        assert_eq!(ge.zz, 0.0);
    }

    #[test]
    fn kernel_homogeneity_degrees() {
        // (k, xi) -> (λk, λxi) at fixed ε: electric/magnetic degrees are
        // m1: 4/6, m2_LR: 6/8, m1_delta: 0/2.
        let base = p(0.7, 1.3, 2.0);
        for lam in [2.0, 10.0] {
            let scaled = p(0.7 * lam, 1.3 * lam, 2.0);
            let checks: [(fn(&SpectralPoint) -> (DiagKernel3, DiagKernel3), i32, i32); 3] =
                [(m1, 4, 6), (m2_lr, 6, 8), (m1_delta, 0, 2)];
            for (fam, deg_e, deg_b) in checks {
                let (e0, b0) = fam(&base);
                let (e1, b1) = fam(&scaled);
                for (a, b, deg) in
                    [(e0.xx, e1.xx, deg_e), (e0.zz, e1.zz, deg_e), (b0.xx, b1.xx, deg_b), (b0.zz, b1.zz, deg_b)]
                {
                    if a != 0.0 {
                        assert_relative_eq!(b, a * lam.powi(deg), max_relative = 1e-12);
                    } else {
                        assert_eq!(b, 0.0);
                    }
                }
            }
        }
    }

    #[test]
    fn trace_kernel_symmetry_and_decay() {
        let gap = 1.0;
        let pt = p(1.0, 1.0, 1.0);
        // Mid S symmetric under z -> L - z.
        let a = trace_kernels_second_order(&pt, Region::Mid, 0.25, gap).unwrap();
        let b = trace_kernels_second_order(&pt, Region::Mid, 0.75, gap).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert_relative_eq!(x.s, y.s, max_relative = 1e-14);
        }
        // Left S decays to zero deep inside the slab.
        let far = trace_kernels_second_order(&pt, Region::Left, -40.0, gap).unwrap();
        for pair in far {
            assert!(pair.s.abs() < 1e-30);
        }
        // f^E_mid at the reference point.
        let mid = trace_kernels_second_order(&pt, Region::Mid, 0.5, gap).unwrap();
        assert_eq!(mid[0].f, 11.0);
        // Region/z mismatch is a domain error.
        assert!(trace_kernels_second_order(&pt, Region::Left, 0.5, gap).is_err());
        assert!(trace_kernels_second_order(&pt, Region::Mid, 0.0, gap).is_err());
    }

    #[test]
    fn h_prop_reciprocity_and_decay() {
        let r = [0.3, -0.2, 0.9];
        let r2 = [-0.5, 0.1, 0.2];
        let h = h_prop_realspace(r, r2, 1.2, 1.8).unwrap();
        let ht = h_prop_realspace(r2, r, 1.2, 1.8).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                assert_relative_eq!(h[i][j], ht[j][i], max_relative = 1e-14);
            }
        }
        // exponential decay e^{-κ0 R}/R
        let near = h_prop_realspace([0.0; 3], [0.0, 0.0, 1.0], 1.0, 1.0).unwrap();
        let far = h_prop_realspace([0.0; 3], [0.0, 0.0, 20.0], 1.0, 1.0).unwrap();
        for i in 0..3 {
            assert!(far[i][i].abs() < near[i][i].abs() * (-18.0f64).exp());
        }
        assert!(h_prop_realspace(r, r, 1.0, 1.0).is_err());
    }
}
