//! Deterministic adaptive quadrature over the semi-infinite (ξ, k∥) quadrant.
//!
//! Semi-infinite integrals are mapped to (0, 1) via x = t/(1−t) and handled by
//! adaptive Gauss–Kronrod (G7, K15) bisection; tails are never truncated. The
//! quadrant is integrated either as an iterated integral (k∥ inner, ξ outer,
//! `ExpMap`) or through the polar change of variables k∥ = x cos θ,
//! ξ = (x/√ε_mid) sin θ with Jacobian x/√ε_mid (`PolarMap`), which applies to
//! non-dispersive integrands and provides an internal cross-check.
//!
//! Everything here is deterministic: identical (integrand, spec) inputs give
//! bit-identical results. Panel selection breaks ties by insertion index and
//! the final reduction sums panels in positional order.

/// Strategy for quadrant integrals.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mapping {
    /// Iterated rational-map integrals, k∥ inner, ξ outer.
    ExpMap,
    /// Polar (x, θ) variables; requires a constant background permittivity.
    PolarMap,
}

/// Tolerance/budget contract for one integral.
#[derive(Debug, Clone, Copy)]
pub struct QuadSpec {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Total integrand-evaluation budget (for iterated integrals this counts
    /// evaluations of the 2-D integrand).
    pub max_evals: usize,
    pub mapping: Mapping,
}

impl QuadSpec {
    /// Defaults for kernel-level integrals (closed-form targets known to many
    /// digits).
    pub fn kernel() -> Self {
        QuadSpec { rel_tol: 1e-9, abs_tol: 0.0, max_evals: 4_000_000, mapping: Mapping::ExpMap }
    }

    /// Defaults for full observables.
    pub fn observable() -> Self {
        QuadSpec { rel_tol: 1e-7, abs_tol: 0.0, max_evals: 8_000_000, mapping: Mapping::ExpMap }
    }

    pub fn with_rel_tol(mut self, rel_tol: f64) -> Self {
        self.rel_tol = rel_tol;
        self
    }

    pub fn with_mapping(mut self, mapping: Mapping) -> Self {
        self.mapping = mapping;
        self
    }

    fn validate(&self) {
        assert!(self.rel_tol > 0.0, "rel_tol must be positive");
        assert!(self.max_evals >= 64, "max_evals must be at least 64");
    }

    fn target(&self, value: f64) -> f64 {
        f64::max(self.abs_tol, self.rel_tol * value.abs())
    }
}

impl Default for QuadSpec {
    fn default() -> Self {
        QuadSpec::observable()
    }
}

/// Value with an error estimate and a convergence verdict. `converged`
/// guarantees `err_estimate <= max(abs_tol, rel_tol * |value|)`; a false flag
/// is the non-convergence signal (never a silent wrong answer).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult {
    pub value: f64,
    pub err_estimate: f64,
    pub evals: usize,
    pub converged: bool,
}

impl QuadResult {
    pub fn exact_zero() -> Self {
        QuadResult { value: 0.0, err_estimate: 0.0, evals: 0, converged: true }
    }
}

// G7-K15 nodes and weights (positive half; node 0.0 last).
const XGK: [f64; 8] = [
    0.991_455_371_120_812_7,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224,
    0.063_092_092_629_978_56,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_69,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_94,
    0.417_959_183_673_469_4,
];

/// One K15/G7 evaluation on [a, b]: returns (kronrod, error_estimate).
fn qk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let f_center = f(center);

    let mut res_kronrod = f_center * WGK[7];
    let mut res_gauss = f_center * WG[3];
    let mut res_abs = res_kronrod.abs();
    let mut fv = [[0.0f64; 2]; 7];

    for (j, fvj) in fv.iter_mut().enumerate() {
        let dx = half * XGK[j];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        *fvj = [f1, f2];
        res_kronrod += WGK[j] * (f1 + f2);
        res_abs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            res_gauss += WG[j / 2] * (f1 + f2);
        }
    }

    let mean = 0.5 * res_kronrod;
    let mut res_asc = WGK[7] * (f_center - mean).abs();
    for (j, fvj) in fv.iter().enumerate() {
        res_asc += WGK[j] * ((fvj[0] - mean).abs() + (fvj[1] - mean).abs());
    }

    let result = res_kronrod * half;
    res_abs *= half.abs();
    res_asc *= half.abs();

    let mut err = ((res_kronrod - res_gauss) * half).abs();
    if res_asc != 0.0 && err != 0.0 {
        err = res_asc * (200.0 * err / res_asc).powf(1.5).min(1.0);
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * res_abs);
    }
    (result, err)
}

struct Panel {
    a: f64,
    b: f64,
    value: f64,
    err: f64,
}

/// Max-heap entry ordered by error, ties broken by insertion index so the
/// refinement order is a deterministic function of the integrand.
#[derive(PartialEq)]
struct HeapEntry {
    err: f64,
    idx: usize,
}

impl Eq for HeapEntry {}

impl Ord for HeapEntry {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.err
            .partial_cmp(&other.err)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(other.idx.cmp(&self.idx))
    }
}

impl PartialOrd for HeapEntry {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

/// Sum panel contributions in positional order with pairwise reduction.
fn reduce_panels(panels: &mut [Panel]) -> (f64, f64) {
    panels.sort_by(|p, q| p.a.partial_cmp(&q.a).unwrap());
    let values: Vec<f64> = panels.iter().map(|p| p.value).collect();
    let errs: Vec<f64> = panels.iter().map(|p| p.err).collect();
    (pairwise_sum(&values), pairwise_sum(&errs))
}

/// Deterministic pairwise summation.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    match xs.len() {
        0 => 0.0,
        1 => xs[0],
        2 => xs[0] + xs[1],
        n => {
            let mid = n / 2;
            pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
        }
    }
}

/// Adaptive GK15 on a finite interval.
pub fn integrate_finite<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, spec: &QuadSpec) -> QuadResult {
    use std::collections::BinaryHeap;
    spec.validate();
    let mut evals = 0usize;
    let (v, e) = qk15(&f, a, b);
    evals += 15;
    let mut panels = vec![Panel { a, b, value: v, err: e }];
    let mut heap = BinaryHeap::new();
    heap.push(HeapEntry { err: e, idx: 0 });
    // Running totals steer refinement; the final reduction below is the
    // deterministic pairwise sum in positional order.
    let mut total_v = v;
    let mut total_e = e;
    let mut total_abs = v.abs();

    while total_e > spec.target(total_v) && evals + 30 <= spec.max_evals {
        let Some(top) = heap.pop() else { break };
        let Panel { a: pa, b: pb, value: pv, err: pe } = panels[top.idx];
        // Roundoff stall: no panel can improve on f64 noise.
        if pe <= 100.0 * f64::EPSILON * total_abs {
            heap.push(top);
            break;
        }
        let mid = 0.5 * (pa + pb);
        if mid <= pa || mid >= pb {
            continue; // interval exhausted at f64 resolution
        }
        let (v1, e1) = qk15(&f, pa, mid);
        let (v2, e2) = qk15(&f, mid, pb);
        evals += 30;
        panels[top.idx] = Panel { a: pa, b: mid, value: v1, err: e1 };
        panels.push(Panel { a: mid, b: pb, value: v2, err: e2 });
        heap.push(HeapEntry { err: e1, idx: top.idx });
        heap.push(HeapEntry { err: e2, idx: panels.len() - 1 });
        total_v += v1 + v2 - pv;
        total_e += e1 + e2 - pe;
        total_abs += v1.abs() + v2.abs() - pv.abs();
        if !total_v.is_finite() {
            break;
        }
    }

    let (value, err) = reduce_panels(&mut panels);
    QuadResult { value, err_estimate: err, evals, converged: err <= spec.target(value) }
}

/// ∫₀^∞ f(x) dx via the rational map x = t/(1−t).
pub fn integrate_semi_inf<F: Fn(f64) -> f64>(f: F, spec: &QuadSpec) -> QuadResult {
    let g = |t: f64| {
        let w = 1.0 - t;
        f(t / w) / (w * w)
    };
    integrate_finite(g, 0.0, 1.0, spec)
}

/// ∫₀^∞ dξ ∫₀^∞ dk∥ f(k∥, ξ) over the quadrant, strategy per `spec.mapping`.
/// `eps_mid` is consumed by the polar map only and must then be the constant
/// background permittivity of the integrand.
pub fn integrate_quadrant<F: Fn(f64, f64) -> f64>(
    f: F,
    eps_mid: f64,
    spec: &QuadSpec,
) -> QuadResult {
    match spec.mapping {
        Mapping::ExpMap => integrate_quadrant_iterated(f, spec),
        Mapping::PolarMap => integrate_quadrant_polar(f, eps_mid, spec),
    }
}

fn integrate_quadrant_iterated<F: Fn(f64, f64) -> f64>(f: F, spec: &QuadSpec) -> QuadResult {
    use std::cell::Cell;
    let inner_spec = QuadSpec {
        rel_tol: (0.1 * spec.rel_tol).max(1e-13),
        abs_tol: 0.0,
        max_evals: 400_000,
        mapping: Mapping::ExpMap,
    };
    let evals = Cell::new(0usize);
    // Inner errors matter relative to the peak inner integral: inner slices
    // far in the tail are noise-floor limited but contribute nothing.
    let inner_err_max = Cell::new(0.0f64);
    let inner_val_max = Cell::new(0.0f64);

    let outer = |xi: f64| {
        let r = integrate_semi_inf(|k| f(k, xi), &inner_spec);
        evals.set(evals.get() + r.evals);
        inner_err_max.set(inner_err_max.get().max(r.err_estimate));
        inner_val_max.set(inner_val_max.get().max(r.value.abs()));
        r.value
    };
    let outer_spec = QuadSpec { max_evals: usize::MAX, ..*spec };
    let g = |t: f64| {
        if evals.get() > spec.max_evals {
            return f64::NAN; // budget blown: poison the result honestly
        }
        let w = 1.0 - t;
        outer(t / w) / (w * w)
    };
    let res = integrate_finite(g, 0.0, 1.0, &outer_spec);
    let inner_rel =
        if inner_val_max.get() > 0.0 { inner_err_max.get() / inner_val_max.get() } else { 0.0 };
    let err = res.err_estimate + inner_rel * res.value.abs();
    QuadResult {
        value: res.value,
        err_estimate: err,
        evals: evals.get(),
        converged: res.value.is_finite()
            && evals.get() <= spec.max_evals
            && err <= spec.target(res.value),
    }
}

/// Polar route: ∫₀^{π/2} dθ ∫₀^∞ dx (x/√ε_mid) f(x cos θ, x sin θ/√ε_mid).
pub fn integrate_quadrant_polar<F: Fn(f64, f64) -> f64>(
    f: F,
    eps_mid: f64,
    spec: &QuadSpec,
) -> QuadResult {
    use std::cell::Cell;
    assert!(eps_mid >= 1.0, "polar map needs a constant background permittivity >= 1");
    let sq = eps_mid.sqrt();
    let inner_spec = QuadSpec {
        rel_tol: (0.1 * spec.rel_tol).max(1e-13),
        abs_tol: 0.0,
        max_evals: 400_000,
        mapping: Mapping::ExpMap,
    };
    let evals = Cell::new(0usize);
    let inner_err_max = Cell::new(0.0f64);
    let inner_val_max = Cell::new(0.0f64);

    let outer = |theta: f64| {
        let (s, c) = theta.sin_cos();
        let r = integrate_semi_inf(|x| x / sq * f(x * c, x * s / sq), &inner_spec);
        evals.set(evals.get() + r.evals);
        inner_err_max.set(inner_err_max.get().max(r.err_estimate));
        inner_val_max.set(inner_val_max.get().max(r.value.abs()));
        r.value
    };
    let outer_spec = QuadSpec { max_evals: usize::MAX, ..*spec };
    let res = integrate_finite(
        |theta| {
            if evals.get() > spec.max_evals {
                return f64::NAN;
            }
            outer(theta)
        },
        0.0,
        std::f64::consts::FRAC_PI_2,
        &outer_spec,
    );
    let inner_rel =
        if inner_val_max.get() > 0.0 { inner_err_max.get() / inner_val_max.get() } else { 0.0 };
    let err = res.err_estimate + inner_rel * res.value.abs();
    QuadResult {
        value: res.value,
        err_estimate: err,
        evals: evals.get(),
        converged: res.value.is_finite()
            && evals.get() <= spec.max_evals
            && err <= spec.target(res.value),
    }
}

/// Gauss-Legendre nodes and weights on [−1, 1] by Newton iteration on the
/// Legendre recurrence. Used for fixed shared-node grids (the Monte Carlo ξ
/// quadrature); the adaptive integrators above use Gauss-Kronrod.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 2, "need at least two nodes");
    let mut xs = vec![0.0; n];
    let mut ws = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut x = (PI_GL * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for j in 2..=n {
                let jf = j as f64;
                let p2 = ((2.0 * jf - 1.0) * x * p1 - (jf - 1.0) * p0) / jf;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        xs[i] = -x;
        ws[i] = w;
        xs[n - 1 - i] = x;
        ws[n - 1 - i] = w;
    }
    (xs, ws)
}

const PI_GL: f64 = std::f64::consts::PI;
