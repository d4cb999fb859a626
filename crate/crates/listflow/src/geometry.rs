//! Discrete geometry of the symmetric surface: curvature, dilaton terms,
//! Laplace–Beltrami operator, covariant Hessian, and the area measure.
//!
//! For g = a(x)²dx² + b(x)²dy² and φ = µx + p(x) the continuum reductions
//! are
//!
//!   K        = -(1/(ab)) d/dx (b'/a)
//!   Δφ       =  (1/(ab)) d/dx ((b/a)(µ+p'))
//!   |∇φ|²    =  (µ+p')²/a²
//!   S_xx     =  K a² - α (µ+p')²,   S_yy = K b²,   S = 2K - α|∇φ|²
//!   |S_ij|²  =  (S_xx/a²)² + (S_yy/b²)²  =  S²/2 + α²|∇φ|⁴/2
//!
//! Divergence-form quantities are discretized in flux form at half points
//! (differences over h, arithmetic means for coefficients), so discrete
//! summation by parts holds exactly: Σ_i (Δv)_i ρ_i h telescopes to zero
//! and the operator is self-adjoint in the ρ-weighted inner product.
//! Pointwise first derivatives use second-order central differences.

use crate::error::{Error, Result};
use crate::grid::{DilatonProfile, MetricProfile, TorusGrid};

/// Pointwise geometric fields plus the area element ρ = a·b·Ly.
///
/// `s_norm_sq` stores the component definition (S_xx/a²)² + (S_yy/b²)²;
/// on every state it equals S²/2 + α²|∇φ|⁴/2 to machine precision.
#[derive(Debug, Clone)]
pub struct GeometryCache {
    pub k: Vec<f64>,
    pub lap_phi: Vec<f64>,
    pub grad_phi_sq: Vec<f64>,
    pub s_xx: Vec<f64>,
    pub s_yy: Vec<f64>,
    pub s: Vec<f64>,
    pub s_norm_sq: Vec<f64>,
    pub rho: Vec<f64>,
    pub area: f64,
}

impl GeometryCache {
    pub fn len(&self) -> usize {
        self.s.len()
    }

    pub fn is_empty(&self) -> bool {
        self.s.is_empty()
    }

    pub fn s_min(&self) -> f64 {
        self.s.iter().fold(f64::INFINITY, |m, &v| m.min(v))
    }

    pub fn s_max(&self) -> f64 {
        self.s.iter().fold(f64::NEG_INFINITY, |m, &v| m.max(v))
    }
}

/// All curvature and dilaton fields of a state in one pass.
pub fn compute_geometry(
    grid: &TorusGrid,
    metric: &MetricProfile,
    dilaton: &DilatonProfile,
    alpha: f64,
) -> Result<GeometryCache> {
    let n = grid.len();
    if metric.len() != n || dilaton.p.len() != n {
        return Err(Error::Usage(format!(
            "profile lengths {} / {} do not match grid size {n}",
            metric.len(),
            dilaton.p.len()
        )));
    }
    let min = metric.min_coefficient();
    if !(min > 0.0) {
        return Err(Error::NonPositiveMetric {
            t: 0.0,
            min_value: min,
        });
    }

    let h = grid.h();
    let ly = grid.ly();
    let (a, b, p, mu) = (&metric.a, &metric.b, &dilaton.p, dilaton.mu);

    let mut cache = GeometryCache {
        k: vec![0.0; n],
        lap_phi: vec![0.0; n],
        grad_phi_sq: vec![0.0; n],
        s_xx: vec![0.0; n],
        s_yy: vec![0.0; n],
        s: vec![0.0; n],
        s_norm_sq: vec![0.0; n],
        rho: vec![0.0; n],
        area: 0.0,
    };

    for i in 0..n {
        let ip = (i + 1) % n;
        let im = (i + n - 1) % n;

        // flux (b'/a) at i±1/2
        let curv_p = (b[ip] - b[i]) / h / (0.5 * (a[i] + a[ip]));
        let curv_m = (b[i] - b[im]) / h / (0.5 * (a[im] + a[i]));
        cache.k[i] = -(curv_p - curv_m) / (a[i] * b[i] * h);

        // flux (b/a)(µ+p') at i±1/2
        let dil_p = (b[i] + b[ip]) / (a[i] + a[ip]) * (mu + (p[ip] - p[i]) / h);
        let dil_m = (b[im] + b[i]) / (a[im] + a[i]) * (mu + (p[i] - p[im]) / h);
        cache.lap_phi[i] = (dil_p - dil_m) / (a[i] * b[i] * h);

        let phi_x = mu + (p[ip] - p[im]) / (2.0 * h);
        cache.grad_phi_sq[i] = (phi_x / a[i]) * (phi_x / a[i]);

        cache.s_xx[i] = cache.k[i] * a[i] * a[i] - alpha * phi_x * phi_x;
        cache.s_yy[i] = cache.k[i] * b[i] * b[i];
        cache.s[i] = 2.0 * cache.k[i] - alpha * cache.grad_phi_sq[i];

        let sxx_mixed = cache.s_xx[i] / (a[i] * a[i]);
        let syy_mixed = cache.s_yy[i] / (b[i] * b[i]);
        cache.s_norm_sq[i] = sxx_mixed * sxx_mixed + syy_mixed * syy_mixed;

        cache.rho[i] = a[i] * b[i] * ly;
    }
    cache.area = cache.rho.iter().sum::<f64>() * h;
    Ok(cache)
}

/// ∫ f dv ≈ Σ_i f_i ρ_i h. Exact for fields constant in x.
pub fn integrate(grid: &TorusGrid, cache: &GeometryCache, field: &[f64]) -> f64 {
    // same summation order as `area`, so ∫1 dv == area bitwise
    field
        .iter()
        .zip(&cache.rho)
        .map(|(f, rho)| f * rho)
        .sum::<f64>()
        * grid.h()
}

/// Laplace–Beltrami of v(x)·e_m(y) restricted to the x-profile:
/// (Δv)_i in flux form minus the transverse penalty (2πm/Ly)² v/b².
///
/// Self-adjoint in the ρ-weighted inner product by construction.
pub fn laplace_beltrami(
    grid: &TorusGrid,
    metric: &MetricProfile,
    v: &[f64],
    mode: u32,
) -> Vec<f64> {
    let n = grid.len();
    debug_assert_eq!(v.len(), n);
    let h = grid.h();
    let (a, b) = (&metric.a, &metric.b);
    let m_wave = 2.0 * std::f64::consts::PI * f64::from(mode) / grid.ly();
    let mut out = vec![0.0; n];
    for i in 0..n {
        let ip = (i + 1) % n;
        let im = (i + n - 1) % n;
        let w_p = (b[i] + b[ip]) / (a[i] + a[ip]);
        let w_m = (b[im] + b[i]) / (a[im] + a[i]);
        let flux = w_p * (v[ip] - v[i]) - w_m * (v[i] - v[im]);
        out[i] = flux / (a[i] * b[i] * h * h) - m_wave * m_wave * v[i] / (b[i] * b[i]);
    }
    out
}

/// Covariant Hessian components of an x-profile f:
/// f_;xx = f'' - (a'/a) f'  and  f_;yy = (b b'/a²) f',
/// both with central differences.
pub fn hessian_terms(grid: &TorusGrid, metric: &MetricProfile, f: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let n = grid.len();
    debug_assert_eq!(f.len(), n);
    let h = grid.h();
    let (a, b) = (&metric.a, &metric.b);
    let mut fxx = vec![0.0; n];
    let mut fyy = vec![0.0; n];
    for i in 0..n {
        let ip = (i + 1) % n;
        let im = (i + n - 1) % n;
        let fx = (f[ip] - f[im]) / (2.0 * h);
        let fxx_flat = (f[ip] - 2.0 * f[i] + f[im]) / (h * h);
        let ax = (a[ip] - a[im]) / (2.0 * h);
        let bx = (b[ip] - b[im]) / (2.0 * h);
        fxx[i] = fxx_flat - ax / a[i] * fx;
        fyy[i] = b[i] * bx / (a[i] * a[i]) * fx;
    }
    (fxx, fyy)
}

/// Central-difference first derivative of a periodic x-profile.
pub fn central_derivative(grid: &TorusGrid, f: &[f64]) -> Vec<f64> {
    let n = grid.len();
    debug_assert_eq!(f.len(), n);
    let h = grid.h();
    (0..n)
        .map(|i| (f[(i + 1) % n] - f[(i + n - 1) % n]) / (2.0 * h))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn grid(n: usize) -> TorusGrid {
        TorusGrid::new(n, 2.0 * PI, PI / 2.0).unwrap()
    }

    fn flat(n: usize) -> MetricProfile {
        MetricProfile::new(vec![1.0; n], vec![1.0; n]).unwrap()
    }

    fn max_abs_diff(xs: &[f64], ys: &[f64]) -> f64 {
        xs.iter()
            .zip(ys)
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max)
    }

    #[test]
    fn flat_metric_is_exactly_flat() {
        let g = grid(64);
        let m = flat(64);
        let d = DilatonProfile::constant(64);
        let c = compute_geometry(&g, &m, &d, 2.0).unwrap();
        assert!(c.k.iter().all(|&k| k == 0.0));
        assert!(c.s.iter().all(|&s| s == 0.0));
        assert!(c.lap_phi.iter().all(|&l| l == 0.0));
        assert!((c.area - 2.0 * PI * PI / 2.0).abs() < 1e-13);
    }

    // b ≡ 1 makes every (b'/a) flux vanish identically, so an a-bump is a
    // reparametrized flat metric and the discrete K is exactly zero too.
    #[test]
    fn a_bump_is_flat_in_disguise() {
        let g = grid(64);
        let a: Vec<f64> = g.sample(|x| 1.0 + 0.3 * x.cos());
        let m = MetricProfile::new(a, vec![1.0; 64]).unwrap();
        let d = DilatonProfile::constant(64);
        let c = compute_geometry(&g, &m, &d, 2.0).unwrap();
        assert!(c.k.iter().all(|&k| k == 0.0));
        assert!(c.s.iter().all(|&s| s == 0.0));
    }

    #[test]
    fn winding_state_fields_are_exact() {
        // a ≡ a0, b ≡ 1, φ = µx: S_xx = -αµ², S_yy = 0, S = -αµ²/a0².
        let n = 64;
        let (a0, mu, alpha) = (1.5, 1.0, 2.0);
        let g = grid(n);
        let m = MetricProfile::new(vec![a0; n], vec![1.0; n]).unwrap();
        let d = DilatonProfile::new(mu, vec![0.0; n]);
        let c = compute_geometry(&g, &m, &d, alpha).unwrap();
        for i in 0..n {
            assert_eq!(c.k[i], 0.0);
            assert_eq!(c.lap_phi[i], 0.0);
            assert!((c.grad_phi_sq[i] - mu * mu / (a0 * a0)).abs() < 1e-15);
            assert!((c.s_xx[i] + alpha * mu * mu).abs() < 1e-15);
            assert_eq!(c.s_yy[i], 0.0);
            assert!((c.s[i] + alpha * mu * mu / (a0 * a0)).abs() < 1e-15);
        }
    }

    #[test]
    fn curvature_converges_at_second_order_on_b_bump() {
        // K = ε cos x / (1 + ε cos x) for a ≡ 1, b = 1 + ε cos x.
        let eps = 0.1;
        let exact = |x: f64| eps * x.cos() / (1.0 + eps * x.cos());
        let mut errs = Vec::new();
        for n in [64usize, 128] {
            let g = grid(n);
            let b: Vec<f64> = g.sample(|x| 1.0 + eps * x.cos());
            let m = MetricProfile::new(vec![1.0; n], b).unwrap();
            let d = DilatonProfile::constant(n);
            let c = compute_geometry(&g, &m, &d, 2.0).unwrap();
            let want: Vec<f64> = g.sample(exact);
            errs.push(max_abs_diff(&c.k, &want));
        }
        // value check at x = 0: K(0) = 0.1/1.1
        let g = grid(128);
        let b: Vec<f64> = g.sample(|x| 1.0 + eps * x.cos());
        let m = MetricProfile::new(vec![1.0; 128], b).unwrap();
        let c = compute_geometry(&g, &m, &DilatonProfile::constant(128), 2.0).unwrap();
        assert!((c.k[0] - 0.1 / 1.1).abs() < 2e-4);

        let factor = errs[0] / errs[1];
        assert!(
            (3.5..=4.5).contains(&factor),
            "expected second-order decay, got factor {factor}"
        );
    }

    #[test]
    fn dilaton_laplacian_converges_on_curved_background() {
        // a = 1 + 0.1 cos x, b ≡ 1, p = 0.2 sin x:
        // Δφ = p''/a² - p' a'/a³ (µ = 0).
        let exact = |x: f64| {
            let a = 1.0 + 0.1 * x.cos();
            let ax = -0.1 * x.sin();
            let px = 0.2 * x.cos();
            let pxx = -0.2 * x.sin();
            pxx / (a * a) - px * ax / (a * a * a)
        };
        let mut errs = Vec::new();
        for n in [64usize, 128] {
            let g = grid(n);
            let a: Vec<f64> = g.sample(|x| 1.0 + 0.1 * x.cos());
            let m = MetricProfile::new(a, vec![1.0; n]).unwrap();
            let d = DilatonProfile::new(0.0, g.sample(|x| 0.2 * x.sin()));
            let c = compute_geometry(&g, &m, &d, 2.0).unwrap();
            let want: Vec<f64> = g.sample(exact);
            errs.push(max_abs_diff(&c.lap_phi, &want));
        }
        let factor = errs[0] / errs[1];
        assert!(
            (3.5..=4.5).contains(&factor),
            "expected second-order decay, got factor {factor}"
        );
    }

    #[test]
    fn curvature_integral_telescopes_to_zero() {
        // Gauss–Bonnet on the torus: ∫K dv = 0, and the flux form makes the
        // discrete sum telescope exactly.
        let n = 96;
        let g = grid(n);
        let a: Vec<f64> = g.sample(|x| 1.0 + 0.2 * (2.0 * x).sin());
        let b: Vec<f64> = g.sample(|x| 1.0 + 0.3 * x.cos());
        let m = MetricProfile::new(a, b).unwrap();
        let c = compute_geometry(&g, &m, &DilatonProfile::constant(n), 2.0).unwrap();
        let total = integrate(&g, &c, &c.k);
        assert!(total.abs() < 1e-13, "got {total:e}");
    }

    #[test]
    fn tensor_norm_identity_holds_pointwise() {
        let n = 80;
        let g = grid(n);
        let a: Vec<f64> = g.sample(|x| 1.2 + 0.2 * x.sin());
        let b: Vec<f64> = g.sample(|x| 0.9 + 0.25 * (2.0 * x).cos());
        let m = MetricProfile::new(a, b).unwrap();
        let d = DilatonProfile::new(0.7, g.sample(|x| 0.15 * x.sin()));
        let alpha = 2.0;
        let c = compute_geometry(&g, &m, &d, alpha).unwrap();
        for i in 0..n {
            let via_identity =
                c.s[i] * c.s[i] / 2.0 + alpha * alpha * c.grad_phi_sq[i] * c.grad_phi_sq[i] / 2.0;
            let scale = 1.0 + via_identity.abs();
            assert!(
                (c.s_norm_sq[i] - via_identity).abs() <= 1e-12 * scale,
                "component form {} vs identity {} at i={i}",
                c.s_norm_sq[i],
                via_identity
            );
        }
    }

    #[test]
    fn integrate_is_exact_for_constants() {
        let n = 64;
        let g = grid(n);
        let a: Vec<f64> = g.sample(|x| 1.0 + 0.3 * x.cos());
        let m = MetricProfile::new(a, vec![1.0; n]).unwrap();
        let c = compute_geometry(&g, &m, &DilatonProfile::constant(n), 2.0).unwrap();
        let ones = vec![1.0; n];
        assert_eq!(integrate(&g, &c, &ones), c.area);
        let threes = vec![3.0; n];
        let scale = integrate(&g, &c, &threes) / c.area;
        assert!((scale - 3.0).abs() < 1e-14);
    }

    #[test]
    fn laplacian_matches_closed_form_with_transverse_mode() {
        // Flat metric, v = sin x, mode m: Δ(v e_m) = -(1 + (2πm/Ly)²) sin x.
        let mut errs = Vec::new();
        for n in [64usize, 128] {
            let g = grid(n);
            let m = flat(n);
            let v: Vec<f64> = g.sample(f64::sin);
            let got = laplace_beltrami(&g, &m, &v, 1);
            let m_wave = 2.0 * PI / g.ly();
            let want: Vec<f64> = g.sample(|x| -(1.0 + m_wave * m_wave) * x.sin());
            errs.push(max_abs_diff(&got, &want));
        }
        let factor = errs[0] / errs[1];
        assert!((3.5..=4.5).contains(&factor), "factor {factor}");
    }

    #[test]
    fn laplacian_integral_telescopes_to_zero() {
        let n = 72;
        let g = grid(n);
        let a: Vec<f64> = g.sample(|x| 1.0 + 0.15 * x.sin());
        let b: Vec<f64> = g.sample(|x| 1.1 + 0.2 * x.cos());
        let m = MetricProfile::new(a, b).unwrap();
        let c = compute_geometry(&g, &m, &DilatonProfile::constant(n), 2.0).unwrap();
        let v: Vec<f64> = g.sample(|x| (3.0 * x).sin() + 0.4 * x.cos());
        let lap = laplace_beltrami(&g, &m, &v, 0);
        let total = integrate(&g, &c, &lap);
        assert!(total.abs() < 1e-12, "got {total:e}");
    }

    #[test]
    fn hessian_matches_symbolic_values() {
        // a ≡ 1, b = 1 + 0.1 cos x, f = sin x:
        //   f_;xx = -sin x                  (a' = 0)
        //   f_;yy = (1 + 0.1 cos x)(-0.1 sin x)(cos x)
        // Frozen from the symbolic formulas at x = π/4.
        let fyy_exact = |x: f64| (1.0 + 0.1 * x.cos()) * (-0.1 * x.sin()) * x.cos();
        let x_probe = PI / 4.0;
        let want_fyy = fyy_exact(x_probe); // -0.05353553390593274
        assert!((want_fyy - (-0.053_535_533_905_932_74)).abs() < 1e-15);

        let mut errs = Vec::new();
        for n in [64usize, 128] {
            let g = grid(n);
            let b: Vec<f64> = g.sample(|x| 1.0 + 0.1 * x.cos());
            let m = MetricProfile::new(vec![1.0; n], b).unwrap();
            let f: Vec<f64> = g.sample(f64::sin);
            let (fxx, fyy) = hessian_terms(&g, &m, &f);
            let i_probe = n / 8; // x = π/4 is a node for these sizes
            assert!((g.x(i_probe) - x_probe).abs() < 1e-14);
            errs.push((fyy[i_probe] - want_fyy).abs());
            let want_fxx: Vec<f64> = g.sample(|x| -x.sin());
            assert!(max_abs_diff(&fxx, &want_fxx) < 30.0 / (n * n) as f64);
        }
        let factor = errs[0] / errs[1];
        assert!((3.5..=4.5).contains(&factor), "factor {factor}");
    }

    #[test]
    fn hessian_trace_is_consistent_with_laplacian() {
        // tr(f_;ij) = Δf in the continuum; discretely they differ at O(h²).
        let mut errs = Vec::new();
        for n in [64usize, 128] {
            let g = grid(n);
            let a: Vec<f64> = g.sample(|x| 1.0 + 0.2 * x.cos());
            let b: Vec<f64> = g.sample(|x| 1.0 + 0.1 * x.sin());
            let m = MetricProfile::new(a.clone(), b.clone()).unwrap();
            let f: Vec<f64> = g.sample(|x| (2.0 * x).cos());
            let (fxx, fyy) = hessian_terms(&g, &m, &f);
            let lap = laplace_beltrami(&g, &m, &f, 0);
            let trace: Vec<f64> = (0..n)
                .map(|i| fxx[i] / (a[i] * a[i]) + fyy[i] / (b[i] * b[i]))
                .collect();
            errs.push(max_abs_diff(&trace, &lap));
        }
        let factor = errs[0] / errs[1];
        assert!((3.0..=5.0).contains(&factor), "factor {factor}");
    }

    #[test]
    fn rejects_mismatched_profiles() {
        let g = grid(64);
        let m = flat(32);
        let d = DilatonProfile::constant(64);
        assert!(compute_geometry(&g, &m, &d, 2.0).is_err());
    }
}
