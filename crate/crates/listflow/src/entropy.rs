//! Weighted energy and entropy functionals along a stored trajectory.
//!
//! The weight w = e^{-f} obeys the conjugate heat equation
//! `w_t = -Δw + (S - r)w`, which is well posed backward in time. The module
//! therefore runs a two-pass scheme: the flow is integrated forward and
//! stored at stride 1, then `conjugate_backward` carries terminal data from
//! t = T down to t = 0, reconstructing the geometry between snapshots by
//! cubic Hermite interpolation so every RK4 stage sees a consistent metric.
//!
//! On each (state, weight) pair the module evaluates
//!   F_k = ∫ (|∇f|^2 + kS) e^{-f} dv,
//!   W_k = τ^2 ∫ [k(S + n/(2τ)) + |∇f|^2] e^{-f} dv,
//! and the two equivalent right-hand-side expressions for dF_k/dt and
//! dW_k/dt, built from the squared tensor blocks |S_ij + f_ij + c g_ij|^2.

use crate::error::{Error, Result};
use crate::flow::{flow_rhs, FlowState, Trajectory};
use crate::geometry::{
    central_derivative, hessian_terms, integrate, laplace_beltrami, GeometryCache,
};
use crate::grid::{DilatonProfile, MetricProfile};
use crate::spectral::{solve_mode, OperatorSpec};

/// Which of the two equivalent right-hand-side expressions to evaluate:
/// `A` keeps the bare tensor squares, `B` shifts them by (r/n)g and moves
/// the compensation into the leading scalar terms.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Form {
    A,
    B,
}

/// Conjugate-heat weight at one trajectory snapshot.
#[derive(Clone, Debug)]
pub struct ConjugateState {
    pub t: f64,
    /// τ(t) = τ0 + t.
    pub tau: f64,
    /// w = e^{-f}, strictly positive.
    pub w: Vec<f64>,
    /// ∫ w dv in the snapshot's own volume measure. Never renormalized;
    /// the drift is a diagnostic in its own right.
    pub mass: f64,
}

fn check_weight(t: f64, w: &[f64]) -> Result<()> {
    let min_w = w.iter().fold(f64::INFINITY, |m, &v| m.min(v));
    if !(min_w > 0.0) {
        return Err(Error::NonPositiveWeight { t, min_w });
    }
    Ok(())
}

/// Terminal profile f_T = -2 ln u from the ground state of `-4Δ + kS` on
/// the final snapshot. Since u is volume-normalized, ∫ e^{-f_T} dv = 1.
pub fn ground_state_terminal(state: &FlowState, k: f64) -> Result<Vec<f64>> {
    let cache = state.geometry()?;
    let spec = OperatorSpec {
        c2: 4.0,
        c0: k,
        m_max: 0,
        count: 1,
    };
    let pairs = solve_mode(&state.grid, &state.metric, &cache, &spec, 0, state.t)?;
    let u = &pairs[0].v;
    check_weight(state.t, u)?;
    Ok(u.iter().map(|x| -2.0 * x.ln()).collect())
}

/// Metric and dilaton at the midpoint of a snapshot interval, by cubic
/// Hermite interpolation from the endpoint values and flow velocities.
/// The interpolation error is O(dt^4), matching the integrator order.
fn midpoint_state(left: &FlowState, right: &FlowState) -> Result<FlowState> {
    let dt = right.t - left.t;
    let rhs_l = flow_rhs(left)?;
    let rhs_r = flow_rhs(right)?;
    let n = left.grid.len();
    let hermite_mid = |yl: &[f64], yr: &[f64], dl: &[f64], dr: &[f64]| -> Vec<f64> {
        (0..n)
            .map(|i| 0.5 * (yl[i] + yr[i]) + dt * (dl[i] - dr[i]) / 8.0)
            .collect()
    };
    let a = hermite_mid(&left.metric.a, &right.metric.a, &rhs_l.da, &rhs_r.da);
    let b = hermite_mid(&left.metric.b, &right.metric.b, &rhs_l.db, &rhs_r.db);
    let p = hermite_mid(&left.dilaton.p, &right.dilaton.p, &rhs_l.dp, &rhs_r.dp);
    Ok(FlowState {
        t: 0.5 * (left.t + right.t),
        grid: left.grid,
        metric: MetricProfile::new(a, b)?,
        dilaton: DilatonProfile::new(left.dilaton.mu, p),
        ..left.clone()
    })
}

/// Carry terminal data `f_terminal` at t = T backward to every snapshot of
/// a stride-1 trajectory, returning conjugate states in forward time order.
pub fn conjugate_backward(
    traj: &Trajectory,
    f_terminal: &[f64],
    tau0: f64,
) -> Result<Vec<ConjugateState>> {
    if traj.stride != 1 {
        return Err(Error::StrideError {
            stride: traj.stride,
        });
    }
    if !(tau0 > 0.0) {
        return Err(Error::NonPositiveTau { tau: tau0 });
    }
    let last = traj.last();
    let n = last.grid.len();
    if f_terminal.len() != n {
        return Err(Error::Usage(format!(
            "terminal profile has {} entries, grid has {n}",
            f_terminal.len()
        )));
    }
    if f_terminal.iter().any(|x| !x.is_finite()) {
        return Err(Error::Usage("terminal profile must be finite".into()));
    }

    let grid = last.grid;
    let mut w: Vec<f64> = f_terminal.iter().map(|f| (-f).exp()).collect();
    check_weight(last.t, &w)?;

    let conjugate_rhs = |state: &FlowState, cache: &GeometryCache, w: &[f64]| -> Vec<f64> {
        let r = state.rescale_r(cache);
        let lap = laplace_beltrami(&grid, &state.metric, w, 0);
        (0..n)
            .map(|i| lap[i] - (cache.s[i] - r) * w[i])
            .collect()
    };

    let mut cache_hi = last.geometry()?;
    let mut out = Vec::with_capacity(traj.len());
    out.push(ConjugateState {
        t: last.t,
        tau: tau0 + last.t,
        mass: integrate(&grid, &cache_hi, &w),
        w: w.clone(),
    });

    for j in (0..traj.len() - 1).rev() {
        let left = &traj.states[j];
        let right = &traj.states[j + 1];
        let ds = right.t - left.t;
        let mid = midpoint_state(left, right)?;
        let cache_mid = mid.geometry()?;
        let cache_lo = left.geometry()?;

        // RK4 in the backward variable s, so stages move from t_right
        // through the midpoint to t_left.
        let blend = |base: &[f64], k: &[f64], c: f64| -> Vec<f64> {
            base.iter().zip(k).map(|(x, dx)| x + c * dx).collect()
        };
        let k1 = conjugate_rhs(right, &cache_hi, &w);
        let k2 = conjugate_rhs(&mid, &cache_mid, &blend(&w, &k1, 0.5 * ds));
        let k3 = conjugate_rhs(&mid, &cache_mid, &blend(&w, &k2, 0.5 * ds));
        let k4 = conjugate_rhs(left, &cache_lo, &blend(&w, &k3, ds));
        for i in 0..n {
            w[i] += ds / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        check_weight(left.t, &w)?;

        out.push(ConjugateState {
            t: left.t,
            tau: tau0 + left.t,
            mass: integrate(&grid, &cache_lo, &w),
            w: w.clone(),
        });
        cache_hi = cache_lo;
    }

    out.reverse();
    Ok(out)
}

/// Pointwise fields of f = -ln w on one state, in (1,1)-tensor components.
struct WeightFields {
    /// |∇f|^2 = (f')^2 / a^2
    grad_sq: Vec<f64>,
    /// S_x^x and S_y^y
    su: Vec<f64>,
    sv: Vec<f64>,
    /// (Hess f)_x^x and (Hess f)_y^y
    hu: Vec<f64>,
    hv: Vec<f64>,
    /// Δφ - ⟨∇f, ∇φ⟩
    cross: Vec<f64>,
    /// ⟨∇f, ∇φ⟩ = f' (μ + p') / a^2
    f_dot_phi: Vec<f64>,
    f_prime: Vec<f64>,
    f: Vec<f64>,
}

fn weight_fields(state: &FlowState, cache: &GeometryCache, w: &[f64]) -> WeightFields {
    let n = state.grid.len();
    let f: Vec<f64> = w.iter().map(|x| -x.ln()).collect();
    let f_prime = central_derivative(&state.grid, &f);
    let (hess_xx, hess_yy) = hessian_terms(&state.grid, &state.metric, &f);
    let p_prime = central_derivative(&state.grid, &state.dilaton.p);
    let mut out = WeightFields {
        grad_sq: vec![0.0; n],
        su: vec![0.0; n],
        sv: vec![0.0; n],
        hu: vec![0.0; n],
        hv: vec![0.0; n],
        cross: vec![0.0; n],
        f_dot_phi: vec![0.0; n],
        f_prime,
        f,
    };
    for i in 0..n {
        let a_sq = state.metric.a[i] * state.metric.a[i];
        let b_sq = state.metric.b[i] * state.metric.b[i];
        let phi_x = state.dilaton.mu + p_prime[i];
        out.grad_sq[i] = out.f_prime[i] * out.f_prime[i] / a_sq;
        out.su[i] = cache.s_xx[i] / a_sq;
        out.sv[i] = cache.s_yy[i] / b_sq;
        out.hu[i] = hess_xx[i] / a_sq;
        out.hv[i] = hess_yy[i] / b_sq;
        out.f_dot_phi[i] = out.f_prime[i] * phi_x / a_sq;
        out.cross[i] = cache.lap_phi[i] - out.f_dot_phi[i];
    }
    out
}

/// ∫ field · w dv for a pointwise field given by index.
fn weighted_integral(
    cache: &GeometryCache,
    w: &[f64],
    h: f64,
    field: impl Fn(usize) -> f64,
) -> f64 {
    w.iter()
        .zip(&cache.rho)
        .enumerate()
        .map(|(i, (wi, rho))| field(i) * wi * rho)
        .sum::<f64>()
        * h
}

/// F_k = ∫ (|∇f|^2 + kS) e^{-f} dv with f = -ln w.
pub fn f_k(state: &FlowState, cache: &GeometryCache, w: &[f64], k: f64) -> Result<f64> {
    check_weight(state.t, w)?;
    let fields = weight_fields(state, cache, w);
    let h = state.grid.h();
    Ok(weighted_integral(cache, w, h, |i| {
        fields.grad_sq[i] + k * cache.s[i]
    }))
}

/// W_k = τ^2 ∫ [k(S + n/(2τ)) + |∇f|^2] e^{-f} dv.
pub fn w_k(state: &FlowState, cache: &GeometryCache, w: &[f64], k: f64, tau: f64) -> Result<f64> {
    check_weight(state.t, w)?;
    if !(tau > 0.0) {
        return Err(Error::NonPositiveTau { tau });
    }
    let fields = weight_fields(state, cache, w);
    let h = state.grid.h();
    let n_f = f64::from(state.n_dim);
    Ok(tau
        * tau
        * weighted_integral(cache, w, h, |i| {
            k * (cache.s[i] + n_f / (2.0 * tau)) + fields.grad_sq[i]
        }))
}

/// Right-hand side of dF_k/dt in either of its two equivalent forms.
pub fn df_k_rhs(
    state: &FlowState,
    cache: &GeometryCache,
    w: &[f64],
    k: f64,
    form: Form,
) -> Result<f64> {
    check_weight(state.t, w)?;
    let fields = weight_fields(state, cache, w);
    let h = state.grid.h();
    let alpha = state.alpha;
    let n_f = f64::from(state.n_dim);
    let r = state.rescale_r(cache);
    let rn = r / n_f;
    let wint = |field: &dyn Fn(usize) -> f64| weighted_integral(cache, w, h, field);

    let f_val = wint(&|i| fields.grad_sq[i] + k * cache.s[i]);
    let sq_plain = wint(&|i| {
        let tu = fields.su[i] + fields.hu[i];
        let tv = fields.sv[i] + fields.hv[i];
        tu * tu + tv * tv + alpha * fields.cross[i] * fields.cross[i]
    });

    match form {
        Form::A => {
            let s_sq = wint(&|i| {
                cache.s_norm_sq[i] + alpha * cache.lap_phi[i] * cache.lap_phi[i]
            });
            Ok(-2.0 * rn * f_val + 2.0 * (k - 1.0) * s_sq + 2.0 * sq_plain)
        }
        Form::B => {
            let mass = wint(&|_| 1.0);
            let s_sq_shift = wint(&|i| {
                let tu = fields.su[i] - rn;
                let tv = fields.sv[i] - rn;
                tu * tu + tv * tv + alpha * cache.lap_phi[i] * cache.lap_phi[i]
            });
            // In the Hessian block the trace cross term is folded through
            // weighted integration by parts (∫ Δf e^{-f} dv = ∫ |∇f|^2
            // e^{-f} dv); evaluating it componentwise would leave an O(h^2)
            // gap against form A. Scalar constants pick up the measured
            // mass for the same reason.
            let s_trace = wint(&|i| fields.su[i] + fields.sv[i]);
            let grad = wint(&|i| fields.grad_sq[i]);
            let sq_shift = sq_plain - 2.0 * rn * (s_trace + grad) + 2.0 * rn * rn * mass;
            Ok(2.0 * rn * (f_val - k * r * mass) + 2.0 * (k - 1.0) * s_sq_shift + 2.0 * sq_shift)
        }
    }
}

/// Right-hand side of dW_k/dt in either of its two equivalent forms.
pub fn dw_k_rhs(
    state: &FlowState,
    cache: &GeometryCache,
    w: &[f64],
    k: f64,
    tau: f64,
    form: Form,
) -> Result<f64> {
    check_weight(state.t, w)?;
    if !(tau > 0.0) {
        return Err(Error::NonPositiveTau { tau });
    }
    let fields = weight_fields(state, cache, w);
    let h = state.grid.h();
    let alpha = state.alpha;
    let n_f = f64::from(state.n_dim);
    let r = state.rescale_r(cache);
    let rn = r / n_f;
    let sa = 1.0 / (2.0 * tau);
    let wint = |field: &dyn Fn(usize) -> f64| weighted_integral(cache, w, h, field);

    let f_val = wint(&|i| fields.grad_sq[i] + k * cache.s[i]);
    let sq_plain = wint(&|i| {
        let tu = fields.su[i] + fields.hu[i] + sa;
        let tv = fields.sv[i] + fields.hv[i] + sa;
        tu * tu + tv * tv + alpha * fields.cross[i] * fields.cross[i]
    });

    match form {
        Form::A => {
            let s_sq = wint(&|i| {
                let tu = fields.su[i] + sa;
                let tv = fields.sv[i] + sa;
                tu * tu + tv * tv + alpha * cache.lap_phi[i] * cache.lap_phi[i]
            });
            Ok(2.0 * tau * tau * (-rn * f_val + (k - 1.0) * s_sq + sq_plain))
        }
        Form::B => {
            let mass = wint(&|_| 1.0);
            let s_sq_shift = wint(&|i| {
                let tu = fields.su[i] + sa - rn;
                let tv = fields.sv[i] + sa - rn;
                tu * tu + tv * tv + alpha * cache.lap_phi[i] * cache.lap_phi[i]
            });
            // Same trace folding as in df_k_rhs: the shifted Hessian block
            // is expanded against the unshifted one, with ∫ tr Hess f · w dv
            // replaced by its integration-by-parts value ∫ |∇f|^2 w dv.
            let s_trace = wint(&|i| fields.su[i] + fields.sv[i]);
            let grad = wint(&|i| fields.grad_sq[i]);
            let q = sa - rn;
            let delta = 2.0 * (q * q - sa * sa);
            let sq_shift = sq_plain - 2.0 * rn * (s_trace + grad) + delta * mass;
            Ok(2.0
                * tau
                * tau
                * (rn * (f_val - k * r * mass)
                    + k * r * mass / tau
                    + (k - 1.0) * s_sq_shift
                    + sq_shift))
        }
    }
}

/// Both sides of the three weighted integration-by-parts identities that
/// relate the squared tensor blocks to Laplacian terms. Discrete residuals
/// are O(h^2) for smooth data and zero for constant f.
#[derive(Clone, Debug)]
pub struct IdentityResiduals {
    /// ∫|Hess f|^2 w dv versus its weighted Bochner expression.
    pub hessian_square: (f64, f64),
    /// 2∫ S^{ij} f_{ij} w dv versus its divergence-identity expression.
    pub mixed_contraction: (f64, f64),
    /// ∫|S_ij + f_ij|^2 w dv versus the combination of the other two.
    pub combined_square: (f64, f64),
}

impl IdentityResiduals {
    pub fn residuals(&self) -> [f64; 3] {
        [
            self.hessian_square.0 - self.hessian_square.1,
            self.mixed_contraction.0 - self.mixed_contraction.1,
            self.combined_square.0 - self.combined_square.1,
        ]
    }

    pub fn max_abs_residual(&self) -> f64 {
        self.residuals().iter().fold(0.0f64, |m, r| m.max(r.abs()))
    }
}

/// Evaluate both sides of the three weighted integral identities on one
/// state. Callers guarantee w > 0.
pub fn integral_identities_check(
    state: &FlowState,
    cache: &GeometryCache,
    w: &[f64],
) -> IdentityResiduals {
    debug_assert!(w.iter().all(|x| *x > 0.0));
    let fields = weight_fields(state, cache, w);
    let h = state.grid.h();
    let alpha = state.alpha;
    let grid = &state.grid;
    let metric = &state.metric;
    let wint = |field: &dyn Fn(usize) -> f64| weighted_integral(cache, w, h, field);

    let lap_grad_sq = laplace_beltrami(grid, metric, &fields.grad_sq, 0);
    let lap_f = laplace_beltrami(grid, metric, &fields.f, 0);
    let bilap_f = laplace_beltrami(grid, metric, &lap_f, 0);
    let lap_s = laplace_beltrami(grid, metric, &cache.s, 0);

    // S_ij f^i f^j reduces to S_x^x |∇f|^2 because f has no y-dependence.
    let s_ff = |i: usize| fields.su[i] * fields.grad_sq[i];

    let hessian_lhs = wint(&|i| fields.hu[i] * fields.hu[i] + fields.hv[i] * fields.hv[i]);
    let hessian_rhs = wint(&|i| {
        0.5 * lap_grad_sq[i] - bilap_f[i] - s_ff(i)
            - alpha * fields.f_dot_phi[i] * fields.f_dot_phi[i]
    });

    let mixed_lhs =
        2.0 * wint(&|i| fields.su[i] * fields.hu[i] + fields.sv[i] * fields.hv[i]);
    let mixed_rhs = wint(&|i| {
        2.0 * s_ff(i) - lap_s[i] + 2.0 * alpha * cache.lap_phi[i] * fields.f_dot_phi[i]
    });

    let combined_lhs = wint(&|i| {
        let tu = fields.su[i] + fields.hu[i];
        let tv = fields.sv[i] + fields.hv[i];
        tu * tu + tv * tv
    });
    let combined_rhs = wint(&|i| {
        cache.s_norm_sq[i] + s_ff(i) + 0.5 * lap_grad_sq[i] - bilap_f[i] - lap_s[i]
            - alpha * fields.f_dot_phi[i] * fields.f_dot_phi[i]
            + 2.0 * alpha * cache.lap_phi[i] * fields.f_dot_phi[i]
    });

    IdentityResiduals {
        hessian_square: (hessian_lhs, hessian_rhs),
        mixed_contraction: (mixed_lhs, mixed_rhs),
        combined_square: (combined_lhs, combined_rhs),
    }
}
