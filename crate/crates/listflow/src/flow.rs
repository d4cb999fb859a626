//! Time integration of the rescaled flow on the symmetric surface class.
//!
//! The evolution system reduces to three coupled x-profiles:
//!
//!   a_t = -S_xx/a + (r/n) a = -K a + α(µ+p')²/a + (r/n) a
//!   b_t = -S_yy/b + (r/n) b = -K b            + (r/n) b
//!   p_t =  Δφ
//!
//! with r either zero, a prescribed constant, or the volume-preserving
//! average ∫S dv / ∫dv recomputed at every Runge–Kutta stage. The winding
//! slope µ never enters a right-hand side and is conserved exactly.
//!
//! The accumulated rescaling ∫₀ᵗ r ds is carried as an extra component of
//! the Runge–Kutta state, so it converges at the same fourth order as the
//! profiles. Steps are guarded by the diffusive stability bound
//! dt ≤ σ h² min(a²)/4 and a collapse floor on min(a, b).

use crate::error::{Error, Result};
use crate::geometry::{compute_geometry, integrate, GeometryCache};
use crate::grid::{DilatonProfile, MetricProfile, TorusGrid};

/// Default safety factor in the stability bound.
pub const STABILITY_SAFETY: f64 = 0.5;

/// Upper limit for the safety factor. RK4 is absolutely stable on the
/// negative real axis only out to about 2.785, so the bound stops being
/// a guarantee past this point.
pub const STABILITY_SAFETY_MAX: f64 = 2.78;

/// Hard floor for metric coefficients during stepping.
pub const COLLAPSE_FLOOR: f64 = 1e-6;

/// Choice of the rescaling function r(t).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RescalePolicy {
    /// r ≡ 0: the unrescaled flow.
    Zero,
    /// r = ∫S dv / ∫dv: keeps the total area constant.
    AverageS,
    /// r ≡ c.
    PrescribedConstant(f64),
}

/// Full state of the flow at one instant.
#[derive(Debug, Clone)]
pub struct FlowState {
    pub t: f64,
    pub grid: TorusGrid,
    pub metric: MetricProfile,
    pub dilaton: DilatonProfile,
    pub alpha: f64,
    /// Dimension n in the rescaling factor r/n; 2 for this surface class.
    pub n_dim: u32,
    pub policy: RescalePolicy,
    /// ∫₀ᵗ r ds, advanced together with the profiles.
    pub ir: f64,
    /// min_x S at construction time; the comparison bounds start from it.
    pub s_min_initial: f64,
    /// Safety factor σ in the step bound σ h² min(a²)/4. Spatially uniform
    /// states tolerate σ up to the RK4 limit; curved ones should keep the
    /// default margin.
    pub safety: f64,
}

impl FlowState {
    pub fn new(
        grid: TorusGrid,
        metric: MetricProfile,
        dilaton: DilatonProfile,
        alpha: f64,
        policy: RescalePolicy,
    ) -> Result<Self> {
        let cache = compute_geometry(&grid, &metric, &dilaton, alpha)?;
        let s_min_initial = cache.s_min();
        Ok(FlowState {
            t: 0.0,
            grid,
            metric,
            dilaton,
            alpha,
            n_dim: 2,
            policy,
            ir: 0.0,
            s_min_initial,
            safety: STABILITY_SAFETY,
        })
    }

    /// Replace the stability safety factor; values above the RK4 limit are
    /// rejected because the bound would no longer bound anything.
    pub fn with_safety(mut self, safety: f64) -> Result<Self> {
        if !(safety > 0.0 && safety <= STABILITY_SAFETY_MAX) {
            return Err(Error::Usage(format!(
                "safety factor {safety} outside (0, {STABILITY_SAFETY_MAX}]"
            )));
        }
        self.safety = safety;
        Ok(self)
    }

    pub fn geometry(&self) -> Result<GeometryCache> {
        compute_geometry(&self.grid, &self.metric, &self.dilaton, self.alpha)
    }

    /// r for this state's policy, given its geometry.
    pub fn rescale_r(&self, cache: &GeometryCache) -> f64 {
        match self.policy {
            RescalePolicy::Zero => 0.0,
            RescalePolicy::AverageS => integrate(&self.grid, cache, &cache.s) / cache.area,
            RescalePolicy::PrescribedConstant(c) => c,
        }
    }

    /// Largest stable time step for this state: σ h² min(a²)/4.
    pub fn stability_bound(&self) -> f64 {
        let h = self.grid.h();
        let min_a = self.metric.a.iter().fold(f64::INFINITY, |m, &v| m.min(v));
        self.safety * h * h * min_a * min_a / 4.0
    }
}

/// Right-hand side of the evolution system at one state.
#[derive(Debug, Clone)]
pub struct FlowRhs {
    pub da: Vec<f64>,
    pub db: Vec<f64>,
    pub dp: Vec<f64>,
    pub r: f64,
}

/// Evaluate the flow system's right-hand side.
pub fn flow_rhs(state: &FlowState) -> Result<FlowRhs> {
    let cache = state.geometry()?;
    Ok(rhs_from_cache(state, &cache))
}

pub(crate) fn rhs_from_cache(state: &FlowState, cache: &GeometryCache) -> FlowRhs {
    let n = state.grid.len();
    let r = state.rescale_r(cache);
    let n_f = f64::from(state.n_dim);
    let mut rhs = FlowRhs {
        da: vec![0.0; n],
        db: vec![0.0; n],
        dp: cache.lap_phi.clone(),
        r,
    };
    for i in 0..n {
        let a = state.metric.a[i];
        let b = state.metric.b[i];
        rhs.da[i] = -cache.s_xx[i] / a + r / n_f * a;
        rhs.db[i] = -cache.s_yy[i] / b + r / n_f * b;
    }
    rhs
}

fn stage_state(base: &FlowState, rhs: &FlowRhs, scale: f64, stage_t: f64) -> Result<FlowState> {
    let n = base.grid.len();
    let mut a = Vec::with_capacity(n);
    let mut b = Vec::with_capacity(n);
    let mut p = Vec::with_capacity(n);
    let mut min_ab = f64::INFINITY;
    for i in 0..n {
        let ai = base.metric.a[i] + scale * rhs.da[i];
        let bi = base.metric.b[i] + scale * rhs.db[i];
        min_ab = min_ab.min(ai).min(bi);
        a.push(ai);
        b.push(bi);
        p.push(base.dilaton.p[i] + scale * rhs.dp[i]);
    }
    if !(min_ab >= COLLAPSE_FLOOR) {
        return Err(Error::NonPositiveMetric {
            t: stage_t,
            min_value: min_ab,
        });
    }
    Ok(FlowState {
        t: stage_t,
        metric: MetricProfile { a, b },
        dilaton: DilatonProfile {
            mu: base.dilaton.mu,
            p,
        },
        ir: base.ir,
        ..base.clone()
    })
}

/// One classical Runge–Kutta step. Errors if dt violates the stability
/// bound of the current state or any stage hits the collapse floor.
pub fn step_rk4(state: &FlowState, dt: f64) -> Result<FlowState> {
    let bound = state.stability_bound();
    if dt > bound {
        return Err(Error::StabilityViolation {
            t: state.t,
            dt,
            bound,
        });
    }

    let k1 = flow_rhs(state)?;
    let s2 = stage_state(state, &k1, 0.5 * dt, state.t + 0.5 * dt)?;
    let k2 = flow_rhs(&s2)?;
    let s3 = stage_state(state, &k2, 0.5 * dt, state.t + 0.5 * dt)?;
    let k3 = flow_rhs(&s3)?;
    let s4 = stage_state(state, &k3, dt, state.t + dt)?;
    let k4 = flow_rhs(&s4)?;

    let n = state.grid.len();
    let mut a = Vec::with_capacity(n);
    let mut b = Vec::with_capacity(n);
    let mut p = Vec::with_capacity(n);
    let mut min_ab = f64::INFINITY;
    let w = dt / 6.0;
    for i in 0..n {
        let ai = state.metric.a[i]
            + w * (k1.da[i] + 2.0 * k2.da[i] + 2.0 * k3.da[i] + k4.da[i]);
        let bi = state.metric.b[i]
            + w * (k1.db[i] + 2.0 * k2.db[i] + 2.0 * k3.db[i] + k4.db[i]);
        min_ab = min_ab.min(ai).min(bi);
        a.push(ai);
        b.push(bi);
        p.push(
            state.dilaton.p[i]
                + w * (k1.dp[i] + 2.0 * k2.dp[i] + 2.0 * k3.dp[i] + k4.dp[i]),
        );
    }
    if !(min_ab >= COLLAPSE_FLOOR) {
        return Err(Error::NonPositiveMetric {
            t: state.t + dt,
            min_value: min_ab,
        });
    }

    Ok(FlowState {
        t: state.t + dt,
        metric: MetricProfile { a, b },
        dilaton: DilatonProfile {
            mu: state.dilaton.mu,
            p,
        },
        ir: state.ir + w * (k1.r + 2.0 * k2.r + 2.0 * k3.r + k4.r),
        ..state.clone()
    })
}

/// Flow trajectory sampled every `stride` steps (the initial state is
/// always included). Snapshot spacing is uniformly stride·dt.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub states: Vec<FlowState>,
    pub dt: f64,
    pub stride: usize,
    /// r evaluated at each stored snapshot.
    pub r_series: Vec<f64>,
}

impl Trajectory {
    pub fn times(&self) -> Vec<f64> {
        self.states.iter().map(|s| s.t).collect()
    }

    /// Time between stored snapshots.
    pub fn snapshot_dt(&self) -> f64 {
        self.dt * self.stride as f64
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn last(&self) -> &FlowState {
        self.states.last().expect("trajectory holds at least t = 0")
    }
}

/// Integrate from `state0` to (at least) `t_final - dt/2`, storing every
/// `stride`-th state. The step count is rounded to a multiple of `stride`
/// so snapshots stay uniformly spaced.
pub fn run(state0: FlowState, t_final: f64, dt: f64, stride: usize) -> Result<Trajectory> {
    if !(dt > 0.0) {
        return Err(Error::Usage(format!("dt must be positive, got {dt}")));
    }
    if stride == 0 {
        return Err(Error::Usage("stride must be at least 1".into()));
    }
    if t_final < 0.0 {
        return Err(Error::Usage(format!(
            "final time must be nonnegative, got {t_final}"
        )));
    }

    let raw_steps = (t_final / dt).round() as usize;
    let steps = if raw_steps == 0 && t_final > 0.5 * dt {
        stride
    } else {
        raw_steps.div_ceil(stride) * stride
    };

    let cache0 = state0.geometry()?;
    let r0 = state0.rescale_r(&cache0);
    let mut traj = Trajectory {
        states: vec![state0],
        dt,
        stride,
        r_series: vec![r0],
    };

    let mut current = traj.states[0].clone();
    for step in 1..=steps {
        current = step_rk4(&current, dt)?;
        if step % stride == 0 {
            let cache = current.geometry()?;
            traj.r_series.push(current.rescale_r(&cache));
            traj.states.push(current.clone());
        }
    }
    Ok(traj)
}

/// Closed-form scale factor of the winding solution: a ≡ a0, b ≡ 1,
/// φ = µx, r ≡ 0 evolves with a(t) = sqrt(a0² + 2αµ²t).
pub fn exact_winding_solution(a0: f64, mu: f64, alpha: f64, t: f64) -> f64 {
    (a0 * a0 + 2.0 * alpha * mu * mu * t).sqrt()
}

/// Lower solution of the scalar comparison ODE
///
///   dx/dt = (2/n) x² - (2r/n) x,   x(0) = S_min(0),
///
/// evaluated at time `t` from a sampled r series (piecewise linear).
/// Two independent routes are always computed: the closed form
///
///   x(t) = x0 E(t) / (1 - (2/n) x0 ∫₀ᵗ E),   E = exp(-(2/n)∫₀ᵗ r),
///
/// with refined trapezoid quadrature, and a direct Runge–Kutta
/// integration of the ODE. They must agree to 1e-6 relative; the
/// closed-form value is returned. Errors with `BoundBlowup` when the
/// closed-form denominator loses positivity on [0, t].
pub fn comparison_solution(
    s_min0: f64,
    n_dim: u32,
    times: &[f64],
    r_values: &[f64],
    t: f64,
) -> Result<f64> {
    let closed = comparison_closed_form(s_min0, n_dim, times, r_values, t)?;
    let direct = comparison_rk4(s_min0, n_dim, times, r_values, t);
    let scale = 1.0 + closed.abs();
    assert!(
        (closed - direct).abs() <= 1e-6 * scale,
        "comparison routes disagree: closed {closed} vs direct {direct} at t = {t}"
    );
    Ok(closed)
}

fn check_series(times: &[f64], r_values: &[f64], t: f64) -> Result<()> {
    if times.len() != r_values.len() || times.len() < 2 {
        return Err(Error::Usage(format!(
            "r series needs matching times/values with at least two samples, got {}/{}",
            times.len(),
            r_values.len()
        )));
    }
    if times.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Usage("r series times must be increasing".into()));
    }
    if t < times[0] || t > times[times.len() - 1] + 1e-12 {
        return Err(Error::Usage(format!(
            "t = {t} outside the sampled range [{}, {}]",
            times[0],
            times[times.len() - 1]
        )));
    }
    Ok(())
}

fn comparison_closed_form(
    s_min0: f64,
    n_dim: u32,
    times: &[f64],
    r_values: &[f64],
    t: f64,
) -> Result<f64> {
    check_series(times, r_values, t)?;
    let c = 2.0 / f64::from(n_dim);
    // Sub-sampling keeps the trapezoid error of ∫E well below the route
    // agreement tolerance even for coarse r series.
    const SUBS: usize = 64;

    let mut ir = 0.0;
    let mut ie = 0.0;
    let mut s_prev = times[0];
    let mut e_prev = 1.0;
    let mut denom = 1.0;
    let mut e_at_t = 1.0;

    'outer: for j in 0..times.len() - 1 {
        let (t0, t1) = (times[j], times[j + 1]);
        let (r0, r1) = (r_values[j], r_values[j + 1]);
        let seg_end = t1.min(t);
        if seg_end <= t0 {
            break;
        }
        let ir_base = ir;
        for k in 1..=SUBS {
            let s = t0 + (seg_end - t0) * k as f64 / SUBS as f64;
            let r_s = r0 + (r1 - r0) * (s - t0) / (t1 - t0);
            // exact integral of the linear interpolant on [t0, s]
            let ir_s = ir_base + 0.5 * (r0 + r_s) * (s - t0);
            let e = (-c * ir_s).exp();
            ie += 0.5 * (e_prev + e) * (s - s_prev);
            denom = 1.0 - c * s_min0 * ie;
            if denom <= 0.0 {
                return Err(Error::BoundBlowup {
                    t: s,
                    denominator: denom,
                });
            }
            e_prev = e;
            s_prev = s;
            if s >= t {
                e_at_t = e;
                ir = ir_s;
                break 'outer;
            }
        }
        ir = ir_base + 0.5 * (r0 + r1) * (t1 - t0);
        e_at_t = e_prev;
    }
    let _ = ir;
    Ok(s_min0 * e_at_t / denom)
}

fn comparison_rk4(s_min0: f64, n_dim: u32, times: &[f64], r_values: &[f64], t: f64) -> f64 {
    let c = 2.0 / f64::from(n_dim);
    let r_at = |s: f64| -> f64 {
        let last = times.len() - 1;
        if s <= times[0] {
            return r_values[0];
        }
        if s >= times[last] {
            return r_values[last];
        }
        let j = times.partition_point(|&tj| tj <= s) - 1;
        let w = (s - times[j]) / (times[j + 1] - times[j]);
        r_values[j] + (r_values[j + 1] - r_values[j]) * w
    };
    let f = |s: f64, x: f64| c * x * x - c * r_at(s) * x;

    let span = t - times[0];
    if span <= 0.0 {
        return s_min0;
    }
    let steps = ((span / 1e-3).ceil() as usize).clamp(256, 200_000);
    let dt = span / steps as f64;
    let mut x = s_min0;
    let mut s = times[0];
    for _ in 0..steps {
        let k1 = f(s, x);
        let k2 = f(s + 0.5 * dt, x + 0.5 * dt * k1);
        let k3 = f(s + 0.5 * dt, x + 0.5 * dt * k2);
        let k4 = f(s + dt, x + dt * k3);
        x += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        s += dt;
    }
    x
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn winding_state(n: usize, a0: f64, mu: f64, alpha: f64, policy: RescalePolicy) -> FlowState {
        let grid = TorusGrid::new(n, 2.0 * PI, PI / 2.0).unwrap();
        let metric = MetricProfile::new(vec![a0; n], vec![1.0; n]).unwrap();
        let dilaton = DilatonProfile::new(mu, vec![0.0; n]);
        FlowState::new(grid, metric, dilaton, alpha, policy).unwrap()
    }

    fn bump_state(n: usize, eps: f64, policy: RescalePolicy) -> FlowState {
        let grid = TorusGrid::new(n, 2.0 * PI, PI / 2.0).unwrap();
        let b: Vec<f64> = grid.sample(|x| 1.0 + eps * x.cos());
        let metric = MetricProfile::new(vec![1.0; n], b).unwrap();
        FlowState::new(grid, metric, DilatonProfile::constant(n), 2.0, policy).unwrap()
    }

    #[test]
    fn winding_rhs_under_average_rescaling() {
        // a0 = 1, µ = 1, α = 2: S ≡ -2, r = -2, so a_t = 2 - 1 = 1 and
        // b_t = 0 - 1 = -1 at every node.
        let state = winding_state(32, 1.0, 1.0, 2.0, RescalePolicy::AverageS);
        let rhs = flow_rhs(&state).unwrap();
        assert!((rhs.r + 2.0).abs() < 1e-13);
        for i in 0..32 {
            assert!((rhs.da[i] - 1.0).abs() < 1e-12, "da {}", rhs.da[i]);
            assert!((rhs.db[i] + 1.0).abs() < 1e-12, "db {}", rhs.db[i]);
            assert_eq!(rhs.dp[i], 0.0);
        }
        assert!((state.s_min_initial + 2.0).abs() < 1e-13);
    }

    #[test]
    fn flat_state_is_stationary() {
        let state = bump_state(32, 0.0, RescalePolicy::Zero);
        let rhs = flow_rhs(&state).unwrap();
        assert!(rhs.da.iter().all(|&v| v == 0.0));
        assert!(rhs.db.iter().all(|&v| v == 0.0));
        assert_eq!(rhs.r, 0.0);
    }

    #[test]
    fn winding_matches_exact_scale_factor() {
        let state = winding_state(64, 1.0, 1.0, 2.0, RescalePolicy::Zero);
        let traj = run(state, 0.5, 1e-3, 50).unwrap();
        let last = traj.last();
        assert!((last.t - 0.5).abs() < 1e-12);
        let want = exact_winding_solution(1.0, 1.0, 2.0, 0.5); // sqrt(3)
        assert!((want - 3.0_f64.sqrt()).abs() < 1e-15);
        for i in 0..64 {
            let rel = (last.metric.a[i] - want).abs() / want;
            assert!(rel < 1e-9, "relative error {rel}");
            assert!((last.metric.b[i] - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn stepping_is_fourth_order_in_dt() {
        let err_at = |dt: f64| {
            let state = winding_state(16, 1.0, 1.0, 2.0, RescalePolicy::Zero);
            let traj = run(state, 0.1, dt, (0.1 / dt).round() as usize).unwrap();
            let want = exact_winding_solution(1.0, 1.0, 2.0, 0.1);
            (traj.last().metric.a[0] - want).abs()
        };
        // dt large enough that roundoff does not mask the truncation error
        let e1 = err_at(2e-3);
        let e2 = err_at(1e-3);
        let order = crate::series::convergence_order(e1, e2, 2.0);
        assert!(order > 3.6, "observed order {order} ({e1:e} -> {e2:e})");
    }

    #[test]
    fn mu_is_conserved_bitwise_and_ir_tracks_prescribed_r() {
        let state = winding_state(16, 1.0, 0.7, 2.0, RescalePolicy::PrescribedConstant(0.3));
        let mu0 = state.dilaton.mu;
        let traj = run(state, 0.2, 1e-3, 20).unwrap();
        for s in &traj.states {
            assert_eq!(s.dilaton.mu.to_bits(), mu0.to_bits());
        }
        // constant r integrates exactly
        let last = traj.last();
        assert!((last.ir - 0.3 * last.t).abs() < 1e-14);

        let zero = winding_state(16, 1.0, 0.7, 2.0, RescalePolicy::Zero);
        let traj = run(zero, 0.2, 1e-3, 20).unwrap();
        assert_eq!(traj.last().ir, 0.0);
    }

    #[test]
    fn average_rescaling_preserves_area() {
        let state = winding_state(48, 1.0, 1.0, 2.0, RescalePolicy::AverageS);
        let area0 = state.geometry().unwrap().area;
        let traj = run(state, 0.5, 5e-4, 50).unwrap();
        for s in &traj.states {
            let area = s.geometry().unwrap().area;
            assert!(
                (area / area0 - 1.0).abs() < 1e-9,
                "area drift {:e} at t = {}",
                area / area0 - 1.0,
                s.t
            );
        }
        // Ir is fourth order; the trapezoid of the snapshot r series is the
        // crude side of this comparison, so the tolerance is O(Δt_snap²).
        // Here r(t) = -2/(1+2t), so Ir(0.5) = -ln 2.
        let last = traj.last();
        assert!((last.ir + 2.0_f64.ln()).abs() < 1e-10, "ir {}", last.ir);
        let times = traj.times();
        let ir_trap = crate::series::cumulative_trapezoid(&times, &traj.r_series);
        assert!((last.ir - ir_trap[ir_trap.len() - 1]).abs() < 5e-4);
    }

    #[test]
    fn bump_flow_smooths_curvature() {
        // the ε cos x perturbation decays roughly like e^{-t}
        let state = bump_state(64, 0.1, RescalePolicy::Zero);
        let k0_max = state
            .geometry()
            .unwrap()
            .k
            .iter()
            .fold(0.0_f64, |m, &v| m.max(v.abs()));
        let traj = run(state, 1.0, 5e-4, 100).unwrap();
        let k1_max = traj
            .last()
            .geometry()
            .unwrap()
            .k
            .iter()
            .fold(0.0_f64, |m, &v| m.max(v.abs()));
        assert!(
            k1_max < 0.5 * k0_max,
            "curvature did not decay: {k0_max} -> {k1_max}"
        );
    }

    #[test]
    fn oversized_step_is_rejected() {
        let state = winding_state(64, 1.0, 1.0, 2.0, RescalePolicy::Zero);
        let bound = state.stability_bound();
        match step_rk4(&state, 2.0 * bound) {
            Err(Error::StabilityViolation { .. }) => {}
            other => panic!("expected stability violation, got {other:?}"),
        }
    }

    #[test]
    fn collapse_guard_fires() {
        // b starts just above the collapse floor; r = -100 contracts it
        // through the floor long before the shrinking a tightens the
        // stability bound below dt.
        let n = 64;
        let grid = TorusGrid::new(n, 2.0 * PI, PI / 2.0).unwrap();
        let metric = MetricProfile::new(vec![1.0; n], vec![1.5e-6; n]).unwrap();
        let dilaton = DilatonProfile::constant(n);
        let state = FlowState::new(
            grid,
            metric,
            dilaton,
            2.0,
            RescalePolicy::PrescribedConstant(-100.0),
        )
        .unwrap();
        match run(state, 0.05, 2e-4, 1) {
            Err(Error::NonPositiveMetric { t, min_value }) => {
                assert!(t > 0.0 && min_value < COLLAPSE_FLOOR);
            }
            other => panic!("expected collapse, got {other:?}"),
        }
    }

    #[test]
    fn snapshots_are_uniform_and_cover_t_final() {
        let state = winding_state(16, 1.0, 1.0, 2.0, RescalePolicy::Zero);
        let traj = run(state, 0.103, 1e-3, 10).unwrap();
        let times = traj.times();
        assert_eq!(times[0], 0.0);
        let spacing = traj.snapshot_dt();
        for w in times.windows(2) {
            assert!((w[1] - w[0] - spacing).abs() < 1e-12);
        }
        assert!(traj.last().t >= 0.103 - 5e-4);
    }

    #[test]
    fn comparison_closed_forms_zero_rescaling() {
        // r ≡ 0, n = 2, x0 = -2: x(t) = -2/(1+2t); quadratures are exact.
        let times: Vec<f64> = (0..=50).map(|j| 0.01 * j as f64).collect();
        let rs = vec![0.0; times.len()];
        let x = comparison_solution(-2.0, 2, &times, &rs, 0.5).unwrap();
        assert!((x + 1.0).abs() < 1e-12, "got {x}");
        // S_min(0) = 0 stays exactly 0
        let x = comparison_solution(0.0, 2, &times, &rs, 0.5).unwrap();
        assert_eq!(x, 0.0);
    }

    #[test]
    fn comparison_matches_frozen_constant_rescaling_value() {
        // r ≡ 1, n = 2, x0 = -1: the ODE x' = x² - x with x(0) = -1 has
        // exact solution x(t) = 1/(1 - 2eᵗ), so x(1) = 1/(1-2e).
        let times: Vec<f64> = (0..=100).map(|j| 0.01 * j as f64).collect();
        let rs = vec![1.0; times.len()];
        let x = comparison_solution(-1.0, 2, &times, &rs, 1.0).unwrap();
        let exact = 1.0 / (1.0 - 2.0 * std::f64::consts::E);
        assert!((exact - (-0.225_399_673_560_564_09)).abs() < 1e-15);
        assert!((x - exact).abs() < 1e-8, "got {x} want {exact}");
    }

    #[test]
    fn comparison_routes_agree_on_oscillatory_rescaling() {
        let times: Vec<f64> = (0..=80).map(|j| 0.025 * j as f64).collect();
        let rs: Vec<f64> = times.iter().map(|t| 0.8 * (3.0 * t).sin()).collect();
        // assertion inside comparison_solution enforces the 1e-6 agreement
        let x = comparison_solution(-1.3, 2, &times, &rs, 2.0).unwrap();
        assert!(x < 0.0 && x > -1.3);
    }

    #[test]
    fn comparison_blowup_is_detected() {
        // x0 = +2, r ≡ 0: denominator 1 - 2t hits zero at t = 0.5.
        let times: Vec<f64> = (0..=100).map(|j| 0.01 * j as f64).collect();
        let rs = vec![0.0; times.len()];
        match comparison_closed_form(2.0, 2, &times, &rs, 0.75) {
            Err(Error::BoundBlowup { t, .. }) => {
                assert!((t - 0.5).abs() < 0.02, "blowup located at {t}");
            }
            other => panic!("expected blowup, got {other:?}"),
        }
        let x = comparison_solution(2.0, 2, &times, &rs, 0.4).unwrap();
        assert!((x - 2.0 / (1.0 - 0.8)).abs() < 1e-9);
    }

    #[test]
    fn trajectory_r_series_matches_snapshots() {
        let state = winding_state(32, 1.0, 1.0, 2.0, RescalePolicy::AverageS);
        let traj = run(state, 0.2, 1e-3, 40).unwrap();
        assert_eq!(traj.r_series.len(), traj.len());
        for (s, &r) in traj.states.iter().zip(&traj.r_series) {
            let cache = s.geometry().unwrap();
            assert!((s.rescale_r(&cache) - r).abs() < 1e-15);
        }
    }
}
