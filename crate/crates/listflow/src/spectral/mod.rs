//! Spectra of Schrodinger-type operators on the evolving surface.
//!
//! The operators have the form `-c2 Δ + c0 S` with `Δ` the Laplace-Beltrami
//! operator of the current metric and `S` its curvature potential. Because
//! every profile is independent of y, the operator block-diagonalizes over
//! transverse Fourier sectors: an eigenfunction in sector m looks like
//! `u(x, y) = v(x) e_m(y)` with `e_0 = 1` and `e_m = sqrt(2) cos(2 pi m y / Ly)`,
//! normalized so the y-average of `e_m^2` is one.
//!
//! Each sector reduces to a generalized symmetric problem `A v = λ M v`,
//! where `A` is the stiffness-plus-potential matrix of the flux
//! discretization and `M` the lumped volume weights. Eigenvectors are
//! returned with `∫ u^2 dv = 1` and the largest-magnitude entry positive.

pub mod dense;

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::geometry::GeometryCache;
use crate::grid::{MetricProfile, TorusGrid};
use dense::Matrix;

/// Largest grid the dense solver is willing to factor.
pub const MAX_POINTS: usize = 1024;

/// Relative threshold below which an eigenvalue counts as zero.
pub const ZERO_EIGEN_REL_TOL: f64 = 1e-8;

/// Same-sector eigenvalues closer than this are one multiplet; a symmetric
/// profile carries cos/sin pairs whose discrete eigenvalues coincide to
/// rounding, and those must not be mistaken for a spectral collision.
pub const MULTIPLET_REL_TOL: f64 = 1e-9;

/// Gap below which two genuinely distinct branches are flagged as too close
/// for the tracked eigenvalue to be trustworthy.
pub const NEAR_DEGENERATE_REL_TOL: f64 = 1e-4;

/// Which operator to diagonalize and how much of its spectrum to keep.
#[derive(Clone, Copy, Debug)]
pub struct OperatorSpec {
    /// Coefficient of `-Δ`; must be positive.
    pub c2: f64,
    /// Coefficient of the curvature potential `S`.
    pub c0: f64,
    /// Highest transverse sector scanned.
    pub m_max: u32,
    /// Eigenpairs kept per sector.
    pub count: usize,
}

/// One eigenpair, tagged with its transverse sector and the flow time of the
/// geometry it was computed on.
#[derive(Clone, Debug)]
pub struct EigenPair {
    pub lambda: f64,
    /// x-profile of the eigenfunction, normalized so `∫ u^2 dv = 1`.
    pub v: Vec<f64>,
    pub mode: u32,
    pub t: f64,
}

/// Branch correspondence between two spectra of the same operator.
#[derive(Clone, Debug)]
pub struct TrackEntry {
    pub prev_index: usize,
    pub next_index: usize,
    /// |⟨u_prev, u_next⟩| in the volume measure of the next geometry.
    pub overlap: f64,
    /// True when another branch sits close enough to contaminate the match.
    pub near_degenerate: bool,
}

#[derive(Clone, Debug)]
pub struct TrackMap {
    pub entries: Vec<TrackEntry>,
    pub min_abs_overlap: f64,
}

fn transverse_wave_number(grid: &TorusGrid, mode: u32) -> f64 {
    2.0 * PI * f64::from(mode) / grid.ly()
}

/// Stiffness-plus-potential matrix and lumped volume weights for one sector.
///
/// The matrix represents the quadratic form
/// `Q(v) = c2 Ly/h Σ w_{i+1/2} (v_{i+1} - v_i)^2
///        + Σ (c2 m̃^2 / b_i^2 + c0 S_i) v_i^2 ρ_i h`
/// with `w_{i+1/2}` the same half-point `b/a` ratio the flux Laplacian uses,
/// so `A v = λ M v` reproduces `-c2 Δ v + c0 S v = λ v` pointwise.
fn assemble(
    grid: &TorusGrid,
    metric: &MetricProfile,
    cache: &GeometryCache,
    spec: &OperatorSpec,
    mode: u32,
) -> (Matrix, Vec<f64>) {
    let n = grid.len();
    let h = grid.h();
    let ly = grid.ly();
    let m_wave = transverse_wave_number(grid, mode);
    let mass: Vec<f64> = cache.rho.iter().map(|r| r * h).collect();

    let mut a_mat = Matrix::zeros(n);
    for i in 0..n {
        let ip = (i + 1) % n;
        let w = (metric.b[i] + metric.b[ip]) / (metric.a[i] + metric.a[ip]);
        let k = spec.c2 * ly * w / h;
        a_mat.add(i, i, k);
        a_mat.add(ip, ip, k);
        a_mat.add(i, ip, -k);
        a_mat.add(ip, i, -k);
    }
    for i in 0..n {
        let potential =
            spec.c2 * m_wave * m_wave / (metric.b[i] * metric.b[i]) + spec.c0 * cache.s[i];
        a_mat.add(i, i, potential * mass[i]);
    }
    (a_mat, mass)
}

/// Value of the operator's quadratic form on an arbitrary x-profile.
pub fn quadratic_form(
    grid: &TorusGrid,
    metric: &MetricProfile,
    cache: &GeometryCache,
    spec: &OperatorSpec,
    mode: u32,
    v: &[f64],
) -> f64 {
    let n = grid.len();
    assert_eq!(v.len(), n, "profile length must match the grid");
    let h = grid.h();
    let ly = grid.ly();
    let m_wave = transverse_wave_number(grid, mode);
    let mut total = 0.0;
    for i in 0..n {
        let ip = (i + 1) % n;
        let w = (metric.b[i] + metric.b[ip]) / (metric.a[i] + metric.a[ip]);
        let dv = v[ip] - v[i];
        total += spec.c2 * ly * w * dv * dv / h;
        let potential =
            spec.c2 * m_wave * m_wave / (metric.b[i] * metric.b[i]) + spec.c0 * cache.s[i];
        total += potential * v[i] * v[i] * cache.rho[i] * h;
    }
    total
}

/// Rayleigh quotient `Q(v) / ∫ u^2 dv`.
pub fn rayleigh_quotient(
    grid: &TorusGrid,
    metric: &MetricProfile,
    cache: &GeometryCache,
    spec: &OperatorSpec,
    mode: u32,
    v: &[f64],
) -> f64 {
    let h = grid.h();
    let norm_sq: f64 = v
        .iter()
        .zip(&cache.rho)
        .map(|(x, rho)| x * x * rho * h)
        .sum();
    quadratic_form(grid, metric, cache, spec, mode, v) / norm_sq
}

/// Lowest `spec.count` eigenpairs of one transverse sector, ascending.
pub fn solve_mode(
    grid: &TorusGrid,
    metric: &MetricProfile,
    cache: &GeometryCache,
    spec: &OperatorSpec,
    mode: u32,
    t: f64,
) -> Result<Vec<EigenPair>> {
    let n = grid.len();
    if n > MAX_POINTS {
        return Err(Error::Usage(format!(
            "grid has {n} points but the dense eigensolver is capped at {MAX_POINTS}"
        )));
    }
    if !(spec.c2 > 0.0) {
        return Err(Error::Usage(
            "second-order coefficient c2 must be positive".into(),
        ));
    }
    if spec.count == 0 || spec.count > n {
        return Err(Error::Usage(format!(
            "requested {} eigenpairs from a {n}-point sector",
            spec.count
        )));
    }

    let (a_mat, mass) = assemble(grid, metric, cache, spec, mode);
    let inv_sqrt: Vec<f64> = mass.iter().map(|m| 1.0 / m.sqrt()).collect();
    let mut b_mat = Matrix::zeros(n);
    for i in 0..n {
        for j in 0..=i {
            let scaled = a_mat.get(i, j) * (inv_sqrt[i] * inv_sqrt[j]);
            b_mat.set(i, j, scaled);
            b_mat.set(j, i, scaled);
        }
    }

    let eig = dense::decompose(b_mat)?;
    let mut out = Vec::with_capacity(spec.count);
    for k in 0..spec.count {
        let mut v: Vec<f64> = (0..n)
            .map(|i| eig.vectors.get(i, k) * inv_sqrt[i])
            .collect();
        let norm_sq: f64 = v.iter().zip(&mass).map(|(x, m)| x * x * m).sum();
        let mut scale = 1.0 / norm_sq.sqrt();
        let mut lead = 0;
        for (i, x) in v.iter().enumerate() {
            if x.abs() > v[lead].abs() {
                lead = i;
            }
        }
        if v[lead] < 0.0 {
            scale = -scale;
        }
        for x in &mut v {
            *x *= scale;
        }
        out.push(EigenPair {
            lambda: eig.values[k],
            v,
            mode,
            t,
        });
    }
    Ok(out)
}

/// Eigenpairs of every sector up to `m_max`, merged in ascending order.
pub fn lowest_spectrum(
    grid: &TorusGrid,
    metric: &MetricProfile,
    cache: &GeometryCache,
    spec: &OperatorSpec,
    t: f64,
) -> Result<Vec<EigenPair>> {
    let mut pairs = Vec::with_capacity(spec.count * (spec.m_max as usize + 1));
    for mode in 0..=spec.m_max {
        pairs.extend(solve_mode(grid, metric, cache, spec, mode, t)?);
    }
    pairs.sort_by(|p, q| p.lambda.total_cmp(&q.lambda).then(p.mode.cmp(&q.mode)));
    Ok(pairs)
}

/// First eigenvalue of an ascending spectrum that is not numerically zero.
pub fn first_nonzero(pairs: &[EigenPair]) -> Result<&EigenPair> {
    let max_abs = pairs
        .iter()
        .map(|p| p.lambda.abs())
        .fold(0.0f64, f64::max);
    let tol = ZERO_EIGEN_REL_TOL * (1.0 + max_abs);
    pairs
        .iter()
        .find(|p| p.lambda.abs() > tol)
        .ok_or(Error::AllZero)
}

/// Cluster an eigenvalue list into distinct values: (representative, count),
/// where the representative is the cluster mean. Input order is irrelevant.
pub fn distinct_eigenvalues(values: &[f64], rel_tol: f64) -> Vec<(f64, usize)> {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut clusters: Vec<(f64, usize)> = Vec::new();
    let mut start = 0;
    for i in 1..=sorted.len() {
        let open = i < sorted.len() && sorted[i] - sorted[i - 1] <= rel_tol * (1.0 + sorted[i].abs());
        if !open {
            let slice = &sorted[start..i];
            let mean = slice.iter().sum::<f64>() / slice.len() as f64;
            clusters.push((mean, slice.len()));
            start = i;
        }
    }
    clusters
}

fn same_multiplet(p: &EigenPair, q: &EigenPair) -> bool {
    p.mode == q.mode && (p.lambda - q.lambda).abs() <= MULTIPLET_REL_TOL * (1.0 + p.lambda.abs())
}

/// Flag each pair that has a genuinely distinct branch within the
/// near-degeneracy window. Members of one multiplet never flag each other.
pub fn near_degenerate_flags(pairs: &[EigenPair]) -> Vec<bool> {
    let mut flags = vec![false; pairs.len()];
    for (i, p) in pairs.iter().enumerate() {
        for (j, q) in pairs.iter().enumerate() {
            if i == j {
                continue;
            }
            let gap = (p.lambda - q.lambda).abs();
            if gap > NEAR_DEGENERATE_REL_TOL * (1.0 + p.lambda.abs()) {
                continue;
            }
            if !same_multiplet(p, q) {
                flags[i] = true;
                break;
            }
        }
    }
    flags
}

/// Match branches of `prev` to branches of `next` by eigenfunction overlap.
///
/// Only same-sector candidates compete, since distinct transverse factors
/// are exactly orthogonal. Matching is greedy on |overlap|, which keeps a
/// rotating cos/sin multiplet attached to itself without caring which basis
/// the solver returned.
pub fn track(
    prev: &[EigenPair],
    next: &[EigenPair],
    grid: &TorusGrid,
    cache_next: &GeometryCache,
) -> TrackMap {
    let h = grid.h();
    let flags = near_degenerate_flags(next);

    let mut candidates: Vec<(f64, usize, usize)> = Vec::new();
    for (pi, p) in prev.iter().enumerate() {
        for (qi, q) in next.iter().enumerate() {
            if p.mode != q.mode {
                continue;
            }
            let overlap: f64 = p
                .v
                .iter()
                .zip(&q.v)
                .zip(&cache_next.rho)
                .map(|((x, y), rho)| x * y * rho)
                .sum::<f64>()
                * h;
            candidates.push((overlap.abs(), pi, qi));
        }
    }
    candidates.sort_by(|x, y| y.0.total_cmp(&x.0).then(x.1.cmp(&y.1)).then(x.2.cmp(&y.2)));

    let mut used_prev = vec![false; prev.len()];
    let mut used_next = vec![false; next.len()];
    let mut entries = Vec::new();
    for (overlap, pi, qi) in candidates {
        if used_prev[pi] || used_next[qi] {
            continue;
        }
        used_prev[pi] = true;
        used_next[qi] = true;
        entries.push(TrackEntry {
            prev_index: pi,
            next_index: qi,
            overlap,
            near_degenerate: flags[qi],
        });
    }
    entries.sort_by_key(|e| e.prev_index);
    let min_abs_overlap = entries
        .iter()
        .map(|e| e.overlap)
        .fold(f64::INFINITY, f64::min);
    TrackMap {
        entries,
        min_abs_overlap,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::compute_geometry;
    use crate::grid::DilatonProfile;
    use proptest::prelude::*;

    fn uniform_state(
        n: usize,
        lx: f64,
        ly: f64,
        a0: f64,
        b0: f64,
        mu: f64,
        alpha: f64,
    ) -> (TorusGrid, MetricProfile, DilatonProfile, GeometryCache) {
        let grid = TorusGrid::new(n, lx, ly).unwrap();
        let metric = MetricProfile::new(vec![a0; n], vec![b0; n]).unwrap();
        let mut dilaton = DilatonProfile::constant(n);
        dilaton.mu = mu;
        let cache = compute_geometry(&grid, &metric, &dilaton, alpha).unwrap();
        (grid, metric, dilaton, cache)
    }

    fn discrete_flat_eigenvalue(p: usize, n: usize, h: f64, a0: f64) -> f64 {
        let theta = 2.0 * PI * p as f64 / n as f64;
        (2.0 - 2.0 * theta.cos()) / (h * h * a0 * a0)
    }

    #[test]
    fn flat_torus_sector_matches_discrete_dispersion() {
        let n = 64;
        let (grid, metric, _, cache) =
            uniform_state(n, 2.0 * PI, 2.0 * PI, 1.0, 1.0, 0.0, 2.0);
        let spec = OperatorSpec {
            c2: 1.0,
            c0: 0.0,
            m_max: 2,
            count: 8,
        };
        for mode in 0..=spec.m_max {
            let pairs = solve_mode(&grid, &metric, &cache, &spec, mode, 0.0).unwrap();
            let m_sq = f64::from(mode) * f64::from(mode);
            let mut expected: Vec<f64> = (0..n)
                .map(|p| discrete_flat_eigenvalue(p, n, grid.h(), 1.0) + m_sq)
                .collect();
            expected.sort_by(f64::total_cmp);
            for (pair, want) in pairs.iter().zip(expected) {
                assert!(
                    (pair.lambda - want).abs() <= 1e-10 * (1.0 + want.abs()),
                    "mode {mode}: {} vs {want}",
                    pair.lambda
                );
            }
        }
    }

    #[test]
    fn flat_torus_distinct_values_match_integers() {
        // N must be large enough that the O(h^2) dispersion error stays
        // inside the clustering window at lambda = 4.
        let n = 128;
        let (grid, metric, _, cache) =
            uniform_state(n, 2.0 * PI, 2.0 * PI, 1.0, 1.0, 0.0, 2.0);
        let spec = OperatorSpec {
            c2: 1.0,
            c0: 0.0,
            m_max: 2,
            count: 6,
        };
        let pairs = lowest_spectrum(&grid, &metric, &cache, &spec, 0.0).unwrap();
        let values: Vec<f64> = pairs.iter().take(13).map(|p| p.lambda).collect();
        let clusters = distinct_eigenvalues(&values, 1e-3);
        let expected = [0.0, 1.0, 2.0, 4.0, 5.0];
        assert!(clusters.len() >= expected.len());
        for ((got, _), want) in clusters.iter().zip(expected) {
            let err = (got - want).abs() / (1.0 + want);
            assert!(err < 3e-3, "cluster {got} vs {want}");
        }
    }

    #[test]
    fn winding_branch_has_stretched_eigenvalue() {
        // Stretched stationary slice of the winding family: a = sqrt(3), b = 1.
        let n = 128;
        let a0 = 3.0f64.sqrt();
        let (grid, metric, _, cache) =
            uniform_state(n, 2.0 * PI, PI / 2.0, a0, 1.0, 1.0, 2.0);
        let spec = OperatorSpec {
            c2: 1.0,
            c0: 0.0,
            m_max: 0,
            count: 4,
        };
        let pairs = lowest_spectrum(&grid, &metric, &cache, &spec, 0.5).unwrap();
        let lead = first_nonzero(&pairs).unwrap();
        let want = discrete_flat_eigenvalue(1, n, grid.h(), a0);
        assert!((lead.lambda - want).abs() <= 1e-12 * (1.0 + want));
        assert!((lead.lambda - 1.0 / 3.0).abs() < 1e-3);
    }

    #[test]
    fn constant_potential_shifts_exactly() {
        // Winding initial slice: S = -2 everywhere, so the ground state of
        // -Δ + S/2 sits at -1 and that of -4Δ + S at -2, both with constant
        // eigenfunction.
        let n = 64;
        let (grid, metric, _, cache) =
            uniform_state(n, 2.0 * PI, PI / 2.0, 1.0, 1.0, 1.0, 2.0);
        assert!((cache.s[0] + 2.0).abs() < 1e-14);

        for (c2, c0, want) in [(1.0, 0.5, -1.0), (4.0, 1.0, -2.0)] {
            let spec = OperatorSpec {
                c2,
                c0,
                m_max: 0,
                count: 2,
            };
            let pairs = solve_mode(&grid, &metric, &cache, &spec, 0, 0.0).unwrap();
            assert!(
                (pairs[0].lambda - want).abs() < 1e-12,
                "{} vs {want}",
                pairs[0].lambda
            );
            let expected_entry = 1.0 / cache.area.sqrt();
            for x in &pairs[0].v {
                assert!((x - expected_entry).abs() < 1e-12 * expected_entry);
                assert!(*x > 0.0);
            }
        }
    }

    #[test]
    fn ground_state_keeps_one_sign_on_curved_metric() {
        let n = 96;
        let grid = TorusGrid::new(n, 2.0 * PI, PI / 2.0).unwrap();
        let b: Vec<f64> = (0..n).map(|i| 1.0 + 0.2 * grid.x(i).cos()).collect();
        let metric = MetricProfile::new(vec![1.0; n], b).unwrap();
        let dilaton = DilatonProfile::constant(n);
        let cache = compute_geometry(&grid, &metric, &dilaton, 2.0).unwrap();
        let spec = OperatorSpec {
            c2: 4.0,
            c0: 1.0,
            m_max: 0,
            count: 3,
        };
        let pairs = solve_mode(&grid, &metric, &cache, &spec, 0, 0.0).unwrap();
        assert!(pairs[0].v.iter().all(|x| *x > 0.0));
        assert!(pairs[0].lambda < pairs[1].lambda);
    }

    #[test]
    fn eigenvectors_are_volume_orthonormal() {
        let n = 64;
        let grid = TorusGrid::new(n, 2.0 * PI, PI / 2.0).unwrap();
        let a: Vec<f64> = (0..n).map(|i| 1.0 + 0.15 * (2.0 * grid.x(i)).sin()).collect();
        let b: Vec<f64> = (0..n).map(|i| 1.0 + 0.2 * grid.x(i).cos()).collect();
        let metric = MetricProfile::new(a, b).unwrap();
        let dilaton = DilatonProfile::constant(n);
        let cache = compute_geometry(&grid, &metric, &dilaton, 2.0).unwrap();
        let spec = OperatorSpec {
            c2: 1.0,
            c0: 1.0,
            m_max: 0,
            count: 5,
        };
        let pairs = solve_mode(&grid, &metric, &cache, &spec, 0, 0.0).unwrap();
        let h = grid.h();
        for (i, p) in pairs.iter().enumerate() {
            for (j, q) in pairs.iter().enumerate() {
                let dot: f64 = p
                    .v
                    .iter()
                    .zip(&q.v)
                    .zip(&cache.rho)
                    .map(|((x, y), rho)| x * y * rho * h)
                    .sum();
                let target = if i == j { 1.0 } else { 0.0 };
                assert!((dot - target).abs() < 1e-11, "({i},{j}): {dot}");
            }
        }
    }

    #[test]
    fn rayleigh_quotient_matches_eigenvalue() {
        let n = 64;
        let grid = TorusGrid::new(n, 2.0 * PI, PI / 2.0).unwrap();
        let b: Vec<f64> = (0..n).map(|i| 1.0 + 0.1 * grid.x(i).cos()).collect();
        let metric = MetricProfile::new(vec![1.0; n], b).unwrap();
        let dilaton = DilatonProfile::constant(n);
        let cache = compute_geometry(&grid, &metric, &dilaton, 2.0).unwrap();
        let spec = OperatorSpec {
            c2: 4.0,
            c0: 1.0,
            m_max: 1,
            count: 4,
        };
        let pairs = lowest_spectrum(&grid, &metric, &cache, &spec, 0.0).unwrap();
        for p in &pairs {
            let rq = rayleigh_quotient(&grid, &metric, &cache, &spec, p.mode, &p.v);
            assert!(
                (rq - p.lambda).abs() <= 1e-10 * (1.0 + p.lambda.abs()),
                "{rq} vs {}",
                p.lambda
            );
        }
    }

    #[test]
    fn first_nonzero_skips_the_kernel_and_flags_empty() {
        let mk = |lambda: f64| EigenPair {
            lambda,
            v: Vec::new(),
            mode: 0,
            t: 0.0,
        };
        let pairs = vec![mk(3e-15), mk(1e-12), mk(0.25), mk(1.0)];
        assert_eq!(first_nonzero(&pairs).unwrap().lambda, 0.25);

        let null = vec![mk(0.0), mk(-4e-9)];
        assert!(matches!(first_nonzero(&null), Err(Error::AllZero)));
    }

    #[test]
    fn multiplets_do_not_flag_but_collisions_do() {
        let mk = |lambda: f64, mode: u32| EigenPair {
            lambda,
            v: Vec::new(),
            mode,
            t: 0.0,
        };
        // cos/sin pair: same sector, same value to rounding
        let clean = vec![mk(0.0, 0), mk(1.0, 0), mk(1.0 + 1e-13, 0), mk(4.0, 1)];
        assert_eq!(near_degenerate_flags(&clean), vec![false; 4]);

        // cross-sector collision at 1.0 and a same-sector near miss at 4.0
        let dirty = vec![
            mk(0.0, 0),
            mk(1.0, 0),
            mk(1.0 + 1e-6, 1),
            mk(4.0, 0),
            mk(4.0 + 1e-5, 0),
        ];
        assert_eq!(
            near_degenerate_flags(&dirty),
            vec![false, true, true, true, true]
        );
    }

    #[test]
    fn tracking_a_spectrum_onto_itself_is_the_identity() {
        let n = 48;
        let (grid, metric, _, cache) =
            uniform_state(n, 2.0 * PI, PI / 2.0, 1.0, 1.0, 0.0, 2.0);
        let spec = OperatorSpec {
            c2: 1.0,
            c0: 0.0,
            m_max: 1,
            count: 5,
        };
        let pairs = lowest_spectrum(&grid, &metric, &cache, &spec, 0.0).unwrap();
        let map = track(&pairs, &pairs, &grid, &cache);
        assert_eq!(map.entries.len(), pairs.len());
        for e in &map.entries {
            assert_eq!(e.prev_index, e.next_index);
            assert!((e.overlap - 1.0).abs() < 1e-12);
            assert!(!e.near_degenerate);
        }
        assert!(map.min_abs_overlap > 1.0 - 1e-12);
    }

    #[test]
    fn engineered_sector_crossing_raises_the_flag() {
        // Tune Ly so the first transverse eigenvalue lands exactly on the
        // first longitudinal one; the branches collide across sectors.
        let n = 32;
        let lx = 2.0 * PI;
        let probe = TorusGrid::new(n, lx, 1.0).unwrap();
        let lambda1 = discrete_flat_eigenvalue(1, n, probe.h(), 1.0);
        let ly = 2.0 * PI / lambda1.sqrt();

        let (grid, metric, _, cache) = uniform_state(n, lx, ly, 1.0, 1.0, 0.0, 2.0);
        let spec = OperatorSpec {
            c2: 1.0,
            c0: 0.0,
            m_max: 1,
            count: 3,
        };
        let pairs = lowest_spectrum(&grid, &metric, &cache, &spec, 0.0).unwrap();
        let map = track(&pairs, &pairs, &grid, &cache);

        let mut collided = 0;
        for e in &map.entries {
            let p = &pairs[e.next_index];
            if (p.lambda - lambda1).abs() <= 1e-9 * (1.0 + lambda1) {
                assert!(e.near_degenerate, "collision at {} not flagged", p.lambda);
                collided += 1;
            }
        }
        assert_eq!(collided, 3, "cos/sin pair plus the transverse branch");
    }

    #[test]
    fn oversized_grid_and_bad_counts_are_rejected() {
        let n = 2048;
        let grid = TorusGrid::new(n, 2.0 * PI, PI / 2.0).unwrap();
        let metric = MetricProfile::new(vec![1.0; n], vec![1.0; n]).unwrap();
        let dilaton = DilatonProfile::constant(n);
        let cache = compute_geometry(&grid, &metric, &dilaton, 2.0).unwrap();
        let spec = OperatorSpec {
            c2: 1.0,
            c0: 0.0,
            m_max: 0,
            count: 1,
        };
        assert!(matches!(
            solve_mode(&grid, &metric, &cache, &spec, 0, 0.0),
            Err(Error::Usage(_))
        ));

        let (grid, metric, _, cache) = uniform_state(16, 2.0 * PI, PI / 2.0, 1.0, 1.0, 0.0, 2.0);
        for count in [0, 17] {
            let bad = OperatorSpec { count, ..spec };
            assert!(matches!(
                solve_mode(&grid, &metric, &cache, &bad, 0, 0.0),
                Err(Error::Usage(_))
            ));
        }
    }

    #[test]
    fn distinct_eigenvalues_clusters_with_multiplicity() {
        let values = [1.0, 0.0, 1.0 + 1e-5, 4.0, 1.0 - 1e-5, 4.0 + 2e-5];
        let clusters = distinct_eigenvalues(&values, 1e-3);
        assert_eq!(clusters.len(), 3);
        assert_eq!(clusters[0], (0.0, 1));
        assert!((clusters[1].0 - 1.0).abs() < 1e-5);
        assert_eq!(clusters[1].1, 3);
        assert_eq!(clusters[2].1, 2);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn random_profiles_yield_consistent_spectra(
            ca in -0.2f64..0.2,
            cb in -0.2f64..0.2,
            mu in -1.0f64..1.0,
            c0 in -1.0f64..1.0,
        ) {
            let n = 32;
            let grid = TorusGrid::new(n, 2.0 * PI, PI / 2.0).unwrap();
            let a: Vec<f64> = (0..n).map(|i| 1.0 + ca * grid.x(i).sin()).collect();
            let b: Vec<f64> = (0..n).map(|i| 1.0 + cb * (2.0 * grid.x(i)).cos()).collect();
            let metric = MetricProfile::new(a, b).unwrap();
            let mut dilaton = DilatonProfile::constant(n);
            dilaton.mu = mu;
            let cache = compute_geometry(&grid, &metric, &dilaton, 2.0).unwrap();
            let spec = OperatorSpec { c2: 2.0, c0, m_max: 0, count: 3 };
            let pairs = solve_mode(&grid, &metric, &cache, &spec, 0, 0.0).unwrap();

            prop_assert!(pairs[0].lambda <= pairs[1].lambda);
            prop_assert!(pairs[1].lambda <= pairs[2].lambda);
            // the off-diagonal couplings never vanish, so the ground state
            // is simple and strictly one-signed
            prop_assert!(pairs[0].v.iter().all(|x| *x > 0.0));
            for p in &pairs {
                let rq = rayleigh_quotient(&grid, &metric, &cache, &spec, 0, &p.v);
                prop_assert!((rq - p.lambda).abs() <= 1e-9 * (1.0 + p.lambda.abs()));
            }
        }
    }
}
