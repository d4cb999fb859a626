//! Periodic grid and profile containers for the symmetric surface class.
//!
//! The geometry is g = a(x)² dx² + b(x)² dy² on the torus [0,Lx) × [0,Ly)
//! with all coefficients depending on x only. The dilaton has the form
//! φ(x) = µx + p(x) with p periodic; the slope µ is well defined even
//! though φ itself winds, and it is conserved exactly by the flow.

use crate::error::{Error, Result};

/// Uniform periodic grid in x. Nodes sit at x_i = i·h, h = Lx/N.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TorusGrid {
    n: usize,
    lx: f64,
    ly: f64,
}

impl TorusGrid {
    /// Minimum number of nodes for the flux stencils to be meaningful.
    pub const MIN_POINTS: usize = 8;

    pub fn new(n: usize, lx: f64, ly: f64) -> Result<Self> {
        if n < Self::MIN_POINTS {
            return Err(Error::Usage(format!(
                "grid needs at least {} points, got {n}",
                Self::MIN_POINTS
            )));
        }
        if !(lx > 0.0) || !(ly > 0.0) {
            return Err(Error::Usage(format!(
                "periods must be positive, got Lx = {lx}, Ly = {ly}"
            )));
        }
        Ok(TorusGrid { n, lx, ly })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn lx(&self) -> f64 {
        self.lx
    }

    pub fn ly(&self) -> f64 {
        self.ly
    }

    /// Mesh width h = Lx/N.
    pub fn h(&self) -> f64 {
        self.lx / self.n as f64
    }

    /// Node coordinate x_i.
    pub fn x(&self, i: usize) -> f64 {
        i as f64 * self.h()
    }

    /// Sample a closed-form profile at the nodes.
    pub fn sample(&self, f: impl Fn(f64) -> f64) -> Vec<f64> {
        (0..self.n).map(|i| f(self.x(i))).collect()
    }

    /// Grid with twice the resolution, same periods.
    pub fn refined(&self) -> Self {
        TorusGrid {
            n: 2 * self.n,
            lx: self.lx,
            ly: self.ly,
        }
    }
}

/// Metric coefficients a, b > 0 sampled at the nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricProfile {
    pub a: Vec<f64>,
    pub b: Vec<f64>,
}

impl MetricProfile {
    pub fn new(a: Vec<f64>, b: Vec<f64>) -> Result<Self> {
        if a.len() != b.len() {
            return Err(Error::Usage(format!(
                "metric coefficient lengths differ: {} vs {}",
                a.len(),
                b.len()
            )));
        }
        let min = a.iter().chain(&b).fold(f64::INFINITY, |m, &v| m.min(v));
        if !(min > 0.0) {
            return Err(Error::NonPositiveMetric {
                t: 0.0,
                min_value: min,
            });
        }
        Ok(MetricProfile { a, b })
    }

    pub fn len(&self) -> usize {
        self.a.len()
    }

    pub fn is_empty(&self) -> bool {
        self.a.is_empty()
    }

    pub fn min_coefficient(&self) -> f64 {
        self.a
            .iter()
            .chain(&self.b)
            .fold(f64::INFINITY, |m, &v| m.min(v))
    }
}

/// Dilaton φ = µx + p(x); only µ and the periodic part p are stored.
#[derive(Debug, Clone, PartialEq)]
pub struct DilatonProfile {
    pub mu: f64,
    pub p: Vec<f64>,
}

impl DilatonProfile {
    pub fn new(mu: f64, p: Vec<f64>) -> Self {
        DilatonProfile { mu, p }
    }

    pub fn constant(n: usize) -> Self {
        DilatonProfile {
            mu: 0.0,
            p: vec![0.0; n],
        }
    }

    /// True when φ is constant on the surface (µ = 0 and p flat).
    pub fn is_constant(&self, tol: f64) -> bool {
        self.mu == 0.0 && {
            let (lo, hi) = self
                .p
                .iter()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
                    (lo.min(v), hi.max(v))
                });
            hi - lo <= tol
        }
    }
}
