//! Points and tangent vectors of the cotangent bundle of R^{1+d}.
//!
//! Coordinates are stored flat as `(t, x_1..x_d, tau, xi_1..xi_d)`, so the
//! position `x_j` (with `x_0 = t`) sits at index `j` and its conjugate
//! momentum `xi_j` (with `xi_0 = tau`) at index `d + 1 + j`.

use std::fmt;

use crate::error::{Error, Result};

/// Index of the position coordinate `x_j` (`j = 0` is `t`).
pub fn pos_index(j: usize) -> usize {
    j
}

/// Index of the momentum coordinate `xi_j` (`j = 0` is `tau`).
pub fn mom_index(d: usize, j: usize) -> usize {
    d + 1 + j
}

#[derive(Clone, Debug, PartialEq)]
pub struct CotangentPoint {
    pub t: f64,
    pub x: Vec<f64>,
    pub tau: f64,
    pub xi: Vec<f64>,
}

impl CotangentPoint {
    pub fn new(t: f64, x: Vec<f64>, tau: f64, xi: Vec<f64>) -> Result<Self> {
        if x.len() != xi.len() {
            return Err(Error::Config(format!(
                "position has {} components but momentum has {}",
                x.len(),
                xi.len()
            )));
        }
        let p = CotangentPoint { t, x, tau, xi };
        if !p.coords().iter().all(|v| v.is_finite()) {
            return Err(Error::Domain("non-finite cotangent point".into()));
        }
        Ok(p)
    }

    pub fn from_coords(d: usize, z: &[f64]) -> Result<Self> {
        if z.len() != 2 * d + 2 {
            return Err(Error::Config(format!(
                "expected {} phase coordinates, got {}",
                2 * d + 2,
                z.len()
            )));
        }
        Self::new(z[0], z[1..=d].to_vec(), z[d + 1], z[d + 2..].to_vec())
    }

    pub fn space_dim(&self) -> usize {
        self.x.len()
    }

    pub fn coords(&self) -> Vec<f64> {
        let mut z = Vec::with_capacity(2 * self.x.len() + 2);
        z.push(self.t);
        z.extend_from_slice(&self.x);
        z.push(self.tau);
        z.extend_from_slice(&self.xi);
        z
    }
}

impl fmt::Display for CotangentPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(t={}, x={:?}, tau={}, xi={:?})", self.t, self.x, self.tau, self.xi)
    }
}

/// Tangent vector `(dt, dx, dtau, dxi)` in the same flat layout.
#[derive(Clone, Debug, PartialEq)]
pub struct PhaseVector {
    d: usize,
    comps: Vec<f64>,
}

impl PhaseVector {
    pub fn zero(d: usize) -> Self {
        PhaseVector {
            d,
            comps: vec![0.0; 2 * d + 2],
        }
    }

    pub fn from_slice(d: usize, comps: &[f64]) -> Result<Self> {
        if comps.len() != 2 * d + 2 {
            return Err(Error::Config(format!(
                "expected {} phase components, got {}",
                2 * d + 2,
                comps.len()
            )));
        }
        Ok(PhaseVector {
            d,
            comps: comps.to_vec(),
        })
    }

    /// Coordinate direction `k` in the flat layout.
    pub fn unit(d: usize, k: usize) -> Self {
        let mut v = Self::zero(d);
        v.comps[k] = 1.0;
        v
    }

    /// `+dtau`, the time-like direction used as the hyperbolic direction.
    pub fn tau_direction(d: usize) -> Self {
        Self::unit(d, mom_index(d, 0))
    }

    pub fn space_dim(&self) -> usize {
        self.d
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.comps
    }

    pub fn norm(&self) -> f64 {
        self.comps.iter().map(|c| c * c).sum::<f64>().sqrt()
    }

    pub fn scaled(&self, s: f64) -> Self {
        PhaseVector {
            d: self.d,
            comps: self.comps.iter().map(|c| c * s).collect(),
        }
    }

    pub fn normalized(&self) -> Self {
        let n = self.norm();
        if n == 0.0 {
            self.clone()
        } else {
            self.scaled(1.0 / n)
        }
    }

    pub fn add(&self, other: &PhaseVector) -> Self {
        PhaseVector {
            d: self.d,
            comps: self.comps.iter().zip(&other.comps).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn sub(&self, other: &PhaseVector) -> Self {
        self.add(&other.scaled(-1.0))
    }

    pub fn dot(&self, other: &PhaseVector) -> f64 {
        self.comps.iter().zip(&other.comps).map(|(a, b)| a * b).sum()
    }
}

impl fmt::Display for PhaseVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (k, c) in self.comps.iter().enumerate() {
            if k > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{c:.6}")?;
        }
        write!(f, "]")
    }
}

/// Default phase-variable names: `t x1 .. xd tau xi1 .. xid`.
pub fn default_names(d: usize) -> (Vec<String>, Vec<String>) {
    let mut pos = vec!["t".to_string()];
    let mut mom = vec!["tau".to_string()];
    for j in 1..=d {
        if d == 1 {
            pos.push("x".into());
            mom.push("xi".into());
        } else {
            pos.push(format!("x{j}"));
            mom.push(format!("xi{j}"));
        }
    }
    (pos, mom)
}
