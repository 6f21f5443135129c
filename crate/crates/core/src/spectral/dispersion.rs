//! Bulk band structure of the torus: dispersion, quantized momenta,
//! Dirac states and Bloch eigenstates of −A.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{Lattice, Sublattice};
use crate::C64;

const SQRT3: f64 = 1.732_050_807_568_877_2;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentumPoint {
    pub k_x: f64,
    pub k_y: f64,
    pub p: i64,
    pub q: i64,
}

impl MomentumPoint {
    /// k_x = 2πp/m, k_y = (4πq/n − k_x)/√3.
    pub fn quantized(p: i64, q: i64, m: i64, n: i64) -> Self {
        let k_x = 2.0 * PI * p as f64 / m as f64;
        let k_y = (4.0 * PI * q as f64 / n as f64 - k_x) / SQRT3;
        MomentumPoint { k_x, k_y, p, q }
    }

    /// Bloch phases (θ₁, θ₂) per unit step in α and β.
    pub fn thetas(&self) -> (f64, f64) {
        (self.k_x, 0.5 * (SQRT3 * self.k_y + self.k_x))
    }

    /// 1 + 4cos²(k_x/2) + 4cos(k_x/2)cos(√3 k_y/2).
    pub fn radicand(&self) -> f64 {
        let c = (self.k_x / 2.0).cos();
        1.0 + 4.0 * c * c + 4.0 * c * (SQRT3 * self.k_y / 2.0).cos()
    }
}

/// (ε₊, ε₋) = ε_D ± |v|·√radicand.
pub fn dispersion(k: &MomentumPoint, eps_d: f64, v: f64) -> Result<(f64, f64)> {
    let r = k.radicand();
    if r < -1e-12 {
        return Err(Error::NegativeRadicand(r));
    }
    let e = v.abs() * r.max(0.0).sqrt();
    Ok((eps_d + e, eps_d - e))
}

pub fn quantized_momenta(m: i64, n: i64) -> Result<Vec<MomentumPoint>> {
    if m < 1 || n < 1 {
        return Err(Error::InvalidDimensions(format!("m, n must be >= 1 (got {m}, {n})")));
    }
    Ok((0..m).flat_map(|p| (0..n).map(move |q| MomentumPoint::quantized(p, q, m, n))).collect())
}

fn require_dirac_torus(lat: &Lattice) -> Result<()> {
    if !lat.has_dirac_points() {
        return Err(Error::UnsupportedLattice("Dirac states need a torus with 3 | m and 3 | n".into()));
    }
    Ok(())
}

/// (|K⟩, |K′⟩) on one sublattice, amplitude √(2/N) per site.
pub fn dirac_states(lat: &Lattice, sublattice: Sublattice) -> Result<(Vec<C64>, Vec<C64>)> {
    require_dirac_torus(lat)?;
    let amp = (2.0 / lat.n_sites as f64).sqrt();
    let mut k = vec![C64::new(0.0, 0.0); lat.n_sites];
    let mut kp = k.clone();
    let sigma = sublattice.sigma();
    for s in lat.sites.iter().filter(|s| s.sublattice == sublattice) {
        let (a, b) = (s.cell_alpha, s.cell_beta);
        k[s.linear] = C64::from_polar(amp, 2.0 * PI / 3.0 * ((a + 2 * b + 2 * sigma) % 3) as f64);
        kp[s.linear] = C64::from_polar(amp, 2.0 * PI / 3.0 * ((2 * a + b) % 3) as f64);
    }
    Ok((k, kp))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Band {
    /// Energy −ε(k) under H = −A.
    Lower,
    /// Energy +ε(k).
    Upper,
}

#[derive(Debug, Clone)]
pub struct BlochState {
    pub amplitudes: Vec<C64>,
    /// Eigenvalue of −A.
    pub energy: f64,
    /// Relative B/A phase, |C| = 1.
    pub c: C64,
}

/// Plane wave on the torus with the B amplitude fixed by the neighbour sum
/// f(k) = 1 + e^{−iθ₁} + e^{−iθ₁+iθ₂}: C = −E/f.
pub fn bloch_eigenstate(lat: &Lattice, k: &MomentumPoint, band: Band) -> Result<BlochState> {
    let (m, n) = lat.torus_dims().ok_or_else(|| Error::UnsupportedLattice("Bloch states need a torus".into()))?;
    let (t1, t2) = k.thetas();
    let off = |t: f64, l: i64| {
        let x = t * l as f64 / (2.0 * PI);
        (x - x.round()).abs()
    };
    if off(t1, m) > 1e-9 || off(t2, n) > 1e-9 {
        return Err(Error::InvalidArgument(format!("momentum {k:?} is not quantized on the {m}x{n} torus")));
    }
    let f = C64::new(1.0, 0.0) + C64::from_polar(1.0, -t1) + C64::from_polar(1.0, t2 - t1);
    if f.norm() < 1e-9 {
        return Err(Error::DiracPoint);
    }
    let energy = match band {
        Band::Lower => -f.norm(),
        Band::Upper => f.norm(),
    };
    let c = -energy / f;
    let norm = 1.0 / (lat.n_sites as f64).sqrt();
    let amplitudes = lat
        .sites
        .iter()
        .map(|s| {
            let phase = C64::from_polar(norm, t1 * s.cell_alpha as f64 + t2 * s.cell_beta as f64);
            match s.sublattice {
                Sublattice::A => phase,
                Sublattice::B => c * phase,
            }
        })
        .collect();
    Ok(BlochState { amplitudes, energy, c })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn thetas_invert_quantization() {
        let k = MomentumPoint::quantized(5, 7, 12, 9);
        let (t1, t2) = k.thetas();
        assert!((t1 - 2.0 * PI * 5.0 / 12.0).abs() < 1e-12);
        assert!((t2 - 2.0 * PI * 7.0 / 9.0).abs() < 1e-12);
    }

    #[test]
    fn radicand_is_neighbour_sum_modulus() {
        for (p, q) in [(0, 0), (1, 2), (3, 7), (11, 4)] {
            let k = MomentumPoint::quantized(p, q, 12, 12);
            let (t1, t2) = k.thetas();
            let f = C64::new(1.0, 0.0) + C64::from_polar(1.0, -t1) + C64::from_polar(1.0, t2 - t1);
            assert!((k.radicand() - f.norm_sqr()).abs() < 1e-12);
        }
    }
}
