//! Analytic ambient flows `U`, all tangential to every wall (`U.n = 0`).
//!
//! With `kx = pi/Lx`, `ky = pi/Ly` and `q(x2) = (x2 + Ly)^2 / Ly^2`:
//!
//! | preset          | `U`                                                        |
//! |-----------------|------------------------------------------------------------|
//! | `zero`          | `0`                                                        |
//! | `compressive`   | `s (sin(kx x1), 0)`                                        |
//! | `uniform-shear` | `s (sin(kx x1) q(x2), 0)`                                  |
//! | `solenoidal`    | `s (ky sin(kx x1) cos(ky x2), -kx cos(kx x1) sin(ky x2))`  |

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::field::VectorField;
use crate::grid::Grid;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    Zero,
    UniformShear,
    Solenoidal,
    Compressive,
}

impl FromStr for Preset {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "zero" => Ok(Self::Zero),
            "uniform-shear" => Ok(Self::UniformShear),
            "solenoidal" => Ok(Self::Solenoidal),
            "compressive" => Ok(Self::Compressive),
            other => Err(Error::InvalidParameter(format!(
                "unknown ambient preset '{other}' (expected zero, uniform-shear, solenoidal or compressive)"
            ))),
        }
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Zero => "zero",
            Self::UniformShear => "uniform-shear",
            Self::Solenoidal => "solenoidal",
            Self::Compressive => "compressive",
        })
    }
}

#[derive(Debug, Clone)]
pub struct AmbientField {
    pub preset: Preset,
    pub amplitude: f64,
    pub grid: Grid,
    /// nodal samples
    pub u: VectorField,
}

impl AmbientField {
    pub fn preset(preset: Preset, amplitude: f64, grid: &Grid) -> Result<Self> {
        if !(amplitude >= 0.0 && amplitude.is_finite()) {
            return Err(Error::InvalidParameter(format!("amplitude must be >= 0, got {amplitude}")));
        }
        let mut a = Self { preset, amplitude, grid: *grid, u: VectorField::zeros(grid) };
        a.u = VectorField::from_fn(grid, |x, y| a.value(x, y));
        let worst = a.max_normal_component();
        if worst > 1e-12 {
            return Err(Error::AmbientNotTangential(worst));
        }
        Ok(a)
    }

    pub fn zero(grid: &Grid) -> Self {
        Self::preset(Preset::Zero, 0.0, grid).expect("zero flow is admissible")
    }

    pub fn is_zero(&self) -> bool {
        self.preset == Preset::Zero || self.amplitude == 0.0
    }

    fn k(&self) -> (f64, f64) {
        (PI / self.grid.lx, PI / self.grid.ly)
    }

    pub fn value(&self, x: f64, y: f64) -> [f64; 2] {
        let s = self.amplitude;
        let (kx, ky) = self.k();
        let ly = self.grid.ly;
        match self.preset {
            Preset::Zero => [0.0, 0.0],
            Preset::Compressive => [s * (kx * x).sin(), 0.0],
            Preset::UniformShear => [s * (kx * x).sin() * (y + ly).powi(2) / (ly * ly), 0.0],
            Preset::Solenoidal => [
                s * ky * (kx * x).sin() * (ky * y).cos(),
                -s * kx * (kx * x).cos() * (ky * y).sin(),
            ],
        }
    }

    /// `[[d1 U1, d2 U1], [d1 U2, d2 U2]]`
    pub fn gradient(&self, x: f64, y: f64) -> [[f64; 2]; 2] {
        let s = self.amplitude;
        let (kx, ky) = self.k();
        let ly = self.grid.ly;
        match self.preset {
            Preset::Zero => [[0.0; 2]; 2],
            Preset::Compressive => [[s * kx * (kx * x).cos(), 0.0], [0.0, 0.0]],
            Preset::UniformShear => {
                let q = (y + ly).powi(2) / (ly * ly);
                let dq = 2.0 * (y + ly) / (ly * ly);
                [[s * kx * (kx * x).cos() * q, s * (kx * x).sin() * dq], [0.0, 0.0]]
            }
            Preset::Solenoidal => [
                [s * ky * kx * (kx * x).cos() * (ky * y).cos(), -s * ky * ky * (kx * x).sin() * (ky * y).sin()],
                [s * kx * kx * (kx * x).sin() * (ky * y).sin(), -s * kx * ky * (kx * x).cos() * (ky * y).cos()],
            ],
        }
    }

    pub fn divergence(&self, x: f64, y: f64) -> f64 {
        let d = self.gradient(x, y);
        d[0][0] + d[1][1]
    }

    /// Tangential component on the interface and its first two derivatives.
    pub fn interface_u1(&self, x: f64) -> [f64; 3] {
        let s = self.amplitude;
        let (kx, ky) = self.k();
        let c = match self.preset {
            Preset::Zero => 0.0,
            Preset::Compressive | Preset::UniformShear => s,
            Preset::Solenoidal => s * ky,
        };
        [c * (kx * x).sin(), c * kx * (kx * x).cos(), -c * kx * kx * (kx * x).sin()]
    }

    fn max_normal_component(&self) -> f64 {
        let g = &self.grid;
        let mut worst: f64 = 0.0;
        for j in 0..g.my() {
            for i in 0..g.mx() {
                let k = g.idx(i, j);
                if i == 0 || i == g.nx + 1 {
                    worst = worst.max(self.u.c1[k].abs());
                }
                if j == 0 || j == g.top() {
                    worst = worst.max(self.u.c2[k].abs());
                }
            }
        }
        worst
    }

    /// Closed-form sup norms: `(|U|_inf, |div U|_inf, |U|_C2(interface))`.
    /// Vector sup norms are taken componentwise; the `C^2` part is the sum of
    /// the sups of the restriction and its first two tangential derivatives.
    pub fn sup_terms(&self) -> (f64, f64, f64) {
        let s = self.amplitude;
        let (kx, ky) = self.k();
        match self.preset {
            Preset::Zero => (0.0, 0.0, 0.0),
            Preset::Compressive | Preset::UniformShear => (s, s * kx, s * (1.0 + kx + kx * kx)),
            Preset::Solenoidal => (s * kx.max(ky), 0.0, s * ky * (1.0 + kx + kx * kx)),
        }
    }
}

/// `|U|_* = |U|_inf + |div U|_inf + |U|_C2(interface)`
pub fn u_star_norm(u: &AmbientField) -> f64 {
    let (a, b, c) = u.sup_terms();
    a + b + c
}

/// `r(a) = a + a^2 + a^3`
pub fn r_of(u_star: f64) -> f64 {
    u_star + u_star * u_star + u_star.powi(3)
}
