//! Element coefficients of an omni-surface.
//!
//! Each element has a reflective and a refractive response tied together by
//! `gamma_t^2 + gamma_r^2 = 1` and `phi_r = (phi_t - c) mod 2 pi`.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use omnisurf_geometry::Side;
use thiserror::Error;

const TWO_PI: f64 = 2.0 * PI;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SurfaceError {
    #[error("reflective amplitude must lie in [0, 1] (got {0})")]
    BadAmplitude(f64),
    #[error("phase must be finite (got {0})")]
    BadPhase(f64),
    #[error("phase quantization needs at least one bit")]
    ZeroBits,
    #[error("per-element split has {got} entries, expected {want}")]
    SplitLength { got: usize, want: usize },
}

/// Wraps an angle into `[0, 2 pi)`.
pub fn wrap_phase(phi: f64) -> f64 {
    let w = phi.rem_euclid(TWO_PI);
    if w >= TWO_PI {
        0.0
    } else {
        w
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ElementCoefficients {
    pub gamma_t: f64,
    pub gamma_r: f64,
    pub phi_t: f64,
    pub phi_r: f64,
}

impl ElementCoefficients {
    pub fn reflective(&self) -> Complex64 {
        Complex64::from_polar(self.gamma_t, self.phi_t)
    }

    pub fn refractive(&self) -> Complex64 {
        Complex64::from_polar(self.gamma_r, self.phi_r)
    }
}

/// Builds one element from its reflective phase and amplitude.
pub fn make_element(phi_t: f64, gamma_t: f64, c: f64) -> Result<ElementCoefficients, SurfaceError> {
    if !(0.0..=1.0).contains(&gamma_t) {
        return Err(SurfaceError::BadAmplitude(gamma_t));
    }
    if !phi_t.is_finite() {
        return Err(SurfaceError::BadPhase(phi_t));
    }
    if !c.is_finite() {
        return Err(SurfaceError::BadPhase(c));
    }
    Ok(ElementCoefficients {
        gamma_t,
        gamma_r: (1.0 - gamma_t * gamma_t).max(0.0).sqrt(),
        phi_t: wrap_phase(phi_t),
        phi_r: wrap_phase(phi_t - c),
    })
}

/// Nearest level of the uniform `2^bits` grid on `[0, 2 pi)`; exact ties go
/// to the lower level.
pub fn quantize_phase(phi: f64, bits: u32) -> Result<f64, SurfaceError> {
    if bits == 0 {
        return Err(SurfaceError::ZeroBits);
    }
    if !phi.is_finite() {
        return Err(SurfaceError::BadPhase(phi));
    }
    let levels = 1u64 << bits.min(52);
    let step = TWO_PI / levels as f64;
    let k = wrap_phase(phi) / step;
    let lower = k.floor();
    let idx = if k - lower > 0.5 { lower as u64 + 1 } else { lower as u64 };
    Ok((idx % levels) as f64 * step)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PhaseMode {
    Continuous,
    Quantized(u32),
}

/// Reflective amplitude per element.
#[derive(Debug, Clone, PartialEq)]
pub enum AmplitudeSplit {
    Uniform(f64),
    PerElement(Vec<f64>),
}

impl AmplitudeSplit {
    /// Equal energy to both sides, `gamma_t = gamma_r = 1/sqrt(2)`.
    pub fn equal() -> Self {
        AmplitudeSplit::Uniform(FRAC_1_SQRT_2)
    }

    fn get(&self, l: usize) -> f64 {
        match self {
            AmplitudeSplit::Uniform(g) => *g,
            AmplitudeSplit::PerElement(v) => v[l],
        }
    }
}

impl Default for AmplitudeSplit {
    fn default() -> Self {
        AmplitudeSplit::equal()
    }
}

/// Coefficients of every element, sharing one coupling constant `c`.
#[derive(Debug, Clone, PartialEq)]
pub struct SurfaceConfiguration {
    pub elements: Vec<ElementCoefficients>,
    pub c: f64,
    pub mode: PhaseMode,
}

impl SurfaceConfiguration {
    /// Builds a configuration from reflective phases. In quantized mode the
    /// phases are projected onto the grid first.
    pub fn from_phases(
        phi_t: &[f64],
        split: &AmplitudeSplit,
        c: f64,
        mode: PhaseMode,
    ) -> Result<Self, SurfaceError> {
        if let AmplitudeSplit::PerElement(v) = split {
            if v.len() != phi_t.len() {
                return Err(SurfaceError::SplitLength { got: v.len(), want: phi_t.len() });
            }
        }
        let elements = phi_t
            .iter()
            .enumerate()
            .map(|(l, &p)| {
                let p = match mode {
                    PhaseMode::Continuous => p,
                    PhaseMode::Quantized(b) => quantize_phase(p, b)?,
                };
                make_element(p, split.get(l), c)
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(SurfaceConfiguration { elements, c, mode })
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn phases_t(&self) -> Vec<f64> {
        self.elements.iter().map(|e| e.phi_t).collect()
    }

    pub fn split(&self) -> AmplitudeSplit {
        AmplitudeSplit::PerElement(self.elements.iter().map(|e| e.gamma_t).collect())
    }

    /// Projects the reflective phases onto a `2^bits` grid.
    pub fn quantized(&self, bits: u32) -> Result<Self, SurfaceError> {
        Self::from_phases(&self.phases_t(), &self.split(), self.c, PhaseMode::Quantized(bits))
    }

    /// Diagonal of `Psi_t`.
    pub fn psi_t(&self) -> DVector<Complex64> {
        DVector::from_iterator(self.len(), self.elements.iter().map(|e| e.reflective()))
    }

    /// Diagonal of `Psi_r`.
    pub fn psi_r(&self) -> DVector<Complex64> {
        DVector::from_iterator(self.len(), self.elements.iter().map(|e| e.refractive()))
    }

    /// Diagonal response seen by users on `side`.
    pub fn psi(&self, side: Side) -> DVector<Complex64> {
        match side {
            Side::Reflective => self.psi_t(),
            Side::Refractive => self.psi_r(),
        }
    }

    /// Full diagonal matrices `(Psi_t, Psi_r)`.
    pub fn surface_matrices(&self) -> (DMatrix<Complex64>, DMatrix<Complex64>) {
        (DMatrix::from_diagonal(&self.psi_t()), DMatrix::from_diagonal(&self.psi_r()))
    }
}
