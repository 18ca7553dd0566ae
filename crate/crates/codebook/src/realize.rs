use num_complex::Complex64;
use omnisurf_channel::{CMatrix, CVector};
use omnisurf_geometry::Side;
use omnisurf_surface::{AmplitudeSplit, PhaseMode, SurfaceConfiguration};

use crate::CodebookError;

/// Surface configuration aligning `Psi_t H_BI v` with the phase of `q`
/// elementwise, for the uniform precoder `v = 1 / sqrt(N_b)`.
pub fn factorize_codeword_init(
    q: &CVector,
    h_bi: &CMatrix,
    split: &AmplitudeSplit,
    c: f64,
) -> Result<(SurfaceConfiguration, CVector), CodebookError> {
    if q.len() != h_bi.nrows() {
        return Err(CodebookError::Dimension { got: q.len(), want: h_bi.nrows() });
    }
    let nb = h_bi.ncols();
    let v = CVector::from_element(nb, Complex64::from(1.0 / (nb as f64).sqrt()));
    let hv = h_bi * &v;
    let mut phases = Vec::with_capacity(q.len());
    for (l, (a, b)) in q.iter().zip(hv.iter()).enumerate() {
        if b.norm() < f64::MIN_POSITIVE {
            return Err(CodebookError::ZeroIllumination(l));
        }
        phases.push(a.arg() - b.arg());
    }
    let cfg = SurfaceConfiguration::from_phases(&phases, split, c, PhaseMode::Continuous)?;
    Ok((cfg, v))
}

/// A codeword as physically radiated: configuration, precoder and the
/// outgoing field on each side of the surface.
#[derive(Debug, Clone, PartialEq)]
pub struct RealizedBeam {
    pub surface: SurfaceConfiguration,
    pub precoder: CVector,
    /// `Psi_t H_BI v`.
    pub reflective: CVector,
    /// `Psi_r H_BI v`.
    pub refractive: CVector,
}

impl RealizedBeam {
    pub fn toward(&self, side: Side) -> &CVector {
        match side {
            Side::Reflective => &self.reflective,
            Side::Refractive => &self.refractive,
        }
    }
}

pub fn realize_codeword(
    q: &CVector,
    h_bi: &CMatrix,
    split: &AmplitudeSplit,
    c: f64,
) -> Result<RealizedBeam, CodebookError> {
    let (surface, precoder) = factorize_codeword_init(q, h_bi, split, c)?;
    let hv = h_bi * &precoder;
    let reflective = surface.psi_t().component_mul(&hv);
    let refractive = surface.psi_r().component_mul(&hv);
    Ok(RealizedBeam { surface, precoder, reflective, refractive })
}

/// Beam gain `|h^T x|` of a field `x` toward an area with channel `h`.
pub fn beam_gain(h: &CVector, x: &CVector) -> f64 {
    h.iter().zip(x.iter()).map(|(a, b)| a * b).sum::<Complex64>().norm()
}
