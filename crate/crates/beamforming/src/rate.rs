use num_complex::Complex64;
use omnisurf_channel::{CMatrix, CVector};
use omnisurf_geometry::Side;
use omnisurf_surface::SurfaceConfiguration;

use crate::BeamformingError;

/// One receiver: channel from the surface (`N_u x L`), combiner and side.
#[derive(Debug, Clone, PartialEq)]
pub struct UserLink {
    pub channel: CMatrix,
    pub combiner: CVector,
    pub side: Side,
}

/// `H[k][j] = w_k^H H_k Psi_{side(k)} H_BI v_j`, and `g_j = sum_k |H[k][j]|^2`.
#[derive(Debug, Clone, PartialEq)]
pub struct EffectiveChannel {
    pub matrix: CMatrix,
    pub gains: Vec<f64>,
}

pub fn effective_channel(
    users: &[UserLink],
    surface: &SurfaceConfiguration,
    h_bi: &CMatrix,
    precoders: &[CVector],
) -> Result<EffectiveChannel, BeamformingError> {
    let k = users.len();
    if precoders.len() != k {
        return Err(BeamformingError::Dimension(format!("{} precoders for {k} users", precoders.len())));
    }
    if surface.len() != h_bi.nrows() {
        return Err(BeamformingError::Dimension("surface size".into()));
    }
    let fields: Vec<CVector> = precoders
        .iter()
        .map(|v| {
            if v.len() == h_bi.ncols() {
                Ok(h_bi * v)
            } else {
                Err(BeamformingError::Dimension(format!("precoder length {}", v.len())))
            }
        })
        .collect::<Result<_, _>>()?;
    let (psi_t, psi_r) = (surface.psi_t(), surface.psi_r());
    let mut m = CMatrix::zeros(k, k);
    for (r, u) in users.iter().enumerate() {
        if u.channel.ncols() != h_bi.nrows() || u.combiner.len() != u.channel.nrows() {
            return Err(BeamformingError::Dimension(format!("user {} channel or combiner", r + 1)));
        }
        let psi = match u.side {
            Side::Reflective => &psi_t,
            Side::Refractive => &psi_r,
        };
        // row vector w^H H Psi
        let row = (u.channel.adjoint() * &u.combiner).conjugate().component_mul(psi);
        for (j, x) in fields.iter().enumerate() {
            m[(r, j)] = row.iter().zip(x.iter()).map(|(a, b)| a * b).sum::<Complex64>();
        }
    }
    let gains = (0..k).map(|j| m.column(j).norm_squared()).collect();
    Ok(EffectiveChannel { matrix: m, gains })
}

/// `sum_k log2(1 + p_k |H_kk|^2 / (sum_{j != k} p_j |H_kj|^2 + s2))`.
pub fn sum_rate(h: &CMatrix, powers: &[f64], noise: f64) -> f64 {
    let k = powers.len();
    (0..k)
        .map(|i| {
            let signal = powers[i] * h[(i, i)].norm_sqr();
            if signal == 0.0 {
                return 0.0;
            }
            let interference: f64 = (0..k).filter(|&j| j != i).map(|j| powers[j] * h[(i, j)].norm_sqr()).sum();
            (1.0 + signal / (interference + noise)).log2()
        })
        .sum()
}

/// Sum rate discounted by the share of the frame spent on training.
pub fn throughput(rate: f64, training_slots: usize, frame_slots: usize) -> Result<f64, BeamformingError> {
    if training_slots >= frame_slots {
        return Err(BeamformingError::FrameTooShort { slots: training_slots, frame: frame_slots });
    }
    Ok((1.0 - training_slots as f64 / frame_slots as f64) * rate)
}
