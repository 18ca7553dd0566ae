use num_complex::Complex64;
use omnisurf_channel::CVector;
use std::f64::consts::PI;

use crate::CodebookError;

/// Unit-norm steering vectors at `count` evenly spaced direction cosines
/// `s_j = -1 + (2j+1)/count`, entries `exp(-j pi n s_j) / sqrt(n_u)`.
pub fn user_combiner_codebook(n_u: usize, count: usize) -> Result<Vec<CVector>, CodebookError> {
    if n_u == 0 || count == 0 {
        return Err(CodebookError::EmptyCombiner);
    }
    let norm = 1.0 / (n_u as f64).sqrt();
    Ok((0..count)
        .map(|j| {
            let s = -1.0 + (2 * j + 1) as f64 / count as f64;
            CVector::from_iterator(n_u, (0..n_u).map(|n| Complex64::from_polar(norm, -PI * n as f64 * s)))
        })
        .collect())
}
