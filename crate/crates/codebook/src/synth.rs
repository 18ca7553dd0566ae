use nalgebra::DMatrix;
use num_complex::Complex64;
use omnisurf_channel::{CMatrix, CVector};
use omnisurf_geometry::Side;

use crate::{AreaGrid, CodebookError, Coverage};

/// Codeword `q` with its intended coverage (1-based area indices).
#[derive(Debug, Clone, PartialEq)]
pub struct Codeword {
    pub q: CVector,
    pub coverage: Coverage,
    pub gain: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SynthesisOptions {
    /// Add Tikhonov loading when the Gram matrix is ill-conditioned.
    pub regularize: bool,
    pub cond_limit: f64,
    /// Loading is `eps_scale * trace / P`.
    pub eps_scale: f64,
}

impl Default for SynthesisOptions {
    fn default() -> Self {
        SynthesisOptions { regularize: true, cond_limit: 1e12, eps_scale: 1e-10 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SynthesisInfo {
    pub cond: f64,
    pub regularized: bool,
}

/// `q = C H^H (H H^H)^{-1} u` for the 0/1 indicator `u` of `coverage`.
pub fn synthesize(
    h: &CMatrix,
    coverage: &Coverage,
    gain: f64,
    opts: SynthesisOptions,
) -> Result<(CVector, SynthesisInfo), CodebookError> {
    let p = h.nrows();
    check_coverage(coverage, p)?;
    let mut g = h * h.adjoint();
    let sv = g.clone().singular_values();
    let smax = sv.max();
    let smin = sv.min();
    let cond = if smin > 0.0 { smax / smin } else { f64::INFINITY };
    let mut regularized = false;
    if !(cond <= opts.cond_limit) {
        if !opts.regularize {
            return Err(CodebookError::SingularGram { cond });
        }
        let eps = opts.eps_scale * g.trace().re / p as f64;
        for i in 0..p {
            g[(i, i)] += Complex64::from(eps);
        }
        regularized = true;
    }
    let mut u = DMatrix::<Complex64>::zeros(p, 1);
    for &i in coverage {
        u[(i - 1, 0)] = Complex64::from(1.0);
    }
    let y = g.lu().solve(&u).ok_or(CodebookError::SolveFailed)?;
    let q = (h.adjoint() * y).column(0).into_owned() * Complex64::from(gain);
    Ok((q, SynthesisInfo { cond, regularized }))
}

fn check_coverage(coverage: &Coverage, max: usize) -> Result<(), CodebookError> {
    if coverage.is_empty() {
        return Err(CodebookError::EmptyCoverage);
    }
    for &i in coverage {
        if i == 0 || i > max {
            return Err(CodebookError::IndexOutOfRange { index: i, max });
        }
    }
    Ok(())
}

/// Synthesizes a codeword on a mirrored grid.
///
/// Mirrored areas have identical channels, so the system is solved over the
/// reflective rows; refractive indices are folded onto their mirrors. The
/// returned coverage is the requested one.
pub fn synthesize_codeword(
    coverage: &Coverage,
    grid: &AreaGrid,
    gain: f64,
) -> Result<Codeword, CodebookError> {
    check_coverage(coverage, grid.len())?;
    let folded: Coverage = coverage
        .iter()
        .map(|&i| if grid.side_of(i) == Side::Refractive { grid.mirror(i) } else { i })
        .collect();
    let (q, _) = synthesize(&grid.reflective_channels(), &folded, gain, SynthesisOptions::default())?;
    Ok(Codeword { q, coverage: coverage.clone(), gain })
}

/// Mirror images of a reflective coverage set.
pub fn mirrored_coverage(coverage: &Coverage, grid: &AreaGrid) -> Result<Coverage, CodebookError> {
    check_coverage(coverage, grid.len())?;
    coverage
        .iter()
        .map(|&i| {
            if grid.side_of(i) == Side::Reflective {
                Ok(grid.mirror(i))
            } else {
                Err(CodebookError::NotReflective { index: i })
            }
        })
        .collect()
}
