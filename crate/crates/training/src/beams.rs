use num_complex::Complex64;
use omnisurf_channel::{CMatrix, CVector};
use omnisurf_codebook::{
    layer_coverage, realize_codeword, synthesize_codeword, AreaGrid, Coverage, HierarchicalCodebook,
};
use omnisurf_geometry::Side;
use omnisurf_surface::AmplitudeSplit;

use crate::TrainingError;

/// A radiated training beam: the codeword it was built from and the field
/// leaving the surface on each side.
#[derive(Debug, Clone, PartialEq)]
pub struct Beam {
    pub target: CVector,
    pub reflective: CVector,
    pub refractive: CVector,
}

impl Beam {
    /// Realizes codeword `q` with the uniform precoder.
    pub fn from_codeword(q: &CVector, h_bi: &CMatrix, split: &AmplitudeSplit, c: f64) -> Result<Beam, TrainingError> {
        let r = realize_codeword(q, h_bi, split, c)?;
        Ok(Beam { target: q.clone(), reflective: r.reflective, refractive: r.refractive })
    }

    pub fn toward(&self, side: Side) -> &CVector {
        match side {
            Side::Reflective => &self.reflective,
            Side::Refractive => &self.refractive,
        }
    }

    /// Keeps only the field on `side` (a single-sided surface).
    pub fn only(mut self, side: Side) -> Beam {
        match side {
            Side::Reflective => self.refractive.fill(Complex64::from(0.0)),
            Side::Refractive => self.reflective.fill(Complex64::from(0.0)),
        }
        self
    }

    /// Two surfaces transmitting at once.
    pub fn superpose(&self, other: &Beam) -> Beam {
        Beam {
            target: &self.target + &other.target,
            reflective: &self.reflective + &other.reflective,
            refractive: &self.refractive + &other.refractive,
        }
    }
}

/// Realized codebook tree used by the training protocol.
///
/// `layers[s-1]` holds the two broadcast beams of layer `s`; `leaves` are
/// indexed from 1 via [`BeamTree::leaf`].
#[derive(Debug, Clone, PartialEq)]
pub struct BeamTree {
    pub depth: usize,
    pub layers: Vec<[Beam; 2]>,
    pub leaves: Vec<Beam>,
}

impl BeamTree {
    pub fn realize(
        codebook: &HierarchicalCodebook,
        h_bi: &CMatrix,
        split: &AmplitudeSplit,
        c: f64,
    ) -> Result<BeamTree, TrainingError> {
        let beam = |q: &CVector| Beam::from_codeword(q, h_bi, split, c);
        let layers = codebook
            .layers
            .iter()
            .map(|[a, b]| Ok([beam(&a.q)?, beam(&b.q)?]))
            .collect::<Result<Vec<_>, TrainingError>>()?;
        let leaves = codebook.leaves.iter().map(|l| beam(&l.q)).collect::<Result<Vec<_>, _>>()?;
        Ok(BeamTree { depth: codebook.depth, layers, leaves })
    }

    /// Tree for two single-sided surfaces sharing one training schedule.
    ///
    /// Leaves `1..=n` belong to the reflective surface and `n+1..=2n` to the
    /// refractive one, where `n` is the number of reflective areas of
    /// `grid`. A broadcast whose coverage spans both halves is sent by both
    /// surfaces at once.
    pub fn split_surfaces(
        grid: &AreaGrid,
        h_bi: &CMatrix,
        split: &AmplitudeSplit,
        c: f64,
    ) -> Result<BeamTree, TrainingError> {
        let n = grid.reflective_count();
        let total = 2 * n;
        let depth = total.trailing_zeros() as usize;
        let sided = |cov: &Coverage| -> Result<Beam, TrainingError> {
            let refl: Coverage = cov.iter().copied().filter(|&i| i <= n).collect();
            let refr: Coverage = cov.iter().filter(|&&i| i > n).map(|&i| i - n).collect();
            let mut parts = Vec::new();
            if !refl.is_empty() {
                let q = synthesize_codeword(&refl, grid, 1.0)?.q;
                parts.push(Beam::from_codeword(&q, h_bi, split, c)?.only(Side::Reflective));
            }
            if !refr.is_empty() {
                let q = synthesize_codeword(&refr, grid, 1.0)?.q;
                parts.push(Beam::from_codeword(&q, h_bi, split, c)?.only(Side::Refractive));
            }
            let first = parts.remove(0);
            Ok(parts.iter().fold(first, |acc, b| acc.superpose(b)))
        };
        let layers = (1..depth)
            .map(|s| Ok([sided(&layer_coverage(total, s, 1))?, sided(&layer_coverage(total, s, 2))?]))
            .collect::<Result<Vec<_>, TrainingError>>()?;
        let leaves = (1..=total).map(|i| sided(&Coverage::from([i]))).collect::<Result<Vec<_>, _>>()?;
        Ok(BeamTree { depth, layers, leaves })
    }

    pub fn leaf(&self, index: usize) -> &Beam {
        &self.leaves[index - 1]
    }

    pub fn leaf_count(&self) -> usize {
        self.leaves.len()
    }

    /// Broadcast slots spent above the bottom layer.
    pub fn upper_slots(&self) -> usize {
        2 * self.layers.len()
    }
}
