use omnisurf_channel::{area_equivalent_channel, AreaLocation, CMatrix};
use omnisurf_geometry::{rayleigh_distance, ArrayGeometry, Direction, Point3, Side};

use crate::CodebookError;

/// One area of the grid. Indices are 1-based.
#[derive(Debug, Clone, PartialEq)]
pub struct AreaDescriptor {
    pub index: usize,
    pub location: AreaLocation,
    pub side: Side,
}

/// Ordered areas with their stacked equivalent channels (`P x L`).
///
/// Areas `1..=P/2` are reflective; area `p + P/2` is the mirror of `p`.
#[derive(Debug, Clone, PartialEq)]
pub struct AreaGrid {
    areas: Vec<AreaDescriptor>,
    h: CMatrix,
}

impl AreaGrid {
    /// Grid made of the given reflective areas followed by their mirrors.
    pub fn from_reflective(
        locations: &[AreaLocation],
        ios: &ArrayGeometry,
        wavelength: f64,
    ) -> Result<Self, CodebookError> {
        let half = locations.len();
        let mut areas = Vec::with_capacity(2 * half);
        for (i, loc) in locations.iter().enumerate() {
            let side = Side::of(loc.point(ios) - ios.origin)?;
            if side != Side::Reflective {
                return Err(CodebookError::NotReflective { index: i + 1 });
            }
            areas.push(AreaDescriptor { index: i + 1, location: *loc, side });
        }
        for i in 0..half {
            let m = areas[i].location.mirrored();
            areas.push(AreaDescriptor { index: half + i + 1, location: m, side: Side::Refractive });
        }
        let l = ios.element_count();
        let mut h = CMatrix::zeros(areas.len(), l);
        for (r, a) in areas.iter().enumerate() {
            let row = area_equivalent_channel(&a.location, ios, wavelength)?;
            h.row_mut(r).copy_from(&row.transpose());
        }
        Ok(AreaGrid { areas, h })
    }

    pub fn areas(&self) -> &[AreaDescriptor] {
        &self.areas
    }

    /// Number of areas `P`.
    pub fn len(&self) -> usize {
        self.areas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.areas.is_empty()
    }

    pub fn reflective_count(&self) -> usize {
        self.areas.len() / 2
    }

    /// Stacked equivalent channels, one row per area.
    pub fn channels(&self) -> &CMatrix {
        &self.h
    }

    /// Rows of the reflective areas only.
    pub fn reflective_channels(&self) -> CMatrix {
        self.h.rows(0, self.reflective_count()).into_owned()
    }

    /// Index of the mirror image of area `index`.
    pub fn mirror(&self, index: usize) -> usize {
        let half = self.reflective_count();
        if index > half {
            index - half
        } else {
            index + half
        }
    }

    pub fn side_of(&self, index: usize) -> Side {
        self.areas[index - 1].side
    }
}

/// Layout of a polar grid: `areas` total (both sides) spread evenly over
/// distance rings, each ring holding `areas / (2 * rings)` azimuth cells.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    pub areas: usize,
    /// Ring distances in metres from the surface centre.
    pub rings: Vec<f64>,
}

/// Builds the polar grid. Cells are centred at `sin(az) = -1 + (2i+1)/n`
/// (azimuth from broadside toward `+x`, zero elevation); areas are ordered
/// ring by ring. Rings at or beyond the Rayleigh distance are stored as
/// far-field directions.
pub fn build_area_grid(
    spec: &GridSpec,
    ios: &ArrayGeometry,
    wavelength: f64,
) -> Result<AreaGrid, CodebookError> {
    let p = spec.areas;
    if p < 2 || !p.is_power_of_two() {
        return Err(CodebookError::NotPowerOfTwo(p));
    }
    if p > ios.element_count() {
        return Err(CodebookError::TooManyAreas { areas: p, elements: ios.element_count() });
    }
    let half = p / 2;
    if spec.rings.is_empty() || half % spec.rings.len() != 0 {
        return Err(CodebookError::UnevenRings { cells: half, rings: spec.rings.len() });
    }
    let boundary = rayleigh_distance(ios.aperture_diagonal(), wavelength)?;
    let n = half / spec.rings.len();
    let mut locs = Vec::with_capacity(half);
    for &d in &spec.rings {
        if !(d.is_finite() && d > 0.0) {
            return Err(CodebookError::BadRing(d));
        }
        for i in 0..n {
            let sa = -1.0 + (2 * i + 1) as f64 / n as f64;
            let offset = Point3::new(d * sa, d * (1.0 - sa * sa).sqrt(), 0.0);
            locs.push(if d >= boundary {
                AreaLocation::Far { direction: Direction::of_vector(offset), distance: d }
            } else {
                AreaLocation::Near(ios.origin + offset)
            });
        }
    }
    AreaGrid::from_reflective(&locs, ios, wavelength)
}
