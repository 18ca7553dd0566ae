//! Deterministic line-of-sight channel models.
//!
//! Spherical entries are `sqrt(1/(4 pi d^2)) exp(-j 2 pi d / lambda)`; planar
//! (far-field) channels are outer products of UPA steering vectors scaled by
//! the same path loss.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use omnisurf_geometry::{
    classify_field, ArrayGeometry, Direction, FieldRegion, GeometryError, Point3,
};
use thiserror::Error;

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ChannelError {
    #[error("zero distance between elements at ({0}, {1}, {2})")]
    ZeroDistance(f64, f64, f64),
    #[error("distance must be positive and finite (got {0})")]
    BadDistance(f64),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

/// Free-space amplitude `sqrt(1/(4 pi d^2))`.
pub fn path_amplitude(d: f64) -> f64 {
    (1.0 / (4.0 * PI * d * d)).sqrt()
}

/// One spherical-wave channel coefficient at distance `d`.
pub fn spherical_coefficient(d: f64, wavelength: f64) -> C64 {
    C64::from_polar(path_amplitude(d), -2.0 * PI * d / wavelength)
}

fn spherical_matrix(
    rows: &[Point3],
    cols: &[Point3],
    wavelength: f64,
) -> Result<CMatrix, ChannelError> {
    let mut m = CMatrix::zeros(rows.len(), cols.len());
    for (r, a) in rows.iter().enumerate() {
        for (c, b) in cols.iter().enumerate() {
            let d = a.distance(*b);
            if d == 0.0 {
                return Err(ChannelError::ZeroDistance(a.x, a.y, a.z));
            }
            m[(r, c)] = spherical_coefficient(d, wavelength);
        }
    }
    Ok(m)
}

/// Base station to surface channel, `L x N_b`.
pub fn bs_ios_channel(
    bs: &ArrayGeometry,
    ios: &ArrayGeometry,
    wavelength: f64,
) -> Result<CMatrix, ChannelError> {
    spherical_matrix(&ios.element_positions(), &bs.element_positions(), wavelength)
}

/// Spherical-wave surface to user channel, `N_u x L`.
pub fn near_field_user_channel(
    user: &ArrayGeometry,
    ios: &ArrayGeometry,
    wavelength: f64,
) -> Result<CMatrix, ChannelError> {
    spherical_matrix(&user.element_positions(), &ios.element_positions(), wavelength)
}

/// UPA steering vector `a_h(mu) ⊗ a_v(nu)` with entries
/// `exp(-j 2 pi (i mu + m nu) / lambda)`, `i, m` counted from zero.
pub fn steering_vector_upa(
    direction: Direction,
    counts: (usize, usize),
    spacings: (f64, f64),
    wavelength: f64,
) -> CVector {
    let mu = spacings.0 * direction.horizontal_cosine();
    let nu = spacings.1 * direction.vertical_cosine();
    let k = -2.0 * PI / wavelength;
    let mut v = CVector::zeros(counts.0 * counts.1);
    for i in 0..counts.0 {
        for m in 0..counts.1 {
            v[i * counts.1 + m] = C64::from_polar(1.0, k * (i as f64 * mu + m as f64 * nu));
        }
    }
    v
}

/// Steering vector of an array toward `direction`.
pub fn array_steering(array: &ArrayGeometry, direction: Direction, wavelength: f64) -> CVector {
    steering_vector_upa(
        direction,
        (array.horizontal_count, array.vertical_count),
        (array.horizontal_spacing, array.vertical_spacing),
        wavelength,
    )
}

/// Planar-wave user channel `sqrt(1/(4 pi d^2)) u a^T`, `N_u x L`.
///
/// `user_direction` points from the user toward the surface and
/// `ios_direction` from the surface toward the user.
pub fn far_field_user_channel(
    user_direction: Direction,
    ios_direction: Direction,
    distance: f64,
    user: &ArrayGeometry,
    ios: &ArrayGeometry,
    wavelength: f64,
) -> Result<CMatrix, ChannelError> {
    if !(distance.is_finite() && distance > 0.0) {
        return Err(ChannelError::BadDistance(distance));
    }
    let u = array_steering(user, user_direction, wavelength);
    let a = array_steering(ios, ios_direction, wavelength);
    Ok((u * a.transpose()) * C64::from(path_amplitude(distance)))
}

/// A user channel together with the model that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct UserChannel {
    pub matrix: CMatrix,
    pub model: FieldRegion,
}

/// User channel with the model picked by near/far classification.
pub fn user_channel(
    user: &ArrayGeometry,
    ios: &ArrayGeometry,
    wavelength: f64,
) -> Result<UserChannel, ChannelError> {
    let model = classify_field(user.origin, ios, wavelength)?;
    let matrix = match model {
        FieldRegion::Near => near_field_user_channel(user, ios, wavelength)?,
        FieldRegion::Far => {
            let (to_user, d) = Direction::between(ios.origin, user.origin);
            let (to_ios, _) = Direction::between(user.origin, ios.origin);
            far_field_user_channel(to_ios, to_user, d, user, ios, wavelength)?
        }
    };
    Ok(UserChannel { matrix, model })
}

/// Location of a codebook area: an explicit point, or a direction with a
/// reference distance from the surface centre.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AreaLocation {
    Near(Point3),
    Far { direction: Direction, distance: f64 },
}

impl AreaLocation {
    /// Physical point the area represents.
    pub fn point(&self, ios: &ArrayGeometry) -> Point3 {
        match *self {
            AreaLocation::Near(p) => p,
            AreaLocation::Far { direction, distance } => ios.origin + direction.unit_vector() * distance,
        }
    }

    pub fn mirrored(&self) -> AreaLocation {
        match *self {
            AreaLocation::Near(p) => AreaLocation::Near(omnisurf_geometry::mirror_point(p)),
            AreaLocation::Far { direction, distance } => AreaLocation::Far {
                direction: direction.mirrored(),
                distance,
            },
        }
    }
}

/// Equivalent channel between the surface and one area (length `L`).
///
/// Areas classified far use `sqrt(1/(4 pi d^2)) exp(-j 2 pi d / lambda) a(theta, psi)`
/// with the steering phase referenced to the array centre, so a far row is
/// the large-distance limit of the spherical row; near areas use the
/// per-element spherical model.
pub fn area_equivalent_channel(
    area: &AreaLocation,
    ios: &ArrayGeometry,
    wavelength: f64,
) -> Result<CVector, ChannelError> {
    let p = area.point(ios);
    match classify_field(p, ios, wavelength)? {
        FieldRegion::Near => {
            let row = spherical_matrix(&[p], &ios.element_positions(), wavelength)?;
            Ok(row.row(0).transpose())
        }
        FieldRegion::Far => {
            let (direction, d) = match *area {
                AreaLocation::Far { direction, distance } => (direction, distance),
                AreaLocation::Near(p) => Direction::between(ios.origin, p),
            };
            let a = array_steering(ios, direction, wavelength);
            let mid = (ios.horizontal_count - 1) as f64 / 2.0 * ios.horizontal_spacing * direction.horizontal_cosine()
                + (ios.vertical_count - 1) as f64 / 2.0 * ios.vertical_spacing * direction.vertical_cosine();
            let centre = C64::from_polar(1.0, 2.0 * PI * mid / wavelength);
            Ok(a * (spherical_coefficient(d, wavelength) * centre))
        }
    }
}
