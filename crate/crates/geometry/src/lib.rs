//! Scene geometry for a planar surface in the x-z plane.
//!
//! The surface sits at `y = 0`. The half-space `y > 0` is the reflective side
//! (where the base station lives) and `y < 0` is the refractive side. Every
//! array is parallel to the surface plane, with its horizontal axis along `x`
//! and its vertical axis along `z`.

use std::f64::consts::PI;
use std::ops::{Add, Mul, Neg, Sub};

use thiserror::Error;

/// Speed of light in vacuum (m/s).
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("non-finite coordinate in point ({0}, {1}, {2})")]
    NonFinite(f64, f64, f64),
    #[error("array must have at least one element per axis (got {0}x{1})")]
    EmptyArray(usize, usize),
    #[error("element spacing must be positive and finite (got {0})")]
    BadSpacing(f64),
    #[error("aperture must be finite and non-negative (got {0})")]
    BadAperture(f64),
    #[error("wavelength must be positive and finite (got {0})")]
    BadWavelength(f64),
    #[error("frequency must be positive and finite (got {0})")]
    BadFrequency(f64),
    #[error("point ({0}, {1}, {2}) lies on the surface plane; its side is undefined")]
    OnPlane(f64, f64, f64),
    #[error("base station must be on the reflective side (y > 0), got y = {0}")]
    BaseStationSide(f64),
}

/// Wavelength for a carrier frequency in Hz.
pub fn wavelength(frequency_hz: f64) -> Result<f64, GeometryError> {
    if !(frequency_hz.is_finite() && frequency_hz > 0.0) {
        return Err(GeometryError::BadFrequency(frequency_hz));
    }
    Ok(SPEED_OF_LIGHT / frequency_hz)
}

/// A point (or vector) in metres.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Point3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Point3 {
    pub const ORIGIN: Point3 = Point3 { x: 0.0, y: 0.0, z: 0.0 };

    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Point3 { x, y, z }
    }

    /// Like [`Point3::new`] but rejects NaN and infinities.
    pub fn checked(x: f64, y: f64, z: f64) -> Result<Self, GeometryError> {
        if x.is_finite() && y.is_finite() && z.is_finite() {
            Ok(Point3 { x, y, z })
        } else {
            Err(GeometryError::NonFinite(x, y, z))
        }
    }

    pub fn dot(self, o: Point3) -> f64 {
        self.x * o.x + self.y * o.y + self.z * o.z
    }

    pub fn norm(self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn distance(self, o: Point3) -> f64 {
        (self - o).norm()
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }
}

impl Add for Point3 {
    type Output = Point3;
    fn add(self, o: Point3) -> Point3 {
        Point3::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl Sub for Point3 {
    type Output = Point3;
    fn sub(self, o: Point3) -> Point3 {
        Point3::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl Mul<f64> for Point3 {
    type Output = Point3;
    fn mul(self, s: f64) -> Point3 {
        Point3::new(self.x * s, self.y * s, self.z * s)
    }
}

impl Neg for Point3 {
    type Output = Point3;
    fn neg(self) -> Point3 {
        Point3::new(-self.x, -self.y, -self.z)
    }
}

/// Reflection across the surface plane: `(x, y, z) -> (x, -y, z)`.
pub fn mirror_point(p: Point3) -> Point3 {
    Point3::new(p.x, -p.y, p.z)
}

/// Which half-space a point belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Side {
    Reflective,
    Refractive,
}

impl Side {
    pub fn of(p: Point3) -> Result<Side, GeometryError> {
        if p.y > 0.0 {
            Ok(Side::Reflective)
        } else if p.y < 0.0 {
            Ok(Side::Refractive)
        } else {
            Err(GeometryError::OnPlane(p.x, p.y, p.z))
        }
    }

    pub fn opposite(self) -> Side {
        match self {
            Side::Reflective => Side::Refractive,
            Side::Refractive => Side::Reflective,
        }
    }
}

/// Elevation `theta` and azimuth `psi` of a direction, in radians.
///
/// For a unit vector `u` the angles are `theta = asin(-u_z)` and
/// `psi = atan2(-u_x, u_y)`, so that `cos(theta) sin(psi) = -u_x` and
/// `sin(theta) = -u_z`. With this convention the planar steering vector
/// `exp(-j 2 pi / lambda (i mu + m nu))`, `mu = d_h cos(theta) sin(psi)`,
/// `nu = d_v sin(theta)`, is the far-field limit of the spherical model.
/// Directions with `cos(psi) > 0` point into the reflective half-space.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Direction {
    pub theta: f64,
    pub psi: f64,
}

impl Direction {
    pub fn new(theta: f64, psi: f64) -> Self {
        Direction { theta, psi }
    }

    /// Direction of a non-zero vector.
    pub fn of_vector(v: Point3) -> Direction {
        let n = v.norm();
        let u = v * (1.0 / n);
        Direction {
            theta: (-u.z).clamp(-1.0, 1.0).asin(),
            psi: (-u.x).atan2(u.y),
        }
    }

    /// Direction and distance from `from` to `to`.
    pub fn between(from: Point3, to: Point3) -> (Direction, f64) {
        let v = to - from;
        (Direction::of_vector(v), v.norm())
    }

    pub fn unit_vector(self) -> Point3 {
        let (st, ct) = self.theta.sin_cos();
        let (sp, cp) = self.psi.sin_cos();
        Point3::new(-ct * sp, ct * cp, -st)
    }

    /// Horizontal direction cosine `cos(theta) sin(psi)`.
    pub fn horizontal_cosine(self) -> f64 {
        self.theta.cos() * self.psi.sin()
    }

    /// Vertical direction cosine `sin(theta)`.
    pub fn vertical_cosine(self) -> f64 {
        self.theta.sin()
    }

    pub fn side(self) -> Result<Side, GeometryError> {
        let c = self.psi.cos();
        if c > 0.0 {
            Ok(Side::Reflective)
        } else if c < 0.0 {
            Ok(Side::Refractive)
        } else {
            let u = self.unit_vector();
            Err(GeometryError::OnPlane(u.x, u.y, u.z))
        }
    }

    /// Mirror image across the surface plane (`psi -> pi - psi`).
    pub fn mirrored(self) -> Direction {
        Direction::new(self.theta, wrap_pi(PI - self.psi))
    }
}

fn wrap_pi(a: f64) -> f64 {
    let w = (a + PI).rem_euclid(2.0 * PI) - PI;
    if w == -PI {
        PI
    } else {
        w
    }
}

/// Uniform planar array parallel to the surface plane.
#[derive(Debug, Clone, PartialEq)]
pub struct ArrayGeometry {
    pub origin: Point3,
    pub horizontal_count: usize,
    pub vertical_count: usize,
    pub horizontal_spacing: f64,
    pub vertical_spacing: f64,
}

impl ArrayGeometry {
    pub fn new(
        origin: Point3,
        horizontal_count: usize,
        vertical_count: usize,
        horizontal_spacing: f64,
        vertical_spacing: f64,
    ) -> Result<Self, GeometryError> {
        if !origin.is_finite() {
            return Err(GeometryError::NonFinite(origin.x, origin.y, origin.z));
        }
        if horizontal_count == 0 || vertical_count == 0 {
            return Err(GeometryError::EmptyArray(horizontal_count, vertical_count));
        }
        for s in [horizontal_spacing, vertical_spacing] {
            if !(s.is_finite() && s > 0.0) {
                return Err(GeometryError::BadSpacing(s));
            }
        }
        Ok(ArrayGeometry {
            origin,
            horizontal_count,
            vertical_count,
            horizontal_spacing,
            vertical_spacing,
        })
    }

    /// Square-spaced array.
    pub fn uniform(
        origin: Point3,
        horizontal_count: usize,
        vertical_count: usize,
        spacing: f64,
    ) -> Result<Self, GeometryError> {
        Self::new(origin, horizontal_count, vertical_count, spacing, spacing)
    }

    pub fn element_count(&self) -> usize {
        self.horizontal_count * self.vertical_count
    }

    /// Element index for horizontal index `i` and vertical index `m`.
    pub fn index(&self, i: usize, m: usize) -> usize {
        i * self.vertical_count + m
    }

    /// Element positions centred on the origin, horizontal-major
    /// (`l = i * L_v + m`), matching the `a_h ⊗ a_v` steering order.
    pub fn element_positions(&self) -> Vec<Point3> {
        let ch = (self.horizontal_count as f64 - 1.0) / 2.0;
        let cv = (self.vertical_count as f64 - 1.0) / 2.0;
        let mut out = Vec::with_capacity(self.element_count());
        for i in 0..self.horizontal_count {
            for m in 0..self.vertical_count {
                out.push(Point3::new(
                    self.origin.x + (i as f64 - ch) * self.horizontal_spacing,
                    self.origin.y,
                    self.origin.z + (m as f64 - cv) * self.vertical_spacing,
                ));
            }
        }
        out
    }

    /// Extent between outermost element centres along each axis.
    pub fn extent(&self) -> (f64, f64) {
        (
            (self.horizontal_count as f64 - 1.0) * self.horizontal_spacing,
            (self.vertical_count as f64 - 1.0) * self.vertical_spacing,
        )
    }

    /// Largest dimension of the array: its diagonal.
    pub fn aperture_diagonal(&self) -> f64 {
        let (w, h) = self.extent();
        w.hypot(h)
    }

    /// Same layout moved to a new centre.
    pub fn centered_at(&self, origin: Point3) -> ArrayGeometry {
        ArrayGeometry { origin, ..self.clone() }
    }
}

/// Rayleigh distance `2 d^2 / lambda`.
pub fn rayleigh_distance(aperture: f64, wavelength: f64) -> Result<f64, GeometryError> {
    if !(aperture.is_finite() && aperture >= 0.0) {
        return Err(GeometryError::BadAperture(aperture));
    }
    if !(wavelength.is_finite() && wavelength > 0.0) {
        return Err(GeometryError::BadWavelength(wavelength));
    }
    Ok(2.0 * aperture * aperture / wavelength)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FieldRegion {
    Near,
    Far,
}

/// Near/far classification by distance to the array centre. A point exactly
/// on the boundary counts as far.
pub fn classify_field(
    point: Point3,
    ios: &ArrayGeometry,
    wavelength: f64,
) -> Result<FieldRegion, GeometryError> {
    if point.y == ios.origin.y {
        return Err(GeometryError::OnPlane(point.x, point.y, point.z));
    }
    let r = rayleigh_distance(ios.aperture_diagonal(), wavelength)?;
    classify_distance(point.distance(ios.origin), r)
}

/// Classification from a precomputed distance and boundary.
pub fn classify_distance(distance: f64, boundary: f64) -> Result<FieldRegion, GeometryError> {
    Ok(if distance >= boundary { FieldRegion::Far } else { FieldRegion::Near })
}

/// Base station, surface and user arrays of one scene.
#[derive(Debug, Clone, PartialEq)]
pub struct SceneLayout {
    pub bs: ArrayGeometry,
    pub ios: ArrayGeometry,
    pub users: Vec<ArrayGeometry>,
}

impl SceneLayout {
    pub fn new(
        bs: ArrayGeometry,
        ios: ArrayGeometry,
        users: Vec<ArrayGeometry>,
    ) -> Result<Self, GeometryError> {
        if bs.origin.y <= 0.0 {
            return Err(GeometryError::BaseStationSide(bs.origin.y));
        }
        for u in &users {
            Side::of(u.origin)?;
        }
        Ok(SceneLayout { bs, ios, users })
    }

    pub fn user_sides(&self) -> Vec<Side> {
        self.users
            .iter()
            .map(|u| Side::of(u.origin).expect("validated on construction"))
            .collect()
    }
}
