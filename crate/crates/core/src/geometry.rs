//! Spatial state of the scene: reference points, ULA layouts, exact distances and
//! the projection onto the UAV's feasible region.

use alloc::vec::Vec;
use core::ops::{Add, AddAssign, Mul, Neg, Sub};

use crate::math;
use crate::{Error, Result};

/// Slack allowed when checking that the UAV sits inside its feasible disk.
pub const FEASIBILITY_SLACK: f64 = 1e-9;

/// A point (or displacement) in the world frame, meters.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Position3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Position3 {
    pub const ORIGIN: Position3 = Position3::new(0.0, 0.0, 0.0);
    pub const X_AXIS: Position3 = Position3::new(1.0, 0.0, 0.0);

    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    pub fn dot(&self, other: &Position3) -> f64 {
        self.x * other.x + self.y * other.y + self.z * other.z
    }

    pub fn norm_sq(&self) -> f64 {
        self.dot(self)
    }

    pub fn norm(&self) -> f64 {
        math::sqrt(self.norm_sq())
    }

    pub fn distance(&self, other: &Position3) -> f64 {
        (*self - *other).norm()
    }

    /// Coordinate by index (0 = x, 1 = y, 2 = z).
    pub fn coord(&self, axis: usize) -> f64 {
        match axis {
            0 => self.x,
            1 => self.y,
            2 => self.z,
            _ => panic!("axis index {axis} out of range"),
        }
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }
}

impl From<[f64; 3]> for Position3 {
    fn from(v: [f64; 3]) -> Self {
        Self::new(v[0], v[1], v[2])
    }
}

impl Add for Position3 {
    type Output = Position3;
    fn add(self, rhs: Position3) -> Position3 {
        Position3::new(self.x + rhs.x, self.y + rhs.y, self.z + rhs.z)
    }
}

impl AddAssign for Position3 {
    fn add_assign(&mut self, rhs: Position3) {
        *self = *self + rhs;
    }
}

impl Sub for Position3 {
    type Output = Position3;
    fn sub(self, rhs: Position3) -> Position3 {
        Position3::new(self.x - rhs.x, self.y - rhs.y, self.z - rhs.z)
    }
}

impl Neg for Position3 {
    type Output = Position3;
    fn neg(self) -> Position3 {
        Position3::new(-self.x, -self.y, -self.z)
    }
}

impl Mul<f64> for Position3 {
    type Output = Position3;
    fn mul(self, k: f64) -> Position3 {
        Position3::new(self.x * k, self.y * k, self.z * k)
    }
}

/// Where the array's elements sit relative to its reference point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Centering {
    #[default]
    CenteredOnReference,
    FirstElementAtReference,
}

/// A uniform linear array.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArrayLayout {
    pub num_elements: usize,
    pub spacing: f64,
    /// Unit vector along the array.
    pub axis: Position3,
    pub centering: Centering,
}

impl ArrayLayout {
    /// A ULA along the world x-axis, centered on its reference point.
    pub fn ula_x(num_elements: usize, spacing: f64) -> Self {
        Self {
            num_elements,
            spacing,
            axis: Position3::X_AXIS,
            centering: Centering::CenteredOnReference,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.num_elements == 0 {
            return Err(Error::InvalidLayout("num_elements must be at least 1"));
        }
        if !(self.spacing > 0.0 && self.spacing.is_finite()) {
            return Err(Error::InvalidLayout("spacing must be positive"));
        }
        if !self.axis.is_finite() || (self.axis.norm() - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidLayout("axis must be a unit vector"));
        }
        Ok(())
    }

    /// Offset of element `k` from the reference point.
    pub fn offset(&self, k: usize) -> Position3 {
        let along = match self.centering {
            Centering::CenteredOnReference => k as f64 - (self.num_elements as f64 - 1.0) / 2.0,
            Centering::FirstElementAtReference => k as f64,
        };
        self.axis * (along * self.spacing)
    }
}

/// World coordinates of every element of `layout` placed at `reference`.
pub fn element_positions(reference: Position3, layout: &ArrayLayout) -> Vec<Position3> {
    (0..layout.num_elements)
        .map(|k| reference + layout.offset(k))
        .collect()
}

/// Every position in the scenario, plus the UAV's feasible region.
#[derive(Debug, Clone, PartialEq)]
pub struct SceneGeometry {
    /// Base-station reference point.
    pub bs_ref: Position3,
    /// True user position.
    pub ue_true: Position3,
    /// Current UAV (IRS) reference point.
    pub uav_ref: Position3,
    /// Center of the feasible disk.
    pub uav_home: Position3,
    pub r_max: f64,
    pub bs_array: ArrayLayout,
    pub irs_array: ArrayLayout,
    /// Flight altitude used when `planar` is set.
    pub uav_plane_z: f64,
    /// Restrict the UAV to the horizontal plane `z = uav_plane_z`.
    pub planar: bool,
}

impl SceneGeometry {
    pub fn validate(&self) -> Result<()> {
        for (p, name) in [
            (self.bs_ref, "bs_ref"),
            (self.ue_true, "ue_true"),
            (self.uav_ref, "uav_ref"),
            (self.uav_home, "uav_home"),
        ] {
            if !p.is_finite() {
                return Err(Error::NonFinite(name));
            }
        }
        if !(self.r_max > 0.0 && self.r_max.is_finite()) {
            return Err(Error::InvalidLayout("r_max must be positive"));
        }
        self.bs_array.validate()?;
        self.irs_array.validate()?;
        if self.planar && (self.uav_ref.z != self.uav_plane_z || self.uav_home.z != self.uav_plane_z) {
            return Err(Error::InvalidLayout(
                "planar mode requires uav_ref and uav_home on the flight plane",
            ));
        }
        let distance = self.uav_ref.distance(&self.uav_home);
        if distance > self.r_max + FEASIBILITY_SLACK {
            return Err(Error::Infeasible {
                distance,
                r_max: self.r_max,
            });
        }
        Ok(())
    }

    /// Copy of the scene with the UAV moved to `uav_ref`, checked for feasibility.
    pub fn with_uav(&self, uav_ref: Position3) -> Result<Self> {
        let scene = Self {
            uav_ref,
            ..self.clone()
        };
        scene.validate()?;
        Ok(scene)
    }

    /// Copy of the scene with the UAV moved, without validation. Used on the hot
    /// paths of the optimizer where the point is known to be projected already.
    pub(crate) fn moved_to(&self, uav_ref: Position3) -> Self {
        Self {
            uav_ref,
            ..self.clone()
        }
    }

    pub fn bs_elements(&self) -> Vec<Position3> {
        element_positions(self.bs_ref, &self.bs_array)
    }

    pub fn irs_elements(&self) -> Vec<Position3> {
        element_positions(self.uav_ref, &self.irs_array)
    }

    pub fn is_feasible(&self, p: &Position3) -> bool {
        p.distance(&self.uav_home) <= self.r_max + FEASIBILITY_SLACK
            && (!self.planar || p.z == self.uav_plane_z)
    }

    /// Projects a candidate UAV position onto the feasible region.
    pub fn project(&self, p: Position3) -> Position3 {
        let p = if self.planar {
            Position3::new(p.x, p.y, self.uav_plane_z)
        } else {
            p
        };
        project_to_disk(p, self.uav_home, self.r_max)
    }
}

/// Row-major `N_B × N_I` matrix of antenna-to-element distances.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl DistanceMatrix {
    #[inline]
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.data[row * self.cols + col]
    }

    pub fn row(&self, row: usize) -> &[f64] {
        &self.data[row * self.cols..(row + 1) * self.cols]
    }
}

/// `d_{b,i}`: distance from BS antenna `b` to IRS element `i`.
pub fn distance_matrix_irs_bs(scene: &SceneGeometry) -> Result<DistanceMatrix> {
    distances_between(&scene.bs_elements(), &scene.irs_elements())
}

pub(crate) fn distances_between(
    bs: &[Position3],
    irs: &[Position3],
) -> Result<DistanceMatrix> {
    let mut data = Vec::with_capacity(bs.len() * irs.len());
    for pb in bs {
        for pi in irs {
            let d = pi.distance(pb);
            if d.is_nan() || d <= 0.0 {
                return Err(Error::Coincident("IRS element and BS antenna"));
            }
            data.push(d);
        }
    }
    Ok(DistanceMatrix {
        rows: bs.len(),
        cols: irs.len(),
        data,
    })
}

/// `d_{i,u}`: distance from each IRS element to the user at `ue`.
pub fn distance_vector_ue_irs(scene: &SceneGeometry, ue: Position3) -> Result<Vec<f64>> {
    distances_to(&scene.irs_elements(), ue)
}

pub(crate) fn distances_to(irs: &[Position3], ue: Position3) -> Result<Vec<f64>> {
    irs.iter()
        .map(|pi| {
            let d = ue.distance(pi);
            if d > 0.0 {
                Ok(d)
            } else {
                Err(Error::Coincident("user and IRS element"))
            }
        })
        .collect()
}

/// Euclidean projection of `p` onto the ball of radius `r_max` around `home`.
///
/// Points already inside are returned unchanged; exterior points are scaled
/// radially onto the boundary.
pub fn project_to_disk(p: Position3, home: Position3, r_max: f64) -> Position3 {
    let offset = p - home;
    let dist = offset.norm();
    if dist <= r_max {
        return p;
    }
    // Rounding can leave the scaled point a hair outside; pull it in until the
    // result passes the same test the identity branch uses.
    let mut scale = r_max / dist;
    for _ in 0..64 {
        let q = home + offset * scale;
        let d = q.distance(&home);
        if d <= r_max {
            return q;
        }
        scale *= (r_max / d) * (1.0 - f64::EPSILON);
    }
    home
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    const LAMBDA: f64 = 3.0e8 / 28.0e9;

    fn single_element_scene() -> SceneGeometry {
        SceneGeometry {
            bs_ref: Position3::new(12.0, 0.0, 2.0),
            ue_true: Position3::new(3.0, 0.0, 1.0),
            uav_ref: Position3::new(6.0, 6.0, 3.0),
            uav_home: Position3::new(6.0, 6.0, 3.0),
            r_max: 3.0,
            bs_array: ArrayLayout::ula_x(1, LAMBDA / 2.0),
            irs_array: ArrayLayout::ula_x(1, LAMBDA / 2.0),
            uav_plane_z: 3.0,
            planar: true,
        }
    }

    #[test]
    fn single_element_sits_at_reference() {
        let r = Position3::new(1.5, -2.0, 7.0);
        assert_eq!(element_positions(r, &ArrayLayout::ula_x(1, 0.1)), vec![r]);
    }

    #[test]
    fn two_element_offsets() {
        let pts = element_positions(
            Position3::new(6.0, 6.0, 3.0),
            &ArrayLayout::ula_x(2, LAMBDA / 2.0),
        );
        assert!((pts[0].x - (6.0 - 0.002_678_571_4)).abs() < 1e-10);
        assert!((pts[1].x - (6.0 + 0.002_678_571_4)).abs() < 1e-10);
        assert_eq!(pts[0].y, 6.0);
        assert_eq!(pts[1].z, 3.0);
    }

    #[test]
    fn first_element_mode() {
        let layout = ArrayLayout {
            centering: Centering::FirstElementAtReference,
            ..ArrayLayout::ula_x(3, 0.5)
        };
        let pts = element_positions(Position3::ORIGIN, &layout);
        assert_eq!(pts[0], Position3::ORIGIN);
        assert_eq!(pts[2], Position3::new(1.0, 0.0, 0.0));
    }

    #[test]
    fn layout_validation() {
        assert!(ArrayLayout::ula_x(0, 0.1).validate().is_err());
        assert!(ArrayLayout::ula_x(4, 0.0).validate().is_err());
        let skew = ArrayLayout {
            axis: Position3::new(1.0, 1.0, 0.0),
            ..ArrayLayout::ula_x(4, 0.1)
        };
        assert!(skew.validate().is_err());
    }

    #[test]
    fn single_element_distances() {
        let scene = single_element_scene();
        let d = distance_matrix_irs_bs(&scene).unwrap();
        assert_eq!((d.rows, d.cols), (1, 1));
        assert!((d.get(0, 0) - 8.544_003_745_317_53).abs() < 1e-12);
        let du = distance_vector_ue_irs(&scene, scene.ue_true).unwrap();
        assert_eq!(du, vec![7.0]);
    }

    #[test]
    fn ue_on_element_rejected() {
        let scene = single_element_scene();
        assert_eq!(
            distance_vector_ue_irs(&scene, scene.uav_ref),
            Err(Error::Coincident("user and IRS element"))
        );
    }

    #[test]
    fn coincident_arrays_rejected() {
        let mut scene = single_element_scene();
        scene.bs_ref = scene.uav_ref;
        assert!(distance_matrix_irs_bs(&scene).is_err());
    }

    #[test]
    fn projection_examples() {
        let home = Position3::new(6.0, 6.0, 3.0);
        let inside = Position3::new(7.0, 5.0, 3.0);
        assert_eq!(project_to_disk(inside, home, 3.0), inside);
        assert_eq!(
            project_to_disk(Position3::new(12.0, 6.0, 3.0), home, 3.0),
            Position3::new(9.0, 6.0, 3.0)
        );
    }

    #[test]
    fn scene_validation() {
        let scene = single_element_scene();
        assert!(scene.validate().is_ok());
        assert!(matches!(
            scene.with_uav(Position3::new(10.0, 6.0, 3.0)),
            Err(Error::Infeasible { .. })
        ));
        assert!(scene.with_uav(Position3::new(6.0, 6.0, 3.5)).is_err());
        let mut bad = scene.clone();
        bad.r_max = 0.0;
        assert!(bad.validate().is_err());
        bad.r_max = 3.0;
        bad.ue_true.x = f64::NAN;
        assert_eq!(bad.validate(), Err(Error::NonFinite("ue_true")));
    }

    #[test]
    fn planar_projection_snaps_to_plane() {
        let scene = single_element_scene();
        let p = scene.project(Position3::new(20.0, 6.0, 4.0));
        assert_eq!(p, Position3::new(9.0, 6.0, 3.0));
    }
}
