//! Axis-aligned sampling of the 4D parameter body
//! `(Re c1, Im c1, Re c2, Im c2)` into class maps, class volumes and
//! projections.
//!
//! Every sample sits at a cell center. Centers are measured from the middle
//! of each axis range so a symmetric range samples an exactly symmetric point
//! set.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::dynamics::{classify, ConnectivityClass, IterationConfig, MapParams};
use crate::error::{Error, Result};
use crate::parallel::{self, CancelToken, Parallelism};

pub const DEFAULT_MIN: f64 = -2.0;
pub const DEFAULT_MAX: f64 = 2.0;
pub const DEFAULT_VOXEL_LIMIT: u64 = 512 * 512 * 512;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Axis4 {
    Re1,
    Im1,
    Re2,
    Im2,
}

impl Axis4 {
    pub const ALL: [Axis4; 4] = [Axis4::Re1, Axis4::Im1, Axis4::Re2, Axis4::Im2];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            Axis4::Re1 => "re1",
            Axis4::Im1 => "im1",
            Axis4::Re2 => "re2",
            Axis4::Im2 => "im2",
        }
    }

    /// The axes not in `taken`, in canonical order.
    pub fn complement(taken: &[Axis4]) -> Vec<Axis4> {
        Axis4::ALL.into_iter().filter(|a| !taken.contains(a)).collect()
    }
}

impl fmt::Display for Axis4 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Axis4 {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "re1" => Ok(Axis4::Re1),
            "im1" => Ok(Axis4::Im1),
            "re2" => Ok(Axis4::Re2),
            "im2" => Ok(Axis4::Im2),
            _ => Err(Error::UnknownAxis(s.to_string())),
        }
    }
}

/// Builds the parameter pair from a full coordinate 4-tuple.
pub fn params_from_coords(coords: [f64; 4]) -> MapParams {
    MapParams::from_parts(coords[0], coords[1], coords[2], coords[3])
}

/// One sampled axis: `res` cells spanning `[min, max]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AxisRange {
    pub axis: Axis4,
    pub min: f64,
    pub max: f64,
    pub res: u32,
}

impl AxisRange {
    pub fn new(axis: Axis4, min: f64, max: f64, res: u32) -> Self {
        Self { axis, min, max, res }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.min.is_finite() && self.max.is_finite() && self.min < self.max) {
            return Err(Error::InvalidRange {
                axis: self.axis,
                min: self.min,
                max: self.max,
            });
        }
        if self.res == 0 {
            return Err(Error::ZeroResolution(self.axis));
        }
        Ok(())
    }

    pub fn step(&self) -> f64 {
        (self.max - self.min) / self.res as f64
    }

    /// Center of cell `idx`, counted from `min`.
    #[inline]
    pub fn center(&self, idx: u32) -> f64 {
        let mid = 0.5 * (self.min + self.max);
        mid + (idx as f64 + 0.5 - 0.5 * self.res as f64) * self.step()
    }

    /// Index of the cell containing `value`, if inside the range.
    pub fn cell_of(&self, value: f64) -> Option<u32> {
        if !(value >= self.min && value <= self.max) {
            return None;
        }
        let idx = ((value - self.min) / self.step()).floor() as u32;
        Some(idx.min(self.res - 1))
    }

    fn max_abs(&self) -> f64 {
        self.min.abs().max(self.max.abs())
    }
}

fn check_distinct(axes: &[Axis4]) -> Result<()> {
    for (i, a) in axes.iter().enumerate() {
        if axes[..i].contains(a) {
            return Err(Error::DuplicateAxis(*a));
        }
    }
    Ok(())
}

fn check_fixed(axis: Axis4, value: f64) -> Result<()> {
    if value.is_finite() {
        Ok(())
    } else {
        Err(Error::NonFiniteFixed(axis))
    }
}

/// Largest escape-radius bound over a box given per-coordinate maximum
/// magnitudes.
fn max_radius_bound(max_abs: [f64; 4]) -> f64 {
    let c1 = max_abs[0].hypot(max_abs[1]);
    let c2 = max_abs[2].hypot(max_abs[3]);
    2.0f64.max(c1).max(c2)
}

/// Two fixed coordinates and two free ones.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SliceSpec {
    pub fixed: [(Axis4, f64); 2],
    pub x: AxisRange,
    pub y: AxisRange,
}

impl SliceSpec {
    /// Free axes in canonical order over the default `[-2, 2]` window.
    pub fn new(fixed: [(Axis4, f64); 2], res: u32) -> Result<Self> {
        Self::with_bounds(fixed, DEFAULT_MIN, DEFAULT_MAX, res)
    }

    pub fn with_bounds(fixed: [(Axis4, f64); 2], min: f64, max: f64, res: u32) -> Result<Self> {
        check_distinct(&[fixed[0].0, fixed[1].0])?;
        let free = Axis4::complement(&[fixed[0].0, fixed[1].0]);
        let spec = Self {
            fixed,
            x: AxisRange::new(free[0], min, max, res),
            y: AxisRange::new(free[1], min, max, res),
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        check_distinct(&[self.fixed[0].0, self.fixed[1].0, self.x.axis, self.y.axis])?;
        for (axis, value) in self.fixed {
            check_fixed(axis, value)?;
        }
        self.x.validate()?;
        self.y.validate()
    }

    /// Parameters at the center of the cell with axis indices `(xi, yi)`,
    /// both counted from the range minimum.
    #[inline]
    pub fn params_at(&self, xi: u32, yi: u32) -> MapParams {
        let mut coords = [0.0; 4];
        for (axis, value) in self.fixed {
            coords[axis.index()] = value;
        }
        coords[self.x.axis.index()] = self.x.center(xi);
        coords[self.y.axis.index()] = self.y.center(yi);
        params_from_coords(coords)
    }

    /// Largest escape-radius bound over the sampled box.
    pub fn max_radius_bound(&self) -> f64 {
        let mut max_abs = [0.0; 4];
        for (axis, value) in self.fixed {
            max_abs[axis.index()] = value.abs();
        }
        max_abs[self.x.axis.index()] = self.x.max_abs();
        max_abs[self.y.axis.index()] = self.y.max_abs();
        max_radius_bound(max_abs)
    }
}

/// Dense class map. Stored row-major with the top row at the maximum of the
/// y range, the same orientation the image writers emit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassGrid2D {
    pub spec: SliceSpec,
    pub cells: Vec<ConnectivityClass>,
    pub config: IterationConfig,
    pub low_confidence_count: u64,
}

impl ClassGrid2D {
    pub fn width(&self) -> u32 {
        self.spec.x.res
    }

    pub fn height(&self) -> u32 {
        self.spec.y.res
    }

    /// Cell in image order: `row` 0 is the top.
    pub fn pixel(&self, col: u32, row: u32) -> ConnectivityClass {
        self.cells[row as usize * self.width() as usize + col as usize]
    }

    /// Cell by axis indices counted from each range minimum.
    pub fn at(&self, xi: u32, yi: u32) -> ConnectivityClass {
        self.pixel(xi, self.height() - 1 - yi)
    }

    /// Axis indices of the cell containing the point `(x, y)`.
    pub fn locate(&self, x: f64, y: f64) -> Option<(u32, u32)> {
        Some((self.spec.x.cell_of(x)?, self.spec.y.cell_of(y)?))
    }

    pub fn count(&self, class: ConnectivityClass) -> usize {
        self.cells.iter().filter(|&&c| c == class).count()
    }

    pub fn codes(&self) -> Vec<u8> {
        self.cells.iter().map(|c| c.code()).collect()
    }
}

/// One fixed coordinate, three free ones in declared order (x, y, z).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VolumeSpec {
    pub fixed: (Axis4, f64),
    pub axes: [AxisRange; 3],
}

impl VolumeSpec {
    /// Free axes in canonical order over the default `[-2, 2]^3` cube.
    pub fn new(fixed: (Axis4, f64), res: u32) -> Result<Self> {
        Self::with_bounds(fixed, DEFAULT_MIN, DEFAULT_MAX, res)
    }

    pub fn with_bounds(fixed: (Axis4, f64), min: f64, max: f64, res: u32) -> Result<Self> {
        let free = Axis4::complement(&[fixed.0]);
        let spec = Self {
            fixed,
            axes: [
                AxisRange::new(free[0], min, max, res),
                AxisRange::new(free[1], min, max, res),
                AxisRange::new(free[2], min, max, res),
            ],
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        check_distinct(&[self.fixed.0, self.axes[0].axis, self.axes[1].axis, self.axes[2].axis])?;
        check_fixed(self.fixed.0, self.fixed.1)?;
        self.axes.iter().try_for_each(AxisRange::validate)
    }

    pub fn dims(&self) -> [u32; 3] {
        [self.axes[0].res, self.axes[1].res, self.axes[2].res]
    }

    pub fn voxel_count(&self) -> u64 {
        self.dims().iter().map(|&d| u64::from(d)).product()
    }

    /// The 2D slice through plane `k` of the z axis.
    pub fn plane_spec(&self, k: u32) -> SliceSpec {
        let z = self.axes[2];
        SliceSpec {
            fixed: [self.fixed, (z.axis, z.center(k))],
            x: self.axes[0],
            y: self.axes[1],
        }
    }

    pub fn free_position(&self, axis: Axis4) -> Option<usize> {
        self.axes.iter().position(|r| r.axis == axis)
    }

    fn max_radius_bound(&self) -> f64 {
        let mut max_abs = [0.0; 4];
        max_abs[self.fixed.0.index()] = self.fixed.1.abs();
        for r in &self.axes {
            max_abs[r.axis.index()] = r.max_abs();
        }
        max_radius_bound(max_abs)
    }
}

/// Dense class volume, x-fastest: voxel `(i, j, k)` lives at
/// `i + nx * (j + ny * k)`, all indices counted from the range minimum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassVolume {
    pub spec: VolumeSpec,
    pub voxels: Vec<ConnectivityClass>,
    pub config: IterationConfig,
    pub low_confidence_count: u64,
}

impl ClassVolume {
    #[inline]
    pub fn index(&self, i: u32, j: u32, k: u32) -> usize {
        let [nx, ny, _] = self.spec.dims();
        i as usize + nx as usize * (j as usize + ny as usize * k as usize)
    }

    pub fn get(&self, i: u32, j: u32, k: u32) -> ConnectivityClass {
        self.voxels[self.index(i, j, k)]
    }

    pub fn count(&self, class: ConnectivityClass) -> usize {
        self.voxels.iter().filter(|&&c| c == class).count()
    }

    pub fn codes(&self) -> Vec<u8> {
        self.voxels.iter().map(|c| c.code()).collect()
    }

    /// Plane `k` as a class map oriented like [`ClassGrid2D`].
    pub fn plane(&self, k: u32) -> ClassGrid2D {
        let [nx, ny, _] = self.spec.dims();
        let mut cells = Vec::with_capacity(nx as usize * ny as usize);
        for row in 0..ny {
            let j = ny - 1 - row;
            cells.extend((0..nx).map(|i| self.get(i, j, k)));
        }
        ClassGrid2D {
            spec: self.spec.plane_spec(k),
            cells,
            config: self.config,
            low_confidence_count: 0,
        }
    }
}

/// Cells hit by at least one voxel of the target class along the projection
/// axis. Oriented like [`ClassGrid2D`]: top row at the y maximum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProjectionMask {
    pub x: AxisRange,
    pub y: AxisRange,
    pub along: Axis4,
    pub target: ConnectivityClass,
    pub set: Vec<bool>,
}

impl ProjectionMask {
    pub fn width(&self) -> u32 {
        self.x.res
    }

    pub fn height(&self) -> u32 {
        self.y.res
    }

    pub fn pixel(&self, col: u32, row: u32) -> bool {
        self.set[row as usize * self.width() as usize + col as usize]
    }

    pub fn at(&self, xi: u32, yi: u32) -> bool {
        self.pixel(xi, self.height() - 1 - yi)
    }

    pub fn count_set(&self) -> usize {
        self.set.iter().filter(|&&b| b).count()
    }
}

/// Sampling driver: thread policy, voxel cap and an optional cancel flag.
#[derive(Debug, Clone)]
pub struct Sampler {
    pub parallelism: Parallelism,
    pub voxel_limit: u64,
    pub cancel: Option<CancelToken>,
}

impl Default for Sampler {
    fn default() -> Self {
        Self {
            parallelism: Parallelism::default(),
            voxel_limit: DEFAULT_VOXEL_LIMIT,
            cancel: None,
        }
    }
}

impl Sampler {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn serial() -> Self {
        Self::new().parallelism(Parallelism::Serial)
    }

    pub fn parallelism(mut self, parallelism: Parallelism) -> Self {
        self.parallelism = parallelism;
        self
    }

    pub fn voxel_limit(mut self, limit: u64) -> Self {
        self.voxel_limit = limit;
        self
    }

    pub fn cancel_token(mut self, token: CancelToken) -> Self {
        self.cancel = Some(token);
        self
    }

    fn check_cancel(&self) -> Result<()> {
        match &self.cancel {
            Some(token) if token.is_cancelled() => Err(Error::Cancelled),
            _ => Ok(()),
        }
    }

    /// Classifies one storage row of a slice; returns its low-confidence count.
    fn fill_slice_row(
        &self,
        spec: &SliceSpec,
        config: &IterationConfig,
        row: u32,
        out: &mut [ConnectivityClass],
    ) -> Result<u64> {
        self.check_cancel()?;
        let yi = spec.y.res - 1 - row;
        let mut flagged = 0;
        for (xi, cell) in out.iter_mut().enumerate() {
            let result = classify(&spec.params_at(xi as u32, yi), config);
            flagged += u64::from(result.low_confidence);
            *cell = result.class;
        }
        Ok(flagged)
    }

    pub fn slice2d(&self, spec: &SliceSpec, config: &IterationConfig) -> Result<ClassGrid2D> {
        spec.validate()?;
        config.validate()?;
        config.check_override_for_bound(spec.max_radius_bound())?;

        let width = spec.x.res as usize;
        let mut cells = vec![ConnectivityClass::TotallyDisconnected; width * spec.y.res as usize];
        let low_confidence_count = parallel::map_chunks(self.parallelism, &mut cells, width, |row, out| {
            self.fill_slice_row(spec, config, row as u32, out)
        })?;

        Ok(ClassGrid2D {
            spec: *spec,
            cells,
            config: *config,
            low_confidence_count,
        })
    }

    /// Classifies plane `k` of a volume (x-fastest within the plane).
    fn fill_volume_plane(
        &self,
        spec: &VolumeSpec,
        config: &IterationConfig,
        k: u32,
        out: &mut [ConnectivityClass],
    ) -> Result<u64> {
        self.check_cancel()?;
        let plane = spec.plane_spec(k);
        let nx = spec.axes[0].res as usize;
        let mut flagged = 0;
        for (idx, cell) in out.iter_mut().enumerate() {
            let (i, j) = ((idx % nx) as u32, (idx / nx) as u32);
            let result = classify(&plane.params_at(i, j), config);
            flagged += u64::from(result.low_confidence);
            *cell = result.class;
        }
        Ok(flagged)
    }

    pub fn volume3d(&self, spec: &VolumeSpec, config: &IterationConfig) -> Result<ClassVolume> {
        spec.validate()?;
        config.validate()?;
        let requested = spec.voxel_count();
        if requested > self.voxel_limit {
            return Err(Error::VoxelLimit {
                requested,
                limit: self.voxel_limit,
            });
        }
        config.check_override_for_bound(spec.max_radius_bound())?;

        let plane_len = spec.axes[0].res as usize * spec.axes[1].res as usize;
        let mut voxels = vec![ConnectivityClass::TotallyDisconnected; requested as usize];
        let low_confidence_count = parallel::map_chunks(self.parallelism, &mut voxels, plane_len, |k, out| {
            self.fill_volume_plane(spec, config, k as u32, out)
        })?;

        Ok(ClassVolume {
            spec: *spec,
            voxels,
            config: *config,
            low_confidence_count,
        })
    }
}

pub fn sample_slice2d(spec: &SliceSpec, config: &IterationConfig) -> Result<ClassGrid2D> {
    Sampler::default().slice2d(spec, config)
}

pub fn sample_volume3d(spec: &VolumeSpec, config: &IterationConfig) -> Result<ClassVolume> {
    Sampler::default().volume3d(spec, config)
}

/// Projects the voxels of class `target` along one free axis. The two
/// remaining free axes keep their declared order as (x, y).
pub fn project_volume(vol: &ClassVolume, axis: Axis4, target: ConnectivityClass) -> Result<ProjectionMask> {
    let along = vol.spec.free_position(axis).ok_or(Error::NotFreeAxis(axis))?;
    let kept: Vec<usize> = (0..3).filter(|&p| p != along).collect();
    let (x, y) = (vol.spec.axes[kept[0]], vol.spec.axes[kept[1]]);
    let depth = vol.spec.axes[along].res;

    let mut set = vec![false; x.res as usize * y.res as usize];
    for row in 0..y.res {
        let yi = y.res - 1 - row;
        for xi in 0..x.res {
            let hit = (0..depth).any(|d| {
                let mut ijk = [0u32; 3];
                ijk[kept[0]] = xi;
                ijk[kept[1]] = yi;
                ijk[along] = d;
                vol.get(ijk[0], ijk[1], ijk[2]) == target
            });
            set[row as usize * x.res as usize + xi as usize] = hit;
        }
    }

    Ok(ProjectionMask {
        x,
        y,
        along: axis,
        target,
        set,
    })
}
