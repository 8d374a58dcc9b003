//! Escape-time rendering of filled alternated Julia sets in the z0-plane.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dynamics::{alternated_step, IterationConfig, MapParams};
use crate::error::{Error, Result};
use crate::parallel::{self, CancelToken, Parallelism};

/// Rectangular window in the z0-plane. Pixel (0, 0) is the top-left corner;
/// x grows with Re(z0) and y grows downward as Im(z0) decreases.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Viewport {
    pub center: Complex64,
    /// Half of the horizontal extent. The vertical extent follows from the
    /// pixel aspect ratio.
    pub half_width: f64,
    pub width_px: u32,
    pub height_px: u32,
}

impl Viewport {
    pub fn square(center: Complex64, half_width: f64, res: u32) -> Self {
        Self {
            center,
            half_width,
            width_px: res,
            height_px: res,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !self.center.is_finite() {
            return Err(Error::InvalidViewport("center must be finite".into()));
        }
        if !(self.half_width > 0.0 && self.half_width.is_finite()) {
            return Err(Error::InvalidViewport(format!(
                "half_width must be positive and finite, got {}",
                self.half_width
            )));
        }
        if self.width_px == 0 || self.height_px == 0 {
            return Err(Error::InvalidViewport("pixel dimensions must be positive".into()));
        }
        Ok(())
    }

    pub fn half_height(&self) -> f64 {
        self.half_width * self.height_px as f64 / self.width_px as f64
    }

    #[inline]
    fn pixel_size(&self) -> f64 {
        2.0 * self.half_width / self.width_px as f64
    }

    /// Coordinate of the pixel center. Offsets are taken from the window
    /// center so pixels mirrored through it land on exactly negated offsets.
    #[inline]
    pub fn pixel_center(&self, x: u32, y: u32) -> Complex64 {
        let step = self.pixel_size();
        let dx = (x as f64 + 0.5 - self.width_px as f64 / 2.0) * step;
        let dy = (y as f64 + 0.5 - self.height_px as f64 / 2.0) * step;
        Complex64::new(self.center.re + dx, self.center.im - dy)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Membership {
    /// `|z_k|` exceeded the escape radius at alternated step `k`.
    Escaped(u32),
    Interior,
}

impl Membership {
    pub const INTERIOR_U16: u16 = 0xFFFF;

    pub fn is_interior(self) -> bool {
        self == Membership::Interior
    }

    /// 16-bit encoding: the escape step clamped to `0xFFFE`, interior as `0xFFFF`.
    pub fn to_u16(self) -> u16 {
        match self {
            Membership::Escaped(k) => k.min(0xFFFE) as u16,
            Membership::Interior => Self::INTERIOR_U16,
        }
    }
}

/// Follows the alternated orbit of `z0` (c1 applied first) for up to
/// `2 * max_quartic_iters` steps.
pub fn membership(z0: Complex64, params: &MapParams, config: &IterationConfig) -> Membership {
    let radius = config.radius_for(params);
    let radius_sq = radius * radius;
    let steps = 2 * u64::from(config.max_quartic_iters);

    let mut z = z0;
    for n in 0..=steps {
        if !z.is_finite() || z.norm_sqr() > radius_sq {
            return Membership::Escaped(n as u32);
        }
        if n < steps {
            z = alternated_step(z, params, n);
        }
    }
    Membership::Interior
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EscapeGrid {
    pub width_px: u32,
    pub height_px: u32,
    /// Row-major, top row first.
    pub cells: Vec<Membership>,
    pub params: MapParams,
    pub config: IterationConfig,
}

impl EscapeGrid {
    pub fn get(&self, x: u32, y: u32) -> Membership {
        self.cells[(y as usize) * self.width_px as usize + x as usize]
    }

    pub fn interior_count(&self) -> usize {
        self.cells.iter().filter(|m| m.is_interior()).count()
    }

    pub fn interior_fraction(&self) -> f64 {
        self.interior_count() as f64 / self.cells.len() as f64
    }

    /// The grid rotated by 180 degrees.
    pub fn rotated_half_turn(&self) -> EscapeGrid {
        let mut cells = self.cells.clone();
        cells.reverse();
        EscapeGrid { cells, ..self.clone() }
    }
}

pub fn render_filled_julia(params: &MapParams, viewport: &Viewport, config: &IterationConfig) -> Result<EscapeGrid> {
    render_filled_julia_with(params, viewport, config, Parallelism::default(), None)
}

pub fn render_filled_julia_with(
    params: &MapParams,
    viewport: &Viewport,
    config: &IterationConfig,
    parallelism: Parallelism,
    cancel: Option<&CancelToken>,
) -> Result<EscapeGrid> {
    viewport.validate()?;
    config.validate()?;
    config.check_override(params)?;

    let width = viewport.width_px as usize;
    let mut cells = vec![Membership::Interior; width * viewport.height_px as usize];
    parallel::map_chunks(parallelism, &mut cells, width, |y, row| {
        if cancel.is_some_and(CancelToken::is_cancelled) {
            return Err(Error::Cancelled);
        }
        for (x, cell) in row.iter_mut().enumerate() {
            *cell = membership(viewport.pixel_center(x as u32, y as u32), params, config);
        }
        Ok(0)
    })?;

    Ok(EscapeGrid {
        width_px: viewport.width_px,
        height_px: viewport.height_px,
        cells,
        params: *params,
        config: *config,
    })
}
