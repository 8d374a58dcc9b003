//! On-disk formats: binary PPM (P6) images and raw byte volumes with a JSON
//! sidecar.
//!
//! Every writer is deterministic: the same input always yields the same
//! bytes.

use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::dynamics::{ConnectivityClass, IterationConfig};
use crate::error::{Error, Result};
use crate::julia::{EscapeGrid, Membership};
use crate::sampler::{Axis4, AxisRange, ClassGrid2D, ClassVolume, ProjectionMask, VolumeSpec};

pub type Rgb = [u8; 3];

pub const SIDECAR_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Palette {
    pub connected: Rgb,
    pub disconnected: Rgb,
    /// White in flat images, where there is no transparency.
    pub totally_disconnected: Rgb,
}

impl Default for Palette {
    fn default() -> Self {
        Self {
            connected: [255, 0, 0],
            disconnected: [0, 0, 255],
            totally_disconnected: [255, 255, 255],
        }
    }
}

impl Palette {
    pub fn new(connected: Rgb, disconnected: Rgb, totally_disconnected: Rgb) -> Result<Self> {
        if connected == disconnected || connected == totally_disconnected || disconnected == totally_disconnected {
            return Err(Error::DegeneratePalette);
        }
        Ok(Self {
            connected,
            disconnected,
            totally_disconnected,
        })
    }

    #[inline]
    pub fn color(&self, class: ConnectivityClass) -> Rgb {
        match class {
            ConnectivityClass::Connected => self.connected,
            ConnectivityClass::Disconnected => self.disconnected,
            ConnectivityClass::TotallyDisconnected => self.totally_disconnected,
        }
    }
}

/// Escape-step coloring: linear from `low` at step 0 to `high` at
/// `saturation` steps and beyond.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Gradient {
    pub low: Rgb,
    pub high: Rgb,
    pub saturation: u32,
}

impl Default for Gradient {
    /// Grayscale, reaching white after 32 steps.
    fn default() -> Self {
        Self {
            low: [0, 0, 0],
            high: [255, 255, 255],
            saturation: 32,
        }
    }
}

impl Gradient {
    pub fn color(&self, step: u32) -> Rgb {
        let span = u64::from(self.saturation.max(1));
        let t = u64::from(step).min(span);
        let mut out = [0u8; 3];
        for ((o, &lo), &hi) in out.iter_mut().zip(&self.low).zip(&self.high) {
            let (lo, hi) = (i64::from(lo), i64::from(hi));
            // integer lerp keeps the output exact and monotone
            *o = (lo + (hi - lo) * t as i64 / span as i64).clamp(0, 255) as u8;
        }
        out
    }
}

fn ppm_header(width: u32, height: u32) -> Vec<u8> {
    format!("P6\n{width} {height}\n255\n").into_bytes()
}

fn ppm_from_pixels<I>(width: u32, height: u32, pixels: I) -> Vec<u8>
where
    I: IntoIterator<Item = Rgb>,
{
    let mut out = ppm_header(width, height);
    out.reserve(3 * width as usize * height as usize);
    for px in pixels {
        out.extend_from_slice(&px);
    }
    out
}

/// Class map as P6, top row first.
pub fn write_ppm(grid: &ClassGrid2D, palette: &Palette) -> Vec<u8> {
    ppm_from_pixels(
        grid.width(),
        grid.height(),
        grid.cells.iter().map(|&c| palette.color(c)),
    )
}

pub fn write_escape_ppm(grid: &EscapeGrid, interior: Rgb, gradient: &Gradient) -> Vec<u8> {
    ppm_from_pixels(
        grid.width_px,
        grid.height_px,
        grid.cells.iter().map(|m| match *m {
            Membership::Interior => interior,
            Membership::Escaped(k) => gradient.color(k),
        }),
    )
}

/// Set pixels in `on`, the rest in `off`.
pub fn write_mask_ppm(mask: &ProjectionMask, on: Rgb, off: Rgb) -> Vec<u8> {
    ppm_from_pixels(
        mask.width(),
        mask.height(),
        mask.set.iter().map(|&b| if b { on } else { off }),
    )
}

/// Decoded P6 image.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PpmImage {
    pub width: u32,
    pub height: u32,
    pub pixels: Vec<Rgb>,
}

impl PpmImage {
    pub fn pixel(&self, x: u32, y: u32) -> Rgb {
        self.pixels[y as usize * self.width as usize + x as usize]
    }
}

/// Parses a P6 image with maxval 255 (whitespace-separated header, no
/// comments), as produced by the writers above.
pub fn parse_ppm(bytes: &[u8]) -> std::result::Result<PpmImage, String> {
    let mut fields = Vec::with_capacity(4);
    let mut pos = 0;
    while fields.len() < 4 {
        while pos < bytes.len() && bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        let start = pos;
        while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if start == pos {
            return Err("truncated header".into());
        }
        fields.push(std::str::from_utf8(&bytes[start..pos]).map_err(|e| e.to_string())?);
    }
    // exactly one whitespace byte separates maxval from the raster
    pos += 1;
    if fields[0] != "P6" {
        return Err(format!("bad magic {:?}", fields[0]));
    }
    let parse = |s: &str| s.parse::<u32>().map_err(|e| format!("bad header field {s:?}: {e}"));
    let (width, height, maxval) = (parse(fields[1])?, parse(fields[2])?, parse(fields[3])?);
    if maxval != 255 {
        return Err(format!("unsupported maxval {maxval}"));
    }
    let expected = 3 * width as usize * height as usize;
    let raster = bytes.get(pos..).unwrap_or_default();
    if raster.len() != expected {
        return Err(format!("raster is {} bytes, expected {expected}", raster.len()));
    }
    Ok(PpmImage {
        width,
        height,
        pixels: raster.chunks_exact(3).map(|p| [p[0], p[1], p[2]]).collect(),
    })
}

/// Writes through a temporary file in the target directory and renames it
/// into place, so readers never observe a partial file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let io_err = |source| Error::Io {
        path: path.to_path_buf(),
        source,
    };
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io_err)?;
    tmp.write_all(bytes).map_err(io_err)?;
    tmp.as_file().sync_all().map_err(io_err)?;
    tmp.persist(path).map_err(|e| io_err(e.error))?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AxisBounds {
    pub min: f64,
    pub max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FixedCoordinate {
    pub axis: Axis4,
    pub value: f64,
}

/// JSON metadata stored next to a raw voxel payload.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VolumeSidecar {
    pub version: u32,
    /// Voxel counts along x, y, z; x varies fastest in the payload.
    pub dims: [u32; 3],
    pub axes: [Axis4; 3],
    pub bounds: [AxisBounds; 3],
    pub fixed: FixedCoordinate,
    pub config: IterationConfig,
    /// Voxel code legend.
    pub codes: std::collections::BTreeMap<String, u8>,
}

impl VolumeSidecar {
    pub fn for_volume(vol: &ClassVolume) -> Self {
        let spec = &vol.spec;
        Self {
            version: SIDECAR_VERSION,
            dims: spec.dims(),
            axes: spec.axes.map(|r| r.axis),
            bounds: spec.axes.map(|r| AxisBounds { min: r.min, max: r.max }),
            fixed: FixedCoordinate {
                axis: spec.fixed.0,
                value: spec.fixed.1,
            },
            config: vol.config,
            codes: ConnectivityClass::ALL
                .iter()
                .map(|c| (c.name().to_string(), c.code()))
                .collect(),
        }
    }

    pub fn spec(&self) -> std::result::Result<VolumeSpec, String> {
        let mut axes = [AxisRange::new(Axis4::Re1, 0.0, 0.0, 0); 3];
        for (n, range) in axes.iter_mut().enumerate() {
            *range = AxisRange::new(self.axes[n], self.bounds[n].min, self.bounds[n].max, self.dims[n]);
        }
        let spec = VolumeSpec {
            fixed: (self.fixed.axis, self.fixed.value),
            axes,
        };
        spec.validate().map_err(|e| e.to_string())?;
        Ok(spec)
    }
}

/// Paths of a written volume.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VolumeFilePair {
    pub raw: PathBuf,
    pub sidecar: PathBuf,
}

impl VolumeFilePair {
    pub fn for_base(base: &Path) -> Self {
        let with_ext = |ext: &str| {
            let mut s = base.as_os_str().to_owned();
            s.push(ext);
            PathBuf::from(s)
        };
        Self {
            raw: with_ext(".raw"),
            sidecar: with_ext(".json"),
        }
    }
}

/// Writes `<base>.raw` (one byte per voxel, x-fastest, no header) and
/// `<base>.json`.
pub fn write_raw_volume(vol: &ClassVolume, base: &Path) -> Result<VolumeFilePair> {
    let pair = VolumeFilePair::for_base(base);
    let sidecar = VolumeSidecar::for_volume(vol);
    let mut json = serde_json::to_vec_pretty(&sidecar).expect("sidecar serializes");
    json.push(b'\n');
    write_atomic(&pair.raw, &vol.codes())?;
    write_atomic(&pair.sidecar, &json)?;
    Ok(pair)
}

pub fn read_raw_volume(base: &Path) -> Result<ClassVolume> {
    let pair = VolumeFilePair::for_base(base);
    let read = |path: &PathBuf| {
        std::fs::read(path).map_err(|source| Error::Io {
            path: path.clone(),
            source,
        })
    };
    let bad = |message: String| Error::Sidecar {
        path: pair.sidecar.clone(),
        message,
    };

    let sidecar: VolumeSidecar = serde_json::from_slice(&read(&pair.sidecar)?).map_err(|e| bad(e.to_string()))?;
    if sidecar.version != SIDECAR_VERSION {
        return Err(bad(format!("unsupported version {}", sidecar.version)));
    }
    let spec = sidecar.spec().map_err(bad)?;
    let payload = read(&pair.raw)?;
    if payload.len() as u64 != spec.voxel_count() {
        return Err(bad(format!(
            "dims {:?} need {} voxels but {} holds {} bytes",
            sidecar.dims,
            spec.voxel_count(),
            pair.raw.display(),
            payload.len()
        )));
    }
    let voxels = payload
        .iter()
        .map(|&b| ConnectivityClass::from_code(b).ok_or_else(|| bad(format!("invalid voxel code {b}"))))
        .collect::<Result<Vec<_>>>()?;

    Ok(ClassVolume {
        spec,
        voxels,
        config: sidecar.config,
        low_confidence_count: 0,
    })
}
