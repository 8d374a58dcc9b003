//! PNG encoding for HTTP responses. Encoder settings are pinned (no
//! interlacing, fixed row filter, fixed deflate level) so equal pixels give
//! equal bytes.

use altjulia_core::{ClassGrid2D, ConnectivityClass, EscapeGrid, Gradient, Membership, Palette, Rgb};

pub type Rgba = [u8; 4];

/// Totally disconnected cells are fully transparent.
pub const TRANSPARENT: Rgba = [255, 255, 255, 0];

fn encode(width: u32, height: u32, color: png::ColorType, data: &[u8]) -> Vec<u8> {
    let mut out = Vec::new();
    {
        let mut encoder = png::Encoder::new(&mut out, width, height);
        encoder.set_color(color);
        encoder.set_depth(png::BitDepth::Eight);
        encoder.set_deflate_compression(png::DeflateCompression::Level(6));
        encoder.set_filter(png::Filter::Sub);
        let mut writer = encoder.write_header().expect("png header");
        writer.write_image_data(data).expect("png data");
    }
    out
}

pub fn class_rgba(palette: &Palette, class: ConnectivityClass) -> Rgba {
    match class {
        ConnectivityClass::TotallyDisconnected => TRANSPARENT,
        other => {
            let [r, g, b] = palette.color(other);
            [r, g, b, 255]
        }
    }
}

pub fn slice_png(grid: &ClassGrid2D, palette: &Palette) -> Vec<u8> {
    let data: Vec<u8> = grid.cells.iter().flat_map(|&c| class_rgba(palette, c)).collect();
    encode(grid.width(), grid.height(), png::ColorType::Rgba, &data)
}

pub fn julia_png(grid: &EscapeGrid, interior: Rgb, gradient: &Gradient) -> Vec<u8> {
    let data: Vec<u8> = grid
        .cells
        .iter()
        .flat_map(|m| match *m {
            Membership::Interior => interior,
            Membership::Escaped(k) => gradient.color(k),
        })
        .collect();
    encode(grid.width_px, grid.height_px, png::ColorType::Rgb, &data)
}

/// Decodes to (width, height, channels, pixels). Used by tests and tooling.
pub fn decode(bytes: &[u8]) -> Result<(u32, u32, usize, Vec<u8>), png::DecodingError> {
    let mut reader = png::Decoder::new(std::io::Cursor::new(bytes)).read_info()?;
    let mut buf = vec![0; reader.output_buffer_size().expect("image fits in memory")];
    let info = reader.next_frame(&mut buf)?;
    buf.truncate(info.buffer_size());
    Ok((info.width, info.height, info.color_type.samples(), buf))
}
