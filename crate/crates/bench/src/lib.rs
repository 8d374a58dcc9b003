//! Shared fixtures for the criterion benchmarks.

use altjulia_core::{Axis4, Complex64, MapParams, SliceSpec, Viewport};

/// Parameter pairs covering each class plus a slow-converging orbit.
pub fn sample_params() -> Vec<(&'static str, MapParams)> {
    vec![
        ("origin", MapParams::from_parts(0.0, 0.0, 0.0, 0.0)),
        ("mixed", MapParams::from_parts(-0.8, 0.2, -0.4, 0.0)),
        ("far_field", MapParams::from_parts(12.0, 0.0, -3.0, 4.0)),
        ("period4", MapParams::from_parts(-0.1562, 1.032, -0.1562, 1.032)),
    ]
}

/// The `re1 = 0, im1 = -1.05` slice over the default window.
pub fn slice_spec(res: u32) -> SliceSpec {
    SliceSpec::new([(Axis4::Re1, 0.0), (Axis4::Im1, -1.05)], res).expect("valid slice")
}

pub fn julia_viewport(res: u32) -> Viewport {
    Viewport::square(Complex64::new(0.0, 0.0), 2.0, res)
}
