//! Reference scenarios shared by `verify`, the shipped configs and the demo.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI, TAU};

use crate::geometry::{ChartGeometry, Profile, Weight};
use crate::problem::{AzimuthalProfile, FluxFamily, FluxShape, InitialProfile, Scenario, TimeProfile};

fn unit_interval() -> ChartGeometry {
    ChartGeometry::interval(Weight::Unit, 0.0, 1.0).expect("valid interval")
}

/// Colatitude band `pi/4 <= theta <= pi/2`.
pub fn quarter_band() -> ChartGeometry {
    ChartGeometry::band(FRAC_PI_4, FRAC_PI_2).expect("valid band")
}

/// Burgers on `(0, 1)` from `u0 = 1` on `(0, 1/2)`, `0` after; `T = 1`.
pub fn shock_exit(n: usize) -> Scenario {
    Scenario::new(
        unit_interval(),
        FluxFamily::transverse(FluxShape::Burgers, 1.0),
        InitialProfile::Step {
            at: 0.5,
            left: 1.0,
            right: 0.0,
        },
        1.0,
        vec![n],
    )
}

/// Burgers on `(0, 1)` from `u0 = -1`; `T = 1/2`.
pub fn boundary_rarefaction(n: usize) -> Scenario {
    Scenario::new(
        unit_interval(),
        FluxFamily::transverse(FluxShape::Burgers, 1.0),
        InitialProfile::Constant { value: -1.0 },
        0.5,
        vec![n],
    )
}

/// Linear transport of `sin(pi x)` on `(0, 1)`; `T = 1/2`.
pub fn smooth_linear(n: usize) -> Scenario {
    Scenario::new(
        unit_interval(),
        FluxFamily::transverse(FluxShape::Linear, 1.0),
        InitialProfile::Sine { k: 1.0, amplitude: 1.0 },
        0.5,
        vec![n],
    )
}

/// Linear transport on the weighted interval `w = 1 + x`.
pub fn weighted_linear(n: usize) -> Scenario {
    Scenario::new(
        ChartGeometry::interval(Weight::Linear { beta: 1.0 }, 0.0, 1.0).expect("valid interval"),
        FluxFamily::transverse(FluxShape::Linear, 1.0),
        InitialProfile::Bump {
            center: [0.35, 0.0],
            radius: 0.25,
            amplitude: 1.0,
        },
        0.5,
        vec![n],
    )
}

/// Burgers on the weighted interval `w = 1 + x`.
pub fn weighted_burgers(n: usize) -> Scenario {
    Scenario::new(
        ChartGeometry::interval(Weight::Linear { beta: 1.0 }, 0.0, 1.0).expect("valid interval"),
        FluxFamily::transverse(FluxShape::Burgers, 1.0),
        InitialProfile::Bump {
            center: [0.4, 0.0],
            radius: 0.25,
            amplitude: 1.0,
        },
        0.8,
        vec![n],
    )
}

/// Burgers on the quarter band with transverse and azimuthal transport.
pub fn band_burgers(n: usize, n_phi: usize) -> Scenario {
    Scenario::new(
        quarter_band(),
        FluxFamily::new(
            FluxShape::Burgers,
            TimeProfile::Const { value: 1.0 },
            AzimuthalProfile::Const { c0: 0.5 },
        ),
        InitialProfile::Bump {
            center: [1.1, PI],
            radius: 0.3,
            amplitude: 1.0,
        },
        0.5,
        vec![n, n_phi],
    )
}

/// Rigid rotation of an azimuthal mode on the quarter band over one period `2 pi`.
pub fn band_rotation(n: usize) -> Scenario {
    Scenario::new(
        quarter_band(),
        FluxFamily::rotation(FluxShape::Linear, 1.0),
        InitialProfile::Mode {
            k: 1.0,
            m: 1.0,
            amplitude: 1.0,
        },
        TAU,
        vec![n, 2 * n],
    )
}

/// Azimuthal shear `c(theta) = theta - 1` on the band `0.3 <= theta <= pi/2`.
pub fn band_shear(n: usize, n_phi: usize) -> Scenario {
    Scenario::new(
        ChartGeometry::band(0.3, FRAC_PI_2).expect("valid band"),
        FluxFamily::new(
            FluxShape::Linear,
            TimeProfile::Const { value: 0.0 },
            AzimuthalProfile::Linear { c0: -1.0, c1: 1.0 },
        ),
        InitialProfile::Bump {
            center: [0.95, PI],
            radius: 0.4,
            amplitude: 1.0,
        },
        1.0,
        vec![n, n_phi],
    )
}

/// Linear transport on the profile `r = 1 + 0.3 sin(pi s / 2)`, `0 <= s <= 2`,
/// with a time-periodic transverse rate and sheared rotation.
pub fn revolution_linear(n: usize, n_phi: usize) -> Scenario {
    Scenario::new(
        ChartGeometry::revolution(Profile::Sine { alpha: 0.3, length: 2.0 }, 0.0, 2.0).expect("valid surface"),
        FluxFamily::new(
            FluxShape::Linear,
            TimeProfile::Sine {
                amplitude: 1.0,
                period: 2.0,
            },
            AzimuthalProfile::Linear { c0: 0.2, c1: 0.5 },
        ),
        InitialProfile::Mode {
            k: 1.0,
            m: 1.0,
            amplitude: 1.0,
        },
        0.5,
        vec![n, n_phi],
    )
}

/// Flux families with their geometries, for divergence checks.
pub fn shipped_families() -> Vec<(ChartGeometry, FluxFamily)> {
    vec![
        (shock_exit(1).geometry, shock_exit(1).flux),
        (weighted_linear(1).geometry, weighted_linear(1).flux),
        (band_burgers(1, 1).geometry, band_burgers(1, 1).flux),
        (band_rotation(1).geometry, band_rotation(1).flux),
        (band_shear(1, 1).geometry, band_shear(1, 1).flux),
        (revolution_linear(1, 1).geometry, revolution_linear(1, 1).flux),
    ]
}
