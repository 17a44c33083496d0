use bvlab_web::{band_heatmap_native, burgers_profile_native, trace_explorer_native};

#[test]
fn burgers_profile_tracks_the_entropy_solution() {
    let out = burgers_profile_native(200, 0.0, 0.5).unwrap();
    assert_eq!(out.len(), 600);
    let (u, exact) = (&out[200..400], &out[400..]);
    let l1: f64 = u.iter().zip(exact).map(|(a, b)| (a - b).abs()).sum::<f64>() / 200.0;
    assert!(l1 < 0.02, "{l1}");
    let viscous = burgers_profile_native(200, 0.05, 0.5).unwrap();
    let l1v: f64 = viscous[200..400].iter().zip(exact).map(|(a, b)| (a - b).abs()).sum::<f64>() / 200.0;
    assert!(l1v > l1);
}

#[test]
fn band_heatmap_has_the_grid_shape() {
    let out = band_heatmap_native(16, 0.2).unwrap();
    assert_eq!((out[0], out[1]), (16.0, 32.0));
    assert_eq!(out.len(), 2 + 16 * 32);
    assert!(out[2..].iter().all(|v| v.abs() <= 1.0 + 1e-12));
}

#[test]
fn trace_explorer_balances_the_trace_formula() {
    let out = trace_explorer_native(64, 1.2, 1.0, 0.25).unwrap();
    let (volume, variation, boundary) = (out[0], out[1], out[2]);
    assert!((volume - variation - boundary).abs() < 1e-3);
    assert_eq!(out.len(), 3 + 2 * 128);
    assert!(out[3..].iter().all(|&v| (0.25..=1.0).contains(&v)));
}

#[test]
fn bad_input_is_an_error() {
    assert!(burgers_profile_native(50, 0.0, -1.0).is_err());
}
