use proptest::prelude::*;

use bvlab::bv_trace::{extract_trace, TraceOperator};
use bvlab::entropy::{l1_contraction_check, solve_hyperbolic};
use bvlab::geometry::{ChartGeometry, Profile, Weight};
use bvlab::grid::StructuredGrid;
use bvlab::harness::parse_config;
use bvlab::problem::{mollify_initial, FluxFamily, FluxShape, InitialData, InitialProfile, MollifierSpec, Scenario};
use bvlab::scheme::godunov;

fn geometry() -> impl Strategy<Value = ChartGeometry> {
    prop_oneof![
        (0.0..2.0f64).prop_map(|beta| ChartGeometry::interval(Weight::Linear { beta }, 0.0, 1.0).unwrap()),
        (0.2..1.2f64, 0.3..1.5f64).prop_map(|(a, w)| ChartGeometry::band(a, (a + w).min(3.0)).unwrap()),
        (-0.5..0.5f64, 1.0..3.0f64)
            .prop_map(|(alpha, length)| ChartGeometry::revolution(Profile::Sine { alpha, length }, 0.0, length).unwrap()),
    ]
}

fn shape() -> impl Strategy<Value = FluxShape> {
    prop_oneof![Just(FluxShape::Linear), Just(FluxShape::Burgers)]
}

fn step_data() -> impl Strategy<Value = InitialProfile> {
    (0.1..0.9f64, -1.0..1.0f64, -1.0..1.0f64).prop_map(|(at, left, right)| InitialProfile::Step { at, left, right })
}

fn shock_interval(u0: InitialProfile, n: usize) -> Scenario {
    Scenario::new(
        ChartGeometry::interval(Weight::Unit, 0.0, 1.0).unwrap(),
        FluxFamily::transverse(FluxShape::Burgers, 1.0),
        u0,
        0.4,
        vec![n],
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn metric_is_positive_definite(geom in geometry(), s in 0.0..1.0f64, phi in 0.0..std::f64::consts::TAU) {
        let z = [geom.lo + s * (geom.hi - geom.lo), phi];
        let m = geom.metric_at(z).unwrap();
        prop_assert!(m.sqrt_det > 0.0);
        for i in 0..m.dim {
            prop_assert!(m.g[i][i] > 0.0);
            for j in 0..m.dim {
                let p: f64 = (0..m.dim).map(|k| m.g[i][k] * m.g_inv[k][j]).sum();
                let delta = if i == j { 1.0 } else { 0.0 };
                prop_assert!((p - delta).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn trace_is_bounded_by_the_field(values in prop::collection::vec(-3.0..3.0f64, 16 * 16)) {
        let g = StructuredGrid::build(ChartGeometry::band(0.5, 1.4).unwrap(), &[16, 16]).unwrap();
        let u = g.field(values).unwrap();
        let tr = extract_trace(&g, &u).unwrap();
        prop_assert!(tr.values.iter().all(|v| v.abs() <= u.linf()));
    }

    #[test]
    fn unclamped_trace_is_linear(
        a in prop::collection::vec(-1.0..1.0f64, 32),
        b in prop::collection::vec(-1.0..1.0f64, 32),
        alpha in -2.0..2.0f64,
    ) {
        let g = StructuredGrid::build(ChartGeometry::interval(Weight::Linear { beta: 0.5 }, 0.0, 1.0).unwrap(), &[32]).unwrap();
        let op = TraceOperator::new(&g).unwrap();
        let (u, v) = (g.field(a).unwrap(), g.field(b).unwrap());
        let w = u.axpby(alpha, &v, 1.0);
        let (tu, tv, tw) = (op.apply(&g, &u).unwrap(), op.apply(&g, &v).unwrap(), op.apply(&g, &w).unwrap());
        for k in 0..tw.raw.len() {
            prop_assert!((tw.raw[k] - alpha * tu.raw[k] - tv.raw[k]).abs() < 1e-12);
        }
    }

    #[test]
    fn godunov_is_monotone_and_consistent(
        sh in shape(), xi in -2.0..2.0f64, a in -2.0..2.0f64, b in -2.0..2.0f64, d in 0.0..1.0f64,
    ) {
        prop_assert!((godunov(sh, xi, a, a) - xi * sh.h(a)).abs() < 1e-14);
        prop_assert!(godunov(sh, xi, a + d, b) >= godunov(sh, xi, a, b) - 1e-14);
        prop_assert!(godunov(sh, xi, a, b + d) <= godunov(sh, xi, a, b) + 1e-14);
    }

    #[test]
    fn mollifier_respects_the_sup_norm(u0 in step_data(), eps in 0.005..0.1f64) {
        let g = StructuredGrid::build(ChartGeometry::interval(Weight::Unit, 0.0, 1.0).unwrap(), &[200]).unwrap();
        let raw = InitialData::Profile(u0).sample(&g).unwrap();
        let m = mollify_initial(&g, &raw, eps, &MollifierSpec::default()).unwrap();
        prop_assert!(m.linf() <= raw.linf());
    }

    #[test]
    fn hyperbolic_solver_keeps_the_maximum_principle(u0 in step_data()) {
        let sc = shock_interval(u0, 60);
        let bound = sc.initial.sample(&sc.build_grid().unwrap()).unwrap().linf();
        let run = solve_hyperbolic(&sc).unwrap();
        prop_assert!(run.series.iter().all(|r| r.linf <= bound + 1e-12));
        prop_assert!(run.entropy_cell_max <= 1e-12);
    }

    #[test]
    fn paired_runs_contract(a in step_data(), b in step_data()) {
        let sc = shock_interval(a, 60);
        let d = l1_contraction_check(&sc, &sc.initial, &InitialData::Profile(b)).unwrap();
        prop_assert!(d.windows(2).all(|w| w[1] <= w[0] + 1e-10));
    }

    #[test]
    fn config_parser_never_panics(text in "(\\[[a-z]{0,9}\\]\n|[a-z_]{1,8} = [-0-9a-z.,]{0,6}\n|# .{0,10}\n){0,12}") {
        let _ = parse_config(std::path::Path::new("fuzz.cfg"), &text);
    }
}
