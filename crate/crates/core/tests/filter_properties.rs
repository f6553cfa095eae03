use proptest::prelude::*;
use purcell_core::filter::*;
use purcell_core::network::{transfer_impedance, Compiled, FrequencySweep};
use purcell_core::tline::propagation_constant;

fn default_geom() -> FilterGeometry {
    FilterGeometry::preset("default").unwrap()
}

fn away_from_poles(g: &FilterGeometry, f: f64) -> bool {
    let beta = propagation_constant(f, g.line.v_phase).unwrap();
    (beta * g.total_length()).sin().abs() > 1e-3
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn closed_form_matches_solver(f in 1e9..8e9f64, wide in any::<bool>()) {
        let g = FilterGeometry::preset(if wide { "wide" } else { "default" }).unwrap();
        prop_assume!(away_from_poles(&g, f));
        let n = transfer_model_netlist(&g).unwrap();
        let solved = transfer_impedance(&n, PORT_QUBIT, PORT_OUT, f).unwrap().finite().unwrap();
        let closed = z23_closed_form(&g, f).unwrap().finite().unwrap();
        let scale = closed.norm().max(1e-6 * g.line.z0);
        prop_assert!((solved - closed).norm() / scale < 1e-9, "{f}: {solved} vs {closed}");
    }

    #[test]
    fn tp_scales_with_frequency(s in 0.5..2.0f64, f in 3e9..7e9f64) {
        let g = default_geom();
        let h = g.scaled(s);
        let grid = FrequencySweep::linear(f, f, 1).unwrap();
        let grid_s = FrequencySweep::linear(s * f, s * f, 1).unwrap();
        let a = tp_curve(&g, Variant::WithStub, &grid, ReYMethod::FullAdmittance).unwrap();
        let b = tp_curve(&h, Variant::WithStub, &grid_s, ReYMethod::FullAdmittance).unwrap();
        if let (Some(ta), Some(tb)) = (a.tp[0].as_seconds(), b.tp[0].as_seconds()) {
            prop_assert!((tb * s / ta - 1.0).abs() < 1e-6, "{ta} vs {tb}");
        }
    }
}

#[test]
fn every_notch_is_a_zero() {
    for name in ["default", "wide"] {
        let g = FilterGeometry::preset(name).unwrap();
        let n = transfer_model_netlist(&g).unwrap();
        let notches = notch_frequencies(&g, 1e9, 8e9).unwrap();
        assert!(!notches.is_empty());
        for notch in notches {
            let z = transfer_impedance(&n, PORT_QUBIT, PORT_OUT, notch.frequency).unwrap();
            assert!(z.norm() < 1e-9 * g.line.z0, "{name} {notch:?}: {z:?}");
            assert!(z23_closed_form(&g, notch.frequency).unwrap().norm() < 1e-9 * g.line.z0);
        }
    }
}

#[test]
fn stub_protects_by_two_orders_at_the_notch() {
    let g = default_geom();
    let notch = notch_frequencies(&g, 4e9, 6e9).unwrap()[0].frequency;
    let at = |variant| {
        let n = tp_netlist(&g, variant).unwrap();
        let c = Compiled::new(&n).unwrap();
        tp_at(g.c_q, qubit_re_y(&c, ReYMethod::FullAdmittance, notch).unwrap())
    };
    let with = at(Variant::WithStub).as_seconds().unwrap_or(f64::INFINITY);
    let without = at(Variant::WithoutStub).as_seconds().unwrap();
    assert!(with / without >= 100.0, "{with} / {without}");
}

#[test]
fn both_re_y_methods_agree_off_notch() {
    let g = default_geom();
    let n = tp_netlist(&g, Variant::WithStub).unwrap();
    let c = Compiled::new(&n).unwrap();
    for f in [3.0e9, 4.0e9, 6.0e9, 7.5e9] {
        let a = qubit_re_y(&c, ReYMethod::FullAdmittance, f).unwrap();
        let b = qubit_re_y(&c, ReYMethod::OutputPower, f).unwrap();
        assert!(b <= a * (1.0 + 1e-9), "{f}: output {b} exceeds total {a}");
        assert!(b > 0.5 * a, "{f}: output {b} vs total {a}");
    }
}
