#![allow(dead_code)]

use num_complex::Complex64;
use purcell_core::linalg::Lu;
use purcell_core::network::{
    assemble_admittance, impedance_matrix, s_parameters, Compiled, Netlist,
};
use purcell_core::tline::{Abcd, LineSpec};
use purcell_core::Error;
use rand::Rng;

pub const V_PHASE: f64 = 1.2e8;

/// Random passive netlist on up to six nodes. Every node has a resistor
/// to ground so the nodal matrix stays regular away from line resonances.
pub fn random_netlist<R: Rng>(rng: &mut R) -> Netlist {
    let n_nodes = rng.random_range(2..=6);
    let names: Vec<String> = (0..n_nodes).map(|k| format!("n{k}")).collect();
    let mut n = Netlist::new();
    for (k, name) in names.iter().enumerate() {
        n.resistor(&format!("Rg{k}"), name, "gnd", 10f64.powf(rng.random_range(0.5..4.0)));
    }
    let n_elems = rng.random_range(1..=10);
    for k in 0..n_elems {
        let a = rng.random_range(0..n_nodes);
        let mut b = rng.random_range(0..=n_nodes);
        if b == a {
            b = n_nodes;
        }
        let bn = if b == n_nodes { "gnd".to_string() } else { names[b].clone() };
        let name = format!("X{k}");
        match rng.random_range(0..4) {
            0 => n.resistor(&name, &names[a], &bn, 10f64.powf(rng.random_range(0.0..4.0))),
            1 => n.capacitor(&name, &names[a], &bn, 10f64.powf(rng.random_range(-15.0..-11.0))),
            2 => n.inductor(&name, &names[a], &bn, 10f64.powf(rng.random_range(-10.0..-7.0))),
            _ => n.tline(
                &name,
                &names[a],
                &bn,
                LineSpec::new(rng.random_range(20.0..100.0), V_PHASE, rng.random_range(1e-3..3e-2))
                    .unwrap(),
            ),
        };
    }
    let n_ports = rng.random_range(1..=n_nodes.min(3));
    for (k, name) in names.iter().take(n_ports).enumerate() {
        n.port(&format!("P{k}"), name, 50.0);
    }
    n
}

pub struct NetworkCheck {
    pub reciprocity_z: f64,
    pub reciprocity_s: f64,
    pub min_re_y: f64,
}

/// Relative asymmetry of Z and S and the smallest driving-point
/// conductance; `None` at a singular frequency.
pub fn check_network(n: &Netlist, f: f64) -> Option<NetworkCheck> {
    let z = match impedance_matrix(n, f) {
        Ok(z) => z,
        Err(Error::Singular { .. }) => return None,
        Err(e) => panic!("{e}"),
    };
    let s = s_parameters(n, f).ok()?;
    let zmax = (0..z.dim())
        .flat_map(|i| (0..z.dim()).map(move |j| (i, j)))
        .map(|(i, j)| z[(i, j)].norm())
        .fold(0.0, f64::max);
    let compiled = Compiled::new(n).unwrap();
    let mut min_re_y = f64::INFINITY;
    for p in &n.ports {
        match compiled.driving_point_admittance(&p.name, f) {
            Ok(y) => min_re_y = min_re_y.min(y.re),
            Err(Error::Singular { .. }) => return None,
            Err(e) => panic!("{e}"),
        }
    }
    Some(NetworkCheck {
        reciprocity_z: z.max_abs_asymmetry() / zmax.max(f64::MIN_POSITIVE),
        reciprocity_s: s.max_abs_asymmetry(),
        min_re_y,
    })
}

/// Transfer impedance from node voltages vs the entry of the explicit
/// inverse of the nodal matrix; relative difference.
pub fn transfer_vs_inverse(n: &Netlist, f: f64) -> Option<f64> {
    let compiled = Compiled::new(n).unwrap();
    let y = assemble_admittance(n, f).ok()?;
    let inv = Lu::factor(&y)?.inverse();
    let mut worst: f64 = 0.0;
    for pv in &n.ports {
        for pi in &n.ports {
            let z = compiled.transfer_impedance(&pv.name, &pi.name, f).ok()?.finite()?;
            let want = inv[(compiled.node(&pv.node).ok()?, compiled.node(&pi.node).ok()?)];
            worst = worst.max((z - want).norm() / want.norm().max(f64::MIN_POSITIVE));
        }
    }
    Some(worst)
}

/// Symmetric π-section LC ladder standing in for `line` between `a` and `b`.
pub fn ladder(n: &mut Netlist, a: &str, b: &str, line: &LineSpec, sections: usize) {
    let delay = line.length / line.v_phase;
    let l_sec = line.z0 * delay / sections as f64;
    let c_sec = delay / line.z0 / sections as f64;
    let node = |k: usize| match k {
        0 => a.to_string(),
        k if k == sections => b.to_string(),
        k => format!("lad{k}"),
    };
    for k in 0..sections {
        n.inductor(&format!("Llad{k}"), &node(k), &node(k + 1), l_sec);
        n.capacitor(&format!("Clad{k}a"), &node(k), "gnd", c_sec / 2.0);
        n.capacitor(&format!("Clad{k}b"), &node(k + 1), "gnd", c_sec / 2.0);
    }
}

/// ABCD of `sections` π-sections approximating `line` at `f`.
pub fn ladder_abcd(line: &LineSpec, f: f64, sections: usize) -> Abcd {
    let w = 2.0 * std::f64::consts::PI * f;
    let delay = line.length / line.v_phase;
    let l_sec = line.z0 * delay / sections as f64;
    let c_sec = delay / line.z0 / sections as f64;
    let one = Complex64::new(1.0, 0.0);
    let zero = Complex64::new(0.0, 0.0);
    let shunt = Abcd { a: one, b: zero, c: Complex64::new(0.0, w * c_sec / 2.0), d: one };
    let series = Abcd { a: one, b: Complex64::new(0.0, w * l_sec), c: zero, d: one };
    let section = shunt.cascade(&series).cascade(&shunt);
    let mut total = Abcd::identity();
    for _ in 0..sections {
        total = total.cascade(&section);
    }
    total
}

/// Input impedance of `line` into a resistive load: exact stamp vs an
/// N-section ladder, relative difference.
pub fn ladder_vs_exact(line: &LineSpec, f: f64, load: f64, sections: usize) -> f64 {
    let mut exact = Netlist::new();
    exact.tline("T", "a", "b", *line).resistor("RL", "b", "gnd", load).port("P", "a", 50.0);
    let mut lad = Netlist::new();
    ladder(&mut lad, "a", "b", line, sections);
    lad.resistor("RL", "b", "gnd", load).port("P", "a", 50.0);
    let z_exact = impedance_matrix(&exact, f).unwrap()[(0, 0)];
    let z_lad = impedance_matrix(&lad, f).unwrap()[(0, 0)];
    (z_exact - z_lad).norm() / z_exact.norm()
}

/// Same comparison on the ABCD level: input impedance into `load`.
pub fn ladder_abcd_vs_exact(line: &LineSpec, f: f64, load: f64, sections: usize) -> f64 {
    let zin = |m: &Abcd| (m.a * load + m.b) / (m.c * load + m.d);
    let exact = purcell_core::tline::abcd_line(line, f);
    let lad = ladder_abcd(line, f, sections);
    (zin(&exact) - zin(&lad)).norm() / zin(&exact).norm()
}
