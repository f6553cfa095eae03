//! Nodal analysis with exact transmission-line stamps.

use num_complex::Complex64;
use std::collections::HashMap;
use std::f64::consts::PI;

use super::netlist::{ElementKind, Netlist};
use crate::error::{Error, Result};
use crate::linalg::{CMatrix, Lu};
use crate::tline::{Response, ZERO_TOL};

/// Systems whose 1-norm condition number exceeds this are reported singular.
pub const MAX_CONDITION: f64 = 1e12;

/// Relative KCL residual accepted from a solve.
pub const KCL_TOLERANCE: f64 = 1e-10;

/// Below this Re Y (siemens) the environment is treated as lossless.
pub const RE_Y_FLOOR: f64 = 1e-15;

const J: Complex64 = Complex64::new(0.0, 1.0);
const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Node voltages for a 1 V ideal source at one port.
#[derive(Debug, Clone)]
pub struct AcSolution {
    pub frequency: f64,
    pub nodes: Vec<String>,
    pub node_voltages: Vec<Complex64>,
    /// Current delivered by the source into the network.
    pub source_current: Complex64,
    /// Relative KCL residual over the non-source nodes.
    pub kcl_residual: f64,
}

impl AcSolution {
    pub fn voltage(&self, node: &str) -> Result<Complex64> {
        self.nodes
            .iter()
            .position(|n| n == node)
            .map(|i| self.node_voltages[i])
            .ok_or_else(|| Error::UnknownNode(node.to_string()))
    }
}

/// Validated netlist with resolved node indices, reusable across frequencies.
#[derive(Debug, Clone)]
pub struct Compiled<'a> {
    netlist: &'a Netlist,
    index: HashMap<&'a str, usize>,
    stamps: Vec<(Option<usize>, Option<usize>, &'a ElementKind)>,
}

impl<'a> Compiled<'a> {
    pub fn new(netlist: &'a Netlist) -> Result<Self> {
        netlist.validate()?;
        let index = netlist.node_index();
        let stamps = netlist
            .elements
            .iter()
            .map(|e| {
                (
                    index.get(e.nodes[0].as_str()).copied(),
                    index.get(e.nodes[1].as_str()).copied(),
                    &e.kind,
                )
            })
            .collect();
        Ok(Self { netlist, index, stamps })
    }

    pub fn netlist(&self) -> &Netlist {
        self.netlist
    }

    pub fn dim(&self) -> usize {
        self.netlist.nodes.len()
    }

    pub fn node(&self, name: &str) -> Result<usize> {
        self.index.get(name).copied().ok_or_else(|| Error::UnknownNode(name.to_string()))
    }

    pub fn port_node(&self, port: &str) -> Result<usize> {
        let p = self.netlist.find_port(port)?;
        self.node(&p.node)
    }

    pub fn admittance(&self, f: f64) -> Result<CMatrix> {
        Ok(self.stamped(f)?.0)
    }

    /// Nodal matrix together with the 1-norm of the entrywise sum of
    /// stamp magnitudes, the scale against which cancellation is judged.
    fn stamped(&self, f: f64) -> Result<(CMatrix, f64)> {
        if !(f > 0.0 && f.is_finite()) {
            return Err(Error::Domain(format!("frequency must be > 0, got {f}")));
        }
        let omega = 2.0 * PI * f;
        let mut y = CMatrix::zeros(self.dim());
        let mut mag = vec![0.0; self.dim()];
        for &(a, b, kind) in &self.stamps {
            let (self_y, mutual_y) = match *kind {
                ElementKind::Resistor { value } => {
                    let g = Complex64::new(1.0 / value, 0.0);
                    (g, -g)
                }
                ElementKind::Capacitor { value } => {
                    let g = J * omega * value;
                    (g, -g)
                }
                ElementKind::Inductor { value } => {
                    let g = 1.0 / (J * omega * value);
                    (g, -g)
                }
                ElementKind::Tline { z0, v_phase, length } => {
                    let (s, c) = (omega / v_phase * length).sin_cos();
                    if s.abs() < ZERO_TOL {
                        return Err(Error::Singular { frequency: f, condition: f64::INFINITY });
                    }
                    (-J * c / (s * z0), J / (z0 * s))
                }
            };
            let weight = self_y.norm() + mutual_y.norm();
            if let Some(i) = a {
                y[(i, i)] += self_y;
                mag[i] += weight;
            }
            if let Some(j) = b {
                y[(j, j)] += self_y;
                mag[j] += weight;
            }
            if let (Some(i), Some(j)) = (a, b) {
                y[(i, j)] += mutual_y;
                y[(j, i)] += mutual_y;
            }
        }
        Ok((y, mag.into_iter().fold(0.0, f64::max)))
    }

    fn singular(f: f64, condition: f64) -> Error {
        Error::Singular { frequency: f, condition }
    }

    /// Factorises `a` and rejects it when `scale·‖a⁻¹‖₁` exceeds
    /// [`MAX_CONDITION`]; `scale` bounds the 1-norm of `a` before any
    /// cancellation between stamps, so undamped resonances are caught even
    /// when the cancelled matrix itself looks well conditioned.
    fn factor_checked(a: &CMatrix, scale: f64, f: f64) -> Result<(Lu, CMatrix)> {
        let lu = Lu::factor(a).ok_or_else(|| Self::singular(f, f64::INFINITY))?;
        let inv = lu.inverse();
        let cond = scale.max(a.norm_1()) * inv.norm_1();
        if !(cond <= MAX_CONDITION) {
            return Err(Self::singular(f, cond));
        }
        Ok((lu, inv))
    }

    fn solve_checked(a: &CMatrix, b: &[Complex64], scale: f64, f: f64) -> Result<Vec<Complex64>> {
        let (lu, _) = Self::factor_checked(a, scale, f)?;
        let mut x = lu.solve(b);
        let ax = a.mul_vec(&x);
        let r: Vec<Complex64> = b.iter().zip(&ax).map(|(bi, ai)| bi - ai).collect();
        let dx = lu.solve(&r);
        x.iter_mut().zip(&dx).for_each(|(xi, di)| *xi += di);
        Ok(x)
    }

    pub fn solve_ac(&self, drive_port: &str, f: f64) -> Result<AcSolution> {
        let d = self.port_node(drive_port)?;
        let (y, scale) = self.stamped(f)?;
        let n = self.dim();
        let rest: Vec<usize> = (0..n).filter(|&i| i != d).collect();
        let y_rr = y.principal(&rest);
        let rhs: Vec<Complex64> = rest.iter().map(|&i| -y[(i, d)]).collect();
        let v_r =
            if rest.is_empty() { Vec::new() } else { Self::solve_checked(&y_rr, &rhs, scale, f)? };
        let mut v = vec![ZERO; n];
        v[d] = ONE;
        for (k, &i) in rest.iter().enumerate() {
            v[i] = v_r[k];
        }
        let current = y.mul_vec(&v);
        let scale = rest
            .iter()
            .map(|&i| (0..n).map(|j| (y[(i, j)] * v[j]).norm()).sum::<f64>())
            .fold(0.0, f64::max);
        let residual = rest.iter().map(|&i| current[i].norm()).fold(0.0, f64::max);
        let kcl_residual = if scale > 0.0 { residual / scale } else { 0.0 };
        if kcl_residual > KCL_TOLERANCE {
            return Err(Self::singular(f, f64::INFINITY));
        }
        Ok(AcSolution {
            frequency: f,
            nodes: self.netlist.nodes.clone(),
            node_voltages: v,
            source_current: current[d],
            kcl_residual,
        })
    }

    /// Node voltages for a unit current injected at `node`, everything else open.
    pub fn unit_injection(&self, node: usize, f: f64) -> Result<Vec<Complex64>> {
        let (y, scale) = self.stamped(f)?;
        let mut e = vec![ZERO; self.dim()];
        e[node] = ONE;
        Self::solve_checked(&y, &e, scale, f)
    }

    pub fn transfer_impedance(&self, v_port: &str, i_port: &str, f: f64) -> Result<Response> {
        let vi = self.port_node(v_port)?;
        let ii = self.port_node(i_port)?;
        match self.unit_injection(ii, f) {
            Ok(v) => Ok(Response::Finite(v[vi])),
            Err(Error::Singular { .. }) => Ok(Response::Pole),
            Err(e) => Err(e),
        }
    }

    /// Open-circuit port impedance matrix, taken from the inverse of the
    /// full nodal matrix.
    pub fn impedance_matrix(&self, f: f64) -> Result<CMatrix> {
        let (y, scale) = self.stamped(f)?;
        let (_, inv) = Self::factor_checked(&y, scale, f)?;
        let idx =
            self.netlist.ports.iter().map(|p| self.node(&p.node)).collect::<Result<Vec<_>>>()?;
        Ok(inv.principal(&idx))
    }

    pub fn driving_point_admittance(&self, port: &str, f: f64) -> Result<Complex64> {
        Ok(self.solve_ac(port, f)?.source_current)
    }

    pub fn re_y_via_output_power(&self, source_port: &str, out_port: &str, f: f64) -> Result<f64> {
        if !self.netlist.is_port_terminated(out_port)? {
            return Err(Error::Precondition(format!(
                "output port `{out_port}` is not terminated in its reference impedance"
            )));
        }
        let out = self.netlist.find_port(out_port)?;
        let sol = self.solve_ac(source_port, f)?;
        let v_out = sol.voltage(&out.node)?;
        Ok(v_out.norm_sqr() / out.z_ref)
    }

    /// Scattering matrix in port declaration order, referenced to each
    /// port's own `z_ref`.
    pub fn s_parameters(&self, f: f64) -> Result<CMatrix> {
        let ports = &self.netlist.ports;
        if ports.is_empty() {
            return Err(Error::Netlist("no ports declared".into()));
        }
        let (mut y, mut scale) = self.stamped(f)?;
        let idx = ports.iter().map(|p| self.node(&p.node)).collect::<Result<Vec<_>>>()?;
        for (p, &i) in ports.iter().zip(&idx) {
            y[(i, i)] += 1.0 / p.z_ref;
            scale += 1.0 / p.z_ref;
        }
        let (lu, _) = Self::factor_checked(&y, scale, f)?;
        let m = ports.len();
        let mut s = CMatrix::zeros(m);
        let mut e = vec![ZERO; self.dim()];
        for (col, &j) in idx.iter().enumerate() {
            e.iter_mut().for_each(|x| *x = ZERO);
            e[j] = ONE;
            let v = lu.solve(&e);
            for (row, &i) in idx.iter().enumerate() {
                let norm = (ports[row].z_ref * ports[col].z_ref).sqrt();
                s[(row, col)] = 2.0 * v[i] / norm - if row == col { ONE } else { ZERO };
            }
        }
        Ok(s)
    }
}

pub fn assemble_admittance(netlist: &Netlist, f: f64) -> Result<CMatrix> {
    Compiled::new(netlist)?.admittance(f)
}

pub fn solve_ac(netlist: &Netlist, drive_port: &str, f: f64) -> Result<AcSolution> {
    Compiled::new(netlist)?.solve_ac(drive_port, f)
}

/// `V(v_port)` per unit current into `i_port` with all other ports open;
/// network poles come back as [`Response::Pole`].
pub fn transfer_impedance(
    netlist: &Netlist,
    v_port: &str,
    i_port: &str,
    f: f64,
) -> Result<Response> {
    Compiled::new(netlist)?.transfer_impedance(v_port, i_port, f)
}

pub fn impedance_matrix(netlist: &Netlist, f: f64) -> Result<CMatrix> {
    Compiled::new(netlist)?.impedance_matrix(f)
}

/// Admittance seen by an ideal source at `port`.
pub fn driving_point_admittance(netlist: &Netlist, port: &str, f: f64) -> Result<Complex64> {
    Compiled::new(netlist)?.driving_point_admittance(port, f)
}

/// `|V_out/V_src|² / Z_0`, the real source admittance inferred from the
/// power reaching a matched output.
///
/// Only the power leaving through `out_port` is counted, so the result
/// agrees with `Re Y` from [`driving_point_admittance`] when every other
/// dissipative path is negligible, e.g. an input coupling capacitor much
/// smaller than the output one (`C_out ≥ 20 C_in`).
pub fn re_y_via_output_power(
    netlist: &Netlist,
    source_port: &str,
    out_port: &str,
    f: f64,
) -> Result<f64> {
    Compiled::new(netlist)?.re_y_via_output_power(source_port, out_port, f)
}

pub fn s_parameters(netlist: &Netlist, f: f64) -> Result<CMatrix> {
    Compiled::new(netlist)?.s_parameters(f)
}
