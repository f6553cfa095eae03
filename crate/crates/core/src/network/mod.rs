//! Frequency-domain nodal analysis of lumped/distributed netlists.

mod analysis;
mod netlist;
mod sweep;
mod touchstone;

pub use analysis::{
    assemble_admittance, driving_point_admittance, impedance_matrix, re_y_via_output_power,
    s_parameters, solve_ac, transfer_impedance, AcSolution, Compiled, KCL_TOLERANCE, MAX_CONDITION,
    RE_Y_FLOOR,
};
pub use netlist::{Element, ElementKind, Netlist, Port};
pub use sweep::{sweep, FrequencySweep, Spacing};
pub use touchstone::{read_touchstone, write_s_csv, write_touchstone, SPoint, Touchstone};
