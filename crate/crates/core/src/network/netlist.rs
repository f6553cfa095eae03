use serde::{Deserialize, Serialize};
use std::collections::{HashMap, HashSet};
use std::path::Path;

use crate::error::{Error, Result};
use crate::tline::LineSpec;

fn default_ground() -> String {
    "gnd".to_string()
}

/// The physical content of a two-terminal element.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ElementKind {
    Resistor {
        value: f64,
    },
    Capacitor {
        value: f64,
    },
    Inductor {
        value: f64,
    },
    /// A lossless line whose two conductors are `nodes[0]`/ground and
    /// `nodes[1]`/ground.
    Tline {
        z0: f64,
        v_phase: f64,
        length: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Element {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub nodes: [String; 2],
    #[serde(flatten)]
    pub kind: ElementKind,
}

impl Element {
    pub fn label(&self) -> String {
        self.name
            .clone()
            .unwrap_or_else(|| format!("{:?}({}-{})", self.kind, self.nodes[0], self.nodes[1]))
    }

    pub fn line_spec(&self) -> Option<LineSpec> {
        match self.kind {
            ElementKind::Tline { z0, v_phase, length } => Some(LineSpec { z0, v_phase, length }),
            _ => None,
        }
    }

    fn validate(&self) -> Result<()> {
        let positive = |what: &str, x: f64| {
            if x > 0.0 && x.is_finite() {
                Ok(())
            } else {
                Err(Error::Netlist(format!(
                    "{}: {what} must be positive and finite, got {x}",
                    self.label()
                )))
            }
        };
        match self.kind {
            ElementKind::Resistor { value } => positive("resistance", value),
            ElementKind::Capacitor { value } => positive("capacitance", value),
            ElementKind::Inductor { value } => positive("inductance", value),
            ElementKind::Tline { z0, v_phase, length } => {
                positive("z0", z0)?;
                positive("v_phase", v_phase)?;
                positive("length", length)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Port {
    pub name: String,
    pub node: String,
    pub z_ref: f64,
}

/// Node/element graph with declared ports.
///
/// ```json
/// {
///   "ground": "gnd",
///   "nodes": ["a", "b"],
///   "elements": [
///     {"kind": "resistor", "nodes": ["a", "b"], "value": 50.0},
///     {"kind": "tline", "nodes": ["b", "gnd"], "z0": 50.0, "v_phase": 1.19e8, "length": 0.006}
///   ],
///   "ports": [{"name": "1", "node": "a", "z_ref": 50.0}]
/// }
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Netlist {
    #[serde(default = "default_ground")]
    pub ground: String,
    pub nodes: Vec<String>,
    pub elements: Vec<Element>,
    #[serde(default)]
    pub ports: Vec<Port>,
}

impl Default for Netlist {
    fn default() -> Self {
        Self::new()
    }
}

impl Netlist {
    pub fn new() -> Self {
        Self {
            ground: default_ground(),
            nodes: Vec::new(),
            elements: Vec::new(),
            ports: Vec::new(),
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let n: Netlist = serde_json::from_str(text)?;
        n.validate()?;
        Ok(n)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("netlist serialisation cannot fail")
    }

    /// Declares `name` unless it is ground or already present.
    pub fn node(&mut self, name: &str) -> &mut Self {
        if name != self.ground && !self.nodes.iter().any(|n| n == name) {
            self.nodes.push(name.to_string());
        }
        self
    }

    pub fn element(&mut self, name: &str, a: &str, b: &str, kind: ElementKind) -> &mut Self {
        self.node(a).node(b);
        self.elements.push(Element {
            name: (!name.is_empty()).then(|| name.to_string()),
            nodes: [a.to_string(), b.to_string()],
            kind,
        });
        self
    }

    pub fn resistor(&mut self, name: &str, a: &str, b: &str, ohms: f64) -> &mut Self {
        self.element(name, a, b, ElementKind::Resistor { value: ohms })
    }

    pub fn capacitor(&mut self, name: &str, a: &str, b: &str, farads: f64) -> &mut Self {
        self.element(name, a, b, ElementKind::Capacitor { value: farads })
    }

    pub fn inductor(&mut self, name: &str, a: &str, b: &str, henries: f64) -> &mut Self {
        self.element(name, a, b, ElementKind::Inductor { value: henries })
    }

    pub fn tline(&mut self, name: &str, a: &str, b: &str, line: LineSpec) -> &mut Self {
        self.element(
            name,
            a,
            b,
            ElementKind::Tline { z0: line.z0, v_phase: line.v_phase, length: line.length },
        )
    }

    pub fn port(&mut self, name: &str, node: &str, z_ref: f64) -> &mut Self {
        self.node(node);
        self.ports.push(Port { name: name.to_string(), node: node.to_string(), z_ref });
        self
    }

    pub fn find_port(&self, name: &str) -> Result<&Port> {
        self.ports
            .iter()
            .find(|p| p.name == name)
            .ok_or_else(|| Error::UnknownPort(name.to_string()))
    }

    /// Copy with a resistor of each named port's reference impedance from
    /// the port node to ground.
    pub fn with_port_terminations(&self, ports: &[&str]) -> Result<Netlist> {
        let mut out = self.clone();
        let ground = self.ground.clone();
        for name in ports {
            let p = self.find_port(name)?.clone();
            out.resistor(&format!("R_term_{}", p.name), &p.node, &ground, p.z_ref);
        }
        Ok(out)
    }

    /// Whether a resistor equal to the port's reference impedance ties the
    /// port node to ground.
    pub fn is_port_terminated(&self, name: &str) -> Result<bool> {
        let p = self.find_port(name)?;
        Ok(self.elements.iter().any(|e| match e.kind {
            ElementKind::Resistor { value } => {
                let [a, b] = &e.nodes;
                let spans =
                    (a == &p.node && b == &self.ground) || (b == &p.node && a == &self.ground);
                spans && (value - p.z_ref).abs() <= 1e-9 * p.z_ref
            }
            _ => false,
        }))
    }

    pub fn validate(&self) -> Result<()> {
        if self.ground.is_empty() {
            return Err(Error::Netlist("ground node name is empty".into()));
        }
        let mut declared = HashSet::new();
        for n in &self.nodes {
            if n == &self.ground {
                return Err(Error::Netlist(format!("ground `{n}` must not be listed among nodes")));
            }
            if !declared.insert(n.as_str()) {
                return Err(Error::Netlist(format!("node `{n}` declared twice")));
            }
        }
        let known = |n: &str| n == self.ground || declared.contains(n);
        let mut touches_ground = false;
        for e in &self.elements {
            e.validate()?;
            for n in &e.nodes {
                if !known(n) {
                    return Err(Error::UnknownNode(n.clone()));
                }
            }
            if e.nodes[0] == e.nodes[1] {
                return Err(Error::Netlist(format!(
                    "{} connects node `{}` to itself",
                    e.label(),
                    e.nodes[0]
                )));
            }
            touches_ground |= e.nodes.iter().any(|n| n == &self.ground)
                || matches!(e.kind, ElementKind::Tline { .. });
        }
        if !self.elements.is_empty() && !touches_ground {
            return Err(Error::Netlist("no element references ground".into()));
        }
        let mut names = HashSet::new();
        for p in &self.ports {
            if !names.insert(p.name.as_str()) {
                return Err(Error::Netlist(format!("port `{}` declared twice", p.name)));
            }
            if p.node == self.ground {
                return Err(Error::Netlist(format!("port `{}` sits on ground", p.name)));
            }
            if !declared.contains(p.node.as_str()) {
                return Err(Error::UnknownNode(p.node.clone()));
            }
            if !(p.z_ref > 0.0 && p.z_ref.is_finite()) {
                return Err(Error::Netlist(format!(
                    "port `{}` reference impedance must be > 0",
                    p.name
                )));
            }
        }
        Ok(())
    }

    /// Map from non-ground node name to its matrix row.
    pub fn node_index(&self) -> HashMap<&str, usize> {
        self.nodes.iter().enumerate().map(|(i, n)| (n.as_str(), i)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_round_trip() {
        let mut n = Netlist::new();
        n.resistor("R1", "a", "b", 50.0)
            .capacitor("", "b", "gnd", 1e-12)
            .tline("T", "a", "c", LineSpec::new(50.0, 1.19e8, 0.01).unwrap())
            .port("1", "a", 50.0);
        let text = n.to_json();
        let back = Netlist::from_json(&text).unwrap();
        assert_eq!(back, n);
        assert!(text.contains("\"kind\": \"tline\""));
    }

    #[test]
    fn parses_documented_schema() {
        let text = r#"{
          "nodes": ["a", "b"],
          "elements": [
            {"kind": "resistor", "nodes": ["a", "b"], "value": 50.0},
            {"kind": "tline", "nodes": ["b", "gnd"], "z0": 50.0, "v_phase": 1.19e8, "length": 0.006}
          ],
          "ports": [{"name": "1", "node": "a", "z_ref": 50.0}]
        }"#;
        let n = Netlist::from_json(text).unwrap();
        assert_eq!(n.ground, "gnd");
        assert_eq!(n.elements.len(), 2);
    }

    #[test]
    fn rejects_malformed() {
        let mut n = Netlist::new();
        n.resistor("R", "a", "gnd", -1.0);
        assert!(matches!(n.validate(), Err(Error::Netlist(_))));

        let mut n = Netlist::new();
        n.resistor("R", "a", "gnd", 1.0);
        n.elements[0].nodes[1] = "nowhere".into();
        assert!(matches!(n.validate(), Err(Error::UnknownNode(_))));

        let mut n = Netlist::new();
        n.resistor("R", "a", "gnd", 1.0).port("1", "a", 50.0).port("1", "a", 50.0);
        assert!(n.validate().is_err());

        let mut n = Netlist::new();
        n.resistor("R", "a", "b", 1.0);
        assert!(n.validate().is_err(), "floating netlist without ground");

        let mut n = Netlist::new();
        n.resistor("R", "a", "gnd", 1.0);
        n.ports.push(Port { name: "x".into(), node: "gnd".into(), z_ref: 50.0 });
        assert!(n.validate().is_err());
    }

    #[test]
    fn termination_detection() {
        let mut n = Netlist::new();
        n.capacitor("C", "a", "b", 1e-15)
            .resistor("", "b", "gnd", 75.0)
            .port("1", "a", 50.0)
            .port("2", "b", 50.0);
        assert!(!n.is_port_terminated("2").unwrap());
        let t = n.with_port_terminations(&["2"]).unwrap();
        assert!(t.is_port_terminated("2").unwrap());
        assert!(!t.is_port_terminated("1").unwrap());
        assert!(matches!(n.with_port_terminations(&["9"]), Err(Error::UnknownPort(_))));
    }
}
