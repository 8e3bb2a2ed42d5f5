//! Linear three-phase netlists, modified nodal analysis over rational
//! functions of p, and the Clarke reduction to a 2×2 αβ model.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use crate::models::{CircuitParams, RealMimo2};
use crate::poly::Poly;
use crate::ratfun::RatFun;
use crate::{Error, Result};

const SQRT3: f64 = 1.732_050_807_568_877_2;

/// Amplitude-invariant Clarke transform, abc → αβ (β along b − c).
pub const CLARKE_K: [[f64; 3]; 2] = [
    [2.0 / 3.0, -1.0 / 3.0, -1.0 / 3.0],
    [0.0, SQRT3 / 3.0, -SQRT3 / 3.0],
];

/// Right inverse of [`CLARKE_K`], αβ → abc with no zero sequence.
pub const CLARKE_K_PINV: [[f64; 2]; 3] = [[1.0, 0.0], [-0.5, SQRT3 / 2.0], [-0.5, -SQRT3 / 2.0]];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ElementKind {
    R,
    L,
    C,
    V,
}

#[derive(Clone, Debug, PartialEq)]
pub enum ElementValue {
    Real(f64),
    Label(String),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Element {
    pub name: String,
    pub kind: ElementKind,
    pub node_plus: String,
    pub node_minus: String,
    pub value: ElementValue,
}

#[derive(Clone, Debug, PartialEq, Default)]
pub struct Netlist {
    pub elements: Vec<Element>,
    pub inputs: Vec<String>,
    pub outputs: Vec<String>,
    pub ground: Option<String>,
}

/// Phase-domain transfer matrix; `m[i][j]` maps source `j` to output `i`.
pub type TfMatrix3 = [[RatFun; 3]; 3];

fn netlist_err(msg: String, line: usize) -> Error {
    Error::InvalidNetlist(format!("{msg} at line {line}"))
}

/// Parses the line-oriented netlist format.
///
/// ```text
/// # comment
/// Va a 0 va          # V sources carry a label
/// La a la 3e-3
/// .inputs va vb vc
/// .outputs la lb lc
/// .ground 0
/// ```
pub fn parse_netlist(text: &str) -> Result<Netlist> {
    let mut net = Netlist::default();
    let mut last_line = 0;
    let mut seen_inputs = false;
    let mut seen_outputs = false;
    for (idx, raw) in text.lines().enumerate() {
        let lineno = idx + 1;
        last_line = lineno;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if let Some(directive) = fields[0].strip_prefix('.') {
            let args: Vec<String> = fields[1..].iter().map(|s| s.to_lowercase()).collect();
            match directive.to_lowercase().as_str() {
                "inputs" | "outputs" => {
                    if args.is_empty() {
                        return Err(netlist_err(
                            format!("directive .{directive} needs at least one argument"),
                            lineno,
                        ));
                    }
                    if directive.eq_ignore_ascii_case("inputs") {
                        net.inputs = args;
                        seen_inputs = true;
                    } else {
                        net.outputs = args;
                        seen_outputs = true;
                    }
                }
                "ground" => {
                    if args.len() != 1 {
                        return Err(netlist_err(
                            format!("directive .ground expects 1 argument, got {}", args.len()),
                            lineno,
                        ));
                    }
                    net.ground = Some(args[0].clone());
                }
                _ => {
                    return Err(netlist_err(
                        format!("unknown directive '.{directive}'"),
                        lineno,
                    ));
                }
            }
            continue;
        }
        let name = fields[0];
        let kind = match name.chars().next().map(|c| c.to_ascii_uppercase()) {
            Some('R') => ElementKind::R,
            Some('L') => ElementKind::L,
            Some('C') => ElementKind::C,
            Some('V') => ElementKind::V,
            _ => {
                let k: String = name.chars().take(1).collect();
                return Err(netlist_err(format!("unknown element kind '{k}'"), lineno));
            }
        };
        if fields.len() != 4 {
            return Err(netlist_err(
                format!("element {name} expects 4 fields, got {}", fields.len()),
                lineno,
            ));
        }
        if net
            .elements
            .iter()
            .any(|e| e.name.eq_ignore_ascii_case(name))
        {
            return Err(netlist_err(
                format!("duplicate element name '{name}'"),
                lineno,
            ));
        }
        let value = if kind == ElementKind::V {
            ElementValue::Label(fields[3].to_lowercase())
        } else {
            let v: f64 = fields[3].parse().map_err(|_| {
                netlist_err(format!("bad value '{}' for {name}", fields[3]), lineno)
            })?;
            if !v.is_finite() || v < 0.0 || (kind == ElementKind::R && v == 0.0) {
                return Err(netlist_err(
                    format!("value {v} out of range for {name}"),
                    lineno,
                ));
            }
            ElementValue::Real(v)
        };
        net.elements.push(Element {
            name: name.to_string(),
            kind,
            node_plus: fields[1].to_lowercase(),
            node_minus: fields[2].to_lowercase(),
            value,
        });
    }
    if !seen_inputs {
        return Err(netlist_err(
            "missing directive .inputs".to_string(),
            last_line,
        ));
    }
    if !seen_outputs {
        return Err(netlist_err(
            "missing directive .outputs".to_string(),
            last_line,
        ));
    }
    Ok(net)
}

impl Netlist {
    /// Wye sources, one series inductor per phase and wye load resistors
    /// joined at a floating neutral. Phase b carries `lu`.
    pub fn three_phase_rl(params: &CircuitParams, balanced: bool) -> Netlist {
        let lb = if balanced { params.l } else { params.lu };
        Self::three_phase_rl_with([params.l, lb, params.l], params.r)
    }

    pub fn three_phase_rl_with(l: [f64; 3], r: f64) -> Netlist {
        let mut elements = Vec::new();
        for (i, ph) in ["a", "b", "c"].iter().enumerate() {
            elements.push(Element {
                name: format!("V{ph}"),
                kind: ElementKind::V,
                node_plus: ph.to_string(),
                node_minus: "0".to_string(),
                value: ElementValue::Label(format!("v{ph}")),
            });
            elements.push(Element {
                name: format!("L{ph}"),
                kind: ElementKind::L,
                node_plus: ph.to_string(),
                node_minus: format!("l{ph}"),
                value: ElementValue::Real(l[i]),
            });
            elements.push(Element {
                name: format!("R{ph}"),
                kind: ElementKind::R,
                node_plus: format!("l{ph}"),
                node_minus: "n".to_string(),
                value: ElementValue::Real(r),
            });
        }
        Netlist {
            elements,
            inputs: vec!["va".into(), "vb".into(), "vc".into()],
            outputs: vec!["la".into(), "lb".into(), "lc".into()],
            ground: Some("0".into()),
        }
    }

    /// Serializes in the format accepted by [`parse_netlist`].
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for e in &self.elements {
            let v = match &e.value {
                ElementValue::Real(x) => format!("{x:e}"),
                ElementValue::Label(l) => l.clone(),
            };
            s.push_str(&format!(
                "{} {} {} {}\n",
                e.name, e.node_plus, e.node_minus, v
            ));
        }
        s.push_str(&format!(".inputs {}\n", self.inputs.join(" ")));
        s.push_str(&format!(".outputs {}\n", self.outputs.join(" ")));
        if let Some(g) = &self.ground {
            s.push_str(&format!(".ground {g}\n"));
        }
        s
    }

    fn ground_name(&self) -> &str {
        self.ground.as_deref().unwrap_or("0")
    }
}

/// Index bookkeeping for the MNA unknown vector: non-ground node voltages
/// first, then branch currents of sources and zero-valued inductors.
struct Layout {
    nodes: Vec<String>,
    branches: Vec<usize>,
}

impl Layout {
    fn node(&self, name: &str) -> Option<usize> {
        self.nodes.iter().position(|n| n == name)
    }
}

/// Transfer matrix from every listed input to every listed output.
pub fn mna_solve(net: &Netlist) -> Result<Vec<Vec<RatFun>>> {
    let ground = net.ground_name().to_string();
    if !net
        .elements
        .iter()
        .any(|e| e.node_plus == ground || e.node_minus == ground)
    {
        return Err(Error::InvalidNetlist(format!(
            "ground node '{ground}' is not connected to any element"
        )));
    }
    let mut nodes: Vec<String> = Vec::new();
    for e in &net.elements {
        for n in [&e.node_plus, &e.node_minus] {
            if *n != ground && !nodes.contains(n) {
                nodes.push(n.clone());
            }
        }
    }
    let branches: Vec<usize> = net
        .elements
        .iter()
        .enumerate()
        .filter(|(_, e)| match (e.kind, &e.value) {
            (ElementKind::V, _) => true,
            (ElementKind::L, ElementValue::Real(v)) => *v == 0.0,
            _ => false,
        })
        .map(|(i, _)| i)
        .collect();
    let layout = Layout { nodes, branches };
    let n = layout.nodes.len() + layout.branches.len();

    let mut input_cols = Vec::new();
    for label in &net.inputs {
        let idx = net.elements.iter().position(|e| {
            e.kind == ElementKind::V
                && (e.value == ElementValue::Label(label.clone())
                    || e.name.eq_ignore_ascii_case(label))
        });
        match idx {
            Some(i) => input_cols.push(i),
            None => {
                return Err(Error::InvalidNetlist(format!(
                    "input '{label}' does not name a voltage source"
                )))
            }
        }
    }
    let mut output_rows = Vec::new();
    for o in &net.outputs {
        if *o == ground {
            output_rows.push(None);
            continue;
        }
        match layout.node(o) {
            Some(i) => output_rows.push(Some(i)),
            None => {
                return Err(Error::InvalidNetlist(format!(
                    "output node '{o}' does not exist"
                )))
            }
        }
    }

    let mut a = vec![vec![RatFun::zero(); n]; n];
    let mut b = vec![vec![RatFun::zero(); input_cols.len()]; n];
    let stamp = |a: &mut Vec<Vec<RatFun>>, e: &Element, y: &RatFun| {
        let i = layout.node(&e.node_plus);
        let j = layout.node(&e.node_minus);
        if let Some(i) = i {
            a[i][i] = &a[i][i] + y;
        }
        if let Some(j) = j {
            a[j][j] = &a[j][j] + y;
        }
        if let (Some(i), Some(j)) = (i, j) {
            a[i][j] = &a[i][j] - y;
            a[j][i] = &a[j][i] - y;
        }
    };
    for (ei, e) in net.elements.iter().enumerate() {
        if let Some(k) = layout.branches.iter().position(|&x| x == ei) {
            let row = layout.nodes.len() + k;
            if let Some(i) = layout.node(&e.node_plus) {
                a[i][row] = &a[i][row] + &RatFun::one();
                a[row][i] = &a[row][i] + &RatFun::one();
            }
            if let Some(j) = layout.node(&e.node_minus) {
                a[j][row] = &a[j][row] - &RatFun::one();
                a[row][j] = &a[row][j] - &RatFun::one();
            }
            for (c, &src) in input_cols.iter().enumerate() {
                if src == ei {
                    b[row][c] = RatFun::one();
                }
            }
            continue;
        }
        let y = match (e.kind, &e.value) {
            (ElementKind::R, ElementValue::Real(r)) => RatFun::constant(1.0 / r),
            (ElementKind::L, ElementValue::Real(l)) => {
                RatFun::new(Poly::one(), Poly::monomial(*l, 1)).expect("nonzero inductance")
            }
            (ElementKind::C, ElementValue::Real(c)) => RatFun::from_poly(Poly::monomial(*c, 1)),
            _ => {
                return Err(Error::InvalidNetlist(format!(
                    "element {} has no numeric value",
                    e.name
                )))
            }
        };
        stamp(&mut a, e, &y);
    }

    let x = gauss_solve(a, b)?;
    Ok(output_rows
        .iter()
        .map(|r| match r {
            Some(i) => x[*i].clone(),
            None => vec![RatFun::zero(); input_cols.len()],
        })
        .collect())
}

fn total_degree(r: &RatFun) -> usize {
    r.num().degree().unwrap_or(0) + r.den().degree().unwrap_or(0)
}

/// Solves `a·x = b` over rational functions by Gaussian elimination with
/// row pivoting on the nonzero entry of lowest total degree.
fn gauss_solve(mut a: Vec<Vec<RatFun>>, mut b: Vec<Vec<RatFun>>) -> Result<Vec<Vec<RatFun>>> {
    let n = a.len();
    for k in 0..n {
        let pivot = (k..n)
            .filter(|&i| !a[i][k].is_zero())
            .min_by_key(|&i| total_degree(&a[i][k]))
            .ok_or_else(|| Error::Singular {
                step: k,
                detail: format!("no nonzero pivot in column {k}"),
            })?;
        a.swap(k, pivot);
        b.swap(k, pivot);
        let inv = a[k][k].inv()?;
        for i in k + 1..n {
            if a[i][k].is_zero() {
                continue;
            }
            let f = &a[i][k] * &inv;
            for j in k..n {
                if !a[k][j].is_zero() {
                    a[i][j] = &a[i][j] - &(&f * &a[k][j]);
                }
            }
            for j in 0..b[i].len() {
                if !b[k][j].is_zero() {
                    b[i][j] = &b[i][j] - &(&f * &b[k][j]);
                }
            }
        }
    }
    let m = b.first().map_or(0, |r| r.len());
    let mut x = vec![vec![RatFun::zero(); m]; n];
    for k in (0..n).rev() {
        let inv = a[k][k].inv()?;
        for j in 0..m {
            let mut acc = b[k][j].clone();
            for i in k + 1..n {
                if !a[k][i].is_zero() && !x[i][j].is_zero() {
                    acc = &acc - &(&a[k][i] * &x[i][j]);
                }
            }
            x[k][j] = &acc * &inv;
        }
    }
    Ok(x)
}

/// Three inputs to three outputs.
pub fn mna_transfer(net: &Netlist) -> Result<TfMatrix3> {
    if net.inputs.len() != 3 || net.outputs.len() != 3 {
        return Err(Error::InvalidNetlist(format!(
            "three-phase extraction needs 3 inputs and 3 outputs, got {} and {}",
            net.inputs.len(),
            net.outputs.len()
        )));
    }
    let x = mna_solve(net)?;
    let row = |i: usize| [x[i][0].clone(), x[i][1].clone(), x[i][2].clone()];
    Ok([row(0), row(1), row(2)])
}

/// `K · m3 · K⁺`, dropping the zero sequence.
pub fn clarke_project(m3: &TfMatrix3) -> RealMimo2 {
    let entry = |r: usize, c: usize| {
        let mut acc = RatFun::zero();
        for (i, row) in m3.iter().enumerate() {
            for (j, m) in row.iter().enumerate() {
                let w = CLARKE_K[r][i] * CLARKE_K_PINV[j][c];
                if w != 0.0 && !m.is_zero() {
                    acc = &acc + &m.scale(w);
                }
            }
        }
        acc
    };
    RealMimo2::new(entry(0, 0), entry(0, 1), entry(1, 0), entry(1, 1))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::build_rl_model;

    #[test]
    fn parses_single_resistor() {
        let n = parse_netlist("R1 n1 0 22.0\n.inputs v\n.outputs n1\n").unwrap();
        assert_eq!(n.elements.len(), 1);
        assert_eq!(n.elements[0].kind, ElementKind::R);
        assert_eq!(n.elements[0].value, ElementValue::Real(22.0));
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let e = parse_netlist("X1 n1 n2 5").unwrap_err();
        assert_eq!(
            e,
            Error::InvalidNetlist("unknown element kind 'X' at line 1".into())
        );
        let e = parse_netlist("# c\nR1 a 0\n").unwrap_err().to_string();
        assert!(e.contains("line 2"), "{e}");
        let e = parse_netlist("R1 a 0 1\nr1 b 0 1\n")
            .unwrap_err()
            .to_string();
        assert!(e.contains("duplicate") && e.contains("line 2"), "{e}");
        let e = parse_netlist("R1 a 0 1\n.outputs a\n")
            .unwrap_err()
            .to_string();
        assert!(e.contains(".inputs"), "{e}");
    }

    #[test]
    fn example_netlist_round_trips() {
        let net = Netlist::three_phase_rl(&CircuitParams::example(), false);
        assert_eq!(net.elements.len(), 9);
        let back = parse_netlist(&net.to_text()).unwrap();
        assert_eq!(back, net);
        assert_eq!(back.inputs.len(), 3);
        assert_eq!(back.outputs.len(), 3);
    }

    #[test]
    fn clarke_identities() {
        for r in 0..2 {
            for c in 0..2 {
                let s: f64 = (0..3).map(|i| CLARKE_K[r][i] * CLARKE_K_PINV[i][c]).sum();
                let want = if r == c { 1.0 } else { 0.0 };
                assert!((s - want).abs() < 1e-15);
            }
            let z: f64 = CLARKE_K[r].iter().sum();
            assert!(z.abs() < 1e-15);
        }
        let id: TfMatrix3 = core::array::from_fn(|i| {
            core::array::from_fn(|j| {
                if i == j {
                    RatFun::one()
                } else {
                    RatFun::zero()
                }
            })
        });
        assert!(clarke_project(&id).coeff_rel_error(&RealMimo2::identity()) < 1e-15);
    }

    #[test]
    fn mna_reproduces_closed_form() {
        let p = CircuitParams::example();
        for balanced in [true, false] {
            let net = Netlist::three_phase_rl(&p, balanced);
            let m = clarke_project(&mna_transfer(&net).unwrap());
            let want = build_rl_model(&p, balanced);
            let err = m.coeff_rel_error(&want);
            assert!(err < 1e-8, "balanced={balanced} err={err:e}");
        }
    }

    #[test]
    fn zero_inductance_passes_inputs_through() {
        let net = Netlist::three_phase_rl_with([0.0; 3], 22.0);
        let m = clarke_project(&mna_transfer(&net).unwrap());
        assert!(m.coeff_rel_error(&RealMimo2::identity()) < 1e-12);
    }

    #[test]
    fn floating_subcircuit_is_singular() {
        let text = "V1 a 0 v\nR1 a 0 1\nR2 x y 1\n.inputs v\n.outputs a\n";
        let net = parse_netlist(text).unwrap();
        assert!(matches!(mna_solve(&net), Err(Error::Singular { .. })));
    }

    #[test]
    fn source_loop_is_singular() {
        let text = "V1 a 0 v\nV2 a 0 w\nR1 a 0 1\n.inputs v w\n.outputs a\n";
        let net = parse_netlist(text).unwrap();
        assert!(matches!(mna_solve(&net), Err(Error::Singular { .. })));
    }

    #[test]
    fn rc_divider() {
        let text = "V1 in 0 v\nR1 in out 1000\nC1 out 0 1e-6\n.inputs v\n.outputs out\n";
        let x = mna_solve(&parse_netlist(text).unwrap()).unwrap();
        let want = RatFun::new(Poly::constant(1.0), Poly::linear(1.0, 1e-3)).unwrap();
        assert!(x[0][0].coeff_rel_error(&want) < 1e-12);
    }
}
