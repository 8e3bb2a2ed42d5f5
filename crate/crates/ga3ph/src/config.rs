//! Run configuration: a flat INI file with sections `circuit`, `source`,
//! `sim` and `controller`.
//!
//! ```text
//! # comment
//! [circuit]
//! L = 3e-3
//! Lu = 3e-2
//! R = 22
//! balanced = false
//!
//! [source]
//! V = 155
//! freq_hz = 60
//!
//! [sim]
//! Ts = 1e-4
//! duration = 0.1
//! substeps = 10
//! step_time = 0.05
//! step_channel = beta        # alpha | beta | none
//! step_magnitude = 15.5
//!
//! [controller]
//! type = decoupling          # identity | proportional | decoupling | custom
//! k = 10
//! e0 = (1 + p)/(2 + p)       # custom coefficients, missing ones are 0
//! ```
//!
//! Unknown sections or keys, duplicate keys and non-positive physical values
//! are rejected.

use std::fmt;
use std::str::FromStr;

use ga3ph_core::models::CircuitParams;
use ga3ph_core::sim::{Channel, DEFAULT_FREQ_HZ, DEFAULT_TS, DEFAULT_V};
use ga3ph_core::RatFun;

use crate::text::{parse_ratfun, ParseError};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ControllerKind {
    /// `C = e0`.
    Identity,
    /// `C = k(e0 + e1)`.
    Proportional,
    Decoupling,
    Custom,
}

impl FromStr for ControllerKind {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, ParseError> {
        Ok(match s {
            "identity" => ControllerKind::Identity,
            "proportional" => ControllerKind::Proportional,
            "decoupling" => ControllerKind::Decoupling,
            "custom" => ControllerKind::Custom,
            _ => {
                return Err(ParseError::new(format!(
                    "controller type '{s}' is not one of identity, proportional, decoupling, custom"
                )))
            }
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CircuitCfg {
    pub l: f64,
    pub lu: f64,
    pub r: f64,
    pub balanced: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SourceCfg {
    pub v: f64,
    pub freq_hz: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SimCfg {
    pub ts: f64,
    pub duration: f64,
    pub substeps: usize,
    pub step_time: f64,
    /// `None` disables the step.
    pub step_channel: Option<Channel>,
    /// Defaults to 0.1·V.
    pub step_magnitude: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ControllerCfg {
    pub kind: ControllerKind,
    pub k: f64,
    /// e0, e1, e2, e12 for [`ControllerKind::Custom`].
    pub custom: [Option<RatFun>; 4],
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub circuit: CircuitCfg,
    pub source: SourceCfg,
    pub sim: SimCfg,
    pub controller: ControllerCfg,
}

impl Default for RunConfig {
    fn default() -> Self {
        let p = CircuitParams::example();
        RunConfig {
            circuit: CircuitCfg {
                l: p.l,
                lu: p.lu,
                r: p.r,
                balanced: false,
            },
            source: SourceCfg {
                v: DEFAULT_V,
                freq_hz: DEFAULT_FREQ_HZ,
            },
            sim: SimCfg {
                ts: DEFAULT_TS,
                duration: 0.1,
                substeps: 10,
                step_time: 0.05,
                step_channel: Some(Channel::Beta),
                step_magnitude: None,
            },
            controller: ControllerCfg {
                kind: ControllerKind::Decoupling,
                k: 10.0,
                custom: Default::default(),
            },
        }
    }
}

const KEYS: [(&str, &[&str]); 4] = [
    ("circuit", &["L", "Lu", "R", "balanced"]),
    ("source", &["V", "freq_hz"]),
    (
        "sim",
        &[
            "Ts",
            "duration",
            "substeps",
            "step_time",
            "step_channel",
            "step_magnitude",
        ],
    ),
    ("controller", &["type", "k", "e0", "e1", "e2", "e12"]),
];

fn num(v: &str) -> Result<f64, ParseError> {
    let x: f64 = v
        .parse()
        .map_err(|_| ParseError::new(format!("'{v}' is not a number")))?;
    if !x.is_finite() {
        return Err(ParseError::new(format!("'{v}' is not finite")));
    }
    Ok(x)
}

fn positive(v: &str) -> Result<f64, ParseError> {
    let x = num(v)?;
    if x <= 0.0 {
        return Err(ParseError::new(format!("{x} must be > 0")));
    }
    Ok(x)
}

fn boolean(v: &str) -> Result<bool, ParseError> {
    match v {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(ParseError::new(format!("'{v}' is not a boolean"))),
    }
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<RunConfig, ParseError> {
        let mut cfg = RunConfig::default();
        let mut section: Option<usize> = None;
        let mut seen: Vec<(usize, &str)> = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let lineno = idx + 1;
            let fail = |e: ParseError| ParseError {
                line: Some(lineno),
                msg: e.msg,
            };
            let line = strip_comment(raw).trim();
            if line.is_empty() {
                continue;
            }
            if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
                let name = name.trim();
                section =
                    Some(KEYS.iter().position(|(s, _)| *s == name).ok_or_else(|| {
                        fail(ParseError::new(format!("unknown section [{name}]")))
                    })?);
                continue;
            }
            let sec = section.ok_or_else(|| fail(ParseError::new("key outside of a section")))?;
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| fail(ParseError::new("expected 'key = value'")))?;
            let (k, v) = (k.trim(), v.trim());
            let (sname, keys) = KEYS[sec];
            let key = *keys
                .iter()
                .find(|x| **x == k)
                .ok_or_else(|| fail(ParseError::new(format!("unknown key '{k}' in [{sname}]"))))?;
            if seen.contains(&(sec, key)) {
                return Err(fail(ParseError::new(format!(
                    "duplicate key '{k}' in [{sname}]"
                ))));
            }
            seen.push((sec, key));
            cfg.set(sname, key, v).map_err(fail)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    fn set(&mut self, section: &str, key: &str, v: &str) -> Result<(), ParseError> {
        match (section, key) {
            ("circuit", "L") => self.circuit.l = positive(v)?,
            ("circuit", "Lu") => self.circuit.lu = positive(v)?,
            ("circuit", "R") => self.circuit.r = positive(v)?,
            ("circuit", "balanced") => self.circuit.balanced = boolean(v)?,
            ("source", "V") => self.source.v = positive(v)?,
            ("source", "freq_hz") => self.source.freq_hz = positive(v)?,
            ("sim", "Ts") => self.sim.ts = positive(v)?,
            ("sim", "duration") => self.sim.duration = positive(v)?,
            ("sim", "substeps") => {
                self.sim.substeps = v.parse().ok().filter(|n| *n >= 1).ok_or_else(|| {
                    ParseError::new(format!("substeps '{v}' must be an integer >= 1"))
                })?
            }
            ("sim", "step_time") => {
                let t = num(v)?;
                if t < 0.0 {
                    return Err(ParseError::new("step_time must be >= 0"));
                }
                self.sim.step_time = t;
            }
            ("sim", "step_channel") => {
                self.sim.step_channel = match v {
                    "alpha" => Some(Channel::Alpha),
                    "beta" => Some(Channel::Beta),
                    "none" => None,
                    _ => {
                        return Err(ParseError::new(format!(
                            "step_channel '{v}' is not alpha, beta or none"
                        )))
                    }
                }
            }
            ("sim", "step_magnitude") => self.sim.step_magnitude = Some(num(v)?),
            ("controller", "type") => self.controller.kind = v.parse()?,
            ("controller", "k") => self.controller.k = num(v)?,
            ("controller", e) => {
                let i = ["e0", "e1", "e2", "e12"]
                    .iter()
                    .position(|x| *x == e)
                    .expect("key list and match agree");
                self.controller.custom[i] = Some(parse_ratfun(v)?);
            }
            _ => unreachable!("key list and match agree"),
        }
        Ok(())
    }

    fn validate(&self) -> Result<(), ParseError> {
        if self.sim.step_channel.is_some() && self.sim.step_time >= self.sim.duration {
            return Err(ParseError::new(format!(
                "step_time {} must be < duration {}",
                self.sim.step_time, self.sim.duration
            )));
        }
        Ok(())
    }

    pub fn params(&self) -> CircuitParams {
        CircuitParams {
            l: self.circuit.l,
            lu: self.circuit.lu,
            r: self.circuit.r,
        }
    }
}

fn strip_comment(line: &str) -> &str {
    match line.find(['#', ';']) {
        Some(i) => &line[..i],
        None => line,
    }
}

impl fmt::Display for ControllerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ControllerKind::Identity => "identity",
            ControllerKind::Proportional => "proportional",
            ControllerKind::Decoupling => "decoupling",
            ControllerKind::Custom => "custom",
        })
    }
}
