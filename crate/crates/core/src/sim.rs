//! Sampled-data simulation in the αβ frame: a discrete controller running
//! every `ts` seconds, a continuous plant integrated with RK4 under a
//! zero-order hold, and three-phase references.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::circuits::{CLARKE_K, CLARKE_K_PINV};
use crate::ga::{GaTf, Mat2};
use crate::models::{ga_to_real, GaSiso, RealMimo2};
use crate::poly::Poly;
use crate::ratfun::RatFun;
use crate::{Complex64, Error, Result};

/// abc → αβ.
pub fn clarke(abc: [f64; 3]) -> [f64; 2] {
    let row = |r: usize| (0..3).map(|i| CLARKE_K[r][i] * abc[i]).sum();
    [row(0), row(1)]
}

/// αβ → abc (zero sequence omitted).
pub fn inv_clarke(ab: [f64; 2]) -> [f64; 3] {
    let row = |i: usize| CLARKE_K_PINV[i][0] * ab[0] + CLARKE_K_PINV[i][1] * ab[1];
    [row(0), row(1), row(2)]
}

/// IIR filter `H(z) = Σ b_k z^-k / Σ a_k z^-k` with `a[0] = 1`, run in
/// transposed direct form II.
#[derive(Clone, Debug, PartialEq)]
pub struct DiscreteFilter {
    pub b: Vec<f64>,
    pub a: Vec<f64>,
    pub state: Vec<f64>,
}

impl DiscreteFilter {
    pub fn new(b: Vec<f64>, a: Vec<f64>) -> Result<Self> {
        if a.first().copied().unwrap_or(0.0) == 0.0 {
            return Err(Error::InvalidParameter(String::from(
                "filter needs a nonzero a[0]",
            )));
        }
        if b.len() > a.len() {
            return Err(Error::NotRealizable {
                what: String::from("more feedforward than feedback taps"),
            });
        }
        let a0 = a[0];
        let b: Vec<f64> = b.iter().map(|x| x / a0).collect();
        let a: Vec<f64> = a.iter().map(|x| x / a0).collect();
        let n = a.len().saturating_sub(1);
        Ok(DiscreteFilter {
            b,
            a,
            state: vec![0.0; n],
        })
    }

    pub fn gain(k: f64) -> Self {
        DiscreteFilter {
            b: vec![k],
            a: vec![1.0],
            state: Vec::new(),
        }
    }

    pub fn reset(&mut self) {
        self.state.iter_mut().for_each(|s| *s = 0.0);
    }

    pub fn step(&mut self, x: f64) -> f64 {
        let b = |k: usize| self.b.get(k).copied().unwrap_or(0.0);
        let y = b(0) * x + self.state.first().copied().unwrap_or(0.0);
        let n = self.state.len();
        for k in 0..n {
            let next = if k + 1 < n { self.state[k + 1] } else { 0.0 };
            self.state[k] = next + b(k + 1) * x - self.a[k + 1] * y;
        }
        y
    }

    /// `H(z)`.
    pub fn eval_z(&self, z: Complex64) -> Complex64 {
        let zi = z.inv();
        let horner = |c: &[f64]| {
            c.iter()
                .rev()
                .fold(Complex64::new(0.0, 0.0), |acc, &x| acc * zi + x)
        };
        horner(&self.b) / horner(&self.a)
    }

    /// `H(e^{jωTs})`.
    pub fn freq_response(&self, omega: f64, ts: f64) -> Complex64 {
        self.eval_z(Complex64::from_polar(1.0, omega * ts))
    }

    /// Roots of the denominator in z.
    pub fn poles(&self) -> Result<Vec<Complex64>> {
        let n = self.a.len() - 1;
        if n == 0 {
            return Ok(Vec::new());
        }
        // z^n + a1 z^{n-1} + ... + an
        let asc: Vec<f64> = self.a.iter().rev().copied().collect();
        Poly::new(asc).roots()
    }
}

/// Bilinear scale `ω / tan(ω·Ts/2)`; `2/Ts` without prewarping.
pub fn tustin_scale(ts: f64, prewarp_omega: f64) -> Result<f64> {
    if !(ts > 0.0 && ts.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "sample period {ts} must be > 0"
        )));
    }
    if prewarp_omega == 0.0 {
        return Ok(2.0 / ts);
    }
    if !(prewarp_omega > 0.0 && prewarp_omega * ts < PI) {
        return Err(Error::BadPrewarp {
            omega: prewarp_omega,
            ts,
        });
    }
    Ok(prewarp_omega / libm::tan(prewarp_omega * ts / 2.0))
}

/// Substitutes `p ← K·(z − 1)/(z + 1)` into a proper rational function.
pub fn discretize(f: &RatFun, ts: f64, prewarp_omega: f64) -> Result<DiscreteFilter> {
    let k = tustin_scale(ts, prewarp_omega)?;
    if !f.is_proper() {
        return Err(Error::NotRealizable {
            what: String::from("improper transfer function"),
        });
    }
    if f.is_zero() {
        return Ok(DiscreteFilter::gain(0.0));
    }
    let n = f.den().degree().unwrap_or(0);
    let zm = Poly::linear(-1.0, 1.0);
    let zp = Poly::linear(1.0, 1.0);
    // Σ c_i K^i (z − 1)^i (z + 1)^(n − i), ascending in z
    let map = |c: &Poly| {
        (0..=n).fold(Poly::zero(), |acc, i| {
            let ci = c.coeff(i);
            if ci == 0.0 {
                return acc;
            }
            let term = &zm.pow(i as u32) * &zp.pow((n - i) as u32);
            &acc + &term.scale(ci * libm::pow(k, i as f64))
        })
    };
    let num = map(f.num());
    let den = map(f.den());
    // H(z^-1) coefficients: the z^n coefficient comes first
    let desc = |p: &Poly| (0..=n).map(|j| p.coeff(n - j)).collect::<Vec<f64>>();
    let mut b = desc(&num);
    while b.len() > 1 && b.last() == Some(&0.0) {
        b.pop();
    }
    DiscreteFilter::new(b, desc(&den))
}

/// 2×2 bank `u = F·e` of discrete filters.
#[derive(Clone, Debug, PartialEq)]
pub struct FilterBank {
    pub f: [[DiscreteFilter; 2]; 2],
}

impl FilterBank {
    pub fn step(&mut self, e: [f64; 2]) -> [f64; 2] {
        let mut u = [0.0; 2];
        for (i, row) in self.f.iter_mut().enumerate() {
            for (j, f) in row.iter_mut().enumerate() {
                u[i] += f.step(e[j]);
            }
        }
        u
    }

    pub fn reset(&mut self) {
        self.f.iter_mut().flatten().for_each(DiscreteFilter::reset);
    }

    pub fn freq_response(&self, omega: f64, ts: f64) -> Mat2<Complex64> {
        let r = |i: usize, j: usize| self.f[i][j].freq_response(omega, ts);
        Mat2::new(r(0, 0), r(0, 1), r(1, 0), r(1, 1))
    }
}

pub const ENTRY_NAMES: [&str; 4] = [
    "Ga (alpha<-alpha)",
    "Gb (alpha<-beta)",
    "Gc (beta<-alpha)",
    "Gd (beta<-beta)",
];

/// Discretizes every entry of a real 2×2 controller.
pub fn realize_real_controller(m: &RealMimo2, ts: f64, prewarp_omega: f64) -> Result<FilterBank> {
    let mut out = Vec::with_capacity(4);
    for (entry, name) in m.entries().iter().zip(ENTRY_NAMES) {
        let f = discretize(entry, ts, prewarp_omega).map_err(|e| match e {
            Error::NotRealizable { .. } => Error::NotRealizable {
                what: format!("controller entry {name}"),
            },
            other => other,
        })?;
        out.push(f);
    }
    let mut it = out.into_iter();
    let mut next = || it.next().expect("four entries");
    Ok(FilterBank {
        f: [[next(), next()], [next(), next()]],
    })
}

/// Lowers a GA controller to its real 2×2 form and discretizes each entry.
pub fn realize_ga_controller(c: &GaTf, ts: f64, prewarp_omega: f64) -> Result<FilterBank> {
    realize_real_controller(&ga_to_real(&GaSiso::new(c.clone())), ts, prewarp_omega)
}

/// Controllable canonical realization of a proper SISO transfer function.
#[derive(Clone, Debug)]
struct Siso {
    /// Monic denominator coefficients a_0..a_{n-1}.
    a: Vec<f64>,
    /// Output row.
    c: Vec<f64>,
    d: f64,
    x: Vec<f64>,
}

impl Siso {
    fn new(f: &RatFun) -> Result<Self> {
        if !f.is_proper() {
            return Err(Error::NotRealizable {
                what: String::from("improper plant entry"),
            });
        }
        let lead = f.den().leading();
        let den = f.den().scale(1.0 / lead);
        let num = f.num().scale(1.0 / lead);
        let n = den.degree().unwrap_or(0);
        let d = num.coeff(n);
        let a: Vec<f64> = (0..n).map(|i| den.coeff(i)).collect();
        let c: Vec<f64> = (0..n).map(|i| num.coeff(i) - d * den.coeff(i)).collect();
        Ok(Siso {
            a,
            c,
            d,
            x: vec![0.0; n],
        })
    }

    fn deriv(&self, x: &[f64], u: f64, out: &mut [f64]) {
        let n = x.len();
        for i in 0..n.saturating_sub(1) {
            out[i] = x[i + 1];
        }
        if n > 0 {
            out[n - 1] = u - self.a.iter().zip(x).map(|(a, x)| a * x).sum::<f64>();
        }
    }

    fn rk4(&mut self, u: f64, h: f64) {
        let n = self.x.len();
        if n == 0 {
            return;
        }
        let mut k1 = vec![0.0; n];
        let mut k2 = vec![0.0; n];
        let mut k3 = vec![0.0; n];
        let mut k4 = vec![0.0; n];
        let mut tmp = vec![0.0; n];
        self.deriv(&self.x, u, &mut k1);
        for i in 0..n {
            tmp[i] = self.x[i] + 0.5 * h * k1[i];
        }
        self.deriv(&tmp, u, &mut k2);
        for i in 0..n {
            tmp[i] = self.x[i] + 0.5 * h * k2[i];
        }
        self.deriv(&tmp, u, &mut k3);
        for i in 0..n {
            tmp[i] = self.x[i] + h * k3[i];
        }
        self.deriv(&tmp, u, &mut k4);
        for i in 0..n {
            self.x[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
    }

    fn output(&self, u: f64) -> f64 {
        self.c.iter().zip(&self.x).map(|(c, x)| c * x).sum::<f64>() + self.d * u
    }
}

/// Continuous 2×2 plant, one realization per entry.
#[derive(Clone, Debug)]
struct Plant {
    g: [[Siso; 2]; 2],
}

impl Plant {
    fn new(m: &RealMimo2) -> Result<Self> {
        Ok(Plant {
            g: [
                [Siso::new(&m.ga)?, Siso::new(&m.gb)?],
                [Siso::new(&m.gc)?, Siso::new(&m.gd)?],
            ],
        })
    }

    fn advance(&mut self, u: [f64; 2], h: f64, steps: usize) {
        for row in self.g.iter_mut() {
            for (j, s) in row.iter_mut().enumerate() {
                for _ in 0..steps {
                    s.rk4(u[j], h);
                }
            }
        }
    }

    fn output(&self, u: [f64; 2]) -> [f64; 2] {
        let row = |i: usize| self.g[i][0].output(u[0]) + self.g[i][1].output(u[1]);
        [row(0), row(1)]
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Channel {
    Alpha,
    Beta,
}

impl Channel {
    fn index(self) -> usize {
        match self {
            Channel::Alpha => 0,
            Channel::Beta => 1,
        }
    }

    fn other(self) -> Channel {
        match self {
            Channel::Alpha => Channel::Beta,
            Channel::Beta => Channel::Alpha,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Source {
    /// Phase amplitude (V).
    pub v: f64,
    /// Angular frequency (rad/s).
    pub omega: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Step {
    pub time: f64,
    pub channel: Channel,
    pub magnitude: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LoopMode {
    /// `e = ref − y` drives the controller.
    Closed,
    /// The reference drives the controller directly, no feedback.
    Open,
}

#[derive(Clone, Debug)]
pub struct SimConfig {
    pub plant: RealMimo2,
    pub controller: GaTf,
    pub ts: f64,
    pub substeps: usize,
    pub duration: f64,
    pub source: Source,
    pub step: Option<Step>,
    pub prewarp_omega: f64,
    pub mode: LoopMode,
}

pub const DEFAULT_V: f64 = 155.0;
pub const DEFAULT_TS: f64 = 1e-4;
pub const DEFAULT_FREQ_HZ: f64 = 60.0;

impl SimConfig {
    /// 155 V at 60 Hz, Ts = 100 µs, 10 substeps, 0.1 s, β-step of 0.1·V
    /// at 0.05 s, prewarp at 60 Hz, closed loop.
    pub fn new(plant: RealMimo2, controller: GaTf) -> Self {
        let omega = 2.0 * PI * DEFAULT_FREQ_HZ;
        SimConfig {
            plant,
            controller,
            ts: DEFAULT_TS,
            substeps: 10,
            duration: 0.1,
            source: Source {
                v: DEFAULT_V,
                omega,
            },
            step: Some(Step {
                time: 0.05,
                channel: Channel::Beta,
                magnitude: 0.1 * DEFAULT_V,
            }),
            prewarp_omega: omega,
            mode: LoopMode::Closed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.ts > 0.0 && self.ts.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "Ts = {} must be > 0",
                self.ts
            )));
        }
        if self.substeps == 0 {
            return Err(Error::InvalidParameter(String::from(
                "substeps must be >= 1",
            )));
        }
        if !(self.duration > 0.0 && self.duration.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "duration = {} must be > 0",
                self.duration
            )));
        }
        if let Some(s) = &self.step {
            if !(s.time >= 0.0 && s.time < self.duration) {
                return Err(Error::InvalidParameter(format!(
                    "step time {} must lie in [0, duration)",
                    s.time
                )));
            }
        }
        Ok(())
    }

    /// αβ reference at time `t`.
    pub fn reference(&self, t: f64) -> [f64; 2] {
        let Source { v, omega } = self.source;
        let abc = [
            v * libm::cos(omega * t),
            v * libm::cos(omega * t - 2.0 * PI / 3.0),
            v * libm::cos(omega * t + 2.0 * PI / 3.0),
        ];
        let mut r = clarke(abc);
        if let Some(s) = &self.step {
            if t >= s.time - 1e-12 * self.ts {
                r[s.channel.index()] += s.magnitude;
            }
        }
        r
    }

    fn ticks(&self) -> usize {
        libm::round(self.duration / self.ts) as usize + 1
    }
}

/// Uniformly sampled signal record.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SimTrace {
    pub t: Vec<f64>,
    pub ref_alpha: Vec<f64>,
    pub ref_beta: Vec<f64>,
    pub y_alpha: Vec<f64>,
    pub y_beta: Vec<f64>,
    pub u_alpha: Vec<f64>,
    pub u_beta: Vec<f64>,
    pub va: Vec<f64>,
    pub vb: Vec<f64>,
    pub vc: Vec<f64>,
    /// First time at which the output left the divergence bound.
    pub diverged_at: Option<f64>,
}

pub const CSV_HEADER: &str = "t,ref_alpha,ref_beta,y_alpha,y_beta,u_alpha,u_beta,va,vb,vc";

impl SimTrace {
    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    pub fn columns(&self) -> [&[f64]; 10] {
        [
            &self.t,
            &self.ref_alpha,
            &self.ref_beta,
            &self.y_alpha,
            &self.y_beta,
            &self.u_alpha,
            &self.u_beta,
            &self.va,
            &self.vb,
            &self.vc,
        ]
    }

    pub fn y(&self, ch: Channel) -> &[f64] {
        match ch {
            Channel::Alpha => &self.y_alpha,
            Channel::Beta => &self.y_beta,
        }
    }

    fn push(&mut self, t: f64, r: [f64; 2], y: [f64; 2], u: [f64; 2]) {
        let abc = inv_clarke(y);
        self.t.push(t);
        self.ref_alpha.push(r[0]);
        self.ref_beta.push(r[1]);
        self.y_alpha.push(y[0]);
        self.y_beta.push(y[1]);
        self.u_alpha.push(u[0]);
        self.u_beta.push(u[1]);
        self.va.push(abc[0]);
        self.vb.push(abc[1]);
        self.vc.push(abc[2]);
    }
}

const DIVERGENCE_BOUND: f64 = 1e9;

/// Runs the loop and returns the trace even when it diverges (recorded in
/// [`SimTrace::diverged_at`], trace truncated there).
pub fn simulate(cfg: &SimConfig) -> Result<SimTrace> {
    cfg.validate()?;
    let mut bank = realize_ga_controller(&cfg.controller, cfg.ts, cfg.prewarp_omega)?;
    let mut plant = Plant::new(&cfg.plant)?;
    let h = cfg.ts / cfg.substeps as f64;
    let mut trace = SimTrace::default();
    let mut u_held = [0.0; 2];
    for k in 0..cfg.ticks() {
        let t = k as f64 * cfg.ts;
        let y = plant.output(u_held);
        if y.iter().any(|v| !(v.abs() <= DIVERGENCE_BOUND)) {
            trace.diverged_at = Some(t);
            break;
        }
        let r = cfg.reference(t);
        let e = match cfg.mode {
            LoopMode::Closed => [r[0] - y[0], r[1] - y[1]],
            LoopMode::Open => r,
        };
        let u = bank.step(e);
        trace.push(t, r, y, u);
        plant.advance(u, h, cfg.substeps);
        u_held = u;
    }
    Ok(trace)
}

/// [`simulate`], with divergence reported as an error.
pub fn run_closed_loop(cfg: &SimConfig) -> Result<SimTrace> {
    let trace = simulate(cfg)?;
    match trace.diverged_at {
        Some(time) => Err(Error::Diverged { time }),
        None => Ok(trace),
    }
}

/// Window after the step used by [`decoupling_metric`] (s).
pub const COUPLING_WINDOW: f64 = 0.02;

/// The same configuration without the step.
pub fn baseline(cfg: &SimConfig) -> Result<SimTrace> {
    let mut quiet = cfg.clone();
    quiet.step = None;
    run_closed_loop(&quiet)
}

/// Largest deviation of the unstepped channel from an identical run without
/// the step, within [`COUPLING_WINDOW`] after the step, per unit step.
pub fn decoupling_metric(trace: &SimTrace, cfg: &SimConfig) -> Result<f64> {
    let base = baseline(cfg)?;
    decoupling_metric_against(trace, &base, cfg)
}

pub fn decoupling_metric_against(
    trace: &SimTrace,
    base: &SimTrace,
    cfg: &SimConfig,
) -> Result<f64> {
    let step = cfg
        .step
        .ok_or_else(|| Error::InvalidParameter(String::from("configuration has no step")))?;
    let ch = step.channel.other();
    let (y, y0) = (trace.y(ch), base.y(ch));
    let mut worst = 0.0_f64;
    for (i, &t) in trace.t.iter().enumerate() {
        if t + 1e-12 < step.time || t > step.time + COUPLING_WINDOW + 1e-12 || i >= y0.len() {
            continue;
        }
        worst = worst.max((y[i] - y0[i]).abs());
    }
    Ok(worst / step.magnitude.abs())
}

/// Time for the stepped channel's deviation from the baseline run to reach
/// 63.2 % of its final value, measured from the step time.
pub fn step_time_constant(trace: &SimTrace, base: &SimTrace, cfg: &SimConfig) -> Result<f64> {
    let step = cfg
        .step
        .ok_or_else(|| Error::InvalidParameter(String::from("configuration has no step")))?;
    let ch = step.channel;
    let n = trace.len().min(base.len());
    let dy: Vec<f64> = (0..n).map(|i| trace.y(ch)[i] - base.y(ch)[i]).collect();
    let fin = *dy
        .last()
        .ok_or(Error::InvalidParameter(String::from("empty trace")))?;
    let target = (1.0 - libm::exp(-1.0)) * fin;
    for i in 1..n {
        if trace.t[i] < step.time {
            continue;
        }
        let (a, b) = (dy[i - 1], dy[i]);
        if (fin > 0.0 && b >= target) || (fin < 0.0 && b <= target) {
            let frac = if b != a { (target - a) / (b - a) } else { 1.0 };
            let t = trace.t[i - 1] + frac * (trace.t[i] - trace.t[i - 1]);
            return Ok(t - step.time);
        }
    }
    Err(Error::InvalidParameter(String::from(
        "stepped channel never reached 63.2 % of its final value",
    )))
}

/// Complex amplitude of `x_α + j·x_β` at `omega` over the last `periods`
/// whole periods of the trace.
pub fn phasor(t: &[f64], xa: &[f64], xb: &[f64], omega: f64, periods: usize) -> Complex64 {
    let n = t.len();
    if n < 2 {
        return Complex64::new(0.0, 0.0);
    }
    let ts = t[1] - t[0];
    let window = periods as f64 * 2.0 * PI / omega;
    let count = (libm::round(window / ts) as usize).clamp(1, n);
    let start = n - count;
    let mut acc = Complex64::new(0.0, 0.0);
    for i in start..n {
        let x = Complex64::new(xa[i], xb[i]);
        acc += x * Complex64::from_polar(1.0, -omega * t[i]);
    }
    acc / count as f64
}

/// Steady-state ratio |y_αβ| / |ref_αβ| at the source frequency.
pub fn amplitude_ratio(trace: &SimTrace, omega: f64, periods: usize) -> f64 {
    let y = phasor(&trace.t, &trace.y_alpha, &trace.y_beta, omega, periods);
    let r = phasor(&trace.t, &trace.ref_alpha, &trace.ref_beta, omega, periods);
    y.norm() / r.norm()
}
