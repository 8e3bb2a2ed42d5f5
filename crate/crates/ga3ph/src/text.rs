//! Canonical text for numbers, polynomials, rational functions and the three
//! plant representations.
//!
//! Polynomials are written in ascending powers of `p` with 12 significant
//! digits, e.g. `7333.33333333 + p` or `(1 - 2.5p^2)/(3 + p + p^2)`.

use std::fmt;

use ga3ph_core::ga::Mv4;
use ga3ph_core::models::{ComplexSiso, GaSiso, RealMimo2};
use ga3ph_core::{Complex64, GaTf, Poly, RatFun};

#[derive(Debug, Clone, PartialEq)]
pub struct ParseError {
    pub line: Option<usize>,
    pub msg: String,
}

impl ParseError {
    pub fn new(msg: impl Into<String>) -> Self {
        ParseError {
            line: None,
            msg: msg.into(),
        }
    }

    fn at(mut self, line: usize) -> Self {
        self.line.get_or_insert(line);
        self
    }
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(l) => write!(f, "line {l}: {}", self.msg),
            None => f.write_str(&self.msg),
        }
    }
}

impl std::error::Error for ParseError {}

/// 12 significant digits, shortest form; scientific outside [1e-4, 1e12).
pub fn fmt_num(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let r: f64 = format!("{x:.11e}").parse().expect("formatted float parses");
    if (1e-4..1e12).contains(&r.abs()) {
        format!("{r}")
    } else {
        format!("{r:e}")
    }
}

pub fn fmt_complex(z: Complex64) -> String {
    let im = fmt_num(z.im.abs());
    let sign = if z.im.is_sign_negative() && z.im != 0.0 {
        '-'
    } else {
        '+'
    };
    format!("{}{sign}{im}j", fmt_num(z.re))
}

fn term_count(p: &Poly) -> usize {
    p.coeffs().iter().filter(|c| **c != 0.0).count()
}

pub fn fmt_poly(p: &Poly) -> String {
    let mut s = String::new();
    for (i, &c) in p.coeffs().iter().enumerate() {
        if c == 0.0 {
            continue;
        }
        let mag = c.abs();
        if s.is_empty() {
            if c < 0.0 {
                s.push('-');
            }
        } else {
            s.push_str(if c < 0.0 { " - " } else { " + " });
        }
        if i == 0 || mag != 1.0 {
            s.push_str(&fmt_num(mag));
        }
        match i {
            0 => {}
            1 => s.push('p'),
            _ => s.push_str(&format!("p^{i}")),
        }
    }
    if s.is_empty() {
        s.push('0');
    }
    s
}

pub fn fmt_ratfun(f: &RatFun) -> String {
    if f.is_zero() {
        return "0".into();
    }
    let num = fmt_poly(f.num());
    let num = if term_count(f.num()) > 1 {
        format!("({num})")
    } else {
        num
    };
    if f.den().coeffs() == [1.0] {
        return num;
    }
    format!("{num}/({})", fmt_poly(f.den()))
}

/// Scans a float at the start of `s`; returns it and the bytes consumed.
fn scan_float(s: &str) -> Option<(f64, usize)> {
    let b = s.as_bytes();
    let mut i = 0;
    let digits = |i: &mut usize| {
        let start = *i;
        while *i < b.len() && b[*i].is_ascii_digit() {
            *i += 1;
        }
        *i > start
    };
    let mut any = digits(&mut i);
    if i < b.len() && b[i] == b'.' {
        i += 1;
        any |= digits(&mut i);
    }
    if !any {
        return None;
    }
    if i < b.len() && (b[i] == b'e' || b[i] == b'E') {
        let mut j = i + 1;
        if j < b.len() && (b[j] == b'+' || b[j] == b'-') {
            j += 1;
        }
        if digits(&mut j) {
            i = j;
        }
    }
    s[..i].parse().ok().map(|v| (v, i))
}

/// Inverse of [`fmt_poly`]; also accepts `*` before `p` and repeated powers.
pub fn parse_poly(text: &str) -> Result<Poly, ParseError> {
    let toks: Vec<&str> = text.split_whitespace().collect();
    let numeric = |c: Option<char>| c.is_some_and(|c| c.is_ascii_alphanumeric() || c == '.');
    if toks
        .windows(2)
        .any(|w| numeric(w[0].chars().last()) && numeric(w[1].chars().next()))
    {
        return Err(ParseError::new(format!(
            "missing operator in '{}'",
            text.trim()
        )));
    }
    let s: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    if s.is_empty() {
        return Err(ParseError::new("empty polynomial"));
    }
    let mut coeffs: Vec<f64> = Vec::new();
    let mut rest = s.as_str();
    let mut first = true;
    while !rest.is_empty() {
        let mut sign = 1.0;
        match rest.as_bytes()[0] {
            b'+' => rest = &rest[1..],
            b'-' => {
                sign = -1.0;
                rest = &rest[1..];
            }
            _ if !first => return Err(ParseError::new(format!("expected + or - before '{rest}'"))),
            _ => {}
        }
        first = false;
        let mut c = 1.0;
        let mut have_num = false;
        if let Some((v, n)) = scan_float(rest) {
            c = v;
            have_num = true;
            rest = &rest[n..];
            if let Some(r) = rest.strip_prefix('*') {
                rest = r;
                if !rest.starts_with('p') {
                    return Err(ParseError::new("expected p after *"));
                }
            }
        }
        let mut power = 0;
        if let Some(r) = rest.strip_prefix('p') {
            rest = r;
            power = 1;
            if let Some(r) = rest.strip_prefix('^') {
                let end = r.find(|ch: char| !ch.is_ascii_digit()).unwrap_or(r.len());
                power = r[..end]
                    .parse()
                    .map_err(|_| ParseError::new("expected integer exponent after ^"))?;
                rest = &r[end..];
            }
        } else if !have_num {
            return Err(ParseError::new(format!("expected a term at '{rest}'")));
        }
        if coeffs.len() <= power {
            coeffs.resize(power + 1, 0.0);
        }
        coeffs[power] += sign * c;
    }
    Ok(Poly::new(coeffs))
}

fn strip_parens(s: &str) -> &str {
    let mut t = s.trim();
    loop {
        let u = strip_once(t);
        if u.len() == t.len() {
            return t;
        }
        t = u.trim();
    }
}

fn strip_once(t: &str) -> &str {
    if t.starts_with('(') && t.ends_with(')') {
        // only if the outer pair matches
        let mut depth = 0;
        for (i, ch) in t.char_indices() {
            match ch {
                '(' => depth += 1,
                ')' => {
                    depth -= 1;
                    if depth == 0 && i != t.len() - 1 {
                        return t;
                    }
                }
                _ => {}
            }
        }
        return &t[1..t.len() - 1];
    }
    t
}

/// Inverse of [`fmt_ratfun`]: `num` or `num/den`, each optionally in parentheses.
pub fn parse_ratfun(text: &str) -> Result<RatFun, ParseError> {
    let mut depth = 0i32;
    let mut split = None;
    for (i, ch) in text.char_indices() {
        match ch {
            '(' => depth += 1,
            ')' => depth -= 1,
            '/' if depth == 0 => {
                if split.is_some() {
                    return Err(ParseError::new("more than one '/'"));
                }
                split = Some(i);
            }
            _ => {}
        }
        if depth < 0 {
            return Err(ParseError::new("unbalanced parentheses"));
        }
    }
    if depth != 0 {
        return Err(ParseError::new("unbalanced parentheses"));
    }
    let (n, d) = match split {
        Some(i) => (&text[..i], &text[i + 1..]),
        None => (text, "1"),
    };
    let num = parse_poly(strip_parens(n))?;
    let den = parse_poly(strip_parens(d))?;
    RatFun::new(num, den).map_err(|e| ParseError::new(e.to_string()))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    /// Real 2×2 matrix.
    Rv,
    /// Complex pair G1, G2.
    Cv,
    /// Multivector coefficients.
    Ga,
}

impl Format {
    pub fn keys(self) -> &'static [&'static str] {
        match self {
            Format::Rv => &["Ga", "Gb", "Gc", "Gd"],
            Format::Cv => &["G1.re", "G1.im", "G2.re", "G2.im"],
            Format::Ga => &["e0", "e1", "e2", "e12"],
        }
    }
}

/// A plant in any of the three representations.
#[derive(Clone, Debug)]
pub enum Model {
    Rv(RealMimo2),
    Cv(ComplexSiso),
    Ga(GaSiso),
}

impl Model {
    pub fn format(&self) -> Format {
        match self {
            Model::Rv(_) => Format::Rv,
            Model::Cv(_) => Format::Cv,
            Model::Ga(_) => Format::Ga,
        }
    }

    pub fn to_real(&self) -> RealMimo2 {
        use ga3ph_core::models::{complex_to_real, ga_to_real};
        match self {
            Model::Rv(m) => m.clone(),
            Model::Cv(c) => complex_to_real(c),
            Model::Ga(g) => ga_to_real(g),
        }
    }

    /// Converts through the real 2×2 form unless the target is the source.
    pub fn convert(&self, to: Format) -> Model {
        use ga3ph_core::models::{real_to_complex, real_to_ga};
        if self.format() == to {
            return self.clone();
        }
        let m = self.to_real();
        match to {
            Format::Rv => Model::Rv(m),
            Format::Cv => Model::Cv(real_to_complex(&m)),
            Format::Ga => Model::Ga(real_to_ga(&m)),
        }
    }

    fn entries(&self) -> [RatFun; 4] {
        match self {
            Model::Rv(m) => m.entries().map(Clone::clone),
            Model::Cv(c) => [
                c.g1.0.clone(),
                c.g1.1.clone(),
                c.g2.0.clone(),
                c.g2.1.clone(),
            ],
            Model::Ga(g) => [0, 1, 2, 3].map(|i| g.g.coeff(i)),
        }
    }
}

impl fmt::Display for Model {
    /// One `key: ratfun` line per entry.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, e) in self.format().keys().iter().zip(self.entries()) {
            writeln!(f, "{k}: {}", fmt_ratfun(&e))?;
        }
        Ok(())
    }
}

pub fn fmt_gatf(g: &GaTf) -> String {
    Model::Ga(GaSiso::new(g.clone())).to_string()
}

/// Reads `key: ratfun` lines; `#` starts a comment line. The key set fixes
/// the representation.
pub fn parse_model(text: &str) -> Result<Model, ParseError> {
    let mut pairs: Vec<(String, RatFun, usize)> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once(':')
            .ok_or_else(|| ParseError::new("expected 'key: value'").at(idx + 1))?;
        let k = k.trim().to_string();
        if pairs.iter().any(|(x, _, _)| *x == k) {
            return Err(ParseError::new(format!("duplicate key {k}")).at(idx + 1));
        }
        let f = parse_ratfun(v.trim()).map_err(|e| e.at(idx + 1))?;
        pairs.push((k, f, idx + 1));
    }
    let first = pairs
        .first()
        .ok_or_else(|| ParseError::new("no model entries"))?;
    let (first_key, first_line) = (first.0.clone(), first.2);
    let format = [Format::Rv, Format::Cv, Format::Ga]
        .into_iter()
        .find(|f| f.keys().contains(&first.0.as_str()))
        .ok_or_else(|| ParseError::new(format!("unknown key {first_key}")).at(first_line))?;
    let mut slots: [Option<RatFun>; 4] = Default::default();
    for (k, f, line) in pairs {
        let i = format.keys().iter().position(|x| *x == k).ok_or_else(|| {
            ParseError::new(format!("key {k} does not belong with {first_key}")).at(line)
        })?;
        slots[i] = Some(f);
    }
    let missing: Vec<&str> = format
        .keys()
        .iter()
        .zip(&slots)
        .filter(|(_, s)| s.is_none())
        .map(|(k, _)| *k)
        .collect();
    if !missing.is_empty() {
        return Err(ParseError::new(format!(
            "missing entries: {}",
            missing.join(", ")
        )));
    }
    let [a, b, c, d] = slots.map(Option::unwrap);
    Ok(match format {
        Format::Rv => Model::Rv(RealMimo2::new(a, b, c, d)),
        Format::Cv => Model::Cv(ComplexSiso {
            g1: (a, b),
            g2: (c, d),
        }),
        Format::Ga => Model::Ga(GaSiso::new(GaTf::from_ratfuns(&Mv4::new(a, b, c, d)))),
    })
}
