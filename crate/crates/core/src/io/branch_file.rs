//! Line-oriented text format for traced branches.
//!
//! ```text
//! iso3bp-branch 1
//! kind odd-even
//! tolerance <eps1> <eps2> <eps3> <h> <k> <orientation> <h_min>
//! termination <keyword> [payload]
//! points <n>
//! <tau> <a> <b> <residual0> <residual1> <P|I>
//! ...
//! end
//! ```
//!
//! Floats are written with 17 significant digits, which reproduces every
//! binary64 value exactly.

use std::fmt::Write as _;

use crate::boundary::{BranchKind, CurvePoint};
use crate::continuation::{Branch, Termination, ToleranceConfig};
use crate::error::{Error, Result};

pub const MAGIC: &str = "iso3bp-branch";
pub const VERSION: u32 = 1;

fn num(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn serialize(branch: &Branch) -> String {
    let mut out = String::new();
    let c = &branch.config;
    writeln!(out, "{MAGIC} {VERSION}").unwrap();
    writeln!(out, "kind {}", branch.kind).unwrap();
    writeln!(
        out,
        "tolerance {} {} {} {} {} {} {}",
        num(c.eps1),
        num(c.eps2),
        num(c.eps3),
        num(c.h),
        c.k,
        c.orientation,
        num(c.h_min)
    )
    .unwrap();
    let term = &branch.termination;
    let payload = match term {
        Termination::ZeroTangent { relative_norm } => format!(" {}", num(*relative_norm)),
        Termination::CollisionProximity { min_r } => format!(" {}", num(*min_r)),
        Termination::CorrectorFailure { message } => format!(" {}", message.replace('\n', " ")),
        Termination::MaxPillars => String::new(),
        Termination::LeftBox { point } => format!(" {} {} {}", num(point[0]), num(point[1]), num(point[2])),
    };
    writeln!(out, "termination {}{payload}", term.keyword()).unwrap();
    writeln!(out, "points {}", branch.points.len()).unwrap();
    for p in &branch.points {
        writeln!(
            out,
            "{} {} {} {} {} {}",
            num(p.tau),
            num(p.a),
            num(p.b),
            num(p.residual[0]),
            num(p.residual[1]),
            if p.is_pillar { "P" } else { "I" }
        )
        .unwrap();
    }
    out.push_str("end\n");
    out
}

struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
    line: usize,
}

impl<'a> Lines<'a> {
    fn next(&mut self, what: &str) -> Result<&'a str> {
        match self.inner.next() {
            Some((i, l)) => {
                self.line = i + 1;
                Ok(l)
            }
            None => Err(Error::Parse {
                line: self.line + 1,
                message: format!("unexpected end of input, expected {what}"),
            }),
        }
    }

    fn err(&self, message: impl Into<String>) -> Error {
        Error::Parse {
            line: self.line,
            message: message.into(),
        }
    }

    fn keyed(&mut self, key: &str) -> Result<&'a str> {
        let l = self.next(key)?;
        match l.split_once(' ') {
            Some((k, rest)) if k == key => Ok(rest),
            _ if l == key => Ok(""),
            _ => Err(self.err(format!("expected '{key}'"))),
        }
    }

    fn float(&self, s: &str) -> Result<f64> {
        s.parse().map_err(|_| self.err(format!("bad number '{s}'")))
    }

    fn floats<const N: usize>(&self, fields: &[&str]) -> Result<[f64; N]> {
        if fields.len() != N {
            return Err(self.err(format!("expected {N} numbers, found {}", fields.len())));
        }
        let mut out = [0.0; N];
        for (o, f) in out.iter_mut().zip(fields) {
            *o = self.float(f)?;
        }
        Ok(out)
    }
}

pub fn parse(text: &str) -> Result<Branch> {
    let mut lines = Lines {
        inner: text.lines().enumerate(),
        line: 0,
    };
    let header = lines.keyed(MAGIC)?;
    if header != VERSION.to_string() {
        return Err(lines.err(format!("unsupported version '{header}'")));
    }
    let kind: BranchKind = lines.keyed("kind")?.parse().map_err(|e: Error| lines.err(e.to_string()))?;

    let fields: Vec<&str> = lines.keyed("tolerance")?.split_whitespace().collect();
    if fields.len() != 7 {
        return Err(lines.err("tolerance needs 7 fields"));
    }
    let config = ToleranceConfig {
        eps1: lines.float(fields[0])?,
        eps2: lines.float(fields[1])?,
        eps3: lines.float(fields[2])?,
        h: lines.float(fields[3])?,
        k: fields[4].parse().map_err(|_| lines.err("bad k"))?,
        orientation: fields[5].parse().map_err(|_| lines.err("bad orientation"))?,
        h_min: lines.float(fields[6])?,
    };

    let rest = lines.keyed("termination")?;
    let (keyword, payload) = rest.split_once(' ').unwrap_or((rest, ""));
    let args: Vec<&str> = payload.split_whitespace().collect();
    let termination = match keyword {
        "zero-tangent" => Termination::ZeroTangent {
            relative_norm: lines.floats::<1>(&args)?[0],
        },
        "collision-proximity" => Termination::CollisionProximity {
            min_r: lines.floats::<1>(&args)?[0],
        },
        "corrector-failure" => Termination::CorrectorFailure {
            message: payload.to_string(),
        },
        "max-pillars" => Termination::MaxPillars,
        "left-box" => Termination::LeftBox {
            point: lines.floats::<3>(&args)?,
        },
        other => return Err(lines.err(format!("unknown termination '{other}'"))),
    };

    let n: usize = lines
        .keyed("points")?
        .parse()
        .map_err(|_| lines.err("bad point count"))?;
    let mut points = Vec::with_capacity(n);
    for _ in 0..n {
        let l = lines.next("a point record")?;
        let f: Vec<&str> = l.split_whitespace().collect();
        if f.len() != 6 {
            return Err(lines.err("a point record has 6 fields"));
        }
        let [tau, a, b, r0, r1] = lines.floats::<5>(&f[..5])?;
        let is_pillar = match f[5] {
            "P" => true,
            "I" => false,
            other => return Err(lines.err(format!("bad point flag '{other}'"))),
        };
        points.push(CurvePoint {
            tau,
            a,
            b,
            kind,
            residual: [r0, r1],
            is_pillar,
        });
    }
    if lines.next("'end'")? != "end" {
        return Err(lines.err("expected 'end'"));
    }
    Ok(Branch {
        kind,
        points,
        config,
        termination,
    })
}
