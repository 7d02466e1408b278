//! CSV tables of sampled trajectories.

use csv::{ReaderBuilder, WriterBuilder};

use crate::dynamics::{ExtendedState, ReducedState};
use crate::error::{Error, Result};

pub const REDUCED_COLUMNS: [&str; 6] = ["t", "F", "R", "Fdot", "Rdot", "Theta"];

fn header(extended: bool) -> Vec<String> {
    let mut h: Vec<String> = REDUCED_COLUMNS.iter().map(|s| s.to_string()).collect();
    if extended {
        h.extend((6..=15).map(|i| format!("x{i}")));
    }
    h
}

fn write_rows<'a>(rows: impl Iterator<Item = (f64, &'a [f64])>, extended: bool) -> String {
    let mut w = WriterBuilder::new().from_writer(Vec::new());
    w.write_record(header(extended)).expect("writing to memory");
    for (t, x) in rows {
        let mut rec = vec![format!("{t:.16e}")];
        rec.extend(x.iter().map(|v| format!("{v:.16e}")));
        w.write_record(&rec).expect("writing to memory");
    }
    String::from_utf8(w.into_inner().expect("writing to memory")).expect("ascii output")
}

pub fn reduced_csv(states: &[ReducedState]) -> String {
    write_rows(states.iter().map(|s| (s.t, &s.x[..])), false)
}

pub fn extended_csv(states: &[ExtendedState]) -> String {
    write_rows(states.iter().map(|s| (s.t, &s.x[..])), true)
}

/// Reads the reduced columns back; sensitivity columns, if any, are ignored.
pub fn parse_reduced_csv(text: &str) -> Result<Vec<ReducedState>> {
    let mut r = ReaderBuilder::new().from_reader(text.as_bytes());
    let head = r
        .headers()
        .map_err(|e| Error::Parse { line: 1, message: e.to_string() })?
        .clone();
    if head.len() < 6 || head.iter().take(6).ne(REDUCED_COLUMNS.iter().copied()) {
        return Err(Error::Parse {
            line: 1,
            message: format!("expected columns {}", REDUCED_COLUMNS.join(",")),
        });
    }
    let mut out = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let line = i + 2;
        let rec = rec.map_err(|e| Error::Parse { line, message: e.to_string() })?;
        let mut v = [0.0; 6];
        for (j, slot) in v.iter_mut().enumerate() {
            let field = rec.get(j).ok_or_else(|| Error::Parse {
                line,
                message: "missing column".into(),
            })?;
            *slot = field.trim().parse().map_err(|_| Error::Parse {
                line,
                message: format!("bad number '{field}'"),
            })?;
        }
        out.push(ReducedState::new(v[0], [v[1], v[2], v[3], v[4], v[5]]));
    }
    Ok(out)
}
