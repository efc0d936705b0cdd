//! Line-per-image plan log.
//!
//! ```text
//! index,id,crop_x,crop_y,exec_seed,n,{kind,executed,magnitude,partner}*n
//! ```
//!
//! `executed` is `0`/`1`; `magnitude` and `partner` are empty when absent.
//! Magnitudes use the shortest representation that parses back to the same
//! `f64`, so a replayed plan is bit-identical.

use std::io::{BufRead, Write};

use super::plan::{Draw, TransformPlan};
use crate::error::{Error, Result};
use crate::format::{fields, parse_f64, parse_usize, skip_line};

pub const PLAN_LOG_HEADER: &str = "index,id,crop_x,crop_y,exec_seed,n,draws(kind,executed,magnitude,partner)...";

#[derive(Clone, Debug, PartialEq)]
pub struct PlanRecord {
    pub index: usize,
    pub id: String,
    pub plan: TransformPlan,
}

pub fn write_plan_log<W: Write>(mut out: W, records: &[PlanRecord]) -> Result<()> {
    let io = |e| Error::io("<plan log>", e);
    writeln!(out, "{PLAN_LOG_HEADER}").map_err(io)?;
    for r in records {
        if r.id.contains(',') || r.id.contains('\n') {
            return Err(Error::param(format!("image id {:?} contains a separator", r.id)));
        }
        let p = &r.plan;
        write!(
            out,
            "{},{},{},{},{},{}",
            r.index,
            r.id,
            p.crop_offset.0,
            p.crop_offset.1,
            p.exec_seed,
            p.draws.len()
        )
        .map_err(io)?;
        for d in &p.draws {
            let m = d.magnitude.map(|m| format!("{m:?}")).unwrap_or_default();
            let partner = d.partner.map(|i| i.to_string()).unwrap_or_default();
            write!(out, ",{},{},{},{}", d.kind, u8::from(d.executed), m, partner).map_err(io)?;
        }
        writeln!(out).map_err(io)?;
    }
    Ok(())
}

pub fn read_plan_log<R: BufRead>(input: R) -> Result<Vec<PlanRecord>> {
    let mut records = Vec::new();
    for (i, line) in input.lines().enumerate() {
        let lineno = i + 1;
        let line = line.map_err(|e| Error::io("<plan log>", e))?;
        if skip_line(&line) || (lineno == 1 && line.starts_with("index,")) {
            continue;
        }
        let f = fields(&line);
        if f.len() < 6 {
            return Err(Error::parse(lineno, "plan row needs at least 6 fields"));
        }
        let n = parse_usize(f[5], lineno)?;
        if f.len() != 6 + 4 * n {
            return Err(Error::parse(
                lineno,
                format!("expected {} fields for {n} draws, found {}", 6 + 4 * n, f.len()),
            ));
        }
        let u32_field = |s: &str| -> Result<u32> {
            s.parse()
                .map_err(|_| Error::parse(lineno, format!("bad crop offset {s:?}")))
        };
        let mut draws = Vec::with_capacity(n);
        for g in f[6..].chunks_exact(4) {
            let kind = g[0].parse().map_err(|e: Error| Error::parse(lineno, e.to_string()))?;
            let executed = match g[1] {
                "0" => false,
                "1" => true,
                other => return Err(Error::parse(lineno, format!("executed flag {other:?} is not 0/1"))),
            };
            let magnitude = if g[2].is_empty() {
                None
            } else {
                Some(parse_f64(g[2], lineno)?)
            };
            let partner = if g[3].is_empty() {
                None
            } else {
                Some(parse_usize(g[3], lineno)?)
            };
            draws.push(Draw {
                kind,
                executed,
                magnitude,
                partner,
            });
        }
        records.push(PlanRecord {
            index: parse_usize(f[0], lineno)?,
            id: f[1].to_string(),
            plan: TransformPlan {
                draws,
                crop_offset: (u32_field(f[2])?, u32_field(f[3])?),
                exec_seed: f[4]
                    .parse()
                    .map_err(|_| Error::parse(lineno, format!("bad seed {:?}", f[4])))?,
            },
        });
    }
    Ok(records)
}
