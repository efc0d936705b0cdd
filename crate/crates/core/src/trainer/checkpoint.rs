//! Text checkpoint:
//!
//! ```text
//! imbal-mlp 1
//! dims <input> <hidden> <classes>
//! w1 <values...>
//! b1 <values...>
//! w2 <values...>
//! b2 <values...>
//! ```
//!
//! Values are written with shortest round-trip `f64` formatting.

use std::io::{BufRead, Write};

use super::model::ModelParams;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

pub const CHECKPOINT_MAGIC: &str = "imbal-mlp";
pub const CHECKPOINT_VERSION: u32 = 1;

pub fn write_checkpoint<W: Write, T: Scalar>(mut out: W, p: &ModelParams<T>) -> Result<()> {
    let io = |e| Error::io("<checkpoint>", e);
    writeln!(out, "{CHECKPOINT_MAGIC} {CHECKPOINT_VERSION}").map_err(io)?;
    writeln!(out, "dims {} {} {}", p.input_dim, p.hidden_dim, p.classes).map_err(io)?;
    for (name, t) in ["w1", "b1", "w2", "b2"].iter().zip(p.tensors()) {
        write!(out, "{name}").map_err(io)?;
        for v in t {
            write!(out, " {:?}", v.as_f64()).map_err(io)?;
        }
        writeln!(out).map_err(io)?;
    }
    Ok(())
}

pub fn read_checkpoint<R: BufRead, T: Scalar>(input: R) -> Result<ModelParams<T>> {
    let lines: Vec<String> = input
        .lines()
        .collect::<std::io::Result<_>>()
        .map_err(|e| Error::io("<checkpoint>", e))?;
    let get = |i: usize| lines.get(i).map(String::as_str).unwrap_or("");
    let head: Vec<&str> = get(0).split_whitespace().collect();
    if head.len() != 2 || head[0] != CHECKPOINT_MAGIC {
        return Err(Error::parse(1, "not a checkpoint file"));
    }
    if head[1] != CHECKPOINT_VERSION.to_string() {
        return Err(Error::parse(1, format!("unsupported checkpoint version {}", head[1])));
    }
    let dims: Vec<&str> = get(1).split_whitespace().collect();
    if dims.len() != 4 || dims[0] != "dims" {
        return Err(Error::parse(2, "expected `dims <input> <hidden> <classes>`"));
    }
    let dim = |s: &str| s.parse::<usize>().map_err(|_| Error::parse(2, format!("bad dimension {s:?}")));
    let mut p = ModelParams::zeros(dim(dims[1])?, dim(dims[2])?, dim(dims[3])?);
    for (k, (name, t)) in ["w1", "b1", "w2", "b2"].iter().zip(p.tensors_mut()).enumerate() {
        let no = k + 3;
        let mut it = get(k + 2).split_whitespace();
        if it.next() != Some(*name) {
            return Err(Error::parse(no, format!("expected tensor {name}")));
        }
        let vals = it
            .map(|s| s.parse::<f64>().map(T::lit).map_err(|_| Error::parse(no, format!("bad value {s:?}"))))
            .collect::<Result<Vec<T>>>()?;
        if vals.len() != t.len() {
            return Err(Error::parse(no, format!("{name} has {} values, expected {}", vals.len(), t.len())));
        }
        t.copy_from_slice(&vals);
    }
    p.validate()?;
    Ok(p)
}
