//! Text and binary export of grid solutions.
//!
//! Binary layout, all little-endian:
//!
//! | bytes | content |
//! |-------|---------|
//! | 8     | magic `LIOUGRD1` |
//! | 8     | `h` as f64 |
//! | 16    | lattice offset `(ox, oy)` as f64 in units of `h` |
//! | 8     | node count `n` as u64 |
//! | 32 n  | per interior node: `i` i32, `j` i32, `d` f64, `u` f64, `w` f64 |

use super::GridSolution;
use crate::error::{Error, Result};
use std::io::{Read, Write};

const MAGIC: &[u8; 8] = b"LIOUGRD1";

/// Writes `x,y,d,u_h` rows for all interior nodes.
pub fn write_csv(sol: &GridSolution, mut out: impl Write) -> Result<()> {
    writeln!(out, "x,y,d,u_h")?;
    for (n, u) in sol.grid.nodes.iter().zip(&sol.u) {
        writeln!(out, "{:.17e},{:.17e},{:.17e},{:.17e}", n.p.x, n.p.y, n.d, u)?;
    }
    Ok(())
}

pub fn write_binary(sol: &GridSolution, mut out: impl Write) -> Result<()> {
    let g = &sol.grid;
    out.write_all(MAGIC)?;
    out.write_all(&g.h.to_le_bytes())?;
    out.write_all(&g.offset[0].to_le_bytes())?;
    out.write_all(&g.offset[1].to_le_bytes())?;
    out.write_all(&(g.len() as u64).to_le_bytes())?;
    for (k, n) in g.nodes.iter().enumerate() {
        let i = i32::try_from(n.i).map_err(|_| Error::Io("lattice index exceeds i32".into()))?;
        let j = i32::try_from(n.j).map_err(|_| Error::Io("lattice index exceeds i32".into()))?;
        out.write_all(&i.to_le_bytes())?;
        out.write_all(&j.to_le_bytes())?;
        out.write_all(&n.d.to_le_bytes())?;
        out.write_all(&sol.u[k].to_le_bytes())?;
        out.write_all(&sol.w[k].to_le_bytes())?;
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct BinaryDump {
    pub h: f64,
    pub offset: [f64; 2],
    /// `(i, j, d, u, w)` per interior node.
    pub nodes: Vec<(i32, i32, f64, f64, f64)>,
}

pub fn read_binary(mut input: impl Read) -> Result<BinaryDump> {
    let mut magic = [0u8; 8];
    input.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(Error::Io("not a grid dump".into()));
    }
    let mut b8 = [0u8; 8];
    let mut b4 = [0u8; 4];
    let mut f = |input: &mut dyn Read| -> Result<f64> {
        input.read_exact(&mut b8)?;
        Ok(f64::from_le_bytes(b8))
    };
    let h = f(&mut input)?;
    let ox = f(&mut input)?;
    let oy = f(&mut input)?;
    let mut c8 = [0u8; 8];
    input.read_exact(&mut c8)?;
    let n = u64::from_le_bytes(c8) as usize;
    let mut nodes = Vec::with_capacity(n);
    for _ in 0..n {
        input.read_exact(&mut b4)?;
        let i = i32::from_le_bytes(b4);
        input.read_exact(&mut b4)?;
        let j = i32::from_le_bytes(b4);
        let d = f(&mut input)?;
        let u = f(&mut input)?;
        let w = f(&mut input)?;
        nodes.push((i, j, d, u, w));
    }
    Ok(BinaryDump { h, offset: [ox, oy], nodes })
}
