//! Binary field dumps and CSV observable traces.
//!
//! Dump layout (little endian): magic `TGPE`, version `u32`, `nx ny nz` as
//! `u32`, `Lx Ly Lz` as `f64`, then `time`, `Na`, `Nadd` as `f64`, followed
//! by `nx*ny*nz` complex samples as `(re, im)` `f64` pairs in z-fastest
//! order. The time step is not part of the dump.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use num_complex::Complex64;

use crate::context::Trajectory;
use crate::error::{GridError, Result};
use crate::spec::GridSpec;
use crate::state::GridState;

pub const DUMP_MAGIC: [u8; 4] = *b"TGPE";
pub const DUMP_VERSION: u32 = 1;

/// Run metadata carried by a dump.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DumpMeta {
    pub time: f64,
    pub na: f64,
    pub nadd: f64,
}

/// Write a state atomically (temp file + rename).
pub fn write_state(path: &Path, state: &GridState, meta: &DumpMeta) -> Result<()> {
    state.validate()?;
    let tmp = path.with_extension("tmp");
    {
        let mut w = BufWriter::new(File::create(&tmp)?);
        w.write_all(&DUMP_MAGIC)?;
        w.write_all(&DUMP_VERSION.to_le_bytes())?;
        for n in [state.spec.nx, state.spec.ny, state.spec.nz] {
            w.write_all(&(n as u32).to_le_bytes())?;
        }
        for l in [state.spec.lx, state.spec.ly, state.spec.lz] {
            w.write_all(&l.to_le_bytes())?;
        }
        for v in [meta.time, meta.na, meta.nadd] {
            w.write_all(&v.to_le_bytes())?;
        }
        for v in &state.psi {
            w.write_all(&v.re.to_le_bytes())?;
            w.write_all(&v.im.to_le_bytes())?;
        }
        w.flush()?;
    }
    std::fs::rename(&tmp, path)?;
    Ok(())
}

/// Read a dump. The returned spec carries the default time step (the dump
/// does not store `dt`); the cached norm is recomputed.
pub fn read_state(path: &Path) -> Result<(GridState, DumpMeta)> {
    let mut r = BufReader::new(File::open(path)?);

    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)
        .map_err(|_| GridError::Format("dump too short for header".into()))?;
    if magic != DUMP_MAGIC {
        return Err(GridError::Format(format!(
            "bad magic {magic:?}, expected {DUMP_MAGIC:?}"
        )));
    }
    let version = read_u32(&mut r)?;
    if version != DUMP_VERSION {
        return Err(GridError::Format(format!(
            "unsupported dump version {version}"
        )));
    }
    let nx = read_u32(&mut r)? as usize;
    let ny = read_u32(&mut r)? as usize;
    let nz = read_u32(&mut r)? as usize;
    let lx = read_f64(&mut r)?;
    let ly = read_f64(&mut r)?;
    let lz = read_f64(&mut r)?;
    let meta = DumpMeta {
        time: read_f64(&mut r)?,
        na: read_f64(&mut r)?,
        nadd: read_f64(&mut r)?,
    };
    let spec = GridSpec {
        nx,
        ny,
        nz,
        lx,
        ly,
        lz,
        ..GridSpec::default()
    };
    spec.validate()
        .map_err(|e| GridError::Format(format!("dump header invalid: {e}")))?;

    let n = spec.len();
    let mut psi = Vec::with_capacity(n);
    for _ in 0..n {
        let re = read_f64(&mut r)?;
        let im = read_f64(&mut r)?;
        psi.push(Complex64::new(re, im));
    }
    let mut extra = [0u8; 1];
    if r.read(&mut extra)? != 0 {
        return Err(GridError::Format("trailing bytes after field data".into()));
    }

    let mut state = GridState {
        psi,
        spec,
        norm: 0.0,
    };
    state.norm = state.norm_squared();
    state.validate()?;
    Ok((state, meta))
}

fn read_u32<R: Read>(r: &mut R) -> Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)
        .map_err(|_| GridError::Format("truncated dump".into()))?;
    Ok(u32::from_le_bytes(b))
}

fn read_f64<R: Read>(r: &mut R) -> Result<f64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)
        .map_err(|_| GridError::Format("truncated dump".into()))?;
    Ok(f64::from_le_bytes(b))
}

/// Write an observable trajectory as CSV with the canonical header.
pub fn write_trace(path: &Path, traj: &Trajectory) -> Result<()> {
    let tmp = path.with_extension("tmp");
    {
        let mut w = BufWriter::new(File::create(&tmp)?);
        writeln!(w, "t,E_mf,mu,P_left,P_c,P_right,peak_density,norm")?;
        for (t, o) in &traj.samples {
            writeln!(
                w,
                "{t:.9e},{:.9e},{:.9e},{:.9e},{:.9e},{:.9e},{:.9e},{:.9e}",
                o.e_mf, o.mu, o.p_left, o.p_c, o.p_right, o.peak_density, o.norm
            )?;
        }
        if traj.collapsed {
            writeln!(w, "# collapsed at t = {:.9e}", traj.t_final)?;
        }
        w.flush()?;
    }
    std::fs::rename(&tmp, path)?;
    Ok(())
}
