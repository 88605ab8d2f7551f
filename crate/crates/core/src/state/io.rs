use std::io::{self, Read, Write};
use std::sync::Arc;

use num_complex::Complex;

use crate::scalar::{lit, to_f64, Real, Vec3};
use crate::state::grid::{Grid, GridSpec};
use crate::state::wavefunction::{Representation, Wavefunction};

const MAGIC: &[u8; 4] = b"KWF1";

/// Binary layout, little endian:
/// `"KWF1"`, dim u32, n u32, L_box f64, representation u8 (0 position, 1 momentum),
/// center 3×f64, then `n^dim` pairs of (re, im) f64.
pub fn write_binary<T: Real, W: Write>(psi: &Wavefunction<T>, mut w: W) -> io::Result<()> {
    let spec = &psi.grid().spec;
    w.write_all(MAGIC)?;
    w.write_all(&(spec.dim as u32).to_le_bytes())?;
    w.write_all(&(spec.n as u32).to_le_bytes())?;
    w.write_all(&to_f64(spec.l_box).to_le_bytes())?;
    let rep = match psi.repr() {
        Representation::Position => 0u8,
        Representation::Momentum => 1u8,
    };
    w.write_all(&[rep])?;
    for c in spec.center.to_f64() {
        w.write_all(&c.to_le_bytes())?;
    }
    let mut buf = Vec::with_capacity(psi.data().len() * 16);
    for c in psi.data() {
        buf.extend_from_slice(&to_f64(c.re).to_le_bytes());
        buf.extend_from_slice(&to_f64(c.im).to_le_bytes());
    }
    w.write_all(&buf)
}

fn bad(msg: &str) -> io::Error {
    io::Error::new(io::ErrorKind::InvalidData, msg.to_string())
}

pub fn read_binary<T: Real, R: Read>(mut r: R) -> io::Result<Wavefunction<T>> {
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(bad("not a wavefunction snapshot"));
    }
    let mut b4 = [0u8; 4];
    let mut b8 = [0u8; 8];
    r.read_exact(&mut b4)?;
    let dim = u32::from_le_bytes(b4) as usize;
    r.read_exact(&mut b4)?;
    let n = u32::from_le_bytes(b4) as usize;
    r.read_exact(&mut b8)?;
    let l_box = f64::from_le_bytes(b8);
    let mut rep = [0u8; 1];
    r.read_exact(&mut rep)?;
    let repr = match rep[0] {
        0 => Representation::Position,
        1 => Representation::Momentum,
        _ => return Err(bad("unknown representation tag")),
    };
    let mut center = [0f64; 3];
    for c in &mut center {
        r.read_exact(&mut b8)?;
        *c = f64::from_le_bytes(b8);
    }
    let spec = GridSpec {
        dim,
        n,
        l_box: lit::<T>(l_box),
        center: Vec3::from_f64(center),
    };
    let grid = Grid::new(spec).map_err(|e| bad(&e.to_string()))?;
    let mut raw = vec![0u8; grid.len * 16];
    r.read_exact(&mut raw)?;
    let data = raw
        .chunks_exact(16)
        .map(|c| {
            let re = f64::from_le_bytes(c[..8].try_into().unwrap());
            let im = f64::from_le_bytes(c[8..].try_into().unwrap());
            Complex::new(lit::<T>(re), lit::<T>(im))
        })
        .collect();
    Wavefunction::new(grid, data, repr).map_err(|e| bad(&e.to_string()))
}

/// CSV line through the node nearest the origin along `axis`: `x, re, im, abs2`.
pub fn write_slice_csv<T: Real, W: Write>(
    psi: &Wavefunction<T>,
    axis: usize,
    mut w: W,
) -> io::Result<()> {
    let g: &Arc<Grid<T>> = psi.grid();
    let d = g.dim();
    if axis >= d {
        return Err(bad("slice axis out of range"));
    }
    let n = g.n();
    let nearest = |a: usize| {
        let xs = g.axis(a);
        (0..xs.len())
            .min_by(|&i, &j| xs[i].abs().partial_cmp(&xs[j].abs()).unwrap())
            .unwrap_or(0)
    };
    let mut base = [0usize; 3];
    for (a, b) in base.iter_mut().enumerate().take(d) {
        *b = nearest(a);
    }
    writeln!(w, "x,re,im,abs2")?;
    for j in 0..n {
        let mut idx = base;
        idx[axis] = j;
        let flat = idx[..d].iter().fold(0, |acc, &i| acc * n + i);
        let c = psi.data()[flat];
        writeln!(
            w,
            "{:.17e},{:.17e},{:.17e},{:.17e}",
            to_f64(g.axis(axis)[j]),
            to_f64(c.re),
            to_f64(c.im),
            to_f64(c.norm_sqr())
        )?;
    }
    Ok(())
}
