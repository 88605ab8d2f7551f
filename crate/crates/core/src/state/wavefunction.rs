use std::sync::Arc;

use num_complex::Complex;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::scalar::{lit, Real, Vec3};
use crate::state::grid::Grid;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Representation {
    Position,
    Momentum,
}

/// Complex field on a grid. Momentum data is stored in FFT order and normalised as the
/// continuum transform `ψ̂(k) = (2π)^{−d/2} ∫ e^{−ik·x} ψ(x) dx`.
#[derive(Clone, Debug)]
pub struct Wavefunction<T: Real> {
    grid: Arc<Grid<T>>,
    data: Vec<Complex<T>>,
    repr: Representation,
}

impl<T: Real> Wavefunction<T> {
    pub fn new(grid: Arc<Grid<T>>, data: Vec<Complex<T>>, repr: Representation) -> Result<Self> {
        if data.len() != grid.len {
            return Err(invalid(
                "data",
                format!("length {} does not match grid size {}", data.len(), grid.len),
            ));
        }
        Ok(Wavefunction { grid, data, repr })
    }

    pub fn zeros(grid: Arc<Grid<T>>) -> Self {
        let data = vec![Complex::new(T::zero(), T::zero()); grid.len];
        Wavefunction {
            grid,
            data,
            repr: Representation::Position,
        }
    }

    /// Samples `f(x)` in the position representation.
    pub fn from_fn<F: Fn(Vec3<T>) -> Complex<T> + Sync>(grid: Arc<Grid<T>>, f: F) -> Self {
        let data = grid.map_positions(f);
        Wavefunction {
            grid,
            data,
            repr: Representation::Position,
        }
    }

    pub fn grid(&self) -> &Arc<Grid<T>> {
        &self.grid
    }

    pub fn repr(&self) -> Representation {
        self.repr
    }

    pub fn data(&self) -> &[Complex<T>] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [Complex<T>] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<Complex<T>> {
        self.data
    }

    /// Measure of one cell in the current representation.
    pub fn measure(&self) -> T {
        match self.repr {
            Representation::Position => self.grid.cell(),
            Representation::Momentum => self.grid.k_cell(),
        }
    }

    pub fn norm_sq(&self) -> T {
        sum_sq(&self.data) * self.measure()
    }

    pub fn norm(&self) -> T {
        self.norm_sq().sqrt()
    }

    pub fn normalize(&mut self) -> Result<()> {
        let n = self.norm();
        if !(n > T::zero()) || !n.is_finite() {
            return Err(Error::Numerical(format!("cannot normalise field with norm {n}")));
        }
        let s = n.recip();
        self.data.par_iter_mut().for_each(|v| *v = *v * s);
        Ok(())
    }

    pub fn normalized(mut self) -> Result<Self> {
        self.normalize()?;
        Ok(self)
    }

    pub fn scale(&mut self, s: Complex<T>) {
        self.data.par_iter_mut().for_each(|v| *v = *v * s);
    }

    fn same_grid(&self, other: &Self) -> Result<()> {
        if !Arc::ptr_eq(&self.grid, &other.grid) && self.grid.spec != other.grid.spec {
            return Err(invalid("grid", "wavefunctions live on different grids"));
        }
        if self.repr != other.repr {
            return Err(invalid("repr", "wavefunctions are in different representations"));
        }
        Ok(())
    }

    /// ⟨self, other⟩ with the grid measure (antilinear in `self`).
    pub fn inner(&self, other: &Self) -> Result<Complex<T>> {
        self.same_grid(other)?;
        let mut acc = Complex::new(T::zero(), T::zero());
        for (a, b) in self.data.iter().zip(&other.data) {
            acc = acc + a.conj() * b;
        }
        Ok(acc * self.measure())
    }

    /// ‖self − other‖.
    pub fn distance(&self, other: &Self) -> Result<T> {
        self.same_grid(other)?;
        let mut acc = T::zero();
        for (a, b) in self.data.iter().zip(&other.data) {
            acc = acc + (a - b).norm_sqr();
        }
        Ok((acc * self.measure()).sqrt())
    }

    pub fn to_momentum(&self) -> Self {
        match self.repr {
            Representation::Momentum => self.clone(),
            Representation::Position => {
                let mut out = self.clone();
                out.transform(false);
                out
            }
        }
    }

    pub fn to_position(&self) -> Self {
        match self.repr {
            Representation::Position => self.clone(),
            Representation::Momentum => {
                let mut out = self.clone();
                out.transform(true);
                out
            }
        }
    }

    pub fn into_momentum(mut self) -> Self {
        if self.repr == Representation::Position {
            self.transform(false);
        }
        self
    }

    pub fn into_position(mut self) -> Self {
        if self.repr == Representation::Momentum {
            self.transform(true);
        }
        self
    }

    fn transform(&mut self, inverse: bool) {
        let g = self.grid.clone();
        let d = g.dim() as i32;
        let two_pi = T::TAU();
        let x0 = g.origin();
        let mut scratch = Vec::new();
        if inverse {
            let phase = |k: Vec3<T>| {
                let a = k.dot(x0);
                Complex::new(a.cos(), a.sin())
            };
            let scale = two_pi.powf(lit::<T>(0.5) * lit(d as f64))
                / (g.cell() * lit(g.len as f64));
            self.data.par_iter_mut().enumerate().for_each(|(i, v)| {
                *v = *v * phase(g.wavevector(i)) * scale;
            });
            g.fft(&mut self.data, &mut scratch, true);
            self.repr = Representation::Position;
        } else {
            g.fft(&mut self.data, &mut scratch, false);
            let scale = g.cell() / two_pi.powf(lit::<T>(0.5) * lit(d as f64));
            self.data.par_iter_mut().enumerate().for_each(|(i, v)| {
                let a = -g.wavevector(i).dot(x0);
                *v = *v * Complex::new(a.cos(), a.sin()) * scale;
            });
            self.repr = Representation::Momentum;
        }
    }

    /// ⟨|x|²⟩ / ‖ψ‖² style moments need position data; returns the expectation of `f(x)`
    /// weighted by |ψ|², without normalising.
    pub fn position_moment<F: Fn(Vec3<T>) -> T + Sync>(&self, f: F) -> Result<T> {
        self.require(Representation::Position)?;
        Ok(weighted_sum(&self.data, |i| f(self.grid.position(i))) * self.grid.cell())
    }

    /// Same as [`position_moment`](Self::position_moment) over wavevectors.
    pub fn momentum_moment<F: Fn(Vec3<T>) -> T + Sync>(&self, f: F) -> Result<T> {
        self.require(Representation::Momentum)?;
        Ok(weighted_sum(&self.data, |i| f(self.grid.wavevector(i))) * self.grid.k_cell())
    }

    pub fn require(&self, repr: Representation) -> Result<()> {
        if self.repr != repr {
            return Err(invalid("repr", format!("expected {repr:?} representation")));
        }
        Ok(())
    }

    /// Copies this position-space field onto another grid with the same spacing whose
    /// nodes coincide with ours; nodes outside our box are set to zero.
    pub fn embed(&self, target: Arc<Grid<T>>) -> Result<Self> {
        self.require(Representation::Position)?;
        let src = &self.grid;
        if target.dim() != src.dim() {
            return Err(invalid("grid", "embedding needs equal dimensions"));
        }
        let h = src.h;
        if (target.h - h).abs() > h * lit(1e-9) {
            return Err(invalid("grid", "embedding needs equal spacing"));
        }
        let d = src.dim();
        let mut offs = [0i64; 3];
        for a in 0..d {
            let shift = (src.axis(a)[0] - target.axis(a)[0]) / h;
            let r = shift.round();
            if (shift - r).abs() > lit(1e-6) {
                return Err(invalid("grid", "embedding needs aligned nodes"));
            }
            offs[a] = r.to_i64().unwrap_or(0);
        }
        let n_src = src.n() as i64;
        let data = (0..target.len)
            .into_par_iter()
            .map(|i| {
                let idx = target.unravel(i);
                let mut flat = 0i64;
                for a in 0..d {
                    let j = idx[a] as i64 - offs[a];
                    if j < 0 || j >= n_src {
                        return Complex::new(T::zero(), T::zero());
                    }
                    flat = flat * n_src + j;
                }
                self.data[flat as usize]
            })
            .collect();
        Ok(Wavefunction {
            grid: target,
            data,
            repr: Representation::Position,
        })
    }

    /// Trigonometric interpolation onto a grid covering the same box with a different
    /// number of nodes: Fourier modes present on both grids are copied, the rest are
    /// zero. Returns the result in the representation of `self`.
    pub fn resample(&self, target: Arc<Grid<T>>) -> Result<Self> {
        let (a, b) = (&self.grid.spec, &target.spec);
        if a.dim != b.dim || a.l_box != b.l_box || a.center != b.center {
            return Err(invalid("grid", "resampling needs the same box"));
        }
        let m = self.to_momentum();
        let (ns, nt) = (a.n, b.n);
        let d = a.dim;
        // FFT-order index of integer mode j on an n-point axis, if it exists there
        let slot = |j: i64, n: usize| -> Option<usize> {
            let h = (n / 2) as i64;
            (j >= -h && j < h).then(|| if j >= 0 { j as usize } else { (j + n as i64) as usize })
        };
        let mode = |i: usize, n: usize| -> i64 {
            if i < n / 2 { i as i64 } else { i as i64 - n as i64 }
        };
        let mut data = vec![Complex::new(T::zero(), T::zero()); target.len];
        for (i, v) in m.data.iter().enumerate() {
            let idx = self.grid.unravel(i);
            let mut flat = 0usize;
            let mut ok = true;
            for ax in 0..d {
                match slot(mode(idx[ax], ns), nt) {
                    Some(s) => flat = flat * nt + s,
                    None => ok = false,
                }
            }
            if ok {
                data[flat] = *v;
            }
        }
        let out = Wavefunction {
            grid: target,
            data,
            repr: Representation::Momentum,
        };
        Ok(match self.repr {
            Representation::Momentum => out,
            Representation::Position => out.into_position(),
        })
    }
}

pub(crate) fn sum_sq<T: Real>(data: &[Complex<T>]) -> T {
    data.iter().fold(T::zero(), |a, v| a + v.norm_sqr())
}

fn weighted_sum<T: Real, F: Fn(usize) -> T>(data: &[Complex<T>], w: F) -> T {
    data.iter()
        .enumerate()
        .fold(T::zero(), |a, (i, v)| a + v.norm_sqr() * w(i))
}
