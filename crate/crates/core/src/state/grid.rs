use std::sync::Arc;

use num_complex::Complex;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::scalar::{lit, Real, Vec3};

/// Uniform periodic Cartesian grid. Axis `a` has nodes `center[a] − L + j·h`, `j = 0..n`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
#[serde(deny_unknown_fields)]
pub struct GridSpec<T> {
    pub dim: usize,
    pub n: usize,
    #[serde(rename = "L")]
    pub l_box: T,
    #[serde(default = "Vec3::zero")]
    pub center: Vec3<T>,
}

impl<T: Real> GridSpec<T> {
    pub fn new(dim: usize, n: usize, l_box: T) -> Self {
        GridSpec {
            dim,
            n,
            l_box,
            center: Vec3::zero(),
        }
    }

    pub fn with_center(mut self, center: Vec3<T>) -> Self {
        self.center = center;
        self
    }

    pub fn spacing(&self) -> T {
        lit::<T>(2.0) * self.l_box / lit(self.n as f64)
    }

    pub fn check(&self) -> Result<()> {
        if !(1..=3).contains(&self.dim) {
            return Err(invalid("dim", format!("must be 1, 2 or 3, got {}", self.dim)));
        }
        if self.n < 2 || !self.n.is_power_of_two() {
            return Err(invalid("n", format!("must be a power of two >= 2, got {}", self.n)));
        }
        if !self.l_box.is_finite() || self.l_box <= T::zero() {
            return Err(invalid("L", "must be finite and > 0"));
        }
        if !self.center.is_finite() {
            return Err(invalid("center", "must be finite"));
        }
        for a in self.dim..3 {
            if self.center[a] != T::zero() {
                return Err(invalid("center", "components beyond dim must be zero"));
            }
        }
        Ok(())
    }
}

pub struct Grid<T: Real> {
    pub spec: GridSpec<T>,
    pub h: T,
    pub dk: T,
    pub len: usize,
    xs: [Vec<T>; 3],
    ks: Vec<T>,
    fwd: Arc<dyn Fft<T>>,
    inv: Arc<dyn Fft<T>>,
}

impl<T: Real> std::fmt::Debug for Grid<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Grid").field("spec", &self.spec).finish()
    }
}

impl<T: Real> Grid<T> {
    pub fn new(spec: GridSpec<T>) -> Result<Arc<Self>> {
        spec.check()?;
        let n = spec.n;
        let h = spec.spacing();
        let dk = T::PI() / spec.l_box;
        let xs = std::array::from_fn(|a| {
            if a < spec.dim {
                (0..n)
                    .map(|j| spec.center[a] - spec.l_box + h * lit(j as f64))
                    .collect()
            } else {
                vec![T::zero()]
            }
        });
        let ks = (0..n)
            .map(|j| {
                let m = if j < n / 2 { j as f64 } else { j as f64 - n as f64 };
                dk * lit(m)
            })
            .collect();
        let mut planner = FftPlanner::new();
        Ok(Arc::new(Grid {
            len: n.pow(spec.dim as u32),
            fwd: planner.plan_fft_forward(n),
            inv: planner.plan_fft_inverse(n),
            spec,
            h,
            dk,
            xs,
            ks,
        }))
    }

    pub fn dim(&self) -> usize {
        self.spec.dim
    }

    pub fn n(&self) -> usize {
        self.spec.n
    }

    /// h^dim.
    pub fn cell(&self) -> T {
        self.h.powi(self.dim() as i32)
    }

    /// dk^dim.
    pub fn k_cell(&self) -> T {
        self.dk.powi(self.dim() as i32)
    }

    pub fn k_max(&self) -> T {
        T::PI() / self.h
    }

    /// Node coordinates along axis `a` (a single zero beyond `dim`).
    pub fn axis(&self, a: usize) -> &[T] {
        &self.xs[a]
    }

    /// Wavenumbers along one axis in FFT order.
    pub fn k_axis(&self) -> &[T] {
        &self.ks
    }

    /// Per-axis node indices of a flat index (row-major, axis 0 slowest).
    #[inline]
    pub fn unravel(&self, idx: usize) -> [usize; 3] {
        let n = self.spec.n;
        match self.spec.dim {
            1 => [idx, 0, 0],
            2 => [idx / n, idx % n, 0],
            _ => [idx / (n * n), (idx / n) % n, idx % n],
        }
    }

    #[inline]
    pub fn position(&self, idx: usize) -> Vec3<T> {
        let [i, j, k] = self.unravel(idx);
        let d = self.spec.dim;
        Vec3([
            self.xs[0][i],
            if d > 1 { self.xs[1][j] } else { T::zero() },
            if d > 2 { self.xs[2][k] } else { T::zero() },
        ])
    }

    #[inline]
    pub fn wavevector(&self, idx: usize) -> Vec3<T> {
        let [i, j, k] = self.unravel(idx);
        let d = self.spec.dim;
        Vec3([
            self.ks[i],
            if d > 1 { self.ks[j] } else { T::zero() },
            if d > 2 { self.ks[k] } else { T::zero() },
        ])
    }

    /// Lower corner `center − L` on each used axis.
    pub fn origin(&self) -> Vec3<T> {
        let mut o = Vec3::zero();
        for a in 0..self.dim() {
            o[a] = self.spec.center[a] - self.spec.l_box;
        }
        o
    }

    /// Radius of the largest ball about the coordinate origin that fits in the box,
    /// or zero when the origin lies outside.
    pub fn inscribed_radius(&self) -> T {
        let mut r = T::infinity();
        for a in 0..self.dim() {
            let lo = self.spec.center[a] - self.spec.l_box;
            let hi = self.spec.center[a] + self.spec.l_box;
            r = r.min(-lo).min(hi);
        }
        r.max(T::zero())
    }

    /// Evaluates `f` at every node, in parallel.
    pub fn map_positions<U: Send, F: Fn(Vec3<T>) -> U + Sync>(&self, f: F) -> Vec<U> {
        (0..self.len)
            .into_par_iter()
            .map(|i| f(self.position(i)))
            .collect()
    }

    pub fn map_wavevectors<U: Send, F: Fn(Vec3<T>) -> U + Sync>(&self, f: F) -> Vec<U> {
        (0..self.len)
            .into_par_iter()
            .map(|i| f(self.wavevector(i)))
            .collect()
    }

    /// Unnormalised in-place N-D FFT (`inverse` uses e^{+i}). `scratch` is resized as needed.
    pub fn fft(&self, data: &mut [Complex<T>], scratch: &mut Vec<Complex<T>>, inverse: bool) {
        assert_eq!(data.len(), self.len);
        let n = self.spec.n;
        let d = self.spec.dim;
        let plan = if inverse { &self.inv } else { &self.fwd };
        if scratch.len() != self.len {
            scratch.resize(self.len, Complex::new(T::zero(), T::zero()));
        }
        for a in 0..d {
            let inner = n.pow((d - 1 - a) as u32);
            if inner == 1 {
                lines_fft(plan, data, n);
                continue;
            }
            // move axis `a` last: scratch[(p, s, j)] = data[(p, j, s)]
            {
                let src = &*data;
                scratch.par_chunks_mut(n).enumerate().for_each(|(l, line)| {
                    let (p, s) = (l / inner, l % inner);
                    let base = p * n * inner + s;
                    for (j, v) in line.iter_mut().enumerate() {
                        *v = src[base + j * inner];
                    }
                });
            }
            lines_fft(plan, scratch, n);
            {
                let src = &*scratch;
                data.par_chunks_mut(inner).enumerate().for_each(|(c, row)| {
                    let (p, j) = (c / n, c % n);
                    for (s, v) in row.iter_mut().enumerate() {
                        *v = src[(p * inner + s) * n + j];
                    }
                });
            }
        }
    }
}

fn lines_fft<T: Real>(plan: &Arc<dyn Fft<T>>, data: &mut [Complex<T>], n: usize) {
    let lines = data.len() / n;
    let threads = rayon::current_num_threads().max(1);
    let per_task = (lines / (4 * threads)).max(1);
    data.par_chunks_mut(per_task * n).for_each(|chunk| {
        let mut scratch =
            vec![Complex::new(T::zero(), T::zero()); plan.get_inplace_scratch_len()];
        plan.process_with_scratch(chunk, &mut scratch);
    });
}
