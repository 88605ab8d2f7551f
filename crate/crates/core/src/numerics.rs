//! Small numerical kernels shared by the physics modules.

use serde::Serialize;

use crate::scalar::{lit, Real};

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(bound = "T: Real")]
pub struct Integral<T> {
    pub value: T,
    pub abs_error: T,
    pub evals: usize,
    pub converged: bool,
}

const MAX_DEPTH: u32 = 48;
const MAX_EVALS: usize = 4_000_000;

/// Adaptive Simpson quadrature on `[a, b]`.
///
/// A panel is accepted when its Richardson error estimate is below
/// `max(abs_tol, rel_tol·|I|)`, with `I` a coarse estimate of the whole
/// integral, split proportionally across panels.
pub fn adaptive_simpson<T: Real, F: Fn(T) -> T>(
    f: F,
    a: T,
    b: T,
    abs_tol: T,
    rel_tol: T,
) -> Integral<T> {
    if a == b {
        return Integral {
            value: T::zero(),
            abs_error: T::zero(),
            evals: 0,
            converged: true,
        };
    }
    let half = lit::<T>(0.5);
    let m = (a + b) * half;
    let (fa, fm, fb) = (f(a), f(m), f(b));
    let whole = simpson(a, b, fa, fm, fb);
    let mut evals = 3;

    // a 16-panel composite rule gives the scale for the relative tolerance
    let n = 16;
    let hstep = (b - a) / lit(n as f64);
    let mut coarse = T::zero();
    for i in 0..n {
        let x0 = a + hstep * lit(i as f64);
        let x1 = x0 + hstep;
        let xm = (x0 + x1) * half;
        coarse = coarse + simpson(x0, x1, f(x0), f(xm), f(x1));
        evals += 3;
    }
    let tol = abs_tol.max(rel_tol * coarse.abs());

    let mut state = State {
        evals,
        err: T::zero(),
        converged: true,
    };
    let value = recurse(&f, a, b, fa, fm, fb, whole, tol, MAX_DEPTH, &mut state);
    Integral {
        value,
        abs_error: state.err,
        evals: state.evals,
        converged: state.converged && value.is_finite(),
    }
}

struct State<T> {
    evals: usize,
    err: T,
    converged: bool,
}

#[inline]
fn simpson<T: Real>(a: T, b: T, fa: T, fm: T, fb: T) -> T {
    (b - a) / lit(6.0) * (fa + lit::<T>(4.0) * fm + fb)
}

#[allow(clippy::too_many_arguments)]
fn recurse<T: Real, F: Fn(T) -> T>(
    f: &F,
    a: T,
    b: T,
    fa: T,
    fm: T,
    fb: T,
    whole: T,
    tol: T,
    depth: u32,
    st: &mut State<T>,
) -> T {
    let half = lit::<T>(0.5);
    let m = (a + b) * half;
    let lm = (a + m) * half;
    let rm = (m + b) * half;
    let flm = f(lm);
    let frm = f(rm);
    st.evals += 2;
    let left = simpson(a, m, fa, flm, fm);
    let right = simpson(m, b, fm, frm, fb);
    let delta = left + right - whole;
    let fifteen = lit::<T>(15.0);
    if !delta.is_finite() {
        st.converged = false;
        return left + right;
    }
    if delta.abs() <= fifteen * tol || m == a || m == b {
        st.err = st.err + (delta / fifteen).abs();
        return left + right + delta / fifteen;
    }
    if depth == 0 || st.evals >= MAX_EVALS {
        st.converged = false;
        st.err = st.err + (delta / fifteen).abs();
        return left + right + delta / fifteen;
    }
    recurse(f, a, m, fa, flm, fm, left, tol * half, depth - 1, st)
        + recurse(f, m, b, fm, frm, fb, right, tol * half, depth - 1, st)
}

/// Composite Simpson with `n` (even) panels.
pub fn composite_simpson<T: Real, F: Fn(T) -> T>(f: F, a: T, b: T, n: usize) -> T {
    let n = if n % 2 == 1 { n + 1 } else { n.max(2) };
    let h = (b - a) / lit(n as f64);
    let mut acc = f(a) + f(b);
    for i in 1..n {
        let w: T = if i % 2 == 1 { lit(4.0) } else { lit(2.0) };
        acc = acc + w * f(a + h * lit(i as f64));
    }
    acc * h / lit(3.0)
}

/// Golden-section minimisation of a unimodal function on `[a, b]`.
/// Returns `(x_min, f(x_min))`.
pub fn golden_section<T: Real, F: Fn(T) -> T>(f: F, mut a: T, mut b: T, x_tol: T) -> (T, T) {
    let invphi = lit::<T>((5f64.sqrt() - 1.0) / 2.0);
    let mut c = b - (b - a) * invphi;
    let mut d = a + (b - a) * invphi;
    let mut fc = f(c);
    let mut fd = f(d);
    let mut iters = 0;
    while (b - a).abs() > x_tol && iters < 200 {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - (b - a) * invphi;
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + (b - a) * invphi;
            fd = f(d);
        }
        iters += 1;
    }
    if fc < fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

/// Bisection for a sign change of `g` on `[a, b]`. Returns `None` without a bracket.
pub fn bisect<T: Real, F: Fn(T) -> T>(g: F, mut a: T, mut b: T, max_iter: usize) -> Option<T> {
    let mut ga = g(a);
    let gb = g(b);
    if ga == T::zero() {
        return Some(a);
    }
    if gb == T::zero() {
        return Some(b);
    }
    if (ga > T::zero()) == (gb > T::zero()) {
        return None;
    }
    let half = lit::<T>(0.5);
    for _ in 0..max_iter {
        let m = (a + b) * half;
        if m == a || m == b {
            break;
        }
        let gm = g(m);
        if gm == T::zero() {
            return Some(m);
        }
        if (gm > T::zero()) == (ga > T::zero()) {
            a = m;
            ga = gm;
        } else {
            b = m;
        }
    }
    Some((a + b) * half)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(bound = "T: Real")]
pub struct LineFit<T> {
    pub slope: T,
    pub intercept: T,
    pub slope_stderr: T,
}

/// Ordinary least squares `y ≈ slope·x + intercept`. Needs at least two distinct x.
pub fn linear_fit<T: Real>(xs: &[T], ys: &[T]) -> Option<LineFit<T>> {
    let n = xs.len();
    if n < 2 || n != ys.len() {
        return None;
    }
    let nf: T = lit(n as f64);
    let mx = xs.iter().fold(T::zero(), |a, &x| a + x) / nf;
    let my = ys.iter().fold(T::zero(), |a, &y| a + y) / nf;
    let mut sxx = T::zero();
    let mut sxy = T::zero();
    for (&x, &y) in xs.iter().zip(ys) {
        sxx = sxx + (x - mx) * (x - mx);
        sxy = sxy + (x - mx) * (y - my);
    }
    if sxx <= T::zero() {
        return None;
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let slope_stderr = if n > 2 {
        let rss = xs.iter().zip(ys).fold(T::zero(), |a, (&x, &y)| {
            let r = y - slope * x - intercept;
            a + r * r
        });
        (rss / lit((n - 2) as f64) / sxx).sqrt()
    } else {
        T::zero()
    };
    Some(LineFit {
        slope,
        intercept,
        slope_stderr,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simpson_polynomial_exact() {
        let r = adaptive_simpson(|x: f64| x * x * x - 2.0 * x, 0.0, 2.0, 1e-14, 0.0);
        assert!((r.value - 0.0).abs() < 1e-13);
        assert!(r.converged);
    }

    #[test]
    fn simpson_oscillatory() {
        let r = adaptive_simpson(|x: f64| (20.0 * x).sin(), 0.0, 1.0, 1e-12, 0.0);
        let exact = (1.0 - 20f64.cos()) / 20.0;
        assert!((r.value - exact).abs() < 1e-11);
    }

    #[test]
    fn simpson_relative_tolerance_on_steep_integrand() {
        let r = adaptive_simpson(|x: f64| x.powi(-4), 1e-4, 1.0, 0.0, 1e-12);
        let exact = (1e12 - 1.0) / 3.0;
        assert!(((r.value - exact) / exact).abs() < 1e-10);
    }

    #[test]
    fn golden_finds_parabola_vertex() {
        let (x, _) = golden_section(|x: f64| (x - 0.3).powi(2), -1.0, 2.0, 1e-10);
        assert!((x - 0.3).abs() < 1e-8);
    }

    #[test]
    fn bisect_root() {
        let r = bisect(|x: f64| x * x - 2.0, 0.0, 2.0, 200).unwrap();
        assert!((r - 2f64.sqrt()).abs() < 1e-15);
        assert!(bisect(|x: f64| x * x + 1.0, 0.0, 2.0, 10).is_none());
    }

    #[test]
    fn fit_exact_line() {
        let xs = [1.0, 2.0, 3.0, 4.0];
        let ys: Vec<f64> = xs.iter().map(|x| -0.25 * x + 3.0).collect();
        let f = linear_fit(&xs, &ys).unwrap();
        assert!((f.slope + 0.25).abs() < 1e-14);
        assert!(f.slope_stderr < 1e-14);
    }
}
