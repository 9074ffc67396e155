use super::C64;
use crate::error::{GeomError, Result};

/// Solve `g(x) = target` for strictly monotone `g` on `[lo, hi]`.
///
/// Illinois-modified regula falsi, falling back to bisection whenever the
/// secant step stalls. Stops when `|g(x) − target| ≤ tol` or the bracket
/// has collapsed to a few ulps.
pub fn invert_monotone(g: impl Fn(f64) -> f64, target: f64, lo: f64, hi: f64, tol: f64) -> Result<f64> {
    let (mut a, mut b) = (lo.min(hi), lo.max(hi));
    let mut fa = g(a) - target;
    let mut fb = g(b) - target;
    if !fa.is_finite() || !fb.is_finite() {
        return Err(GeomError::Evaluation("monotone inversion endpoint".into()));
    }
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() {
        return Err(GeomError::Bracketing { lo, hi });
    }
    let mut side = 0i8;
    for it in 0..400 {
        let mut x = (a * fb - b * fa) / (fb - fa);
        // every few rounds force a bisection so slow secant convergence cannot stall
        if !(x > a && x < b) || it % 8 == 7 {
            x = 0.5 * (a + b);
        }
        let fx = g(x) - target;
        if !fx.is_finite() {
            return Err(GeomError::Evaluation(format!("monotone inversion at {x}")));
        }
        if fx.abs() <= tol {
            return Ok(x);
        }
        if fx.signum() == fb.signum() {
            b = x;
            fb = fx;
            if side == 1 {
                fa *= 0.5;
            }
            side = 1;
        } else {
            a = x;
            fa = fx;
            if side == -1 {
                fb *= 0.5;
            }
            side = -1;
        }
        if b - a <= 4.0 * f64::EPSILON * a.abs().max(b.abs()).max(f64::MIN_POSITIVE) {
            return Ok(if fa.abs() < fb.abs() { a } else { b });
        }
    }
    Ok(0.5 * (a + b))
}

fn horner(c: &[f64; 4], y: C64) -> (C64, C64) {
    let mut p = C64::new(c[0], 0.0);
    let mut dp = C64::new(0.0, 0.0);
    for &k in &c[1..] {
        dp = dp * y + p;
        p = p * y + k;
    }
    (p, dp)
}

fn polish(c: &[f64; 4], mut y: C64) -> C64 {
    let mut best = horner(c, y).0.norm();
    for _ in 0..8 {
        let (p, dp) = horner(c, y);
        if dp.norm() == 0.0 {
            break;
        }
        let cand = y - p / dp;
        let r = horner(c, cand).0.norm();
        if !(r < best) {
            break;
        }
        best = r;
        y = cand;
    }
    y
}

/// All three roots of `c3·y³ + c2·y² + c1·y + c0`.
///
/// One real root is found by bracketing, the remaining quadratic is solved
/// in closed form, and every root is Newton-polished against the original
/// cubic. Non-real roots come back as an exact conjugate pair.
pub fn solve_cubic(c3: f64, c2: f64, c1: f64, c0: f64) -> Result<[C64; 3]> {
    if c3 == 0.0 {
        return Err(GeomError::Degree);
    }
    if ![c3, c2, c1, c0].iter().all(|v| v.is_finite()) {
        return Err(GeomError::Evaluation("cubic coefficients".into()));
    }
    let (a2, a1, a0) = (c2 / c3, c1 / c3, c0 / c3);
    let monic = [1.0, a2, a1, a0];
    let p = |y: f64| ((y + a2) * y + a1) * y + a0;

    let r0 = if a0 == 0.0 {
        0.0
    } else {
        let bound = 1.0 + a2.abs().max(a1.abs()).max(a0.abs());
        invert_monotone_free(p, -bound, bound)
    };
    let r0 = polish(&monic, C64::new(r0, 0.0)).re;

    // y³ + a2 y² + a1 y + a0 = (y − r0)(y² + b y + q)
    let b = a2 + r0;
    let q = if r0.abs() > 1.0 && r0 != 0.0 { -a0 / r0 } else { a1 + r0 * b };
    let disc = b * b - 4.0 * q;
    let (r1, r2) = if disc >= 0.0 {
        let s = -0.5 * (b + b.signum() * disc.sqrt());
        let (x1, x2) = if s == 0.0 { (0.0, -b) } else { (s, q / s) };
        (C64::new(polish(&monic, C64::new(x1, 0.0)).re, 0.0), C64::new(polish(&monic, C64::new(x2, 0.0)).re, 0.0))
    } else {
        let z = polish(&monic, C64::new(-0.5 * b, 0.5 * (-disc).sqrt()));
        let z = C64::new(z.re, z.im.abs());
        (z, z.conj())
    };
    let mut roots = [C64::new(r0, 0.0), r1, r2];
    roots.sort_by(|x, y| x.re.total_cmp(&y.re).then(x.im.total_cmp(&y.im)));
    Ok(roots)
}

/// Bisection for a sign change of an odd-degree polynomial on `[lo, hi]`,
/// without assuming monotonicity.
fn invert_monotone_free(p: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let mut flo = p(lo);
    for _ in 0..200 {
        let m = 0.5 * (lo + hi);
        if m <= lo || m >= hi {
            break;
        }
        let fm = p(m);
        if fm == 0.0 {
            return m;
        }
        if fm.signum() == flo.signum() {
            lo = m;
            flo = fm;
        } else {
            hi = m;
        }
    }
    0.5 * (lo + hi)
}
