//! Small dense BFGS with central finite-difference gradients and
//! backtracking line search.

#[derive(Debug, Clone, Copy)]
pub(crate) struct BfgsOptions {
    pub max_iter: usize,
    pub grad_tol: f64,
    pub rel_decrease_tol: f64,
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct BfgsOutcome<const N: usize> {
    pub x: [f64; N],
    pub f: f64,
    pub iterations: usize,
    pub converged: bool,
}

fn gradient<const N: usize>(f: &impl Fn(&[f64; N]) -> f64, x: &[f64; N], fx: f64) -> [f64; N] {
    let mut g = [0.0; N];
    for k in 0..N {
        let h = 1e-6 * x[k].abs().max(1.0);
        let mut xp = *x;
        let mut xm = *x;
        xp[k] += h;
        xm[k] -= h;
        let (fp, fm) = (f(&xp), f(&xm));
        g[k] = match (fp.is_finite(), fm.is_finite()) {
            (true, true) => (fp - fm) / (2.0 * h),
            (true, false) => (fp - fx) / h,
            (false, true) => (fx - fm) / h,
            (false, false) => f64::NAN,
        };
    }
    g
}

fn dot<const N: usize>(a: &[f64; N], b: &[f64; N]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn minimize<const N: usize>(
    f: impl Fn(&[f64; N]) -> f64,
    x0: [f64; N],
    opts: BfgsOptions,
) -> BfgsOutcome<N> {
    let mut x = x0;
    let mut fx = f(&x);
    if !fx.is_finite() {
        return BfgsOutcome { x, f: fx, iterations: 0, converged: false };
    }
    let mut g = gradient(&f, &x, fx);
    let mut h_inv = [[0.0; N]; N];
    for (k, row) in h_inv.iter_mut().enumerate() {
        row[k] = 1.0;
    }
    let mut first_step = true;
    for iter in 0..opts.max_iter {
        let gnorm = dot(&g, &g).sqrt();
        if !gnorm.is_finite() {
            return BfgsOutcome { x, f: fx, iterations: iter, converged: false };
        }
        if gnorm < opts.grad_tol {
            return BfgsOutcome { x, f: fx, iterations: iter, converged: true };
        }
        let mut p = [0.0; N];
        for r in 0..N {
            p[r] = -dot(&h_inv[r], &g);
        }
        let mut slope = dot(&p, &g);
        if slope >= 0.0 {
            // lost descent: restart from steepest descent
            for (k, row) in h_inv.iter_mut().enumerate() {
                *row = [0.0; N];
                row[k] = 1.0;
            }
            p = g.map(|v| -v);
            slope = -gnorm * gnorm;
        }
        let mut step = 1.0;
        let mut accepted = None;
        for _ in 0..60 {
            let mut xn = x;
            for k in 0..N {
                xn[k] += step * p[k];
            }
            let fxn = f(&xn);
            if fxn.is_finite() && fxn <= fx + 1e-4 * step * slope {
                accepted = Some((xn, fxn));
                break;
            }
            step *= 0.5;
        }
        let Some((xn, fxn)) = accepted else {
            return BfgsOutcome { x, f: fx, iterations: iter, converged: false };
        };
        let gn = gradient(&f, &xn, fxn);
        let s: [f64; N] = std::array::from_fn(|k| xn[k] - x[k]);
        let y: [f64; N] = std::array::from_fn(|k| gn[k] - g[k]);
        let rel_decrease = (fx - fxn) / fx.abs().max(f64::MIN_POSITIVE);
        x = xn;
        g = gn;
        let previous = fx;
        fx = fxn;
        if rel_decrease < opts.rel_decrease_tol && previous >= fxn {
            let gnorm = dot(&g, &g).sqrt();
            return BfgsOutcome {
                x,
                f: fx,
                iterations: iter + 1,
                converged: gnorm.is_finite(),
            };
        }
        let sy = dot(&s, &y);
        if sy > 1e-300 {
            if first_step {
                let scale = sy / dot(&y, &y);
                for (k, row) in h_inv.iter_mut().enumerate() {
                    *row = [0.0; N];
                    row[k] = scale;
                }
                first_step = false;
            }
            let rho = 1.0 / sy;
            let hy: [f64; N] = std::array::from_fn(|r| dot(&h_inv[r], &y));
            let yhy = dot(&y, &hy);
            for r in 0..N {
                for c in 0..N {
                    h_inv[r][c] += -rho * (hy[r] * s[c] + s[r] * hy[c]) + (rho * rho * yhy + rho) * s[r] * s[c];
                }
            }
        }
    }
    BfgsOutcome { x, f: fx, iterations: opts.max_iter, converged: false }
}
