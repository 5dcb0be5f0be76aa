/// Classical fixed-step fourth-order Runge–Kutta on `[t0, t1]`.
///
/// `observe` is called with `(step index, t, state)` at the start point and
/// after every step, so it sees `n_steps + 1` states. Integration stops early
/// and returns `false` if a state component becomes non-finite.
pub fn rk4_fixed<const D: usize, F, O>(
    mut f: F,
    y0: [f64; D],
    t0: f64,
    t1: f64,
    n_steps: usize,
    mut observe: O,
) -> bool
where
    F: FnMut(f64, &[f64; D]) -> [f64; D],
    O: FnMut(usize, f64, &[f64; D]),
{
    let h = (t1 - t0) / n_steps as f64;
    let mut y = y0;
    observe(0, t0, &y);
    for step in 0..n_steps {
        let t = t0 + step as f64 * h;
        let k1 = f(t, &y);
        let k2 = f(t + 0.5 * h, &axpy(&y, 0.5 * h, &k1));
        let k3 = f(t + 0.5 * h, &axpy(&y, 0.5 * h, &k2));
        let k4 = f(t + h, &axpy(&y, h, &k3));
        for d in 0..D {
            y[d] += h / 6.0 * (k1[d] + 2.0 * k2[d] + 2.0 * k3[d] + k4[d]);
        }
        if y.iter().any(|v| !v.is_finite()) {
            return false;
        }
        // Last node lands exactly on t1.
        let t_next = if step + 1 == n_steps {
            t1
        } else {
            t0 + (step + 1) as f64 * h
        };
        observe(step + 1, t_next, &y);
    }
    true
}

fn axpy<const D: usize>(y: &[f64; D], a: f64, k: &[f64; D]) -> [f64; D] {
    let mut out = *y;
    for d in 0..D {
        out[d] += a * k[d];
    }
    out
}
