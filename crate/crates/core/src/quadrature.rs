//! One-dimensional quadrature for payment integrals.

/// Stopping rule for [`integrate`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadratureOptions {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub min_panels: usize,
    pub max_panels: usize,
}

impl Default for QuadratureOptions {
    fn default() -> Self {
        QuadratureOptions {
            rel_tol: 1e-8,
            abs_tol: 0.0,
            min_panels: 64,
            max_panels: 1 << 20,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Integral {
    pub value: f64,
    pub panels: usize,
    pub converged: bool,
}

/// Composite Simpson's rule on `[a, b]`, doubling the panel count (and
/// reusing every earlier sample) until two successive estimates agree to
/// `rel_tol`, then extrapolated once.
pub fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64, opts: &QuadratureOptions) -> Integral {
    if b == a {
        return Integral {
            value: 0.0,
            panels: 0,
            converged: true,
        };
    }
    let h0 = b - a;
    let mut n = 1usize;
    let edge_sum = 0.5 * (f(a) + f(b));
    let mut interior = 0.0;
    let mut trap = edge_sum * h0;
    let mut simpson = f64::NAN;
    loop {
        // Add the midpoints of the current n panels.
        let h = h0 / n as f64;
        let mut mids = 0.0;
        for k in 0..n {
            mids += f(a + (k as f64 + 0.5) * h);
        }
        interior += mids;
        n *= 2;
        let trap_next = (edge_sum + interior) * (h0 / n as f64);
        let s = (4.0 * trap_next - trap) / 3.0;
        trap = trap_next;
        if n >= opts.min_panels {
            let delta = (s - simpson).abs();
            if delta <= opts.rel_tol * s.abs() || delta <= opts.abs_tol {
                // One Richardson step on the last two Simpson estimates.
                return Integral {
                    value: s + (s - simpson) / 15.0,
                    panels: n,
                    converged: true,
                };
            }
        }
        simpson = s;
        if n >= opts.max_panels || !s.is_finite() {
            return Integral {
                value: s,
                panels: n,
                converged: false,
            };
        }
    }
}
