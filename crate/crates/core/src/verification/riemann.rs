//! Fixed-step midpoint sums of `Pr_w` in linear space.
//!
//! Evaluates the same probability formulas as the mechanisms but with plain
//! products and quotients of `Exp` weights instead of log-sum-exp, over a
//! precomputed table of `e^{εx}` at the midpoints, so thousands of curves
//! can be integrated at 10⁴ panels each.

use crate::mechanisms::payment::{CurveParams, ProbabilityCurve};

/// Midpoints of `[0, v]` and their weights `e^{εx − shift}`.
pub(crate) struct MidpointTable {
    pub upper: f64,
    pub shift: f64,
    weights: Vec<f64>,
}

impl MidpointTable {
    pub(crate) fn new(epsilon: f64, upper: f64, shift: f64, panels: usize) -> Self {
        let h = upper / panels as f64;
        let weights = (0..panels)
            .map(|k| (epsilon * (k as f64 + 0.5) * h - shift).exp())
            .collect();
        MidpointTable {
            upper,
            shift,
            weights,
        }
    }

    fn h(&self) -> f64 {
        self.upper / self.weights.len() as f64
    }
}

/// `Σ_k Pr_w(x_k) · h`, or `None` for curves without linear-space form.
pub(crate) fn midpoint_integral(curve: &ProbabilityCurve, table: &MidpointTable) -> Option<f64> {
    let lin = |l: f64| (l - table.shift).exp();
    match curve.params() {
        CurveParams::Softmax { gamma, log_rest } => {
            let c = lin(log_rest);
            let sum: f64 = table.weights.iter().map(|&x| x / (x + c)).sum();
            Some(gamma * sum * table.h())
        }
        CurveParams::RecPath(steps) => {
            let k = steps.len();
            let [_, z_w, off_w] = steps[k - 1].map(lin);
            // Running subtree weight S, plus the numerator and denominator
            // of the path product kept apart so each point needs one division.
            let mut s: Vec<f64> = table.weights.iter().map(|&x| x + off_w).collect();
            let mut num: Vec<f64> = table.weights.clone();
            let mut den: Vec<f64> = table.weights.iter().map(|&x| x + z_w).collect();
            let mut c = 1.0;
            for j in (0..k - 1).rev() {
                let [x, z, off] = steps[j].map(lin);
                c *= z / (x + z);
                for ((sv, nv), dv) in s.iter_mut().zip(num.iter_mut()).zip(den.iter_mut()) {
                    let y = off + *sv;
                    *nv *= y;
                    *dv *= x + y + z;
                    *sv = x + y;
                }
            }
            let sum: f64 = num.iter().zip(&den).map(|(n, d)| n / d).sum();
            Some(c * sum * table.h())
        }
        CurveParams::Generic => None,
    }
}
