//! Dormand–Prince 5(4) steps for autonomous systems.

pub type Rhs<'a> = dyn Fn(&[f64]) -> Option<Vec<f64>> + 'a;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

pub struct Step {
    pub y: Vec<f64>,
    pub err: Vec<f64>,
    /// Right-hand side at the new state (first stage of the next step).
    pub k7: Vec<f64>,
}

fn comb(y: &[f64], h: f64, terms: &[(f64, &[f64])]) -> Vec<f64> {
    let mut out = y.to_vec();
    for (c, k) in terms {
        let ch = c * h;
        for (o, ki) in out.iter_mut().zip(k.iter()) {
            *o += ch * ki;
        }
    }
    out
}

/// One step of size `h` from `y` with `k1 = f(y)`; `None` if the right-hand
/// side could not be evaluated.
pub fn dopri5(f: &Rhs, y: &[f64], k1: &[f64], h: f64) -> Option<Step> {
    let k2 = f(&comb(y, h, &[(A21, k1)]))?;
    let k3 = f(&comb(y, h, &[(A31, k1), (A32, &k2)]))?;
    let k4 = f(&comb(y, h, &[(A41, k1), (A42, &k2), (A43, &k3)]))?;
    let k5 = f(&comb(y, h, &[(A51, k1), (A52, &k2), (A53, &k3), (A54, &k4)]))?;
    let k6 = f(&comb(y, h, &[(A61, k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]))?;
    let y_new = comb(y, h, &[(B1, k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)]);
    if !y_new.iter().all(|c| c.is_finite()) {
        return None;
    }
    let k7 = f(&y_new)?;
    let err = (0..y.len())
        .map(|i| h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]))
        .collect();
    Some(Step { y: y_new, err, k7 })
}

/// Weighted RMS norm of the local error.
pub fn error_norm(err: &[f64], y0: &[f64], y1: &[f64], atol: f64, rtol: f64) -> f64 {
    let n = err.len() as f64;
    (err.iter()
        .zip(y0.iter().zip(y1))
        .map(|(e, (a, b))| {
            let sc = atol + rtol * a.abs().max(b.abs());
            (e / sc) * (e / sc)
        })
        .sum::<f64>()
        / n)
        .sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn harmonic_oscillator_is_fifth_order() {
        let f = |y: &[f64]| Some(vec![y[1], -y[0]]);
        let run = |h: f64| {
            let mut y = vec![1.0, 0.0];
            let n = (1.0 / h).round() as usize;
            for _ in 0..n {
                let k1 = f(&y).unwrap();
                y = dopri5(&f, &y, &k1, h).unwrap().y;
            }
            (y[0] - 1f64.cos()).abs()
        };
        let (e1, e2) = (run(0.1), run(0.05));
        let order = (e1 / e2).log2();
        assert!(order > 4.5, "observed order {order}");
    }
}
