//! Action of exp(−iA·dt) on a vector for Hermitian A available only as a
//! matrix-vector product. Truncated Taylor series on substeps with
//! ‖A‖·dt/s ≤ 1/2, summed until the next term drops below round-off.

use num_complex::Complex64;

use crate::basis::l2_norm;

const SUBSTEP_NORM: f64 = 0.5;
const MAX_TERMS: usize = 40;

#[derive(Default)]
pub(crate) struct Workspace {
    term: Vec<Complex64>,
    next: Vec<Complex64>,
}

pub(crate) fn expm_action<F>(apply: F, norm_bound: f64, dt: f64, v: &mut [Complex64], ws: &mut Workspace)
where
    F: Fn(&[Complex64], &mut [Complex64]),
{
    let n = v.len();
    ws.term.resize(n, Complex64::new(0.0, 0.0));
    ws.next.resize(n, Complex64::new(0.0, 0.0));
    let substeps = ((norm_bound * dt.abs()) / SUBSTEP_NORM).ceil().max(1.0) as usize;
    let tau = dt / substeps as f64;
    for _ in 0..substeps {
        ws.term.copy_from_slice(v);
        let scale = l2_norm(v).max(f64::MIN_POSITIVE);
        for k in 1..=MAX_TERMS {
            apply(&ws.term, &mut ws.next);
            let c = Complex64::new(0.0, -tau / k as f64);
            for (t, x) in ws.term.iter_mut().zip(&ws.next) {
                *t = c * x;
            }
            for (a, t) in v.iter_mut().zip(&ws.term) {
                *a += t;
            }
            if l2_norm(&ws.term) <= 1e-17 * scale {
                break;
            }
        }
    }
}
