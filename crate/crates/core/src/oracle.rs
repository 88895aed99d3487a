//! Brute-force references.
//!
//! The full-space Hamiltonian is built term by term from Pauli strings on
//! the 2^N computational basis, with no knowledge of sectors or ranking. It
//! exists to check the sector machinery and is limited to small rings.
//! Bit `s` of a basis index is set when site `s` is spin-up.

use faer::{ColRef, Mat};
use num_complex::Complex64;

use crate::basis::RingSpec;
use crate::disorder::DisorderRealization;
use crate::error::{domain, Error, Result};
use crate::propagator::Segment;

/// Largest ring accepted by the full-space oracle.
pub const FULL_SPACE_LIMIT: usize = 10;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Pauli {
    X,
    Y,
    Z,
}

/// Applies a product of single-site Paulis to one basis state.
fn apply_string(ops: &[(usize, Pauli)], state: usize) -> (usize, Complex64) {
    let i = Complex64::new(0.0, 1.0);
    let mut s = state;
    let mut amp = Complex64::new(1.0, 0.0);
    // rightmost operator acts first
    for &(site, p) in ops.iter().rev() {
        let up = s >> site & 1 == 1;
        match p {
            Pauli::X => s ^= 1 << site,
            Pauli::Y => {
                amp *= if up { i } else { -i };
                s ^= 1 << site;
            }
            Pauli::Z => {
                if !up {
                    amp = -amp;
                }
            }
        }
    }
    (s, amp)
}

fn add_term(m: &mut Mat<Complex64>, coeff: Complex64, ops: &[(usize, Pauli)]) {
    for col in 0..m.ncols() {
        let (row, amp) = apply_string(ops, col);
        m[(row, col)] += coeff * amp;
    }
}

/// H(θ) on all 2^N states.
pub fn full_space_hamiltonian(ring: &RingSpec, disorder: &DisorderRealization, theta: f64) -> Result<Mat<Complex64>> {
    ring.validate()?;
    let n = ring.n_sites;
    if n > FULL_SPACE_LIMIT {
        return Err(domain(format!(
            "full-space oracle refused for n_sites={n} (> {FULL_SPACE_LIMIT})"
        )));
    }
    if disorder.n_sites() != n {
        return Err(domain("disorder length does not match the ring"));
    }
    let dim = 1usize << n;
    let mut m = Mat::<Complex64>::zeros(dim, dim);
    let phase = Complex64::from_polar(1.0, theta);
    let quarter = Complex64::new(0.25, 0.0);
    let i = Complex64::new(0.0, 1.0);
    for a in 0..n {
        let b = (a + 1) % n;
        let j = ring.hop_scale * (ring.coupling + disorder.eta()[a]);
        // σ⁺_a σ⁻_b = (X_a X_b + Y_a Y_b + i Y_a X_b − i X_a Y_b) / 4
        let forward = -j * phase * quarter;
        let backward = -j * phase.conj() * quarter;
        add_term(&mut m, forward, &[(a, Pauli::X), (b, Pauli::X)]);
        add_term(&mut m, forward, &[(a, Pauli::Y), (b, Pauli::Y)]);
        add_term(&mut m, forward * i, &[(a, Pauli::Y), (b, Pauli::X)]);
        add_term(&mut m, -forward * i, &[(a, Pauli::X), (b, Pauli::Y)]);
        // σ⁻_a σ⁺_b = (X_a X_b + Y_a Y_b − i Y_a X_b + i X_a Y_b) / 4
        add_term(&mut m, backward, &[(a, Pauli::X), (b, Pauli::X)]);
        add_term(&mut m, backward, &[(a, Pauli::Y), (b, Pauli::Y)]);
        add_term(&mut m, -backward * i, &[(a, Pauli::Y), (b, Pauli::X)]);
        add_term(&mut m, backward * i, &[(a, Pauli::X), (b, Pauli::Y)]);
    }
    for a in 0..n {
        let field = Complex64::new(ring.b_field + disorder.delta()[a], 0.0);
        add_term(&mut m, field, &[(a, Pauli::Z)]);
    }
    Ok(m)
}

/// Evolves a full-space vector through constant-phase segments by dense
/// diagonalization of the 2^N matrix. Returns the state after each segment.
pub fn full_space_evolve_oracle(
    psi: &[Complex64],
    ring: &RingSpec,
    disorder: &DisorderRealization,
    segments: &[Segment],
) -> Result<Vec<Vec<Complex64>>> {
    let dim = 1usize << ring.n_sites.min(FULL_SPACE_LIMIT);
    if psi.len() != dim {
        return Err(domain(format!("vector length {} is not 2^{}", psi.len(), ring.n_sites)));
    }
    let mut state = psi.to_vec();
    let mut out = Vec::with_capacity(segments.len());
    for seg in segments {
        let h = full_space_hamiltonian(ring, disorder, seg.theta)?;
        let evd = h
            .self_adjoint_eigen(faer::Side::Lower)
            .map_err(|e| Error::Numeric {
                n_magnons: usize::MAX,
                theta: seg.theta,
                message: format!("full-space eigendecomposition failed: {e:?}"),
            })?;
        let v = evd.U();
        let coeffs = v.adjoint() * ColRef::from_slice(&state);
        let rotated: Vec<Complex64> = coeffs
            .iter()
            .zip(evd.S().column_vector().iter())
            .map(|(c, e)| c * Complex64::from_polar(1.0, -e.re * seg.duration))
            .collect();
        let next = v * ColRef::from_slice(&rotated);
        state = next.iter().copied().collect();
        out.push(state.clone());
    }
    Ok(out)
}

/// ⟨ψ|Σσᶻ|ψ⟩ for a full-space vector.
pub fn full_space_magnetization(psi: &[Complex64]) -> f64 {
    let n = psi.len().trailing_zeros();
    psi.iter()
        .enumerate()
        .map(|(s, a)| a.norm_sqr() * (2.0 * s.count_ones() as f64 - n as f64))
        .sum()
}

/// Bessel function of the first kind J_order(x) for integer order, by
/// backward recurrence normalized with J₀ + 2ΣJ₂ₖ = 1.
pub fn bessel_j(order: i64, x: f64) -> f64 {
    let n = order.unsigned_abs() as usize;
    let sign = if order < 0 && n % 2 == 1 { -1.0 } else { 1.0 };
    if x == 0.0 {
        return if n == 0 { 1.0 } else { 0.0 };
    }
    let ax = x.abs();
    let top = n.max(ax as usize);
    let mut start = top + 30 + (40.0 * top as f64).sqrt() as usize;
    start += start % 2;
    let (mut above, mut here) = (0.0f64, 1e-300f64);
    let mut wanted = 0.0;
    let mut even_sum = 0.0;
    for k in (1..=start).rev() {
        let below = 2.0 * k as f64 / ax * here - above;
        above = here;
        here = below;
        if here.abs() > 1e250 {
            here *= 1e-250;
            above *= 1e-250;
            wanted *= 1e-250;
            even_sum *= 1e-250;
        }
        let idx = k - 1;
        if idx == n {
            wanted = here;
        }
        if idx % 2 == 0 && idx > 0 {
            even_sum += here;
        }
    }
    let norm = here + 2.0 * even_sum;
    let mut value = wanted / norm;
    if x < 0.0 && n % 2 == 1 {
        value = -value;
    }
    sign * value
}

/// Single-magnon amplitude at displacement d on an infinite clean chain with
/// unit coupling: i^d J_d(2τ).
pub fn bessel_amplitude_oracle(d: i64, tau: f64) -> Complex64 {
    let phase = match d.rem_euclid(4) {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, 1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, -1.0),
    };
    phase * bessel_j(d, 2.0 * tau)
}
