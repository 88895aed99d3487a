//! Sector matrices of
//!
//! ```text
//! H(θ) = −Σᵢ s(λ + ηᵢ)(e^{iθ} σᵢ⁺σᵢ₊₁⁻ + h.c.) + Σᵢ (B + δᵢ) σᵢᶻ
//! ```
//!
//! with σ± = (σx ± iσy)/2 and `s` the ring's `hop_scale`. In the n-magnon
//! sector the element moving a magnon from site i+1 to site i is
//! −s(λ + ηᵢ)e^{iθ}, blocked if site i is occupied. The diagonal of
//! configuration S is Σ_{i∈S}(B + δᵢ) − Σ_{i∉S}(B + δᵢ), which splits into
//! the sector constant B(2n − N) plus a δ-dependent remainder.
//!
//! Matrices are kept in structural form (diagonal plus hop list). The dense
//! form is produced on demand for sectors up to [`DENSE_LIMIT`].

use std::sync::Arc;

use faer::Mat;
use num_complex::Complex64;

use crate::basis::{RingSpec, SectorBasis};
use crate::disorder::DisorderRealization;
use crate::error::{domain, Result};

/// Largest sector dimension handled with dense linear algebra.
pub const DENSE_LIMIT: usize = 5000;

#[derive(Clone, Copy, Debug)]
pub(crate) struct Hop {
    /// Configuration after the magnon moved from i+1 to i.
    pub to: usize,
    pub from: usize,
    /// −s(λ + ηᵢ); the matrix element is `amp · e^{iθ}`.
    pub amp: f64,
}

#[derive(Clone, Debug)]
pub struct SectorHamiltonian {
    theta: f64,
    ring: RingSpec,
    disorder: Arc<DisorderRealization>,
    basis: Arc<SectorBasis>,
    offset: f64,
    local: Vec<f64>,
    hops: Vec<Hop>,
}

/// Assembles H(θ) restricted to `basis`.
pub fn build_hamiltonian(
    ring: &RingSpec,
    disorder: &Arc<DisorderRealization>,
    theta: f64,
    basis: &Arc<SectorBasis>,
) -> Result<SectorHamiltonian> {
    ring.validate()?;
    let n_sites = ring.n_sites;
    if disorder.n_sites() != n_sites {
        return Err(domain(format!(
            "disorder has {} sites but ring has {n_sites}",
            disorder.n_sites()
        )));
    }
    if basis.n_sites() != n_sites {
        return Err(domain(format!(
            "basis has {} sites but ring has {n_sites}",
            basis.n_sites()
        )));
    }
    if !theta.is_finite() {
        return Err(domain(format!("theta must be finite, got {theta}")));
    }

    let n = basis.n_magnons();
    let delta_total: f64 = disorder.delta().iter().sum();
    let mut local = Vec::with_capacity(basis.dim());
    let mut hops = Vec::with_capacity(basis.dim() * n);
    let mut occupied = vec![false; n_sites];
    let mut moved: Vec<u32> = Vec::with_capacity(n);

    for (from, sites) in basis.iter().enumerate() {
        let inside: f64 = sites.iter().map(|&s| disorder.delta()[s as usize]).sum();
        local.push(2.0 * inside - delta_total);

        sites.iter().for_each(|&s| occupied[s as usize] = true);
        for (k, &p) in sites.iter().enumerate() {
            let p = p as usize;
            let bond = (p + n_sites - 1) % n_sites;
            if occupied[bond] {
                continue;
            }
            moved.clear();
            moved.extend_from_slice(sites);
            moved[k] = bond as u32;
            moved.sort_unstable();
            hops.push(Hop {
                to: basis.rank_of_u32(&moved),
                from,
                amp: -ring.hop_scale * (ring.coupling + disorder.eta()[bond]),
            });
        }
        sites.iter().for_each(|&s| occupied[s as usize] = false);
    }

    Ok(SectorHamiltonian {
        theta,
        ring: *ring,
        disorder: Arc::clone(disorder),
        basis: Arc::clone(basis),
        offset: ring.b_field * basis.magnetization() as f64,
        local,
        hops,
    })
}

impl SectorHamiltonian {
    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn ring(&self) -> &RingSpec {
        &self.ring
    }

    pub fn disorder(&self) -> &Arc<DisorderRealization> {
        &self.disorder
    }

    pub fn basis(&self) -> &Arc<SectorBasis> {
        &self.basis
    }

    pub fn dim(&self) -> usize {
        self.basis.dim()
    }

    /// Whether the sector is small enough for dense storage and
    /// eigendecomposition.
    pub fn is_dense(&self) -> bool {
        self.dim() <= DENSE_LIMIT
    }

    /// The sector constant B(2n − N) carried by every diagonal entry.
    pub fn offset(&self) -> f64 {
        self.offset
    }

    /// Number of stored off-diagonal pairs.
    pub fn hop_count(&self) -> usize {
        self.hops.len()
    }

    pub fn diagonal(&self) -> Vec<f64> {
        self.local.iter().map(|l| self.offset + l).collect()
    }

    fn fill(&self, include_offset: bool, include_diagonal: bool) -> Mat<Complex64> {
        let dim = self.dim();
        let phase = Complex64::from_polar(1.0, self.theta);
        let mut m = Mat::<Complex64>::zeros(dim, dim);
        if include_diagonal {
            for (i, l) in self.local.iter().enumerate() {
                let shift = if include_offset { self.offset } else { 0.0 };
                m[(i, i)] = Complex64::new(shift + l, 0.0);
            }
        }
        for h in &self.hops {
            let v = phase * h.amp;
            m[(h.to, h.from)] += v;
            m[(h.from, h.to)] += v.conj();
        }
        m
    }

    /// The full sector matrix.
    pub fn to_dense(&self) -> Mat<Complex64> {
        self.fill(true, true)
    }

    /// H − B(2n − N)·I.
    pub fn residual_dense(&self) -> Mat<Complex64> {
        self.fill(false, true)
    }

    /// The hopping part H − diag(H).
    pub fn interaction_dense(&self) -> Mat<Complex64> {
        self.fill(false, false)
    }

    /// max |Hᵢⱼ − H†ᵢⱼ|.
    pub fn hermiticity_defect(&self) -> f64 {
        let m = self.to_dense();
        let dim = self.dim();
        let mut worst = 0.0f64;
        for i in 0..dim {
            for j in 0..=i {
                worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
            }
        }
        worst
    }

    /// Largest |element| of H − B(2n − N)·I.
    pub fn residual_max_abs(&self) -> f64 {
        let diag = self.local.iter().fold(0.0f64, |a, l| a.max(l.abs()));
        // a pair of configurations is linked by at most one bond for N >= 3
        let off = self.hops.iter().fold(0.0f64, |a, h| a.max(h.amp.abs()));
        diag.max(off)
    }

    /// Upper bound on ‖H − B(2n − N)·I‖ from absolute row sums.
    pub(crate) fn residual_norm_bound(&self) -> f64 {
        let mut rows: Vec<f64> = self.local.iter().map(|l| l.abs()).collect();
        for h in &self.hops {
            rows[h.to] += h.amp.abs();
            rows[h.from] += h.amp.abs();
        }
        rows.into_iter().fold(0.0, f64::max)
    }

    /// y = (H(θ') − B(2n − N)·I) x for an arbitrary phase θ'; the hop
    /// structure does not depend on the phase.
    pub(crate) fn apply_residual_at(&self, theta: f64, x: &[Complex64], y: &mut [Complex64]) {
        let phase = Complex64::from_polar(1.0, theta);
        for ((yi, xi), l) in y.iter_mut().zip(x).zip(&self.local) {
            *yi = xi * l;
        }
        for h in &self.hops {
            let v = phase * h.amp;
            y[h.to] += v * x[h.from];
            y[h.from] += v.conj() * x[h.to];
        }
    }

    // Sparse rows of H − offset·I, diagonal included.
    fn residual_rows(&self) -> Vec<Vec<(usize, Complex64)>> {
        let phase = Complex64::from_polar(1.0, self.theta);
        let mut rows: Vec<Vec<(usize, Complex64)>> = self
            .local
            .iter()
            .enumerate()
            .map(|(i, &l)| vec![(i, Complex64::new(l, 0.0))])
            .collect();
        for h in &self.hops {
            let v = phase * h.amp;
            rows[h.to].push((h.from, v));
            rows[h.from].push((h.to, v.conj()));
        }
        rows
    }
}

/// max |(H₁H₂ − H₂H₁)ᵢⱼ|. The sector constants commute with everything and
/// are left out of the product.
pub fn commutator_norm(h1: &SectorHamiltonian, h2: &SectorHamiltonian) -> Result<f64> {
    if h1.basis.n_sites() != h2.basis.n_sites() || h1.basis.n_magnons() != h2.basis.n_magnons() {
        return Err(domain(format!(
            "commutator of different sectors (N={}, n={}) vs (N={}, n={})",
            h1.basis.n_sites(),
            h1.basis.n_magnons(),
            h2.basis.n_sites(),
            h2.basis.n_magnons()
        )));
    }
    let a = h1.residual_rows();
    let b = h2.residual_rows();
    let dim = h1.dim();
    let mut scratch = vec![Complex64::new(0.0, 0.0); dim];
    let mut touched: Vec<usize> = Vec::new();
    let mut worst = 0.0f64;
    for i in 0..dim {
        for &(k, aik) in &a[i] {
            for &(j, bkj) in &b[k] {
                if scratch[j] == Complex64::new(0.0, 0.0) {
                    touched.push(j);
                }
                scratch[j] += aik * bkj;
            }
        }
        for &(k, bik) in &b[i] {
            for &(j, akj) in &a[k] {
                if scratch[j] == Complex64::new(0.0, 0.0) {
                    touched.push(j);
                }
                scratch[j] -= bik * akj;
            }
        }
        for &j in &touched {
            worst = worst.max(scratch[j].norm());
            scratch[j] = Complex64::new(0.0, 0.0);
        }
        touched.clear();
    }
    Ok(worst)
}

/// Closed-form one-magnon spectrum of a disorder-free ring:
/// −2sλ cos(2πk/N + θ) + B(2 − N) for k = 0..N−1, in k order.
pub fn one_magnon_dispersion(ring: &RingSpec, theta: f64) -> Vec<f64> {
    let n = ring.n_sites as f64;
    let local = ring.b_field * (2.0 - n);
    (0..ring.n_sites)
        .map(|k| {
            -2.0 * ring.hop_scale * ring.coupling * (2.0 * std::f64::consts::PI * k as f64 / n + theta).cos()
                + local
        })
        .collect()
}
