//! Measurement operators: projective qubit POVMs and homodyne quadrature
//! projectors in a truncated Fock basis.
//!
//! Quadratures use the dimensionless convention `x = (a + a†)/√2`, where the
//! vacuum has variance 1/2 and `⟨n|x⟩ = ψ_n(x)` is the normalized oscillator
//! eigenfunction.

use alloc::vec::Vec;

use num_complex::Complex64;

use crate::dataset::{Dataset, Record};
use crate::error::{Error, Result};
use crate::state::{projector, PovmElement};

/// A single homodyne measurement: local-oscillator phase and quadrature value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSample {
    pub theta: f64,
    pub x: f64,
}

impl QuadratureSample {
    pub fn new(theta: f64, x: f64) -> Result<Self> {
        if !theta.is_finite() || !x.is_finite() {
            return Err(Error::NonFinite);
        }
        Ok(Self { theta, x })
    }
}

/// `|v̂⟩⟨v̂|` for the normalized `v`.
pub fn projector_from_state(v: &[Complex64]) -> Result<PovmElement> {
    PovmElement::new(projector(v)?)
}

/// One `|0⟩` and two `|1⟩` detections on a qubit, measured in the
/// computational basis. Plain `RρR` cycles on this record.
pub fn counterexample_dataset() -> Dataset {
    let p0 = PovmElement::from_diagonal(&[1.0, 0.0]).expect("projector");
    let p1 = PovmElement::from_diagonal(&[0.0, 1.0]).expect("projector");
    Dataset::from_pairs([(p0, 1.0), (p1, 2.0)]).expect("valid record")
}

/// `ψ_0(x), …, ψ_{count-1}(x)`.
///
/// Uses the three-term recurrence on the normalized functions, which stays
/// finite where the raw Hermite polynomials would overflow.
pub fn harmonic_wavefunctions(count: usize, x: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(count);
    if count == 0 {
        return out;
    }
    // π^{-1/4}
    let psi0 = 0.751_125_544_464_942_5 * libm::exp(-0.5 * x * x);
    out.push(psi0);
    if count == 1 {
        return out;
    }
    out.push(core::f64::consts::SQRT_2 * x * psi0);
    for n in 1..count - 1 {
        let nf = n as f64;
        let next =
            libm::sqrt(2.0 / (nf + 1.0)) * x * out[n] - libm::sqrt(nf / (nf + 1.0)) * out[n - 1];
        out.push(next);
    }
    out
}

/// `ψ_n(x) = H_n(x) e^{−x²/2} / √(2ⁿ n! √π)`
pub fn harmonic_wavefunction(n: usize, x: f64) -> f64 {
    harmonic_wavefunctions(n + 1, x)[n]
}

/// `Π_{mn} = e^{i(m−n)θ} ψ_m(x) ψ_n(x)` for `m, n < dim`.
pub fn quadrature_projector(s: &QuadratureSample, dim: usize) -> PovmElement {
    let psi = harmonic_wavefunctions(dim, s.x);
    let v: Vec<Complex64> = psi
        .iter()
        .enumerate()
        .map(|(m, &p)| {
            let phase = m as f64 * s.theta;
            Complex64::new(libm::cos(phase), libm::sin(phase)) * p
        })
        .collect();
    PovmElement::rank_one(&v)
}

/// One record with count 1 per sample.
pub fn quadrature_dataset(samples: &[QuadratureSample], dim: usize) -> Result<Dataset> {
    if samples.is_empty() {
        return Err(Error::EmptySamples);
    }
    if dim == 0 {
        return Err(Error::ZeroDimension);
    }
    Dataset::new(
        samples
            .iter()
            .map(|s| Record {
                element: quadrature_projector(s, dim),
                count: 1.0,
            })
            .collect(),
    )
}
