//! Sequential measurement dynamics: the unsharp-measurement channel, strong
//! (Lueders) updates and the joint-measurement projection step.
//!
//! The unsharp update for outcome a on a state rho is
//!
//! ```text
//! (F/2) rho + (1 + (-1)^a G - F)/2 U1 rho U1 + (1 - (-1)^a G - F)/2 U0 rho U0
//! ```
//!
//! with U^k the projector onto the (-1)^k eigenspace of the measured
//! observable, embedded on the target qubit. Note the superscript placement:
//! at the strong limit (F = 0, G = 1) outcome a = 0 applies U^1, so unsharp
//! observers carry the value map a -> (-1)^(a+1) while strong observers use
//! the plain Lueders labelling a -> (-1)^a. The calibration test below pins
//! this: at the strong limit the expectation sum_a v(a) P(a) equals tr(rho A).

use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, DensityMatrix};
use crate::measurement::{projector, EjmBasis, PointerPair};

/// Measurement value carried by outcome bit `a` of an unsharp observer.
pub fn weak_outcome_value(a: u8) -> f64 {
    if a == 0 {
        -1.0
    } else {
        1.0
    }
}

/// Measurement value carried by outcome bit `a` of a strong observer.
pub fn strong_outcome_value(a: u8) -> f64 {
    if a == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Embed a single-qubit operator at subsystem `qubit` of a register with the
/// given dimension list, identity elsewhere.
pub fn embed_on_qubit(op: &ComplexMatrix, qubit: usize, dims: &[usize]) -> Result<ComplexMatrix> {
    if qubit >= dims.len() {
        return Err(Error::SubsystemOutOfRange {
            index: qubit,
            count: dims.len(),
        });
    }
    if dims[qubit] != op.rows() {
        return Err(Error::DimensionMismatch {
            context: "embedded operator vs subsystem dimension",
            left: op.rows(),
            right: dims[qubit],
        });
    }
    let before: usize = dims[..qubit].iter().product();
    let after: usize = dims[qubit + 1..].iter().product();
    let mut out = ComplexMatrix::identity(before).kron(op);
    if after > 1 {
        out = out.kron(&ComplexMatrix::identity(after));
    }
    Ok(out)
}

/// One outcome branch of an unsharp measurement.
#[derive(Debug, Clone)]
pub struct WeakOutcomeState {
    pub outcome: u8,
    /// Unnormalized post-measurement state; its trace is the branch weight.
    pub state: DensityMatrix,
    pub weight: f64,
}

/// Both outcome branches of an unsharp measurement of `observable` on
/// `qubit`, sharing the projected products.
pub fn weak_update_both(
    rho: &DensityMatrix,
    qubit: usize,
    observable: &ComplexMatrix,
    fg: &PointerPair,
) -> Result<[WeakOutcomeState; 2]> {
    let u0 = embed_on_qubit(&projector(observable, 0)?, qubit, rho.dims())?;
    let u1 = embed_on_qubit(&projector(observable, 1)?, qubit, rho.dims())?;
    // projectors are Hermitian, so U rho U^dagger = U rho U
    let p0 = u0.matmul(rho.mat())?.matmul(&u0)?;
    let p1 = u1.matmul(rho.mat())?.matmul(&u1)?;
    let base = rho.mat().scale(fg.f / 2.0);
    let build = |a: u8| -> Result<WeakOutcomeState> {
        let sign = if a == 0 { 1.0 } else { -1.0 };
        let c1 = (1.0 + sign * fg.g - fg.f) / 2.0;
        let c0 = (1.0 - sign * fg.g - fg.f) / 2.0;
        let mat = base.add(&p1.scale(c1)).add(&p0.scale(c0));
        let state = DensityMatrix::new(mat, rho.dims().to_vec())?;
        let weight = state.trace_real();
        Ok(WeakOutcomeState {
            outcome: a,
            state,
            weight,
        })
    };
    Ok([build(0)?, build(1)?])
}

/// Unsharp-measurement update for a single outcome.
pub fn weak_update(
    rho: &DensityMatrix,
    qubit: usize,
    observable: &ComplexMatrix,
    outcome: u8,
    fg: &PointerPair,
) -> Result<DensityMatrix> {
    if outcome > 1 {
        return Err(Error::InvalidOutcome {
            name: "weak outcome",
            value: outcome as usize,
        });
    }
    let [s0, s1] = weak_update_both(rho, qubit, observable, fg)?;
    Ok(if outcome == 0 { s0.state } else { s1.state })
}

/// Strong (Lueders) update: U^a rho U^a with the embedded projector,
/// unnormalized.
pub fn strong_update(
    rho: &DensityMatrix,
    qubit: usize,
    observable: &ComplexMatrix,
    outcome: u8,
) -> Result<DensityMatrix> {
    if outcome > 1 {
        return Err(Error::InvalidOutcome {
            name: "strong outcome",
            value: outcome as usize,
        });
    }
    let u = embed_on_qubit(&projector(observable, outcome)?, qubit, rho.dims())?;
    let mat = u.matmul(rho.mat())?.matmul(&u)?;
    DensityMatrix::new(mat, rho.dims().to_vec())
}

/// Probability of a strong outcome without keeping the post-measurement
/// state: tr(U rho U) = tr(Pi rho).
pub fn strong_outcome_probability(
    rho: &DensityMatrix,
    qubit: usize,
    observable: &ComplexMatrix,
    outcome: u8,
) -> Result<f64> {
    let u = embed_on_qubit(&projector(observable, outcome)?, qubit, rho.dims())?;
    Ok(u.trace_product(rho.mat()).re)
}

/// Project the middle party's two qubits (subsystems 1 and 2 of a four-qubit
/// register) onto joint-measurement outcome `b` and trace them out, leaving
/// the unnormalized two-qubit state of the outer parties. Its trace is the
/// outcome probability.
pub fn ejm_project(rho_abc: &DensityMatrix, basis: &EjmBasis, b: usize) -> Result<DensityMatrix> {
    if rho_abc.dims() != [2, 2, 2, 2] {
        return Err(Error::DimensionMismatch {
            context: "joint projection needs a four-qubit register",
            left: rho_abc.dims().len(),
            right: 4,
        });
    }
    if b > 3 {
        return Err(Error::InvalidOutcome {
            name: "joint outcome",
            value: b,
        });
    }
    let i2 = ComplexMatrix::identity(2);
    let embedded = i2.kron(&basis.projector(b)).kron(&i2);
    let projected = embedded.matmul(rho_abc.mat())?.matmul(&embedded.dagger())?;
    DensityMatrix::new(projected, vec![2, 2, 2, 2])?.partial_trace(&[0, 3])
}
