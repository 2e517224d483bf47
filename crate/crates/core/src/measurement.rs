//! Measurement objects: angle-parametrized observable triads, the generalized
//! elegant joint measurement (EJM) basis, dichotomic projectors and the
//! pointer (F, G) trade-off pairs for unsharp measurements.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_PI_2, PI};

use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, HERMITICITY_TOL};

pub fn pauli_x() -> ComplexMatrix {
    let mut m = ComplexMatrix::zeros(2, 2);
    m[(0, 1)] = Complex64::new(1.0, 0.0);
    m[(1, 0)] = Complex64::new(1.0, 0.0);
    m
}

pub fn pauli_y() -> ComplexMatrix {
    let mut m = ComplexMatrix::zeros(2, 2);
    m[(0, 1)] = Complex64::new(0.0, -1.0);
    m[(1, 0)] = Complex64::new(0.0, 1.0);
    m
}

pub fn pauli_z() -> ComplexMatrix {
    let mut m = ComplexMatrix::zeros(2, 2);
    m[(0, 0)] = Complex64::new(1.0, 0.0);
    m[(1, 1)] = Complex64::new(-1.0, 0.0);
    m
}

/// Sign triples of the four regular-tetrahedron directions, indexed by the
/// joint-measurement outcome b in 0..4. Each row has component product +1.
pub const TETRAHEDRON: [[f64; 3]; 4] = [
    [1.0, 1.0, 1.0],
    [1.0, -1.0, -1.0],
    [-1.0, 1.0, -1.0],
    [-1.0, -1.0, 1.0],
];

/// A 2x2 Hermitian observable n . sigma from a Bloch vector.
pub fn observable_from_bloch(n: [f64; 3]) -> ComplexMatrix {
    let mut m = ComplexMatrix::zeros(2, 2);
    m[(0, 0)] = Complex64::new(n[2], 0.0);
    m[(1, 1)] = Complex64::new(-n[2], 0.0);
    m[(0, 1)] = Complex64::new(n[0], -n[1]);
    m[(1, 0)] = Complex64::new(n[0], n[1]);
    m
}

/// Bloch vector of a 2x2 Hermitian traceless observable.
pub fn bloch_vector(a: &ComplexMatrix) -> [f64; 3] {
    [
        (a.trace_product(&pauli_x()).re) / 2.0,
        (a.trace_product(&pauli_y()).re) / 2.0,
        (a.trace_product(&pauli_z()).re) / 2.0,
    ]
}

/// Three mutually unbiased dichotomic observables parametrized by
/// (alpha, beta, gamma). The Bloch vectors are the rows of a rotation matrix,
/// so they are unit length and pairwise orthogonal for every angle choice.
#[derive(Debug, Clone)]
pub struct ObservableTriad {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    observables: [ComplexMatrix; 3],
}

impl ObservableTriad {
    /// Observable for setting index `i` in 0..3.
    pub fn observable(&self, i: usize) -> &ComplexMatrix {
        &self.observables[i]
    }

    pub fn observables(&self) -> &[ComplexMatrix; 3] {
        &self.observables
    }

    pub fn bloch_vectors(&self) -> [[f64; 3]; 3] {
        [
            bloch_vector(&self.observables[0]),
            bloch_vector(&self.observables[1]),
            bloch_vector(&self.observables[2]),
        ]
    }
}

/// Build the observable triad for the given angles.
pub fn triad(alpha: f64, beta: f64, gamma: f64) -> ObservableTriad {
    let (sa, ca) = alpha.sin_cos();
    let (sb, cb) = beta.sin_cos();
    let (sg, cg) = gamma.sin_cos();
    let rows = [
        [cb * cg, sa * sb * cg - ca * sg, ca * sb * cg + sa * sg],
        [cb * sg, sa * sb * sg + ca * cg, ca * sb * sg - sa * cg],
        [-sb, sa * cb, ca * cb],
    ];
    ObservableTriad {
        alpha,
        beta,
        gamma,
        observables: [
            observable_from_bloch(rows[0]),
            observable_from_bloch(rows[1]),
            observable_from_bloch(rows[2]),
        ],
    }
}

/// The generalized elegant joint measurement basis at entanglement angle
/// `theta`.
///
/// Each basis state pairs a tetrahedron direction with its antipode:
///
/// ```text
/// |Phi_b> = (sqrt(3) + e^{i theta}) / (2 sqrt(2)) |m_b, -m_b>
///         + (sqrt(3) - e^{i theta}) / (2 sqrt(2)) |-m_b, m_b>
/// ```
///
/// where |m_b> is the qubit state pointing along the unit vector m_b/sqrt(3),
/// written in half-angle form from (eta_b, phi_b) with eta_b = (m_b)_z/sqrt(3)
/// and phi_b = atan2((m_b)_y, (m_b)_x). The antipodal ket uses
/// (eta, phi) -> (-eta, phi + pi).
#[derive(Debug, Clone)]
pub struct EjmBasis {
    pub theta: f64,
    /// Four two-qubit unit vectors, indexed by outcome b in 0..4.
    pub states: [[Complex64; 4]; 4],
    /// Tetrahedron sign triples (+-1 components).
    pub m_vectors: [[f64; 3]; 4],
    /// Cylindrical parameters (eta_b, phi_b) of each unit direction.
    pub eta_phi: [(f64, f64); 4],
}

fn half_angle_ket(eta: f64, phi: f64) -> [Complex64; 2] {
    let up = ((1.0 + eta) / 2.0).sqrt();
    let dn = ((1.0 - eta) / 2.0).sqrt();
    [
        Complex64::new(0.0, -phi / 2.0).exp() * up,
        Complex64::new(0.0, phi / 2.0).exp() * dn,
    ]
}

fn kron_ket2(a: &[Complex64; 2], b: &[Complex64; 2]) -> [Complex64; 4] {
    [a[0] * b[0], a[0] * b[1], a[1] * b[0], a[1] * b[1]]
}

/// Construct the EJM basis for theta in [0, pi/2].
pub fn ejm_basis(theta: f64) -> Result<EjmBasis> {
    if !(0.0..=FRAC_PI_2 + 1e-12).contains(&theta) || !theta.is_finite() {
        return Err(Error::OutOfRange {
            name: "theta",
            value: theta,
            min: 0.0,
            max: FRAC_PI_2,
        });
    }
    let sqrt3 = 3f64.sqrt();
    let norm = 1.0 / (2.0 * 2f64.sqrt());
    let e_itheta = Complex64::new(0.0, theta).exp();
    let c_plus = (Complex64::new(sqrt3, 0.0) + e_itheta) * norm;
    let c_minus = (Complex64::new(sqrt3, 0.0) - e_itheta) * norm;

    let mut states = [[Complex64::new(0.0, 0.0); 4]; 4];
    let mut eta_phi = [(0.0, 0.0); 4];
    for (b, m) in TETRAHEDRON.iter().enumerate() {
        let eta = m[2] / sqrt3;
        let phi = m[1].atan2(m[0]);
        eta_phi[b] = (eta, phi);
        let ket = half_angle_ket(eta, phi);
        let anti = half_angle_ket(-eta, phi + PI);
        let fwd = kron_ket2(&ket, &anti);
        let rev = kron_ket2(&anti, &ket);
        for k in 0..4 {
            states[b][k] = c_plus * fwd[k] + c_minus * rev[k];
        }
    }
    Ok(EjmBasis {
        theta,
        states,
        m_vectors: TETRAHEDRON,
        eta_phi,
    })
}

impl EjmBasis {
    pub fn state(&self, b: usize) -> &[Complex64; 4] {
        &self.states[b]
    }

    /// Rank-one projector |Phi_b><Phi_b|.
    pub fn projector(&self, b: usize) -> ComplexMatrix {
        ComplexMatrix::projector_from_state(&self.states[b])
    }

    /// max |<Phi_a|Phi_b> - delta_ab| over all pairs.
    pub fn gram_deviation(&self) -> f64 {
        let mut dev: f64 = 0.0;
        for a in 0..4 {
            for b in 0..4 {
                let ip: Complex64 = (0..4)
                    .map(|k| self.states[a][k].conj() * self.states[b][k])
                    .sum();
                let want = if a == b { 1.0 } else { 0.0 };
                dev = dev.max((ip - want).norm());
            }
        }
        dev
    }

    /// max | sum_b |Phi_b><Phi_b| - I | over entries.
    pub fn completeness_deviation(&self) -> f64 {
        let mut sum = ComplexMatrix::zeros(4, 4);
        for b in 0..4 {
            sum = sum.add(&self.projector(b));
        }
        sum.max_abs_diff(&ComplexMatrix::identity(4))
    }

    /// Concurrence of basis state b.
    pub fn concurrence(&self, b: usize) -> f64 {
        concurrence_pure(&self.states[b])
    }
}

/// Concurrence of a pure two-qubit state: |<psi*| sigma_y (x) sigma_y |psi>|.
pub fn concurrence_pure(state: &[Complex64; 4]) -> f64 {
    // sigma_y (x) sigma_y maps (0,1,2,3) -> (-3, +2, +1, -0) amplitudes
    let flipped = [-state[3], state[2], state[1], -state[0]];
    let ip: Complex64 = (0..4).map(|k| state[k] * flipped[k]).sum();
    ip.norm()
}

/// Pointer trade-off family for unsharp measurements.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PointerKind {
    /// F + G = 1.
    Square,
    /// F^2 + G^2 = 1.
    Optimal,
}

impl std::fmt::Display for PointerKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            PointerKind::Square => write!(f, "square"),
            PointerKind::Optimal => write!(f, "optimal"),
        }
    }
}

/// Quality factor F (undisturbed fraction) and precision factor G
/// (information gain) of one unsharp measurement.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PointerPair {
    pub kind: PointerKind,
    pub g: f64,
    pub f: f64,
}

/// F from G along the chosen pointer family; G must lie in [0, 1].
pub fn pointer_pair(kind: PointerKind, g: f64) -> Result<PointerPair> {
    if !(0.0..=1.0).contains(&g) || !g.is_finite() {
        return Err(Error::OutOfRange {
            name: "G",
            value: g,
            min: 0.0,
            max: 1.0,
        });
    }
    let f = match kind {
        PointerKind::Square => 1.0 - g,
        PointerKind::Optimal => (1.0 - g * g).max(0.0).sqrt(),
    };
    Ok(PointerPair { kind, g, f })
}

/// Projector (I + (-1)^a A) / 2 onto the outcome-a eigenspace of a
/// dichotomic observable. Requires A^2 = I.
pub fn projector(observable: &ComplexMatrix, outcome: u8) -> Result<ComplexMatrix> {
    let sq = observable.matmul(observable)?;
    let dev = sq.max_abs_diff(&ComplexMatrix::identity(observable.rows()));
    if dev > HERMITICITY_TOL {
        return Err(Error::NotDichotomic { deviation: dev });
    }
    let sign = if outcome == 0 { 1.0 } else { -1.0 };
    Ok(ComplexMatrix::identity(observable.rows())
        .add(&observable.scale(sign))
        .scale(0.5))
}
