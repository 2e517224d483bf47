//! Shared test support.
//!
//! The centerpiece is an amplitude-level Born-rule oracle for the three-party
//! strong-measurement chain. It builds its own kets, observables, projectors
//! and matrix products on flat vectors, so agreement with the channel-based
//! pipeline is a genuine cross-check rather than a tautology.

#![allow(dead_code)]

use num_complex::Complex64;

pub type C = Complex64;

pub fn c(re: f64, im: f64) -> C {
    C::new(re, im)
}

/// Row-major product of two n x n matrices.
fn mul(n: usize, a: &[C], b: &[C]) -> Vec<C> {
    let mut out = vec![c(0.0, 0.0); n * n];
    for i in 0..n {
        for k in 0..n {
            let aik = a[i * n + k];
            for j in 0..n {
                out[i * n + j] += aik * b[k * n + j];
            }
        }
    }
    out
}

/// Kronecker product of an na x na and an nb x nb matrix.
fn kron(a: &[C], na: usize, b: &[C], nb: usize) -> Vec<C> {
    let n = na * nb;
    let mut out = vec![c(0.0, 0.0); n * n];
    for i in 0..na {
        for j in 0..na {
            for k in 0..nb {
                for l in 0..nb {
                    out[(i * nb + k) * n + (j * nb + l)] = a[i * na + j] * b[k * nb + l];
                }
            }
        }
    }
    out
}

fn trace(n: usize, a: &[C]) -> C {
    (0..n).map(|i| a[i * n + i]).sum()
}

fn outer(state: &[C]) -> Vec<C> {
    let n = state.len();
    let mut out = vec![c(0.0, 0.0); n * n];
    for i in 0..n {
        for j in 0..n {
            out[i * n + j] = state[i] * state[j].conj();
        }
    }
    out
}

pub const ORACLE_TETRAHEDRON: [[f64; 3]; 4] = [
    [1.0, 1.0, 1.0],
    [1.0, -1.0, -1.0],
    [-1.0, 1.0, -1.0],
    [-1.0, -1.0, 1.0],
];

/// Observable n . sigma as a flat 2x2 matrix.
fn from_bloch(n: [f64; 3]) -> Vec<C> {
    vec![c(n[2], 0.0), c(n[0], -n[1]), c(n[0], n[1]), c(-n[2], 0.0)]
}

/// The three observables of the angle parametrization, as Bloch rows.
pub fn oracle_triad(alpha: f64, beta: f64, gamma: f64) -> [Vec<C>; 3] {
    let (sa, ca) = alpha.sin_cos();
    let (sb, cb) = beta.sin_cos();
    let (sg, cg) = gamma.sin_cos();
    [
        from_bloch([cb * cg, sa * sb * cg - ca * sg, ca * sb * cg + sa * sg]),
        from_bloch([cb * sg, sa * sb * sg + ca * cg, ca * sb * sg - sa * cg]),
        from_bloch([-sb, sa * cb, ca * cb]),
    ]
}

/// Projector onto the +1 (slot 0) or -1 (slot 1) eigenspace.
fn eigen_projector(obs: &[C], value_slot: usize) -> Vec<C> {
    let sign = if value_slot == 0 { 1.0 } else { -1.0 };
    let mut out = vec![c(0.0, 0.0); 4];
    for i in 0..2 {
        for j in 0..2 {
            let id = if i == j { 1.0 } else { 0.0 };
            out[i * 2 + j] = c(id, 0.0) + obs[i * 2 + j] * sign;
            out[i * 2 + j] *= 0.5;
        }
    }
    out
}

fn half_angle_ket(eta: f64, phi: f64) -> [C; 2] {
    [
        c(0.0, -phi / 2.0).exp() * ((1.0 + eta) / 2.0).sqrt(),
        c(0.0, phi / 2.0).exp() * ((1.0 - eta) / 2.0).sqrt(),
    ]
}

/// The four joint-measurement basis states, built independently.
pub fn oracle_ejm_states(theta: f64) -> [[C; 4]; 4] {
    let sqrt3 = 3f64.sqrt();
    let norm = 1.0 / (2.0 * 2f64.sqrt());
    let cp = (c(sqrt3, 0.0) + c(0.0, theta).exp()) * norm;
    let cm = (c(sqrt3, 0.0) - c(0.0, theta).exp()) * norm;
    let mut out = [[c(0.0, 0.0); 4]; 4];
    for (b, m) in ORACLE_TETRAHEDRON.iter().enumerate() {
        let eta = m[2] / sqrt3;
        let phi = m[1].atan2(m[0]);
        let fwd = half_angle_ket(eta, phi);
        let rev = half_angle_ket(-eta, phi + std::f64::consts::PI);
        for i in 0..2 {
            for j in 0..2 {
                out[b][i * 2 + j] = cp * fwd[i] * rev[j] + cm * rev[i] * fwd[j];
            }
        }
    }
    out
}

fn werner(v: f64) -> Vec<C> {
    let s = 1.0 / 2f64.sqrt();
    let psi = [c(0.0, 0.0), c(s, 0.0), c(-s, 0.0), c(0.0, 0.0)];
    let mut out = outer(&psi);
    for entry in out.iter_mut() {
        *entry *= v;
    }
    for i in 0..4 {
        out[i * 4 + i] += (1.0 - v) / 4.0;
    }
    out
}

pub const ORACLE_LEN: usize = 3 * 3 * 2 * 4 * 2;

#[inline]
pub fn oracle_index(x: usize, z: usize, value_a: usize, b: usize, value_c: usize) -> usize {
    (((x * 3 + z) * 2 + value_a) * 4 + b) * 2 + value_c
}

/// Exact Born-rule distribution of the strong-only three-party chain:
/// P(value_a, b, value_c | x, z) with slot 0 carrying outcome value +1.
pub fn oracle_three_party(
    theta: f64,
    angles_a: (f64, f64, f64),
    angles_c: (f64, f64, f64),
    v1: f64,
    v2: f64,
) -> Vec<f64> {
    let rho = kron(&werner(v1), 4, &werner(v2), 4);
    let states = oracle_ejm_states(theta);
    let triad_a = oracle_triad(angles_a.0, angles_a.1, angles_a.2);
    let triad_c = oracle_triad(angles_c.0, angles_c.1, angles_c.2);
    let mut out = vec![0.0; ORACLE_LEN];
    for x in 0..3 {
        for z in 0..3 {
            for value_a in 0..2 {
                let pa = eigen_projector(&triad_a[x], value_a);
                for value_c in 0..2 {
                    let pc = eigen_projector(&triad_c[z], value_c);
                    for b in 0..4 {
                        let phi = outer(&states[b]);
                        let effect = kron(&kron(&pa, 2, &phi, 4), 8, &pc, 2);
                        let p = trace(16, &mul(16, &effect, &rho)).re;
                        out[oracle_index(x, z, value_a, b, value_c)] = p;
                    }
                }
            }
        }
    }
    out
}

/// Independent evaluation of the inequality quantities on an oracle-layout
/// distribution (slot 0 = value +1 for both outer parties).
#[derive(Debug, Clone, Copy)]
pub struct OracleReport {
    pub s: f64,
    pub t: f64,
    pub z: f64,
    pub b: f64,
}

pub fn oracle_evaluate(p: &[f64]) -> OracleReport {
    let value = |slot: usize| if slot == 0 { 1.0 } else { -1.0 };
    // correlators with uniform averaging over absent settings
    let corr = |want_a: Option<usize>, want_y: Option<usize>, want_c: Option<usize>| -> f64 {
        let xs: Vec<usize> = match want_a {
            Some(x) => vec![x],
            None => (0..3).collect(),
        };
        let zs: Vec<usize> = match want_c {
            Some(z) => vec![z],
            None => (0..3).collect(),
        };
        let mut acc = 0.0;
        for &x in &xs {
            for &z in &zs {
                for sa in 0..2 {
                    for b in 0..4 {
                        for sc in 0..2 {
                            let mut weight = p[oracle_index(x, z, sa, b, sc)];
                            if want_a.is_some() {
                                weight *= value(sa);
                            }
                            if let Some(y) = want_y {
                                weight *= ORACLE_TETRAHEDRON[b][y];
                            }
                            if want_c.is_some() {
                                weight *= value(sc);
                            }
                            acc += weight;
                        }
                    }
                }
            }
        }
        acc / (xs.len() * zs.len()) as f64
    };

    let mut s = 0.0;
    for k in 0..3 {
        s += corr(None, Some(k), Some(k));
        s -= corr(Some(k), Some(k), None);
    }
    let mut t = 0.0;
    let mut z: f64 = 0.0;
    for x in 0..3 {
        for y in 0..3 {
            for w in 0..3 {
                let v3 = corr(Some(x), Some(y), Some(w));
                if x != y && y != w && x != w {
                    t += v3;
                } else {
                    z = z.max(v3.abs());
                }
            }
        }
    }
    // remaining Z candidates: singles and the off-S two-party correlators
    for k in 0..3 {
        z = z.max(corr(Some(k), None, None).abs());
        z = z.max(corr(None, Some(k), None).abs());
        z = z.max(corr(None, None, Some(k)).abs());
    }
    for i in 0..3 {
        for j in 0..3 {
            if i != j {
                z = z.max(corr(Some(i), Some(j), None).abs());
                z = z.max(corr(None, Some(i), Some(j)).abs());
            }
            z = z.max(corr(Some(i), None, Some(j)).abs());
        }
    }
    OracleReport {
        s,
        t,
        z,
        b: s / 3.0 - t,
    }
}

/// Re-index a pipeline pair distribution into the oracle's value-slot layout.
pub fn pair_in_value_order(dist: &bilocal::tbg::PairDistribution) -> Vec<f64> {
    let mut out = vec![0.0; ORACLE_LEN];
    for x in 0..3 {
        for z in 0..3 {
            for a in 0..2 {
                for b in 0..4 {
                    for ch in 0..2 {
                        let slot_a = if dist.a_value(a) > 0.0 { 0 } else { 1 };
                        let slot_c = if dist.c_value(ch) > 0.0 { 0 } else { 1 };
                        out[oracle_index(x, z, slot_a, b, slot_c)] = dist.prob(x, z, a, b, ch);
                    }
                }
            }
        }
    }
    out
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

/// Deterministic random density matrix on `nqubits` qubits, unit trace.
pub fn random_state(seed: u64, nqubits: usize) -> bilocal::DensityMatrix {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let side = 1usize << nqubits;
    let g = bilocal::ComplexMatrix::from_fn(side, side, |_, _| {
        c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
    });
    let h = g.matmul(&g.dagger()).unwrap();
    let tr = h.trace().re;
    bilocal::DensityMatrix::new(h.scale(1.0 / tr), vec![2; nqubits]).unwrap()
}
