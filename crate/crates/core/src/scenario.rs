//! Assembly of the full extended bilocal experiment: two two-qubit sources,
//! a joint measurement in the middle, and the sequence of outer-party
//! measurements (unsharp observer then strong observer on each side).
//!
//! `run` enumerates the exact joint outcome distribution over all
//! 3^4 setting combinations; nothing is sampled. Qubit order in the
//! four-qubit register is (outer A, middle first, middle second, outer C);
//! after the joint projection the remaining register is (A, C) with the
//! unsharp observers acting first on each side.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::channel::{ejm_project, strong_outcome_probability, strong_update, weak_update_both};
use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, DensityMatrix};
use crate::measurement::{ejm_basis, pointer_pair, triad, ObservableTriad, PointerKind};

/// Two-qubit source description.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum SourceSpec {
    /// The maximally entangled state (|01> - |10>)/sqrt(2).
    Singlet,
    /// Singlet mixed with white noise at visibility v.
    Werner { v: f64 },
}

/// The singlet state vector.
pub fn singlet_state() -> [Complex64; 4] {
    let s = 1.0 / 2f64.sqrt();
    [
        Complex64::new(0.0, 0.0),
        Complex64::new(s, 0.0),
        Complex64::new(-s, 0.0),
        Complex64::new(0.0, 0.0),
    ]
}

/// Materialize a source state; a Werner state at v = 1 is exactly the singlet.
pub fn make_source(spec: &SourceSpec) -> Result<DensityMatrix> {
    let v = match spec {
        SourceSpec::Singlet => 1.0,
        SourceSpec::Werner { v } => {
            if !(0.0..=1.0).contains(v) || !v.is_finite() {
                return Err(Error::OutOfRange {
                    name: "visibility",
                    value: *v,
                    min: 0.0,
                    max: 1.0,
                });
            }
            *v
        }
    };
    let pure = ComplexMatrix::projector_from_state(&singlet_state());
    let noise = ComplexMatrix::identity(4).scale((1.0 - v) / 4.0);
    DensityMatrix::new(pure.scale(v).add(&noise), vec![2, 2])
}

/// Euler-like angles of one observable triad.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TriadAngles {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
}

impl TriadAngles {
    pub fn new(alpha: f64, beta: f64, gamma: f64) -> Self {
        Self { alpha, beta, gamma }
    }

    pub fn build(&self) -> ObservableTriad {
        triad(self.alpha, self.beta, self.gamma)
    }
}

/// The settings reported as optimal for the inequality in this scenario:
/// gamma = 0, alpha = beta = pi/4.
pub const OPTIMAL_ANGLES: TriadAngles = TriadAngles {
    alpha: std::f64::consts::FRAC_PI_4,
    beta: std::f64::consts::FRAC_PI_4,
    gamma: 0.0,
};

/// Axis-aligned settings: the plain Pauli triad.
pub const AXIS_ANGLES: TriadAngles = TriadAngles {
    alpha: 0.0,
    beta: 0.0,
    gamma: 0.0,
};

/// Full description of one experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub source1: SourceSpec,
    pub source2: SourceSpec,
    /// Joint-measurement entanglement angle in [0, pi/2].
    pub theta: f64,
    pub pointer: PointerKind,
    /// Sharpness of the first observer on the A side.
    pub g1: f64,
    /// Sharpness of the first observer on the C side.
    pub g2: f64,
    pub angles_a1: TriadAngles,
    pub angles_a2: TriadAngles,
    pub angles_c1: TriadAngles,
    pub angles_c2: TriadAngles,
}

impl ScenarioConfig {
    /// Singlet sources, optimal angles for all four observers, shared
    /// sharpness g for both unsharp observers.
    pub fn symmetric(theta: f64, pointer: PointerKind, g: f64) -> Self {
        Self {
            source1: SourceSpec::Singlet,
            source2: SourceSpec::Singlet,
            theta,
            pointer,
            g1: g,
            g2: g,
            angles_a1: OPTIMAL_ANGLES,
            angles_a2: OPTIMAL_ANGLES,
            angles_c1: OPTIMAL_ANGLES,
            angles_c2: OPTIMAL_ANGLES,
        }
    }

    pub fn with_sources(mut self, source1: SourceSpec, source2: SourceSpec) -> Self {
        self.source1 = source1;
        self.source2 = source2;
        self
    }

    pub fn with_angles(mut self, angles: TriadAngles) -> Self {
        self.angles_a1 = angles;
        self.angles_a2 = angles;
        self.angles_c1 = angles;
        self.angles_c2 = angles;
        self
    }
}

pub const SETTINGS: usize = 3;
pub const JOINT_OUTCOMES: usize = 4;
/// Number of stored probabilities: 3^4 setting combinations times
/// 2*2*2*2*4 outcome tuples.
pub const TENSOR_LEN: usize = 81 * 16 * JOINT_OUTCOMES;

/// Exact joint distribution P(a1, a2, b, c1, c2 | x1, x2, z1, z2).
///
/// Storage order is (x1, x2, z1, z2, a1, a2, c1, c2, b) with b fastest.
/// Settings and outcomes are 0-indexed here; serialized forms label settings
/// and the joint outcome 1-based.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationTensor {
    p: Vec<f64>,
}

#[inline]
#[allow(clippy::too_many_arguments)]
pub(crate) fn tensor_index(
    x1: usize,
    x2: usize,
    z1: usize,
    z2: usize,
    a1: usize,
    a2: usize,
    c1: usize,
    c2: usize,
    b: usize,
) -> usize {
    ((((((((x1 * 3 + x2) * 3 + z1) * 3 + z2) * 2 + a1) * 2 + a2) * 2 + c1) * 2 + c2) * 4) + b
}

impl CorrelationTensor {
    /// Wrap raw probabilities (for deserialization and tests); content checks
    /// live in `validate`.
    pub fn from_values(p: Vec<f64>) -> Result<Self> {
        if p.len() != TENSOR_LEN {
            return Err(Error::DimensionMismatch {
                context: "correlation tensor length",
                left: p.len(),
                right: TENSOR_LEN,
            });
        }
        Ok(Self { p })
    }

    pub fn values(&self) -> &[f64] {
        &self.p
    }

    #[allow(clippy::too_many_arguments)]
    pub fn prob(
        &self,
        x1: usize,
        x2: usize,
        z1: usize,
        z2: usize,
        a1: usize,
        a2: usize,
        c1: usize,
        c2: usize,
        b: usize,
    ) -> f64 {
        self.p[tensor_index(x1, x2, z1, z2, a1, a2, c1, c2, b)]
    }

    /// max |sum of probabilities - 1| over the 81 setting combinations.
    pub fn normalization_deviation(&self) -> f64 {
        let mut dev: f64 = 0.0;
        for chunk in self.p.chunks(64) {
            let total: f64 = chunk.iter().sum();
            dev = dev.max((total - 1.0).abs());
        }
        dev
    }

    /// How far any entry strays below 0 or above 1.
    pub fn range_deviation(&self) -> f64 {
        self.p
            .iter()
            .map(|&p| (-p).max(p - 1.0).max(0.0))
            .fold(0.0, f64::max)
    }

    /// Largest no-signalling violation over the constraints the scenario's
    /// causal structure imposes. Within one side, the first observer's
    /// setting legitimately shifts the second observer's statistics (the
    /// measurement disturbance carries it), so the checks are:
    ///
    /// - either side's joint outcome marginal (with b) is independent of the
    ///   opposite side's settings,
    /// - summing out a second observer's outcome removes all dependence on
    ///   that observer's setting.
    pub fn no_signalling_deviation(&self) -> f64 {
        let mut dev: f64 = 0.0;

        // C side (c1, c2, b | z1, z2) must not see (x1, x2)
        for z1 in 0..3 {
            for z2 in 0..3 {
                for c1 in 0..2 {
                    for c2 in 0..2 {
                        for b in 0..4 {
                            let mut lo = f64::INFINITY;
                            let mut hi = f64::NEG_INFINITY;
                            for x1 in 0..3 {
                                for x2 in 0..3 {
                                    let mut total = 0.0;
                                    for a1 in 0..2 {
                                        for a2 in 0..2 {
                                            total += self.prob(x1, x2, z1, z2, a1, a2, c1, c2, b);
                                        }
                                    }
                                    lo = lo.min(total);
                                    hi = hi.max(total);
                                }
                            }
                            dev = dev.max(hi - lo);
                        }
                    }
                }
            }
        }

        // A side (a1, a2, b | x1, x2) must not see (z1, z2)
        for x1 in 0..3 {
            for x2 in 0..3 {
                for a1 in 0..2 {
                    for a2 in 0..2 {
                        for b in 0..4 {
                            let mut lo = f64::INFINITY;
                            let mut hi = f64::NEG_INFINITY;
                            for z1 in 0..3 {
                                for z2 in 0..3 {
                                    let mut total = 0.0;
                                    for c1 in 0..2 {
                                        for c2 in 0..2 {
                                            total += self.prob(x1, x2, z1, z2, a1, a2, c1, c2, b);
                                        }
                                    }
                                    lo = lo.min(total);
                                    hi = hi.max(total);
                                }
                            }
                            dev = dev.max(hi - lo);
                        }
                    }
                }
            }
        }

        // summing out a2 removes the x2 dependence; same for c2 and z2
        for x1 in 0..3 {
            for z1 in 0..3 {
                for z2 in 0..3 {
                    for a1 in 0..2 {
                        for c1 in 0..2 {
                            for c2 in 0..2 {
                                for b in 0..4 {
                                    let mut lo = f64::INFINITY;
                                    let mut hi = f64::NEG_INFINITY;
                                    for x2 in 0..3 {
                                        let total: f64 = (0..2)
                                            .map(|a2| self.prob(x1, x2, z1, z2, a1, a2, c1, c2, b))
                                            .sum();
                                        lo = lo.min(total);
                                        hi = hi.max(total);
                                    }
                                    dev = dev.max(hi - lo);
                                }
                            }
                        }
                    }
                }
            }
        }
        for x1 in 0..3 {
            for x2 in 0..3 {
                for z1 in 0..3 {
                    for a1 in 0..2 {
                        for a2 in 0..2 {
                            for c1 in 0..2 {
                                for b in 0..4 {
                                    let mut lo = f64::INFINITY;
                                    let mut hi = f64::NEG_INFINITY;
                                    for z2 in 0..3 {
                                        let total: f64 = (0..2)
                                            .map(|c2| self.prob(x1, x2, z1, z2, a1, a2, c1, c2, b))
                                            .sum();
                                        lo = lo.min(total);
                                        hi = hi.max(total);
                                    }
                                    dev = dev.max(hi - lo);
                                }
                            }
                        }
                    }
                }
            }
        }
        dev
    }

    /// The (1,1)-pair marginal (sum over the second observers' outcomes,
    /// uniform average over their settings), laid out as (x, z, a, b, c).
    pub(crate) fn first_pair_marginal(&self) -> Vec<f64> {
        let mut out = vec![0.0; 3 * 3 * 2 * 4 * 2];
        for x1 in 0..3 {
            for z1 in 0..3 {
                for a1 in 0..2 {
                    for b in 0..4 {
                        for c1 in 0..2 {
                            let mut acc = 0.0;
                            for x2 in 0..3 {
                                for z2 in 0..3 {
                                    for a2 in 0..2 {
                                        for c2 in 0..2 {
                                            acc += self.prob(x1, x2, z1, z2, a1, a2, c1, c2, b);
                                        }
                                    }
                                }
                            }
                            out[(((x1 * 3 + z1) * 2 + a1) * 4 + b) * 2 + c1] = acc / 9.0;
                        }
                    }
                }
            }
        }
        out
    }

    /// Run the full numeric-hygiene gate: per-setting normalization,
    /// probability range, no-signalling, and agreement of the (1,1)-pair
    /// marginal with a direct three-layer computation that never touches the
    /// second observers.
    pub fn validate(&self, config: &ScenarioConfig) -> Result<()> {
        let norm = self.normalization_deviation();
        if norm > 1e-10 {
            return Err(Error::Hygiene {
                check: "per-setting normalization",
                deviation: norm,
                tolerance: 1e-10,
            });
        }
        let range = self.range_deviation();
        if range > 1e-10 {
            return Err(Error::Hygiene {
                check: "probability range",
                deviation: range,
                tolerance: 1e-10,
            });
        }
        let ns = self.no_signalling_deviation();
        if ns > 1e-10 {
            return Err(Error::Hygiene {
                check: "no-signalling",
                deviation: ns,
                tolerance: 1e-10,
            });
        }
        let direct = first_pair_direct(config)?;
        let marginal = self.first_pair_marginal();
        let downstream = direct
            .iter()
            .zip(&marginal)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        if downstream > 1e-12 {
            return Err(Error::Hygiene {
                check: "downstream independence",
                deviation: downstream,
                tolerance: 1e-12,
            });
        }
        Ok(())
    }
}

/// The three-layer chain (joint projection, then one unsharp measurement per
/// side) computed directly, bypassing the second observers entirely.
/// Layout matches `first_pair_marginal`.
pub fn first_pair_direct(config: &ScenarioConfig) -> Result<Vec<f64>> {
    let basis = ejm_basis(config.theta)?;
    let fg_a = pointer_pair(config.pointer, config.g1)?;
    let fg_c = pointer_pair(config.pointer, config.g2)?;
    let triad_a1 = config.angles_a1.build();
    let triad_c1 = config.angles_c1.build();
    let rho1 = make_source(&config.source1)?;
    let rho2 = make_source(&config.source2)?;
    let rho_abc = DensityMatrix::new(rho1.mat().kron(rho2.mat()), vec![2, 2, 2, 2])?;

    let mut out = vec![0.0; 3 * 3 * 2 * 4 * 2];
    for b in 0..4 {
        let swapped = ejm_project(&rho_abc, &basis, b)?;
        for x in 0..3 {
            let branches_a = weak_update_both(&swapped, 0, triad_a1.observable(x), &fg_a)?;
            for branch_a in &branches_a {
                for z in 0..3 {
                    let branches_c =
                        weak_update_both(&branch_a.state, 1, triad_c1.observable(z), &fg_c)?;
                    for branch_c in &branches_c {
                        let idx = (((x * 3 + z) * 2 + branch_a.outcome as usize) * 4 + b) * 2
                            + branch_c.outcome as usize;
                        out[idx] = branch_c.weight;
                    }
                }
            }
        }
    }
    Ok(out)
}

/// Compute the exact joint outcome distribution for one configuration.
///
/// The measurement order is middle party, then A-side unsharp, A-side strong,
/// C-side unsharp, C-side strong; every joint probability is the trace of the
/// fully updated state.
pub fn run(config: &ScenarioConfig) -> Result<CorrelationTensor> {
    let basis = ejm_basis(config.theta)?;
    let fg_a = pointer_pair(config.pointer, config.g1)?;
    let fg_c = pointer_pair(config.pointer, config.g2)?;
    let triad_a1 = config.angles_a1.build();
    let triad_a2 = config.angles_a2.build();
    let triad_c1 = config.angles_c1.build();
    let triad_c2 = config.angles_c2.build();
    let rho1 = make_source(&config.source1)?;
    let rho2 = make_source(&config.source2)?;
    let rho_abc = DensityMatrix::new(rho1.mat().kron(rho2.mat()), vec![2, 2, 2, 2])?;

    let mut p = vec![0.0; TENSOR_LEN];
    for b in 0..4 {
        let swapped = ejm_project(&rho_abc, &basis, b)?;
        for x1 in 0..3 {
            let branches_a1 = weak_update_both(&swapped, 0, triad_a1.observable(x1), &fg_a)?;
            for branch_a1 in &branches_a1 {
                let a1 = branch_a1.outcome as usize;
                for x2 in 0..3 {
                    for a2 in 0..2 {
                        let after_a2 =
                            strong_update(&branch_a1.state, 0, triad_a2.observable(x2), a2 as u8)?;
                        for z1 in 0..3 {
                            let branches_c1 =
                                weak_update_both(&after_a2, 1, triad_c1.observable(z1), &fg_c)?;
                            for branch_c1 in &branches_c1 {
                                let c1 = branch_c1.outcome as usize;
                                for z2 in 0..3 {
                                    for c2 in 0..2 {
                                        let prob = strong_outcome_probability(
                                            &branch_c1.state,
                                            1,
                                            triad_c2.observable(z2),
                                            c2 as u8,
                                        )?;
                                        p[tensor_index(x1, x2, z1, z2, a1, a2, c1, c2, b)] = prob;
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    Ok(CorrelationTensor { p })
}

/// `run` followed by the numeric-hygiene gate.
pub fn run_validated(config: &ScenarioConfig) -> Result<CorrelationTensor> {
    let tensor = run(config)?;
    tensor.validate(config)?;
    Ok(tensor)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::hermitian_eigen;

    #[test]
    fn werner_extremes() {
        let pure = make_source(&SourceSpec::Werner { v: 1.0 }).unwrap();
        let singlet = ComplexMatrix::projector_from_state(&singlet_state());
        assert!(pure.mat().max_abs_diff(&singlet) < 1e-15);
        let mixed = make_source(&SourceSpec::Werner { v: 0.0 }).unwrap();
        assert!(
            mixed
                .mat()
                .max_abs_diff(&ComplexMatrix::identity(4).scale(0.25))
                < 1e-15
        );
        assert!(make_source(&SourceSpec::Werner { v: 1.5 }).is_err());
        assert!(make_source(&SourceSpec::Werner { v: -0.1 }).is_err());
    }

    #[test]
    fn werner_half_eigenvalues() {
        let rho = make_source(&SourceSpec::Werner { v: 0.5 }).unwrap();
        let (vals, _) = hermitian_eigen(rho.mat()).unwrap();
        let want = [0.125, 0.125, 0.125, 0.625];
        for (got, want) in vals.iter().zip(&want) {
            assert!((got - want).abs() < 1e-12);
        }
    }

    #[test]
    fn tensor_normalizes_for_assorted_configs() {
        let configs = [
            ScenarioConfig::symmetric(0.0, PointerKind::Square, 0.4),
            ScenarioConfig::symmetric(1.1, PointerKind::Optimal, 0.9),
            ScenarioConfig::symmetric(0.5, PointerKind::Square, 0.0).with_sources(
                SourceSpec::Werner { v: 0.7 },
                SourceSpec::Werner { v: 0.35 },
            ),
        ];
        for config in &configs {
            let tensor = run_validated(config).unwrap();
            assert!(tensor.normalization_deviation() < 1e-12);
        }
    }

    #[test]
    fn hygiene_catches_corruption() {
        let config = ScenarioConfig::symmetric(0.3, PointerKind::Square, 0.5);
        let mut tensor = run(&config).unwrap();
        tensor.p[0] += 1e-6;
        assert!(matches!(
            tensor.validate(&config),
            Err(Error::Hygiene { .. })
        ));
    }

    #[test]
    fn probabilities_affine_in_visibility() {
        // three-point collinearity in v1 at fixed everything else
        let base = ScenarioConfig::symmetric(0.4, PointerKind::Optimal, 0.6);
        let at = |v: f64| {
            let config = base
                .clone()
                .with_sources(SourceSpec::Werner { v }, SourceSpec::Werner { v: 0.8 });
            run(&config).unwrap()
        };
        let lo = at(0.0);
        let mid = at(0.5);
        let hi = at(1.0);
        let dev = lo
            .values()
            .iter()
            .zip(mid.values())
            .zip(hi.values())
            .map(|((l, m), h)| (0.5 * (l + h) - m).abs())
            .fold(0.0, f64::max);
        assert!(dev < 1e-10, "affinity deviation {dev}");
    }

    #[test]
    fn strong_limit_weights_match_direct_three_layer() {
        let config = ScenarioConfig::symmetric(0.9, PointerKind::Square, 0.73);
        let tensor = run(&config).unwrap();
        let direct = first_pair_direct(&config).unwrap();
        let marginal = tensor.first_pair_marginal();
        let dev = direct
            .iter()
            .zip(&marginal)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        assert!(dev < 1e-13);
    }
}
