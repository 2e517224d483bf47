//! The nonlinear ternary-input bilocal (TBG) inequality.
//!
//! For one outer pair (observer n on the A side, observer m on the C side)
//! the marginal distribution carries ternary settings x, z, binary outcomes
//! a, c and the four-valued middle outcome b. With the middle party's
//! effective sign B^y(b) = (m_b)_y, the inequality reads
//!
//! ```text
//! B = S/3 - T <= 3 + 5 Z
//! S = sum_{y=z} <B^y C_z> - sum_{x=y} <A_x B^y>
//! T = sum over all-distinct (x, y, z) of <A_x B^y C_z>
//! Z = max |.| over the 51 one/two/three-party correlators absent from S, T
//! ```

use serde::{Deserialize, Serialize};

use crate::channel::{strong_outcome_value, weak_outcome_value};
use crate::error::{Error, Result};
use crate::measurement::TETRAHEDRON;
use crate::scenario::CorrelationTensor;

/// Pair marginal P(a, b, c | x, z) of one Alice_n - middle - Charlie_m chain.
///
/// Normalized per setting pair; storage order (x, z, a, b, c).
#[derive(Debug, Clone, PartialEq)]
pub struct PairDistribution {
    n: usize,
    m: usize,
    p: Vec<f64>,
}

pub const PAIR_LEN: usize = 3 * 3 * 2 * 4 * 2;

#[inline]
fn pair_index(x: usize, z: usize, a: usize, b: usize, c: usize) -> usize {
    (((x * 3 + z) * 2 + a) * 4 + b) * 2 + c
}

impl PairDistribution {
    /// Wrap raw probabilities, checking shape and per-setting normalization.
    pub fn from_parts(n: usize, m: usize, p: Vec<f64>) -> Result<Self> {
        if !(1..=2).contains(&n) || !(1..=2).contains(&m) {
            return Err(Error::InvalidOutcome {
                name: "pair position",
                value: if (1..=2).contains(&n) { m } else { n },
            });
        }
        if p.len() != PAIR_LEN {
            return Err(Error::DimensionMismatch {
                context: "pair distribution length",
                left: p.len(),
                right: PAIR_LEN,
            });
        }
        let dist = Self { n, m, p };
        let dev = dist.normalization_deviation();
        if dev > 1e-10 {
            return Err(Error::Hygiene {
                check: "pair normalization",
                deviation: dev,
                tolerance: 1e-10,
            });
        }
        let ns = dist.no_signalling_deviation();
        if ns > 1e-10 {
            return Err(Error::Hygiene {
                check: "pair no-signalling",
                deviation: ns,
                tolerance: 1e-10,
            });
        }
        Ok(dist)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn prob(&self, x: usize, z: usize, a: usize, b: usize, c: usize) -> f64 {
        self.p[pair_index(x, z, a, b, c)]
    }

    pub fn values(&self) -> &[f64] {
        &self.p
    }

    pub fn normalization_deviation(&self) -> f64 {
        let mut dev: f64 = 0.0;
        for x in 0..3 {
            for z in 0..3 {
                let mut total = 0.0;
                for a in 0..2 {
                    for b in 0..4 {
                        for c in 0..2 {
                            total += self.prob(x, z, a, b, c);
                        }
                    }
                }
                dev = dev.max((total - 1.0).abs());
            }
        }
        dev
    }

    /// Largest no-signalling violation between the three parties: summing out
    /// the A outcome removes the x dependence and summing out the C outcome
    /// removes the z dependence.
    pub fn no_signalling_deviation(&self) -> f64 {
        let mut dev: f64 = 0.0;
        for z in 0..3 {
            for b in 0..4 {
                for c in 0..2 {
                    let mut lo = f64::INFINITY;
                    let mut hi = f64::NEG_INFINITY;
                    for x in 0..3 {
                        let total: f64 = (0..2).map(|a| self.prob(x, z, a, b, c)).sum();
                        lo = lo.min(total);
                        hi = hi.max(total);
                    }
                    dev = dev.max(hi - lo);
                }
            }
        }
        for x in 0..3 {
            for b in 0..4 {
                for a in 0..2 {
                    let mut lo = f64::INFINITY;
                    let mut hi = f64::NEG_INFINITY;
                    for z in 0..3 {
                        let total: f64 = (0..2).map(|c| self.prob(x, z, a, b, c)).sum();
                        lo = lo.min(total);
                        hi = hi.max(total);
                    }
                    dev = dev.max(hi - lo);
                }
            }
        }
        dev
    }

    /// Value carried by the A-side outcome bit (depends on whether observer n
    /// measures unsharply or strongly).
    pub fn a_value(&self, a: usize) -> f64 {
        if self.n == 1 {
            weak_outcome_value(a as u8)
        } else {
            strong_outcome_value(a as u8)
        }
    }

    pub fn c_value(&self, c: usize) -> f64 {
        if self.m == 1 {
            weak_outcome_value(c as u8)
        } else {
            strong_outcome_value(c as u8)
        }
    }
}

/// Marginalize the full tensor to the (n, m) pair: sum over the unobserved
/// observers' outcomes and average uniformly over their 3 x 3 settings, which
/// restores per-setting normalization.
pub fn marginalize(tensor: &CorrelationTensor, n: usize, m: usize) -> Result<PairDistribution> {
    if !(1..=2).contains(&n) || !(1..=2).contains(&m) {
        return Err(Error::InvalidOutcome {
            name: "pair position",
            value: if (1..=2).contains(&n) { m } else { n },
        });
    }
    let mut p = vec![0.0; PAIR_LEN];
    for x in 0..3 {
        for z in 0..3 {
            for a in 0..2 {
                for b in 0..4 {
                    for c in 0..2 {
                        let mut acc = 0.0;
                        for s_other_a in 0..3 {
                            for s_other_c in 0..3 {
                                for o_other_a in 0..2 {
                                    for o_other_c in 0..2 {
                                        let (x1, x2, a1, a2) = if n == 1 {
                                            (x, s_other_a, a, o_other_a)
                                        } else {
                                            (s_other_a, x, o_other_a, a)
                                        };
                                        let (z1, z2, c1, c2) = if m == 1 {
                                            (z, s_other_c, c, o_other_c)
                                        } else {
                                            (s_other_c, z, o_other_c, c)
                                        };
                                        acc += tensor.prob(x1, x2, z1, z2, a1, a2, c1, c2, b);
                                    }
                                }
                            }
                        }
                        p[pair_index(x, z, a, b, c)] = acc / 9.0;
                    }
                }
            }
        }
    }
    PairDistribution::from_parts(n, m, p)
}

/// The sign the middle outcome b contributes under effective setting y:
/// the y-th component of the tetrahedron triple m_b. Indices are 0-based.
pub fn bob_sign(b: usize, y: usize) -> f64 {
    TETRAHEDRON[b][y]
}

/// A one-, two- or three-party correlator descriptor. Setting indices are
/// 0-based; rendered labels are 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Correlator {
    A(usize),
    B(usize),
    C(usize),
    AB(usize, usize),
    AC(usize, usize),
    BC(usize, usize),
    ABC(usize, usize, usize),
}

impl Correlator {
    fn indices(&self) -> Vec<usize> {
        match *self {
            Correlator::A(x) | Correlator::B(x) | Correlator::C(x) => vec![x],
            Correlator::AB(x, y) | Correlator::AC(x, y) | Correlator::BC(x, y) => vec![x, y],
            Correlator::ABC(x, y, z) => vec![x, y, z],
        }
    }

    fn check(&self) -> Result<()> {
        if let Some(&bad) = self.indices().iter().find(|&&i| i > 2) {
            return Err(Error::InvalidOutcome {
                name: "correlator setting",
                value: bad,
            });
        }
        Ok(())
    }

    /// Appears in S: diagonal <A_x B^x> or <B^y C_y>.
    pub fn in_s(&self) -> bool {
        matches!(*self, Correlator::AB(x, y) | Correlator::BC(x, y) if x == y)
    }

    /// Appears in T: three-party with all settings distinct.
    pub fn in_t(&self) -> bool {
        matches!(*self, Correlator::ABC(x, y, z) if x != y && y != z && x != z)
    }

    pub fn label(&self) -> String {
        match *self {
            Correlator::A(x) => format!("A{}", x + 1),
            Correlator::B(y) => format!("B{}", y + 1),
            Correlator::C(z) => format!("C{}", z + 1),
            Correlator::AB(x, y) => format!("A{}B{}", x + 1, y + 1),
            Correlator::AC(x, z) => format!("A{}C{}", x + 1, z + 1),
            Correlator::BC(y, z) => format!("B{}C{}", y + 1, z + 1),
            Correlator::ABC(x, y, z) => format!("A{}B{}C{}", x + 1, y + 1, z + 1),
        }
    }

    /// All 63 correlators in canonical enumeration order.
    pub fn enumerate_all() -> Vec<Correlator> {
        let mut out = Vec::with_capacity(63);
        for x in 0..3 {
            out.push(Correlator::A(x));
        }
        for y in 0..3 {
            out.push(Correlator::B(y));
        }
        for z in 0..3 {
            out.push(Correlator::C(z));
        }
        for x in 0..3 {
            for y in 0..3 {
                out.push(Correlator::AB(x, y));
            }
        }
        for x in 0..3 {
            for z in 0..3 {
                out.push(Correlator::AC(x, z));
            }
        }
        for y in 0..3 {
            for z in 0..3 {
                out.push(Correlator::BC(y, z));
            }
        }
        for x in 0..3 {
            for y in 0..3 {
                for z in 0..3 {
                    out.push(Correlator::ABC(x, y, z));
                }
            }
        }
        out
    }
}

/// Expectation of the product of the named party values; absent parties are
/// summed out and absent settings averaged uniformly.
pub fn correlator(dist: &PairDistribution, which: &Correlator) -> Result<f64> {
    which.check()?;
    let (xs, zs): (Vec<usize>, Vec<usize>) = match *which {
        Correlator::A(x) | Correlator::AB(x, _) => (vec![x], (0..3).collect()),
        Correlator::B(_) => ((0..3).collect(), (0..3).collect()),
        Correlator::C(z) | Correlator::BC(_, z) => ((0..3).collect(), vec![z]),
        Correlator::AC(x, z) | Correlator::ABC(x, _, z) => (vec![x], vec![z]),
    };
    let mut acc = 0.0;
    for &x in &xs {
        for &z in &zs {
            for a in 0..2 {
                for b in 0..4 {
                    for c in 0..2 {
                        let p = dist.prob(x, z, a, b, c);
                        let value = match *which {
                            Correlator::A(_) => dist.a_value(a),
                            Correlator::B(y) => bob_sign(b, y),
                            Correlator::C(_) => dist.c_value(c),
                            Correlator::AB(_, y) => dist.a_value(a) * bob_sign(b, y),
                            Correlator::AC(_, _) => dist.a_value(a) * dist.c_value(c),
                            Correlator::BC(y, _) => bob_sign(b, y) * dist.c_value(c),
                            Correlator::ABC(_, y, _) => {
                                dist.a_value(a) * bob_sign(b, y) * dist.c_value(c)
                            }
                        };
                        acc += p * value;
                    }
                }
            }
        }
    }
    Ok(acc / (xs.len() * zs.len()) as f64)
}

/// How the nonlinear bound 3 + 5 Z is fed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ZMode {
    /// Z is the maximum absolute "other" correlator of the distribution.
    Computed,
    /// Z is an externally chosen bound parameter.
    Dial(f64),
}

/// One labelled correlator value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelatorValue {
    pub label: String,
    pub value: f64,
}

/// Evaluation of the inequality on one pair distribution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TbgReport {
    pub s: f64,
    pub t: f64,
    /// Maximum absolute value over the 51 "other" correlators, regardless of
    /// which bound is used.
    pub z: f64,
    pub b: f64,
    /// 3 + 5 Z_used, where Z_used is `z` in computed mode or the dial value.
    pub bound: f64,
    pub violated: bool,
    pub z_mode: ZMode,
    /// The 51 correlators feeding Z, in canonical order.
    pub correlators: Vec<CorrelatorValue>,
}

/// Compute S, T, Z and the inequality verdict for one pair distribution.
pub fn evaluate(dist: &PairDistribution, z_mode: ZMode) -> Result<TbgReport> {
    let mut s = 0.0;
    let mut t = 0.0;
    let mut z: f64 = 0.0;
    let mut others = Vec::with_capacity(51);
    for which in Correlator::enumerate_all() {
        let value = correlator(dist, &which)?;
        if which.in_s() {
            match which {
                Correlator::BC(_, _) => s += value,
                Correlator::AB(_, _) => s -= value,
                _ => unreachable!(),
            }
        } else if which.in_t() {
            t += value;
        } else {
            z = z.max(value.abs());
            others.push(CorrelatorValue {
                label: which.label(),
                value,
            });
        }
    }
    debug_assert_eq!(others.len(), 51);
    let b = s / 3.0 - t;
    let z_used = match z_mode {
        ZMode::Computed => z,
        ZMode::Dial(dial) => dial,
    };
    let bound = 3.0 + 5.0 * z_used;
    Ok(TbgReport {
        s,
        t,
        z,
        b,
        bound,
        violated: b > bound,
        z_mode,
        correlators: others,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Uniformly random pair distribution: every outcome tuple equally likely.
    fn uniform_pair(n: usize, m: usize) -> PairDistribution {
        PairDistribution::from_parts(n, m, vec![1.0 / 16.0; PAIR_LEN]).unwrap()
    }

    #[test]
    fn tetrahedron_signs() {
        // first row is all +1
        for y in 0..3 {
            assert_eq!(bob_sign(0, y), 1.0);
        }
        // second row is (+1, -1, -1)
        assert_eq!(bob_sign(1, 0), 1.0);
        assert_eq!(bob_sign(1, 1), -1.0);
        assert_eq!(bob_sign(1, 2), -1.0);
        // columns balance to zero and every row multiplies to +1
        for y in 0..3 {
            let total: f64 = (0..4).map(|b| bob_sign(b, y)).sum();
            assert_eq!(total, 0.0);
        }
        for b in 0..4 {
            let product: f64 = (0..3).map(|y| bob_sign(b, y)).product();
            assert_eq!(product, 1.0);
        }
    }

    #[test]
    fn correlators_vanish_on_uniform_distribution() {
        let dist = uniform_pair(1, 2);
        for which in Correlator::enumerate_all() {
            let v = correlator(&dist, &which).unwrap();
            assert!(v.abs() < 1e-14, "{} = {v}", which.label());
        }
        let report = evaluate(&dist, ZMode::Computed).unwrap();
        assert!(report.s.abs() < 1e-14);
        assert!(report.t.abs() < 1e-14);
        assert!(report.z < 1e-14);
        assert!(report.b.abs() < 1e-14);
        assert!(!report.violated);
        assert_eq!(report.correlators.len(), 51);
    }

    #[test]
    fn enumeration_counts() {
        let all = Correlator::enumerate_all();
        assert_eq!(all.len(), 63);
        assert_eq!(all.iter().filter(|c| c.in_s()).count(), 6);
        assert_eq!(all.iter().filter(|c| c.in_t()).count(), 6);
        assert_eq!(all.iter().filter(|c| !c.in_s() && !c.in_t()).count(), 51);
        // labels are unique
        let mut labels: Vec<String> = all.iter().map(|c| c.label()).collect();
        labels.sort();
        labels.dedup();
        assert_eq!(labels.len(), 63);
    }

    #[test]
    fn dial_mode_only_moves_the_bound() {
        let dist = uniform_pair(2, 1);
        let computed = evaluate(&dist, ZMode::Computed).unwrap();
        let dialed = evaluate(&dist, ZMode::Dial(0.4)).unwrap();
        assert_eq!(computed.s, dialed.s);
        assert_eq!(computed.z, dialed.z);
        assert!((dialed.bound - 5.0).abs() < 1e-15);
        assert!(!dialed.violated);
    }

    #[test]
    fn value_maps_follow_observer_roles() {
        let first = uniform_pair(1, 1);
        let second = uniform_pair(2, 2);
        // unsharp observers: outcome 0 carries value -1
        assert_eq!(first.a_value(0), -1.0);
        assert_eq!(first.c_value(1), 1.0);
        // strong observers: plain Lueders labels
        assert_eq!(second.a_value(0), 1.0);
        assert_eq!(second.c_value(1), -1.0);
    }

    #[test]
    fn report_serializes_with_stable_field_names() {
        let report = evaluate(&uniform_pair(1, 2), ZMode::Computed).unwrap();
        let value = serde_json::to_value(&report).unwrap();
        let object = value.as_object().unwrap();
        for key in [
            "s",
            "t",
            "z",
            "b",
            "bound",
            "violated",
            "z_mode",
            "correlators",
        ] {
            assert!(object.contains_key(key), "missing field {key}");
        }
        assert_eq!(value["z_mode"], serde_json::json!("computed"));
        assert_eq!(value["correlators"].as_array().unwrap().len(), 51);
        assert_eq!(value["correlators"][0]["label"], "A1");
        let dialed = evaluate(&uniform_pair(1, 2), ZMode::Dial(0.25)).unwrap();
        let value = serde_json::to_value(&dialed).unwrap();
        assert_eq!(value["z_mode"], serde_json::json!({"dial": 0.25}));
    }

    #[test]
    fn from_parts_rejects_bad_input() {
        assert!(PairDistribution::from_parts(0, 1, vec![0.0; PAIR_LEN]).is_err());
        assert!(PairDistribution::from_parts(1, 3, vec![0.0; PAIR_LEN]).is_err());
        assert!(PairDistribution::from_parts(1, 1, vec![0.0; 10]).is_err());
        // unnormalized content is rejected
        assert!(PairDistribution::from_parts(1, 1, vec![0.1; PAIR_LEN]).is_err());
    }

    #[test]
    fn relabeling_one_setting_negates_exactly_its_correlators() {
        // build a structured (non-uniform) distribution from the pipeline
        let config = crate::scenario::ScenarioConfig::symmetric(
            0.3,
            crate::measurement::PointerKind::Square,
            0.8,
        );
        let tensor = crate::scenario::run(&config).unwrap();
        let dist = marginalize(&tensor, 1, 1).unwrap();

        // flip the A outcome for setting x = 1 only
        let mut flipped = vec![0.0; PAIR_LEN];
        for x in 0..3 {
            for z in 0..3 {
                for a in 0..2 {
                    for b in 0..4 {
                        for c in 0..2 {
                            let src = if x == 1 { 1 - a } else { a };
                            flipped[pair_index(x, z, a, b, c)] = dist.prob(x, z, src, b, c);
                        }
                    }
                }
            }
        }
        let flipped = PairDistribution::from_parts(1, 1, flipped).unwrap();

        for which in Correlator::enumerate_all() {
            let before = correlator(&dist, &which).unwrap();
            let after = correlator(&flipped, &which).unwrap();
            let involves_a1 = matches!(
                which,
                Correlator::A(1)
                    | Correlator::AB(1, _)
                    | Correlator::AC(1, _)
                    | Correlator::ABC(1, _, _)
            );
            if involves_a1 {
                assert!((before + after).abs() < 1e-12, "{}", which.label());
            } else {
                assert!((before - after).abs() < 1e-12, "{}", which.label());
            }
        }
        // the Z candidate set is closed under the flip
        let z_before = evaluate(&dist, ZMode::Computed).unwrap().z;
        let z_after = evaluate(&flipped, ZMode::Computed).unwrap().z;
        assert!((z_before - z_after).abs() < 1e-12);
    }
}
