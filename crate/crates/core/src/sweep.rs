//! Parameter-space exploration: sharpness sweeps of the four pair
//! inequalities, simultaneous-violation window extraction, Z-onset and
//! critical-visibility searches.
//!
//! Everything here is deterministic: grid points are evaluated independently
//! (in parallel, merged by index) and refinement uses fixed bisection
//! schedules, so identical inputs give bit-identical tables.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::measurement::PointerKind;
use crate::scenario::{run_validated, ScenarioConfig, SourceSpec, TriadAngles, OPTIMAL_ANGLES};
use crate::tbg::{evaluate, marginalize, ZMode};

pub const PAIRS: [(usize, usize); 4] = [(1, 1), (1, 2), (2, 1), (2, 2)];

/// What to sweep: everything of the scenario except the shared sharpness G.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub theta: f64,
    pub pointer: PointerKind,
    pub source1: SourceSpec,
    pub source2: SourceSpec,
    pub z_mode: ZMode,
    pub angles_a1: TriadAngles,
    pub angles_a2: TriadAngles,
    pub angles_c1: TriadAngles,
    pub angles_c2: TriadAngles,
}

impl SweepSpec {
    /// Singlet sources, optimal angles, computed Z.
    pub fn new(theta: f64, pointer: PointerKind) -> Self {
        Self {
            theta,
            pointer,
            source1: SourceSpec::Singlet,
            source2: SourceSpec::Singlet,
            z_mode: ZMode::Computed,
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

    pub fn with_z_mode(mut self, z_mode: ZMode) -> Self {
        self.z_mode = z_mode;
        self
    }

    pub fn config_at(&self, g: f64) -> ScenarioConfig {
        ScenarioConfig {
            source1: self.source1,
            source2: self.source2,
            theta: self.theta,
            pointer: self.pointer,
            g1: g,
            g2: g,
            angles_a1: self.angles_a1,
            angles_a2: self.angles_a2,
            angles_c1: self.angles_c1,
            angles_c2: self.angles_c2,
        }
    }
}

/// Inequality evaluation of one pair at one grid point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairStats {
    pub n: usize,
    pub m: usize,
    pub b: f64,
    pub z: f64,
    pub bound: f64,
    pub violated: bool,
}

/// One sharpness grid point: all four pair evaluations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub g: f64,
    pub pairs: [PairStats; 4],
}

impl SweepRow {
    pub fn pair(&self, n: usize, m: usize) -> &PairStats {
        &self.pairs[(n - 1) * 2 + (m - 1)]
    }

    pub fn all_violated(&self) -> bool {
        self.pairs.iter().all(|p| p.violated)
    }

    pub fn min_b(&self) -> f64 {
        self.pairs.iter().map(|p| p.b).fold(f64::INFINITY, f64::min)
    }

    pub fn max_z(&self) -> f64 {
        self.pairs.iter().map(|p| p.z).fold(0.0, f64::max)
    }
}

/// Evaluate one sharpness value exactly.
pub fn evaluate_g_point(spec: &SweepSpec, g: f64) -> Result<SweepRow> {
    let tensor = run_validated(&spec.config_at(g))?;
    let mut pairs = Vec::with_capacity(4);
    for &(n, m) in PAIRS.iter() {
        let dist = marginalize(&tensor, n, m)?;
        let report = evaluate(&dist, spec.z_mode)?;
        pairs.push(PairStats {
            n,
            m,
            b: report.b,
            z: report.z,
            bound: report.bound,
            violated: report.violated,
        });
    }
    Ok(SweepRow {
        g,
        pairs: [pairs[0], pairs[1], pairs[2], pairs[3]],
    })
}

/// Evaluate a grid of sharpness values (in parallel, outputs ordered as the
/// input grid).
pub fn sweep_g(spec: &SweepSpec, grid: &[f64]) -> Result<Vec<SweepRow>> {
    grid.par_iter()
        .map(|&g| evaluate_g_point(spec, g))
        .collect()
}

/// Uniform grid of `steps >= 2` points covering [0, 1] inclusive.
pub fn g_grid(steps: usize) -> Vec<f64> {
    assert!(steps >= 2, "grid needs at least two points");
    (0..steps).map(|i| i as f64 / (steps - 1) as f64).collect()
}

/// How the onset search feeds the nonlinear bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OnsetMode {
    /// Per-pair computed Z; the window is where every pair beats its own
    /// data-derived bound.
    Computed,
    /// A single dialed bound parameter shared by all pairs.
    Dial,
}

/// Result of a Z-onset search at one (theta, pointer) cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdResult {
    pub theta: f64,
    pub pointer: PointerKind,
    pub mode: OnsetMode,
    /// Computed mode: max over pairs of Z at the lower edge of the first
    /// simultaneous-violation window; `None` when no violation exists.
    /// Dial mode: (B* - 3)/5 with B* the best min-over-pairs value.
    pub z_onset: Option<f64>,
    /// G interval(s) of simultaneous violation (degenerate [g*, g*] in dial
    /// mode).
    pub g_window: Vec<[f64; 2]>,
}

const ONSET_GRID_STEPS: usize = 1001; // grid step 1e-3
const EDGE_REFINE_TOL: f64 = 1e-6;

/// Search the sharpness axis for simultaneous violation of all four pairs.
///
/// Computed mode scans a 1e-3 grid, refines every window edge by bisection to
/// 1e-6 and reports the largest per-pair Z at the first window's lower edge.
/// The no-violation case yields an explicit empty result. Dial mode locates
/// B* = max_G min over pairs of B and reports the largest dial value
/// (B* - 3)/5 for which some G still violates.
pub fn find_z_onset(
    theta: f64,
    pointer: PointerKind,
    sources: (SourceSpec, SourceSpec),
    mode: OnsetMode,
) -> Result<ThresholdResult> {
    let spec = SweepSpec::new(theta, pointer).with_sources(sources.0, sources.1);
    let grid = g_grid(ONSET_GRID_STEPS);
    let rows = sweep_g(&spec, &grid)?;

    match mode {
        OnsetMode::Computed => {
            let ok: Vec<bool> = rows.iter().map(|r| r.all_violated()).collect();
            let mut windows = Vec::new();
            let mut i = 0;
            while i < ok.len() {
                if ok[i] {
                    let start = i;
                    while i + 1 < ok.len() && ok[i + 1] {
                        i += 1;
                    }
                    let lo = if start == 0 {
                        0.0
                    } else {
                        refine_edge(&spec, grid[start - 1], grid[start])?
                    };
                    let hi = if i == ok.len() - 1 {
                        1.0
                    } else {
                        refine_edge(&spec, grid[i + 1], grid[i])?
                    };
                    windows.push([lo, hi]);
                }
                i += 1;
            }
            let z_onset = match windows.first() {
                Some(window) => Some(evaluate_g_point(&spec, window[0])?.max_z()),
                None => None,
            };
            Ok(ThresholdResult {
                theta,
                pointer,
                mode,
                z_onset,
                g_window: windows,
            })
        }
        OnsetMode::Dial => {
            let mut best = 0usize;
            for (i, row) in rows.iter().enumerate() {
                if row.min_b() > rows[best].min_b() {
                    best = i;
                }
            }
            // deterministic local zoom around the best grid point
            let mut g_star = grid[best];
            let mut b_star = rows[best].min_b();
            let mut half = 1.0 / (ONSET_GRID_STEPS - 1) as f64;
            while half > EDGE_REFINE_TOL {
                let lo = (g_star - half).max(0.0);
                let hi = (g_star + half).min(1.0);
                for k in 0..=20 {
                    let g = lo + (hi - lo) * k as f64 / 20.0;
                    let value = evaluate_g_point(&spec, g)?.min_b();
                    if value > b_star {
                        b_star = value;
                        g_star = g;
                    }
                }
                half /= 5.0;
            }
            Ok(ThresholdResult {
                theta,
                pointer,
                mode,
                z_onset: Some((b_star - 3.0) / 5.0),
                g_window: vec![[g_star, g_star]],
            })
        }
    }
}

/// Bisect between a non-violating and a violating sharpness for the window
/// edge, to 1e-6 in G. Returns a point on the violating side.
fn refine_edge(spec: &SweepSpec, mut outside: f64, mut inside: f64) -> Result<f64> {
    while (outside - inside).abs() > EDGE_REFINE_TOL {
        let mid = 0.5 * (outside + inside);
        if evaluate_g_point(spec, mid)?.all_violated() {
            inside = mid;
        } else {
            outside = mid;
        }
    }
    Ok(inside)
}

/// Apply `find_z_onset` over a theta grid for each pointer kind; rows are
/// ordered theta-major, pointer-minor, as given.
pub fn theta_scan(
    thetas: &[f64],
    pointers: &[PointerKind],
    sources: (SourceSpec, SourceSpec),
    mode: OnsetMode,
) -> Result<Vec<ThresholdResult>> {
    let mut out = Vec::with_capacity(thetas.len() * pointers.len());
    for &theta in thetas {
        for &pointer in pointers {
            out.push(find_z_onset(theta, pointer, sources, mode)?);
        }
    }
    Ok(out)
}

/// Bound fed to the visibility search.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VisibilityBound {
    /// 3 + 5 z with a fixed dial value z.
    Dial(f64),
    /// Per-pair computed Z.
    Computed,
}

const VISIBILITY_G_STEPS: usize = 201;
const VISIBILITY_V_TOL: f64 = 1e-4;

/// Minimal symmetric visibility v1 = v2 = v at which the (1,1) and (2,2)
/// pairs still violate simultaneously for some sharpness G, found by
/// bisection to 1e-4. `None` when no visibility in [0, 1] suffices. The
/// returned value equals V = sqrt(v1 v2) since the search is symmetric.
pub fn find_critical_visibility(
    theta: f64,
    pointer: PointerKind,
    bound: VisibilityBound,
) -> Result<Option<f64>> {
    let z_mode = match bound {
        VisibilityBound::Dial(z) => ZMode::Dial(z),
        VisibilityBound::Computed => ZMode::Computed,
    };
    let feasible = |v: f64| -> Result<bool> {
        let spec = SweepSpec::new(theta, pointer)
            .with_sources(SourceSpec::Werner { v }, SourceSpec::Werner { v })
            .with_z_mode(z_mode);
        let grid = g_grid(VISIBILITY_G_STEPS);
        let rows = sweep_g(&spec, &grid)?;
        let both = |row: &SweepRow| row.pair(1, 1).violated && row.pair(2, 2).violated;
        if rows.iter().any(&both) {
            return Ok(true);
        }
        // one deterministic zoom around the best margin in case the window is
        // narrower than the coarse grid
        let margin = |row: &SweepRow| {
            let p11 = row.pair(1, 1);
            let p22 = row.pair(2, 2);
            (p11.b - p11.bound).min(p22.b - p22.bound)
        };
        let mut best = 0usize;
        for (i, row) in rows.iter().enumerate() {
            if margin(row) > margin(&rows[best]) {
                best = i;
            }
        }
        let step = 1.0 / (VISIBILITY_G_STEPS - 1) as f64;
        let lo = (grid[best] - step).max(0.0);
        let hi = (grid[best] + step).min(1.0);
        for k in 0..=40 {
            let g = lo + (hi - lo) * k as f64 / 40.0;
            let row = evaluate_g_point(&spec, g)?;
            if both(&row) {
                return Ok(true);
            }
        }
        Ok(false)
    };

    if !feasible(1.0)? {
        return Ok(None);
    }
    let mut lo = 0.0;
    let mut hi = 1.0;
    while hi - lo > VISIBILITY_V_TOL {
        let mid = 0.5 * (lo + hi);
        if feasible(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(Some(hi))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_shape() {
        let grid = g_grid(3);
        assert_eq!(grid, vec![0.0, 0.5, 1.0]);
        assert_eq!(g_grid(101).len(), 101);
    }

    #[test]
    fn sweep_parallel_matches_serial_bitwise() {
        let spec = SweepSpec::new(0.0, PointerKind::Square);
        let grid = g_grid(9);
        let parallel = sweep_g(&spec, &grid).unwrap();
        let serial: Vec<SweepRow> = grid
            .iter()
            .map(|&g| evaluate_g_point(&spec, g).unwrap())
            .collect();
        assert_eq!(parallel.len(), serial.len());
        for (p, s) in parallel.iter().zip(&serial) {
            for (pp, ss) in p.pairs.iter().zip(&s.pairs) {
                assert_eq!(pp.b.to_bits(), ss.b.to_bits());
                assert_eq!(pp.z.to_bits(), ss.z.to_bits());
            }
        }
    }

    #[test]
    fn sweep_is_deterministic() {
        let spec = SweepSpec::new(0.4, PointerKind::Optimal);
        let grid = g_grid(5);
        let first = sweep_g(&spec, &grid).unwrap();
        let second = sweep_g(&spec, &grid).unwrap();
        for (a, b) in first.iter().zip(&second) {
            for (pa, pb) in a.pairs.iter().zip(&b.pairs) {
                assert_eq!(pa.b.to_bits(), pb.b.to_bits());
            }
        }
    }

    #[test]
    fn symmetric_config_mirror_pairs_agree() {
        let spec = SweepSpec::new(0.0, PointerKind::Square);
        for row in sweep_g(&spec, &g_grid(7)).unwrap() {
            let p12 = row.pair(1, 2);
            let p21 = row.pair(2, 1);
            assert!((p12.b - p21.b).abs() < 1e-10, "g={}", row.g);
            assert!((p12.z - p21.z).abs() < 1e-10);
        }
    }

    #[test]
    fn dial_monotone_in_z() {
        // violated(dial z) is monotone non-increasing in z per pair
        let spec = SweepSpec::new(0.0, PointerKind::Square);
        let g = 0.7;
        let mut last_violations = usize::MAX;
        for z in [0.0, 0.1, 0.3, 0.8] {
            let row = evaluate_g_point(&spec.clone().with_z_mode(ZMode::Dial(z)), g).unwrap();
            let count = row.pairs.iter().filter(|p| p.violated).count();
            assert!(count <= last_violations);
            last_violations = count;
        }
    }

    #[test]
    fn fully_decohering_endpoint_minimizes_the_second_pair() {
        // at G = 1 with the square pointer the second observers receive fully
        // dephased qubits, so B22 bottoms out at the endpoint
        let spec = SweepSpec::new(0.0, PointerKind::Square);
        let rows = sweep_g(&spec, &g_grid(11)).unwrap();
        let last = rows.last().unwrap().pair(2, 2).b;
        for row in &rows {
            assert!(row.pair(2, 2).b >= last - 1e-12, "g={}", row.g);
        }
    }

    #[test]
    fn dial_onset_reports_the_violation_headroom() {
        // no simultaneous violation exists, so the largest workable dial
        // value is negative: (B* - 3)/5 with B* the best min-over-pairs B
        let result = find_z_onset(
            0.0,
            PointerKind::Square,
            (SourceSpec::Singlet, SourceSpec::Singlet),
            OnsetMode::Dial,
        )
        .unwrap();
        let z = result.z_onset.unwrap();
        assert!(z < -0.45 && z > -0.5, "z = {z}");
        assert_eq!(result.g_window.len(), 1);
        assert_eq!(result.g_window[0][0], result.g_window[0][1]);
        // the degenerate window sits at the interior crossing, not an endpoint
        let g = result.g_window[0][0];
        assert!(g > 0.05 && g < 0.95, "g = {g}");
    }

    #[test]
    fn computed_onset_is_explicitly_empty_without_violation() {
        let result = find_z_onset(
            std::f64::consts::FRAC_PI_2,
            PointerKind::Optimal,
            (SourceSpec::Singlet, SourceSpec::Singlet),
            OnsetMode::Computed,
        )
        .unwrap();
        assert!(result.z_onset.is_none());
        assert!(result.g_window.is_empty());
    }

    #[test]
    fn visibility_one_reduces_to_noiseless() {
        let noiseless = SweepSpec::new(0.2, PointerKind::Square);
        let werner = noiseless
            .clone()
            .with_sources(SourceSpec::Werner { v: 1.0 }, SourceSpec::Werner { v: 1.0 });
        let g = 0.55;
        let a = evaluate_g_point(&noiseless, g).unwrap();
        let b = evaluate_g_point(&werner, g).unwrap();
        for (pa, pb) in a.pairs.iter().zip(&b.pairs) {
            assert!((pa.b - pb.b).abs() < 1e-12);
            assert!((pa.z - pb.z).abs() < 1e-12);
        }
    }
}
