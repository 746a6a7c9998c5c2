//! Integrated invariants: Chern numbers, Euler classes, monopole charges,
//! Wilson loops and their winding numbers, and mass-parameter phase sweeps.
//!
//! Three routes to the Chern number are kept side by side:
//!
//! - `CurvatureSum`: Riemann sum of Tr F_xy over the zone — the direct route;
//! - `MetricSign`: Riemann sum of sgn(Tr F)·√det G — the quantum-metric
//!   route, using only metric traces plus a pointwise sign;
//! - `PlaquetteOracle`: the gauge-invariant link-overlap (lattice field
//!   strength) method over the degenerate doublet, whose total flux is an
//!   exact integer on any grid. This is the integer oracle the other two
//!   routes are checked against.
//!
//! The Euler class offers the curvature route (Riemann sum of Eu) and the
//! metric-sign route; its integer oracle is the winding of the Wilson-loop
//! transition function.
//!
//! Grids use half-cell offsets so samples stay off high-symmetry points.
//! Grid points are processed in parallel but reduced in index order, so
//! sums are bitwise reproducible for any thread count.

use crate::error::{Error, Result};
use crate::matrix::{Matrix2, Vector4, C64};
use crate::models::{bloch_vector, ModelSpec};
use crate::qgt::{geometry_scalars, ground_frame, qgt_block_in_frame};
use crate::spectral::frame_overlap;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// How an invariant was computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InvariantMethod {
    CurvatureSum,
    MetricSign,
    PlaquetteOracle,
    Dynamic,
}

/// An integrated invariant together with the grid and method that made it.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct InvariantResult {
    pub value: f64,
    pub grid: (usize, usize),
    pub method: InvariantMethod,
    pub rounded: i64,
}

impl InvariantResult {
    fn new(value: f64, grid: (usize, usize), method: InvariantMethod) -> Self {
        InvariantResult {
            value,
            grid,
            method,
            rounded: value.round() as i64,
        }
    }
}

/// Wilson-loop eigenphases along k_x and their winding.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WilsonResult {
    pub kx_samples: Vec<f64>,
    /// Branch-matched eigenphase pairs in (−π, π], continuous in the sample
    /// index up to 2π wraps.
    pub eigenphases: Vec<[f64; 2]>,
    pub winding: i64,
}

/// Half-cell-offset samples of (−π, π].
pub fn bz_samples(n: usize) -> Vec<f64> {
    let step = 2.0 * std::f64::consts::PI / n as f64;
    (0..n)
        .map(|i| -std::f64::consts::PI + (i as f64 + 0.5) * step)
        .collect()
}

/// Half-cell-offset θ samples of (0, π) (poles excluded).
pub fn sphere_thetas(n: usize) -> Vec<f64> {
    let step = std::f64::consts::PI / n as f64;
    (0..n).map(|i| (i as f64 + 0.5) * step).collect()
}

/// Half-cell-offset φ samples of (0, 2π).
pub fn sphere_phis(n: usize) -> Vec<f64> {
    let step = 2.0 * std::f64::consts::PI / n as f64;
    (0..n).map(|i| (i as f64 + 0.5) * step).collect()
}

/// Pointwise sign with a dead zone: curvature zeros must not inject noise
/// into the metric-sign route.
fn sign_cut(x: f64) -> f64 {
    if x.abs() < 1e-12 {
        0.0
    } else {
        x.signum()
    }
}

fn require_lattice(spec: &ModelSpec, what: &str) -> Result<()> {
    if !spec.family.is_lattice() {
        return Err(Error::Validation(format!(
            "{what} is defined for lattice families, got {:?}",
            spec.family
        )));
    }
    Ok(())
}

/// Minimum gap 2|D| over a k_z slice; `GapClosed` below the 1e-3 floor.
fn slice_gap_check(spec: &ModelSpec, kz: f64, ks: &[f64]) -> Result<f64> {
    let min_gap = ks
        .par_iter()
        .map(|&kx| {
            ks.iter()
                .map(|&ky| 2.0 * bloch_vector(spec, &[kx, ky, kz]).norm())
                .fold(f64::INFINITY, f64::min)
        })
        .reduce(|| f64::INFINITY, f64::min);
    if min_gap <= 1e-3 {
        return Err(Error::GapClosed { min_gap });
    }
    Ok(min_gap)
}

/// First Chern number of the k_z slice on an n×n grid.
pub fn chern_number(
    spec: &ModelSpec,
    kz: f64,
    n_grid: usize,
    method: InvariantMethod,
) -> Result<InvariantResult> {
    require_lattice(spec, "chern_number")?;
    let ks = bz_samples(n_grid);
    slice_gap_check(spec, kz, &ks)?;
    let cell = (2.0 * std::f64::consts::PI / n_grid as f64).powi(2);
    let value = match method {
        InvariantMethod::CurvatureSum | InvariantMethod::MetricSign => {
            let rows: Vec<f64> = ks
                .par_iter()
                .map(|&kx| {
                    let mut acc = 0.0;
                    for &ky in &ks {
                        let s = geometry_scalars(spec, &[kx, ky, kz], 0, 1)
                            .expect("gapped slice");
                        acc += match method {
                            InvariantMethod::CurvatureSum => s.tr_f,
                            _ => sign_cut(s.tr_f) * s.det_g_mat.max(0.0).sqrt(),
                        };
                    }
                    acc
                })
                .collect();
            rows.iter().sum::<f64>() * cell / (2.0 * std::f64::consts::PI)
        }
        InvariantMethod::PlaquetteOracle => plaquette_flux(spec, kz, &ks)?,
        InvariantMethod::Dynamic => {
            return Err(Error::Validation(
                "dynamic Chern numbers come from dynamics::dynamic_invariant".into(),
            ))
        }
    };
    Ok(InvariantResult::new(value, (n_grid, n_grid), method))
}

/// Total plaquette flux / 2π of the doublet over the slice grid.
fn plaquette_flux(spec: &ModelSpec, kz: f64, ks: &[f64]) -> Result<f64> {
    let n = ks.len();
    let frames: Vec<Vec<[Vector4; 2]>> = ks
        .par_iter()
        .map(|&kx| {
            ks.iter()
                .map(|&ky| ground_frame(spec, &[kx, ky, kz]).expect("gapped slice").ground)
                .collect()
        })
        .collect();
    let link = |a: &[Vector4; 2], b: &[Vector4; 2]| frame_overlap(a, b).det();
    let total: f64 = (0..n)
        .into_par_iter()
        .map(|i| {
            let ip = (i + 1) % n;
            let mut acc = 0.0;
            for j in 0..n {
                let jp = (j + 1) % n;
                let ux0 = link(&frames[i][j], &frames[ip][j]);
                let uy1 = link(&frames[ip][j], &frames[ip][jp]);
                let ux1 = link(&frames[i][jp], &frames[ip][jp]);
                let uy0 = link(&frames[i][j], &frames[i][jp]);
                acc += (ux0 * uy1 * (ux1 * uy0).conj()).arg();
            }
            acc
        })
        .collect::<Vec<f64>>()
        .iter()
        .sum();
    Ok(total / (2.0 * std::f64::consts::PI))
}

/// Euler class of a C₂T slice: Riemann sum of the Euler curvature
/// (`CurvatureSum`) or the metric-sign form (`MetricSign`).
pub fn euler_class(
    spec: &ModelSpec,
    kz: f64,
    n_grid: usize,
    method: InvariantMethod,
) -> Result<InvariantResult> {
    require_lattice(spec, "euler_class")?;
    if !spec.family.is_c2t() {
        return Err(Error::Gauge("Euler class requires a C2T family".into()));
    }
    let ks = bz_samples(n_grid);
    slice_gap_check(spec, kz, &ks)?;
    let cell = (2.0 * std::f64::consts::PI / n_grid as f64).powi(2);
    let rows: Vec<f64> = ks
        .par_iter()
        .map(|&kx| {
            let mut acc = 0.0;
            for &ky in &ks {
                let s = geometry_scalars(spec, &[kx, ky, kz], 0, 1).expect("gapped slice");
                let eu = s.eu.expect("C2T family");
                acc += match method {
                    InvariantMethod::CurvatureSum => eu,
                    InvariantMethod::MetricSign => {
                        0.5 * sign_cut(eu) * s.det_g_mat.max(0.0).sqrt()
                    }
                    _ => f64::NAN,
                };
            }
            acc
        })
        .collect();
    if rows.iter().any(|r| r.is_nan()) {
        return Err(Error::Validation(
            "euler_class supports curvature_sum and metric_sign".into(),
        ));
    }
    let value = rows.iter().sum::<f64>() * cell / (2.0 * std::f64::consts::PI);
    Ok(InvariantResult::new(value, (n_grid, n_grid), method))
}

/// Monopole charge of a sphere family on an N_θ×N_φ chart grid: the Chern
/// number of the enclosing sphere for CP members, the Euler class for C₂T
/// members. The poles are excluded by the half-cell offset.
pub fn monopole_charge(
    spec: &ModelSpec,
    n_theta: usize,
    n_phi: usize,
    method: InvariantMethod,
) -> Result<InvariantResult> {
    if !spec.family.is_sphere() {
        return Err(Error::Validation(format!(
            "monopole_charge needs a sphere family, got {:?}",
            spec.family
        )));
    }
    let thetas = sphere_thetas(n_theta);
    let phis = sphere_phis(n_phi);
    let cell = (std::f64::consts::PI / n_theta as f64)
        * (2.0 * std::f64::consts::PI / n_phi as f64);
    let c2t = spec.family.is_c2t();
    let rows: Vec<f64> = thetas
        .par_iter()
        .map(|&th| {
            let mut acc = 0.0;
            for &ph in &phis {
                let s = geometry_scalars(spec, &[th, ph], 0, 1).expect("sphere is gapped");
                acc += match (method, c2t) {
                    (InvariantMethod::CurvatureSum, false) => s.tr_f,
                    (InvariantMethod::CurvatureSum, true) => s.eu.unwrap(),
                    (InvariantMethod::MetricSign, false) => {
                        sign_cut(s.tr_f) * s.det_g_mat.max(0.0).sqrt()
                    }
                    (InvariantMethod::MetricSign, true) => {
                        0.5 * sign_cut(s.eu.unwrap()) * s.det_g_mat.max(0.0).sqrt()
                    }
                    _ => f64::NAN,
                };
            }
            acc
        })
        .collect();
    if rows.iter().any(|r| r.is_nan()) {
        return Err(Error::Validation(
            "monopole_charge supports curvature_sum and metric_sign".into(),
        ));
    }
    let value = rows.iter().sum::<f64>() * cell / (2.0 * std::f64::consts::PI);
    Ok(InvariantResult::new(value, (n_theta, n_phi), method))
}

/// Discretized Wilson loop over the k_y cycle at fixed (k_x, k_z):
/// path-ordered product of polar-unitarized link overlaps of the ground
/// doublet. Real-orthogonal (SO(2)) in the real gauge of a C₂T family.
pub fn wilson_loop(
    spec: &ModelSpec,
    kz: f64,
    kx: f64,
    n_ky: usize,
    real_gauge: bool,
) -> Result<Matrix2> {
    require_lattice(spec, "wilson_loop")?;
    if real_gauge && !spec.family.is_c2t() {
        return Err(Error::Gauge(
            "real-gauge Wilson loop requires a C2T family".into(),
        ));
    }
    let kys = bz_samples(n_ky);
    let frames: Vec<[Vector4; 2]> = kys
        .iter()
        .map(|&ky| {
            ground_frame(spec, &[kx, ky, kz]).map(|s| s.ground).map_err(|e| match e {
                Error::MonopoleProximity { gap, .. } => Error::GapClosed { min_gap: gap },
                other => other,
            })
        })
        .collect::<Result<_>>()?;
    let mut w = Matrix2::identity();
    for l in 0..n_ky {
        let link = frame_overlap(&frames[l], &frames[(l + 1) % n_ky]).polar_unitary();
        w = w * link;
    }
    Ok(w)
}

/// Wilson eigenphases θ(k_x) on `n_kx` samples spanning (−π, π], with the
/// branches matched continuously across samples.
pub fn wilson_spectrum(
    spec: &ModelSpec,
    kz: f64,
    n_kx: usize,
    n_ky: usize,
    real_gauge: bool,
) -> Result<WilsonResult> {
    let kx_samples = bz_samples(n_kx);
    let loops: Vec<Matrix2> = kx_samples
        .par_iter()
        .map(|&kx| wilson_loop(spec, kz, kx, n_ky, real_gauge))
        .collect::<Result<_>>()?;
    let mut eigenphases: Vec<[f64; 2]> = Vec::with_capacity(n_kx);
    for w in &loops {
        let pair = if real_gauge {
            // SO(2): W = e^{−iσ₂θ}, read θ from the rotation block.
            let imag = w.0.iter().flatten().map(|c| c.im.abs()).fold(0.0, f64::max);
            if imag > 1e-9 {
                return Err(Error::Gauge(format!(
                    "real-gauge Wilson loop has imaginary part {imag:.3e}"
                )));
            }
            let th = w.0[1][0].re.atan2(w.0[0][0].re);
            [th, -th]
        } else {
            let ev = w.eigenvalues();
            [ev[0].arg(), ev[1].arg()]
        };
        // The SO(2) angle is already a continuous branch; only generic
        // eigenphase pairs need continuity matching.
        match (real_gauge, eigenphases.last()) {
            (true, _) | (false, None) => eigenphases.push(pair),
            (false, Some(prev)) => {
                let keep = circ_dist(pair[0], prev[0]) + circ_dist(pair[1], prev[1]);
                let swap = circ_dist(pair[1], prev[0]) + circ_dist(pair[0], prev[1]);
                if swap < keep {
                    eigenphases.push([pair[1], pair[0]]);
                } else {
                    eigenphases.push(pair);
                }
            }
        }
    }
    let mut out = WilsonResult {
        kx_samples,
        eigenphases,
        winding: 0,
    };
    out.winding = winding_number(&out)?;
    Ok(out)
}

fn circ_dist(a: f64, b: f64) -> f64 {
    let two_pi = 2.0 * std::f64::consts::PI;
    let d = (a - b).rem_euclid(two_pi);
    d.min(two_pi - d)
}

/// Net winding of the first eigenphase branch around the k_x cycle,
/// including the wrap-around link. The total must sit within 0.1 of an
/// integer multiple of 2π; larger residuals (or near-π jumps) mean the
/// sampling cannot resolve the branch and are reported as resolution
/// errors.
pub fn winding_number(w: &WilsonResult) -> Result<i64> {
    let n = w.eigenphases.len();
    if n < 100 {
        return Err(Error::Validation(format!(
            "winding_number needs at least 100 k_x samples, got {n}"
        )));
    }
    let pi = std::f64::consts::PI;
    let mut total = 0.0;
    for i in 0..n {
        let a = w.eigenphases[i][0];
        let b = w.eigenphases[(i + 1) % n][0];
        let mut d = b - a;
        while d > pi {
            d -= 2.0 * pi;
        }
        while d <= -pi {
            d += 2.0 * pi;
        }
        if d.abs() >= 0.9 * pi {
            return Err(Error::Resolution(format!(
                "eigenphase jump {d:.3} at sample {i}; increase k_x sampling"
            )));
        }
        total += d;
    }
    let turns = total / (2.0 * pi);
    let rounded = turns.round();
    if (turns - rounded).abs() > 0.1 {
        return Err(Error::Resolution(format!(
            "winding {turns:.4} is not within 0.1 of an integer"
        )));
    }
    Ok(rounded as i64)
}

/// Invariant as a function of the mass parameter: Chern number (plaquette
/// oracle) for CP, Euler class (curvature sum) for C₂T.
pub fn phase_sweep(
    spec: &ModelSpec,
    masses: &[f64],
    kz: f64,
    n_grid: usize,
) -> Result<Vec<(f64, InvariantResult)>> {
    require_lattice(spec, "phase_sweep")?;
    masses
        .iter()
        .map(|&m| {
            let mut s = *spec;
            s.mass = m;
            let inv = if s.family.is_cp() {
                chern_number(&s, kz, n_grid, InvariantMethod::PlaquetteOracle)?
            } else {
                euler_class(&s, kz, n_grid, InvariantMethod::CurvatureSum)?
            };
            Ok((m, inv))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::Family;

    #[test]
    fn chern_integer_pinned_by_plaquette() {
        let spec = ModelSpec::cp_lattice(1, 2.0);
        let p = chern_number(&spec, 0.0, 61, InvariantMethod::PlaquetteOracle).unwrap();
        assert_eq!(p.rounded, 2);
        assert!((p.value - 2.0).abs() < 1e-10, "plaquette flux {}", p.value);
        let c = chern_number(&spec, 0.0, 61, InvariantMethod::CurvatureSum).unwrap();
        assert!((c.value - p.value).abs() < 0.02);
        let m = chern_number(&spec, 0.0, 61, InvariantMethod::MetricSign).unwrap();
        assert!((m.value - p.value).abs() < 0.02);
    }

    #[test]
    fn chern_doubles_with_winding_order() {
        let c1 = chern_number(&ModelSpec::cp_lattice(1, 2.0), 0.0, 61, InvariantMethod::PlaquetteOracle)
            .unwrap();
        let c2 = chern_number(&ModelSpec::cp_lattice(2, 2.0), 0.0, 61, InvariantMethod::PlaquetteOracle)
            .unwrap();
        assert_eq!(c2.rounded, 2 * c1.rounded);
    }

    #[test]
    fn trivial_phase_is_chern_zero() {
        let spec = ModelSpec::cp_lattice(1, 4.0);
        let p = chern_number(&spec, 0.0, 61, InvariantMethod::PlaquetteOracle).unwrap();
        assert_eq!(p.rounded, 0);
        assert!(p.value.abs() < 1e-10);
    }

    #[test]
    fn gap_closed_slice_rejected() {
        // M_z = 3 closes the k_z = 0 slice at k = 0.
        let spec = ModelSpec::cp_lattice(1, 3.0);
        assert!(matches!(
            chern_number(&spec, 0.0, 44, InvariantMethod::PlaquetteOracle),
            Err(Error::GapClosed { .. })
        ));
    }

    #[test]
    fn euler_class_routes_agree() {
        let spec = ModelSpec::c2t_lattice(1, 2.0);
        let cu = euler_class(&spec, 0.0, 61, InvariantMethod::CurvatureSum).unwrap();
        let ms = euler_class(&spec, 0.0, 61, InvariantMethod::MetricSign).unwrap();
        assert_eq!(cu.rounded, 1);
        assert!((cu.value - 1.0).abs() < 5e-3, "Euler sum {}", cu.value);
        assert!((cu.value - ms.value).abs() < 0.02);
    }

    #[test]
    fn euler_rejects_cp_family() {
        let spec = ModelSpec::cp_lattice(1, 2.0);
        assert!(euler_class(&spec, 0.0, 31, InvariantMethod::CurvatureSum).is_err());
    }

    #[test]
    fn monopole_charges_match_winding_order() {
        // Q_± = ∓2n (CP), q_± = ±n (C2T); α-sign flip negates the charge.
        for (fam, n, want) in [
            (Family::CpSpherePlus, 1, -2.0),
            (Family::CpSphereMinus, 1, 2.0),
            (Family::CpSpherePlus, 2, -4.0),
            (Family::C2tSpherePlus, 1, 1.0),
            (Family::C2tSphereMinus, 1, -1.0),
            (Family::C2tSpherePlus, 2, 2.0),
        ] {
            let spec = ModelSpec::sphere(fam, n, 0.5);
            let q = monopole_charge(&spec, 80, 160, InvariantMethod::CurvatureSum).unwrap();
            assert!(
                (q.value - want).abs() < 0.02,
                "{fam:?} n={n}: {} vs {want}",
                q.value
            );
            let qm = monopole_charge(&spec, 80, 160, InvariantMethod::MetricSign).unwrap();
            assert!((qm.value - want).abs() < 0.02);
            let flipped = ModelSpec::sphere(fam, n, 0.5).with_alpha([-1, 1, 1]);
            let qf = monopole_charge(&flipped, 80, 160, InvariantMethod::CurvatureSum).unwrap();
            assert!((qf.value + want).abs() < 0.02);
        }
    }

    #[test]
    fn charge_additivity_across_branches() {
        for (plus, minus) in [
            (Family::CpSpherePlus, Family::CpSphereMinus),
            (Family::C2tSpherePlus, Family::C2tSphereMinus),
        ] {
            for n in [1, 2] {
                let qp = monopole_charge(&ModelSpec::sphere(plus, n, 0.5), 60, 120, InvariantMethod::CurvatureSum)
                    .unwrap();
                let qm = monopole_charge(&ModelSpec::sphere(minus, n, 0.5), 60, 120, InvariantMethod::CurvatureSum)
                    .unwrap();
                assert!((qp.value + qm.value).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn wilson_loop_unitarity_and_convergence() {
        let spec = ModelSpec::cp_lattice(1, 2.0);
        let w = wilson_loop(&spec, 0.0, 0.7, 400, false).unwrap();
        assert!((w.det().norm() - 1.0).abs() < 1e-10);
        let unit_res = (w.adjoint() * w - Matrix2::identity()).inf_norm();
        assert!(unit_res < 1e-10);
        // doubling n_ky moves the eigenphases by < 1e-4
        let w2 = wilson_loop(&spec, 0.0, 0.7, 800, false).unwrap();
        let mut p1: Vec<f64> = w.eigenvalues().iter().map(|e| e.arg()).collect();
        let mut p2: Vec<f64> = w2.eigenvalues().iter().map(|e| e.arg()).collect();
        p1.sort_by(f64::total_cmp);
        p2.sort_by(f64::total_cmp);
        assert!((p1[0] - p2[0]).abs() < 1e-4 && (p1[1] - p2[1]).abs() < 1e-4);
    }

    #[test]
    fn real_gauge_wilson_is_so2() {
        let spec = ModelSpec::c2t_lattice(1, 2.0);
        let w = wilson_loop(&spec, 0.0, -1.1, 300, true).unwrap();
        assert!(w.0.iter().flatten().map(|c| c.im.abs()).fold(0.0, f64::max) < 1e-10);
        assert!((w.0[0][0].re - w.0[1][1].re).abs() < 1e-10);
        assert!((w.0[0][1].re + w.0[1][0].re).abs() < 1e-10);
        assert!((w.det().re - 1.0).abs() < 1e-10);
    }

    #[test]
    fn windings_match_invariants() {
        // CP winding = C/2, C2T winding = χ, trivial phases wind zero.
        let cp = wilson_spectrum(&ModelSpec::cp_lattice(1, 2.0), 0.0, 120, 160, false).unwrap();
        assert_eq!(cp.winding, 1);
        let cp_trivial =
            wilson_spectrum(&ModelSpec::cp_lattice(1, 4.0), 0.0, 120, 160, false).unwrap();
        assert_eq!(cp_trivial.winding, 0);
        let c2t = wilson_spectrum(&ModelSpec::c2t_lattice(1, 2.0), 0.0, 120, 160, true).unwrap();
        assert_eq!(c2t.winding, 1);
        let c2t_trivial =
            wilson_spectrum(&ModelSpec::c2t_lattice(1, 4.0), 0.0, 120, 160, true).unwrap();
        assert_eq!(c2t_trivial.winding, 0);
    }

    #[test]
    fn grid_convergence_is_second_order_or_better() {
        let spec = ModelSpec::cp_lattice(1, 2.0);
        let v = |n| {
            chern_number(&spec, 0.0, n, InvariantMethod::CurvatureSum)
                .unwrap()
                .value
        };
        let (a, b, c) = (v(30), v(60), v(120));
        assert!((b - a).abs() <= 4.0 * (c - b).abs() + 1e-3);
    }

    #[test]
    fn sweep_locates_transitions() {
        let spec = ModelSpec::cp_lattice(1, 0.0);
        let masses = [-1.25, -0.75, 0.75, 1.25, 2.75, 3.25, 3.75];
        let table = phase_sweep(&spec, &masses, 0.0, 41).unwrap();
        let values: Vec<i64> = table.iter().map(|(_, inv)| inv.rounded).collect();
        // jumps at ±1 and 3, plateaus inside, zero outside
        assert_ne!(values[0], values[1]);
        assert_eq!(values[1], values[2]);
        assert_ne!(values[2], values[3]);
        assert_eq!(values[3], values[4]);
        assert_ne!(values[4], values[5]);
        assert_eq!(values[5], 0);
        assert_eq!(values[6], 0);
    }
}
