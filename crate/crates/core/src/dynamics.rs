//! Non-adiabatic protocol: time-dependent Schrödinger evolution under
//! quadratic parameter ramps, generalized-force and energy-fluctuation
//! responses, reconstruction of all g/F components, and dynamically
//! extracted invariants.
//!
//! Ramps follow λ_μ(t) = λ_μ(0) + v²t²/2π per ramped direction, so the
//! initial velocity vanishes (no initial-state oscillations) and the final
//! velocity at t_f = π/v is exactly v. The total ramp distance is
//! v²t_f²/2π = π/2, so a trajectory landing at a target starts π/2 behind
//! it along every ramped direction. Measured at t_f, with |ψ_s⟩ the
//! gauge-fixed state of the same label at the target,
//!
//!   F_μν^{ss} = (⟨∂_νH⟩ − ⟨∂_νH⟩₀) / v,
//!   g_μμ^{ss} = ΔE²/v²,   g_μν^{ss} = (ΔE²_{μν} − ΔE²_μ − ΔE²_ν)/(2v²),
//!
//! and the off-diagonal components follow from the four initial states
//! {ψ₁, ψ₂, (ψ₁+ψ₂)/√2, (ψ₁+iψ₂)/√2} through
//! X^{12} = (2i·X^{mm} + 2·X^{nn} − (1+i)(X^{11}+X^{22})) / 2i.
//!
//! The integrator is a fixed-step classical Runge–Kutta scheme on
//! i∂_t|ψ⟩ = H(λ(t))|ψ⟩; the Hamiltonian applications use the one-entry-
//! per-row sparsity of the Clifford triples, so a step costs a handful of
//! trig calls and ~50 complex multiplies.

use crate::error::{Error, Result};
use crate::matrix::{Matrix4, Vector4, C64};
use crate::models::{bloch_vector, d_hamiltonian, hamiltonian, ModelSpec};
use crate::qgt::{geometry_scalars, ground_frame, qgt_block};
use crate::topology::{sphere_phis, sphere_thetas, InvariantMethod, InvariantResult};
use rayon::prelude::*;

/// Default integrator step (time in units of 2π/Ω₀).
pub const DEFAULT_DT: f64 = 1e-3;

/// Largest step the evolve contract accepts.
pub const MAX_DT: f64 = 2.0 * std::f64::consts::PI * 1e-3;

/// Norm-drift budget for every reported trajectory.
pub const NORM_BUDGET: f64 = 1e-8;

/// Quadratic ramp landing at a target point with final velocity v.
#[derive(Debug, Clone)]
pub struct RampSchedule {
    pub start: [f64; 3],
    pub ramped: [bool; 3],
    pub n_params: usize,
    /// Final velocity (parameter units per time unit).
    pub v: f64,
    /// t_f = π/v.
    pub t_final: f64,
}

impl RampSchedule {
    /// Ramp that reaches `target` at t_f with velocity v along each of
    /// `directions`; the start point sits π/2 behind along each of them.
    pub fn landing_at(target: &[f64], directions: &[usize], v: f64) -> Result<Self> {
        if v <= 0.0 {
            return Err(Error::Validation("ramp velocity must be positive".into()));
        }
        if target.len() > 3 {
            return Err(Error::Validation("at most 3 parameters".into()));
        }
        let mut start = [0.0; 3];
        start[..target.len()].copy_from_slice(target);
        let mut ramped = [false; 3];
        for &d in directions {
            if d >= target.len() {
                return Err(Error::Validation(format!(
                    "ramp direction {d} out of range"
                )));
            }
            if ramped[d] {
                return Err(Error::Validation(format!("duplicate ramp direction {d}")));
            }
            ramped[d] = true;
            start[d] -= std::f64::consts::FRAC_PI_2;
        }
        Ok(RampSchedule {
            start,
            ramped,
            n_params: target.len(),
            v,
            t_final: std::f64::consts::PI / v,
        })
    }

    /// λ(t); the quadratic drift v²t²/2π applies to every ramped direction.
    pub fn point_at(&self, t: f64) -> [f64; 3] {
        let drift = self.v * self.v * t * t / (2.0 * std::f64::consts::PI);
        let mut p = self.start;
        for (x, &r) in p.iter_mut().zip(&self.ramped) {
            if r {
                *x += drift;
            }
        }
        p
    }

    /// λ̇(t) = v²t/π along each ramped direction.
    pub fn velocity_at(&self, t: f64) -> f64 {
        self.v * self.v * t / std::f64::consts::PI
    }
}

/// Final state of one ramp trajectory.
#[derive(Debug, Clone)]
pub struct EvolvedState {
    pub psi: Vector4,
    pub t: f64,
    pub norm_drift: f64,
}

/// The four initial-state choices of the reconstruction protocol.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InitialState {
    Ground1,
    Ground2,
    /// (|ψ₁⟩ + |ψ₂⟩)/√2.
    PlusSuperposition,
    /// (|ψ₁⟩ + i|ψ₂⟩)/√2.
    ISuperposition,
}

/// Gauge-fixed ground state or superposition at a gapped point.
pub fn prepare_initial(spec: &ModelSpec, point: &[f64], which: InitialState) -> Result<Vector4> {
    let sub = ground_frame(spec, point)?;
    let isq = 1.0 / 2.0_f64.sqrt();
    let psi = match which {
        InitialState::Ground1 => sub.ground[0],
        InitialState::Ground2 => sub.ground[1],
        InitialState::PlusSuperposition => {
            let mut s = sub.ground[0].scale(C64::new(isq, 0.0));
            s.axpy(C64::new(isq, 0.0), &sub.ground[1]);
            s
        }
        InitialState::ISuperposition => {
            let mut s = sub.ground[0].scale(C64::new(isq, 0.0));
            s.axpy(C64::new(0.0, isq), &sub.ground[1]);
            s
        }
    };
    Ok(psi)
}

/// One-nonzero-per-row application table for H = Σ_r d_r Γ_r′.
struct TripleApplier {
    /// entries[r][row] = (column, coefficient).
    entries: [[(usize, C64); 4]; 3],
}

impl TripleApplier {
    fn new(spec: &ModelSpec) -> Self {
        let triple = spec.gamma_triple();
        let mut entries = [[(0usize, C64::new(0.0, 0.0)); 4]; 3];
        for (r, gamma) in triple.iter().enumerate() {
            for row in 0..4 {
                let mut found = None;
                for col in 0..4 {
                    if gamma.0[row][col].norm_sqr() > 0.0 {
                        assert!(found.is_none(), "Clifford triple row not 1-sparse");
                        found = Some((col, gamma.0[row][col]));
                    }
                }
                entries[r][row] = found.expect("Clifford triple row empty");
            }
        }
        TripleApplier { entries }
    }

    /// out = −i·(Σ_r d_r Γ_r′)·ψ.
    #[inline]
    fn apply_minus_i_h(&self, d: &[f64; 3], psi: &Vector4) -> Vector4 {
        let mut acc = [C64::new(0.0, 0.0); 4];
        for r in 0..3 {
            let dr = d[r];
            for (row, slot) in acc.iter_mut().enumerate() {
                let (col, c) = self.entries[r][row];
                *slot += c * (psi.0[col] * dr);
            }
        }
        Vector4([
            C64::new(acc[0].im, -acc[0].re),
            C64::new(acc[1].im, -acc[1].re),
            C64::new(acc[2].im, -acc[2].re),
            C64::new(acc[3].im, -acc[3].re),
        ])
    }
}

#[inline]
fn add_scaled(a: &Vector4, s: f64, b: &Vector4) -> Vector4 {
    let mut out = *a;
    for i in 0..4 {
        out.0[i] += b.0[i] * s;
    }
    out
}

/// Integrate i∂_t|ψ⟩ = H(λ(t))|ψ⟩ from t = 0 to the schedule's final time
/// with a fixed-step 4th-order Runge–Kutta scheme. The requested `dt` is
/// shrunk to divide t_f exactly. Norm drift beyond [`NORM_BUDGET`] is an
/// error.
pub fn evolve(
    spec: &ModelSpec,
    schedule: &RampSchedule,
    psi0: &Vector4,
    dt: f64,
) -> Result<EvolvedState> {
    if !(dt > 0.0 && dt <= MAX_DT * (1.0 + 1e-12)) {
        return Err(Error::Validation(format!(
            "dt must lie in (0, {MAX_DT:.3e}], got {dt:.3e}"
        )));
    }
    if (psi0.norm() - 1.0).abs() > 1e-10 {
        return Err(Error::Validation("initial state must be normalized".into()));
    }
    let applier = TripleApplier::new(spec);
    let n_steps = (schedule.t_final / dt).ceil().max(1.0) as usize;
    let h = schedule.t_final / n_steps as f64;
    let d_at = |t: f64| bloch_vector(spec, &schedule.point_at(t)).d;

    let mut psi = *psi0;
    let mut d_lo = d_at(0.0);
    for step in 0..n_steps {
        let t = step as f64 * h;
        let d_mid = d_at(t + 0.5 * h);
        let d_hi = d_at(t + h);
        let k1 = applier.apply_minus_i_h(&d_lo, &psi);
        let k2 = applier.apply_minus_i_h(&d_mid, &add_scaled(&psi, 0.5 * h, &k1));
        let k3 = applier.apply_minus_i_h(&d_mid, &add_scaled(&psi, 0.5 * h, &k2));
        let k4 = applier.apply_minus_i_h(&d_hi, &add_scaled(&psi, h, &k3));
        for i in 0..4 {
            psi.0[i] += (k1.0[i] + (k2.0[i] + k3.0[i]) * 2.0 + k4.0[i]) * (h / 6.0);
        }
        d_lo = d_hi;
    }
    let norm_drift = (psi.norm() - 1.0).abs();
    if norm_drift > NORM_BUDGET {
        return Err(Error::NormDrift {
            drift: norm_drift,
            budget: NORM_BUDGET,
        });
    }
    Ok(EvolvedState {
        psi,
        t: schedule.t_final,
        norm_drift,
    })
}

/// Generalized-force response (⟨∂_νH⟩ − ⟨∂_νH⟩₀)/v after a ramp along μ
/// that lands at `target`: the leading term is F_μν^{ss} for the chosen
/// initial state.
pub fn force_response(
    spec: &ModelSpec,
    target: &[f64],
    ramp_mu: usize,
    measure_nu: usize,
    which: InitialState,
    v: f64,
    dt: f64,
) -> Result<f64> {
    let schedule = RampSchedule::landing_at(target, &[ramp_mu], v)?;
    let psi0 = prepare_initial(spec, &schedule.start[..target.len()], which)?;
    let ev = evolve(spec, &schedule, &psi0, dt)?;
    let dh = d_hamiltonian(spec, target, measure_nu)?;
    let m = dh.expectation(&ev.psi);
    let reference = prepare_initial(spec, target, which)?;
    let m0 = dh.expectation(&reference);
    Ok((m - m0) / v)
}

/// Energy fluctuation ΔE² = ⟨H²⟩ − ⟨H⟩² at t_f after ramping every
/// direction in `ramp_dirs` simultaneously (same quadratic profile).
pub fn fluctuation_response(
    spec: &ModelSpec,
    target: &[f64],
    ramp_dirs: &[usize],
    which: InitialState,
    v: f64,
    dt: f64,
) -> Result<f64> {
    let schedule = RampSchedule::landing_at(target, ramp_dirs, v)?;
    let psi0 = prepare_initial(spec, &schedule.start[..target.len()], which)?;
    let ev = evolve(spec, &schedule, &psi0, dt)?;
    let h = hamiltonian(spec, target);
    let h2 = h * h;
    let e1 = h.expectation(&ev.psi);
    let e2 = h2.expectation(&ev.psi);
    Ok(e2 - e1 * e1)
}

const FOUR_STATES: [InitialState; 4] = [
    InitialState::Ground1,
    InitialState::Ground2,
    InitialState::PlusSuperposition,
    InitialState::ISuperposition,
];

/// F_μν^{12} from the four diagonal responses:
/// (2i·F^{mm} + 2·F^{nn} − (1+i)(F^{11}+F^{22}))/2i.
pub fn berry_offdiagonal(
    spec: &ModelSpec,
    target: &[f64],
    ramp_mu: usize,
    measure_nu: usize,
    v: f64,
    dt: f64,
) -> Result<C64> {
    let mut r = [0.0; 4];
    for (slot, which) in r.iter_mut().zip(FOUR_STATES) {
        *slot = force_response(spec, target, ramp_mu, measure_nu, which, v, dt)?;
    }
    Ok(offdiagonal_from_runs(r))
}

/// X^{12} from the four "diagonal" values X^{11}, X^{22}, X^{mm}, X^{nn}.
pub fn offdiagonal_from_runs(x: [f64; 4]) -> C64 {
    let avg = 0.5 * (x[0] + x[1]);
    C64::new(x[2] - avg, avg - x[3])
}

/// g_μν^{ss} for one initial state: single- and double-direction
/// fluctuation runs combined as (ΔE²_{μν} − ΔE²_μ − ΔE²_ν)/(2v²).
pub fn metric_component(
    spec: &ModelSpec,
    target: &[f64],
    mu: usize,
    nu: usize,
    which: InitialState,
    v: f64,
    dt: f64,
) -> Result<f64> {
    if mu == nu {
        return Ok(fluctuation_response(spec, target, &[mu], which, v, dt)? / (v * v));
    }
    let both = fluctuation_response(spec, target, &[mu, nu], which, v, dt)?;
    let m_only = fluctuation_response(spec, target, &[mu], which, v, dt)?;
    let n_only = fluctuation_response(spec, target, &[nu], which, v, dt)?;
    Ok((both - m_only - n_only) / (2.0 * v * v))
}

/// Which dynamic map to produce over a k_z slice.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MapComponent {
    /// F_xy^{11} (one run per point).
    F11,
    /// Im F_xy^{12} (four runs per point).
    ImF12,
    /// g_xy^{11} (three runs per point).
    G11,
    /// Re and Im of g_xy^{12} (twelve runs per point).
    G12,
}

impl MapComponent {
    pub fn labels(self) -> &'static [&'static str] {
        match self {
            MapComponent::F11 => &["f11"],
            MapComponent::ImF12 => &["f12_im"],
            MapComponent::G11 => &["g11"],
            MapComponent::G12 => &["g12_re", "g12_im"],
        }
    }
}

/// One row of a dynamic-vs-analytic map.
#[derive(Debug, Clone)]
pub struct MapPoint {
    pub kx: f64,
    pub ky: f64,
    pub component: &'static str,
    pub analytic: f64,
    pub dynamic: f64,
    pub gap: f64,
}

/// Dynamic map of one QGT component over an n×n slice grid at fixed k_z,
/// ramping k_x (and k_y for the metric's cross terms). Each grid point is
/// an independent set of trajectories; rows come out in grid order with
/// one row per component label.
pub fn dynamic_map(
    spec: &ModelSpec,
    kz: f64,
    n_grid: usize,
    v: f64,
    dt: f64,
    component: MapComponent,
) -> Result<Vec<MapPoint>> {
    if !spec.family.is_lattice() {
        return Err(Error::Validation(
            "dynamic maps run on lattice families; use dynamic_invariant for spheres".into(),
        ));
    }
    let ks = crate::topology::bz_samples(n_grid);
    let points: Vec<(f64, f64)> = ks
        .iter()
        .flat_map(|&kx| ks.iter().map(move |&ky| (kx, ky)))
        .collect();
    let rows: Vec<Result<Vec<MapPoint>>> = points
        .par_iter()
        .map(|&(kx, ky)| {
            let target = [kx, ky, kz];
            let gap = 2.0 * bloch_vector(spec, &target).norm();
            let block = qgt_block(spec, &target, 0, 1)?;
            let mut out = Vec::with_capacity(2);
            match component {
                MapComponent::F11 => {
                    let dynamic =
                        force_response(spec, &target, 0, 1, InitialState::Ground1, v, dt)?;
                    out.push(MapPoint {
                        kx,
                        ky,
                        component: "f11",
                        analytic: block.f.0[0][0].re,
                        dynamic,
                        gap,
                    });
                }
                MapComponent::ImF12 => {
                    let f12 = berry_offdiagonal(spec, &target, 0, 1, v, dt)?;
                    out.push(MapPoint {
                        kx,
                        ky,
                        component: "f12_im",
                        analytic: block.f.0[0][1].im,
                        dynamic: f12.im,
                        gap,
                    });
                }
                MapComponent::G11 => {
                    let dynamic =
                        metric_component(spec, &target, 0, 1, InitialState::Ground1, v, dt)?;
                    out.push(MapPoint {
                        kx,
                        ky,
                        component: "g11",
                        analytic: block.g.0[0][0].re,
                        dynamic,
                        gap,
                    });
                }
                MapComponent::G12 => {
                    let mut runs = [0.0; 4];
                    for (slot, which) in runs.iter_mut().zip(FOUR_STATES) {
                        *slot = metric_component(spec, &target, 0, 1, which, v, dt)?;
                    }
                    let g12 = offdiagonal_from_runs(runs);
                    out.push(MapPoint {
                        kx,
                        ky,
                        component: "g12_re",
                        analytic: block.g.0[0][1].re,
                        dynamic: g12.re,
                        gap,
                    });
                    out.push(MapPoint {
                        kx,
                        ky,
                        component: "g12_im",
                        analytic: block.g.0[0][1].im,
                        dynamic: g12.im,
                        gap,
                    });
                }
            }
            Ok(out)
        })
        .collect();
    let mut flat = Vec::with_capacity(points.len() * 2);
    for r in rows {
        flat.extend(r?);
    }
    Ok(flat)
}

/// Observable driving a dynamically extracted invariant.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DynObservable {
    /// Generalized-force route: integrate dynamic Tr F (CP) or Eu (C₂T).
    Berry,
    /// Energy-fluctuation route: integrate √det G with the analytic sign.
    Metric,
}

/// Monopole charge of a sphere family from ramp dynamics alone: the
/// Chern number for CP members, the Euler class for C₂T members.
///
/// Berry route: Tr F_θφ per point needs the two ground-state runs (CP) or
/// the four-state reconstruction of Im F^{12} (C₂T). Metric route: the
/// three metric traces per point from six fluctuation runs, integrated as
/// √det G with the sign of the analytic curvature.
pub fn dynamic_invariant(
    spec: &ModelSpec,
    n_theta: usize,
    n_phi: usize,
    v: f64,
    dt: f64,
    observable: DynObservable,
) -> Result<InvariantResult> {
    if !spec.family.is_sphere() {
        return Err(Error::Validation(format!(
            "dynamic_invariant needs a sphere family, got {:?}",
            spec.family
        )));
    }
    let thetas = sphere_thetas(n_theta);
    let phis = sphere_phis(n_phi);
    let cell =
        (std::f64::consts::PI / n_theta as f64) * (2.0 * std::f64::consts::PI / n_phi as f64);
    let c2t = spec.family.is_c2t();
    let points: Vec<(f64, f64)> = thetas
        .iter()
        .flat_map(|&th| phis.iter().map(move |&ph| (th, ph)))
        .collect();
    let contributions: Vec<Result<f64>> = points
        .par_iter()
        .map(|&(th, ph)| {
            let target = [th, ph];
            match observable {
                DynObservable::Berry => {
                    if c2t {
                        // Eu = −Im F^{12} in the oriented real gauge
                        let f12 = berry_offdiagonal(spec, &target, 0, 1, v, dt)?;
                        Ok(-f12.im)
                    } else {
                        let f11 =
                            force_response(spec, &target, 0, 1, InitialState::Ground1, v, dt)?;
                        let f22 =
                            force_response(spec, &target, 0, 1, InitialState::Ground2, v, dt)?;
                        Ok(f11 + f22)
                    }
                }
                DynObservable::Metric => {
                    let mut tr = [0.0; 3]; // Tr g_θθ, Tr g_θφ, Tr g_φφ
                    for which in [InitialState::Ground1, InitialState::Ground2] {
                        let d2_t = fluctuation_response(spec, &target, &[0], which, v, dt)?;
                        let d2_p = fluctuation_response(spec, &target, &[1], which, v, dt)?;
                        let d2_tp = fluctuation_response(spec, &target, &[0, 1], which, v, dt)?;
                        tr[0] += d2_t / (v * v);
                        tr[2] += d2_p / (v * v);
                        tr[1] += (d2_tp - d2_t - d2_p) / (2.0 * v * v);
                    }
                    let det_g = 4.0 * (tr[0] * tr[2] - tr[1] * tr[1]);
                    let scal = geometry_scalars(spec, &target, 0, 1)?;
                    let analytic_sign = if c2t {
                        scal.eu.unwrap().signum() * 0.5
                    } else {
                        scal.tr_f.signum()
                    };
                    Ok(analytic_sign * det_g.max(0.0).sqrt())
                }
            }
        })
        .collect();
    let mut total = 0.0;
    for c in contributions {
        total += c?;
    }
    let value = total * cell / (2.0 * std::f64::consts::PI);
    Ok(InvariantResult {
        value,
        grid: (n_theta, n_phi),
        method: InvariantMethod::Dynamic,
        rounded: value.round() as i64,
    })
}
