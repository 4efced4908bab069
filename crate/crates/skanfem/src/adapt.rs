//! The adaptive driver: solve, estimate, check, mark, refine, transfer.
//!
//! Each cycle converges the nonlinear problem on the current mesh, evaluates
//! the per-element indicators, and either stops (estimator below tolerance
//! or cycle budget exhausted) or bisects every element whose squared
//! indicator reaches `theta` times the maximum. The converged field is
//! interpolated onto the refined mesh as the next initial guess, so later
//! cycles start hot.

use serde::Serialize;

use crate::error::{Result, SkanError};
use crate::kelly::{estimate, KellyReport};
use crate::mesh::{coarsen, Mesh1D, NodalField, RefinementFlags};
use crate::model::{bc_values, FlowParams};
use crate::picard::{initial_guess, picard_solve, PicardConfig};
use crate::postproc::wall_gradient;

/// Settings for the outer adaptive loop.
#[derive(Debug, Clone)]
pub struct AmrConfig {
    pub max_cycles: usize,
    /// Stop once the global estimator drops below this.
    pub tol_error: f64,
    /// Marking fraction in (0, 1]: mark when `eta_K^2 >= theta * max`.
    pub theta: f64,
    /// Merge low-indicator element pairs after each refinement.
    pub coarsening: bool,
    /// Estimator constants.
    pub c1: f64,
    pub c2: f64,
    /// Elements of the initial uniform mesh.
    pub initial_elements: usize,
    pub picard: PicardConfig,
}

impl Default for AmrConfig {
    fn default() -> Self {
        Self {
            max_cycles: 20,
            tol_error: 1e-6,
            theta: 0.5,
            coarsening: false,
            c1: 1.0,
            c2: 0.5,
            initial_elements: 8,
            picard: PicardConfig::default(),
        }
    }
}

impl AmrConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.theta > 0.0 && self.theta <= 1.0) {
            return Err(SkanError::InvalidParameter {
                name: "theta",
                reason: format!("must lie in (0, 1], got {}", self.theta),
            });
        }
        if !(self.tol_error > 0.0) {
            return Err(SkanError::InvalidParameter {
                name: "tol_error",
                reason: format!("must be positive, got {}", self.tol_error),
            });
        }
        if self.max_cycles == 0 {
            return Err(SkanError::InvalidParameter {
                name: "max_cycles",
                reason: "must be at least 1".into(),
            });
        }
        if self.initial_elements == 0 {
            return Err(SkanError::InvalidParameter {
                name: "initial_elements",
                reason: "must be at least 1".into(),
            });
        }
        self.picard.validate()
    }
}

/// Why the loop stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TerminationReason {
    Tolerance,
    MaxCycles,
}

/// One row of the per-cycle history.
#[derive(Debug, Clone, Serialize)]
pub struct CycleRecord {
    pub cycle: usize,
    pub dofs: usize,
    pub eta_global: f64,
    pub fpp0: f64,
    pub picard_iters: usize,
}

/// Mesh and indicator snapshot of one cycle, kept for export.
#[derive(Debug, Clone)]
pub struct CycleEstimate {
    pub mesh: Mesh1D,
    pub kelly: KellyReport,
}

/// Full outcome of an adaptive run.
#[derive(Debug, Clone)]
pub struct AdaptiveRunReport {
    pub cycles: Vec<CycleRecord>,
    pub estimates: Vec<CycleEstimate>,
    pub final_field: NodalField,
    pub terminated_by: TerminationReason,
    /// Worst Krylov-vs-direct disagreement seen, when cross-checking.
    pub max_solver_rel_diff: Option<f64>,
}

impl AdaptiveRunReport {
    pub fn final_mesh(&self) -> &Mesh1D {
        self.final_field.mesh()
    }

    pub fn fpp0_final(&self) -> f64 {
        self.cycles.last().expect("cycles list is non-empty").fpp0
    }
}

/// Mark every element whose squared indicator reaches `theta` times the
/// maximum. The comparison is `>=` so the maximizer itself always qualifies
/// and progress is guaranteed; an all-zero report marks nothing.
pub fn mark(report: &KellyReport, theta: f64) -> RefinementFlags {
    let nel = report.indicators.len();
    let max_sq = report
        .indicators
        .iter()
        .fold(0.0f64, |m, &v| m.max(v * v));
    if max_sq == 0.0 {
        return RefinementFlags::none(nel);
    }
    let cut = theta * max_sq;
    let mask: Vec<bool> = report.indicators.iter().map(|&v| v * v >= cut).collect();
    RefinementFlags::from_mask(mask)
}

/// Run the full adaptive loop from the coarse uniform start mesh.
pub fn run_adaptive(params: &FlowParams, cfg: &AmrConfig) -> Result<AdaptiveRunReport> {
    cfg.validate()?;
    let bc = bc_values(params);
    let mut mesh = Mesh1D::uniform(0.0, params.eta_inf(), cfg.initial_elements)?;
    let mut field = initial_guess(&mesh, &bc);

    let mut cycles = Vec::new();
    let mut estimates = Vec::new();
    let mut worst_cross: Option<f64> = None;

    for cycle in 0..cfg.max_cycles {
        let (sol, picard_rep) = picard_solve(params, &field, &cfg.picard)?;
        if !picard_rep.converged {
            return Err(SkanError::PicardStall {
                cycle,
                iterations: picard_rep.iterations,
                last_update: picard_rep.update_history.last().copied().unwrap_or(f64::NAN),
            });
        }
        if let Some(d) = picard_rep.max_solver_rel_diff {
            worst_cross = Some(worst_cross.map_or(d, |w: f64| w.max(d)));
        }
        field = sol;

        let kelly = estimate(&field, params, cfg.c1, cfg.c2);
        cycles.push(CycleRecord {
            cycle,
            dofs: mesh.node_count(),
            eta_global: kelly.global,
            fpp0: wall_gradient(&field)?,
            picard_iters: picard_rep.iterations,
        });
        estimates.push(CycleEstimate {
            mesh: mesh.clone(),
            kelly: kelly.clone(),
        });

        if kelly.global < cfg.tol_error {
            return Ok(AdaptiveRunReport {
                cycles,
                estimates,
                final_field: field,
                terminated_by: TerminationReason::Tolerance,
                max_solver_rel_diff: worst_cross,
            });
        }
        if cycle + 1 == cfg.max_cycles {
            break;
        }

        let flags = mark(&kelly, cfg.theta);
        if flags.is_empty() {
            // all indicators vanished: nothing left to refine
            return Ok(AdaptiveRunReport {
                cycles,
                estimates,
                final_field: field,
                terminated_by: TerminationReason::Tolerance,
                max_solver_rel_diff: worst_cross,
            });
        }

        let refined = mesh.refine(&flags)?;
        let mut next = field.transfer(&refined)?;

        if cfg.coarsening {
            next = coarsen_low_indicator_pairs(&next, &kelly, &flags)?;
        }

        mesh = next.mesh().clone();
        field = next;
    }

    Ok(AdaptiveRunReport {
        cycles,
        estimates,
        final_field: field,
        terminated_by: TerminationReason::MaxCycles,
        max_solver_rel_diff: worst_cross,
    })
}

/// Merge bottom-decile pairs on the refined mesh. Indicators carry over from
/// the pre-refinement estimate; the two halves of a freshly bisected element
/// are masked so refinement is never undone in the same cycle.
fn coarsen_low_indicator_pairs(
    refined_field: &NodalField,
    kelly: &KellyReport,
    flags: &RefinementFlags,
) -> Result<NodalField> {
    let mut carried = Vec::with_capacity(refined_field.mesh().element_count());
    for (e, &ind) in kelly.indicators.iter().enumerate() {
        if flags.is_marked(e) {
            carried.push(f64::INFINITY);
            carried.push(f64::INFINITY);
        } else {
            carried.push(ind);
        }
    }

    let mut unmarked: Vec<f64> = kelly
        .indicators
        .iter()
        .enumerate()
        .filter(|(e, _)| !flags.is_marked(*e))
        .map(|(_, &v)| v)
        .collect();
    if unmarked.len() < 2 {
        return Ok(refined_field.clone());
    }
    unmarked.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let decile = unmarked[unmarked.len() / 10];
    if decile == 0.0 {
        return Ok(refined_field.clone());
    }
    // a pair of two decile-level elements sits exactly at sqrt(2) * decile
    let keep_threshold = std::f64::consts::SQRT_2 * decile;
    coarsen(refined_field, &carried, keep_threshold)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::BcVariant;
    use crate::oracle::solve_shooting;

    fn wedge(m: f64) -> FlowParams {
        FlowParams::from_m(m, 8.0, BcVariant::Wedge).unwrap()
    }

    fn report_from(ind_sq: &[f64]) -> KellyReport {
        KellyReport {
            indicators: ind_sq.iter().map(|&v| v.sqrt()).collect(),
            global: ind_sq.iter().sum::<f64>().sqrt(),
            c1: 1.0,
            c2: 0.5,
        }
    }

    #[test]
    fn mark_examples() {
        // squared indicators (4, 1, 0.25)
        let rep = report_from(&[4.0, 1.0, 0.25]);
        assert_eq!(mark(&rep, 0.5).indices(), vec![0]);
        assert_eq!(mark(&rep, 0.2).indices(), vec![0, 1]);

        // equal indicators with theta = 1: everything marked
        let rep = report_from(&[0.7, 0.7, 0.7, 0.7]);
        assert_eq!(mark(&rep, 1.0).indices(), vec![0, 1, 2, 3]);

        // all-zero: empty flags
        let rep = report_from(&[0.0, 0.0]);
        assert!(mark(&rep, 0.5).is_empty());
    }

    #[test]
    fn mark_always_selects_the_maximizer() {
        let rep = report_from(&[1e-30, 2e-30, 5e-30]);
        let flags = mark(&rep, 1.0);
        assert!(flags.is_marked(2));
    }

    #[test]
    fn adaptive_run_matches_oracle_at_blasius() {
        let params = wedge(0.0);
        let report = run_adaptive(&params, &AmrConfig::default()).unwrap();
        let shot = solve_shooting(&params, 1e-10).unwrap();
        let diff = (report.fpp0_final() - shot.alpha).abs();
        assert!(diff <= 5e-3, "wall gradient off by {diff:.2e}");
        assert!(matches!(
            report.terminated_by,
            TerminationReason::Tolerance | TerminationReason::MaxCycles
        ));
    }

    #[test]
    fn immediate_tolerance_and_single_cycle() {
        let params = wedge(1.0);
        let huge_tol = AmrConfig {
            tol_error: 1e12,
            ..AmrConfig::default()
        };
        let report = run_adaptive(&params, &huge_tol).unwrap();
        assert_eq!(report.cycles.len(), 1);
        assert_eq!(report.terminated_by, TerminationReason::Tolerance);

        let one_cycle = AmrConfig {
            max_cycles: 1,
            ..AmrConfig::default()
        };
        let report = run_adaptive(&params, &one_cycle).unwrap();
        assert_eq!(report.cycles.len(), 1);
        assert_eq!(report.terminated_by, TerminationReason::MaxCycles);

        assert!(AmrConfig {
            max_cycles: 0,
            ..AmrConfig::default()
        }
        .validate()
        .is_err());
    }

    #[test]
    fn estimator_decreases_and_meshes_nest() {
        for m in [0.0, 1.0] {
            let params = wedge(m);
            let cfg = AmrConfig {
                max_cycles: 8,
                ..AmrConfig::default()
            };
            let report = run_adaptive(&params, &cfg).unwrap();
            assert!(report.cycles.len() >= 7);
            for w in report.cycles.windows(2).take(6) {
                assert!(
                    w[1].eta_global < w[0].eta_global,
                    "m = {m}: estimator rose {} -> {}",
                    w[0].eta_global,
                    w[1].eta_global
                );
            }
            // hierarchical refinement: every node of a mesh appears in its successor
            for pair in report.estimates.windows(2) {
                let coarse = pair[0].mesh.nodes();
                let fine = pair[1].mesh.nodes();
                let mut k = 0;
                for &x in coarse {
                    while k < fine.len() && fine[k] != x {
                        k += 1;
                    }
                    assert!(k < fine.len(), "node {x} lost after refinement");
                }
            }
            // dofs strictly increase while coarsening is off
            for w in report.cycles.windows(2) {
                assert!(w[1].dofs > w[0].dofs);
            }
        }
    }

    #[test]
    fn marked_set_invariant_under_constant_scaling() {
        let params = wedge(1.0);
        let cfg = AmrConfig {
            max_cycles: 4,
            ..AmrConfig::default()
        };
        let report = run_adaptive(&params, &cfg).unwrap();
        let field = &report.final_field;
        // power-of-two scale keeps every float operation exact
        let base = estimate(field, &params, 1.0, 0.5);
        let scaled = estimate(field, &params, 4.0, 2.0);
        for theta in [0.2, 0.5, 1.0] {
            assert_eq!(mark(&base, theta).indices(), mark(&scaled, theta).indices());
        }
    }

    #[test]
    fn wall_gradient_settles_across_cycles() {
        for m in [0.0, 1.0] {
            let params = wedge(m);
            let report = run_adaptive(&params, &AmrConfig::default()).unwrap();
            let c = &report.cycles;
            assert!(c.len() >= 3);
            let early = (c[2].fpp0 - c[1].fpp0).abs();
            let late = (c[c.len() - 1].fpp0 - c[c.len() - 2].fpp0).abs();
            assert!(late < early, "m = {m}: {late:.3e} !< {early:.3e}");
        }
    }

    #[test]
    fn coarsening_keeps_run_valid() {
        let params = wedge(1.0);
        let cfg = AmrConfig {
            coarsening: true,
            max_cycles: 10,
            ..AmrConfig::default()
        };
        let report = run_adaptive(&params, &cfg).unwrap();
        assert!(report.cycles.len() >= 2);
        // the mesh stays a valid partition and the run still tracks the wall
        let shot = solve_shooting(&params, 1e-10).unwrap();
        assert!((report.fpp0_final() - shot.alpha).abs() <= 5e-2);
    }

    #[test]
    fn picard_stall_carries_cycle_context() {
        let params = wedge(1.0);
        let cfg = AmrConfig {
            picard: PicardConfig {
                max_iters: 2,
                ..PicardConfig::default()
            },
            ..AmrConfig::default()
        };
        match run_adaptive(&params, &cfg) {
            Err(SkanError::PicardStall { cycle, .. }) => assert_eq!(cycle, 0),
            other => panic!("expected a Picard stall, got {other:?}"),
        }
    }
}
