//! Derived quantities and file export.
//!
//! The wall gradient generalizes the second-order one-sided difference to
//! the nonuniform spacings an adapted mesh has at the wall; on a uniform
//! mesh it reduces to `(-3 u0 + 4 u1 - u2) / (2h)`. Exports are plain CSV
//! and JSON with shortest round-trip float formatting, so identical inputs
//! produce byte-identical files.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::Serialize;

use crate::adapt::{AdaptiveRunReport, CycleRecord, TerminationReason};
use crate::error::{Result, SkanError};
use crate::kelly::KellyReport;
use crate::mesh::{Mesh1D, NodalField};
use crate::model::{BcVariant, FlowParams};

/// Wall velocity gradient `u'(0) = f''(0)` from the first three nodes by the
/// nonuniform three-point one-sided formula; exact for quadratic profiles.
pub fn wall_gradient(field: &NodalField) -> Result<f64> {
    let nodes = field.mesh().nodes();
    if nodes.len() < 3 {
        return Err(SkanError::InvalidParameter {
            name: "mesh",
            reason: "the wall stencil needs at least 3 nodes".into(),
        });
    }
    let h1 = nodes[1] - nodes[0];
    let h2 = nodes[2] - nodes[1];
    let u = field.u_vals();
    Ok(-(2.0 * h1 + h2) / (h1 * (h1 + h2)) * u[0] + (h1 + h2) / (h1 * h2) * u[1]
        - h1 / (h2 * (h1 + h2)) * u[2])
}

fn open(path: &Path) -> Result<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|source| SkanError::Io {
            path: path.to_path_buf(),
            source,
        })
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> SkanError + '_ {
    move |source| SkanError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Write the nodal profile as `eta,f,u`, one row per node in node order.
pub fn export_profile(field: &NodalField, path: &Path) -> Result<()> {
    let mut w = open(path)?;
    writeln!(w, "eta,f,u").map_err(io_err(path))?;
    for (i, &eta) in field.mesh().nodes().iter().enumerate() {
        writeln!(
            w,
            "{:?},{:?},{:?}",
            eta,
            field.f_vals()[i],
            field.u_vals()[i]
        )
        .map_err(io_err(path))?;
    }
    w.flush().map_err(io_err(path))
}

/// Write per-element indicators as `cell_center,h,indicator`.
pub fn export_indicators(
    report: &KellyReport,
    mesh: &Mesh1D,
    cycle: usize,
    path: &Path,
) -> Result<()> {
    if report.indicators.len() != mesh.element_count() {
        return Err(SkanError::Mismatch(format!(
            "cycle {cycle}: {} indicators vs {} elements",
            report.indicators.len(),
            mesh.element_count()
        )));
    }
    let mut w = open(path)?;
    writeln!(w, "cell_center,h,indicator").map_err(io_err(path))?;
    for (e, &ind) in report.indicators.iter().enumerate() {
        let (a, b) = mesh.element(e);
        writeln!(w, "{:?},{:?},{:?}", 0.5 * (a + b), b - a, ind).map_err(io_err(path))?;
    }
    w.flush().map_err(io_err(path))
}

/// Parameter echo embedded in the run summary.
#[derive(Debug, Clone, Serialize)]
pub struct ParamsEcho {
    pub m: f64,
    pub beta: f64,
    pub eta_inf: f64,
    pub bc: BcVariant,
}

/// Everything a downstream consumer needs about one adaptive run.
#[derive(Debug, Clone, Serialize)]
pub struct RunSummary {
    pub params: ParamsEcho,
    pub cycles: Vec<CycleRecord>,
    pub fpp0_final: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oracle_alpha: Option<f64>,
    /// `|fpp0_final - oracle_alpha|`; present exactly when the oracle is.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub agreement: Option<f64>,
    pub terminated_by: TerminationReason,
}

impl RunSummary {
    pub fn new(
        params: &FlowParams,
        report: &AdaptiveRunReport,
        oracle_alpha: Option<f64>,
    ) -> Self {
        let fpp0_final = report.fpp0_final();
        Self {
            params: ParamsEcho {
                m: params.m(),
                beta: params.beta(),
                eta_inf: params.eta_inf(),
                bc: params.bc_variant(),
            },
            cycles: report.cycles.clone(),
            fpp0_final,
            oracle_alpha,
            agreement: oracle_alpha.map(|a| (fpp0_final - a).abs()),
            terminated_by: report.terminated_by,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("summary serializes")
    }

    pub fn write_json(&self, path: &Path) -> Result<()> {
        let mut w = open(path)?;
        w.write_all(self.to_json().as_bytes()).map_err(io_err(path))?;
        w.write_all(b"\n").map_err(io_err(path))?;
        w.flush().map_err(io_err(path))
    }
}
