//! CSV and JSON emission. All floating-point output is printed with 17
//! significant digits so parsed values round-trip bit-exactly.

use crate::error::{MhdError, Result};
use crate::monitors::{Admissibility, CriterionSpec, MonitorSeries};
use std::fmt::Write as _;
use std::path::Path;

/// 17 significant digits, lossless for f64.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

pub const MONITOR_CSV_HEADER: &str = "t,E_u,E_b,grad_u_sq,grad_b_sq,norm_uz_alpha,M_t,norm_pz_alpha,Mp_t,D_t,energy_residual,zderiv_residual,h1_residual,l4_residual,div_u_max,div_b_max";

/// One row per sample; identity residual columns hold 0 on the first and
/// last rows, where no centered window exists.
pub fn monitor_csv(series: &MonitorSeries) -> String {
    let mut out = String::new();
    out.push_str(MONITOR_CSV_HEADER);
    out.push('\n');
    for (i, s) in series.samples.iter().enumerate() {
        let cols = [
            s.t,
            s.kinetic_energy,
            s.magnetic_energy,
            s.grad_u_sq,
            s.grad_b_sq,
            s.uz_norm_alpha,
            series.m_t[i],
            s.pz_norm_alpha,
            series.mp_t[i],
            series.d_t[i],
            series.energy_residual[i],
            series.zderiv_residual[i],
            series.h1_residual[i],
            series.l4_residual[i],
            s.div_u_max,
            s.div_b_max,
        ];
        let mut first = true;
        for c in cols {
            if !first {
                out.push(',');
            }
            out.push_str(&fmt_f64(c));
            first = false;
        }
        out.push('\n');
    }
    out
}

/// Minimal JSON string escaping (the emitted strings are identifiers and
/// paths).
fn json_escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    for ch in s.chars() {
        match ch {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            c if (c as u32) < 0x20 => {
                let _ = write!(out, "\\u{:04x}", c as u32);
            }
            c => out.push(c),
        }
    }
    out
}

/// JSON number; β = ∞ and other non-finite values are emitted as strings.
fn json_f64(x: f64) -> String {
    if x.is_finite() {
        fmt_f64(x)
    } else if x.is_infinite() && x > 0.0 {
        "\"inf\"".into()
    } else if x.is_infinite() {
        "\"-inf\"".into()
    } else {
        "\"nan\"".into()
    }
}

pub struct SummaryVerdict {
    pub spec: CriterionSpec,
    pub verdict: Admissibility,
}

/// Final-state summary of a simulate run.
pub struct RunSummary {
    pub t_final: f64,
    pub steps: usize,
    pub m_final: f64,
    pub mp_final: f64,
    pub d_final: f64,
    pub max_energy_residual: f64,
    pub max_zderiv_residual: f64,
    pub max_h1_residual: f64,
    pub max_l4_residual: f64,
    pub max_div_u: f64,
    pub max_div_b: f64,
    pub verdicts: Vec<SummaryVerdict>,
}

impl RunSummary {
    pub fn from_series(series: &MonitorSeries, steps: usize, verdicts: Vec<SummaryVerdict>) -> RunSummary {
        let fold = |v: &[f64]| v.iter().fold(0.0_f64, |m, &x| m.max(x));
        let divs: Vec<f64> = series.samples.iter().map(|s| s.div_u_max).collect();
        let divs_b: Vec<f64> = series.samples.iter().map(|s| s.div_b_max).collect();
        RunSummary {
            t_final: series.samples.last().map(|s| s.t).unwrap_or(0.0),
            steps,
            m_final: series.m_t.last().copied().unwrap_or(0.0),
            mp_final: series.mp_t.last().copied().unwrap_or(0.0),
            d_final: series.d_t.last().copied().unwrap_or(0.0),
            max_energy_residual: fold(&series.energy_residual),
            max_zderiv_residual: fold(&series.zderiv_residual),
            max_h1_residual: fold(&series.h1_residual),
            max_l4_residual: fold(&series.l4_residual),
            max_div_u: fold(&divs),
            max_div_b: fold(&divs_b),
            verdicts,
        }
    }

    pub fn to_json(&self) -> String {
        let mut out = String::from("{\n");
        let _ = writeln!(out, "  \"t_final\": {},", json_f64(self.t_final));
        let _ = writeln!(out, "  \"steps\": {},", self.steps);
        let _ = writeln!(out, "  \"M_final\": {},", json_f64(self.m_final));
        let _ = writeln!(out, "  \"Mp_final\": {},", json_f64(self.mp_final));
        let _ = writeln!(out, "  \"D_final\": {},", json_f64(self.d_final));
        let _ = writeln!(
            out,
            "  \"max_energy_residual\": {},",
            json_f64(self.max_energy_residual)
        );
        let _ = writeln!(
            out,
            "  \"max_zderiv_residual\": {},",
            json_f64(self.max_zderiv_residual)
        );
        let _ = writeln!(out, "  \"max_h1_residual\": {},", json_f64(self.max_h1_residual));
        let _ = writeln!(out, "  \"max_l4_residual\": {},", json_f64(self.max_l4_residual));
        let _ = writeln!(out, "  \"max_div_u\": {},", json_f64(self.max_div_u));
        let _ = writeln!(out, "  \"max_div_b\": {},", json_f64(self.max_div_b));
        out.push_str("  \"admissibility\": [\n");
        for (i, v) in self.verdicts.iter().enumerate() {
            let comma = if i + 1 < self.verdicts.len() { "," } else { "" };
            let _ = writeln!(
                out,
                "    {{\"kind\": \"{}\", \"alpha\": {}, \"beta\": {}, \"admissible\": {}, \"slack\": {}}}{comma}",
                v.spec.kind.name(),
                json_f64(v.spec.alpha),
                json_f64(v.spec.beta),
                v.verdict.admissible,
                json_f64(v.verdict.slack),
            );
        }
        out.push_str("  ]\n}\n");
        out
    }
}

/// JSON report of one inequality sweep.
pub struct InequalityReport {
    pub inequality: String,
    pub grid_n: usize,
    pub box_length: f64,
    pub trials: usize,
    pub seed: u64,
    /// (name, value) parameter pairs: μ, λ, γ for the anisotropic form, q
    /// for the isotropic one.
    pub params: Vec<(&'static str, f64)>,
    pub family: String,
    pub sup_ratio: f64,
    pub argmax_trial: usize,
    pub argmax_center: [f64; 3],
    pub argmax_sigmas: Vec<[f64; 3]>,
    pub argmax_amplitudes: Vec<f64>,
}

pub fn inequality_reports_json(reports: &[InequalityReport]) -> String {
    let mut out = String::from("{\n  \"reports\": [\n");
    for (i, r) in reports.iter().enumerate() {
        out.push_str("    {\n");
        let _ = writeln!(out, "      \"inequality\": \"{}\",", json_escape(&r.inequality));
        let _ = writeln!(out, "      \"grid_n\": {},", r.grid_n);
        let _ = writeln!(out, "      \"box_length\": {},", json_f64(r.box_length));
        let _ = writeln!(out, "      \"trials\": {},", r.trials);
        let _ = writeln!(out, "      \"seed\": {},", r.seed);
        out.push_str("      \"params\": {");
        for (j, (name, value)) in r.params.iter().enumerate() {
            if j > 0 {
                out.push_str(", ");
            }
            let _ = write!(out, "\"{name}\": {}", json_f64(*value));
        }
        out.push_str("},\n");
        let _ = writeln!(out, "      \"family\": \"{}\",", json_escape(&r.family));
        // the sampled sup only ever under-estimates the true constant
        let _ = writeln!(out, "      \"sup_ratio\": {},", json_f64(r.sup_ratio));
        let _ = writeln!(out, "      \"sup_ratio_is_lower_bound_on_C\": true,");
        let _ = writeln!(out, "      \"argmax_trial\": {},", r.argmax_trial);
        let _ = writeln!(
            out,
            "      \"argmax_center\": [{}, {}, {}],",
            json_f64(r.argmax_center[0]),
            json_f64(r.argmax_center[1]),
            json_f64(r.argmax_center[2])
        );
        out.push_str("      \"argmax_sigmas\": [");
        for (j, s) in r.argmax_sigmas.iter().enumerate() {
            if j > 0 {
                out.push_str(", ");
            }
            let _ = write!(out, "[{}, {}, {}]", json_f64(s[0]), json_f64(s[1]), json_f64(s[2]));
        }
        out.push_str("],\n");
        out.push_str("      \"argmax_amplitudes\": [");
        for (j, a) in r.argmax_amplitudes.iter().enumerate() {
            if j > 0 {
                out.push_str(", ");
            }
            out.push_str(&json_f64(*a));
        }
        out.push_str("]\n");
        let comma = if i + 1 < reports.len() { "," } else { "" };
        let _ = writeln!(out, "    }}{comma}");
    }
    out.push_str("  ]\n}\n");
    out
}

/// Write atomically via a temp file and rename; failures carry the path.
pub fn atomic_write(path: &Path, contents: &str) -> Result<()> {
    let tmp = path.with_extension("tmp");
    std::fs::write(&tmp, contents).map_err(|e| MhdError::Io {
        path: tmp.clone(),
        source: e,
    })?;
    std::fs::rename(&tmp, path).map_err(|e| MhdError::Io {
        path: path.to_path_buf(),
        source: e,
    })
}
