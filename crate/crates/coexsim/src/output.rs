//! File outputs: trials.csv, summary.json, and tidy sweep CSVs.
//!
//! All floats are serialized with 9 significant digits; per-trial runtime is
//! deliberately excluded so output bytes depend only on (config, seed).

use std::io::Write;
use std::path::Path;

use crate::experiment::{Experiment, ModeComparison, SweepRow};

pub const TRIALS_HEADER: &str = "trial_index,seed,admitted_total,admitted_cochannel,\
rejected_interference,rejected_degradation,rejected_mop_cap,rejected_no_spectrum,\
served_ues,unserved_ues,mean_degradation,max_degradation";

pub const SWEEP_HEADER: &str = "param,mode,mean,std,ci95,ratio";

/// 9 significant digits, scientific notation.
pub fn fmt_sig(x: f64) -> String {
    format!("{x:.8e}")
}

/// Rounds to 9 significant digits (for JSON number output).
pub fn round_sig(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    let exp = x.abs().log10().floor() as i32;
    let scale = 10f64.powi(8 - exp);
    (x * scale).round() / scale
}

pub fn write_trials_csv(exp: &Experiment, mut out: impl Write) -> std::io::Result<()> {
    writeln!(out, "{TRIALS_HEADER}")?;
    for t in &exp.trials {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{}",
            t.trial_index,
            t.seed,
            t.admitted_total,
            t.admitted_cochannel,
            t.rejections.interference,
            t.rejections.degradation,
            t.rejections.mop_cap,
            t.rejections.no_spectrum,
            t.served_ues,
            t.unserved_ues,
            fmt_sig(t.mean_degradation()),
            fmt_sig(t.max_degradation()),
        )?;
    }
    Ok(())
}

fn round_stats(s: &crate::experiment::Stats) -> serde_json::Value {
    serde_json::json!({
        "n": s.n,
        "mean": round_sig(s.mean),
        "std": round_sig(s.std),
        "ci95": round_sig(s.ci95),
    })
}

pub fn summary_json(exp: &Experiment) -> serde_json::Value {
    let s = &exp.summary;
    serde_json::json!({
        "mode": s.mode.to_string(),
        "trials": s.trials,
        "master_seed": s.master_seed,
        "admitted_total": round_stats(&s.admitted_total),
        "admitted_cochannel": round_stats(&s.admitted_cochannel),
        "unserved_ues": round_stats(&s.unserved_ues),
        "mean_degradation": round_stats(&s.mean_degradation),
        "rejections": {
            "interference": round_stats(&s.rejected_interference),
            "degradation": round_stats(&s.rejected_degradation),
            "mop_cap": round_stats(&s.rejected_mop_cap),
            "no_spectrum": round_stats(&s.rejected_no_spectrum),
        },
    })
}

pub fn write_summary_json(exp: &Experiment, mut out: impl Write) -> std::io::Result<()> {
    let value = summary_json(exp);
    out.write_all(serde_json::to_string_pretty(&value).expect("serializable").as_bytes())?;
    writeln!(out)
}

pub fn write_sweep_csv(rows: &[SweepRow], mut out: impl Write) -> std::io::Result<()> {
    writeln!(out, "{SWEEP_HEADER}")?;
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{},{}",
            fmt_sig(r.param),
            r.mode,
            fmt_sig(r.mean),
            fmt_sig(r.std),
            fmt_sig(r.ci95),
            fmt_sig(r.ratio),
        )?;
    }
    Ok(())
}

pub fn write_compare_csv(cmp: &ModeComparison, mut out: impl Write) -> std::io::Result<()> {
    let mut header = String::from("trial_index");
    for mode in &cmp.modes {
        header.push_str(&format!(",admitted_{mode}"));
    }
    writeln!(out, "{header}")?;
    let n = cmp.counts.first().map(|c| c.len()).unwrap_or(0);
    for i in 0..n {
        let mut row = format!("{i}");
        for counts in &cmp.counts {
            row.push_str(&format!(",{}", counts[i]));
        }
        writeln!(out, "{row}")?;
    }
    Ok(())
}

pub fn compare_summary_json(cmp: &ModeComparison) -> serde_json::Value {
    serde_json::json!({
        "modes": cmp.modes.iter().map(|m| m.to_string()).collect::<Vec<_>>(),
        "means": cmp.means.iter().map(|m| round_sig(*m)).collect::<Vec<_>>(),
        "ratios": cmp.ratios.iter().map(|r| round_sig(*r)).collect::<Vec<_>>(),
    })
}

pub fn write_file(path: &Path, write: impl FnOnce(&mut dyn Write) -> std::io::Result<()>) -> std::io::Result<()> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent)?;
    }
    let mut file = std::io::BufWriter::new(std::fs::File::create(path)?);
    write(&mut file)?;
    file.flush()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sig_digit_formatting() {
        assert_eq!(fmt_sig(1.0), "1.00000000e0");
        assert_eq!(fmt_sig(0.123456789123), "1.23456789e-1");
        assert_eq!(round_sig(123456789.123), 123456789.0);
        assert_eq!(round_sig(0.12345678949), 0.123456789);
        assert_eq!(round_sig(0.0), 0.0);
    }
}
