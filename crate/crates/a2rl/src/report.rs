//! Tab-separated output tables.

use std::fmt::Write as _;

use a2rl_core::eval::EvalReport;
use a2rl_core::trainer::LogRecord;

/// Header and one row. Annotator column groups appear when the file has
/// more than one annotator; the wall-clock column comes last.
pub fn eval_table(report: &EvalReport) -> String {
    let mut head = vec!["images".to_string(), "avg_iou".into(), "avg_disp".into()];
    let mut row = vec![report.images.to_string(), f4(report.avg_iou), f4(report.avg_boundary_displacement)];
    if report.per_annotation.len() > 1 {
        for (j, a) in report.per_annotation.iter().enumerate() {
            head.push(format!("iou_{}", j + 1));
            head.push(format!("disp_{}", j + 1));
            row.push(f4(a.avg_iou));
            row.push(f4(a.avg_displacement));
        }
    }
    for &(k, v) in &report.topk_max_iou {
        head.push(format!("top{k}_max_iou"));
        row.push(f4(v));
    }
    head.extend(["avg_steps".into(), "avg_scorer_calls".into(), "avg_seconds".into()]);
    row.extend([f4(report.avg_steps), f4(report.avg_scorer_calls), f4(report.avg_seconds)]);
    format!("{}\n{}\n", head.join("\t"), row.join("\t"))
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchRow {
    pub method: String,
    /// Episode steps for the agent, window count for a grid.
    pub avg_steps: f64,
    pub avg_scorer_calls: f64,
    pub avg_seconds: f64,
}

pub fn bench_table(rows: &[BenchRow]) -> String {
    let mut out = String::from("method\tavg_steps\tavg_scorer_calls\tavg_seconds\n");
    for r in rows {
        let _ = writeln!(out, "{}\t{}\t{}\t{}", r.method, f4(r.avg_steps), f4(r.avg_scorer_calls), f4(r.avg_seconds));
    }
    out
}

pub fn train_log(records: &[LogRecord]) -> String {
    let mut out = String::from("step\tmean_reward\tmean_length\tmean_final_score\tentropy\n");
    for r in records {
        let _ = writeln!(
            out,
            "{}\t{:.6}\t{:.6}\t{:.6}\t{:.6}",
            r.step, r.mean_reward, r.mean_length, r.mean_final_score, r.entropy
        );
    }
    out
}

fn f4(v: f64) -> String {
    format!("{v:.4}")
}
