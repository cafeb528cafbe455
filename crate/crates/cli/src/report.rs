//! `report`: seed-aggregated metrics per (sequence, method), one row each.
//! Cells read `mean [min, max]` over seeds.

use std::collections::BTreeMap;

use replayforge_core::evaluation::{read_reports, Method, MethodRun};

use crate::{Failure, ReportArgs};

#[derive(Debug, Clone, Copy, PartialEq)]
enum Column {
    AveMape,
    Forgetting,
    FK(usize),
    TailAveMape,
    TailForgetting,
    Coverage,
}

impl Column {
    fn header(self) -> String {
        match self {
            Column::AveMape => "AveMAPE".into(),
            Column::Forgetting => "F".into(),
            Column::FK(k) => format!("F_{k}"),
            Column::TailAveMape => "tail AveMAPE".into(),
            Column::TailForgetting => "tail F".into(),
            Column::Coverage => "coverage".into(),
        }
    }

    fn value(self, run: &MethodRun) -> Option<f64> {
        match self {
            Column::AveMape => Some(run.summary.ave_mape),
            Column::Forgetting => run.summary.forgetting,
            Column::FK(k) => run.summary.f_k_at(k),
            Column::TailAveMape => run.tail_summary.ave_mape,
            Column::TailForgetting => run.tail_summary.forgetting,
            Column::Coverage => Some(run.tail_summary.coverage),
        }
    }
}

/// Default step sizes: a third and two thirds of the sequence length.
fn default_ks(tasks: usize) -> Vec<usize> {
    let mut ks: Vec<usize> = [tasks / 3, 2 * tasks / 3]
        .into_iter()
        .filter(|&k| k >= 1 && k < tasks)
        .collect();
    ks.dedup();
    ks
}

fn columns(args: &ReportArgs, tasks: usize) -> Result<Vec<Column>, Failure> {
    if args.tail {
        if args.metric.is_some() {
            return Err(Failure::Usage("--tail cannot be combined with --metric".into()));
        }
        return Ok(vec![Column::TailAveMape, Column::TailForgetting, Column::Coverage]);
    }
    match args.metric.as_deref() {
        None => {
            let mut out = vec![Column::AveMape, Column::Forgetting];
            out.extend(default_ks(tasks).into_iter().map(Column::FK));
            Ok(out)
        }
        Some("ave_mape") => Ok(vec![Column::AveMape]),
        Some("forgetting") => Ok(vec![Column::Forgetting]),
        Some("f_k") => match args.k {
            Some(k) => Ok(vec![Column::FK(k)]),
            None => Err(Failure::Usage("--metric f_k needs --k".into())),
        },
        Some(other) => Err(Failure::Usage(format!(
            "unknown metric `{other}`; valid: ave_mape, forgetting, f_k"
        ))),
    }
}

fn cell(values: &[f64]) -> String {
    if values.is_empty() {
        return "n/a".into();
    }
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    if values.len() == 1 {
        return format!("{mean:.4}");
    }
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    format!("{mean:.4} [{lo:.4}, {hi:.4}]")
}

/// Renders the table for already loaded runs.
pub fn render(runs: &[MethodRun], args: &ReportArgs) -> Result<String, Failure> {
    if args.k.is_some() && args.metric.as_deref() != Some("f_k") {
        return Err(Failure::Usage("--k applies only to --metric f_k".into()));
    }
    let mut groups: BTreeMap<(String, Method), Vec<&MethodRun>> = BTreeMap::new();
    for run in runs {
        groups.entry((run.sequence.name(), run.method)).or_default().push(run);
    }
    let tasks = runs.iter().map(|r| r.result.tasks()).max().unwrap_or(0);
    let cols = columns(args, tasks)?;
    let mut table = vec![{
        let mut h = vec!["sequence".to_string(), "method".into(), "seeds".into()];
        h.extend(cols.iter().map(|c| c.header()));
        h
    }];
    for ((seq, method), group) in &groups {
        let mut row = vec![seq.clone(), method.to_string(), group.len().to_string()];
        for c in &cols {
            let values: Vec<f64> = group.iter().filter_map(|r| c.value(r)).collect();
            row.push(cell(&values));
        }
        table.push(row);
    }
    let widths: Vec<usize> = (0..table[0].len())
        .map(|i| table.iter().map(|r| r[i].len()).max().unwrap_or(0))
        .collect();
    let mut out = String::new();
    for row in &table {
        let line: Vec<String> = row
            .iter()
            .zip(&widths)
            .map(|(v, w)| format!("{v:<w$}"))
            .collect();
        out.push_str(line.join("  ").trim_end());
        out.push('\n');
    }
    Ok(out)
}

pub fn cmd_report(args: &ReportArgs) -> Result<(), Failure> {
    let runs = read_reports(&args.dir).map_err(|e| Failure::Runtime(e.to_string()))?;
    if runs.is_empty() {
        return Err(Failure::Runtime(format!("no reports in {}", args.dir.display())));
    }
    print!("{}", render(&runs, args)?);
    Ok(())
}
