//! Report rendering: markdown blocks mirroring the layout of the reference
//! tables, and flat CSV for machine consumption. Every report opens with the
//! resolved run configuration so any output can be reproduced from its own
//! header.

use std::fmt::Write as _;

use validsim_core::{BiasTables, CellResult, ClassificationGrid, ValiditySweep};

use crate::config::{Department, OutputFormat};

/// Fixed three decimals, the display convention of the reference tables.
fn fmt3(v: f64) -> String {
    let s = format!("{v:.3}");
    if s == "-0.000" {
        "0.000".into()
    } else {
        s
    }
}

/// Six significant digits for CSV payloads.
fn fmt_sig6(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    let magnitude = v.abs().log10().floor() as i32;
    let decimals = (5 - magnitude).clamp(0, 17) as usize;
    format!("{v:.decimals$}")
}

fn markdown_header(title: &str, config_toml: &str) -> String {
    format!("# {title}\n\n```toml\n{config_toml}```\n\n")
}

fn csv_header(config_toml: &str) -> String {
    let mut out = String::new();
    for line in config_toml.lines() {
        if line.is_empty() {
            out.push_str("#\n");
        } else {
            let _ = writeln!(out, "# {line}");
        }
    }
    out
}

fn criterion_labels(cell: &CellResult) -> Vec<String> {
    cell.design
        .criteria
        .iter()
        .map(|c| format!("var {}", c + 1))
        .collect()
}

/// Stacked bias blocks: pop/pda/agr/sum rows followed
/// by the bias rows, with the diff column (|pop-pda| - |pop-agr| for the last
/// criterion) on the pop-agr row.
pub fn render_bias_tables(config_toml: &str, tables: &BiasTables, format: OutputFormat) -> String {
    match format {
        OutputFormat::Markdown => {
            let mut out = markdown_header("bias table", config_toml);
            let labels = criterion_labels(&tables.blocks[0]);
            let _ = writeln!(out, "| NSS | SSS | row | {} | diff |", labels.join(" | "));
            let _ = writeln!(
                out,
                "|---:|---:|:---|{}---:|",
                "---:|".repeat(labels.len())
            );
            for block in &tables.blocks {
                let rows = &block.per_criterion;
                let diff = fmt3(rows[rows.len() - 1].diff());
                let joined = |values: Vec<String>| values.join(" | ");
                let _ = writeln!(
                    out,
                    "| {} | {} | pop | {} | |",
                    block.design.nss,
                    block.design.sss,
                    joined(rows.iter().map(|r| fmt3(r.pop)).collect())
                );
                let mut body: Vec<(&str, Vec<String>, String)> = vec![
                    ("pda", rows.iter().map(|r| fmt3(r.pda)).collect(), String::new()),
                    ("agr", rows.iter().map(|r| fmt3(r.agr)).collect(), String::new()),
                    ("sum", rows.iter().map(|r| fmt3(r.sum)).collect(), String::new()),
                    ("pop-pda", rows.iter().map(|r| fmt3(r.bias_pda)).collect(), String::new()),
                    ("pop-agr", rows.iter().map(|r| fmt3(r.bias_agr)).collect(), diff),
                    ("pop-sum", rows.iter().map(|r| fmt3(r.bias_sum)).collect(), String::new()),
                ];
                if block.design.replications > 1 {
                    body.push(("se(pda)", block.mc_se.iter().map(|s| fmt3(s.pda)).collect(), String::new()));
                    body.push(("se(agr)", block.mc_se.iter().map(|s| fmt3(s.agr)).collect(), String::new()));
                    body.push(("se(sum)", block.mc_se.iter().map(|s| fmt3(s.sum)).collect(), String::new()));
                }
                for (label, values, diff) in body {
                    let _ = writeln!(out, "| | | {label} | {} | {diff} |", joined(values));
                }
                if block.resample_count > 0 {
                    let _ = writeln!(out, "\nresampled replications: {}\n", block.resample_count);
                }
            }
            out
        }
        OutputFormat::Csv => {
            let mut out = csv_header(config_toml);
            out.push_str("nss,sss,replications,criterion,estimator,estimate,bias,mc_se,seed\n");
            for block in &tables.blocks {
                out.push_str(&cell_csv_rows(block, None));
            }
            out
        }
    }
}

/// CSV rows of one cell; `validity` prepends a sweep column when given.
fn cell_csv_rows(cell: &CellResult, validity: Option<f64>) -> String {
    let mut out = String::new();
    let d = &cell.design;
    for (record, se) in cell.per_criterion.iter().zip(&cell.mc_se) {
        for (estimator, estimate, bias, mc_se) in [
            ("pda", record.pda, record.bias_pda, se.pda),
            ("agr", record.agr, record.bias_agr, se.agr),
            ("sum", record.sum, record.bias_sum, se.sum),
        ] {
            if let Some(v) = validity {
                let _ = write!(out, "{},", fmt_sig6(v));
            }
            let _ = writeln!(
                out,
                "{},{},{},{},{estimator},{},{},{},{}",
                d.nss,
                d.sss,
                d.replications,
                record.criterion + 1,
                fmt_sig6(estimate),
                fmt_sig6(bias),
                fmt_sig6(mc_se),
                d.master_seed
            );
        }
    }
    out
}

/// Validity sweep layout: one block of pda/agr/sum bias rows
/// per validity level, row means of bias magnitude, the pda-agr gap, and the
/// column means across everything.
pub fn render_sweep(config_toml: &str, sweep: &ValiditySweep, format: OutputFormat) -> String {
    match format {
        OutputFormat::Markdown => {
            let mut out = markdown_header("bias by population validity", config_toml);
            let shapes: Vec<String> = sweep
                .cell_shapes
                .iter()
                .map(|(nss, sss)| format!("{nss}x{sss}"))
                .collect();
            let _ = writeln!(out, "| validity | row | {} | rmns | diff |", shapes.join(" | "));
            let _ = writeln!(out, "|---:|:---|{}---:|---:|", "---:|".repeat(shapes.len()));
            for row in &sweep.rows {
                let lines: [(&str, Vec<String>, f64); 3] = [
                    ("pda", row.cells.iter().map(|c| fmt3(c.per_criterion[0].bias_pda)).collect(), row.mean_abs_bias.pda),
                    ("agr", row.cells.iter().map(|c| fmt3(c.per_criterion[0].bias_agr)).collect(), row.mean_abs_bias.agr),
                    ("sum", row.cells.iter().map(|c| fmt3(c.per_criterion[0].bias_sum)).collect(), row.mean_abs_bias.sum),
                ];
                for (idx, (label, values, mean)) in lines.into_iter().enumerate() {
                    let head = if idx == 0 {
                        fmt3(row.population_validity)
                    } else {
                        String::new()
                    };
                    let diff = if idx == 1 { fmt3(row.diff) } else { String::new() };
                    let _ = writeln!(
                        out,
                        "| {head} | {label} | {} | {} | {diff} |",
                        values.join(" | "),
                        fmt3(mean)
                    );
                }
            }
            let cols: Vec<String> = sweep.col_means.iter().map(|&m| fmt3(m)).collect();
            let _ = writeln!(
                out,
                "| cmns | | {} | {} | |",
                cols.join(" | "),
                fmt3(sweep.grand_mean)
            );
            out
        }
        OutputFormat::Csv => {
            let mut out = csv_header(config_toml);
            out.push_str(
                "validity,nss,sss,replications,criterion,estimator,estimate,bias,mc_se,seed\n",
            );
            for row in &sweep.rows {
                for cell in &row.cells {
                    out.push_str(&cell_csv_rows(cell, Some(row.population_validity)));
                }
            }
            out
        }
    }
}

/// Classification-rate report. A 1×1×1 grid renders as a detailed fourfold
/// table; larger grids render in the percent-point layout with one
/// (%C, G/L, HR) column triple per validity.
pub fn render_grid(config_toml: &str, grid: &ClassificationGrid, format: OutputFormat) -> String {
    match format {
        OutputFormat::Markdown => {
            if grid.cells.len() == 1 {
                return render_single_cell(config_toml, grid);
            }
            let mut out = markdown_header("classification rates", config_toml);
            let mut header = String::from("| b+ | q |");
            let mut rule = String::from("|---:|---:|");
            for v in &grid.validities {
                let _ = write!(header, " %C r={} | G/L | HR |", fmt3(*v));
                rule.push_str("---:|---:|---:|");
            }
            let _ = writeln!(out, "{header}");
            let _ = writeln!(out, "{rule}");
            for (bi, b) in grid.base_rates.iter().enumerate() {
                for (qi, q) in grid.quotas.iter().enumerate() {
                    let mut line = format!(
                        "| {} | {} |",
                        (100.0 * b).round() as i32,
                        (100.0 * q).round() as i32
                    );
                    for vi in 0..grid.validities.len() {
                        let cell = grid.cell(vi, bi, qi);
                        let _ = write!(
                            line,
                            " {} | {} | {} |",
                            cell.percent_correct, cell.gain_loss, cell.hit_rate_pct
                        );
                    }
                    let _ = writeln!(out, "{line}");
                }
            }
            out
        }
        OutputFormat::Csv => {
            let mut out = csv_header(config_toml);
            out.push_str(
                "validity,base_rate,quota,tp,fp,fn,tn,prc,gain,hit_rate,pct_correct,gain_loss,hit_rate_pct\n",
            );
            for cell in &grid.cells {
                let t = &cell.table;
                let r = &cell.report;
                let _ = writeln!(
                    out,
                    "{},{},{},{},{},{},{},{},{},{},{},{},{}",
                    fmt_sig6(cell.validity),
                    fmt_sig6(cell.base_rate),
                    fmt_sig6(cell.quota),
                    fmt_sig6(t.tp),
                    fmt_sig6(t.fp),
                    fmt_sig6(t.fn_),
                    fmt_sig6(t.tn),
                    fmt_sig6(r.prc),
                    fmt_sig6(r.gain),
                    fmt_sig6(r.hit_rate),
                    cell.percent_correct,
                    cell.gain_loss,
                    cell.hit_rate_pct
                );
            }
            out
        }
    }
}

fn render_single_cell(config_toml: &str, grid: &ClassificationGrid) -> String {
    let cell = &grid.cells[0];
    let t = &cell.table;
    let r = &cell.report;
    let mut out = markdown_header("classification report", config_toml);
    let _ = writeln!(
        out,
        "validity {}, base rate {}, quota {}\n",
        fmt3(cell.validity),
        fmt3(cell.base_rate),
        fmt3(cell.quota)
    );
    let _ = writeln!(out, "| | would fail | would succeed | sum |");
    let _ = writeln!(out, "|:---|---:|---:|---:|");
    let _ = writeln!(
        out,
        "| passes test | {} (fp) | {} (tp) | {} |",
        fmt3(t.fp),
        fmt3(t.tp),
        fmt3(t.quota())
    );
    let _ = writeln!(
        out,
        "| fails test | {} (tn) | {} (fn) | {} |",
        fmt3(t.tn),
        fmt3(t.fn_),
        fmt3(1.0 - t.quota())
    );
    let _ = writeln!(
        out,
        "| sum | {} | {} | 1.000 |\n",
        fmt3(t.negative_base_rate()),
        fmt3(t.positive_base_rate())
    );
    let _ = writeln!(
        out,
        "prc = {}, gain = {}, hit rate = {}",
        fmt3(r.prc),
        fmt3(r.gain),
        fmt3(r.hit_rate)
    );
    out
}

/// Weighted pooling of reported departmental statistics.
pub fn render_pool(
    config_toml: &str,
    departments: &[Department],
    pooled: f64,
    format: OutputFormat,
) -> String {
    let total_n: usize = departments.iter().map(|d| d.n).sum();
    match format {
        OutputFormat::Markdown => {
            let mut out = markdown_header("pooled department statistics", config_toml);
            let _ = writeln!(out, "| n | r |");
            let _ = writeln!(out, "|---:|---:|");
            for d in departments {
                let _ = writeln!(out, "| {} | {} |", d.n, fmt3(d.r));
            }
            let _ = writeln!(
                out,
                "\npooled multiple correlation: {} (exact {}, total n = {total_n})",
                fmt3(pooled),
                fmt_sig6(pooled)
            );
            out
        }
        OutputFormat::Csv => {
            let mut out = csv_header(config_toml);
            out.push_str("total_n,pooled_r\n");
            let _ = writeln!(out, "{total_n},{}", fmt_sig6(pooled));
            out
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn six_significant_digits() {
        assert_eq!(fmt_sig6(0.0), "0");
        assert_eq!(fmt_sig6(0.4586716417910448), "0.458672");
        assert_eq!(fmt_sig6(-0.068), "-0.0680000");
        assert_eq!(fmt_sig6(0.00012345678), "0.000123457");
        assert_eq!(fmt_sig6(12.3), "12.3000");
    }

    #[test]
    fn three_decimal_convention() {
        assert_eq!(fmt3(0.4586716), "0.459");
        assert_eq!(fmt3(-0.0684), "-0.068");
    }
}
