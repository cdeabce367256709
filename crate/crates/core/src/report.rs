//! Text, CSV and JSON renderings of tables and curves.

use serde_json::{json, Value};

use crate::classifier::{Classification, ClassificationTable};
use crate::numeric::DoseResponseCurve;

pub const SCHEMA_VERSION: u32 = 1;

fn cell_label(c: &Classification) -> String {
    match (&c.limit, c.kind.short()) {
        (Some(l), k) if k == "ACR" || k == "aACR" => format!("{k}({l})"),
        (_, k) => k.to_string(),
    }
}

/// Aligned table with inputs as rows and outputs as columns.
pub fn table_text(table: &ClassificationTable) -> String {
    let labels: Vec<Vec<String>> = table.cells.iter().map(|r| r.iter().map(cell_label).collect()).collect();
    let first = table.species.iter().map(|s| s.len() + 3).max().unwrap_or(0).max(5);
    let widths: Vec<usize> = (0..table.species.len())
        .map(|j| labels.iter().map(|r| r[j].len()).chain([table.species[j].len()]).max().unwrap_or(0) + 2)
        .collect();
    let mut out = format!("{:<first$}", "input");
    for (name, w) in table.species.iter().zip(&widths) {
        out.push_str(&format!("{name:>w$}"));
    }
    out.push('\n');
    for (i, row) in labels.iter().enumerate() {
        out.push_str(&format!("{:<first$}", format!("{}(0)", table.species[i])));
        for (label, w) in row.iter().zip(&widths) {
            out.push_str(&format!("{label:>w$}"));
        }
        out.push('\n');
    }
    out
}

fn csv_string(rows: Vec<Vec<String>>) -> String {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    for r in rows {
        w.write_record(&r).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 input")
}

pub fn table_csv(table: &ClassificationTable) -> String {
    let mut rows = vec![["input", "output", "kind", "limit", "provenance", "notes"].map(String::from).to_vec()];
    for (i, row) in table.cells.iter().enumerate() {
        for (j, c) in row.iter().enumerate() {
            rows.push(vec![
                table.species[i].clone(),
                table.species[j].clone(),
                c.kind.label().to_string(),
                c.limit.as_ref().map(ToString::to_string).unwrap_or_default(),
                format!("{:?}", c.provenance),
                c.notes.join("; "),
            ]);
        }
    }
    csv_string(rows)
}

pub fn table_json(table: &ClassificationTable) -> Value {
    let cells: Vec<Value> = table
        .cells
        .iter()
        .enumerate()
        .flat_map(|(i, row)| {
            row.iter().enumerate().map(move |(j, c)| {
                json!({
                    "input": table.species[i],
                    "output": table.species[j],
                    "kind": c.kind,
                    "limit": c.limit,
                    "provenance": c.provenance,
                    "notes": c.notes,
                })
            })
        })
        .collect();
    json!({
        "schema_version": SCHEMA_VERSION,
        "species": table.species,
        "base_x0": table.base_x0,
        "rate_constants": table.rate_constants,
        "cells": cells,
    })
}

fn float(v: f64) -> String {
    format!("{v:e}")
}

pub fn curve_csv(curve: &DoseResponseCurve) -> String {
    let mut rows = vec![["lambda", "value", "residual", "converged"].map(String::from).to_vec()];
    for k in 0..curve.lambdas.len() {
        rows.push(vec![
            float(curve.lambdas[k]),
            float(curve.values[k]),
            float(curve.residuals[k]),
            curve.converged[k].to_string(),
        ]);
    }
    csv_string(rows)
}

pub fn curve_json(curve: &DoseResponseCurve, species: &[String]) -> Value {
    json!({
        "schema_version": SCHEMA_VERSION,
        "input": species[curve.input_index],
        "output": species[curve.output_index],
        "base_x0": curve.base_x0,
        "points": (0..curve.lambdas.len()).map(|k| json!({
            "lambda": curve.lambdas[k],
            "value": curve.values[k],
            "residual": curve.residuals[k],
            "converged": curve.converged[k],
        })).collect::<Vec<_>>(),
    })
}

/// Converged points with the classification as comment lines.
pub fn plot_csv(curve: &DoseResponseCurve, classification: Option<&Classification>) -> String {
    let mut out = format!("# schema_version={SCHEMA_VERSION}\n");
    if let Some(c) = classification {
        if let Some(l) = &c.limit {
            out.push_str(&format!("# limit={l}\n"));
        }
        out.push_str(&format!("# kind={}\n", c.kind.label()));
    }
    let mut points = curve.converged_points();
    points.sort_by(|a, b| a.0.total_cmp(&b.0));
    let rows = std::iter::once(vec!["lambda".to_string(), "value".to_string()])
        .chain(points.iter().map(|&(l, v)| vec![float(l), float(v)]))
        .collect();
    out.push_str(&csv_string(rows));
    out
}
