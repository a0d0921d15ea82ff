//! MPS export of the airtime/quality model, for cross-validation against
//! external MILP solvers.
//!
//! Layout: NAME, OBJSENSE (MIN), ROWS, COLUMNS with the level selectors
//! between INTORG/INTEND integrality markers, RHS, BOUNDS, ENDATA. Columns
//! are named `x_<user>_<slot>` and `q_<user>_<segment>_<level>`; rows
//! `c1_*`, `sel_*`, `c2_*`, `cap_*`, `pre_*` after their constraint family.

use super::model::{MilpModel, RowKind, VarKind};
use super::simplex::Rel;
use std::io::{self, Write};
use std::path::Path;

pub fn export_mps_file<P: AsRef<Path>>(model: &MilpModel, path: P) -> io::Result<()> {
    let file = std::fs::File::create(path)?;
    export_mps(model, io::BufWriter::new(file))
}

pub fn export_mps<W: Write>(model: &MilpModel, mut out: W) -> io::Result<()> {
    writeln!(out, "NAME          PGS")?;
    writeln!(out, "OBJSENSE")?;
    writeln!(out, "    MIN")?;

    writeln!(out, "ROWS")?;
    writeln!(out, " N  COST")?;
    let row_names: Vec<String> = model.rows.iter().map(|r| row_name(model, &r.kind)).collect();
    for (row, name) in model.rows.iter().zip(&row_names) {
        let tag = match row.rel {
            Rel::Le => 'L',
            Rel::Ge => 'G',
            Rel::Eq => 'E',
        };
        writeln!(out, " {tag}  {name}")?;
    }

    // transpose rows into per-column entry lists, keeping row order
    let mut by_col: Vec<Vec<(usize, f64)>> = vec![Vec::new(); model.n_vars()];
    for (r, row) in model.rows.iter().enumerate() {
        for &(col, coeff) in &row.coeffs {
            by_col[col].push((r, coeff));
        }
    }

    writeln!(out, "COLUMNS")?;
    let mut in_integer_block = false;
    let mut marker = 0usize;
    for (col, var) in model.vars.iter().enumerate() {
        if var.is_binary != in_integer_block {
            marker += 1;
            let kind = if var.is_binary { "'INTORG'" } else { "'INTEND'" };
            writeln!(out, "    MARK{marker:04}  'MARKER'                 {kind}")?;
            in_integer_block = var.is_binary;
        }
        let name = var_name(model, &var.kind);
        if model.objective[col] != 0.0 {
            writeln!(out, "    {:<10}{:<10}{}", name, "COST", num(model.objective[col]))?;
        }
        for &(r, coeff) in &by_col[col] {
            writeln!(out, "    {:<10}{:<10}{}", name, row_names[r], num(coeff))?;
        }
    }
    if in_integer_block {
        marker += 1;
        writeln!(out, "    MARK{marker:04}  'MARKER'                 'INTEND'")?;
    }

    writeln!(out, "RHS")?;
    for (row, name) in model.rows.iter().zip(&row_names) {
        if row.rhs != 0.0 {
            writeln!(out, "    {:<10}{:<10}{}", "RHS", name, num(row.rhs))?;
        }
    }

    writeln!(out, "BOUNDS")?;
    for var in &model.vars {
        let name = var_name(model, &var.kind);
        if var.is_binary {
            writeln!(out, " BV {:<10}{}", "BND", name)?;
        } else {
            writeln!(out, " UP {:<10}{:<10}{}", "BND", name, num(var.upper))?;
        }
    }
    writeln!(out, "ENDATA")?;
    out.flush()
}

fn var_name(model: &MilpModel, kind: &VarKind) -> String {
    match *kind {
        VarKind::Share { user, slot } => format!("x_{}_{}", model.user_ids[user], slot),
        VarKind::Level { user, segment, level } => {
            format!("q_{}_{}_{}", model.user_ids[user], segment + 1, level)
        }
    }
}

fn row_name(model: &MilpModel, kind: &RowKind) -> String {
    match *kind {
        RowKind::CumulativeDelivery { user, segment } => {
            format!("c1_{}_{}", model.user_ids[user], segment + 1)
        }
        RowKind::Selection { user, segment } => {
            format!("sel_{}_{}", model.user_ids[user], segment + 1)
        }
        RowKind::AverageQuality { user } => format!("c2_{}", model.user_ids[user]),
        RowKind::Capacity { bs, slot } => format!("cap_{}_{}", bs + 1, slot),
        RowKind::PrebufferCap { user, segment } => {
            format!("pre_{}_{}", model.user_ids[user], segment + 1)
        }
    }
}

fn num(v: f64) -> String {
    if v == v.round() && v.abs() < 1e12 {
        format!("{}", v as i64)
    } else {
        format!("{v:.10e}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pgs::build_model;
    use crate::pgs::test_support::single_bs_instance;
    use crate::streaming::QualityLadder;

    fn toy_mps() -> String {
        let instance = single_bs_instance(
            vec![vec![1e6; 20]],
            QualityLadder::new(vec![0.25e6, 0.5e6]).unwrap(),
            10.0,
            2.0,
            None,
        );
        let model = build_model(&instance).unwrap();
        let mut buf = Vec::new();
        export_mps(&model, &mut buf).unwrap();
        String::from_utf8(buf).unwrap()
    }

    #[test]
    fn sections_appear_once_in_order() {
        let text = toy_mps();
        let sections = ["NAME", "OBJSENSE", "ROWS", "COLUMNS", "RHS", "BOUNDS", "ENDATA"];
        let mut last = 0;
        for section in sections {
            let count = text
                .lines()
                .filter(|l| l.trim_start().starts_with(section) && !l.starts_with(' '))
                .count();
            assert_eq!(count, 1, "section {section} appears {count} times");
            let pos = text.find(section).unwrap();
            assert!(pos >= last, "section {section} out of order");
            last = pos;
        }
    }

    #[test]
    fn binaries_sit_between_integrality_markers() {
        let text = toy_mps();
        let intorg = text.find("'INTORG'").expect("INTORG present");
        let intend = text.find("'INTEND'").expect("INTEND present");
        assert!(intorg < intend);
        for (pos, line) in text.match_indices("q_1_") {
            if text[..pos].contains("BOUNDS") {
                continue; // bound entries come after the marker block
            }
            assert!(pos > intorg && pos < intend, "level column outside markers: {line}");
        }
        // share columns stay outside the integer block
        let first_x = text.find("x_1_1").unwrap();
        assert!(first_x < intorg);
    }

    #[test]
    fn row_and_bound_entries_cover_model() {
        let text = toy_mps();
        assert!(text.contains(" L  c1_1_1"));
        assert!(text.contains(" E  sel_1_2"));
        assert!(text.contains(" G  c2_1"));
        assert!(text.contains(" L  cap_1_20"));
        assert!(text.contains(" BV BND       q_1_1_1"));
        assert!(text.contains(" UP BND       x_1_1"));
        // selection rows carry unit rhs
        assert!(text.lines().any(|l| l.contains("RHS") && l.contains("sel_1_1")));
    }
}
