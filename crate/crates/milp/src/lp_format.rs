//! Writer for the LP text format read by most MIP solvers, for
//! cross-checking models outside this crate.

use std::fmt::Write;

use crate::model::ModelIR;

#[cfg(test)]
use crate::model::Sense;

fn sanitize(name: &str) -> String {
    let mut out: String = name
        .chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || "!\"#$%&()/,.;?@_`'{}|~".contains(c) {
                c
            } else {
                '_'
            }
        })
        .collect();
    if out.is_empty() || out.starts_with(|c: char| c.is_ascii_digit() || c == '.') {
        out.insert(0, '_');
    }
    out
}

fn term(out: &mut String, coeff: f64, name: &str, first: bool) {
    let sign = if coeff < 0.0 { "-" } else { "+" };
    if first && coeff >= 0.0 {
        let _ = write!(out, " {} {}", coeff, name);
    } else {
        let _ = write!(out, " {} {} {}", sign, coeff.abs(), name);
    }
}

pub fn write_lp(model: &ModelIR) -> String {
    let names: Vec<String> = model.vars.iter().map(|v| sanitize(&v.name)).collect();
    let mut out = String::new();
    let _ = writeln!(out, "\\ {}", model.name);
    if model.objective_offset != 0.0 {
        let _ = writeln!(out, "\\ objective offset {}", model.objective_offset);
    }
    out.push_str("Minimize\n obj:");
    let mut first = true;
    for (v, name) in model.vars.iter().zip(&names) {
        if v.objective != 0.0 {
            term(&mut out, v.objective, name, first);
            first = false;
        }
    }
    if first {
        out.push_str(" 0");
    }
    out.push_str("\nSubject To\n");
    for row in &model.rows {
        let _ = write!(out, " {}:", sanitize(&row.name));
        let mut first = true;
        for &(v, c) in &row.coeffs {
            term(&mut out, c, &names[v.0], first);
            first = false;
        }
        if first {
            out.push_str(" 0");
        }
        let _ = writeln!(out, " {} {}", row.sense.symbol(), row.rhs);
    }
    out.push_str("Bounds\n");
    for (v, name) in model.vars.iter().zip(&names) {
        if v.lower == v.upper {
            let _ = writeln!(out, " {} = {}", name, v.lower);
        } else {
            let _ = writeln!(out, " {} <= {} <= {}", v.lower, name, v.upper);
        }
    }
    let ints: Vec<&String> = model
        .vars
        .iter()
        .zip(&names)
        .filter(|(v, _)| v.integer)
        .map(|(_, n)| n)
        .collect();
    if !ints.is_empty() {
        out.push_str("General\n");
        for chunk in ints.chunks(8) {
            let line: Vec<&str> = chunk.iter().map(|s| s.as_str()).collect();
            let _ = writeln!(out, " {}", line.join(" "));
        }
    }
    out.push_str("End\n");
    out
}
