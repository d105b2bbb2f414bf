//! LP text emission and parsing, plus solution import.
//!
//! The format is the common LP file dialect: `Minimize`, `Subject To`,
//! `Bounds`, `Binaries`, `Generals`, `End`. Emission is deterministic, so
//! emit -> parse -> emit is byte-identical; that round trip is what external
//! solver workflows rely on. Solution files are plain `name value` lines.

use std::collections::BTreeMap;

use num_rational::Ratio;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::milp::{MilpModel, Sense, VarDomain};
use crate::rat::{format_decimal, parse_decimal, rat, Rat};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TextModel {
    pub objective: Vec<(String, Rat)>,
    pub constant: Rat,
    pub rows: Vec<TextRow>,
    pub bounds: Vec<(String, i64, i64)>,
    pub binaries: Vec<String>,
    pub generals: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TextRow {
    pub name: String,
    pub terms: Vec<(String, i64)>,
    pub sense: Sense,
    pub rhs: i64,
}

#[derive(Debug, Error)]
pub enum LpTextError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("unknown variable `{0}` in solution")]
    UnknownVariable(String),
    #[error("variable `{0}` assigned twice")]
    DuplicateAssignment(String),
    #[error("value {value} for `{name}` is not integral")]
    NonIntegralValue { name: String, value: f64 },
}

pub struct ImportedSolution {
    pub values: Vec<i64>,
    pub warnings: Vec<String>,
}

pub fn emit_model_text(model: &MilpModel) -> String {
    render_model(&text_model(model))
}

pub fn text_model(model: &MilpModel) -> TextModel {
    let mut objective = Vec::new();
    let mut bounds = Vec::new();
    let mut binaries = Vec::new();
    let mut generals = Vec::new();
    for var in &model.variables {
        let name = var.name.to_string();
        if !var.objective.is_zero() {
            objective.push((name.clone(), var.objective));
        }
        match var.domain {
            VarDomain::Binary => binaries.push(name),
            VarDomain::Integer { lb, ub } => {
                bounds.push((name.clone(), lb, ub));
                generals.push(name);
            }
            VarDomain::Continuous { lb, ub } => bounds.push((name, lb, ub)),
        }
    }
    let rows = model
        .constraints
        .iter()
        .map(|c| TextRow {
            name: c.name.clone(),
            terms: c
                .terms
                .iter()
                .map(|&(v, k)| (model.variable(v).name.to_string(), k))
                .collect(),
            sense: c.sense,
            rhs: c.rhs,
        })
        .collect();
    TextModel {
        objective,
        constant: model.objective_constant,
        rows,
        bounds,
        binaries,
        generals,
    }
}

fn push_linear(out: &mut String, terms: &[(String, Rat)], constant: &Rat) {
    let mut first = true;
    let mut push_one = |out: &mut String, coeff: &Rat, name: Option<&str>| {
        let negative = coeff.is_negative();
        let magnitude = if negative { -*coeff } else { *coeff };
        if first {
            if negative {
                out.push_str("- ");
            }
        } else if negative {
            out.push_str(" - ");
        } else {
            out.push_str(" + ");
        }
        match name {
            Some(n) => {
                if !magnitude.is_one() {
                    out.push_str(&format_decimal(&magnitude));
                    out.push(' ');
                }
                out.push_str(n);
            }
            None => out.push_str(&format_decimal(&magnitude)),
        }
        first = false;
    };
    for (name, coeff) in terms {
        push_one(out, coeff, Some(name));
    }
    if !constant.is_zero() {
        push_one(out, constant, None);
    }
    if first {
        out.push('0');
    }
}

pub fn render_model(text: &TextModel) -> String {
    let mut out = String::new();
    out.push_str("Minimize\n obj: ");
    push_linear(&mut out, &text.objective, &text.constant);
    out.push_str("\nSubject To\n");
    for row in &text.rows {
        out.push(' ');
        out.push_str(&row.name);
        out.push_str(": ");
        let terms: Vec<(String, Rat)> = row
            .terms
            .iter()
            .map(|(n, k)| (n.clone(), Ratio::from_integer(*k)))
            .collect();
        push_linear(&mut out, &terms, &rat(0));
        let sense = match row.sense {
            Sense::Le => "<=",
            Sense::Ge => ">=",
            Sense::Eq => "=",
        };
        out.push_str(&format!(" {} {}\n", sense, row.rhs));
    }
    if !text.bounds.is_empty() {
        out.push_str("Bounds\n");
        for (name, lb, ub) in &text.bounds {
            if lb == ub {
                out.push_str(&format!(" {name} = {lb}\n"));
            } else {
                out.push_str(&format!(" {lb} <= {name} <= {ub}\n"));
            }
        }
    }
    for (header, names) in [("Binaries", &text.binaries), ("Generals", &text.generals)] {
        if names.is_empty() {
            continue;
        }
        out.push_str(header);
        out.push('\n');
        for chunk in names.chunks(6) {
            out.push(' ');
            out.push_str(&chunk.join(" "));
            out.push('\n');
        }
    }
    out.push_str("End\n");
    out
}

fn looks_numeric(token: &str) -> bool {
    let mut chars = token.chars();
    match chars.next() {
        Some(c) if c.is_ascii_digit() || c == '.' => true,
        Some('+') | Some('-') => matches!(chars.next(), Some(c) if c.is_ascii_digit() || c == '.'),
        _ => false,
    }
}

fn parse_number(token: &str, line: usize) -> Result<Rat, LpTextError> {
    let (negative, body) = match token.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, token.strip_prefix('+').unwrap_or(token)),
    };
    let value = parse_decimal(body).map_err(|e| LpTextError::Syntax {
        line,
        message: format!("bad number `{token}`: {e}"),
    })?;
    Ok(if negative { -value } else { value })
}

/// Parses a `[sign] [coeff] name` token stream; numbers without a trailing
/// name accumulate into the returned constant.
fn parse_linear(tokens: &[&str], line: usize) -> Result<(Vec<(String, Rat)>, Rat), LpTextError> {
    let mut terms = Vec::new();
    let mut constant = rat(0);
    let mut sign = rat(1);
    let mut pending: Option<Rat> = None;
    for &token in tokens {
        match token {
            "+" | "-" => {
                if let Some(v) = pending.take() {
                    constant += v;
                }
                sign = if token == "-" { rat(-1) } else { rat(1) };
            }
            _ if looks_numeric(token) => {
                if let Some(v) = pending.take() {
                    constant += v;
                }
                pending = Some(sign * parse_number(token, line)?);
                sign = rat(1);
            }
            _ => {
                let coeff = pending.take().unwrap_or(sign);
                terms.push((token.to_string(), coeff));
                sign = rat(1);
            }
        }
    }
    if let Some(v) = pending {
        constant += v;
    }
    Ok((terms, constant))
}

fn integral(value: &Rat, line: usize, what: &str) -> Result<i64, LpTextError> {
    if value.denom() != &1 {
        return Err(LpTextError::Syntax {
            line,
            message: format!("{what} must be an integer, got {}", format_decimal(value)),
        });
    }
    Ok(*value.numer())
}

#[derive(PartialEq)]
enum Section {
    Preamble,
    Objective,
    Rows,
    Bounds,
    Binaries,
    Generals,
    Done,
}

pub fn parse_model_text(input: &str) -> Result<TextModel, LpTextError> {
    let mut text = TextModel {
        objective: Vec::new(),
        constant: rat(0),
        rows: Vec::new(),
        bounds: Vec::new(),
        binaries: Vec::new(),
        generals: Vec::new(),
    };
    let mut section = Section::Preamble;
    let mut objective_tokens: Vec<String> = Vec::new();
    // (name, tokens, line) of the row currently being accumulated
    let mut open_row: Option<(String, Vec<String>, usize)> = None;

    let finish_row = |text: &mut TextModel,
                          row: Option<(String, Vec<String>, usize)>|
     -> Result<(), LpTextError> {
        let Some((name, tokens, line)) = row else {
            return Ok(());
        };
        let refs: Vec<&str> = tokens.iter().map(String::as_str).collect();
        let sense_at = refs
            .iter()
            .position(|t| matches!(*t, "<=" | ">=" | "=" | "<" | ">"))
            .ok_or_else(|| LpTextError::Syntax {
                line,
                message: format!("constraint `{name}` has no relation"),
            })?;
        let sense = match refs[sense_at] {
            "<=" | "<" => Sense::Le,
            ">=" | ">" => Sense::Ge,
            _ => Sense::Eq,
        };
        let (terms, lhs_const) = parse_linear(&refs[..sense_at], line)?;
        let (rhs_terms, rhs_const) = parse_linear(&refs[sense_at + 1..], line)?;
        if !rhs_terms.is_empty() {
            return Err(LpTextError::Syntax {
                line,
                message: format!("constraint `{name}` has variables on the right-hand side"),
            });
        }
        let rhs = integral(&(rhs_const - lhs_const), line, "right-hand side")?;
        let terms = terms
            .into_iter()
            .map(|(n, c)| Ok((n, integral(&c, line, "row coefficient")?)))
            .collect::<Result<Vec<_>, LpTextError>>()?;
        text.rows.push(TextRow { name, terms, sense, rhs });
        Ok(())
    };

    for (idx, raw) in input.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('\\') {
            continue;
        }
        let keyword = line.to_ascii_lowercase();
        let new_section = match keyword.as_str() {
            "minimize" | "min" => Some(Section::Objective),
            "maximize" | "max" => {
                return Err(LpTextError::Syntax {
                    line: line_no,
                    message: "only minimization is supported".into(),
                })
            }
            "subject to" | "st" | "s.t." | "such that" => Some(Section::Rows),
            "bounds" => Some(Section::Bounds),
            "binaries" | "binary" | "bin" => Some(Section::Binaries),
            "generals" | "general" | "gen" => Some(Section::Generals),
            "end" => Some(Section::Done),
            _ => None,
        };
        if let Some(next) = new_section {
            if section == Section::Rows {
                finish_row(&mut text, open_row.take())?;
            }
            section = next;
            continue;
        }
        match section {
            Section::Preamble => {
                return Err(LpTextError::Syntax {
                    line: line_no,
                    message: "expected `Minimize`".into(),
                })
            }
            Section::Done => {
                return Err(LpTextError::Syntax {
                    line: line_no,
                    message: "content after `End`".into(),
                })
            }
            Section::Objective => {
                let body = match line.split_once(':') {
                    Some((_label, rest)) => rest,
                    None => line,
                };
                objective_tokens.extend(body.split_whitespace().map(str::to_string));
            }
            Section::Rows => match line.split_once(':') {
                Some((name, rest)) => {
                    finish_row(&mut text, open_row.take())?;
                    open_row = Some((
                        name.trim().to_string(),
                        rest.split_whitespace().map(str::to_string).collect(),
                        line_no,
                    ));
                }
                None => match open_row.as_mut() {
                    Some((_, tokens, _)) => {
                        tokens.extend(line.split_whitespace().map(str::to_string))
                    }
                    None => {
                        return Err(LpTextError::Syntax {
                            line: line_no,
                            message: "constraint continuation before any constraint".into(),
                        })
                    }
                },
            },
            Section::Bounds => {
                let tokens: Vec<&str> = line.split_whitespace().collect();
                let entry = match tokens.as_slice() {
                    [lb, "<=", name, "<=", ub] => {
                        let lb = integral(&parse_number(lb, line_no)?, line_no, "bound")?;
                        let ub = integral(&parse_number(ub, line_no)?, line_no, "bound")?;
                        (name.to_string(), lb, ub)
                    }
                    [name, "<=", ub] => {
                        let ub = integral(&parse_number(ub, line_no)?, line_no, "bound")?;
                        (name.to_string(), 0, ub)
                    }
                    [name, "=", v] => {
                        let v = integral(&parse_number(v, line_no)?, line_no, "bound")?;
                        (name.to_string(), v, v)
                    }
                    _ => {
                        return Err(LpTextError::Syntax {
                            line: line_no,
                            message: format!("unsupported bounds form `{line}`"),
                        })
                    }
                };
                text.bounds.push(entry);
            }
            Section::Binaries => text
                .binaries
                .extend(line.split_whitespace().map(str::to_string)),
            Section::Generals => text
                .generals
                .extend(line.split_whitespace().map(str::to_string)),
        }
    }
    if section == Section::Rows {
        finish_row(&mut text, open_row.take())?;
    }

    let refs: Vec<&str> = objective_tokens.iter().map(String::as_str).collect();
    let (objective, constant) = parse_linear(&refs, 0)?;
    text.objective = objective;
    text.constant = constant;
    Ok(text)
}

pub fn render_solution(model: &MilpModel, values: &[i64]) -> String {
    let mut out = String::new();
    for (var, value) in model.variables.iter().zip(values) {
        out.push_str(&format!("{} {}\n", var.name, value));
    }
    out
}

/// Reads `name value` lines. Unknown names are an error; variables absent
/// from the file default to zero with a warning.
pub fn import_solution(model: &MilpModel, input: &str) -> Result<ImportedSolution, LpTextError> {
    let index: BTreeMap<String, usize> = model
        .variables
        .iter()
        .enumerate()
        .map(|(i, v)| (v.name.to_string(), i))
        .collect();
    let mut values = vec![0i64; model.num_variables()];
    let mut seen = vec![false; model.num_variables()];
    for (idx, raw) in input.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') || line.starts_with('\\') {
            continue;
        }
        let tokens: Vec<&str> = line.split_whitespace().collect();
        let [name, value] = tokens.as_slice() else {
            return Err(LpTextError::Syntax {
                line: line_no,
                message: format!("expected `name value`, got `{line}`"),
            });
        };
        let &slot = index
            .get(*name)
            .ok_or_else(|| LpTextError::UnknownVariable(name.to_string()))?;
        if seen[slot] {
            return Err(LpTextError::DuplicateAssignment(name.to_string()));
        }
        let parsed: f64 = value.parse().map_err(|_| LpTextError::Syntax {
            line: line_no,
            message: format!("bad value `{value}`"),
        })?;
        if (parsed - parsed.round()).abs() > 1e-4 {
            return Err(LpTextError::NonIntegralValue {
                name: name.to_string(),
                value: parsed,
            });
        }
        values[slot] = parsed.round() as i64;
        seen[slot] = true;
    }
    let missing = seen.iter().filter(|s| !**s).count();
    let mut warnings = Vec::new();
    if missing > 0 {
        warnings.push(format!(
            "{missing} of {} variables missing from the solution file, assumed 0",
            model.num_variables()
        ));
    }
    Ok(ImportedSolution { values, warnings })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{SectionKey, TrainKey};
    use crate::milp::{ConstraintTag, VarDomain, VarName};

    fn sample_model() -> MilpModel {
        let mut model = MilpModel::new();
        model.objective_constant = Ratio::new(7, 2);
        let key = TrainKey {
            scenario: "s0".into(),
            train: "k1".into(),
        };
        let p0 = model.add_variable(
            VarName::PathChoice { train: key.clone(), ordinal: 0 },
            VarDomain::Binary,
            rat(0),
        );
        let p1 = model.add_variable(
            VarName::PathChoice { train: key.clone(), ordinal: 1 },
            VarDomain::Binary,
            rat(0),
        );
        let y = model.add_variable(
            VarName::Track { section: SectionKey::new("A".into(), "B".into()), track: 1 },
            VarDomain::Binary,
            Ratio::new(401, 4),
        );
        let u = model.add_variable(
            VarName::TimeReduction { from: "A".into(), to: "B".into() },
            VarDomain::Integer { lb: 0, ub: 3 },
            rat(-2),
        );
        let d = model.add_variable(
            VarName::Departure { train: key, from: "A".into(), to: "B".into(), track: 1 },
            VarDomain::Continuous { lb: 0, ub: 60 },
            rat(0),
        );
        model.add_row(
            ConstraintTag::PathChoice,
            vec![(p0, 1), (p1, 1)],
            Sense::Eq,
            1,
        );
        model.add_row(
            ConstraintTag::TravelLo,
            vec![(d, 1), (u, 1), (y, -65)],
            Sense::Ge,
            -55,
        );
        model
    }

    #[test]
    fn emit_parse_emit_is_identity() {
        let model = sample_model();
        let first = emit_model_text(&model);
        let parsed = parse_model_text(&first).unwrap();
        assert_eq!(render_model(&parsed), first);
        assert_eq!(parsed, text_model(&model));
    }

    #[test]
    fn objective_keeps_exact_decimals() {
        let model = sample_model();
        let parsed = parse_model_text(&emit_model_text(&model)).unwrap();
        assert_eq!(parsed.constant, Ratio::new(7, 2));
        let y_coeff = parsed
            .objective
            .iter()
            .find(|(n, _)| n == "y(A,B,1)")
            .map(|(_, c)| *c);
        assert_eq!(y_coeff, Some(Ratio::new(401, 4)));
    }

    #[test]
    fn parses_wrapped_rows_and_folds_lhs_constants() {
        let text = "\\ hand-written\nMinimize\n obj: 2 x + 3.5 y\nSubject To\n c1: x + 2\n  + y <= 5\nBounds\n 0 <= x <= 4\nGenerals\n x\nEnd\n";
        let parsed = parse_model_text(text).unwrap();
        assert_eq!(parsed.rows.len(), 1);
        let row = &parsed.rows[0];
        assert_eq!(row.terms, vec![("x".to_string(), 1), ("y".to_string(), 1)]);
        assert_eq!(row.sense, Sense::Le);
        assert_eq!(row.rhs, 3);
        assert_eq!(parsed.objective[1], ("y".to_string(), Ratio::new(7, 2)));
    }

    #[test]
    fn rejects_maximize_and_fractional_row_coefficients() {
        assert!(parse_model_text("Maximize\n obj: x\nEnd\n").is_err());
        let fractional = "Minimize\n obj: x\nSubject To\n c: 0.5 x <= 1\nEnd\n";
        assert!(parse_model_text(fractional).is_err());
    }

    #[test]
    fn solution_round_trip_and_errors() {
        let model = sample_model();
        let values = vec![1, 0, 1, 2, 14];
        let text = render_solution(&model, &values);
        let imported = import_solution(&model, &text).unwrap();
        assert_eq!(imported.values, values);
        assert!(imported.warnings.is_empty());

        let partial = "# comment\np(s0.k1,0) 1\nu(A,B) 1.99999\n";
        let imported = import_solution(&model, partial).unwrap();
        assert_eq!(imported.values[0], 1);
        assert_eq!(imported.values[3], 2);
        assert_eq!(imported.warnings.len(), 1);

        assert!(matches!(
            import_solution(&model, "ghost 1\n"),
            Err(LpTextError::UnknownVariable(_))
        ));
        assert!(matches!(
            import_solution(&model, "u(A,B) 0.5\n"),
            Err(LpTextError::NonIntegralValue { .. })
        ));
        assert!(matches!(
            import_solution(&model, "u(A,B) 1\nu(A,B) 1\n"),
            Err(LpTextError::DuplicateAssignment(_))
        ));
    }
}
