//! MPS reader and writer.
//!
//! The reader accepts free-form files (whitespace separated fields), which
//! also covers fixed-form files whose names contain no blanks. The writer emits
//! fixed-form column layout with one coefficient per line, every bound spelled
//! out where it differs from the reader's default, and numbers in shortest
//! round-trip notation. Implicit-integer columns are written as integers and
//! tagged with a `* implicit-integer <name>` comment, which other readers skip.

use std::collections::{HashMap, HashSet};
use std::fmt::Write as _;

use thiserror::Error;

use super::model::{MilpInstance, Sense, VarKind};
use super::validate::{validate, ValidationReport};
use crate::scalar::{format_shortest, Scalar};

const IMPLICIT_TAG: &str = "* implicit-integer ";
const INFINITY_THRESHOLD: f64 = 1e30;

#[derive(Debug, Error)]
pub enum MpsError {
    #[error("line {line}: {msg}")]
    Malformed { line: usize, msg: String },
    #[error("line {line}: unknown row {name:?}")]
    UnknownRow { line: usize, name: String },
    #[error("line {line}: unknown column {name:?}")]
    UnknownColumn { line: usize, name: String },
    #[error("line {line}: duplicate entry for column {col:?} in row {row:?}")]
    DuplicateEntry { line: usize, row: String, col: String },
    #[error("input is not valid UTF-8")]
    Encoding,
    #[error("instance is not writable:\n{0}")]
    Invalid(ValidationReport),
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
enum Section {
    None,
    Rows,
    Columns,
    Rhs,
    Ranges,
    Bounds,
    ObjSense,
    End,
}

struct ColState {
    touched_lower: bool,
    touched_upper: bool,
    in_marker: bool,
}

fn malformed(line: usize, msg: impl Into<String>) -> MpsError {
    MpsError::Malformed { line, msg: msg.into() }
}

fn number<T: Scalar>(tok: &str, line: usize) -> Result<T, MpsError> {
    tok.parse::<T>()
        .map_err(|_| malformed(line, format!("cannot parse number {tok:?}")))
}

fn bound_value<T: Scalar>(tok: &str, line: usize) -> Result<T, MpsError> {
    let v: T = number(tok, line)?;
    let big = T::from_f64_lossy(INFINITY_THRESHOLD);
    Ok(if v >= big {
        T::infinity()
    } else if v <= -big {
        T::neg_infinity()
    } else {
        v
    })
}

/// Parses an MPS document. Objective rows beyond the first `N` row are
/// dropped, a `MAX` objective sense is converted to minimization by negating
/// the objective, and ranged rows are split into a `G` row plus an `L` row.
pub fn parse_mps<T: Scalar>(input: &[u8]) -> Result<MilpInstance<T>, MpsError> {
    let text = std::str::from_utf8(input).map_err(|_| MpsError::Encoding)?;
    let mut inst = MilpInstance::<T>::new("");
    let mut section = Section::None;
    let mut objective_row: Option<String> = None;
    let mut free_rows: HashSet<String> = HashSet::new();
    let mut row_index: HashMap<String, usize> = HashMap::new();
    let mut col_index: HashMap<String, usize> = HashMap::new();
    let mut col_state: Vec<ColState> = Vec::new();
    let mut seen_entries: HashSet<(usize, usize)> = HashSet::new();
    let mut seen_objective: HashSet<usize> = HashSet::new();
    let mut ranges: Vec<(usize, T, usize)> = Vec::new();
    let mut implicit: Vec<String> = Vec::new();
    let mut in_marker = false;
    let mut maximize = false;

    for (lineno, raw) in text.lines().enumerate() {
        let line_no = lineno + 1;
        let line = raw.trim_end_matches('\r');
        if let Some(rest) = line.strip_prefix(IMPLICIT_TAG) {
            implicit.push(rest.trim().to_string());
            continue;
        }
        if line.trim().is_empty() || line.starts_with('*') {
            continue;
        }
        let tokens: Vec<&str> = line.split_whitespace().collect();
        let is_header = !line.starts_with(char::is_whitespace);

        if is_header {
            let head = tokens[0].to_ascii_uppercase();
            section = match head.as_str() {
                "NAME" => {
                    inst.name = line[4..].trim().to_string();
                    Section::None
                }
                "ROWS" => Section::Rows,
                "COLUMNS" => Section::Columns,
                "RHS" => Section::Rhs,
                "RANGES" => Section::Ranges,
                "BOUNDS" => Section::Bounds,
                "ENDATA" => Section::End,
                "OBJSENSE" => {
                    if let Some(s) = tokens.get(1) {
                        maximize = parse_objsense(s, line_no)?;
                        Section::None
                    } else {
                        Section::ObjSense
                    }
                }
                other => return Err(malformed(line_no, format!("unknown section {other:?}"))),
            };
            if section == Section::End {
                break;
            }
            continue;
        }

        match section {
            Section::None | Section::End => {
                return Err(malformed(line_no, "data line outside of any section"));
            }
            Section::ObjSense => {
                maximize = parse_objsense(tokens[0], line_no)?;
                section = Section::None;
            }
            Section::Rows => {
                if tokens.len() != 2 {
                    return Err(malformed(line_no, "ROWS line needs a type and a name"));
                }
                let name = tokens[1].to_string();
                if row_index.contains_key(&name)
                    || objective_row.as_deref() == Some(&name)
                    || free_rows.contains(&name)
                {
                    return Err(malformed(line_no, format!("row {name:?} declared twice")));
                }
                let sense = match tokens[0].to_ascii_uppercase().as_str() {
                    "N" => {
                        if objective_row.is_none() {
                            objective_row = Some(name);
                        } else {
                            free_rows.insert(name);
                        }
                        continue;
                    }
                    "L" => Sense::Le,
                    "G" => Sense::Ge,
                    "E" => Sense::Eq,
                    t => return Err(malformed(line_no, format!("unknown row type {t:?}"))),
                };
                let idx = inst.add_row(name.clone(), sense, T::zero(), &[]);
                row_index.insert(name, idx);
            }
            Section::Columns => {
                if tokens.len() >= 3 && tokens[1] == "'MARKER'" {
                    match tokens[2] {
                        "'INTORG'" => in_marker = true,
                        "'INTEND'" => in_marker = false,
                        t => return Err(malformed(line_no, format!("unknown marker {t}"))),
                    }
                    continue;
                }
                if tokens.len() != 3 && tokens.len() != 5 {
                    return Err(malformed(line_no, "COLUMNS line needs 3 or 5 fields"));
                }
                let cname = tokens[0];
                let col = match col_index.get(cname) {
                    Some(&c) => c,
                    None => {
                        let kind = if in_marker { VarKind::Integer } else { VarKind::Continuous };
                        let c = inst.add_col(cname, T::zero(), kind, T::zero(), T::infinity());
                        col_index.insert(cname.to_string(), c);
                        col_state.push(ColState {
                            touched_lower: false,
                            touched_upper: false,
                            in_marker,
                        });
                        c
                    }
                };
                for pair in tokens[1..].chunks(2) {
                    let (rname, val) = (pair[0], number::<T>(pair[1], line_no)?);
                    if objective_row.as_deref() == Some(rname) {
                        if !seen_objective.insert(col) {
                            return Err(MpsError::DuplicateEntry {
                                line: line_no,
                                row: rname.into(),
                                col: cname.into(),
                            });
                        }
                        inst.objective[col] = val;
                    } else if free_rows.contains(rname) {
                        continue;
                    } else {
                        let row = *row_index.get(rname).ok_or_else(|| MpsError::UnknownRow {
                            line: line_no,
                            name: rname.into(),
                        })?;
                        if !seen_entries.insert((row, col)) {
                            return Err(MpsError::DuplicateEntry {
                                line: line_no,
                                row: rname.into(),
                                col: cname.into(),
                            });
                        }
                        inst.ccm.push(row, col, val);
                    }
                }
            }
            Section::Rhs | Section::Ranges => {
                let pairs = if tokens.len() % 2 == 1 { &tokens[1..] } else { &tokens[..] };
                if pairs.is_empty() || pairs.len() > 4 {
                    return Err(malformed(line_no, "expected one or two (row, value) pairs"));
                }
                for pair in pairs.chunks(2) {
                    let (rname, val) = (pair[0], number::<T>(pair[1], line_no)?);
                    if objective_row.as_deref() == Some(rname) || free_rows.contains(rname) {
                        continue;
                    }
                    let row = *row_index.get(rname).ok_or_else(|| MpsError::UnknownRow {
                        line: line_no,
                        name: rname.into(),
                    })?;
                    if section == Section::Rhs {
                        inst.rhs[row] = val;
                    } else {
                        ranges.push((row, val, line_no));
                    }
                }
            }
            Section::Bounds => {
                let btype = tokens[0].to_ascii_uppercase();
                let valued = matches!(btype.as_str(), "UP" | "LO" | "FX" | "LI" | "UI");
                let (cname, value) = match (valued, tokens.len()) {
                    (true, 4) => (tokens[2], Some(tokens[3])),
                    (true, 3) => (tokens[1], Some(tokens[2])),
                    (false, 2) => (tokens[1], None),
                    (false, 3) if btype == "BV" && col_index.contains_key(tokens[1]) => {
                        (tokens[1], Some(tokens[2]))
                    }
                    (false, 3) => (tokens[2], None),
                    (false, 4) => (tokens[2], Some(tokens[3])),
                    _ => return Err(malformed(line_no, "wrong number of BOUNDS fields")),
                };
                let col = *col_index.get(cname).ok_or_else(|| MpsError::UnknownColumn {
                    line: line_no,
                    name: cname.into(),
                })?;
                let val = || -> Result<T, MpsError> {
                    bound_value(value.unwrap_or("0"), line_no)
                };
                let st = &mut col_state[col];
                match btype.as_str() {
                    "UP" | "UI" => {
                        let v = val()?;
                        if v < T::zero() && !st.touched_lower && inst.lower[col] == T::zero() {
                            inst.lower[col] = T::neg_infinity();
                        }
                        inst.upper[col] = v;
                        st.touched_upper = true;
                    }
                    "LO" | "LI" => {
                        inst.lower[col] = val()?;
                        st.touched_lower = true;
                    }
                    "FX" => {
                        let v = val()?;
                        inst.lower[col] = v;
                        inst.upper[col] = v;
                        st.touched_lower = true;
                        st.touched_upper = true;
                    }
                    "FR" => {
                        inst.lower[col] = T::neg_infinity();
                        inst.upper[col] = T::infinity();
                        st.touched_lower = true;
                        st.touched_upper = true;
                    }
                    "MI" => {
                        inst.lower[col] = T::neg_infinity();
                        st.touched_lower = true;
                    }
                    "PL" => {
                        inst.upper[col] = T::infinity();
                        st.touched_upper = true;
                    }
                    "BV" => {
                        inst.kinds[col] = VarKind::Binary;
                        inst.lower[col] = T::zero();
                        inst.upper[col] = T::one();
                        st.touched_lower = true;
                        st.touched_upper = true;
                    }
                    t => return Err(malformed(line_no, format!("unsupported bound type {t:?}"))),
                }
                if matches!(btype.as_str(), "LI" | "UI") && inst.kinds[col] == VarKind::Continuous {
                    inst.kinds[col] = VarKind::Integer;
                }
            }
        }
    }

    // Marker integers that no BOUNDS line touched default to [0, 1]; once a
    // bound is given, the unspecified side keeps the continuous default.
    for (col, st) in col_state.iter().enumerate() {
        if st.in_marker && !st.touched_lower && !st.touched_upper {
            inst.upper[col] = T::one();
        }
    }
    for name in implicit {
        if let Some(&c) = col_index.get(&name) {
            if inst.kinds[c] == VarKind::Integer {
                inst.kinds[c] = VarKind::ImplicitInteger;
            }
        }
    }
    if maximize {
        for c in &mut inst.objective {
            *c = -*c;
        }
    }
    expand_ranges(&mut inst, &ranges)?;
    Ok(inst)
}

fn parse_objsense(tok: &str, line: usize) -> Result<bool, MpsError> {
    match tok.to_ascii_uppercase().as_str() {
        "MIN" | "MINIMIZE" => Ok(false),
        "MAX" | "MAXIMIZE" => Ok(true),
        t => Err(malformed(line, format!("unknown objective sense {t:?}"))),
    }
}

fn expand_ranges<T: Scalar>(
    inst: &mut MilpInstance<T>,
    ranges: &[(usize, T, usize)],
) -> Result<(), MpsError> {
    let mut names: HashSet<String> = inst.row_names.iter().cloned().collect();
    let row_lists = inst.ccm.row_lists();
    let mut done = HashSet::new();
    for &(row, r, line) in ranges {
        if !done.insert(row) {
            return Err(malformed(line, format!("row {:?} ranged twice", inst.row_names[row])));
        }
        let b = inst.rhs[row];
        let (lo, hi) = match inst.senses[row] {
            Sense::Le => (b - r.abs(), b),
            Sense::Ge => (b, b + r.abs()),
            Sense::Eq if r > T::zero() => (b, b + r),
            Sense::Eq if r < T::zero() => (b + r, b),
            Sense::Eq => continue,
        };
        inst.senses[row] = Sense::Ge;
        inst.rhs[row] = lo;
        let base = format!("{}_rng", inst.row_names[row]);
        let mut name = base.clone();
        let mut k = 0;
        while names.contains(&name) {
            k += 1;
            name = format!("{base}{k}");
        }
        names.insert(name.clone());
        inst.add_row(name, Sense::Le, hi, &row_lists[row]);
    }
    Ok(())
}

fn push_line(out: &mut String, f1: &str, f2: &str, f3: &str, f4: &str) {
    let mut s = String::with_capacity(64);
    let _ = write!(s, " {f1:<2} {f2:<8}  {f3:<8}  {f4}");
    out.push_str(s.trim_end());
    out.push('\n');
}

fn bits_eq<T: Scalar>(a: T, b: T) -> bool {
    a.bits() == b.bits()
}

/// Serializes a valid instance. Identical instances yield identical bytes.
pub fn write_mps<T: Scalar>(inst: &MilpInstance<T>) -> Result<Vec<u8>, MpsError> {
    let report = validate(inst);
    if !report.is_writable() {
        return Err(MpsError::Invalid(report));
    }
    let row_names: HashSet<&str> = inst.row_names.iter().map(String::as_str).collect();
    let mut obj_name = "OBJ".to_string();
    let mut k = 0;
    while row_names.contains(obj_name.as_str()) {
        obj_name = format!("OBJ_{k}");
        k += 1;
    }

    let mut out = String::new();
    if inst.name.is_empty() {
        out.push_str("NAME\n");
    } else {
        let _ = writeln!(out, "NAME          {}", inst.name);
    }
    for (j, kind) in inst.kinds.iter().enumerate() {
        if *kind == VarKind::ImplicitInteger {
            let _ = writeln!(out, "{IMPLICIT_TAG}{}", inst.col_names[j]);
        }
    }
    out.push_str("ROWS\n");
    push_line(&mut out, "N", &obj_name, "", "");
    for (name, sense) in inst.row_names.iter().zip(&inst.senses) {
        push_line(&mut out, sense.mps_code(), name, "", "");
    }

    out.push_str("COLUMNS\n");
    let cols = inst.ccm.col_lists_with_zeros();
    let mut in_marker = false;
    for j in 0..inst.num_cols() {
        let integral = inst.kinds[j].is_integral();
        if integral != in_marker {
            let tag = if integral { "'INTORG'" } else { "'INTEND'" };
            push_line(&mut out, "", "MARKER", "'MARKER'", tag);
            in_marker = integral;
        }
        let name = &inst.col_names[j];
        let c = inst.objective[j];
        if !bits_eq(c, T::zero()) || cols[j].is_empty() {
            push_line(&mut out, "", name, &obj_name, &format_shortest(c));
        }
        for &(row, v) in &cols[j] {
            push_line(&mut out, "", name, &inst.row_names[row], &format_shortest(v));
        }
    }
    if in_marker {
        push_line(&mut out, "", "MARKER", "'MARKER'", "'INTEND'");
    }

    out.push_str("RHS\n");
    for (name, b) in inst.row_names.iter().zip(&inst.rhs) {
        if !bits_eq(*b, T::zero()) {
            push_line(&mut out, "", "RHS", name, &format_shortest(*b));
        }
    }

    out.push_str("BOUNDS\n");
    for j in 0..inst.num_cols() {
        let (l, u) = (inst.lower[j], inst.upper[j]);
        let name = &inst.col_names[j];
        match inst.kinds[j] {
            VarKind::Continuous => {
                if bits_eq(l, T::zero()) && u == T::infinity() {
                    continue;
                }
            }
            VarKind::Binary => {
                push_line(&mut out, "BV", "BND", name, "");
                if bits_eq(l, T::zero()) && bits_eq(u, T::one()) {
                    continue;
                }
            }
            VarKind::Integer | VarKind::ImplicitInteger => {}
        }
        if bits_eq(l, u) && l.is_finite() {
            push_line(&mut out, "FX", "BND", name, &format_shortest(l));
        } else if l == T::neg_infinity() && u == T::infinity() {
            push_line(&mut out, "FR", "BND", name, "");
        } else {
            if l == T::neg_infinity() {
                push_line(&mut out, "MI", "BND", name, "");
            } else {
                push_line(&mut out, "LO", "BND", name, &format_shortest(l));
            }
            if u == T::infinity() {
                push_line(&mut out, "PL", "BND", name, "");
            } else {
                push_line(&mut out, "UP", "BND", name, &format_shortest(u));
            }
        }
    }
    out.push_str("ENDATA\n");
    Ok(out.into_bytes())
}

impl<T: Scalar> super::model::CooMatrix<T> {
    /// Like `col_lists` but keeps explicitly stored zeros.
    pub(crate) fn col_lists_with_zeros(&self) -> Vec<Vec<(usize, T)>> {
        let mut cols = vec![Vec::new(); self.ncols];
        for e in &self.entries {
            cols[e.col].push((e.row, e.value));
        }
        for c in &mut cols {
            c.sort_by_key(|&(r, _)| r);
        }
        cols
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "NAME          tiny
ROWS
 N  obj
 L  c1
COLUMNS
    x         obj       1   c1        1
RHS
    rhs       c1        1
ENDATA
";

    #[test]
    fn minimal_file() {
        let inst: MilpInstance<f64> = parse_mps(MINIMAL.as_bytes()).unwrap();
        let s = inst.basic_stats();
        assert_eq!((s.m, s.n, s.nnz), (1, 1, 1));
        assert_eq!(inst.name, "tiny");
        assert_eq!(inst.objective, vec![1.0]);
        assert_eq!(inst.rhs, vec![1.0]);
        assert_eq!((inst.lower[0], inst.upper[0]), (0.0, f64::INFINITY));
        assert_eq!(inst.kinds[0], VarKind::Continuous);
    }

    #[test]
    fn marker_integers_default_to_binary_range() {
        let text = "NAME t
ROWS
 N obj
 G r
COLUMNS
 MARKER 'MARKER' 'INTORG'
 x obj -1 r 2
 y r 1
 MARKER 'MARKER' 'INTEND'
 z r 1
BOUNDS
 UP BND y 7
ENDATA
";
        let inst: MilpInstance<f64> = parse_mps(text.as_bytes()).unwrap();
        assert_eq!(inst.kinds, vec![VarKind::Integer, VarKind::Integer, VarKind::Continuous]);
        assert_eq!(inst.upper, vec![1.0, 7.0, f64::INFINITY]);
        assert_eq!(inst.senses, vec![Sense::Ge]);
    }

    #[test]
    fn errors_carry_line_numbers() {
        let dup = "NAME t\nROWS\n N obj\n L r\nCOLUMNS\n x r 1\n x r 2\nENDATA\n";
        match parse_mps::<f64>(dup.as_bytes()) {
            Err(MpsError::DuplicateEntry { line, .. }) => assert_eq!(line, 7),
            other => panic!("{other:?}"),
        }
        let unknown = "NAME t\nROWS\n N obj\nCOLUMNS\n x q 1\nENDATA\n";
        assert!(matches!(
            parse_mps::<f64>(unknown.as_bytes()),
            Err(MpsError::UnknownRow { line: 5, .. })
        ));
        let bad = "NAME t\nROWS\n N obj\nFOO\n";
        assert!(matches!(parse_mps::<f64>(bad.as_bytes()), Err(MpsError::Malformed { line: 4, .. })));
        let badnum = "NAME t\nROWS\n N obj\n L r\nCOLUMNS\n x r abc\nENDATA\n";
        assert!(matches!(parse_mps::<f64>(badnum.as_bytes()), Err(MpsError::Malformed { line: 6, .. })));
        let badbound = "NAME t\nROWS\n N obj\n L r\nCOLUMNS\n x r 1\nBOUNDS\n UP BND y 1\nENDATA\n";
        assert!(matches!(
            parse_mps::<f64>(badbound.as_bytes()),
            Err(MpsError::UnknownColumn { line: 8, .. })
        ));
    }

    #[test]
    fn ranges_split_into_two_rows() {
        let text = "NAME t
ROWS
 N obj
 E r
 L s
COLUMNS
 x r 1 s 2
RHS
 RHS r 4 s 10
RANGES
 RNG r -3 s 4
ENDATA
";
        let inst: MilpInstance<f64> = parse_mps(text.as_bytes()).unwrap();
        assert_eq!(inst.num_rows(), 4);
        assert_eq!(inst.senses, vec![Sense::Ge, Sense::Ge, Sense::Le, Sense::Le]);
        assert_eq!(inst.rhs, vec![1.0, 6.0, 4.0, 10.0]);
        assert_eq!(inst.row_names[2], "r_rng");
        assert_eq!(inst.ccm.nnz(), 4);
    }

    #[test]
    fn negative_infinity_lower_bound_emits_mi() {
        let mut inst = MilpInstance::<f64>::new("mi");
        let x = inst.add_col("x", 1.0, VarKind::Continuous, f64::NEG_INFINITY, 3.0);
        inst.add_row("r", Sense::Le, 1.0, &[(x, 1.0)]);
        let text = String::from_utf8(write_mps(&inst).unwrap()).unwrap();
        assert!(text.lines().any(|l| l.trim_start().starts_with("MI ")), "{text}");
        let back: MilpInstance<f64> = parse_mps(text.as_bytes()).unwrap();
        assert!(back.structurally_eq(&inst));
    }

    #[test]
    fn writing_is_deterministic_and_refuses_invalid() {
        let mut inst = MilpInstance::<f64>::new("d");
        let x = inst.add_binary("x", 1.5);
        let y = inst.add_col("y", 0.0, VarKind::ImplicitInteger, -2.0, 9.0);
        inst.add_row("r", Sense::Eq, 0.25, &[(x, 1.0), (y, -3.0)]);
        let a = write_mps(&inst).unwrap();
        assert_eq!(a, write_mps(&inst).unwrap());
        let back: MilpInstance<f64> = parse_mps(&a).unwrap();
        assert!(back.structurally_eq(&inst));

        inst.rhs.push(1.0);
        assert!(matches!(write_mps(&inst), Err(MpsError::Invalid(_))));
    }

    #[test]
    fn objective_row_name_collision_is_avoided() {
        let mut inst = MilpInstance::<f64>::new("c");
        let x = inst.add_binary("x", 2.0);
        inst.add_row("OBJ", Sense::Le, 1.0, &[(x, 1.0)]);
        let back: MilpInstance<f64> = parse_mps(&write_mps(&inst).unwrap()).unwrap();
        assert!(back.structurally_eq(&inst));
    }

    #[test]
    fn single_precision_round_trip() {
        let mut inst = MilpInstance::<f32>::new("f");
        let x = inst.add_col("x", 0.1, VarKind::Continuous, -1.5, 2.7);
        inst.add_row("r", Sense::Ge, 0.3, &[(x, 1.1)]);
        let back: MilpInstance<f32> = parse_mps(&write_mps(&inst).unwrap()).unwrap();
        assert!(back.structurally_eq(&inst));
    }
}
