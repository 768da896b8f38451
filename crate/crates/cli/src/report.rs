//! Report assembly and emission.
//!
//! The machine format is a versioned key-value line document, byte-stable
//! for identical inputs: floats print in shortest round-trip form, lines
//! appear in a fixed order, and nothing time- or host-dependent is ever
//! included. The text format carries the same content for human eyes.

use std::fmt::Write as _;

use thiserror::Error;

use crate::scenario::fmt_float;

pub const REPORT_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Lane {
    Finite,
    Windowed,
}

impl Lane {
    fn as_str(self) -> &'static str {
        match self {
            Lane::Finite => "finite",
            Lane::Windowed => "windowed",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    Consistent,
    Inconsistent,
    NotACocycle,
}

impl Verdict {
    fn as_str(self) -> &'static str {
        match self {
            Verdict::Consistent => "consistent",
            Verdict::Inconsistent => "inconsistent",
            Verdict::NotACocycle => "not_a_cocycle",
        }
    }
}

/// One solver outcome: a method name, a status word, and named numeric
/// fields in emission order.
#[derive(Clone, Debug, PartialEq)]
pub struct SolverLine {
    pub method: String,
    pub status: String,
    pub fields: Vec<(String, f64)>,
}

/// Growth classification at one base point.
#[derive(Clone, Debug, PartialEq)]
pub struct GrowthLine {
    pub unit: usize,
    pub verdict: String,
    pub slope: f64,
    pub fit: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TheoremReport {
    pub scenario: String,
    pub lane: Lane,
    pub minimal: bool,
    /// Windowed lane: whether the map is injective (the classical theorem
    /// assumes a homeomorphism; the groupoid statement does not).
    pub t_injective: Option<bool>,
    /// Named defect measurements, e.g. cocycle identity defects.
    pub defects: Vec<(String, f64)>,
    pub solvers: Vec<SolverLine>,
    /// Per-base-unit growth verdicts (windowed lane).
    pub growth: Vec<GrowthLine>,
    /// Global sup of the cocycle per window (windowed lane).
    pub sup_rows: Vec<(i64, f64)>,
    /// Named condition measurements, e.g. negative-type violation.
    pub conditions: Vec<(String, f64)>,
    /// Notes carried verbatim into both formats (no spaces-only lines).
    pub notes: Vec<String>,
    pub verdict: Verdict,
}

/// Machine key-value emission; stable byte-for-byte.
pub fn emit_machine(report: &TheoremReport) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "report_version {REPORT_VERSION}");
    let _ = writeln!(out, "scenario {}", report.scenario);
    let _ = writeln!(out, "lane {}", report.lane.as_str());
    let _ = writeln!(out, "minimal {}", report.minimal);
    if let Some(inj) = report.t_injective {
        let _ = writeln!(out, "t_injective {inj}");
    }
    for (name, value) in &report.defects {
        let _ = writeln!(out, "defect {name} {}", fmt_float(*value));
    }
    for s in &report.solvers {
        let _ = write!(out, "solver {} status {}", s.method, s.status);
        for (key, value) in &s.fields {
            let _ = write!(out, " {key} {}", fmt_float(*value));
        }
        out.push('\n');
    }
    for g in &report.growth {
        let _ = writeln!(
            out,
            "growth unit {} verdict {} slope {} fit {}",
            g.unit,
            g.verdict,
            fmt_float(g.slope),
            fmt_float(g.fit)
        );
    }
    for (window, sup) in &report.sup_rows {
        let _ = writeln!(out, "sup {window} {}", fmt_float(*sup));
    }
    for (name, value) in &report.conditions {
        let _ = writeln!(out, "condition {name} {}", fmt_float(*value));
    }
    for note in &report.notes {
        let _ = writeln!(out, "note {note}");
    }
    let _ = writeln!(out, "verdict {}", report.verdict.as_str());
    out
}

/// Human-readable emission of the same content.
pub fn emit_text(report: &TheoremReport) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "scenario   {}", report.scenario);
    let _ = writeln!(out, "lane       {}", report.lane.as_str());
    let _ = writeln!(
        out,
        "minimal    {}{}",
        report.minimal,
        if report.minimal {
            ""
        } else {
            "   (processed per orbit; the single-orbit hypothesis fails)"
        }
    );
    if let Some(inj) = report.t_injective {
        let _ = writeln!(out, "injective  {inj}");
    }
    if !report.defects.is_empty() {
        let _ = writeln!(out, "\ndefects");
        for (name, value) in &report.defects {
            let _ = writeln!(out, "  {name:<24} {}", fmt_float(*value));
        }
    }
    if !report.solvers.is_empty() {
        let _ = writeln!(out, "\nsolvers");
        for s in &report.solvers {
            let _ = write!(out, "  {:<16} {}", s.method, s.status);
            for (key, value) in &s.fields {
                let _ = write!(out, "  {key}={}", fmt_float(*value));
            }
            out.push('\n');
        }
    }
    if !report.growth.is_empty() {
        let _ = writeln!(out, "\ngrowth by base unit");
        for g in &report.growth {
            let _ = writeln!(
                out,
                "  unit {:<4} {:<14} slope={} fit={}",
                g.unit,
                g.verdict,
                fmt_float(g.slope),
                fmt_float(g.fit)
            );
        }
    }
    if !report.sup_rows.is_empty() {
        let _ = writeln!(out, "\nglobal sup by window");
        for (window, sup) in &report.sup_rows {
            let _ = writeln!(out, "  K={window:<5} sup={}", fmt_float(*sup));
        }
    }
    if !report.conditions.is_empty() {
        let _ = writeln!(out, "\nconditions");
        for (name, value) in &report.conditions {
            let _ = writeln!(out, "  {name:<24} {}", fmt_float(*value));
        }
    }
    for note in &report.notes {
        let _ = writeln!(out, "\nnote: {note}");
    }
    let _ = writeln!(out, "\nverdict    {}", report.verdict.as_str());
    out
}

/// CSV of (window, global sup) pairs, `K,sup_norm` header included.
pub fn emit_csv(rows: &[(i64, f64)]) -> String {
    let mut out = String::from("K,sup_norm\n");
    for (window, sup) in rows {
        let _ = writeln!(out, "{window},{}", fmt_float(*sup));
    }
    out
}

#[derive(Debug, Error)]
#[error("machine report line {line}: {msg}")]
pub struct MachineParseError {
    pub line: usize,
    pub msg: String,
}

fn bad(line: usize, msg: impl Into<String>) -> MachineParseError {
    MachineParseError {
        line,
        msg: msg.into(),
    }
}

/// Parses the machine format back into a report; inverse of
/// [`emit_machine`] on its own output.
pub fn parse_machine(text: &str) -> Result<TheoremReport, MachineParseError> {
    let mut report = TheoremReport {
        scenario: String::new(),
        lane: Lane::Finite,
        minimal: true,
        t_injective: None,
        defects: Vec::new(),
        solvers: Vec::new(),
        growth: Vec::new(),
        sup_rows: Vec::new(),
        conditions: Vec::new(),
        notes: Vec::new(),
        verdict: Verdict::Consistent,
    };
    let mut saw_version = false;
    let mut saw_verdict = false;
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        let (key, rest) = line.split_once(' ').unwrap_or((line, ""));
        match key {
            "report_version" => {
                let v: u32 = rest.parse().map_err(|_| bad(line_no, "bad version"))?;
                if v != REPORT_VERSION {
                    return Err(bad(line_no, format!("unsupported report version {v}")));
                }
                saw_version = true;
            }
            "scenario" => report.scenario = rest.to_string(),
            "lane" => {
                report.lane = match rest {
                    "finite" => Lane::Finite,
                    "windowed" => Lane::Windowed,
                    other => return Err(bad(line_no, format!("unknown lane `{other}`"))),
                }
            }
            "minimal" => report.minimal = rest.parse().map_err(|_| bad(line_no, "bad bool"))?,
            "t_injective" => {
                report.t_injective = Some(rest.parse().map_err(|_| bad(line_no, "bad bool"))?)
            }
            "defect" | "condition" => {
                let (name, value) = rest
                    .rsplit_once(' ')
                    .ok_or_else(|| bad(line_no, "expected `<name> <value>`"))?;
                let value: f64 = value.parse().map_err(|_| bad(line_no, "bad float"))?;
                let target = if key == "defect" {
                    &mut report.defects
                } else {
                    &mut report.conditions
                };
                target.push((name.to_string(), value));
            }
            "solver" => {
                let toks: Vec<&str> = rest.split(' ').collect();
                if toks.len() < 3 || toks[1] != "status" || toks.len().is_multiple_of(2) {
                    return Err(bad(line_no, "malformed solver line"));
                }
                let mut fields = Vec::new();
                for pair in toks[3..].chunks(2) {
                    let value: f64 = pair[1].parse().map_err(|_| bad(line_no, "bad float"))?;
                    fields.push((pair[0].to_string(), value));
                }
                report.solvers.push(SolverLine {
                    method: toks[0].to_string(),
                    status: toks[2].to_string(),
                    fields,
                });
            }
            "growth" => {
                let toks: Vec<&str> = rest.split(' ').collect();
                if toks.len() != 8
                    || toks[0] != "unit"
                    || toks[2] != "verdict"
                    || toks[4] != "slope"
                    || toks[6] != "fit"
                {
                    return Err(bad(line_no, "malformed growth line"));
                }
                report.growth.push(GrowthLine {
                    unit: toks[1].parse().map_err(|_| bad(line_no, "bad unit"))?,
                    verdict: toks[3].to_string(),
                    slope: toks[5].parse().map_err(|_| bad(line_no, "bad float"))?,
                    fit: toks[7].parse().map_err(|_| bad(line_no, "bad float"))?,
                });
            }
            "sup" => {
                let (window, sup) = rest
                    .split_once(' ')
                    .ok_or_else(|| bad(line_no, "expected `<window> <sup>`"))?;
                report.sup_rows.push((
                    window.parse().map_err(|_| bad(line_no, "bad window"))?,
                    sup.parse().map_err(|_| bad(line_no, "bad float"))?,
                ));
            }
            "note" => report.notes.push(rest.to_string()),
            "verdict" => {
                report.verdict = match rest {
                    "consistent" => Verdict::Consistent,
                    "inconsistent" => Verdict::Inconsistent,
                    "not_a_cocycle" => Verdict::NotACocycle,
                    other => return Err(bad(line_no, format!("unknown verdict `{other}`"))),
                };
                saw_verdict = true;
            }
            other => return Err(bad(line_no, format!("unknown key `{other}`"))),
        }
    }
    if !saw_version {
        return Err(bad(0, "missing report_version"));
    }
    if !saw_verdict {
        return Err(bad(0, "missing verdict"));
    }
    Ok(report)
}
