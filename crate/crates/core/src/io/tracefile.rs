//! Tab-separated execution traces (tabs shown as spaces below).
//!
//! ```text
//! # algorithm  a1_fixed
//! # phi  1
//! # colors  L F B
//! # adversary  random:7
//! # seed  7
//! 0  0  -2  1  B
//! 0  1  -1  0  F
//! ...
//! 9  edge_swap  0  1  1  1
//! ```
//!
//! Robot records are `round robot x y color`, sorted by `(round, robot)`.
//! A violation observed while executing round `r` follows the robot records
//! of round `r` as `r kind x1 y1 [x2 y2 ...]`.

use std::fmt::Write as _;

use crate::engine::{AdversaryStrategy, Trace, ViolationEvent, ViolationKind};
use crate::error::{ParseError, ParseErrorKind};
use crate::grid::{Color, Configuration, Position};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TraceHeader {
    pub algorithm: String,
    pub phi: u32,
    pub colors: Vec<Color>,
    pub adversary: String,
    pub seed: Option<u64>,
}

impl TraceHeader {
    pub fn new(
        algorithm: impl Into<String>,
        phi: u32,
        colors: &[Color],
        adversary: &AdversaryStrategy,
    ) -> Self {
        TraceHeader {
            algorithm: algorithm.into(),
            phi,
            colors: colors.to_vec(),
            adversary: adversary.to_string(),
            seed: adversary.seed(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TraceFile {
    pub header: TraceHeader,
    pub trace: Trace,
}

fn kind_from_name(s: &str) -> Option<ViolationKind> {
    [ViolationKind::NodeCollision, ViolationKind::EdgeSwap]
        .into_iter()
        .find(|k| k.name() == s)
}

/// The record lines only, without the header.
pub fn serialize_records(t: &Trace) -> String {
    let mut out = String::new();
    let mut violations = t.violations.iter().peekable();
    for round in 0..t.configurations.len() {
        for (id, track) in t.robot_tracks.iter().enumerate() {
            let (p, c) = track[round];
            writeln!(out, "{round}\t{id}\t{}\t{}\t{}", p.x, p.y, c.label())
                .expect("writing to a String");
        }
        while let Some(v) = violations.next_if(|v| v.round as usize == round) {
            write!(out, "{round}\t{}", v.kind.name()).expect("writing to a String");
            for p in &v.positions {
                write!(out, "\t{}\t{}", p.x, p.y).expect("writing to a String");
            }
            out.push('\n');
        }
    }
    out
}

pub fn serialize_trace(header: &TraceHeader, t: &Trace) -> String {
    let labels: Vec<&str> = header.colors.iter().map(Color::label).collect();
    let seed = header
        .seed
        .map_or_else(|| "none".to_string(), |s| s.to_string());
    let mut out = format!(
        "# algorithm\t{}\n# phi\t{}\n# colors\t{}\n# adversary\t{}\n# seed\t{}\n",
        header.algorithm,
        header.phi,
        labels.join(" "),
        header.adversary,
        seed
    );
    out.push_str(&serialize_records(t));
    out
}

struct Fields<'a> {
    line: usize,
    text: &'a str,
    fields: Vec<(usize, &'a str)>,
}

impl<'a> Fields<'a> {
    fn split(line: usize, text: &'a str) -> Self {
        let mut fields = Vec::new();
        let mut col = 1;
        for f in text.split('\t') {
            fields.push((col, f));
            col += f.chars().count() + 1;
        }
        Fields { line, text, fields }
    }

    fn err(&self, idx: usize, kind: ParseErrorKind) -> ParseError {
        let column = self
            .fields
            .get(idx)
            .map_or(self.text.chars().count() + 1, |f| f.0);
        ParseError {
            line: self.line,
            column,
            kind,
        }
    }

    fn get(&self, idx: usize) -> Result<&'a str, ParseError> {
        self.fields
            .get(idx)
            .map(|f| f.1)
            .ok_or_else(|| self.err(idx, ParseErrorKind::Invalid("missing field".into())))
    }

    fn num<T: std::str::FromStr>(&self, idx: usize) -> Result<T, ParseError> {
        let s = self.get(idx)?;
        s.parse()
            .map_err(|_| self.err(idx, ParseErrorKind::BadNumber(s.to_string())))
    }
}

pub fn parse_trace(text: &str) -> Result<TraceFile, ParseError> {
    let mut algorithm = None;
    let mut phi = None;
    let mut colors: Option<Vec<Color>> = None;
    let mut adversary = None;
    let mut seed: Option<Option<u64>> = None;

    // rounds[r] = robot records of round r, in id order
    let mut rounds: Vec<Vec<(Position, Color)>> = Vec::new();
    let mut violations = Vec::new();
    let mut last_line = 0;

    for (n, raw) in text.lines().enumerate() {
        let line = n + 1;
        last_line = line;
        if raw.is_empty() {
            continue;
        }
        if let Some(rest) = raw.strip_prefix("# ") {
            let f = Fields::split(line, rest);
            let key = f.get(0)?;
            let value = f.get(1)?;
            let dup = |name| ParseError {
                line,
                column: 3,
                kind: ParseErrorKind::DuplicateHeader(name),
            };
            match key {
                "algorithm" => {
                    if algorithm.replace(value.to_string()).is_some() {
                        return Err(dup("algorithm"));
                    }
                }
                "phi" => {
                    if phi.replace(f.num::<u32>(1)?).is_some() {
                        return Err(dup("phi"));
                    }
                }
                "colors" => {
                    let parsed = value
                        .split(' ')
                        .enumerate()
                        .map(|(i, l)| {
                            u8::try_from(i)
                                .ok()
                                .and_then(|id| Color::new(id, l).ok())
                                .ok_or_else(|| {
                                    f.err(
                                        1,
                                        ParseErrorKind::Invalid(format!("bad color label {l:?}")),
                                    )
                                })
                        })
                        .collect::<Result<Vec<_>, _>>()?;
                    if colors.replace(parsed).is_some() {
                        return Err(dup("colors"));
                    }
                }
                "adversary" => {
                    if adversary.replace(value.to_string()).is_some() {
                        return Err(dup("adversary"));
                    }
                }
                "seed" => {
                    let s = if value == "none" {
                        None
                    } else {
                        Some(f.num::<u64>(1)?)
                    };
                    if seed.replace(s).is_some() {
                        return Err(dup("seed"));
                    }
                }
                other => return Err(f.err(0, ParseErrorKind::Unexpected(other.to_string()))),
            }
            continue;
        }
        if raw.starts_with('#') {
            continue;
        }

        let f = Fields::split(line, raw);
        let palette = colors.as_ref().ok_or(ParseError {
            line,
            column: 1,
            kind: ParseErrorKind::MissingHeader("colors"),
        })?;
        let round: usize = f.num(0)?;
        let second = f.get(1)?;
        if let Some(kind) = kind_from_name(second) {
            let coords = f.fields.len() - 2;
            if coords == 0 || !coords.is_multiple_of(2) {
                return Err(f.err(
                    2,
                    ParseErrorKind::Invalid("expected coordinate pairs".into()),
                ));
            }
            let positions = (0..coords / 2)
                .map(|k| Ok(Position::new(f.num(2 + 2 * k)?, f.num(3 + 2 * k)?)))
                .collect::<Result<Vec<_>, ParseError>>()?;
            if round + 1 != rounds.len() {
                return Err(f.err(0, ParseErrorKind::Invalid("violation out of order".into())));
            }
            violations.push(ViolationEvent {
                round: round as u64,
                kind,
                positions,
            });
            continue;
        }
        if f.fields.len() != 5 {
            return Err(f.err(0, ParseErrorKind::Invalid("expected 5 fields".into())));
        }
        let id: usize = f.num(1)?;
        let p = Position::new(f.num(2)?, f.num(3)?);
        let label = f.get(4)?;
        let c = *palette
            .iter()
            .find(|c| c.label() == label)
            .ok_or_else(|| f.err(4, ParseErrorKind::UnknownColor(label.to_string())))?;
        if round == rounds.len() && id == 0 {
            if let Some(prev) = rounds.last() {
                if prev.len() != rounds[0].len() {
                    return Err(f.err(
                        0,
                        ParseErrorKind::Invalid("previous round is missing robots".into()),
                    ));
                }
            }
            rounds.push(Vec::new());
        }
        let expected_round = rounds.len().checked_sub(1);
        match rounds.last_mut() {
            Some(cur) if Some(round) == expected_round && id == cur.len() => cur.push((p, c)),
            _ => {
                return Err(f.err(
                    0,
                    ParseErrorKind::Invalid("records must be sorted by round and robot".into()),
                ))
            }
        }
    }

    let eof = ParseError {
        line: last_line + 1,
        column: 1,
        kind: ParseErrorKind::MissingHeader(""),
    };
    let missing = |field| ParseError {
        kind: ParseErrorKind::MissingHeader(field),
        ..eof.clone()
    };
    let header = TraceHeader {
        algorithm: algorithm.ok_or_else(|| missing("algorithm"))?,
        phi: phi.ok_or_else(|| missing("phi"))?,
        colors: colors.ok_or_else(|| missing("colors"))?,
        adversary: adversary.ok_or_else(|| missing("adversary"))?,
        seed: seed.ok_or_else(|| missing("seed"))?,
    };
    let Some(first) = rounds.first() else {
        return Err(ParseError {
            kind: ParseErrorKind::Invalid("trace has no records".into()),
            ..eof
        });
    };
    if rounds.last().map(Vec::len) != Some(first.len()) {
        return Err(ParseError {
            kind: ParseErrorKind::Invalid("last round is missing robots".into()),
            ..eof
        });
    }

    let mut configurations = Vec::with_capacity(rounds.len());
    for (r, robots) in rounds.iter().enumerate() {
        let c = Configuration::from_robots(robots.iter().copied()).map_err(|e| ParseError {
            kind: ParseErrorKind::Invalid(format!("round {r}: {e}")),
            ..eof.clone()
        })?;
        configurations.push(c);
    }
    let robot_tracks = (0..first.len())
        .map(|id| rounds.iter().map(|r| r[id]).collect())
        .collect();
    let trace = Trace {
        rule_set_name: header.algorithm.clone(),
        configurations,
        violations,
        robot_tracks,
    };
    Ok(TraceFile { header, trace })
}
