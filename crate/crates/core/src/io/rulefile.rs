//! Text format for rule sets.
//!
//! ```text
//! name a1_fixed
//! phi 1
//! colors L F B
//! lights fixed
//!
//! init
//! -1 0 F
//! 0 0 L
//!
//! rule move=up
//! .
//! . L F
//! .
//! ```
//!
//! A rule block lists the Manhattan ball one row per line, North to South,
//! West to East within a row. `.` is an empty node, `x` a node the rule
//! does not look at, and a color label an occupied node. `#` starts a
//! comment.

use std::fmt::Write as _;

use crate::error::{ParseError, ParseErrorKind};
use crate::grid::{Ball, Color, Configuration, Move, Position};
use crate::rules::{PatternCell, Rule, RulePattern, RuleSet};

#[derive(Clone, Copy)]
struct Token<'a> {
    text: &'a str,
    column: usize,
}

struct Line<'a> {
    number: usize,
    tokens: Vec<Token<'a>>,
}

impl<'a> Line<'a> {
    fn err(&self, tok: usize, kind: ParseErrorKind) -> ParseError {
        let column = self.tokens.get(tok).map_or(1, |t| t.column);
        ParseError {
            line: self.number,
            column,
            kind,
        }
    }
}

fn tokenize(text: &str) -> Vec<Line<'_>> {
    text.lines()
        .enumerate()
        .filter_map(|(i, raw)| {
            let content = raw.split('#').next().unwrap_or("");
            let mut tokens = Vec::new();
            let mut start = None;
            for (col, ch) in content
                .char_indices()
                .chain(std::iter::once((content.len(), ' ')))
            {
                match (ch.is_whitespace(), start) {
                    (false, None) => start = Some(col),
                    (true, Some(s)) => {
                        tokens.push(Token {
                            text: &content[s..col],
                            column: content[..s].chars().count() + 1,
                        });
                        start = None;
                    }
                    _ => {}
                }
            }
            (!tokens.is_empty()).then_some(Line {
                number: i + 1,
                tokens,
            })
        })
        .collect()
}

struct Header {
    name: Option<String>,
    phi: Option<u32>,
    colors: Option<Vec<Color>>,
    modifiable: Option<bool>,
}

fn parse_int<T: std::str::FromStr>(line: &Line<'_>, tok: usize) -> Result<T, ParseError> {
    let t = line.tokens[tok].text;
    t.parse()
        .map_err(|_| line.err(tok, ParseErrorKind::BadNumber(t.to_string())))
}

fn expect_arity(line: &Line<'_>, n: usize) -> Result<(), ParseError> {
    if line.tokens.len() > n {
        return Err(line.err(
            n,
            ParseErrorKind::Unexpected(line.tokens[n].text.to_string()),
        ));
    }
    if line.tokens.len() < n {
        let column = line.tokens.last().map_or(1, |t| t.column + t.text.len());
        return Err(ParseError {
            line: line.number,
            column,
            kind: ParseErrorKind::Invalid(format!("expected {n} fields")),
        });
    }
    Ok(())
}

fn lookup(colors: &[Color], line: &Line<'_>, tok: usize) -> Result<Color, ParseError> {
    let label = line.tokens[tok].text;
    colors
        .iter()
        .copied()
        .find(|c| c.label() == label)
        .ok_or_else(|| line.err(tok, ParseErrorKind::UnknownColor(label.to_string())))
}

pub fn parse_rule_file(text: &str) -> Result<RuleSet, ParseError> {
    let lines = tokenize(text);
    let mut header = Header {
        name: None,
        phi: None,
        colors: None,
        modifiable: None,
    };
    let mut i = 0;

    while i < lines.len() {
        let line = &lines[i];
        let key = line.tokens[0].text;
        let dup = |field: &'static str, present: bool| {
            if present {
                Err(line.err(0, ParseErrorKind::DuplicateHeader(field)))
            } else {
                Ok(())
            }
        };
        match key {
            "name" => {
                dup("name", header.name.is_some())?;
                expect_arity(line, 2)?;
                header.name = Some(line.tokens[1].text.to_string());
            }
            "phi" => {
                dup("phi", header.phi.is_some())?;
                expect_arity(line, 2)?;
                let phi: u32 = parse_int(line, 1)?;
                if phi == 0 {
                    return Err(line.err(1, ParseErrorKind::Invalid("phi must be positive".into())));
                }
                header.phi = Some(phi);
            }
            "colors" => {
                dup("colors", header.colors.is_some())?;
                let mut colors: Vec<Color> = Vec::new();
                for (k, t) in line.tokens.iter().enumerate().skip(1) {
                    let c = Color::new(colors.len() as u8, t.text)
                        .map_err(|e| line.err(k, ParseErrorKind::Invalid(e.to_string())))?;
                    if colors.iter().any(|d| d.label() == c.label()) {
                        return Err(line.err(
                            k,
                            ParseErrorKind::Invalid(format!("duplicate color {}", t.text)),
                        ));
                    }
                    colors.push(c);
                }
                if colors.is_empty() {
                    return Err(line.err(
                        0,
                        ParseErrorKind::Invalid("at least one color is required".into()),
                    ));
                }
                header.colors = Some(colors);
            }
            "lights" => {
                dup("lights", header.modifiable.is_some())?;
                expect_arity(line, 2)?;
                header.modifiable = Some(match line.tokens[1].text {
                    "fixed" => false,
                    "modifiable" => true,
                    other => return Err(line.err(1, ParseErrorKind::Unexpected(other.to_string()))),
                });
            }
            "init" | "rule" => break,
            other => return Err(line.err(0, ParseErrorKind::Unexpected(other.to_string()))),
        }
        i += 1;
    }

    let eof = ParseError {
        line: lines.last().map_or(1, |l| l.number),
        column: 1,
        kind: ParseErrorKind::MissingHeader("name"),
    };
    let missing = |field| ParseError {
        kind: ParseErrorKind::MissingHeader(field),
        ..eof.clone()
    };
    let name = header.name.ok_or_else(|| missing("name"))?;
    let phi = header.phi.ok_or_else(|| missing("phi"))?;
    let colors = header.colors.ok_or_else(|| missing("colors"))?;
    let modifiable = header.modifiable.ok_or_else(|| missing("lights"))?;
    let ball = Ball::new(phi);

    let mut initial = Configuration::new();
    if i < lines.len() && lines[i].tokens[0].text == "init" {
        expect_arity(&lines[i], 1)?;
        i += 1;
        while i < lines.len() && lines[i].tokens[0].text != "rule" {
            let line = &lines[i];
            expect_arity(line, 3)?;
            let p = Position::new(parse_int(line, 0)?, parse_int(line, 1)?);
            let c = lookup(&colors, line, 2)?;
            initial
                .insert(p, c)
                .map_err(|e| line.err(0, ParseErrorKind::Invalid(e.to_string())))?;
            i += 1;
        }
    }

    let mut rules = Vec::new();
    while i < lines.len() {
        let directive = &lines[i];
        if directive.tokens[0].text != "rule" {
            return Err(directive.err(
                0,
                ParseErrorKind::Unexpected(directive.tokens[0].text.to_string()),
            ));
        }
        let mut mv = None;
        let mut new_color = None;
        for (k, t) in directive.tokens.iter().enumerate().skip(1) {
            if let Some(m) = t.text.strip_prefix("move=") {
                if mv.is_some() {
                    return Err(directive.err(k, ParseErrorKind::Unexpected(t.text.to_string())));
                }
                mv =
                    Some(Move::from_name(m).ok_or_else(|| {
                        directive.err(k, ParseErrorKind::Unexpected(m.to_string()))
                    })?);
            } else if let Some(label) = t.text.strip_prefix("color=") {
                if new_color.is_some() {
                    return Err(directive.err(k, ParseErrorKind::Unexpected(t.text.to_string())));
                }
                let c = colors
                    .iter()
                    .copied()
                    .find(|c| c.label() == label)
                    .ok_or_else(|| {
                        directive.err(k, ParseErrorKind::UnknownColor(label.to_string()))
                    })?;
                if !modifiable {
                    return Err(directive.err(
                        k,
                        ParseErrorKind::Invalid("color change with fixed lights".into()),
                    ));
                }
                new_color = Some(c);
            } else {
                return Err(directive.err(k, ParseErrorKind::Unexpected(t.text.to_string())));
            }
        }
        let mv = mv.ok_or_else(|| {
            directive.err(
                0,
                ParseErrorKind::Invalid("rule needs move=<direction>".into()),
            )
        })?;
        i += 1;

        let rows = 2 * phi as usize + 1;
        let mut cells = Vec::with_capacity(ball.len());
        for row in 0..rows {
            let Some(line) = lines.get(i).filter(|l| l.tokens[0].text != "rule") else {
                let at = lines.get(i).or(lines.last()).expect("directive exists");
                return Err(ParseError {
                    line: at.number,
                    column: 1,
                    kind: ParseErrorKind::MissingRows {
                        expected: rows,
                        found: row,
                    },
                });
            };
            let dy = phi as i64 - row as i64;
            let expected = ball.row_len(dy);
            if line.tokens.len() != expected {
                let tok = expected.min(line.tokens.len().saturating_sub(1));
                return Err(line.err(
                    tok,
                    ParseErrorKind::RowArity {
                        row: row + 1,
                        expected,
                        found: line.tokens.len(),
                    },
                ));
            }
            for (k, t) in line.tokens.iter().enumerate() {
                cells.push(match t.text {
                    "." => PatternCell::MustBeEmpty,
                    "x" => PatternCell::DontCare,
                    _ => PatternCell::MustBeOccupied(lookup(&colors, line, k)?),
                });
            }
            if dy == 0 && !matches!(cells[ball.center_index()], PatternCell::MustBeOccupied(_)) {
                return Err(line.err(phi as usize, ParseErrorKind::CenterNotOccupied));
            }
            i += 1;
        }
        let pattern = RulePattern::new(phi, cells).expect("shape checked row by row");
        rules.push(Rule::new(pattern, mv, new_color));
    }

    RuleSet::new(name, phi, colors, modifiable, rules, initial).map_err(|e| ParseError {
        line: 1,
        column: 1,
        kind: ParseErrorKind::Invalid(e.to_string()),
    })
}

/// Canonical text of a rule set: no comments, single spaces, one blank line
/// between sections.
pub fn serialize_rule_set(rs: &RuleSet) -> String {
    let mut out = String::new();
    let labels: Vec<&str> = rs.colors().iter().map(|c| c.label()).collect();
    writeln!(out, "name {}", rs.name()).unwrap();
    writeln!(out, "phi {}", rs.phi()).unwrap();
    writeln!(out, "colors {}", labels.join(" ")).unwrap();
    writeln!(
        out,
        "lights {}",
        if rs.lights_modifiable() {
            "modifiable"
        } else {
            "fixed"
        }
    )
    .unwrap();
    out.push_str("\ninit\n");
    for (p, c) in rs.initial().iter() {
        writeln!(out, "{} {} {}", p.x, p.y, c).unwrap();
    }
    let ball = Ball::new(rs.phi());
    let phi = rs.phi() as i64;
    for rule in rs.rules() {
        out.push('\n');
        write!(out, "rule move={}", rule.mv).unwrap();
        if let Some(c) = rule.new_color {
            write!(out, " color={c}").unwrap();
        }
        out.push('\n');
        let mut cells = rule.pattern.cells().iter();
        for dy in (-phi..=phi).rev() {
            let row: Vec<String> = (0..ball.row_len(dy))
                .map(|_| match cells.next().expect("pattern covers the ball") {
                    PatternCell::MustBeEmpty => ".".to_string(),
                    PatternCell::DontCare => "x".to_string(),
                    PatternCell::MustBeOccupied(c) => c.label().to_string(),
                })
                .collect();
            writeln!(out, "{}", row.join(" ")).unwrap();
        }
    }
    out
}
