//! Rule tables.
//!
//! A rule is written once, against the globally oriented view, and applies
//! to all four rotations of that view. [`validate`] checks that the
//! rotation closure is consistent: for every view `V` and rotation `f`,
//! `T(V) = f⁻¹(T(f(V)))`. [`RuleTable`] is the expanded, matchable form.

use std::collections::HashMap;
use std::fmt;

use serde::Serialize;

use crate::error::{GridError, MatchError, RuleSetError};
use crate::grid::{
    rotate_move, Ball, CellState, Color, Configuration, Move, Offset, Rotation, View,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum PatternCell {
    MustBeEmpty,
    MustBeOccupied(Color),
    DontCare,
}

impl PatternCell {
    pub fn accepts(self, state: CellState) -> bool {
        match (self, state) {
            (PatternCell::DontCare, _) => true,
            (PatternCell::MustBeEmpty, CellState::Empty) => true,
            (PatternCell::MustBeOccupied(want), CellState::Occupied(got)) => want == got,
            _ => false,
        }
    }
}

/// One globally oriented view class, laid out in [`Ball`] order.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct RulePattern {
    phi: u32,
    cells: Vec<PatternCell>,
}

impl RulePattern {
    pub fn new(phi: u32, cells: Vec<PatternCell>) -> Result<Self, GridError> {
        let ball = Ball::new(phi);
        if cells.len() != ball.len() {
            return Err(GridError::BallShape {
                phi,
                cells: cells.len(),
            });
        }
        if !matches!(cells[ball.center_index()], PatternCell::MustBeOccupied(_)) {
            return Err(GridError::CenterNotOccupied);
        }
        Ok(RulePattern { phi, cells })
    }

    /// Pattern with the given center color, the listed occupied offsets and
    /// every other cell empty. Not normalized.
    pub fn sparse(
        phi: u32,
        center: Color,
        occupied: &[(Offset, Color)],
    ) -> Result<Self, GridError> {
        let ball = Ball::new(phi);
        let mut cells = vec![PatternCell::MustBeEmpty; ball.len()];
        cells[ball.center_index()] = PatternCell::MustBeOccupied(center);
        for (o, c) in occupied {
            let i = ball.index_of(*o).ok_or(GridError::BallShape {
                phi,
                cells: usize::MAX,
            })?;
            cells[i] = PatternCell::MustBeOccupied(*c);
        }
        RulePattern::new(phi, cells)
    }

    pub fn phi(&self) -> u32 {
        self.phi
    }

    pub fn ball(&self) -> Ball {
        Ball::new(self.phi)
    }

    pub fn cells(&self) -> &[PatternCell] {
        &self.cells
    }

    pub fn cell(&self, o: Offset) -> Option<PatternCell> {
        self.ball().index_of(o).map(|i| self.cells[i])
    }

    pub fn center_color(&self) -> Color {
        match self.cells[self.ball().center_index()] {
            PatternCell::MustBeOccupied(c) => c,
            _ => unreachable!("pattern center is always occupied"),
        }
    }

    pub fn colors(&self) -> impl Iterator<Item = Color> + '_ {
        self.cells.iter().filter_map(|c| match c {
            PatternCell::MustBeOccupied(col) => Some(*col),
            _ => None,
        })
    }

    pub fn rotate(&self, r: Rotation) -> RulePattern {
        if r.is_identity() {
            return self.clone();
        }
        let perm = self.ball().rotation_permutation(r);
        let mut cells = vec![PatternCell::DontCare; self.cells.len()];
        for (i, c) in self.cells.iter().enumerate() {
            cells[perm[i]] = *c;
        }
        RulePattern {
            phi: self.phi,
            cells,
        }
    }

    pub fn matches(&self, v: &View) -> bool {
        v.phi() == self.phi && self.cells.iter().zip(v.cells()).all(|(p, s)| p.accepts(*s))
    }

    /// Offsets that no observer matching this pattern could see.
    fn hidden_offsets(&self) -> Vec<Offset> {
        let ball = self.ball();
        ball.offsets()
            .filter(|o| {
                Ball::is_hidden(*o, |v| {
                    matches!(self.cell(v), Some(PatternCell::MustBeOccupied(_)))
                })
            })
            .collect()
    }
}

/// Forces every hidden cell to `DontCare`. Returns the offsets that had to
/// be changed.
pub fn normalize_pattern(p: &RulePattern) -> (RulePattern, Vec<Offset>) {
    let ball = p.ball();
    let mut out = p.clone();
    let mut warnings = Vec::new();
    for o in p.hidden_offsets() {
        let i = ball.index_of(o).expect("hidden offsets lie in the ball");
        if out.cells[i] != PatternCell::DontCare {
            out.cells[i] = PatternCell::DontCare;
            warnings.push(o);
        }
    }
    (out, warnings)
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Rule {
    pub pattern: RulePattern,
    pub mv: Move,
    pub new_color: Option<Color>,
}

impl Rule {
    pub fn new(pattern: RulePattern, mv: Move, new_color: Option<Color>) -> Self {
        Rule {
            pattern,
            mv,
            new_color,
        }
    }

    /// The move and the color the robot holds afterwards.
    pub fn output(&self) -> (Move, Color) {
        (
            self.mv,
            self.new_color
                .unwrap_or_else(|| self.pattern.center_color()),
        )
    }
}

/// A complete algorithm: colors, initial configuration and rules.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RuleSet {
    name: String,
    phi: u32,
    colors: Vec<Color>,
    lights_modifiable: bool,
    rules: Vec<Rule>,
    initial: Configuration,
}

impl RuleSet {
    pub fn new(
        name: impl Into<String>,
        phi: u32,
        colors: Vec<Color>,
        lights_modifiable: bool,
        rules: Vec<Rule>,
        initial: Configuration,
    ) -> Result<Self, RuleSetError> {
        if phi == 0 {
            return Err(RuleSetError::ZeroPhi);
        }
        for (index, c) in colors.iter().enumerate() {
            if c.id() as usize != index {
                return Err(RuleSetError::SparseColorIds {
                    index,
                    expected: colors.len(),
                    found: c.id(),
                });
            }
            if colors[..index].iter().any(|d| d.label() == c.label()) {
                return Err(RuleSetError::DuplicateLabel(c.label().to_string()));
            }
        }
        let known = |c: &Color| {
            if colors.contains(c) {
                Ok(())
            } else {
                Err(RuleSetError::UnknownColor(c.label().to_string()))
            }
        };
        for (i, rule) in rules.iter().enumerate() {
            if rule.pattern.phi() != phi {
                return Err(RuleSetError::PhiMismatch {
                    rule: i,
                    expected: phi,
                    found: rule.pattern.phi(),
                });
            }
            rule.pattern.colors().try_for_each(|c| known(&c))?;
            if let Some(c) = &rule.new_color {
                if !lights_modifiable {
                    return Err(RuleSetError::ColorChangeWithFixedLights(i));
                }
                known(c)?;
            }
        }
        initial.iter().try_for_each(|(_, c)| known(&c))?;
        Ok(RuleSet {
            name: name.into(),
            phi,
            colors,
            lights_modifiable,
            rules,
            initial,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn phi(&self) -> u32 {
        self.phi
    }

    pub fn colors(&self) -> &[Color] {
        &self.colors
    }

    pub fn color_by_label(&self, label: &str) -> Option<Color> {
        self.colors.iter().copied().find(|c| c.label() == label)
    }

    pub fn lights_modifiable(&self) -> bool {
        self.lights_modifiable
    }

    pub fn rules(&self) -> &[Rule] {
        &self.rules
    }

    pub fn initial(&self) -> &Configuration {
        &self.initial
    }

    pub fn with_rules(&self, rules: Vec<Rule>) -> Result<RuleSet, RuleSetError> {
        RuleSet::new(
            self.name.clone(),
            self.phi,
            self.colors.clone(),
            self.lights_modifiable,
            rules,
            self.initial.clone(),
        )
    }

    pub fn with_initial(&self, initial: Configuration) -> Result<RuleSet, RuleSetError> {
        RuleSet::new(
            self.name.clone(),
            self.phi,
            self.colors.clone(),
            self.lights_modifiable,
            self.rules.clone(),
            initial,
        )
    }
}

/// One rotated copy of a source rule.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ExpandedRule {
    pub source: usize,
    pub rotation: Rotation,
    pub pattern: RulePattern,
    pub mv: Move,
    pub new_color: Option<Color>,
}

impl ExpandedRule {
    pub fn output(&self) -> (Move, Color) {
        (
            self.mv,
            self.new_color
                .unwrap_or_else(|| self.pattern.center_color()),
        )
    }

    pub fn to_rule(&self) -> Rule {
        Rule::new(self.pattern.clone(), self.mv, self.new_color)
    }
}

/// All four rotations of every rule, in (source, rotation) order, with exact
/// duplicates (same pattern and same output) removed.
pub fn expand_rotations(rs: &RuleSet) -> Vec<ExpandedRule> {
    let mut out: Vec<ExpandedRule> = Vec::new();
    for (source, rule) in rs.rules().iter().enumerate() {
        for r in Rotation::ALL {
            let e = ExpandedRule {
                source,
                rotation: r,
                pattern: rule.pattern.rotate(r),
                mv: rotate_move(r, rule.mv),
                new_color: rule.new_color,
            };
            if !out
                .iter()
                .any(|x| x.pattern == e.pattern && x.output() == e.output())
            {
                out.push(e);
            }
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Conflict {
    /// Source rule indices, lower first.
    pub rules: (usize, usize),
    /// Rotation taking the second rule's pattern onto the first's.
    pub rotation: u8,
    pub description: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct NormalizationWarning {
    pub rule: usize,
    pub offset: (i64, i64),
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub conflicts: Vec<Conflict>,
    /// Rules whose pattern is rotation-symmetric while their move is not:
    /// the adversary's choice of frame decides where the robot goes.
    pub adversary_controlled: Vec<usize>,
    pub normalization_warnings: Vec<NormalizationWarning>,
}

impl ValidationReport {
    pub fn is_well_defined(&self) -> bool {
        self.conflicts.is_empty() && self.adversary_controlled.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.conflicts {
            writeln!(
                f,
                "conflict: rules {} and {} (rotation {}): {}",
                c.rules.0, c.rules.1, c.rotation, c.description
            )?;
        }
        for i in &self.adversary_controlled {
            writeln!(f, "adversary-controlled: rule {i} has a rotation-symmetric pattern and a directed move")?;
        }
        for w in &self.normalization_warnings {
            writeln!(
                f,
                "warning: rule {} constrains hidden cell ({},{}); treated as don't-care",
                w.rule, w.offset.0, w.offset.1
            )?;
        }
        write!(
            f,
            "{} conflicts, {} adversary-controlled, {} normalization warnings: {}",
            self.conflicts.len(),
            self.adversary_controlled.len(),
            self.normalization_warnings.len(),
            if self.is_well_defined() {
                "well-defined"
            } else {
                "NOT well-defined"
            }
        )
    }
}

fn normalized_rules(rs: &RuleSet) -> (Vec<Rule>, Vec<NormalizationWarning>) {
    let mut warnings = Vec::new();
    let rules = rs
        .rules()
        .iter()
        .enumerate()
        .map(|(i, rule)| {
            let (pattern, w) = normalize_pattern(&rule.pattern);
            warnings.extend(w.into_iter().map(|o| NormalizationWarning {
                rule: i,
                offset: (o.dx, o.dy),
            }));
            Rule::new(pattern, rule.mv, rule.new_color)
        })
        .collect();
    (rules, warnings)
}

fn describe_output((m, c): (Move, Color)) -> String {
    format!("{m}/{c}")
}

pub fn validate(rs: &RuleSet) -> ValidationReport {
    let (rules, normalization_warnings) = normalized_rules(rs);
    let mut report = ValidationReport {
        normalization_warnings,
        ..Default::default()
    };

    for (i, a) in rules.iter().enumerate() {
        // Two normalized patterns that both match some realizable view are
        // equal, so comparing patterns for equality finds every overlap.
        for (j, b) in rules.iter().enumerate().skip(i + 1) {
            for r in Rotation::ALL {
                if b.pattern.rotate(r) != a.pattern {
                    continue;
                }
                let rotated = (rotate_move(r, b.mv), b.output().1);
                if rotated != a.output() {
                    report.conflicts.push(Conflict {
                        rules: (i, j),
                        rotation: r.quarter_turns(),
                        description: format!(
                            "same view, outputs {} and {}",
                            describe_output(a.output()),
                            describe_output(rotated)
                        ),
                    });
                }
            }
        }
        let symmetric = Rotation::ALL[1..]
            .iter()
            .any(|r| a.pattern.rotate(*r) == a.pattern && rotate_move(*r, a.mv) != a.mv);
        if symmetric {
            report.adversary_controlled.push(i);
        }
    }
    report
}

/// Whether rotation-symmetric rules with a directed move may be executed.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum SymmetryPolicy {
    #[default]
    Strict,
    AllowSymmetric,
}

/// The expanded rules of a validated rule set, ready for matching.
#[derive(Clone, Debug)]
pub struct RuleTable {
    phi: u32,
    rules: Vec<ExpandedRule>,
    by_center: HashMap<Color, Vec<usize>>,
}

impl RuleTable {
    /// Normalizes, validates and expands `rs`. Conflicts are always fatal;
    /// adversary-controlled rules only under [`SymmetryPolicy::Strict`].
    pub fn build(rs: &RuleSet, policy: SymmetryPolicy) -> Result<Self, RuleSetError> {
        let report = validate(rs);
        let symmetric_fatal =
            policy == SymmetryPolicy::Strict && !report.adversary_controlled.is_empty();
        if !report.conflicts.is_empty() || symmetric_fatal {
            return Err(RuleSetError::NotWellDefined {
                conflicts: report.conflicts.len(),
                symmetric: report.adversary_controlled.len(),
            });
        }
        let (rules, _) = normalized_rules(rs);
        let normalized = rs.with_rules(rules)?;
        Ok(RuleTable::from_expanded(
            rs.phi(),
            expand_rotations(&normalized),
        ))
    }

    /// Builds a table without validation. Matching reports ambiguity lazily.
    pub fn from_expanded(phi: u32, rules: Vec<ExpandedRule>) -> Self {
        let mut by_center: HashMap<Color, Vec<usize>> = HashMap::new();
        for (i, r) in rules.iter().enumerate() {
            by_center
                .entry(r.pattern.center_color())
                .or_default()
                .push(i);
        }
        RuleTable {
            phi,
            rules,
            by_center,
        }
    }

    pub fn phi(&self) -> u32 {
        self.phi
    }

    pub fn rules(&self) -> &[ExpandedRule] {
        &self.rules
    }

    /// Output for a view, `(Idle, own color)` when nothing matches.
    ///
    /// When several rotations of one symmetric source rule match, the
    /// lowest rotation (the rule as written) wins.
    pub fn match_view(&self, v: &View) -> Result<(Move, Color), MatchError> {
        if v.phi() != self.phi {
            return Err(MatchError::PhiMismatch {
                expected: self.phi,
                found: v.phi(),
            });
        }
        let own = v.own_color();
        let Some(candidates) = self.by_center.get(&own) else {
            return Ok((Move::Idle, own));
        };
        let mut found: Option<&ExpandedRule> = None;
        for &i in candidates {
            let rule = &self.rules[i];
            if !rule.pattern.matches(v) {
                continue;
            }
            match found {
                None => found = Some(rule),
                Some(first) if first.source != rule.source && first.output() != rule.output() => {
                    return Err(MatchError::Ambiguous {
                        first: first.source,
                        second: rule.source,
                    });
                }
                Some(_) => {}
            }
        }
        Ok(found.map_or((Move::Idle, own), |r| r.output()))
    }
}

/// Convenience wrapper over [`RuleTable::match_view`].
pub fn match_view(table: &RuleTable, v: &View) -> Result<(Move, Color), MatchError> {
    table.match_view(v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{Configuration, Position};

    fn c(id: u8, l: &str) -> Color {
        Color::new(id, l).unwrap()
    }

    fn lone_mover(mv: Move) -> RuleSet {
        let r = c(0, "R");
        let pattern = RulePattern::sparse(1, r, &[]).unwrap();
        let init = Configuration::from_robots([(Position::ORIGIN, r)]).unwrap();
        RuleSet::new(
            "lone",
            1,
            vec![r],
            false,
            vec![Rule::new(pattern, mv, None)],
            init,
        )
        .unwrap()
    }

    #[test]
    fn normalize_range_one_is_noop() {
        let r = c(0, "R");
        let p =
            RulePattern::sparse(1, r, &[(Offset::new(1, 0), r), (Offset::new(0, 1), r)]).unwrap();
        let (n, w) = normalize_pattern(&p);
        assert_eq!(n, p);
        assert!(w.is_empty());
    }

    #[test]
    fn normalize_hides_cell_behind_neighbor() {
        let r = c(0, "R");
        let p = RulePattern::sparse(2, r, &[(Offset::new(1, 0), r)]).unwrap();
        assert_eq!(p.cell(Offset::new(2, 0)), Some(PatternCell::MustBeEmpty));
        let (n, w) = normalize_pattern(&p);
        assert_eq!(n.cell(Offset::new(2, 0)), Some(PatternCell::DontCare));
        assert_eq!(w, vec![Offset::new(2, 0)]);
        let (again, w2) = normalize_pattern(&n);
        assert_eq!(again, n);
        assert!(w2.is_empty());
    }

    #[test]
    fn normalize_all_empty_unchanged() {
        let p = RulePattern::sparse(2, c(0, "R"), &[]).unwrap();
        let (n, w) = normalize_pattern(&p);
        assert_eq!(n, p);
        assert!(w.is_empty());
    }

    #[test]
    fn symmetric_mover_expands_to_four_moves() {
        let rs = lone_mover(Move::Up);
        let e = expand_rotations(&rs);
        assert_eq!(e.len(), 4);
        assert!(e.iter().all(|x| x.pattern == e[0].pattern));
        let mut moves: Vec<_> = e.iter().map(|x| x.mv).collect();
        moves.sort();
        assert_eq!(moves, vec![Move::Up, Move::Down, Move::Left, Move::Right]);
    }

    #[test]
    fn symmetric_idle_rule_is_deduplicated_and_well_defined() {
        let rs = lone_mover(Move::Idle);
        assert_eq!(expand_rotations(&rs).len(), 1);
        assert!(validate(&rs).is_well_defined());
    }

    #[test]
    fn empty_rule_list_expands_to_nothing() {
        let rs = lone_mover(Move::Up).with_rules(vec![]).unwrap();
        assert!(expand_rotations(&rs).is_empty());
        assert!(validate(&rs).is_well_defined());
    }

    #[test]
    fn lone_mover_is_adversary_controlled() {
        let report = validate(&lone_mover(Move::Up));
        assert_eq!(report.adversary_controlled, vec![0]);
        assert!(report.conflicts.is_empty());
        assert!(!report.is_well_defined());
        assert!(RuleTable::build(&lone_mover(Move::Up), SymmetryPolicy::Strict).is_err());
        assert!(RuleTable::build(&lone_mover(Move::Up), SymmetryPolicy::AllowSymmetric).is_ok());
    }

    #[test]
    fn symmetric_rule_matches_as_written() {
        let rs = lone_mover(Move::Left);
        let table = RuleTable::build(&rs, SymmetryPolicy::AllowSymmetric).unwrap();
        let v = crate::grid::view_at(rs.initial(), Position::ORIGIN, 1).unwrap();
        assert_eq!(table.match_view(&v), Ok((Move::Left, c(0, "R"))));
    }

    #[test]
    fn unmatched_view_is_idle() {
        let rs = lone_mover(Move::Up);
        let table = RuleTable::build(&rs, SymmetryPolicy::AllowSymmetric).unwrap();
        let r = c(0, "R");
        let conf =
            Configuration::from_robots([(Position::ORIGIN, r), (Position::new(1, 0), r)]).unwrap();
        let v = crate::grid::view_at(&conf, Position::ORIGIN, 1).unwrap();
        assert_eq!(table.match_view(&v), Ok((Move::Idle, r)));
    }

    #[test]
    fn phi_mismatch_is_reported() {
        let rs = lone_mover(Move::Up);
        let table = RuleTable::build(&rs, SymmetryPolicy::AllowSymmetric).unwrap();
        let v = crate::grid::view_at(rs.initial(), Position::ORIGIN, 2).unwrap();
        assert_eq!(
            table.match_view(&v),
            Err(MatchError::PhiMismatch {
                expected: 1,
                found: 2
            })
        );
    }

    #[test]
    fn unvalidated_overlap_is_ambiguous() {
        let r = c(0, "R");
        let p = RulePattern::sparse(1, r, &[(Offset::new(1, 0), r)]).unwrap();
        let table = RuleTable::from_expanded(
            1,
            vec![
                ExpandedRule {
                    source: 0,
                    rotation: Rotation::IDENTITY,
                    pattern: p.clone(),
                    mv: Move::Up,
                    new_color: None,
                },
                ExpandedRule {
                    source: 1,
                    rotation: Rotation::IDENTITY,
                    pattern: p,
                    mv: Move::Down,
                    new_color: None,
                },
            ],
        );
        let conf =
            Configuration::from_robots([(Position::ORIGIN, r), (Position::new(1, 0), r)]).unwrap();
        let v = crate::grid::view_at(&conf, Position::ORIGIN, 1).unwrap();
        assert_eq!(
            table.match_view(&v),
            Err(MatchError::Ambiguous {
                first: 0,
                second: 1
            })
        );
    }

    #[test]
    fn structural_checks() {
        let r = c(0, "R");
        let q = c(1, "Q");
        let p = RulePattern::sparse(1, r, &[(Offset::new(1, 0), q)]).unwrap();
        let init = Configuration::from_robots([(Position::ORIGIN, r)]).unwrap();
        let err = RuleSet::new(
            "x",
            1,
            vec![r],
            false,
            vec![Rule::new(p.clone(), Move::Up, None)],
            init.clone(),
        );
        assert_eq!(err, Err(RuleSetError::UnknownColor("Q".into())));
        let err = RuleSet::new(
            "x",
            1,
            vec![r, q],
            false,
            vec![Rule::new(p.clone(), Move::Up, Some(q))],
            init.clone(),
        );
        assert_eq!(err, Err(RuleSetError::ColorChangeWithFixedLights(0)));
        let err = RuleSet::new(
            "x",
            2,
            vec![r, q],
            false,
            vec![Rule::new(p, Move::Up, None)],
            init.clone(),
        );
        assert!(matches!(
            err,
            Err(RuleSetError::PhiMismatch { rule: 0, .. })
        ));
        let err = RuleSet::new("x", 1, vec![q], false, vec![], init);
        assert!(matches!(err, Err(RuleSetError::SparseColorIds { .. })));
    }
}
