use std::collections::BTreeSet;

use gridswarm::io::{parse_rule_file, serialize_rule_set};
use gridswarm::verify::{distance_divergence, PhaseDetection};
use gridswarm::*;

fn fixed() -> RuleSet {
    builtin(BuiltinId::A1Fixed)
}

fn config(rs: &RuleSet, robots: &[(i64, i64, &str)]) -> Configuration {
    Configuration::from_robots(
        robots
            .iter()
            .map(|(x, y, l)| (Position::new(*x, *y), rs.color_by_label(l).unwrap())),
    )
    .unwrap()
}

fn points(ps: &[(i64, i64)]) -> BTreeSet<Position> {
    ps.iter().map(|(x, y)| Position::new(*x, *y)).collect()
}

fn lone_mover() -> RuleSet {
    let r = Color::new(0, "R").unwrap();
    let rule = Rule::new(RulePattern::sparse(1, r, &[]).unwrap(), Move::Up, None);
    let init = Configuration::from_robots([(Position::ORIGIN, r)]).unwrap();
    RuleSet::new("lone", 1, vec![r], false, vec![rule], init).unwrap()
}

#[test]
fn straight_step() {
    let rs = fixed();
    let start = config(&rs, &[(0, 0, "L"), (1, 0, "F")]);
    let t = run_with(
        &rs,
        start,
        1,
        AdversaryStrategy::Identity,
        SymmetryPolicy::Strict,
    )
    .unwrap();
    assert_eq!(t.last(), &config(&rs, &[(0, 1, "L"), (1, 1, "F")]));
    assert!(t.violations.is_empty());
}

/// The four configurations of the left turn in front of a beacon.
fn turn_frames(rs: &RuleSet) -> [Configuration; 4] {
    [
        config(rs, &[(0, 0, "L"), (1, 0, "F"), (0, 1, "B")]),
        config(rs, &[(0, 0, "L"), (1, 1, "F"), (0, 1, "B")]),
        config(rs, &[(0, 0, "L"), (0, 1, "F"), (1, 1, "B")]),
        config(rs, &[(-1, 0, "L"), (-1, 1, "F"), (1, 2, "B")]),
    ]
}

#[test]
fn three_round_turn() {
    let rs = fixed();
    let frames = turn_frames(&rs);
    let t = run_with(
        &rs,
        frames[0].clone(),
        3,
        AdversaryStrategy::Identity,
        SymmetryPolicy::Strict,
    )
    .unwrap();
    assert_eq!(t.configurations, frames.to_vec());
    assert_eq!(t.violations.len(), 1);
    assert_eq!(t.violations[0].kind, ViolationKind::EdgeSwap);
    assert_eq!(t.violations[0].round, 1);
    assert_eq!(
        t.violations[0].positions,
        vec![Position::new(0, 1), Position::new(1, 1)]
    );
}

#[test]
fn turn_visits_the_union_of_its_frames() {
    let rs = fixed();
    let frames = turn_frames(&rs);
    let t = run_with(
        &rs,
        frames[0].clone(),
        3,
        AdversaryStrategy::Identity,
        SymmetryPolicy::Strict,
    )
    .unwrap();
    let want = points(&[(0, 0), (1, 0), (0, 1), (1, 1), (1, 2), (-1, 1), (-1, 0)]);
    assert_eq!(visited_set(&t), want);
}

#[test]
fn zero_rounds() {
    let rs = fixed();
    let t = run(&rs, 0, AdversaryStrategy::Identity).unwrap();
    assert_eq!(t.configurations, vec![rs.initial().clone()]);
    assert_eq!(visited_set(&t), rs.initial().positions().collect());
}

#[test]
fn empty_configuration_stays_empty() {
    let rs = fixed();
    let t = run_with(
        &rs,
        Configuration::new(),
        3,
        AdversaryStrategy::PingPong,
        SymmetryPolicy::Strict,
    )
    .unwrap();
    assert!(t.configurations.iter().all(Configuration::is_empty));
}

#[test]
fn idle_robots_visit_only_their_start() {
    let rs = fixed().with_rules(vec![]).unwrap();
    let t = run(&rs, 10, AdversaryStrategy::Identity).unwrap();
    assert_eq!(visited_set(&t), rs.initial().positions().collect());
}

#[test]
fn lone_robot_under_ping_pong_oscillates() {
    let rs = lone_mover();
    let t = run_with(
        &rs,
        rs.initial().clone(),
        100,
        AdversaryStrategy::PingPong,
        SymmetryPolicy::AllowSymmetric,
    )
    .unwrap();
    let path: Vec<Position> = t
        .configurations
        .iter()
        .map(|c| c.positions().next().unwrap())
        .collect();
    let (a, b) = (Position::new(0, 0), Position::new(0, 1));
    for (r, p) in path.iter().enumerate() {
        assert_eq!(*p, if r % 2 == 0 { a } else { b }, "round {r}");
    }
    assert_eq!(visited_set(&t), points(&[(0, 0), (0, 1)]));
    let phases = PhaseDetection {
        rounds: vec![0, 10, 20, 30],
    };
    assert_eq!(distance_divergence(&t, &phases), Ok(false));
}

#[test]
fn lone_mover_is_refused_under_the_strict_policy() {
    let rs = lone_mover();
    assert!(run(&rs, 1, AdversaryStrategy::Identity).is_err());
}

#[test]
fn matching_examples() {
    let rs = fixed();
    let table = RuleTable::build(&rs, SymmetryPolicy::Strict).unwrap();
    let l = rs.color_by_label("L").unwrap();

    let v = view_at(
        &config(&rs, &[(0, 0, "L"), (1, 0, "F")]),
        Position::ORIGIN,
        1,
    )
    .unwrap();
    assert_eq!(table.match_view(&v), Ok((Move::Up, l)));

    let v = view_at(
        &config(&rs, &[(0, 0, "L"), (1, 0, "F"), (0, 1, "B")]),
        Position::ORIGIN,
        1,
    )
    .unwrap();
    assert_eq!(table.match_view(&v), Ok((Move::Idle, l)));

    let rs = builtin(BuiltinId::A1Modifiable);
    let table = RuleTable::build(&rs, SymmetryPolicy::Strict).unwrap();
    let v = view_at(
        &config(&rs, &[(0, 0, "Y"), (0, 1, "B")]),
        Position::ORIGIN,
        1,
    )
    .unwrap();
    assert_eq!(
        table.match_view(&v),
        Ok((Move::Right, rs.color_by_label("P").unwrap()))
    );
}

#[test]
fn view_examples() {
    let r = Color::new(0, "R").unwrap();
    let row = Configuration::from_robots((0..3).map(|x| (Position::new(x, 0), r))).unwrap();
    let v = view_at(&row, Position::ORIGIN, 2).unwrap();
    assert_eq!(v.cell(Offset::new(1, 0)), Some(CellState::Occupied(r)));
    assert_eq!(v.cell(Offset::new(2, 0)), Some(CellState::Occluded));

    let diag =
        Configuration::from_robots([(Position::ORIGIN, r), (Position::new(1, 1), r)]).unwrap();
    let v = view_at(&diag, Position::ORIGIN, 2).unwrap();
    assert_eq!(v.cell(Offset::new(1, 1)), Some(CellState::Occupied(r)));
}

#[test]
fn farthest_pair_of_the_six_robot_start() {
    let c = fixed().initial().clone();
    let brute = c
        .positions()
        .flat_map(|p| c.positions().map(move |q| manhattan_distance(p, q)))
        .max()
        .unwrap();
    assert_eq!(brute, 5);
    assert_eq!(farthest_pair_distance(&c), Ok(5));
}

#[test]
fn mutated_controls_fail_validation() {
    let rs = fixed();
    let mut rules = rs.rules().to_vec();
    let mut dup = rules[1].clone();
    dup.mv = Move::Down;
    rules.push(dup);
    let report = validate(&rs.with_rules(rules).unwrap());
    assert_eq!(report.conflicts.len(), 1, "{report}");

    let report = validate(&lone_mover());
    assert_eq!(report.adversary_controlled, vec![0]);
    assert!(!report.is_well_defined());
}

#[test]
fn builtin_rule_files_round_trip() {
    for id in BuiltinId::ALL {
        let rs = builtin(id);
        let text = serialize_rule_set(&rs);
        assert_eq!(parse_rule_file(&text).unwrap(), rs, "{id}");
        assert_eq!(
            serialize_rule_set(&parse_rule_file(&text).unwrap()),
            text,
            "{id}"
        );
    }
}
