//! Mechanical checks of the exploration claims.
//!
//! Each built-in algorithm proceeds in phases. At the start of phase `i`
//! the configuration is a fixed set of components (the moving group and
//! the beacons), each translated by a vector linear in `i`. During phase
//! `i` the robots visit every node on the boundary of a growing polygon.

use std::collections::BTreeSet;

use serde::Serialize;

use crate::algorithms::{builtin, BuiltinId};
use crate::engine::{visited_set, AdversaryStrategy, Simulation, Trace, ViolationKind};
use crate::error::VerifyError;
use crate::grid::{
    farthest_pair_distance, translate_configuration, Configuration, Position, Translation,
};
use crate::rules::{RuleSet, SymmetryPolicy};

/// A group of robots that is translated by `(dx * i, dy * i)` in phase `i`.
#[derive(Clone, Debug)]
pub struct Component {
    pub robots: Vec<(Position, &'static str)>,
    pub per_phase: (i64, i64),
}

#[derive(Clone, Debug)]
pub struct PhaseLayout {
    pub algorithm: BuiltinId,
    pub moving_group: Component,
    pub beacons: Vec<Component>,
}

fn component(robots: &[(i64, i64, &'static str)], per_phase: (i64, i64)) -> Component {
    Component {
        robots: robots
            .iter()
            .map(|(x, y, l)| (Position::new(*x, *y), *l))
            .collect(),
        per_phase,
    }
}

impl PhaseLayout {
    pub fn of(algorithm: BuiltinId) -> PhaseLayout {
        match algorithm {
            BuiltinId::A1Fixed => PhaseLayout {
                algorithm,
                moving_group: component(&[(-1, 0, "F"), (0, 0, "L")], (-1, -1)),
                beacons: vec![
                    component(&[(0, -1, "B")], (-1, -1)),
                    component(&[(2, 0, "B")], (1, -1)),
                    component(&[(1, 2, "B")], (1, 1)),
                    component(&[(-2, 1, "B")], (-1, 1)),
                ],
            },
            BuiltinId::A1Modifiable => PhaseLayout {
                algorithm,
                moving_group: component(&[(1, -1, "B"), (1, -2, "Y")], (-2, 1)),
                beacons: vec![
                    component(&[(0, 0, "G")], (-2, 1)),
                    component(&[(3, -3, "Y")], (1, -2)),
                    component(&[(2, 1, "R")], (1, 1)),
                ],
            },
            BuiltinId::A2Nolights => PhaseLayout {
                algorithm,
                moving_group: component(&[(3, 2, "R"), (3, 3, "R"), (4, 3, "R")], (1, 1)),
                beacons: vec![
                    component(&[(0, 0, "R")], (-1, -1)),
                    component(&[(5, -1, "R")], (1, -1)),
                    component(&[(5, 4, "R")], (1, 1)),
                    component(&[(1, 5, "R")], (-1, 1)),
                ],
            },
        }
    }

    pub fn components(&self) -> impl Iterator<Item = &Component> {
        std::iter::once(&self.moving_group).chain(&self.beacons)
    }

    pub fn configuration(&self, rs: &RuleSet, i: u64) -> Configuration {
        let i = i as i64;
        let mut out = Configuration::new();
        for comp in self.components() {
            let base: Configuration = comp
                .robots
                .iter()
                .map(|(p, l)| {
                    (
                        *p,
                        rs.color_by_label(l)
                            .expect("phase components use declared colors"),
                    )
                })
                .collect();
            let moved = translate_configuration(
                &base,
                Translation::new(comp.per_phase.0 * i, comp.per_phase.1 * i),
            );
            out = out.union(&moved).expect("phase components never overlap");
        }
        out
    }
}

/// The configuration at the start of phase `i`.
pub fn expected_configuration(algo: BuiltinId, i: u64) -> Configuration {
    PhaseLayout::of(algo).configuration(&builtin(algo), i)
}

/// `rounds[i]` is the first round at which phase `i` starts.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PhaseDetection {
    pub rounds: Vec<u64>,
}

impl PhaseDetection {
    pub fn durations(&self) -> Vec<u64> {
        self.rounds.windows(2).map(|w| w[1] - w[0]).collect()
    }
}

/// Finds phases `0..=max_i` in order, each strictly after the previous one.
pub fn detect_phases(
    t: &Trace,
    algo: BuiltinId,
    max_i: u64,
) -> Result<PhaseDetection, VerifyError> {
    let layout = PhaseLayout::of(algo);
    let rs = builtin(algo);
    let mut rounds = Vec::new();
    let mut from = 0usize;
    for i in 0..=max_i {
        let want = layout.configuration(&rs, i);
        let at = t.configurations[from..]
            .iter()
            .position(|c| *c == want)
            .ok_or(VerifyError::PhaseMissing(i))?;
        rounds.push((from + at) as u64);
        from += at + 1;
    }
    Ok(PhaseDetection { rounds })
}

fn segment(from: Position, to: Position) -> impl Iterator<Item = Position> {
    let d = to - from;
    let steps = d.dx.abs().max(d.dy.abs());
    let (sx, sy) = (d.dx.signum(), d.dy.signum());
    (0..=steps).map(move |k| Position::new(from.x + sx * k, from.y + sy * k))
}

fn polygon(corners: &[Position]) -> BTreeSet<Position> {
    corners
        .iter()
        .zip(corners.iter().cycle().skip(1))
        .flat_map(|(a, b)| segment(*a, *b))
        .collect()
}

/// Lattice nodes on the boundary of the polygon swept during phase `i`.
pub fn expected_visited_boundary(algo: BuiltinId, i: u64) -> BTreeSet<Position> {
    let i = i as i64;
    let p = Position::new;
    match algo {
        BuiltinId::A1Fixed => polygon(&[
            p(-1 - i, -i),
            p(1 + i, -i),
            p(1 + i, 1 + i),
            p(-1 - i, 1 + i),
        ]),
        // the hypotenuse has slope -1, so the diagonal walk hits every node on it
        BuiltinId::A1Modifiable => polygon(&[p(-2 * i, i), p(2 + i, -2 - 2 * i), p(2 + i, i)]),
        BuiltinId::A2Nolights => {
            let mut s = polygon(&[
                p(2 - i, 1 - i),
                p(4 + i, 1 - i),
                p(4 + i, 3 + i),
                p(2 - i, 3 + i),
            ]);
            if i == 0 {
                s.insert(p(3, 2));
            }
            s
        }
    }
}

/// Whether the closed polygon of phase `i` contains `q`.
pub fn inside_polygon(algo: BuiltinId, i: u64, q: Position) -> bool {
    let i = i as i64;
    match algo {
        BuiltinId::A1Fixed => (-1 - i..=1 + i).contains(&q.x) && (-i..=1 + i).contains(&q.y),
        BuiltinId::A1Modifiable => q.y <= i && q.x <= 2 + i && q.x + q.y >= -i,
        BuiltinId::A2Nolights => (2 - i..=4 + i).contains(&q.x) && (1 - i..=3 + i).contains(&q.y),
    }
}

/// Whether every boundary node of phase `i` was visited by the time phase
/// `i + 1` starts.
pub fn check_boundary_coverage(t: &Trace, algo: BuiltinId, i: u64) -> Result<bool, VerifyError> {
    let phases = match detect_phases(t, algo, i + 1) {
        Ok(p) => p,
        Err(VerifyError::PhaseMissing(k)) if k == i + 1 => {
            return Err(VerifyError::TraceTooShort { phase: i })
        }
        Err(e) => return Err(e),
    };
    Ok(boundary_covered(t, algo, i, &phases))
}

/// [`check_boundary_coverage`] with phases already detected.
pub fn boundary_covered(t: &Trace, algo: BuiltinId, i: u64, phases: &PhaseDetection) -> bool {
    let end = phases.rounds[i as usize + 1];
    let visited = visited_set(&t.prefix(end));
    expected_visited_boundary(algo, i).is_subset(&visited)
}

/// Runs `rs` until the square `[-r, r]²` has been visited; returns the round.
pub fn verify_radius_coverage(
    rs: &RuleSet,
    radius: u64,
    round_budget: u64,
) -> Result<u64, VerifyError> {
    verify_radius_coverage_with(
        rs,
        radius,
        round_budget,
        AdversaryStrategy::Identity,
        SymmetryPolicy::Strict,
    )
}

pub fn verify_radius_coverage_with(
    rs: &RuleSet,
    radius: u64,
    round_budget: u64,
    adv: AdversaryStrategy,
    policy: SymmetryPolicy,
) -> Result<u64, VerifyError> {
    let r = radius as i64;
    let mut missing: BTreeSet<Position> = (-r..=r)
        .flat_map(|x| (-r..=r).map(move |y| Position::new(x, y)))
        .collect();
    let mut sim = Simulation::new(rs, adv, policy).map_err(crate::error::EngineError::from)?;
    loop {
        for p in sim.current().positions() {
            missing.remove(&p);
        }
        if missing.is_empty() {
            return Ok(sim.round());
        }
        if sim.round() >= round_budget {
            let witness = *missing.iter().next().expect("non-empty");
            return Err(VerifyError::BudgetExhausted {
                budget: round_budget,
                witness,
            });
        }
        sim.advance()?;
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct AuditCounts {
    pub node_collisions: u64,
    pub edge_swaps: u64,
}

pub fn exclusiveness_audit(t: &Trace) -> AuditCounts {
    let mut counts = AuditCounts::default();
    for v in &t.violations {
        match v.kind {
            ViolationKind::NodeCollision => counts.node_collisions += 1,
            ViolationKind::EdgeSwap => counts.edge_swaps += 1,
        }
    }
    counts
}

/// Largest farthest-pair distance within each complete phase.
pub fn phase_distances(t: &Trace, phases: &PhaseDetection) -> Vec<u64> {
    phases
        .rounds
        .windows(2)
        .map(|w| {
            t.configurations[w[0] as usize..w[1] as usize]
                .iter()
                .map(|c| farthest_pair_distance(c).unwrap_or(0))
                .max()
                .unwrap_or(0)
        })
        .collect()
}

/// Finite stand-in for "the farthest-pair distance tends to infinity": the
/// per-phase maximum never decreases and never stalls for two phases in a
/// row.
pub fn distance_divergence(t: &Trace, phases: &PhaseDetection) -> Result<bool, VerifyError> {
    if phases.rounds.len() < 3 {
        return Err(VerifyError::TooFewPhases(phases.rounds.len()));
    }
    let d = phase_distances(t, phases);
    let steps: Vec<(u64, u64)> = d.windows(2).map(|w| (w[0], w[1])).collect();
    if steps.iter().any(|(a, b)| b < a) {
        return Ok(false);
    }
    let strict: Vec<bool> = steps.iter().map(|(a, b)| b > a).collect();
    let ok = match strict.len() {
        0 => false,
        1 => strict[0],
        _ => strict.windows(2).all(|w| w[0] || w[1]),
    };
    Ok(ok)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PhaseReport {
    pub phase: u64,
    pub round: u64,
    /// `None` for the last detected phase.
    pub boundary_covered: Option<bool>,
}

/// Everything `verify` checks for one built-in.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct VerificationReport {
    pub algorithm: BuiltinId,
    pub rounds_run: u64,
    pub phases: Vec<PhaseReport>,
    pub phases_detected: bool,
    pub boundaries_covered: bool,
    pub distance_divergence: bool,
    pub audit: AuditCounts,
    /// Exclusive algorithms must show no swaps; every algorithm must show no
    /// collision.
    pub exclusiveness_as_claimed: bool,
    pub failure: Option<String>,
}

impl VerificationReport {
    pub fn passed(&self) -> bool {
        self.phases_detected
            && self.boundaries_covered
            && self.distance_divergence
            && self.exclusiveness_as_claimed
    }
}

/// Generous upper bound on the rounds needed to reach phase `k`; the phase
/// length of every built-in is linear in the phase index.
pub fn round_budget_for_phase(k: u64) -> u64 {
    40 * (k + 2) * (k + 2) + 200
}

/// Runs a built-in until phase `max_phase` starts and checks every claim
/// along the way.
pub fn verify_builtin(algo: BuiltinId, max_phase: u64) -> VerificationReport {
    let rs = builtin(algo);
    let layout = PhaseLayout::of(algo);
    let budget = round_budget_for_phase(max_phase);
    let mut report = VerificationReport {
        algorithm: algo,
        rounds_run: 0,
        phases: Vec::new(),
        phases_detected: false,
        boundaries_covered: false,
        distance_divergence: false,
        audit: AuditCounts::default(),
        exclusiveness_as_claimed: false,
        failure: None,
    };
    let mut sim = match Simulation::new(&rs, AdversaryStrategy::Identity, SymmetryPolicy::Strict) {
        Ok(s) => s,
        Err(e) => {
            report.failure = Some(e.to_string());
            return report;
        }
    };
    let final_config = layout.configuration(&rs, max_phase);
    while *sim.current() != final_config && sim.round() < budget {
        if let Err(e) = sim.advance() {
            report.failure = Some(e.to_string());
            report.rounds_run = sim.round();
            return report;
        }
    }
    let trace = sim.into_trace();
    report.rounds_run = trace.rounds();
    report.audit = exclusiveness_audit(&trace);
    report.exclusiveness_as_claimed =
        report.audit.node_collisions == 0 && (!algo.exclusive() || report.audit.edge_swaps == 0);

    let phases = match detect_phases(&trace, algo, max_phase) {
        Ok(p) => p,
        Err(e) => {
            report.failure = Some(e.to_string());
            return report;
        }
    };
    report.phases_detected = true;
    report.phases = phases
        .rounds
        .iter()
        .enumerate()
        .map(|(i, &round)| PhaseReport {
            phase: i as u64,
            round,
            boundary_covered: (i + 1 < phases.rounds.len())
                .then(|| boundary_covered(&trace, algo, i as u64, &phases)),
        })
        .collect();
    report.boundaries_covered = report
        .phases
        .iter()
        .all(|p| p.boundary_covered != Some(false));
    match distance_divergence(&trace, &phases) {
        Ok(b) => report.distance_divergence = b,
        Err(e) => report.failure = Some(e.to_string()),
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::run;

    fn set(points: &[(i64, i64)]) -> BTreeSet<Position> {
        points.iter().map(|(x, y)| Position::new(*x, *y)).collect()
    }

    #[test]
    fn phase_zero_is_the_initial_configuration() {
        for id in BuiltinId::ALL {
            assert_eq!(
                &expected_configuration(id, 0),
                builtin(id).initial(),
                "{id}"
            );
        }
    }

    #[test]
    fn a2_phase_one() {
        let got: BTreeSet<Position> = expected_configuration(BuiltinId::A2Nolights, 1)
            .positions()
            .collect();
        assert_eq!(
            got,
            set(&[(4, 3), (4, 4), (5, 4), (-1, -1), (6, -2), (6, 5), (0, 6)])
        );
    }

    #[test]
    fn a1_modifiable_phase_one() {
        let rs = builtin(BuiltinId::A1Modifiable);
        let c = expected_configuration(BuiltinId::A1Modifiable, 1);
        let expect = [
            ((-2, 1), "G"),
            ((-1, 0), "B"),
            ((-1, -1), "Y"),
            ((4, -5), "Y"),
            ((3, 2), "R"),
        ];
        let want: Configuration = expect
            .iter()
            .map(|((x, y), l)| (Position::new(*x, *y), rs.color_by_label(l).unwrap()))
            .collect();
        assert_eq!(c, want);
    }

    #[test]
    fn boundary_examples() {
        assert_eq!(
            expected_visited_boundary(BuiltinId::A1Fixed, 0),
            set(&[(-1, 0), (0, 0), (1, 0), (1, 1), (0, 1), (-1, 1)])
        );
        let a2 = expected_visited_boundary(BuiltinId::A2Nolights, 0);
        assert_eq!(a2.len(), 9);
        assert!(a2.contains(&Position::new(3, 2)));
        assert_eq!(
            expected_visited_boundary(BuiltinId::A1Modifiable, 0),
            set(&[(0, 0), (1, -1), (2, -2), (2, -1), (2, 0), (1, 0)])
        );
    }

    /// Brute-force oracle: points of the polygon with a 4-neighbour outside it,
    /// found by scanning a window instead of walking segments.
    fn boundary_by_scan(algo: BuiltinId, i: u64) -> BTreeSet<Position> {
        let n = i as i64 + 4;
        let mut out = BTreeSet::new();
        for x in -3 * n..=3 * n {
            for y in -3 * n..=3 * n {
                let q = Position::new(x, y);
                let on_edge = inside_polygon(algo, i, q)
                    && [(1, 0), (-1, 0), (0, 1), (0, -1)]
                        .iter()
                        .any(|(dx, dy)| !inside_polygon(algo, i, Position::new(x + dx, y + dy)));
                if on_edge {
                    out.insert(q);
                }
            }
        }
        out
    }

    #[test]
    fn boundaries_agree_with_scan() {
        for id in BuiltinId::ALL {
            for i in 0..6 {
                let mut want = boundary_by_scan(id, i);
                if id == BuiltinId::A2Nolights && i == 0 {
                    want.insert(Position::new(3, 2));
                }
                assert_eq!(expected_visited_boundary(id, i), want, "{id} phase {i}");
            }
        }
    }

    #[test]
    fn consecutive_boundaries_are_disjoint() {
        for id in BuiltinId::ALL {
            for i in 0..10 {
                let a = expected_visited_boundary(id, i);
                let b = expected_visited_boundary(id, i + 1);
                assert!(a.is_disjoint(&b), "{id} phases {i} and {}", i + 1);
            }
        }
    }

    #[test]
    fn boundaries_tile_the_polygon() {
        let n = 10;
        for id in BuiltinId::ALL {
            let union: BTreeSet<Position> = (0..=n)
                .flat_map(|i| expected_visited_boundary(id, i))
                .collect();
            for x in -20..=20 {
                for y in -20..=20 {
                    let q = Position::new(x, y);
                    if inside_polygon(id, n, q) {
                        assert!(
                            union.contains(&q),
                            "{id}: {q} inside ring {n} but on no boundary"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn detect_phases_on_a1_fixed() {
        let t = run(
            &builtin(BuiltinId::A1Fixed),
            2000,
            AdversaryStrategy::Identity,
        )
        .unwrap();
        let p = detect_phases(&t, BuiltinId::A1Fixed, 10).unwrap();
        assert_eq!(p.rounds[0], 0);
        assert!(p.rounds.windows(2).all(|w| w[0] < w[1]));
        let d = p.durations();
        // the phase length grows by the same amount every phase
        let growth: BTreeSet<i64> = d.windows(2).map(|w| w[1] as i64 - w[0] as i64).collect();
        assert_eq!(growth.len(), 1, "durations {d:?}");
        assert!(*growth.iter().next().unwrap() > 0);
    }

    #[test]
    fn truncated_trace_is_a_precondition_error() {
        let t = run(
            &builtin(BuiltinId::A2Nolights),
            5,
            AdversaryStrategy::Identity,
        )
        .unwrap();
        assert_eq!(
            check_boundary_coverage(&t, BuiltinId::A2Nolights, 0),
            Err(VerifyError::TraceTooShort { phase: 0 })
        );
    }

    #[test]
    fn deleting_a_rule_breaks_the_phases() {
        let rs = builtin(BuiltinId::A1Fixed);
        let mut rules = rs.rules().to_vec();
        rules.remove(5);
        let broken = rs.with_rules(rules).unwrap();
        let t = run(&broken, 500, AdversaryStrategy::Identity).unwrap();
        let r = check_boundary_coverage(&t, BuiltinId::A1Fixed, 0);
        assert!(matches!(
            r,
            Ok(false) | Err(VerifyError::PhaseMissing(_)) | Err(VerifyError::TraceTooShort { .. })
        ));
    }

    #[test]
    fn frozen_configuration_does_not_diverge() {
        let rs = builtin(BuiltinId::A2Nolights).with_rules(vec![]).unwrap();
        let t = run(&rs, 30, AdversaryStrategy::Identity).unwrap();
        let phases = PhaseDetection {
            rounds: vec![0, 10, 20, 30],
        };
        assert_eq!(distance_divergence(&t, &phases), Ok(false));
        assert_eq!(
            distance_divergence(
                &t,
                &PhaseDetection {
                    rounds: vec![0, 10]
                }
            ),
            Err(VerifyError::TooFewPhases(2))
        );
    }

    #[test]
    fn radius_zero_covered_immediately() {
        for id in [BuiltinId::A1Fixed, BuiltinId::A1Modifiable] {
            assert_eq!(verify_radius_coverage(&builtin(id), 0, 10), Ok(0));
        }
    }

    #[test]
    fn lone_robot_exhausts_budget() {
        use crate::grid::{Color, Move};
        use crate::rules::{Rule, RulePattern};
        let r = Color::new(0, "R").unwrap();
        let init = Configuration::from_robots([(Position::ORIGIN, r)]).unwrap();
        let rule = Rule::new(RulePattern::sparse(1, r, &[]).unwrap(), Move::Up, None);
        let rs = RuleSet::new("lone", 1, vec![r], false, vec![rule], init).unwrap();
        let res = verify_radius_coverage_with(
            &rs,
            1,
            100,
            AdversaryStrategy::PingPong,
            SymmetryPolicy::AllowSymmetric,
        );
        assert!(matches!(
            res,
            Err(VerifyError::BudgetExhausted { budget: 100, .. })
        ));
    }

    #[test]
    fn audit_a1_fixed_and_a2() {
        let t = run(
            &builtin(BuiltinId::A1Fixed),
            2000,
            AdversaryStrategy::Identity,
        )
        .unwrap();
        let a = exclusiveness_audit(&t);
        assert_eq!(a.node_collisions, 0);
        assert!(a.edge_swaps >= 1);
        let t = run(
            &builtin(BuiltinId::A2Nolights),
            2000,
            AdversaryStrategy::Identity,
        )
        .unwrap();
        assert_eq!(
            exclusiveness_audit(&t),
            AuditCounts {
                node_collisions: 0,
                edge_swaps: 0
            }
        );
    }
}
