//! Fully synchronous rounds.
//!
//! Every robot looks at the same configuration, computes its move and new
//! color, and all moves and color changes are applied together at the end
//! of the round.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{EngineError, RuleSetError};
use crate::grid::{
    rotate_move, rotate_view, view_at, Color, Configuration, Move, Position, Rotation,
};
use crate::rules::{RuleSet, RuleTable, SymmetryPolicy};

/// How the adversary orients each robot's local frame.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum AdversaryStrategy {
    Identity,
    /// Deterministic in `(seed, round, position)`.
    SeededRandom(u64),
    /// Rotation 0 on even rounds, rotation 2 on odd rounds, for everyone.
    PingPong,
}

impl AdversaryStrategy {
    pub fn rotation(&self, round: u64, p: Position) -> Rotation {
        match *self {
            AdversaryStrategy::Identity => Rotation::IDENTITY,
            AdversaryStrategy::PingPong => {
                if round.is_multiple_of(2) {
                    Rotation::IDENTITY
                } else {
                    Rotation::HALF
                }
            }
            AdversaryStrategy::SeededRandom(seed) => {
                let key = seed
                    ^ round.rotate_left(17).wrapping_mul(0x9E37_79B9_7F4A_7C15)
                    ^ (p.x as u64)
                        .rotate_left(31)
                        .wrapping_mul(0xC2B2_AE3D_27D4_EB4F)
                    ^ (p.y as u64)
                        .rotate_left(47)
                        .wrapping_mul(0x1656_67B1_9E37_79F9);
                Rotation::new(ChaCha8Rng::seed_from_u64(key).gen_range(0..4))
            }
        }
    }

    pub fn seed(&self) -> Option<u64> {
        match self {
            AdversaryStrategy::SeededRandom(s) => Some(*s),
            _ => None,
        }
    }
}

impl fmt::Display for AdversaryStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AdversaryStrategy::Identity => f.write_str("identity"),
            AdversaryStrategy::SeededRandom(s) => write!(f, "random:{s}"),
            AdversaryStrategy::PingPong => f.write_str("pingpong"),
        }
    }
}

impl FromStr for AdversaryStrategy {
    type Err = String;

    /// `identity`, `pingpong` or `random:SEED`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "identity" => Ok(AdversaryStrategy::Identity),
            "pingpong" => Ok(AdversaryStrategy::PingPong),
            _ => {
                let seed = s
                    .strip_prefix("random:")
                    .ok_or_else(|| format!("unknown adversary {s:?}"))?;
                seed.parse()
                    .map(AdversaryStrategy::SeededRandom)
                    .map_err(|_| format!("bad seed {seed:?}"))
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum ViolationKind {
    NodeCollision,
    EdgeSwap,
}

impl ViolationKind {
    pub fn name(self) -> &'static str {
        match self {
            ViolationKind::NodeCollision => "node_collision",
            ViolationKind::EdgeSwap => "edge_swap",
        }
    }
}

/// An exclusiveness violation observed while executing round `round`
/// (the transition from configuration `round` to `round + 1`).
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ViolationEvent {
    pub round: u64,
    pub kind: ViolationKind,
    /// The target node for a collision, the two edge endpoints (smaller
    /// first) for a swap.
    pub positions: Vec<Position>,
}

/// One robot's decision in a round.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RobotStep {
    pub from: Position,
    pub to: Position,
    pub color: Color,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StepOutcome {
    pub configuration: Configuration,
    pub violations: Vec<ViolationEvent>,
    /// In source-position order.
    pub moves: Vec<RobotStep>,
}

/// Executes one round.
pub fn step(
    table: &RuleTable,
    colors: &[Color],
    c: &Configuration,
    adv: AdversaryStrategy,
    round: u64,
) -> Result<StepOutcome, EngineError> {
    let mut moves = Vec::with_capacity(c.len());
    for (p, own) in c.iter() {
        if !colors.contains(&own) {
            return Err(EngineError::UnknownColor {
                round,
                position: p,
                label: own.label().to_string(),
            });
        }
        let global = view_at(c, p, table.phi()).expect("p is occupied");
        let r = adv.rotation(round, p);
        let local = rotate_view(r, &global);
        let (local_move, color) = table
            .match_view(&local)
            .map_err(|source| EngineError::Match { round, source })?;
        let mv: Move = rotate_move(r.inverse(), local_move);
        moves.push(RobotStep {
            from: p,
            to: p + mv.offset(),
            color,
        });
    }

    let mut targets: BTreeMap<Position, Vec<Position>> = BTreeMap::new();
    for m in &moves {
        targets.entry(m.to).or_default().push(m.from);
    }
    if let Some((target, sources)) = targets.into_iter().find(|(_, s)| s.len() > 1) {
        return Err(EngineError::NodeCollision {
            round,
            target,
            sources,
        });
    }

    let dest: BTreeMap<Position, Position> = moves.iter().map(|m| (m.from, m.to)).collect();
    let mut violations = Vec::new();
    for m in &moves {
        if m.from < m.to && dest.get(&m.to) == Some(&m.from) {
            violations.push(ViolationEvent {
                round,
                kind: ViolationKind::EdgeSwap,
                positions: vec![m.from, m.to],
            });
        }
    }

    let configuration = moves.iter().map(|m| (m.to, m.color)).collect();
    Ok(StepOutcome {
        configuration,
        violations,
        moves,
    })
}

/// Round-indexed record of an execution.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Trace {
    pub rule_set_name: String,
    pub configurations: Vec<Configuration>,
    pub violations: Vec<ViolationEvent>,
    /// `robot_tracks[id][round]`. Ids follow the position order of the
    /// initial configuration; they exist for presentation only.
    pub robot_tracks: Vec<Vec<(Position, Color)>>,
}

impl Trace {
    pub fn new(rule_set_name: impl Into<String>, initial: Configuration) -> Self {
        let robot_tracks = initial.iter().map(|rc| vec![rc]).collect();
        Trace {
            rule_set_name: rule_set_name.into(),
            configurations: vec![initial],
            violations: Vec::new(),
            robot_tracks,
        }
    }

    /// Number of executed rounds.
    pub fn rounds(&self) -> u64 {
        self.configurations.len() as u64 - 1
    }

    pub fn last(&self) -> &Configuration {
        self.configurations
            .last()
            .expect("a trace holds at least the initial configuration")
    }

    fn push(&mut self, outcome: StepOutcome) {
        let slot: BTreeMap<Position, usize> = self
            .robot_tracks
            .iter()
            .enumerate()
            .map(|(id, t)| (t.last().expect("non-empty track").0, id))
            .collect();
        for m in &outcome.moves {
            let id = slot[&m.from];
            self.robot_tracks[id].push((m.to, m.color));
        }
        self.violations.extend(outcome.violations);
        self.configurations.push(outcome.configuration);
    }

    /// The first `rounds` rounds of this trace.
    pub fn prefix(&self, rounds: u64) -> Trace {
        let n = (rounds as usize + 1).min(self.configurations.len());
        Trace {
            rule_set_name: self.rule_set_name.clone(),
            configurations: self.configurations[..n].to_vec(),
            violations: self
                .violations
                .iter()
                .filter(|v| (v.round as usize) + 1 < n)
                .cloned()
                .collect(),
            robot_tracks: self.robot_tracks.iter().map(|t| t[..n].to_vec()).collect(),
        }
    }
}

/// An execution in progress.
#[derive(Clone, Debug)]
pub struct Simulation {
    table: RuleTable,
    colors: Vec<Color>,
    adversary: AdversaryStrategy,
    trace: Trace,
}

impl Simulation {
    pub fn new(
        rs: &RuleSet,
        adversary: AdversaryStrategy,
        policy: SymmetryPolicy,
    ) -> Result<Self, RuleSetError> {
        Ok(Simulation {
            table: RuleTable::build(rs, policy)?,
            colors: rs.colors().to_vec(),
            adversary,
            trace: Trace::new(rs.name(), rs.initial().clone()),
        })
    }

    pub fn from_configuration(
        rs: &RuleSet,
        initial: Configuration,
        adversary: AdversaryStrategy,
        policy: SymmetryPolicy,
    ) -> Result<Self, RuleSetError> {
        let mut sim = Simulation::new(rs, adversary, policy)?;
        sim.trace = Trace::new(rs.name(), initial);
        Ok(sim)
    }

    pub fn trace(&self) -> &Trace {
        &self.trace
    }

    pub fn into_trace(self) -> Trace {
        self.trace
    }

    pub fn current(&self) -> &Configuration {
        self.trace.last()
    }

    pub fn round(&self) -> u64 {
        self.trace.rounds()
    }

    /// Advances one round and returns the new configuration.
    pub fn advance(&mut self) -> Result<&Configuration, EngineError> {
        let outcome = step(
            &self.table,
            &self.colors,
            self.trace.last(),
            self.adversary,
            self.trace.rounds(),
        )?;
        self.trace.push(outcome);
        Ok(self.trace.last())
    }

    pub fn advance_by(&mut self, rounds: u64) -> Result<(), EngineError> {
        for _ in 0..rounds {
            self.advance()?;
        }
        Ok(())
    }
}

/// Runs a well-defined rule set from its initial configuration.
pub fn run(rs: &RuleSet, rounds: u64, adv: AdversaryStrategy) -> Result<Trace, EngineError> {
    run_with(
        rs,
        rs.initial().clone(),
        rounds,
        adv,
        SymmetryPolicy::Strict,
    )
}

pub fn run_with(
    rs: &RuleSet,
    initial: Configuration,
    rounds: u64,
    adv: AdversaryStrategy,
    policy: SymmetryPolicy,
) -> Result<Trace, EngineError> {
    let mut sim = Simulation::from_configuration(rs, initial, adv, policy)?;
    sim.advance_by(rounds)?;
    Ok(sim.into_trace())
}

/// Every node occupied at some recorded round.
pub fn visited_set(t: &Trace) -> BTreeSet<Position> {
    t.configurations
        .iter()
        .flat_map(|c| c.positions())
        .collect()
}
