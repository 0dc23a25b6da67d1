//! Strategies and property checks shared by the property suite and the
//! acceptance harness.

#![allow(dead_code)]

use std::collections::BTreeMap;

use gridswarm::grid::rotate_configuration;
use gridswarm::*;
use proptest::prelude::*;
use proptest::test_runner::TestCaseError;

pub const CASES: u32 = 1000;

pub fn builtin_id() -> impl Strategy<Value = BuiltinId> {
    prop::sample::select(BuiltinId::ALL.to_vec())
}

pub fn rotation() -> impl Strategy<Value = Rotation> {
    (0i64..4).prop_map(Rotation::new)
}

/// A configuration around the origin with the origin occupied; `fill` is
/// the per-node occupancy probability in percent.
pub fn neighbourhood(colors: Vec<Color>, reach: i64) -> impl Strategy<Value = Configuration> {
    let side = (2 * reach + 1) as usize;
    let n = colors.len();
    (
        prop::collection::vec((0u8..100, 0..n), side * side),
        0..n,
        5u8..60,
    )
        .prop_map(move |(cells, center, fill)| {
            let mut robots = BTreeMap::new();
            for (k, (coin, col)) in cells.into_iter().enumerate() {
                if coin < fill {
                    let p = Position::new(
                        k as i64 % side as i64 - reach,
                        k as i64 / side as i64 - reach,
                    );
                    robots.insert(p, colors[col]);
                }
            }
            robots.insert(Position::ORIGIN, colors[center]);
            robots.into_iter().collect()
        })
}

pub fn builtin_with_neighbourhood() -> impl Strategy<Value = (BuiltinId, Configuration)> {
    builtin_id().prop_flat_map(|id| {
        let rs = builtin(id);
        (
            Just(id),
            neighbourhood(rs.colors().to_vec(), 2 * rs.phi() as i64),
        )
    })
}

pub fn matching_equivariance(
    id: BuiltinId,
    c: &Configuration,
    r: Rotation,
) -> Result<(), TestCaseError> {
    let rs = builtin(id);
    let table = RuleTable::build(&rs, SymmetryPolicy::Strict).expect("built-ins are well defined");
    let v = view_at(c, Position::ORIGIN, rs.phi()).expect("origin is occupied");
    let (m, col) = table
        .match_view(&v)
        .map_err(|e| TestCaseError::fail(e.to_string()))?;
    prop_assert_eq!(
        table.match_view(&rotate_view(r, &v)),
        Ok((rotate_move(r, m), col))
    );
    Ok(())
}

pub fn occlusion_equivariance(
    c: &Configuration,
    r: Rotation,
    phi: u32,
) -> Result<(), TestCaseError> {
    let rotated = rotate_configuration(c, r, Position::ORIGIN);
    prop_assert_eq!(
        view_at(&rotated, Position::ORIGIN, phi).expect("origin is occupied"),
        rotate_view(
            r,
            &view_at(c, Position::ORIGIN, phi).expect("origin is occupied")
        )
    );
    Ok(())
}

pub fn run_translation_equivariance(
    id: BuiltinId,
    (dx, dy): (i64, i64),
    rounds: u64,
    seed: u64,
) -> Result<(), TestCaseError> {
    let rs = builtin(id);
    let t = Translation::new(dx, dy);
    let adv = AdversaryStrategy::SeededRandom(seed);
    let run_from = |c: Configuration| {
        run_with(&rs, c, rounds, adv, SymmetryPolicy::Strict)
            .map_err(|e| TestCaseError::fail(e.to_string()))
    };
    let base = run_from(rs.initial().clone())?;
    let moved = run_from(translate_configuration(rs.initial(), t))?;
    let expect: Vec<Configuration> = base
        .configurations
        .iter()
        .map(|c| translate_configuration(c, t))
        .collect();
    prop_assert_eq!(moved.configurations, expect);
    Ok(())
}

/// At range two only the four cells two steps away on an axis can be
/// hidden, and exactly when the cell between is occupied.
pub fn phi_two_occlusion(c: &Configuration) -> Result<(), TestCaseError> {
    let v = view_at(c, Position::ORIGIN, 2).expect("origin is occupied");
    for o in Ball::new(2).offsets() {
        let p = Position::ORIGIN + o;
        let axis_two = (o.dx.abs() == 2 && o.dy == 0) || (o.dy.abs() == 2 && o.dx == 0);
        let blocker = Position::new(o.dx / 2, o.dy / 2);
        let want = if o == Offset::new(0, 0) {
            CellState::Occupied(c.get(p).expect("origin is occupied"))
        } else if axis_two && c.is_occupied(blocker) {
            CellState::Occluded
        } else {
            c.get(p).map_or(CellState::Empty, CellState::Occupied)
        };
        prop_assert_eq!(v.cell(o), Some(want), "offset {:?}", o);
    }
    Ok(())
}

pub fn translation() -> impl Strategy<Value = (i64, i64)> {
    (-1000i64..1000, -1000i64..1000)
}
