//! Geometry of the infinite grid.
//!
//! Coordinates: `x` grows East, `y` grows North. A positive quarter turn is
//! counterclockwise, `(x, y) -> (-y, x)`. Every other module uses this
//! convention.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::GridError;

/// A node of the grid.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Position {
    pub x: i64,
    pub y: i64,
}

impl Position {
    pub const ORIGIN: Position = Position { x: 0, y: 0 };

    pub const fn new(x: i64, y: i64) -> Self {
        Position { x, y }
    }
}

impl fmt::Display for Position {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.x, self.y)
    }
}

/// A displacement relative to some node, typically the observing robot.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Offset {
    pub dx: i64,
    pub dy: i64,
}

impl Offset {
    pub const ZERO: Offset = Offset { dx: 0, dy: 0 };

    pub const fn new(dx: i64, dy: i64) -> Self {
        Offset { dx, dy }
    }

    /// Manhattan norm.
    pub fn norm(self) -> u64 {
        self.dx.unsigned_abs() + self.dy.unsigned_abs()
    }

    /// Lattice points strictly between the origin and `self`.
    pub fn interior_lattice_points(self) -> impl Iterator<Item = Offset> {
        let g = gcd(self.dx.unsigned_abs(), self.dy.unsigned_abs()) as i64;
        let (sx, sy) = if g == 0 {
            (0, 0)
        } else {
            (self.dx / g, self.dy / g)
        };
        (1..g.max(1)).map(move |k| Offset::new(sx * k, sy * k))
    }
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

impl Add<Offset> for Position {
    type Output = Position;

    fn add(self, o: Offset) -> Position {
        Position::new(self.x + o.dx, self.y + o.dy)
    }
}

impl Sub for Position {
    type Output = Offset;

    fn sub(self, other: Position) -> Offset {
        Offset::new(self.x - other.x, self.y - other.y)
    }
}

impl Neg for Offset {
    type Output = Offset;

    fn neg(self) -> Offset {
        Offset::new(-self.dx, -self.dy)
    }
}

pub fn manhattan_distance(p: Position, q: Position) -> u64 {
    (p - q).norm()
}

/// Destination computed by a robot in one round.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Move {
    Idle,
    Up,
    Down,
    Left,
    Right,
}

impl Move {
    pub const ALL: [Move; 5] = [Move::Idle, Move::Up, Move::Down, Move::Left, Move::Right];

    pub fn offset(self) -> Offset {
        match self {
            Move::Idle => Offset::new(0, 0),
            Move::Up => Offset::new(0, 1),
            Move::Down => Offset::new(0, -1),
            Move::Left => Offset::new(-1, 0),
            Move::Right => Offset::new(1, 0),
        }
    }

    pub fn from_offset(o: Offset) -> Option<Move> {
        Move::ALL.into_iter().find(|m| m.offset() == o)
    }

    pub fn name(self) -> &'static str {
        match self {
            Move::Idle => "idle",
            Move::Up => "up",
            Move::Down => "down",
            Move::Left => "left",
            Move::Right => "right",
        }
    }

    pub fn from_name(s: &str) -> Option<Move> {
        Move::ALL.into_iter().find(|m| m.name() == s)
    }
}

impl fmt::Display for Move {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Counterclockwise rotation by a multiple of a quarter turn.
#[derive(
    Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
pub struct Rotation(u8);

impl Rotation {
    pub const IDENTITY: Rotation = Rotation(0);
    pub const QUARTER: Rotation = Rotation(1);
    pub const HALF: Rotation = Rotation(2);
    pub const THREE_QUARTERS: Rotation = Rotation(3);
    pub const ALL: [Rotation; 4] = [Rotation(0), Rotation(1), Rotation(2), Rotation(3)];

    /// Any integer is accepted and reduced modulo 4.
    pub fn new(quarter_turns: i64) -> Self {
        Rotation(quarter_turns.rem_euclid(4) as u8)
    }

    pub fn quarter_turns(self) -> u8 {
        self.0
    }

    pub fn compose(self, other: Rotation) -> Rotation {
        Rotation((self.0 + other.0) % 4)
    }

    pub fn inverse(self) -> Rotation {
        Rotation((4 - self.0) % 4)
    }

    pub fn is_identity(self) -> bool {
        self.0 == 0
    }
}

pub fn rotate_offset(r: Rotation, o: Offset) -> Offset {
    let (mut x, mut y) = (o.dx, o.dy);
    for _ in 0..r.0 {
        (x, y) = (-y, x);
    }
    Offset::new(x, y)
}

pub fn rotate_move(r: Rotation, m: Move) -> Move {
    Move::from_offset(rotate_offset(r, m.offset())).expect("rotation preserves unit offsets")
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Translation {
    pub dx: i64,
    pub dy: i64,
}

impl Translation {
    pub const fn new(dx: i64, dy: i64) -> Self {
        Translation { dx, dy }
    }

    pub fn apply(self, p: Position) -> Position {
        Position::new(p.x + self.dx, p.y + self.dy)
    }
}

const LABEL_CAP: usize = 8;

/// A light color. The label is stored inline so colors stay `Copy`.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Color {
    id: u8,
    len: u8,
    label: [u8; LABEL_CAP],
}

impl Color {
    /// Labels are 1 to 8 printable ASCII characters; `.` and `x` are reserved
    /// by the rule-file pattern alphabet and `#` starts a comment.
    pub fn new(id: u8, label: &str) -> Result<Self, GridError> {
        let bytes = label.as_bytes();
        let valid = !bytes.is_empty()
            && bytes.len() <= LABEL_CAP
            && bytes.iter().all(|b| b.is_ascii_graphic() && *b != b'#')
            && label != "."
            && label != "x";
        if !valid {
            return Err(GridError::InvalidColorLabel(label.to_string()));
        }
        let mut buf = [0u8; LABEL_CAP];
        buf[..bytes.len()].copy_from_slice(bytes);
        Ok(Color {
            id,
            len: bytes.len() as u8,
            label: buf,
        })
    }

    pub fn id(&self) -> u8 {
        self.id
    }

    pub fn label(&self) -> &str {
        std::str::from_utf8(&self.label[..self.len as usize]).expect("labels are ASCII")
    }

    /// First character of the label, used by the ASCII renderer.
    pub fn initial(&self) -> char {
        self.label[0] as char
    }
}

impl fmt::Debug for Color {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}#{}", self.label(), self.id)
    }
}

impl fmt::Display for Color {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// The global state of a round: which nodes hold a robot and of which color.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Configuration {
    occupied: BTreeMap<Position, Color>,
}

impl Configuration {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds a configuration, rejecting two robots on one node.
    pub fn from_robots(
        robots: impl IntoIterator<Item = (Position, Color)>,
    ) -> Result<Self, GridError> {
        let mut c = Configuration::new();
        for (p, col) in robots {
            c.insert(p, col)?;
        }
        Ok(c)
    }

    pub fn insert(&mut self, p: Position, col: Color) -> Result<(), GridError> {
        if self.occupied.insert(p, col).is_some() {
            return Err(GridError::DuplicatePosition(p));
        }
        Ok(())
    }

    pub fn get(&self, p: Position) -> Option<Color> {
        self.occupied.get(&p).copied()
    }

    pub fn is_occupied(&self, p: Position) -> bool {
        self.occupied.contains_key(&p)
    }

    pub fn len(&self) -> usize {
        self.occupied.len()
    }

    pub fn is_empty(&self) -> bool {
        self.occupied.is_empty()
    }

    /// Robots in position order.
    pub fn iter(&self) -> impl Iterator<Item = (Position, Color)> + '_ {
        self.occupied.iter().map(|(p, c)| (*p, *c))
    }

    pub fn positions(&self) -> impl Iterator<Item = Position> + '_ {
        self.occupied.keys().copied()
    }

    pub fn union(&self, other: &Configuration) -> Result<Configuration, GridError> {
        Configuration::from_robots(self.iter().chain(other.iter()))
    }
}

impl FromIterator<(Position, Color)> for Configuration {
    /// Later entries overwrite earlier ones on the same node; use
    /// [`Configuration::from_robots`] when duplicates must be rejected.
    fn from_iter<I: IntoIterator<Item = (Position, Color)>>(iter: I) -> Self {
        Configuration {
            occupied: iter.into_iter().collect(),
        }
    }
}

pub fn translate_configuration(c: &Configuration, t: Translation) -> Configuration {
    c.iter().map(|(p, col)| (t.apply(p), col)).collect()
}

/// Rotates a configuration about `center`.
pub fn rotate_configuration(c: &Configuration, r: Rotation, center: Position) -> Configuration {
    c.iter()
        .map(|(p, col)| (center + rotate_offset(r, p - center), col))
        .collect()
}

pub fn farthest_pair_distance(c: &Configuration) -> Result<u64, GridError> {
    if c.is_empty() {
        return Err(GridError::EmptyConfiguration);
    }
    let ps: Vec<Position> = c.positions().collect();
    let mut best = 0;
    for (i, p) in ps.iter().enumerate() {
        for q in &ps[i + 1..] {
            best = best.max(manhattan_distance(*p, *q));
        }
    }
    Ok(best)
}

/// The Manhattan ball of radius `phi`, laid out row by row from North to
/// South and West to East within a row. Views and rule patterns share this
/// layout.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Ball {
    phi: u32,
}

impl Ball {
    pub fn new(phi: u32) -> Self {
        assert!(phi > 0, "visibility range must be positive");
        Ball { phi }
    }

    pub fn phi(self) -> u32 {
        self.phi
    }

    pub fn len(self) -> usize {
        let p = self.phi as usize;
        2 * p * (p + 1) + 1
    }

    pub fn is_empty(self) -> bool {
        false
    }

    pub fn contains(self, o: Offset) -> bool {
        o.norm() <= self.phi as u64
    }

    /// Number of cells in the row at height `dy`.
    pub fn row_len(self, dy: i64) -> usize {
        2 * (self.phi as i64 - dy.abs()) as usize + 1
    }

    pub fn offsets(self) -> impl Iterator<Item = Offset> {
        let phi = self.phi as i64;
        (-phi..=phi).rev().flat_map(move |dy| {
            let w = phi - dy.abs();
            (-w..=w).map(move |dx| Offset::new(dx, dy))
        })
    }

    pub fn index_of(self, o: Offset) -> Option<usize> {
        if !self.contains(o) {
            return None;
        }
        let phi = self.phi as i64;
        let rows_above: usize = (o.dy + 1..=phi).map(|dy| self.row_len(dy)).sum();
        let w = phi - o.dy.abs();
        Some(rows_above + (o.dx + w) as usize)
    }

    pub fn center_index(self) -> usize {
        (self.len() - 1) / 2
    }

    /// `perm[i]` is the index that cell `i` moves to under `r`.
    pub fn rotation_permutation(self, r: Rotation) -> Vec<usize> {
        self.offsets()
            .map(|o| {
                self.index_of(rotate_offset(r, o))
                    .expect("rotation preserves the ball")
            })
            .collect()
    }

    /// Whether `o` is hidden from the center when the offsets in `occupied`
    /// hold robots.
    pub fn is_hidden(o: Offset, occupied: impl Fn(Offset) -> bool) -> bool {
        o != Offset::ZERO && o.interior_lattice_points().any(occupied)
    }
}

/// What a robot perceives at one node of its view.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CellState {
    Empty,
    Occupied(Color),
    Occluded,
}

/// A snapshot of the Φ-ball around a robot, expressed in some frame.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct View {
    phi: u32,
    cells: Vec<CellState>,
}

impl View {
    /// Builds a view from cells laid out in [`Ball`] order.
    pub fn from_cells(phi: u32, cells: Vec<CellState>) -> Result<Self, GridError> {
        let ball = Ball::new(phi);
        if cells.len() != ball.len() {
            return Err(GridError::BallShape {
                phi,
                cells: cells.len(),
            });
        }
        if !matches!(cells[ball.center_index()], CellState::Occupied(_)) {
            return Err(GridError::CenterNotOccupied);
        }
        Ok(View { phi, cells })
    }

    pub fn phi(&self) -> u32 {
        self.phi
    }

    pub fn ball(&self) -> Ball {
        Ball::new(self.phi)
    }

    pub fn cells(&self) -> &[CellState] {
        &self.cells
    }

    pub fn cell(&self, o: Offset) -> Option<CellState> {
        self.ball().index_of(o).map(|i| self.cells[i])
    }

    pub fn own_color(&self) -> Color {
        match self.cells[self.ball().center_index()] {
            CellState::Occupied(c) => c,
            _ => unreachable!("view center is always occupied"),
        }
    }
}

/// The globally oriented view of the robot at `p`.
pub fn view_at(c: &Configuration, p: Position, phi: u32) -> Result<View, GridError> {
    if !c.is_occupied(p) {
        return Err(GridError::NotARobot(p));
    }
    let ball = Ball::new(phi);
    let cells = ball
        .offsets()
        .map(|o| {
            if Ball::is_hidden(o, |v| c.is_occupied(p + v)) {
                CellState::Occluded
            } else {
                match c.get(p + o) {
                    Some(col) => CellState::Occupied(col),
                    None => CellState::Empty,
                }
            }
        })
        .collect();
    Ok(View { phi, cells })
}

pub fn rotate_view(r: Rotation, v: &View) -> View {
    if r.is_identity() {
        return v.clone();
    }
    let perm = v.ball().rotation_permutation(r);
    let mut cells = vec![CellState::Empty; v.cells.len()];
    for (i, state) in v.cells.iter().enumerate() {
        cells[perm[i]] = *state;
    }
    View { phi: v.phi, cells }
}
