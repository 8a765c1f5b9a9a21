//! Deterministic grid-maze MDP: cells, actions, transitions and rewards.
//!
//! A maze is a rectangular grid stored row-major. Every non-wall cell is a
//! state. Moves that would leave the grid or enter a wall leave the agent in
//! place, and the goal is absorbing with zero reward.

use std::collections::VecDeque;
use std::fmt;

use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CellKind {
    Free,
    Wall,
    SpeedBump,
    OilSpill,
    Start,
    Goal,
}

impl CellKind {
    pub fn from_char(c: char) -> Option<Self> {
        Some(match c {
            '.' => CellKind::Free,
            '#' => CellKind::Wall,
            'B' => CellKind::SpeedBump,
            'O' => CellKind::OilSpill,
            'S' => CellKind::Start,
            'G' => CellKind::Goal,
            _ => return None,
        })
    }

    pub fn to_char(self) -> char {
        match self {
            CellKind::Free => '.',
            CellKind::Wall => '#',
            CellKind::SpeedBump => 'B',
            CellKind::OilSpill => 'O',
            CellKind::Start => 'S',
            CellKind::Goal => 'G',
        }
    }

    pub fn is_traversable(self) -> bool {
        self != CellKind::Wall
    }
}

/// Row-major index of a traversable cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct StateId(pub usize);

impl StateId {
    pub fn index(self) -> usize {
        self.0
    }
}

impl fmt::Display for StateId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// The four compass moves. Declaration order is the argmax tie-break order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Action {
    North,
    South,
    East,
    West,
}

impl Action {
    pub const ALL: [Action; 4] = [Action::North, Action::South, Action::East, Action::West];

    pub fn delta(self) -> (isize, isize) {
        match self {
            Action::North => (-1, 0),
            Action::South => (1, 0),
            Action::East => (0, 1),
            Action::West => (0, -1),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Action::North => "North",
            Action::South => "South",
            Action::East => "East",
            Action::West => "West",
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Action> {
        Action::ALL.get(i).copied()
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Action {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "North" | "N" | "north" => Ok(Action::North),
            "South" | "S" | "south" => Ok(Action::South),
            "East" | "E" | "east" => Ok(Action::East),
            "West" | "W" | "west" => Ok(Action::West),
            other => Err(format!("unknown action `{other}`")),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ParamsError {
    #[error("gamma must lie strictly inside (0, 1), got {0}")]
    Gamma(f64),
    #[error("{field} must be non-positive, got {value}")]
    Penalty { field: &'static str, value: f64 },
    #[error("goal_reward must be non-negative, got {0}")]
    GoalReward(f64),
    #[error("{field} is not finite")]
    NonFinite { field: &'static str },
}

/// Reward weights per obstacle kind plus the discount factor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RewardParams {
    pub step_cost: f64,
    pub bump_penalty: f64,
    pub oil_penalty: f64,
    pub goal_reward: f64,
    pub gamma: f64,
}

impl Default for RewardParams {
    fn default() -> Self {
        RewardParams {
            step_cost: -1.0,
            bump_penalty: -4.0,
            oil_penalty: -8.0,
            goal_reward: 10.0,
            gamma: 0.9,
        }
    }
}

impl RewardParams {
    /// Validating constructor.
    pub fn new(
        step_cost: f64,
        bump_penalty: f64,
        oil_penalty: f64,
        goal_reward: f64,
        gamma: f64,
    ) -> Result<Self, ParamsError> {
        let p = RewardParams {
            step_cost,
            bump_penalty,
            oil_penalty,
            goal_reward,
            gamma,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<(), ParamsError> {
        for (field, value) in self.fields() {
            if !value.is_finite() {
                return Err(ParamsError::NonFinite { field });
            }
        }
        if !(self.gamma > 0.0 && self.gamma < 1.0) {
            return Err(ParamsError::Gamma(self.gamma));
        }
        for (field, value) in [
            ("step_cost", self.step_cost),
            ("bump_penalty", self.bump_penalty),
            ("oil_penalty", self.oil_penalty),
        ] {
            if value > 0.0 {
                return Err(ParamsError::Penalty { field, value });
            }
        }
        if self.goal_reward < 0.0 {
            return Err(ParamsError::GoalReward(self.goal_reward));
        }
        Ok(())
    }

    pub fn with_gamma(mut self, gamma: f64) -> Self {
        self.gamma = gamma;
        self
    }

    /// Field names and values in canonical order.
    pub fn fields(&self) -> [(&'static str, f64); 5] {
        [
            ("step_cost", self.step_cost),
            ("bump_penalty", self.bump_penalty),
            ("oil_penalty", self.oil_penalty),
            ("goal_reward", self.goal_reward),
            ("gamma", self.gamma),
        ]
    }

    pub fn to_array(&self) -> [f64; 5] {
        [
            self.step_cost,
            self.bump_penalty,
            self.oil_penalty,
            self.goal_reward,
            self.gamma,
        ]
    }

    pub fn from_array(a: [f64; 5]) -> Self {
        RewardParams {
            step_cost: a[0],
            bump_penalty: a[1],
            oil_penalty: a[2],
            goal_reward: a[3],
            gamma: a[4],
        }
    }

    /// Largest single-step reward magnitude; bounds |V| by this over 1 - gamma.
    pub fn max_step_magnitude(&self) -> f64 {
        let worst = self.step_cost + self.bump_penalty.min(self.oil_penalty).min(0.0);
        let best = self.step_cost + self.goal_reward;
        worst.abs().max(best.abs())
    }
}

/// Parse failure, located by 1-based row and column where it applies.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MazeError {
    #[error("maze is empty")]
    Empty,
    #[error("row {row}: expected {expected} columns, found {found}")]
    Ragged {
        row: usize,
        expected: usize,
        found: usize,
    },
    #[error("row {row}, column {col}: unknown cell character {ch:?}")]
    UnknownChar { row: usize, col: usize, ch: char },
    #[error("no start cell `S`")]
    MissingStart,
    #[error("no goal cell `G`")]
    MissingGoal,
    #[error("row {row}, column {col}: second start cell (first at row {first_row}, column {first_col})")]
    DuplicateStart {
        row: usize,
        col: usize,
        first_row: usize,
        first_col: usize,
    },
    #[error("row {row}, column {col}: second goal cell (first at row {first_row}, column {first_col})")]
    DuplicateGoal {
        row: usize,
        col: usize,
        first_row: usize,
        first_col: usize,
    },
    #[error("goal at row {goal_row}, column {goal_col} is unreachable from start at row {start_row}, column {start_col}")]
    Unreachable {
        start_row: usize,
        start_col: usize,
        goal_row: usize,
        goal_col: usize,
    },
    #[error("cell grid has {found} cells, expected {width}x{height}")]
    Size {
        width: usize,
        height: usize,
        found: usize,
    },
}

/// A validated maze. Construct through [`Maze::parse`] or [`Maze::from_cells`].
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Maze {
    width: usize,
    height: usize,
    cells: Vec<CellKind>,
    start: StateId,
    goal: StateId,
}

impl Maze {
    /// Parses the text format: rows over `. # B O S G`, LF or CRLF, optional
    /// trailing newline.
    pub fn parse(text: &str) -> Result<Maze, MazeError> {
        let mut rows: Vec<&str> = text.split('\n').map(|r| r.strip_suffix('\r').unwrap_or(r)).collect();
        if rows.last().is_some_and(|r| r.is_empty()) {
            rows.pop();
        }
        if rows.is_empty() || rows[0].is_empty() {
            return Err(MazeError::Empty);
        }
        let width = rows[0].chars().count();
        let mut cells = Vec::with_capacity(width * rows.len());
        for (r, row) in rows.iter().enumerate() {
            let found = row.chars().count();
            if found != width {
                return Err(MazeError::Ragged {
                    row: r + 1,
                    expected: width,
                    found,
                });
            }
            for (c, ch) in row.chars().enumerate() {
                let kind = CellKind::from_char(ch).ok_or(MazeError::UnknownChar {
                    row: r + 1,
                    col: c + 1,
                    ch,
                })?;
                cells.push(kind);
            }
        }
        Maze::from_cells(width, rows.len(), cells)
    }

    /// Builds and validates a maze from a row-major cell grid.
    pub fn from_cells(width: usize, height: usize, cells: Vec<CellKind>) -> Result<Maze, MazeError> {
        if width == 0 || height == 0 {
            return Err(MazeError::Empty);
        }
        if cells.len() != width * height {
            return Err(MazeError::Size {
                width,
                height,
                found: cells.len(),
            });
        }
        let mut start: Option<usize> = None;
        let mut goal: Option<usize> = None;
        for (i, kind) in cells.iter().enumerate() {
            let (row, col) = (i / width + 1, i % width + 1);
            match kind {
                CellKind::Start => {
                    if let Some(first) = start {
                        return Err(MazeError::DuplicateStart {
                            row,
                            col,
                            first_row: first / width + 1,
                            first_col: first % width + 1,
                        });
                    }
                    start = Some(i);
                }
                CellKind::Goal => {
                    if let Some(first) = goal {
                        return Err(MazeError::DuplicateGoal {
                            row,
                            col,
                            first_row: first / width + 1,
                            first_col: first % width + 1,
                        });
                    }
                    goal = Some(i);
                }
                _ => {}
            }
        }
        let start = start.ok_or(MazeError::MissingStart)?;
        let goal = goal.ok_or(MazeError::MissingGoal)?;
        let maze = Maze {
            width,
            height,
            cells,
            start: StateId(start),
            goal: StateId(goal),
        };
        if !maze.reachable_from_start()[goal] {
            return Err(MazeError::Unreachable {
                start_row: start / width + 1,
                start_col: start % width + 1,
                goal_row: goal / width + 1,
                goal_col: goal % width + 1,
            });
        }
        Ok(maze)
    }

    fn reachable_from_start(&self) -> Vec<bool> {
        let mut seen = vec![false; self.cells.len()];
        let mut queue = VecDeque::from([self.start.0]);
        seen[self.start.0] = true;
        while let Some(i) = queue.pop_front() {
            for a in Action::ALL {
                if let Some(j) = self.neighbor(i, a) {
                    if !seen[j] && self.cells[j].is_traversable() {
                        seen[j] = true;
                        queue.push_back(j);
                    }
                }
            }
        }
        seen
    }

    fn neighbor(&self, index: usize, a: Action) -> Option<usize> {
        let (dr, dc) = a.delta();
        let r = (index / self.width) as isize + dr;
        let c = (index % self.width) as isize + dc;
        if r < 0 || c < 0 || r >= self.height as isize || c >= self.width as isize {
            return None;
        }
        Some(r as usize * self.width + c as usize)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn cells(&self) -> &[CellKind] {
        &self.cells
    }

    pub fn start(&self) -> StateId {
        self.start
    }

    pub fn goal(&self) -> StateId {
        self.goal
    }

    pub fn cell_count(&self) -> usize {
        self.cells.len()
    }

    pub fn kind(&self, s: StateId) -> CellKind {
        self.cells[s.0]
    }

    /// Zero-based (row, col) of a cell index.
    pub fn row_col(&self, s: StateId) -> (usize, usize) {
        (s.0 / self.width, s.0 % self.width)
    }

    pub fn state_at(&self, row: usize, col: usize) -> Option<StateId> {
        if row >= self.height || col >= self.width {
            return None;
        }
        let i = row * self.width + col;
        self.cells[i].is_traversable().then_some(StateId(i))
    }

    /// Whether `s` names a traversable cell of this maze.
    pub fn is_state(&self, s: StateId) -> bool {
        s.0 < self.cells.len() && self.cells[s.0].is_traversable()
    }

    /// All non-wall cells in ascending index order.
    pub fn states(&self) -> Vec<StateId> {
        self.cells
            .iter()
            .enumerate()
            .filter(|(_, k)| k.is_traversable())
            .map(|(i, _)| StateId(i))
            .collect()
    }

    /// Deterministic move; blocked or off-grid moves stay put and the goal absorbs.
    pub fn transition(&self, s: StateId, a: Action) -> StateId {
        debug_assert!(self.is_state(s), "transition from non-state {s}");
        if s == self.goal {
            return s;
        }
        match self.neighbor(s.0, a) {
            Some(j) if self.cells[j].is_traversable() => StateId(j),
            _ => s,
        }
    }

    /// Reward for the move `s --a--> s_next`, attached to the destination cell.
    pub fn reward(&self, params: &RewardParams, s: StateId, _a: Action, s_next: StateId) -> f64 {
        if s == self.goal {
            return 0.0;
        }
        self.entry_reward(params, s_next)
    }

    /// Reward collected on entering `dest` from a non-goal state.
    pub fn entry_reward(&self, params: &RewardParams, dest: StateId) -> f64 {
        let kind_penalty = match self.cells[dest.0] {
            CellKind::SpeedBump => params.bump_penalty,
            CellKind::OilSpill => params.oil_penalty,
            _ => 0.0,
        };
        let bonus = if dest == self.goal { params.goal_reward } else { 0.0 };
        params.step_cost + kind_penalty + bonus
    }

    pub fn count_kind(&self, kind: CellKind) -> usize {
        self.cells.iter().filter(|&&k| k == kind).count()
    }

    pub fn traversable_count(&self) -> usize {
        self.cells.iter().filter(|k| k.is_traversable()).count()
    }

    /// Serializes to the text format, LF-terminated rows.
    pub fn to_text(&self) -> String {
        let mut out = String::with_capacity((self.width + 1) * self.height);
        for row in self.cells.chunks(self.width) {
            out.extend(row.iter().map(|k| k.to_char()));
            out.push('\n');
        }
        out
    }
}

impl fmt::Display for Maze {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

impl std::str::FromStr for Maze {
    type Err = MazeError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Maze::parse(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params() -> RewardParams {
        RewardParams::new(-1.0, -4.0, -6.0, 10.0, 0.9).unwrap()
    }

    #[test]
    fn parses_minimal_maze() {
        let m = Maze::parse("SG").unwrap();
        assert_eq!((m.width(), m.height()), (2, 1));
        assert_eq!(m.start(), StateId(0));
        assert_eq!(m.goal(), StateId(1));
    }

    #[test]
    fn wall_cutting_only_path_is_unreachable() {
        assert!(matches!(Maze::parse("S#G"), Err(MazeError::Unreachable { .. })));
    }

    #[test]
    fn maps_speed_bump() {
        let m = Maze::parse("SBG\n...").unwrap();
        assert_eq!((m.width(), m.height()), (3, 2));
        assert_eq!(m.kind(StateId(1)), CellKind::SpeedBump);
        assert_eq!(m.count_kind(CellKind::SpeedBump), 1);
    }

    #[test]
    fn crlf_and_missing_trailing_newline() {
        let a = Maze::parse("S.\r\n.G\r\n").unwrap();
        let b = Maze::parse("S.\n.G").unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn errors_carry_positions() {
        assert_eq!(
            Maze::parse("S.\n.G.\n"),
            Err(MazeError::Ragged {
                row: 2,
                expected: 2,
                found: 3
            })
        );
        assert_eq!(
            Maze::parse("S.\n.X\nG."),
            Err(MazeError::UnknownChar {
                row: 2,
                col: 2,
                ch: 'X'
            })
        );
        assert_eq!(Maze::parse("..\n.G"), Err(MazeError::MissingStart));
        assert_eq!(Maze::parse("S.\n.."), Err(MazeError::MissingGoal));
        assert!(matches!(
            Maze::parse("SS\nG."),
            Err(MazeError::DuplicateStart { row: 1, col: 2, .. })
        ));
        assert!(matches!(
            Maze::parse("SG\nG."),
            Err(MazeError::DuplicateGoal { row: 2, col: 1, .. })
        ));
        assert_eq!(Maze::parse(""), Err(MazeError::Empty));
        let msg = Maze::parse("S.\n.X\nG.").unwrap_err().to_string();
        assert!(msg.contains("row 2") && msg.contains("column 2"), "{msg}");
    }

    #[test]
    fn transitions() {
        let m = Maze::parse("SG").unwrap();
        assert_eq!(m.transition(m.start(), Action::East), m.goal());
        assert_eq!(m.transition(m.start(), Action::West), m.start());
        for a in Action::ALL {
            assert_eq!(m.transition(m.goal(), a), m.goal());
        }
        // wall bump with an open detour underneath
        let m = Maze::parse("S#G\n...").unwrap();
        assert_eq!(m.transition(StateId(0), Action::East), StateId(0));
        assert_eq!(m.transition(StateId(0), Action::South), StateId(3));
    }

    #[test]
    fn rewards_sum_components() {
        let m = Maze::parse("S.BG\n....").unwrap();
        let p = params();
        assert_eq!(m.reward(&p, StateId(0), Action::East, StateId(1)), -1.0);
        assert_eq!(m.reward(&p, StateId(1), Action::East, StateId(2)), -5.0);
        assert_eq!(m.reward(&p, StateId(2), Action::East, StateId(3)), 9.0);
        assert_eq!(m.reward(&p, m.goal(), Action::West, m.goal()), 0.0);
    }

    #[test]
    fn states_skip_walls() {
        assert_eq!(Maze::parse("SG").unwrap().states(), vec![StateId(0), StateId(1)]);
        let m = Maze::parse("S#G\n...").unwrap();
        assert_eq!(
            m.states(),
            vec![StateId(0), StateId(2), StateId(3), StateId(4), StateId(5)]
        );
        assert_eq!(Maze::parse("S.\n.G").unwrap().states().len(), 4);
    }

    #[test]
    fn params_validation() {
        assert!(RewardParams::new(-1.0, -1.0, -1.0, 1.0, 1.0).is_err());
        assert!(RewardParams::new(-1.0, -1.0, -1.0, 1.0, 0.0).is_err());
        assert!(RewardParams::new(0.5, -1.0, -1.0, 1.0, 0.5).is_err());
        assert!(RewardParams::new(-1.0, -1.0, -1.0, -1.0, 0.5).is_err());
        assert!(RewardParams::new(-1.0, f64::NAN, -1.0, 1.0, 0.5).is_err());
        assert!(RewardParams::new(0.0, 0.0, 0.0, 0.0, 0.5).is_ok());
    }
}
