use std::collections::BTreeSet;
use std::fmt;
use std::path::Path;

use crate::error::{ensure, Error, Result};

use super::TabularMdp;

/// A grid cell, `(row, col)` with row 0 at the top.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Cell {
    pub row: usize,
    pub col: usize,
}

impl Cell {
    pub const fn new(row: usize, col: usize) -> Self {
        Cell { row, col }
    }

    /// Chebyshev distance, the step count in an eight-connected open grid.
    pub fn chebyshev(self, other: Cell) -> usize {
        self.row.abs_diff(other.row).max(self.col.abs_diff(other.col))
    }
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.row, self.col)
    }
}

impl std::str::FromStr for Cell {
    type Err = Error;

    /// Accepts `row,col` with optional surrounding parentheses.
    fn from_str(s: &str) -> Result<Self> {
        let trimmed = s.trim().trim_start_matches('(').trim_end_matches(')');
        let (r, c) = trimmed
            .split_once(',')
            .ok_or_else(|| Error::Parse(format!("cell `{s}` is not `row,col`")))?;
        let parse = |v: &str| {
            v.trim()
                .parse::<usize>()
                .map_err(|e| Error::Parse(format!("cell `{s}`: {e}")))
        };
        Ok(Cell::new(parse(r)?, parse(c)?))
    }
}

#[derive(Clone, Copy, Debug)]
pub struct Move {
    pub name: &'static str,
    pub d_row: i64,
    pub d_col: i64,
}

const FOUR: [Move; 4] = [
    Move { name: "up", d_row: -1, d_col: 0 },
    Move { name: "right", d_row: 0, d_col: 1 },
    Move { name: "down", d_row: 1, d_col: 0 },
    Move { name: "left", d_row: 0, d_col: -1 },
];

const EIGHT: [Move; 8] = [
    Move { name: "up", d_row: -1, d_col: 0 },
    Move { name: "right", d_row: 0, d_col: 1 },
    Move { name: "down", d_row: 1, d_col: 0 },
    Move { name: "left", d_row: 0, d_col: -1 },
    Move { name: "up-right", d_row: -1, d_col: 1 },
    Move { name: "down-right", d_row: 1, d_col: 1 },
    Move { name: "down-left", d_row: 1, d_col: -1 },
    Move { name: "up-left", d_row: -1, d_col: -1 },
];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ActionSet {
    FourConnected,
    EightConnected,
}

impl ActionSet {
    pub fn moves(self) -> &'static [Move] {
        match self {
            ActionSet::FourConnected => &FOUR,
            ActionSet::EightConnected => &EIGHT,
        }
    }

    pub fn action_index(self, name: &str) -> Option<usize> {
        self.moves().iter().position(|m| m.name == name)
    }
}

#[derive(Clone, Debug)]
pub struct GridSpec {
    pub width: usize,
    pub height: usize,
    pub walls: BTreeSet<Cell>,
    pub action_set: ActionSet,
    /// Probability that the chosen action is replaced by a uniformly random
    /// move.
    pub slip: f64,
    pub wall_penalty: f64,
    pub goal_reward: f64,
    pub step_reward: f64,
    /// Make goals absorbing. Off for the resampled-goal tasks.
    pub terminal_goals: bool,
}

impl GridSpec {
    pub fn open(width: usize, height: usize, action_set: ActionSet) -> Self {
        GridSpec {
            width,
            height,
            walls: BTreeSet::new(),
            action_set,
            slip: 0.0,
            wall_penalty: 0.0,
            goal_reward: 1.0,
            step_reward: 0.0,
            terminal_goals: false,
        }
    }

    /// The 11x11 four-room layout: four-connected, +50 per goal, -1 per
    /// wall bump, 0 otherwise.
    pub fn four_rooms() -> GridEnv {
        parse_grid_env(FOUR_ROOMS_MAP).expect("bundled four-rooms map is valid")
    }

    /// The 25x25 eight-connected escape arena. The barrier sits on the
    /// middle row and spans the central 13 columns.
    pub fn escape_arena(with_barrier: bool) -> GridEnv {
        let mut spec = GridSpec::open(25, 25, ActionSet::EightConnected);
        if with_barrier {
            spec.walls = escape_barrier().collect();
        }
        GridEnv {
            spec,
            start: Some(Cell::new(0, 12)),
            goals: vec![Cell::new(24, 12)],
            gamma: 0.99,
        }
    }

    fn in_bounds(&self, row: i64, col: i64) -> bool {
        row >= 0 && col >= 0 && (row as usize) < self.height && (col as usize) < self.width
    }

    pub fn is_free(&self, cell: Cell) -> bool {
        cell.row < self.height && cell.col < self.width && !self.walls.contains(&cell)
    }

    /// Deterministic outcome of a move; blocked moves keep the cell.
    pub fn moved(&self, cell: Cell, mv: &Move) -> (Cell, bool) {
        let (r, c) = (cell.row as i64 + mv.d_row, cell.col as i64 + mv.d_col);
        if self.in_bounds(r, c) {
            let target = Cell::new(r as usize, c as usize);
            if !self.walls.contains(&target) {
                return (target, false);
            }
        }
        (cell, true)
    }
}

/// Barrier cells of the escape arena.
pub fn escape_barrier() -> impl Iterator<Item = Cell> {
    (6..=18).map(|col| Cell::new(12, col))
}

const FOUR_ROOMS_MAP: &str = include_str!("../../fixtures/fourrooms.map");

/// A grid MDP together with the cell <-> state bookkeeping.
#[derive(Clone, Debug)]
pub struct GridWorld {
    pub spec: GridSpec,
    mdp: TabularMdp,
    cells: Vec<Cell>,
    index: Vec<Option<usize>>,
    goals: Vec<usize>,
}

impl GridWorld {
    pub fn mdp(&self) -> &TabularMdp {
        &self.mdp
    }

    pub fn into_mdp(self) -> TabularMdp {
        self.mdp
    }

    pub fn num_states(&self) -> usize {
        self.cells.len()
    }

    pub fn state(&self, cell: Cell) -> Option<usize> {
        if cell.row >= self.spec.height || cell.col >= self.spec.width {
            return None;
        }
        self.index[cell.row * self.spec.width + cell.col]
    }

    pub fn cell(&self, state: usize) -> Cell {
        self.cells[state]
    }

    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    pub fn goals(&self) -> &[usize] {
        &self.goals
    }

    pub fn action_names(&self) -> Vec<&'static str> {
        self.spec.action_set.moves().iter().map(|m| m.name).collect()
    }

    /// Deterministic successor of `(state, action)` ignoring slip.
    pub fn intended_next(&self, state: usize, action: usize) -> usize {
        let mv = &self.spec.action_set.moves()[action];
        let (cell, _) = self.spec.moved(self.cells[state], mv);
        self.state(cell).expect("moves stay on free cells")
    }

    /// Same dynamics, rewards re-targeted to a new goal set.
    pub fn mdp_for_goals(&self, goals: &[usize]) -> Result<TabularMdp> {
        for &g in goals {
            self.mdp.check_state(g)?;
        }
        let mut reward = vec![self.spec.step_reward; self.cells.len()];
        for &g in goals {
            reward[g] = self.spec.goal_reward;
        }
        self.mdp.clone().with_reward(reward)
    }

    /// States reachable from `from` under any sequence of actions
    /// (intended moves only).
    pub fn reachable_from(&self, from: usize) -> Vec<bool> {
        let mut seen = vec![false; self.num_states()];
        let mut stack = vec![from];
        seen[from] = true;
        while let Some(s) = stack.pop() {
            for a in 0..self.spec.action_set.moves().len() {
                let next = self.intended_next(s, a);
                if !seen[next] {
                    seen[next] = true;
                    stack.push(next);
                }
            }
        }
        seen
    }
}

/// Builds the grid MDP. States are the free cells in row-major order.
///
/// With probability `1 - slip` the chosen move is executed; with
/// probability `slip` a uniformly random move from the action set is
/// executed instead. A move into a wall or off the grid leaves the agent in
/// place and pays `wall_penalty` on top of the arrival reward.
pub fn build_gridworld(spec: &GridSpec, goals: &[Cell], gamma: f64) -> Result<GridWorld> {
    ensure!(spec.width >= 1 && spec.height >= 1, InvalidSpec, "grid must be at least 1x1");
    ensure!(
        (0.0..=1.0).contains(&spec.slip),
        InvalidSpec,
        "slip {} outside [0, 1]",
        spec.slip
    );
    for w in &spec.walls {
        ensure!(
            w.row < spec.height && w.col < spec.width,
            InvalidSpec,
            "wall {w} outside the {}x{} grid",
            spec.height,
            spec.width
        );
    }

    let mut index = vec![None; spec.width * spec.height];
    let mut cells = Vec::new();
    for row in 0..spec.height {
        for col in 0..spec.width {
            let cell = Cell::new(row, col);
            if !spec.walls.contains(&cell) {
                index[row * spec.width + col] = Some(cells.len());
                cells.push(cell);
            }
        }
    }
    ensure!(!cells.is_empty(), InvalidSpec, "grid has no free cells");

    let mut goal_states = Vec::with_capacity(goals.len());
    for g in goals {
        ensure!(
            g.row < spec.height && g.col < spec.width,
            InvalidSpec,
            "goal {g} outside the grid"
        );
        let s = index[g.row * spec.width + g.col]
            .ok_or_else(|| Error::InvalidSpec(format!("goal {g} is inside a wall")))?;
        goal_states.push(s);
    }

    let n = cells.len();
    let moves = spec.action_set.moves();
    let m = moves.len();
    let terminal: BTreeSet<usize> = if spec.terminal_goals {
        goal_states.iter().copied().collect()
    } else {
        BTreeSet::new()
    };

    let mut transition = vec![0.0; n * m * n];
    let mut bump = vec![0.0; n * m * n];
    let slip_each = spec.slip / m as f64;
    for (s, &cell) in cells.iter().enumerate() {
        let outcomes: Vec<usize> = moves
            .iter()
            .map(|mv| {
                let (c, _) = spec.moved(cell, mv);
                index[c.row * spec.width + c.col].expect("free")
            })
            .collect();
        for a in 0..m {
            let base = (s * m + a) * n;
            if terminal.contains(&s) {
                transition[base + s] = 1.0;
                continue;
            }
            transition[base + outcomes[a]] += 1.0 - spec.slip;
            for &o in &outcomes {
                transition[base + o] += slip_each;
            }
            // Grid moves never self-loop unless blocked.
            if transition[base + s] > 0.0 {
                bump[base + s] = spec.wall_penalty;
            }
        }
    }

    let mut reward = vec![spec.step_reward; n];
    for &g in &goal_states {
        reward[g] = spec.goal_reward;
    }
    let mut initial = vec![0.0; n];
    initial[0] = 1.0;

    let mut mdp = TabularMdp::new(n, m, transition, reward, gamma, initial, terminal)?;
    if spec.wall_penalty != 0.0 {
        mdp = mdp.with_transition_reward(bump)?;
    }
    Ok(GridWorld {
        spec: spec.clone(),
        mdp,
        cells,
        index,
        goals: goal_states,
    })
}

/// A grid environment file: option lines followed by an ASCII map.
#[derive(Clone, Debug)]
pub struct GridEnv {
    pub spec: GridSpec,
    pub start: Option<Cell>,
    pub goals: Vec<Cell>,
    pub gamma: f64,
}

impl GridEnv {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        parse_grid_env(&text)
    }

    pub fn build(&self) -> Result<GridWorld> {
        let mut world = build_gridworld(&self.spec, &self.goals, self.gamma)?;
        if let Some(start) = self.start {
            let s = world
                .state(start)
                .ok_or_else(|| Error::InvalidSpec(format!("start {start} is inside a wall")))?;
            let mut init = vec![0.0; world.num_states()];
            init[s] = 1.0;
            world.mdp = world.mdp.with_initial_dist(init)?;
        }
        Ok(world)
    }
}

/// Parses the grid environment format.
///
/// ```text
/// ; actions = 4          (4 or 8)
/// ; slip = 0.0
/// ; gamma = 0.95
/// ; wall_penalty = -1
/// ; goal_reward = 50
/// ; step_reward = 0
/// ; terminal_goals = false
/// #.S..
/// ..#.G
/// ```
///
/// `#` is a wall, `.` a free cell, `S` the start and `G` a goal. Blank
/// lines and lines starting with `//` are ignored.
pub fn parse_grid_env(text: &str) -> Result<GridEnv> {
    let mut spec = GridSpec::open(0, 0, ActionSet::FourConnected);
    let mut gamma = 0.95;
    let mut rows: Vec<&str> = Vec::new();

    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with("//") {
            continue;
        }
        if let Some(opt) = line.strip_prefix(';') {
            let (key, value) = opt
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("line {}: expected `; key = value`", lineno + 1)))?;
            let (key, value) = (key.trim(), value.trim());
            let num = || {
                value
                    .parse::<f64>()
                    .map_err(|e| Error::Parse(format!("line {}: {key}: {e}", lineno + 1)))
            };
            match key {
                "actions" => {
                    spec.action_set = match value {
                        "4" => ActionSet::FourConnected,
                        "8" => ActionSet::EightConnected,
                        other => {
                            return Err(Error::Parse(format!(
                                "line {}: actions must be 4 or 8, got {other}",
                                lineno + 1
                            )))
                        }
                    }
                }
                "slip" => spec.slip = num()?,
                "gamma" => gamma = num()?,
                "wall_penalty" => spec.wall_penalty = num()?,
                "goal_reward" => spec.goal_reward = num()?,
                "step_reward" => spec.step_reward = num()?,
                "terminal_goals" => {
                    spec.terminal_goals = value
                        .parse()
                        .map_err(|e| Error::Parse(format!("line {}: {e}", lineno + 1)))?
                }
                other => {
                    return Err(Error::Parse(format!("line {}: unknown option `{other}`", lineno + 1)))
                }
            }
            continue;
        }
        rows.push(line);
    }

    ensure!(!rows.is_empty(), Parse, "map has no rows");
    let width = rows[0].chars().count();
    let mut start = None;
    let mut goals = Vec::new();
    for (r, line) in rows.iter().enumerate() {
        ensure!(
            line.chars().count() == width,
            Parse,
            "map row {r} has width {}, expected {width}",
            line.chars().count()
        );
        for (c, ch) in line.chars().enumerate() {
            let cell = Cell::new(r, c);
            match ch {
                '#' => {
                    spec.walls.insert(cell);
                }
                '.' => {}
                'S' => {
                    ensure!(start.is_none(), Parse, "map has more than one start");
                    start = Some(cell);
                }
                'G' => goals.push(cell),
                other => return Err(Error::Parse(format!("unknown map character `{other}`"))),
            }
        }
    }
    spec.width = width;
    spec.height = rows.len();
    Ok(GridEnv {
        spec,
        start,
        goals,
        gamma,
    })
}
