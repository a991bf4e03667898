//! Grid games: a declarative [`GridSpec`], the simultaneous-move dynamics, and
//! compilation into an explicit [`StochasticGame`].
//!
//! Rules:
//!
//! * every round each player picks up, down, left, right or stick;
//! * moving costs `step_cost` whether or not the move succeeds, sticking costs
//!   `stick_cost`;
//! * walls and blocked cells stop a move; a semi-wall lets it through with
//!   probability 1/2;
//! * a move into a cell held by a player who stays put fails; players may not
//!   swap cells; when several movers target one cell a uniformly random one
//!   enters and the rest stay; a mover may follow a player leaving its cell in
//!   the same round;
//! * a player ending on a goal it owns collects the goal reward, and the game
//!   ends as soon as anyone scores (simultaneous scorers all collect).
//!
//! Coordinates are `(x, y)` with `y = 0` the top row.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::normal_form::ActionSpace;
use crate::stochastic::StochasticGame;

pub type Cell = (usize, usize);

pub const MAX_GRID_PLAYERS: usize = 4;
pub const DEFAULT_ENTRY_CAP: usize = 2_000_000;
const PLAYER_GLYPHS: [char; MAX_GRID_PLAYERS] = ['^', '>', 'v', '<'];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Action {
    Up,
    Down,
    Left,
    Right,
    Stick,
}

impl Action {
    pub const ALL: [Action; 5] = [
        Action::Up,
        Action::Down,
        Action::Left,
        Action::Right,
        Action::Stick,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Action {
        Action::ALL[i]
    }

    pub fn name(self) -> &'static str {
        match self {
            Action::Up => "up",
            Action::Down => "down",
            Action::Left => "left",
            Action::Right => "right",
            Action::Stick => "stick",
        }
    }

    fn delta(self) -> (isize, isize) {
        match self {
            Action::Up => (0, -1),
            Action::Down => (0, 1),
            Action::Left => (-1, 0),
            Action::Right => (1, 0),
            Action::Stick => (0, 0),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlayerSpec {
    pub id: String,
    pub start: Cell,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GoalSpec {
    pub cell: Cell,
    pub reward: f64,
    /// Player ids; one owner for an individual goal, several for a shared one.
    pub owners: Vec<String>,
}

fn default_step_cost() -> f64 {
    -1.0
}

fn default_stick_cost() -> f64 {
    -0.1
}

fn default_gamma() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
    pub width: usize,
    pub height: usize,
    /// Row strings where `#` marks a blocked cell; any other character is open.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub mask: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub blocked: Vec<Cell>,
    /// Impassable edges, each given by the two adjacent cells it separates.
    #[serde(default)]
    pub walls: Vec<[Cell; 2]>,
    /// Edges crossed with probability 1/2 per attempt.
    #[serde(default)]
    pub semi_walls: Vec<[Cell; 2]>,
    pub players: Vec<PlayerSpec>,
    pub goals: Vec<GoalSpec>,
    #[serde(default = "default_step_cost")]
    pub step_cost: f64,
    #[serde(default = "default_stick_cost")]
    pub stick_cost: f64,
    #[serde(default = "default_gamma")]
    pub gamma: f64,
}

fn edge_key(a: Cell, b: Cell) -> (Cell, Cell) {
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}

impl GridSpec {
    pub fn num_players(&self) -> usize {
        self.players.len()
    }

    fn player_index(&self, id: &str) -> Option<usize> {
        self.players.iter().position(|p| p.id == id)
    }

    fn blocked_cells(&self) -> HashSet<Cell> {
        let mut out: HashSet<Cell> = self.blocked.iter().copied().collect();
        for (y, row) in self.mask.iter().enumerate() {
            for (x, ch) in row.chars().enumerate() {
                if ch == '#' {
                    out.insert((x, y));
                }
            }
        }
        out
    }

    /// Returns the first violated invariant, if any.
    pub fn validate(&self) -> Result<()> {
        let err = |msg: String| Err(Error::GridSpec(msg));
        if self.width == 0 || self.height == 0 {
            return err("grid must be at least 1x1".into());
        }
        if self.width * self.height > u16::MAX as usize {
            return err("grid has too many cells".into());
        }
        let n = self.players.len();
        if n == 0 || n > MAX_GRID_PLAYERS {
            return err(format!(
                "grid games need 1 to {MAX_GRID_PLAYERS} players, got {n}"
            ));
        }
        let in_bounds = |c: Cell| c.0 < self.width && c.1 < self.height;
        if !self.mask.is_empty()
            && (self.mask.len() != self.height
                || self.mask.iter().any(|r| r.chars().count() != self.width))
        {
            return err(format!(
                "mask must have {} rows of {} characters",
                self.height, self.width
            ));
        }
        if let Some(c) = self.blocked.iter().find(|&&c| !in_bounds(c)) {
            return err(format!("blocked cell {c:?} is outside the grid"));
        }
        let blocked = self.blocked_cells();
        let mut ids = HashSet::new();
        for p in &self.players {
            if !ids.insert(p.id.as_str()) {
                return err(format!("duplicate player id '{}'", p.id));
            }
            if !in_bounds(p.start) || blocked.contains(&p.start) {
                return err(format!("player {} starts outside the open grid", p.id));
            }
        }
        let starts: HashSet<Cell> = self.players.iter().map(|p| p.start).collect();
        if starts.len() != n {
            return err("starts must be distinct".into());
        }
        let edge_ok = |e: &[Cell; 2]| {
            let [a, b] = *e;
            in_bounds(a) && in_bounds(b) && a.0.abs_diff(b.0) + a.1.abs_diff(b.1) == 1
        };
        for (kind, edges) in [("wall", &self.walls), ("semi-wall", &self.semi_walls)] {
            if let Some(e) = edges.iter().find(|e| !edge_ok(e)) {
                return err(format!(
                    "{kind} {e:?} does not join two adjacent cells of the grid"
                ));
            }
        }
        let walls: HashSet<_> = self.walls.iter().map(|e| edge_key(e[0], e[1])).collect();
        if let Some(e) = self
            .semi_walls
            .iter()
            .find(|e| walls.contains(&edge_key(e[0], e[1])))
        {
            return err(format!("semi-wall {e:?} coincides with a wall"));
        }
        let mut goal_cells = HashSet::new();
        for g in &self.goals {
            if !in_bounds(g.cell) || blocked.contains(&g.cell) {
                return err(format!("goal {:?} is outside the open grid", g.cell));
            }
            if !goal_cells.insert(g.cell) {
                return err(format!("two goals share cell {:?}", g.cell));
            }
            if !(g.reward > 0.0 && g.reward.is_finite()) {
                return err(format!("goal {:?} must have a positive reward", g.cell));
            }
            if g.owners.is_empty() {
                return err(format!("goal {:?} has no owners", g.cell));
            }
            for o in &g.owners {
                let Some(i) = self.player_index(o) else {
                    return err(format!("goal {:?} names unknown player '{o}'", g.cell));
                };
                if self.players[i].start == g.cell {
                    return err(format!("player {o} starts on its own goal"));
                }
            }
        }
        for (name, v) in [
            ("step_cost", self.step_cost),
            ("stick_cost", self.stick_cost),
        ] {
            if !v.is_finite() {
                return err(format!("{name} must be finite"));
            }
        }
        if !(0.0..=1.0).contains(&self.gamma) {
            return err(format!("gamma must lie in [0, 1], got {}", self.gamma));
        }
        Ok(())
    }

    pub fn start_state(&self) -> GridState {
        GridState {
            positions: self.players.iter().map(|p| p.start).collect(),
            terminal: false,
        }
    }
}

pub fn parse_grid_spec(text: &str) -> Result<GridSpec> {
    let spec: GridSpec = serde_json::from_str(text).map_err(|e| Error::GridSpec(e.to_string()))?;
    spec.validate()?;
    Ok(spec)
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct GridState {
    pub positions: Vec<Cell>,
    pub terminal: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MoveOutcome {
    pub next: GridState,
    pub prob: f64,
    pub rewards: Vec<f64>,
}

/// Precomputed geometry over flat cell indices.
#[derive(Debug, Clone)]
struct Board {
    width: usize,
    height: usize,
    blocked: Vec<bool>,
    walls: HashSet<(u16, u16)>,
    semi_walls: HashSet<(u16, u16)>,
    /// Reward and owner bitmask per cell.
    goals: Vec<Option<(f64, u32)>>,
    step_cost: f64,
    stick_cost: f64,
}

enum Intent {
    Stay,
    Move { target: u16, semi: bool },
}

impl Board {
    fn new(spec: &GridSpec) -> Self {
        let idx = |c: Cell| (c.1 * spec.width + c.0) as u16;
        let key = |e: &[Cell; 2]| {
            let (a, b) = (idx(e[0]), idx(e[1]));
            (a.min(b), a.max(b))
        };
        let mut blocked = vec![false; spec.width * spec.height];
        for c in spec.blocked_cells() {
            blocked[c.1 * spec.width + c.0] = true;
        }
        let mut goals = vec![None; spec.width * spec.height];
        for g in &spec.goals {
            let owners = g
                .owners
                .iter()
                .filter_map(|o| spec.player_index(o))
                .fold(0u32, |m, i| m | (1 << i));
            goals[idx(g.cell) as usize] = Some((g.reward, owners));
        }
        Board {
            width: spec.width,
            height: spec.height,
            blocked,
            walls: spec.walls.iter().map(key).collect(),
            semi_walls: spec.semi_walls.iter().map(key).collect(),
            goals,
            step_cost: spec.step_cost,
            stick_cost: spec.stick_cost,
        }
    }

    fn cell(&self, i: u16) -> Cell {
        (i as usize % self.width, i as usize / self.width)
    }

    fn index(&self, c: Cell) -> u16 {
        (c.1 * self.width + c.0) as u16
    }

    fn intent(&self, from: u16, action: Action) -> Intent {
        if action == Action::Stick {
            return Intent::Stay;
        }
        let (x, y) = self.cell(from);
        let (dx, dy) = action.delta();
        let (nx, ny) = (x as isize + dx, y as isize + dy);
        if nx < 0 || ny < 0 || nx >= self.width as isize || ny >= self.height as isize {
            return Intent::Stay;
        }
        let to = self.index((nx as usize, ny as usize));
        let edge = (from.min(to), from.max(to));
        if self.blocked[to as usize] || self.walls.contains(&edge) {
            return Intent::Stay;
        }
        Intent::Move {
            target: to,
            semi: self.semi_walls.contains(&edge),
        }
    }

    fn scores(&self, positions: &[u16], player: usize) -> Option<f64> {
        match self.goals[positions[player] as usize] {
            Some((reward, owners)) if owners & (1 << player) != 0 => Some(reward),
            _ => None,
        }
    }

    /// All outcomes of one joint action as (positions, probability), merged and sorted.
    fn outcomes(&self, positions: &[u16], actions: &[Action]) -> Vec<(Vec<u16>, f64)> {
        let n = positions.len();
        let mut targets: Vec<Option<u16>> = vec![None; n];
        let mut semi_movers = Vec::new();
        for i in 0..n {
            if let Intent::Move { target, semi } = self.intent(positions[i], actions[i]) {
                targets[i] = Some(target);
                if semi {
                    semi_movers.push(i);
                }
            }
        }
        let mut merged: BTreeMap<Vec<u16>, f64> = BTreeMap::new();
        let branches = 1usize << semi_movers.len();
        let branch_prob = 1.0 / branches as f64;
        for mask in 0..branches {
            let mut branch_targets = targets.clone();
            for (k, &i) in semi_movers.iter().enumerate() {
                if mask & (1 << k) == 0 {
                    branch_targets[i] = None;
                }
            }
            for (finals, p) in resolve_conflicts(positions, branch_targets) {
                *merged.entry(finals).or_insert(0.0) += p * branch_prob;
            }
        }
        merged.into_iter().collect()
    }

    fn rewards(&self, finals: &[u16], actions: &[Action]) -> (Vec<f64>, bool) {
        let mut terminal = false;
        let rewards = actions
            .iter()
            .enumerate()
            .map(|(i, &a)| {
                let cost = if a == Action::Stick {
                    self.stick_cost
                } else {
                    self.step_cost
                };
                match self.scores(finals, i) {
                    Some(r) => {
                        terminal = true;
                        cost + r
                    }
                    None => cost,
                }
            })
            .collect();
        (rewards, terminal)
    }
}

/// Resolves movers' targets into final positions, branching on contested cells.
fn resolve_conflicts(positions: &[u16], mut targets: Vec<Option<u16>>) -> Vec<(Vec<u16>, f64)> {
    let n = positions.len();
    loop {
        // Movers bumping into someone who stays put stay put themselves.
        let mut changed = true;
        while changed {
            changed = false;
            for i in 0..n {
                if let Some(t) = targets[i] {
                    if (0..n).any(|j| j != i && targets[j].is_none() && positions[j] == t) {
                        targets[i] = None;
                        changed = true;
                    }
                }
            }
        }
        // Swaps are blocked.
        let swap = (0..n)
            .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
            .find(|&(i, j)| targets[i] == Some(positions[j]) && targets[j] == Some(positions[i]));
        if let Some((i, j)) = swap {
            targets[i] = None;
            targets[j] = None;
            continue;
        }
        // Contested cells: uniform winner, lowest contested cell first.
        let mut contest: Option<(u16, Vec<usize>)> = None;
        for i in 0..n {
            if let Some(t) = targets[i] {
                let rivals: Vec<usize> = (0..n).filter(|&j| targets[j] == Some(t)).collect();
                if rivals.len() > 1 && contest.as_ref().map_or(true, |(c, _)| t < *c) {
                    contest = Some((t, rivals));
                }
            }
        }
        if let Some((_, rivals)) = contest {
            let share = 1.0 / rivals.len() as f64;
            let mut out = Vec::new();
            for &winner in &rivals {
                let mut branch = targets.clone();
                for &loser in rivals.iter().filter(|&&j| j != winner) {
                    branch[loser] = None;
                }
                out.extend(
                    resolve_conflicts(positions, branch)
                        .into_iter()
                        .map(|(f, p)| (f, p * share)),
                );
            }
            return out;
        }
        // Rotations never vacate a cell first, so the whole cycle stays.
        let mut cycle = None;
        'search: for start in 0..n {
            let mut i = start;
            for _ in 0..n {
                let Some(t) = targets[i] else { break };
                match (0..n).find(|&j| positions[j] == t) {
                    Some(j) if targets[j].is_some() => {
                        if j == start {
                            cycle = Some(start);
                            break 'search;
                        }
                        i = j;
                    }
                    _ => break,
                }
            }
        }
        if let Some(start) = cycle {
            let mut i = start;
            loop {
                let t = targets[i].take().expect("cycle members are movers");
                i = (0..n)
                    .find(|&j| positions[j] == t)
                    .expect("cycle target is occupied");
                if i == start {
                    break;
                }
            }
            continue;
        }
        let finals = (0..n).map(|i| targets[i].unwrap_or(positions[i])).collect();
        return vec![(finals, 1.0)];
    }
}

/// Every resolution of one joint move from a nonterminal state.
pub fn joint_move_outcomes(
    spec: &GridSpec,
    state: &GridState,
    actions: &[Action],
) -> Result<Vec<MoveOutcome>> {
    if state.terminal {
        return Err(Error::InvalidInput(
            "no moves are played from a terminal state".into(),
        ));
    }
    if actions.len() != spec.num_players() || state.positions.len() != spec.num_players() {
        return Err(Error::InvalidInput(
            "one action and one position per player are required".into(),
        ));
    }
    let board = Board::new(spec);
    let positions: Vec<u16> = state.positions.iter().map(|&c| board.index(c)).collect();
    Ok(board
        .outcomes(&positions, actions)
        .into_iter()
        .map(|(finals, prob)| {
            let (rewards, terminal) = board.rewards(&finals, actions);
            MoveOutcome {
                next: GridState {
                    positions: finals.iter().map(|&c| board.cell(c)).collect(),
                    terminal,
                },
                prob,
                rewards,
            }
        })
        .collect())
}

/// A grid game compiled to an explicit model, with the state labels.
#[derive(Debug, Clone)]
pub struct CompiledGrid {
    pub spec: GridSpec,
    pub game: StochasticGame,
    /// `states[s]` is the grid configuration of stochastic-game state `s`.
    pub states: Vec<GridState>,
}

impl CompiledGrid {
    pub fn state_index(&self, state: &GridState) -> Option<usize> {
        self.states.iter().position(|s| s == state)
    }
}

pub fn compile_grid(spec: &GridSpec) -> Result<CompiledGrid> {
    compile_grid_with_cap(spec, DEFAULT_ENTRY_CAP)
}

/// Breadth-first closure from the start configuration. `entry_cap` bounds the
/// number of (state, joint action, next state) entries.
pub fn compile_grid_with_cap(spec: &GridSpec, entry_cap: usize) -> Result<CompiledGrid> {
    spec.validate()?;
    let n = spec.num_players();
    let board = Board::new(spec);
    let space = ActionSpace::new(vec![Action::ALL.len(); n])?;
    let joints = space.size();
    let start: Vec<u16> = spec.players.iter().map(|p| board.index(p.start)).collect();

    let mut index: HashMap<Vec<u16>, usize> = HashMap::new();
    let mut configs: Vec<(Vec<u16>, bool)> = Vec::new();
    index.insert(start.clone(), 0);
    configs.push((start, false));

    let mut offsets = vec![0usize];
    let (mut next, mut prob, mut rewards) = (Vec::new(), Vec::new(), Vec::new());
    let mut profile = vec![0; n];
    let mut actions = vec![Action::Stick; n];
    let mut s = 0;
    while s < configs.len() {
        if configs[s].1 {
            s += 1;
            continue;
        }
        let positions = configs[s].0.clone();
        for joint in 0..joints {
            space.decode_into(joint, &mut profile);
            for (a, &p) in actions.iter_mut().zip(&profile) {
                *a = Action::from_index(p);
            }
            for (finals, p) in board.outcomes(&positions, &actions) {
                let (r, terminal) = board.rewards(&finals, &actions);
                let id = match index.get(&finals) {
                    Some(&id) => id,
                    None => {
                        let id = configs.len();
                        index.insert(finals.clone(), id);
                        configs.push((finals, terminal));
                        id
                    }
                };
                next.push(id as u32);
                prob.push(p);
                rewards.extend(r);
            }
            offsets.push(next.len());
            if next.len() > entry_cap {
                return Err(Error::TooLarge {
                    entries: next.len(),
                    cap: entry_cap,
                });
            }
        }
        s += 1;
    }
    let terminal: Vec<bool> = configs.iter().map(|c| c.1).collect();
    let stick_all = space.encode(&vec![Action::Stick.index(); n]);
    let game = StochasticGame::from_csr(
        space, terminal, 0, spec.gamma, stick_all, offsets, next, prob, rewards,
    )?;
    let states = configs
        .into_iter()
        .map(|(p, terminal)| GridState {
            positions: p.iter().map(|&c| board.cell(c)).collect(),
            terminal,
        })
        .collect();
    Ok(CompiledGrid {
        spec: spec.clone(),
        game,
        states,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Canonical {
    Prisoners,
    Coordination,
    Turkey,
    FriendOrFoe,
}

impl Canonical {
    pub const ALL: [Canonical; 4] = [
        Canonical::Prisoners,
        Canonical::Coordination,
        Canonical::Turkey,
        Canonical::FriendOrFoe,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Canonical::Prisoners => "prisoners",
            Canonical::Coordination => "coordination",
            Canonical::Turkey => "turkey",
            Canonical::FriendOrFoe => "friend_or_foe",
        }
    }

    fn source(self) -> &'static str {
        match self {
            Canonical::Prisoners => include_str!("../games/prisoners.json"),
            Canonical::Coordination => include_str!("../games/coordination.json"),
            Canonical::Turkey => include_str!("../games/turkey.json"),
            Canonical::FriendOrFoe => include_str!("../games/friend_or_foe.json"),
        }
    }
}

impl std::str::FromStr for Canonical {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "prisoners" => Ok(Canonical::Prisoners),
            "coordination" => Ok(Canonical::Coordination),
            "turkey" => Ok(Canonical::Turkey),
            "friend_or_foe" | "friendorfoe" => Ok(Canonical::FriendOrFoe),
            other => Err(Error::InvalidInput(format!(
                "unknown game '{other}' (expected prisoners, coordination, turkey or friend_or_foe)"
            ))),
        }
    }
}

pub fn canonical_game(name: &str) -> Result<GridSpec> {
    let which: Canonical = name.parse()?;
    parse_grid_spec(which.source())
}

fn player_letter(spec: &GridSpec, i: usize) -> char {
    spec.players[i].id.chars().next().unwrap_or('?')
}

/// ASCII board. Players are drawn by the first letter of their id; goal cells
/// carry one directional glyph per owner (`^ > v <` for players 1-4). Walls are
/// `|`/`---`, semi-walls `:`/`- -`, blocked cells `#`.
pub fn render_grid(spec: &GridSpec, state: Option<&GridState>) -> String {
    const W: usize = 5;
    let blocked = spec.blocked_cells();
    let walls: HashSet<_> = spec.walls.iter().map(|e| edge_key(e[0], e[1])).collect();
    let semi: HashSet<_> = spec
        .semi_walls
        .iter()
        .map(|e| edge_key(e[0], e[1]))
        .collect();
    let goals: HashMap<Cell, &GoalSpec> = spec.goals.iter().map(|g| (g.cell, g)).collect();
    let positions: Vec<Cell> = state
        .map(|s| s.positions.clone())
        .unwrap_or_else(|| spec.start_state().positions);
    let mut out = String::new();
    for y in 0..=spec.height {
        // Horizontal edge line above row y.
        out.push('+');
        for x in 0..spec.width {
            let seg = if y == 0 || y == spec.height {
                "-----"
            } else {
                let e = edge_key((x, y - 1), (x, y));
                if walls.contains(&e)
                    || (blocked.contains(&(x, y - 1)) != blocked.contains(&(x, y)))
                {
                    "-----"
                } else if semi.contains(&e) {
                    " - - "
                } else {
                    "     "
                }
            };
            out.push_str(seg);
            out.push('+');
        }
        out.push('\n');
        if y == spec.height {
            break;
        }
        out.push('|');
        for x in 0..spec.width {
            let mut body = String::new();
            if blocked.contains(&(x, y)) {
                body.push_str("#####");
            } else {
                match positions.iter().position(|&p| p == (x, y)) {
                    Some(i) => body.push(player_letter(spec, i)),
                    None => body.push(' '),
                }
                if let Some(g) = goals.get(&(x, y)) {
                    for o in &g.owners {
                        if let Some(i) = spec.player_index(o) {
                            body.push(PLAYER_GLYPHS[i]);
                        }
                    }
                }
                while body.chars().count() < W {
                    body.push(' ');
                }
            }
            out.extend(body.chars().take(W));
            let sep = if x + 1 == spec.width {
                '|'
            } else {
                let e = edge_key((x, y), (x + 1, y));
                if walls.contains(&e)
                    || (blocked.contains(&(x, y)) != blocked.contains(&(x + 1, y)))
                {
                    '|'
                } else if semi.contains(&e) {
                    ':'
                } else {
                    ' '
                }
            };
            out.push(sep);
        }
        out.push('\n');
    }
    out
}

/// One labeled board per visited state.
pub fn render_path(spec: &GridSpec, path: &[(GridState, Option<Vec<Action>>)]) -> String {
    let mut out = String::new();
    for (t, (state, actions)) in path.iter().enumerate() {
        let _ = write!(out, "t={t}");
        if state.terminal {
            out.push_str(" (terminal)");
        }
        if let Some(actions) = actions {
            let names: Vec<String> = actions
                .iter()
                .enumerate()
                .map(|(i, a)| format!("{}:{}", player_letter(spec, i), a.name()))
                .collect();
            let _ = write!(out, "  next: {}", names.join(" "));
        }
        out.push('\n');
        out.push_str(&render_grid(spec, Some(state)));
    }
    out
}
