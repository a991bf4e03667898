//! n-player normal-form games, coalitions, and the coalition / grand-coalition
//! constructions used by the value decomposition.
//!
//! Joint actions are indexed as mixed-radix integers with player 0 as the
//! most significant digit. Every module relies on this convention.

use std::fmt;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::lp::{solve_zero_sum, Matrix};

/// Maximum number of players; coalitions are stored as `u32` bitmasks.
pub const MAX_PLAYERS: usize = 16;

/// Mixed-radix encoding of joint actions.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ActionSpace {
    counts: Vec<usize>,
    strides: Vec<usize>,
    size: usize,
}

impl ActionSpace {
    pub fn new(counts: Vec<usize>) -> Result<Self> {
        if counts.is_empty() || counts.len() > MAX_PLAYERS {
            return Err(Error::InvalidInput(format!(
                "player count must be in 1..={MAX_PLAYERS}, got {}",
                counts.len()
            )));
        }
        if counts.iter().any(|&c| c == 0) {
            return Err(Error::InvalidInput(
                "every player needs at least one action".into(),
            ));
        }
        let mut strides = vec![1; counts.len()];
        for i in (0..counts.len() - 1).rev() {
            strides[i] = strides[i + 1] * counts[i + 1];
        }
        let size = counts
            .iter()
            .try_fold(1usize, |acc, &c| acc.checked_mul(c))
            .ok_or_else(|| Error::InvalidInput("joint action space overflows".into()))?;
        Ok(Self {
            counts,
            strides,
            size,
        })
    }

    pub fn num_players(&self) -> usize {
        self.counts.len()
    }

    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    pub fn stride(&self, player: usize) -> usize {
        self.strides[player]
    }

    /// Number of joint actions.
    pub fn size(&self) -> usize {
        self.size
    }

    pub fn encode(&self, profile: &[usize]) -> usize {
        profile.iter().zip(&self.strides).map(|(a, s)| a * s).sum()
    }

    pub fn decode(&self, joint: usize) -> Vec<usize> {
        let mut out = vec![0; self.counts.len()];
        self.decode_into(joint, &mut out);
        out
    }

    pub fn decode_into(&self, joint: usize, out: &mut [usize]) {
        for (i, o) in out.iter_mut().enumerate() {
            *o = (joint / self.strides[i]) % self.counts[i];
        }
    }

    pub fn action_of(&self, joint: usize, player: usize) -> usize {
        (joint / self.strides[player]) % self.counts[player]
    }
}

/// A set of players as a bitmask (bit `i` is player `i`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Coalition(u32);

impl Coalition {
    pub const EMPTY: Coalition = Coalition(0);

    pub fn from_bits(bits: u32) -> Self {
        Coalition(bits)
    }

    pub fn from_players(players: impl IntoIterator<Item = usize>) -> Self {
        Coalition(players.into_iter().fold(0, |acc, p| acc | (1 << p)))
    }

    pub fn grand(n: usize) -> Self {
        Coalition(((1u64 << n) - 1) as u32)
    }

    pub fn bits(self) -> u32 {
        self.0
    }

    pub fn contains(self, player: usize) -> bool {
        self.0 & (1 << player) != 0
    }

    pub fn size(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn complement(self, n: usize) -> Self {
        Coalition(Coalition::grand(n).0 & !self.0)
    }

    /// Nonempty and not the grand coalition (and within the player range).
    pub fn is_proper(self, n: usize) -> bool {
        let grand = Coalition::grand(n).0;
        self.0 != 0 && self.0 & !grand == 0 && self.0 != grand
    }

    pub fn members(self, n: usize) -> impl Iterator<Item = usize> {
        (0..n).filter(move |&i| self.contains(i))
    }

    /// All nonempty coalitions of `n` players, in bitmask order.
    pub fn all_nonempty(n: usize) -> impl Iterator<Item = Coalition> {
        (1..=Coalition::grand(n).0).map(Coalition)
    }

    /// One coalition from each complementary pair: the proper coalitions not
    /// containing the last player.
    pub fn complement_representatives(n: usize) -> impl Iterator<Item = Coalition> {
        let half = if n == 0 { 0 } else { 1u32 << (n - 1) };
        (1..half).map(Coalition)
    }
}

impl fmt::Display for Coalition {
    /// One-based member list, e.g. `{1,3}`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let members: Vec<String> = (0..32)
            .filter(|&i| self.contains(i))
            .map(|i| (i + 1).to_string())
            .collect();
        write!(f, "{{{}}}", members.join(","))
    }
}

impl Serialize for Coalition {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let members: Vec<usize> = (0..32).filter(|&i| self.contains(i)).collect();
        members.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Coalition {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let members = Vec::<usize>::deserialize(d)?;
        if let Some(&bad) = members.iter().find(|&&p| p >= MAX_PLAYERS) {
            return Err(serde::de::Error::custom(format!(
                "player index {bad} out of range"
            )));
        }
        Ok(Coalition::from_players(members))
    }
}

/// Dense n-player normal-form game.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalFormGame {
    space: ActionSpace,
    /// `utilities[joint * n + player]`
    utilities: Vec<f64>,
}

impl NormalFormGame {
    /// `utilities` is joint-major: the payoff vector of each joint action in turn.
    pub fn new(action_counts: Vec<usize>, utilities: Vec<f64>) -> Result<Self> {
        let space = ActionSpace::new(action_counts)?;
        let expected = space.size() * space.num_players();
        if utilities.len() != expected {
            return Err(Error::InvalidInput(format!(
                "utility tensor has {} entries, expected {expected}",
                utilities.len()
            )));
        }
        if utilities.iter().any(|u| !u.is_finite()) {
            return Err(Error::InvalidInput("utilities must be finite".into()));
        }
        Ok(Self { space, utilities })
    }

    /// Builds a game from a payoff function of the action profile.
    pub fn from_fn(
        action_counts: Vec<usize>,
        mut f: impl FnMut(&[usize]) -> Vec<f64>,
    ) -> Result<Self> {
        let space = ActionSpace::new(action_counts.clone())?;
        let n = space.num_players();
        let mut utilities = Vec::with_capacity(space.size() * n);
        let mut profile = vec![0; n];
        for joint in 0..space.size() {
            space.decode_into(joint, &mut profile);
            let payoff = f(&profile);
            if payoff.len() != n {
                return Err(Error::InvalidInput(format!(
                    "payoff vector has {} entries for {n} players",
                    payoff.len()
                )));
            }
            utilities.extend(payoff);
        }
        Self::new(action_counts, utilities)
    }

    pub fn num_players(&self) -> usize {
        self.space.num_players()
    }

    pub fn action_counts(&self) -> &[usize] {
        self.space.counts()
    }

    pub fn action_space(&self) -> &ActionSpace {
        &self.space
    }

    pub fn num_joint(&self) -> usize {
        self.space.size()
    }

    pub fn utility(&self, joint: usize, player: usize) -> f64 {
        self.utilities[joint * self.num_players() + player]
    }

    pub fn payoffs(&self, joint: usize) -> &[f64] {
        let n = self.num_players();
        &self.utilities[joint * n..(joint + 1) * n]
    }

    /// Adds `delta` to every payoff of `player`.
    pub fn translated(&self, player: usize, delta: f64) -> Self {
        let n = self.num_players();
        let mut utilities = self.utilities.clone();
        for joint in 0..self.num_joint() {
            utilities[joint * n + player] += delta;
        }
        Self {
            space: self.space.clone(),
            utilities,
        }
    }

    /// Relabels players: player `i` of the result is player `perm[i]` of `self`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        let n = self.num_players();
        let mut seen = vec![false; n];
        if perm.len() != n
            || perm
                .iter()
                .any(|&p| p >= n || std::mem::replace(&mut seen[p], true))
        {
            return Err(Error::InvalidInput(
                "not a permutation of the players".into(),
            ));
        }
        let counts: Vec<usize> = perm.iter().map(|&p| self.action_counts()[p]).collect();
        let mut original = vec![0; n];
        Self::from_fn(counts, |profile| {
            for (i, &p) in perm.iter().enumerate() {
                original[p] = profile[i];
            }
            let joint = self.space.encode(&original);
            perm.iter().map(|&p| self.utility(joint, p)).collect()
        })
    }

    /// Parses `{"players": n, "actions": [...], "utilities": nested}` where the
    /// nesting is action of player 1 -> ... -> action of player n -> payoff vector.
    pub fn from_json_str(text: &str) -> Result<Self> {
        let doc: NormalFormJson = serde_json::from_str(text)?;
        doc.into_game()
    }

    pub fn to_json_value(&self) -> Value {
        fn nest(g: &NormalFormGame, depth: usize, prefix: usize) -> Value {
            let n = g.num_players();
            if depth == n {
                return Value::from(g.payoffs(prefix).to_vec());
            }
            let items = (0..g.action_counts()[depth])
                .map(|a| nest(g, depth + 1, prefix + a * g.space.stride(depth)))
                .collect();
            Value::Array(items)
        }
        serde_json::json!({
            "players": self.num_players(),
            "actions": self.action_counts(),
            "utilities": nest(self, 0, 0),
        })
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct NormalFormJson {
    players: usize,
    actions: Vec<usize>,
    utilities: Value,
}

impl NormalFormJson {
    fn into_game(self) -> Result<NormalFormGame> {
        if self.actions.len() != self.players {
            return Err(Error::InvalidInput(format!(
                "\"actions\" lists {} players but \"players\" is {}",
                self.actions.len(),
                self.players
            )));
        }
        let mut flat = Vec::new();
        flatten(&self.utilities, &self.actions, 0, self.players, &mut flat)?;
        NormalFormGame::new(self.actions, flat)
    }
}

fn flatten(v: &Value, actions: &[usize], depth: usize, n: usize, out: &mut Vec<f64>) -> Result<()> {
    let arr = v.as_array().ok_or_else(|| {
        Error::InvalidInput(format!("utilities: expected an array at depth {depth}"))
    })?;
    if depth == actions.len() {
        if arr.len() != n {
            return Err(Error::InvalidInput(format!(
                "utilities: payoff vector has {} entries, expected {n}",
                arr.len()
            )));
        }
        for x in arr {
            out.push(
                x.as_f64().ok_or_else(|| {
                    Error::InvalidInput("utilities: payoffs must be numbers".into())
                })?,
            );
        }
        return Ok(());
    }
    if arr.len() != actions[depth] {
        return Err(Error::InvalidInput(format!(
            "utilities: player {} has {} actions but the array at depth {depth} has {} entries",
            depth + 1,
            actions[depth],
            arr.len()
        )));
    }
    arr.iter()
        .try_for_each(|item| flatten(item, actions, depth + 1, n, out))
}

/// Splits joint actions into (coalition action, complement action) coordinates.
///
/// Rows enumerate the members' actions in mixed radix (lowest player index most
/// significant); columns do the same for the complement.
#[derive(Debug, Clone)]
pub struct CoalitionSplit {
    coalition: Coalition,
    rows: usize,
    cols: usize,
    /// Flat matrix position `row * cols + col` of each joint action.
    cell_of_joint: Vec<usize>,
}

impl CoalitionSplit {
    pub fn new(space: &ActionSpace, coalition: Coalition) -> Result<Self> {
        let n = space.num_players();
        if !coalition.is_proper(n) {
            return Err(Error::InvalidCoalition(coalition));
        }
        let counts = space.counts();
        let rows: usize = coalition.members(n).map(|i| counts[i]).product();
        let cols: usize = coalition
            .complement(n)
            .members(n)
            .map(|i| counts[i])
            .product();
        let mut profile = vec![0; n];
        let cell_of_joint = (0..space.size())
            .map(|joint| {
                space.decode_into(joint, &mut profile);
                let (mut r, mut c) = (0, 0);
                for i in 0..n {
                    if coalition.contains(i) {
                        r = r * counts[i] + profile[i];
                    } else {
                        c = c * counts[i] + profile[i];
                    }
                }
                r * cols + c
            })
            .collect();
        Ok(Self {
            coalition,
            rows,
            cols,
            cell_of_joint,
        })
    }

    pub fn coalition(&self) -> Coalition {
        self.coalition
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn cell_of_joint(&self, joint: usize) -> usize {
        self.cell_of_joint[joint]
    }

    /// Scatters a per-joint-action value vector into the coalition's matrix.
    pub fn to_matrix(&self, per_joint: &[f64]) -> Result<Matrix> {
        let mut entries = vec![0.0; self.rows * self.cols];
        for (joint, &v) in per_joint.iter().enumerate() {
            entries[self.cell_of_joint[joint]] = v;
        }
        Matrix::new(self.rows, self.cols, entries)
    }

    /// `+1` for members, `-1` for the complement.
    pub fn signs(&self, n: usize) -> Vec<f64> {
        (0..n)
            .map(|i| {
                if self.coalition.contains(i) {
                    1.0
                } else {
                    -1.0
                }
            })
            .collect()
    }
}

/// The two-player zero-sum game where a coalition plays its complement.
#[derive(Debug, Clone)]
pub struct CoalitionGame {
    pub coalition: Coalition,
    /// Payoff to the coalition; the complement receives the negation.
    pub payoff: Matrix,
}

pub fn build_coalition_game(g: &NormalFormGame, coalition: Coalition) -> Result<CoalitionGame> {
    let split = CoalitionSplit::new(g.action_space(), coalition)?;
    let signs = split.signs(g.num_players());
    let per_joint: Vec<f64> = (0..g.num_joint())
        .map(|a| g.payoffs(a).iter().zip(&signs).map(|(u, s)| u * s).sum())
        .collect();
    Ok(CoalitionGame {
        coalition,
        payoff: split.to_matrix(&per_joint)?,
    })
}

/// Best total payoff over joint actions and the first joint action attaining it.
pub fn maxmax_value(g: &NormalFormGame) -> (f64, usize) {
    let mut best = (f64::NEG_INFINITY, 0);
    for joint in 0..g.num_joint() {
        let total: f64 = g.payoffs(joint).iter().sum();
        if total > best.0 {
            best = (total, joint);
        }
    }
    best
}

pub fn coalition_maxmin(g: &NormalFormGame, coalition: Coalition) -> Result<f64> {
    let game = build_coalition_game(g, coalition)?;
    Ok(solve_zero_sum(&game.payoff)?.value)
}
