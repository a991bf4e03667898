//! Explicit-model stochastic games and the synchronous value-iteration loop.
//!
//! Transition rows are stored only for nonterminal states; terminal states
//! are absorbing with zero reward and always have value zero.

use std::collections::VecDeque;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::normal_form::{ActionSpace, NormalFormGame};

/// Tolerance on the sum of each transition distribution.
pub const PROBABILITY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy)]
pub struct Outcome<'a> {
    pub next: usize,
    pub prob: f64,
    pub rewards: &'a [f64],
}

#[derive(Debug, Clone)]
pub struct StochasticGame {
    space: ActionSpace,
    terminal: Vec<bool>,
    start: usize,
    gamma: f64,
    /// Joint action used as the no-op at terminal states.
    idle_action: usize,
    /// Position of each nonterminal state in the row table.
    row_block: Vec<Option<usize>>,
    /// CSR offsets: row `block * J + joint` spans `offsets[row]..offsets[row + 1]`.
    offsets: Vec<usize>,
    next: Vec<u32>,
    prob: Vec<f64>,
    rewards: Vec<f64>,
}

impl StochasticGame {
    /// Assembles a game from rows already laid out in CSR order (nonterminal
    /// states ascending, joint actions ascending within a state).
    #[allow(clippy::too_many_arguments)]
    pub(crate) fn from_csr(
        space: ActionSpace,
        terminal: Vec<bool>,
        start: usize,
        gamma: f64,
        idle_action: usize,
        offsets: Vec<usize>,
        next: Vec<u32>,
        prob: Vec<f64>,
        rewards: Vec<f64>,
    ) -> Result<Self> {
        let mut row_block = vec![None; terminal.len()];
        let mut block = 0;
        for (state, &t) in terminal.iter().enumerate() {
            if !t {
                row_block[state] = Some(block);
                block += 1;
            }
        }
        let n = space.num_players();
        if offsets.len() != block * space.size() + 1
            || next.len() != prob.len()
            || rewards.len() != next.len() * n
            || start >= terminal.len()
            || idle_action >= space.size()
        {
            return Err(Error::InvalidInput("inconsistent transition table".into()));
        }
        Ok(StochasticGame {
            space,
            terminal,
            start,
            gamma,
            idle_action,
            row_block,
            offsets,
            next,
            prob,
            rewards,
        })
    }

    pub fn num_players(&self) -> usize {
        self.space.num_players()
    }

    pub fn num_states(&self) -> usize {
        self.terminal.len()
    }

    pub fn action_space(&self) -> &ActionSpace {
        &self.space
    }

    pub fn num_joint(&self) -> usize {
        self.space.size()
    }

    pub fn is_terminal(&self, state: usize) -> bool {
        self.terminal[state]
    }

    pub fn terminal_flags(&self) -> &[bool] {
        &self.terminal
    }

    pub fn start(&self) -> usize {
        self.start
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn idle_action(&self) -> usize {
        self.idle_action
    }

    /// Total number of stored (state, joint action, next state) entries.
    pub fn num_entries(&self) -> usize {
        self.next.len()
    }

    /// Outcomes of playing `joint` at `state`. Terminal states yield a single
    /// zero-reward self-loop.
    pub fn outcomes(&self, state: usize, joint: usize) -> OutcomeIter<'_> {
        match self.row_block[state] {
            Some(block) => {
                let row = block * self.num_joint() + joint;
                OutcomeIter {
                    game: self,
                    range: self.offsets[row]..self.offsets[row + 1],
                    absorbing: None,
                }
            }
            None => OutcomeIter {
                game: self,
                range: 0..0,
                absorbing: Some(state),
            },
        }
    }

    /// `sum_y P(x,a,y) [R_i(x,a,y) + gamma V_i(y)]` for every player.
    pub fn expected_utilities(
        &self,
        state: usize,
        joint: usize,
        values: &ValueVector,
        out: &mut [f64],
    ) {
        out.iter_mut().for_each(|o| *o = 0.0);
        for o in self.outcomes(state, joint) {
            let cont = values.get(o.next);
            for (i, slot) in out.iter_mut().enumerate() {
                *slot += o.prob * (o.rewards[i] + self.gamma * cont[i]);
            }
        }
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let doc: StochasticGameJson = serde_json::from_str(text)?;
        doc.into_game()
    }

    pub fn to_json(&self) -> StochasticGameJson {
        let n = self.num_players();
        let mut transitions = Vec::new();
        for state in (0..self.num_states()).filter(|&s| !self.terminal[s]) {
            for joint in 0..self.num_joint() {
                transitions.push(TransitionJson {
                    state,
                    joint: self.space.decode(joint),
                    outcomes: self
                        .outcomes(state, joint)
                        .map(|o| OutcomeJson {
                            next: o.next,
                            prob: o.prob,
                            rewards: o.rewards[..n].to_vec(),
                        })
                        .collect(),
                });
            }
        }
        StochasticGameJson {
            players: n,
            actions: self.space.counts().to_vec(),
            states: self.num_states(),
            start: self.start,
            gamma: self.gamma,
            terminal: (0..self.num_states())
                .filter(|&s| self.terminal[s])
                .collect(),
            transitions,
        }
    }
}

pub struct OutcomeIter<'a> {
    game: &'a StochasticGame,
    range: std::ops::Range<usize>,
    absorbing: Option<usize>,
}

const ZERO_REWARDS: [f64; crate::normal_form::MAX_PLAYERS] = [0.0; crate::normal_form::MAX_PLAYERS];

impl<'a> Iterator for OutcomeIter<'a> {
    type Item = Outcome<'a>;

    fn next(&mut self) -> Option<Outcome<'a>> {
        if let Some(state) = self.absorbing.take() {
            return Some(Outcome {
                next: state,
                prob: 1.0,
                rewards: &ZERO_REWARDS[..self.game.num_players()],
            });
        }
        let k = self.range.next()?;
        let n = self.game.num_players();
        Some(Outcome {
            next: self.game.next[k] as usize,
            prob: self.game.prob[k],
            rewards: &self.game.rewards[k * n..(k + 1) * n],
        })
    }
}

/// Incremental construction with validation at [`StochasticGameBuilder::build`].
#[derive(Debug, Clone)]
pub struct StochasticGameBuilder {
    space: ActionSpace,
    terminal: Vec<bool>,
    start: usize,
    gamma: f64,
    idle_action: usize,
    rows: Vec<Option<Vec<(usize, f64, Vec<f64>)>>>,
    num_states: usize,
}

impl StochasticGameBuilder {
    pub fn new(action_counts: Vec<usize>, num_states: usize, gamma: f64) -> Result<Self> {
        let space = ActionSpace::new(action_counts)?;
        Ok(Self {
            rows: vec![None; num_states * space.size()],
            space,
            terminal: vec![false; num_states],
            start: 0,
            gamma,
            idle_action: 0,
            num_states,
        })
    }

    pub fn terminal(mut self, state: usize) -> Self {
        if state < self.num_states {
            self.terminal[state] = true;
        }
        self
    }

    pub fn start(mut self, state: usize) -> Self {
        self.start = state;
        self
    }

    pub fn idle_action(mut self, joint: usize) -> Self {
        self.idle_action = joint;
        self
    }

    /// Sets the outcome list `(next, prob, rewards)` for one (state, joint action).
    pub fn row(
        &mut self,
        state: usize,
        joint: usize,
        outcomes: Vec<(usize, f64, Vec<f64>)>,
    ) -> Result<()> {
        if state >= self.num_states || joint >= self.space.size() {
            return Err(Error::InvalidInput(format!(
                "row ({state}, {joint}) out of range"
            )));
        }
        self.rows[state * self.space.size() + joint] = Some(outcomes);
        Ok(())
    }

    /// Sets the same outcome list for every joint action of `state`.
    pub fn uniform_row(
        &mut self,
        state: usize,
        outcomes: Vec<(usize, f64, Vec<f64>)>,
    ) -> Result<()> {
        for joint in 0..self.space.size() {
            self.row(state, joint, outcomes.clone())?;
        }
        Ok(())
    }

    pub fn build(self) -> Result<StochasticGame> {
        let n = self.space.num_players();
        let joints = self.space.size();
        if self.num_states == 0 {
            return Err(Error::InvalidInput(
                "a stochastic game needs at least one state".into(),
            ));
        }
        if self.start >= self.num_states {
            return Err(Error::InvalidInput(format!(
                "start state {} out of range",
                self.start
            )));
        }
        if !(0.0..=1.0).contains(&self.gamma) {
            return Err(Error::InvalidInput(format!(
                "gamma must lie in [0, 1], got {}",
                self.gamma
            )));
        }
        if self.idle_action >= joints {
            return Err(Error::InvalidInput("idle action out of range".into()));
        }
        let mut row_block = vec![None; self.num_states];
        let mut offsets = vec![0];
        let (mut next, mut prob, mut rewards) = (Vec::new(), Vec::new(), Vec::new());
        let mut block = 0;
        for state in 0..self.num_states {
            if self.terminal[state] {
                continue;
            }
            row_block[state] = Some(block);
            block += 1;
            for joint in 0..joints {
                let outcomes = self.rows[state * joints + joint].as_ref().ok_or_else(|| {
                    Error::InvalidInput(format!(
                        "state {state} is missing a transition row for joint action {joint}"
                    ))
                })?;
                let mut total = 0.0;
                for (y, p, r) in outcomes {
                    if *y >= self.num_states {
                        return Err(Error::InvalidInput(format!(
                            "state {state}: next state {y} out of range"
                        )));
                    }
                    if !(p.is_finite() && *p >= 0.0) {
                        return Err(Error::InvalidInput(format!(
                            "state {state}: invalid probability {p}"
                        )));
                    }
                    if r.len() != n || r.iter().any(|v| !v.is_finite()) {
                        return Err(Error::InvalidInput(format!(
                            "state {state}: reward vectors need {n} finite entries"
                        )));
                    }
                    total += p;
                    next.push(*y as u32);
                    prob.push(*p);
                    rewards.extend_from_slice(r);
                }
                if (total - 1.0).abs() > PROBABILITY_TOL {
                    return Err(Error::InvalidInput(format!(
                        "state {state}, joint action {joint}: probabilities sum to {total}"
                    )));
                }
                offsets.push(next.len());
            }
        }
        Ok(StochasticGame {
            space: self.space,
            terminal: self.terminal,
            start: self.start,
            gamma: self.gamma,
            idle_action: self.idle_action,
            row_block,
            offsets,
            next,
            prob,
            rewards,
        })
    }
}

/// JSON document mirroring the game tuple. Terminal states need no transitions.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StochasticGameJson {
    pub players: usize,
    pub actions: Vec<usize>,
    pub states: usize,
    #[serde(default)]
    pub start: usize,
    pub gamma: f64,
    #[serde(default)]
    pub terminal: Vec<usize>,
    pub transitions: Vec<TransitionJson>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransitionJson {
    pub state: usize,
    /// Per-player actions.
    pub joint: Vec<usize>,
    pub outcomes: Vec<OutcomeJson>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutcomeJson {
    pub next: usize,
    pub prob: f64,
    pub rewards: Vec<f64>,
}

impl StochasticGameJson {
    pub fn into_game(self) -> Result<StochasticGame> {
        if self.actions.len() != self.players {
            return Err(Error::InvalidInput(
                "\"actions\" length must equal \"players\"".into(),
            ));
        }
        let mut builder =
            StochasticGameBuilder::new(self.actions, self.states, self.gamma)?.start(self.start);
        for t in self.terminal {
            if t >= self.states {
                return Err(Error::InvalidInput(format!(
                    "terminal state {t} out of range"
                )));
            }
            builder = builder.terminal(t);
        }
        for t in self.transitions {
            if t.joint.len() != self.players
                || t.joint
                    .iter()
                    .zip(builder.space.counts())
                    .any(|(a, c)| a >= c)
            {
                return Err(Error::InvalidInput(format!(
                    "state {}: invalid joint action {:?}",
                    t.state, t.joint
                )));
            }
            let joint = builder.space.encode(&t.joint);
            builder.row(
                t.state,
                joint,
                t.outcomes
                    .into_iter()
                    .map(|o| (o.next, o.prob, o.rewards))
                    .collect(),
            )?;
        }
        builder.build()
    }
}

/// Per-state vectors of a fixed width (players, or 1 for a coalition value).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValueVector {
    width: usize,
    data: Vec<f64>,
}

impl ValueVector {
    pub fn zeros(num_states: usize, width: usize) -> Self {
        Self {
            width,
            data: vec![0.0; num_states * width],
        }
    }

    pub fn from_data(width: usize, data: Vec<f64>) -> Result<Self> {
        if width == 0 || data.len() % width != 0 {
            return Err(Error::InvalidInput(
                "value data length is not a multiple of the width".into(),
            ));
        }
        Ok(Self { width, data })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn num_states(&self) -> usize {
        self.data.len() / self.width
    }

    pub fn get(&self, state: usize) -> &[f64] {
        &self.data[state * self.width..(state + 1) * self.width]
    }

    pub fn get_mut(&mut self, state: usize) -> &mut [f64] {
        &mut self.data[state * self.width..(state + 1) * self.width]
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn sup_distance(&self, other: &ValueVector) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// Per-state sums across the width.
    pub fn totals(&self) -> Vec<f64> {
        self.data
            .chunks(self.width)
            .map(|c| c.iter().sum())
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub converged: bool,
    pub iterations: usize,
    pub final_delta: f64,
    pub history_window: Vec<f64>,
}

/// Ratio above which a full delta window counts as non-decaying.
pub const NON_DECAY_RATIO: f64 = 0.5;

impl ConvergenceReport {
    /// The window is full and its newer half has not shrunk below
    /// [`NON_DECAY_RATIO`] times the older half's peak.
    pub fn is_non_decaying(&self, window: usize) -> bool {
        if self.converged || self.history_window.len() < window || window < 2 {
            return false;
        }
        let (older, newer) = self.history_window.split_at(self.history_window.len() / 2);
        let peak = |xs: &[f64]| xs.iter().copied().fold(0.0, f64::max);
        peak(newer) >= NON_DECAY_RATIO * peak(older)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IterationOptions {
    pub tol: f64,
    pub cap: usize,
    pub window: usize,
}

impl Default for IterationOptions {
    fn default() -> Self {
        Self {
            tol: 1e-6,
            cap: 10_000,
            window: 16,
        }
    }
}

impl IterationOptions {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0) {
            return Err(Error::InvalidInput(format!(
                "tolerance must be positive, got {}",
                self.tol
            )));
        }
        if self.cap == 0 {
            return Err(Error::InvalidInput(
                "iteration cap must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

/// Synchronous value iteration.
///
/// `update(state, previous, out)` writes the new value of a nonterminal state;
/// terminal states stay pinned at zero. Sweeps stop once the sup-norm change
/// drops below `opts.tol` or after `opts.cap` sweeps.
pub fn value_iterate<F>(
    terminal: &[bool],
    init: ValueVector,
    opts: IterationOptions,
    update: F,
) -> Result<(ValueVector, ConvergenceReport)>
where
    F: Fn(usize, &ValueVector, &mut [f64]) -> Result<()> + Sync,
{
    opts.validate()?;
    if init.num_states() != terminal.len() {
        return Err(Error::InvalidInput(
            "initial values do not cover every state".into(),
        ));
    }
    let width = init.width();
    let mut current = init;
    for (s, _) in terminal.iter().enumerate().filter(|(_, &t)| t) {
        current.get_mut(s).iter_mut().for_each(|v| *v = 0.0);
    }
    let mut window = VecDeque::with_capacity(opts.window);
    let mut delta = f64::INFINITY;
    let mut iterations = 0;
    while iterations < opts.cap {
        let mut next = ValueVector::zeros(terminal.len(), width);
        next.data
            .par_chunks_mut(width)
            .enumerate()
            .try_for_each(|(state, out)| {
                if terminal[state] {
                    return Ok(());
                }
                update(state, &current, out).map_err(|e| Error::StateUpdate {
                    state,
                    source: Box::new(e),
                })
            })?;
        delta = next.sup_distance(&current);
        current = next;
        iterations += 1;
        if window.len() == opts.window {
            window.pop_front();
        }
        if opts.window > 0 {
            window.push_back(delta);
        }
        if !delta.is_finite() {
            break;
        }
        if delta < opts.tol {
            break;
        }
    }
    let report = ConvergenceReport {
        converged: delta < opts.tol,
        iterations,
        final_delta: delta,
        history_window: window.into_iter().collect(),
    };
    Ok((current, report))
}

/// The normal-form game at `state` with continuation values `values`.
pub fn stage_game(sg: &StochasticGame, state: usize, values: &ValueVector) -> NormalFormGame {
    let n = sg.num_players();
    let joints = sg.num_joint();
    let mut utilities = vec![0.0; joints * n];
    if !sg.is_terminal(state) {
        for (joint, out) in utilities.chunks_mut(n).enumerate() {
            sg.expected_utilities(state, joint, values, out);
        }
    }
    NormalFormGame::new(sg.space.counts().to_vec(), utilities)
        .expect("stage game dimensions follow the stochastic game")
}

#[cfg(test)]
pub(crate) mod fixtures {
    use super::*;

    /// One player, state 0 moves to terminal state 1 collecting 99.
    pub fn chain_99() -> StochasticGame {
        let mut b = StochasticGameBuilder::new(vec![1], 2, 1.0)
            .unwrap()
            .terminal(1);
        b.uniform_row(0, vec![(1, 1.0, vec![99.0])]).unwrap();
        b.build().unwrap()
    }

    /// A single decision state whose every joint action ends the game with the
    /// normal-form payoffs of `g`.
    pub fn one_shot(g: &NormalFormGame, gamma: f64) -> StochasticGame {
        let mut b = StochasticGameBuilder::new(g.action_counts().to_vec(), 2, gamma)
            .unwrap()
            .terminal(1);
        for joint in 0..g.num_joint() {
            b.row(0, joint, vec![(1, 1.0, g.payoffs(joint).to_vec())])
                .unwrap();
        }
        b.build().unwrap()
    }
}

#[cfg(test)]
mod tests {
    use super::fixtures::*;
    use super::*;

    #[test]
    fn terminal_stage_game_is_zero() {
        let sg = chain_99();
        let g = stage_game(&sg, 1, &ValueVector::from_data(1, vec![5.0, 7.0]).unwrap());
        assert_eq!(g.payoffs(0), &[0.0]);
    }

    #[test]
    fn gamma_zero_stage_is_immediate_reward() {
        let mut b = StochasticGameBuilder::new(vec![2], 2, 0.0).unwrap();
        b.row(0, 0, vec![(0, 0.5, vec![2.0]), (1, 0.5, vec![4.0])])
            .unwrap();
        b.row(0, 1, vec![(1, 1.0, vec![1.0])]).unwrap();
        b.uniform_row(1, vec![(1, 1.0, vec![0.0])]).unwrap();
        let sg = b.build().unwrap();
        let g = stage_game(
            &sg,
            0,
            &ValueVector::from_data(1, vec![100.0, 100.0]).unwrap(),
        );
        assert_eq!(g.payoffs(0), &[3.0]);
        assert_eq!(g.payoffs(1), &[1.0]);
    }

    #[test]
    fn self_loop_stage_is_constant() {
        let mut b = StochasticGameBuilder::new(vec![2, 2], 1, 0.9).unwrap();
        b.uniform_row(0, vec![(0, 1.0, vec![1.5, -0.5])]).unwrap();
        let sg = b.build().unwrap();
        let g = stage_game(&sg, 0, &ValueVector::zeros(1, 2));
        for joint in 0..4 {
            assert_eq!(g.payoffs(joint), &[1.5, -0.5]);
        }
    }

    #[test]
    fn chain_value_and_fixed_point() {
        let sg = chain_99();
        let update = |s: usize, v: &ValueVector, out: &mut [f64]| {
            sg.expected_utilities(s, 0, v, out);
            Ok(())
        };
        let (v, report) = value_iterate(
            sg.terminal_flags(),
            ValueVector::zeros(2, 1),
            IterationOptions::default(),
            update,
        )
        .unwrap();
        assert_eq!(v.get(0), &[99.0]);
        assert!(report.converged);
        let (_, again) =
            value_iterate(sg.terminal_flags(), v, IterationOptions::default(), update).unwrap();
        assert_eq!(again.iterations, 1);
        assert_eq!(again.final_delta, 0.0);
    }

    #[test]
    fn oscillation_hits_cap() {
        let terminal = [false];
        let opts = IterationOptions {
            tol: 1e-6,
            cap: 50,
            window: 16,
        };
        let (_, report) = value_iterate(&terminal, ValueVector::zeros(1, 1), opts, |_, v, out| {
            out[0] = 1.0 - v.get(0)[0];
            Ok(())
        })
        .unwrap();
        assert!(!report.converged);
        assert_eq!(report.iterations, 50);
        assert_eq!(report.history_window, vec![1.0; 16]);
        assert!(report.is_non_decaying(16));
    }

    #[test]
    fn update_failures_name_the_state() {
        let terminal = [false, false];
        let err = value_iterate(
            &terminal,
            ValueVector::zeros(2, 1),
            IterationOptions::default(),
            |s, _, _| {
                if s == 1 {
                    Err(Error::Solver("boom".into()))
                } else {
                    Ok(())
                }
            },
        )
        .unwrap_err();
        assert!(matches!(err, Error::StateUpdate { state: 1, .. }));
    }

    #[test]
    fn rejects_bad_probabilities() {
        let mut b = StochasticGameBuilder::new(vec![1], 2, 1.0).unwrap();
        b.uniform_row(0, vec![(1, 0.6, vec![0.0])]).unwrap();
        b.uniform_row(1, vec![(1, 1.0, vec![0.0])]).unwrap();
        assert!(b.build().is_err());
        let missing = StochasticGameBuilder::new(vec![1], 1, 1.0).unwrap();
        assert!(missing.build().is_err());
    }

    #[test]
    fn json_round_trip() {
        let sg = chain_99();
        let text = serde_json::to_string(&sg.to_json()).unwrap();
        let back = StochasticGame::from_json_str(&text).unwrap();
        assert_eq!(back.num_states(), 2);
        assert!(back.is_terminal(1));
        let o: Vec<_> = back.outcomes(0, 0).collect();
        assert_eq!((o[0].next, o[0].prob, o[0].rewards), (1, 1.0, &[99.0][..]));
    }
}
