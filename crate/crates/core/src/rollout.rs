//! Cooperative play under solved values, with the side payments that make
//! each player's realized payoff track its strategic value.

use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hs_stochastic::{HsStochasticResult, Method};
use crate::lp::solve_utilitarian_ce;
use crate::stochastic::{stage_game, StochasticGame, ValueVector};

/// Welfare values closer than this to the maximum count as ties.
pub const TIE_TOL: f64 = 1e-9;
pub const DEFAULT_MAX_STEPS: usize = 1000;

/// One joint action per state.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CooperativePolicy {
    pub actions: Vec<usize>,
}

impl CooperativePolicy {
    pub fn action(&self, state: usize) -> usize {
        self.actions[state]
    }
}

fn first_near_max(scores: &[f64]) -> usize {
    let best = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    scores
        .iter()
        .position(|&s| s >= best - TIE_TOL)
        .unwrap_or(0)
}

/// `sum_y P(x,a,y) [sum_i R_i + gamma W(y)]` for every joint action `a`.
fn welfare_backups(
    sg: &StochasticGame,
    state: usize,
    continuation: impl Fn(usize) -> f64,
) -> Vec<f64> {
    let gamma = sg.gamma();
    (0..sg.num_joint())
        .map(|joint| {
            sg.outcomes(state, joint)
                .map(|o| o.prob * (o.rewards.iter().sum::<f64>() + gamma * continuation(o.next)))
                .sum()
        })
        .collect()
}

/// The arbitrated joint action at every state.
///
/// * HS: maximizes the cooperative backup under the grand-coalition values.
/// * HS*: maximizes the summed stage-game utilities under the HS* values.
/// * CE-Q: the most likely joint action of the utilitarian correlated
///   equilibrium of each stage game.
///
/// Ties go to the lowest joint-action index; terminal states get the idle action.
pub fn cooperative_policy(
    sg: &StochasticGame,
    result: &HsStochasticResult,
) -> Result<CooperativePolicy> {
    if result.values.num_states() != sg.num_states() || result.values.width() != sg.num_players() {
        return Err(Error::InvalidInput("values do not match the game".into()));
    }
    let actions = (0..sg.num_states())
        .into_par_iter()
        .map(|state| {
            if sg.is_terminal(state) {
                return Ok(sg.idle_action());
            }
            match result.method {
                Method::Hs => {
                    let grand = result.grand_values().ok_or_else(|| {
                        Error::InvalidInput("HS result lacks the cooperative values".into())
                    })?;
                    Ok(first_near_max(&welfare_backups(sg, state, |y| grand[y])))
                }
                Method::HsStar => Ok(first_near_max(&welfare_backups(sg, state, |y| {
                    result.values.get(y).iter().sum()
                }))),
                Method::Ceq => {
                    let ce = solve_utilitarian_ce(&stage_game(sg, state, &result.values))?;
                    Ok(first_near_max(&ce.dist))
                }
            }
        })
        .collect::<Result<_>>()?;
    Ok(CooperativePolicy { actions })
}

/// `sp_i = V_i(x) - sum_y P(x,a,y) [R_i + gamma V_i(y)]`: what player `i` is
/// owed at `x` beyond the expected reward-plus-continuation of playing `a`.
pub fn side_payments_at(
    sg: &StochasticGame,
    values: &ValueVector,
    state: usize,
    joint: usize,
) -> Vec<f64> {
    let n = sg.num_players();
    if sg.is_terminal(state) {
        return vec![0.0; n];
    }
    let mut expected = vec![0.0; n];
    sg.expected_utilities(state, joint, values, &mut expected);
    values
        .get(state)
        .iter()
        .zip(&expected)
        .map(|(v, e)| v - e)
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Step {
    pub state: usize,
    pub joint: usize,
    pub actions: Vec<usize>,
    pub next: usize,
    pub rewards: Vec<f64>,
    pub side_payments: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub steps: Vec<Step>,
    /// Per-player realized rewards plus side payments.
    pub value: Vec<f64>,
    /// Per-player side payments received (negative when paying).
    pub side_payments: Vec<f64>,
    pub seed: u64,
    pub stream: u64,
    pub truncated: bool,
}

impl Trajectory {
    /// States in visiting order, including the final one.
    pub fn states(&self) -> Vec<usize> {
        let mut out: Vec<usize> = self.steps.iter().map(|s| s.state).collect();
        if let Some(last) = self.steps.last() {
            out.push(last.next);
        }
        out
    }

    pub fn rewards_total(&self) -> Vec<f64> {
        let n = self.value.len();
        (0..n)
            .map(|i| self.steps.iter().map(|s| s.rewards[i]).sum())
            .collect()
    }

    /// Per-step side payments followed by the V and SP rows, one decimal.
    pub fn to_table(&self, label: &str) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{:<6} {label}", "State");
        for (t, step) in self.steps.iter().enumerate() {
            let _ = writeln!(out, "{:<6} {}", t + 1, fmt_tuple(&step.side_payments));
        }
        let _ = writeln!(out, "{:<6} {}", "V", fmt_tuple(&self.value));
        let _ = writeln!(out, "{:<6} {}", "SP", fmt_tuple(&self.side_payments));
        if self.truncated {
            out.push_str("(truncated before reaching a terminal state)\n");
        }
        out
    }
}

/// One CSV row per step; `rollout` indexes the trajectory within the slice.
pub fn write_csv<W: std::io::Write>(trajectories: &[Trajectory], out: W) -> Result<()> {
    let n = trajectories.first().map_or(0, |t| t.value.len());
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec![
        "rollout".to_string(),
        "step".into(),
        "state".into(),
        "joint".into(),
        "next".into(),
    ];
    header.extend((1..=n).map(|i| format!("reward_{i}")));
    header.extend((1..=n).map(|i| format!("side_payment_{i}")));
    w.write_record(&header).map_err(csv_error)?;
    for (k, traj) in trajectories.iter().enumerate() {
        for (t, s) in traj.steps.iter().enumerate() {
            let mut row = vec![
                k.to_string(),
                (t + 1).to_string(),
                s.state.to_string(),
                s.joint.to_string(),
                s.next.to_string(),
            ];
            row.extend(s.rewards.iter().map(|v| v.to_string()));
            row.extend(s.side_payments.iter().map(|v| v.to_string()));
            w.write_record(&row).map_err(csv_error)?;
        }
    }
    w.flush()?;
    Ok(())
}

fn csv_error(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e))
}

/// `(a, b, c)` with one decimal and no negative zero. Values within float
/// noise of a midpoint (97.44999999999999) round away from zero like 97.45.
pub fn fmt_tuple(values: &[f64]) -> String {
    let parts: Vec<String> = values
        .iter()
        .map(|&v| {
            let scaled = v * 10.0;
            let r = (scaled + scaled.signum() * 1e-9 * scaled.abs().max(1.0)).round() / 10.0;
            format!("{:.1}", if r == 0.0 { 0.0 } else { r })
        })
        .collect();
    format!("({})", parts.join(", "))
}

fn sample_next(
    sg: &StochasticGame,
    state: usize,
    joint: usize,
    rng: &mut ChaCha8Rng,
) -> (usize, Vec<f64>) {
    let u: f64 = rng.gen();
    let mut acc = 0.0;
    let mut last = None;
    for o in sg.outcomes(state, joint) {
        acc += o.prob;
        if o.prob > 0.0 {
            last = Some((o.next, o.rewards.to_vec()));
            if u < acc {
                break;
            }
        }
    }
    last.expect("every transition row has an outcome")
}

/// Plays `policy` from the start state with a ChaCha8 generator seeded by
/// `seed` on stream `stream`.
pub fn simulate_stream(
    sg: &StochasticGame,
    policy: &CooperativePolicy,
    values: &ValueVector,
    seed: u64,
    stream: u64,
    max_steps: usize,
) -> Result<Trajectory> {
    if max_steps == 0 {
        return Err(Error::InvalidInput("max_steps must be at least 1".into()));
    }
    if policy.actions.len() != sg.num_states() {
        return Err(Error::InvalidInput("policy does not match the game".into()));
    }
    let n = sg.num_players();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    let mut state = sg.start();
    let mut steps = Vec::new();
    while !sg.is_terminal(state) && steps.len() < max_steps {
        let joint = policy.action(state);
        let side_payments = side_payments_at(sg, values, state, joint);
        let (next, rewards) = sample_next(sg, state, joint, &mut rng);
        steps.push(Step {
            state,
            joint,
            actions: sg.action_space().decode(joint),
            next,
            rewards,
            side_payments,
        });
        state = next;
    }
    let side: Vec<f64> = (0..n)
        .map(|i| steps.iter().map(|s| s.side_payments[i]).sum())
        .collect();
    let value = (0..n)
        .map(|i| steps.iter().map(|s| s.rewards[i]).sum::<f64>() + side[i])
        .collect();
    Ok(Trajectory {
        steps,
        value,
        side_payments: side,
        seed,
        stream,
        truncated: !sg.is_terminal(state),
    })
}

pub fn simulate(
    sg: &StochasticGame,
    policy: &CooperativePolicy,
    values: &ValueVector,
    seed: u64,
    max_steps: usize,
) -> Result<Trajectory> {
    simulate_stream(sg, policy, values, seed, 0, max_steps)
}

/// `count` independent rollouts; rollout `k` uses stream `k`.
pub fn simulate_many(
    sg: &StochasticGame,
    policy: &CooperativePolicy,
    values: &ValueVector,
    seed: u64,
    count: usize,
    max_steps: usize,
) -> Result<Vec<Trajectory>> {
    (0..count as u64)
        .into_par_iter()
        .map(|k| simulate_stream(sg, policy, values, seed, k, max_steps))
        .collect()
}

/// Per-player mean and standard error of trajectory values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RolloutSummary {
    pub count: usize,
    pub mean_value: Vec<f64>,
    pub std_error: Vec<f64>,
    pub mean_side_payments: Vec<f64>,
    pub truncated: usize,
}

pub fn summarize(trajectories: &[Trajectory]) -> Option<RolloutSummary> {
    let first = trajectories.first()?;
    let n = first.value.len();
    let count = trajectories.len();
    let k = count as f64;
    let mean = |f: &dyn Fn(&Trajectory) -> &[f64]| -> Vec<f64> {
        (0..n)
            .map(|i| trajectories.iter().map(|t| f(t)[i]).sum::<f64>() / k)
            .collect()
    };
    let mean_value = mean(&|t| &t.value);
    let mean_side_payments = mean(&|t| &t.side_payments);
    let std_error = (0..n)
        .map(|i| {
            if count < 2 {
                return 0.0;
            }
            let var = trajectories
                .iter()
                .map(|t| (t.value[i] - mean_value[i]).powi(2))
                .sum::<f64>()
                / (k - 1.0);
            (var / k).sqrt()
        })
        .collect();
    let truncated = trajectories.iter().filter(|t| t.truncated).count();
    Some(RolloutSummary {
        count,
        mean_value,
        std_error,
        mean_side_payments,
        truncated,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hs_normal::side_payment_normal;
    use crate::hs_stochastic::solve;
    use crate::normal_form::fixtures::banana_2p;
    use crate::stochastic::fixtures::*;
    use crate::stochastic::IterationOptions;

    #[test]
    fn chain_policy_and_zero_payments() {
        let sg = chain_99();
        let hs = solve(&sg, Method::Hs, IterationOptions::default()).unwrap();
        let policy = cooperative_policy(&sg, &hs).unwrap();
        let t = simulate(&sg, &policy, &hs.values, 7, 10).unwrap();
        assert_eq!(t.steps.len(), 1);
        assert_eq!(t.side_payments, vec![0.0]);
        assert_eq!(t.value, vec![99.0]);
        assert_eq!(side_payments_at(&sg, &hs.values, 1, 0), vec![0.0]);
    }

    #[test]
    fn banana_one_shot_payments() {
        let g = banana_2p();
        let sg = one_shot(&g, 0.0);
        for method in [Method::Hs, Method::HsStar] {
            let r = solve(&sg, method, IterationOptions::default()).unwrap();
            let policy = cooperative_policy(&sg, &r).unwrap();
            let sp = side_payments_at(&sg, &r.values, 0, policy.action(0));
            let expected = side_payment_normal(&g).unwrap();
            for (a, b) in sp.iter().zip(&expected) {
                assert!((a - b).abs() < 1e-9, "{sp:?}");
            }
            let t = simulate(&sg, &policy, &r.values, 1, 5).unwrap();
            assert!((t.value[0] - 3.0).abs() < 1e-9 && (t.value[1] - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn table_formatting() {
        assert_eq!(fmt_tuple(&[97.449, -0.04, 1.35]), "(97.4, 0.0, 1.4)");
        assert_eq!(
            fmt_tuple(&[97.44999999999999, -1.3499999999999943]),
            "(97.5, -1.4)"
        );
    }
}
