//! Strategic values of stochastic games.
//!
//! * [`hs_values`]: one zero-sum stochastic game per coalition (plus the
//!   cooperative game), each solved by value iteration, then combined with
//!   the same binomial weights as the normal-form value.
//! * [`hs_star_values`]: value iteration on the operator that applies the
//!   normal-form HS value to every state's stage game.
//! * [`ceq_values`]: Correlated-Q style value iteration selecting the
//!   utilitarian correlated equilibrium at every stage game.

use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hs_normal::{combine_coalition_values, hs_value};
use crate::lp::{solve_utilitarian_ce, solve_zero_sum};
use crate::normal_form::{Coalition, CoalitionSplit};
use crate::stochastic::{
    stage_game, value_iterate, ConvergenceReport, IterationOptions, StochasticGame, ValueVector,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Hs,
    HsStar,
    Ceq,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Hs => "HS",
            Method::HsStar => "HS*",
            Method::Ceq => "CE-Q",
        })
    }
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "hs" => Ok(Method::Hs),
            "hs-star" | "hs*" | "hsstar" => Ok(Method::HsStar),
            "ceq" | "ce-q" => Ok(Method::Ceq),
            other => Err(Error::InvalidInput(format!(
                "unknown method '{other}' (expected hs, hs-star or ceq)"
            ))),
        }
    }
}

/// Fixed point of one coalition's Bellman operator.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CoalitionValue {
    pub coalition: Coalition,
    pub values: Vec<f64>,
    pub report: ConvergenceReport,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LabeledReport {
    pub label: String,
    pub report: ConvergenceReport,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HsStochasticResult {
    pub method: Method,
    pub values: ValueVector,
    /// Solved coalitions (one per complementary pair, plus the grand coalition).
    pub coalition_values: Vec<CoalitionValue>,
    pub reports: Vec<LabeledReport>,
}

impl HsStochasticResult {
    pub fn converged(&self) -> bool {
        self.reports.iter().all(|r| r.report.converged)
    }

    /// Value of `coalition` at `state`, negating a solved complement if needed.
    pub fn coalition_value(&self, coalition: Coalition, state: usize) -> Option<f64> {
        let n = self.values.width();
        self.coalition_values.iter().find_map(|cv| {
            if cv.coalition == coalition {
                Some(cv.values[state])
            } else if cv.coalition.complement(n) == coalition && coalition.is_proper(n) {
                Some(-cv.values[state])
            } else {
                None
            }
        })
    }

    /// The cooperative value function `V_N*`, when it was solved.
    pub fn grand_values(&self) -> Option<&[f64]> {
        let grand = Coalition::grand(self.values.width());
        self.coalition_values
            .iter()
            .find(|cv| cv.coalition == grand)
            .map(|cv| cv.values.as_slice())
    }

    /// Worst convergence report across solves (unconverged first, then largest delta).
    pub fn summary(&self) -> ConvergenceReport {
        self.reports
            .iter()
            .map(|r| &r.report)
            .max_by(|a, b| {
                (!a.converged, a.final_delta)
                    .partial_cmp(&(!b.converged, b.final_delta))
                    .unwrap_or(std::cmp::Ordering::Equal)
            })
            .cloned()
            .unwrap_or(ConvergenceReport {
                converged: true,
                iterations: 0,
                final_delta: 0.0,
                history_window: Vec::new(),
            })
    }
}

/// Per-joint-action `sum_y P(x,a,y) [sign·R(x,a,y) + gamma V(y)]` for a scalar value.
fn signed_backup(
    sg: &StochasticGame,
    state: usize,
    signs: &[f64],
    values: &ValueVector,
    out: &mut [f64],
) {
    let gamma = sg.gamma();
    for (joint, slot) in out.iter_mut().enumerate() {
        *slot = sg
            .outcomes(state, joint)
            .map(|o| {
                let r: f64 = o.rewards.iter().zip(signs).map(|(r, s)| r * s).sum();
                o.prob * (r + gamma * values.get(o.next)[0])
            })
            .sum();
    }
}

/// Solves the two-player zero-sum stochastic game of `coalition` against its
/// complement (or the cooperative game when `coalition` is everyone).
pub fn coalition_value_iteration(
    sg: &StochasticGame,
    coalition: Coalition,
    opts: IterationOptions,
) -> Result<(Vec<f64>, ConvergenceReport)> {
    let n = sg.num_players();
    if coalition.is_empty() || coalition.bits() & !Coalition::grand(n).bits() != 0 {
        return Err(Error::InvalidCoalition(coalition));
    }
    let joints = sg.num_joint();
    let init = ValueVector::zeros(sg.num_states(), 1);
    let (values, report) = if coalition == Coalition::grand(n) {
        let signs = vec![1.0; n];
        value_iterate(sg.terminal_flags(), init, opts, |state, v, out| {
            let mut backup = vec![0.0; joints];
            signed_backup(sg, state, &signs, v, &mut backup);
            out[0] = backup.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            Ok(())
        })?
    } else {
        let split = CoalitionSplit::new(sg.action_space(), coalition)?;
        let signs = split.signs(n);
        value_iterate(sg.terminal_flags(), init, opts, |state, v, out| {
            let mut backup = vec![0.0; joints];
            signed_backup(sg, state, &signs, v, &mut backup);
            out[0] = solve_zero_sum(&split.to_matrix(&backup)?)?.value;
            Ok(())
        })?
    };
    Ok((values.data().to_vec(), report))
}

pub fn hs_values(sg: &StochasticGame, opts: IterationOptions) -> Result<HsStochasticResult> {
    opts.validate()?;
    let n = sg.num_players();
    let grand = Coalition::grand(n);
    let mut coalitions: Vec<Coalition> = Coalition::complement_representatives(n).collect();
    coalitions.push(grand);
    let solved: Vec<CoalitionValue> = coalitions
        .par_iter()
        .map(|&coalition| {
            coalition_value_iteration(sg, coalition, opts)
                .map(|(values, report)| CoalitionValue {
                    coalition,
                    values,
                    report,
                })
                .map_err(|e| Error::CoalitionSolve {
                    coalition,
                    source: Box::new(e),
                })
        })
        .collect::<Result<_>>()?;

    let mut values = ValueVector::zeros(sg.num_states(), n);
    for state in 0..sg.num_states() {
        let lookup = |c: Coalition| {
            solved
                .iter()
                .find_map(|cv| {
                    if cv.coalition == c {
                        Some(cv.values[state])
                    } else if cv.coalition.complement(n) == c {
                        Some(-cv.values[state])
                    } else {
                        None
                    }
                })
                .expect("every coalition or its complement is solved")
        };
        values
            .get_mut(state)
            .copy_from_slice(&combine_coalition_values(n, lookup));
    }
    let reports = solved
        .iter()
        .map(|cv| LabeledReport {
            label: format!("coalition {}", cv.coalition),
            report: cv.report.clone(),
        })
        .collect();
    Ok(HsStochasticResult {
        method: Method::Hs,
        values,
        coalition_values: solved,
        reports,
    })
}

pub fn hs_star_values(sg: &StochasticGame, opts: IterationOptions) -> Result<HsStochasticResult> {
    let n = sg.num_players();
    let (values, report) = value_iterate(
        sg.terminal_flags(),
        ValueVector::zeros(sg.num_states(), n),
        opts,
        |state, v, out| {
            out.copy_from_slice(&hs_value(&stage_game(sg, state, v))?.values);
            Ok(())
        },
    )?;
    Ok(HsStochasticResult {
        method: Method::HsStar,
        values,
        coalition_values: Vec::new(),
        reports: vec![LabeledReport {
            label: "HS* operator".into(),
            report,
        }],
    })
}

pub fn ceq_values(sg: &StochasticGame, opts: IterationOptions) -> Result<HsStochasticResult> {
    let n = sg.num_players();
    let (values, report) = value_iterate(
        sg.terminal_flags(),
        ValueVector::zeros(sg.num_states(), n),
        opts,
        |state, v, out| {
            out.copy_from_slice(&solve_utilitarian_ce(&stage_game(sg, state, v))?.values);
            Ok(())
        },
    )?;
    Ok(HsStochasticResult {
        method: Method::Ceq,
        values,
        coalition_values: Vec::new(),
        reports: vec![LabeledReport {
            label: "CE-Q operator".into(),
            report,
        }],
    })
}

pub fn solve(
    sg: &StochasticGame,
    method: Method,
    opts: IterationOptions,
) -> Result<HsStochasticResult> {
    match method {
        Method::Hs => hs_values(sg, opts),
        Method::HsStar => hs_star_values(sg, opts),
        Method::Ceq => ceq_values(sg, opts),
    }
}
