//! Harsanyi-Shapley values of normal-form TU games.
//!
//! [`hs_value`] decomposes the game into the cooperative (grand-coalition)
//! game and one zero-sum game per coalition, then averages the coalition
//! security values with binomial weights. [`shapley_oracle`] takes the long
//! way round (equilibrium distributions, characteristic function, Shapley
//! sum) and exists to cross-check it.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::lp::solve_zero_sum;
use crate::normal_form::{
    build_coalition_game, coalition_maxmin, maxmax_value, Coalition, CoalitionSplit, NormalFormGame,
};

#[derive(Debug, Clone, Serialize)]
pub struct HsResult {
    pub values: Vec<f64>,
    /// Every nonempty coalition's maxmin; the grand coalition maps to the maxmax.
    #[serde(serialize_with = "serialize_coalition_map")]
    pub coalition_values: BTreeMap<Coalition, f64>,
    /// Lexicographically first joint action attaining the maxmax.
    pub cooperative_action: usize,
}

fn serialize_coalition_map<S: serde::Serializer>(
    map: &BTreeMap<Coalition, f64>,
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    #[derive(Serialize)]
    struct Entry {
        coalition: Coalition,
        value: f64,
    }
    let entries: Vec<Entry> = map
        .iter()
        .map(|(&coalition, &value)| Entry { coalition, value })
        .collect();
    entries.serialize(s)
}

pub(crate) fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Assembles per-player values from coalition values:
/// `v_i = (1/n) * sum_{I ∋ i} C(n-1, |I|-1)^{-1} value(I)`, grand coalition included.
pub fn combine_coalition_values(n: usize, value_of: impl Fn(Coalition) -> f64) -> Vec<f64> {
    let mut out = vec![0.0; n];
    for coalition in Coalition::all_nonempty(n) {
        let weighted = value_of(coalition) / binomial(n - 1, coalition.size() - 1);
        for i in coalition.members(n) {
            out[i] += weighted;
        }
    }
    out.iter_mut().for_each(|v| *v /= n as f64);
    out
}

/// Solves one coalition from each complementary pair and fills in the rest by
/// antisymmetry.
pub(crate) fn coalition_table(g: &NormalFormGame) -> Result<BTreeMap<Coalition, f64>> {
    let n = g.num_players();
    let reps: Vec<Coalition> = Coalition::complement_representatives(n).collect();
    let solved: Vec<(Coalition, f64)> = reps
        .par_iter()
        .map(|&c| coalition_maxmin(g, c).map(|v| (c, v)))
        .collect::<Result<_>>()?;
    let mut table = BTreeMap::new();
    for (c, v) in solved {
        table.insert(c, v);
        table.insert(c.complement(n), -v);
    }
    table.insert(Coalition::grand(n), maxmax_value(g).0);
    Ok(table)
}

pub fn hs_value(g: &NormalFormGame) -> Result<HsResult> {
    let n = g.num_players();
    let (maxmax, cooperative_action) = maxmax_value(g);
    let coalition_values = if n == 1 {
        BTreeMap::from([(Coalition::grand(1), maxmax)])
    } else {
        coalition_table(g)?
    };
    let values = combine_coalition_values(n, |c| coalition_values[&c]);
    Ok(HsResult {
        values,
        coalition_values,
        cooperative_action,
    })
}

/// Transfers that turn the cooperative payoffs into HS values: `HS_i - R_i(a*)`.
pub fn side_payment_normal(g: &NormalFormGame) -> Result<Vec<f64>> {
    let hs = hs_value(g)?;
    Ok(hs
        .values
        .iter()
        .zip(g.payoffs(hs.cooperative_action))
        .map(|(v, r)| v - r)
        .collect())
}

fn factorial(k: usize) -> f64 {
    (1..=k).map(|x| x as f64).product()
}

/// Shapley value of the characteristic function built from each coalition
/// game's equilibrium distribution. Every proper coalition is solved
/// separately; no antisymmetry shortcut is taken.
pub fn shapley_oracle(g: &NormalFormGame) -> Result<Vec<f64>> {
    let n = g.num_players();
    let mut worth = BTreeMap::new();
    worth.insert(Coalition::EMPTY, 0.0);
    worth.insert(Coalition::grand(n), maxmax_value(g).0);
    for coalition in Coalition::all_nonempty(n).filter(|c| c.is_proper(n)) {
        let game = build_coalition_game(g, coalition)?;
        let eq = solve_zero_sum(&game.payoff)?;
        let split = CoalitionSplit::new(g.action_space(), coalition)?;
        let cols = split.cols();
        let mut v = 0.0;
        for joint in 0..g.num_joint() {
            let cell = split.cell_of_joint(joint);
            let p = eq.row.0[cell / cols] * eq.col.0[cell % cols];
            if p != 0.0 {
                let members: f64 = coalition.members(n).map(|j| g.utility(joint, j)).sum();
                v += p * members;
            }
        }
        worth.insert(coalition, v);
    }
    let nf = factorial(n);
    let mut out = vec![0.0; n];
    for (i, slot) in out.iter_mut().enumerate() {
        for coalition in Coalition::all_nonempty(n).filter(|c| c.contains(i)) {
            let s = coalition.size();
            let weight = factorial(s - 1) * factorial(n - s) / nf;
            let complement = coalition.complement(n);
            *slot += weight * (worth[&coalition] - worth[&complement]);
        }
    }
    Ok(out)
}

/// Max-norm distance between [`hs_value`] and [`shapley_oracle`].
pub fn shapley_deviation(g: &NormalFormGame) -> Result<f64> {
    let hs = hs_value(g)?.values;
    let oracle = shapley_oracle(g)?;
    if hs.len() != oracle.len() {
        return Err(Error::Solver("oracle length mismatch".into()));
    }
    Ok(hs
        .iter()
        .zip(&oracle)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max))
}
