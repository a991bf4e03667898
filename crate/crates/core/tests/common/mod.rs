//! Seeded generators shared by the integration tests and the acceptance runner.
#![allow(dead_code)]

use hs_games::gridworld::{GoalSpec, PlayerSpec};
use hs_games::stochastic::StochasticGameBuilder;
use hs_games::{GridSpec, NormalFormGame, StochasticGame};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Payoffs drawn uniformly from `[-range, range]`.
pub fn random_game(rng: &mut impl Rng, counts: &[usize], range: f64) -> NormalFormGame {
    let n = counts.len();
    NormalFormGame::from_fn(counts.to_vec(), |_| {
        (0..n).map(|_| rng.gen_range(-range..=range)).collect()
    })
    .unwrap()
}

/// Payoffs drawn from a small integer set, so ties and duplicate rows are common.
pub fn random_integer_game(rng: &mut impl Rng, counts: &[usize]) -> NormalFormGame {
    let n = counts.len();
    NormalFormGame::from_fn(counts.to_vec(), |_| {
        (0..n).map(|_| rng.gen_range(-3..=3) as f64).collect()
    })
    .unwrap()
}

/// Two players, 2 to 4 states (the last one terminal), 1 to 3 actions each.
pub fn random_two_player_stochastic(rng: &mut impl Rng, gamma: f64) -> StochasticGame {
    let states = rng.gen_range(2..=4);
    let counts = vec![rng.gen_range(1..=3), rng.gen_range(1..=3)];
    let joints = counts[0] * counts[1];
    let mut b = StochasticGameBuilder::new(counts, states, gamma)
        .unwrap()
        .terminal(states - 1);
    for s in 0..states - 1 {
        for joint in 0..joints {
            let k = rng.gen_range(1..=2);
            let weights: Vec<f64> = (0..k).map(|_| rng.gen_range(0.1..1.0)).collect();
            let total: f64 = weights.iter().sum();
            let outcomes = weights
                .iter()
                .map(|w| {
                    let next = rng.gen_range(0..states);
                    let rewards = vec![rng.gen_range(-10.0..=10.0), rng.gen_range(-10.0..=10.0)];
                    (next, w / total, rewards)
                })
                .collect();
            b.row(s, joint, outcomes).unwrap();
        }
    }
    b.build().unwrap()
}

fn neighbours(width: usize, height: usize, c: (usize, usize)) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    if c.0 + 1 < width {
        out.push((c.0 + 1, c.1));
    }
    if c.1 + 1 < height {
        out.push((c.0, c.1 + 1));
    }
    out
}

/// Small undiscounted grid: two players on up to 4x3 or three players on 3x3,
/// one private goal each, an optional shared goal, and a few walls and
/// semi-walls.
pub fn random_grid_spec(rng: &mut impl Rng) -> GridSpec {
    let n = rng.gen_range(2..=3);
    let (width, height) = if n == 2 {
        (rng.gen_range(3..=4), 3)
    } else {
        (3, 3)
    };
    let mut cells: Vec<(usize, usize)> = (0..height)
        .flat_map(|y| (0..width).map(move |x| (x, y)))
        .collect();
    cells.shuffle(rng);
    let ids = ["A", "B", "C"];
    let players: Vec<PlayerSpec> = (0..n)
        .map(|i| PlayerSpec {
            id: ids[i].to_string(),
            start: cells[i],
        })
        .collect();
    let mut goals: Vec<GoalSpec> = (0..n)
        .map(|i| GoalSpec {
            cell: cells[n + i],
            reward: 100.0,
            owners: vec![ids[i].to_string()],
        })
        .collect();
    if rng.gen_bool(0.5) {
        goals.push(GoalSpec {
            cell: cells[2 * n],
            reward: 50.0,
            owners: ids[..n].iter().map(|s| s.to_string()).collect(),
        });
    }
    let mut edges: Vec<[(usize, usize); 2]> = (0..height)
        .flat_map(|y| (0..width).map(move |x| (x, y)))
        .flat_map(|c| {
            neighbours(width, height, c)
                .into_iter()
                .map(move |d| [c, d])
        })
        .collect();
    edges.shuffle(rng);
    let walls = edges[..rng.gen_range(0..=2)].to_vec();
    let semi = edges[2..2 + rng.gen_range(0..=2)].to_vec();
    let spec = GridSpec {
        name: None,
        description: None,
        width,
        height,
        mask: Vec::new(),
        blocked: Vec::new(),
        walls,
        semi_walls: semi,
        players,
        goals,
        step_cost: -1.0,
        stick_cost: -0.1,
        gamma: 1.0,
    };
    spec.validate().unwrap();
    spec
}

/// Largest gain any player can get by disobeying a recommendation of `dist`.
pub fn max_ce_violation(g: &NormalFormGame, dist: &[f64]) -> f64 {
    let space = g.action_space();
    let mut worst: f64 = 0.0;
    for i in 0..g.num_players() {
        let k = g.action_counts()[i];
        for from in 0..k {
            for to in 0..k {
                let mut gain = 0.0;
                for (a, &p) in dist.iter().enumerate() {
                    let mut profile = space.decode(a);
                    if profile[i] != from || p == 0.0 {
                        continue;
                    }
                    let own = g.utility(a, i);
                    profile[i] = to;
                    gain += p * (g.utility(space.encode(&profile), i) - own);
                }
                worst = worst.max(gain);
            }
        }
    }
    worst
}
