//! Harsanyi-Shapley strategic values and cooperation-inducing side payments
//! for n-player transferable-utility games.
//!
//! The crate covers three layers:
//!
//! * normal-form games: [`hs_normal::hs_value`], the Shapley-form oracle and
//!   normal-form side payments, on top of the dense LP core in [`lp`];
//! * stochastic games: coalition value iteration ([`hs_stochastic::hs_values`]),
//!   the Bellman-operator variant ([`hs_stochastic::hs_star_values`]) and a
//!   Correlated-Q baseline;
//! * grid games: a declarative [`gridworld::GridSpec`] compiled into an explicit
//!   stochastic game, with seeded rollouts that tabulate per-step side payments.
//!
//! See the `examples/` directory of this crate for one runnable program per
//! capability.

pub mod cli;
pub mod error;
pub mod gridworld;
pub mod hs_normal;
pub mod hs_stochastic;
pub mod lp;
pub mod normal_form;
pub mod rollout;
pub mod stochastic;

pub use error::{Error, Result};
pub use gridworld::{
    canonical_game, compile_grid, parse_grid_spec, CompiledGrid, GridSpec, GridState,
};
pub use hs_normal::{hs_value, shapley_oracle, side_payment_normal, HsResult};
pub use hs_stochastic::{ceq_values, hs_star_values, hs_values, HsStochasticResult, Method};
pub use lp::{solve_utilitarian_ce, solve_zero_sum, Matrix, MixedStrategy};
pub use normal_form::{Coalition, NormalFormGame};
pub use rollout::{cooperative_policy, side_payments_at, simulate, CooperativePolicy, Trajectory};
pub use stochastic::{ConvergenceReport, IterationOptions, StochasticGame, ValueVector};
