//! HS, HS* and Correlated-Q on a two-state, two-player stochastic game built
//! with the incremental builder.

use hs_games::stochastic::StochasticGameBuilder;
use hs_games::{ceq_values, hs_star_values, hs_values, IterationOptions};

fn main() -> hs_games::Result<()> {
    // State 0 repeats a prisoner's dilemma; mutual cooperation ends the game.
    let mut b = StochasticGameBuilder::new(vec![2, 2], 2, 0.9)?.terminal(1);
    b.row(0, 0, vec![(1, 1.0, vec![3.0, 3.0])])?;
    b.row(0, 1, vec![(0, 1.0, vec![0.0, 5.0])])?;
    b.row(0, 2, vec![(0, 1.0, vec![5.0, 0.0])])?;
    b.row(
        0,
        3,
        vec![(0, 0.5, vec![1.0, 1.0]), (1, 0.5, vec![1.0, 1.0])],
    )?;
    let game = b.build()?;

    let opts = IterationOptions::default();
    for result in [
        hs_values(&game, opts)?,
        hs_star_values(&game, opts)?,
        ceq_values(&game, opts)?,
    ] {
        let report = result.summary();
        println!(
            "{:<5} start {:?} (converged={}, {} iterations)",
            result.method.to_string(),
            result.values.get(game.start()),
            report.converged,
            report.iterations
        );
    }
    Ok(())
}
