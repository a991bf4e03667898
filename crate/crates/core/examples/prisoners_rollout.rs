//! Solves Prisoners, plays the cooperative policy once and prints the path
//! with per-step side payments.

use hs_games::gridworld::{render_path, Action};
use hs_games::rollout::DEFAULT_MAX_STEPS;
use hs_games::{
    canonical_game, compile_grid, cooperative_policy, hs_values, simulate, IterationOptions,
};

fn main() -> hs_games::Result<()> {
    let compiled = compile_grid(&canonical_game("prisoners")?)?;
    let game = &compiled.game;
    let result = hs_values(game, IterationOptions::default())?;
    let policy = cooperative_policy(game, &result)?;
    let path = simulate(game, &policy, &result.values, 0, DEFAULT_MAX_STEPS)?;

    let boards: Vec<_> = path
        .states()
        .into_iter()
        .enumerate()
        .map(|(t, s)| {
            let actions = path.steps.get(t).map(|step| {
                step.actions
                    .iter()
                    .map(|&a| Action::from_index(a))
                    .collect()
            });
            (compiled.states[s].clone(), actions)
        })
        .collect();
    print!("{}", render_path(&compiled.spec, &boards));
    print!("{}", path.to_table("HS"));
    Ok(())
}
