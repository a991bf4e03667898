//! Compiles each built-in grid game and draws its start position.

use hs_games::gridworld::{render_grid, Canonical};
use hs_games::{canonical_game, compile_grid};

fn main() -> hs_games::Result<()> {
    for which in Canonical::ALL {
        let spec = canonical_game(which.name())?;
        let compiled = compile_grid(&spec)?;
        println!(
            "{}: {} states, {} transition entries",
            which.name(),
            compiled.game.num_states(),
            compiled.game.num_entries()
        );
        println!("{}", render_grid(&spec, Some(&spec.start_state())));
    }
    Ok(())
}
