//! Cross-checks the coalition-based HS value against the Shapley value of
//! the equilibrium-induced characteristic function on random games.

use hs_games::hs_normal::shapley_oracle;
use hs_games::{hs_value, NormalFormGame};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> hs_games::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let game = NormalFormGame::from_fn(vec![2, 3, 2], |_| {
            (0..3).map(|_| rng.gen_range(-10.0..10.0)).collect()
        })?;
        let hs = hs_value(&game)?.values;
        let oracle = shapley_oracle(&game)?;
        let dev = hs
            .iter()
            .zip(&oracle)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        worst = worst.max(dev);
    }
    println!("20 random 3-player games, max |HS - oracle| = {worst:.3e}");
    Ok(())
}
