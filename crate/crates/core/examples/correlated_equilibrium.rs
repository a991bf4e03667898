//! Welfare-maximizing correlated equilibrium of Chicken.

use hs_games::{solve_utilitarian_ce, NormalFormGame};

fn main() -> hs_games::Result<()> {
    // Actions: 0 = dare, 1 = chicken.
    let chicken = NormalFormGame::from_fn(vec![2, 2], |a| match (a[0], a[1]) {
        (0, 0) => vec![0.0, 0.0],
        (0, 1) => vec![7.0, 2.0],
        (1, 0) => vec![2.0, 7.0],
        _ => vec![6.0, 6.0],
    })?;
    let ce = solve_utilitarian_ce(&chicken)?;
    for (joint, p) in ce.dist.iter().enumerate() {
        println!("{:?}: {p:.4}", chicken.action_space().decode(joint));
    }
    println!("expected utilities {:?}", ce.values);
    Ok(())
}
