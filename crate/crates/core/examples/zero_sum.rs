//! Minimax value and optimal mixed strategies of matrix games.

use hs_games::{solve_zero_sum, Matrix};

fn main() -> hs_games::Result<()> {
    let games = [
        ("matching pennies", vec![vec![1.0, -1.0], vec![-1.0, 1.0]]),
        (
            "rock-paper-scissors",
            vec![
                vec![0.0, -1.0, 1.0],
                vec![1.0, 0.0, -1.0],
                vec![-1.0, 1.0, 0.0],
            ],
        ),
        (
            "skewed 2x3",
            vec![vec![3.0, -1.0, 2.0], vec![-2.0, 4.0, 1.0]],
        ),
    ];
    for (name, rows) in games {
        let m = Matrix::from_rows(&rows)?;
        let sol = solve_zero_sum(&m)?;
        println!("{name}: value {:.4}", sol.value);
        println!("  row {:?}", sol.row.probabilities());
        println!("  col {:?}", sol.col.probabilities());
    }
    Ok(())
}
