//! The dense simplex solver on a small production problem:
//! maximize 3x + 5y subject to x <= 4, 2y <= 12, 3x + 2y <= 18.

use hs_games::lp::LinearProgram;

fn main() -> hs_games::Result<()> {
    let lp = LinearProgram::new(
        vec![3.0, 5.0],
        vec![vec![1.0, 0.0], vec![0.0, 2.0], vec![3.0, 2.0]],
        vec![4.0, 12.0, 18.0],
    )?;
    let report = lp.solve();
    println!("status    {:?}", report.status);
    println!("objective {}", report.objective);
    println!("primal    {:?}", report.primal);
    println!("dual      {:?}", report.dual);
    Ok(())
}
