//! Normal-form HS values for the two- and three-player banana games.
//!
//! Run with `cargo run --example banana`.

use hs_games::{hs_value, side_payment_normal, NormalFormGame};

fn show(label: &str, text: &str) -> hs_games::Result<()> {
    let game = NormalFormGame::from_json_str(text)?;
    let hs = hs_value(&game)?;
    println!("{label}");
    let n = game.num_players();
    for (coalition, value) in &hs.coalition_values {
        let members: Vec<String> = coalition.members(n).map(|i| (i + 1).to_string()).collect();
        println!("  v({{{}}}) = {value}", members.join(","));
    }
    println!("  HS            = {:?}", hs.values);
    println!("  side payments = {:?}", side_payment_normal(&game)?);
    println!(
        "  cooperative   = {:?}",
        game.action_space().decode(hs.cooperative_action)
    );
    Ok(())
}

fn main() -> hs_games::Result<()> {
    show("two players", include_str!("../data/banana-2p.json"))?;
    show("three players", include_str!("../data/banana-3p.json"))
}
