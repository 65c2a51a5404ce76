//! Solve the default scenario end to end and walk through the equilibrium
//! path stage by stage.

use entrygame::{Downstream, Game, MarketParams};

fn main() -> Result<(), entrygame::Error> {
    let params = MarketParams::default();
    println!("parameters: {params:?}\n");

    let game = Game::from_params(params)?;
    let outcome = game.solve_spne()?;

    println!("subgame-perfect outcome");
    println!("  regime   {}", outcome.regime);
    println!("  entered  {}", outcome.entered);
    println!();

    println!("stage 0: exclusive purchase");
    println!("  d0 chosen            {}", outcome.d0);
    println!("  exclusive price w0   {}", outcome.w0);
    println!("  pure monopsony d0    {}", outcome.d0_monopsony);
    if outcome.d0 > outcome.d0_monopsony {
        println!("  the incumbent buys beyond its monopsony optimum to keep the challenger out");
    }
    println!();

    println!("stage 1: entry decision");
    match (outcome.pi1_deter, outcome.pi1_accommodate) {
        (Some(det), Some(acc)) => {
            println!("  incumbent profit if deterring     {det}");
            println!("  incumbent profit if accommodating {acc}");
        }
        (Some(det), None) => {
            println!("  incumbent profit if deterring {det}; accommodation infeasible");
        }
        (None, Some(acc)) => {
            println!("  incumbent profit if accommodating {acc}; deterrence infeasible");
        }
        (None, None) => {}
    }
    println!();

    println!("stage 2: shared-producer purchases");
    match &outcome.downstream {
        Downstream::Monopsony(m) => {
            println!("  challenger out; incumbent alone buys d1 = {}", m.d1m);
            println!("  shared-producer price w = {}", m.w);
        }
        Downstream::Duopsony(eq) => {
            println!("  incumbent buys d1 = {}", eq.d1);
            println!("  challenger buys d2 = {}", eq.d2);
            println!("  shared-producer price w = {}", eq.w);
        }
    }
    println!();

    let p = &outcome.profits;
    println!("profits on the equilibrium path");
    println!("  incumbent          {}", p.pi1);
    println!("  challenger         {}", p.pi2);
    println!("  shared producer    {}", p.pi_p1);
    println!("  exclusive producer {}", p.pi_p0);
    println!("  social welfare     {}", p.sw);

    Ok(())
}
