//! Cross-check the optimizers against brute-force grids.
//!
//! The solvers use grid-bracketed golden-section search and a damped
//! best-response iteration. This example re-solves two benchmark problems
//! with a plain dense grid and reports the disagreement, which should sit
//! well inside the grid's own resolution.

use entrygame::{Game, MarketParams};

const STEP: f64 = 1e-3;

fn grid_argmax<F: Fn(f64) -> f64>(f: F, hi: f64) -> f64 {
    let n = (hi / STEP).ceil() as usize;
    let mut best = (0.0, f(0.0));
    for i in 1..=n {
        let x = (i as f64) * STEP;
        let v = f(x);
        if v > best.1 {
            best = (x, v);
        }
    }
    best.0
}

fn main() -> Result<(), entrygame::Error> {
    let game = Game::from_params(MarketParams::default())?;
    let hi = game.settings.hi;

    println!("monopsony purchase at several exclusive quantities");
    for d0 in [0.0, 0.05, 0.2, 0.5] {
        let solved = game.solve_monopsony(d0)?.d1m;
        let brute = grid_argmax(|d1| game.pi1_mono(d0, d1), hi);
        println!(
            "  d0 = {d0:<5} solver {solved:<22} grid {brute:<8} gap {:.2e}",
            (solved - brute).abs()
        );
    }
    println!();

    println!("duopsony equilibrium at several exclusive quantities");
    for d0 in [0.0, 0.05, 0.2] {
        let eq = game.solve_duopsony(d0)?;
        // alternate best responses on the dense grid until the pair repeats
        let (mut g1, mut g2) = (0.0, 0.0);
        for _ in 0..200 {
            let n1 = grid_argmax(|d1| game.pi1_duo(d0, d1, g2), hi);
            let n2 = grid_argmax(|d2| game.pi2_duo(n1, d2), hi);
            if n1 == g1 && n2 == g2 {
                break;
            }
            g1 = n1;
            g2 = n2;
        }
        println!(
            "  d0 = {d0:<5} solver ({:<22}, {:<22}) gaps ({:.2e}, {:.2e})",
            eq.d1,
            eq.d2,
            (eq.d1 - g1).abs(),
            (eq.d2 - g2).abs()
        );
        println!(
            "           converged {} after {} iterations, residual {:.2e}",
            eq.report.converged, eq.report.iterations, eq.report.residual
        );
    }
    println!();
    println!("the CLI exposes the same checks over random scenarios: entrygame selftest");
    Ok(())
}
