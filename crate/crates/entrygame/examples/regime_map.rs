//! Map entry regimes over the exclusive-data cost and the entry fee.
//!
//! Re-solves the game on a grid of holdings costs at three entry-fee
//! levels and prints which regime wins where. Cheap exclusive data or a
//! small entry fee push the market toward accommodation; expensive data
//! with a large fee blockades entry without any strategic distortion.

use entrygame::{run_sweep, SweepSpec};

fn main() -> Result<(), entrygame::Error> {
    let spec = SweepSpec::c0();
    let rows = run_sweep(&spec)?;

    println!("entry regime by exclusive-data cost c0 and entry fee F\n");
    print!("{:>10} ", "c0 \\ F");
    for f in &spec.f_levels {
        print!("{f:>14}");
    }
    println!();

    for value in &spec.grid {
        print!("{value:>10.4} ");
        for f in &spec.f_levels {
            let label = rows
                .iter()
                .find(|r| r.param_value == *value && r.f == *f)
                .and_then(|r| r.regime)
                .map(|r| r.to_string())
                .unwrap_or_else(|| "-".into());
            print!("{label:>14}");
        }
        println!();
    }

    println!();
    println!("Blockade: the monopsony purchase already keeps the challenger out.");
    println!("Deter:    the incumbent distorts its purchase upward to keep it out.");
    println!("Accommodate: the incumbent lets entry happen and shares the producer.");
    Ok(())
}
