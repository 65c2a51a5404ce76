//! Print the primitive curves the model is built from.
//!
//! Three ingredients drive everything else: the saturating value of a data
//! stock, the diminishing-overlap combination of two sources, and the
//! economies-of-scope index for data held under one roof.

use entrygame::model::{effective_data, scope_value};
use entrygame::{Market, MarketParams};

fn main() -> Result<(), entrygame::Error> {
    let params = MarketParams::default();
    let market = Market::new(params)?;

    println!("value of a data stock, eta(d) = eta_max / (1 + e^(-k (d - d_m)))");
    println!("midpoint d_m = {} puts eta(0) at eta_0 = {}", market.curve.d_m, params.eta_0);
    for d in [0.0, 0.25, 0.5, 1.0, 2.0, 4.0] {
        println!("  eta({d:<4}) = {}", market.curve.value(d)?);
    }
    println!("  saturates at eta_max = {}", params.eta_max);
    println!();

    println!("combining two sources with overlap delta = {}", params.delta);
    for (a, b) in [(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (2.0, 1.0)] {
        println!(
            "  effective_data({a}, {b}) = {}",
            effective_data(params.delta, a, b)?
        );
    }
    println!("  one source passes through unchanged; two sources overlap");
    println!(
        "  with delta = 0 they simply add: effective_data(1, 1) = {}",
        effective_data(0.0, 1.0, 1.0)?
    );
    println!();

    println!("economies-of-scope index for jointly held data");
    for (d1, d2) in [(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (2.0, 2.0)] {
        println!(
            "  scope_value(delta, {d1}, {d2}) = {}",
            scope_value(params.delta, d1, d2)?
        );
    }
    println!(
        "  symmetric in the stocks: scope_value(delta, 2, 1) = {}",
        scope_value(params.delta, 2.0, 1.0)?
    );
    Ok(())
}
