//! Write comparative-statics tables to CSV files.
//!
//! Runs the default exclusive-cost sweep and saves one file per entry-fee
//! level into a temporary directory, then summarizes which branch each
//! agent prefers row by row.

use entrygame::cli::sweep_rows_to_csv;
use entrygame::{run_sweep, welfare_comparison, SweepSpec};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let spec = SweepSpec::c0();
    let rows = run_sweep(&spec)?;

    let dir = std::env::temp_dir().join("entrygame_sweeps");
    std::fs::create_dir_all(&dir)?;

    for f in &spec.f_levels {
        let level_rows: Vec<_> = rows.iter().filter(|r| r.f == *f).cloned().collect();
        let path = dir.join(format!("sweep_c0_f{f}.csv"));
        std::fs::write(&path, sweep_rows_to_csv(&level_rows))?;
        println!("wrote {} ({} rows)", path.display(), level_rows.len());
    }

    let welfare = welfare_comparison(&rows, 1e-12);
    println!(
        "\nacross the {} rows where both deterring and accommodating are feasible:",
        welfare.rows_compared
    );
    println!(
        "  welfare is higher under deterrence in {} rows, accommodation in {}",
        welfare.sw.deter, welfare.sw.accommodate
    );
    println!(
        "  the exclusive producer prefers deterrence in {} rows, accommodation in {}",
        welfare.pi_p0.deter, welfare.pi_p0.accommodate
    );
    println!(
        "  the challenger prefers accommodation in {} of {} rows, as it must",
        welfare.pi2.accommodate, welfare.rows_compared
    );
    Ok(())
}
