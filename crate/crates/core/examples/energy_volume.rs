//! Energy and volume behaviour of all six variants on the four-drop initial
//! condition at `n = 128`.
//!
//! Prints, per variant, the worst modified-energy increase seen over 50 steps
//! at three time steps, then the relative volume drift over `T = 2` at
//! `dt = 1e-3`.
//!
//! ```bash
//! cargo run --release --example energy_volume
//! ```

use acnl::experiments::simulate;
use acnl::{Constraint, ExperimentConfig, Method};

fn main() -> acnl::Result<()> {
    println!("worst energy increase / (1 + |F|) over 50 steps");
    for method in Method::ALL {
        for constraint in Constraint::ALL {
            let mut line = format!("{:>14}", format!("{method}-{constraint}"));
            for dt in [1e-1, 1e-2, 1e-3] {
                let cfg = ExperimentConfig {
                    n: 128,
                    dt,
                    t_end: 50.0 * dt,
                    ..ExperimentConfig::drop_merge(constraint, method)
                };
                let series = simulate(&cfg)?.series;
                let worst = series
                    .windows(2)
                    .map(|w| {
                        let (a, b) = (w[0].energy_modified, w[1].energy_modified);
                        (b - a) / (1.0 + a.abs())
                    })
                    .fold(f64::NEG_INFINITY, f64::max);
                line += &format!("  dt={dt:.0e}: {worst:+.3e}");
            }
            println!("{line}");
        }
    }

    println!("\nvolume over T = 2, dt = 1e-3");
    for method in Method::ALL {
        for constraint in Constraint::ALL {
            let cfg = ExperimentConfig {
                n: 128,
                dt: 1e-3,
                t_end: 2.0,
                ..ExperimentConfig::drop_merge(constraint, method)
            };
            let series = simulate(&cfg)?.series;
            let v0 = series[0].volume;
            let drift = series
                .iter()
                .map(|r| ((r.volume - v0) / v0).abs())
                .fold(0.0, f64::max);
            let last = &series[series.len() - 1];
            let prev = &series[series.len() - 2];
            println!(
                "{:>14}  V0 = {v0:.6}  V(T)/V0 = {:.6}  max drift {drift:.3e}  dV at last step {:+.3e}",
                format!("{method}-{constraint}"),
                last.volume / v0,
                last.volume - prev.volume
            );
        }
    }
    Ok(())
}
