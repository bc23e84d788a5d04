//! Split conformal intervals from a sliding residual window.
//!
//! Run with: cargo run --release -p carbonbound --example split_conformal

use carbonbound::conformal::{empirical_quantile, split_conformal_interval, ResidualWindow};

fn main() {
    // residuals from a slightly pessimistic forecaster
    let residuals = [-6.0, -2.5, -1.0, 0.0, 0.5, 1.5, 2.0, 3.5, 4.0, 9.0];
    let window = ResidualWindow::from_initial(residuals.len(), &residuals).unwrap();

    println!("calibration residuals: {residuals:?}");
    for p in [0.05, 0.25, 0.5, 0.75, 0.95] {
        let q = empirical_quantile(&residuals, p).unwrap();
        println!("  q({p:.2}) = {q:+.1}");
    }

    let point_forecast = 420.0;
    println!("\npoint forecast {point_forecast} g/kWh becomes:");
    for alpha in [0.2, 0.1, 0.05] {
        let interval = split_conformal_interval(point_forecast, &window, alpha).unwrap();
        println!(
            "  alpha {alpha:4}: [{:7.2}, {:7.2}]  width {:.2}",
            interval.lower,
            interval.upper,
            interval.width()
        );
    }
    println!("\nsmaller alpha demands more coverage, so the intervals nest.");

    // the window is sliding state: pushing fresh residuals evicts the old
    let mut window = window;
    for new_residual in [0.2, -0.4, 0.1] {
        window.push(new_residual);
    }
    let updated = split_conformal_interval(point_forecast, &window, 0.1).unwrap();
    println!(
        "after three calm hours the 90% interval tightens to [{:.2}, {:.2}]",
        updated.lower, updated.upper
    );
}
