//! Local power of the mixture LRT and of the two threshold rules as a
//! function of `δ/κ`, plus the expected `δ/κ` of the reference scenarios.
//!
//! ```text
//! cargo run --release --example power_curves
//! ```

use ggfic::inference::expected_information;
use ggfic::selection::{
    lrt_local_power, mae_sigma2_local_power, mae_sigma2_threshold_root, pretest_local_power, pretest_threshold_root,
};
use ggfic::sim::Scenario;

fn main() -> ggfic::Result<()> {
    println!("pre-test threshold {:.6}, MAE sigma2 threshold {:.6}\n", pretest_threshold_root(), mae_sigma2_threshold_root());
    println!("{:>8} {:>10} {:>10} {:>10}", "d/k", "LRT 5%", "pre-test", "FIC sigma2");
    for i in 0..=12 {
        let r = 0.25 * i as f64;
        println!("{r:>8.2} {:>10.4} {:>10.4} {:>10.4}", lrt_local_power(0.05, r)?, pretest_local_power(r), mae_sigma2_local_power(r));
    }

    println!("\nexpected delta/kappa at the truth (90+ samples)");
    for name in ["S1", "S2"] {
        let params = Scenario::preset_params(name)?;
        for window in [80.0, 85.0, 90.0] {
            let t = window - 60.0;
            let kappa = expected_information(&params, t)?.try_inverse().expect("invertible")[(2, 2)].sqrt();
            // n at the window when 10,000 are expected past 90
            let n = 10_000.0 * params.survival(t)? / params.survival(30.0)?;
            let r = n.sqrt() * params.sigma2() / kappa;
            println!(
                "  {name} {window}+: n = {n:>7.0}, kappa = {kappa:.4}, delta/kappa = {r:.3}, LRT power {:.3}",
                lrt_local_power(0.05, r)?
            );
        }
    }
    Ok(())
}
