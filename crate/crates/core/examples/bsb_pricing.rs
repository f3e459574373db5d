//! Superhedging prices under volatility uncertainty.

use gscheme::bsb::{bsb_price, bsb_rate_experiment, bsb_reference, BsbGridOptions, BsbSpec, Payoff, Spacing};
use gscheme::oracles::{bs_closed_form, FineGridOptions, OptionKind};

fn main() -> gscheme::Result<()> {
    let put = Payoff::Put { strike: 1.0 };
    let spec = BsbSpec::new(0.05, 0.1, 0.3, 1.0, put, 33, 0.01)?;
    println!("uncertain put  {:.8}", bsb_price(&spec, 1.0)?);
    println!("BS put at 0.3  {:.8}", bs_closed_form(0.05, 0.3, 1.0, 1.0, 1.0, OptionKind::Put)?);

    let capped = BsbSpec::new(0.05, 0.1, 0.3, 1.0, Payoff::call(1.0, Some(0.5))?, 33, 0.01)?;
    println!("uncertain capped call {:.8}", bsb_price(&capped, 1.0)?);

    let deltas: Vec<f64> = (5..=8).map(|k| 0.5f64.powi(k)).collect();
    let spec = spec.with_delta(deltas[0])?;
    let reference = bsb_reference(&spec, 1.0, FineGridOptions::default())?;
    let opts = BsbGridOptions {
        spacing: Spacing::PerStep(0.5),
        half_width: None,
    };
    let res = bsb_rate_experiment(&spec, 1.0, &deltas, &reference, &opts)?;
    print!("{}", res.csv_block());
    println!("{}", res.verdict("put rate"));
    Ok(())
}
