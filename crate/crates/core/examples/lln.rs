//! Law of large numbers with mean uncertainty.

use gscheme::clt::{lln_experiment, ThetaSet};
use gscheme::uncertainty::builtin;

fn main() -> gscheme::Result<()> {
    let u = builtin::lln_box(&[0.0, 0.1], 0.1)?;
    let theta = ThetaSet::interval(0.0, 0.1)?;
    let res = lln_experiment(&u, &theta, &[4, 16, 64, 256])?;
    print!("{}", res.csv_block());
    println!("{}", res.verdict("lln"));
    Ok(())
}
