//! Sublinear expectation over a small family and the generator `G`.

use gscheme::uncertainty::builtin;
use gscheme::{g_function, sublinear_expect, Atom, DiscreteMeasure, UncertaintySet};

fn main() -> gscheme::Result<()> {
    let calm = DiscreteMeasure::new(vec![Atom::scalar(-0.1, 0.0, 0.5), Atom::scalar(0.1, 0.0, 0.5)]);
    let wild = DiscreteMeasure::new(vec![
        Atom::scalar(-0.3, 0.04, 0.25),
        Atom::scalar(0.0, 0.0, 0.5),
        Atom::scalar(0.3, -0.02, 0.25),
    ]);
    let u = UncertaintySet::new(vec![calm, wild])?;

    let square = sublinear_expect(&u, |x, _| x[0] * x[0])?;
    let neg_square = sublinear_expect(&u, |x, _| -x[0] * x[0])?;
    println!("Ê[X²] = {square}, −Ê[−X²] = {}", -neg_square);
    println!("Ê[Y] = {}, Ê[−Y] = {}", sublinear_expect(&u, |_, y| y[0])?, sublinear_expect(&u, |_, y| -y[0])?);

    for (p, a) in [(0.0, 1.0), (0.0, -1.0), (1.0, 0.0)] {
        println!("G({p}, {a}) = {}", g_function(&u, &[p], &[a])?);
    }

    let m = u.validate();
    println!("moments: {m:?}");

    let pm = builtin::pm_sigma(&[0.1, 0.3])?;
    println!("±σ family in measure-file form:\n{}", pm.to_measure_string());
    Ok(())
}
