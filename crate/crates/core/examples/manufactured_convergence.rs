//! Observed convergence order against u*(x) = x(1 − x) for p = 2 and p = 3.

use singular_phi::cli::{study, RunConfig, RunOptions};

fn main() -> singular_phi::error::Result<()> {
    let out = std::env::temp_dir().join("singular-phi-manufactured");
    for p in [2, 3] {
        let cfg = RunConfig::from_toml(&format!(
            "[problem]\nphi = \"p-laplace({p})\"\nalpha = 1.0\n\n[manufactured]\nexact = \"x*(1-x)\"\nsizes = [16, 32, 64, 128]\n"
        ))?;
        let opts = RunOptions { out: Some(out.clone()), quiet: true, seed: 0 };
        println!("p = {p}");
        println!("{:>6} {:>12} {:>12} {:>8} {:>8}", "n", "max err", "L2 err", "order", "L2 ord");
        for r in study(&cfg, &opts, None)? {
            let o = |v: Option<f64>| v.map_or("-".into(), |x| format!("{x:.3}"));
            println!("{:>6} {:>12.4e} {:>12.4e} {:>8} {:>8}", r.n, r.max_error, r.l2_error, o(r.order_max), o(r.order_l2));
        }
    }
    Ok(())
}
