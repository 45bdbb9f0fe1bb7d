//! Φ, Φ⁻¹, the conjugate Φ̃ and the Sobolev conjugate for a few catalog entries.

use singular_phi::nfunction::{check_hypotheses, NFunctionSpec};

fn main() -> singular_phi::error::Result<()> {
    for key in ["p-laplace(2)", "p-laplace(3)", "pq-laplace(2,4)", "weighted(2,0.5)"] {
        let spec = NFunctionSpec::from_key(key, None)?;
        let growth = check_hypotheses(&spec);
        let nf = spec.build()?;
        println!("{key}: ell = {}, m = {}, ell* = {}", nf.ell(), nf.em(), nf.ell_star());
        println!("{}", growth.summary());
        println!("{:>10} {:>14} {:>14} {:>14} {:>14}", "t", "Phi", "Phi^-1", "conj", "young gap");
        for t in [1e-2, 0.1, 1.0, 10.0, 100.0] {
            // Young equality at s* where s*·φ(s*) = t
            let s = nf.conjugate_argmax(t)?;
            let gap = nf.big_phi(s) + nf.conjugate(t) - s * t;
            println!("{t:>10.2e} {:>14.6e} {:>14.6e} {:>14.6e} {gap:>14.2e}", nf.big_phi(t), nf.inverse(t), nf.conjugate(t));
        }
        if let Ok(v) = nf.sobolev_conjugate(1.0) {
            println!("Sobolev conjugate at 1: {v:.6e}");
        }
        println!();
    }
    Ok(())
}
