use std::fmt;
use std::sync::Arc;

use super::table::MonotoneTable;
use crate::error::{Error, Result};

/// Catalog keys understood by [`PhiFunction::from_key`].
pub const CATALOG: [&str; 4] = ["p-laplace(p)", "pq-laplace(p,q)", "anisotropic(p1,..,pk)", "weighted(p,w)"];

/// The weight φ in the operator div(φ(|∇u|)∇u).
#[derive(Clone)]
pub enum PhiFunction {
    /// φ(t) = t^{p-2}
    PLaplace { p: f64 },
    /// φ(t) = t^{p-2} + t^{q-2}
    PqLaplace { p: f64, q: f64 },
    /// φ(t) = Σ_j t^{p_j - 2}
    Anisotropic { exponents: Vec<f64> },
    /// φ(t) = A(t^p) t^{p-2} with A(s) = (1 + s)^w.
    Weighted { p: f64, w: f64 },
    /// Tabulated (t, φ(t)) samples, monotone cubic in log-log coordinates.
    Tabulated(MonotoneTable),
    /// Arbitrary user closure; derivatives fall back to central differences.
    Custom {
        name: String,
        phi: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    },
}

impl fmt::Debug for PhiFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PhiFunction({})", self.key())
    }
}

fn pow_term(coef: f64, t: f64, e: f64) -> f64 {
    if coef == 0.0 {
        0.0
    } else {
        coef * t.powf(e)
    }
}

impl PhiFunction {
    pub fn custom(name: impl Into<String>, phi: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        PhiFunction::Custom {
            name: name.into(),
            phi: Arc::new(phi),
        }
    }

    /// Parses a catalog key such as `p-laplace(3)` or `pq-laplace(2,4)`.
    pub fn from_key(key: &str) -> Result<Self> {
        let unknown = || {
            Error::config(
                "problem.phi",
                format!("unknown phi key `{key}`; catalog: {}", CATALOG.join(", ")),
            )
        };
        let key = key.trim();
        let open = key.find('(').ok_or_else(unknown)?;
        if !key.ends_with(')') {
            return Err(unknown());
        }
        let name = key[..open].trim();
        let args: Vec<f64> = key[open + 1..key.len() - 1]
            .split(',')
            .map(|s| s.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::config("problem.phi", format!("bad argument in `{key}`: {e}")))?;
        let arity = |n: usize| -> Result<()> {
            if args.len() == n {
                Ok(())
            } else {
                Err(Error::config(
                    "problem.phi",
                    format!("`{name}` takes {n} argument(s), got {}", args.len()),
                ))
            }
        };
        let phi = match name {
            "p-laplace" => {
                arity(1)?;
                PhiFunction::PLaplace { p: args[0] }
            }
            "pq-laplace" => {
                arity(2)?;
                PhiFunction::PqLaplace { p: args[0], q: args[1] }
            }
            "anisotropic" => {
                if args.is_empty() {
                    return Err(unknown());
                }
                let mut exponents = args;
                exponents.sort_by(f64::total_cmp);
                PhiFunction::Anisotropic { exponents }
            }
            "weighted" => {
                arity(2)?;
                PhiFunction::Weighted { p: args[0], w: args[1] }
            }
            _ => return Err(unknown()),
        };
        if let Some((ell, _)) = phi.natural_indices() {
            if ell <= 1.0 {
                return Err(Error::config("problem.phi", format!("`{key}` needs exponents > 1")));
            }
        }
        Ok(phi)
    }

    pub fn key(&self) -> String {
        match self {
            PhiFunction::PLaplace { p } => format!("p-laplace({p})"),
            PhiFunction::PqLaplace { p, q } => format!("pq-laplace({p},{q})"),
            PhiFunction::Anisotropic { exponents } => {
                let parts: Vec<String> = exponents.iter().map(|e| e.to_string()).collect();
                format!("anisotropic({})", parts.join(","))
            }
            PhiFunction::Weighted { p, w } => format!("weighted({p},{w})"),
            PhiFunction::Tabulated(t) => format!("table({} samples)", t.len()),
            PhiFunction::Custom { name, .. } => name.clone(),
        }
    }

    /// Growth indices (ℓ, m) known in closed form for catalog entries.
    pub fn natural_indices(&self) -> Option<(f64, f64)> {
        match self {
            PhiFunction::PLaplace { p } => Some((*p, *p)),
            PhiFunction::PqLaplace { p, q } => Some((p.min(*q), p.max(*q))),
            PhiFunction::Anisotropic { exponents } => Some((exponents[0], *exponents.last().unwrap())),
            PhiFunction::Weighted { p, w } => {
                let other = p * (1.0 + w);
                Some((p.min(other), p.max(other)))
            }
            PhiFunction::Tabulated(_) | PhiFunction::Custom { .. } => None,
        }
    }

    /// φ(t) for t > 0.
    pub fn value(&self, t: f64) -> f64 {
        match self {
            PhiFunction::PLaplace { p } => t.powf(p - 2.0),
            PhiFunction::PqLaplace { p, q } => t.powf(p - 2.0) + t.powf(q - 2.0),
            PhiFunction::Anisotropic { exponents } => exponents.iter().map(|e| t.powf(e - 2.0)).sum(),
            PhiFunction::Weighted { p, w } => (1.0 + t.powf(*p)).powf(*w) * t.powf(p - 2.0),
            PhiFunction::Tabulated(table) => table.eval(t),
            PhiFunction::Custom { phi, .. } => phi(t),
        }
    }

    /// φ'(t); analytic for catalog entries, central differences (h = 1e-6 t) otherwise.
    pub fn derivative(&self, t: f64) -> f64 {
        match self {
            PhiFunction::PLaplace { p } => pow_term(p - 2.0, t, p - 3.0),
            PhiFunction::PqLaplace { p, q } => pow_term(p - 2.0, t, p - 3.0) + pow_term(q - 2.0, t, q - 3.0),
            PhiFunction::Anisotropic { exponents } => exponents.iter().map(|e| pow_term(e - 2.0, t, e - 3.0)).sum(),
            PhiFunction::Weighted { p, w } => {
                let tp = t.powf(*p);
                let base = (1.0 + tp).powf(*w);
                let d_base = pow_term(w * p, t, p - 1.0) * (1.0 + tp).powf(w - 1.0);
                d_base * t.powf(p - 2.0) + base * pow_term(p - 2.0, t, p - 3.0)
            }
            PhiFunction::Tabulated(table) => table.derivative(t),
            PhiFunction::Custom { phi, .. } => {
                let h = t * 1e-6;
                (phi(t + h) - phi(t - h)) / (2.0 * h)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_catalog_keys() {
        let p = PhiFunction::from_key("pq-laplace(2, 4)").unwrap();
        assert_eq!(p.natural_indices(), Some((2.0, 4.0)));
        assert!((p.value(2.0) - 5.0).abs() < 1e-14);
        let a = PhiFunction::from_key("anisotropic(3,2,2.5)").unwrap();
        assert_eq!(a.natural_indices(), Some((2.0, 3.0)));
        let w = PhiFunction::from_key("weighted(2,0.5)").unwrap();
        assert_eq!(w.natural_indices(), Some((2.0, 3.0)));
    }

    #[test]
    fn unknown_key_lists_catalog() {
        let err = PhiFunction::from_key("q-laplace(3)").unwrap_err().to_string();
        assert!(err.contains("p-laplace(p)") && err.contains("weighted(p,w)"), "{err}");
        assert!(PhiFunction::from_key("p-laplace").is_err());
        assert!(PhiFunction::from_key("p-laplace(2,3)").is_err());
    }

    #[test]
    fn analytic_derivatives_match_differences() {
        for key in ["p-laplace(3)", "p-laplace(1.5)", "pq-laplace(2,4)", "anisotropic(2,2.5,3)", "weighted(2.5,0.7)"] {
            let phi = PhiFunction::from_key(key).unwrap();
            for &t in &[0.01, 0.3, 1.0, 7.0] {
                let h = 1e-6 * t;
                let fd = (phi.value(t + h) - phi.value(t - h)) / (2.0 * h);
                let an = phi.derivative(t);
                assert!((fd - an).abs() <= 1e-6 * an.abs().max(1e-8), "{key} t={t}: {fd} vs {an}");
            }
        }
    }
}
