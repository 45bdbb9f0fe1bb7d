//! Quadrature proxies for the integrability hypotheses and the resulting
//! theorem-applicability verdicts.

use std::collections::HashSet;
use std::fmt;

use super::{q_window, FieldPoint, QWindow, SingularProblem};
use crate::discretization::Mesh;
use crate::nfunction::{check_hypotheses, luxemburg_norm, GrowthReport};
use crate::quad::{GL3_NODES, GL3_WEIGHTS};

/// Number of dyadic boundary layers in a boundary cell.
pub const LAYERS: usize = 10;
/// Last-layer share of an integral above which it is reported as suspected divergent.
pub const DIVERGENCE_SHARE: f64 = 0.1;

struct Sample {
    x: [f64; 2],
    d: f64,
    cell: usize,
    bary: [f64; 3],
    weight: f64,
    /// boundary layer index 0..LAYERS, `None` for regular cell quadrature
    layer: Option<usize>,
}

/// Quadrature over the mesh with geometric refinement towards ∂Ω.
struct LayeredQuadrature {
    samples: Vec<Sample>,
}

impl LayeredQuadrature {
    fn new(mesh: &Mesh) -> Self {
        let domain = mesh.domain();
        let mut samples = Vec::new();
        let facets: HashSet<(usize, usize)> = mesh
            .boundary_facets()
            .iter()
            .map(|&[a, b]| (a.min(b), a.max(b)))
            .collect();
        // s ∈ [2^{-k-1}, 2^{-k}] for k < LAYERS − 1, innermost layer [0, 2^{-(LAYERS−1)}]
        let layer_bounds = |k: usize| -> (f64, f64) {
            let hi = 0.5f64.powi(k as i32);
            let lo = if k == LAYERS - 1 { 0.0 } else { 0.5 * hi };
            (lo, hi)
        };
        for c in 0..mesh.n_cells() {
            let cell = mesh.cell(c);
            let vx: Vec<[f64; 2]> = cell.iter().map(|&v| mesh.vertex(v)).collect();
            let on_b: Vec<bool> = cell.iter().map(|&v| mesh.is_boundary(v)).collect();
            let meas = mesh.cell_measure(c);
            let mut push = |bary: [f64; 3], weight: f64, layer: usize| {
                let mut x = [0.0; 2];
                for (i, p) in vx.iter().enumerate() {
                    x[0] += bary[i] * p[0];
                    x[1] += bary[i] * p[1];
                }
                samples.push(Sample {
                    x,
                    d: domain.distance(x),
                    cell: c,
                    bary,
                    weight,
                    layer: Some(layer),
                });
            };
            if mesh.dim() == 1 {
                if let Some(b) = on_b.iter().position(|&f| f) {
                    let o = 1 - b;
                    for k in 0..LAYERS {
                        let (lo, hi) = layer_bounds(k);
                        for (sn, sw) in GL3_NODES.iter().zip(GL3_WEIGHTS) {
                            let s = lo + sn * (hi - lo);
                            let mut bary = [0.0; 3];
                            bary[b] = 1.0 - s;
                            bary[o] = s;
                            push(bary, meas * sw * (hi - lo), k);
                        }
                    }
                    continue;
                }
            } else {
                let edge = (0..3).find(|&e| {
                    let (a, b) = (cell[e], cell[(e + 1) % 3]);
                    facets.contains(&(a.min(b), a.max(b)))
                });
                let vertex = on_b.iter().position(|&f| f);
                if edge.is_some() || vertex.is_some() {
                    for k in 0..LAYERS {
                        let (lo, hi) = layer_bounds(k);
                        for (sn, sw) in GL3_NODES.iter().zip(GL3_WEIGHTS) {
                            let s = lo + sn * (hi - lo);
                            for (rn, rw) in GL3_NODES.iter().zip(GL3_WEIGHTS) {
                                let mut bary = [0.0; 3];
                                let jac;
                                if let Some(e) = edge {
                                    // collapse from the boundary edge (s = 0) to the apex (s = 1)
                                    let (i0, i1, i2) = (e, (e + 1) % 3, (e + 2) % 3);
                                    bary[i0] = (1.0 - s) * (1.0 - rn);
                                    bary[i1] = (1.0 - s) * rn;
                                    bary[i2] = s;
                                    jac = 2.0 * meas * (1.0 - s);
                                } else {
                                    let i0 = vertex.unwrap();
                                    let (i1, i2) = ((i0 + 1) % 3, (i0 + 2) % 3);
                                    bary[i0] = 1.0 - s;
                                    bary[i1] = s * (1.0 - rn);
                                    bary[i2] = s * rn;
                                    jac = 2.0 * meas * s;
                                }
                                push(bary, jac * sw * rw * (hi - lo), k);
                            }
                        }
                    }
                    continue;
                }
            }
            for q in mesh.quad_points(c) {
                samples.push(Sample {
                    x: q.x,
                    d: q.d,
                    cell: c,
                    bary: q.bary,
                    weight: q.weight,
                    layer: None,
                });
            }
        }
        Self { samples }
    }

    fn values(&self, mesh: &Mesh, f: impl Fn(&FieldPoint) -> f64) -> Vec<f64> {
        self.samples
            .iter()
            .map(|s| {
                f(&FieldPoint {
                    x: s.x,
                    d: s.d,
                    nodes: mesh.cell(s.cell),
                    bary: s.bary,
                })
            })
            .collect()
    }

    fn weights(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.weight).collect()
    }

    /// Integral of sampled nonnegative values with its innermost-layer share.
    fn integral(&self, vals: &[f64], name: &str) -> ProxyCheck {
        let mut total = 0.0;
        let mut last = 0.0;
        for (s, v) in self.samples.iter().zip(vals) {
            let c = s.weight * v;
            total += c;
            if s.layer == Some(LAYERS - 1) {
                last += c;
            }
        }
        let share = if total > 0.0 { last / total } else { 0.0 };
        ProxyCheck::new(name, total, share)
    }

    /// Sup proxy: the innermost layer may not exceed the rest by more than 10%.
    fn sup(&self, vals: &[f64], name: &str) -> ProxyCheck {
        let (mut inner, mut rest) = (0.0f64, 0.0f64);
        for (s, v) in self.samples.iter().zip(vals) {
            let v = if v.is_nan() { f64::INFINITY } else { v.abs() };
            if s.layer == Some(LAYERS - 1) {
                inner = inner.max(v);
            } else {
                rest = rest.max(v);
            }
        }
        let value = inner.max(rest);
        let finite = value.is_finite();
        let growing = inner > 1.1 * rest;
        ProxyCheck {
            name: name.to_string(),
            value,
            last_layer_share: if value > 0.0 { inner / value } else { 0.0 },
            finite,
            pass: finite && !growing,
            note: if growing {
                Some("values still growing in the innermost boundary layer".into())
            } else {
                None
            },
        }
    }
}

/// One integrability hypothesis evaluated by quadrature.
#[derive(Debug, Clone, PartialEq)]
pub struct ProxyCheck {
    pub name: String,
    /// integral, norm or sup value
    pub value: f64,
    /// fraction contributed by the innermost boundary layer
    pub last_layer_share: f64,
    pub finite: bool,
    pub pass: bool,
    pub note: Option<String>,
}

impl ProxyCheck {
    fn new(name: &str, value: f64, share: f64) -> Self {
        let finite = value.is_finite();
        let pass = finite && share <= DIVERGENCE_SHARE;
        let note = if !finite {
            Some("non-finite quadrature value".into())
        } else if !pass {
            Some(format!("suspected divergence: innermost layer carries {:.1}% of the total", 100.0 * share))
        } else {
            None
        };
        ProxyCheck {
            name: name.to_string(),
            value,
            last_layer_share: share,
            finite,
            pass,
            note,
        }
    }

    fn status(&self) -> &'static str {
        if self.pass {
            "pass"
        } else if self.finite {
            "suspected fail"
        } else {
            "fail"
        }
    }
}

impl fmt::Display for ProxyCheck {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{:<34} {:<15} value {:.6e}, innermost-layer share {:.3}",
            self.name,
            self.status(),
            self.value,
            self.last_layer_share
        )?;
        if let Some(n) = &self.note {
            write!(f, " ({n})")?;
        }
        Ok(())
    }
}

/// The conclusions the hypothesis checker can certify.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TheoremKind {
    /// W₀^{1,Φ} solution, via a·d^{−α} ∈ L_Φ̃
    ExistenceDecay,
    /// W₀^{1,Φ} solution, via α ≤ 1 and a ∈ L^{ℓ*/(ℓ*+α−1)}
    ExistenceIntegrable,
    /// W_loc^{1,Φ} solution for α ≥ 1
    ExistenceLocal,
    /// u ∈ C(Ω̄) when a ∈ L^∞
    Continuity,
    /// u ∈ L^∞ when a ∈ L^q, N/ℓ < q ≤ q(α)
    Boundedness,
    /// at most one W₀^{1,Φ} solution
    Uniqueness,
    /// singular-convex problem has a W₀^{1,Φ} solution
    ConvexExistence,
    /// singular-convex solution is bounded
    ConvexBoundedness,
}

impl TheoremKind {
    pub const ALL: [TheoremKind; 8] = [
        TheoremKind::ExistenceDecay,
        TheoremKind::ExistenceIntegrable,
        TheoremKind::ExistenceLocal,
        TheoremKind::Continuity,
        TheoremKind::Boundedness,
        TheoremKind::Uniqueness,
        TheoremKind::ConvexExistence,
        TheoremKind::ConvexBoundedness,
    ];

    pub fn label(&self) -> &'static str {
        match self {
            TheoremKind::ExistenceDecay => "existence in W0^{1,Phi} [a d^-alpha in L_conj(Phi)]",
            TheoremKind::ExistenceIntegrable => "existence in W0^{1,Phi} [alpha <= 1, a in L^{l*/(l*+alpha-1)}]",
            TheoremKind::ExistenceLocal => "existence in W_loc^{1,Phi} [alpha >= 1]",
            TheoremKind::Continuity => "continuity up to the boundary [a in L^inf]",
            TheoremKind::Boundedness => "L^inf bound [a in L^q, N/l < q <= q(alpha)]",
            TheoremKind::Uniqueness => "uniqueness in W0^{1,Phi}",
            TheoremKind::ConvexExistence => "singular-convex existence [0 <= gamma < l-1, b in L^sigma]",
            TheoremKind::ConvexBoundedness => "singular-convex L^inf bound [b in L^inf, a in L^q]",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Verdict {
    pub kind: TheoremKind,
    pub applies: bool,
    /// failed hypotheses (empty when `applies`) or notes
    pub reasons: Vec<String>,
}

#[derive(Debug, Clone)]
pub struct HypothesisReport {
    pub growth: GrowthReport,
    /// a ≥ 0 and a ≢ 0 at all samples
    pub a_admissible: bool,
    pub a_l1: ProxyCheck,
    /// ∫Φ̃(a d^{−α}); `value` is the modular, see `decay_norm` for the norm
    pub a_decay: ProxyCheck,
    pub decay_norm: f64,
    pub a_sobolev_dual: ProxyCheck,
    pub a_q: Option<ProxyCheck>,
    pub a_inf: ProxyCheck,
    pub b_sigma: Option<ProxyCheck>,
    pub b_inf: Option<ProxyCheck>,
    pub alpha_ge_one: bool,
    pub q_window: Result<QWindow, String>,
    /// q used for the L^q checks (supplied, or chosen when a is bounded)
    pub q_used: Option<f64>,
    pub q_ok: bool,
    pub sigma_ok: bool,
    pub verdicts: Vec<Verdict>,
}

impl HypothesisReport {
    pub fn applicable_theorems(&self) -> Vec<TheoremKind> {
        self.verdicts.iter().filter(|v| v.applies).map(|v| v.kind).collect()
    }

    pub fn verdict(&self, kind: TheoremKind) -> &Verdict {
        self.verdicts.iter().find(|v| v.kind == kind).expect("every kind has a verdict")
    }

    pub fn applies(&self, kind: TheoremKind) -> bool {
        self.verdict(kind).applies
    }

    pub fn summary(&self) -> String {
        let mut s = String::new();
        s.push_str(&self.growth.summary());
        s.push('\n');
        s.push_str(&format!("a >= 0, a != 0 on samples: {}\n", self.a_admissible));
        for c in [Some(&self.a_l1), Some(&self.a_decay), Some(&self.a_sobolev_dual), self.a_q.as_ref(), Some(&self.a_inf), self.b_sigma.as_ref(), self.b_inf.as_ref()]
            .into_iter()
            .flatten()
        {
            s.push_str(&format!("{c}\n"));
        }
        s.push_str(&format!("Luxemburg norm of a d^-alpha (conjugate): {:.6e}\n", self.decay_norm));
        match &self.q_window {
            Ok(w) => s.push_str(&format!("q window {w}; q used {:?}; ok = {}\n", self.q_used, self.q_ok)),
            Err(e) => s.push_str(&format!("q window undefined: {e}\n")),
        }
        s.push_str(&format!("alpha >= 1: {}; sigma ok: {}\n", self.alpha_ge_one, self.sigma_ok));
        for v in &self.verdicts {
            let tag = if v.applies { "APPLIES" } else { "no     " };
            s.push_str(&format!("{tag} {}", v.kind.label()));
            if !v.reasons.is_empty() {
                s.push_str(&format!(" -- {}", v.reasons.join("; ")));
            }
            s.push('\n');
        }
        s
    }
}

/// Evaluates every hypothesis on `mesh` and decides which conclusions apply.
///
/// When both W₀^{1,Φ} existence branches hold they are both reported; neither
/// is preferred.
pub fn check_problem(p: &SingularProblem, mesh: &Mesh) -> HypothesisReport {
    let nf = &p.nfun;
    let spec = nf.spec();
    let growth = check_hypotheses(spec);
    let lq = LayeredQuadrature::new(mesh);
    let weights = lq.weights();
    let a_vals = lq.values(mesh, |fp| p.a.eval(fp));
    let a_admissible = a_vals.iter().all(|&v| v >= 0.0) && a_vals.iter().any(|&v| v > 0.0);
    let abs_a: Vec<f64> = a_vals.iter().map(|v| v.abs()).collect();

    let a_l1 = lq.integral(&abs_a, "a in L^1");
    let decay_vals: Vec<f64> = abs_a.iter().zip(&lq.samples).map(|(a, s)| a * s.d.powf(-p.alpha)).collect();
    let conj: Vec<f64> = decay_vals.iter().map(|&v| nf.conjugate(v)).collect();
    let a_decay = lq.integral(&conj, "a d^-alpha in L_conj(Phi)");
    let decay_norm = if a_decay.finite {
        luxemburg_norm(&decay_vals, &weights, |t| nf.conjugate(t))
    } else {
        f64::INFINITY
    };
    let ls = spec.ell_star();
    let dual_exp = ls / (ls + p.alpha - 1.0);
    let powed = |e: f64| -> Vec<f64> { abs_a.iter().map(|a| a.powf(e)).collect() };
    let a_sobolev_dual = lq.integral(&powed(dual_exp), &format!("a in L^{dual_exp:.4}"));
    let a_inf = lq.sup(&abs_a, "a in L^inf");

    let window = q_window(p.alpha + p.gamma, spec.ell, spec.em, spec.dim_n, p.alpha).map_err(|e| e.to_string());
    let q_used = match (p.q, &window) {
        (Some(q), _) => Some(q),
        (None, Ok(w)) if a_inf.pass && !w.is_empty() => Some(if w.is_unbounded() { w.q_min + 1.0 } else { w.q_max }),
        _ => None,
    };
    let a_q = q_used.map(|q| lq.integral(&powed(q), &format!("a in L^{q:.4}")));
    let q_ok = match (&window, q_used, &a_q) {
        (Ok(w), Some(q), Some(c)) => w.contains(q) && c.pass,
        _ => false,
    };

    let convex = p.has_convex_term();
    let (b_sigma, b_inf) = if convex {
        let b_vals: Vec<f64> = lq.values(mesh, |fp| p.b.eval(fp).abs());
        let sig = p.sigma.map(|s| lq.integral(&b_vals.iter().map(|b| b.powf(s)).collect::<Vec<_>>(), &format!("b in L^{s:.4}")));
        (sig, Some(lq.sup(&b_vals, "b in L^inf")))
    } else {
        (None, None)
    };
    let ell = spec.ell;
    let gamma_ok = p.gamma >= 0.0 && p.gamma < ell - 1.0;
    let sigma_ok = if !convex {
        true
    } else {
        let lo = ell / (ell - p.gamma - 1.0);
        match (p.sigma, &b_sigma, &b_inf) {
            (Some(s), Some(c), _) => s > lo && c.pass,
            (None, _, Some(inf)) => inf.pass,
            _ => false,
        }
    };
    let b_bounded = b_inf.as_ref().map_or(true, |c| c.pass);

    let mut base = Vec::new();
    if !growth.all_pass() {
        base.push("growth hypotheses on phi fail on probes".to_string());
    }
    if !a_admissible {
        base.push("a is negative somewhere or vanishes on all samples".to_string());
    }
    if !a_l1.pass {
        base.push(format!("a in L^1 {}", a_l1.status()));
    }
    let pure = {
        let mut r = base.clone();
        if convex {
            r.push("convex term b u^gamma present".into());
        }
        r
    };
    let with = |mut r: Vec<String>, cond: bool, why: String| {
        if !cond {
            r.push(why);
        }
        r
    };
    let decay_r = with(pure.clone(), a_decay.pass, format!("a d^-alpha in L_conj(Phi) {}", a_decay.status()));
    let integ_r = with(
        with(pure.clone(), p.alpha <= 1.0, format!("alpha = {} > 1", p.alpha)),
        a_sobolev_dual.pass,
        format!("{} {}", a_sobolev_dual.name, a_sobolev_dual.status()),
    );
    let local_r = with(pure.clone(), p.alpha >= 1.0, format!("alpha = {} < 1", p.alpha));
    let any_existence = decay_r.is_empty() || integ_r.is_empty() || local_r.is_empty();
    let cont_r = with(
        with(Vec::new(), any_existence, "no existence result applies".into()),
        a_inf.pass,
        format!("a in L^inf {}", a_inf.status()),
    );
    let bounded_r = {
        let mut r = with(Vec::new(), any_existence, "no existence result applies".into());
        r = with(r, q_ok, format!("no admissible q with a in L^q (window {:?})", window));
        if p.alpha <= 1.0 {
            r = with(r, a_sobolev_dual.pass, format!("{} {}", a_sobolev_dual.name, a_sobolev_dual.status()));
        }
        r
    };
    let unique_r = if decay_r.is_empty() || integ_r.is_empty() {
        Vec::new()
    } else {
        vec!["no W0^{1,Phi} existence branch applies".to_string()]
    };
    let convex_r = {
        let mut r = base.clone();
        if !convex {
            r.push("b = 0 (pure singular problem)".into());
        }
        r = with(r, gamma_ok, format!("gamma = {} not in [0, l-1) = [0, {})", p.gamma, ell - 1.0));
        r = with(r, a_decay.pass, format!("a d^-alpha in L_conj(Phi) {}", a_decay.status()));
        with(r, sigma_ok, format!("b not shown in L^sigma with sigma > l/(l-gamma-1) = {}", ell / (ell - p.gamma - 1.0)))
    };
    let convex_bounded_r = {
        let mut r = with(Vec::new(), convex_r.is_empty(), "singular-convex existence does not apply".into());
        r = with(r, b_bounded, "b not shown bounded".into());
        r = with(r, q_ok, format!("no admissible q with a in L^q (window {:?})", window));
        if p.alpha <= 1.0 {
            r = with(r, a_sobolev_dual.pass, format!("{} {}", a_sobolev_dual.name, a_sobolev_dual.status()));
        }
        r
    };
    let verdicts = [
        (TheoremKind::ExistenceDecay, decay_r),
        (TheoremKind::ExistenceIntegrable, integ_r),
        (TheoremKind::ExistenceLocal, local_r),
        (TheoremKind::Continuity, cont_r),
        (TheoremKind::Boundedness, bounded_r),
        (TheoremKind::Uniqueness, unique_r),
        (TheoremKind::ConvexExistence, convex_r),
        (TheoremKind::ConvexBoundedness, convex_bounded_r),
    ]
    .into_iter()
    .map(|(kind, reasons)| Verdict {
        kind,
        applies: reasons.is_empty(),
        reasons,
    })
    .collect();

    HypothesisReport {
        growth,
        a_admissible,
        a_l1,
        a_decay,
        decay_norm,
        a_sobolev_dual,
        a_q,
        a_inf,
        b_sigma,
        b_inf,
        alpha_ge_one: p.alpha >= 1.0,
        q_window: window,
        q_used,
        q_ok,
        sigma_ok,
        verdicts,
    }
}
