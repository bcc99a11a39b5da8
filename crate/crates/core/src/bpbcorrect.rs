//! The correction: given a unit operator `T: C(K) → Y`, a unit `f0` with
//! `‖T f0‖ > 1 − s` and `0 < ε < 1`, build `S` with `‖S‖ = ‖S f3‖ = 1`,
//! `‖S − T‖ < ε` and `‖f3 − f0‖ < ε`, recording every intermediate
//! inequality in a [`Certificate`].
//!
//! On a finite discrete `K` every set is clopen and compact, so the
//! approximation steps of the general argument become exact: the compact
//! subsets are taken equal to the sets they approximate, continuous
//! extensions are arbitrary, and the Urysohn function is an indicator. The
//! norm-attaining approximant of the restricted operator is the operator
//! itself, evaluated at a polytorus maximizer. Each of these budgets is kept
//! in the certificate as a zero-valued term.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::cmodulus::{parameter_pack, DeltaProfile, ParameterPack};
use crate::coperator::{
    adjoint_measure, apply, op_norm, op_norm_with_hints, project_columns, CKOperator, OracleConfig,
};
use crate::cspace::{norming_functional, phase, truncate_disc, ComplexScalar, ComplexVec};
use crate::error::{Error, Result};
use crate::measures::{polar_decompose, variation_on, PointSet};

/// Default absolute tolerance for certificate comparisons.
pub const CERT_TOL: f64 = 1e-9;

/// Labels of the proof inequalities, in the order they are recorded.
pub const PROOF_LABELS: &[&str] = &[
    "y1-T-f0",
    "f0-g1",
    "mu1-A",
    "mu1-com-B",
    "mu1-B",
    "TPB-gate",
    "TPB-premise",
    "T-TPB",
    "norma-tilde-S-2:lower",
    "norma-tilde-S-2",
    "norma-tilde-S-2:upper",
    "1-norma-tilde-S",
    "S1-h1",
    "mu-2-h1",
    "y1-T-h1-real",
    "y2-T-g1",
    "mu2-g1",
    "mu2-B-C",
    "g1-g2-h1-g2-C",
    "h1-f0-h2-g2-g1-f0",
    "mu2-C-K1",
    "mu2-K1",
    "K1-chain",
    "R2-PK1-gate",
    "R2-K1",
    "T2-B-K1",
    "R2-h2",
    "h2-h1-V",
    "h2-f0",
    "f2-f0",
    "f3-f2-f0",
    "f3-f0",
    "S1-R",
    "S-norm",
    "S-attains",
    "S-T-chain",
    "final-chain",
    "S-T",
];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Relation {
    #[serde(rename = "<")]
    Lt,
    #[serde(rename = "<=")]
    Le,
}

impl Relation {
    /// `<` needs strictly positive slack; `≤` tolerates `−tol`.
    pub fn holds(self, slack: f64, tol: f64) -> bool {
        match self {
            Relation::Lt => slack > 0.0,
            Relation::Le => slack >= -tol,
        }
    }
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Relation::Lt => "<",
            Relation::Le => "<=",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CertificateEntry {
    pub label: String,
    pub lhs: f64,
    pub rhs: f64,
    pub relation: Relation,
    pub slack: f64,
    pub holds: bool,
    /// False in relaxed mode for every entry that depends on the hypothesis.
    pub guaranteed: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CertificateMeta {
    pub epsilon: f64,
    pub seed: u64,
    pub profile: String,
    /// `strict` or `relaxed`.
    pub mode: String,
    pub tol: f64,
    pub relaxed_eta: Option<f64>,
    pub constants: ParameterPack,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CertificateOutputs {
    #[serde(rename = "S")]
    pub s: CKOperator,
    pub f3: ComplexVec,
    pub dist_op: f64,
    pub dist_fn: f64,
    #[serde(rename = "norm_S")]
    pub norm_s: f64,
    pub attained_value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub meta: CertificateMeta,
    pub entries: Vec<CertificateEntry>,
    /// Absent when the construction stopped early.
    pub outputs: Option<CertificateOutputs>,
    /// `max(0, ‖S‖_oracle − ‖S f3‖)`: positive means the polytorus ascent
    /// found a better point for `S` than `f3`.
    pub oracle_gap: f64,
}

impl Certificate {
    pub fn entry(&self, label: &str) -> Option<&CertificateEntry> {
        self.entries.iter().find(|e| e.label == label)
    }

    pub fn all_hold(&self) -> bool {
        self.entries.iter().all(|e| e.holds)
    }

    pub fn min_slack(&self) -> Option<f64> {
        self.entries.iter().map(|e| e.slack).reduce(f64::min)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EntryVerdict {
    pub label: String,
    pub slack: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct VerificationReport {
    pub entries: Vec<EntryVerdict>,
    pub all_pass: bool,
}

/// Re-evaluates every entry of `cert` at `tol`.
pub fn verify_certificate(cert: &Certificate, tol: f64) -> VerificationReport {
    let entries: Vec<EntryVerdict> = cert
        .entries
        .iter()
        .map(|e| {
            let slack = e.rhs - e.lhs;
            EntryVerdict {
                label: e.label.clone(),
                slack,
                pass: e.relation.holds(slack, tol),
            }
        })
        .collect();
    let all_pass = entries.iter().all(|e| e.pass);
    VerificationReport { entries, all_pass }
}

/// Premise and conclusion of the tail lemma for one `(T, A, ε)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TailReport {
    /// `‖T P_A‖ > 1 − δ(ε)/(1+δ(ε))`.
    pub applicable: bool,
    pub premise_norm: f64,
    pub threshold: f64,
    /// `‖T (I − P_A)‖`.
    pub tail_norm: f64,
    pub bound: f64,
}

/// Evaluates the tail lemma: if `‖T P_A‖ > 1 − δ(ε)/(1+δ(ε))` for a unit
/// `T`, then `‖T(I − P_A)‖ ≤ ε`. Never errors; `applicable` reports whether
/// the premise held.
pub fn tail_bound_check(
    t: &CKOperator,
    a: &PointSet,
    eps: f64,
    profile: &DeltaProfile,
    oracle: &OracleConfig,
) -> TailReport {
    let d = profile.evaluate(eps);
    let threshold = 1.0 - d / (1.0 + d);
    let premise_norm = op_norm(&project_columns(t, a), oracle).value;
    let tail_norm = op_norm(&project_columns(t, &a.complement()), oracle).value;
    TailReport {
        applicable: premise_norm > threshold,
        premise_norm,
        threshold,
        tail_norm,
        bound: eps,
    }
}

#[derive(Clone, Debug)]
pub struct CorrectionConfig {
    pub oracle: OracleConfig,
    pub tol: f64,
    /// When set, the hypothesis gate becomes `‖T f0‖ > 1 − relaxed_eta`.
    pub relaxed_eta: Option<f64>,
    pub profile: DeltaProfile,
    pub seed: u64,
}

impl CorrectionConfig {
    pub fn new(profile: DeltaProfile) -> Self {
        CorrectionConfig {
            oracle: OracleConfig::default(),
            tol: CERT_TOL,
            relaxed_eta: None,
            profile,
            seed: OracleConfig::default().seed,
        }
    }
}

/// Intermediate objects of one run, exposed for inspection.
#[derive(Clone, Debug)]
pub struct Trace {
    pub pack: ParameterPack,
    pub y1: ComplexVec,
    pub g1: ComplexVec,
    pub a: PointSet,
    pub b: PointSet,
    pub s_tilde: CKOperator,
    pub h1: ComplexVec,
    pub y2: ComplexVec,
    pub r2: CKOperator,
    pub g2: ComplexVec,
    pub c: PointSet,
    pub k1: PointSet,
    pub t0: usize,
    pub h2: ComplexVec,
    pub h3: ComplexVec,
    pub v: PointSet,
    pub f2: ComplexVec,
    pub g: PointSet,
}

#[derive(Clone, Debug)]
pub struct Correction {
    pub s_op: CKOperator,
    pub f3: ComplexVec,
    pub certificate: Certificate,
    pub trace: Trace,
}

struct Recorder {
    entries: Vec<CertificateEntry>,
    tol: f64,
    relaxed: bool,
}

impl Recorder {
    fn push(&mut self, label: &str, lhs: f64, rhs: f64, relation: Relation, constant_only: bool) {
        let slack = rhs - lhs;
        self.entries.push(CertificateEntry {
            label: label.to_string(),
            lhs,
            rhs,
            relation,
            slack,
            holds: relation.holds(slack, self.tol),
            guaranteed: constant_only || !self.relaxed,
        });
    }

    /// Gaps of order `η` can sit below one ulp of 1, so entries of the form
    /// `1 − O(η) < x` are recorded as tolerance-gated `≤`.
    fn le(&mut self, label: &str, lhs: f64, rhs: f64) {
        self.push(label, lhs, rhs, Relation::Le, false);
    }

    fn lt(&mut self, label: &str, lhs: f64, rhs: f64) {
        self.push(label, lhs, rhs, Relation::Lt, false);
    }

    fn constant(&mut self, label: &str, lhs: f64, rhs: f64, relation: Relation) {
        self.push(label, lhs, rhs, relation, true);
    }
}

fn sup_on(v: &ComplexVec, set: &PointSet, f: impl Fn(usize) -> f64) -> f64 {
    debug_assert_eq!(v.len(), set.universe());
    set.members().iter().fold(0.0, |m, &j| m.max(f(j)))
}

/// Runs the correction. See the module docs for the overall shape.
pub fn bpb_correct(
    t: &CKOperator,
    f0: &ComplexVec,
    eps: f64,
    cfg: &CorrectionConfig,
) -> Result<Correction> {
    let n = t.n();
    let space = *t.range();
    let tol = cfg.tol;
    if f0.len() != n {
        return Err(Error::Dimension {
            expected: n,
            found: f0.len(),
        });
    }
    if !space.p.is_finite() {
        return Err(Error::Domain(
            "the range space must have p < inf (l_inf is not C-uniformly convex)".into(),
        ));
    }
    if *cfg.profile.space() != space {
        return Err(Error::InvalidConfig(format!(
            "delta profile is for {}, operator maps into {space}",
            cfg.profile.space()
        )));
    }

    // Constants.
    let pack = parameter_pack(eps, &cfg.profile)?;
    let ParameterPack {
        eta,
        s,
        beta,
        eps1,
        tail_threshold,
        ..
    } = pack;
    if let Some(relaxed) = cfg.relaxed_eta {
        if !(relaxed >= eta) || relaxed >= 1.0 {
            return Err(Error::InvalidConfig(format!(
                "relaxed_eta = {relaxed} must lie in [eta, 1) with eta = {eta:e}"
            )));
        }
    }
    let oracle = OracleConfig {
        seed: cfg.seed,
        ..cfg.oracle
    };

    // Preconditions and the hypothesis gate.
    let t_norm = op_norm(t, &oracle).value;
    if (t_norm - 1.0).abs() > tol {
        return Err(Error::Domain(format!(
            "operator must have unit norm, oracle reports {t_norm}"
        )));
    }
    if (f0.sup_norm() - 1.0).abs() > tol {
        return Err(Error::Domain(format!(
            "f0 must have unit sup-norm, got {}",
            f0.sup_norm()
        )));
    }
    let tf0 = apply(t, f0)?;
    let tf0_norm = space.norm_of(tf0.as_slice());
    let gate = 1.0 - cfg.relaxed_eta.unwrap_or(s);
    if !(tf0_norm > gate - tol) {
        return Err(Error::HypothesisNotMet {
            value: tf0_norm,
            gate,
        });
    }

    let mut rec = Recorder {
        entries: Vec::with_capacity(PROOF_LABELS.len()),
        tol,
        relaxed: cfg.relaxed_eta.is_some(),
    };
    let meta = CertificateMeta {
        epsilon: eps,
        seed: cfg.seed,
        profile: cfg.profile.spec().to_string(),
        mode: if cfg.relaxed_eta.is_some() {
            "relaxed"
        } else {
            "strict"
        }
        .into(),
        tol,
        relaxed_eta: cfg.relaxed_eta,
        constants: pack,
    };
    let sqrt_2beta = (2.0 * beta).sqrt();

    // y1* norms T f0; μ1 = T*(y1*) = g1 |μ1|.
    let y1 = norming_functional(&tf0, &space)?;
    let y1_tf0 = y1.pair(&tf0)?;
    rec.le("y1-T-f0", 1.0 - s, y1_tf0.re);
    let mu1 = adjoint_measure(t, &y1)?;
    let g1 = polar_decompose(&mu1).phase;
    let g1_bar = g1.conj();

    let a = PointSet::filter(n, |j| (f0[j] * g1[j]).re > 1.0 - beta);
    rec.le(
        "f0-g1",
        sup_on(f0, &a, |j| (f0[j] - g1_bar[j]).norm()),
        sqrt_2beta,
    );
    rec.le("mu1-A", variation_on(&mu1, &a.complement())?, s / beta);

    // B = A: the set is already compact and g1 continuous on it.
    let b = a.clone();
    let mu1_b = variation_on(&mu1, &b)?;
    rec.le(
        "mu1-com-B",
        variation_on(&mu1, &b.complement())?,
        s / beta + eps * eta / 2.0,
    );
    rec.le("mu1-B", 1.0 - eta, mu1_b);

    let head = tail_bound_check(t, &b, eps / 9.0, &cfg.profile, &oracle);
    rec.le("TPB-gate", 1.0 - eta, head.premise_norm);
    rec.lt("TPB-premise", 1.0 - tail_threshold, head.premise_norm);
    rec.le("T-TPB", head.tail_norm, eps / 9.0);

    // S̃ = T P_B + ε1 · (y1* ∘ T P_B) ⊗ T(ḡ1 χ_B).
    let tpb = project_columns(t, &b);
    let g1_bar_b = g1_bar.mul(&b.indicator());
    let w = apply(t, &g1_bar_b)?;
    let coeffs = ComplexVec::from_raw(
        (0..n)
            .map(|j| {
                if b.contains(j) {
                    mu1.mass(j) * eps1
                } else {
                    ComplexScalar::new(0.0, 0.0)
                }
            })
            .collect(),
    );
    let s_tilde = tpb.add_rank_one(&coeffs, &w)?;
    let hint = ComplexVec::from_raw(
        (0..n)
            .map(|j| {
                if b.contains(j) {
                    g1_bar[j]
                } else {
                    ComplexScalar::new(1.0, 0.0)
                }
            })
            .collect(),
    );
    let st = op_norm_with_hints(&s_tilde, &oracle, &[hint]);
    if !st.converged {
        return Err(Error::OracleNotConverged {
            sweeps: st.iterations,
        });
    }
    let st_norm = st.value;
    let st_lower = 1.0 - eta + eps1 * (1.0 - eta) * (1.0 - eta);
    rec.constant("norma-tilde-S-2:lower", 1.0, st_lower, Relation::Le);
    rec.le("norma-tilde-S-2", st_lower, st_norm);
    rec.le("norma-tilde-S-2:upper", st_norm, 1.0 + eps1);
    rec.le("1-norma-tilde-S", (1.0 - st_norm).abs(), eps1);

    // S2 = S1 = S̃ on C(B), attaining its norm at the polytorus point h1.
    let s2 = s_tilde.clone();
    rec.lt("S1-h1", 0.0, eps * eta / 2.0);
    let mut h1 = ComplexVec::from_raw(
        (0..n)
            .map(|j| {
                if b.contains(j) {
                    st.maximizer[j]
                } else {
                    ComplexScalar::new(1.0, 0.0)
                }
            })
            .collect(),
    );
    let mut y2 = norming_functional(&apply(&s2, &h1)?, &space)?;
    // Rotate so that y1*(T(h1 χ_B)) ≥ 0 while keeping y2*(S2 h1) = ‖S2‖.
    let h1_b = h1.mul(&b.indicator());
    let omega = phase(y1.pair(&apply(t, &h1_b)?)?).conj();
    h1 = h1.scale(omega);
    y2 = y2.scale(omega.conj());
    let y2_s2h1 = y2.pair(&apply(&s2, &h1)?)?;
    rec.le("mu-2-h1", (y2_s2h1 - st_norm).norm(), 0.0);
    let rotated = y1.pair(&apply(t, &h1.mul(&b.indicator()))?)?;
    rec.le(
        "y1-T-h1-real",
        rotated.im.abs() + (-rotated.re).max(0.0),
        0.0,
    );
    let y2_w = y2.pair(&w)?;
    let y2_bound = (1.0 - eta).powi(2) - eta * (2.0 + eps) / (2.0 * eps1);
    rec.le("y2-T-g1", y2_bound, y2_w.re);

    // R2 = S2/‖S2‖, μ2 = R2*(y2*) = g2 |μ2| (zero mass off B).
    let r2 = s2.scale(ComplexScalar::new(1.0 / st_norm, 0.0));
    let mu2 = adjoint_measure(&r2, &y2)?;
    let g2 = polar_decompose(&mu2).phase;
    let mu2_g1 = y2.pair(&apply(&r2, &g1_bar_b)?)?;
    let chain = 6.0 * eta + 2.0 * eta / eps1 + eps * eta;
    rec.le("mu2-g1", 1.0 - chain, mu2_g1.re);

    let c = PointSet::filter(n, |j| {
        b.contains(j) && ((g1_bar[j] + h1[j]) * g2[j]).re > 2.0 - beta
    });
    rec.le("mu2-B-C", variation_on(&mu2, &b.minus(&c))?, chain / beta);
    let g_diff = sup_on(&g1, &c, |j| {
        (g1[j] - g2[j]).norm().max((h1[j] - g2[j].conj()).norm())
    });
    rec.le("g1-g2-h1-g2-C", g_diff, sqrt_2beta);
    rec.le(
        "h1-f0-h2-g2-g1-f0",
        h1.sup_dist_on(f0, c.members()),
        eps / 4.0,
    );

    let partial = |entries: Vec<CertificateEntry>| Certificate {
        meta: meta.clone(),
        entries,
        outputs: None,
        oracle_gap: 0.0,
    };
    if c.is_empty() {
        return Err(Error::EmptySet {
            which: "C",
            certificate: Box::new(partial(rec.entries)),
        });
    }

    // K1 = C: already compact.
    let k1 = c.clone();
    rec.lt(
        "mu2-C-K1",
        variation_on(&mu2, &c.minus(&k1))?,
        eta * eps / 2.0,
    );
    let k1_floor = 1.0 - 2.0 * chain / beta - eta * eps / 2.0;
    rec.le("mu2-K1", k1_floor, variation_on(&mu2, &k1)?);
    rec.constant("K1-chain", 1.0 - tail_threshold, k1_floor, Relation::Lt);
    let tail = tail_bound_check(&r2, &k1, eps / 9.0, &cfg.profile, &oracle);
    rec.lt("R2-PK1-gate", 1.0 - tail_threshold, tail.premise_norm);
    rec.le("R2-K1", tail.tail_norm, eps / 9.0);
    // T2 = R2 composed with restriction to B; columns already vanish off B.
    let t2 = &r2;
    let t2_tail = op_norm(&project_columns(t2, &b.minus(&k1)), &oracle).value;
    rec.le("T2-B-K1", t2_tail, eps / 9.0);

    // t0 carries the largest |μ2| mass in K1; v is its indicator.
    let t0 = k1
        .members()
        .iter()
        .copied()
        .fold(None::<usize>, |best, j| match best {
            Some(i) if mu2.mass(i).norm() >= mu2.mass(j).norm() => Some(i),
            _ => Some(j),
        })
        .expect("K1 is nonempty");
    let v = PointSet::filter(n, |j| b.contains(j) && h1[j].norm() > 1.0 - eps / 2.0);
    let bump = |sign: f64| {
        ComplexVec::from_raw(
            (0..n)
                .map(|j| {
                    let vj = if j == t0 { 1.0 } else { 0.0 };
                    let r = h1[j].norm();
                    h1[j] + sign * vj * (1.0 - r) * (h1[j] / r)
                })
                .collect(),
        )
    };
    let h2 = bump(1.0);
    let h3 = bump(-1.0);
    let h2_b = h2.mul(&b.indicator());
    let r2_h2 = space.norm_of(apply(&r2, &h2_b)?.as_slice());
    rec.le(
        "R2-h2",
        (r2_h2 - 1.0).abs().max((h2[t0].norm() - 1.0).abs()),
        0.0,
    );
    rec.lt("h2-h1-V", h2.sup_dist_on(&h1, v.members()), eps / 2.0);
    rec.le("h2-f0", h2.sup_dist_on(f0, c.members()), 3.0 * eps / 4.0);

    // f2 extends h2 from B by f0, truncated to the disc; u = χ_{K1}.
    let f2 = truncate_disc(&ComplexVec::from_raw(
        (0..n)
            .map(|j| if b.contains(j) { h2[j] } else { f0[j] })
            .collect(),
    ));
    let near = PointSet::filter(n, |j| (f2[j] - f0[j]).norm() < 7.0 * eps / 8.0);
    let g = k1.union(&near);
    rec.lt("f2-f0", f2.sup_dist_on(f0, g.members()), 7.0 * eps / 8.0);
    let f3 = ComplexVec::from_raw(
        (0..n)
            .map(|j| if k1.contains(j) { f2[j] } else { f0[j] })
            .collect(),
    );
    rec.le(
        "f3-f2-f0",
        f3.sup_dist_on(&h2, k1.members())
            .max(f3.sup_dist_on(f0, k1.complement().members())),
        0.0,
    );
    let dist_fn = f3.sub(f0).sup_norm();
    rec.lt("f3-f0", dist_fn, eps);

    // S f = R2(f χ_{K1}) + λ0 f(t0) R2(h2 χ_{B∖K1}).
    let lambda0 = h2[t0].conj();
    let tail_image = apply(&r2, &h2.mul(&b.minus(&k1).indicator()))?;
    let mut at_t0 = ComplexVec::zeros(n);
    at_t0[t0] = lambda0;
    let s_op = project_columns(&r2, &k1).add_rank_one(&at_t0, &tail_image)?;

    let attained = space.norm_of(apply(&s_op, &f3)?.as_slice());
    let norm_s = op_norm_with_hints(&s_op, &oracle, std::slice::from_ref(&f3)).value;
    let dist_op = op_norm(&s_op.sub(t)?, &oracle).value;
    let s1_r = op_norm(&s_tilde.sub(&tpb)?, &oracle).value;
    let budget = 2.0 * eps1 + eta * eps / 2.0 + eps / 3.0;
    rec.le("S1-R", s1_r, eps1);
    rec.le("S-norm", (norm_s - 1.0).abs(), 0.0);
    rec.le("S-attains", norm_s, attained);
    rec.le("S-T-chain", dist_op, budget);
    rec.constant("final-chain", budget, eps, Relation::Lt);
    rec.lt("S-T", dist_op, eps);

    let certificate = Certificate {
        meta,
        entries: rec.entries,
        outputs: Some(CertificateOutputs {
            s: s_op.clone(),
            f3: f3.clone(),
            dist_op,
            dist_fn,
            norm_s,
            attained_value: attained,
        }),
        oracle_gap: (norm_s - attained).max(0.0),
    };
    Ok(Correction {
        s_op,
        f3,
        certificate,
        trace: Trace {
            pack,
            y1,
            g1,
            a,
            b,
            s_tilde,
            h1,
            y2,
            r2,
            g2,
            c,
            k1,
            t0,
            h2,
            h3,
            v,
            f2,
            g,
        },
    })
}
