//! Sampled verification of identities, inequalities and conjectures.
//!
//! Every claim is reduced to a list of checks `lhs REL rhs`. A report
//! records the checks that fail, the largest excess over the claimed
//! relation (`lhs - rhs` for inequalities, `|lhs - rhs|` for identities;
//! negative means every inequality held with room to spare), and a verdict.

use serde::Serialize;

use crate::catalog;
use crate::deriv::{fd_partial2, fd_partial3};
use crate::error::{MeanError, Result};
use crate::exec::{map_ordered, Execution};
use crate::mean::{conjugate2, conjugate3, Conjugator, Mean2, Mean3};
use crate::sampling::{self, GENERATOR};
use crate::special::{min_relative_gap, STOLARSKY_GUARD_GAP};
use crate::type1::{check_type1, construct_invariant, construct_invariant_unchecked, ToleranceConfig};
use crate::type2::check_type2;

pub const ARTIFACT_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Tolerance of identity claims between closed-form means.
pub const CLOSED_FORM_TOL: f64 = 1e-12;
/// Tolerance of identity claims involving an iterated mean.
pub const ITERATED_TOL: f64 = 1e-10;
/// A strict sign claim needs `|gap|` above this.
pub const SIGN_MARGIN: f64 = 1e-6;
/// Finite-difference tolerance for identities up to second order.
pub const FD_TOL_LOW: f64 = 1e-5;
/// Finite-difference tolerance for third- and fourth-order identities.
pub const FD_TOL_HIGH: f64 = 1e-3;
/// Exactness required of the linear demo pair.
pub const DEMO_EXACT_TOL: f64 = 1e-14;

#[derive(Debug, Clone, PartialEq)]
pub struct ScanConfig {
    pub lo: f64,
    pub hi: f64,
    pub samples: usize,
    pub seed: u64,
    /// Slack allowed on inequality checks, relative to `max(1, |rhs|)`.
    pub tolerance: f64,
    pub execution: Execution,
}

impl Default for ScanConfig {
    fn default() -> Self {
        ScanConfig {
            lo: 0.1,
            hi: 10.0,
            samples: 10_000,
            seed: 1,
            tolerance: ITERATED_TOL,
            execution: Execution::default(),
        }
    }
}

impl ScanConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.lo > 0.0) || !(self.hi >= self.lo) || !self.hi.is_finite() {
            return Err(MeanError::InvalidParameter(format!(
                "bad box [{}, {}]",
                self.lo, self.hi
            )));
        }
        if self.samples == 0 {
            return Err(MeanError::InvalidParameter("samples must be at least 1".into()));
        }
        if !(self.tolerance >= 0.0) || !self.tolerance.is_finite() {
            return Err(MeanError::InvalidParameter(format!("bad tolerance {}", self.tolerance)));
        }
        Ok(())
    }

    fn echo(&self) -> ConfigEcho {
        ConfigEcho {
            r#box: [self.lo, self.hi],
            samples: self.samples,
            seed: self.seed,
            tolerance: self.tolerance,
            generator: GENERATOR.to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConfigEcho {
    pub r#box: [f64; 2],
    pub samples: usize,
    pub seed: u64,
    pub tolerance: f64,
    pub generator: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    pub relation: String,
    pub point: Vec<f64>,
    pub lhs: f64,
    pub rhs: f64,
    pub gap: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Verdict {
    #[serde(rename = "pass")]
    Pass,
    #[serde(rename = "fail")]
    Fail,
    #[serde(rename = "evidence-only")]
    EvidenceOnly,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
            Verdict::EvidenceOnly => "evidence-only",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanReport {
    pub claim: String,
    pub config: ConfigEcho,
    pub samples_tested: usize,
    pub excluded_near_diagonal: usize,
    pub violations: Vec<Violation>,
    /// `None` when every sample was excluded.
    pub max_residual: Option<f64>,
    pub verdict: Verdict,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
    pub artifact_version: String,
}

impl ScanReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report is plain data") + "\n"
    }

    /// One row per violation, then a summary row.
    pub fn to_csv(&self) -> String {
        let num = |x: f64| format!("{x:.16e}");
        let mut out = String::from("kind,label,point,lhs,rhs,gap,verdict\n");
        for v in &self.violations {
            let point: Vec<String> = v.point.iter().map(|&x| num(x)).collect();
            out += &format!(
                "violation,{},{},{},{},{},\n",
                v.relation,
                point.join(";"),
                num(v.lhs),
                num(v.rhs),
                num(v.gap)
            );
        }
        out += &format!(
            "summary,{},samples={};excluded={},,,{},{}\n",
            self.claim,
            self.samples_tested,
            self.excluded_near_diagonal,
            self.max_residual.map(num).unwrap_or_default(),
            self.verdict.as_str()
        );
        out
    }
}

#[derive(Debug, Clone, Copy)]
enum Rel {
    /// `lhs <= rhs` up to `tol * max(1, |rhs|)`.
    Le(f64),
    /// `lhs < rhs` by more than the margin.
    Lt(f64),
    /// `|lhs - rhs| <= tol * scale`.
    Eq { tol: f64, scale: f64 },
}

#[derive(Debug, Clone)]
struct Check {
    relation: String,
    point: Vec<f64>,
    lhs: f64,
    rhs: f64,
    rel: Rel,
}

impl Check {
    fn new(relation: impl Into<String>, point: &[f64], lhs: f64, rhs: f64, rel: Rel) -> Self {
        Check {
            relation: relation.into(),
            point: point.to_vec(),
            lhs,
            rhs,
            rel,
        }
    }

    fn excess(&self) -> f64 {
        match self.rel {
            Rel::Le(_) | Rel::Lt(_) => self.lhs - self.rhs,
            Rel::Eq { .. } => (self.lhs - self.rhs).abs(),
        }
    }

    fn violated(&self) -> bool {
        let gap = self.lhs - self.rhs;
        match self.rel {
            Rel::Le(tol) => gap > tol * self.rhs.abs().max(1.0),
            Rel::Lt(margin) => gap >= -margin,
            Rel::Eq { tol, scale } => !(gap.abs() <= tol * scale),
        }
    }
}

/// Collects per-sample results in sample order; the first error wins.
fn assemble(
    claim: &str,
    cfg: &ScanConfig,
    results: Vec<Result<Option<Vec<Check>>>>,
    conjecture: bool,
    notes: Vec<String>,
) -> Result<ScanReport> {
    let mut tested = 0;
    let mut excluded = 0;
    let mut violations = Vec::new();
    let mut max_residual: Option<f64> = None;
    for r in results {
        let Some(checks) = r? else {
            excluded += 1;
            continue;
        };
        tested += 1;
        for c in checks {
            let e = c.excess();
            max_residual = Some(max_residual.map_or(e, |m| m.max(e)));
            if c.violated() {
                violations.push(Violation {
                    relation: c.relation,
                    point: c.point,
                    lhs: c.lhs,
                    rhs: c.rhs,
                    gap: c.lhs - c.rhs,
                });
            }
        }
    }
    let verdict = match (violations.is_empty(), conjecture) {
        (false, _) => Verdict::Fail,
        (true, true) => Verdict::EvidenceOnly,
        (true, false) => Verdict::Pass,
    };
    Ok(ScanReport {
        claim: claim.to_string(),
        config: cfg.echo(),
        samples_tested: tested,
        excluded_near_diagonal: excluded,
        violations,
        max_residual,
        verdict,
        notes,
        artifact_version: ARTIFACT_VERSION.to_string(),
    })
}

fn guard_excludes(p: [f64; 3]) -> bool {
    min_relative_gap(p) < STOLARSKY_GUARD_GAP
}

/// `U0 <= L3 <= U1` on sampled triples.
pub fn conjecture1_scan(cfg: &ScanConfig) -> Result<ScanReport> {
    cfg.validate()?;
    let l3 = catalog::mean3("L3")?;
    let (u0, u1) = (catalog::stolarsky_u0(), catalog::stolarsky_u1());
    let points = sampling::triples(cfg.seed, cfg.lo, cfg.hi, cfg.samples);
    let tol = cfg.tolerance;
    let results = map_ordered(cfg.execution, &points, |&p| {
        if guard_excludes(p) {
            return Ok(None);
        }
        let (lo, mid, hi) = (u0.eval_at(p)?, l3.eval_at(p)?, u1.eval_at(p)?);
        Ok(Some(vec![
            Check::new("U0 <= L3", &p, lo, mid, Rel::Le(tol)),
            Check::new("L3 <= U1", &p, mid, hi, Rel::Le(tol)),
        ]))
    });
    assemble("conj1", cfg, results, true, vec![])
}

/// `U0(phi(p)) >= U0(p)` and `U1(phi(p)) <= U1(p)`, where
/// `phi(a,b,c) = (L(a,c), L(a,b), L(c,b))`.
pub fn conjecture2_scan(cfg: &ScanConfig) -> Result<ScanReport> {
    cfg.validate()?;
    let l = catalog::logarithmic();
    let (u0, u1) = (catalog::stolarsky_u0(), catalog::stolarsky_u1());
    let points = sampling::triples(cfg.seed, cfg.lo, cfg.hi, cfg.samples);
    let tol = cfg.tolerance;
    let results = map_ordered(cfg.execution, &points, |&p| {
        if guard_excludes(p) {
            return Ok(None);
        }
        let [a, b, c] = p;
        let q = [l.eval(a, c)?, l.eval(a, b)?, l.eval(c, b)?];
        Ok(Some(vec![
            Check::new("U0(p) <= U0(phi p)", &p, u0.eval_at(p)?, u0.eval_at(q)?, Rel::Le(tol)),
            Check::new("U1(phi p) <= U1(p)", &p, u1.eval_at(q)?, u1.eval_at(p)?, Rel::Le(tol)),
        ]))
    });
    let note = "phi-orbits stay inside the box, so if both inequalities hold on the whole box, \
                iterating them gives U0 <= L3 <= U1 there (conj1); a scan is evidence, not proof";
    assemble("conj2", cfg, results, true, vec![note.to_string()])
}

/// The invariant mean of `lh_2` against `LH_2`: below at `(1,2,3)`,
/// above at `(1,2,4)`.
pub fn lehmer_noncomparability(cfg: &ScanConfig) -> Result<ScanReport> {
    let tol = ToleranceConfig::default();
    let m = construct_invariant_unchecked(&catalog::lehmer2(2.0)?, &tol)?;
    let lh = catalog::lehmer3(2.0)?;
    let p = [1.0, 2.0, 3.0];
    let q = [1.0, 2.0, 4.0];
    let results = vec![
        Ok(Some(vec![Check::new(
            "inv:lh:2 < LH:2",
            &p,
            m.eval_at(p)?,
            lh.eval_at(p)?,
            Rel::Lt(SIGN_MARGIN),
        )])),
        Ok(Some(vec![Check::new(
            "LH:2 < inv:lh:2",
            &q,
            lh.eval_at(q)?,
            m.eval_at(q)?,
            Rel::Lt(SIGN_MARGIN),
        )])),
    ];
    assemble("lehmer", cfg, results, false, vec![])
}

/// Catalog means used by the default diagonal suite: every smooth entry
/// of each arity, plus invariant means built by iteration.
pub fn default_diagonal_targets() -> Result<(Vec<Mean2>, Vec<Mean3>)> {
    let two = ["A2", "G2", "H2", "L", "A12", "Ap:1/3", "Ap:2", "lh:2", "lh:3"]
        .iter()
        .map(|id| catalog::mean2(id))
        .collect::<Result<Vec<_>>>()?;
    let three = [
        "A3", "G3", "H3", "Qroot", "A12", "Ap:1/3", "LH:2", "LH:3", "L3", "inv:G2",
    ]
    .iter()
    .map(|id| catalog::mean3(id))
    .collect::<Result<Vec<_>>>()?;
    Ok((two, three))
}

/// Diagonal points of the suite.
pub const DIAGONAL_POINTS: [f64; 3] = [0.5, 1.0, 3.0];

fn fd_tol(order: usize) -> f64 {
    if order <= 2 {
        FD_TOL_LOW
    } else {
        FD_TOL_HIGH
    }
}

fn identity(name: String, point: &[f64], lhs: f64, rhs: f64, terms: &[f64], order: usize) -> Check {
    let scale = terms.iter().map(|t| t.abs()).sum::<f64>().max(1.0);
    Check::new(
        name,
        point,
        lhs,
        rhs,
        Rel::Eq {
            tol: fd_tol(order),
            scale,
        },
    )
}

fn identities2(m: &Mean2, a: f64) -> Result<Vec<Check>> {
    let q = [a, a];
    let d = |o: [usize; 2]| fd_partial2(m, o, q);
    let id = m.id();
    let (mx, my) = (d([1, 0])?, d([0, 1])?);
    let (mxx, mxy) = (d([2, 0])?, d([1, 1])?);
    let (mxxx, mxxy) = (d([3, 0])?, d([2, 1])?);
    let mut out = vec![
        identity(format!("{id}: m_x = 1/2"), &q, mx, 0.5, &[mx], 1),
        identity(format!("{id}: m_y = 1/2"), &q, my, 0.5, &[my], 1),
        identity(format!("{id}: m_xy = -m_xx"), &q, mxy, -mxx, &[mxy, mxx], 2),
        identity(
            format!("{id}: 3 m_xxy = -m_xxx"),
            &q,
            3.0 * mxxy,
            -mxxx,
            &[3.0 * mxxy, mxxx],
            3,
        ),
    ];
    if m.flags().homogeneous {
        // f(x) = m(a, x)
        let (f2, f3) = (d([0, 2])?, d([0, 3])?);
        out.push(identity(
            format!("{id}: f'''(a) = -3/(2a) f''(a)"),
            &q,
            f3,
            -1.5 / a * f2,
            &[f3, 1.5 / a * f2],
            3,
        ));
    }
    Ok(out)
}

fn identities3(m: &Mean3, a: f64) -> Result<Vec<Check>> {
    let q = [a, a, a];
    let d = |o: [usize; 3]| fd_partial3(m, o, q);
    let id = m.id();
    let (mx, my, mz) = (d([1, 0, 0])?, d([0, 1, 0])?, d([0, 0, 1])?);
    let (mxx, mxy) = (d([2, 0, 0])?, d([1, 1, 0])?);
    let (mxxx, mxxy, mxyz) = (d([3, 0, 0])?, d([2, 1, 0])?, d([1, 1, 1])?);
    let (m4, m31, m22, m211) = (d([4, 0, 0])?, d([3, 1, 0])?, d([2, 2, 0])?, d([2, 1, 1])?);
    let mut out = vec![
        identity(format!("{id}: M_x = 1/3"), &q, mx, 1.0 / 3.0, &[mx], 1),
        identity(format!("{id}: M_y = 1/3"), &q, my, 1.0 / 3.0, &[my], 1),
        identity(format!("{id}: M_z = 1/3"), &q, mz, 1.0 / 3.0, &[mz], 1),
        identity(
            format!("{id}: M_xy = -M_xx/2"),
            &q,
            mxy,
            -0.5 * mxx,
            &[mxy, mxx / 2.0],
            2,
        ),
        identity(
            format!("{id}: M_xyz = -(M_xxx + 6 M_xxy)/2"),
            &q,
            mxyz,
            -0.5 * (mxxx + 6.0 * mxxy),
            &[mxyz, mxxx / 2.0, 3.0 * mxxy],
            3,
        ),
        identity(
            format!("{id}: M_xxxx + 8 M_xxxy + 6 M_xxyy + 12 M_xxyz = 0"),
            &q,
            m4 + 8.0 * m31 + 6.0 * m22 + 12.0 * m211,
            0.0,
            &[m4, 8.0 * m31, 6.0 * m22, 12.0 * m211],
            4,
        ),
    ];
    if m.flags().homogeneous {
        out.extend([
            identity(
                format!("{id}: M_xx = -a (M_xxx + 2 M_xxy)"),
                &q,
                mxx,
                -a * (mxxx + 2.0 * mxxy),
                &[mxx, a * mxxx, 2.0 * a * mxxy],
                3,
            ),
            identity(
                format!("{id}: M_xxx = -a/2 (M_xxxx + 2 M_xxxy)"),
                &q,
                mxxx,
                -a / 2.0 * (m4 + 2.0 * m31),
                &[mxxx, a / 2.0 * m4, a * m31],
                4,
            ),
            identity(
                format!("{id}: M_xxy = -a/2 (M_xxyy + M_xxxy + M_xxyz)"),
                &q,
                mxxy,
                -a / 2.0 * (m22 + m31 + m211),
                &[mxxy, a / 2.0 * m22, a / 2.0 * m31, a / 2.0 * m211],
                4,
            ),
            identity(
                format!("{id}: M_xyz = -3a/2 M_xxyz"),
                &q,
                mxyz,
                -1.5 * a * m211,
                &[mxyz, 1.5 * a * m211],
                4,
            ),
        ]);
    }
    Ok(out)
}

/// Checks the diagonal derivative identities of every target by finite
/// differences at `(a, a)` and `(a, a, a)` for each `a` in
/// [`DIAGONAL_POINTS`]. Targets must be symmetric and smooth; the
/// homogeneity identities are added for homogeneous targets.
pub fn diagonal_identity_suite(cfg: &ScanConfig, two: &[Mean2], three: &[Mean3]) -> Result<ScanReport> {
    for m in two {
        require_smooth(m.id(), m.flags())?;
    }
    for m in three {
        require_smooth(m.id(), m.flags())?;
    }
    let mut jobs: Vec<(Option<&Mean2>, Option<&Mean3>, f64)> = Vec::new();
    for &a in &DIAGONAL_POINTS {
        jobs.extend(two.iter().map(|m| (Some(m), None, a)));
        jobs.extend(three.iter().map(|m| (None, Some(m), a)));
    }
    let results = map_ordered(cfg.execution, &jobs, |&(m2, m3, a)| match (m2, m3) {
        (Some(m), _) => identities2(m, a).map(Some),
        (_, Some(m)) => identities3(m, a).map(Some),
        _ => unreachable!(),
    });
    assemble("diagonal", cfg, results, false, vec![])
}

fn require_smooth(id: &str, flags: crate::mean::MeanFlags) -> Result<()> {
    let need = crate::mean::MeanFlags {
        symmetric: true,
        analytic: true,
        ..Default::default()
    };
    let missing = flags.missing(need);
    if missing.is_empty() {
        Ok(())
    } else {
        Err(MeanError::InvalidBaseMean {
            id: id.to_string(),
            missing: missing.join(", "),
        })
    }
}

/// Both invariances for the linear pair `m = 2a/3 + b/3`,
/// `M = 4a/7 + 2b/7 + c/7` (with the arguments of `M` in the order
/// `m(a,b), m(a,c), m(b,c)`), the failure of the symmetric-order
/// composition at `(1,2,3)`, and both invariances of the arithmetic pair
/// conjugated by `log`, `x^2` and `1/x`.
pub fn both_invariance_demo(cfg: &ScanConfig) -> Result<ScanReport> {
    cfg.validate()?;
    let m = catalog::weighted_arithmetic2(2.0 / 3.0)?;
    let big = catalog::weighted_arithmetic3(4.0 / 7.0, 2.0 / 7.0)?;
    let conj: Vec<(Mean2, Mean3)> = [Conjugator::log(), Conjugator::square(), Conjugator::reciprocal()]
        .iter()
        .map(|h| {
            (
                conjugate2(h, &catalog::arithmetic2()),
                conjugate3(h, &catalog::arithmetic3()),
            )
        })
        .collect();
    let points = sampling::triples(cfg.seed, cfg.lo, cfg.hi, cfg.samples);

    let exact = |rhs: f64| Rel::Eq {
        tol: DEMO_EXACT_TOL,
        scale: rhs.abs().max(1.0),
    };
    let conj_rel = |rhs: f64| Rel::Eq {
        tol: CLOSED_FORM_TOL,
        scale: rhs.abs().max(1.0),
    };
    let mut results = map_ordered(cfg.execution, &points, |&p| -> Result<Option<Vec<Check>>> {
        let [a, b, c] = p;
        let mab = m.eval(a, b)?;
        let t2 = big.eval(a, b, mab)?;
        let t1 = big.eval(mab, m.eval(a, c)?, m.eval(b, c)?)?;
        let direct = big.eval_at(p)?;
        let mut checks = vec![
            Check::new("M(a,b,m(a,b)) = m(a,b)", &p, t2, mab, exact(mab)),
            Check::new("M(m(a,b),m(a,c),m(b,c)) = M(a,b,c)", &p, t1, direct, exact(direct)),
        ];
        for (m2, m3) in &conj {
            let r1 = check_type1(m3, m2, p)?;
            let r2 = check_type2(m3, m2, a, b)?;
            let v3 = m3.eval_at(p)?;
            let v2 = m2.eval(a, b)?;
            checks.push(Check::new(
                format!("{}: type 1", m3.id()),
                &p,
                v3 + r1,
                v3,
                conj_rel(v3),
            ));
            checks.push(Check::new(
                format!("{}: type 2", m3.id()),
                &p,
                v2 + r2,
                v2,
                conj_rel(v2),
            ));
        }
        Ok(Some(checks))
    });

    // the symmetric-order composition must differ from M at (1,2,3)
    let p = [1.0, 2.0, 3.0];
    let sym = big.eval(m.eval(1.0, 3.0)?, m.eval(1.0, 2.0)?, m.eval(2.0, 3.0)?)?;
    let direct = big.eval_at(p)?;
    let (lo, hi) = if sym < direct { (sym, direct) } else { (direct, sym) };
    results.push(Ok(Some(vec![Check::new(
        "|M(m(a,c),m(a,b),m(b,c)) - M(a,b,c)| > 1e-3",
        &p,
        lo + 1e-3,
        hi,
        Rel::Lt(0.0),
    )])));
    assemble("both-demo", cfg, results, false, vec![])
}

/// Claims reachable from [`run_claim`].
pub const CLAIMS: &[&str] = &["conj1", "conj2", "lehmer", "diagonal", "both-demo"];

pub fn run_claim(claim: &str, cfg: &ScanConfig) -> Result<ScanReport> {
    match claim {
        "conj1" => conjecture1_scan(cfg),
        "conj2" => conjecture2_scan(cfg),
        "lehmer" => lehmer_noncomparability(cfg),
        "diagonal" => {
            let (two, three) = default_diagonal_targets()?;
            diagonal_identity_suite(cfg, &two, &three)
        }
        "both-demo" => both_invariance_demo(cfg),
        other => Err(MeanError::InvalidParameter(format!(
            "unknown claim {other:?}; expected one of {}",
            CLAIMS.join(", ")
        ))),
    }
}

/// Checks `construct_invariant(m)` against `m` on sampled triples.
pub fn type1_scan(claim: &str, big: &Mean3, m: &Mean2, cfg: &ScanConfig) -> Result<ScanReport> {
    cfg.validate()?;
    let tol = if big.is_iterated() {
        ITERATED_TOL
    } else {
        CLOSED_FORM_TOL
    };
    let points = sampling::triples(cfg.seed, cfg.lo, cfg.hi, cfg.samples);
    let results = map_ordered(cfg.execution, &points, |&p| {
        let v = big.eval_at(p)?;
        let r = check_type1(big, m, p)?;
        Ok(Some(vec![Check::new(
            format!("{}, {}: type 1", big.id(), m.id()),
            &p,
            v + r,
            v,
            Rel::Eq {
                tol,
                scale: v.abs().max(1.0),
            },
        )]))
    });
    assemble(claim, cfg, results, false, vec![])
}

/// Builds the invariant mean of `m` with default tolerances.
pub fn invariant_of(m: &Mean2) -> Result<Mean3> {
    construct_invariant(m, &ToleranceConfig::default())
}
