//! Run orchestration shared by the CLI and the acceptance suite: search
//! spaces, the full alignment pipeline and the JSON run report.

use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;
use serde_json::{json, Value};

use crate::alignment::{self, Alignment, Verdict, ALIGN_TOL};
use crate::entangle::{self, THEOREM_TOL};
use crate::error::{Error, Result};
use crate::frames;
use crate::heisenberg::ZaunerFlavor;
use crate::linalg::{c, identity};
use crate::mub;
use crate::numtheory::is_prime;
use crate::sic::{self, Fiducial, SearchSpace, SubspaceChoice, SIC_TOL};
use crate::symmetry::{self, SymmetryReport};

pub const SCHEMA_VERSION: u32 = 1;
/// Overrides the default alignment and theorem tolerance.
pub const TOLERANCE_ENV: &str = "SICTOWER_TOL";
/// Overrides the default SIC residual tolerance.
pub const SIC_TOLERANCE_ENV: &str = "SICTOWER_SIC_TOL";

#[derive(Clone, Copy, Debug, Serialize)]
pub struct Tolerances {
    pub sic: f64,
    pub align: f64,
    pub theorem: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { sic: SIC_TOL, align: ALIGN_TOL, theorem: THEOREM_TOL }
    }
}

/// The d with `d(d-2) = n`, if any.
pub fn tower_base(n: usize) -> Option<usize> {
    let d = 1 + ((n + 1) as f64).sqrt().round() as usize;
    (d >= 3 && d * (d - 2) == n).then_some(d)
}

/// Search space for `find`: everything, one Zauner eigenspace, or that
/// eigenspace intersected with the +1 eigenspace of `U_b` (odd d, N = d(d-2)).
pub fn search_space(n: usize, zauner: Option<SubspaceChoice>, fb_invariant: bool) -> Result<SearchSpace> {
    let Some(choice) = zauner else {
        if fb_invariant {
            return Err(Error::Invalid("the U_b restriction needs a Zauner subspace".into()));
        }
        return Ok(SearchSpace::Full);
    };
    let spaces = sic::zauner_project(n, ZaunerFlavor::Z)?;
    let space = choice.pick(&spaces).ok_or(Error::Dimension { dim: n, reason: "no Zauner subspace" })?;
    let which = match choice {
        SubspaceChoice::Largest => "largest",
        SubspaceChoice::Smallest => "smallest",
    };
    if !fb_invariant {
        return Ok(SearchSpace::Subspace {
            basis: space.basis.clone(),
            description: format!("{which} F_z eigenspace"),
        });
    }
    let d = tower_base(n)
        .filter(|d| d % 2 == 1 && *d >= 5)
        .ok_or_else(|| Error::Invalid(format!("U_b restriction needs N = d(d-2) with odd d >= 5, got N = {n}")))?;
    let ub = sic::fb_unitary(d)?;
    let plus = (identity(n) + ub) * c(0.5, 0.0);
    let basis = sic::joint_subspace(&space.basis, &plus);
    if basis.ncols() == 0 {
        return Err(Error::Invalid(format!("{which} F_z eigenspace meets the U_b = +1 eigenspace trivially")));
    }
    Ok(SearchSpace::Subspace { basis, description: format!("{which} F_z eigenspace with U_b = +1") })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail,
    Skipped,
    Error,
}

#[derive(Clone, Debug, Serialize)]
pub struct Stage {
    pub name: &'static str,
    pub status: Status,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
    pub result: Value,
}

impl Stage {
    fn new(name: &'static str, pass: bool, result: impl Serialize) -> Self {
        let status = if pass { Status::Pass } else { Status::Fail };
        Self { name, status, note: None, result: to_value(result) }
    }

    fn skipped(name: &'static str, why: &str) -> Self {
        Self { name, status: Status::Skipped, note: Some(why.into()), result: Value::Null }
    }

    fn error(name: &'static str, e: &Error) -> Self {
        Self { name, status: Status::Error, note: Some(e.to_string()), result: Value::Null }
    }

    fn note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }
}

fn to_value(x: impl Serialize) -> Value {
    serde_json::to_value(x).expect("reports serialize to JSON")
}

/// Overall outcome of a run.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Success,
    Aligned,
    NotAligned,
    Inconclusive,
    NotSic,
    CheckFailed,
    InternalError,
}

impl Outcome {
    /// 0 success, 1 scientific negative, 3 internal error.
    pub fn exit_code(self) -> i32 {
        match self {
            Outcome::Success | Outcome::Aligned => 0,
            Outcome::InternalError => 3,
            _ => 1,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Input {
    pub role: &'static str,
    pub path: String,
    pub sha256: String,
    pub dim: usize,
    pub label: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct RunReport {
    pub schema_version: u32,
    pub tool_version: &'static str,
    pub command: String,
    pub timestamp_unix: u64,
    pub tolerances: Tolerances,
    pub inputs: Vec<Input>,
    pub stages: Vec<Stage>,
    pub outcome: Outcome,
}

impl RunReport {
    pub fn new(command: impl Into<String>, tolerances: Tolerances, inputs: Vec<Input>) -> Self {
        let timestamp_unix = SystemTime::now().duration_since(UNIX_EPOCH).map(|t| t.as_secs()).unwrap_or(0);
        Self {
            schema_version: SCHEMA_VERSION,
            tool_version: env!("CARGO_PKG_VERSION"),
            command: command.into(),
            timestamp_unix,
            tolerances,
            inputs,
            stages: Vec::new(),
            outcome: Outcome::Success,
        }
    }

    pub fn push(&mut self, stage: Stage) {
        self.stages.push(stage);
    }

    pub fn stage(&self, name: &str) -> Option<&Stage> {
        self.stages.iter().find(|s| s.name == name)
    }

    /// Errored stages override any outcome; failed stages override a positive one.
    pub fn finish(&mut self) {
        if self.stages.iter().any(|s| s.status == Status::Error) {
            self.outcome = Outcome::InternalError;
        } else if matches!(self.outcome, Outcome::Success | Outcome::Aligned)
            && self.stages.iter().any(|s| s.status == Status::Fail)
        {
            self.outcome = Outcome::CheckFailed;
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize to JSON")
    }
}

const EVEN_D: &str = "skipped: even d";
const NOT_ALIGNED: &str = "skipped: not aligned";

/// Verify both fiducials, centre the small one, align, then check the
/// theorems, frames, MUBs and symmetries an aligned pair carries.
/// Dimension mismatches are input errors; scientific negatives are recorded
/// in the report and its outcome.
pub fn run_align(
    small: &Fiducial,
    big: &Fiducial,
    tol: &Tolerances,
    report: &mut RunReport,
) -> Result<Option<Alignment>> {
    let d = small.dim;
    if d < 3 || big.dim != d * (d - 2) {
        return Err(Error::Invalid(format!("dimensions {} and {} are not related by N = d(d-2)", d, big.dim)));
    }
    let odd = d % 2 == 1;
    let (vs, vb) = rayon::join(|| sic::sic_verify_with(small, tol.sic), || sic::sic_verify_with(big, tol.sic));
    let (vs, vb) = (vs?, vb?);
    let sics = vs.pass && vb.pass;
    report.push(Stage::new("verify_small", vs.pass, &vs));
    report.push(Stage::new("verify_big", vb.pass, &vb));
    if !sics {
        report.outcome = Outcome::NotSic;
        report.finish();
        return Ok(None);
    }

    if odd {
        report.push(match sic::centre_fiducial(small) {
            Ok(cf) => Stage::new(
                "centre_small",
                true,
                json!({ "shift": cf.shift, "symmetry": cf.symmetry, "residual": cf.residual }),
            ),
            Err(e @ Error::NotCentred(_)) => {
                Stage { name: "centre_small", status: Status::Fail, note: Some(e.to_string()), result: Value::Null }
            }
            Err(e) => Stage::error("centre_small", &e),
        });
    } else {
        report.push(Stage::skipped("centre_small", EVEN_D));
    }

    let a = alignment::align_with(small, big, tol.align)?;
    let verdict = a.report.verdict;
    report.push(Stage::new("align", verdict == Verdict::Aligned, &a.report));
    let downstream =
        ["strong_centre", "theorem1", "theorem2", "theorem3_mub", "theorem4_frames", "theorem5", "simplex", "symmetry"];
    if verdict != Verdict::Aligned {
        for name in downstream {
            report.push(Stage::skipped(name, NOT_ALIGNED));
        }
        report.outcome = if verdict == Verdict::Inconclusive { Outcome::Inconclusive } else { Outcome::NotAligned };
        report.finish();
        return Ok(Some(a));
    }

    if odd {
        report.push(match sic::strongly_centre(&a.big, d) {
            Ok(sc) => Stage::new("strong_centre", true, json!({ "shift": sc.shift, "candidates": sc.candidates }))
                .note("operationally strongly centred"),
            Err(e @ Error::NoStrongCentre(_)) => {
                Stage { name: "strong_centre", status: Status::Fail, note: Some(e.to_string()), result: Value::Null }
            }
            Err(e) => Stage::error("strong_centre", &e),
        });
        odd_theorems(&a, d, tol, report);
    } else {
        for name in downstream.iter().take(6) {
            report.push(Stage::skipped(name, EVEN_D));
        }
    }

    let theta = a.small_table()?;
    report.push(match frames::simplex_probe(&theta, &a.big) {
        Ok(probe) => {
            let pass = probe.simplex.as_ref().is_none_or(|s| s.pass);
            Stage::new("simplex", pass, &probe)
        }
        Err(e) => Stage::error("simplex", &e),
    });

    report.push(symmetry_stage(&a));
    report.outcome = Outcome::Aligned;
    report.finish();
    Ok(Some(a))
}

fn odd_theorems(a: &Alignment, d: usize, tol: &Tolerances, report: &mut RunReport) {
    let theta = match a.small_table() {
        Ok(t) => t,
        Err(e) => {
            report.push(Stage::error("theorem1", &e));
            return;
        }
    };
    report.push(match entangle::check_theorem1_with(&a.big, d, tol.theorem) {
        Ok(r) => Stage::new("theorem1", r.pass, &r),
        Err(e) => Stage::error("theorem1", &e),
    });
    report.push(match a.report.m {
        Some(m) => match entangle::check_theorem2_with(&a.big, &theta, &m, tol.theorem) {
            Ok(r) => Stage::new("theorem2", r.pass, &r),
            Err(e) => Stage::error("theorem2", &e),
        },
        None => Stage::error("theorem2", &Error::Invalid("aligned without a matrix M".into())),
    });

    let p = d - 2;
    report.push(if p >= 3 && is_prime(p as u64) {
        match mub::mub_from_aligned_sic(&a.big, d) {
            Ok(r) => {
                let pass = r.report.pass && r.projector_residual <= tol.theorem;
                Stage::new("theorem3_mub", pass, &r)
            }
            Err(e) => Stage::error("theorem3_mub", &e),
        }
    } else {
        Stage::skipped("theorem3_mub", "skipped: d-2 is not an odd prime")
    });

    let (etfs, projectors) = rayon::join(
        || frames::certify_embedded_with(&a.big, d, tol.theorem),
        || frames::build_projectors_with(&a.big, d, tol.theorem),
    );
    report.push(match (etfs, projectors) {
        (Ok((stride_dm2, stride_d)), Ok(pair)) => {
            let closed = a.report.m.map(|m| frames::projector_closed_forms(&pair, &theta, &m)).transpose();
            match closed {
                Ok(closed) => {
                    let (m1, m2) = frames::orbit_multiplets(&a.big, &pair);
                    let pass = stride_dm2.pass
                        && stride_d.pass
                        && pair.pass
                        && closed.as_ref().is_some_and(|c| c.pass)
                        && m1.distinct == (d - 2) * (d - 2)
                        && m2.distinct == d * d
                        && m1.partitions_sic
                        && m2.partitions_sic;
                    Stage::new(
                        "theorem4_frames",
                        pass,
                        json!({
                            "stride_d_minus_2": stride_dm2,
                            "stride_d": stride_d,
                            "projectors": pair,
                            "closed_forms": closed,
                            "multiplet_pi1": m1,
                            "multiplet_pi2": m2,
                        }),
                    )
                }
                Err(e) => Stage::error("theorem4_frames", &e),
            }
        }
        (Err(e), _) | (_, Err(e)) => Stage::error("theorem4_frames", &e),
    });

    report.push(match symmetry::check_theorem5_with(&a.big, d, tol.theorem) {
        Ok(r) => Stage::new(
            "theorem5",
            r.pass,
            json!({
                "fb": r.fb,
                "invariance_defect": r.invariance_defect,
                "permutation_defect": r.permutation_defect,
                "permutation_order": r.permutation_order,
                "tolerance": r.tolerance,
                "pass": r.pass,
            }),
        ),
        Err(e) => Stage::error("theorem5", &e),
    });
}

#[derive(Clone, Debug, Serialize)]
struct OrderSummary {
    dim: usize,
    unitary_order: usize,
    extended_order: usize,
    has_zauner_type_element: bool,
    closed: bool,
    lower_bound: bool,
}

impl From<&SymmetryReport> for OrderSummary {
    fn from(r: &SymmetryReport) -> Self {
        Self {
            dim: r.dim,
            unitary_order: r.unitary_order,
            extended_order: r.extended_order,
            has_zauner_type_element: r.has_zauner_type_element,
            closed: r.closed,
            lower_bound: r.lower_bound,
        }
    }
}

fn symmetry_stage(a: &Alignment) -> Stage {
    let (small, big) = rayon::join(|| symmetry::stabilizer_order(&a.small), || symmetry::stabilizer_order(&a.big));
    match (small, big) {
        (Ok(s), Ok(b)) => {
            let exact = !s.lower_bound && !b.lower_bound;
            let doubles = exact.then_some(b.unitary_order == 2 * s.unitary_order);
            let pass = [&s, &b].iter().all(|r| r.closed && (r.lower_bound || r.has_zauner_type_element));
            Stage::new(
                "symmetry",
                pass,
                json!({ "small": OrderSummary::from(&s), "big": OrderSummary::from(&b), "order_doubles": doubles }),
            )
        }
        (Err(e), _) | (_, Err(e)) => Stage::error("symmetry", &e),
    }
}
