//! Versioned problem files and the reports produced for them.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::cohomology::global_cohomology;
use crate::error::{Error, Result};
use crate::morse::{
    check_adjoint_duality, check_strong, flip_problem, lefschetz, local_cohomology,
    morse_polynomial, perfectness, refined_morse, suspension_height_problem, AdjointCheck,
    Lefschetz, MorseProblem, RefinedCheck, StrongCheck,
};
use crate::perversity::all_self_dual;
use crate::poly::GradedPoly;
use crate::rational::RationalSpec;
use crate::space::{witt_check, GradedBasis, SpaceExpr};
use crate::spectral::{
    csv_table, spectrum, sweep, SpectralModel, SpectralModelSpec, SpectrumReport,
};

pub const FORMAT_VERSION: u32 = 1;
pub const REPORT_HEADER: &str = "strata-morse report v1";

pub const ASYMMETRY_TOL: f64 = 1e-10;
pub const NEGATIVITY_TOL: f64 = 1e-8;
pub const PAIRING_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    #[default]
    Text,
    Csv,
}

fn default_verbosity() -> u8 {
    1
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputOptions {
    #[serde(default)]
    pub format: Format,
    #[serde(default = "default_verbosity")]
    pub verbosity: u8,
}

impl Default for OutputOptions {
    fn default() -> Self {
        OutputOptions {
            format: Format::Text,
            verbosity: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CohomologyQuery {
    pub space: SpaceExpr,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Problem {
    Cohomology(CohomologyQuery),
    Morse(MorseProblem),
    Spectral(SpectralModel),
}

impl Problem {
    pub fn kind(&self) -> &'static str {
        match self {
            Problem::Cohomology(_) => "cohomology",
            Problem::Morse(_) => "morse",
            Problem::Spectral(_) => "spectral",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawProblemFile", into = "RawProblemFile")]
pub struct ProblemFile {
    pub problem: Problem,
    pub output: OutputOptions,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawProblemFile {
    version: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    cohomology: Option<CohomologyQuery>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    morse: Option<MorseProblem>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    spectral: Option<SpectralModel>,
    #[serde(default)]
    output: OutputOptions,
}

impl TryFrom<RawProblemFile> for ProblemFile {
    type Error = Error;
    fn try_from(raw: RawProblemFile) -> Result<Self> {
        if raw.version != FORMAT_VERSION {
            return Err(Error::InvalidProblem(format!(
                "unsupported version {}, expected {FORMAT_VERSION}",
                raw.version
            )));
        }
        let mut bodies = Vec::new();
        bodies.extend(raw.cohomology.map(Problem::Cohomology));
        bodies.extend(raw.morse.map(Problem::Morse));
        bodies.extend(raw.spectral.map(Problem::Spectral));
        if bodies.len() != 1 {
            return Err(Error::InvalidProblem(
                "exactly one of \"cohomology\", \"morse\", \"spectral\" is required".into(),
            ));
        }
        Ok(ProblemFile {
            problem: bodies.pop().expect("one body"),
            output: raw.output,
        })
    }
}

impl From<ProblemFile> for RawProblemFile {
    fn from(f: ProblemFile) -> Self {
        let mut raw = RawProblemFile {
            version: FORMAT_VERSION,
            cohomology: None,
            morse: None,
            spectral: None,
            output: f.output,
        };
        match f.problem {
            Problem::Cohomology(q) => raw.cohomology = Some(q),
            Problem::Morse(m) => raw.morse = Some(m),
            Problem::Spectral(s) => raw.spectral = Some(s),
        }
        raw
    }
}

impl ProblemFile {
    pub fn new(problem: Problem) -> Self {
        ProblemFile {
            problem,
            output: OutputOptions::default(),
        }
    }

    /// Parses and validates a problem file; messages carry line and column.
    pub fn parse(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::InvalidProblem(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("problem files serialize") + "\n"
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CohomologyReport {
    pub space: String,
    pub dim: usize,
    pub poincare: GradedPoly,
    pub classes: GradedBasis,
    pub witt: bool,
    /// `None` when some node lacks a star structure.
    pub self_dual: Option<bool>,
    pub palindromic: bool,
    pub euler_characteristic: i64,
}

impl CohomologyReport {
    /// Self-dual perversities must give palindromic polynomials.
    pub fn passes(&self) -> bool {
        self.self_dual != Some(true) || self.palindromic
    }
}

fn self_duality(s: &SpaceExpr) -> Result<Option<bool>> {
    match all_self_dual(s) {
        Ok(b) => Ok(Some(b)),
        Err(Error::MissingStar(_)) => Ok(None),
        Err(e) => Err(e),
    }
}

pub fn cohomology_report(s: &SpaceExpr) -> Result<CohomologyReport> {
    let classes = global_cohomology(s)?;
    let poincare = classes.poly();
    Ok(CohomologyReport {
        space: s.to_string(),
        dim: s.dim(),
        palindromic: poincare.is_palindromic(s.dim()),
        euler_characteristic: poincare.eval_minus_one(),
        poincare,
        classes,
        witt: witt_check(s),
        self_dual: self_duality(s)?,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComponentReport {
    pub name: String,
    pub h_value: RationalSpec,
    pub description: String,
    pub local: GradedPoly,
    pub classes: GradedBasis,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MorseReport {
    pub label: String,
    pub space: String,
    pub dim: usize,
    pub components: Vec<ComponentReport>,
    pub morse: GradedPoly,
    pub flipped: GradedPoly,
    pub poincare: GradedPoly,
    pub strong: StrongCheck,
    pub adjoint: AdjointCheck,
    pub refined: RefinedCheck,
    pub perfect: Vec<bool>,
    pub lefschetz: Lefschetz,
}

impl MorseReport {
    pub fn passes(&self) -> bool {
        self.strong.holds() && self.adjoint.holds && !self.refined.failed() && self.lefschetz.equal
    }
}

pub fn morse_report(p: &MorseProblem) -> Result<MorseReport> {
    let components = p
        .components
        .iter()
        .map(|c| {
            let classes = local_cohomology(c)?;
            Ok(ComponentReport {
                name: c.name.clone(),
                h_value: c.h_value.into(),
                description: c.to_string(),
                local: classes.poly(),
                classes,
            })
        })
        .collect::<Result<_>>()?;
    Ok(MorseReport {
        label: p.label.clone(),
        space: p.space.to_string(),
        dim: p.dim(),
        components,
        morse: morse_polynomial(p)?,
        flipped: morse_polynomial(&flip_problem(p))?,
        poincare: global_cohomology(&p.space)?.poly(),
        strong: check_strong(p)?,
        adjoint: check_adjoint_duality(p)?,
        refined: refined_morse(p)?,
        perfect: perfectness(p)?,
        lefschetz: lefschetz(p)?,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectralInvariants {
    pub max_asymmetry: f64,
    pub min_eigenvalue: f64,
    pub max_pairing_error: f64,
    pub passes: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Agreement {
    pub morse: Vec<u64>,
    pub poincare: Vec<u64>,
    /// Counts at the largest `ε`, compared with `M`.
    pub large_epsilon_counts: Vec<usize>,
    /// Counts at `ε = 0` when it was run, compared with `P`.
    pub zero_epsilon_counts: Option<Vec<usize>>,
    pub agrees: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectralRun {
    pub model: SpectralModelSpec,
    pub space: String,
    pub reports: Vec<SpectrumReport>,
    /// Present when at least two `ε` values were run.
    pub stable: Option<bool>,
    pub stable_from: Option<RationalSpec>,
    pub stable_counts: Option<Vec<usize>>,
    pub invariants: SpectralInvariants,
    pub agreement: Agreement,
}

impl SpectralRun {
    pub fn passes(&self) -> bool {
        self.invariants.passes && self.agreement.agrees && self.stable != Some(false)
    }
}

fn as_counts(p: &GradedPoly, len: usize) -> Vec<u64> {
    p.to_dense(len)
}

pub fn spectral_run(model: &SpectralModel) -> Result<SpectralRun> {
    let (reports, stable, stable_from, stable_counts) = match model.epsilons.len() {
        0 => return Err(Error::InvalidModel("no epsilon values given".into())),
        1 => (vec![spectrum(model, model.epsilons[0])?], None, None, None),
        _ => {
            let s = sweep(model)?;
            (s.reports, Some(s.stable), s.stable_from, s.stable_counts)
        }
    };
    let fold = |f: fn(&SpectrumReport) -> f64, init: f64, op: fn(f64, f64) -> f64| {
        reports.iter().map(f).fold(init, op)
    };
    let max_asymmetry = fold(|r| r.max_asymmetry, 0.0, f64::max);
    let min_eigenvalue = fold(|r| r.min_eigenvalue, f64::INFINITY, f64::min);
    let max_pairing_error = fold(|r| r.max_pairing_error, 0.0, f64::max);
    let invariants = SpectralInvariants {
        passes: max_asymmetry < ASYMMETRY_TOL
            && min_eigenvalue >= -NEGATIVITY_TOL
            && max_pairing_error <= PAIRING_TOL,
        max_asymmetry,
        min_eigenvalue,
        max_pairing_error,
    };

    let space = model.space();
    let len = model.dim() + 1;
    let morse = as_counts(&morse_polynomial(&suspension_height_problem(&space)?)?, len);
    let poincare = as_counts(&global_cohomology(&space)?.poly(), len);
    let large = reports.last().expect("at least one report").counts();
    let zero = reports
        .iter()
        .find(|r| r.epsilon_value == num_rational::Ratio::from_integer(0))
        .map(SpectrumReport::counts);
    let matches = |c: &[usize], p: &[u64]| c.iter().zip(p).all(|(a, b)| *a as u64 == *b);
    let agrees = matches(&large, &morse) && zero.as_ref().is_none_or(|z| matches(z, &poincare));
    Ok(SpectralRun {
        model: SpectralModelSpec::from(model),
        space: space.to_string(),
        reports,
        stable,
        stable_from,
        stable_counts,
        invariants,
        agreement: Agreement {
            morse,
            poincare,
            large_epsilon_counts: large,
            zero_epsilon_counts: zero,
            agrees,
        },
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Report {
    Cohomology(CohomologyReport),
    Morse(MorseReport),
    Spectral(SpectralRun),
}

impl Report {
    pub fn passes(&self) -> bool {
        match self {
            Report::Cohomology(r) => r.passes(),
            Report::Morse(r) => r.passes(),
            Report::Spectral(r) => r.passes(),
        }
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Json => serde_json::to_string_pretty(self).expect("reports serialize") + "\n",
            Format::Text => self.text(),
            Format::Csv => self.csv(),
        }
    }

    fn csv(&self) -> String {
        match self {
            Report::Cohomology(r) => {
                let mut out = String::from("degree,label\n");
                for c in r.classes.classes() {
                    let _ = writeln!(out, "{},{}", c.degree, c.label);
                }
                out
            }
            Report::Morse(r) => {
                let mut out = String::from("degree,morse,flipped,poincare,perfect\n");
                for k in 0..=r.dim {
                    let _ = writeln!(
                        out,
                        "{k},{},{},{},{}",
                        r.morse.coeff(k),
                        r.flipped.coeff(k),
                        r.poincare.coeff(k),
                        r.perfect[k]
                    );
                }
                out
            }
            Report::Spectral(r) => csv_table(&r.reports),
        }
    }

    fn text(&self) -> String {
        let mut out = format!("{REPORT_HEADER}\n");
        match self {
            Report::Cohomology(r) => cohomology_text(r, &mut out),
            Report::Morse(r) => morse_text(r, &mut out),
            Report::Spectral(r) => spectral_text(r, &mut out),
        }
        let _ = writeln!(
            out,
            "verdict: {}",
            if self.passes() { "PASS" } else { "FAIL" }
        );
        out
    }
}

fn flag(b: Option<bool>) -> &'static str {
    match b {
        Some(true) => "yes",
        Some(false) => "no",
        None => "unknown (no star structure)",
    }
}

fn cohomology_text(r: &CohomologyReport, out: &mut String) {
    let _ = writeln!(out, "space: {} (dimension {})", r.space, r.dim);
    let _ = writeln!(out, "P = {}", r.poincare);
    for k in 0..=r.dim {
        let labels = r.classes.labels_in_degree(k);
        if !labels.is_empty() {
            let _ = writeln!(out, "  H^{k}: {}", labels.join(", "));
        }
    }
    let _ = writeln!(out, "witt: {}", flag(Some(r.witt)));
    let _ = writeln!(out, "self-dual: {}", flag(r.self_dual));
    let _ = writeln!(out, "palindromic: {}", flag(Some(r.palindromic)));
    let _ = writeln!(out, "euler characteristic: {}", r.euler_characteristic);
}

fn morse_text(r: &MorseReport, out: &mut String) {
    let _ = writeln!(out, "problem: {}", r.label);
    let _ = writeln!(out, "space: {} (dimension {})", r.space, r.dim);
    let _ = writeln!(out, "components:");
    for c in &r.components {
        let _ = writeln!(out, "  {}", c.description);
        let _ = writeln!(out, "    local = {}", c.local);
    }
    let _ = writeln!(out, "M(h)  = {}", r.morse);
    let _ = writeln!(out, "M(-h) = {}", r.flipped);
    let _ = writeln!(out, "P     = {}", r.poincare);
    match &r.strong.quotient {
        Some(q) => {
            let _ = writeln!(out, "strong inequality: holds, Q = {q}");
        }
        None => {
            let _ = writeln!(
                out,
                "strong inequality: FAILS ({})",
                r.strong.violation.as_deref().unwrap_or("")
            );
        }
    }
    let _ = writeln!(
        out,
        "adjoint duality: {} (reversed M = {}, adjoint M(-h) = {})",
        if r.adjoint.holds { "holds" } else { "FAILS" },
        r.adjoint.reversed,
        r.adjoint.adjoint_flipped
    );
    let _ = match &r.refined {
        RefinedCheck::Holds { refined, error } => {
            writeln!(
                out,
                "refined inequality: holds, M_re = {refined}, error = {error}"
            )
        }
        RefinedCheck::Violated {
            refined,
            difference,
        } => {
            writeln!(
                out,
                "refined inequality: FAILS, M_re = {refined}, M_re - P = {difference:?}"
            )
        }
        RefinedCheck::Inapplicable { reason } => {
            writeln!(out, "refined inequality: not applicable ({reason})")
        }
    };
    let perfect: Vec<String> = r
        .perfect
        .iter()
        .enumerate()
        .filter(|(_, p)| **p)
        .map(|(k, _)| k.to_string())
        .collect();
    let _ = writeln!(
        out,
        "perfect in degrees: {}{}",
        if perfect.is_empty() {
            "none".to_string()
        } else {
            perfect.join(", ")
        },
        if r.perfect.iter().all(|&p| p) {
            " (perfect)"
        } else {
            ""
        }
    );
    let _ = writeln!(
        out,
        "lefschetz: M(-1) = {}, P(-1) = {} ({})",
        r.lefschetz.morse,
        r.lefschetz.poincare,
        if r.lefschetz.equal { "equal" } else { "DIFFER" }
    );
}

fn counts_text(c: &[usize]) -> String {
    format!(
        "({})",
        c.iter()
            .map(ToString::to_string)
            .collect::<Vec<_>>()
            .join(",")
    )
}

fn spectral_text(r: &SpectralRun, out: &mut String) {
    let _ = writeln!(out, "space: {}", r.space);
    let _ = writeln!(
        out,
        "grid points: {}, mode cutoff: {}",
        r.model.grid_points, r.model.mode_cutoff
    );
    for rep in &r.reports {
        let gaps: Vec<String> = rep
            .degrees
            .iter()
            .map(|d| {
                if d.gap_ratio.is_finite() {
                    format!("{:.1e}", d.gap_ratio)
                } else {
                    "inf".to_string()
                }
            })
            .collect();
        let _ = writeln!(
            out,
            "epsilon {}: counts {} threshold {:.3e} gap ratios [{}]",
            rep.epsilon_value,
            counts_text(&rep.counts()),
            rep.threshold,
            gaps.join(", ")
        );
    }
    if let Some(stable) = r.stable {
        let from = match &r.stable_from {
            Some(RationalSpec::Int(i)) => i.to_string(),
            Some(RationalSpec::Text(t)) => t.clone(),
            None => "never".into(),
        };
        let _ = writeln!(
            out,
            "sweep: {} from epsilon {}",
            if stable { "stable" } else { "UNSTABLE" },
            from
        );
    }
    let inv = &r.invariants;
    let _ = writeln!(
        out,
        "invariants: asymmetry {:.1e}, min eigenvalue {:.1e}, pairing error {:.1e} ({})",
        inv.max_asymmetry,
        inv.min_eigenvalue,
        inv.max_pairing_error,
        if inv.passes { "ok" } else { "FAIL" }
    );
    let a = &r.agreement;
    let _ = writeln!(
        out,
        "symbolic M = {:?}, P = {:?}; agreement: {}",
        a.morse,
        a.poincare,
        if a.agrees { "yes" } else { "NO" }
    );
}

pub fn run(problem: &Problem) -> Result<Report> {
    Ok(match problem {
        Problem::Cohomology(q) => Report::Cohomology(cohomology_report(&q.space)?),
        Problem::Morse(m) => Report::Morse(morse_report(m)?),
        Problem::Spectral(s) => Report::Spectral(spectral_run(s)?),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_unknown_and_ambiguous() {
        let ok = ProblemFile::parse(r#"{"version":1,"cohomology":{"space":{"torus":2}}}"#).unwrap();
        assert_eq!(ok.problem.kind(), "cohomology");
        let e = ProblemFile::parse(
            "{\"version\":1,\n\"cohomology\":{\"space\":\"point\"},\"extra\":0}",
        )
        .unwrap_err();
        assert!(e.to_string().contains("line 2"), "{e}");
        assert!(ProblemFile::parse(r#"{"version":2,"cohomology":{"space":"point"}}"#).is_err());
        assert!(ProblemFile::parse(r#"{"version":1}"#).is_err());
        let bad_w = "{\"version\":1,\"cohomology\":{\"space\":\n{\"suspension\":{\"link\":{\"torus\":2},\"w\":{\"span\":[[1,0,0]]}}}}}";
        let e = ProblemFile::parse(bad_w).unwrap_err();
        assert!(e.to_string().contains("length"), "{e}");
    }

    #[test]
    fn roundtrip() {
        let f = ProblemFile::parse(
            r#"{"version":1,"cohomology":{"space":{"torus":2}},"output":{"format":"json"}}"#,
        )
        .unwrap();
        assert_eq!(ProblemFile::parse(&f.to_json()).unwrap(), f);
    }

    #[test]
    fn cohomology_flags() {
        let s = SpaceExpr::suspension(SpaceExpr::Torus(2), vec![vec![1, 0]]).unwrap();
        let r = cohomology_report(&s).unwrap();
        assert_eq!(r.poincare, GradedPoly::from_dense(&[1, 1, 1, 1]));
        assert!(!r.witt);
        assert_eq!(r.self_dual, Some(true));
        assert!(r.passes());
    }
}
