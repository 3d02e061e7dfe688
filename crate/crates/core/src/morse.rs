//! Critical components of stratified Morse-Bott functions, local and global
//! Morse polynomials, and the inequality/duality checks built on them.

use std::collections::HashSet;
use std::fmt;

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::cohomology::{dirichlet, global_cohomology, kunneth, neumann};
use crate::error::{Error, Result};
use crate::perversity::{all_self_dual, Transform};
use crate::poly::GradedPoly;
use crate::rational::RationalSpec;
use crate::space::{GradedBasis, SpaceExpr};

/// A connected critical set `F` with its attracting (stable) and expanding
/// (unstable) normal cone factors.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CriticalComponent {
    pub name: String,
    pub base: SpaceExpr,
    pub stable: Vec<SpaceExpr>,
    pub unstable: Vec<SpaceExpr>,
    pub h_value: Ratio<i64>,
}

impl CriticalComponent {
    pub fn new(
        name: impl Into<String>,
        base: SpaceExpr,
        stable: Vec<SpaceExpr>,
        unstable: Vec<SpaceExpr>,
        h_value: Ratio<i64>,
    ) -> Result<Self> {
        let name = name.into();
        if !base.is_global() {
            return Err(Error::InvalidProblem(format!(
                "component {name}: base {base} must be compact"
            )));
        }
        if let Some(f) = stable
            .iter()
            .chain(&unstable)
            .find(|f| !matches!(f, SpaceExpr::Cone(_) | SpaceExpr::Disc(_)))
        {
            return Err(Error::InvalidProblem(format!(
                "component {name}: factor {f} is not a cone or disc"
            )));
        }
        Ok(CriticalComponent {
            name,
            base,
            stable,
            unstable,
            h_value,
        })
    }

    /// `dim F + Σ dim(stable) + Σ dim(unstable)`.
    pub fn dim(&self) -> usize {
        self.base.dim()
            + self.stable.iter().map(SpaceExpr::dim).sum::<usize>()
            + self.unstable.iter().map(SpaceExpr::dim).sum::<usize>()
    }

    fn map_spaces(&self, f: &dyn Fn(&SpaceExpr) -> Result<SpaceExpr>) -> Result<Self> {
        Ok(CriticalComponent {
            name: self.name.clone(),
            base: f(&self.base)?,
            stable: self.stable.iter().map(f).collect::<Result<_>>()?,
            unstable: self.unstable.iter().map(f).collect::<Result<_>>()?,
            h_value: self.h_value,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MorseProblem {
    pub label: String,
    pub space: SpaceExpr,
    pub components: Vec<CriticalComponent>,
}

impl MorseProblem {
    pub fn new(
        label: impl Into<String>,
        space: SpaceExpr,
        components: Vec<CriticalComponent>,
    ) -> Result<Self> {
        if !space.is_global() {
            return Err(Error::InvalidProblem(format!(
                "ambient space {space} must be compact"
            )));
        }
        let n = space.dim();
        let mut names = HashSet::new();
        for c in &components {
            if !names.insert(c.name.as_str()) {
                return Err(Error::InvalidProblem(format!(
                    "duplicate component name {}",
                    c.name
                )));
            }
            if c.dim() != n {
                return Err(Error::InvalidProblem(format!(
                    "component {} has dimension {} but the space has dimension {n}",
                    c.name,
                    c.dim()
                )));
            }
        }
        Ok(MorseProblem {
            label: label.into(),
            space,
            components,
        })
    }

    pub fn dim(&self) -> usize {
        self.space.dim()
    }

    /// Applies a perversity transform to the ambient space and every factor.
    pub fn transform(&self, mode: Transform) -> Result<MorseProblem> {
        let f = |s: &SpaceExpr| crate::perversity::transform_perversity(s, mode);
        Ok(MorseProblem {
            label: self.label.clone(),
            space: f(&self.space)?,
            components: self
                .components
                .iter()
                .map(|c| c.map_spaces(&f))
                .collect::<Result<_>>()?,
        })
    }
}

/// Local cohomology of a component: base cohomology tensored with Neumann
/// classes of the stable factors and Dirichlet classes of the unstable ones.
pub fn local_cohomology(c: &CriticalComponent) -> Result<GradedBasis> {
    let mut acc = global_cohomology(&c.base)?;
    for f in &c.stable {
        acc = kunneth(&acc, &neumann(f)?)?;
    }
    for f in &c.unstable {
        acc = kunneth(&acc, &dirichlet(f)?)?;
    }
    Ok(acc)
}

pub fn local_morse_poly(c: &CriticalComponent) -> Result<GradedPoly> {
    let mut acc = global_cohomology(&c.base)?.poly();
    for f in &c.stable {
        acc = acc.mul(&neumann(f)?.poly());
    }
    for f in &c.unstable {
        acc = acc.mul(&dirichlet(f)?.poly());
    }
    Ok(acc)
}

pub fn morse_polynomial(p: &MorseProblem) -> Result<GradedPoly> {
    p.components.iter().map(local_morse_poly).sum()
}

pub fn poincare_polynomial(p: &MorseProblem) -> Result<GradedPoly> {
    Ok(global_cohomology(&p.space)?.poly())
}

/// Splits `s` into its unique suspension factor and the product of the
/// remaining factors.
fn split_suspension(s: &SpaceExpr) -> Result<(SpaceExpr, Option<SpaceExpr>)> {
    match s {
        SpaceExpr::Suspension(_) => Ok((s.clone(), None)),
        SpaceExpr::Product(a, b) => {
            let sus_a = contains_suspension_factor(a);
            let sus_b = contains_suspension_factor(b);
            match (sus_a, sus_b) {
                (true, false) => {
                    let (sus, rest) = split_suspension(a)?;
                    Ok((sus, Some(join(rest, (**b).clone()))))
                }
                (false, true) => {
                    let (sus, rest) = split_suspension(b)?;
                    Ok((sus, Some(join(rest, (**a).clone()))))
                }
                _ => Err(Error::InvalidProblem(format!(
                    "{s} must have exactly one suspension factor"
                ))),
            }
        }
        other => Err(Error::InvalidProblem(format!(
            "{other} has no suspension factor"
        ))),
    }
}

fn contains_suspension_factor(s: &SpaceExpr) -> bool {
    match s {
        SpaceExpr::Suspension(_) => true,
        SpaceExpr::Product(a, b) => contains_suspension_factor(a) || contains_suspension_factor(b),
        _ => false,
    }
}

fn join(rest: Option<SpaceExpr>, other: SpaceExpr) -> SpaceExpr {
    match rest {
        None => other,
        Some(r) => SpaceExpr::product(r, other),
    }
}

/// The height function `h = cos φ` on `Σ(Z)`, pulled back along the
/// projection when the suspension is multiplied by other factors.
pub fn suspension_height_problem(s: &SpaceExpr) -> Result<MorseProblem> {
    let (sus, rest) = split_suspension(s)?;
    let node = match &sus {
        SpaceExpr::Suspension(n) => n,
        _ => unreachable!(),
    };
    let cap = SpaceExpr::Cone(node.clone());
    let base = rest.unwrap_or(SpaceExpr::Point);
    let components = vec![
        CriticalComponent::new(
            "south",
            base.clone(),
            vec![cap.clone()],
            vec![],
            Ratio::from_integer(-1),
        )?,
        CriticalComponent::new("north", base, vec![], vec![cap], Ratio::from_integer(1))?,
    ];
    MorseProblem::new(format!("height function on {s}"), s.clone(), components)
}

/// `h -> -h`: attracting and expanding factors trade places.
pub fn flip_problem(p: &MorseProblem) -> MorseProblem {
    MorseProblem {
        label: format!("-({})", p.label),
        space: p.space.clone(),
        components: p
            .components
            .iter()
            .map(|c| CriticalComponent {
                name: c.name.clone(),
                base: c.base.clone(),
                stable: c.unstable.clone(),
                unstable: c.stable.clone(),
                h_value: -c.h_value,
            })
            .collect(),
    }
}

fn simplify_product(a: &SpaceExpr, b: &SpaceExpr) -> SpaceExpr {
    match (a, b) {
        (SpaceExpr::Point, x) | (x, SpaceExpr::Point) => x.clone(),
        _ => SpaceExpr::product(a.clone(), b.clone()),
    }
}

/// `h₁ + h₂` on `X × Y`: critical sets are products of critical sets.
pub fn product_problem(p: &MorseProblem, q: &MorseProblem) -> Result<MorseProblem> {
    let mut components = Vec::with_capacity(p.components.len() * q.components.len());
    for a in &p.components {
        for b in &q.components {
            components.push(CriticalComponent::new(
                format!("{}×{}", a.name, b.name),
                simplify_product(&a.base, &b.base),
                a.stable.iter().chain(&b.stable).cloned().collect(),
                a.unstable.iter().chain(&b.unstable).cloned().collect(),
                a.h_value + b.h_value,
            )?);
        }
    }
    MorseProblem::new(
        format!("({}) + ({})", p.label, q.label),
        SpaceExpr::product(p.space.clone(), q.space.clone()),
        components,
    )
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct StrongCheck {
    pub morse: GradedPoly,
    pub poincare: GradedPoly,
    /// `Q` with `M - P = (1+b) Q`, absent on violation.
    pub quotient: Option<GradedPoly>,
    pub violation: Option<String>,
}

impl StrongCheck {
    pub fn holds(&self) -> bool {
        self.quotient.is_some()
    }
}

pub fn check_strong(p: &MorseProblem) -> Result<StrongCheck> {
    let morse = morse_polynomial(p)?;
    let poincare = poincare_polynomial(p)?;
    let (quotient, violation) = match morse.checked_sub(&poincare) {
        None => {
            let diff = morse.signed_diff(&poincare, p.dim() + 1);
            (
                None,
                Some(format!("M - P has a negative coefficient: {diff:?}")),
            )
        }
        Some(diff) => match diff.divide_one_plus_b() {
            Ok(q) => (Some(q), None),
            Err(e) => (None, Some(e.to_string())),
        },
    };
    Ok(StrongCheck {
        morse,
        poincare,
        quotient,
        violation,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AdjointCheck {
    /// `b^n M(h)(1/b)`.
    pub reversed: GradedPoly,
    /// Morse polynomial of `-h` with every node subspace replaced by `W^⊥`.
    pub adjoint_flipped: GradedPoly,
    pub holds: bool,
}

pub fn check_adjoint_duality(p: &MorseProblem) -> Result<AdjointCheck> {
    let reversed = morse_polynomial(p)?.reverse(p.dim())?;
    let adjoint = p.transform(Transform::Adjoint)?;
    let adjoint_flipped = morse_polynomial(&flip_problem(&adjoint))?;
    Ok(AdjointCheck {
        holds: reversed == adjoint_flipped,
        reversed,
        adjoint_flipped,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum RefinedCheck {
    Holds {
        refined: GradedPoly,
        error: GradedPoly,
    },
    Violated {
        refined: GradedPoly,
        difference: Vec<i64>,
    },
    Inapplicable {
        reason: String,
    },
}

impl RefinedCheck {
    /// A violated refined inequality is a failure; inapplicability is not.
    pub fn failed(&self) -> bool {
        matches!(self, RefinedCheck::Violated { .. })
    }
}

/// Refined polynomial `min(M(h), M(-h))` and its error `M_re - P`, available
/// when every node subspace of the ambient space is self-dual.
pub fn refined_morse(p: &MorseProblem) -> Result<RefinedCheck> {
    match all_self_dual(&p.space) {
        Ok(true) => {}
        Ok(false) => {
            return Ok(RefinedCheck::Inapplicable {
                reason: "perversity is not self-dual".into(),
            })
        }
        Err(Error::MissingStar(s)) => {
            return Ok(RefinedCheck::Inapplicable {
                reason: format!("no star structure on the middle cohomology of {s}"),
            })
        }
        Err(e) => return Err(e),
    }
    let refined = morse_polynomial(p)?.coeff_min(&morse_polynomial(&flip_problem(p))?);
    let poincare = poincare_polynomial(p)?;
    Ok(match refined.checked_sub(&poincare) {
        Some(error) => RefinedCheck::Holds { refined, error },
        None => RefinedCheck::Violated {
            difference: refined.signed_diff(&poincare, p.dim() + 1),
            refined,
        },
    })
}

/// Degree `k` is perfect when the coefficients of `M` and `P` agree there.
pub fn perfectness(p: &MorseProblem) -> Result<Vec<bool>> {
    let m = morse_polynomial(p)?;
    let pp = poincare_polynomial(p)?;
    Ok((0..=p.dim()).map(|k| m.coeff(k) == pp.coeff(k)).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Lefschetz {
    pub morse: i64,
    pub poincare: i64,
    pub equal: bool,
}

pub fn lefschetz(p: &MorseProblem) -> Result<Lefschetz> {
    let morse = morse_polynomial(p)?.eval_minus_one();
    let poincare = poincare_polynomial(p)?.eval_minus_one();
    Ok(Lefschetz {
        morse,
        poincare,
        equal: morse == poincare,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComponentSpec {
    pub name: String,
    pub base: SpaceExpr,
    #[serde(default)]
    pub stable: Vec<SpaceExpr>,
    #[serde(default)]
    pub unstable: Vec<SpaceExpr>,
    #[serde(default)]
    pub h_value: RationalSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MorseProblemSpec {
    #[serde(default)]
    pub label: String,
    pub space: SpaceExpr,
    pub components: Vec<ComponentSpec>,
}

impl TryFrom<MorseProblemSpec> for MorseProblem {
    type Error = Error;
    fn try_from(spec: MorseProblemSpec) -> Result<Self> {
        let components = spec
            .components
            .into_iter()
            .map(|c| {
                let h = c.h_value.parse()?;
                CriticalComponent::new(c.name, c.base, c.stable, c.unstable, h)
            })
            .collect::<Result<_>>()?;
        MorseProblem::new(spec.label, spec.space, components)
    }
}

impl From<&MorseProblem> for MorseProblemSpec {
    fn from(p: &MorseProblem) -> Self {
        MorseProblemSpec {
            label: p.label.clone(),
            space: p.space.clone(),
            components: p
                .components
                .iter()
                .map(|c| ComponentSpec {
                    name: c.name.clone(),
                    base: c.base.clone(),
                    stable: c.stable.clone(),
                    unstable: c.unstable.clone(),
                    h_value: c.h_value.into(),
                })
                .collect(),
        }
    }
}

impl Serialize for MorseProblem {
    fn serialize<S: serde::Serializer>(
        &self,
        serializer: S,
    ) -> std::result::Result<S::Ok, S::Error> {
        MorseProblemSpec::from(self).serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for MorseProblem {
    fn deserialize<D: serde::Deserializer<'de>>(
        deserializer: D,
    ) -> std::result::Result<Self, D::Error> {
        let spec = MorseProblemSpec::deserialize(deserializer)?;
        MorseProblem::try_from(spec).map_err(serde::de::Error::custom)
    }
}

impl fmt::Display for CriticalComponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let list = |v: &[SpaceExpr]| {
            v.iter()
                .map(ToString::to_string)
                .collect::<Vec<_>>()
                .join(", ")
        };
        write!(
            f,
            "{} (h = {}): base {}, stable [{}], unstable [{}]",
            self.name,
            self.h_value,
            self.base,
            list(&self.stable),
            list(&self.unstable)
        )
    }
}

/// Smooth Morse data: a critical point of index `index` in dimension `n`.
pub fn smooth_critical_point(
    name: impl Into<String>,
    n: usize,
    index: usize,
) -> Result<CriticalComponent> {
    if index > n {
        return Err(Error::InvalidProblem(format!(
            "index {index} exceeds dimension {n}"
        )));
    }
    let stable = if index < n {
        vec![SpaceExpr::Disc(n - index)]
    } else {
        vec![]
    };
    let unstable = if index > 0 {
        vec![SpaceExpr::Disc(index)]
    } else {
        vec![]
    };
    CriticalComponent::new(
        name,
        SpaceExpr::Point,
        stable,
        unstable,
        Ratio::from_integer(index as i64),
    )
}
