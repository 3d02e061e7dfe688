//! L² cohomology of space expressions with mezzo-perversity boundary data.
//!
//! For a link `Z` of dimension `l` carrying subspace `W` of its middle
//! cohomology:
//!
//! | degree `k`       | cone, Neumann | cone, Dirichlet   | suspension          |
//! |------------------|---------------|-------------------|---------------------|
//! | `k < l/2`        | `H^k(Z)`      | 0                 | `H^k(Z)`            |
//! | `k = l/2`        | `W`           | 0                 | `W`                 |
//! | `k = l/2 + 1`    | 0             | `dx∧W^⊥`          | `dφ∧W^⊥`            |
//! | `k > l/2 + 1`    | 0             | `dx∧H^{k-1}(Z)`   | `dφ∧H^{k-1}(Z)`     |
//!
//! Degrees are compared as `2k` against `l` so odd links fall through the two
//! middle rows without special cases.

use crate::error::{Error, Result};
use crate::perversity::Subspace;
use crate::space::{primitive_cohomology, Class, GradedBasis, Node, SpaceExpr};

fn class(degree: usize, label: String) -> Class {
    Class { degree, label }
}

fn wedge(prefix: &str, label: &str) -> String {
    if label.contains(['+', '-']) {
        format!("{prefix}∧({label})")
    } else {
        format!("{prefix}∧{label}")
    }
}

fn expect_cone(s: &SpaceExpr) -> Result<&Node> {
    match s {
        SpaceExpr::Cone(n) => Ok(n),
        other => Err(Error::InvalidSpace(format!("{other} is not a cone"))),
    }
}

fn subspace_classes(degree: usize, w: &Subspace, prefix: Option<&str>) -> Vec<Class> {
    w.labels()
        .into_iter()
        .map(|l| class(degree, prefix.map_or(l.clone(), |p| wedge(p, &l))))
        .collect()
}

/// Lower half shared by the Neumann cone and the suspension.
fn lower_classes(node: &Node, link: &GradedBasis) -> Vec<Class> {
    let l = node.link.dim();
    let mut out: Vec<Class> = link
        .classes()
        .iter()
        .filter(|c| 2 * c.degree < l)
        .cloned()
        .collect();
    if l.is_multiple_of(2) {
        out.extend(subspace_classes(l / 2, &node.w, None));
    }
    out
}

/// Upper half shared by the Dirichlet cone and the suspension; `weights`
/// records the radial factor `x^{2(k-1)-l}` in the labels.
fn upper_classes(node: &Node, link: &GradedBasis, var: &str, weights: bool) -> Vec<Class> {
    let l = node.link.dim();
    let prefix = format!("d{var}");
    let mut out = Vec::new();
    if l.is_multiple_of(2) {
        out.extend(subspace_classes(
            l / 2 + 1,
            &node.w.orthocomplement(),
            Some(&prefix),
        ));
    }
    for c in link.classes().iter().filter(|c| 2 * (c.degree + 1) > l + 2) {
        let k = c.degree + 1;
        let label = if weights {
            let e = 2 * (k - 1) - l;
            let weighted = if e == 1 {
                format!("{var}·{}", c.label)
            } else {
                format!("{var}^{e}·{}", c.label)
            };
            format!("{prefix}∧{weighted}")
        } else {
            wedge(&prefix, &c.label)
        };
        out.push(class(k, label));
    }
    out
}

/// Cohomology of the cone `C(Z)` with generalized Neumann conditions.
pub fn cone_n(cone: &SpaceExpr) -> Result<GradedBasis> {
    let node = expect_cone(cone)?;
    let link = global_cohomology(&node.link)?;
    GradedBasis::new(lower_classes(node, &link))
}

/// Cohomology of the cone `C(Z)` with generalized Dirichlet conditions.
pub fn cone_d(cone: &SpaceExpr) -> Result<GradedBasis> {
    let node = expect_cone(cone)?;
    let link = global_cohomology(&node.link)?;
    GradedBasis::new(upper_classes(node, &link, "x", true))
}

/// Absolute cohomology of the disc: the constants.
pub fn disc_n(_m: usize) -> GradedBasis {
    GradedBasis::new(vec![class(0, "1".into())]).expect("single class")
}

/// Relative cohomology of the disc: the volume form in degree `m`.
pub fn disc_d(m: usize) -> GradedBasis {
    GradedBasis::new(vec![class(m, format!("vol(D{m})"))]).expect("single class")
}

/// Neumann factor: a cone or disc attracting direction.
pub fn neumann(factor: &SpaceExpr) -> Result<GradedBasis> {
    match factor {
        SpaceExpr::Cone(_) => cone_n(factor),
        SpaceExpr::Disc(m) => Ok(disc_n(*m)),
        other => Err(Error::InvalidProblem(format!(
            "{other} is not a cone or disc factor"
        ))),
    }
}

/// Dirichlet factor: a cone or disc expanding direction.
pub fn dirichlet(factor: &SpaceExpr) -> Result<GradedBasis> {
    match factor {
        SpaceExpr::Cone(_) => cone_d(factor),
        SpaceExpr::Disc(m) => Ok(disc_d(*m)),
        other => Err(Error::InvalidProblem(format!(
            "{other} is not a cone or disc factor"
        ))),
    }
}

/// Cohomology of the suspension `Σ(Z)` with the same subspace at both points.
pub fn suspension_cohomology(s: &SpaceExpr) -> Result<GradedBasis> {
    let node = match s {
        SpaceExpr::Suspension(n) => n,
        other => return Err(Error::InvalidSpace(format!("{other} is not a suspension"))),
    };
    let link = global_cohomology(&node.link)?;
    let mut classes = lower_classes(node, &link);
    classes.extend(upper_classes(node, &link, "φ", false));
    GradedBasis::new(classes)
}

/// Tensor product of labelled bases.
pub fn kunneth(a: &GradedBasis, b: &GradedBasis) -> Result<GradedBasis> {
    let classes = a
        .classes()
        .iter()
        .flat_map(|x| {
            b.classes()
                .iter()
                .map(move |y| class(x.degree + y.degree, format!("{}⊗{}", x.label, y.label)))
        })
        .collect();
    GradedBasis::new(classes)
}

/// Global cohomology of a compact expression.
pub fn global_cohomology(s: &SpaceExpr) -> Result<GradedBasis> {
    match s {
        SpaceExpr::Cone(_) | SpaceExpr::Disc(_) => Err(Error::NotGlobal(s.to_string())),
        SpaceExpr::Suspension(_) => suspension_cohomology(s),
        SpaceExpr::Product(a, b) => kunneth(&global_cohomology(a)?, &global_cohomology(b)?),
        prim => primitive_cohomology(prim),
    }
}
