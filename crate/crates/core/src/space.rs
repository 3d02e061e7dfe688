//! Space expressions: primitives glued by cones, suspensions and products.
//!
//! Each cone and suspension node carries its perversity subspace, stored
//! relative to the middle-degree cohomology of that node's link. Strata are
//! implicit in the tree: every node is a singular stratum whose link is its
//! child.

use std::collections::HashSet;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::cohomology::global_cohomology;
use crate::error::{Error, Result};
use crate::perversity::Subspace;
use crate::poly::GradedPoly;

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Class {
    pub degree: usize,
    pub label: String,
}

/// Labelled basis of a graded cohomology space.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize)]
#[serde(into = "Vec<Class>")]
pub struct GradedBasis {
    classes: Vec<Class>,
}

impl From<GradedBasis> for Vec<Class> {
    fn from(b: GradedBasis) -> Self {
        b.classes
    }
}

impl GradedBasis {
    /// Sorts classes by degree (stable within a degree) and rejects repeated labels.
    pub fn new(mut classes: Vec<Class>) -> Result<Self> {
        let mut seen = HashSet::new();
        if let Some(dup) = classes.iter().find(|c| !seen.insert(c.label.as_str())) {
            return Err(Error::InvalidSpace(format!(
                "duplicate class label {:?}",
                dup.label
            )));
        }
        classes.sort_by_key(|c| c.degree);
        Ok(GradedBasis { classes })
    }

    pub fn classes(&self) -> &[Class] {
        &self.classes
    }

    pub fn in_degree(&self, degree: usize) -> impl Iterator<Item = &Class> + '_ {
        self.classes.iter().filter(move |c| c.degree == degree)
    }

    pub fn labels_in_degree(&self, degree: usize) -> Vec<String> {
        self.in_degree(degree).map(|c| c.label.clone()).collect()
    }

    pub fn poly(&self) -> GradedPoly {
        self.classes
            .iter()
            .map(|c| GradedPoly::monomial(c.degree, 1))
            .sum()
    }

    pub fn max_degree(&self) -> Option<usize> {
        self.classes.iter().map(|c| c.degree).max()
    }
}

/// Hodge star on a middle basis; row `i` holds the coordinates of `⋆e_i`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct StarMatrix {
    rows: Vec<Vec<i64>>,
}

impl StarMatrix {
    pub fn rows(&self) -> &[Vec<i64>] {
        &self.rows
    }

    pub fn apply(&self, v: &[i64]) -> Vec<i64> {
        let n = self.rows.len();
        (0..n)
            .map(|j| v.iter().zip(&self.rows).map(|(c, r)| c * r[j]).sum())
            .collect()
    }
}

/// Middle-degree cohomology of an even-dimensional link with its declared
/// orthonormal basis and, when known, the Hodge star on it.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MiddleStructure {
    owner: String,
    link_dim: usize,
    basis: Vec<String>,
    star: Option<StarMatrix>,
}

impl MiddleStructure {
    /// Checks the star is square and squares to `(-1)^k` with `k = link_dim / 2`.
    pub fn new(
        owner: impl Into<String>,
        link_dim: usize,
        basis: Vec<String>,
        star: Option<Vec<Vec<i64>>>,
    ) -> Result<Self> {
        let owner = owner.into();
        let n = basis.len();
        let star = match star {
            None => None,
            Some(rows) => {
                if !link_dim.is_multiple_of(2) {
                    return Err(Error::InvalidSpace(format!(
                        "{owner}: star structure on an odd-dimensional space"
                    )));
                }
                if rows.len() != n || rows.iter().any(|r| r.len() != n) {
                    return Err(Error::InvalidSpace(format!(
                        "{owner}: star must be a {n}x{n} matrix"
                    )));
                }
                let star = StarMatrix { rows };
                let sign = if (link_dim / 2).is_multiple_of(2) { 1 } else { -1 };
                for i in 0..n {
                    let mut e = vec![0; n];
                    e[i] = 1;
                    let twice = star.apply(&star.apply(&e));
                    let expected: Vec<i64> = e.iter().map(|x| sign * x).collect();
                    if twice != expected {
                        return Err(Error::InvalidSpace(format!(
                            "{owner}: star∘star must equal {sign}·identity"
                        )));
                    }
                }
                Some(star)
            }
        };
        Ok(MiddleStructure {
            owner,
            link_dim,
            basis,
            star,
        })
    }

    /// Zero middle cohomology (odd links, spheres, ...); trivially star-equipped.
    pub fn empty(owner: impl Into<String>, link_dim: usize) -> Self {
        MiddleStructure {
            owner: owner.into(),
            link_dim,
            basis: Vec::new(),
            star: Some(StarMatrix { rows: Vec::new() }),
        }
    }

    pub fn owner(&self) -> &str {
        &self.owner
    }

    pub fn link_dim(&self) -> usize {
        self.link_dim
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[String] {
        &self.basis
    }

    pub fn star(&self) -> Option<&StarMatrix> {
        self.star.as_ref()
    }
}

/// User-described closed smooth manifold (or any space given by its cohomology).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SmoothSpace {
    pub name: String,
    pub dim: usize,
    pub basis: GradedBasis,
    pub middle: Option<Arc<MiddleStructure>>,
}

impl SmoothSpace {
    pub fn new(
        name: impl Into<String>,
        dim: usize,
        classes: Vec<Class>,
        middle_star: Option<Vec<Vec<i64>>>,
    ) -> Result<Self> {
        let name = name.into();
        let basis = GradedBasis::new(classes)?;
        if let Some(bad) = basis.classes().iter().find(|c| c.degree > dim) {
            return Err(Error::InvalidSpace(format!(
                "{name}: class {} in degree {} above dimension {dim}",
                bad.label, bad.degree
            )));
        }
        let middle = match middle_star {
            None => None,
            Some(star) => {
                if !dim.is_multiple_of(2) {
                    return Err(Error::InvalidSpace(format!(
                        "{name}: middle structure on an odd-dimensional space"
                    )));
                }
                let labels = basis.labels_in_degree(dim / 2);
                Some(Arc::new(MiddleStructure::new(
                    name.clone(),
                    dim,
                    labels,
                    Some(star),
                )?))
            }
        };
        Ok(SmoothSpace {
            name,
            dim,
            basis,
            middle,
        })
    }
}

/// A cone or suspension node: the link and the perversity subspace chosen at
/// the singular stratum (both suspension points share it).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Node {
    pub link: SpaceExpr,
    pub w: Subspace,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum SpaceExpr {
    Point,
    Circle,
    Torus(usize),
    Sphere(usize),
    Smooth(Arc<SmoothSpace>),
    /// Only valid as a stable/unstable factor of a critical component.
    Disc(usize),
    Cone(Box<Node>),
    Suspension(Box<Node>),
    Product(Box<SpaceExpr>, Box<SpaceExpr>),
}

fn build_node(link: SpaceExpr, w: Vec<Vec<i64>>) -> Result<Node> {
    let ambient = Arc::new(node_ambient(&link)?);
    let w = Subspace::new(ambient, w)?;
    if link.dim() % 2 == 1 && !w.is_zero() {
        return Err(Error::InvalidSpace(format!(
            "perversity over odd-dimensional link {link} must be zero"
        )));
    }
    Ok(Node { link, w })
}

fn node_ambient(link: &SpaceExpr) -> Result<MiddleStructure> {
    if link.dim() == 0 {
        return Err(Error::InvalidSpace(format!(
            "link {link} must have positive dimension"
        )));
    }
    if !link.is_global() {
        return Err(Error::InvalidSpace(format!(
            "link {link} must be compact (no cone or disc nodes)"
        )));
    }
    Ok(middle_basis(link)?.unwrap_or_else(|| MiddleStructure::empty(link.to_string(), link.dim())))
}

impl SpaceExpr {
    pub fn cone(link: SpaceExpr, w: Vec<Vec<i64>>) -> Result<Self> {
        Ok(SpaceExpr::Cone(Box::new(build_node(link, w)?)))
    }

    pub fn suspension(link: SpaceExpr, w: Vec<Vec<i64>>) -> Result<Self> {
        Ok(SpaceExpr::Suspension(Box::new(build_node(link, w)?)))
    }

    pub fn product(left: SpaceExpr, right: SpaceExpr) -> Self {
        SpaceExpr::Product(Box::new(left), Box::new(right))
    }

    pub fn smooth(space: SmoothSpace) -> Self {
        SpaceExpr::Smooth(Arc::new(space))
    }

    pub fn dim(&self) -> usize {
        match self {
            SpaceExpr::Point => 0,
            SpaceExpr::Circle => 1,
            SpaceExpr::Torus(k) | SpaceExpr::Sphere(k) | SpaceExpr::Disc(k) => *k,
            SpaceExpr::Smooth(s) => s.dim,
            SpaceExpr::Cone(n) | SpaceExpr::Suspension(n) => n.link.dim() + 1,
            SpaceExpr::Product(a, b) => a.dim() + b.dim(),
        }
    }

    /// Compact spaces built without cone or disc nodes.
    pub fn is_global(&self) -> bool {
        match self {
            SpaceExpr::Cone(_) | SpaceExpr::Disc(_) => false,
            SpaceExpr::Suspension(n) => n.link.is_global(),
            SpaceExpr::Product(a, b) => a.is_global() && b.is_global(),
            _ => true,
        }
    }

    pub fn is_primitive(&self) -> bool {
        matches!(
            self,
            SpaceExpr::Point
                | SpaceExpr::Circle
                | SpaceExpr::Torus(_)
                | SpaceExpr::Sphere(_)
                | SpaceExpr::Smooth(_)
        )
    }

    /// Cone/suspension nodes in preorder.
    pub fn nodes(&self) -> Vec<&Node> {
        let mut out = Vec::new();
        self.collect_nodes(&mut out);
        out
    }

    fn collect_nodes<'a>(&'a self, out: &mut Vec<&'a Node>) {
        match self {
            SpaceExpr::Cone(n) | SpaceExpr::Suspension(n) => {
                out.push(n);
                n.link.collect_nodes(out);
            }
            SpaceExpr::Product(a, b) => {
                a.collect_nodes(out);
                b.collect_nodes(out);
            }
            _ => {}
        }
    }

    pub fn node_subspaces(&self) -> Vec<&Subspace> {
        self.nodes().into_iter().map(|n| &n.w).collect()
    }

    /// Rebuilds the tree with every node subspace replaced by `f(w)`,
    /// innermost nodes first.
    pub fn map_perversity(&self, f: &dyn Fn(&Subspace) -> Result<Subspace>) -> Result<SpaceExpr> {
        Ok(match self {
            SpaceExpr::Cone(n) | SpaceExpr::Suspension(n) => {
                let link = n.link.map_perversity(f)?;
                let w = f(&n.w)?;
                let ambient = Arc::new(node_ambient(&link)?);
                let node = Box::new(Node {
                    w: w.rebase(ambient)?,
                    link,
                });
                if matches!(self, SpaceExpr::Cone(_)) {
                    SpaceExpr::Cone(node)
                } else {
                    SpaceExpr::Suspension(node)
                }
            }
            SpaceExpr::Product(a, b) => {
                SpaceExpr::product(a.map_perversity(f)?, b.map_perversity(f)?)
            }
            other => other.clone(),
        })
    }
}

/// True iff every node's link is odd-dimensional or has zero middle cohomology.
pub fn witt_check(s: &SpaceExpr) -> bool {
    s.nodes()
        .iter()
        .all(|n| n.link.dim() % 2 == 1 || n.w.ambient().dim() == 0)
}

fn torus_label(mask: usize, k: usize) -> String {
    if mask == 0 {
        return "1".into();
    }
    (0..k)
        .filter(|j| mask & (1 << j) != 0)
        .map(|j| format!("dθ{}", j + 1))
        .collect::<Vec<_>>()
        .join("∧")
}

/// De Rham cohomology of a primitive space with labelled representatives.
pub fn primitive_cohomology(s: &SpaceExpr) -> Result<GradedBasis> {
    let class = |degree, label: &str| Class {
        degree,
        label: label.to_string(),
    };
    let classes = match s {
        SpaceExpr::Point => vec![class(0, "1")],
        SpaceExpr::Circle => vec![class(0, "1"), class(1, "dθ")],
        SpaceExpr::Torus(k) => {
            let k = *k;
            if k == 0 || k > 16 {
                return Err(Error::InvalidSpace(format!(
                    "torus dimension {k} out of range"
                )));
            }
            let mut masks: Vec<usize> = (0..1usize << k).collect();
            // degree first, then lexicographic in the dθ indices
            masks.sort_by_key(|m| {
                let bits: Vec<usize> = (0..k).filter(|j| m & (1 << j) != 0).collect();
                (bits.len(), bits)
            });
            masks
                .into_iter()
                .map(|m| class(m.count_ones() as usize, &torus_label(m, k)))
                .collect()
        }
        SpaceExpr::Sphere(k) => {
            if *k == 0 {
                return Err(Error::InvalidSpace(
                    "sphere dimension must be positive".into(),
                ));
            }
            vec![class(0, "1"), class(*k, "vol")]
        }
        SpaceExpr::Smooth(sm) => return Ok(sm.basis.clone()),
        other => return Err(Error::NotPrimitive(other.to_string())),
    };
    GradedBasis::new(classes)
}

/// Middle-degree basis of an even-dimensional compact space, `None` when the
/// dimension is odd. The star is attached when it is known: built in for
/// `T^2`, user supplied for smooth spaces, trivial when the middle
/// cohomology vanishes.
pub fn middle_basis(s: &SpaceExpr) -> Result<Option<MiddleStructure>> {
    let dim = s.dim();
    if dim % 2 == 1 {
        return Ok(None);
    }
    let owner = s.to_string();
    match s {
        SpaceExpr::Torus(2) => Ok(Some(MiddleStructure::new(
            owner,
            2,
            vec!["dθ1".into(), "dθ2".into()],
            Some(vec![vec![0, 1], vec![-1, 0]]),
        )?)),
        SpaceExpr::Smooth(sm) if sm.middle.is_some() => {
            Ok(Some(sm.middle.as_deref().cloned().expect("checked")))
        }
        _ => {
            let labels = global_cohomology(s)?.labels_in_degree(dim / 2);
            if labels.is_empty() {
                Ok(Some(MiddleStructure::empty(owner, dim)))
            } else {
                Ok(Some(MiddleStructure::new(owner, dim, labels, None)?))
            }
        }
    }
}

/// Middle structure with a star, required for duality questions.
pub fn middle_structure(s: &SpaceExpr) -> Result<MiddleStructure> {
    let m = middle_basis(s)?.ok_or_else(|| {
        Error::InvalidSpace(format!("{s} is odd-dimensional and has no middle degree"))
    })?;
    if m.star().is_none() {
        return Err(Error::MissingStar(s.to_string()));
    }
    Ok(m)
}

fn superscript(n: usize) -> String {
    const DIGITS: [char; 10] = ['⁰', '¹', '²', '³', '⁴', '⁵', '⁶', '⁷', '⁸', '⁹'];
    n.to_string()
        .chars()
        .map(|c| DIGITS[c.to_digit(10).unwrap() as usize])
        .collect()
}

impl fmt::Display for SpaceExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SpaceExpr::Point => write!(f, "pt"),
            SpaceExpr::Circle => write!(f, "S¹"),
            SpaceExpr::Torus(k) => write!(f, "T{}", superscript(*k)),
            SpaceExpr::Sphere(k) => write!(f, "S{}", superscript(*k)),
            SpaceExpr::Disc(k) => write!(f, "D{}", superscript(*k)),
            SpaceExpr::Smooth(s) => write!(f, "{}", s.name),
            SpaceExpr::Cone(n) => write!(f, "C({}; {})", n.link, n.w),
            SpaceExpr::Suspension(n) => write!(f, "Σ({}; {})", n.link, n.w),
            SpaceExpr::Product(a, b) => write!(f, "({a} × {b})"),
        }
    }
}

/// JSON grammar for space expressions.
///
/// `"point"`, `"circle"`, `{"torus":2}`, `{"sphere":2}`, `{"disc":3}`,
/// `{"smooth":{...}}`, `{"cone":{"link":..,"w":{"span":[[1,0]]}}}`,
/// `{"suspension":{..}}`, `{"product":[a, b]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpaceSpec {
    Point,
    Circle,
    Torus(usize),
    Sphere(usize),
    Disc(usize),
    Smooth(SmoothSpec),
    Cone(NodeSpec),
    Suspension(NodeSpec),
    Product(Box<SpaceSpec>, Box<SpaceSpec>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NodeSpec {
    pub link: Box<SpaceSpec>,
    #[serde(default)]
    pub w: SubspaceSpec,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SubspaceSpec {
    pub span: Vec<Vec<i64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SmoothSpec {
    pub name: String,
    pub dim: usize,
    pub classes: Vec<Class>,
    /// Star on the middle-degree classes, rows in class order.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub star: Option<Vec<Vec<i64>>>,
}

impl SpaceSpec {
    fn build(&self, inside: bool) -> Result<SpaceExpr> {
        Ok(match self {
            SpaceSpec::Point => SpaceExpr::Point,
            SpaceSpec::Circle => SpaceExpr::Circle,
            SpaceSpec::Torus(k) => {
                primitive_cohomology(&SpaceExpr::Torus(*k))?;
                SpaceExpr::Torus(*k)
            }
            SpaceSpec::Sphere(k) => {
                primitive_cohomology(&SpaceExpr::Sphere(*k))?;
                SpaceExpr::Sphere(*k)
            }
            SpaceSpec::Disc(m) => {
                if inside {
                    return Err(Error::InvalidSpace(
                        "discs only appear as critical-component factors".into(),
                    ));
                }
                if *m == 0 {
                    return Err(Error::InvalidSpace(
                        "disc dimension must be positive".into(),
                    ));
                }
                SpaceExpr::Disc(*m)
            }
            SpaceSpec::Smooth(s) => SpaceExpr::smooth(SmoothSpace::new(
                s.name.clone(),
                s.dim,
                s.classes.clone(),
                s.star.clone(),
            )?),
            SpaceSpec::Cone(n) => SpaceExpr::cone(n.link.build(true)?, n.w.span.clone())?,
            SpaceSpec::Suspension(n) => {
                SpaceExpr::suspension(n.link.build(true)?, n.w.span.clone())?
            }
            SpaceSpec::Product(a, b) => SpaceExpr::product(a.build(true)?, b.build(true)?),
        })
    }
}

impl TryFrom<SpaceSpec> for SpaceExpr {
    type Error = Error;
    fn try_from(spec: SpaceSpec) -> Result<Self> {
        spec.build(false)
    }
}

impl From<&SpaceExpr> for SpaceSpec {
    fn from(s: &SpaceExpr) -> Self {
        let node = |n: &Node| NodeSpec {
            link: Box::new((&n.link).into()),
            w: SubspaceSpec {
                span: n.w.rows().to_vec(),
            },
        };
        match s {
            SpaceExpr::Point => SpaceSpec::Point,
            SpaceExpr::Circle => SpaceSpec::Circle,
            SpaceExpr::Torus(k) => SpaceSpec::Torus(*k),
            SpaceExpr::Sphere(k) => SpaceSpec::Sphere(*k),
            SpaceExpr::Disc(k) => SpaceSpec::Disc(*k),
            SpaceExpr::Smooth(sm) => SpaceSpec::Smooth(SmoothSpec {
                name: sm.name.clone(),
                dim: sm.dim,
                classes: sm.basis.classes().to_vec(),
                star: sm
                    .middle
                    .as_ref()
                    .and_then(|m| m.star().map(|st| st.rows().to_vec())),
            }),
            SpaceExpr::Cone(n) => SpaceSpec::Cone(node(n)),
            SpaceExpr::Suspension(n) => SpaceSpec::Suspension(node(n)),
            SpaceExpr::Product(a, b) => {
                SpaceSpec::Product(Box::new((&**a).into()), Box::new((&**b).into()))
            }
        }
    }
}

impl Serialize for SpaceExpr {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        SpaceSpec::from(self).serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for SpaceExpr {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let spec = SpaceSpec::deserialize(deserializer)?;
        SpaceExpr::try_from(spec).map_err(serde::de::Error::custom)
    }
}
