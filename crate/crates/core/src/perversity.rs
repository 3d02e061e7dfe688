//! Subspaces of middle-degree link cohomology and the perversity transforms
//! built from them.
//!
//! A subspace is kept in a canonical form: the reduced row-echelon basis over
//! the rationals with each row scaled to a primitive integer vector whose
//! leading entry is positive. Two subspaces are equal exactly when their
//! canonical rows agree, independent of the spanning set they were built from.

use std::fmt;
use std::sync::Arc;

use num_integer::Integer;
use num_rational::Ratio;

use crate::error::{Error, Result};
use crate::space::{MiddleStructure, SpaceExpr};

type Q = Ratio<i128>;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Subspace {
    ambient: Arc<MiddleStructure>,
    rows: Vec<Vec<i64>>,
}

/// Which perversity transform to apply at every node of an expression.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Transform {
    /// `W -> W^⊥`, the perversity of the adjoint complex.
    Adjoint,
    /// `W -> ⋆(W^⊥)`, the perversity of the Poincaré dual complex.
    PoincareDual,
}

fn rref(vectors: &[Vec<i64>], width: usize) -> Vec<Vec<Q>> {
    let mut m: Vec<Vec<Q>> = vectors
        .iter()
        .map(|v| v.iter().map(|&x| Q::from_integer(x as i128)).collect())
        .collect();
    let mut rank = 0;
    for col in 0..width {
        let Some(pivot) = (rank..m.len()).find(|&r| m[r][col] != Q::from_integer(0)) else {
            continue;
        };
        m.swap(rank, pivot);
        let inv = m[rank][col].recip();
        for x in m[rank].iter_mut() {
            *x *= inv;
        }
        let pivot_row = m[rank].clone();
        for (r, row) in m.iter_mut().enumerate() {
            if r != rank && row[col] != Q::from_integer(0) {
                let f = row[col];
                for (x, p) in row.iter_mut().zip(&pivot_row) {
                    *x -= f * p;
                }
            }
        }
        rank += 1;
    }
    m.truncate(rank);
    m
}

fn primitive(row: &[Q]) -> Vec<i64> {
    let lcm = row.iter().fold(1i128, |acc, x| acc.lcm(x.denom()));
    let ints: Vec<i128> = row.iter().map(|x| x.numer() * (lcm / x.denom())).collect();
    let g = ints.iter().fold(0i128, |acc, &x| acc.gcd(&x)).max(1);
    let sign = match ints.iter().find(|&&x| x != 0) {
        Some(&x) if x < 0 => -1,
        _ => 1,
    };
    ints.iter()
        .map(|&x| i64::try_from(sign * x / g).expect("subspace coordinate overflow"))
        .collect()
}

impl Subspace {
    /// Span of `vectors`, given as coordinates in the ambient middle basis.
    pub fn new(ambient: Arc<MiddleStructure>, vectors: Vec<Vec<i64>>) -> Result<Self> {
        let width = ambient.dim();
        if let Some(bad) = vectors.iter().find(|v| v.len() != width) {
            return Err(Error::InvalidSubspace(format!(
                "vector {bad:?} has length {}, middle cohomology has dimension {width}",
                bad.len()
            )));
        }
        let rows = rref(&vectors, width).iter().map(|r| primitive(r)).collect();
        Ok(Subspace { ambient, rows })
    }

    pub fn zero(ambient: Arc<MiddleStructure>) -> Self {
        Subspace {
            ambient,
            rows: Vec::new(),
        }
    }

    pub fn full(ambient: Arc<MiddleStructure>) -> Self {
        let n = ambient.dim();
        let id = (0..n)
            .map(|i| (0..n).map(|j| i64::from(i == j)).collect())
            .collect();
        Subspace { ambient, rows: id }
    }

    pub fn ambient(&self) -> &Arc<MiddleStructure> {
        &self.ambient
    }

    /// Canonical spanning rows.
    pub fn rows(&self) -> &[Vec<i64>] {
        &self.rows
    }

    pub fn dim(&self) -> usize {
        self.rows.len()
    }

    pub fn is_zero(&self) -> bool {
        self.rows.is_empty()
    }

    /// Same subspace re-anchored in another ambient of equal dimension.
    pub(crate) fn rebase(&self, ambient: Arc<MiddleStructure>) -> Result<Self> {
        Subspace::new(ambient, self.rows.clone())
    }

    /// Orthogonal complement under the declared orthonormal inner product.
    pub fn orthocomplement(&self) -> Subspace {
        let n = self.ambient.dim();
        let reduced = rref(&self.rows, n);
        let pivots: Vec<usize> = reduced
            .iter()
            .map(|r| r.iter().position(|x| *x != Q::from_integer(0)).unwrap())
            .collect();
        let mut kernel = Vec::new();
        for free in (0..n).filter(|c| !pivots.contains(c)) {
            let mut v = vec![Q::from_integer(0); n];
            v[free] = Q::from_integer(1);
            for (r, &p) in reduced.iter().zip(&pivots) {
                v[p] = -r[free];
            }
            kernel.push(primitive(&v));
        }
        Subspace::new(self.ambient.clone(), kernel).expect("kernel vectors have ambient length")
    }

    /// Image under the Hodge star of the ambient middle structure.
    pub fn star_image(&self) -> Result<Subspace> {
        let star = self
            .ambient
            .star()
            .ok_or_else(|| Error::MissingStar(self.ambient.owner().to_string()))?;
        let mapped = self.rows.iter().map(|v| star.apply(v)).collect();
        Subspace::new(self.ambient.clone(), mapped)
    }

    /// `⋆(W^⊥)`.
    pub fn dual(&self) -> Result<Subspace> {
        self.orthocomplement().star_image()
    }

    /// Whether `W = ⋆(W^⊥)`.
    pub fn is_self_dual(&self) -> Result<bool> {
        Ok(&self.dual()? == self)
    }

    pub fn transformed(&self, mode: Transform) -> Result<Subspace> {
        match mode {
            Transform::Adjoint => Ok(self.orthocomplement()),
            Transform::PoincareDual => self.dual(),
        }
    }

    /// Labels of the spanning rows as linear combinations of the basis labels.
    pub fn labels(&self) -> Vec<String> {
        self.rows
            .iter()
            .map(|v| combination_label(v, self.ambient.basis()))
            .collect()
    }
}

/// Renders `Σ v_i e_i` with the given basis labels, e.g. `dθ1-dθ2`.
pub fn combination_label(v: &[i64], basis: &[String]) -> String {
    let mut out = String::new();
    for (c, label) in v.iter().zip(basis).filter(|(c, _)| **c != 0) {
        let sign = if *c < 0 {
            "-"
        } else if out.is_empty() {
            ""
        } else {
            "+"
        };
        out.push_str(sign);
        if c.abs() != 1 {
            out.push_str(&c.abs().to_string());
        }
        out.push_str(label);
    }
    if out.is_empty() {
        out.push('0');
    }
    out
}

impl fmt::Display for Subspace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.rows.is_empty() {
            return write!(f, "0");
        }
        write!(f, "<{}>", self.labels().join(", "))
    }
}

/// Replaces every node subspace `W` of `s` by `W^⊥` or `⋆(W^⊥)`.
pub fn transform_perversity(s: &SpaceExpr, mode: Transform) -> Result<SpaceExpr> {
    s.map_perversity(&|w: &Subspace| w.transformed(mode))
}

/// Whether every node subspace of `s` is self-dual. Nodes over spaces without
/// a star structure make the whole expression fail with `MissingStar`.
pub fn all_self_dual(s: &SpaceExpr) -> Result<bool> {
    let mut ok = true;
    for w in s.node_subspaces() {
        ok &= w.is_self_dual()?;
    }
    Ok(ok)
}
