//! Seeded random spaces and Morse problems drawn from the constructor grammar.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::morse::{
    product_problem, smooth_critical_point, suspension_height_problem, MorseProblem,
};
use crate::perversity::Subspace;
use crate::space::{middle_basis, Class, SmoothSpace, SpaceExpr};

pub const SEED_VAR: &str = "STRATA_MORSE_SEED";
pub const DEFAULT_SEED: u64 = 20_241_014;

/// Seed from `STRATA_MORSE_SEED`, falling back to [`DEFAULT_SEED`].
pub fn seed_from_env() -> u64 {
    std::env::var(SEED_VAR)
        .ok()
        .and_then(|s| s.trim().parse().ok())
        .unwrap_or(DEFAULT_SEED)
}

fn class(degree: usize, label: impl Into<String>) -> Class {
    Class {
        degree,
        label: label.into(),
    }
}

/// Closed orientable surface of genus `g` with the symplectic star on `H¹`.
pub fn surface(g: usize) -> SpaceExpr {
    let mut classes = vec![class(0, "1")];
    let mut star = vec![vec![0i64; 2 * g]; 2 * g];
    for i in 0..g {
        classes.push(class(1, format!("a{}", i + 1)));
        classes.push(class(1, format!("b{}", i + 1)));
        star[2 * i][2 * i + 1] = 1;
        star[2 * i + 1][2 * i] = -1;
    }
    classes.push(class(2, "vol"));
    SpaceExpr::smooth(
        SmoothSpace::new(format!("Σ_{g}"), 2, classes, Some(star)).expect("valid surface"),
    )
}

pub fn s2_times_s2() -> SpaceExpr {
    let classes = vec![class(0, "1"), class(2, "a"), class(2, "b"), class(4, "vol")];
    SpaceExpr::smooth(
        SmoothSpace::new("S²×S²", 4, classes, Some(vec![vec![0, 1], vec![1, 0]])).expect("valid"),
    )
}

pub fn cp2() -> SpaceExpr {
    let classes = vec![class(0, "1"), class(2, "ω"), class(4, "ω²")];
    SpaceExpr::smooth(SmoothSpace::new("CP²", 4, classes, Some(vec![vec![1]])).expect("valid"))
}

pub struct Sampler {
    rng: ChaCha8Rng,
}

impl Sampler {
    pub fn new(seed: u64) -> Self {
        Sampler {
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn from_env() -> Self {
        Self::new(seed_from_env())
    }

    pub fn rng(&mut self) -> &mut ChaCha8Rng {
        &mut self.rng
    }

    /// Random spanning set in `Q^dim`, possibly dependent or empty.
    pub fn span(&mut self, dim: usize) -> Vec<Vec<i64>> {
        if dim == 0 {
            return vec![];
        }
        let count = self.rng.gen_range(0..=dim + 1);
        (0..count)
            .map(|_| (0..dim).map(|_| self.rng.gen_range(-2..=2)).collect())
            .collect()
    }

    fn middle_dim(link: &SpaceExpr) -> usize {
        middle_basis(link).ok().flatten().map_or(0, |m| m.dim())
    }

    /// A valid random perversity subspace for a node over `link`.
    pub fn node_span(&mut self, link: &SpaceExpr) -> Vec<Vec<i64>> {
        if link.dim() % 2 == 1 {
            return vec![];
        }
        self.span(Self::middle_dim(link))
    }

    /// A self-dual subspace for `link` when one is easy to produce, otherwise `None`.
    pub fn self_dual_span(&mut self, link: &SpaceExpr) -> Option<Vec<Vec<i64>>> {
        if link.dim() % 2 == 1 {
            return Some(vec![]);
        }
        let m = middle_basis(link).ok()??;
        if m.dim() == 0 {
            return Some(vec![]);
        }
        m.star()?;
        // Lagrangian of the J-type star: one line in each coordinate pair
        let pairs = m.dim() / 2;
        let mut rows = Vec::new();
        for i in 0..pairs {
            let (a, b) = loop {
                let a: i64 = self.rng.gen_range(-3..=3);
                let b: i64 = self.rng.gen_range(-3..=3);
                if a != 0 || b != 0 {
                    break (a, b);
                }
            };
            let mut v = vec![0; m.dim()];
            v[2 * i] = a;
            v[2 * i + 1] = b;
            rows.push(v);
        }
        let ambient = std::sync::Arc::new(m);
        let w = Subspace::new(ambient.clone(), rows.clone()).ok()?;
        if w.is_self_dual().ok()? {
            return Some(rows);
        }
        // the symmetric star of S²×S² is self-dual on a coordinate axis
        let axis = self.rng.gen_range(0..ambient.dim());
        let mut v = vec![0; ambient.dim()];
        v[axis] = 1;
        let w = Subspace::new(ambient, vec![v.clone()]).ok()?;
        w.is_self_dual().ok()?.then_some(vec![v])
    }

    fn primitive(&mut self) -> SpaceExpr {
        match self.rng.gen_range(0..8) {
            0 => SpaceExpr::Circle,
            1 => SpaceExpr::Sphere(self.rng.gen_range(1..=3)),
            2 => SpaceExpr::Torus(self.rng.gen_range(1..=3)),
            3 => SpaceExpr::Torus(2),
            4 => surface(self.rng.gen_range(1..=2)),
            5 => s2_times_s2(),
            6 => cp2(),
            _ => SpaceExpr::Sphere(2),
        }
    }

    /// A compact space usable as a link, nesting suspensions up to `depth`.
    pub fn link(&mut self, depth: usize) -> SpaceExpr {
        match self.rng.gen_range(0..6) {
            0 | 1 if depth > 0 => {
                let z = self.link(depth - 1);
                let w = self.node_span(&z);
                SpaceExpr::suspension(z, w).expect("sampled node is valid")
            }
            2 if depth > 0 => SpaceExpr::product(SpaceExpr::Circle, self.small_primitive()),
            _ => self.primitive(),
        }
    }

    fn small_primitive(&mut self) -> SpaceExpr {
        [SpaceExpr::Circle, SpaceExpr::Sphere(2), SpaceExpr::Torus(2)]
            .choose(&mut self.rng)
            .cloned()
            .expect("non-empty")
    }

    /// A compact stratified space: a suspension, possibly times a primitive.
    pub fn space(&mut self, depth: usize) -> SpaceExpr {
        let z = self.link(depth);
        let w = self.node_span(&z);
        let sus = SpaceExpr::suspension(z, w).expect("sampled node is valid");
        match self.rng.gen_range(0..4) {
            0 => SpaceExpr::product(sus, self.small_primitive()),
            1 => SpaceExpr::product(self.small_primitive(), sus),
            _ => sus,
        }
    }

    /// A link carrying self-dual perversity data at every nested node.
    pub fn self_dual_link(&mut self, depth: usize) -> SpaceExpr {
        loop {
            let candidate = match self.rng.gen_range(0..4) {
                0 | 1 if depth > 0 => {
                    let z = self.self_dual_link(depth - 1);
                    match self.self_dual_span(&z) {
                        Some(w) => SpaceExpr::suspension(z, w).expect("valid"),
                        None => continue,
                    }
                }
                _ => match self.rng.gen_range(0..6) {
                    0 => SpaceExpr::Circle,
                    1 => SpaceExpr::Torus(2),
                    2 => surface(self.rng.gen_range(1..=2)),
                    3 => s2_times_s2(),
                    4 => SpaceExpr::Sphere(self.rng.gen_range(1..=3)),
                    _ => SpaceExpr::Torus(3),
                },
            };
            return candidate;
        }
    }

    /// A global space whose node subspaces are all self-dual.
    pub fn self_dual_space(&mut self, depth: usize) -> SpaceExpr {
        loop {
            let z = self.self_dual_link(depth);
            if let Some(w) = self.self_dual_span(&z) {
                let sus = SpaceExpr::suspension(z, w).expect("valid");
                return match self.rng.gen_range(0..3) {
                    0 => SpaceExpr::product(sus, SpaceExpr::Circle),
                    _ => sus,
                };
            }
        }
    }

    pub fn height_problem(&mut self, depth: usize) -> MorseProblem {
        let s = self.space(depth);
        suspension_height_problem(&s).expect("sampled spaces have one suspension factor")
    }

    /// A perfect Morse function on a closed manifold with `births` extra
    /// cancelling pairs of adjacent indices.
    pub fn smooth_problem(&mut self) -> Result<MorseProblem> {
        let (space, mut indices): (SpaceExpr, Vec<usize>) = match self.rng.gen_range(0..4) {
            0 => {
                let n = self.rng.gen_range(1..=4);
                (SpaceExpr::Sphere(n), vec![0, n])
            }
            1 => {
                let k = self.rng.gen_range(1..=3);
                let idx = (0..1usize << k)
                    .map(|m: usize| m.count_ones() as usize)
                    .collect();
                (SpaceExpr::Torus(k), idx)
            }
            2 => {
                let g = self.rng.gen_range(1..=2);
                let mut idx = vec![0, 2];
                idx.extend(std::iter::repeat_n(1, 2 * g));
                (surface(g), idx)
            }
            _ => (s2_times_s2(), vec![0, 2, 2, 4]),
        };
        let n = space.dim();
        for _ in 0..self.rng.gen_range(0..=2) {
            let i = self.rng.gen_range(0..n);
            indices.extend([i, i + 1]);
        }
        indices.shuffle(&mut self.rng);
        let components = indices
            .iter()
            .enumerate()
            .map(|(j, &i)| smooth_critical_point(format!("p{j}"), n, i))
            .collect::<Result<_>>()?;
        MorseProblem::new(format!("smooth function on {space}"), space, components)
    }

    /// Any problem family: height functions, smooth functions, or products.
    pub fn problem(&mut self, depth: usize) -> Result<MorseProblem> {
        match self.rng.gen_range(0..5) {
            0 | 1 => Ok(self.height_problem(depth)),
            2 => self.smooth_problem(),
            3 => {
                let a = self.height_problem(depth.min(1));
                let b = self.smooth_problem()?;
                product_problem(&a, &b)
            }
            _ => {
                let a = self.height_problem(0);
                let b = self.height_problem(0);
                product_problem(&a, &b)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::perversity::all_self_dual;

    #[test]
    fn deterministic_for_fixed_seed() {
        let a: Vec<String> = (0..20)
            .map(|_| 0)
            .scan(Sampler::new(7), |s, _| Some(s.space(2).to_string()))
            .collect();
        let b: Vec<String> = (0..20)
            .map(|_| 0)
            .scan(Sampler::new(7), |s, _| Some(s.space(2).to_string()))
            .collect();
        assert_eq!(a, b);
    }

    #[test]
    fn self_dual_samples_are_self_dual() {
        let mut s = Sampler::new(3);
        for _ in 0..50 {
            let x = s.self_dual_space(2);
            assert!(all_self_dual(&x).unwrap(), "{x}");
        }
    }

    #[test]
    fn known_stars() {
        assert!(middle_basis(&surface(2)).unwrap().unwrap().star().is_some());
        assert!(middle_basis(&cp2()).unwrap().unwrap().star().is_some());
        assert!(middle_basis(&s2_times_s2())
            .unwrap()
            .unwrap()
            .star()
            .is_some());
    }
}
