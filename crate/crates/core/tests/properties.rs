//! Randomized invariants over the constructor grammar. Set
//! `STRATA_MORSE_SEED` to reproduce a failing sample.

use std::sync::Arc;

use num_rational::Ratio;
use rand::seq::SliceRandom;
use rand::Rng;

use strata_morse::cohomology::global_cohomology;
use strata_morse::morse::{flip_problem, morse_polynomial, MorseProblem};
use strata_morse::perversity::{all_self_dual, transform_perversity, Subspace, Transform};
use strata_morse::sample::{s2_times_s2, surface, Sampler};
use strata_morse::space::{middle_structure, SpaceExpr};
use strata_morse::spectral::{assemble_mode_operator, mode_spectrum, SpectralModel};

const CASES: usize = 300;

fn ambients() -> Vec<Arc<strata_morse::space::MiddleStructure>> {
    [SpaceExpr::Torus(2), surface(2), s2_times_s2()]
        .iter()
        .map(|s| Arc::new(middle_structure(s).unwrap()))
        .collect()
}

#[test]
fn subspace_laws() {
    let mut s = Sampler::from_env();
    let ambients = ambients();
    for _ in 0..CASES {
        let amb = ambients.choose(s.rng()).unwrap().clone();
        let n = amb.dim();
        let w = Subspace::new(amb, s.span(n)).unwrap();
        let perp = w.orthocomplement();
        assert_eq!(perp.orthocomplement(), w);
        assert_eq!(w.dim() + perp.dim(), n);
        let star = w.star_image().unwrap();
        assert_eq!(star.dim(), w.dim());
        assert_eq!(star.star_image().unwrap(), w);
        assert_eq!(
            w.is_self_dual().unwrap(),
            w.dual().unwrap().is_self_dual().unwrap()
        );
    }
}

#[test]
fn adjoint_transform_is_involution() {
    let mut s = Sampler::from_env();
    for _ in 0..CASES {
        let x = s.space(2);
        let twice = transform_perversity(
            &transform_perversity(&x, Transform::Adjoint).unwrap(),
            Transform::Adjoint,
        );
        assert_eq!(twice.unwrap(), x);
    }
}

#[test]
fn kunneth_and_dimension() {
    let mut s = Sampler::from_env();
    for _ in 0..CASES {
        let a = s.space(1);
        let b = s.link(1);
        let prod = SpaceExpr::product(a.clone(), b.clone());
        assert_eq!(prod.dim(), a.dim() + b.dim());
        let pa = global_cohomology(&a).unwrap().poly();
        let pb = global_cohomology(&b).unwrap().poly();
        assert_eq!(global_cohomology(&prod).unwrap().poly(), pa.mul(&pb));
    }
}

#[test]
fn flip_and_reordering() {
    let mut s = Sampler::from_env();
    for _ in 0..CASES {
        let p = s.problem(2).unwrap();
        assert_eq!(flip_problem(&flip_problem(&p)).components, p.components);
        let mut comps = p.components.clone();
        comps.shuffle(s.rng());
        let shuffled = MorseProblem::new(p.label.clone(), p.space.clone(), comps).unwrap();
        assert_eq!(
            morse_polynomial(&shuffled).unwrap(),
            morse_polynomial(&p).unwrap()
        );
    }
}

#[test]
fn self_dual_height_functions_reverse() {
    let mut s = Sampler::from_env();
    for _ in 0..CASES {
        let x = s.self_dual_space(2);
        assert!(all_self_dual(&x).unwrap());
        let p = strata_morse::morse::suspension_height_problem(&x).unwrap();
        let n = p.dim();
        let m = morse_polynomial(&p).unwrap();
        assert_eq!(
            m.reverse(n).unwrap(),
            morse_polynomial(&flip_problem(&p)).unwrap(),
            "{x}"
        );
    }
}

#[test]
fn random_mode_operators_are_exact_complexes() {
    let mut s = Sampler::from_env();
    for _ in 0..12 {
        let rng = s.rng();
        let n = rng.gen_range(50..70);
        let eps = Ratio::new(rng.gen_range(0..40), rng.gen_range(1..4));
        let model = if rng.gen_bool(0.5) {
            SpectralModel::spindle_circle(n, 2, vec![]).unwrap()
        } else {
            let w: Vec<Vec<i64>> = match rng.gen_range(0..4) {
                0 => vec![],
                1 => vec![vec![1, 0], vec![0, 1]],
                _ => vec![vec![rng.gen_range(-2..=2), rng.gen_range(1..=2)]],
            };
            SpectralModel::suspension_torus2(w, n, 2, vec![]).unwrap()
        };
        let mode: Vec<i64> = (0..model.circles())
            .map(|_| rng.gen_range(-2..=2))
            .collect();
        let op = assemble_mode_operator(&model, &mode, eps).unwrap();
        assert!(op.complex_defect() < 1e-13);
        assert!(op.asymmetry() < 1e-12);
        let sp = mode_spectrum(&model, &mode, eps).unwrap();
        assert!(sp.pairing_error < 1e-8, "{mode:?} {}", sp.pairing_error);
        let min = sp
            .eigenvalues
            .iter()
            .flatten()
            .copied()
            .fold(f64::INFINITY, f64::min);
        assert!(min >= -1e-8);
    }
}
