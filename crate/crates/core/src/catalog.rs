//! Worked examples shipped as problem files.

use num_rational::Ratio;

use crate::error::Result;
use crate::morse::{
    flip_problem, smooth_critical_point, suspension_height_problem, CriticalComponent, MorseProblem,
};
use crate::perversity::Transform;
use crate::problem::{CohomologyQuery, Problem, ProblemFile};
use crate::space::{Class, SmoothSpace, SpaceExpr};
use crate::spectral::SpectralModel;

pub struct Example {
    pub name: &'static str,
    pub file: ProblemFile,
}

fn sus_t2(w: Vec<Vec<i64>>) -> Result<SpaceExpr> {
    SpaceExpr::suspension(SpaceExpr::Torus(2), w)
}

/// One minimum, three saddles and two maxima on `T²`.
pub fn torus_six_points() -> Result<MorseProblem> {
    let mut comps = vec![smooth_critical_point("min", 2, 0)?];
    for i in 1..=3 {
        comps.push(smooth_critical_point(format!("saddle{i}"), 2, 1)?);
    }
    for i in 1..=2 {
        comps.push(smooth_critical_point(format!("max{i}"), 2, 2)?);
    }
    MorseProblem::new("torus with six critical points", SpaceExpr::Torus(2), comps)
}

pub fn suspension_t2_dtheta1() -> Result<MorseProblem> {
    suspension_height_problem(&sus_t2(vec![vec![1, 0]])?)
}

pub fn double_suspension() -> Result<MorseProblem> {
    suspension_height_problem(&SpaceExpr::suspension(sus_t2(vec![vec![1, 0]])?, vec![])?)
}

/// Height function on `Σ(T²)` with `W = H¹(T²)`.
pub fn suspension_t2_full() -> Result<MorseProblem> {
    suspension_height_problem(&sus_t2(vec![vec![1, 0], vec![0, 1]])?)
}

/// `-h` with the adjoint (zero) perversity on the same suspension.
pub fn suspension_t2_zero_flipped() -> Result<MorseProblem> {
    let adj = suspension_t2_full()?.transform(Transform::Adjoint)?;
    let mut p = flip_problem(&adj);
    p.label = "minus height function on Σ(T²) with W = 0".into();
    Ok(p)
}

fn class(degree: usize, label: &str) -> Class {
    Class {
        degree,
        label: label.into(),
    }
}

/// Circle-action Morse-Bott function on a singular cuspidal surface in `CP³`,
/// entered through its intersection cohomology and local data.
pub fn singular_fano() -> Result<MorseProblem> {
    let x = SmoothSpace::new(
        "X",
        4,
        vec![class(0, "1"), class(2, "ω"), class(4, "ω²")],
        None,
    )?;
    let curve = SmoothSpace::new("F", 2, vec![class(0, "1"), class(2, "vol")], None)?;
    let comps = vec![
        CriticalComponent::new(
            "curve",
            SpaceExpr::smooth(curve),
            vec![SpaceExpr::Disc(2)],
            vec![],
            Ratio::from_integer(0),
        )?,
        CriticalComponent::new(
            "point",
            SpaceExpr::Point,
            vec![],
            vec![SpaceExpr::Disc(4)],
            Ratio::from_integer(1),
        )?,
    ];
    MorseProblem::new("singular Fano surface", SpaceExpr::smooth(x), comps)
}

pub fn self_dual_suspension() -> Result<SpaceExpr> {
    sus_t2(vec![vec![1, 1]])
}

pub fn spindle_model() -> Result<SpectralModel> {
    let eps = [2, 5, 10, 20].map(Ratio::from_integer).to_vec();
    SpectralModel::spindle_circle(400, 3, eps)
}

pub fn torus_suspension_model() -> Result<SpectralModel> {
    let eps = [0, 5, 10, 20].map(Ratio::from_integer).to_vec();
    SpectralModel::suspension_torus2(vec![vec![1, 0]], 200, 2, eps)
}

/// Every shipped example, in a fixed order.
pub fn examples() -> Result<Vec<Example>> {
    let morse = |name, p: MorseProblem| Example {
        name,
        file: ProblemFile::new(Problem::Morse(p)),
    };
    let coh = |name, space| Example {
        name,
        file: ProblemFile::new(Problem::Cohomology(CohomologyQuery { space })),
    };
    let spec = |name, m| Example {
        name,
        file: ProblemFile::new(Problem::Spectral(m)),
    };
    Ok(vec![
        morse("torus_six_points", torus_six_points()?),
        morse("suspension_t2_dtheta1", suspension_t2_dtheta1()?),
        morse("double_suspension", double_suspension()?),
        morse("suspension_t2_full", suspension_t2_full()?),
        morse("suspension_t2_zero_flipped", suspension_t2_zero_flipped()?),
        morse("singular_fano", singular_fano()?),
        coh("torus2", SpaceExpr::Torus(2)),
        coh(
            "suspension_t2_dtheta1_cohomology",
            sus_t2(vec![vec![1, 0]])?,
        ),
        coh("self_dual_suspension", self_dual_suspension()?),
        spec("spindle_circle", spindle_model()?),
        spec("suspension_t2_spectral", torus_suspension_model()?),
    ])
}
