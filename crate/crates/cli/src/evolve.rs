//! Trajectories `t ↦ T_t(x)` (Heisenberg) or `t ↦ T_{*t}(ρ)` (Schrödinger).

use std::fmt::Write as _;
use std::str::FromStr;

use qmsdf_core::generator::{build_generator, check_state, evolve_observable, evolve_state};
use qmsdf_core::model::QmsModel;
use qmsdf_core::{CMatrix, Tolerance};
use serde::Serialize;

use crate::error::{CliError, Result};
use crate::model_file::matrix_to_json;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Picture {
    Heisenberg,
    Schrodinger,
}

#[derive(Debug, Clone, Serialize)]
pub struct TrajectoryPoint {
    pub t: f64,
    pub value: Vec<Vec<[f64; 2]>>,
    pub norm: f64,
}

/// Comma-separated, finite, non-negative times.
pub fn parse_times(s: &str) -> Result<Vec<f64>> {
    let times = s
        .split(',')
        .map(|x| {
            f64::from_str(x.trim())
                .ok()
                .filter(|t| t.is_finite() && *t >= 0.0)
                .ok_or_else(|| CliError::Usage(format!("--times: {x:?} is not a finite non-negative number")))
        })
        .collect::<Result<Vec<_>>>()?;
    if times.is_empty() {
        return Err(CliError::Usage("--times is empty".into()));
    }
    Ok(times)
}

pub fn evolve(model: &QmsModel, input: &CMatrix, times: &[f64], picture: Picture, tol: &Tolerance) -> Result<Vec<(f64, CMatrix)>> {
    let d = model.dim();
    if input.shape() != (d, d) {
        let msg = format!("input is {}x{}, model has dimension {d}", input.nrows(), input.ncols());
        return Err(match picture {
            Picture::Schrodinger => qmsdf_core::Error::NotAState(msg).into(),
            Picture::Heisenberg => CliError::parse("input", msg),
        });
    }
    let g = build_generator(model);
    if picture == Picture::Schrodinger {
        check_state(input, tol)?;
    }
    times
        .iter()
        .map(|&t| {
            let x = match picture {
                Picture::Heisenberg => evolve_observable(&g, input, t),
                Picture::Schrodinger => evolve_state(&g, input, t, tol)?,
            };
            Ok((t, x))
        })
        .collect()
}

/// Header `t,re_ij,im_ij,…,norm` over column-stacked entries, one row per time.
pub fn to_csv(trajectory: &[(f64, CMatrix)]) -> String {
    let mut out = String::from("t");
    if let Some((_, x)) = trajectory.first() {
        for j in 0..x.ncols() {
            for i in 0..x.nrows() {
                write!(out, ",re_{i}{j},im_{i}{j}").unwrap();
            }
        }
    }
    out.push_str(",norm\n");
    for (t, x) in trajectory {
        write!(out, "{t}").unwrap();
        for z in x.iter() {
            write!(out, ",{},{}", z.re, z.im).unwrap();
        }
        writeln!(out, ",{}", x.norm()).unwrap();
    }
    out
}

pub fn to_json(trajectory: &[(f64, CMatrix)]) -> String {
    let points: Vec<TrajectoryPoint> = trajectory
        .iter()
        .map(|(t, x)| TrajectoryPoint {
            t: *t,
            value: matrix_to_json(x),
            norm: x.norm(),
        })
        .collect();
    let mut s = serde_json::to_string_pretty(&points).expect("trajectory serializes");
    s.push('\n');
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use qmsdf_core::matrix::{identity, matrix_unit};
    use qmsdf_core::model::examples;

    #[test]
    fn dephasing_coherence_decays() {
        let tol = Tolerance::default();
        let traj = evolve(&examples::dephasing(), &matrix_unit(2, 0, 1), &[0.0, 1.0, 10.0], Picture::Heisenberg, &tol).unwrap();
        for ((t, x), expected) in traj.iter().zip([1.0, (-2.0f64).exp(), (-20.0f64).exp()]) {
            assert!((x.norm() - expected).abs() <= 1e-6 * expected, "t = {t}");
        }
    }

    #[test]
    fn identity_is_constant() {
        let tol = Tolerance::default();
        let traj = evolve(&examples::amplitude_damping(), &identity(2), &[0.0, 3.0, 50.0], Picture::Heisenberg, &tol).unwrap();
        for (_, x) in traj {
            assert!((x - identity(2)).norm() < 1e-12);
        }
    }

    #[test]
    fn damping_population_decays() {
        let tol = Tolerance::default();
        let traj = evolve(&examples::amplitude_damping(), &matrix_unit(2, 1, 1), &[0.0, 0.5, 2.0], Picture::Schrodinger, &tol).unwrap();
        for (t, rho) in traj {
            assert!((rho[(1, 1)].re - (-t).exp()).abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_non_states_and_bad_times() {
        let tol = Tolerance::default();
        let err = evolve(&examples::dephasing(), &matrix_unit(2, 0, 1), &[1.0], Picture::Schrodinger, &tol).unwrap_err();
        assert!(matches!(err, CliError::Core(qmsdf_core::Error::NotAState(_))));
        assert!(parse_times("0,1,x").is_err());
        assert!(parse_times("-1").is_err());
        assert_eq!(parse_times("0, 1,10").unwrap(), vec![0.0, 1.0, 10.0]);
    }

    #[test]
    fn csv_layout() {
        let csv = to_csv(&[(0.0, identity(2))]);
        let mut lines = csv.lines();
        assert_eq!(lines.next().unwrap(), "t,re_00,im_00,re_10,im_10,re_01,im_01,re_11,im_11,norm");
        assert_eq!(lines.next().unwrap().split(',').count(), 10);
    }
}
