//! Exhaustive reference computations over all `N^T` state paths.
//!
//! Exponential time; used as ground truth for the dynamic-programming routines
//! in [`crate::inference`] and for expected counts in [`crate::learning`].
//! Nothing here shares code with those modules beyond the model accessors.

use ndarray::{Array2, Array3};

use crate::error::{Error, Result};
use crate::inference::StatePath;
use crate::model::EffHmmModel;
use crate::scalar::{compensated_sum, Real};
use crate::sequence::ObservationSequence;

/// Maximum number of paths the oracle will enumerate.
pub const PATH_LIMIT: f64 = 1e7;

/// Joint mass of one state path and the observations: the product of
/// `π`, `A`, `B` and `C` factors along the path.
pub fn path_mass<T: Real>(model: &EffHmmModel<T>, obs: &ObservationSequence, path: &[usize]) -> T {
    let o = obs.symbols();
    let mut mass = model.initial()[path[0]] * model.b(path[0], o[0]);
    for t in 1..o.len() {
        let (prev, cur) = (path[t - 1], path[t]);
        mass = mass * model.a(prev, cur) * model.b(cur, o[t]) * model.c(prev, o[t - 1], o[t]);
    }
    mass
}

/// Visits every path in lexicographic order.
fn for_each_path<T: Real>(
    model: &EffHmmModel<T>,
    obs: &ObservationSequence,
    mut visit: impl FnMut(&[usize], T),
) -> Result<()> {
    obs.check_alphabet(model.n_symbols())?;
    let n = model.n_states();
    let len = obs.len();
    let paths = (n as f64).powi(len as i32);
    if paths > PATH_LIMIT {
        return Err(Error::GuardExceeded {
            paths,
            limit: PATH_LIMIT,
        });
    }
    let mut path = vec![0usize; len];
    loop {
        visit(&path, path_mass(model, obs, &path));
        // odometer increment, last position fastest
        let mut pos = len;
        loop {
            if pos == 0 {
                return Ok(());
            }
            pos -= 1;
            path[pos] += 1;
            if path[pos] < n {
                break;
            }
            path[pos] = 0;
        }
    }
}

/// `Σ_q P(q, O | λ)` by enumeration.
pub fn enumerate_likelihood<T: Real>(
    model: &EffHmmModel<T>,
    obs: &ObservationSequence,
) -> Result<T> {
    let mut masses = Vec::new();
    for_each_path(model, obs, |_, m| masses.push(m))?;
    Ok(compensated_sum(masses))
}

/// The path of maximum joint mass; ties go to the lexicographically smallest path.
pub fn enumerate_best_path<T: Real>(
    model: &EffHmmModel<T>,
    obs: &ObservationSequence,
) -> Result<StatePath<T>> {
    let mut best: Option<(Vec<usize>, T)> = None;
    for_each_path(model, obs, |path, mass| match &best {
        Some((_, m)) if mass <= *m => {}
        _ => best = Some((path.to_vec(), mass)),
    })?;
    let (states, mass) = best.expect("at least one path");
    Ok(StatePath {
        states,
        log_probability: mass.ln(),
    })
}

/// `γ_i(t)`: posterior mass of paths with `q_t = i`.
pub fn enumerate_posterior_gamma<T: Real>(
    model: &EffHmmModel<T>,
    obs: &ObservationSequence,
) -> Result<Array2<T>> {
    let (gamma, _) = enumerate_posteriors(model, obs)?;
    Ok(gamma)
}

/// `(γ, ξ)` by enumeration; `ξ` has shape `(T-1, N, N)`.
pub fn enumerate_posteriors<T: Real>(
    model: &EffHmmModel<T>,
    obs: &ObservationSequence,
) -> Result<(Array2<T>, Array3<T>)> {
    let n = model.n_states();
    let len = obs.len();
    let mut gamma_terms: Vec<Vec<T>> = vec![Vec::new(); len * n];
    let mut xi_terms: Vec<Vec<T>> = vec![Vec::new(); len.saturating_sub(1) * n * n];
    let mut total_terms = Vec::new();
    for_each_path(model, obs, |path, mass| {
        total_terms.push(mass);
        for t in 0..len {
            gamma_terms[t * n + path[t]].push(mass);
            if t + 1 < len {
                xi_terms[(t * n + path[t]) * n + path[t + 1]].push(mass);
            }
        }
    })?;
    let total = compensated_sum(total_terms);
    if total <= T::zero() {
        return Err(Error::DegeneratePosterior);
    }
    let gamma = Array2::from_shape_fn((len, n), |(t, i)| {
        compensated_sum(gamma_terms[t * n + i].iter().copied()) / total
    });
    let xi = Array3::from_shape_fn((len.saturating_sub(1), n, n), |(t, i, j)| {
        compensated_sum(xi_terms[(t * n + i) * n + j].iter().copied()) / total
    });
    Ok((gamma, xi))
}
