//! The 2D Laplace problem on the unit square with Dirichlet data
//! `u(0, y) = sin(pi y)`, vanishing at `y = 0` and `y = 1`, whose exact
//! solution is `e^{-pi x} sin(pi y)`.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::derive_seed;
use crate::error::{Error, Result};
use crate::gradients::adjoint::{
    jet_forward_compiled, jet_value_and_gradient_compiled, value_and_gradient_compiled,
};
use crate::model::{forward_angles, ReuploaderModel};

const SAMPLE_STREAM: u64 = 0x4c41_504c;

/// A scalar field on the unit square that can report its own Laplacian.
pub trait Solution2d {
    fn value(&self, x: f64, y: f64) -> Result<f64>;
    fn laplacian(&self, x: f64, y: f64) -> Result<f64>;
}

impl Solution2d for ReuploaderModel {
    fn value(&self, x: f64, y: f64) -> Result<f64> {
        check_planar(self)?;
        crate::model::forward(self, &[x, y])
    }

    fn laplacian(&self, x: f64, y: f64) -> Result<f64> {
        check_planar(self)?;
        let program = self.compile();
        let p = [x, y];
        Ok(jet_forward_compiled(self, &program, &p, 0).second()
            + jet_forward_compiled(self, &program, &p, 1).second())
    }
}

/// Closed-form field used to validate the loss pipeline.
#[derive(Clone, Copy)]
pub struct AnalyticField {
    pub u: fn(f64, f64) -> f64,
    pub laplacian: fn(f64, f64) -> f64,
}

impl Solution2d for AnalyticField {
    fn value(&self, x: f64, y: f64) -> Result<f64> {
        Ok((self.u)(x, y))
    }

    fn laplacian(&self, x: f64, y: f64) -> Result<f64> {
        Ok((self.laplacian)(x, y))
    }
}

/// `e^{-pi x} sin(pi y)`.
pub fn exact_solution(x: f64, y: f64) -> f64 {
    (-PI * x).exp() * (PI * y).sin()
}

impl AnalyticField {
    pub fn exact() -> Self {
        AnalyticField {
            u: exact_solution,
            laplacian: |_, _| 0.0,
        }
    }

    pub fn zero() -> Self {
        AnalyticField {
            u: |_, _| 0.0,
            laplacian: |_, _| 0.0,
        }
    }
}

fn check_planar(model: &ReuploaderModel) -> Result<()> {
    if model.input_dim != 2 {
        return Err(Error::Shape {
            expected: 2,
            actual: model.input_dim,
        });
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LaplaceProblem {
    pub n_collocation: usize,
    pub n_boundary: usize,
    pub boundary_weight: f64,
    pub eval_grid: usize,
}

impl Default for LaplaceProblem {
    fn default() -> Self {
        LaplaceProblem {
            n_collocation: 250,
            n_boundary: 250,
            boundary_weight: 1.0,
            eval_grid: 250,
        }
    }
}

/// Dirichlet data: the trace of [`exact_solution`]. This is `sin(pi y)` at
/// `x = 0`, zero at `y = 0` and `y = 1`, and `e^{-pi} sin(pi y)` at `x = 1`.
pub fn boundary_value(x: f64, y: f64) -> f64 {
    exact_solution(x, y)
}

/// Points sampled for one loss evaluation.
#[derive(Clone, Debug, PartialEq)]
pub struct LaplaceSample {
    pub interior: Vec<[f64; 2]>,
    /// One point list per edge: x = 0, x = 1, y = 0, y = 1.
    pub edges: [Vec<[f64; 2]>; 4],
}

impl LaplaceProblem {
    pub fn validate(&self) -> Result<()> {
        if self.n_collocation == 0 || self.n_boundary < 4 {
            return Err(Error::Parameter(
                "need at least one collocation point and one boundary point per edge".into(),
            ));
        }
        if self.eval_grid < 2 {
            return Err(Error::Parameter("evaluation grid needs at least 2 points per side".into()));
        }
        Ok(())
    }

    /// Fresh interior and boundary points, deterministic per `(seed, epoch)`.
    /// Boundary points are split evenly across the four edges.
    pub fn sample(&self, seed: u64, epoch: u64) -> LaplaceSample {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, SAMPLE_STREAM, epoch));
        let interior = (0..self.n_collocation)
            .map(|_| [rng.random::<f64>(), rng.random::<f64>()])
            .collect();
        let edges = std::array::from_fn(|e| {
            let n = self.n_boundary / 4 + usize::from(e < self.n_boundary % 4);
            (0..n)
                .map(|_| {
                    let t: f64 = rng.random();
                    match e {
                        0 => [0.0, t],
                        1 => [1.0, t],
                        2 => [t, 0.0],
                        _ => [t, 1.0],
                    }
                })
                .collect()
        });
        LaplaceSample { interior, edges }
    }
}

/// `u_xx + u_yy` at `point`.
pub fn laplace_residual<S: Solution2d + ?Sized>(field: &S, point: [f64; 2]) -> Result<f64> {
    field.laplacian(point[0], point[1])
}

/// Mean squared residual over the interior plus, per edge, the mean squared
/// Dirichlet mismatch, weighted by `boundary_weight`.
pub fn loss_on_sample<S: Solution2d + ?Sized>(
    field: &S,
    problem: &LaplaceProblem,
    sample: &LaplaceSample,
) -> Result<f64> {
    let mut pde = 0.0;
    for &p in &sample.interior {
        let r = laplace_residual(field, p)?;
        pde += r * r;
    }
    let mut boundary = 0.0;
    for edge in sample.edges.iter().filter(|e| !e.is_empty()) {
        let mut acc = 0.0;
        for &[x, y] in edge {
            let d = field.value(x, y)? - boundary_value(x, y);
            acc += d * d;
        }
        boundary += acc / edge.len() as f64;
    }
    Ok(pde / sample.interior.len() as f64 + problem.boundary_weight * boundary)
}

/// Loss on points drawn for `(seed, epoch)`.
pub fn laplace_loss<S: Solution2d + ?Sized>(
    field: &S,
    problem: &LaplaceProblem,
    seed: u64,
    epoch: u64,
) -> Result<f64> {
    loss_on_sample(field, problem, &problem.sample(seed, epoch))
}

/// Loss and its gradient over the trainable parameters for a circuit model.
pub(crate) fn loss_and_gradient(
    model: &ReuploaderModel,
    problem: &LaplaceProblem,
    sample: &LaplaceSample,
) -> Result<(f64, Vec<f64>)> {
    check_planar(model)?;
    let program = model.compile();
    let n = model.params.trainable_len();
    let mut grad = vec![0.0; n];
    let mut pde = 0.0;
    let scale = 2.0 / sample.interior.len() as f64;
    for p in &sample.interior {
        let (jx, gx) = jet_value_and_gradient_compiled(model, &program, p, 0)?;
        let (jy, gy) = jet_value_and_gradient_compiled(model, &program, p, 1)?;
        let r = jx.second() + jy.second();
        pde += r * r;
        for i in 0..n {
            grad[i] += scale * r * (gx[i].second() + gy[i].second());
        }
    }
    let mut boundary = 0.0;
    for edge in sample.edges.iter().filter(|e| !e.is_empty()) {
        let w = problem.boundary_weight / edge.len() as f64;
        let mut acc = 0.0;
        for &[x, y] in edge {
            let (u, g) = value_and_gradient_compiled(model, &program, &[x, y])?;
            let d = u - boundary_value(x, y);
            acc += d * d;
            for i in 0..n {
                grad[i] += 2.0 * w * d * g[i];
            }
        }
        boundary += problem.boundary_weight * acc / edge.len() as f64;
    }
    Ok((pde / sample.interior.len() as f64 + boundary, grad))
}

/// `||u - u_exact||_2 / ||u_exact||_2` on a uniform `grid_size x grid_size`
/// grid including the boundary.
pub fn l2_relative_error<S: Solution2d + ?Sized>(field: &S, grid_size: usize) -> Result<f64> {
    if grid_size < 2 {
        return Err(Error::Parameter("grid size must be at least 2".into()));
    }
    let step = 1.0 / (grid_size - 1) as f64;
    let (mut num, mut den) = (0.0, 0.0);
    for i in 0..grid_size {
        for j in 0..grid_size {
            let (x, y) = (i as f64 * step, j as f64 * step);
            let exact = exact_solution(x, y);
            let d = field.value(x, y)? - exact;
            num += d * d;
            den += exact * exact;
        }
    }
    Ok((num / den).sqrt())
}

/// Faster [`l2_relative_error`] for circuit models: compiles once.
pub fn model_l2_relative_error(model: &ReuploaderModel, grid_size: usize) -> Result<f64> {
    check_planar(model)?;
    if grid_size < 2 {
        return Err(Error::Parameter("grid size must be at least 2".into()));
    }
    let program = model.compile();
    let step = 1.0 / (grid_size - 1) as f64;
    let (mut num, mut den) = (0.0, 0.0);
    for i in 0..grid_size {
        for j in 0..grid_size {
            let (x, y) = (i as f64 * step, j as f64 * step);
            let exact = exact_solution(x, y);
            let u = forward_angles(model, &program, &model.angles(&program, &[x, y]));
            num += (u - exact) * (u - exact);
            den += exact * exact;
        }
    }
    Ok((num / den).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{build_reuploader, AnsatzStyle, InitSpec, Layout, RepeatUnit};

    fn circuit(seed: u64) -> ReuploaderModel {
        let unit = RepeatUnit::standard(2, AnsatzStyle::RyRxPairs, &[0, 1]);
        let layout = Layout::reuploader(2, 2, unit, 3);
        build_reuploader(&layout, &InitSpec::Uniform { theta: (0.0, 3.0), psi: (0.2, 1.2) }, seed).unwrap()
    }

    #[test]
    fn residual_of_harmonic_stubs() {
        let saddle = AnalyticField {
            u: |x, y| x * x - y * y,
            laplacian: |_, _| 0.0,
        };
        let bowl = AnalyticField {
            u: |x, y| x * x + y * y,
            laplacian: |_, _| 4.0,
        };
        assert_eq!(laplace_residual(&saddle, [0.3, 0.7]).unwrap(), 0.0);
        assert_eq!(laplace_residual(&bowl, [0.3, 0.7]).unwrap(), 4.0);
    }

    #[test]
    fn circuit_residual_matches_five_point_stencil() {
        for seed in 0..5 {
            let m = circuit(seed);
            let (x, y, h) = (0.37, 0.61, 1e-3);
            let f = |a: f64, b: f64| m.value(a, b).unwrap();
            let stencil =
                (f(x + h, y) + f(x - h, y) + f(x, y + h) + f(x, y - h) - 4.0 * f(x, y)) / (h * h);
            let r = laplace_residual(&m, [x, y]).unwrap();
            assert!((r - stencil).abs() < 1e-3, "{r} vs {stencil}");
        }
    }

    #[test]
    fn residual_rejects_one_dimensional_models() {
        let unit = RepeatUnit::standard(1, AnsatzStyle::RyPairs, &[0]);
        let m = build_reuploader(&Layout::reuploader(1, 1, unit, 1), &InitSpec::Uniform { theta: (0.0, 1.0), psi: (0.0, 1.0) }, 0)
            .unwrap();
        assert!(matches!(laplace_residual(&m, [0.1, 0.2]), Err(Error::Shape { .. })));
    }

    #[test]
    fn exact_and_zero_stub_losses() {
        let problem = LaplaceProblem::default();
        assert!(laplace_loss(&AnalyticField::exact(), &problem, 3, 0).unwrap() < 1e-20);
        let big = LaplaceProblem {
            n_boundary: 40_000,
            ..LaplaceProblem::default()
        };
        let zero = laplace_loss(&AnalyticField::zero(), &big, 3, 0).unwrap();
        assert!((zero - 0.5).abs() < 0.01, "{zero}");
        let a = laplace_loss(&AnalyticField::zero(), &problem, 11, 4).unwrap();
        let b = laplace_loss(&AnalyticField::zero(), &problem, 11, 4).unwrap();
        assert_eq!(a.to_bits(), b.to_bits());
        assert_ne!(problem.sample(11, 4), problem.sample(11, 5));
    }

    #[test]
    fn samples_lie_in_the_square() {
        let s = LaplaceProblem::default().sample(1, 2);
        assert_eq!(s.interior.len(), 250);
        assert_eq!(s.edges.iter().map(Vec::len).sum::<usize>(), 250);
        for p in s.interior.iter().chain(s.edges.iter().flatten()) {
            assert!((0.0..=1.0).contains(&p[0]) && (0.0..=1.0).contains(&p[1]));
        }
        assert!(s.edges[0].iter().all(|p| p[0] == 0.0));
        assert!(s.edges[3].iter().all(|p| p[1] == 1.0));
    }

    #[test]
    fn l2_error_examples() {
        assert_eq!(l2_relative_error(&AnalyticField::exact(), 50).unwrap(), 0.0);
        assert_eq!(l2_relative_error(&AnalyticField::zero(), 50).unwrap(), 1.0);
        let scaled = AnalyticField {
            u: |x, y| 1.05 * exact_solution(x, y),
            laplacian: |_, _| 0.0,
        };
        assert!((l2_relative_error(&scaled, 50).unwrap() - 0.05).abs() < 1e-12);
        assert!(l2_relative_error(&AnalyticField::zero(), 1).is_err());
        let m = circuit(2);
        let generic = l2_relative_error(&m, 20).unwrap();
        assert!((model_l2_relative_error(&m, 20).unwrap() - generic).abs() < 1e-14);
    }

    #[test]
    fn loss_gradient_matches_finite_differences() {
        let m = circuit(4);
        let problem = LaplaceProblem {
            n_collocation: 7,
            n_boundary: 8,
            ..LaplaceProblem::default()
        };
        let sample = problem.sample(0, 0);
        let (loss, grad) = loss_and_gradient(&m, &problem, &sample).unwrap();
        assert!((loss - loss_on_sample(&m, &problem, &sample).unwrap()).abs() < 1e-12);
        let base = m.params.trainable_values();
        for i in 0..base.len() {
            let h = 1e-5;
            let mut mm = m.clone();
            let mut v = base.clone();
            v[i] += h;
            mm.params.set_trainable_values(&v).unwrap();
            let up = loss_on_sample(&mm, &problem, &sample).unwrap();
            v[i] -= 2.0 * h;
            mm.params.set_trainable_values(&v).unwrap();
            let down = loss_on_sample(&mm, &problem, &sample).unwrap();
            let fd = (up - down) / (2.0 * h);
            assert!((fd - grad[i]).abs() < 1e-5 * (1.0 + fd.abs()), "slot {i}: {fd} vs {}", grad[i]);
        }
    }
}
