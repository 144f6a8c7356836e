use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::distance::{graph_distances, ComponentDistances, EdgeLength};
use super::pack::pack_components;
use crate::conet::CoNetwork;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LayoutParams {
    /// Display length of one unit of graph distance.
    pub ideal_edge_scale: f64,
    /// Budget of Newton steps per component.
    pub max_iterations: usize,
    /// Stop once every vertex's stress gradient norm is below this.
    pub gradient_tolerance: f64,
    pub edge_length: EdgeLength,
    /// Perturbs the circular start; `None` keeps the plain circle.
    pub perturbation_seed: Option<u64>,
    /// Keep the stress value after every accepted step.
    pub record_trace: bool,
}

impl Default for LayoutParams {
    fn default() -> Self {
        LayoutParams {
            ideal_edge_scale: 1.0,
            max_iterations: 50_000,
            gradient_tolerance: 1e-4,
            edge_length: EdgeLength::InverseWeight,
            perturbation_seed: None,
            record_trace: false,
        }
    }
}

/// Newton steps spent on one vertex before re-selecting.
const INNER_BUDGET: usize = 100;
/// Step halvings tried before giving up on a vertex.
const MAX_HALVINGS: usize = 60;
/// Pairs closer than this contribute no gradient.
const COINCIDENT: f64 = 1e-12;

/// Kamada-Kawai stress `sum_{i<j} k_ij (|p_i - p_j| - l_ij)^2` with
/// `l_ij = L0 d_ij` and `k_ij = 1 / d_ij^2`.
#[derive(Debug, Clone, PartialEq)]
pub struct StressModel {
    n: usize,
    target: Vec<f64>,
    spring: Vec<f64>,
}

impl StressModel {
    /// `dist` is a row-major `n x n` matrix of graph distances.
    pub fn new(n: usize, dist: &[f64], scale: f64) -> Self {
        assert_eq!(dist.len(), n * n);
        let mut target = vec![0.0; n * n];
        let mut spring = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                let d = dist[i * n + j];
                if i != j && d.is_finite() && d > 0.0 {
                    target[i * n + j] = scale * d;
                    spring[i * n + j] = 1.0 / (d * d);
                }
            }
        }
        StressModel { n, target, spring }
    }

    pub fn from_component(dist: &ComponentDistances, scale: f64) -> Self {
        let n = dist.len();
        let flat: Vec<f64> = (0..n * n).map(|k| dist.get(k / n, k % n)).collect();
        Self::new(n, &flat, scale)
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn stress(&self, pos: &[[f64; 2]]) -> f64 {
        let mut e = 0.0;
        for i in 0..self.n {
            for j in i + 1..self.n {
                let k = i * self.n + j;
                let r = dist(pos[i], pos[j]);
                e += self.spring[k] * (r - self.target[k]).powi(2);
            }
        }
        e
    }

    /// Stress terms involving vertex `m` placed at `p`.
    fn local_stress(&self, pos: &[[f64; 2]], m: usize, p: [f64; 2]) -> f64 {
        (0..self.n)
            .filter(|&j| j != m)
            .map(|j| {
                let k = m * self.n + j;
                self.spring[k] * (dist(p, pos[j]) - self.target[k]).powi(2)
            })
            .sum()
    }

    /// Gradient of the stress with respect to vertex `m`.
    pub fn gradient(&self, pos: &[[f64; 2]], m: usize) -> [f64; 2] {
        let mut g = [0.0; 2];
        for j in 0..self.n {
            if j != m {
                let t = self.pair_gradient(pos[m], pos[j], m * self.n + j);
                g[0] += t[0];
                g[1] += t[1];
            }
        }
        g
    }

    pub fn gradients(&self, pos: &[[f64; 2]]) -> Vec<[f64; 2]> {
        (0..self.n).map(|m| self.gradient(pos, m)).collect()
    }

    fn pair_gradient(&self, p: [f64; 2], q: [f64; 2], k: usize) -> [f64; 2] {
        let (dx, dy) = (p[0] - q[0], p[1] - q[1]);
        let r = dx.hypot(dy);
        if r < COINCIDENT {
            return [0.0; 2];
        }
        let c = 2.0 * self.spring[k] * (r - self.target[k]) / r;
        [c * dx, c * dy]
    }

    /// Hessian block `[xx, xy, yy]` of the stress with respect to vertex `m`.
    fn hessian(&self, pos: &[[f64; 2]], m: usize) -> [f64; 3] {
        let mut h = [0.0; 3];
        for j in 0..self.n {
            if j == m {
                continue;
            }
            let k = m * self.n + j;
            let (dx, dy) = (pos[m][0] - pos[j][0], pos[m][1] - pos[j][1]);
            let r = dx.hypot(dy);
            if r < COINCIDENT {
                continue;
            }
            let (s, l, r3) = (2.0 * self.spring[k], self.target[k], r * r * r);
            h[0] += s * (1.0 - l * dy * dy / r3);
            h[1] += s * l * dx * dy / r3;
            h[2] += s * (1.0 - l * dx * dx / r3);
        }
        h
    }
}

fn dist(p: [f64; 2], q: [f64; 2]) -> f64 {
    (p[0] - q[0]).hypot(p[1] - q[1])
}

fn norm(g: [f64; 2]) -> f64 {
    g[0].hypot(g[1])
}

/// Layout of one connected component in its own coordinates.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComponentLayout {
    /// Network vertex indices, ascending.
    pub vertices: Vec<usize>,
    pub coords: Vec<[f64; 2]>,
    pub initial_stress: f64,
    pub stress: f64,
    pub converged: bool,
    pub iterations: usize,
    /// Stress after each accepted step, when requested.
    pub trace: Vec<f64>,
}

/// Vertices on a circle in index order, with diameter equal to the largest
/// target distance.
fn circle_start(model: &StressModel, seed: Option<u64>) -> Vec<[f64; 2]> {
    let n = model.n;
    let radius = model.target.iter().copied().fold(0.0, f64::max) / 2.0;
    let mut pos: Vec<[f64; 2]> = (0..n)
        .map(|k| {
            let angle = std::f64::consts::TAU * k as f64 / n as f64;
            [radius * angle.cos(), radius * angle.sin()]
        })
        .collect();
    if let Some(seed) = seed {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let jitter = 0.1 * radius.max(1e-3);
        for p in &mut pos {
            p[0] += jitter * rng.random_range(-1.0..1.0);
            p[1] += jitter * rng.random_range(-1.0..1.0);
        }
    }
    pos
}

/// Kamada-Kawai relaxation of one component.
///
/// Repeatedly picks the vertex with the largest gradient norm (lowest
/// index on ties) and moves it by Newton steps, halving each step until the
/// stress decreases. Stops when every gradient norm is below the
/// tolerance, when the step budget is spent, or when no decreasing step
/// can be found; only the first counts as converged.
pub fn kamada_kawai_component(dist: &ComponentDistances, params: &LayoutParams) -> ComponentLayout {
    let model = StressModel::from_component(dist, params.ideal_edge_scale);
    let (coords, summary) = relax(
        &model,
        circle_start(&model, params.perturbation_seed),
        params,
    );
    ComponentLayout {
        vertices: dist.vertices.clone(),
        coords,
        ..summary
    }
}

/// Runs the relaxation from `pos`. The returned layout has empty
/// `vertices`/`coords`; positions are returned separately.
pub(crate) fn relax(
    model: &StressModel,
    mut pos: Vec<[f64; 2]>,
    params: &LayoutParams,
) -> (Vec<[f64; 2]>, ComponentLayout) {
    let n = model.n;
    let eps = params.gradient_tolerance;
    let initial_stress = model.stress(&pos);
    let mut trace = Vec::new();
    let mut iterations = 0;
    let mut converged = n < 2;
    let mut grads = model.gradients(&pos);

    if n >= 2 {
        loop {
            let (mut m, mut gmax) = argmax(&grads);
            if gmax < eps {
                grads = model.gradients(&pos);
                (m, gmax) = argmax(&grads);
                if gmax < eps {
                    converged = true;
                    break;
                }
            }
            if iterations >= params.max_iterations {
                break;
            }

            let mut stuck = false;
            for _ in 0..INNER_BUDGET {
                if norm(grads[m]) < eps || iterations >= params.max_iterations {
                    break;
                }
                iterations += 1;
                let old = pos[m];
                let Some(new) = damped_step(model, &pos, m, grads[m]) else {
                    stuck = true;
                    break;
                };
                pos[m] = new;
                // refresh the gradients that depend on m
                for j in 0..n {
                    if j != m {
                        let k = j * n + m;
                        let before = model.pair_gradient(pos[j], old, k);
                        let after = model.pair_gradient(pos[j], new, k);
                        grads[j][0] += after[0] - before[0];
                        grads[j][1] += after[1] - before[1];
                    }
                }
                grads[m] = model.gradient(&pos, m);
                if params.record_trace {
                    let exact = model.stress(&pos);
                    debug_assert!(
                        exact
                            <= trace.last().copied().unwrap_or(initial_stress)
                                + 1e-9 * (1.0 + exact)
                    );
                    trace.push(exact);
                }
            }
            if stuck {
                break;
            }
        }
    }

    let final_stress = model.stress(&pos);
    debug_assert!(final_stress <= initial_stress + 1e-9 * (1.0 + initial_stress));
    (
        pos,
        ComponentLayout {
            vertices: Vec::new(),
            coords: Vec::new(),
            initial_stress,
            stress: final_stress,
            converged,
            iterations,
            trace,
        },
    )
}

fn argmax(grads: &[[f64; 2]]) -> (usize, f64) {
    let mut best = (0, f64::NEG_INFINITY);
    for (i, g) in grads.iter().enumerate() {
        let v = norm(*g);
        if v > best.1 {
            best = (i, v);
        }
    }
    best
}

/// Newton step for vertex `m`, falling back to a scaled gradient step when
/// the Newton direction is not a descent direction. Returns the new
/// position, or `None` if no halving decreases the stress.
fn damped_step(model: &StressModel, pos: &[[f64; 2]], m: usize, g: [f64; 2]) -> Option<[f64; 2]> {
    let [hxx, hxy, hyy] = model.hessian(pos, m);
    let det = hxx * hyy - hxy * hxy;
    let mut step = if det > 0.0 && hxx > 0.0 {
        [
            -(hyy * g[0] - hxy * g[1]) / det,
            -(hxx * g[1] - hxy * g[0]) / det,
        ]
    } else {
        [f64::NAN; 2]
    };
    if !(step[0].is_finite() && step[1].is_finite()) || step[0] * g[0] + step[1] * g[1] >= 0.0 {
        let curvature = (hxx.abs() + hyy.abs()).max(1e-12);
        step = [-g[0] / curvature, -g[1] / curvature];
    }

    let before = model.local_stress(pos, m, pos[m]);
    let mut t = 1.0;
    for _ in 0..MAX_HALVINGS {
        let trial = [pos[m][0] + t * step[0], pos[m][1] + t * step[1]];
        let after = model.local_stress(pos, m, trial);
        if after < before {
            return Some(trial);
        }
        t *= 0.5;
    }
    None
}

/// Final layout: coordinates in the unit square (y down) for every vertex.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LayoutMap {
    pub coords: Vec<[f64; 2]>,
    /// Sum of the per-component stresses, in layout units before packing.
    pub final_stress: f64,
    /// False if any component stopped before reaching the tolerance.
    pub converged: bool,
    pub iterations: usize,
}

impl LayoutMap {
    pub fn len(&self) -> usize {
        self.coords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }
}

/// Lays out every component and packs them into the unit square.
pub fn kamada_kawai(net: &CoNetwork, params: &LayoutParams) -> LayoutMap {
    let layouts: Vec<ComponentLayout> = graph_distances(net, params.edge_length)
        .iter()
        .map(|d| kamada_kawai_component(d, params))
        .collect();
    pack_components(&layouts)
}
