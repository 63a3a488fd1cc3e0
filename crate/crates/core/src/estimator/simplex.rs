//! Derivative-free Nelder-Mead minimizer.
//!
//! Classic coefficients (reflection 1, expansion 2, contraction 0.5,
//! shrink 0.5). The state is resumable: a screening pass can hand its
//! simplex to a polishing pass without restarting.

pub(crate) struct NelderMead {
    points: Vec<Vec<f64>>,
    values: Vec<f64>,
    n_evals: u64,
}

const ALPHA: f64 = 1.0;
const GAMMA: f64 = 2.0;
const RHO: f64 = 0.5;
const SIGMA: f64 = 0.5;

fn sanitize(v: f64) -> f64 {
    if v.is_nan() {
        f64::INFINITY
    } else {
        v
    }
}

impl NelderMead {
    pub fn new(f: &mut impl FnMut(&[f64]) -> f64, x0: &[f64], step: f64) -> Self {
        let dim = x0.len();
        let mut points = Vec::with_capacity(dim + 1);
        points.push(x0.to_vec());
        for i in 0..dim {
            let mut p = x0.to_vec();
            p[i] += step;
            points.push(p);
        }
        let values: Vec<f64> = points.iter().map(|p| sanitize(f(p))).collect();
        NelderMead {
            n_evals: (dim + 1) as u64,
            points,
            values,
        }
    }

    pub fn best(&self) -> (&[f64], f64) {
        let i = self.argmin();
        (&self.points[i], self.values[i])
    }

    pub fn n_evals(&self) -> u64 {
        self.n_evals
    }

    /// Max pairwise L-infinity distance between simplex vertices.
    pub fn diameter(&self) -> f64 {
        let mut d: f64 = 0.0;
        for i in 0..self.points.len() {
            for j in (i + 1)..self.points.len() {
                for k in 0..self.points[i].len() {
                    d = d.max((self.points[i][k] - self.points[j][k]).abs());
                }
            }
        }
        d
    }

    fn argmin(&self) -> usize {
        let mut best = 0;
        for i in 1..self.values.len() {
            if self.values[i] < self.values[best] {
                best = i;
            }
        }
        best
    }

    /// Iterate until the simplex diameter drops below `tol` or the extra
    /// evaluation budget is exhausted. Returns true when `tol` was reached.
    pub fn run(
        &mut self,
        f: &mut impl FnMut(&[f64]) -> f64,
        max_extra_evals: u64,
        tol: f64,
    ) -> bool {
        let dim = self.points[0].len();
        let budget = self.n_evals + max_extra_evals;
        while self.n_evals < budget {
            if self.diameter() < tol {
                return true;
            }
            // order: best .. worst
            let mut idx: Vec<usize> = (0..self.points.len()).collect();
            idx.sort_by(|&a, &b| self.values[a].total_cmp(&self.values[b]));
            let best = idx[0];
            let worst = idx[dim];
            let second_worst = idx[dim - 1];

            let mut centroid = vec![0.0; dim];
            for &i in &idx[..dim] {
                for k in 0..dim {
                    centroid[k] += self.points[i][k];
                }
            }
            for c in centroid.iter_mut() {
                *c /= dim as f64;
            }

            let reflect: Vec<f64> = (0..dim)
                .map(|k| centroid[k] + ALPHA * (centroid[k] - self.points[worst][k]))
                .collect();
            let f_reflect = sanitize(f(&reflect));
            self.n_evals += 1;

            if f_reflect < self.values[best] {
                let expand: Vec<f64> = (0..dim)
                    .map(|k| centroid[k] + GAMMA * (reflect[k] - centroid[k]))
                    .collect();
                let f_expand = sanitize(f(&expand));
                self.n_evals += 1;
                if f_expand < f_reflect {
                    self.points[worst] = expand;
                    self.values[worst] = f_expand;
                } else {
                    self.points[worst] = reflect;
                    self.values[worst] = f_reflect;
                }
                continue;
            }
            if f_reflect < self.values[second_worst] {
                self.points[worst] = reflect;
                self.values[worst] = f_reflect;
                continue;
            }
            let contract: Vec<f64> = (0..dim)
                .map(|k| centroid[k] + RHO * (self.points[worst][k] - centroid[k]))
                .collect();
            let f_contract = sanitize(f(&contract));
            self.n_evals += 1;
            if f_contract < self.values[worst] {
                self.points[worst] = contract;
                self.values[worst] = f_contract;
                continue;
            }
            // shrink toward the best vertex
            let anchor = self.points[best].clone();
            for i in 0..self.points.len() {
                if i == best {
                    continue;
                }
                for k in 0..dim {
                    self.points[i][k] = anchor[k] + SIGMA * (self.points[i][k] - anchor[k]);
                }
                self.values[i] = sanitize(f(&self.points[i]));
                self.n_evals += 1;
            }
        }
        self.diameter() < tol
    }
}
