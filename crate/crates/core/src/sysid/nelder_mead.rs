//! Unconstrained Nelder-Mead simplex search.
//!
//! Standard coefficients (reflection 1, expansion 2, contraction 0.5, shrink
//! 0.5). Non-finite objective values are treated as +∞ so the simplex moves
//! away from regions where the model blows up.

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NelderMeadOptions {
    /// Edge length of the initial axis-aligned simplex.
    pub initial_step: f64,
    /// Stop once the largest vertex distance from the best vertex drops below this.
    pub diameter_tolerance: f64,
    pub max_evaluations: usize,
}

impl Default for NelderMeadOptions {
    fn default() -> Self {
        Self {
            initial_step: 0.5,
            diameter_tolerance: 1e-6,
            max_evaluations: 2000,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NelderMeadOutcome {
    pub x: Vec<f64>,
    pub value: f64,
    pub evaluations: usize,
    /// Simplex collapsed below the diameter tolerance before the budget ran out.
    pub converged: bool,
}

struct Counted<F> {
    f: F,
    evaluations: usize,
}

impl<F: FnMut(&[f64]) -> f64> Counted<F> {
    fn eval(&mut self, x: &[f64]) -> f64 {
        self.evaluations += 1;
        let v = (self.f)(x);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    }
}

fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).powi(2))
        .sum::<f64>()
        .sqrt()
}

fn diameter(simplex: &[Vec<f64>]) -> f64 {
    let mut d: f64 = 0.0;
    for i in 0..simplex.len() {
        for j in i + 1..simplex.len() {
            d = d.max(distance(&simplex[i], &simplex[j]));
        }
    }
    d
}

fn affine(a: &[f64], b: &[f64], coef: f64) -> Vec<f64> {
    // a + coef·(b − a)
    a.iter().zip(b).map(|(x, y)| x + coef * (y - x)).collect()
}

pub fn minimize<F>(f: F, start: &[f64], options: &NelderMeadOptions) -> NelderMeadOutcome
where
    F: FnMut(&[f64]) -> f64,
{
    let n = start.len();
    assert!(n > 0, "Nelder-Mead needs at least one dimension");
    let mut obj = Counted { f, evaluations: 0 };

    let mut simplex: Vec<Vec<f64>> = Vec::with_capacity(n + 1);
    simplex.push(start.to_vec());
    for i in 0..n {
        let mut v = start.to_vec();
        v[i] += options.initial_step;
        simplex.push(v);
    }
    let mut values: Vec<f64> = simplex.iter().map(|v| obj.eval(v)).collect();

    let mut converged = false;
    loop {
        // Sort vertices by value; stable sort keeps ties deterministic.
        let mut order: Vec<usize> = (0..=n).collect();
        order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
        simplex = order.iter().map(|&i| simplex[i].clone()).collect();
        values = order.iter().map(|&i| values[i]).collect();

        if diameter(&simplex) < options.diameter_tolerance {
            converged = true;
            break;
        }
        if obj.evaluations >= options.max_evaluations {
            break;
        }

        let centroid: Vec<f64> = (0..n)
            .map(|d| simplex[..n].iter().map(|v| v[d]).sum::<f64>() / n as f64)
            .collect();
        let worst = simplex[n].clone();

        let reflected = affine(&centroid, &worst, -1.0);
        let f_r = obj.eval(&reflected);

        if f_r < values[0] {
            let expanded = affine(&centroid, &worst, -2.0);
            let f_e = obj.eval(&expanded);
            if f_e < f_r {
                simplex[n] = expanded;
                values[n] = f_e;
            } else {
                simplex[n] = reflected;
                values[n] = f_r;
            }
            continue;
        }
        if f_r < values[n - 1] {
            simplex[n] = reflected;
            values[n] = f_r;
            continue;
        }

        let (contracted, f_c) = if f_r < values[n] {
            let c = affine(&centroid, &reflected, 0.5);
            let fc = obj.eval(&c);
            (c, fc)
        } else {
            let c = affine(&centroid, &worst, 0.5);
            let fc = obj.eval(&c);
            (c, fc)
        };
        if f_c < values[n].min(f_r) {
            simplex[n] = contracted;
            values[n] = f_c;
            continue;
        }

        // Shrink toward the best vertex.
        let best = simplex[0].clone();
        for i in 1..=n {
            simplex[i] = affine(&best, &simplex[i], 0.5);
            values[i] = obj.eval(&simplex[i]);
        }
    }

    NelderMeadOutcome {
        x: simplex[0].clone(),
        value: values[0],
        evaluations: obj.evaluations,
        converged,
    }
}
