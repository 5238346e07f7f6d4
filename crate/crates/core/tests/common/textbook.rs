#![allow(clippy::needless_range_loop)]

//! A plain discrete HMM in the classic tutorial formulation, written against
//! `Vec<f64>` so it shares nothing with the crate under test.

#[derive(Debug, Clone)]
pub struct Hmm {
    pub pi: Vec<f64>,
    pub a: Vec<Vec<f64>>,
    pub b: Vec<Vec<f64>>,
}

impl Hmm {
    pub fn from_model(model: &effhmm::EffHmmModel) -> Self {
        let n = model.n_states();
        let m = model.n_symbols();
        Hmm {
            pi: (0..n).map(|i| model.initial()[i]).collect(),
            a: (0..n)
                .map(|i| (0..n).map(|j| model.a(i, j)).collect())
                .collect(),
            b: (0..n)
                .map(|i| (0..m).map(|k| model.b(i, k)).collect())
                .collect(),
        }
    }

    fn n(&self) -> usize {
        self.pi.len()
    }

    /// Scaled forward pass: (alpha_hat, c) with c[t] = 1 / Σ_i alpha(t).
    fn forward_scaled(&self, o: &[usize]) -> (Vec<Vec<f64>>, Vec<f64>) {
        let n = self.n();
        let mut alpha = vec![vec![0.0; n]; o.len()];
        let mut c = vec![0.0; o.len()];
        for i in 0..n {
            alpha[0][i] = self.pi[i] * self.b[i][o[0]];
        }
        c[0] = 1.0 / alpha[0].iter().sum::<f64>();
        for i in 0..n {
            alpha[0][i] *= c[0];
        }
        for t in 1..o.len() {
            for j in 0..n {
                let mut s = 0.0;
                for i in 0..n {
                    s += alpha[t - 1][i] * self.a[i][j];
                }
                alpha[t][j] = s * self.b[j][o[t]];
            }
            c[t] = 1.0 / alpha[t].iter().sum::<f64>();
            for j in 0..n {
                alpha[t][j] *= c[t];
            }
        }
        (alpha, c)
    }

    fn backward_scaled(&self, o: &[usize], c: &[f64]) -> Vec<Vec<f64>> {
        let n = self.n();
        let len = o.len();
        let mut beta = vec![vec![0.0; n]; len];
        for i in 0..n {
            beta[len - 1][i] = c[len - 1];
        }
        for t in (0..len - 1).rev() {
            for i in 0..n {
                let mut s = 0.0;
                for j in 0..n {
                    s += self.a[i][j] * self.b[j][o[t + 1]] * beta[t + 1][j];
                }
                beta[t][i] = s * c[t];
            }
        }
        beta
    }

    pub fn log_likelihood(&self, o: &[usize]) -> f64 {
        let (_, c) = self.forward_scaled(o);
        -c.iter().map(|x| x.ln()).sum::<f64>()
    }

    /// Viterbi in log space; ties keep the lower state index.
    pub fn viterbi(&self, o: &[usize]) -> (Vec<usize>, f64) {
        let n = self.n();
        let len = o.len();
        let mut delta = vec![vec![f64::NEG_INFINITY; n]; len];
        let mut psi = vec![vec![0usize; n]; len];
        for i in 0..n {
            delta[0][i] = self.pi[i].ln() + self.b[i][o[0]].ln();
        }
        for t in 1..len {
            for j in 0..n {
                let mut best = f64::NEG_INFINITY;
                let mut arg = 0;
                for i in 0..n {
                    let v = delta[t - 1][i] + self.a[i][j].ln();
                    if v > best {
                        best = v;
                        arg = i;
                    }
                }
                delta[t][j] = best + self.b[j][o[t]].ln();
                psi[t][j] = arg;
            }
        }
        let mut last = 0;
        for i in 1..n {
            if delta[len - 1][i] > delta[len - 1][last] {
                last = i;
            }
        }
        let score = delta[len - 1][last];
        let mut path = vec![last; len];
        for t in (1..len).rev() {
            path[t - 1] = psi[t][path[t]];
        }
        (path, score)
    }

    /// One Baum-Welch step over several sequences (no smoothing).
    pub fn baum_welch_step(&self, data: &[Vec<usize>]) -> Hmm {
        let n = self.n();
        let m = self.b[0].len();
        let mut pi_num = vec![0.0; n];
        let mut a_num = vec![vec![0.0; n]; n];
        let mut a_den = vec![0.0; n];
        let mut b_num = vec![vec![0.0; m]; n];
        let mut b_den = vec![0.0; n];
        for o in data {
            let (alpha, c) = self.forward_scaled(o);
            let beta = self.backward_scaled(o, &c);
            let len = o.len();
            for t in 0..len {
                // with this scaling gamma_i(t) = alpha_hat * beta_hat / c_t
                let gamma: Vec<f64> = (0..n).map(|i| alpha[t][i] * beta[t][i] / c[t]).collect();
                if t == 0 {
                    for i in 0..n {
                        pi_num[i] += gamma[i];
                    }
                }
                for i in 0..n {
                    b_num[i][o[t]] += gamma[i];
                    b_den[i] += gamma[i];
                }
                if t + 1 < len {
                    for i in 0..n {
                        a_den[i] += gamma[i];
                        for j in 0..n {
                            a_num[i][j] +=
                                alpha[t][i] * self.a[i][j] * self.b[j][o[t + 1]] * beta[t + 1][j];
                        }
                    }
                }
            }
        }
        let k = data.len() as f64;
        Hmm {
            pi: pi_num.iter().map(|x| x / k).collect(),
            a: (0..n)
                .map(|i| (0..n).map(|j| a_num[i][j] / a_den[i]).collect())
                .collect(),
            b: (0..n)
                .map(|i| (0..m).map(|v| b_num[i][v] / b_den[i]).collect())
                .collect(),
        }
    }
}
