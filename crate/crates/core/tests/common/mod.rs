//! Shared test helpers: a hand-set scorer and a scalar forward-pass oracle.
#![allow(dead_code)]
// the oracle mirrors the equations index by index on purpose
#![allow(clippy::needless_range_loop)]

use nmt_rerank::corpus::Vocabulary;
use nmt_rerank::neural::{NeuralScorer, Params, ScorerConfig};

/// Every entry set by a fixed formula, distinct per tensor and position.
pub fn hand_set_scorer() -> NeuralScorer {
    let v = Vocabulary::from_tokens(["a", "b"]).unwrap();
    let cfg = ScorerConfig::new(2, 2, 2, v.clone(), v, 0).unwrap();
    let mut params = Params::zeros(&cfg);
    for (p, t) in params.iter_mut() {
        let offset = p as usize as f64;
        for (k, v) in t.data_mut().iter_mut().enumerate() {
            *v = 0.3 * (1.7 * k as f64 + 0.9 * offset + 0.2).sin();
        }
    }
    NeuralScorer::from_params(cfg, params).unwrap()
}

// ---- scalar oracle -------------------------------------------------------

fn sig(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

pub struct Oracle<'a> {
    pub p: &'a Params,
    pub h: usize,
}

impl Oracle<'_> {
    fn w(&self, name: &str, r: usize, c: usize) -> f64 {
        self.p.get(name).unwrap().get(r, c)
    }

    /// One LSTM step written gate by gate.
    fn lstm(&self, wn: &str, bn: &str, x: &[f64], h_prev: &[f64], c_prev: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let h = self.h;
        let mut h_new = vec![0.0; h];
        let mut c_new = vec![0.0; h];
        for d in 0..h {
            let mut z = [0.0f64; 4];
            for (gate, zg) in z.iter_mut().enumerate() {
                let r = gate * h + d;
                let mut acc = self.w(bn, r, 0);
                for (k, xv) in x.iter().enumerate() {
                    acc += self.w(wn, r, k) * xv;
                }
                for (k, hv) in h_prev.iter().enumerate() {
                    acc += self.w(wn, r, x.len() + k) * hv;
                }
                *zg = acc;
            }
            let (i, f, o, g) = (sig(z[0]), sig(z[1]), sig(z[2]), z[3].tanh());
            c_new[d] = f * c_prev[d] + i * g;
            h_new[d] = o * c_new[d].tanh();
        }
        (h_new, c_new)
    }

    fn embed(&self, name: &str, id: usize) -> Vec<f64> {
        let t = self.p.get(name).unwrap();
        (0..t.cols()).map(|c| t.get(id, c)).collect()
    }

    pub fn log_likelihood(&self, src: &[usize], trg: &[usize]) -> f64 {
        let h = self.h;
        let n = src.len();
        let mut fwd = vec![vec![0.0; h]; n];
        let (mut hh, mut cc) = (vec![0.0; h], vec![0.0; h]);
        for j in 0..n {
            let (a, b) = self.lstm("enc_fwd_w", "enc_fwd_b", &self.embed("src_embed", src[j]), &hh, &cc);
            fwd[j] = a.clone();
            hh = a;
            cc = b;
        }
        let mut bwd = vec![vec![0.0; h]; n];
        let (mut hh, mut cc) = (vec![0.0; h], vec![0.0; h]);
        for j in (0..n).rev() {
            let (a, b) = self.lstm("enc_bwd_w", "enc_bwd_b", &self.embed("src_embed", src[j]), &hh, &cc);
            bwd[j] = a.clone();
            hh = a;
            cc = b;
        }
        let enc: Vec<Vec<f64>> = (0..n).map(|j| [fwd[j].clone(), bwd[j].clone()].concat()).collect();

        let mut c: Vec<f64> = (0..h)
            .map(|r| self.w("dec_init_b", r, 0) + (0..h).map(|k| self.w("dec_init_w", r, k) * bwd[0][k]).sum::<f64>())
            .collect();
        let mut st: Vec<f64> = c.iter().map(|v| v.tanh()).collect();
        let a_dim = self.p.get("att_b").unwrap().rows();
        let vt = self.p.get("out_b").unwrap().rows();

        let mut targets = trg.to_vec();
        targets.push(2);
        let mut prev = 1;
        let mut total = 0.0;
        for &y in &targets {
            let mut scores = vec![0.0; n];
            for j in 0..n {
                for a in 0..a_dim {
                    let mut pre = self.w("att_b", a, 0);
                    for k in 0..h {
                        pre += self.w("att_state_w", a, k) * st[k];
                    }
                    for k in 0..2 * h {
                        pre += self.w("att_enc_w", a, k) * enc[j][k];
                    }
                    scores[j] += self.w("att_v", 0, a) * pre.tanh();
                }
            }
            let m = scores.iter().cloned().fold(f64::MIN, f64::max);
            let z: f64 = scores.iter().map(|x| (x - m).exp()).sum();
            let alpha: Vec<f64> = scores.iter().map(|x| (x - m).exp() / z).collect();
            let mut ctx = vec![0.0; 2 * h];
            for j in 0..n {
                for k in 0..2 * h {
                    ctx[k] += alpha[j] * enc[j][k];
                }
            }
            let x = [self.embed("trg_embed", prev), ctx.clone()].concat();
            let (s_new, c_new) = self.lstm("dec_w", "dec_b", &x, &st, &c);
            st = s_new;
            c = c_new;
            let o = [st.clone(), ctx].concat();
            let logits: Vec<f64> = (0..vt)
                .map(|r| self.w("out_b", r, 0) + (0..3 * h).map(|k| self.w("out_w", r, k) * o[k]).sum::<f64>())
                .collect();
            let m = logits.iter().cloned().fold(f64::MIN, f64::max);
            let log_z = m + logits.iter().map(|l| (l - m).exp()).sum::<f64>().ln();
            total += logits[y] - log_z;
            prev = y;
        }
        total
    }
}

