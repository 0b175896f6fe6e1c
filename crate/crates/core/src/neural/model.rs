use super::params::{Param, Params};
use super::tensor::{add_assign, dot, log_softmax, sigmoid, Tensor};
use super::NeuralScorer;
use crate::corpus::{Sentence, END_ID, START_ID};
use crate::error::{Error, Result};

/// Alignment weights over source positions and the resulting context vector.
#[derive(Clone, Debug, PartialEq)]
pub struct Attention {
    pub weights: Vec<f64>,
    pub context: Vec<f64>,
}

/// Intermediate values of one decoding step.
#[derive(Clone, Debug, PartialEq)]
pub struct StepTrace {
    pub attention: Attention,
    /// Log-distribution over the target vocabulary.
    pub log_probs: Vec<f64>,
    /// Id of the word predicted at this step (end-of-sentence on the last step).
    pub target: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScoreTrace {
    pub encodings: Vec<Vec<f64>>,
    pub steps: Vec<StepTrace>,
}

impl ScoreTrace {
    pub fn log_likelihood(&self) -> f64 {
        self.steps.iter().map(|s| s.log_probs[s.target]).sum()
    }
}

/// `Σ_j weights[j] * encodings[j]`.
pub fn weighted_context(weights: &[f64], encodings: &[Vec<f64>]) -> Result<Vec<f64>> {
    if weights.len() != encodings.len() || encodings.is_empty() {
        return Err(Error::DimensionMismatch(format!(
            "{} weights for {} encodings",
            weights.len(),
            encodings.len()
        )));
    }
    let dim = encodings[0].len();
    let mut context = vec![0.0; dim];
    for (a, h) in weights.iter().zip(encodings) {
        if h.len() != dim {
            return Err(Error::DimensionMismatch("ragged encodings".into()));
        }
        super::tensor::axpy(*a, h, &mut context);
    }
    Ok(context)
}

struct LstmStep {
    /// `[x; h_prev]`
    input: Vec<f64>,
    /// Activated gates `[i; f; o; g]`.
    gates: Vec<f64>,
    c_prev: Vec<f64>,
    tanh_c: Vec<f64>,
    h: Vec<f64>,
    c: Vec<f64>,
}

fn lstm_forward(w: &Tensor, b: &Tensor, input: Vec<f64>, c_prev: &[f64]) -> LstmStep {
    let hd = c_prev.len();
    let mut gates = w.affine(&input, b.data());
    for (k, z) in gates.iter_mut().enumerate() {
        *z = if k < 3 * hd { sigmoid(*z) } else { z.tanh() };
    }
    let (mut c, mut tanh_c, mut h) = (vec![0.0; hd], vec![0.0; hd], vec![0.0; hd]);
    for d in 0..hd {
        let (i, f, o, g) = (gates[d], gates[hd + d], gates[2 * hd + d], gates[3 * hd + d]);
        c[d] = f * c_prev[d] + i * g;
        tanh_c[d] = c[d].tanh();
        h[d] = o * tanh_c[d];
    }
    LstmStep {
        input,
        gates,
        c_prev: c_prev.to_vec(),
        tanh_c,
        h,
        c,
    }
}

/// Accumulates weight gradients; returns `(d input, d c_prev)`.
fn lstm_backward(
    w: &Tensor,
    dw: &mut Tensor,
    db: &mut Tensor,
    step: &LstmStep,
    dh: &[f64],
    dc_next: &[f64],
) -> (Vec<f64>, Vec<f64>) {
    let hd = dh.len();
    let g = &step.gates;
    let mut dz = vec![0.0; 4 * hd];
    let mut dc_prev = vec![0.0; hd];
    for d in 0..hd {
        let (i, f, o, cand) = (g[d], g[hd + d], g[2 * hd + d], g[3 * hd + d]);
        let tc = step.tanh_c[d];
        let dc = dc_next[d] + dh[d] * o * (1.0 - tc * tc);
        dz[d] = dc * cand * i * (1.0 - i);
        dz[hd + d] = dc * step.c_prev[d] * f * (1.0 - f);
        dz[2 * hd + d] = dh[d] * tc * o * (1.0 - o);
        dz[3 * hd + d] = dc * i * (1.0 - cand * cand);
        dc_prev[d] = dc * f;
    }
    dw.add_outer(&dz, &step.input);
    add_assign(db.data_mut(), &dz);
    let mut dinput = vec![0.0; step.input.len()];
    w.matvec_t_add(&dz, &mut dinput);
    (dinput, dc_prev)
}

struct Encoded {
    source: Vec<usize>,
    fwd: Vec<LstmStep>,
    /// Indexed by source position.
    bwd: Vec<LstmStep>,
    states: Vec<Vec<f64>>,
    /// `att_enc_w @ h_j`, reused at every decoding step.
    projected: Vec<Vec<f64>>,
}

struct DecoderStep {
    prev: usize,
    target: usize,
    s_prev: Vec<f64>,
    activations: Vec<Vec<f64>>,
    weights: Vec<f64>,
    context: Vec<f64>,
    lstm: LstmStep,
    output_input: Vec<f64>,
    log_probs: Vec<f64>,
}

struct Forward {
    enc: Encoded,
    c0: Vec<f64>,
    s0: Vec<f64>,
    steps: Vec<DecoderStep>,
}

impl NeuralScorer {
    fn encode_ids(&self, source: &Sentence) -> Result<Encoded> {
        if source.is_empty() {
            return Err(Error::EmptySource);
        }
        let p = &self.params;
        let hd = self.config.hidden_dim();
        let ids = self.config.source_vocab().ids(source);
        let embed = &p[Param::SrcEmbed];
        let run = |w: Param, b: Param, order: &mut dyn Iterator<Item = usize>| {
            let mut steps: Vec<(usize, LstmStep)> = Vec::with_capacity(ids.len());
            let (mut h, mut c) = (vec![0.0; hd], vec![0.0; hd]);
            for j in order {
                let mut input = embed.row(ids[j]).to_vec();
                input.extend_from_slice(&h);
                let step = lstm_forward(&p[w], &p[b], input, &c);
                h = step.h.clone();
                c = step.c.clone();
                steps.push((j, step));
            }
            steps.sort_by_key(|(j, _)| *j);
            steps.into_iter().map(|(_, s)| s).collect::<Vec<_>>()
        };
        let fwd = run(Param::EncFwdW, Param::EncFwdB, &mut (0..ids.len()));
        let bwd = run(Param::EncBwdW, Param::EncBwdB, &mut (0..ids.len()).rev());
        let states: Vec<Vec<f64>> = fwd
            .iter()
            .zip(&bwd)
            .map(|(f, b)| f.h.iter().chain(&b.h).copied().collect())
            .collect();
        let projected = states.iter().map(|h| p[Param::AttEncW].matvec(h)).collect();
        Ok(Encoded {
            source: ids,
            fwd,
            bwd,
            states,
            projected,
        })
    }

    /// One encoding per source word: forward and backward LSTM states concatenated.
    pub fn encode(&self, source: &Sentence) -> Result<Vec<Vec<f64>>> {
        Ok(self.encode_ids(source)?.states)
    }

    fn attend(&self, state: &[f64], enc_states: &[Vec<f64>], projected: &[Vec<f64>]) -> (Vec<Vec<f64>>, Attention) {
        let p = &self.params;
        let pre = p[Param::AttStateW].affine(state, p[Param::AttB].data());
        let v = p[Param::AttV].data();
        let activations: Vec<Vec<f64>> = projected
            .iter()
            .map(|u| pre.iter().zip(u).map(|(a, b)| (a + b).tanh()).collect())
            .collect();
        let scores: Vec<f64> = activations.iter().map(|act| dot(v, act)).collect();
        let weights = super::tensor::softmax(&scores);
        let context = weighted_context(&weights, enc_states).expect("consistent encodings");
        (activations, Attention { weights, context })
    }

    /// Alignment weights of `decoder_state` over `encodings` and their context vector.
    pub fn attention(&self, decoder_state: &[f64], encodings: &[Vec<f64>]) -> Result<Attention> {
        let hd = self.config.hidden_dim();
        if decoder_state.len() != hd {
            return Err(Error::DimensionMismatch(format!(
                "decoder state has {} values, expected {hd}",
                decoder_state.len()
            )));
        }
        if encodings.is_empty() {
            return Err(Error::DimensionMismatch("no encodings".into()));
        }
        if let Some(h) = encodings.iter().find(|h| h.len() != 2 * hd) {
            return Err(Error::DimensionMismatch(format!(
                "encoding has {} values, expected {}",
                h.len(),
                2 * hd
            )));
        }
        let projected: Vec<Vec<f64>> = encodings
            .iter()
            .map(|h| self.params[Param::AttEncW].matvec(h))
            .collect();
        Ok(self.attend(decoder_state, encodings, &projected).1)
    }

    fn forward(&self, source: &Sentence, target: &Sentence) -> Result<Forward> {
        let p = &self.params;
        let enc = self.encode_ids(source)?;
        let hd = self.config.hidden_dim();
        let c0 = p[Param::DecInitW].affine(&enc.bwd[0].h, p[Param::DecInitB].data());
        let s0: Vec<f64> = c0.iter().map(|v| v.tanh()).collect();
        let vocab = self.config.target_vocab();
        let mut targets = vocab.ids(target);
        targets.push(END_ID);

        let mut steps = Vec::with_capacity(targets.len());
        let (mut s, mut c) = (s0.clone(), c0.clone());
        let mut prev = START_ID;
        for &y in &targets {
            let (activations, att) = self.attend(&s, &enc.states, &enc.projected);
            let mut input = p[Param::TrgEmbed].row(prev).to_vec();
            input.extend_from_slice(&att.context);
            input.extend_from_slice(&s);
            let lstm = lstm_forward(&p[Param::DecW], &p[Param::DecB], input, &c);
            let mut output_input = lstm.h.clone();
            output_input.extend_from_slice(&att.context);
            let logits = p[Param::OutW].affine(&output_input, p[Param::OutB].data());
            let log_probs = log_softmax(&logits);
            let s_prev = std::mem::replace(&mut s, lstm.h.clone());
            c = lstm.c.clone();
            debug_assert_eq!(s.len(), hd);
            steps.push(DecoderStep {
                prev,
                target: y,
                s_prev,
                activations,
                weights: att.weights,
                context: att.context,
                lstm,
                output_input,
                log_probs,
            });
            prev = y;
        }
        Ok(Forward { enc, c0, s0, steps })
    }

    /// Per-step attention, distributions and targets for scoring `target` given `source`.
    pub fn trace(&self, source: &Sentence, target: &Sentence) -> Result<ScoreTrace> {
        let fwd = self.forward(source, target)?;
        Ok(ScoreTrace {
            encodings: fwd.enc.states,
            steps: fwd
                .steps
                .into_iter()
                .map(|s| StepTrace {
                    attention: Attention {
                        weights: s.weights,
                        context: s.context,
                    },
                    log_probs: s.log_probs,
                    target: s.target,
                })
                .collect(),
        })
    }

    /// Natural-log likelihood of `target` (end-of-sentence included) given `source`.
    pub fn score(&self, source: &Sentence, target: &Sentence) -> Result<f64> {
        Ok(self
            .forward(source, target)?
            .steps
            .iter()
            .map(|s| s.log_probs[s.target])
            .sum())
    }

    /// Log-probability of the correct word at each step.
    pub fn step_log_likelihoods(&self, source: &Sentence, target: &Sentence) -> Result<Vec<f64>> {
        Ok(self
            .forward(source, target)?
            .steps
            .iter()
            .map(|s| s.log_probs[s.target])
            .collect())
    }

    /// Gradient of the negative log-likelihood, one tensor per parameter.
    pub fn gradient(&self, source: &Sentence, target: &Sentence) -> Result<Params> {
        let mut grad = Params::zeros(&self.config);
        self.accumulate_gradient(source, target, &mut grad)?;
        Ok(grad)
    }

    /// Adds the negative log-likelihood gradient into `grad`; returns the
    /// log-likelihood.
    #[allow(clippy::needless_range_loop)]
    pub fn accumulate_gradient(&self, source: &Sentence, target: &Sentence, grad: &mut Params) -> Result<f64> {
        let fwd = self.forward(source, target)?;
        let p = &self.params;
        let hd = self.config.hidden_dim();
        let ed = self.config.embedding_dim();
        let n = fwd.enc.states.len();
        let mut d_states = vec![vec![0.0; 2 * hd]; n];
        let mut ds_next = vec![0.0; hd];
        let mut dc_next = vec![0.0; hd];
        let log_likelihood: f64 = fwd.steps.iter().map(|s| s.log_probs[s.target]).sum();

        for step in fwd.steps.iter().rev() {
            let mut dlogits: Vec<f64> = step.log_probs.iter().map(|lp| lp.exp()).collect();
            dlogits[step.target] -= 1.0;
            grad[Param::OutW].add_outer(&dlogits, &step.output_input);
            add_assign(grad[Param::OutB].data_mut(), &dlogits);
            let mut d_out = vec![0.0; 3 * hd];
            p[Param::OutW].matvec_t_add(&dlogits, &mut d_out);

            let mut ds = ds_next;
            add_assign(&mut ds, &d_out[..hd]);
            let mut d_context = d_out[hd..].to_vec();

            let (d_input, dc_prev) = {
                let (dw, db) = two_mut(grad, Param::DecW, Param::DecB);
                lstm_backward(&p[Param::DecW], dw, db, &step.lstm, &ds, &dc_next)
            };
            add_assign(grad[Param::TrgEmbed].row_mut(step.prev), &d_input[..ed]);
            add_assign(&mut d_context, &d_input[ed..ed + 2 * hd]);
            let mut ds_prev = d_input[ed + 2 * hd..].to_vec();

            // context = Σ_j a_j h_j, a = softmax(v · tanh(W s + U h_j + b))
            let da: Vec<f64> = fwd.enc.states.iter().map(|h| dot(&d_context, h)).collect();
            let mean_da = dot(&step.weights, &da);
            let v = p[Param::AttV].data();
            let mut d_pre_sum = vec![0.0; v.len()];
            for j in 0..n {
                super::tensor::axpy(step.weights[j], &d_context, &mut d_states[j]);
                let d_score = step.weights[j] * (da[j] - mean_da);
                if d_score == 0.0 {
                    continue;
                }
                let act = &step.activations[j];
                super::tensor::axpy(d_score, act, grad[Param::AttV].data_mut());
                let d_pre: Vec<f64> = v
                    .iter()
                    .zip(act)
                    .map(|(vk, ak)| d_score * vk * (1.0 - ak * ak))
                    .collect();
                grad[Param::AttEncW].add_outer(&d_pre, &fwd.enc.states[j]);
                p[Param::AttEncW].matvec_t_add(&d_pre, &mut d_states[j]);
                add_assign(&mut d_pre_sum, &d_pre);
            }
            add_assign(grad[Param::AttB].data_mut(), &d_pre_sum);
            grad[Param::AttStateW].add_outer(&d_pre_sum, &step.s_prev);
            p[Param::AttStateW].matvec_t_add(&d_pre_sum, &mut ds_prev);

            ds_next = ds_prev;
            dc_next = dc_prev;
        }

        // s0 = tanh(c0), c0 = W_init · (final backward state) + b_init
        let dc0: Vec<f64> = (0..hd)
            .map(|d| dc_next[d] + ds_next[d] * (1.0 - fwd.s0[d] * fwd.s0[d]))
            .collect();
        debug_assert_eq!(fwd.c0.len(), hd);
        grad[Param::DecInitW].add_outer(&dc0, &fwd.enc.bwd[0].h);
        add_assign(grad[Param::DecInitB].data_mut(), &dc0);
        p[Param::DecInitW].matvec_t_add(&dc0, &mut d_states[0][hd..]);

        // forward encoder: position n-1 back to 0
        let (mut dh, mut dc) = (vec![0.0; hd], vec![0.0; hd]);
        for j in (0..n).rev() {
            add_assign(&mut dh, &d_states[j][..hd]);
            let (d_input, dc_prev) = {
                let (dw, db) = two_mut(grad, Param::EncFwdW, Param::EncFwdB);
                lstm_backward(&p[Param::EncFwdW], dw, db, &fwd.enc.fwd[j], &dh, &dc)
            };
            add_assign(grad[Param::SrcEmbed].row_mut(fwd.enc.source[j]), &d_input[..ed]);
            dh = d_input[ed..].to_vec();
            dc = dc_prev;
        }
        // backward encoder ran n-1 down to 0, so gradients flow 0 up to n-1
        let (mut dh, mut dc) = (vec![0.0; hd], vec![0.0; hd]);
        for j in 0..n {
            add_assign(&mut dh, &d_states[j][hd..]);
            let (d_input, dc_prev) = {
                let (dw, db) = two_mut(grad, Param::EncBwdW, Param::EncBwdB);
                lstm_backward(&p[Param::EncBwdW], dw, db, &fwd.enc.bwd[j], &dh, &dc)
            };
            add_assign(grad[Param::SrcEmbed].row_mut(fwd.enc.source[j]), &d_input[..ed]);
            dh = d_input[ed..].to_vec();
            dc = dc_prev;
        }
        Ok(log_likelihood)
    }
}

fn two_mut(params: &mut Params, a: Param, b: Param) -> (&mut Tensor, &mut Tensor) {
    assert!((a as usize) < (b as usize));
    let mut it = params.iter_mut();
    let mut first = None;
    let mut second = None;
    for (p, t) in &mut it {
        if p == a {
            first = Some(t);
        } else if p == b {
            second = Some(t);
        }
    }
    (first.unwrap(), second.unwrap())
}
