use std::ops::{Index, IndexMut};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::tensor::Tensor;
use super::ScorerConfig;

/// Parameter tensors of the scorer.
///
/// LSTM gate blocks are stacked as input, forget, output, candidate; each
/// LSTM weight matrix acts on `[input; previous hidden state]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Param {
    SrcEmbed,
    TrgEmbed,
    EncFwdW,
    EncFwdB,
    EncBwdW,
    EncBwdB,
    DecInitW,
    DecInitB,
    DecW,
    DecB,
    AttStateW,
    AttEncW,
    AttB,
    AttV,
    OutW,
    OutB,
}

impl Param {
    pub const ALL: [Param; 16] = [
        Param::SrcEmbed,
        Param::TrgEmbed,
        Param::EncFwdW,
        Param::EncFwdB,
        Param::EncBwdW,
        Param::EncBwdB,
        Param::DecInitW,
        Param::DecInitB,
        Param::DecW,
        Param::DecB,
        Param::AttStateW,
        Param::AttEncW,
        Param::AttB,
        Param::AttV,
        Param::OutW,
        Param::OutB,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Param::SrcEmbed => "src_embed",
            Param::TrgEmbed => "trg_embed",
            Param::EncFwdW => "enc_fwd_w",
            Param::EncFwdB => "enc_fwd_b",
            Param::EncBwdW => "enc_bwd_w",
            Param::EncBwdB => "enc_bwd_b",
            Param::DecInitW => "dec_init_w",
            Param::DecInitB => "dec_init_b",
            Param::DecW => "dec_w",
            Param::DecB => "dec_b",
            Param::AttStateW => "att_state_w",
            Param::AttEncW => "att_enc_w",
            Param::AttB => "att_b",
            Param::AttV => "att_v",
            Param::OutW => "out_w",
            Param::OutB => "out_b",
        }
    }

    pub fn from_name(name: &str) -> Option<Param> {
        Param::ALL.into_iter().find(|p| p.name() == name)
    }

    pub fn shape(self, config: &ScorerConfig) -> (usize, usize) {
        let (e, h, a) = (
            config.embedding_dim(),
            config.hidden_dim(),
            config.attention_hidden_dim(),
        );
        let (vs, vt) = (config.source_vocab().len(), config.target_vocab().len());
        match self {
            Param::SrcEmbed => (vs, e),
            Param::TrgEmbed => (vt, e),
            Param::EncFwdW | Param::EncBwdW => (4 * h, e + h),
            Param::EncFwdB | Param::EncBwdB => (4 * h, 1),
            Param::DecInitW => (h, h),
            Param::DecInitB => (h, 1),
            Param::DecW => (4 * h, e + 2 * h + h),
            Param::DecB => (4 * h, 1),
            Param::AttStateW => (a, h),
            Param::AttEncW => (a, 2 * h),
            Param::AttB => (a, 1),
            Param::AttV => (1, a),
            Param::OutW => (vt, 3 * h),
            Param::OutB => (vt, 1),
        }
    }
}

/// One tensor per [`Param`], indexable by it. Also used for gradients.
#[derive(Clone, Debug, PartialEq)]
pub struct Params(Vec<Tensor>);

impl Params {
    pub fn zeros(config: &ScorerConfig) -> Self {
        Params(
            Param::ALL
                .iter()
                .map(|p| {
                    let (r, c) = p.shape(config);
                    Tensor::zeros(r, c)
                })
                .collect(),
        )
    }

    /// Uniform in `[-0.1, 0.1]`, tensors filled in [`Param::ALL`] order.
    pub fn uniform(config: &ScorerConfig) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed());
        let mut params = Params::zeros(config);
        for t in &mut params.0 {
            for v in t.data_mut() {
                *v = rng.random_range(-0.1..=0.1);
            }
        }
        params
    }

    pub(crate) fn from_tensors(tensors: Vec<Tensor>) -> Self {
        assert_eq!(tensors.len(), Param::ALL.len());
        Params(tensors)
    }

    pub fn iter(&self) -> impl Iterator<Item = (Param, &Tensor)> {
        Param::ALL.into_iter().zip(&self.0)
    }

    pub fn iter_mut(&mut self) -> impl Iterator<Item = (Param, &mut Tensor)> {
        Param::ALL.into_iter().zip(&mut self.0)
    }

    pub fn get(&self, name: &str) -> Option<&Tensor> {
        Param::from_name(name).map(|p| &self[p])
    }

    pub fn all_finite(&self) -> bool {
        self.0.iter().all(|t| t.data().iter().all(|v| v.is_finite()))
    }

    /// `self += alpha * other`
    pub fn axpy(&mut self, alpha: f64, other: &Params) {
        for (t, o) in self.0.iter_mut().zip(&other.0) {
            super::tensor::axpy(alpha, o.data(), t.data_mut());
        }
    }

    /// L2 norm over every value.
    pub fn norm(&self) -> f64 {
        self.0
            .iter()
            .flat_map(|t| t.data())
            .map(|v| v * v)
            .sum::<f64>()
            .sqrt()
    }

    pub fn num_values(&self) -> usize {
        self.0.iter().map(Tensor::len).sum()
    }
}

impl Index<Param> for Params {
    type Output = Tensor;

    fn index(&self, p: Param) -> &Tensor {
        &self.0[p as usize]
    }
}

impl IndexMut<Param> for Params {
    fn index_mut(&mut self, p: Param) -> &mut Tensor {
        &mut self.0[p as usize]
    }
}
