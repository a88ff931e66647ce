//! Actor-critic networks with hand-rolled forward/backward passes.
//!
//! The actor and critic are separate tanh MLPs (sharing a trunk lets large
//! value targets crowd out the policy features, so they get their own
//! weights). Each trunk optionally feeds a minimal gated recurrent cell (one
//! forget gate plus a candidate state). The actor ends in an action-mean
//! head plus a state-independent log standard deviation; the critic ends in
//! a scalar value head. Actions are squashed through tanh at the environment
//! boundary with the exact log-probability correction.
//!
//! All parameters live in one flat `f64` buffer described by a named tensor
//! table, which is what the checkpoint format serializes.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::CoreError;
use crate::math::{exp, log, softplus, tanh, Fnv1a};
use crate::rng::{standard_normal, uniform, DetRng};

/// Bounds applied to the log standard deviation inside the distribution.
pub const LOG_STD_MIN: f64 = -5.0;
pub const LOG_STD_MAX: f64 = 2.0;

const LN_2PI: f64 = 1.837_877_066_409_345_6;
const LN_2: f64 = core::f64::consts::LN_2;

/// Network architecture descriptor; the actor and critic share it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ArchDesc {
    pub obs_dim: usize,
    pub act_dim: usize,
    /// Trunk layer widths; may be empty for linear heads on the raw
    /// observation.
    pub hidden: Vec<usize>,
    pub recurrent: bool,
    /// Recurrent cell width (ignored when `recurrent` is off).
    pub rec_hidden: usize,
    /// Hash of the observation layout this network was built for.
    pub layout_hash: u64,
}

impl ArchDesc {
    pub fn validate(&self) -> Result<(), CoreError> {
        if self.obs_dim == 0 || self.act_dim == 0 {
            return Err(CoreError::Config(String::from(
                "network needs nonzero observation and action dims",
            )));
        }
        if self.hidden.iter().any(|&h| h == 0) {
            return Err(CoreError::Config(String::from("zero-width trunk layer")));
        }
        if self.recurrent && self.rec_hidden == 0 {
            return Err(CoreError::Config(String::from(
                "recurrent cell needs a nonzero width",
            )));
        }
        Ok(())
    }

    /// Width a trunk delivers to its cell / head.
    pub fn trunk_out(&self) -> usize {
        self.hidden.last().copied().unwrap_or(self.obs_dim)
    }

    /// Width feeding a head.
    pub fn head_in(&self) -> usize {
        if self.recurrent {
            self.rec_hidden
        } else {
            self.trunk_out()
        }
    }

    /// Hidden-state width carried between steps: the actor's and critic's
    /// cell states concatenated (zero when feedforward).
    pub fn hidden_state_dim(&self) -> usize {
        if self.recurrent {
            2 * self.rec_hidden
        } else {
            0
        }
    }

    /// Stable hash of the architecture (part of checkpoint validation).
    pub fn digest(&self) -> u64 {
        let mut h = Fnv1a::new();
        let mut push = |v: u64| h.update(&v.to_le_bytes());
        push(self.obs_dim as u64);
        push(self.act_dim as u64);
        push(self.hidden.len() as u64);
        for &w in &self.hidden {
            push(w as u64);
        }
        push(u64::from(self.recurrent));
        push(self.rec_hidden as u64);
        push(self.layout_hash);
        h.finish()
    }

    fn specs_per_subnet(&self) -> usize {
        2 * self.hidden.len() + if self.recurrent { 6 } else { 0 }
    }
}

/// One named tensor inside the flat parameter buffer.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TensorSpec {
    pub name: String,
    pub shape: Vec<usize>,
    pub offset: usize,
}

impl TensorSpec {
    pub fn len(&self) -> usize {
        self.shape.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Tensor table of an architecture, in serialization order.
pub fn tensor_specs(desc: &ArchDesc) -> Vec<TensorSpec> {
    let mut specs = Vec::new();
    let mut offset = 0usize;
    let push = |specs: &mut Vec<TensorSpec>, offset: &mut usize, name: String, shape: Vec<usize>| {
        let len: usize = shape.iter().product();
        specs.push(TensorSpec {
            name,
            shape,
            offset: *offset,
        });
        *offset += len;
    };
    for role in ["actor", "critic"] {
        let mut inp = desc.obs_dim;
        for (i, &w) in desc.hidden.iter().enumerate() {
            push(&mut specs, &mut offset, format!("{role}.trunk.{i}.w"), vec![w, inp]);
            push(&mut specs, &mut offset, format!("{role}.trunk.{i}.b"), vec![w]);
            inp = w;
        }
        if desc.recurrent {
            let (t, r) = (desc.trunk_out(), desc.rec_hidden);
            for gate in ["f", "h"] {
                push(&mut specs, &mut offset, format!("{role}.cell.w{gate}"), vec![r, t]);
                push(&mut specs, &mut offset, format!("{role}.cell.u{gate}"), vec![r, r]);
                push(&mut specs, &mut offset, format!("{role}.cell.b{gate}"), vec![r]);
            }
        }
        let d = desc.head_in();
        if role == "actor" {
            push(&mut specs, &mut offset, String::from("actor.mean.w"), vec![desc.act_dim, d]);
            push(&mut specs, &mut offset, String::from("actor.mean.b"), vec![desc.act_dim]);
            push(&mut specs, &mut offset, String::from("actor.log_std"), vec![desc.act_dim]);
        } else {
            push(&mut specs, &mut offset, String::from("critic.value.w"), vec![1, d]);
            push(&mut specs, &mut offset, String::from("critic.value.b"), vec![1]);
        }
    }
    specs
}

/// The policy's weights: an architecture descriptor plus one flat buffer.
#[derive(Clone, Debug, PartialEq)]
pub struct PolicyParams {
    desc: ArchDesc,
    specs: Vec<TensorSpec>,
    data: Vec<f64>,
}

impl PolicyParams {
    pub fn zeros(desc: ArchDesc) -> Result<Self, CoreError> {
        desc.validate()?;
        let specs = tensor_specs(&desc);
        let total = specs.iter().map(TensorSpec::len).sum();
        Ok(PolicyParams {
            desc,
            specs,
            data: vec![0.0; total],
        })
    }

    /// Seeded initialization: uniform fan-balanced weights, zero biases,
    /// log standard deviation at -0.5.
    pub fn init(desc: ArchDesc, rng: &mut DetRng) -> Result<Self, CoreError> {
        let mut p = Self::zeros(desc)?;
        let names: Vec<(String, Vec<usize>)> = p
            .specs
            .iter()
            .map(|s| (s.name.clone(), s.shape.clone()))
            .collect();
        for (name, shape) in names {
            if name == "actor.log_std" {
                for v in p.tensor_mut(&name)? {
                    *v = -0.5;
                }
                continue;
            }
            if shape.len() < 2 {
                continue; // biases start at zero
            }
            let bound = crate::math::sqrt(6.0 / (shape[0] + shape[1]) as f64);
            for v in p.tensor_mut(&name)? {
                *v = uniform(rng, -bound, bound);
            }
        }
        Ok(p)
    }

    pub fn desc(&self) -> &ArchDesc {
        &self.desc
    }

    pub fn specs(&self) -> &[TensorSpec] {
        &self.specs
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn num_params(&self) -> usize {
        self.data.len()
    }

    pub fn from_data(desc: ArchDesc, data: Vec<f64>) -> Result<Self, CoreError> {
        desc.validate()?;
        let specs = tensor_specs(&desc);
        let total: usize = specs.iter().map(TensorSpec::len).sum();
        if data.len() != total {
            return Err(CoreError::ShapeMismatch(format!(
                "parameter buffer holds {}, architecture needs {total}",
                data.len()
            )));
        }
        Ok(PolicyParams { desc, specs, data })
    }

    fn spec(&self, name: &str) -> Result<&TensorSpec, CoreError> {
        self.specs
            .iter()
            .find(|s| s.name == name)
            .ok_or_else(|| CoreError::InvalidArgument(format!("no tensor named {name}")))
    }

    pub fn tensor(&self, name: &str) -> Result<&[f64], CoreError> {
        let s = self.spec(name)?;
        Ok(&self.data[s.offset..s.offset + s.len()])
    }

    pub fn tensor_mut(&mut self, name: &str) -> Result<&mut [f64], CoreError> {
        let (offset, len) = {
            let s = self.spec(name)?;
            (s.offset, s.len())
        };
        Ok(&mut self.data[offset..offset + len])
    }

    fn view(&self, spec_index: usize) -> &[f64] {
        let s = &self.specs[spec_index];
        &self.data[s.offset..s.offset + s.len()]
    }

    /// Clamped log standard deviations used by the distribution.
    pub fn effective_log_std(&self) -> Vec<f64> {
        self.tensor("actor.log_std")
            .expect("log_std tensor")
            .iter()
            .map(|v| v.clamp(LOG_STD_MIN, LOG_STD_MAX))
            .collect()
    }

    /// Raw log-std view (loss code reads clamp activity from it).
    pub fn raw_log_std(&self) -> &[f64] {
        self.tensor("actor.log_std").expect("log_std tensor")
    }

    /// Gradient offset of the log-std tensor (loss code adds to it directly;
    /// the distribution is state-independent).
    pub fn log_std_offset(&self) -> usize {
        self.spec("actor.log_std").expect("log_std tensor").offset
    }
}

/// Intermediate activations of one sub-network.
#[derive(Clone, Debug)]
struct SubCache {
    /// Post-tanh output of each trunk layer.
    trunk_out: Vec<Vec<f64>>,
    cell: Option<CellCache>,
    head_in: Vec<f64>,
}

#[derive(Clone, Debug)]
struct CellCache {
    h_prev: Vec<f64>,
    forget: Vec<f64>,
    gated_prev: Vec<f64>,
    cand: Vec<f64>,
}

/// Intermediate activations kept for the backward pass.
#[derive(Clone, Debug)]
pub struct ForwardCache {
    obs: Vec<f64>,
    actor: SubCache,
    critic: SubCache,
}

/// Result of one forward evaluation.
#[derive(Clone, Debug)]
pub struct PolicyOutput {
    pub mean: Vec<f64>,
    pub value: f64,
    /// Actor cell state followed by critic cell state.
    pub hidden_next: Vec<f64>,
    pub cache: ForwardCache,
}

fn matvec(w: &[f64], rows: usize, cols: usize, x: &[f64], b: &[f64], out: &mut [f64]) {
    for r in 0..rows {
        let row = &w[r * cols..(r + 1) * cols];
        let mut acc = b[r];
        for c in 0..cols {
            acc += row[c] * x[c];
        }
        out[r] = acc;
    }
}

/// `dx += W^T dy`
fn matvec_t_acc(w: &[f64], rows: usize, cols: usize, dy: &[f64], dx: &mut [f64]) {
    for r in 0..rows {
        let row = &w[r * cols..(r + 1) * cols];
        let g = dy[r];
        for c in 0..cols {
            dx[c] += row[c] * g;
        }
    }
}

/// `dw[r][c] += dy[r] * x[c]`
fn outer_acc(dw: &mut [f64], dy: &[f64], x: &[f64]) {
    let cols = x.len();
    for (r, &g) in dy.iter().enumerate() {
        let row = &mut dw[r * cols..(r + 1) * cols];
        for c in 0..cols {
            row[c] += g * x[c];
        }
    }
}

impl PolicyParams {
    /// Run one sub-network (trunk, optional cell, one linear head).
    fn subnet_forward(
        &self,
        base: usize,
        head_rows: usize,
        obs: &[f64],
        hidden: &[f64],
    ) -> (Vec<f64>, Vec<f64>, SubCache) {
        let desc = &self.desc;
        let mut x: Vec<f64> = obs.to_vec();
        let mut trunk_out = Vec::with_capacity(desc.hidden.len());
        let mut spec_idx = base;
        for &w in &desc.hidden {
            let wm = self.view(spec_idx);
            let bm = self.view(spec_idx + 1);
            spec_idx += 2;
            let mut y = vec![0.0; w];
            matvec(wm, w, x.len(), &x, bm, &mut y);
            for v in &mut y {
                *v = tanh(*v);
            }
            trunk_out.push(y.clone());
            x = y;
        }
        let (head_in, hidden_next, cell_cache) = if desc.recurrent {
            let r = desc.rec_hidden;
            let t = desc.trunk_out();
            let wf = self.view(spec_idx);
            let uf = self.view(spec_idx + 1);
            let bf = self.view(spec_idx + 2);
            let wh = self.view(spec_idx + 3);
            let uh = self.view(spec_idx + 4);
            let bh = self.view(spec_idx + 5);
            spec_idx += 6;
            let mut af = vec![0.0; r];
            matvec(wf, r, t, &x, bf, &mut af);
            let zero = vec![0.0; r];
            let mut tmp = vec![0.0; r];
            matvec(uf, r, r, hidden, &zero, &mut tmp);
            let forget: Vec<f64> = af
                .iter()
                .zip(&tmp)
                .map(|(a, u)| crate::math::sigmoid(a + u))
                .collect();
            let gated_prev: Vec<f64> = forget.iter().zip(hidden).map(|(f, h)| f * h).collect();
            let mut ah = vec![0.0; r];
            matvec(wh, r, t, &x, bh, &mut ah);
            matvec(uh, r, r, &gated_prev, &zero, &mut tmp);
            let cand: Vec<f64> = ah.iter().zip(&tmp).map(|(a, u)| tanh(a + u)).collect();
            let h_new: Vec<f64> = forget
                .iter()
                .zip(hidden.iter().zip(&cand))
                .map(|(f, (h, c))| (1.0 - f) * h + f * c)
                .collect();
            let cache = CellCache {
                h_prev: hidden.to_vec(),
                forget,
                gated_prev,
                cand,
            };
            (h_new.clone(), h_new, Some(cache))
        } else {
            (x.clone(), Vec::new(), None)
        };
        let d = desc.head_in();
        let head_w = self.view(spec_idx);
        let head_b = self.view(spec_idx + 1);
        let mut head = vec![0.0; head_rows];
        matvec(head_w, head_rows, d, &head_in, head_b, &mut head);
        (
            head,
            hidden_next,
            SubCache {
                trunk_out,
                cell: cell_cache,
                head_in,
            },
        )
    }

    /// Backward through one sub-network; returns the gradient at its
    /// previous cell state.
    #[allow(clippy::too_many_arguments)]
    fn subnet_backward(
        &self,
        base: usize,
        head_rows: usize,
        obs: &[f64],
        cache: &SubCache,
        d_head: &[f64],
        d_hidden_next: &[f64],
        grads: &mut [f64],
    ) -> Vec<f64> {
        let desc = &self.desc;
        let n_trunk = desc.hidden.len();
        let cell_base = base + 2 * n_trunk;
        let head_base = cell_base + if desc.recurrent { 6 } else { 0 };
        let d = desc.head_in();

        // head
        let mut d_in = vec![0.0; d];
        let head_w = self.view(head_base);
        matvec_t_acc(head_w, head_rows, d, d_head, &mut d_in);
        let sw = &self.specs[head_base];
        outer_acc(&mut grads[sw.offset..sw.offset + sw.len()], d_head, &cache.head_in);
        let sb = &self.specs[head_base + 1];
        for (g, v) in grads[sb.offset..sb.offset + sb.len()].iter_mut().zip(d_head) {
            *g += v;
        }

        // recurrent cell
        let (mut d_x, d_h_prev) = if desc.recurrent {
            let r = desc.rec_hidden;
            let t = desc.trunk_out();
            let cell = cache.cell.as_ref().expect("recurrent cache");
            let mut dh_new = d_in;
            for (g, f) in dh_new.iter_mut().zip(d_hidden_next) {
                *g += f;
            }
            let mut d_forget: Vec<f64> = dh_new
                .iter()
                .zip(cell.cand.iter().zip(&cell.h_prev))
                .map(|(g, (c, h))| g * (c - h))
                .collect();
            let d_cand: Vec<f64> = dh_new.iter().zip(&cell.forget).map(|(g, f)| g * f).collect();
            let mut d_h_prev: Vec<f64> = dh_new
                .iter()
                .zip(&cell.forget)
                .map(|(g, f)| g * (1.0 - f))
                .collect();
            let d_ah: Vec<f64> = d_cand
                .iter()
                .zip(&cell.cand)
                .map(|(g, c)| g * (1.0 - c * c))
                .collect();
            let trunk_x: &[f64] = if n_trunk == 0 {
                obs
            } else {
                &cache.trunk_out[n_trunk - 1]
            };
            let swh = &self.specs[cell_base + 3];
            outer_acc(&mut grads[swh.offset..swh.offset + swh.len()], &d_ah, trunk_x);
            let suh = &self.specs[cell_base + 4];
            outer_acc(
                &mut grads[suh.offset..suh.offset + suh.len()],
                &d_ah,
                &cell.gated_prev,
            );
            let sbh = &self.specs[cell_base + 5];
            for (g, v) in grads[sbh.offset..sbh.offset + sbh.len()].iter_mut().zip(&d_ah) {
                *g += v;
            }
            let mut d_gated = vec![0.0; r];
            matvec_t_acc(self.view(cell_base + 4), r, r, &d_ah, &mut d_gated);
            for i in 0..r {
                d_forget[i] += d_gated[i] * cell.h_prev[i];
                d_h_prev[i] += d_gated[i] * cell.forget[i];
            }
            let d_af: Vec<f64> = d_forget
                .iter()
                .zip(&cell.forget)
                .map(|(g, f)| g * f * (1.0 - f))
                .collect();
            let swf = &self.specs[cell_base];
            outer_acc(&mut grads[swf.offset..swf.offset + swf.len()], &d_af, trunk_x);
            let suf = &self.specs[cell_base + 1];
            outer_acc(
                &mut grads[suf.offset..suf.offset + suf.len()],
                &d_af,
                &cell.h_prev,
            );
            let sbf = &self.specs[cell_base + 2];
            for (g, v) in grads[sbf.offset..sbf.offset + sbf.len()].iter_mut().zip(&d_af) {
                *g += v;
            }
            matvec_t_acc(self.view(cell_base + 1), r, r, &d_af, &mut d_h_prev);
            let mut d_x = vec![0.0; t];
            matvec_t_acc(self.view(cell_base), r, t, &d_af, &mut d_x);
            matvec_t_acc(self.view(cell_base + 3), r, t, &d_ah, &mut d_x);
            (d_x, d_h_prev)
        } else {
            (d_in, Vec::new())
        };

        // trunk, last layer first
        for i in (0..n_trunk).rev() {
            let y = &cache.trunk_out[i];
            let d_a: Vec<f64> = d_x.iter().zip(y).map(|(g, v)| g * (1.0 - v * v)).collect();
            let x: &[f64] = if i == 0 { obs } else { &cache.trunk_out[i - 1] };
            let sw = &self.specs[base + 2 * i];
            outer_acc(&mut grads[sw.offset..sw.offset + sw.len()], &d_a, x);
            let sb = &self.specs[base + 2 * i + 1];
            for (g, v) in grads[sb.offset..sb.offset + sb.len()].iter_mut().zip(&d_a) {
                *g += v;
            }
            let mut d_prev = vec![0.0; x.len()];
            matvec_t_acc(self.view(base + 2 * i), y.len(), x.len(), &d_a, &mut d_prev);
            d_x = d_prev;
        }
        d_h_prev
    }

    fn critic_base(&self) -> usize {
        // actor subnet plus its three head tensors
        self.desc.specs_per_subnet() + 3
    }

    /// Evaluate both networks; `hidden` must have `hidden_state_dim()`
    /// entries (actor state then critic state).
    pub fn forward(&self, obs: &[f64], hidden: &[f64]) -> Result<PolicyOutput, CoreError> {
        if obs.len() != self.desc.obs_dim {
            return Err(CoreError::ShapeMismatch(format!(
                "observation length {} vs network input {}",
                obs.len(),
                self.desc.obs_dim
            )));
        }
        if hidden.len() != self.desc.hidden_state_dim() {
            return Err(CoreError::ShapeMismatch(format!(
                "hidden state length {} vs expected {}",
                hidden.len(),
                self.desc.hidden_state_dim()
            )));
        }
        let r = if self.desc.recurrent {
            self.desc.rec_hidden
        } else {
            0
        };
        let (mean, actor_hidden, actor_cache) =
            self.subnet_forward(0, self.desc.act_dim, obs, &hidden[..r]);
        let (value, critic_hidden, critic_cache) =
            self.subnet_forward(self.critic_base(), 1, obs, &hidden[r..]);
        let mut hidden_next = actor_hidden;
        hidden_next.extend_from_slice(&critic_hidden);
        Ok(PolicyOutput {
            mean,
            value: value[0],
            hidden_next,
            cache: ForwardCache {
                obs: obs.to_vec(),
                actor: actor_cache,
                critic: critic_cache,
            },
        })
    }

    /// Accumulate gradients for one step given head gradients and the
    /// gradient arriving at the next hidden state; returns the gradient for
    /// the previous hidden state.
    pub fn backward(
        &self,
        cache: &ForwardCache,
        d_mean: &[f64],
        d_value: f64,
        d_hidden_next: &[f64],
        grads: &mut [f64],
    ) -> Vec<f64> {
        debug_assert_eq!(grads.len(), self.data.len());
        let r = if self.desc.recurrent {
            self.desc.rec_hidden
        } else {
            0
        };
        let mut d_h_prev = self.subnet_backward(
            0,
            self.desc.act_dim,
            &cache.obs,
            &cache.actor,
            d_mean,
            &d_hidden_next[..r],
            grads,
        );
        let d_h_critic = self.subnet_backward(
            self.critic_base(),
            1,
            &cache.obs,
            &cache.critic,
            &[d_value],
            &d_hidden_next[r..],
            grads,
        );
        d_h_prev.extend_from_slice(&d_h_critic);
        d_h_prev
    }
}

/// Log-probability of a raw (pre-squash) action under the diagonal Gaussian,
/// including the tanh change-of-variables correction for the squashed action
/// actually applied to the environment.
pub fn log_prob_tanh(mean: &[f64], log_std: &[f64], raw: &[f64]) -> f64 {
    let mut lp = 0.0;
    for j in 0..mean.len() {
        let sigma = exp(log_std[j]);
        let z = (raw[j] - mean[j]) / sigma;
        lp += -0.5 * z * z - log_std[j] - 0.5 * LN_2PI;
        // log(1 - tanh(u)^2) = 2 (ln 2 - u - softplus(-2u))
        lp -= 2.0 * (LN_2 - raw[j] - softplus(-2.0 * raw[j]));
    }
    lp
}

/// Gradients of [`log_prob_tanh`] with respect to the mean and log-std. The
/// tanh correction depends only on the stored raw action, so it carries no
/// parameter gradient.
pub fn d_log_prob(mean: &[f64], log_std: &[f64], raw: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let mut d_mean = vec![0.0; mean.len()];
    let mut d_log_std = vec![0.0; mean.len()];
    for j in 0..mean.len() {
        let sigma = exp(log_std[j]);
        let z = (raw[j] - mean[j]) / sigma;
        d_mean[j] = z / sigma;
        d_log_std[j] = z * z - 1.0;
    }
    (d_mean, d_log_std)
}

/// Entropy of the base diagonal Gaussian.
pub fn gaussian_entropy(log_std: &[f64]) -> f64 {
    log_std.iter().map(|ls| ls + 0.5 * (1.0 + LN_2PI)).sum()
}

/// Draw a raw action.
pub fn sample_raw(mean: &[f64], log_std: &[f64], rng: &mut DetRng) -> Vec<f64> {
    mean.iter()
        .zip(log_std)
        .map(|(m, ls)| m + exp(*ls) * standard_normal(rng))
        .collect()
}

/// Squash a raw action into the environment's `[-1, 1]` box.
pub fn squash(raw: &[f64]) -> Vec<f64> {
    raw.iter().map(|u| tanh(*u)).collect()
}

/// Inverse of the squash, for evaluation code.
pub fn atanh(x: f64) -> f64 {
    0.5 * log((1.0 + x) / (1.0 - x))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_from_seed;

    fn tiny_desc(recurrent: bool) -> ArchDesc {
        ArchDesc {
            obs_dim: 2,
            act_dim: 1,
            hidden: vec![2],
            recurrent,
            rec_hidden: 3,
            layout_hash: 42,
        }
    }

    #[test]
    fn zero_params_zero_outputs() {
        let p = PolicyParams::zeros(tiny_desc(false)).unwrap();
        let out = p.forward(&[0.3, -0.7], &[]).unwrap();
        assert_eq!(out.mean, vec![0.0]);
        assert_eq!(out.value, 0.0);
    }

    #[test]
    fn feedforward_hidden_is_empty() {
        let mut rng = rng_from_seed(1);
        let p = PolicyParams::init(tiny_desc(false), &mut rng).unwrap();
        let out = p.forward(&[0.1, 0.2], &[]).unwrap();
        assert!(out.hidden_next.is_empty());
    }

    #[test]
    fn hand_computed_forward() {
        let mut p = PolicyParams::zeros(tiny_desc(false)).unwrap();
        p.tensor_mut("actor.trunk.0.w")
            .unwrap()
            .copy_from_slice(&[0.1, -0.2, 0.3, 0.4]);
        p.tensor_mut("actor.trunk.0.b")
            .unwrap()
            .copy_from_slice(&[0.01, -0.02]);
        p.tensor_mut("actor.mean.w")
            .unwrap()
            .copy_from_slice(&[0.5, -0.6]);
        p.tensor_mut("actor.mean.b").unwrap().copy_from_slice(&[0.05]);
        p.tensor_mut("critic.trunk.0.w")
            .unwrap()
            .copy_from_slice(&[0.2, 0.1, -0.3, 0.2]);
        p.tensor_mut("critic.value.w")
            .unwrap()
            .copy_from_slice(&[0.7, 0.8]);
        p.tensor_mut("critic.value.b").unwrap().copy_from_slice(&[-0.1]);
        let out = p.forward(&[1.0, 2.0], &[]).unwrap();
        // scalar arithmetic done without the matvec machinery
        let a0 = tanh(0.1 * 1.0 + (-0.2) * 2.0 + 0.01);
        let a1 = tanh(0.3 * 1.0 + 0.4 * 2.0 - 0.02);
        assert!((out.mean[0] - (0.5 * a0 - 0.6 * a1 + 0.05)).abs() < 1e-15);
        let c0 = tanh(0.2 * 1.0 + 0.1 * 2.0);
        let c1 = tanh(-0.3 * 1.0 + 0.2 * 2.0);
        assert!((out.value - (0.7 * c0 + 0.8 * c1 - 0.1)).abs() < 1e-15);
    }

    #[test]
    fn recurrent_state_evolves_and_zero_net_halves_state() {
        let mut rng = rng_from_seed(2);
        let p = PolicyParams::init(tiny_desc(true), &mut rng).unwrap();
        // actor state then critic state
        let h0 = vec![0.1, -0.2, 0.3, 0.05, 0.0, -0.4];
        let out = p.forward(&[0.5, 0.5], &h0).unwrap();
        assert_eq!(out.hidden_next.len(), 6);
        assert_ne!(out.hidden_next, h0);
        // zero weights: forget gate 1/2, candidate 0, so the state halves
        let z = PolicyParams::zeros(tiny_desc(true)).unwrap();
        let out = z.forward(&[0.5, 0.5], &h0).unwrap();
        for (h, h_prev) in out.hidden_next.iter().zip(&h0) {
            assert!((h - 0.5 * h_prev).abs() < 1e-15);
        }
    }

    /// Central-difference check of the full backward pass through a scalar
    /// test loss, covering trunks, cells and heads of both networks.
    #[test]
    fn backward_matches_finite_differences() {
        for recurrent in [false, true] {
            let mut rng = rng_from_seed(7);
            let p = PolicyParams::init(tiny_desc(recurrent), &mut rng).unwrap();
            let obs = [0.4, -0.9];
            let h0 = vec![0.05; p.desc().hidden_state_dim()];
            // loss = mean^2 + 3 value + 0.5 |h_next|^2
            let loss = |p: &PolicyParams| {
                let out = p.forward(&obs, &h0).unwrap();
                out.mean[0] * out.mean[0]
                    + 3.0 * out.value
                    + 0.5 * out.hidden_next.iter().map(|h| h * h).sum::<f64>()
            };
            let out = p.forward(&obs, &h0).unwrap();
            let mut grads = vec![0.0; p.num_params()];
            let d_mean = vec![2.0 * out.mean[0]];
            let d_hidden: Vec<f64> = if recurrent {
                out.hidden_next.clone()
            } else {
                vec![]
            };
            p.backward(&out.cache, &d_mean, 3.0, &d_hidden, &mut grads);
            let eps = 1e-6;
            let mut max_err: f64 = 0.0;
            for i in 0..p.num_params() {
                let mut plus = p.clone();
                plus.data_mut()[i] += eps;
                let mut minus = p.clone();
                minus.data_mut()[i] -= eps;
                let fd = (loss(&plus) - loss(&minus)) / (2.0 * eps);
                let denom = grads[i].abs().max(fd.abs()).max(1e-8);
                max_err = max_err.max((grads[i] - fd).abs() / denom);
            }
            assert!(max_err < 1e-6, "recurrent={recurrent} max rel err {max_err}");
        }
    }

    #[test]
    fn squashed_density_integrates_to_one() {
        // quadrature over the squashed support for a 1-D action
        let mean = [0.2];
        let log_std = [-0.4];
        let n = 200_001;
        let lo = -1.0 + 1e-7;
        let hi = 1.0 - 1e-7;
        let step = (hi - lo) / (n as f64 - 1.0);
        let mut integral = 0.0;
        for i in 0..n {
            let a: f64 = lo + step * i as f64;
            let u = atanh(a);
            let p = exp(log_prob_tanh(&mean, &log_std, &[u]));
            let w = if i == 0 || i == n - 1 { 0.5 } else { 1.0 };
            integral += w * p * step;
        }
        assert!((integral - 1.0).abs() < 1e-3, "integral {integral}");
    }

    #[test]
    fn log_prob_gradients() {
        let mean = [0.3, -0.1];
        let log_std = [-0.2, 0.1];
        let raw = [0.5, -0.4];
        let (dm, ds) = d_log_prob(&mean, &log_std, &raw);
        let eps = 1e-7;
        for j in 0..2 {
            let mut m2 = mean;
            m2[j] += eps;
            let fd =
                (log_prob_tanh(&m2, &log_std, &raw) - log_prob_tanh(&mean, &log_std, &raw)) / eps;
            assert!((dm[j] - fd).abs() < 1e-5);
            let mut s2 = log_std;
            s2[j] += eps;
            let fd =
                (log_prob_tanh(&mean, &s2, &raw) - log_prob_tanh(&mean, &log_std, &raw)) / eps;
            assert!((ds[j] - fd).abs() < 1e-5);
        }
    }

    #[test]
    fn tensor_table_is_contiguous() {
        let desc = tiny_desc(true);
        let specs = tensor_specs(&desc);
        let mut offset = 0;
        for s in &specs {
            assert_eq!(s.offset, offset);
            offset += s.len();
        }
        let p = PolicyParams::zeros(desc).unwrap();
        assert_eq!(p.num_params(), offset);
        // actor and critic are disjoint parameter ranges
        assert!(specs.iter().any(|s| s.name.starts_with("actor.")));
        assert!(specs.iter().any(|s| s.name.starts_with("critic.")));
    }
}
