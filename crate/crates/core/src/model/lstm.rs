//! Bidirectional LSTM with explicit backpropagation through time.
//!
//! Gate layout inside every `4h` block is `[input, forget, cell, output]`.
//! Each sequence starts from a zero hidden and cell state.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::tensor::{push_mat, push_mat_mut, push_vec, push_vec_mut, sigmoid, Mat, TensorMut, TensorRef, Tensors};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LstmDir {
    /// `4h × d_in`
    pub w_ih: Mat,
    /// `4h × h`
    pub w_hh: Mat,
    /// `4h`
    pub b: Vec<f64>,
}

impl LstmDir {
    pub fn zeros(d_in: usize, hidden: usize) -> Self {
        LstmDir {
            w_ih: Mat::zeros(4 * hidden, d_in),
            w_hh: Mat::zeros(4 * hidden, hidden),
            b: vec![0.0; 4 * hidden],
        }
    }

    /// Weights uniform in `±1/√fan_in`, forget-gate bias 1, other biases 0.
    pub fn uniform<R: Rng>(d_in: usize, hidden: usize, rng: &mut R) -> Self {
        let w_ih = Mat::uniform(4 * hidden, d_in, 1.0 / (d_in as f64).sqrt(), rng);
        let w_hh = Mat::uniform(4 * hidden, hidden, 1.0 / (hidden as f64).sqrt(), rng);
        let mut b = vec![0.0; 4 * hidden];
        b[hidden..2 * hidden].fill(1.0);
        LstmDir { w_ih, w_hh, b }
    }

    pub fn hidden(&self) -> usize {
        self.w_hh.cols
    }

    pub fn input_dim(&self) -> usize {
        self.w_ih.cols
    }
}

impl Tensors for LstmDir {
    fn visit<'a>(&'a self, prefix: &str, out: &mut Vec<TensorRef<'a>>) {
        push_mat(out, prefix, "w_ih", &self.w_ih);
        push_mat(out, prefix, "w_hh", &self.w_hh);
        push_vec(out, prefix, "b", &self.b);
    }

    fn visit_mut<'a>(&'a mut self, prefix: &str, out: &mut Vec<TensorMut<'a>>) {
        push_mat_mut(out, prefix, "w_ih", &mut self.w_ih);
        push_mat_mut(out, prefix, "w_hh", &mut self.w_hh);
        push_vec_mut(out, prefix, "b", &mut self.b);
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BiLstm {
    pub fwd: LstmDir,
    pub bwd: LstmDir,
}

impl BiLstm {
    pub fn zeros(d_in: usize, hidden: usize) -> Self {
        BiLstm {
            fwd: LstmDir::zeros(d_in, hidden),
            bwd: LstmDir::zeros(d_in, hidden),
        }
    }

    pub fn uniform<R: Rng>(d_in: usize, hidden: usize, rng: &mut R) -> Self {
        let fwd = LstmDir::uniform(d_in, hidden, rng);
        let bwd = LstmDir::uniform(d_in, hidden, rng);
        BiLstm { fwd, bwd }
    }

    pub fn hidden(&self) -> usize {
        self.fwd.hidden()
    }

    pub fn input_dim(&self) -> usize {
        self.fwd.input_dim()
    }

    /// Runs both directions; `hidden[t]` is `[h_fwd_t ; h_bwd_t]`.
    pub fn forward(&self, xs: &[&[f64]]) -> BiTrace {
        let fwd = run_dir(&self.fwd, xs, false);
        let bwd = run_dir(&self.bwd, xs, true);
        let h = self.hidden();
        let n = xs.len();
        let hidden = (0..n)
            .map(|t| {
                let mut v = Vec::with_capacity(2 * h);
                v.extend_from_slice(&fwd.steps[t].h);
                v.extend_from_slice(&bwd.steps[n - 1 - t].h);
                v
            })
            .collect();
        BiTrace { fwd, bwd, hidden }
    }

    /// Accumulates parameter gradients into `grad` and returns `∂L/∂x_t`.
    pub fn backward(&self, xs: &[&[f64]], trace: &BiTrace, d_hidden: &[Vec<f64>], grad: &mut BiLstm) -> Vec<Vec<f64>> {
        let h = self.hidden();
        let n = xs.len();
        let mut dx = vec![vec![0.0; self.input_dim()]; n];
        let d_fwd: Vec<&[f64]> = d_hidden.iter().map(|d| &d[..h]).collect();
        let d_bwd: Vec<&[f64]> = d_hidden.iter().map(|d| &d[h..]).collect();
        backprop_dir(&self.fwd, xs, &trace.fwd, &d_fwd, false, &mut grad.fwd, &mut dx);
        backprop_dir(&self.bwd, xs, &trace.bwd, &d_bwd, true, &mut grad.bwd, &mut dx);
        dx
    }
}

impl Tensors for BiLstm {
    fn visit<'a>(&'a self, prefix: &str, out: &mut Vec<TensorRef<'a>>) {
        self.fwd.visit(&crate::tensor::join(prefix, "fwd"), out);
        self.bwd.visit(&crate::tensor::join(prefix, "bwd"), out);
    }

    fn visit_mut<'a>(&'a mut self, prefix: &str, out: &mut Vec<TensorMut<'a>>) {
        self.fwd.visit_mut(&crate::tensor::join(prefix, "fwd"), out);
        self.bwd.visit_mut(&crate::tensor::join(prefix, "bwd"), out);
    }
}

#[derive(Clone, Debug)]
struct StepCache {
    /// Activated gates `[i, f, g, o]`.
    gates: Vec<f64>,
    c: Vec<f64>,
    tanh_c: Vec<f64>,
    h: Vec<f64>,
}

/// Cached activations of one direction, in processing order.
#[derive(Clone, Debug)]
pub struct DirTrace {
    steps: Vec<StepCache>,
}

#[derive(Clone, Debug)]
pub struct BiTrace {
    fwd: DirTrace,
    bwd: DirTrace,
    pub hidden: Vec<Vec<f64>>,
}

#[inline]
fn position(j: usize, n: usize, reverse: bool) -> usize {
    if reverse {
        n - 1 - j
    } else {
        j
    }
}

fn run_dir(p: &LstmDir, xs: &[&[f64]], reverse: bool) -> DirTrace {
    let h = p.hidden();
    let n = xs.len();
    let zeros = vec![0.0; h];
    let mut steps: Vec<StepCache> = Vec::with_capacity(n);
    for j in 0..n {
        let x = xs[position(j, n, reverse)];
        let (h_prev, c_prev) = match steps.last() {
            Some(s) => (&s.h[..], &s.c[..]),
            None => (&zeros[..], &zeros[..]),
        };
        let mut a = p.b.clone();
        p.w_ih.matvec_acc(x, &mut a);
        p.w_hh.matvec_acc(h_prev, &mut a);
        for (k, v) in a.iter_mut().enumerate() {
            *v = if (2 * h..3 * h).contains(&k) { v.tanh() } else { sigmoid(*v) };
        }
        let mut c = vec![0.0; h];
        let mut tanh_c = vec![0.0; h];
        let mut hv = vec![0.0; h];
        for k in 0..h {
            c[k] = a[h + k] * c_prev[k] + a[k] * a[2 * h + k];
            tanh_c[k] = c[k].tanh();
            hv[k] = a[3 * h + k] * tanh_c[k];
        }
        steps.push(StepCache {
            gates: a,
            c,
            tanh_c,
            h: hv,
        });
    }
    DirTrace { steps }
}

fn backprop_dir(
    p: &LstmDir,
    xs: &[&[f64]],
    trace: &DirTrace,
    d_h_out: &[&[f64]],
    reverse: bool,
    grad: &mut LstmDir,
    dx: &mut [Vec<f64>],
) {
    let h = p.hidden();
    let n = xs.len();
    let zeros = vec![0.0; h];
    let mut dh_next = vec![0.0; h];
    let mut dc_next = vec![0.0; h];
    let mut da = vec![0.0; 4 * h];
    for j in (0..n).rev() {
        let pos = position(j, n, reverse);
        let s = &trace.steps[j];
        let (h_prev, c_prev) = if j > 0 {
            (&trace.steps[j - 1].h[..], &trace.steps[j - 1].c[..])
        } else {
            (&zeros[..], &zeros[..])
        };
        let g = &s.gates;
        for k in 0..h {
            let dh = d_h_out[pos][k] + dh_next[k];
            let (i, f, cand, o) = (g[k], g[h + k], g[2 * h + k], g[3 * h + k]);
            let d_o = dh * s.tanh_c[k];
            let dc = dc_next[k] + dh * o * (1.0 - s.tanh_c[k] * s.tanh_c[k]);
            da[k] = dc * cand * i * (1.0 - i);
            da[h + k] = dc * c_prev[k] * f * (1.0 - f);
            da[2 * h + k] = dc * i * (1.0 - cand * cand);
            da[3 * h + k] = d_o * o * (1.0 - o);
            dc_next[k] = dc * f;
        }
        let x = xs[pos];
        grad.w_ih.outer_acc(&da, x);
        grad.w_hh.outer_acc(&da, h_prev);
        grad.b.iter_mut().zip(&da).for_each(|(gb, d)| *gb += d);
        p.w_ih.t_matvec_acc(&da, &mut dx[pos]);
        dh_next.fill(0.0);
        p.w_hh.t_matvec_acc(&da, &mut dh_next);
    }
}
