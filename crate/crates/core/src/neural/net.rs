use super::CnnLstmModel;
use crate::linear_models::sigmoid;

/// Intermediate values of one forward pass, kept for the backward pass.
pub(crate) struct Pass {
    real: Vec<bool>,
    /// Convolution pre-activations, `seq_len x filters`; zero at padding.
    z: Vec<f64>,
    /// Winning position per LSTM step and filter.
    argmax: Vec<usize>,
    u: Vec<f64>,
    gates: Vec<f64>,
    /// Cell and hidden states, `(steps + 1) x hidden`, row 0 all zeros.
    c: Vec<f64>,
    h: Vec<f64>,
    pub logit: f64,
}

impl Pass {
    /// Which ReLUs are active and which positions win each pool. Finite
    /// differences are only meaningful while this stays fixed.
    pub fn pattern(&self) -> (Vec<bool>, Vec<usize>) {
        let nf = self.z.len() / self.real.len();
        let active = self
            .z
            .iter()
            .enumerate()
            .map(|(i, z)| self.real[i / nf] && *z > 0.0)
            .collect();
        (active, self.argmax.clone())
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn forward(model: &CnnLstmModel, ids: &[usize]) -> Pass {
    let s = model.shape;
    let lay = s.layout();
    let p = &model.params;
    let (e_dim, nf, w, hd, len) = (s.embed, s.filters, s.width, s.hidden, s.seq_len);
    let emb = &p[lay.embedding];
    let cw = &p[lay.conv_weight];
    let cb = &p[lay.conv_bias];
    let left = (w - 1) / 2;

    let real: Vec<bool> = ids.iter().map(|&id| id != super::PAD_ID).collect();
    let mut z = vec![0.0; len * nf];
    for t in (0..len).filter(|&t| real[t]) {
        let zt = &mut z[t * nf..(t + 1) * nf];
        zt.copy_from_slice(cb);
        for k in 0..w {
            let Some(src) = (t + k).checked_sub(left).filter(|&q| q < len && real[q]) else {
                continue;
            };
            let x = &emb[ids[src] * e_dim..(ids[src] + 1) * e_dim];
            for (f, zf) in zt.iter_mut().enumerate() {
                *zf += dot(&cw[(f * w + k) * e_dim..(f * w + k + 1) * e_dim], x);
            }
        }
    }

    let mut argmax = Vec::new();
    let mut u = Vec::new();
    for win in 0..len.div_ceil(2) {
        let pos: Vec<usize> = (2 * win..(2 * win + 2).min(len)).filter(|&t| real[t]).collect();
        if pos.is_empty() {
            continue;
        }
        for f in 0..nf {
            let mut best = pos[0];
            for &t in &pos[1..] {
                if z[t * nf + f].max(0.0) > z[best * nf + f].max(0.0) {
                    best = t;
                }
            }
            argmax.push(best);
            u.push(z[best * nf + f].max(0.0));
        }
    }

    let steps = u.len() / nf;
    let wi = &p[lay.lstm_input];
    let wh = &p[lay.lstm_recurrent];
    let bl = &p[lay.lstm_bias];
    let g4 = 4 * hd;
    let mut gates = vec![0.0; steps * g4];
    let mut c = vec![0.0; (steps + 1) * hd];
    let mut h = vec![0.0; (steps + 1) * hd];
    for st in 0..steps {
        let ut = &u[st * nf..(st + 1) * nf];
        let a = &mut gates[st * g4..(st + 1) * g4];
        let hp = &h[st * hd..(st + 1) * hd];
        for r in 0..g4 {
            a[r] = bl[r] + dot(&wi[r * nf..(r + 1) * nf], ut) + dot(&wh[r * hd..(r + 1) * hd], hp);
        }
        for j in 0..hd {
            let ig = sigmoid(a[j]);
            let fg = sigmoid(a[hd + j]);
            let gg = a[2 * hd + j].tanh();
            let og = sigmoid(a[3 * hd + j]);
            a[j] = ig;
            a[hd + j] = fg;
            a[2 * hd + j] = gg;
            a[3 * hd + j] = og;
            let cn = fg * c[st * hd + j] + ig * gg;
            c[(st + 1) * hd + j] = cn;
            h[(st + 1) * hd + j] = og * cn.tanh();
        }
    }
    let logit = p[lay.dense_bias.start] + dot(&p[lay.dense_weight], &h[steps * hd..]);
    Pass {
        real,
        z,
        argmax,
        u,
        gates,
        c,
        h,
        logit,
    }
}

/// Adds `dlogit * d(logit)/d(params)` into `grad`. The padding embedding row
/// never receives gradient.
pub(crate) fn backward(model: &CnnLstmModel, ids: &[usize], pass: &Pass, dlogit: f64, grad: &mut [f64]) {
    let s = model.shape;
    let lay = s.layout();
    let p = &model.params;
    let (e_dim, nf, w, hd, len) = (s.embed, s.filters, s.width, s.hidden, s.seq_len);
    let g4 = 4 * hd;
    let steps = pass.u.len() / nf;

    let last = &pass.h[steps * hd..];
    for j in 0..hd {
        grad[lay.dense_weight.start + j] += dlogit * last[j];
    }
    grad[lay.dense_bias.start] += dlogit;
    let mut dh: Vec<f64> = p[lay.dense_weight.clone()].iter().map(|v| dlogit * v).collect();
    let mut dc = vec![0.0; hd];
    let mut da = vec![0.0; g4];
    let mut dz = vec![0.0; len * nf];
    let wi = &p[lay.lstm_input.clone()];
    let wh = &p[lay.lstm_recurrent.clone()];

    for st in (0..steps).rev() {
        let gt = &pass.gates[st * g4..(st + 1) * g4];
        let c_prev = &pass.c[st * hd..(st + 1) * hd];
        let c_now = &pass.c[(st + 1) * hd..(st + 2) * hd];
        for j in 0..hd {
            let (ig, fg, gg, og) = (gt[j], gt[hd + j], gt[2 * hd + j], gt[3 * hd + j]);
            let tc = c_now[j].tanh();
            dc[j] += dh[j] * og * (1.0 - tc * tc);
            da[j] = dc[j] * gg * ig * (1.0 - ig);
            da[hd + j] = dc[j] * c_prev[j] * fg * (1.0 - fg);
            da[2 * hd + j] = dc[j] * ig * (1.0 - gg * gg);
            da[3 * hd + j] = dh[j] * tc * og * (1.0 - og);
            dc[j] *= fg;
        }
        let ut = &pass.u[st * nf..(st + 1) * nf];
        let hp = &pass.h[st * hd..(st + 1) * hd];
        for r in 0..g4 {
            grad[lay.lstm_bias.start + r] += da[r];
            let gi = lay.lstm_input.start + r * nf;
            for j in 0..nf {
                grad[gi + j] += da[r] * ut[j];
            }
            let gh = lay.lstm_recurrent.start + r * hd;
            for j in 0..hd {
                grad[gh + j] += da[r] * hp[j];
            }
        }
        for (j, d) in dh.iter_mut().enumerate() {
            *d = (0..g4).map(|r| wh[r * hd + j] * da[r]).sum();
        }
        for f in 0..nf {
            let t = pass.argmax[st * nf + f];
            if pass.z[t * nf + f] > 0.0 {
                dz[t * nf + f] += (0..g4).map(|r| wi[r * nf + f] * da[r]).sum::<f64>();
            }
        }
    }

    let emb = &p[lay.embedding.clone()];
    let cw = &p[lay.conv_weight.clone()];
    let left = (w - 1) / 2;
    for t in (0..len).filter(|&t| pass.real[t]) {
        for f in 0..nf {
            let d = dz[t * nf + f];
            if d == 0.0 {
                continue;
            }
            grad[lay.conv_bias.start + f] += d;
            for k in 0..w {
                let Some(src) = (t + k).checked_sub(left).filter(|&q| q < len && pass.real[q]) else {
                    continue;
                };
                let id = ids[src];
                let wo = (f * w + k) * e_dim;
                for e in 0..e_dim {
                    grad[lay.conv_weight.start + wo + e] += d * emb[id * e_dim + e];
                    grad[lay.embedding.start + id * e_dim + e] += d * cw[wo + e];
                }
            }
        }
    }
}
