use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// One-hidden-layer ReLU network.
///
/// `w1` is `input_dim x hidden_dim` and `w2` is `hidden_dim x classes`,
/// both row-major.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelParams<T> {
    pub input_dim: usize,
    pub hidden_dim: usize,
    pub classes: usize,
    pub w1: Vec<T>,
    pub b1: Vec<T>,
    pub w2: Vec<T>,
    pub b2: Vec<T>,
}

/// Activations kept for the backward pass.
#[derive(Clone, Debug)]
pub struct Forward<T> {
    /// Pre-activation `w1ᵀx + b1`.
    pub pre: Vec<T>,
    /// `relu(pre) ⊙ mask`.
    pub hidden: Vec<T>,
    pub logits: Vec<T>,
    mask: Option<Vec<T>>,
}

impl<T: Scalar> ModelParams<T> {
    pub fn zeros(input_dim: usize, hidden_dim: usize, classes: usize) -> Self {
        Self {
            input_dim,
            hidden_dim,
            classes,
            w1: vec![T::zero(); input_dim * hidden_dim],
            b1: vec![T::zero(); hidden_dim],
            w2: vec![T::zero(); hidden_dim * classes],
            b2: vec![T::zero(); classes],
        }
    }

    /// Uniform in `±1/sqrt(fan_in)` for weights and biases alike.
    pub fn init<R: Rng + ?Sized>(input_dim: usize, hidden_dim: usize, classes: usize, rng: &mut R) -> Result<Self> {
        if input_dim == 0 || hidden_dim == 0 || classes == 0 {
            return Err(Error::param(format!(
                "network dimensions must be positive, got {input_dim}x{hidden_dim}x{classes}"
            )));
        }
        let mut p = Self::zeros(input_dim, hidden_dim, classes);
        let b = 1.0 / (input_dim as f64).sqrt();
        for v in p.w1.iter_mut().chain(p.b1.iter_mut()) {
            *v = T::lit(rng.random_range(-b..b));
        }
        let b = 1.0 / (hidden_dim as f64).sqrt();
        for v in p.w2.iter_mut().chain(p.b2.iter_mut()) {
            *v = T::lit(rng.random_range(-b..b));
        }
        Ok(p)
    }

    pub fn zeros_like(&self) -> Self {
        Self::zeros(self.input_dim, self.hidden_dim, self.classes)
    }

    pub fn num_params(&self) -> usize {
        self.w1.len() + self.b1.len() + self.w2.len() + self.b2.len()
    }

    pub fn tensors(&self) -> [&[T]; 4] {
        [&self.w1, &self.b1, &self.w2, &self.b2]
    }

    pub fn tensors_mut(&mut self) -> [&mut [T]; 4] {
        [&mut self.w1, &mut self.b1, &mut self.w2, &mut self.b2]
    }

    pub fn validate(&self) -> Result<()> {
        let (i, h, c) = (self.input_dim, self.hidden_dim, self.classes);
        if self.w1.len() != i * h || self.b1.len() != h || self.w2.len() != h * c || self.b2.len() != c {
            return Err(Error::Dimension(format!("parameter shapes do not match {i}x{h}x{c}")));
        }
        if self.tensors().iter().any(|t| t.iter().any(|v| !v.is_finite())) {
            return Err(Error::param("non-finite parameter"));
        }
        Ok(())
    }

    pub fn scale(&mut self, k: T) {
        for t in self.tensors_mut() {
            t.iter_mut().for_each(|v| *v *= k);
        }
    }

    pub fn add_assign(&mut self, other: &Self) {
        for (a, b) in self.tensors_mut().into_iter().zip(other.tensors()) {
            a.iter_mut().zip(b).for_each(|(x, y)| *x += *y);
        }
    }
}

/// Forward pass. `mask` multiplies the hidden activations (already carrying
/// the inverted scale); `None` is evaluation mode.
pub fn forward<T: Scalar>(params: &ModelParams<T>, x: &[T], mask: Option<&[T]>) -> Result<Forward<T>> {
    let (h, c) = (params.hidden_dim, params.classes);
    if x.len() != params.input_dim {
        return Err(Error::Dimension(format!(
            "input has {} features, network expects {}",
            x.len(),
            params.input_dim
        )));
    }
    if let Some(m) = mask {
        if m.len() != h {
            return Err(Error::Dimension(format!("mask has {} entries for {h} hidden units", m.len())));
        }
    }
    let mut pre = params.b1.clone();
    for (xi, row) in x.iter().zip(params.w1.chunks_exact(h)) {
        if *xi != T::zero() {
            pre.iter_mut().zip(row).for_each(|(a, w)| *a += *xi * *w);
        }
    }
    let hidden: Vec<T> = pre
        .iter()
        .enumerate()
        .map(|(j, &a)| {
            let r = a.max(T::zero());
            mask.map_or(r, |m| r * m[j])
        })
        .collect();
    let mut logits = params.b2.clone();
    for (r, row) in hidden.iter().zip(params.w2.chunks_exact(c)) {
        if *r != T::zero() {
            logits.iter_mut().zip(row).for_each(|(z, w)| *z += *r * *w);
        }
    }
    Ok(Forward {
        pre,
        hidden,
        logits,
        mask: mask.map(<[T]>::to_vec),
    })
}

/// Adds the parameter gradients for upstream gradient `dz` into `grads`.
pub fn backward_into<T: Scalar>(
    params: &ModelParams<T>,
    fwd: &Forward<T>,
    x: &[T],
    dz: &[T],
    grads: &mut ModelParams<T>,
) -> Result<()> {
    let (h, c) = (params.hidden_dim, params.classes);
    if dz.len() != c || fwd.logits.len() != c || x.len() != params.input_dim {
        return Err(Error::Dimension("backward inputs do not match the network".into()));
    }
    grads.b2.iter_mut().zip(dz).for_each(|(g, d)| *g += *d);
    let mut da = vec![T::zero(); h];
    for j in 0..h {
        let w_row = &params.w2[j * c..(j + 1) * c];
        let g_row = &mut grads.w2[j * c..(j + 1) * c];
        let r = fwd.hidden[j];
        let mut dr = T::zero();
        for k in 0..c {
            g_row[k] += r * dz[k];
            dr += w_row[k] * dz[k];
        }
        if fwd.pre[j] > T::zero() {
            da[j] = fwd.mask.as_ref().map_or(dr, |m| dr * m[j]);
        }
    }
    grads.b1.iter_mut().zip(&da).for_each(|(g, d)| *g += *d);
    for (xi, g_row) in x.iter().zip(grads.w1.chunks_exact_mut(h)) {
        if *xi != T::zero() {
            g_row.iter_mut().zip(&da).for_each(|(g, d)| *g += *xi * *d);
        }
    }
    Ok(())
}

pub fn backward<T: Scalar>(params: &ModelParams<T>, fwd: &Forward<T>, x: &[T], dz: &[T]) -> Result<ModelParams<T>> {
    let mut g = params.zeros_like();
    backward_into(params, fwd, x, dz, &mut g)?;
    Ok(g)
}
