//! Fully connected network with ReLU hidden layers and a softplus output,
//! evaluated on row-major batches.

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use crate::error::{Error, Result};
use crate::params::{Gradients, Parameterized};
use crate::real::Real;
use crate::rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MlpShape {
    pub inputs: usize,
    pub hidden_width: usize,
    pub hidden_layers: usize,
    pub outputs: usize,
}

impl MlpShape {
    /// Layer widths from input to output.
    pub fn widths(&self) -> Vec<usize> {
        let mut w = vec![self.inputs];
        w.extend(core::iter::repeat_n(self.hidden_width, self.hidden_layers));
        w.push(self.outputs);
        w
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dense<T> {
    pub inputs: usize,
    pub outputs: usize,
    /// `outputs × inputs`, row-major.
    pub weights: Vec<T>,
    pub bias: Vec<T>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Mlp<T> {
    layers: Vec<Dense<T>>,
}

/// Activations recorded by a forward pass, consumed by [`Mlp::backward`].
#[derive(Debug, Clone)]
pub struct MlpTape<T> {
    rows: usize,
    /// Input of each layer (`rows × inputs`).
    inputs: Vec<Vec<T>>,
    /// Pre-activation of each layer (`rows × outputs`).
    pre: Vec<Vec<T>>,
}

impl<T> MlpTape<T> {
    pub fn rows(&self) -> usize {
        self.rows
    }
}

/// `ln(1 + e^z)` without overflow.
pub fn softplus<T: Real>(z: T) -> T {
    if z > T::from_f64(20.0) {
        z
    } else {
        z.exp().ln_1p()
    }
}

pub fn sigmoid<T: Real>(z: T) -> T {
    T::one() / (T::one() + (-z).exp())
}

impl<T: Real> Mlp<T> {
    /// Glorot-uniform weights, zero biases.
    pub fn new(shape: MlpShape, seed: u64) -> Result<Self> {
        if shape.inputs == 0 || shape.outputs == 0 || (shape.hidden_layers > 0 && shape.hidden_width == 0) {
            return Err(Error::InvalidArgument("MLP layer widths must be >= 1".into()));
        }
        let widths = shape.widths();
        let mut r = rng::stream(seed, 0x6d6c_70);
        let layers = widths
            .windows(2)
            .map(|w| {
                let limit = libm::sqrt(6.0 / (w[0] + w[1]) as f64);
                Dense {
                    inputs: w[0],
                    outputs: w[1],
                    weights: (0..w[0] * w[1])
                        .map(|_| T::from_f64(r.random_range(-limit..limit)))
                        .collect(),
                    bias: vec![T::zero(); w[1]],
                }
            })
            .collect();
        Ok(Mlp { layers })
    }

    pub fn from_layers(layers: Vec<Dense<T>>) -> Result<Self> {
        if layers.is_empty() {
            return Err(Error::InvalidArgument("MLP needs at least one layer".into()));
        }
        for (i, l) in layers.iter().enumerate() {
            if l.weights.len() != l.inputs * l.outputs || l.bias.len() != l.outputs {
                return Err(Error::ShapeMismatch {
                    what: "dense layer parameters",
                    expected: l.inputs * l.outputs,
                    found: l.weights.len(),
                });
            }
            if i > 0 && layers[i - 1].outputs != l.inputs {
                return Err(Error::ShapeMismatch {
                    what: "layer chaining",
                    expected: layers[i - 1].outputs,
                    found: l.inputs,
                });
            }
        }
        Ok(Mlp { layers })
    }

    pub fn layers(&self) -> &[Dense<T>] {
        &self.layers
    }

    pub fn layers_mut(&mut self) -> &mut [Dense<T>] {
        &mut self.layers
    }

    pub fn input_width(&self) -> usize {
        self.layers[0].inputs
    }

    pub fn output_width(&self) -> usize {
        self.layers[self.layers.len() - 1].outputs
    }

    fn check_input(&self, input: &[T], rows: usize) -> Result<()> {
        if input.len() != rows * self.input_width() {
            return Err(Error::ShapeMismatch {
                what: "network input",
                expected: rows * self.input_width(),
                found: input.len(),
            });
        }
        Ok(())
    }

    /// `z = x·Wᵀ + b` for one layer.
    fn affine(layer: &Dense<T>, x: &[T], rows: usize) -> Vec<T> {
        let mut z = Vec::with_capacity(rows * layer.outputs);
        for _ in 0..rows {
            z.extend_from_slice(&layer.bias);
        }
        T::gemm(
            rows,
            layer.inputs,
            layer.outputs,
            T::one(),
            x,
            (layer.inputs, 1),
            &layer.weights,
            (1, layer.inputs),
            T::one(),
            &mut z,
            (layer.outputs, 1),
        );
        z
    }

    /// Output rows (`rows × outputs`), without recording activations.
    pub fn forward(&self, input: &[T], rows: usize) -> Result<Vec<T>> {
        self.check_input(input, rows)?;
        let last = self.layers.len() - 1;
        let mut x = input.to_vec();
        for (i, layer) in self.layers.iter().enumerate() {
            let mut z = Self::affine(layer, &x, rows);
            if i < last {
                z.iter_mut().for_each(|v| *v = v.max(T::zero()));
            } else {
                z.iter_mut().for_each(|v| *v = softplus(*v));
            }
            x = z;
        }
        Ok(x)
    }

    pub fn forward_with_tape(&self, input: &[T], rows: usize) -> Result<(Vec<T>, MlpTape<T>)> {
        self.check_input(input, rows)?;
        let last = self.layers.len() - 1;
        let mut tape = MlpTape {
            rows,
            inputs: Vec::with_capacity(self.layers.len()),
            pre: Vec::with_capacity(self.layers.len()),
        };
        let mut x = input.to_vec();
        for (i, layer) in self.layers.iter().enumerate() {
            let z = Self::affine(layer, &x, rows);
            let y: Vec<T> = if i < last {
                z.iter().map(|v| v.max(T::zero())).collect()
            } else {
                z.iter().map(|&v| softplus(v)).collect()
            };
            tape.inputs.push(core::mem::replace(&mut x, y));
            tape.pre.push(z);
        }
        Ok((x, tape))
    }

    /// Accumulates parameter gradients of `Σ ⟨d_output, output⟩` into `grads`
    /// and returns the gradient with respect to the network input.
    pub fn backward(&self, tape: &MlpTape<T>, d_output: &[T], grads: &mut Gradients<T>) -> Result<Vec<T>> {
        let rows = tape.rows;
        if d_output.len() != rows * self.output_width() {
            return Err(Error::ShapeMismatch {
                what: "output gradient",
                expected: rows * self.output_width(),
                found: d_output.len(),
            });
        }
        let last = self.layers.len() - 1;
        let mut delta: Vec<T> = d_output
            .iter()
            .zip(&tape.pre[last])
            .map(|(&g, &z)| g * sigmoid(z))
            .collect();
        for i in (0..self.layers.len()).rev() {
            let layer = &self.layers[i];
            let x = &tape.inputs[i];
            let (gw, gb) = {
                let (lo, hi) = grads.groups.split_at_mut(2 * i + 1);
                (&mut lo[2 * i], &mut hi[0])
            };
            // dW += δᵀ·x
            T::gemm(
                layer.outputs,
                rows,
                layer.inputs,
                T::one(),
                &delta,
                (1, layer.outputs),
                x,
                (layer.inputs, 1),
                T::one(),
                gw,
                (layer.inputs, 1),
            );
            for r in 0..rows {
                for (b, &d) in gb.iter_mut().zip(&delta[r * layer.outputs..(r + 1) * layer.outputs]) {
                    *b += d;
                }
            }
            // dx = δ·W
            let mut dx = vec![T::zero(); rows * layer.inputs];
            T::gemm(
                rows,
                layer.outputs,
                layer.inputs,
                T::one(),
                &delta,
                (layer.outputs, 1),
                &layer.weights,
                (layer.inputs, 1),
                T::zero(),
                &mut dx,
                (layer.inputs, 1),
            );
            if i > 0 {
                for (d, &z) in dx.iter_mut().zip(&tape.pre[i - 1]) {
                    if z <= T::zero() {
                        *d = T::zero();
                    }
                }
            }
            delta = dx;
        }
        Ok(delta)
    }

    /// Same network with every parameter converted to another precision.
    pub fn cast<U: Real>(&self) -> Mlp<U> {
        Mlp {
            layers: self
                .layers
                .iter()
                .map(|l| Dense {
                    inputs: l.inputs,
                    outputs: l.outputs,
                    weights: l.weights.iter().map(|w| U::from_f64(Real::as_f64(*w))).collect(),
                    bias: l.bias.iter().map(|w| U::from_f64(Real::as_f64(*w))).collect(),
                })
                .collect(),
        }
    }
}

impl<T: Real> Parameterized<T> for Mlp<T> {
    /// Weights and bias of each layer, in order.
    fn param_groups(&self) -> Vec<&[T]> {
        self.layers
            .iter()
            .flat_map(|l| [l.weights.as_slice(), l.bias.as_slice()])
            .collect()
    }

    fn param_groups_mut(&mut self) -> Vec<&mut [T]> {
        self.layers
            .iter_mut()
            .flat_map(|l| [l.weights.as_mut_slice(), l.bias.as_mut_slice()])
            .collect()
    }

    fn param_count(&self) -> usize {
        self.layers.iter().map(|l| l.weights.len() + l.bias.len()).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn shape(inputs: usize, width: usize, layers: usize) -> MlpShape {
        MlpShape {
            inputs,
            hidden_width: width,
            hidden_layers: layers,
            outputs: 3,
        }
    }

    fn random_input<T: Real>(rows: usize, width: usize, seed: u64) -> Vec<T> {
        let mut r = rng::stream(seed, 1);
        (0..rows * width).map(|_| T::from_f64(r.random_range(-1.0..1.0))).collect()
    }

    #[test]
    fn zero_weights_give_softplus_of_bias() {
        let mut m = Mlp::<f64>::new(shape(5, 8, 2), 0).unwrap();
        for l in m.layers_mut() {
            l.weights.fill(0.0);
        }
        let n = m.layers().len();
        m.layers_mut()[n - 1].bias.copy_from_slice(&[-1.0, 0.0, 2.0]);
        let out = m.forward(&random_input::<f64>(4, 5, 1), 4).unwrap();
        for r in 0..4 {
            for (c, b) in [-1.0f64, 0.0, 2.0].iter().enumerate() {
                assert!((out[r * 3 + c] - libm::log1p(libm::exp(*b))).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn batching_preserves_order() {
        let m = Mlp::<f64>::new(shape(6, 16, 3), 2).unwrap();
        let x = random_input::<f64>(7, 6, 3);
        let all = m.forward(&x, 7).unwrap();
        for r in 0..7 {
            let one = m.forward(&x[r * 6..(r + 1) * 6], 1).unwrap();
            for c in 0..3 {
                assert!((one[c] - all[r * 3 + c]).abs() < 1e-14);
            }
        }
        assert!(m.forward(&x[..5], 1).is_err());
    }

    #[test]
    fn single_and_double_precision_agree() {
        let m = Mlp::<f64>::new(shape(48, 64, 3), 5).unwrap();
        let m32: Mlp<f32> = m.cast();
        let x = random_input::<f64>(32, 48, 6);
        let x32: Vec<f32> = x.iter().map(|&v| v as f32).collect();
        let a = m.forward(&x, 32).unwrap();
        let b = m32.forward(&x32, 32).unwrap();
        for (p, q) in a.iter().zip(&b) {
            assert!((p - *q as f64).abs() <= 1e-4 * p.abs().max(1e-2));
        }
    }

    fn loss<T: Real>(m: &Mlp<T>, x: &[T], rows: usize, up: &[T]) -> f64 {
        m.forward(x, rows)
            .unwrap()
            .iter()
            .zip(up)
            .map(|(a, b)| a.as_f64() * b.as_f64())
            .sum()
    }

    /// Analytic gradients computed in precision `T` against central
    /// differences taken in `f64` on the same parameter values, for every
    /// parameter and input of a 2×8 network.
    fn finite_difference_check<T: Real>(h: f64, tol: f64) {
        let mut m = Mlp::<T>::new(shape(4, 8, 2), 7).unwrap();
        // Non-zero biases so the output layer sees a range of slopes.
        let mut r = rng::stream(8, 0);
        for l in m.layers_mut() {
            for b in &mut l.bias {
                *b = T::from_f64(r.random_range(-0.5..0.5));
            }
        }
        let rows = 3;
        let x = random_input::<T>(rows, 4, 9);
        let up = random_input::<T>(rows, 3, 10);
        let (_, tape) = m.forward_with_tape(&x, rows).unwrap();
        let mut g = Gradients::zeros_like(&m);
        let dx = m.backward(&tape, &up, &mut g).unwrap();

        let mut m64: Mlp<f64> = m.cast();
        let x64: Vec<f64> = x.iter().map(|v| v.as_f64()).collect();
        let up64: Vec<f64> = up.iter().map(|v| v.as_f64()).collect();
        let groups = m64.param_groups().len();
        for gi in 0..groups {
            for i in 0..m64.param_groups()[gi].len() {
                let orig = m64.param_groups()[gi][i];
                m64.param_groups_mut()[gi][i] = orig + h;
                let lp = loss(&m64, &x64, rows, &up64);
                m64.param_groups_mut()[gi][i] = orig - h;
                let lm = loss(&m64, &x64, rows, &up64);
                m64.param_groups_mut()[gi][i] = orig;
                let fd = (lp - lm) / (2.0 * h);
                let an = g.groups[gi][i].as_f64();
                assert!(
                    (fd - an).abs() <= tol * an.abs().max(1e-2),
                    "group {gi} index {i}: fd {fd} analytic {an}"
                );
            }
        }
        for i in 0..x64.len() {
            let mut xp = x64.clone();
            xp[i] += h;
            let mut xm = x64.clone();
            xm[i] -= h;
            let fd = (loss(&m64, &xp, rows, &up64) - loss(&m64, &xm, rows, &up64)) / (2.0 * h);
            let an = dx[i].as_f64();
            assert!((fd - an).abs() <= tol * an.abs().max(1e-2), "input {i}: fd {fd} analytic {an}");
        }
    }

    #[test]
    fn gradients_match_finite_differences_double() {
        finite_difference_check::<f64>(1e-6, 1e-6);
    }

    #[test]
    fn gradients_match_finite_differences_single() {
        finite_difference_check::<f32>(1e-5, 1e-3);
    }

    #[test]
    fn zero_upstream_gives_zero_gradients() {
        let m = Mlp::<f64>::new(shape(4, 8, 2), 1).unwrap();
        let x = random_input::<f64>(5, 4, 2);
        let (_, tape) = m.forward_with_tape(&x, 5).unwrap();
        let mut g = Gradients::zeros_like(&m);
        let dx = m.backward(&tape, &[0.0; 15], &mut g).unwrap();
        assert!(g.groups.iter().flatten().all(|&v| v == 0.0));
        assert!(dx.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn batch_gradient_is_sum_of_per_sample_gradients() {
        let m = Mlp::<f64>::new(shape(4, 8, 2), 3).unwrap();
        let x = random_input::<f64>(4, 4, 4);
        let up = random_input::<f64>(4, 3, 5);
        let (_, tape) = m.forward_with_tape(&x, 4).unwrap();
        let mut batch = Gradients::zeros_like(&m);
        m.backward(&tape, &up, &mut batch).unwrap();
        let mut summed = Gradients::zeros_like(&m);
        for r in 0..4 {
            let (_, t) = m.forward_with_tape(&x[r * 4..(r + 1) * 4], 1).unwrap();
            m.backward(&t, &up[r * 3..(r + 1) * 3], &mut summed).unwrap();
        }
        for (a, b) in batch.groups.iter().flatten().zip(summed.groups.iter().flatten()) {
            assert!((a - b).abs() < 1e-12);
        }
    }
}
