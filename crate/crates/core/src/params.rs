//! Trainable parameters exposed as a fixed list of flat arrays ("groups").
//!
//! Optimizer moments and gradient buffers mirror the same group layout, so
//! a group that changes length (a refined face) can be detected and reset.

use alloc::vec;
use alloc::vec::Vec;

use crate::real::Real;

pub trait Parameterized<T: Real> {
    fn param_groups(&self) -> Vec<&[T]>;

    fn param_groups_mut(&mut self) -> Vec<&mut [T]>;

    /// Number of learnable scalars that influence the output.
    fn param_count(&self) -> usize;
}

/// Gradient buffers shaped like a [`Parameterized`] value.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients<T> {
    pub groups: Vec<Vec<T>>,
}

impl<T: Real> Gradients<T> {
    pub fn zeros_like<P: Parameterized<T> + ?Sized>(params: &P) -> Self {
        Gradients {
            groups: params
                .param_groups()
                .iter()
                .map(|g| vec![T::zero(); g.len()])
                .collect(),
        }
    }

    pub fn zero(&mut self) {
        for g in &mut self.groups {
            g.fill(T::zero());
        }
    }

    /// Re-allocates groups whose length no longer matches `params`.
    pub fn conform_to<P: Parameterized<T> + ?Sized>(&mut self, params: &P) {
        let groups = params.param_groups();
        self.groups.resize_with(groups.len(), Vec::new);
        for (g, p) in self.groups.iter_mut().zip(groups) {
            if g.len() != p.len() {
                *g = vec![T::zero(); p.len()];
            }
        }
    }

    pub fn slices(&self) -> Vec<&[T]> {
        self.groups.iter().map(Vec::as_slice).collect()
    }

    pub fn is_finite(&self) -> bool {
        self.groups.iter().flatten().all(|x| x.is_finite())
    }

    pub fn scale(&mut self, s: T) {
        for x in self.groups.iter_mut().flatten() {
            *x *= s;
        }
    }

    pub fn len(&self) -> usize {
        self.groups.iter().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}
