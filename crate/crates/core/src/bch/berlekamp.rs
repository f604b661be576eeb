//! Berlekamp's key-equation solver for binary BCH codes.
//!
//! Odd-indexed discrepancies vanish for binary codes (S_{2i+1} = S_i^2), so
//! only even iterations r = 0, 2, ..., 2t-2 are run. The auxiliary polynomial
//! is carried pre-shifted as 𝓑(x) = x^2·B(x).

use crate::galois::{Elem, GaloisField};

use super::Syndromes;

/// (Λ, 𝓑, L_Λ, L_𝓑) after some number of Berlekamp iterations.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KeyEquationState {
    /// Error-locator polynomial Λ(x), lowest degree first.
    pub lambda: Vec<Elem>,
    /// Shifted auxiliary polynomial 𝓑(x).
    pub b_poly: Vec<Elem>,
    pub l_lambda: usize,
    pub l_b: usize,
}

impl KeyEquationState {
    /// Λ = 1, 𝓑 = x, L_Λ = 0, L_𝓑 = 1.
    pub fn initial() -> Self {
        Self {
            lambda: vec![1],
            b_poly: vec![0, 1],
            l_lambda: 0,
            l_b: 1,
        }
    }

    /// Actual degree of Λ.
    pub fn lambda_degree(&self) -> usize {
        poly_degree(&self.lambda)
    }

    /// One iteration at even index `r`, consuming S_0..=S_r from `full`.
    pub fn step(&mut self, field: &GaloisField, full: &[Elem], r: usize) {
        let delta = (0..=self.l_lambda.min(r))
            .filter_map(|i| self.lambda.get(i).map(|&c| field.mul(c, full[r - i])))
            .fold(0, |acc, x| acc ^ x);

        let mut next = self.lambda.clone();
        if delta != 0 {
            if next.len() < self.b_poly.len() {
                next.resize(self.b_poly.len(), 0);
            }
            for (c, &b) in next.iter_mut().zip(&self.b_poly) {
                *c ^= field.mul(delta, b);
            }
        }

        if delta != 0 && 2 * self.l_lambda <= r {
            let inv = field.inv(delta);
            let mut b = vec![0, 0];
            b.extend(self.lambda.iter().map(|&c| field.mul(inv, c)));
            let l_b = self.l_lambda + 2;
            self.l_lambda = self.l_b;
            self.l_b = l_b;
            self.b_poly = b;
        } else {
            self.b_poly.splice(0..0, [0, 0]);
            self.l_b += 2;
        }
        trim(&mut next);
        trim(&mut self.b_poly);
        self.lambda = next;
    }

    /// Continues from the current state over iterations r in `rs` (even).
    pub fn run(&mut self, field: &GaloisField, full: &[Elem], rs: impl Iterator<Item = usize>) {
        for r in rs {
            self.step(field, full, r);
        }
    }

    /// Λ(x) evaluated at `x`.
    pub fn eval_lambda(&self, field: &GaloisField, x: Elem) -> Elem {
        field.eval(&self.lambda, x)
    }

    pub fn eval_b(&self, field: &GaloisField, x: Elem) -> Elem {
        field.eval(&self.b_poly, x)
    }
}

/// Runs the full recursion over r = 0, 2, ..., 2t-2.
pub fn berlekamp(field: &GaloisField, syndromes: &Syndromes) -> KeyEquationState {
    let full = syndromes.expand(field);
    let mut state = KeyEquationState::initial();
    state.run(field, &full, (0..full.len()).step_by(2));
    state
}

pub(crate) fn poly_degree(p: &[Elem]) -> usize {
    p.iter().rposition(|&c| c != 0).unwrap_or(0)
}

fn trim(p: &mut Vec<Elem>) {
    while p.len() > 1 && p.last() == Some(&0) {
        p.pop();
    }
}
