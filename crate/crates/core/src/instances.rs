//! Named example instances and seeded random contexts.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::algebra::{c, r, zeros, ComplexMatrix, StarAlgebra, C64};
use crate::correspondence::{Correspondence, EquivalenceBimodule};
use crate::error::Result;
use crate::morita::MoritaContext;
use crate::representation::Representation;

/// `M_n` over its diagonal `D`, with `<x, y> = E_D(x^* y)` (the diagonal
/// part) and both actions by multiplication.
pub fn matrices_over_diagonal(n: usize) -> Correspondence {
    let diag = StarAlgebra::diagonal(n);
    let d = n * n;
    let idx = |i: usize, j: usize| i * n + j;
    let mut gram = zeros(d * n, d * n);
    for i in 0..n {
        for j in 0..n {
            gram[(idx(i, j) * n + j, idx(i, j) * n + j)] = r(1.0);
        }
    }
    let act = |left: bool| -> Vec<ComplexMatrix> {
        (0..n)
            .map(|m| {
                let mut a = zeros(d, d);
                for i in 0..n {
                    for j in 0..n {
                        if (left && i == m) || (!left && j == m) {
                            a[(idx(i, j), idx(i, j))] = r(1.0);
                        }
                    }
                }
                a
            })
            .collect()
    };
    let mut e = Correspondence::new(diag.clone(), diag, gram, act(false), act(true)).expect("well formed");
    e.basis_labels = (0..n).flat_map(|i| (0..n).map(move |j| format!("e{}{}", i + 1, j + 1))).collect();
    e
}

/// Block data of a random context: `N = ⊕ M_{k_b}`, `M = ⊕ M_{r_b}`,
/// `X = ⊕ M_{r_b × k_b}` and `F` spanned by `N s N` for `s` supported on
/// the listed blocks of `N`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContextShape {
    pub left_blocks: Vec<usize>,
    pub right_blocks: Vec<usize>,
    pub f_blocks: Vec<(usize, usize)>,
    /// Multiplicity of the representation of `N`.
    pub multiplicity: usize,
    /// Whether the representation is conjugated by a random unitary.
    pub rotated: bool,
}

impl ContextShape {
    pub fn random(rng: &mut ChaCha8Rng) -> Self {
        let count = rng.random_range(1..=2usize);
        let right_blocks: Vec<usize> = (0..count).map(|_| rng.random_range(1..=2usize)).collect();
        let left_blocks: Vec<usize> = (0..count).map(|_| rng.random_range(1..=2usize)).collect();
        let mut f_blocks = vec![(rng.random_range(0..count), rng.random_range(0..count))];
        let first = right_blocks[f_blocks[0].0] * right_blocks[f_blocks[0].1];
        if count == 2 && rng.random_bool(0.5) {
            let extra = (rng.random_range(0..count), rng.random_range(0..count));
            if extra != f_blocks[0] && first + right_blocks[extra.0] * right_blocks[extra.1] <= 4 {
                f_blocks.push(extra);
            }
        }
        ContextShape {
            left_blocks,
            right_blocks,
            f_blocks,
            multiplicity: rng.random_range(1..=2usize),
            rotated: rng.random_bool(0.5),
        }
    }

    fn offsets(blocks: &[usize]) -> Vec<usize> {
        blocks
            .iter()
            .scan(0, |acc, &b| {
                let start = *acc;
                *acc += b;
                Some(start)
            })
            .collect()
    }

    pub fn right_algebra(&self) -> StarAlgebra {
        StarAlgebra::block_diagonal(&self.right_blocks)
    }

    pub fn left_algebra(&self) -> StarAlgebra {
        StarAlgebra::block_diagonal(&self.left_blocks)
    }

    pub fn bimodule(&self) -> Result<EquivalenceBimodule> {
        let (p, q) = (self.left_blocks.iter().sum::<usize>(), self.right_blocks.iter().sum::<usize>());
        let (lo, ro) = (Self::offsets(&self.left_blocks), Self::offsets(&self.right_blocks));
        let mut elements = Vec::new();
        for (b, (&rb, &kb)) in self.left_blocks.iter().zip(&self.right_blocks).enumerate() {
            for i in 0..rb {
                for j in 0..kb {
                    let mut x = zeros(p, q);
                    x[(lo[b] + i, ro[b] + j)] = r(1.0);
                    elements.push(vec![x]);
                }
            }
        }
        EquivalenceBimodule::from_concrete(&self.left_algebra(), &self.right_algebra(), &elements)
    }

    /// `F` with `<x, y> = E_N(x^* y)`, spanned by `a s b` for `a, b` in a
    /// basis of `N` and a random `s` on the chosen blocks.
    pub fn correspondence(&self, rng: &mut ChaCha8Rng) -> Result<Correspondence> {
        let n_alg = self.right_algebra();
        let q = n_alg.ambient_dim;
        let ro = Self::offsets(&self.right_blocks);
        let mut s = zeros(q, q);
        for &(b, b2) in &self.f_blocks {
            for i in 0..self.right_blocks[b] {
                for j in 0..self.right_blocks[b2] {
                    s[(ro[b] + i, ro[b2] + j)] = gaussian(rng);
                }
            }
        }
        let mut span = Vec::new();
        for a in &n_alg.basis {
            for b in &n_alg.basis {
                span.push(vec![a * &s * b]);
            }
        }
        let (f, _) = Correspondence::from_concrete_expected(&n_alg, &n_alg, &span)?;
        Ok(f.separated().module)
    }

    pub fn representation(&self, rng: &mut ChaCha8Rng) -> Representation {
        let base = Representation::identity(&self.right_algebra()).amplify(self.multiplicity);
        if self.rotated {
            base.conjugate(&random_unitary(base.space_dim, rng))
        } else {
            base
        }
    }
}

fn gaussian(rng: &mut ChaCha8Rng) -> C64 {
    c(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

/// Haar-ish unitary from the QR factor of a complex Gaussian matrix.
pub fn random_unitary(n: usize, rng: &mut ChaCha8Rng) -> ComplexMatrix {
    let g = ComplexMatrix::from_fn(n, n, |_, _| gaussian(rng));
    g.qr().q()
}

/// A random induced context with a representation of its `N`.
#[derive(Clone, Debug)]
pub struct RandomInstance {
    pub shape: ContextShape,
    pub context: MoritaContext,
    pub sigma: Representation,
}

pub fn random_instance(seed: u64) -> Result<RandomInstance> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let shape = ContextShape::random(&mut rng);
    let f = shape.correspondence(&mut rng)?;
    let x = shape.bimodule()?;
    let context = MoritaContext::induced(&f, &x)?;
    let sigma = shape.representation(&mut rng);
    Ok(RandomInstance { shape, context, sigma })
}
