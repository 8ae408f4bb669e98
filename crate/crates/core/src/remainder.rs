//! Accumulating remainder trees and forests.
//!
//! Given matrices `A_0, ..., A_(b-1)`, moduli `m_0, ..., m_(b-1)` and a row
//! vector `V`, compute every `C_j = V A_0 ... A_(j-1) mod m_j`.
//!
//! A tree does this with a product tree of the `A_j`, a product tree of the
//! `m_j` and one top-down pass. A forest cuts the leaves into `2^k` blocks of
//! `t = b / 2^k` and runs one tree per block, carrying `V^s` reduced modulo the
//! product `Y^s` of all moduli not yet visited. Several chains (for instance a
//! matrix chain and a scalar denominator chain) can share one modulus tree.

use alloc::vec;
use alloc::vec::Vec;

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::bigmat::{bigint_bytes, BigmatError, IntMatrix, Multiplier, Reducer};
use crate::meter::MemoryMeter;

/// Shape of one forest run: `b = 2^ell` leaves in `2^k` subtrees.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ForestPlan {
    pub ell: u32,
    pub k: u32,
}

impl ForestPlan {
    pub fn new(ell: u32, k: u32) -> Self {
        assert!(k <= ell, "k = {k} exceeds ell = {ell}");
        ForestPlan { ell, k }
    }

    /// Smallest `ell` with `2^ell >= leaves`, and `k` clamped to it.
    pub fn for_leaves(leaves: usize, k: u32) -> Self {
        let ell = leaves.max(1).next_power_of_two().trailing_zeros();
        ForestPlan::new(ell, k.min(ell))
    }

    pub fn leaves(&self) -> usize {
        1 << self.ell
    }

    pub fn subtree_width(&self) -> usize {
        1 << (self.ell - self.k)
    }

    pub fn subtrees(&self) -> usize {
        1 << self.k
    }
}

/// `clamp(round(2 log2(ell sqrt(g))) + k_adjust, 0, ell)`.
pub fn default_k(ell: u32, g: u32, k_adjust: i32) -> u32 {
    if ell == 0 {
        return 0;
    }
    // round(log2 x) = floor(log2(2 x^2) / 2) with x = ell^2 g.
    let x = (ell as u128) * (ell as u128) * (g.max(1) as u128);
    let lg = 127 - (2 * x * x).leading_zeros();
    let k = (lg / 2) as i64 + k_adjust as i64;
    k.clamp(0, ell as i64) as u32
}

/// Leaves generated on demand, one block at a time.
///
/// Indices at or past [`len`](LeafStream::len) are padding: the forest supplies
/// identity matrices and modulus 1 for them itself.
pub trait LeafStream {
    fn len(&self) -> usize;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Number of matrix chains sharing the moduli.
    fn chains(&self) -> usize {
        1
    }

    /// Square dimension of the matrices in `chain`.
    fn dim(&self, chain: usize) -> usize;

    fn modulus(&self, j: usize) -> BigInt;

    /// `A_start, ..., A_(start+count-1)` for every chain, indexed `[chain][leaf]`.
    fn matrices(&mut self, start: usize, count: usize) -> Vec<Vec<IntMatrix>>;
}

/// A single chain held in memory.
#[derive(Clone, Debug)]
pub struct VecStream {
    pub matrices: Vec<IntMatrix>,
    pub moduli: Vec<BigInt>,
}

impl LeafStream for VecStream {
    fn len(&self) -> usize {
        self.moduli.len()
    }

    fn dim(&self, _chain: usize) -> usize {
        self.matrices.first().map_or(1, IntMatrix::rows)
    }

    fn modulus(&self, j: usize) -> BigInt {
        self.moduli[j].clone()
    }

    fn matrices(&mut self, start: usize, count: usize) -> Vec<Vec<IntMatrix>> {
        vec![self.matrices[start..start + count].to_vec()]
    }
}

fn vec_bytes(v: &[BigInt]) -> u64 {
    v.iter().map(bigint_bytes).sum()
}

/// Result of one tree over a block of leaves.
#[derive(Clone, Debug)]
pub struct TreeOutput {
    /// `[chain][leaf]` residue vectors.
    pub leaves: Vec<Vec<Vec<BigInt>>>,
    /// Product of all leaf matrices, per chain.
    pub products: Vec<IntMatrix>,
    /// Product of all leaf moduli.
    pub modulus_product: BigInt,
}

/// Product tree of the moduli, bottom level first.
struct ModulusTree {
    levels: Vec<Vec<BigInt>>,
}

impl ModulusTree {
    fn build(mul: &Multiplier, leaves: Vec<BigInt>, meter: &mut MemoryMeter) -> Self {
        meter.alloc(vec_bytes(&leaves));
        let mut levels = vec![leaves];
        while levels.last().unwrap().len() > 1 {
            let below = levels.last().unwrap();
            let next: Vec<BigInt> = below
                .chunks(2)
                .map(|pair| mul.mul(&pair[0], &pair[1]))
                .collect();
            meter.alloc(vec_bytes(&next));
            levels.push(next);
        }
        ModulusTree { levels }
    }

    fn depth(&self) -> usize {
        self.levels.len() - 1
    }

    fn root(&self) -> &BigInt {
        &self.levels[self.depth()][0]
    }
}

/// Product tree of one matrix chain. Right children are dropped as soon as
/// their parent exists, since the descent only reads left children.
fn matrix_tree(
    mul: &Multiplier,
    leaves: Vec<IntMatrix>,
    meter: &mut MemoryMeter,
) -> Result<Vec<Vec<IntMatrix>>, BigmatError> {
    meter.alloc(leaves.iter().map(IntMatrix::byte_size).sum());
    let mut levels = vec![leaves];
    while levels.last().unwrap().len() > 1 {
        let below = levels.last_mut().unwrap();
        let mut next = Vec::with_capacity(below.len() / 2);
        for pair in below.chunks(2) {
            next.push(mul.mat_mul(&pair[0], &pair[1])?);
        }
        meter.alloc(next.iter().map(IntMatrix::byte_size).sum());
        for x in below.iter_mut().skip(1).step_by(2) {
            meter.free(x.byte_size());
            *x = IntMatrix::zeros(0, 0);
        }
        levels.push(next);
    }
    Ok(levels)
}

/// One accumulating remainder tree over a block whose length is a power of
/// two, for several chains sharing `moduli`. Each `vs[c]` may be any integer
/// vector congruent to the true start vector modulo the product of `moduli`.
pub fn remainder_tree_multi(
    mul: &Multiplier,
    vs: &[Vec<BigInt>],
    chains: Vec<Vec<IntMatrix>>,
    moduli: Vec<BigInt>,
    meter: &mut MemoryMeter,
) -> Result<TreeOutput, BigmatError> {
    let t = moduli.len();
    assert!(t.is_power_of_two(), "block length must be a power of two");
    assert_eq!(vs.len(), chains.len());
    let mtree = ModulusTree::build(mul, moduli, meter);
    let depth = mtree.depth();

    let mut trees = Vec::with_capacity(chains.len());
    let mut products = Vec::with_capacity(chains.len());
    for leaves in chains {
        assert_eq!(leaves.len(), t);
        let mut levels = matrix_tree(mul, leaves, meter)?;
        let root = levels.pop().unwrap().pop().unwrap();
        meter.free(root.byte_size());
        products.push(root);
        trees.push(levels);
    }

    let root_reducer = mul.reducer(mtree.root().clone());
    let mut current: Vec<Vec<Vec<BigInt>>> = vs
        .iter()
        .map(|v| vec![v.iter().map(|x| root_reducer.reduce(x, mul)).collect()])
        .collect();
    drop(root_reducer);
    for c in &current {
        meter.alloc(vec_bytes(&c[0]));
    }

    // Level `depth - h` of the modulus tree holds the nodes at distance h
    // from the root.
    for h in 1..=depth {
        let level = depth - h;
        let moduli = &mtree.levels[level];
        let reducers: Vec<Reducer> = moduli.iter().map(|m| mul.reducer(m.clone())).collect();
        for (c, levels) in current.iter_mut().zip(trees.iter_mut()) {
            let mats = core::mem::take(&mut levels[level]);
            let mut next = Vec::with_capacity(moduli.len());
            for (j, red) in reducers.iter().enumerate() {
                let parent = &c[j / 2];
                let v = if red.is_one() {
                    vec![BigInt::zero(); parent.len()]
                } else if j % 2 == 1 {
                    let prod = mul.vec_mat_mul(parent, &mats[j - 1])?;
                    prod.iter().map(|x| red.reduce(x, mul)).collect()
                } else {
                    parent.iter().map(|x| red.reduce(x, mul)).collect()
                };
                meter.alloc(vec_bytes(&v));
                next.push(v);
            }
            meter.free(mats.iter().map(IntMatrix::byte_size).sum());
            meter.free(c.iter().map(|v| vec_bytes(v)).sum());
            *c = next;
        }
    }

    let modulus_product = mtree.root().clone();
    meter.free(mtree.levels.iter().map(|l| vec_bytes(l)).sum());
    for c in &current {
        meter.free(c.iter().map(|v| vec_bytes(v)).sum());
    }
    Ok(TreeOutput {
        leaves: current,
        products,
        modulus_product,
    })
}

/// Single-chain tree over any positive number of leaves, padding with
/// identities and modulus 1. Returns the leaf values for the real leaves and
/// the products of the real matrices and moduli.
pub fn remainder_tree(
    mul: &Multiplier,
    v: &[BigInt],
    a: &[IntMatrix],
    m: &[BigInt],
) -> Result<(Vec<Vec<BigInt>>, IntMatrix, BigInt), BigmatError> {
    assert_eq!(a.len(), m.len());
    assert!(!m.is_empty());
    let t = m.len().next_power_of_two();
    let r = v.len();
    let mut mats = a.to_vec();
    mats.resize(t, IntMatrix::identity(r));
    let mut moduli = m.to_vec();
    moduli.resize(t, BigInt::one());
    let mut meter = MemoryMeter::new();
    let out = remainder_tree_multi(mul, &[v.to_vec()], vec![mats], moduli, &mut meter)?;
    let mut leaves = out.leaves.into_iter().next().unwrap();
    leaves.truncate(m.len());
    Ok((leaves, out.products.into_iter().next().unwrap(), out.modulus_product))
}

/// Product of `m_0 ... m_(len-1)` by a streaming balanced product tree.
fn stream_product(mul: &Multiplier, stream: &dyn LeafStream) -> BigInt {
    let mut stack: Vec<(u32, BigInt)> = Vec::new();
    for j in 0..stream.len() {
        let mut item = (0u32, stream.modulus(j));
        while let Some((lvl, _)) = stack.last() {
            if *lvl != item.0 {
                break;
            }
            let (lvl, x) = stack.pop().unwrap();
            item = (lvl + 1, mul.mul(&x, &item.1));
        }
        stack.push(item);
    }
    stack
        .into_iter()
        .rev()
        .fold(BigInt::one(), |acc, (_, x)| mul.mul(&acc, &x))
}

/// Runs the forest, calling `emit(start, leaves)` once per subtree with the
/// residue vectors `[chain][leaf]` of its real leaves, in ascending order.
pub fn remainder_forest_multi(
    mul: &Multiplier,
    vs: Vec<Vec<BigInt>>,
    stream: &mut dyn LeafStream,
    plan: ForestPlan,
    meter: &mut MemoryMeter,
    emit: &mut dyn FnMut(usize, Vec<Vec<Vec<BigInt>>>),
) -> Result<(), BigmatError> {
    let len = stream.len();
    assert!(plan.leaves() >= len, "plan has fewer leaves than the stream");
    assert_eq!(vs.len(), stream.chains());
    if len == 0 {
        return Ok(());
    }
    let t = plan.subtree_width();
    let chains = stream.chains();
    let dims: Vec<usize> = (0..chains).map(|c| stream.dim(c)).collect();

    let mut y = stream_product(mul, stream);
    meter.alloc(bigint_bytes(&y));
    // V only has to be right modulo the running product, so any multiple of
    // it serves as the reduction modulus. The reducer is rebuilt once y has
    // shrunk by a quarter, which keeps the reciprocal work geometric in k.
    let mut red = mul.reducer(y.clone());
    meter.alloc(red.byte_size());
    let mut vs: Vec<Vec<BigInt>> = vs
        .iter()
        .map(|v| v.iter().map(|x| red.reduce(x, mul)).collect())
        .collect();
    for v in &vs {
        meter.alloc(vec_bytes(v));
    }
    if len <= t {
        meter.free(red.byte_size());
        red = mul.reducer(BigInt::one());
        meter.alloc(red.byte_size());
    }

    for s in 0..plan.subtrees() {
        let start = s * t;
        if start >= len {
            break;
        }
        let real = t.min(len - start);
        let mut mats = stream.matrices(start, real);
        for (c, block) in mats.iter_mut().enumerate() {
            block.resize(t, IntMatrix::identity(dims[c]));
        }
        let mut moduli: Vec<BigInt> = (start..start + real).map(|j| stream.modulus(j)).collect();
        moduli.resize(t, BigInt::one());

        let out = remainder_tree_multi(mul, &vs, mats, moduli, meter)?;
        let leaves = out
            .leaves
            .into_iter()
            .map(|mut l| {
                l.truncate(real);
                l
            })
            .collect();
        emit(start, leaves);

        if start + t >= len {
            break;
        }
        let (q, rem) = mul.reducer(out.modulus_product).div_rem(&y, mul);
        assert!(rem.is_zero(), "modulus product does not divide the running product");
        meter.free(bigint_bytes(&y));
        y = q;
        meter.alloc(bigint_bytes(&y));
        if 4 * y.bits() < 3 * red.modulus().bits() {
            meter.free(red.byte_size());
            red = mul.reducer(y.clone());
            meter.alloc(red.byte_size());
        }
        for (v, a) in vs.iter_mut().zip(&out.products) {
            let prod = mul.vec_mat_mul(v, a)?;
            let next: Vec<BigInt> = prod.iter().map(|x| red.reduce(x, mul)).collect();
            meter.free(vec_bytes(v));
            meter.alloc(vec_bytes(&next));
            *v = next;
        }
    }
    meter.free(bigint_bytes(&y));
    meter.free(red.byte_size());
    for v in &vs {
        meter.free(vec_bytes(v));
    }
    Ok(())
}

/// Single-chain forest collecting every `C_j`.
pub fn remainder_forest(
    mul: &Multiplier,
    v: &[BigInt],
    stream: &mut dyn LeafStream,
    plan: ForestPlan,
    meter: &mut MemoryMeter,
) -> Result<Vec<Vec<BigInt>>, BigmatError> {
    let mut out = Vec::with_capacity(stream.len());
    remainder_forest_multi(mul, vec![v.to_vec()], stream, plan, meter, &mut |_, leaves| {
        out.extend(leaves.into_iter().next().unwrap());
    })?;
    Ok(out)
}
