use num_bigint::BigInt;

use crate::error::Error;
use crate::model::{ModelParams, State};
use crate::numeric::{binomial, Rational};
use crate::oracle::dixon::{ExactSolver, SparseIntMatrix};

/// Mixed-radix little-endian numbering of states: ball 1 varies fastest.
#[derive(Clone, Debug)]
pub(crate) struct StateIndexer {
    urns: u64,
    strides: Vec<u64>,
}

impl StateIndexer {
    pub(crate) fn new(params: &ModelParams) -> Self {
        let n = params.urns() as u64;
        let mut strides = Vec::with_capacity(params.balls() as usize);
        let mut s = 1u64;
        for _ in 0..params.balls() {
            strides.push(s);
            s = s.saturating_mul(n);
        }
        StateIndexer { urns: n, strides }
    }

    pub(crate) fn index(&self, x: &State) -> usize {
        x.positions().iter().zip(&self.strides).map(|(&u, &s)| (u as u64 - 1) * s).sum::<u64>() as usize
    }

    pub(crate) fn state(&self, mut idx: usize) -> State {
        let n = self.urns as usize;
        State::new(
            (0..self.strides.len())
                .map(|_| {
                    let d = idx % n;
                    idx /= n;
                    d as u32 + 1
                })
                .collect(),
        )
    }

    /// Calls `f` on every neighbour of `idx`.
    pub(crate) fn for_each_neighbor(&self, idx: usize, mut f: impl FnMut(usize)) {
        let idx = idx as u64;
        for &s in &self.strides {
            let d = (idx / s) % self.urns;
            let base = idx - d * s;
            for e in 0..self.urns {
                if e != d {
                    f((base + e * s) as usize);
                }
            }
        }
    }
}

/// The full state space with its transition structure.
#[derive(Clone, Debug)]
pub struct EnumeratedChain {
    params: ModelParams,
    indexer: StateIndexer,
    degree: usize,
    neighbors: Vec<u32>,
}

impl EnumeratedChain {
    /// Enumerates all `N^M` states; fails when that exceeds `cap`.
    pub fn new(params: ModelParams, cap: u128) -> Result<Self, Error> {
        let size = params.state_count();
        if size > cap {
            return Err(Error::CapExceeded { size, cap });
        }
        if size > u32::MAX as u128 {
            return Err(Error::CapExceeded { size, cap: u32::MAX as u128 });
        }
        let indexer = StateIndexer::new(&params);
        let degree = params.degree() as usize;
        let mut neighbors = Vec::with_capacity(size as usize * degree);
        for i in 0..size as usize {
            indexer.for_each_neighbor(i, |j| neighbors.push(j as u32));
        }
        Ok(EnumeratedChain { params, indexer, degree, neighbors })
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn len(&self) -> usize {
        self.neighbors.len() / self.degree
    }

    pub fn is_empty(&self) -> bool {
        self.neighbors.is_empty()
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn state(&self, idx: usize) -> State {
        self.indexer.state(idx)
    }

    /// All states in canonical order.
    pub fn states(&self) -> Vec<State> {
        (0..self.len()).map(|i| self.state(i)).collect()
    }

    pub fn index_of(&self, x: &State) -> Result<usize, Error> {
        self.params.check_state(x)?;
        Ok(self.indexer.index(x))
    }

    pub fn neighbors(&self, idx: usize) -> &[u32] {
        &self.neighbors[idx * self.degree..(idx + 1) * self.degree]
    }

    /// Nonzero entries of row `idx` of the transition matrix.
    pub fn kernel_row(&self, idx: usize) -> Vec<(usize, Rational)> {
        let w = Rational::new(1, self.degree as i64);
        self.neighbors(idx).iter().map(|&j| (j as usize, w.clone())).collect()
    }
}

const NOT_TRANSIENT: usize = usize::MAX;

/// First-step equations of a chain absorbed on a target set.
pub struct AbsorbingSystem<'c> {
    chain: &'c EnumeratedChain,
    target: Vec<usize>,
    transient: Vec<usize>,
    slot: Vec<usize>,
    solver: ExactSolver,
}

impl<'c> AbsorbingSystem<'c> {
    pub fn new(chain: &'c EnumeratedChain, target: &[State]) -> Result<Self, Error> {
        if target.is_empty() {
            return Err(Error::Descriptor("target set is empty".into()));
        }
        let mut in_target = vec![false; chain.len()];
        let mut indices = Vec::with_capacity(target.len());
        for z in target {
            let i = chain.index_of(z)?;
            if in_target[i] {
                return Err(Error::Descriptor(format!("duplicate target state {z}")));
            }
            in_target[i] = true;
            indices.push(i);
        }
        let transient: Vec<usize> = (0..chain.len()).filter(|&i| !in_target[i]).collect();
        let mut slot = vec![NOT_TRANSIENT; chain.len()];
        for (pos, &i) in transient.iter().enumerate() {
            slot[i] = pos;
        }
        let deg = BigInt::from(chain.degree);
        let solver = ExactSolver::new(Self::matrix(chain, &transient, &slot, &deg, &BigInt::from(1)))?;
        Ok(AbsorbingSystem { chain, target: indices, transient, slot, solver })
    }

    /// `diag·I - off·Adj` restricted to transient states.
    fn matrix(
        chain: &EnumeratedChain,
        transient: &[usize],
        slot: &[usize],
        diag: &BigInt,
        off: &BigInt,
    ) -> SparseIntMatrix {
        let mut m = SparseIntMatrix::new(transient.len());
        let neg = -off;
        for (pos, &i) in transient.iter().enumerate() {
            m.push(pos, pos, diag.clone());
            for &j in chain.neighbors(i) {
                let s = slot[j as usize];
                if s != NOT_TRANSIENT {
                    m.push(pos, s, neg.clone());
                }
            }
        }
        m
    }

    pub fn chain(&self) -> &EnumeratedChain {
        self.chain
    }

    /// Chain indices of the target, in the order given.
    pub fn target(&self) -> &[usize] {
        &self.target
    }

    pub fn transient_count(&self) -> usize {
        self.transient.len()
    }

    fn expand(&self, values: Vec<Rational>, on_target: &Rational) -> Vec<Rational> {
        let mut full = vec![on_target.clone(); self.chain.len()];
        for (&i, v) in self.transient.iter().zip(values) {
            full[i] = v;
        }
        full
    }

    /// `Σ_{y ~ x, y transient} w(y)` for each transient `x`.
    fn neighbor_sums(&self, w: &[Rational]) -> Vec<Rational> {
        self.transient
            .iter()
            .map(|&i| {
                self.chain
                    .neighbors(i)
                    .iter()
                    .filter(|&&j| self.slot[j as usize] != NOT_TRANSIENT)
                    .map(|&j| &w[j as usize])
                    .sum()
            })
            .collect()
    }

    fn count_target_neighbors(&self, i: usize) -> i64 {
        self.chain.neighbors(i).iter().filter(|&&j| self.slot[j as usize] == NOT_TRANSIENT).count() as i64
    }

    /// `E^x[T_A]` for every state.
    pub fn mean_vector(&self) -> Result<Vec<Rational>, Error> {
        Ok(self.moment_vectors(1)?.pop().expect("one moment"))
    }

    /// `E^x[T_A^m]` for every state, `m = 1..=order`, from
    /// `(I - P_B) w_m = Σ_{j<m} C(m,j) P w_j` with `P w_0 = 1`.
    pub fn moment_vectors(&self, order: usize) -> Result<Vec<Vec<Rational>>, Error> {
        let nt = self.transient.len();
        let deg = Rational::from(self.chain.degree);
        let mut sums: Vec<Vec<Rational>> = vec![vec![deg; nt]];
        let mut out = Vec::with_capacity(order);
        for m in 1..=order {
            let rhs: Vec<Rational> = (0..nt)
                .map(|t| (0..m).map(|j| Rational::from(binomial(m as u64, j as i64)) * &sums[j][t]).sum())
                .collect();
            let w = self.expand(self.solver.solve_rational(&rhs)?, &Rational::zero());
            sums.push(self.neighbor_sums(&w));
            out.push(w);
        }
        Ok(out)
    }

    /// `E^x[z^{T_A}]` for every state, `0 < z < 1`.
    pub fn transform_vector(&self, z: &Rational) -> Result<Vec<Rational>, Error> {
        if !z.is_positive() || *z >= Rational::one() {
            return Err(Error::Domain(format!("generating-function argument must lie in (0,1), got {z}")));
        }
        let (a, b) = (z.numer().clone(), z.denom().clone());
        let diag = &b * BigInt::from(self.chain.degree);
        let solver = ExactSolver::new(Self::matrix(self.chain, &self.transient, &self.slot, &diag, &a))?;
        let rhs: Vec<BigInt> = self.transient.iter().map(|&i| &a * self.count_target_neighbors(i)).collect();
        Ok(self.expand(solver.solve(&rhs)?, &Rational::one()))
    }

    /// For each target member `y` (in target order), the probability that
    /// the chain enters the target at `y`, for every start.
    pub fn exit_vectors(&self) -> Result<Vec<Vec<Rational>>, Error> {
        self.target
            .iter()
            .map(|&y| {
                let rhs: Vec<BigInt> = self
                    .transient
                    .iter()
                    .map(|&i| BigInt::from(self.chain.neighbors(i).iter().filter(|&&j| j as usize == y).count()))
                    .collect();
                let mut full = self.expand(self.solver.solve(&rhs)?, &Rational::zero());
                full[y] = Rational::one();
                Ok(full)
            })
            .collect()
    }
}
