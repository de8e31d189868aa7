//! Fully connected Boltzmann machine over input, label and hidden units.
//!
//! Units are ordered `(inputs, labels, hidden)`. Inputs are always clamped to
//! data, so the model stores no input biases and no input–input weights; the
//! trainable set is exactly the free-unit biases, the input→free weights and
//! the free–free weights.
//!
//! Energy convention:
//!
//! ```text
//! E(s) = -Σ_i b_i s_i - Σ_{i<j} W_ij s_i s_j
//! ```
//!
//! With this sign the clamped effective bias is `b_i + Σ_k W_ik v_k`, the
//! stochastic unit update is `σ((b_i + Σ_m W_im s_m) / T)` and the contrastive
//! increments `<s_i>_+ - <s_i>_-` are likelihood ascent directions.

use std::collections::BTreeMap;
use std::io::{Read, Write};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seed;

/// Unit counts of a model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct UnitLayout {
    pub inputs: usize,
    pub hidden: usize,
    pub labels: usize,
}

impl UnitLayout {
    pub fn new(inputs: usize, hidden: usize, labels: usize) -> Result<Self> {
        let layout = UnitLayout { inputs, hidden, labels };
        layout.validate()?;
        Ok(layout)
    }

    pub fn validate(&self) -> Result<()> {
        if self.hidden == 0 {
            return Err(Error::Layout("at least one hidden unit is required".into()));
        }
        if self.labels == 0 {
            return Err(Error::Layout("at least one label unit is required".into()));
        }
        Ok(())
    }

    /// Total number of units.
    pub fn n(&self) -> usize {
        self.inputs + self.hidden + self.labels
    }

    /// Number of non-input units (labels + hidden).
    pub fn free(&self) -> usize {
        self.hidden + self.labels
    }

    pub fn input_weight_count(&self) -> usize {
        self.inputs * self.free()
    }

    pub fn free_weight_count(&self) -> usize {
        let f = self.free();
        f * (f.saturating_sub(1)) / 2
    }

    pub fn weight_count(&self) -> usize {
        self.input_weight_count() + self.free_weight_count()
    }
}

/// Number of trainable reals: free biases, input→free weights and free–free
/// weights.
pub fn parameter_count(layout: &UnitLayout) -> usize {
    layout.free() + layout.weight_count()
}

/// Index of the free–free pair `(f, g)`, `f < g`, in row-major upper-triangular
/// order.
#[inline]
pub(crate) fn tri_index(n: usize, f: usize, g: usize) -> usize {
    debug_assert!(f < g && g < n);
    f * (2 * n - f - 1) / 2 + (g - f - 1)
}

/// Biases and weights of a Boltzmann machine.
///
/// `biases[f]` is the bias of free unit `f` (labels first, then hidden).
/// `weights` holds the input→free block row-major (`k * free + f`) followed by
/// the free–free upper triangle row-major. This is the row-major
/// upper-triangular order of the full weight matrix with input–input pairs
/// skipped.
#[derive(Debug, Clone, PartialEq)]
pub struct BmParams {
    layout: UnitLayout,
    pub biases: Vec<f64>,
    pub weights: Vec<f64>,
}

impl BmParams {
    pub fn zeros(layout: UnitLayout) -> Result<Self> {
        layout.validate()?;
        Ok(BmParams {
            layout,
            biases: vec![0.0; layout.free()],
            weights: vec![0.0; layout.weight_count()],
        })
    }

    /// Every bias and weight drawn independently from U[-1, 1].
    pub fn init(layout: UnitLayout, seed: u64) -> Result<Self> {
        let mut p = Self::zeros(layout)?;
        let mut rng = seed::rng(seed);
        for v in p.biases.iter_mut().chain(p.weights.iter_mut()) {
            *v = rng.gen_range(-1.0..=1.0);
        }
        Ok(p)
    }

    pub fn from_parts(layout: UnitLayout, biases: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        layout.validate()?;
        if biases.len() != layout.free() {
            return Err(Error::Dimension {
                what: "biases",
                expected: layout.free(),
                actual: biases.len(),
            });
        }
        if weights.len() != layout.weight_count() {
            return Err(Error::Dimension {
                what: "weights",
                expected: layout.weight_count(),
                actual: weights.len(),
            });
        }
        Ok(BmParams {
            layout,
            biases,
            weights,
        })
    }

    pub fn layout(&self) -> &UnitLayout {
        &self.layout
    }

    pub fn parameter_count(&self) -> usize {
        self.biases.len() + self.weights.len()
    }

    #[inline]
    pub fn input_weight_index(&self, k: usize, f: usize) -> usize {
        k * self.layout.free() + f
    }

    #[inline]
    pub fn free_weight_index(&self, f: usize, g: usize) -> usize {
        let (f, g) = if f < g { (f, g) } else { (g, f) };
        self.layout.input_weight_count() + tri_index(self.layout.free(), f, g)
    }

    pub fn input_weight(&self, k: usize, f: usize) -> f64 {
        self.weights[self.input_weight_index(k, f)]
    }

    /// Weight between distinct free units, symmetric in its arguments.
    pub fn free_weight(&self, f: usize, g: usize) -> f64 {
        if f == g {
            return 0.0;
        }
        self.weights[self.free_weight_index(f, g)]
    }

    /// Weight between units `i` and `j` in full-model indexing. Input–input
    /// pairs and the diagonal are zero.
    pub fn weight(&self, i: usize, j: usize) -> f64 {
        let d = self.layout.inputs;
        let (i, j) = if i < j { (i, j) } else { (j, i) };
        if i == j || j < d {
            0.0
        } else if i < d {
            self.input_weight(i, j - d)
        } else {
            self.free_weight(i - d, j - d)
        }
    }

    /// Bias of unit `i` in full-model indexing (zero for inputs).
    pub fn bias(&self, i: usize) -> f64 {
        let d = self.layout.inputs;
        if i < d {
            0.0
        } else {
            self.biases[i - d]
        }
    }

    /// Energy of a full state `(v_d, v_l, h)`. Input entries may be any real
    /// value; label and hidden entries are expected to be 0 or 1.
    pub fn energy(&self, state: &[f64]) -> Result<f64> {
        let n = self.layout.n();
        if state.len() != n {
            return Err(Error::Dimension {
                what: "state",
                expected: n,
                actual: state.len(),
            });
        }
        let d = self.layout.inputs;
        let nf = self.layout.free();
        let free = &state[d..];
        let mut e = 0.0;
        for f in 0..nf {
            if free[f] == 0.0 {
                continue;
            }
            let mut field = self.biases[f];
            for k in 0..d {
                field += self.input_weight(k, f) * state[k];
            }
            for g in (f + 1)..nf {
                field += self.free_weight(f, g) * free[g];
            }
            e -= field * free[f];
        }
        Ok(e)
    }
}

/// One data point in model units: inputs in [0, 1] and label bits.
#[derive(Debug, Clone, PartialEq)]
pub struct EncodedPoint {
    pub inputs: Vec<f64>,
    pub labels: Vec<u8>,
}

impl EncodedPoint {
    pub fn new(inputs: Vec<f64>, labels: Vec<u8>) -> Result<Self> {
        if let Some(x) = inputs.iter().find(|x| !(0.0..=1.0).contains(*x)) {
            return Err(Error::InvalidArgument(format!("input value {x} outside [0, 1]")));
        }
        if labels.iter().any(|&l| l > 1) {
            return Err(Error::InvalidArgument("label bits must be 0 or 1".into()));
        }
        Ok(EncodedPoint { inputs, labels })
    }

    pub fn check(&self, layout: &UnitLayout) -> Result<()> {
        if self.inputs.len() != layout.inputs {
            return Err(Error::Dimension {
                what: "inputs",
                expected: layout.inputs,
                actual: self.inputs.len(),
            });
        }
        if self.labels.len() != layout.labels {
            return Err(Error::Dimension {
                what: "labels",
                expected: layout.labels,
                actual: self.labels.len(),
            });
        }
        Ok(())
    }
}

/// Energy function over the free units left after clamping:
///
/// `E(x) = offset - Σ_i bias_i x_i - Σ_{i<j} W_ij x_i x_j`
#[derive(Debug, Clone, PartialEq)]
pub struct ReducedProblem {
    pub bias: Vec<f64>,
    /// Dense symmetric `m × m` couplings with zero diagonal.
    coupling: Vec<f64>,
    pub offset: f64,
    pub temperature: f64,
}

impl ReducedProblem {
    pub fn new(bias: Vec<f64>, temperature: f64) -> Result<Self> {
        if bias.is_empty() {
            return Err(Error::InvalidArgument(
                "reduced problem needs at least one free unit".into(),
            ));
        }
        if !(temperature > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "temperature must be positive, got {temperature}"
            )));
        }
        let m = bias.len();
        Ok(ReducedProblem {
            bias,
            coupling: vec![0.0; m * m],
            offset: 0.0,
            temperature,
        })
    }

    pub fn m(&self) -> usize {
        self.bias.len()
    }

    #[inline]
    pub fn weight(&self, i: usize, j: usize) -> f64 {
        self.coupling[i * self.m() + j]
    }

    pub fn set_weight(&mut self, i: usize, j: usize, w: f64) {
        assert!(i != j, "no self couplings");
        let m = self.m();
        self.coupling[i * m + j] = w;
        self.coupling[j * m + i] = w;
    }

    pub(crate) fn coupling_row(&self, i: usize) -> &[f64] {
        let m = self.m();
        &self.coupling[i * m..(i + 1) * m]
    }

    /// Energy of a free-unit configuration, including the offset.
    pub fn energy(&self, x: &[u8]) -> f64 {
        debug_assert_eq!(x.len(), self.m());
        let m = self.m();
        let mut e = self.offset;
        for i in 0..m {
            if x[i] == 0 {
                continue;
            }
            e -= self.bias[i];
            let row = self.coupling_row(i);
            for j in (i + 1)..m {
                if x[j] != 0 {
                    e -= row[j];
                }
            }
        }
        e
    }

    /// Energy of the configuration encoded in the low `m` bits of `state`.
    pub fn energy_of_index(&self, state: u64) -> f64 {
        let x: Vec<u8> = (0..self.m()).map(|i| ((state >> i) & 1) as u8).collect();
        self.energy(&x)
    }
}

/// Clamps the inputs. The free units are all labels then all hidden units.
pub fn clamp_inputs(params: &BmParams, inputs: &[f64], temperature: f64) -> Result<ReducedProblem> {
    let layout = *params.layout();
    if inputs.len() != layout.inputs {
        return Err(Error::Dimension {
            what: "inputs",
            expected: layout.inputs,
            actual: inputs.len(),
        });
    }
    let nf = layout.free();
    let mut bias = params.biases.clone();
    for (k, &v) in inputs.iter().enumerate() {
        if v == 0.0 {
            continue;
        }
        let row = &params.weights[k * nf..(k + 1) * nf];
        for (b, w) in bias.iter_mut().zip(row) {
            *b += w * v;
        }
    }
    let mut rp = ReducedProblem::new(bias, temperature)?;
    for f in 0..nf {
        for g in (f + 1)..nf {
            rp.set_weight(f, g, params.free_weight(f, g));
        }
    }
    Ok(rp)
}

/// Clamps inputs and labels. The free units are the hidden units; label
/// values fold into the hidden biases exactly as inputs do, and the energy
/// of the clamped units alone is carried in `offset`.
pub fn clamp_inputs_and_label(
    params: &BmParams,
    inputs: &[f64],
    labels: &[u8],
    temperature: f64,
) -> Result<ReducedProblem> {
    let layout = *params.layout();
    if labels.len() != layout.labels {
        return Err(Error::Dimension {
            what: "labels",
            expected: layout.labels,
            actual: labels.len(),
        });
    }
    let neg = clamp_inputs(params, inputs, temperature)?;
    let nl = layout.labels;
    let nh = layout.hidden;
    if nh == 0 {
        return Err(Error::Layout("clamping all visibles leaves no free unit".into()));
    }

    let mut offset = 0.0;
    for l in 0..nl {
        if labels[l] == 0 {
            continue;
        }
        offset -= neg.bias[l];
        for l2 in (l + 1)..nl {
            if labels[l2] != 0 {
                offset -= neg.weight(l, l2);
            }
        }
    }

    let mut bias = neg.bias[nl..].to_vec();
    for (h, b) in bias.iter_mut().enumerate() {
        for l in 0..nl {
            if labels[l] != 0 {
                *b += neg.weight(l, nl + h);
            }
        }
    }
    let mut rp = ReducedProblem::new(bias, temperature)?;
    rp.offset = offset;
    for h in 0..nh {
        for h2 in (h + 1)..nh {
            rp.set_weight(h, h2, neg.weight(nl + h, nl + h2));
        }
    }
    Ok(rp)
}

/// Quadratic model over binary variables:
/// `E(x) = offset + Σ linear_i x_i + Σ_{i<j} quadratic_ij x_i x_j`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct QuboProblem {
    pub num_vars: usize,
    pub linear: BTreeMap<usize, f64>,
    pub quadratic: BTreeMap<(usize, usize), f64>,
    pub offset: f64,
}

impl QuboProblem {
    pub fn new(num_vars: usize) -> Self {
        QuboProblem {
            num_vars,
            ..Default::default()
        }
    }

    pub fn add_linear(&mut self, i: usize, v: f64) {
        if v != 0.0 {
            let e = self.linear.entry(i).or_insert(0.0);
            *e += v;
            if *e == 0.0 {
                self.linear.remove(&i);
            }
        }
    }

    pub fn add_quadratic(&mut self, i: usize, j: usize, v: f64) {
        assert!(i != j, "quadratic terms need distinct variables");
        let key = if i < j { (i, j) } else { (j, i) };
        if v != 0.0 {
            let e = self.quadratic.entry(key).or_insert(0.0);
            *e += v;
            if *e == 0.0 {
                self.quadratic.remove(&key);
            }
        }
    }

    pub fn energy(&self, x: &[u8]) -> f64 {
        let mut e = self.offset;
        for (&i, &a) in &self.linear {
            e += a * x[i] as f64;
        }
        for (&(i, j), &q) in &self.quadratic {
            e += q * (x[i] & x[j]) as f64;
        }
        e
    }
}

/// Ising model over spins in {-1, +1}:
/// `E(s) = offset + Σ h_i s_i + Σ_{i<j} J_ij s_i s_j`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct IsingProblem {
    pub num_vars: usize,
    pub h: BTreeMap<usize, f64>,
    pub j: BTreeMap<(usize, usize), f64>,
    pub offset: f64,
}

impl IsingProblem {
    pub fn new(num_vars: usize) -> Self {
        IsingProblem {
            num_vars,
            ..Default::default()
        }
    }

    pub fn add_h(&mut self, i: usize, v: f64) {
        if v != 0.0 {
            *self.h.entry(i).or_insert(0.0) += v;
        }
    }

    pub fn add_j(&mut self, i: usize, k: usize, v: f64) {
        assert!(i != k, "couplings need distinct spins");
        let key = if i < k { (i, k) } else { (k, i) };
        if v != 0.0 {
            *self.j.entry(key).or_insert(0.0) += v;
        }
    }

    pub fn energy(&self, s: &[i8]) -> f64 {
        let mut e = self.offset;
        for (&i, &h) in &self.h {
            e += h * s[i] as f64;
        }
        for (&(i, k), &j) in &self.j {
            e += j * (s[i] * s[k]) as f64;
        }
        e
    }

    pub fn max_abs_coefficient(&self) -> f64 {
        self.h.values().chain(self.j.values()).fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// QUBO whose energy equals the reduced problem's energy on every state.
pub fn to_qubo(rp: &ReducedProblem) -> QuboProblem {
    let m = rp.m();
    let mut q = QuboProblem::new(m);
    q.offset = rp.offset;
    for i in 0..m {
        q.add_linear(i, -rp.bias[i]);
        for j in (i + 1)..m {
            q.add_quadratic(i, j, -rp.weight(i, j));
        }
    }
    q
}

/// Change of variables `x = (s + 1) / 2`.
pub fn qubo_to_ising(q: &QuboProblem) -> IsingProblem {
    let mut ising = IsingProblem::new(q.num_vars);
    ising.offset = q.offset;
    for (&i, &a) in &q.linear {
        ising.add_h(i, a / 2.0);
        ising.offset += a / 2.0;
    }
    for (&(i, j), &w) in &q.quadratic {
        ising.add_j(i, j, w / 4.0);
        ising.add_h(i, w / 4.0);
        ising.add_h(j, w / 4.0);
        ising.offset += w / 4.0;
    }
    ising
}

/// Change of variables `s = 2x - 1`.
pub fn ising_to_qubo(ising: &IsingProblem) -> QuboProblem {
    let mut q = QuboProblem::new(ising.num_vars);
    q.offset = ising.offset;
    for (&i, &h) in &ising.h {
        q.add_linear(i, 2.0 * h);
        q.offset -= h;
    }
    for (&(i, k), &j) in &ising.j {
        q.add_quadratic(i, k, 4.0 * j);
        q.add_linear(i, -2.0 * j);
        q.add_linear(k, -2.0 * j);
        q.offset += j;
    }
    q
}

const PBM_MAGIC: &[u8; 4] = b"PBM1";

/// Writes the flat `PBM1` record: magic, `(inputs, hidden, labels)` as u32
/// little-endian, then biases, then weights as f64 little-endian.
pub fn write_params<W: Write>(params: &BmParams, mut out: W) -> Result<()> {
    let l = params.layout();
    out.write_all(PBM_MAGIC)?;
    for n in [l.inputs, l.hidden, l.labels] {
        let n = u32::try_from(n).map_err(|_| Error::Format("layout too large for PBM1".into()))?;
        out.write_all(&n.to_le_bytes())?;
    }
    for v in params.biases.iter().chain(&params.weights) {
        out.write_all(&v.to_le_bytes())?;
    }
    Ok(())
}

pub fn read_params<R: Read>(mut input: R) -> Result<BmParams> {
    let mut magic = [0u8; 4];
    input.read_exact(&mut magic)?;
    if &magic != PBM_MAGIC {
        return Err(Error::Format("bad PBM1 magic".into()));
    }
    let mut dims = [0usize; 3];
    for d in &mut dims {
        let mut b = [0u8; 4];
        input.read_exact(&mut b)?;
        *d = u32::from_le_bytes(b) as usize;
    }
    let layout = UnitLayout::new(dims[0], dims[1], dims[2])?;
    let mut read_vec = |n: usize| -> Result<Vec<f64>> {
        let mut buf = vec![0u8; n * 8];
        input
            .read_exact(&mut buf)
            .map_err(|_| Error::Format("truncated PBM1 record".into()))?;
        Ok(buf
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect())
    };
    let biases = read_vec(layout.free())?;
    let weights = read_vec(layout.weight_count())?;
    BmParams::from_parts(layout, biases, weights)
}
