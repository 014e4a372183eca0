//! Ramsey-type variational interferometer
//! `R_x(pi/2) U_De(vartheta) R_z(phi) U_En(theta) R_y(pi/2)` acting on the
//! lowest-weight Dicke state, read out by projective `J_z` measurement.
//!
//! Every encoding/decoding layer uses the same gate template, applied in
//! this order:
//!
//! ```text
//! T_y(twist_y) -> T_x(twist_x) -> R_x(rot_x) -> R_y(rot_y) -> R_z(rot_z)
//! ```
//!
//! i.e. the layer unitary is `R_z R_y R_x T_x T_y`.

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{CMatrix, CVector};
use crate::scalar::Real;
use crate::spin::{Axis, Generator, SpinOperators};

pub const PARAMS_PER_LAYER: usize = 5;

/// Angles of one encoding or decoding layer, in radians. Stored unwrapped.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct LayerAngles<T> {
    pub rot_x: T,
    pub rot_y: T,
    pub rot_z: T,
    pub twist_x: T,
    pub twist_y: T,
}

impl<T: Real> LayerAngles<T> {
    pub fn zero() -> Self {
        Self::from_array([T::zero(); PARAMS_PER_LAYER])
    }

    pub fn to_array(self) -> [T; PARAMS_PER_LAYER] {
        [self.rot_x, self.rot_y, self.rot_z, self.twist_x, self.twist_y]
    }

    pub fn from_array(a: [T; PARAMS_PER_LAYER]) -> Self {
        Self { rot_x: a[0], rot_y: a[1], rot_z: a[2], twist_x: a[3], twist_y: a[4] }
    }

    /// Gates in application order, each tagged with its slot in `to_array`.
    fn gate_sequence(self) -> [(Generator, T, usize); PARAMS_PER_LAYER] {
        [
            (Generator::Twisting(Axis::Y), self.twist_y, 4),
            (Generator::Twisting(Axis::X), self.twist_x, 3),
            (Generator::Rotation(Axis::X), self.rot_x, 0),
            (Generator::Rotation(Axis::Y), self.rot_y, 1),
            (Generator::Rotation(Axis::Z), self.rot_z, 2),
        ]
    }
}

/// Encoding angles theta and decoding angles vartheta.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct CircuitParams<T> {
    pub encoding: Vec<LayerAngles<T>>,
    pub decoding: Vec<LayerAngles<T>>,
}

impl<T: Real> CircuitParams<T> {
    pub fn zeros(layers_enc: usize, layers_dec: usize) -> Self {
        Self {
            encoding: vec![LayerAngles::zero(); layers_enc],
            decoding: vec![LayerAngles::zero(); layers_dec],
        }
    }

    /// Uniform draws in `[-half_width, half_width]`.
    pub fn random<R: Rng + ?Sized>(layers_enc: usize, layers_dec: usize, half_width: f64, rng: &mut R) -> Self {
        let mut p = Self::zeros(layers_enc, layers_dec);
        let flat: Vec<T> = (0..p.len()).map(|_| T::lit(rng.random_range(-half_width..=half_width))).collect();
        p.set_flat(&flat);
        p
    }

    pub fn layers_enc(&self) -> usize {
        self.encoding.len()
    }

    pub fn layers_dec(&self) -> usize {
        self.decoding.len()
    }

    /// Total number of real parameters.
    pub fn len(&self) -> usize {
        (self.encoding.len() + self.decoding.len()) * PARAMS_PER_LAYER
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Encoding layers first, then decoding; within a layer the
    /// `LayerAngles::to_array` order.
    pub fn to_flat(&self) -> Vec<T> {
        self.encoding.iter().chain(&self.decoding).flat_map(|l| l.to_array()).collect()
    }

    pub fn set_flat(&mut self, flat: &[T]) {
        assert_eq!(flat.len(), self.len());
        for (layer, chunk) in self.encoding.iter_mut().chain(self.decoding.iter_mut()).zip(flat.chunks_exact(PARAMS_PER_LAYER)) {
            *layer = LayerAngles::from_array([chunk[0], chunk[1], chunk[2], chunk[3], chunk[4]]);
        }
    }

    pub fn is_finite(&self) -> bool {
        self.to_flat().iter().all(|x| x.is_finite())
    }
}

/// Measurement distribution over the `N+1` outcomes in basis order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct ProbabilityVector<T> {
    pub values: Vec<T>,
    /// Number of shots behind an empirical vector; 0 marks an exact one.
    pub shots: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ProbabilityKind {
    Exact,
    Empirical,
}

impl<T: Real> ProbabilityVector<T> {
    pub fn exact(values: Vec<T>) -> Self {
        Self { values, shots: 0 }
    }

    pub fn kind(&self) -> ProbabilityKind {
        if self.shots == 0 {
            ProbabilityKind::Exact
        } else {
            ProbabilityKind::Empirical
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn total(&self) -> T {
        self.values.iter().copied().sum()
    }

    /// Multinomial draw of `shots` outcomes, returned as frequencies.
    pub fn sample(&self, shots: u64, seed: u64) -> Result<Self> {
        self.sample_with(shots, &mut ChaCha8Rng::seed_from_u64(seed))
    }

    /// Like [`sample`](Self::sample) with a caller-owned generator. Draws
    /// the multinomial as a chain of conditional binomials, so cost is
    /// independent of the shot count.
    pub fn sample_with<R: Rng + ?Sized>(&self, shots: u64, rng: &mut R) -> Result<Self> {
        if self.kind() != ProbabilityKind::Exact {
            return Err(Error::NotExact);
        }
        if shots == 0 {
            return Err(Error::ZeroShots);
        }
        let sum = self.total().as_f64();
        if (sum - 1.0).abs() > 1e-6 || self.values.iter().any(|p| !(p.as_f64() >= 0.0)) {
            return Err(Error::NotNormalized { sum });
        }
        let mut remaining = shots;
        let mut mass = 1.0_f64;
        let mut counts = vec![0_u64; self.values.len()];
        let last = self.values.len() - 1;
        for (k, p) in self.values.iter().enumerate() {
            if remaining == 0 {
                break;
            }
            if k == last {
                counts[k] = remaining;
                break;
            }
            let p = p.as_f64();
            let cond = if mass > 0.0 { (p / mass).clamp(0.0, 1.0) } else { 1.0 };
            let n = Binomial::new(remaining, cond).expect("valid binomial").sample(rng);
            counts[k] = n;
            remaining -= n;
            mass -= p;
        }
        let denom = T::lit(shots as f64);
        Ok(Self {
            values: counts.iter().map(|&c| T::lit(c as f64) / denom).collect(),
            shots,
        })
    }
}

/// Exact partial derivatives of the outcome probabilities at one phase.
#[derive(Clone, Debug)]
pub struct ProbabilityJacobian<T> {
    pub probabilities: Vec<T>,
    /// `wrt_params[k][m] = dp(m)/d param_k`, params in `CircuitParams::to_flat` order.
    pub wrt_params: Vec<Vec<T>>,
    /// `dp(m)/d phi`.
    pub wrt_phase: Vec<T>,
}

/// Builds circuits on one Dicke space.
#[derive(Clone, Debug)]
pub struct Interferometer<T> {
    ops: SpinOperators<T>,
    prep: CMatrix<T>,
    readout: CMatrix<T>,
}

impl<T: Real> Interferometer<T> {
    pub fn new(ops: SpinOperators<T>) -> Self {
        let quarter = T::FRAC_PI_2();
        let prep = ops.rotation(Axis::Y, quarter).matrix;
        let readout = ops.rotation(Axis::X, quarter).matrix;
        Self { ops, prep, readout }
    }

    pub fn for_particles(n_particles: usize) -> Result<Self> {
        Ok(Self::new(SpinOperators::for_particles(n_particles)?))
    }

    pub fn operators(&self) -> &SpinOperators<T> {
        &self.ops
    }

    pub fn n_particles(&self) -> usize {
        self.ops.space().n_particles()
    }

    pub fn dim(&self) -> usize {
        self.ops.space().dim()
    }

    /// `|m = -N/2>`, the last basis vector.
    pub fn initial_state(&self) -> CVector<T> {
        let mut v = vec![Complex::new(T::zero(), T::zero()); self.dim()];
        *v.last_mut().expect("dim >= 2") = Complex::new(T::one(), T::zero());
        v
    }

    fn layer_unitary(&self, layer: LayerAngles<T>) -> CMatrix<T> {
        layer
            .gate_sequence()
            .iter()
            .fold(CMatrix::identity(self.dim()), |acc, &(g, angle, _)| self.ops.gate(g, angle).matrix.matmul(&acc))
    }

    /// The whole circuit as one matrix, multiplied out gate by gate.
    pub fn full_unitary(&self, phase: T, params: &CircuitParams<T>) -> CMatrix<T> {
        let mut u = self.prep.clone();
        for layer in &params.encoding {
            u = self.layer_unitary(*layer).matmul(&u);
        }
        u = self.ops.rotation(Axis::Z, phase).matrix.matmul(&u);
        for layer in &params.decoding {
            u = self.layer_unitary(*layer).matmul(&u);
        }
        self.readout.matmul(&u)
    }

    /// Precomputes every phase-independent piece of the circuit.
    pub fn compile(&self, params: &CircuitParams<T>) -> CompiledCircuit<T> {
        let n_enc = params.encoding.len() * PARAMS_PER_LAYER;

        // Encoder: gates g_1..g_K applied to psi0 (g_1 = R_y(pi/2), fixed).
        let mut enc_gates: Vec<(CMatrix<T>, Option<usize>, Option<Generator>)> = vec![(self.prep.clone(), None, None)];
        for (li, layer) in params.encoding.iter().enumerate() {
            for (g, angle, slot) in layer.gate_sequence() {
                enc_gates.push((self.ops.gate(g, angle).matrix, Some(li * PARAMS_PER_LAYER + slot), Some(g)));
            }
        }
        let mut prefix = vec![self.initial_state()];
        for (u, _, _) in &enc_gates {
            let next = u.matvec(prefix.last().expect("nonempty"));
            prefix.push(next);
        }
        let probe = prefix.last().expect("nonempty").clone();
        let mut probe_derivs = vec![Vec::new(); n_enc];
        for (gi, (u, slot, g)) in enc_gates.iter().enumerate() {
            if let (Some(slot), Some(g)) = (slot, g) {
                // d g_i = -i G g_i ; applied to the state entering the gate
                let mut v = u.matvec(&prefix[gi]);
                v = self.ops.generator_matrix(*g).matvec(&v);
                for z in v.iter_mut() {
                    *z = Complex::new(z.im, -z.re);
                }
                for (later, _, _) in &enc_gates[gi + 1..] {
                    v = later.matvec(&v);
                }
                probe_derivs[*slot] = v;
            }
        }

        // Decoder: M = R_x(pi/2) D_L ... D_1.
        let mut dec_gates: Vec<(CMatrix<T>, Option<usize>, Option<Generator>)> = Vec::new();
        for (li, layer) in params.decoding.iter().enumerate() {
            for (g, angle, slot) in layer.gate_sequence() {
                dec_gates.push((self.ops.gate(g, angle).matrix, Some(n_enc + li * PARAMS_PER_LAYER + slot), Some(g)));
            }
        }
        dec_gates.push((self.readout.clone(), None, None));
        let dim = self.dim();
        // prefix_m[i] = g_i ... g_1 (product of the first i gates)
        let mut prefix_m = vec![CMatrix::identity(dim)];
        for (u, _, _) in &dec_gates {
            let next = u.matmul(prefix_m.last().expect("nonempty"));
            prefix_m.push(next);
        }
        // suffix_m[i] = g_L ... g_{i+1}
        let mut suffix_m = vec![CMatrix::identity(dim); dec_gates.len() + 1];
        for i in (0..dec_gates.len()).rev() {
            suffix_m[i] = suffix_m[i + 1].matmul(&dec_gates[i].0);
        }
        let readout = prefix_m.last().expect("nonempty").clone();
        let n_dec = params.decoding.len() * PARAMS_PER_LAYER;
        let mut readout_derivs = vec![CMatrix::zeros(dim); n_dec];
        for (gi, (u, slot, g)) in dec_gates.iter().enumerate() {
            if let (Some(slot), Some(g)) = (slot, g) {
                let dg = self.ops.generator_matrix(*g).matmul(u).scale(Complex::new(T::zero(), -T::one()));
                readout_derivs[slot - n_enc] = suffix_m[gi + 1].matmul(&dg).matmul(&prefix_m[gi]);
            }
        }

        CompiledCircuit {
            labels: self.ops.space().labels().to_vec(),
            probe,
            probe_derivs,
            readout,
            readout_derivs,
        }
    }

    pub fn probabilities(&self, phase: T, params: &CircuitParams<T>) -> ProbabilityVector<T> {
        self.compile(params).probabilities(phase)
    }

    pub fn probability_jacobian(&self, phase: T, params: &CircuitParams<T>) -> ProbabilityJacobian<T> {
        self.compile(params).jacobian(phase)
    }

    pub fn qfi(&self, params: &CircuitParams<T>) -> T {
        self.compile(params).qfi()
    }

    /// `4 Var(J_z)` of an arbitrary pure state in this space.
    pub fn qfi_of_state(&self, state: &[Complex<T>]) -> T {
        qfi_jz(self.ops.space().labels(), state)
    }
}

fn qfi_jz<T: Real>(labels: &[T], state: &[Complex<T>]) -> T {
    let norm: T = state.iter().map(|z| z.norm_sqr()).sum();
    let (mut m1, mut m2) = (T::zero(), T::zero());
    for (z, &m) in state.iter().zip(labels) {
        let w = z.norm_sqr() / norm;
        m1 += w * m;
        m2 += w * m * m;
    }
    (T::lit(4.0) * (m2 - m1 * m1)).max(T::zero())
}

/// A circuit with fixed angles, ready to be evaluated at many phases.
///
/// With `e` the encoded probe and `M` the readout matrix, the final state is
/// `M (z(phi) * e)` where `z_k = e^{-i m_k phi}` is the diagonal phase
/// encoding, so each phase costs one matrix-vector product per derivative.
#[derive(Clone, Debug)]
pub struct CompiledCircuit<T> {
    labels: Vec<T>,
    probe: CVector<T>,
    probe_derivs: Vec<CVector<T>>,
    readout: CMatrix<T>,
    readout_derivs: Vec<CMatrix<T>>,
}

impl<T: Real> CompiledCircuit<T> {
    /// State after `U_En(theta) R_y(pi/2)`, before the phase is encoded.
    pub fn probe_state(&self) -> &[Complex<T>] {
        &self.probe
    }

    pub fn n_params(&self) -> usize {
        self.probe_derivs.len() + self.readout_derivs.len()
    }

    pub fn qfi(&self) -> T {
        qfi_jz(&self.labels, &self.probe)
    }

    fn encoded(&self, phase: T, v: &[Complex<T>]) -> CVector<T> {
        v.iter()
            .zip(&self.labels)
            .map(|(z, &m)| {
                let arg = -m * phase;
                *z * Complex::new(arg.cos(), arg.sin())
            })
            .collect()
    }

    pub fn amplitudes(&self, phase: T) -> CVector<T> {
        self.readout.matvec(&self.encoded(phase, &self.probe))
    }

    pub fn probabilities(&self, phase: T) -> ProbabilityVector<T> {
        ProbabilityVector::exact(self.amplitudes(phase).iter().map(|z| z.norm_sqr()).collect())
    }

    pub fn jacobian(&self, phase: T) -> ProbabilityJacobian<T> {
        let ze = self.encoded(phase, &self.probe);
        let psi = self.readout.matvec(&ze);
        let dim = psi.len();
        let two = T::lit(2.0);
        let dp = |dpsi: &[Complex<T>]| -> Vec<T> {
            psi.iter().zip(dpsi).map(|(a, d)| two * (a.conj() * *d).re).collect()
        };
        let mut wrt_params = Vec::with_capacity(self.n_params());
        let mut buf = vec![Complex::new(T::zero(), T::zero()); dim];
        for d in &self.probe_derivs {
            self.readout.matvec_into(&self.encoded(phase, d), &mut buf);
            wrt_params.push(dp(&buf));
        }
        for dm in &self.readout_derivs {
            dm.matvec_into(&ze, &mut buf);
            wrt_params.push(dp(&buf));
        }
        // d/dphi of z_k e_k = -i m_k z_k e_k
        let dze: CVector<T> = ze.iter().zip(&self.labels).map(|(z, &m)| Complex::new(z.im * m, -z.re * m)).collect();
        self.readout.matvec_into(&dze, &mut buf);
        let wrt_phase = dp(&buf);
        ProbabilityJacobian {
            probabilities: psi.iter().map(|z| z.norm_sqr()).collect(),
            wrt_params,
            wrt_phase,
        }
    }
}
