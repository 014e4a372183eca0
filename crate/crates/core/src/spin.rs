//! Collective spin operators on the symmetric (Dicke) subspace.
//!
//! Basis order is fixed for the whole crate: index `k` holds the Dicke state
//! with `m = N/2 - k`, i.e. `m` descends from `+N/2` to `-N/2`.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{CMatrix, HermitianEigen};
use crate::scalar::Real;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub const ALL: [Axis; 3] = [Axis::X, Axis::Y, Axis::Z];

    fn index(self) -> usize {
        match self {
            Axis::X => 0,
            Axis::Y => 1,
            Axis::Z => 2,
        }
    }
}

/// Symmetric subspace of `n_particles` two-level systems.
#[derive(Clone, Debug, PartialEq)]
pub struct DickeSpace<T> {
    n_particles: usize,
    labels: Vec<T>,
}

impl<T: Real> DickeSpace<T> {
    pub fn new(n_particles: usize) -> Result<Self> {
        if n_particles == 0 {
            return Err(Error::InvalidParticleNumber(n_particles));
        }
        let labels = (0..=n_particles)
            .map(|k| T::from_usize_lossy(n_particles) * T::lit(0.5) - T::from_usize_lossy(k))
            .collect();
        Ok(Self { n_particles, labels })
    }

    #[inline]
    pub fn n_particles(&self) -> usize {
        self.n_particles
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.n_particles + 1
    }

    /// Population-imbalance labels `m`, in basis order (descending).
    pub fn labels(&self) -> &[T] {
        &self.labels
    }

    /// Total spin `j = N/2`.
    pub fn spin(&self) -> T {
        T::from_usize_lossy(self.n_particles) * T::lit(0.5)
    }

    /// Index of the basis state with label `m`, if any.
    pub fn index_of(&self, m: T) -> Option<usize> {
        self.labels.iter().position(|&l| (l - m).abs() < T::lit(1e-9))
    }
}

/// A Hermitian collective operator `J_axis` in the Dicke basis.
#[derive(Clone, Debug)]
pub struct CollectiveOperator<T> {
    pub axis: Axis,
    pub matrix: CMatrix<T>,
}

/// Which function of `J_axis` a gate exponentiates.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Generator {
    /// `e^{-i beta J_axis}`
    Rotation(Axis),
    /// `e^{-i chi J_axis^2}`
    Twisting(Axis),
}

impl Generator {
    /// Period of the gate in its angle. Rotations on half-integer spins pick
    /// up a global sign after 2pi, so their period is 4pi in general; integer
    /// spectra give 2pi. Twisting with `m^2` in `{0, 1/4, 1, 9/4, ...}` needs
    /// 8pi for half-integer spin and 2pi for integer spin.
    pub fn period<T: Real>(self, space: &DickeSpace<T>) -> T {
        let integer_spin = space.n_particles().is_multiple_of(2);
        let two_pi = T::PI() + T::PI();
        match (self, integer_spin) {
            (_, true) => two_pi,
            (Generator::Rotation(_), false) => two_pi + two_pi,
            (Generator::Twisting(_), false) => two_pi * T::lit(4.0),
        }
    }
}

#[derive(Clone, Debug)]
pub struct UnitaryGate<T> {
    pub generator: Generator,
    pub angle: T,
    pub matrix: CMatrix<T>,
}

/// Operator table for one Dicke space with cached eigendecompositions.
///
/// Immutable after construction, so one instance can be shared by all
/// workers evaluating circuits on the same space.
#[derive(Clone, Debug)]
pub struct SpinOperators<T> {
    space: DickeSpace<T>,
    ops: [CollectiveOperator<T>; 3],
    squares: [CMatrix<T>; 3],
    eigen: [HermitianEigen<T>; 3],
}

impl<T: Real> SpinOperators<T> {
    pub fn new(space: DickeSpace<T>) -> Self {
        let n = space.dim();
        let j = space.spin();
        let labels = space.labels().to_vec();
        let zero = Complex::new(T::zero(), T::zero());

        let jz = CMatrix::from_fn(n, |r, c| if r == c { Complex::new(labels[r], T::zero()) } else { zero });
        // <m+1| J_+ |m> = sqrt(j(j+1) - m(m+1)); m+1 sits one index above m.
        let jplus = CMatrix::from_fn(n, |r, c| {
            if r + 1 == c {
                let m = labels[c];
                Complex::new((j * (j + T::one()) - m * (m + T::one())).sqrt(), T::zero())
            } else {
                zero
            }
        });
        let jminus = jplus.adjoint();
        let half = Complex::new(T::lit(0.5), T::zero());
        let jx = jplus.add(&jminus).scale(half);
        // (J_+ - J_-)/(2i) = -i/2 (J_+ - J_-)
        let jy = jplus.sub(&jminus).scale(Complex::new(T::zero(), -T::lit(0.5)));

        let ops = [
            CollectiveOperator { axis: Axis::X, matrix: jx },
            CollectiveOperator { axis: Axis::Y, matrix: jy },
            CollectiveOperator { axis: Axis::Z, matrix: jz },
        ];
        let squares = [0, 1, 2].map(|k| ops[k].matrix.matmul(&ops[k].matrix));
        let eigen = [0, 1, 2].map(|k| {
            if k == 2 {
                // already diagonal; keep exact labels and basis order
                HermitianEigen { values: labels.clone(), vectors: CMatrix::identity(n) }
            } else {
                HermitianEigen::new(&ops[k].matrix)
            }
        });
        Self { space, ops, squares, eigen }
    }

    pub fn for_particles(n_particles: usize) -> Result<Self> {
        Ok(Self::new(DickeSpace::new(n_particles)?))
    }

    pub fn space(&self) -> &DickeSpace<T> {
        &self.space
    }

    pub fn operator(&self, axis: Axis) -> &CollectiveOperator<T> {
        &self.ops[axis.index()]
    }

    /// `J_axis^2`.
    pub fn square(&self, axis: Axis) -> &CMatrix<T> {
        &self.squares[axis.index()]
    }

    pub fn spectrum(&self, axis: Axis) -> &[T] {
        &self.eigen[axis.index()].values
    }

    pub fn generator_matrix(&self, generator: Generator) -> &CMatrix<T> {
        match generator {
            Generator::Rotation(axis) => &self.operator(axis).matrix,
            Generator::Twisting(axis) => self.square(axis),
        }
    }

    /// `e^{-i angle f(J_axis)}` from the cached eigendecomposition.
    pub fn gate(&self, generator: Generator, angle: T) -> UnitaryGate<T> {
        let (axis, squared) = match generator {
            Generator::Rotation(a) => (a, false),
            Generator::Twisting(a) => (a, true),
        };
        let phase = |l: T| {
            let g = if squared { l * l } else { l };
            let arg = -angle * g;
            Complex::new(arg.cos(), arg.sin())
        };
        let matrix = if axis == Axis::Z {
            // diagonal generator: skip the basis change
            let diag: Vec<_> = self.space.labels().iter().map(|&l| phase(l)).collect();
            CMatrix::from_diagonal(&diag)
        } else {
            self.eigen[axis.index()].map_spectrum(phase)
        };
        UnitaryGate { generator, angle, matrix }
    }

    pub fn rotation(&self, axis: Axis, angle: T) -> UnitaryGate<T> {
        self.gate(Generator::Rotation(axis), angle)
    }

    pub fn twisting(&self, axis: Axis, angle: T) -> UnitaryGate<T> {
        self.gate(Generator::Twisting(axis), angle)
    }

    /// `d/d angle` of a gate: `-i G U`, using that `G` commutes with `U`.
    pub fn gate_derivative(&self, gate: &UnitaryGate<T>) -> CMatrix<T> {
        self.generator_matrix(gate.generator)
            .matmul(&gate.matrix)
            .scale(Complex::new(T::zero(), -T::one()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> Complex<f64> {
        Complex::new(re, im)
    }

    #[test]
    fn rejects_zero_particles() {
        assert!(matches!(DickeSpace::<f64>::new(0), Err(Error::InvalidParticleNumber(0))));
    }

    #[test]
    fn labels_descend_symmetric_unit_spacing() {
        for n in 1..=9 {
            let s = DickeSpace::<f64>::new(n).unwrap();
            assert_eq!(s.dim(), n + 1);
            let l = s.labels();
            assert_eq!(l[0], n as f64 / 2.0);
            assert!(l.windows(2).all(|w| w[0] - w[1] == 1.0));
            for (a, b) in l.iter().zip(l.iter().rev()) {
                assert_eq!(*a, -*b);
            }
        }
    }

    #[test]
    fn jz_for_two_particles() {
        let ops = SpinOperators::<f64>::for_particles(2).unwrap();
        let jz = &ops.operator(Axis::Z).matrix;
        let expected = CMatrix::from_diagonal(&[c(1.0, 0.0), c(0.0, 0.0), c(-1.0, 0.0)]);
        assert_eq!(jz, &expected);
    }

    #[test]
    fn jx_for_single_particle_is_half_pauli_x() {
        let ops = SpinOperators::<f64>::for_particles(1).unwrap();
        let jx = &ops.operator(Axis::X).matrix;
        assert!((jx[(0, 1)] - c(0.5, 0.0)).norm() < 1e-15);
        assert!((jx[(1, 0)] - c(0.5, 0.0)).norm() < 1e-15);
        assert_eq!(jx[(0, 0)], c(0.0, 0.0));
        assert_eq!(jx[(1, 1)], c(0.0, 0.0));
    }

    #[test]
    fn operators_hermitian() {
        let ops = SpinOperators::<f64>::for_particles(7).unwrap();
        for axis in Axis::ALL {
            assert!(ops.operator(axis).matrix.hermitian_defect() < 1e-12);
        }
    }

    #[test]
    fn zero_angle_gates_are_identity() {
        let ops = SpinOperators::<f64>::for_particles(5).unwrap();
        let id = CMatrix::identity(6);
        for axis in Axis::ALL {
            assert!(ops.rotation(axis, 0.0).matrix.max_abs_diff(&id) < 1e-14);
            assert!(ops.twisting(axis, 0.0).matrix.max_abs_diff(&id) < 1e-14);
        }
    }

    #[test]
    fn diagonal_gates_have_closed_form_phases() {
        let ops = SpinOperators::<f64>::for_particles(4).unwrap();
        let phi = 0.77;
        let rz = ops.rotation(Axis::Z, phi).matrix;
        let tz = ops.twisting(Axis::Z, phi).matrix;
        for (k, &m) in ops.space().labels().iter().enumerate() {
            assert!((rz[(k, k)] - Complex::from_polar(1.0, -m * phi)).norm() < 1e-15);
            assert!((tz[(k, k)] - Complex::from_polar(1.0, -m * m * phi)).norm() < 1e-15);
        }
    }

    #[test]
    fn y_quarter_turn_on_spin_half() {
        // e^{-i pi/4 sigma_y} = [[cos, -sin], [sin, cos]] at pi/4 in (up, down) order
        let ops = SpinOperators::<f64>::for_particles(1).unwrap();
        let ry = ops.rotation(Axis::Y, PI / 2.0).matrix;
        let down = [c(0.0, 0.0), c(1.0, 0.0)];
        let out = ry.matvec(&down);
        let h = (PI / 4.0).sin();
        assert!((out[0] - c(-h, 0.0)).norm() < 1e-14);
        assert!((out[1] - c((PI / 4.0).cos(), 0.0)).norm() < 1e-14);
        assert!((out[0].norm() - out[1].norm()).abs() < 1e-14);
    }

    #[test]
    fn rotation_derivative_at_zero_is_minus_i_jz() {
        let ops = SpinOperators::<f64>::for_particles(3).unwrap();
        let d = ops.gate_derivative(&ops.rotation(Axis::Z, 0.0));
        let expected = ops.operator(Axis::Z).matrix.scale(c(0.0, -1.0));
        assert!(d.max_abs_diff(&expected) < 1e-15);
    }

    #[test]
    fn twisting_x_derivative_matches_finite_difference() {
        let ops = SpinOperators::<f64>::for_particles(4).unwrap();
        let h = 1e-6;
        let analytic = ops.gate_derivative(&ops.twisting(Axis::X, 0.3));
        let plus = ops.twisting(Axis::X, 0.3 + h).matrix;
        let minus = ops.twisting(Axis::X, 0.3 - h).matrix;
        let fd = plus.sub(&minus).scale(c(0.5 / h, 0.0));
        assert!(analytic.max_abs_diff(&fd) < 1e-7);
    }

    #[test]
    fn period_returns_same_gate() {
        for n in [1, 2, 3, 4] {
            let ops = SpinOperators::<f64>::for_particles(n).unwrap();
            for axis in Axis::ALL {
                for generator in [Generator::Rotation(axis), Generator::Twisting(axis)] {
                    let p = generator.period(ops.space());
                    let a = ops.gate(generator, 0.4).matrix;
                    let b = ops.gate(generator, 0.4 + p).matrix;
                    assert!(a.max_abs_diff(&b) < 1e-10, "n={n} {generator:?}");
                }
            }
        }
    }
}
