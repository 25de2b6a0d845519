//! Two-port network algebra.
//!
//! ABCD (transmission) matrices for series and shunt arms, left-to-right
//! cascading, conversion to S-parameters against a real reference
//! impedance, and the reflection-coefficient relations between a
//! two-port, its load and its input port.
//!
//! Port 1 faces the source (RF front end), port 2 faces the load
//! (antenna). Both ports share one real reference impedance.

mod touchstone;

use std::fmt;
use std::ops::Mul;

pub use num_complex::Complex64 as Complex;
pub use touchstone::{write_touchstone, TouchstonePoint};

use crate::error::{Error, Result};

const ONE: Complex = Complex::new(1.0, 0.0);
const ZERO: Complex = Complex::new(0.0, 0.0);

fn is_finite(z: Complex) -> bool {
    z.re.is_finite() && z.im.is_finite()
}

fn is_zero(z: Complex) -> bool {
    z.re == 0.0 && z.im == 0.0
}

/// Complex impedance in ohms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Impedance(pub Complex);

impl Impedance {
    pub fn new(re: f64, im: f64) -> Self {
        Impedance(Complex::new(re, im))
    }

    pub fn resistance(self) -> f64 {
        self.0.re
    }

    pub fn reactance(self) -> f64 {
        self.0.im
    }

    pub fn to_admittance(self) -> Result<Admittance> {
        if is_zero(self.0) {
            return Err(Error::SingularNetwork("zero impedance has no finite admittance"));
        }
        Ok(Admittance(self.0.inv()))
    }
}

/// Complex admittance in siemens.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Admittance(pub Complex);

impl Admittance {
    pub fn new(re: f64, im: f64) -> Self {
        Admittance(Complex::new(re, im))
    }

    /// Pure susceptance `jB`.
    pub fn susceptance(b: f64) -> Self {
        Admittance(Complex::new(0.0, b))
    }

    pub fn to_impedance(self) -> Result<Impedance> {
        if is_zero(self.0) {
            return Err(Error::SingularNetwork("zero admittance has no finite impedance"));
        }
        Ok(Impedance(self.0.inv()))
    }
}

/// Real, strictly positive reference impedance shared by both ports.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct ReferenceImpedance(f64);

impl ReferenceImpedance {
    pub const DEFAULT_OHMS: f64 = 50.0;

    pub fn new(ohms: f64) -> Result<Self> {
        if !(ohms.is_finite() && ohms > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "reference impedance must be finite and positive, got {ohms}"
            )));
        }
        Ok(ReferenceImpedance(ohms))
    }

    pub fn ohms(self) -> f64 {
        self.0
    }
}

impl Default for ReferenceImpedance {
    fn default() -> Self {
        ReferenceImpedance(Self::DEFAULT_OHMS)
    }
}

/// Dimensionless reflection coefficient.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReflectionCoefficient(pub Complex);

impl ReflectionCoefficient {
    pub const ZERO: ReflectionCoefficient = ReflectionCoefficient(ZERO);

    pub fn new(re: f64, im: f64) -> Self {
        ReflectionCoefficient(Complex::new(re, im))
    }

    pub fn magnitude(self) -> f64 {
        self.0.norm()
    }
}

/// Transmission matrix `[[a, b], [c, d]]`; `b` in ohms, `c` in siemens.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AbcdMatrix {
    pub a: Complex,
    pub b: Complex,
    pub c: Complex,
    pub d: Complex,
}

impl AbcdMatrix {
    pub const IDENTITY: AbcdMatrix = AbcdMatrix { a: ONE, b: ZERO, c: ZERO, d: ONE };

    pub fn determinant(&self) -> Complex {
        self.a * self.d - self.b * self.c
    }

    pub fn is_finite(&self) -> bool {
        is_finite(self.a) && is_finite(self.b) && is_finite(self.c) && is_finite(self.d)
    }

    /// Input impedance at port 1 with `load` terminating port 2.
    pub fn input_impedance(&self, load: Impedance) -> Result<Impedance> {
        let den = self.c * load.0 + self.d;
        if is_zero(den) {
            return Err(Error::SingularNetwork("open input port"));
        }
        Ok(Impedance((self.a * load.0 + self.b) / den))
    }
}

impl Mul for AbcdMatrix {
    type Output = AbcdMatrix;

    fn mul(self, rhs: AbcdMatrix) -> AbcdMatrix {
        AbcdMatrix {
            a: self.a * rhs.a + self.b * rhs.c,
            b: self.a * rhs.b + self.b * rhs.d,
            c: self.c * rhs.a + self.d * rhs.c,
            d: self.c * rhs.b + self.d * rhs.d,
        }
    }
}

impl Default for AbcdMatrix {
    fn default() -> Self {
        Self::IDENTITY
    }
}

/// Scattering matrix of a two-port at one operating state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SParameters {
    pub s11: Complex,
    pub s12: Complex,
    pub s21: Complex,
    pub s22: Complex,
    pub reference: ReferenceImpedance,
}

impl SParameters {
    /// Matched through line.
    pub fn identity(reference: ReferenceImpedance) -> Self {
        SParameters { s11: ZERO, s12: ONE, s21: ONE, s22: ZERO, reference }
    }

    /// Flattened as `[Re s11, Im s11, Re s12, Im s12, Re s21, Im s21, Re s22, Im s22]`,
    /// the layout the surrogate network predicts.
    pub fn to_array(&self) -> [f64; 8] {
        [
            self.s11.re,
            self.s11.im,
            self.s12.re,
            self.s12.im,
            self.s21.re,
            self.s21.im,
            self.s22.re,
            self.s22.im,
        ]
    }

    pub fn from_array(v: &[f64; 8], reference: ReferenceImpedance) -> Self {
        SParameters {
            s11: Complex::new(v[0], v[1]),
            s12: Complex::new(v[2], v[3]),
            s21: Complex::new(v[4], v[5]),
            s22: Complex::new(v[6], v[7]),
            reference,
        }
    }

    pub fn is_finite(&self) -> bool {
        is_finite(self.s11) && is_finite(self.s12) && is_finite(self.s21) && is_finite(self.s22)
    }
}

impl fmt::Display for SParameters {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "S11={:.6} S12={:.6} S21={:.6} S22={:.6}",
            self.s11, self.s12, self.s21, self.s22
        )
    }
}

/// `[[1, z], [0, 1]]`
pub fn series_arm_abcd(z: Impedance) -> Result<AbcdMatrix> {
    if !is_finite(z.0) {
        return Err(Error::InvalidArgument(format!("series arm impedance {} is not finite", z.0)));
    }
    Ok(AbcdMatrix { a: ONE, b: z.0, c: ZERO, d: ONE })
}

/// `[[1, 0], [y, 1]]`
pub fn shunt_arm_abcd(y: Admittance) -> Result<AbcdMatrix> {
    if !is_finite(y.0) {
        return Err(Error::InvalidArgument(format!("shunt arm admittance {} is not finite", y.0)));
    }
    Ok(AbcdMatrix { a: ONE, b: ZERO, c: y.0, d: ONE })
}

/// Left-to-right product of `factors`; the empty chain is the identity.
pub fn cascade<'a, I>(factors: I) -> AbcdMatrix
where
    I: IntoIterator<Item = &'a AbcdMatrix>,
{
    factors.into_iter().fold(AbcdMatrix::IDENTITY, |acc, m| acc * *m)
}

/// S-parameters of a two-port from its ABCD matrix, both ports referenced
/// to `z0`.
///
/// `s21 = 2/den` and `s12 = 2(ad - bc)/den`; the two coincide for any
/// reciprocal (unit-determinant) network.
pub fn abcd_to_s(m: &AbcdMatrix, z0: ReferenceImpedance) -> Result<SParameters> {
    let r = z0.ohms();
    let b_n = m.b / r;
    let c_n = m.c * r;
    let den = m.a + b_n + c_n + m.d;
    if is_zero(den) || !is_finite(den) {
        return Err(Error::SingularNetwork("ABCD to S denominator vanishes"));
    }
    let inv = den.inv();
    Ok(SParameters {
        s11: (m.a + b_n - c_n - m.d) * inv,
        s12: 2.0 * m.determinant() * inv,
        s21: 2.0 * inv,
        s22: (-m.a + b_n - c_n + m.d) * inv,
        reference: z0,
    })
}

/// `(z - r)/(z + r)`
pub fn impedance_to_reflection(z: Impedance, r: ReferenceImpedance) -> Result<ReflectionCoefficient> {
    let den = z.0 + r.ohms();
    if is_zero(den) {
        return Err(Error::SingularNetwork("impedance equals minus the reference"));
    }
    Ok(ReflectionCoefficient((z.0 - r.ohms()) / den))
}

/// `r (1 + g)/(1 - g)`
pub fn reflection_to_impedance(g: ReflectionCoefficient, r: ReferenceImpedance) -> Result<Impedance> {
    let den = ONE - g.0;
    if is_zero(den) {
        return Err(Error::SingularNetwork("reflection of +1 is an open circuit"));
    }
    Ok(Impedance(r.ohms() * (ONE + g.0) / den))
}

/// Reflection seen at port 1 when port 2 is terminated by a load with
/// reflection `gl`.
pub fn input_reflection(s: &SParameters, gl: ReflectionCoefficient) -> Result<ReflectionCoefficient> {
    let den = ONE - gl.0 * s.s22;
    if is_zero(den) {
        return Err(Error::SingularNetwork("load resonates with port-2 reflection"));
    }
    Ok(ReflectionCoefficient(s.s12 * s.s21 * gl.0 / den + s.s11))
}

/// Inverse of [`input_reflection`]: the load reflection that produces the
/// measured input reflection `gin`.
pub fn load_reflection_from_input(
    s: &SParameters,
    gin: ReflectionCoefficient,
) -> Result<ReflectionCoefficient> {
    let num = gin.0 - s.s11;
    let den = s.s12 * s.s21 + num * s.s22;
    if is_zero(den) || !is_finite(den) {
        return Err(Error::UnrecoverableLoad);
    }
    let gl = num / den;
    if !is_finite(gl) {
        return Err(Error::UnrecoverableLoad);
    }
    Ok(ReflectionCoefficient(gl))
}

/// Matching objective: magnitude of the input reflection.
pub fn objective_psi(s: &SParameters, gl: ReflectionCoefficient) -> Result<f64> {
    input_reflection(s, gl).map(ReflectionCoefficient::magnitude)
}

/// Value and gradient of the matching objective with respect to the
/// eight real S-parameter components (layout of [`SParameters::to_array`]).
///
/// The gradient of `|Γ|` is taken as zero where `Γ = 0`.
pub fn objective_psi_gradient(s: &SParameters, gl: ReflectionCoefficient) -> Result<(f64, [f64; 8])> {
    let den = ONE - gl.0 * s.s22;
    if is_zero(den) {
        return Err(Error::SingularNetwork("load resonates with port-2 reflection"));
    }
    let inv = den.inv();
    let gamma = s.s12 * s.s21 * gl.0 * inv + s.s11;
    let psi = gamma.norm();
    let mut grad = [0.0; 8];
    if psi == 0.0 {
        return Ok((psi, grad));
    }
    // Γ is holomorphic in each entry, so d|Γ|/dRe = Re(Γ̄Γ')/|Γ| and
    // d|Γ|/dIm = -Im(Γ̄Γ')/|Γ|.
    let partials = [
        ONE,
        s.s21 * gl.0 * inv,
        s.s12 * gl.0 * inv,
        s.s12 * s.s21 * gl.0 * gl.0 * inv * inv,
    ];
    let conj = gamma.conj();
    for (k, d) in partials.iter().enumerate() {
        let w = conj * d;
        grad[2 * k] = w.re / psi;
        grad[2 * k + 1] = -w.im / psi;
    }
    Ok((psi, grad))
}
