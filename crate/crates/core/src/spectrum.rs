//! Assembly and solution of the Lagrange-mesh equations
//! `Σ_j [T_ij / (2 m h²) + (V(x_i) + PS) δ_ij] c_j = E c_i`, with the
//! post-processing that turns eigenpairs into energies, wavefunctions and
//! expectation values.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;
use std::sync::Arc;

use rug::{Assign, Complex, Float};

use crate::basis::{choose_family, map_mesh, mapped_lagrange_eval, DomainSpec, MappedMesh};
use crate::eigen::{self, DenseMatrix, EigenResult, Matrix, SymmetryTag};
use crate::error::{Error, Result, Warning};
use crate::numeric::{make_context, BigComplex, BigReal, PrecisionContext};
use crate::orthopoly::{build_mesh, MeshKey, MeshRecord, PolyFamily};
use crate::potential::{eval_real, realness_probe, PotentialExpr};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Method {
    #[default]
    Dense,
    /// Lowest levels only, by shift-invert iteration.
    Partial,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Dense => "dense",
            Method::Partial => "partial",
        })
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "dense" | "full" => Ok(Method::Dense),
            "partial" | "arnoldi" => Ok(Method::Partial),
            other => Err(Error::InvalidOption(format!("unknown method `{other}`"))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct SolveOptions {
    pub nlevels: usize,
    pub dimension: usize,
    pub precision: u32,
    pub scaling: BigReal,
    pub mass: BigComplex,
    pub potential_shift: BigReal,
    pub method: Method,
    pub expectation: Option<PotentialExpr>,
    pub want_coefficients: bool,
    pub want_discrete: bool,
    pub want_continuous: bool,
    /// Directory of the mesh cache; `None` computes meshes in memory.
    pub cache_dir: Option<PathBuf>,
}

impl SolveOptions {
    /// Defaults: `h = 1`, `m = 1`, no shift, dense method, no extras.
    pub fn new(nlevels: usize, dimension: usize, precision: u32) -> Self {
        SolveOptions {
            nlevels,
            dimension,
            precision,
            scaling: Float::with_val(64, 1),
            mass: Complex::with_val(64, 1),
            potential_shift: Float::new(64),
            method: Method::Dense,
            expectation: None,
            want_coefficients: false,
            want_discrete: false,
            want_continuous: false,
            cache_dir: None,
        }
    }

    pub fn validate(&self) -> Result<PrecisionContext> {
        let ctx = make_context(self.precision)?;
        if self.dimension == 0 {
            return Err(Error::InvalidOption("dimension must be positive".into()));
        }
        if self.nlevels == 0 || self.nlevels > self.dimension {
            return Err(Error::InvalidOption(format!(
                "number of levels must lie in 1..={}, got {}",
                self.dimension, self.nlevels
            )));
        }
        if !(self.scaling.is_finite() && self.scaling > 0) {
            return Err(Error::InvalidScaling(format!("h must be positive, got {}", self.scaling)));
        }
        if self.mass.is_zero() || !(self.mass.real().is_finite() && self.mass.imag().is_finite()) {
            return Err(Error::InvalidOption("mass must be a finite non-zero number".into()));
        }
        if !self.potential_shift.is_finite() {
            return Err(Error::InvalidOption("potential shift must be finite".into()));
        }
        Ok(ctx)
    }
}

#[derive(Debug, Clone)]
pub struct HamiltonianMatrix {
    pub matrix: DenseMatrix,
    pub mapped_mesh: MappedMesh,
    pub applied_shift: BigReal,
    /// `V(x_i) + PS` at each physical node.
    pub diagonal: Vec<BigComplex>,
    pub warnings: Vec<Warning>,
}

fn load_mesh(key: MeshKey, opts: &SolveOptions, warnings: &mut Vec<Warning>) -> Result<MeshRecord> {
    match &opts.cache_dir {
        Some(root) => {
            let built = build_mesh(key, root)?;
            warnings.extend(built.warnings);
            Ok(built.record)
        }
        None => MeshRecord::compute(key),
    }
}

pub fn assemble(potential: &PotentialExpr, domain: &DomainSpec, opts: &SolveOptions) -> Result<HamiltonianMatrix> {
    let ctx = opts.validate()?;
    let bits = ctx.bits();
    let mut warnings = Vec::new();
    let family = choose_family(domain);
    let key = MeshKey::new(family, opts.dimension, opts.precision)?;
    let record = load_mesh(key, opts, &mut warnings)?;
    let mesh = map_mesh(&record, domain, &Float::with_val(bits, &opts.scaling))?;
    let n = mesh.dimension();
    let kinetic = mesh.kinetic()?;

    let shift = Float::with_val(bits, &opts.potential_shift);
    let mut diagonal = Vec::with_capacity(n);
    for (i, x) in mesh.physical_points.iter().enumerate() {
        let v = eval_real(potential, x, &ctx).map_err(|e| Error::AssemblyFailure {
            index: i,
            source: Box::new(e),
        })?;
        diagonal.push(v + &shift);
    }

    // 1 / (2 m h_eff^2)
    let mut coef = Complex::with_val(bits, &opts.mass);
    coef *= Float::with_val(bits, mesh.jacobian.square_ref());
    coef *= 2u32;
    coef.recip_mut();

    let real_mass = opts.mass.imag().is_zero();
    let real_potential = real_mass
        && realness_probe(potential, &mesh.physical_points, &ctx).map_err(|e| Error::AssemblyFailure {
            index: 0,
            source: Box::new(e),
        })?;

    let matrix = if real_potential {
        let c = coef.real().clone();
        DenseMatrix::RealSymmetric(Matrix::from_fn(n, |i, j| {
            let mut t = Float::with_val(bits, kinetic.get(i, j) * &c);
            if i == j {
                t += diagonal[i].real();
            }
            t
        }))
    } else {
        DenseMatrix::ComplexSymmetric(Matrix::from_fn(n, |i, j| {
            let mut t = Complex::with_val(bits, &coef * kinetic.get(i, j));
            if i == j {
                t += &diagonal[i];
            }
            t
        }))
    };

    if opts.method == Method::Partial {
        let min = diagonal
            .iter()
            .map(|v| v.real().clone())
            .min_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal))
            .unwrap_or_else(|| ctx.zero());
        if min <= 0 {
            let w = Warning::ShiftAdvisory {
                min_diagonal: format!("{:.6e}", min.to_f64()),
            };
            log::warn!("{w}");
            warnings.push(w);
        }
    }

    Ok(HamiltonianMatrix {
        matrix,
        mapped_mesh: mesh,
        applied_shift: shift,
        diagonal,
        warnings,
    })
}

/// Solve-level metadata echoed in every result.
#[derive(Debug, Clone)]
pub struct SpectrumMetadata {
    pub family: PolyFamily,
    pub dimension: usize,
    pub precision: u32,
    pub scaling: BigReal,
    pub mass: BigComplex,
    pub shift: BigReal,
    pub method: Method,
    pub symmetry: SymmetryTag,
    pub residual_bound: BigReal,
}

/// Continuous approximation `ψ(x) = Σ_k c_k f̂_k(x)` on the physical domain.
#[derive(Debug, Clone)]
pub struct WaveFunction {
    mesh: Arc<MappedMesh>,
    coefficients: Vec<BigComplex>,
}

impl WaveFunction {
    pub fn coefficients(&self) -> &[BigComplex] {
        &self.coefficients
    }

    pub fn eval(&self, x: &BigReal) -> Result<BigComplex> {
        let ctx = self.mesh.context();
        let bits = ctx.bits();
        let x = Float::with_val(bits, x);
        let mut acc = Complex::new(bits);
        let mut tmp = Complex::new(bits);
        for (k, c) in self.coefficients.iter().enumerate() {
            let f = mapped_lagrange_eval(&self.mesh, k + 1, &x, &ctx)?;
            tmp.assign(c * &f);
            acc += &tmp;
        }
        Ok(acc)
    }
}

#[derive(Debug, Clone)]
pub struct SpectrumResult {
    /// Ascending by real part, shift already removed.
    pub energies: Vec<BigComplex>,
    pub coefficients: Option<Vec<Vec<BigComplex>>>,
    /// Per state, `(x_k, ψ(x_k))` at each physical node.
    pub discrete_psi: Option<Vec<Vec<(BigReal, BigComplex)>>>,
    pub wavefunctions: Option<Vec<WaveFunction>>,
    pub expectations: Option<Vec<BigComplex>>,
    pub metadata: SpectrumMetadata,
    pub warnings: Vec<Warning>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Mode {
    Values,
    Functions,
    System,
}

/// Makes the largest-modulus entry real and positive.
pub(crate) fn fix_phase(v: &mut [BigComplex]) {
    let Some(first) = v.first() else { return };
    let bits = first.prec().0;
    let mut best = 0;
    let mut best_norm = Float::new(bits);
    for (k, c) in v.iter().enumerate() {
        let m = Float::with_val(bits, c.norm_ref());
        if m > best_norm {
            best_norm = m;
            best = k;
        }
    }
    if best_norm.is_zero() {
        return;
    }
    let pivot = &v[best];
    if pivot.imag().is_zero() && v.iter().all(|c| c.imag().is_zero()) {
        if pivot.real().is_sign_negative() {
            for c in v.iter_mut() {
                *c = -std::mem::replace(c, Complex::new(bits));
            }
        }
        return;
    }
    let mut phase = Complex::with_val(bits, pivot.conj_ref());
    phase /= best_norm.sqrt();
    for c in v.iter_mut() {
        *c *= &phase;
    }
    // Remove rounding residue on the pivot.
    let re = v[best].real().clone();
    v[best].assign((re, 0));
}

/// `Σ_k |c_k|² O(x_k)` over the physical nodes.
pub fn expectation_value(
    obs: &PotentialExpr,
    coefficients: &[BigComplex],
    mesh: &MappedMesh,
    ctx: &PrecisionContext,
) -> Result<BigComplex> {
    let bits = ctx.bits();
    let mut acc = Complex::new(bits);
    for (c, x) in coefficients.iter().zip(&mesh.physical_points) {
        let o = eval_real(obs, x, ctx)?;
        acc += Complex::with_val(bits, o * Float::with_val(bits, c.norm_ref()));
    }
    Ok(acc)
}

fn diagonalize(h: &HamiltonianMatrix, opts: &SolveOptions, ctx: &PrecisionContext, vectors: bool) -> Result<EigenResult> {
    let k = opts.nlevels;
    let mut result = match (&h.matrix, opts.method) {
        (DenseMatrix::RealSymmetric(a), Method::Dense) => eigen::jacobi_eigen(a, ctx, vectors)?,
        (DenseMatrix::RealSymmetric(a), Method::Partial) => eigen::partial_eigen(a, k, ctx)?,
        (DenseMatrix::ComplexSymmetric(a) | DenseMatrix::General(a), Method::Dense) => {
            let values = eigen::qr_eigen_complex(a, ctx)?;
            eigen::complex_pairs(a, values, ctx, vectors, Some(k))?
        }
        (_, Method::Partial) => {
            return Err(Error::UnsupportedMethod {
                method: "partial",
                reason: "complex-symmetric Hamiltonians",
            })
        }
    };
    result.values.truncate(k);
    if let Some(v) = result.vectors.as_mut() {
        v.truncate(k);
    }
    Ok(result)
}

fn solve(potential: &PotentialExpr, domain: &DomainSpec, opts: &SolveOptions, mode: Mode) -> Result<SpectrumResult> {
    let ctx = opts.validate()?;
    let bits = ctx.bits();
    let h = assemble(potential, domain, opts)?;
    let want_functions = mode != Mode::Values;
    let need_vectors = want_functions || opts.expectation.is_some();
    let eig = diagonalize(&h, opts, &ctx, need_vectors)?;
    let mut warnings = h.warnings.clone();
    warnings.extend(eig.warnings.iter().cloned());

    let energies: Vec<BigComplex> = eig
        .values
        .iter()
        .map(|e| Complex::with_val(bits, e - &h.applied_shift))
        .collect();

    let mut vectors = eig.vectors;
    if let Some(vs) = vectors.as_mut() {
        vs.iter_mut().for_each(|v| fix_phase(v));
    }
    let mesh = Arc::new(h.mapped_mesh.clone());

    let expectations = match (&opts.expectation, &vectors) {
        (Some(obs), Some(vs)) => Some(
            vs.iter()
                .map(|c| expectation_value(obs, c, &mesh, &ctx))
                .collect::<Result<Vec<_>>>()?,
        ),
        _ => None,
    };

    // With no explicit form requested, functions mode returns coefficients.
    let none_chosen = !(opts.want_coefficients || opts.want_discrete || opts.want_continuous);
    let coefficients_wanted = want_functions && (opts.want_coefficients || none_chosen);

    let discrete_psi = match (&vectors, want_functions && opts.want_discrete) {
        (Some(vs), true) => Some(
            vs.iter()
                .map(|c| {
                    c.iter()
                        .zip(mesh.physical_points.iter().zip(&mesh.physical_lambda))
                        .map(|(ck, (x, lam))| {
                            let root = Float::with_val(bits, lam.sqrt_ref());
                            (x.clone(), Complex::with_val(bits, ck / &root))
                        })
                        .collect()
                })
                .collect(),
        ),
        _ => None,
    };
    let wavefunctions = match (&vectors, want_functions && opts.want_continuous) {
        (Some(vs), true) => Some(
            vs.iter()
                .map(|c| WaveFunction {
                    mesh: Arc::clone(&mesh),
                    coefficients: c.clone(),
                })
                .collect(),
        ),
        _ => None,
    };
    let coefficients = if coefficients_wanted { vectors } else { None };

    Ok(SpectrumResult {
        energies,
        coefficients,
        discrete_psi,
        wavefunctions,
        expectations,
        metadata: SpectrumMetadata {
            family: h.mapped_mesh.reference.family(),
            dimension: opts.dimension,
            precision: opts.precision,
            scaling: Float::with_val(bits, &opts.scaling),
            mass: Complex::with_val(bits, &opts.mass),
            shift: h.applied_shift.clone(),
            method: opts.method,
            symmetry: h.matrix.tag(),
            residual_bound: eig.residual_bound,
        },
        warnings,
    })
}

/// Lowest `nlevels` energies.
pub fn solve_eigenvalues(potential: &PotentialExpr, domain: &DomainSpec, opts: &SolveOptions) -> Result<SpectrumResult> {
    solve(potential, domain, opts, Mode::Values)
}

/// Coefficients and/or wavefunctions of the lowest `nlevels` states.
pub fn solve_eigenfunctions(
    potential: &PotentialExpr,
    domain: &DomainSpec,
    opts: &SolveOptions,
) -> Result<SpectrumResult> {
    solve(potential, domain, opts, Mode::Functions)
}

/// Energies and wavefunctions from one diagonalization.
pub fn solve_eigensystem(potential: &PotentialExpr, domain: &DomainSpec, opts: &SolveOptions) -> Result<SpectrumResult> {
    solve(potential, domain, opts, Mode::System)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential::parse_potential;
    use rug::ops::Pow;

    fn ho() -> PotentialExpr {
        parse_potential("x^2/2").unwrap()
    }

    fn f64s(v: &[BigComplex]) -> Vec<f64> {
        v.iter().map(|z| z.real().to_f64()).collect()
    }

    #[test]
    fn oscillator_single_node() {
        let opts = SolveOptions::new(1, 1, 20);
        let h = assemble(&ho(), &DomainSpec::Infinite, &opts).unwrap();
        let DenseMatrix::RealSymmetric(m) = &h.matrix else { panic!("expected real matrix") };
        assert_eq!(*m.get(0, 0), 0.5);
    }

    #[test]
    fn oscillator_two_nodes() {
        let opts = SolveOptions::new(2, 2, 30);
        let h = assemble(&ho(), &DomainSpec::Infinite, &opts).unwrap();
        let DenseMatrix::RealSymmetric(m) = &h.matrix else { panic!("expected real matrix") };
        let want = [[1.0, -0.5], [-0.5, 1.0]];
        for i in 0..2 {
            for j in 0..2 {
                assert!((m.get(i, j).to_f64() - want[i][j]).abs() < 1e-25);
            }
        }
        let r = solve_eigenvalues(&ho(), &DomainSpec::Infinite, &opts).unwrap();
        let e = f64s(&r.energies);
        assert!((e[0] - 0.5).abs() < 1e-25 && (e[1] - 1.5).abs() < 1e-25);
    }

    #[test]
    fn coulomb_shift_on_diagonal() {
        let ctx = make_context(30).unwrap();
        let mut opts = SolveOptions::new(1, 5, 30);
        opts.potential_shift = ctx.real(1);
        let v = parse_potential("-1/x").unwrap();
        let dom = DomainSpec::SemiInfiniteRight { a: ctx.zero() };
        let h = assemble(&v, &dom, &opts).unwrap();
        for (d, x) in h.diagonal.iter().zip(&h.mapped_mesh.physical_points) {
            let want = Float::with_val(ctx.bits(), 1 - Float::with_val(ctx.bits(), x.recip_ref()));
            assert_eq!(*d.real(), want);
        }
    }

    #[test]
    fn single_node_wavefunction() {
        let ctx = make_context(30).unwrap();
        let mut opts = SolveOptions::new(1, 1, 30);
        opts.want_coefficients = true;
        opts.want_continuous = true;
        let r = solve_eigenfunctions(&ho(), &DomainSpec::Infinite, &opts).unwrap();
        let c = &r.coefficients.as_ref().unwrap()[0];
        assert_eq!(c.len(), 1);
        assert_eq!(*c[0].real(), 1);
        let psi = &r.wavefunctions.as_ref().unwrap()[0];
        let x = ctx.real(0.7);
        let exact = ctx.pi().pow(Float::with_val(ctx.bits(), -0.25))
            * (-Float::with_val(ctx.bits(), x.square_ref()) / 2u32).exp();
        let got = psi.eval(&x).unwrap();
        assert!(Float::with_val(ctx.bits(), got.real() - &exact).abs() < 1e-25);
    }

    #[test]
    fn first_excited_oscillator_state() {
        let ctx = make_context(30).unwrap();
        let mut opts = SolveOptions::new(2, 20, 30);
        opts.want_continuous = true;
        opts.want_discrete = true;
        let r = solve_eigensystem(&ho(), &DomainSpec::Infinite, &opts).unwrap();
        let psi = &r.wavefunctions.as_ref().unwrap()[1];
        let norm = ctx.pi().pow(Float::with_val(ctx.bits(), -0.25)) * ctx.real(2).sqrt();
        for x in [0.5, 1.0, 2.0] {
            let x = ctx.real(x);
            let exact = Float::with_val(ctx.bits(), &norm * &x)
                * (-Float::with_val(ctx.bits(), x.square_ref()) / 2u32).exp();
            let got = psi.eval(&x).unwrap();
            // The phase rule may flip the overall sign.
            let err = Float::with_val(ctx.bits(), got.real().abs_ref()) - exact.abs();
            assert!(err.abs() < 1e-15, "x={x}");
        }
        // Discrete samples reproduce the coefficients.
        let table = &r.discrete_psi.as_ref().unwrap()[1];
        let coeffs = psi.coefficients();
        let mesh_lambda = &r.wavefunctions.as_ref().unwrap()[1].mesh.physical_lambda;
        for ((_, p), (c, lam)) in table.iter().zip(coeffs.iter().zip(mesh_lambda)) {
            let back = Complex::with_val(ctx.bits(), p * Float::with_val(ctx.bits(), lam.sqrt_ref()));
            let diff = Complex::with_val(ctx.bits(), &back - c);
            assert!(Float::with_val(ctx.bits(), diff.abs_ref()) < ctx.contract_tol(5));
        }
    }

    #[test]
    fn expectation_identities() {
        let ctx = make_context(30).unwrap();
        let mut opts = SolveOptions::new(1, 20, 30);
        opts.expectation = Some(parse_potential("1").unwrap());
        let r = solve_eigenvalues(&ho(), &DomainSpec::Infinite, &opts).unwrap();
        let one = &r.expectations.unwrap()[0];
        assert!(Float::with_val(ctx.bits(), one.real() - 1u32).abs() < ctx.contract_tol(3));
        opts.expectation = Some(parse_potential("x").unwrap());
        let r = solve_eigenvalues(&ho(), &DomainSpec::Infinite, &opts).unwrap();
        let zero = &r.expectations.unwrap()[0];
        assert!(Float::with_val(ctx.bits(), zero.real().abs_ref()) < ctx.contract_tol(5));
    }

    #[test]
    fn phase_rule() {
        let bits = 64;
        let mut v = vec![Complex::with_val(bits, (0.1, 0)), Complex::with_val(bits, (-0.9, 0))];
        fix_phase(&mut v);
        assert_eq!(v[1].real().to_f64(), 0.9);
        assert_eq!(v[0].real().to_f64(), -0.1);
        let mut v = vec![Complex::with_val(bits, (0.0, 2.0)), Complex::with_val(bits, (1.0, 0.0))];
        fix_phase(&mut v);
        assert_eq!(v[0].real().to_f64(), 2.0);
        assert!(v[0].imag().is_zero());
        assert!((v[1].imag().to_f64() + 1.0).abs() < 1e-15);
    }

    #[test]
    fn option_validation() {
        let dom = DomainSpec::Infinite;
        assert!(matches!(
            solve_eigenvalues(&ho(), &dom, &SolveOptions::new(3, 2, 20)),
            Err(Error::InvalidOption(_))
        ));
        let mut opts = SolveOptions::new(1, 2, 20);
        opts.scaling = Float::with_val(64, -1);
        assert!(matches!(solve_eigenvalues(&ho(), &dom, &opts), Err(Error::InvalidScaling(_))));
        assert!(matches!(
            solve_eigenvalues(&ho(), &dom, &SolveOptions::new(1, 2, 10)),
            Err(Error::InvalidPrecision(10))
        ));
        let mut opts = SolveOptions::new(1, 4, 20);
        opts.method = Method::Partial;
        let cubic = parse_potential("i*x^3").unwrap();
        assert!(matches!(
            solve_eigenvalues(&cubic, &dom, &opts),
            Err(Error::UnsupportedMethod { .. })
        ));
        let pole = parse_potential("1/x").unwrap();
        let odd = SolveOptions::new(1, 3, 20);
        assert!(matches!(
            solve_eigenvalues(&pole, &dom, &odd),
            Err(Error::AssemblyFailure { index: 1, .. })
        ));
    }

    #[test]
    fn partial_matches_dense_and_advises_shift() {
        let v = parse_potential("x^2/2 - 3").unwrap();
        let dense = solve_eigenvalues(&v, &DomainSpec::Infinite, &SolveOptions::new(3, 16, 30)).unwrap();
        let mut opts = SolveOptions::new(3, 16, 30);
        opts.method = Method::Partial;
        let part = solve_eigenvalues(&v, &DomainSpec::Infinite, &opts).unwrap();
        for (a, b) in dense.energies.iter().zip(&part.energies) {
            assert!((a.real().to_f64() - b.real().to_f64()).abs() < 1e-20);
        }
        assert!(part.warnings.iter().any(|w| matches!(w, Warning::ShiftAdvisory { .. })));
        assert!(dense.warnings.is_empty());
    }
}
