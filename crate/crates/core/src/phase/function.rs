use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

type Evaluator = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

/// Σ c·z_i·z_j + Σ b_i·z_i over the full variable vector.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct QuadraticForm {
    pub pairs: Vec<(usize, usize, f64)>,
    pub linear: Vec<(usize, f64)>,
}

impl QuadraticForm {
    fn value(&self, z: &[f64]) -> f64 {
        let q: f64 = self.pairs.iter().map(|&(i, j, c)| c * z[i] * z[j]).sum();
        q + self.linear.iter().map(|&(i, b)| b * z[i]).sum::<f64>()
    }

    fn add_gradient(&self, z: &[f64], g: &mut [f64]) {
        for &(i, j, c) in &self.pairs {
            g[i] += c * z[j];
            g[j] += c * z[i];
        }
        for &(i, b) in &self.linear {
            g[i] += b;
        }
    }

    fn add_hessian(&self, h: &mut DMatrix<f64>) {
        for &(i, j, c) in &self.pairs {
            h[(i, j)] += c;
            h[(j, i)] += c;
        }
    }

    fn reindexed(&self, map: &[usize]) -> QuadraticForm {
        QuadraticForm {
            pairs: self.pairs.iter().map(|&(i, j, c)| (map[i], map[j], c)).collect(),
            linear: self.linear.iter().map(|&(i, b)| (map[i], b)).collect(),
        }
    }

    /// True when no monomial is quadratic in z_axis alone, so the form is
    /// affine along that axis.
    pub fn is_affine_in(&self, axis: usize) -> bool {
        !self.pairs.iter().any(|&(i, j, c)| i == axis && j == axis && c != 0.0)
    }
}

#[derive(Clone)]
enum Kind {
    Quadratic(QuadraticForm),
    /// t·x² on (x, t)
    Fold,
    /// Σ_m f_m(z[index_m])
    Sum(Vec<(PhaseFunction, Vec<usize>)>),
    Custom(Evaluator),
}

/// Real phase f(x, t, u) on base ℝⁿ with fiber variables t ∈ ℝ^K, u ∈ ℝ^l.
/// Variables are packed as z = (x, t, u).
#[derive(Clone)]
pub struct PhaseFunction {
    name: String,
    base_dim: usize,
    t_dim: usize,
    u_dim: usize,
    /// For a phase g(y; x, s) generating a relation, the number of leading
    /// fiber variables that are the source point x.
    source_dim: Option<usize>,
    kind: Kind,
}

impl fmt::Debug for PhaseFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PhaseFunction")
            .field("name", &self.name)
            .field("base_dim", &self.base_dim)
            .field("t_dim", &self.t_dim)
            .field("u_dim", &self.u_dim)
            .finish()
    }
}

impl PhaseFunction {
    /// ½ zᵀQz + b·z with Q symmetric of size n+K+l.
    pub fn quadratic(
        name: impl Into<String>,
        base_dim: usize,
        t_dim: usize,
        u_dim: usize,
        matrix: &[Vec<f64>],
        linear: &[f64],
    ) -> Result<Self> {
        let d = base_dim + t_dim + u_dim;
        if matrix.len() != d || matrix.iter().any(|r| r.len() != d) {
            return Err(Error::param(format!("quadratic phase matrix must be {d}x{d}")));
        }
        if !linear.is_empty() && linear.len() != d {
            return Err(Error::param(format!("quadratic phase linear part must have {d} entries")));
        }
        let mut form = QuadraticForm::default();
        for i in 0..d {
            for j in i..d {
                if (matrix[i][j] - matrix[j][i]).abs() > 1e-12 * (1.0 + matrix[i][j].abs()) {
                    return Err(Error::param("quadratic phase matrix must be symmetric"));
                }
                let c = if i == j { 0.5 * matrix[i][i] } else { matrix[i][j] };
                if c != 0.0 {
                    form.pairs.push((i, j, c));
                }
            }
        }
        for (i, b) in linear.iter().enumerate() {
            if *b != 0.0 {
                form.linear.push((i, *b));
            }
        }
        Ok(PhaseFunction {
            name: name.into(),
            base_dim,
            t_dim,
            u_dim,
            source_dim: None,
            kind: Kind::Quadratic(form),
        })
    }

    /// Phase given by an arbitrary closure; derivatives by central differences.
    pub fn custom<F>(name: impl Into<String>, base_dim: usize, t_dim: usize, u_dim: usize, f: F) -> Self
    where
        F: Fn(&[f64]) -> f64 + Send + Sync + 'static,
    {
        PhaseFunction {
            name: name.into(),
            base_dim,
            t_dim,
            u_dim,
            source_dim: None,
            kind: Kind::Custom(Arc::new(f)),
        }
    }

    /// t·x² on base ℝ with one fiber variable: degenerate at x = 0.
    pub fn fold() -> Self {
        PhaseFunction {
            name: "fold".into(),
            base_dim: 1,
            t_dim: 1,
            u_dim: 0,
            source_dim: None,
            kind: Kind::Fold,
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn base_dim(&self) -> usize {
        self.base_dim
    }

    pub fn t_dim(&self) -> usize {
        self.t_dim
    }

    pub fn u_dim(&self) -> usize {
        self.u_dim
    }

    /// N = K + l.
    pub fn fiber_dim(&self) -> usize {
        self.t_dim + self.u_dim
    }

    pub fn total_dim(&self) -> usize {
        self.base_dim + self.fiber_dim()
    }

    pub fn source_dim(&self) -> Option<usize> {
        self.source_dim
    }

    /// Quadratic form of the phase, if it has one.
    pub fn quadratic_form(&self) -> Option<QuadraticForm> {
        match &self.kind {
            Kind::Quadratic(q) => Some(q.clone()),
            Kind::Sum(parts) => {
                let mut out = QuadraticForm::default();
                for (p, idx) in parts {
                    let q = p.quadratic_form()?.reindexed(idx);
                    out.pairs.extend(q.pairs);
                    out.linear.extend(q.linear);
                }
                Some(out)
            }
            _ => None,
        }
    }

    pub fn has_analytic_derivatives(&self) -> bool {
        match &self.kind {
            Kind::Custom(_) => false,
            Kind::Sum(parts) => parts.iter().all(|(p, _)| p.has_analytic_derivatives()),
            _ => true,
        }
    }

    fn check_len(&self, z: &[f64]) {
        debug_assert_eq!(z.len(), self.total_dim(), "phase {} evaluated at wrong dimension", self.name);
    }

    pub fn value(&self, z: &[f64]) -> f64 {
        self.check_len(z);
        match &self.kind {
            Kind::Quadratic(q) => q.value(z),
            Kind::Fold => z[1] * z[0] * z[0],
            Kind::Sum(parts) => parts
                .iter()
                .map(|(p, idx)| {
                    let sub: Vec<f64> = idx.iter().map(|&i| z[i]).collect();
                    p.value(&sub)
                })
                .sum(),
            Kind::Custom(f) => f(z),
        }
    }

    pub fn gradient(&self, z: &[f64]) -> Vec<f64> {
        self.check_len(z);
        match &self.kind {
            Kind::Quadratic(q) => {
                let mut g = vec![0.0; z.len()];
                q.add_gradient(z, &mut g);
                g
            }
            Kind::Fold => vec![2.0 * z[1] * z[0], z[0] * z[0]],
            Kind::Sum(parts) => {
                let mut g = vec![0.0; z.len()];
                for (p, idx) in parts {
                    let sub: Vec<f64> = idx.iter().map(|&i| z[i]).collect();
                    for (gi, &i) in p.gradient(&sub).iter().zip(idx) {
                        g[i] += gi;
                    }
                }
                g
            }
            Kind::Custom(_) => self.fd_gradient(z),
        }
    }

    pub fn hessian(&self, z: &[f64]) -> DMatrix<f64> {
        self.check_len(z);
        let d = z.len();
        match &self.kind {
            Kind::Quadratic(q) => {
                let mut h = DMatrix::zeros(d, d);
                q.add_hessian(&mut h);
                h
            }
            Kind::Fold => DMatrix::from_row_slice(2, 2, &[2.0 * z[1], 2.0 * z[0], 2.0 * z[0], 0.0]),
            Kind::Sum(parts) => {
                let mut h = DMatrix::zeros(d, d);
                for (p, idx) in parts {
                    let sub: Vec<f64> = idx.iter().map(|&i| z[i]).collect();
                    let hs = p.hessian(&sub);
                    for (a, &i) in idx.iter().enumerate() {
                        for (b, &j) in idx.iter().enumerate() {
                            h[(i, j)] += hs[(a, b)];
                        }
                    }
                }
                h
            }
            Kind::Custom(_) => self.fd_hessian(z),
        }
    }

    /// Central-difference gradient with step ε^{1/3}(1+|z_i|).
    pub fn fd_gradient(&self, z: &[f64]) -> Vec<f64> {
        let base = f64::EPSILON.cbrt();
        let mut p = z.to_vec();
        (0..z.len())
            .map(|i| {
                let h = base * (1.0 + z[i].abs());
                p[i] = z[i] + h;
                let fp = self.value(&p);
                p[i] = z[i] - h;
                let fm = self.value(&p);
                p[i] = z[i];
                (fp - fm) / (2.0 * h)
            })
            .collect()
    }

    fn fd_hessian(&self, z: &[f64]) -> DMatrix<f64> {
        let d = z.len();
        let base = f64::EPSILON.powf(0.25);
        let mut h = DMatrix::zeros(d, d);
        let mut p = z.to_vec();
        for i in 0..d {
            let hi = base * (1.0 + z[i].abs());
            p[i] = z[i] + hi;
            let gp = self.fd_gradient(&p);
            p[i] = z[i] - hi;
            let gm = self.fd_gradient(&p);
            p[i] = z[i];
            for j in 0..d {
                h[(i, j)] = (gp[j] - gm[j]) / (2.0 * hi);
            }
        }
        h.clone() * 0.5 + h.transpose() * 0.5
    }
}

/// f(x′, x″, t, u) = t·(x″ − u) with K = l fiber t-variables.
pub fn model_phase(k: usize, l: usize) -> Result<PhaseFunction> {
    if l == 0 {
        return Err(Error::param("model phase needs at least one fast direction (l ≥ 1)"));
    }
    let n = k + l;
    let mut form = QuadraticForm::default();
    for i in 0..l {
        let x2 = k + i;
        let t = n + i;
        let u = n + l + i;
        form.pairs.push((t, x2, 1.0));
        form.pairs.push((t, u, -1.0));
    }
    Ok(PhaseFunction {
        name: format!("model({k},{l})"),
        base_dim: n,
        t_dim: l,
        u_dim: l,
        source_dim: None,
        kind: Kind::Quadratic(form),
    })
}

/// g(y; x, s) = s·(y − x): generates the identity relation on ℝⁿ.
pub fn identity_relation(n: usize) -> Result<PhaseFunction> {
    if n == 0 {
        return Err(Error::param("relation dimension must be positive"));
    }
    let mut form = QuadraticForm::default();
    for i in 0..n {
        let y = i;
        let x = n + i;
        let s = 2 * n + i;
        form.pairs.push((s, y, 1.0));
        form.pairs.push((s, x, -1.0));
    }
    Ok(PhaseFunction {
        name: format!("identity-relation({n})"),
        base_dim: n,
        t_dim: 2 * n,
        u_dim: 0,
        source_dim: Some(n),
        kind: Kind::Quadratic(form),
    })
}

/// g(y; x) = −x·y: the kernel of the ħ-Fourier transform, generating
/// (x, ξ) ↦ (ξ, −x).
pub fn fourier_relation(n: usize) -> Result<PhaseFunction> {
    if n == 0 {
        return Err(Error::param("relation dimension must be positive"));
    }
    let mut form = QuadraticForm::default();
    for i in 0..n {
        form.pairs.push((i, n + i, -1.0));
    }
    Ok(PhaseFunction {
        name: format!("fourier-relation({n})"),
        base_dim: n,
        t_dim: n,
        u_dim: 0,
        source_dim: Some(n),
        kind: Kind::Quadratic(form),
    })
}

/// F(y; x, s, t, u) = f(x, t, u) + g(y, x, s) with fiber (x, s, t) of t-type
/// and u of u-type, so N_F = n + N_g + N_f.
pub fn compose_phase(f: &PhaseFunction, g: &PhaseFunction) -> Result<PhaseFunction> {
    let nx = g.source_dim.ok_or_else(|| {
        Error::param(format!("phase {} does not generate a relation (no source variables)", g.name))
    })?;
    if g.u_dim != 0 {
        return Err(Error::param("relation phases carry no u-variables"));
    }
    if f.base_dim != nx {
        return Err(Error::param(format!(
            "dimension mismatch: {} lives on ℝ^{} but {} maps from ℝ^{}",
            f.name, f.base_dim, g.name, nx
        )));
    }
    let m = g.base_dim;
    let ns = g.t_dim - nx;
    let (kf, lf) = (f.t_dim, f.u_dim);
    // layout of F: y | x | s | t | u
    let y0 = 0;
    let x0 = m;
    let s0 = m + nx;
    let t0 = s0 + ns;
    let u0 = t0 + kf;
    let f_index: Vec<usize> = (x0..x0 + nx).chain(t0..t0 + kf).chain(u0..u0 + lf).collect();
    let g_index: Vec<usize> = (y0..y0 + m).chain(x0..x0 + nx).chain(s0..s0 + ns).collect();
    let name = format!("{}∘{}", g.name, f.name);
    let kind = match (f.quadratic_form(), g.quadratic_form()) {
        (Some(qf), Some(qg)) => {
            let mut q = qf.reindexed(&f_index);
            let qg = qg.reindexed(&g_index);
            q.pairs.extend(qg.pairs);
            q.linear.extend(qg.linear);
            Kind::Quadratic(q)
        }
        _ => Kind::Sum(vec![(f.clone(), f_index), (g.clone(), g_index)]),
    };
    Ok(PhaseFunction {
        name,
        base_dim: m,
        t_dim: nx + ns + kf,
        u_dim: lf,
        source_dim: None,
        kind,
    })
}

/// Named catalog entry, as used in experiment configs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "kebab-case", deny_unknown_fields)]
pub enum PhaseSpec {
    Model {
        k: usize,
        l: usize,
    },
    Fold,
    IdentityRelation {
        n: usize,
    },
    FourierRelation {
        n: usize,
    },
    Quadratic {
        base_dim: usize,
        t_dim: usize,
        #[serde(default)]
        u_dim: usize,
        matrix: Vec<Vec<f64>>,
        #[serde(default)]
        linear: Vec<f64>,
    },
    Composed {
        inner: Box<PhaseSpec>,
        relation: Box<PhaseSpec>,
    },
}

impl PhaseSpec {
    pub fn build(&self) -> Result<PhaseFunction> {
        match self {
            PhaseSpec::Model { k, l } => model_phase(*k, *l),
            PhaseSpec::Fold => Ok(PhaseFunction::fold()),
            PhaseSpec::IdentityRelation { n } => identity_relation(*n),
            PhaseSpec::FourierRelation { n } => fourier_relation(*n),
            PhaseSpec::Quadratic {
                base_dim,
                t_dim,
                u_dim,
                matrix,
                linear,
            } => PhaseFunction::quadratic("quadratic", *base_dim, *t_dim, *u_dim, matrix, linear),
            PhaseSpec::Composed { inner, relation } => compose_phase(&inner.build()?, &relation.build()?),
        }
    }
}
