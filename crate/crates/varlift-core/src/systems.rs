//! Control-affine systems and the right-hand sides of their composite
//! dynamics: variational, prolonged, adjoint variational, Hamiltonian
//! extension, differential Hamiltonian, and differential Lyapunov.
//!
//! Every composite RHS has two assemblies: the coordinate formula (always
//! used) and a composition of geometry lifts. Debug builds evaluate both and
//! assert agreement; the lifted forms are also public so tests can compare
//! them directly.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::expr::{Expr, SmoothMap};
use crate::geometry::{
    whitney_combine, CompleteHamiltonianLift, CompleteLiftFn, CompleteLiftVf, CotangentVectorField,
    HamiltonianFunction, TangentVectorField, VerticalHamiltonianLift, VerticalLiftFn,
    VerticalLiftVf,
};
use crate::geometry::{BundleRate, CotangentState, TangentState, WhitneyRate, WhitneyState};

/// ẋ = f(x) + Σ_j u_j g_j(x), y_j = h_j(x).
///
/// `g` and `h` have equal length m, except that input-free systems (empty
/// `g`) may keep outputs to express the differential Lyapunov setting.
#[derive(Debug, Clone)]
pub struct ControlAffineSystem {
    n: usize,
    f: SmoothMap,
    g: Vec<SmoothMap>,
    h: Vec<SmoothMap>,
}

/// Port variables of the prolonged/extension pair at one evaluation:
/// base input u, variational input δu (`du_var`), adjoint input du
/// (`du_adj`), base output y, variational output δy (`dy_var`), adjoint
/// output dy (`dy_adj`).
#[derive(Debug, Clone, PartialEq)]
pub struct PortValues {
    pub u: DVector<f64>,
    pub du_var: DVector<f64>,
    pub du_adj: DVector<f64>,
    pub y: DVector<f64>,
    pub dy_var: DVector<f64>,
    pub dy_adj: DVector<f64>,
}

/// Rate of the prolonged system δΣ on TΧ.
#[derive(Debug, Clone, PartialEq)]
pub struct ProlongedRate {
    pub x_dot: DVector<f64>,
    pub dx_dot: DVector<f64>,
    pub y: DVector<f64>,
    pub dy_var: DVector<f64>,
}

/// Rate of the Hamiltonian extension dΣ on T*Χ.
#[derive(Debug, Clone, PartialEq)]
pub struct ExtensionRate {
    pub x_dot: DVector<f64>,
    pub p_dot: DVector<f64>,
    pub y: DVector<f64>,
    pub dy_adj: DVector<f64>,
}

fn check_len(what: &str, v: &DVector<f64>, expected: usize) -> Result<()> {
    if v.len() != expected {
        return Err(Error::Dimension {
            what: what.into(),
            expected,
            got: v.len(),
        });
    }
    Ok(())
}

fn is_zero_expr(e: &Expr) -> bool {
    match e {
        Expr::Num(v) => *v == 0.0,
        Expr::Neg(inner) => is_zero_expr(inner),
        _ => false,
    }
}

// Tolerance for the debug-mode agreement between coordinate and lift
// assemblies; they differ only by floating-point association order.
#[cfg(debug_assertions)]
fn assert_close(label: &str, a: &DVector<f64>, b: &DVector<f64>) {
    let err = (a - b).norm();
    debug_assert!(
        err <= 1e-9 * (1.0 + a.norm()),
        "{label}: coordinate and lift assemblies disagree by {err:.3e}"
    );
}

impl ControlAffineSystem {
    pub fn new(f: SmoothMap, g: Vec<SmoothMap>, h: Vec<SmoothMap>) -> Result<Self> {
        let n = f.dim_in();
        if f.dim_out() != n {
            return Err(Error::Dimension {
                what: "drift f".into(),
                expected: n,
                got: f.dim_out(),
            });
        }
        for (j, gj) in g.iter().enumerate() {
            if gj.dim_in() != n || gj.dim_out() != n {
                return Err(Error::Dimension {
                    what: format!("input field g{}", j + 1),
                    expected: n,
                    got: gj.dim_out(),
                });
            }
        }
        for (j, hj) in h.iter().enumerate() {
            if hj.dim_in() != n || hj.dim_out() != 1 {
                return Err(Error::Dimension {
                    what: format!("output h{}", j + 1),
                    expected: 1,
                    got: hj.dim_out(),
                });
            }
        }
        if !g.is_empty() && g.len() != h.len() {
            return Err(Error::Dimension {
                what: "input/output count".into(),
                expected: g.len(),
                got: h.len(),
            });
        }
        Ok(ControlAffineSystem { n, f, g, h })
    }

    /// Parse f (n strings), g (m lists of n strings), h (m strings).
    pub fn parse(f: &[&str], g: &[Vec<String>], h: &[&str]) -> Result<Self> {
        let n = f.len();
        let fm = SmoothMap::parse(f, n)?;
        let gm = g
            .iter()
            .map(|col| {
                let refs: Vec<&str> = col.iter().map(|s| s.as_str()).collect();
                SmoothMap::parse(&refs, n)
            })
            .collect::<Result<Vec<_>>>()?;
        let hm = h
            .iter()
            .map(|s| SmoothMap::parse(&[s], n))
            .collect::<Result<Vec<_>>>()?;
        ControlAffineSystem::new(fm, gm, hm)
    }

    /// Exact linear system f = Ax, g_j = column j of B, h_j = row j of C.
    pub fn linear(a: &DMatrix<f64>, b: &DMatrix<f64>, c: &DMatrix<f64>) -> Result<Self> {
        let n = a.nrows();
        if a.ncols() != n || b.nrows() != n || c.ncols() != n {
            return Err(Error::Dimension {
                what: "linear system matrices".into(),
                expected: n,
                got: a.ncols().max(b.nrows()).max(c.ncols()),
            });
        }
        let m = b.ncols();
        if c.nrows() != m {
            return Err(Error::Dimension {
                what: "output rows of C".into(),
                expected: m,
                got: c.nrows(),
            });
        }
        let lin_row = |coeffs: Vec<f64>| -> Expr {
            let mut acc: Option<Expr> = None;
            for (i, ci) in coeffs.into_iter().enumerate() {
                if ci == 0.0 {
                    continue;
                }
                let term = Expr::Bin(
                    crate::expr::BinOp::Mul,
                    Box::new(Expr::Num(ci)),
                    Box::new(Expr::Var(i)),
                );
                acc = Some(match acc {
                    None => term,
                    Some(prev) => {
                        Expr::Bin(crate::expr::BinOp::Add, Box::new(prev), Box::new(term))
                    }
                });
            }
            acc.unwrap_or(Expr::Num(0.0))
        };
        let f = SmoothMap::new(
            n,
            (0..n)
                .map(|i| lin_row(a.row(i).iter().copied().collect()))
                .collect(),
        )?;
        let g = (0..m)
            .map(|j| SmoothMap::new(n, (0..n).map(|i| Expr::Num(b[(i, j)])).collect()))
            .collect::<Result<Vec<_>>>()?;
        let h = (0..m)
            .map(|j| SmoothMap::new(n, vec![lin_row(c.row(j).iter().copied().collect())]))
            .collect::<Result<Vec<_>>>()?;
        ControlAffineSystem::new(f, g, h)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Number of input channels.
    pub fn m_in(&self) -> usize {
        self.g.len()
    }

    /// Number of output channels.
    pub fn m_out(&self) -> usize {
        self.h.len()
    }

    pub fn f(&self) -> &SmoothMap {
        &self.f
    }

    pub fn g(&self) -> &[SmoothMap] {
        &self.g
    }

    pub fn h(&self) -> &[SmoothMap] {
        &self.h
    }

    pub fn has_zero_inputs(&self) -> bool {
        self.g
            .iter()
            .all(|gj| gj.components().iter().all(is_zero_expr))
    }

    /// ẋ = f + Σ u_j g_j and y = h(x).
    pub fn base_rhs(
        &self,
        x: &DVector<f64>,
        u: &DVector<f64>,
    ) -> Result<(DVector<f64>, DVector<f64>)> {
        check_len("state", x, self.n)?;
        check_len("input u", u, self.m_in())?;
        let mut x_dot = self.f.eval(x)?;
        for (j, gj) in self.g.iter().enumerate() {
            x_dot += u[j] * gj.eval(x)?;
        }
        let y = self.outputs(x)?;
        Ok((x_dot, y))
    }

    pub fn outputs(&self, x: &DVector<f64>) -> Result<DVector<f64>> {
        let vals = self
            .h
            .iter()
            .map(|hj| Ok(hj.eval(x)?[0]))
            .collect::<Result<Vec<_>>>()?;
        Ok(DVector::from_vec(vals))
    }

    /// Combined linearization ∂f/∂x + Σ_j u_j ∂g_j/∂x at x.
    fn combined_jacobian(&self, x: &DVector<f64>, u: &DVector<f64>) -> Result<DMatrix<f64>> {
        let mut a = self.f.jacobian(x)?;
        for (j, gj) in self.g.iter().enumerate() {
            if u[j] != 0.0 {
                a += u[j] * gj.jacobian(x)?;
            }
        }
        Ok(a)
    }

    /// Variational system: dx_dot = [∂f/∂x + Σ u_j ∂g_j/∂x]·δx + Σ δu_j g_j,
    /// δy_j = ∂h_j/∂x·δx.
    pub fn variational_rhs(
        &self,
        x: &DVector<f64>,
        dx: &DVector<f64>,
        u: &DVector<f64>,
        du_var: &DVector<f64>,
    ) -> Result<(DVector<f64>, DVector<f64>)> {
        check_len("state", x, self.n)?;
        check_len("variation dx", dx, self.n)?;
        check_len("input u", u, self.m_in())?;
        check_len("variational input du_var", du_var, self.m_in())?;
        let mut dx_dot = self.combined_jacobian(x, u)? * dx;
        for (j, gj) in self.g.iter().enumerate() {
            if du_var[j] != 0.0 {
                dx_dot += du_var[j] * gj.eval(x)?;
            }
        }
        let dy_var = self.variational_outputs(x, dx)?;
        Ok((dx_dot, dy_var))
    }

    fn variational_outputs(&self, x: &DVector<f64>, dx: &DVector<f64>) -> Result<DVector<f64>> {
        let vals = self
            .h
            .iter()
            .map(|hj| Ok(hj.directional(x, dx)?[0]))
            .collect::<Result<Vec<_>>>()?;
        Ok(DVector::from_vec(vals))
    }

    /// Adjoint variational system: p_dot = −[∂f/∂x + Σ u_j ∂g_j/∂x]ᵀ·p
    /// − Σ_j du_j (∂h_j/∂x)ᵀ, dy_j = pᵀg_j.
    pub fn adjoint_variational_rhs(
        &self,
        x: &DVector<f64>,
        p: &DVector<f64>,
        u: &DVector<f64>,
        du_adj: &DVector<f64>,
    ) -> Result<(DVector<f64>, DVector<f64>)> {
        check_len("state", x, self.n)?;
        check_len("costate p", p, self.n)?;
        check_len("input u", u, self.m_in())?;
        check_len("adjoint input du_adj", du_adj, self.m_out())?;
        let mut p_dot = -(self.combined_jacobian(x, u)?.transpose() * p);
        for (j, hj) in self.h.iter().enumerate() {
            if du_adj[j] != 0.0 {
                p_dot -= du_adj[j] * hj.gradient(x)?;
            }
        }
        let dy_adj = self.adjoint_outputs(x, p)?;
        Ok((p_dot, dy_adj))
    }

    fn adjoint_outputs(&self, x: &DVector<f64>, p: &DVector<f64>) -> Result<DVector<f64>> {
        let vals = self
            .g
            .iter()
            .map(|gj| Ok(p.dot(&gj.eval(x)?)))
            .collect::<Result<Vec<_>>>()?;
        Ok(DVector::from_vec(vals))
    }

    /// Prolonged system δΣ on TΧ (coordinate assembly; debug builds also run
    /// the lift assembly and assert agreement).
    pub fn prolonged_rhs(
        &self,
        x: &DVector<f64>,
        dx: &DVector<f64>,
        u: &DVector<f64>,
        du_var: &DVector<f64>,
    ) -> Result<ProlongedRate> {
        let (x_dot, y) = self.base_rhs(x, u)?;
        let (dx_dot, dy_var) = self.variational_rhs(x, dx, u, du_var)?;
        let rate = ProlongedRate {
            x_dot,
            dx_dot,
            y,
            dy_var,
        };
        #[cfg(debug_assertions)]
        {
            let lifted = self.prolonged_rhs_lifted(x, dx, u, du_var)?;
            assert_close("prolonged x_dot", &rate.x_dot, &lifted.x_dot);
            assert_close("prolonged dx_dot", &rate.dx_dot, &lifted.dx_dot);
            assert_close("prolonged dy_var", &rate.dy_var, &lifted.dy_var);
        }
        Ok(rate)
    }

    /// Prolonged system assembled from lifts:
    /// f^c + Σ u_j g_j^c + Σ δu_j g_j^v with outputs h_j^v and h_j^c.
    pub fn prolonged_rhs_lifted(
        &self,
        x: &DVector<f64>,
        dx: &DVector<f64>,
        u: &DVector<f64>,
        du_var: &DVector<f64>,
    ) -> Result<ProlongedRate> {
        check_len("input u", u, self.m_in())?;
        check_len("variational input du_var", du_var, self.m_in())?;
        let s = TangentState::new(x.clone(), dx.clone())?;
        let field = ProlongedField {
            sys: self,
            u: u.clone(),
            du_var: du_var.clone(),
        };
        let rate = field.eval(&s)?;
        let mut y = DVector::zeros(self.m_out());
        let mut dy_var = DVector::zeros(self.m_out());
        for (j, hj) in self.h.iter().enumerate() {
            y[j] = VerticalLiftFn::new(hj.clone())?.eval(&s)?;
            dy_var[j] = CompleteLiftFn::new(hj.clone())?.eval(&s)?;
        }
        Ok(ProlongedRate {
            x_dot: rate.base,
            dx_dot: rate.fiber,
            y,
            dy_var,
        })
    }

    /// Hamiltonian extension dΣ on T*Χ (coordinate assembly; debug builds
    /// also run the lift assembly and assert agreement).
    pub fn hamiltonian_extension_rhs(
        &self,
        x: &DVector<f64>,
        p: &DVector<f64>,
        u: &DVector<f64>,
        du_adj: &DVector<f64>,
    ) -> Result<ExtensionRate> {
        let (x_dot, y) = self.base_rhs(x, u)?;
        let (p_dot, dy_adj) = self.adjoint_variational_rhs(x, p, u, du_adj)?;
        let rate = ExtensionRate {
            x_dot,
            p_dot,
            y,
            dy_adj,
        };
        #[cfg(debug_assertions)]
        {
            let lifted = self.hamiltonian_extension_rhs_lifted(x, p, u, du_adj)?;
            assert_close("extension x_dot", &rate.x_dot, &lifted.x_dot);
            assert_close("extension p_dot", &rate.p_dot, &lifted.p_dot);
            assert_close("extension dy_adj", &rate.dy_adj, &lifted.dy_adj);
        }
        Ok(rate)
    }

    /// Hamiltonian extension assembled from lifts:
    /// X_{H^f} + Σ u_j X_{H^{g_j}} + Σ du_j X_{h_j^v}, outputs h_j^v and H^{g_j}.
    pub fn hamiltonian_extension_rhs_lifted(
        &self,
        x: &DVector<f64>,
        p: &DVector<f64>,
        u: &DVector<f64>,
        du_adj: &DVector<f64>,
    ) -> Result<ExtensionRate> {
        check_len("input u", u, self.m_in())?;
        check_len("adjoint input du_adj", du_adj, self.m_out())?;
        let s = CotangentState::new(x.clone(), p.clone())?;
        let field = ExtensionField {
            sys: self,
            u: u.clone(),
            du_adj: du_adj.clone(),
        };
        let rate = field.eval(&s)?;
        let mut y = DVector::zeros(self.m_out());
        for (j, hj) in self.h.iter().enumerate() {
            y[j] = VerticalLiftFn::new(hj.clone())?.eval_cotangent(&s)?;
        }
        let mut dy_adj = DVector::zeros(self.m_in());
        for (j, gj) in self.g.iter().enumerate() {
            dy_adj[j] = HamiltonianFunction::new(gj.clone())?.eval(&s)?;
        }
        Ok(ExtensionRate {
            x_dot: rate.base,
            p_dot: rate.fiber,
            y,
            dy_adj,
        })
    }

    /// Differential Hamiltonian system on TΧ ⊕ T*Χ: the prolonged system and
    /// Hamiltonian extension interconnected by δu = −dy, du = +δy.
    pub fn diff_hamiltonian_rhs(
        &self,
        z: &WhitneyState,
        u: &DVector<f64>,
    ) -> Result<(WhitneyRate, PortValues)> {
        check_len("state", &z.x, self.n)?;
        check_len("input u", u, self.m_in())?;
        let dy_adj = self.adjoint_outputs(&z.x, &z.p)?;
        let dy_var = self.variational_outputs(&z.x, &z.dx)?;
        let du_var = -&dy_adj;
        let du_adj = dy_var.clone();
        let (x_dot, y) = self.base_rhs(&z.x, u)?;
        let (dx_dot, _) = self.variational_rhs(&z.x, &z.dx, u, &du_var)?;
        let (p_dot, _) = self.adjoint_variational_rhs(&z.x, &z.p, u, &du_adj)?;
        let rate = WhitneyRate {
            x_dot,
            dx_dot,
            p_dot,
        };
        #[cfg(debug_assertions)]
        {
            let lifted = self.diff_hamiltonian_rhs_lifted(z, u)?;
            assert_close("diffham x_dot", &rate.x_dot, &lifted.x_dot);
            assert_close("diffham dx_dot", &rate.dx_dot, &lifted.dx_dot);
            assert_close("diffham p_dot", &rate.p_dot, &lifted.p_dot);
        }
        let ports = PortValues {
            u: u.clone(),
            du_var,
            du_adj,
            y,
            dy_var,
            dy_adj,
        };
        Ok((rate, ports))
    }

    /// Differential Hamiltonian field assembled from lifts and combined on
    /// the Whitney sum:
    /// f^c ⊕ X_{H^f} + Σ_j u_j (g_j^c ⊕ X_{H^{g_j}})
    /// − Σ_j H^{g_j}·g_j^v ⊕ Σ_j h_j^c·X_{h_j^v},
    /// where the interconnection weights δu_j = −H^{g_j}(x, p) scale the
    /// vertical input lifts and du_j = h_j^c(x, δx) the vertical output
    /// lifts.
    pub fn diff_hamiltonian_rhs_lifted(
        &self,
        z: &WhitneyState,
        u: &DVector<f64>,
    ) -> Result<WhitneyRate> {
        check_len("state", &z.x, self.n)?;
        check_len("input u", u, self.m_in())?;
        // Interconnection weights read off the current Whitney point.
        let mut du_var = DVector::zeros(self.m_in());
        for (j, gj) in self.g.iter().enumerate() {
            let hf = HamiltonianFunction::new(gj.clone())?;
            du_var[j] = -hf.eval(&z.cotangent())?;
        }
        let mut du_adj = DVector::zeros(self.m_out());
        for (j, hj) in self.h.iter().enumerate() {
            let hc = CompleteLiftFn::new(hj.clone())?;
            du_adj[j] = hc.eval(&z.tangent())?;
        }
        let sum = whitney_combine(
            ProlongedField {
                sys: self,
                u: u.clone(),
                du_var,
            },
            ExtensionField {
                sys: self,
                u: u.clone(),
                du_adj,
            },
        );
        sum.eval(z)
    }

    /// Differential Lyapunov system, the input-free specialization: requires
    /// g absent or identically zero; dynamics
    /// (f, ∂f/∂x·δx, −(∂f/∂x)ᵀp − Σ_j δy_j ∇h_j).
    pub fn diff_lyapunov_rhs(&self, z: &WhitneyState) -> Result<(WhitneyRate, PortValues)> {
        if !self.has_zero_inputs() {
            return Err(Error::NonzeroInput {
                detail: "differential Lyapunov dynamics need g = 0".into(),
            });
        }
        let u = DVector::zeros(self.m_in());
        self.diff_hamiltonian_rhs(z, &u)
    }

    /// Exact (A, B, C) of a linear system, verified by probing: f and h must
    /// have zero Hessians and vanish at 0, g must have zero Jacobians.
    pub fn linearize_exact(
        &self,
        probes: &[DVector<f64>],
    ) -> Result<(DMatrix<f64>, DMatrix<f64>, DMatrix<f64>)> {
        let n = self.n;
        let zero = DVector::zeros(n);
        let tol = 1e-12;
        for probe in probes {
            for i in 0..n {
                let fi = self.f.component(i)?;
                if fi.hessian(probe)?.norm() > tol {
                    return Err(Error::Invalid(format!(
                        "nonlinear drift component {} (nonzero Hessian at probe)",
                        i + 1
                    )));
                }
            }
            for (j, gj) in self.g.iter().enumerate() {
                if gj.jacobian(probe)?.norm() > tol {
                    return Err(Error::Invalid(format!(
                        "state-dependent input field g{} (nonzero Jacobian at probe)",
                        j + 1
                    )));
                }
            }
            for (j, hj) in self.h.iter().enumerate() {
                if hj.hessian(probe)?.norm() > tol {
                    return Err(Error::Invalid(format!(
                        "nonlinear output h{} (nonzero Hessian at probe)",
                        j + 1
                    )));
                }
            }
        }
        if self.f.eval(&zero)?.norm() > tol {
            return Err(Error::Invalid(
                "drift has a constant term (f(0) != 0)".into(),
            ));
        }
        for (j, hj) in self.h.iter().enumerate() {
            if hj.eval(&zero)?[0].abs() > tol {
                return Err(Error::Invalid(format!(
                    "output h{} has a constant term",
                    j + 1
                )));
            }
        }
        let a = self.f.jacobian(&zero)?;
        let m = self.m_in();
        let mut b = DMatrix::zeros(n, m);
        for (j, gj) in self.g.iter().enumerate() {
            b.set_column(j, &gj.eval(&zero)?);
        }
        let mut c = DMatrix::zeros(self.m_out(), n);
        for (j, hj) in self.h.iter().enumerate() {
            c.set_row(j, &hj.gradient(&zero)?.transpose());
        }
        Ok((a, b, c))
    }
}

/// Tangent-bundle field of the prolonged system with frozen port inputs.
struct ProlongedField<'a> {
    sys: &'a ControlAffineSystem,
    u: DVector<f64>,
    du_var: DVector<f64>,
}

impl TangentVectorField for ProlongedField<'_> {
    fn eval(&self, s: &TangentState) -> Result<BundleRate> {
        let mut rate = CompleteLiftVf::new(self.sys.f.clone())?.eval(s)?;
        for (j, gj) in self.sys.g.iter().enumerate() {
            let gc = CompleteLiftVf::new(gj.clone())?.eval(s)?;
            rate.base += self.u[j] * gc.base;
            rate.fiber += self.u[j] * gc.fiber;
        }
        for (j, gj) in self.sys.g.iter().enumerate() {
            let gv = VerticalLiftVf::new(gj.clone())?.eval(s)?;
            rate.base += self.du_var[j] * gv.base;
            rate.fiber += self.du_var[j] * gv.fiber;
        }
        Ok(rate)
    }
}

/// Cotangent-bundle field of the Hamiltonian extension with frozen port inputs.
struct ExtensionField<'a> {
    sys: &'a ControlAffineSystem,
    u: DVector<f64>,
    du_adj: DVector<f64>,
}

impl CotangentVectorField for ExtensionField<'_> {
    fn eval(&self, s: &CotangentState) -> Result<BundleRate> {
        let mut rate = CompleteHamiltonianLift::new(self.sys.f.clone())?.eval(s)?;
        for (j, gj) in self.sys.g.iter().enumerate() {
            let gh = CompleteHamiltonianLift::new(gj.clone())?.eval(s)?;
            rate.base += self.u[j] * gh.base;
            rate.fiber += self.u[j] * gh.fiber;
        }
        for (j, hj) in self.sys.h.iter().enumerate() {
            let hv = VerticalHamiltonianLift::new(hj.clone())?.eval(s)?;
            rate.base += self.du_adj[j] * hv.base;
            rate.fiber += self.du_adj[j] * hv.fiber;
        }
        Ok(rate)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use nalgebra::dvector;

    fn double_integrator() -> ControlAffineSystem {
        ControlAffineSystem::parse(&["x2", "0"], &[vec!["0".into(), "1".into()]], &["x1"]).unwrap()
    }

    fn scalar_sys() -> ControlAffineSystem {
        ControlAffineSystem::parse(&["-x1"], &[vec!["1".into()]], &["x1"]).unwrap()
    }

    #[test]
    fn variational_example() {
        let sys = double_integrator();
        let (dx_dot, dy) = sys
            .variational_rhs(
                &dvector![1.0, 2.0],
                &dvector![0.5, -1.0],
                &dvector![0.0],
                &dvector![1.0],
            )
            .unwrap();
        assert_eq!(dx_dot, dvector![-1.0, 1.0]);
        assert_eq!(dy, dvector![0.5]);
    }

    #[test]
    fn variational_zero_inputs_zero() {
        let sys = double_integrator();
        let (dx_dot, dy) = sys
            .variational_rhs(
                &dvector![0.3, -0.7],
                &dvector![0.0, 0.0],
                &dvector![0.2],
                &dvector![0.0],
            )
            .unwrap();
        assert_eq!(dx_dot, dvector![0.0, 0.0]);
        assert_eq!(dy, dvector![0.0]);
    }

    #[test]
    fn prolonged_example() {
        let sys = double_integrator();
        let r = sys
            .prolonged_rhs(
                &dvector![1.0, 2.0],
                &dvector![0.5, -1.0],
                &dvector![0.0],
                &dvector![1.0],
            )
            .unwrap();
        assert_eq!(r.x_dot, dvector![2.0, 0.0]);
        assert_eq!(r.dx_dot, dvector![-1.0, 1.0]);
        assert_eq!(r.y, dvector![1.0]);
        assert_eq!(r.dy_var, dvector![0.5]);
    }

    #[test]
    fn adjoint_example() {
        let sys = double_integrator();
        let (p_dot, dy) = sys
            .adjoint_variational_rhs(
                &dvector![1.0, 2.0],
                &dvector![1.0, 1.0],
                &dvector![0.0],
                &dvector![2.0],
            )
            .unwrap();
        assert_eq!(p_dot, dvector![-2.0, -1.0]);
        assert_eq!(dy, dvector![1.0]);
    }

    #[test]
    fn extension_scalar_example() {
        let sys = scalar_sys();
        let r = sys
            .hamiltonian_extension_rhs(
                &dvector![2.0],
                &dvector![3.0],
                &dvector![0.0],
                &dvector![1.0],
            )
            .unwrap();
        assert_eq!(r.x_dot, dvector![-2.0]);
        assert_eq!(r.p_dot, dvector![2.0]);
        assert_eq!(r.y, dvector![2.0]);
        assert_eq!(r.dy_adj, dvector![3.0]);
    }

    #[test]
    fn diffham_double_integrator_example() {
        let sys = double_integrator();
        let z =
            WhitneyState::new(dvector![1.0, 2.0], dvector![0.5, -1.0], dvector![1.0, 1.0]).unwrap();
        let (rate, ports) = sys.diff_hamiltonian_rhs(&z, &dvector![0.0]).unwrap();
        assert_eq!(rate.x_dot, dvector![2.0, 0.0]);
        assert_eq!(rate.dx_dot, dvector![-1.0, -1.0]);
        assert_eq!(rate.p_dot, dvector![-0.5, -1.0]);
        assert_eq!(ports.y, dvector![1.0]);
        assert_eq!(ports.du_var, dvector![-1.0]);
        assert_eq!(ports.du_adj, dvector![0.5]);
    }

    #[test]
    fn diffham_zero_section_is_equilibrium() {
        let sys = double_integrator();
        let z =
            WhitneyState::new(dvector![0.8, -0.6], dvector![0.0, 0.0], dvector![0.0, 0.0]).unwrap();
        let (rate, _) = sys.diff_hamiltonian_rhs(&z, &dvector![0.7]).unwrap();
        assert_eq!(rate.dx_dot, dvector![0.0, 0.0]);
        assert_eq!(rate.p_dot, dvector![0.0, 0.0]);
    }

    #[test]
    fn difflyap_cubic_example() {
        let sys = ControlAffineSystem::parse(&["-x1^3"], &[], &["x1"]).unwrap();
        let z = WhitneyState::new(dvector![1.0], dvector![1.0], dvector![0.0]).unwrap();
        let (rate, _) = sys.diff_lyapunov_rhs(&z).unwrap();
        assert_eq!(rate.x_dot, dvector![-1.0]);
        assert_eq!(rate.dx_dot, dvector![-3.0]);
        assert_eq!(rate.p_dot, dvector![-1.0]);
    }

    #[test]
    fn difflyap_rejects_nonzero_g() {
        let sys = scalar_sys();
        let z = WhitneyState::new(dvector![1.0], dvector![1.0], dvector![0.0]).unwrap();
        assert!(matches!(
            sys.diff_lyapunov_rhs(&z),
            Err(Error::NonzeroInput { .. })
        ));
    }

    #[test]
    fn difflyap_matches_diffham_with_zero_g() {
        let sys = ControlAffineSystem::parse(
            &["-x1^3 + x2", "-x2"],
            &[vec!["0".into(), "0".into()]],
            &["x1 + x2"],
        )
        .unwrap();
        let z = WhitneyState::new(dvector![0.7, -0.4], dvector![0.2, 0.9], dvector![-1.1, 0.3])
            .unwrap();
        let (a, _) = sys.diff_lyapunov_rhs(&z).unwrap();
        let (b, _) = sys.diff_hamiltonian_rhs(&z, &dvector![0.0]).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn pairing_balance_at_rhs_level() {
        let sys = ControlAffineSystem::parse(
            &["x2", "-x1 - x2^3"],
            &[vec!["0".into(), "1".into()]],
            &["x1 + tanh(x2)"],
        )
        .unwrap();
        let x = dvector![0.4, -0.8];
        let dx = dvector![1.1, 0.6];
        let p = dvector![-0.5, 0.9];
        let u = dvector![0.3];
        let du_var = dvector![0.7];
        let du_adj = dvector![-0.2];
        let (dx_dot, dy_var) = sys.variational_rhs(&x, &dx, &u, &du_var).unwrap();
        let (p_dot, dy_adj) = sys.adjoint_variational_rhs(&x, &p, &u, &du_adj).unwrap();
        let lhs = p.dot(&dx_dot) + p_dot.dot(&dx);
        let rhs = -du_adj.dot(&dy_var) + du_var.dot(&dy_adj);
        assert_relative_eq!(lhs, rhs, epsilon = 1e-13);
    }

    #[test]
    fn closed_loop_pairing_dissipates() {
        let sys = double_integrator();
        let z = WhitneyState::new(dvector![0.9, -1.2], dvector![0.7, 0.2], dvector![-0.4, 1.5])
            .unwrap();
        let (rate, ports) = sys.diff_hamiltonian_rhs(&z, &dvector![0.5]).unwrap();
        let lhs = z.p.dot(&rate.dx_dot) + rate.p_dot.dot(&z.dx);
        let rhs = -ports.dy_var.norm_squared() - ports.dy_adj.norm_squared();
        assert_relative_eq!(lhs, rhs, epsilon = 1e-13);
        assert!(lhs <= 0.0);
    }

    #[test]
    fn lifted_assemblies_match_coordinates() {
        let sys = ControlAffineSystem::parse(
            &["x2", "-sin(x1)"],
            &[vec!["0".into(), "cos(x1)".into()]],
            &["x1^2"],
        )
        .unwrap();
        let x = dvector![0.6, -0.3];
        let dx = dvector![0.4, 1.0];
        let p = dvector![0.8, -0.2];
        let u = dvector![0.25];
        let du = dvector![-0.6];
        let a = sys.prolonged_rhs(&x, &dx, &u, &du).unwrap();
        let b = sys.prolonged_rhs_lifted(&x, &dx, &u, &du).unwrap();
        assert_relative_eq!((a.dx_dot - b.dx_dot).norm(), 0.0, epsilon = 1e-12);
        let a = sys.hamiltonian_extension_rhs(&x, &p, &u, &du).unwrap();
        let b = sys
            .hamiltonian_extension_rhs_lifted(&x, &p, &u, &du)
            .unwrap();
        assert_relative_eq!((a.p_dot - b.p_dot).norm(), 0.0, epsilon = 1e-12);
        let z = WhitneyState::new(x, dx, p).unwrap();
        let (a, _) = sys.diff_hamiltonian_rhs(&z, &u).unwrap();
        let b = sys.diff_hamiltonian_rhs_lifted(&z, &u).unwrap();
        assert_relative_eq!((a.dx_dot - b.dx_dot).norm(), 0.0, epsilon = 1e-12);
        assert_relative_eq!((a.p_dot - b.p_dot).norm(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn linear_construction_matches_parse() {
        let a = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 0.0, 0.0]);
        let b = DMatrix::from_row_slice(2, 1, &[0.0, 1.0]);
        let c = DMatrix::from_row_slice(1, 2, &[1.0, 0.0]);
        let lin = ControlAffineSystem::linear(&a, &b, &c).unwrap();
        let x = dvector![1.3, -2.4];
        let u = dvector![0.8];
        let (xd1, y1) = lin.base_rhs(&x, &u).unwrap();
        let (xd2, y2) = double_integrator().base_rhs(&x, &u).unwrap();
        assert_eq!(xd1, xd2);
        assert_eq!(y1, y2);
    }

    #[test]
    fn linearize_exact_roundtrip() {
        let a = DMatrix::from_row_slice(2, 2, &[0.3, -1.2, 0.0, 0.7]);
        let b = DMatrix::from_row_slice(2, 1, &[0.5, 1.0]);
        let c = DMatrix::from_row_slice(1, 2, &[1.0, -0.4]);
        let lin = ControlAffineSystem::linear(&a, &b, &c).unwrap();
        let probes = vec![dvector![0.0, 0.0], dvector![1.0, 1.0], dvector![-0.7, 0.4]];
        let (a2, b2, c2) = lin.linearize_exact(&probes).unwrap();
        assert_relative_eq!((a - a2).norm(), 0.0, epsilon = 1e-13);
        assert_relative_eq!((b - b2).norm(), 0.0, epsilon = 1e-13);
        assert_relative_eq!((c - c2).norm(), 0.0, epsilon = 1e-13);
    }

    #[test]
    fn linearize_exact_rejects_nonlinearity() {
        let sys = ControlAffineSystem::parse(&["-x1^3"], &[vec!["1".into()]], &["x1"]).unwrap();
        let probes = vec![dvector![1.0]];
        assert!(sys.linearize_exact(&probes).is_err());
    }
}
