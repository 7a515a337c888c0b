//! Polyhedral approximation of a rectifiable current with a checked
//! certificate: flat distance, mass excess and H-mass excess all at most eps.

use serde::Serialize;

use super::{select_balls, tangent_disc, RectifiableCurrent};
use crate::chain::PolyhedralChain;
use crate::error::{Error, Result};
use crate::flat::patch::current_flat_distance_upper;
use crate::functionals::phi_h;
use crate::hfunc::HSpec;
use crate::quadrature::QuadPlan;

/// Level of the chart polyline used when certifying the flat distance.
pub const CERTIFY_LEVEL: u32 = 3;
const RETRIES: u32 = 3;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ApproxCertificate {
    pub eps: f64,
    /// Radius cap used for the balls (equals `eps` on the exact path).
    pub inner_eps: f64,
    pub method: String,
    pub flat_upper: f64,
    /// `M(P) - M(R)`, with `M(R)` lowered by its quadrature error.
    pub mass_excess: f64,
    /// `Phi_H(P) - M_H(R)`, same convention.
    pub h_mass_excess: f64,
    pub balls: usize,
    pub coverage: f64,
    pub retries: u32,
}

impl ApproxCertificate {
    pub fn holds(&self) -> bool {
        self.flat_upper <= self.eps && self.mass_excess <= self.eps && self.h_mass_excess <= self.eps
    }
}

/// Polyhedral `P` with `F(R - P) <= eps`, `M(P) <= M(R) + eps` and
/// `Phi_H(P) <= M_H(R) + eps`, each recomputed independently of the
/// construction.
pub fn poly_approximate(r: &RectifiableCurrent, eps: f64, h: &HSpec) -> Result<(PolyhedralChain, ApproxCertificate)> {
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::InvalidInput(format!("eps must be positive, got {eps}")));
    }
    let plan = QuadPlan::default();
    let mass = r.mass(&plan)?;
    let h_mass = r.h_mass(h, &plan)?;
    let mass_lower = mass.value - mass.error;
    let h_lower = h_mass.value - h_mass.error;

    let certify = |p: &PolyhedralChain, method: &str, inner: f64, balls: usize, coverage: f64, retries: u32| -> Result<ApproxCertificate> {
        let flat = current_flat_distance_upper(r, p, CERTIFY_LEVEL)?.value;
        let pm = p.mass().unwrap_or_else(|_| p.total_variation_bound());
        Ok(ApproxCertificate {
            eps,
            inner_eps: inner,
            method: method.into(),
            flat_upper: flat,
            mass_excess: pm - mass_lower,
            h_mass_excess: phi_h(p, h)? - h_lower,
            balls,
            coverage,
            retries,
        })
    };

    if let [only] = r.patches.as_slice() {
        if only.is_affine() && only.theta.is_const() {
            let p = only.exact_triangulation()?;
            let cert = certify(&p, "exact", eps, 0, 1.0, 0)?;
            if cert.holds() {
                return Ok((p, cert));
            }
        }
    }
    if r.m() != 1 {
        return Err(Error::Unsupported("approximation of curved or varying 2-currents".into()));
    }
    let mut inner = eps / (3.0 * 1f64.max(mass.value).max(h_mass.value));
    let mut last = None;
    for retry in 0..=RETRIES {
        let sel = select_balls(r, inner.min(0.5), Some(h))?;
        let terms = sel
            .balls
            .iter()
            .map(|b| Ok(tangent_disc(r, &b.center, b.radius)?.triangulate(0)?.terms()[0].clone()))
            .collect::<Result<Vec<_>>>()?;
        let p = PolyhedralChain::new(r.n(), 1, terms)?;
        let cert = certify(&p, "tangent-discs", inner, sel.balls.len(), sel.coverage(), retry)?;
        if cert.holds() {
            return Ok((p, cert));
        }
        last = Some(cert);
        inner /= 2.0;
    }
    let c = last.expect("at least one attempt");
    Err(Error::Certificate(format!(
        "after {RETRIES} retries: flat {:.3e}, mass excess {:.3e}, H-mass excess {:.3e} against eps {eps:.3e}",
        c.flat_upper, c.mass_excess, c.h_mass_excess
    )))
}
