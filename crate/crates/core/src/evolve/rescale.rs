use serde::Serialize;

use super::nonlinear::FieldSnapshot;
use crate::error::{Result, StabilityError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RescaleDirection {
    ToFast,
    ToSlow,
}

const INTEGER_SLACK: f64 = 1e-9;

fn integer_like(x: f64) -> bool {
    x >= 1.0 - INTEGER_SLACK && (x - x.round()).abs() <= INTEGER_SLACK * x.max(1.0)
}

/// `(ρ', u', v')(t', x', z) = (ρ, u, v/ε)(t'/ε, x'/ε, z)` and its inverse on sampled fields.
///
/// The samples are unchanged apart from `v`; the torus scale and time are
/// multiplied (`to_fast`) or divided (`to_slow`) by `ε`. The fast frame must
/// have a period `2π/ℓ`, i.e. `ε = 1/(ℓM)` for an integer `ℓ`.
pub fn hydrostatic_rescale(snap: &FieldSnapshot, eps: f64, direction: RescaleDirection) -> Result<FieldSnapshot> {
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(StabilityError::InvalidArgument(format!("eps must be positive, got {eps}")));
    }
    let (m_new, t_new, v_factor, fast_m) = match direction {
        RescaleDirection::ToFast => (snap.m_scale * eps, snap.t * eps, 1.0 / eps, snap.m_scale * eps),
        RescaleDirection::ToSlow => (snap.m_scale / eps, snap.t / eps, eps, snap.m_scale),
    };
    if !integer_like(1.0 / fast_m) {
        let m_slow = match direction {
            RescaleDirection::ToFast => snap.m_scale,
            RescaleDirection::ToSlow => m_new,
        };
        return Err(StabilityError::IncompatibleEps { eps, m_scale: m_slow });
    }
    Ok(FieldSnapshot {
        nx: snap.nx,
        nz: snap.nz,
        m_scale: m_new,
        t: t_new,
        rho: snap.rho.clone(),
        u: snap.u.clone(),
        v: snap.v.iter().map(|v| v * v_factor).collect(),
    })
}
