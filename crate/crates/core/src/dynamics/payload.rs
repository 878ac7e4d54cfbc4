use super::{PayloadSpec, SystemParams};

/// Inertial properties of link 2, including a carried payload, along the
/// link axis measured from joint 2.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Link2Properties {
    pub mass: f64,
    /// Distance of the centre of mass from joint 2 (m).
    pub com_offset: f64,
    /// Inertia about the centre of mass, perpendicular to the link (kg·m²).
    pub inertia_com: f64,
    /// Inertia about the joint-2 axis (kg·m²).
    pub inertia_joint: f64,
}

/// Link 2 as a uniform slender rod, plus the payload as a point mass at the
/// gripper when attached.
pub fn effective_link2(params: &SystemParams, payload: &PayloadSpec) -> Link2Properties {
    let (m2, l2) = (params.m2, params.l2);
    let mp = payload.carried_mass();
    if mp == 0.0 {
        return Link2Properties {
            mass: m2,
            com_offset: l2 / 2.0,
            inertia_com: m2 * l2 * l2 / 12.0,
            inertia_joint: m2 * l2 * l2 / 3.0,
        };
    }
    let mass = m2 + mp;
    let com = (m2 * l2 / 2.0 + mp * l2) / mass;
    let rod = m2 * l2 * l2 / 12.0 + m2 * (l2 / 2.0 - com).powi(2);
    let point = mp * (l2 - com).powi(2);
    Link2Properties {
        mass,
        com_offset: com,
        inertia_com: rod + point,
        inertia_joint: m2 * l2 * l2 / 3.0 + mp * l2 * l2,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_payload_is_bare_link() {
        let p = SystemParams::default();
        let bare = effective_link2(&p, &PayloadSpec::none());
        assert_eq!(effective_link2(&p, &PayloadSpec::attached(0.0)), bare);
        assert_eq!(effective_link2(&p, &PayloadSpec { mass: 0.15, attached: false }), bare);
        assert_eq!(bare.mass, 0.112);
        assert_eq!(bare.com_offset, 0.0425);
    }

    #[test]
    fn composite_centre_of_mass() {
        let p = SystemParams::default();
        let l = effective_link2(&p, &PayloadSpec::attached(0.150));
        assert!((l.mass - 0.262).abs() < 1e-15);
        let expected = (0.112 * 0.0425 + 0.150 * 0.085) / 0.262;
        assert!((l.com_offset - expected).abs() < 1e-15);
        assert!((l.com_offset - 0.06683).abs() < 1e-5);
        // Parallel-axis consistency between the two inertias.
        assert!((l.inertia_joint - (l.inertia_com + l.mass * l.com_offset.powi(2))).abs() < 1e-15);
    }
}
