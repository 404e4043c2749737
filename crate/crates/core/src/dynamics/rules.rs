//! Per-agent update rules: position advance, neighbourhood target heading,
//! and rate-limited slew toward that target.

use super::agent::Agent;
use crate::vector::{BeliefVector, DEGENERATE_EPSILON};

/// Anti-parallel targets closer than this to π rotate in a fixed plane.
pub const ANTIPARALLEL_EPSILON: f64 = 1e-9;

/// Position after moving along the agent's heading for `dt` seconds.
pub fn update_position(agent: &Agent, dt: f64) -> BeliefVector {
    let mut p = agent.position;
    p.add_scaled(&agent.orientation, agent.speed * dt);
    p
}

/// Result of the neighbourhood pass for one agent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Influence {
    /// Unit target heading.
    pub direction: BeliefVector,
    /// Falloff-weighted mean speed of the influential neighbours.
    pub mean_speed: f64,
    /// Sum of the falloff weights.
    pub total_weight: f64,
    pub neighbours: usize,
}

/// Contribution weight of a neighbour at `distance` carrying `weight`, seen
/// by an agent with horizon `sih`. Zero outside the (strict) horizon.
#[inline]
pub fn falloff(distance: f64, weight: f64, sih: f64) -> f64 {
    let reach = weight * sih;
    if reach > 0.0 && distance < reach {
        weight * (1.0 - distance / reach)
    } else {
        0.0
    }
}

/// Weighted mean heading of the neighbours within reach.
///
/// A neighbour `n` counts when `|me - n| < n.weight * r`; its heading is
/// weighted by `n.weight * (1 - d / (n.weight * r))`. The horizon `r` is the
/// observer's configured `base_sih`, except for an amplified neighbour, whose
/// own (amplified) horizon is used instead. Amplification therefore changes
/// what others hear from the agent, never its own susceptibility. `visible`
/// filters the snapshot (population awareness); `me` itself is skipped by id.
/// Returns `None` when nothing is in reach or the headings cancel out.
pub fn target_orientation<F>(me: &Agent, snapshot: &[Agent], visible: F) -> Option<Influence>
where
    F: Fn(&Agent) -> bool,
{
    let own = me.base_sih;
    if !(own > 0.0) {
        return None;
    }
    let mut sum = BeliefVector::zeros(me.dimensions());
    let mut speed_sum = 0.0;
    let mut total_weight = 0.0;
    let mut neighbours = 0;
    for other in snapshot {
        if other.id == me.id || !visible(other) {
            continue;
        }
        let horizon = if other.amplified { other.sih } else { own };
        let reach = other.weight * horizon;
        let d2 = me.position.distance_squared(&other.position);
        if d2 >= reach * reach {
            continue;
        }
        let c = falloff(d2.sqrt(), other.weight, horizon);
        if c <= 0.0 {
            continue;
        }
        sum.add_scaled(&other.orientation, c);
        speed_sum += c * other.speed;
        total_weight += c;
        neighbours += 1;
    }
    if neighbours == 0 {
        return None;
    }
    let direction = sum.normalize().ok()?;
    Some(Influence {
        direction,
        mean_speed: speed_sum / total_weight,
        total_weight,
        neighbours,
    })
}

/// Fraction of the remaining angle covered this step, clamped to one.
#[inline]
pub fn slew_fraction(turn_rate: f64, dt: f64) -> f64 {
    (turn_rate * dt).clamp(0.0, 1.0)
}

/// Rotates the unit vector `current` toward `target` by the fraction
/// `min(turn_rate * dt, 1)` of the angle between them, inside the plane the
/// two vectors span.
pub fn slew_orientation(
    current: &BeliefVector,
    target: &BeliefVector,
    turn_rate: f64,
    dt: f64,
) -> BeliefVector {
    let Ok(target) = target.normalize() else {
        return *current;
    };
    let cos = current.dot(&target).clamp(-1.0, 1.0);
    let mut rejection = target;
    rejection.add_scaled(current, -cos);
    // Same angle as acos(cos), without its loss of precision near 0 and π.
    let angle = rejection.norm().atan2(cos);
    let fraction = slew_fraction(turn_rate, dt);
    if angle <= DEGENERATE_EPSILON || fraction == 0.0 {
        return *current;
    }
    let perpendicular = if std::f64::consts::PI - angle < ANTIPARALLEL_EPSILON {
        fixed_perpendicular(current)
    } else {
        match rejection.normalize() {
            Ok(p) => p,
            Err(_) => fixed_perpendicular(current),
        }
    };
    let turned = angle * fraction;
    let mut out = *current * turned.cos();
    out.add_scaled(&perpendicular, turned.sin());
    out.normalize().unwrap_or(*current)
}

/// Unit vector perpendicular to `v`, built from the first coordinate axis
/// that is not parallel to it.
fn fixed_perpendicular(v: &BeliefVector) -> BeliefVector {
    for k in 0..v.len() {
        let mut p = BeliefVector::axis(v.len(), k);
        p.add_scaled(v, -v[k]);
        if p.norm() > 1e-6 {
            return p.normalize().expect("checked norm");
        }
    }
    unreachable!("a unit vector in two or more dimensions has a perpendicular axis")
}

/// Horizon giving the same behaviour in `dimensions` as `base_sih` does in
/// one: scaled by the square root of the dimension count.
pub fn effective_sih(base_sih: f64, dimensions: usize) -> f64 {
    base_sih * (dimensions as f64).sqrt()
}
