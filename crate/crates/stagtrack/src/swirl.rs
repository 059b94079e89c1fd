use crate::critical::CriticalPoint;
use crate::field::PlanarField;

/// Velocity `u = (−ψ_y, ψ_x)` of a stream function jet.
pub fn velocity(field: &dyn PlanarField, x: f64, y: f64) -> [f64; 2] {
    let j = field.jet(x, y);
    [-j[2], j[1]]
}

/// Signed angle swept around `cp` by the frozen-time streamline started at
/// distance `radius` to the east, integrated with RK4 for `steps` steps of
/// length `h` in time. Negative means clockwise.
pub fn swirl_angle(field: &dyn PlanarField, cp: &CriticalPoint, radius: f64, steps: usize, h: f64) -> f64 {
    let (cx, cy) = (cp.x, cp.y);
    let mut p = [cx + radius, cy];
    let mut total = 0.0;
    let mut prev = (p[1] - cy).atan2(p[0] - cx);
    for _ in 0..steps {
        let k1 = velocity(field, p[0], p[1]);
        let k2 = velocity(field, p[0] + 0.5 * h * k1[0], p[1] + 0.5 * h * k1[1]);
        let k3 = velocity(field, p[0] + 0.5 * h * k2[0], p[1] + 0.5 * h * k2[1]);
        let k4 = velocity(field, p[0] + h * k3[0], p[1] + h * k3[1]);
        for d in 0..2 {
            p[d] += h / 6.0 * (k1[d] + 2.0 * k2[d] + 2.0 * k3[d] + k4[d]);
        }
        let a = (p[1] - cy).atan2(p[0] - cx);
        let mut da = a - prev;
        if da > std::f64::consts::PI {
            da -= std::f64::consts::TAU;
        } else if da < -std::f64::consts::PI {
            da += std::f64::consts::TAU;
        }
        total += da;
        prev = a;
    }
    total
}

/// Rotation sense from the Hessian alone: the linearized flow at an
/// extremum turns clockwise iff `ψ_xx < 0`.
pub fn linear_swirl(cp: &CriticalPoint) -> f64 {
    cp.hxx.signum() * (cp.det > 0.0) as u8 as f64
}
