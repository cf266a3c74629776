//! Minimal 3-vector helpers over `[f64; 3]`.

pub type Vec3 = [f64; 3];

#[inline]
pub fn add(a: Vec3, b: Vec3) -> Vec3 {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

#[inline]
pub fn sub(a: Vec3, b: Vec3) -> Vec3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

#[inline]
pub fn scale(a: Vec3, s: f64) -> Vec3 {
    [a[0] * s, a[1] * s, a[2] * s]
}

#[inline]
pub fn dot(a: Vec3, b: Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

#[inline]
pub fn cross(a: Vec3, b: Vec3) -> Vec3 {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

#[inline]
pub fn norm(a: Vec3) -> f64 {
    dot(a, a).sqrt()
}

/// Unit vector along `a`, or the zero vector when `a` vanishes.
#[inline]
pub fn normalize(a: Vec3) -> Vec3 {
    let n = norm(a);
    if n > 0.0 {
        scale(a, 1.0 / n)
    } else {
        [0.0; 3]
    }
}

/// Unsigned angle between two vectors, in `[0, π]`.
pub fn angle_between(a: Vec3, b: Vec3) -> f64 {
    let c = cross(a, b);
    norm(c).atan2(dot(a, b))
}

/// Component of `v` orthogonal to the unit vector `n`.
#[inline]
pub fn project_to_plane(v: Vec3, n: Vec3) -> Vec3 {
    sub(v, scale(n, dot(v, n)))
}

/// Rotates `v` about the unit `axis` by `angle` (Rodrigues).
pub fn rotate(v: Vec3, axis: Vec3, angle: f64) -> Vec3 {
    let (s, c) = angle.sin_cos();
    let k_cross_v = cross(axis, v);
    let k_dot_v = dot(axis, v);
    [
        v[0] * c + k_cross_v[0] * s + axis[0] * k_dot_v * (1.0 - c),
        v[1] * c + k_cross_v[1] * s + axis[1] * k_dot_v * (1.0 - c),
        v[2] * c + k_cross_v[2] * s + axis[2] * k_dot_v * (1.0 - c),
    ]
}

/// Applies the minimal rotation carrying unit vector `from` onto unit vector `to`.
pub fn align(v: Vec3, from: Vec3, to: Vec3) -> Vec3 {
    let axis = cross(from, to);
    let s = norm(axis);
    let c = dot(from, to);
    if s < 1e-15 {
        if c > 0.0 {
            return v;
        }
        // antiparallel: half-turn about any axis orthogonal to `from`
        let helper = if from[0].abs() < 0.9 { [1.0, 0.0, 0.0] } else { [0.0, 1.0, 0.0] };
        let axis = normalize(cross(from, helper));
        return rotate(v, axis, std::f64::consts::PI);
    }
    rotate(v, scale(axis, 1.0 / s), s.atan2(c))
}

/// Oriented angle from `a` to `b` about the unit normal `n`, in `(-π, π]`.
pub fn oriented_angle(a: Vec3, b: Vec3, n: Vec3) -> f64 {
    dot(cross(a, b), n).atan2(dot(a, b))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn align_maps_from_to_to() {
        let from = normalize([1.0, 2.0, 0.5]);
        let to = normalize([-0.3, 0.1, 1.0]);
        let r = align(from, from, to);
        assert!(norm(sub(r, to)) < 1e-12);
        let anti = align(from, from, scale(from, -1.0));
        assert!(norm(add(anti, from)) < 1e-12);
    }

    #[test]
    fn oriented_angle_sign() {
        let n = [0.0, 0.0, 1.0];
        let a = oriented_angle([1.0, 0.0, 0.0], [0.0, 1.0, 0.0], n);
        assert!((a - std::f64::consts::FRAC_PI_2).abs() < 1e-15);
    }
}
