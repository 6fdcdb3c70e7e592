//! Minimal 3D vector math for the ray caster. World frame: x forward along
//! the road, y left, z up.

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Vec3 {
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Vec3 { x, y, z }
    }

    pub fn dot(self, o: Vec3) -> f64 {
        self.x * o.x + self.y * o.y + self.z * o.z
    }

    pub fn length(self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn normalized(self) -> Vec3 {
        let len = self.length();
        debug_assert!(len > 0.0);
        self * (1.0 / len)
    }

    pub fn cross(self, o: Vec3) -> Vec3 {
        Vec3::new(
            self.y * o.z - self.z * o.y,
            self.z * o.x - self.x * o.z,
            self.x * o.y - self.y * o.x,
        )
    }
}

impl std::ops::Add for Vec3 {
    type Output = Vec3;
    fn add(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl std::ops::Sub for Vec3 {
    type Output = Vec3;
    fn sub(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl std::ops::Mul<f64> for Vec3 {
    type Output = Vec3;
    fn mul(self, s: f64) -> Vec3 {
        Vec3::new(self.x * s, self.y * s, self.z * s)
    }
}

impl std::ops::Neg for Vec3 {
    type Output = Vec3;
    fn neg(self) -> Vec3 {
        Vec3::new(-self.x, -self.y, -self.z)
    }
}

/// Ray/oriented-box intersection by the slab method in the box's local
/// frame. The box is yawed around z only. Returns the entry distance and
/// the outward unit normal in world space for the nearest positive hit.
pub fn ray_box(
    origin: Vec3,
    dir: Vec3,
    center: Vec3,
    half: Vec3,
    yaw: f64,
) -> Option<(f64, Vec3)> {
    let (sin, cos) = yaw.sin_cos();
    // World -> local: translate, then rotate by -yaw.
    let rel = origin - center;
    let o = Vec3::new(
        rel.x * cos + rel.y * sin,
        -rel.x * sin + rel.y * cos,
        rel.z,
    );
    let d = Vec3::new(
        dir.x * cos + dir.y * sin,
        -dir.x * sin + dir.y * cos,
        dir.z,
    );

    let mut t_enter = f64::NEG_INFINITY;
    let mut t_exit = f64::INFINITY;
    let mut enter_axis = 0usize;
    let mut enter_sign = 0.0f64;

    let axes = [(o.x, d.x, half.x), (o.y, d.y, half.y), (o.z, d.z, half.z)];
    for (i, &(oc, dc, hc)) in axes.iter().enumerate() {
        if dc.abs() < 1e-12 {
            if oc.abs() > hc {
                return None;
            }
            continue;
        }
        let inv = 1.0 / dc;
        let mut t0 = (-hc - oc) * inv;
        let mut t1 = (hc - oc) * inv;
        if t0 > t1 {
            std::mem::swap(&mut t0, &mut t1);
        }
        if t0 > t_enter {
            t_enter = t0;
            enter_axis = i;
            // A ray moving +axis enters through the -h face, so the
            // outward normal opposes the direction component.
            enter_sign = -dc.signum();
        }
        t_exit = t_exit.min(t1);
        if t_enter > t_exit {
            return None;
        }
    }

    if t_enter <= 1e-9 || !t_enter.is_finite() {
        // Origin inside the box or behind it; treat as no hit for cameras.
        return None;
    }

    let local_normal = match enter_axis {
        0 => Vec3::new(enter_sign, 0.0, 0.0),
        1 => Vec3::new(0.0, enter_sign, 0.0),
        _ => Vec3::new(0.0, 0.0, enter_sign),
    };
    // Local -> world rotation (yaw).
    let world_normal = Vec3::new(
        local_normal.x * cos - local_normal.y * sin,
        local_normal.x * sin + local_normal.y * cos,
        local_normal.z,
    );
    Some((t_enter, world_normal))
}

/// Cheap sphere rejection that bounds the box for broad-phase culling.
pub fn ray_misses_sphere(origin: Vec3, dir: Vec3, center: Vec3, radius: f64) -> bool {
    let oc = center - origin;
    let proj = oc.dot(dir);
    if proj < -radius {
        return true;
    }
    let closest_sq = oc.dot(oc) - proj * proj;
    closest_sq > radius * radius
}
