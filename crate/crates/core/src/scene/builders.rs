//! Procedural geometry: subdivided rectangles, closed boxes and occupant
//! body occluders.

use crate::error::{Error, Result};
use crate::geom::{self, Vec3};
use crate::scene::{BodyModel, Occupant, Patch};

/// Number of cells used to split `length` into pieces of roughly `size`.
fn cell_count(length: f64, size: f64) -> usize {
    let ratio = length / size;
    let nearest = ratio.round();
    if (ratio - nearest).abs() < 1e-9 {
        nearest.max(1.0) as usize
    } else {
        ratio.ceil().max(1.0) as usize
    }
}

/// Splits the rectangle spanned by `corner + a·u_len·u + b·v_len·v`
/// (`a, b ∈ [0, 1]`) into patches of edge ≈ `size`. The patch normal is
/// `u × v`. Ids are assigned from `first_id` upward, row-major along `u`.
pub fn subdivide_rect(corner: Vec3, u: Vec3, u_len: f64, v: Vec3, v_len: f64, size: f64, albedo: f64, first_id: u32) -> Result<Vec<Patch>> {
    if !(size > 0.0 && u_len > 0.0 && v_len > 0.0) {
        return Err(Error::InvalidArgument("rectangle and patch sizes must be positive".into()));
    }
    let normal = u.cross(&v);
    let (nu, nv) = (cell_count(u_len, size), cell_count(v_len, size));
    let (du, dv) = (u_len / nu as f64, v_len / nv as f64);
    let mut out = Vec::with_capacity(nu * nv);
    for j in 0..nv {
        for i in 0..nu {
            let center = corner + u * ((i as f64 + 0.5) * du) + v * ((j as f64 + 0.5) * dv);
            let id = first_id + out.len() as u32;
            out.push(Patch::new(id, center, normal, u, [du / 2.0, dv / 2.0], albedo)?);
        }
    }
    Ok(out)
}

/// Surface albedos for the six faces of a box room.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShellAlbedo {
    pub floor: f64,
    pub ceiling: f64,
    pub walls: f64,
}

impl ShellAlbedo {
    pub fn uniform(albedo: f64) -> Self {
        ShellAlbedo {
            floor: albedo,
            ceiling: albedo,
            walls: albedo,
        }
    }
}

/// Inward-facing patches of an axis-aligned closed box spanning
/// `[0, size.x] × [0, size.y] × [0, size.z]` (Z up).
pub fn box_shell(size: Vec3, patch_size: f64, albedo: ShellAlbedo, first_id: u32) -> Result<Vec<Patch>> {
    let (x, y, z) = (Vec3::x(), Vec3::y(), Vec3::z());
    let o = Vec3::zeros();
    let faces = [
        // floor, normal +Z
        (o, x, size.x, y, size.y, albedo.floor),
        // ceiling, normal −Z
        (Vec3::new(0.0, 0.0, size.z), y, size.y, x, size.x, albedo.ceiling),
        // wall x = 0, normal +X
        (o, y, size.y, z, size.z, albedo.walls),
        // wall x = max, normal −X
        (Vec3::new(size.x, 0.0, 0.0), z, size.z, y, size.y, albedo.walls),
        // wall y = 0, normal +Y
        (o, z, size.z, x, size.x, albedo.walls),
        // wall y = max, normal −Y
        (Vec3::new(0.0, size.y, 0.0), x, size.x, z, size.z, albedo.walls),
    ];
    let mut out = Vec::new();
    for (corner, u, ul, v, vl, a) in faces {
        let next = first_id + out.len() as u32;
        out.extend(subdivide_rect(corner, u, ul, v, vl, patch_size, a, next)?);
    }
    Ok(out)
}

/// Six outward-facing patches boxing an occupant's body from the floor up to
/// `neck` below the head.
pub fn body_box(occupant: &Occupant, world_up: &Vec3, model: &BodyModel, first_id: u32) -> Result<Vec<Patch>> {
    let head_height = occupant.head_position.dot(world_up);
    let top = head_height - model.neck;
    let height = top - model.floor;
    if !(height > 0.0 && model.radius > 0.0) {
        return Err(Error::invariant("occupant", occupant.id, "head is too low for the body occluder"));
    }
    let r = model.radius;
    let (e1, e2) = geom::frame_around(world_up);
    let foot = occupant.head_position - world_up * (head_height - model.floor);
    let mid = foot + world_up * (height / 2.0);
    let faces = [
        (mid + e1 * r, e1, e2, [r, height / 2.0]),
        (mid - e1 * r, -e1, e2, [r, height / 2.0]),
        (mid + e2 * r, e2, e1, [r, height / 2.0]),
        (mid - e2 * r, -e2, e1, [r, height / 2.0]),
        (foot + world_up * height, *world_up, e1, [r, r]),
        (foot, -*world_up, e1, [r, r]),
    ];
    faces
        .into_iter()
        .enumerate()
        .map(|(k, (center, normal, tangent, half))| Patch::new(first_id + k as u32, center, normal, tangent, half, model.albedo))
        .collect()
}
