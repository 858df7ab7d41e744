use nalgebra::Matrix3xX;

use super::{Composition, ModelError, Pose2};
use crate::numeric::wrap_angle;

pub const GRAVITY: f64 = 9.81;

/// Calls `f(start, end, joint_index)` for every distal segment, base to tip.
/// Stops early and returns `true` as soon as `f` does.
pub(crate) fn any_segment<F>(comp: &Composition, q: &[f64], mut f: F) -> bool
where
    F: FnMut([f64; 2], [f64; 2], usize) -> bool,
{
    let mut theta = 0.0;
    let mut p = [0.0, 0.0];
    for (i, (&qi, &len)) in q.iter().zip(comp.segment_lengths()).enumerate() {
        theta += qi;
        let next = [p[0] + len * theta.cos(), p[1] + len * theta.sin()];
        if f(p, next, i) {
            return true;
        }
        p = next;
    }
    false
}

pub(crate) fn fk_unchecked(comp: &Composition, q: &[f64]) -> (f64, f64, f64) {
    let mut theta = 0.0;
    let (mut x, mut y) = (0.0, 0.0);
    for (&qi, &len) in q.iter().zip(comp.segment_lengths()) {
        theta += qi;
        x += len * theta.cos();
        y += len * theta.sin();
    }
    (x, y, theta)
}

pub fn forward_kinematics(comp: &Composition, q: &[f64]) -> Result<Pose2, ModelError> {
    comp.check_dim(q.len())?;
    let (x, y, theta) = fk_unchecked(comp, q);
    Ok(Pose2 {
        x,
        y,
        phi: wrap_angle(theta),
    })
}

/// Origins of every joint followed by the tool tip (`n_q + 1` points).
pub fn joint_positions(comp: &Composition, q: &[f64]) -> Result<Vec<[f64; 2]>, ModelError> {
    comp.check_dim(q.len())?;
    let mut pts = vec![[0.0, 0.0]];
    any_segment(comp, q, |_, b, _| {
        pts.push(b);
        false
    });
    Ok(pts)
}

pub(crate) fn jacobian_unchecked(comp: &Composition, q: &[f64]) -> Matrix3xX<f64> {
    let n = q.len();
    let mut jac = Matrix3xX::zeros(n);
    let mut theta = 0.0;
    let mut dx = vec![0.0; n];
    let mut dy = vec![0.0; n];
    for (i, (&qi, &len)) in q.iter().zip(comp.segment_lengths()).enumerate() {
        theta += qi;
        dx[i] = len * theta.cos();
        dy[i] = len * theta.sin();
    }
    // Column j collects the contributions of segments j..n.
    let (mut sx, mut sy) = (0.0, 0.0);
    for j in (0..n).rev() {
        sx += dx[j];
        sy += dy[j];
        jac[(0, j)] = -sy;
        jac[(1, j)] = sx;
        jac[(2, j)] = 1.0;
    }
    jac
}

/// Partial derivatives of `(x, y, phi)` with respect to each joint angle.
pub fn jacobian(comp: &Composition, q: &[f64]) -> Result<Matrix3xX<f64>, ModelError> {
    comp.check_dim(q.len())?;
    Ok(jacobian_unchecked(comp, q))
}

/// Magnitude of the gravitational moment (gravity along -y) about every joint
/// axis, from link masses lumped at their midpoints, distal joint masses and a
/// payload at the tip.
pub fn static_payload_torques(
    comp: &Composition,
    q: &[f64],
    payload_mass: f64,
) -> Result<Vec<f64>, ModelError> {
    comp.check_dim(q.len())?;
    let n = q.len();
    // (owning joint, x, mass): a mass is distal to every joint up to its owner.
    let mut masses: Vec<(usize, f64, f64)> = Vec::new();
    let mut joint_x = vec![0.0; n];
    let mut theta = 0.0;
    let mut x = 0.0;
    for (i, &qi) in q.iter().enumerate() {
        joint_x[i] = x;
        masses.push((i, x, comp.joints()[i].mass));
        theta += qi;
        let c = theta.cos();
        for piece in &comp.pieces()[i] {
            let mid = piece.offset + 0.5 * piece.length;
            masses.push((i, x + mid * c, piece.mass));
        }
        x += comp.segment_lengths()[i] * c;
    }
    masses.push((n, x, payload_mass));

    Ok((0..n)
        .map(|i| {
            let moment: f64 = masses
                .iter()
                .filter(|(owner, _, _)| *owner >= i)
                .map(|&(_, mx, m)| m * GRAVITY * (mx - joint_x[i]))
                .sum();
            moment.abs()
        })
        .collect())
}
