//! Geometric top-down two-finger grasp oracle.
//!
//! A grasp configuration is a candidate center on the target (centroid plus
//! four contour samples) and one of `K` discretized closing axes. A
//! configuration is feasible iff the target span fits within the gripper
//! stroke at that angle and both finger footprints, inflated by the safety
//! clearance, are collision-free against all non-target objects and the
//! workspace boundary. The score of a state is the feasible fraction of all
//! candidate configurations.

use crate::geometry::{contour_points, polygon_distance, ConvexPolygon, Vec2};
use crate::scene::{ObjectId, SceneState};
use crate::Real;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum GraspError {
    #[error("target object {0} not present")]
    MissingTarget(ObjectId),
    #[error("scene has no target object")]
    NoTarget,
}

/// Two-finger gripper geometry. Defaults derive from a 11×57 px finger
/// kernel at 2 mm/px: each finger footprint is 0.022 m along the closing
/// axis and 0.114 m across it.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct GripperModel {
    /// Finger extent along the closing axis, meters.
    pub finger_thickness: f64,
    /// Finger extent across the closing axis, meters.
    pub finger_width: f64,
    /// Maximum opening between the finger inner faces, meters.
    pub stroke: f64,
    /// Safety margin added around each finger for collision checks, meters.
    pub clearance: f64,
    /// Number of discretized closing-axis angles.
    pub angles: usize,
    /// Contour samples used as additional grasp centers.
    pub contour_centers: usize,
}

impl Default for GripperModel {
    fn default() -> Self {
        Self {
            finger_thickness: 0.022,
            finger_width: 0.114,
            stroke: 0.085,
            clearance: 0.002,
            angles: 16,
            contour_centers: 4,
        }
    }
}

/// Discretized top-down grasp: center point plus closing-axis index in
/// `[0, angles)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GraspAction<S> {
    pub center: Vec2<S>,
    pub angle_index: usize,
    pub angles: usize,
}

impl<S: Real> GraspAction<S> {
    pub fn angle(&self) -> S {
        S::of(std::f64::consts::TAU) * S::from_usize(self.angle_index).unwrap()
            / S::from_usize(self.angles).unwrap()
    }
}

/// Both finger footprints for a configuration, optionally inflated.
fn finger_polygons<S: Real>(
    gripper: &GripperModel,
    center: Vec2<S>,
    angle_index: usize,
    inflate: S,
) -> [ConvexPolygon<S>; 2] {
    let theta = S::of(std::f64::consts::TAU) * S::from_usize(angle_index).unwrap()
        / S::from_usize(gripper.angles).unwrap();
    let (s, c) = theta.sin_cos();
    let u = Vec2::new(c, s);
    let v = u.perp();
    let half_t = S::of(gripper.finger_thickness * 0.5) + inflate;
    let half_w = S::of(gripper.finger_width * 0.5) + inflate;
    let offset = S::of(gripper.stroke * 0.5 + gripper.finger_thickness * 0.5);
    let build = |sign: S| {
        let fc = center + u * (offset * sign);
        ConvexPolygon::new(vec![
            fc - u * half_t - v * half_w,
            fc + u * half_t - v * half_w,
            fc + u * half_t + v * half_w,
            fc - u * half_t + v * half_w,
        ])
        .expect("finger rect")
    };
    [build(S::one()), build(-S::one())]
}

/// Candidate grasp centers on the target: world centroid first, then the
/// contour samples.
fn candidate_centers<S: Real>(
    state: &SceneState<S>,
    target_id: ObjectId,
    gripper: &GripperModel,
) -> Result<Vec<Vec2<S>>, GraspError> {
    let target = state.object(target_id).ok_or(GraspError::MissingTarget(target_id))?;
    let mut centers = vec![target.world_centroid()];
    if gripper.contour_centers > 0 {
        if let Ok(pts) = contour_points(&target.shape, &target.pose, gripper.contour_centers) {
            centers.extend(pts.into_iter().map(|(p, _)| p));
        }
    }
    Ok(centers)
}

fn config_feasible<S: Real>(
    state: &SceneState<S>,
    target_id: ObjectId,
    gripper: &GripperModel,
    center: Vec2<S>,
    angle_index: usize,
) -> bool {
    let target = match state.object(target_id) {
        Some(t) => t,
        None => return false,
    };
    // Span check: target extent along the closing axis must fit the stroke.
    let theta = S::of(std::f64::consts::TAU) * S::from_usize(angle_index).unwrap()
        / S::from_usize(gripper.angles).unwrap();
    let (sn, cs) = theta.sin_cos();
    let u = Vec2::new(cs, sn);
    let mut lo = S::infinity();
    let mut hi = S::neg_infinity();
    for part in target.world_parts() {
        for vtx in part.vertices() {
            let d = vtx.dot(u);
            lo = lo.min(d);
            hi = hi.max(d);
        }
    }
    if hi - lo > S::of(gripper.stroke) {
        return false;
    }
    let fingers = finger_polygons(gripper, center, angle_index, S::of(gripper.clearance));
    for f in &fingers {
        if f.vertices().iter().any(|v| !state.workspace.contains_point(*v)) {
            return false;
        }
        for o in &state.objects {
            if o.id == target_id {
                continue;
            }
            for part in o.world_parts() {
                if crate::geometry::overlap(f, &part).is_some() {
                    return false;
                }
            }
        }
    }
    true
}

/// Feasible fraction of all candidate grasp configurations, in [0, 1].
pub fn grasp_score<S: Real>(
    state: &SceneState<S>,
    target_id: ObjectId,
    gripper: &GripperModel,
) -> Result<S, GraspError> {
    let centers = candidate_centers(state, target_id, gripper)?;
    let total = centers.len() * gripper.angles;
    let mut feasible = 0usize;
    for center in &centers {
        for angle in 0..gripper.angles {
            if config_feasible(state, target_id, gripper, *center, angle) {
                feasible += 1;
            }
        }
    }
    Ok(S::from_usize(feasible).unwrap() / S::from_usize(total).unwrap())
}

/// Closed-threshold graspability test: true iff `score ≥ threshold` and the
/// score is positive.
pub fn is_graspable<S: Real>(
    state: &SceneState<S>,
    target_id: ObjectId,
    gripper: &GripperModel,
    threshold: S,
) -> Result<bool, GraspError> {
    let score = grasp_score(state, target_id, gripper)?;
    Ok(score >= threshold && score > S::zero())
}

/// Best feasible configuration by maximum clearance to obstacles; ties go to
/// the lowest angle index, then candidate order. `None` when nothing is
/// feasible.
pub fn best_grasp<S: Real>(
    state: &SceneState<S>,
    target_id: ObjectId,
    gripper: &GripperModel,
) -> Result<Option<GraspAction<S>>, GraspError> {
    let centers = candidate_centers(state, target_id, gripper)?;
    let mut best: Option<(S, GraspAction<S>)> = None;
    for angle in 0..gripper.angles {
        for (ci, center) in centers.iter().enumerate() {
            if !config_feasible(state, target_id, gripper, *center, angle) {
                continue;
            }
            let fingers = finger_polygons(gripper, *center, angle, S::of(gripper.clearance));
            let mut margin = S::infinity();
            for o in &state.objects {
                if o.id == target_id {
                    continue;
                }
                for part in o.world_parts() {
                    for f in &fingers {
                        margin = margin.min(polygon_distance(f, &part));
                    }
                }
            }
            let action = GraspAction {
                center: *center,
                angle_index: angle,
                angles: gripper.angles,
            };
            let better = match &best {
                None => true,
                Some((m, _)) => margin > *m,
            };
            if better {
                best = Some((margin, action));
            }
            let _ = ci;
        }
    }
    Ok(best.map(|(_, a)| a))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{Pose2, Rect, Shape};
    use crate::scene::{Movability, ObjectState};
    use std::sync::Arc;

    fn sq(side: f64) -> Arc<Shape<f64>> {
        Arc::new(Shape::single(ConvexPolygon::rectangle(Vec2::zero(), side, side)))
    }

    fn obj(id: u32, shape: Arc<Shape<f64>>, x: f64, y: f64) -> ObjectState<f64> {
        ObjectState {
            id: ObjectId(id),
            shape,
            pose: Pose2::new(x, y, 0.0),
            movability: Movability::PushOnly,
            friction_scale: 1.0,
            out_of_bounds: false,
        }
    }

    fn scene(objects: Vec<ObjectState<f64>>) -> SceneState<f64> {
        SceneState {
            workspace: Rect::from_size(0.6, 0.6),
            objects,
            target_id: Some(ObjectId(0)),
            rng_seed: 0,
        }
    }

    #[test]
    fn lone_target_scores_one() {
        let s = scene(vec![obj(0, sq(0.04), 0.3, 0.3)]);
        let g = GripperModel::default();
        assert_eq!(grasp_score(&s, ObjectId(0), &g).unwrap(), 1.0);
        assert!(is_graspable(&s, ObjectId(0), &g, 0.9).unwrap());
    }

    #[test]
    fn fully_ringed_target_scores_zero() {
        let side = 0.04;
        let mut objects = vec![obj(0, sq(side), 0.3, 0.3)];
        // Eight touching neighbors on all sides.
        let mut id = 1;
        for dx in [-1.0, 0.0, 1.0] {
            for dy in [-1.0, 0.0, 1.0] {
                if dx == 0.0 && dy == 0.0 {
                    continue;
                }
                objects.push(obj(id, sq(side), 0.3 + dx * side, 0.3 + dy * side));
                id += 1;
            }
        }
        let s = scene(objects);
        let g = GripperModel::default();
        assert_eq!(grasp_score(&s, ObjectId(0), &g).unwrap(), 0.0);
        assert!(!is_graspable(&s, ObjectId(0), &g, 0.0).unwrap());
        assert_eq!(best_grasp(&s, ObjectId(0), &g).unwrap(), None);
    }

    #[test]
    fn missing_target_is_an_error() {
        let s = scene(vec![obj(1, sq(0.04), 0.3, 0.3)]);
        assert_eq!(
            grasp_score(&s, ObjectId(0), &GripperModel::default()).unwrap_err(),
            GraspError::MissingTarget(ObjectId(0))
        );
    }

    #[test]
    fn threshold_is_closed() {
        let s = scene(vec![obj(0, sq(0.04), 0.3, 0.3)]);
        let g = GripperModel::default();
        // Score is exactly 1.0; the closed threshold keeps equality true.
        assert!(is_graspable(&s, ObjectId(0), &g, 1.0).unwrap());
    }

    #[test]
    fn lone_target_best_grasp_is_centroid_angle_zero() {
        let s = scene(vec![obj(0, sq(0.04), 0.3, 0.3)]);
        let g = GripperModel::default();
        let a = best_grasp(&s, ObjectId(0), &g).unwrap().unwrap();
        assert_eq!(a.angle_index, 0);
        assert!(a.center.dist(Vec2::new(0.3, 0.3)) < 1e-9);
    }

    #[test]
    fn vertical_corridor_selects_angle_four() {
        // Obstacles tight on the left and right leave only the vertical
        // closing axis (fingers above and below the target).
        let side = 0.04;
        let wall = Arc::new(Shape::single(ConvexPolygon::rectangle(
            Vec2::zero(),
            0.04,
            0.4,
        )));
        let s = scene(vec![
            obj(0, sq(side), 0.3, 0.3),
            obj(1, wall.clone(), 0.3 - side, 0.3),
            obj(2, wall.clone(), 0.3 + side, 0.3),
        ]);
        let g = GripperModel::default();
        let score = grasp_score(&s, ObjectId(0), &g).unwrap();
        assert!(score > 0.0);
        let a = best_grasp(&s, ObjectId(0), &g).unwrap().unwrap();
        assert_eq!(a.angle_index, 4, "90° corridor → index 4 of 16");
    }

    #[test]
    fn hand_built_two_of_eighty() {
        // Target with one open face: exactly 2 of 16 angles feasible at the
        // centroid candidate only. Brute-force enumeration is the
        // definition; this scene is constructed so the contour candidates
        // all collide (off-center fingers clip the side walls).
        let g = GripperModel {
            finger_width: 0.02,
            finger_thickness: 0.01,
            stroke: 0.06,
            clearance: 0.001,
            ..GripperModel::default()
        };
        let side = 0.05;
        // Walls leave a slot exactly as tall as the target so only the
        // horizontal closing axis (indices 0 and 8) fits at the centroid.
        let slab = Arc::new(Shape::single(ConvexPolygon::rectangle(
            Vec2::zero(),
            0.3,
            0.1,
        )));
        let s = scene(vec![
            obj(0, sq(side), 0.3, 0.3),
            obj(1, slab.clone(), 0.3, 0.3 + side / 2.0 + 0.05 + 0.002),
            obj(2, slab.clone(), 0.3, 0.3 - side / 2.0 - 0.05 - 0.002),
        ]);
        let feasible: Vec<(usize, usize)> = {
            let centers = candidate_centers(&s, ObjectId(0), &g).unwrap();
            let mut v = Vec::new();
            for (ci, c) in centers.iter().enumerate() {
                for a in 0..16 {
                    if config_feasible(&s, ObjectId(0), &g, *c, a) {
                        v.push((ci, a));
                    }
                }
            }
            v
        };
        assert_eq!(feasible, vec![(0, 0), (0, 8)], "centroid-only, angles 0 and 8");
        let score = grasp_score(&s, ObjectId(0), &g).unwrap();
        assert!((score - 2.0 / 80.0).abs() < 1e-12);
    }

    #[test]
    fn removing_an_obstacle_never_lowers_the_score() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let g = GripperModel::default();
        for _ in 0..50 {
            let mut objects = vec![obj(0, sq(0.04), 0.3, 0.3)];
            let n = rng.gen_range(2..6);
            for i in 0..n {
                let x = rng.gen_range(0.2..0.4);
                let y = rng.gen_range(0.2..0.4);
                objects.push(obj(i + 1, sq(rng.gen_range(0.02..0.05)), x, y));
            }
            let s = scene(objects);
            let before = grasp_score(&s, ObjectId(0), &g).unwrap();
            let drop = rng.gen_range(1..=n) as usize;
            let mut reduced = s.clone();
            reduced.objects.retain(|o| o.id != ObjectId(drop as u32));
            let after = grasp_score(&reduced, ObjectId(0), &g).unwrap();
            assert!(after >= before, "monotonicity: {after} < {before}");
        }
    }
}
