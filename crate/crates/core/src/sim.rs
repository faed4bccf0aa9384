//! Deterministic quasi-static planar push simulator with a batched lockstep
//! interface.
//!
//! The pusher is a disc advanced along the push segment in fixed substeps.
//! Penetrations are resolved by positional projection: the pusher translates
//! objects along the minimum translation vector (plus a tangential-lever
//! rotation about the object centroid), and object-object contacts split the
//! MTV half-half, iterated in ascending id order until settled. States are
//! pose-only; the simulator is memoryless across calls.

use crate::geometry::{disc_overlap, overlap, closest_point_on_polygon, ConvexPolygon, Pose2, Vec2};
use crate::scene::{Movability, ObjectId, PushAction, SceneState, SimBatch};
use crate::Real;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum SimError {
    #[error("push start pose is in collision")]
    StartInCollision,
    #[error("batch actions misaligned: {actions} actions for {states} states")]
    IndexMisalignment { actions: usize, states: usize },
    #[error("object {0} not found")]
    UnknownObject(ObjectId),
    #[error("object {0} cannot be pick-n-placed")]
    NotPickable(ObjectId),
    #[error("placement collides or leaves the workspace")]
    CollidingPlacement,
    #[error("push trajectory is not collision-free")]
    CollidingTrajectory,
}

/// Simulator tuning; serialized alongside results for reproducibility.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SimConfig {
    /// Pusher disc radius in meters (gripper tip).
    pub pusher_radius: f64,
    /// Advance per substep in meters.
    pub substep: f64,
    /// Maximum positional-projection iterations per substep.
    pub projection_iters: u32,
    /// Rotation gain: radians per meter² of lever × displacement.
    pub mu_rot: f64,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            pusher_radius: 0.01,
            substep: 1e-3,
            projection_iters: 32,
            mu_rot: 0.5,
        }
    }
}

/// Rotate `pose` by `dtheta` about the world-frame point `c`.
fn rotate_about<S: Real>(pose: &Pose2<S>, c: Vec2<S>, dtheta: S) -> Pose2<S> {
    let (s, co) = dtheta.sin_cos();
    let t = pose.translation() - c;
    Pose2::new(
        c.x + co * t.x - s * t.y,
        c.y + s * t.x + co * t.y,
        pose.theta + dtheta,
    )
}

/// World-space collision cache for one state during a push.
struct WorldCache<S> {
    parts: Vec<Vec<ConvexPolygon<S>>>,
    centroids: Vec<Vec2<S>>,
    radii: Vec<S>,
}

impl<S: Real> WorldCache<S> {
    fn new(state: &SceneState<S>) -> Self {
        Self {
            parts: state.objects.iter().map(|o| o.world_parts()).collect(),
            centroids: state.objects.iter().map(|o| o.world_centroid()).collect(),
            radii: state.objects.iter().map(|o| o.shape.bounding_radius()).collect(),
        }
    }

    fn refresh(&mut self, state: &SceneState<S>, i: usize) {
        self.parts[i] = state.objects[i].world_parts();
        self.centroids[i] = state.objects[i].world_centroid();
    }
}

/// Deepest penetration of the pusher disc into object `i`, with the contact
/// point on the object.
fn pusher_contact<S: Real>(
    cache: &WorldCache<S>,
    i: usize,
    pos: Vec2<S>,
    radius: S,
) -> Option<(S, Vec2<S>, Vec2<S>)> {
    if pos.dist(cache.centroids[i]) > radius + cache.radii[i] {
        return None;
    }
    let mut best: Option<(S, Vec2<S>, Vec2<S>)> = None;
    for part in &cache.parts[i] {
        if let Some(p) = disc_overlap(part, pos, radius) {
            if best.as_ref().map_or(true, |(d, _, _)| p.depth > *d) {
                let contact = closest_point_on_polygon(part, pos);
                best = Some((p.depth, p.direction, contact));
            }
        }
    }
    best
}

/// Deepest penetration between objects `i` and `j`; direction separates `i`.
fn pair_contact<S: Real>(cache: &WorldCache<S>, i: usize, j: usize) -> Option<(S, Vec2<S>)> {
    if cache.centroids[i].dist(cache.centroids[j]) > cache.radii[i] + cache.radii[j] {
        return None;
    }
    let mut best: Option<(S, Vec2<S>)> = None;
    for a in &cache.parts[i] {
        for b in &cache.parts[j] {
            if let Some(p) = overlap(a, b) {
                if best.as_ref().map_or(true, |(d, _)| p.depth > *d) {
                    best = Some((p.depth, p.direction));
                }
            }
        }
    }
    best
}

/// Settle all contacts for the pusher at `pos`. Returns when no projection
/// moved anything by more than the slop, or after the iteration cap.
fn resolve_contacts<S: Real>(
    state: &mut SceneState<S>,
    cache: &mut WorldCache<S>,
    pos: Option<Vec2<S>>,
    cfg: &SimConfig,
) {
    let slop = S::of(1e-9);
    let radius = S::of(cfg.pusher_radius);
    let mu_rot = S::of(cfg.mu_rot);
    let n = state.objects.len();
    for _ in 0..cfg.projection_iters {
        let mut moved = false;
        if let Some(pos) = pos {
            for i in 0..n {
                if let Some((depth, dir, contact)) = pusher_contact(cache, i, pos, radius) {
                    if depth <= slop {
                        continue;
                    }
                    let disp = dir * depth;
                    let centroid = cache.centroids[i];
                    let lever = contact - centroid;
                    let dtheta = mu_rot * state.objects[i].friction_scale * lever.cross(disp);
                    let o = &mut state.objects[i];
                    o.pose = Pose2::new(o.pose.x + disp.x, o.pose.y + disp.y, o.pose.theta);
                    if dtheta != S::zero() {
                        o.pose = rotate_about(&o.pose, centroid + disp, dtheta);
                    }
                    cache.refresh(state, i);
                    moved = true;
                }
            }
        }
        for i in 0..n {
            for j in (i + 1)..n {
                if let Some((depth, dir)) = pair_contact(cache, i, j) {
                    if depth <= slop {
                        continue;
                    }
                    let half = dir * (depth * S::of(0.5));
                    let oi = &mut state.objects[i];
                    oi.pose = Pose2::new(oi.pose.x + half.x, oi.pose.y + half.y, oi.pose.theta);
                    let oj = &mut state.objects[j];
                    oj.pose = Pose2::new(oj.pose.x - half.x, oj.pose.y - half.y, oj.pose.theta);
                    cache.refresh(state, i);
                    cache.refresh(state, j);
                    moved = true;
                }
            }
        }
        if !moved {
            break;
        }
    }
}

/// True when the pusher disc at `pos` collides with any object.
pub fn pusher_blocked<S: Real>(state: &SceneState<S>, pos: Vec2<S>, radius: S) -> bool {
    for o in &state.objects {
        if pos.dist(o.world_centroid()) > radius + o.shape.bounding_radius() {
            continue;
        }
        for part in o.world_parts() {
            if disc_overlap(&part, pos, radius).is_some() {
                return true;
            }
        }
    }
    false
}

/// Execute one push and return the settled state.
///
/// Deterministic: identical inputs give bit-identical outputs. A push that
/// touches nothing is legal and returns the state unchanged; a push whose
/// start pose collides is an error.
pub fn step_push<S: Real>(
    state: &SceneState<S>,
    action: &PushAction<S>,
    cfg: &SimConfig,
) -> Result<SceneState<S>, SimError> {
    let radius = S::of(cfg.pusher_radius);
    if pusher_blocked(state, action.start, radius) {
        return Err(SimError::StartInCollision);
    }
    let mut next = state.clone();
    let mut cache = WorldCache::new(&next);
    let substep = S::of(cfg.substep);
    let steps = (action.distance / substep).ceil().to_usize().unwrap_or(1).max(1);
    for k in 1..=steps {
        let travel = (S::from_usize(k).unwrap() * substep).min(action.distance);
        let pos = action.start + action.direction * travel;
        resolve_contacts(&mut next, &mut cache, Some(pos), cfg);
    }
    for o in &mut next.objects {
        if !next.workspace.contains_point(o.shape.centroid_at(&o.pose)) {
            o.out_of_bounds = true;
        }
    }
    Ok(next)
}

/// Advance every indexed state by its action; indices without actions pass
/// through unchanged. Equivalent to a serial loop of [`step_push`] per index
/// regardless of worker scheduling.
pub fn step_batch<S: Real>(
    batch: &SimBatch<S>,
    actions: &[Option<PushAction<S>>],
    cfg: &SimConfig,
) -> Result<SimBatch<S>, SimError> {
    if actions.len() != batch.states.len() {
        return Err(SimError::IndexMisalignment {
            actions: actions.len(),
            states: batch.states.len(),
        });
    }
    let states = batch
        .states
        .par_iter()
        .zip(actions.par_iter())
        .map(|(s, a)| match a {
            Some(a) => step_push(s, a, cfg),
            None => Ok(s.clone()),
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(SimBatch::new(states))
}

/// Teleport a pickable object to `place_pose`, lifting it over the clutter.
pub fn apply_pick_place<S: Real>(
    state: &SceneState<S>,
    object_id: ObjectId,
    place_pose: Pose2<S>,
) -> Result<SceneState<S>, SimError> {
    let idx = state.index_of(object_id).ok_or(SimError::UnknownObject(object_id))?;
    if state.objects[idx].movability != Movability::PickOrPush {
        return Err(SimError::NotPickable(object_id));
    }
    if state.placement_blocked(&state.objects[idx].shape, &place_pose, Some(object_id)) {
        return Err(SimError::CollidingPlacement);
    }
    let mut next = state.clone();
    next.objects[idx].pose = place_pose;
    next.objects[idx].out_of_bounds = false;
    Ok(next)
}

/// Drag one object along validated waypoints; the final pose is the last
/// waypoint and every other object is unchanged.
pub fn apply_push_trajectory<S: Real>(
    state: &SceneState<S>,
    object_id: ObjectId,
    waypoints: &[Pose2<S>],
) -> Result<SceneState<S>, SimError> {
    let idx = state.index_of(object_id).ok_or(SimError::UnknownObject(object_id))?;
    let last = *waypoints.last().ok_or(SimError::CollidingTrajectory)?;
    if !crate::motion::waypoints_collision_free(state, object_id, waypoints) {
        return Err(SimError::CollidingTrajectory);
    }
    let mut next = state.clone();
    next.objects[idx].pose = last;
    next.objects[idx].out_of_bounds = false;
    Ok(next)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{Rect, Shape};
    use std::sync::Arc;

    type S = f64;

    fn square_shape(side: f64) -> Arc<Shape<S>> {
        Arc::new(Shape::single(ConvexPolygon::rectangle(Vec2::zero(), side, side)))
    }

    fn obj(id: u32, shape: Arc<Shape<S>>, x: f64, y: f64) -> crate::scene::ObjectState<S> {
        crate::scene::ObjectState {
            id: ObjectId(id),
            shape,
            pose: Pose2::new(x, y, 0.0),
            movability: Movability::PickOrPush,
            friction_scale: 1.0,
            out_of_bounds: false,
        }
    }

    fn scene(objects: Vec<crate::scene::ObjectState<S>>) -> SceneState<S> {
        SceneState {
            workspace: Rect::from_size(1.0, 1.0),
            objects,
            target_id: None,
            rng_seed: 0,
        }
    }

    #[test]
    fn free_space_push_changes_nothing() {
        let s = scene(vec![obj(0, square_shape(0.05), 0.8, 0.8)]);
        let a = PushAction::new(Vec2::new(0.1, 0.1), Vec2::new(1.0, 0.0), 0.05);
        let out = step_push(&s, &a, &SimConfig::default()).unwrap();
        assert_eq!(out.pose_digest(), s.pose_digest());
    }

    #[test]
    fn start_in_collision_is_an_error() {
        let s = scene(vec![obj(0, square_shape(0.05), 0.5, 0.5)]);
        let a = PushAction::new(Vec2::new(0.5, 0.5), Vec2::new(1.0, 0.0), 0.05);
        assert_eq!(step_push(&s, &a, &SimConfig::default()), Err(SimError::StartInCollision));
    }

    #[test]
    fn centered_push_translates_without_rotation() {
        let cfg = SimConfig::default();
        let side = 0.05;
        let s = scene(vec![obj(0, square_shape(side), 0.5, 0.5)]);
        // Start 6 mm clear of the left face, pushing +x through the centroid.
        let gap = 0.006;
        let start_x = 0.5 - side / 2.0 - cfg.pusher_radius - gap;
        let a = PushAction::new(Vec2::new(start_x, 0.5), Vec2::new(1.0, 0.0), 0.05);
        let out = step_push(&s, &a, &cfg).unwrap();
        let dx = out.objects[0].pose.x - 0.5;
        assert!((dx - (0.05 - gap)).abs() < 2.0 * cfg.substep, "dx = {dx}");
        assert!(out.objects[0].pose.theta.abs() < 1e-6);
        assert!(out.objects[0].pose.y - 0.5 < 1e-9);
    }

    #[test]
    fn abutting_squares_push_in_line_matches_fine_substep_oracle() {
        let side = 0.04;
        let sh = square_shape(side);
        let mk = || {
            scene(vec![
                obj(0, sh.clone(), 0.40, 0.5),
                obj(1, sh.clone(), 0.40 + side, 0.5),
            ])
        };
        let a = PushAction::new(Vec2::new(0.40 - side / 2.0 - 0.013, 0.5), Vec2::new(1.0, 0.0), 0.05);
        let coarse = step_push(&mk(), &a, &SimConfig::default()).unwrap();
        let fine_cfg = SimConfig {
            substep: 1e-4,
            ..SimConfig::default()
        };
        let fine = step_push(&mk(), &a, &fine_cfg).unwrap();
        for i in 0..2 {
            let d = Vec2::new(coarse.objects[i].pose.x, coarse.objects[i].pose.y)
                .dist(Vec2::new(fine.objects[i].pose.x, fine.objects[i].pose.y));
            assert!(d < 1e-3, "object {i} coarse/fine mismatch {d}");
        }
        // Both translated; the trailing square moved at least as far as the
        // leading one (minus tolerance).
        let trailing = coarse.objects[0].pose.x - 0.40;
        let leading = coarse.objects[1].pose.x - (0.40 + side);
        assert!(trailing > 1e-3 && leading > 1e-3);
        assert!(trailing >= leading - 1e-3);
    }

    #[test]
    fn batch_of_one_equals_step_push() {
        let s = scene(vec![obj(0, square_shape(0.05), 0.5, 0.5)]);
        let a = PushAction::new(Vec2::new(0.42, 0.5), Vec2::new(1.0, 0.0), 0.05);
        let cfg = SimConfig::default();
        let single = step_push(&s, &a, &cfg).unwrap();
        let batch = step_batch(&SimBatch::new(vec![s]), &[Some(a)], &cfg).unwrap();
        assert_eq!(batch.states[0].pose_digest(), single.pose_digest());
    }

    #[test]
    fn identical_batch_entries_are_bit_identical() {
        let s = scene(vec![obj(0, square_shape(0.05), 0.5, 0.5)]);
        let a = PushAction::new(Vec2::new(0.42, 0.5), Vec2::new(1.0, 0.0), 0.05);
        let cfg = SimConfig::default();
        let batch = step_batch(
            &SimBatch::new(vec![s; 8]),
            &vec![Some(a); 8],
            &cfg,
        )
        .unwrap();
        let d0 = batch.states[0].pose_digest();
        for st in &batch.states[1..] {
            assert_eq!(st.pose_digest(), d0);
        }
    }

    #[test]
    fn misaligned_batch_is_an_error() {
        let s = scene(vec![obj(0, square_shape(0.05), 0.5, 0.5)]);
        let r = step_batch(&SimBatch::new(vec![s]), &[], &SimConfig::default());
        assert!(matches!(r, Err(SimError::IndexMisalignment { .. })));
    }

    #[test]
    fn pick_place_moves_exactly_or_errors() {
        let sh = square_shape(0.05);
        let s = scene(vec![obj(0, sh.clone(), 0.3, 0.3), obj(1, sh.clone(), 0.7, 0.7)]);
        let to = Pose2::new(0.5, 0.5, 0.4);
        let out = apply_pick_place(&s, ObjectId(0), to).unwrap();
        assert_eq!(out.objects[0].pose, to);
        assert_eq!(out.objects[1].pose, s.objects[1].pose);
        // Overlapping placement rejected.
        let bad = apply_pick_place(&s, ObjectId(0), Pose2::new(0.7, 0.7, 0.0));
        assert_eq!(bad.unwrap_err(), SimError::CollidingPlacement);
        // A push-only object cannot be pick-n-placed.
        let mut s2 = s.clone();
        s2.objects[0].movability = Movability::PushOnly;
        assert_eq!(
            apply_pick_place(&s2, ObjectId(0), to).unwrap_err(),
            SimError::NotPickable(ObjectId(0))
        );
    }

    #[test]
    fn pick_place_accepts_tight_clearance() {
        let sh = square_shape(0.05);
        let s = scene(vec![obj(0, sh.clone(), 0.2, 0.2), obj(1, sh.clone(), 0.7, 0.7)]);
        // 1e-5 m clearance to object 1's left face.
        let to = Pose2::new(0.7 - 0.05 - 1e-5, 0.7, 0.0);
        let out = apply_pick_place(&s, ObjectId(0), to).unwrap();
        assert_eq!(out.objects[0].pose, to);
    }

    #[test]
    fn determinism_over_repeated_runs() {
        let sh = square_shape(0.05);
        let s = scene(vec![
            obj(0, sh.clone(), 0.45, 0.5),
            obj(1, sh.clone(), 0.52, 0.51),
        ]);
        let a = PushAction::new(Vec2::new(0.38, 0.49), Vec2::new(1.0, 0.1), 0.05);
        let cfg = SimConfig::default();
        let first = step_push(&s, &a, &cfg).unwrap().pose_digest();
        for _ in 0..99 {
            assert_eq!(step_push(&s, &a, &cfg).unwrap().pose_digest(), first);
        }
    }

    #[test]
    fn out_of_bounds_flagging() {
        let sh = square_shape(0.05);
        let mut s = scene(vec![obj(0, sh, 0.03, 0.5)]);
        s.workspace = Rect::from_size(0.3, 1.0);
        // Push toward the wall until the centroid crosses it.
        let a = PushAction::new(Vec2::new(0.08, 0.5), Vec2::new(-1.0, 0.0), 0.08);
        let out = step_push(&s, &a, &SimConfig::default()).unwrap();
        assert!(out.objects[0].out_of_bounds);
        assert!(out.any_out_of_bounds());
    }
}
