//! Collision-free SE(2) trajectory planning for push (drag) actions:
//! bidirectional RRT with greedy connect, shortcut smoothing, and an
//! independent trajectory checker.
//!
//! The planner budget is an iteration count derived from the configured time
//! limit at a fixed nominal rate, so results are deterministic per seed and
//! independent of host speed.

use crate::geometry::{angle_diff, Pose2, Vec2};
use crate::rng;
use crate::scene::{ObjectId, SceneState};
use crate::Real;
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum MotionError {
    #[error("object {0} not found")]
    UnknownObject(ObjectId),
    #[error("start pose is in collision")]
    StartInCollision,
}

/// Waypoint step bounds: consecutive poses differ by at most these amounts.
pub const STEP_POS: f64 = 0.02;
pub const STEP_ANG: f64 = std::f64::consts::PI / 16.0;
/// SE(2) metric weight: meters per radian.
pub const ANGLE_WEIGHT: f64 = 0.1;
/// Nominal planner throughput used to convert a time limit into an
/// iteration budget.
const ITERS_PER_SECOND: f64 = 50_000.0;

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct MotionConfig {
    /// Budget for in-tree queries, seconds (nominal).
    pub time_limit_in_tree: f64,
    /// Budget when resolving the committed action, seconds (nominal).
    pub time_limit_final: f64,
    /// Shortcut-smoothing attempts after a successful connect.
    pub shortcut_attempts: usize,
}

impl Default for MotionConfig {
    fn default() -> Self {
        Self {
            time_limit_in_tree: 0.2,
            time_limit_final: 2.0,
            shortcut_attempts: 200,
        }
    }
}

/// Dragged-object trajectory: first waypoint is the current pose, last is
/// the final pose; `path_length` is Euclidean over the positions.
#[derive(Debug, Clone, PartialEq)]
pub struct PushTrajectory<S> {
    pub object_id: ObjectId,
    pub waypoints: Vec<Pose2<S>>,
    pub path_length: S,
}

fn se2_dist<S: Real>(a: &Pose2<S>, b: &Pose2<S>) -> S {
    let dp = a.translation().dist(b.translation());
    let da = angle_diff(a.theta, b.theta) * S::of(ANGLE_WEIGHT);
    (dp * dp + da * da).sqrt()
}

fn interpolate<S: Real>(a: &Pose2<S>, b: &Pose2<S>, t: S) -> Pose2<S> {
    let p = a.translation() + (b.translation() - a.translation()) * t;
    Pose2::new(p.x, p.y, a.theta + angle_diff(b.theta, a.theta) * t)
}

fn steps_between<S: Real>(a: &Pose2<S>, b: &Pose2<S>) -> usize {
    let np = (a.translation().dist(b.translation()) / S::of(STEP_POS))
        .ceil()
        .to_usize()
        .unwrap_or(1);
    let na = (angle_diff(a.theta, b.theta).abs() / S::of(STEP_ANG))
        .ceil()
        .to_usize()
        .unwrap_or(1);
    np.max(na).max(1)
}

fn pose_free<S: Real>(state: &SceneState<S>, object_id: ObjectId, pose: &Pose2<S>) -> bool {
    let obj = match state.object(object_id) {
        Some(o) => o,
        None => return false,
    };
    !state.placement_blocked(&obj.shape, pose, Some(object_id))
}

/// Check the straight SE(2) interpolation `a → b` at the step bound;
/// endpoints excluded/included per `include_end`.
fn edge_free<S: Real>(
    state: &SceneState<S>,
    object_id: ObjectId,
    a: &Pose2<S>,
    b: &Pose2<S>,
    include_end: bool,
) -> bool {
    let steps = steps_between(a, b);
    let last = if include_end { steps } else { steps.saturating_sub(1) };
    for k in 1..=last {
        let t = S::from_usize(k).unwrap() / S::from_usize(steps).unwrap();
        if !pose_free(state, object_id, &interpolate(a, b, t)) {
            return false;
        }
    }
    true
}

/// Straight-line drag validity from the object's current pose to `target`
/// (used as the rollout-stage approximation of a push).
pub fn straight_drag_free<S: Real>(
    state: &SceneState<S>,
    object_id: ObjectId,
    target: &Pose2<S>,
) -> bool {
    let obj = match state.object(object_id) {
        Some(o) => o,
        None => return false,
    };
    pose_free(state, object_id, target) && edge_free(state, object_id, &obj.pose, target, true)
}

/// True iff every densified pose along the waypoints is collision-free and
/// inside the workspace (the gate used before applying a push trajectory).
pub fn waypoints_collision_free<S: Real>(
    state: &SceneState<S>,
    object_id: ObjectId,
    waypoints: &[Pose2<S>],
) -> bool {
    if waypoints.is_empty() || state.object(object_id).is_none() {
        return false;
    }
    if !pose_free(state, object_id, &waypoints[0]) {
        return false;
    }
    for w in waypoints.windows(2) {
        if !edge_free(state, object_id, &w[0], &w[1], true) {
            return false;
        }
    }
    true
}

/// Independent trajectory checker: well-formed waypoints starting at the
/// object's current pose, densified footprints all collision-free.
pub fn validate_trajectory<S: Real>(state: &SceneState<S>, traj: &PushTrajectory<S>) -> bool {
    let obj = match state.object(traj.object_id) {
        Some(o) => o,
        None => return false,
    };
    let first = match traj.waypoints.first() {
        Some(f) => f,
        None => return false,
    };
    if first.translation().dist(obj.pose.translation()) > S::of(1e-9)
        || angle_diff(first.theta, obj.pose.theta).abs() > S::of(1e-9)
    {
        return false;
    }
    waypoints_collision_free(state, traj.object_id, &traj.waypoints)
}

fn path_length<S: Real>(waypoints: &[Pose2<S>]) -> S {
    waypoints
        .windows(2)
        .map(|w| w[0].translation().dist(w[1].translation()))
        .sum()
}

fn densify<S: Real>(waypoints: &[Pose2<S>]) -> Vec<Pose2<S>> {
    let mut out = vec![waypoints[0]];
    for w in waypoints.windows(2) {
        let steps = steps_between(&w[0], &w[1]);
        for k in 1..=steps {
            let t = S::from_usize(k).unwrap() / S::from_usize(steps).unwrap();
            out.push(interpolate(&w[0], &w[1], t));
        }
    }
    out
}

struct TreeNode<S> {
    pose: Pose2<S>,
    parent: Option<usize>,
}

fn nearest<S: Real>(tree: &[TreeNode<S>], q: &Pose2<S>) -> usize {
    let mut best = 0;
    let mut best_d = S::infinity();
    for (i, n) in tree.iter().enumerate() {
        let d = se2_dist(&n.pose, q);
        if d < best_d {
            best_d = d;
            best = i;
        }
    }
    best
}

/// Extend `tree` from its nearest node toward `q` in step-bound increments.
/// Returns the index of the last node added (or the nearest node when no
/// progress was possible) and whether `q` was reached.
fn extend<S: Real>(
    state: &SceneState<S>,
    object_id: ObjectId,
    tree: &mut Vec<TreeNode<S>>,
    q: &Pose2<S>,
    greedy: bool,
) -> (usize, bool) {
    let mut cur = nearest(tree, q);
    loop {
        let from = tree[cur].pose;
        let steps = steps_between(&from, q);
        let t = S::one() / S::from_usize(steps).unwrap();
        let next = interpolate(&from, q, t);
        if !pose_free(state, object_id, &next) {
            return (cur, false);
        }
        tree.push(TreeNode {
            pose: next,
            parent: Some(cur),
        });
        cur = tree.len() - 1;
        if steps <= 1 {
            return (cur, true);
        }
        if !greedy {
            return (cur, false);
        }
    }
}

fn trace_path<S: Real>(tree: &[TreeNode<S>], mut idx: usize) -> Vec<Pose2<S>> {
    let mut path = Vec::new();
    loop {
        path.push(tree[idx].pose);
        match tree[idx].parent {
            Some(p) => idx = p,
            None => break,
        }
    }
    path.reverse();
    path
}

/// Bidirectional RRT-connect over SE(2) for dragging `object_id` to
/// `goal_pose` among the other objects. On success the path is
/// shortcut-smoothed and densified to the step bound; `None` when the
/// iteration budget runs out or the goal is unreachable/blocked.
pub fn rrt_connect<S: Real>(
    state: &SceneState<S>,
    object_id: ObjectId,
    goal_pose: Pose2<S>,
    time_limit_s: f64,
    shortcut_attempts: usize,
    seed: u64,
) -> Result<Option<PushTrajectory<S>>, MotionError> {
    let obj = state.object(object_id).ok_or(MotionError::UnknownObject(object_id))?;
    let start = obj.pose;
    if !pose_free(state, object_id, &start) {
        return Err(MotionError::StartInCollision);
    }
    if !pose_free(state, object_id, &goal_pose) {
        return Ok(None);
    }
    if start.translation().dist(goal_pose.translation()) < S::of(1e-12)
        && angle_diff(start.theta, goal_pose.theta).abs() < S::of(1e-12)
    {
        return Ok(Some(PushTrajectory {
            object_id,
            waypoints: vec![start],
            path_length: S::zero(),
        }));
    }

    let mut rng = rng::stream(seed, &[u64::from(object_id.0)]);
    let budget = (time_limit_s * ITERS_PER_SECOND) as usize;
    let mut from_start = vec![TreeNode { pose: start, parent: None }];
    let mut from_goal = vec![TreeNode { pose: goal_pose, parent: None }];
    let ws = state.workspace;
    let mut start_side = true;

    for _ in 0..budget.max(1) {
        let sample = Pose2::new(
            S::of(rng.gen_range(ws.min.x.f64()..ws.max.x.f64())),
            S::of(rng.gen_range(ws.min.y.f64()..ws.max.y.f64())),
            S::of(rng.gen_range(-std::f64::consts::PI..std::f64::consts::PI)),
        );
        let (a, b) = if start_side {
            (&mut from_start, &mut from_goal)
        } else {
            (&mut from_goal, &mut from_start)
        };
        let (new_idx, _) = extend(state, object_id, a, &sample, false);
        let new_pose = a[new_idx].pose;
        let (link_idx, reached) = extend(state, object_id, b, &new_pose, true);
        if reached {
            let (start_leaf, goal_leaf) = if start_side {
                (new_idx, link_idx)
            } else {
                (link_idx, new_idx)
            };
            let mut path = trace_path(&from_start, start_leaf);
            let mut tail = trace_path(&from_goal, goal_leaf);
            tail.reverse();
            path.extend(tail);

            // Shortcut smoothing, then densify to the step bound.
            for _ in 0..shortcut_attempts {
                if path.len() < 3 {
                    break;
                }
                let i = rng.gen_range(0..path.len() - 2);
                let j = rng.gen_range(i + 2..path.len());
                if edge_free(state, object_id, &path[i], &path[j], false) {
                    path.drain(i + 1..j);
                }
            }
            let dense = densify(&path);
            return Ok(Some(PushTrajectory {
                object_id,
                path_length: path_length(&dense),
                waypoints: dense,
            }));
        }
        start_side = !start_side;
    }
    Ok(None)
}
