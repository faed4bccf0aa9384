//! Candidate action generation: contour/PCA pushes for retrieval, and the
//! tiered place-pose sets for rearrangement.
//!
//! Everything here is deterministic given an explicit seed; per-call
//! generators share no state.

use crate::geometry::{angle_diff, contour_points, min_area_obb, normalize_angle, Pose2, Vec2};
use crate::rng;
use crate::scene::{Movability, ObjectId, PushAction, SceneState};
use crate::sim::pusher_blocked;
use crate::Real;
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum SamplingError {
    #[error("object {0} not found")]
    UnknownObject(ObjectId),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SamplerConfig {
    /// Contour pushes per object.
    pub n_contour: usize,
    /// Add the four principal-axis pushes per object.
    pub use_pca_pushes: bool,
    /// Push travel distance in meters.
    pub push_distance: f64,
    /// Gap between the pusher rim and the object surface at the start pose.
    pub start_gap: f64,
    /// Pusher disc radius (must match the simulator's).
    pub pusher_radius: f64,
    /// Blocked starts are retracted outward up to this far, then discarded.
    pub max_retraction: f64,
    /// Retraction increment.
    pub retraction_step: f64,
    /// Rearrangement: genuinely random place poses per object.
    pub n_place_random: usize,
    /// Rearrangement: near-current/near-goal place poses per object.
    pub n_place_near: usize,
    /// Rearrangement: enable the rotated-bounding-box grid tier.
    pub grid_enabled: bool,
    pub rng_seed: u64,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        Self {
            n_contour: 8,
            use_pca_pushes: true,
            push_distance: 0.05,
            start_gap: 0.005,
            pusher_radius: 0.01,
            max_retraction: 0.05,
            retraction_step: 1e-3,
            n_place_random: 8,
            n_place_near: 8,
            grid_enabled: true,
            rng_seed: 0,
        }
    }
}

/// Distance from `origin` along `dir` to the last boundary crossing of the
/// shape parts (ray cast from inside).
fn ray_exit<S: Real>(
    parts: &[crate::geometry::ConvexPolygon<S>],
    origin: Vec2<S>,
    dir: Vec2<S>,
) -> S {
    let mut t_max = S::zero();
    for part in parts {
        let vs = part.vertices();
        let n = vs.len();
        for i in 0..n {
            let a = vs[i];
            let b = vs[(i + 1) % n];
            let e = b - a;
            let denom = dir.cross(e);
            if denom.abs() <= S::epsilon() {
                continue;
            }
            let rel = a - origin;
            let t = rel.cross(e) / denom;
            let u = rel.cross(dir) / denom;
            if t > S::zero() && u >= S::zero() && u <= S::one() {
                t_max = t_max.max(t);
            }
        }
    }
    t_max
}

/// Retract a blocked start outward along `-direction` until the pusher is
/// collision-free; `None` when the retraction budget runs out.
fn free_start<S: Real>(
    state: &SceneState<S>,
    start: Vec2<S>,
    direction: Vec2<S>,
    cfg: &SamplerConfig,
) -> Option<Vec2<S>> {
    let radius = S::of(cfg.pusher_radius);
    let step = S::of(cfg.retraction_step);
    let max_back = S::of(cfg.max_retraction);
    let mut pos = start;
    let mut backed = S::zero();
    loop {
        if !pusher_blocked(state, pos, radius) {
            return Some(pos);
        }
        backed = backed + step;
        if backed > max_back {
            return None;
        }
        pos = pos - direction * step;
    }
}

/// Push candidates for every object: four PCA-axis pushes plus `n_contour`
/// contour pushes, each directed at the object centroid with the start
/// retracted until collision-free. Ordering is object id, PCA before
/// contour, then contour index.
pub fn sample_retrieval_pushes<S: Real>(
    state: &SceneState<S>,
    cfg: &SamplerConfig,
) -> Vec<PushAction<S>> {
    let mut out = Vec::new();
    let standoff = S::of(cfg.pusher_radius + cfg.start_gap);
    let distance = S::of(cfg.push_distance);
    for obj in &state.objects {
        let parts = obj.world_parts();
        let centroid = obj.shape.centroid_at(&obj.pose);
        if cfg.use_pca_pushes {
            let body_axis = obj.shape.feature_axis();
            let (s, c) = obj.pose.theta.sin_cos();
            let axis = Vec2::new(c * body_axis.x - s * body_axis.y, s * body_axis.x + c * body_axis.y);
            let perp = axis.perp();
            for dir in [axis, -axis, perp, -perp] {
                let t = ray_exit(&parts, centroid, -dir);
                let start = centroid - dir * (t + standoff);
                if let Some(start) = free_start(state, start, dir, cfg) {
                    out.push(PushAction::new(start, dir, distance));
                }
            }
        }
        if cfg.n_contour > 0 {
            if let Ok(samples) = contour_points(&obj.shape, &obj.pose, cfg.n_contour) {
                for (point, inward) in samples {
                    let start = point - inward * standoff;
                    if let Some(start) = free_start(state, start, inward, cfg) {
                        out.push(PushAction::new(start, inward, distance));
                    }
                }
            }
        }
    }
    out
}

/// Ordered place-pose candidates for one object: direct-to-goal first when
/// free, then grid tiling, near-pose samples, and uniform random poses.
/// Near-duplicates (1e-3 m, 1e-2 rad) are removed keeping the first.
pub fn sample_place_poses<S: Real>(
    state: &SceneState<S>,
    object_id: ObjectId,
    goal_pose: Option<Pose2<S>>,
    cfg: &SamplerConfig,
    seed: u64,
) -> Result<Vec<Pose2<S>>, SamplingError> {
    let obj = state.object(object_id).ok_or(SamplingError::UnknownObject(object_id))?;
    let shape = obj.shape.clone();
    let free = |pose: &Pose2<S>| !state.placement_blocked(&shape, pose, Some(object_id));
    let mut out: Vec<Pose2<S>> = Vec::new();
    let mut push_unique = |pose: Pose2<S>, out: &mut Vec<Pose2<S>>| {
        let dup = out.iter().any(|p| {
            p.translation().dist(pose.translation()) < S::of(1e-3)
                && angle_diff(p.theta, pose.theta).abs() < S::of(1e-2)
        });
        if !dup {
            out.push(pose);
        }
    };

    if let Some(goal) = goal_pose {
        if free(&goal) {
            push_unique(goal, &mut out);
        }
    }

    if cfg.grid_enabled {
        let body_pts: Vec<Vec2<S>> = shape
            .parts()
            .iter()
            .flat_map(|p| p.vertices().iter().copied())
            .collect();
        let (phi, bw, bh) = min_area_obb(&body_pts);
        if bw > S::zero() && bh > S::zero() {
            // Box center in body coordinates.
            let u = Vec2::new(phi.cos(), phi.sin());
            let v = u.perp();
            let mut ulo = S::infinity();
            let mut uhi = S::neg_infinity();
            let mut vlo = S::infinity();
            let mut vhi = S::neg_infinity();
            for p in &body_pts {
                ulo = ulo.min(p.dot(u));
                uhi = uhi.max(p.dot(u));
                vlo = vlo.min(p.dot(v));
                vhi = vhi.max(p.dot(v));
            }
            let box_center_body = u * ((ulo + uhi) * S::of(0.5)) + v * ((vlo + vhi) * S::of(0.5));
            // Pose angle that axis-aligns the box.
            let theta = normalize_angle(-phi);
            let (sn, cs) = theta.sin_cos();
            let rotated_center = Vec2::new(
                cs * box_center_body.x - sn * box_center_body.y,
                sn * box_center_body.x + cs * box_center_body.y,
            );
            let ws = state.workspace;
            let nx = (ws.width() / bw).floor().to_usize().unwrap_or(0);
            let ny = (ws.height() / bh).floor().to_usize().unwrap_or(0);
            for i in 0..nx {
                for j in 0..ny {
                    let cell = Vec2::new(
                        ws.min.x + bw * (S::from_usize(i).unwrap() + S::of(0.5)),
                        ws.min.y + bh * (S::from_usize(j).unwrap() + S::of(0.5)),
                    );
                    let t = cell - rotated_center;
                    let pose = Pose2::new(t.x, t.y, theta);
                    if free(&pose) {
                        push_unique(pose, &mut out);
                    }
                }
            }
        }
    }

    // Near poses: half around the goal, the rest around the current pose,
    // truncated-normal via rejection.
    let near_goal_n = cfg.n_place_near / 2;
    let near_current_n = cfg.n_place_near - near_goal_n;
    let sigma_pos = S::of(0.08);
    let sigma_ang = S::of(std::f64::consts::PI / 8.0);
    let mut sample_near =
        |center: Pose2<S>, count: usize, stream_tag: u64, out: &mut Vec<Pose2<S>>| {
            let mut r = rng::stream(seed, &[u64::from(object_id.0), stream_tag]);
            let mut accepted = 0;
            let mut tries = 0;
            while accepted < count && tries < count * 30 {
                tries += 1;
                let gauss = |r: &mut rand_chacha::ChaCha8Rng| {
                    // Box-Muller.
                    let u1: f64 = r.gen_range(f64::EPSILON..1.0);
                    let u2: f64 = r.gen_range(0.0..std::f64::consts::TAU);
                    (-2.0 * u1.ln()).sqrt() * u2.cos()
                };
                let pose = Pose2::new(
                    center.x + sigma_pos * S::of(gauss(&mut r)),
                    center.y + sigma_pos * S::of(gauss(&mut r)),
                    center.theta + sigma_ang * S::of(gauss(&mut r)),
                );
                if state.workspace.contains_point(pose.translation()) && free(&pose) {
                    push_unique(pose, out);
                    accepted += 1;
                }
            }
        };
    if let Some(goal) = goal_pose {
        sample_near(goal, near_goal_n, 1, &mut out);
    }
    sample_near(obj.pose, near_current_n, 0, &mut out);

    // Uniform random poses.
    let mut r = rng::stream(seed, &[u64::from(object_id.0), 2]);
    let mut accepted = 0;
    let mut tries = 0;
    while accepted < cfg.n_place_random && tries < cfg.n_place_random * 30 {
        tries += 1;
        let ws = state.workspace;
        let pose = Pose2::new(
            S::of(r.gen_range(ws.min.x.f64()..ws.max.x.f64())),
            S::of(r.gen_range(ws.min.y.f64()..ws.max.y.f64())),
            S::of(r.gen_range(-std::f64::consts::PI..std::f64::consts::PI)),
        );
        if free(&pose) {
            push_unique(pose, &mut out);
            accepted += 1;
        }
    }
    Ok(out)
}

/// A sampled rearrangement action before motion-plan resolution.
#[derive(Debug, Clone, PartialEq)]
pub enum RempActionRequest<S> {
    PickPlace { object: ObjectId, place: Pose2<S> },
    PushTo { object: ObjectId, target: Pose2<S> },
}

impl<S: Real> RempActionRequest<S> {
    pub fn object(&self) -> ObjectId {
        match self {
            Self::PickPlace { object, .. } | Self::PushTo { object, .. } => *object,
        }
    }

    pub fn final_pose(&self) -> Pose2<S> {
        match self {
            Self::PickPlace { place, .. } => *place,
            Self::PushTo { target, .. } => *target,
        }
    }
}

/// Rearrangement action tier: the simulation-stage action space is a subset
/// of the expansion-stage one.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RempTier {
    Expansion,
    Simulation,
}

/// Whether `pose` is within the rearrangement at-goal tolerance of `goal`.
pub fn pose_at_goal<S: Real>(pose: &Pose2<S>, goal: &Pose2<S>, pos_tol: S, ang_tol: S) -> bool {
    pose.translation().dist(goal.translation()) <= pos_tol
        && angle_diff(pose.theta, goal.theta).abs() <= ang_tol
}

/// Cross product of movable objects and their place poses. Pickable objects
/// yield pick-n-place requests; push-only objects yield push requests
/// resolved lazily by the motion planner. The simulation tier restricts to
/// direct-to-goal plus half the near-goal poses per object.
pub fn sample_remp_actions<S: Real>(
    state: &SceneState<S>,
    goals: &std::collections::BTreeMap<ObjectId, Pose2<S>>,
    tier: RempTier,
    cfg: &SamplerConfig,
    seed: u64,
) -> Vec<RempActionRequest<S>> {
    let pos_tol = S::of(0.01);
    let ang_tol = S::of(0.1);
    let mut out = Vec::new();
    for obj in &state.objects {
        let goal = goals.get(&obj.id).copied();
        let at_goal = goal.map_or(false, |g| pose_at_goal(&obj.pose, &g, pos_tol, ang_tol));
        let poses: Vec<Pose2<S>> = match tier {
            RempTier::Expansion => {
                sample_place_poses(state, obj.id, goal, cfg, seed).unwrap_or_default()
            }
            RempTier::Simulation => {
                // Direct-to-goal plus the near-goal stream only, derived
                // identically to the expansion tier (subset by value).
                let near_cfg = SamplerConfig {
                    grid_enabled: false,
                    n_place_random: 0,
                    n_place_near: cfg.n_place_near / 2 * 2,
                    ..cfg.clone()
                };
                sample_place_poses(state, obj.id, goal, &near_cfg, seed)
                    .unwrap_or_default()
                    .into_iter()
                    .take(1 + cfg.n_place_near / 2)
                    .collect()
            }
        };
        for pose in poses {
            // Skip no-op placements (already there).
            if at_goal && goal.map_or(false, |g| pose_at_goal(&pose, &g, pos_tol, ang_tol)) {
                continue;
            }
            if pose_at_goal(&pose, &obj.pose, S::of(1e-6), S::of(1e-6)) {
                continue;
            }
            out.push(match obj.movability {
                Movability::PickOrPush => RempActionRequest::PickPlace {
                    object: obj.id,
                    place: pose,
                },
                Movability::PushOnly => RempActionRequest::PushTo {
                    object: obj.id,
                    target: pose,
                },
            });
        }
    }
    out
}
