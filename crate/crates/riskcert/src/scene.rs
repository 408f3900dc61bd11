//! Scene description: JSON parsing/serialization, validation, and scenario
//! generators.
//!
//! Format version `riskcert-scene/1`. Top level `{"version", "links",
//! "obstacles"}`; a link carries a name, shape, and pose; an obstacle adds
//! a 3x3 row-major covariance and a `frame` ("local" by default, matching
//! the convention that covariances are expressed in the obstacle frame).

use crate::convex::ConvexBody;
use crate::math::{check_covariance, Mat3, MathError, Pose, Vec3};
use crate::shadow::{ShadowError, UncertainObstacle};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const SCENE_FORMAT_VERSION: &str = "riskcert-scene/1";

#[derive(Debug, Error)]
pub enum SceneError {
    #[error("SYNTAX_ERROR: {0}")]
    Syntax(#[from] serde_json::Error),
    #[error("UNSUPPORTED_VERSION: expected {expected}, got {got}")]
    Version { expected: String, got: String },
    #[error("UNKNOWN_SHAPE_KIND: '{kind}' in '{name}'")]
    UnknownShapeKind { name: String, kind: String },
    #[error("BAD_SHAPE: '{name}': {message}")]
    BadShape { name: String, message: String },
    #[error("NON_PSD_COVARIANCE: obstacle '{name}': {source}")]
    NonPsdCovariance { name: String, source: MathError },
    #[error("NON_ORTHONORMAL_ROTATION: '{name}': {source}")]
    NonOrthonormalRotation { name: String, source: MathError },
    #[error("DUPLICATE_NAME: '{0}'")]
    DuplicateName(String),
    #[error("UNSERIALIZABLE_SHAPE: '{name}' is not one of box/sphere/polytope/cylinder")]
    Unserializable { name: String },
}

/// Which frame an obstacle covariance is expressed in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum CovarianceFrame {
    #[default]
    Local,
    World,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Link {
    pub name: String,
    pub body: ConvexBody,
    pub pose: Pose,
}

impl Link {
    /// Link geometry placed at its pose.
    pub fn posed(&self) -> ConvexBody {
        self.body.clone().posed(self.pose)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SceneObstacle {
    pub name: String,
    pub obstacle: UncertainObstacle,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Scene {
    pub links: Vec<Link>,
    pub obstacles: Vec<SceneObstacle>,
}

impl Scene {
    /// All link bodies in scene order, posed, ready for certification.
    pub fn posed_links(&self) -> Vec<ConvexBody> {
        self.links.iter().map(Link::posed).collect()
    }
}

// ---- wire structures ------------------------------------------------------

#[derive(Serialize, Deserialize)]
struct SceneDoc {
    version: String,
    #[serde(default)]
    links: Vec<LinkDoc>,
    #[serde(default)]
    obstacles: Vec<ObstacleDoc>,
}

#[derive(Serialize, Deserialize)]
struct LinkDoc {
    name: String,
    shape: ShapeDoc,
    pose: PoseDoc,
}

#[derive(Serialize, Deserialize)]
struct ObstacleDoc {
    name: String,
    shape: ShapeDoc,
    pose: PoseDoc,
    covariance: [[f64; 3]; 3],
    #[serde(default)]
    frame: CovarianceFrame,
}

/// Shape with an open `kind` tag so unknown kinds surface as a dedicated
/// error instead of a generic syntax failure.
#[derive(Serialize, Deserialize)]
struct ShapeDoc {
    kind: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    half_extents: Option<[f64; 3]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    radius: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    half_height: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    vertices: Option<Vec<[f64; 3]>>,
}

#[derive(Serialize, Deserialize)]
struct PoseDoc {
    rotation: [[f64; 3]; 3],
    translation: [f64; 3],
}

fn vec3(a: [f64; 3]) -> Vec3 {
    Vec3::new(a[0], a[1], a[2])
}

fn mat3(rows: [[f64; 3]; 3]) -> Mat3 {
    Mat3::new(
        rows[0][0], rows[0][1], rows[0][2], rows[1][0], rows[1][1], rows[1][2], rows[2][0],
        rows[2][1], rows[2][2],
    )
}

fn mat3_rows(m: &Mat3) -> [[f64; 3]; 3] {
    [
        [m[(0, 0)], m[(0, 1)], m[(0, 2)]],
        [m[(1, 0)], m[(1, 1)], m[(1, 2)]],
        [m[(2, 0)], m[(2, 1)], m[(2, 2)]],
    ]
}

fn shape_to_body(name: &str, s: &ShapeDoc) -> Result<ConvexBody, SceneError> {
    let bad = |message: String| SceneError::BadShape {
        name: name.to_string(),
        message,
    };
    let missing = |field: &str| bad(format!("missing field '{field}'"));
    match s.kind.as_str() {
        "box" => {
            let h = s.half_extents.ok_or_else(|| missing("half_extents"))?;
            ConvexBody::cuboid(vec3(h)).map_err(|e| bad(e.to_string()))
        }
        "sphere" => {
            let r = s.radius.ok_or_else(|| missing("radius"))?;
            ConvexBody::sphere(r).map_err(|e| bad(e.to_string()))
        }
        "cylinder" => {
            let r = s.radius.ok_or_else(|| missing("radius"))?;
            let h = s.half_height.ok_or_else(|| missing("half_height"))?;
            ConvexBody::cylinder(r, h).map_err(|e| bad(e.to_string()))
        }
        "polytope" => {
            let vs = s.vertices.as_ref().ok_or_else(|| missing("vertices"))?;
            ConvexBody::polytope(vs.iter().map(|&v| vec3(v)).collect())
                .map_err(|e| bad(e.to_string()))
        }
        other => Err(SceneError::UnknownShapeKind {
            name: name.to_string(),
            kind: other.to_string(),
        }),
    }
}

fn body_to_shape(name: &str, body: &ConvexBody) -> Result<ShapeDoc, SceneError> {
    let mut doc = ShapeDoc {
        kind: String::new(),
        half_extents: None,
        radius: None,
        half_height: None,
        vertices: None,
    };
    match body {
        ConvexBody::Box(h) => {
            doc.kind = "box".into();
            doc.half_extents = Some([h.x, h.y, h.z]);
        }
        ConvexBody::Sphere(r) => {
            doc.kind = "sphere".into();
            doc.radius = Some(*r);
        }
        ConvexBody::Cylinder {
            radius,
            half_height,
        } => {
            doc.kind = "cylinder".into();
            doc.radius = Some(*radius);
            doc.half_height = Some(*half_height);
        }
        ConvexBody::Polytope(vs) => {
            doc.kind = "polytope".into();
            doc.vertices = Some(vs.iter().map(|v| [v.x, v.y, v.z]).collect());
        }
        _ => {
            return Err(SceneError::Unserializable {
                name: name.to_string(),
            })
        }
    }
    Ok(doc)
}

fn pose_from_doc(name: &str, p: &PoseDoc) -> Result<Pose, SceneError> {
    Pose::new(mat3(p.rotation), vec3(p.translation)).map_err(|source| {
        SceneError::NonOrthonormalRotation {
            name: name.to_string(),
            source,
        }
    })
}

/// Parses and validates a scene document.
pub fn parse_scene(text: &str) -> Result<Scene, SceneError> {
    let doc: SceneDoc = serde_json::from_str(text)?;
    if doc.version != SCENE_FORMAT_VERSION {
        return Err(SceneError::Version {
            expected: SCENE_FORMAT_VERSION.to_string(),
            got: doc.version,
        });
    }
    let mut names = std::collections::HashSet::new();
    let mut scene = Scene::default();
    for l in &doc.links {
        if !names.insert(l.name.clone()) {
            return Err(SceneError::DuplicateName(l.name.clone()));
        }
        scene.links.push(Link {
            name: l.name.clone(),
            body: shape_to_body(&l.name, &l.shape)?,
            pose: pose_from_doc(&l.name, &l.pose)?,
        });
    }
    for o in &doc.obstacles {
        if !names.insert(o.name.clone()) {
            return Err(SceneError::DuplicateName(o.name.clone()));
        }
        let body = shape_to_body(&o.name, &o.shape)?;
        let pose = pose_from_doc(&o.name, &o.pose)?;
        let cov = mat3(o.covariance);
        check_covariance(&cov).map_err(|source| SceneError::NonPsdCovariance {
            name: o.name.clone(),
            source,
        })?;
        let sigma_local = match o.frame {
            CovarianceFrame::Local => cov,
            // Σ_local = Rᵀ Σ_world R with R the local→world rotation
            CovarianceFrame::World => pose.rotation.transpose() * cov * pose.rotation,
        };
        let obstacle = UncertainObstacle::new(body, pose, sigma_local).map_err(|e| match e {
            ShadowError::Math(source) => SceneError::NonPsdCovariance {
                name: o.name.clone(),
                source,
            },
            other => SceneError::BadShape {
                name: o.name.clone(),
                message: other.to_string(),
            },
        })?;
        scene.obstacles.push(SceneObstacle {
            name: o.name.clone(),
            obstacle,
        });
    }
    Ok(scene)
}

/// Serializes a scene back to the wire format (local-frame covariances,
/// normalized field order). `parse_scene ∘ serialize_scene` is identity.
pub fn serialize_scene(scene: &Scene) -> Result<String, SceneError> {
    let doc = SceneDoc {
        version: SCENE_FORMAT_VERSION.to_string(),
        links: scene
            .links
            .iter()
            .map(|l| {
                Ok(LinkDoc {
                    name: l.name.clone(),
                    shape: body_to_shape(&l.name, &l.body)?,
                    pose: PoseDoc {
                        rotation: mat3_rows(&l.pose.rotation),
                        translation: [l.pose.translation.x, l.pose.translation.y, l.pose.translation.z],
                    },
                })
            })
            .collect::<Result<_, SceneError>>()?,
        obstacles: scene
            .obstacles
            .iter()
            .map(|o| {
                Ok(ObstacleDoc {
                    name: o.name.clone(),
                    shape: body_to_shape(&o.name, &o.obstacle.nominal)?,
                    pose: PoseDoc {
                        rotation: mat3_rows(&o.obstacle.pose.rotation),
                        translation: [
                            o.obstacle.pose.translation.x,
                            o.obstacle.pose.translation.y,
                            o.obstacle.pose.translation.z,
                        ],
                    },
                    covariance: mat3_rows(&o.obstacle.sigma_local),
                    frame: CovarianceFrame::Local,
                })
            })
            .collect::<Result<_, SceneError>>()?,
    };
    Ok(serde_json::to_string_pretty(&doc).expect("serialization cannot fail"))
}

/// n links on a circle of the given radius around a central obstacle:
/// the symmetric near-worst case for broad-phase screening.
pub fn gen_ring_scene(center_obstacle: ConvexBody, n_links: usize, radius: f64) -> Scene {
    let mut scene = Scene::default();
    for i in 0..n_links {
        let angle = 2.0 * std::f64::consts::PI * i as f64 / n_links as f64;
        scene.links.push(Link {
            name: format!("link{i}"),
            body: ConvexBody::cuboid(Vec3::new(0.25, 0.25, 0.25)).expect("valid"),
            pose: Pose::translation(Vec3::new(radius * angle.cos(), radius * angle.sin(), 0.0)),
        });
    }
    scene.obstacles.push(SceneObstacle {
        name: "center".to_string(),
        obstacle: UncertainObstacle::new(center_obstacle, Pose::identity(), Mat3::identity() * 0.01)
            .expect("valid covariance"),
    });
    scene
}

/// Ring of links around a cluster of obstacles; the bench harness sweeps
/// both counts.
pub fn gen_multi_ring_scene(n_links: usize, n_obstacles: usize, radius: f64) -> Scene {
    let mut scene = gen_ring_scene(
        ConvexBody::cuboid(Vec3::new(0.25, 0.25, 0.25)).expect("valid"),
        n_links,
        radius,
    );
    scene.obstacles.clear();
    for j in 0..n_obstacles {
        // small vertical offsets keep obstacles distinct while giving
        // each one the same per-query workload
        let offset = Vec3::new(0.0, 0.0, 0.02 * j as f64);
        scene.obstacles.push(SceneObstacle {
            name: format!("obstacle{j}"),
            obstacle: UncertainObstacle::new(
                ConvexBody::cuboid(Vec3::new(0.25, 0.25, 0.25)).expect("valid"),
                Pose::translation(offset),
                Mat3::identity() * 0.01,
            )
            .expect("valid covariance"),
        });
    }
    scene
}

/// Scales every obstacle covariance by `alpha`, leaving geometry untouched.
pub fn scale_covariances(scene: &Scene, alpha: f64) -> Scene {
    let mut out = scene.clone();
    for o in &mut out.obstacles {
        o.obstacle.sigma_local *= alpha;
    }
    out
}
