//! Model spaces by name. Each factory turns a config into a space, its
//! spectrum and, for graph models, the operator the spectrum came from.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fs::File;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::Config;
use crate::error::{Error, Result};
use crate::graph::{path_laplacian, ring_laplacian, GraphOperator};
use crate::spaces::{
    build_circle_space, build_interval_space, build_pointcloud_space, build_torus_space, read_points_csv,
    Connectivity, DistanceMode, DuplicatePolicy, PointCloudOptions, SpaceModel,
};
use crate::spectrum::{
    analytic_circle_spectrum, analytic_interval_spectrum, analytic_torus_spectrum, discrete_spectrum, Calibration,
    Spectrum,
};

pub struct Model {
    pub space: SpaceModel,
    pub spectrum: Spectrum,
    pub operator: Option<GraphOperator>,
}

pub trait ModelFactory: Send + Sync {
    fn name(&self) -> &'static str;

    fn build(&self, cfg: &Config) -> Result<Model>;
}

struct IntervalFactory;

impl ModelFactory for IntervalFactory {
    fn name(&self) -> &'static str {
        "interval"
    }

    fn build(&self, cfg: &Config) -> Result<Model> {
        Ok(Model {
            space: build_interval_space(cfg.count("nodes", 513)?)?,
            spectrum: analytic_interval_spectrum(cfg.count("modes", 400)?)?,
            operator: None,
        })
    }
}

struct CircleFactory;

impl ModelFactory for CircleFactory {
    fn name(&self) -> &'static str {
        "circle"
    }

    fn build(&self, cfg: &Config) -> Result<Model> {
        let radius = cfg.positive("radius", 1.0)?;
        Ok(Model {
            space: build_circle_space(radius, cfg.count("nodes", 512)?)?,
            spectrum: analytic_circle_spectrum(radius, cfg.count("modes", 801)?)?,
            operator: None,
        })
    }
}

struct TorusFactory;

impl ModelFactory for TorusFactory {
    fn name(&self) -> &'static str {
        "torus"
    }

    fn build(&self, cfg: &Config) -> Result<Model> {
        let r1 = cfg.positive("r1", 1.0)?;
        let r2 = cfg.positive("r2", 1.0)?;
        let n1 = cfg.count("nodes", 32)?;
        let n2 = cfg.count("nodes2", n1)?;
        Ok(Model {
            space: build_torus_space(r1, r2, n1, n2)?,
            spectrum: analytic_torus_spectrum(r1, r2, cfg.count("modes", 2000)?)?,
            operator: None,
        })
    }
}

/// `none`, `factor:<c>` or `first_nonzero:<λ>`.
fn parse_calibration(cfg: &Config, default: Calibration) -> Result<Calibration> {
    let Some(v) = cfg.raw("calibration") else {
        return Ok(default);
    };
    let bad = || Error::Config(format!("cannot parse calibration '{v}' (none | factor:<c> | first_nonzero:<lambda>)"));
    if v == "none" {
        return Ok(Calibration::None);
    }
    let (kind, val) = v.split_once(':').ok_or_else(bad)?;
    let val: f64 = val.trim().parse().map_err(|_| bad())?;
    if !(val > 0.0 && val.is_finite()) {
        return Err(bad());
    }
    match kind.trim() {
        "factor" => Ok(Calibration::Factor(val)),
        "first_nonzero" => Ok(Calibration::FirstNonzero(val)),
        _ => Err(bad()),
    }
}

fn graph_model(space: SpaceModel, op: GraphOperator, cfg: &Config, calibration: Calibration) -> Result<Model> {
    let k = cfg.count("modes", space.len())?.min(space.len());
    let spectrum = discrete_spectrum(&op, &space.weights(), k, parse_calibration(cfg, calibration)?)?;
    Ok(Model {
        space,
        spectrum,
        operator: Some(op),
    })
}

struct RingFactory;

impl ModelFactory for RingFactory {
    fn name(&self) -> &'static str {
        "ring"
    }

    fn build(&self, cfg: &Config) -> Result<Model> {
        let radius = cfg.positive("radius", 1.0)?;
        let n = cfg.count("nodes", 1024)?;
        let space = build_circle_space(radius, n)?;
        let op = ring_laplacian(n, radius)?;
        graph_model(space, op, cfg, Calibration::FirstNonzero(1.0 / (radius * radius)))
    }
}

struct PathFactory;

impl ModelFactory for PathFactory {
    fn name(&self) -> &'static str {
        "path"
    }

    fn build(&self, cfg: &Config) -> Result<Model> {
        let n = cfg.count("nodes", 513)?;
        let space = build_interval_space(n)?;
        let op = path_laplacian(n, PI)?;
        graph_model(space, op, cfg, Calibration::FirstNonzero(1.0))
    }
}

struct PointCloudFactory;

impl PointCloudFactory {
    fn points(cfg: &Config) -> Result<Vec<Vec<f64>>> {
        match (cfg.raw("points"), cfg.raw("sample")) {
            (Some(path), None) => {
                let f = File::open(path).map_err(|e| Error::Config(format!("cannot open points file '{path}': {e}")))?;
                read_points_csv(f)
            }
            (None, Some(sample)) => sample_points(sample, cfg.get_or("seed", 0u64)?),
            (Some(_), Some(_)) => Err(Error::Config("give either 'points' or 'sample', not both".into())),
            (None, None) => Err(Error::Config("point cloud needs 'points=<csv>' or 'sample=circle:<count>'".into())),
        }
    }
}

/// Uniform samples from a known shape: `circle:<count>` (unit circle in the
/// plane) or `torus:<count>` (flat torus embedded in `R^4`).
pub fn sample_points(spec: &str, seed: u64) -> Result<Vec<Vec<f64>>> {
    let (shape, count) = spec
        .split_once(':')
        .ok_or_else(|| Error::Config(format!("cannot parse sample '{spec}'")))?;
    let count: usize = count
        .trim()
        .parse()
        .map_err(|_| Error::Config(format!("cannot parse sample count in '{spec}'")))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut angle = || rng.random_range(0.0..2.0 * PI);
    match shape.trim() {
        "circle" => Ok((0..count)
            .map(|_| {
                let a = angle();
                vec![a.cos(), a.sin()]
            })
            .collect()),
        "torus" => Ok((0..count)
            .map(|_| {
                let (a, b) = (angle(), angle());
                vec![a.cos(), a.sin(), b.cos(), b.sin()]
            })
            .collect()),
        other => Err(Error::Config(format!("unknown sample shape '{other}' (circle | torus)"))),
    }
}

impl ModelFactory for PointCloudFactory {
    fn name(&self) -> &'static str {
        "pointcloud"
    }

    fn build(&self, cfg: &Config) -> Result<Model> {
        let points = Self::points(cfg)?;
        let bandwidth = match cfg.get::<f64>("bandwidth")? {
            Some(b) if b > 0.0 && b.is_finite() => b,
            _ => return Err(Error::Config("point cloud needs a positive 'bandwidth'".into())),
        };
        let connectivity = match (cfg.has("knn"), cfg.has("epsilon")) {
            (true, true) => return Err(Error::Config("give either 'knn' or 'epsilon', not both".into())),
            (false, true) => Connectivity::Epsilon(cfg.positive("epsilon", 1.0)?),
            _ => Connectivity::Knn(cfg.count("knn", 10)?),
        };
        let distance = match cfg.str_or("distance", "ambient") {
            "ambient" => DistanceMode::Ambient,
            "geodesic" => DistanceMode::Geodesic,
            other => return Err(Error::Config(format!("unknown distance '{other}' (ambient | geodesic)"))),
        };
        let duplicates = match cfg.str_or("duplicates", "error") {
            "merge" => DuplicatePolicy::Merge,
            "error" => DuplicatePolicy::Error,
            other => return Err(Error::Config(format!("unknown duplicate policy '{other}' (merge | error)"))),
        };
        let opts = PointCloudOptions {
            connectivity,
            bandwidth,
            distance,
            duplicates,
            alpha: cfg.get_or("alpha", 1.0)?,
            essential_dim: cfg.count("dim", 1)?,
        };
        let (space, op) = build_pointcloud_space(&points, &opts)?;
        let k = cfg.count("modes", 64)?.min(space.len());
        let spectrum = discrete_spectrum(&op, &space.weights(), k, parse_calibration(cfg, Calibration::None)?)?;
        Ok(Model {
            space,
            spectrum,
            operator: Some(op),
        })
    }
}

pub struct ModelRegistry {
    factories: BTreeMap<&'static str, Box<dyn ModelFactory>>,
}

impl ModelRegistry {
    pub fn empty() -> Self {
        Self {
            factories: BTreeMap::new(),
        }
    }

    pub fn register(&mut self, factory: Box<dyn ModelFactory>) {
        self.factories.insert(factory.name(), factory);
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.factories.keys().copied().collect()
    }

    /// Builds the model named by the config's `space` key.
    pub fn build(&self, cfg: &Config) -> Result<Model> {
        let name = cfg.require("space")?;
        let factory = self.factories.get(name).ok_or_else(|| {
            Error::Config(format!("unknown space '{name}' (known: {})", self.names().join(", ")))
        })?;
        factory.build(cfg)
    }
}

impl Default for ModelRegistry {
    fn default() -> Self {
        let mut r = Self::empty();
        r.register(Box::new(IntervalFactory));
        r.register(Box::new(CircleFactory));
        r.register(Box::new(TorusFactory));
        r.register(Box::new(RingFactory));
        r.register(Box::new(PathFactory));
        r.register(Box::new(PointCloudFactory));
        r
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builds_each_registered_model() {
        let reg = ModelRegistry::default();
        assert_eq!(reg.names(), vec!["circle", "interval", "path", "pointcloud", "ring", "torus"]);
        for text in [
            "space=interval\nnodes=33\nmodes=10",
            "space=circle\nnodes=32\nmodes=9",
            "space=torus\nnodes=8\nmodes=20\nr2=0.5",
            "space=ring\nnodes=40\nmodes=9",
            "space=path\nnodes=40\nmodes=9",
            "space=pointcloud\nsample=circle:120\nbandwidth=0.3\nknn=12\nmodes=9\nseed=5",
        ] {
            let cfg = Config::parse(text).unwrap();
            let m = reg.build(&cfg).unwrap_or_else(|e| panic!("{text}: {e}"));
            assert!(m.spectrum.mode_count() >= 9);
            assert!(m.space.len() >= 32);
        }
    }

    #[test]
    fn ring_is_calibrated_to_the_radius() {
        let cfg = Config::parse("space=ring\nradius=2\nnodes=64\nmodes=5").unwrap();
        let m = ModelRegistry::default().build(&cfg).unwrap();
        assert!((m.spectrum.eigenvalue(1) - 0.25).abs() < 1e-12);
    }

    #[test]
    fn config_errors() {
        let reg = ModelRegistry::default();
        for text in [
            "space=sphere",
            "nodes=4",
            "space=pointcloud\nsample=circle:100",
            "space=pointcloud\nsample=square:100\nbandwidth=0.2",
            "space=ring\ncalibration=scale:2",
        ] {
            let cfg = Config::parse(text).unwrap();
            assert!(matches!(reg.build(&cfg), Err(Error::Config(_))), "{text}");
        }
    }

    #[test]
    fn samples_are_seeded() {
        assert_eq!(sample_points("circle:50", 3).unwrap(), sample_points("circle:50", 3).unwrap());
        assert_ne!(sample_points("circle:50", 3).unwrap(), sample_points("circle:50", 4).unwrap());
    }
}
