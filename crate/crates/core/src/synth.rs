//! Deterministic synthetic model grid.
//!
//! Values come from a ChaCha8 stream seeded with the caller's seed; each
//! uniform draw is `(next_u64 >> 11) * 2^-53`. Everything downstream uses
//! only IEEE-754 add, multiply and divide, so output bytes are identical on
//! every platform.
//!
//! Model parameters and their ranges (uniform unless noted):
//!
//! | property      | unit    | range                            |
//! |---------------|---------|----------------------------------|
//! | clump_mass    | Msun    | 100 + 9900 u^2                   |
//! | clump_radius  | pc      | [0.1, 2.0)                       |
//! | time          | yr      | [1e4, 1e6)                       |
//! | sfe           |         | [0.01, 0.5)                      |
//! | n_stars       |         | integer in [10, 5000]            |
//! | lbol          | Lsun    | [1, 1e5)                         |
//! | t_dust        | K       | [10, 60)                         |
//! | inclination   | deg     | [0, 90)                          |
//!
//! SEDs have 50 wavelengths from 0.1 um, each 1.2 times the previous, with
//! flux `lbol * k * x^3 / (1 + x^5)` where `x = wavelength * t_dust / 2898`
//! and `k = 1 - inclination / 180`. Tracks have 20 points at
//! `time * i / 20`, with `f = t / (t + time / 4)`, luminosity `lbol * f` and
//! mass `clump_mass * (1 - sfe * f)`.
//!
//! Models are grouped in tens; each group gets one snapshot holding the
//! group means, and the `SnapshotSedModel` relationship links every
//! snapshot to the first model of its group.

use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::catalog::{DatasetSpec, ExperimentSpec, IngestSpec, ProtocolSpec, RelationshipSpec, VectorRole};
use crate::scalar::format_real;
use crate::simdm::{SNAPSHOT_LABEL, SNAPSHOT_SED_MODEL};
use crate::vo::to_canonical_json;

pub const SED_POINTS: usize = 50;
pub const TRACK_POINTS: usize = 20;
pub const GROUP_SIZE: usize = 10;

/// Vocabulary label used for the SED model object type.
pub const SED_LABEL: &str = "urn:simdal:object-type:sed-model";
/// Vocabulary label used for the evolutionary track object type.
pub const TRACK_LABEL: &str = "urn:simdal:object-type:lm-track";

#[derive(Debug, Error)]
pub enum SynthError {
    #[error("the grid needs at least one model")]
    NoModels,
    #[error("IoError: {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    pub clump_mass: f64,
    pub clump_radius: f64,
    pub time: f64,
    pub sfe: f64,
    pub n_stars: i64,
    pub lbol: f64,
    pub t_dust: f64,
    pub inclination: f64,
}

/// Uniform stream over [0, 1) with a documented bit recipe.
struct Uniform(ChaCha8Rng);

impl Uniform {
    fn next(&mut self) -> f64 {
        (self.0.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    fn range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.next()
    }
}

impl ModelParams {
    fn draw(u: &mut Uniform) -> Self {
        let m = u.next();
        Self {
            clump_mass: 100.0 + 9900.0 * m * m,
            clump_radius: u.range(0.1, 2.0),
            time: u.range(1e4, 1e6),
            sfe: u.range(0.01, 0.5),
            n_stars: 10 + (u.next() * 4991.0) as i64,
            lbol: u.range(1.0, 1e5),
            t_dust: u.range(10.0, 60.0),
            inclination: u.range(0.0, 90.0),
        }
    }

    /// (wavelength in um, flux) pairs.
    pub fn sed(&self) -> Vec<(f64, f64)> {
        let k = 1.0 - self.inclination / 180.0;
        let mut wavelength = 0.1;
        (0..SED_POINTS)
            .map(|i| {
                if i > 0 {
                    wavelength *= 1.2;
                }
                let x = wavelength * self.t_dust / 2898.0;
                let x3 = x * x * x;
                (wavelength, self.lbol * k * x3 / (1.0 + x3 * x * x))
            })
            .collect()
    }

    /// (time, luminosity, mass) triples.
    pub fn track(&self) -> Vec<(f64, f64, f64)> {
        (1..=TRACK_POINTS)
            .map(|i| {
                let t = self.time * i as f64 / TRACK_POINTS as f64;
                let f = t / (t + self.time / 4.0);
                (t, self.lbol * f, self.clump_mass * (1.0 - self.sfe * f))
            })
            .collect()
    }
}

/// The `n` models of a grid, in row order.
pub fn models(n: usize, seed: u64) -> Vec<ModelParams> {
    let mut u = Uniform(ChaCha8Rng::seed_from_u64(seed));
    (0..n).map(|_| ModelParams::draw(&mut u)).collect()
}

pub fn model_id(i: usize) -> String {
    format!("m{:06}", i + 1)
}

pub fn snapshot_id(i: usize) -> String {
    format!("s{:06}", i + 1)
}

pub fn track_id(i: usize) -> String {
    format!("t{:06}", i + 1)
}

/// Per-group statistics stored on a snapshot.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SnapshotStats {
    pub clump_mass: f64,
    pub time: f64,
    pub lbol: f64,
    pub lbol_max: f64,
    pub n_models: i64,
}

pub fn snapshots(models: &[ModelParams]) -> Vec<SnapshotStats> {
    models
        .chunks(GROUP_SIZE)
        .map(|g| {
            let n = g.len() as f64;
            let sum = |f: fn(&ModelParams) -> f64| g.iter().map(f).sum::<f64>();
            SnapshotStats {
                clump_mass: sum(|m| m.clump_mass) / n,
                time: sum(|m| m.time) / n,
                lbol: sum(|m| m.lbol) / n,
                lbol_max: g.iter().map(|m| m.lbol).fold(f64::NEG_INFINITY, f64::max),
                n_models: g.len() as i64,
            }
        })
        .collect()
}

/// Counts of what [`generate`] wrote.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GridSummary {
    pub models: usize,
    pub snapshots: usize,
    pub links: usize,
}

struct Out<'a> {
    dir: &'a Path,
}

impl Out<'_> {
    fn write(&self, name: &str, rows: impl FnOnce(&mut csv::Writer<BufWriter<fs::File>>) -> csv::Result<()>) -> Result<(), SynthError> {
        let path = self.dir.join(name);
        let io_err = |source| SynthError::Io {
            path: path.clone(),
            source,
        };
        let file = fs::File::create(&path).map_err(io_err)?;
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(BufWriter::new(file));
        rows(&mut w).map_err(|e| io_err(io::Error::other(e)))?;
        w.into_inner()
            .map_err(|e| io_err(io::Error::other(e.to_string())))?
            .flush()
            .map_err(io_err)
    }

    fn schema(&self, name: &str, props: &[(&str, &str, &str, &str)]) -> Result<(), SynthError> {
        self.write(name, |w| {
            w.write_record(["name", "datatype", "unit", "description"])?;
            for p in props {
                w.write_record([p.0, p.1, p.2, p.3])?;
            }
            Ok(())
        })
    }
}

const MODEL_SCHEMA: [(&str, &str, &str, &str); 8] = [
    ("clump_mass", "real", "Msun", "Clump mass"),
    ("clump_radius", "real", "pc", "Clump radius"),
    ("time", "real", "yr", "Evolutionary time"),
    ("sfe", "real", "", "Star formation efficiency"),
    ("n_stars", "integer", "", "Number of stars in the cluster"),
    ("lbol", "real", "Lsun", "Bolometric luminosity"),
    ("t_dust", "real", "K", "Dust temperature"),
    ("inclination", "real", "deg", "Viewing inclination"),
];

const SNAPSHOT_SCHEMA: [(&str, &str, &str, &str); 5] = [
    ("clump_mass", "real", "Msun", "Mean clump mass of the group"),
    ("time", "real", "yr", "Mean evolutionary time of the group"),
    ("lbol", "real", "Lsun", "Mean bolometric luminosity of the group"),
    ("lbol_max", "real", "Lsun", "Largest bolometric luminosity in the group"),
    ("n_models", "integer", "", "Models in the group"),
];

const TRACK_SCHEMA: [(&str, &str, &str, &str); 3] = [
    ("clump_mass", "real", "Msun", "Initial clump mass"),
    ("final_luminosity", "real", "Lsun", "Luminosity at the last track point"),
    ("final_mass", "real", "Msun", "Mass at the last track point"),
];

/// Writes a grid of `n` models plus its ingest spec (`spec.json`) into
/// `out`, creating the directory if needed.
pub fn generate(n: usize, seed: u64, out: &Path) -> Result<GridSummary, SynthError> {
    if n == 0 {
        return Err(SynthError::NoModels);
    }
    fs::create_dir_all(out).map_err(|source| SynthError::Io {
        path: out.to_owned(),
        source,
    })?;
    let out = Out { dir: out };
    let models = models(n, seed);
    let snaps = snapshots(&models);
    let r = format_real;

    out.schema("sed_models_schema.csv", &MODEL_SCHEMA)?;
    out.write("sed_models.csv", |w| {
        w.write_record(std::iter::once("id").chain(MODEL_SCHEMA.iter().map(|p| p.0)))?;
        for (i, m) in models.iter().enumerate() {
            w.write_record([
                model_id(i),
                r(m.clump_mass),
                r(m.clump_radius),
                r(m.time),
                r(m.sfe),
                m.n_stars.to_string(),
                r(m.lbol),
                r(m.t_dust),
                r(m.inclination),
            ])?;
        }
        Ok(())
    })?;
    out.write("seds.csv", |w| {
        w.write_record(["id", "wavelength", "flux"])?;
        for (i, m) in models.iter().enumerate() {
            let id = model_id(i);
            for (x, y) in m.sed() {
                w.write_record([id.as_str(), &r(x), &r(y)])?;
            }
        }
        Ok(())
    })?;

    out.schema("snapshots_schema.csv", &SNAPSHOT_SCHEMA)?;
    out.write("snapshots.csv", |w| {
        w.write_record(std::iter::once("id").chain(SNAPSHOT_SCHEMA.iter().map(|p| p.0)))?;
        for (i, s) in snaps.iter().enumerate() {
            w.write_record([
                snapshot_id(i),
                r(s.clump_mass),
                r(s.time),
                r(s.lbol),
                r(s.lbol_max),
                s.n_models.to_string(),
            ])?;
        }
        Ok(())
    })?;
    out.write("snapshot_links.csv", |w| {
        w.write_record(["source_id", "target_id"])?;
        for i in 0..snaps.len() {
            w.write_record([snapshot_id(i), model_id(i * GROUP_SIZE)])?;
        }
        Ok(())
    })?;

    out.schema("lm_tracks_schema.csv", &TRACK_SCHEMA)?;
    let tracks: Vec<_> = models.iter().map(ModelParams::track).collect();
    out.write("lm_tracks.csv", |w| {
        w.write_record(std::iter::once("id").chain(TRACK_SCHEMA.iter().map(|p| p.0)))?;
        for (i, (m, t)) in models.iter().zip(&tracks).enumerate() {
            let last = t[t.len() - 1];
            w.write_record([track_id(i), r(m.clump_mass), r(last.1), r(last.2)])?;
        }
        Ok(())
    })?;
    out.write("tracks.csv", |w| {
        w.write_record(["id", "time", "luminosity", "mass"])?;
        for (i, t) in tracks.iter().enumerate() {
            let id = track_id(i);
            for p in t {
                w.write_record([id.as_str(), &r(p.0), &r(p.1), &r(p.2)])?;
            }
        }
        Ok(())
    })?;
    out.write("model_tracks.csv", |w| {
        w.write_record(["source_id", "target_id"])?;
        for i in 0..n {
            w.write_record([model_id(i), track_id(i)])?;
        }
        Ok(())
    })?;

    let spec = grid_spec(seed);
    let path = out.dir.join("spec.json");
    fs::write(&path, to_canonical_json(&spec)).map_err(|source| SynthError::Io { path, source })?;
    Ok(GridSummary {
        models: n,
        snapshots: snaps.len(),
        links: snaps.len(),
    })
}

/// Ingest spec for a generated grid, with paths relative to its directory.
pub fn grid_spec(seed: u64) -> IngestSpec {
    let dataset = |id: &str, name: &str, label: &str, role: VectorRole, vectors: Option<&str>| DatasetSpec {
        id: id.into(),
        name: name.into(),
        object_type_id: None,
        object_type_label: label.into(),
        scalar_csv: format!("{id}.csv").into(),
        schema_csv: format!("{id}_schema.csv").into(),
        vector_csv: vectors.map(PathBuf::from),
        vector_role: role,
    };
    IngestSpec {
        experiment: ExperimentSpec {
            id: "synthetic_grid".into(),
            name: "Synthetic young-cluster model grid".into(),
            description: format!("Generated grid, seed {seed}"),
        },
        protocol: ProtocolSpec {
            id: "grid_generator".into(),
            name: "Synthetic population grid".into(),
            description: "Analytic SEDs and luminosity-mass tracks".into(),
            code_reference: "simdal-forge gen-grid".into(),
        },
        datasets: vec![
            dataset("sed_models", "SED models", SED_LABEL, VectorRole::Sed, Some("seds.csv")),
            dataset("snapshots", "Snapshots", SNAPSHOT_LABEL, VectorRole::None, None),
            dataset("lm_tracks", "L/M evolutionary tracks", TRACK_LABEL, VectorRole::Track, Some("tracks.csv")),
        ],
        relationships: vec![
            RelationshipSpec {
                name: SNAPSHOT_SED_MODEL.into(),
                source_dataset: "snapshots".into(),
                target_dataset: "sed_models".into(),
                pairs_csv: "snapshot_links.csv".into(),
            },
            RelationshipSpec {
                name: "SedModelTrack".into(),
                source_dataset: "sed_models".into(),
                target_dataset: "lm_tracks".into(),
                pairs_csv: "model_tracks.csv".into(),
            },
        ],
    }
}
