//! Model persistence: a versioned binary container holding the feature
//! schema, the fitted binner parameters, the layer weights (little-endian
//! IEEE-754 doubles), the training config snapshot, and the seed.

use std::fs::File;
use std::io::{BufReader, BufWriter};
use std::path::Path;
use std::str::FromStr;

use crate::binning::{BinnerConfig, FittedFeature, GaussianBinner};
use crate::bytes::{BinReader, BinWriter};
use crate::error::{Error, Result};
use crate::features::{FeatureGroup, FeatureSchema, PairVectorizer};
use crate::net::mlp::{DenseLayer, Mlp};
use crate::net::{NRRModel, TrainConfig};

const MODEL_MAGIC: &[u8; 4] = b"NRRM";
const MODEL_VERSION: u32 = 1;

impl NRRModel {
    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = BinWriter::new(BufWriter::new(file));
        let io = |e| Error::io(path, e);

        w.u32(u32::from_le_bytes(*MODEL_MAGIC)).map_err(io)?;
        w.u32(MODEL_VERSION).map_err(io)?;

        // Training config snapshot.
        let c = self.config();
        w.f64(c.learning_rate).map_err(io)?;
        w.u32(c.epochs as u32).map_err(io)?;
        w.f64(c.dropout).map_err(io)?;
        w.u32(c.batch_size as u32).map_err(io)?;
        w.u64(c.seed).map_err(io)?;
        w.u32(c.bins.k as u32).map_err(io)?;
        w.f64(c.bins.gamma).map_err(io)?;

        // Schema.
        let schema = self.schema();
        w.u32(schema.groups().len() as u32).map_err(io)?;
        for g in schema.groups() {
            w.str(g.name()).map_err(io)?;
        }
        w.u32(schema.dropped().len() as u32).map_err(io)?;
        for d in schema.dropped() {
            w.str(d).map_err(io)?;
        }
        w.u32(schema.emb_dim().unwrap_or(0) as u32).map_err(io)?;

        // Binner.
        let binner = self.binner();
        w.u32(binner.config().k as u32).map_err(io)?;
        w.f64(binner.config().gamma).map_err(io)?;
        let features: Vec<_> = binner.features().collect();
        w.u32(features.len() as u32).map_err(io)?;
        for (name, f) in features {
            w.str(name).map_err(io)?;
            w.f64(f.f_min).map_err(io)?;
            w.f64(f.f_max).map_err(io)?;
            w.f64(f.sigma).map_err(io)?;
            w.u32(f.centers.len() as u32).map_err(io)?;
            w.f64_slice(&f.centers).map_err(io)?;
        }

        // Network weights.
        let mlp = self.mlp();
        w.u32(mlp.layers.len() as u32).map_err(io)?;
        for layer in &mlp.layers {
            w.u32(layer.in_dim as u32).map_err(io)?;
            w.u32(layer.out_dim as u32).map_err(io)?;
            w.f64_slice(&layer.weights).map_err(io)?;
            w.f64_slice(&layer.bias).map_err(io)?;
        }
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        let mut r = BinReader::new(BufReader::new(file), path);
        r.expect_magic(MODEL_MAGIC, "ranking model")?;
        let version = r.u32()?;
        if version != MODEL_VERSION {
            return Err(r.corrupt(format!("unsupported model version {version}")));
        }

        let config = TrainConfig {
            learning_rate: r.f64()?,
            epochs: r.u32()? as usize,
            dropout: r.f64()?,
            batch_size: r.u32()? as usize,
            seed: r.u64()?,
            bins: BinnerConfig {
                k: r.u32()? as usize,
                gamma: r.f64()?,
            },
        };

        let n_groups = r.u32()? as usize;
        let mut groups = Vec::with_capacity(n_groups);
        for _ in 0..n_groups {
            let name = r.str()?;
            groups.push(
                FeatureGroup::from_str(&name)
                    .map_err(|_| r.corrupt(format!("unknown feature group {name:?}")))?,
            );
        }
        let n_dropped = r.u32()? as usize;
        let mut dropped = Vec::with_capacity(n_dropped);
        for _ in 0..n_dropped {
            dropped.push(r.str()?);
        }
        let emb_dim = match r.u32()? {
            0 => None,
            d => Some(d as usize),
        };
        let mut schema = FeatureSchema::with_groups(&groups, emb_dim)
            .map_err(|e| r.corrupt(format!("invalid stored schema: {e}")))?;
        for d in &dropped {
            schema.drop_feature(d);
        }

        let binner_config = BinnerConfig {
            k: r.u32()? as usize,
            gamma: r.f64()?,
        };
        let n_features = r.u32()? as usize;
        let mut features = Vec::with_capacity(n_features);
        for _ in 0..n_features {
            let name = r.str()?;
            let f_min = r.f64()?;
            let f_max = r.f64()?;
            let sigma = r.f64()?;
            let n_centers = r.u32()? as usize;
            if n_centers != binner_config.k {
                return Err(r.corrupt("bin center count does not match k"));
            }
            let centers = r.f64_vec(n_centers)?;
            features.push((
                name,
                FittedFeature {
                    f_min,
                    f_max,
                    centers,
                    sigma,
                },
            ));
        }
        let binner = GaussianBinner::from_parts(binner_config, features);

        let n_layers = r.u32()? as usize;
        if n_layers == 0 || n_layers > 64 {
            return Err(r.corrupt(format!("implausible layer count {n_layers}")));
        }
        let mut layers = Vec::with_capacity(n_layers);
        for _ in 0..n_layers {
            let in_dim = r.u32()? as usize;
            let out_dim = r.u32()? as usize;
            if in_dim == 0 || out_dim == 0 || in_dim * out_dim > (1 << 26) {
                return Err(r.corrupt("implausible layer shape"));
            }
            let weights = r.f64_vec(in_dim * out_dim)?;
            let bias = r.f64_vec(out_dim)?;
            layers.push(DenseLayer {
                in_dim,
                out_dim,
                weights,
                bias,
            });
        }
        let mlp = Mlp { layers };

        let vectorizer = PairVectorizer::new(schema, binner);
        if vectorizer.input_dim() != mlp.input_dim() {
            return Err(r.corrupt(format!(
                "schema input width {} does not match network input width {}",
                vectorizer.input_dim(),
                mlp.input_dim()
            )));
        }
        Ok(NRRModel::from_parts(vectorizer, mlp, config))
    }
}
