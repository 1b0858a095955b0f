//! Pipeline configuration: one flat JSON object, overridable field by field
//! from the command line.

use std::fs;
use std::path::{Path, PathBuf};

use clap::Args;
use duskfcm_core::clustering::{ClusterConfig, Method};
use duskfcm_core::pipeline::{RefinerKind, SegmentConfig};
use duskfcm_core::refine::RefineConfig;
use duskfcm_core::texture::GlcmConfig;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Environment variable that replaces the configured seed.
pub const SEED_ENV: &str = "DUSKFCM_SEED";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum ReportFormat {
    Json,
    Csv,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    /// Dataset root with `images/` and optional `masks/`.
    pub dataset: Option<PathBuf>,
    pub method: Method,
    pub clusters: usize,
    pub fuzzifier: f64,
    pub max_iter: usize,
    pub epsilon: f64,
    pub alpha: f64,
    pub p: f64,
    pub q: f64,
    pub spatial_window: usize,
    /// Kernel bandwidth; absent means estimated per image.
    pub sigma: Option<f64>,
    pub levels: usize,
    pub offsets: Vec<(i32, i32)>,
    pub symmetric: bool,
    pub texture_window: usize,
    pub color_window: usize,
    pub refiner: RefinerKind,
    pub grow_threshold: f64,
    pub min_area: Option<usize>,
    pub closing_radius: usize,
    pub seed_quantile: f64,
    pub selected_features: Option<Vec<String>>,
    pub output: PathBuf,
    pub formats: Vec<ReportFormat>,
    pub seed: u64,
    /// Worker threads; 0 uses every available core.
    pub jobs: usize,
    /// Write `<id>_texture.csv` and `<id>_color.csv` per sample.
    pub export_features: bool,
    /// Write `<id>_trace.csv` per sample.
    pub export_traces: bool,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        let seg = SegmentConfig::default();
        Self::from_segment(&seg, None, PathBuf::from("out"))
    }
}

impl PipelineConfig {
    pub fn from_segment(seg: &SegmentConfig, dataset: Option<PathBuf>, output: PathBuf) -> Self {
        let c = &seg.cluster;
        Self {
            dataset,
            method: seg.method,
            clusters: c.c,
            fuzzifier: c.m,
            max_iter: c.max_iter,
            epsilon: c.epsilon,
            alpha: c.alpha,
            p: c.p,
            q: c.q,
            spatial_window: c.window,
            sigma: c.sigma,
            levels: seg.glcm.levels,
            offsets: seg.glcm.offsets.clone(),
            symmetric: seg.glcm.symmetric,
            texture_window: seg.glcm.window,
            color_window: seg.color_window,
            refiner: seg.refiner,
            grow_threshold: seg.refine.grow_threshold,
            min_area: seg.refine.min_area,
            closing_radius: seg.refine.closing_radius,
            seed_quantile: seg.refine.seed_quantile,
            selected_features: seg.selected_features.clone(),
            output,
            formats: vec![ReportFormat::Json, ReportFormat::Csv],
            seed: c.seed,
            jobs: 0,
            export_features: false,
            export_traces: false,
        }
    }

    pub fn segment_config(&self) -> SegmentConfig {
        SegmentConfig {
            method: self.method,
            cluster: ClusterConfig {
                c: self.clusters,
                m: self.fuzzifier,
                max_iter: self.max_iter,
                epsilon: self.epsilon,
                alpha: self.alpha,
                p: self.p,
                q: self.q,
                window: self.spatial_window,
                sigma: self.sigma,
                seed: self.seed,
            },
            glcm: GlcmConfig {
                levels: self.levels,
                offsets: self.offsets.clone(),
                symmetric: self.symmetric,
                window: self.texture_window,
            },
            color_window: self.color_window,
            refiner: self.refiner,
            refine: RefineConfig {
                grow_threshold: self.grow_threshold,
                min_area: self.min_area,
                closing_radius: self.closing_radius,
                seed_quantile: self.seed_quantile,
            },
            selected_features: self.selected_features.clone(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.segment_config().validate()?;
        if self.formats.is_empty() {
            return Err(Error::Config("no report format selected".into()));
        }
        if let Some(names) = &self.selected_features {
            let known: Vec<&str> = duskfcm_core::features::fused_feature_names().collect();
            if let Some(bad) = names.iter().find(|n| !known.contains(&n.as_str())) {
                return Err(Error::Config(format!("unknown feature {bad:?}")));
            }
        }
        Ok(())
    }

    /// Dataset root, which every dataset-reading command needs.
    pub fn dataset_root(&self) -> Result<&Path> {
        self.dataset.as_deref().ok_or_else(|| Error::Config("no dataset given".into()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(Error::io(path))?;
        serde_json::from_str(&text).map_err(|source| Error::Json { path: path.to_path_buf(), source })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut text = serde_json::to_string_pretty(self).expect("config serializes");
        text.push('\n');
        fs::write(path, text).map_err(Error::io(path))
    }

    /// Config file (or defaults) < `DUSKFCM_SEED` < command-line flags.
    pub fn resolve(file: Option<&Path>, env_seed: Option<&str>, overrides: &Overrides) -> Result<Self> {
        let mut cfg = match file {
            Some(path) => Self::load(path)?,
            None => Self::default(),
        };
        if let Some(s) = env_seed {
            cfg.seed = s.trim().parse().map_err(|_| Error::Config(format!("{SEED_ENV}={s:?} is not a seed")))?;
        }
        overrides.apply(&mut cfg);
        cfg.validate()?;
        Ok(cfg)
    }
}

type OffsetList = Vec<(i32, i32)>;

fn parse_offsets(s: &str) -> std::result::Result<OffsetList, String> {
    s.split(';')
        .map(|pair| {
            let (dx, dy) = pair.split_once(',').ok_or_else(|| format!("offset {pair:?} is not dx,dy"))?;
            let parse = |v: &str| v.trim().parse::<i32>().map_err(|e| format!("offset {pair:?}: {e}"));
            Ok((parse(dx)?, parse(dy)?))
        })
        .collect()
}

fn parse_refiner(s: &str) -> std::result::Result<RefinerKind, String> {
    match s.to_ascii_lowercase().replace('-', "_").as_str() {
        "region_grow" => Ok(RefinerKind::RegionGrow),
        "none" => Ok(RefinerKind::None),
        _ => Err(format!("unknown refiner {s:?}; expected region_grow or none")),
    }
}

/// One optional flag per config field.
#[derive(Debug, Clone, Default, Args)]
pub struct Overrides {
    #[arg(long)]
    pub dataset: Option<PathBuf>,
    #[arg(long)]
    pub method: Option<Method>,
    #[arg(long)]
    pub clusters: Option<usize>,
    #[arg(long)]
    pub fuzzifier: Option<f64>,
    #[arg(long, alias = "max_iter")]
    pub max_iter: Option<usize>,
    #[arg(long)]
    pub epsilon: Option<f64>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub p: Option<f64>,
    #[arg(long)]
    pub q: Option<f64>,
    #[arg(long, alias = "spatial_window")]
    pub spatial_window: Option<usize>,
    #[arg(long)]
    pub sigma: Option<f64>,
    #[arg(long)]
    pub levels: Option<usize>,
    /// Semicolon-separated `dx,dy` pairs, e.g. `1,0;0,1`.
    #[arg(long, value_parser = parse_offsets, allow_hyphen_values = true)]
    pub offsets: Option<OffsetList>,
    #[arg(long)]
    pub symmetric: Option<bool>,
    #[arg(long, alias = "texture_window")]
    pub texture_window: Option<usize>,
    #[arg(long, alias = "color_window")]
    pub color_window: Option<usize>,
    #[arg(long, value_parser = parse_refiner)]
    pub refiner: Option<RefinerKind>,
    #[arg(long, alias = "grow_threshold")]
    pub grow_threshold: Option<f64>,
    #[arg(long, alias = "min_area")]
    pub min_area: Option<usize>,
    #[arg(long, alias = "closing_radius")]
    pub closing_radius: Option<usize>,
    #[arg(long, alias = "seed_quantile")]
    pub seed_quantile: Option<f64>,
    /// Comma-separated feature names.
    #[arg(long, alias = "selected_features", value_delimiter = ',')]
    pub selected_features: Option<Vec<String>>,
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long, value_delimiter = ',')]
    pub formats: Option<Vec<ReportFormat>>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub jobs: Option<usize>,
    #[arg(long, alias = "export_features")]
    pub export_features: Option<bool>,
    #[arg(long, alias = "export_traces")]
    pub export_traces: Option<bool>,
}

impl Overrides {
    pub fn apply(&self, cfg: &mut PipelineConfig) {
        macro_rules! set {
            ($($field:ident),*) => {$(
                if let Some(v) = &self.$field {
                    cfg.$field = v.clone().into();
                }
            )*};
        }
        set!(
            dataset,
            method,
            clusters,
            fuzzifier,
            max_iter,
            epsilon,
            alpha,
            p,
            q,
            spatial_window,
            sigma,
            levels,
            offsets,
            symmetric,
            texture_window,
            color_window,
            refiner,
            grow_threshold,
            min_area,
            closing_radius,
            seed_quantile,
            selected_features,
            output,
            formats,
            seed,
            jobs,
            export_features,
            export_traces
        );
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_round_trip_through_json() {
        let cfg = PipelineConfig::default();
        let text = serde_json::to_string(&cfg).unwrap();
        assert_eq!(serde_json::from_str::<PipelineConfig>(&text).unwrap(), cfg);
        assert_eq!(cfg.segment_config(), SegmentConfig::default());
    }

    #[test]
    fn partial_json_fills_defaults() {
        let cfg: PipelineConfig =
            serde_json::from_str(r#"{"method": "fcm", "refiner": "none", "offsets": [[1, -1]]}"#).unwrap();
        assert_eq!(cfg.method, Method::Fcm);
        assert_eq!(cfg.refiner, RefinerKind::None);
        assert_eq!(cfg.offsets, vec![(1, -1)]);
        assert_eq!(cfg.levels, 8);
    }

    #[test]
    fn unknown_fields_rejected() {
        assert!(serde_json::from_str::<PipelineConfig>(r#"{"clusterz": 3}"#).is_err());
    }

    #[test]
    fn precedence_file_env_flag() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.json");
        fs::write(&path, r#"{"seed": 1, "clusters": 3}"#).unwrap();
        let none = Overrides::default();
        assert_eq!(PipelineConfig::resolve(Some(&path), None, &none).unwrap().seed, 1);
        assert_eq!(PipelineConfig::resolve(Some(&path), Some("7"), &none).unwrap().seed, 7);
        let flag = Overrides { seed: Some(9), clusters: Some(4), ..Default::default() };
        let cfg = PipelineConfig::resolve(Some(&path), Some("7"), &flag).unwrap();
        assert_eq!((cfg.seed, cfg.clusters), (9, 4));
        assert!(PipelineConfig::resolve(Some(&path), Some("x"), &none).is_err());
    }

    #[test]
    fn invalid_values_rejected() {
        let bad = Overrides { fuzzifier: Some(1.0), ..Default::default() };
        assert!(PipelineConfig::resolve(None, None, &bad).is_err());
        let bad = Overrides { selected_features: Some(vec!["nope".into()]), ..Default::default() };
        assert!(PipelineConfig::resolve(None, None, &bad).is_err());
    }

    #[test]
    fn offset_and_refiner_parsing() {
        assert_eq!(parse_offsets("1,0;1,-1").unwrap(), vec![(1, 0), (1, -1)]);
        assert!(parse_offsets("1").is_err());
        assert_eq!(parse_refiner("region-grow").unwrap(), RefinerKind::RegionGrow);
        assert!(parse_refiner("crf").is_err());
    }
}
