use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use gowers_lab::grid_core::{
    rasterize, read_grid, read_shape, GridFunction, GridSpec, RasterOptions, ShapeSpec,
};
use serde::Serialize;

use crate::failure::Failure;
use crate::output::sha256_hex;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Raster {
    /// Cell-centre membership.
    Binary,
    /// Boundary cells hold their subsampled occupancy.
    Fractional,
}

/// Where the set or function comes from and how shapes are rasterized.
#[derive(Debug, Args)]
pub struct InputArgs {
    /// Shape description (JSON) to rasterize.
    #[arg(long, value_name = "FILE", conflicts_with = "grid")]
    pub shape: Option<PathBuf>,

    /// Grid function in the GWRS binary format; it carries its own grid, so
    /// --d, --n and --extent are ignored.
    #[arg(long, value_name = "FILE")]
    pub grid: Option<PathBuf>,

    /// Dimension; needed only when the shape has no dimensional part (an empty union).
    #[arg(long)]
    pub d: Option<usize>,

    /// Cells per axis.
    #[arg(long, default_value_t = 256)]
    pub n: usize,

    /// Half-width L of the grid [-L, L]^d.
    #[arg(long, default_value_t = 1.0)]
    pub extent: f64,

    #[arg(long, value_enum, default_value_t = Raster::Fractional)]
    pub raster: Raster,
}

#[derive(Debug, Clone, Serialize)]
pub struct Source {
    pub kind: &'static str,
    pub path: String,
    pub sha256: String,
}

pub struct Loaded {
    pub function: GridFunction,
    pub source: Source,
}

pub fn read_bytes(path: &Path) -> Result<Vec<u8>, Failure> {
    fs::read(path).map_err(|e| Failure::Config(format!("cannot read {}: {e}", path.display())))
}

pub fn source(kind: &'static str, path: &Path, bytes: &[u8]) -> Source {
    Source {
        kind,
        path: path.display().to_string(),
        sha256: sha256_hex(bytes),
    }
}

impl InputArgs {
    pub fn is_given(&self) -> bool {
        self.shape.is_some() || self.grid.is_some()
    }

    pub fn raster_options(&self) -> RasterOptions {
        match self.raster {
            Raster::Binary => RasterOptions::binary(),
            Raster::Fractional => RasterOptions::default(),
        }
    }

    /// Parses the shape file and the grid it is rasterized on.
    pub fn shape_and_grid(&self, path: &Path) -> Result<(ShapeSpec, GridSpec, Source), Failure> {
        let bytes = read_bytes(path)?;
        let shape = read_shape(&bytes[..])
            .map_err(|e| Failure::Config(format!("{}: {e}", path.display())))?;
        let d = match (shape.dim(), self.d) {
            (Some(s), Some(d)) if s != d => {
                return Err(Failure::Config(format!(
                    "shape has dimension {s} but --d {d} was given"
                )))
            }
            (Some(s), _) => s,
            (None, Some(d)) => d,
            (None, None) => {
                return Err(Failure::Config(
                    "the shape has no dimensional part; pass --d".into(),
                ))
            }
        };
        let grid = GridSpec::new(d, self.extent, self.n)?;
        Ok((shape, grid, source("shape", path, &bytes)))
    }

    pub fn load(&self) -> Result<Loaded, Failure> {
        match (&self.shape, &self.grid) {
            (Some(path), None) => {
                let (shape, grid, source) = self.shape_and_grid(path)?;
                let function = rasterize(&shape, &grid, &self.raster_options())
                    .map_err(|e| Failure::Config(format!("{e}; a larger --extent may help")))?;
                Ok(Loaded { function, source })
            }
            (None, Some(path)) => {
                let bytes = read_bytes(path)?;
                let function = read_grid(&bytes[..])
                    .map_err(|e| Failure::Config(format!("{}: {e}", path.display())))?;
                Ok(Loaded {
                    function,
                    source: source("grid", path, &bytes),
                })
            }
            _ => Err(Failure::Config(
                "give exactly one of --shape or --grid".into(),
            )),
        }
    }
}
