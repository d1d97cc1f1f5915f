//! Plot-data export for the 2D figures: a rasterized true-vs-proxy landscape
//! and the per-seed solution points of both optimizers.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::benchmarks::BenchmarkSpec;
use crate::error::{Error, Result};
use crate::fmt_f64;
use crate::neuralnet::MlpModel;

use super::TrialRecord;

pub const RASTER_SIZE: usize = 200;

/// One 2D experiment's plot data.
#[derive(Debug, Clone)]
pub struct FigureData {
    /// (x, y, true value, proxy value) on a RASTER_SIZE^2 lattice.
    pub raster: Vec<(f64, f64, f64, f64)>,
    /// Per-seed final best points.
    pub points: Vec<TrialRecord>,
}

/// Rasterize the true function and a trained proxy on a shared lattice and
/// collect the per-seed solutions. 2D only.
pub fn export_figure_data(
    spec: &BenchmarkSpec,
    proxy: &MlpModel,
    records: &[TrialRecord],
) -> Result<FigureData> {
    if spec.dim != 2 {
        return Err(Error::InvalidParameter {
            name: "dim",
            reason: format!("landscape rasterization supports only d=2, got {}", spec.dim),
        });
    }
    let step = |axis: usize, k: usize| {
        spec.lower[axis] + k as f64 * spec.range(axis) / (RASTER_SIZE - 1) as f64
    };
    let mut raster = Vec::with_capacity(RASTER_SIZE * RASTER_SIZE);
    for i in 0..RASTER_SIZE {
        let x = step(0, i);
        for j in 0..RASTER_SIZE {
            let y = step(1, j);
            let truth = spec.evaluate(&[x, y])?;
            let approx = proxy.forward(&[x, y])?;
            raster.push((x, y, truth, approx));
        }
    }
    Ok(FigureData {
        raster,
        points: records.to_vec(),
    })
}

impl FigureData {
    /// `x,y,f_true,f_proxy`, row-major over the lattice.
    pub fn write_raster_csv(&self, path: &Path) -> Result<()> {
        let file = File::create(path).map_err(|e| Error::io(format!("creating {path:?}"), e))?;
        let mut w = BufWriter::new(file);
        let io = |e| Error::io("writing raster CSV", e);
        writeln!(w, "x,y,f_true,f_proxy").map_err(io)?;
        for &(x, y, t, p) in &self.raster {
            writeln!(w, "{},{},{},{}", fmt_f64(x), fmt_f64(y), fmt_f64(t), fmt_f64(p))
                .map_err(io)?;
        }
        Ok(())
    }

    /// `optimizer,seed,x0,x1,best_value,distance`.
    pub fn write_points_csv(&self, path: &Path) -> Result<()> {
        let file = File::create(path).map_err(|e| Error::io(format!("creating {path:?}"), e))?;
        let mut w = BufWriter::new(file);
        let io = |e| Error::io("writing points CSV", e);
        writeln!(w, "optimizer,seed,x0,x1,best_value,distance").map_err(io)?;
        for r in &self.points {
            writeln!(
                w,
                "{},{},{},{},{},{}",
                r.optimizer,
                r.seed_index,
                fmt_f64(r.result.best_point[0]),
                fmt_f64(r.result.best_point[1]),
                fmt_f64(r.result.best_value),
                fmt_f64(r.distance)
            )
            .map_err(io)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::benchmarks::{make_spec, BenchmarkFn};
    use crate::neuralnet::build_mlp;

    #[test]
    fn raster_lattice_shape() {
        let spec = make_spec(BenchmarkFn::Rastrigin, 2).unwrap();
        let model = build_mlp(&[2, 4, 1], 0).unwrap();
        let data = export_figure_data(&spec, &model, &[]).unwrap();
        assert_eq!(data.raster.len(), RASTER_SIZE * RASTER_SIZE);
        let (x0, y0, ..) = data.raster[0];
        assert_eq!((x0, y0), (-5.12, -5.12));
        let (xn, yn, ..) = *data.raster.last().unwrap();
        assert!((xn - 5.12).abs() < 1e-12 && (yn - 5.12).abs() < 1e-12);
    }

    #[test]
    fn refuses_high_dim() {
        let spec = make_spec(BenchmarkFn::Rastrigin, 4).unwrap();
        let model = build_mlp(&[4, 4, 1], 0).unwrap();
        assert!(export_figure_data(&spec, &model, &[]).is_err());
    }
}
