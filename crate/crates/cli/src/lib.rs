//! The `nlos` command-line pipeline: simulate → calibrate → reconstruct → project.

pub mod args;
pub mod error;
pub mod files;

use std::path::Path;
use std::time::Instant;

use nlos::calibration::{calibrate, AlignReference, CalibrationConfig, Gate, Guard};
use nlos::forward::{simulate, SceneDescription};
use nlos::histogram::cube::{CubeData, TimeHistogramCube};
use nlos::histogram::geometry::SceneGeometry;
use nlos::histogram::io::{save_cube, save_volume};
use nlos::histogram::volume::{VolumeGrid, VoxelVolume};
use nlos::metrics::{argmax, max_intensity_projection, occupancy, peak_to_background, ProjectionAxis};
use nlos::reconstruct::{
    parameter_sweep_with, reconstruct_fbp, reconstruct_phasor, FilterKind, PhasorParams, ReconstructionSpec,
};
use serde_json::json;

use crate::args::{Axis, CalibrateArgs, Cli, Command, Filter, Method, ProjectArgs, ReconstructArgs, SimulateArgs, SweepArgs, VolumeArgs};
use crate::error::{usage, CliError, CliResult};
use crate::files::{read_cube, read_json, read_volume, require_exists, resolve_geometry, write_bytes, write_json, Sidecar};

/// Prefix of every error line on stderr.
pub const ERROR_PREFIX: &str = "nlos: error:";

pub fn run(cli: Cli) -> CliResult<()> {
    let pool = rayon::ThreadPoolBuilder::new().num_threads(cli.threads).build()?;
    pool.install(|| match cli.command {
        Command::Simulate(a) => cmd_simulate(&a),
        Command::Calibrate(a) => cmd_calibrate(&a),
        Command::Reconstruct(a) => cmd_reconstruct(&a),
        Command::Project(a) => cmd_project(&a),
        Command::Sweep(a) => cmd_sweep(&a),
    })
}

fn to_value<T: serde::Serialize>(v: &T) -> serde_json::Value {
    serde_json::to_value(v).expect("serializable config")
}

pub fn cmd_simulate(a: &SimulateArgs) -> CliResult<()> {
    if let Some(p) = &a.scene {
        require_exists(&[p])?;
    }
    let mut desc = match &a.scene {
        Some(p) => read_json::<SceneDescription>(p)?,
        None => SceneDescription::standard(),
    };
    if let Some(seed) = a.seed {
        desc.seed = seed;
    }
    if a.no_poisson {
        desc.poisson = false;
    }
    if a.dark {
        desc.dark = true;
    }
    let sim = simulate(&desc)?;
    save_cube(&sim.cube, &a.out)?;

    let pixels = sim.cube.pixel_count();
    let totals: Vec<f64> = (0..pixels).map(|p| sim.cube.pixel_total(p)).collect();
    let total: f64 = totals.iter().sum();
    let max_pixel_total = totals.iter().copied().fold(0.0, f64::max);
    let max_bin = match sim.cube.data() {
        CubeData::Counts(v) => v.iter().copied().max().unwrap_or(0) as f64,
        CubeData::Real(v) => v.iter().copied().fold(0.0, f64::max),
        CubeData::Complex(_) => unreachable!("simulator emits counts or real cubes"),
    };
    let summary = json!({
        "kind": format!("{:?}", sim.cube.kind()).to_lowercase(),
        "rows": sim.cube.rows(),
        "cols": sim.cube.cols(),
        "bins": sim.cube.bins(),
        "bin_width_ps": sim.cube.bin_width_ps(),
        "target_points": sim.target.len(),
        "total_counts": total,
        "max_pixel_total": max_pixel_total,
        "max_bin_count": max_bin,
        "exposure_s": sim.sensor.exposure_s,
        "repetition_rate_hz": desc.repetition_rate_hz,
        "seed": desc.seed,
    });
    let mut side = Sidecar::new("simulate", to_value(&desc), summary);
    side.geometry = Some(sim.geometry.doc().clone());
    side.write_for(&a.out)?;

    println!("wrote {}", a.out.display());
    println!(
        "cube: {}×{} pixels × {} bins of {} ps ({})",
        sim.cube.rows(),
        sim.cube.cols(),
        sim.cube.bins(),
        sim.cube.bin_width_ps(),
        if desc.poisson { "Poisson counts" } else { "expected counts" }
    );
    println!(
        "exposure: {} s at {} MHz repetition",
        sim.sensor.exposure_s,
        desc.repetition_rate_hz / 1e6
    );
    println!("total counts: {total:.0}");
    println!("per-pixel max: {max_pixel_total:.0} counts");
    Ok(())
}

pub fn cmd_calibrate(a: &CalibrateArgs) -> CliResult<()> {
    let mut inputs: Vec<&Path> = vec![&a.input];
    inputs.extend(a.dark.as_deref());
    inputs.extend(a.geometry.as_deref());
    inputs.extend(a.config.as_deref());
    require_exists(&inputs)?;

    let mut config = match &a.config {
        Some(p) => read_json::<CalibrationConfig>(p)?,
        None => CalibrationConfig::default(),
    };
    if let Some(x) = a.exposure {
        config.exposure_s = x;
    }
    if let Some(x) = a.dcr_threshold {
        config.dcr_threshold = x;
    }
    if a.gate_start.is_some() || a.gate_end.is_some() {
        config.gate = Gate::new(
            a.gate_start.unwrap_or(config.gate.start),
            a.gate_end.unwrap_or(config.gate.end),
        );
    }
    if let Some(b) = a.reference_bin {
        config.reference = AlignReference::Fixed(b);
    }
    if a.median_reference {
        config.reference = AlignReference::Median;
    }
    if let Some(g) = a.guard_bins {
        config.guard = Guard::Bins(g);
    }
    if let Some(k) = a.guard_fwhm {
        config.guard = Guard::FwhmMultiple(k);
    }
    if a.no_strip {
        config.guard = Guard::Off;
    }
    if a.no_return_leg {
        config.compensate_return_leg = false;
    }

    let input_side = Sidecar::read_for(&a.input)?;
    let geometry = resolve_geometry(a.geometry.as_deref(), input_side.as_ref())?;
    let raw = read_cube(&a.input)?;
    let dark = a.dark.as_deref().map(read_cube).transpose()?;
    let cal = calibrate(&raw, dark.as_ref(), &geometry, &config)?;
    save_cube(&cal.cube, &a.out)?;

    let s = &cal.stats;
    let mut side = Sidecar::new(
        "calibrate",
        to_value(&config),
        json!({
            "stats": s,
            "dcr": cal.dcr,
            "delays": cal.delays,
            "fwhm": cal.fwhm,
        }),
    );
    side.geometry = Some(geometry.doc().clone());
    side.alignment = cal.cube.alignment();
    side.write_for(&a.out)?;

    let pct = |f: f64| 100.0 * f;
    println!("wrote {}", a.out.display());
    println!("pixels: {}", s.pixels);
    println!(
        "bad pixels (DCR > {} counts/s): {} ({:.2}%)",
        config.dcr_threshold,
        s.bad_pixels,
        pct(s.bad_pixels as f64 / s.pixels as f64)
    );
    println!("DCR < 100 counts/s: {:.2}% of pixels", pct(s.fraction_dcr_below_100));
    println!("DCR < 1000 counts/s: {:.2}% of pixels", pct(s.fraction_dcr_below_1000));
    println!(
        "delay spread: {} bins ({:.0} ps), offsets {}..{}",
        s.delay_spread_bins, s.delay_spread_ps, s.delay_min_bins, s.delay_max_bins
    );
    println!(
        "FWHM: mean {:.1} ps, min {:.1} ps, max {:.1} ps",
        s.mean_fwhm_ps, s.min_fwhm_ps, s.max_fwhm_ps
    );
    match s.guard_bins {
        Some(g) => println!("first scatter stripped: bins {} ± {g}", cal.delays.reference_bin),
        None => println!("first scatter kept"),
    }
    Ok(())
}

fn reconstruction_spec(v: &VolumeArgs, filter: Option<Filter>) -> CliResult<ReconstructionSpec> {
    if let Some(p) = &v.config {
        require_exists(&[p])?;
    }
    let mut spec = match &v.config {
        Some(p) => read_json::<ReconstructionSpec>(p)?,
        None => ReconstructionSpec::default(),
    };
    if v.voxels.is_some() || v.extent.is_some() {
        let n = v.voxels.unwrap_or(spec.grid.dims[0]);
        let extent = v.extent.unwrap_or(spec.grid.voxel_size * spec.grid.dims[0] as f64);
        if n == 0 || extent.is_nan() || extent <= 0.0 {
            return Err(usage("--voxels and --extent must be positive"));
        }
        spec.grid = VolumeGrid::centered(n, extent);
    }
    if v.attenuation {
        spec.attenuation_compensation = true;
    }
    if let Some(f) = filter {
        spec.filter = match f {
            Filter::None => FilterKind::None,
            Filter::DepthLaplacian => FilterKind::DepthLaplacian,
        };
    }
    Ok(spec)
}

/// Calibrated cube with its alignment restored from the sidecar.
fn read_calibrated(path: &Path) -> CliResult<(TimeHistogramCube, Option<Sidecar>)> {
    let side = Sidecar::read_for(path)?;
    let mut cube = read_cube(path)?;
    match side.as_ref().and_then(|s| s.alignment) {
        Some(al) => cube.set_alignment(Some(al)),
        None => {
            return Err(nlos::Error::NotAligned(format!(
                "{} has no calibration sidecar; run `nlos calibrate` first",
                path.display()
            ))
            .into())
        }
    }
    Ok((cube, side))
}

fn describe_peak(volume: &VoxelVolume) -> serde_json::Value {
    let values = volume.magnitude();
    let grid = volume.grid();
    let idx = argmax(&values).expect("non-empty volume");
    let [ix, iy, iz] = grid.unravel(idx);
    let c = grid.center(ix, iy, iz);
    json!({
        "argmax_voxel": [ix, iy, iz],
        "argmax_position_m": [c.x, c.y, c.z],
        "max": values[idx],
        "peak_to_background": peak_to_background(&values),
    })
}

pub fn cmd_reconstruct(a: &ReconstructArgs) -> CliResult<()> {
    let params = match (a.method, a.lambda, a.sigma) {
        (Method::Fbp, None, None) => None,
        (Method::Fbp, _, _) => return Err(usage("--lambda and --sigma apply only to --method phasor")),
        (Method::Phasor, Some(lambda), Some(sigma)) => Some(PhasorParams::new(lambda, sigma)),
        (Method::Phasor, _, _) => return Err(usage("--method phasor requires both --lambda and --sigma")),
    };
    if params.is_some() && a.filter.is_some() {
        return Err(usage("--filter applies only to --method fbp"));
    }
    let mut inputs: Vec<&Path> = vec![&a.input];
    inputs.extend(a.volume.geometry.as_deref());
    require_exists(&inputs)?;
    let spec = reconstruction_spec(&a.volume, a.filter)?;
    let (cube, side) = read_calibrated(&a.input)?;
    let geometry = resolve_geometry(a.volume.geometry.as_deref(), side.as_ref())?;

    let start = Instant::now();
    let volume = match params {
        None => reconstruct_fbp(&cube, &geometry, &spec)?,
        Some(p) => reconstruct_phasor(&cube, &geometry, &spec, p)?,
    };
    let seconds = start.elapsed().as_secs_f64();
    save_volume(&volume, &a.out)?;

    let paths = (spec.grid.len() * geometry.pixel_count()) as f64;
    let mut summary = describe_peak(&volume);
    summary["seconds"] = json!(seconds);
    summary["paths_per_second"] = json!(paths / seconds);
    let config = json!({
        "method": match a.method { Method::Fbp => "fbp", Method::Phasor => "phasor" },
        "phasor": params,
        "spec": spec,
    });
    let mut out_side = Sidecar::new("reconstruct", config, summary.clone());
    out_side.geometry = Some(geometry.doc().clone());
    out_side.write_for(&a.out)?;

    let [nx, ny, nz] = spec.grid.dims;
    println!("wrote {} ({nx}×{ny}×{nz} voxels)", a.out.display());
    println!(
        "argmax voxel {} at {} m",
        summary["argmax_voxel"], summary["argmax_position_m"]
    );
    match summary["peak_to_background"].as_f64() {
        Some(r) => println!("peak-to-background: {r:.3}"),
        None => println!("peak-to-background: undefined (median is zero)"),
    }
    println!("time: {seconds:.2} s ({:.3e} paths/s)", paths / seconds);
    Ok(())
}

fn projection_axis(a: Axis) -> ProjectionAxis {
    match a {
        Axis::Front => ProjectionAxis::Front,
        Axis::Side => ProjectionAxis::Side,
        Axis::Top => ProjectionAxis::Top,
    }
}

pub fn cmd_project(a: &ProjectArgs) -> CliResult<()> {
    require_exists(&[&a.input])?;
    let volume = read_volume(&a.input)?;
    let image = max_intensity_projection(&volume, projection_axis(a.axis));
    write_bytes(&a.out, &image.to_pgm())?;
    println!("wrote {} ({}×{})", a.out.display(), image.width, image.height);
    Ok(())
}

fn sweep_image_name(lambda: f64, sigma: f64) -> String {
    format!("lambda{:.1}cm_sigma{sigma}.pgm", lambda * 100.0)
}

pub fn cmd_sweep(a: &SweepArgs) -> CliResult<()> {
    if a.lambdas.is_empty() || a.sigmas.is_empty() {
        return Err(usage("--lambdas and --sigmas need at least one value each"));
    }
    let mut inputs: Vec<&Path> = vec![&a.input];
    inputs.extend(a.truth_scene.as_deref());
    inputs.extend(a.volume.geometry.as_deref());
    require_exists(&inputs)?;
    let spec = reconstruction_spec(&a.volume, None)?;
    let (cube, side) = read_calibrated(&a.input)?;
    let geometry: SceneGeometry = resolve_geometry(a.volume.geometry.as_deref(), side.as_ref())?;
    let truth = match &a.truth_scene {
        Some(p) => {
            let scene: SceneDescription = read_json(p)?;
            Some(occupancy(&spec.grid, &scene.target.build()?))
        }
        None => None,
    };
    if let Some(dir) = &a.images {
        std::fs::create_dir_all(dir).map_err(|source| CliError::Io {
            path: dir.clone(),
            source,
        })?;
    }
    let entries = parameter_sweep_with(
        &cube,
        &geometry,
        &spec,
        &a.lambdas,
        &a.sigmas,
        truth.as_deref(),
        |entry, volume| {
            let pbr = entry
                .peak_to_background
                .map_or("undefined".to_string(), |r| format!("{r:.3}"));
            match entry.iou {
                Some(iou) => println!(
                    "λ = {:.3} m, σ = {}: peak-to-background {pbr}, IoU {iou:.4}",
                    entry.lambda, entry.sigma
                ),
                None => println!("λ = {:.3} m, σ = {}: peak-to-background {pbr}", entry.lambda, entry.sigma),
            }
            if let Some(dir) = &a.images {
                let img = max_intensity_projection(volume, ProjectionAxis::Front);
                let path = dir.join(sweep_image_name(entry.lambda, entry.sigma));
                std::fs::write(&path, img.to_pgm())
                    .map_err(|e| std::io::Error::new(e.kind(), format!("{}: {e}", path.display())))?;
            }
            Ok(())
        },
    )?;
    write_json(&a.out, &entries)?;
    let config = json!({
        "lambdas": a.lambdas,
        "sigmas": a.sigmas,
        "truth_scene": a.truth_scene,
        "images": a.images,
        "spec": spec,
    });
    Sidecar::new("sweep", config, json!({ "entries": entries.len() })).write_for(&a.out)?;
    println!("wrote {} ({} entries)", a.out.display(), entries.len());
    Ok(())
}
