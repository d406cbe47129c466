//! The subcommands.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use ils_core::accel::AccelIndex;
use ils_core::ils::report::{active_label, scenario_table_csv, scenario_table_text, sensor_table_csv, sensor_table_text, Scenario};
use ils_core::ils::{
    contribution_matrix, evaluate_scenario, optimize, parse_ground_truth, sensor_rows, vfoa_sets, ContributionMatrix, GroundTruth, ILSConfig,
    ScenarioResult, Selection,
};
use ils_core::map::{export_map, IlluminationMap};
use ils_core::perception::{ingest_detections, occupants_from_detections, LuxmeterConfig, OccupantDefaults};
use ils_core::radiosity::{cache, form_factor_matrix, FormFactorMatrix, LuminaireBasis, SolverOptions};
use ils_core::scene::{load_scene_file, patchify_depth, save_scene, BodyModel, CameraSidecar, DepthImage, PatchifyOptions, Scene, SensorRole};
use ils_core::Error;
use serde::Serialize;

use crate::artifact::{header, with_hash_comment, InputHash, OutDir, TOOL};
use crate::config::{Command, RunConfig};
use crate::CliError;

fn read(path: &Path) -> Result<Vec<u8>, CliError> {
    std::fs::read(path).map_err(|source| {
        Error::Io {
            path: path.to_path_buf(),
            source,
        }
        .into()
    })
}

fn read_text(path: &Path) -> Result<String, CliError> {
    String::from_utf8(read(path)?).map_err(|_| {
        Error::Parse {
            what: "input file",
            line: None,
            path: path.display().to_string(),
            message: "not valid UTF-8".into(),
        }
        .into()
    })
}

/// Loaded inputs plus the hash over all of them.
struct Inputs {
    scene: Scene,
    ground_truth: GroundTruth,
    hash: String,
}

fn camera_and_depth(cfg: &RunConfig, scene: Option<&Scene>, hash: &mut InputHash) -> Result<(ils_core::scene::Camera, DepthImage), CliError> {
    let (camera, unit) = match &cfg.intrinsics {
        Some(p) => {
            let text = read_text(p)?;
            hash.add("intrinsics", text.as_bytes());
            CameraSidecar::parse(&text)?
        }
        None => {
            let camera = scene
                .and_then(|s| s.camera)
                .ok_or_else(|| CliError::Usage("no camera: pass --intrinsics or give the scene a camera".into()))?;
            (camera, 1e-3)
        }
    };
    let depth_path = cfg.depth.as_ref().expect("checked by the config");
    let bytes = read(depth_path)?;
    hash.add("depth", &bytes);
    let depth = DepthImage::from_png(&bytes, unit)?;
    if depth.width() != camera.intrinsics.width || depth.height() != camera.intrinsics.height {
        return Err(CliError::Usage(format!(
            "depth image is {}x{} but the camera expects {}x{}",
            depth.width(),
            depth.height(),
            camera.intrinsics.width,
            camera.intrinsics.height
        )));
    }
    Ok((camera, depth))
}

fn load_inputs(cfg: &RunConfig) -> Result<Inputs, CliError> {
    let mut hash = InputHash::default();
    hash.add("command", cfg.command.name().as_bytes());
    hash.add("config", serde_json::to_string(cfg).expect("config serializes").as_bytes());
    let scene_path = cfg.scene.as_ref().expect("checked by the config");
    let mut scene = load_scene_file(scene_path)?;
    // the canonical form also covers files the scene refers to
    hash.add("scene", save_scene(&scene).as_bytes());

    if let Some(p) = &cfg.detections {
        let text = read_text(p)?;
        hash.add("detections", text.as_bytes());
        let records = ingest_detections(&text)?;
        let (camera, depth) = camera_and_depth(cfg, Some(&scene), &mut hash)?;
        for r in &records {
            r.check_bounds(camera.intrinsics.width, camera.intrinsics.height)?;
        }
        scene.occupants = occupants_from_detections(&records, &depth, &camera, &scene.world_up, &OccupantDefaults::default())?;
        scene.validate()?;
    }
    if cfg.bodies {
        scene = scene.with_occupant_bodies(&BodyModel::default())?;
    }
    let ground_truth = match &cfg.ground_truth {
        Some(p) => {
            let text = read_text(p)?;
            hash.add("ground-truth", text.as_bytes());
            parse_ground_truth(&text)?
        }
        None => GroundTruth::new(),
    };
    Ok(Inputs {
        scene,
        ground_truth,
        hash: hash.finish(),
    })
}

fn form_factors(cfg: &RunConfig, scene: &Scene, accel: &AccelIndex) -> Result<FormFactorMatrix, CliError> {
    let n = scene.patches.len();
    if n == 0 {
        return Err(Error::Empty("scene has no patches").into());
    }
    if n == 1 {
        return Ok(FormFactorMatrix::from_parts(vec![0.0], vec![scene.patches[0].area()])?);
    }
    let key = cache::cache_key(&scene.patches, cfg.ff_samples, accel.epsilon());
    if let Some(path) = &cfg.ff_cache {
        if let Ok(bytes) = std::fs::read(path) {
            if let Some(ff) = cache::lookup(&bytes, &key) {
                return Ok(ff);
            }
        }
    }
    let ff = form_factor_matrix(&scene.patches, accel, cfg.ff_samples)?;
    if let Some(path) = &cfg.ff_cache {
        let dir = path.parent().filter(|d| !d.as_os_str().is_empty()).unwrap_or(Path::new("."));
        let name = path
            .file_name()
            .ok_or_else(|| CliError::Usage(format!("--ff-cache {} is not a file path", path.display())))?;
        OutDir::create(dir)?.write(&name.to_string_lossy(), &cache::encode(&key, &ff))?;
    }
    Ok(ff)
}

struct Engine {
    accel: AccelIndex,
    basis: LuminaireBasis,
}

fn engine(cfg: &RunConfig, scene: &Scene) -> Result<Engine, CliError> {
    let accel = AccelIndex::build(&scene.patches)?;
    let ff = form_factors(cfg, scene, &accel)?;
    let basis = LuminaireBasis::from_form_factors(scene, &accel, &ff, SolverOptions::default())?;
    Ok(Engine { accel, basis })
}

fn dims(cfg: &RunConfig, scene: &Scene) -> Result<Vec<f64>, CliError> {
    let dims = cfg.dims.clone().unwrap_or_else(|| scene.dims());
    if dims.len() != scene.luminaires.len() {
        return Err(CliError::Usage(format!(
            "--dims has {} values for {} luminaires",
            dims.len(),
            scene.luminaires.len()
        )));
    }
    if let Some(d) = dims.iter().find(|d| !(0.0..=1.0).contains(*d)) {
        return Err(CliError::Usage(format!("dim {d} outside [0, 1]")));
    }
    Ok(dims)
}

fn luxmeter(cfg: &RunConfig) -> LuxmeterConfig {
    LuxmeterConfig {
        n_rays: cfg.rays,
        direct_term: cfg.direct_term,
        sequence_id: cfg.sequence_id,
    }
}

fn ils_config(cfg: &RunConfig) -> ILSConfig {
    ILSConfig {
        delta_max_lux: cfg.delta_max,
        mode: cfg.mode,
        overhead_watts: cfg.overhead_watts,
        spatial_floor_lux: cfg.spatial_floor,
    }
}

fn json<T: Serialize>(value: &T) -> Vec<u8> {
    let mut text = serde_json::to_string_pretty(value).expect("summary serializes");
    text.push('\n');
    text.into_bytes()
}

#[derive(Serialize)]
struct Generator<'a> {
    tool: &'a str,
    input_sha256: &'a str,
}

pub fn run(cfg: &RunConfig) -> Result<Vec<PathBuf>, CliError> {
    let mut out = OutDir::create(&cfg.out)?;
    match cfg.command {
        Command::Patchify => patchify(cfg, &mut out)?,
        Command::Solve => solve(cfg, &mut out, true)?,
        Command::ExportMap => solve(cfg, &mut out, false)?,
        Command::Simulate => simulate(cfg, &mut out)?,
        Command::Optimize => optimize_cmd(cfg, &mut out)?,
        Command::Evaluate => evaluate(cfg, &mut out)?,
    }
    Ok(out.written().to_vec())
}

fn patchify(cfg: &RunConfig, out: &mut OutDir) -> Result<(), CliError> {
    let mut hash = InputHash::default();
    hash.add("command", cfg.command.name().as_bytes());
    hash.add("config", serde_json::to_string(cfg).expect("config serializes").as_bytes());
    let template = match &cfg.scene {
        Some(p) => {
            let s = load_scene_file(p)?;
            hash.add("scene", save_scene(&s).as_bytes());
            Some(s)
        }
        None => None,
    };
    let (camera, depth) = camera_and_depth(cfg, template.as_ref(), &mut hash)?;
    let patches = patchify_depth(&depth, &camera, cfg.patch_size, &PatchifyOptions::default())?;
    let mut scene = template.unwrap_or_default();
    scene.patches = patches;
    scene.camera = Some(camera);
    scene.validate()?;
    // JSON has no comments; the provenance lives next to the scene
    let digest = hash.finish();
    out.write("scene.json", save_scene(&scene).as_bytes())?;
    out.write(
        "patchify.log",
        format!("# {}\npatches {}\n", header(&digest), scene.patches.len()).as_bytes(),
    )?;
    Ok(())
}

fn solve(cfg: &RunConfig, out: &mut OutDir, with_residuals: bool) -> Result<(), CliError> {
    let inputs = load_inputs(cfg)?;
    let scene = &inputs.scene;
    let engine = engine(cfg, scene)?;
    let dims = dims(cfg, scene)?;
    let solution = engine.basis.solve_direct(&dims)?;
    let incident = engine.basis.incident(&dims)?;
    let map = IlluminationMap::new(&scene.patches, &solution, &incident)?;
    let head = header(&inputs.hash);
    let format = cfg.format;
    let text = export_map(&map, &scene.patches, format, Some(&head))?;
    out.write(&format!("map.{}", format.extension()), text.as_bytes())?;
    if with_residuals {
        let mut log = format!("# {head}\nluminaire_id,residual\n");
        for (l, id) in engine.basis.luminaire_ids().iter().enumerate() {
            log.push_str(&format!("{id},{:e}\n", engine.basis.solution(l).residual));
        }
        log.push_str(&format!("combined,{:e}\n", solution.residual));
        out.write("residuals.csv", log.as_bytes())?;
    }
    Ok(())
}

fn simulate(cfg: &RunConfig, out: &mut OutDir) -> Result<(), CliError> {
    let inputs = load_inputs(cfg)?;
    let scene = &inputs.scene;
    let engine = engine(cfg, scene)?;
    let dims = dims(cfg, scene)?;
    let result = evaluate_scenario(
        scene,
        &engine.basis,
        &dims,
        &GroundTruth::new(),
        &engine.accel,
        &luxmeter(cfg),
        &ils_config(cfg),
    )?;
    let head = header(&inputs.hash);
    // readable back as ground truth
    let mut readings = String::from("sensor_id,lux\n");
    for s in &result.sensors {
        readings.push_str(&format!("{},{}\n", s.sensor_id, s.estimate));
    }
    out.write("readings.csv", with_hash_comment(&head, &readings).as_bytes())?;
    if !scene.occupants.is_empty() {
        let a = contribution_matrix(scene, &engine.basis, &engine.accel, &luxmeter(cfg))?;
        let mut occ = String::from("occupant_id,lux\n");
        for (id, lux) in a.occupant_ids.iter().zip(a.readings(&dims)) {
            occ.push_str(&format!("{id},{lux}\n"));
        }
        out.write("occupants.csv", with_hash_comment(&head, &occ).as_bytes())?;
    }
    Ok(())
}

#[derive(Serialize)]
struct OptimizeSummary<'a> {
    generator: Generator<'a>,
    config: &'a ILSConfig,
    luminaire_ids: &'a [u32],
    occupant_ids: &'a [u32],
    contributions: &'a [Vec<f64>],
    full_lit: &'a [f64],
    vfoa: Option<&'a [BTreeSet<u32>]>,
    selection: &'a Selection,
    active: String,
    scenario: &'a ScenarioResult,
    full_lit_scenario: &'a ScenarioResult,
}

fn optimize_cmd(cfg: &RunConfig, out: &mut OutDir) -> Result<(), CliError> {
    let inputs = load_inputs(cfg)?;
    let scene = &inputs.scene;
    if scene.occupants.is_empty() {
        return Err(Error::Empty("occupants").into());
    }
    let engine = engine(cfg, scene)?;
    let lux = luxmeter(cfg);
    let ils = ils_config(cfg);
    let mut a: ContributionMatrix = contribution_matrix(scene, &engine.basis, &engine.accel, &lux)?;
    if cfg.spatial_floor.is_some() {
        a.floor = Some(sensor_rows(scene, &engine.basis, &engine.accel, SensorRole::Spatial, &lux)?);
    }
    let sets = match cfg.mode {
        ils_core::ils::Mode::VfoaGated => Some(vfoa_sets(scene, &engine.accel)?),
        _ => None,
    };
    let selection = optimize(&a, &scene.powers(), &ils, sets.as_deref())?;
    let chosen = evaluate_scenario(scene, &engine.basis, &selection.dims, &inputs.ground_truth, &engine.accel, &lux, &ils)?;
    let ones = vec![1.0; scene.luminaires.len()];
    let full = evaluate_scenario(scene, &engine.basis, &ones, &inputs.ground_truth, &engine.accel, &lux, &ils)?;
    let head = header(&inputs.hash);
    let scenarios = [
        Scenario {
            label: "full-lit".into(),
            result: &full,
        },
        Scenario {
            label: active_label(&chosen),
            result: &chosen,
        },
    ];
    out.write("scenario.csv", with_hash_comment(&head, &scenario_table_csv(&scenarios)).as_bytes())?;
    out.write("scenario.txt", with_hash_comment(&head, &scenario_table_text(&scenarios)).as_bytes())?;
    let mut dims_csv = String::from("luminaire_id,dim\n");
    for (id, d) in a.luminaire_ids.iter().zip(&selection.dims) {
        dims_csv.push_str(&format!("{id},{d}\n"));
    }
    out.write("dims.csv", with_hash_comment(&head, &dims_csv).as_bytes())?;
    let summary = OptimizeSummary {
        generator: Generator {
            tool: TOOL,
            input_sha256: &inputs.hash,
        },
        config: &ils,
        luminaire_ids: &a.luminaire_ids,
        occupant_ids: &a.occupant_ids,
        contributions: &a.a,
        full_lit: &a.full_lit,
        vfoa: sets.as_deref(),
        selection: &selection,
        active: active_label(&chosen),
        scenario: &chosen,
        full_lit_scenario: &full,
    };
    out.write("scenario.json", &json(&summary))?;
    Ok(())
}

#[derive(Serialize)]
struct EvaluateSummary<'a> {
    generator: Generator<'a>,
    mean_epsilon: Option<f64>,
    scenario: &'a ScenarioResult,
}

fn evaluate(cfg: &RunConfig, out: &mut OutDir) -> Result<(), CliError> {
    let inputs = load_inputs(cfg)?;
    let scene = &inputs.scene;
    let engine = engine(cfg, scene)?;
    let dims = dims(cfg, scene)?;
    let result = evaluate_scenario(
        scene,
        &engine.basis,
        &dims,
        &inputs.ground_truth,
        &engine.accel,
        &luxmeter(cfg),
        &ils_config(cfg),
    )?;
    let head = header(&inputs.hash);
    out.write("evaluation.csv", with_hash_comment(&head, &sensor_table_csv(&result)).as_bytes())?;
    out.write("evaluation.txt", with_hash_comment(&head, &sensor_table_text(&result)).as_bytes())?;
    let summary = EvaluateSummary {
        generator: Generator {
            tool: TOOL,
            input_sha256: &inputs.hash,
        },
        mean_epsilon: result.mean_epsilon(),
        scenario: &result,
    };
    out.write("evaluation.json", &json(&summary))?;
    Ok(())
}
