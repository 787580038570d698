//! Scenario-driven command-line front end: render MRIRs, run the
//! diffuse-field IC/ILD evaluation, generate the pink test pulse, convolve
//! stimuli with rendered responses, and list the corridor positions.

use clap::{Parser, Subcommand};
use lateverb::analysis::diffuse_field_eval;
use lateverb::error::Error;
use lateverb::fdn::rt60_target;
use lateverb::filter::fft_convolve;
use lateverb::hrir::{load_hrir_set, sphere_hrir_set, HrirSet};
use lateverb::render::render_mrir;
use lateverb::scenario::{
    corridor_positions, parse_scenario, pink_pulse, HrirRef, LayoutRef, Scenario, PINK_PULSE_FS,
};
use lateverb::vbap::{builtin_layout_86, parse_layout, LoudspeakerLayout};
use lateverb::wav::{read_wav, write_wav};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "lateverb", version, about = "Room acoustics rendering engine")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Render the multichannel room impulse response for a scenario.
    Render {
        #[arg(long)]
        scenario: PathBuf,
        /// Override the scenario's VRS count.
        #[arg(long)]
        k: Option<usize>,
        /// Override the scenario's seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Override the receiver yaw in degrees.
        #[arg(long)]
        yaw: Option<f64>,
        /// Output WAV path; a JSON metadata sidecar is written next to it.
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the diffuse-field IC/ILD evaluation and write a CSV.
    Analyze {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        k: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        yaw: Option<f64>,
        /// Assign the same output power to every VRS (unit weights).
        #[arg(long)]
        isotropic: bool,
        /// Output CSV path (`freq_hz,ic,ild_db`).
        #[arg(long)]
        out: PathBuf,
    },
    /// Write the pink test pulse as a mono WAV.
    Stimulus {
        #[arg(long)]
        out: PathBuf,
    },
    /// Convolve a mono stimulus with every channel of an MRIR.
    Convolve {
        #[arg(long)]
        stimulus: PathBuf,
        #[arg(long)]
        mrir: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Print the corridor benchmark positions A-D.
    Positions,
}

fn exit_code_for(err: &Error) -> u8 {
    match err {
        Error::InvalidArgument(_)
        | Error::Geometry(_)
        | Error::InvalidInput(_)
        | Error::Config(_)
        | Error::Format(_)
        | Error::Scenario { .. } => 1,
        Error::InsufficientDecay(_) | Error::UndefinedEstimate(_) | Error::Io(_) => 2,
    }
}

fn apply_overrides(
    scenario: &mut Scenario,
    k: Option<usize>,
    seed: Option<u64>,
    yaw: Option<f64>,
) -> Result<(), Error> {
    if let Some(k) = k {
        if !lateverb::geometry::SUPPORTED_VRS_COUNTS.contains(&k) {
            return Err(Error::InvalidArgument(format!("unsupported k = {k}")));
        }
        scenario.k = k;
    }
    if let Some(seed) = seed {
        scenario.seed = seed;
    }
    if let Some(yaw) = yaw {
        scenario.receiver.yaw_deg = yaw;
    }
    Ok(())
}

fn resolve_layout(scenario: &Scenario) -> Result<LoudspeakerLayout, Error> {
    match &scenario.layout {
        LayoutRef::Builtin => Ok(builtin_layout_86()),
        LayoutRef::File(path) => {
            let text = std::fs::read_to_string(path)?;
            parse_layout(&text, path.display().to_string())
        }
    }
}

fn resolve_hrirs(scenario: &Scenario, layout: &LoudspeakerLayout) -> Result<HrirSet, Error> {
    match &scenario.hrir {
        HrirRef::Sphere => sphere_hrir_set(&layout.directions, scenario.fs),
        HrirRef::Directory(path) => load_hrir_set(path),
    }
}

fn render_duration(scenario: &Scenario) -> f64 {
    scenario.duration.unwrap_or_else(|| {
        let rt = rt60_target(&scenario.room);
        let max_rt = rt
            .iter()
            .filter(|r| r.is_finite())
            .fold(0.0f64, |m, &r| m.max(r));
        max_rt + 0.5
    })
}

fn cmd_render(
    scenario_path: &Path,
    k: Option<usize>,
    seed: Option<u64>,
    yaw: Option<f64>,
    out: &Path,
) -> Result<(), Error> {
    let mut scenario = parse_scenario(scenario_path)?;
    apply_overrides(&mut scenario, k, seed, yaw)?;
    let layout = resolve_layout(&scenario)?;
    let duration = render_duration(&scenario);
    let mrir = render_mrir(
        &scenario.room,
        scenario.source,
        scenario.receiver,
        scenario.k,
        scenario.fs,
        duration,
        scenario.seed,
        &layout,
    )?;
    write_wav(out, &mrir.channels, mrir.fs)?;
    let meta = &mrir.metadata;
    let sidecar = serde_json::json!({
        "channels": mrir.num_channels(),
        "frames": mrir.num_frames(),
        "fs_hz": mrir.fs,
        "k": meta.k,
        "seed": meta.seed,
        "duration_s": duration,
        "room_dims_m": [meta.room.dims.x, meta.room.dims.y, meta.room.dims.z],
        "source_m": [meta.source.x, meta.source.y, meta.source.z],
        "receiver_m": [
            meta.receiver.position.x,
            meta.receiver.position.y,
            meta.receiver.position.z
        ],
        "receiver_yaw_deg": meta.receiver.yaw_deg,
        "direct_onset_sample": meta.direct_onset,
        "tail_onset_sample": meta.tail_onset,
        "note": meta.note,
    });
    let sidecar_path = out.with_extension("json");
    std::fs::write(&sidecar_path, format!("{:#}\n", sidecar))?;
    eprintln!(
        "wrote {} ({} channels, {:.2} s) and {}",
        out.display(),
        mrir.num_channels(),
        duration,
        sidecar_path.display()
    );
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_analyze(
    scenario_path: &Path,
    k: Option<usize>,
    seed: Option<u64>,
    yaw: Option<f64>,
    isotropic: bool,
    out: &Path,
) -> Result<(), Error> {
    let mut scenario = parse_scenario(scenario_path)?;
    apply_overrides(&mut scenario, k, seed, yaw)?;
    let layout = resolve_layout(&scenario)?;
    let hrirs = resolve_hrirs(&scenario, &layout)?;
    let (ic, ild) = diffuse_field_eval(
        &scenario.room,
        scenario.receiver,
        scenario.k,
        &layout,
        &hrirs,
        scenario.analysis_duration,
        scenario.seed,
        isotropic,
    )?;
    let mut csv = String::from("freq_hz,ic,ild_db\n");
    for ((&f, &c), &l) in ic.freqs.iter().zip(&ic.values).zip(&ild.values) {
        csv.push_str(&format!("{f},{c},{l}\n"));
    }
    std::fs::write(out, csv)?;
    eprintln!("wrote {} ({} bins)", out.display(), ic.freqs.len());
    Ok(())
}

fn cmd_stimulus(out: &Path) -> Result<(), Error> {
    let pulse = pink_pulse();
    write_wav(out, &[pulse], PINK_PULSE_FS)?;
    eprintln!("wrote {}", out.display());
    Ok(())
}

fn cmd_convolve(stimulus: &Path, mrir: &Path, out: &Path) -> Result<(), Error> {
    let stim = read_wav(stimulus)?;
    let ir = read_wav(mrir)?;
    if (stim.fs - ir.fs).abs() > 1e-6 {
        return Err(Error::Format(format!(
            "sample rate mismatch: stimulus {} Hz vs MRIR {} Hz",
            stim.fs, ir.fs
        )));
    }
    if stim.num_channels() != 1 {
        return Err(Error::Format(format!(
            "stimulus must be mono, got {} channels",
            stim.num_channels()
        )));
    }
    let x = &stim.channels[0];
    let channels: Vec<Vec<f64>> = ir
        .channels
        .iter()
        .map(|ch| fft_convolve(x, ch))
        .collect();
    write_wav(out, &channels, ir.fs)?;
    eprintln!(
        "wrote {} ({} channels, {} frames)",
        out.display(),
        channels.len(),
        channels[0].len()
    );
    Ok(())
}

fn cmd_positions() {
    println!("label  wall_distance_m  fov_deg  source (x y z)        receiver (x y z)      yaw_deg");
    for p in corridor_positions() {
        println!(
            "{}      {:>13.3}  {:>7.1}  {:6.2} {:5.2} {:4.2}    {:6.2} {:5.2} {:4.2}    {:>6.1}",
            p.label,
            p.wall_distance,
            p.fov_deg,
            p.source.x,
            p.source.y,
            p.source.z,
            p.receiver.position.x,
            p.receiver.position.y,
            p.receiver.position.z,
            p.receiver.yaw_deg
        );
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Render {
            scenario,
            k,
            seed,
            yaw,
            out,
        } => cmd_render(&scenario, k, seed, yaw, &out),
        Command::Analyze {
            scenario,
            k,
            seed,
            yaw,
            isotropic,
            out,
        } => cmd_analyze(&scenario, k, seed, yaw, isotropic, &out),
        Command::Stimulus { out } => cmd_stimulus(&out),
        Command::Convolve {
            stimulus,
            mrir,
            out,
        } => cmd_convolve(&stimulus, &mrir, &out),
        Command::Positions => {
            cmd_positions();
            Ok(())
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code_for(&e))
        }
    }
}
