use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use iga_core::coupling::{alpha_range, AlphaPolicy};
use iga_core::error::{IgaError, Result};
use iga_core::io::{export_vtk, load_model_file, probe, write_atomic, write_summary, ModelFile};
use iga_core::mesh::{BoundaryFunction, MultiPatchModel};
use iga_core::solver::{assemble_global, solve, von_mises, AssemblyOptions, SolveOptions};
use iga_core::verification::{convergence_study, max_element_diagonal, TimoshenkoParams};

#[derive(Parser)]
#[command(name = "iga", version, about = "Multi-patch NURBS elastostatics with Nitsche coupling")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve a model and write VTK output plus a key=value summary.
    Run {
        #[command(flatten)]
        common: Common,
        /// Output directory.
        #[arg(long)]
        out: PathBuf,
    },
    /// Refine a model repeatedly and report error norms against the exact beam solution.
    Converge {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 4)]
        levels: usize,
        /// Degree every patch is elevated to before subdivision.
        #[arg(long)]
        degree: Option<usize>,
        /// Directory for convergence.csv; the table is always printed.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print patch, element and dof statistics and interface alphas.
    Inspect {
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    model: PathBuf,
    /// Fixed stabilisation parameter for every interface.
    #[arg(long)]
    alpha: Option<f64>,
    /// Average weight for every interface.
    #[arg(long)]
    gamma: Option<f64>,
    /// Interface Gauss points per direction.
    #[arg(long)]
    gp: Option<usize>,
    /// Worker threads for assembly.
    #[arg(long)]
    threads: Option<usize>,
}

impl Common {
    fn load(&self, degree: Option<usize>) -> Result<(ModelFile, MultiPatchModel)> {
        if let Some(n) = self.threads {
            rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build_global()
                .map_err(|e| IgaError::Argument(format!("--threads: {e}")))?;
        }
        let file = load_model_file(&self.model)?;
        let mut model = file.build(degree)?;
        for iface in &mut model.interfaces {
            if let Some(a) = self.alpha {
                iface.alpha = AlphaPolicy::Value(a);
            }
            if let Some(g) = self.gamma {
                iface.gamma = g;
            }
        }
        if self.alpha.is_some() || self.gamma.is_some() {
            model.validate()?;
        }
        Ok((file, model))
    }

    fn assembly(&self, file: &ModelFile) -> AssemblyOptions {
        AssemblyOptions { interface_gp: self.gp.or(file.solver.interface_gp) }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => e.exit(),
        Err(e) => {
            let msg = e.to_string();
            let first = msg.lines().next().unwrap_or("").trim_start_matches("error: ");
            eprintln!("error[usage]: {first}");
            return ExitCode::from(2);
        }
    };
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error[{}]: {}", e.kind(), e.to_string().replace('\n', " "));
            ExitCode::FAILURE
        }
    }
}

fn dispatch(cmd: Command) -> Result<()> {
    match cmd {
        Command::Run { common, out } => run(&common, &out),
        Command::Converge { common, levels, degree, out } => converge(&common, levels, degree, out.as_deref()),
        Command::Inspect { common } => inspect(&common),
    }
}

fn run(common: &Common, out: &Path) -> Result<()> {
    let (file, model) = common.load(None)?;
    let system = assemble_global(&model, &common.assembly(&file))?;
    let sol = solve(&system, &SolveOptions { spd_check: file.solver.spd_check })?;
    std::fs::create_dir_all(out)?;
    export_vtk(&sol, file.output.vtk_density, &out.join("solution.vtk"))?;

    let dim = model.dim();
    let max_u = sol
        .control
        .iter()
        .flatten()
        .map(|u| u.iter().map(|v| v * v).sum::<f64>().sqrt())
        .fold(0.0, f64::max);
    let mut entries: Vec<(String, String)> = vec![
        ("patches".into(), model.patches.len().to_string()),
        ("elements".into(), model.meshes().iter().map(|m| m.len()).sum::<usize>().to_string()),
        ("dofs".into(), system.num_dofs().to_string()),
        ("free_dofs".into(), sol.stats.free_dofs.to_string()),
        ("interfaces".into(), model.interfaces.len().to_string()),
        ("min_pivot".into(), format!("{:e}", sol.stats.pivots.min_pivot)),
        ("residual".into(), format!("{:e}", sol.stats.residual)),
        ("equilibrium_error".into(), format!("{:e}", sol.equilibrium_error())),
        ("max_control_displacement".into(), max_u.to_string()),
    ];
    let names = ["x", "y", "z"];
    for p in &file.output.probes {
        let (patch, f) = probe(&sol, &p.point)?;
        let mat = model.material_of(patch);
        entries.push((format!("{}.patch", p.name), patch.to_string()));
        for (c, name) in names.iter().enumerate().take(dim) {
            entries.push((format!("{}.u{name}", p.name), f.u[c].to_string()));
        }
        let labels: &[&str] = if dim == 2 { &["xx", "yy", "xy"] } else { &["xx", "yy", "zz", "xy", "yz", "xz"] };
        for (l, s) in labels.iter().zip(&f.stress) {
            entries.push((format!("{}.s{l}", p.name), s.to_string()));
        }
        entries.push((
            format!("{}.vonMises", p.name),
            von_mises(&f.stress, mat.formulation, mat.poisson_ratio).to_string(),
        ));
    }
    write_summary(&out.join("summary.txt"), &entries)?;
    print!("{}", iga_core::io::summary_string(&entries));
    Ok(())
}

/// Beam parameters from the model's boundary data.
fn beam_params(model: &MultiPatchModel) -> Result<TimoshenkoParams> {
    let from_dirichlet = model.dirichlet.iter().map(|d| &d.value);
    let from_neumann = model.neumann.iter().map(|n| &n.traction);
    from_dirichlet
        .chain(from_neumann)
        .find_map(|f| match f {
            BoundaryFunction::Timoshenko(t) => Some(*t),
            _ => None,
        })
        .ok_or_else(|| IgaError::Argument("converge needs a model with timoshenko boundary data".into()))
}

fn converge(common: &Common, levels: usize, degree: Option<usize>, out: Option<&Path>) -> Result<()> {
    let (file, model) = common.load(degree)?;
    let exact = beam_params(&model)?;
    let report = convergence_study(
        &model,
        levels,
        None,
        &exact,
        &common.assembly(&file),
        &SolveOptions { spd_check: file.solver.spd_check },
    )?;
    let csv = report.to_csv();
    if let Some(dir) = out {
        std::fs::create_dir_all(dir)?;
        write_atomic(&dir.join("convergence.csv"), csv.as_bytes())?;
    }
    print!("{csv}");
    Ok(())
}

fn inspect(common: &Common) -> Result<()> {
    let (_, model) = common.load(None)?;
    let mut lines = vec![format!("dim={}", model.dim()), format!("patches={}", model.patches.len())];
    for (i, (p, mesh)) in model.patches.iter().zip(model.meshes()).enumerate() {
        let join = |v: Vec<usize>| v.iter().map(usize::to_string).collect::<Vec<_>>().join("x");
        lines.push(format!("patch.{i}.degrees={}", join(p.degrees())));
        lines.push(format!("patch.{i}.grid={}", join(mesh.grid())));
        lines.push(format!("patch.{i}.elements={}", mesh.len()));
        lines.push(format!("patch.{i}.control_points={}", p.num_control_points()));
    }
    lines.push(format!("elements={}", model.meshes().iter().map(|m| m.len()).sum::<usize>()));
    lines.push(format!("dofs={}", model.num_dofs()));
    lines.push(format!("h_max={}", max_element_diagonal(&model)?));
    lines.push(format!("interfaces={}", model.interfaces.len()));
    for i in 0..model.interfaces.len() {
        let (lo, hi) = alpha_range(&model, i)?;
        lines.push(format!("interface.{i}.alpha_min={lo:e}"));
        lines.push(format!("interface.{i}.alpha_max={hi:e}"));
    }
    println!("{}", lines.join("\n"));
    Ok(())
}
