use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use linscale_cli::{bench, cmd_eval, cmd_grad, cmd_plan, CliResult, PlanArgs, PoseArgs, SceneFile};

#[derive(Parser)]
#[command(name = "linscale", version, about = "Minimum collision scale queries, benchmarks and planning")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct PoseFlags {
    /// Translation, comma separated (2 or 3 values).
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    t: Option<Vec<f64>>,
    /// Unit quaternion w,x,y,z (3D scenes).
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    q: Option<Vec<f64>>,
    /// Heading in radians (2D scenes).
    #[arg(long, allow_hyphen_values = true)]
    theta: Option<f64>,
}

impl From<PoseFlags> for PoseArgs {
    fn from(p: PoseFlags) -> Self {
        PoseArgs { t: p.t, q: p.q, theta: p.theta }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Scale and active sets for every obstacle in a scene.
    Eval {
        scene: PathBuf,
        #[command(flatten)]
        pose: PoseFlags,
        /// Also compute the scale by bisection on hull intersection.
        #[arg(long)]
        check_oracle: bool,
    },
    /// Gradient of the scale with respect to the body pose.
    Grad {
        scene: PathBuf,
        #[command(flatten)]
        pose: PoseFlags,
        /// Compare against central differences.
        #[arg(long)]
        fd_check: bool,
    },
    /// Time the LP solver on random scale programs.
    Bench {
        /// LP dimension (2 to 4).
        #[arg(long, default_value_t = 4)]
        dim: usize,
        #[arg(long, value_delimiter = ',', default_value = "100,1000,10000,100000")]
        m_list: Vec<usize>,
        #[arg(long, default_value_t = 50)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        rng_seed: u64,
    },
    /// Optimize a trajectory through a 2D scene.
    Plan {
        scene: PathBuf,
        /// x,y or x,y,vx,vy
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        start: Vec<f64>,
        /// x,y or x,y,vx,vy
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        goal: Vec<f64>,
        #[arg(long, default_value_t = 6)]
        segments: usize,
        /// Total duration in seconds.
        #[arg(long, default_value_t = 10.0)]
        duration: f64,
        /// Trajectory JSON output.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        svg: Option<PathBuf>,
    },
    /// Print a scene in canonical formatting.
    Fmt { scene: PathBuf },
}

fn run(cli: Cli) -> CliResult<String> {
    match cli.command {
        Command::Eval { scene, pose, check_oracle } => cmd_eval(&SceneFile::load(&scene)?, &pose.into(), check_oracle),
        Command::Grad { scene, pose, fd_check } => cmd_grad(&SceneFile::load(&scene)?, &pose.into(), fd_check),
        Command::Bench { dim, m_list, trials, rng_seed } => bench::cmd_bench(dim, &m_list, trials, rng_seed),
        Command::Plan { scene, start, goal, segments, duration, out, svg } => cmd_plan(
            &SceneFile::load(&scene)?,
            &PlanArgs { start, goal, segments, duration },
            out.as_deref(),
            svg.as_deref(),
        ),
        Command::Fmt { scene } => Ok(SceneFile::load(&scene)?.to_canonical_string()),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(text) => {
            print!("{text}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
