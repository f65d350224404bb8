//! Run configuration and mode dispatch for the command-line front end.
//!
//! Every run writes `manifest.json` (the resolved configuration, the files written
//! and the verdict) and `summary.txt` next to its mode-specific CSV and JSON files.

use std::fmt::Write as _;
use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::asymptotics::{bounds_report, lf_report, refined_tables, AsymptoticReport};
use crate::error::{Error, Result};
use crate::linear::{apply_upsilon, random_data, random_state, LinearSolver};
use crate::model::{
    check_parameter_gate, ensure_valid, estimate_q_norms, geometric_samples, ConstitutiveSet, HeatLaw, PhysicalParams,
    TensionLaw, ViscosityLaw,
};
use crate::nonlinear::{
    default_delta, pushforward_eulerian, sample_grid, solve_traveling_wave, write_samples_csv, ForcingData,
    ForcingPreset, PicardOptions,
};
use crate::ode::{SolveOptions, SymbolTable};
use crate::spectral::{check_divergence_trace, sobolev_norm, x_norm, FrequencyGrid, Pseudo, VerticalGrid};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Symbols,
    AsymCheck,
    LinearSolve,
    NonlinearSolve,
    RoundtripTest,
    Norms,
}

impl std::str::FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "symbols" => Mode::Symbols,
            "asym-check" => Mode::AsymCheck,
            "linear-solve" => Mode::LinearSolve,
            "nonlinear-solve" => Mode::NonlinearSolve,
            "roundtrip-test" => Mode::RoundtripTest,
            "norms" => Mode::Norms,
            other => return Err(Error::Config(format!("unknown mode `{other}`"))),
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridConfig {
    pub box_len: f64,
    pub modes: usize,
    pub nz: usize,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self { box_len: 2.0 * std::f64::consts::PI * 10.0, modes: 256, nz: 24 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Closures {
    pub viscosity: ViscosityLaw,
    pub heat: HeatLaw,
    pub tension: TensionLaw,
}

impl Default for Closures {
    fn default() -> Self {
        Self { viscosity: ViscosityLaw::Newtonian, heat: HeatLaw::Fourier, tension: TensionLaw::Linear }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    /// Relative misfit allowed in round trips and linear solves.
    pub roundtrip: f64,
    /// Relative error allowed on low-frequency coefficients.
    pub lf_rel: f64,
    /// Relative change allowed under grid doubling.
    pub stability: f64,
    /// Sobolev index for data and state norms.
    pub s: f64,
    /// Frequencies for the low-frequency fits.
    pub xi_seq: Vec<f64>,
    /// Residual-correction rounds after each linear inversion.
    pub refine_steps: usize,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { roundtrip: 1e-6, lf_rel: 0.01, stability: 0.1, s: 2.0, xi_seq: vec![1e-2, 5e-3, 2.5e-3], refine_steps: 1 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ForcingConfig {
    pub preset: ForcingPreset,
    pub amplitude: f64,
    pub wavenumber: i64,
    /// Admissible amplitude; `None` uses `1e-3 min(1, b, mu, kappa)`.
    pub delta: Option<f64>,
}

impl Default for ForcingConfig {
    fn default() -> Self {
        Self { preset: ForcingPreset::HeatOnly, amplitude: 1e-3, wavenumber: 10, delta: None }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SampleConfig {
    /// Random draws for `roundtrip-test`.
    pub roundtrip_samples: usize,
    /// Eulerian sampling columns and heights.
    pub eulerian_nx: usize,
    pub eulerian_ny: usize,
    /// Frequencies for the Q-norm sweep.
    pub q_samples: usize,
}

impl Default for SampleConfig {
    fn default() -> Self {
        Self { roundtrip_samples: 20, eulerian_nx: 64, eulerian_ny: 9, q_samples: 21 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub mode: Mode,
    pub out: PathBuf,
    pub seed: u64,
    pub params: PhysicalParams,
    pub grid: GridConfig,
    pub closures: Closures,
    pub solver: SolveOptions,
    pub tolerances: Tolerances,
    pub picard: PicardOptions,
    pub forcing: ForcingConfig,
    pub samples: SampleConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            mode: Mode::Symbols,
            out: PathBuf::from("out"),
            seed: 0,
            params: PhysicalParams::default(),
            grid: GridConfig::default(),
            closures: Closures::default(),
            solver: SolveOptions::default(),
            tolerances: Tolerances::default(),
            picard: PicardOptions::default(),
            forcing: ForcingConfig::default(),
            samples: SampleConfig::default(),
        }
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn grids(&self) -> Result<(FrequencyGrid, VerticalGrid)> {
        Ok((
            FrequencyGrid::new(self.params.dim_h(), self.grid.box_len, self.grid.modes)?,
            VerticalGrid::new(self.params.depth, self.grid.nz)?,
        ))
    }

    pub fn constitutive(&self) -> ConstitutiveSet {
        ConstitutiveSet::new(&self.params, self.closures.viscosity, self.closures.heat, self.closures.tension)
    }
}

/// Verdict and artifacts of one run.
#[derive(Clone, Debug, Serialize)]
pub struct RunOutcome {
    pub pass: bool,
    pub files: Vec<String>,
    pub summary: String,
}

impl RunOutcome {
    /// 0 when every check passed, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        if self.pass {
            0
        } else {
            1
        }
    }
}

#[derive(Serialize)]
struct Manifest<'a> {
    crate_version: &'static str,
    config: &'a RunConfig,
    pass: bool,
    files: &'a [String],
}

struct Emitter {
    dir: PathBuf,
    files: Vec<String>,
    summary: String,
}

impl Emitter {
    fn new(dir: &Path) -> Result<Self> {
        fs::create_dir_all(dir)?;
        Ok(Self { dir: dir.to_path_buf(), files: vec![], summary: String::new() })
    }

    fn create(&mut self, name: &str) -> Result<BufWriter<File>> {
        self.files.push(name.to_string());
        Ok(BufWriter::new(File::create(self.dir.join(name))?))
    }

    fn json<T: Serialize>(&mut self, name: &str, v: &T) -> Result<()> {
        let mut w = self.create(name)?;
        serde_json::to_writer_pretty(&mut w, v)?;
        std::io::Write::write_all(&mut w, b"\n")?;
        Ok(())
    }

    fn line(&mut self, s: impl AsRef<str>) {
        self.summary.push_str(s.as_ref());
        self.summary.push('\n');
    }
}

/// Execute the configured mode and write every artifact into `cfg.out`.
pub fn run(cfg: &RunConfig) -> Result<RunOutcome> {
    ensure_valid(&cfg.params)?;
    let mut em = Emitter::new(&cfg.out)?;
    em.line(format!("mode: {}", serde_json::to_value(cfg.mode)?.as_str().unwrap_or("?")));
    let pass = match cfg.mode {
        Mode::Symbols => run_symbols(cfg, &mut em)?,
        Mode::AsymCheck => run_asym(cfg, &mut em)?,
        Mode::LinearSolve => run_linear(cfg, &mut em)?,
        Mode::NonlinearSolve => run_nonlinear(cfg, &mut em)?,
        Mode::RoundtripTest => run_roundtrip(cfg, &mut em)?,
        Mode::Norms => run_norms(cfg, &mut em)?,
    };
    em.line(format!("verdict: {}", if pass { "PASS" } else { "FAIL" }));
    fs::write(cfg.out.join("summary.txt"), &em.summary)?;
    em.files.push("summary.txt".into());
    let files = em.files.clone();
    let manifest = Manifest { crate_version: env!("CARGO_PKG_VERSION"), config: cfg, pass, files: &files };
    let mut w = BufWriter::new(File::create(cfg.out.join("manifest.json"))?);
    serde_json::to_writer_pretty(&mut w, &manifest)?;
    std::io::Write::write_all(&mut w, b"\n")?;
    Ok(RunOutcome { pass, files, summary: em.summary })
}

fn run_symbols(cfg: &RunConfig, em: &mut Emitter) -> Result<bool> {
    let (fg, vg) = cfg.grids()?;
    let table = SymbolTable::build(&cfg.params, &fg, &vg, &cfg.solver)?;
    table.write_csv(em.create("symbols.csv")?)?;
    let colloc = table.entries.iter().filter(|e| e.backend == crate::ode::Backend::Collocation).count();
    let worst = table.entries.iter().map(|e| e.cond).fold(0.0, f64::max);
    em.line(format!("frequencies: {} ({} by collocation)", table.len(), colloc));
    em.line(format!("largest boundary condition number: {worst:.3e}"));
    Ok(true)
}

#[derive(Serialize)]
struct AsymOutput<'a> {
    low_frequency: &'a AsymptoticReport,
    bounds: &'a AsymptoticReport,
}

fn run_asym(cfg: &RunConfig, em: &mut Emitter) -> Result<bool> {
    let (fg, vg) = cfg.grids()?;
    let t = &cfg.tolerances;
    let lf = lf_report(&cfg.params, &vg, &t.xi_seq, t.lf_rel, &cfg.solver)?;
    let (coarse, fine) = refined_tables(&cfg.params, &fg, &vg, &cfg.solver)?;
    let bounds = bounds_report(&coarse, &fine, t.stability);
    em.json("asym_report.json", &AsymOutput { low_frequency: &lf, bounds: &bounds })?;
    let mut w = csv::Writer::from_writer(em.create("asym_claims.csv")?);
    w.write_record(["claim", "predicted", "fitted", "margin", "verdict"])?;
    for r in lf.rows.iter().chain(&bounds.rows) {
        w.write_record([
            r.claim.clone(),
            r.predicted.map_or(String::new(), |v| format!("{v:e}")),
            format!("{:e}", r.fitted),
            format!("{:e}", r.margin),
            if r.verdict { "pass" } else { "fail" }.into(),
        ])?;
        em.line(format!("{:<28} {}", r.claim, if r.verdict { "pass" } else { "FAIL" }));
    }
    w.flush()?;
    Ok(lf.all_pass() && bounds.all_pass())
}

#[derive(Serialize)]
struct LinearOutput {
    data_norm: f64,
    state_norm: f64,
    relative_misfit: f64,
    xi_zero_mode: f64,
    max_cond: f64,
    collocation_frequencies: usize,
}

fn run_linear(cfg: &RunConfig, em: &mut Emitter) -> Result<bool> {
    let (fg, vg) = cfg.grids()?;
    let solver = LinearSolver::new(&cfg.params, &fg, &vg, &cfg.solver)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let data = random_data(&mut rng, cfg.params.dim, &fg, &vg);
    let (mut x, rep) = solver.invert_with_report(&data)?;
    for _ in 0..cfg.tolerances.refine_steps {
        let r = data.diff(&apply_upsilon(&x, &cfg.params, &fg, &vg));
        x.axpy(1.0, &solver.invert(&r)?);
    }
    let s = cfg.tolerances.s;
    let back = apply_upsilon(&x, &cfg.params, &fg, &vg);
    let dn = data.norm(&fg, &vg, s);
    let rel = back.diff(&data).norm(&fg, &vg, s) / dn;
    data.write_csv(em.create("data.csv")?)?;
    x.write_csv(em.create("state.csv")?)?;
    let out = LinearOutput {
        data_norm: dn,
        state_norm: x.norm(&fg, &vg, s),
        relative_misfit: rel,
        xi_zero_mode: rep.xi_zero_mode,
        max_cond: rep.max_cond,
        collocation_frequencies: rep.collocation_frequencies,
    };
    em.json("linear_report.json", &out)?;
    em.line(format!("relative misfit: {rel:.3e} (tolerance {:.1e})", cfg.tolerances.roundtrip));
    Ok(rel <= cfg.tolerances.roundtrip)
}

fn run_nonlinear(cfg: &RunConfig, em: &mut Emitter) -> Result<bool> {
    let (fg, vg) = cfg.grids()?;
    let solver = LinearSolver::new(&cfg.params, &fg, &vg, &cfg.solver)?;
    let ps = Pseudo::new(&fg, &vg);
    let fc = &cfg.forcing;
    let forcing = ForcingData::preset(fc.preset, cfg.params.dim, fg.box_len, vg.depth, fc.wavenumber, fc.amplitude);
    if 3 * forcing.max_wavenumber() > fg.modes as i64 {
        return Err(Error::Config(format!(
            "forcing wavenumber {} is not resolved after dealiasing with {} modes",
            forcing.max_wavenumber(),
            fg.modes
        )));
    }
    let delta = fc.delta.unwrap_or_else(|| default_delta(&solver));
    let trace = solve_traveling_wave(&forcing, &solver, &cfg.constitutive(), &ps, &cfg.picard, delta)?;
    em.json("trace.json", &trace)?;
    trace.state.write_csv(em.create("state.csv")?)?;
    let mut w = csv::Writer::from_writer(em.create("residuals.csv")?);
    w.write_record(["iteration", "residual", "factor"])?;
    for (i, r) in trace.residuals.iter().enumerate() {
        let f = if i == 0 { String::new() } else { format!("{:e}", trace.factors[i - 1]) };
        w.write_record([i.to_string(), format!("{r:e}"), f])?;
    }
    w.flush()?;
    drop(w);
    let ok = trace.check().is_ok();
    if ok {
        let pts = sample_grid(&trace.state, &fg, &vg, cfg.samples.eulerian_nx, cfg.samples.eulerian_ny);
        let samples = pushforward_eulerian(&trace.state, &fg, &vg, &pts)?;
        write_samples_csv(em.create("eulerian.csv")?, &samples)?;
    }
    em.line(format!("status: {:?} after {} iterations", trace.status, trace.iterations));
    em.line(format!("final residual: {:.3e}", trace.final_residual()));
    em.line(format!("max |eta|: {:.3e}", trace.max_eta));
    for w in &trace.warnings {
        em.line(format!("warning: {w}"));
    }
    Ok(ok)
}

fn run_roundtrip(cfg: &RunConfig, em: &mut Emitter) -> Result<bool> {
    let (fg, vg) = cfg.grids()?;
    let solver = LinearSolver::new(&cfg.params, &fg, &vg, &cfg.solver)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let s = cfg.tolerances.s;
    let mut w = csv::Writer::from_writer(em.create("roundtrip.csv")?);
    w.write_record(["sample", "data_misfit", "state_misfit"])?;
    let (mut worst_d, mut worst_x): (f64, f64) = (0.0, 0.0);
    for i in 0..cfg.samples.roundtrip_samples {
        let d = random_data(&mut rng, cfg.params.dim, &fg, &vg);
        let back = apply_upsilon(&solver.invert_refined(&d, cfg.tolerances.refine_steps)?, &cfg.params, &fg, &vg);
        let rd = back.diff(&d).norm(&fg, &vg, s) / d.norm(&fg, &vg, s);
        let x = random_state(&mut rng, cfg.params.dim, &fg, &vg);
        let again = solver.invert_refined(&apply_upsilon(&x, &cfg.params, &fg, &vg), cfg.tolerances.refine_steps)?;
        let rx = again.diff(&x).norm(&fg, &vg, s) / x.norm(&fg, &vg, s);
        worst_d = worst_d.max(rd);
        worst_x = worst_x.max(rx);
        w.write_record([i.to_string(), format!("{rd:e}"), format!("{rx:e}")])?;
    }
    w.flush()?;
    em.line(format!("max data-side misfit: {worst_d:.3e}"));
    em.line(format!("max state-side misfit: {worst_x:.3e}"));
    let tol = cfg.tolerances.roundtrip;
    Ok(worst_d <= tol && worst_x <= tol)
}

fn run_norms(cfg: &RunConfig, em: &mut Emitter) -> Result<bool> {
    let (fg, vg) = cfg.grids()?;
    let s = cfg.tolerances.s;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let x = random_state(&mut rng, cfg.params.dim, &fg, &vg);
    let d = apply_upsilon(&x, &cfg.params, &fg, &vg);
    let dt = check_divergence_trace(&d, &fg, &vg);
    let q = estimate_q_norms(&vg, &geometric_samples(0.1, 10.0, cfg.samples.q_samples))?;
    let gate = check_parameter_gate(&cfg.params, &q);
    let rows = [
        ("u", sobolev_norm(&x.u, &fg, &vg, s + 2.0)),
        ("psi", sobolev_norm(&x.psi, &fg, &vg, s + 2.0)),
        ("p", sobolev_norm(&x.p, &fg, &vg, s + 1.0)),
        ("eta", x_norm(&x.eta, &fg, s + 2.5)),
        ("state", x.norm(&fg, &vg, s)),
        ("data", d.norm(&fg, &vg, s)),
        ("divergence_trace_gap", dt.hdot_neg1),
        ("q1", q.q1),
        ("q2", q.q2),
        ("gate_margin", gate.margin),
    ];
    let mut w = csv::Writer::from_writer(em.create("norms.csv")?);
    w.write_record(["quantity", "value"])?;
    let mut text = String::new();
    for (k, v) in rows {
        w.write_record([k.to_string(), format!("{v:e}")])?;
        let _ = writeln!(text, "{k:<22} {v:.6e}");
    }
    w.flush()?;
    em.json("q_norms.json", &q)?;
    em.line(text.trim_end());
    em.line(format!("parameter gate: {}", if gate.pass { "pass" } else { "fail" }));
    Ok(gate.pass && dt.hdot_neg1.is_finite())
}
