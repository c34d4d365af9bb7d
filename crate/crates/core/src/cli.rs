//! Batch front end: parse hypersurface and map files, run the stages, and
//! render deterministic plain-text reports.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};

use crate::blowup::{mhat_good_form, solve_blowup, BlowupData};
use crate::crsystem::{
    check_gw_real, decidable_degree, jet_determination_probe, kernel_automorphisms, ProbeOptions, ProbeReport,
};
use crate::error::{Error, Result};
use crate::holomap::HoloMap;
use crate::hypersurface::{
    check_normal, infinite_type_order, is_good_nonminimal, levi_matrix_along_axis, real_to_complex,
    ComplexDefining, Hypersurface, RealGraph, TypeOrder,
};
use crate::lifting::{check_commuting_square, check_preserves, lift_map, lift_pipeline};
use crate::linalg::{inverse, Mat};
use crate::normalform::{normal_form, NormalFormData};
use crate::scalar::{Backend, CFloat, GaussRat, Scalar};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum BackendArg {
    Exact,
    Float,
}

#[derive(Debug, Parser)]
#[command(name = "crjet", version, about = "Normal forms, blow-ups, lifts and jet probes of real hypersurfaces")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Lower the truncation order of every input.
    #[arg(long, global = true)]
    pub trunc: Option<u32>,
    #[arg(long, global = true, value_enum, default_value = "exact")]
    pub backend: BackendArg,
    /// Jet order K for the determination probe.
    #[arg(long, global = true)]
    pub jet: Option<u32>,
    /// Tangency order ℓ for lifting.
    #[arg(long = "lift-order", global = true)]
    pub lift_order: Option<u32>,
    /// Directory receiving the report and all artifacts.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Normality, type and (with --map) preservation checks.
    Check {
        input: PathBuf,
        #[arg(long)]
        map: Option<PathBuf>,
    },
    /// Rellich normal form of a real graph.
    NormalForm { input: PathBuf },
    /// Normal form followed by the weighted blow-up.
    Blowup { input: PathBuf },
    /// Lift a map, given in the normal-form chart, through the blow-up.
    Lift {
        input: PathBuf,
        #[arg(long)]
        map: PathBuf,
    },
    /// Degree-by-degree jet determination probe.
    Probe { input: PathBuf },
    /// Normal form, blow-up, lift and probe of the blown-up hypersurface.
    Pipeline {
        input: PathBuf,
        #[arg(long)]
        map: Option<PathBuf>,
    },
}

/// A finished job: the report, the files to write, and whether every
/// mathematical check passed.
#[derive(Clone, Debug, PartialEq)]
pub struct Outcome {
    pub report: String,
    pub artifacts: Vec<(String, String)>,
    pub ok: bool,
}

/// Process exit status for an error: 3 for insufficient truncation, 2 for
/// unreadable or malformed input, 1 for a failed mathematical check.
pub fn exit_code(e: &Error) -> i32 {
    match e.root() {
        Error::TruncationBudget { .. } | Error::FlatToTruncation { .. } | Error::JetOrder { .. } => 3,
        Error::Parse { .. }
        | Error::Io { .. }
        | Error::UnknownVariable(_)
        | Error::IncompatibleVars { .. }
        | Error::Invalid(_)
        | Error::NeedsFloatBackend(_) => 2,
        _ => 1,
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::Io {
        path: path.display().to_string(),
        msg: e.to_string(),
    })
}

fn load_hypersurface<C: Scalar>(path: &Path, trunc: Option<u32>) -> Result<Hypersurface<C>> {
    let h = Hypersurface::<C>::parse(&read(path)?)?;
    Ok(match (h, trunc) {
        (Hypersurface::Complex(q), Some(t)) if t < q.trunc() => {
            Hypersurface::Complex(ComplexDefining::new(q.n, q.q.with_trunc(t))?)
        }
        (Hypersurface::Real(g), Some(t)) if t < g.trunc() => Hypersurface::Real(RealGraph::new(g.n, g.series().with_trunc(t))?),
        (h, _) => h,
    })
}

fn load_map<C: Scalar>(path: &Path, trunc: Option<u32>) -> Result<HoloMap<C>> {
    let h = HoloMap::<C>::parse(&read(path)?)?;
    Ok(match trunc {
        Some(t) if t < h.trunc() => h.with_trunc(t),
        _ => h,
    })
}

fn signs(eps: &[i8]) -> String {
    let v: Vec<String> = eps.iter().map(|&e| if e > 0 { "+1".into() } else { "-1".into() }).collect();
    format!("({})", v.join(","))
}

fn list(v: &[u32]) -> String {
    let v: Vec<String> = v.iter().map(u32::to_string).collect();
    format!("({})", v.join(","))
}

fn yes(b: bool) -> &'static str {
    if b {
        "yes"
    } else {
        "no"
    }
}

struct Job {
    report: String,
    artifacts: Vec<(String, String)>,
    ok: bool,
}

impl Job {
    fn new<C: Scalar>(command: &str, trunc: u32) -> Self {
        let mut report = String::new();
        let _ = writeln!(report, "crjet {VERSION} ; command {command} ; backend {} ; trunc {trunc}", C::BACKEND);
        Job {
            report,
            artifacts: Vec::new(),
            ok: true,
        }
    }

    fn line(&mut self, s: impl AsRef<str>) {
        self.report.push_str(s.as_ref());
        self.report.push('\n');
    }

    fn artifact(&mut self, name: &str, text: String) {
        self.artifacts.push((name.to_string(), text));
    }

    fn finish(self) -> Outcome {
        Outcome {
            report: self.report,
            artifacts: self.artifacts,
            ok: self.ok,
        }
    }
}

fn type_line<C: Scalar>(q: &ComplexDefining<C>, g: &RealGraph<C>) -> Result<String> {
    Ok(match infinite_type_order(g) {
        Err(Error::FlatToTruncation { trunc }) => format!("type: flat to order {trunc}"),
        Err(e) => return Err(e),
        Ok(TypeOrder::Minimal) => {
            let a = levi_matrix_along_axis(g)?;
            let n = g.n;
            let m = Mat::from_fn(n, n, |j, k| a[j][k].constant_term());
            if inverse(&m).is_some() {
                "type: minimal (Levi-nondegenerate at 0)".into()
            } else {
                "type: minimal (Levi-degenerate at 0)".into()
            }
        }
        Ok(TypeOrder::Infinite(m)) => match is_good_nonminimal(q) {
            Some(form) => format!("good nonminimal: m={}, ε={}", form.m, signs(&form.epsilons)),
            None => format!("type: {m}-infinite type, not in good nonminimal form"),
        },
    })
}

fn cmd_check<C: Scalar>(cli: &Cli, input: &Path, map: Option<&Path>) -> Result<Outcome> {
    let h = load_hypersurface::<C>(input, cli.trunc)?;
    let q = h.complex()?;
    let g = h.real()?;
    let mut job = Job::new::<C>("check", q.trunc());
    let normal = check_normal(&q)?;
    job.ok &= normal.holds();
    job.line(format!("normal: {} ({normal})", yes(normal.holds())));
    job.line(type_line(&q, &g)?);
    if let Some(path) = map {
        let hm = load_map::<C>(path, cli.trunc)?;
        let pre = check_preserves(&hm, &q)?;
        job.ok &= pre.holds();
        job.line(format!("preserves: {} ({pre})", yes(pre.holds())));
        if let (true, Some(form)) = (pre.holds(), is_good_nonminimal(&q)) {
            let gw = check_gw_real(&hm, form.m)?;
            job.ok &= gw.holds();
            job.line(format!("reality: {gw}"));
        }
    }
    Ok(job.finish())
}

fn nf_lines(job: &mut Job, nf_text: String, eps: &[i8], b: &[u32], residual: f64) {
    job.line(format!("normal form: ε={} b={} residual {residual:e}", signs(eps), list(b)));
    job.artifact("normal_form.txt", nf_text);
}

fn stage_nf<C: Scalar>(job: &mut Job, g: &RealGraph<C>) -> Result<NormalFormData<C>> {
    let nf = normal_form(g).map_err(|e| e.at("normal form"))?;
    let res = nf.residual(g).map_err(|e| e.at("normal form"))?;
    nf_lines(job, nf.to_text(), &nf.epsilons, &nf.exponents, res);
    Ok(nf)
}

fn stage_blowup<C: Scalar>(job: &mut Job, nf: &NormalFormData<C>) -> Result<(BlowupData<C>, ComplexDefining<C>)> {
    let bd = solve_blowup(nf).map_err(|e| e.at("blowup"))?;
    let (qhat, _, form) = mhat_good_form(&bd).map_err(|e| e.at("blowup"))?;
    job.line(format!(
        "blowup: α={} threshold {} ; M̂ trunc {} good nonminimal m={} ε={}",
        list(&bd.alphas),
        bd.threshold,
        bd.mhat.trunc(),
        form.m,
        signs(&form.epsilons)
    ));
    job.artifact("blowup.txt", bd.to_text());
    job.artifact("mhat.txt", Hypersurface::Complex(qhat.clone()).to_text());
    Ok((bd, qhat))
}

fn stage_lift<C: Scalar>(job: &mut Job, h: &HoloMap<C>, nf: &NormalFormData<C>, bd: &BlowupData<C>, ell: u32) -> Result<()> {
    let m = real_to_complex(&nf.reconstruct()?)?;
    let pre = check_preserves(h, &m)?;
    job.line(format!("lift: ℓ={ell} ; H preserves M: {} ({pre})", yes(pre.holds())));
    let hhat = if pre.holds() {
        let out = lift_pipeline(h, &m, bd, ell)?;
        job.ok &= out.square.holds() && out.preserves.holds();
        job.line(format!("  Ĥ trunc {}", out.hhat.trunc()));
        job.line(format!("  commuting square: {} ({})", yes(out.square.holds()), out.square));
        job.line(format!("  Ĥ preserves M̂: {} ({})", yes(out.preserves.holds()), out.preserves));
        job.line(format!("  image residual {:e}", out.image_residual));
        out.hhat
    } else {
        let hhat = lift_map(h, bd, ell).map_err(|e| e.at("lift"))?;
        let square = check_commuting_square(h, &hhat, &bd.alphas)?;
        job.ok &= square.holds();
        job.line(format!("  Ĥ trunc {}", hhat.trunc()));
        job.line(format!("  commuting square: {} ({square})", yes(square.holds())));
        job.line("  Ĥ not certified against M̂ since H does not preserve M");
        hhat
    };
    match hhat.identity_defect() {
        None => job.line("  Ĥ is the identity to its truncation"),
        Some(d) => job.line(format!("  Ĥ agrees with the identity below degree {d}")),
    }
    job.artifact("lift.txt", hhat.to_text());
    Ok(())
}

fn stage_probe<C: Scalar>(job: &mut Job, q: &ComplexDefining<C>, k: Option<u32>) -> Result<Option<ProbeReport<C>>> {
    let opts = ProbeOptions::default();
    let report = match k {
        Some(k) => jet_determination_probe(q, k, opts)?,
        None => {
            let mut found = None;
            let top = decidable_degree(q)?;
            for k in 0..top {
                let r = jet_determination_probe(q, k, opts)?;
                if r.is_determined() {
                    found = Some(r);
                    break;
                }
            }
            match found {
                Some(r) => r,
                None => {
                    job.ok = false;
                    job.line(format!("probe: no jet order below {top} determines at trunc {}", q.trunc()));
                    return Ok(None);
                }
            }
        }
    };
    job.ok &= report.is_determined();
    job.report.push_str(&report.to_string());
    job.artifact("probe.txt", report.to_string());
    Ok(Some(report))
}

fn default_ell(bd: &BlowupData<impl Scalar>) -> u32 {
    bd.alphas.iter().copied().chain([bd.threshold]).max().unwrap_or(0)
}

/// A truncated automorphism of `m` of order `ℓ + 1` from the probe, when
/// the truncation allows the linearized equation to be exact.
fn probe_automorphism<C: Scalar>(m: &ComplexDefining<C>, ell: u32) -> Result<Option<HoloMap<C>>> {
    let d = (ell + 1).max(m.trunc() / 2 + 1);
    if d > m.trunc() {
        return Ok(None);
    }
    let auts = kernel_automorphisms(m, d, ProbeOptions::default())?;
    Ok(auts.into_iter().find(|h| h.identity_defect().is_some()))
}

fn cmd_pipeline<C: Scalar>(cli: &Cli, input: &Path, map: Option<&Path>, lift_only: bool) -> Result<Outcome> {
    let g = load_hypersurface::<C>(input, cli.trunc)?.real()?;
    let mut job = Job::new::<C>(if lift_only { "lift" } else { "pipeline" }, g.trunc());
    let nf = stage_nf(&mut job, &g)?;
    let (bd, qhat) = stage_blowup(&mut job, &nf)?;
    let ell = cli.lift_order.unwrap_or_else(|| default_ell(&bd));
    let h = match map {
        Some(p) => Some(load_map::<C>(p, cli.trunc)?),
        None if lift_only => None,
        None => {
            let m = real_to_complex(&nf.reconstruct()?)?;
            let h = probe_automorphism(&m, ell)?;
            match &h {
                Some(h) => {
                    job.line(format!(
                        "automorphism of M from the probe: identity below degree {}",
                        h.identity_defect().unwrap_or(h.trunc() + 1)
                    ));
                    job.artifact("automorphism.txt", h.to_text());
                }
                None => job.line(format!("automorphism of M from the probe: none at trunc {}", m.trunc())),
            }
            h
        }
    };
    if let Some(h) = h {
        stage_lift(&mut job, &h, &nf, &bd, ell)?;
    }
    if !lift_only {
        stage_probe(&mut job, &qhat, cli.jet)?;
    }
    Ok(job.finish())
}

fn dispatch<C: Scalar>(cli: &Cli) -> Result<Outcome> {
    if let Some(t) = cli.trunc {
        if t < 2 {
            return Err(Error::Invalid(format!("--trunc must be at least 2, got {t}")));
        }
    }
    match &cli.command {
        Command::Check { input, map } => cmd_check::<C>(cli, input, map.as_deref()),
        Command::NormalForm { input } => {
            let g = load_hypersurface::<C>(input, cli.trunc)?.real()?;
            let mut job = Job::new::<C>("normal-form", g.trunc());
            stage_nf(&mut job, &g)?;
            Ok(job.finish())
        }
        Command::Blowup { input } => {
            let g = load_hypersurface::<C>(input, cli.trunc)?.real()?;
            let mut job = Job::new::<C>("blowup", g.trunc());
            let nf = stage_nf(&mut job, &g)?;
            stage_blowup(&mut job, &nf)?;
            Ok(job.finish())
        }
        Command::Lift { input, map } => cmd_pipeline::<C>(cli, input, Some(map), true),
        Command::Probe { input } => {
            let q = load_hypersurface::<C>(input, cli.trunc)?.complex()?;
            let mut job = Job::new::<C>("probe", q.trunc());
            stage_probe(&mut job, &q, cli.jet)?;
            Ok(job.finish())
        }
        Command::Pipeline { input, map } => cmd_pipeline::<C>(cli, input, map.as_deref(), false),
    }
}

/// Runs the job on the selected backend. Artifacts are not written here.
pub fn run(cli: &Cli) -> Result<Outcome> {
    let backend = match cli.backend {
        BackendArg::Exact => Backend::Exact,
        BackendArg::Float => Backend::Float,
    };
    match backend {
        Backend::Exact => dispatch::<GaussRat>(cli),
        Backend::Float => dispatch::<CFloat>(cli),
    }
}

/// Writes `report.txt` and every artifact into `dir`.
pub fn write_outputs(dir: &Path, out: &Outcome) -> Result<()> {
    let io = |e: std::io::Error| Error::Io {
        path: dir.display().to_string(),
        msg: e.to_string(),
    };
    fs::create_dir_all(dir).map_err(io)?;
    fs::write(dir.join("report.txt"), &out.report).map_err(io)?;
    for (name, text) in &out.artifacts {
        fs::write(dir.join(name), text).map_err(io)?;
    }
    Ok(())
}

/// Parses arguments, runs, prints, and returns the process exit status.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match run(&cli) {
        Ok(out) => {
            print!("{}", out.report);
            if let Some(dir) = &cli.out {
                if let Err(e) = write_outputs(dir, &out) {
                    eprintln!("error: {e}");
                    return exit_code(&e);
                }
            }
            if out.ok {
                0
            } else {
                1
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}
