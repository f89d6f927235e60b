//! Command-line experiment runner.
//!
//! Every subcommand reads its parameters from flags and, optionally, from a
//! JSON file given with `--config` whose keys are the flag names. Flags win
//! over the file. Outputs are CSV with `#` header lines that record the code
//! version and the fully resolved parameters.

use std::f64::consts::FRAC_PI_2;
use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64 as C64;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::ensembles::{self, EnsembleKind, EnsembleSpec, Evolver};
use crate::error::{Error, Result};
use crate::floquet::{self, Boundary, FloquetSpec};
use crate::hpr::{self, HprLayout};
use crate::noise::{self, DepolarizingF, NoiseModel};
use crate::otoc;
use crate::rng;
use crate::spectrum::XxxSpectrum;
use crate::statevector::{PauliString, QuantumState};
use crate::tpq::{self, FilterSpec, HeisenbergSpec};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub const EXIT_OK: i32 = 0;
pub const EXIT_RUNTIME: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_CAPACITY: i32 = 3;

#[derive(Parser, Debug)]
#[command(name = "qscramble", version, about = "Scrambling experiments on a statevector simulator")]
struct Cli {
    /// JSON file with default values for the subcommand's flags.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Output file (stdout when absent). For `tpq` this is a path stem.
    #[arg(long, short, global = true)]
    output: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Hayden-Preskill recovery: P_EPR and F_EPR versus Floquet cycles.
    Hpr(HprArgs),
    /// OTOC for arbitrary Pauli strings.
    Otoc(OtocArgs),
    /// OTOC with O_A = Z1 and O_D = X_n over a grid of (n, m).
    OtocGrid(OtocGridArgs),
    /// Microcanonical expectation values from Loschmidt amplitudes.
    Tpq(TpqArgs),
    /// Ensemble mean and spread of Loschmidt amplitudes.
    EnsembleStats(EnsembleArgs),
    /// Two-qubit gates causally connected to a set of sites.
    Lightcone(LightconeArgs),
    /// Invert the depolarizing model for measured values.
    Mitigate(MitigateArgs),
    /// Shot count for a target precision.
    ResourceEstimate(ResourceArgs),
    /// Gate list of (U_F)^m as JSON.
    CircuitDump(CircuitArgs),
}

fn parse_boundary(s: &str) -> std::result::Result<Boundary, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

/// Parses "3", "0..14" (inclusive), "0..=14" and comma-separated mixes.
pub fn parse_index_list(s: &str) -> Result<Vec<usize>> {
    let bad = || Error::Config(format!("cannot parse index list '{s}'"));
    let mut out = Vec::new();
    for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        if let Some((a, b)) = part.split_once("..") {
            let b = b.strip_prefix('=').unwrap_or(b);
            let (a, b): (usize, usize) = (a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?);
            if b < a {
                return Err(bad());
            }
            out.extend(a..=b);
        } else {
            out.push(part.parse().map_err(|_| bad())?);
        }
    }
    if out.is_empty() {
        return Err(bad());
    }
    Ok(out)
}

macro_rules! chain_fields {
    ($(#[$m:meta])* $vis:vis struct $name:ident { $($(#[$fm:meta])* $f:ident : $t:ty,)* }) => {
        $(#[$m])*
        $vis struct $name {
            /// Number of sites N.
            #[arg(long)]
            n: Option<usize>,
            /// J·T.
            #[arg(long)]
            jt: Option<f64>,
            /// B_X / J.
            #[arg(long)]
            bx_ratio: Option<f64>,
            /// B_Z / J.
            #[arg(long)]
            bz_ratio: Option<f64>,
            #[arg(long, value_parser = parse_boundary)]
            boundary: Option<Boundary>,
            /// Shorthand for `--boundary open`.
            #[arg(long, conflicts_with_all = ["periodic", "boundary"])]
            #[serde(skip)]
            open: bool,
            /// Shorthand for `--boundary periodic`.
            #[arg(long, conflicts_with = "boundary")]
            #[serde(skip)]
            periodic: bool,
            $($(#[$fm])* $f: $t,)*
        }

        impl ChainArgs for $name {
            fn chain_mut(&mut self) -> ChainRefs<'_> {
                ChainRefs {
                    n: &mut self.n,
                    jt: &mut self.jt,
                    bx_ratio: &mut self.bx_ratio,
                    bz_ratio: &mut self.bz_ratio,
                    boundary: &mut self.boundary,
                    open: self.open,
                    periodic: self.periodic,
                }
            }
        }
    };
}

struct ChainRefs<'a> {
    n: &'a mut Option<usize>,
    jt: &'a mut Option<f64>,
    bx_ratio: &'a mut Option<f64>,
    bz_ratio: &'a mut Option<f64>,
    boundary: &'a mut Option<Boundary>,
    open: bool,
    periodic: bool,
}

trait ChainArgs {
    fn chain_mut(&mut self) -> ChainRefs<'_>;

    fn fold_boundary_flags(&mut self) {
        let c = self.chain_mut();
        if c.open {
            *c.boundary = Some(Boundary::Open);
        } else if c.periodic {
            *c.boundary = Some(Boundary::Periodic);
        }
    }

    fn chain_defaults(&mut self, boundary: Boundary) {
        let c = self.chain_mut();
        c.jt.get_or_insert(FRAC_PI_2);
        c.bx_ratio.get_or_insert(1.0);
        c.bz_ratio.get_or_insert(1.3);
        c.boundary.get_or_insert(boundary);
    }

    fn floquet(&mut self) -> Result<FloquetSpec> {
        let c = self.chain_mut();
        let n = c.n.ok_or_else(|| Error::Config("missing --n".into()))?;
        FloquetSpec::from_ratios(
            n,
            c.jt.expect("defaults applied"),
            c.bx_ratio.expect("defaults applied"),
            c.bz_ratio.expect("defaults applied"),
            c.boundary.expect("defaults applied"),
        )
    }
}

chain_fields! {
    #[derive(Args, Debug, Default, Serialize, Deserialize)]
    #[serde(rename_all = "kebab-case", deny_unknown_fields)]
    struct HprArgs {
        /// Sites in A.
        #[arg(long)]
        na: Option<usize>,
        /// Sites in D.
        #[arg(long)]
        nd: Option<usize>,
        /// Cycle list, e.g. "0..14" or "0,2,4".
        #[arg(long)]
        m: Option<String>,
        /// Exact probabilities (the default unless --shots is given).
        #[arg(long, num_args = 0..=1, default_missing_value = "true")]
        exact: Option<bool>,
        #[arg(long)]
        shots: Option<u64>,
        #[arg(long)]
        seed: Option<u64>,
        /// Noise preset (H1-1, H1-2) for the depolarized columns.
        #[arg(long)]
        noise: Option<String>,
        /// Noise model JSON {label, p, p_a, p_b}.
        #[arg(long)]
        noise_file: Option<PathBuf>,
    }
}

chain_fields! {
    #[derive(Args, Debug, Default, Serialize, Deserialize)]
    #[serde(rename_all = "kebab-case", deny_unknown_fields)]
    struct OtocArgs {
        /// Measurement operator, e.g. "Z1".
        #[arg(long)]
        o_a: Option<String>,
        /// Butterfly operator, e.g. "X5".
        #[arg(long)]
        o_d: Option<String>,
        #[arg(long)]
        m: Option<String>,
        #[arg(long)]
        shots: Option<u64>,
        #[arg(long)]
        seed: Option<u64>,
    }
}

chain_fields! {
    #[derive(Args, Debug, Default, Serialize, Deserialize)]
    #[serde(rename_all = "kebab-case", deny_unknown_fields)]
    struct OtocGridArgs {
        /// Butterfly sites, e.g. "1..12".
        #[arg(long)]
        sites: Option<String>,
        #[arg(long)]
        m: Option<String>,
        #[arg(long)]
        shots: Option<u64>,
        #[arg(long)]
        seed: Option<u64>,
    }
}

chain_fields! {
    #[derive(Args, Debug, Default, Serialize, Deserialize)]
    #[serde(rename_all = "kebab-case", deny_unknown_fields)]
    struct TpqArgs {
        /// Heisenberg coupling J.
        #[arg(long)]
        coupling: Option<f64>,
        /// Floquet scrambling cycles (default N).
        #[arg(long)]
        m: Option<usize>,
        /// Observable, e.g. "Z1Z2".
        #[arg(long)]
        observable: Option<String>,
        /// Filter width (default σ_H/√(2π)).
        #[arg(long)]
        sigma: Option<f64>,
        /// Truncation S.
        #[arg(long)]
        s: Option<usize>,
        #[arg(long)]
        dt: Option<f64>,
        #[arg(long)]
        e_min: Option<f64>,
        #[arg(long)]
        e_max: Option<f64>,
        #[arg(long)]
        e_points: Option<usize>,
        /// Independent initial states averaged together.
        #[arg(long)]
        instances: Option<usize>,
        #[arg(long)]
        shots: Option<u64>,
        #[arg(long)]
        seed: Option<u64>,
        /// Add the dense microcanonical value (N <= 12, diagonal observables).
        #[arg(long, num_args = 0..=1, default_missing_value = "true")]
        reference: Option<bool>,
    }
}

chain_fields! {
    #[derive(Args, Debug, Default, Serialize, Deserialize)]
    #[serde(rename_all = "kebab-case", deny_unknown_fields)]
    struct EnsembleArgs {
        #[arg(long)]
        coupling: Option<f64>,
        /// floquet_cycles, floquet_fixed_m or haar.
        #[arg(long)]
        kind: Option<String>,
        #[arg(long)]
        m: Option<usize>,
        #[arg(long)]
        m_min: Option<usize>,
        #[arg(long)]
        m_max: Option<usize>,
        #[arg(long)]
        members: Option<usize>,
        /// exact or trotter.
        #[arg(long)]
        evolver: Option<String>,
        #[arg(long)]
        s: Option<usize>,
        #[arg(long)]
        dt: Option<f64>,
        #[arg(long)]
        seed: Option<u64>,
    }
}

chain_fields! {
    #[derive(Args, Debug, Default, Serialize, Deserialize)]
    #[serde(rename_all = "kebab-case", deny_unknown_fields)]
    struct LightconeArgs {
        /// Seed sites, e.g. "8,9".
        #[arg(long)]
        seed_sites: Option<String>,
        #[arg(long)]
        m: Option<String>,
    }
}

chain_fields! {
    #[derive(Args, Debug, Default, Serialize, Deserialize)]
    #[serde(rename_all = "kebab-case", deny_unknown_fields)]
    struct CircuitArgs {
        #[arg(long)]
        m: Option<usize>,
        /// Dump U* instead of U.
        #[arg(long, num_args = 0..=1, default_missing_value = "true")]
        conjugated: Option<bool>,
    }
}

#[derive(Args, Debug, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
struct MitigateArgs {
    #[arg(long)]
    p_noisy: Option<f64>,
    #[arg(long)]
    f_noisy: Option<f64>,
    /// Noisy complex amplitude "re" or "re,im" for amplitude-level mitigation.
    #[arg(long)]
    amplitude: Option<String>,
    /// Depolarizing fidelity f; alternatively give --noise, --theta and --n2q.
    #[arg(long)]
    f: Option<f64>,
    #[arg(long)]
    noise: Option<String>,
    #[arg(long)]
    noise_file: Option<PathBuf>,
    #[arg(long)]
    theta: Option<f64>,
    #[arg(long)]
    n2q: Option<u64>,
    #[arg(long)]
    da: Option<u64>,
    #[arg(long)]
    dd: Option<u64>,
}

#[derive(Args, Debug, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
struct ResourceArgs {
    #[arg(long)]
    sigma: Option<f64>,
    #[arg(long)]
    dt: Option<f64>,
    #[arg(long)]
    op_norm: Option<f64>,
    /// Target precision ε'.
    #[arg(long)]
    eps: Option<f64>,
}

/// Overlays non-null flag values on the config object and re-parses.
fn merge<T: Serialize + DeserializeOwned>(cli: &T, config: Option<&Value>) -> Result<T> {
    let cfg_err = |e: serde_json::Error| Error::Config(e.to_string());
    let mut base = match config {
        Some(Value::Object(m)) => m.clone(),
        Some(_) => return Err(Error::Config("config file must hold a JSON object".into())),
        None => serde_json::Map::new(),
    };
    if let Value::Object(flags) = serde_json::to_value(cli).map_err(cfg_err)? {
        for (k, v) in flags {
            if !v.is_null() {
                base.insert(k, v);
            }
        }
    }
    serde_json::from_value(Value::Object(base)).map_err(cfg_err)
}

struct Output {
    header: String,
}

impl Output {
    fn new(command: &str, resolved: &impl Serialize) -> Result<Self> {
        let mut v = serde_json::to_value(resolved).map_err(|e| Error::Config(e.to_string()))?;
        if let Value::Object(m) = &mut v {
            m.retain(|_, x| !x.is_null());
            m.insert("command".into(), Value::String(command.into()));
        }
        Ok(Self { header: format!("# qscramble {VERSION}\n# config: {v}\n") })
    }

    fn table(&self, columns: &[&str]) -> String {
        format!("{}{}\n", self.header, columns.join(","))
    }
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map_or_else(String::new, |v| v.to_string())
}

fn noise_model(preset: &Option<String>, file: &Option<PathBuf>) -> Result<Option<NoiseModel>> {
    match (preset, file) {
        (Some(_), Some(_)) => Err(Error::Config("give either --noise or --noise-file".into())),
        (Some(p), None) => NoiseModel::preset(p).map(Some),
        (None, Some(f)) => NoiseModel::load(f).map(Some),
        (None, None) => Ok(None),
    }
}

fn required<T: Copy>(x: Option<T>, flag: &str) -> Result<T> {
    x.ok_or_else(|| Error::Config(format!("missing --{flag}")))
}

fn cmd_hpr(mut a: HprArgs) -> Result<String> {
    a.chain_defaults(Boundary::Open);
    a.na.get_or_insert(1);
    a.nd.get_or_insert(2);
    a.m.get_or_insert_with(|| "0".into());
    a.seed.get_or_insert(0);
    if a.shots.is_some() && a.exact == Some(true) {
        return Err(Error::Config("--exact and --shots are mutually exclusive".into()));
    }
    a.exact = Some(a.shots.is_none());
    let spec = a.floquet()?;
    let layout = HprLayout::new(spec.n_sites, a.na.unwrap(), a.nd.unwrap())?;
    let ms = parse_index_list(a.m.as_deref().unwrap())?;
    let model = noise_model(&a.noise, &a.noise_file)?;
    let out = Output::new("hpr", &a)?;
    let exact = hpr::run_exact_sweep(&spec, &layout, &ms)?;
    let d_sites: Vec<usize> = (spec.n_sites - layout.n_d + 1..=spec.n_sites).collect();
    let mut cols = vec!["m", "p_epr", "f_epr", "p_stderr", "f_stderr", "d2pf"];
    if model.is_some() {
        cols.extend(["n_2q", "f_depol", "p_noisy", "f_noisy"]);
    }
    let mut s = out.table(&cols);
    for r in exact {
        let r = match a.shots {
            Some(shots) => hpr::sample_from_exact(&r, shots, &mut rng::derive(a.seed.unwrap(), &[r.cycles as u64]))?,
            None => r,
        };
        let d2pf = r.f_epr.map(|f| noise::scrambling_diagnostic(r.p_epr, f, layout.d_a()));
        write!(
            s,
            "{},{},{},{},{},{}",
            r.cycles,
            r.p_epr,
            fmt_opt(r.f_epr),
            fmt_opt(r.p_stderr),
            fmt_opt(r.f_stderr),
            fmt_opt(d2pf)
        )
        .unwrap();
        if let Some(model) = &model {
            let n2q = floquet::lightcone_count(&spec, r.cycles, &d_sites)?;
            let f = noise::depolarizing_f(model, spec.jt, n2q as u64);
            let noisy = r
                .f_epr
                .map(|fe| noise::hpr_forward(r.p_epr, fe, f, layout.d_a(), layout.d_d()))
                .transpose()?;
            write!(
                s,
                ",{},{},{},{}",
                n2q,
                f.value(),
                fmt_opt(noisy.map(|x| x.0)),
                fmt_opt(noisy.map(|x| x.1))
            )
            .unwrap();
        }
        s.push('\n');
    }
    Ok(s)
}

fn cmd_otoc(mut a: OtocArgs) -> Result<String> {
    a.chain_defaults(Boundary::Open);
    a.o_a.get_or_insert_with(|| "Z1".into());
    a.m.get_or_insert_with(|| "0".into());
    a.seed.get_or_insert(0);
    let spec = a.floquet()?;
    if a.o_d.is_none() {
        return Err(Error::Config("missing --o-d".into()));
    }
    let o_a = PauliString::parse_sites(a.o_a.as_deref().unwrap()).map_err(|e| Error::Config(e.to_string()))?;
    let o_d = PauliString::parse_sites(a.o_d.as_deref().unwrap()).map_err(|e| Error::Config(e.to_string()))?;
    let ms = parse_index_list(a.m.as_deref().unwrap())?;
    let out = Output::new("otoc", &a)?;
    let input = QuantumState::zero(spec.n_sites)?;
    let single_butterfly = (o_d.weight() == 1).then(|| o_d.factors()[0].0 + 1);
    let z1 = o_a == PauliString::parse_sites("Z1").expect("literal");
    let mut s = out.table(&["m", "value_re", "value_im", "stderr_re", "stderr_im", "n_2q"]);
    for m in ms {
        let p = match a.shots {
            Some(shots) => otoc::otoc_shots(&spec, m, &o_a, &o_d, &input, shots, &mut rng::derive(a.seed.unwrap(), &[m as u64]))?,
            None => otoc::OtocPoint::exact(0, m, otoc::otoc_exact(&spec, m, &o_a, &o_d, &input)?),
        };
        let gates = match (z1, single_butterfly) {
            (true, Some(site)) => Some(otoc::interferometric_gate_count(&spec, m, site)?.to_string()),
            _ => None,
        };
        writeln!(
            s,
            "{},{},{},{},{},{}",
            m,
            p.value.re,
            p.value.im,
            fmt_opt(p.stderr_re),
            fmt_opt(p.stderr_im),
            gates.unwrap_or_default()
        )
        .unwrap();
    }
    Ok(s)
}

fn cmd_otoc_grid(mut a: OtocGridArgs) -> Result<String> {
    a.chain_defaults(Boundary::Open);
    a.m.get_or_insert_with(|| "0".into());
    a.seed.get_or_insert(0);
    let spec = a.floquet()?;
    a.sites.get_or_insert_with(|| format!("1..{}", spec.n_sites));
    let sites = parse_index_list(a.sites.as_deref().unwrap())?;
    let ms = parse_index_list(a.m.as_deref().unwrap())?;
    let out = Output::new("otoc-grid", &a)?;
    let rows = otoc::otoc_grid(&spec, &sites, &ms, a.shots, a.seed.unwrap())?;
    let mut s = out.table(&["n", "m", "value", "stderr", "normalized", "norm_stderr"]);
    for r in rows {
        writeln!(
            s,
            "{},{},{},{},{},{}",
            r.raw.butterfly_site,
            r.raw.cycles,
            r.raw.value.re,
            fmt_opt(r.raw.stderr_re),
            fmt_opt(r.normalized.map(|p| p.value.re)),
            fmt_opt(r.normalized.and_then(|p| p.stderr_re))
        )
        .unwrap();
    }
    Ok(s)
}

fn cmd_tpq(mut a: TpqArgs) -> Result<(String, String)> {
    a.chain_defaults(Boundary::Periodic);
    a.coupling.get_or_insert(1.0);
    a.observable.get_or_insert_with(|| "Z1Z2".into());
    a.instances.get_or_insert(1);
    a.seed.get_or_insert(0);
    a.reference.get_or_insert(false);
    let spec = a.floquet()?;
    let heis = HeisenbergSpec::new(spec.n_sites, a.coupling.unwrap())?;
    let (e_inf, var) = tpq::xxx_moments(&heis)?;
    let sd = var.sqrt();
    a.m.get_or_insert(spec.n_sites);
    a.sigma.get_or_insert((var / (2.0 * std::f64::consts::PI)).sqrt());
    a.s.get_or_insert(tpq::DEFAULT_TRUNC_S);
    a.dt.get_or_insert(tpq::DEFAULT_DT / heis.coupling.abs());
    a.e_min.get_or_insert(e_inf - 2.0 * sd);
    a.e_max.get_or_insert(e_inf + 2.0 * sd);
    a.e_points.get_or_insert(41);
    let k = a.e_points.unwrap();
    let (lo, hi) = (a.e_min.unwrap(), a.e_max.unwrap());
    let grid: Vec<f64> = (0..k)
        .map(|i| if k == 1 { lo } else { lo + (hi - lo) * i as f64 / (k - 1) as f64 })
        .collect();
    let filter = FilterSpec::new(a.sigma.unwrap(), grid, a.s.unwrap(), a.dt.unwrap())?;
    let obs = PauliString::parse_sites(a.observable.as_deref().unwrap()).map_err(|e| Error::Config(e.to_string()))?;
    let instances = a.instances.unwrap();
    if instances == 0 {
        return Err(Error::Config("--instances must be positive".into()));
    }
    let out = Output::new("tpq", &a)?;

    let seed = a.seed.unwrap();
    let mut acc: Option<tpq::LoschmidtSeries> = None;
    for i in 0..instances {
        let mut r = rng::derive(seed, &[i as u64]);
        let mut psi = tpq::random_product_state(spec.n_sites, &mut r)?;
        floquet::evolve(&mut psi, &spec, a.m.unwrap(), false, 0)?;
        let s = tpq::loschmidt_series(&psi, &heis, &filter, Some(&obs), a.shots, &mut r)?;
        acc = Some(match acc {
            None => s,
            Some(mut t) => {
                add_series(&mut t, &s);
                t
            }
        });
    }
    let mut series = acc.expect("at least one instance");
    scale_series(&mut series, instances as f64);
    let series = tpq::symmetrize(&series)?;
    let dos = tpq::dos_transform(&series, &filter)?;
    let reference = if a.reference.unwrap() {
        let sp = XxxSpectrum::new(heis.n_sites, heis.coupling)?;
        Some(
            filter
                .e_grid
                .iter()
                .map(|&e| sp.microcanonical(&obs, filter.sigma, e))
                .collect::<Result<Vec<f64>>>()?,
        )
    } else {
        None
    };

    let mut s1 = out.table(&["t", "re_l", "im_l", "re_lo", "im_lo", "se_re_l", "se_im_l", "se_re_lo", "se_im_lo"]);
    for i in 0..series.times.len() {
        let l = series.values[i];
        let lo = series.values_op.as_ref().map_or(C64::new(0.0, 0.0), |v| v[i]);
        let se = series.stderr.as_ref().map(|v| v[i]);
        let seo = series.stderr_op.as_ref().map(|v| v[i]);
        writeln!(
            s1,
            "{},{},{},{},{},{},{},{},{}",
            series.times[i],
            l.re,
            l.im,
            lo.re,
            lo.im,
            fmt_opt(se.map(|x| x.0)),
            fmt_opt(se.map(|x| x.1)),
            fmt_opt(seo.map(|x| x.0)),
            fmt_opt(seo.map(|x| x.1))
        )
        .unwrap();
    }
    let mut s2 = out.table(&["e", "d", "d_o", "estimator", "valid", "reference"]);
    for i in 0..dos.energies.len() {
        writeln!(
            s2,
            "{},{},{},{},{},{}",
            dos.energies[i],
            dos.d_values[i],
            dos.d_op_values.as_ref().map_or(0.0, |v| v[i]),
            fmt_opt(dos.estimator[i]),
            dos.valid[i],
            fmt_opt(reference.as_ref().map(|v| v[i]))
        )
        .unwrap();
    }
    Ok((s1, s2))
}

fn add_series(acc: &mut tpq::LoschmidtSeries, s: &tpq::LoschmidtSeries) {
    acc.values.iter_mut().zip(&s.values).for_each(|(a, b)| *a += b);
    if let (Some(a), Some(b)) = (acc.values_op.as_mut(), s.values_op.as_ref()) {
        a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
    }
    let add_se = |a: &mut Option<Vec<(f64, f64)>>, b: &Option<Vec<(f64, f64)>>| {
        if let (Some(a), Some(b)) = (a.as_mut(), b.as_ref()) {
            // accumulate variances; rescaled in scale_series
            a.iter_mut().zip(b).for_each(|(x, y)| {
                x.0 = (x.0 * x.0 + y.0 * y.0).sqrt();
                x.1 = (x.1 * x.1 + y.1 * y.1).sqrt();
            });
        }
    };
    add_se(&mut acc.stderr, &s.stderr);
    add_se(&mut acc.stderr_op, &s.stderr_op);
}

fn scale_series(s: &mut tpq::LoschmidtSeries, k: f64) {
    s.values.iter_mut().for_each(|v| *v /= k);
    if let Some(v) = s.values_op.as_mut() {
        v.iter_mut().for_each(|v| *v /= k);
    }
    for se in [s.stderr.as_mut(), s.stderr_op.as_mut()].into_iter().flatten() {
        se.iter_mut().for_each(|x| {
            x.0 /= k;
            x.1 /= k;
        });
    }
}

fn cmd_ensemble(mut a: EnsembleArgs) -> Result<String> {
    a.chain_defaults(Boundary::Periodic);
    a.coupling.get_or_insert(1.0);
    a.kind.get_or_insert_with(|| "floquet_fixed_m".into());
    a.evolver.get_or_insert_with(|| "exact".into());
    a.s.get_or_insert(tpq::DEFAULT_TRUNC_S);
    a.dt.get_or_insert(tpq::DEFAULT_DT);
    a.seed.get_or_insert(0);
    let spec = a.floquet()?;
    let kind = match a.kind.as_deref().unwrap() {
        "floquet_cycles" => EnsembleKind::FloquetCycles {
            m_min: *a.m_min.get_or_insert(0),
            m_max: *a.m_max.get_or_insert(2 * spec.n_sites),
        },
        "floquet_fixed_m" => EnsembleKind::FloquetFixedM {
            m: *a.m.get_or_insert(spec.n_sites / 2),
            members: *a.members.get_or_insert(16),
        },
        "haar" => EnsembleKind::Haar { members: *a.members.get_or_insert(16) },
        other => return Err(Error::Config(format!("unknown ensemble kind '{other}'"))),
    };
    let evolver = match a.evolver.as_deref().unwrap() {
        "exact" => Evolver::Exact,
        "trotter" => Evolver::Trotter,
        other => return Err(Error::Config(format!("unknown evolver '{other}'"))),
    };
    let heis = HeisenbergSpec::new(spec.n_sites, a.coupling.unwrap())?;
    let filter = FilterSpec::new(1.0, vec![], a.s.unwrap(), a.dt.unwrap())?;
    let ens = EnsembleSpec { kind, floquet: spec, seed: a.seed.unwrap() };
    let out = Output::new("ensemble-stats", &a)?;
    let sp = if heis.n_sites <= crate::spectrum::MAX_DENSE_SITES {
        Some(XxxSpectrum::new(heis.n_sites, heis.coupling)?)
    } else if evolver == Evolver::Exact {
        return Err(Error::Capacity("exact evolver needs a dense spectrum (N <= 12)".into()));
    } else {
        None
    };
    let st = ensembles::ensemble_series_stats_with(&ens, &heis, &filter, evolver, sp.as_ref())?;
    let mut s = out.table(&["t", "mean_re", "mean_im", "sd_re", "sd_im", "sd_total", "haar_sd"]);
    for i in 0..st.times.len() {
        let haar = sp
            .as_ref()
            .map(|sp| ensembles::haar_variance(sp.sff(st.times[i]), sp.dim() as f64).sqrt());
        writeln!(
            s,
            "{},{},{},{},{},{},{}",
            st.times[i],
            st.mean[i].re,
            st.mean[i].im,
            st.var_re[i].sqrt(),
            st.var_im[i].sqrt(),
            st.var_total[i].sqrt(),
            fmt_opt(haar)
        )
        .unwrap();
    }
    Ok(s)
}

fn cmd_lightcone(mut a: LightconeArgs) -> Result<String> {
    a.chain_defaults(Boundary::Open);
    a.m.get_or_insert_with(|| "0".into());
    let spec = a.floquet()?;
    a.seed_sites.get_or_insert_with(|| spec.n_sites.to_string());
    let seed = parse_index_list(a.seed_sites.as_deref().unwrap())?;
    let ms = parse_index_list(a.m.as_deref().unwrap())?;
    let out = Output::new("lightcone", &a)?;
    let mut s = out.table(&["m", "n_2q"]);
    for m in ms {
        writeln!(s, "{},{}", m, floquet::lightcone_count(&spec, m, &seed)?).unwrap();
    }
    Ok(s)
}

fn depol_from_args(f: Option<f64>, preset: &Option<String>, file: &Option<PathBuf>, theta: Option<f64>, n2q: Option<u64>) -> Result<DepolarizingF> {
    match (f, noise_model(preset, file)?) {
        (Some(_), Some(_)) => Err(Error::Config("give either --f or a noise model".into())),
        (Some(f), None) => DepolarizingF::new(f),
        (None, Some(m)) => Ok(noise::depolarizing_f(&m, required(theta, "theta")?, required(n2q, "n2q")?)),
        (None, None) => Err(Error::Config("missing --f (or --noise with --theta and --n2q)".into())),
    }
}

fn cmd_mitigate(mut a: MitigateArgs) -> Result<String> {
    a.da.get_or_insert(2);
    a.dd.get_or_insert(4);
    let f = depol_from_args(a.f, &a.noise, &a.noise_file, a.theta, a.n2q)?;
    let (da, dd) = (a.da.unwrap() as f64, a.dd.unwrap() as f64);
    let out = Output::new("mitigate", &a)?;
    let mut s = out.table(&["quantity", "raw", "mitigated", "clamped"]);
    if let Some(p) = a.p_noisy {
        // F does not enter the P inversion; any placeholder works when it is absent
        let fv = a.f_noisy.unwrap_or(1.0);
        let m = noise::mitigate_hpr(p, fv, f, da, dd)?;
        writeln!(s, "p_epr,{},{},{}", p, m.p, m.p_clamped).unwrap();
        if let Some(fv) = a.f_noisy {
            writeln!(s, "f_epr,{},{},{}", fv, m.f, m.f_clamped).unwrap();
            writeln!(s, "d2pf,{},{},", noise::scrambling_diagnostic(p, fv, da), noise::scrambling_diagnostic(m.p, m.f, da)).unwrap();
        }
    } else if a.f_noisy.is_some() {
        return Err(Error::Config("--f-noisy needs --p-noisy".into()));
    }
    if let Some(amp) = &a.amplitude {
        let parts: Vec<f64> = amp
            .split(',')
            .map(|x| x.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| Error::Config(format!("cannot parse amplitude '{amp}'")))?;
        let v = match parts[..] {
            [re] => C64::new(re, 0.0),
            [re, im] => C64::new(re, im),
            _ => return Err(Error::Config(format!("cannot parse amplitude '{amp}'"))),
        };
        let m = noise::mitigate_amplitude(v, f)?;
        writeln!(s, "amplitude_re,{},{},", v.re, m.re).unwrap();
        writeln!(s, "amplitude_im,{},{},", v.im, m.im).unwrap();
    }
    writeln!(s, "f,{},,", f.value()).unwrap();
    Ok(s)
}

fn cmd_resource(mut a: ResourceArgs) -> Result<String> {
    a.op_norm.get_or_insert(1.0);
    a.dt.get_or_insert(tpq::DEFAULT_DT);
    let n = noise::shot_resource_estimate(required(a.sigma, "sigma")?, a.dt.unwrap(), a.op_norm.unwrap(), required(a.eps, "eps")?)?;
    let out = Output::new("resource-estimate", &a)?;
    let mut s = out.table(&["shots_order_of_magnitude"]);
    writeln!(s, "{n}").unwrap();
    Ok(s)
}

fn cmd_circuit(mut a: CircuitArgs) -> Result<String> {
    a.chain_defaults(Boundary::Open);
    a.m.get_or_insert(1);
    a.conjugated.get_or_insert(false);
    let spec = a.floquet()?;
    let gates = floquet::floquet_circuit(&spec, a.m.unwrap(), a.conjugated.unwrap(), 0);
    let mut s = serde_json::to_string_pretty(&gates).map_err(|e| Error::Io(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

fn load_config(path: &Path) -> Result<Value> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
}

fn write_out(path: Option<&Path>, text: &str, stdout: &mut dyn Write) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, text)?,
        None => stdout.write_all(text.as_bytes())?,
    }
    Ok(())
}

fn with_suffix(stem: &Path, suffix: &str) -> PathBuf {
    let mut s = stem.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

fn dispatch(cli: Cli, stdout: &mut dyn Write) -> Result<()> {
    let cfg = cli.config.as_deref().map(load_config).transpose()?;
    let cfg = cfg.as_ref();
    let out = cli.output.as_deref();
    macro_rules! resolved {
        ($a:expr) => {{
            let mut a = $a;
            a.fold_boundary_flags();
            merge(&a, cfg)?
        }};
    }
    let text = match cli.command {
        Command::Hpr(a) => cmd_hpr(resolved!(a))?,
        Command::Otoc(a) => cmd_otoc(resolved!(a))?,
        Command::OtocGrid(a) => cmd_otoc_grid(resolved!(a))?,
        Command::Tpq(a) => {
            let (series, dos) = cmd_tpq(resolved!(a))?;
            match out {
                Some(stem) => {
                    std::fs::write(with_suffix(stem, ".series.csv"), series)?;
                    std::fs::write(with_suffix(stem, ".dos.csv"), dos)?;
                }
                None => {
                    stdout.write_all(series.as_bytes())?;
                    stdout.write_all(dos.as_bytes())?;
                }
            }
            return Ok(());
        }
        Command::EnsembleStats(a) => cmd_ensemble(resolved!(a))?,
        Command::Lightcone(a) => cmd_lightcone(resolved!(a))?,
        Command::Mitigate(a) => cmd_mitigate(merge(&a, cfg)?)?,
        Command::ResourceEstimate(a) => cmd_resource(merge(&a, cfg)?)?,
        Command::CircuitDump(a) => cmd_circuit(resolved!(a))?,
    };
    write_out(out, &text, stdout)
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Capacity(_) => EXIT_CAPACITY,
        Error::Config(_) | Error::Argument(_) => EXIT_CONFIG,
        _ => EXIT_RUNTIME,
    }
}

/// Runs the CLI on `argv` (program name first), writing results to `stdout`
/// and diagnostics to `stderr`. Returns the process exit code.
pub fn run_with_io<I, T>(argv: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let text = e.render().to_string();
            if code == EXIT_OK {
                let _ = stdout.write_all(text.as_bytes());
            } else {
                let _ = stderr.write_all(text.as_bytes());
            }
            return code;
        }
    };
    let threads = cli.threads;
    let mut buf = Vec::new();
    let result = match threads {
        Some(0) => Err(Error::Config("--threads must be positive".into())),
        Some(k) => rayon::ThreadPoolBuilder::new()
            .num_threads(k)
            .build()
            .map_err(|e| Error::Config(e.to_string()))
            .and_then(|pool| pool.install(|| dispatch(cli, &mut buf))),
        None => dispatch(cli, &mut buf),
    };
    let result = result.and_then(|()| stdout.write_all(&buf).map_err(Error::from));
    match result {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            exit_code(&e)
        }
    }
}

pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    run_with_io(argv, &mut std::io::stdout().lock(), &mut std::io::stderr().lock())
}
