//! End-to-end workflows behind the subcommands.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use rayon::prelude::*;

use qwell::design::{
    best_sign_pattern, inverse_barrier_height, localized_state, table_pattern, two_well_hop_period,
    validate_six_well_table, BarrierGeometry, PatternChoice, SignPattern,
};
use qwell::dynamics::{
    autocorrelation, basis_revival_time, evolve, hop_report, project, region_probabilities, well_correlation,
    CorrelationTrace, HopReport, SpectralState,
};
use qwell::potential::sample_with;
use qwell::spectral::lowest_eigenpairs_with;
use qwell::{MultiWellSpec, SolvedProfile, Wavefunction};

use crate::cache::{EigenCache, Miss};
use crate::config::{Artifact, InitialState, ScenarioConfig};
use crate::error::{io_error, CliError, CliResult, StageExt};

/// Seventeen significant digits, locale-free.
pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

/// A CSV artifact: fingerprint comment, optional extra comments, header, rows.
#[derive(Debug, Clone, PartialEq)]
pub struct OutputFile {
    pub name: String,
    pub contents: String,
}

struct Csv {
    text: String,
}

impl Csv {
    fn new(fingerprint: &str, comments: &[String], header: &str) -> Self {
        let mut text = format!("# config_fingerprint: {fingerprint}\n");
        for c in comments {
            let _ = writeln!(text, "# {c}");
        }
        text.push_str(header);
        text.push('\n');
        Self { text }
    }

    fn row(&mut self, fields: impl IntoIterator<Item = String>) {
        let fields: Vec<String> = fields.into_iter().collect();
        self.text.push_str(&fields.join(","));
        self.text.push('\n');
    }

    fn finish(self, name: impl Into<String>) -> OutputFile {
        OutputFile {
            name: name.into(),
            contents: self.text,
        }
    }
}

fn signs_label(p: &SignPattern) -> String {
    p.label()
}

/// Output of one workflow: files plus human-readable summary lines.
#[derive(Debug, Clone, Default)]
pub struct Bundle {
    pub files: Vec<OutputFile>,
    pub summary: Vec<String>,
}

impl Bundle {
    pub fn file(&self, name: &str) -> Option<&OutputFile> {
        self.files.iter().find(|f| f.name == name)
    }

    pub fn write_to(&self, dir: &Path) -> CliResult<Vec<PathBuf>> {
        std::fs::create_dir_all(dir).map_err(io_error(dir))?;
        self.files
            .iter()
            .map(|f| {
                let path = dir.join(&f.name);
                std::fs::write(&path, f.contents.as_bytes()).map_err(io_error(&path))?;
                Ok(path)
            })
            .collect()
    }
}

/// Solves `spec`, going through the cache when one is configured.
pub fn solve_cached(
    config: &ScenarioConfig,
    spec: MultiWellSpec,
    cache: Option<&EigenCache>,
    notes: &mut Vec<String>,
) -> CliResult<SolvedProfile> {
    let setup = config.setup();
    let (profile, grid, hamiltonian) = setup.discretize(spec).stage("discretize")?;
    let k = config.num_states();
    if let Some(cache) = cache {
        match cache.load(&hamiltonian, k, config.seed()) {
            Ok(basis) => {
                notes.push(format!("eigenpairs loaded from cache {}", cache.dir().display()));
                return Ok(SolvedProfile {
                    profile,
                    grid,
                    hamiltonian,
                    basis,
                });
            }
            Err(Miss::Invalid(reason)) => notes.push(format!("cache entry discarded: {reason}")),
            Err(Miss::Absent) => {}
        }
    }
    let basis = lowest_eigenpairs_with(&hamiltonian, k, &setup.options).stage("eigensolve")?;
    if let Some(cache) = cache {
        let path = cache.store(&basis, config.seed())?;
        notes.push(format!("eigenpairs cached at {}", path.display()));
    }
    Ok(SolvedProfile {
        profile,
        grid,
        hamiltonian,
        basis,
    })
}

/// Initial state resolved against a solved basis.
pub struct Prepared<'a> {
    pub state: SpectralState<'a>,
    /// 0-based well the state starts in.
    pub start_well: usize,
    pub description: String,
}

pub fn prepare_initial<'a>(config: &ScenarioConfig, solved: &'a SolvedProfile) -> CliResult<Prepared<'a>> {
    let basis = &solved.basis;
    let n = solved.profile.well_count();
    let (state, description) = match config.initial_state() {
        InitialState::SignPattern { signs, target_well } => {
            let p = SignPattern::new(signs, target_well - 1).stage("initial state")?;
            let d = format!("sign pattern {} for well {target_well}", p.label());
            (localized_state(basis, &p).stage("initial state")?, d)
        }
        InitialState::BestPattern { target_well } => {
            let best = best_sign_pattern(basis, &solved.profile, target_well - 1).stage("pattern search")?;
            let d = format!("best pattern {} for well {target_well}", best.pattern.label());
            (localized_state(basis, &best.pattern).stage("initial state")?, d)
        }
        InitialState::Table { target_well } => {
            let p = table_pattern(n, target_well - 1).stage("initial state")?;
            let d = format!("table pattern {} for well {target_well}", p.label());
            (localized_state(basis, &p).stage("initial state")?, d)
        }
        InitialState::Coefficients { re, im } => {
            let c: Vec<Complex64> = re
                .iter()
                .enumerate()
                .map(|(i, r)| Complex64::new(*r, im.get(i).copied().unwrap_or(0.0)))
                .collect();
            (SpectralState::new(basis, &c).stage("initial state")?, "explicit coefficients".into())
        }
        InitialState::Gaussian { center_nm, width_nm } => {
            let psi = Wavefunction::from_fn(solved.grid, |x| {
                Complex64::new((-(x - center_nm).powi(2) / (2.0 * width_nm * width_nm)).exp(), 0.0)
            })
            .stage("initial state")?;
            let state = project(&psi, basis).stage("projection")?;
            let d = format!(
                "gaussian at {center_nm} nm, width {width_nm} nm, captured weight {:.12}",
                state.captured_weight()
            );
            (state, d)
        }
    };
    let start_well = match config.initial_state() {
        InitialState::SignPattern { target_well, .. }
        | InitialState::BestPattern { target_well }
        | InitialState::Table { target_well } => target_well - 1,
        _ => {
            let psi = evolve(&state, 0.0).stage("initial state")?;
            let p = region_probabilities(&psi, &solved.profile).stage("initial state")?;
            (0..p.wells.len()).max_by(|&a, &b| p.wells[a].total_cmp(&p.wells[b])).unwrap_or(0)
        }
    };
    Ok(Prepared {
        state,
        start_well,
        description,
    })
}

/// States localized in each well, used as correlation references.
pub fn well_references<'a>(config: &ScenarioConfig, solved: &'a SolvedProfile) -> CliResult<Vec<SpectralState<'a>>> {
    let n = solved.profile.well_count();
    if solved.basis.len() < n {
        return Err(CliError::Config(format!(
            "well correlations need num_states >= well_count ({} < {n})",
            solved.basis.len()
        )));
    }
    let use_table = matches!(config.initial_state(), InitialState::Table { .. });
    (0..n)
        .map(|k| {
            let pattern = if use_table {
                table_pattern(n, k)
            } else {
                best_sign_pattern(&solved.basis, &solved.profile, k).map(|c| c.pattern)
            }
            .stage("reference states")?;
            localized_state(&solved.basis, &pattern).stage("reference states")
        })
        .collect()
}

fn trace_csv(fp: &str, trace: &CorrelationTrace, comments: &[String], name: String) -> OutputFile {
    let mut csv = Csv::new(fp, comments, "tau,value");
    for (t, v) in trace.tau.iter().zip(&trace.values) {
        csv.row([num(*t), num(*v)]);
    }
    csv.finish(name)
}

fn potential_file(config: &ScenarioConfig, solved: &SolvedProfile, fp: &str) -> CliResult<OutputFile> {
    let v = sample_with(&solved.profile, &solved.grid, config.sampling).stage("sampling")?;
    let mut csv = Csv::new(fp, &[], "x_nm,V_eV");
    for (i, x) in solved.grid.positions().enumerate() {
        csv.row([num(x), num(v[i])]);
    }
    Ok(csv.finish("potential.csv"))
}

fn eigenvalue_file(solved: &SolvedProfile, fp: &str) -> OutputFile {
    let stats = solved.basis.stats();
    let comments = [format!("unresolved_splittings: {}", stats.unresolved_splittings)];
    let mut csv = Csv::new(fp, &comments, "n,energy_eV,residual_eV");
    for (n, e) in solved.basis.energies().iter().enumerate() {
        let r = stats.residuals.get(n).copied().unwrap_or(f64::NAN);
        csv.row([(n + 1).to_string(), num(*e), num(r)]);
    }
    csv.finish("eigenvalues.csv")
}

fn eigenstate_file(solved: &SolvedProfile, fp: &str) -> OutputFile {
    let k = solved.basis.len();
    let header = std::iter::once("x_nm".to_string())
        .chain((1..=k).map(|n| format!("phi_{n}")))
        .collect::<Vec<_>>()
        .join(",");
    let states: Vec<Vec<f64>> = (0..k).map(|n| solved.basis.real_state(n)).collect();
    let mut csv = Csv::new(fp, &[], &header);
    for (i, x) in solved.grid.positions().enumerate() {
        csv.row(std::iter::once(num(x)).chain(states.iter().map(|s| num(s[i]))));
    }
    csv.finish("eigenstates.csv")
}

fn choice_row(c: &PatternChoice) -> Vec<String> {
    let mut row = vec![
        (c.pattern.target_well() + 1).to_string(),
        signs_label(&c.pattern),
        num(c.target_probability()),
        (c.dominant_well() + 1).to_string(),
    ];
    row.extend(c.probabilities.iter().map(|p| num(*p)));
    row
}

fn pattern_files(solved: &SolvedProfile, fp: &str, summary: &mut Vec<String>) -> CliResult<Vec<OutputFile>> {
    let n = solved.profile.well_count();
    if solved.basis.len() < n {
        return Err(CliError::Config(format!(
            "sign patterns need num_states >= well_count ({} < {n})",
            solved.basis.len()
        )));
    }
    let wells: String = (1..=n).map(|k| format!(",p_well_{k}")).collect();
    let mut csv = Csv::new(
        fp,
        &["best of all gauge-fixed sign patterns per target well".into()],
        &format!("target_well,signs,p_target,dominant_well{wells}"),
    );
    for target in 0..n {
        let best = best_sign_pattern(&solved.basis, &solved.profile, target).stage("pattern search")?;
        summary.push(format!(
            "well {}: best pattern {} holds {:.6}",
            target + 1,
            best.pattern.label(),
            best.target_probability()
        ));
        csv.row(choice_row(&best));
    }
    let mut files = vec![csv.finish("patterns.csv")];

    if n == 6 {
        let checks = validate_six_well_table(&solved.basis, &solved.profile).stage("table validation")?;
        let mut csv = Csv::new(
            fp,
            &["tabulated six-well patterns against the brute-force optimum".into()],
            "target_well,table_signs,table_p_target,table_dominant_well,localizes,best_signs,best_p_target,matches_best",
        );
        for c in &checks {
            let well = c.table.pattern.target_well() + 1;
            csv.row([
                well.to_string(),
                c.table.pattern.label(),
                num(c.table.target_probability()),
                (c.table.dominant_well() + 1).to_string(),
                c.localizes().to_string(),
                c.best.pattern.label(),
                num(c.best.target_probability()),
                c.matches_best().to_string(),
            ]);
            if !c.matches_best() {
                summary.push(format!(
                    "table row for well {well}: {} gives {:.6}, brute force prefers {} with {:.6}",
                    c.table.pattern.label(),
                    c.table.target_probability(),
                    c.best.pattern.label(),
                    c.best.target_probability()
                ));
            }
        }
        files.push(csv.finish("table_check.csv"));
    }
    Ok(files)
}

fn snapshot_file(config: &ScenarioConfig, prepared: &Prepared<'_>, solved: &SolvedProfile, fp: &str) -> CliResult<OutputFile> {
    let snapshots = config
        .snapshot_taus
        .iter()
        .map(|&t| evolve(&prepared.state, t).map(|psi| psi.density()))
        .collect::<qwell::Result<Vec<_>>>()
        .stage("evolution")?;
    let header = std::iter::once("x_nm".to_string())
        .chain(config.snapshot_taus.iter().map(|t| format!("density_tau_{t}")))
        .collect::<Vec<_>>()
        .join(",");
    let mut csv = Csv::new(fp, &[format!("initial state: {}", prepared.description)], &header);
    for (i, x) in solved.grid.positions().enumerate() {
        csv.row(std::iter::once(num(x)).chain(snapshots.iter().map(|s| num(s[i]))));
    }
    Ok(csv.finish("snapshots.csv"))
}

fn hop_file(report: &HopReport, t_rev: f64, solved: &SolvedProfile, fp: &str) -> CliResult<OutputFile> {
    let mut comments = vec![
        format!(
            "peak threshold {} (a convention for 'localized', not a derived quantity)",
            report.threshold
        ),
        format!("revival_time_fs: {}", num(t_rev)),
    ];
    if let Some(m) = report.mean_interval {
        comments.push(format!("mean_interval_tau: {}", num(m)));
        comments.push(format!("mean_interval_fs: {}", num(m * t_rev)));
    }
    if solved.profile.well_count() == 2 && solved.basis.len() >= 2 {
        let p = two_well_hop_period(&solved.basis).stage("hop period")?;
        comments.push(format!("two_state_hop_period_fs: {}", num(p)));
        comments.push(format!("two_state_hop_period_tau: {}", num(p / t_rev)));
    }
    let mut csv = Csv::new(fp, &comments, "order,well,tau,time_fs,value");
    for (i, h) in report.hops.iter().enumerate() {
        csv.row([
            i.to_string(),
            (h.well + 1).to_string(),
            num(h.event.tau),
            num(h.event.tau * t_rev),
            num(h.event.value),
        ]);
    }
    Ok(csv.finish("hops.csv"))
}

/// Everything requested by `artifacts`, in a fixed order.
pub fn run_scenario(config: &ScenarioConfig, cache: Option<&EigenCache>, artifacts: &[Artifact]) -> CliResult<Bundle> {
    let fp = config.fingerprint();
    let mut bundle = Bundle::default();
    let solved = solve_cached(config, config.spec(), cache, &mut bundle.summary)?;
    let wants = |a: Artifact| artifacts.contains(&a);
    let e = solved.basis.energies();
    bundle.summary.push(format!(
        "{} wells, {} states, E_1 = {:.9e} eV, E_K = {:.9e} eV",
        solved.profile.well_count(),
        e.len(),
        e[0],
        e[e.len() - 1]
    ));

    if wants(Artifact::Potential) {
        bundle.files.push(potential_file(config, &solved, &fp)?);
    }
    if wants(Artifact::Eigenvalues) {
        bundle.files.push(eigenvalue_file(&solved, &fp));
    }
    if wants(Artifact::Eigenstates) {
        bundle.files.push(eigenstate_file(&solved, &fp));
    }
    if wants(Artifact::Patterns) && solved.profile.well_count() > 1 {
        bundle.files.extend(pattern_files(&solved, &fp, &mut bundle.summary)?);
    }

    let dynamic = [Artifact::Snapshots, Artifact::Autocorrelation, Artifact::Correlations, Artifact::Hops];
    if !dynamic.iter().any(|a| wants(*a)) {
        return Ok(bundle);
    }
    let prepared = prepare_initial(config, &solved)?;
    bundle.summary.push(format!("initial state: {}", prepared.description));
    let axis = config.tau_axis();
    let t_rev = basis_revival_time(&solved.basis);

    if wants(Artifact::Snapshots) {
        bundle.files.push(snapshot_file(config, &prepared, &solved, &fp)?);
    }
    if wants(Artifact::Autocorrelation) {
        let trace = autocorrelation(&prepared.state, &axis);
        let comments = [format!("revival_time_fs: {}", num(t_rev))];
        bundle.files.push(trace_csv(&fp, &trace, &comments, "autocorrelation.csv".into()));
    }
    if (wants(Artifact::Correlations) || wants(Artifact::Hops)) && solved.profile.well_count() > 1 {
        let references = well_references(config, &solved)?;
        let traces = well_correlation(&references, &prepared.state, &axis).stage("correlation")?;
        if wants(Artifact::Correlations) {
            for (k, t) in traces.iter().enumerate() {
                let comments = [format!("reference: state localized in well {}", k + 1)];
                bundle.files.push(trace_csv(&fp, t, &comments, format!("correlation_well_{}.csv", k + 1)));
            }
        }
        if wants(Artifact::Hops) {
            let report = hop_report(&traces, prepared.start_well, config.peak_threshold);
            if let Some(first) = report.first_hop() {
                bundle.summary.push(format!(
                    "first hop into well {} at tau = {:.6} ({:.6e} fs)",
                    first.well + 1,
                    first.event.tau,
                    first.event.tau * t_rev
                ));
            }
            bundle.files.push(hop_file(&report, t_rev, &solved, &fp)?);
        }
    }
    Ok(bundle)
}

/// One sweep row; `Err` carries the failure message.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub barrier_height: f64,
    pub outcome: Result<SweepValues, String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepValues {
    pub energies: Vec<f64>,
    /// Mean interval between localizations from the detected peaks.
    pub hop_period_tau: Option<f64>,
    pub hop_period_fs: Option<f64>,
    /// πħ/(E₂ − E₁), two-well scenarios only.
    pub two_state_period_fs: Option<f64>,
}

fn sweep_point(config: &ScenarioConfig, height: f64, cache: Option<&EigenCache>) -> CliResult<SweepValues> {
    let mut notes = Vec::new();
    let solved = solve_cached(config, config.spec_with_height(height), cache, &mut notes)?;
    let t_rev = basis_revival_time(&solved.basis);
    let (hop_tau, two_state) = if solved.profile.well_count() > 1 {
        let prepared = prepare_initial(config, &solved)?;
        let references = well_references(config, &solved)?;
        let traces = well_correlation(&references, &prepared.state, &config.tau_axis()).stage("correlation")?;
        let report = hop_report(&traces, prepared.start_well, config.peak_threshold);
        let two_state = if solved.profile.well_count() == 2 {
            Some(two_well_hop_period(&solved.basis).stage("hop period")?)
        } else {
            None
        };
        (report.mean_interval, two_state)
    } else {
        (None, None)
    };
    Ok(SweepValues {
        energies: solved.basis.energies().to_vec(),
        hop_period_tau: hop_tau,
        hop_period_fs: hop_tau.map(|t| t * t_rev),
        two_state_period_fs: two_state,
    })
}

pub struct SweepTable {
    pub rows: Vec<SweepRow>,
    /// `Some` when at least two rows have a hop period.
    pub monotone_increasing: Option<bool>,
}

pub fn sweep(config: &ScenarioConfig, heights: &[f64], cache: Option<&EigenCache>) -> SweepTable {
    let rows: Vec<SweepRow> = heights
        .par_iter()
        .map(|&h| SweepRow {
            barrier_height: h,
            outcome: sweep_point(config, h, cache).map_err(|e| e.to_string()),
        })
        .collect();
    let periods: Vec<f64> = rows
        .iter()
        .filter_map(|r| r.outcome.as_ref().ok().and_then(|v| v.hop_period_fs))
        .collect();
    let monotone_increasing = (periods.len() >= 2).then(|| periods.windows(2).all(|w| w[0] < w[1]));
    SweepTable {
        rows,
        monotone_increasing,
    }
}

pub fn sweep_bundle(config: &ScenarioConfig, cache: Option<&EigenCache>) -> CliResult<Bundle> {
    let heights = config
        .sweep
        .as_ref()
        .map(|s| s.barrier_heights_ev.clone())
        .ok_or_else(|| CliError::Config("the sweep subcommand needs a \"sweep\" section".into()))?;
    let table = sweep(config, &heights, cache);
    let fp = config.fingerprint();
    let k = config.num_states();
    let mut comments = vec![format!("peak threshold {}", config.peak_threshold)];
    if let Some(m) = table.monotone_increasing {
        comments.push(format!("monotone_increasing_hop_period: {m}"));
    }
    let energies: String = (1..=k).map(|n| format!(",E_{n}_eV")).collect();
    let mut csv = Csv::new(
        &fp,
        &comments,
        &format!("barrier_height_eV,status,hop_period_fs,hop_period_tau,two_state_period_fs{energies}"),
    );
    let opt = |x: Option<f64>| x.map(num).unwrap_or_default();
    let mut summary = Vec::new();
    for row in &table.rows {
        match &row.outcome {
            Ok(v) => {
                let mut fields = vec![
                    num(row.barrier_height),
                    "ok".into(),
                    opt(v.hop_period_fs),
                    opt(v.hop_period_tau),
                    opt(v.two_state_period_fs),
                ];
                fields.extend(v.energies.iter().map(|e| num(*e)));
                csv.row(fields);
            }
            Err(msg) => {
                summary.push(format!("sweep point {} eV failed: {msg}", row.barrier_height));
                let mut fields = vec![num(row.barrier_height), "failed".into()];
                fields.extend(std::iter::repeat_n(String::new(), 3 + k));
                csv.row(fields);
            }
        }
    }
    if let Some(m) = table.monotone_increasing {
        summary.push(format!("hop period monotone increasing in barrier height: {m}"));
    }
    Ok(Bundle {
        files: vec![csv.finish("sweep.csv")],
        summary,
    })
}

pub fn inverse_bundle(config: &ScenarioConfig) -> CliResult<Bundle> {
    let inv = config
        .inverse
        .as_ref()
        .ok_or_else(|| CliError::Config("the inverse subcommand needs an \"inverse\" section".into()))?;
    let setup = config.setup();
    let geometry = BarrierGeometry {
        total_length: config.length_nm,
        barrier_width: config.barrier_width_nm,
        well_depth_reference: config.well_depth_ev,
    };
    let target = match (inv.target_period_fs, inv.reference_height_ev) {
        (Some(p), _) => p,
        (None, Some(v)) => qwell::design::hop_period_at(&geometry, v, &setup).stage("reference period")?,
        (None, None) => unreachable!("validated"),
    };
    let [lo, hi] = inv.bracket_ev;
    let design = inverse_barrier_height(&geometry, target, (lo, hi), &setup).stage("inverse design")?;
    let comments = [
        format!("target_period_fs: {}", num(design.target_period)),
        format!("barrier_height_eV: {}", num(design.barrier_height)),
        format!("achieved_period_fs: {}", num(design.period)),
    ];
    let mut csv = Csv::new(&config.fingerprint(), &comments, "evaluation,barrier_height_eV,period_fs");
    for (i, (h, p)) in design.evaluations.iter().enumerate() {
        csv.row([(i + 1).to_string(), num(*h), num(*p)]);
    }
    Ok(Bundle {
        files: vec![csv.finish("inverse.csv")],
        summary: vec![format!(
            "barrier height {:.6} eV gives period {:.6e} fs (target {:.6e} fs, {} eigensolves)",
            design.barrier_height,
            design.period,
            design.target_period,
            design.evaluations.len()
        )],
    })
}
