//! Command implementations behind the `stokeslab` binary: each returns its
//! CSV (or report text) as a string so the thin binary shell handles only
//! argument parsing, output routing, and exit codes.
//!
//! Output rules: one fixed header line per CSV, floats at 17 significant
//! digits (round-trippable doubles), `#`-prefixed trailing summary lines on
//! sweeps. Everything is deterministic given the flags; sweeps evaluate grid
//! points in parallel but emit rows in grid order.

use rayon::prelude::*;
use stokeslab::sampling::{estimate_all, sample_all_bases, EstimateReport, SamplesByBasis};
use stokeslab::states::parse_state_spec;
use stokeslab::stokes::{verify_identities, StokesIndex};
use stokeslab::witnesses::{
    eval_witness_from_moments, SqrtPolicy, StokesMoments, WitnessReport, VIOLATION_TOL,
};
use stokeslab::{Error, QuantumState, Result, Truncation, WitnessEngine, WitnessId};

/// Both operator identities must hold to this tolerance for `identities`
/// to succeed.
pub const IDENTITY_TOL: f64 = 1e-12;

/// Identity checks build dense-ish operator squares; cap the truncation so a
/// typo cannot demand gigabytes.
pub const IDENTITIES_NMAX_CAP: u32 = 10;

/// Floats in CSV output: 17 significant digits, enough to round-trip f64.
pub fn fmt_float(x: f64) -> String {
    format!("{x:.16e}")
}

/// An inclusive arithmetic grid `start:stop:step`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl Grid {
    pub fn parse(text: &str) -> Result<Grid> {
        let parts: Vec<&str> = text.split(':').collect();
        let [start, stop, step] = parts.as_slice() else {
            return Err(Error::InvalidParameter(format!(
                "grid `{text}` must be start:stop:step"
            )));
        };
        let parse = |s: &str| -> Result<f64> {
            s.trim()
                .parse()
                .map_err(|_| Error::InvalidParameter(format!("grid value `{s}` is not a number")))
        };
        let grid = Grid { start: parse(start)?, stop: parse(stop)?, step: parse(step)? };
        if grid.step.is_nan() || grid.step <= 0.0 {
            return Err(Error::InvalidParameter(format!("grid step {} must be > 0", grid.step)));
        }
        if grid.stop < grid.start {
            return Err(Error::InvalidParameter(format!(
                "grid stop {} is below start {}",
                grid.stop, grid.start
            )));
        }
        Ok(grid)
    }

    /// Grid points `start + k·step`, snapped to `stop` at the far end so
    /// accumulated roundoff cannot push the last point past it.
    pub fn values(&self) -> Vec<f64> {
        let count = ((self.stop - self.start) / self.step + 1e-9).floor() as usize + 1;
        (0..count)
            .map(|k| {
                let v = self.start + k as f64 * self.step;
                if (v - self.stop).abs() < self.step * 1e-9 {
                    self.stop
                } else {
                    v
                }
            })
            .collect()
    }
}

/// A parameter sweep: one state-spec, one swept real parameter, one grid.
#[derive(Debug, Clone)]
pub struct SweepSpec {
    pub state: String,
    pub param: String,
    pub grid: Grid,
    pub n_max: u32,
    /// Conditions to evaluate; empty means all ten.
    pub witnesses: Vec<WitnessId>,
}

impl SweepSpec {
    fn witness_list(&self) -> Vec<WitnessId> {
        if self.witnesses.is_empty() {
            WitnessId::ALL.to_vec()
        } else {
            self.witnesses.clone()
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct SweepRow {
    pub value: f64,
    pub report: WitnessReport,
}

/// Per-witness detection summary over a sweep grid.
#[derive(Debug, Clone, Copy)]
pub struct DetectionSummary {
    pub id: WitnessId,
    /// Smallest grid value at which the condition detects, if any.
    pub first_detection: Option<f64>,
    /// Whether the detecting grid points form one contiguous suffix run.
    pub contiguous: bool,
}

#[derive(Debug, Clone)]
pub struct SweepOutcome {
    pub rows: Vec<SweepRow>,
    pub detection: Vec<DetectionSummary>,
    /// `(improved, base, contained)`: containment holds when no grid point
    /// is detected by the base condition but missed by the improved one.
    pub containment: Vec<(WitnessId, WitnessId, bool)>,
}

/// Runs a sweep. White-noise weight sweeps reuse the two endpoint moment
/// sets (state moments are affine in the mixing weight, so every grid point
/// is an exact weighted blend); other parameters rebuild the state per grid
/// point, in parallel.
pub fn run_sweep(spec: &SweepSpec) -> Result<SweepOutcome> {
    let trunc = Truncation::new(spec.n_max);
    let engine = WitnessEngine::new(trunc);
    let parsed = parse_state_spec(&spec.state)?;
    let values = spec.grid.values();
    let ids = spec.witness_list();

    let moments: Vec<StokesMoments> = if spec.param == "p" {
        let hi = engine.collect_moments(&parsed.with_param("p", 1.0)?.build(trunc)?)?;
        let lo = engine.collect_moments(&parsed.with_param("p", 0.0)?.build(trunc)?)?;
        values
            .iter()
            .map(|&p| StokesMoments::blend(&[(p, hi), (1.0 - p, lo)]))
            .collect()
    } else {
        values
            .par_iter()
            .map(|&v| {
                let state = parsed.with_param(&spec.param, v)?.build(trunc)?;
                engine.collect_moments(&state)
            })
            .collect::<Result<Vec<_>>>()?
    };

    let mut rows = Vec::with_capacity(values.len() * ids.len());
    for (&value, m) in values.iter().zip(&moments) {
        for &id in &ids {
            rows.push(SweepRow {
                value,
                report: eval_witness_from_moments(id, m, SqrtPolicy::Strict)?,
            });
        }
    }

    let detects = |id: WitnessId| -> Vec<bool> {
        rows.iter().filter(|r| r.report.id == id).map(|r| r.report.entangled).collect()
    };
    let detection = ids
        .iter()
        .map(|&id| {
            let flags = detects(id);
            let first = flags.iter().position(|&d| d);
            let contiguous = match first {
                Some(k) => flags[k..].iter().all(|&d| d),
                None => true,
            };
            DetectionSummary { id, first_detection: first.map(|k| values[k]), contiguous }
        })
        .collect();

    let mut containment = Vec::new();
    for &improved in &ids {
        let Some(base) = improved.improves_on() else { continue };
        if !ids.contains(&base) {
            continue;
        }
        let (di, db) = (detects(improved), detects(base));
        let contained = db.iter().zip(&di).all(|(&b, &i)| !b || i);
        containment.push((improved, base, contained));
    }

    Ok(SweepOutcome { rows, detection, containment })
}

pub fn witness_csv(reports: &[WitnessReport]) -> String {
    let mut out = String::from("id,lhs,rhs,margin,entangled\n");
    for r in reports {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            r.id,
            fmt_float(r.lhs),
            fmt_float(r.rhs),
            fmt_float(r.margin),
            u8::from(r.entangled)
        ));
    }
    out
}

pub fn sweep_csv(outcome: &SweepOutcome) -> String {
    let mut out = String::from("param,id,lhs,rhs,margin,entangled\n");
    for row in &outcome.rows {
        let r = &row.report;
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            fmt_float(row.value),
            r.id,
            fmt_float(r.lhs),
            fmt_float(r.rhs),
            fmt_float(r.margin),
            u8::from(r.entangled)
        ));
    }
    for &(improved, base, ok) in &outcome.containment {
        out.push_str(&format!(
            "# containment {improved} covers {base}: {}\n",
            if ok { "ok" } else { "VIOLATED" }
        ));
    }
    for d in &outcome.detection {
        out.push_str(&format!(
            "# first_detection {} {} {}\n",
            d.id,
            d.first_detection.map_or_else(|| "none".into(), fmt_float),
            if d.contiguous { "contiguous" } else { "fragmented" }
        ));
    }
    out
}

pub fn estimate_csv(reports: &[EstimateReport]) -> String {
    let mut out = String::from("id,lhs_hat,rhs_hat,margin_hat,stderr,shots\n");
    for r in reports {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            r.id,
            fmt_float(r.lhs_hat),
            fmt_float(r.rhs_hat),
            fmt_float(r.margin_hat),
            fmt_float(r.stderr),
            r.shots
        ));
    }
    out
}

pub fn records_csv(samples: &SamplesByBasis) -> String {
    let mut out = String::from("basis,n_a_i,n_a_iperp,n_b_i,n_b_iperp\n");
    for basis in StokesIndex::ALL {
        for r in samples.for_basis(basis) {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                basis.number(),
                r.n_a_i,
                r.n_a_iperp,
                r.n_b_i,
                r.n_b_iperp
            ));
        }
    }
    out
}

/// Identity check: report both max deviations, succeed iff both are below
/// [`IDENTITY_TOL`]. A failure is a numerical-guard error (the identities
/// are construction-exact, so any excess signals an operator bug).
pub fn cmd_identities(n_max: u32) -> Result<String> {
    if n_max > IDENTITIES_NMAX_CAP {
        return Err(Error::InvalidParameter(format!(
            "identities check capped at nmax {IDENTITIES_NMAX_CAP}, got {n_max}"
        )));
    }
    let report = verify_identities(&Truncation::new(n_max));
    let text = format!(
        "nmax {}\nstandard identity max deviation: {:e}\nnormalized identity max deviation: {:e}\n",
        report.n_max, report.standard_dev, report.normalized_dev
    );
    if !report.passes(IDENTITY_TOL) {
        return Err(Error::NumericalGuard {
            context: format!("operator identity deviation at nmax {n_max}"),
            value: report.standard_dev.max(report.normalized_dev),
        });
    }
    Ok(text)
}

/// Builds a state from its textual spec, reporting the tail mass the
/// truncation discards so callers can warn when it is non-negligible.
pub fn build_state(state: &str, n_max: u32) -> Result<QuantumState> {
    parse_state_spec(state)?.build(Truncation::new(n_max))
}

pub fn cmd_witness(state: &str, n_max: u32) -> Result<(String, f64)> {
    let st = build_state(state, n_max)?;
    let reports = WitnessEngine::new(st.truncation()).eval_all(&st)?;
    Ok((witness_csv(&reports), st.tail_mass()))
}

pub fn cmd_sweep(spec: &SweepSpec) -> Result<String> {
    Ok(sweep_csv(&run_sweep(spec)?))
}

pub struct SampleOutput {
    pub estimates: String,
    pub records: Option<String>,
    pub tail_mass: f64,
}

pub fn cmd_sample(
    state: &str,
    n_max: u32,
    shots: usize,
    seed: u64,
    resamples: usize,
    with_records: bool,
) -> Result<SampleOutput> {
    let st = build_state(state, n_max)?;
    let samples = sample_all_bases(&st, shots, seed)?;
    let estimates = estimate_csv(&estimate_all(&samples, resamples, seed)?);
    let records = with_records.then(|| records_csv(&samples));
    Ok(SampleOutput { estimates, records, tail_mass: st.tail_mass() })
}

/// Exit code contract: 0 success, 1 usage/input problems, 2 tripped
/// numerical guards (results would be untrustworthy).
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::NumericalGuard { .. } | Error::ImaginaryResidue(..) => 2,
        _ => 1,
    }
}

/// Margin beyond which a sweep row counts as a detection; re-exported so
/// downstream table tooling agrees with the engine.
pub const DETECTION_TOL: f64 = VIOLATION_TOL;
