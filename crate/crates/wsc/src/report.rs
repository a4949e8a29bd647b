//! Analysis and bootstrap reports.

use std::fmt::Write as _;

use serde::Serialize;
use wsc_core::bootstrap::{BootstrapConfig, BootstrapResult, Statistic};
use wsc_core::cbd::{self, CbdError, CyclicSystem};
use wsc_core::ingest::ContextTally;
use wsc_core::linprog::LpError;
use wsc_core::sheaf::{self, SheafError};
use wsc_core::EmpiricalModel;

use crate::formats::{context_names, distribution_entry, DistributionEntry};

/// Measures at or below this are reported as noncontextual.
pub const VERDICT_TOL: f64 = 1e-9;

#[derive(Clone, Debug, Serialize)]
pub struct ScenarioSummary {
    pub observables: Vec<String>,
    pub contexts: Vec<Vec<String>>,
    pub outcomes: Vec<String>,
    pub cyclic_rank: Option<usize>,
}

#[derive(Clone, Debug, Serialize)]
pub struct TallyEntry {
    pub context: Vec<String>,
    pub n_total: usize,
    pub n_valid: usize,
    pub n_same: usize,
    pub n_diff: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct SignallingSummary {
    pub max_discrepancy: f64,
    pub tol: f64,
    pub non_signalling: bool,
    /// Observables shared by the two most discrepant contexts.
    pub worst: Option<WorstPair>,
}

#[derive(Clone, Debug, Serialize)]
pub struct WorstPair {
    pub contexts: [Vec<String>; 2],
    pub shared: Vec<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct CorrelationEntry {
    pub context: Vec<String>,
    pub value: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ChshSummary {
    pub violation: f64,
    /// Sign applied to each context's correlation in the maximising sum.
    pub signs: Vec<i8>,
    pub contexts: Vec<Vec<String>>,
}

#[derive(Clone, Debug, Serialize)]
pub struct CfSummary {
    pub cf: f64,
    pub ncf_weight: f64,
    pub dual_objective: f64,
    pub duality_gap: f64,
    pub reliable: bool,
    pub n_assignments: usize,
    /// Assignments carrying positive weight in the noncontextual part.
    pub witness_support: usize,
    /// Row multipliers of the dual solution, aligned with the distribution
    /// cells in context order.
    pub certificate: Vec<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct Verdicts {
    pub contextual_cbd: Option<bool>,
    pub contextual_sheaf: Option<bool>,
}

#[derive(Clone, Debug, Serialize)]
pub struct AnalysisReport {
    pub scenario: ScenarioSummary,
    pub distributions: Vec<DistributionEntry>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tallies: Option<Vec<TallyEntry>>,
    pub signalling: SignallingSummary,
    pub correlations: Option<Vec<CorrelationEntry>>,
    pub chsh: Option<ChshSummary>,
    pub delta: Option<f64>,
    pub cnt1: Option<f64>,
    pub contextual_fraction: Option<CfSummary>,
    pub verdicts: Verdicts,
    pub notices: Vec<String>,
}

pub fn analyze(
    model: &EmpiricalModel,
    signalling_tol: f64,
    tallies: Option<&[ContextTally]>,
    mut notices: Vec<String>,
) -> AnalysisReport {
    let scenario = model.scenario();
    let contexts = model.contexts();
    let cyclic_rank = scenario.cyclic_structure().ok().flatten().map(|c| c.rank());
    let summary = ScenarioSummary {
        observables: scenario.observables().iter().map(|o| o.as_str().to_owned()).collect(),
        contexts: contexts.iter().map(context_names).collect(),
        outcomes: scenario.outcomes().to_vec(),
        cyclic_rank,
    };

    let report = model.signalling(signalling_tol);
    let signalling = SignallingSummary {
        max_discrepancy: report.max_discrepancy,
        tol: signalling_tol,
        non_signalling: report.non_signalling,
        worst: report.worst.as_ref().map(|(i, j, shared)| WorstPair {
            contexts: [context_names(&contexts[*i]), context_names(&contexts[*j])],
            shared: shared.iter().map(|o| o.as_str().to_owned()).collect(),
        }),
    };

    let correlations = contexts
        .iter()
        .map(|c| model.correlation(c).map(|value| CorrelationEntry { context: context_names(c), value }))
        .collect::<Result<Vec<_>, _>>()
        .ok();

    let mut chsh = None;
    let mut delta = None;
    let mut cnt1 = None;
    match CyclicSystem::from_model(model) {
        Ok(sys) => {
            delta = Some(cbd::delta(&sys));
            cnt1 = Some(cbd::cnt1(&sys));
            match cbd::chsh_violation(model) {
                Ok(v) => {
                    chsh = Some(ChshSummary {
                        violation: v.value,
                        signs: v.signs.to_vec(),
                        contexts: v.contexts.iter().map(context_names).collect(),
                    })
                }
                Err(CbdError::NotRank4(n)) => {
                    notices.push(format!("Bell-CHSH violation omitted: cyclic rank is {n}, not 4"))
                }
                Err(e) => notices.push(format!("Bell-CHSH violation omitted: {e}")),
            }
        }
        Err(CbdError::NotCyclic) => {
            notices.push("CbD measures and Bell-CHSH violation omitted: scenario is not a cyclic system".into())
        }
        Err(e) => notices.push(format!("CbD measures omitted: {e}")),
    }

    let contextual_fraction = match sheaf::contextual_fraction_with_tol(model, signalling_tol) {
        Ok(r) => Some(CfSummary {
            cf: r.cf,
            ncf_weight: r.ncf_weight,
            dual_objective: r.dual_objective,
            duality_gap: r.duality_gap,
            reliable: r.reliable,
            n_assignments: r.system.columns.len(),
            witness_support: r.witness.iter().filter(|&&w| w > 0.0).count(),
            certificate: r.dual_certificate,
        }),
        Err(SheafError::CapExceeded { outcomes, observables }) => {
            notices.push(format!(
                "contextual fraction omitted: {outcomes}^{observables} global assignments exceed the enumeration cap"
            ));
            None
        }
        Err(SheafError::Lp(LpError::TooLarge { .. })) => {
            notices.push("contextual fraction omitted: linear program exceeds the solver's size limit".into());
            None
        }
        Err(e) => {
            notices.push(format!("contextual fraction omitted: {e}"));
            None
        }
    };

    let contextual_cbd = cnt1.map(|c| c > VERDICT_TOL);
    let contextual_sheaf = match (&contextual_fraction, signalling.non_signalling) {
        (Some(cf), true) => Some(cf.cf > VERDICT_TOL),
        (Some(_), false) => {
            notices.push(format!(
                "sheaf verdict withheld: model signals (discrepancy {:.6} > tol {:e})",
                signalling.max_discrepancy, signalling_tol
            ));
            None
        }
        (None, _) => None,
    };

    let tallies = tallies.map(|ts| {
        contexts
            .iter()
            .zip(ts)
            .map(|(c, t)| TallyEntry {
                context: context_names(c),
                n_total: t.n_total,
                n_valid: t.n_valid,
                n_same: t.n_same,
                n_diff: t.n_diff,
            })
            .collect()
    });

    AnalysisReport {
        scenario: summary,
        distributions: model.distributions().iter().map(|d| distribution_entry(scenario, d)).collect(),
        tallies,
        signalling,
        correlations,
        chsh,
        delta,
        cnt1,
        contextual_fraction,
        verdicts: Verdicts { contextual_cbd, contextual_sheaf },
        notices,
    }
}

fn braces(names: &[String]) -> String {
    format!("{{{}}}", names.join(", "))
}

fn verdict(v: Option<bool>) -> &'static str {
    match v {
        Some(true) => "contextual",
        Some(false) => "noncontextual",
        None => "n/a",
    }
}

impl AnalysisReport {
    /// Human-readable report with six decimals throughout.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let sc = &self.scenario;
        let _ = writeln!(s, "scenario");
        let _ = writeln!(s, "  observables: {}", sc.observables.join(", "));
        let _ = writeln!(s, "  outcomes: {}", sc.outcomes.join(", "));
        let contexts: Vec<String> = sc.contexts.iter().map(|c| braces(c)).collect();
        let _ = writeln!(s, "  contexts: {}", contexts.join(" "));
        match sc.cyclic_rank {
            Some(n) => _ = writeln!(s, "  cyclic rank: {n}"),
            None => _ = writeln!(s, "  cyclic rank: not cyclic"),
        }
        let _ = writeln!(s, "distributions");
        for d in &self.distributions {
            let cells: Vec<String> = d.probs.iter().map(|(k, p)| format!("{k}={p:.6}")).collect();
            let _ = writeln!(s, "  {}: {}", braces(&d.context), cells.join(" "));
        }
        if let Some(ts) = &self.tallies {
            let _ = writeln!(s, "tallies");
            for t in ts {
                let _ = writeln!(
                    s,
                    "  {}: total {} valid {} same {} diff {}",
                    braces(&t.context),
                    t.n_total,
                    t.n_valid,
                    t.n_same,
                    t.n_diff
                );
            }
        }
        let sig = &self.signalling;
        let _ = writeln!(
            s,
            "signalling: max discrepancy {:.6} ({})",
            sig.max_discrepancy,
            if sig.non_signalling { "non-signalling" } else { "signalling" }
        );
        if let Some(cs) = &self.correlations {
            let _ = writeln!(s, "correlations");
            for c in cs {
                let _ = writeln!(s, "  {}: {:.6}", braces(&c.context), c.value);
            }
        }
        if let Some(c) = &self.chsh {
            let signs: Vec<String> = c
                .signs
                .iter()
                .zip(&c.contexts)
                .map(|(sg, ctx)| format!("{}{}", if *sg < 0 { "-" } else { "+" }, braces(ctx)))
                .collect();
            let _ = writeln!(s, "chsh violation: {:.6}", c.violation);
            let _ = writeln!(s, "  maximising signs: {}", signs.join(" "));
        }
        if let Some(d) = self.delta {
            let _ = writeln!(s, "delta: {d:.6}");
        }
        if let Some(c) = self.cnt1 {
            let _ = writeln!(s, "cnt1: {c:.6}");
        }
        if let Some(cf) = &self.contextual_fraction {
            let _ = writeln!(s, "contextual fraction: {:.6}", cf.cf);
            let _ = writeln!(
                s,
                "  noncontextual weight {:.6}, dual bound {:.6}, gap {:.6}, {} assignments, support {}{}",
                cf.ncf_weight,
                cf.dual_objective,
                cf.duality_gap,
                cf.n_assignments,
                cf.witness_support,
                if cf.reliable { "" } else { ", unreliable (signalling)" }
            );
        }
        let _ = writeln!(
            s,
            "verdict: CbD {}, sheaf {}",
            verdict(self.verdicts.contextual_cbd),
            verdict(self.verdicts.contextual_sheaf)
        );
        for n in &self.notices {
            let _ = writeln!(s, "note: {n}");
        }
        s
    }
}

pub fn statistic_name(s: Statistic) -> &'static str {
    match s {
        Statistic::Violation => "violation",
        Statistic::Cnt1 => "cnt1",
        Statistic::ContextualFraction => "cf",
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct BootstrapSummary {
    pub statistic: &'static str,
    pub point_estimate: f64,
    pub n: usize,
    pub seed: u64,
    pub generator: &'static str,
    pub mean: f64,
    pub std: f64,
    pub fraction_positive: f64,
    pub bin_width: f64,
    pub notices: Vec<String>,
}

impl BootstrapSummary {
    pub fn new(result: &BootstrapResult, config: &BootstrapConfig, point_estimate: f64, notices: Vec<String>) -> Self {
        BootstrapSummary {
            statistic: statistic_name(config.statistic),
            point_estimate,
            n: result.samples.len(),
            seed: result.seed,
            generator: result.generator,
            mean: result.mean,
            std: result.std,
            fraction_positive: result.fraction_positive,
            bin_width: config.bin_width,
            notices,
        }
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "statistic: {}", self.statistic);
        let _ = writeln!(s, "point estimate: {:.6}", self.point_estimate);
        let _ = writeln!(s, "resamples: {}", self.n);
        let _ = writeln!(s, "seed: {}", self.seed);
        let _ = writeln!(s, "generator: {}", self.generator);
        let _ = writeln!(s, "mean: {:.6}", self.mean);
        let _ = writeln!(s, "std: {:.6}", self.std);
        let _ = writeln!(s, "fraction positive: {:.6}", self.fraction_positive);
        for n in &self.notices {
            let _ = writeln!(s, "note: {n}");
        }
        s
    }
}

/// `bin_center,density` rows.
pub fn histogram_csv(result: &BootstrapResult) -> String {
    let mut s = String::from("bin_center,density\n");
    for b in &result.histogram {
        let _ = writeln!(s, "{},{}", b.center, b.density);
    }
    s
}
