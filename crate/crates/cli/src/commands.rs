//! The experiment subcommands.

use anyhow::{anyhow, bail, Context, Result};
use clap::Args;
use conjpair::bounds::BoundChecker;
use conjpair::channels::{
    moment_formula, sample_outputs, sample_rng, spectrum, trace_power, InputSpec, SimulationConfig,
};
use conjpair::diagram::{distance_to_zero_one, spectrum_contained, LqMatrix};
use conjpair::limit::{self, AParameters};
use conjpair::stats::mean_stderr;
use conjpair::tensor::constructions::q_operator;
use conjpair::tensor::{von_neumann_entropy, LogBase};
use conjpair::weingarten::rational_to_f64;
use conjpair::{mobius, wg_asymptotic, Error, PartialPermutation, Permutation, WeingartenTable};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::output::{Cell, Outcome, Table};

fn need<T: Copy>(v: Option<T>, flag: &str) -> Result<T> {
    v.ok_or_else(|| anyhow!("missing --{flag}"))
}

fn is_false(b: &bool) -> bool {
    !b
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct WgArgs {
    /// Degree of the symmetric group.
    #[arg(long)]
    pub p: Option<usize>,
    #[arg(long)]
    pub n: Option<u64>,
}

/// Exact Weingarten values, one row per conjugacy class.
pub fn wg(args: &WgArgs) -> Result<Outcome> {
    let (p, n) = (need(args.p, "p")?, need(args.n, "n")?);
    let table = WeingartenTable::new(p, n)?;
    let mut out = Table::new(vec!["sigma", "cycleType", "exact", "value", "asymptotic", "mobius"]);
    let mut classes = Vec::new();
    for (ct, value) in table.by_class() {
        let rep = ct.representative();
        let asym = wg_asymptotic(n, &rep);
        let mob = mobius(&rep).0;
        out.push(vec![
            rep.to_string().into(),
            ct.to_string().into(),
            value.to_string().into(),
            rational_to_f64(value).into(),
            asym.into(),
            Cell::Int(mob),
        ]);
        classes.push(json!({
            "sigma": rep.to_string(),
            "cycleType": ct.parts(),
            "exact": value.to_string(),
            "value": rational_to_f64(value),
            "asymptotic": asym,
            "mobius": mob,
        }));
    }
    Ok(Outcome {
        payload: json!({"p": p, "n": n, "classes": classes}),
        table: Some(out),
    })
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SpectrumArgs {
    #[arg(long)]
    pub r: Option<usize>,
    #[arg(long)]
    pub n: Option<usize>,
    /// Also report the n → ∞ limit matrix and its block structure.
    #[arg(long)]
    #[serde(default, skip_serializing_if = "is_false")]
    pub symbolic: bool,
    /// Also diagonalize the dense operator Q_∅ and test spectral inclusion.
    #[arg(long)]
    #[serde(default, skip_serializing_if = "is_false")]
    pub dense: bool,
}

/// Eigenvalues of the left-multiplication matrix of `Q_∅`.
pub fn spectrum_cmd(args: &SpectrumArgs) -> Result<Outcome> {
    let (r, n) = (need(args.r, "r")?, need(args.n, "n")?);
    let lq = LqMatrix::new(r)?;
    let mut ev = lq.eigenvalues(n)?;
    ev.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    let mut table = Table::new(vec!["index", "re", "im"]);
    for (i, l) in ev.iter().enumerate() {
        table.push(vec![i.into(), l.re.into(), l.im.into()]);
    }
    let mut payload = json!({
        "r": r,
        "n": n,
        "dim": lq.dim(),
        "eigenvalues": ev.iter().map(|l| [l.re, l.im]).collect::<Vec<_>>(),
        "distanceToZeroOne": distance_to_zero_one(&ev),
    });
    if args.symbolic {
        let limit = lq.limit()?;
        let entries: Vec<Value> = (0..lq.dim())
            .flat_map(|j| (0..lq.dim()).map(move |i| (i, j)))
            .filter_map(|(i, j)| {
                lq.entry(i, j)
                    .map(|s| json!({"row": i, "col": j, "series": s.to_string()}))
            })
            .collect();
        payload["symbolic"] = json!({
            "basis": lq.basis().iter().map(|d| d.to_permutation().to_string()).collect::<Vec<_>>(),
            "classes": lq.basis().iter().map(|d| d.class()).collect::<Vec<_>>(),
            "entries": entries,
            "limitDiagonal": (0..lq.dim()).map(|i| limit[(i, i)]).collect::<Vec<_>>(),
            "triangularOrder": lq.triangular_order(),
            "blocks": lq.block_report(),
        });
    }
    if args.dense {
        let q = q_operator(&PartialPermutation::empty(r), n)?;
        let mut dense = q.hermitian_eigenvalues();
        dense.dedup_by(|a, b| (*a - *b).abs() < 1e-9);
        payload["dense"] = json!({
            "distinctEigenvalues": dense,
            "containedInLq": spectrum_contained(&dense, &ev, 1e-8),
        });
    }
    Ok(Outcome { payload, table: Some(table) })
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SimulateArgs {
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub r: Option<usize>,
    /// Moment order for the `moment` statistic.
    #[arg(long)]
    pub p: Option<usize>,
    /// bell[:π] | ghz | product[:digits] | random
    #[arg(long)]
    pub input: Option<String>,
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub log_base: Option<LogBase>,
}

/// Per-sample statistics of the conjugate-pair output.
pub fn simulate(args: &SimulateArgs) -> Result<Outcome> {
    let cfg = SimulationConfig {
        n: need(args.n, "n")?,
        k: need(args.k, "k")?,
        samples: need(args.samples, "samples")?,
        seed: need(args.seed, "seed")?,
    };
    let r = need(args.r, "r")?;
    let p = need(args.p, "p")?;
    let base = args.log_base.unwrap_or_default();
    let input_text = args.input.as_deref().unwrap_or("bell");
    let input = InputSpec::parse(input_text, r, cfg.seed)?;
    if input.r() != r {
        bail!("input {input_text:?} has r = {}, expected {r}", input.r());
    }
    let outputs = sample_outputs(&cfg, &input)?;

    let mut table = Table::new(vec!["sampleIndex", "statistic", "value"]);
    let mut moments = Vec::with_capacity(outputs.len());
    let mut tops = Vec::with_capacity(outputs.len());
    let mut entropies = Vec::with_capacity(outputs.len());
    for (i, z) in outputs.iter().enumerate() {
        let m = trace_power(z, p);
        let top = spectrum(z.matrix())[0];
        let h = von_neumann_entropy(z, base)?;
        table.push(vec![i.into(), "moment".into(), m.into()]);
        table.push(vec![i.into(), "maxEigenvalue".into(), top.into()]);
        table.push(vec![i.into(), "entropy".into(), h.into()]);
        moments.push(m);
        tops.push(top);
        entropies.push(h);
    }
    let summary = |v: &[f64]| {
        let (mean, stderr) = mean_stderr(v);
        json!({"mean": mean, "stderr": stderr})
    };
    // the formula at the finite-n overlaps; unavailable beyond the enumeration cap
    let formula = match moment_formula(p, r, cfg.k, &input.a_map(cfg.n)?) {
        Ok(v) => Some(v),
        Err(Error::CapExceeded { .. }) => None,
        Err(e) => return Err(e.into()),
    };
    Ok(Outcome {
        payload: json!({
            "moment": summary(&moments),
            "maxEigenvalue": summary(&tops),
            "entropy": summary(&entropies),
            "momentFormula": formula,
        }),
        table: Some(table),
    })
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct LimitArgs {
    #[arg(long)]
    pub k: Option<usize>,
    /// a-map: JSON text, @file, `bell:r=R[:π]` or `trivial:r=R`
    #[arg(long)]
    pub a: Option<String>,
    #[arg(long)]
    pub log_base: Option<LogBase>,
}

pub fn parse_a_map(text: &str) -> Result<AParameters> {
    let text = text.trim();
    if let Some(path) = text.strip_prefix('@') {
        let body = std::fs::read_to_string(path).with_context(|| format!("reading {path}"))?;
        return Ok(AParameters::from_json(&body)?);
    }
    if text.starts_with('{') {
        return Ok(AParameters::from_json(text)?);
    }
    let mut parts = text.splitn(3, ':');
    let kind = parts.next().unwrap_or_default();
    let r: usize = parts
        .next()
        .and_then(|s| s.strip_prefix("r="))
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| anyhow!("expected `{kind}:r=<r>` in {text:?}"))?;
    match (kind, parts.next()) {
        ("bell", pi) => {
            let pi = match pi {
                Some(s) => Permutation::parse(s, Some(r))?,
                None => Permutation::identity(r),
            };
            Ok(AParameters::bell(&pi))
        }
        ("trivial", None) => Ok(AParameters::trivial(r)),
        _ => bail!("unknown a-map shorthand {text:?}"),
    }
}

/// Limit output, its convex decomposition and entropies.
pub fn limit_cmd(args: &LimitArgs) -> Result<Outcome> {
    let k = need(args.k, "k")?;
    let a = parse_a_map(args.a.as_deref().ok_or_else(|| anyhow!("missing --a"))?)?;
    let base = args.log_base.unwrap_or_default();
    let p = limit::p_from_a(&a)?;
    let z = limit::limit_output(&a, k)?;
    let mut eigenvalues = z.hermitian_eigenvalues();
    eigenvalues.reverse();
    let realizable = p.realizable();
    let (entropy, chain) = if realizable {
        let chain = limit::entropy_lower_bound_check(&p, k, base)?;
        (Some(von_neumann_entropy(&z, base)?), Some(chain))
    } else {
        (None, None)
    };
    let hc = limit::entropy_of_c(k, base)?;
    let weights: Vec<Value> = p
        .values()
        .iter()
        .map(|(alpha, w)| json!({"pp": alpha.to_string(), "p": w}))
        .collect();
    Ok(Outcome {
        payload: json!({
            "k": k,
            "r": a.r(),
            "logBase": base,
            "a": a.to_json(),
            "pWeights": weights,
            "realizable": realizable,
            "eigenvalues": eigenvalues,
            "entropy": entropy,
            "entropyOfC": hc,
            "bellEntropy": a.r() as f64 * hc,
            "chain": chain,
        }),
        table: None,
    })
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct TraceBoundsArgs {
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub r: Option<usize>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub trials: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
}

/// Randomized audit of the generalized-trace bounds; a violation is an error.
pub fn trace_bounds(args: &TraceBoundsArgs) -> Result<Outcome> {
    let (k, r, n) = (need(args.k, "k")?, need(args.r, "r")?, need(args.n, "n")?);
    let (trials, seed) = (need(args.trials, "trials")?, need(args.seed, "seed")?);
    let checker = BoundChecker::new(k, r)?;
    let reports = (0..trials as u64)
        .into_par_iter()
        .map(|t| checker.random_trial(n, &mut sample_rng(seed, t)))
        .collect::<conjpair::Result<Vec<_>>>()?;
    let mut table = Table::new(vec![
        "trial", "sigma", "distGamma", "distTheta", "lhs", "bound1", "boundInf", "bound2", "slack1", "slackInf",
        "slack2",
    ]);
    for (t, rep) in reports.iter().enumerate() {
        table.push(vec![
            t.into(),
            rep.distances.sigma.clone().into(),
            rep.distances.dist_gamma.into(),
            rep.distances.dist_theta.into(),
            rep.lhs.into(),
            rep.bound1.into(),
            rep.bound_inf.into(),
            rep.bound2.into(),
            rep.slack1.into(),
            rep.slack_inf.into(),
            rep.slack2.into(),
        ]);
    }
    let min = |f: &dyn Fn(&conjpair::bounds::BoundReport) -> Option<f64>| {
        reports.iter().filter_map(f).reduce(f64::min)
    };
    Ok(Outcome {
        payload: json!({
            "k": k, "r": r, "n": n, "trials": trials, "seed": seed,
            "violations": reports.iter().map(|r| r.violations()).sum::<usize>(),
            "minSlack1": min(&|r| Some(r.slack1)),
            "minSlackInf": min(&|r| Some(r.slack_inf)),
            "minSlack2": min(&|r| r.slack2),
        }),
        table: Some(table),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn a_map_shorthands() {
        assert_eq!(parse_a_map("bell:r=1").unwrap(), AParameters::bell(&Permutation::identity(1)));
        let swap = Permutation::parse("(1 2)", Some(2)).unwrap();
        assert_eq!(parse_a_map("bell:r=2:(1 2)").unwrap(), AParameters::bell(&swap));
        assert_eq!(parse_a_map("trivial:r=2").unwrap(), AParameters::trivial(2));
        assert!(parse_a_map("bell").is_err());
        assert!(parse_a_map("nonsense:r=1").is_err());
        assert!(parse_a_map("{\"r\": 1").is_err());
    }

    #[test]
    fn missing_flags_are_reported() {
        let err = wg(&WgArgs { p: Some(2), n: None }).unwrap_err();
        assert!(err.to_string().contains("--n"));
    }
}
