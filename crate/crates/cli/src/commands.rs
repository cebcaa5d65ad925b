use serde::Serialize;
use serde_json::{json, Map, Value};

use crate::args::{Cli, Command, GadgetCommand, ReduceSource, ReduceStep, ThresholdArgs};
use crate::query::{limits, rational_arg, read_file, resolve, Resolved};
use crate::{Failure, Outcome, EXIT_NO, EXIT_UNDECIDED, EXIT_YES};
use relevance_core::counting::{decompose_independent_with, Counter};
use relevance_core::gadgets::{build_pi, lower_probability_gadget, raise_probability_gadget};
use relevance_core::reductions::{
    inapprox_parameters, reduce_emajsat_to_ip1, reduce_ip1_to_ip2, reduce_ip2_to_relevant_input, reduce_sat_to_ip3,
    verify_reduction, ProblemInstance, ProblemKind, VerificationStatus,
};
use relevance_core::relevance::{
    amplified_sample_relevance, decide_gapped_with, decide_relevant_input_with, greedy_min_relevant_with,
    is_delta_relevant_with, sample_relevance, solve_min_relevant_input_with, Promise, Verdict,
};
use relevance_core::shapley::shapley_values_with;
use relevance_core::{Limits, Rational};

/// Majority-vote size used by the sampled searches unless `--rounds` is given.
const DEFAULT_ROUNDS: u32 = 15;

type Params = Map<String, Value>;

pub fn name(c: &Command) -> String {
    match c {
        Command::Eval(_) => "eval".into(),
        Command::Prob { .. } => "prob".into(),
        Command::Check(_) => "check".into(),
        Command::Decide(_) => "decide".into(),
        Command::Minimize(_) => "minimize".into(),
        Command::Sample(_) => "sample".into(),
        Command::DecideGapped(_) => "decide-gapped".into(),
        Command::Greedy(_) => "greedy".into(),
        Command::Gadget(g) => match g {
            GadgetCommand::Pi { .. } => "gadget pi".into(),
            GadgetCommand::Raise(_) => "gadget raise".into(),
            GadgetCommand::Lower(_) => "gadget lower".into(),
        },
        Command::Reduce { step } => match step {
            ReduceStep::EmajsatIp1(_) => "reduce emajsat-ip1".into(),
            ReduceStep::Ip1Ip2(_) => "reduce ip1-ip2".into(),
            ReduceStep::Ip2Ri(_) => "reduce ip2-ri".into(),
            ReduceStep::SatIp3 { .. } => "reduce sat-ip3".into(),
        },
        Command::Verify { .. } => "verify".into(),
        Command::InapproxParams { .. } => "inapprox-params".into(),
        Command::Shapley(_) => "shapley".into(),
        Command::CompileRelu { .. } => "compile-relu".into(),
    }
}

fn to_value(v: impl Serialize) -> Value {
    serde_json::to_value(v).expect("results serialise")
}

fn verdict_code(v: Verdict) -> u8 {
    match v {
        Verdict::Yes => EXIT_YES,
        Verdict::No => EXIT_NO,
        Verdict::DontKnow => EXIT_UNDECIDED,
    }
}

fn done(code: u8, result: impl Serialize) -> Result<Outcome, Failure> {
    Ok(Outcome {
        code,
        result: to_value(result),
    })
}

pub fn run(cli: &Cli, params: &mut Params) -> Result<Outcome, Failure> {
    let base = match cli.command {
        Command::Verify { .. } => Limits::for_verification(),
        _ => Limits::default(),
    };
    match &cli.command {
        Command::Eval(q) => {
            let r = resolve(q, params)?;
            let value = r.formula.evaluate(r.x()?)?;
            done(EXIT_YES, json!({ "value": value }))
        }
        Command::Prob { query, decompose } => {
            let r = resolve(query, params)?;
            let lim = limits(base, &cli.caps, params);
            params.insert("decompose".into(), json!(decompose));
            let mut counter = Counter::new(&lim);
            let mut result = Map::new();
            result.insert("probability".into(), to_value(counter.satisfaction(&r.formula)?));
            if let (Some(x), Some(s)) = (&r.x, &r.s) {
                result.insert("agreement".into(), to_value(counter.agreement(&r.formula, x, s)?));
            }
            if *decompose {
                result.insert("decomposition".into(), to_value(decompose_independent_with(&r.formula, &lim)?));
            }
            done(EXIT_YES, result)
        }
        Command::Check(q) => {
            let r = resolve(q, params)?;
            let lim = limits(base, &cli.caps, params);
            let (ok, p) = is_delta_relevant_with(&r.formula, r.x()?, r.s()?, r.delta()?, &lim)?;
            let verdict = if ok { Verdict::Yes } else { Verdict::No };
            done(verdict_code(verdict), json!({ "verdict": verdict, "probability": p }))
        }
        Command::Decide(q) => {
            let r = resolve(q, params)?;
            let lim = limits(base, &cli.caps, params);
            let rep = decide_relevant_input_with(&r.formula, r.x()?, r.k()?, r.delta()?, &lim)?;
            done(verdict_code(rep.verdict), rep)
        }
        Command::Minimize(q) => {
            let r = resolve(q, params)?;
            let lim = limits(base, &cli.caps, params);
            done(EXIT_YES, solve_min_relevant_input_with(&r.formula, r.x()?, r.delta()?, &lim)?)
        }
        Command::Sample(q) => {
            let r = resolve(q, params)?;
            let seed = r.seed()?;
            let rounds = r.rounds.unwrap_or(1);
            params.insert("rounds".into(), json!(rounds));
            let (f, x, s) = (&r.formula, r.x()?, r.s()?);
            if rounds == 1 {
                let o = sample_relevance(f, x, s, r.delta()?, r.gamma()?, seed)?;
                done(verdict_code(o.verdict), o)
            } else {
                let o = amplified_sample_relevance(f, x, s, r.delta()?, r.gamma()?, seed, rounds)?;
                done(verdict_code(o.verdict), o)
            }
        }
        Command::DecideGapped(q) => {
            let r = resolve(q, params)?;
            let lim = limits(base, &cli.caps, params);
            let rounds = sampled_rounds(&r, params);
            let rep = decide_gapped_with(&r.formula, r.x()?, r.k()?, r.delta()?, r.gamma()?, r.seed()?, rounds, &lim)?;
            let code = if rep.promise == Some(Promise::Violated) {
                EXIT_UNDECIDED
            } else {
                verdict_code(rep.verdict)
            };
            done(code, rep)
        }
        Command::Greedy(q) => {
            let r = resolve(q, params)?;
            let lim = limits(base, &cli.caps, params);
            let rounds = sampled_rounds(&r, params);
            let o = greedy_min_relevant_with(&r.formula, r.x()?, r.delta()?, r.gamma()?, r.seed()?, rounds, &lim)?;
            done(EXIT_YES, o)
        }
        Command::Gadget(g) => gadget(g, params),
        Command::Reduce { step } => reduce(step, params),
        Command::Verify { source, reduced } => {
            let lim = limits(base, &cli.caps, params);
            params.insert("source".into(), json!(source.display().to_string()));
            params.insert("reduced".into(), json!(reduced.display().to_string()));
            let src = load_instance(source)?;
            let red = load_instance(reduced)?;
            let rep = verify_reduction(&src, &red, &lim)?;
            let code = match rep.status {
                VerificationStatus::Pass => EXIT_YES,
                VerificationStatus::Fail => EXIT_NO,
                VerificationStatus::Skipped => EXIT_UNDECIDED,
            };
            done(code, rep)
        }
        Command::InapproxParams { d, delta, gamma, alpha } => {
            params.insert("d".into(), json!(d));
            let delta = rational_arg("delta", delta, params)?;
            let gamma = rational_arg("gamma", gamma, params)?;
            let alpha = rational_arg("alpha", alpha, params)?;
            let rec = inapprox_parameters(*d, &delta, &gamma, &alpha)?;
            done(if rec.check { EXIT_YES } else { EXIT_NO }, rec)
        }
        Command::Shapley(q) => {
            let r = resolve(q, params)?;
            let lim = limits(base, &cli.caps, params);
            done(EXIT_YES, shapley_values_with(&r.formula, r.x()?, &lim)?)
        }
        Command::CompileRelu { query, check } => {
            let r = resolve(query, params)?;
            params.insert("check".into(), json!(check));
            let net = r.formula.compile_to_relu();
            let mut result = Map::new();
            result.insert("network".into(), to_value(&net));
            let mut code = EXIT_YES;
            if *check {
                let lim = limits(base, &cli.caps, params);
                let table = r.formula.truth_table(lim.enum_cap)?;
                let d = r.formula.arity();
                let agrees = (0..1usize << d).all(|j| {
                    let input: Vec<bool> = (0..d).map(|p| j >> p & 1 == 1).collect();
                    net.forward(&input) == table.get(j)
                });
                result.insert("agrees".into(), json!(agrees));
                if !agrees {
                    code = EXIT_NO;
                }
            }
            done(code, result)
        }
    }
}

fn sampled_rounds(r: &Resolved, params: &mut Params) -> u32 {
    let rounds = r.rounds.unwrap_or(DEFAULT_ROUNDS);
    params.insert("rounds".into(), json!(rounds));
    rounds
}

fn gadget(g: &GadgetCommand, params: &mut Params) -> Result<Outcome, Failure> {
    match g {
        GadgetCommand::Pi { eta, ell } => {
            let eta = rational_arg("eta", eta, params)?;
            params.insert("ell".into(), json!(ell));
            done(EXIT_YES, build_pi(&eta, *ell)?)
        }
        GadgetCommand::Raise(t) => {
            let (d1, d2) = threshold_args(t, params)?;
            done(EXIT_YES, raise_probability_gadget(t.d, &d1, &d2)?)
        }
        GadgetCommand::Lower(t) => {
            let (d1, d2) = threshold_args(t, params)?;
            done(EXIT_YES, lower_probability_gadget(t.d, &d1, &d2)?)
        }
    }
}

fn threshold_args(t: &ThresholdArgs, params: &mut Params) -> Result<(Rational, Rational), Failure> {
    params.insert("d".into(), json!(t.d));
    Ok((
        rational_arg("delta1", &t.delta1, params)?,
        rational_arg("delta2", &t.delta2, params)?,
    ))
}

fn load_instance(path: &std::path::Path) -> Result<ProblemInstance, Failure> {
    serde_json::from_str(&read_file(path)?).map_err(|e| Failure::usage(format!("bad instance file {}: {e}", path.display())))
}

/// The source instance of a reduction step, from a file or from the query.
fn source_instance(src: &ReduceSource, kind: ProblemKind, params: &mut Params) -> Result<(ProblemInstance, Option<Resolved>), Failure> {
    if let Some(path) = &src.source {
        params.insert("source".into(), json!(path.display().to_string()));
        let inst = load_instance(path)?;
        if inst.kind != kind {
            return Err(Failure::usage(format!("the source is a {} instance, this step needs {kind}", inst.kind)));
        }
        // the query may still carry step parameters such as --delta
        let has_query = src.query.formula.is_some() || src.query.input.is_some();
        if has_query {
            return Err(Failure::usage("give either --source or a formula, not both"));
        }
        let mut extra = Map::new();
        let resolved = step_parameters(&src.query, &mut extra)?;
        params.extend(extra);
        return Ok((inst, Some(resolved)));
    }
    let r = resolve(&src.query, params)?;
    let f = r.formula.clone();
    let inst = match kind {
        ProblemKind::EMajSat => ProblemInstance::emajsat(f, r.k()?)?,
        ProblemKind::Ip1 => ProblemInstance::ip1(f, r.x()?.clone(), r.k()?)?,
        ProblemKind::Ip2 => ProblemInstance::ip2(f, r.x()?.clone(), r.k()?, r.delta()?.clone())?,
        ProblemKind::Sat => ProblemInstance::sat(f)?,
        ProblemKind::Ip3 | ProblemKind::RelevantInput => unreachable!("no step starts here"),
    };
    Ok((inst, Some(r)))
}

/// `--delta` and `--gamma` given next to `--source`.
fn step_parameters(q: &crate::args::Query, params: &mut Params) -> Result<Resolved, Failure> {
    let mut r = Resolved {
        formula: relevance_core::Formula::parse("x1").expect("constant text"),
        x: None,
        s: None,
        k: None,
        m: None,
        delta: None,
        gamma: None,
        seed: None,
        rounds: None,
    };
    if let Some(t) = &q.delta {
        r.delta = Some(rational_arg("delta", t, params)?);
    }
    if let Some(t) = &q.gamma {
        r.gamma = Some(rational_arg("gamma", t, params)?);
    }
    Ok(r)
}

fn reduce(step: &ReduceStep, params: &mut Params) -> Result<Outcome, Failure> {
    let (src, inst, mut result) = match step {
        ReduceStep::EmajsatIp1(src) => {
            let (source, _) = source_instance(src, ProblemKind::EMajSat, params)?;
            let reduced = reduce_emajsat_to_ip1(&source)?;
            (src, reduced, json!({ "source": source }))
        }
        ReduceStep::Ip1Ip2(src) => {
            let (source, r) = source_instance(src, ProblemKind::Ip1, params)?;
            let delta = r.as_ref().and_then(|r| r.delta.clone()).ok_or_else(|| Failure::usage("--delta (the target threshold) is required"))?;
            let red = reduce_ip1_to_ip2(&source, &delta)?;
            (src, red.instance, json!({ "source": source, "gadget": red.gadget }))
        }
        ReduceStep::Ip2Ri(src) => {
            let (source, _) = source_instance(src, ProblemKind::Ip2, params)?;
            let reduced = reduce_ip2_to_relevant_input(&source)?;
            (src, reduced, json!({ "source": source }))
        }
        ReduceStep::SatIp3 { source: src, m } => {
            let (source, r) = source_instance(src, ProblemKind::Sat, params)?;
            let r = r.expect("always resolved");
            let delta = r.delta.clone().ok_or_else(|| Failure::usage("--delta is required"))?;
            let gamma = r.gamma.clone().ok_or_else(|| Failure::usage("--gamma is required"))?;
            let m = m.or(r.m);
            if let Some(m) = m {
                params.insert("m".into(), json!(m));
            }
            let (reduced, sizes) = reduce_sat_to_ip3(&source, &delta, &gamma, m)?;
            (src, reduced, json!({ "source": source, "sizes": sizes }))
        }
    };
    if let Some(path) = &src.write {
        params.insert("write".into(), json!(path.display().to_string()));
        let mut text = serde_json::to_string_pretty(&inst).expect("instances serialise");
        text.push('\n');
        std::fs::write(path, text).map_err(|e| Failure {
            code: crate::EXIT_USAGE,
            reason: "io",
            message: format!("cannot write {}: {e}", path.display()),
        })?;
    }
    result["reduced"] = to_value(&inst);
    done(EXIT_YES, result)
}
