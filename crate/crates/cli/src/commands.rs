use std::fs;
use std::path::Path;
use std::time::Duration;

use anyhow::{Context, Result};
use itlp::exact::{brute_force, solve_bnb, BnbParams};
use itlp::formulation::{build, model_stats, ModelOptions, Scheme};
use itlp::generator::{generate, generate_handling_costs, GenSpec, Ranges};
use itlp::heuristic::{solve_heuristic_traced, HeuristicParams};
use itlp::io::{parse_instance, parse_solution, render_instance, render_lp, render_solution};
use itlp::naming::{encode_name, NameValue};
use itlp::solution::{check_solution, Solution, SolveStatus};
use itlp::{Instance, LinkMode, VariantSpec};

use crate::table::{print_header, print_row, BenchRow};
use crate::{
    Engine, EngineArgs, ExportArgs, GenArgs, InfoArgs, LinkModeArg, SchemeArg, SolveArgs, UsageError, VariantArg,
    VariantArgs, VerifyArgs, EXIT_FEASIBLE, EXIT_INFEASIBLE, EXIT_LIMIT, EXIT_OK, EXIT_VERIFY_FAILED,
};

fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

pub(crate) fn read_instance(path: &Path) -> Result<Instance> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse_instance(&text).with_context(|| format!("parsing {}", path.display()))
}

fn write_out(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

pub(crate) fn variant_spec(
    variant: VariantArg,
    l: Option<usize>,
    q: Option<usize>,
    t_seed: Option<u64>,
    t_max: f64,
    link_mode: LinkModeArg,
    p: usize,
) -> Result<VariantSpec> {
    let mode = match link_mode {
        LinkModeArg::Exact => LinkMode::Exact,
        LinkModeArg::Atmost => LinkMode::AtMost,
    };
    let need = |v: Option<usize>, flag: &str, name: &str| v.ok_or_else(|| usage(format!("variant {name} requires {flag}")));
    let forbid = |present: bool, flag: &str, name: &str| -> Result<()> {
        if present {
            Err(usage(format!("variant {name} does not take {flag}")))
        } else {
            Ok(())
        }
    };
    if t_seed.is_some() && variant != VariantArg::Handling {
        return Err(usage("--t-seed only applies to --variant handling"));
    }
    let spec = match variant {
        VariantArg::Base => {
            forbid(q.is_some(), "--q", "base")?;
            VariantSpec::base(need(l, "--l", "base")?, mode)
        }
        VariantArg::MinLinks => {
            forbid(l.is_some(), "--l", "min-links")?;
            if mode == LinkMode::AtMost {
                return Err(usage("variant min-links has no link count, --link-mode does not apply"));
            }
            VariantSpec::min_links(need(q, "--q", "min-links")?)
        }
        VariantArg::Handling => {
            forbid(q.is_some(), "--q", "handling")?;
            let seed = t_seed.ok_or_else(|| usage("variant handling requires --t-seed"))?;
            if !(t_max.is_finite() && t_max >= 0.0) {
                return Err(usage("--t-max must be finite and nonnegative"));
            }
            VariantSpec::handling(need(l, "--l", "handling")?, generate_handling_costs(p, seed, t_max), mode)
        }
        VariantArg::Pl => VariantSpec::pl(need(q, "--q", "pl")?, need(l, "--l", "pl")?, mode),
    };
    spec.check(p).map_err(|e| usage(e.to_string()))?;
    Ok(spec)
}

fn spec_from(args: &VariantArgs, p: usize) -> Result<VariantSpec> {
    variant_spec(args.variant, args.l, args.q, args.t_seed, args.t_max, args.link_mode, p)
}

/// Table label such as `10C10L4TL`.
pub(crate) fn label(inst: &Instance, spec: &VariantSpec) -> String {
    let value = match (spec.q_terminals, spec.l) {
        (Some(q), Some(l)) => NameValue::TerminalsAndLinks { terminals: q, links: l },
        (Some(q), None) => NameValue::Terminals(q),
        (None, Some(l)) => NameValue::Links(l),
        (None, None) => NameValue::Links(0),
    };
    encode_name(inst.n(), inst.p(), value)
}

pub(crate) fn status_code(status: SolveStatus) -> u8 {
    match status {
        SolveStatus::Optimal => EXIT_OK,
        SolveStatus::Feasible => EXIT_FEASIBLE,
        SolveStatus::Infeasible => EXIT_INFEASIBLE,
        SolveStatus::TimeLimit => EXIT_LIMIT,
    }
}

fn seconds(v: f64, flag: &str) -> Result<Duration> {
    if !(v.is_finite() && v > 0.0) {
        return Err(usage(format!("{flag} must be a positive number of seconds")));
    }
    Ok(Duration::from_secs_f64(v))
}

pub(crate) struct Solved {
    pub solution: Solution,
    pub trace: Vec<itlp::heuristic::TracePoint>,
}

pub(crate) fn run_engine(inst: &Instance, spec: &VariantSpec, engine: &EngineArgs) -> Result<Solved> {
    Ok(match engine.engine {
        Engine::Exact => {
            let params = BnbParams {
                time_limit: seconds(engine.time_limit, "--time-limit")?,
                node_limit: engine.node_limit,
                gap: engine.gap,
                ..BnbParams::default()
            };
            Solved { solution: solve_bnb(inst, spec, &params)?, trace: Vec::new() }
        }
        Engine::Heuristic => {
            let params = HeuristicParams {
                time_budget: seconds(engine.budget, "--budget")?,
                seed: engine.heuristic_seed,
                ..HeuristicParams::default()
            };
            let res = solve_heuristic_traced(inst, spec, &params)?;
            Solved { solution: res.solution, trace: res.trace }
        }
        Engine::Oracle => Solved { solution: brute_force(inst, spec)?, trace: Vec::new() },
    })
}

pub(crate) fn gen(a: GenArgs) -> Result<u8> {
    let spec = GenSpec {
        n: a.n,
        p: a.p,
        seed: a.seed,
        ranges: Ranges {
            coord_max: a.coord_max,
            demand_max: a.demand_max,
            fixed_max: a.fixed_max,
            capacity_max: a.capacity_max,
        },
        alpha: a.alpha,
    };
    let inst = generate(&spec).map_err(|e| usage(e.to_string()))?;
    write_out(a.out.as_deref(), &render_instance(&inst))?;
    Ok(EXIT_OK)
}

pub(crate) fn solve(a: SolveArgs) -> Result<u8> {
    let inst = read_instance(&a.instance)?;
    let spec = spec_from(&a.variant, inst.p())?;
    let name = a.name.clone().unwrap_or_else(|| label(&inst, &spec));
    let solved = run_engine(&inst, &spec, &a.engine)?;
    let sol = &solved.solution;
    if let Some(why) = &sol.infeasibility {
        eprintln!("infeasible: {why}");
    }
    if let Some(path) = &a.out {
        fs::write(path, render_solution(&name, sol)).with_context(|| format!("writing {}", path.display()))?;
    }
    if let Some(path) = &a.trace {
        let mut w = csv::Writer::from_path(path).with_context(|| format!("writing {}", path.display()))?;
        w.write_record(["iteration", "best_objective", "elapsed_s"])?;
        for t in &solved.trace {
            w.write_record([t.iteration.to_string(), format!("{:.6}", t.best), format!("{:.6}", t.elapsed)])?;
        }
        w.flush()?;
    }
    print_header(&spec);
    print_row(&BenchRow::from_solution(&name, 0, &spec, engine_name(a.engine.engine), sol));
    Ok(status_code(sol.status))
}

pub(crate) fn engine_name(e: Engine) -> &'static str {
    match e {
        Engine::Exact => "exact",
        Engine::Heuristic => "heuristic",
        Engine::Oracle => "oracle",
    }
}

pub(crate) fn verify(a: VerifyArgs) -> Result<u8> {
    let inst = read_instance(&a.instance)?;
    let text = fs::read_to_string(&a.solution).with_context(|| format!("reading {}", a.solution.display()))?;
    let (name, sol) = parse_solution(&text).with_context(|| format!("parsing {}", a.solution.display()))?;
    let report = check_solution(&inst, &sol.variant, &sol);
    println!("solution {} ({}, {})", if name.is_empty() { "-" } else { &name }, sol.variant.kind, sol.status);
    print!("{report}");
    if report.ok() {
        println!("verification passed");
        Ok(EXIT_OK)
    } else {
        let families: Vec<&str> = report.violated().iter().map(|(f, _)| f.as_str()).collect();
        if families.is_empty() {
            println!("verification failed");
        } else {
            println!("verification failed: {}", families.join(", "));
        }
        Ok(EXIT_VERIFY_FAILED)
    }
}

pub(crate) fn info(a: InfoArgs) -> Result<u8> {
    let inst = read_instance(&a.instance)?;
    let spec = spec_from(&a.variant, inst.p())?;
    let (n, p) = (inst.n(), inst.p());
    println!("instance: n = {n}, p = {p}, demand pairs = {}, triangle inequality: {}", inst.demand_pairs().len(), inst.triangle_ok());
    let reduced = build(&inst, &spec, &ModelOptions::default())?;
    if let Some(s) = &reduced.structural_infeasibility {
        println!("structurally infeasible: {s}");
        return Ok(EXIT_INFEASIBLE);
    }
    let literal = build(&inst, &spec, &ModelOptions::literal())?;
    for (title, model) in [("reduced model", &reduced), ("literal model", &literal)] {
        let s = model_stats(model);
        println!("{title}: {} constraints, {} variables ({} binary)", s.num_constraints, s.num_variables, s.num_binaries);
        for (family, count) in &s.per_family {
            println!("  {:<16} {count}", family.as_str());
        }
    }
    let (n2, p2) = (n * n, p * p);
    println!(
        "closed form: n²p²+3p²+n²+p+1 = {} constraints, n²p²+n²+p² = {} variables",
        n2 * p2 + 3 * p2 + n2 + p + 1,
        n2 * p2 + n2 + p2
    );
    Ok(EXIT_OK)
}

pub(crate) fn export_lp(a: ExportArgs) -> Result<u8> {
    let inst = read_instance(&a.instance)?;
    let spec = spec_from(&a.variant, inst.p())?;
    let opts = match a.scheme {
        SchemeArg::Reduced => ModelOptions::default(),
        SchemeArg::Literal => ModelOptions { scheme: Scheme::Literal, ..ModelOptions::default() },
    };
    let model = build(&inst, &spec, &opts)?;
    if let Some(s) = &model.structural_infeasibility {
        eprintln!("structurally infeasible: {s}");
        return Ok(EXIT_INFEASIBLE);
    }
    write_out(a.out.as_deref(), &render_lp(&model))?;
    Ok(EXIT_OK)
}
