use std::io::Write;

use painleve_core::catalog::{build_system, HamiltonianSystem, SystemId};
use painleve_core::holomorphy::{ansatz_solve, charts, default_t_degree};
use painleve_core::numerics::{integrate, to_csv, to_json, FloatFormat, Options};
use painleve_core::symkernel::{format_rational, parse_expr, parse_rational, q, Rational};
use painleve_core::weyl::{apply_map, generators, parse_word, translation_offset};
use painleve_core::Exec;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::config::{self, FileConfig, OutputFormat};
use crate::error::{exit, CliError};
use crate::verify;
use crate::{Command, GlobalArgs, IntegrateArgs};

const DEFAULT_SEED: u64 = 1;

pub fn dispatch(cmd: Command, g: &GlobalArgs) -> Result<u8, CliError> {
    let file = FileConfig::load(g.config.as_deref())?;
    let format = g.format.or(file.format).unwrap_or_default();
    let seed = g.seed.or(file.seed).unwrap_or(DEFAULT_SEED);
    let exec = if g.sequential { Exec::Sequential } else { Exec::default() };
    let out = Output { path: g.output.clone().or_else(|| file.output.clone()) };
    match cmd {
        Command::Verify { system, suite } => {
            let sys = system_by_name(&system)?;
            let report = verify::run(&sys, suite, seed, exec)?;
            match format {
                OutputFormat::Json => out.json(&serde_json::to_value(&report)?)?,
                OutputFormat::Csv => out.text(&report.to_csv()?)?,
            }
            eprintln!("{}: {} passed, {} failed", sys.id, report.passed, report.failed);
            Ok(if report.all_pass() { exit::OK } else { exit::FAILED })
        }
        Command::Integrate(args) => cmd_integrate(args, &file, format, &out),
        Command::Apply { system, word, expr, state, params } => {
            let sys = system_by_name(&system)?;
            cmd_apply(&sys, &word, expr.as_deref(), state.as_deref(), params, g.format.or(file.format), &out)
        }
        Command::Ansatz { system, params, t_degree } => {
            let sys = system_by_name(&system)?;
            let values = match params.or_else(|| file.params.as_ref().map(|p| p.join(","))) {
                Some(p) => config::parse_rational_list(&p)?,
                None => random_free_params(&sys, seed),
            };
            let pv = config::parameter_values(&sys, &values)?;
            let report = ansatz_solve(&sys, t_degree.unwrap_or(default_t_degree(sys.id)), &pv, exec)?;
            out.json(&serde_json::to_value(&report)?)?;
            Ok(if report.all_members() { exit::OK } else { exit::FAILED })
        }
        Command::Export { system } => {
            let sys = system_by_name(&system)?;
            match format {
                OutputFormat::Json => out.json(&catalog_json(&sys)?)?,
                OutputFormat::Csv => out.text(&catalog_csv(&sys)?)?,
            }
            Ok(exit::OK)
        }
    }
}

struct Output {
    path: Option<std::path::PathBuf>,
}

impl Output {
    fn text(&self, s: &str) -> Result<(), CliError> {
        match &self.path {
            Some(p) => std::fs::write(p, s)?,
            None => std::io::stdout().lock().write_all(s.as_bytes())?,
        }
        Ok(())
    }

    fn json(&self, v: &Value) -> Result<(), CliError> {
        let mut s = serde_json::to_string_pretty(v)?;
        s.push('\n');
        self.text(&s)
    }
}

fn system_by_name(name: &str) -> Result<HamiltonianSystem, CliError> {
    Ok(build_system(name.parse::<SystemId>()?)?)
}

/// Generic free parameters drawn from the seed; small denominators keep
/// the exact arithmetic cheap.
fn random_free_params(sys: &HamiltonianSystem, seed: u64) -> Vec<Rational> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (1..sys.params().len()).map(|_| q(rng.gen_range(1..=40), rng.gen_range(41..=97))).collect()
}

fn cmd_integrate(args: IntegrateArgs, file: &FileConfig, format: OutputFormat, out: &Output) -> Result<u8, CliError> {
    let name = args
        .system
        .or_else(|| file.system.clone())
        .ok_or_else(|| CliError::Usage("integrate needs a system id".into()))?;
    let sys = system_by_name(&name)?;
    let time = match args.time.or_else(|| file.time.clone()) {
        Some(t) => sys.time_by_name(&t)?,
        None => sys.times()[0],
    };
    let initial = match args.initial {
        Some(s) => config::parse_f64_list(&s)?,
        None => file.initial.clone().ok_or_else(|| CliError::Usage("integrate needs --initial".into()))?,
    };
    let params = match args.params {
        Some(s) => config::parse_rational_list(&s)?,
        None => file
            .params
            .as_ref()
            .ok_or_else(|| CliError::Usage("integrate needs --params".into()))?
            .iter()
            .map(|p| parse_rational(p))
            .collect::<Result<_, _>>()?,
    };
    let pv = config::parameter_values(&sys, &params)?;
    let span = match args.span {
        Some(s) => match config::parse_f64_list(&s)?[..] {
            [a, b] => (a, b),
            _ => return Err(CliError::Usage("span takes two numbers".into())),
        },
        None => file.span.map_or((0.0, 1.0), |[a, b]| (a, b)),
    };
    let method = config::resolve_method(args.method, args.step, args.atol, args.rtol, file)?;
    let mut opts = Options::new(method);
    opts.guards = config::resolve_guards(args.guard, None, file)?;
    let float = args.float_format.or(file.float_format).unwrap_or(FloatFormat::Shortest);

    let tr = integrate(&sys, time, &initial, &pv, span, &opts)?;
    match format {
        OutputFormat::Json => out.json(&to_json(&tr, float))?,
        OutputFormat::Csv => out.text(&to_csv(&tr, float))?,
    }
    match &tr.aborted {
        Some(reason) => {
            eprintln!("integration stopped at t = {}: {reason}", tr.end());
            Ok(exit::FAILED)
        }
        None => Ok(exit::OK),
    }
}

fn cmd_apply(
    sys: &HamiltonianSystem,
    word: &str,
    expr: Option<&str>,
    state: Option<&str>,
    show_params: bool,
    format: Option<OutputFormat>,
    out: &Output,
) -> Result<u8, CliError> {
    if !show_params && expr.is_none() && state.is_none() {
        return Err(CliError::Usage("apply needs an expression, --state or --params".into()));
    }
    let map = parse_word(sys, word)?;
    let t = &sys.table;
    let mut doc = serde_json::Map::new();
    let mut lines = Vec::new();
    doc.insert("word".into(), json!(map.word()));
    if show_params {
        let action: Vec<(String, String)> = map
            .param_action()
            .rules(t, &sys.params())
            .iter()
            .map(|(s, e)| (t.name(*s).to_string(), e.to_string()))
            .collect();
        let offset = translation_offset(sys, &map)?;
        let offset_text =
            offset.as_ref().map(|o| format!("({})", o.iter().map(format_rational).collect::<Vec<_>>().join(",")));
        for (s, e) in &action {
            lines.push(format!("{s} -> {e}"));
        }
        lines.push(format!("offset: {}", offset_text.as_deref().unwrap_or("not a translation")));
        doc.insert(
            "action".into(),
            json!(action.iter().map(|(s, e)| json!({"parameter": s, "image": e})).collect::<Vec<_>>()),
        );
        doc.insert("offset".into(), json!(offset.map(|o| o.iter().map(format_rational).collect::<Vec<_>>())));
    }
    if let Some(src) = expr {
        let f = parse_expr(t, src)?;
        let img = sys.relation.reduce(&apply_map(&map, &f)?)?;
        lines.push(img.to_string());
        doc.insert("expression".into(), json!(src));
        doc.insert("image".into(), json!(img.to_string()));
    }
    if let Some(src) = state {
        let mut point = Vec::new();
        for pair in src.split(',').filter(|s| !s.trim().is_empty()) {
            let (k, v) = pair
                .split_once('=')
                .ok_or_else(|| CliError::Usage(format!("state entry `{pair}` is not name=value")))?;
            point.push((t.sym(k.trim())?, parse_rational(v)?));
        }
        let img = map.apply_point(&point)?;
        let named: Vec<(String, String)> =
            img.iter().map(|(s, v)| (t.name(*s).to_string(), format_rational(v))).collect();
        lines.extend(named.iter().map(|(k, v)| format!("{k} = {v}")));
        doc.insert(
            "state".into(),
            json!(named.iter().map(|(k, v)| json!({"symbol": k, "value": v})).collect::<Vec<_>>()),
        );
    }
    // plain lines unless JSON was asked for
    match format {
        Some(OutputFormat::Json) => out.json(&Value::Object(doc))?,
        _ => out.text(&(lines.join("\n") + "\n"))?,
    }
    Ok(exit::OK)
}

fn catalog_json(sys: &HamiltonianSystem) -> Result<Value, CliError> {
    let mut doc = sys.to_json();
    let gens = generators(sys)?.iter().map(|g| g.to_json()).collect::<Result<Vec<_>, _>>()?;
    doc["generators"] = Value::Array(gens);
    doc["charts"] = Value::Array(charts(sys)?.iter().map(|c| c.to_json()).collect());
    Ok(doc)
}

fn catalog_csv(sys: &HamiltonianSystem) -> Result<String, CliError> {
    let t = &sys.table;
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["kind", "name", "symbol", "expression"])?;
    for (time, h) in &sys.hamiltonians {
        w.write_record(["hamiltonian", t.name(*time), "", &h.to_string()])?;
    }
    for d in &sys.divisors {
        w.write_record(["divisor", &d.name, t.name(d.param), &d.poly.to_string()])?;
    }
    for g in generators(sys)? {
        for (s, e) in g.rules()? {
            w.write_record(["generator", &g.name, t.name(s), &e.to_string()])?;
        }
    }
    for c in charts(sys)? {
        for (s, e) in &c.forward {
            w.write_record(["chart", &c.name, c.table().name(*s), &e.to_string()])?;
        }
    }
    let bytes = w.into_inner().map_err(|e| CliError::Usage(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}
