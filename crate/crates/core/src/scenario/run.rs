//! Command dispatch and report rendering.

use std::collections::BTreeMap;
use std::fmt::Write;

use crate::error::{Error, Result};
use crate::geometry::{levi_civita, metricity_residuals, torsion_residuals, validate_metric, MetricContext, OspFrame};
use crate::integration::action;
use crate::lie_killing::{killing_check, lie_derivative_bilinear, solve_killing, KillingMode};
use crate::morphism::{MapGeometry, NoetherReport};

use super::{Command, NoetherKind, Scenario};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Status {
    Pass,
    Fail,
    Error,
}

impl Status {
    fn as_str(self) -> &'static str {
        match self {
            Status::Pass => "pass",
            Status::Fail => "fail",
            Status::Error => "error",
        }
    }
}

struct CommandResult {
    status: Status,
    values: Vec<(String, String)>,
}

impl CommandResult {
    fn new(status: Status) -> Self {
        CommandResult { status, values: Vec::new() }
    }

    fn put(&mut self, key: impl Into<String>, value: impl ToString) {
        self.values.push((key.into(), value.to_string()));
    }
}

/// Exit code and rendered report of one scenario run.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Outcome {
    pub exit_code: i32,
    pub report: String,
}

fn yes(b: bool) -> &'static str {
    if b {
        "yes"
    } else {
        "no"
    }
}

struct Runner<'a> {
    sc: &'a Scenario,
    contexts: BTreeMap<String, MetricContext>,
    maps: BTreeMap<String, MapGeometry>,
}

impl Runner<'_> {
    fn context(&mut self, name: &str) -> Result<&MetricContext> {
        if !self.contexts.contains_key(name) {
            let ctx = MetricContext::new(self.sc.metric(name).expect("resolved at parse time"))?;
            self.contexts.insert(name.to_string(), ctx);
        }
        Ok(&self.contexts[name])
    }

    fn map(&mut self, name: &str) -> Result<&MapGeometry> {
        if !self.maps.contains_key(name) {
            let decl = self.sc.morphism(name).expect("resolved at parse time");
            let h = self.sc.metric(&decl.source_metric).expect("resolved at parse time");
            let g = self.sc.metric(&decl.target_metric).expect("resolved at parse time");
            let geo = MapGeometry::new(decl.phi.clone(), h, g)?;
            self.maps.insert(name.to_string(), geo);
        }
        Ok(&self.maps[name])
    }

    fn run(&mut self, cmd: &Command) -> Result<CommandResult> {
        match cmd {
            Command::ValidateMetric { metric } => {
                let g = self.sc.metric(metric).expect("resolved at parse time");
                match validate_metric(g) {
                    Ok(sig) => {
                        let mut r = CommandResult::new(Status::Pass);
                        r.put("signature", sig);
                        Ok(r)
                    }
                    Err(Error::Metric(v)) => {
                        let mut r = CommandResult::new(Status::Fail);
                        r.put("violation", v);
                        Ok(r)
                    }
                    Err(e) => Err(e),
                }
            }
            Command::OspFrame { metric } => {
                let g = self.sc.metric(metric).expect("resolved at parse time");
                let frame = OspFrame::from_metric(g)?;
                let mut r = CommandResult::new(Status::Pass);
                r.put("signature", frame.signature());
                for (k, e) in frame.fields().iter().enumerate() {
                    r.put(format!("e{}", k + 1), e.render());
                }
                Ok(r)
            }
            Command::LeviCivita { metric } => {
                let g = self.sc.metric(metric).expect("resolved at parse time");
                let conn = levi_civita(g)?;
                let chart = g.chart();
                let n = chart.dim();
                let torsion = torsion_residuals(&conn)?;
                let metricity = metricity_residuals(&conn, g)?;
                let ok = torsion.is_empty() && metricity.is_empty();
                let mut r = CommandResult::new(if ok { Status::Pass } else { Status::Fail });
                for k in 0..n {
                    for i in 0..n {
                        for j in 0..n {
                            let c = conn.christoffel(k, i, j);
                            if !c.is_zero() {
                                let key = format!(
                                    "Gamma^{}_({},{})",
                                    chart.coord_name(k),
                                    chart.coord_name(i),
                                    chart.coord_name(j)
                                );
                                r.put(key, c);
                            }
                        }
                    }
                }
                r.put("torsion.nonzero", torsion.len());
                r.put("metricity.nonzero", metricity.len());
                Ok(r)
            }
            Command::LieDerivative { field, metric } => {
                let x = self.sc.field(field).expect("resolved at parse time");
                let g = self.sc.metric(metric).expect("resolved at parse time");
                let l = lie_derivative_bilinear(x, g)?;
                let chart = g.chart();
                let mut r = CommandResult::new(Status::Pass);
                let mut count = 0;
                for i in 0..chart.dim() {
                    for j in 0..chart.dim() {
                        let v = l.component(i, j);
                        if !v.is_zero() {
                            count += 1;
                            r.put(format!("L({},{})", chart.coord_name(i), chart.coord_name(j)), v);
                        }
                    }
                }
                r.put("nonzero", count);
                Ok(r)
            }
            Command::CheckKilling { field, metric, modes } => {
                let x = self.sc.field(field).expect("resolved at parse time").clone();
                let ctx = self.context(metric)?;
                let report = killing_check(&x, ctx, modes)?;
                let ok = report.pass() && report.agree();
                let mut r = CommandResult::new(if ok { Status::Pass } else { Status::Fail });
                for m in &report.results {
                    r.put(format!("mode.{}", m.mode), if m.pass { "pass" } else { "fail" });
                    for (label, v) in &m.residuals {
                        r.put(format!("mode.{}.residual{}", m.mode, label), v);
                    }
                }
                r.put("agree", yes(report.agree()));
                Ok(r)
            }
            Command::SolveKilling { metric, degree } => {
                let g = self.sc.metric(metric).expect("resolved at parse time").clone();
                let basis = solve_killing(&g, *degree)?;
                let ctx = self.context(metric)?;
                let (e, o) = basis.dims();
                let (re, ro) = basis.rank_certificate();
                let mut all_killing = true;
                for f in basis.fields() {
                    all_killing &= killing_check(f, ctx, &[KillingMode::I])?.pass();
                }
                let defects = basis.closure_defects(&g)?;
                let ok = all_killing && defects.is_empty() && (re, ro) == (e, o);
                let mut r = CommandResult::new(if ok { Status::Pass } else { Status::Fail });
                r.put("degree", degree);
                r.put("dims", format!("{e}|{o}"));
                r.put("rank", format!("{re}|{ro}"));
                for (k, f) in basis.even.iter().enumerate() {
                    r.put(format!("even.{}", k + 1), f.render());
                }
                for (k, f) in basis.odd.iter().enumerate() {
                    r.put(format!("odd.{}", k + 1), f.render());
                }
                r.put("mode-i", if all_killing { "all pass" } else { "failures" });
                r.put("bracket-closed", yes(defects.is_empty()));
                Ok(r)
            }
            Command::Tension { morphism } => {
                let geo = self.map(morphism)?;
                let tau = geo.tension()?;
                let mut r = CommandResult::new(Status::Pass);
                r.put("map", &geo.phi);
                let pulled = geo.pullback_metric();
                let chart = pulled.chart();
                for i in 0..chart.dim() {
                    for j in 0..chart.dim() {
                        let v = pulled.component(i, j);
                        if !v.is_zero() {
                            r.put(format!("pullback({},{})", chart.coord_name(i), chart.coord_name(j)), v);
                        }
                    }
                }
                r.put("tension", tau.render());
                r.put("harmonic", yes(tau.is_zero()));
                r.put("energy-density", geo.energy_density()?);
                Ok(r)
            }
            Command::CheckNoether { kind, morphism, field } => {
                let xi = self.sc.field(field).expect("resolved at parse time").clone();
                let geo = self.map(morphism)?;
                let report = match kind {
                    NoetherKind::Target => geo.noether_target(&xi)?,
                    NoetherKind::Domain => geo.noether_domain(&xi)?,
                    NoetherKind::Stress => geo.stress_check(&xi)?,
                };
                Ok(noether_result(&report))
            }
            Command::Action { morphism } => {
                let geo = self.map(morphism)?;
                let mut r = CommandResult::new(Status::Pass);
                r.put("action", action(geo)?);
                Ok(r)
            }
        }
    }
}

fn noether_result(report: &NoetherReport) -> CommandResult {
    let mut r = CommandResult::new(if report.pass() { Status::Pass } else { Status::Fail });
    r.put("hypothesis", &report.hypothesis);
    r.put("hypothesis.holds", yes(report.hypothesis_holds));
    for (label, v) in &report.hypothesis_residuals {
        r.put(format!("hypothesis.residual{label}"), v);
    }
    r.put("harmonic", yes(report.harmonic));
    for (k, res) in report.residuals.iter().enumerate() {
        let key = format!("residual.{}", k + 1);
        r.put(format!("{key}.name"), &res.label);
        r.put(format!("{key}.value"), &res.value);
        r.put(format!("{key}.required"), yes(res.required));
    }
    r
}

fn error_kind(e: &Error) -> &'static str {
    if e.is_parse() {
        "parse"
    } else {
        "math-domain"
    }
}

/// Runs the scenario text; `name` is echoed into the report.
pub fn run_source(name: &str, text: &str, seed: u64) -> Outcome {
    let mut human = String::new();
    let mut kv = String::new();
    let _ = writeln!(human, "supergeo scenario report");
    let _ = writeln!(human, "scenario: {name}");
    let _ = writeln!(human, "seed: {seed}");
    let _ = writeln!(kv, "scenario = {name}");
    let _ = writeln!(kv, "seed = {seed}");
    let sc = match Scenario::parse(text) {
        Ok(sc) => sc,
        Err(e) => {
            let _ = writeln!(human, "\nparse error: {e}");
            let _ = writeln!(kv, "parse-error = {e}");
            let _ = writeln!(kv, "exit = 2");
            let _ = writeln!(human, "\nexit: 2");
            return Outcome { exit_code: 2, report: format!("{human}\n--- results ---\n{kv}") };
        }
    };
    let _ = writeln!(human, "commands: {}", sc.commands.len());
    let _ = writeln!(kv, "commands = {}", sc.commands.len());
    let mut runner = Runner { sc: &sc, contexts: BTreeMap::new(), maps: BTreeMap::new() };
    let (mut pass, mut fail, mut error) = (0, 0, 0);
    for (k, line) in sc.commands.iter().enumerate() {
        let idx = k + 1;
        let res = runner.run(&line.command).unwrap_or_else(|e| {
            let mut r = CommandResult::new(Status::Error);
            r.put("error", &e);
            r.put("error-kind", error_kind(&e));
            r
        });
        match res.status {
            Status::Pass => pass += 1,
            Status::Fail => fail += 1,
            Status::Error => error += 1,
        }
        let _ = writeln!(human, "\n[{idx}] {} (line {})", line.text, line.line);
        let _ = writeln!(human, "    status: {}", res.status.as_str());
        let _ = writeln!(kv, "cmd.{idx} = {}", line.text);
        let _ = writeln!(kv, "cmd.{idx}.status = {}", res.status.as_str());
        for (key, v) in &res.values {
            let _ = writeln!(human, "    {key}: {v}");
            let _ = writeln!(kv, "cmd.{idx}.{key} = {v}");
        }
    }
    let exit_code = if error > 0 {
        3
    } else if fail > 0 {
        1
    } else {
        0
    };
    let _ = writeln!(human, "\nsummary: {pass} pass, {fail} fail, {error} error");
    let _ = writeln!(human, "exit: {exit_code}");
    let _ = writeln!(kv, "summary.pass = {pass}");
    let _ = writeln!(kv, "summary.fail = {fail}");
    let _ = writeln!(kv, "summary.error = {error}");
    let _ = writeln!(kv, "exit = {exit_code}");
    Outcome { exit_code, report: format!("{human}\n--- results ---\n{kv}") }
}

/// Reads and runs a scenario file. I/O failures yield exit code 2.
pub fn run_scenario(path: &std::path::Path, seed: u64) -> Outcome {
    let name = path.file_name().map_or_else(|| path.display().to_string(), |n| n.to_string_lossy().into_owned());
    match std::fs::read(path) {
        Ok(bytes) => match String::from_utf8(bytes) {
            Ok(text) => run_source(&name, &text, seed),
            Err(_) => run_source(&name, "\u{0}", seed),
        },
        Err(e) => Outcome {
            exit_code: 2,
            report: format!(
                "supergeo scenario report\nscenario: {name}\n\nread error: {e}\n\n--- results ---\nscenario = {name}\nread-error = {e}\nexit = 2\n"
            ),
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SRC: &str = "\
[chart]
even = x, y
odd = th1, th2

[metric g]
standard = (0,2|2)

[metric bad]
(x,x) = 1
(y,y) = 0
(th1,th2) = -1

[vectorfield T]
x = 1

[run]
validate-metric g
check-killing T g --mode all
solve-killing g --degree 1
";

    #[test]
    fn flat_run_passes() {
        let out = run_source("flat", SRC, 0);
        assert_eq!(out.exit_code, 0, "{}", out.report);
        assert!(out.report.contains("cmd.3.dims = 6|6"));
        assert!(out.report.contains("cmd.2.agree = yes"));
        assert_eq!(out, run_source("flat", SRC, 0));
    }

    #[test]
    fn exit_codes() {
        let degenerate = SRC.replace("validate-metric g", "validate-metric bad");
        let out = run_source("d", &degenerate, 0);
        assert_eq!(out.exit_code, 1);
        assert!(out.report.contains("violation = body of the component matrix is degenerate"));
        assert_eq!(run_source("p", "[chart]\neven = x +", 0).exit_code, 2);
        let domain = SRC.replace("check-killing T g --mode all", "osp-frame bad");
        assert_eq!(run_source("m", &domain, 0).exit_code, 3);
    }
}
